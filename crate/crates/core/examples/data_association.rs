//! Matching measured path lengths to the anchors expected at a position.

use mint_uwb::association::{associate_at, PositionSource};
use mint_uwb::geometry::{expected_visible_set, generate_vas, Point2D};
use mint_uwb::harness::default_plan;

fn main() -> mint_uwb::Result<()> {
    let plan = default_plan();
    let vas = generate_vas(&plan, Point2D::new(12.0, 0.3), 1, 2);
    let truth = Point2D::new(9.0, 1.8);

    // measured: three true paths with small errors, one missed path, one clutter
    let visible = expected_visible_set(truth, 0, &vas, &plan);
    let mut measured: Vec<f64> = visible.distances.iter().take(3).zip([0.02, -0.05, 0.01]).map(|(d, e)| d + e).collect();
    measured.push(17.3);

    let predicted = Point2D::new(9.1, 1.7);
    let c = associate_at(PositionSource::Predicted(predicted), &vas, &plan, &measured, 0.3)?;
    for &(m, va) in &c.assignments {
        println!("measurement {m} ({:.2} m) -> VA {va}", measured[m]);
    }
    println!("clutter {:?}, cost {:.3}", c.clutter, c.cost);
    Ok(())
}
