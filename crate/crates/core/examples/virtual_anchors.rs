//! Virtual anchors of one base station and which of them an agent sees.

use mint_uwb::geometry::{expected_visible_set, generate_vas, Point2D};
use mint_uwb::harness::default_plan;

fn main() {
    let plan = default_plan();
    let bs = Point2D::new(1.0, 3.5);
    let vas = generate_vas(&plan, bs, 0, 2);
    println!("{} anchors up to order 2", vas.len());

    let agent = Point2D::new(6.0, 1.8);
    let visible = expected_visible_set(agent, 0, &vas, &plan);
    println!("{} visible from ({}, {}):", visible.len(), agent.x, agent.y);
    for (va, d) in visible.vas.iter().zip(&visible.distances) {
        println!(
            "  id {:2} order {} walls {:?} at ({:6.2}, {:6.2})  path {:.3} m",
            va.id, va.order, va.mirror_walls, va.position.x, va.position.y, d
        );
    }
}
