mod common;

use mint_uwb::geometry::{
    expected_visible_set, generate_vas, is_visible, mirror_point, FloorPlan, Point2D, WallSegment,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn point() -> impl Strategy<Value = Point2D> {
    (0.5..9.5f64, 0.5..9.5f64).prop_map(|(x, y)| Point2D::new(x, y))
}

proptest! {
    #[test]
    fn anchors_match_mirror_oracle(seed in any::<u64>(), n in 1usize..6, order in 0usize..4, bs in point()) {
        let plan = common::random_plan(&mut ChaCha8Rng::seed_from_u64(seed), n);
        let vas = generate_vas(&plan, bs, 3, order);
        let oracle = common::enumerate_vas(&plan, bs, order);
        prop_assert_eq!(vas.len(), oracle.len());
        for (i, (va, (walls, pos))) in vas.iter().zip(&oracle).enumerate() {
            prop_assert_eq!(va.id, i);
            prop_assert_eq!(va.bs_id, 3);
            prop_assert_eq!(&va.mirror_walls, walls);
            prop_assert_eq!(va.order, walls.len());
            prop_assert!(va.position.distance(*pos) < 1e-9);
        }
    }

    #[test]
    fn mirroring_is_an_involution(p in point(), a in point(), b in point()) {
        prop_assume!(a.distance(b) > 0.1);
        let w = WallSegment::new(a, b, true).unwrap();
        let q = mirror_point(mirror_point(p, &w).unwrap(), &w).unwrap();
        prop_assert!(q.distance(p) < 1e-9);
    }

    #[test]
    fn obstructions_never_reveal_anchors(seed in any::<u64>(), bs in point(), p in point(), o1 in point(), o2 in point()) {
        let plan = common::random_plan(&mut ChaCha8Rng::seed_from_u64(seed), 4);
        prop_assume!(o1.distance(o2) > 0.1);
        let blocked = FloorPlan::new(plan.walls.clone(), vec![WallSegment::new(o1, o2, false).unwrap()]).unwrap();
        for va in generate_vas(&plan, bs, 0, 2) {
            if is_visible(&va, p, &blocked) {
                prop_assert!(is_visible(&va, p, &plan));
            }
        }
    }
}

#[test]
fn square_room_first_order_anchors() {
    let walls = vec![
        WallSegment::reflective(0.0, 0.0, 4.0, 0.0),
        WallSegment::reflective(4.0, 0.0, 4.0, 4.0),
        WallSegment::reflective(4.0, 4.0, 0.0, 4.0),
        WallSegment::reflective(0.0, 4.0, 0.0, 0.0),
    ];
    let plan = FloorPlan::new(walls, vec![]).unwrap();
    let vas = generate_vas(&plan, Point2D::new(1.0, 1.0), 0, 1);
    let got: Vec<Point2D> = vas.iter().map(|v| v.position).collect();
    let want = [(1.0, 1.0), (1.0, -1.0), (7.0, 1.0), (1.0, 7.0), (-1.0, 1.0)];
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(want) {
        assert!(g.distance(Point2D::new(w.0, w.1)) < 1e-12);
    }

    // every first-order reflection is visible from inside a convex room
    let set = expected_visible_set(Point2D::new(3.0, 2.5), 7, &vas, &plan);
    assert_eq!(set.len(), 5);
    assert_eq!(set.position_index, 7);
    for (va, d) in set.vas.iter().zip(&set.distances) {
        assert_eq!(*d, va.position.distance(Point2D::new(3.0, 2.5)));
    }
}

#[test]
fn degenerate_wall_is_rejected() {
    let p = Point2D::new(1.0, 1.0);
    assert!(WallSegment::new(p, p, true).is_err());
}
