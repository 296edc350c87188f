//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;

use mint_uwb::geometry::{FloorPlan, Point2D, WallSegment};
use mint_uwb::waveform::{synthesize, DiffuseModel, FrameLayout, Mpc, Pulse, SignalFrame};

/// Mirror image of `p` across the line through `wall`, via complex numbers:
/// `a + u^2 conj(p - a)` with `u` the unit wall direction.
pub fn reflect(p: Point2D, wall: &WallSegment) -> Point2D {
    let a = Complex64::new(wall.endpoint_a.x, wall.endpoint_a.y);
    let b = Complex64::new(wall.endpoint_b.x, wall.endpoint_b.y);
    let u = (b - a) / (b - a).norm();
    let z = a + u * u * (Complex64::new(p.x, p.y) - a).conj();
    Point2D::new(z.re, z.im)
}

/// All mirror sequences of length `0..=max_order` over the reflective walls
/// without immediate repeats, in length-then-lexicographic order, keeping
/// the first sequence that reaches each position (within 1e-9 m).
pub fn enumerate_vas(plan: &FloorPlan, bs: Point2D, max_order: usize) -> Vec<(Vec<usize>, Point2D)> {
    let walls: Vec<usize> = (0..plan.walls.len()).filter(|&i| plan.walls[i].reflective).collect();
    let mut out: Vec<(Vec<usize>, Point2D)> = vec![(vec![], bs)];
    let mut layer: Vec<(Vec<usize>, Point2D)> = vec![(vec![], bs)];
    for _ in 0..max_order {
        let mut next = Vec::new();
        for (seq, pos) in &layer {
            for &w in &walls {
                if seq.last() == Some(&w) {
                    continue;
                }
                let q = reflect(*pos, &plan.walls[w]);
                if out.iter().chain(next.iter()).any(|(_, p): &(Vec<usize>, Point2D)| p.distance(q) <= 1e-9) {
                    continue;
                }
                let mut s = seq.clone();
                s.push(w);
                next.push((s, q));
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Minimum summed cutoff metric over every one-to-one assignment of the
/// expected distances to measurements or dummies, by exhaustive search over
/// the used-measurement subsets.
pub fn brute_force_cost(measured: &[f64], expected: &[f64], dc: f64) -> f64 {
    fn go(i: usize, used: u32, z: &[f64], d: &[f64], dc: f64, memo: &mut Vec<Vec<Option<f64>>>) -> f64 {
        if i == d.len() {
            return 0.0;
        }
        if let Some(v) = memo[i][used as usize] {
            return v;
        }
        let mut best = dc + go(i + 1, used, z, d, dc, memo);
        for (j, &zj) in z.iter().enumerate() {
            if used & (1 << j) == 0 {
                let c = (d[i] - zj).abs().min(dc) + go(i + 1, used | (1 << j), z, d, dc, memo);
                if c < best {
                    best = c;
                }
            }
        }
        memo[i][used as usize] = Some(best);
        best
    }
    let mut memo = vec![vec![None; 1 << measured.len()]; expected.len()];
    go(0, 0, measured, expected, dc, &mut memo)
}

/// Random channel with `k` paths spaced at least `min_spacing * Tp` apart,
/// kept `8 Tp` away from both frame edges. Magnitudes in `[0.1, 1]`.
pub fn separable_channel<R: Rng>(rng: &mut R, pulse: &Pulse, k: usize, min_spacing: f64) -> (Vec<Mpc>, FrameLayout) {
    let tp = pulse.duration();
    let margin = 8.0 * tp;
    let mut delay = margin + rng.gen_range(0.0..tp);
    let mut mpcs = Vec::with_capacity(k);
    for _ in 0..k {
        let mag = rng.gen_range(0.1..1.0);
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        mpcs.push(Mpc {
            delay,
            amplitude: Complex64::from_polar(mag, phase),
            va_id: None,
        });
        delay += tp * rng.gen_range(min_spacing..min_spacing + 4.0);
    }
    let end = mpcs.last().map_or(margin, |m| m.delay) + margin + tp;
    (mpcs, FrameLayout::new(0.0, end))
}

pub fn noiseless_frame(mpcs: &[Mpc], pulse: &Pulse, layout: FrameLayout) -> SignalFrame {
    synthesize(mpcs, &DiffuseModel::none(), 0.0, pulse, layout, &mut mint_uwb::waveform::frame_rng(0, 0, 0))
        .expect("valid channel")
}

/// Random plan of `n` reflective walls inside `[0, 10]^2`, each at least 1 m long.
pub fn random_plan<R: Rng>(rng: &mut R, n: usize) -> FloorPlan {
    let mut walls = Vec::new();
    while walls.len() < n {
        let a = Point2D::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
        let b = Point2D::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
        if a.distance(b) >= 1.0 {
            walls.push(WallSegment::new(a, b, true).unwrap());
        }
    }
    FloorPlan::new(walls, vec![]).unwrap()
}
