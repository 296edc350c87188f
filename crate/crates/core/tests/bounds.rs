use std::f64::consts::PI;

use mint_uwb::bounds::{
    effective_bandwidth, efim, hdop, position_crlb, ranging_crlb, separability_violations, MpcSinr,
};
use mint_uwb::waveform::Pulse;
use mint_uwb::{MintError, SPEED_OF_LIGHT};
use proptest::prelude::*;

proptest! {
    #[test]
    fn orthogonal_paths_add_inverse_variances(s1 in 1.0..1e4f64, s2 in 1.0..1e4f64, phi in 0.0..PI, beta in 1e8..4e9f64) {
        let j = efim(&[
            MpcSinr { va_id: 0, sinr: s1, angle: phi },
            MpcSinr { va_id: 1, sinr: s2, angle: phi + PI / 2.0 },
        ], beta);
        let b = position_crlb(&j).unwrap();
        let want = ranging_crlb(s1, beta) + ranging_crlb(s2, beta);
        prop_assert!((b.trace - want).abs() <= 1e-9 * want);
        prop_assert!((b.var_x + b.var_y - b.trace).abs() <= 1e-9 * want);
    }

    #[test]
    fn more_paths_never_loosen_the_bound(sinrs in proptest::collection::vec((1.0..1e3f64, 0.0..2.0 * PI), 3..10)) {
        let mpcs: Vec<MpcSinr> = sinrs.iter().enumerate().map(|(i, &(s, a))| MpcSinr { va_id: i, sinr: s, angle: a }).collect();
        let full = position_crlb(&efim(&mpcs, 1e9));
        let fewer = position_crlb(&efim(&mpcs[..mpcs.len() - 1], 1e9));
        if let (Ok(full), Ok(fewer)) = (full, fewer) {
            prop_assert!(full.trace <= fewer.trace * (1.0 + 1e-9));
        }
    }
}

#[test]
fn single_path_is_singular() {
    let j = efim(&[MpcSinr { va_id: 0, sinr: 100.0, angle: 0.3 }], 1e9);
    assert!(matches!(position_crlb(&j), Err(MintError::SingularFim { .. })));
}

#[test]
fn ranging_bound_formula() {
    let v = ranging_crlb(10.0, 1e9);
    assert_eq!(v, SPEED_OF_LIGHT * SPEED_OF_LIGHT / (8.0 * PI * PI * 1e18 * 10.0));
}

#[test]
fn effective_bandwidth_against_trapezoid() {
    for tp in [0.2e-9, 0.5e-9, 1e-9, 4e-9] {
        let p = Pulse::with_default_grid(tp, 0.5, 7e9).unwrap();
        let edge = p.occupied_bandwidth() / 2.0;
        let n = 200_000;
        let h = 2.0 * edge / n as f64;
        let (mut m0, mut m2) = (0.0, 0.0);
        for i in 0..=n {
            let f = -edge + i as f64 * h;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            let s = p.spectrum(f).powi(2);
            m0 += w * s;
            m2 += w * f * f * s;
        }
        let oracle = (m2 / m0).sqrt();
        let beta = effective_bandwidth(&p);
        assert!((beta - oracle).abs() < 1e-6 * oracle, "{tp}: {beta} vs {oracle}");
        // the RMS bandwidth lies below the band edge
        assert!(beta < edge);
    }
}

#[test]
fn hdop_and_separability() {
    assert_eq!(hdop(0.2, 0.1), Some(2.0));
    assert_eq!(hdop(0.2, 0.0), None);
    assert_eq!(separability_violations(&[0.0, 1.0, 1.5, 3.0], 1.0), vec![1]);
}
