use cortex_core::gate::{decide, gate_score};
use proptest::prelude::*;

// mpmath at 40 digits over the f32-rounded inputs.
#[test]
fn frozen_high_precision_scores() {
    let cases: [(&[f32], &[f32], f64); 3] = [
        (&[0.3, -1.2, 2.5, 0.7], &[1.1, 0.4, -0.6, 2.0], -0.036_317_010_552_785_85),
        (&[1e-3, 2e-3, -5e-4], &[3.0, 1.0, 2.0], 0.466_569_474_815_843_45),
        (&[1e20, 1e20], &[1.0, 0.0], std::f64::consts::FRAC_1_SQRT_2),
    ];
    for (h, t, want) in cases {
        assert!((gate_score(h, t).unwrap() - want).abs() < 1e-12);
    }
}

fn vector(dim: usize) -> impl Strategy<Value = Vec<f32>> {
    prop::collection::vec(-100.0f32..100.0, dim)
}

proptest! {
    #[test]
    fn bounded_and_symmetric(h in vector(16), t in vector(16)) {
        prop_assume!(h.iter().any(|&v| v != 0.0) && t.iter().any(|&v| v != 0.0));
        let s = gate_score(&h, &t).unwrap();
        prop_assert!((-1.0..=1.0).contains(&s));
        prop_assert_eq!(s, gate_score(&t, &h).unwrap());
    }

    #[test]
    fn power_of_two_scaling_is_exact(h in vector(8), t in vector(8), e in -20i32..20) {
        prop_assume!(h.iter().any(|&v| v != 0.0) && t.iter().any(|&v| v != 0.0));
        let a = 2f32.powi(e);
        let scaled: Vec<f32> = h.iter().map(|v| v * a).collect();
        prop_assert!((gate_score(&scaled, &t).unwrap() - gate_score(&h, &t).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn acceptance_is_monotone_in_theta(h in vector(8), t in vector(8), a in -1.0f64..1.0, b in -1.0f64..1.0) {
        prop_assume!(h.iter().any(|&v| v != 0.0) && t.iter().any(|&v| v != 0.0));
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if decide(&h, &t, hi, 0).unwrap().accepted {
            prop_assert!(decide(&h, &t, lo, 0).unwrap().accepted);
        }
    }
}
