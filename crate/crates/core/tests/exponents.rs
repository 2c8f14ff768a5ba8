use nulab::exponents::{critical_source_exponent, derive_exponents, derive_exponents_float, Exponent, ProblemParams, Rational};
use proptest::prelude::*;

fn params(n: u32, p: i128, q: i128, s: i128) -> ProblemParams {
    ProblemParams::new(n, Exponent::int(p), Exponent::int(q), Exponent::int(s))
}

proptest! {
    #[test]
    fn rational_and_float_paths_agree(n in 3u32..8, p in 2i128..40, q in 2i128..40, s in 2i128..60) {
        let pr = params(n, p, q, s);
        let (Ok(exact), Ok(float)) = (derive_exponents(&pr), derive_exponents_float(&pr)) else {
            return Ok(());
        };
        for ((name, a), (_, b)) in exact.named().iter().zip(float.named().iter()) {
            let (a, b) = (a.as_f64(), b.as_f64());
            if a.is_finite() {
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{name}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn s0_decreases_in_q(n in 3u32..10, q in 0.0f64..1.0, dq in 0.01f64..50.0) {
        let lo = n as f64 / 2.0 + 0.01 + q * 20.0;
        let a = critical_source_exponent(n, lo).unwrap();
        let b = critical_source_exponent(n, lo + dq).unwrap();
        prop_assert!(b < a);
        prop_assert!(b > n as f64 / 2.0);
    }

    #[test]
    fn delta_tracks_chi(n in 3u32..8, p in 2i128..40, q in 2i128..40) {
        let pr = ProblemParams::new(n, Exponent::int(p), Exponent::int(q), Exponent::Infinite);
        if let Ok(t) = derive_exponents(&pr) {
            let (Some(d), Some(chi)) = (t.delta.exact(), t.chi.exact()) else {
                return Ok(());
            };
            prop_assert_eq!(d, Rational::from_integer(2) - chi.recip());
            prop_assert_eq!(d > Rational::from_integer(1), chi > Rational::from_integer(1));
        }
    }
}

#[test]
fn infinite_exponents_enter_as_zero_reciprocals() {
    let t = derive_exponents(&ProblemParams::new(3, Exponent::Infinite, Exponent::Infinite, Exponent::Infinite)).unwrap();
    // 1/p* = 1/2 + 1/2 capped at 1.
    assert_eq!(t.p_star.as_f64(), 1.0);
    assert_eq!(t.s0.as_f64(), 1.5);
}
