//! Digamma and log-gamma for positive real arguments.
//!
//! Both use upward recurrence to `x >= 10` followed by the asymptotic series,
//! which is accurate to about 1e-15 relative in `f64` for `x >= 1e-8`.

use log::warn;

use crate::scalar::Scalar;

/// Smallest argument accepted by [`digamma`]; smaller inputs are clamped.
pub const DIGAMMA_FLOOR: f64 = 1e-8;

const SHIFT: f64 = 10.0;

/// ψ(x) = d/dx log Γ(x) for x > 0.
pub fn digamma<T: Scalar>(x: T) -> T {
    let floor = T::of(DIGAMMA_FLOOR);
    let mut x = x;
    if !(x >= floor) {
        warn!("digamma argument {x} below {DIGAMMA_FLOOR}; clamped");
        x = floor;
    }
    let one = T::one();
    let shift = T::of(SHIFT);
    let mut acc = T::zero();
    while x < shift {
        acc -= one / x;
        x += one;
    }
    let inv2 = one / (x * x);
    // Bernoulli terms B_2k / (2k x^2k), k = 1..7, in Horner form.
    let series = inv2
        * (T::of(1.0 / 12.0)
            - inv2
                * (T::of(1.0 / 120.0)
                    - inv2
                        * (T::of(1.0 / 252.0)
                            - inv2
                                * (T::of(1.0 / 240.0)
                                    - inv2
                                        * (T::of(1.0 / 132.0)
                                            - inv2
                                                * (T::of(691.0 / 32760.0)
                                                    - inv2 * T::of(1.0 / 12.0)))))));
    acc + x.ln() - T::of(0.5) / x - series
}

/// log Γ(x) for x > 0. Returns NaN for non-positive input.
pub fn ln_gamma<T: Scalar>(x: T) -> T {
    if !(x > T::zero()) {
        return T::nan();
    }
    let one = T::one();
    let shift = T::of(SHIFT);
    let mut z = x;
    let mut prod = one;
    while z < shift {
        prod *= z;
        z += one;
    }
    let inv = one / z;
    let inv2 = inv * inv;
    // Stirling series with coefficients B_2k / (2k (2k-1)), k = 1..7.
    let series = inv
        * (T::of(1.0 / 12.0)
            - inv2
                * (T::of(1.0 / 360.0)
                    - inv2
                        * (T::of(1.0 / 1260.0)
                            - inv2
                                * (T::of(1.0 / 1680.0)
                                    - inv2
                                        * (T::of(1.0 / 1188.0)
                                            - inv2
                                                * (T::of(691.0 / 360360.0)
                                                    - inv2 * T::of(1.0 / 156.0)))))));
    let half_ln_2pi = T::of(0.918_938_533_204_672_8);
    (z - T::of(0.5)) * z.ln() - z + half_ln_2pi + series - prod.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EULER: f64 = 0.577_215_664_901_532_9;

    #[test]
    fn known_values() {
        assert!((digamma(1.0f64) + EULER).abs() < 1e-14);
        assert!((digamma(0.5f64) + EULER + 2.0 * 2f64.ln()).abs() < 1e-14);
        assert!(ln_gamma(1.0f64).abs() < 1e-14);
        assert!(ln_gamma(2.0f64).abs() < 1e-14);
        assert!((ln_gamma(0.5f64) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
        assert!((ln_gamma(11.0f64) - 3_628_800f64.ln()).abs() < 1e-12);
        assert!(ln_gamma(0.0f64).is_nan());
    }

    #[test]
    fn floor_clamp() {
        assert_eq!(digamma(0.0f64), digamma(DIGAMMA_FLOOR));
        assert!(digamma(1e-8f64) < -1e7);
    }

    #[test]
    fn f32_is_close() {
        assert!((digamma(3.5f32) as f64 - digamma(3.5f64)).abs() < 1e-5);
        assert!((ln_gamma(7.25f32) as f64 - ln_gamma(7.25f64)).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn digamma_matches_statrs(x in 1e-6f64..1e6) {
            let ours = digamma(x);
            let theirs = statrs::function::gamma::digamma(x);
            prop_assert!((ours - theirs).abs() <= 1e-12 * theirs.abs().max(1.0), "x={x} {ours} {theirs}");
        }

        #[test]
        fn ln_gamma_matches_statrs(x in 1e-6f64..1e6) {
            let ours = ln_gamma(x);
            let theirs = statrs::function::gamma::ln_gamma(x);
            prop_assert!((ours - theirs).abs() <= 1e-12 * theirs.abs().max(1.0), "x={x} {ours} {theirs}");
        }

        #[test]
        fn digamma_recurrence(x in 1e-3f64..100.0) {
            prop_assert!((digamma(x + 1.0) - digamma(x) - 1.0 / x).abs() < 1e-11 * (1.0 / x).max(1.0));
        }

        #[test]
        fn exp_digamma_below_identity(x in 1e-3f64..1e4) {
            prop_assert!(digamma(x).exp() < x);
        }
    }
}
