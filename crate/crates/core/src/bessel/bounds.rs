use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::j1_zero;
use crate::error::{Error, Result};

/// Bound for `sqrt(r)|J_0(r)|`.
pub const GAMMA: f64 = 0.89763;
pub const BETA: f64 = 0.674886;
pub const ALPHA: f64 = 1.855758;

/// Smallest zero index for which the envelope lower bound is certified.
const ENVELOPE_FIRST_INDEX: usize = 22001;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub gamma: f64,
    pub beta: f64,
    pub alpha: f64,
}

impl BoundConstants {
    pub const VALUES: BoundConstants = BoundConstants {
        gamma: GAMMA,
        beta: BETA,
        alpha: ALPHA,
    };
}

/// `B_n`, a bound for `sup_r sqrt(r)|J_n(r)|`; `B_0 = γ`.
pub fn olenko_bound(n: u64) -> f64 {
    if n == 0 {
        return GAMMA;
    }
    let nf = n as f64;
    let c = nf.cbrt();
    BETA * (c + ALPHA / c + 3.0 * ALPHA * ALPHA / (10.0 * nf)).sqrt()
}

/// Upper bound for `sqrt(r)|J_n(r)|`, `r > 0`.
pub fn pointwise_bound(n: i64, r: f64) -> f64 {
    let n = n.unsigned_abs();
    if n == 0 {
        return GAMMA;
    }
    let b = olenko_bound(n);
    if r > 2.0 * n as f64 {
        b.min(1.0)
    } else {
        b
    }
}

/// `∫_0^∞ J_n(r)^2 r^{-λ} dr` in closed form, `n >= 1`, `0 < λ < 2n + 1`.
pub fn j2_moment(n: u64, lambda: f64) -> Result<f64> {
    let nf = n as f64;
    if n == 0 || !(lambda > 0.0 && lambda < 2.0 * nf + 1.0) {
        return Err(Error::Domain {
            op: "j2_moment",
            msg: format!("need n >= 1 and 0 < lambda < 2n+1, got n = {n}, lambda = {lambda}"),
        });
    }
    let lg = libm::lgamma;
    let log = lg(lambda) + lg(nf + 0.5 * (1.0 - lambda))
        - lambda * std::f64::consts::LN_2
        - 2.0 * lg(0.5 * (1.0 + lambda))
        - lg(nf + 0.5 * (1.0 + lambda));
    Ok(log.exp())
}

fn envelope_threshold() -> f64 {
    static T: OnceLock<f64> = OnceLock::new();
    *T.get_or_init(|| j1_zero(ENVELOPE_FIRST_INDEX))
}

/// `0.99 · 2/(πλ)`, a lower bound for `J_0(λ)^2` at zeros `λ = λ_n` of
/// `J_1` with `n > 22000`.
pub fn envelope_lower_bound(lambda: f64) -> Result<f64> {
    let t = envelope_threshold();
    if !(lambda >= t * (1.0 - 1e-14)) {
        return Err(Error::Domain {
            op: "envelope_lower_bound",
            msg: format!("lambda = {lambda} is below the first admissible zero {t}"),
        });
    }
    Ok(0.99 * 2.0 / (PI * lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::{bessel_j, j0};
    use crate::integrate::{integrate_adaptive, PanelRule};
    use proptest::prelude::*;

    #[test]
    fn constants_and_b1() {
        assert_eq!(pointwise_bound(0, 3.0), 0.89763);
        let b1 = BETA * (1.0 + ALPHA + 0.3 * ALPHA * ALPHA).sqrt();
        assert!((pointwise_bound(1, 0.5) - b1).abs() < 1e-15);
        assert!((b1 - 1.33090).abs() < 1e-5);
        assert_eq!(pointwise_bound(5, 11.0), 1.0);
        assert!(pointwise_bound(5, 9.0) > 1.0);
        assert_eq!(pointwise_bound(-5, 11.0), 1.0);
    }

    #[test]
    fn olenko_shape() {
        let b: Vec<f64> = (0..=200).map(olenko_bound).collect();
        let max_small = b[..=5].iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(max_small, b[1]);
        assert!(b[1] < b[36]);
        for n in 6..200 {
            assert!(b[n + 1] > b[n], "B_n not increasing at {n}");
        }
    }

    #[test]
    fn moment_values() {
        for n in 1..30 {
            let m = j2_moment(n, 1.0).unwrap();
            assert!((m - 0.5 / n as f64).abs() < 1e-14);
        }
        assert_eq!(j2_moment(1, 1.0).unwrap(), 0.5);
        assert!(j2_moment(0, 1.0).is_err());
        assert!(j2_moment(2, 5.0).is_err());
        assert!(j2_moment(2, 0.0).is_err());
    }

    #[test]
    fn moment_matches_direct_integration() {
        // ∫_0^R J_2^2 r^{-1/2} dr plus the mean tail ∫_R^∞ r^{-3/2}/(π) dr.
        let r_max = 1e5;
        let f = |r: f64| {
            let j = bessel_j(2, r).unwrap().value;
            j * j / r.sqrt()
        };
        let res = integrate_adaptive(&f, 0.0, r_max, PanelRule::width(std::f64::consts::FRAC_PI_2), 1e-10, 2_000_000)
            .unwrap();
        let tail = 2.0 / (PI * r_max.sqrt());
        let want = j2_moment(2, 0.5).unwrap();
        assert!((res.value + tail - want).abs() < 1e-6, "{} vs {want}", res.value + tail);
    }

    #[test]
    fn envelope_guard_and_values() {
        assert!(envelope_lower_bound(100.0).is_err());
        for n in 22001..=22010 {
            let l = j1_zero(n);
            let j = j0(l);
            assert!(j * j > envelope_lower_bound(l).unwrap());
            let ratio = j * j * PI * l / 2.0;
            assert!(ratio > 0.99 && ratio < 1.01);
        }
    }

    proptest! {
        #[test]
        fn pointwise_bound_majorises(n in 0i64..150, r in 0.001f64..3000.0) {
            let j = bessel_j(n, r).unwrap().value;
            prop_assert!(r.sqrt() * j.abs() <= pointwise_bound(n, r) + 1e-12);
        }
    }
}
