//! Adaptive Gauss-Kronrod (G7/K15) integration on fixed-width panels with
//! bisection refinement.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_DEPTH: u32 = 30;

/// Initial panel layout: the interval is cut into panels of at most `width`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PanelRule {
    pub width: f64,
}

impl PanelRule {
    pub fn width(width: f64) -> Self {
        Self { width }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IntegralEstimate {
    pub value: f64,
    pub abs_error: f64,
    /// Integral of the second component, on the same panels.
    pub companion: f64,
    pub panels: usize,
}

/// `∫_a^b f` to absolute tolerance `tol`.
pub fn integrate_adaptive<F>(
    f: &F,
    a: f64,
    b: f64,
    rule: PanelRule,
    tol: f64,
    max_panels: usize,
) -> Result<IntegralEstimate>
where
    F: Fn(f64) -> f64 + Sync,
{
    integrate_with_companion(&|x| (f(x), 0.0), a, b, rule, tol, max_panels)
}

/// Integrates the first component of `f` adaptively and the second on the
/// resulting panels (it does not drive refinement). Panels are processed in
/// parallel and summed in a fixed order.
pub fn integrate_with_companion<F>(
    f: &F,
    a: f64,
    b: f64,
    rule: PanelRule,
    tol: f64,
    max_panels: usize,
) -> Result<IntegralEstimate>
where
    F: Fn(f64) -> (f64, f64) + Sync,
{
    if !(b > a) {
        return Ok(IntegralEstimate::default());
    }
    if !(rule.width > 0.0 && tol > 0.0) {
        return Err(Error::Domain {
            op: "integrate",
            msg: format!("panel width {} and tolerance {tol} must be positive", rule.width),
        });
    }
    let n0 = ((b - a) / rule.width).ceil().max(1.0) as usize;
    if n0 > max_panels {
        return Err(Error::ToleranceNotReached {
            tol,
            panels: max_panels,
            err: f64::INFINITY,
        });
    }
    let h = (b - a) / n0 as f64;
    let density = tol / (b - a);
    let budget = AtomicUsize::new(max_panels - n0);
    let parts: Vec<(IntegralEstimate, bool)> = (0..n0)
        .into_par_iter()
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == n0 { b } else { lo + h };
            refine(f, lo, hi, density, 0, &budget)
        })
        .collect();
    let mut total = IntegralEstimate::default();
    let mut converged = true;
    for (p, ok) in parts {
        total.value += p.value;
        total.abs_error += p.abs_error;
        total.companion += p.companion;
        total.panels += p.panels;
        converged &= ok;
    }
    if !converged || total.panels > max_panels || total.abs_error > tol {
        return Err(Error::ToleranceNotReached {
            tol,
            panels: total.panels.min(max_panels),
            err: total.abs_error,
        });
    }
    Ok(total)
}

// `budget` counts the extra panels still available; a panel is split only
// if one can be taken from it.
fn refine<F>(
    f: &F,
    a: f64,
    b: f64,
    density: f64,
    depth: u32,
    budget: &AtomicUsize,
) -> (IntegralEstimate, bool)
where
    F: Fn(f64) -> (f64, f64) + Sync,
{
    let (k, g, comp, abs) = gk15(f, a, b);
    let err = (k - g).abs() + 4.0 * f64::EPSILON * abs;
    let split = err > density * (b - a)
        && depth < MAX_DEPTH
        && budget
            .fetch_update(Ordering::Relaxed, Ordering::Relaxed, |v| v.checked_sub(1))
            .is_ok();
    if !split {
        let ok = err <= density * (b - a);
        return (
            IntegralEstimate {
                value: k,
                abs_error: err,
                companion: comp,
                panels: 1,
            },
            ok,
        );
    }
    let m = 0.5 * (a + b);
    let (l, ok_l) = refine(f, a, m, density, depth + 1, budget);
    let (r, ok_r) = refine(f, m, b, density, depth + 1, budget);
    (
        IntegralEstimate {
            value: l.value + r.value,
            abs_error: l.abs_error + r.abs_error,
            companion: l.companion + r.companion,
            panels: l.panels + r.panels,
        },
        ok_l && ok_r,
    )
}

/// Kronrod and Gauss estimates, Kronrod estimate of the companion, and
/// `∫|f|` by the Kronrod rule.
fn gk15<F>(f: &F, a: f64, b: f64) -> (f64, f64, f64, f64)
where
    F: Fn(f64) -> (f64, f64),
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let (fc, cc) = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut comp = WGK[7] * cc;
    let mut abs = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = h * XGK[j];
        let (f1, c1) = f(c - dx);
        let (f2, c2) = f(c + dx);
        k += WGK[j] * (f1 + f2);
        comp += WGK[j] * (c1 + c2);
        abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            g += WG[j / 2] * (f1 + f2);
        }
    }
    (k * h, g * h, comp * h, abs * h)
}
