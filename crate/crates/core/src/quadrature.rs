//! Sextuple Bessel integrals `I(n_1, ..., n_6) = ∫_0^∞ Π J_{n_i}(r) r dr`.
//!
//! The main route is the truncated sum over zeros of `J_1`,
//!
//! `Ĩ = (2/9) Σ_{n=0}^{N} Π J_{n_i}(λ_n/3) / J_0(λ_n)^2`,
//!
//! with a tail bound for `n > N` and a separate budget for floating point
//! evaluation error. [`direct_i6`] integrates over `[0, R]` instead and
//! serves as an independent check.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::{
    bessel_sweep, j0, load_or_compute_zeros, pointwise_bound, ZeroTable,
};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::integrate::{integrate_with_companion, PanelRule};

/// Zero index from which the envelope bound on `J_0(λ_n)^2` is used.
pub const ENVELOPE_START: usize = 22000;
/// `54/(7.92π)`: the tail is at most `TAIL_CONSTANT · Σ_{n>N} 1/n^2`.
pub const TAIL_CONSTANT: f64 = 54.0 / (7.92 * std::f64::consts::PI);
/// Orders up to this value are served from a cached table.
const TABLE_ORDER_CAP: usize = 200;
const CHUNK: usize = 512;
const U: f64 = f64::EPSILON / 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QuadEnclosure {
    pub value: f64,
    pub tail_bound: f64,
    pub eval_error_budget: f64,
    pub lower: f64,
    pub upper: f64,
}

impl QuadEnclosure {
    /// Builds the enclosure. The tail is one-sided when the sign of the
    /// integrand is known.
    pub fn new(value: f64, tail_bound: f64, eval_error_budget: f64, sign: Sign) -> Self {
        let (lo_tail, hi_tail) = match sign {
            Sign::Nonnegative => (0.0, tail_bound),
            Sign::Nonpositive => (tail_bound, 0.0),
            Sign::Mixed => (tail_bound, tail_bound),
        };
        Self {
            value,
            tail_bound,
            eval_error_budget,
            lower: value - lo_tail - eval_error_budget,
            upper: value + hi_tail + eval_error_budget,
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn intersects(&self, other: &QuadEnclosure) -> bool {
        self.lower <= other.upper && other.lower <= self.upper
    }

    pub fn scaled(&self, c: f64) -> QuadEnclosure {
        let (a, b) = (self.lower * c, self.upper * c);
        QuadEnclosure {
            value: self.value * c,
            tail_bound: self.tail_bound * c.abs(),
            eval_error_budget: self.eval_error_budget * c.abs(),
            lower: a.min(b),
            upper: a.max(b),
        }
    }
}

/// Sign of the integrand, when known.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Nonnegative,
    Nonpositive,
    Mixed,
}

/// Six signed orders.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntegralSpec {
    pub orders: [i64; 6],
}

impl IntegralSpec {
    pub fn new(orders: [i64; 6]) -> Self {
        Self { orders }
    }

    /// `𝓘(k, m, l) = I(k, k, m, m, l, l)`.
    pub fn triple(k: u64, m: u64, l: u64) -> Self {
        let (k, m, l) = (k as i64, m as i64, l as i64);
        Self::new([k, k, m, m, l, l])
    }

    pub fn max_order(&self) -> u64 {
        self.orders.iter().map(|n| n.unsigned_abs()).max().unwrap_or(0)
    }

    /// True when every `|n_i|` occurs an even number of times, so the
    /// integrand is `±J_k^2 J_m^2 J_l^2`.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric_triple().is_some()
    }

    /// `(sign, [k, m, l])` with `Π J_{n_i} = sign · J_k^2 J_m^2 J_l^2`.
    pub fn symmetric_triple(&self) -> Option<(f64, [u64; 3])> {
        let mut abs: Vec<u64> = self.orders.iter().map(|n| n.unsigned_abs()).collect();
        abs.sort_unstable();
        if abs[0] != abs[1] || abs[2] != abs[3] || abs[4] != abs[5] {
            return None;
        }
        Some((self.sign_factor(), [abs[0], abs[2], abs[4]]))
    }

    /// `Π J_{n_i} = sign_factor · Π J_{|n_i|}`.
    pub fn sign_factor(&self) -> f64 {
        let odd_neg: u64 = self
            .orders
            .iter()
            .filter(|&&n| n < 0)
            .map(|n| n.unsigned_abs())
            .sum();
        if odd_neg % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn sign(&self) -> Sign {
        match self.symmetric_triple() {
            Some((s, _)) if s > 0.0 => Sign::Nonnegative,
            Some(_) => Sign::Nonpositive,
            None => Sign::Mixed,
        }
    }

    fn abs_orders(&self) -> [usize; 6] {
        self.orders.map(|n| n.unsigned_abs() as usize)
    }

    // The summation formula needs an even integrand.
    fn check_parity(&self) -> Result<()> {
        let s: i64 = self.orders.iter().sum();
        if s % 2 != 0 {
            return Err(Error::Domain {
                op: "quad_i6",
                msg: format!("order sum {s} is odd, the integrand is not even in r"),
            });
        }
        Ok(())
    }
}

impl fmt::Display for IntegralSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let o = &self.orders;
        write!(f, "({},{},{},{},{},{})", o[0], o[1], o[2], o[3], o[4], o[5])
    }
}

impl FromStr for IntegralSpec {
    type Err = Error;

    /// Six comma-separated orders, or three for `𝓘(k, m, l)`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: std::result::Result<Vec<i64>, _> =
            s.split(',').map(|p| p.trim().parse::<i64>()).collect();
        let parts = parts.map_err(|e| Error::Domain {
            op: "IntegralSpec",
            msg: format!("cannot parse orders {s:?}: {e}"),
        })?;
        match parts.len() {
            6 => Ok(Self::new([parts[0], parts[1], parts[2], parts[3], parts[4], parts[5]])),
            3 if parts.iter().all(|&p| p >= 0) => Ok(Self::triple(
                parts[0] as u64,
                parts[1] as u64,
                parts[2] as u64,
            )),
            _ => Err(Error::Domain {
                op: "IntegralSpec",
                msg: format!("expected 6 orders or 3 nonnegative orders, got {s:?}"),
            }),
        }
    }
}

/// Nodes and weights of the truncated sum for a given `N`.
#[derive(Debug)]
pub struct QuadRule {
    pub n: usize,
    pub zeros: Arc<ZeroTable>,
    /// `x_n = λ_n / 3`, `n = 0..=N`.
    pub nodes: Vec<f64>,
    /// `(2/9) / J_0(λ_n)^2`.
    pub weights: Vec<f64>,
    /// `max_n 2/|J_0(λ_n)|`, the relative sensitivity of the weights.
    pub weight_sensitivity: f64,
    table: Mutex<Option<Arc<OrderTable>>>,
}

/// `values[k][n] = J_k(x_n)` for `k <= max_order`.
#[derive(Debug)]
pub struct OrderTable {
    pub max_order: usize,
    pub values: Vec<Vec<f64>>,
}

impl QuadRule {
    pub fn new(n: usize, zeros: Arc<ZeroTable>) -> Result<Self> {
        if zeros.count() < n.max(ENVELOPE_START) + 2 {
            return Err(Error::Inconsistent(format!(
                "zero table has {} entries, need {}",
                zeros.count(),
                n.max(ENVELOPE_START) + 2
            )));
        }
        let lam = &zeros.zeros[..=n];
        let j0s: Vec<f64> = lam.par_iter().map(|&l| j0(l)).collect();
        let nodes = lam.iter().map(|l| l / 3.0).collect();
        let weights = j0s.iter().map(|j| (2.0 / 9.0) / (j * j)).collect();
        let weight_sensitivity = j0s.iter().map(|j| 2.0 / j.abs()).fold(0.0, f64::max);
        Ok(Self {
            n,
            zeros,
            nodes,
            weights,
            weight_sensitivity,
            table: Mutex::new(None),
        })
    }

    /// Shared rule for the configuration, built once per `(N, cache path)`.
    pub fn shared(cfg: &Config) -> Result<Arc<QuadRule>> {
        type Key = (usize, Option<PathBuf>);
        static RULES: OnceLock<Mutex<HashMap<Key, Arc<QuadRule>>>> = OnceLock::new();
        cfg.validate()?;
        let path = cfg.effective_cache_path();
        let key = (cfg.truncation_n, path.clone());
        let rules = RULES.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(r) = rules.lock().expect("rule cache poisoned").get(&key) {
            return Ok(Arc::clone(r));
        }
        let count = cfg.truncation_n.max(ENVELOPE_START) + 2;
        let zeros = load_or_compute_zeros(count, path.as_deref())?;
        let rule = Arc::new(QuadRule::new(cfg.truncation_n, zeros)?);
        rules
            .lock()
            .expect("rule cache poisoned")
            .insert(key, Arc::clone(&rule));
        Ok(rule)
    }

    /// `λ_{N+1}/3`, which must exceed twice every order.
    pub fn order_limit(&self) -> f64 {
        self.zeros.zeros[self.n + 1] / 3.0
    }

    pub fn check_order(&self, max_order: u64) -> Result<()> {
        let limit = self.order_limit();
        if 2.0 * max_order as f64 >= limit {
            return Err(Error::OrderOutOfRange {
                order: max_order,
                n: self.n,
                limit,
            });
        }
        Ok(())
    }

    /// Table of `J_k(x_n)` for all `k <= max_order` (at least 150).
    pub fn order_table(&self, max_order: usize) -> Arc<OrderTable> {
        let mut guard = self.table.lock().expect("order table poisoned");
        if let Some(t) = guard.as_ref() {
            if t.max_order >= max_order {
                return Arc::clone(t);
            }
        }
        let m = max_order.max(150);
        let per_node: Vec<Vec<f64>> = self.nodes.par_iter().map(|&x| bessel_sweep(m, x)).collect();
        let mut values = vec![vec![0.0; self.nodes.len()]; m + 1];
        for (i, col) in per_node.iter().enumerate() {
            for (k, v) in col.iter().enumerate() {
                values[k][i] = *v;
            }
        }
        let t = Arc::new(OrderTable {
            max_order: m,
            values,
        });
        *guard = Some(Arc::clone(&t));
        t
    }

    /// Tail bound for `n > N`.
    pub fn tail_bound(&self, max_order: u64) -> Result<f64> {
        self.check_order(max_order)?;
        Ok(tail_from_zeros(&self.zeros, self.n))
    }

    /// Evaluation budget for a sum whose terms are products of six Bessel
    /// values with the given orders. `value_abs` is `Σ w_n |Π J|`.
    fn eval_budget(&self, orders: &[usize; 6], value_abs: f64, bessel_tol: f64) -> f64 {
        let per_node: f64 = chunked_sum(self.nodes.len(), |range| {
            range
                .map(|i| {
                    let x = self.nodes[i];
                    let b = node_magnitude(orders, x);
                    let eps = bessel_tol + 4.0 * f64::EPSILON * x;
                    self.weights[i] * 6.0 * eps * b.powi(5)
                })
                .sum()
        });
        per_node + value_abs * (self.weight_sensitivity * bessel_tol + (self.n + 1) as f64 * U)
    }

    /// Truncated sum and enclosure for a general spec.
    pub fn enclose(&self, spec: &IntegralSpec, cfg: &Config) -> Result<QuadEnclosure> {
        spec.check_parity()?;
        let max_order = spec.max_order();
        let tail = self.tail_bound(max_order)?;
        if tail > cfg.tail_target {
            return Err(Error::TailExceedsTarget {
                tail,
                target: cfg.tail_target,
            });
        }
        let ord = spec.abs_orders();
        let sign = spec.sign_factor();
        let (value, value_abs) = if max_order as usize <= TABLE_ORDER_CAP {
            let t = self.order_table(max_order as usize);
            let cols: Vec<&[f64]> = ord.iter().map(|&k| t.values[k].as_slice()).collect();
            chunked_sum2(self.nodes.len(), |range| {
                let mut s = 0.0;
                let mut a = 0.0;
                for i in range {
                    let p = cols.iter().fold(self.weights[i], |acc, c| acc * c[i]);
                    s += p;
                    a += p.abs();
                }
                (s, a)
            })
        } else {
            let top = max_order as usize;
            chunked_sum2(self.nodes.len(), |range| {
                let mut s = 0.0;
                let mut a = 0.0;
                for i in range {
                    let v = bessel_sweep(top, self.nodes[i]);
                    let p = ord.iter().fold(self.weights[i], |acc, &k| acc * v[k]);
                    s += p;
                    a += p.abs();
                }
                (s, a)
            })
        };
        let budget = self.eval_budget(&ord, value_abs, cfg.bessel_tol);
        Ok(QuadEnclosure::new(sign * value, tail, budget, spec.sign()))
    }
}

/// `max_i min(1, pointwiseBound(n_i, x)/sqrt(x))`, a bound for every
/// `|J_{n_i}(x)|`.
pub(crate) fn node_magnitude(orders: &[usize], x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let s = x.sqrt();
    orders
        .iter()
        .map(|&k| (pointwise_bound(k as i64, x) / s).min(1.0))
        .fold(0.0, f64::max)
}

/// Tail of the truncated sum for `n > N`, valid when `λ_{N+1}/3` exceeds
/// twice every order.
///
/// Each term is at most `6/(λ_n^3 J_0(λ_n)^2)`. Beyond `n = 22000` the
/// envelope bound and `λ_n > (2/3)πn` give `TAIL_CONSTANT/n^2`, summed as
/// `TAIL_CONSTANT/max(N, 22000)`; terms between `N` and 22000 are summed
/// directly.
pub(crate) fn tail_from_zeros(zeros: &ZeroTable, n: usize) -> f64 {
    let start = n.max(ENVELOPE_START);
    let mut tail = TAIL_CONSTANT / start as f64;
    if n < ENVELOPE_START {
        let direct: f64 = zeros.zeros[n + 1..=ENVELOPE_START]
            .par_iter()
            .map(|&l| {
                let j = j0(l);
                6.0 / (l * l * l * j * j)
            })
            .sum();
        tail += direct * (1.0 + 1e-10);
    }
    tail
}

/// Tail bound for the given orders and truncation `N`.
pub fn tail_bound(orders: &[i64], n: usize) -> Result<f64> {
    let zeros = crate::bessel::shared_zeros(n.max(ENVELOPE_START) + 2)?;
    let limit = zeros.zeros[n + 1] / 3.0;
    let max_order = orders.iter().map(|o| o.unsigned_abs()).max().unwrap_or(0);
    if 2.0 * max_order as f64 >= limit {
        return Err(Error::OrderOutOfRange {
            order: max_order,
            n,
            limit,
        });
    }
    Ok(tail_from_zeros(&zeros, n))
}

/// Enclosure of `𝓘(k, m, l)` by the truncated sum.
pub fn quad_i3(k: u64, m: u64, l: u64, cfg: &Config) -> Result<QuadEnclosure> {
    QuadRule::shared(cfg)?.enclose(&IntegralSpec::triple(k, m, l), cfg)
}

/// Enclosure of `I(n_1, ..., n_6)` by the truncated sum.
pub fn quad_i6(spec: &IntegralSpec, cfg: &Config) -> Result<QuadEnclosure> {
    QuadRule::shared(cfg)?.enclose(spec, cfg)
}

/// Enclosure of `I(n_1, ..., n_6)` by adaptive integration on `[0, R]`
/// plus the pointwise-bound tail `Π bounds / R`.
pub fn direct_i6(spec: &IntegralSpec, r_max: f64, tol: f64) -> Result<QuadEnclosure> {
    let max_order = spec.max_order();
    if !(r_max >= 4.0 * max_order as f64 + 40.0) {
        return Err(Error::Domain {
            op: "direct_i6",
            msg: format!("R = {r_max} must be at least 4 * max order + 40"),
        });
    }
    let ord = spec.abs_orders();
    let top = max_order as usize;
    let sign = spec.sign_factor();
    let eps = Config::default().bessel_tol;
    let integrand = |r: f64| {
        let v = bessel_sweep(top, r);
        let p = ord.iter().fold(sign * r, |acc, &k| acc * v[k]);
        let b = node_magnitude(&ord, r);
        (p, 6.0 * eps * b.powi(5) * r)
    };
    let max_panels = ((r_max / FRAC_PI_2) as usize + 1) * 64;
    let est = integrate_with_companion(&integrand, 0.0, r_max, PanelRule::width(FRAC_PI_2), tol, max_panels)?;
    let tail: f64 = spec
        .orders
        .iter()
        .map(|&n| pointwise_bound(n, r_max))
        .product::<f64>()
        / r_max;
    Ok(QuadEnclosure::new(
        est.value,
        tail,
        est.abs_error + est.companion,
        spec.sign(),
    ))
}

/// Sums `f` over fixed chunks of `0..len` in parallel and combines the
/// chunk results in index order.
pub(crate) fn chunked_sum<F>(len: usize, f: F) -> f64
where
    F: Fn(std::ops::Range<usize>) -> f64 + Sync,
{
    let parts: Vec<f64> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| f(c * CHUNK..((c + 1) * CHUNK).min(len)))
        .collect();
    parts.iter().sum()
}

pub(crate) fn chunked_sum2<F>(len: usize, f: F) -> (f64, f64)
where
    F: Fn(std::ops::Range<usize>) -> (f64, f64) + Sync,
{
    let parts: Vec<(f64, f64)> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| f(c * CHUNK..((c + 1) * CHUNK).min(len)))
        .collect();
    parts
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y))
}
