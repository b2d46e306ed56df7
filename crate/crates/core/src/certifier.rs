//! Certification of the five families of sextuple Bessel integral bounds
//! against `𝓘(0,0,0)`:
//!
//! | item | integral      | target | domain            | exception         |
//! |------|---------------|--------|-------------------|-------------------|
//! | i    | `𝓘(0,0,n)`    | 1/5    | `n > 1`           | `n = 1` (equality)|
//! | ii   | `𝓘(0,n,n)`    | 2/15   | `n > 0`           |                   |
//! | iii  | `𝓘(n,n,n)`    | 1/3    | `n > 0`           |                   |
//! | iv   | `𝓘(n,n,m)`    | 1/9    | `n, m > 0, n ≠ m` | `(1,2)`, 1/6      |
//! | v    | `𝓘(n,m,l)`    | 1/15   | `n > m > l >= 0`  | `(3,2,0)`, 1/6    |
//!
//! Large orders are covered by closed-form majorants built from the
//! pointwise bounds and `∫ J_n^2 r^{-1} dr = 1/(2n)`; the finitely many
//! remaining cases use enclosures from the truncated quadrature.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::{olenko_bound, ALPHA, BETA, GAMMA};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::quadrature::{node_magnitude, QuadEnclosure, QuadRule, Sign};

/// Lower bound for `𝓘(0,0,0)` used by the closed-form thresholds.
pub const REFERENCE_LOWER: f64 = 0.33682;
/// Scan ceiling for the monotonicity check of the majorants.
const MONOTONE_SCAN_TO: u64 = 2000;
const NODE_CHUNK: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LemmaItem {
    I,
    Ii,
    Iii,
    Iv,
    V,
}

impl LemmaItem {
    pub const ALL: [LemmaItem; 5] = [Self::I, Self::Ii, Self::Iii, Self::Iv, Self::V];

    pub fn id(&self) -> &'static str {
        match self {
            Self::I => "i",
            Self::Ii => "ii",
            Self::Iii => "iii",
            Self::Iv => "iv",
            Self::V => "v",
        }
    }

    /// `(numerator, denominator)` of the target fraction.
    pub fn target(&self) -> (u32, u32) {
        match self {
            Self::I => (1, 5),
            Self::Ii => (2, 15),
            Self::Iii => (1, 3),
            Self::Iv => (1, 9),
            Self::V => (1, 15),
        }
    }

    pub fn target_fraction(&self) -> f64 {
        let (a, b) = self.target();
        f64::from(a) / f64::from(b)
    }

    pub fn majorant_name(&self) -> &'static str {
        match self {
            Self::I => "gamma^4/(2n)",
            Self::Ii => "gamma^2 B_n^2/(2n)",
            Self::Iii => "B_n^4/(2n)",
            Self::Iv => "max(B_36^2, B_k^2)^2/(2k), k = max(n, m)",
            Self::V => "max(B_36^2, B_(n-2)^2) max(B_36^2, B_(n-1)^2)/(2n)",
        }
    }

    /// Order tuples handled separately, with their weaker fraction.
    pub fn exceptions(&self) -> Vec<([u64; 3], (u32, u32))> {
        match self {
            Self::Iv => vec![([1, 1, 2], (1, 6))],
            Self::V => vec![([3, 2, 0], (1, 6))],
            _ => Vec::new(),
        }
    }

    /// Smallest index of the scanned parameter (`n`, or `k = max(n, m)`).
    fn first_index(&self) -> u64 {
        match self {
            Self::I | Self::V => 2,
            _ => 1,
        }
    }

    /// Majorant as a function of the scanned index.
    fn majorant_at(&self, n: u64) -> f64 {
        let nf = n as f64;
        let b2 = |k: u64| olenko_bound(k).powi(2);
        match self {
            Self::I => GAMMA.powi(4) / (2.0 * nf),
            Self::Ii => GAMMA * GAMMA * b2(n) / (2.0 * nf),
            Self::Iii => b2(n).powi(2) / (2.0 * nf),
            Self::Iv => b2(36).max(b2(n)).powi(2) / (2.0 * nf),
            Self::V => b2(36).max(b2(n - 2)) * b2(36).max(b2(n - 1)) / (2.0 * nf),
        }
    }

    /// A decreasing upper envelope of the majorant, valid for `n >= 38`.
    fn envelope_at(&self, n: u64) -> f64 {
        let nf = n as f64;
        let c = ALPHA + 0.3 * ALPHA * ALPHA;
        let t = nf.cbrt() + c;
        match self {
            Self::I => GAMMA.powi(4) / (2.0 * nf),
            Self::Ii => GAMMA * GAMMA * BETA * BETA * t / (2.0 * nf),
            _ => BETA.powi(4) * t * t / (2.0 * nf),
        }
    }
}

impl fmt::Display for LemmaItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for LemmaItem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LemmaItem::ALL
            .into_iter()
            .find(|i| i.id() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::Domain {
                op: "LemmaItem",
                msg: format!("unknown item {s:?}"),
            })
    }
}

/// Closed-form upper bound for the item's integral at `orders`:
/// `[n]` for items i to iii, `[n, m]` for iv, `[n, m, l]` for v.
pub fn majorant(item: LemmaItem, orders: &[u64]) -> Result<f64> {
    let bad = || Error::Domain {
        op: "majorant",
        msg: format!("orders {orders:?} outside the domain of item {item}"),
    };
    let index = match (item, orders) {
        (LemmaItem::I | LemmaItem::Ii | LemmaItem::Iii, [n]) if *n >= 1 => *n,
        (LemmaItem::Iv, [n, m]) if *n > 0 && *m > 0 && n != m => (*n).max(*m),
        (LemmaItem::V, [n, m, l]) if n > m && m > l => *n,
        _ => return Err(bad()),
    };
    Ok(item.majorant_at(index))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ThresholdScan {
    pub item: LemmaItem,
    pub threshold: u64,
    /// `frac · 0.33682`.
    pub target: f64,
    pub majorant_at_threshold: f64,
    /// From here on the decreasing envelope stays below the target.
    pub envelope_from: u64,
    /// Strict decrease of the majorant was checked on `[threshold, this]`.
    pub monotone_checked_to: u64,
    pub monotone: bool,
}

/// Minimal `n*` with majorant below `frac · 0.33682` for all `n >= n*`.
pub fn threshold_scan(item: LemmaItem) -> u64 {
    threshold_scan_detailed(item).threshold
}

pub fn threshold_scan_detailed(item: LemmaItem) -> ThresholdScan {
    let target = item.target_fraction() * REFERENCE_LOWER;
    let mut envelope_from = 38u64;
    while item.envelope_at(envelope_from) >= target {
        envelope_from += 1;
    }
    let first = item.first_index();
    let mut threshold = first;
    for n in (first..=envelope_from).rev() {
        if item.majorant_at(n) >= target {
            threshold = n + 1;
            break;
        }
    }
    let top = envelope_from.max(MONOTONE_SCAN_TO);
    let monotone = (threshold..top).all(|n| item.majorant_at(n + 1) < item.majorant_at(n));
    ThresholdScan {
        item,
        threshold,
        target,
        majorant_at_threshold: item.majorant_at(threshold),
        envelope_from,
        monotone_checked_to: top,
        monotone,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseVerdict {
    /// Arguments of `𝓘`.
    pub orders: [u64; 3],
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExceptionVerdict {
    pub orders: [u64; 3],
    pub enclosure: QuadEnclosure,
    pub fraction: (u32, u32),
    /// `upper · denominator/numerator < lower(𝓘(0,0,0))`.
    pub weaker_bound_holds: bool,
    /// `lower · (item denominator/numerator) > upper(𝓘(0,0,0))`: the item's
    /// own target genuinely fails here.
    pub main_target_fails: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ItemReport {
    pub item: LemmaItem,
    pub target_fraction: (u32, u32),
    pub majorant: String,
    pub analytic: ThresholdScan,
    /// `frac · lower(𝓘(0,0,0))`.
    pub numeric_target: f64,
    pub numeric_cases: Vec<CaseVerdict>,
    pub numeric_max: Option<CaseVerdict>,
    pub exceptions: Vec<ExceptionVerdict>,
    pub domain_cases_below_threshold: usize,
    pub coverage_complete: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IdentityCheck {
    pub i000: QuadEnclosure,
    pub five_i001: QuadEnclosure,
    pub difference: f64,
    pub overlap: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BnCheck {
    pub b1: f64,
    pub b36: f64,
    pub argmax_small: u64,
    pub increasing_from_6_to_200: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CertReport {
    pub truncation_n: usize,
    pub tail_bound: f64,
    pub reference: QuadEnclosure,
    pub reference_exceeds_constant: bool,
    pub identity: IdentityCheck,
    pub bn: BnCheck,
    pub items: Vec<ItemReport>,
    pub pass: bool,
}

impl CertReport {
    pub fn item(&self, item: LemmaItem) -> Option<&ItemReport> {
        self.items.iter().find(|r| r.item == item)
    }

    pub fn thresholds(&self) -> Vec<u64> {
        self.items.iter().map(|r| r.analytic.threshold).collect()
    }
}

/// Squared Bessel values on the quadrature nodes with the data needed for
/// enclosures.
struct SquaredTable {
    sq: Vec<Vec<f64>>,
    weights: Vec<f64>,
    tail: f64,
    /// Evaluation budget not proportional to the value.
    budget_abs: f64,
    /// Evaluation budget per unit of value.
    budget_rel: f64,
}

impl SquaredTable {
    fn build(rule: &QuadRule, max_order: usize, cfg: &Config) -> Result<Self> {
        let tail = rule.tail_bound(max_order as u64)?;
        if tail > cfg.tail_target {
            return Err(Error::TailExceedsTarget {
                tail,
                target: cfg.tail_target,
            });
        }
        let t = rule.order_table(max_order);
        let sq: Vec<Vec<f64>> = t.values[..=max_order]
            .par_iter()
            .map(|row| row.iter().map(|v| v * v).collect())
            .collect();
        let orders: Vec<usize> = (0..=max_order).collect();
        let budget_abs = crate::quadrature::chunked_sum(rule.nodes.len(), |range| {
            range
                .map(|i| {
                    let x = rule.nodes[i];
                    let b = node_magnitude(&orders, x);
                    let eps = cfg.bessel_tol + 4.0 * f64::EPSILON * x;
                    rule.weights[i] * 6.0 * eps * b.powi(5)
                })
                .sum()
        });
        let budget_rel =
            rule.weight_sensitivity * cfg.bessel_tol + (rule.n + 1) as f64 * f64::EPSILON;
        Ok(Self {
            sq,
            weights: rule.weights.clone(),
            tail,
            budget_abs,
            budget_rel,
        })
    }

    fn enclosure(&self, value: f64) -> QuadEnclosure {
        QuadEnclosure::new(
            value,
            self.tail,
            self.budget_abs + value.abs() * self.budget_rel,
            Sign::Nonnegative,
        )
    }

    /// `Σ_n w_n J_a^2 J_b^2 J_c^2`, summed in fixed chunks.
    fn triple(&self, a: usize, b: usize, c: usize) -> f64 {
        let (ta, tb, tc) = (&self.sq[a], &self.sq[b], &self.sq[c]);
        let len = self.weights.len();
        let mut total = 0.0;
        let mut start = 0;
        while start < len {
            let end = (start + NODE_CHUNK).min(len);
            let p: Vec<f64> = (start..end).map(|i| self.weights[i] * ta[i] * tb[i]).collect();
            total += dot(&p, &tc[start..end]);
            start = end;
        }
        total
    }

    /// Values for all `n > m > l >= 0` with `n <= top`, indexed by
    /// [`triple_index`].
    fn all_distinct_triples(&self, top: usize) -> Vec<f64> {
        let len = self.weights.len();
        let per_n: Vec<Vec<f64>> = (0..=top)
            .into_par_iter()
            .map(|n| {
                let mut acc = vec![0.0; n * n.saturating_sub(1) / 2];
                if n < 2 {
                    return acc;
                }
                let mut p = vec![0.0; NODE_CHUNK];
                let mut start = 0;
                while start < len {
                    let end = (start + NODE_CHUNK).min(len);
                    let w = &self.weights[start..end];
                    let tn = &self.sq[n][start..end];
                    for m in 1..n {
                        let tm = &self.sq[m][start..end];
                        let p = &mut p[..end - start];
                        for i in 0..p.len() {
                            p[i] = w[i] * tn[i] * tm[i];
                        }
                        let base = m * (m - 1) / 2;
                        for l in 0..m {
                            acc[base + l] += dot(p, &self.sq[l][start..end]);
                        }
                    }
                    start = end;
                }
                acc
            })
            .collect();
        per_n.into_iter().flatten().collect()
    }
}

/// Position of `(n, m, l)`, `n > m > l >= 0`, in the output of
/// `all_distinct_triples`.
fn triple_index(n: usize, m: usize, l: usize) -> usize {
    n * (n - 1) * (n - 2) / 6 + m * (m - 1) / 2 + l
}

/// Dot product with eight independent accumulators.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for j in 0..8 {
            acc[j] += x[j] * y[j];
        }
    }
    let mut s = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

fn verdict(enc: &QuadEnclosure, target: f64, fraction: f64, reference: &QuadEnclosure) -> Verdict {
    if enc.upper < target {
        Verdict::Pass
    } else if enc.lower > fraction * reference.upper {
        Verdict::Fail
    } else {
        Verdict::Undecided
    }
}

/// Every case of the item's domain whose scanned index lies below
/// `threshold`, excluding nothing.
fn domain_below(item: LemmaItem, threshold: u64) -> Vec<[u64; 3]> {
    let t = threshold;
    let mut out = Vec::new();
    match item {
        LemmaItem::I => out.extend((2..t).map(|n| [0, 0, n])),
        LemmaItem::Ii => out.extend((1..t).map(|n| [0, n, n])),
        LemmaItem::Iii => out.extend((1..t).map(|n| [n, n, n])),
        LemmaItem::Iv => {
            for n in 1..t {
                for m in 1..t {
                    if n != m {
                        out.push([n, n, m]);
                    }
                }
            }
        }
        LemmaItem::V => {
            for n in 2..t {
                for m in 1..n {
                    for l in 0..m {
                        out.push([n, m, l]);
                    }
                }
            }
        }
    }
    out
}

fn certify_item(
    item: LemmaItem,
    table: &SquaredTable,
    reference: &QuadEnclosure,
    distinct: &[f64],
) -> ItemReport {
    let analytic = threshold_scan_detailed(item);
    let frac = item.target_fraction();
    let numeric_target = frac * reference.lower;
    let exceptions: Vec<[u64; 3]> = item.exceptions().iter().map(|e| e.0).collect();
    let domain = domain_below(item, analytic.threshold);
    let numeric: Vec<[u64; 3]> = domain
        .iter()
        .copied()
        .filter(|c| !exceptions.contains(c))
        .collect();
    let value_of = |c: [u64; 3]| -> f64 {
        let [a, b, d] = c.map(|v| v as usize);
        if item == LemmaItem::V {
            distinct[triple_index(a, b, d)]
        } else {
            table.triple(a, b, d)
        }
    };
    let numeric_cases: Vec<CaseVerdict> = numeric
        .par_iter()
        .map(|&c| {
            let enc = table.enclosure(value_of(c));
            CaseVerdict {
                orders: c,
                value: enc.value,
                lower: enc.lower,
                upper: enc.upper,
                verdict: verdict(&enc, numeric_target, frac, reference),
            }
        })
        .collect();
    let numeric_max = numeric_cases
        .iter()
        .max_by(|a, b| a.value.total_cmp(&b.value))
        .cloned();
    let exceptions: Vec<ExceptionVerdict> = item
        .exceptions()
        .into_iter()
        .map(|(c, (num, den))| {
            let enc = table.enclosure(value_of(c));
            let weak = f64::from(num) / f64::from(den);
            ExceptionVerdict {
                orders: c,
                enclosure: enc,
                fraction: (num, den),
                weaker_bound_holds: enc.upper < weak * reference.lower,
                main_target_fails: enc.lower > frac * reference.upper,
            }
        })
        .collect();
    let exc_in_domain = exceptions
        .iter()
        .filter(|e| domain.contains(&e.orders))
        .count();
    let coverage_complete = exc_in_domain == exceptions.len()
        && numeric_cases.len() + exc_in_domain == domain.len();
    let pass = analytic.monotone
        && coverage_complete
        && numeric_cases.iter().all(|c| c.verdict == Verdict::Pass)
        && exceptions.iter().all(|e| e.weaker_bound_holds);
    ItemReport {
        item,
        target_fraction: item.target(),
        majorant: item.majorant_name().to_string(),
        analytic,
        numeric_target,
        domain_cases_below_threshold: domain.len(),
        numeric_cases,
        numeric_max,
        exceptions,
        coverage_complete,
        pass,
    }
}

/// Checks every item: closed-form thresholds, enclosures for the remaining
/// finite cases, the two exceptions and the identity `𝓘(0,0,0) = 5𝓘(0,0,1)`.
///
/// Returns [`Error::Undecidable`] if some case is neither certified nor
/// refuted by the enclosures.
pub fn certify_lemma31(cfg: &Config) -> Result<CertReport> {
    let rule: Arc<QuadRule> = QuadRule::shared(cfg)?;
    let scans: Vec<ThresholdScan> = LemmaItem::ALL.iter().map(|i| threshold_scan_detailed(*i)).collect();
    let top = scans
        .iter()
        .map(|s| s.threshold.saturating_sub(1))
        .max()
        .unwrap_or(0) as usize;
    let table = SquaredTable::build(&rule, top.max(2), cfg)?;

    let reference = table.enclosure(table.triple(0, 0, 0));
    let i001 = table.enclosure(table.triple(0, 0, 1));
    let five = i001.scaled(5.0);
    let identity = IdentityCheck {
        i000: reference,
        five_i001: five,
        difference: reference.value - five.value,
        overlap: reference.intersects(&five),
    };

    let b: Vec<f64> = (0..=200).map(olenko_bound).collect();
    let argmax_small = (0..=5u64)
        .max_by(|&x, &y| b[x as usize].total_cmp(&b[y as usize]))
        .unwrap_or(0);
    let increasing = (6..200).all(|n| b[n + 1] > b[n]);
    let bn = BnCheck {
        b1: b[1],
        b36: b[36],
        argmax_small,
        increasing_from_6_to_200: increasing,
        pass: argmax_small == 1 && b[1] < b[36] && increasing,
    };

    let v_top = scans[4].threshold.saturating_sub(1) as usize;
    let distinct = table.all_distinct_triples(v_top);
    let items: Vec<ItemReport> = LemmaItem::ALL
        .iter()
        .map(|&i| certify_item(i, &table, &reference, &distinct))
        .collect();

    for r in &items {
        if let Some(c) = r.numeric_cases.iter().find(|c| c.verdict == Verdict::Undecided) {
            return Err(Error::Undecidable {
                case: format!("item {} at {:?}", r.item, c.orders),
                detail: format!(
                    "upper {:.6e} vs target {:.6e}; increase the truncation N",
                    c.upper, r.numeric_target
                ),
            });
        }
    }

    let reference_exceeds_constant = reference.lower > REFERENCE_LOWER;
    let pass = identity.overlap
        && bn.pass
        && reference_exceeds_constant
        && items.iter().all(|r| r.pass);
    Ok(CertReport {
        truncation_n: rule.n,
        tail_bound: table.tail,
        reference,
        reference_exceeds_constant,
        identity,
        bn,
        items,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds() {
        let got: Vec<u64> = LemmaItem::ALL.iter().map(|i| threshold_scan(*i)).collect();
        assert_eq!(got, vec![5, 14, 9, 49, 145]);
        for i in LemmaItem::ALL {
            assert!(threshold_scan_detailed(i).monotone);
        }
    }

    #[test]
    fn majorant_examples() {
        let t = REFERENCE_LOWER;
        assert!(majorant(LemmaItem::I, &[5]).unwrap() <= t / 5.0);
        assert!(majorant(LemmaItem::I, &[4]).unwrap() > t / 5.0);
        assert!(majorant(LemmaItem::Iii, &[9]).unwrap() < t / 3.0);
        assert!(majorant(LemmaItem::Iii, &[8]).unwrap() >= t / 3.0);
        assert_eq!(
            majorant(LemmaItem::Iv, &[3, 49]).unwrap(),
            majorant(LemmaItem::Iv, &[49, 2]).unwrap()
        );
        assert!(majorant(LemmaItem::Iv, &[2, 2]).is_err());
        assert!(majorant(LemmaItem::V, &[3, 3, 1]).is_err());
        assert!(majorant(LemmaItem::I, &[0]).is_err());
        let g = GAMMA.powi(4) / 10.0;
        assert_eq!(majorant(LemmaItem::I, &[5]).unwrap(), g);
    }

    #[test]
    fn envelope_dominates_majorant() {
        for item in LemmaItem::ALL {
            for n in 38..3000 {
                assert!(item.envelope_at(n) >= item.majorant_at(n), "{item} at {n}");
                assert!(item.envelope_at(n + 1) < item.envelope_at(n));
            }
        }
    }

    #[test]
    fn domain_sizes() {
        assert_eq!(domain_below(LemmaItem::I, 5).len(), 3);
        assert_eq!(domain_below(LemmaItem::Ii, 14).len(), 13);
        assert_eq!(domain_below(LemmaItem::Iv, 49).len(), 48 * 47);
        assert_eq!(domain_below(LemmaItem::V, 145).len(), 497_640);
        for (i, c) in domain_below(LemmaItem::V, 20).iter().enumerate() {
            assert_eq!(triple_index(c[0] as usize, c[1] as usize, c[2] as usize), i);
        }
    }

    #[test]
    fn dot_matches_naive() {
        let a: Vec<f64> = (0..37).map(|i| (i as f64).sin()).collect();
        let b: Vec<f64> = (0..37).map(|i| (i as f64 * 0.3).cos()).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((dot(&a, &b) - naive).abs() < 1e-14);
    }

    #[test]
    fn item_parsing() {
        assert_eq!("iv".parse::<LemmaItem>().unwrap(), LemmaItem::Iv);
        assert!("vi".parse::<LemmaItem>().is_err());
    }
}
