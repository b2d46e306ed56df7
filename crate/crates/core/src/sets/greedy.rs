//! Greedy symmetric P(h)-sets: start from `{-1, 1}` and repeatedly add the
//! smallest `x` larger than every current element such that `A ∪ {±x}`
//! stays P(h).
//!
//! A symmetric `A` is P(h) exactly when distinct pair-free multisets of size
//! `ℓ <= h`, `ℓ ≡ h (mod 2)`, have distinct sums. A new collision after
//! adding `±x` involves `x` with different multiplicities on the two sides,
//! which gives a linear condition `c·x = s2 - s1` with `s1, s2` drawn from
//! the core sums `K_ℓ` of the old set. Candidates are screened in windows by
//! ranged lookups in sorted `K_ℓ`, and each accepted element is confirmed by
//! a full check.

use std::collections::BTreeSet;

use super::{scan, IntegerSet, Mode};
use crate::error::{Error, Result};

pub fn greedy_ph(h: u32, count: usize) -> Result<IntegerSet> {
    let terms = greedy_terms(h, count)?;
    Ok(IntegerSet::new(
        terms.iter().flat_map(|&a| [a, -a]).collect::<Vec<i128>>(),
    ))
}

/// The positive elements `a_1 < a_2 < ...` of the greedy set.
pub fn greedy_terms(h: u32, count: usize) -> Result<Vec<i128>> {
    if h < 2 {
        return Err(Error::InvalidH(h));
    }
    let h = h as usize;
    let mut terms: Vec<i128> = Vec::with_capacity(count);
    if count == 0 {
        return Ok(terms);
    }
    terms.push(1);
    let combos = collision_combos(h);
    while terms.len() < count {
        let sym: Vec<i128> = symmetric(&terms);
        let k = core_sums(&sym, h);
        let last = *terms.last().unwrap();
        let mut lo = last + 1;
        let next = 'search: loop {
            let width = (lo / 4).max(256);
            let mut bad = vec![false; width as usize];
            for &(c, l1, l2) in &combos {
                mark_collisions(&mut bad, lo, c, &k[l1], &k[l2]);
            }
            for (i, &b) in bad.iter().enumerate() {
                if b {
                    continue;
                }
                let x = lo + i as i128;
                let mut cand = sym.clone();
                cand.push(x);
                cand.push(-x);
                cand.sort_unstable();
                if scan(&cand, h, Mode::Ph, true).is_empty() {
                    break 'search x;
                }
            }
            lo += width;
        };
        terms.push(next);
    }
    Ok(terms)
}

fn symmetric(terms: &[i128]) -> Vec<i128> {
    let mut v: Vec<i128> = terms.iter().flat_map(|&a| [a, -a]).collect();
    v.sort_unstable();
    v
}

/// `(c, ℓ1, ℓ2)` such that a collision reads `c·x ∈ K_ℓ1 - K_ℓ2`.
fn collision_combos(h: usize) -> Vec<(i128, usize, usize)> {
    let mut out = BTreeSet::new();
    for j in 0..=h {
        for jp in 0..=h {
            for opposite in [false, true] {
                if !opposite && j == jp {
                    continue;
                }
                let c = if opposite {
                    (j + jp) as i128
                } else {
                    (j as i128 - jp as i128).abs()
                };
                if c == 0 {
                    continue;
                }
                let (a, b) = (h - j, h - jp);
                out.insert((c, a.max(b), a.min(b)));
            }
        }
    }
    out.into_iter().collect()
}

/// `K[ℓ]`: sorted distinct sums of pair-free multisets of size `m <= ℓ`,
/// `m ≡ ℓ (mod 2)`, drawn from the symmetric set `sym`.
fn core_sums(sym: &[i128], h: usize) -> Vec<Vec<i128>> {
    let mut exact: Vec<Vec<i128>> = vec![Vec::new(); h + 1];
    exact[0].push(0);
    let mut stack: Vec<usize> = Vec::new();
    pair_free(sym, 0, h, &mut stack, 0, &mut exact);
    let mut out = Vec::with_capacity(h + 1);
    for l in 0..=h {
        let mut v: Vec<i128> = (0..=l)
            .filter(|m| (l - m) % 2 == 0)
            .flat_map(|m| exact[m].iter().copied())
            .collect();
        v.sort_unstable();
        v.dedup();
        out.push(v);
    }
    out
}

fn pair_free(
    sym: &[i128],
    start: usize,
    h: usize,
    stack: &mut Vec<usize>,
    sum: i128,
    exact: &mut [Vec<i128>],
) {
    if stack.len() == h {
        return;
    }
    for i in start..sym.len() {
        let v = sym[i];
        if stack.iter().any(|&s| sym[s] == -v) {
            continue;
        }
        stack.push(i);
        exact[stack.len()].push(sum + v);
        pair_free(sym, i, h, stack, sum + v, exact);
        stack.pop();
    }
}

/// Marks every `x` in `[lo, lo + bad.len())` with `c·x = s2 - s1`,
/// `s2 ∈ k1`, `s1 ∈ k2`.
fn mark_collisions(bad: &mut [bool], lo: i128, c: i128, k1: &[i128], k2: &[i128]) {
    let hi = lo + bad.len() as i128;
    for &s1 in k2 {
        let from = k1.partition_point(|&v| v < c * lo + s1);
        let to = k1.partition_point(|&v| v < c * hi + s1);
        for &s2 in &k1[from..to] {
            let d = s2 - s1;
            if d % c == 0 {
                bad[(d / c - lo) as usize] = true;
            }
        }
    }
}
