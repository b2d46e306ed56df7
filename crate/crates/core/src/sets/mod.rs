//! Exact verification, enumeration and construction of B_h-sets and P(h)-sets.
//!
//! A set `A` of integers is a P(h)-set when every h-fold sum `D` has a single
//! *reduced core*: after cancelling all `(v, -v)` pairs (and pairs of zeros)
//! from any representation `D = a_1 + ... + a_h`, the multiset that remains is
//! the same for every representation. B_h-sets are the special case where the
//! representations themselves are unique up to permutation.
//!
//! All checks enumerate h-multisets, group them by their sum and compare
//! cores inside each group. Elements are arbitrary precision; a fast path
//! runs on `i128` whenever every h-fold sum fits.

mod generate;
mod greedy;

pub use generate::{generate, Generator};
pub use greedy::{greedy_ph, greedy_terms};

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest window accepted by [`enumerate_ph`], measured as `hi - lo`.
pub const MAX_ENUMERATION_SPAN: i64 = 24;

/// A finite set of integers kept sorted and free of duplicates.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntegerSet {
    elements: Vec<BigInt>,
}

impl IntegerSet {
    pub fn new<I, T>(items: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<BigInt>,
    {
        let mut elements: Vec<BigInt> = items.into_iter().map(Into::into).collect();
        elements.sort();
        elements.dedup();
        Self { elements }
    }

    pub fn from_i64s(items: &[i64]) -> Self {
        Self::new(items.iter().copied())
    }

    pub fn elements(&self) -> &[BigInt] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, v: &BigInt) -> bool {
        self.elements.binary_search(v).is_ok()
    }

    pub fn negated(&self) -> Self {
        Self::new(self.elements.iter().map(|v| -v))
    }

    /// `A ∩ (-A)`.
    pub fn symmetric_part(&self) -> Self {
        Self::new(
            self.elements
                .iter()
                .filter(|v| self.contains(&-*v))
                .cloned(),
        )
    }

    pub fn is_symmetric(&self) -> bool {
        self.elements.iter().all(|v| self.contains(&-v))
    }

    /// `|A ∩ [-x, x]|`.
    pub fn counting(&self, x: &BigInt) -> usize {
        self.elements.iter().filter(|v| v.abs() <= *x).count()
    }

    /// `A ∩ [-bound, bound]`.
    pub fn windowed(&self, bound: &BigInt) -> Self {
        Self {
            elements: self
                .elements
                .iter()
                .filter(|v| v.abs() <= *bound)
                .cloned()
                .collect(),
        }
    }

    pub fn union(&self, other: &IntegerSet) -> Self {
        Self::new(self.elements.iter().chain(other.elements.iter()).cloned())
    }

    pub fn is_subset(&self, other: &IntegerSet) -> bool {
        self.elements.iter().all(|v| other.contains(v))
    }

    /// Elements as `i64`, if they all fit.
    pub fn to_i64s(&self) -> Option<Vec<i64>> {
        self.elements.iter().map(|v| v.to_i64()).collect()
    }

    fn to_i128s(&self, h: usize) -> Option<Vec<i128>> {
        let limit = i128::MAX / (2 * h as i128 + 2);
        self.elements
            .iter()
            .map(|v| v.to_i128().filter(|x| x.abs() < limit))
            .collect()
    }
}

impl fmt::Display for IntegerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.elements.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

impl FromStr for IntegerSet {
    type Err = Error;

    /// Parses a JSON array whose entries are integers or decimal strings.
    fn from_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl Serialize for IntegerSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let strings: Vec<String> = self.elements.iter().map(|v| v.to_string()).collect();
        strings.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IntegerSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw: Vec<serde_json::Value> = Vec::deserialize(deserializer)?;
        let mut out = Vec::with_capacity(raw.len());
        for item in raw {
            let text = match item {
                serde_json::Value::String(s) => s,
                serde_json::Value::Number(n) if n.is_i64() || n.is_u64() => n.to_string(),
                other => return Err(D::Error::custom(format!("not an integer: {other}"))),
            };
            let v = BigInt::from_str(text.trim())
                .map_err(|e| D::Error::custom(format!("bad integer {text:?}: {e}")))?;
            out.push(v);
        }
        Ok(IntegerSet::new(out))
    }
}

/// An h-term representation `D = a_1 + ... + a_h`, terms sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Representation {
    #[serde(with = "bigint_vec")]
    pub terms: Vec<BigInt>,
    #[serde(with = "bigint_str")]
    pub sum: BigInt,
}

impl Representation {
    pub fn new(mut terms: Vec<BigInt>) -> Self {
        terms.sort();
        let sum = terms.iter().sum();
        Self { terms, sum }
    }

    pub fn h(&self) -> usize {
        self.terms.len()
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_terms(f, &self.terms)
    }
}

/// The multiset left after cancelling every `(v, -v)` pair and every pair of
/// zeros from a representation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReducedCore {
    #[serde(with = "bigint_vec")]
    pub terms: Vec<BigInt>,
}

impl ReducedCore {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn sum(&self) -> BigInt {
        self.terms.iter().sum()
    }
}

impl fmt::Display for ReducedCore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// Two representations of the same sum `D`.
///
/// For P(h) checks the two cores differ; for B_h checks only the
/// representations are guaranteed to differ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PhWitness {
    #[serde(with = "bigint_str")]
    pub sum: BigInt,
    pub rep_a: Representation,
    pub rep_b: Representation,
    pub core_a: ReducedCore,
    pub core_b: ReducedCore,
}

impl fmt::Display for PhWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {} = {}", self.sum, self.rep_a, self.rep_b)
    }
}

/// Outcome of a P(h) or B_h check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "witness", rename_all = "snake_case")]
pub enum PhCheck {
    Holds,
    Violated(PhWitness),
}

impl PhCheck {
    pub fn holds(&self) -> bool {
        matches!(self, PhCheck::Holds)
    }

    pub fn witness(&self) -> Option<&PhWitness> {
        match self {
            PhCheck::Holds => None,
            PhCheck::Violated(w) => Some(w),
        }
    }
}

/// A finite set, or an infinite generated family that must be windowed.
#[derive(Clone, Debug)]
pub enum SetSource {
    Finite(IntegerSet),
    Generated(Generator),
}

pub fn reduce_core(rep: &Representation) -> ReducedCore {
    ReducedCore {
        terms: core_of(&rep.terms),
    }
}

/// Checks property P(h) on a finite set.
pub fn check_ph(set: &IntegerSet, h: u32) -> Result<PhCheck> {
    Ok(first(ph_scan(set, h, Mode::Ph)?))
}

/// Checks property P(h) on a set source. Generated sources need `bound`;
/// finite sets are restricted to `[-bound, bound]` when one is given.
pub fn check_ph_bounded(source: &SetSource, h: u32, bound: Option<&BigInt>) -> Result<PhCheck> {
    let set = match (source, bound) {
        (SetSource::Finite(s), None) => s.clone(),
        (SetSource::Finite(s), Some(b)) => s.windowed(b),
        (SetSource::Generated(g), b) => generate(g, b)?,
    };
    check_ph(&set, h)
}

/// Every sum with two distinct cores, ordered by `|D|` (positive first).
pub fn ph_violations(set: &IntegerSet, h: u32) -> Result<Vec<PhWitness>> {
    ph_scan(set, h, Mode::Ph)
}

/// Checks the B_h property: all h-multiset sums are distinct.
pub fn check_bh(set: &IntegerSet, h: u32) -> Result<PhCheck> {
    Ok(first(ph_scan(set, h, Mode::Bh)?))
}

/// All nonempty P(h) subsets of `[lo, hi]`, in lexicographic order of their
/// sorted element lists.
pub fn enumerate_ph(lo: i64, hi: i64, h: u32) -> Result<Vec<IntegerSet>> {
    validate_h(h)?;
    if hi < lo || hi - lo > MAX_ENUMERATION_SPAN {
        return Err(Error::WindowTooLarge {
            lo,
            hi,
            max: MAX_ENUMERATION_SPAN,
        });
    }
    let window: Vec<i128> = (lo..=hi).map(i128::from).collect();
    let mut out = Vec::new();
    let mut current = Vec::new();
    extend_ph_subsets(&window, 0, h as usize, &mut current, &mut out);
    Ok(out)
}

// P(h) is closed under taking subsets, so a failing prefix prunes its subtree.
fn extend_ph_subsets(
    window: &[i128],
    start: usize,
    h: usize,
    current: &mut Vec<i128>,
    out: &mut Vec<IntegerSet>,
) {
    for i in start..window.len() {
        current.push(window[i]);
        if scan(current, h, Mode::Ph, true).is_empty() {
            out.push(IntegerSet::new(current.iter().copied()));
            extend_ph_subsets(window, i + 1, h, current, out);
        }
        current.pop();
    }
}

fn validate_h(h: u32) -> Result<()> {
    if h < 2 {
        Err(Error::InvalidH(h))
    } else {
        Ok(())
    }
}

fn first(mut v: Vec<PhWitness>) -> PhCheck {
    if v.is_empty() {
        PhCheck::Holds
    } else {
        PhCheck::Violated(v.swap_remove(0))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Mode {
    Ph,
    Bh,
}

fn ph_scan(set: &IntegerSet, h: u32, mode: Mode) -> Result<Vec<PhWitness>> {
    validate_h(h)?;
    let h = h as usize;
    let raw: Vec<RawWitness<BigInt>> = match set.to_i128s(h) {
        Some(small) => scan(&small, h, mode, false)
            .into_iter()
            .map(RawWitness::widen)
            .collect(),
        None => scan(set.elements(), h, mode, false),
    };
    Ok(raw.into_iter().map(RawWitness::into_witness).collect())
}

pub(crate) trait SumElem: Signed + Clone + Ord + Hash + fmt::Debug {}
impl<T: Signed + Clone + Ord + Hash + fmt::Debug> SumElem for T {}

pub(crate) struct RawWitness<T> {
    pub sum: T,
    pub rep_a: Vec<T>,
    pub rep_b: Vec<T>,
}

impl RawWitness<i128> {
    fn widen(self) -> RawWitness<BigInt> {
        RawWitness {
            sum: self.sum.into(),
            rep_a: self.rep_a.into_iter().map(BigInt::from).collect(),
            rep_b: self.rep_b.into_iter().map(BigInt::from).collect(),
        }
    }
}

impl RawWitness<BigInt> {
    fn into_witness(self) -> PhWitness {
        let rep_a = Representation::new(self.rep_a);
        let rep_b = Representation::new(self.rep_b);
        PhWitness {
            sum: self.sum,
            core_a: reduce_core(&rep_a),
            core_b: reduce_core(&rep_b),
            rep_a,
            rep_b,
        }
    }
}

struct Group<T> {
    rep: Vec<T>,
    key: Vec<T>,
    conflict: Option<Vec<T>>,
}

/// Enumerates all h-multisets of `elems` (sorted ascending) and groups them
/// by sum. In `Ph` mode two representations conflict when their cores
/// differ; in `Bh` mode any second representation conflicts.
///
/// Multisets are produced in lexicographic order, so the first
/// representation stored for a sum is the lexicographically smallest and the
/// first conflicting one is the smallest that conflicts with it.
pub(crate) fn scan<T: SumElem>(
    elems: &[T],
    h: usize,
    mode: Mode,
    stop_early: bool,
) -> Vec<RawWitness<T>> {
    let k = elems.len();
    if k == 0 {
        return Vec::new();
    }
    let mut groups: HashMap<T, Group<T>> = HashMap::new();
    let mut idx = vec![0usize; h];
    let mut found_any = false;
    loop {
        let rep: Vec<T> = idx.iter().map(|&i| elems[i].clone()).collect();
        let sum = rep.iter().fold(T::zero(), |acc, v| acc + v.clone());
        let key = match mode {
            Mode::Ph => core_of(&rep),
            Mode::Bh => rep.clone(),
        };
        match groups.get_mut(&sum) {
            None => {
                groups.insert(
                    sum,
                    Group {
                        rep,
                        key,
                        conflict: None,
                    },
                );
            }
            Some(g) => {
                if g.conflict.is_none() && g.key != key {
                    g.conflict = Some(rep);
                    found_any = true;
                    if stop_early {
                        break;
                    }
                }
            }
        }
        // next non-decreasing index vector
        let mut pos = h;
        while pos > 0 && idx[pos - 1] == k - 1 {
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
        let next = idx[pos - 1] + 1;
        for slot in idx.iter_mut().skip(pos - 1) {
            *slot = next;
        }
    }
    if !found_any {
        return Vec::new();
    }
    let mut out: Vec<RawWitness<T>> = groups
        .into_iter()
        .filter_map(|(sum, g)| {
            g.conflict.map(|b| RawWitness {
                sum,
                rep_a: g.rep,
                rep_b: b,
            })
        })
        .collect();
    out.sort_by(|a, b| witness_order(&a.sum, &b.sum));
    out
}

/// Smallest `|D|` first; for equal `|D|` the positive sum comes first.
fn witness_order<T: SumElem>(a: &T, b: &T) -> std::cmp::Ordering {
    a.abs()
        .cmp(&b.abs())
        .then_with(|| a.is_negative().cmp(&b.is_negative()))
}

/// Cancels `(v, -v)` pairs by value counts and pairs of zeros, so the result
/// depends only on the multiset. Input and output are sorted ascending.
pub(crate) fn core_of<T: SumElem>(terms: &[T]) -> Vec<T> {
    let mut sorted = terms.to_vec();
    sorted.sort();
    // runs of equal values
    let mut runs: Vec<(T, usize)> = Vec::new();
    for v in sorted {
        match runs.last_mut() {
            Some((last, c)) if *last == v => *c += 1,
            _ => runs.push((v, 1)),
        }
    }
    let mut counts: Vec<usize> = runs.iter().map(|r| r.1).collect();
    for i in 0..runs.len() {
        let v = &runs[i].0;
        if v.is_zero() {
            counts[i] %= 2;
        } else if v.is_positive() {
            let neg = -v.clone();
            if let Ok(j) = runs.binary_search_by(|r| r.0.cmp(&neg)) {
                let m = counts[i].min(counts[j]);
                counts[i] -= m;
                counts[j] -= m;
            }
        }
    }
    let mut out = Vec::with_capacity(terms.len());
    for ((v, _), c) in runs.into_iter().zip(counts) {
        for _ in 0..c {
            out.push(v.clone());
        }
    }
    out
}

fn fmt_terms(f: &mut fmt::Formatter<'_>, terms: &[BigInt]) -> fmt::Result {
    for (i, v) in terms.iter().enumerate() {
        if i == 0 {
            write!(f, "{v}")?;
        } else if v.is_negative() {
            write!(f, " - {}", -v)?;
        } else {
            write!(f, " + {v}")?;
        }
    }
    Ok(())
}

pub(crate) mod bigint_str {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};
    use std::str::FromStr;

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        BigInt::from_str(&s).map_err(serde::de::Error::custom)
    }
}

pub(crate) mod bigint_vec {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::str::FromStr;

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let strings: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        strings.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let strings = Vec::<String>::deserialize(d)?;
        strings
            .iter()
            .map(|s| BigInt::from_str(s).map_err(serde::de::Error::custom))
            .collect()
    }
}
