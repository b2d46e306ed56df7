use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::IntegerSet;
use crate::error::{Error, Result};

/// Infinite (or very large) families of P(h)-sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    /// `{±λ_n} ∪ {0}` for a sequence with `λ_{n+1} >= q·λ_n`. Without
    /// explicit terms the sequence `1, q+1, q(q+1)+1, ...` is used.
    Lacunary {
        q: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        terms: Option<Vec<BigInt>>,
    },
    /// `{±q^n : n >= 0} ∪ {0}`.
    Powers { q: u64 },
    /// `±((2h)^{4N} + (2h)^{N+j})`, `j < N`, `N = 2^n` for `n < levels`.
    Rudin { h: u32, levels: u32 },
}

impl Generator {
    /// Whether the parameters meet the sufficient condition for P(h).
    pub fn valid_for(&self, h: u32) -> bool {
        let h = u64::from(h);
        match self {
            Generator::Lacunary { q, .. } => *q > 2 * h - 1,
            Generator::Powers { q } => *q >= 2 * h,
            Generator::Rudin { h: hr, .. } => h <= u64::from(*hr),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Generator::Lacunary { q, terms } => {
                if *q < 2 {
                    return Err(Error::InvalidGenerator(format!("lacunary ratio q = {q} < 2")));
                }
                if let Some(t) = terms {
                    if t.is_empty() || !t[0].is_positive() {
                        return Err(Error::InvalidGenerator(
                            "lacunary terms must be positive".into(),
                        ));
                    }
                    let q = BigInt::from(*q);
                    for w in t.windows(2) {
                        if w[1] < &q * &w[0] {
                            return Err(Error::InvalidGenerator(format!(
                                "ratio {} / {} is below q = {q}",
                                w[1], w[0]
                            )));
                        }
                    }
                }
                Ok(())
            }
            Generator::Powers { q } => {
                if *q < 2 {
                    Err(Error::InvalidGenerator(format!("powers base q = {q} < 2")))
                } else {
                    Ok(())
                }
            }
            Generator::Rudin { h, levels } => {
                if *h < 2 {
                    Err(Error::InvalidGenerator(format!("rudin h = {h} < 2")))
                } else if *levels == 0 || *levels > 12 {
                    Err(Error::InvalidGenerator(format!(
                        "rudin levels = {levels} outside 1..=12"
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Finite generators can be materialised without a window.
    pub fn is_finite(&self) -> bool {
        matches!(
            self,
            Generator::Rudin { .. } | Generator::Lacunary { terms: Some(_), .. }
        )
    }
}

/// Materialises the generator on `[-window, window]`. `None` is accepted
/// only for finite generators.
pub fn generate(g: &Generator, window: Option<&BigInt>) -> Result<IntegerSet> {
    g.validate()?;
    if window.is_none() && !g.is_finite() {
        return Err(Error::MissingWindow);
    }
    let fits = |v: &BigInt| window.is_none_or(|w| v.abs() <= *w);
    let mut out: Vec<BigInt> = Vec::new();
    match g {
        Generator::Lacunary { q, terms } => {
            out.push(BigInt::zero());
            match terms {
                Some(t) => {
                    for v in t.iter().filter(|v| fits(v)) {
                        out.push(v.clone());
                        out.push(-v);
                    }
                }
                None => {
                    let w = window.expect("checked above");
                    let q = BigInt::from(*q);
                    let mut v = BigInt::one();
                    while &v <= w {
                        out.push(v.clone());
                        out.push(-&v);
                        v = &v * &q + 1;
                    }
                }
            }
        }
        Generator::Powers { q } => {
            let w = window.expect("checked above");
            if !w.is_negative() {
                out.push(BigInt::zero());
            }
            let q = BigInt::from(*q);
            let mut v = BigInt::one();
            while &v <= w {
                out.push(v.clone());
                out.push(-&v);
                v *= &q;
            }
        }
        Generator::Rudin { h, levels } => {
            let base = BigInt::from(2 * *h);
            for n in 0..*levels {
                let big_n = 1u32 << n;
                let head = base.pow(4 * big_n);
                for j in 0..big_n {
                    let v = &head + base.pow(big_n + j);
                    if fits(&v) {
                        out.push(-&v);
                        out.push(v);
                    }
                }
            }
        }
    }
    Ok(IntegerSet::new(out))
}
