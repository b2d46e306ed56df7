use std::collections::HashMap;
use std::f64::consts::PI;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{j0, j1};
use crate::error::{Error, Result};

/// Residual tolerance used by the zero finder, relative to the zero.
pub const ZERO_TOL: f64 = 1e-12;
const MAX_COUNT: usize = 1_000_000;

/// Nonnegative zeros of `J_1`, `λ_0 = 0 < λ_1 < ...`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroTable {
    pub zeros: Vec<f64>,
}

impl ZeroTable {
    pub fn count(&self) -> usize {
        self.zeros.len()
    }

    pub fn get(&self, n: usize) -> Option<f64> {
        self.zeros.get(n).copied()
    }

    pub fn truncated(&self, count: usize) -> ZeroTable {
        ZeroTable {
            zeros: self.zeros[..count.min(self.zeros.len())].to_vec(),
        }
    }

    /// Writes the cache format: a header line followed by one zero per line
    /// with 17 significant digits.
    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir)?;
            }
        }
        let mut w = BufWriter::new(fs::File::create(path)?);
        writeln!(w, "# j1-zeros count={} tol={:e}", self.count(), ZERO_TOL)?;
        for z in &self.zeros {
            writeln!(w, "{z:.16e}")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<ZeroTable> {
        let r = BufReader::new(fs::File::open(path)?);
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Cache(format!("{}: empty file", path.display())))??;
        let count = header
            .strip_prefix("# j1-zeros ")
            .and_then(|rest| {
                rest.split_whitespace()
                    .find_map(|kv| kv.strip_prefix("count="))
            })
            .and_then(|c| c.parse::<usize>().ok())
            .ok_or_else(|| Error::Cache(format!("{}: bad header {header:?}", path.display())))?;
        let mut zeros = Vec::with_capacity(count);
        for line in lines {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let z: f64 = t
                .parse()
                .map_err(|_| Error::Cache(format!("{}: bad value {t:?}", path.display())))?;
            zeros.push(z);
        }
        if zeros.len() != count {
            return Err(Error::Cache(format!(
                "{}: header says {count} zeros, found {}",
                path.display(),
                zeros.len()
            )));
        }
        if zeros.first() != Some(&0.0) || zeros.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Cache(format!(
                "{}: zeros must start at 0 and increase",
                path.display()
            )));
        }
        Ok(ZeroTable { zeros })
    }
}

/// The first `count` nonnegative zeros of `J_1`, including `λ_0 = 0`.
pub fn j1_zeros(count: usize) -> Result<ZeroTable> {
    if count > MAX_COUNT {
        return Err(Error::Domain {
            op: "j1_zeros",
            msg: format!("count {count} exceeds {MAX_COUNT}"),
        });
    }
    let zeros: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|n| if n == 0 { 0.0 } else { j1_zero(n) })
        .collect();
    Ok(ZeroTable { zeros })
}

/// The `n`-th positive zero of `J_1`: McMahon guess, then Newton with
/// `J_1' = J_0 - J_1/x`, safeguarded by bisection inside `[nπ, (n+1/2)π]`.
pub fn j1_zero(n: usize) -> f64 {
    assert!(n >= 1, "the n-th positive zero needs n >= 1");
    let mut lo = n as f64 * PI;
    let mut hi = (n as f64 + 0.5) * PI;
    let f_lo = j1(lo);
    debug_assert!(f_lo * j1(hi) < 0.0, "no sign change for zero {n}");
    let b = (n as f64 + 0.25) * PI;
    let mut x = b - 3.0 / (8.0 * b) + 3.0 / (128.0 * b * b * b);
    if !(x > lo && x < hi) {
        x = 0.5 * (lo + hi);
    }
    for _ in 0..100 {
        let f = j1(x);
        if f == 0.0 {
            return x;
        }
        if (f > 0.0) == (f_lo > 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        let d = j0(x) - f / x;
        let mut next = x - f / d;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - x).abs();
        x = next;
        if step <= 4.0 * f64::EPSILON * x {
            break;
        }
    }
    x
}

/// Process-wide table holding at least `count` zeros; grown on demand and
/// shared read-only.
pub fn shared_zeros(count: usize) -> Result<Arc<ZeroTable>> {
    static CACHE: OnceLock<Mutex<Option<Arc<ZeroTable>>>> = OnceLock::new();
    let cell = CACHE.get_or_init(|| Mutex::new(None));
    let mut guard = cell.lock().expect("zero cache poisoned");
    if let Some(t) = guard.as_ref() {
        if t.count() >= count {
            return Ok(Arc::clone(t));
        }
    }
    let t = Arc::new(j1_zeros(count)?);
    *guard = Some(Arc::clone(&t));
    Ok(t)
}

/// Reads the cache at `path` when it holds at least `count` zeros;
/// otherwise computes them and rewrites the cache.
pub fn load_or_compute_zeros(count: usize, path: Option<&Path>) -> Result<Arc<ZeroTable>> {
    static LOADED: OnceLock<Mutex<HashMap<std::path::PathBuf, Arc<ZeroTable>>>> = OnceLock::new();
    let Some(path) = path else {
        return shared_zeros(count);
    };
    let loaded = LOADED.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = loaded.lock().expect("zero cache poisoned").get(path) {
        if t.count() >= count {
            return Ok(Arc::clone(t));
        }
    }
    if path.exists() {
        if let Ok(t) = ZeroTable::load(path) {
            if t.count() >= count {
                let t = Arc::new(t);
                loaded
                    .lock()
                    .expect("zero cache poisoned")
                    .insert(path.to_path_buf(), Arc::clone(&t));
                return Ok(t);
            }
        }
    }
    let t = j1_zeros(count)?;
    t.save(path)?;
    // Reload so callers see exactly the cached digits.
    let t = Arc::new(ZeroTable::load(path)?);
    loaded
        .lock()
        .expect("zero cache poisoned")
        .insert(path.to_path_buf(), Arc::clone(&t));
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_zeros() {
        let t = j1_zeros(6).unwrap();
        let want = [
            0.0,
            3.831_705_970_207_512,
            7.015_586_669_815_619,
            10.173_468_135_062_722,
            13.323_691_936_314_223,
            16.470_630_050_877_634,
        ];
        for (z, w) in t.zeros.iter().zip(want) {
            assert!((z - w).abs() < 1e-13, "{z} vs {w}");
        }
    }

    // Independent oracle: plain bisection on the sign of J_1.
    fn bisect_zero(n: usize) -> f64 {
        let (mut lo, mut hi) = (n as f64 * PI, (n as f64 + 0.5) * PI);
        let s = j1(lo).signum();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if j1(mid).signum() == s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn newton_matches_bisection() {
        for n in [1usize, 2, 9, 40, 333, 5000, 22001] {
            let a = j1_zero(n);
            let b = bisect_zero(n);
            assert!((a - b).abs() <= 1e-12 * a, "zero {n}: {a} vs {b}");
        }
    }

    #[test]
    fn zeros_vanish_increase_and_beat_the_lower_bound() {
        let t = j1_zeros(3000).unwrap();
        for (n, w) in t.zeros.windows(2).enumerate() {
            assert!(w[1] > w[0]);
            let k = n + 1;
            let z = w[1];
            assert!(z > 2.0 / 3.0 * PI * k as f64);
            assert!(j1(z).abs() <= ZERO_TOL * z);
            assert!(j1(k as f64 * PI) * j1((k as f64 + 0.5) * PI) < 0.0);
        }
    }

    #[test]
    fn cache_round_trip_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("z.cache");
        let t = j1_zeros(500).unwrap();
        t.save(&path).unwrap();
        let back = ZeroTable::load(&path).unwrap();
        assert_eq!(back.zeros.len(), 500);
        for (a, b) in t.zeros.iter().zip(&back.zeros) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# j1-zeros count=500 tol=1e-12\n"));

        let shared = load_or_compute_zeros(400, Some(&path)).unwrap();
        assert_eq!(shared.count(), 500);
    }

    #[test]
    fn corrupt_cache_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.cache");
        std::fs::write(&path, "# j1-zeros count=3 tol=1e-12\n0\n3.8\n").unwrap();
        assert!(matches!(ZeroTable::load(&path), Err(Error::Cache(_))));
        std::fs::write(&path, "garbage\n").unwrap();
        assert!(ZeroTable::load(&path).is_err());
    }
}
