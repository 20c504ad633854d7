//! Tabulated distance functions with log-log interpolation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack allowed when checking that values are nonincreasing.
const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceTable {
    entries: Vec<(f64, f64)>,
}

/// A table lookup, flagged when `r` lies outside the tabulated range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lookup {
    pub value: f64,
    pub extrapolated: bool,
}

impl DistanceTable {
    /// Entries must have strictly increasing positive `r` and nonnegative,
    /// nonincreasing values.
    pub fn new(entries: Vec<(f64, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::domain("distance table is empty"));
        }
        for &(r, v) in &entries {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::domain(format!("table abscissa must be positive, got {r}")));
            }
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("table value must be nonnegative, got {v}")));
            }
        }
        for w in entries.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::domain("table abscissae must be strictly increasing"));
            }
            if w[1].1 > w[0].1 * (1.0 + MONOTONE_SLACK) + f64::MIN_POSITIVE {
                return Err(Error::domain(format!(
                    "table values must be nonincreasing: d({}) = {} < d({}) = {}",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        Ok(DistanceTable { entries })
    }

    /// `a r^(-exponent)` sampled on `r_grid`.
    pub fn power_law(a: f64, exponent: f64, r_grid: &[f64]) -> Result<Self> {
        if !(a > 0.0) || !(exponent >= 0.0) {
            return Err(Error::domain("power law needs a > 0 and a nonnegative exponent"));
        }
        Self::new(r_grid.iter().map(|&r| (r, a * r.powf(-exponent))).collect())
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    pub fn range(&self) -> (f64, f64) {
        (self.entries[0].0, self.entries[self.entries.len() - 1].0)
    }

    pub fn contains(&self, r: f64) -> bool {
        let (lo, hi) = self.range();
        r >= lo && r <= hi
    }

    /// Interpolated value, linear in log-log between positive values and
    /// linear in `r` next to a zero value; clamped outside the range.
    pub fn lookup(&self, r: f64) -> Lookup {
        let e = &self.entries;
        let (lo, hi) = self.range();
        if r <= lo || r >= hi {
            let value = if r <= lo { e[0].1 } else { e[e.len() - 1].1 };
            return Lookup {
                value,
                extrapolated: r < lo || r > hi,
            };
        }
        let k = e.partition_point(|&(x, _)| x <= r);
        let (r0, v0) = e[k - 1];
        let (r1, v1) = e[k];
        let value = if v0 > 0.0 && v1 > 0.0 {
            let s = (r / r0).ln() / (r1 / r0).ln();
            (v0.ln() + s * (v1 / v0).ln()).exp()
        } else {
            v0 + (v1 - v0) * (r - r0) / (r1 - r0)
        };
        Lookup {
            value,
            extrapolated: false,
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.lookup(r).value
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[1].1 < w[0].1)
    }
}

/// `count` logarithmically spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || count < 2 {
        return Err(Error::domain("log grid needs 0 < lo < hi and at least two points"));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..count)
        .map(|i| {
            if i == count - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect())
}

/// Default r-grid: 40 points on `[1e-2, 1e4]`.
pub fn default_r_grid() -> Vec<f64> {
    log_grid(1e-2, 1e4, 40).expect("valid default grid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_interpolates_exactly() {
        let t = DistanceTable::power_law(2.0, 1.5, &log_grid(0.1, 100.0, 7).unwrap()).unwrap();
        for r in [0.13, 1.0, 7.7, 99.0] {
            assert!((t.value(r) / (2.0 * r.powf(-1.5)) - 1.0).abs() < 1e-12);
        }
        let l = t.lookup(1e3);
        assert!(l.extrapolated);
        assert_eq!(l.value, t.entries().last().unwrap().1);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(DistanceTable::new(vec![]).is_err());
        assert!(DistanceTable::new(vec![(1.0, 1.0), (2.0, 2.0)]).is_err());
        assert!(DistanceTable::new(vec![(1.0, 1.0), (1.0, 0.5)]).is_err());
        assert!(DistanceTable::new(vec![(1.0, -1.0)]).is_err());
    }

    #[test]
    fn zero_tail() {
        let t = DistanceTable::new(vec![(1.0, 1.0), (2.0, 0.0), (3.0, 0.0)]).unwrap();
        assert_eq!(t.value(1.5), 0.5);
        assert_eq!(t.value(2.5), 0.0);
        assert!(!t.is_strictly_decreasing());
    }
}
