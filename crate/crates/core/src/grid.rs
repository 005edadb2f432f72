//! Piecewise linear functions on a uniform grid over `[0, 1]`.

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const DEFAULT_GRID: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
    /// Cumulative trapezoid integrals, `cumulative[i] = ∫_0^{x_i}`.
    cumulative: Vec<f64>,
}

impl GridFunction {
    /// `values[i]` is the value at `i / N`; `N = values.len() - 1` must be a
    /// power of two.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let n = values.len().saturating_sub(1);
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::Config(format!(
                "grid resolution {n} is not a positive power of two"
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Config(format!("non-finite grid value {v}")));
        }
        let h = 1.0 / n as f64;
        let mut cumulative = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in values.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            cumulative.push(acc);
        }
        Ok(GridFunction { values, cumulative })
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..=n).map(|i| f(i as f64 / n as f64)).collect())
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n + 1])
    }

    /// Number of grid intervals.
    pub fn resolution(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.resolution() as f64
    }

    /// Linear interpolation; arguments are clamped to `[0, 1]`.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.resolution();
        let t = x.clamp(0.0, 1.0) * n as f64;
        let i = (t.floor() as usize).min(n - 1);
        let w = t - i as f64;
        self.values[i] + w * (self.values[i + 1] - self.values[i])
    }

    /// Trapezoid integral over `[0, 1]` (exact for the interpolant).
    pub fn integral(&self) -> f64 {
        *self.cumulative.last().expect("non-empty grid")
    }

    /// `∫_0^x` of the interpolant.
    pub fn primitive(&self, x: f64) -> f64 {
        let n = self.resolution();
        let t = x.clamp(0.0, 1.0) * n as f64;
        let i = (t.floor() as usize).min(n - 1);
        let h = 1.0 / n as f64;
        let dx = (t - i as f64) * h;
        let v0 = self.values[i];
        let slope = (self.values[i + 1] - v0) / h;
        self.cumulative[i] + dx * (v0 + 0.5 * slope * dx)
    }

    /// `∫_a^b` of the interpolant, for `a <= b` inside `[0, 1]`.
    pub fn integral_between(&self, a: f64, b: f64) -> f64 {
        self.primitive(b) - self.primitive(a)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Total variation of the interpolant.
    pub fn variation(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        GridFunction::new(self.values.iter().map(|v| v * c).collect()).expect("same grid")
    }

    /// Rescaled to integral one.
    pub fn normalized(&self) -> Result<GridFunction> {
        let mass = self.integral();
        if !(mass > 0.0) {
            return Err(Error::Config(format!("cannot normalize mass {mass}")));
        }
        Ok(self.scale(1.0 / mass))
    }

    pub fn sup_distance(&self, other: &GridFunction) -> f64 {
        self.zip(other).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// `∫ |f - g|` using the trapezoid rule on the shared grid.
    pub fn l1_distance(&self, other: &GridFunction) -> f64 {
        let diffs: Vec<f64> = self.zip(other).map(|(a, b)| (a - b).abs()).collect();
        let h = 1.0 / self.resolution() as f64;
        diffs.windows(2).map(|w| 0.5 * h * (w[0] + w[1])).sum()
    }

    fn zip<'a>(&'a self, other: &'a GridFunction) -> impl Iterator<Item = (f64, f64)> + 'a {
        assert_eq!(self.resolution(), other.resolution(), "grid mismatch");
        self.values.iter().copied().zip(other.values.iter().copied())
    }

    /// CSV with header `x,h` and one row per node, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,h\n");
        for (i, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{:.16e},{:.16e}", self.node(i), v);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<GridFunction> {
        let mut lines = text.lines();
        match lines.next().map(str::trim) {
            Some("x,h") => {}
            other => return Err(Error::Parse(format!("expected header x,h, got {other:?}"))),
        }
        let mut values = Vec::new();
        for (row, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (_, h) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("row {row}: expected two columns")))?;
            let h = h
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {row}: {e}")))?;
            values.push(h);
        }
        GridFunction::new(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_non_power_of_two() {
        assert!(GridFunction::new(vec![1.0; 4]).is_err());
        assert!(GridFunction::new(vec![1.0; 5]).is_ok());
    }

    #[test]
    fn linear_functions_are_exact() {
        let g = GridFunction::from_fn(8, |x| 2.0 * x + 1.0).unwrap();
        assert!((g.eval(1.0 / 3.0) - 5.0 / 3.0).abs() < 1e-15);
        assert!((g.integral() - 2.0).abs() < 1e-15);
        assert!((g.integral_between(0.1, 0.7) - (0.49 + 0.7 - 0.01 - 0.1)).abs() < 1e-14);
        assert!((g.variation() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn normalized_has_unit_mass() {
        let g = GridFunction::from_fn(4096, |x| 1.0 / (1.0 + x)).unwrap();
        assert!((g.normalized().unwrap().integral() - 1.0).abs() < 1e-12);
        assert!(GridFunction::constant(4, 0.0).unwrap().normalized().is_err());
    }

    #[test]
    fn refinement_changes_integral_at_second_order() {
        let f = |x: f64| (3.0 * x).sin() + x * x;
        let exact = (1.0 - 3f64.cos()) / 3.0 + 1.0 / 3.0;
        let coarse = (GridFunction::from_fn(64, f).unwrap().integral() - exact).abs();
        let fine = (GridFunction::from_fn(128, f).unwrap().integral() - exact).abs();
        assert!(coarse < 1e-3);
        assert!((coarse / fine - 4.0).abs() < 0.1, "ratio {}", coarse / fine);
    }

    #[test]
    fn csv_roundtrip() {
        let g = GridFunction::from_fn(16, |x| (x * 7.3).cos().abs() / 3.0).unwrap();
        assert_eq!(GridFunction::from_csv(&g.to_csv()).unwrap(), g);
    }

    proptest! {
        #[test]
        fn integral_between_is_additive(a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0) {
            let g = GridFunction::from_fn(32, |x| 1.0 + (5.0 * x).sin()).unwrap();
            let mut v = [a, b, c];
            v.sort_by(f64::total_cmp);
            let whole = g.integral_between(v[0], v[2]);
            let parts = g.integral_between(v[0], v[1]) + g.integral_between(v[1], v[2]);
            prop_assert!((whole - parts).abs() < 1e-14);
        }
    }
}
