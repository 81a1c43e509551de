//! Scalar fields sampled on the (Λ, λ) torus.

use rayon::prelude::*;

use crate::numerics::PeriodicGrid;

/// Values indexed by (Λ index, λ index), row-major in Λ.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleField {
    pub grid: PeriodicGrid,
    pub values: Vec<f64>,
    pub meta: String,
}

impl AngleField {
    /// Evaluates `log_term(Λ, λ) -> (ln|v|, sign)` on the grid and rescales so
    /// that max |value| = 1. Fields that vanish everywhere stay zero.
    pub fn from_log_terms<F>(grid: PeriodicGrid, meta: String, log_term: F) -> AngleField
    where
        F: Fn(f64, f64) -> (f64, i8) + Sync,
    {
        let n = grid.points_per_axis;
        let nodes = grid.nodes();
        let raw: Vec<(f64, i8)> = (0..n * n)
            .into_par_iter()
            .map(|idx| log_term(nodes[idx / n], nodes[idx % n]))
            .collect();
        let top = raw
            .iter()
            .filter(|(_, s)| *s != 0)
            .map(|(v, _)| *v)
            .fold(f64::NEG_INFINITY, f64::max);
        let values = raw
            .iter()
            .map(|&(v, s)| if s == 0 || !top.is_finite() { 0.0 } else { s as f64 * (v - top).exp() })
            .collect();
        AngleField { grid, values, meta }
    }

    /// Plain evaluation followed by max-abs normalization.
    pub fn from_values<F>(grid: PeriodicGrid, meta: String, f: F) -> AngleField
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let n = grid.points_per_axis;
        let nodes = grid.nodes();
        let mut values: Vec<f64> = (0..n * n).into_par_iter().map(|idx| f(nodes[idx / n], nodes[idx % n])).collect();
        let top = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if top > 0.0 {
            for v in &mut values {
                *v /= top;
            }
        }
        AngleField { grid, values, meta }
    }

    /// Plain evaluation, no rescaling.
    pub fn raw<F>(grid: PeriodicGrid, meta: String, f: F) -> AngleField
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let n = grid.points_per_axis;
        let nodes = grid.nodes();
        let values = (0..n * n).into_par_iter().map(|idx| f(nodes[idx / n], nodes[idx % n])).collect();
        AngleField { grid, values, meta }
    }

    pub fn n(&self) -> usize {
        self.grid.points_per_axis
    }

    pub fn get(&self, i_cap: usize, i_small: usize) -> f64 {
        self.values[i_cap * self.n() + i_small]
    }

    /// Long-form rows (Λ, λ, value).
    pub fn rows(&self) -> Vec<(f64, f64, f64)> {
        let nodes = self.grid.nodes();
        let n = self.n();
        (0..n * n).map(|idx| (nodes[idx / n], nodes[idx % n], self.values[idx])).collect()
    }

    /// Index of the grid node closest to `angle` (mod 2π).
    pub fn index_of(&self, angle: f64) -> usize {
        let n = self.n() as f64;
        let t = (angle + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI);
        ((t / (2.0 * std::f64::consts::PI) * n).round() as usize) % self.n()
    }
}

/// ln|base| and its sign, with base^0 = 1.
pub(crate) fn log_pow(base: f64, exp: u32) -> (f64, i8) {
    if exp == 0 {
        return (0.0, 1);
    }
    if base == 0.0 {
        return (f64::NEG_INFINITY, 0);
    }
    let sign = if base < 0.0 && exp % 2 == 1 { -1 } else { 1 };
    (exp as f64 * base.abs().ln(), sign)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_and_lookup() {
        let g = PeriodicGrid::new(8, 2).unwrap();
        let f = AngleField::from_values(g, "t".into(), |a, b| 3.0 * a.cos() * b.cos());
        let top = f.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((top - 1.0).abs() < 1e-15);
        assert_eq!(f.index_of(0.0), 4);
        assert_eq!(f.index_of(std::f64::consts::PI), 0);
        assert!((f.get(4, 4) - 1.0).abs() < 1e-15);
        assert_eq!(f.rows().len(), 64);
    }

    #[test]
    fn log_pow_handles_zero_and_sign() {
        assert_eq!(log_pow(0.0, 0), (0.0, 1));
        assert_eq!(log_pow(0.0, 2).1, 0);
        assert_eq!(log_pow(-2.0, 3).1, -1);
        assert_eq!(log_pow(-2.0, 2).1, 1);
    }
}
