//! Population oscillations: a central splitter measured in channels 1 and 2,
//! side detectors counting the deflected particles of each source.

use rayon::prelude::*;

use crate::field::{log_pow, AngleField};
use crate::modes::DoubleFock;
use crate::numerics::{integrate_half_range_cos, ln_factorial, mean_1d, mean_2d, LogWeight, PeriodicGrid};
pub use crate::single_splitter::{fourier_coefficient_exact, s_bracket};
use crate::single_splitter::exact_nodes;
use crate::{require, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoOutcome {
    pub m1: u32,
    pub m2: u32,
    pub m_alpha: u32,
    pub m_beta: u32,
}

impl PoOutcome {
    pub fn new(m1: u32, m2: u32, m_alpha: u32, m_beta: u32) -> Self {
        PoOutcome { m1, m2, m_alpha, m_beta }
    }

    pub fn total(&self) -> u32 {
        self.m1 + self.m2 + self.m_alpha + self.m_beta
    }
}

/// Probabilities versus m_α at fixed (m1, m2); m_β = N − M − m_α.
#[derive(Debug, Clone, PartialEq)]
pub struct PoDistribution {
    pub m1: u32,
    pub m2: u32,
    pub n_alpha: u32,
    pub n_beta: u32,
    pub table: Vec<(u32, f64)>,
}

impl PoDistribution {
    pub fn values(&self) -> Vec<f64> {
        self.table.iter().map(|x| x.1).collect()
    }

    pub fn value_at(&self, m_alpha: u32) -> Option<f64> {
        self.table.iter().find(|x| x.0 == m_alpha).map(|x| x.1)
    }

    pub fn total(&self) -> f64 {
        crate::numerics::ordered_sum(&self.values())
    }

    /// Same slice scaled to unit sum (unchanged if the slice is empty).
    pub fn renormalized(&self) -> PoDistribution {
        let t = self.total();
        let mut out = self.clone();
        if t > 0.0 {
            for e in &mut out.table {
                e.1 /= t;
            }
        }
        out
    }

    /// P(center) / min(P(center ± 1)); below 1 means a central dip.
    pub fn central_ratio(&self, center: u32) -> Option<f64> {
        let c = self.value_at(center)?;
        let l = self.value_at(center.checked_sub(1)?)?;
        let r = self.value_at(center + 1)?;
        Some(c / l.min(r))
    }
}

fn check_outcome(src: DoubleFock, out: PoOutcome) -> Result<()> {
    require(out.total() == src.total(), || {
        format!("outcome counts sum to {}, source holds N = {}", out.total(), src.total())
    })
}

/// Exact alternating-sum law for one outcome.
pub fn po_prob_sum(src: DoubleFock, out: PoOutcome) -> Result<f64> {
    check_outcome(src, out)?;
    let a = src.n_alpha as i64 - out.m_alpha as i64;
    let s = s_bracket(out.m1, out.m2, a).to_log_weight();
    if s.is_zero() {
        return Ok(0.0);
    }
    let m = out.m1 + out.m2;
    let ln_pref = ln_factorial(out.m1 as u64) + ln_factorial(out.m2 as u64) + ln_factorial(src.n_alpha as u64)
        + ln_factorial(src.n_beta as u64)
        - ln_factorial(out.m_alpha as u64)
        - ln_factorial(out.m_beta as u64)
        - (m + src.total()) as f64 * std::f64::consts::LN_2;
    Ok((LogWeight::from_ln(ln_pref) * s * s).to_f64())
}

/// Fourier index of the side-detector outcome in the (Λ, λ) law.
pub fn fourier_index(src: DoubleFock, out: PoOutcome) -> i64 {
    src.n_alpha as i64 - out.m_alpha as i64 - src.n_beta as i64 + out.m_beta as i64
}

/// (1/2π)² ∫∫ cos(kΛ) h₊^{m1} h₋^{m2}, half bases h± = (cosΛ ± cosλ)/2.
pub fn po_integral_core(k: i64, m1: u32, m2: u32) -> f64 {
    crate::single_splitter::splitter_integral(k, m1, m2, 0)
}

/// The same probability from the two-angle integral.
pub fn po_prob_integral(src: DoubleFock, out: PoOutcome) -> Result<f64> {
    check_outcome(src, out)?;
    let m = out.m1 + out.m2;
    let k = fourier_index(src, out);
    let ln_pref = ln_factorial(src.n_alpha as u64) + ln_factorial(src.n_beta as u64)
        - ln_factorial(out.m1 as u64)
        - ln_factorial(out.m2 as u64)
        - ln_factorial(out.m_alpha as u64)
        - ln_factorial(out.m_beta as u64)
        + (m as f64 - src.total() as f64) * std::f64::consts::LN_2;
    Ok((po_integral_core(k, out.m1, out.m2) * ln_pref.exp()).max(0.0))
}

/// Slice P(m1, m2, m_α, m_β) over m_α with m_β = N − M − m_α.
pub fn po_slice(src: DoubleFock, m1: u32, m2: u32) -> Result<PoDistribution> {
    let n = src.total();
    require(m1 + m2 <= n, || format!("m1 + m2 = {} exceeds N = {n}", m1 + m2))?;
    let k = n - m1 - m2;
    let table = (0..=k)
        .into_par_iter()
        .map(|ma| po_prob_sum(src, PoOutcome::new(m1, m2, ma, k - ma)).map(|p| (ma, p)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PoDistribution { m1, m2, n_alpha: src.n_alpha, n_beta: src.n_beta, table })
}

/// F(Λ,λ) = [cosΛ + cosλ]^{m1} [cosΛ − cosλ]^{m2}, max-abs normalized.
pub fn f_field(m1: u32, m2: u32, grid: PeriodicGrid) -> AngleField {
    AngleField::from_log_terms(grid, format!("m1={m1} m2={m2}"), move |cap, small| {
        let (l1, s1) = log_pow(cap.cos() + small.cos(), m1);
        let (l2, s2) = log_pow(cap.cos() - small.cos(), m2);
        (l1 + l2, s1 * s2)
    })
}

/// ln|F| at a point.
pub fn ln_abs_f(m1: u32, m2: u32, cap: f64, small: f64) -> f64 {
    log_pow(cap.cos() + small.cos(), m1).0 + log_pow(cap.cos() - small.cos(), m2).0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FPeak {
    pub cap: f64,
    pub small: f64,
    pub sign: i8,
}

/// Stationary points of |F|: classical pair on Λ = 0, quantum pairs on λ = 0 and λ = ±π.
pub fn f_peaks(m1: u32, m2: u32) -> Result<Vec<FPeak>> {
    require(m1 >= 1 && m2 >= 1, || format!("m1 = {m1}, m2 = {m2} must both be at least 1"))?;
    let t1 = 2.0 * (m2 as f64 / m1 as f64).sqrt().atan();
    let t2 = 2.0 * (m1 as f64 / m2 as f64).sqrt().atan();
    let s_m1: i8 = if m1 % 2 == 0 { 1 } else { -1 };
    let s_m2: i8 = if m2 % 2 == 0 { 1 } else { -1 };
    let pi = std::f64::consts::PI;
    let mut out = vec![FPeak { cap: 0.0, small: t1, sign: 1 }, FPeak { cap: 0.0, small: -t1, sign: 1 }];
    out.push(FPeak { cap: t1, small: 0.0, sign: s_m2 });
    out.push(FPeak { cap: -t1, small: 0.0, sign: s_m2 });
    for cap in [t2, -t2] {
        for small in [pi, -pi] {
            out.push(FPeak { cap, small, sign: s_m1 });
        }
    }
    Ok(out)
}

/// True when |F| at the point is at least |F| at the eight neighbours at distance h.
pub fn is_local_max_abs_f(m1: u32, m2: u32, cap: f64, small: f64, h: f64) -> bool {
    let centre = ln_abs_f(m1, m2, cap, small);
    for di in [-1.0, 0.0, 1.0] {
        for dj in [-1.0, 0.0, 1.0] {
            if di == 0.0 && dj == 0.0 {
                continue;
            }
            if ln_abs_f(m1, m2, cap + di * h, small + dj * h) > centre + 1e-12 {
                return false;
            }
        }
    }
    true
}

/// D(Λ) = ⟨[cosΛ+cosλ]^{m1}[cosΛ−cosλ]^{M−m1}⟩_λ at every Λ node of the grid.
pub fn d_of_lambda_profile(m1: u32, m: u32, grid: PeriodicGrid) -> Result<Vec<(f64, f64)>> {
    require(m1 <= m, || format!("m1 = {m1} must not exceed M = {m}"))?;
    Ok(grid.nodes().into_par_iter().map(|cap| (cap, d_of_lambda(m1, m, cap))).collect())
}

pub fn d_of_lambda(m1: u32, m: u32, cap: f64) -> f64 {
    let c = cap.cos();
    mean_1d(m as usize + 1, |small| {
        let y = small.cos();
        (c + y).powi(m1 as i32) * (c - y).powi((m - m1) as i32)
    })
}

/// p_class(λ) = (1/2π)∫_{−π/2}^{π/2} cos^{N−M}Λ [cosΛ+cosλ]^{m1}[cosΛ−cosλ]^{M−m1} dΛ.
pub fn p_class_at(m1: u32, m: u32, n_total: u32, small: f64) -> f64 {
    let y = small.cos();
    let damping = (n_total - m) as i32;
    integrate_half_range_cos(|c| c.powi(damping) * (c + y).powi(m1 as i32) * (c - y).powi((m - m1) as i32), n_total as usize)
}

pub fn p_class_lambda(m1: u32, m: u32, n_total: u32, grid: PeriodicGrid) -> Result<Vec<(f64, f64)>> {
    require(m1 <= m && m <= n_total, || format!("need m1 <= M <= N, got m1={m1} M={m} N={n_total}"))?;
    Ok(grid.nodes().into_par_iter().map(|small| (small, p_class_at(m1, m, n_total, small))).collect())
}

/// P(m1, m2) summed over the side detectors, from the damped two-angle law.
pub fn marginal_interference(src: DoubleFock, m1: u32, m2: u32) -> Result<f64> {
    let n = src.total();
    let m = m1 + m2;
    require(m <= n, || format!("M = {m} exceeds N = {n}"))?;
    let damping = n - m;
    let k = src.n_alpha as i64 - src.n_beta as i64;
    let nodes = exact_nodes(n, k);
    let integral = mean_2d(nodes, |cap, small| {
        let (c, y) = (cap.cos(), small.cos());
        (k as f64 * cap).cos() * c.powi(damping as i32) * (0.5 * (c + y)).powi(m1 as i32) * (0.5 * (c - y)).powi(m2 as i32)
    });
    let ln_pref = ln_factorial(src.n_alpha as u64) + ln_factorial(src.n_beta as u64)
        - ln_factorial(damping as u64)
        - ln_factorial(m1 as u64)
        - ln_factorial(m2 as u64);
    Ok((integral * ln_pref.exp()).max(0.0))
}

/// T(φ) = cos^{m1}(φ/2) sin^{m2}(φ/2).
pub fn cat_envelope(m1: u32, m2: u32, phi: f64) -> f64 {
    (0.5 * phi).cos().powi(m1 as i32) * (0.5 * phi).sin().powi(m2 as i32)
}

pub fn cat_peak(m1: u32, m2: u32) -> Result<f64> {
    require(m1 + m2 >= 1, || "m1 + m2 must be at least 1".to_string())?;
    Ok(2.0 * (m2 as f64 / m1 as f64).sqrt().atan())
}

/// Σ_j w_j cos(k Λ_j) for a quantum-angle distribution made of point masses.
pub fn cosine_transform(masses: &[(f64, f64)], k: i64) -> f64 {
    masses.iter().map(|(cap, w)| w * (k as f64 * cap).cos()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::compositions;
    use crate::numerics::maximize_scalar;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn two_particle_examples() {
        let src = DoubleFock::new(1, 1);
        assert_abs_diff_eq!(po_prob_sum(src, PoOutcome::new(0, 0, 1, 1)).unwrap(), 0.25, epsilon = 1e-15);
        assert_eq!(po_prob_sum(src, PoOutcome::new(1, 1, 0, 0)).unwrap(), 0.0);
        assert_abs_diff_eq!(po_prob_integral(src, PoOutcome::new(0, 0, 1, 1)).unwrap(), 0.25, epsilon = 1e-15);
        assert!(po_prob_sum(src, PoOutcome::new(1, 1, 1, 0)).is_err());
    }

    #[test]
    fn fourier_coefficients_match_quadrature() {
        for (m1, m2) in [(3u32, 4u32), (5, 5), (0, 6), (7, 2)] {
            let m = (m1 + m2) as i64;
            for k in -m - 2..=m + 2 {
                let exact = fourier_coefficient_exact(m1, m2, k).to_f64();
                let quad = po_integral_core(k, m1, m2) * 2f64.powi(m as i32);
                assert!((exact - quad).abs() < 1e-10 * exact.abs().max(1.0), "{m1} {m2} {k}");
            }
        }
    }

    #[test]
    fn joint_normalization() {
        for (na, nb) in [(1u32, 1u32), (3, 2), (6, 6), (12, 12), (10, 14), (0, 5)] {
            let n = na + nb;
            let src = DoubleFock::new(na, nb);
            let total: f64 = compositions(n, 4)
                .par_iter()
                .map(|r| po_prob_sum(src, PoOutcome::new(r[0], r[1], r[2], r[3])).unwrap())
                .collect::<Vec<_>>()
                .iter()
                .sum();
            assert!((total - 1.0).abs() < 1e-10, "{na} {nb} {total}");
        }
    }

    #[test]
    fn sum_and_integral_agree() {
        for (na, nb) in [(2u32, 3u32), (5, 5), (4, 9), (10, 10)] {
            let src = DoubleFock::new(na, nb);
            for r in compositions(na + nb, 4) {
                let out = PoOutcome::new(r[0], r[1], r[2], r[3]);
                let a = po_prob_sum(src, out).unwrap();
                let b = po_prob_integral(src, out).unwrap();
                assert!((a - b).abs() < 1e-10, "{out:?}: {a} {b}");
            }
        }
    }

    #[test]
    fn integrand_depends_on_imbalance_only_through_k() {
        let out = PoOutcome::new(3, 4, 2, 3);
        for shift in 0..3u32 {
            let src = DoubleFock::new(6 + shift, 6 - shift);
            let shifted = PoOutcome::new(out.m1, out.m2, out.m_alpha + shift, out.m_beta - shift);
            assert_eq!(fourier_index(src, shifted), fourier_index(DoubleFock::new(6, 6), out));
        }
    }

    #[test]
    fn fig8_slice_dip_and_parity() {
        let src = DoubleFock::new(100, 100);
        let odd = po_slice(src, 17, 83).unwrap();
        assert!(odd.central_ratio(50).unwrap() < 0.5);
        let even = po_slice(src, 18, 82).unwrap();
        assert!(even.central_ratio(50).unwrap() > 1.0);
        // further fringes on both sides of the dip
        let v = odd.values();
        let minima = (41..60).filter(|&i| v[i] < v[i - 1] && v[i] < v[i + 1]).count();
        assert!(minima >= 5, "{minima}");
        assert!(v[50] < 1e-12 * v[48]);
    }

    #[test]
    fn parity_flip_for_fixed_total() {
        let src = DoubleFock::new(30, 30);
        for m1 in 3..10u32 {
            let a = po_slice(src, m1, 30 - m1).unwrap().central_ratio(15).unwrap();
            let b = po_slice(src, m1 - 1, 31 - m1).unwrap().central_ratio(15).unwrap();
            assert!((a < 1.0) != (b < 1.0), "m1={m1}");
        }
    }

    #[test]
    fn m1_zero_is_single_peak() {
        let v = po_slice(DoubleFock::new(20, 20), 0, 20).unwrap().values();
        let imax = v.iter().enumerate().max_by(|a, b| a.1.partial_cmp(b.1).unwrap()).unwrap().0;
        assert_eq!(imax, 10);
        assert!(v[..=imax].windows(2).all(|w| w[0] <= w[1]));
        assert!(v[imax..].windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn delta_peak_limit() {
        for k in -8..=8i64 {
            let plus = cosine_transform(&[(0.0, 1.0), (PI / 2.0, 0.5), (-PI / 2.0, 0.5)], k);
            let minus = cosine_transform(&[(0.0, 1.0), (PI / 2.0, -0.5), (-PI / 2.0, -0.5)], k);
            assert_abs_diff_eq!(plus, 1.0 + (k as f64 * PI / 2.0).cos(), epsilon = 1e-14);
            assert_abs_diff_eq!(minus, 1.0 - (k as f64 * PI / 2.0).cos(), epsilon = 1e-14);
        }
    }

    #[test]
    fn peaks_match_numeric_list() {
        let p = f_peaks(17, 23).unwrap();
        assert_abs_diff_eq!(p[0].small, 1.72, epsilon = 0.01);
        assert_abs_diff_eq!(p[2].cap, 1.72, epsilon = 0.01);
        assert_abs_diff_eq!(p[4].cap, 1.42, epsilon = 0.01);
        let p = f_peaks(18, 22).unwrap();
        assert_abs_diff_eq!(p[0].small, 1.67, epsilon = 0.01);
        assert_abs_diff_eq!(p[2].cap, 1.67, epsilon = 0.01);
        assert_abs_diff_eq!(p[4].cap, 1.47, epsilon = 0.01);
        for q in f_peaks(12, 12).unwrap() {
            assert!(q.cap.abs() < 1e-12 || (q.cap.abs() - PI / 2.0).abs() < 1e-12);
        }
        assert!(f_peaks(0, 5).is_err());
        for (m1, m2) in [(17, 23), (18, 22), (3, 9), (10, 1)] {
            for q in f_peaks(m1, m2).unwrap() {
                assert!(is_local_max_abs_f(m1, m2, q.cap, q.small, 1e-3), "{m1} {m2} {q:?}");
                let v = (q.cap.cos() + q.small.cos()).powi(m1 as i32) * (q.cap.cos() - q.small.cos()).powi(m2 as i32);
                assert_eq!(v.signum() as i8, q.sign);
            }
        }
    }

    #[test]
    fn f_field_single_ridge_when_m1_zero() {
        let f = f_field(0, 10, PeriodicGrid::new(64, 2).unwrap());
        let i0 = f.index_of(0.0);
        let row: Vec<f64> = (0..64).map(|j| f.get(i0, j).abs()).collect();
        let peaks = (0..64).filter(|&j| row[j] > row[(j + 63) % 64] && row[j] >= row[(j + 1) % 64]).count();
        assert_eq!(peaks, 1);
    }

    #[test]
    fn d_profile_shapes() {
        let grid = PeriodicGrid::new(400, 1).unwrap();
        let d = d_of_lambda_profile(17, 40, grid).unwrap();
        for (i, (_, v)) in d.iter().enumerate().skip(1) {
            assert_abs_diff_eq!(*v, d[400 - i].1, epsilon = 1e-9 * v.abs().max(1.0));
        }
        // |D| has its outer extremum near π/2
        let best = d.iter().filter(|x| x.0 > 0.3 && x.0 < PI - 0.3).max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap()).unwrap();
        assert!((best.0 - PI / 2.0).abs() < 0.1, "{best:?}");
        // m1 = 4: outer maximum pulled inside π/2, local minimum at π/2
        let h = 1e-3;
        let dd = |x: f64| d_of_lambda(4, 40, x);
        assert!(dd(PI / 2.0) < dd(PI / 2.0 - h) && dd(PI / 2.0) < dd(PI / 2.0 + h));
        let (xmax, _) = maximize_scalar(dd, 0.4, PI / 2.0 - 0.05, 1e-8).unwrap();
        assert!(xmax < PI / 2.0 - 0.3);
    }

    #[test]
    fn p_class_peaks() {
        for (m1, want) in [(18u32, 1.67), (10, 2.09)] {
            let (x, _) = maximize_scalar(|l| p_class_at(m1, 40, 80, l), 0.5, PI - 0.05, 1e-8).unwrap();
            assert_abs_diff_eq!(x, want, epsilon = 0.02);
            assert_abs_diff_eq!(p_class_at(m1, 40, 80, 0.7), p_class_at(m1, 40, 80, -0.7), epsilon = 1e-12);
        }
    }

    #[test]
    fn marginal_identities() {
        for (na, nb) in [(3u32, 3u32), (5, 7), (10, 10)] {
            let src = DoubleFock::new(na, nb);
            let n = na + nb;
            for m in [0, 3, n - 2, n] {
                for m1 in 0..=m {
                    let direct: f64 = (0..=n - m).map(|ma| po_prob_sum(src, PoOutcome::new(m1, m - m1, ma, n - m - ma)).unwrap()).sum();
                    assert!((marginal_interference(src, m1, m - m1).unwrap() - direct).abs() < 1e-10);
                }
            }
            for m1 in 0..=n {
                let single = crate::single_splitter::prob_single(src, m1).unwrap();
                // every particle reaches the interferometer with probability 2^{-N}
                let d = (marginal_interference(src, m1, n - m1).unwrap() * 2f64.powi(n as i32) - single).abs();
                assert!(d < 1e-11, "na={na} m1={m1} d={d:e} single={single:e}");
            }
        }
    }

    #[test]
    fn marginal_classical_limit() {
        let src = DoubleFock::new(205, 205);
        let q: Vec<f64> = (0..=10).map(|m1| marginal_interference(src, m1, 10 - m1).unwrap()).collect();
        let total: f64 = q.iter().sum();
        for m1 in 0..=10u32 {
            let ln_c = ln_factorial(10) - ln_factorial(m1 as u64) - ln_factorial(10 - m1 as u64);
            let cl = ln_c.exp() * mean_1d(12, |l| (0.5 * (1.0 + l.cos())).powi(m1 as i32) * (0.5 * (1.0 - l.cos())).powi(10 - m1 as i32));
            assert!(((q[m1 as usize] / total - cl) / cl).abs() < 0.01, "m1={m1}");
        }
    }

    #[test]
    fn cat_examples() {
        assert_abs_diff_eq!(cat_peak(17, 83).unwrap(), 2.292, epsilon = 1e-3);
        assert_abs_diff_eq!(cat_peak(17, 83).unwrap() / PI, 0.73, epsilon = 0.005);
        assert_abs_diff_eq!(cat_peak(7, 7).unwrap(), PI / 2.0, epsilon = 1e-15);
        let p = cat_peak(17, 83).unwrap();
        assert_eq!((cat_envelope(17, 83, p) / cat_envelope(17, 83, -p)).signum(), -1.0);
        assert_eq!((cat_envelope(17, 82, p) / cat_envelope(17, 82, -p)).signum(), 1.0);
    }
}
