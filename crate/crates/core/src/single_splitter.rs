//! Two Fock states on one 50/50 beam splitter.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::field::{log_pow, AngleField};
use crate::modes::DoubleFock;
use num_bigint::BigInt;

use crate::numerics::{exact_reciprocal_factorial_sum, factorial_big, ln_factorial, mean_2d, ExactRational, LogWeight, PeriodicGrid};
use crate::{require, Result};

/// e^{−iN_βφ}(1 + i e^{iφ})^{m1} (i + e^{iφ})^{m2}.
pub fn r_of_phi(m1: u32, m2: u32, n_beta: u32, phi: f64) -> Complex64 {
    let e = Complex64::from_polar(1.0, phi);
    let i = Complex64::new(0.0, 1.0);
    Complex64::from_polar(1.0, -(n_beta as f64) * phi) * (1.0 + i * e).powu(m1) * (i + e).powu(m2)
}

/// Number of nodes per axis making the two-angle integral exact.
pub(crate) fn exact_nodes(n_total: u32, fourier: i64) -> usize {
    n_total as usize + fourier.unsigned_abs() as usize + 1
}

/// (1/2π)² ∫∫ cos(kΛ) Π_i h_i^{m_i} with half bases h = (cosΛ ± cosλ)/2.
pub(crate) fn splitter_integral(k: i64, m1: u32, m2: u32, damping: u32) -> f64 {
    let n = exact_nodes(m1 + m2 + damping, k);
    mean_2d(n, |cap, small| {
        let c = cap.cos();
        let y = small.cos();
        (k as f64 * cap).cos() * c.powi(damping as i32) * (0.5 * (c + y)).powi(m1 as i32) * (0.5 * (c - y)).powi(m2 as i32)
    })
}

/// P(m1, N − m1) for two Fock sources on the 50/50 splitter. The two-angle
/// integral is taken from its exact Fourier coefficient, which avoids the
/// cancellation a floating-point grid suffers for strongly imbalanced sources.
pub fn prob_single(src: DoubleFock, m1: u32) -> Result<f64> {
    let n = src.total();
    require(m1 <= n, || format!("m1 = {m1} must lie in [0, N = {n}]"))?;
    let m2 = n - m1;
    let k = src.n_alpha as i64 - src.n_beta as i64;
    let g = fourier_coefficient_exact(m1, m2, k).to_log_weight();
    Ok((single_prefactor(src, m1, m2) * g).to_f64().max(0.0))
}

/// N_α! N_β! / (m1! m2!).
fn single_prefactor(src: DoubleFock, m1: u32, m2: u32) -> LogWeight {
    LogWeight::from_ln(
        ln_factorial(src.n_alpha as u64) + ln_factorial(src.n_beta as u64) - ln_factorial(m1 as u64) - ln_factorial(m2 as u64),
    )
}

/// Same probability from the exact-degree grid.
pub fn prob_single_quadrature(src: DoubleFock, m1: u32) -> Result<f64> {
    let n = src.total();
    require(m1 <= n, || format!("m1 = {m1} must lie in [0, N = {n}]"))?;
    let m2 = n - m1;
    let k = src.n_alpha as i64 - src.n_beta as i64;
    let integral = splitter_integral(k, m1, m2, 0);
    let scale = LogWeight::pow2(n as i64);
    Ok((single_prefactor(src, m1, m2) * scale * LogWeight::from_f64(integral)).to_f64().max(0.0))
}

/// Σ_p (−1)^p / [p!(m1−p)!(a−p)!(p+m2−a)!], skipping terms with a negative argument.
pub fn s_bracket(m1: u32, m2: u32, a: i64) -> ExactRational {
    let mut terms = Vec::new();
    for p in 0..=m1 as i64 {
        let args = vec![p, m1 as i64 - p, a - p, p + m2 as i64 - a];
        if args.iter().all(|&x| x >= 0) {
            terms.push((if p % 2 == 0 { 1 } else { -1 }, args));
        }
    }
    exact_reciprocal_factorial_sum(&terms).expect("arguments filtered to be nonnegative")
}

/// G_k = ∫∫ cos(kΛ) F(Λ,λ) for k = 2a − M, as the exact rational (m1! m2!)² S(a)² / 2^M.
pub fn fourier_coefficient_exact(m1: u32, m2: u32, k: i64) -> ExactRational {
    let m = (m1 + m2) as i64;
    if k.abs() > m || (k + m) % 2 != 0 {
        return ExactRational::zero();
    }
    let s = s_bracket(m1, m2, (k + m) / 2);
    let f = ExactRational::new((factorial_big(m1 as u64) * factorial_big(m2 as u64)).into(), BigInt::from(1))
        .expect("nonzero denominator");
    let two_m = ExactRational::new(BigInt::from(1), BigInt::from(2).pow(m as u32)).expect("nonzero denominator");
    let fs = &f * &s;
    &(&fs * &fs) * &two_m
}

/// The whole distribution over m1 = 0..=N.
pub fn dist_single(src: DoubleFock) -> Vec<f64> {
    (0..=src.total()).into_par_iter().map(|m1| prob_single(src, m1).unwrap_or(0.0)).collect()
}

/// cos[(N_α−N_β)Λ]·[cosΛ+cosλ]^{m1}[cosΛ−cosλ]^{m2}, normalized to max |value| = 1.
pub fn integrand_field(src: DoubleFock, m1: u32, grid: PeriodicGrid) -> Result<AngleField> {
    let n = src.total();
    require(m1 <= n, || format!("m1 = {m1} must lie in [0, N = {n}]"))?;
    let m2 = n - m1;
    let k = src.n_alpha as f64 - src.n_beta as f64;
    let meta = format!("m1={m1} m2={m2} n_alpha={} n_beta={}", src.n_alpha, src.n_beta);
    Ok(AngleField::from_log_terms(grid, meta, move |cap, small| {
        let (c, y) = (cap.cos(), small.cos());
        let (l0, s0) = log_pow((k * cap).cos(), 1);
        let (l1, s1) = log_pow(c + y, m1);
        let (l2, s2) = log_pow(c - y, m2);
        (l0 + l1 + l2, s0 * s1 * s2)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::{amplitude_bruteforce, network_single, phase_state_factor, DetectionRecord};
    use crate::numerics::{gauss_legendre, mean_1d};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn r_of_phi_examples() {
        assert_abs_diff_eq!((r_of_phi(0, 0, 0, 0.7) - Complex64::new(1.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
        let r2 = |phi: f64| r_of_phi(9, 23, 16, phi).norm_sqr();
        assert_abs_diff_eq!(r2(0.4), r2(0.4 + 2.0 * PI), epsilon = 1e-6 * r2(0.4));
        // maxima of |R|² on a fine grid
        let xs: Vec<f64> = (0..20000).map(|i| -PI + 2.0 * PI * i as f64 / 20000.0).collect();
        let vs: Vec<f64> = xs.iter().map(|&x| r2(x)).collect();
        let mut peaks = Vec::new();
        for i in 0..xs.len() {
            let (a, b) = (vs[(i + xs.len() - 1) % xs.len()], vs[(i + 1) % xs.len()]);
            if vs[i] > a && vs[i] >= b {
                peaks.push((xs[i], vs[i]));
            }
        }
        peaks.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        let mut top: Vec<f64> = peaks[..2].iter().map(|p| p.0).collect();
        top.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_abs_diff_eq!(top[0], PI / 2.0 - 1.12, epsilon = 0.01);
        assert_abs_diff_eq!(top[1], PI / 2.0 + 1.12, epsilon = 0.01);
        assert_abs_diff_eq!(peaks[0].1, peaks[1].1, epsilon = 1e-9 * peaks[0].1);
    }

    #[test]
    fn hom_and_single_particle() {
        assert_abs_diff_eq!(prob_single(DoubleFock::new(1, 1), 1).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(prob_single(DoubleFock::new(1, 0), 1).unwrap(), 0.5, epsilon = 1e-15);
        assert!(prob_single(DoubleFock::new(1, 1), 3).is_err());
    }

    #[test]
    fn normalization_up_to_sixty() {
        for n in [1u32, 2, 7, 20, 33, 47, 60] {
            for na in [0, n / 3, n / 2, n] {
                let total: f64 = dist_single(DoubleFock::new(na, n - na)).iter().sum();
                assert!((total - 1.0).abs() < 1e-10, "n={n} na={na} total={total}");
            }
        }
    }

    #[test]
    fn oracle_equivalence_up_to_twelve() {
        let net = network_single();
        for n in 0..=12u32 {
            for na in 0..=n {
                let src = DoubleFock::new(na, n - na);
                for m1 in 0..=n {
                    let oracle = amplitude_bruteforce(&net, src, &DetectionRecord::new(vec![m1, n - m1])).unwrap().norm_sqr();
                    assert!((prob_single(src, m1).unwrap() - oracle).abs() < 1e-10);
                    assert!((prob_single_quadrature(src, m1).unwrap() - oracle).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn phase_state_cascade_matches_oracle() {
        let net = network_single();
        for n in 0..=10u32 {
            for na in 0..=n {
                let nb = n - na;
                for m1 in 0..=n {
                    let m2 = n - m1;
                    let nodes = n as usize + 1;
                    let g = PeriodicGrid::new(nodes, 1).unwrap();
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..nodes {
                        let phi = g.node(k);
                        acc += Complex64::from_polar(1.0, -(nb as f64) * phi)
                            * phase_state_factor(net.rows[0], phi).powu(m1)
                            * phase_state_factor(net.rows[1], phi).powu(m2);
                    }
                    acc /= nodes as f64;
                    let ln_pref = ln_factorial(na as u64) + ln_factorial(nb as u64)
                        - ln_factorial(m1 as u64)
                        - ln_factorial(m2 as u64);
                    let p = acc.norm_sqr() * ln_pref.exp();
                    let oracle = amplitude_bruteforce(&net, DoubleFock::new(na, nb), &DetectionRecord::new(vec![m1, m2]))
                        .unwrap()
                        .norm_sqr();
                    assert!((p - oracle).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn classical_region_redundancy() {
        let (us, ws) = gauss_legendre(120);
        for (na, nb, m1) in [(5u32, 5u32, 3u32), (6, 4, 7), (3, 8, 2)] {
            let m2 = na + nb - m1;
            let k = na as i64 - nb as i64;
            let full = splitter_integral(k, m1, m2, 0);
            let lam_nodes = exact_nodes(na + nb, 0);
            let mut half = 0.0;
            for (u, w) in us.iter().zip(&ws) {
                let cap = u * PI / 2.0;
                let inner = mean_1d(lam_nodes, |small| {
                    let (c, y) = (cap.cos(), small.cos());
                    (k as f64 * cap).cos() * (0.5 * (c + y)).powi(m1 as i32) * (0.5 * (c - y)).powi(m2 as i32)
                });
                half += w * (PI / 2.0) * inner;
            }
            half /= 2.0 * PI;
            assert!((2.0 * half - full).abs() < 1e-12, "{na} {nb} {m1}");
        }
    }

    #[test]
    fn field_structure() {
        let src = DoubleFock::new(16, 16);
        let grid = PeriodicGrid::new(256, 2).unwrap();
        let f = integrand_field(src, 9, grid).unwrap();
        let n = f.n();
        // symmetry under Λ → −Λ and λ → −λ
        for i in 1..n {
            for j in 1..n {
                assert_abs_diff_eq!(f.get(i, j), f.get(n - i, j), epsilon = 1e-12);
                assert_abs_diff_eq!(f.get(i, j), f.get(i, n - j), epsilon = 1e-12);
            }
        }
        // negative regions away from the classical lines
        let i0 = f.index_of(0.0);
        let ipi = f.index_of(PI);
        let has_negative = (0..n).filter(|&i| i != i0 && i != ipi).any(|i| (0..n).any(|j| f.get(i, j) < -1e-3));
        assert!(has_negative);
        // sign rule on λ = 0
        let j0 = f.index_of(0.0);
        for i in 0..n {
            let v = f.get(i, j0);
            if v.abs() > 1e-300 {
                assert_eq!(v.signum(), -1.0, "m2 = 23 is odd");
            }
        }
        // stationary point along Λ = 0 at cos λ = (m1 − m2)/N
        let lam = ((9.0 - 23.0) / 32.0f64).acos();
        let j = f.index_of(lam);
        assert!(f.get(i0, j) >= f.get(i0, j - 1) && f.get(i0, j) >= f.get(i0, j + 1));
    }
}
