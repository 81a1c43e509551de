//! Partial measurements, lost particles, parity-summed patterns and the
//! population device built from two interferometers.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bell::ETA;
use crate::field::{log_pow, AngleField};
use crate::modes::{network_double, DoubleFock};
use crate::numerics::{ln_binomial, ln_factorial, mean_2d, ordered_sum, ExactRational, LogWeight, PeriodicGrid};
use crate::poposc::{fourier_coefficient_exact, po_prob_sum, po_slice, PoDistribution, PoOutcome};
use crate::single_splitter::{exact_nodes, splitter_integral};
use crate::{require, Result};

/// Probability summed over the interference outcomes (m1, m2 = M − m1).
pub fn prob_no_phase(src: DoubleFock, m: u32, m_alpha: u32, m_beta: u32) -> Result<f64> {
    let n = src.total();
    require(m + m_alpha + m_beta == n, || {
        format!("M + m_alpha + m_beta = {} must equal N = {n}", m + m_alpha + m_beta)
    })?;
    let terms = (0..=m).map(|m1| po_prob_sum(src, PoOutcome::new(m1, m - m1, m_alpha, m_beta))).collect::<Result<Vec<_>>>()?;
    Ok(ordered_sum(&terms))
}

/// C(N_α, m_α) C(N_β, m_β) / 2^N: each particle reaches its side detector with probability 1/2.
pub fn no_phase_closed_form(src: DoubleFock, m_alpha: u32, m_beta: u32) -> f64 {
    match (ln_binomial(src.n_alpha as u64, m_alpha as u64), ln_binomial(src.n_beta as u64, m_beta as u64)) {
        (Some(a), Some(b)) => (a + b - src.total() as f64 * std::f64::consts::LN_2).exp(),
        _ => 0.0,
    }
}

/// The closed form with the factor M!/(p!(N−p)!), 2p = N_α − m_α − N_β + m_β.
/// `None` when p is not a nonnegative integer below N.
pub fn no_phase_printed_form(src: DoubleFock, m: u32, m_alpha: u32, m_beta: u32) -> Option<f64> {
    let n = src.total() as i64;
    let two_p = src.n_alpha as i64 - m_alpha as i64 - src.n_beta as i64 + m_beta as i64;
    if two_p % 2 != 0 || two_p < 0 || two_p / 2 > n {
        return None;
    }
    let p = (two_p / 2) as u64;
    let ln = ln_factorial(src.n_alpha as u64) + ln_factorial(src.n_beta as u64)
        - ln_factorial(m_alpha as u64)
        - ln_factorial(m_beta as u64)
        - (n - m as i64) as f64 * std::f64::consts::LN_2
        + ln_factorial(m as u64)
        - ln_factorial(p)
        - ln_factorial(n as u64 - p);
    Some(ln.exp())
}

/// P(m1, M − m1) with the side detectors ignored, from the damped two-angle law.
pub fn prob_no_population(src: DoubleFock, m: u32, m1: u32) -> Result<f64> {
    let n = src.total();
    require(m1 <= m && m <= n, || format!("need m1 <= M <= N, got m1={m1} M={m} N={n}"))?;
    let m2 = m - m1;
    let damping = n - m;
    let k = src.n_alpha as i64 - src.n_beta as i64;
    let integral = splitter_integral(k, m1, m2, damping);
    let ln_pref = ln_factorial(src.n_alpha as u64) + ln_factorial(src.n_beta as u64)
        - ln_factorial(damping as u64)
        - ln_factorial(m1 as u64)
        - ln_factorial(m2 as u64);
    Ok((integral * ln_pref.exp()).max(0.0))
}

/// cos^{N−M}Λ · F(Λ,λ), max-abs normalized.
pub fn no_population_field(m1: u32, m: u32, n_total: u32, grid: PeriodicGrid) -> Result<AngleField> {
    require(m1 <= m && m <= n_total, || format!("need m1 <= M <= N, got m1={m1} M={m} N={n_total}"))?;
    let m2 = m - m1;
    let meta = format!("m1={m1} m2={m2} n={n_total}");
    Ok(AngleField::from_log_terms(grid, meta, move |cap, small| {
        let (c, y) = (cap.cos(), small.cos());
        let (l0, s0) = log_pow(c, n_total - m);
        let (l1, s1) = log_pow(c + y, m1);
        let (l2, s2) = log_pow(c - y, m2);
        (l0 + l1 + l2, s0 * s1 * s2)
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossModel {
    pub transmission: f64,
    pub lost_total: u32,
    pub delta_alpha: u32,
    pub delta_beta: u32,
}

impl LossModel {
    pub fn new(transmission: f64, lost_total: u32, delta_alpha: u32) -> Result<LossModel> {
        check_transmission(transmission)?;
        require(delta_alpha <= lost_total, || format!("delta_alpha = {delta_alpha} exceeds M_L = {lost_total}"))?;
        Ok(LossModel { transmission, lost_total, delta_alpha, delta_beta: lost_total - delta_alpha })
    }

    pub fn reflection(&self) -> f64 {
        1.0 - self.transmission
    }

    /// Source populations when `n_detected` particles were counted.
    pub fn sources(&self, n_detected: u32) -> DoubleFock {
        let base_alpha = n_detected / 2;
        DoubleFock::new(base_alpha + self.delta_alpha, n_detected - base_alpha + self.delta_beta)
    }
}

fn check_transmission(t: f64) -> Result<()> {
    require(t > 0.0 && t <= 1.0, || format!("transmission T = {t} must lie in (0, 1]"))
}

/// ln[T^{N−L} R^L / 2^{N−2L} / L!] for N sources and L lost particles.
fn ln_loss_factor(n: u32, lost: u32, t: f64) -> f64 {
    let r = 1.0 - t;
    let ln_r = if lost == 0 { 0.0 } else { lost as f64 * r.ln() };
    (n - lost) as f64 * t.ln() + ln_r - (n as f64 - 2.0 * lost as f64) * std::f64::consts::LN_2 - ln_factorial(lost as u64)
}

/// Fourier coefficients G_k of F, indexed k = −M..=M, smoothed `lost` times by
/// (shift + shift⁻¹)/2 (the effect of a cos^{L}Λ factor).
struct SmoothedCoefficients {
    offset: i64,
    values: Vec<ExactRational>,
}

impl SmoothedCoefficients {
    fn new(m1: u32, m2: u32) -> Self {
        let m = (m1 + m2) as i64;
        let values = (-m..=m).map(|k| fourier_coefficient_exact(m1, m2, k)).collect();
        SmoothedCoefficients { offset: m, values }
    }

    fn smooth(&mut self) {
        let len = self.values.len() + 2;
        let zero = ExactRational::zero();
        let at = |i: i64| -> &ExactRational {
            if i >= 0 && (i as usize) < self.values.len() {
                &self.values[i as usize]
            } else {
                &zero
            }
        };
        // new index j corresponds to old index j − 1
        let next = (0..len as i64).map(|j| (at(j) + at(j - 2)).half()).collect();
        self.values = next;
        self.offset += 1;
    }

    fn get(&self, k: i64) -> Option<&ExactRational> {
        let i = k + self.offset;
        (i >= 0 && (i as usize) < self.values.len()).then(|| &self.values[i as usize])
    }

    fn log_weights(&self) -> Vec<LogWeight> {
        self.values.iter().map(|v| v.to_log_weight()).collect()
    }
}

/// Loss-dressed probability at fixed sources: `out` counts the detected
/// particles, `lost` more went to the two loss channels in any split.
pub fn loss_law(src: DoubleFock, out: PoOutcome, lost: u32, transmission: f64) -> Result<f64> {
    check_transmission(transmission)?;
    require(out.total() + lost == src.total(), || {
        format!("detected {} + lost {lost} must equal N = {}", out.total(), src.total())
    })?;
    if transmission == 1.0 && lost > 0 {
        return Ok(0.0);
    }
    let mut h = SmoothedCoefficients::new(out.m1, out.m2);
    for _ in 0..lost {
        h.smooth();
    }
    let k = src.n_alpha as i64 - out.m_alpha as i64 - src.n_beta as i64 + out.m_beta as i64;
    let Some(hk) = h.get(k) else { return Ok(0.0) };
    let ln = ln_factorial(src.n_alpha as u64) + ln_factorial(src.n_beta as u64)
        - ln_factorial(out.m1 as u64)
        - ln_factorial(out.m2 as u64)
        - ln_factorial(out.m_alpha as u64)
        - ln_factorial(out.m_beta as u64)
        + ln_loss_factor(src.total(), lost, transmission);
    Ok((LogWeight::from_ln(ln) * hk.to_log_weight()).to_f64().max(0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossResult {
    /// Unnormalized slice summed over M_L and Δ_α.
    pub slice: PoDistribution,
    pub mean_lost: f64,
    /// Total weight of every M_L stratum that was evaluated.
    pub strata: Vec<(u32, f64)>,
}

/// Largest M_L the loss sum may reach.
pub fn loss_cap(n_detected: u32, transmission: f64) -> u32 {
    ((10.0 * (1.0 - transmission) * n_detected as f64).ceil() as u32).max(50)
}

/// PO slice at fixed (m1, m2) with `n_detected` counted particles, summed over
/// the unknown number of lost particles and their source of origin.
pub fn po_with_losses(n_detected: u32, m1: u32, m2: u32, transmission: f64) -> Result<LossResult> {
    check_transmission(transmission)?;
    require(m1 + m2 <= n_detected, || format!("m1 + m2 = {} exceeds detected total {n_detected}", m1 + m2))?;
    let side = n_detected - m1 - m2;
    let cap = if transmission == 1.0 { 0 } else { loss_cap(n_detected, transmission) };
    let mut h = SmoothedCoefficients::new(m1, m2);
    let mut slice = vec![0.0; side as usize + 1];
    let mut strata = Vec::new();
    let mut accumulated = 0.0;
    let ln_counts = -ln_factorial(m1 as u64) - ln_factorial(m2 as u64);
    for lost in 0..=cap {
        if lost > 0 {
            h.smooth();
        }
        let weights = h.log_weights();
        let rows: Vec<Vec<f64>> = (0..=lost)
            .into_par_iter()
            .map(|delta| {
                let src = LossModel { transmission, lost_total: lost, delta_alpha: delta, delta_beta: lost - delta }.sources(n_detected);
                let base = ln_factorial(src.n_alpha as u64) + ln_factorial(src.n_beta as u64) + ln_counts
                    + ln_loss_factor(src.total(), lost, transmission);
                (0..=side)
                    .map(|ma| {
                        let mb = side - ma;
                        let k = src.n_alpha as i64 - ma as i64 - src.n_beta as i64 + mb as i64;
                        let i = k + h.offset;
                        if i < 0 || i as usize >= weights.len() || weights[i as usize].is_zero() {
                            return 0.0;
                        }
                        let ln = base - ln_factorial(ma as u64) - ln_factorial(mb as u64);
                        (LogWeight::from_ln(ln) * weights[i as usize]).to_f64()
                    })
                    .collect()
            })
            .collect();
        let mut stratum = 0.0;
        for row in &rows {
            for (ma, v) in row.iter().enumerate() {
                slice[ma] += v;
                stratum += v;
            }
        }
        strata.push((lost, stratum));
        accumulated += stratum;
        if lost > 0 && stratum < 1e-12 * accumulated {
            break;
        }
    }
    let mean_lost = strata.iter().map(|&(l, w)| l as f64 * w).sum::<f64>() / accumulated;
    let base_alpha = n_detected / 2;
    let table = slice.into_iter().enumerate().map(|(ma, v)| (ma as u32, v)).collect();
    Ok(LossResult {
        slice: PoDistribution { m1, m2, n_alpha: base_alpha, n_beta: n_detected - base_alpha, table },
        mean_lost,
        strata,
    })
}

/// Number of strict local minima of the slice within `half_width` of `center`.
pub fn local_minima_near(slice: &PoDistribution, center: u32, half_width: u32) -> usize {
    let lo = center.saturating_sub(half_width);
    (lo..=center + half_width)
        .filter(|&m| match (m.checked_sub(1).and_then(|l| slice.value_at(l)), slice.value_at(m), slice.value_at(m + 1)) {
            (Some(l), Some(c), Some(r)) => c < l && c < r,
            _ => false,
        })
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn matches(self, m: u32) -> bool {
        (m % 2 == 1) == (self == Parity::Odd)
    }
}

/// Sum of the landscapes and PO slices over every m1 of the given parity,
/// m2 = M − m1. The landscape sum is (cos^MΛ ± cos^Mλ)/2 in half bases.
pub fn parity_selected(src: DoubleFock, m: u32, parity: Parity, grid: PeriodicGrid) -> Result<(AngleField, PoDistribution)> {
    require(m >= 1, || "M must be at least 1".to_string())?;
    require(m <= src.total(), || format!("M = {m} exceeds N = {}", src.total()))?;
    let sign = if parity == Parity::Odd { -1.0 } else { 1.0 };
    let meta = format!("M={m} parity={parity:?}");
    let field = AngleField::from_values(grid, meta, move |cap, small| {
        0.5 * (cap.cos().powi(m as i32) + sign * small.cos().powi(m as i32))
    });
    let slices = (0..=m).filter(|&m1| parity.matches(m1)).map(|m1| po_slice(src, m1, m - m1)).collect::<Result<Vec<_>>>()?;
    let side = src.total() - m;
    let table = (0..=side)
        .map(|ma| {
            let vals: Vec<f64> = slices.iter().map(|s| s.value_at(ma).unwrap_or(0.0)).collect();
            (ma, ordered_sum(&vals))
        })
        .collect();
    let first = if parity == Parity::Odd { 1 } else { 0 };
    Ok((field, PoDistribution { m1: first, m2: m - first, n_alpha: src.n_alpha, n_beta: src.n_beta, table }))
}

/// Fraction of λ nodes on the Λ = 0 line where the landscape reaches half its maximum there.
pub fn ridge_fraction(field: &AngleField) -> f64 {
    let row = field.index_of(0.0);
    let vals: Vec<f64> = (0..field.n()).map(|j| field.get(row, j)).collect();
    let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    vals.iter().filter(|&&v| v >= 0.5 * top).count() as f64 / vals.len() as f64
}

/// max |field| over |Λ| > π/4, relative to the global max |field|.
pub fn quantum_support(field: &AngleField) -> f64 {
    let nodes = field.grid.nodes();
    let mut global = 0.0f64;
    let mut quantum = 0.0f64;
    for (i, cap) in nodes.iter().enumerate() {
        for j in 0..field.n() {
            let v = field.get(i, j).abs();
            global = global.max(v);
            if cap.abs() > std::f64::consts::FRAC_PI_4 {
                quantum = quantum.max(v);
            }
        }
    }
    if global > 0.0 { quantum / global } else { 0.0 }
}

fn check_double_po(src: DoubleFock, rec: &[u32; 4], m_alpha: u32, m_beta: u32) -> Result<()> {
    let total = rec.iter().sum::<u32>() + m_alpha + m_beta;
    require(total == src.total(), || format!("counts sum to {total}, source holds N = {}", src.total()))
}

/// Two interferometers plus side detectors, from the two-angle integral with
/// half bases y_i = (cosΛ + η_i cos(λ − φ_i))/2.
pub fn po_double_interferometer(src: DoubleFock, rec: &[u32; 4], m_alpha: u32, m_beta: u32, zeta: f64, theta: f64) -> Result<f64> {
    check_double_po(src, rec, m_alpha, m_beta)?;
    let m: u32 = rec.iter().sum();
    let k = src.n_alpha as i64 - src.n_beta as i64 - m_alpha as i64 + m_beta as i64;
    let phis = [-zeta, -zeta, theta, theta];
    let integral = mean_2d(exact_nodes(m, k), |cap, small| {
        let c = cap.cos();
        let mut v = (k as f64 * cap).cos();
        for i in 0..4 {
            v *= (0.5 * (c + ETA[i] * (small - phis[i]).cos())).powi(rec[i] as i32);
        }
        v
    });
    let ln = ln_factorial(src.n_alpha as u64) + ln_factorial(src.n_beta as u64)
        - rec.iter().map(|&x| ln_factorial(x as u64)).sum::<f64>()
        - ln_factorial(m_alpha as u64)
        - ln_factorial(m_beta as u64)
        - src.total() as f64 * std::f64::consts::LN_2;
    Ok((integral * ln.exp()).max(0.0))
}

/// Same probability as a finite sum over how many α particles reach each detector.
pub fn po_double_sum(src: DoubleFock, rec: &[u32; 4], m_alpha: u32, m_beta: u32, zeta: f64, theta: f64) -> Result<f64> {
    check_double_po(src, rec, m_alpha, m_beta)?;
    require(m_alpha <= src.n_alpha && m_beta <= src.n_beta, || {
        format!("side counts ({m_alpha}, {m_beta}) exceed sources ({}, {})", src.n_alpha, src.n_beta)
    })?;
    let m: u32 = rec.iter().sum();
    let target = (src.n_alpha - m_alpha) as i64;
    let lnf: Vec<f64> = (0..=m as u64).map(ln_factorial).collect();
    let phase = Complex64::from_polar(1.0, -(zeta + theta));
    let mut sum = Complex64::new(0.0, 0.0);
    for k2 in 0..=rec[1] as i64 {
        for k3 in 0..=rec[2] as i64 {
            for k4 in 0..=rec[3] as i64 {
                let k1 = target - k2 - k3 - k4;
                if k1 < 0 || k1 > rec[0] as i64 {
                    continue;
                }
                let ks = [k1, k2, k3, k4];
                let ln_den: f64 = (0..4).map(|i| lnf[ks[i] as usize] + lnf[rec[i] as usize - ks[i] as usize]).sum();
                let sign = if (k2 + k4) % 2 == 0 { 1.0 } else { -1.0 };
                sum += phase.powi((k3 + k4) as i32) * (sign * (-ln_den).exp());
            }
        }
    }
    let ln = ln_factorial(src.n_alpha as u64) + ln_factorial(src.n_beta as u64)
        + rec.iter().map(|&x| lnf[x as usize]).sum::<f64>()
        - ln_factorial(m_alpha as u64)
        - ln_factorial(m_beta as u64)
        - (src.total() + 2 * m) as f64 * std::f64::consts::LN_2;
    Ok(sum.norm_sqr() * ln.exp())
}

/// P versus m_α for the two-interferometer device, m_β = N − M − m_α.
pub fn double_po_slice(src: DoubleFock, rec: &[u32; 4], zeta: f64, theta: f64) -> Result<PoDistribution> {
    let m: u32 = rec.iter().sum();
    require(m <= src.total(), || format!("M = {m} exceeds N = {}", src.total()))?;
    let side = src.total() - m;
    let table = (0..=side)
        .into_par_iter()
        .map(|ma| {
            let mb = side - ma;
            if ma > src.n_alpha || mb > src.n_beta {
                return Ok((ma, 0.0));
            }
            po_double_sum(src, rec, ma, mb, zeta, theta).map(|p| (ma, p))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PoDistribution { m1: rec[0], m2: rec[1], n_alpha: src.n_alpha, n_beta: src.n_beta, table })
}

/// Π_i [cosΛ + η_i cos(λ − φ_i)]^{m_i}.
pub fn double_landscape(rec: &[u32; 4], zeta: f64, theta: f64, cap: f64, small: f64) -> f64 {
    let phis = [-zeta, -zeta, theta, theta];
    let c = cap.cos();
    (0..4).map(|i| (c + ETA[i] * (small - phis[i]).cos()).powi(rec[i] as i32)).product()
}

pub fn double_landscape_field(rec: [u32; 4], zeta: f64, theta: f64, grid: PeriodicGrid) -> AngleField {
    let meta = format!("m={rec:?} zeta={zeta} theta={theta}");
    AngleField::from_values(grid, meta, move |cap, small| double_landscape(&rec, zeta, theta, cap, small))
}

/// |Π_i (u_iα + u_iβ e^{iφ})^{m_i}|² for the interferometer rows.
pub fn double_phase_weight(rec: &[u32; 4], zeta: f64, theta: f64, phi: f64) -> f64 {
    let net = network_double(zeta, theta);
    let e = Complex64::from_polar(1.0, phi);
    (0..4).map(|i| (net.rows[i].0 + net.rows[i].1 * e).powu(rec[i])).product::<Complex64>().norm_sqr()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    pub theta: f64,
    /// Relative weight of the minority phase branch.
    pub minority_weight: f64,
    /// Minority over majority classical peak height on Λ = 0.
    pub classical_ratio: f64,
    /// Largest |landscape| at |Λ| ≥ π/4 over the majority classical peak.
    pub quantum_ratio: f64,
}

fn opposite_half_ratio(xs: &[f64], vs: &[f64]) -> f64 {
    let (imax, vmax) = vs.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let left = xs[imax] < 0.0;
    let minor = xs
        .iter()
        .zip(vs)
        .filter(|(x, _)| if left { **x > 0.0 } else { **x < 0.0 })
        .map(|(_, v)| *v)
        .fold(f64::NEG_INFINITY, f64::max);
    minor / vmax
}

/// Minority-branch weight and peak heights for one setting.
pub fn scaling_point(rec: &[u32; 4], zeta: f64, theta: f64) -> ScalingPoint {
    let pi = std::f64::consts::PI;
    let lin = |n: usize, lo: f64, hi: f64| -> Vec<f64> { (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect() };
    let phis = lin(8001, -pi, pi);
    let weights: Vec<f64> = phis.par_iter().map(|&p| double_phase_weight(rec, zeta, theta, p)).collect();
    let minority_weight = opposite_half_ratio(&phis, &weights).sqrt();
    let lams = lin(2001, -pi, pi);
    let line: Vec<f64> = lams.iter().map(|&l| double_landscape(rec, zeta, theta, 0.0, l)).collect();
    let major = line.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let classical_ratio = opposite_half_ratio(&lams, &line);
    let caps = lin(601, -pi / 2.0, pi / 2.0);
    let lams_q = lin(1201, -pi, pi);
    let quantum = caps
        .par_iter()
        .filter(|c| c.abs() >= pi / 4.0)
        .map(|&c| lams_q.iter().map(|&l| double_landscape(rec, zeta, theta, c, l).abs()).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max);
    ScalingPoint { theta, minority_weight, classical_ratio, quantum_ratio: quantum / major }
}

/// Least-squares slopes of ln(classical_ratio) and ln(quantum_ratio) against ln(minority_weight).
pub fn scaling_slopes(points: &[ScalingPoint]) -> (f64, f64) {
    let x: Vec<f64> = points.iter().map(|p| p.minority_weight.ln()).collect();
    let slope = |y: Vec<f64>| {
        let n = x.len() as f64;
        let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
        sxy / sxx
    };
    (
        slope(points.iter().map(|p| p.classical_ratio.ln()).collect()),
        slope(points.iter().map(|p| p.quantum_ratio.ln()).collect()),
    )
}
