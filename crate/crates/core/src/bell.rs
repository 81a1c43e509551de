//! Double interferometer on two Fock sources: outcome laws, parity
//! correlators and the BCHSH combination.

use rayon::prelude::*;

use crate::field::{log_pow, AngleField};
use crate::modes::{compositions, DoubleFock};
use crate::numerics::{ln_factorial, maximize_scalar, mean_1d, ordered_sum, PeriodicGrid};
use crate::{require, Result};

pub const ETA: [f64; 4] = [1.0, -1.0, 1.0, -1.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellSettings {
    pub zeta: f64,
    pub theta: f64,
    pub n_total: u32,
    pub m_measured: u32,
}

impl BellSettings {
    pub fn new(zeta: f64, theta: f64, n_total: u32, m_measured: u32) -> Self {
        BellSettings { zeta, theta, n_total, m_measured }
    }

    /// Settings with M = N and E evaluated at φ_a − φ_b = ξ.
    pub fn at_xi(n_total: u32, m_measured: u32, xi: f64) -> Self {
        BellSettings { zeta: 2.0 * xi, theta: 0.0, n_total, m_measured }
    }

    fn phis(&self) -> [f64; 4] {
        [-self.zeta, -self.zeta, self.theta, self.theta]
    }

    fn check(&self) -> Result<()> {
        require(self.m_measured <= self.n_total, || {
            format!("M = {} must not exceed N = {}", self.m_measured, self.n_total)
        })?;
        require(self.n_total % 2 == 0, || format!("N = {} must be even (N_alpha = N_beta = N/2)", self.n_total))
    }
}

/// Per-node tables: damping c^{N−M} and y_i^k/k! (signed for the parity sum)
/// with half bases y_i = (cosΛ + η_i cos(λ − φ_i))/2.
struct NodeTables {
    damp: Vec<f64>,
    fourier: Vec<f64>,
    pw: Vec<[Vec<f64>; 4]>,
}

impl NodeTables {
    fn build(phis: [f64; 4], m: u32, damping: u32, k: i64, parity_signs: bool) -> NodeTables {
        let n = crate::single_splitter::exact_nodes(m + damping, k);
        let grid = PeriodicGrid { points_per_axis: n, axis_count: 2 };
        let nodes = grid.nodes();
        let lnf: Vec<f64> = (0..=m as u64).map(ln_factorial).collect();
        let mut damp = Vec::with_capacity(n * n);
        let mut fourier = Vec::with_capacity(n * n);
        let mut pw = Vec::with_capacity(n * n);
        for &cap in &nodes {
            let c = cap.cos();
            for &small in &nodes {
                damp.push(c.powi(damping as i32));
                fourier.push((k as f64 * cap).cos());
                let tables = std::array::from_fn(|i| {
                    let sign = if parity_signs && ETA[i] < 0.0 { -1.0 } else { 1.0 };
                    let y = sign * 0.5 * (c + ETA[i] * (small - phis[i]).cos());
                    let mut t = Vec::with_capacity(m as usize + 1);
                    let mut p = 1.0;
                    for kk in 0..=m as usize {
                        t.push(p * (-lnf[kk]).exp());
                        p *= y;
                    }
                    t
                });
                pw.push(tables);
            }
        }
        NodeTables { damp, fourier, pw }
    }

    fn len(&self) -> usize {
        self.damp.len()
    }

    /// Node mean of cos(kΛ) c^{N−M} Π y_i^{m_i}/m_i!.
    fn record_mean(&self, rec: &[u32]) -> f64 {
        let mut s = 0.0;
        for idx in 0..self.len() {
            let t = &self.pw[idx];
            s += self.fourier[idx]
                * self.damp[idx]
                * t[0][rec[0] as usize]
                * t[1][rec[1] as usize]
                * t[2][rec[2] as usize]
                * t[3][rec[3] as usize];
        }
        s / self.len() as f64
    }
}

fn check_record(rec: &[u32; 4], m: u32) -> Result<()> {
    let total: u32 = rec.iter().sum();
    require(total == m, || format!("record counts sum to {total}, expected M = {m}"))
}

/// ln of 2^{N−M} M! ((N/2)!)² / N!, the record-independent part of the law.
fn ln_bell_prefactor(n: u32, m: u32) -> f64 {
    (n - m) as f64 * std::f64::consts::LN_2 + ln_factorial(m as u64) + 2.0 * ln_factorial(n as u64 / 2)
        - ln_factorial(n as u64)
}

/// Probability of (m1..m4) when M of the N = 2·(N/2) particles are detected.
pub fn prob_bell(settings: BellSettings, rec: &[u32; 4]) -> Result<f64> {
    settings.check()?;
    check_record(rec, settings.m_measured)?;
    let tables = NodeTables::build(settings.phis(), settings.m_measured, settings.n_total - settings.m_measured, 0, false);
    let v = tables.record_mean(rec) * ln_bell_prefactor(settings.n_total, settings.m_measured).exp();
    Ok(v.max(0.0))
}

/// All-particles-detected law for an arbitrary source split.
pub fn prob_double_full(src: DoubleFock, zeta: f64, theta: f64, rec: &[u32; 4]) -> Result<f64> {
    check_record(rec, src.total())?;
    let k = src.n_alpha as i64 - src.n_beta as i64;
    let tables = NodeTables::build([-zeta, -zeta, theta, theta], src.total(), 0, k, false);
    let ln_pref = ln_factorial(src.n_alpha as u64) + ln_factorial(src.n_beta as u64);
    Ok((tables.record_mean(rec) * ln_pref.exp()).max(0.0))
}

/// Every record with Σ m_i = M, lexicographic in (m1, m2, m3, m4).
pub fn records(m: u32) -> Vec<[u32; 4]> {
    compositions(m, 4).into_iter().map(|v| [v[0], v[1], v[2], v[3]]).collect()
}

/// Full outcome table in record order.
pub fn distribution(settings: BellSettings) -> Result<Vec<([u32; 4], f64)>> {
    settings.check()?;
    let tables = NodeTables::build(settings.phis(), settings.m_measured, settings.n_total - settings.m_measured, 0, false);
    let pref = ln_bell_prefactor(settings.n_total, settings.m_measured).exp();
    let recs = records(settings.m_measured);
    Ok(recs.par_iter().map(|r| (*r, (tables.record_mean(r) * pref).max(0.0))).collect())
}

/// ⟨AB⟩ = Σ_rec (−1)^{m2+m4} P(rec), summed over records in lexicographic order.
pub fn correlator(settings: BellSettings) -> Result<f64> {
    settings.check()?;
    let tables = NodeTables::build(settings.phis(), settings.m_measured, settings.n_total - settings.m_measured, 0, true);
    let pref = ln_bell_prefactor(settings.n_total, settings.m_measured).exp();
    let recs = records(settings.m_measured);
    let terms: Vec<f64> = recs.par_iter().map(|r| tables.record_mean(r) * pref).collect();
    Ok(ordered_sum(&terms))
}

/// Correlator of the Λ = 0 (classical) reduction, closed form.
pub fn correlator_classical(m: u32, zeta: f64, theta: f64) -> Result<f64> {
    require(m % 2 == 0, || format!("M = {m} must be even"))?;
    let c = (ln_factorial(m as u64) - 2.0 * ln_factorial(m as u64 / 2) - m as f64 * std::f64::consts::LN_2).exp();
    Ok(c * (0.5 * (zeta + theta)).cos().powi(m as i32))
}

/// Same correlator, summed record by record over the classical law
/// M!/(4^M Π m_i!) ⟨Π (1 + η_i cos(λ − φ_i))^{m_i}⟩_λ.
pub fn correlator_classical_sum(m: u32, zeta: f64, theta: f64) -> f64 {
    let phis = [-zeta, -zeta, theta, theta];
    let nodes = m as usize + 1;
    let terms: Vec<f64> = records(m)
        .iter()
        .map(|r| {
            let sign = if (r[1] + r[3]) % 2 == 0 { 1.0 } else { -1.0 };
            let ln_w = ln_factorial(m as u64)
                - r.iter().map(|&x| ln_factorial(x as u64)).sum::<f64>()
                - m as f64 * std::f64::consts::LN_2;
            let avg = mean_1d(nodes, |small| {
                (0..4).map(|i| (0.5 * (1.0 + ETA[i] * (small - phis[i]).cos())).powi(r[i] as i32)).product::<f64>()
            });
            sign * ln_w.exp() * avg
        })
        .collect();
    ordered_sum(&terms)
}

/// Q = 3 cos^n ξ − cos^n 3ξ.
pub fn chsh_q(n: u32, xi: f64) -> f64 {
    3.0 * xi.cos().powi(n as i32) - (3.0 * xi).cos().powi(n as i32)
}

/// Q = 3E(ξ) − E(3ξ) with E from the record-sum correlator at M detected.
pub fn chsh_q_measured(n: u32, m: u32, xi: f64) -> Result<f64> {
    let e1 = correlator(BellSettings::at_xi(n, m, xi))?;
    let e3 = correlator(BellSettings::at_xi(n, m, 3.0 * xi))?;
    Ok(3.0 * e1 - e3)
}

pub fn maximize_chsh(n: u32) -> Result<(f64, f64)> {
    Ok(maximize_scalar(|xi| chsh_q(n, xi), 0.0, std::f64::consts::FRAC_PI_2, 1e-8)?)
}

/// E(a,b) + E(a,b′) + E(a′,b) − E(a′,b′) for Alice angles ζ, ζ′ and Bob angles θ, θ′.
pub fn chsh_combination<E: Fn(f64, f64) -> f64>(e: E, zeta: f64, zeta2: f64, theta: f64, theta2: f64) -> f64 {
    e(zeta, theta) + e(zeta, theta2) + e(zeta2, theta) - e(zeta2, theta2)
}

/// (L_qu, L_cl) at one point: Σ over records with Σ m_i = 2 of Π x_i^{m_i}/m_i!,
/// x_i = cosΛ + η_i cos(λ − φ_i), and its Λ = 0 counterpart.
pub fn diagnostic_point(m_total: u32, zeta: f64, theta: f64, cap: f64, small: f64) -> Result<(f64, f64)> {
    require(m_total == 2, || format!("the diagnostic is defined for M = 2, got {m_total}"))?;
    let phis = [-zeta, -zeta, theta, theta];
    let eval = |c: f64| {
        let terms: Vec<f64> = records(2)
            .iter()
            .map(|r| {
                (0..4)
                    .map(|i| {
                        let x = c + ETA[i] * (small - phis[i]).cos();
                        x.powi(r[i] as i32) / if r[i] == 2 { 2.0 } else { 1.0 }
                    })
                    .product()
            })
            .collect();
        ordered_sum(&terms)
    };
    Ok((eval(cap.cos()), eval(1.0)))
}

/// L_qu over the (Λ, λ) grid and L_cl over the λ nodes.
pub fn normalization_diagnostic(m_total: u32, zeta: f64, theta: f64, grid: PeriodicGrid) -> Result<(AngleField, Vec<f64>)> {
    diagnostic_point(m_total, zeta, theta, 0.0, 0.0)?;
    let qu = AngleField::raw(grid, format!("L_qu zeta={zeta} theta={theta}"), |cap, small| {
        diagnostic_point(2, zeta, theta, cap, small).map(|v| v.0).unwrap_or(f64::NAN)
    });
    let cl = grid
        .nodes()
        .iter()
        .map(|&small| diagnostic_point(2, zeta, theta, 0.0, small).map(|v| v.1).unwrap_or(f64::NAN))
        .collect();
    Ok((qu, cl))
}

/// cos^{N−M}Λ Π (cosΛ + η_i cos(λ − φ_i))^{m_i}, max-abs normalized.
pub fn bell_integrand_field(settings: BellSettings, rec: &[u32; 4], grid: PeriodicGrid) -> Result<AngleField> {
    settings.check()?;
    check_record(rec, settings.m_measured)?;
    let phis = settings.phis();
    let damping = settings.n_total - settings.m_measured;
    let rec = *rec;
    let meta = format!("m={:?} zeta={} theta={} N={}", rec, settings.zeta, settings.theta, settings.n_total);
    Ok(AngleField::from_log_terms(grid, meta, move |cap, small| {
        let c = cap.cos();
        let (mut l, mut s) = log_pow(c, damping);
        for i in 0..4 {
            let (li, si) = log_pow(c + ETA[i] * (small - phis[i]).cos(), rec[i]);
            l += li;
            s *= si;
        }
        (l, s)
    }))
}
