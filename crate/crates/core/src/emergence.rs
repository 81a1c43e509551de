//! Phase emergence from repeated position measurements, and the three-source
//! free-space experiment evaluated by a recurrence on the residual state.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::numerics::{ln_factorial, ordered_sum};
use crate::{require, Result};

pub const POSTERIOR_POINTS: usize = 4096;

/// Reduced positions x_i = k·r_i mod 2π, each in [−π, π).
#[derive(Debug, Clone, PartialEq)]
pub struct PositionSample {
    pub reduced_phases: Vec<f64>,
}

impl PositionSample {
    pub fn new(phases: Vec<f64>) -> Self {
        PositionSample { reduced_phases: phases.into_iter().map(wrap).collect() }
    }

    pub fn len(&self) -> usize {
        self.reduced_phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reduced_phases.is_empty()
    }
}

fn wrap(x: f64) -> f64 {
    (x + PI).rem_euclid(2.0 * PI) - PI
}

fn lambda_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| -PI + 2.0 * PI * i as f64 / n as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorProfile {
    pub grid: Vec<f64>,
    /// Max-normalized Π_i [1 + cos(x_i + λ)].
    pub values: Vec<f64>,
    pub lambda0: f64,
    pub fwhm: f64,
}

pub fn posterior_profile(sample: &PositionSample, resolution: usize) -> Result<PosteriorProfile> {
    require(!sample.is_empty(), || "position sample is empty".to_string())?;
    require(resolution >= 8, || format!("grid resolution {resolution} is below 8"))?;
    let grid = lambda_grid(resolution);
    let trig: Vec<(f64, f64)> = sample.reduced_phases.iter().map(|x| (x.cos(), x.sin())).collect();
    let logs: Vec<f64> = grid
        .par_iter()
        .map(|&l| {
            let (cl, sl) = (l.cos(), l.sin());
            // factors lie in [0, 2]; blocks of 16 cannot overflow
            trig.chunks(16)
                .map(|block| block.iter().map(|&(cx, sx)| (1.0 + cx * cl - sx * sl).max(0.0)).product::<f64>().ln())
                .sum()
        })
        .collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let values: Vec<f64> = logs.iter().map(|&v| (v - top).exp()).collect();
    let imax = argmax(&values);
    let fwhm = half_max_width(&values);
    Ok(PosteriorProfile { lambda0: grid[imax], grid, values, fwhm })
}

fn argmax(v: &[f64]) -> usize {
    v.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc }).0
}

/// Width of the contiguous region around the maximum where the periodic
/// profile stays above half of it, with linear interpolation at both edges.
pub fn half_max_width(values: &[f64]) -> f64 {
    let n = values.len();
    let step = 2.0 * PI / n as f64;
    let imax = argmax(values);
    let half = 0.5 * values[imax];
    let at = |i: isize| values[i.rem_euclid(n as isize) as usize];
    let edge = |dir: isize| -> Option<f64> {
        let mut i = imax as isize;
        for _ in 0..n {
            let next = i + dir;
            if at(next) < half {
                let frac = (at(i) - half) / (at(i) - at(next));
                return Some(((i - imax as isize).abs() as f64 + frac) * step);
            }
            i = next;
        }
        None
    };
    match (edge(-1), edge(1)) {
        (Some(l), Some(r)) => (l + r).min(2.0 * PI),
        _ => 2.0 * PI,
    }
}

/// Generator for particle `index` of run `seed`.
fn particle_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Inverse of the CDF of (1 + r cos(x + ψ))/2π on [−π, π).
fn sample_cosine_density(r: f64, psi: f64, u: f64) -> f64 {
    let cdf = |x: f64| ((x + PI) + r * ((x + psi).sin() - (psi - PI).sin())) / (2.0 * PI);
    bisect(cdf, u)
}

fn bisect<F: Fn(f64) -> f64>(cdf: F, u: f64) -> f64 {
    let (mut lo, mut hi) = (-PI, PI);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Sequential draw of m positions from the two-Fock-state law: x_1 uniform,
/// each later x_j from the conditional density given x_1..x_{j−1}.
pub fn sample_positions(m: usize, seed: u64) -> Result<PositionSample> {
    require(m >= 1, || "m must be at least 1".to_string())?;
    let grid = lambda_grid(POSTERIOR_POINTS);
    let (cs, ss): (Vec<f64>, Vec<f64>) = grid.iter().map(|l| (l.cos(), l.sin())).unzip();
    // posterior on the λ grid, rescaled to max 1 after every factor
    let mut post = vec![1.0f64; POSTERIOR_POINTS];
    let mut xs = Vec::with_capacity(m);
    for j in 0..m {
        let u: f64 = particle_rng(seed, j).gen();
        let x = if j == 0 {
            -PI + 2.0 * PI * u
        } else {
            let (mut w, mut re, mut im) = (0.0, 0.0, 0.0);
            for i in 0..POSTERIOR_POINTS {
                w += post[i];
                re += post[i] * cs[i];
                im += post[i] * ss[i];
            }
            let z = Complex64::new(re, im) / w;
            sample_cosine_density(z.norm().min(1.0), z.arg(), u)
        };
        let (cx, sx) = (x.cos(), x.sin());
        let mut top = 0.0f64;
        for i in 0..POSTERIOR_POINTS {
            // 1 + cos(x + λ)
            post[i] *= (1.0 + cx * cs[i] - sx * ss[i]).max(0.0);
            top = top.max(post[i]);
        }
        for v in &mut post {
            *v /= top;
        }
        xs.push(x);
    }
    Ok(PositionSample::new(xs))
}

/// m independent positions from a phase state with relative phase λ*.
pub fn sample_with_hidden_phase(m: usize, hidden: f64, seed: u64) -> Result<PositionSample> {
    require(m >= 1, || "m must be at least 1".to_string())?;
    let xs = (0..m).map(|j| sample_cosine_density(1.0, hidden, particle_rng(seed, j).gen())).collect();
    Ok(PositionSample::new(xs))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmergenceRun {
    pub seed: u64,
    pub lambda0: f64,
    pub fwhm: f64,
}

/// Independent runs with seeds first_seed, first_seed + 1, ...
pub fn emergence_ensemble(m: usize, runs: usize, first_seed: u64) -> Result<Vec<EmergenceRun>> {
    (0..runs as u64)
        .into_par_iter()
        .map(|r| {
            let seed = first_seed + r;
            let profile = posterior_profile(&sample_positions(m, seed)?, POSTERIOR_POINTS)?;
            Ok(EmergenceRun { seed, lambda0: profile.lambda0, fwhm: profile.fwhm })
        })
        .collect()
}

/// Kolmogorov–Smirnov distance between the sample and the uniform law on [−π, π).
pub fn ks_uniform(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().map(|&x| (wrap(x) + PI) / (2.0 * PI)).collect();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len() as f64;
    v.iter().enumerate().fold(0.0f64, |d, (i, &f)| d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n))
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
}

/// Residual state of three Fock sources with wave vectors k, −k and 0. The
/// coefficient at (a, b) multiplies the normalized Fock state |a, b, g⟩ with
/// g = remaining − a − b; `log_scale` carries the factor removed by renormalization.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeSourceState {
    pub n_per_source: u32,
    pub remaining: u32,
    pub amplitudes: Vec<Complex64>,
    pub log_scale: f64,
}

impl ThreeSourceState {
    fn idx(&self, a: u32, b: u32) -> usize {
        (a * (self.n_per_source + 1) + b) as usize
    }

    fn gamma(&self, a: u32, b: u32) -> Option<u32> {
        let g = self.remaining as i64 - a as i64 - b as i64;
        (g >= 0 && g <= self.n_per_source as i64).then_some(g as u32)
    }

    /// Coefficient of |a, b, g⟩, zero outside the allowed triangle.
    pub fn coefficient(&self, a: u32, b: u32) -> Complex64 {
        if a > self.n_per_source || b > self.n_per_source || self.gamma(a, b).is_none() {
            return Complex64::new(0.0, 0.0);
        }
        self.amplitudes[self.idx(a, b)]
    }

    pub fn norm_sqr(&self) -> f64 {
        ordered_sum(&self.amplitudes.iter().map(|c| c.norm_sqr()).collect::<Vec<_>>())
    }

    pub fn scaled(&self, c: Complex64) -> ThreeSourceState {
        let mut out = self.clone();
        for v in &mut out.amplitudes {
            *v *= c;
        }
        out
    }

    /// Unit norm, with the removed factor added to `log_scale`.
    pub fn normalized(&self) -> ThreeSourceState {
        let norm = self.norm_sqr().sqrt();
        let mut out = self.scaled(Complex64::new(1.0 / norm, 0.0));
        out.log_scale += norm.ln();
        out
    }

    /// The three annihilation images a_α ψ, a_β ψ, a_γ ψ on the (remaining − 1) table.
    fn lowered(&self) -> [Vec<Complex64>; 3] {
        let n = self.n_per_source;
        let size = ((n + 1) * (n + 1)) as usize;
        let mut out = [vec![Complex64::new(0.0, 0.0); size], vec![Complex64::new(0.0, 0.0); size], vec![Complex64::new(0.0, 0.0); size]];
        let below = self.remaining - 1;
        for a in 0..=n {
            for b in 0..=n {
                let g = below as i64 - a as i64 - b as i64;
                if g < 0 || g > n as i64 {
                    continue;
                }
                let i = self.idx(a, b);
                if a < n {
                    out[0][i] = ((a + 1) as f64).sqrt() * self.coefficient(a + 1, b);
                }
                if b < n {
                    out[1][i] = ((b + 1) as f64).sqrt() * self.coefficient(a, b + 1);
                }
                if g < n as i64 {
                    out[2][i] = ((g + 1) as f64).sqrt() * self.amplitudes[i];
                }
            }
        }
        out
    }
}

pub fn three_source_init(n: u32) -> Result<ThreeSourceState> {
    require(n >= 1, || "n must be at least 1".to_string())?;
    let size = ((n + 1) * (n + 1)) as usize;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); size];
    amplitudes[(n * (n + 1) + n) as usize] = Complex64::new(1.0, 0.0);
    Ok(ThreeSourceState { n_per_source: n, remaining: 3 * n, amplitudes, log_scale: 0.0 })
}

/// Applies (e^{ix} a_α + e^{−ix} a_β + a_γ) without renormalizing.
pub fn three_detect(state: &ThreeSourceState, x: f64) -> Result<ThreeSourceState> {
    require(state.remaining >= 1, || "no particle left to detect".to_string())?;
    let [pa, pb, pg] = state.lowered();
    let (ep, em) = (Complex64::from_polar(1.0, x), Complex64::from_polar(1.0, -x));
    let amplitudes = (0..pa.len()).map(|i| ep * pa[i] + em * pb[i] + pg[i]).collect();
    Ok(ThreeSourceState { remaining: state.remaining - 1, amplitudes, ..state.clone() })
}

fn vdot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Post-detection norm² as a function of x: s + 2Re(ab e^{2ix} + ag e^{ix} + bg e^{−ix}).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionLikelihood {
    pub s: f64,
    pub ab: Complex64,
    pub ag: Complex64,
    pub bg: Complex64,
}

impl DetectionLikelihood {
    pub fn of(state: &ThreeSourceState) -> Result<Self> {
        require(state.remaining >= 1, || "no particle left to detect".to_string())?;
        let [pa, pb, pg] = state.lowered();
        Ok(DetectionLikelihood {
            s: vdot(&pa, &pa).re + vdot(&pb, &pb).re + vdot(&pg, &pg).re,
            ab: vdot(&pb, &pa),
            ag: vdot(&pg, &pa),
            bg: vdot(&pg, &pb),
        })
    }

    pub fn at(&self, x: f64) -> f64 {
        let e = |k: f64| Complex64::from_polar(1.0, k * x);
        self.s + 2.0 * (self.ab * e(2.0) + self.ag * e(1.0) + self.bg * e(-1.0)).re
    }

    /// Probability that the detection lands in [−π, x].
    pub fn cdf(&self, x: f64) -> f64 {
        // ∫ e^{ikt} dt from −π to x = (e^{ikx} − e^{−ikπ}) / (ik)
        let prim = |k: f64| (Complex64::from_polar(1.0, k * x) - Complex64::from_polar(1.0, -k * PI)) / Complex64::new(0.0, k);
        let v = self.s * (x + PI) + 2.0 * (self.ab * prim(2.0) + self.ag * prim(1.0) + self.bg * prim(-1.0)).re;
        v / (2.0 * PI * self.s)
    }
}

/// Detects m particles one after the other, each position drawn from its
/// conditional law, and returns the residual state with the positions.
pub fn three_run(n: u32, m: u32, seed: u64) -> Result<(ThreeSourceState, PositionSample)> {
    require(m <= 3 * n, || format!("m_interfere = {m} exceeds 3n = {}", 3 * n))?;
    let mut state = three_source_init(n)?;
    let mut xs = Vec::with_capacity(m as usize);
    for j in 0..m as usize {
        let like = DetectionLikelihood::of(&state)?;
        let u: f64 = particle_rng(seed, j).gen();
        let x = bisect(|t| like.cdf(t), u);
        state = three_detect(&state, x)?.normalized();
        xs.push(x);
    }
    Ok((state, PositionSample { reduced_phases: xs }))
}

/// Joint probability of the side counts (m_α, m_β); m_γ = remaining − m_α − m_β.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationMap {
    pub n_per_source: u32,
    pub side_total: u32,
    /// Row-major in m_α, (n + 1)² entries, zero outside the allowed triangle.
    pub probs: Vec<f64>,
}

impl PopulationMap {
    pub fn get(&self, m_alpha: u32, m_beta: u32) -> f64 {
        if m_alpha > self.n_per_source || m_beta > self.n_per_source {
            return 0.0;
        }
        self.probs[(m_alpha * (self.n_per_source + 1) + m_beta) as usize]
    }

    pub fn allowed(&self, m_alpha: i64, m_beta: i64) -> bool {
        let n = self.n_per_source as i64;
        let g = self.side_total as i64 - m_alpha - m_beta;
        (0..=n).contains(&m_alpha) && (0..=n).contains(&m_beta) && (0..=n).contains(&g)
    }

    /// Σ P(p)P(p+d) over allowed pairs, over the mean of Σ P(p)² and Σ P(p+d)².
    pub fn lag_correlation(&self, d: (i64, i64)) -> f64 {
        let n = self.n_per_source as i64;
        let (mut num, mut den) = (0.0, 0.0);
        for a in 0..=n {
            for b in 0..=n {
                let (a2, b2) = (a + d.0, b + d.1);
                if self.allowed(a, b) && self.allowed(a2, b2) {
                    let (p, q) = (self.get(a as u32, b as u32), self.get(a2 as u32, b2 as u32));
                    num += p * q;
                    den += 0.5 * (p * p + q * q);
                }
            }
        }
        if den > 0.0 { num / den } else { 0.0 }
    }
}

pub fn three_population_map(n: u32, m_interfere: u32, seed: u64) -> Result<PopulationMap> {
    let (state, _) = three_run(n, m_interfere, seed)?;
    let total = state.norm_sqr();
    let probs = state.amplitudes.iter().map(|c| c.norm_sqr() / total).collect();
    Ok(PopulationMap { n_per_source: n, side_total: state.remaining, probs })
}

pub const THREE_ORACLE_CAP: u32 = 3;

/// |⟨m_α, m_β, m_γ| Π_i (e^{ix_i}a_α + e^{−ix_i}a_β + a_γ) |n, n, n⟩|² from the
/// phase-state integral over the two source phases.
pub fn three_prob_integral(n: u32, sample: &PositionSample, m_alpha: u32, m_beta: u32) -> Result<f64> {
    require(n >= 1 && n <= THREE_ORACLE_CAP, || format!("n = {n} outside the oracle range 1..={THREE_ORACLE_CAP}"))?;
    let m = sample.len() as u32;
    require(m <= 3 * n, || format!("{m} detections exceed 3n = {}", 3 * n))?;
    let side = 3 * n - m;
    require(m_alpha + m_beta <= side, || format!("m_alpha + m_beta = {} exceeds 3n − M = {side}", m_alpha + m_beta))?;
    let m_gamma = side - m_alpha - m_beta;
    if m_alpha > n || m_beta > n || m_gamma > n {
        return Ok(0.0);
    }
    let nodes = (2 * (n + m) + 2) as usize;
    let t: Vec<f64> = (0..nodes).map(|i| 2.0 * PI * i as f64 / nodes as f64).collect();
    let integral: Complex64 = t
        .par_iter()
        .map(|&pa| {
            t.iter()
                .map(|&pb| {
                    let mut v = Complex64::from_polar(1.0, (m_alpha as f64 - n as f64) * pa + (m_beta as f64 - n as f64) * pb);
                    for &x in &sample.reduced_phases {
                        v *= 1.0 + Complex64::from_polar(1.0, x + pa) + Complex64::from_polar(1.0, pb - x);
                    }
                    v
                })
                .sum::<Complex64>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum::<Complex64>()
        / (nodes * nodes) as f64;
    let ln = 3.0 * ln_factorial(n as u64) - ln_factorial(m_alpha as u64) - ln_factorial(m_beta as u64) - ln_factorial(m_gamma as u64);
    Ok(integral.norm_sqr() * ln.exp())
}
