//! Beam-splitter networks, phase-state factors and the brute-force amplitude oracle.

use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::ln_factorial;

pub const DEFAULT_ORACLE_CAP: u32 = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModesError {
    #[error("record counts sum to {got}, source holds {expected}")]
    CountMismatch { got: u32, expected: u32 },
    #[error("record has {got} channels, network has {expected}")]
    ChannelMismatch { got: usize, expected: usize },
    #[error("N = {n} exceeds oracle cap {cap}")]
    OracleCap { n: u32, cap: u32 },
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Projection of each detector mode onto the two source modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeNetwork {
    pub rows: Vec<(Complex64, Complex64)>,
    pub labels: Vec<String>,
}

impl ModeNetwork {
    pub fn new(rows: Vec<(Complex64, Complex64)>, labels: Vec<String>) -> Self {
        assert_eq!(rows.len(), labels.len());
        ModeNetwork { rows, labels }
    }

    fn labelled(rows: Vec<(Complex64, Complex64)>) -> Self {
        let labels = (1..=rows.len()).map(|i| format!("a{i}")).collect();
        ModeNetwork { rows, labels }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// (Σ|v_α|², Σ|v_β|², Σ v_α* v_β).
    pub fn isometry_sums(&self) -> (f64, f64, Complex64) {
        let mut na = 0.0;
        let mut nb = 0.0;
        let mut cross = Complex64::new(0.0, 0.0);
        for (a, b) in &self.rows {
            na += a.norm_sqr();
            nb += b.norm_sqr();
            cross += a.conj() * b;
        }
        (na, nb, cross)
    }

    /// Scales every row by √T and appends one loss channel per source with amplitude √(1−T).
    pub fn with_source_loss(&self, transmission: f64) -> ModeNetwork {
        let t = transmission.sqrt();
        let r = (1.0 - transmission).max(0.0).sqrt();
        let mut rows: Vec<_> = self.rows.iter().map(|(a, b)| (a * t, b * t)).collect();
        let mut labels = self.labels.clone();
        rows.push((c(r, 0.0), c(0.0, 0.0)));
        rows.push((c(0.0, 0.0), c(r, 0.0)));
        labels.push("lost_alpha".into());
        labels.push("lost_beta".into());
        ModeNetwork { rows, labels }
    }
}

/// Two Fock sources |N_α, N_β⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DoubleFock {
    pub n_alpha: u32,
    pub n_beta: u32,
}

impl DoubleFock {
    pub fn new(n_alpha: u32, n_beta: u32) -> Self {
        DoubleFock { n_alpha, n_beta }
    }

    pub fn total(&self) -> u32 {
        self.n_alpha + self.n_beta
    }

    pub fn swapped(&self) -> Self {
        DoubleFock { n_alpha: self.n_beta, n_beta: self.n_alpha }
    }
}

/// Counts per detector channel, aligned with the network rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectionRecord {
    pub counts: Vec<u32>,
}

impl DetectionRecord {
    pub fn new(counts: Vec<u32>) -> Self {
        DetectionRecord { counts }
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }
}

/// 50/50 splitter: a1 = (a_α + i a_β)/√2, a2 = (i a_α + a_β)/√2.
pub fn network_single() -> ModeNetwork {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ModeNetwork::labelled(vec![(c(s, 0.0), c(0.0, s)), (c(0.0, s), c(s, 0.0))])
}

/// Two interferometers sharing both sources, phase ζ on the α arm of the first
/// and θ on the β arm of the second.
pub fn network_double(zeta: f64, theta: f64) -> ModeNetwork {
    let ez = Complex64::from_polar(1.0, zeta);
    let et = Complex64::from_polar(1.0, theta);
    let i = c(0.0, 1.0);
    ModeNetwork::labelled(vec![
        (i * ez * 0.5, i * 0.5),
        (-ez * 0.5, c(0.5, 0.0)),
        (i * 0.5, i * et * 0.5),
        (c(0.5, 0.0), -et * 0.5),
    ])
}

/// Central splitter fed by half of each source; the other halves go to side detectors.
pub fn network_po() -> ModeNetwork {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ModeNetwork::labelled(vec![
        (c(0.5, 0.0), c(0.0, 0.5)),
        (c(0.0, 0.5), c(0.5, 0.0)),
        (c(s, 0.0), c(0.0, 0.0)),
        (c(0.0, 0.0), c(s, 0.0)),
    ])
}

/// Double interferometer with side detectors: the four interferometer rows
/// carry 1/√2 of each source, rows 5 and 6 are the side detectors.
pub fn network_double_po(zeta: f64, theta: f64) -> ModeNetwork {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut rows: Vec<_> = network_double(zeta, theta).rows.into_iter().map(|(a, b)| (a * s, b * s)).collect();
    rows.push((c(s, 0.0), c(0.0, 0.0)));
    rows.push((c(0.0, 0.0), c(s, 0.0)));
    ModeNetwork::labelled(rows)
}

/// Reduced phase-state factor v_α + v_β e^{iφ}.
pub fn phase_state_factor(row: (Complex64, Complex64), phi: f64) -> Complex64 {
    row.0 + row.1 * Complex64::from_polar(1.0, phi)
}

pub fn amplitude_bruteforce(net: &ModeNetwork, src: DoubleFock, rec: &DetectionRecord) -> Result<Complex64, ModesError> {
    amplitude_bruteforce_capped(net, src, rec, DEFAULT_ORACLE_CAP)
}

/// ⟨0| Π a_i^{m_i} / √(Π m_i!) |N_α, N_β⟩ by expanding every a_i^{m_i} binomially
/// over the two sources and keeping the terms that take exactly N_α from α.
pub fn amplitude_bruteforce_capped(
    net: &ModeNetwork,
    src: DoubleFock,
    rec: &DetectionRecord,
    cap: u32,
) -> Result<Complex64, ModesError> {
    if rec.counts.len() != net.len() {
        return Err(ModesError::ChannelMismatch { got: rec.counts.len(), expected: net.len() });
    }
    let n = src.total();
    if rec.total() != n {
        return Err(ModesError::CountMismatch { got: rec.total(), expected: n });
    }
    if n > cap {
        return Err(ModesError::OracleCap { n, cap });
    }
    let na = src.n_alpha as usize;
    // poly[k] = coefficient of a_α^k a_β^(used-k) after the channels seen so far
    let mut poly = vec![Complex64::new(0.0, 0.0); na + 1];
    poly[0] = Complex64::new(1.0, 0.0);
    for ((va, vb), &m) in net.rows.iter().zip(&rec.counts) {
        let m = m as usize;
        let mut terms = Vec::with_capacity(m + 1);
        for k in 0..=m {
            let binom = (ln_factorial(m as u64) - ln_factorial(k as u64) - ln_factorial((m - k) as u64)).exp().round();
            terms.push(va.powu(k as u32) * vb.powu((m - k) as u32) * binom);
        }
        let mut next = vec![Complex64::new(0.0, 0.0); na + 1];
        for (j, pj) in poly.iter().enumerate() {
            if *pj == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (k, tk) in terms.iter().enumerate() {
                if j + k <= na {
                    next[j + k] += pj * tk;
                }
            }
        }
        poly = next;
    }
    let ln_norm = 0.5 * (ln_factorial(src.n_alpha as u64) + ln_factorial(src.n_beta as u64))
        - 0.5 * rec.counts.iter().map(|&m| ln_factorial(m as u64)).sum::<f64>();
    Ok(poly[na] * ln_norm.exp())
}

/// All compositions of `total` into `parts` nonnegative counts, lexicographic.
pub fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; parts];
    fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for m in 0..=left {
            cur[pos] = m;
            rec(pos + 1, left - m, cur, out);
        }
    }
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(0, total, &mut cur, &mut out);
    out
}
