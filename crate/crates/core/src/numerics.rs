//! Numerical kernels shared by every experiment: log-space factorials,
//! exact rational sums, exact periodic quadrature and a 1-D maximizer.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("degree bound must be nonnegative, got {0}")]
    NegativeDegree(i64),
    #[error("factorial argument must be nonnegative, got {0}")]
    NegativeFactorialArgument(i64),
    #[error("interval requires lo < hi and tol > 0 (lo={lo}, hi={hi}, tol={tol})")]
    InvalidInterval { lo: f64, hi: f64, tol: f64 },
    #[error("denominator must be nonzero")]
    ZeroDenominator,
    #[error("grid needs at least one point and one or two axes")]
    InvalidGrid,
}

const TABLE_LEN: usize = 2049;

/// Neumaier-compensated running sum. Order of `add` calls fixes the result.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sums a slice in index order with compensation.
pub fn ordered_sum(xs: &[f64]) -> f64 {
    let mut s = CompensatedSum::new();
    for &x in xs {
        s.add(x);
    }
    s.value()
}

fn ln_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(TABLE_LEN);
        let mut acc = CompensatedSum::new();
        t.push(0.0);
        for k in 1..TABLE_LEN {
            acc.add((k as f64).ln());
            t.push(acc.value());
        }
        t
    })
}

/// ln(n!). Table lookup up to 2048, Stirling series above.
pub fn ln_factorial(n: u64) -> f64 {
    if (n as usize) < TABLE_LEN {
        return ln_factorial_table()[n as usize];
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    x * x.ln() - x + 0.5 * (2.0 * PI * x).ln() + series
}

/// ln C(n, k); `None` when k > n.
pub fn ln_binomial(n: u64, k: u64) -> Option<f64> {
    if k > n {
        return None;
    }
    Some(ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k))
}

/// A signed magnitude stored as (ln|x|, sign).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogWeight {
    pub value: f64,
    pub sign: i8,
}

impl LogWeight {
    pub const ZERO: LogWeight = LogWeight { value: f64::NEG_INFINITY, sign: 0 };
    pub const ONE: LogWeight = LogWeight { value: 0.0, sign: 1 };

    pub fn from_ln(value: f64) -> Self {
        LogWeight { value, sign: 1 }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            LogWeight { value: x.abs().ln(), sign: if x > 0.0 { 1 } else { -1 } }
        }
    }

    pub fn factorial(n: u64) -> Self {
        Self::from_ln(ln_factorial(n))
    }

    pub fn pow2(e: i64) -> Self {
        Self::from_ln(e as f64 * std::f64::consts::LN_2)
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn recip(self) -> Self {
        assert!(self.sign != 0, "reciprocal of zero weight");
        LogWeight { value: -self.value, sign: self.sign }
    }

    pub fn to_f64(self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            self.sign as f64 * self.value.exp()
        }
    }
}

impl Mul for LogWeight {
    type Output = LogWeight;
    fn mul(self, rhs: LogWeight) -> LogWeight {
        if self.sign == 0 || rhs.sign == 0 {
            return LogWeight::ZERO;
        }
        LogWeight { value: self.value + rhs.value, sign: self.sign * rhs.sign }
    }
}

pub(crate) fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Exact rational in lowest terms with a positive denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactRational(BigRational);

impl ExactRational {
    pub fn new(numerator: BigInt, denominator: BigInt) -> Result<Self, NumericsError> {
        if denominator.is_zero() {
            return Err(NumericsError::ZeroDenominator);
        }
        Ok(ExactRational(BigRational::new(numerator, denominator)))
    }

    pub fn from_integer(n: i64) -> Self {
        ExactRational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        ExactRational(BigRational::zero())
    }

    pub fn numerator(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denominator(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn half(&self) -> Self {
        ExactRational(&self.0 / BigInt::from(2))
    }

    pub fn to_log_weight(&self) -> LogWeight {
        if self.0.is_zero() {
            return LogWeight::ZERO;
        }
        let n = self.0.numer();
        let sign = if n.sign() == Sign::Minus { -1 } else { 1 };
        let value = ln_biguint(n.magnitude()) - ln_biguint(self.0.denom().magnitude());
        LogWeight { value, sign }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_log_weight().to_f64()
    }
}

impl Add for &ExactRational {
    type Output = ExactRational;
    fn add(self, rhs: &ExactRational) -> ExactRational {
        ExactRational(&self.0 + &rhs.0)
    }
}

impl Sub for &ExactRational {
    type Output = ExactRational;
    fn sub(self, rhs: &ExactRational) -> ExactRational {
        ExactRational(&self.0 - &rhs.0)
    }
}

impl Mul for &ExactRational {
    type Output = ExactRational;
    fn mul(self, rhs: &ExactRational) -> ExactRational {
        ExactRational(&self.0 * &rhs.0)
    }
}

impl Neg for ExactRational {
    type Output = ExactRational;
    fn neg(self) -> ExactRational {
        ExactRational(-self.0)
    }
}

impl std::fmt::Display for ExactRational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Σ sign / Π(arg!) exactly, over a shared denominator Π_pos (max arg at pos)!.
/// Shorter argument lists are padded with zeros.
pub fn exact_reciprocal_factorial_sum(terms: &[(i32, Vec<i64>)]) -> Result<ExactRational, NumericsError> {
    let width = terms.iter().map(|(_, a)| a.len()).max().unwrap_or(0);
    let mut maxima = vec![0u64; width];
    for (_, args) in terms {
        for (pos, &a) in args.iter().enumerate() {
            if a < 0 {
                return Err(NumericsError::NegativeFactorialArgument(a));
            }
            maxima[pos] = maxima[pos].max(a as u64);
        }
    }
    let mut denom = BigUint::one();
    for &m in &maxima {
        denom *= factorial_big(m);
    }
    let mut numer = BigInt::zero();
    for (sign, args) in terms {
        if *sign == 0 {
            continue;
        }
        let mut term = BigUint::one();
        for (pos, &mx) in maxima.iter().enumerate() {
            let a = args.get(pos).copied().unwrap_or(0) as u64;
            for k in (a + 1)..=mx {
                term *= k;
            }
        }
        let term = BigInt::from_biguint(Sign::Plus, term);
        if *sign > 0 {
            numer += term;
        } else {
            numer -= term;
        }
    }
    ExactRational::new(numer, BigInt::from_biguint(Sign::Plus, denom))
}

pub fn factorial_big(n: u64) -> BigUint {
    let mut f = BigUint::one();
    for k in 2..=n {
        f *= k;
    }
    f
}

/// Uniform nodes on [−π, π) per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodicGrid {
    pub points_per_axis: usize,
    pub axis_count: usize,
}

impl PeriodicGrid {
    pub fn new(points_per_axis: usize, axis_count: usize) -> Result<Self, NumericsError> {
        if points_per_axis == 0 || !(1..=2).contains(&axis_count) {
            return Err(NumericsError::InvalidGrid);
        }
        Ok(PeriodicGrid { points_per_axis, axis_count })
    }

    /// Smallest grid integrating every trigonometric polynomial of the given degree exactly.
    pub fn exact_for_degree(degree_bound: i64, axis_count: usize) -> Result<Self, NumericsError> {
        if degree_bound < 0 {
            return Err(NumericsError::NegativeDegree(degree_bound));
        }
        Self::new(degree_bound as usize + 1, axis_count)
    }

    pub fn node(&self, k: usize) -> f64 {
        -PI + 2.0 * PI * k as f64 / self.points_per_axis as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points_per_axis).map(|k| self.node(k)).collect()
    }

    pub fn weight(&self) -> f64 {
        (1.0 / self.points_per_axis as f64).powi(self.axis_count as i32)
    }
}

/// Normalized integral (1/2π)^d ∫ f over the torus, computed as the node mean.
/// Exact for trigonometric polynomials of degree ≤ `degree_bound` per angle.
pub fn integrate_periodic<F>(f: F, axis_count: usize, degree_bound: i64) -> Result<f64, NumericsError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let grid = PeriodicGrid::exact_for_degree(degree_bound, axis_count)?;
    let nodes = grid.nodes();
    let n = grid.points_per_axis;
    let value = match axis_count {
        1 => ordered_sum(&nodes.iter().map(|&x| f(&[x])).collect::<Vec<_>>()) / n as f64,
        _ => mean_2d(n, |a, b| f(&[a, b])),
    };
    Ok(value)
}

/// Mean over an n×n uniform grid of f(first, second). Rows run in parallel and
/// are combined in row order.
pub fn mean_2d<F>(n: usize, f: F) -> f64
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let grid = PeriodicGrid { points_per_axis: n, axis_count: 2 };
    let nodes = grid.nodes();
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = nodes[i];
            let mut s = CompensatedSum::new();
            for &b in &nodes {
                s.add(f(a, b));
            }
            s.value()
        })
        .collect();
    ordered_sum(&rows) / (n * n) as f64
}

/// Mean over n uniform nodes of f.
pub fn mean_1d<F: Fn(f64) -> f64>(n: usize, f: F) -> f64 {
    let grid = PeriodicGrid { points_per_axis: n, axis_count: 1 };
    let mut s = CompensatedSum::new();
    for k in 0..n {
        s.add(f(grid.node(k)));
    }
    s.value() / n as f64
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        xs[i] = -x;
        xs[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        ws[i] = w;
        ws[n - 1 - i] = w;
    }
    (xs, ws)
}

/// (1/2π) ∫_{−π/2}^{π/2} f(cos Λ) dΛ for a polynomial f of degree ≤ `degree`.
/// The even part of f is integrated on the full circle, the odd part through
/// u = sin Λ with Gauss–Legendre; both steps are exact.
pub fn integrate_half_range_cos<F: Fn(f64) -> f64>(f: F, degree: usize) -> f64 {
    let even = 0.5 * mean_1d(degree + 1, |t| {
        let c = t.cos();
        0.5 * (f(c) + f(-c))
    });
    let n = degree / 2 + 2;
    let (us, ws) = gauss_legendre(n);
    let mut odd = CompensatedSum::new();
    for (u, w) in us.iter().zip(&ws) {
        let c = (1.0 - u * u).sqrt();
        odd.add(w * (f(c) - f(-c)) / (2.0 * c));
    }
    even + odd.value() / (2.0 * PI)
}

/// Coarse scan (256 samples) then golden-section refinement on the bracket
/// around the best sample. Returns (argmax, f(argmax)).
pub fn maximize_scalar<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64), NumericsError> {
    if !(lo < hi) || !(tol > 0.0) {
        return Err(NumericsError::InvalidInterval { lo, hi, tol });
    }
    const SAMPLES: usize = 256;
    let h = (hi - lo) / (SAMPLES - 1) as f64;
    let (mut best_i, mut best_v) = (0usize, f64::NEG_INFINITY);
    for i in 0..SAMPLES {
        let v = f(lo + h * i as f64);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let mut a = lo + h * best_i.saturating_sub(1) as f64;
    let mut b = (lo + h * (best_i + 1) as f64).min(hi);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    let sampled = lo + h * best_i as f64;
    if best_v > fx {
        Ok((sampled, best_v))
    } else {
        Ok((x, fx))
    }
}
