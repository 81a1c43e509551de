use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "fockgauge", version, about = "Interference statistics of Fock-state condensates")]
pub struct Cli {
    #[command(subcommand)]
    pub group: Group,
    #[command(flatten)]
    pub params: Params,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Group {
    /// Relative phase built up by position measurements
    #[command(subcommand)]
    Emergence(EmergenceCmd),
    /// Two sources on one beam splitter
    #[command(subcommand)]
    Single(SingleCmd),
    /// Double interferometer and the BCHSH combination
    #[command(subcommand)]
    Bell(BellCmd),
    /// Population oscillations
    #[command(subcommand)]
    Po(PoCmd),
    /// Partial measurements, losses, parity sums, two-interferometer device
    #[command(subcommand)]
    Ext(ExtCmd),
    /// Three condensates in free space
    #[command(subcommand)]
    Three(ThreeCmd),
    /// Printed formulas that disagree with the exact evaluation
    Report,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum EmergenceCmd {
    /// Posterior over λ after --m sequential detections
    Run,
    /// --runs independent runs: λ0 and FWHM per seed
    Ensemble,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum SingleCmd {
    /// P(m1) for m1 = 0..=N
    Dist,
    /// (Λ, λ) integrand; `--view rphi` gives |R(φ)|² instead
    Field,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum BellCmd {
    /// One record (all of --m1..--m4) or the whole distribution; `--view field` gives the integrand
    Prob,
    /// Parity correlator E(ζ, θ)
    Correlator,
    /// Q(ξ) scan and its maximum
    Qmax,
    /// L_qu over (Λ, λ) for M = 2
    Diagnostic,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum PoCmd {
    /// P versus m_α at fixed (m1, m2)
    Slice,
    /// F(Λ, λ) landscape
    Field,
    /// D(Λ)
    Dlam,
    /// p_class(λ)
    Pclass,
    /// Stationary points of |F|
    Peaks,
    /// Cat envelope R̂(φ)
    Cat,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum ExtCmd {
    /// Side detectors only
    NoPhase,
    /// Interference detectors only; `--view field` gives cos^{N−M}Λ·F
    NoPop,
    /// PO slice with lost particles; `--view strata` gives the per-M_L weights
    Losses,
    /// Sum over one parity of m1; `--view field|slice`
    Parity,
    /// Two interferometers plus side detectors; `--view field|slice`
    DoublePo,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum ThreeCmd {
    /// P(m_α, m_β) after --m free-space detections
    Map,
    /// Recursion against the phase integral for small n
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ParityArg {
    Odd,
    Even,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum View {
    Field,
    Slice,
    Rphi,
    Strata,
    Prob,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Params {
    /// Population of source α
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nalpha: Option<u32>,
    /// Population of source β
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nbeta: Option<u32>,
    /// Total N (Bell, landscapes), detected N_D (losses), per-source n (three)
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    /// Number of measured particles M
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m1: Option<u32>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m2: Option<u32>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m3: Option<u32>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m4: Option<u32>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub malpha: Option<u32>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mbeta: Option<u32>,
    /// Alice's phase shift (radians unless --pi-units)
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    /// Bob's phase shift
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// Setting difference for Q(ξ); also the hidden phase for `emergence run`
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    /// Transmission of the loss splitters
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transmission: Option<f64>,
    /// Points per axis for fields and profiles
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runs: Option<usize>,
    #[arg(long, global = true, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parity: Option<ParityArg>,
    #[arg(long, global = true, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub view: Option<View>,
    /// Scale PO slices to unit sum
    #[arg(long, global = true)]
    pub renormalize: bool,
    /// Read angles as multiples of π
    #[arg(long, global = true)]
    pub pi_units: bool,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,
    /// Data file; the manifest goes to <out>.manifest.json. Default: stdout, manifest on stderr
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<std::path::PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
}
