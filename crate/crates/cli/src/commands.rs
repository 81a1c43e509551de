use std::f64::consts::PI;

use fockgauge_core::bell::{
    bell_integrand_field, correlator, distribution, maximize_chsh, normalization_diagnostic, prob_bell, BellSettings,
};
use fockgauge_core::emergence::{
    emergence_ensemble, ks_uniform, median, posterior_profile, sample_positions, sample_with_hidden_phase, three_population_map,
    three_prob_integral, three_run, POSTERIOR_POINTS, THREE_ORACLE_CAP,
};
use fockgauge_core::extensions::{
    double_landscape_field, double_po_slice, loss_cap, no_phase_closed_form, no_phase_printed_form, no_population_field,
    parity_selected, po_with_losses, prob_no_phase, prob_no_population, quantum_support, ridge_fraction, Parity,
};
use fockgauge_core::poposc::{
    cat_envelope, cat_peak, d_of_lambda_profile, f_field, f_peaks, p_class_lambda, po_slice, PoDistribution,
};
use fockgauge_core::report::DiscrepancyReport;
use fockgauge_core::single_splitter::{dist_single, integrand_field, r_of_phi};
use fockgauge_core::{AngleField, DoubleFock, FockError, PeriodicGrid};

use crate::args::{BellCmd, EmergenceCmd, ExtCmd, Group, ParityArg, Params, PoCmd, SingleCmd, ThreeCmd, View};
use crate::output::Output;
use crate::row;

const FIELD_GRID: usize = 64;
const PROFILE_GRID: usize = 256;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Precondition(String),
    Io(String),
}

impl From<FockError> for CliError {
    fn from(e: FockError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl From<fockgauge_core::numerics::NumericsError> for CliError {
    fn from(e: fockgauge_core::numerics::NumericsError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type Res<T> = Result<T, CliError>;

pub fn command_name(group: &Group) -> String {
    let sub = match group {
        Group::Emergence(c) => format!("emergence {c:?}"),
        Group::Single(c) => format!("single {c:?}"),
        Group::Bell(c) => format!("bell {c:?}"),
        Group::Po(c) => format!("po {c:?}"),
        Group::Ext(c) => format!("ext {c:?}"),
        Group::Three(c) => format!("three {c:?}"),
        Group::Report => "report".to_string(),
    };
    sub.to_lowercase()
}

struct Ctx<'a> {
    p: &'a Params,
    cmd: String,
}

impl Ctx<'_> {
    fn need<T: Copy>(&self, v: Option<T>, flag: &str) -> Res<T> {
        v.ok_or_else(|| CliError::Usage(format!("`{}` requires --{flag}", self.cmd)))
    }

    fn angle(&self, v: Option<f64>) -> Option<f64> {
        v.map(|x| if self.p.pi_units { x * PI } else { x })
    }

    fn zeta(&self) -> f64 {
        self.angle(self.p.zeta).unwrap_or(0.0)
    }

    fn theta(&self) -> f64 {
        self.angle(self.p.theta).unwrap_or(0.0)
    }

    fn source(&self) -> Res<DoubleFock> {
        Ok(DoubleFock::new(self.need(self.p.nalpha, "nalpha")?, self.need(self.p.nbeta, "nbeta")?))
    }

    fn record(&self) -> Res<[u32; 4]> {
        let p = self.p;
        Ok([self.need(p.m1, "m1")?, self.need(p.m2, "m2")?, self.need(p.m3, "m3")?, self.need(p.m4, "m4")?])
    }

    fn grid2(&self) -> Res<PeriodicGrid> {
        Ok(PeriodicGrid::new(self.p.grid.unwrap_or(FIELD_GRID), 2)?)
    }

    fn grid1(&self) -> Res<PeriodicGrid> {
        Ok(PeriodicGrid::new(self.p.grid.unwrap_or(PROFILE_GRID), 1)?)
    }

    fn view(&self, default: View) -> View {
        self.p.view.unwrap_or(default)
    }
}

/// Views each command can emit besides its default artifact.
fn views(group: &Group) -> &'static [View] {
    match group {
        Group::Single(SingleCmd::Field) => &[View::Field, View::Rphi],
        Group::Bell(BellCmd::Prob) => &[View::Field, View::Prob],
        Group::Ext(ExtCmd::NoPop) => &[View::Field, View::Prob],
        Group::Ext(ExtCmd::Losses) => &[View::Slice, View::Strata],
        Group::Ext(ExtCmd::Parity) | Group::Ext(ExtCmd::DoublePo) => &[View::Field, View::Slice],
        _ => &[],
    }
}

pub fn run(group: Group, p: &Params) -> Res<Output> {
    let cx = Ctx { p, cmd: command_name(&group) };
    if let Some(v) = p.view {
        if !views(&group).contains(&v) {
            return Err(CliError::Usage(format!("`{}` does not support --view {}", cx.cmd, format!("{v:?}").to_lowercase())));
        }
    }
    match group {
        Group::Emergence(c) => emergence(&cx, c),
        Group::Single(c) => single(&cx, c),
        Group::Bell(c) => bell(&cx, c),
        Group::Po(c) => po(&cx, c),
        Group::Ext(c) => ext(&cx, c),
        Group::Three(c) => three(&cx, c),
        Group::Report => report(),
    }
}

fn field_output(field: &AngleField) -> Output {
    let mut out = Output::new(&["cap_lambda", "lambda", "value"]);
    for (cap, small, v) in field.rows() {
        out.push(row![cap, small, v]);
    }
    out.summary("grid", field.n() as u64).summary("meta", field.meta.clone())
}

fn slice_output(slice: &PoDistribution, renormalize: bool) -> Output {
    let s = if renormalize { slice.renormalized() } else { slice.clone() };
    let side = s.table.last().map(|x| x.0).unwrap_or(0);
    let mut out = Output::new(&["m_alpha", "m_beta", "probability"]);
    for &(ma, v) in &s.table {
        out.push(row![ma, side - ma, v]);
    }
    let mut out = out.summary("slice_total", slice.total());
    if side % 2 == 0 {
        if let Some(r) = s.central_ratio(side / 2) {
            out = out.summary("central_ratio", r);
        }
    }
    if !renormalize {
        out = out.note("slice holds joint probabilities; pass --renormalize for unit sum");
    }
    out
}

fn emergence(cx: &Ctx, c: EmergenceCmd) -> Res<Output> {
    let p = cx.p;
    let m = cx.need(p.m, "m")? as usize;
    match c {
        EmergenceCmd::Run => {
            let seed = p.seed.unwrap_or(1);
            let sample = match cx.angle(p.xi) {
                Some(hidden) => sample_with_hidden_phase(m, hidden, seed)?,
                None => sample_positions(m, seed)?,
            };
            let prof = posterior_profile(&sample, p.grid.unwrap_or(POSTERIOR_POINTS))?;
            let mut out = Output::new(&["lambda", "posterior"]);
            for (l, v) in prof.grid.iter().zip(&prof.values) {
                out.push(row![*l, *v]);
            }
            Ok(out.summary("lambda0", prof.lambda0).summary("fwhm", prof.fwhm))
        }
        EmergenceCmd::Ensemble => {
            let runs = emergence_ensemble(m, p.runs.unwrap_or(500), p.seed.unwrap_or(1))?;
            let mut out = Output::new(&["seed", "lambda0", "fwhm"]);
            for r in &runs {
                out.push(row![r.seed, r.lambda0, r.fwhm]);
            }
            let l0: Vec<f64> = runs.iter().map(|r| r.lambda0).collect();
            let w: Vec<f64> = runs.iter().map(|r| r.fwhm).collect();
            Ok(out.summary("ks_uniform", ks_uniform(&l0)).summary("median_fwhm", median(&w)))
        }
    }
}

fn single(cx: &Ctx, c: SingleCmd) -> Res<Output> {
    let src = cx.source()?;
    match c {
        SingleCmd::Dist => {
            let dist = dist_single(src);
            let mut out = Output::new(&["m1", "m2", "probability"]);
            for (m1, v) in dist.iter().enumerate() {
                out.push(row![m1 as u32, src.total() - m1 as u32, *v]);
            }
            Ok(out.summary("total", dist.iter().sum::<f64>()))
        }
        SingleCmd::Field => {
            let m1 = cx.need(cx.p.m1, "m1")?;
            match cx.view(View::Field) {
                View::Rphi => {
                    if m1 > src.total() {
                        return Err(CliError::Precondition(format!("m1 = {m1} must lie in [0, N = {}]", src.total())));
                    }
                    let m2 = src.total() - m1;
                    let mut out = Output::new(&["phi", "r_abs2"]);
                    for phi in cx.grid1()?.nodes() {
                        out.push(row![phi, r_of_phi(m1, m2, src.n_beta, phi).norm_sqr()]);
                    }
                    Ok(out)
                }
                _ => Ok(field_output(&integrand_field(src, m1, cx.grid2()?)?)),
            }
        }
    }
}

fn bell(cx: &Ctx, c: BellCmd) -> Res<Output> {
    let p = cx.p;
    match c {
        BellCmd::Prob => {
            let n = cx.need(p.n, "n")?;
            let s = BellSettings::new(cx.zeta(), cx.theta(), n, p.m.unwrap_or(n));
            if cx.view(View::Prob) == View::Field {
                return Ok(field_output(&bell_integrand_field(s, &cx.record()?, cx.grid2()?)?));
            }
            let mut out = Output::new(&["m1", "m2", "m3", "m4", "probability"]);
            let given = [p.m1, p.m2, p.m3, p.m4].iter().filter(|x| x.is_some()).count();
            match given {
                4 => {
                    let rec = cx.record()?;
                    out.push(row![rec[0], rec[1], rec[2], rec[3], prob_bell(s, &rec)?]);
                }
                0 => {
                    for (r, v) in distribution(s)? {
                        out.push(row![r[0], r[1], r[2], r[3], v]);
                    }
                }
                _ => return Err(CliError::Usage("`bell prob` takes all of --m1..--m4 or none".to_string())),
            }
            Ok(out)
        }
        BellCmd::Correlator => {
            let n = cx.need(p.n, "n")?;
            let m = p.m.unwrap_or(n);
            let (z, t) = (cx.zeta(), cx.theta());
            let e = correlator(BellSettings::new(z, t, n, m))?;
            let mut out = Output::new(&["zeta", "theta", "correlator"]);
            out.push(row![z, t, e]);
            if m == n {
                out = out.summary("closed_form", (0.5 * (z + t)).cos().powi(n as i32));
            }
            Ok(out)
        }
        BellCmd::Qmax => {
            let n = cx.need(p.n, "n")?;
            let (xi_star, q_star) = maximize_chsh(n)?;
            let points = p.grid.unwrap_or(PROFILE_GRID).max(2);
            let mut out = Output::new(&["xi", "q"]);
            for i in 0..points {
                let xi = 0.5 * PI * i as f64 / (points - 1) as f64;
                out.push(row![xi, fockgauge_core::bell::chsh_q(n, xi)]);
            }
            Ok(out.summary("xi_star", xi_star).summary("q_star", q_star))
        }
        BellCmd::Diagnostic => {
            let (qu, cl) = normalization_diagnostic(p.m.unwrap_or(2), cx.zeta(), cx.theta(), cx.grid2()?)?;
            let lo = cl.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = cl.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            Ok(field_output(&qu).summary("l_cl_min", lo).summary("l_cl_max", hi))
        }
    }
}

fn po(cx: &Ctx, c: PoCmd) -> Res<Output> {
    let p = cx.p;
    match c {
        PoCmd::Slice => {
            let slice = po_slice(cx.source()?, cx.need(p.m1, "m1")?, cx.need(p.m2, "m2")?)?;
            Ok(slice_output(&slice, p.renormalize))
        }
        PoCmd::Field => Ok(field_output(&f_field(cx.need(p.m1, "m1")?, cx.need(p.m2, "m2")?, cx.grid2()?))),
        PoCmd::Dlam => {
            let prof = d_of_lambda_profile(cx.need(p.m1, "m1")?, cx.need(p.m, "m")?, cx.grid1()?)?;
            let mut out = Output::new(&["cap_lambda", "d"]);
            for (cap, v) in prof {
                out.push(row![cap, v]);
            }
            Ok(out)
        }
        PoCmd::Pclass => {
            let prof = p_class_lambda(cx.need(p.m1, "m1")?, cx.need(p.m, "m")?, cx.need(p.n, "n")?, cx.grid1()?)?;
            let peak = prof.iter().filter(|x| x.0 > 0.0).fold((0.0, f64::NEG_INFINITY), |a, &x| if x.1 > a.1 { x } else { a });
            let mut out = Output::new(&["lambda", "p_class"]);
            for (l, v) in prof {
                out.push(row![l, v]);
            }
            Ok(out.summary("peak_lambda", peak.0))
        }
        PoCmd::Peaks => {
            let mut out = Output::new(&["cap_lambda", "lambda", "sign"]);
            for pk in f_peaks(cx.need(p.m1, "m1")?, cx.need(p.m2, "m2")?)? {
                out.push(row![pk.cap, pk.small, pk.sign as i64]);
            }
            Ok(out.note("peak positions from the stationary-point conditions; see report item peak-swap"))
        }
        PoCmd::Cat => {
            let (m1, m2) = (cx.need(p.m1, "m1")?, cx.need(p.m2, "m2")?);
            let phi0 = cat_peak(m1, m2)?;
            let mut out = Output::new(&["phi", "r_hat"]);
            for phi in PeriodicGrid::new(p.grid.unwrap_or(512), 1)?.nodes() {
                out.push(row![phi, cat_envelope(m1, m2, phi)]);
            }
            Ok(out.summary("phi0", phi0).summary("phi0_over_pi", phi0 / PI))
        }
    }
}

fn ext(cx: &Ctx, c: ExtCmd) -> Res<Output> {
    let p = cx.p;
    match c {
        ExtCmd::NoPhase => {
            let src = cx.source()?;
            let m = cx.need(p.m, "m")?;
            if m > src.total() {
                return Err(CliError::Precondition(format!("M = {m} exceeds N = {}", src.total())));
            }
            let side = src.total() - m;
            let mut out = Output::new(&["m_alpha", "m_beta", "probability", "closed_form", "printed_form"]);
            for ma in 0..=side {
                let mb = side - ma;
                let printed = no_phase_printed_form(src, m, ma, mb).unwrap_or(f64::NAN);
                out.push(row![ma, mb, prob_no_phase(src, m, ma, mb)?, no_phase_closed_form(src, ma, mb), printed]);
            }
            Ok(out.note("printed_form is NaN where its index is not a nonnegative integer; see report item no-phase-closed-form"))
        }
        ExtCmd::NoPop => {
            let m = cx.need(p.m, "m")?;
            if cx.view(View::Prob) == View::Field {
                let field = no_population_field(cx.need(p.m1, "m1")?, m, cx.need(p.n, "n")?, cx.grid2()?)?;
                return Ok(field_output(&field));
            }
            let src = cx.source()?;
            let mut out = Output::new(&["m1", "m2", "probability"]);
            for m1 in 0..=m {
                out.push(row![m1, m - m1, prob_no_population(src, m, m1)?]);
            }
            Ok(out)
        }
        ExtCmd::Losses => {
            let (n, t) = (cx.need(p.n, "n")?, cx.need(p.transmission, "transmission")?);
            let r = po_with_losses(n, cx.need(p.m1, "m1")?, cx.need(p.m2, "m2")?, t)?;
            let mut out = if cx.view(View::Slice) == View::Strata {
                let mut out = Output::new(&["lost", "weight"]);
                for &(l, w) in &r.strata {
                    out.push(row![l, w]);
                }
                out
            } else {
                slice_output(&r.slice, p.renormalize)
            };
            out = out.summary("mean_lost", r.mean_lost).summary("strata", r.strata.len() as u64).summary("cap", loss_cap(n, t));
            Ok(out.note("mean_lost follows the exact loss law; see report item loss-mean-lost"))
        }
        ExtCmd::Parity => {
            let parity = match cx.need(p.parity, "parity")? {
                ParityArg::Odd => Parity::Odd,
                ParityArg::Even => Parity::Even,
            };
            let (field, slice) = parity_selected(cx.source()?, cx.need(p.m, "m")?, parity, cx.grid2()?)?;
            let (ridge, quantum) = (ridge_fraction(&field), quantum_support(&field));
            let out = if cx.view(View::Slice) == View::Field {
                field_output(&field)
            } else {
                slice_output(&slice, p.renormalize)
            };
            Ok(out.summary("ridge_fraction", ridge).summary("quantum_support", quantum))
        }
        ExtCmd::DoublePo => {
            let rec = cx.record()?;
            let (z, t) = (cx.zeta(), cx.theta());
            if cx.view(View::Slice) == View::Field {
                return Ok(field_output(&double_landscape_field(rec, z, t, cx.grid2()?)));
            }
            Ok(slice_output(&double_po_slice(cx.source()?, &rec, z, t)?, p.renormalize))
        }
    }
}

fn three(cx: &Ctx, c: ThreeCmd) -> Res<Output> {
    let p = cx.p;
    let (n, m, seed) = (cx.need(p.n, "n")?, cx.need(p.m, "m")?, p.seed.unwrap_or(1));
    match c {
        ThreeCmd::Map => {
            let map = three_population_map(n, m, seed)?;
            let mut out = Output::new(&["m_alpha", "m_beta", "m_gamma", "probability"]);
            for a in 0..=n {
                for b in 0..=n {
                    if map.allowed(a as i64, b as i64) {
                        out.push(row![a, b, map.side_total - a - b, map.get(a, b)]);
                    }
                }
            }
            Ok(out
                .summary("side_total", map.side_total)
                .summary("lag_gamma_const", map.lag_correlation((1, -1)))
                .summary("lag_alpha", map.lag_correlation((1, 0)))
                .summary("lag_beta", map.lag_correlation((0, 1)))
                .note("m_gamma = 3n - M - m_alpha - m_beta"))
        }
        ThreeCmd::Oracle => {
            if n > THREE_ORACLE_CAP {
                return Err(CliError::Precondition(format!("n = {n} outside the oracle range 1..={THREE_ORACLE_CAP}")));
            }
            let (state, sample) = three_run(n, m, seed)?;
            let side = state.remaining;
            let mut out = Output::new(&["m_alpha", "m_beta", "recursion", "integral"]);
            let mut worst = 0.0f64;
            for a in 0..=side.min(n) {
                for b in 0..=(side - a).min(n) {
                    let rec = (2.0 * state.log_scale).exp() * state.coefficient(a, b).norm_sqr();
                    let integral = three_prob_integral(n, &sample, a, b)?;
                    worst = worst.max((rec - integral).abs());
                    out.push(row![a, b, rec, integral]);
                }
            }
            Ok(out.summary("max_abs_difference", worst))
        }
    }
}

fn report() -> Res<Output> {
    let rep = DiscrepancyReport::generate()?;
    let mut out = Output::new(&["key", "topic", "printed", "implemented", "evidence", "confirmed"]);
    for d in &rep.items {
        out.push(row![d.key, d.topic.clone(), d.printed.clone(), d.implemented.clone(), d.evidence.clone(), d.confirmed as i64]);
    }
    Ok(out.summary("items", rep.items.len() as u64))
}
