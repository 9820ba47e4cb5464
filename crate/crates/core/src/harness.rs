//! Experiment configuration, the ordered verification chain, and sweeps.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criticality::{critical_exponent, exponent_set, ExponentSet};
use crate::diagnostics::{
    annotate_series, default_window, fit_growth, i_values_for, lemma22_lower_bound, DataIntegrals,
    DiagnosticsRecorder, DiagnosticsSeries, GrowthFit, Inequality, F0, RESIDUAL_EPS,
};
use crate::error::{Error, Result};
use crate::io::{fmt_f64, write_json};
use crate::radon::{check_1d_wave, dalembert_lower_bound, power_margin, radon_section, RadonKind, RadonSection};
use crate::sharp_transform::{
    check_pointwise_domination, log_refinement_check, weighted_chain_applicable, weighted_inequality_check,
    write_margin_csv, LineField,
};
use crate::special_fn::TestFunctionContext;
use crate::wave_solver::{
    make_initial_state, simulate, step, BlowupReport, InitialDataSpec, RadialState, SimulationConfig,
    SimulationOptions, Verdict,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const D2F0_TOL: f64 = 2e-2;
pub const LEMMA22_TOL: f64 = 1e-6;
pub const RADON_MASS_TOL: f64 = 1e-4;
pub const RADON_WAVE_TOL: f64 = 5e-2;
pub const DOMINATION_TOL: f64 = 1e-9;

/// An exponent given outright or relative to p_c(n).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PValue {
    Absolute(f64),
    Offset { offset_from_pc: f64 },
}

impl PValue {
    pub fn critical() -> Self {
        PValue::Offset { offset_from_pc: 0.0 }
    }

    pub fn resolve(&self, n: usize) -> Result<f64> {
        match *self {
            PValue::Absolute(p) => Ok(p),
            PValue::Offset { offset_from_pc } => Ok(critical_exponent(n)? + offset_from_pc),
        }
    }
}

fn default_support_radius() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

/// The user-facing form of [`SimulationConfig`]: cfl, r_max and the
/// limits fall back to the solver defaults when omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub n: usize,
    #[serde(default = "PValue::critical")]
    pub p: PValue,
    #[serde(rename = "R", default = "default_support_radius")]
    pub support_radius: f64,
    pub h: f64,
    pub t_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blowup_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_floor: Option<f64>,
    pub initial_data: InitialDataSpec,
    #[serde(default = "default_true")]
    pub nonlinear: bool,
}

impl Default for SimulationSpec {
    /// n = 4 at p_c, bump of amplitude 5 on the unit ball, h = 1/400, t ≤ 12.
    fn default() -> Self {
        Self {
            n: 4,
            p: PValue::critical(),
            support_radius: 1.0,
            h: 1.0 / 400.0,
            t_max: 12.0,
            cfl: None,
            r_max: None,
            blowup_threshold: None,
            dt_floor: None,
            initial_data: InitialDataSpec::bump(5.0, 1.0),
            nonlinear: true,
        }
    }
}

impl SimulationSpec {
    /// The validated solver config.
    pub fn resolve(&self) -> Result<SimulationConfig> {
        let p = self.p.resolve(self.n)?;
        let mut c = SimulationConfig::new(self.n, p, self.support_radius, self.h, self.t_max, self.initial_data);
        if let Some(cfl) = self.cfl {
            c.cfl = cfl;
        }
        if let Some(r_max) = self.r_max {
            c.r_max = r_max;
        }
        if let Some(b) = self.blowup_threshold {
            c.blowup_threshold = b;
        }
        if let Some(f) = self.dt_floor {
            c.dt_floor = f;
        }
        c.nonlinear = self.nonlinear;
        c.validate()?;
        Ok(c)
    }
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CheckToggles {
    pub d2F0: bool,
    pub holder: bool,
    pub lemma22: bool,
    /// Also gates the Radon mass identity.
    pub radon_wave: bool,
    /// Also gates the power lower bound.
    pub dalembert: bool,
    /// Also gates pointwise domination by the maximal function.
    pub weighted_Lp: bool,
    pub log_refinement: bool,
}

impl Default for CheckToggles {
    fn default() -> Self {
        Self {
            d2F0: true,
            holder: true,
            lemma22: true,
            radon_wave: true,
            dalembert: true,
            weighted_Lp: true,
            log_refinement: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepAxes {
    pub n: Vec<usize>,
    pub p: Vec<PValue>,
    pub amplitude: Vec<f64>,
}

impl SweepAxes {
    pub fn is_empty(&self) -> bool {
        self.n.is_empty() && self.p.is_empty() && self.amplitude.is_empty()
    }
}

fn default_jobs() -> usize {
    1
}

fn default_stride() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub simulation: SimulationSpec,
    #[serde(default)]
    pub checks: CheckToggles,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub sweep: SweepAxes,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    #[serde(default = "default_stride")]
    pub observer_stride: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            simulation: SimulationSpec::default(),
            checks: CheckToggles::default(),
            out_dir: None,
            sweep: SweepAxes::default(),
            jobs: default_jobs(),
            observer_stride: default_stride(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file<P: AsRef<Path>>(path: P) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub violations: usize,
    pub samples: usize,
}

impl CheckSummary {
    pub fn skip(name: &str, reason: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: CheckStatus::Skip,
            reason: Some(reason.into()),
            min: None,
            max: None,
            violations: 0,
            samples: 0,
        }
    }

    /// Pass iff no sample violates; min/max over the finite values.
    pub fn from_values(name: &str, values: &[f64], violations: usize) -> Self {
        let finite = values.iter().filter(|v| v.is_finite());
        let min = finite.clone().cloned().reduce(f64::min);
        let max = finite.cloned().reduce(f64::max);
        Self {
            name: name.into(),
            status: if violations == 0 { CheckStatus::Pass } else { CheckStatus::Fail },
            reason: None,
            min,
            max,
            violations,
            samples: values.len(),
        }
    }
}

/// How much of the chain to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainDepth {
    /// Checks on the time series only.
    Series,
    /// Series checks plus the Radon-transform and operator checks on snapshots.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub run_id: String,
    pub config: SimulationConfig,
    pub exponents: ExponentSet,
    pub blowup: BlowupReport,
    pub growth_fit: Option<GrowthFit>,
    pub checks: Vec<CheckSummary>,
    pub wall_seconds: f64,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail).map(|c| c.name.as_str()).collect()
    }

    pub fn check(&self, name: &str) -> Option<&CheckSummary> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Everything a run leaves behind besides the report.
pub struct RunArtifacts {
    pub series: DiagnosticsSeries,
    /// Samples before max|u| passes √(blow-up threshold).
    pub pre_blowup_len: usize,
    pub final_state: RadialState,
}

/// Simulates `config` and evaluates the enabled checks in order.
pub fn run_chain(
    run_id: &str,
    config: &SimulationConfig,
    checks: &CheckToggles,
    depth: ChainDepth,
    observer_stride: usize,
    out_dir: Option<&Path>,
) -> Result<(RunReport, RunArtifacts)> {
    let started = Instant::now();
    config.validate()?;
    let ex = exponent_set(config.n, config.p)?;
    let ctx = TestFunctionContext::new(config.n)?;
    let r = config.support_radius;
    let cutoff = config.blowup_threshold.sqrt();

    let snapshot_times: Vec<f64> = match depth {
        ChainDepth::Series => vec![],
        ChainDepth::Full => [0.25, 0.5, 0.75].iter().map(|f| f * config.t_max).collect(),
    };
    let options = SimulationOptions { observer_stride, snapshot_times };
    let mut recorder = DiagnosticsRecorder::new(config, &ctx);
    let mut last_calm: Option<RadialState> = None;
    let output = {
        let mut record = |s: &RadialState| recorder.record(s);
        let mut keep = |s: &RadialState| {
            if s.max_abs_u() <= cutoff {
                last_calm = Some(s.clone());
            }
        };
        simulate(config, &options, &mut [&mut record, &mut keep])?
    };
    let blowup = output.report;
    let initial = make_initial_state(config);
    let data = DataIntegrals::from_initial_state(&initial, recorder.table());
    let mut series = recorder.series;
    let pre = series.prefix_below(cutoff);
    let i_values = i_values_for(&series, &ctx, config.p, r)?;
    annotate_series(&mut series, &ex, r, &i_values, &data)?;

    let zero_data = config.initial_data.amplitude == 0.0;
    let linear = !config.nonlinear;
    let mut out = Vec::new();
    let mut growth_fit = None;

    if checks.d2F0 {
        out.push(if linear {
            CheckSummary::skip("d2F0_identity", "nonlinearity disabled")
        } else if pre < 3 {
            CheckSummary::skip("d2F0_identity", "fewer than 3 samples before blow-up")
        } else {
            let res = &series.residuals["res_2_2p"][1..pre - 1];
            let bad = res.iter().filter(|v| !(**v <= D2F0_TOL)).count();
            CheckSummary::from_values("d2F0_identity", res, bad)
        });
    }
    if checks.holder {
        let lhs = &series.lp[..pre];
        for (name, col, rhs) in [
            ("holder_volume", "res_2_3", volume_rhs(&series, &ex, r, pre)),
            ("holder_test_function", "res_2_4", test_function_rhs(&series, &i_values, ex.p, pre)),
        ] {
            let bad = lhs.iter().zip(&rhs).filter(|(&l, &rr)| !Inequality { lhs: l, rhs: rr }.holds()).count();
            out.push(CheckSummary::from_values(name, &series.residuals[col][..pre], bad));
        }
    }
    if checks.lemma22 {
        let margins = &series.residuals["lemma22_margin"][..pre];
        let bad = series.times[..pre]
            .iter()
            .zip(margins)
            .filter(|(&t, &m)| !(m >= -LEMMA22_TOL * lemma22_lower_bound(t, &data).abs().max(1.0)))
            .count();
        out.push(CheckSummary::from_values("lemma22", margins, bad));
    }

    // Growth fit: reported, not judged.
    let t_end = if pre > 0 { series.times[pre - 1] } else { 0.0 };
    if !zero_data && !linear {
        match fit_growth(&series.times[..pre], &series.f0[..pre], &ex, r, default_window(t_end)) {
            Ok(fit) => growth_fit = Some(fit),
            Err(Error::SeriesTooShort { .. } | Error::NonPositiveWindow(_)) => {}
            Err(e) => return Err(e),
        }
    }

    if checks.log_refinement {
        out.push(if zero_data {
            CheckSummary::skip("log_refinement", "zero data: positivity hypothesis not met")
        } else if linear {
            CheckSummary::skip("log_refinement", "nonlinearity disabled")
        } else {
            match log_refinement_check(&series.times[..pre], &series.lp[..pre], &ex, r) {
                Ok(rows) => {
                    if let Some(dir) = out_dir {
                        write_margin_csv(dir.join("log_refinement.csv"), &rows)?;
                    }
                    let values: Vec<f64> = rows.iter().map(|x| x.1).collect();
                    let bad = values.iter().filter(|v| !(**v > 0.0)).count();
                    CheckSummary::from_values("log_refinement", &values, bad)
                }
                Err(Error::SeriesTooShort { .. }) => CheckSummary::skip(
                    "log_refinement",
                    format!("run ends before t = 2(R+1)+1 = {}", 2.0 * (r + 1.0) + 1.0),
                ),
                Err(Error::NotApplicable(why)) => CheckSummary::skip("log_refinement", why),
                Err(e) => return Err(e),
            }
        });
    }

    let final_state = if blowup.verdict == Verdict::SurvivedHorizon {
        output.final_state
    } else {
        last_calm.clone().unwrap_or(initial)
    };

    if depth == ChainDepth::Full {
        let mut states: Vec<RadialState> =
            output.snapshots.into_iter().filter(|s| s.t > 0.0 && s.max_abs_u() <= cutoff).collect();
        if states.last().is_none_or(|s| s.t < final_state.t) {
            states.push(final_state.clone());
        }
        let calm = series.slice(0..pre);
        out.extend(snapshot_checks(config, &ex, checks, &states, &calm, out_dir)?);
    }

    if let Some(dir) = out_dir {
        series.write_csv(dir.join("diagnostics.csv"))?;
        final_state.write_csv(&dir.join("snapshot_final.csv"), config.p, r)?;
        if let Some(fit) = &growth_fit {
            write_json(dir.join("growth_fit.json"), fit)?;
        }
    }

    let report = RunReport {
        run_id: run_id.into(),
        config: config.clone(),
        exponents: ex,
        blowup,
        growth_fit,
        checks: out,
        wall_seconds: started.elapsed().as_secs_f64(),
    };
    if let Some(dir) = out_dir {
        write_json(dir.join("report.json"), &report)?;
    }
    Ok((report, RunArtifacts { series, pre_blowup_len: pre, final_state }))
}

fn volume_rhs(series: &DiagnosticsSeries, ex: &ExponentSet, r: f64, len: usize) -> Vec<f64> {
    (0..len).map(|i| ex.k1 * (series.times[i] + r).powf(-ex.q) * series.f0[i].abs().powf(ex.p)).collect()
}

fn test_function_rhs(series: &DiagnosticsSeries, i_values: &[f64], p: f64, len: usize) -> Vec<f64> {
    (0..len).map(|i| series.f1[i].abs().powf(p) / i_values[i].powf(p - 1.0)).collect()
}

/// Accumulates per-snapshot samples for one check.
#[derive(Default)]
struct Tally {
    values: Vec<f64>,
    bad: usize,
    skipped: Vec<String>,
}

impl Tally {
    fn push(&mut self, value: f64, ok: bool) {
        self.values.push(value);
        self.bad += usize::from(!ok);
    }

    fn summary(self, name: &str, fallback: &str) -> CheckSummary {
        if self.values.is_empty() {
            let reason = self.skipped.first().cloned().unwrap_or_else(|| fallback.to_string());
            CheckSummary::skip(name, reason)
        } else {
            CheckSummary::from_values(name, &self.values, self.bad)
        }
    }
}

fn snapshot_checks(
    config: &SimulationConfig,
    ex: &ExponentSet,
    checks: &CheckToggles,
    states: &[RadialState],
    calm: &DiagnosticsSeries,
    out_dir: Option<&Path>,
) -> Result<Vec<CheckSummary>> {
    let (p, r) = (config.p, config.support_radius);
    let zero_data = config.initial_data.amplitude == 0.0;
    let linear = !config.nonlinear;
    let mut mass = Tally::default();
    let mut wave = Tally::default();
    let mut dalembert = Tally::default();
    let mut power = Tally::default();
    let mut domination = Tally::default();
    let mut weighted = Tally::default();
    let weighted_ok = weighted_chain_applicable(ex);

    for (k, state) in states.iter().enumerate() {
        let of_u = radon_section(state, RadonKind::OfU, p);
        let of_abs = radon_section(state, RadonKind::OfAbsU, p);
        if let Some(dir) = out_dir {
            of_u.write_csv(dir.join(format!("radon_{k}_u.csv")), p, r)?;
            of_abs.write_csv(dir.join(format!("radon_{k}_abs_u.csv")), p, r)?;
        }

        if checks.radon_wave {
            let scale = of_abs.mass().max(RESIDUAL_EPS);
            let rel = (of_u.mass() - F0(state)).abs() / scale;
            mass.push(rel, rel <= RADON_MASS_TOL);

            let dt = config.dt();
            let s1 = step(state, config, dt)?;
            let s2 = step(&s1, config, dt)?;
            let trio = [state, &s1, &s2];
            let u_secs: Vec<RadonSection> =
                trio.iter().enumerate().map(|(j, s)| if j == 0 { of_u.clone() } else { radon_section(s, RadonKind::OfU, p) }).collect();
            let src_secs: Vec<RadonSection> = trio
                .iter()
                .map(|s| {
                    let mut sec = radon_section(s, RadonKind::OfAbsUPowP, p);
                    if linear {
                        sec.values.iter_mut().for_each(|v| *v = 0.0);
                    }
                    sec
                })
                .collect();
            let res = check_1d_wave(&u_secs, &src_secs, r)?;
            let rel = res.max_relative();
            wave.push(rel, rel <= RADON_WAVE_TOL);
        }

        if checks.dalembert {
            if linear {
                dalembert.skipped.push("nonlinearity disabled".into());
                power.skipped.push("nonlinearity disabled".into());
            } else {
                for (i, &value) in of_u.values.iter().enumerate() {
                    let rho = of_u.rho(i);
                    if state.t - rho - r <= 0.0 {
                        break;
                    }
                    let bound = dalembert_lower_bound(&calm.times, &calm.lp, rho, state.t, r)?;
                    let ineq = Inequality { lhs: value, rhs: bound };
                    dalembert.push(ineq.relative_margin(), ineq.holds());
                    if zero_data {
                        continue;
                    }
                    if state.t - rho - r >= 1.0 {
                        let m = power_margin(value, rho, state.t, r, ex);
                        power.push(m, m > 0.0);
                    }
                }
                if zero_data {
                    power.skipped.push("zero data: positivity hypothesis not met".into());
                }
            }
        }

        if checks.weighted_Lp {
            if ex.n >= 3 {
                let field = LineField::from_section(&of_abs, r)?;
                let slack = check_pointwise_domination(&field);
                let scale = field.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(RESIDUAL_EPS);
                let worst = slack.iter().cloned().fold(f64::INFINITY, f64::min) / scale;
                domination.push(worst, worst >= -DOMINATION_TOL);
            } else {
                domination.skipped.push("n = 2: the domination bound needs n >= 3".into());
            }
            match &weighted_ok {
                Ok(()) => {
                    let w = weighted_inequality_check(&of_abs, state, ex, r)?;
                    let ratio = w.ratio();
                    weighted.push(ratio, ratio.is_finite());
                }
                Err(e) => weighted.skipped.push(e.to_string()),
            }
        }
    }

    let none = "no snapshot before blow-up";
    let mut out = Vec::new();
    if checks.radon_wave {
        out.push(mass.summary("radon_mass", none));
        out.push(wave.summary("radon_wave", none));
    }
    if checks.dalembert {
        out.push(dalembert.summary("dalembert", "no snapshot with t > R"));
        out.push(power.summary("power_lower_bound", "no snapshot with t - rho - R >= 1"));
    }
    if checks.weighted_Lp {
        out.push(domination.summary("pointwise_domination", none));
        out.push(weighted.summary("weighted_Lp", none));
    }
    Ok(out)
}

/// One run of the chain at `config`.
pub fn verify_chain(
    config: &SimulationConfig,
    checks: &CheckToggles,
    observer_stride: usize,
    out_dir: Option<&Path>,
) -> Result<RunReport> {
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
    }
    Ok(run_chain("run", config, checks, ChainDepth::Full, observer_stride, out_dir)?.0)
}

/// One point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub run_id: String,
    pub config: SimulationConfig,
}

/// The cartesian product of the axes; an empty axis keeps the base value,
/// and all-empty axes give no points. Every point is validated.
pub fn sweep_points(exp: &ExperimentConfig) -> Result<Vec<SweepPoint>> {
    let axes = &exp.sweep;
    if axes.is_empty() {
        return Ok(vec![]);
    }
    let base = &exp.simulation;
    let ns = if axes.n.is_empty() { vec![base.n] } else { axes.n.clone() };
    let ps = if axes.p.is_empty() { vec![base.p] } else { axes.p.clone() };
    let amps = if axes.amplitude.is_empty() { vec![base.initial_data.amplitude] } else { axes.amplitude.clone() };
    let mut points = Vec::new();
    for &n in &ns {
        for p in &ps {
            for &amp in &amps {
                let mut spec = base.clone();
                spec.n = n;
                spec.p = *p;
                spec.initial_data.amplitude = amp;
                let config = spec.resolve()?;
                let run_id = format!("run_{:03}", points.len());
                points.push(SweepPoint { run_id, config });
            }
        }
    }
    Ok(points)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub run_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub version: String,
    pub config: ExperimentConfig,
    pub reports: Vec<RunReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<SweepFailure>,
}

impl Summary {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self { version: VERSION.into(), config: config.clone(), reports: vec![], failures: vec![] }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.reports.iter().all(RunReport::passed)
    }
}

/// Runs every sweep point on a pool of `jobs` threads. Results come back
/// in point order whatever the scheduling.
pub fn run_sweep(exp: &ExperimentConfig, depth: ChainDepth) -> Result<Summary> {
    let points = sweep_points(exp)?;
    let out_dir = exp.out_dir.as_deref();
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(exp.jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let results: Vec<Result<RunReport>> = pool.install(|| {
        points
            .par_iter()
            .map(|pt| {
                let dir = out_dir.map(|d| d.join(&pt.run_id));
                if let Some(d) = &dir {
                    std::fs::create_dir_all(d)?;
                }
                run_chain(&pt.run_id, &pt.config, &exp.checks, depth, exp.observer_stride, dir.as_deref())
                    .map(|(report, _)| report)
            })
            .collect()
    });
    let mut summary = Summary::new(exp);
    for (pt, res) in points.iter().zip(results) {
        match res {
            Ok(report) => summary.reports.push(report),
            Err(e) => summary.failures.push(SweepFailure { run_id: pt.run_id.clone(), error: e.to_string() }),
        }
    }
    if let Some(dir) = out_dir {
        write_sweep_csv(dir.join("sweep.csv"), &summary)?;
        write_json(dir.join("summary.json"), &summary)?;
    }
    Ok(summary)
}

pub const SWEEP_CSV_HEADER: &str =
    "run_id,n,p,amplitude,verdict,t_detect,fitted_exponent,log_factor_slope,failed_checks";

/// One line per finished run, in point order.
pub fn write_sweep_csv<P: AsRef<Path>>(path: P, summary: &Summary) -> Result<()> {
    let mut text = String::from(SWEEP_CSV_HEADER);
    text.push('\n');
    for rep in &summary.reports {
        let verdict = match rep.blowup.verdict {
            Verdict::BlewUp => "blew_up",
            Verdict::SurvivedHorizon => "survived_horizon",
        };
        let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_else(|| "NaN".into());
        let fit = rep.growth_fit.as_ref();
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            rep.run_id,
            rep.config.n,
            fmt_f64(rep.config.p),
            fmt_f64(rep.config.initial_data.amplitude),
            verdict,
            opt(rep.blowup.t_detect),
            opt(fit.map(|f| f.fitted_exponent)),
            opt(fit.map(|f| f.log_factor_slope)),
            rep.failed_checks().join(";"),
        ));
    }
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_value_forms() {
        let abs: PValue = serde_json::from_str("2.5").unwrap();
        assert_eq!(abs.resolve(4).unwrap(), 2.5);
        let off: PValue = serde_json::from_str(r#"{"offset_from_pc": -0.2}"#).unwrap();
        assert!((off.resolve(4).unwrap() - 1.8).abs() < 1e-12);
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let exp: ExperimentConfig = serde_json::from_str(
            r#"{"simulation": {"n": 3, "h": 0.01, "t_max": 2,
                "initial_data": {"kind": "smooth_bump", "amplitude": 1, "radius": 1}}}"#,
        )
        .unwrap();
        let c = exp.simulation.resolve().unwrap();
        assert!((c.p - critical_exponent(3).unwrap()).abs() < 1e-15);
        assert!(c.r_max >= c.t_max + c.support_radius);
        assert_eq!(exp.jobs, 1);
        assert!(exp.checks.holder && exp.sweep.is_empty());
    }

    #[test]
    fn short_domain_is_rejected() {
        let mut spec = SimulationSpec::default();
        spec.r_max = Some(spec.t_max);
        assert!(matches!(spec.resolve(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn sweep_product_and_empty_axes() {
        let mut exp = ExperimentConfig::default();
        assert!(sweep_points(&exp).unwrap().is_empty());
        exp.sweep.p = vec![PValue::Absolute(1.8), PValue::critical()];
        exp.sweep.amplitude = vec![1.0, 2.0, 3.0];
        let pts = sweep_points(&exp).unwrap();
        assert_eq!(pts.len(), 6);
        assert!(pts.iter().all(|pt| pt.config.n == 4));
        assert_eq!(pts[5].run_id, "run_005");
        assert_eq!(pts[5].config.initial_data.amplitude, 3.0);
        exp.sweep.n = vec![1];
        assert!(sweep_points(&exp).is_err());
    }
}
