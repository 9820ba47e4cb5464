//! Explicit finite-difference solver for the radial semilinear wave equation
//!
//!   ∂ₜ²u = ∂ᵣ²u + (n−1)/r ∂ᵣu + |u|^p,   r ∈ [0, r_max],
//!
//! on a uniform grid rᵢ = i·h. The radial Laplacian is discretized in flux
//! form, r^{1−n}(r^{n−1}u_r)_r, which is second order for i ≥ 1 and reduces
//! at the origin (even extension u(−h) = u(h)) to 2n(u₁ − u₀)/h². Time
//! stepping is Störmer–Verlet (leapfrog on (u, v)), which reproduces the
//! two-level leapfrog exactly at constant dt and tolerates the step halving
//! used near blow-up.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialDataKind {
    /// u₀ = bump, u₁ = 0.
    SmoothBump,
    /// u₀ = 0, u₁ = bump.
    ZeroDisplacementBumpVelocity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialDataSpec {
    pub kind: InitialDataKind,
    pub amplitude: f64,
    pub radius: f64,
}

impl InitialDataSpec {
    pub fn bump(amplitude: f64, radius: f64) -> Self {
        Self { kind: InitialDataKind::SmoothBump, amplitude, radius }
    }

    /// amplitude·exp(−1/(1 − (r/radius)²)) inside the support, else 0.
    pub fn profile(&self, r: f64) -> f64 {
        let s = r / self.radius;
        if s.abs() >= 1.0 {
            0.0
        } else {
            self.amplitude * (-1.0 / (1.0 - s * s)).exp()
        }
    }

    pub fn displacement(&self, r: f64) -> f64 {
        match self.kind {
            InitialDataKind::SmoothBump => self.profile(r),
            InitialDataKind::ZeroDisplacementBumpVelocity => 0.0,
        }
    }

    pub fn velocity(&self, r: f64) -> f64 {
        match self.kind {
            InitialDataKind::SmoothBump => 0.0,
            InitialDataKind::ZeroDisplacementBumpVelocity => self.profile(r),
        }
    }
}

fn default_true() -> bool {
    true
}

fn default_blowup_threshold() -> f64 {
    1e6
}

fn default_dt_floor() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n: usize,
    pub p: f64,
    /// Support radius R of the data.
    #[serde(rename = "R")]
    pub support_radius: f64,
    pub h: f64,
    pub cfl: f64,
    pub t_max: f64,
    pub r_max: f64,
    #[serde(default = "default_blowup_threshold")]
    pub blowup_threshold: f64,
    #[serde(default = "default_dt_floor")]
    pub dt_floor: f64,
    pub initial_data: InitialDataSpec,
    /// When false the |u|^p source is dropped (linear wave equation).
    #[serde(default = "default_true")]
    pub nonlinear: bool,
}

/// Headroom kept between the light cone and the outer boundary.
const BOUNDARY_MARGIN_CELLS: f64 = 32.0;

pub const DEFAULT_CFL: f64 = 0.5;

/// Adaptive rule: halve dt while max|u|^{p−1}·dt² exceeds this.
pub const STIFFNESS_LIMIT: f64 = 0.1;

impl SimulationConfig {
    /// Config with the outer boundary placed just beyond the light cone.
    pub fn new(n: usize, p: f64, support_radius: f64, h: f64, t_max: f64, data: InitialDataSpec) -> Self {
        Self {
            n,
            p,
            support_radius,
            h,
            cfl: DEFAULT_CFL.min(0.9 * max_stable_cfl(n)),
            t_max,
            r_max: t_max + support_radius + BOUNDARY_MARGIN_CELLS * h,
            blowup_threshold: default_blowup_threshold(),
            dt_floor: default_dt_floor(),
            initial_data: data,
            nonlinear: true,
        }
    }

    pub fn linear(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    /// Same experiment on a grid refined by `factor` (r_max kept).
    pub fn refined(&self, factor: usize) -> Self {
        let mut c = self.clone();
        c.h = self.h / factor as f64;
        c
    }

    pub fn dt(&self) -> f64 {
        self.cfl * self.h
    }

    pub fn node_count(&self) -> usize {
        (self.r_max / self.h).round() as usize + 1
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n < 2 {
            return Err(Error::InvalidDimension(self.n));
        }
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(Error::InvalidExponent(self.p));
        }
        if !(self.support_radius > 0.0) {
            return bad(format!("R must be positive, got {}", self.support_radius));
        }
        if !(self.h > 0.0) {
            return bad(format!("h must be positive, got {}", self.h));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad(format!("cfl must lie in (0, 1], got {}", self.cfl));
        }
        let stable = max_stable_cfl(self.n);
        if self.cfl > stable {
            return bad(format!(
                "cfl = {} exceeds the leapfrog stability limit {stable:.4} of the {}-dimensional radial Laplacian",
                self.cfl, self.n
            ));
        }
        if !(self.t_max > 0.0) {
            return bad(format!("t_max must be positive, got {}", self.t_max));
        }
        let needed = self.t_max + self.support_radius + 2.0 * self.h;
        if !(self.r_max >= needed - 1e-12 * needed) {
            return bad(format!(
                "r_max = {} must be at least t_max + R + 2h = {needed}",
                self.r_max
            ));
        }
        if !(self.blowup_threshold > 0.0) || !(self.dt_floor > 0.0) {
            return bad("blowup_threshold and dt_floor must be positive".into());
        }
        let data = &self.initial_data;
        if !(data.amplitude >= 0.0) || !data.amplitude.is_finite() {
            return bad(format!("amplitude must be nonnegative, got {}", data.amplitude));
        }
        if !(data.radius > 0.0) || data.radius > self.support_radius {
            return bad(format!(
                "data radius must lie in (0, R = {}], got {}",
                self.support_radius, data.radius
            ));
        }
        Ok(())
    }
}

/// One time slice of the radial solution on rᵢ = i·h.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialState {
    pub t: f64,
    pub dim: usize,
    pub h: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl RadialState {
    pub fn zeros(dim: usize, h: f64, len: usize) -> Self {
        Self { t: 0.0, dim, h, u: vec![0.0; len], v: vec![0.0; len] }
    }

    pub fn from_fn(
        dim: usize,
        h: f64,
        len: usize,
        u0: impl Fn(f64) -> f64,
        v0: impl Fn(f64) -> f64,
    ) -> Self {
        let r = |i: usize| i as f64 * h;
        Self {
            t: 0.0,
            dim,
            h,
            u: (0..len).map(|i| u0(r(i))).collect(),
            v: (0..len).map(|i| v0(r(i))).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn r_max(&self) -> f64 {
        self.r(self.len().saturating_sub(1))
    }

    pub fn max_abs_u(&self) -> f64 {
        self.u.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|x| x.is_finite())
    }

    /// Largest |u| strictly outside radius `r`.
    pub fn max_abs_beyond(&self, r: f64) -> f64 {
        let start = ((r / self.h).floor() as usize + 1).min(self.len());
        self.u[start..].iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Writes `r,u,v` rows plus a JSON sidecar `{n, p, R, h, t}` next to it.
    pub fn write_csv(&self, path: &Path, p: f64, support_radius: f64) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "r,u,v")?;
        for i in 0..self.len() {
            writeln!(
                out,
                "{},{},{}",
                crate::io::fmt_f64(self.r(i)),
                crate::io::fmt_f64(self.u[i]),
                crate::io::fmt_f64(self.v[i])
            )?;
        }
        out.flush()?;
        let sidecar = serde_json::json!({
            "n": self.dim,
            "p": p,
            "R": support_radius,
            "h": self.h,
            "t": self.t,
        });
        std::fs::write(path.with_extension("json"), serde_json::to_string_pretty(&sidecar)?)?;
        Ok(())
    }
}

pub fn make_initial_state(config: &SimulationConfig) -> RadialState {
    let data = config.initial_data;
    RadialState::from_fn(
        config.n,
        config.h,
        config.node_count(),
        |r| data.displacement(r),
        |r| data.velocity(r),
    )
}

/// Flux-form radial Laplacian with the even-extension limit at the origin.
#[derive(Debug, Clone)]
pub struct RadialLaplacian {
    inv_h2: f64,
    dim: usize,
    plus: Vec<f64>,
    minus: Vec<f64>,
}

impl RadialLaplacian {
    pub fn new(dim: usize, h: f64, len: usize) -> Self {
        let k = (dim - 1) as i32;
        let mut plus = vec![0.0; len];
        let mut minus = vec![0.0; len];
        for i in 1..len {
            let fi = i as f64;
            plus[i] = ((fi + 0.5) / fi).powi(k);
            minus[i] = ((fi - 0.5) / fi).powi(k);
        }
        Self { inv_h2: 1.0 / (h * h), dim, plus, minus }
    }

    /// Laplacian at node `i`; the last node is a homogeneous Dirichlet node.
    #[inline]
    pub fn apply_at(&self, u: &[f64], i: usize) -> f64 {
        let last = u.len() - 1;
        if i == 0 {
            if last == 0 {
                return 0.0;
            }
            2.0 * self.dim as f64 * (u[1] - u[0]) * self.inv_h2
        } else if i >= last {
            0.0
        } else {
            (self.plus[i] * (u[i + 1] - u[i]) - self.minus[i] * (u[i] - u[i - 1])) * self.inv_h2
        }
    }
}

/// Largest cfl for which leapfrog on the discrete radial Laplacian is
/// stable: 2/√λ_max(h²·Δ_h). The origin row 2n/h² and the first flux
/// coefficients push λ_max above the one-dimensional value 4, so the
/// limit falls below 1 and shrinks with n.
pub fn max_stable_cfl(dim: usize) -> f64 {
    const NODES: usize = 512;
    // Symmetrize the tridiagonal operator: off-diagonal √(a_{i,i+1}a_{i+1,i}).
    let lap = RadialLaplacian::new(dim, 1.0, NODES + 1);
    let mut diag = vec![0.0; NODES];
    let mut off = vec![0.0; NODES - 1];
    diag[0] = -2.0 * dim as f64;
    for i in 1..NODES {
        diag[i] = -(lap.plus[i] + lap.minus[i]);
    }
    let upper0 = 2.0 * dim as f64;
    off[0] = (upper0 * lap.minus[1]).sqrt();
    for i in 1..NODES - 1 {
        off[i] = (lap.plus[i] * lap.minus[i + 1]).sqrt();
    }
    // Sturm count of eigenvalues below x.
    let count_below = |x: f64| {
        let mut count = 0;
        let mut d = diag[0] - x;
        if d < 0.0 {
            count += 1;
        }
        for i in 1..NODES {
            let prev = if d == 0.0 { f64::EPSILON } else { d };
            d = diag[i] - x - off[i - 1] * off[i - 1] / prev;
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    // All eigenvalues are negative; bisect for the most negative one.
    let mut lo = diag
        .iter()
        .enumerate()
        .map(|(i, d)| d - off.get(i).copied().unwrap_or(0.0) - if i > 0 { off[i - 1] } else { 0.0 })
        .fold(0.0, f64::min);
    let mut hi = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let lambda = -0.5 * (lo + hi);
    (2.0 / lambda.sqrt()).min(1.0)
}

/// Right-hand side Δ_h u + |u|^p (source optional) on nodes `0..=upto`.
fn acceleration(lap: &RadialLaplacian, u: &[f64], p: f64, nonlinear: bool, upto: usize, out: &mut [f64]) {
    let last = u.len() - 1;
    for i in 0..=upto.min(last) {
        let mut a = lap.apply_at(u, i);
        if nonlinear && i < last {
            a += u[i].abs().powf(p);
        }
        out[i] = a;
    }
}

/// One Störmer–Verlet step of size `dt` from `state`; pure.
pub fn step(state: &RadialState, config: &SimulationConfig, dt: f64) -> Result<RadialState> {
    let len = state.len();
    let lap = RadialLaplacian::new(state.dim, state.h, len);
    let mut acc = vec![0.0; len];
    acceleration(&lap, &state.u, config.p, config.nonlinear, len - 1, &mut acc);
    let mut next = state.clone();
    let half = 0.5 * dt;
    for i in 0..len - 1 {
        next.v[i] += half * acc[i];
        next.u[i] += dt * next.v[i];
    }
    acceleration(&lap, &next.u, config.p, config.nonlinear, len - 1, &mut acc);
    for i in 0..len - 1 {
        next.v[i] += half * acc[i];
    }
    next.t += dt;
    if !next.is_finite() {
        return Err(Error::Range { value: f64::INFINITY, limit: config.blowup_threshold });
    }
    Ok(next)
}

/// Stateful stepper that reuses the acceleration between steps and only
/// touches the nodes the solution has reached.
#[derive(Debug, Clone)]
pub struct RadialWaveSolver {
    config: SimulationConfig,
    state: RadialState,
    lap: RadialLaplacian,
    acc: Vec<f64>,
    dt: f64,
    front: usize,
    steps: u64,
}

impl RadialWaveSolver {
    pub fn new(config: SimulationConfig) -> Result<Self> {
        config.validate()?;
        let state = make_initial_state(&config);
        Self::from_state(config, state)
    }

    /// Starts from an arbitrary state on the config's grid.
    pub fn from_state(config: SimulationConfig, state: RadialState) -> Result<Self> {
        if state.dim != config.n || (state.h - config.h).abs() > 1e-15 * config.h {
            return Err(Error::GridMismatch("state grid differs from config".into()));
        }
        let len = state.len();
        if len < 3 {
            return Err(Error::GridMismatch("need at least three nodes".into()));
        }
        let lap = RadialLaplacian::new(state.dim, state.h, len);
        let mut solver = Self {
            dt: config.dt(),
            config,
            lap,
            acc: vec![0.0; len],
            front: len - 1,
            steps: 0,
            state,
        };
        solver.front = solver.support_front();
        let upto = (solver.front + 1).min(len - 1);
        acceleration(&solver.lap, &solver.state.u, solver.config.p, solver.config.nonlinear, upto, &mut solver.acc);
        Ok(solver)
    }

    fn support_front(&self) -> usize {
        let u = &self.state.u;
        let v = &self.state.v;
        (0..u.len()).rev().find(|&i| u[i] != 0.0 || v[i] != 0.0).unwrap_or(0)
    }

    pub fn state(&self) -> &RadialState {
        &self.state
    }

    pub fn into_state(self) -> RadialState {
        self.state
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Halves dt while max|u|^{p−1}·dt² exceeds the stiffness limit.
    /// Returns the (possibly reduced) step.
    pub fn adapt_dt(&mut self) -> f64 {
        if self.config.nonlinear {
            let umax = self.state.max_abs_u();
            let growth = umax.powf(self.config.p - 1.0);
            while growth * self.dt * self.dt > STIFFNESS_LIMIT && self.dt >= self.config.dt_floor {
                self.dt *= 0.5;
            }
        }
        self.dt
    }

    /// Advances by the current dt.
    pub fn advance(&mut self) {
        let len = self.state.len();
        let last = len - 1;
        let dt = self.dt;
        let half = 0.5 * dt;
        let hi = (self.front + 2).min(last);
        let p = self.config.p;
        let nonlinear = self.config.nonlinear;
        {
            let RadialState { u, v, .. } = &mut self.state;
            for i in 0..=hi.min(last - 1) {
                v[i] += half * self.acc[i];
                u[i] += dt * v[i];
            }
        }
        let upto = (hi + 1).min(last);
        acceleration(&self.lap, &self.state.u, p, nonlinear, upto, &mut self.acc);
        {
            let v = &mut self.state.v;
            for i in 0..=hi.min(last - 1) {
                v[i] += half * self.acc[i];
            }
        }
        self.state.t += dt;
        self.steps += 1;
        while self.front < last - 1 && (self.state.u[self.front + 1] != 0.0 || self.state.v[self.front + 1] != 0.0) {
            self.front += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    BlewUp,
    SurvivedHorizon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub verdict: Verdict,
    pub t_detect: Option<f64>,
    /// dt fell below the floor before the threshold was crossed.
    pub resolution_limited: bool,
    /// (t, max|u|) at every observation.
    pub max_u_history: Vec<(f64, f64)>,
    /// |t_detect(h/2) − t_detect(h)| / t_detect(h), when computed.
    pub refinement_consistency: Option<f64>,
    pub final_time: f64,
    pub steps: u64,
    pub min_dt: f64,
}

#[derive(Debug, Clone)]
pub struct SimulationOptions {
    /// Observers run every `observer_stride` steps (and at t = 0 and the end).
    pub observer_stride: usize,
    /// A snapshot is kept for each requested time: the first state at or
    /// after it.
    pub snapshot_times: Vec<f64>,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self { observer_stride: 10, snapshot_times: Vec::new() }
    }
}

pub struct SimulationOutput {
    pub report: BlowupReport,
    pub snapshots: Vec<RadialState>,
    pub final_state: RadialState,
}

pub type Observer<'a> = dyn FnMut(&RadialState) + 'a;

/// Runs until `t_max`, threshold crossing, or the dt floor.
pub fn simulate(
    config: &SimulationConfig,
    options: &SimulationOptions,
    observers: &mut [&mut Observer<'_>],
) -> Result<SimulationOutput> {
    let mut solver = RadialWaveSolver::new(config.clone())?;
    let stride = options.observer_stride.max(1);
    let mut pending: Vec<f64> = options.snapshot_times.clone();
    pending.sort_by(|a, b| b.total_cmp(a));
    let mut snapshots = Vec::new();
    let mut history = Vec::new();
    let mut min_dt = solver.dt();

    let observe = |state: &RadialState, history: &mut Vec<(f64, f64)>, observers: &mut [&mut Observer<'_>]| {
        history.push((state.t, state.max_abs_u()));
        for obs in observers.iter_mut() {
            obs(state);
        }
    };
    let take_snapshots = |state: &RadialState, dt: f64, pending: &mut Vec<f64>, snapshots: &mut Vec<RadialState>| {
        while let Some(&next) = pending.last() {
            if state.t + 1e-9 * dt >= next {
                snapshots.push(state.clone());
                pending.pop();
            } else {
                break;
            }
        }
    };

    observe(solver.state(), &mut history, observers);
    take_snapshots(solver.state(), solver.dt(), &mut pending, &mut snapshots);

    let t_max = config.t_max;
    let mut verdict = Verdict::SurvivedHorizon;
    let mut t_detect = None;
    let mut resolution_limited = false;
    let mut last_observed = 0u64;

    loop {
        let t = solver.state().t;
        if t >= t_max - 1e-9 * solver.dt() {
            break;
        }
        let dt = solver.adapt_dt();
        min_dt = min_dt.min(dt);
        if dt < config.dt_floor {
            verdict = Verdict::BlewUp;
            t_detect = Some(t);
            resolution_limited = true;
            break;
        }
        solver.advance();
        let state = solver.state();
        let umax = state.max_abs_u();
        if !umax.is_finite() || !state.is_finite() || umax > config.blowup_threshold {
            verdict = Verdict::BlewUp;
            t_detect = Some(state.t.min(t_max));
            break;
        }
        if solver.steps() % stride as u64 == 0 {
            observe(state, &mut history, observers);
            last_observed = solver.steps();
        }
        take_snapshots(state, dt, &mut pending, &mut snapshots);
    }
    if solver.steps() != last_observed && verdict == Verdict::SurvivedHorizon {
        observe(solver.state(), &mut history, observers);
    }

    let steps = solver.steps();
    let final_state = solver.into_state();
    Ok(SimulationOutput {
        report: BlowupReport {
            verdict,
            t_detect,
            resolution_limited,
            max_u_history: history,
            refinement_consistency: None,
            final_time: final_state.t,
            steps,
            min_dt,
        },
        snapshots,
        final_state,
    })
}

/// Runs at h and h/2 and fills `refinement_consistency` in the coarse report.
pub fn simulate_with_refinement(config: &SimulationConfig) -> Result<(BlowupReport, BlowupReport)> {
    let options = SimulationOptions { observer_stride: 50, snapshot_times: vec![] };
    let fine_config = config.refined(2);
    let (coarse, fine) = rayon::join(
        || simulate(config, &options, &mut []),
        || simulate(&fine_config, &options, &mut []),
    );
    let mut coarse = coarse?.report;
    let fine = fine?.report;
    if let (Some(a), Some(b)) = (coarse.t_detect, fine.t_detect) {
        coarse.refinement_consistency = Some((b - a).abs() / a);
    }
    Ok((coarse, fine))
}
