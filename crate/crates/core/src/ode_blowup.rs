//! The comparison ODE F″ = K₁(t+R)^{−q}F^p started on the envelope
//! F = K₀(t+R)^a, its scale invariance under (p−1)a = q−2, and the blow-up
//! threshold in K₀.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// F above this value together with a step below `DT_FLOOR` certifies blow-up.
pub const BLOWUP_LEVEL: f64 = 1e12;
pub const DT_FLOOR: f64 = 1e-10;
pub const DEFAULT_ETA: f64 = 0.01;
pub const DEFAULT_HORIZON: f64 = 1e4;
/// Relative width of the K₀ bracket at which bisection stops.
pub const BRACKET_TOL: f64 = 0.01;
const MAX_STEPS: u64 = 20_000_000;

/// F″ = K₁(t+R)^{−q}|F|^p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonOde {
    pub p: f64,
    pub q: f64,
    #[serde(rename = "K1")]
    pub k1: f64,
    #[serde(rename = "R")]
    pub support_radius: f64,
}

impl ComparisonOde {
    fn rhs(&self, t: f64, f: f64) -> f64 {
        self.k1 * (t + self.support_radius).powf(-self.q) * f.abs().powf(self.p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Classical RK4 with dt = η·min(t+R, F/|F′|, √(F/|F″|)).
    GrowthRk4 { eta: f64 },
    /// Embedded Dormand–Prince 5(4) with error control.
    DormandPrince { rtol: f64 },
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator::GrowthRk4 { eta: DEFAULT_ETA }
    }
}

impl Integrator {
    pub fn oracle() -> Self {
        Integrator::DormandPrince { rtol: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OdeVerdict {
    BlewUp,
    Survived,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSummary {
    pub min_dt: f64,
    pub samples: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IvpOutcome {
    pub verdict: OdeVerdict,
    /// Last two step times around the detected blow-up.
    pub bracket: Option<[f64; 2]>,
    pub final_t: f64,
    pub final_f: f64,
    pub steps: StepSummary,
}

impl IvpOutcome {
    pub fn t_blowup(&self) -> Option<f64> {
        self.bracket.map(|b| b[1])
    }
}

fn rk4_step(ode: &ComparisonOde, t: f64, y: [f64; 2], dt: f64) -> [f64; 2] {
    let f = |t: f64, y: [f64; 2]| [y[1], ode.rhs(t, y[0])];
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * dt, [y[0] + 0.5 * dt * k1[0], y[1] + 0.5 * dt * k1[1]]);
    let k3 = f(t + 0.5 * dt, [y[0] + 0.5 * dt * k2[0], y[1] + 0.5 * dt * k2[1]]);
    let k4 = f(t + dt, [y[0] + dt * k3[0], y[1] + dt * k3[1]]);
    [
        y[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

fn growth_dt(ode: &ComparisonOde, t: f64, y: [f64; 2], eta: f64) -> f64 {
    let mut scale = t + ode.support_radius;
    let f = y[0].abs();
    if f > 0.0 {
        if y[1] != 0.0 {
            scale = scale.min(f / y[1].abs());
        }
        let acc = ode.rhs(t, y[0]);
        if acc > 0.0 {
            scale = scale.min((f / acc).sqrt());
        }
    }
    eta * scale
}

// Dormand–Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn dp_step(ode: &ComparisonOde, t: f64, y: [f64; 2], dt: f64) -> ([f64; 2], [f64; 2]) {
    let mut k = [[0.0; 2]; 7];
    for s in 0..7 {
        let mut ys = y;
        for (j, a) in DP_A[s].iter().enumerate().take(s) {
            ys[0] += dt * a * k[j][0];
            ys[1] += dt * a * k[j][1];
        }
        k[s] = [ys[1], ode.rhs(t + DP_C[s] * dt, ys[0])];
    }
    let mut y5 = y;
    let mut y4 = y;
    for s in 0..7 {
        y5[0] += dt * DP_B5[s] * k[s][0];
        y5[1] += dt * DP_B5[s] * k[s][1];
        y4[0] += dt * DP_B4[s] * k[s][0];
        y4[1] += dt * DP_B4[s] * k[s][1];
    }
    (y5, [y5[0] - y4[0], y5[1] - y4[1]])
}

/// Integrates from (t0, f0, df0) to `t_end` or until certified blow-up.
pub fn integrate_ivp(ode: &ComparisonOde, t0: f64, f0: f64, df0: f64, t_end: f64, integrator: Integrator) -> IvpOutcome {
    let mut t = t0;
    let mut y = [f0, df0];
    let mut t_prev = t0;
    let mut min_dt = f64::INFINITY;
    let mut steps = 0u64;
    let mut dt_trial = 1e-3 * (t0 + ode.support_radius);
    let blown = |t_prev: f64, t: f64, y: [f64; 2], min_dt: f64, steps: u64| IvpOutcome {
        verdict: OdeVerdict::BlewUp,
        bracket: Some([t_prev, t]),
        final_t: t,
        final_f: y[0],
        steps: StepSummary { min_dt, samples: steps },
    };
    while t < t_end && steps < MAX_STEPS {
        let remaining = t_end - t;
        let (next, dt) = match integrator {
            Integrator::GrowthRk4 { eta } => {
                let dt = growth_dt(ode, t, y, eta).min(remaining);
                (rk4_step(ode, t, y, dt), dt)
            }
            Integrator::DormandPrince { rtol } => {
                let atol = rtol * 1e-4;
                loop {
                    let dt = dt_trial.min(remaining);
                    let (y5, err) = dp_step(ode, t, y, dt);
                    let norm = (0..2)
                        .map(|i| err[i].abs() / (atol + rtol * y[i].abs().max(y5[i].abs())))
                        .fold(0.0, f64::max);
                    let finite = y5.iter().all(|v| v.is_finite()) && norm.is_finite();
                    let factor = if finite && norm > 0.0 { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) } else if finite { 5.0 } else { 0.2 };
                    if finite && norm <= 1.0 {
                        dt_trial = dt * factor;
                        break (y5, dt);
                    }
                    dt_trial = dt * factor;
                    if dt_trial < f64::EPSILON * t.abs().max(1.0) {
                        // The step cannot shrink further: the solution is
                        // leaving every representable scale.
                        return blown(t_prev, t, y, min_dt.min(dt_trial), steps);
                    }
                }
            }
        };
        if !next[0].is_finite() || !next[1].is_finite() {
            return blown(t, t + dt, y, min_dt.min(dt), steps);
        }
        t_prev = t;
        t += dt;
        y = next;
        steps += 1;
        if dt < remaining {
            min_dt = min_dt.min(dt);
        }
        if y[0] > BLOWUP_LEVEL && dt < DT_FLOOR {
            return blown(t_prev, t, y, min_dt, steps);
        }
    }
    IvpOutcome {
        verdict: OdeVerdict::Survived,
        bracket: None,
        final_t: t,
        final_f: y[0],
        steps: StepSummary { min_dt, samples: steps },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeProblem {
    pub p: f64,
    pub a: f64,
    pub q: f64,
    #[serde(rename = "K0")]
    pub k0: f64,
    #[serde(rename = "K1")]
    pub k1: f64,
    #[serde(rename = "R")]
    pub support_radius: f64,
    #[serde(rename = "T0")]
    pub t0: f64,
    /// Absolute end time.
    pub horizon: f64,
}

impl OdeProblem {
    /// Problem with R = 1, T₀ = 0.
    pub fn normalized(p: f64, a: f64, q: f64, k0: f64, k1: f64, horizon: f64) -> Self {
        Self { p, a, q, k0, k1, support_radius: 1.0, t0: 0.0, horizon }
    }

    pub fn relation_residual(&self) -> f64 {
        ((self.p - 1.0) * self.a - (self.q - 2.0)).abs()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.p > 1.0) {
            return Err(Error::InvalidExponent(self.p));
        }
        if !(self.a >= 1.0) {
            return bad(format!("a must be at least 1, got {}", self.a));
        }
        if !(self.k0 >= 0.0) || !(self.k1 > 0.0) {
            return bad(format!("need K0 >= 0 and K1 > 0, got {} and {}", self.k0, self.k1));
        }
        if !(self.support_radius > 0.0) || !(self.t0 >= 0.0) {
            return bad(format!("need R > 0 and T0 >= 0, got {} and {}", self.support_radius, self.t0));
        }
        if !(self.horizon > self.t0) {
            return bad(format!("horizon {} must exceed T0 = {}", self.horizon, self.t0));
        }
        let residual = self.relation_residual();
        if !(residual < 1e-10) {
            return Err(Error::ExponentRelation(residual));
        }
        Ok(())
    }

    pub fn ode(&self) -> ComparisonOde {
        ComparisonOde { p: self.p, q: self.q, k1: self.k1, support_radius: self.support_radius }
    }

    /// Envelope value and slope at T₀.
    pub fn initial_condition(&self) -> (f64, f64) {
        let base = self.t0 + self.support_radius;
        (self.k0 * base.powf(self.a), self.k0 * self.a * base.powf(self.a - 1.0))
    }

    /// Time as seen in the normalized problem.
    pub fn normalized_time(&self, t: f64) -> f64 {
        (t - self.t0) / (self.t0 + self.support_radius)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeBlowupReport {
    pub verdict: OdeVerdict,
    pub t_blowup: Option<f64>,
    pub bracket: Option<[f64; 2]>,
    pub step_history_summary: StepSummary,
    pub c0_estimate: Option<f64>,
    /// The envelope at T₀ stands in for the standing lower bound.
    pub initialization: String,
}

pub fn integrate_comparison_with(prob: &OdeProblem, integrator: Integrator) -> Result<OdeBlowupReport> {
    prob.validate()?;
    let (f0, df0) = prob.initial_condition();
    let out = integrate_ivp(&prob.ode(), prob.t0, f0, df0, prob.horizon, integrator);
    Ok(OdeBlowupReport {
        verdict: out.verdict,
        t_blowup: out.t_blowup(),
        bracket: out.bracket,
        step_history_summary: out.steps,
        c0_estimate: None,
        initialization: "envelope value and slope at T0".into(),
    })
}

pub fn integrate_comparison(prob: &OdeProblem) -> Result<OdeBlowupReport> {
    integrate_comparison_with(prob, Integrator::default())
}

/// s = (t − T₀)/(T₀ + R), G = F/(T₀+R)^a: the same problem with R = 1, T₀ = 0.
pub fn rescale(prob: &OdeProblem) -> Result<OdeProblem> {
    prob.validate()?;
    Ok(OdeProblem {
        support_radius: 1.0,
        t0: 0.0,
        horizon: prob.normalized_time(prob.horizon),
        ..*prob
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub p: f64,
    pub a: f64,
    pub q: f64,
    #[serde(rename = "K1")]
    pub k1: f64,
    #[serde(rename = "R")]
    pub support_radius: f64,
    #[serde(rename = "T0")]
    pub t0: f64,
    pub c0_estimate: f64,
    pub horizon: f64,
    pub bracket: [f64; 2],
}

fn blows_up(template: &OdeProblem, k0: f64, integrator: Integrator) -> Result<bool> {
    let prob = OdeProblem { k0, ..*template };
    Ok(integrate_comparison_with(&prob, integrator)?.verdict == OdeVerdict::BlewUp)
}

/// Smallest K₀ (to within 1%) whose solution blows up before the
/// template's horizon.
pub fn threshold_for(template: &OdeProblem, integrator: Integrator) -> Result<ThresholdReport> {
    template.validate()?;
    let mut lo = 1.0;
    let mut hi = 1.0;
    if blows_up(template, 1.0, integrator)? {
        loop {
            lo /= 4.0;
            if lo < 1e-300 {
                return Err(Error::BracketNotClosed("every K0 down to 1e-300 blows up".into()));
            }
            if !blows_up(template, lo, integrator)? {
                break;
            }
            hi = lo;
        }
    } else {
        loop {
            hi *= 4.0;
            if hi > 1e300 {
                return Err(Error::BracketNotClosed(format!(
                    "no K0 up to 1e300 blows up before the horizon {}; lengthen it",
                    template.horizon
                )));
            }
            if blows_up(template, hi, integrator)? {
                break;
            }
            lo = hi;
        }
    }
    while hi / lo > 1.0 + BRACKET_TOL {
        let mid = (lo * hi).sqrt();
        if blows_up(template, mid, integrator)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ThresholdReport {
        p: template.p,
        a: template.a,
        q: template.q,
        k1: template.k1,
        support_radius: template.support_radius,
        t0: template.t0,
        c0_estimate: hi,
        horizon: template.horizon,
        bracket: [lo, hi],
    })
}

/// Threshold of the normalized problem on [0, horizon].
pub fn threshold_c0(p: f64, a: f64, q: f64, k1: f64, horizon: f64) -> Result<ThresholdReport> {
    threshold_for(&OdeProblem::normalized(p, a, q, 1.0, k1, horizon), Integrator::default())
}

/// Infinite-horizon threshold (a(a−1)/K₁)^{1/(p−1)}: in log time y = F/(t+R)^a
/// solves y″ + (2a−1)y′ + a(a−1)y = K₁y^p, whose positive equilibrium
/// separates decay from blow-up when y′(0) = 0.
pub fn equilibrium_threshold(p: f64, a: f64, k1: f64) -> f64 {
    (a * (a - 1.0) / k1).powf(1.0 / (p - 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub thresholds: Vec<ThresholdReport>,
    pub spread: f64,
}

/// Thresholds for each (R, T₀), each integrated over the window that maps
/// to [0, horizon] in normalized time; spread = (max − min)/min.
pub fn invariance_check(p: f64, a: f64, q: f64, k1: f64, grid: &[(f64, f64)], horizon: f64) -> Result<InvarianceReport> {
    let thresholds: Vec<ThresholdReport> = grid
        .par_iter()
        .map(|&(support_radius, t0)| {
            let template = OdeProblem {
                p,
                a,
                q,
                k0: 1.0,
                k1,
                support_radius,
                t0,
                horizon: t0 + (t0 + support_radius) * horizon,
            };
            threshold_for(&template, Integrator::default())
        })
        .collect::<Result<_>>()?;
    let hi = thresholds.iter().map(|r| r.c0_estimate).fold(f64::NEG_INFINITY, f64::max);
    let lo = thresholds.iter().map(|r| r.c0_estimate).fold(f64::INFINITY, f64::min);
    let spread = if thresholds.is_empty() { 0.0 } else { (hi - lo) / lo };
    Ok(InvarianceReport { thresholds, spread })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub pairs: usize,
    /// Pairs where the larger K₀ blew up later, or not at all, while the smaller one blew up.
    pub violations: usize,
    /// K₀ values on which the two integrators disagree about the verdict.
    pub integrator_disagreements: usize,
}

/// Random pairs K₀ < K₀′ drawn log-uniformly from [k_lo, k_hi] on the
/// normalized problem.
pub fn monotonicity_check(
    template: &OdeProblem,
    k_range: [f64; 2],
    pairs: usize,
    seed: u64,
) -> Result<MonotonicityReport> {
    template.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ln_lo, ln_hi) = (k_range[0].ln(), k_range[1].ln());
    let draws: Vec<(f64, f64)> = (0..pairs)
        .map(|_| {
            let x = rng.gen_range(ln_lo..ln_hi).exp();
            let y = rng.gen_range(ln_lo..ln_hi).exp();
            (x.min(y), x.max(y))
        })
        .collect();
    let results: Vec<(bool, usize)> = draws
        .par_iter()
        .map(|&(small, large)| {
            let run = |k0: f64, integrator| integrate_comparison_with(&OdeProblem { k0, ..*template }, integrator);
            let (a, b) = (run(small, Integrator::default())?, run(large, Integrator::default())?);
            let (a_ref, b_ref) = (run(small, Integrator::oracle())?, run(large, Integrator::oracle())?);
            let violated = match (a.t_blowup, b.t_blowup) {
                (Some(ta), Some(tb)) => tb > ta * (1.0 + 1e-9),
                (Some(_), None) => true,
                _ => false,
            };
            let disagreements = usize::from(a.verdict != a_ref.verdict) + usize::from(b.verdict != b_ref.verdict);
            Ok((violated, disagreements))
        })
        .collect::<Result<_>>()?;
    Ok(MonotonicityReport {
        pairs,
        violations: results.iter().filter(|r| r.0).count(),
        integrator_disagreements: results.iter().map(|r| r.1).sum(),
    })
}
