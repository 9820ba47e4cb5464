//! Functionals of a radial solution and the inequalities they satisfy.
//!
//! F₀(t) = ∫u dx, F₁(t) = ∫u ψ₁ dx and ∫|u|^p dx are integrated on the
//! solver's own grid (Simpson in r with weight ω r^{n−1}), so residuals
//! carry no interpolation error.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criticality::{sphere_area, ExponentSet};
use crate::error::{Error, Result};
use crate::quadrature::simpson;
use crate::special_fn::{PhiTable, TestFunctionContext};
use crate::wave_solver::{RadialState, SimulationConfig};

/// Relative tolerance for inequality residuals.
pub const INEQUALITY_REL_TOL: f64 = 1e-8;
/// Absolute floor below which differences count as zero.
pub const INEQUALITY_ABS_FLOOR: f64 = 1e-12;
/// Denominator floor for relative residuals.
pub const RESIDUAL_EPS: f64 = 1e-30;

/// ω_{n−1} ∫ g(r) r^{n−1} dr for nodal values `g` on the state's grid.
pub fn radial_integral(dim: usize, h: f64, values: impl Iterator<Item = f64>) -> f64 {
    let k = (dim - 1) as i32;
    let weighted: Vec<f64> = values
        .enumerate()
        .map(|(i, g)| if g == 0.0 { 0.0 } else { g * (i as f64 * h).powi(k) })
        .collect();
    sphere_area(dim) * simpson(&weighted, h)
}

#[allow(non_snake_case)]
pub fn F0(state: &RadialState) -> f64 {
    radial_integral(state.dim, state.h, state.u.iter().copied())
}

/// F₁ with ψ₁ evaluated directly through the test-function context.
#[allow(non_snake_case)]
pub fn F1(state: &RadialState, ctx: &TestFunctionContext) -> f64 {
    let t = state.t;
    radial_integral(
        state.dim,
        state.h,
        state.u.iter().enumerate().map(|(i, &u)| {
            if u == 0.0 {
                0.0
            } else {
                u * (ctx.log_phi1(state.r(i)) - t).exp()
            }
        }),
    )
}

/// F₁ using a precomputed log φ₁ table on the same grid.
pub fn f1_with_table(state: &RadialState, table: &PhiTable) -> f64 {
    let t = state.t;
    radial_integral(
        state.dim,
        state.h,
        state.u.iter().enumerate().map(|(i, &u)| if u == 0.0 { 0.0 } else { u * table.psi1(i, t) }),
    )
}

/// ∫|u|^p dx.
pub fn lp_integral(state: &RadialState, p: f64) -> f64 {
    radial_integral(state.dim, state.h, state.u.iter().map(|u| u.abs().powf(p)))
}

/// E = ∫ ½uₜ² + ½|∇u|² − |u|^{p+1}/(p+1) dx. Negative energy with
/// nonnegative data forces blow-up.
pub fn energy(state: &RadialState, p: f64) -> f64 {
    let h = state.h;
    let k = (state.dim - 1) as i32;
    let kinetic_potential = radial_integral(
        state.dim,
        h,
        state.u.iter().zip(&state.v).map(|(u, v)| 0.5 * v * v - u.abs().powf(p + 1.0) / (p + 1.0)),
    );
    let gradient: f64 = state
        .u
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let du = (w[1] - w[0]) / h;
            0.5 * du * du * ((i as f64 + 0.5) * h).powi(k) * h
        })
        .sum();
    kinetic_potential + sphere_area(state.dim) * gradient
}

/// Time series of the functionals along one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSeries {
    pub times: Vec<f64>,
    #[serde(rename = "F0")]
    pub f0: Vec<f64>,
    #[serde(rename = "F1")]
    pub f1: Vec<f64>,
    #[serde(rename = "Lp")]
    pub lp: Vec<f64>,
    pub umax: Vec<f64>,
    pub residuals: BTreeMap<String, Vec<f64>>,
}

impl DiagnosticsSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Samples with index in `range`, residuals dropped.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            times: self.times[range.clone()].to_vec(),
            f0: self.f0[range.clone()].to_vec(),
            f1: self.f1[range.clone()].to_vec(),
            lp: self.lp[range.clone()].to_vec(),
            umax: self.umax[range].to_vec(),
            residuals: BTreeMap::new(),
        }
    }

    /// Number of leading samples with max|u| at most `limit`.
    pub fn prefix_below(&self, limit: f64) -> usize {
        self.umax.iter().take_while(|&&m| m <= limit).count()
    }

    pub const CSV_HEADER: [&'static str; 9] =
        ["t", "F0", "F1", "Lp", "umax", "res_2_2p", "res_2_3", "res_2_4", "lemma22_margin"];

    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let column = |name: &str, i: usize| {
            self.residuals.get(name).and_then(|c| c.get(i)).copied().unwrap_or(f64::NAN)
        };
        let rows: Vec<Vec<f64>> = (0..self.len())
            .map(|i| {
                vec![
                    self.times[i],
                    self.f0[i],
                    self.f1[i],
                    self.lp[i],
                    self.umax[i],
                    column("res_2_2p", i),
                    column("res_2_3", i),
                    column("res_2_4", i),
                    column("lemma22_margin", i),
                ]
            })
            .collect();
        crate::io::write_csv(path, &Self::CSV_HEADER, &rows)
    }
}

/// Observer that appends one sample per observed state.
pub struct DiagnosticsRecorder {
    p: f64,
    table: PhiTable,
    pub series: DiagnosticsSeries,
}

impl DiagnosticsRecorder {
    pub fn new(config: &SimulationConfig, ctx: &TestFunctionContext) -> Self {
        Self {
            p: config.p,
            table: PhiTable::new(ctx, config.h, config.node_count()),
            series: DiagnosticsSeries::default(),
        }
    }

    pub fn table(&self) -> &PhiTable {
        &self.table
    }

    pub fn record(&mut self, state: &RadialState) {
        let s = &mut self.series;
        s.times.push(state.t);
        s.f0.push(F0(state));
        s.f1.push(f1_with_table(state, &self.table));
        s.lp.push(lp_integral(state, self.p));
        s.umax.push(state.max_abs_u());
    }
}

fn second_difference(t: &[f64], f: &[f64], i: usize) -> f64 {
    let h1 = t[i] - t[i - 1];
    let h2 = t[i + 1] - t[i];
    2.0 * ((f[i + 1] - f[i]) / h2 - (f[i] - f[i - 1]) / h1) / (h1 + h2)
}

/// |D²F₀ − ∫|u|^p| / max(∫|u|^p, ε) at every interior sample; the end
/// samples carry NaN.
pub fn check_d2f0_identity(series: &DiagnosticsSeries) -> Result<Vec<f64>> {
    let len = series.len();
    if len < 3 {
        return Err(Error::SeriesTooShort { needed: 3, got: len });
    }
    let mut out = vec![f64::NAN; len];
    for i in 1..len - 1 {
        let d2 = second_difference(&series.times, &series.f0, i);
        out[i] = (d2 - series.lp[i]).abs() / series.lp[i].max(RESIDUAL_EPS);
    }
    Ok(out)
}

/// lhs ≥ rhs, judged with the shared tolerance policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
}

impl Inequality {
    /// (lhs − rhs) / max(|lhs|, |rhs|); zero when both sides vanish.
    pub fn relative_margin(&self) -> f64 {
        let scale = self.lhs.abs().max(self.rhs.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.lhs - self.rhs) / scale
        }
    }

    pub fn holds_with(&self, rel_tol: f64) -> bool {
        let scale = self.lhs.abs().max(self.rhs.abs());
        self.lhs - self.rhs >= -(rel_tol * scale + INEQUALITY_ABS_FLOOR)
    }

    pub fn holds(&self) -> bool {
        self.holds_with(INEQUALITY_REL_TOL)
    }
}

/// The two Hölder lower bounds for ∫|u|^p dx at each sample.
#[derive(Debug, Clone, PartialEq)]
pub struct HolderChain {
    /// ∫|u|^p ≥ K₁(t+R)^{−n(p−1)}|F₀|^p
    pub volume_bound: Vec<Inequality>,
    /// ∫|u|^p ≥ |F₁|^p / I(t)^{p−1}
    pub test_function_bound: Vec<Inequality>,
}

pub fn check_holder_chain(
    series: &DiagnosticsSeries,
    exponents: &ExponentSet,
    support_radius: f64,
    i_values: &[f64],
) -> Result<HolderChain> {
    if i_values.len() != series.len() {
        return Err(Error::GridMismatch(format!(
            "{} I(t) values for {} samples",
            i_values.len(),
            series.len()
        )));
    }
    let p = exponents.p;
    let volume_bound = series
        .times
        .iter()
        .zip(&series.f0)
        .zip(&series.lp)
        .map(|((&t, &f0), &lp)| Inequality {
            lhs: lp,
            rhs: exponents.k1 * (t + support_radius).powf(-exponents.q) * f0.abs().powf(p),
        })
        .collect();
    let test_function_bound = series
        .f1
        .iter()
        .zip(&series.lp)
        .zip(i_values)
        .map(|((&f1, &lp), &i)| Inequality { lhs: lp, rhs: f1.abs().powf(p) / i.powf(p - 1.0) })
        .collect();
    Ok(HolderChain { volume_bound, test_function_bound })
}

/// I(t) at every sample time, evaluated in parallel.
pub fn i_values_for(series: &DiagnosticsSeries, ctx: &TestFunctionContext, p: f64, support_radius: f64) -> Result<Vec<f64>> {
    series
        .times
        .par_iter()
        .map(|&t| ctx.i_integral(p, support_radius, t).map(|i| i.value))
        .collect()
}

/// ∫(u₀ + u₁)φ₁ dx and ∫u₀φ₁ dx.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataIntegrals {
    pub total: f64,
    pub displacement: f64,
}

impl DataIntegrals {
    pub fn from_initial_state(state: &RadialState, table: &PhiTable) -> Self {
        let phi = |i: usize| table.log_phi1[i].exp();
        let total = radial_integral(
            state.dim,
            state.h,
            state.u.iter().zip(&state.v).enumerate().map(|(i, (u, v))| {
                let s = u + v;
                if s == 0.0 {
                    0.0
                } else {
                    s * phi(i)
                }
            }),
        );
        let displacement = radial_integral(
            state.dim,
            state.h,
            state.u.iter().enumerate().map(|(i, &u)| if u == 0.0 { 0.0 } else { u * phi(i) }),
        );
        Self { total, displacement }
    }
}

/// ½(1 − e^{−2t})∫(u₀+u₁)φ₁ + e^{−2t}∫u₀φ₁.
pub fn lemma22_lower_bound(t: f64, data: &DataIntegrals) -> f64 {
    let decay = (-2.0 * t).exp();
    0.5 * (1.0 - decay) * data.total + decay * data.displacement
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub window: [f64; 2],
    pub samples: usize,
    /// Least-squares slope of ln F₀ against ln(t+R).
    pub fitted_exponent: f64,
    /// Exponent from the joint fit ln F₀ = c + α ln(t+R) + β ln ln t
    /// (falls back to the plain slope when the window reaches t ≤ 1).
    pub log_model_exponent: f64,
    /// β of the joint fit.
    pub log_model_power: f64,
    /// Slope of F₀/(t+R)^a against ln t.
    pub log_factor_slope: f64,
    /// inf over the window of F₀/(t+R)^a.
    #[serde(rename = "K0_estimate")]
    pub k0_estimate: f64,
}

pub const MIN_FIT_SAMPLES: usize = 10;

/// Default window [0.3, 0.9]·t_end.
pub fn default_window(t_end: f64) -> [f64; 2] {
    [0.3 * t_end, 0.9 * t_end]
}

pub fn fit_growth(
    times: &[f64],
    f0: &[f64],
    exponents: &ExponentSet,
    support_radius: f64,
    window: [f64; 2],
) -> Result<GrowthFit> {
    let picked: Vec<(f64, f64)> = times
        .iter()
        .zip(f0)
        .filter(|(&t, _)| t >= window[0] && t <= window[1])
        .map(|(&t, &f)| (t, f))
        .collect();
    if picked.len() < MIN_FIT_SAMPLES {
        return Err(Error::SeriesTooShort { needed: MIN_FIT_SAMPLES, got: picked.len() });
    }
    if let Some(&(t, _)) = picked.iter().find(|(t, f)| !(*f > 0.0) || *t <= 0.0) {
        return Err(Error::NonPositiveWindow(t));
    }
    let a = exponents.a;
    let log_f: Vec<f64> = picked.iter().map(|(_, f)| f.ln()).collect();
    let log_tr: Vec<f64> = picked.iter().map(|(t, _)| (t + support_radius).ln()).collect();
    let fitted_exponent = linear_slope(&log_tr, &log_f);

    let (log_model_exponent, log_model_power) = if picked.iter().all(|(t, _)| *t > 1.0) {
        let lnln: Vec<f64> = picked.iter().map(|(t, _)| t.ln().ln()).collect();
        let coef = least_squares(&[&log_tr, &lnln], &log_f);
        (coef[1], coef[2])
    } else {
        (fitted_exponent, 0.0)
    };

    let scaled: Vec<f64> = picked.iter().map(|(t, f)| f / (t + support_radius).powf(a)).collect();
    let ln_t: Vec<f64> = picked.iter().map(|(t, _)| t.ln()).collect();
    let log_factor_slope = linear_slope(&ln_t, &scaled);
    let k0_estimate = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(GrowthFit {
        window,
        samples: picked.len(),
        fitted_exponent,
        log_model_exponent,
        log_model_power,
        log_factor_slope,
        k0_estimate,
    })
}

fn linear_slope(x: &[f64], y: &[f64]) -> f64 {
    least_squares(&[x], y)[1]
}

/// Ordinary least squares with an intercept, via normal equations on
/// centered columns (at most three regressors here).
fn least_squares(columns: &[&[f64]], y: &[f64]) -> Vec<f64> {
    let m = y.len() as f64;
    let k = columns.len();
    let means: Vec<f64> = columns.iter().map(|c| c.iter().sum::<f64>() / m).collect();
    let ymean = y.iter().sum::<f64>() / m;
    let mut a = vec![vec![0.0; k]; k];
    let mut b = vec![0.0; k];
    for row in 0..y.len() {
        for i in 0..k {
            let xi = columns[i][row] - means[i];
            b[i] += xi * (y[row] - ymean);
            for j in 0..k {
                a[i][j] += xi * (columns[j][row] - means[j]);
            }
        }
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..k {
        let pivot = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..k {
            let f = a[row][col] / a[col][col];
            for c in col..k {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut coef = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|j| a[i][j] * coef[j]).sum();
        coef[i] = (b[i] - s) / a[i][i];
    }
    let intercept = ymean - coef.iter().zip(&means).map(|(c, m)| c * m).sum::<f64>();
    std::iter::once(intercept).chain(coef).collect()
}

/// Fills the residual columns of `series` for CSV export.
pub fn annotate_series(
    series: &mut DiagnosticsSeries,
    exponents: &ExponentSet,
    support_radius: f64,
    i_values: &[f64],
    data: &DataIntegrals,
) -> Result<()> {
    if series.len() >= 3 {
        let d2 = check_d2f0_identity(series)?;
        series.residuals.insert("res_2_2p".into(), d2);
    }
    let chain = check_holder_chain(series, exponents, support_radius, i_values)?;
    series
        .residuals
        .insert("res_2_3".into(), chain.volume_bound.iter().map(Inequality::relative_margin).collect());
    series.residuals.insert(
        "res_2_4".into(),
        chain.test_function_bound.iter().map(Inequality::relative_margin).collect(),
    );
    let lemma: Vec<f64> = series
        .times
        .iter()
        .zip(&series.f1)
        .map(|(&t, &f1)| f1 - lemma22_lower_bound(t, data))
        .collect();
    series.residuals.insert("lemma22_margin".into(), lemma);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criticality::{exponent_set, unit_ball_volume};
    use crate::wave_solver::{make_initial_state, InitialDataSpec};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn indicator_state(n: usize, h: f64, radius: f64, value: f64, t: f64) -> RadialState {
        let len = ((radius + 1.0) / h).round() as usize + 1;
        let mut s = RadialState::from_fn(n, h, len, |r| if r < radius { value } else { 0.0 }, |_| 0.0);
        // Midpoint value at a jump that lands on a node.
        let j = (radius / h).round() as usize;
        if (j as f64 * h - radius).abs() < 1e-9 * h {
            s.u[j] = 0.5 * value;
        }
        s.t = t;
        s
    }

    #[test]
    fn zero_state_functionals_vanish() {
        let s = RadialState::zeros(4, 0.01, 200);
        let ctx = TestFunctionContext::new(4).unwrap();
        assert_eq!(F0(&s), 0.0);
        assert_eq!(F1(&s, &ctx), 0.0);
        assert_eq!(lp_integral(&s, 2.0), 0.0);
    }

    #[test]
    fn f0_of_unit_ball_indicator() {
        let s = indicator_state(4, 1e-3, 1.0, 1.0, 0.0);
        assert_abs_diff_eq!(F0(&s), std::f64::consts::PI.powi(2) / 2.0, epsilon = 1e-4);
    }

    #[test]
    fn f0_and_f1_match_refined_grid_oracle() {
        let data = InitialDataSpec::bump(1.0, 1.0);
        let ctx = TestFunctionContext::new(3).unwrap();
        let coarse = RadialState::from_fn(3, 1e-3, 1501, |r| data.profile(r), |_| 0.0);
        // Oracle: Gauss–Legendre on the analytic profile.
        let f0_ref = ctx.ball_integral(1.0, |r| data.profile(r));
        let f1_ref = ctx.ball_integral(1.0, |r| data.profile(r) * ctx.phi1(r).unwrap());
        assert_relative_eq!(F0(&coarse), f0_ref, max_relative = 1e-6);
        assert_relative_eq!(F1(&coarse, &ctx), f1_ref, max_relative = 1e-6);
        let table = PhiTable::new(&ctx, 1e-3, 1501);
        assert_relative_eq!(f1_with_table(&coarse, &table), F1(&coarse, &ctx), max_relative = 1e-13);
    }

    #[test]
    fn f1_of_small_ball_is_continuous_at_origin() {
        let ctx = TestFunctionContext::new(4).unwrap();
        let eps = 0.01;
        let s = indicator_state(4, 1e-5, eps, 1.0, 0.0);
        let expect = ctx.phi1(0.0).unwrap() * unit_ball_volume(4) * eps.powi(4);
        assert_relative_eq!(F1(&s, &ctx), expect, max_relative = 1e-3);
    }

    #[test]
    fn d2f0_identity_needs_three_samples() {
        let series = DiagnosticsSeries { times: vec![0.0, 1.0], ..Default::default() };
        assert!(matches!(check_d2f0_identity(&series), Err(Error::SeriesTooShort { .. })));
    }

    #[test]
    fn d2f0_of_zero_run_is_zero() {
        let series = DiagnosticsSeries {
            times: vec![0.0, 0.1, 0.2, 0.3],
            f0: vec![0.0; 4],
            f1: vec![0.0; 4],
            lp: vec![0.0; 4],
            umax: vec![0.0; 4],
            residuals: BTreeMap::new(),
        };
        let r = check_d2f0_identity(&series).unwrap();
        assert!(r[0].is_nan() && r[3].is_nan());
        assert_eq!(&r[1..3], &[0.0, 0.0]);
    }

    #[test]
    fn holder_volume_bound_is_sharp_for_constants() {
        let (n, t, big_r, c) = (4, 0.5, 1.0, 0.7);
        let ex = exponent_set(n, 2.0).unwrap();
        let s = indicator_state(n, 1e-4, t + big_r, c, t);
        let series = DiagnosticsSeries {
            times: vec![t],
            f0: vec![F0(&s)],
            f1: vec![0.0],
            lp: vec![lp_integral(&s, 2.0)],
            umax: vec![c],
            residuals: BTreeMap::new(),
        };
        let chain = check_holder_chain(&series, &ex, big_r, &[1.0]).unwrap();
        let ineq = chain.volume_bound[0];
        assert_relative_eq!(ineq.lhs, ineq.rhs, max_relative = 1e-3);
    }

    #[test]
    fn lemma22_limits() {
        let data = DataIntegrals { total: 3.0, displacement: 2.0 };
        assert_eq!(lemma22_lower_bound(0.0, &data), 2.0);
        assert_abs_diff_eq!(lemma22_lower_bound(60.0, &data), 1.5, epsilon = 1e-15);
    }

    #[test]
    fn growth_fit_recovers_synthetic_laws() {
        let ex = exponent_set(4, 2.0).unwrap();
        let big_r = 1.0;
        let times: Vec<f64> = (0..200).map(|i| 2.0 + i as f64 * 0.5).collect();
        let pure: Vec<f64> = times.iter().map(|t| (t + big_r).powf(ex.a)).collect();
        let fit = fit_growth(&times, &pure, &ex, big_r, [0.0, 1e9]).unwrap();
        assert_abs_diff_eq!(fit.fitted_exponent, ex.a, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.log_factor_slope, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.log_model_power, 0.0, epsilon = 1e-7);

        let logged: Vec<f64> = times.iter().map(|t| (t + big_r).powf(ex.a) * t.ln()).collect();
        let fit = fit_growth(&times, &logged, &ex, big_r, [0.0, 1e9]).unwrap();
        assert_abs_diff_eq!(fit.log_factor_slope, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(fit.log_model_exponent, ex.a, epsilon = 1e-6);
        assert_abs_diff_eq!(fit.log_model_power, 1.0, epsilon = 1e-6);
        let early = fit_growth(&times, &logged, &ex, big_r, [2.0, 20.0]).unwrap();
        let late = fit_growth(&times, &logged, &ex, big_r, [50.0, 100.0]).unwrap();
        assert!(late.k0_estimate > early.k0_estimate);
    }

    #[test]
    fn growth_fit_rejects_bad_windows() {
        let ex = exponent_set(4, 2.0).unwrap();
        let times: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        let mut f = vec![1.0; 20];
        assert!(matches!(
            fit_growth(&times, &f, &ex, 1.0, [0.0, 5.0]),
            Err(Error::SeriesTooShort { .. })
        ));
        f[12] = 0.0;
        assert!(matches!(fit_growth(&times, &f, &ex, 1.0, [0.0, 100.0]), Err(Error::NonPositiveWindow(_))));
    }

    #[test]
    fn energy_of_large_bump_is_negative() {
        let cfg = SimulationConfig::new(4, 2.0, 1.0, 1e-3, 1.0, InitialDataSpec::bump(200.0, 1.0));
        let s = make_initial_state(&cfg);
        assert!(energy(&s, 2.0) < 0.0);
        let small = SimulationConfig::new(4, 2.0, 1.0, 1e-3, 1.0, InitialDataSpec::bump(0.1, 1.0));
        assert!(energy(&make_initial_state(&small), 2.0) > 0.0);
    }

    #[test]
    fn inequality_tolerance_policy() {
        assert!(Inequality { lhs: 0.0, rhs: 0.0 }.holds());
        assert!(Inequality { lhs: 1.0, rhs: 1.0 + 5e-9 }.holds());
        assert!(!Inequality { lhs: 1.0, rhs: 1.0 + 5e-8 }.holds());
        assert!(Inequality { lhs: 0.0, rhs: 5e-13 }.holds());
    }
}
