//! Radon transform of radial functions.
//!
//! For radial f the hyperplane integral over {x·w = ρ} does not depend on w:
//!
//!   R f(ρ) = c_n ∫_ρ^∞ f(r)(r² − ρ²)^{(n−3)/2} r dr,   c_n = |S^{n−2}|.
//!
//! The substitution s = √(r² − ρ²) turns this into c_n ∫₀^∞ f(√(ρ²+s²)) s^{n−2} ds,
//! which has a smooth integrand for every n ≥ 2.

use std::path::Path;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criticality::{sphere_area, ExponentSet};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_linear_to, interp_uniform, trapezoid, GaussLegendre};
use crate::wave_solver::RadialState;

const SEGMENT_POINTS: usize = 8;
const FN_PANELS: usize = 64;
const FN_POINTS: usize = 16;

fn segment_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(SEGMENT_POINTS))
}

fn fn_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(FN_POINTS))
}

/// c_n = |S^{n−2}|; for n = 2 this is 2 (the two rays of a line).
pub fn radon_constant(n: usize) -> f64 {
    sphere_area(n - 1)
}

/// Radon transform at ρ of a radial function supported in r ≤ `support`.
pub fn radon_radial_fn<F: Fn(f64) -> f64>(f: F, n: usize, rho: f64, support: f64) -> f64 {
    let rho = rho.abs();
    if rho >= support {
        return 0.0;
    }
    let upper = ((support - rho) * (support + rho)).sqrt();
    let k = (n - 2) as i32;
    radon_constant(n)
        * fn_rule().integrate_composite(0.0, upper, FN_PANELS, |s| {
            f((rho * rho + s * s).sqrt()) * s.powi(k)
        })
}

/// Radon transform at ρ of the linear interpolant of nodal values on rᵢ = i·h.
pub fn radon_radial_grid(values: &[f64], h: f64, n: usize, rho: f64) -> f64 {
    let rho = rho.abs();
    let Some(last) = values.iter().rposition(|&v| v != 0.0) else {
        return 0.0;
    };
    let end = (last + 1).min(values.len() - 1);
    let first = (rho / h).floor() as usize;
    if first >= end {
        return 0.0;
    }
    let rule = segment_rule();
    let k = (n - 2) as i32;
    let mut acc = 0.0;
    for j in first..end {
        let (g0, g1) = (values[j], values[j + 1]);
        if g0 == 0.0 && g1 == 0.0 {
            continue;
        }
        let r0 = j as f64 * h;
        let lo = r0.max(rho);
        let hi = r0 + h;
        let s_lo = ((lo - rho) * (lo + rho)).sqrt();
        let s_hi = ((hi - rho) * (hi + rho)).sqrt();
        let slope = (g1 - g0) / h;
        acc += rule.integrate(s_lo, s_hi, |s| {
            let r = (rho * rho + s * s).sqrt();
            (g0 + slope * (r - r0)) * s.powi(k)
        });
    }
    radon_constant(n) * acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadonKind {
    OfU,
    OfAbsU,
    OfAbsUPowP,
}

impl RadonKind {
    pub fn apply(self, u: f64, p: f64) -> f64 {
        match self {
            RadonKind::OfU => u,
            RadonKind::OfAbsU => u.abs(),
            RadonKind::OfAbsUPowP => u.abs().powf(p),
        }
    }
}

/// R(g)(ρ, t) on the solver's r-grid, ρ ≥ 0 only (the transform is even).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadonSection {
    pub t: f64,
    pub n: usize,
    pub h: f64,
    pub kind: RadonKind,
    pub values: Vec<f64>,
}

impl RadonSection {
    pub fn rho(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn at(&self, rho: f64) -> f64 {
        interp_uniform(&self.values, self.h, rho.abs())
    }

    /// ∫_ℝ R(g)(ρ) dρ, which equals ∫ g dx.
    pub fn mass(&self) -> f64 {
        2.0 * trapezoid(&self.values, self.h)
    }

    pub fn max_abs_beyond(&self, rho: f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(i, _)| self.rho(*i) > rho)
            .fold(0.0, |m, (_, v)| m.max(v.abs()))
    }

    pub fn write_csv<P: AsRef<Path>>(&self, path: P, p: f64, support_radius: f64) -> Result<()> {
        let path = path.as_ref();
        let rows: Vec<Vec<f64>> =
            self.values.iter().enumerate().map(|(i, &v)| vec![self.rho(i), v]).collect();
        crate::io::write_csv(path, &["rho", "value"], &rows)?;
        let sidecar = serde_json::json!({
            "t": self.t,
            "kind": self.kind,
            "n": self.n,
            "p": p,
            "R": support_radius,
        });
        crate::io::write_json(path.with_extension("json"), &sidecar)
    }
}

pub fn radon_section(state: &RadialState, kind: RadonKind, p: f64) -> RadonSection {
    let field: Vec<f64> = state.u.iter().map(|&u| kind.apply(u, p)).collect();
    let values = (0..field.len())
        .into_par_iter()
        .map(|i| radon_radial_grid(&field, state.h, state.dim, i as f64 * state.h))
        .collect();
    RadonSection { t: state.t, n: state.dim, h: state.h, kind, values }
}

/// Residual of ∂ₜ²R(u) − ∂_ρ²R(u) − R(|u|^p) at the interior time levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveResidual {
    pub times: Vec<f64>,
    /// L² norm over 0 ≤ ρ ≤ t + R.
    pub l2: Vec<f64>,
    /// l2 divided by the larger of ‖∂ₜ²R(u)‖ and ‖R(|u|^p)‖.
    pub relative: Vec<f64>,
}

impl WaveResidual {
    pub fn max_l2(&self) -> f64 {
        self.l2.iter().fold(0.0, |m, &v| m.max(v))
    }

    pub fn max_relative(&self) -> f64 {
        self.relative.iter().fold(0.0, |m, &v| m.max(v))
    }
}

pub fn check_1d_wave(
    u_sections: &[RadonSection],
    source_sections: &[RadonSection],
    support_radius: f64,
) -> Result<WaveResidual> {
    let len = u_sections.len();
    if len < 3 {
        return Err(Error::SeriesTooShort { needed: 3, got: len });
    }
    if source_sections.len() != len {
        return Err(Error::GridMismatch(format!(
            "{len} sections of u against {} of the source",
            source_sections.len()
        )));
    }
    let first = &u_sections[0];
    let (h, nodes) = (first.h, first.values.len());
    for s in u_sections.iter().chain(source_sections) {
        if s.h != h || s.values.len() != nodes {
            return Err(Error::GridMismatch("sections live on different ρ-grids".into()));
        }
    }
    for (a, b) in u_sections.iter().zip(source_sections) {
        if a.t != b.t {
            return Err(Error::GridMismatch(format!("times {} and {} differ", a.t, b.t)));
        }
    }
    let dt = u_sections[1].t - u_sections[0].t;
    for w in u_sections.windows(2) {
        if ((w[1].t - w[0].t) - dt).abs() > 1e-9 * dt.abs().max(1e-300) {
            return Err(Error::GridMismatch("time samples are not uniform".into()));
        }
    }

    let mut out = WaveResidual { times: vec![], l2: vec![], relative: vec![] };
    for k in 1..len - 1 {
        let (prev, cur, next) = (&u_sections[k - 1].values, &u_sections[k].values, &u_sections[k + 1].values);
        let src = &source_sections[k].values;
        let t = u_sections[k].t;
        let cone = (((t + support_radius) / h).floor() as usize).min(nodes - 2);
        let mut res2 = Vec::with_capacity(cone + 1);
        let mut tt2 = Vec::with_capacity(cone + 1);
        let mut src2 = Vec::with_capacity(cone + 1);
        for i in 0..=cone {
            let d2t = (next[i] - 2.0 * cur[i] + prev[i]) / (dt * dt);
            let d2r = if i == 0 {
                2.0 * (cur[1] - cur[0]) / (h * h)
            } else {
                (cur[i + 1] - 2.0 * cur[i] + cur[i - 1]) / (h * h)
            };
            let r = d2t - d2r - src[i];
            res2.push(r * r);
            tt2.push(d2t * d2t);
            src2.push(src[i] * src[i]);
        }
        let l2 = (2.0 * trapezoid(&res2, h)).sqrt();
        let scale = (2.0 * trapezoid(&tt2, h)).sqrt().max((2.0 * trapezoid(&src2, h)).sqrt());
        out.times.push(t);
        out.l2.push(l2);
        out.relative.push(l2 / scale.max(crate::diagnostics::RESIDUAL_EPS));
    }
    Ok(out)
}

/// ½∫₀^{(t−ρ−R)/2} ∫|u|^p dx ds from a sampled series; 0 when the range is empty.
pub fn dalembert_lower_bound(times: &[f64], lp: &[f64], rho: f64, t: f64, support_radius: f64) -> Result<f64> {
    let upper = 0.5 * (t - rho.abs() - support_radius);
    if upper <= 0.0 || times.is_empty() {
        return Ok(0.0);
    }
    if times.len() != lp.len() {
        return Err(Error::GridMismatch("times and Lp differ in length".into()));
    }
    integrate_linear_to(times, lp, upper).map(|v| 0.5 * v).ok_or_else(|| {
        Error::GridMismatch(format!(
            "series ends at t = {} before the bound's upper limit {upper}",
            times[times.len() - 1]
        ))
    })
}

/// value / (t − ρ − R)^{n − (n−1)p/2}.
pub fn power_margin(value: f64, rho: f64, t: f64, support_radius: f64, exponents: &ExponentSet) -> f64 {
    value / (t - rho - support_radius).powf(exponents.radon_growth_exponent())
}

/// R(u)(ρ, t) / (t − ρ − R)^{n−(n−1)p/2}; requires t − ρ − R ≥ 1.
pub fn power_lower_bound_check(
    section: &RadonSection,
    rho: f64,
    support_radius: f64,
    exponents: &ExponentSet,
) -> Result<f64> {
    let gap = section.t - rho - support_radius;
    if gap < 1.0 {
        return Err(Error::NotApplicable(format!("t - rho - R = {gap} is below 1")));
    }
    Ok(power_margin(section.at(rho), rho, section.t, support_radius, exponents))
}
