//! The one-dimensional transform
//!
//!   T f(ρ) = (t − ρ + R)^{−(n−1)/2} ∫_ρ^{t+R} f(r)(r − ρ)^{(n−3)/2} dr,
//!
//! the centred Hardy–Littlewood maximal function, and the weighted L^p
//! estimates built on them. Fields live on a uniform grid over [0, t + R]
//! and are extended by zero to the whole line.

use std::path::Path;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criticality::ExponentSet;
use crate::diagnostics::lp_integral;
use crate::error::{Error, Result};
use crate::quadrature::{trapezoid, GaussLegendre};
use crate::radon::RadonSection;
use crate::wave_solver::RadialState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineField {
    pub n: usize,
    pub t: f64,
    #[serde(rename = "R")]
    pub support_radius: f64,
    pub h: f64,
    pub values: Vec<f64>,
}

impl LineField {
    /// Nodes spread evenly over [0, t + R].
    pub fn new(n: usize, t: f64, support_radius: f64, values: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        if values.len() < 2 {
            return Err(Error::SeriesTooShort { needed: 2, got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("field values must be finite".into()));
        }
        let end = t + support_radius;
        if !(end > 0.0) {
            return Err(Error::InvalidConfig(format!("t + R must be positive, got {end}")));
        }
        let h = end / (values.len() - 1) as f64;
        Ok(Self { n, t, support_radius, h, values })
    }

    pub fn from_fn(n: usize, t: f64, support_radius: f64, nodes: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = (t + support_radius) / (nodes.max(2) - 1) as f64;
        Self::new(n, t, support_radius, (0..nodes.max(2)).map(|i| f(i as f64 * h)).collect())
    }

    /// The section restricted to 0 ≤ ρ ≤ t + R, on the section's own grid.
    pub fn from_section(section: &RadonSection, support_radius: f64) -> Result<Self> {
        let end = section.t + support_radius;
        let last = ((end / section.h) * (1.0 + 1e-12)).floor() as usize;
        let last = last.min(section.values.len() - 1).max(1);
        let values = section.values[..=last].to_vec();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("field values must be finite".into()));
        }
        Ok(Self { n: section.n, t: section.t, support_radius, h: section.h, values })
    }

    pub fn end(&self) -> f64 {
        self.t + self.support_radius
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn abs(&self) -> Self {
        Self { values: self.values.iter().map(|v| v.abs()).collect(), ..self.clone() }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self { values: self.values.iter().map(|v| alpha * v).collect(), ..self.clone() }
    }

    fn lp_norm_of(&self, values: &[f64], p: f64) -> f64 {
        let powered: Vec<f64> = values.iter().map(|v| v.abs().powf(p)).collect();
        trapezoid(&powered, self.h).powf(1.0 / p)
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        self.lp_norm_of(&self.values, p)
    }
}

fn rule_for(n: usize) -> &'static GaussLegendre {
    // f(ρ + s²)s^{n−2} is a polynomial of degree n on each segment, so
    // n/2 + 1 points integrate the interpolant exactly.
    static RULES: OnceLock<Vec<GaussLegendre>> = OnceLock::new();
    let rules = RULES.get_or_init(|| (0..=40).map(|n| GaussLegendre::new(n / 2 + 1)).collect());
    rules.get(n).unwrap_or_else(|| &rules[rules.len() - 1])
}

/// T f at ρ for the piecewise-linear interpolant of the field.
pub fn transform_t(f: &LineField, rho: f64) -> f64 {
    let end = f.end();
    let span = end - rho;
    let last = f.values.len() - 1;
    if span <= 0.0 {
        return if span == 0.0 { 2.0 * f.values[last] / (f.n - 1) as f64 } else { 0.0 };
    }
    let rule = rule_for(f.n);
    let k = (f.n - 2) as i32;
    let first = if rho <= 0.0 { 0 } else { ((rho / f.h).floor() as usize).min(last) };
    let mut acc = 0.0;
    for j in first..last {
        let (g0, g1) = (f.values[j], f.values[j + 1]);
        if g0 == 0.0 && g1 == 0.0 {
            continue;
        }
        let x0 = f.x(j);
        let lo = x0.max(rho);
        let hi = (x0 + f.h).min(end);
        if hi <= lo {
            continue;
        }
        let slope = (g1 - g0) / f.h;
        acc += rule.integrate((lo - rho).sqrt(), (hi - rho).sqrt(), |s| {
            (g0 + slope * (rho + s * s - x0)) * s.powi(k)
        });
    }
    2.0 * acc * span.powf(-((f.n - 1) as f64) / 2.0)
}

/// T f at every node of the field.
pub fn transform_t_nodes(f: &LineField) -> Vec<f64> {
    (0..f.values.len()).into_par_iter().map(|i| transform_t(f, f.x(i))).collect()
}

/// T f at ρ for an arbitrary function, with panel breaks at the given
/// points (e.g. jumps of f).
pub fn transform_t_fn<F: Fn(f64) -> f64>(
    f: F,
    n: usize,
    t: f64,
    support_radius: f64,
    rho: f64,
    breakpoints: &[f64],
) -> f64 {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    let rule = RULE.get_or_init(|| GaussLegendre::new(16));
    let end = t + support_radius;
    let span = end - rho;
    if span <= 0.0 {
        return if span == 0.0 { 2.0 * f(rho) / (n - 1) as f64 } else { 0.0 };
    }
    let mut cuts: Vec<f64> = vec![0.0];
    cuts.extend(breakpoints.iter().filter(|&&b| b > rho && b < end).map(|b| (b - rho).sqrt()));
    cuts.push(span.sqrt());
    cuts.sort_by(f64::total_cmp);
    let k = (n - 2) as i32;
    let integral: f64 = cuts
        .windows(2)
        .map(|w| rule.integrate_composite(w[0], w[1], 8, |s| f(rho + s * s) * s.powi(k)))
        .sum();
    2.0 * integral * span.powf(-((n - 1) as f64) / 2.0)
}

/// Cumulative integral of the zero-extended piecewise-linear |f|.
struct Cumulative<'a> {
    h: f64,
    values: &'a [f64],
    nodes: Vec<f64>,
}

impl<'a> Cumulative<'a> {
    fn new(values: &'a [f64], h: f64) -> Self {
        let mut nodes = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        nodes.push(0.0);
        for w in values.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            nodes.push(acc);
        }
        Self { h, values, nodes }
    }

    fn at(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let last = self.values.len() - 1;
        let pos = y / self.h;
        if pos >= last as f64 {
            return self.nodes[last];
        }
        let j = pos.floor() as usize;
        let dx = y - j as f64 * self.h;
        let (g0, g1) = (self.values[j], self.values[j + 1]);
        let g_y = g0 + (g1 - g0) * dx / self.h;
        self.nodes[j] + 0.5 * dx * (g0 + g_y)
    }
}

/// Centred maximal function of |f| at x, with radii running over the
/// multiples of h until the window covers the whole support.
pub fn maximal_function(f: &LineField, x: f64) -> f64 {
    let abs: Vec<f64> = f.values.iter().map(|v| v.abs()).collect();
    let cum = Cumulative::new(&abs, f.h);
    maximal_with(&cum, f, x)
}

fn maximal_with(cum: &Cumulative, f: &LineField, x: f64) -> f64 {
    let reach = x.abs().max((f.end() - x).abs());
    let radii = (reach / f.h).ceil() as usize + 1;
    (1..=radii)
        .map(|k| {
            let r = k as f64 * f.h;
            (cum.at(x + r) - cum.at(x - r)) / (2.0 * r)
        })
        .fold(0.0, f64::max)
}

/// M(|f|) at every node.
pub fn maximal_function_nodes(f: &LineField) -> Vec<f64> {
    let abs: Vec<f64> = f.values.iter().map(|v| v.abs()).collect();
    let cum = Cumulative::new(&abs, f.h);
    let last = f.values.len() - 1;
    let total = cum.nodes[last];
    (0..=last)
        .into_par_iter()
        .map(|j| {
            let reach = j.max(last - j);
            (1..=reach)
                .map(|k| {
                    let hi = if j + k >= last { total } else { cum.nodes[j + k] };
                    let lo = if k >= j { 0.0 } else { cum.nodes[j - k] };
                    (hi - lo) / (2.0 * k as f64 * f.h)
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

/// 2M(|f|) − |T f| at every node.
pub fn check_pointwise_domination(f: &LineField) -> Vec<f64> {
    let tf = transform_t_nodes(f);
    let m = maximal_function_nodes(f);
    m.iter().zip(&tf).map(|(m, t)| 2.0 * m - t.abs()).collect()
}

/// ‖T f‖_p / ‖f‖_p over [0, t + R].
pub fn lp_operator_ratio(f: &LineField, p: f64) -> Result<f64> {
    let denom = f.lp_norm(p);
    if denom == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let tf = transform_t_nodes(f);
    Ok(f.lp_norm_of(&tf, p) / denom)
}

/// A seeded nonnegative field: a few smooth bumps and plateaus of random
/// position, width and height, laid out relative to [0, t + R]. A seed
/// names the same shape at every horizon, so comparing horizons isolates
/// the t-dependence of the operator from sampling noise.
pub fn random_nonnegative_field(n: usize, t: f64, support_radius: f64, nodes: usize, seed: u64) -> Result<LineField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let end = t + support_radius;
    let h = end / (nodes.max(2) - 1) as f64;
    let pieces = rng.gen_range(1..=6);
    let mut shapes = Vec::with_capacity(pieces);
    for _ in 0..pieces {
        let centre = rng.gen_range(0.0..=end);
        let width = (2.0 * h) * ((0.5 * end) / (2.0 * h)).powf(rng.gen::<f64>());
        let height = rng.gen_range(0.05..=1.0);
        let plateau = rng.gen_bool(0.3);
        shapes.push((centre, width, height, plateau));
    }
    LineField::from_fn(n, t, support_radius, nodes, |x| {
        shapes
            .iter()
            .map(|&(c, w, a, plateau)| {
                let z = (x - c) / w;
                if z.abs() >= 1.0 {
                    0.0
                } else if plateau {
                    a
                } else {
                    a * (1.0 - z * z).powi(2)
                }
            })
            .sum()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformitySweep {
    /// (seed, t, ratio) for every sample.
    pub rows: Vec<(u64, f64, f64)>,
    /// Largest ratio per t.
    pub max_by_t: Vec<(f64, f64)>,
    /// (max − min)/min over `max_by_t`.
    pub spread: f64,
}

impl UniformitySweep {
    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let rows: Vec<Vec<f64>> = self.rows.iter().map(|&(s, t, r)| vec![s as f64, t, r]).collect();
        crate::io::write_csv(path, &["seed", "t", "ratio"], &rows)
    }
}

/// Largest ‖Tf‖_p/‖f‖_p over `samples` random fields at each t.
pub fn operator_uniformity(
    n: usize,
    p: f64,
    support_radius: f64,
    times: &[f64],
    samples: u64,
    nodes: usize,
) -> Result<UniformitySweep> {
    let mut rows = Vec::new();
    let mut max_by_t = Vec::new();
    for &t in times {
        let ratios: Vec<(u64, f64, f64)> = (0..samples)
            .into_par_iter()
            .map(|seed| {
                let f = random_nonnegative_field(n, t, support_radius, nodes, seed)?;
                Ok((seed, t, lp_operator_ratio(&f, p)?))
            })
            .collect::<Result<_>>()?;
        max_by_t.push((t, ratios.iter().fold(0.0, |m: f64, r| m.max(r.2))));
        rows.extend(ratios);
    }
    let hi = max_by_t.iter().fold(f64::NEG_INFINITY, |m, r| m.max(r.1));
    let lo = max_by_t.iter().fold(f64::INFINITY, |m, r| m.min(r.1));
    let spread = if max_by_t.is_empty() { 0.0 } else { (hi - lo) / lo };
    Ok(UniformitySweep { rows, max_by_t, spread })
}

/// The weighted estimate needs 1 < p ≤ 2, which at the critical exponent
/// means n ≥ 4.
pub fn weighted_chain_applicable(exponents: &ExponentSet) -> Result<()> {
    if exponents.n < 4 {
        return Err(Error::NotApplicable(format!(
            "the weighted L^p step needs p <= 2, but p_c({}) = {:.6} > 2",
            exponents.n, exponents.p_c
        )));
    }
    if exponents.p > 2.0 {
        return Err(Error::NotApplicable(format!("the weighted L^p step needs p <= 2, got p = {}", exponents.p)));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedInequality {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl WeightedInequality {
    /// lhs/rhs, taken as 0 when both sides vanish.
    pub fn ratio(&self) -> f64 {
        if self.lhs == 0.0 && self.rhs == 0.0 {
            0.0
        } else {
            self.lhs / self.rhs
        }
    }
}

/// lhs = ∫₀^{t+R} R(|u|)^p (t−ρ+R)^{−(n−1)p/2} ρ^{n−1−(n−1)p/2} dρ, rhs = ∫|u|^p dx.
pub fn weighted_inequality_check(
    radon_abs_u: &RadonSection,
    state: &RadialState,
    exponents: &ExponentSet,
    support_radius: f64,
) -> Result<WeightedInequality> {
    weighted_chain_applicable(exponents)?;
    if radon_abs_u.t != state.t || radon_abs_u.h != state.h {
        return Err(Error::GridMismatch("section and state differ in t or h".into()));
    }
    let (n, p, t) = (exponents.n as f64, exponents.p, state.t);
    let end = t + support_radius;
    let decay = -(n - 1.0) * p / 2.0;
    let growth = (n - 1.0) - (n - 1.0) * p / 2.0;
    let integrand: Vec<f64> = radon_abs_u
        .values
        .iter()
        .enumerate()
        .take_while(|(i, _)| radon_abs_u.rho(*i) <= end * (1.0 + 1e-12))
        .map(|(i, v)| {
            let rho = radon_abs_u.rho(i);
            // The weight is singular at ρ = t + R, where R(|u|) vanishes.
            if *v == 0.0 || end - rho < 0.5 * radon_abs_u.h {
                0.0
            } else {
                v.abs().powf(p) * (end - rho).powf(decay) * rho.powf(growth)
            }
        })
        .collect();
    Ok(WeightedInequality { t, lhs: trapezoid(&integrand, radon_abs_u.h), rhs: lp_integral(state, p) })
}

/// c_R with t − ρ + R ≤ c_R (t − ρ − R) whenever ρ ≤ t − R − 1.
pub fn c_r(support_radius: f64) -> f64 {
    1.0 + 2.0 * support_radius
}

/// ∫|u|^p / [(t−R)^{n−1−(n−1)p/2} ln((t−R)/2)] for the samples past
/// t = 2(R + 1) + 1.
pub fn log_refinement_check(
    times: &[f64],
    lp: &[f64],
    exponents: &ExponentSet,
    support_radius: f64,
) -> Result<Vec<(f64, f64)>> {
    weighted_chain_applicable(exponents)?;
    if times.len() != lp.len() {
        return Err(Error::GridMismatch("times and Lp differ in length".into()));
    }
    let start = 2.0 * (support_radius + 1.0) + 1.0;
    let power = exponents.lp_growth_exponent();
    let out: Vec<(f64, f64)> = times
        .iter()
        .zip(lp)
        .filter(|(t, _)| **t > start)
        .map(|(&t, &v)| {
            let s = t - support_radius;
            (t, v / (s.powf(power) * (s / 2.0).ln()))
        })
        .collect();
    if out.is_empty() {
        return Err(Error::SeriesTooShort { needed: 1, got: 0 });
    }
    Ok(out)
}

pub fn write_margin_csv<P: AsRef<Path>>(path: P, rows: &[(f64, f64)]) -> Result<()> {
    let rows: Vec<Vec<f64>> = rows.iter().map(|&(t, v)| vec![t, v]).collect();
    crate::io::write_csv(path, &["t", "value"], &rows)
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::criticality::exponent_set;

    #[test]
    fn transform_of_constant() {
        for n in 2..=7 {
            let f = LineField::from_fn(n, 3.0, 1.0, 81, |_| 1.0).unwrap();
            for v in transform_t_nodes(&f) {
                assert_abs_diff_eq!(v, 2.0 / (n - 1) as f64, epsilon = 1e-13);
            }
        }
        let zero = LineField::from_fn(4, 3.0, 1.0, 41, |_| 0.0).unwrap();
        assert!(transform_t_nodes(&zero).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn transform_of_indicator() {
        let (t, big_r, a, b) = (4.0, 1.0, 1.5, 3.25);
        let ind = |r: f64| if (a..=b).contains(&r) { 1.0 } else { 0.0 };
        for rho in [0.0, 0.5, 1.0, 1.5] {
            let want = ((b - rho).powf(1.5) - (a - rho).powf(1.5)) * (2.0 / 3.0) * (t - rho + big_r).powf(-1.5);
            let got = transform_t_fn(ind, 4, t, big_r, rho, &[a, b]);
            assert_abs_diff_eq!(got, want, epsilon = 1e-12);
        }
        // Same indicator on a grid whose nodes hit a and b: only the two
        // ramps of width h differ, so the error is O(h).
        let f = LineField::from_fn(4, t, big_r, 2001, ind).unwrap();
        let rho = 0.5;
        let want = ((b - rho).powf(1.5) - (a - rho).powf(1.5)) * (2.0 / 3.0) * (t - rho + big_r).powf(-1.5);
        assert!((transform_t(&f, rho) - want).abs() < 2.0 * f.h);
    }

    #[test]
    fn transform_at_far_end() {
        let f = LineField::from_fn(4, 2.0, 1.0, 31, |x| 1.0 + x).unwrap();
        assert_abs_diff_eq!(transform_t(&f, 3.0), 2.0 * 4.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(transform_t(&f, 3.0 - 1e-9), 8.0 / 3.0, epsilon = 1e-6);
    }

    #[test]
    fn maximal_function_of_indicator() {
        let f = LineField::from_fn(4, 0.5, 0.5, 101, |_| 1.0).unwrap();
        assert_abs_diff_eq!(maximal_function(&f, 0.5), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(maximal_function(&f, 2.0), 0.25, epsilon = 1e-12);
        let zero = LineField::from_fn(4, 0.5, 0.5, 11, |_| 0.0).unwrap();
        assert_eq!(maximal_function(&zero, 0.3), 0.0);
    }

    #[test]
    fn node_maximal_matches_pointwise() {
        let f = random_nonnegative_field(4, 5.0, 1.0, 120, 9).unwrap();
        let nodes = maximal_function_nodes(&f);
        for i in [0, 7, 60, 119] {
            assert_abs_diff_eq!(nodes[i], maximal_function(&f, f.x(i)), epsilon = 1e-12);
        }
    }

    #[test]
    fn constant_ratio_is_two_thirds() {
        let f = LineField::from_fn(4, 10.0, 1.0, 201, |_| 1.0).unwrap();
        assert_abs_diff_eq!(lp_operator_ratio(&f, 2.0).unwrap(), 2.0 / 3.0, epsilon = 1e-13);
        let zero = LineField::from_fn(4, 10.0, 1.0, 21, |_| 0.0).unwrap();
        assert!(matches!(lp_operator_ratio(&zero, 2.0), Err(Error::ZeroNorm)));
    }

    #[test]
    fn domination_for_random_fields() {
        for n in 3..=6 {
            for seed in 0..40 {
                let f = random_nonnegative_field(n, 20.0, 1.0, 150, seed).unwrap();
                let worst = check_pointwise_domination(&f).into_iter().fold(f64::INFINITY, f64::min);
                assert!(worst >= -1e-10, "n={n} seed={seed} {worst:e}");
            }
        }
    }

    #[test]
    fn step4_checks_refuse_low_dimensions() {
        let ex3 = exponent_set(3, crate::criticality::critical_exponent(3).unwrap()).unwrap();
        assert!(matches!(log_refinement_check(&[10.0], &[1.0], &ex3, 1.0), Err(Error::NotApplicable(_))));
        let ex4 = exponent_set(4, 2.0).unwrap();
        let times: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let lp: Vec<f64> = times.iter().map(|t| (t - 1.0f64).powf(ex4.lp_growth_exponent()) * ((t - 1.0) / 2.0).ln()).collect();
        let margins = log_refinement_check(&times, &lp, &ex4, 1.0).unwrap();
        assert!(margins.iter().all(|(t, m)| *t > 5.0 && (m - 1.0).abs() < 1e-14));
        let zeros = vec![0.0; times.len()];
        assert!(log_refinement_check(&times, &zeros, &ex4, 1.0).unwrap().iter().all(|(_, m)| *m == 0.0));
        assert_eq!(c_r(1.0), 3.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn transform_is_positive_and_linear(seed in 0u64..10_000, alpha in 0.1f64..10.0) {
            let f = random_nonnegative_field(4, 7.0, 1.0, 90, seed).unwrap();
            let g = random_nonnegative_field(4, 7.0, 1.0, 90, seed + 1).unwrap();
            let tf = transform_t_nodes(&f);
            let tg = transform_t_nodes(&g);
            prop_assert!(tf.iter().all(|&v| v >= 0.0));
            let sum = LineField { values: f.values.iter().zip(&g.values).map(|(a, b)| alpha * a + b).collect(), ..f.clone() };
            for (i, v) in transform_t_nodes(&sum).into_iter().enumerate() {
                prop_assert!((v - (alpha * tf[i] + tg[i])).abs() <= 1e-12 * (1.0 + v.abs()));
            }
        }

        #[test]
        fn maximal_function_is_sublinear(seed in 0u64..10_000) {
            let f = random_nonnegative_field(4, 7.0, 1.0, 70, seed).unwrap();
            let g = random_nonnegative_field(4, 7.0, 1.0, 70, seed + 7).unwrap();
            let sum = LineField { values: f.values.iter().zip(&g.values).map(|(a, b)| a + b).collect(), ..f.clone() };
            let (mf, mg, ms) = (maximal_function_nodes(&f), maximal_function_nodes(&g), maximal_function_nodes(&sum));
            for i in 0..ms.len() {
                prop_assert!(ms[i] <= mf[i] + mg[i] + 1e-12);
            }
        }

        #[test]
        fn ratio_is_scale_invariant(seed in 0u64..10_000, alpha in 0.01f64..100.0) {
            let f = random_nonnegative_field(4, 12.0, 1.0, 80, seed).unwrap();
            let a = lp_operator_ratio(&f, 2.0).unwrap();
            let b = lp_operator_ratio(&f.scaled(alpha), 2.0).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }
    }
}
