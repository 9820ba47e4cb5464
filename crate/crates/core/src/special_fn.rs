//! The exponential test function φ₁(x) = ∫_{S^{n−1}} e^{x·ω} dω, its
//! time-decaying companion ψ₁ = φ₁e^{−t}, and the Hölder denominator
//! I(t) = ∫_{|x|≤t+R} ψ₁^{p′} dx.
//!
//! φ₁ is radial: φ₁(r) = |S^{n−2}| ∫₀^π e^{r cos θ} sin^{n−2}θ dθ. All
//! evaluation goes through log φ₁ = r + log ∫ e^{r(cos θ − 1)} …, which
//! stays finite long after e^r would overflow.

use std::f64::consts::PI;

use crate::criticality::sphere_area;
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Largest radius at which φ₁ itself is returned (e^r overflows near 709).
pub const PHI1_MAX_RADIUS: f64 = 700.0;

const POINTS_PER_PANEL: usize = 16;
const MIN_NODES: usize = 64;
pub const DEFAULT_NODES: usize = 256;

#[derive(Debug, Clone)]
pub struct TestFunctionContext {
    n: usize,
    quadrature_nodes: usize,
    sphere_n1: f64,
    sphere_n2: f64,
    rule: GaussLegendre,
}

impl TestFunctionContext {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_nodes(n, DEFAULT_NODES)
    }

    /// `quadrature_nodes` is rounded up to a multiple of the per-panel rule.
    pub fn with_nodes(n: usize, quadrature_nodes: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        if quadrature_nodes < MIN_NODES {
            return Err(Error::InvalidConfig(format!(
                "quadrature_nodes must be at least {MIN_NODES}, got {quadrature_nodes}"
            )));
        }
        let panels = quadrature_nodes.div_ceil(POINTS_PER_PANEL);
        Ok(Self {
            n,
            quadrature_nodes: panels * POINTS_PER_PANEL,
            sphere_n1: sphere_area(n),
            sphere_n2: sphere_area(n - 1),
            rule: GaussLegendre::new(POINTS_PER_PANEL),
        })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn quadrature_nodes(&self) -> usize {
        self.quadrature_nodes
    }

    /// |S^{n−1}|
    pub fn sphere_area(&self) -> f64 {
        self.sphere_n1
    }

    /// |S^{n−2}|
    pub fn equator_area(&self) -> f64 {
        self.sphere_n2
    }

    /// log φ₁(r), valid for every r ≥ 0.
    pub fn log_phi1(&self, r: f64) -> f64 {
        let panels = self.quadrature_nodes / POINTS_PER_PANEL;
        let k = (self.n - 2) as i32;
        let scaled = self.rule.integrate_composite(0.0, PI, panels, |theta| {
            (r * (theta.cos() - 1.0)).exp() * theta.sin().powi(k)
        });
        r + (self.sphere_n2 * scaled).ln()
    }

    pub fn phi1(&self, r: f64) -> Result<f64> {
        check_radius(r)?;
        if r > PHI1_MAX_RADIUS {
            return Err(Error::Range { value: r, limit: PHI1_MAX_RADIUS });
        }
        Ok(self.log_phi1(r).exp())
    }

    pub fn psi1(&self, r: f64, t: f64) -> Result<f64> {
        check_radius(r)?;
        if !(t >= 0.0) {
            return Err(Error::Range { value: t, limit: 0.0 });
        }
        if r - t > PHI1_MAX_RADIUS {
            return Err(Error::Range { value: r - t, limit: PHI1_MAX_RADIUS });
        }
        Ok((self.log_phi1(r) - t).exp())
    }

    /// I(t) together with the normalization used to test its growth bound.
    pub fn i_integral(&self, p: f64, support_radius: f64, t: f64) -> Result<IIntegral> {
        if !(p > 1.0) {
            return Err(Error::InvalidExponent(p));
        }
        if !(support_radius > 0.0) || !(t >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "I(t) needs R > 0 and t >= 0, got R = {support_radius}, t = {t}"
            )));
        }
        if support_radius > PHI1_MAX_RADIUS {
            return Err(Error::Range { value: support_radius, limit: PHI1_MAX_RADIUS });
        }
        let upper = t + support_radius;
        let pp = p / (p - 1.0);
        let value = self.ball_integral(upper, |r| (pp * (self.log_phi1(r) - t)).exp());
        let nm1 = (self.n - 1) as f64;
        let growth = nm1 - nm1 * pp / 2.0;
        let normalized = value * (-pp * support_radius).exp() * upper.powf(-growth);
        Ok(IIntegral { value, normalized })
    }

    /// ω_{n−1} ∫₀^{upper} f(r) r^{n−1} dr for a radial integrand `f`.
    pub fn ball_integral<F: Fn(f64) -> f64>(&self, upper: f64, f: F) -> f64 {
        let panels = (upper / 0.25).ceil().max(1.0) as usize;
        let k = (self.n - 1) as i32;
        self.sphere_n1 * self.rule.integrate_composite(0.0, upper, panels, |r| f(r) * r.powi(k))
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(r >= 0.0) {
        return Err(Error::Range { value: r, limit: 0.0 });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IIntegral {
    pub value: f64,
    /// I(t)·e^{−p′R}·(t+R)^{−(n−1−(n−1)p′/2)}; bounded in t.
    pub normalized: f64,
}

/// Leading-order asymptotic (2π)^{(n−1)/2} r^{−(n−1)/2} e^r of φ₁.
pub fn phi1_asymptotic(n: usize, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Range { value: r, limit: 0.0 });
    }
    if r > PHI1_MAX_RADIUS {
        return Err(Error::Range { value: r, limit: PHI1_MAX_RADIUS });
    }
    let half = (n as f64 - 1.0) / 2.0;
    Ok((2.0 * PI).powf(half) * r.powf(-half) * r.exp())
}

/// log φ₁ sampled once on a uniform radial grid; ψ₁ at any time is then
/// `exp(log_phi1[i] − t)`.
#[derive(Debug, Clone)]
pub struct PhiTable {
    pub h: f64,
    pub log_phi1: Vec<f64>,
}

impl PhiTable {
    pub fn new(ctx: &TestFunctionContext, h: f64, len: usize) -> Self {
        use rayon::prelude::*;
        let log_phi1 = (0..len).into_par_iter().map(|i| ctx.log_phi1(i as f64 * h)).collect();
        Self { h, log_phi1 }
    }

    pub fn len(&self) -> usize {
        self.log_phi1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_phi1.is_empty()
    }

    pub fn psi1(&self, i: usize, t: f64) -> f64 {
        (self.log_phi1[i] - t).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn phi1_at_origin_is_sphere_area() {
        let c3 = TestFunctionContext::new(3).unwrap();
        assert_relative_eq!(c3.phi1(0.0).unwrap(), 4.0 * PI, max_relative = 1e-13);
        let c4 = TestFunctionContext::new(4).unwrap();
        assert_relative_eq!(c4.phi1(0.0).unwrap(), 2.0 * PI * PI, max_relative = 1e-13);
        let c2 = TestFunctionContext::new(2).unwrap();
        assert_relative_eq!(c2.phi1(0.0).unwrap(), 2.0 * PI, max_relative = 1e-13);
    }

    #[test]
    fn phi1_matches_three_dimensional_closed_form() {
        let ctx = TestFunctionContext::new(3).unwrap();
        // 4π sinh(1)
        assert_relative_eq!(ctx.phi1(1.0).unwrap(), 14.76801374576529, max_relative = 1e-12);
    }

    #[test]
    fn phi1_matches_bessel_reference_values() {
        // (2π)^{n/2} r^{1−n/2} I_{n/2−1}(r), evaluated with scipy.
        let cases = [
            (2, 1.0, 7.954926521012846),
            (2, 10.0, 17691.669349160413),
            (4, 1.0, 22.311587120319793),
            (4, 10.0, 10544.63916698724),
            (5, 10.0, 7826.13015467476),
            (6, 1.0, 33.67223846002208),
        ];
        for (n, r, want) in cases {
            let ctx = TestFunctionContext::new(n).unwrap();
            assert_relative_eq!(ctx.phi1(r).unwrap(), want, max_relative = 1e-12);
        }
    }

    #[test]
    fn asymptotic_ratio_at_forty() {
        // I_ν(r)√(2πr)e^{−r} from scipy.
        let expected = [(2, 1.0031701359002927), (3, 1.0), (4, 0.990550096424032), (5, 0.975)];
        for (n, want) in expected {
            let ctx = TestFunctionContext::new(n).unwrap();
            let ratio = ctx.phi1(40.0).unwrap() / phi1_asymptotic(n, 40.0).unwrap();
            assert_abs_diff_eq!(ratio, want, epsilon = 1e-10);
            assert!((0.95..=1.05).contains(&ratio));
        }
    }

    #[test]
    fn guards_reject_out_of_range_arguments() {
        let ctx = TestFunctionContext::new(3).unwrap();
        assert!(matches!(ctx.phi1(701.0), Err(Error::Range { .. })));
        assert!(ctx.phi1(-1.0).is_err());
        assert!(ctx.psi1(900.0, 150.0).is_err());
        assert!(ctx.psi1(900.0, 250.0).is_ok());
        assert!(TestFunctionContext::with_nodes(3, 32).is_err());
        assert!(TestFunctionContext::new(1).is_err());
        assert!(phi1_asymptotic(3, 0.0).is_err());
    }

    #[test]
    fn psi1_examples() {
        let c3 = TestFunctionContext::new(3).unwrap();
        assert_relative_eq!(c3.psi1(0.0, 0.0).unwrap(), 4.0 * PI, max_relative = 1e-13);
        let v = c3.psi1(50.0, 50.0).unwrap();
        // 4π sinh(50)/50 · e^{−50} = 2π(1 − e^{−100})/50
        assert!(v.is_finite() && v > 0.0);
        assert_relative_eq!(v, 2.0 * PI / 50.0, max_relative = 1e-12);
        let c4 = TestFunctionContext::new(4).unwrap();
        assert_relative_eq!(c4.psi1(0.0, 2f64.ln()).unwrap(), PI * PI, max_relative = 1e-13);
    }

    #[test]
    fn doubling_nodes_is_converged() {
        for n in [2, 3, 4, 7] {
            let a = TestFunctionContext::with_nodes(n, 256).unwrap();
            let b = TestFunctionContext::with_nodes(n, 512).unwrap();
            for r in [0.0, 0.5, 3.0, 12.0, 30.0, 50.0] {
                let (x, y) = (a.phi1(r).unwrap(), b.phi1(r).unwrap());
                assert!(((x - y) / y).abs() < 1e-10, "n={n} r={r}");
            }
        }
    }

    #[test]
    fn phi1_increasing_and_eigenfunction_of_laplacian() {
        for n in [2, 3, 4, 6] {
            let ctx = TestFunctionContext::new(n).unwrap();
            let vals: Vec<f64> = (0..200).map(|i| ctx.phi1(i as f64 * 0.1).unwrap()).collect();
            assert!(vals.windows(2).all(|w| w[1] > w[0]), "n={n}");

            // Radial Δφ₁ − φ₁ at r = 2 by central differences.
            let resid = |h: f64| {
                let r = 2.0;
                let (m, c, p) = (
                    ctx.phi1(r - h).unwrap(),
                    ctx.phi1(r).unwrap(),
                    ctx.phi1(r + h).unwrap(),
                );
                let lap = (p - 2.0 * c + m) / (h * h) + (n as f64 - 1.0) / r * (p - m) / (2.0 * h);
                (lap - c).abs() / c
            };
            let (e1, e2) = (resid(0.04), resid(0.02));
            assert!(e1 < 1e-3, "n={n}");
            let ratio = e1 / e2;
            assert!((3.5..4.5).contains(&ratio), "n={n} ratio {ratio}");
        }
    }

    #[test]
    fn psi1_solves_the_linear_wave_equation() {
        let ctx = TestFunctionContext::new(4).unwrap();
        let (r, t, h) = (3.0, 1.5, 1e-3);
        let psi = |r: f64, t: f64| ctx.psi1(r, t).unwrap();
        let dt = (psi(r, t + h) - psi(r, t - h)) / (2.0 * h);
        assert_relative_eq!(dt, -psi(r, t), max_relative = 1e-6);
        let dtt = (psi(r, t + h) - 2.0 * psi(r, t) + psi(r, t - h)) / (h * h);
        let lap = (psi(r + h, t) - 2.0 * psi(r, t) + psi(r - h, t)) / (h * h)
            + 3.0 / r * (psi(r + h, t) - psi(r - h, t)) / (2.0 * h);
        assert!(((lap - dtt) / psi(r, t)).abs() < 1e-5);
    }

    #[test]
    fn i_integral_reference_values() {
        // scipy quad of ω₃ ∫ (φ₁ e^{−t})² r³ dr with φ₁ from Bessel I₁.
        let ctx = TestFunctionContext::new(4).unwrap();
        let cases = [
            (0.0, 2269.483328302106),
            (10.0, 16776.414427195745),
            (40.0, 17753.460696495004),
            (80.0, 17920.764081605692),
        ];
        for (t, want) in cases {
            let got = ctx.i_integral(2.0, 1.0, t).unwrap();
            assert_relative_eq!(got.value, want, max_relative = 1e-9);
        }
        let c3 = TestFunctionContext::new(3).unwrap();
        let got = c3.i_integral(1.0 + 2f64.sqrt(), 1.0, 5.0).unwrap();
        assert_relative_eq!(got.value, 1531.2231815334894, max_relative = 1e-9);
    }

    #[test]
    fn i_integral_agrees_across_resolutions() {
        let coarse = TestFunctionContext::with_nodes(4, 128).unwrap();
        let fine = TestFunctionContext::with_nodes(4, 512).unwrap();
        let a = coarse.i_integral(2.0, 1.0, 0.0).unwrap().value;
        let b = fine.i_integral(2.0, 1.0, 0.0).unwrap().value;
        assert!(a > 0.0 && ((a - b) / b).abs() < 1e-6);
    }

    #[test]
    fn normalized_i_integral_is_bounded_in_time() {
        let ctx = TestFunctionContext::new(4).unwrap();
        let norms: Vec<f64> = [10.0, 20.0, 40.0, 80.0]
            .iter()
            .map(|&t| ctx.i_integral(2.0, 1.0, t).unwrap().normalized)
            .collect();
        let max = norms.iter().cloned().fold(0.0, f64::max);
        let min = norms.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max < 1.1 * min, "{norms:?}");
    }

    #[test]
    fn ball_integral_of_zero_field_vanishes() {
        let ctx = TestFunctionContext::new(5).unwrap();
        assert_eq!(ctx.ball_integral(3.0, |_| 0.0), 0.0);
        assert_relative_eq!(
            ctx.ball_integral(2.0, |_| 1.0),
            crate::criticality::unit_ball_volume(5) * 32.0,
            max_relative = 1e-13
        );
    }
}
