//! Gauss–Legendre rules and grid quadrature shared by the other modules.

use std::f64::consts::PI;

/// Nodes and weights of the `m`-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(m: usize) -> Self {
        assert!(m >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        let mf = m as f64;
        for i in 0..(m + 1) / 2 {
            // Tricomi initial guess, then Newton on P_m.
            let mut x = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(m, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[m - 1 - i] = x;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates `f` over `[a, b]` with a single application of the rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Composite rule over `panels` equal sub-intervals of `[a, b]`.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: F,
    ) -> f64 {
        let panels = panels.max(1);
        let width = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + width * k as f64;
                self.integrate(lo, lo + width, &mut f)
            })
            .sum()
    }
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Trapezoid rule for samples on a uniform grid of spacing `h`.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        len => {
            let inner: f64 = values[1..len - 1].iter().sum();
            h * (inner + 0.5 * (values[0] + values[len - 1]))
        }
    }
}

/// Composite Simpson rule on a uniform grid. With an even number of
/// intervals the classic rule is used; otherwise the last interval falls
/// back to the trapezoid.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let len = values.len();
    if len < 3 {
        return trapezoid(values, h);
    }
    let intervals = len - 1;
    let even = intervals - intervals % 2;
    let mut acc = values[0] + values[even];
    for (i, v) in values.iter().enumerate().take(even).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    let mut total = acc * h / 3.0;
    if even < intervals {
        total += 0.5 * h * (values[even] + values[even + 1]);
    }
    total
}

/// Trapezoid rule on a nonuniform abscissa.
pub fn trapezoid_xy(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// ∫ from xs[0] to `upper` of the piecewise-linear interpolant of (xs, ys).
/// Returns `None` when `upper` lies beyond the last abscissa.
pub fn integrate_linear_to(xs: &[f64], ys: &[f64], upper: f64) -> Option<f64> {
    let first = *xs.first()?;
    if upper <= first {
        return Some(0.0);
    }
    let mut acc = 0.0;
    for (x, y) in xs.windows(2).zip(ys.windows(2)) {
        if upper >= x[1] {
            acc += 0.5 * (x[1] - x[0]) * (y[0] + y[1]);
            if upper == x[1] {
                return Some(acc);
            }
        } else {
            let frac = (upper - x[0]) / (x[1] - x[0]);
            let y_up = y[0] + frac * (y[1] - y[0]);
            return Some(acc + 0.5 * (upper - x[0]) * (y[0] + y_up));
        }
    }
    None
}

/// Linear interpolation on a uniform grid starting at 0; zero outside.
pub fn interp_uniform(values: &[f64], h: f64, x: f64) -> f64 {
    if x < 0.0 || values.is_empty() {
        return 0.0;
    }
    let pos = x / h;
    let i = pos.floor() as usize;
    if i + 1 >= values.len() {
        return if i + 1 == values.len() && (pos - i as f64) == 0.0 {
            values[i]
        } else {
            0.0
        };
    }
    let frac = pos - i as f64;
    values[i] * (1.0 - frac) + values[i + 1] * frac
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_linear_integral() {
        let xs = [0.0, 1.0, 3.0];
        let ys = [0.0, 2.0, 2.0];
        assert_eq!(integrate_linear_to(&xs, &ys, 0.5), Some(0.25));
        assert_eq!(integrate_linear_to(&xs, &ys, 2.0), Some(3.0));
        assert_eq!(integrate_linear_to(&xs, &ys, 3.0), Some(5.0));
        assert_eq!(integrate_linear_to(&xs, &ys, -1.0), Some(0.0));
        assert_eq!(integrate_linear_to(&xs, &ys, 3.5), None);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for m in 1..12 {
            let rule = GaussLegendre::new(m);
            let wsum: f64 = rule.weights.iter().sum();
            assert!((wsum - 2.0).abs() < 1e-13, "m={m}");
            let deg = 2 * m - 1;
            let got = rule.integrate(0.0, 1.0, |x| x.powi(deg as i32));
            assert!((got - 1.0 / (deg as f64 + 1.0)).abs() < 1e-13, "m={m}");
        }
    }

    #[test]
    fn simpson_exact_for_cubics() {
        let h = 0.1;
        let vals: Vec<f64> = (0..=10).map(|i| (i as f64 * h).powi(3)).collect();
        assert!((simpson(&vals, h) - 0.25).abs() < 1e-14);
        let odd: Vec<f64> = (0..=11).map(|i| i as f64 * h).collect();
        assert!((simpson(&odd, h) - 0.5 * 1.1 * 1.1).abs() < 1e-13);
    }

    #[test]
    fn interpolation_is_zero_outside() {
        let v = [1.0, 2.0, 3.0];
        assert_eq!(interp_uniform(&v, 0.5, -0.1), 0.0);
        assert_eq!(interp_uniform(&v, 0.5, 0.25), 1.5);
        assert_eq!(interp_uniform(&v, 0.5, 1.0), 3.0);
        assert_eq!(interp_uniform(&v, 0.5, 1.2), 0.0);
    }
}
