#![allow(dead_code)]

use critwave::radon::{radon_section, RadonKind, RadonSection};
use critwave::wave_solver::{step, RadialWaveSolver};
use critwave::{critical_exponent, InitialDataSpec, RadialState, SimulationConfig};

fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

fn bump_prime(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let d = 1.0 - s * s;
        bump(s) * (-2.0 * s / (d * d))
    }
}

/// Exact linear solution in three dimensions: an incoming shell around
/// r = 3 that focuses at the origin near t = 3.
pub fn spherical_wave(r: f64, t: f64) -> f64 {
    if r == 0.0 {
        2.0 * bump_prime(t - 3.0)
    } else {
        (bump(r + t - 3.0) - bump(t - r - 3.0)) / r
    }
}

fn spherical_velocity_at_zero(r: f64) -> f64 {
    if r == 0.0 {
        0.0
    } else {
        bump_prime(r - 3.0) / r
    }
}

pub fn spherical_config(h: f64, t_max: f64) -> SimulationConfig {
    let data = InitialDataSpec::bump(0.0, 4.0);
    SimulationConfig::new(3, critical_exponent(3).unwrap(), 4.0, h, t_max, data).linear()
}

/// Linear solver run from the exact data; returns the state after
/// round(t_max/dt) steps.
pub fn spherical_run(h: f64, t_max: f64) -> (SimulationConfig, RadialState) {
    let config = spherical_config(h, t_max);
    let state = RadialState::from_fn(3, h, config.node_count(), |r| spherical_wave(r, 0.0), spherical_velocity_at_zero);
    let mut solver = RadialWaveSolver::from_state(config.clone(), state).unwrap();
    let steps = (t_max / config.dt()).round() as u64;
    while solver.steps() < steps {
        solver.advance();
    }
    (config, solver.into_state())
}

pub fn spherical_max_error(h: f64, t_max: f64) -> f64 {
    let (_, s) = spherical_run(h, t_max);
    s.u.iter().enumerate().map(|(i, &u)| (u - spherical_wave(s.r(i), s.t)).abs()).fold(0.0, f64::max)
}

/// Radon sections of u and |u|^p at `state` and the next two steps.
pub fn radon_triplet(config: &SimulationConfig, state: &RadialState) -> (Vec<RadonSection>, Vec<RadonSection>) {
    let s1 = step(state, config, config.dt()).unwrap();
    let s2 = step(&s1, config, config.dt()).unwrap();
    let states = [state, &s1, &s2];
    let u = states.iter().map(|s| radon_section(s, RadonKind::OfU, config.p)).collect();
    let src = states
        .iter()
        .map(|s| {
            let mut sec = radon_section(s, RadonKind::OfAbsUPowP, config.p);
            if !config.nonlinear {
                sec.values.iter_mut().for_each(|v| *v = 0.0);
            }
            sec
        })
        .collect();
    (u, src)
}
