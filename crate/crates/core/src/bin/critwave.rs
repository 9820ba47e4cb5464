use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use critwave::criticality::{exponent_set, unit_ball_volume, verify_critical_identities};
use critwave::harness::{
    run_chain, run_sweep, ChainDepth, CheckStatus, ExperimentConfig, PValue, RunReport, Summary,
};
use critwave::io::write_json;
use critwave::ode_blowup::{
    equilibrium_threshold, invariance_check, monotonicity_check, threshold_c0, OdeProblem, DEFAULT_HORIZON,
};
use critwave::radon::{radon_radial_fn, radon_section, RadonKind};
use critwave::wave_solver::{make_initial_state, InitialDataSpec, SimulationConfig};
use critwave::{Error, Result};

#[derive(Parser)]
#[command(name = "critwave", version, about = "Radial semilinear wave experiments at the critical exponent")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print p_c, a, q, K1 and the critical identities for one dimension.
    Exponents {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        n: u64,
        /// Exponent to use instead of p_c.
        #[arg(long)]
        p: Option<f64>,
    },
    /// Run the solver with the time-series checks.
    Simulate(RunArgs),
    /// Run the solver and the full chain of checks.
    VerifyChain(RunArgs),
    /// Threshold, invariance and monotonicity of the comparison ODE.
    OdeLemma(OdeArgs),
    /// Cartesian sweep over n, p and amplitude.
    Sweep(RunArgs),
    /// Radon transform against closed forms and the mass identity.
    RadonTest {
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(2..))]
        n: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    n: Option<u64>,
    #[arg(long, conflicts_with = "p_offset")]
    p: Option<f64>,
    /// p = p_c(n) + offset.
    #[arg(long, allow_hyphen_values = true)]
    p_offset: Option<f64>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    cfl: Option<f64>,
    /// Drop the |u|^p source.
    #[arg(long)]
    linear: bool,
    #[arg(long)]
    jobs: Option<usize>,
}

impl RunArgs {
    fn experiment(&self) -> Result<ExperimentConfig> {
        let mut exp = match &self.config {
            Some(path) => ExperimentConfig::from_json_file(path)?,
            None => ExperimentConfig::default(),
        };
        let sim = &mut exp.simulation;
        if let Some(n) = self.n {
            sim.n = n as usize;
        }
        if let Some(p) = self.p {
            sim.p = PValue::Absolute(p);
        }
        if let Some(offset) = self.p_offset {
            sim.p = PValue::Offset { offset_from_pc: offset };
        }
        if let Some(a) = self.amplitude {
            sim.initial_data.amplitude = a;
        }
        if let Some(h) = self.h {
            sim.h = h;
        }
        if let Some(t) = self.t_max {
            sim.t_max = t;
            sim.r_max = None;
        }
        if let Some(c) = self.cfl {
            sim.cfl = Some(c);
        }
        if self.linear {
            sim.nonlinear = false;
        }
        if let Some(j) = self.jobs {
            exp.jobs = j;
        }
        if self.out.is_some() {
            exp.out_dir = self.out.clone();
        }
        Ok(exp)
    }
}

#[derive(Args)]
struct OdeArgs {
    /// Dimension used for the defaults of p, a, q and K1.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(2..))]
    n: u64,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    k1: Option<f64>,
    /// Normalized horizon.
    #[arg(long, default_value_t = DEFAULT_HORIZON)]
    horizon: f64,
    /// Values used for both R and T0 in the invariance grid.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 3.0, 10.0])]
    grid: Vec<f64>,
    /// Random K0 pairs for the monotonicity check.
    #[arg(long, default_value_t = 100)]
    pairs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> Result<bool> {
    match command {
        Command::Exponents { n, p } => cmd_exponents(n as usize, p),
        Command::Simulate(args) => cmd_run(&args, ChainDepth::Series),
        Command::VerifyChain(args) => cmd_run(&args, ChainDepth::Full),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::OdeLemma(args) => cmd_ode(&args),
        Command::RadonTest { n, out } => cmd_radon(n as usize, out.as_deref()),
    }
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn cmd_exponents(n: usize, p: Option<f64>) -> Result<bool> {
    let ex = exponent_set(n, p.unwrap_or(critwave::critical_exponent(n)?))?;
    let residuals = verify_critical_identities(n)?;
    print_json(&json!({ "exponents": ex, "critical_residuals": residuals }))?;
    Ok(residuals.max() < 1e-12)
}

fn print_report(rep: &RunReport) {
    let b = &rep.blowup;
    println!(
        "{}: n={} p={:.6} amplitude={} verdict={:?} t_detect={} final_t={:.4} steps={} ({:.1}s)",
        rep.run_id,
        rep.config.n,
        rep.config.p,
        rep.config.initial_data.amplitude,
        b.verdict,
        b.t_detect.map_or("-".into(), |t| format!("{t:.6}")),
        b.final_time,
        b.steps,
        rep.wall_seconds
    );
    for c in &rep.checks {
        let status = match c.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skip => "skip",
        };
        let num = |x: Option<f64>| x.map_or("-".into(), |v| format!("{v:.4e}"));
        print!("  {:<22} {status}  min={} max={} violations={}/{}", c.name, num(c.min), num(c.max), c.violations, c.samples);
        match &c.reason {
            Some(r) => println!("  ({r})"),
            None => println!(),
        }
    }
}

fn cmd_run(args: &RunArgs, depth: ChainDepth) -> Result<bool> {
    let exp = args.experiment()?;
    let config = exp.simulation.resolve()?;
    let dir = exp.out_dir.clone();
    if let Some(d) = &dir {
        std::fs::create_dir_all(d)?;
    }
    let (report, _) = run_chain("run", &config, &exp.checks, depth, exp.observer_stride, dir.as_deref())?;
    print_report(&report);
    let mut summary = Summary::new(&exp);
    summary.reports.push(report);
    if let Some(d) = &dir {
        write_json(d.join("summary.json"), &summary)?;
    }
    Ok(summary.passed())
}

fn cmd_sweep(args: &RunArgs) -> Result<bool> {
    let exp = args.experiment()?;
    let summary = run_sweep(&exp, ChainDepth::Series)?;
    for rep in &summary.reports {
        print_report(rep);
    }
    for f in &summary.failures {
        println!("{}: error: {}", f.run_id, f.error);
    }
    println!("{} runs, {} failed", summary.reports.len() + summary.failures.len(), {
        summary.failures.len() + summary.reports.iter().filter(|r| !r.passed()).count()
    });
    Ok(summary.passed())
}

fn cmd_ode(args: &OdeArgs) -> Result<bool> {
    let n = args.n as usize;
    let ex = exponent_set(n, args.p.unwrap_or(critwave::critical_exponent(n)?))?;
    let (p, a, q, k1) = (ex.p, args.a.unwrap_or(ex.a), args.q.unwrap_or(ex.q), args.k1.unwrap_or(ex.k1));
    let threshold = threshold_c0(p, a, q, k1, args.horizon)?;
    let grid: Vec<(f64, f64)> =
        args.grid.iter().flat_map(|&r| args.grid.iter().map(move |&t0| (r, t0))).collect();
    let invariance = invariance_check(p, a, q, k1, &grid, args.horizon)?;
    let c0 = threshold.c0_estimate;
    let template = OdeProblem::normalized(p, a, q, c0, k1, args.horizon.min(100.0));
    let monotonicity = monotonicity_check(&template, [c0, 100.0 * c0], args.pairs, args.seed)?;
    let value = json!({
        "threshold": threshold,
        "equilibrium_threshold": equilibrium_threshold(p, a, k1),
        "invariance": invariance,
        "monotonicity": monotonicity,
    });
    print_json(&value)?;
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        write_json(dir.join("ode_lemma.json"), &value)?;
    }
    Ok(invariance.spread <= 0.02 && monotonicity.violations == 0)
}

fn cmd_radon(n: usize, out: Option<&Path>) -> Result<bool> {
    let nm1 = (n - 1) as f64;
    let mut gauss_err = 0.0f64;
    let mut indicator_err = 0.0f64;
    for i in 0..=60 {
        let rho = i as f64 * 0.05;
        let g = radon_radial_fn(|r| (-r * r).exp(), n, rho, 12.0);
        let exact_g = std::f64::consts::PI.powf(nm1 / 2.0) * (-rho * rho).exp();
        gauss_err = gauss_err.max((g - exact_g).abs());
        if rho < 1.0 {
            let ind = radon_radial_fn(|r| if r < 1.0 { 1.0 } else { 0.0 }, n, rho, 1.0);
            let exact_i = unit_ball_volume(n - 1) * (1.0 - rho * rho).powf(nm1 / 2.0);
            indicator_err = indicator_err.max((ind - exact_i).abs());
        }
    }

    let data = InitialDataSpec::bump(1.0, 1.0);
    let config = SimulationConfig::new(n, critwave::critical_exponent(n)?, 1.0, 1.0 / 250.0, 1.0, data);
    let state = make_initial_state(&config);
    let section = radon_section(&state, RadonKind::OfU, config.p);
    let f0 = critwave::diagnostics::F0(&state);
    let mass_err = (section.mass() - f0).abs() / f0;
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        section.write_csv(dir.join("radon_bump.csv"), config.p, config.support_radius)?;
    }
    let ok = gauss_err < 1e-12 && indicator_err < 1e-12 && mass_err < 1e-4;
    print_json(&json!({
        "n": n,
        "gaussian_max_abs_error": gauss_err,
        "indicator_max_abs_error": indicator_err,
        "mass_relative_error": mass_err,
        "passed": ok,
    }))?;
    if !ok {
        return Err(Error::InvalidConfig("radon self-test out of tolerance".into()));
    }
    Ok(ok)
}
