mod output;

use std::f64::consts::TAU;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cvnet::dynamics::{coefficients, CouplingParams};
use cvnet::linalg::Matrix;
use cvnet::mc_oracle::{run_protocol, McConfig, Preset, ALL_PRESETS};
use cvnet::network::{
    default_grid, fidelity_curve, grid_around_2pi, linear_grid, milestones, teleclone, telecloning_interval,
    DistillConfig, Method,
};
use cvnet::qd::Qd;
use cvnet::teleportation::fidelity_general;
use num_complex::Complex64;

use output::{write_curve, RunManifest};

const R_WORKING: f64 = 1.0 + 2.5e-7;

/// Half-width of the window used by the fig3 and fig4 presets; the trace-out
/// peak is about 1.4e-3 wide at the working point.
const NARROW_HALF_WIDTH: f64 = 0.004;

/// |z| above this fails `mc-verify`.
const Z_LIMIT: f64 = 5.0;

#[derive(Parser)]
#[command(name = "cvnet", version, about = "Gaussian teleportation network through an optomechanical three-mode system")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the covariance coefficients Q0..Q2, T0..T2 at time t'.
    Evolve(EvolveArgs),
    /// Write fidelity curves as CSV.
    Curve(CurveArgs),
    /// Print the closed-form milestone values.
    Milestones(ModelArgs),
    /// Locate the telecloning window after 2π and print the clone fidelities.
    Teleclone(ModelArgs),
    /// Check the closed-form fidelity against a Monte Carlo replay.
    McVerify(McArgs),
}

#[derive(Args, Clone, Copy)]
struct ModelArgs {
    /// Mean thermal phonon number of the mirror.
    #[arg(long, default_value_t = 0.0)]
    nbar: f64,
    /// Coupling ratio r > 1.
    #[arg(long, default_value_t = R_WORKING)]
    r: f64,
}

impl ModelArgs {
    fn params(&self) -> Result<CouplingParams> {
        Ok(CouplingParams::new(self.r, self.nbar)?)
    }
}

#[derive(Args)]
struct EvolveArgs {
    #[arg(long, allow_negative_numbers = true)]
    tprime: f64,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Trace,
    Het,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FigPreset {
    Fig3,
    Fig4,
    Fig5,
}

#[derive(Clone, Copy, Debug)]
struct GridSpec {
    lo: f64,
    hi: f64,
    n: usize,
}

fn parse_grid(s: &str) -> std::result::Result<GridSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err("expected lo:hi:n".into());
    }
    let lo: f64 = parts[0].parse().map_err(|e| format!("bad lo: {e}"))?;
    let hi: f64 = parts[1].parse().map_err(|e| format!("bad hi: {e}"))?;
    let n: usize = parts[2].parse().map_err(|e| format!("bad n: {e}"))?;
    linear_grid(lo, hi, n).map_err(|e| e.to_string())?;
    Ok(GridSpec { lo, hi, n })
}

#[derive(Args)]
struct CurveArgs {
    /// Regenerate the data behind a figure; --out is then a directory.
    #[arg(long, value_enum, conflicts_with_all = ["k", "method", "nbar", "alpha_re", "alpha_im"])]
    preset: Option<FigPreset>,
    /// Mode to discard (0 mirror, 1 Stokes, 2 anti-Stokes).
    #[arg(long, required_unless_present = "preset")]
    k: Option<usize>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    nbar: Option<f64>,
    #[arg(long, default_value_t = R_WORKING)]
    r: f64,
    /// Heterodyne outcome α (real part).
    #[arg(long, allow_negative_numbers = true)]
    alpha_re: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    alpha_im: Option<f64>,
    /// Grid as lo:hi:n; defaults to 2001 points on 2π ± 1.5.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    grid: Option<GridSpec>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct McArgs {
    /// One of the reference channels, or `all`.
    #[arg(long, value_parser = preset_names())]
    preset: String,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
    alpha_re: f64,
    #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
    alpha_im: f64,
}

fn preset_names() -> Vec<&'static str> {
    let mut names: Vec<&'static str> = ALL_PRESETS.iter().map(|p| p.name()).collect();
    names.push("all");
    names
}

/// Bad input reported after parsing; exits with the usage code.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn sig(x: f64) -> String {
    format!("{x:.11e}")
}

fn cmd_evolve(a: &EvolveArgs) -> Result<ExitCode> {
    let co = coefficients(a.tprime, &a.model.params()?)?.to_f64();
    for (name, v) in ["Q0", "Q1", "Q2", "T0", "T1", "T2"].iter().zip(co) {
        println!("{name} {}", sig(v));
    }
    Ok(ExitCode::SUCCESS)
}

struct CurveJob {
    cfg: DistillConfig,
    grid: Vec<f64>,
    grid_label: (f64, f64, usize),
    alpha: Complex64,
    out: PathBuf,
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Trace => "trace",
        Method::Heterodyne(_) => "het",
    }
}

fn run_curve_job(job: &CurveJob, preset: Option<&str>) -> Result<()> {
    let curve = fidelity_curve(&job.cfg, &job.grid)?;
    let p = job.cfg.params();
    let mut m = RunManifest::new("curve", &job.out)
        .param("k", job.cfg.k())
        .param("method", method_name(job.cfg.method()))
        .param("nbar", p.nbar())
        .param("r", p.r())
        .param("alpha_re", job.alpha.re)
        .param("alpha_im", job.alpha.im)
        .param("grid_lo", job.grid_label.0)
        .param("grid_hi", job.grid_label.1)
        .param("grid_n", job.grid_label.2);
    if let Some(name) = preset {
        m = m.param("preset", name);
    }
    write_curve(&job.out, &curve, &m)?;
    println!("wrote {}", job.out.display());
    Ok(())
}

fn nbar_label(nbar: f64) -> String {
    format!("{nbar}")
}

fn cmd_curve(a: &CurveArgs) -> Result<ExitCode> {
    let grid_for = |default_half: f64| -> Result<(Vec<f64>, (f64, f64, usize))> {
        match a.grid {
            Some(g) => Ok((linear_grid(g.lo, g.hi, g.n)?, (g.lo, g.hi, g.n))),
            None if default_half == NARROW_HALF_WIDTH => {
                let n = 2001;
                Ok((grid_around_2pi(default_half, n)?, (TAU - default_half, TAU + default_half, n)))
            }
            None => {
                let g = default_grid();
                let n = g.len();
                Ok((g, (TAU - 1.5, TAU + 1.5, n)))
            }
        }
    };
    let Some(preset) = a.preset else {
        let k = a.k.expect("clap enforces --k without --preset");
        let alpha = Complex64::new(a.alpha_re.unwrap_or(0.0), a.alpha_im.unwrap_or(0.0));
        let method = match a.method.unwrap_or(MethodArg::Trace) {
            MethodArg::Trace => Method::Trace,
            MethodArg::Het => Method::Heterodyne(alpha),
        };
        let params = CouplingParams::new(a.r, a.nbar.unwrap_or(0.0))?;
        let cfg = DistillConfig::new(k, method, params)?;
        let (grid, grid_label) = grid_for(1.5)?;
        run_curve_job(&CurveJob { cfg, grid, grid_label, alpha, out: a.out.clone() }, None)?;
        return Ok(ExitCode::SUCCESS);
    };

    let (name, ks, methods, nbars, half): (&str, &[usize], &[MethodArg], &[f64], f64) = match preset {
        FigPreset::Fig3 => ("fig3", &[0, 2], &[MethodArg::Trace], &[0.0, 1e3], NARROW_HALF_WIDTH),
        FigPreset::Fig4 => ("fig4", &[2], &[MethodArg::Het], &[0.0, 1.0, 1e7], NARROW_HALF_WIDTH),
        FigPreset::Fig5 => ("fig5", &[0], &[MethodArg::Trace, MethodArg::Het], &[0.0, 1e5], 1.5),
    };
    std::fs::create_dir_all(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    let (grid, grid_label) = grid_for(half)?;
    let alpha = Complex64::new(0.0, 0.0);
    for &k in ks {
        for &m in methods {
            for &nbar in nbars {
                let method = if m == MethodArg::Het { Method::Heterodyne(alpha) } else { Method::Trace };
                let cfg = DistillConfig::new(k, method, CouplingParams::new(a.r, nbar)?)?;
                let file = format!("{name}_k{k}_{}_nbar{}.csv", method_name(method), nbar_label(nbar));
                let out = a.out.join(file);
                run_curve_job(&CurveJob { cfg, grid: grid.clone(), grid_label, alpha, out }, Some(name))?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_milestones(a: &ModelArgs) -> Result<ExitCode> {
    let m = milestones(&a.params()?);
    println!("f2_max {}", sig(m.f2_max));
    println!("t_max {}", sig(m.t_max));
    println!("varsigma {}", sig(m.varsigma));
    println!("f0_at_pi {}", sig(m.f0_at_pi));
    println!("boundary_value {}", sig(m.boundary_value));
    Ok(ExitCode::SUCCESS)
}

fn cmd_teleclone(a: &ModelArgs) -> Result<ExitCode> {
    let params = a.params()?;
    let g = default_grid();
    match telecloning_interval(&params, g[0], g[g.len() - 1])? {
        None => println!("no telecloning interval"),
        Some(w) => {
            let (bob, charlie) = teleclone(w.t_peak, &params)?;
            println!("t_lo {}", sig(w.t_lo));
            println!("t_hi {}", sig(w.t_hi));
            println!("width {}", sig(w.width()));
            println!("t_peak {}", sig(w.t_peak));
            println!("f_mirror {}", sig(bob));
            println!("f_anti_stokes {}", sig(charlie));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_mc_verify(a: &McArgs) -> Result<ExitCode> {
    let presets: Vec<Preset> = if a.preset == "all" {
        ALL_PRESETS.to_vec()
    } else {
        vec![Preset::from_name(&a.preset).ok_or_else(|| UsageError(format!("unknown preset {}", a.preset)))?]
    };
    let coherent = Matrix::identity(2).scale(Qd::HALF);
    let mut ok = true;
    for p in presets {
        let run = p.build()?;
        let want = fidelity_general(&coherent, &run.channel, run.sign, run.delta)?;
        let cfg = McConfig {
            n_samples: a.samples,
            seed: a.seed,
            input_amplitude: Complex64::new(a.alpha_re, a.alpha_im),
        };
        let est = run_protocol(&run.channel, run.sign, run.delta, &cfg)?;
        let z = est.z_score(want.infidelity);
        let pass = z.abs() <= Z_LIMIT;
        ok &= pass;
        println!(
            "{} analytic {} estimate {} se {} z {:.3} {}",
            p.name(),
            sig(want.fidelity),
            sig(est.fidelity),
            sig(est.fidelity_se),
            z,
            if pass { "ok" } else { "FAIL" }
        );
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("CVNET_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| UsageError(format!("CVNET_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| anyhow!("cannot size the thread pool: {e}"))
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<cvnet::error::Error>() {
            return match e {
                cvnet::error::Error::Domain(_) | cvnet::error::Error::InvalidArgument(_) => 2,
                _ => 1,
            };
        }
        if cause.is::<std::io::Error>() {
            return 1;
        }
    }
    1
}

fn run(cli: &Cli) -> Result<ExitCode> {
    configure_threads()?;
    match &cli.cmd {
        Cmd::Evolve(a) => cmd_evolve(a),
        Cmd::Curve(a) => cmd_curve(a),
        Cmd::Milestones(a) => cmd_milestones(a),
        Cmd::Teleclone(a) => cmd_teleclone(a),
        Cmd::McVerify(a) => cmd_mc_verify(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
