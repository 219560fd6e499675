mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ajwave_core::designer::oracle_cost;
use ajwave_core::harness::{received_psd, run_instrumented, sweep_with_workers};
use ajwave_core::io::{fmt_e, instrumented_csv, psd_csv, sweep_csv, CoefficientFile, Spectrogram};
use ajwave_core::verify::{run_checks, VerifyOptions};
use ajwave_core::{
    cost_f, design_eigen, design_powell, design_spectrogram, gaussian_doublet, make_rect_composite,
    make_template, normalize, psd, sweep, DesignMethod, DesignProblem, PowellOptions, SweepAxis, Waveform,
};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use config::{parse_grid, CliConfig};

const NS: f64 = 1e-9;
const GHZ: f64 = 1e9;

#[derive(Parser)]
#[command(name = "ajwave", version, about = "Anti-jamming UWB waveform design and TH-PPM link simulation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Design a rect-composite waveform with a jammer null at --fhat.
    Design(DesignArgs),
    /// Closed-form and oracle jammer-correlation cost of a coefficient file.
    Cost(CostArgs),
    /// PSD of the designed waveform for each design frequency in a grid.
    Spectrogram(SpectrogramArgs),
    /// Waveform PSD, or received-signal PSD when --config is given.
    Psd(PsdArgs),
    /// Monte Carlo BER sweep.
    Ber(BerArgs),
    /// Run the built-in property checks.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct DesignArgs {
    /// Design frequency, GHz.
    #[arg(long)]
    fhat: f64,
    #[arg(long, default_value_t = 5)]
    n: usize,
    /// Chip duration, ns.
    #[arg(long, default_value_t = 1.0)]
    tc: f64,
    #[arg(long, default_value = "eigen")]
    method: DesignMethod,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Powell stopping tolerance on the KKT residual.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_outer: Option<usize>,
    /// Coefficient file; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CostArgs {
    coeffs: PathBuf,
    /// Jammer frequency, GHz. Defaults to the file's design frequency.
    #[arg(long)]
    fj: Option<f64>,
    /// Sampling step of the oracle template, ns.
    #[arg(long, default_value_t = 0.02)]
    dt: f64,
}

#[derive(Args)]
struct SpectrogramArgs {
    /// Design frequencies, GHz: `a,b,c` or `start:stop:step`.
    #[arg(long, value_parser = grid_arg, allow_hyphen_values = true)]
    fgrid: Grid,
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    tc: f64,
    #[arg(long, default_value_t = 0.02)]
    dt: f64,
    #[arg(long, default_value_t = 1 << 16)]
    nfft: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PsdArgs {
    /// Waveform coefficient file.
    #[arg(long, conflicts_with = "doublet")]
    coeffs: Option<PathBuf>,
    /// Gaussian doublet instead of a coefficient file.
    #[arg(long)]
    doublet: bool,
    /// Simulate a received stretch with this config (its waveform settings apply).
    #[arg(long, conflicts_with_all = ["coeffs", "doublet"])]
    config: Option<PathBuf>,
    /// Bits in the received stretch.
    #[arg(long, default_value_t = 256)]
    bits: usize,
    #[arg(long)]
    nfft: Option<usize>,
    #[arg(long, default_value_t = 0.02)]
    dt: f64,
    #[arg(long)]
    out: PathBuf,
    /// PSD after the clipper (needs --config with the clipper enabled).
    #[arg(long, requires = "config")]
    clipped_out: Option<PathBuf>,
}

#[derive(Args)]
struct BerArgs {
    #[arg(long)]
    config: PathBuf,
    /// fj | sjr | ebn0 | mu_eps | sigma_eps | fhat_vs_fj
    #[arg(long)]
    axis: SweepAxis,
    /// Axis values (GHz for frequency axes, dB otherwise); fhat_vs_fj pairs the grid with itself.
    #[arg(long, value_parser = grid_arg, allow_hyphen_values = true)]
    grid: Grid,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Draw the jammer phase uniformly per trial.
    #[arg(long)]
    random_theta: bool,
    /// Also dump per-bit correlator terms at the config's base point.
    #[arg(long)]
    instrumented: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1.0)]
    tol_scale: f64,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long, hide = true)]
    mutate_xn: bool,
}

#[derive(Debug, Clone)]
struct Grid(Vec<f64>);

fn grid_arg(s: &str) -> std::result::Result<Grid, String> {
    parse_grid(s).map(Grid).map_err(|e| e.to_string())
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_design(a: DesignArgs) -> Result<bool> {
    let problem = DesignProblem::new(a.fhat * GHZ, a.tc * NS, a.n)?;
    let result = match a.method {
        DesignMethod::Eigen => design_eigen(&problem)?,
        DesignMethod::Powell => {
            let mut opts = PowellOptions::seeded(a.seed);
            if let Some(t) = a.tol {
                opts.tol = t;
            }
            if let Some(m) = a.max_outer {
                opts.max_outer = m;
            }
            design_powell(&problem, &opts)?
        }
    };
    let file = CoefficientFile::from_design(&result, a.seed);
    match &a.out {
        Some(p) => write(p, &file.to_json())?,
        None => print!("{}", file.to_json()),
    }
    eprintln!("cost {} ns after {} iterations", fmt_e(result.cost / NS), result.iterations);
    if !result.converged {
        eprintln!("error: design did not converge; best iterate written");
    }
    Ok(result.converged)
}

fn cmd_cost(a: CostArgs) -> Result<()> {
    let file = CoefficientFile::read(&a.coeffs).with_context(|| format!("reading {}", a.coeffs.display()))?;
    let fj = a.fj.map_or(file.fhat_hz, |f| f * GHZ);
    if !(fj > 0.0 && fj.is_finite()) {
        bail!("jammer frequency must be positive");
    }
    let closed = cost_f(fj, &file.coeffs, file.tc_s);
    let w = make_rect_composite(&file.coeffs, file.tc_s, a.dt * NS)?;
    let v = make_template(&w, file.tc_s / 2.0, file.tc_s)?;
    let oracle = oracle_cost(&v, fj, 0.0)?;
    println!("closed-form cost: {} ns", fmt_e(closed / NS));
    println!("oracle cost:      {} ns", fmt_e(oracle / NS));
    Ok(())
}

fn cmd_spectrogram(a: SpectrogramArgs) -> Result<()> {
    let fhats: Vec<f64> = a.fgrid.0.iter().map(|f| f * GHZ).collect();
    let template = DesignProblem::new(fhats[0], a.tc * NS, a.n)?;
    let rows = design_spectrogram(&fhats, &template, a.dt * NS, a.nfft)?;
    write(&a.out, &Spectrogram::new(&fhats, &rows)?.to_csv())
}

fn cmd_psd(a: PsdArgs) -> Result<()> {
    if let Some(cfg_path) = &a.config {
        let cfg = CliConfig::load(cfg_path)?.to_sim()?;
        let out = received_psd(&cfg, a.bits, a.nfft.unwrap_or(1024))?;
        write(&a.out, &psd_csv(&out.received))?;
        if let Some(p) = &a.clipped_out {
            let Some(clipped) = &out.clipped else { bail!("--clipped-out needs clipper.enabled = true") };
            write(p, &psd_csv(clipped))?;
        }
        return Ok(());
    }
    let dt = a.dt * NS;
    let w: Waveform = match (&a.coeffs, a.doublet) {
        (Some(p), _) => {
            let file = CoefficientFile::read(p).with_context(|| format!("reading {}", p.display()))?;
            normalize(&make_rect_composite(&file.coeffs, file.tc_s, dt)?)?
        }
        (None, true) => normalize(&gaussian_doublet(1.0, 0.5 * NS, 0.25 * NS, dt)?)?,
        (None, false) => bail!("one of --coeffs, --doublet or --config is required"),
    };
    write(&a.out, &psd_csv(&psd(w.samples(), dt, a.nfft.unwrap_or(1 << 16))?))
}

fn cmd_ber(a: BerArgs) -> Result<()> {
    let mut cfg = CliConfig::load(&a.config)?.to_sim()?;
    cfg.random_theta = a.random_theta;
    let scale = if a.axis.is_frequency() { GHZ } else { 1.0 };
    let grid: Vec<f64> = a.grid.0.iter().map(|x| x * scale).collect();
    let points = if a.workers > 0 {
        sweep_with_workers(&cfg, a.axis, &grid, a.workers)?
    } else {
        sweep(&cfg, a.axis, &grid)?
    };
    write(&a.out, &sweep_csv(a.axis, &points))?;
    let aborted: u64 = points.iter().map(|p| p.n_aborted).sum();
    if aborted > 0 {
        eprintln!("warning: {aborted} trials aborted (design did not converge); excluded from BER");
    }
    let clamped: u64 = points.iter().map(|p| p.clamp_count).sum();
    if clamped > 0 {
        eprintln!("note: {clamped} frequency estimates clamped into the design band");
    }
    for p in &points {
        let label = match p.grid {
            Some((fh, fj)) => format!("fhat {} GHz fj {} GHz", fh / GHZ, fj / GHZ),
            None => format!("{} {}", a.axis, p.value / scale),
        };
        println!("{label}: BER {} ({}/{}) CI [{}, {}]", fmt_e(p.ber), p.n_errors, p.n_bits, fmt_e(p.ci_low), fmt_e(p.ci_high));
    }
    if let Some(path) = &a.instrumented {
        write(path, &instrumented_csv(&run_instrumented(&cfg)?))?;
    }
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<bool> {
    let opts = VerifyOptions { tol_scale: a.tol_scale, mutate_xn: a.mutate_xn, seed: a.seed };
    let checks = run_checks(&opts)?;
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &checks {
        println!(
            "{} {:width$}  residual {}  tol {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            fmt_e(c.residual),
            fmt_e(c.tolerance),
        );
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {failed} failed", checks.len());
    Ok(failed == 0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Design(a) => cmd_design(a),
        Cmd::Cost(a) => cmd_cost(a).map(|_| true),
        Cmd::Spectrogram(a) => cmd_spectrogram(a).map(|_| true),
        Cmd::Psd(a) => cmd_psd(a).map(|_| true),
        Cmd::Ber(a) => cmd_ber(a).map(|_| true),
        Cmd::Verify(a) => cmd_verify(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
