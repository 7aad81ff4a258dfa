// Guards of the form `!(x > 0.0)` are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use isoprob::alignment::{align, mse, resample_bilinear, AlignBounds, AlignConfig, AlignParams};
use isoprob::analytic::{aeh_exact, lmsz_asymptotic, rabi_resonant};
use isoprob::catalog::{Catalog, FormulaCheck, Model, ModelClass, TruncationPolicy};
use isoprob::dynamics::{
    guard_error_estimate, propagate_full, trajectory, write_trajectory_csv, IntegratorConfig,
    Picture, StepMode,
};
use isoprob::landscape::{load_csv, render_heatmap, save_csv, scan, Axis, Grid};

/// Isoprobability drive pairs for two-level systems.
#[derive(Parser, Debug)]
#[command(name = "isoprob", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the pulse-shape catalog (CSV), or its audit (JSON lines).
    Catalog {
        #[arg(long)]
        audit: bool,
    },
    /// Propagate one drive pair and print its transition probability.
    Simulate(SimulateArgs),
    /// Compute a landscape P(alpha, beta) and write it as CSV.
    Scan(ScanArgs),
    /// Evaluate a closed-form probability.
    Analytic(AnalyticArgs),
    /// Compare two landscape CSV files, optionally aligning them first.
    Compare(CompareArgs),
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Isoprobability class: lmsz or aeh.
    #[arg(long)]
    class: ModelClass,
    /// Catalog row, 1 to 16.
    #[arg(long)]
    row: u8,
    /// full, tail:EPS, window:HALF_WIDTH, guard:DELTA or experimental.
    #[arg(long)]
    truncation: Option<String>,
}

impl ModelArgs {
    fn model(&self) -> Result<Model> {
        let catalog = Catalog::standard();
        let model = match self.truncation.as_deref() {
            None => catalog.model(self.class, self.row)?,
            Some("experimental") => {
                let policy = TruncationPolicy::experimental_window(self.class, self.row)
                    .with_context(|| {
                        format!(
                            "no experimental window is defined for {} row {}",
                            self.class, self.row
                        )
                    })?;
                catalog.model_with(self.class, self.row, policy)?
            }
            Some(text) => catalog.model_with(self.class, self.row, text.parse()?)?,
        };
        Ok(model)
    }
}

#[derive(Args, Debug)]
struct IntegratorArgs {
    #[arg(long, default_value_t = 1e-10)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    abs_tol: f64,
    /// Adaptive step budget.
    #[arg(long, default_value_t = 2_000_000)]
    max_steps: usize,
    /// Use fixed-step RK4 with this many steps instead of the adaptive pair.
    #[arg(long)]
    fixed_steps: Option<usize>,
}

impl IntegratorArgs {
    fn config(&self) -> Result<IntegratorConfig> {
        let cfg = match self.fixed_steps {
            Some(n) => IntegratorConfig {
                rel_tol: self.rel_tol,
                abs_tol: self.abs_tol,
                max_steps: n,
                mode: StepMode::Fixed,
            },
            None => IntegratorConfig {
                rel_tol: self.rel_tol,
                abs_tol: self.abs_tol,
                max_steps: self.max_steps,
                mode: StepMode::Adaptive,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PictureArg {
    Detuning,
    Phase,
}

impl From<PictureArg> for Picture {
    fn from(p: PictureArg) -> Picture {
        match p {
            PictureArg::Detuning => Picture::Detuning,
            PictureArg::Phase => Picture::Phase,
        }
    }
}

/// `α = Ω₀τ/2` with `Ω₀ = 2π f` for `f` in MHz and `τ` in ns.
fn physical_to_class(freq_mhz: f64, tau_ns: f64) -> f64 {
    PI * freq_mhz * tau_ns * 1e-3
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    /// Rabi amplitude Ω₀/2π in MHz (with --delta0-mhz and --tau-ns).
    #[arg(long, allow_negative_numbers = true)]
    omega0_mhz: Option<f64>,
    /// Detuning amplitude Δ₀/2π in MHz.
    #[arg(long, allow_negative_numbers = true)]
    delta0_mhz: Option<f64>,
    /// Time scale τ in ns.
    #[arg(long)]
    tau_ns: Option<f64>,
    #[arg(long, value_enum, default_value = "detuning")]
    picture: PictureArg,
    #[command(flatten)]
    integrator: IntegratorArgs,
    /// Also write the state trajectory as CSV.
    #[arg(long)]
    trajectory: Option<PathBuf>,
    /// Report the endpoint-guard error estimate |P(δ) − P(δ/2)|.
    #[arg(long)]
    guard_estimate: bool,
}

fn class_parameters(
    alpha: Option<f64>,
    beta: Option<f64>,
    omega0: Option<f64>,
    delta0: Option<f64>,
    tau: Option<f64>,
) -> Result<(f64, f64)> {
    let dimensionless = alpha.is_some() || beta.is_some();
    let physical = omega0.is_some() || delta0.is_some() || tau.is_some();
    match (dimensionless, physical) {
        (true, true) => bail!("give either --alpha/--beta or --omega0-mhz/--delta0-mhz/--tau-ns, not both"),
        (false, false) => bail!("missing drive parameters: give --alpha and --beta, or --omega0-mhz, --delta0-mhz and --tau-ns"),
        (true, false) => match (alpha, beta) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => bail!("--alpha and --beta must be given together"),
        },
        (false, true) => match (omega0, delta0, tau) {
            (Some(w), Some(d), Some(t)) => {
                if !(t > 0.0) {
                    bail!("--tau-ns must be positive, got {t}");
                }
                Ok((physical_to_class(w, t), physical_to_class(d, t)))
            }
            _ => bail!("--omega0-mhz, --delta0-mhz and --tau-ns must be given together"),
        },
    }
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let (alpha, beta) = class_parameters(
        args.alpha,
        args.beta,
        args.omega0_mhz,
        args.delta0_mhz,
        args.tau_ns,
    )?;
    if !(alpha >= 0.0) {
        bail!("alpha must be non-negative, got {alpha}");
    }
    let model = args.model.model()?;
    let cfg = args.integrator.config()?;
    let picture = Picture::from(args.picture);
    let pair = model.at(alpha, beta);
    let u = propagate_full(&pair, picture, &cfg)?;
    let span = model.span();
    let mut out = json!({
        "class": model.class().as_str(),
        "row": model.row(),
        "picture": picture.as_str(),
        "alpha": alpha,
        "beta": beta,
        "probability": u.transition_probability().clamp(0.0, 1.0),
        "unitarity_defect": u.unitarity_defect(),
        "truncation": model.policy().to_string(),
        "window": [span.lo, span.hi],
    });
    if args.guard_estimate {
        out["guard_error"] = json!(guard_error_estimate(&pair, picture, &cfg)?);
    }
    if let Some(path) = &args.trajectory {
        let points = trajectory(&pair, picture, &cfg)?;
        let file =
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        write_trajectory_csv(&points, BufWriter::new(file))?;
        eprintln!(
            "wrote {} trajectory points to {}",
            points.len(),
            path.display()
        );
    }
    println!("{out}");
    Ok(())
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// alpha axis start:stop:count.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<Axis>,
    /// beta axis start:stop:count.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<Axis>,
    /// Ω₀/2π axis in MHz, start:stop:count (with --delta0-mhz and --tau-ns).
    #[arg(long, allow_hyphen_values = true)]
    omega0_mhz: Option<Axis>,
    /// Δ₀/2π axis in MHz, start:stop:count.
    #[arg(long, allow_hyphen_values = true)]
    delta0_mhz: Option<Axis>,
    #[arg(long)]
    tau_ns: Option<f64>,
    #[arg(long, value_enum, default_value = "detuning")]
    picture: PictureArg,
    #[command(flatten)]
    integrator: IntegratorArgs,
    /// Landscape CSV output.
    #[arg(long)]
    out: PathBuf,
    /// Grayscale raster output (.pgm, or .png).
    #[arg(long)]
    image: Option<PathBuf>,
}

fn scaled_axis(ax: Axis, factor: f64) -> Result<Axis> {
    Ok(Axis::new(
        ax.start() * factor,
        ax.stop() * factor,
        ax.count(),
    )?)
}

fn scan_cmd(args: &ScanArgs) -> Result<()> {
    let dimensionless = args.alpha.is_some() || args.beta.is_some();
    let physical = args.omega0_mhz.is_some() || args.delta0_mhz.is_some() || args.tau_ns.is_some();
    let (alpha, beta) = match (dimensionless, physical) {
        (true, true) => {
            bail!("give either --alpha/--beta or --omega0-mhz/--delta0-mhz/--tau-ns axes, not both")
        }
        (false, true) => match (args.omega0_mhz, args.delta0_mhz, args.tau_ns) {
            (Some(w), Some(d), Some(t)) if t > 0.0 => {
                let k = physical_to_class(1.0, t);
                (scaled_axis(w, k)?, scaled_axis(d, k)?)
            }
            _ => bail!("--omega0-mhz, --delta0-mhz and a positive --tau-ns must be given together"),
        },
        _ => (
            args.alpha.unwrap_or(Axis::new(0.0, 3.0, 101)?),
            args.beta.unwrap_or(Axis::new(-2.0, 2.0, 101)?),
        ),
    };
    let model = args.model.model()?;
    let cfg = args.integrator.config()?;
    let map = scan(&model, alpha, beta, args.picture.into(), &cfg)?;
    save_csv(&map, &args.out).with_context(|| format!("cannot write {}", args.out.display()))?;
    eprintln!(
        "wrote {}×{} landscape to {}",
        map.n_beta(),
        map.n_alpha(),
        args.out.display()
    );
    if let Some(path) = &args.image {
        render_heatmap(&map, path).with_context(|| format!("cannot write {}", path.display()))?;
        eprintln!("wrote raster to {}", path.display());
    }
    let (lo, hi) = map
        .values()
        .data()
        .iter()
        .fold((1.0f64, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    println!(
        "{}",
        json!({
            "out": args.out.display().to_string(),
            "alpha": alpha.to_string(),
            "beta": beta.to_string(),
            "min": lo,
            "max": hi,
        })
    );
    Ok(())
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Formula {
    Aeh,
    Lmsz,
    Rabi,
}

#[derive(Args, Debug)]
struct AnalyticArgs {
    #[arg(long, value_enum)]
    model: Formula,
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    /// Ignored by the resonant formula.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    beta: f64,
}

/// Rounds to 12 significant digits and prints the shortest form.
fn twelve_digits(v: f64) -> String {
    let rounded: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    format!("{}", rounded + 0.0)
}

fn analytic(args: &AnalyticArgs) -> Result<()> {
    if !(args.alpha >= 0.0) {
        bail!("alpha must be non-negative, got {}", args.alpha);
    }
    let p = match args.model {
        Formula::Aeh => aeh_exact(args.alpha, args.beta),
        Formula::Lmsz => lmsz_asymptotic(args.alpha, args.beta)?,
        Formula::Rabi => rabi_resonant(args.alpha),
    };
    println!("{}", twelve_digits(p));
    Ok(())
}

#[derive(Args, Debug)]
struct CompareArgs {
    a: PathBuf,
    b: PathBuf,
    /// Search shifts and trims that minimize the overlap MSE.
    #[arg(long)]
    align: bool,
    /// Resample both maps to N×N first.
    #[arg(long)]
    resample: Option<usize>,
    /// Shift and trim bounds as a percentage of each dimension.
    #[arg(long, default_value_t = 5.0)]
    bounds_pct: f64,
    /// Write the difference map b' − a over the overlap as CSV.
    #[arg(long)]
    diff: Option<PathBuf>,
}

fn write_grid_csv(g: &Grid, path: &PathBuf) -> Result<()> {
    let mut out = BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    );
    writeln!(out, "# difference,{},{}", g.rows(), g.cols())?;
    for i in 0..g.rows() {
        let line: Vec<String> = g.row(i).iter().map(|v| format!("{v:.8e}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(())
}

fn compare(args: &CompareArgs) -> Result<()> {
    let load = |p: &PathBuf| load_csv(p).with_context(|| format!("cannot load {}", p.display()));
    let (mut a, mut b) = (load(&args.a)?, load(&args.b)?);
    if let Some(n) = args.resample {
        a = resample_bilinear(&a, n, n)?;
        b = resample_bilinear(&b, n, n)?;
    } else if a.values().shape() != b.values().shape() {
        b = resample_bilinear(&b, a.n_alpha(), a.n_beta())?;
        eprintln!(
            "resampled {} onto the {}×{} grid of {}",
            args.b.display(),
            a.n_beta(),
            a.n_alpha(),
            args.a.display()
        );
    }
    let (ga, gb) = (a.values(), b.values());
    let mse_pre = mse(ga, gb)?;
    let (params, mse_post, overlap, diff) = if args.align {
        let bounds = AlignBounds::percent(args.bounds_pct, ga.rows(), ga.cols())?;
        let cfg = AlignConfig {
            difference_map: args.diff.is_some(),
            ..Default::default()
        };
        let r = align(ga, gb, bounds, &cfg)?;
        (r.params, r.mse_post, r.overlap_size, r.difference_map)
    } else {
        let p = AlignParams::default();
        let diff = args
            .diff
            .as_ref()
            .map(|_| isoprob::alignment::difference_map(ga, gb, &p))
            .transpose()?;
        (p, mse_pre, ga.data().len(), diff)
    };
    if let (Some(path), Some(g)) = (&args.diff, &diff) {
        write_grid_csv(g, path)?;
        eprintln!("wrote difference map to {}", path.display());
    }
    println!(
        "{}",
        json!({
            "mse_pre": mse_pre,
            "mse_post": mse_post,
            "dx": params.dx,
            "dy": params.dy,
            "trims_a": params.trims_a,
            "trims_b": params.trims_b,
            "overlap_size": overlap,
        })
    );
    Ok(())
}

fn label(c: &FormulaCheck) -> serde_json::Value {
    match c {
        FormulaCheck::NotListed => json!("not listed"),
        FormulaCheck::Accepted { max_deviation } => {
            json!({"verdict": "accepted", "max_deviation": max_deviation})
        }
        FormulaCheck::Rejected { max_deviation } => {
            json!({"verdict": "rejected", "max_deviation": max_deviation})
        }
    }
}

fn catalog(audit: bool) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    if !audit {
        Catalog::standard().write_csv(&mut out)?;
        return Ok(());
    }
    for e in Catalog::standard().entries() {
        let a = &e.audit;
        let line = json!({
            "row": a.row,
            "name": e.shape.name(),
            "domain": e.shape.domain().to_string(),
            "area_error": a.area_error,
            "listed_s": a.listed_s,
            "listed_integral": label(&a.listed_integral),
            "derivative_defect": a.derivative_defect,
            "symmetry_defect": a.symmetry_defect,
            "lmsz_listed": label(&a.lmsz_listed),
            "aeh_listed": label(&a.aeh_listed),
        });
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Catalog { audit } => catalog(*audit),
        Command::Simulate(a) => simulate(a),
        Command::Scan(a) => scan_cmd(a),
        Command::Analytic(a) => analytic(a),
        Command::Compare(a) => compare(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
