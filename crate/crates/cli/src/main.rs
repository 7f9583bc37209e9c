//! Command-line front end over the gap-equation library: assumption
//! checks, single-point critical-temperature and gap solves, asymptotic
//! constants, and coupling-ladder sweeps.
//!
//! Exit codes: 0 success, 1 invalid input (bad flags, malformed
//! descriptors, domain violations), 2 numerical failure (no convergence,
//! unresolvable scales, no transition). Every numeric field is printed
//! with 17 significant digits so that output re-parses to the exact
//! computed value.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use bcs_core::critical_temperature::find_tc;
use bcs_core::error::Error;
use bcs_core::fermi_grid::{build_grid, suggest_cutoff, RadialGrid};
use bcs_core::gap_solver::{energy_gap, solve_gap_detailed};
use bcs_core::potential::PotentialSpec;
use bcs_core::spectral::assemble_kernel;
use bcs_core::sphere_asymptotics::{
    b_mu, build_vmu, build_wmu, e_mu, predicted_tc, predicted_xi, universal_ratio,
};
use bcs_core::universality_sweep::{run_sweep, to_csv, to_json, to_svg, SweepConfig, SweepRecord};

#[derive(Parser)]
#[command(
    name = "bcs",
    version,
    about = "BCS gap equation and critical temperature for radial pair potentials (d = 1, 2)",
    after_help = "Units: energies in units where hbar^2/2m = 1, momenta in the matching \
                  inverse length, temperatures in energy units (k_B = 1). The environment \
                  variable BCS_THREADS caps the worker thread count."
)]
struct Cli {
    /// Plain-text key=value file supplying defaults; explicit flags win
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PhysicsArgs {
    /// Space dimension, 1 or 2 (dimensionless)
    #[arg(short = 'd', long)]
    dimension: Option<usize>,
    /// Chemical potential mu (energy)
    #[arg(long)]
    mu: Option<f64>,
    /// Interaction: gaussian:a=<energy>,sigma=<length> or table:<path>
    #[arg(long, value_name = "DESC")]
    potential: Option<String>,
}

#[derive(Args)]
struct GridArgs {
    /// Momentum cutoff of the radial grid (momentum); derived from the
    /// interaction range when omitted
    #[arg(long)]
    cutoff: Option<f64>,
    /// Gauss-Legendre points per graded panel (count)
    #[arg(long)]
    points_per_panel: Option<usize>,
    /// Innermost panel edge in |p^2/mu - 1| (dimensionless); derived from
    /// the predicted critical temperature when omitted
    #[arg(long)]
    s_min: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Check an interaction against the pairing hypotheses and print the report
    Validate {
        #[command(flatten)]
        physics: PhysicsArgs,
    },
    /// Critical temperature from the spectral criterion
    Tc {
        #[command(flatten)]
        physics: PhysicsArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Coupling strength lambda (dimensionless)
        #[arg(long)]
        lambda: Option<f64>,
        /// Relative bisection tolerance on Tc (dimensionless)
        #[arg(long)]
        rtol: Option<f64>,
    },
    /// Gap profile, energy gap, and Fermi-surface gap value
    Gap {
        #[command(flatten)]
        physics: PhysicsArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Coupling strength lambda (dimensionless)
        #[arg(long)]
        lambda: Option<f64>,
        /// Temperature (energy); 0 solves the ground state
        #[arg(long)]
        temperature: Option<f64>,
        /// Fixed-point damping step in (0, 1] (dimensionless)
        #[arg(long)]
        damping: Option<f64>,
        /// Relative sup-norm convergence tolerance (dimensionless)
        #[arg(long)]
        rtol: Option<f64>,
        /// Iteration budget (count)
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Weak-coupling constants and the predicted Tc and gap
    Asym {
        #[command(flatten)]
        physics: PhysicsArgs,
        /// Coupling strength lambda (dimensionless)
        #[arg(long)]
        lambda: Option<f64>,
        /// Fourier mode cutoff of the d = 2 sphere operators (count)
        #[arg(long)]
        mode_cutoff: Option<usize>,
    },
    /// Coupling-ladder sweep; one record per lambda
    Sweep {
        #[command(flatten)]
        physics: PhysicsArgs,
        /// Momentum cutoff of the radial grids (momentum); derived from
        /// the interaction range when omitted
        #[arg(long)]
        cutoff: Option<f64>,
        /// Gauss-Legendre points per graded panel (count)
        #[arg(long)]
        points_per_panel: Option<usize>,
        /// Finest panel edge as a fraction of predicted_Tc/mu (dimensionless)
        #[arg(long)]
        s_min_fraction: Option<f64>,
        /// Descending coupling ladder, comma separated (dimensionless)
        #[arg(long, value_name = "L1,L2,...")]
        lambdas: Option<String>,
        /// Relative bisection tolerance on each Tc (dimensionless)
        #[arg(long)]
        tc_rtol: Option<f64>,
        /// Relative convergence tolerance of each gap solve (dimensionless)
        #[arg(long)]
        gap_rtol: Option<f64>,
        /// Iteration budget per gap solve (count)
        #[arg(long)]
        max_gap_iter: Option<usize>,
        /// Fourier mode cutoff of the d = 2 sphere operators (count)
        #[arg(long)]
        mode_cutoff: Option<usize>,
        /// Record format: csv or json
        #[arg(long)]
        format: Option<String>,
        /// Output file; stdout when omitted
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write an SVG plot beside the output file (requires --output)
        #[arg(long)]
        plot: bool,
    },
}

/// An error tagged with the module it came from, for the diagnostic line.
struct Failure {
    module: &'static str,
    error: Error,
}

trait Tag<T> {
    fn at(self, module: &'static str) -> Result<T, Failure>;
}

impl<T> Tag<T> for Result<T, Error> {
    fn at(self, module: &'static str) -> Result<T, Failure> {
        self.map_err(|error| Failure { module, error })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            if matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) {
                print!("{err}");
                return ExitCode::SUCCESS;
            }
            eprint!("{err}");
            return ExitCode::from(1);
        }
    };
    if let Err(failure) = init_threads().and_then(|()| run(cli)) {
        let message: String = failure
            .error
            .to_string()
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ");
        eprintln!(
            "error[{}] in {}: {}",
            failure.error.kind(),
            failure.module,
            message
        );
        return ExitCode::from(if failure.error.is_usage() { 1 } else { 2 });
    }
    ExitCode::SUCCESS
}

fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("BCS_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.parse().map_err(|_| Failure {
        module: "cli",
        error: Error::Config(format!(
            "BCS_THREADS must be a positive integer, got '{raw}'"
        )),
    })?;
    if threads == 0 {
        return Err(Failure {
            module: "cli",
            error: Error::Config("BCS_THREADS must be at least 1".into()),
        });
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure {
            module: "cli",
            error: Error::Config(format!("could not size the thread pool: {e}")),
        })
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = match &cli.config {
        Some(path) => load_config(path).at("cli")?,
        None => HashMap::new(),
    };
    match cli.command {
        Command::Validate { physics } => run_validate(physics, &file),
        Command::Tc {
            physics,
            grid,
            lambda,
            rtol,
        } => run_tc(physics, grid, lambda, rtol, &file),
        Command::Gap {
            physics,
            grid,
            lambda,
            temperature,
            damping,
            rtol,
            max_iter,
        } => run_gap(
            physics,
            grid,
            lambda,
            temperature,
            damping,
            rtol,
            max_iter,
            &file,
        ),
        Command::Asym {
            physics,
            lambda,
            mode_cutoff,
        } => run_asym(physics, lambda, mode_cutoff, &file),
        Command::Sweep {
            physics,
            cutoff,
            points_per_panel,
            s_min_fraction,
            lambdas,
            tc_rtol,
            gap_rtol,
            max_gap_iter,
            mode_cutoff,
            format,
            output,
            plot,
        } => run_sweep_cmd(
            physics,
            SweepFlags {
                cutoff,
                points_per_panel,
                s_min_fraction,
                lambdas,
                tc_rtol,
                gap_rtol,
                max_gap_iter,
                mode_cutoff,
                format,
                output,
                plot,
            },
            &file,
        ),
    }
}

/// Parses a key=value defaults file; '#' starts a comment, blank lines are
/// skipped, keys use the long flag spelling.
fn load_config(path: &Path) -> Result<HashMap<String, String>, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config file {}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("config line {} is not key=value: '{raw}'", idx + 1))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Flag value if given, else the config-file value, else none.
fn merged<T: FromStr>(
    flag: Option<T>,
    file: &HashMap<String, String>,
    key: &str,
) -> Result<Option<T>, Error> {
    if flag.is_some() {
        return Ok(flag);
    }
    match file.get(key) {
        Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
            Error::Config(format!("config key {key} has an unparsable value '{raw}'"))
        }),
        None => Ok(None),
    }
}

fn required<T>(value: Option<T>, what: &str) -> Result<T, Error> {
    value.ok_or_else(|| {
        Error::Config(format!(
            "missing required parameter {what}; pass the flag or put it in the config file"
        ))
    })
}

struct Physics {
    dimension: usize,
    mu: f64,
    potential: PotentialSpec<f64>,
}

fn resolve_physics(args: PhysicsArgs, file: &HashMap<String, String>) -> Result<Physics, Error> {
    let dimension = required(merged(args.dimension, file, "dimension")?, "--dimension")?;
    let mu = required(merged(args.mu, file, "mu")?, "--mu")?;
    let descriptor = required(merged(args.potential, file, "potential")?, "--potential")?;
    let potential = parse_potential(dimension, &descriptor)?;
    Ok(Physics {
        dimension,
        mu,
        potential,
    })
}

fn parse_potential(dimension: usize, descriptor: &str) -> Result<PotentialSpec<f64>, Error> {
    if let Some(body) = descriptor.strip_prefix("gaussian:") {
        let mut amplitude = None;
        let mut width = None;
        for part in body.split(',') {
            let (key, value) = part.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "malformed gaussian parameter '{part}'; expected key=value"
                ))
            })?;
            let value: f64 = value.trim().parse().map_err(|_| {
                Error::Config(format!(
                    "gaussian parameter {key} is not a number: '{value}'"
                ))
            })?;
            match key.trim() {
                "a" => amplitude = Some(value),
                "sigma" => width = Some(value),
                other => {
                    return Err(Error::Config(format!(
                        "unknown gaussian parameter '{other}'; expected a, sigma"
                    )))
                }
            }
        }
        let amplitude = required(amplitude, "gaussian amplitude a")?;
        let width = required(width, "gaussian width sigma")?;
        PotentialSpec::gaussian(dimension, amplitude, width)
    } else if let Some(path) = descriptor.strip_prefix("table:") {
        PotentialSpec::tabulated_from_path(dimension, Path::new(path))
    } else {
        Err(Error::Config(format!(
            "unrecognized potential descriptor '{descriptor}'; expected \
             gaussian:a=<v>,sigma=<v> or table:<path>"
        )))
    }
}

/// Builds the radial grid for a single-point solve. Without an explicit
/// s_min the innermost panel is tied to the predicted critical
/// temperature; if no prediction is possible the core solver is left to
/// report the authoritative error on a placeholder grid.
fn resolve_grid(
    physics: &Physics,
    args: GridArgs,
    lambda: f64,
    file: &HashMap<String, String>,
) -> Result<RadialGrid<f64>, Error> {
    let cutoff = merged(args.cutoff, file, "cutoff")?
        .unwrap_or_else(|| suggest_cutoff(&physics.potential, physics.mu));
    let points = merged(args.points_per_panel, file, "points-per-panel")?.unwrap_or(12);
    let s_min = match merged(args.s_min, file, "s-min")? {
        Some(s) => s,
        None => default_s_min(physics, lambda),
    };
    build_grid(physics.mu, cutoff, points, s_min)
}

fn default_s_min(physics: &Physics, lambda: f64) -> f64 {
    let predicted = build_vmu(&physics.potential, physics.mu, 32)
        .and_then(|vop| {
            let wop = build_wmu(&physics.potential, physics.mu, 32)?;
            b_mu(&vop, &wop, lambda)
        })
        .and_then(|b| predicted_tc(physics.mu, physics.dimension, b));
    match predicted {
        Ok(tc) => (0.1 * tc / physics.mu).clamp(1e-9, 0.25),
        Err(_) => 1e-4,
    }
}

fn run_validate(physics: PhysicsArgs, file: &HashMap<String, String>) -> Result<(), Failure> {
    let physics = resolve_physics(physics, file).at("cli")?;
    let report = physics.potential.validate();
    println!("dimension = {}", report.dimension);
    println!("vhat_zero = {:.16e}", report.vhat_zero);
    println!("vhat_max = {:.16e}", report.vhat_max);
    println!("vhat_nonpositive = {}", report.vhat_nonpositive);
    println!("vhat_negative_at_zero = {}", report.vhat_negative_at_zero);
    println!("integral_abs = {:.16e}", report.integral_abs);
    print_moment("log_moment", report.log_moment);
    print_moment("sqrt_moment", report.sqrt_moment);
    print_moment("square_integral", report.square_integral);
    println!("sampled_p_max = {:.16e}", report.sampled_p_max);
    println!("tc_eligible = {}", report.tc_eligible());
    println!("gap_eligible = {}", report.gap_eligible());
    Ok(())
}

fn print_moment(name: &str, value: Option<f64>) {
    match value {
        Some(v) => println!("{name} = {v:.16e}"),
        None => println!("{name} = n/a"),
    }
}

fn run_tc(
    physics: PhysicsArgs,
    grid: GridArgs,
    lambda: Option<f64>,
    rtol: Option<f64>,
    file: &HashMap<String, String>,
) -> Result<(), Failure> {
    let physics = resolve_physics(physics, file).at("cli")?;
    let lambda = required(merged(lambda, file, "lambda").at("cli")?, "--lambda").at("cli")?;
    let rtol = merged(rtol, file, "rtol").at("cli")?.unwrap_or(1e-9);
    let grid = resolve_grid(&physics, grid, lambda, file).at("fermi_grid")?;
    let result = find_tc(&physics.potential, &grid, lambda, rtol).at("critical_temperature")?;
    println!("Tc = {:.16e}", result.tc);
    println!("bracket_lo = {:.16e}", result.bracket.0);
    println!("bracket_hi = {:.16e}", result.bracket.1);
    println!("eigenvalue_at_Tc = {:.16e}", result.eigenvalue_at_tc);
    println!("grid_points = {}", grid.len());
    println!("grid_s_min = {:.16e}", grid.s_min());
    println!("grid_cutoff = {:.16e}", grid.cutoff());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_gap(
    physics: PhysicsArgs,
    grid: GridArgs,
    lambda: Option<f64>,
    temperature: Option<f64>,
    damping: Option<f64>,
    rtol: Option<f64>,
    max_iter: Option<usize>,
    file: &HashMap<String, String>,
) -> Result<(), Failure> {
    let physics = resolve_physics(physics, file).at("cli")?;
    let lambda = required(merged(lambda, file, "lambda").at("cli")?, "--lambda").at("cli")?;
    let temperature = merged(temperature, file, "temperature")
        .at("cli")?
        .unwrap_or(0.0);
    let damping = merged(damping, file, "damping").at("cli")?.unwrap_or(1.0);
    let rtol = merged(rtol, file, "rtol").at("cli")?.unwrap_or(1e-10);
    let max_iter = merged(max_iter, file, "max-iter")
        .at("cli")?
        .unwrap_or(20_000);
    let grid = resolve_grid(&physics, grid, lambda, file).at("fermi_grid")?;
    let kernel = assemble_kernel(&physics.potential, &grid);
    let solve = solve_gap_detailed(
        &physics.potential,
        &kernel,
        &grid,
        lambda,
        temperature,
        damping,
        rtol,
        max_iter,
    )
    .at("gap_solver")?;
    let (xi, minimizer) = energy_gap(&solve.gap, physics.mu).at("gap_solver")?;
    println!("Xi = {xi:.16e}");
    println!("Delta_fermi = {:.16e}", solve.gap.at(physics.mu.sqrt()));
    println!("gap_minimizer = {minimizer:.16e}");
    println!("iterations = {}", solve.iterations);
    println!("residual = {:.16e}", solve.residual);
    Ok(())
}

fn run_asym(
    physics: PhysicsArgs,
    lambda: Option<f64>,
    mode_cutoff: Option<usize>,
    file: &HashMap<String, String>,
) -> Result<(), Failure> {
    let physics = resolve_physics(physics, file).at("cli")?;
    let lambda = required(merged(lambda, file, "lambda").at("cli")?, "--lambda").at("cli")?;
    let modes = merged(mode_cutoff, file, "mode-cutoff")
        .at("cli")?
        .unwrap_or(32);
    let vop = build_vmu(&physics.potential, physics.mu, modes).at("sphere_asymptotics")?;
    let wop = build_wmu(&physics.potential, physics.mu, modes).at("sphere_asymptotics")?;
    let e = e_mu(&vop).at("sphere_asymptotics")?;
    let b = b_mu(&vop, &wop, lambda).at("sphere_asymptotics")?;
    let tc = predicted_tc(physics.mu, physics.dimension, b).at("sphere_asymptotics")?;
    let xi = predicted_xi(physics.mu, physics.dimension, b).at("sphere_asymptotics")?;
    println!("e_mu = {e:.16e}");
    println!("b_mu = {b:.16e}");
    println!("predicted_Tc = {tc:.16e}");
    println!("predicted_Xi = {xi:.16e}");
    println!("universal_ratio = {:.16e}", universal_ratio::<f64>());
    Ok(())
}

struct SweepFlags {
    cutoff: Option<f64>,
    points_per_panel: Option<usize>,
    s_min_fraction: Option<f64>,
    lambdas: Option<String>,
    tc_rtol: Option<f64>,
    gap_rtol: Option<f64>,
    max_gap_iter: Option<usize>,
    mode_cutoff: Option<usize>,
    format: Option<String>,
    output: Option<PathBuf>,
    plot: bool,
}

fn run_sweep_cmd(
    physics: PhysicsArgs,
    flags: SweepFlags,
    file: &HashMap<String, String>,
) -> Result<(), Failure> {
    let physics = resolve_physics(physics, file).at("cli")?;
    let ladder_raw = required(
        merged(flags.lambdas, file, "lambdas").at("cli")?,
        "--lambdas",
    )
    .at("cli")?;
    let lambdas = parse_ladder(&ladder_raw).at("cli")?;
    let mut config = SweepConfig::new(physics.potential, physics.mu, lambdas);
    config.grid.cutoff = merged(flags.cutoff, file, "cutoff").at("cli")?;
    if let Some(points) = merged(flags.points_per_panel, file, "points-per-panel").at("cli")? {
        config.grid.points_per_panel = points;
    }
    if let Some(fraction) = merged(flags.s_min_fraction, file, "s-min-fraction").at("cli")? {
        config.grid.s_min_fraction = fraction;
    }
    if let Some(rtol) = merged(flags.tc_rtol, file, "tc-rtol").at("cli")? {
        config.tc_rtol = rtol;
    }
    if let Some(rtol) = merged(flags.gap_rtol, file, "gap-rtol").at("cli")? {
        config.gap_rtol = rtol;
    }
    if let Some(iters) = merged(flags.max_gap_iter, file, "max-gap-iter").at("cli")? {
        config.max_gap_iter = iters;
    }
    if let Some(modes) = merged(flags.mode_cutoff, file, "mode-cutoff").at("cli")? {
        config.mode_cutoff = modes;
    }
    let format = merged(flags.format, file, "format")
        .at("cli")?
        .unwrap_or_else(|| "csv".into());
    if format != "csv" && format != "json" {
        return Err(Error::Config(format!(
            "unknown output format '{format}'; expected csv or json"
        )))
        .at("cli");
    }
    let output: Option<PathBuf> = merged(flags.output, file, "output").at("cli")?;
    let plot = flags.plot
        || matches!(
            file.get("plot").map(String::as_str),
            Some("true") | Some("1")
        );
    if plot && output.is_none() {
        return Err(Error::Config(
            "--plot needs --output to know where to put the SVG".into(),
        ))
        .at("cli");
    }

    let records = run_sweep(&config).at("universality_sweep")?;
    for record in &records {
        log_record(record);
    }
    let rendered = if format == "csv" {
        to_csv(&records)
    } else {
        to_json(&records)
    };
    match &output {
        Some(path) => {
            std::fs::write(path, rendered)
                .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
                .at("cli")?;
            if plot {
                let svg_path = path.with_extension("svg");
                std::fs::write(&svg_path, to_svg(&records))
                    .map_err(|e| Error::Config(format!("cannot write {}: {e}", svg_path.display())))
                    .at("cli")?;
            }
        }
        None => print!("{rendered}"),
    }
    Ok(())
}

fn parse_ladder(raw: &str) -> Result<Vec<f64>, Error> {
    raw.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("ladder entry '{part}' is not a number")))
        })
        .collect()
}

fn log_record(record: &SweepRecord<f64>) {
    eprintln!(
        "lambda = {:.6e}  status = {}  Tc = {:.6e}  Xi = {:.6e}  wall = {:.2}s",
        record.lambda, record.status, record.tc, record.xi, record.wall_seconds
    );
}
