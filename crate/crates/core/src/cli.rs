//! Command-line front end.
//!
//! Subcommands: `point` (single evaluation), `sweep` (grids and figure
//! presets), `oracle` (spectral vs Monte-Carlo cross-check), `stability`,
//! `filters`. Everything on stdout is machine-parseable (JSON or CSV);
//! prose goes to stderr. Exit codes: 0 ok, 1 usage/config error,
//! 2 unstable parameters, 3 oracle mismatch.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{Config, ConfigError};
use crate::covariance::ModePair;
use crate::dynamics::LinearModel;
use crate::entanglement::{log_negativity, physicality};
use crate::filters::filter_freq;
use crate::spectrum::{
    extract_bipartite, output_cm, OutputCmDiagnostics, QuadratureSettings, SpectrumError,
};
use crate::sweep::{
    persist, sweep_grid, write_grid_matrix, Axis, AxisName, AxisScale, GridSpec, PersistFormat,
    SweepContext, SweepRecord,
};
use crate::timesim::{estimate_entanglement, simulate_output_samples, Integrator, SimSettings};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_UNSTABLE: i32 = 2;
pub const EXIT_ORACLE_FAIL: i32 = 3;

#[derive(Parser)]
#[command(
    name = "omsim",
    about = "Stationary entanglement of filtered optomagnonic output fields",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one parameter point; prints a JSON result.
    Point(CommonArgs),
    /// Sweep a parameter grid (or a figure preset) and write records.
    Sweep(SweepArgs),
    /// Cross-validate the spectral E_N against the Monte-Carlo oracle.
    Oracle(OracleArgs),
    /// Print the stability verdict and spectral abscissa.
    Stability(CommonArgs),
    /// Print a CSV table of |F~(omega)|^2 for both filters.
    Filters(FiltersArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// JSON configuration file; omitted keys fall back to the baseline.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override a config key (repeatable), e.g. --set G_b_hz=5.5e6
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Print the fully resolved configuration as JSON and exit.
    #[arg(long)]
    print_config: bool,
    /// Worker threads (default: OMSIM_WORKERS, then all cores).
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Sweep axis NAME:START:STOP:POINTS[:log] in external units
    /// (Hz, K, s); repeat for a 2-D grid. Axes: G_a, G_b, kappa_m, T,
    /// tau, detuning_a2, detuning_b1.
    #[arg(long = "axis", value_name = "SPEC")]
    axes: Vec<String>,
    /// Figure preset: 2a, 2b, 3a or 3b.
    #[arg(long, value_name = "NAME", conflicts_with = "axes")]
    fig: Option<String>,
    /// Output file (default: sweep.csv / fig<NAME>.csv).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_name = "csv|jsonl", default_value = "csv")]
    format: String,
    /// Record wall-clock per point (breaks bit-determinism of outputs).
    #[arg(long)]
    timing: bool,
    /// Also write a gnuplot nonuniform-matrix file for 2-D grids.
    #[arg(long, value_name = "PATH")]
    dat: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Trajectory count.
    #[arg(long, default_value_t = 2000)]
    traj: usize,
    /// Step size in seconds (default: derived from the fastest rate).
    #[arg(long, value_name = "SECONDS")]
    dt: Option<f64>,
    /// Ensemble seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Use the exact linear-system discretization instead of
    /// Euler-Maruyama.
    #[arg(long)]
    exact: bool,
}

#[derive(Args)]
struct FiltersArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Table rows.
    #[arg(long, default_value_t = 201)]
    points: usize,
    /// Half-range in filter bandwidths (2 pi / tau).
    #[arg(long, default_value_t = 8.0)]
    span: f64,
}

/// Run the CLI; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are successful exits
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match &cli.command {
        Command::Point(c) => with_config(c, cmd_point),
        Command::Sweep(s) => with_config(&s.common, |cfg, common| cmd_sweep(cfg, common, s)),
        Command::Oracle(o) => with_config(&o.common, |cfg, common| cmd_oracle(cfg, common, o)),
        Command::Stability(c) => with_config(c, cmd_stability),
        Command::Filters(f) => with_config(&f.common, |cfg, common| cmd_filters(cfg, common, f)),
    }
}

fn with_config<F>(common: &CommonArgs, body: F) -> i32
where
    F: FnOnce(&Config, &CommonArgs) -> i32 + Send,
{
    let mut cfg = match &common.config {
        Some(path) => match Config::from_path(path) {
            Ok(cfg) => cfg,
            Err(e) => return usage_error(&e),
        },
        None => Config::default(),
    };
    for kv in &common.sets {
        let Some((key, value)) = kv.split_once('=') else {
            eprintln!("error: --set expects KEY=VALUE, got '{kv}'");
            return EXIT_USAGE;
        };
        if let Err(e) = cfg.set(key, value) {
            return usage_error(&e);
        }
    }
    if common.print_config {
        println!(
            "{}",
            serde_json::to_string_pretty(&cfg).expect("config serializes")
        );
        return EXIT_OK;
    }
    let workers = common.workers.or_else(|| {
        std::env::var("OMSIM_WORKERS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    match rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
    {
        Ok(pool) => pool.install(|| body(&cfg, common)),
        Err(e) => {
            eprintln!("error: cannot build worker pool: {e}");
            EXIT_USAGE
        }
    }
}

fn usage_error(e: &ConfigError) -> i32 {
    eprintln!("error: {e}");
    EXIT_USAGE
}

fn resolve_or_exit(cfg: &Config) -> Result<crate::config::Resolved, i32> {
    match cfg.resolve() {
        Ok(resolved) => {
            for w in &resolved.warnings {
                eprintln!("{w}");
            }
            Ok(resolved)
        }
        Err(e) => {
            eprintln!("error: {e}");
            Err(EXIT_USAGE)
        }
    }
}

fn diagnostics_json(d: &OutputCmDiagnostics, converged: bool) -> serde_json::Value {
    serde_json::json!({
        "integral_error": d.integral_error,
        "panels": d.panels,
        "window_rad_s": d.window,
        "imag_residual": d.imag_residual,
        "converged": converged,
    })
}

fn cmd_point(cfg: &Config, _common: &CommonArgs) -> i32 {
    let resolved = match resolve_or_exit(cfg) {
        Ok(r) => r,
        Err(code) => return code,
    };
    let model = match LinearModel::new(&resolved.params) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let stability = match model.stability() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if !stability.stable {
        println!(
            "{}",
            serde_json::json!({
                "stable": false,
                "abscissa_rad_s": stability.abscissa,
                "E_N": null,
            })
        );
        return EXIT_UNSTABLE;
    }
    let settings = QuadratureSettings::for_model(&model, &resolved.filters);
    let (v6, diags, converged) = match output_cm(&model, &resolved.filters, &settings) {
        Ok((v, d)) => (v, d, true),
        Err(SpectrumError::Convergence { best, .. }) => {
            eprintln!("warning: quadrature budget exhausted; reporting best estimate");
            let (v, d) = *best;
            (v, d, false)
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let v4 = match extract_bipartite(&v6, ModePair::A2B1) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let e_n = match log_negativity(&v4) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let (_, margin) = physicality(&v6, 1e-9);
    let v4_rows: Vec<Vec<f64>> = (0..4)
        .map(|i| (0..4).map(|j| v4.matrix()[(i, j)]).collect())
        .collect();
    println!(
        "{}",
        serde_json::json!({
            "E_N": e_n,
            "stable": true,
            "marginal": stability.marginal,
            "V4": v4_rows,
            "physicality_margin": margin,
            "diagnostics": diagnostics_json(&diags, converged),
        })
    );
    EXIT_OK
}

fn cmd_stability(cfg: &Config, _common: &CommonArgs) -> i32 {
    let resolved = match resolve_or_exit(cfg) {
        Ok(r) => r,
        Err(code) => return code,
    };
    let model = match LinearModel::new(&resolved.params) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match model.stability() {
        Ok(s) => {
            println!(
                "{}",
                serde_json::json!({
                    "stable": s.stable,
                    "abscissa_rad_s": s.abscissa,
                    "marginal": s.marginal,
                })
            );
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn cmd_filters(cfg: &Config, _common: &CommonArgs, args: &FiltersArgs) -> i32 {
    let resolved = match resolve_or_exit(cfg) {
        Ok(r) => r,
        Err(code) => return code,
    };
    let filters = resolved.filters;
    let bw = (std::f64::consts::TAU / filters.a2.tau).max(std::f64::consts::TAU / filters.b1.tau);
    let center = 0.5 * (filters.a2.detuning + filters.b1.detuning);
    let half = args.span * bw + (filters.a2.detuning - filters.b1.detuning).abs() * 0.5;
    let n = args.points.max(2);
    println!("omega_hz,abs2_a2_s,abs2_b1_s");
    for k in 0..n {
        let omega = center - half + 2.0 * half * k as f64 / (n - 1) as f64;
        let fa = filter_freq(omega, &filters.a2).norm_sqr();
        let fb = filter_freq(omega, &filters.b1).norm_sqr();
        println!("{},{},{}", omega / std::f64::consts::TAU, fa, fb);
    }
    EXIT_OK
}

fn parse_axis(spec: &str) -> Result<Axis, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 4 && parts.len() != 5 {
        return Err(format!(
            "axis '{spec}' must be NAME:START:STOP:POINTS[:log]"
        ));
    }
    let name: AxisName = parts[0].parse().map_err(|e| format!("{e}"))?;
    let start: f64 = parts[1].parse().map_err(|e| format!("{spec}: {e}"))?;
    let stop: f64 = parts[2].parse().map_err(|e| format!("{spec}: {e}"))?;
    let points: usize = parts[3].parse().map_err(|e| format!("{spec}: {e}"))?;
    let scale = match parts.get(4) {
        None => AxisScale::Linear,
        Some(&"log") => AxisScale::Log,
        Some(other) => return Err(format!("axis '{spec}': unknown scale '{other}'")),
    };
    Ok(Axis {
        name,
        start,
        stop,
        points,
        scale,
    })
}

struct Preset {
    grid: GridSpec,
    default_out: &'static str,
    emit_dat: bool,
}

fn figure_preset(name: &str) -> Result<Preset, String> {
    let ax = |name, start, stop, points, scale| Axis {
        name,
        start,
        stop,
        points,
        scale,
    };
    let grid = |axes: Vec<Axis>| GridSpec::new(axes).map_err(|e| e.to_string());
    match name {
        "2a" => Ok(Preset {
            grid: grid(vec![
                ax(AxisName::GA, 0.0, 12e6, 49, AxisScale::Linear),
                ax(AxisName::GB, 0.0, 12e6, 49, AxisScale::Linear),
            ])?,
            default_out: "fig2a.csv",
            emit_dat: true,
        }),
        "2b" => Ok(Preset {
            grid: grid(vec![
                ax(AxisName::KappaM, 0.5e6, 2.0e6, 4, AxisScale::Linear),
                ax(AxisName::GB, 1e6, 12e6, 45, AxisScale::Linear),
            ])?,
            default_out: "fig2b.csv",
            emit_dat: false,
        }),
        "3a" => Ok(Preset {
            grid: grid(vec![ax(AxisName::Tau, 1e-8, 1e-4, 25, AxisScale::Log)])?,
            default_out: "fig3a.csv",
            emit_dat: false,
        }),
        "3b" => Ok(Preset {
            grid: grid(vec![
                ax(AxisName::Tau, 1e-6, 1e-5, 2, AxisScale::Log),
                ax(AxisName::Temperature, 0.1, 300.0, 25, AxisScale::Log),
            ])?,
            default_out: "fig3b.csv",
            emit_dat: false,
        }),
        other => Err(format!("unknown figure preset '{other}' (2a, 2b, 3a, 3b)")),
    }
}

fn cmd_sweep(cfg: &Config, _common: &CommonArgs, args: &SweepArgs) -> i32 {
    let resolved = match resolve_or_exit(cfg) {
        Ok(r) => r,
        Err(code) => return code,
    };
    let format: PersistFormat = match args.format.parse() {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };

    let (grid, default_out, emit_dat) = if let Some(fig) = &args.fig {
        match figure_preset(fig) {
            Ok(p) => (p.grid, p.default_out.to_owned(), p.emit_dat),
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_USAGE;
            }
        }
    } else if !args.axes.is_empty() {
        let axes: Result<Vec<Axis>, String> = args.axes.iter().map(|s| parse_axis(s)).collect();
        match axes.and_then(|a| GridSpec::new(a).map_err(|e| e.to_string())) {
            Ok(g) => (g, "sweep.csv".to_owned(), false),
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_USAGE;
            }
        }
    } else {
        eprintln!("error: sweep needs --axis or --fig");
        return EXIT_USAGE;
    };

    let mut ctx = SweepContext::new(resolved.params, resolved.filters);
    ctx.timing = args.timing;

    let records = match sweep_grid(&ctx, &grid) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };

    let mut out_path = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(default_out));
    if args.out.is_none() && format == PersistFormat::JsonLines {
        out_path.set_extension("jsonl");
    }
    let axis_names: Vec<AxisName> = grid.axes.iter().map(|a| a.name).collect();
    if let Err(e) = persist(&out_path, &axis_names, &records, format) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    let dat_path = args.dat.clone().or_else(|| {
        (emit_dat && grid.axes.len() == 2).then(|| out_path.with_extension("dat"))
    });
    if let Some(dat) = dat_path {
        if grid.axes.len() == 2 {
            if let Err(e) = write_grid_matrix(&dat, &grid, &records) {
                eprintln!("error: {e}");
                return EXIT_USAGE;
            }
        } else {
            eprintln!("warning: --dat ignored for 1-D grids");
        }
    }

    println!("{}", summary_json(&records));
    EXIT_OK
}

fn summary_json(records: &[SweepRecord]) -> serde_json::Value {
    let stable_count = records.iter().filter(|r| r.stable).count();
    let best = records
        .iter()
        .filter_map(|r| r.e_n.map(|en| (en, r)))
        .max_by(|a, b| a.0.total_cmp(&b.0));
    match best {
        Some((en, rec)) => {
            let argmax: serde_json::Map<String, serde_json::Value> = rec
                .coords
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::json!(v)))
                .collect();
            serde_json::json!({
                "points": records.len(),
                "stable_count": stable_count,
                "max_E_N": en,
                "argmax": argmax,
            })
        }
        None => serde_json::json!({
            "points": records.len(),
            "stable_count": stable_count,
            "max_E_N": null,
            "argmax": null,
        }),
    }
}

fn cmd_oracle(cfg: &Config, _common: &CommonArgs, args: &OracleArgs) -> i32 {
    let resolved = match resolve_or_exit(cfg) {
        Ok(r) => r,
        Err(code) => return code,
    };
    let model = match LinearModel::new(&resolved.params) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let stability = match model.stability() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if !stability.stable {
        println!(
            "{}",
            serde_json::json!({
                "stable": false,
                "abscissa_rad_s": stability.abscissa,
            })
        );
        return EXIT_UNSTABLE;
    }

    let settings = QuadratureSettings::for_model(&model, &resolved.filters);
    let (v6, _) = match output_cm(&model, &resolved.filters, &settings) {
        Ok(pair) => pair,
        Err(SpectrumError::Convergence { best, .. }) => *best,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let v4 = extract_bipartite(&v6, ModePair::A2B1).expect("6x6 state");
    let e_n_spectral = match log_negativity(&v4) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };

    let mut sim = match SimSettings::auto(&model, args.traj, args.seed) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Some(dt) = args.dt {
        sim.dt = dt;
    }
    if args.exact {
        sim.integrator = Integrator::Exact;
    }
    let samples = match simulate_output_samples(&model, &resolved.filters, &sim) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let out: Vec<[f64; 4]> = samples.iter().map(|t| t.output).collect();
    let mc = match estimate_entanglement(&out) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let sigma = mc.e_n_se;
    let z = if sigma > 0.0 {
        (mc.e_n - e_n_spectral) / sigma
    } else if mc.e_n == e_n_spectral {
        0.0
    } else {
        f64::INFINITY
    };
    // entrywise z of the covariance comparison as a secondary diagnostic
    let mut v4_max_z: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let se = mc.cm_se[(i, j)];
            if se > 0.0 {
                let zij = (mc.cm.matrix()[(i, j)] - v4.matrix()[(i, j)]).abs() / se;
                v4_max_z = v4_max_z.max(zij);
            }
        }
    }
    let pass = z.abs() <= 3.0;
    println!(
        "{}",
        serde_json::json!({
            "E_N_spectral": e_n_spectral,
            "E_N_mc": mc.e_n,
            "sigma": sigma,
            "z_score": z,
            "v4_max_z": v4_max_z,
            "pass": pass,
        })
    );
    if pass {
        EXIT_OK
    } else {
        EXIT_ORACLE_FAIL
    }
}
