//! Command-line front end: sweeps, scans, and verifications emitting
//! CSV/JSON plot data.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

mod config;

use clap::{Args, Parser, Subcommand};
use config::{preset, ConfigError, DetectorConfig, GridConfig, ModelConfig, OutputFormat, RunConfig};
use nhscope::analysis::{
    extract_zero_modes, finite_size_scan, pt_dispersion, pt_ep_momenta, similarity_check,
    sturm_liouville_verify, ZERO_MODE_TOL,
};
use nhscope::models::{build_sturm_liouville_chain, Boundary, ModelSpec};
use nhscope::petermann::{
    eta, eta_bound, eta_two_level_analytic, DetectorParams, JordanProfile, SweepResult,
};
use nhscope::spectral::{eig_auto, eig_right, spectrum_summary};
use nhscope::{io as nio, Error as CoreError};
use serde::Serialize;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "nhscope", version, about = "eta sweeps and exceptional-point diagnostics")]
struct Cli {
    /// JSON config file; command-line flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Named preset: fig1b, fig2, fig3, fig4, fig5, fig-sm-finite-size.
    #[arg(long, global = true)]
    preset: Option<String>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Default)]
struct ModelArgs {
    /// Model variant: ssh, two_level, quasicrystal, pt_ssh, sl_chain, external.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    t1: Option<f64>,
    #[arg(long)]
    t2: Option<f64>,
    #[arg(long)]
    g: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    jr: Option<f64>,
    #[arg(long)]
    jl: Option<f64>,
    #[arg(long)]
    v: Option<f64>,
    #[arg(long)]
    u: Option<f64>,
    #[arg(long)]
    w: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long)]
    alpha_num: Option<u64>,
    #[arg(long)]
    alpha_den: Option<u64>,
    #[arg(long)]
    sites: Option<usize>,
    #[arg(long)]
    cells: Option<usize>,
    /// Boundary condition: open or periodic.
    #[arg(long)]
    boundary: Option<String>,
    /// Matrix file path for the external model.
    #[arg(long)]
    path: Option<String>,
}

impl ModelArgs {
    fn to_config(&self) -> Result<ModelConfig, ConfigError> {
        let boundary = match self.boundary.as_deref() {
            None => None,
            Some("open") => Some(Boundary::Open),
            Some("periodic") => Some(Boundary::Periodic),
            Some(other) => {
                return Err(ConfigError(format!(
                    "model.boundary `{other}` unknown; expected open or periodic"
                )))
            }
        };
        Ok(ModelConfig {
            variant: self.model.clone(),
            t1: self.t1,
            t2: self.t2,
            g: self.g,
            gamma: self.gamma,
            jr: self.jr,
            jl: self.jl,
            v: self.v,
            u: self.u,
            w: self.w,
            k: self.k,
            t0: self.t0,
            alpha_num: self.alpha_num,
            alpha_den: self.alpha_den,
            sites: self.sites,
            cells: self.cells,
            boundary,
            path: self.path.clone(),
        })
    }
}

#[derive(Args, Default)]
struct GridArgs {
    /// Sweep parameter name (t1, gamma, v, k, g, ...).
    #[arg(long)]
    axis: Option<String>,
    #[arg(long)]
    lo: Option<f64>,
    #[arg(long)]
    hi: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
}

impl GridArgs {
    fn to_config(&self) -> GridConfig {
        GridConfig {
            axis: self.axis.clone(),
            lo: self.lo,
            hi: self.hi,
            steps: self.steps,
        }
    }
}

#[derive(Args, Default)]
struct DetectorArgs {
    /// Detector window: intervals on each side entering the median.
    #[arg(long = "window")]
    window: Option<usize>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    floor: Option<f64>,
}

impl DetectorArgs {
    fn to_config(&self) -> DetectorConfig {
        DetectorConfig {
            w: self.window,
            kappa: self.kappa,
            floor: self.floor,
        }
    }
}

#[derive(Args, Default)]
struct OutputArgs {
    /// Artifact file path; stdout gets only the one-line summary.
    #[arg(long)]
    output: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
}

impl OutputArgs {
    fn to_config(&self) -> Result<(Option<PathBuf>, Option<OutputFormat>), ConfigError> {
        let format = match self.format.as_deref() {
            None => None,
            Some("csv") => Some(OutputFormat::Csv),
            Some("json") => Some(OutputFormat::Json),
            Some(other) => {
                return Err(ConfigError(format!(
                    "format `{other}` unknown; expected csv or json"
                )))
            }
        };
        Ok((self.output.clone(), format))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sweep eta over a model parameter and flag discontinuities.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        detector: DetectorArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Eigenvalues (or one eigenvector) of a model at fixed parameters.
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Export this eigenvector instead of the spectrum.
        #[arg(long)]
        state: Option<usize>,
    },
    /// Zero-mode pair of the open non-reciprocal SSH chain.
    Edge {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Zero-mode tolerance relative to the spectral radius.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Eta-jump location per system size.
    #[command(name = "finite-size")]
    FiniteSize {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Comma-separated unit-cell counts.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
    },
    /// Momentum sweep of the PT-symmetric Bloch block plus EP momenta.
    Bloch {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        detector: DetectorArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Coalescence bound of eta for a Jordan block profile.
    Bound {
        /// Comma-separated block sizes, e.g. `--blocks 2,2`.
        #[arg(long, value_delimiter = ',')]
        blocks: Option<Vec<usize>>,
    },
    /// Sturm-Liouville factorization check of the three-band chain.
    #[command(name = "verify-sl")]
    VerifySl {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Quick self-verification battery.
    Check,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Sweep { .. } => "sweep",
            Command::Spectrum { .. } => "spectrum",
            Command::Edge { .. } => "edge",
            Command::FiniteSize { .. } => "finite-size",
            Command::Bloch { .. } => "bloch",
            Command::Bound { .. } => "bound",
            Command::VerifySl { .. } => "verify-sl",
            Command::Check => "check",
        }
    }

    fn to_overlay(&self) -> Result<RunConfig, ConfigError> {
        let mut cfg = RunConfig {
            command: Some(self.name().to_string()),
            ..RunConfig::default()
        };
        match self {
            Command::Sweep {
                model,
                grid,
                detector,
                output,
            }
            | Command::Bloch {
                model,
                grid,
                detector,
                output,
            } => {
                cfg.model = model.to_config()?;
                cfg.grid = grid.to_config();
                cfg.detector = detector.to_config();
                (cfg.output, cfg.format) = output.to_config()?;
            }
            Command::Spectrum {
                model,
                output,
                state,
            } => {
                cfg.model = model.to_config()?;
                (cfg.output, cfg.format) = output.to_config()?;
                cfg.state = *state;
            }
            Command::Edge { model, output, tol } => {
                cfg.model = model.to_config()?;
                (cfg.output, cfg.format) = output.to_config()?;
                cfg.tol = *tol;
            }
            Command::FiniteSize {
                model,
                grid,
                output,
                sizes,
            } => {
                cfg.model = model.to_config()?;
                cfg.grid = grid.to_config();
                (cfg.output, cfg.format) = output.to_config()?;
                cfg.sizes = sizes.clone();
            }
            Command::Bound { blocks } => {
                cfg.blocks = blocks.clone();
            }
            Command::VerifySl { model, output } => {
                cfg.model = model.to_config()?;
                (cfg.output, cfg.format) = output.to_config()?;
            }
            Command::Check => {}
        }
        Ok(cfg)
    }
}

enum RunError {
    Config(String),
    Numerical(String),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> RunError {
        RunError::Config(e.to_string())
    }
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> RunError {
        match e {
            CoreError::InvalidSpec(_)
            | CoreError::InvalidInput(_)
            | CoreError::Ingestion { .. }
            | CoreError::Io(_) => RunError::Config(e.to_string()),
            other => RunError::Numerical(other.to_string()),
        }
    }
}

fn write_artifact(path: Option<&PathBuf>, content: &str) -> Result<(), RunError> {
    match path {
        Some(p) => std::fs::write(p, content)
            .map_err(|e| RunError::Config(format!("cannot write {}: {e}", p.display()))),
        None => Ok(()),
    }
}

fn format_locations(sw: &SweepResult, kind: fn(&nhscope::petermann::JumpFlags) -> bool) -> String {
    let points: Vec<String> = sw
        .samples
        .iter()
        .filter(|s| kind(&s.flags))
        .map(|s| format!("{:.6}", s.param))
        .collect();
    if points.is_empty() {
        "none".to_string()
    } else {
        points.join(" ")
    }
}

type SweepOutcome = (
    SweepResult,
    nhscope::petermann::DiscontinuityReport,
    nhscope::petermann::DiscontinuityReport,
);

fn run_sweep_like(
    cfg: &RunConfig,
    spec: &ModelSpec,
    axis: &str,
    lo: f64,
    hi: f64,
    steps: usize,
) -> Result<SweepOutcome, RunError> {
    let mut sw = nhscope::petermann::sweep(spec, axis, lo, hi, steps)?;
    let eta_params = cfg.detector.apply(DetectorParams::eta_default());
    let deta_params = cfg.detector.apply(DetectorParams::deta_default(&sw.deta));
    let (eta_report, deta_report) = sw.detect(eta_params, Some(deta_params))?;
    Ok((sw, eta_report, deta_report))
}

#[derive(Serialize)]
struct SweepReportsJson {
    eta: nhscope::petermann::DiscontinuityReport,
    deta: nhscope::petermann::DiscontinuityReport,
}

fn cmd_sweep(cfg: &RunConfig) -> Result<(), RunError> {
    let spec = cfg.model_spec()?;
    let (axis, lo, hi, steps) = cfg.grid_spec()?;
    let (sw, eta_report, deta_report) = run_sweep_like(cfg, &spec, &axis, lo, hi, steps)?;
    match cfg.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => write_artifact(cfg.output.as_ref(), &nio::sweep_csv(&sw))?,
        OutputFormat::Json => {
            let json = serde_json::to_string_pretty(&SweepReportsJson {
                eta: eta_report,
                deta: deta_report,
            })
            .expect("serializable");
            write_artifact(cfg.output.as_ref(), &json)?;
        }
    }
    println!(
        "sweep {axis}: eta max {:.6} at {:.6}, min {:.6} at {:.6}; eta jumps: {}; deta jumps: {}",
        sw.samples
            .iter()
            .map(|s| s.eta)
            .fold(f64::NEG_INFINITY, f64::max),
        sw.eta_argmax(),
        sw.samples.iter().map(|s| s.eta).fold(f64::INFINITY, f64::min),
        sw.eta_argmin(),
        format_locations(&sw, |f| f.eta_jump),
        format_locations(&sw, |f| f.deta_jump),
    );
    Ok(())
}

fn cmd_spectrum(cfg: &RunConfig) -> Result<(), RunError> {
    let spec = cfg.model_spec()?;
    let h = spec.build()?;
    let es = eig_auto(&h)?;
    let summary = spectrum_summary(&es, nhscope::petermann::REAL_TOL);
    let content = match cfg.state {
        Some(n) => nio::eigenvector_csv(&es, n)?,
        None => nio::spectrum_csv(&es),
    };
    write_artifact(cfg.output.as_ref(), &content)?;
    if cfg.output.is_none() {
        print!("{content}");
    }
    println!(
        "spectrum: dim {}, max |Im E| = {:.3e}, real = {}, min gap = {:.3e}, residual = {:.3e}",
        es.dim, summary.max_imag, summary.is_real, summary.min_gap, es.residual_right
    );
    Ok(())
}

fn cmd_edge(cfg: &RunConfig) -> Result<(), RunError> {
    let spec = cfg.model_spec()?;
    if !matches!(spec, ModelSpec::NonReciprocalSsh { .. }) {
        return Err(RunError::Config(
            "edge requires --model ssh with t1, t2, g, cells".into(),
        ));
    }
    let h = spec.build()?;
    let es = eig_right(&h)?;
    let pair = extract_zero_modes(&es, cfg.tol.unwrap_or(ZERO_MODE_TOL))?;
    let content = nio::edge_states_csv(&pair.state_left, &pair.state_right);
    write_artifact(cfg.output.as_ref(), &content)?;
    println!(
        "edge: overlap {:.6}, |E| = ({:.3e}, {:.3e}), boundary weights L/R = ({:.3}, {:.3}) and ({:.3}, {:.3})",
        pair.overlap,
        pair.energies[0].norm(),
        pair.energies[1].norm(),
        pair.localization[0].left_weight,
        pair.localization[0].right_weight,
        pair.localization[1].left_weight,
        pair.localization[1].right_weight,
    );
    Ok(())
}

fn cmd_finite_size(cfg: &RunConfig) -> Result<(), RunError> {
    let spec = cfg.model_spec()?;
    let ModelSpec::NonReciprocalSsh { t2, g, .. } = spec else {
        return Err(RunError::Config(
            "finite-size requires --model ssh with t2 and g".into(),
        ));
    };
    let sizes = cfg
        .sizes
        .clone()
        .ok_or_else(|| RunError::Config("sizes is required (e.g. --sizes 50,100,150)".into()))?;
    let (_, lo, hi, steps) = cfg.grid_spec()?;
    let points = finite_size_scan(t2, g, &sizes, lo, hi, steps)?;
    write_artifact(cfg.output.as_ref(), &nio::finite_size_csv(&points))?;
    let line: Vec<String> = points
        .iter()
        .map(|(l, t1)| format!("L={l}: {t1:.6}"))
        .collect();
    println!("finite-size: {}", line.join(", "));
    Ok(())
}

#[derive(Serialize)]
struct EpReport {
    k_ep_plus: Option<f64>,
    k_ep_minus: Option<f64>,
    exists: bool,
}

fn cmd_bloch(cfg: &RunConfig) -> Result<(), RunError> {
    let m = &cfg.model;
    let missing = |name: &str| RunError::Config(format!("model.{name} is required for bloch"));
    let u = m.u.ok_or_else(|| missing("u"))?;
    let v = m.v.ok_or_else(|| missing("v"))?;
    let w = m.w.ok_or_else(|| missing("w"))?;
    let steps = cfg.grid.steps.unwrap_or(400);
    let lo = cfg.grid.lo.unwrap_or(-PI);
    let hi = cfg.grid.hi.unwrap_or(PI);
    let spec = ModelSpec::PtSshBloch { u, v, w, k: lo };
    let (sw, _, _) = run_sweep_like(cfg, &spec, "k", lo, hi, steps)?;
    let momenta = pt_ep_momenta(u, v, w)?;
    let report = EpReport {
        k_ep_plus: momenta.map(|(kp, _)| kp),
        k_ep_minus: momenta.map(|(_, km)| km),
        exists: momenta.is_some(),
    };
    match cfg.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => write_artifact(cfg.output.as_ref(), &nio::sweep_csv(&sw))?,
        OutputFormat::Json => write_artifact(
            cfg.output.as_ref(),
            &serde_json::to_string_pretty(&report).expect("serializable"),
        )?,
    }
    let ep_text = match momenta {
        Some((kp, km)) => format!("k_ep = {kp:.6} / {km:.6}"),
        None => "no bulk EP (PT-unbroken)".to_string(),
    };
    println!(
        "bloch: {ep_text}; deta jumps: {}",
        format_locations(&sw, |f| f.deta_jump)
    );
    Ok(())
}

fn cmd_bound(cfg: &RunConfig) -> Result<(), RunError> {
    let blocks = cfg
        .blocks
        .clone()
        .ok_or_else(|| RunError::Config("blocks is required (e.g. --blocks 2,2)".into()))?;
    let profile = JordanProfile::new(blocks)?;
    println!("{:?}", eta_bound(&profile));
    Ok(())
}

#[derive(Serialize)]
struct SlReportJson {
    spectrum_real: bool,
    max_imag: f64,
    completeness_residual: f64,
}

fn cmd_verify_sl(cfg: &RunConfig) -> Result<(), RunError> {
    let m = &cfg.model;
    let g = m
        .g
        .ok_or_else(|| RunError::Config("model.g is required for verify-sl".into()))?;
    let t0 = m.t0.unwrap_or(1.0);
    let cells = m
        .cells
        .ok_or_else(|| RunError::Config("model.cells is required for verify-sl".into()))?;
    let boundary = m.boundary.unwrap_or(Boundary::Open);
    let h = build_sturm_liouville_chain(t0, g, cells, boundary)?;
    let report = sturm_liouville_verify(&h, t0, g)?;
    let json = serde_json::to_string_pretty(&SlReportJson {
        spectrum_real: report.spectrum_real,
        max_imag: report.max_imag,
        completeness_residual: report.completeness_residual,
    })
    .expect("serializable");
    write_artifact(cfg.output.as_ref(), &json)?;
    println!(
        "verify-sl: spectrum real = {}, max |Im E| = {:.3e}, completeness residual = {:.3e}",
        report.spectrum_real, report.max_imag, report.completeness_residual
    );
    Ok(())
}

fn cmd_check() -> Result<(), RunError> {
    let mut failures = 0;
    let mut report = |name: &str, ok: bool, detail: String| {
        if ok {
            println!("check {name}: ok ({detail})");
        } else {
            println!("check {name}: FAIL ({detail})");
            failures += 1;
        }
    };

    let residual = similarity_check(0.5, 1.0, 0.1, 20)?;
    report(
        "similarity-transform",
        residual < 1e-11,
        format!("residual {residual:.3e}"),
    );

    let (kp, _) = pt_ep_momenta(0.5, 0.8, 0.7)?.expect("PT-broken point");
    let (e_ep, _) = pt_dispersion(0.5, 0.8, 0.7, kp);
    let h = nhscope::models::build_pt_ssh_bloch(0.5, 0.8, 0.7, kp)?;
    let eta_ep = eta(&eig_right(&h)?)?;
    report(
        "pt-ep-coalescence",
        e_ep.norm() < 1e-7 && eta_ep > 0.999,
        format!("|E(k_ep)| = {:.3e}, eta = {eta_ep:.6}", e_ep.norm()),
    );

    let mut worst = 0.0f64;
    for i in 0..50 {
        let gamma = 0.05 + 0.05 * i as f64;
        let es = eig_right(&nhscope::models::build_two_level(gamma)?)?;
        worst = worst.max((eta(&es)? - eta_two_level_analytic(gamma)).abs());
    }
    report(
        "two-level-analytic",
        worst < 1e-10,
        format!("max |eta - analytic| = {worst:.3e}"),
    );

    let h = build_sturm_liouville_chain(1.0, 1.5, 30, Boundary::Open)?;
    let sl = sturm_liouville_verify(&h, 1.0, 1.5)?;
    report(
        "sturm-liouville",
        sl.spectrum_real && sl.completeness_residual < 1e-10,
        format!(
            "real = {}, completeness residual = {:.3e}",
            sl.spectrum_real, sl.completeness_residual
        ),
    );

    if failures == 0 {
        Ok(())
    } else {
        Err(RunError::Numerical(format!("{failures} check(s) failed")))
    }
}

fn run(cfg: &RunConfig) -> Result<(), RunError> {
    match cfg.command.as_deref() {
        Some("sweep") => cmd_sweep(cfg),
        Some("spectrum") => cmd_spectrum(cfg),
        Some("edge") => cmd_edge(cfg),
        Some("finite-size") => cmd_finite_size(cfg),
        Some("bloch") => cmd_bloch(cfg),
        Some("bound") => cmd_bound(cfg),
        Some("verify-sl") => cmd_verify_sl(cfg),
        Some("check") => cmd_check(),
        Some(other) => Err(RunError::Config(format!(
            "command `{other}` unknown; expected one of sweep, spectrum, edge, \
             finite-size, bloch, bound, verify-sl, check"
        ))),
        None => Err(RunError::Config(
            "no command given (use a subcommand, --config, or --preset)".into(),
        )),
    }
}

fn assemble_config(cli: &Cli) -> Result<RunConfig, RunError> {
    let mut cfg = RunConfig::default();
    if let Some(name) = &cli.preset {
        cfg = preset(name)?;
    }
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
        let file_cfg = RunConfig::from_json(&text)?;
        if cli.preset.is_some() {
            cfg.overlay(&file_cfg);
        } else {
            cfg = file_cfg;
        }
    }
    if let Some(command) = &cli.command {
        let overlay = command.to_overlay()?;
        cfg.overlay(&overlay);
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("NHSCOPE_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
    let cli = Cli::parse();
    let cfg = match assemble_config(&cli) {
        Ok(cfg) => cfg,
        Err(RunError::Config(msg)) | Err(RunError::Numerical(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(RunError::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
