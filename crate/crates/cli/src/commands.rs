use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use multiroot::coeffs::CoefficientTables;
use multiroot::config::{EngineChoice, ExperimentConfig, OutputFormat};
use multiroot::registry::{example, examples};
use multiroot::solver::{
    estimate_period, integrate_direct, solve_algebraic, PeriodOptions, PeriodVerdict, SolverConfig,
    SolverError, Trajectory,
};

use crate::output::{render, with_engine_suffix, write_atomic};
use crate::random::random_configs;
use crate::{RunOpts, Source};

pub enum CliError {
    /// Bad flags, unreadable or invalid configuration, unwritable output.
    Config(String),
    /// The solver broke down; carries the failure time when known.
    Numerical { message: String, t: Option<f64> },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => f.write_str(m),
            CliError::Numerical {
                message,
                t: Some(t),
            } => write!(f, "{message}\nfailure time: {t}"),
            CliError::Numerical { message, t: None } => f.write_str(message),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        if e.is_input_error() {
            CliError::Config(e.to_string())
        } else {
            CliError::Numerical {
                t: e.time(),
                message: e.to_string(),
            }
        }
    }
}

/// Writes to stdout; a closed pipe (`| head`) ends the program quietly.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: cannot write to stdout: {e}");
        std::process::exit(2);
    }
}

macro_rules! outln {
    ($($arg:tt)*) => { emit(&format!("{}\n", format_args!($($arg)*))) };
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Config(format!("cannot write {}: {e}", path.display()))
}

fn load(source: &Source) -> Result<ExperimentConfig, CliError> {
    match (&source.example, &source.config) {
        (Some(name), None) => example(name).map(|e| e.config()).ok_or_else(|| {
            CliError::Config(format!(
                "unknown example {name:?} (see `multiroot examples`)"
            ))
        }),
        (None, Some(path)) => {
            ExperimentConfig::from_path(path).map_err(|e| CliError::Config(e.to_string()))
        }
        _ => Err(CliError::Config(
            "exactly one of --example or --config is required".into(),
        )),
    }
}

fn solver_config(cfg: &ExperimentConfig, run: &RunOpts) -> Result<SolverConfig, CliError> {
    let mut sc = SolverConfig::default();
    if let Some(tol) = run.tol_root.or(cfg.tol_root) {
        if !(tol > 0.0) {
            return Err(CliError::Config(format!(
                "tol-root must be positive, got {tol}"
            )));
        }
        sc.tol_root = tol;
    }
    Ok(sc)
}

fn span(cfg: &ExperimentConfig, run: &RunOpts) -> Result<(f64, f64), CliError> {
    let t_end = run
        .t_end
        .or(cfg.t_end)
        .ok_or_else(|| CliError::Config("no end time: pass --t-end or set t_end".into()))?;
    Ok((t_end, run.dt.or(cfg.dt).unwrap_or(1e-3)))
}

fn run_engine(
    engine: EngineChoice,
    cfg: &ExperimentConfig,
    run: &RunOpts,
) -> Result<Trajectory, CliError> {
    let (t_end, dt) = span(cfg, run)?;
    let sc = solver_config(cfg, run)?;
    let ivp = cfg.ivp();
    Ok(match engine {
        EngineChoice::Direct => integrate_direct(&ivp, t_end, dt, &sc)?,
        _ => solve_algebraic(&ivp, t_end, dt, &sc)?,
    })
}

pub fn tables(n: usize, m1: usize, out: Option<&Path>) -> Result<(), CliError> {
    let t = CoefficientTables::new(n, m1).map_err(|e| CliError::Config(e.to_string()))?;
    let text = serde_json::to_string_pretty(&t.to_json()).expect("tables serialize");
    match out {
        Some(path) => write_atomic(path, &text).map_err(|e| io_err(path, e)),
        None => {
            outln!("{text}");
            Ok(())
        }
    }
}

fn format_for(path: Option<&Path>, chosen: Option<OutputFormat>) -> OutputFormat {
    chosen.unwrap_or_else(|| match path.and_then(Path::extension) {
        Some(ext) if ext == "json" => OutputFormat::Json,
        _ => OutputFormat::Csv,
    })
}

pub fn solve(
    source: &Source,
    run: &RunOpts,
    engine: Option<EngineChoice>,
    out: Option<PathBuf>,
    format: Option<OutputFormat>,
) -> Result<(), CliError> {
    let cfg = load(source)?;
    let engine = engine.or(cfg.engine).unwrap_or(EngineChoice::Algebraic);
    let out = out.or_else(|| cfg.out.clone());
    let format = format_for(out.as_deref(), format.or(cfg.format));
    match engine {
        EngineChoice::Both => {
            let out = out.ok_or_else(|| CliError::Config("--engine both needs --out".into()))?;
            // both runs must succeed before anything is written
            let alg = run_engine(EngineChoice::Algebraic, &cfg, run)?;
            let dir = run_engine(EngineChoice::Direct, &cfg, run)?;
            for (tr, name) in [(alg, "algebraic"), (dir, "direct")] {
                let path = with_engine_suffix(&out, name);
                write_atomic(&path, &render(&tr, format)).map_err(|e| io_err(&path, e))?;
                eprintln!("wrote {} ({} samples)", path.display(), tr.len());
            }
        }
        single => {
            let tr = run_engine(single, &cfg, run)?;
            let text = render(&tr, format);
            match out {
                Some(path) => {
                    write_atomic(&path, &text).map_err(|e| io_err(&path, e))?;
                    eprintln!("wrote {} ({} samples)", path.display(), tr.len());
                }
                None => emit(&text),
            }
        }
    }
    Ok(())
}

struct Comparison {
    name: String,
    per_root: Vec<f64>,
    limit: f64,
}

fn compare_one(
    cfg: &ExperimentConfig,
    run: &RunOpts,
    rel_tol: f64,
) -> Result<Comparison, CliError> {
    let alg = run_engine(EngineChoice::Algebraic, cfg, run)?;
    let dir = run_engine(EngineChoice::Direct, cfg, run)?;
    let per_root = (0..alg.n_roots())
        .map(|n| {
            alg.coordinate(n)
                .iter()
                .zip(dir.coordinate(n))
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
        })
        .collect();
    let big = alg
        .positions
        .iter()
        .flatten()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    Ok(Comparison {
        name: cfg.name.clone().unwrap_or_else(|| "config".into()),
        per_root,
        limit: rel_tol * (1.0 + big),
    })
}

pub fn compare(
    source: &Source,
    run: &RunOpts,
    all: bool,
    random: Option<usize>,
    seed: u64,
    rel_tol: f64,
) -> Result<(), CliError> {
    let configs = if all {
        examples().iter().map(|e| e.config()).collect()
    } else if let Some(count) = random {
        random_configs(count, seed)
    } else {
        vec![load(source)?]
    };
    // independent runs fan out over threads
    let results: Vec<Result<Comparison, CliError>> = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|c| s.spawn(move || compare_one(c, run, rel_tol)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("comparison thread panicked"))
            .collect()
    });

    let mut failed = Vec::new();
    for (cfg, res) in configs.iter().zip(results) {
        let name = cfg.name.clone().unwrap_or_else(|| "config".into());
        match res {
            Ok(c) => {
                let worst = c.per_root.iter().cloned().fold(0.0, f64::max);
                let pass = worst < c.limit;
                outln!(
                    "{}: {} (max deviation {worst:.3e}, limit {:.3e})",
                    c.name,
                    if pass { "PASS" } else { "FAIL" },
                    c.limit
                );
                for (n, d) in c.per_root.iter().enumerate() {
                    outln!("  x{}: {d:.3e}", n + 1);
                }
                if !pass {
                    failed.push(c.name);
                }
            }
            Err(e) if configs.len() == 1 => return Err(e),
            Err(e) => {
                outln!("{name}: FAIL ({e})");
                failed.push(name);
            }
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numerical {
            message: format!("engines disagree on {}", failed.join(", ")),
            t: None,
        })
    }
}

fn describe(v: &PeriodVerdict) -> String {
    match v {
        PeriodVerdict::Periodic { period, defect, .. } => {
            format!("periodic({period}) defect {defect:.2e}")
        }
        PeriodVerdict::Asymptotic {
            period,
            defect,
            initial_defect,
            ..
        } => {
            format!("asymptotic({period}) defect {initial_defect:.2e} -> {defect:.2e}")
        }
        PeriodVerdict::Aperiodic { best_defect } => {
            format!("aperiodic (best defect {best_defect:.2e})")
        }
        PeriodVerdict::InsufficientSpan => "insufficient span".into(),
    }
}

pub fn period(
    source: &Source,
    run: &RunOpts,
    candidate: Option<f64>,
    tol_period: Option<f64>,
    format: Option<OutputFormat>,
) -> Result<(), CliError> {
    let cfg = load(source)?;
    let candidate =
        match candidate {
            Some(c) => c,
            None => cfg.model.period().map(|p| p.value).ok_or_else(|| {
                CliError::Config("the model has no period; pass --candidate".into())
            })?,
        };
    let t_end = run.t_end.or(cfg.t_end).unwrap_or(cfg.t0 + 8.0 * candidate);
    if (t_end - cfg.t0).abs() < 2.0 * candidate {
        return Err(CliError::Config(format!(
            "insufficient span: [{}, {t_end}] is shorter than twice the candidate {candidate}",
            cfg.t0
        )));
    }
    let run = RunOpts {
        t_end: Some(t_end),
        ..run.clone()
    };
    let tr = run_engine(EngineChoice::Algebraic, &cfg, &run)?;
    let opts = PeriodOptions {
        tol: tol_period
            .or(cfg.tol_period)
            .unwrap_or(PeriodOptions::default().tol),
        ..PeriodOptions::default()
    };
    let reports = estimate_period(&tr, candidate, &opts)?;
    match format {
        Some(OutputFormat::Json) => {
            outln!(
                "{}",
                serde_json::to_string_pretty(&reports).expect("reports serialize")
            );
        }
        _ => {
            outln!(
                "candidate {candidate}, span [{}, {t_end}], tolerance {:.1e}",
                cfg.t0,
                opts.tol
            );
            for r in &reports {
                outln!("x{}: {}", r.coordinate + 1, describe(&r.verdict));
            }
        }
    }
    Ok(())
}

pub fn list_examples() -> Result<(), CliError> {
    for e in examples() {
        let periods: Vec<String> = e
            .reference_periods
            .iter()
            .map(|r| {
                let roots: Vec<String> = r.roots.iter().map(|n| format!("x{n}")).collect();
                let kind = if r.asymptotic { "asymptotic " } else { "" };
                format!("{}: {kind}{}", roots.join("/"), r.period)
            })
            .collect();
        outln!(
            "{:<20} N={} m1={:<3} t_end={:<5} {}",
            e.name,
            e.x0.len(),
            e.m1,
            e.t_end,
            periods.join(", ")
        );
        outln!("{:<20} {}", "", e.summary);
    }
    Ok(())
}
