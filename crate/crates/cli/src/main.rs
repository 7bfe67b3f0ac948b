//! `rmmcop`: command-line toolkit for reflected maxmin (RMM) and maxmin
//! copulas — validation, evaluation, measure decomposition, level sets,
//! diagonal analysis, generator recovery, and sampling.
//!
//! Exit codes: 0 success, 1 mathematical domain error (failed generator
//! conditions, undefined anchors or quotients), 2 input/format error,
//! 3 numerical non-convergence.

use std::fs;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use rmm_copulas::copula::rectangle_volume;
use rmm_copulas::diagonal::{diagonal_of, srmm_from_diagonal, DiagonalError};
use rmm_copulas::generator::GeneratorError;
use rmm_copulas::inference::{
    recover_generator, recover_generator_scaled, uniform_grid, EmpiricalCopula, InferenceError,
};
use rmm_copulas::io::{self, IoError};
use rmm_copulas::measure::{mass_decomposition, MeasureError};
use rmm_copulas::presets::{self, PresetError};
use rmm_copulas::sampler::{figure_bundle_keys, sample_maxmin, sample_rmm, SampleSet};
use rmm_copulas::{DiagonalSection, Generator, RmmCopula};

/// Application error carrying the process exit code.
struct AppError {
    code: u8,
    message: String,
}

impl AppError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        AppError {
            code,
            message: message.into(),
        }
    }

    fn input(message: impl Into<String>) -> Self {
        AppError::new(2, message)
    }
}

type AppResult<T> = Result<T, AppError>;

impl From<PresetError> for AppError {
    fn from(e: PresetError) -> Self {
        match e {
            PresetError::Invalid(inner) => AppError::from(inner),
            other => AppError::input(other.to_string()),
        }
    }
}

impl From<GeneratorError> for AppError {
    fn from(e: GeneratorError) -> Self {
        match e {
            GeneratorError::Structural(_) | GeneratorError::DomainNotUnit { .. } => {
                AppError::input(e.to_string())
            }
            _ => AppError::new(1, e.to_string()),
        }
    }
}

impl From<IoError> for AppError {
    fn from(e: IoError) -> Self {
        AppError::input(e.to_string())
    }
}

impl From<MeasureError> for AppError {
    fn from(e: MeasureError) -> Self {
        AppError::new(3, e.to_string())
    }
}

impl From<InferenceError> for AppError {
    fn from(e: InferenceError) -> Self {
        match e {
            InferenceError::EmptySample => AppError::input(e.to_string()),
            _ => AppError::new(1, e.to_string()),
        }
    }
}

impl From<DiagonalError> for AppError {
    fn from(e: DiagonalError) -> Self {
        match e {
            DiagonalError::Structural(_)
            | DiagonalError::DomainNotUnit { .. }
            | DiagonalError::NonPolynomialPiece => AppError::input(e.to_string()),
            _ => AppError::new(1, e.to_string()),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::input(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "rmmcop",
    about = "Reflected maxmin (RMM) and maxmin copulas: validate, evaluate, decompose, sample, recover",
    version
)]
struct Cli {
    /// Cap on worker threads (defaults to the number of cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// JSON config supplying defaults for flags (explicit flags win)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

/// Where a copula comes from: a preset key or generator file(s).
#[derive(Args, Debug, Clone, Default)]
struct Source {
    /// Preset key, e.g. "w", "efgm:a=0.5", "ex3a:theta=1/3,eta=1/3"
    #[arg(long)]
    preset: Option<String>,

    /// Generator file for f (JSON)
    #[arg(long, value_name = "FILE")]
    file_f: Option<PathBuf>,

    /// Generator file for g (JSON); defaults to f (symmetric copula)
    #[arg(long, value_name = "FILE")]
    file_g: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the generator conditions (G1)-(G3); exit 0 only if all pass
    Validate {
        #[command(flatten)]
        source: Source,
        /// Grid size for the redundant sampled cross-check
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Evaluate the copula at a point
    Eval {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        u: Option<f64>,
        #[arg(long)]
        v: Option<f64>,
        /// Evaluate the associated maxmin copula instead
        #[arg(long, action = ArgAction::SetTrue)]
        maxmin: bool,
    },
    /// Mass the copula assigns to a rectangle
    Volume {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        u1: Option<f64>,
        #[arg(long)]
        u2: Option<f64>,
        #[arg(long)]
        v1: Option<f64>,
        #[arg(long)]
        v2: Option<f64>,
    },
    /// Density of the absolutely continuous part at a point
    Density {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        u: Option<f64>,
        #[arg(long)]
        v: Option<f64>,
    },
    /// Mass decomposition: AC mass, singular mass, zero-set area, profile
    Mass {
        #[command(flatten)]
        source: Source,
        /// Sample count for the boundary mass profile
        #[arg(long, default_value_t = 256)]
        profile_samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Level curve C = t as CSV (t = 0 gives the zero-level boundary curve)
    Levelset {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        t: Option<f64>,
        /// Number of u samples
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Diagonal section: pieces, a_delta, class membership, reconstruction
    Diagonal {
        #[command(flatten)]
        source: Source,
        /// Diagonal file (JSON with delta_pieces) instead of a copula source
        #[arg(long, value_name = "FILE")]
        diagonal_file: Option<PathBuf>,
        /// Print the class-membership verdict
        #[arg(long, action = ArgAction::SetTrue)]
        check_dhat: bool,
        /// Rebuild the symmetric copula from the diagonal and print its
        /// generator
        #[arg(long, action = ArgAction::SetTrue)]
        srmm: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover the generator from copula values or a sample CSV
    Recover {
        #[command(flatten)]
        source: Source,
        /// CSV of observed pairs with header u,v
        #[arg(long, value_name = "FILE")]
        samples: Option<PathBuf>,
        /// Output grid size (recovery at k/grid for k = 1..grid)
        #[arg(long)]
        grid: Option<usize>,
        /// Use the scale-fixed recovery (for copulas with u_min = 0)
        #[arg(long, action = ArgAction::SetTrue)]
        scaled: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw reproducible samples; CSV u,v,singular plus a metadata sidecar
    Sample {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Sample the associated maxmin copula instead
        #[arg(long, action = ArgAction::SetTrue)]
        maxmin: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the twelve scatterplot datasets to a directory
    Figures {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Defaults loaded from `--config`; explicit flags always win.
struct Config(serde_json::Value);

impl Config {
    fn load(path: Option<&Path>) -> AppResult<Self> {
        match path {
            None => Ok(Config(serde_json::Value::Null)),
            Some(p) => {
                let text = fs::read_to_string(p)?;
                let v: serde_json::Value = serde_json::from_str(&text)
                    .map_err(|e| AppError::input(format!("config: {e}")))?;
                Ok(Config(v))
            }
        }
    }

    fn f64(&self, key: &str) -> Option<f64> {
        self.0.get(key).and_then(|v| v.as_f64())
    }

    fn u64(&self, key: &str) -> Option<u64> {
        self.0.get(key).and_then(|v| v.as_u64())
    }

    fn str(&self, key: &str) -> Option<String> {
        self.0.get(key).and_then(|v| v.as_str()).map(str::to_string)
    }
}

fn required_f64(flag: Option<f64>, cfg: &Config, key: &str) -> AppResult<f64> {
    flag.or_else(|| cfg.f64(key))
        .ok_or_else(|| AppError::input(format!("missing --{key}")))
}

fn load_generator(path: &Path) -> AppResult<Generator> {
    let text = fs::read_to_string(path)?;
    Ok(io::generator_from_json(&text)?)
}

impl Source {
    fn with_config(mut self, cfg: &Config) -> Self {
        if self.preset.is_none() && self.file_f.is_none() {
            self.preset = cfg.str("preset");
        }
        self
    }

    fn resolve(&self) -> AppResult<RmmCopula> {
        match (&self.preset, &self.file_f) {
            (Some(key), None) => Ok(presets::rmm(key)?),
            (None, Some(f_path)) => {
                let f = load_generator(f_path)?;
                let g = match &self.file_g {
                    Some(g_path) => load_generator(g_path)?,
                    None => f.clone(),
                };
                Ok(RmmCopula::new(f, g)?)
            }
            (Some(_), Some(_)) => Err(AppError::input(
                "give either --preset or --file-f, not both",
            )),
            (None, None) => Err(AppError::input(
                "a copula source is required: --preset KEY or --file-f FILE",
            )),
        }
    }
}

fn write_or_print(out: Option<&Path>, content: &str) -> AppResult<()> {
    match out {
        Some(path) => {
            fs::write(path, content)?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    // assemble help text that lists the preset catalog
    let mut help = String::from("Presets:\n");
    for info in presets::catalog() {
        help.push_str(&format!("  {:34} {}\n", info.key, info.summary));
    }
    let cmd = Cli::command().after_help(help);
    let cli = match Cli::from_arg_matches(&cmd.get_matches()) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> AppResult<()> {
    let cfg = Config::load(cli.config.as_deref())?;
    let threads = cli.threads.or(cfg.u64("threads").map(|t| t as usize));
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .map_err(|e| AppError::input(format!("--threads: {e}")))?;
    }

    match cli.command {
        Command::Validate { source, grid } => {
            let grid = grid.or(cfg.u64("grid").map(|g| g as usize)).unwrap_or(101);
            let source = source.with_config(&cfg);
            // validate without the constructor so condition failures are
            // reported rather than bubbled up as errors
            let (f, g) = match (&source.preset, &source.file_f) {
                (Some(key), None) => {
                    let c = presets::rmm::<f64>(key)?;
                    (c.f().clone(), c.g().clone())
                }
                (None, Some(f_path)) => {
                    let f = load_generator(f_path)?;
                    let g = match &source.file_g {
                        Some(p) => load_generator(p)?,
                        None => f.clone(),
                    };
                    (f, g)
                }
                _ => return Err(AppError::input("--preset or --file-f is required")),
            };
            let mut pass = true;
            let mut out = String::from("{\n");
            for (name, gen) in [("f", &f), ("g", &g)] {
                let report = gen.validate(grid);
                pass &= report.passed();
                out.push_str(&format!(
                    "  \"{name}\": {},\n",
                    serde_json::to_string(&report).expect("report serializes")
                ));
            }
            out.push_str(&format!("  \"pass\": {pass}\n}}\n"));
            print!("{out}");
            if !pass {
                let report = f.validate(grid);
                let detail = if report.passed() {
                    g.validate(grid).first_failure()
                } else {
                    report.first_failure()
                };
                return Err(AppError::new(1, detail));
            }
            Ok(())
        }
        Command::Eval {
            source,
            u,
            v,
            maxmin,
        } => {
            let c = source.with_config(&cfg).resolve()?;
            let u = required_f64(u, &cfg, "u")?;
            let v = required_f64(v, &cfg, "v")?;
            check_unit(u, "u")?;
            check_unit(v, "v")?;
            let value = if maxmin {
                c.reflect().cdf(u, v)
            } else {
                c.cdf(u, v)
            };
            println!("{}", io::fmt_sig(value, 12));
            Ok(())
        }
        Command::Volume {
            source,
            u1,
            u2,
            v1,
            v2,
        } => {
            let c = source.with_config(&cfg).resolve()?;
            let u1 = required_f64(u1, &cfg, "u1")?;
            let u2 = required_f64(u2, &cfg, "u2")?;
            let v1 = required_f64(v1, &cfg, "v1")?;
            let v2 = required_f64(v2, &cfg, "v2")?;
            for (x, name) in [(u1, "u1"), (u2, "u2"), (v1, "v1"), (v2, "v2")] {
                check_unit(x, name)?;
            }
            if u1 > u2 || v1 > v2 {
                return Err(AppError::input("rectangle needs u1 <= u2 and v1 <= v2"));
            }
            println!("{}", io::fmt_sig(rectangle_volume(&c, u1, u2, v1, v2), 12));
            Ok(())
        }
        Command::Density { source, u, v } => {
            let c = source.with_config(&cfg).resolve()?;
            let u = required_f64(u, &cfg, "u")?;
            let v = required_f64(v, &cfg, "v")?;
            check_unit(u, "u")?;
            check_unit(v, "v")?;
            let d = rmm_copulas::measure::density(&c, u, v);
            if d.flagged {
                eprintln!("note: point lies on a breakpoint or the boundary curve; right derivatives used");
            }
            println!("{}", io::fmt_sig(d.value, 12));
            Ok(())
        }
        Command::Mass {
            source,
            profile_samples,
            out,
        } => {
            let c = source.with_config(&cfg).resolve()?;
            let dec = mass_decomposition(&c, profile_samples)?;
            let out = out.or(cfg.str("out").map(PathBuf::from));
            write_or_print(out.as_deref(), &io::decomposition_to_json(&dec))
        }
        Command::Levelset { source, t, n, out } => {
            let c = source.with_config(&cfg).resolve()?;
            let t = required_f64(t, &cfg, "t")?;
            let n = n.or(cfg.u64("n").map(|x| x as usize)).unwrap_or(256);
            if !(0.0..=1.0).contains(&t) {
                return Err(AppError::input("--t must lie in [0, 1]"));
            }
            let points = if t == 0.0 {
                c.boundary_curve(n).points
            } else {
                c.level_curve(t, n)
            };
            let mut csv = String::from("u,v\n");
            for (u, v) in points {
                csv.push_str(&format!("{},{}\n", io::fmt_sig(u, 12), io::fmt_sig(v, 12)));
            }
            let out = out.or(cfg.str("out").map(PathBuf::from));
            write_or_print(out.as_deref(), &csv)
        }
        Command::Diagonal {
            source,
            diagonal_file,
            check_dhat,
            srmm,
            out,
        } => {
            let source = source.with_config(&cfg);
            let d: DiagonalSection = match (&diagonal_file, &source.preset, &source.file_f) {
                (Some(path), None, None) => {
                    let text = fs::read_to_string(path)?;
                    io::diagonal_from_json(&text)?
                }
                (None, _, _) => {
                    let c = source.resolve()?;
                    diagonal_of(&c, true)?
                }
                _ => {
                    return Err(AppError::input(
                        "give either --diagonal-file or a copula source",
                    ))
                }
            };
            let mut text = io::diagonal_to_json(&d)?;
            text.push_str(&format!("\na_delta: {}\n", io::fmt_sig(d.a_delta(), 12)));
            if check_dhat {
                let report = d.check_d_hat(512);
                if report.member {
                    text.push_str("member of D-hat\n");
                } else {
                    text.push_str(&format!("not in D-hat: {}\n", report.first_failure()));
                }
                text.push_str(&format!(
                    "report: {}\n",
                    serde_json::to_string(&report).expect("report serializes")
                ));
            }
            if srmm {
                let c = srmm_from_diagonal(&d)?;
                text.push_str("reconstructed symmetric generator:\n");
                match io::generator_to_json(c.f()) {
                    Ok(json) => text.push_str(&json),
                    Err(_) => text.push_str(
                        "(square-root pieces; evaluate via the library, no polynomial file form)\n",
                    ),
                }
                text.push('\n');
            }
            let out = out.or(cfg.str("out").map(PathBuf::from));
            write_or_print(out.as_deref(), &text)
        }
        Command::Recover {
            source,
            samples,
            grid,
            scaled,
            out,
        } => {
            let source = source.with_config(&cfg);
            let grid_n = grid.or(cfg.u64("grid").map(|g| g as usize)).unwrap_or(100);
            let grid = uniform_grid::<f64>(grid_n);
            let samples = samples.or(cfg.str("samples").map(PathBuf::from));
            let (rec, emp_info) = match samples {
                Some(path) => {
                    let file = fs::File::open(&path)?;
                    let pairs = io::read_pairs_csv(std::io::BufReader::new(file))?;
                    let emp = EmpiricalCopula::from_pairs(&pairs)?;
                    let thr = emp.quotient_threshold();
                    let rec = if scaled {
                        recover_generator_scaled(&emp, &grid, thr)?
                    } else {
                        recover_generator(&emp, &grid, thr)?
                    };
                    (rec, Some(pairs.len()))
                }
                None => {
                    let c = source.resolve()?;
                    let rec = if scaled {
                        recover_generator_scaled(&c, &grid, 1e-9)?
                    } else {
                        recover_generator(&c, &grid, 1e-9)?
                    };
                    (rec, None)
                }
            };
            let csv = io::recovery_to_csv(&rec);
            let summary = io::recovery_summary_json(&rec);
            match out.or(cfg.str("out").map(PathBuf::from)) {
                Some(path) => {
                    fs::write(&path, csv)?;
                    print!("{summary}");
                }
                None => {
                    print!("{csv}");
                    eprint!("{summary}");
                }
            }
            if let Some(n) = emp_info {
                eprintln!("samples: {n}");
            }
            Ok(())
        }
        Command::Sample {
            source,
            n,
            seed,
            maxmin,
            out,
        } => {
            let source = source.with_config(&cfg);
            let c = source.resolve()?;
            let n = n.or(cfg.u64("n").map(|x| x as usize)).unwrap_or(10_000);
            let seed = seed.or(cfg.u64("seed")).unwrap_or(0);
            let label = source
                .preset
                .clone()
                .unwrap_or_else(|| "custom".to_string());
            let set = if maxmin {
                sample_maxmin(&c.reflect(), n, seed, label)
            } else {
                sample_rmm(&c, n, seed, label)
            };
            emit_sample(&set, out.or(cfg.str("out").map(PathBuf::from)).as_deref())
        }
        Command::Figures { n, seed, out } => {
            let n = n.or(cfg.u64("n").map(|x| x as usize)).unwrap_or(10_000);
            let seed = seed.or(cfg.u64("seed")).unwrap_or(0);
            let dir = out
                .or(cfg.str("out").map(PathBuf::from))
                .ok_or_else(|| AppError::input("--out DIR is required"))?;
            fs::create_dir_all(&dir)?;
            let mut manifest = Vec::new();
            for (i, key) in figure_bundle_keys().into_iter().enumerate() {
                let c = presets::rmm::<f64>(key)?;
                let set = sample_rmm(&c, n, seed.wrapping_add(i as u64), key);
                let file = dir.join(format!("{key}.csv"));
                fs::write(&file, io::sample_to_csv(&set))?;
                fs::write(
                    dir.join(format!("{key}.meta.json")),
                    io::sample_metadata_json(&set),
                )?;
                manifest.push(serde_json::json!({
                    "preset": key,
                    "file": format!("{key}.csv"),
                    "n": n,
                    "seed": seed.wrapping_add(i as u64),
                }));
            }
            fs::write(
                dir.join("manifest.json"),
                serde_json::to_string_pretty(&serde_json::json!({ "datasets": manifest }))
                    .expect("manifest serializes")
                    + "\n",
            )?;
            println!(
                "wrote {} datasets to {}",
                figure_bundle_keys().len(),
                dir.display()
            );
            Ok(())
        }
    }
}

fn emit_sample(set: &SampleSet<f64>, out: Option<&Path>) -> AppResult<()> {
    let csv = io::sample_to_csv(set);
    let meta = io::sample_metadata_json(set);
    match out {
        Some(path) => {
            fs::write(path, csv)?;
            let meta_path = path.with_extension("meta.json");
            fs::write(&meta_path, meta)?;
            Ok(())
        }
        None => {
            print!("{csv}");
            eprint!("{meta}");
            Ok(())
        }
    }
}

fn check_unit(x: f64, name: &str) -> AppResult<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(AppError::input(format!("--{name} must lie in [0, 1]")))
    }
}
