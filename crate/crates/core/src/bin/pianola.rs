//! Command-line front end.
//!
//! Exit codes: 0 success, 1 runtime error, 2 usage error, 3 an experiment
//! row that does not depend on the seed failed its check.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pianola::experiments::{self, ExperimentSpec, Report, REGISTRY};
use pianola::grammar::{Grammar, GrammarSpec};
use pianola::hal::{self, CalibrationData, LatencyModel};
use pianola::io::{self, CompositionConfig};
use pianola::metrics::{self, MetricReport};
use pianola::pipeline::{sort_events, Piece};
use pianola::{Error, Result};

#[derive(Parser)]
#[command(name = "pianola", version, about = "Grammar-driven, latency-aware event generation for reproducing pianos")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Expand an L-system and print the symbol string.
    Expand {
        /// Grammar JSON (`alphabet`, `axiom`, `rules`); defaults to A -> AB, B -> A.
        #[arg(long)]
        grammar: Option<PathBuf>,
        #[arg(long)]
        depth: u32,
        /// Also print each symbol's generation.
        #[arg(long)]
        tagged: bool,
    },
    /// Render a composition to events, MIDI and a constraint report.
    Generate {
        /// Composition JSON; defaults to the canonical two-symbol preset.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        seed: Seed,
        #[arg(long)]
        out: PathBuf,
    },
    /// Shift onsets earlier by the modelled latency.
    Compensate {
        /// Event file (.json, .csv, .mid).
        #[arg(long = "in")]
        input: PathBuf,
        /// `linear`, `power:<c>`, `log:<k>`, or a JSON model file.
        #[arg(long, default_value = "power:0.5", conflicts_with = "calibration")]
        model: String,
        /// CSV of `velocity,latency_ms` points; fits a power law.
        #[arg(long)]
        calibration: Option<PathBuf>,
        /// Apply the velocity robustness filter first, with this compression.
        #[arg(long)]
        filter: Option<f64>,
        /// Output file (.json or .csv); JSON to stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute metrics on one event file, or between two.
    Analyze {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        pair: Option<PathBuf>,
        /// Comma-separated: mc, rc, pcc, vss, wvss, nwvss, pcs, ir, lz, nlz, det.
        #[arg(long, value_delimiter = ',', default_value = "pcc,ir,lz,nlz,det")]
        metrics: Vec<String>,
        #[arg(long)]
        csv: bool,
    },
    /// Run one experiment or all of them.
    Experiment(ExperimentArgs),
    /// Consolidate saved reports into one matrix.
    Report {
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Args)]
struct Seed {
    #[arg(long, env = "PIANOLA_SEED", default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, required_unless_present_any = ["all", "list"], conflicts_with = "all")]
    name: Option<String>,
    #[arg(long)]
    all: bool,
    #[arg(long)]
    list: bool,
    #[arg(long)]
    full_scale: bool,
    #[command(flatten)]
    seed: Seed,
    /// Write `<name>.json`, `<name>.csv` and `<name>.txt` here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Argument(_) | Error::UnknownExperiment(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<ExitCode> {
    match cmd {
        Cmd::Expand { grammar, depth, tagged } => {
            let g = match grammar {
                Some(path) => {
                    let spec: GrammarSpec = serde_json::from_slice(&fs::read(path)?)?;
                    Grammar::try_from(spec)?
                }
                None => Grammar::fibonacci(),
            };
            let s = g.expand(depth)?;
            println!("{s}");
            if tagged {
                println!("{}", s.tagged());
            }
        }
        Cmd::Generate { config, seed, out } => {
            let cfg = match config {
                Some(path) => CompositionConfig::load(&path)?,
                None => CompositionConfig::canonical(),
            };
            let r = cfg.render(seed.seed)?;
            fs::create_dir_all(&out)?;
            fs::write(out.join("symbols.txt"), format!("{}\n{}\n", r.symbols, r.symbols.tagged()))?;
            io::write_events_json(&r.score, &out.join("score.json"))?;
            io::write_events_csv(&r.score, &out.join("score.csv"))?;
            io::write_events_json(&r.performance, &out.join("performance.json"))?;
            io::write_midi(&r.performance, &cfg.midi, &out.join("performance.mid"))?;
            fs::write(out.join("constraints.json"), serde_json::to_vec_pretty(&r.report)?)?;
            println!(
                "{} events, {:.1} s, {} constraint actions, config {}",
                r.score.events.len(),
                r.score.duration(),
                r.report.violations.len(),
                r.score.meta.config_hash.as_deref().unwrap_or("-")
            );
        }
        Cmd::Compensate { input, model, calibration, filter, out } => {
            let mut p = io::read_events(&input)?;
            if let Some(gamma) = filter {
                p = hal::robustness_filter(&p, &hal::FilterConfig { gamma, ..Default::default() })?;
            }
            let m = match calibration {
                Some(path) => hal::fit_power_law(&read_calibration(&path)?, Some((10.0, 30.0)))?.model,
                None => parse_model(&model)?,
            };
            let mut q = hal::precompensate(&p, &m);
            sort_events(&mut q.events);
            write_piece(&q, out.as_deref())?;
        }
        Cmd::Analyze { input, pair, metrics, csv } => {
            let a = io::read_events(&input)?;
            let b = pair.map(|p| io::read_events(&p)).transpose()?;
            let r = analyze(&a, b.as_ref(), &metrics)?;
            if csv {
                println!("{}\n{}", MetricReport::csv_header(), r.csv_row());
            } else {
                println!("{}", serde_json::to_string_pretty(&r)?);
            }
        }
        Cmd::Experiment(args) => return experiment(args),
        Cmd::Report { dir } => report(&dir)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_model(text: &str) -> Result<LatencyModel> {
    let num = |s: &str| s.parse::<f64>().map_err(|_| Error::Argument(format!("bad number in model {text:?}")));
    let m = match text.split_once(':') {
        None if text == "linear" => LatencyModel::linear(),
        Some(("power", c)) => LatencyModel::power(num(c)?),
        Some(("log", k)) => LatencyModel::log(num(k)?),
        _ if Path::new(text).exists() => serde_json::from_slice(&fs::read(text)?)?,
        _ => return Err(Error::Argument(format!("unknown latency model {text:?}"))),
    };
    m.validate()?;
    Ok(m)
}

fn read_calibration(path: &Path) -> Result<CalibrationData> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let points = rd.deserialize::<(f64, f64)>().collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(CalibrationData { points })
}

fn write_piece(p: &Piece, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) if path.extension().is_some_and(|e| e == "csv") => io::write_events_csv(p, path),
        Some(path) => io::write_events_json(p, path),
        None => {
            println!("{}", serde_json::to_string_pretty(p)?);
            Ok(())
        }
    }
}

fn analyze(a: &Piece, b: Option<&Piece>, which: &[String]) -> Result<MetricReport> {
    let pitches = |p: &Piece| p.events.iter().map(|e| e.pitch as f64).collect::<Vec<_>>();
    let iois = |p: &Piece| p.events.windows(2).map(|w| w[1].onset - w[0].onset).collect::<Vec<_>>();
    let need_pair = || b.ok_or_else(|| Error::Argument("this metric needs --pair".into()));
    let stream = || metrics::discretize(&iois(a), &pitches(a)[1..]);
    let mut r = MetricReport::default();
    for m in which {
        match m.trim() {
            "mc" => r.mc = Some(metrics::melodic_coherence(&pitches(a), &pitches(need_pair()?))?),
            "rc" => r.rc = Some(metrics::rhythmic_coherence(&iois(a), &iois(need_pair()?))?),
            "pcc" | "ts" => r.pcc = Some(metrics::pitch_class_concentration(&pitches(a))),
            "vss" | "wvss" | "nwvss" => {
                let s = metrics::voice_separation(&a.events, &need_pair()?.events, None)?;
                (r.vss, r.wvss, r.nwvss) = (Some(s.vss), Some(s.wvss), Some(s.nwvss));
            }
            "pcs" => r.pcs_distance = Some(metrics::pcs_distance(&a.events, &need_pair()?.events, 1.0)?),
            "ir" => r.information_rate = Some(metrics::information_rate(&stream())?),
            "lz" => r.lz_phrases = Some(metrics::lz_complexity(&stream())),
            "nlz" => r.normalized_lz = Some(metrics::normalized_lz(&stream())?),
            "det" => r.det = Some(metrics::rqa_determinism(&stream(), 2)?),
            other => return Err(Error::Argument(format!("unknown metric {other:?}"))),
        }
    }
    Ok(r)
}

fn experiment(args: ExperimentArgs) -> Result<ExitCode> {
    if args.list {
        REGISTRY.iter().for_each(|n| println!("{n}"));
        return Ok(ExitCode::SUCCESS);
    }
    let reports = if args.all {
        let summary = experiments::run_all(args.seed.seed, args.full_scale, None)?;
        for (name, e) in &summary.errors {
            eprintln!("{name}: {e}");
        }
        eprint!("{}", summary.render());
        if !summary.errors.is_empty() {
            save(&summary.reports, args.out.as_deref())?;
            return Ok(ExitCode::from(1));
        }
        summary.reports
    } else {
        let mut spec = ExperimentSpec::new(args.name.as_deref().unwrap_or_default(), args.seed.seed);
        spec.full_scale = args.full_scale;
        vec![experiments::run(&spec)?]
    };
    for r in &reports {
        println!("{}", r.render());
    }
    save(&reports, args.out.as_deref())?;
    let exact = reports.iter().map(|r| r.deterministic_failures().len()).sum::<usize>();
    Ok(if exact > 0 { ExitCode::from(3) } else { ExitCode::SUCCESS })
}

fn save(reports: &[Report], dir: Option<&Path>) -> Result<()> {
    let Some(dir) = dir else { return Ok(()) };
    fs::create_dir_all(dir)?;
    for r in reports {
        fs::write(dir.join(format!("{}.json", r.experiment)), r.to_json()?)?;
        fs::write(dir.join(format!("{}.csv", r.experiment)), r.to_csv()?)?;
        fs::write(dir.join(format!("{}.txt", r.experiment)), r.render())?;
    }
    Ok(())
}

fn report(dir: &Path) -> Result<()> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    let mut reports: Vec<Report> = Vec::new();
    for p in &paths {
        match Report::from_json(&fs::read_to_string(p)?) {
            Ok(r) => reports.push(r),
            Err(_) => eprintln!("skipping {} (not a report)", p.display()),
        }
    }
    if reports.is_empty() {
        return Err(Error::Argument(format!("no reports in {}", dir.display())));
    }
    reports.sort_by_key(|r| REGISTRY.iter().position(|n| *n == r.experiment).unwrap_or(usize::MAX));
    let mut w = csv::Writer::from_path(dir.join("matrix.csv"))?;
    w.write_record(["experiment", "key", "value", "reference", "anchor", "status"])?;
    let (mut pass, mut fail, mut info) = (0, 0, 0);
    for r in &reports {
        for row in &r.rows {
            let status = match row.passed() {
                Some(true) => {
                    pass += 1;
                    "pass"
                }
                Some(false) => {
                    fail += 1;
                    "FAIL"
                }
                None => {
                    info += 1;
                    "info"
                }
            };
            w.write_record([
                r.experiment.as_str(),
                &row.key,
                &row.value.to_string(),
                &row.reference.map_or(String::new(), |v| v.to_string()),
                &row.anchor,
                status,
            ])?;
        }
        println!("{:<28} seed {:<6} {:>3} rows, {} failing", r.experiment, r.seed, r.rows.len(), r.failures().len());
    }
    w.flush()?;
    println!("{pass} pass, {fail} fail, {info} reported only; matrix written to {}", dir.join("matrix.csv").display());
    Ok(())
}
