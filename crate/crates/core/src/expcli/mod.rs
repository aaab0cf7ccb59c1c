//! Experiment driver behind the `risq` binary.
//!
//! `generate` simulates a training dataset, `train` learns one Q-table per
//! confidence threshold, `eval` compares acquisition methods on fresh
//! channels, and `plot` renders any of the emitted CSV files as SVG.

mod config;
pub mod svg;

use std::path::{Path, PathBuf};

pub use config::{ExperimentConfig, Method};

use crate::belief::{generate_dataset, load_dataset, save_dataset, TrainingDataset};
use crate::chansim::{sample_channel, SystemConfig};
use crate::codebook::{build_codebook, save_codebook, Codebook};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::protocol::{run_episode, NarrowStrengths, Session, Strategy};
use crate::qlearner::{
    extract_policy, load_qtable, save_qtable, train, Hyper, Policy, TrainingCurve,
};
use crate::rng::{self, salt};
use crate::ssp::build_state_space;
use crate::textfmt::real;

pub const EVAL_HEADER: [&str; 4] = ["method", "k", "mean_rho", "stderr"];
pub const CURVE_HEADER: [&str; 3] = ["epoch", "mean_length", "terminal_fraction"];

/// Process exit code for an error: 2 configuration, 3 incompatible or
/// malformed artifact, 4 I/O.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidParameter(_) | Error::Generation(_) => 2,
        Error::Parse { what: "config", .. } => 2,
        Error::Io { .. } => 4,
        _ => 3,
    }
}

fn system(cfg: &ExperimentConfig) -> Result<SystemConfig> {
    SystemConfig::from_snr_db(cfg.m, cfg.n, cfg.snr_db, cfg.seed)
}

fn codebook(cfg: &ExperimentConfig, sys: &SystemConfig) -> Result<Codebook> {
    build_codebook(sys, cfg.layers, cfg.deact_seed)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn csv_string(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    // Writing to memory cannot fail.
    w.write_record(header).unwrap();
    for row in rows {
        w.write_record(row).unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

/// Label used in file names for a threshold, e.g. `0.9`.
pub fn tau_tag(tau: f64) -> String {
    format!("{tau}")
}

pub fn qtable_path(out: &Path, tau: f64) -> PathBuf {
    out.join(format!("qtable_tau{}.txt", tau_tag(tau)))
}

pub fn curve_path(out: &Path, tau: f64) -> PathBuf {
    out.join(format!("curve_tau{}.csv", tau_tag(tau)))
}

#[derive(Debug, Clone)]
pub struct GenerateReport {
    pub dataset: PathBuf,
    pub codebook: PathBuf,
    pub class_counts: Vec<usize>,
}

/// Simulate the training dataset into `<out>/dataset.txt` (and the codebook
/// it was measured with into `<out>/codebook.txt`).
pub fn cmd_generate(cfg: &ExperimentConfig, exec: Execution) -> Result<GenerateReport> {
    cfg.validate()?;
    let sys = system(cfg)?;
    let cb = codebook(cfg, &sys)?;
    let ds = generate_dataset(&sys, &cb, cfg.n_dataset, cfg.seed, exec)?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    let report = GenerateReport {
        dataset: cfg.out.join("dataset.txt"),
        codebook: cfg.out.join("codebook.txt"),
        class_counts: ds.class_counts(),
    };
    save_codebook(&cb, &report.codebook)?;
    save_dataset(&ds, &report.dataset)?;
    Ok(report)
}

/// Load a dataset and make sure it was measured with the configured codebook.
fn load_checked(
    cfg: &ExperimentConfig,
    path: &Path,
) -> Result<(SystemConfig, Codebook, TrainingDataset)> {
    cfg.validate()?;
    let sys = system(cfg)?;
    let cb = codebook(cfg, &sys)?;
    let ds = load_dataset(path)?;
    ds.check_codebook(&cb)?;
    Ok((sys, cb, ds))
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub tau: f64,
    pub qtable: PathBuf,
    pub curve_csv: PathBuf,
    pub curve: TrainingCurve,
}

pub fn curve_csv(curve: &TrainingCurve) -> String {
    let rows: Vec<Vec<String>> = (0..curve.len())
        .map(|e| {
            vec![
                (e + 1).to_string(),
                real(curve.mean_length[e]),
                real(curve.terminal_fraction[e]),
            ]
        })
        .collect();
    csv_string(&CURVE_HEADER, &rows)
}

/// Train one Q-table per threshold in `tau_sweep`; writes
/// `qtable_tau<τ>.txt`, `curve_tau<τ>.csv` and a combined `curves.svg`.
pub fn cmd_train(
    cfg: &ExperimentConfig,
    dataset: &Path,
    exec: Execution,
) -> Result<Vec<TrainReport>> {
    let (_, cb, ds) = load_checked(cfg, dataset)?;
    let eps = cfg.eps_floor.unwrap_or_else(|| ds.default_eps_floor());
    let hyper = Hyper {
        alpha: cfg.alpha,
        epsilon: cfg.epsilon,
        max_epoch: cfg.max_epoch,
        max_channel: cfg.max_channel,
        max_l: cfg.max_l(),
    };
    // Each threshold is an independent single-writer training run.
    let trained = map_indexed(cfg.tau_sweep.len(), exec, |i| {
        let ss = build_state_space(cb.nc(), &cfg.q_grid, cfg.tau_sweep[i])?;
        train(&ds, &ss, &cb, &hyper, eps, cfg.seed ^ salt::TRAIN)
    });

    let mut reports = Vec::new();
    for (&tau, t) in cfg.tau_sweep.iter().zip(trained) {
        let t = t?;
        let report = TrainReport {
            tau,
            qtable: qtable_path(&cfg.out, tau),
            curve_csv: curve_path(&cfg.out, tau),
            curve: t.curve,
        };
        write_file(&report.curve_csv, &curve_csv(&report.curve))?;
        if let Some(dir) = report.qtable.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        save_qtable(&t.qtable, &report.qtable)?;
        reports.push(report);
    }
    let chart = svg::Chart {
        title: "Average episode length during training".into(),
        x_label: "epoch".into(),
        y_label: "mean episode length (pilots)".into(),
        series: reports
            .iter()
            .map(|r| svg::Series {
                label: format!("tau = {}", tau_tag(r.tau)),
                points: r
                    .curve
                    .mean_length
                    .iter()
                    .enumerate()
                    .map(|(e, &l)| ((e + 1) as f64, l))
                    .collect(),
            })
            .collect(),
    };
    write_file(&cfg.out.join("curves.svg"), &svg::render(&chart))?;
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub method: Method,
    pub k: usize,
    pub mean_rho: f64,
    pub stderr: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalTable {
    pub rows: Vec<EvalRow>,
}

impl EvalTable {
    pub fn get(&self, method: Method, k: usize) -> Option<&EvalRow> {
        self.rows.iter().find(|r| r.method == method && r.k == k)
    }

    pub fn to_csv(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.method.name().to_string(),
                    r.k.to_string(),
                    real(r.mean_rho),
                    real(r.stderr),
                ]
            })
            .collect();
        csv_string(&EVAL_HEADER, &rows)
    }

    fn chart(&self, title: String) -> svg::Chart {
        let mut series: Vec<svg::Series> = Vec::new();
        for r in &self.rows {
            let label = r.method.name();
            match series.iter_mut().find(|s| s.label == label) {
                Some(s) => s.points.push((r.k as f64, r.mean_rho)),
                None => series.push(svg::Series {
                    label: label.to_string(),
                    points: vec![(r.k as f64, r.mean_rho)],
                }),
            }
        }
        svg::Chart {
            title,
            x_label: "pilot budget k".into(),
            y_label: "mean relative channel strength".into(),
            series,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub table: EvalTable,
    pub csv: PathBuf,
    pub svg: PathBuf,
}

/// Mean relative strength of every selected method at budgets `1..=budget`
/// over `n_eval_channels` channels; writes `eval.csv` and `eval.svg`.
pub fn cmd_eval(
    cfg: &ExperimentConfig,
    dataset: &Path,
    qtable: Option<&Path>,
    exec: Execution,
) -> Result<EvalReport> {
    let (sys, cb, ds) = load_checked(cfg, dataset)?;
    let ss = build_state_space(cb.nc(), &cfg.q_grid, cfg.tau)?;
    let eps = cfg.eps_floor.unwrap_or_else(|| ds.default_eps_floor());
    let policy = match (cfg.methods.contains(&Method::QLearning), qtable) {
        (false, _) => None,
        (true, None) => {
            return Err(Error::param("method `qlearning` needs a Q-table argument"));
        }
        (true, Some(path)) => {
            let q = load_qtable(path, &ss)?;
            q.check_dataset(&ds)?;
            Some(extract_policy(&q))
        }
    };
    let session = Session {
        cfg: &sys,
        cb: &cb,
        ds: &ds,
        ss: &ss,
        eps_floor: eps,
    };
    let table = evaluate_methods(cfg, &session, policy.as_ref(), exec)?;

    let report = EvalReport {
        csv: cfg.out.join("eval.csv"),
        svg: cfg.out.join("eval.svg"),
        table,
    };
    write_file(&report.csv, &report.table.to_csv())?;
    let title = format!(
        "Relative channel strength vs pilots, SNR = {} dB",
        cfg.snr_db
    );
    write_file(&report.svg, &svg::render(&report.table.chart(title)))?;
    Ok(report)
}

/// The evaluation sweep behind [`cmd_eval`], without any file output.
pub fn evaluate_methods(
    cfg: &ExperimentConfig,
    session: &Session,
    policy: Option<&Policy>,
    exec: Execution,
) -> Result<EvalTable> {
    let Session {
        cfg: sys, cb, ds, ..
    } = *session;
    if cfg.methods.contains(&Method::QLearning) && policy.is_none() {
        return Err(Error::param("method `qlearning` needs a policy"));
    }
    let budget = cfg.budget();
    let n = cfg.n_eval_channels;

    // rho[channel][method][k - 1]
    let per_channel = map_indexed(n, exec, |i| -> Result<Vec<Vec<f64>>> {
        let ch = if cfg.eval_in_dataset {
            *ds.channel(i % ds.len())
        } else {
            sample_channel(&mut rng::stream(cfg.seed ^ salt::EVAL_CHANNEL, i as u64))
        };
        let strengths = NarrowStrengths::new(sys, &ch, cb)?;
        cfg.methods
            .iter()
            .map(|&method| {
                let strategy = match method {
                    Method::Exhaustive => Strategy::Exhaustive,
                    Method::Hierarchical => Strategy::Hierarchical,
                    Method::Random => Strategy::Random,
                    Method::QLearning => Strategy::QLearning(policy.unwrap()),
                };
                let id = Method::ALL.iter().position(|&m| m == method).unwrap() as u64;
                let mut r = rng::stream(cfg.seed ^ salt::EVAL_EPISODE, (id << 32) | i as u64);
                let res = run_episode(session, &ch, strategy, budget, &mut r)?;
                Ok((1..=budget)
                    .map(|k| strengths.rho(res.declared_at(k)))
                    .collect())
            })
            .collect()
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut table = EvalTable::default();
    for (mi, &method) in cfg.methods.iter().enumerate() {
        for k in 1..=budget {
            let xs = per_channel.iter().map(|c| c[mi][k - 1]);
            let mean = xs.clone().sum::<f64>() / n as f64;
            let var = if n > 1 {
                xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
            } else {
                0.0
            };
            table.rows.push(EvalRow {
                method,
                k,
                mean_rho: mean,
                stderr: (var / n as f64).sqrt(),
                n,
            });
        }
    }
    Ok(table)
}

fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    const WHAT: &str = "CSV";
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::parse(WHAT, 1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect::<Vec<_>>();
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(WHAT, i + 2, e.to_string()))?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    if header.iter().all(|h| h.is_empty()) || rows.is_empty() {
        return Err(Error::parse(
            WHAT,
            1,
            format!("{} has no data rows", path.display()),
        ));
    }
    Ok((header, rows))
}

fn cell(rows: &[Vec<String>], i: usize, j: usize) -> Result<f64> {
    rows[i][j]
        .parse()
        .map_err(|_| Error::parse("CSV", i + 2, format!("`{}` is not a number", rows[i][j])))
}

/// Render eval or training-curve CSV files as one SVG chart, written to
/// `out` (default: the first CSV with an `.svg` extension).
pub fn cmd_plot(csvs: &[PathBuf], out: Option<&Path>) -> Result<PathBuf> {
    let first = csvs
        .first()
        .ok_or_else(|| Error::param("plot needs at least one CSV file"))?;
    let mut series: Vec<svg::Series> = Vec::new();
    let mut kind = None;
    for path in csvs {
        let (header, rows) = read_csv(path)?;
        let stem = path
            .file_stem()
            .unwrap_or_default()
            .to_string_lossy()
            .into_owned();
        let this = if header == EVAL_HEADER {
            for (i, row) in rows.iter().enumerate() {
                let label = if csvs.len() > 1 {
                    format!("{stem}: {}", row[0])
                } else {
                    row[0].clone()
                };
                let p = (cell(&rows, i, 1)?, cell(&rows, i, 2)?);
                match series.iter_mut().find(|s| s.label == label) {
                    Some(s) => s.points.push(p),
                    None => series.push(svg::Series {
                        label,
                        points: vec![p],
                    }),
                }
            }
            "eval"
        } else if header == CURVE_HEADER {
            let points = (0..rows.len())
                .map(|i| Ok((cell(&rows, i, 0)?, cell(&rows, i, 1)?)))
                .collect::<Result<Vec<_>>>()?;
            series.push(svg::Series {
                label: stem,
                points,
            });
            "curve"
        } else {
            return Err(Error::parse(
                "CSV",
                1,
                format!("unrecognized header `{}`", header.join(",")),
            ));
        };
        if kind.is_some_and(|k| k != this) {
            return Err(Error::Incompatible(
                "cannot mix eval and curve CSVs in one plot".into(),
            ));
        }
        kind = Some(this);
    }
    let chart = if kind == Some("eval") {
        svg::Chart {
            title: "Relative channel strength vs pilots".into(),
            x_label: "pilot budget k".into(),
            y_label: "mean relative channel strength".into(),
            series,
        }
    } else {
        svg::Chart {
            title: "Average episode length during training".into(),
            x_label: "epoch".into(),
            y_label: "mean episode length (pilots)".into(),
            series,
        }
    };
    let target = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| first.with_extension("svg"));
    write_file(&target, &svg::render(&chart))?;
    Ok(target)
}
