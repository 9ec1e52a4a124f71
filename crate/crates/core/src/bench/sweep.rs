use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{expander_degree, gen_block_model, gen_instance, BlockModelSpec, MatrixKind, OverlapMode};
use crate::model::{ModelError, NormMode};
use crate::recovery::{ProjectorKind, Recoverer, RecoveryConfig, RecoveryError, Variant};
use crate::rng;
use crate::sensing::SensingError;

pub const CSV_HEADER: &str = "N,m,algorithm,matrix,trial,rel_error,iterations,seconds";

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Recovery(#[from] RecoveryError),
    #[error(transparent)]
    Sensing(#[from] SensingError),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n: usize,
    pub overlap: OverlapMode,
    pub g: usize,
    pub variants: Vec<Variant>,
    pub trials: usize,
    pub seed: u64,
    pub m_step: usize,
    /// Largest grid point; defaults to `N`.
    pub m_max: Option<usize>,
    /// Expander degree; defaults to `floor(2 ln N / ln(G l))`.
    pub d: Option<usize>,
    pub projector: ProjectorKind,
    pub alpha: f64,
    pub beta: f64,
    /// Overrides the per-variant norm.
    pub norm: Option<NormMode>,
    pub max_iterations: usize,
    pub success_threshold: f64,
    /// Record wall-clock seconds per trial (makes the CSV non-reproducible).
    pub timing: bool,
    pub workers: usize,
}

impl SweepConfig {
    pub fn new(n: usize, overlap: OverlapMode, g: usize) -> Self {
        SweepConfig {
            n,
            overlap,
            g,
            variants: Variant::ALL.to_vec(),
            trials: 20,
            seed: 0,
            m_step: 20,
            m_max: None,
            d: None,
            projector: ProjectorKind::Dp,
            alpha: 0.95,
            beta: 1.05,
            norm: None,
            max_iterations: 1000,
            success_threshold: 1e-5,
            timing: false,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }

    pub fn degree(&self) -> Result<usize, ModelError> {
        let spec = BlockModelSpec::new(self.n, self.overlap)?;
        Ok(self.d.unwrap_or_else(|| expander_degree(self.n, self.g, spec.block_len)))
    }

    fn recovery_config(&self, variant: Variant) -> RecoveryConfig {
        RecoveryConfig {
            max_iterations: self.max_iterations,
            alpha: self.alpha,
            beta: self.beta,
            norm: self.norm,
            projector: self.projector,
            ..RecoveryConfig::for_variant(variant)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRecord {
    pub n: usize,
    pub m: usize,
    pub algorithm: Variant,
    pub matrix: MatrixKind,
    pub trial: usize,
    pub rel_error: f64,
    pub iterations: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MSummary {
    pub algorithm: Variant,
    pub m: usize,
    pub errors: Vec<f64>,
    pub median_error: f64,
    pub recovered: usize,
    /// Over all trials.
    pub mean_iterations: f64,
    /// Over recovered trials only; `None` if nothing was recovered.
    pub mean_iterations_recovered: Option<f64>,
    pub mean_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub d: usize,
    pub records: Vec<CsvRecord>,
    pub summaries: Vec<MSummary>,
    /// Smallest grid `m` whose median error reached the threshold; `None` if not reached.
    pub m_sharp: Vec<(Variant, Option<usize>)>,
}

impl SweepReport {
    pub fn m_sharp_of(&self, v: Variant) -> Option<usize> {
        self.m_sharp.iter().find(|(a, _)| *a == v).and_then(|(_, m)| *m)
    }

    pub fn summary(&self, v: Variant, m: usize) -> Option<&MSummary> {
        self.summaries.iter().find(|s| s.algorithm == v && s.m == m)
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    crate::sensing::median(&mut v)
}

fn matrix_for(v: Variant) -> MatrixKind {
    if v.uses_expander() {
        MatrixKind::Expander
    } else {
        MatrixKind::Gaussian
    }
}

/// Runs `f(0..count)` on up to `workers` threads; results keep index order.
fn parallel_map<T: Send>(count: usize, workers: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let workers = workers.clamp(1, count.max(1));
    if workers == 1 {
        return (0..count).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..count).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= count {
                    break;
                }
                let out = f(i);
                slots.lock().expect("worker panicked")[i] = Some(out);
            });
        }
    });
    slots.into_inner().expect("worker panicked").into_iter().map(|v| v.expect("every slot filled")).collect()
}

/// Measurement sweep over `m = step, 2 step, ...` for each algorithm, stopping
/// at the first `m` whose median relative error reaches the threshold.
pub fn sweep(config: &SweepConfig) -> Result<SweepReport, SweepError> {
    let model = gen_block_model(config.n, config.overlap)?.with_budget(config.g)?;
    let d = config.degree()?;
    let m_max = config.m_max.unwrap_or(config.n);
    let mut records = Vec::new();
    let mut summaries = Vec::new();
    let mut m_sharp = Vec::new();
    for &variant in &config.variants {
        let vi = Variant::ALL.iter().position(|v| *v == variant).expect("known variant");
        let recoverer = Recoverer::new(&model, config.recovery_config(variant))?;
        let kind = matrix_for(variant);
        let mut reached = None;
        let mut m = config.m_step;
        while m <= m_max {
            let outcomes = parallel_map(config.trials, config.workers, |trial| -> Result<CsvRecord, SweepError> {
                let mut r = rng::stream(config.seed, &[config.n as u64, m as u64, vi as u64, trial as u64]);
                let inst = gen_instance(&model, config.g, m, kind, d.min(m), &mut r)?;
                let start = Instant::now();
                let result = recoverer.run(&inst.a, &inst.y, Some(&inst.x))?;
                let seconds = if config.timing { start.elapsed().as_secs_f64() } else { 0.0 };
                Ok(CsvRecord {
                    n: config.n,
                    m,
                    algorithm: variant,
                    matrix: kind,
                    trial,
                    rel_error: result.relative_error.expect("truth supplied"),
                    iterations: result.iterations,
                    seconds,
                })
            });
            let batch = outcomes.into_iter().collect::<Result<Vec<_>, _>>()?;
            let errors: Vec<f64> = batch.iter().map(|r| r.rel_error).collect();
            let ok: Vec<&CsvRecord> = batch.iter().filter(|r| r.rel_error <= config.success_threshold).collect();
            let trials = batch.len().max(1) as f64;
            let summary = MSummary {
                algorithm: variant,
                m,
                median_error: median(&errors),
                recovered: ok.len(),
                mean_iterations: batch.iter().map(|r| r.iterations as f64).sum::<f64>() / trials,
                mean_iterations_recovered: (!ok.is_empty())
                    .then(|| ok.iter().map(|r| r.iterations as f64).sum::<f64>() / ok.len() as f64),
                mean_seconds: batch.iter().map(|r| r.seconds).sum::<f64>() / trials,
                errors,
            };
            log::info!(
                "N={} {} m={}: median error {:.3e}, {}/{} recovered",
                config.n,
                variant,
                m,
                summary.median_error,
                summary.recovered,
                config.trials
            );
            let done = summary.median_error <= config.success_threshold;
            summaries.push(summary);
            records.extend(batch);
            if done {
                reached = Some(m);
                break;
            }
            m += config.m_step;
        }
        m_sharp.push((variant, reached));
    }
    Ok(SweepReport { config: config.clone(), d, records, summaries, m_sharp })
}

pub fn write_csv(reports: &[SweepReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports.iter().flat_map(|r| &r.records) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.n,
            r.m,
            r.algorithm.name(),
            r.matrix.name(),
            r.trial,
            r.rel_error,
            r.iterations,
            r.seconds
        );
    }
    out
}

pub fn write_json(reports: &[SweepReport]) -> Result<String, SweepError> {
    Ok(serde_json::to_string_pretty(reports)?)
}

fn series(points: &[(f64, f64)]) -> String {
    let mut s = String::new();
    for (x, y) in points {
        let _ = writeln!(s, "{x} {y}");
    }
    s
}

/// Two-column plot data files, keyed by file name.
///
/// Per report: median error against `m`. Across reports with a common `G`:
/// `m#`, mean iterations at `m#` and (with timing) mean seconds against `N`;
/// across reports with a common `N`, the same against `G`.
pub fn write_plot_data(reports: &[SweepReport]) -> Vec<(String, String)> {
    let mut files = Vec::new();
    for r in reports {
        let tag = format!("N{}_G{}_{}", r.config.n, r.config.g, r.config.overlap);
        for &(v, _) in &r.m_sharp {
            let pts: Vec<(f64, f64)> =
                r.summaries.iter().filter(|s| s.algorithm == v).map(|s| (s.m as f64, s.median_error)).collect();
            files.push((format!("error_vs_m_{}_{tag}.dat", v.name()), series(&pts)));
        }
    }
    let timing = reports.iter().all(|r| r.config.timing);
    type Axis = (&'static str, fn(&SweepReport) -> usize, fn(&SweepReport) -> String);
    let axes: [Axis; 2] = [
        ("N", |r| r.config.n, |r| format!("G{}_{}", r.config.g, r.config.overlap)),
        ("G", |r| r.config.g, |r| format!("N{}_{}", r.config.n, r.config.overlap)),
    ];
    for (axis, key, group) in &axes {
        let mut groups: Vec<String> = reports.iter().map(group).collect();
        groups.sort();
        groups.dedup();
        for gname in groups {
            let members: Vec<&SweepReport> = reports.iter().filter(|r| group(r) == gname).collect();
            if members.len() < 2 {
                continue;
            }
            for v in Variant::ALL {
                let mut msharp = Vec::new();
                let mut iters = Vec::new();
                let mut secs = Vec::new();
                for r in &members {
                    let Some(m) = r.m_sharp_of(v) else { continue };
                    let s = r.summary(v, m).expect("summary exists at m#");
                    let x = key(r) as f64;
                    msharp.push((x, m as f64));
                    iters.push((x, s.mean_iterations_recovered.unwrap_or(s.mean_iterations)));
                    secs.push((x, s.mean_seconds));
                }
                if msharp.is_empty() {
                    continue;
                }
                files.push((format!("msharp_vs_{axis}_{}_{gname}.dat", v.name()), series(&msharp)));
                files.push((format!("iterations_vs_{axis}_{}_{gname}.dat", v.name()), series(&iters)));
                if timing {
                    files.push((format!("seconds_vs_{axis}_{}_{gname}.dat", v.name()), series(&secs)));
                }
            }
        }
    }
    files
}

/// Gnuplot script drawing every error-vs-m series into one PNG per file.
pub fn gnuplot_script(files: &[(String, String)]) -> String {
    let mut s = String::from("set terminal pngcairo size 900,600\nset key left top\nset grid\n");
    for (name, _) in files {
        let stem = name.trim_end_matches(".dat");
        let (xl, yl, log) = if name.starts_with("error_vs_m") {
            ("m", "median relative error", true)
        } else if name.starts_with("msharp") {
            (if name.contains("_vs_G_") { "G" } else { "N" }, "m#", false)
        } else if name.starts_with("iterations") {
            (if name.contains("_vs_G_") { "G" } else { "N" }, "mean iterations", false)
        } else {
            (if name.contains("_vs_G_") { "G" } else { "N" }, "seconds", false)
        };
        let _ = writeln!(
            s,
            "set output '{stem}.png'\nset xlabel '{xl}'\nset ylabel '{yl}'\n{}plot '{name}' using 1:2 with linespoints title '{stem}'\n",
            if log { "set logscale y\n" } else { "unset logscale y\n" }
        );
    }
    s
}

fn write_file(path: &Path, contents: &str) -> Result<(), SweepError> {
    fs::write(path, contents).map_err(|source| SweepError::Io { path: path.to_path_buf(), source })
}

/// Writes `sweep.csv`, `plotdata/*.dat`, `plotdata/plots.gp` and, when
/// requested, `sweep.json` under `dir`. Returns the written paths.
pub fn write_outputs(reports: &[SweepReport], dir: &Path, json: bool) -> Result<Vec<PathBuf>, SweepError> {
    let plot_dir = dir.join("plotdata");
    fs::create_dir_all(&plot_dir).map_err(|source| SweepError::Io { path: plot_dir.clone(), source })?;
    let mut written = Vec::new();
    let csv = dir.join("sweep.csv");
    write_file(&csv, &write_csv(reports))?;
    written.push(csv);
    let files = write_plot_data(reports);
    for (name, contents) in &files {
        let p = plot_dir.join(name);
        write_file(&p, contents)?;
        written.push(p);
    }
    let gp = plot_dir.join("plots.gp");
    write_file(&gp, &gnuplot_script(&files))?;
    written.push(gp);
    if json {
        let p = dir.join("sweep.json");
        write_file(&p, &write_json(reports)?)?;
        written.push(p);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(variants: Vec<Variant>) -> SweepConfig {
        SweepConfig { variants, trials: 3, m_step: 40, seed: 9, ..SweepConfig::new(100, OverlapMode::Half, 2) }
    }

    #[test]
    fn sweep_stops_at_first_success() {
        let report = sweep(&tiny(vec![Variant::ModelIht])).unwrap();
        let m = report.m_sharp_of(Variant::ModelIht).expect("recovers by m = N");
        assert_eq!(report.summaries.last().unwrap().m, m);
        assert!(report.summaries.iter().take(report.summaries.len() - 1).all(|s| s.median_error > 1e-5));
        assert_eq!(report.records.len(), 3 * report.summaries.len());
        assert!(write_csv(std::slice::from_ref(&report)).starts_with(CSV_HEADER));
    }

    #[test]
    fn outputs_on_disk() {
        let mut a = sweep(&tiny(vec![Variant::Meiht])).unwrap();
        let b = sweep(&SweepConfig { n: 150, ..tiny(vec![Variant::Meiht]) }).unwrap();
        a.config.timing = true;
        let dir = tempfile::tempdir().unwrap();
        let paths = write_outputs(&[a, b], dir.path(), true).unwrap();
        let names: Vec<String> = paths.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
        assert!(names.contains(&"sweep.csv".to_string()));
        assert!(names.contains(&"sweep.json".to_string()));
        assert!(names.iter().any(|n| n.starts_with("msharp_vs_N_meiht")));
        for p in paths.iter().filter(|p| p.extension().is_some_and(|e| e == "dat")) {
            let text = fs::read_to_string(p).unwrap();
            assert!(text.lines().all(|l| l.split(' ').count() == 2));
        }
    }
}
