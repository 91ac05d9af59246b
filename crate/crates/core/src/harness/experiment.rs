//! Multi-seed campaign driver and CSV output.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, StrategyKind};
use super::synthetic::generate_synthetic;
use crate::correlation::{exclusive_pairs, CorrelationMatrices};
use crate::dataset::{MultiLabelDataset, SignMatrix};
use crate::ensemble::train_ensemble;
use crate::error::{Error, Result};
use crate::metrics::{corr_avg, mean_ir, micro_f1, MetricReport};
use crate::pool::PoolState;
use crate::rng::{self, stream};
use crate::strategy::{besra_style_query, crab_select, random_query};

/// Hard-to-learn and negatively conflicted instances in the unlabelled pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PoolTrends {
    pub hard: usize,
    pub conflict: usize,
}

/// Counts pseudo-label rows that are all negative, and rows that switch on
/// both labels of some exclusive pair.
pub fn track_pool_trends(pseudo: &SignMatrix, exclusive: &[(usize, usize)]) -> PoolTrends {
    let mut t = PoolTrends::default();
    for row in pseudo.iter_rows() {
        if row.iter().all(|&v| v < 0) {
            t.hard += 1;
        }
        if exclusive.iter().any(|&(m, n)| row[m] > 0 && row[n] > 0) {
            t.conflict += 1;
        }
    }
    t
}

/// Data a campaign runs on.
#[derive(Debug, Clone)]
pub struct CampaignData {
    pub pool: MultiLabelDataset,
    pub test: Option<MultiLabelDataset>,
}

impl CampaignData {
    pub fn load(config: &ExperimentConfig) -> Result<Self> {
        let pool = match (&config.data.train, &config.data.synthetic) {
            (Some(path), _) => MultiLabelDataset::load(path)?,
            (None, Some(spec)) => generate_synthetic(spec)?,
            (None, None) => return Err(Error::Config("no dataset configured".into())),
        };
        let test = config.data.test.as_ref().map(MultiLabelDataset::load).transpose()?;
        if let Some(t) = &test {
            if t.num_labels() != pool.num_labels() {
                return Err(Error::dim(pool.num_labels(), t.num_labels()));
            }
        }
        Ok(CampaignData { pool, test })
    }
}

/// One seed's rows, plus the error that stopped it early, if any.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub rows: Vec<MetricReport>,
    pub trends: Vec<PoolTrends>,
    /// `(iteration, A, NegA)` when correlation dumps were requested.
    pub correlation: Vec<(usize, String, String)>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct CampaignResults {
    pub strategy: StrategyKind,
    pub runs: Vec<SeedRun>,
}

impl CampaignResults {
    pub fn aborted(&self) -> impl Iterator<Item = &SeedRun> {
        self.runs.iter().filter(|r| r.error.is_some())
    }

    /// Mean of a column across seeds, one entry per iteration.
    pub fn mean_by_iteration(&self, column: impl Fn(&MetricReport) -> Option<f64>) -> Vec<f64> {
        aggregate(&self.runs, |r| column(r))
            .into_iter()
            .map(|(mean, _, _)| mean)
            .collect()
    }

    pub fn summary(&self) -> Vec<SummaryRow> {
        let f1 = aggregate(&self.runs, |r| Some(r.micro_f1));
        let ir = aggregate(&self.runs, |r| r.mean_ir_selected);
        let corr = aggregate(&self.runs, |r| Some(r.corr_avg));
        let size = aggregate(&self.runs, |r| Some(r.labeled_size as f64));
        (0..f1.len())
            .map(|t| SummaryRow {
                iteration: t,
                labeled_size: size[t].0,
                micro_f1_mean: f1[t].0,
                micro_f1_std: f1[t].1,
                mean_ir_selected_mean: ir[t].0,
                mean_ir_selected_std: ir[t].1,
                corr_avg_mean: corr[t].0,
                corr_avg_std: corr[t].1,
                seeds: f1[t].2,
            })
            .collect()
    }

    pub fn trend_summary(&self) -> Vec<TrendSummaryRow> {
        let iterations = self.runs.iter().map(|r| r.trends.len()).max().unwrap_or(0);
        (0..iterations)
            .map(|t| {
                let (hard, conflict): (Vec<f64>, Vec<f64>) = self
                    .runs
                    .iter()
                    .filter_map(|r| r.trends.get(t))
                    .map(|p| (p.hard as f64, p.conflict as f64))
                    .unzip();
                TrendSummaryRow {
                    iteration: t,
                    hard_mean: mean_std(&hard).0,
                    conflict_mean: mean_std(&conflict).0,
                }
            })
            .collect()
    }
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// `(mean, sample std, seeds present)` per iteration; missing values skipped.
fn aggregate(runs: &[SeedRun], column: impl Fn(&MetricReport) -> Option<f64>) -> Vec<(f64, f64, usize)> {
    let iterations = runs.iter().map(|r| r.rows.len()).max().unwrap_or(0);
    (0..iterations)
        .map(|t| {
            let present = runs.iter().filter(|r| r.rows.len() > t).count();
            let values: Vec<f64> = runs
                .iter()
                .filter_map(|r| r.rows.get(t))
                .filter_map(&column)
                .filter(|v| v.is_finite())
                .collect();
            let (m, s) = mean_std(&values);
            (m, s, present)
        })
        .collect()
}

/// Runs every seed of one strategy; seeds run in parallel under the
/// parallel execution mode.
pub fn run_campaign(
    data: &CampaignData,
    config: &ExperimentConfig,
    strategy: StrategyKind,
    seeds: &[u64],
    dump_correlation: bool,
) -> CampaignResults {
    let runs = config.run.execution.map(seeds, |&seed| {
        let mut run = SeedRun {
            seed,
            rows: Vec::new(),
            trends: Vec::new(),
            correlation: Vec::new(),
            error: None,
        };
        if let Err(e) = run_seed(data, config, strategy, seed, dump_correlation, &mut run) {
            log::error!("{strategy} seed {seed} aborted: {e}");
            run.error = Some(e.to_string());
        }
        run
    });
    CampaignResults { strategy, runs }
}

fn run_seed(
    data: &CampaignData,
    config: &ExperimentConfig,
    strategy: StrategyKind,
    seed: u64,
    dump_correlation: bool,
    out: &mut SeedRun,
) -> Result<()> {
    let pool = &data.pool;
    let validation = if data.test.is_some() { 0 } else { config.data.validation };
    let mut state = PoolState::split(pool.len(), config.data.initial_labeled, validation, seed)?;
    let (eval_features, eval_labels) = match &data.test {
        Some(t) => (t.all_features().iter().collect::<Vec<_>>(), t.labels().clone()),
        None => (
            pool.feature_rows(state.validation()),
            pool.label_matrix(state.validation()),
        ),
    };
    let mut matrices = CorrelationMatrices::build(&pool.label_matrix(state.labeled()));
    let acquisition = config.acquisition();
    let exec = config.run.execution;

    for t in 0..config.budget.iterations {
        state.iteration = t;
        let labeled = state.labeled().to_vec();
        let ensemble = train_ensemble(
            &pool.feature_rows(&labeled),
            &pool.label_matrix(&labeled),
            pool.feature_dim(),
            config.ensemble.size,
            &config.classifier,
            rng::derive_seed(seed, &[stream::ENSEMBLE, t as u64]),
            exec,
        )?;
        let f1 = micro_f1(&ensemble.pseudo_labels(&eval_features, exec), &eval_labels)?;
        let pseudo = ensemble.pseudo_labels(&pool.feature_rows(state.unlabeled()), exec);
        let exclusive = exclusive_pairs(matrices.negative(), config.correlation);
        let trends = track_pool_trends(&pseudo, &exclusive);

        let batch = match strategy {
            StrategyKind::Crab => crab_select(&state, pool, &ensemble, &matrices, &acquisition, seed)?.batch,
            StrategyKind::Besra => besra_style_query(&state, pool, &ensemble, &acquisition, seed)?,
            StrategyKind::Random => random_query(&state, config.budget.batch, seed),
        };
        let selected = pool.label_matrix(&batch);
        out.rows.push(MetricReport {
            seed,
            iteration: t,
            labeled_size: labeled.len(),
            micro_f1: f1,
            mean_ir_selected: if batch.is_empty() {
                None
            } else {
                mean_ir(&selected).value
            },
            corr_avg: corr_avg(matrices.positive()),
        });
        out.trends.push(trends);
        if dump_correlation {
            out.correlation
                .push((t, matrices.positive().to_csv(), matrices.negative().to_csv()));
        }
        state.annotate(&batch)?;
        matrices.update(&selected)?;
    }
    Ok(())
}

/// One line of `metrics.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub seed: u64,
    pub iteration: usize,
    pub labeled_size: usize,
    pub micro_f1: f64,
    pub mean_ir_selected: f64,
    pub corr_avg: f64,
}

impl From<&MetricReport> for MetricRow {
    fn from(r: &MetricReport) -> Self {
        MetricRow {
            seed: r.seed,
            iteration: r.iteration,
            labeled_size: r.labeled_size,
            micro_f1: r.micro_f1,
            mean_ir_selected: r.mean_ir_selected.unwrap_or(f64::NAN),
            corr_avg: r.corr_avg,
        }
    }
}

/// One line of `summary.csv`: mean and sample standard deviation across
/// seeds at one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub iteration: usize,
    pub labeled_size: f64,
    pub micro_f1_mean: f64,
    pub micro_f1_std: f64,
    pub mean_ir_selected_mean: f64,
    pub mean_ir_selected_std: f64,
    pub corr_avg_mean: f64,
    pub corr_avg_std: f64,
    pub seeds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub seed: u64,
    pub iteration: usize,
    pub hard: usize,
    pub conflict: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSummaryRow {
    pub iteration: usize,
    pub hard_mean: f64,
    pub conflict_mean: f64,
}

pub(crate) fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| csv_error(path, e))).collect()
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Data(format!("{}: {e}", path.display()))
}

/// Writes `metrics.csv`, `summary.csv` and `trends.csv` (plus correlation
/// dumps when present) under `dir`. Returns the directory.
pub fn write_results(results: &CampaignResults, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let rows = results.runs.iter().flat_map(|r| r.rows.iter().map(MetricRow::from));
    write_csv(&dir.join("metrics.csv"), rows)?;
    write_csv(&dir.join("summary.csv"), results.summary())?;
    let trends = results.runs.iter().flat_map(|r| {
        r.trends.iter().enumerate().map(|(t, p)| TrendRow {
            seed: r.seed,
            iteration: t,
            hard: p.hard,
            conflict: p.conflict,
        })
    });
    write_csv(&dir.join("trends.csv"), trends)?;
    for run in &results.runs {
        for (t, pos, neg) in &run.correlation {
            let corr = dir.join("correlation");
            fs::create_dir_all(&corr).map_err(|e| Error::io(&corr, e))?;
            for (name, body) in [("A", pos), ("NegA", neg)] {
                let p = corr.join(format!("seed{}_iter{t}_{name}.csv", run.seed));
                fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
            }
        }
    }
    Ok(dir.to_path_buf())
}

/// Loads the data, runs the configured strategy over every seed and writes
/// the results under `<out>/<strategy>/`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<CampaignResults> {
    config.validate()?;
    let data = CampaignData::load(config)?;
    log::info!(
        "pool: {} instances, {} labels, {} features",
        data.pool.len(),
        data.pool.num_labels(),
        data.pool.feature_dim()
    );
    let results = run_campaign(
        &data,
        config,
        config.run.strategy,
        &config.run.seeds,
        config.run.dump_correlation,
    );
    write_results(&results, &config.run.out.join(config.run.strategy.name()))?;
    Ok(results)
}
