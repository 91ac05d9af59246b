//! Experiment harness: synthetic data, configuration, the multi-seed
//! campaign driver, CSV output and plots.

pub mod config;
pub mod experiment;
pub mod plot;
pub mod synthetic;

pub use config::{DataSection, EnsembleSection, ExperimentConfig, RunSection, StrategyKind};
pub use experiment::{
    run_campaign, run_experiment, track_pool_trends, write_results, CampaignData, CampaignResults, MetricRow,
    PoolTrends, SeedRun, SummaryRow, TrendRow, TrendSummaryRow,
};
pub use plot::{emit_plots, load_results_dir, StrategySeries};
pub use synthetic::{generate_base, generate_synthetic, subsample_to_mean_ir, SyntheticSpec};
