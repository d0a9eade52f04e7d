//! Experiment configuration, Monte Carlo orchestration and reports.

mod config;
mod report;
mod scaling;
mod verify;

pub use config::{ComplexSpec, ExperimentConfig, Tolerances, MAX_N_ALPHA2D, MAX_N_MST, MAX_N_RIPS};
pub use report::{RunReport, Status, Verdict};
pub use scaling::{
    run_dimension, run_scaling, run_trial, run_trials, scaling_verdicts, trial_barcode, window,
    write_trials_csv, ScalingRun, TrialRecord, SCAN_ALPHAS, WINDOW_B0, WINDOW_D0, WINDOW_MIN_EVENTS, WINDOW_N0,
};
pub use verify::{barcodes_close, random_probes, run_verify, Fault, VerifyOptions};
