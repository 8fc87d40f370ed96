//! Unitary-compiling experiment: pair datasets pruned under the
//! infidelity metric, success measured as the fraction of held-out states
//! compiled below the trace-distance threshold.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::synthetic::default_true;
use super::{run_cells, trial_seed, RunResult, Selection, SizeSpec};
use crate::bounds::{qnn_coreset_bound, BoundInputs};
use crate::coreset::{coreset_error, covering_radius_core, greedy_k_center_states};
use crate::data::{gen_compiling_dataset, random_target_unitary, StatePairDataset};
use crate::error::{Error, Result};
use crate::qnn::{compile_loss, train_compiler, CompilerAnsatz, Entangler, TrainConfig};
use crate::qsim::trace_distance;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompileBenchConfig {
    /// Must be "qnn".
    pub model: String,
    pub n_qubits: usize,
    pub target_gates: usize,
    /// Training-pool size.
    pub n_pairs: usize,
    pub n_test_pairs: usize,
    pub ansatz_layers: usize,
    pub entangler: Entangler,
    pub trainer: TrainConfig,
    #[serde(default)]
    pub sizes: Option<Vec<usize>>,
    #[serde(default)]
    pub zetas: Option<Vec<f64>>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default = "default_true")]
    pub record_timings: bool,
}

impl CompileBenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.model != "qnn" {
            return Err(Error::invalid(format!(
                "compile task trains model \"qnn\", got \"{}\"",
                self.model
            )));
        }
        if self.trials < 1 || self.ansatz_layers < 1 || self.n_test_pairs < 1 {
            return Err(Error::invalid(
                "trials, ansatz_layers, and n_test_pairs must be at least 1",
            ));
        }
        SizeSpec::from_options(&self.sizes, &self.zetas)?;
        Ok(())
    }
}

pub fn run_compile(cfg: &CompileBenchConfig, jobs: usize) -> Result<Vec<RunResult>> {
    cfg.validate()?;
    let target = random_target_unitary(cfg.n_qubits, cfg.target_gates, cfg.seed)?;
    let pool = gen_compiling_dataset(&target, cfg.n_pairs, cfg.seed.wrapping_add(1))?;
    let test = gen_compiling_dataset(&target, cfg.n_test_pairs, cfg.seed.wrapping_add(2))?;
    let ansatz = CompilerAnsatz::hardware_efficient(cfg.n_qubits, cfg.ansatz_layers, cfg.entangler)?;
    let sizes = SizeSpec::from_options(&cfg.sizes, &cfg.zetas)?.resolve(pool.len())?;
    let pool_labels = vec![0usize; pool.len()];

    let dist = |i: usize, j: usize| {
        trace_distance(&pool.inputs[i], &pool.inputs[j]).expect("uniform dimensions")
    };

    let evaluate = |subset: &StatePairDataset,
                    weights: &[u64],
                    delta_c: f64,
                    size: usize,
                    seed: u64|
     -> Result<(f64, f64, f64, f64)> {
        let trainer = TrainConfig {
            seed,
            ..cfg.trainer.clone()
        };
        let started = Instant::now();
        let report = train_compiler(&ansatz, subset, Some(weights), Some(&test), &trainer)?;
        let train_ms = started.elapsed().as_secs_f64() * 1e3;
        let success = report.compile_success.expect("test set supplied");

        let full_losses: Vec<f64> = (0..pool.len())
            .map(|i| compile_loss(&ansatz, &report.params, &pool.inputs[i], &pool.targets[i]))
            .collect::<Result<_>>()?;
        let sub_losses: Vec<f64> = (0..subset.len())
            .map(|i| {
                compile_loss(
                    &ansatz,
                    &report.params,
                    &subset.inputs[i],
                    &subset.targets[i],
                )
            })
            .collect::<Result<_>>()?;
        let cerr = coreset_error(&full_losses, &sub_losses, weights, trainer.weight_mode)?;

        // State pairs carry no feature-space encoding; as with density
        // inputs the Lipschitz product drops out (max_w = 0).
        let inputs = BoundInputs {
            n_t: pool.len(),
            n_c_coreset: size,
            m: ansatz.n_params(),
            d: cfg.ansatz_layers,
            d_x: 2 << cfg.n_qubits,
            n_classes: 1,
            delta_c,
            lambda_eta: 1.0,
            loss_bound: 1.0,
            max_w: 0.0,
            norm_m: 1.0,
            max_y: 1.0,
            n_q: cfg.n_qubits,
            r: 1.0,
            w_norm: 0.0,
            delta: 0.05,
        };
        let bound = qnn_coreset_bound(&inputs)?;
        Ok((success, train_ms, cerr, bound.sum))
    };

    run_cells(&sizes, cfg.trials, jobs, |size, trial| {
        let seed = trial_seed(cfg.seed, trial);
        let mut out = Vec::with_capacity(2);

        let sel_started = Instant::now();
        let coreset = greedy_k_center_states(&pool.inputs, &pool_labels, 1, size, seed)?;
        let sel_ms = sel_started.elapsed().as_secs_f64() * 1e3;
        let subset = pool.subset(&coreset.center_indices)?;
        let (success, train_ms, cerr, bound_sum) =
            evaluate(&subset, &coreset.weights, coreset.radius, size, seed)?;
        out.push(RunResult {
            task: "compile".into(),
            selection: Selection::Coreset,
            size: coreset.len(),
            zeta: coreset.prune_rate,
            trial,
            seed,
            accuracy: success,
            sel_ms: if cfg.record_timings { sel_ms } else { 0.0 },
            kernel_ms: 0.0,
            train_ms: if cfg.record_timings { train_ms } else { 0.0 },
            coreset_error: cerr,
            bound_sum,
        });

        let sel_started = Instant::now();
        let idx = super::random_subset_indices(&pool_labels, 1, size, seed)?;
        let sel_ms = sel_started.elapsed().as_secs_f64() * 1e3;
        let radius = covering_radius_core(&pool_labels, &idx, 0, &dist)?;
        let subset = pool.subset(&idx)?;
        let unit = vec![1u64; idx.len()];
        let (success, train_ms, cerr, bound_sum) = evaluate(&subset, &unit, radius, size, seed)?;
        out.push(RunResult {
            task: "compile".into(),
            selection: Selection::Random,
            size,
            zeta: size as f64 / pool.len() as f64,
            trial,
            seed,
            accuracy: success,
            sel_ms: if cfg.record_timings { sel_ms } else { 0.0 },
            kernel_ms: 0.0,
            train_ms: if cfg.record_timings { train_ms } else { 0.0 },
            coreset_error: cerr,
            bound_sum,
        });
        Ok(out)
    })
}
