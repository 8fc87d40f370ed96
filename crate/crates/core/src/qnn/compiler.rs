//! Variational unitary compiling.
//!
//! The compiler trains a parameterized circuit V(theta) so that
//! V(theta)|psi_j> matches the target states U|psi_j> over a pair dataset.
//! The per-pair loss is the squared trace distance of pure states,
//! `1 - |<target|V|input>|^2`, which is itself an expectation value of the
//! projector onto the target state, so the parameter-shift rule applies
//! to every rotation angle.

use serde::{Deserialize, Serialize};

use super::train::{initial_params, run_sgd, GradientMode, SgdProblem, TrainConfig, TrainReport};
use super::Entangler;
use crate::data::StatePairDataset;
use crate::error::{Error, Result};
use crate::qsim::{trace_distance, Angle, GateKind, GateOp, StateVector};

/// A test pair counts as compiled when its trace distance is below this.
pub const COMPILE_SUCCESS_THRESHOLD: f64 = 1e-5;

/// A gate list with parameter slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompilerAnsatz {
    pub n_qubits: usize,
    pub gates: Vec<GateOp>,
    n_params: usize,
}

impl CompilerAnsatz {
    /// Validate a gate list: slots must sit on rotation gates only (the
    /// shift rule needs the half-angle convention).
    pub fn new(n_qubits: usize, gates: Vec<GateOp>) -> Result<Self> {
        let mut n_params = 0usize;
        for g in &gates {
            g.validate(n_qubits)?;
            if let Angle::Param(slot) = g.angle {
                if !matches!(g.kind, GateKind::RX | GateKind::RY | GateKind::RZ) {
                    return Err(Error::invalid(format!(
                        "parameter slot {slot} on {:?}: gradients need a rotation gate",
                        g.kind
                    )));
                }
                n_params = n_params.max(slot + 1);
            }
        }
        Ok(CompilerAnsatz {
            n_qubits,
            gates,
            n_params,
        })
    }

    /// Layered ansatz: per layer an RY and RZ rotation on every qubit
    /// followed by the entangler, closed by one more rotation block. Deep
    /// enough layerings are universal and overparameterization keeps the
    /// loss landscape benign.
    pub fn hardware_efficient(
        n_qubits: usize,
        layers: usize,
        entangler: Entangler,
    ) -> Result<Self> {
        if layers < 1 {
            return Err(Error::invalid("ansatz needs at least one layer"));
        }
        let mut gates = Vec::new();
        let mut slot = 0usize;
        let mut rotation_block = |gates: &mut Vec<GateOp>| {
            for q in 0..n_qubits {
                gates.push(GateOp::rotation_param(GateKind::RY, q, slot).expect("rotation"));
                slot += 1;
                gates.push(GateOp::rotation_param(GateKind::RZ, q, slot).expect("rotation"));
                slot += 1;
            }
        };
        for _ in 0..layers {
            rotation_block(&mut gates);
            for (c, t) in entangler.pairs(n_qubits) {
                gates.push(GateOp::cnot(c, t));
            }
        }
        rotation_block(&mut gates);
        CompilerAnsatz::new(n_qubits, gates)
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    /// V(theta)|input>, optionally shifting one gate occurrence.
    fn apply_shifted(
        &self,
        params: &[f64],
        input: &StateVector,
        shift: Option<(usize, f64)>,
    ) -> Result<StateVector> {
        if params.len() < self.n_params {
            return Err(Error::DimMismatch {
                expected: self.n_params,
                got: params.len(),
            });
        }
        let mut state = input.clone();
        for (pos, g) in self.gates.iter().enumerate() {
            match g.angle {
                Angle::Param(slot) => {
                    let mut angle = params[slot];
                    if let Some((s_pos, delta)) = shift {
                        if s_pos == pos {
                            angle += delta;
                        }
                    }
                    state.apply_rotation(g.kind, g.targets[0], angle)?;
                }
                _ => state.apply_gate_mut(g)?,
            }
        }
        Ok(state)
    }

    pub fn apply(&self, params: &[f64], input: &StateVector) -> Result<StateVector> {
        self.apply_shifted(params, input, None)
    }
}

/// Squared trace distance of the compiled state to the target.
pub fn compile_loss(
    ansatz: &CompilerAnsatz,
    params: &[f64],
    input: &StateVector,
    target: &StateVector,
) -> Result<f64> {
    let out = ansatz.apply(params, input)?;
    let overlap = crate::qsim::overlap_sq(target, &out)?;
    Ok((1.0 - overlap).max(0.0))
}

/// d loss / d theta by parameter shift, summed over the occurrences of
/// each slot.
pub fn compile_grad(
    ansatz: &CompilerAnsatz,
    params: &[f64],
    input: &StateVector,
    target: &StateVector,
) -> Result<Vec<f64>> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut grad = vec![0.0f64; ansatz.n_params()];
    for (pos, g) in ansatz.gates.iter().enumerate() {
        if let Angle::Param(slot) = g.angle {
            let plus = ansatz.apply_shifted(params, input, Some((pos, half_pi)))?;
            let minus = ansatz.apply_shifted(params, input, Some((pos, -half_pi)))?;
            let op = crate::qsim::overlap_sq(target, &plus)?;
            let om = crate::qsim::overlap_sq(target, &minus)?;
            // loss = 1 - overlap.
            grad[slot] -= 0.5 * (op - om);
        }
    }
    Ok(grad)
}

/// Fraction of pairs whose compiled output is within the trace-distance
/// threshold of the target.
pub fn compile_success_fraction(
    ansatz: &CompilerAnsatz,
    params: &[f64],
    pairs: &StatePairDataset,
    threshold: f64,
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::invalid("empty pair set"));
    }
    let mut hits = 0usize;
    for (input, target) in pairs.inputs.iter().zip(pairs.targets.iter()) {
        let out = ansatz.apply(params, input)?;
        if trace_distance(target, &out)? < threshold {
            hits += 1;
        }
    }
    Ok(hits as f64 / pairs.len() as f64)
}

struct CompileProblem<'a> {
    ansatz: &'a CompilerAnsatz,
    pairs: &'a StatePairDataset,
}

impl SgdProblem for CompileProblem<'_> {
    fn n_samples(&self) -> usize {
        self.pairs.len()
    }

    fn loss(&self, params: &[f64], idx: usize) -> Result<f64> {
        compile_loss(
            self.ansatz,
            params,
            &self.pairs.inputs[idx],
            &self.pairs.targets[idx],
        )
    }

    fn loss_grad(&self, params: &[f64], idx: usize, mode: GradientMode) -> Result<Vec<f64>> {
        match mode {
            GradientMode::ParameterShift => compile_grad(
                self.ansatz,
                params,
                &self.pairs.inputs[idx],
                &self.pairs.targets[idx],
            ),
            GradientMode::FiniteDifference => {
                let h = 1e-5;
                let mut grad = Vec::with_capacity(params.len());
                for k in 0..params.len() {
                    let mut plus = params.to_vec();
                    plus[k] += h;
                    let mut minus = params.to_vec();
                    minus[k] -= h;
                    let fp = self.loss(&plus, idx)?;
                    let fm = self.loss(&minus, idx)?;
                    grad.push((fp - fm) / (2.0 * h));
                }
                Ok(grad)
            }
        }
    }
}

/// Train the compiler on weighted pairs; when `test` is given the report
/// carries the held-out success fraction under the 1e-5 criterion.
pub fn train_compiler(
    ansatz: &CompilerAnsatz,
    train: &StatePairDataset,
    weights: Option<&[u64]>,
    test: Option<&StatePairDataset>,
    tcfg: &TrainConfig,
) -> Result<TrainReport> {
    if train.n_qubits != ansatz.n_qubits {
        return Err(Error::DimMismatch {
            expected: ansatz.n_qubits,
            got: train.n_qubits,
        });
    }
    let unit;
    let weights = match weights {
        Some(w) => w,
        None => {
            unit = vec![1u64; train.len()];
            &unit
        }
    };
    let init = initial_params(ansatz.n_params(), tcfg.init, tcfg.seed);
    let problem = CompileProblem {
        ansatz,
        pairs: train,
    };
    let mut report = run_sgd(&problem, init, weights, tcfg)?;
    if let Some(test_pairs) = test {
        report.compile_success = Some(compile_success_fraction(
            ansatz,
            &report.params,
            test_pairs,
            COMPILE_SUCCESS_THRESHOLD,
        )?);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_compiling_dataset, TargetUnitary};
    use crate::qnn::InitMode;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_target_zero_init_is_no_op() {
        // Single RZ layer at zero compiles the identity exactly.
        let ansatz = CompilerAnsatz::new(
            1,
            vec![GateOp::rotation_param(GateKind::RZ, 0, 0).unwrap()],
        )
        .unwrap();
        let target = TargetUnitary::identity(1);
        let pairs = gen_compiling_dataset(&target, 6, 1).unwrap();
        let tcfg = TrainConfig {
            learning_rate: 0.1,
            max_epochs: 5,
            seed: 0,
            init: InitMode::Zeros,
            ..Default::default()
        };
        let report = train_compiler(&ansatz, &pairs, None, Some(&pairs), &tcfg).unwrap();
        assert!(report.loss_trace[0] < 1e-12);
        assert_eq!(report.compile_success, Some(1.0));
    }

    #[test]
    fn single_ry_landscape() {
        // Target RY(0.7), ansatz RY(theta), input |0>: loss is exactly
        // sin^2((theta - 0.7)/2).
        let ansatz = CompilerAnsatz::new(
            1,
            vec![GateOp::rotation_param(GateKind::RY, 0, 0).unwrap()],
        )
        .unwrap();
        let target_state = {
            let mut s = StateVector::zero(1).unwrap();
            s.apply_ry(0, 0.7).unwrap();
            s
        };
        let input = StateVector::zero(1).unwrap();
        for theta in [-1.0, 0.0, 0.7, 1.5, 3.0] {
            let loss = compile_loss(&ansatz, &[theta], &input, &target_state).unwrap();
            let expect = ((theta - 0.7) / 2.0).sin().powi(2);
            assert!((loss - expect).abs() < 1e-12, "theta {theta}");
        }
        // Gradient matches the closed form d/dtheta sin^2((t-0.7)/2).
        let g = compile_grad(&ansatz, &[1.5], &input, &target_state).unwrap();
        let expect = 0.5 * (1.5f64 - 0.7).sin();
        assert!((g[0] - expect).abs() < 1e-10);
    }

    #[test]
    fn loss_trace_stays_in_unit_interval() {
        let target = crate::data::random_target_unitary(2, 10, 3).unwrap();
        let pairs = gen_compiling_dataset(&target, 8, 4).unwrap();
        let ansatz = CompilerAnsatz::hardware_efficient(2, 3, Entangler::Line).unwrap();
        let tcfg = TrainConfig {
            learning_rate: 0.3,
            max_epochs: 10,
            seed: 11,
            ..Default::default()
        };
        let report = train_compiler(&ansatz, &pairs, None, None, &tcfg).unwrap();
        for l in &report.loss_trace {
            assert!(*l >= 0.0 && *l <= 1.0, "loss {l} outside [0,1]");
        }
    }

    #[test]
    fn grad_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ansatz = CompilerAnsatz::hardware_efficient(2, 2, Entangler::Line).unwrap();
        let input = StateVector::haar_random(2, &mut rng).unwrap();
        let target = StateVector::haar_random(2, &mut rng).unwrap();
        let params: Vec<f64> = (0..ansatz.n_params())
            .map(|_| rand::Rng::random_range(&mut rng, -1.5..1.5))
            .collect();
        let analytic = compile_grad(&ansatz, &params, &input, &target).unwrap();
        let h = 1e-5;
        for k in 0..params.len() {
            let mut plus = params.clone();
            plus[k] += h;
            let mut minus = params.clone();
            minus[k] -= h;
            let fd = (compile_loss(&ansatz, &plus, &input, &target).unwrap()
                - compile_loss(&ansatz, &minus, &input, &target).unwrap())
                / (2.0 * h);
            assert!((analytic[k] - fd).abs() < 1e-6, "slot {k}");
        }
    }

    #[test]
    fn param_slot_on_non_rotation_rejected() {
        let mut zz = GateOp::zz(0, 1, 0.0);
        zz.angle = Angle::Param(0);
        assert!(CompilerAnsatz::new(2, vec![zz]).is_err());
    }

    #[test]
    fn small_compile_converges() {
        // 1-qubit random target with a 2-layer ansatz compiles quickly.
        let target = crate::data::random_target_unitary(1, 6, 9).unwrap();
        let train = gen_compiling_dataset(&target, 10, 2).unwrap();
        let test = gen_compiling_dataset(&target, 10, 3).unwrap();
        let ansatz = CompilerAnsatz::hardware_efficient(1, 2, Entangler::Line).unwrap();
        let tcfg = TrainConfig {
            learning_rate: 0.5,
            max_epochs: 300,
            seed: 4,
            ..Default::default()
        };
        let report = train_compiler(&ansatz, &train, None, Some(&test), &tcfg).unwrap();
        assert!(
            report.compile_success.unwrap() > 0.9,
            "success {:?}, final loss {:?}",
            report.compile_success,
            report.final_risk()
        );
    }
}
