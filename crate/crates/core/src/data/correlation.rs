//! The two-qubit correlation-identification task: a (p, theta) state
//! family with closed-form labels for its non-classical correlation class.

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::DensityMatrix;

/// Correlation class of rho(p, theta).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrelationClass {
    Separable,
    Entangled,
    OneWaySteerable,
    NonLocal,
}

impl CorrelationClass {
    pub fn index(self) -> usize {
        match self {
            CorrelationClass::Separable => 0,
            CorrelationClass::Entangled => 1,
            CorrelationClass::OneWaySteerable => 2,
            CorrelationClass::NonLocal => 3,
        }
    }

    pub fn from_index(i: usize) -> Result<Self> {
        Ok(match i {
            0 => CorrelationClass::Separable,
            1 => CorrelationClass::Entangled,
            2 => CorrelationClass::OneWaySteerable,
            3 => CorrelationClass::NonLocal,
            other => return Err(Error::invalid(format!("no correlation class {other}"))),
        })
    }

    pub const COUNT: usize = 4;
}

/// One generated state with its parameters and label.
#[derive(Debug, Clone)]
pub struct CorrelationSample {
    pub p: f64,
    pub theta: f64,
    pub rho: DensityMatrix,
    pub label: CorrelationClass,
}

/// Closed-form correlation label.
///
/// Separable below p = 1/3; non-local above 1/sqrt(1 + sin^2(2 theta));
/// one-way steerable strictly above 1/sqrt(2) up to that threshold;
/// entangled otherwise. Regions are tested in that order so the label is
/// monotone in p for fixed theta.
pub fn correlation_label(p: f64, theta: f64) -> Result<CorrelationClass> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("p = {p} outside (0, 1)")));
    }
    if !(theta > 0.0 && theta < std::f64::consts::TAU) {
        return Err(Error::invalid(format!("theta = {theta} outside the open interval (0, 2*pi)")));
    }
    let s2 = (2.0 * theta).sin();
    let nonlocal_threshold = 1.0 / (1.0 + s2 * s2).sqrt();
    Ok(if p < 1.0 / 3.0 {
        CorrelationClass::Separable
    } else if p > nonlocal_threshold {
        CorrelationClass::NonLocal
    } else if p > std::f64::consts::FRAC_1_SQRT_2 {
        CorrelationClass::OneWaySteerable
    } else {
        CorrelationClass::Entangled
    })
}

/// rho(p, theta) = p |psi><psi| + (1-p) I/2 (x) tr_A |psi><psi| with
/// |psi> = cos(theta)|00> + sin(theta)|11>.
pub fn correlation_state(p: f64, theta: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("p = {p} outside [0, 1]")));
    }
    let c = theta.cos();
    let s = theta.sin();
    let c2 = c * c;
    let s2 = s * s;
    let cs = c * s;

    let mut m = Array2::<Complex64>::zeros((4, 4));
    // Pure part: |psi><psi| supported on |00> and |11>.
    m[[0, 0]] = Complex64::new(p * c2, 0.0);
    m[[0, 3]] = Complex64::new(p * cs, 0.0);
    m[[3, 0]] = Complex64::new(p * cs, 0.0);
    m[[3, 3]] = Complex64::new(p * s2, 0.0);
    // Mixed part: I/2 on qubit A tensored with diag(cos^2, sin^2) on B.
    let w = 0.5 * (1.0 - p);
    m[[0, 0]] += Complex64::new(w * c2, 0.0);
    m[[1, 1]] += Complex64::new(w * s2, 0.0);
    m[[2, 2]] += Complex64::new(w * c2, 0.0);
    m[[3, 3]] += Complex64::new(w * s2, 0.0);

    DensityMatrix::new(m)
}

/// Draw n samples with p, theta uniform over the open parameter box.
pub fn gen_correlation_dataset(n: usize, seed: u64) -> Result<Vec<CorrelationSample>> {
    if n == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut p: f64 = rng.random();
        while p == 0.0 {
            p = rng.random();
        }
        let mut theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        while theta == 0.0 {
            theta = rng.random_range(0.0..std::f64::consts::TAU);
        }
        let rho = correlation_state(p, theta)?;
        let label = correlation_label(p, theta)?;
        out.push(CorrelationSample {
            p,
            theta,
            rho,
            label,
        });
    }
    Ok(out)
}

// JSON form of a correlation dataset: density matrices as interleaved
// row-major [re, im, ...] arrays.
#[derive(Serialize, Deserialize)]
struct CorrelationSampleRepr {
    p: f64,
    theta: f64,
    label: CorrelationClass,
    rho: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CorrelationFile {
    n: usize,
    seed: u64,
    samples: Vec<CorrelationSampleRepr>,
}

pub fn save_correlation_json(
    samples: &[CorrelationSample],
    seed: u64,
    path: impl AsRef<std::path::Path>,
) -> Result<()> {
    let file = CorrelationFile {
        n: samples.len(),
        seed,
        samples: samples
            .iter()
            .map(|s| CorrelationSampleRepr {
                p: s.p,
                theta: s.theta,
                label: s.label,
                rho: s.rho.to_interleaved(),
            })
            .collect(),
    };
    let out = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(out), &file)?;
    Ok(())
}

pub fn load_correlation_json(path: impl AsRef<std::path::Path>) -> Result<Vec<CorrelationSample>> {
    let file = std::fs::File::open(path)?;
    let parsed: CorrelationFile = serde_json::from_reader(std::io::BufReader::new(file))?;
    parsed
        .samples
        .into_iter()
        .map(|s| {
            Ok(CorrelationSample {
                p: s.p,
                theta: s.theta,
                label: s.label,
                rho: DensityMatrix::from_interleaved(4, &s.rho)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, PI};

    #[test]
    fn separable_region() {
        assert_eq!(
            correlation_label(0.2, 1.0).unwrap(),
            CorrelationClass::Separable
        );
    }

    #[test]
    fn nonlocal_above_threshold() {
        // At theta = pi/4 the threshold is 1/sqrt(2) ~ 0.7071 < 0.9.
        assert_eq!(
            correlation_label(0.9, FRAC_PI_4).unwrap(),
            CorrelationClass::NonLocal
        );
    }

    #[test]
    fn entangled_between_thresholds() {
        assert_eq!(
            correlation_label(0.5, 1.0).unwrap(),
            CorrelationClass::Entangled
        );
    }

    #[test]
    fn one_way_steerable_band() {
        // theta = 0.3: sin(0.6) ~ 0.5646, threshold ~ 0.8708.
        let theta = 0.3;
        assert_eq!(
            correlation_label(0.8, theta).unwrap(),
            CorrelationClass::OneWaySteerable
        );
    }

    #[test]
    fn label_monotone_in_p() {
        for &theta in &[0.2, 1.0, FRAC_PI_4, 2.5, 4.0, 5.9] {
            let mut last = 0usize;
            for i in 1..400 {
                let p = i as f64 / 400.0;
                let idx = correlation_label(p, theta).unwrap().index();
                assert!(
                    idx >= last,
                    "label order violated at p={p}, theta={theta}: {idx} < {last}"
                );
                last = idx;
            }
        }
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(correlation_label(0.0, 1.0).is_err());
        assert!(correlation_label(1.0, 1.0).is_err());
        assert!(correlation_label(0.5, 0.0).is_err());
        assert!(correlation_label(0.5, std::f64::consts::TAU).is_err());
    }

    #[test]
    fn pure_limit_is_bell_projector() {
        let rho = correlation_state(1.0, FRAC_PI_4).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        // Equal to the Bell projector: entries 1/2 on the corners.
        let e = rho.entries();
        assert!((e[[0, 0]].re - 0.5).abs() < 1e-12);
        assert!((e[[0, 3]].re - 0.5).abs() < 1e-12);
        assert!((e[[3, 3]].re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mixed_limit_is_product_of_mixed_and_marginal() {
        let rho = correlation_state(0.0, FRAC_PI_3).unwrap();
        let c2 = FRAC_PI_3.cos().powi(2);
        let s2 = FRAC_PI_3.sin().powi(2);
        let e = rho.entries();
        let want = [0.5 * c2, 0.5 * s2, 0.5 * c2, 0.5 * s2];
        for (i, w) in want.iter().enumerate() {
            assert!((e[[i, i]].re - w).abs() < 1e-12);
        }
        assert!(e[[0, 3]].norm() < 1e-15);
    }

    #[test]
    fn generated_states_satisfy_density_axioms() {
        let samples = gen_correlation_dataset(50, 3).unwrap();
        for s in &samples {
            // Hermiticity and trace are enforced by the constructor; check
            // positivity explicitly.
            let min = s.rho.min_eigenvalue().unwrap();
            assert!(min > -1e-12, "negative eigenvalue {min}");
        }
    }

    #[test]
    fn generation_deterministic() {
        let a = gen_correlation_dataset(10, 9).unwrap();
        let b = gen_correlation_dataset(10, 9).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.p, y.p);
            assert_eq!(x.theta, y.theta);
            assert_eq!(x.label, y.label);
        }
    }

    #[test]
    fn all_four_classes_appear_in_large_sample() {
        let samples = gen_correlation_dataset(2000, 1).unwrap();
        let mut seen = [false; 4];
        for s in &samples {
            seen[s.label.index()] = true;
        }
        assert!(seen.iter().all(|&x| x), "classes seen: {seen:?}");
    }

    #[test]
    fn theta_beyond_pi_labels_fine() {
        // sin(2 theta) < 0 there; the threshold uses its square.
        let label = correlation_label(0.95, 0.75 * PI).unwrap();
        assert_eq!(label, CorrelationClass::NonLocal);
    }
}
