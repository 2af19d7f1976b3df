use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ActivationFamily, ActivationKind, NeuralNetwork};
use crate::error::{Error, Result};
use crate::model::AdaptationRecord;

/// One training example.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
}

impl Sample {
    pub fn new(inputs: Vec<f64>, targets: Vec<f64>) -> Self {
        Sample { inputs, targets }
    }
}

/// Learning settings bound into a model as its adaptation function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnSettings {
    pub learning_rate: f64,
    /// Seeds the per-epoch sample order.
    pub seed: u64,
}

impl LearnSettings {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.learning_rate.is_finite() && self.learning_rate > 0.0 {
            Ok(())
        } else {
            Err(Error::Validation(format!(
                "learning rate {} must be positive",
                self.learning_rate
            )))
        }
    }
}

/// Stopping rule and settings for [`learn`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnConfig {
    /// Maximum number of epochs.
    pub g: usize,
    /// Stop once the mean loss over the dataset is at most `l`.
    pub l: f64,
    pub learning_rate: f64,
    pub seed: u64,
}

/// Gradient of the per-sample loss, laid out like
/// [`NeuralNetwork::parameters`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    /// `weights[j][p]` is the derivative for `w_{incoming[j][p], j}`.
    pub weights: Vec<Vec<f64>>,
    /// Derivative for each unit's bias (zero for input units).
    pub bias: Vec<f64>,
}

impl Gradient {
    pub fn to_vec(&self, net: &NeuralNetwork) -> Vec<f64> {
        let mut out: Vec<f64> = self.weights.iter().flatten().copied().collect();
        out.extend(net.trainable_units().map(|j| self.bias[j]));
        out
    }
}

/// Mean squared error over the outputs of one sample.
fn sample_loss(outputs: &[f64], targets: &[f64]) -> f64 {
    let n = outputs.len() as f64;
    outputs
        .iter()
        .zip(targets)
        .map(|(y, t)| (y - t) * (y - t))
        .sum::<f64>()
        / n
}

/// Mean over the dataset of the per-sample mean squared error.
pub fn dataset_loss(net: &NeuralNetwork, dataset: &[Sample]) -> Result<f64> {
    let mut total = 0.0;
    for sample in dataset {
        let out = super::forward(net, &sample.inputs)?;
        total += sample_loss(&out, &sample.targets);
    }
    Ok(total / dataset.len() as f64)
}

/// Loss of one sample and its gradient by backpropagation, for layered
/// logistic networks.
pub fn gradient(net: &NeuralNetwork, inputs: &[f64], targets: &[f64]) -> Result<(f64, Gradient)> {
    if net.family() != ActivationFamily::Logistic {
        return Err(Error::Capability("gradients need logistic units".into()));
    }
    let layers = net.require_layers()?;
    let outputs = net.output_units();
    if targets.len() != outputs.len() {
        return Err(Error::Dimension {
            expected: outputs.len(),
            found: targets.len(),
        });
    }
    let a = net.activations(inputs)?;
    let b = a.len();
    let n_out = outputs.len() as f64;
    // upstream[j] accumulates dL/da_j; delta[j] = dL/dbeta_j
    let mut upstream = vec![0.0; b];
    for (&j, t) in outputs.iter().zip(targets) {
        upstream[j] = 2.0 * (a[j] - t) / n_out;
    }
    let mut delta = vec![0.0; b];
    let mut grad = Gradient {
        weights: net.update.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
        bias: vec![0.0; b],
    };
    for layer in layers[1..].iter().rev() {
        for &j in layer {
            delta[j] = upstream[j] * a[j] * (1.0 - a[j]);
            grad.bias[j] = delta[j];
            for (p, &i) in net.incoming[j].iter().enumerate() {
                grad.weights[j][p] = delta[j] * a[i];
                upstream[i] += net.update.weights[j][p] * delta[j];
            }
        }
    }
    let out: Vec<f64> = outputs.iter().map(|&j| a[j]).collect();
    Ok((sample_loss(&out, targets), grad))
}

/// Adapts the weights of a layered network to a dataset.
///
/// Threshold networks without hidden layers use the perceptron rule, with
/// thresholds adapted like negated bias weights. Logistic networks use
/// stochastic gradient descent with backpropagation on the mean squared
/// error. Every epoch visits the samples in an order shuffled by a generator
/// seeded from `cfg.seed`. Learning stops once the dataset loss is at most
/// `cfg.l` or after `cfg.g` epochs. The log holds the loss before training
/// (iteration 0) and after every epoch.
pub fn learn(
    net: &NeuralNetwork,
    dataset: &[Sample],
    cfg: &LearnConfig,
) -> Result<(NeuralNetwork, Vec<AdaptationRecord>)> {
    if dataset.is_empty() {
        return Err(Error::Precondition("dataset must not be empty".into()));
    }
    if cfg.g < 1 {
        return Err(Error::Precondition("g must be at least 1".into()));
    }
    if !(cfg.l.is_finite() && cfg.l >= 0.0) {
        return Err(Error::Precondition(format!("loss tolerance {} must be >= 0", cfg.l)));
    }
    LearnSettings {
        learning_rate: cfg.learning_rate,
        seed: cfg.seed,
    }
    .validate()
    .map_err(|_| Error::Precondition("learning rate must be positive".into()))?;
    let layers = net.require_layers()?;
    if net.family() == ActivationFamily::Threshold && layers.len() > 2 {
        return Err(Error::Capability(
            "threshold networks with hidden layers cannot be trained".into(),
        ));
    }
    let (n_in, n_out) = (layers[0].len(), net.output_units().len());
    for sample in dataset {
        if sample.inputs.len() != n_in {
            return Err(Error::Dimension {
                expected: n_in,
                found: sample.inputs.len(),
            });
        }
        if sample.targets.len() != n_out {
            return Err(Error::Dimension {
                expected: n_out,
                found: sample.targets.len(),
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut current = net.clone();
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut log = Vec::new();
    let initial = dataset_loss(&current, dataset)?;
    log.push(AdaptationRecord {
        iteration: 0,
        loss: initial,
        accepted: true,
        table: None,
    });
    if initial <= cfg.l {
        return Ok((current, log));
    }
    for epoch in 1..=cfg.g {
        order.shuffle(&mut rng);
        for &s in &order {
            let sample = &dataset[s];
            match current.family() {
                ActivationFamily::Threshold => perceptron_step(&mut current, sample, cfg.learning_rate)?,
                ActivationFamily::Logistic => sgd_step(&mut current, sample, cfg.learning_rate)?,
            }
        }
        let loss = dataset_loss(&current, dataset)?;
        log.push(AdaptationRecord {
            iteration: epoch,
            loss,
            accepted: true,
            table: None,
        });
        if loss <= cfg.l {
            break;
        }
    }
    Ok((current, log))
}

fn perceptron_step(net: &mut NeuralNetwork, sample: &Sample, rate: f64) -> Result<()> {
    let a = net.activations(&sample.inputs)?;
    let outputs = net.output_units().to_vec();
    for (&j, &t) in outputs.iter().zip(&sample.targets) {
        let err = t - a[j];
        if err == 0.0 {
            continue;
        }
        for (p, &i) in net.incoming[j].iter().enumerate() {
            net.update.weights[j][p] += rate * err * a[i];
        }
        if let ActivationKind::Threshold { theta } = &mut net.update.activation {
            theta[j] -= rate * err;
        }
    }
    Ok(())
}

fn sgd_step(net: &mut NeuralNetwork, sample: &Sample, rate: f64) -> Result<()> {
    let (_, grad) = gradient(net, &sample.inputs, &sample.targets)?;
    for (w, g) in net
        .update
        .weights
        .iter_mut()
        .flatten()
        .zip(grad.weights.iter().flatten())
    {
        *w -= rate * g;
    }
    if let ActivationKind::Logistic { bias } = &mut net.update.activation {
        for (b, g) in bias.iter_mut().zip(&grad.bias) {
            *b -= rate * g;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ann::{forward, ActivationFamily};

    fn gate(f: impl Fn(bool, bool) -> bool) -> Vec<Sample> {
        [(0, 0), (0, 1), (1, 0), (1, 1)]
            .iter()
            .map(|&(a, b)| {
                Sample::new(
                    vec![f64::from(a), f64::from(b)],
                    vec![f64::from(u8::from(f(a == 1, b == 1)))],
                )
            })
            .collect()
    }

    #[test]
    fn perceptron_learns_and() {
        let net = NeuralNetwork::layered(&[2, 1], ActivationFamily::Threshold, 0).unwrap();
        let data = gate(|a, b| a && b);
        let cfg = LearnConfig { g: 100, l: 0.0, learning_rate: 0.1, seed: 0 };
        let (trained, log) = learn(&net, &data, &cfg).unwrap();
        for s in &data {
            assert_eq!(forward(&trained, &s.inputs).unwrap(), s.targets);
        }
        assert_eq!(log.last().unwrap().loss, 0.0);
        assert!(log.len() <= 101);
    }

    #[test]
    fn learning_is_deterministic() {
        let net = NeuralNetwork::layered(&[2, 2, 1], ActivationFamily::Logistic, 4).unwrap();
        let data = gate(|a, b| a != b);
        let cfg = LearnConfig { g: 50, l: 0.0, learning_rate: 0.5, seed: 4 };
        assert_eq!(learn(&net, &data, &cfg).unwrap(), learn(&net, &data, &cfg).unwrap());
    }

    #[test]
    fn preconditions() {
        let net = NeuralNetwork::layered(&[2, 1], ActivationFamily::Threshold, 0).unwrap();
        let cfg = LearnConfig { g: 10, l: 0.0, learning_rate: 0.1, seed: 0 };
        assert!(matches!(learn(&net, &[], &cfg), Err(Error::Precondition(_))));
        let bad_rate = LearnConfig { learning_rate: 0.0, ..cfg };
        assert!(learn(&net, &gate(|a, _| a), &bad_rate).is_err());
        let deep = NeuralNetwork::layered(&[2, 2, 1], ActivationFamily::Threshold, 0).unwrap();
        assert!(matches!(learn(&deep, &gate(|a, _| a), &cfg), Err(Error::Capability(_))));
        let wrong = vec![Sample::new(vec![1.0], vec![1.0])];
        assert!(matches!(learn(&net, &wrong, &cfg), Err(Error::Dimension { .. })));
    }

    #[test]
    fn logistic_loss_decreases() {
        let net = NeuralNetwork::layered(&[2, 3, 1], ActivationFamily::Logistic, 2).unwrap();
        let data = gate(|a, b| a || b);
        let cfg = LearnConfig { g: 500, l: 0.0, learning_rate: 0.5, seed: 2 };
        let (_, log) = learn(&net, &data, &cfg).unwrap();
        assert!(log.last().unwrap().loss < log[0].loss / 2.0);
    }
}
