//! Artificial neural networks `(B, V, R, alpha . beta, xi)` and their
//! embedding into the system metamodel.
//!
//! Two topologies are supported. Layered networks are feed-forward: inputs
//! have no incoming links and every other unit only reads earlier layers.
//! They support [`forward`] and [`learn`]. Lattice networks have no layers;
//! every unit may read any other unit and carry a self weight, and they are
//! evaluated only as metamodel update functions. A threshold lattice on a
//! ring is how a cellular automaton's neighborhood structure is mirrored by
//! a network.

mod learn;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::milieu::{Link, Milieus};
use crate::model::{
    AdaptationFunction, ConcreteParameters, OperationKind, Regime, StructureKind, SystemModel,
    UpdateFunction,
};
use crate::state::{Entities, StateSet};

pub use learn::{dataset_loss, gradient, learn, Gradient, LearnConfig, LearnSettings, Sample};

/// Exponent clamp for the logistic function.
const LOGISTIC_CLAMP: f64 = 500.0;

/// A scalar activation function `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    /// `1` if `x >= theta`, else `0`.
    Threshold(f64),
    /// `1 / (1 + exp(-x))`.
    Logistic,
}

pub fn activation(x: f64, kind: Activation) -> f64 {
    match kind {
        Activation::Threshold(theta) => {
            if x >= theta {
                1.0
            } else {
                0.0
            }
        }
        Activation::Logistic => {
            let x = x.clamp(-LOGISTIC_CLAMP, LOGISTIC_CLAMP);
            1.0 / (1.0 + libm::exp(-x))
        }
    }
}

/// Activation family of a whole network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActivationFamily {
    Threshold,
    Logistic,
}

/// Per-unit activation parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ActivationKind {
    /// Threshold `theta_j` per unit; values are `{0, 1}`.
    Threshold { theta: Vec<f64> },
    /// Logistic units with a bias weight on an always-one virtual input;
    /// values lie in `[0, 1]`.
    Logistic { bias: Vec<f64> },
}

impl ActivationKind {
    pub fn family(&self) -> ActivationFamily {
        match self {
            ActivationKind::Threshold { .. } => ActivationFamily::Threshold,
            ActivationKind::Logistic { .. } => ActivationFamily::Logistic,
        }
    }

    /// The per-unit parameters (`theta` or bias).
    pub fn params(&self) -> &[f64] {
        match self {
            ActivationKind::Threshold { theta } => theta,
            ActivationKind::Logistic { bias } => bias,
        }
    }

    pub(crate) fn params_mut(&mut self) -> &mut [f64] {
        match self {
            ActivationKind::Threshold { theta } => theta,
            ActivationKind::Logistic { bias } => bias,
        }
    }
}

/// The update function of a network: weights and activation of every unit.
///
/// `weights[j][p]` is the weight of the link from unit `incoming[j][p]` into
/// unit `j`. Units with no incoming links are inputs and keep their value.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuralUpdate {
    pub weights: Vec<Vec<f64>>,
    /// Weight of a unit's own previous value; zero in layered networks.
    pub self_weights: Vec<f64>,
    pub activation: ActivationKind,
    /// Feed-forward layers of 0-based unit indices, input layer first.
    /// `None` for lattice networks.
    pub layers: Option<Vec<Vec<usize>>>,
}

impl NeuralUpdate {
    pub fn units(&self) -> usize {
        self.weights.len()
    }

    /// `alpha` for unit `j`.
    pub fn unit_activation(&self, j: usize) -> Activation {
        match &self.activation {
            ActivationKind::Threshold { theta } => Activation::Threshold(theta[j]),
            ActivationKind::Logistic { .. } => Activation::Logistic,
        }
    }

    /// `beta_j`: weighted sum of the incoming values plus the self term and,
    /// for logistic units, the bias.
    pub fn input_sum(&self, j: usize, own: f64, inputs: &[f64]) -> f64 {
        let mut sum = self.self_weights[j] * own;
        for (w, a) in self.weights[j].iter().zip(inputs) {
            sum += w * a;
        }
        if let ActivationKind::Logistic { bias } = &self.activation {
            sum += bias[j];
        }
        sum
    }

    /// `alpha . beta_j`; units without incoming links are fixed points.
    pub fn apply(&self, j: usize, own: f64, inputs: &[f64]) -> Result<f64> {
        if j >= self.units() {
            return Err(Error::Range(format!("unit {} of {}", j + 1, self.units())));
        }
        if inputs.len() != self.weights[j].len() {
            return Err(Error::Dimension {
                expected: self.weights[j].len(),
                found: inputs.len(),
            });
        }
        if inputs.is_empty() {
            return Ok(own);
        }
        Ok(activation(self.input_sum(j, own, inputs), self.unit_activation(j)))
    }

    pub(crate) fn validate(&self, milieus: &Milieus, values: &StateSet) -> Result<()> {
        let b = milieus.len();
        if self.weights.len() != b
            || self.self_weights.len() != b
            || self.activation.params().len() != b
        {
            return Err(Error::Validation(format!(
                "network parameters do not cover all {b} units"
            )));
        }
        for (j, (milieu, w)) in milieus.iter().zip(&self.weights).enumerate() {
            if milieu.len() != w.len() {
                return Err(Error::Validation(format!(
                    "unit {} has {} incoming links but {} weights",
                    j + 1,
                    milieu.len(),
                    w.len()
                )));
            }
            if milieu.contains(&Link::Boundary) {
                return Err(Error::Validation("networks have no boundary links".into()));
            }
            if milieu.is_empty() && self.self_weights[j] != 0.0 {
                return Err(Error::Validation(format!(
                    "input unit {} must not carry a self weight",
                    j + 1
                )));
            }
        }
        let all_finite = self.weights.iter().flatten().all(|w| w.is_finite())
            && self.self_weights.iter().all(|w| w.is_finite())
            && self.activation.params().iter().all(|w| w.is_finite());
        if !all_finite {
            return Err(Error::Validation("weights must be finite".into()));
        }
        match (&self.activation, values) {
            (ActivationKind::Threshold { .. }, v) if v.same_extension(&StateSet::binary()) => {}
            (ActivationKind::Logistic { .. }, StateSet::Interval { lo, hi })
                if *lo <= 0.0 && *hi >= 1.0 => {}
            _ => {
                return Err(Error::Validation(
                    "threshold units need V = {0, 1}, logistic units an interval covering [0, 1]"
                        .into(),
                ))
            }
        }
        if let Some(layers) = &self.layers {
            validate_layers(layers, milieus, &self.self_weights)?;
        }
        Ok(())
    }
}

fn validate_layers(layers: &[Vec<usize>], milieus: &Milieus, self_weights: &[f64]) -> Result<()> {
    let b = milieus.len();
    if layers.len() < 2 || layers.iter().any(Vec::is_empty) {
        return Err(Error::Validation(
            "a layered network needs an input and an output layer, none empty".into(),
        ));
    }
    let mut layer_of = vec![usize::MAX; b];
    for (depth, layer) in layers.iter().enumerate() {
        for &j in layer {
            if j >= b || layer_of[j] != usize::MAX {
                return Err(Error::Validation(format!(
                    "layers must partition units 1..={b}"
                )));
            }
            layer_of[j] = depth;
        }
    }
    if layer_of.contains(&usize::MAX) {
        return Err(Error::Validation(format!("layers must partition units 1..={b}")));
    }
    for (j, milieu) in milieus.iter().enumerate() {
        let depth = layer_of[j];
        if (depth == 0) != milieu.is_empty() {
            return Err(Error::Validation(format!(
                "unit {}: exactly the input layer has no incoming links",
                j + 1
            )));
        }
        if self_weights[j] != 0.0 {
            return Err(Error::Validation(format!(
                "unit {}: layered networks carry no self weights",
                j + 1
            )));
        }
        for link in milieu {
            if let Link::Entity(i) = link {
                if layer_of[*i] >= depth {
                    return Err(Error::Validation(format!(
                        "unit {} reads unit {} from a later or equal layer",
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
    }
    Ok(())
}

/// A neural network: unit activations `B`, value set `V`, incoming links
/// `R` and the weighted activation of every unit.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuralNetwork {
    units: Vec<f64>,
    value_set: StateSet,
    incoming: Vec<Vec<usize>>,
    update: NeuralUpdate,
}

impl NeuralNetwork {
    /// `incoming` and `update.layers` use 0-based unit indices.
    pub fn new(
        units: Vec<f64>,
        value_set: StateSet,
        incoming: Vec<Vec<usize>>,
        update: NeuralUpdate,
    ) -> Result<Self> {
        let entities = Entities::new(units)?;
        entities.check_membership(&value_set)?;
        let milieus = Milieus::from_indices(incoming.clone());
        milieus.validate(entities.e())?;
        update.validate(&milieus, &value_set)?;
        Ok(NeuralNetwork {
            units: entities.into_vec(),
            value_set,
            incoming,
            update,
        })
    }

    /// A fully connected feed-forward network with `sizes[0]` inputs.
    /// Weights, thresholds and biases are drawn uniformly from
    /// `[-0.5, 0.5]` with a generator seeded by `seed`; units start at 0.
    pub fn layered(sizes: &[usize], family: ActivationFamily, seed: u64) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::Validation(
                "need at least two non-empty layers".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b: usize = sizes.iter().sum();
        let mut layers = Vec::with_capacity(sizes.len());
        let mut next = 0;
        for &size in sizes {
            layers.push((next..next + size).collect::<Vec<_>>());
            next += size;
        }
        let mut incoming = vec![Vec::new(); b];
        let mut weights = vec![Vec::new(); b];
        for pair in layers.windows(2) {
            for &j in &pair[1] {
                incoming[j] = pair[0].clone();
                weights[j] = pair[0].iter().map(|_| rng.gen_range(-0.5..=0.5)).collect();
            }
        }
        let unit_params: Vec<f64> = (0..b)
            .map(|j| {
                if incoming[j].is_empty() {
                    0.0
                } else {
                    rng.gen_range(-0.5..=0.5)
                }
            })
            .collect();
        let (value_set, activation) = match family {
            ActivationFamily::Threshold => (
                StateSet::binary(),
                ActivationKind::Threshold { theta: unit_params },
            ),
            ActivationFamily::Logistic => (
                StateSet::unit_interval(),
                ActivationKind::Logistic { bias: unit_params },
            ),
        };
        NeuralNetwork::new(
            vec![0.0; b],
            value_set,
            incoming,
            NeuralUpdate {
                weights,
                self_weights: vec![0.0; b],
                activation,
                layers: Some(layers),
            },
        )
    }

    /// One threshold unit reading `weights.len()` binary inputs.
    pub fn perceptron(weights: Vec<f64>, theta: f64) -> Result<Self> {
        let n = weights.len();
        let mut incoming = vec![Vec::new(); n];
        incoming.push((0..n).collect());
        let mut all_weights = vec![Vec::new(); n];
        all_weights.push(weights);
        let mut thetas = vec![0.0; n];
        thetas.push(theta);
        NeuralNetwork::new(
            vec![0.0; n + 1],
            StateSet::binary(),
            incoming,
            NeuralUpdate {
                weights: all_weights,
                self_weights: vec![0.0; n + 1],
                activation: ActivationKind::Threshold { theta: thetas },
                layers: Some(vec![(0..n).collect(), vec![n]]),
            },
        )
    }

    /// A lattice of threshold units: unit `j` reads itself with
    /// `self_weight` and `incoming[j][p]` with `neighbor_weights[p]`.
    pub fn threshold_lattice(
        units: Vec<f64>,
        incoming: Vec<Vec<usize>>,
        self_weight: f64,
        neighbor_weights: &[f64],
        theta: f64,
    ) -> Result<Self> {
        let b = units.len();
        if let Some(j) = incoming.iter().position(|l| l.len() != neighbor_weights.len()) {
            return Err(Error::Validation(format!(
                "unit {} has {} incoming links, {} neighbor weights given",
                j + 1,
                incoming[j].len(),
                neighbor_weights.len()
            )));
        }
        NeuralNetwork::new(
            units,
            StateSet::binary(),
            incoming,
            NeuralUpdate {
                weights: vec![neighbor_weights.to_vec(); b],
                self_weights: vec![self_weight; b],
                activation: ActivationKind::Threshold {
                    theta: vec![theta; b],
                },
                layers: None,
            },
        )
    }

    /// Unit activations `B`.
    pub fn units(&self) -> &[f64] {
        &self.units
    }

    pub fn value_set(&self) -> &StateSet {
        &self.value_set
    }

    /// Incoming links `R`, 0-based.
    pub fn incoming(&self) -> &[Vec<usize>] {
        &self.incoming
    }

    pub fn update(&self) -> &NeuralUpdate {
        &self.update
    }

    pub fn layers(&self) -> Option<&[Vec<usize>]> {
        self.update.layers.as_deref()
    }

    pub fn family(&self) -> ActivationFamily {
        self.update.activation.family()
    }

    /// Weight `w_{i,j}` of the link from unit `i` into unit `j` (0-based).
    /// `w_{j,j}` is the self weight.
    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        if i == j {
            return self.update.self_weights.get(j).copied();
        }
        let p = self.incoming.get(j)?.iter().position(|&x| x == i)?;
        Some(self.update.weights[j][p])
    }

    /// Number of evaluation steps after the input layer: layers minus one,
    /// or one for lattices.
    pub fn depth(&self) -> usize {
        self.layers().map_or(1, |l| l.len() - 1)
    }

    pub fn input_units(&self) -> &[usize] {
        self.layers().map_or(&[], |l| &l[0])
    }

    pub fn output_units(&self) -> &[usize] {
        self.layers().map_or(&[], |l| &l[l.len() - 1])
    }

    /// The same network with different unit activations.
    pub fn with_units(&self, units: Vec<f64>) -> Result<Self> {
        if units.len() != self.units.len() {
            return Err(Error::Dimension {
                expected: self.units.len(),
                found: units.len(),
            });
        }
        Entities::new(units.clone())?.check_membership(&self.value_set)?;
        Ok(NeuralNetwork {
            units,
            ..self.clone()
        })
    }

    /// The network with input units set to `inputs` (in input-layer order)
    /// and every other unit at its current value.
    pub fn with_inputs(&self, inputs: &[f64]) -> Result<Self> {
        let mut units = self.units.clone();
        self.place_inputs(&mut units, inputs)?;
        self.with_units(units)
    }

    fn place_inputs(&self, units: &mut [f64], inputs: &[f64]) -> Result<()> {
        let layer = self.require_layers()?.first().expect("validated");
        if inputs.len() != layer.len() {
            return Err(Error::Dimension {
                expected: layer.len(),
                found: inputs.len(),
            });
        }
        for (&j, &x) in layer.iter().zip(inputs) {
            units[j] = x;
        }
        Ok(())
    }

    fn require_layers(&self) -> Result<&[Vec<usize>]> {
        self.layers()
            .ok_or_else(|| Error::Capability("operation needs a layered network".into()))
    }

    /// All trainable parameters: link weights unit by unit, then the
    /// per-unit thresholds or biases of non-input units.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.update.weights.iter().flatten().copied().collect();
        out.extend(self.trainable_units().map(|j| self.update.activation.params()[j]));
        out
    }

    /// Replaces the parameters in the order of [`Self::parameters`].
    pub fn with_parameters(&self, params: &[f64]) -> Result<Self> {
        let expected = self.parameters().len();
        if params.len() != expected {
            return Err(Error::Dimension {
                expected,
                found: params.len(),
            });
        }
        let mut next = self.clone();
        let mut values = params.iter().copied();
        for w in next.update.weights.iter_mut().flatten() {
            *w = values.next().expect("length checked");
        }
        let units: Vec<usize> = self.trainable_units().collect();
        let unit_params = next.update.activation.params_mut();
        for j in units {
            unit_params[j] = values.next().expect("length checked");
        }
        next.update.validate(&Milieus::from_indices(next.incoming.clone()), &next.value_set)?;
        Ok(next)
    }

    fn trainable_units(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.units.len()).filter(|&j| !self.incoming[j].is_empty())
    }

    /// Activations of all units after a feed-forward pass.
    pub(crate) fn activations(&self, inputs: &[f64]) -> Result<Vec<f64>> {
        let layers = self.require_layers()?;
        let mut a = self.units.clone();
        self.place_inputs(&mut a, inputs)?;
        let mut gathered = Vec::new();
        for layer in &layers[1..] {
            for &j in layer {
                gathered.clear();
                gathered.extend(self.incoming[j].iter().map(|&i| a[i]));
                a[j] = self.update.apply(j, a[j], &gathered)?;
            }
        }
        Ok(a)
    }
}

/// `beta_j` for unit `j` (0-based) over the network's current activations.
pub fn input_function(j: usize, net: &NeuralNetwork) -> Result<f64> {
    let incoming = net
        .incoming
        .get(j)
        .ok_or_else(|| Error::Range(format!("unit {} of {}", j + 1, net.units.len())))?;
    if incoming.is_empty() {
        return Err(Error::Domain(format!(
            "unit {} has no incoming links",
            j + 1
        )));
    }
    let inputs: Vec<f64> = incoming.iter().map(|&i| net.units[i]).collect();
    Ok(net.update.input_sum(j, net.units[j], &inputs))
}

/// Feed-forward evaluation of a layered network. Returns the output layer.
pub fn forward(net: &NeuralNetwork, inputs: &[f64]) -> Result<Vec<f64>> {
    let a = net.activations(inputs)?;
    Ok(net.output_units().iter().map(|&j| a[j]).collect())
}

/// Default adaptation settings bound by [`ann_to_system_model`].
pub const DEFAULT_LEARN_SETTINGS: LearnSettings = LearnSettings {
    learning_rate: 0.5,
    seed: 0,
};

/// Builds the metastable system model of a network: entities are the units,
/// `Q = V`, milieus are the incoming links, the update function is the
/// weighted activation and the adaptation function is learning. Update and
/// adaptation rules stay implicit. `t` is set to the settling depth.
pub fn ann_to_system_model(net: &NeuralNetwork) -> SystemModel {
    ann_to_system_model_with(net, DEFAULT_LEARN_SETTINGS, 1000, 0.0)
}

pub fn ann_to_system_model_with(
    net: &NeuralNetwork,
    settings: LearnSettings,
    g: usize,
    l: f64,
) -> SystemModel {
    let mut params = ConcreteParameters::new(
        Entities::new(net.units.clone()).expect("validated units"),
        net.value_set.clone(),
        Milieus::from_indices(net.incoming.clone()),
        UpdateFunction::Neural(net.update.clone()),
    );
    params.adaptation_fn = Some(AdaptationFunction::Learn(settings));
    params.t = net.depth();
    params.g = g.max(1);
    params.l = l;
    SystemModel::metastable(
        vec![
            StructureKind::Entities,
            StructureKind::States,
            StructureKind::Milieus,
        ],
        vec![OperationKind::UpdateFn, OperationKind::AdaptationFn],
        params,
    )
    .expect("a valid network yields valid parameters")
}

/// Recovers a network from a neural system model (at its initial state).
pub fn system_model_to_ann(model: &SystemModel) -> Result<NeuralNetwork> {
    if model.regime() == Regime::Virtual {
        return Err(Error::Regime {
            expected: "metastable or actual",
            found: model.regime(),
        });
    }
    let p = model.params();
    let UpdateFunction::Neural(update) = &p.update_fn else {
        return Err(Error::Capability(format!(
            "update function {} is not neural",
            p.update_fn.id()
        )));
    };
    let incoming = p
        .milieus
        .to_indices()
        .ok_or_else(|| Error::Validation("networks have no boundary links".into()))?;
    NeuralNetwork::new(
        p.entities.as_slice().to_vec(),
        p.state_set.clone(),
        incoming,
        update.clone(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::actualize;
    use proptest::prelude::*;

    #[test]
    fn input_function_examples() {
        let net = NeuralNetwork::perceptron(vec![1.0, 1.0, 1.0], 2.0)
            .unwrap()
            .with_inputs(&[1.0, 1.0, 0.0])
            .unwrap();
        assert_eq!(input_function(3, &net).unwrap(), 2.0);
        let net = NeuralNetwork::perceptron(vec![0.5, -0.5], 0.0)
            .unwrap()
            .with_inputs(&[1.0, 1.0])
            .unwrap();
        assert_eq!(input_function(2, &net).unwrap(), 0.0);
        assert!(matches!(input_function(0, &net), Err(Error::Domain(_))));
    }

    #[test]
    fn hidden_unit_without_inputs_is_malformed() {
        let update = NeuralUpdate {
            weights: vec![vec![], vec![], vec![1.0]],
            self_weights: vec![0.0; 3],
            activation: ActivationKind::Threshold { theta: vec![0.0; 3] },
            layers: Some(vec![vec![0], vec![1], vec![2]]),
        };
        let net = NeuralNetwork::new(
            vec![0.0; 3],
            StateSet::binary(),
            vec![vec![], vec![], vec![1]],
            update,
        );
        assert!(matches!(net, Err(Error::Validation(_))));
    }

    #[test]
    fn activation_examples() {
        assert_eq!(activation(0.0, Activation::Logistic), 0.5);
        assert_eq!(activation(2.0, Activation::Threshold(2.0)), 1.0);
        assert_eq!(activation(1.999, Activation::Threshold(2.0)), 0.0);
        assert_eq!(activation(1e6, Activation::Logistic), 1.0);
        let tiny = activation(-1e6, Activation::Logistic);
        assert!(tiny.is_finite() && (0.0..1e-200).contains(&tiny));
    }

    #[test]
    fn forward_examples() {
        let net = NeuralNetwork::perceptron(vec![1.0, 1.0, 1.0], 2.0).unwrap();
        assert_eq!(forward(&net, &[1.0, 1.0, 0.0]).unwrap(), vec![1.0]);
        assert_eq!(forward(&net, &[1.0, 0.0, 0.0]).unwrap(), vec![0.0]);
        assert!(matches!(forward(&net, &[1.0]), Err(Error::Dimension { .. })));

        let net = NeuralNetwork::layered(&[3, 4, 2], ActivationFamily::Logistic, 1).unwrap();
        let zeroed = net.with_parameters(&vec![0.0; net.parameters().len()]).unwrap();
        assert_eq!(forward(&zeroed, &[0.3, -2.0, 7.0]).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn layered_construction_is_seeded() {
        let a = NeuralNetwork::layered(&[2, 2, 1], ActivationFamily::Logistic, 7).unwrap();
        let b = NeuralNetwork::layered(&[2, 2, 1], ActivationFamily::Logistic, 7).unwrap();
        let c = NeuralNetwork::layered(&[2, 2, 1], ActivationFamily::Logistic, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.parameters().len(), 4 + 2 + 3);
        assert!(a.parameters().iter().all(|w| (-0.5..=0.5).contains(w)));
        assert_eq!(a.weight(0, 2), Some(a.update().weights[2][0]));
        assert_eq!(a.weight(2, 0), None);
    }

    #[test]
    fn majority_unit_model() {
        let net = NeuralNetwork::perceptron(vec![1.0, 1.0, 1.0], 2.0)
            .unwrap()
            .with_inputs(&[1.0, 1.0, 0.0])
            .unwrap();
        let model = ann_to_system_model(&net);
        let run = actualize(&model, 1).unwrap();
        assert_eq!(run.current_entities().unwrap().as_slice(), &[1.0, 1.0, 0.0, 1.0]);
        assert_eq!(system_model_to_ann(&model).unwrap(), net);
    }

    #[test]
    fn deep_model_settles_in_depth_steps() {
        let net = NeuralNetwork::layered(&[2, 3, 2], ActivationFamily::Logistic, 3).unwrap();
        let inputs = [0.25, 0.75];
        let model = ann_to_system_model(&net.with_inputs(&inputs).unwrap());
        let run = actualize(&model, net.depth()).unwrap();
        let out = forward(&net, &inputs).unwrap();
        let state = run.current_entities().unwrap();
        for (q, &j) in net.output_units().iter().enumerate() {
            assert!((state[j] - out[q]).abs() <= 1e-12);
        }
    }

    #[test]
    fn lattice_rejects_forward() {
        let net = NeuralNetwork::threshold_lattice(
            vec![0.0, 1.0, 0.0],
            vec![vec![2, 1], vec![0, 2], vec![1, 0]],
            1.0,
            &[1.0, 1.0],
            2.0,
        )
        .unwrap();
        assert!(matches!(forward(&net, &[1.0]), Err(Error::Capability(_))));
        assert_eq!(net.weight(1, 1), Some(1.0));
    }

    #[test]
    fn feedback_links_rejected_in_layered_nets() {
        let update = NeuralUpdate {
            weights: vec![vec![], vec![1.0, 1.0]],
            self_weights: vec![0.0; 2],
            activation: ActivationKind::Logistic { bias: vec![0.0; 2] },
            layers: Some(vec![vec![0], vec![1]]),
        };
        let bad = NeuralNetwork::new(
            vec![0.0; 2],
            StateSet::unit_interval(),
            vec![vec![], vec![0, 1]],
            update,
        );
        assert!(bad.is_err());
    }

    proptest! {
        #[test]
        fn logistic_is_monotone_and_symmetric(x in -50.0f64..50.0, d in 1e-6f64..10.0) {
            let a = activation(x, Activation::Logistic);
            prop_assert!(activation(x + d, Activation::Logistic) >= a);
            prop_assert!((a + activation(-x, Activation::Logistic) - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn threshold_scale_invariance(
            w in proptest::collection::vec(-2.0f64..2.0, 3),
            theta in -2.0f64..2.0,
            scale in 0.01f64..100.0,
            bits in proptest::collection::vec(0u8..2, 3),
        ) {
            let inputs: Vec<f64> = bits.iter().map(|&b| f64::from(b)).collect();
            let base = NeuralNetwork::perceptron(w.clone(), theta).unwrap();
            let scaled = NeuralNetwork::perceptron(w.iter().map(|x| x * scale).collect(), theta * scale).unwrap();
            // exact scaling by powers of two avoids rounding at the boundary
            let pow2 = NeuralNetwork::perceptron(w.iter().map(|x| x * 4.0).collect(), theta * 4.0).unwrap();
            prop_assert_eq!(forward(&base, &inputs).unwrap(), forward(&pow2, &inputs).unwrap());
            let beta: f64 = w.iter().zip(&inputs).map(|(a, b)| a * b).sum();
            if (beta - theta).abs() > 1e-9 {
                prop_assert_eq!(forward(&base, &inputs).unwrap(), forward(&scaled, &inputs).unwrap());
            }
        }
    }
}
