//! Checks the metamodel against independently written evolvers.

use metamodel_core::ann::{
    ann_to_system_model, dataset_loss, forward, gradient, learn, ActivationFamily, ActivationKind,
    LearnConfig, NeuralNetwork, Sample,
};
use metamodel_core::ca::{ca_to_system_model, Boundary, CellularAutomaton};
use metamodel_core::actualize;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Direct elementary evolution on a periodic ring, straight from the bits of
/// the rule number.
fn evolve_elementary(rule: u8, cells: &[u8], steps: usize) -> Vec<Vec<u8>> {
    let n = cells.len();
    let mut rows = vec![cells.to_vec()];
    for _ in 0..steps {
        let prev = rows.last().unwrap();
        let next = (0..n)
            .map(|i| {
                let l = prev[(i + n - 1) % n];
                let c = prev[i];
                let r = prev[(i + 1) % n];
                (rule >> (l << 2 | c << 1 | r)) & 1
            })
            .collect();
        rows.push(next);
    }
    rows
}

fn as_bits(row: &[f64]) -> Vec<u8> {
    row.iter().map(|&x| x as u8).collect()
}

#[test]
fn elementary_rules_match_direct_evolution() {
    for rule in [0u8, 30, 90, 110, 204, 232] {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cells: Vec<u8> = (0..64).map(|_| u8::from(rng.gen_bool(0.5))).collect();
            let expected = evolve_elementary(rule, &cells, 100);
            let ca = CellularAutomaton::elementary(
                rule.into(),
                cells.iter().map(|&b| f64::from(b)).collect(),
                Boundary::Periodic,
            )
            .unwrap();
            let model = actualize(&ca_to_system_model(&ca), 100).unwrap();
            let rows = model.trajectory().unwrap().rows();
            assert_eq!(rows.len(), 101);
            for (t, (row, want)) in rows.iter().zip(&expected).enumerate() {
                assert_eq!(&as_bits(row), want, "rule {rule}, seed {seed}, step {t}");
            }
        }
    }
}

fn life_grid(width: usize, height: usize, alive: &[(usize, usize)]) -> Vec<f64> {
    let mut cells = vec![0.0; width * height];
    for &(x, y) in alive {
        cells[y * width + x] = 1.0;
    }
    cells
}

fn run_life(width: usize, height: usize, cells: Vec<f64>, steps: usize) -> Vec<Vec<f64>> {
    let ca = CellularAutomaton::life(width, height, cells).unwrap();
    let model = actualize(&ca_to_system_model(&ca), steps).unwrap();
    model
        .trajectory()
        .unwrap()
        .rows()
        .iter()
        .map(|r| r.as_slice().to_vec())
        .collect()
}

#[test]
fn blinker_has_period_two() {
    let vertical = life_grid(5, 5, &[(2, 1), (2, 2), (2, 3)]);
    let horizontal = life_grid(5, 5, &[(1, 2), (2, 2), (3, 2)]);
    let rows = run_life(5, 5, vertical.clone(), 2);
    assert_eq!(rows[1], horizontal);
    assert_eq!(rows[2], vertical);
}

#[test]
fn glider_moves_diagonally() {
    let glider = [(1, 0), (2, 1), (0, 2), (1, 2), (2, 2)];
    let moved: Vec<(usize, usize)> = glider.iter().map(|&(x, y)| (x + 1, y + 1)).collect();
    let rows = run_life(16, 16, life_grid(16, 16, &glider), 4);
    assert_eq!(rows[4], life_grid(16, 16, &moved));
    assert_ne!(rows[2], rows[0]);
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Layer-by-layer evaluation read straight off the weights.
fn direct_forward(net: &NeuralNetwork, inputs: &[f64]) -> Vec<f64> {
    let layers = net.layers().unwrap();
    let ActivationKind::Logistic { bias } = &net.update().activation else {
        panic!("logistic network expected");
    };
    let mut values = vec![0.0; net.units().len()];
    for (&j, &x) in layers[0].iter().zip(inputs) {
        values[j] = x;
    }
    for layer in &layers[1..] {
        for &j in layer {
            let sum: f64 = net.incoming()[j]
                .iter()
                .zip(&net.update().weights[j])
                .map(|(&i, &w)| w * values[i])
                .sum();
            values[j] = sigmoid(sum + bias[j]);
        }
    }
    layers.last().unwrap().iter().map(|&j| values[j]).collect()
}

#[test]
fn network_models_match_direct_forward_pass() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for seed in 0..10 {
        let net = NeuralNetwork::layered(&[3, 4, 2], ActivationFamily::Logistic, seed).unwrap();
        for _ in 0..100 {
            let inputs: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..=1.0)).collect();
            let want = direct_forward(&net, &inputs);
            let model = ann_to_system_model(&net.with_inputs(&inputs).unwrap());
            let executed = actualize(&model, net.depth()).unwrap();
            let last = executed.trajectory().unwrap().last();
            for (k, &j) in net.output_units().iter().enumerate() {
                assert!((last[j] - want[k]).abs() <= 1e-12, "seed {seed}: {} vs {}", last[j], want[k]);
            }
            let fwd = forward(&net, &inputs).unwrap();
            for (a, b) in fwd.iter().zip(&want) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn backprop_matches_finite_differences() {
    let h = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for seed in 0..10 {
        let net = NeuralNetwork::layered(&[2, 2, 1], ActivationFamily::Logistic, seed).unwrap();
        let inputs = [rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0)];
        let targets = [rng.gen_range(0.0..=1.0)];
        let sample = [Sample::new(inputs.to_vec(), targets.to_vec())];
        let (_, grad) = gradient(&net, &inputs, &targets).unwrap();
        let analytic = grad.to_vec(&net);
        let params = net.parameters();
        for (p, &a) in analytic.iter().enumerate() {
            let mut plus = params.clone();
            plus[p] += h;
            let mut minus = params.clone();
            minus[p] -= h;
            let lp = dataset_loss(&net.with_parameters(&plus).unwrap(), &sample).unwrap();
            let lm = dataset_loss(&net.with_parameters(&minus).unwrap(), &sample).unwrap();
            let numeric = (lp - lm) / (2.0 * h);
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
            assert!(rel < 1e-4, "seed {seed}, parameter {p}: {a} vs {numeric}");
        }
    }
}

fn truth_table(f: impl Fn(bool, bool) -> bool) -> Vec<Sample> {
    [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]
        .iter()
        .map(|&(a, b)| Sample::new(vec![a, b], vec![f64::from(u8::from(f(a == 1.0, b == 1.0)))]))
        .collect()
}

#[test]
fn perceptron_learns_and_or() {
    for data in [truth_table(|a, b| a && b), truth_table(|a, b| a || b)] {
        let net = NeuralNetwork::layered(&[2, 1], ActivationFamily::Threshold, 0).unwrap();
        let cfg = LearnConfig { g: 100, l: 0.0, learning_rate: 0.1, seed: 0 };
        let (trained, log) = learn(&net, &data, &cfg).unwrap();
        assert_eq!(dataset_loss(&trained, &data).unwrap(), 0.0);
        assert!(log.len() <= 101);
    }
}

#[test]
fn logistic_net_learns_xor() {
    let data = truth_table(|a, b| a != b);
    let net = NeuralNetwork::layered(&[2, 2, 1], ActivationFamily::Logistic, 0).unwrap();
    let cfg = LearnConfig { g: 20000, l: 0.05, learning_rate: 0.5, seed: 0 };
    let (trained, _) = learn(&net, &data, &cfg).unwrap();
    assert!(dataset_loss(&trained, &data).unwrap() <= 0.05);
}
