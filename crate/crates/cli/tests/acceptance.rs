//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p metamodel --test acceptance`.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use metamodel::formats::{log, model as model_file};
use metamodel_core::adaptation::{evolve_rules, AdaptationConfig, Mutation, Strategy};
use metamodel_core::ann::{
    ann_to_system_model, dataset_loss, forward, gradient, learn, ActivationFamily, ActivationKind,
    LearnConfig, NeuralNetwork, Sample,
};
use metamodel_core::ca::{ca_to_system_model, Boundary, CellularAutomaton};
use metamodel_core::equivalence::{
    check_equivalence, CheckConfig, Condition, Conclusion, OperationalVerdict, Side,
};
use metamodel_core::{
    actualize, step, AdaptationEnd, Error, OperationKind, RuleTable, StructureKind, SystemModel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

/// XOR seed recorded as passing (see `tests/fixtures/xor.txt`).
const XOR_SEED: u64 = 0;
const XOR_RATE: f64 = 0.5;

fn main() {
    let criteria: [Criterion; 8] = [
        ("elementary CA oracle equivalence", elementary_oracle),
        ("Life blinker and glider", life),
        ("network oracle equivalence", network_oracle),
        ("gradient check", gradient_check),
        ("learning", learning),
        ("rule adaptation", adaptation),
        ("CA/ANN equivalence reproduction", ca_ann_equivalence),
        ("invariant suites", invariants),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} ({secs:.2}s)"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} ({secs:.2}s)");
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| u8::from(rng.gen_bool(0.5))).collect()
}

fn to_states(bits: &[u8]) -> Vec<f64> {
    bits.iter().map(|&b| f64::from(b)).collect()
}

fn elementary(rule: u32, cells: Vec<f64>) -> SystemModel {
    ca_to_system_model(&CellularAutomaton::elementary(rule, cells, Boundary::Periodic).unwrap())
}

fn elementary_oracle() -> Outcome {
    let start = Instant::now();
    let mut cells_checked = 0usize;
    for rule in [0u8, 30, 90, 110, 204, 232] {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut direct = random_bits(&mut rng, 64);
            let model = actualize(&elementary(rule.into(), to_states(&direct)), 100).map_err(|e| e.to_string())?;
            for (t, row) in model.trajectory().unwrap().rows().iter().enumerate() {
                ensure!(row.as_slice() == to_states(&direct).as_slice(), "rule {rule} seed {seed} differs at step {t}");
                cells_checked += 64;
                let prev = direct.clone();
                for i in 0..64 {
                    let pattern = prev[(i + 63) % 64] << 2 | prev[i] << 1 | prev[(i + 1) % 64];
                    direct[i] = (rule >> pattern) & 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    Ok(format!("6 rules x 20 seeds x 100 steps, {cells_checked} cells, 0 mismatches"))
}

fn grid(width: usize, height: usize, alive: &[(usize, usize)]) -> Vec<f64> {
    let mut cells = vec![0.0; width * height];
    for &(x, y) in alive {
        cells[y * width + x] = 1.0;
    }
    cells
}

fn life_rows(width: usize, height: usize, cells: Vec<f64>, t: usize) -> Vec<Vec<f64>> {
    let ca = CellularAutomaton::life(width, height, cells).unwrap();
    let model = actualize(&ca_to_system_model(&ca), t).unwrap();
    model.trajectory().unwrap().rows().iter().map(|r| r.as_slice().to_vec()).collect()
}

fn life() -> Outcome {
    let blinker = grid(5, 5, &[(2, 1), (2, 2), (2, 3)]);
    let rows = life_rows(5, 5, blinker.clone(), 2);
    ensure!(rows[1] != blinker && rows[2] == blinker, "blinker is not period 2");
    ensure!(rows[1] == grid(5, 5, &[(1, 2), (2, 2), (3, 2)]), "blinker phase wrong");
    let glider = [(1, 0), (2, 1), (0, 2), (1, 2), (2, 2)];
    let moved: Vec<_> = glider.iter().map(|&(x, y)| (x + 1, y + 1)).collect();
    let rows = life_rows(16, 16, grid(16, 16, &glider), 4);
    ensure!(rows[4] == grid(16, 16, &moved), "glider not displaced by (1,1)");
    Ok("blinker period 2 on 5x5, glider displaced (1,1) after 4 steps on 16x16".into())
}

fn direct_forward(net: &NeuralNetwork, inputs: &[f64]) -> Vec<f64> {
    let layers = net.layers().unwrap();
    let ActivationKind::Logistic { bias } = &net.update().activation else {
        unreachable!()
    };
    let mut values = vec![0.0; net.units().len()];
    for (&j, &x) in layers[0].iter().zip(inputs) {
        values[j] = x;
    }
    for layer in &layers[1..] {
        for &j in layer {
            let sum: f64 = net.incoming()[j].iter().zip(&net.update().weights[j]).map(|(&i, &w)| w * values[i]).sum();
            values[j] = 1.0 / (1.0 + (-(sum + bias[j])).exp());
        }
    }
    layers.last().unwrap().iter().map(|&j| values[j]).collect()
}

fn network_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let net = NeuralNetwork::layered(&[3, 4, 2], ActivationFamily::Logistic, seed).unwrap();
        for _ in 0..100 {
            let inputs: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..=1.0)).collect();
            let want = direct_forward(&net, &inputs);
            let model = ann_to_system_model(&net.with_inputs(&inputs).unwrap());
            let run = actualize(&model, net.depth()).map_err(|e| e.to_string())?;
            let last = run.trajectory().unwrap().last();
            let fwd = forward(&net, &inputs).map_err(|e| e.to_string())?;
            for (k, &j) in net.output_units().iter().enumerate() {
                worst = worst.max((last[j] - want[k]).abs()).max((fwd[k] - want[k]).abs());
            }
        }
    }
    ensure!(worst <= 1e-12, "max deviation {worst:e}");
    Ok(format!("10 nets x 100 inputs, max deviation {worst:e}"))
}

fn gradient_check() -> Outcome {
    let h = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for draw in 0..10 {
        let net = NeuralNetwork::layered(&[2, 2, 1], ActivationFamily::Logistic, 100 + draw).unwrap();
        let inputs = [rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0)];
        let targets = [rng.gen_range(0.0..=1.0)];
        let sample = [Sample::new(inputs.to_vec(), targets.to_vec())];
        let (_, grad) = gradient(&net, &inputs, &targets).map_err(|e| e.to_string())?;
        let params = net.parameters();
        for (p, a) in grad.to_vec(&net).into_iter().enumerate() {
            let shifted = |delta: f64| {
                let mut q = params.clone();
                q[p] += delta;
                dataset_loss(&net.with_parameters(&q).unwrap(), &sample).unwrap()
            };
            let numeric = (shifted(h) - shifted(-h)) / (2.0 * h);
            worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8));
        }
    }
    ensure!(worst < 1e-4, "max relative error {worst:e}");
    Ok(format!("10 draws on 2-2-1, max relative error {worst:e}"))
}

fn table(f: impl Fn(bool, bool) -> bool) -> Vec<Sample> {
    [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]
        .iter()
        .map(|&(a, b)| Sample::new(vec![a, b], vec![f64::from(u8::from(f(a == 1.0, b == 1.0)))]))
        .collect()
}

fn learning() -> Outcome {
    let start = Instant::now();
    let mut epochs = Vec::new();
    for (name, data) in [("AND", table(|a, b| a && b)), ("OR", table(|a, b| a || b))] {
        let net = NeuralNetwork::layered(&[2, 1], ActivationFamily::Threshold, 0).unwrap();
        let cfg = LearnConfig { g: 100, l: 0.0, learning_rate: 0.1, seed: 0 };
        let (trained, log) = learn(&net, &data, &cfg).map_err(|e| e.to_string())?;
        ensure!(dataset_loss(&trained, &data).unwrap() == 0.0, "perceptron fails {name}");
        epochs.push(format!("{name} in {} epochs", log.len() - 1));
    }
    let xor = table(|a, b| a != b);
    let net = NeuralNetwork::layered(&[2, 2, 1], ActivationFamily::Logistic, XOR_SEED).unwrap();
    let cfg = LearnConfig { g: 20000, l: 0.05, learning_rate: XOR_RATE, seed: XOR_SEED };
    let (trained, log) = learn(&net, &xor, &cfg).map_err(|e| e.to_string())?;
    let mse = dataset_loss(&trained, &xor).unwrap();
    ensure!(mse <= 0.05, "XOR seed {XOR_SEED} ends at MSE {mse}");
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!(
        "perceptron {}; XOR seed {XOR_SEED} MSE {mse:.4} after {} epochs",
        epochs.join(", "),
        log.len() - 1
    ))
}

fn adaptation() -> Outcome {
    let cells = to_states(&[0, 1, 1, 0, 1, 0, 0, 1]);
    let start = elementary(30, cells.clone());
    let mut cfg = AdaptationConfig { g: 256, l: 0.0, seed: 0, mutation: Mutation::SingleBitFlip, strategy: Strategy::Exhaustive };
    let loss_of = |log: &[metamodel_core::AdaptationRecord], rule: &str| {
        log.iter().find(|r| r.table.map(|t| t.to_string()).as_deref() == Some(rule)).map(|r| r.loss)
    };
    for (rule, target) in [("0", vec![0.0; 8]), ("204", cells.clone())] {
        let end = AdaptationEnd::final_state(target);
        let (best, log) = evolve_rules(&start, Some(&end), &cfg, 5).map_err(|e| e.to_string())?;
        ensure!(loss_of(&log, rule) == Some(0.0), "rule {rule} is not a zero-loss optimum");
        let reached = actualize(&best, 5).unwrap();
        ensure!(reached.current_entities().unwrap().as_slice() == end.targets.as_slice(), "best table misses the target");
    }
    let hidden = actualize(&elementary(110, cells.clone()), 5).unwrap();
    let end = AdaptationEnd::final_state(hidden.current_entities().unwrap().as_slice().to_vec());
    cfg.strategy = Strategy::HillClimb;
    cfg.g = 5000;
    cfg.l = 0.05;
    let from_zero = elementary(0, cells);
    let mut reached = 0;
    for seed in 0..5 {
        cfg.seed = seed;
        let (_, log) = evolve_rules(&from_zero, Some(&end), &cfg, 5).map_err(|e| e.to_string())?;
        if log.iter().any(|r| r.accepted && r.loss <= 0.05) {
            reached += 1;
        }
    }
    ensure!(reached >= 3, "hill climb reached the hidden-rule target for {reached} of 5 seeds");
    Ok(format!("exhaustive optima include rules 0 and 204; hill climb on hidden rule 110: {reached}/5 seeds"))
}

fn metamodel() -> Command {
    Command::new(env!("CARGO_BIN_EXE_metamodel"))
}

fn cli(dir: &Path, args: &[&str]) -> Result<std::process::Output, String> {
    metamodel().current_dir(dir).args(args).output().map_err(|e| e.to_string())
}

fn ca_ann_equivalence() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    for args in [
        &["create-ca", "--rule", "232", "--width", "8", "--out", "ca232.json"][..],
        &["create-ca", "--rule", "110", "--width", "8", "--out", "ca110.json"],
        &["create-ann", "--ring", "8", "--activation", "threshold", "--weights", "1,1,1", "--theta", "2", "--out", "ann.json"],
    ] {
        ensure!(cli(d, args)?.status.success(), "{args:?} failed");
    }
    let out = cli(d, &["check-eq", "--left", "ca232.json", "--right", "ann.json"])?;
    ensure!(out.status.code() == Some(1), "232 pair exits {:?}", out.status.code());
    let load = |f: &str| model_file::read_model(&std::fs::read_to_string(d.join(f)).unwrap()).unwrap();
    let (ca232, ca110, ann) = (load("ca232.json"), load("ca110.json"), load("ann.json"));
    let report = check_equivalence(&ca232, &ann, &CheckConfig::default()).map_err(|e| e.to_string())?;
    let expected = Conclusion::ConditionallyEquivalent(vec![Condition::Operation {
        kind: OperationKind::AdaptationFn,
        missing_in: Side::Left,
    }]);
    ensure!(report.conclusion == expected, "conclusion {:?}", report.conclusion);
    let update = report.operational.iter().find(|(k, _)| *k == OperationKind::UpdateFn).map(|(_, v)| v);
    ensure!(
        update == Some(&OperationalVerdict::ExtensionallyEqual { domain_size: 8 }),
        "update verdict {update:?}"
    );
    let out = cli(d, &["check-eq", "--left", "ca110.json", "--right", "ann.json"])?;
    ensure!(out.status.code() == Some(2), "110 pair exits {:?}", out.status.code());
    let report = check_equivalence(&ca110, &ann, &CheckConfig::default()).map_err(|e| e.to_string())?;
    let update = report.operational.iter().find(|(k, _)| *k == OperationKind::UpdateFn).map(|(_, v)| v);
    match update {
        Some(OperationalVerdict::Counterexample { input, left, right, .. }) => {
            ensure!(input == &[1.0, 1.0, 1.0], "counterexample at {input:?}");
            ensure!((*left, *right) == (0.0, 1.0), "values {left} vs {right}");
        }
        other => return Err(format!("110 update verdict {other:?}")),
    }
    Ok("232 vs ANN: conditional (adaptation-fn missing in left), extensionally-equal(8); 110 vs ANN: counterexample at (1,1,1)".into())
}

fn invariants() -> Outcome {
    // Regime transitions.
    let virtual_model = SystemModel::new_virtual(vec![StructureKind::Entities], vec![OperationKind::UpdateFn]).unwrap();
    ensure!(matches!(step(&virtual_model), Err(Error::Regime { .. })), "stepped a virtual model");
    let cells = to_states(&[0, 1, 1, 0, 1, 0, 0]);
    let m = elementary(110, cells.clone());
    let actual = actualize(&m, 1).unwrap();
    ensure!(matches!(actualize(&actual, 1), Err(Error::Regime { .. })), "actualized an actual model");
    ensure!(matches!(m.concretize(m.params().clone()), Err(Error::Regime { .. })), "re-concretized");
    ensure!(matches!(actualize(&m, 0), Err(Error::Precondition(_))), "accepted t = 0");

    // Step commutes with entity relabeling (rotation of the ring, every rule).
    for rule in 0..=255 {
        let rotated: Vec<f64> = (0..7).map(|i| cells[(i + 3) % 7]).collect();
        let a = step(&elementary(rule, cells.clone())).unwrap();
        let b = step(&elementary(rule, rotated)).unwrap();
        let (a, b) = (a.current_entities().unwrap(), b.current_entities().unwrap());
        ensure!((0..7).all(|i| a[(i + 3) % 7] == b[i]), "rule {rule} not shift invariant");
    }

    // Wolfram round trip.
    for rule in 0..=255u32 {
        let t = RuleTable::elementary(rule).unwrap();
        ensure!(t.wolfram_number() == Some(rule.into()), "rule {rule} round trip");
    }

    // Report symmetry and reflexivity over all rule pairs.
    let models: Vec<SystemModel> = (0..=255).map(|r| elementary(r, cells.clone())).collect();
    let cfg = CheckConfig::default();
    for (i, a) in models.iter().enumerate() {
        for b in &models[i..] {
            let ab = check_equivalence(a, b, &cfg).map_err(|e| e.to_string())?;
            let ba = check_equivalence(b, a, &cfg).map_err(|e| e.to_string())?;
            ensure!(ab.mirrored() == ba, "asymmetric report");
            ensure!((ab.conclusion == Conclusion::Equivalent) == std::ptr::eq(a, b), "reflexivity broken");
        }
    }

    // Byte-deterministic CLI reruns.
    let outputs: Vec<Vec<Vec<u8>>> = (0..2)
        .map(|_| -> Result<Vec<Vec<u8>>, String> {
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            let d = dir.path();
            let steps: [&[&str]; 4] = [
                &["create-ca", "--rule", "30", "--width", "16", "--init", "random", "--seed", "7", "--steps", "4", "--out", "m.json"],
                &["run", "--model", "m.json", "--out", "t.txt", "--model-out", "a.json", "--pbm", "t.pbm"],
                &["adapt", "--model", "m.json", "--target", "t.txt", "--g", "200", "--seed", "1", "--out", "b.json", "--log", "l.txt"],
                &["create-ann", "--layers", "2,3,1", "--seed", "5", "--out", "n.json"],
            ];
            for args in steps {
                ensure!(cli(d, args)?.status.success(), "{args:?} failed");
            }
            let log_text = std::fs::read_to_string(d.join("l.txt")).map_err(|e| e.to_string())?;
            log::read_log(&log_text).map_err(|e| e.to_string())?;
            ["m.json", "t.txt", "a.json", "t.pbm", "b.json", "l.txt", "n.json"]
                .iter()
                .map(|f| std::fs::read(d.join(f)).map_err(|e| e.to_string()))
                .collect()
        })
        .collect::<Result<_, _>>()?;
    ensure!(outputs[0] == outputs[1], "CLI outputs differ between runs");
    Ok("regime rejections, shift invariance (256 rules), Wolfram round trip (256), 32896 report pairs, CLI byte determinism".into())
}
