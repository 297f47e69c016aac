use std::collections::HashMap;

use netlines_core::linalg::{dot, sign};
use netlines_core::netlines::{fallback_step, FallbackRoute};
use netlines_core::{
    train_netlines, train_perceptron, BinarySet, GrowthConfig, MinimerrorConfig, NetLinesNetwork,
    PerceptronWeights, Standardizer,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random ±1 inputs with random targets, conflicting duplicates dropped.
fn random_binary_set(n: usize, p: usize, seed: u64) -> BinarySet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: HashMap<Vec<i8>, i8> = HashMap::new();
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    while rows.len() < p {
        let bits: Vec<i8> = (0..n).map(|_| if rng.gen() { 1 } else { -1 }).collect();
        let t: i8 = if rng.gen() { 1 } else { -1 };
        match seen.get(&bits) {
            Some(&old) if old != t => continue,
            _ => {
                seen.insert(bits.clone(), t);
            }
        }
        rows.push(bits.iter().map(|&b| b as f64).collect());
        targets.push(t);
    }
    BinarySet::from_features(n, &rows, targets).unwrap()
}

fn check_network(net: &NetLinesNetwork, set: &BinarySet) {
    let mut seen: HashMap<Vec<i8>, i8> = HashMap::new();
    for (mu, t) in set.targets().iter().enumerate() {
        let x = set.features(mu);
        let ir = net.compute_ir(x).unwrap();
        let out = net.forward(x).unwrap();
        if !net.ls_flag() {
            assert_eq!(out, sign(dot(net.output(), &ir.as_f64())));
        }
        // relabeled target of the next stage
        let next = out * t;
        assert!(next == 1 || next == -1);
        assert_eq!(next == 1, out == *t);
        if let Some(&other) = seen.get(ir.states()) {
            assert_eq!(other, *t, "opposite targets share an IR");
        }
        seen.insert(ir.states().to_vec(), *t);
    }
}

#[test]
fn random_binary_sets_converge_below_p_units() {
    for seed in 0..50 {
        let set = random_binary_set(8, 30, seed);
        let g = train_netlines(&set, &GrowthConfig::default().with_seed(seed)).unwrap();
        assert_eq!(g.training_errors(), 0, "seed {seed}");
        assert!(g.network.hidden_count() < 30, "seed {seed}");
        check_network(&g.network, &set);
    }
}

#[test]
fn separable_planar_sets_are_learned_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..100 {
        let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let (a, b, c) = (angle.cos(), angle.sin(), rng.gen_range(-0.5..0.5));
        let mut rows = Vec::new();
        let mut targets = Vec::new();
        while rows.len() < 20 {
            let x: f64 = rng.gen_range(-1.0..1.0);
            let y: f64 = rng.gen_range(-1.0..1.0);
            let d = a * x + b * y + c;
            if d.abs() >= 0.1 {
                rows.push(vec![x, y]);
                targets.push(sign(d));
            }
        }
        let set = BinarySet::from_features(2, &rows, targets).unwrap();
        let scaled = match Standardizer::fit(&set) {
            Ok(s) => s.standardize(&set).unwrap(),
            Err(_) => set.clone(),
        };
        let rep = train_perceptron(&scaled, &MinimerrorConfig::default().with_seed(trial)).unwrap();
        assert_eq!(rep.training_errors, 0, "trial {trial}");
    }
}

fn random_network(n: usize, h: usize, rng: &mut ChaCha8Rng) -> NetLinesNetwork {
    let hidden = (0..h)
        .map(|_| {
            let w: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            PerceptronWeights::normalized(w).unwrap()
        })
        .collect();
    let output: Vec<f64> = (0..=h).map(|_| rng.gen_range(-1.0..1.0)).collect();
    NetLinesNetwork::new(n, hidden, output, false, Standardizer::identity(n)).unwrap()
}

#[test]
fn fallback_steps_only_add_correct_patterns() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut steps = 0;
    while steps < 200 {
        let set = random_binary_set(6, 25, rng.gen());
        let h = rng.gen_range(1..4);
        let net = random_network(6, h, &mut rng);
        let Ok((grown, step)) = fallback_step(&net, &set) else {
            continue;
        };
        steps += 1;
        assert!(step.correct_after > step.correct_before);
        for mu in 0..set.len() {
            let before = net.forward(set.features(mu)).unwrap() == set.target(mu);
            let after = grown.forward(set.features(mu)).unwrap() == set.target(mu);
            assert!(!before || after, "pattern {mu} lost");
        }
        assert_eq!(grown.forward(set.features(step.nu)).unwrap(), set.target(step.nu));
        if matches!(step.route, FallbackRoute::LastUnit | FallbackRoute::Isolation) {
            let unit = &step.units[0];
            assert!(unit.field(set.input(step.nu)) * step.unit_targets[step.nu] as f64 > 0.0);
            for &mu in &step.learned {
                assert!(unit.field(set.input(mu)) * step.unit_targets[mu] as f64 > 0.0);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn grown_networks_are_faithful(seed in any::<u64>(), p in 4usize..24) {
        let set = random_binary_set(5, p, seed);
        let g = train_netlines(&set, &GrowthConfig::default().with_seed(seed)).unwrap();
        prop_assert_eq!(g.training_errors(), 0);
        check_network(&g.network, &set);
    }
}
