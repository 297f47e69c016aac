use netlines_core::linalg::{dot, norm, sign};
use netlines_core::minimerror::{
    cost, count_errors, train_perceptron_observed, weight_update_direction,
};
use netlines_core::{train_perceptron, BinarySet, MinimerrorConfig, Standardizer};
use proptest::prelude::*;

fn column(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, dim)
}

fn standardizer_case() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
    (1usize..7).prop_flat_map(|n| {
        (
            column(n + 1),
            column(n),
            prop::collection::vec(0.05f64..5.0, n),
            column(n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn user_and_standardized_decisions_agree((w, means, devs, x) in standardizer_case()) {
        prop_assume!(norm(&w) > 1e-6);
        let std = Standardizer::new(means, devs).unwrap();
        let mut z = vec![1.0];
        z.extend(std.transform(&x).unwrap());
        let mut raw = vec![1.0];
        raw.extend(&x);
        let user = std.unstandardize_weights(&w).unwrap();
        prop_assert_eq!(sign(dot(&user, &raw)), sign(dot(&w, &z)));
        prop_assert!((norm(&user) - ((x.len() + 1) as f64).sqrt()).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn refit_after_standardizing_is_identity(
        rows in prop::collection::vec(column(3), 3..30)
    ) {
        let targets = vec![1i8; rows.len()];
        let set = BinarySet::from_features(3, &rows, targets).unwrap();
        let Ok(first) = Standardizer::fit(&set) else {
            return Ok(());
        };
        let again = Standardizer::fit(&first.standardize(&set).unwrap()).unwrap();
        for (m, d) in again.means().iter().zip(again.deviations()) {
            prop_assert!(m.abs() < 1e-12, "mean {m}");
            prop_assert!((d - 1.0).abs() < 1e-12, "deviation {d}");
        }
    }

    #[test]
    fn update_direction_matches_closed_form(
        w in column(4),
        x in column(3),
        positive in any::<bool>(),
        t_plus in 0.05f64..3.0,
        theta in 1.0f64..10.0,
    ) {
        prop_assume!(norm(&w) > 1e-3);
        let tau: i8 = if positive { 1 } else { -1 };
        let set = BinarySet::from_features(3, &[x], vec![tau]).unwrap();
        let t_minus = theta * t_plus;
        let dir = weight_update_direction(&w, &set, t_plus, t_minus).unwrap();
        let input = set.input(0);
        let gamma = tau as f64 * dot(&w, input) / norm(&w);
        let temp = if gamma > 0.0 { t_plus } else { t_minus };
        let c = (gamma / (2.0 * temp)).cosh();
        for (d, xi) in dir.iter().zip(input) {
            let expected = tau as f64 * xi / (c * c);
            prop_assert!((d - expected).abs() < 1e-12, "{d} vs {expected}");
        }
    }

    #[test]
    fn cold_cost_counts_errors(
        w in column(3),
        rows in prop::collection::vec(column(2), 1..20),
        flips in prop::collection::vec(any::<bool>(), 20),
    ) {
        prop_assume!(norm(&w) > 1e-3);
        // targets chosen so that every stability is at least 0.5 in size
        let mut kept = Vec::new();
        let mut targets = Vec::new();
        for (r, flip) in rows.iter().zip(&flips) {
            let field = w[0] + w[1] * r[0] + w[2] * r[1];
            if field.abs() / norm(&w) > 0.5 {
                kept.push(r.clone());
                let s = sign(field);
                targets.push(if *flip { -s } else { s });
            }
        }
        prop_assume!(!kept.is_empty());
        let set = BinarySet::from_features(2, &kept, targets).unwrap();
        let e = cost(&w, &set, 0.01).unwrap();
        prop_assert!((e - count_errors(&w, &set) as f64).abs() < 1e-4);
    }
}

fn observed(set: &BinarySet, cfg: &MinimerrorConfig) -> (Vec<(f64, f64, f64, usize)>, usize) {
    let mut seen = Vec::new();
    let rep = train_perceptron_observed(set, cfg, |s| {
        seen.push((s.t_plus, s.t_minus, norm(s.weights), s.errors));
    })
    .unwrap();
    (seen, rep.training_errors)
}

#[test]
fn epochs_keep_the_norm_and_cool_down() {
    let rows: Vec<Vec<f64>> = (0..40)
        .map(|i| vec![(i as f64 * 0.37).sin() * 3.0, (i as f64 * 0.11).cos()])
        .collect();
    let targets = (0..40).map(|i| if (i * 7) % 5 < 2 { 1 } else { -1 }).collect();
    let set = BinarySet::from_features(2, &rows, targets).unwrap();
    let cfg = MinimerrorConfig {
        max_epochs: 3000,
        ..Default::default()
    };
    let (seen, best) = observed(&set, &cfg);
    assert!(seen.len() > 100);
    for pair in seen.windows(2) {
        assert!(pair[1].0 < pair[0].0, "T+ must fall");
    }
    for &(tp, tm, len, _) in &seen {
        assert_eq!(tm, cfg.theta * tp);
        assert!((len - 3f64.sqrt()).abs() < 1e-9);
    }
    // the returned weights are the best seen
    assert_eq!(best, seen.iter().map(|s| s.3).min().unwrap());
}

#[test]
fn xor_leaves_exactly_one_error() {
    let rows = vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, 1.0], vec![-1.0, -1.0]];
    let set = BinarySet::from_features(2, &rows, vec![-1, 1, 1, -1]).unwrap();
    for seed in 0..5 {
        let rep = train_perceptron(&set, &MinimerrorConfig::default().with_seed(seed)).unwrap();
        assert_eq!(rep.training_errors, 1);
    }
}
