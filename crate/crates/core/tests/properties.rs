mod common;

use common::{block_axes, random_dag, random_table, rng};
use dofinetti::discover::discover_bivariate_report;
use dofinetti::estimate::{answer_query, truncated_factorization};
use dofinetti::simulate::{polya_joint_log_prob, sample_icm_bivariate};
use dofinetti::{Assignment, Axis, AxisKey, BetaPrior, BivariateGraph, InterventionSet, JointTable, Query};
use proptest::prelude::*;
use rand::Rng;

fn disjoint_axes(seed: u64) -> (Vec<Axis>, Vec<Axis>) {
    let mut r = rng(seed);
    let na = r.random_range(1..=3);
    let nb = r.random_range(1..=3);
    let a = (0..na).map(|i| Axis::new(i, 0, r.random_range(2..=3))).collect();
    let b = (0..nb).map(|i| Axis::new(i, 1, r.random_range(2..=3))).collect();
    (a, b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn marginalizing_a_product_returns_each_factor(seed in any::<u64>()) {
        let (a, b) = disjoint_axes(seed);
        let mut r = rng(seed ^ 1);
        let ta = random_table(&mut r, a);
        let tb = random_table(&mut r, b);
        let prod = JointTable::product(&[ta.clone(), tb.clone()]).unwrap();
        let keys_a: Vec<AxisKey> = ta.keys().collect();
        let keys_b: Vec<AxisKey> = tb.keys().collect();
        prop_assert!(prod.marginalize(&keys_a).unwrap().max_abs_diff(&ta).unwrap() < 1e-12);
        prop_assert!(prod.marginalize(&keys_b).unwrap().max_abs_diff(&tb).unwrap() < 1e-12);
    }

    #[test]
    fn chain_rule_reconstructs_joint(seed in any::<u64>()) {
        let (a, b) = disjoint_axes(seed);
        let mut r = rng(seed ^ 2);
        let axes: Vec<Axis> = a.iter().chain(&b).copied().collect();
        let joint = random_table(&mut r, axes);
        let keys_b: Vec<AxisKey> = b.iter().map(|x| x.key).collect();
        let given: Assignment = b.iter().map(|x| (x.key, r.random_range(0..x.card))).collect();
        let cond = joint.condition(&given).unwrap();
        let p_given = joint.marginalize(&keys_b).unwrap().prob_of(&given).unwrap();
        for (config, p) in cond.cells() {
            let mut full = given.clone();
            full.extend(cond.keys().zip(config));
            prop_assert!((p * p_given - joint.prob_of(&full).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn axis_permutation_round_trips_bitwise(seed in any::<u64>()) {
        let (a, b) = disjoint_axes(seed);
        let mut r = rng(seed ^ 3);
        let axes: Vec<Axis> = a.iter().chain(&b).copied().collect();
        let t = random_table(&mut r, axes);
        let mut order: Vec<AxisKey> = t.keys().collect();
        for i in (1..order.len()).rev() {
            order.swap(i, r.random_range(0..=i));
        }
        let back: Vec<AxisKey> = t.keys().collect();
        let round = t.permute(&order).unwrap().permute(&back).unwrap();
        prop_assert_eq!(round.probs(), t.probs());
        let moved = t.relabel(|k| AxisKey::new(k.var + 10, k.pos)).unwrap();
        let restored = moved.relabel(|k| AxisKey::new(k.var - 10, k.pos)).unwrap();
        prop_assert_eq!(restored, t);
    }

    #[test]
    fn text_format_round_trips(seed in any::<u64>()) {
        let (a, _) = disjoint_axes(seed);
        let t = random_table(&mut rng(seed), a);
        prop_assert_eq!(JointTable::from_text(&t.to_text()).unwrap(), t);
    }

    #[test]
    fn truncated_factorization_is_normalized(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = r.random_range(2..=3);
        let dag = random_dag(&mut r, d);
        let t = random_table(&mut r, block_axes(&vec![2; d], 2));
        let var = r.random_range(0..d);
        let pos = r.random_range(0..2);
        let post = truncated_factorization(&t, &dag, &InterventionSet::single(var, pos, r.random_range(0..2))).unwrap();
        prop_assert!((post.total() - 1.0).abs() < 1e-10);
    }

    // Identical marginal post-interventional distributions at every position.
    #[test]
    fn position_symmetry_on_symmetrized_tables(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = r.random_range(2..=3);
        let dag = random_dag(&mut r, d);
        let t = random_table(&mut r, block_axes(&vec![2; d], 2)).symmetrize_positions().unwrap();
        let var = r.random_range(0..d);
        let value = r.random_range(0..2);
        let answers: Vec<JointTable> = (0..2)
            .map(|n| {
                let targets: Vec<AxisKey> = (0..d).filter(|&i| i != var).map(|i| AxisKey::new(i, n)).collect();
                let q = Query::new(targets, InterventionSet::single(var, n, value), Assignment::new()).unwrap();
                answer_query(&t, &dag, &q).unwrap()
            })
            .collect();
        let shifted = answers[1].relabel(|k| AxisKey::new(k.var, 0)).unwrap();
        prop_assert!(answers[0].max_abs_diff(&shifted).unwrap() < 1e-12);
    }

    #[test]
    fn urn_probability_is_exchangeable(seed in any::<u64>(), len in 1usize..12) {
        let mut r = rng(seed);
        let prior = BetaPrior::new(r.random_range(0.5..4.0), r.random_range(0.5..4.0)).unwrap();
        let xs: Vec<u8> = (0..len).map(|_| r.random_range(0..2)).collect();
        let ys: Vec<u8> = (0..len).map(|_| r.random_range(0..2)).collect();
        let mut idx: Vec<usize> = (0..len).collect();
        for i in (1..len).rev() {
            idx.swap(i, r.random_range(0..=i));
        }
        let px: Vec<u8> = idx.iter().map(|&i| xs[i]).collect();
        let py: Vec<u8> = idx.iter().map(|&i| ys[i]).collect();
        let a = polya_joint_log_prob(&xs, &ys, prior).unwrap();
        let b = polya_joint_log_prob(&px, &py, prior).unwrap();
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn swapping_variables_flips_discovered_direction(seed in any::<u64>(), g in 0usize..3) {
        let graph = BivariateGraph::ALL[g];
        let ds = sample_icm_bivariate(graph, BetaPrior::default(), 400, 2, seed).unwrap();
        let swapped = ds.swap_vars(0, 1).unwrap();
        let a = discover_bivariate_report(&ds, 0.05, false).unwrap();
        let b = discover_bivariate_report(&swapped, 0.05, false).unwrap();
        prop_assert!((a.independence.p_value - b.independence.p_value).abs() < 1e-12);
        let tie = match (a.forward, a.backward) {
            (Some(f), Some(bk)) => (f.p_value - bk.p_value).abs() < 1e-12,
            _ => false,
        };
        if !tie {
            prop_assert_eq!(b.graph, a.graph.swapped());
        }
    }
}
