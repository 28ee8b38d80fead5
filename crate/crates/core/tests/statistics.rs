mod common;

use std::collections::BTreeMap;

use dofinetti::discover::{ci_test, discover_bivariate_report};
use dofinetti::estimate::fit_joint;
use dofinetti::simulate::{polya_joint_log_prob, polya_urn_run, sample_icm_bivariate};
use dofinetti::{AxisKey, BetaPrior, BivariateGraph};

#[test]
fn d_separation_pattern_of_forward_graph() {
    let ds = sample_icm_bivariate(BivariateGraph::XToY, BetaPrior::default(), 10_000, 2, 21).unwrap();
    let (x1, y1, x2, y2) = (
        AxisKey::new(0, 0),
        AxisKey::new(1, 0),
        AxisKey::new(0, 1),
        AxisKey::new(1, 1),
    );
    assert!(ci_test(&ds, y1, x2, &[x1]).unwrap().p_value > 0.01);
    assert!(ci_test(&ds, x1, y2, &[y1]).unwrap().p_value < 0.01);
}

// Permuting positions within every environment leaves the block histogram
// unchanged in distribution; a chi-square homogeneity test should not reject.
#[test]
fn fitted_table_is_position_exchangeable() {
    let prior = BetaPrior::default();
    for (k, graph) in BivariateGraph::ALL.into_iter().enumerate() {
        let a = fit_joint(&sample_icm_bivariate(graph, prior, 10_000, 2, 100 + k as u64).unwrap());
        let ds = sample_icm_bivariate(graph, prior, 10_000, 2, 200 + k as u64).unwrap();
        let b = fit_joint(&ds.permute_positions(&[1, 0]).unwrap());
        let n = 10_000.0;
        let mut chi2 = 0.0;
        let mut cells = 0;
        for (pa, pb) in a.probs().iter().zip(b.probs()) {
            let pooled = (pa + pb) / 2.0;
            if pooled > 0.0 {
                chi2 += n * (pa - pooled).powi(2) / pooled + n * (pb - pooled).powi(2) / pooled;
                cells += 1;
            }
        }
        let dof = (cells - 1) as f64;
        let p = statrs::function::gamma::gamma_ur(dof / 2.0, chi2 / 2.0);
        assert!(p > 1e-3, "{graph}: chi2 {chi2} on {dof} dof, p = {p}");
    }
}

fn correct_rate(graph: BivariateGraph, envs: usize, trials: u64) -> f64 {
    let hits = (0..trials)
        .filter(|&s| {
            let ds = sample_icm_bivariate(graph, BetaPrior::default(), envs, 2, 7_000 + s).unwrap();
            discover_bivariate_report(&ds, 0.05, false).unwrap().graph == graph
        })
        .count();
    hits as f64 / trials as f64
}

#[test]
fn discovery_improves_with_more_environments() {
    let trials = 60;
    for graph in BivariateGraph::ALL {
        let small = correct_rate(graph, 1_000, trials);
        let large = correct_rate(graph, 10_000, trials);
        // binomial slack of about two standard errors at p = 0.9
        assert!(large + 0.08 >= small, "{graph}: {small} -> {large}");
        assert!(large >= 0.85, "{graph}: {large}");
    }
}

#[test]
fn urn_frequencies_match_closed_form_for_pairs() {
    let prior = BetaPrior::new(1.0, 3.0).unwrap();
    let runs = 40_000u64;
    let mut counts: BTreeMap<(u8, u8, u8, u8), u64> = BTreeMap::new();
    for s in 0..runs {
        let t = polya_urn_run(prior, 2, &BTreeMap::new(), s).unwrap();
        *counts.entry((t.xs[0], t.ys[0], t.xs[1], t.ys[1])).or_default() += 1;
    }
    let mut total = 0.0;
    for code in 0..16u8 {
        let key = (code >> 3 & 1, code >> 2 & 1, code >> 1 & 1, code & 1);
        let p = polya_joint_log_prob(&[key.0, key.2], &[key.1, key.3], prior)
            .unwrap()
            .exp();
        total += p;
        let freq = *counts.get(&key).unwrap_or(&0) as f64 / runs as f64;
        let sigma = (p * (1.0 - p) / runs as f64).sqrt();
        assert!((freq - p).abs() <= 4.0 * sigma + 1e-12, "{key:?}: {freq} vs {p}");
    }
    assert!((total - 1.0).abs() < 1e-12);
}
