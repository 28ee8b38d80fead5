//! Conditional-independence testing on grouped data and bivariate graph
//! discovery.
//!
//! Every environment contributes one sample of the tested tuple, so
//! positions within an environment never appear as separate samples. For
//! `X -> Y` the mechanism parameters make `Y_1 ⊥ X_2 | X_1` hold while
//! `X_1 ⊥ Y_2 | Y_1` fails (through `X_1 <- theta -> X_2 -> Y_2`); the
//! reverse holds for `Y -> X`. Comparing the two p-values orients the edge.

use std::fmt;

use rand::Rng as _;
use statrs::function::gamma::gamma_ur;

use crate::dag::{BivariateGraph, Dag};
use crate::dataset::ExchangeableDataset;
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::table::AxisKey;

pub const DEFAULT_SIGNIFICANCE: f64 = 0.05;

/// Minimum expected cell count under strict validity checking.
pub const MIN_EXPECTED_COUNT: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CiTestResult {
    /// G² likelihood-ratio statistic.
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// Stratified `a x b` contingency counts.
#[derive(Clone, Debug)]
pub struct Contingency {
    a_card: usize,
    b_card: usize,
    strata: usize,
    counts: Vec<f64>,
}

impl Contingency {
    pub fn new(a_card: usize, b_card: usize, strata: usize) -> Self {
        Contingency {
            a_card,
            b_card,
            strata,
            counts: vec![0.0; a_card * b_card * strata],
        }
    }

    pub fn add(&mut self, stratum: usize, a: usize, b: usize) {
        self.counts[(stratum * self.a_card + a) * self.b_card + b] += 1.0;
    }

    /// G-test of independence of `a` and `b` within every stratum.
    ///
    /// Degrees of freedom are `(|a| - 1)(|b| - 1)` times the number of strata.
    pub fn g_test(&self, strict: bool) -> Result<CiTestResult> {
        let (ca, cb) = (self.a_card, self.b_card);
        let mut g = 0.0;
        for s in 0..self.strata {
            let cell = |a: usize, b: usize| self.counts[(s * ca + a) * cb + b];
            let rows: Vec<f64> = (0..ca).map(|a| (0..cb).map(|b| cell(a, b)).sum()).collect();
            let cols: Vec<f64> = (0..cb).map(|b| (0..ca).map(|a| cell(a, b)).sum()).collect();
            let total: f64 = rows.iter().sum();
            for (a, &row) in rows.iter().enumerate() {
                for (b, &col) in cols.iter().enumerate() {
                    let expected = if total > 0.0 { row * col / total } else { 0.0 };
                    if strict && expected < MIN_EXPECTED_COUNT {
                        return Err(Error::InsufficientData(format!(
                            "stratum {s} cell ({a},{b}) expects {expected:.2} counts"
                        )));
                    }
                    let observed = cell(a, b);
                    if observed > 0.0 {
                        g += observed * (observed / expected).ln();
                    }
                }
            }
        }
        let statistic = (2.0 * g).max(0.0);
        let dof = (ca - 1) * (cb - 1) * self.strata;
        let p_value = if dof == 0 || statistic == 0.0 {
            1.0
        } else {
            gamma_ur(dof as f64 / 2.0, statistic / 2.0).clamp(0.0, 1.0)
        };
        Ok(CiTestResult {
            statistic,
            degrees_of_freedom: dof.max(1),
            p_value,
        })
    }
}

/// G-test of `a ⊥ b | cond`, one sample per environment.
pub fn ci_test(dataset: &ExchangeableDataset, a: AxisKey, b: AxisKey, cond: &[AxisKey]) -> Result<CiTestResult> {
    ci_test_with(dataset, a, b, cond, false)
}

/// As [`ci_test`]; with `strict` set, sparse strata raise
/// [`Error::InsufficientData`] instead of producing an unreliable p-value.
pub fn ci_test_with(
    dataset: &ExchangeableDataset,
    a: AxisKey,
    b: AxisKey,
    cond: &[AxisKey],
    strict: bool,
) -> Result<CiTestResult> {
    let mut all = vec![a, b];
    all.extend_from_slice(cond);
    for (i, k) in all.iter().enumerate() {
        if all[..i].contains(k) {
            return Err(Error::DuplicateAxis(*k));
        }
    }
    let a_axis = dataset.axis(a)?;
    let b_axis = dataset.axis(b)?;
    let cond_axes = cond.iter().map(|&k| dataset.axis(k)).collect::<Result<Vec<_>>>()?;
    let strata: usize = cond_axes.iter().map(|ax| ax.card).product();
    let mut table = Contingency::new(a_axis.card, b_axis.card, strata);
    for env in 0..dataset.num_envs() {
        let s = cond_axes
            .iter()
            .fold(0usize, |acc, ax| acc * ax.card + dataset.value(env, ax.key));
        table.add(s, dataset.value(env, a), dataset.value(env, b));
    }
    table.g_test(strict)
}

/// The three tests behind a bivariate decision.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscoveryReport {
    pub significance: f64,
    /// `X_1 ⊥ Y_1`.
    pub independence: CiTestResult,
    /// `Y_1 ⊥ X_2 | X_1`, expected to hold under `X -> Y`.
    pub forward: Option<CiTestResult>,
    /// `X_1 ⊥ Y_2 | Y_1`, expected to hold under `Y -> X`.
    pub backward: Option<CiTestResult>,
    pub graph: BivariateGraph,
}

impl fmt::Display for DiscoveryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = |r: &Option<CiTestResult>| r.map_or("NA".to_string(), |r| format!("{:.6e}", r.p_value));
        writeln!(f, "graph = {}", self.graph)?;
        writeln!(f, "significance = {}", self.significance)?;
        writeln!(f, "p_independence = {:.6e}", self.independence.p_value)?;
        writeln!(f, "p_forward = {}", p(&self.forward))?;
        writeln!(f, "p_backward = {}", p(&self.backward))
    }
}

fn check_bivariate(dataset: &ExchangeableDataset, min_positions: usize) -> Result<()> {
    if dataset.num_vars() != 2 {
        return Err(Error::invalid(format!(
            "bivariate discovery needs d = 2, got {}",
            dataset.num_vars()
        )));
    }
    if dataset.num_positions() < min_positions {
        return Err(Error::invalid(format!(
            "need at least {min_positions} positions per environment, got {}",
            dataset.num_positions()
        )));
    }
    Ok(())
}

fn check_significance(significance: f64) -> Result<()> {
    if !(significance > 0.0 && significance < 1.0) {
        return Err(Error::invalid(format!(
            "significance must lie in (0, 1), got {significance}"
        )));
    }
    Ok(())
}

/// Bivariate discovery from grouped data using positions 0 and 1.
pub fn discover_bivariate(dataset: &ExchangeableDataset, significance: f64) -> Result<Dag> {
    Ok(discover_bivariate_report(dataset, significance, false)?.graph.to_dag())
}

/// Decision rule: independent if `X_1 ⊥ Y_1` is not rejected; otherwise the
/// orientation whose implied independence has the larger p-value, ties
/// going to `X -> Y`.
pub fn discover_bivariate_report(
    dataset: &ExchangeableDataset,
    significance: f64,
    strict: bool,
) -> Result<DiscoveryReport> {
    check_bivariate(dataset, 2)?;
    check_significance(significance)?;
    let (x1, y1, x2, y2) = (
        AxisKey::new(0, 0),
        AxisKey::new(1, 0),
        AxisKey::new(0, 1),
        AxisKey::new(1, 1),
    );
    let independence = ci_test_with(dataset, x1, y1, &[], strict)?;
    if independence.p_value > significance {
        return Ok(DiscoveryReport {
            significance,
            independence,
            forward: None,
            backward: None,
            graph: BivariateGraph::Independent,
        });
    }
    let forward = ci_test_with(dataset, y1, x2, &[x1], strict)?;
    let backward = ci_test_with(dataset, x1, y2, &[y1], strict)?;
    let graph = if forward.p_value >= backward.p_value {
        BivariateGraph::XToY
    } else {
        BivariateGraph::YToX
    };
    Ok(DiscoveryReport {
        significance,
        independence,
        forward: Some(forward),
        backward: Some(backward),
        graph,
    })
}

/// i.i.d. baseline: pools every (X, Y) row across environments and positions,
/// tests marginal independence, and orients an adjacent pair by a seeded coin
/// flip since a lone edge has no orientation signal without exchangeability.
pub fn discover_bivariate_iid_baseline(dataset: &ExchangeableDataset, significance: f64, seed: u64) -> Result<Dag> {
    Ok(discover_bivariate_iid_report(dataset, significance, seed)?
        .graph
        .to_dag())
}

pub fn discover_bivariate_iid_report(
    dataset: &ExchangeableDataset,
    significance: f64,
    seed: u64,
) -> Result<DiscoveryReport> {
    check_bivariate(dataset, 1)?;
    check_significance(significance)?;
    let cards = dataset.cardinalities();
    let mut table = Contingency::new(cards[0], cards[1], 1);
    for env in 0..dataset.num_envs() {
        for pos in 0..dataset.num_positions() {
            table.add(0, dataset.get(env, pos, 0), dataset.get(env, pos, 1));
        }
    }
    let independence = table.g_test(false)?;
    let graph = if independence.p_value > significance {
        BivariateGraph::Independent
    } else if stream_rng(seed, 0).random_bool(0.5) {
        BivariateGraph::XToY
    } else {
        BivariateGraph::YToX
    };
    Ok(DiscoveryReport {
        significance,
        independence,
        forward: None,
        backward: None,
        graph,
    })
}
