//! Ground truth for the bivariate Beta-Bernoulli XOR process.
//!
//! Two independent routes compute the same block tables:
//! the conjugate route multiplies Beta-function marginal likelihoods of each
//! mechanism's noise sequence, the quadrature route integrates the
//! structural likelihood over a tensor grid on (theta, psi).

mod quadrature;

use statrs::function::gamma::ln_gamma;

use crate::dag::BivariateGraph;
use crate::error::{Error, Result};
use crate::query::InterventionSet;
use crate::simulate::BetaPrior;
use crate::table::{configurations, Axis, AxisKey, JointTable};

pub use quadrature::{BetaRule, QuadratureRule};

pub const DEFAULT_NODES: usize = 64;
const MAX_POSITIONS: usize = 8;

/// Posterior Beta parameters after observing a binary sequence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConjugateCounts {
    pub successes: usize,
    pub trials: usize,
    pub alpha_post: f64,
    pub beta_post: f64,
}

impl ConjugateCounts {
    pub fn from_sequence(z: &[u8], prior: BetaPrior) -> Self {
        let successes = z.iter().filter(|&&v| v == 1).count();
        let trials = z.len();
        ConjugateCounts {
            successes,
            trials,
            alpha_post: prior.alpha + successes as f64,
            beta_post: prior.beta + (trials - successes) as f64,
        }
    }
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `B(alpha_N, beta_N) / B(alpha, beta)`: probability of the exact binary
/// sequence `z` after integrating out a Beta-distributed success rate.
pub fn marginal_likelihood(z: &[u8], prior: BetaPrior) -> Result<f64> {
    if z.iter().any(|&v| v > 1) {
        return Err(Error::invalid("marginal likelihood needs a binary sequence"));
    }
    let c = ConjugateCounts::from_sequence(z, prior);
    Ok((ln_beta(c.alpha_post, c.beta_post) - ln_beta(prior.alpha, prior.beta)).exp())
}

/// Axes of an `N`-position bivariate block: X at pos 0, Y at pos 0, X at pos 1, ...
pub fn bivariate_axes(num_positions: usize) -> Vec<Axis> {
    (0..num_positions)
        .flat_map(|pos| [Axis::new(0, pos, 2), Axis::new(1, pos, 2)])
        .collect()
}

fn check_positions(num_positions: usize) -> Result<()> {
    if num_positions == 0 || num_positions > MAX_POSITIONS {
        return Err(Error::invalid(format!(
            "oracle tables support 1..={MAX_POSITIONS} positions, got {num_positions}"
        )));
    }
    Ok(())
}

fn check_intervention(intervention: &InterventionSet, num_positions: usize) -> Result<()> {
    for (key, value) in intervention.iter() {
        if key.var > 1 || key.pos >= num_positions {
            return Err(Error::UnknownAxis(key));
        }
        if value > 1 {
            return Err(Error::ValueOutOfRange {
                axis: key,
                value,
                card: 2,
            });
        }
    }
    Ok(())
}

// Per-position Bernoulli draws feeding each mechanism: the root variable's own
// value, or the XOR noise for the child.
fn noise_bits(graph: BivariateGraph, x: u8, y: u8) -> [u8; 2] {
    match graph {
        BivariateGraph::XToY => [x, x ^ y],
        BivariateGraph::YToX => [x ^ y, y],
        BivariateGraph::Independent => [x, y],
    }
}

fn split_config(config: &[usize]) -> (Vec<u8>, Vec<u8>) {
    let xs = config.iter().step_by(2).map(|&v| v as u8).collect();
    let ys = config.iter().skip(1).step_by(2).map(|&v| v as u8).collect();
    (xs, ys)
}

fn consistent(config: &[usize], intervention: &InterventionSet) -> bool {
    intervention.iter().all(|(k, v)| config[2 * k.pos + k.var] == v)
}

/// Exact joint table of the `N`-position block, from conjugate marginal likelihoods.
pub fn analytic_block_table(graph: BivariateGraph, prior: BetaPrior, num_positions: usize) -> Result<JointTable> {
    analytic_post_interventional(graph, prior, num_positions, &InterventionSet::empty())
}

/// Exact post-interventional block table: each mechanism's marginal
/// likelihood runs over its non-intervened positions only, and intervened
/// axes are point masses.
pub fn analytic_post_interventional(
    graph: BivariateGraph,
    prior: BetaPrior,
    num_positions: usize,
    intervention: &InterventionSet,
) -> Result<JointTable> {
    check_positions(num_positions)?;
    check_intervention(intervention, num_positions)?;
    let axes = bivariate_axes(num_positions);
    let free: [Vec<usize>; 2] = [0, 1].map(|var| {
        (0..num_positions)
            .filter(|&n| intervention.get(AxisKey::new(var, n)).is_none())
            .collect()
    });
    let mut probs = Vec::with_capacity(1 << (2 * num_positions));
    for config in configurations(&axes) {
        if !consistent(&config, intervention) {
            probs.push(0.0);
            continue;
        }
        let (xs, ys) = split_config(&config);
        let mut p = 1.0;
        for (var, positions) in free.iter().enumerate() {
            let u: Vec<u8> = positions
                .iter()
                .map(|&n| noise_bits(graph, xs[n], ys[n])[var])
                .collect();
            p *= marginal_likelihood(&u, prior)?;
        }
        probs.push(p);
    }
    JointTable::new(axes, probs)
}

/// Block table by tensor-grid quadrature over (theta, psi).
pub fn quadrature_block_table(
    graph: BivariateGraph,
    prior: BetaPrior,
    num_positions: usize,
    nodes: usize,
) -> Result<JointTable> {
    quadrature_post_interventional(
        graph,
        prior,
        num_positions,
        &InterventionSet::empty(),
        nodes,
        BetaRule::Jacobi,
    )
}

/// Post-interventional block table by quadrature: the structural
/// likelihood with intervened factors removed, integrated over both
/// mechanism parameters.
pub fn quadrature_post_interventional(
    graph: BivariateGraph,
    prior: BetaPrior,
    num_positions: usize,
    intervention: &InterventionSet,
    nodes: usize,
    rule: BetaRule,
) -> Result<JointTable> {
    check_positions(num_positions)?;
    check_intervention(intervention, num_positions)?;
    if nodes < 16 {
        return Err(Error::invalid(format!(
            "quadrature needs at least 16 nodes, got {nodes}"
        )));
    }
    let grid = QuadratureRule::beta(nodes, prior, rule)?;
    let axes = bivariate_axes(num_positions);
    let mut probs = Vec::with_capacity(1 << (2 * num_positions));
    for config in configurations(&axes) {
        if !consistent(&config, intervention) {
            probs.push(0.0);
            continue;
        }
        let (xs, ys) = split_config(&config);
        let mut total = 0.0;
        for (&theta, &wt) in grid.nodes.iter().zip(&grid.weights) {
            for (&psi, &wp) in grid.nodes.iter().zip(&grid.weights) {
                let mut lik = 1.0;
                for n in 0..num_positions {
                    if intervention.get(AxisKey::new(0, n)).is_none() {
                        lik *= x_mechanism(graph, xs[n], ys[n], theta);
                    }
                    if intervention.get(AxisKey::new(1, n)).is_none() {
                        lik *= y_mechanism(graph, xs[n], ys[n], psi);
                    }
                }
                total += wt * wp * lik;
            }
        }
        probs.push(total);
    }
    JointTable::new(axes, probs)
}

fn bernoulli(v: u8, p: f64) -> f64 {
    if v == 1 {
        p
    } else {
        1.0 - p
    }
}

// p(x | parents, theta) for the X mechanism.
fn x_mechanism(graph: BivariateGraph, x: u8, y: u8, theta: f64) -> f64 {
    match graph {
        BivariateGraph::YToX => bernoulli((x != y) as u8, theta),
        _ => bernoulli(x, theta),
    }
}

// p(y | parents, psi) for the Y mechanism.
fn y_mechanism(graph: BivariateGraph, x: u8, y: u8, psi: f64) -> f64 {
    match graph {
        BivariateGraph::XToY => bernoulli((x != y) as u8, psi),
        _ => bernoulli(y, psi),
    }
}

/// Block table with the mechanism parameters held fixed (the i.i.d. case).
pub fn fixed_parameter_table(graph: BivariateGraph, theta: f64, psi: f64, num_positions: usize) -> Result<JointTable> {
    check_positions(num_positions)?;
    if !(0.0..=1.0).contains(&theta) || !(0.0..=1.0).contains(&psi) {
        return Err(Error::invalid("mechanism parameters must lie in [0, 1]"));
    }
    let axes = bivariate_axes(num_positions);
    let probs = configurations(&axes)
        .map(|config| {
            let (xs, ys) = split_config(&config);
            (0..num_positions)
                .map(|n| x_mechanism(graph, xs[n], ys[n], theta) * y_mechanism(graph, xs[n], ys[n], psi))
                .product()
        })
        .collect();
    JointTable::new(axes, probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::Assignment;

    fn prior() -> BetaPrior {
        BetaPrior::default()
    }

    #[test]
    fn empty_sequence_has_unit_likelihood() {
        assert!((marginal_likelihood(&[], prior()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_failures_under_beta_1_3() {
        // B(1,5)/B(1,3) = (1/5)/(1/3)
        let p = marginal_likelihood(&[0, 0], prior()).unwrap();
        assert!((p - 0.6).abs() < 1e-14);
    }

    #[test]
    fn marginal_likelihood_normalizes() {
        for n in 0..=4usize {
            let total: f64 = (0..1u32 << n)
                .map(|bits| {
                    let z: Vec<u8> = (0..n).map(|i| ((bits >> i) & 1) as u8).collect();
                    marginal_likelihood(&z, BetaPrior::new(0.7, 2.3).unwrap()).unwrap()
                })
                .sum();
            assert!((total - 1.0).abs() < 1e-13, "n = {n}: {total}");
        }
    }

    #[test]
    fn conjugate_counts_invariant() {
        let c = ConjugateCounts::from_sequence(&[1, 0, 1, 1], prior());
        assert_eq!((c.successes, c.trials), (3, 4));
        assert_eq!(c.alpha_post + c.beta_post, 1.0 + 3.0 + 4.0);
    }

    #[test]
    fn golden_conditional_read_off() {
        let t = analytic_block_table(BivariateGraph::XToY, prior(), 2).unwrap();
        let given = Assignment::from([
            (AxisKey::new(0, 0), 0),
            (AxisKey::new(0, 1), 0),
            (AxisKey::new(1, 1), 0),
        ]);
        let c = t.condition(&given).unwrap();
        assert!((c.probs()[0] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn post_interventional_golden_cell() {
        let iv = InterventionSet::single(0, 0, 0);
        let t = analytic_post_interventional(BivariateGraph::XToY, prior(), 2, &iv).unwrap();
        // P(y1=0, y2=0 | 0, 0) * P(x2=0) = (3/5)(3/4)
        assert!((t.prob(&[0, 0, 0, 0]).unwrap() - 0.45).abs() < 1e-14);
        assert_eq!(t.prob(&[1, 0, 0, 0]).unwrap(), 0.0);
    }

    #[test]
    fn conjugate_and_quadrature_agree() {
        for graph in BivariateGraph::ALL {
            let a = analytic_block_table(graph, prior(), 2).unwrap();
            let q = quadrature_block_table(graph, prior(), 2, DEFAULT_NODES).unwrap();
            assert!(a.max_abs_diff(&q).unwrap() < 1e-12);
        }
    }

    #[test]
    fn legendre_route_agrees_for_integer_prior() {
        let iv = InterventionSet::single(1, 1, 1);
        let a = analytic_post_interventional(BivariateGraph::YToX, prior(), 2, &iv).unwrap();
        let q = quadrature_post_interventional(BivariateGraph::YToX, prior(), 2, &iv, 16, BetaRule::Legendre).unwrap();
        assert!(a.max_abs_diff(&q).unwrap() < 1e-12);
    }

    #[test]
    fn independent_graph_factorizes_into_blocks() {
        let t = quadrature_block_table(BivariateGraph::Independent, prior(), 2, DEFAULT_NODES).unwrap();
        let xs = t.marginalize(&[AxisKey::new(0, 0), AxisKey::new(0, 1)]).unwrap();
        let ys = t.marginalize(&[AxisKey::new(1, 0), AxisKey::new(1, 1)]).unwrap();
        let prod = JointTable::product(&[xs, ys]).unwrap();
        assert!(t.max_abs_diff(&prod).unwrap() < 1e-10);
    }

    #[test]
    fn degenerate_prior_approaches_fixed_parameters() {
        let (k, p) = (1e6, 0.3);
        let sharp = BetaPrior::new(k * p, k * (1.0 - p)).unwrap();
        for graph in BivariateGraph::ALL {
            let q = quadrature_block_table(graph, sharp, 2, DEFAULT_NODES).unwrap();
            let fixed = fixed_parameter_table(graph, p, p, 2).unwrap();
            let err = q.max_abs_diff(&fixed).unwrap();
            assert!(err < 1e-4, "{graph}: {err}");
        }
    }

    #[test]
    fn validates_arguments() {
        assert!(analytic_block_table(BivariateGraph::XToY, prior(), 0).is_err());
        assert!(analytic_block_table(BivariateGraph::XToY, prior(), 9).is_err());
        assert!(quadrature_block_table(BivariateGraph::XToY, prior(), 2, 8).is_err());
        let bad = InterventionSet::single(2, 0, 0);
        assert!(analytic_post_interventional(BivariateGraph::XToY, prior(), 2, &bad).is_err());
        let bad = InterventionSet::single(0, 0, 2);
        assert!(analytic_post_interventional(BivariateGraph::XToY, prior(), 2, &bad).is_err());
    }
}
