//! Gauss quadrature rules on (0, 1) built with the Golub–Welsch method.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::simulate::BetaPrior;

/// Nodes on (0, 1) with weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// How the Beta density enters the rule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BetaRule {
    /// Gauss–Jacobi: the Beta density is the weight function, so Bernoulli
    /// likelihoods (polynomials) integrate exactly for any shape parameters.
    #[default]
    Jacobi,
    /// Gauss–Legendre with the density multiplied into the integrand; exact
    /// only when the shape parameters are small integers.
    Legendre,
}

impl QuadratureRule {
    /// Gauss–Legendre rule, uniform weight on (0, 1).
    pub fn legendre(n: usize) -> Result<Self> {
        QuadratureRule::jacobi(n, 0.0, 0.0)
    }

    /// Rule for the probability measure `Beta(alpha, beta)` on (0, 1).
    pub fn beta(n: usize, prior: BetaPrior, kind: BetaRule) -> Result<Self> {
        match kind {
            BetaRule::Jacobi => QuadratureRule::jacobi(n, prior.beta - 1.0, prior.alpha - 1.0),
            BetaRule::Legendre => {
                let base = QuadratureRule::legendre(n)?;
                let mut weights: Vec<f64> = base
                    .nodes
                    .iter()
                    .zip(&base.weights)
                    .map(|(&t, &w)| w * t.powf(prior.alpha - 1.0) * (1.0 - t).powf(prior.beta - 1.0))
                    .collect();
                let total: f64 = weights.iter().sum();
                weights.iter_mut().for_each(|w| *w /= total);
                Ok(QuadratureRule {
                    nodes: base.nodes,
                    weights,
                })
            }
        }
    }

    /// Gauss–Jacobi rule for weight `(1 - x)^a (1 + x)^b` on [-1, 1],
    /// mapped to (0, 1) through `t = (1 + x) / 2`.
    pub fn jacobi(n: usize, a: f64, b: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("quadrature needs at least one node"));
        }
        if !(a > -1.0 && b > -1.0) {
            return Err(Error::invalid(format!(
                "Jacobi exponents must exceed -1, got ({a}, {b})"
            )));
        }
        let mut jm = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            jm[(k, k)] = jacobi_diag(k, a, b);
            if k + 1 < n {
                let off = jacobi_offdiag_sq(k + 1, a, b).sqrt();
                jm[(k, k + 1)] = off;
                jm[(k + 1, k)] = off;
            }
        }
        let eig = SymmetricEigen::new(jm);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let v0 = eig.eigenvectors[(0, k)];
                ((1.0 + eig.eigenvalues[k]) / 2.0, v0 * v0)
            })
            .collect();
        pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        Ok(QuadratureRule {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1 / total).collect(),
        })
    }

    /// Weighted sum of `f` over the nodes.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }
}

// Recurrence coefficients of the monic Jacobi polynomials.
fn jacobi_diag(k: usize, a: f64, b: f64) -> f64 {
    let s = a + b;
    if k == 0 {
        return (b - a) / (s + 2.0);
    }
    let m = 2.0 * k as f64 + s;
    (b - a) * (b + a) / (m * (m + 2.0))
}

fn jacobi_offdiag_sq(k: usize, a: f64, b: f64) -> f64 {
    let s = a + b;
    if k == 1 {
        return 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + s).powi(2) * (3.0 + s));
    }
    let kf = k as f64;
    let m = 2.0 * kf + s;
    4.0 * kf * (kf + a) * (kf + b) * (kf + s) / (m * m * (m + 1.0) * (m - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let rule = QuadratureRule::legendre(8).unwrap();
        for k in 0..16 {
            let got = rule.integrate(|t| t.powi(k));
            assert!((got - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "t^{k}: {got}");
        }
    }

    #[test]
    fn legendre_nodes_match_reference() {
        // two-point rule on (0,1): 1/2 -+ 1/(2 sqrt 3)
        let rule = QuadratureRule::legendre(2).unwrap();
        let h = 0.5 / 3f64.sqrt();
        assert!((rule.nodes[0] - (0.5 - h)).abs() < 1e-15);
        assert!((rule.nodes[1] - (0.5 + h)).abs() < 1e-15);
        assert!((rule.weights[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn beta_rule_reproduces_moments() {
        // E[t^k] under Beta(a, b) = prod_{j<k} (a + j) / (a + b + j)
        for &(a, b) in &[(1.0, 3.0), (0.5, 0.7), (4.2, 1.3), (2.0, 2.0)] {
            let prior = BetaPrior::new(a, b).unwrap();
            let rule = QuadratureRule::beta(16, prior, BetaRule::Jacobi).unwrap();
            let mut expected = 1.0;
            for k in 0..20 {
                let got = rule.integrate(|t| t.powi(k));
                assert!(
                    (got - expected).abs() < 1e-13,
                    "Beta({a},{b}) moment {k}: {got} vs {expected}"
                );
                expected *= (a + k as f64) / (a + b + k as f64);
            }
        }
    }

    #[test]
    fn legendre_fold_is_exact_for_integer_shapes() {
        let prior = BetaPrior::new(1.0, 3.0).unwrap();
        let j = QuadratureRule::beta(16, prior, BetaRule::Jacobi).unwrap();
        let l = QuadratureRule::beta(16, prior, BetaRule::Legendre).unwrap();
        for k in 0..6 {
            let f = |t: f64| t.powi(k) * (1.0 - t).powi(2);
            assert!((j.integrate(f) - l.integrate(f)).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_invalid_rules() {
        assert!(QuadratureRule::legendre(0).is_err());
        assert!(QuadratureRule::jacobi(4, -1.0, 0.0).is_err());
    }
}
