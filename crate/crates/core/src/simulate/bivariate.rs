use rand::Rng as _;
use rand_distr::{Beta, Distribution};

use super::BetaPrior;
use crate::dag::BivariateGraph;
use crate::dataset::ExchangeableDataset;
use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Samples the bivariate XOR process.
///
/// Each environment draws `theta, psi ~ prior` once; positions are then
/// conditionally i.i.d. given those parameters:
///
/// * `X->Y`: `X = Ber(theta)`, `Y = Ber(psi) xor X`
/// * `Y->X`: `Y = Ber(psi)`, `X = Ber(theta) xor Y`
/// * `X|Y`:  `X = Ber(theta)`, `Y = Ber(psi)`
///
/// Environment `e` uses random stream `e` under `seed`.
pub fn sample_icm_bivariate(
    graph: BivariateGraph,
    prior: BetaPrior,
    num_envs: usize,
    num_positions: usize,
    seed: u64,
) -> Result<ExchangeableDataset> {
    if num_envs == 0 || num_positions == 0 {
        return Err(Error::invalid("need at least one environment and one position"));
    }
    let beta = Beta::new(prior.alpha, prior.beta).map_err(|e| Error::invalid(format!("Beta prior: {e}")))?;
    let mut values = Vec::with_capacity(num_envs * num_positions * 2);
    for env in 0..num_envs {
        let mut rng = stream_rng(seed, env as u64);
        let theta = beta.sample(&mut rng);
        let psi = beta.sample(&mut rng);
        for _ in 0..num_positions {
            let a = rng.random_bool(theta) as u32;
            let b = rng.random_bool(psi) as u32;
            let (x, y) = match graph {
                BivariateGraph::XToY => (a, b ^ a),
                BivariateGraph::YToX => (a ^ b, b),
                BivariateGraph::Independent => (a, b),
            };
            values.push(x);
            values.push(y);
        }
    }
    ExchangeableDataset::new(num_envs, num_positions, vec![2, 2], values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn freq(ds: &ExchangeableDataset, f: impl Fn(&[u32]) -> bool) -> f64 {
        let hits = (0..ds.num_envs()).filter(|&e| f(ds.block(e))).count();
        hits as f64 / ds.num_envs() as f64
    }

    #[test]
    fn x_marginal_matches_prior_mean() {
        let n = 100_000;
        let ds = sample_icm_bivariate(BivariateGraph::XToY, BetaPrior::default(), n, 1, 11).unwrap();
        let p = freq(&ds, |b| b[0] == 1);
        let sigma = (0.25f64 * 0.75 / n as f64).sqrt();
        assert!((p - 0.25).abs() < 3.0 * sigma, "P(X=1) = {p}");
    }

    #[test]
    fn golden_conditional_frequency() {
        // P(Y1=0 | X1=0, X2=0, Y2=0) = 4/5 under Beta(1,3)
        let ds = sample_icm_bivariate(BivariateGraph::XToY, BetaPrior::default(), 100_000, 2, 5).unwrap();
        let ctx: Vec<usize> = (0..ds.num_envs())
            .filter(|&e| {
                let b = ds.block(e);
                b[0] == 0 && b[2] == 0 && b[3] == 0
            })
            .collect();
        let hits = ctx.iter().filter(|&&e| ds.block(e)[1] == 0).count();
        let m = ctx.len() as f64;
        let p = hits as f64 / m;
        let sigma = (0.8 * 0.2 / m).sqrt();
        assert!((p - 0.8).abs() < 3.0 * sigma, "estimate {p} from {m} contexts");
    }

    #[test]
    fn independent_graph_has_no_within_position_correlation() {
        let n = 100_000;
        let ds = sample_icm_bivariate(BivariateGraph::Independent, BetaPrior::default(), n, 1, 3).unwrap();
        let (mut sx, mut sy, mut sxy) = (0.0, 0.0, 0.0);
        for e in 0..n {
            let b = ds.block(e);
            sx += b[0] as f64;
            sy += b[1] as f64;
            sxy += (b[0] * b[1]) as f64;
        }
        let nf = n as f64;
        let cov = sxy / nf - (sx / nf) * (sy / nf);
        let corr = cov / ((sx / nf) * (1.0 - sx / nf) * (sy / nf) * (1.0 - sy / nf)).sqrt();
        assert!(corr.abs() < 3.0 / nf.sqrt(), "corr = {corr}");
    }

    #[test]
    fn seeded_runs_are_identical() {
        let a = sample_icm_bivariate(BivariateGraph::YToX, BetaPrior::default(), 50, 3, 9).unwrap();
        let b = sample_icm_bivariate(BivariateGraph::YToX, BetaPrior::default(), 50, 3, 9).unwrap();
        let c = sample_icm_bivariate(BivariateGraph::YToX, BetaPrior::default(), 50, 3, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_empty_shapes() {
        assert!(sample_icm_bivariate(BivariateGraph::XToY, BetaPrior::default(), 0, 2, 0).is_err());
        assert!(sample_icm_bivariate(BivariateGraph::XToY, BetaPrior::default(), 2, 0, 0).is_err());
    }
}
