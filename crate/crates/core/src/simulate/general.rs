use rand::Rng as _;
use rand_distr::{Distribution, Gamma};

use crate::dag::Dag;
use crate::dataset::ExchangeableDataset;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Rng};

pub const DEFAULT_CONCENTRATION: f64 = 1.0;

/// Samples an exchangeable dataset from independent Dirichlet-categorical
/// mechanisms over `dag`.
///
/// Per environment, every variable gets one conditional probability row per
/// parent configuration, drawn from a symmetric Dirichlet with the given
/// concentration. Positions are then sampled conditionally i.i.d. in
/// topological order.
pub fn sample_icm_general(
    dag: &Dag,
    cardinalities: &[usize],
    concentration: f64,
    num_envs: usize,
    num_positions: usize,
    seed: u64,
) -> Result<ExchangeableDataset> {
    let d = dag.num_vars();
    if cardinalities.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "{} cardinalities for {d} variables",
            cardinalities.len()
        )));
    }
    if cardinalities.iter().any(|&c| c < 2) {
        return Err(Error::invalid("every variable needs at least two categories"));
    }
    if !(concentration > 0.0 && concentration.is_finite()) {
        return Err(Error::invalid(format!("invalid concentration {concentration}")));
    }
    if num_envs == 0 || num_positions == 0 {
        return Err(Error::invalid("need at least one environment and one position"));
    }
    let gamma = Gamma::new(concentration, 1.0).map_err(|e| Error::invalid(e.to_string()))?;
    let parent_configs: Vec<usize> = (0..d)
        .map(|i| dag.parents(i).iter().map(|&p| cardinalities[p]).product())
        .collect();

    let mut values = Vec::with_capacity(num_envs * num_positions * d);
    let mut row = vec![0u32; d];
    for env in 0..num_envs {
        let mut rng = stream_rng(seed, env as u64);
        // cpts[i][parent_config * card_i + value]
        let cpts: Vec<Vec<f64>> = (0..d)
            .map(|i| {
                (0..parent_configs[i])
                    .flat_map(|_| dirichlet_row(&gamma, cardinalities[i], &mut rng))
                    .collect()
            })
            .collect();
        for _ in 0..num_positions {
            for &i in dag.topological_order() {
                let pc = dag
                    .parents(i)
                    .iter()
                    .fold(0usize, |acc, &p| acc * cardinalities[p] + row[p] as usize);
                let card = cardinalities[i];
                row[i] = categorical(&cpts[i][pc * card..(pc + 1) * card], &mut rng) as u32;
            }
            values.extend_from_slice(&row);
        }
    }
    ExchangeableDataset::new(num_envs, num_positions, cardinalities.to_vec(), values)
}

fn dirichlet_row(gamma: &Gamma<f64>, k: usize, rng: &mut Rng) -> Vec<f64> {
    let mut row: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
    let total: f64 = row.iter().sum();
    if total > 0.0 {
        row.iter_mut().for_each(|w| *w /= total);
    } else {
        // every gamma draw underflowed (tiny concentration): the Dirichlet
        // is then effectively a uniformly chosen vertex
        let hot = rng.random_range(0..k);
        row.iter_mut()
            .enumerate()
            .for_each(|(j, w)| *w = (j == hot) as u8 as f64);
    }
    row
}

fn categorical(probs: &[f64], rng: &mut Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (j, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return j;
        }
    }
    probs.len() - 1
}
