#![allow(dead_code)]

use dofinetti::table::configurations;
use dofinetti::{Axis, AxisKey, Dag, InterventionSet, JointTable};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Position-major block axes: (0,0), (1,0), ..., (0,1), (1,1), ...
pub fn block_axes(cards: &[usize], positions: usize) -> Vec<Axis> {
    (0..positions)
        .flat_map(|n| cards.iter().enumerate().map(move |(i, &c)| Axis::new(i, n, c)))
        .collect()
}

pub fn random_simplex(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.05).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Random table with every cell strictly positive.
pub fn random_table(rng: &mut ChaCha8Rng, axes: Vec<Axis>) -> JointTable {
    let size: usize = axes.iter().map(|a| a.card).product();
    JointTable::new(axes, random_simplex(rng, size)).unwrap()
}

/// An exchangeable process with independent mechanisms: each mechanism `i`
/// is a finite mixture over `K` conditional tables, mixed independently of
/// the other mechanisms.
pub struct MixtureIcm {
    pub dag: Dag,
    pub cards: Vec<usize>,
    // [var][component] -> (weight, cpt indexed by parent config then value)
    pub components: Vec<Vec<(f64, Vec<Vec<f64>>)>>,
}

impl MixtureIcm {
    pub fn random(rng: &mut ChaCha8Rng, dag: Dag, cards: Vec<usize>, k: usize) -> Self {
        let components = (0..dag.num_vars())
            .map(|i| {
                let pa_configs: usize = dag.parents(i).iter().map(|&p| cards[p]).product();
                let w = random_simplex(rng, k);
                w.into_iter()
                    .map(|wk| (wk, (0..pa_configs).map(|_| random_simplex(rng, cards[i])).collect()))
                    .collect()
            })
            .collect();
        MixtureIcm { dag, cards, components }
    }

    fn pa_index(&self, i: usize, row: impl Fn(usize) -> usize) -> usize {
        self.dag
            .parents(i)
            .iter()
            .fold(0, |acc, &p| acc * self.cards[p] + row(p))
    }

    /// Exact post-interventional block table: forced axes are point masses
    /// and drop out of their mechanism's mixture.
    pub fn table(&self, positions: usize, intervention: &InterventionSet) -> JointTable {
        let axes = block_axes(&self.cards, positions);
        let d = self.cards.len();
        let probs = configurations(&axes)
            .map(|config| {
                let val = |i: usize, n: usize| config[n * d + i];
                for (k, v) in intervention.iter() {
                    if val(k.var, k.pos) != v {
                        return 0.0;
                    }
                }
                let mut p = 1.0;
                for i in 0..d {
                    let mix: f64 = self.components[i]
                        .iter()
                        .map(|(w, cpt)| {
                            let mut q = *w;
                            for n in 0..positions {
                                if intervention.get(AxisKey::new(i, n)).is_none() {
                                    q *= cpt[self.pa_index(i, |p| val(p, n))][val(i, n)];
                                }
                            }
                            q
                        })
                        .sum();
                    p *= mix;
                }
                p
            })
            .collect();
        JointTable::new(axes, probs).unwrap()
    }
}

/// Random DAG over `d` variables whose edges respect a random order.
pub fn random_dag(rng: &mut ChaCha8Rng, d: usize) -> Dag {
    let mut order: Vec<usize> = (0..d).collect();
    for i in (1..d).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut edges = Vec::new();
    for a in 0..d {
        for b in a + 1..d {
            if rng.random_bool(0.5) {
                edges.push((order[a], order[b]));
            }
        }
    }
    Dag::new(d, edges).unwrap()
}
