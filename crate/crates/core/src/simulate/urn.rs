//! The causal Pólya urn.
//!
//! Two compartments start with `alpha` black and `beta` white balls each.
//! Every step draws one ball from each side: `X = 1` iff the left ball is
//! black, `Y = 1` iff the two colors disagree. The left side then receives a
//! ball of `X`'s color and the right side a ball of `Z = X xor Y`'s color,
//! which is always the color of the right-hand draw.
//!
//! Black encodes the value 1 for both `X` and `Z`, so `alpha` counts
//! successes and the joint law is the closed form in [`polya_joint_log_prob`].

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng as _;
use statrs::function::gamma::ln_gamma;

use super::BetaPrior;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Rng};

/// Ball counts after `step` draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UrnState {
    pub step: u64,
    pub left_black: u64,
    pub left_white: u64,
    pub right_black: u64,
    pub right_white: u64,
}

impl UrnState {
    pub fn left_total(&self) -> u64 {
        self.left_black + self.left_white
    }

    pub fn right_total(&self) -> u64 {
        self.right_black + self.right_white
    }
}

/// Urn with explicit state, for replaying observed histories before sampling.
#[derive(Clone, Debug)]
pub struct CausalUrn {
    state: UrnState,
}

impl CausalUrn {
    pub fn new(prior: BetaPrior) -> Result<Self> {
        let (alpha, beta) = prior.as_counts()?;
        Ok(CausalUrn {
            state: UrnState {
                step: 0,
                left_black: alpha,
                left_white: beta,
                right_black: alpha,
                right_white: beta,
            },
        })
    }

    /// Urn after replacing balls for an observed sequence of `(x, y)` pairs.
    pub fn from_history(prior: BetaPrior, history: &[(u8, u8)]) -> Result<Self> {
        let mut urn = CausalUrn::new(prior)?;
        for &(x, y) in history {
            if x > 1 || y > 1 {
                return Err(Error::invalid("urn observations must be binary"));
            }
            urn.replace(x, x ^ y);
        }
        Ok(urn)
    }

    pub fn state(&self) -> UrnState {
        self.state
    }

    /// Probability that the next pair is `(x, y)` absent intervention.
    pub fn next_pair_prob(&self, x: u8, y: u8) -> f64 {
        let s = &self.state;
        let px = if x == 1 { s.left_black } else { s.left_white } as f64 / s.left_total() as f64;
        let z = x ^ y;
        let pz = if z == 1 { s.right_black } else { s.right_white } as f64 / s.right_total() as f64;
        px * pz
    }

    /// Draws one pair. `forced` swaps the left ball for one of the given
    /// color before `Y` is read; the replacement then uses the forced color.
    pub fn step(&mut self, rng: &mut Rng, forced: Option<u8>) -> (u8, u8) {
        let s = self.state;
        let left = (rng.random_range(0..s.left_total()) < s.left_black) as u8;
        let right = (rng.random_range(0..s.right_total()) < s.right_black) as u8;
        let x = forced.unwrap_or(left);
        let y = x ^ right;
        self.replace(x, right);
        (x, y)
    }

    fn replace(&mut self, x: u8, z: u8) {
        let s = &mut self.state;
        if x == 1 {
            s.left_black += 1;
        } else {
            s.left_white += 1;
        }
        if z == 1 {
            s.right_black += 1;
        } else {
            s.right_white += 1;
        }
        s.step += 1;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UrnTrace {
    pub xs: Vec<u8>,
    pub ys: Vec<u8>,
    pub zs: Vec<u8>,
    pub interventions: BTreeMap<usize, u8>,
    /// `states[0]` is the initial urn; `states[n + 1]` follows step `n`.
    pub states: Vec<UrnState>,
}

impl UrnTrace {
    /// Writes `step,x,y,z,intervened,left_black,left_white,right_black,right_white`,
    /// with counts taken after each step's replacement.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let to_err = |e: csv::Error| Error::parse(0, e.to_string());
        w.write_record([
            "step",
            "x",
            "y",
            "z",
            "intervened",
            "left_black",
            "left_white",
            "right_black",
            "right_white",
        ])
        .map_err(to_err)?;
        for n in 0..self.xs.len() {
            let s = self.states[n + 1];
            w.write_record(&[
                n.to_string(),
                self.xs[n].to_string(),
                self.ys[n].to_string(),
                self.zs[n].to_string(),
                (self.interventions.contains_key(&n) as u8).to_string(),
                s.left_black.to_string(),
                s.left_white.to_string(),
                s.right_black.to_string(),
                s.right_white.to_string(),
            ])
            .map_err(to_err)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))
    }
}

/// Runs the urn for `n_steps` draws, forcing `X` at the given positions.
pub fn polya_urn_run(
    prior: BetaPrior,
    n_steps: usize,
    interventions: &BTreeMap<usize, u8>,
    seed: u64,
) -> Result<UrnTrace> {
    if let Some((&pos, _)) = interventions.iter().find(|(&p, _)| p >= n_steps) {
        return Err(Error::invalid(format!(
            "intervention at step {pos} beyond {n_steps} steps"
        )));
    }
    if interventions.values().any(|&v| v > 1) {
        return Err(Error::invalid("intervened values must be binary"));
    }
    let mut urn = CausalUrn::new(prior)?;
    let mut rng = stream_rng(seed, 0);
    let mut trace = UrnTrace {
        xs: Vec::with_capacity(n_steps),
        ys: Vec::with_capacity(n_steps),
        zs: Vec::with_capacity(n_steps),
        interventions: interventions.clone(),
        states: vec![urn.state()],
    };
    for n in 0..n_steps {
        let (x, y) = urn.step(&mut rng, interventions.get(&n).copied());
        trace.xs.push(x);
        trace.ys.push(y);
        trace.zs.push((1 - x) * y + (1 - y) * x);
        trace.states.push(urn.state());
    }
    Ok(trace)
}

/// Log-probability of an observed `(x, y)` sequence under the unintervened urn.
///
/// With `m1 = #{x = 1}` and `m2 = #{z = 1}` the probability is
/// `B(alpha + m1, beta + n - m1) / B(alpha, beta) * B(alpha + m2, beta + n - m2) / B(alpha, beta)`,
/// which depends on the sequence only through its counts.
pub fn polya_joint_log_prob(xs: &[u8], ys: &[u8], prior: BetaPrior) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} x values and {} y values",
            xs.len(),
            ys.len()
        )));
    }
    if xs.iter().chain(ys).any(|&v| v > 1) {
        return Err(Error::invalid("urn observations must be binary"));
    }
    let n = xs.len() as f64;
    let m1 = xs.iter().filter(|&&x| x == 1).count() as f64;
    let m2 = xs.iter().zip(ys).filter(|(&x, &y)| x != y).count() as f64;
    let (a, b) = (prior.alpha, prior.beta);
    let half = |m: f64| {
        ln_gamma(a + m) + ln_gamma(b + n - m) + ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) - ln_gamma(a + b + n)
    };
    Ok(half(m1) + half(m2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> BetaPrior {
        BetaPrior::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn single_pair_probability() {
        // (beta/(alpha+beta)) * (alpha/(alpha+beta)) with alpha = beta = 1
        let lp = polya_joint_log_prob(&[1], &[1], unit()).unwrap();
        assert!((lp.exp() - 0.25).abs() < 1e-14);
        let urn = CausalUrn::new(unit()).unwrap();
        assert!((urn.next_pair_prob(1, 1) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn closed_form_matches_sequential_product() {
        let prior = BetaPrior::new(2.0, 3.0).unwrap();
        let xs = [1, 0, 1, 1, 0];
        let ys = [0, 0, 1, 0, 1];
        let mut urn = CausalUrn::new(prior).unwrap();
        let mut p = 1.0;
        for (&x, &y) in xs.iter().zip(&ys) {
            p *= urn.next_pair_prob(x, y);
            urn.replace(x, x ^ y);
        }
        let lp = polya_joint_log_prob(&xs, &ys, prior).unwrap();
        assert!((lp.exp() - p).abs() < 1e-14);
    }

    #[test]
    fn state_counts_grow_by_one_per_step() {
        let prior = BetaPrior::new(2.0, 3.0).unwrap();
        let iv = BTreeMap::from([(3, 0u8), (7, 1u8)]);
        let trace = polya_urn_run(prior, 25, &iv, 4).unwrap();
        for (k, s) in trace.states.iter().enumerate() {
            assert_eq!(s.step, k as u64);
            assert_eq!(s.left_total(), 5 + k as u64);
            assert_eq!(s.right_total(), 5 + k as u64);
        }
        assert_eq!(trace.xs[3], 0);
        assert_eq!(trace.xs[7], 1);
        for n in 0..25 {
            assert_eq!(trace.zs[n], trace.xs[n] ^ trace.ys[n]);
        }
    }

    #[test]
    fn intervention_drives_the_left_replacement() {
        let prior = unit();
        let iv = BTreeMap::from([(0, 1u8)]);
        let trace = polya_urn_run(prior, 1, &iv, 0).unwrap();
        assert_eq!(trace.states[1].left_black, 2);
        assert_eq!(trace.states[1].left_white, 1);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(polya_urn_run(unit(), 3, &BTreeMap::from([(3, 0)]), 0).is_err());
        assert!(polya_urn_run(unit(), 3, &BTreeMap::from([(0, 2)]), 0).is_err());
        assert!(polya_urn_run(BetaPrior::new(0.5, 1.0).unwrap(), 3, &BTreeMap::new(), 0).is_err());
        assert!(polya_joint_log_prob(&[0, 1], &[0], unit()).is_err());
        assert!(polya_joint_log_prob(&[2], &[0], unit()).is_err());
    }

    #[test]
    fn trace_csv_header() {
        let trace = polya_urn_run(unit(), 2, &BTreeMap::from([(1, 0)]), 1).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "step,x,y,z,intervened,left_black,left_white,right_black,right_white"
        );
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(2).unwrap().starts_with("1,0,"));
    }
}
