//! Histogram estimation and post-interventional distributions.
//!
//! For an intervention assigning `x̂` to a set of (variable, position) axes,
//! the post-interventional block distribution is
//!
//! ```text
//! prod_{i intervened}   P(x_{i;S_i} | pa_{i;S_i})        S_i = positions where i is not forced
//! prod_{i otherwise}    P(x_{i;all} | pa_{i;all})
//! ```
//!
//! restricted to configurations agreeing with `x̂`. Each conditional is read
//! off the pre-interventional block table. Unlike the i.i.d. truncated
//! factorization, the conditionals span every position at once, which keeps
//! the dependence that shared mechanism parameters induce across positions.

use std::collections::{BTreeSet, HashSet};

use crate::dag::Dag;
use crate::dataset::ExchangeableDataset;
use crate::error::{Error, Result};
use crate::query::{InterventionSet, Query};
use crate::table::{format_assignment, Assignment, Axis, AxisKey, JointTable, ZeroMassPolicy};

/// Histogram of complete block configurations: one count per environment.
pub fn fit_joint(dataset: &ExchangeableDataset) -> JointTable {
    fit_joint_smoothed(dataset, 0.0).expect("unsmoothed histogram of a nonempty dataset")
}

/// Histogram with `lambda` added to every cell before normalizing.
pub fn fit_joint_smoothed(dataset: &ExchangeableDataset, lambda: f64) -> Result<JointTable> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("smoothing must be nonnegative, got {lambda}")));
    }
    let axes = dataset.block_axes();
    let size: usize = axes.iter().map(|a| a.card).product();
    let mut counts = vec![lambda; size];
    for env in 0..dataset.num_envs() {
        let idx = dataset
            .block(env)
            .iter()
            .zip(&axes)
            .fold(0usize, |acc, (&v, a)| acc * a.card + v as usize);
        counts[idx] += 1.0;
    }
    JointTable::from_weights(axes, counts)
}

/// Pools every (environment, position) row into one single-position table
/// over axes `(i, 0)`, treating rows as i.i.d.
pub fn fit_pooled_rows(dataset: &ExchangeableDataset) -> JointTable {
    let axes: Vec<Axis> = dataset
        .cardinalities()
        .iter()
        .enumerate()
        .map(|(var, &card)| Axis::new(var, 0, card))
        .collect();
    let size: usize = axes.iter().map(|a| a.card).product();
    let mut counts = vec![0.0; size];
    let d = dataset.num_vars();
    for env in 0..dataset.num_envs() {
        for row in dataset.block(env).chunks(d) {
            let idx = row
                .iter()
                .zip(&axes)
                .fold(0usize, |acc, (&v, a)| acc * a.card + v as usize);
            counts[idx] += 1.0;
        }
    }
    JointTable::from_weights(axes, counts).expect("dataset has at least one row")
}

/// Positions of a table covering every variable of `dag` at each position,
/// with one cardinality per variable.
fn block_positions(table: &JointTable, dag: &Dag) -> Result<Vec<usize>> {
    let d = dag.num_vars();
    let positions: Vec<usize> = table
        .keys()
        .map(|k| k.pos)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut cards = vec![0usize; d];
    for a in table.axes() {
        if a.key.var >= d {
            return Err(Error::DimensionMismatch(format!(
                "table axis {} outside the graph's {d} variables",
                a.key
            )));
        }
        if cards[a.key.var] != 0 && cards[a.key.var] != a.card {
            return Err(Error::DimensionMismatch(format!(
                "variable {} has inconsistent cardinality",
                a.key.var
            )));
        }
        cards[a.key.var] = a.card;
    }
    if table.axes().len() != d * positions.len() {
        return Err(Error::DimensionMismatch(format!(
            "table does not cover all {d} variables at each of {} positions",
            positions.len()
        )));
    }
    Ok(positions)
}

fn check_intervention(table: &JointTable, intervention: &InterventionSet) -> Result<()> {
    for (key, value) in intervention.iter() {
        let card = table.card(key).ok_or(Error::UnknownAxis(key))?;
        if value >= card {
            return Err(Error::ValueOutOfRange { axis: key, value, card });
        }
    }
    Ok(())
}

/// One conditional factor `P(x_{i;S} | pa_{i;S})`, indexed into the output lattice.
struct Factor {
    child_card: f64,
    joint: JointTable,
    joint_idx: Vec<usize>,
    parents: Option<(JointTable, Vec<usize>)>,
}

impl Factor {
    fn build(table: &JointTable, dag: &Dag, var: usize, positions: &[usize]) -> Result<Self> {
        let child: Vec<AxisKey> = positions.iter().map(|&n| AxisKey::new(var, n)).collect();
        let parent: Vec<AxisKey> = positions
            .iter()
            .flat_map(|&n| dag.parents(var).iter().map(move |&j| AxisKey::new(j, n)))
            .collect();
        let keys: Vec<AxisKey> = child.iter().chain(&parent).copied().collect();
        let locate = |ks: &[AxisKey]| -> Result<Vec<usize>> {
            ks.iter()
                .map(|&k| table.axis_index(k).ok_or(Error::UnknownAxis(k)))
                .collect()
        };
        let child_card = child.iter().map(|&k| table.card(k).unwrap_or(1) as f64).product();
        let parents = if parent.is_empty() {
            None
        } else {
            Some((table.marginalize(&parent)?, locate(&parent)?))
        };
        Ok(Factor {
            child_card,
            joint: table.marginalize(&keys)?,
            joint_idx: locate(&keys)?,
            parents,
        })
    }

    fn value(
        &self,
        config: &[usize],
        scratch: &mut Vec<usize>,
        policy: ZeroMassPolicy<'_>,
        describe: impl FnOnce() -> String,
    ) -> Result<f64> {
        scratch.clear();
        scratch.extend(self.joint_idx.iter().map(|&i| config[i]));
        let num = self.joint.prob(scratch)?;
        let Some((parents, idx)) = &self.parents else {
            return Ok(num);
        };
        scratch.clear();
        scratch.extend(idx.iter().map(|&i| config[i]));
        let den = parents.prob(scratch)?;
        if den > 0.0 {
            Ok(num / den)
        } else {
            policy.on_zero_mass(describe)?;
            Ok(1.0 / self.child_card)
        }
    }
}

/// Post-interventional block distribution via the exchangeable truncated
/// factorization. Zero-mass parent contexts are an error. With no
/// intervention the result is the table's own graph factorization, which
/// equals the table when the table factorizes along `dag`.
pub fn truncated_factorization(table: &JointTable, dag: &Dag, intervention: &InterventionSet) -> Result<JointTable> {
    truncated_factorization_with(table, dag, intervention, ZeroMassPolicy::Strict)
}

pub fn truncated_factorization_with(
    table: &JointTable,
    dag: &Dag,
    intervention: &InterventionSet,
    policy: ZeroMassPolicy<'_>,
) -> Result<JointTable> {
    let positions = block_positions(table, dag)?;
    check_intervention(table, intervention)?;

    let mut factors = Vec::with_capacity(dag.num_vars());
    for &var in dag.topological_order() {
        let forced = intervention.positions_of(var);
        let free: Vec<usize> = positions.iter().copied().filter(|n| !forced.contains(n)).collect();
        if !free.is_empty() {
            factors.push((var, Factor::build(table, dag, var, &free)?));
        }
    }
    let forced: Vec<(usize, usize)> = intervention
        .iter()
        .map(|(k, v)| (table.axis_index(k).expect("checked above"), v))
        .collect();

    let mut probs = Vec::with_capacity(table.len());
    let mut scratch = Vec::new();
    for (config, _) in table.cells() {
        if forced.iter().any(|&(i, v)| config[i] != v) {
            probs.push(0.0);
            continue;
        }
        // Factors run in topological order, so a positive running product
        // means the current parent context is reachable after intervention.
        let mut p = 1.0;
        for (var, factor) in &factors {
            p *= factor.value(&config, &mut scratch, policy, || {
                format!("parents of variable {var} in configuration {config:?}")
            })?;
            if p == 0.0 {
                break;
            }
        }
        probs.push(p);
    }
    JointTable::new(table.axes().to_vec(), probs)
}

/// `P(targets | do(intervention), conditioning)`: truncated factorization,
/// then conditioning, then marginalization onto the targets in query order.
pub fn answer_query(table: &JointTable, dag: &Dag, query: &Query) -> Result<JointTable> {
    answer_query_with(table, dag, query, ZeroMassPolicy::Strict)
}

pub fn answer_query_with(
    table: &JointTable,
    dag: &Dag,
    query: &Query,
    policy: ZeroMassPolicy<'_>,
) -> Result<JointTable> {
    for &t in &query.targets {
        if !table.contains(t) {
            return Err(Error::UnknownAxis(t));
        }
    }
    for (&k, &v) in &query.conditioning {
        if let Some(forced) = query.intervention.get(k) {
            if forced != v {
                return Err(Error::ConditioningInconsistent(k));
            }
        }
    }
    let post = truncated_factorization_with(table, dag, &query.intervention, policy)?;
    let conditioned = if query.conditioning.is_empty() {
        post
    } else {
        post.condition_with(&query.conditioning, policy)?
    };
    conditioned.marginalize(&query.targets)
}

/// Parent adjustment: `sum_pa P(targets | x̂, pa) P(pa)` where `pa` ranges
/// over the parents of every intervened axis.
///
/// The intervention must force the same variable set `intervened_vars` at
/// each position it touches, and targets must sit at those positions.
/// The adjustment is valid only when no parent of an intervened variable
/// descends from another intervened variable; a single intervened variable
/// always qualifies.
pub fn parent_adjustment(
    table: &JointTable,
    dag: &Dag,
    intervened_vars: &BTreeSet<usize>,
    targets: &[AxisKey],
    values: &InterventionSet,
) -> Result<JointTable> {
    block_positions(table, dag)?;
    check_intervention(table, values)?;
    let positions = values.positions();
    for &n in &positions {
        let at_n: BTreeSet<usize> = values.iter().filter(|(k, _)| k.pos == n).map(|(k, _)| k.var).collect();
        if &at_n != intervened_vars {
            return Err(Error::InconsistentInterventionPattern(format!(
                "position {n} intervenes on {at_n:?}, expected {intervened_vars:?}"
            )));
        }
    }
    for &t in targets {
        if !table.contains(t) {
            return Err(Error::UnknownAxis(t));
        }
        if intervened_vars.contains(&t.var) || !positions.contains(&t.pos) {
            return Err(Error::InconsistentInterventionPattern(format!(
                "target {t} must be a non-intervened variable at an intervened position"
            )));
        }
    }

    let forced: BTreeSet<AxisKey> = values.iter().map(|(k, _)| k).collect();
    let mut parent_keys: Vec<AxisKey> = Vec::new();
    let mut seen = HashSet::new();
    for k in &forced {
        for &j in dag.parents(k.var) {
            let pk = AxisKey::new(j, k.pos);
            if !forced.contains(&pk) && seen.insert(pk) {
                parent_keys.push(pk);
            }
        }
    }
    // Variables summed over: targets plus any parents not already targeted.
    let mut free: Vec<AxisKey> = targets.to_vec();
    free.extend(parent_keys.iter().filter(|k| !targets.contains(k)));
    let forced_keys: Vec<AxisKey> = forced.iter().copied().collect();
    let all: Vec<AxisKey> = free.iter().chain(&forced_keys).copied().collect();
    let joint = table.marginalize(&all)?;
    let pa_table = table.marginalize(&parent_keys)?;
    let xpa_keys: Vec<AxisKey> = forced_keys.iter().chain(&parent_keys).copied().collect();
    let xpa_table = table.marginalize(&xpa_keys)?;

    let free_axes: Vec<Axis> = free
        .iter()
        .map(|&k| Axis {
            key: k,
            card: table.card(k).expect("checked"),
        })
        .collect();
    let target_axes: Vec<Axis> = free_axes[..targets.len()].to_vec();
    let target_size: usize = target_axes.iter().map(|a| a.card).product();
    let mut out = vec![0.0; target_size];
    let forced_vals: Vec<usize> = forced_keys.iter().map(|&k| values.get(k).expect("forced")).collect();
    let pos_in_free = |k: &AxisKey| free.iter().position(|f| f == k).expect("parent in free set");
    for u in crate::table::configurations(&free_axes) {
        let mut full = u.clone();
        full.extend_from_slice(&forced_vals);
        let p_joint = joint.prob(&full)?;
        let pa_vals: Vec<usize> = parent_keys.iter().map(|k| u[pos_in_free(k)]).collect();
        let p_pa = pa_table.prob(&pa_vals)?;
        if p_pa == 0.0 {
            continue;
        }
        let mut xpa = forced_vals.clone();
        xpa.extend_from_slice(&pa_vals);
        let p_xpa = xpa_table.prob(&xpa)?;
        if p_xpa == 0.0 {
            let ctx: Assignment = xpa_keys.iter().copied().zip(xpa).collect();
            return Err(Error::ZeroMassContext {
                context: format_assignment(&ctx),
            });
        }
        let idx = u[..targets.len()]
            .iter()
            .zip(&target_axes)
            .fold(0usize, |acc, (&v, a)| acc * a.card + v);
        out[idx] += p_joint * p_pa / p_xpa;
    }
    JointTable::new(target_axes, out)
}

/// The i.i.d. truncated factorization: positions are independent copies of
/// `row_table`, and at each position the forced variables drop their own
/// factor `P(x_i | pa_i)`.
///
/// `row_table` holds one axis per variable, all at a single position.
pub fn iid_truncated_factorization(
    row_table: &JointTable,
    dag: &Dag,
    intervention: &InterventionSet,
    num_positions: usize,
) -> Result<JointTable> {
    let d = dag.num_vars();
    let row_pos = row_table.axes().first().map(|a| a.key.pos).unwrap_or(0);
    if row_table.axes().len() != d || row_table.keys().any(|k| k.pos != row_pos) {
        return Err(Error::DimensionMismatch(
            "row table must hold every variable at a single position".into(),
        ));
    }
    if num_positions == 0 {
        return Err(Error::invalid("need at least one position"));
    }
    for (k, _) in intervention.iter() {
        if k.pos >= num_positions || k.var >= d {
            return Err(Error::UnknownAxis(k));
        }
    }
    let per_var: Vec<AxisKey> = (0..d).map(|v| AxisKey::new(v, row_pos)).collect();
    let canonical = row_table.permute(&per_var)?;
    let mut blocks = Vec::with_capacity(num_positions);
    for n in 0..num_positions {
        let at_n = canonical.relabel(|k| AxisKey::new(k.var, n))?;
        let local = InterventionSet::new(intervention.iter().filter(|(k, _)| k.pos == n))?;
        blocks.push(truncated_factorization(&at_n, dag, &local)?);
    }
    JointTable::product(&blocks)
}
