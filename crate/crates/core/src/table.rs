//! Dense probability tables over (variable, position) axes.
//!
//! A [`JointTable`] stores one probability per configuration of its axes in
//! row-major order: the first axis varies slowest, so iterating the storage
//! visits configurations in lexicographic order of the axis list.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};

/// Tolerance used when validating that a table is normalized.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Identifies variable `var` observed at sequence position `pos` (both 0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AxisKey {
    pub var: usize,
    pub pos: usize,
}

impl AxisKey {
    pub const fn new(var: usize, pos: usize) -> Self {
        AxisKey { var, pos }
    }
}

impl fmt::Display for AxisKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.var, self.pos)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Axis {
    pub key: AxisKey,
    pub card: usize,
}

impl Axis {
    pub const fn new(var: usize, pos: usize, card: usize) -> Self {
        Axis {
            key: AxisKey::new(var, pos),
            card,
        }
    }
}

/// Observed or forced values keyed by axis.
pub type Assignment = BTreeMap<AxisKey, usize>;

/// Counts how often the uniform fallback replaced a zero-mass conditional.
#[derive(Debug, Default)]
pub struct FallbackCounter(AtomicUsize);

impl FallbackCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self) {
        self.0.fetch_add(1, Ordering::Relaxed);
    }

    pub fn count(&self) -> usize {
        self.0.load(Ordering::Relaxed)
    }
}

/// What to do when a conditional is requested on a context of probability zero.
#[derive(Clone, Copy, Debug, Default)]
pub enum ZeroMassPolicy<'a> {
    /// Fail with [`Error::ZeroMassContext`].
    #[default]
    Strict,
    /// Substitute the uniform distribution and bump the counter.
    Uniform(&'a FallbackCounter),
}

impl ZeroMassPolicy<'_> {
    /// Resolves a zero-mass context: `Ok(())` means "use uniform".
    pub(crate) fn on_zero_mass(&self, context: impl FnOnce() -> String) -> Result<()> {
        match self {
            ZeroMassPolicy::Strict => Err(Error::ZeroMassContext { context: context() }),
            ZeroMassPolicy::Uniform(counter) => {
                counter.record();
                Ok(())
            }
        }
    }
}

/// Exact probability table over a set of (variable, position) axes.
#[derive(Clone, Debug, PartialEq)]
pub struct JointTable {
    axes: Vec<Axis>,
    probs: Vec<f64>,
}

impl JointTable {
    /// Builds a table from probabilities laid out in lexicographic axis order.
    pub fn new(axes: Vec<Axis>, probs: Vec<f64>) -> Result<Self> {
        check_axes(&axes)?;
        let size = lattice_size(&axes);
        if probs.len() != size {
            return Err(Error::DimensionMismatch(format!(
                "expected {size} probabilities, got {}",
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::invalid(format!("invalid probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::invalid(format!("probabilities sum to {total}, not 1")));
        }
        Ok(JointTable { axes, probs })
    }

    /// Builds a table by normalizing nonnegative weights.
    pub fn from_weights(axes: Vec<Axis>, weights: Vec<f64>) -> Result<Self> {
        check_axes(&axes)?;
        let size = lattice_size(&axes);
        if weights.len() != size {
            return Err(Error::DimensionMismatch(format!(
                "expected {size} weights, got {}",
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::invalid(format!("invalid weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroMassContext {
                context: "all weights are zero".into(),
            });
        }
        let probs = weights.into_iter().map(|w| w / total).collect();
        Ok(JointTable { axes, probs })
    }

    pub fn uniform(axes: Vec<Axis>) -> Result<Self> {
        check_axes(&axes)?;
        let size = lattice_size(&axes);
        Ok(JointTable {
            axes,
            probs: vec![1.0 / size as f64; size],
        })
    }

    pub fn point_mass(axes: Vec<Axis>, config: &[usize]) -> Result<Self> {
        check_axes(&axes)?;
        let mut probs = vec![0.0; lattice_size(&axes)];
        let table = JointTable {
            axes,
            probs: Vec::new(),
        };
        let idx = table.index_of(config)?;
        probs[idx] = 1.0;
        Ok(JointTable { probs, ..table })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn keys(&self) -> impl Iterator<Item = AxisKey> + '_ {
        self.axes.iter().map(|a| a.key)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn axis_index(&self, key: AxisKey) -> Option<usize> {
        self.axes.iter().position(|a| a.key == key)
    }

    pub fn card(&self, key: AxisKey) -> Option<usize> {
        self.axes.iter().find(|a| a.key == key).map(|a| a.card)
    }

    pub fn contains(&self, key: AxisKey) -> bool {
        self.axis_index(key).is_some()
    }

    /// Flat storage index of a configuration.
    pub fn index_of(&self, config: &[usize]) -> Result<usize> {
        if config.len() != self.axes.len() {
            return Err(Error::DimensionMismatch(format!(
                "configuration has {} values for {} axes",
                config.len(),
                self.axes.len()
            )));
        }
        let mut idx = 0;
        for (axis, &v) in self.axes.iter().zip(config) {
            if v >= axis.card {
                return Err(Error::ValueOutOfRange {
                    axis: axis.key,
                    value: v,
                    card: axis.card,
                });
            }
            idx = idx * axis.card + v;
        }
        Ok(idx)
    }

    /// Configuration stored at a flat index.
    pub fn config_of(&self, mut index: usize) -> Vec<usize> {
        let mut config = vec![0; self.axes.len()];
        for (slot, axis) in config.iter_mut().zip(&self.axes).rev() {
            *slot = index % axis.card;
            index /= axis.card;
        }
        config
    }

    pub fn prob(&self, config: &[usize]) -> Result<f64> {
        Ok(self.probs[self.index_of(config)?])
    }

    /// Probability of a full assignment covering every axis.
    pub fn prob_of(&self, assignment: &Assignment) -> Result<f64> {
        let config = self
            .axes
            .iter()
            .map(|a| {
                assignment
                    .get(&a.key)
                    .copied()
                    .ok_or_else(|| Error::invalid(format!("assignment misses axis {}", a.key)))
            })
            .collect::<Result<Vec<_>>>()?;
        self.prob(&config)
    }

    /// Iterates `(configuration, probability)` in storage order.
    pub fn cells(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        let mut config = vec![0usize; self.axes.len()];
        let mut first = true;
        self.probs.iter().map(move |&p| {
            if !first {
                advance(&mut config, &self.axes);
            }
            first = false;
            (config.clone(), p)
        })
    }

    /// Sums out every axis not in `keep`. The result's axes follow the order of `keep`.
    pub fn marginalize(&self, keep: &[AxisKey]) -> Result<JointTable> {
        let positions = self.locate(keep)?;
        let out_axes: Vec<Axis> = positions.iter().map(|&i| self.axes[i]).collect();
        let strides = strides(&out_axes);
        let mut out = vec![0.0; lattice_size(&out_axes)];
        for (config, p) in self.cells() {
            if p == 0.0 {
                continue;
            }
            let idx: usize = positions.iter().zip(&strides).map(|(&i, &s)| config[i] * s).sum();
            out[idx] += p;
        }
        Ok(JointTable {
            axes: out_axes,
            probs: out,
        })
    }

    /// Conditional distribution of the remaining axes given `given`, failing
    /// on zero-mass slices.
    pub fn condition(&self, given: &Assignment) -> Result<JointTable> {
        self.condition_with(given, ZeroMassPolicy::Strict)
    }

    pub fn condition_with(&self, given: &Assignment, policy: ZeroMassPolicy<'_>) -> Result<JointTable> {
        let mut fixed = Vec::with_capacity(given.len());
        for (&key, &value) in given {
            let i = self.axis_index(key).ok_or(Error::UnknownAxis(key))?;
            let card = self.axes[i].card;
            if value >= card {
                return Err(Error::ValueOutOfRange { axis: key, value, card });
            }
            fixed.push((i, value));
        }
        let free: Vec<usize> = (0..self.axes.len())
            .filter(|i| !fixed.iter().any(|(j, _)| j == i))
            .collect();
        let out_axes: Vec<Axis> = free.iter().map(|&i| self.axes[i]).collect();
        let strides = strides(&out_axes);
        let mut out = vec![0.0; lattice_size(&out_axes)];
        for (config, p) in self.cells() {
            if fixed.iter().all(|&(i, v)| config[i] == v) {
                let idx: usize = free.iter().zip(&strides).map(|(&i, &s)| config[i] * s).sum();
                out[idx] += p;
            }
        }
        let mass: f64 = out.iter().sum();
        if mass <= 0.0 {
            policy.on_zero_mass(|| format_assignment(given))?;
            let size = out.len();
            return Ok(JointTable {
                axes: out_axes,
                probs: vec![1.0 / size as f64; size],
            });
        }
        out.iter_mut().for_each(|p| *p /= mass);
        Ok(JointTable {
            axes: out_axes,
            probs: out,
        })
    }

    /// Outer product of tables over pairwise disjoint axes.
    pub fn product(tables: &[JointTable]) -> Result<JointTable> {
        let mut seen = HashSet::new();
        for key in tables.iter().flat_map(|t| t.keys()) {
            if !seen.insert(key) {
                return Err(Error::OverlappingAxes(key));
            }
        }
        let mut acc = JointTable {
            axes: Vec::new(),
            probs: vec![1.0],
        };
        for t in tables {
            let mut probs = Vec::with_capacity(acc.probs.len() * t.probs.len());
            for &a in &acc.probs {
                probs.extend(t.probs.iter().map(|&b| a * b));
            }
            acc.axes.extend_from_slice(&t.axes);
            acc.probs = probs;
        }
        Ok(acc)
    }

    /// Reorders the axes; `order` must be a permutation of the table's keys.
    pub fn permute(&self, order: &[AxisKey]) -> Result<JointTable> {
        if order.len() != self.axes.len() {
            return Err(Error::DimensionMismatch(format!(
                "permutation lists {} axes, table has {}",
                order.len(),
                self.axes.len()
            )));
        }
        self.marginalize(order)
    }

    /// Renames axes through `f`; the mapping must stay injective.
    pub fn relabel(&self, f: impl Fn(AxisKey) -> AxisKey) -> Result<JointTable> {
        let axes: Vec<Axis> = self
            .axes
            .iter()
            .map(|a| Axis {
                key: f(a.key),
                card: a.card,
            })
            .collect();
        check_axes(&axes)?;
        Ok(JointTable {
            axes,
            probs: self.probs.clone(),
        })
    }

    /// Largest absolute cell difference after aligning `other` to this axis order.
    pub fn max_abs_diff(&self, other: &JointTable) -> Result<f64> {
        let keys: Vec<AxisKey> = self.keys().collect();
        let aligned = other.permute(&keys)?;
        if aligned.axes != self.axes {
            return Err(Error::DimensionMismatch("cardinalities differ".into()));
        }
        Ok(self
            .probs
            .iter()
            .zip(&aligned.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Sum of squared cell differences after aligning axes.
    pub fn squared_error(&self, other: &JointTable) -> Result<f64> {
        let keys: Vec<AxisKey> = self.keys().collect();
        let aligned = other.permute(&keys)?;
        Ok(self
            .probs
            .iter()
            .zip(&aligned.probs)
            .map(|(a, b)| (a - b) * (a - b))
            .sum())
    }

    /// Averages the table over every permutation of position indices.
    ///
    /// The axes must form a full variables × positions lattice.
    pub fn symmetrize_positions(&self) -> Result<JointTable> {
        let mut positions: Vec<usize> = self.axes.iter().map(|a| a.key.pos).collect();
        positions.sort_unstable();
        positions.dedup();
        let mut vars: Vec<usize> = self.axes.iter().map(|a| a.key.var).collect();
        vars.sort_unstable();
        vars.dedup();
        if positions.len() * vars.len() != self.axes.len() {
            return Err(Error::DimensionMismatch(
                "axes do not form a variables x positions lattice".into(),
            ));
        }
        if positions.len() > 8 {
            return Err(Error::invalid("symmetrization supports at most 8 positions"));
        }
        let keys: Vec<AxisKey> = self.keys().collect();
        let mut acc = vec![0.0; self.probs.len()];
        let mut count = 0usize;
        for perm in permutations(positions.len()) {
            let moved = self.relabel(|k| {
                let slot = positions.binary_search(&k.pos).expect("position present");
                AxisKey::new(k.var, positions[perm[slot]])
            })?;
            let aligned = moved.permute(&keys)?;
            if aligned.axes != self.axes {
                return Err(Error::DimensionMismatch("cardinality varies across positions".into()));
            }
            acc.iter_mut().zip(&aligned.probs).for_each(|(a, p)| *a += p);
            count += 1;
        }
        acc.iter_mut().for_each(|a| *a /= count as f64);
        Ok(JointTable {
            axes: self.axes.clone(),
            probs: acc,
        })
    }

    fn locate(&self, keys: &[AxisKey]) -> Result<Vec<usize>> {
        let mut seen = HashSet::new();
        keys.iter()
            .map(|&k| {
                if !seen.insert(k) {
                    return Err(Error::DuplicateAxis(k));
                }
                self.axis_index(k).ok_or(Error::UnknownAxis(k))
            })
            .collect()
    }

    /// Serializes to the line-oriented text format: a header of
    /// `var:pos:card` triples, then one `config,probability` row per cell.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = self
            .axes
            .iter()
            .map(|a| format!("{}:{}:{}", a.key.var, a.key.pos, a.card))
            .collect();
        out.push_str(&header.join(" "));
        out.push('\n');
        for (config, p) in self.cells() {
            let cfg: Vec<String> = config.iter().map(|v| v.to_string()).collect();
            out.push_str(&cfg.join(" "));
            out.push(',');
            out.push_str(&p.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<JointTable> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().starts_with('#'));
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
        let axes = header
            .split_whitespace()
            .map(|triple| {
                let parts: Vec<&str> = triple.split(':').collect();
                if parts.len() != 3 {
                    return Err(Error::parse(1, format!("bad axis `{triple}`")));
                }
                let num = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|_| Error::parse(1, format!("bad axis `{triple}`")))
                };
                Ok(Axis::new(num(parts[0])?, num(parts[1])?, num(parts[2])?))
            })
            .collect::<Result<Vec<_>>>()?;
        check_axes(&axes)?;
        let shell = JointTable {
            axes,
            probs: Vec::new(),
        };
        let mut probs = vec![f64::NAN; lattice_size(&shell.axes)];
        for (lineno, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let (cfg, p) = line
                .rsplit_once(',')
                .ok_or_else(|| Error::parse(lineno + 1, "expected `config,probability`"))?;
            let config = cfg
                .split_whitespace()
                .map(|v| v.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(lineno + 1, e.to_string()))?;
            let p: f64 = p
                .trim()
                .parse()
                .map_err(|e: std::num::ParseFloatError| Error::parse(lineno + 1, e.to_string()))?;
            let idx = shell.index_of(&config)?;
            probs[idx] = p;
        }
        if probs.iter().any(|p| p.is_nan()) {
            return Err(Error::parse(0, "table rows do not cover every configuration"));
        }
        JointTable::new(shell.axes, probs)
    }
}

pub(crate) fn check_axes(axes: &[Axis]) -> Result<()> {
    let mut seen = HashSet::new();
    for a in axes {
        if a.card == 0 {
            return Err(Error::invalid(format!("axis {} has cardinality 0", a.key)));
        }
        if !seen.insert(a.key) {
            return Err(Error::DuplicateAxis(a.key));
        }
    }
    Ok(())
}

pub(crate) fn lattice_size(axes: &[Axis]) -> usize {
    axes.iter().map(|a| a.card).product()
}

fn strides(axes: &[Axis]) -> Vec<usize> {
    let mut s = vec![1; axes.len()];
    for i in (0..axes.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * axes[i + 1].card;
    }
    s
}

fn advance(config: &mut [usize], axes: &[Axis]) {
    for (v, a) in config.iter_mut().zip(axes).rev() {
        *v += 1;
        if *v < a.card {
            return;
        }
        *v = 0;
    }
}

/// Enumerates every configuration of `axes` in lexicographic order.
pub fn configurations(axes: &[Axis]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let size = lattice_size(axes);
    let mut config = vec![0usize; axes.len()];
    (0..size).map(move |i| {
        if i > 0 {
            advance(&mut config, axes);
        }
        config.clone()
    })
}

pub(crate) fn format_assignment(a: &Assignment) -> String {
    let parts: Vec<String> = a.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("{{{}}}", parts.join(", "))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}
