//! Intervention sets and causal queries, plus the query description file.
//!
//! ```text
//! intervene = [(0,0,0)]
//! target = [(1,0)]
//! given = [(0,1,0), (1,1,0)]
//! ```
//!
//! Tuples are `(var, pos, value)` or `(var, pos)`, all 0-based.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::table::{Assignment, AxisKey};

/// Forced values for a set of (variable, position) axes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InterventionSet {
    assignments: BTreeMap<AxisKey, usize>,
}

impl InterventionSet {
    pub fn new(items: impl IntoIterator<Item = (AxisKey, usize)>) -> Result<Self> {
        let mut assignments = BTreeMap::new();
        for (key, value) in items {
            if assignments.insert(key, value).is_some() {
                return Err(Error::DuplicateAxis(key));
            }
        }
        Ok(InterventionSet { assignments })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(var: usize, pos: usize, value: usize) -> Self {
        InterventionSet {
            assignments: BTreeMap::from([(AxisKey::new(var, pos), value)]),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn get(&self, key: AxisKey) -> Option<usize> {
        self.assignments.get(&key).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (AxisKey, usize)> + '_ {
        self.assignments.iter().map(|(&k, &v)| (k, v))
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignments
    }

    /// Variable indices with at least one intervened position.
    pub fn vars(&self) -> BTreeSet<usize> {
        self.assignments.keys().map(|k| k.var).collect()
    }

    /// Positions at which `var` is intervened.
    pub fn positions_of(&self, var: usize) -> BTreeSet<usize> {
        self.assignments
            .keys()
            .filter(|k| k.var == var)
            .map(|k| k.pos)
            .collect()
    }

    /// Positions touched by any intervention.
    pub fn positions(&self) -> BTreeSet<usize> {
        self.assignments.keys().map(|k| k.pos).collect()
    }
}

/// `P(targets | do(intervention), conditioning)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Query {
    pub targets: Vec<AxisKey>,
    pub intervention: InterventionSet,
    pub conditioning: Assignment,
}

impl Query {
    pub fn new(targets: Vec<AxisKey>, intervention: InterventionSet, conditioning: Assignment) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &t in &targets {
            if !seen.insert(t) {
                return Err(Error::DuplicateAxis(t));
            }
            if intervention.get(t).is_some() || conditioning.contains_key(&t) {
                return Err(Error::OverlappingAxes(t));
            }
        }
        for (&key, &value) in &conditioning {
            match intervention.get(key) {
                Some(forced) if forced != value => return Err(Error::ConditioningInconsistent(key)),
                Some(_) => return Err(Error::OverlappingAxes(key)),
                None => {}
            }
        }
        Ok(Query {
            targets,
            intervention,
            conditioning,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut intervene = None;
        let mut target = None;
        let mut given = None;
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, rhs) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(lineno, "expected `key = [...]`"))?;
            let tuples = parse_tuples(rhs.trim(), lineno)?;
            let slot = match key.trim() {
                "intervene" => &mut intervene,
                "target" => &mut target,
                "given" => &mut given,
                other => return Err(Error::parse(lineno, format!("unknown field `{other}`"))),
            };
            if slot.replace((lineno, tuples)).is_some() {
                return Err(Error::parse(lineno, format!("field `{}` repeated", key.trim())));
            }
        }
        let triples = |field: Option<(usize, Vec<Vec<usize>>)>| -> Result<Vec<(AxisKey, usize)>> {
            let Some((lineno, tuples)) = field else {
                return Ok(Vec::new());
            };
            tuples
                .into_iter()
                .map(|t| match t[..] {
                    [v, p, x] => Ok((AxisKey::new(v, p), x)),
                    _ => Err(Error::parse(lineno, "expected (var,pos,value)")),
                })
                .collect()
        };
        let intervention = InterventionSet::new(triples(intervene)?)?;
        let mut conditioning = Assignment::new();
        for (k, v) in triples(given)? {
            if conditioning.insert(k, v).is_some() {
                return Err(Error::DuplicateAxis(k));
            }
        }
        // no `target` line means every axis left free by the query
        let (lineno, tuples) = target.unwrap_or((0, Vec::new()));
        let targets = tuples
            .into_iter()
            .map(|t| match t[..] {
                [v, p] => Ok(AxisKey::new(v, p)),
                _ => Err(Error::parse(lineno, "expected (var,pos)")),
            })
            .collect::<Result<Vec<_>>>()?;
        Query::new(targets, intervention, conditioning)
    }

    pub fn to_text(&self) -> String {
        let fmt3 = |items: Vec<(AxisKey, usize)>| {
            let parts: Vec<String> = items
                .iter()
                .map(|(k, v)| format!("({},{},{})", k.var, k.pos, v))
                .collect();
            format!("[{}]", parts.join(", "))
        };
        let targets: Vec<String> = self.targets.iter().map(|k| format!("({},{})", k.var, k.pos)).collect();
        format!(
            "intervene = {}\ntarget = [{}]\ngiven = {}\n",
            fmt3(self.intervention.iter().collect()),
            targets.join(", "),
            fmt3(self.conditioning.iter().map(|(&k, &v)| (k, v)).collect()),
        )
    }
}

fn parse_tuples(rhs: &str, lineno: usize) -> Result<Vec<Vec<usize>>> {
    let inner = rhs
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| Error::parse(lineno, "expected a bracketed list"))?;
    let mut out = Vec::new();
    let mut rest = inner.trim();
    while !rest.is_empty() {
        let body = rest
            .strip_prefix('(')
            .ok_or_else(|| Error::parse(lineno, "expected `(`"))?;
        let close = body.find(')').ok_or_else(|| Error::parse(lineno, "unclosed `(`"))?;
        let nums = body[..close]
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::parse(lineno, e.to_string()))?;
        out.push(nums);
        rest = body[close + 1..].trim_start();
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim_start();
        } else if !rest.is_empty() {
            return Err(Error::parse(lineno, "expected `,` between tuples"));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_views() {
        let iv = InterventionSet::new([
            (AxisKey::new(0, 0), 1),
            (AxisKey::new(0, 2), 0),
            (AxisKey::new(3, 1), 1),
        ])
        .unwrap();
        assert_eq!(iv.vars(), BTreeSet::from([0, 3]));
        assert_eq!(iv.positions_of(0), BTreeSet::from([0, 2]));
        assert!(iv.positions_of(1).is_empty());
        assert!(InterventionSet::new([(AxisKey::new(0, 0), 1), (AxisKey::new(0, 0), 0)]).is_err());
    }

    #[test]
    fn parse_query_file() {
        let q = Query::parse("# golden query\nintervene = [(0,0,0)]\ntarget = [(1,0)]\ngiven = [(0,1,0), (1,1,0)]\n")
            .unwrap();
        assert_eq!(q.intervention, InterventionSet::single(0, 0, 0));
        assert_eq!(q.targets, vec![AxisKey::new(1, 0)]);
        assert_eq!(q.conditioning.len(), 2);
        assert_eq!(Query::parse(&q.to_text()).unwrap(), q);
    }

    #[test]
    fn empty_lists_and_missing_fields() {
        let q = Query::parse("target = [(1,1)]\nintervene = []").unwrap();
        assert!(q.intervention.is_empty());
        assert!(q.conditioning.is_empty());
        assert!(Query::parse("intervene = [(0,0,1)]").unwrap().targets.is_empty());
        assert!(Query::parse("target = [(1,1,3)]").is_err());
        assert!(Query::parse("target = (1,1)").is_err());
        assert!(Query::parse("bogus = []\ntarget = [(0,0)]").is_err());
    }

    #[test]
    fn overlapping_keys_are_rejected() {
        let k = AxisKey::new(0, 0);
        assert!(matches!(
            Query::new(vec![k], InterventionSet::single(0, 0, 1), Assignment::new()),
            Err(Error::OverlappingAxes(_))
        ));
        let given = Assignment::from([(k, 0)]);
        assert!(matches!(
            Query::new(vec![AxisKey::new(1, 0)], InterventionSet::single(0, 0, 1), given),
            Err(Error::ConditioningInconsistent(_))
        ));
    }
}
