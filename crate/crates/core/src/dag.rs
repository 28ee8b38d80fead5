use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Directed acyclic graph over variable indices `0..num_vars`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dag {
    num_vars: usize,
    edges: BTreeSet<(usize, usize)>,
    parents: Vec<Vec<usize>>,
    order: Vec<usize>,
}

impl Dag {
    pub fn new(num_vars: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if num_vars == 0 {
            return Err(Error::invalid("a graph needs at least one variable"));
        }
        let edges: BTreeSet<(usize, usize)> = edges.into_iter().collect();
        let mut parents = vec![Vec::new(); num_vars];
        for &(from, to) in &edges {
            if from >= num_vars || to >= num_vars {
                return Err(Error::invalid(format!(
                    "edge {from}->{to} out of range for {num_vars} variables"
                )));
            }
            if from == to {
                return Err(Error::Cyclic);
            }
            parents[to].push(from);
        }
        let order = topological_order(num_vars, &edges)?;
        Ok(Dag {
            num_vars,
            edges,
            parents,
            order,
        })
    }

    pub fn empty(num_vars: usize) -> Result<Self> {
        Dag::new(num_vars, [])
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.contains(&(from, to))
    }

    /// Parents of `var`, ascending.
    pub fn parents(&self, var: usize) -> &[usize] {
        &self.parents[var]
    }

    /// A topological order (parents before children), stable across calls.
    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }
}

impl fmt::Display for Dag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Ok(g) = BivariateGraph::try_from(self) {
            return write!(f, "{g}");
        }
        let edges: Vec<String> = self.edges.iter().map(|(a, b)| format!("{a}->{b}")).collect();
        write!(f, "dag({}; {})", self.num_vars, edges.join(","))
    }
}

// Kahn's algorithm, always taking the smallest ready index.
fn topological_order(n: usize, edges: &BTreeSet<(usize, usize)>) -> Result<Vec<usize>> {
    let mut indegree = vec![0usize; n];
    for &(_, to) in edges {
        indegree[to] += 1;
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &(from, to) in edges.range((v, 0)..(v + 1, 0)) {
            debug_assert_eq!(from, v);
            indegree[to] -= 1;
            if indegree[to] == 0 {
                ready.insert(to);
            }
        }
    }
    if order.len() != n {
        return Err(Error::Cyclic);
    }
    Ok(order)
}

/// The three candidate structures over (X, Y) = variables (0, 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BivariateGraph {
    XToY,
    YToX,
    Independent,
}

impl BivariateGraph {
    pub const ALL: [BivariateGraph; 3] = [BivariateGraph::XToY, BivariateGraph::YToX, BivariateGraph::Independent];

    pub fn to_dag(self) -> Dag {
        let edges: &[(usize, usize)] = match self {
            BivariateGraph::XToY => &[(0, 1)],
            BivariateGraph::YToX => &[(1, 0)],
            BivariateGraph::Independent => &[],
        };
        Dag::new(2, edges.iter().copied()).expect("bivariate graphs are acyclic")
    }

    /// The graph obtained by swapping the roles of X and Y.
    pub fn swapped(self) -> Self {
        match self {
            BivariateGraph::XToY => BivariateGraph::YToX,
            BivariateGraph::YToX => BivariateGraph::XToY,
            BivariateGraph::Independent => BivariateGraph::Independent,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BivariateGraph::XToY => "X->Y",
            BivariateGraph::YToX => "Y->X",
            BivariateGraph::Independent => "X|Y",
        }
    }
}

impl fmt::Display for BivariateGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BivariateGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x->y" | "xy" | "x-to-y" => Ok(BivariateGraph::XToY),
            "y->x" | "yx" | "y-to-x" => Ok(BivariateGraph::YToX),
            "x|y" | "indep" | "independent" | "none" => Ok(BivariateGraph::Independent),
            other => Err(Error::invalid(format!("unknown bivariate graph `{other}`"))),
        }
    }
}

impl TryFrom<&Dag> for BivariateGraph {
    type Error = Error;

    fn try_from(dag: &Dag) -> Result<Self> {
        if dag.num_vars() != 2 {
            return Err(Error::invalid(format!(
                "expected a bivariate graph, got {} variables",
                dag.num_vars()
            )));
        }
        Ok(match (dag.has_edge(0, 1), dag.has_edge(1, 0)) {
            (true, _) => BivariateGraph::XToY,
            (_, true) => BivariateGraph::YToX,
            _ => BivariateGraph::Independent,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_cycles() {
        assert!(matches!(Dag::new(3, [(0, 1), (1, 2), (2, 0)]), Err(Error::Cyclic)));
        assert!(matches!(Dag::new(1, [(0, 0)]), Err(Error::Cyclic)));
    }

    #[test]
    fn parents_and_order() {
        let g = Dag::new(4, [(2, 0), (0, 1), (3, 1)]).unwrap();
        assert_eq!(g.parents(1), &[0, 3]);
        assert_eq!(g.parents(2), &[] as &[usize]);
        let order = g.topological_order();
        let at = |v: usize| order.iter().position(|&x| x == v).unwrap();
        for (a, b) in g.edges() {
            assert!(at(a) < at(b));
        }
    }

    #[test]
    fn bivariate_round_trip() {
        for g in BivariateGraph::ALL {
            assert_eq!(BivariateGraph::try_from(&g.to_dag()).unwrap(), g);
            assert_eq!(g.as_str().parse::<BivariateGraph>().unwrap(), g);
            assert_eq!(g.swapped().swapped(), g);
        }
        assert_eq!(BivariateGraph::XToY.to_dag().edges().count(), 1);
        assert_eq!(BivariateGraph::Independent.to_dag().edges().count(), 0);
    }
}
