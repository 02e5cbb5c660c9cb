//! Edge betweenness (Brandes accumulation) and Girvan-Newman community
//! detection.

use std::collections::VecDeque;
use std::io::Write;

use num_rational::BigRational;
use num_traits::Num;
use rayon::prelude::*;

use crate::error::{Result, SparsimError};
use crate::graph::Graph;

/// Disjoint cover of a graph's nodes. Communities are ordered by descending
/// size, ties by smallest member label; a community's position is its id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    communities: Vec<Vec<usize>>,
    removals: usize,
}

impl Partition {
    pub fn new(g: &Graph, communities: Vec<Vec<usize>>) -> Result<Self> {
        Self::with_removals(g, communities, 0)
    }

    fn with_removals(g: &Graph, mut communities: Vec<Vec<usize>>, removals: usize) -> Result<Self> {
        let mut seen = vec![false; g.n_nodes()];
        for comm in &communities {
            if comm.is_empty() {
                return Err(SparsimError::Validation("empty community".into()));
            }
            for &u in comm {
                if u >= g.n_nodes() || std::mem::replace(&mut seen[u], true) {
                    return Err(SparsimError::Validation(format!(
                        "node {u} is out of range or assigned twice"
                    )));
                }
            }
        }
        if let Some(u) = seen.iter().position(|s| !s) {
            return Err(SparsimError::Validation(format!(
                "node {} is not assigned to a community",
                g.label(u)
            )));
        }
        for comm in &mut communities {
            comm.sort_by(|&a, &b| g.label(a).cmp(g.label(b)));
        }
        communities.sort_by(|a, b| {
            b.len()
                .cmp(&a.len())
                .then_with(|| g.label(a[0]).cmp(g.label(b[0])))
        });
        Ok(Partition {
            communities,
            removals,
        })
    }

    /// Communities by id; members sorted by label.
    pub fn communities(&self) -> &[Vec<usize>] {
        &self.communities
    }

    pub fn len(&self) -> usize {
        self.communities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.communities.is_empty()
    }

    /// Number of edges removed to reach this partition.
    pub fn removals(&self) -> usize {
        self.removals
    }

    /// Community id of every node.
    pub fn membership(&self, n_nodes: usize) -> Vec<usize> {
        let mut m = vec![usize::MAX; n_nodes];
        for (id, comm) in self.communities.iter().enumerate() {
            for &u in comm {
                m[u] = id;
            }
        }
        m
    }

    /// `node,community_id` rows ordered by community id, then label.
    pub fn write_csv<W: Write>(&self, g: &Graph, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["node", "community_id"])?;
        for (id, comm) in self.communities.iter().enumerate() {
            for &u in comm {
                wtr.write_record([g.label(u), &id.to_string()])?;
            }
        }
        wtr.flush()
            .map_err(|e| SparsimError::io("<csv writer>", e))?;
        Ok(())
    }
}

/// Betweenness score of every edge, keyed by `(u, v)` with `u < v` in
/// ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeBetweenness<T = f64> {
    scores: Vec<((usize, usize), T)>,
}

impl<T> EdgeBetweenness<T> {
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &T)> {
        self.scores.iter().map(|(e, s)| (*e, s))
    }

    pub fn get(&self, u: usize, v: usize) -> Option<&T> {
        let key = (u.min(v), u.max(v));
        self.scores
            .binary_search_by(|(e, _)| e.cmp(&key))
            .ok()
            .map(|i| &self.scores[i].1)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Dependency of `source` on every edge, as a dense n × n upper-triangular
/// grid. Counts ordered pairs (source, t).
fn single_source<T: Num + Clone>(g: &Graph, source: usize) -> Vec<T> {
    let n = g.n_nodes();
    let mut sigma = vec![T::zero(); n];
    let mut dist: Vec<Option<usize>> = vec![None; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut order = Vec::with_capacity(n);
    sigma[source] = T::one();
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        let dv = dist[v].unwrap();
        for w in g.neighbors(v) {
            if dist[w].is_none() {
                dist[w] = Some(dv + 1);
                queue.push_back(w);
            }
            if dist[w] == Some(dv + 1) {
                let s = sigma[w].clone() + sigma[v].clone();
                sigma[w] = s;
                preds[w].push(v);
            }
        }
    }
    let mut delta = vec![T::zero(); n];
    let mut scores = vec![T::zero(); n * n];
    for &w in order.iter().rev() {
        let carry = T::one() + delta[w].clone();
        for &v in &preds[w] {
            let c = sigma[v].clone() / sigma[w].clone() * carry.clone();
            let idx = v.min(w) * n + v.max(w);
            scores[idx] = scores[idx].clone() + c.clone();
            delta[v] = delta[v].clone() + c;
        }
    }
    scores
}

fn brandes<T: Num + Clone + Send>(g: &Graph) -> EdgeBetweenness<T> {
    let n = g.n_nodes();
    let partials: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|s| single_source(g, s))
        .collect();
    let mut total = vec![T::zero(); n * n];
    // Fixed source order keeps float sums independent of scheduling.
    for p in partials {
        for (t, x) in total.iter_mut().zip(p) {
            if !x.is_zero() {
                *t = t.clone() + x;
            }
        }
    }
    let two = T::one() + T::one();
    let scores = g
        .edges()
        .map(|(u, v)| ((u, v), total[u * n + v].clone() / two.clone()))
        .collect();
    EdgeBetweenness { scores }
}

/// Edge betweenness over unordered node pairs: for each edge, the sum over
/// pairs {s, t} of the fraction of shortest s-t paths through it.
pub fn edge_betweenness(g: &Graph) -> EdgeBetweenness<f64> {
    brandes::<f64>(g)
}

/// Same accumulation in exact rational arithmetic.
pub fn edge_betweenness_exact(g: &Graph) -> EdgeBetweenness<BigRational> {
    brandes::<BigRational>(g)
}

/// Relative tolerance under which two float betweenness scores count as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Highest-betweenness edge; near-equal scores go to the smallest label pair.
fn edge_to_remove(g: &Graph, scores: &EdgeBetweenness<f64>) -> Option<(usize, usize)> {
    let max = scores
        .iter()
        .map(|(_, &s)| s)
        .fold(f64::NEG_INFINITY, f64::max);
    let floor = max - max.abs() * TIE_TOLERANCE;
    scores
        .iter()
        .filter(|(_, &s)| s >= floor)
        .map(|(e, _)| e)
        .min_by(|a, b| g.edge_labels(a.0, a.1).cmp(&g.edge_labels(b.0, b.1)))
}

/// Removes highest-betweenness edges one at a time until the graph has at
/// least `target` connected components, and returns those components.
pub fn girvan_newman(g: &Graph, target: usize) -> Result<Partition> {
    if target == 0 || target > g.n_nodes() {
        return Err(SparsimError::InvalidArgument(format!(
            "target of {target} communities is outside 1..={}",
            g.n_nodes()
        )));
    }
    let mut work = g.clone();
    let mut removals = 0;
    let mut components = work.components();
    while components.len() < target {
        let scores = edge_betweenness(&work);
        let (u, v) = edge_to_remove(&work, &scores)
            .expect("fewer components than nodes implies an edge remains");
        work.remove_edge(u, v);
        removals += 1;
        if work.bfs_distances(u)[v].is_none() {
            components = work.components();
        }
    }
    Partition::with_removals(g, components, removals)
}
