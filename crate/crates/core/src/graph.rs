//! Undirected, unweighted graphs over labeled nodes, built by keeping the
//! K strongest pairs of a similarity matrix.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::io::Write;

use crate::community::Partition;
use crate::error::{Result, SparsimError};
use crate::similarity::{SimilarityMatrix, StrengthOrder};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    adjacency: Vec<BTreeSet<usize>>,
    n_edges: usize,
}

impl Graph {
    /// Edgeless graph on the given nodes. Labels must be unique.
    pub fn new(labels: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(SparsimError::Validation(format!(
                    "duplicate node label {l:?}"
                )));
            }
        }
        Ok(Graph {
            adjacency: vec![BTreeSet::new(); labels.len()],
            labels,
            index,
            n_edges: 0,
        })
    }

    /// Nodes `0..n` labeled by their index, plus the given edges.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let width = n.saturating_sub(1).to_string().len();
        let mut g = Graph::new((0..n).map(|i| format!("{i:0width$}")).collect())?;
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn from_labeled_edges(labels: &[&str], edges: &[(&str, &str)]) -> Result<Self> {
        let mut g = Graph::new(labels.iter().map(|s| s.to_string()).collect())?;
        for (a, b) in edges {
            let u = g
                .node(a)
                .ok_or_else(|| SparsimError::Validation(format!("unknown node {a}")))?;
            let v = g
                .node(b)
                .ok_or_else(|| SparsimError::Validation(format!("unknown node {b}")))?;
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        let n = self.n_nodes();
        if u >= n || v >= n {
            return Err(SparsimError::Validation(format!(
                "edge ({u}, {v}) out of range"
            )));
        }
        if u == v {
            return Err(SparsimError::Validation(format!(
                "self-loop on {}",
                self.labels[u]
            )));
        }
        if !self.adjacency[u].insert(v) {
            return Err(SparsimError::Validation(format!(
                "duplicate edge {} -- {}",
                self.labels[u], self.labels[v]
            )));
        }
        self.adjacency[v].insert(u);
        self.n_edges += 1;
        Ok(())
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) -> bool {
        let removed = self.adjacency[u].remove(&v);
        if removed {
            self.adjacency[v].remove(&u);
            self.n_edges -= 1;
        }
        removed
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].contains(&v)
    }

    pub fn n_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> &str {
        &self.labels[node]
    }

    pub fn node(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[node].iter().copied()
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    /// Edges as `(u, v)` with `u < v`, in ascending index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.range(u + 1..).map(move |&v| (u, v)))
    }

    /// Endpoint labels of an edge, smaller label first.
    pub fn edge_labels(&self, u: usize, v: usize) -> (&str, &str) {
        let (a, b) = (self.label(u), self.label(v));
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// Connected components, each sorted by node index, ordered by their
    /// smallest node.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n_nodes()];
        let mut out = Vec::new();
        for start in 0..self.n_nodes() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for v in self.neighbors(u) {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn component_count(&self) -> usize {
        self.components().len()
    }

    /// Hop distances from `source`; `None` for unreachable nodes.
    pub fn bfs_distances(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n_nodes()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap() + 1;
            for v in self.neighbors(u) {
                if dist[v].is_none() {
                    dist[v] = Some(d);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Subgraph induced by the nodes with at least one edge, with the
    /// original index of each kept node.
    pub fn without_isolated(&self) -> (Graph, Vec<usize>) {
        let kept: Vec<usize> = (0..self.n_nodes())
            .filter(|&u| self.degree(u) > 0)
            .collect();
        let mut remap = vec![usize::MAX; self.n_nodes()];
        for (new, &old) in kept.iter().enumerate() {
            remap[old] = new;
        }
        let mut g = Graph::new(kept.iter().map(|&u| self.labels[u].clone()).collect())
            .expect("labels are already unique");
        for (u, v) in self.edges() {
            g.add_edge(remap[u], remap[v])
                .expect("edge is valid in the source graph");
        }
        (g, kept)
    }

    /// `u,v` edge list sorted by label pair.
    pub fn write_edges_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut edges: Vec<(&str, &str)> =
            self.edges().map(|(u, v)| self.edge_labels(u, v)).collect();
        edges.sort_unstable();
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["u", "v"])?;
        for (a, b) in edges {
            wtr.write_record([a, b])?;
        }
        wtr.flush()
            .map_err(|e| SparsimError::io("<csv writer>", e))?;
        Ok(())
    }

    /// Graphviz DOT. When a partition is given (over this graph's nodes or
    /// a subset identified by label), nodes are filled with their
    /// community's palette color.
    pub fn write_dot<W: Write>(
        &self,
        mut w: W,
        partition: Option<(&Graph, &Partition)>,
        comment: Option<&str>,
    ) -> Result<()> {
        let mut community_of: HashMap<&str, usize> = HashMap::new();
        if let Some((pg, p)) = partition {
            for (id, comm) in p.communities().iter().enumerate() {
                for &u in comm {
                    community_of.insert(pg.label(u), id);
                }
            }
        }
        let io = |e| SparsimError::io("<dot writer>", e);
        writeln!(w, "graph G {{").map_err(io)?;
        if let Some(c) = comment {
            writeln!(w, "  // {c}").map_err(io)?;
        }
        writeln!(w, "  node [style=filled];").map_err(io)?;
        let mut order: Vec<usize> = (0..self.n_nodes()).collect();
        order.sort_by(|&a, &b| self.labels[a].cmp(&self.labels[b]));
        for u in order {
            let label = self.label(u);
            match community_of.get(label) {
                Some(&id) => writeln!(
                    w,
                    "  {} [fillcolor=\"{}\", community={}];",
                    quote(label),
                    palette_color(id),
                    id
                ),
                None => writeln!(w, "  {} [fillcolor=\"#ffffff\"];", quote(label)),
            }
            .map_err(io)?;
        }
        let mut edges: Vec<(&str, &str)> =
            self.edges().map(|(u, v)| self.edge_labels(u, v)).collect();
        edges.sort_unstable();
        for (a, b) in edges {
            writeln!(w, "  {} -- {};", quote(a), quote(b)).map_err(io)?;
        }
        writeln!(w, "}}").map_err(io)?;
        Ok(())
    }
}

const PALETTE: [&str; 5] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"];
const OVERFLOW_COLOR: &str = "#c7c7c7";

pub fn palette_color(community_id: usize) -> &'static str {
    PALETTE.get(community_id).copied().unwrap_or(OVERFLOW_COLOR)
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Keeps the `k` strongest off-diagonal pairs as unweighted edges. Equal
/// strengths are ordered by label pair.
pub fn build_topk(sim: &SimilarityMatrix, k: usize) -> Result<Graph> {
    let n = sim.len();
    let available = n * n.saturating_sub(1) / 2;
    if k > available {
        return Err(SparsimError::InvalidArgument(format!(
            "requested {k} edges but only {available} node pairs exist"
        )));
    }
    let labels = sim.labels();
    let pair_key = |i: usize, j: usize| {
        let (a, b) = (labels[i].as_str(), labels[j].as_str());
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    };
    let mut pairs: Vec<(f64, (&str, &str), usize, usize)> = Vec::with_capacity(available);
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((sim.get(i, j), pair_key(i, j), i, j));
        }
    }
    let by_strength = |a: &f64, b: &f64| -> Ordering {
        match sim.strength_order() {
            StrengthOrder::HigherIsStronger => b.total_cmp(a),
            StrengthOrder::LowerIsStronger => a.total_cmp(b),
        }
    };
    pairs.sort_by(|x, y| by_strength(&x.0, &y.0).then_with(|| x.1.cmp(&y.1)));

    let mut g = Graph::new(labels.to_vec())?;
    for &(_, _, i, j) in pairs.iter().take(k) {
        g.add_edge(i, j)?;
    }
    Ok(g)
}
