//! Reference implementations used as oracles by the integration tests. They
//! deliberately avoid the library's own helpers beyond graph construction and
//! adjacency queries.
#![allow(dead_code)]

use std::collections::{BTreeMap, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use sparsim::{Cell, Graph, Partition};

/// Straight transcription of the three-part definition, components computed
/// independently.
pub fn ref_weighted(v1: &[Option<f64>], v2: &[Option<f64>]) -> (f64, f64, f64) {
    let len = v1.len() as f64;
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut both_missing = 0usize;
    let mut one_missing = 0usize;
    for (x, y) in v1.iter().zip(v2) {
        match (x, y) {
            (Some(x), Some(y)) => {
                a.push(*x);
                b.push(*y);
            }
            (None, None) => both_missing += 1,
            _ => one_missing += 1,
        }
    }
    let s_num = match a.len() {
        0 => 0.0,
        1 => {
            let (x, y) = (a[0], b[0]);
            if x == 0.0 && y == 0.0 {
                1.0 / len
            } else if x == 0.0 || y == 0.0 {
                0.0
            } else {
                (x * y).signum() * x.abs().min(y.abs()) / (len * x.abs().max(y.abs()))
            }
        }
        n => {
            let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            let cos = if na == 0.0 && nb == 0.0 {
                1.0
            } else if na == 0.0 || nb == 0.0 {
                0.0
            } else {
                a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>() / (na * nb)
            };
            n as f64 / len * cos
        }
    };
    (
        s_num,
        both_missing as f64 / len,
        -(one_missing as f64) / len,
    )
}

pub fn to_cells(v: &[Option<f64>]) -> Vec<Cell> {
    v.iter().map(|&x| Cell::from_option(x)).collect()
}

/// Random sparse vector pair: length 1..=64, per-pair missing rate in
/// [0, 1], values in [-10, 10]. A small share of exact zeros exercises the
/// zero-norm branches.
pub fn random_sparse_pair<R: Rng>(rng: &mut R) -> (Vec<Option<f64>>, Vec<Option<f64>>) {
    let len = rng.gen_range(1..=64);
    let rate: f64 = rng.gen();
    let draw = |rng: &mut R| -> Option<f64> {
        if rng.gen_bool(rate) {
            None
        } else if rng.gen_bool(0.05) {
            Some(0.0)
        } else {
            Some(rng.gen_range(-10.0..=10.0))
        }
    };
    let v1 = (0..len).map(|_| draw(rng)).collect();
    let v2 = (0..len).map(|_| draw(rng)).collect();
    (v1, v2)
}

pub fn is_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Every connected labelled graph on `n` nodes.
pub fn all_connected_graphs(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    (0u64..1 << pairs.len())
        .map(|mask| {
            pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &p)| p)
                .collect::<Vec<_>>()
        })
        .filter(|edges| is_connected(n, edges))
        .collect()
}

/// Random connected graph: a random spanning tree plus each remaining pair
/// with probability `p`.
pub fn random_connected_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.push((u, v));
    }
    for u in 0..n {
        for v in u + 1..n {
            if !edges.contains(&(u, v)) && rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges
}

/// Random graph (not necessarily connected) with at least one edge.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Vec<(usize, usize)> {
    loop {
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|_| rng.gen_bool(p))
            .collect();
        if !edges.is_empty() {
            return edges;
        }
    }
}

pub fn random_partition<R: Rng>(rng: &mut R, g: &Graph) -> Partition {
    let n = g.n_nodes();
    let k = rng.gen_range(1..=n);
    let mut comms = vec![Vec::new(); k];
    for u in 0..n {
        comms[rng.gen_range(0..k)].push(u);
    }
    comms.retain(|c| !c.is_empty());
    Partition::new(g, comms).expect("valid random partition")
}

fn hop_distances(g: &Graph, s: usize) -> Vec<Option<usize>> {
    let n = g.n_nodes();
    let mut dist = vec![None; n];
    dist[s] = Some(0);
    let mut q = VecDeque::from([s]);
    while let Some(u) = q.pop_front() {
        for v in 0..n {
            if g.has_edge(u, v) && dist[v].is_none() {
                dist[v] = Some(dist[u].unwrap() + 1);
                q.push_back(v);
            }
        }
    }
    dist
}

/// Edge betweenness by enumerating every shortest path of every unordered
/// node pair and crediting each edge on it with 1/(number of paths).
pub fn brute_betweenness(g: &Graph) -> BTreeMap<(usize, usize), BigRational> {
    let n = g.n_nodes();
    let mut out: BTreeMap<(usize, usize), BigRational> = BTreeMap::new();
    for u in 0..n {
        for v in u + 1..n {
            if g.has_edge(u, v) {
                out.insert((u, v), BigRational::zero());
            }
        }
    }
    let dist_t: Vec<Vec<Option<usize>>> = (0..n).map(|t| hop_distances(g, t)).collect();
    for s in 0..n {
        for t in s + 1..n {
            let Some(d) = dist_t[t][s] else { continue };
            let mut paths: Vec<Vec<usize>> = Vec::new();
            let mut stack = vec![vec![s]];
            while let Some(path) = stack.pop() {
                let last = *path.last().unwrap();
                if last == t {
                    paths.push(path);
                    continue;
                }
                let remaining = d - (path.len() - 1);
                for w in 0..n {
                    if g.has_edge(last, w) && dist_t[t][w] == Some(remaining - 1) {
                        let mut next = path.clone();
                        next.push(w);
                        stack.push(next);
                    }
                }
            }
            let share = BigRational::new(BigInt::from(1), BigInt::from(paths.len()));
            for p in &paths {
                for e in p.windows(2) {
                    let key = (e[0].min(e[1]), e[0].max(e[1]));
                    *out.get_mut(&key).unwrap() += share.clone();
                }
            }
        }
    }
    out
}

/// (triangles, connected triples centred anywhere, per-node (pairs, closed))
/// by looping over node triples.
pub fn brute_triangles(g: &Graph) -> (usize, usize, Vec<(usize, usize)>) {
    let n = g.n_nodes();
    let mut triangles = 0;
    let mut per_node = vec![(0usize, 0usize); n];
    for c in 0..n {
        for a in 0..n {
            for b in a + 1..n {
                if a == c || b == c || !g.has_edge(c, a) || !g.has_edge(c, b) {
                    continue;
                }
                per_node[c].0 += 1;
                if g.has_edge(a, b) {
                    per_node[c].1 += 1;
                }
            }
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if g.has_edge(a, b) && g.has_edge(b, c) && g.has_edge(a, c) {
                    triangles += 1;
                }
            }
        }
    }
    let triples = per_node.iter().map(|p| p.0).sum();
    (triangles, triples, per_node)
}

/// Modularity in its pairwise form: (1/2m) sum_ij (A_ij - k_i k_j / 2m) [c_i = c_j].
pub fn ref_modularity(g: &Graph, p: &Partition) -> f64 {
    let n = g.n_nodes();
    let member = p.membership(n);
    let two_m = 2.0 * g.n_edges() as f64;
    let deg: Vec<f64> = (0..n)
        .map(|u| (0..n).filter(|&v| g.has_edge(u, v)).count() as f64)
        .collect();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if member[i] == member[j] {
                let a = if g.has_edge(i, j) { 1.0 } else { 0.0 };
                q += a - deg[i] * deg[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Two triangles {a,b,c} and {d,e,f} joined by the bridge c-d.
pub fn bridge_graph() -> Graph {
    Graph::from_labeled_edges(
        &["a", "b", "c", "d", "e", "f"],
        &[
            ("a", "b"),
            ("b", "c"),
            ("a", "c"),
            ("c", "d"),
            ("d", "e"),
            ("e", "f"),
            ("d", "f"),
        ],
    )
    .unwrap()
}

pub fn triangle_partition(g: &Graph) -> Partition {
    let ids = |ls: &[&str]| ls.iter().map(|l| g.node(l).unwrap()).collect::<Vec<_>>();
    Partition::new(g, vec![ids(&["a", "b", "c"]), ids(&["d", "e", "f"])]).unwrap()
}

/// Random sparse matrix with every column holding at least one observed
/// value; returned as rows of options.
pub fn random_sparse_rows<R: Rng>(rng: &mut R) -> Vec<Vec<Option<f64>>> {
    let n_rows = rng.gen_range(2..=12);
    let n_cols = rng.gen_range(2..=6);
    let rate: f64 = rng.gen_range(0.0..0.7);
    let mut rows: Vec<Vec<Option<f64>>> = (0..n_rows)
        .map(|_| {
            (0..n_cols)
                .map(|_| (!rng.gen_bool(rate)).then(|| rng.gen_range(-10.0..10.0)))
                .collect()
        })
        .collect();
    for j in 0..n_cols {
        if rows.iter().all(|r| r[j].is_none()) {
            let i = rng.gen_range(0..n_rows);
            rows[i][j] = Some(rng.gen_range(-10.0..10.0));
        }
    }
    rows
}
