//! Community-quality metrics for an unweighted graph and a partition of its
//! nodes: seven whole-structure scores and six per-community scores.

use std::fmt;
use std::io::Write;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::community::Partition;
use crate::error::{Result, SparsimError};
use crate::fmt_f64;
use crate::graph::Graph;

/// Dunn index value. Infinite when no path links any two communities;
/// undefined when the ratio has no meaning (e.g. every community is a
/// singleton).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DunnIndex {
    Finite(f64),
    Infinite,
    Undefined,
}

impl DunnIndex {
    /// Value for ranking: infinite sorts above every finite value,
    /// undefined below.
    pub fn score(self) -> f64 {
        match self {
            DunnIndex::Finite(x) => x,
            DunnIndex::Infinite => f64::INFINITY,
            DunnIndex::Undefined => f64::NEG_INFINITY,
        }
    }
}

impl fmt::Display for DunnIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DunnIndex::Finite(x) => f.write_str(&fmt_f64(*x)),
            DunnIndex::Infinite => f.write_str("infinite"),
            DunnIndex::Undefined => f.write_str("undefined"),
        }
    }
}

impl Serialize for DunnIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DunnIndex::Finite(x) => s.serialize_f64(*x),
            DunnIndex::Infinite => s.serialize_str("infinite"),
            DunnIndex::Undefined => s.serialize_str("undefined"),
        }
    }
}

impl<'de> Deserialize<'de> for DunnIndex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = DunnIndex;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number, \"infinite\" or \"undefined\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<DunnIndex, E> {
                Ok(DunnIndex::Finite(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<DunnIndex, E> {
                Ok(DunnIndex::Finite(v as f64))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<DunnIndex, E> {
                Ok(DunnIndex::Finite(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<DunnIndex, E> {
                match v {
                    "infinite" => Ok(DunnIndex::Infinite),
                    "undefined" => Ok(DunnIndex::Undefined),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralMetrics {
    pub modularity_q: f64,
    pub coverage: f64,
    pub dunn_index: DunnIndex,
    pub avg_clustering_coefficient: f64,
    pub transitivity: f64,
    pub modularity_density: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityMetrics {
    pub community_id: usize,
    pub size: usize,
    pub conductance: f64,
    pub expansion: f64,
    pub normalized_cut: f64,
    pub density: f64,
    pub internal_density: f64,
    pub local_modularity_term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityAverages {
    pub conductance: f64,
    pub expansion: f64,
    pub normalized_cut: f64,
    pub density: f64,
    pub internal_density: f64,
    pub local_modularity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n_nodes: usize,
    pub n_edges: usize,
    pub n_communities: usize,
    pub general: GeneralMetrics,
    pub per_community: Vec<CommunityMetrics>,
    pub averages: CommunityAverages,
    pub local_modularity_sum: f64,
}

/// The thirteen headline metrics compared across configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    ModularityQ,
    Coverage,
    DunnIndex,
    AvgClusteringCoefficient,
    Transitivity,
    ModularityDensity,
    Tpr,
    Conductance,
    Expansion,
    NormalizedCut,
    Density,
    InternalDensity,
    LocalModularity,
}

impl Metric {
    pub const ALL: [Metric; 13] = [
        Metric::ModularityQ,
        Metric::Coverage,
        Metric::DunnIndex,
        Metric::AvgClusteringCoefficient,
        Metric::Transitivity,
        Metric::ModularityDensity,
        Metric::Tpr,
        Metric::Conductance,
        Metric::Expansion,
        Metric::NormalizedCut,
        Metric::Density,
        Metric::InternalDensity,
        Metric::LocalModularity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::ModularityQ => "modularity_q",
            Metric::Coverage => "coverage",
            Metric::DunnIndex => "dunn_index",
            Metric::AvgClusteringCoefficient => "avg_clustering_coefficient",
            Metric::Transitivity => "transitivity",
            Metric::ModularityDensity => "modularity_density",
            Metric::Tpr => "tpr",
            Metric::Conductance => "conductance",
            Metric::Expansion => "expansion",
            Metric::NormalizedCut => "normalized_cut",
            Metric::Density => "density",
            Metric::InternalDensity => "internal_density",
            Metric::LocalModularity => "local_modularity",
        }
    }

    /// Conductance, expansion and normalized cut are better when lower.
    pub fn higher_is_better(self) -> bool {
        !matches!(
            self,
            Metric::Conductance | Metric::Expansion | Metric::NormalizedCut
        )
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl MetricsReport {
    /// Headline value of a metric; per-community metrics use their average.
    pub fn value(&self, metric: Metric) -> f64 {
        let g = &self.general;
        let a = &self.averages;
        match metric {
            Metric::ModularityQ => g.modularity_q,
            Metric::Coverage => g.coverage,
            Metric::DunnIndex => g.dunn_index.score(),
            Metric::AvgClusteringCoefficient => g.avg_clustering_coefficient,
            Metric::Transitivity => g.transitivity,
            Metric::ModularityDensity => g.modularity_density,
            Metric::Tpr => g.tpr,
            Metric::Conductance => a.conductance,
            Metric::Expansion => a.expansion,
            Metric::NormalizedCut => a.normalized_cut,
            Metric::Density => a.density,
            Metric::InternalDensity => a.internal_density,
            Metric::LocalModularity => a.local_modularity,
        }
    }

    /// Long-format rows `(metric, community_id, value)`. General metrics and
    /// per-community averages carry `all` / `mean` in the id column.
    pub fn long_rows(&self) -> Vec<(String, String, String)> {
        let g = &self.general;
        let mut rows: Vec<(String, String, String)> = [
            ("modularity_q", fmt_f64(g.modularity_q)),
            ("coverage", fmt_f64(g.coverage)),
            ("dunn_index", g.dunn_index.to_string()),
            (
                "avg_clustering_coefficient",
                fmt_f64(g.avg_clustering_coefficient),
            ),
            ("transitivity", fmt_f64(g.transitivity)),
            ("modularity_density", fmt_f64(g.modularity_density)),
            ("tpr", fmt_f64(g.tpr)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), "all".to_string(), v))
        .collect();
        for c in &self.per_community {
            let id = c.community_id.to_string();
            for (k, v) in [
                ("conductance", c.conductance),
                ("expansion", c.expansion),
                ("normalized_cut", c.normalized_cut),
                ("density", c.density),
                ("internal_density", c.internal_density),
                ("local_modularity", c.local_modularity_term),
            ] {
                rows.push((k.to_string(), id.clone(), fmt_f64(v)));
            }
        }
        let a = &self.averages;
        for (k, v) in [
            ("conductance", a.conductance),
            ("expansion", a.expansion),
            ("normalized_cut", a.normalized_cut),
            ("density", a.density),
            ("internal_density", a.internal_density),
            ("local_modularity", a.local_modularity),
        ] {
            rows.push((k.to_string(), "mean".to_string(), fmt_f64(v)));
        }
        rows
    }

    pub fn write_long_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["metric", "community_id", "value"])?;
        for (m, c, v) in self.long_rows() {
            wtr.write_record([m, c, v])?;
        }
        wtr.flush()
            .map_err(|e| SparsimError::io("<csv writer>", e))?;
        Ok(())
    }
}

fn require_edges(g: &Graph) -> Result<f64> {
    match g.n_edges() {
        0 => Err(SparsimError::Undefined(
            "metric requires at least one edge".into(),
        )),
        m => Ok(m as f64),
    }
}

fn mask(g: &Graph, community: &[usize]) -> Vec<bool> {
    let mut inside = vec![false; g.n_nodes()];
    for &u in community {
        inside[u] = true;
    }
    inside
}

/// Internal edge count, boundary edge count and degree sum of a node set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct CutCounts {
    internal: usize,
    boundary: usize,
    volume: usize,
}

fn cut_counts(g: &Graph, community: &[usize]) -> CutCounts {
    let inside = mask(g, community);
    let (mut twice_internal, mut boundary, mut volume) = (0, 0, 0);
    for &u in community {
        for v in g.neighbors(u) {
            volume += 1;
            if inside[v] {
                twice_internal += 1;
            } else {
                boundary += 1;
            }
        }
    }
    CutCounts {
        internal: twice_internal / 2,
        boundary,
        volume,
    }
}

fn complement(g: &Graph, community: &[usize]) -> Vec<usize> {
    let inside = mask(g, community);
    (0..g.n_nodes()).filter(|&u| !inside[u]).collect()
}

/// Per-community modularity terms `l_c/m - (d_c/2m)^2` and their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalModularity {
    pub terms: Vec<f64>,
    pub sum: f64,
}

pub fn local_modularity(g: &Graph, p: &Partition) -> Result<LocalModularity> {
    let m = require_edges(g)?;
    let terms: Vec<f64> = p
        .communities()
        .iter()
        .map(|c| {
            let cc = cut_counts(g, c);
            let share = cc.volume as f64 / (2.0 * m);
            cc.internal as f64 / m - share * share
        })
        .collect();
    let sum = terms.iter().sum();
    Ok(LocalModularity { terms, sum })
}

pub fn modularity_q(g: &Graph, p: &Partition) -> Result<f64> {
    local_modularity(g, p).map(|l| l.sum)
}

pub fn coverage(g: &Graph, p: &Partition) -> Result<f64> {
    let m = require_edges(g)?;
    let intra: usize = p
        .communities()
        .iter()
        .map(|c| cut_counts(g, c).internal)
        .sum();
    Ok(intra as f64 / m)
}

/// Single-linkage hop distance between communities over the maximum
/// community diameter, all measured on `g`.
pub fn dunn_index(g: &Graph, p: &Partition) -> Result<DunnIndex> {
    let comms = p.communities();
    if comms.len() < 2 {
        return Err(SparsimError::Undefined(
            "dunn index needs at least two communities".into(),
        ));
    }
    let dist: Vec<Vec<Option<usize>>> = (0..g.n_nodes()).map(|s| g.bfs_distances(s)).collect();
    let span = |a: &[usize], b: &[usize], pick_max: bool| -> Option<usize> {
        // None is infinite
        let mut best: Option<Option<usize>> = None;
        for &u in a {
            for &v in b {
                if u == v {
                    continue;
                }
                let d = dist[u][v];
                let better = match best {
                    None => true,
                    Some(cur) => {
                        let key = |x: Option<usize>| x.unwrap_or(usize::MAX);
                        if pick_max {
                            key(d) > key(cur)
                        } else {
                            key(d) < key(cur)
                        }
                    }
                };
                if better {
                    best = Some(d);
                }
            }
        }
        best.unwrap_or(Some(0))
    };
    let mut min_between: Option<usize> = None;
    let mut any_finite_between = false;
    for i in 0..comms.len() {
        for j in i + 1..comms.len() {
            if let Some(d) = span(&comms[i], &comms[j], false) {
                any_finite_between = true;
                min_between = Some(min_between.map_or(d, |m: usize| m.min(d)));
            }
        }
    }
    let mut max_diameter = Some(0usize);
    for c in comms {
        match (span(c, c, true), max_diameter) {
            (None, _) => max_diameter = None,
            (Some(d), Some(cur)) => max_diameter = Some(cur.max(d)),
            (Some(_), None) => {}
        }
    }
    match (any_finite_between, max_diameter) {
        (_, Some(0)) => Err(SparsimError::Undefined(
            "dunn index undefined: every community has zero diameter".into(),
        )),
        (false, Some(_)) => Ok(DunnIndex::Infinite),
        (true, Some(diam)) => Ok(DunnIndex::Finite(min_between.unwrap() as f64 / diam as f64)),
        (true, None) => Ok(DunnIndex::Finite(0.0)),
        (false, None) => Err(SparsimError::Undefined(
            "dunn index undefined: infinite separation and infinite diameter".into(),
        )),
    }
}

/// Number of edges among the neighbours of `u`.
fn neighbour_links(g: &Graph, u: usize) -> usize {
    let nbrs: Vec<usize> = g.neighbors(u).collect();
    let mut links = 0;
    for (i, &a) in nbrs.iter().enumerate() {
        for &b in &nbrs[i + 1..] {
            if g.has_edge(a, b) {
                links += 1;
            }
        }
    }
    links
}

/// Local clustering coefficient; nodes of degree below 2 score 0.
pub fn local_clustering(g: &Graph, u: usize) -> f64 {
    let k = g.degree(u);
    if k < 2 {
        return 0.0;
    }
    2.0 * neighbour_links(g, u) as f64 / (k * (k - 1)) as f64
}

pub fn avg_clustering_coefficient(g: &Graph) -> f64 {
    if g.n_nodes() == 0 {
        return 0.0;
    }
    (0..g.n_nodes())
        .map(|u| local_clustering(g, u))
        .sum::<f64>()
        / g.n_nodes() as f64
}

/// Three times the triangle count over the number of connected triples;
/// 0 when there are no triples.
pub fn transitivity(g: &Graph) -> f64 {
    let mut closed = 0usize; // each triangle counted once per corner
    let mut triples = 0usize;
    for u in 0..g.n_nodes() {
        let k = g.degree(u);
        triples += k * k.saturating_sub(1) / 2;
        closed += neighbour_links(g, u);
    }
    if triples == 0 {
        0.0
    } else {
        closed as f64 / triples as f64
    }
}

/// Fraction of nodes lying on at least one triangle.
pub fn tpr(g: &Graph) -> f64 {
    if g.n_nodes() == 0 {
        return 0.0;
    }
    let on_triangle = (0..g.n_nodes())
        .filter(|&u| neighbour_links(g, u) > 0)
        .count();
    on_triangle as f64 / g.n_nodes() as f64
}

/// `2 m_S / (|S| (|S| - 1))`; 0 for singletons.
pub fn density(g: &Graph, community: &[usize]) -> f64 {
    let n = community.len();
    if n < 2 {
        return 0.0;
    }
    2.0 * cut_counts(g, community).internal as f64 / (n * (n - 1)) as f64
}

/// Same formula as [`density`]; reported under its own name.
pub fn internal_density(g: &Graph, community: &[usize]) -> f64 {
    density(g, community)
}

/// Sum over communities of internal density times the community's share of
/// edges, `m_i / m`.
pub fn modularity_density(g: &Graph, p: &Partition) -> Result<f64> {
    let m = require_edges(g)?;
    Ok(p.communities()
        .iter()
        .map(|c| density(g, c) * cut_counts(g, c).internal as f64 / m)
        .sum())
}

fn cut_ratio(cc: CutCounts) -> f64 {
    let den = 2 * cc.internal + cc.boundary;
    if den == 0 {
        0.0
    } else {
        cc.boundary as f64 / den as f64
    }
}

/// `c_S / (2 m_S + c_S)`; 0 for a community with no edges at all.
pub fn conductance(g: &Graph, community: &[usize]) -> f64 {
    cut_ratio(cut_counts(g, community))
}

/// Boundary edges per member node.
pub fn expansion(g: &Graph, community: &[usize]) -> f64 {
    if community.is_empty() {
        return 0.0;
    }
    cut_counts(g, community).boundary as f64 / community.len() as f64
}

/// Cut ratio of the community plus that of its complement.
pub fn normalized_cut(g: &Graph, community: &[usize]) -> f64 {
    let rest = complement(g, community);
    cut_ratio(cut_counts(g, community)) + cut_ratio(cut_counts(g, &rest))
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

pub fn full_report(g: &Graph, p: &Partition) -> Result<MetricsReport> {
    require_edges(g)?;
    let local = local_modularity(g, p)?;
    let dunn = match dunn_index(g, p) {
        Ok(d) => d,
        Err(SparsimError::Undefined(_)) => DunnIndex::Undefined,
        Err(e) => return Err(e),
    };
    let general = GeneralMetrics {
        modularity_q: local.sum,
        coverage: coverage(g, p)?,
        dunn_index: dunn,
        avg_clustering_coefficient: avg_clustering_coefficient(g),
        transitivity: transitivity(g),
        modularity_density: modularity_density(g, p)?,
        tpr: tpr(g),
    };
    let per_community: Vec<CommunityMetrics> = p
        .communities()
        .iter()
        .enumerate()
        .map(|(id, c)| CommunityMetrics {
            community_id: id,
            size: c.len(),
            conductance: conductance(g, c),
            expansion: expansion(g, c),
            normalized_cut: normalized_cut(g, c),
            density: density(g, c),
            internal_density: internal_density(g, c),
            local_modularity_term: local.terms[id],
        })
        .collect();
    let pc = &per_community;
    let averages = CommunityAverages {
        conductance: mean(pc.iter().map(|c| c.conductance)),
        expansion: mean(pc.iter().map(|c| c.expansion)),
        normalized_cut: mean(pc.iter().map(|c| c.normalized_cut)),
        density: mean(pc.iter().map(|c| c.density)),
        internal_density: mean(pc.iter().map(|c| c.internal_density)),
        local_modularity: mean(pc.iter().map(|c| c.local_modularity_term)),
    };
    Ok(MetricsReport {
        n_nodes: g.n_nodes(),
        n_edges: g.n_edges(),
        n_communities: p.len(),
        general,
        per_community,
        averages,
        local_modularity_sum: local.sum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= TOL
    }

    fn bridge() -> (Graph, Partition) {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (3, 5)])
            .unwrap();
        let p = Partition::new(&g, vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        (g, p)
    }

    fn two_triangles() -> (Graph, Partition) {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        let p = Partition::new(&g, vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        (g, p)
    }

    fn triangle() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn modularity_examples() {
        let (g, p) = two_triangles();
        assert!(close(modularity_q(&g, &p).unwrap(), 0.5));
        let (g, _) = bridge();
        let whole = Partition::new(&g, vec![(0..6).collect()]).unwrap();
        assert!(close(modularity_q(&g, &whole).unwrap(), 0.0));
        let t = triangle();
        let singles = Partition::new(&t, vec![vec![0], vec![1], vec![2]]).unwrap();
        assert!(close(modularity_q(&t, &singles).unwrap(), -1.0 / 3.0));
        let empty = Graph::from_edges(2, &[]).unwrap();
        let p = Partition::new(&empty, vec![vec![0, 1]]).unwrap();
        assert!(modularity_q(&empty, &p).is_err());
    }

    #[test]
    fn coverage_examples() {
        let (g, p) = bridge();
        assert!(close(coverage(&g, &p).unwrap(), 6.0 / 7.0));
        let whole = Partition::new(&g, vec![(0..6).collect()]).unwrap();
        assert_eq!(coverage(&g, &whole).unwrap(), 1.0);
        let singles = Partition::new(&g, (0..6).map(|u| vec![u]).collect()).unwrap();
        assert_eq!(coverage(&g, &singles).unwrap(), 0.0);
    }

    #[test]
    fn dunn_examples() {
        let (g, p) = bridge();
        assert_eq!(dunn_index(&g, &p).unwrap(), DunnIndex::Finite(1.0));

        let (g, p) = two_triangles();
        assert_eq!(dunn_index(&g, &p).unwrap(), DunnIndex::Infinite);

        // path a-b-c-d-e, communities {a,b,c} (diameter 2) and {d,e}
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let p = Partition::new(&g, vec![vec![0, 1, 2], vec![3, 4]]).unwrap();
        assert_eq!(dunn_index(&g, &p).unwrap(), DunnIndex::Finite(0.5));

        let t = triangle();
        let singles = Partition::new(&t, vec![vec![0], vec![1], vec![2]]).unwrap();
        assert!(dunn_index(&t, &singles).is_err());
        let whole = Partition::new(&t, vec![vec![0, 1, 2]]).unwrap();
        assert!(dunn_index(&t, &whole).is_err());
    }

    #[test]
    fn clustering_examples() {
        assert_eq!(avg_clustering_coefficient(&triangle()), 1.0);
        let path = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(avg_clustering_coefficient(&path), 0.0);
        let (g, _) = bridge();
        assert!(close(avg_clustering_coefficient(&g), 7.0 / 9.0));
    }

    #[test]
    fn transitivity_examples() {
        assert_eq!(transitivity(&triangle()), 1.0);
        let star = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(transitivity(&star), 0.0);
        let (g, _) = bridge();
        assert!(close(transitivity(&g), 0.6));
    }

    #[test]
    fn modularity_density_examples() {
        let (g, p) = two_triangles();
        assert!(close(modularity_density(&g, &p).unwrap(), 1.0));
        let singles = Partition::new(&g, (0..6).map(|u| vec![u]).collect()).unwrap();
        assert_eq!(modularity_density(&g, &singles).unwrap(), 0.0);
        let t = triangle();
        let whole = Partition::new(&t, vec![vec![0, 1, 2]]).unwrap();
        assert_eq!(modularity_density(&t, &whole).unwrap(), 1.0);
    }

    #[test]
    fn tpr_examples() {
        assert_eq!(tpr(&triangle()), 1.0);
        let path = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(tpr(&path), 0.0);
        let (g, _) = bridge();
        assert_eq!(tpr(&g), 1.0);
    }

    #[test]
    fn boundary_metrics() {
        let (g, _) = bridge();
        let tri = [0, 1, 2];
        assert!(close(conductance(&g, &tri), 1.0 / 7.0));
        assert!(close(expansion(&g, &tri), 1.0 / 3.0));
        assert!(close(normalized_cut(&g, &tri), 2.0 / 7.0));

        let (g2, _) = two_triangles();
        assert_eq!(conductance(&g2, &tri), 0.0);
        assert_eq!(expansion(&g2, &tri), 0.0);
        assert_eq!(normalized_cut(&g2, &tri), 0.0);
        assert_eq!(normalized_cut(&g2, &[0, 1, 2, 3, 4, 5]), 0.0);

        let pendant = Graph::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(conductance(&pendant, &[0]), 1.0);
        let star = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(expansion(&star, &[0]), 3.0);
    }

    #[test]
    fn density_examples() {
        assert_eq!(density(&triangle(), &[0, 1, 2]), 1.0);
        let one_edge = Graph::from_edges(3, &[(0, 1)]).unwrap();
        assert!(close(density(&one_edge, &[0, 1, 2]), 1.0 / 3.0));
        assert_eq!(density(&one_edge, &[2]), 0.0);
        assert_eq!(
            internal_density(&one_edge, &[0, 1, 2]),
            density(&one_edge, &[0, 1, 2])
        );
    }

    #[test]
    fn local_modularity_examples() {
        let (g, p) = two_triangles();
        let l = local_modularity(&g, &p).unwrap();
        assert_eq!(l.terms, vec![0.25, 0.25]);
        assert_eq!(l.sum, 0.5);

        let t = triangle();
        let whole = Partition::new(&t, vec![vec![0, 1, 2]]).unwrap();
        assert!(close(local_modularity(&t, &whole).unwrap().sum, 0.0));

        // star centre of degree 3 in a 3-edge graph: -(3/6)^2
        let star = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let p = Partition::new(&star, vec![vec![0], vec![1, 2, 3]]).unwrap();
        let l = local_modularity(&star, &p).unwrap();
        assert!(close(l.terms[1], -0.25));
    }

    #[test]
    fn report_on_bridge_graph() {
        let (g, p) = bridge();
        let r = full_report(&g, &p).unwrap();
        // each triangle: l=3, d=7 -> 3/7 - (7/14)^2
        let q = 2.0 * (3.0 / 7.0 - 0.25);
        assert!(close(r.general.modularity_q, q));
        assert!(close(r.general.coverage, 6.0 / 7.0));
        assert_eq!(r.general.dunn_index, DunnIndex::Finite(1.0));
        assert!(close(r.general.avg_clustering_coefficient, 7.0 / 9.0));
        assert!(close(r.general.transitivity, 0.6));
        assert!(close(r.general.modularity_density, 6.0 / 7.0));
        assert_eq!(r.general.tpr, 1.0);
        assert!(close(r.averages.conductance, 1.0 / 7.0));
        assert!(close(r.averages.expansion, 1.0 / 3.0));
        assert!(close(r.averages.normalized_cut, 2.0 / 7.0));
        assert_eq!(r.averages.density, 1.0);
        assert_eq!(r.averages.internal_density, 1.0);
        assert!(close(r.averages.local_modularity, q / 2.0));

        let json = serde_json::to_string(&r).unwrap();
        let back: MetricsReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn report_requires_edges() {
        let g = Graph::from_edges(3, &[]).unwrap();
        let p = Partition::new(&g, vec![vec![0, 1, 2]]).unwrap();
        assert!(full_report(&g, &p).is_err());
    }

    #[test]
    fn dunn_json_sentinels_round_trip() {
        for d in [
            DunnIndex::Finite(0.25),
            DunnIndex::Infinite,
            DunnIndex::Undefined,
        ] {
            let s = serde_json::to_string(&d).unwrap();
            assert_eq!(serde_json::from_str::<DunnIndex>(&s).unwrap(), d);
        }
        assert_eq!(
            serde_json::to_string(&DunnIndex::Infinite).unwrap(),
            "\"infinite\""
        );
    }
}
