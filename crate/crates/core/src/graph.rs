//! Simple undirected graphs on vertex set {0, .., n-1}, separations, and
//! gluing along identified vertex sets.

use std::collections::BTreeSet;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{binom2, Error, Rat, Result};

/// Undirected simple graph with adjacency sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<BTreeSet<usize>>,
    m: usize,
}

impl Graph {
    /// Edgeless graph on n vertices.
    pub fn new(n: usize) -> Self {
        Graph {
            n,
            adj: vec![BTreeSet::new(); n],
            m: 0,
        }
    }

    /// Complete graph on n vertices.
    pub fn complete(n: usize) -> Self {
        let mut g = Graph::new(n);
        for u in 0..n {
            for v in (u + 1)..n {
                g.add_edge(u, v);
            }
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Graph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    /// Adds edge {u, v}; no-op if already present. Panics on self-loops and
    /// out-of-range endpoints.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(u != v, "self-loop at {u}");
        assert!(u < self.n && v < self.n, "edge ({u},{v}) out of range");
        if self.adj[u].insert(v) {
            self.adj[v].insert(u);
            self.m += 1;
        }
    }

    /// Makes the given vertices pairwise adjacent.
    pub fn add_clique(&mut self, verts: &[usize]) {
        for (i, &u) in verts.iter().enumerate() {
            for &v in &verts[i + 1..] {
                self.add_edge(u, v);
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.adj[u].contains(&v)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adj[v]
    }

    /// Edges in lexicographic order, each as (u, v) with u < v.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.m);
        for u in 0..self.n {
            for &v in self.adj[u].range((u + 1)..) {
                out.push((u, v));
            }
        }
        out
    }

    /// Non-adjacent pairs (u, v), u < v, in lexicographic order.
    pub fn anti_edge_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                if !self.adj[u].contains(&v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Number of non-adjacent pairs: C(n,2) - m.
    pub fn anti_edge_count(&self) -> u64 {
        let n = self.n as u64;
        n * (n - 1) / 2 - self.m as u64
    }

    /// Exact average degree 2m/n. Requires n >= 1.
    pub fn average_degree(&self) -> Rat {
        assert!(self.n > 0, "average degree of empty graph");
        crate::rat(2 * self.m as i64, self.n as i64)
    }

    /// Exact test 2m/n >= r.
    pub fn average_degree_at_least(&self, r: &Rat) -> bool {
        self.average_degree() >= *r
    }

    /// Number of edges with both endpoints in the set.
    pub fn edges_within(&self, set: &BTreeSet<usize>) -> usize {
        let mut count = 0;
        for &u in set {
            count += self.adj[u].range((u + 1)..).filter(|v| set.contains(v)).count();
        }
        count
    }

    /// C(|set|, 2) minus the edges within the set, as an exact rational.
    pub fn anti_edges_within(&self, set: &BTreeSet<usize>) -> Rat {
        binom2(set.len() as u64) - Rat::from(num_bigint::BigInt::from(self.edges_within(set)))
    }

    /// Induced subgraph; vertices are renumbered by rank within the set.
    pub fn induced(&self, set: &BTreeSet<usize>) -> Graph {
        let index: std::collections::BTreeMap<usize, usize> =
            set.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut g = Graph::new(set.len());
        for &u in set {
            for &v in self.adj[u].range((u + 1)..) {
                if set.contains(&v) {
                    g.add_edge(index[&u], index[&v]);
                }
            }
        }
        g
    }

    /// Connected components as sorted vertex sets, ordered by smallest member.
    pub fn components(&self) -> Vec<BTreeSet<usize>> {
        let mut seen = vec![false; self.n];
        let mut comps = Vec::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(u) = stack.pop() {
                comp.insert(u);
                for &v in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            comps.push(comp);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().len() == 1
    }

    /// Plain-text edge list: first line "n m", then one "u v" line per edge
    /// in lexicographic order.
    pub fn to_edge_list_string(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.m);
        for (u, v) in self.edges() {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }

    /// Parses the edge-list format produced by [`to_edge_list_string`].
    ///
    /// Rejects self-loops, out-of-range endpoints, repeated edges, and edge
    /// counts that do not match the header.
    ///
    /// [`to_edge_list_string`]: Graph::to_edge_list_string
    pub fn parse_edge_list(text: &str) -> Result<Graph> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty input".into()))?;
        let mut it = header.split_whitespace();
        let n: usize = it
            .next()
            .ok_or_else(|| Error::Parse("missing vertex count".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad vertex count: {e}")))?;
        let m: usize = it
            .next()
            .ok_or_else(|| Error::Parse("missing edge count".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad edge count: {e}")))?;
        if it.next().is_some() {
            return Err(Error::Parse("trailing tokens in header".into()));
        }
        let mut g = Graph::new(n);
        for line in lines {
            let mut it = line.split_whitespace();
            let u: usize = it
                .next()
                .ok_or_else(|| Error::Parse("missing endpoint".into()))?
                .parse()
                .map_err(|e| Error::Parse(format!("bad endpoint: {e}")))?;
            let v: usize = it
                .next()
                .ok_or_else(|| Error::Parse(format!("edge line '{line}' lacks second endpoint")))?
                .parse()
                .map_err(|e| Error::Parse(format!("bad endpoint: {e}")))?;
            if it.next().is_some() {
                return Err(Error::Parse(format!("trailing tokens in edge line '{line}'")));
            }
            if u == v {
                return Err(Error::Parse(format!("self-loop at {u}")));
            }
            if u >= n || v >= n {
                return Err(Error::Parse(format!("edge ({u},{v}) out of range for n={n}")));
            }
            if g.has_edge(u, v) {
                return Err(Error::Parse(format!("repeated edge ({u},{v})")));
            }
            g.add_edge(u, v);
        }
        if g.m != m {
            return Err(Error::Parse(format!(
                "header announces {m} edges, found {}",
                g.m
            )));
        }
        Ok(g)
    }
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Serialize for Graph {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphRepr {
            n: self.n,
            edges: self.edges(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = GraphRepr::deserialize(d)?;
        let mut g = Graph::new(repr.n);
        for (u, v) in repr.edges {
            if u == v {
                return Err(D::Error::custom(format!("self-loop at {u}")));
            }
            if u >= repr.n || v >= repr.n {
                return Err(D::Error::custom(format!(
                    "edge ({u},{v}) out of range for n={}",
                    repr.n
                )));
            }
            if g.has_edge(u, v) {
                return Err(D::Error::custom(format!("repeated edge ({u},{v})")));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }
}

/// A separation (A, B) of a graph: A and B cover the vertex set and no edge
/// joins A \ B to B \ A. The separator is the overlap of A and B.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Separation {
    pub a: BTreeSet<usize>,
    pub b: BTreeSet<usize>,
}

impl Separation {
    pub fn separator(&self) -> BTreeSet<usize> {
        self.a.intersection(&self.b).copied().collect()
    }

    pub fn order(&self) -> usize {
        self.a.intersection(&self.b).count()
    }
}

/// Checks that sep is a separation of g with both sides proper (A \ B and
/// B \ A nonempty) and separator order at most max_order.
pub fn verify_separation(g: &Graph, sep: &Separation, max_order: usize) -> Result<()> {
    let all: BTreeSet<usize> = (0..g.n()).collect();
    let union: BTreeSet<usize> = sep.a.union(&sep.b).copied().collect();
    if union != all {
        return Err(Error::InvalidSeparation(
            "sides do not cover the vertex set".into(),
        ));
    }
    let s = sep.separator();
    if s.len() > max_order {
        return Err(Error::InvalidSeparation(format!(
            "separator has {} vertices, allowed {max_order}",
            s.len()
        )));
    }
    let a_only: BTreeSet<usize> = sep.a.difference(&s).copied().collect();
    let b_only: BTreeSet<usize> = sep.b.difference(&s).copied().collect();
    if a_only.is_empty() || b_only.is_empty() {
        return Err(Error::InvalidSeparation("a side is contained in the other".into()));
    }
    for &u in &a_only {
        for v in g.neighbors(u) {
            if b_only.contains(v) {
                return Err(Error::InvalidSeparation(format!(
                    "edge ({u},{v}) crosses the separation"
                )));
            }
        }
    }
    Ok(())
}

/// Glues g2 onto g1, identifying each pair (v1, v2) of the pairing.
///
/// Vertices of g1 keep their ids; unpaired vertices of g2 get fresh ids
/// n1, n1+1, .. in ascending order of their id in g2. Edges are unioned.
pub fn glue(g1: &Graph, g2: &Graph, pairing: &[(usize, usize)]) -> Result<Graph> {
    let mut seen1 = BTreeSet::new();
    let mut map2 = std::collections::BTreeMap::new();
    for &(v1, v2) in pairing {
        if v1 >= g1.n() || v2 >= g2.n() {
            return Err(Error::InvalidGraph(format!(
                "pairing ({v1},{v2}) out of range"
            )));
        }
        if !seen1.insert(v1) {
            return Err(Error::InvalidGraph(format!("vertex {v1} paired twice")));
        }
        if map2.insert(v2, v1).is_some() {
            return Err(Error::InvalidGraph(format!("vertex {v2} paired twice")));
        }
    }
    let mut next = g1.n();
    for v2 in 0..g2.n() {
        map2.entry(v2).or_insert_with(|| {
            let id = next;
            next += 1;
            id
        });
    }
    let mut g = Graph::new(next);
    for (u, v) in g1.edges() {
        g.add_edge(u, v);
    }
    for (u, v) in g2.edges() {
        g.add_edge(map2[&u], map2[&v]);
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{rat, rat_int};

    fn c5() -> Graph {
        Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)])
    }

    #[test]
    fn basic_counts() {
        let g = c5();
        assert_eq!(g.n(), 5);
        assert_eq!(g.m(), 5);
        assert_eq!(g.anti_edge_count(), 5);
        assert_eq!(g.average_degree(), rat_int(2));
        assert_eq!(g.anti_edge_pairs().len(), 5);
        assert!(g.average_degree_at_least(&rat_int(2)));
        assert!(!g.average_degree_at_least(&rat(20, 9)));
        assert_eq!(Graph::complete(6).m(), 15);
        assert_eq!(Graph::complete(6).anti_edge_count(), 0);
    }

    #[test]
    fn within_counts() {
        let g = c5();
        let set: BTreeSet<usize> = [0, 1, 2].into_iter().collect();
        assert_eq!(g.edges_within(&set), 2);
        assert_eq!(g.anti_edges_within(&set), rat_int(1));
        let g = g.induced(&set);
        assert_eq!(g.n(), 3);
        assert_eq!(g.edges(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn components_split() {
        let g = Graph::from_edges(5, &[(0, 3), (1, 2)]);
        let comps = g.components();
        assert_eq!(comps.len(), 3);
        assert_eq!(comps[0], [0, 3].into_iter().collect());
        assert_eq!(comps[1], [1, 2].into_iter().collect());
        assert_eq!(comps[2], [4].into_iter().collect());
        assert!(!g.is_connected());
        assert!(c5().is_connected());
    }

    #[test]
    fn separation_checks() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        let sep = Separation {
            a: [0, 1].into_iter().collect(),
            b: [1, 2, 3].into_iter().collect(),
        };
        assert_eq!(sep.separator(), [1].into_iter().collect());
        assert_eq!(sep.order(), 1);
        verify_separation(&g, &sep, 1).unwrap();
        assert!(verify_separation(&g, &sep, 0).is_err());
        let bad = Separation {
            a: [0, 1].into_iter().collect(),
            b: [2, 3].into_iter().collect(),
        };
        assert!(verify_separation(&g, &bad, 4).is_err());
        let not_cover = Separation {
            a: [0, 1].into_iter().collect(),
            b: [1, 2].into_iter().collect(),
        };
        assert!(verify_separation(&g, &not_cover, 4).is_err());
    }

    #[test]
    fn glue_shares_edges() {
        // Two K4 glued along an edge: 6 + 6 - 1 = 11 edges on 6 vertices.
        let g = glue(&Graph::complete(4), &Graph::complete(4), &[(0, 0), (1, 1)]).unwrap();
        assert_eq!(g.n(), 6);
        assert_eq!(g.m(), 11);
        // e(G) = e(A) + e(B) - e(S) when both sides agree on the overlap.
        let shared: BTreeSet<usize> = [0, 1].into_iter().collect();
        assert_eq!(g.m(), 6 + 6 - g.edges_within(&shared));

        assert!(glue(&Graph::complete(3), &Graph::complete(3), &[(0, 0), (0, 1)]).is_err());
        assert!(glue(&Graph::complete(3), &Graph::complete(3), &[(3, 0)]).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = c5();
        let text = g.to_edge_list_string();
        assert!(text.starts_with("5 5\n"));
        assert_eq!(Graph::parse_edge_list(&text).unwrap(), g);

        assert!(Graph::parse_edge_list("").is_err());
        assert!(Graph::parse_edge_list("2 1\n0 0\n").is_err());
        assert!(Graph::parse_edge_list("2 1\n0 5\n").is_err());
        assert!(Graph::parse_edge_list("2 2\n0 1\n0 1\n").is_err());
        assert!(Graph::parse_edge_list("2 2\n0 1\n").is_err());
        assert!(Graph::parse_edge_list("3 1\n0 1 2\n").is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = c5();
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(
            json,
            r#"{"n":5,"edges":[[0,1],[0,4],[1,2],[2,3],[3,4]]}"#
        );
        let back: Graph = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<Graph>(r#"{"n":2,"edges":[[0,2]]}"#).is_err());
        assert!(serde_json::from_str::<Graph>(r#"{"n":2,"edges":[[1,1]]}"#).is_err());
    }
}
