//! Vertex connectivity via max-flow on the vertex-split digraph, and the
//! search for separations of bounded order.
//!
//! A separation of order at most k exists iff the graph is disconnected or
//! some non-adjacent pair has local connectivity at most k, so scanning pairs
//! in lexicographic order is a complete search.

use std::collections::BTreeSet;

use crate::graph::{Graph, Separation};

const INF: u32 = u32::MAX / 2;

struct FlowNet {
    // arcs stored as interleaved forward/reverse pairs; arc i ^ 1 is the
    // reverse of arc i
    to: Vec<usize>,
    cap: Vec<u32>,
    adj: Vec<Vec<usize>>,
}

impl FlowNet {
    fn new(n_nodes: usize) -> Self {
        FlowNet {
            to: Vec::new(),
            cap: Vec::new(),
            adj: vec![Vec::new(); n_nodes],
        }
    }

    fn add_arc(&mut self, u: usize, v: usize, cap: u32) {
        self.adj[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(cap);
        self.adj[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(0);
    }

    /// Edmonds-Karp augmentation from s to t, stopping once `limit` units
    /// have been pushed. Each augmenting path here carries exactly one unit
    /// because every path crosses a unit-capacity split arc.
    fn max_flow(&mut self, s: usize, t: usize, limit: u32) -> u32 {
        let mut flow = 0;
        let mut pred = vec![usize::MAX; self.adj.len()];
        while flow < limit {
            pred.fill(usize::MAX);
            let mut queue = std::collections::VecDeque::from([s]);
            'bfs: while let Some(u) = queue.pop_front() {
                for &a in &self.adj[u] {
                    let v = self.to[a];
                    if self.cap[a] > 0 && pred[v] == usize::MAX && v != s {
                        pred[v] = a;
                        if v == t {
                            break 'bfs;
                        }
                        queue.push_back(v);
                    }
                }
            }
            if pred[t] == usize::MAX {
                break;
            }
            let mut bottleneck = u32::MAX;
            let mut v = t;
            while v != s {
                let a = pred[v];
                bottleneck = bottleneck.min(self.cap[a]);
                v = self.to[a ^ 1];
            }
            let mut v = t;
            while v != s {
                let a = pred[v];
                self.cap[a] -= bottleneck;
                self.cap[a ^ 1] += bottleneck;
                v = self.to[a ^ 1];
            }
            flow += bottleneck;
        }
        flow
    }

    /// Nodes reachable from s in the residual network.
    fn residual_reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &a in &self.adj[u] {
                let v = self.to[a];
                if self.cap[a] > 0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}

// Vertex-split digraph: vertex x becomes in-node 2x and out-node 2x+1 with a
// unit arc between them; each edge {u,v} becomes two uncapped arcs
// out(u)->in(v), out(v)->in(u).
fn split_net(g: &Graph) -> FlowNet {
    let mut net = FlowNet::new(2 * g.n());
    for x in 0..g.n() {
        net.add_arc(2 * x, 2 * x + 1, 1);
    }
    for (u, v) in g.edges() {
        net.add_arc(2 * u + 1, 2 * v, INF);
        net.add_arc(2 * v + 1, 2 * u, INF);
    }
    net
}

/// Local connectivity of a non-adjacent pair, capped at `limit`: the number
/// of internally disjoint s-t paths, equivalently the least order of an
/// (s,t)-separator.
pub fn local_connectivity_limited(g: &Graph, s: usize, t: usize, limit: u32) -> u32 {
    assert!(s != t && !g.has_edge(s, t), "pair must be non-adjacent");
    split_net(g).max_flow(2 * s + 1, 2 * t, limit)
}

/// Local connectivity of any pair. For adjacent pairs this is one more than
/// the local connectivity with the shared edge removed.
pub fn local_connectivity(g: &Graph, s: usize, t: usize) -> u32 {
    assert!(s != t);
    if g.has_edge(s, t) {
        let mut h = Graph::new(g.n());
        for (u, v) in g.edges() {
            if (u, v) != (s.min(t), s.max(t)) {
                h.add_edge(u, v);
            }
        }
        1 + local_connectivity(&h, s, t)
    } else {
        local_connectivity_limited(g, s, t, INF)
    }
}

/// Whether g is (k+1)-connected: at least k+2 vertices and no separator of
/// order at most k.
pub fn is_k_plus_one_connected(g: &Graph, k: usize) -> bool {
    if g.n() < k + 2 {
        return false;
    }
    if !g.is_connected() {
        return false;
    }
    for (u, v) in g.anti_edge_pairs() {
        if local_connectivity_limited(g, u, v, k as u32 + 1) <= k as u32 {
            return false;
        }
    }
    true
}

/// Finds a separation of order at most k, if one exists.
///
/// Disconnected graphs split along the empty separator, with the component
/// of the smallest vertex as one side. Otherwise the first non-adjacent pair
/// (in lexicographic order) with local connectivity at most k yields the
/// canonical max-flow min-cut. Returns None when the graph has no proper
/// separation of that order (in particular for complete graphs).
pub fn find_separation(g: &Graph, k: usize) -> Option<Separation> {
    if g.n() < 2 {
        return None;
    }
    let comps = g.components();
    if comps.len() > 1 {
        let a = comps[0].clone();
        let b: BTreeSet<usize> = (0..g.n()).filter(|v| !a.contains(v)).collect();
        return Some(Separation { a, b });
    }
    for (s, t) in g.anti_edge_pairs() {
        let mut net = split_net(g);
        let flow = net.max_flow(2 * s + 1, 2 * t, k as u32 + 1);
        if flow <= k as u32 {
            // The flow is maximal (the loop stopped on an empty residual
            // path, not on the limit), so residual reachability gives a
            // minimum vertex cut.
            let reach = net.residual_reachable(2 * s + 1);
            let sep: BTreeSet<usize> =
                (0..g.n()).filter(|&x| reach[2 * x] && !reach[2 * x + 1]).collect();
            let mut a: BTreeSet<usize> =
                (0..g.n()).filter(|&x| reach[2 * x + 1]).collect();
            a.extend(&sep);
            let b: BTreeSet<usize> = (0..g.n())
                .filter(|x| !a.contains(x) || sep.contains(x))
                .collect();
            debug_assert!(crate::graph::verify_separation(g, &Separation { a: a.clone(), b: b.clone() }, k).is_ok());
            return Some(Separation { a, b });
        }
    }
    None
}

/// Finds a separation of order at most k of the subgraph induced on `part`,
/// expressed in the original vertex ids.
pub fn find_separation_within(
    g: &Graph,
    part: &BTreeSet<usize>,
    k: usize,
) -> Option<Separation> {
    let verts: Vec<usize> = part.iter().copied().collect();
    let sub = g.induced(part);
    find_separation(&sub, k).map(|sep| Separation {
        a: sep.a.iter().map(|&i| verts[i]).collect(),
        b: sep.b.iter().map(|&i| verts[i]).collect(),
    })
}

/// Finds a (k+1)-connected induced subgraph on more than 2k vertices by
/// running the splitting recursion: parts with more than 2k vertices are
/// split along separations of order at most k until one of them admits
/// none, and that part is returned. Parts of at most 2k vertices are
/// discarded. Returns None exactly when the recursion grinds the whole
/// graph down to such small parts, i.e. when a full separator-tree exists.
pub fn find_highly_connected_subgraph(g: &Graph, k: usize) -> Option<BTreeSet<usize>> {
    let mut stack: Vec<BTreeSet<usize>> = vec![(0..g.n()).collect()];
    while let Some(part) = stack.pop() {
        if part.len() <= 2 * k {
            continue;
        }
        match find_separation_within(g, &part, k) {
            Some(sep) => {
                stack.push(sep.b);
                stack.push(sep.a);
            }
            None => {
                debug_assert!(is_k_plus_one_connected(&g.induced(&part), k));
                return Some(part);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::verify_separation;

    fn petersen() -> Graph {
        let mut g = Graph::new(10);
        for i in 0..5 {
            g.add_edge(i, (i + 1) % 5);
            g.add_edge(i, i + 5);
            g.add_edge(i + 5, 5 + (i + 2) % 5);
        }
        g
    }

    #[test]
    fn complete_graph_connectivity() {
        let g = Graph::complete(5);
        assert_eq!(local_connectivity(&g, 0, 3), 4);
        assert!(is_k_plus_one_connected(&g, 3));
        assert!(!is_k_plus_one_connected(&g, 4));
        assert!(find_separation(&g, 3).is_none());
    }

    #[test]
    fn cycle_connectivity() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        assert_eq!(local_connectivity(&g, 0, 2), 2);
        assert_eq!(local_connectivity(&g, 0, 1), 2);
        assert!(is_k_plus_one_connected(&g, 1));
        assert!(!is_k_plus_one_connected(&g, 2));
        assert!(find_separation(&g, 1).is_none());
        let sep = find_separation(&g, 2).unwrap();
        verify_separation(&g, &sep, 2).unwrap();
    }

    #[test]
    fn path_cut() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        let sep = find_separation(&g, 1).unwrap();
        verify_separation(&g, &sep, 1).unwrap();
        // First non-adjacent pair is (0, 2); the min cut nearest the source
        // is {1}.
        assert_eq!(sep.separator(), [1].into_iter().collect());
        assert_eq!(sep.a, [0, 1].into_iter().collect());
        assert_eq!(sep.b, [1, 2, 3].into_iter().collect());
    }

    #[test]
    fn star_cut() {
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]);
        let sep = find_separation(&g, 1).unwrap();
        verify_separation(&g, &sep, 1).unwrap();
        assert_eq!(sep.separator(), [0].into_iter().collect());
        assert_eq!(sep.a, [0, 1].into_iter().collect());
    }

    #[test]
    fn disconnected_split() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]);
        let sep = find_separation(&g, 0).unwrap();
        assert_eq!(sep.separator().len(), 0);
        assert_eq!(sep.a, [0, 1, 2].into_iter().collect());
        assert_eq!(sep.b, [3, 4, 5].into_iter().collect());
        verify_separation(&g, &sep, 0).unwrap();
    }

    #[test]
    fn petersen_three_connected() {
        let g = petersen();
        for u in 0..10 {
            for v in (u + 1)..10 {
                assert_eq!(local_connectivity(&g, u, v), 3, "pair ({u},{v})");
            }
        }
        assert!(is_k_plus_one_connected(&g, 2));
        assert!(!is_k_plus_one_connected(&g, 3));
        assert!(find_separation(&g, 2).is_none());
        let sep = find_separation(&g, 3).unwrap();
        verify_separation(&g, &sep, 3).unwrap();
        assert_eq!(sep.separator().len(), 3);
    }

    #[test]
    fn within_part() {
        // Two triangles sharing vertex 2, restricted to one triangle plus a
        // pendant path.
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (3, 5), (4, 5)]);
        let part: std::collections::BTreeSet<usize> = [2, 3, 4, 5].into_iter().collect();
        let sep = find_separation_within(&g, &part, 1).unwrap();
        assert_eq!(sep.separator(), [3].into_iter().collect());
        assert_eq!(sep.a, [2, 3].into_iter().collect());
        assert_eq!(sep.b, [3, 4, 5].into_iter().collect());
    }

    #[test]
    fn highly_connected_subgraph_search() {
        // K6 is 3-connected on more than 4 vertices.
        let g = Graph::complete(6);
        let found = find_highly_connected_subgraph(&g, 2).unwrap();
        assert_eq!(found, (0..6).collect());

        // A path has no 2-connected subgraph on 3 or more vertices.
        let path = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        assert!(find_highly_connected_subgraph(&path, 1).is_none());

        // The Petersen graph is 3-connected on 10 > 4 vertices.
        assert_eq!(find_highly_connected_subgraph(&petersen(), 2).unwrap().len(), 10);

        // Two K4 blocks glued at two vertices split cleanly for k=2.
        let mut g = Graph::new(6);
        g.add_clique(&[0, 1, 2, 3]);
        g.add_clique(&[2, 3, 4, 5]);
        assert!(find_highly_connected_subgraph(&g, 2).is_none());
        // For k=1 the first K4 comes back: K4 minus any vertex is a triangle.
        let found = find_highly_connected_subgraph(&g, 1).unwrap();
        assert!(found.len() > 2);
        assert!(is_k_plus_one_connected(&g.induced(&found), 1));
    }

    #[test]
    fn adjacent_pair_connectivity() {
        // K4 minus an edge: adjacent pair on the diagonal has connectivity 3.
        let mut g = Graph::complete(4);
        g = {
            let mut h = Graph::new(4);
            for (u, v) in g.edges() {
                if (u, v) != (2, 3) {
                    h.add_edge(u, v);
                }
            }
            h
        };
        assert_eq!(local_connectivity(&g, 2, 3), 2);
        assert_eq!(local_connectivity(&g, 0, 1), 3);
    }
}
