//! Generators for the extremal families: graphs without a (k+1)-connected
//! subgraph on more than 2k vertices whose edge counts meet the proven or
//! conjectured maxima, together with their closed-form edge formulas.

use crate::abstract_tree::NumberLayout;
use crate::graph::{glue, Graph};
use crate::oracle::brute_highly_connected;
use crate::{rat, rat_int, Error, Rat, Result};
use std::collections::BTreeSet;

/// e(K_{2k}) = k(2k-1), the edge count every family starts from.
pub fn complete_edge_count(k: u64) -> u64 {
    k * (2 * k - 1)
}

/// Doubling construction state: the graph so far, each atom's vertices in
/// consumption order (separator picks eat from the front), and how many of
/// them earlier separators already used.
struct DoublingState {
    g: Graph,
    atoms: Vec<Vec<usize>>,
    used: Vec<usize>,
}

impl DoublingState {
    /// Glues a second copy of the current graph onto itself, identifying
    /// the given vertices with their copies, and duplicates the atom lists
    /// with ids remapped the way `glue` assigns them.
    fn double_at(&mut self, sep: &[usize]) -> Result<()> {
        let pairing: Vec<(usize, usize)> = sep.iter().map(|&v| (v, v)).collect();
        let n1 = self.g.n();
        let glued = glue(&self.g, &self.g, &pairing)?;
        let shared: BTreeSet<usize> = sep.iter().copied().collect();
        let mut remap = vec![0usize; n1];
        let mut next = n1;
        for (v, slot) in remap.iter_mut().enumerate() {
            *slot = if shared.contains(&v) {
                v
            } else {
                next += 1;
                next - 1
            };
        }
        let second: Vec<Vec<usize>> = self
            .atoms
            .iter()
            .map(|a| a.iter().map(|&v| remap[v]).collect())
            .collect();
        self.atoms.extend(second);
        self.used.extend_from_within(..);
        self.g = glued;
        Ok(())
    }
}

/// Builds G_i and keeps the atom bookkeeping for the gluing-based callers.
fn build_g(k: usize, i: u32) -> Result<DoublingState> {
    if k == 0 {
        return Err(Error::InvalidGraph("k must be positive".into()));
    }
    for j in 1..i {
        if k % (1usize << j) != 0 {
            return Err(Error::InvalidGraph(format!(
                "G_{i} needs k divisible by 2^{j}, got k = {k}"
            )));
        }
    }
    let mut st = DoublingState {
        g: Graph::complete(2 * k),
        atoms: vec![(0..2 * k).collect()],
        used: vec![0],
    };
    for j in 1..=i {
        // Step j glues two copies of G_{j-1} at a fresh k-separator made of
        // the k/2^{j-1} lowest-id unused vertices of each atom.
        let m = k >> (j - 1);
        let mut sep = Vec::with_capacity(k);
        for (a, atom) in st.atoms.iter().enumerate() {
            sep.extend_from_slice(&atom[st.used[a]..st.used[a] + m]);
        }
        debug_assert_eq!(sep.len(), k);
        st.double_at(&sep)?;
        for u in &mut st.used {
            *u += m;
        }
    }
    Ok(st)
}

/// The doubled family: G_0 = K_{2k} and G_{i+1} is two copies of G_i glued
/// at a k-separator taking k/2^i unused vertices from each atom.
pub fn gen_g(k: usize, i: u32) -> Result<Graph> {
    Ok(build_g(k, i)?.g)
}

/// e(G_i): the doubling recursion in closed loop form. The separator glued
/// in at step j induces a clique of size k/2^{j-1} inside each of the
/// 2^{j-1} atoms it meets and nothing across atoms.
pub fn g_edge_formula(k: u64, i: u32) -> u64 {
    let mut e = complete_edge_count(k);
    for j in 1..=i {
        let m = k >> (j - 1);
        e = 2 * e - (1 << (j - 1)) * m * (m - 1) / 2;
    }
    e
}

/// The abstract shape of G_i: a balanced depth-i binary tree, every
/// separator of vertex number k, every atom of vertex number 2k.
pub fn g_family_layout(k: usize, i: u32) -> NumberLayout {
    if i == 0 {
        NumberLayout::atom(2 * k as u64)
    } else {
        NumberLayout::branch(
            k as u64,
            g_family_layout(k, i - 1),
            g_family_layout(k, i - 1),
        )
    }
}

/// Copies of G* = G_{log2 k} glued at an independent set of size k made of
/// one unused vertex per atom. Requires k a power of two.
pub fn gen_gstar_glued(k: usize, copies: usize) -> Result<Graph> {
    if !k.is_power_of_two() {
        return Err(Error::InvalidGraph(format!("k = {k} is not a power of two")));
    }
    if copies == 0 {
        return Err(Error::InvalidGraph("need at least one copy".into()));
    }
    let st = build_g(k, k.trailing_zeros())?;
    let ind: Vec<usize> = st
        .atoms
        .iter()
        .zip(&st.used)
        .map(|(a, &u)| a[u])
        .collect();
    debug_assert_eq!(ind.len(), k);
    debug_assert!(ind.iter().all(|&u| ind.iter().all(|&v| u == v || !st.g.has_edge(u, v))));
    let pairing: Vec<(usize, usize)> = ind.iter().map(|&v| (v, v)).collect();
    let mut g = st.g.clone();
    for _ in 1..copies {
        g = glue(&g, &st.g, &pairing)?;
    }
    Ok(g)
}

/// e of `copies` glued G* graphs: (5k/3 - 1/2 - 1/(6k)) (n - k) with
/// n = copies k^2 + k.
pub fn gstar_edge_formula(k: u64, copies: u64) -> Rat {
    let n = copies * k * k + k;
    let slope = rat(5 * k as i64, 3) - rat(1, 2) - rat(1, 6 * k as i64);
    slope * rat_int((n - k) as i64)
}

/// An independent set of k vertices joined completely to t disjoint
/// k-cliques.
pub fn gen_mader(k: usize, t: usize) -> Graph {
    let mut g = Graph::new(k + t * k);
    for c in 0..t {
        let clique: Vec<usize> = (k + c * k..k + (c + 1) * k).collect();
        g.add_clique(&clique);
        for &v in &clique {
            for u in 0..k {
                g.add_edge(u, v);
            }
        }
    }
    g
}

/// e of the clique family: t (C(k,2) + k^2) = (3k-1)/2 (n - k).
pub fn mader_edge_formula(k: u64, t: u64) -> u64 {
    t * (k * (k - 1) / 2 + k * k)
}

/// Per-H_0-copy layout bookkeeping: the two sides of each non-edge block
/// (descending size, j = 1..log2 k) and the two blockless vertices.
struct H0Handle {
    blocks: Vec<(Vec<usize>, Vec<usize>)>,
    leftover: [usize; 2],
}

impl H0Handle {
    fn remap(&self, map: &[usize]) -> H0Handle {
        H0Handle {
            blocks: self
                .blocks
                .iter()
                .map(|(l, r)| {
                    (
                        l.iter().map(|&v| map[v]).collect(),
                        r.iter().map(|&v| map[v]).collect(),
                    )
                })
                .collect(),
            leftover: [map[self.leftover[0]], map[self.leftover[1]]],
        }
    }
}

fn h_exponent(k: usize) -> Result<u32> {
    if k >= 2 && k.is_power_of_two() {
        Ok(k.trailing_zeros())
    } else {
        Err(Error::InvalidGraph(format!(
            "k = {k} is not a power of two at least 2"
        )))
    }
}

/// H_0: the complement on 2k vertices of the disjoint union of K_{m,m} for
/// m = k/2^j, j = 1..log2 k. Blocks sit at the low ids in descending size;
/// the two vertices no block covers take the highest ids.
fn h0(k: usize) -> (Graph, H0Handle) {
    let q = k.trailing_zeros();
    let mut blocks = Vec::new();
    let mut side = vec![usize::MAX; 2 * k];
    let mut off = 0;
    for j in 1..=q {
        let m = k >> j;
        blocks.push((
            (off..off + m).collect::<Vec<_>>(),
            (off + m..off + 2 * m).collect::<Vec<_>>(),
        ));
        for v in off..off + m {
            side[v] = 2 * j as usize;
        }
        for v in off + m..off + 2 * m {
            side[v] = 2 * j as usize + 1;
        }
        off += 2 * m;
    }
    debug_assert_eq!(off, 2 * k - 2);
    let mut g = Graph::new(2 * k);
    for u in 0..2 * k {
        for v in (u + 1)..2 * k {
            // Adjacent unless u and v sit on opposite sides of one block.
            if side[u] == usize::MAX || side[v] == usize::MAX || side[u] / 2 != side[v] / 2 || side[u] == side[v]
            {
                g.add_edge(u, v);
            }
        }
    }
    (
        g,
        H0Handle {
            blocks,
            leftover: [2 * k - 2, 2 * k - 1],
        },
    )
}

/// Builds H_i with the per-copy block bookkeeping.
fn build_h(k: usize, i: u32) -> Result<(Graph, Vec<H0Handle>)> {
    let q = h_exponent(k)?;
    if i > q {
        return Err(Error::InvalidGraph(format!(
            "H_{i} undefined for k = {k}: i ranges up to log2 k = {q}"
        )));
    }
    let (mut g, h) = h0(k);
    let mut copies = vec![h];
    for step in 1..=i {
        // H_step glues two copies of H_{step-1} at the union over H_0
        // copies of the block with m = k/2^step, identified positionally.
        let bi = step as usize - 1;
        let mut sep = Vec::new();
        for c in &copies {
            let (l, r) = &c.blocks[bi];
            sep.extend(l.iter().chain(r).copied());
        }
        debug_assert_eq!(sep.len(), k);
        let pairing: Vec<(usize, usize)> = sep.iter().map(|&v| (v, v)).collect();
        let n1 = g.n();
        let before = g.m() as u64;
        let glued = glue(&g, &g, &pairing)?;
        let shared: BTreeSet<usize> = sep.iter().copied().collect();
        let mut remap = vec![0usize; n1];
        let mut next = n1;
        for (v, slot) in remap.iter_mut().enumerate() {
            *slot = if shared.contains(&v) {
                v
            } else {
                next += 1;
                next - 1
            };
        }
        let second: Vec<H0Handle> = copies.iter().map(|c| c.remap(&remap)).collect();
        copies.extend(second);
        debug_assert_eq!(
            rat_int(glued.m() as i64),
            rat_int(2 * before as i64) - h_sep_edge_formula(k as u64, step - 1)
        );
        g = glued;
    }
    Ok((g, copies))
}

/// The conjectured-extremal family H_i on k + k 2^i vertices; H_0 is the
/// K_{m,m}-complement above and H_{i+1} glues two copies of H_i at the
/// blocks of size k/2^{i+1}.
pub fn gen_h(k: usize, i: u32) -> Result<Graph> {
    Ok(build_h(k, i)?.0)
}

/// e(H_0) = 5k^2/3 - k + 1/3.
pub fn h_base_edge_formula(k: u64) -> Rat {
    rat(5 * (k * k) as i64, 3) - rat_int(k as i64) + rat(1, 3)
}

/// e(S_i) = k^2/2^{i+2} - k/2, the separator glued in when H_{i+1} is
/// assembled from two copies of H_i.
pub fn h_sep_edge_formula(k: u64, i: u32) -> Rat {
    rat((k * k) as i64, 1 << (i + 2)) - rat(k as i64, 2)
}

/// The conjectured edge maximum at n vertices for graphs without a
/// (k+1)-connected subgraph on more than 2k vertices, in the range
/// 2k <= n <= k^2 + k:
/// (3k-1)/2 (n-k) + (n-k)/(3k) + k^3/(6(n-k)) - k/2.
pub fn conjectured_edge_maximum(k: u64, n: u64) -> Rat {
    assert!(n > k);
    let d = (n - k) as i64;
    let k = k as i64;
    rat(3 * k - 1, 2) * rat_int(d) + rat(d, 3 * k) + rat(k * k * k, 6 * d) - rat(k, 2)
}

/// e(H_i) in closed form: the conjectured maximum at n = k + k 2^i.
pub fn h_edge_formula(k: u64, i: u32) -> Rat {
    conjectured_edge_maximum(k, k + k * (1 << i))
}

/// Copies of H_{log2 k} glued at the independent set made of one blockless
/// vertex per H_0 copy.
pub fn gen_glued_h(k: usize, copies: usize) -> Result<Graph> {
    let q = h_exponent(k)?;
    if copies == 0 {
        return Err(Error::InvalidGraph("need at least one copy".into()));
    }
    let (h, handles) = build_h(k, q)?;
    let ind: Vec<usize> = handles.iter().map(|c| c.leftover[0]).collect();
    debug_assert_eq!(ind.len(), k);
    debug_assert!(ind.iter().all(|&u| ind.iter().all(|&v| u == v || !h.has_edge(u, v))));
    let pairing: Vec<(usize, usize)> = ind.iter().map(|&v| (v, v)).collect();
    let mut g = h.clone();
    for _ in 1..copies {
        g = glue(&g, &h, &pairing)?;
    }
    Ok(g)
}

/// Oracle confirmation that a family member has no (k+1)-connected subgraph
/// on more than 2k vertices. None means the instance is too large for the
/// exhaustive oracle and the check was skipped, not failed.
pub fn verify_family_soundness(g: &Graph, k: usize) -> Option<bool> {
    if k > 3 || g.n() > 14 {
        return None;
    }
    match brute_highly_connected(g, k, 2 * k + 1) {
        Ok(found) => Some(found.is_none()),
        Err(_) => None,
    }
}
