//! Seeded random instances for the property sweeps: Erdős–Rényi graphs and
//! random abstract separator-trees with legal technical data.
//!
//! Everything is driven by a [`ChaCha8Rng`] so a single 64-bit seed
//! reproduces an entire instance stream.

use crate::abstract_tree::{AbstractSepTree, NumberLayout, PartId, SepId};
use crate::graph::Graph;
use crate::molecules::achieved_separator;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The sweep RNG for a given seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Edge probabilities swept by the random scans: three fixed densities plus
/// the critical density where the expected average degree sits at the
/// theorem threshold (10/3)k.
pub fn scan_probabilities(k: usize, n: usize) -> [f64; 4] {
    let critical = if n > 1 {
        (10.0 * k as f64 / 3.0) / (n - 1) as f64
    } else {
        0.0
    };
    [0.3, 0.5, 0.7, critical.min(1.0)]
}

/// Samples G(n, p) as an edge mask over the C(n,2) vertex pairs in
/// lexicographic order, one uniform draw per pair. Requires n <= 11 so the
/// mask fits in 64 bits.
pub fn random_edge_mask(rng: &mut ChaCha8Rng, n: usize, p: f64) -> u64 {
    assert!(n <= 11, "edge mask limited to C(11,2) = 55 bits");
    let mut mask = 0u64;
    let mut bit = 0;
    for u in 0..n {
        for _v in (u + 1)..n {
            if rng.gen::<f64>() < p {
                mask |= 1 << bit;
            }
            bit += 1;
        }
    }
    mask
}

/// Expands an edge mask produced by [`random_edge_mask`] into a graph.
pub fn graph_from_edge_mask(n: usize, mask: u64) -> Graph {
    let mut g = Graph::new(n);
    let mut bit = 0;
    for u in 0..n {
        for v in (u + 1)..n {
            if mask >> bit & 1 == 1 {
                g.add_edge(u, v);
            }
            bit += 1;
        }
    }
    g
}

/// Samples G(n, p) directly; pair order and draws match
/// [`random_edge_mask`], with no size limit.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen::<f64>() < p {
                g.add_edge(u, v);
            }
        }
    }
    g
}

/// Random real abstract separator-tree with defined edge numbers and with
/// technical data placed at achieved separators. At most `max_atoms` atoms;
/// separators are drawn no larger than either branch, so the tree is real
/// by construction, and shapes whose edge numbers come out undefined are
/// redrawn.
pub fn random_real_tree(rng: &mut ChaCha8Rng, k: usize, max_atoms: usize) -> AbstractSepTree {
    assert!(k >= 1 && max_atoms >= 1);
    loop {
        let atoms = rng.gen_range(1..=max_atoms);
        let (layout, _) = real_layout(rng, k, atoms);
        let t = match AbstractSepTree::from_layout(k, &layout) {
            Ok(t) => t,
            Err(_) => continue,
        };
        debug_assert!(t.is_real());
        if t.tree_edge_number().is_err() {
            continue;
        }
        if let Some(t) = attach_random_tech(rng, &t) {
            return t;
        }
    }
}

fn real_layout(rng: &mut ChaCha8Rng, k: usize, atoms: usize) -> (NumberLayout, u64) {
    if atoms == 1 {
        let n = rng.gen_range(1..=2 * k as u64);
        return (NumberLayout::atom(n), n);
    }
    let left = rng.gen_range(1..atoms);
    let (l, nl) = real_layout(rng, k, left);
    let (r, nr) = real_layout(rng, k, atoms - left);
    let s = rng.gen_range(0..=(k as u64).min(nl).min(nr));
    (NumberLayout::branch(s, l, r), nl + nr - s)
}

/// Random saturated real abstract separator-tree: every separator has
/// vertex number exactly k and keeps a normal atom below it, and every
/// atom has more than k vertices, as in the trees the saturation rewrite
/// produces (an atom matching its separator would be dropped by it).
/// `normals >= 1` and `tinies` count the atoms of each kind; tiny atoms
/// strictly between k and 4k/3 vertices exist only for k >= 4. Technical
/// data is placed at achieved separators.
pub fn random_saturated_tree(
    rng: &mut ChaCha8Rng,
    k: usize,
    normals: usize,
    tinies: usize,
) -> AbstractSepTree {
    assert!(k >= 1 && normals >= 1);
    assert!(tinies == 0 || k >= 4, "no tiny atom exceeds its separator below k = 4");
    loop {
        let layout = saturated_layout(rng, k, normals, tinies);
        let t = AbstractSepTree::from_layout(k, &layout)
            .expect("saturated layout is always a valid tree");
        debug_assert!(t.is_real() && t.is_saturated());
        debug_assert!(t.tree_edge_number().is_ok());
        if let Some(t) = attach_random_tech(rng, &t) {
            return t;
        }
    }
}

fn saturated_layout(rng: &mut ChaCha8Rng, k: usize, normals: usize, tinies: usize) -> NumberLayout {
    let k64 = k as u64;
    // Smallest normal vertex number: 3n >= 4k.
    let normal_min = (4 * k64).div_ceil(3);
    if normals + tinies == 1 {
        let n = if normals == 1 {
            rng.gen_range(normal_min..=2 * k64)
        } else {
            // Tiny but strictly bigger than the separator above it.
            rng.gen_range(k64 + 1..normal_min)
        };
        return NumberLayout::atom(n);
    }
    // Split the leaves so that any side with two or more of them keeps a
    // normal atom; a lone tiny atom is fine on its own.
    let (ln, lt, rn, rt) = loop {
        let left = rng.gen_range(1..normals + tinies);
        let right = normals + tinies - left;
        let ln = rng.gen_range(normals.saturating_sub(right)..=normals.min(left));
        let lt = left - ln;
        let (rn, rt) = (normals - ln, tinies - lt);
        if (left == 1 || ln >= 1) && (right == 1 || rn >= 1) {
            break (ln, lt, rn, rt);
        }
    };
    NumberLayout::branch(
        k64,
        saturated_layout(rng, k, ln, lt),
        saturated_layout(rng, k, rn, rt),
    )
}

/// Adds random technical data at achieved separators: each tiny atom with
/// spare tiny vertices contributes some of them at the separator it
/// achieves, capped by the separator's remaining capacity. Returns None if
/// the decorated tree fails validation (it should not; the caller redraws).
fn attach_random_tech(rng: &mut ChaCha8Rng, t: &AbstractSepTree) -> Option<AbstractSepTree> {
    let val = t.assign_valuation();
    let mut entries: Vec<(PartId, SepId, u64)> = Vec::new();
    let mut load = vec![0u64; t.sep_count()];
    for p in t.atoms() {
        if !t.is_tiny_atom(p) {
            continue;
        }
        let spare = t.tiny_vertex_count(p).ok()?;
        if spare == 0 || rng.gen::<f64>() < 0.3 {
            continue;
        }
        if let Some(s) = achieved_separator(t, &val, p) {
            let cap = t.sep(s).n - load[s];
            let m = rng.gen_range(0..=spare.min(cap));
            if m > 0 {
                load[s] += m;
                entries.push((p, s, m));
            }
        }
    }
    t.clone().with_technical_data(&entries).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_streams() {
        let g1 = random_graph(&mut rng(7), 8, 0.5);
        let g2 = random_graph(&mut rng(7), 8, 0.5);
        assert_eq!(g1.edges(), g2.edges());
        let g3 = random_graph(&mut rng(8), 8, 0.5);
        assert!(g1.edges() != g3.edges() || g1.m() == g3.m());

        let t1 = random_real_tree(&mut rng(3), 3, 8);
        let t2 = random_real_tree(&mut rng(3), 3, 8);
        assert_eq!(t1.to_json(), t2.to_json());
    }

    #[test]
    fn mask_matches_graph() {
        let mut r1 = rng(42);
        let mut r2 = rng(42);
        for n in [1usize, 5, 9, 11] {
            let mask = random_edge_mask(&mut r1, n, 0.4);
            let g = random_graph(&mut r2, n, 0.4);
            assert_eq!(graph_from_edge_mask(n, mask).edges(), g.edges());
        }
    }

    #[test]
    fn probability_sweep() {
        let ps = scan_probabilities(1, 6);
        assert_eq!(&ps[..3], &[0.3, 0.5, 0.7]);
        assert!((ps[3] - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(scan_probabilities(3, 6)[3], 1.0);
    }

    #[test]
    fn real_trees_are_real_with_defined_numbers() {
        let mut r = rng(0);
        for i in 0..120 {
            let k = 1 + (i % 4);
            let t = random_real_tree(&mut r, k, 10);
            assert!(t.is_real());
            assert!(t.validate().is_ok());
            assert!(t.tree_edge_number().is_ok());
        }
    }

    #[test]
    fn saturated_trees_are_saturated() {
        let mut r = rng(1);
        let mut with_tech = 0;
        for i in 0..120 {
            let k = [2, 3, 4, 6, 7][i % 5];
            let normals = 1 + (i % 9);
            let tinies = if k >= 4 { i % 6 } else { 0 };
            let t = random_saturated_tree(&mut r, k, normals, tinies);
            assert!(t.is_saturated() && t.is_real());
            assert!(t.validate().is_ok());
            assert_eq!(
                t.atoms().iter().filter(|&&p| t.is_normal_atom(p)).count(),
                normals
            );
            assert_eq!(t.atoms().len(), normals + tinies);
            with_tech += usize::from(!t.technical_data().is_empty());
        }
        // The decoration actually fires on a healthy share of instances.
        assert!(with_tech > 10, "only {with_tech} decorated instances");
    }
}
