//! Shape-level algorithms shared by graph separator-trees and abstract
//! separator-trees: normal/tiny classification, the staged valuation, and the
//! desire predicate it depends on.
//!
//! Both tree kinds expose the same bipartite arena through [`TreeView`]:
//! part 0 is the root and ids are depth-first preorder, so descending id
//! order visits children before parents.

use crate::{binom2, rat_int, Error, Rat, Result};

/// Arena access for a bipartite separator-tree shape with vertex numbers.
pub(crate) trait TreeView {
    fn k(&self) -> usize;
    fn part_count(&self) -> usize;
    fn sep_count(&self) -> usize;
    /// Separator directly above the part (None for the root).
    fn part_parent(&self, p: usize) -> Option<usize>;
    /// Separator directly below the part (None for atoms).
    fn part_child(&self, p: usize) -> Option<usize>;
    fn sep_parent(&self, s: usize) -> usize;
    fn sep_children(&self, s: usize) -> [usize; 2];
    /// Vertex number of an atom part.
    fn atom_n(&self, p: usize) -> u64;
    /// Vertex number of a separator.
    fn sep_n(&self, s: usize) -> u64;
}

pub(crate) fn is_atom<V: TreeView>(v: &V, p: usize) -> bool {
    v.part_child(p).is_none()
}

pub(crate) fn atom_ids<V: TreeView>(v: &V) -> Vec<usize> {
    (0..v.part_count()).filter(|&p| is_atom(v, p)).collect()
}

/// An atom is normal when its vertex number is at least k + k/3.
pub(crate) fn is_normal_atom<V: TreeView>(v: &V, p: usize) -> bool {
    debug_assert!(is_atom(v, p));
    3 * v.atom_n(p) >= 4 * v.k() as u64
}

pub(crate) fn is_tiny_atom<V: TreeView>(v: &V, p: usize) -> bool {
    is_atom(v, p) && !is_normal_atom(v, p)
}

/// Number of tiny vertices of a non-root atom: its vertex number minus the
/// vertex number of the separator just above.
pub(crate) fn tiny_vertex_count<V: TreeView>(v: &V, p: usize) -> u64 {
    let parent = v.part_parent(p).expect("tiny vertex count of the root");
    v.atom_n(p).saturating_sub(v.sep_n(parent))
}

/// Per part, the number of normal atoms in its branch.
pub(crate) fn normal_atom_counts<V: TreeView>(v: &V) -> Vec<u64> {
    let mut counts = vec![0u64; v.part_count()];
    for p in (0..v.part_count()).rev() {
        counts[p] = match v.part_child(p) {
            None => is_normal_atom(v, p) as u64,
            Some(s) => {
                let [a, b] = v.sep_children(s);
                counts[a] + counts[b]
            }
        };
    }
    counts
}

/// Per part, the smallest atom id in its branch.
pub(crate) fn min_atom_id<V: TreeView>(v: &V) -> Vec<usize> {
    let mut min = vec![usize::MAX; v.part_count()];
    for p in (0..v.part_count()).rev() {
        min[p] = match v.part_child(p) {
            None => p,
            Some(s) => {
                let [a, b] = v.sep_children(s);
                min[a].min(min[b])
            }
        };
    }
    min
}

/// Separators above a part, lowest first, each with the index (0 or 1) of
/// the child branch the part lies in.
pub(crate) fn path_above<V: TreeView>(v: &V, p: usize) -> Vec<(usize, usize)> {
    let mut path = Vec::new();
    let mut cur = p;
    while let Some(s) = v.part_parent(cur) {
        let [a, _] = v.sep_children(s);
        path.push((s, if a == cur { 0 } else { 1 }));
        cur = v.sep_parent(s);
    }
    path
}

/// Big-branch choice per separator, stored as a child index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Valuation {
    pub(crate) big_idx: Vec<u8>,
}

impl Valuation {
    /// Index (0 or 1) of the big child of the separator.
    pub fn big_index(&self, s: usize) -> usize {
        self.big_idx[s] as usize
    }

    pub fn small_index(&self, s: usize) -> usize {
        1 - self.big_index(s)
    }
}

pub(crate) fn big_child<V: TreeView>(v: &V, val: &Valuation, s: usize) -> usize {
    v.sep_children(s)[val.big_index(s)]
}

pub(crate) fn small_child<V: TreeView>(v: &V, val: &Valuation, s: usize) -> usize {
    v.sep_children(s)[val.small_index(s)]
}

const UNSET: u8 = 2;

/// Whether tiny atom `x` desires separator `s`: the branch of `s` containing
/// `x` is almost small (no more normal atoms than the other branch), no
/// separator strictly below `s` other than the one just above `x` puts `x`
/// in its small branch, and `s` is not the separator just above `x`.
///
/// Only consults big-branch choices strictly below `s`, which is what lets
/// the valuation assign separators bottom-up.
fn desires_inner<V: TreeView>(
    v: &V,
    big_idx: &[u8],
    normals: &[u64],
    x: usize,
    s: usize,
) -> bool {
    debug_assert!(is_tiny_atom(v, x));
    let path = path_above(v, x);
    if path.is_empty() || path[0].0 == s {
        return false;
    }
    let Some(pos) = path.iter().position(|&(t, _)| t == s) else {
        return false;
    };
    let (_, side) = path[pos];
    let [a, b] = v.sep_children(s);
    let (mine, other) = if side == 0 { (a, b) } else { (b, a) };
    if normals[mine] > normals[other] {
        return false;
    }
    for &(t, t_side) in &path[1..pos] {
        debug_assert!(big_idx[t] != UNSET, "valuation below {s} incomplete");
        if big_idx[t] as usize != t_side {
            return false;
        }
    }
    true
}

/// Sum of tiny-vertex counts of tiny atoms in branch `c` that desire `s`.
fn relevant_tiny_vertices<V: TreeView>(
    v: &V,
    big_idx: &[u8],
    normals: &[u64],
    s: usize,
    c: usize,
) -> u64 {
    let mut sum = 0;
    let mut stack = vec![c];
    while let Some(p) = stack.pop() {
        match v.part_child(p) {
            Some(t) => stack.extend(v.sep_children(t)),
            None => {
                if is_tiny_atom(v, p) && desires_inner(v, big_idx, normals, p, s) {
                    sum += tiny_vertex_count(v, p);
                }
            }
        }
    }
    sum
}

/// Assigns the big branch of every separator, bottom-up: more normal atoms
/// wins; at normally balanced separators more relevant tiny vertices wins;
/// remaining ties go to the branch containing the smallest atom id.
pub(crate) fn assign_valuation<V: TreeView>(v: &V) -> Valuation {
    let normals = normal_atom_counts(v);
    let min_atom = min_atom_id(v);
    let mut big_idx = vec![UNSET; v.sep_count()];
    for s in (0..v.sep_count()).rev() {
        let [a, b] = v.sep_children(s);
        big_idx[s] = if normals[a] != normals[b] {
            (normals[b] > normals[a]) as u8
        } else {
            let ra = relevant_tiny_vertices(v, &big_idx, &normals, s, a);
            let rb = relevant_tiny_vertices(v, &big_idx, &normals, s, b);
            if ra != rb {
                (rb > ra) as u8
            } else {
                (min_atom[b] < min_atom[a]) as u8
            }
        };
    }
    Valuation { big_idx }
}

/// General bound on free anti-edges at a separator with vertex number `s`,
/// `l_a` normal atoms in its small branch, and technical-data entries `ms`
/// for the tiny atoms of the small branch:
///
/// f(S) = s^2/2 - (s - m(S))^2 / (2 l_a) - sum C(m(X,S), 2) - m(S)/2.
///
/// With no normal atom in the small branch the formula divides by zero; a
/// single-atom small branch then contributes no free anti-edges at all
/// (f = 0), and when every separator vertex is technical (m(S) = s) the
/// vanishing numerator cancels the division. Anything else is undefined.
pub(crate) fn general_free_count(
    sep: usize,
    s: u64,
    l_a: u64,
    ms: &[u64],
    single_atom_small: bool,
) -> Result<Rat> {
    let m: u64 = ms.iter().sum();
    let pair_sum = ms.iter().fold(rat_int(0), |acc, &x| acc + binom2(x));
    let s2_half = rat_int((s * s) as i64) / rat_int(2);
    let m_half = rat_int(m as i64) / rat_int(2);
    if l_a == 0 {
        if single_atom_small {
            return Ok(rat_int(0));
        }
        if m != s {
            return Err(Error::UndefinedEdgeNumber { sep });
        }
        return Ok(s2_half - pair_sum - m_half);
    }
    let d = s as i64 - m as i64;
    let middle = rat_int(d * d) / rat_int(2 * l_a as i64);
    Ok(s2_half - middle - pair_sum - m_half)
}

/// All separators desired by tiny atom `x`, lowest first.
pub(crate) fn desired_seps<V: TreeView>(v: &V, val: &Valuation, x: usize) -> Vec<usize> {
    let normals = normal_atom_counts(v);
    path_above(v, x)
        .into_iter()
        .filter(|&(s, _)| desires_inner(v, &val.big_idx, &normals, x, s))
        .map(|(s, _)| s)
        .collect()
}

/// The separator achieved by tiny atom `x`: desired with `x` in its small
/// branch. At most one separator qualifies, and it is the highest desired.
pub(crate) fn achieved_sep<V: TreeView>(v: &V, val: &Valuation, x: usize) -> Option<usize> {
    let normals = normal_atom_counts(v);
    let path = path_above(v, x);
    let mut achieved = None;
    let mut highest_desired = None;
    for &(s, side) in &path {
        if desires_inner(v, &val.big_idx, &normals, x, s) {
            highest_desired = Some(s);
            if val.small_index(s) == side {
                debug_assert!(achieved.is_none(), "two achieved separators for atom {x}");
                achieved = Some(s);
            }
        }
    }
    if let Some(a) = achieved {
        debug_assert_eq!(Some(a), highest_desired, "achieved is not the highest desired");
    }
    achieved
}
