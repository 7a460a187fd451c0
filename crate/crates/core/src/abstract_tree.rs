//! Separator-tree shapes carrying vertex numbers instead of vertex sets.
//!
//! An abstract tree keeps the bipartite part/separator structure of a
//! [`SeparatorTree`] but stores only the number of vertices of each atom and
//! separator; everything else (vertex numbers of inner parts, free-anti-edge
//! values, edge numbers) is derived. The module also implements the
//! saturation rewrite that raises every separator to exactly k vertices, the
//! branching-error terms, and the closed-form edge bounds checked by the
//! test suites.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::septree::SeparatorTree;
use crate::tree_view::{self as tv, TreeView, Valuation};
use crate::{binom2, rat, rat_int, Error, Rat, Result};

pub type PartId = usize;
pub type SepId = usize;

/// Part node; atoms store their vertex number, inner parts derive theirs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct APart {
    pub atom_n: Option<u64>,
    pub parent: Option<SepId>,
    pub child: Option<SepId>,
}

/// Separator node with its vertex number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ASep {
    pub n: u64,
    pub parent: PartId,
    pub children: [PartId; 2],
}

/// Bipartite rooted tree of parts and separators with numeric labels.
///
/// Ids are depth-first preorder with the root part at 0. Atom vertex
/// numbers lie in [1, 2k], separator vertex numbers in [0, k]. The
/// technical data maps (tiny atom, separator strictly above it, other than
/// the one just above) to a positive count of tiny vertices assigned there,
/// capped per atom by its tiny-vertex count and per separator by its vertex
/// number; entries are only legal for atoms in the small branch of the
/// separator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbstractSepTree {
    k: usize,
    parts: Vec<APart>,
    seps: Vec<ASep>,
    tech: BTreeMap<(PartId, SepId), u64>,
}

/// Recursive construction plan mirroring [`crate::septree::GraphLayout`].
#[derive(Clone, Debug)]
pub enum NumberLayout {
    Atom(u64),
    Branch {
        sep: u64,
        left: Box<NumberLayout>,
        right: Box<NumberLayout>,
    },
}

impl NumberLayout {
    pub fn atom(n: u64) -> Self {
        NumberLayout::Atom(n)
    }

    pub fn branch(sep: u64, left: NumberLayout, right: NumberLayout) -> Self {
        NumberLayout::Branch {
            sep,
            left: Box::new(left),
            right: Box::new(right),
        }
    }
}

/// The exact constants of the edge bound: beta = 5k/3 - 1/2, gamma = k^2/3,
/// epsilon = k/2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundConstants {
    pub k: usize,
    pub beta: Rat,
    pub gamma: Rat,
    pub epsilon: Rat,
}

impl BoundConstants {
    pub fn new(k: usize) -> Self {
        let ki = k as i64;
        BoundConstants {
            k,
            beta: rat(5 * ki, 3) - rat(1, 2),
            gamma: rat(ki * ki, 3),
            epsilon: rat(ki, 2),
        }
    }
}

/// beta * (n - k) + gamma / l - epsilon: the edge-number bound for a tree
/// with n vertices and l normal atoms (callers pass l = 1 when there are
/// none).
pub fn edge_number_bound(k: usize, n: u64, l: u64) -> Rat {
    assert!(l >= 1);
    let c = BoundConstants::new(k);
    c.beta * rat_int(n as i64 - k as i64) + c.gamma / rat_int(l as i64) - c.epsilon
}

/// x(S) = 1/(2 l-) + 1/(l- + l+) - 1/l+ for normal-atom counts l- (small
/// branch) and l+ (big branch). Zero when the counts agree.
pub fn branching_error_term(l_minus: u64, l_plus: u64) -> Rat {
    assert!(l_minus >= 1 && l_plus >= 1);
    let (lm, lp) = (l_minus as i64, l_plus as i64);
    rat(1, 2 * lm) + rat(1, lm + lp) - rat(1, lp)
}

/// 1/a + 1/b <= 1/(a+b) + 3/(2a) for every 1 <= a <= b <= max.
pub fn check_branch_count_inequality(max: u64) -> bool {
    (1..=max as i64).all(|a| {
        (a..=max as i64).all(|b| rat(1, a) + rat(1, b) <= rat(1, a + b) + rat(3, 2 * a))
    })
}

/// x(S) >= 1/(4 l-^2) for every 1 <= l- < l+ <= max.
pub fn check_branching_error_bound(max: u64) -> bool {
    (1..max).all(|lm| {
        (lm + 1..=max)
            .all(|lp| branching_error_term(lm, lp) >= rat(1, 4 * (lm * lm) as i64))
    })
}

impl TreeView for AbstractSepTree {
    fn k(&self) -> usize {
        self.k
    }
    fn part_count(&self) -> usize {
        self.parts.len()
    }
    fn sep_count(&self) -> usize {
        self.seps.len()
    }
    fn part_parent(&self, p: usize) -> Option<usize> {
        self.parts[p].parent
    }
    fn part_child(&self, p: usize) -> Option<usize> {
        self.parts[p].child
    }
    fn sep_parent(&self, s: usize) -> usize {
        self.seps[s].parent
    }
    fn sep_children(&self, s: usize) -> [usize; 2] {
        self.seps[s].children
    }
    fn atom_n(&self, p: usize) -> u64 {
        self.parts[p].atom_n.expect("vertex number of a non-atom")
    }
    fn sep_n(&self, s: usize) -> u64 {
        self.seps[s].n
    }
}

/// Saturation rewrites, in priority order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SatOp {
    /// Delete an atom whose vertex number is at most that of the separator
    /// just above, then splice the separator out.
    DropAtom(PartId),
    /// Raise a separator below k that is smaller than its small branch.
    RaiseSep(SepId),
    /// Replace a part of at most 2k vertices with no normal atom below by a
    /// single atom.
    Collapse(PartId),
}

/// Owned recursive copy of the tree used while rewriting; nodes keep their
/// pre-rewrite ids so technical data can be remapped afterwards.
#[derive(Clone)]
struct LNode {
    part: usize,
    kind: LKind,
}

#[derive(Clone)]
enum LKind {
    Atom(u64),
    Branch {
        sep: usize,
        sep_n: u64,
        left: Box<LNode>,
        right: Box<LNode>,
    },
}

fn splice_out_atom(node: LNode, a: usize) -> LNode {
    match node.kind {
        LKind::Atom(_) => node,
        LKind::Branch {
            sep,
            sep_n,
            left,
            right,
        } => {
            if matches!(left.kind, LKind::Atom(_)) && left.part == a {
                return *right;
            }
            if matches!(right.kind, LKind::Atom(_)) && right.part == a {
                return *left;
            }
            LNode {
                part: node.part,
                kind: LKind::Branch {
                    sep,
                    sep_n,
                    left: Box::new(splice_out_atom(*left, a)),
                    right: Box::new(splice_out_atom(*right, a)),
                },
            }
        }
    }
}

fn raise_sep(node: &mut LNode, s: usize) {
    if let LKind::Branch {
        sep,
        sep_n,
        left,
        right,
    } = &mut node.kind
    {
        if *sep == s {
            *sep_n += 1;
        } else {
            raise_sep(left, s);
            raise_sep(right, s);
        }
    }
}

fn collapse_part(node: LNode, p: usize, n_p: u64) -> LNode {
    if node.part == p {
        return LNode {
            part: p,
            kind: LKind::Atom(n_p),
        };
    }
    match node.kind {
        LKind::Atom(_) => node,
        LKind::Branch {
            sep,
            sep_n,
            left,
            right,
        } => LNode {
            part: node.part,
            kind: LKind::Branch {
                sep,
                sep_n,
                left: Box::new(collapse_part(*left, p, n_p)),
                right: Box::new(collapse_part(*right, p, n_p)),
            },
        },
    }
}

impl AbstractSepTree {
    pub fn from_layout(k: usize, layout: &NumberLayout) -> Result<AbstractSepTree> {
        let mut t = AbstractSepTree {
            k,
            parts: Vec::new(),
            seps: Vec::new(),
            tech: BTreeMap::new(),
        };
        t.grow(layout, None);
        t.validate()?;
        Ok(t)
    }

    fn grow(&mut self, node: &NumberLayout, parent: Option<SepId>) {
        let pid = self.parts.len();
        self.parts.push(APart {
            atom_n: None,
            parent,
            child: None,
        });
        match node {
            NumberLayout::Atom(n) => self.parts[pid].atom_n = Some(*n),
            NumberLayout::Branch { sep, left, right } => {
                let sid = self.seps.len();
                self.seps.push(ASep {
                    n: *sep,
                    parent: pid,
                    children: [0, 0],
                });
                self.parts[pid].child = Some(sid);
                let l = self.parts.len();
                self.grow(left, Some(sid));
                let r = self.parts.len();
                self.grow(right, Some(sid));
                self.seps[sid].children = [l, r];
            }
        }
    }

    /// Adds technical-data entries (atom, separator, m) and revalidates.
    pub fn with_technical_data(
        mut self,
        entries: &[(PartId, SepId, u64)],
    ) -> Result<AbstractSepTree> {
        for &(a, s, m) in entries {
            if m > 0 {
                *self.tech.entry((a, s)).or_insert(0) += m;
            }
        }
        self.validate()?;
        Ok(self)
    }

    /// Projects a graph separator-tree to its numbers: same shape, atom and
    /// separator sizes, and the technical data counting, per tiny vertex v,
    /// the lowest separator that contains v and has v's atom in its small
    /// branch.
    pub fn from_separator_tree(t: &SeparatorTree) -> AbstractSepTree {
        let parts = (0..t.part_count())
            .map(|p| {
                let part = t.part(p);
                APart {
                    atom_n: part.child.is_none().then(|| part.vertices.len() as u64),
                    parent: part.parent,
                    child: part.child,
                }
            })
            .collect();
        let seps = (0..t.sep_count())
            .map(|s| {
                let sep = t.sep(s);
                ASep {
                    n: sep.vertices.len() as u64,
                    parent: sep.parent,
                    children: sep.children,
                }
            })
            .collect();
        let val = t.assign_valuation();
        let a = AbstractSepTree {
            k: t.k(),
            parts,
            seps,
            tech: t.associated_technical_data(&val),
        };
        debug_assert!(a.validate().is_ok(), "projection of a valid tree must validate");
        a
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::MalformedTree("adhesion 0".into()));
        }
        if self.parts.is_empty() {
            return Err(Error::MalformedTree("no parts".into()));
        }
        if self.parts[0].parent.is_some() {
            return Err(Error::MalformedTree("root has a parent".into()));
        }
        if self.parts.len() > 1 && self.parts[0].child.is_none() {
            return Err(Error::MalformedTree("root is a leaf in a multi-node tree".into()));
        }
        let mut next_part = 0;
        let mut next_sep = 0;
        let mut stack = vec![0usize];
        while let Some(p) = stack.pop() {
            if p != next_part {
                return Err(Error::MalformedTree(format!("part ids are not preorder at {p}")));
            }
            next_part += 1;
            match (self.parts[p].child, self.parts[p].atom_n) {
                (Some(_), Some(_)) => {
                    return Err(Error::MalformedTree(format!(
                        "inner part {p} carries an atom vertex number"
                    )))
                }
                (None, None) => {
                    return Err(Error::MalformedTree(format!("atom {p} has no vertex number")))
                }
                (None, Some(n)) => {
                    if n == 0 || n > 2 * self.k as u64 {
                        return Err(Error::MalformedTree(format!(
                            "atom {p} has vertex number {n}, allowed 1..={}",
                            2 * self.k
                        )));
                    }
                }
                (Some(s), None) => {
                    if s != next_sep {
                        return Err(Error::MalformedTree(format!(
                            "separator ids are not preorder at {s}"
                        )));
                    }
                    next_sep += 1;
                    if self.seps[s].n > self.k as u64 {
                        return Err(Error::MalformedTree(format!(
                            "separator {s} has vertex number {}, allowed 0..={}",
                            self.seps[s].n, self.k
                        )));
                    }
                    if self.seps[s].parent != p {
                        return Err(Error::MalformedTree(format!(
                            "separator {s} parent link broken"
                        )));
                    }
                    let [a, b] = self.seps[s].children;
                    for c in [a, b] {
                        if c >= self.parts.len() || self.parts[c].parent != Some(s) {
                            return Err(Error::MalformedTree(format!(
                                "child link broken at separator {s}"
                            )));
                        }
                    }
                    stack.push(b);
                    stack.push(a);
                }
            }
        }
        if next_part != self.parts.len() || next_sep != self.seps.len() {
            return Err(Error::MalformedTree("unreachable nodes in arena".into()));
        }
        self.validate_technical_data()
    }

    fn validate_technical_data(&self) -> Result<()> {
        let val = tv::assign_valuation(self);
        for (&(a, s), &m) in &self.tech {
            if m == 0 {
                return Err(Error::MalformedTree(format!(
                    "technical data ({a}, {s}) is zero"
                )));
            }
            if a >= self.parts.len() || !tv::is_atom(self, a) {
                return Err(Error::MalformedTree(format!(
                    "technical data names non-atom {a}"
                )));
            }
            if !tv::is_tiny_atom(self, a) {
                return Err(Error::MalformedTree(format!(
                    "technical data names normal atom {a}"
                )));
            }
            if s >= self.seps.len() {
                return Err(Error::MalformedTree(format!(
                    "technical data names missing separator {s}"
                )));
            }
            let path = tv::path_above(self, a);
            if path.first().map(|&(t, _)| t) == Some(s) {
                return Err(Error::MalformedTree(format!(
                    "technical data assigns atom {a} to the separator just above it"
                )));
            }
            let Some(&(_, side)) = path.iter().find(|&&(t, _)| t == s) else {
                return Err(Error::MalformedTree(format!(
                    "technical data separator {s} is not above atom {a}"
                )));
            };
            if val.small_index(s) != side {
                return Err(Error::MalformedTree(format!(
                    "technical data atom {a} is in the big branch of separator {s}"
                )));
            }
        }
        for a in tv::atom_ids(self) {
            if self.parts[a].parent.is_none() {
                continue;
            }
            let total: u64 = self
                .tech
                .iter()
                .filter(|((x, _), _)| *x == a)
                .map(|(_, &m)| m)
                .sum();
            if total > tv::tiny_vertex_count(self, a) {
                return Err(Error::MalformedTree(format!(
                    "technical data for atom {a} exceeds its tiny vertex count"
                )));
            }
        }
        for s in 0..self.seps.len() {
            let total: u64 = self
                .tech
                .iter()
                .filter(|((_, t), _)| *t == s)
                .map(|(_, &m)| m)
                .sum();
            if total > self.seps[s].n {
                return Err(Error::MalformedTree(format!(
                    "technical data at separator {s} exceeds its vertex number"
                )));
            }
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn part_count(&self) -> usize {
        self.parts.len()
    }

    pub fn sep_count(&self) -> usize {
        self.seps.len()
    }

    pub fn part(&self, p: PartId) -> &APart {
        &self.parts[p]
    }

    pub fn sep(&self, s: SepId) -> &ASep {
        &self.seps[s]
    }

    pub fn technical_data(&self) -> &BTreeMap<(PartId, SepId), u64> {
        &self.tech
    }

    pub fn is_atom(&self, p: PartId) -> bool {
        tv::is_atom(self, p)
    }

    pub fn atoms(&self) -> Vec<PartId> {
        tv::atom_ids(self)
    }

    pub fn is_normal_atom(&self, p: PartId) -> bool {
        tv::is_normal_atom(self, p)
    }

    pub fn is_tiny_atom(&self, p: PartId) -> bool {
        tv::is_tiny_atom(self, p)
    }

    /// Vertex number of a tiny atom minus that of the separator just above.
    pub fn tiny_vertex_count(&self, p: PartId) -> Result<u64> {
        if !self.is_atom(p) || !self.is_tiny_atom(p) {
            return Err(Error::CheckFailed(format!(
                "tiny vertex count of part {p}, which is not a tiny atom"
            )));
        }
        if self.parts[p].parent.is_none() {
            return Err(Error::CheckFailed(
                "tiny vertex count of the root atom, which has no separator above".into(),
            ));
        }
        Ok(tv::tiny_vertex_count(self, p))
    }

    /// Vertex numbers of all parts: atoms as stored, inner parts by
    /// n(P) = n(A) + n(B) - n(S).
    pub fn vertex_numbers(&self) -> Vec<u64> {
        let mut nums = vec![0u64; self.parts.len()];
        for p in (0..self.parts.len()).rev() {
            nums[p] = match self.parts[p].child {
                None => self.parts[p].atom_n.expect("atom without vertex number"),
                Some(s) => {
                    let [a, b] = self.seps[s].children;
                    nums[a] + nums[b] - self.seps[s].n
                }
            };
        }
        nums
    }

    pub fn vertex_number(&self, p: PartId) -> u64 {
        self.vertex_numbers()[p]
    }

    /// Vertex number of the whole tree (the root part).
    pub fn tree_vertex_number(&self) -> u64 {
        self.vertex_numbers()[0]
    }

    pub fn normal_atom_count(&self) -> u64 {
        tv::normal_atom_counts(self)[0]
    }

    pub fn is_normal_tree(&self) -> bool {
        self.atoms().iter().all(|&a| self.is_normal_atom(a))
    }

    /// Every separator has vertex number exactly k and a normal atom below.
    pub fn is_saturated(&self) -> bool {
        let normals = tv::normal_atom_counts(self);
        (0..self.seps.len()).all(|s| {
            let [a, b] = self.seps[s].children;
            self.seps[s].n == self.k as u64 && normals[a] + normals[b] >= 1
        })
    }

    /// Every separator's vertex number is at most both branch vertex
    /// numbers.
    pub fn is_real(&self) -> bool {
        let nums = self.vertex_numbers();
        (0..self.seps.len()).all(|s| {
            let [a, b] = self.seps[s].children;
            self.seps[s].n <= nums[a].min(nums[b])
        })
    }

    pub fn assign_valuation(&self) -> Valuation {
        tv::assign_valuation(self)
    }

    pub fn big_child(&self, val: &Valuation, s: SepId) -> PartId {
        tv::big_child(self, val, s)
    }

    pub fn small_child(&self, val: &Valuation, s: SepId) -> PartId {
        tv::small_child(self, val, s)
    }

    /// The free-anti-edge value f(S) from the separator vertex number, the
    /// normal atoms of the small branch, and the technical data at S.
    pub fn free_count(&self, val: &Valuation, s: SepId) -> Result<Rat> {
        let normals = tv::normal_atom_counts(self);
        let small = tv::small_child(self, val, s);
        let ms: Vec<u64> = self
            .tech
            .iter()
            .filter(|((_, t), _)| *t == s)
            .map(|(_, &m)| m)
            .collect();
        tv::general_free_count(s, self.seps[s].n, normals[small], &ms, self.is_atom(small))
    }

    /// Edge numbers of all parts: atoms contribute C(n, 2) and each
    /// separator adds f(S) - C(n(S), 2).
    pub fn edge_numbers(&self, val: &Valuation) -> Result<Vec<Rat>> {
        let mut e = vec![rat_int(0); self.parts.len()];
        for p in (0..self.parts.len()).rev() {
            e[p] = match self.parts[p].child {
                None => binom2(self.parts[p].atom_n.expect("atom without vertex number")),
                Some(s) => {
                    let [a, b] = self.seps[s].children;
                    e[a].clone() + e[b].clone() - binom2(self.seps[s].n)
                        + self.free_count(val, s)?
                }
            };
        }
        Ok(e)
    }

    pub fn edge_number(&self, val: &Valuation, p: PartId) -> Result<Rat> {
        Ok(self.edge_numbers(val)?[p].clone())
    }

    /// Edge number of the whole tree under its canonical valuation.
    pub fn tree_edge_number(&self) -> Result<Rat> {
        let val = self.assign_valuation();
        self.edge_number(&val, 0)
    }

    /// Branching error x(S); undefined when a branch has no normal atom.
    pub fn branching_error(&self, val: &Valuation, s: SepId) -> Result<Rat> {
        let normals = tv::normal_atom_counts(self);
        let lm = normals[tv::small_child(self, val, s)];
        let lp = normals[tv::big_child(self, val, s)];
        if lm == 0 || lp == 0 {
            return Err(Error::CheckFailed(format!(
                "branching error at separator {s}: a branch has no normal atom"
            )));
        }
        Ok(branching_error_term(lm, lp))
    }

    pub fn branching_error_sum(&self, val: &Valuation) -> Result<Rat> {
        let mut sum = rat_int(0);
        for s in 0..self.seps.len() {
            sum += self.branching_error(val, s)?;
        }
        Ok(sum)
    }

    /// e(T) <= beta (n - k) + gamma / L - epsilon with L the normal atom
    /// count, or 1 when there is none.
    pub fn check_main_bound(&self) -> Result<bool> {
        let e = self.tree_edge_number()?;
        let n = self.tree_vertex_number();
        let l = self.normal_atom_count().max(1);
        Ok(e <= edge_number_bound(self.k, n, l))
    }

    /// The sharper bound for normal saturated trees: the main bound minus
    /// gamma times the branching error sum.
    pub fn check_normal_saturated_bound(&self) -> Result<bool> {
        if !self.is_normal_tree() || !self.is_saturated() {
            return Err(Error::CheckFailed(
                "the sharpened bound applies to normal saturated trees only".into(),
            ));
        }
        let val = self.assign_valuation();
        let e = self.edge_number(&val, 0)?;
        let n = self.tree_vertex_number();
        let l = self.normal_atom_count().max(1);
        let bound = edge_number_bound(self.k, n, l)
            - BoundConstants::new(self.k).gamma * self.branching_error_sum(&val)?;
        Ok(e <= bound)
    }

    fn labeled(&self, p: PartId) -> LNode {
        match self.parts[p].child {
            None => LNode {
                part: p,
                kind: LKind::Atom(self.parts[p].atom_n.expect("atom without vertex number")),
            },
            Some(s) => {
                let [a, b] = self.seps[s].children;
                LNode {
                    part: p,
                    kind: LKind::Branch {
                        sep: s,
                        sep_n: self.seps[s].n,
                        left: Box::new(self.labeled(a)),
                        right: Box::new(self.labeled(b)),
                    },
                }
            }
        }
    }

    fn rebuild(k: usize, root: &LNode, tech: &BTreeMap<(usize, usize), u64>) -> AbstractSepTree {
        let mut t = AbstractSepTree {
            k,
            parts: Vec::new(),
            seps: Vec::new(),
            tech: BTreeMap::new(),
        };
        let mut part_map = BTreeMap::new();
        let mut sep_map = BTreeMap::new();
        t.grow_labeled(root, None, &mut part_map, &mut sep_map);
        for (&(a, s), &m) in tech {
            if let (Some(&na), Some(&ns)) = (part_map.get(&a), sep_map.get(&s)) {
                if m > 0 {
                    t.tech.insert((na, ns), m);
                }
            }
        }
        t
    }

    fn grow_labeled(
        &mut self,
        node: &LNode,
        parent: Option<SepId>,
        part_map: &mut BTreeMap<usize, usize>,
        sep_map: &mut BTreeMap<usize, usize>,
    ) {
        let pid = self.parts.len();
        part_map.insert(node.part, pid);
        self.parts.push(APart {
            atom_n: None,
            parent,
            child: None,
        });
        match &node.kind {
            LKind::Atom(n) => self.parts[pid].atom_n = Some(*n),
            LKind::Branch {
                sep,
                sep_n,
                left,
                right,
            } => {
                let sid = self.seps.len();
                sep_map.insert(*sep, sid);
                self.seps.push(ASep {
                    n: *sep_n,
                    parent: pid,
                    children: [0, 0],
                });
                self.parts[pid].child = Some(sid);
                let l = self.parts.len();
                self.grow_labeled(left, Some(sid), part_map, sep_map);
                let r = self.parts.len();
                self.grow_labeled(right, Some(sid), part_map, sep_map);
                self.seps[sid].children = [l, r];
            }
        }
    }

    /// Separators strictly above a separator.
    fn sep_ancestors(&self, s: SepId) -> Vec<SepId> {
        tv::path_above(self, self.seps[s].parent)
            .into_iter()
            .map(|(t, _)| t)
            .collect()
    }

    /// Parts and separators of the branch rooted at p, including p.
    fn subtree(&self, p: PartId) -> (Vec<PartId>, Vec<SepId>) {
        let mut parts = Vec::new();
        let mut seps = Vec::new();
        let mut stack = vec![p];
        while let Some(q) = stack.pop() {
            parts.push(q);
            if let Some(s) = self.parts[q].child {
                seps.push(s);
                stack.extend(self.seps[s].children);
            }
        }
        (parts, seps)
    }

    /// Whether raising the separator by one keeps the tree real: both of
    /// its branches must stay at or above the new vertex number, and every
    /// ancestor separator must stay strictly below the branch containing
    /// s, whose vertex number the raise shrinks by one.
    fn raise_keeps_real(&self, nums: &[u64], s: SepId) -> bool {
        if self.seps[s].children.iter().any(|&c| nums[c] <= self.seps[s].n) {
            return false;
        }
        let mut part = self.seps[s].parent;
        while let Some(t) = self.parts[part].parent {
            if self.seps[t].n >= nums[part] {
                return false;
            }
            part = self.seps[t].parent;
        }
        true
    }

    /// Picks the next rewrite: any droppable atom first; otherwise a
    /// raisable separator minimal in the tree-order; otherwise a
    /// collapsible part minimal in the tree-order. A separator counts as
    /// raisable only when the raise keeps the tree real; a candidate
    /// blocked by a tight ancestor always leaves that ancestor's branch
    /// collapsible, so fixed points are still saturated.
    fn next_operation(&self) -> Option<SatOp> {
        for p in 0..self.parts.len() {
            if let (Some(n), Some(parent)) = (self.parts[p].atom_n, self.parts[p].parent) {
                if n <= self.seps[parent].n {
                    return Some(SatOp::DropAtom(p));
                }
            }
        }
        let nums = self.vertex_numbers();
        let raisable: Vec<SepId> = (0..self.seps.len())
            .filter(|&s| self.seps[s].n < self.k as u64 && self.raise_keeps_real(&nums, s))
            .collect();
        if !raisable.is_empty() {
            let mut above = BTreeSet::new();
            for &s in &raisable {
                above.extend(self.sep_ancestors(s));
            }
            let s = raisable
                .iter()
                .copied()
                .find(|s| !above.contains(s))
                .expect("a minimal raisable separator exists");
            return Some(SatOp::RaiseSep(s));
        }
        let normals = tv::normal_atom_counts(self);
        let collapsible: Vec<PartId> = (0..self.parts.len())
            .filter(|&p| {
                self.parts[p].child.is_some()
                    && nums[p] <= 2 * self.k as u64
                    && normals[p] == 0
            })
            .collect();
        if !collapsible.is_empty() {
            let mut above = BTreeSet::new();
            for &p in &collapsible {
                above.extend(
                    tv::path_above(self, p)
                        .into_iter()
                        .map(|(t, _)| self.seps[t].parent),
                );
            }
            let p = collapsible
                .iter()
                .copied()
                .find(|p| !above.contains(p))
                .expect("a minimal collapsible part exists");
            return Some(SatOp::Collapse(p));
        }
        None
    }

    fn apply_op(&self, op: SatOp) -> AbstractSepTree {
        let mut tech = self.tech.clone();
        let root = self.labeled(0);
        let new_root = match op {
            SatOp::DropAtom(a) => {
                let s = self.parts[a].parent.expect("droppable atom has a parent");
                tech.retain(|&(x, t), _| t != s && x != a);
                splice_out_atom(root, a)
            }
            SatOp::RaiseSep(s) => {
                let mut r = root;
                raise_sep(&mut r, s);
                for &c in &self.seps[s].children {
                    if self.is_atom(c) && self.is_tiny_atom(c) {
                        let cap = self.parts[c].atom_n.unwrap().saturating_sub(self.seps[s].n + 1);
                        reduce_to_cap(&mut tech, c, cap);
                    }
                }
                r
            }
            SatOp::Collapse(p) => {
                let n_p = self.vertex_numbers()[p];
                let (below_parts, below_seps) = self.subtree(p);
                let atoms: BTreeSet<PartId> =
                    below_parts.iter().copied().filter(|&q| self.is_atom(q)).collect();
                let gone: BTreeSet<SepId> = below_seps.iter().copied().collect();
                let parent_sep = self.parts[p].parent;
                let tiny = 3 * n_p < 4 * self.k as u64;
                let mut transfers: BTreeMap<SepId, u64> = BTreeMap::new();
                tech.retain(|&(x, s), m| {
                    if !atoms.contains(&x) {
                        return true;
                    }
                    if tiny && !gone.contains(&s) && Some(s) != parent_sep {
                        *transfers.entry(s).or_insert(0) += *m;
                    }
                    false
                });
                for (s, m) in transfers {
                    *tech.entry((p, s)).or_insert(0) += m;
                }
                collapse_part(root, p, n_p)
            }
        };
        let mut t = Self::rebuild(self.k, &new_root, &tech);
        t.cleanup_technical_data();
        t
    }

    /// Drops technical-data entries made illegal by a rewrite (atom no
    /// longer tiny, separator no longer above it or now just above it, or
    /// atom now in the big branch) and trims per-atom totals back under the
    /// tiny-vertex cap, deepest separators first.
    pub(crate) fn cleanup_technical_data(&mut self) {
        let val = tv::assign_valuation(self);
        let mut keep: BTreeMap<(PartId, SepId), u64> = BTreeMap::new();
        for (&(a, s), &m) in &self.tech {
            if m == 0 || !tv::is_atom(self, a) || !tv::is_tiny_atom(self, a) {
                continue;
            }
            let path = tv::path_above(self, a);
            if path.first().map(|&(t, _)| t) == Some(s) {
                continue;
            }
            let Some(&(_, side)) = path.iter().find(|&&(t, _)| t == s) else {
                continue;
            };
            if val.small_index(s) != side {
                continue;
            }
            keep.insert((a, s), m);
        }
        let atoms: BTreeSet<PartId> = keep.keys().map(|&(a, _)| a).collect();
        for a in atoms {
            let cap = tv::tiny_vertex_count(self, a);
            reduce_to_cap(&mut keep, a, cap);
        }
        self.tech = keep;
    }

    /// Copy with the tiny vertices of the given atoms deleted: each atom's
    /// vertex number drops to that of the separator just above it and its
    /// technical-data entries vanish. Shape and all other labels are kept,
    /// and the result is not revalidated.
    pub(crate) fn with_tiny_vertices_removed(&self, atoms: &[PartId]) -> AbstractSepTree {
        let mut t = self.clone();
        for &p in atoms {
            let parent = self.parts[p].parent.expect("tiny vertex removal at the root");
            let n = self.parts[p].atom_n.expect("tiny vertex removal from a non-atom");
            t.parts[p].atom_n = Some(n.min(self.seps[parent].n));
        }
        t.tech.retain(|&(x, _), _| !atoms.contains(&x));
        t
    }

    /// Rewrites the tree to a fixed point of the three saturation
    /// operations, applied in priority order. Requires a real tree; the
    /// result is saturated and the measure (vertex number, node count)
    /// strictly decreases with every step.
    pub fn saturate(&self) -> Result<AbstractSepTree> {
        if !self.is_real() {
            return Err(Error::CheckFailed("saturation requires a real tree".into()));
        }
        let mut cur = self.clone();
        let mut measure = (cur.tree_vertex_number(), cur.parts.len() + cur.seps.len());
        loop {
            let Some(op) = cur.next_operation() else {
                break;
            };
            cur = cur.apply_op(op);
            let next = (cur.tree_vertex_number(), cur.parts.len() + cur.seps.len());
            assert!(next < measure, "saturation measure failed to decrease");
            measure = next;
            debug_assert!(cur.validate().is_ok());
            debug_assert!(cur.is_real(), "saturation broke realness");
        }
        debug_assert!(cur.is_saturated());
        Ok(cur)
    }

    /// e(T) <= e(saturate(T)) + k (n(T) - n(saturate(T))).
    pub fn check_saturation_inequality(&self) -> Result<bool> {
        let sat = self.saturate()?;
        let e = self.tree_edge_number()?;
        let e_sat = sat.tree_edge_number()?;
        let dn = self.tree_vertex_number() as i64 - sat.tree_vertex_number() as i64;
        Ok(e <= e_sat + rat_int(self.k as i64) * rat_int(dn))
    }

    /// Saturation never loses normal atoms.
    pub fn check_normal_monotone(&self) -> Result<bool> {
        Ok(self.saturate()?.normal_atom_count() >= self.normal_atom_count())
    }

    pub fn to_json(&self) -> String {
        let val = self.assign_valuation();
        let mut next_part = 0;
        let mut next_sep = 0;
        let mut part_ids = BTreeMap::new();
        let mut sep_ids = BTreeMap::new();
        let root = self.node_repr(&val, 0, &mut next_part, &mut next_sep, &mut part_ids, &mut sep_ids);
        let mut technical_data: Vec<TechRepr> = self
            .tech
            .iter()
            .map(|(&(a, s), &m)| TechRepr {
                atom: part_ids[&a],
                separator: sep_ids[&s],
                m,
            })
            .collect();
        technical_data.sort();
        serde_json::to_string(&ATreeRepr {
            k: self.k,
            root,
            technical_data,
        })
        .expect("tree serialization cannot fail")
    }

    fn node_repr(
        &self,
        val: &Valuation,
        p: PartId,
        next_part: &mut usize,
        next_sep: &mut usize,
        part_ids: &mut BTreeMap<PartId, usize>,
        sep_ids: &mut BTreeMap<SepId, usize>,
    ) -> ANodeRepr {
        part_ids.insert(p, *next_part);
        *next_part += 1;
        match self.parts[p].child {
            None => ANodeRepr {
                role: "part".into(),
                n: self.parts[p].atom_n,
                separator: None,
            },
            Some(s) => {
                sep_ids.insert(s, *next_sep);
                *next_sep += 1;
                let small = tv::small_child(self, val, s);
                let big = tv::big_child(self, val, s);
                ANodeRepr {
                    role: "part".into(),
                    n: None,
                    separator: Some(Box::new(ASepRepr {
                        role: "separator".into(),
                        n: self.seps[s].n,
                        children: (
                            Box::new(self.node_repr(val, small, next_part, next_sep, part_ids, sep_ids)),
                            Box::new(self.node_repr(val, big, next_part, next_sep, part_ids, sep_ids)),
                        ),
                    })),
                }
            }
        }
    }

    /// Parses a tree serialized by [`to_json`].
    ///
    /// [`to_json`]: AbstractSepTree::to_json
    pub fn from_json(text: &str) -> Result<AbstractSepTree> {
        let repr: ATreeRepr =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("tree JSON: {e}")))?;
        let mut t = AbstractSepTree {
            k: repr.k,
            parts: Vec::new(),
            seps: Vec::new(),
            tech: BTreeMap::new(),
        };
        t.place_repr(&repr.root, None)?;
        for rec in &repr.technical_data {
            if rec.m == 0 {
                return Err(Error::Parse("technical data entry with m = 0".into()));
            }
            if t.tech.insert((rec.atom, rec.separator), rec.m).is_some() {
                return Err(Error::Parse(format!(
                    "duplicate technical data entry ({}, {})",
                    rec.atom, rec.separator
                )));
            }
        }
        t.validate()?;
        Ok(t)
    }

    fn place_repr(&mut self, node: &ANodeRepr, parent: Option<SepId>) -> Result<PartId> {
        if node.role != "part" {
            return Err(Error::Parse(format!("expected role part, got {}", node.role)));
        }
        let pid = self.parts.len();
        self.parts.push(APart {
            atom_n: None,
            parent,
            child: None,
        });
        match (&node.separator, node.n) {
            (Some(_), Some(_)) => {
                return Err(Error::Parse(format!(
                    "part {pid} has both a vertex number and a separator"
                )))
            }
            (None, None) => {
                return Err(Error::Parse(format!(
                    "part {pid} has neither a vertex number nor a separator"
                )))
            }
            (None, Some(n)) => self.parts[pid].atom_n = Some(n),
            (Some(sep), None) => {
                if sep.role != "separator" {
                    return Err(Error::Parse(format!(
                        "expected role separator, got {}",
                        sep.role
                    )));
                }
                let sid = self.seps.len();
                self.seps.push(ASep {
                    n: sep.n,
                    parent: pid,
                    children: [0, 0],
                });
                self.parts[pid].child = Some(sid);
                let a = self.place_repr(&sep.children.0, Some(sid))?;
                let b = self.place_repr(&sep.children.1, Some(sid))?;
                self.seps[sid].children = [a, b];
            }
        }
        Ok(pid)
    }
}

/// Trims the per-atom technical-data total down to `cap`, reducing entries
/// at the deepest separators first.
fn reduce_to_cap(tech: &mut BTreeMap<(PartId, SepId), u64>, a: PartId, cap: u64) {
    let mut total: u64 = tech.iter().filter(|((x, _), _)| *x == a).map(|(_, &m)| m).sum();
    while total > cap {
        let key = tech
            .iter()
            .filter(|((x, _), _)| *x == a)
            .max_by_key(|(&(_, s), _)| s)
            .map(|(&key, _)| key)
            .expect("positive total implies an entry");
        let entry = tech.get_mut(&key).expect("key just found");
        let cut = (total - cap).min(*entry);
        *entry -= cut;
        total -= cut;
        if *entry == 0 {
            tech.remove(&key);
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ATreeRepr {
    k: usize,
    root: ANodeRepr,
    technical_data: Vec<TechRepr>,
}

#[derive(Serialize, Deserialize, PartialEq, Eq, PartialOrd, Ord)]
struct TechRepr {
    atom: usize,
    separator: usize,
    m: u64,
}

#[derive(Serialize, Deserialize)]
struct ANodeRepr {
    role: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    separator: Option<Box<ASepRepr>>,
}

#[derive(Serialize, Deserialize)]
struct ASepRepr {
    role: String,
    n: u64,
    children: (Box<ANodeRepr>, Box<ANodeRepr>),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{glue, Graph};
    use crate::septree::{BuildOutcome, SeparatorTree};
    use NumberLayout as L;

    /// k = 2 tree of two 4-vertex atoms over a 2-vertex separator.
    fn glue_tree() -> AbstractSepTree {
        AbstractSepTree::from_layout(2, &L::branch(2, L::atom(4), L::atom(4))).unwrap()
    }

    /// k = 2, two glue trees joined over another 2-separator.
    fn layered_tree() -> AbstractSepTree {
        let side = || L::branch(2, L::atom(4), L::atom(4));
        AbstractSepTree::from_layout(2, &L::branch(2, side(), side())).unwrap()
    }

    #[test]
    fn degenerate_tree() {
        let t = AbstractSepTree::from_layout(3, &L::atom(5)).unwrap();
        assert_eq!(t.tree_vertex_number(), 5);
        assert_eq!(t.tree_edge_number().unwrap(), rat_int(10));
        assert!(t.is_saturated());
        assert!(t.is_real());
        assert!(t.is_normal_tree());
        assert_eq!(t.normal_atom_count(), 1);
        assert!(t.tiny_vertex_count(0).is_err());
        assert!(t.check_main_bound().unwrap());
        assert_eq!(t.saturate().unwrap(), t);
    }

    #[test]
    fn bound_constants() {
        let c = BoundConstants::new(2);
        assert_eq!(c.beta, rat(17, 6));
        assert_eq!(c.gamma, rat(4, 3));
        assert_eq!(c.epsilon, rat_int(1));
    }

    #[test]
    fn complete_atom_identity() {
        // C(2k, 2) = beta k + gamma - epsilon, the base of the edge bound.
        for k in 1..=30u64 {
            assert_eq!(
                binom2(2 * k),
                edge_number_bound(k as usize, 2 * k, 1),
                "identity fails at k = {k}"
            );
        }
    }

    #[test]
    fn glue_tree_numbers() {
        let t = glue_tree();
        assert_eq!(t.tree_vertex_number(), 6);
        assert_eq!(t.tree_edge_number().unwrap(), rat_int(11));
        assert!(t.is_saturated() && t.is_real() && t.is_normal_tree());
        // 11 = (17/6)(6-2) + (4/3)/2 - 1, with equality
        assert_eq!(edge_number_bound(2, 6, 2), rat_int(11));
        assert!(t.check_main_bound().unwrap());
        assert!(t.check_normal_saturated_bound().unwrap());
        let val = t.assign_valuation();
        assert_eq!(t.branching_error_sum(&val).unwrap(), rat_int(0));
    }

    #[test]
    fn layered_tree_numbers() {
        let t = layered_tree();
        assert_eq!(t.tree_vertex_number(), 10);
        assert_eq!(t.normal_atom_count(), 4);
        assert_eq!(t.tree_edge_number().unwrap(), rat_int(22));
        assert_eq!(edge_number_bound(2, 10, 4), rat_int(22));
        assert!(t.check_normal_saturated_bound().unwrap());
        let val = t.assign_valuation();
        assert_eq!(t.branching_error_sum(&val).unwrap(), rat_int(0));
    }

    #[test]
    fn vertex_recursion_and_tiny_counts() {
        let t = AbstractSepTree::from_layout(3, &L::branch(1, L::atom(3), L::atom(6))).unwrap();
        assert_eq!(t.tree_vertex_number(), 8);
        assert!(t.is_tiny_atom(1));
        assert_eq!(t.tiny_vertex_count(1).unwrap(), 2);
        assert!(t.tiny_vertex_count(2).is_err());

        let u = AbstractSepTree::from_layout(3, &L::branch(3, L::atom(3), L::atom(6))).unwrap();
        assert_eq!(u.tiny_vertex_count(1).unwrap(), 0);
    }

    #[test]
    fn free_count_formula() {
        // s = 4, two normal atoms in the small branch, one entry of 2
        assert_eq!(tv::general_free_count(0, 4, 2, &[2], false).unwrap(), rat_int(5));
        // same without technical data: the plain multipartite value
        assert_eq!(tv::general_free_count(0, 4, 2, &[], false).unwrap(), rat_int(4));
        // s = k with a single normal atom: no free anti-edges
        assert_eq!(tv::general_free_count(0, 2, 1, &[], false).unwrap(), rat_int(0));
        // no normal atom in a multi-atom small branch: undefined unless
        // every separator vertex is technical
        assert!(tv::general_free_count(0, 3, 0, &[1], false).is_err());
        assert_eq!(
            tv::general_free_count(0, 3, 0, &[2, 1], false).unwrap(),
            rat_int(2)
        );
    }

    #[test]
    fn layout_validation() {
        assert!(AbstractSepTree::from_layout(2, &L::atom(0)).is_err());
        assert!(AbstractSepTree::from_layout(2, &L::atom(5)).is_err());
        assert!(AbstractSepTree::from_layout(2, &L::branch(3, L::atom(4), L::atom(4))).is_err());
        assert!(AbstractSepTree::from_layout(0, &L::atom(1)).is_err());
    }

    #[test]
    fn technical_data_validation() {
        // k = 3: Branch(S0 = 2, Q = Branch(S1 = 1, tiny 3, normal 4), R)
        // with R holding two normal atoms so that Q is the small branch.
        let tree = || {
            L::branch(
                2,
                L::branch(1, L::atom(3), L::atom(4)),
                L::branch(2, L::atom(5), L::atom(5)),
            )
        };
        // parts: 0 root, 1 Q, 2 tiny, 3 normal4, 4 R, 5 atom5, 6 atom5
        // seps: 0 top, 1 inside Q, 2 inside R
        let t = AbstractSepTree::from_layout(3, &tree()).unwrap();
        assert!(t.clone().with_technical_data(&[(2, 0, 1)]).is_ok());
        // separator just above the atom
        assert!(t.clone().with_technical_data(&[(2, 1, 1)]).is_err());
        // normal atom
        assert!(t.clone().with_technical_data(&[(3, 0, 1)]).is_err());
        // per-atom cap: tiny count of atom 2 is 3 - 1 = 2
        assert!(t.clone().with_technical_data(&[(2, 0, 3)]).is_err());
        // atom in the big branch of the named separator
        let u = AbstractSepTree::from_layout(
            3,
            &L::branch(2, L::branch(1, L::atom(3), L::atom(4)), L::atom(5)),
        )
        .unwrap();
        assert!(u.with_technical_data(&[(2, 0, 1)]).is_err());
    }

    #[test]
    fn projection_agrees_with_graph_tree() {
        let g = glue(&Graph::complete(4), &Graph::complete(4), &[(0, 0), (1, 1)]).unwrap();
        let BuildOutcome::Tree(t) = SeparatorTree::build(&g, 2) else {
            panic!("expected a tree");
        };
        let a = AbstractSepTree::from_separator_tree(&t);
        assert_eq!(a, glue_tree());
        assert_eq!(a.tree_vertex_number() as usize, g.n());
        let val = t.assign_valuation();
        let f = t.associated_framework(&val);
        assert_eq!(
            t.framework_edge_number(&val, &f, 0).unwrap(),
            a.tree_edge_number().unwrap()
        );
        assert!(a.is_real());
    }

    #[test]
    fn saturate_fixed_point() {
        let t = layered_tree();
        assert_eq!(t.saturate().unwrap(), t);
        assert!(t.check_saturation_inequality().unwrap());
    }

    #[test]
    fn saturate_drops_small_atom() {
        let t = AbstractSepTree::from_layout(2, &L::branch(2, L::atom(2), L::atom(4))).unwrap();
        assert_eq!(t.tree_edge_number().unwrap(), rat_int(6));
        let sat = t.saturate().unwrap();
        assert_eq!(sat.part_count(), 1);
        assert_eq!(sat.tree_vertex_number(), 4);
        assert_eq!(sat.tree_edge_number().unwrap(), rat_int(6));
        assert!(sat.is_saturated());
        assert!(t.check_saturation_inequality().unwrap());
    }

    #[test]
    fn saturate_raises_separator() {
        let t = AbstractSepTree::from_layout(2, &L::branch(1, L::atom(3), L::atom(4))).unwrap();
        assert_eq!(t.tree_vertex_number(), 6);
        assert_eq!(t.tree_edge_number().unwrap(), rat_int(9));
        let sat = t.saturate().unwrap();
        let expect =
            AbstractSepTree::from_layout(2, &L::branch(2, L::atom(3), L::atom(4))).unwrap();
        assert_eq!(sat, expect);
        assert_eq!(sat.tree_edge_number().unwrap(), rat_int(8));
        assert!(t.check_saturation_inequality().unwrap());
        assert!(t.check_normal_monotone().unwrap());
    }

    #[test]
    fn saturate_collapses_normal_part() {
        // k = 4: a branch of two tiny 5-atoms over a full separator has no
        // normal atom and 6 vertices; it collapses into a normal atom.
        let t = AbstractSepTree::from_layout(
            4,
            &L::branch(4, L::branch(4, L::atom(5), L::atom(5)), L::atom(8)),
        )
        .unwrap();
        assert_eq!(t.normal_atom_count(), 1);
        let sat = t.saturate().unwrap();
        let expect =
            AbstractSepTree::from_layout(4, &L::branch(4, L::atom(6), L::atom(8))).unwrap();
        assert_eq!(sat, expect);
        assert_eq!(sat.normal_atom_count(), 2);
        assert!(t.check_normal_monotone().unwrap());
        // the input edge number is undefined here (no normal atom and no
        // technical data in the small branch), so only structure is checked
        assert!(t.tree_edge_number().is_err());
    }

    #[test]
    fn saturate_chain_with_technical_data() {
        // k = 3. The separator inside Q is raised twice, consuming the
        // technical-data entry; the tiny atom then drops, and the remaining
        // separators are raised to k.
        let t = AbstractSepTree::from_layout(
            3,
            &L::branch(
                2,
                L::branch(1, L::atom(3), L::atom(4)),
                L::branch(2, L::atom(5), L::atom(5)),
            ),
        )
        .unwrap()
        .with_technical_data(&[(2, 0, 1)])
        .unwrap();
        assert_eq!(t.tree_vertex_number(), 12);
        assert_eq!(t.tree_edge_number().unwrap(), rat_int(28));
        let sat = t.saturate().unwrap();
        let expect = AbstractSepTree::from_layout(
            3,
            &L::branch(3, L::atom(4), L::branch(3, L::atom(5), L::atom(5))),
        )
        .unwrap();
        assert_eq!(sat, expect);
        assert_eq!(sat.tree_vertex_number(), 8);
        assert_eq!(sat.tree_edge_number().unwrap(), rat_int(20));
        // 28 <= 20 + 3 * (12 - 8)
        assert!(t.check_saturation_inequality().unwrap());
        assert!(t.check_normal_monotone().unwrap());
    }

    #[test]
    fn saturate_transfers_technical_data_on_tiny_collapse() {
        // k = 7: under the priority order a collapsed part is tiny only for
        // k >= 7; its atoms' entries transfer to the collapsed atom.
        let q = L::branch(7, L::branch(7, L::atom(8), L::atom(8)), L::atom(10));
        let r = L::branch(7, L::atom(14), L::atom(14));
        let t = AbstractSepTree::from_layout(7, &L::branch(7, q, r))
            .unwrap()
            // parts: 0 root, 1 Q, 2 P, 3 atom8, 4 atom8, 5 atom10, 6 R, ...
            // seps: 0 top, 1 inside Q, 2 inside P, 3 inside R
            .with_technical_data(&[(3, 0, 1)])
            .unwrap();
        let sat = t.saturate().unwrap();
        assert!(sat.is_saturated());
        // P collapsed to a tiny atom of 9 vertices carrying the entry
        let expect = AbstractSepTree::from_layout(
            7,
            &L::branch(
                7,
                L::branch(7, L::atom(9), L::atom(10)),
                L::branch(7, L::atom(14), L::atom(14)),
            ),
        )
        .unwrap()
        .with_technical_data(&[(2, 0, 1)])
        .unwrap();
        assert_eq!(sat, expect);
    }

    #[test]
    fn saturate_requires_real() {
        let t = AbstractSepTree::from_layout(2, &L::branch(2, L::atom(1), L::atom(4))).unwrap();
        assert!(!t.is_real());
        assert!(t.saturate().is_err());
    }

    #[test]
    fn branching_error_values() {
        assert_eq!(branching_error_term(1, 1), rat_int(0));
        assert_eq!(branching_error_term(1, 2), rat(1, 3));
        assert_eq!(branching_error_term(2, 2), rat_int(0));
        assert_eq!(branching_error_term(2, 3), rat(7, 60));
        assert!(branching_error_term(2, 3) >= rat(1, 16));
    }

    #[test]
    fn inequality_grids() {
        assert!(check_branch_count_inequality(40));
        assert!(check_branching_error_bound(60));
    }

    #[test]
    fn json_round_trip() {
        let t = AbstractSepTree::from_layout(
            3,
            &L::branch(
                2,
                L::branch(1, L::atom(3), L::atom(4)),
                L::branch(2, L::atom(5), L::atom(5)),
            ),
        )
        .unwrap()
        .with_technical_data(&[(2, 0, 1)])
        .unwrap();
        let text = t.to_json();
        let u = AbstractSepTree::from_json(&text).unwrap();
        assert_eq!(u.k(), t.k());
        assert_eq!(u.part_count(), t.part_count());
        assert_eq!(u.tree_vertex_number(), t.tree_vertex_number());
        assert_eq!(u.tree_edge_number().unwrap(), t.tree_edge_number().unwrap());
        assert_eq!(u.technical_data().len(), 1);
        assert_eq!(AbstractSepTree::from_json(&u.to_json()).unwrap(), u);

        assert!(AbstractSepTree::from_json("{\"k\":1}").is_err());
    }
}
