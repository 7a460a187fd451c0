//! Grouping of tiny atoms into molecules, the edge-number cost of deleting
//! them, and the checks that bound that cost.
//!
//! A non-root tiny atom desires the separators it could still send tiny
//! vertices to; two atoms that desire a common separator affect each other,
//! and molecules are the closure classes of that relation. Deleting a whole
//! molecule keeps the remaining technical data legal, and the loss of edge
//! number is controlled in terms of the molecule's reach.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use serde::Serialize;

use crate::abstract_tree::{AbstractSepTree, BoundConstants, PartId, SepId};
use crate::tree_view::{self as tv, Valuation};
use crate::{cmp_log2, rat, rat_int, Error, Rat, Result};

/// Normal-atom count in the small branch of an achieved separator. The
/// sentinel `Infinite` stands in for atoms and molecules that achieve no
/// separator at all; it compares greater than every finite reach.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Reach {
    Finite(u64),
    Infinite,
}

impl Reach {
    pub fn finite(self) -> Option<u64> {
        match self {
            Reach::Finite(l) => Some(l),
            Reach::Infinite => None,
        }
    }
}

/// A closure class of tiny atoms under the affect relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Molecule {
    /// Member atoms, ascending.
    pub atoms: Vec<PartId>,
    /// Highest separator achieved by a member, present only when every
    /// member achieves one.
    pub final_separator: Option<SepId>,
    /// Reach of the final separator.
    pub reach: Reach,
    /// Total tiny vertices over all members.
    pub tiny_vertex_count: u64,
    /// Reach intervals: entry `i` lists the classes (as indices into the
    /// report) whose reach, doubled `i` times, still fits under the
    /// molecule's reach. Empty for molecules of infinite reach.
    pub class_intervals: Vec<Vec<usize>>,
}

/// Atoms of one molecule achieving the same separator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceClass {
    pub separator: SepId,
    /// Member atoms, ascending.
    pub atoms: Vec<PartId>,
    /// Reach of the achieved separator.
    pub reach: u64,
    /// Total tiny vertices over the member atoms.
    pub mass: u64,
    /// Index of the owning molecule in the report.
    pub molecule: usize,
    /// Which reach interval of the owning molecule the class falls in, if
    /// the molecule has finite reach and the class reach is below it.
    pub interval: Option<usize>,
}

/// Desires, achieved separators, molecules and equivalence classes of one
/// tree under its canonical valuation.
#[derive(Clone, Debug)]
pub struct MoleculeReport {
    /// Per non-root tiny atom, the separators it desires, lowest first.
    pub desires: BTreeMap<PartId, Vec<SepId>>,
    /// Per non-root tiny atom, the separator it achieves, if any.
    pub achieved: BTreeMap<PartId, Option<SepId>>,
    /// Molecules, ordered by smallest member atom.
    pub molecules: Vec<Molecule>,
    /// Equivalence classes, ordered by separator.
    pub classes: Vec<EquivalenceClass>,
}

/// Normal atoms in the small branch of a separator.
pub fn separator_reach(a: &AbstractSepTree, val: &Valuation, s: SepId) -> u64 {
    tv::normal_atom_counts(a)[tv::small_child(a, val, s)]
}

/// Whether both branches of a separator hold the same number of normal
/// atoms.
pub fn is_normally_balanced(a: &AbstractSepTree, s: SepId) -> bool {
    let counts = tv::normal_atom_counts(a);
    let [l, r] = a.sep(s).children;
    counts[l] == counts[r]
}

/// Separators a non-root tiny atom desires, lowest first.
pub fn desired_separators(a: &AbstractSepTree, val: &Valuation, atom: PartId) -> Vec<SepId> {
    tv::desired_seps(a, val, atom)
}

/// The separator a non-root tiny atom achieves, if any: the highest desired
/// one, provided the atom lies in its small branch.
pub fn achieved_separator(a: &AbstractSepTree, val: &Valuation, atom: PartId) -> Option<SepId> {
    tv::achieved_sep(a, val, atom)
}

fn find(uf: &mut [usize], mut x: usize) -> usize {
    while uf[x] != x {
        uf[x] = uf[uf[x]];
        x = uf[x];
    }
    x
}

fn union(uf: &mut [usize], a: usize, b: usize) {
    let ra = find(uf, a);
    let rb = find(uf, b);
    if ra != rb {
        uf[ra.max(rb)] = ra.min(rb);
    }
}

/// Separators strictly above a separator, lowest first.
fn sep_ancestors(a: &AbstractSepTree, s: SepId) -> Vec<SepId> {
    tv::path_above(a, a.sep(s).parent).into_iter().map(|(t, _)| t).collect()
}

fn sep_depth(a: &AbstractSepTree, s: SepId) -> usize {
    sep_ancestors(a, s).len()
}

/// Child-branch index of the separator's branch containing the part, if the
/// part lies below the separator at all.
fn branch_side(a: &AbstractSepTree, p: PartId, s: SepId) -> Option<usize> {
    tv::path_above(a, p).into_iter().find(|&(t, _)| t == s).map(|(_, side)| side)
}

impl MoleculeReport {
    pub fn compute(a: &AbstractSepTree) -> MoleculeReport {
        let val = a.assign_valuation();
        let tiny: Vec<PartId> = a
            .atoms()
            .into_iter()
            .filter(|&p| a.is_tiny_atom(p) && a.part(p).parent.is_some())
            .collect();
        let desires: BTreeMap<PartId, Vec<SepId>> =
            tiny.iter().map(|&x| (x, tv::desired_seps(a, &val, x))).collect();
        let achieved: BTreeMap<PartId, Option<SepId>> =
            tiny.iter().map(|&x| (x, tv::achieved_sep(a, &val, x))).collect();

        let index: BTreeMap<PartId, usize> =
            tiny.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let mut uf: Vec<usize> = (0..tiny.len()).collect();
        let mut by_sep: BTreeMap<SepId, Vec<usize>> = BTreeMap::new();
        for (&x, ds) in &desires {
            for &s in ds {
                by_sep.entry(s).or_default().push(index[&x]);
            }
        }
        for group in by_sep.values() {
            for w in group.windows(2) {
                union(&mut uf, w[0], w[1]);
            }
        }
        let mut groups: BTreeMap<usize, Vec<PartId>> = BTreeMap::new();
        for (i, &x) in tiny.iter().enumerate() {
            groups.entry(find(&mut uf, i)).or_default().push(x);
        }

        let mut molecules: Vec<Molecule> = groups
            .into_values()
            .map(|atoms| {
                let ach: Vec<Option<SepId>> = atoms.iter().map(|q| achieved[q]).collect();
                let (final_separator, reach) = if ach.iter().any(Option::is_none) {
                    (None, Reach::Infinite)
                } else {
                    let seps: BTreeSet<SepId> = ach.iter().map(|o| o.unwrap()).collect();
                    let f = *seps.iter().min_by_key(|&&s| sep_depth(a, s)).unwrap();
                    debug_assert!(seps
                        .iter()
                        .all(|&s| s == f || sep_ancestors(a, s).contains(&f)));
                    (Some(f), Reach::Finite(separator_reach(a, &val, f)))
                };
                let tiny_vertex_count = atoms.iter().map(|&q| tv::tiny_vertex_count(a, q)).sum();
                Molecule { atoms, final_separator, reach, tiny_vertex_count, class_intervals: Vec::new() }
            })
            .collect();
        molecules.sort_by_key(|m| m.atoms[0]);

        let molecule_of: BTreeMap<PartId, usize> = molecules
            .iter()
            .enumerate()
            .flat_map(|(i, m)| m.atoms.iter().map(move |&q| (q, i)))
            .collect();
        let mut class_map: BTreeMap<SepId, Vec<PartId>> = BTreeMap::new();
        for (&x, &o) in &achieved {
            if let Some(s) = o {
                class_map.entry(s).or_default().push(x);
            }
        }
        let mut classes: Vec<EquivalenceClass> = class_map
            .into_iter()
            .map(|(separator, atoms)| {
                let molecule = molecule_of[&atoms[0]];
                debug_assert!(atoms.iter().all(|q| molecule_of[q] == molecule));
                EquivalenceClass {
                    separator,
                    reach: separator_reach(a, &val, separator),
                    mass: atoms.iter().map(|&q| tv::tiny_vertex_count(a, q)).sum(),
                    molecule,
                    interval: None,
                    atoms,
                }
            })
            .collect();

        for (ci, c) in classes.iter_mut().enumerate() {
            let Reach::Finite(lm) = molecules[c.molecule].reach else { continue };
            if c.reach == 0 || c.reach > lm {
                continue;
            }
            let mut i = 0usize;
            while i < 62 && (c.reach << (i + 1)) <= lm {
                i += 1;
            }
            c.interval = Some(i);
            let list = &mut molecules[c.molecule].class_intervals;
            if list.len() <= i {
                list.resize(i + 1, Vec::new());
            }
            list[i].push(ci);
        }

        MoleculeReport { desires, achieved, molecules, classes }
    }

    /// Index of the molecule containing an atom, if any.
    pub fn molecule_of(&self, atom: PartId) -> Option<usize> {
        self.molecules.iter().position(|m| m.atoms.contains(&atom))
    }

    pub fn to_json(&self) -> String {
        let repr = ReportRepr {
            molecules: self
                .molecules
                .iter()
                .map(|m| MoleculeRepr {
                    atoms: &m.atoms,
                    final_separator: m.final_separator,
                    reach: m.reach.finite(),
                    tiny_vertices: m.tiny_vertex_count,
                    class_intervals: &m.class_intervals,
                })
                .collect(),
            classes: self
                .classes
                .iter()
                .map(|c| ClassRepr {
                    separator: c.separator,
                    atoms: &c.atoms,
                    reach: c.reach,
                    mass: c.mass,
                    molecule: c.molecule,
                })
                .collect(),
            desires: &self.desires,
            achieved: &self.achieved,
        };
        serde_json::to_string(&repr).expect("molecule report serialization")
    }
}

#[derive(Serialize)]
struct ReportRepr<'a> {
    molecules: Vec<MoleculeRepr<'a>>,
    classes: Vec<ClassRepr<'a>>,
    desires: &'a BTreeMap<PartId, Vec<SepId>>,
    achieved: &'a BTreeMap<PartId, Option<SepId>>,
}

#[derive(Serialize)]
struct MoleculeRepr<'a> {
    atoms: &'a [PartId],
    final_separator: Option<SepId>,
    reach: Option<u64>,
    #[serde(rename = "n_M")]
    tiny_vertices: u64,
    class_intervals: &'a [Vec<usize>],
}

#[derive(Serialize)]
struct ClassRepr<'a> {
    separator: SepId,
    atoms: &'a [PartId],
    reach: u64,
    mass: u64,
    molecule: usize,
}

/// Reach of each tiny atom in the report: the reach of its achieved
/// separator, infinite when it achieves none.
fn atom_reaches(
    a: &AbstractSepTree,
    val: &Valuation,
    report: &MoleculeReport,
) -> BTreeMap<PartId, Reach> {
    report
        .achieved
        .iter()
        .map(|(&x, &o)| {
            let r = match o {
                Some(s) => Reach::Finite(separator_reach(a, val, s)),
                None => Reach::Infinite,
            };
            (x, r)
        })
        .collect()
}

/// Runs the structural invariants of desires, achieved separators,
/// molecules and reach intervals, one named verdict each.
pub fn verify_section6(a: &AbstractSepTree, report: &MoleculeReport) -> Vec<(&'static str, bool)> {
    let val = a.assign_valuation();
    let reaches = atom_reaches(a, &val, report);

    let finals: Vec<SepId> = report.molecules.iter().filter_map(|m| m.final_separator).collect();
    let finals_distinct = finals.iter().collect::<BTreeSet<_>>().len() == finals.len();

    let unachieved_balanced = report.desires.iter().all(|(&x, ds)| {
        ds.iter()
            .all(|&s| report.achieved[&x] == Some(s) || is_normally_balanced(a, s))
    });

    let achieved_balanced_or_final = report.molecules.iter().all(|m| {
        m.atoms.iter().all(|q| match report.achieved[q] {
            None => true,
            Some(s) => is_normally_balanced(a, s) || Some(s) == m.final_separator,
        })
    });

    let final_not_balanced = report
        .molecules
        .iter()
        .filter_map(|m| m.final_separator)
        .all(|f| !is_normally_balanced(a, f));

    let chain_doubles = report.desires.values().all(|ds| {
        let r: Vec<u64> = ds.iter().map(|&s| separator_reach(a, &val, s)).collect();
        r.windows(2).all(|w| w[1] >= 2 * w[0])
    });

    let class_chains = report.classes.iter().all(|c| {
        let seps: BTreeSet<SepId> =
            c.atoms.iter().flat_map(|q| report.desires[q].iter().copied()).collect();
        let mut v: Vec<SepId> = seps.into_iter().collect();
        v.sort_by_key(|&s| sep_depth(a, s));
        v.windows(2).all(|w| sep_ancestors(a, w[1]).contains(&w[0]))
    });

    let dominating = check_dominating_classes(a, &val, report);

    let max_finite = reaches.values().filter_map(|r| r.finite()).max().unwrap_or(0);
    let doubling_count = report.molecules.iter().all(|m| {
        let hi = match m.reach {
            Reach::Finite(lm) => lm / 2,
            Reach::Infinite => 2 * max_finite,
        };
        let count_ge = |t: u64| -> u64 {
            m.atoms
                .iter()
                .filter(|&&q| reaches[&q] >= Reach::Finite(t))
                .map(|&q| tv::tiny_vertex_count(a, q))
                .sum()
        };
        (1..=hi).all(|i| 2 * count_ge(2 * i) >= count_ge(i))
    });

    let top_interval = report.molecules.iter().enumerate().all(|(mi, m)| {
        if m.reach.finite().is_none() {
            return true;
        }
        let classified = report
            .classes
            .iter()
            .filter(|c| c.molecule == mi)
            .all(|c| c.interval.is_some());
        classified && m.class_intervals.first().map_or(0, Vec::len) == 1
    });

    let interval_counts = report.molecules.iter().all(|m| {
        let Some(lm) = m.reach.finite() else { return true };
        let mut ok = true;
        let mut i = 1usize;
        while i < 62 && (2u64 << i) <= lm {
            ok &= m.class_intervals.get(i).map_or(0, Vec::len) <= 1 << (i - 1);
            i += 1;
        }
        ok
    });

    vec![
        ("final-separators-distinct", finals_distinct),
        ("desired-unachieved-balanced", unachieved_balanced),
        ("achieved-balanced-or-final", achieved_balanced_or_final),
        ("final-not-balanced", final_not_balanced),
        ("desire-chain-reach-doubles", chain_doubles),
        ("class-desires-form-chain", class_chains),
        ("dominating-class", dominating),
        ("reach-doubling-count", doubling_count),
        ("top-interval-single-class", top_interval),
        ("interval-class-count", interval_counts),
    ]
}

/// For every class whose reach falls short of its molecule's, the desirers
/// across its separator must form a single achieving class of at least
/// doubled reach and at least equal mass; classes of comparable reach must
/// point at distinct such classes.
fn check_dominating_classes(
    a: &AbstractSepTree,
    val: &Valuation,
    report: &MoleculeReport,
) -> bool {
    let mut ok = true;
    let mut dominator: BTreeMap<usize, usize> = BTreeMap::new();
    let class_by_sep: BTreeMap<SepId, usize> =
        report.classes.iter().enumerate().map(|(i, c)| (c.separator, i)).collect();
    for (ci, c) in report.classes.iter().enumerate() {
        let Some(lm) = report.molecules[c.molecule].reach.finite() else { continue };
        if c.reach >= lm {
            continue;
        }
        let s = c.separator;
        let small = val.small_index(s);
        ok &= c.atoms.iter().all(|&q| branch_side(a, q, s) == Some(small));
        let desirers: Vec<PartId> = report
            .desires
            .iter()
            .filter(|&(&q, ds)| ds.contains(&s) && branch_side(a, q, s) == Some(1 - small))
            .map(|(&q, _)| q)
            .collect();
        let Some((&first, rest)) = desirers.split_first() else {
            ok = false;
            continue;
        };
        let Some(Some(sy)) = report.achieved.get(&first).copied() else {
            ok = false;
            continue;
        };
        if !rest.iter().all(|q| report.achieved[q] == Some(sy)) {
            ok = false;
            continue;
        }
        let y = class_by_sep[&sy];
        ok &= report.classes[y].reach >= 2 * c.reach;
        ok &= c.mass <= report.classes[y].mass;
        dominator.insert(ci, y);
    }
    for (&c1, &y1) in &dominator {
        for (&c2, &y2) in &dominator {
            if c1 >= c2 || report.classes[c1].molecule != report.classes[c2].molecule {
                continue;
            }
            let (r1, r2) = (report.classes[c1].reach, report.classes[c2].reach);
            if r1.max(r2) < 2 * r1.min(r2) {
                ok &= y1 != y2;
            }
        }
    }
    ok
}

/// Per-vertex reciprocal reach over a molecule of finite reach: the sum is
/// at most two thirds of the tiny vertex count plus a correction shrinking
/// quadratically in the molecule reach.
pub fn check_reach_sum(a: &AbstractSepTree, report: &MoleculeReport, molecule: usize) -> Result<bool> {
    let m = &report.molecules[molecule];
    let Some(lm) = m.reach.finite() else {
        return Err(Error::CheckFailed("reach sum needs a molecule of finite reach".into()));
    };
    let val = a.assign_valuation();
    let mut sum = Rat::from_integer(0.into());
    for &q in &m.atoms {
        let s = report.achieved[&q].expect("finite reach implies every atom achieves");
        let lv = separator_reach(a, &val, s);
        if lv == 0 {
            return Err(Error::CheckFailed("achieved separator of zero reach".into()));
        }
        sum += rat_int(tv::tiny_vertex_count(a, q) as i64) / rat_int(lv as i64);
    }
    let nm = rat_int(m.tiny_vertex_count as i64);
    Ok(sum <= rat(2, 3) * nm.clone() + nm / rat_int(3 * (lm * lm) as i64))
}

fn require_molecule(a: &AbstractSepTree, m: &Molecule) -> Result<()> {
    if !a.is_saturated() {
        return Err(Error::CheckFailed("molecule deletion needs a saturated tree".into()));
    }
    let report = MoleculeReport::compute(a);
    if report.molecules.iter().any(|x| x.atoms == m.atoms) {
        Ok(())
    } else {
        Err(Error::CheckFailed("not a molecule of this tree".into()))
    }
}

/// Edge number lost by deleting the molecule's tiny vertices, measured
/// under the tree's canonical valuation.
pub fn molecule_edge_number(a: &AbstractSepTree, m: &Molecule) -> Result<Rat> {
    require_molecule(a, m)?;
    let val = a.assign_valuation();
    let before = a.edge_number(&val, 0)?;
    let after = a.with_tiny_vertices_removed(&m.atoms).edge_number(&val, 0)?;
    Ok(before - after)
}

/// Deletes the molecule's tiny vertices and prunes technical data back to
/// legality. The result is valid and still saturated.
pub fn delete_molecule(a: &AbstractSepTree, m: &Molecule) -> Result<AbstractSepTree> {
    require_molecule(a, m)?;
    let mut t = a.with_tiny_vertices_removed(&m.atoms);
    t.cleanup_technical_data();
    t.validate()?;
    debug_assert!(t.is_saturated());
    Ok(t)
}

/// Bounds the deletion cost of one molecule: at most the per-vertex edge
/// rate times its tiny vertices, plus an error term of
/// `k^2 * max(log2(reach), 1) / (18 * reach^3)` when the reach is finite.
/// The logarithm comparison is exact.
pub fn check_molecule_removal(a: &AbstractSepTree, m: &Molecule) -> Result<bool> {
    let e = molecule_edge_number(a, m)?;
    let c = BoundConstants::new(a.k());
    let excess = e - c.beta * rat_int(m.tiny_vertex_count as i64);
    let zero = Rat::from_integer(0.into());
    let Some(l) = m.reach.finite() else {
        return Ok(excess <= zero);
    };
    if excess <= zero {
        return Ok(true);
    }
    let k2 = rat_int((a.k() * a.k()) as i64);
    if l == 1 {
        return Ok(excess <= k2 / rat_int(18));
    }
    let target = rat_int(18) * rat_int((l * l * l) as i64) * excess / k2;
    Ok(cmp_log2(l, target.numer(), target.denom()) != Ordering::Less)
}

/// Checks that final separators are pairwise distinct and unbalanced, and
/// that the branching error of each one pays for its molecule's removal
/// error term.
pub fn check_compensation(a: &AbstractSepTree) -> Result<bool> {
    if !a.is_saturated() {
        return Err(Error::CheckFailed("compensation needs a saturated tree".into()));
    }
    let report = MoleculeReport::compute(a);
    let val = a.assign_valuation();
    let finals: Vec<SepId> = report.molecules.iter().filter_map(|m| m.final_separator).collect();
    if finals.iter().collect::<BTreeSet<_>>().len() != finals.len() {
        return Ok(false);
    }
    for m in &report.molecules {
        let (Some(f), Some(l)) = (m.final_separator, m.reach.finite()) else { continue };
        if is_normally_balanced(a, f) {
            return Ok(false);
        }
        let gx = BoundConstants::new(a.k()).gamma * a.branching_error(&val, f)?;
        let k2 = rat_int((a.k() * a.k()) as i64);
        let ok = if l == 1 {
            gx >= k2 / rat_int(18)
        } else {
            let target = rat_int(18) * rat_int((l * l * l) as i64) * gx / k2;
            cmp_log2(l, target.numer(), target.denom()) != Ordering::Greater
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Grid form of the compensation inequality, free of the connectivity
/// parameter: a quarter of the squared-reach reciprocal beats the removal
/// error term for every reach up to the given limit.
pub fn check_compensation_grid(max: u64) -> bool {
    (1..=max).all(|l| {
        l == 1 || cmp_log2(l, &BigInt::from(3 * l), &BigInt::from(2u32)) != Ordering::Greater
    })
}

/// Deletes every molecule in turn and checks that the costs telescope, that
/// the leftover tree saturates to a normal tree of unchanged vertex and
/// edge numbers satisfying the refined bound, and that the original tree
/// satisfies the main bound.
pub fn check_composition(a: &AbstractSepTree) -> Result<bool> {
    if !a.is_saturated() || !a.is_real() {
        return Err(Error::CheckFailed("composition needs a real saturated tree".into()));
    }
    let val = a.assign_valuation();
    let report = MoleculeReport::compute(a);
    let e_full = a.edge_number(&val, 0)?;
    let mut cur = a.clone();
    let mut e_cur = e_full.clone();
    let mut total = Rat::from_integer(0.into());
    for m in &report.molecules {
        let next = cur.with_tiny_vertices_removed(&m.atoms);
        let e_next = next.edge_number(&val, 0)?;
        total += e_cur - e_next.clone();
        cur = next;
        e_cur = e_next;
    }
    if e_full - e_cur.clone() != total {
        return Ok(false);
    }
    debug_assert!(cur.technical_data().is_empty());
    let sat = cur.saturate()?;
    if sat.normal_atom_count() == 0 {
        return Ok(true);
    }
    Ok(sat.is_normal_tree()
        && sat.tree_vertex_number() == cur.vertex_numbers()[0]
        && sat.tree_edge_number()? == e_cur
        && sat.check_normal_saturated_bound()?
        && a.check_main_bound()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstract_tree::NumberLayout;
    use crate::rat_int;

    fn atom(n: u64) -> NumberLayout {
        NumberLayout::atom(n)
    }

    fn branch(s: u64, l: NumberLayout, r: NumberLayout) -> NumberLayout {
        NumberLayout::branch(s, l, r)
    }

    /// Two equal halves, each a tiny atom next to a normal one; both tiny
    /// atoms desire the root separator but only the right one achieves it.
    fn mirror() -> AbstractSepTree {
        let layout = branch(4, branch(4, atom(5), atom(6)), branch(4, atom(5), atom(6)));
        let t = AbstractSepTree::from_layout(4, &layout).unwrap();
        t.with_technical_data(&[(5, 0, 1)]).unwrap()
    }

    /// Three tiny atoms strung into one molecule of infinite reach plus a
    /// lone tiny atom achieving the root separator.
    fn figure() -> AbstractSepTree {
        let layout = branch(
            4,
            branch(
                4,
                branch(4, branch(4, atom(5), atom(6)), atom(6)),
                branch(4, branch(4, atom(4), atom(6)), branch(4, atom(4), atom(6))),
            ),
            branch(4, atom(5), atom(8)),
        );
        let t = AbstractSepTree::from_layout(4, &layout).unwrap();
        t.with_technical_data(&[(15, 0, 1)]).unwrap()
    }

    /// One molecule with two classes of different reach: the left tiny atom
    /// achieves the low separator, the right one rises to the root.
    fn two_class() -> AbstractSepTree {
        let layout = branch(
            4,
            branch(4, branch(4, atom(5), atom(6)), branch(4, atom(5), atom(6))),
            branch(4, atom(6), branch(4, atom(6), atom(6))),
        );
        let t = AbstractSepTree::from_layout(4, &layout).unwrap();
        t.with_technical_data(&[(3, 0, 1), (6, 1, 1)]).unwrap()
    }

    fn all_verdicts_hold(a: &AbstractSepTree, report: &MoleculeReport) {
        for (name, ok) in verify_section6(a, report) {
            assert!(ok, "{name} failed");
        }
    }

    #[test]
    fn mirror_report() {
        let t = mirror();
        let report = MoleculeReport::compute(&t);
        assert_eq!(report.desires[&2], vec![0]);
        assert_eq!(report.desires[&5], vec![0]);
        assert_eq!(report.achieved[&2], None);
        assert_eq!(report.achieved[&5], Some(0));
        assert_eq!(report.molecules.len(), 1);
        let m = &report.molecules[0];
        assert_eq!(m.atoms, vec![2, 5]);
        assert_eq!(m.final_separator, None);
        assert_eq!(m.reach, Reach::Infinite);
        assert_eq!(m.tiny_vertex_count, 2);
        assert!(m.class_intervals.is_empty());
        assert_eq!(report.classes.len(), 1);
        let c = &report.classes[0];
        assert_eq!((c.separator, c.reach, c.mass, c.molecule), (0, 1, 1, 0));
        assert_eq!(c.atoms, vec![5]);
        assert_eq!(c.interval, None);
        all_verdicts_hold(&t, &report);
    }

    #[test]
    fn mirror_edge_number_and_removal() {
        let t = mirror();
        let report = MoleculeReport::compute(&t);
        let m = &report.molecules[0];
        let e = molecule_edge_number(&t, m).unwrap();
        assert_eq!(e, rat_int(11));
        // Per-class loss: the achieving atom pays k*m + k*m/l - m^2/(2l) -
        // m/2 = 7 at its separator, the unachieving one k*m + C(m,2) = 4 in
        // its atom alone.
        assert_eq!(e, rat_int(7) + rat_int(4));
        assert!(check_molecule_removal(&t, m).unwrap());
        assert!(check_reach_sum(&t, &report, 0).is_err());
        let rest = delete_molecule(&t, m).unwrap();
        assert!(rest.technical_data().is_empty());
        assert_eq!(rest.part(2).atom_n, Some(4));
        assert_eq!(rest.part(5).atom_n, Some(4));
        assert!(rest.is_saturated());
        assert!(check_compensation(&t).unwrap());
        assert!(check_composition(&t).unwrap());
    }

    #[test]
    fn figure_desires_and_achieves() {
        let t = figure();
        let report = MoleculeReport::compute(&t);
        assert_eq!(report.desires[&4], vec![2, 1]);
        assert_eq!(report.desires[&9], vec![4, 1]);
        assert_eq!(report.desires[&12], vec![4]);
        assert_eq!(report.desires[&15], vec![0]);
        assert_eq!(report.achieved[&4], None);
        assert_eq!(report.achieved[&9], Some(1));
        assert_eq!(report.achieved[&12], Some(4));
        assert_eq!(report.achieved[&15], Some(0));
        assert_eq!(report.molecules.len(), 2);
        assert_eq!(report.molecules[0].atoms, vec![4, 9, 12]);
        assert_eq!(report.molecules[0].reach, Reach::Infinite);
        assert_eq!(report.molecules[0].tiny_vertex_count, 1);
        assert_eq!(report.molecules[1].atoms, vec![15]);
        assert_eq!(report.molecules[1].final_separator, Some(0));
        assert_eq!(report.molecules[1].reach, Reach::Finite(1));
        let seps: Vec<SepId> = report.classes.iter().map(|c| c.separator).collect();
        assert_eq!(seps, vec![0, 1, 4]);
        let reaches: Vec<u64> = report.classes.iter().map(|c| c.reach).collect();
        assert_eq!(reaches, vec![1, 2, 1]);
        assert_eq!(report.classes[0].interval, Some(0));
        assert_eq!(report.molecules[1].class_intervals, vec![vec![0]]);
        all_verdicts_hold(&t, &report);
    }

    #[test]
    fn figure_bounds() {
        let t = figure();
        let report = MoleculeReport::compute(&t);
        let e = molecule_edge_number(&t, &report.molecules[1]).unwrap();
        assert_eq!(e, rat_int(7));
        // The excess 7 - 37/6 = 5/6 fits under the reach-one error term
        // 16/18.
        assert!(check_molecule_removal(&t, &report.molecules[1]).unwrap());
        assert_eq!(molecule_edge_number(&t, &report.molecules[0]).unwrap(), rat_int(4));
        assert!(check_molecule_removal(&t, &report.molecules[0]).unwrap());
        assert!(check_reach_sum(&t, &report, 1).unwrap());
        assert!(check_compensation(&t).unwrap());
        assert!(check_composition(&t).unwrap());
    }

    #[test]
    fn two_class_report() {
        let t = two_class();
        let report = MoleculeReport::compute(&t);
        assert_eq!(report.molecules.len(), 1);
        let m = &report.molecules[0];
        assert_eq!(m.atoms, vec![3, 6]);
        assert_eq!(m.final_separator, Some(0));
        assert_eq!(m.reach, Reach::Finite(2));
        assert_eq!(m.tiny_vertex_count, 2);
        assert_eq!(report.desires[&3], vec![1, 0]);
        assert_eq!(report.desires[&6], vec![1]);
        assert_eq!(report.achieved[&3], Some(0));
        assert_eq!(report.achieved[&6], Some(1));
        let reaches: Vec<u64> = report.classes.iter().map(|c| c.reach).collect();
        assert_eq!(reaches, vec![2, 1]);
        assert_eq!(report.classes[0].interval, Some(0));
        assert_eq!(report.classes[1].interval, Some(1));
        assert_eq!(m.class_intervals, vec![vec![0], vec![1]]);
        all_verdicts_hold(&t, &report);
    }

    #[test]
    fn two_class_bounds() {
        let t = two_class();
        let report = MoleculeReport::compute(&t);
        let m = &report.molecules[0];
        assert_eq!(molecule_edge_number(&t, m).unwrap(), rat(49, 4));
        assert!(check_molecule_removal(&t, m).unwrap());
        assert!(check_reach_sum(&t, &report, 0).unwrap());
        assert!(check_compensation(&t).unwrap());
        assert!(check_composition(&t).unwrap());
    }

    #[test]
    fn normal_tree_is_trivial() {
        let layout = branch(2, atom(3), branch(2, atom(3), atom(4)));
        let t = AbstractSepTree::from_layout(2, &layout).unwrap();
        let report = MoleculeReport::compute(&t);
        assert!(report.molecules.is_empty());
        assert!(report.classes.is_empty());
        all_verdicts_hold(&t, &report);
        assert!(check_composition(&t).unwrap());
        assert!(check_compensation(&t).unwrap());
    }

    #[test]
    fn molecule_mismatch_is_rejected() {
        let t = mirror();
        let bogus = Molecule {
            atoms: vec![2],
            final_separator: None,
            reach: Reach::Infinite,
            tiny_vertex_count: 1,
            class_intervals: Vec::new(),
        };
        assert!(delete_molecule(&t, &bogus).is_err());
        let unsaturated =
            AbstractSepTree::from_layout(4, &branch(3, atom(5), atom(6))).unwrap();
        let report = MoleculeReport::compute(&unsaturated);
        assert_eq!(report.molecules.len(), 1);
        assert!(delete_molecule(&unsaturated, &report.molecules[0]).is_err());
    }

    #[test]
    fn compensation_grid_holds() {
        assert!(check_compensation_grid(64));
    }

    #[test]
    fn reach_orders_below_infinity() {
        assert!(Reach::Finite(3) < Reach::Finite(4));
        assert!(Reach::Finite(u64::MAX) < Reach::Infinite);
        assert_eq!(Reach::Finite(5).finite(), Some(5));
        assert_eq!(Reach::Infinite.finite(), None);
    }

    #[test]
    fn report_json_shape() {
        let t = mirror();
        let report = MoleculeReport::compute(&t);
        let json = report.to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["molecules"][0]["atoms"], serde_json::json!([2, 5]));
        assert_eq!(v["molecules"][0]["reach"], serde_json::Value::Null);
        assert_eq!(v["molecules"][0]["n_M"], 2);
        assert_eq!(v["classes"][0]["separator"], 0);
        assert_eq!(v["desires"]["2"], serde_json::json!([0]));
    }
}
