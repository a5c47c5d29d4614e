//! Preserved partitions and isomorphic feed-forward unfolding.
//!
//! A partition of the state set is preserved when every block maps wholly
//! into a single block under `next`. A nested sequence of preserved
//! partitions, each level halving every block of the level above, yields a
//! labelling in which bit `i` only depends on bits `1..=i`.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::ControlFlow;

use thiserror::Error;

use crate::automaton::{Automaton, StateId};
use crate::encoding::{Code, Encoding};
use crate::report::ValidationReport;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("blocks do not partition the automaton's {states} states")]
    PartitionMismatch { states: usize },
    #[error("block is not part of the partition")]
    BlockNotInPartition,
    #[error("{0} states is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("automaton does not allow an isomorphic feed-forward decomposition")]
    NoIsomorphicDecomposition,
    #[error("invalid nested sequence: {0}")]
    InvalidSequence(ValidationReport<SequenceViolation>),
}

/// Disjoint blocks of states. Blocks are kept sorted, and ordered by their
/// earliest member.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    blocks: Vec<Vec<StateId>>,
}

impl Partition {
    pub fn new(blocks: impl IntoIterator<Item = Vec<StateId>>) -> Self {
        let mut blocks: Vec<Vec<StateId>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        blocks.sort_by(|x, y| x.first().cmp(&y.first()).then_with(|| x.cmp(y)));
        Self { blocks }
    }

    /// From state names; unknown names are an error.
    pub fn from_names<S: AsRef<str>>(
        a: &Automaton,
        blocks: &[Vec<S>],
    ) -> Result<Self, crate::AutomatonError> {
        let blocks = blocks
            .iter()
            .map(|b| {
                b.iter()
                    .map(|s| a.lookup(s.as_ref()))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(blocks))
    }

    pub fn singletons(a: &Automaton) -> Self {
        Self::new(a.states().map(|s| vec![s]))
    }

    pub fn whole(a: &Automaton) -> Self {
        Self::new([a.states().collect()])
    }

    pub fn blocks(&self) -> &[Vec<StateId>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Blocks are nonempty, disjoint and cover exactly the states of `a`.
    pub fn partitions(&self, a: &Automaton) -> bool {
        let mut seen = vec![false; a.len()];
        for b in &self.blocks {
            if b.is_empty() {
                return false;
            }
            for s in b {
                match seen.get_mut(s.0) {
                    Some(flag) if !*flag => *flag = true,
                    _ => return false,
                }
            }
        }
        seen.into_iter().all(|f| f)
    }

    /// Block index of every state. Caller must ensure `partitions(a)`.
    fn block_index(&self, states: usize) -> Vec<usize> {
        let mut idx = vec![usize::MAX; states];
        for (i, b) in self.blocks.iter().enumerate() {
            for s in b {
                idx[s.0] = i;
            }
        }
        idx
    }

    fn check(&self, a: &Automaton) -> Result<Vec<usize>, PartitionError> {
        if !self.partitions(a) {
            return Err(PartitionError::PartitionMismatch { states: a.len() });
        }
        Ok(self.block_index(a.len()))
    }

    fn block_preserved(block: &[StateId], a: &Automaton, index: &[usize]) -> bool {
        let mut targets = block.iter().map(|&s| index[a.next(s).0]);
        match targets.next() {
            Some(first) => targets.all(|t| t == first),
            None => true,
        }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str("{")?;
            for (j, s) in b.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{}", s.0)?;
            }
            f.write_str("}")?;
        }
        f.write_str("}")
    }
}

pub fn is_preserved(p: &Partition, a: &Automaton) -> Result<bool, PartitionError> {
    let index = p.check(a)?;
    Ok(p.blocks.iter().all(|b| Partition::block_preserved(b, a, &index)))
}

/// Whether all successors of `block` land in one block of `p`.
pub fn is_preserved_block(block: &[StateId], p: &Partition, a: &Automaton) -> Result<bool, PartitionError> {
    let index = p.check(a)?;
    let mut sorted = block.to_vec();
    sorted.sort_unstable();
    if !p.blocks.contains(&sorted) {
        return Err(PartitionError::BlockNotInPartition);
    }
    Ok(Partition::block_preserved(&sorted, a, &index))
}

/// Chain of partitions `P1 .. Pn`, coarsest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NestedSequence {
    pub levels: Vec<Partition>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SequenceViolation {
    /// Level (1-based) does not partition the state set.
    NotAPartition { level: usize },
    /// A block is not inside a single block of the level above.
    NotRefinement { level: usize, block: Vec<StateId> },
    /// A parent block is not split into two equal halves.
    UnevenSplit { level: usize, parent: Vec<StateId> },
    /// A block's successors spread over several blocks.
    NotPreserved { level: usize, block: Vec<StateId> },
    /// The last level is not all singletons.
    BottomNotSingletons,
}

impl fmt::Display for SequenceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids = |b: &[StateId]| b.iter().map(|s| s.0).collect::<Vec<_>>();
        match self {
            SequenceViolation::NotAPartition { level } => {
                write!(f, "level {level} is not a partition of the states")
            }
            SequenceViolation::NotRefinement { level, block } => {
                write!(f, "level {level} block {:?} straddles parent blocks", ids(block))
            }
            SequenceViolation::UnevenSplit { level, parent } => {
                write!(f, "level {level} does not halve parent block {:?}", ids(parent))
            }
            SequenceViolation::NotPreserved { level, block } => {
                write!(f, "level {level} block {:?} is not preserved", ids(block))
            }
            SequenceViolation::BottomNotSingletons => f.write_str("last level is not made of singletons"),
        }
    }
}

/// Check refinement, even splits, singleton bottom and per-level
/// preservation. Empty report iff the sequence is valid for `a`.
pub fn validate_sequence(ns: &NestedSequence, a: &Automaton) -> ValidationReport<SequenceViolation> {
    let mut report = ValidationReport::new();
    let mut parent = Partition::whole(a);
    for (i, p) in ns.levels.iter().enumerate() {
        let level = i + 1;
        if !p.partitions(a) {
            report.push(SequenceViolation::NotAPartition { level });
            // nothing below can be checked against a broken level
            return report;
        }
        let parent_index = parent.block_index(a.len());
        let mut children: Vec<Vec<&Vec<StateId>>> = vec![Vec::new(); parent.len()];
        for b in &p.blocks {
            let owner = parent_index[b[0].0];
            if b.iter().any(|s| parent_index[s.0] != owner) {
                report.push(SequenceViolation::NotRefinement {
                    level,
                    block: b.clone(),
                });
            } else {
                children[owner].push(b);
            }
        }
        for (pb, kids) in parent.blocks.iter().zip(&children) {
            let halved = kids.len() == 2 && kids.iter().all(|k| 2 * k.len() == pb.len());
            if !halved {
                report.push(SequenceViolation::UnevenSplit {
                    level,
                    parent: pb.clone(),
                });
            }
        }
        let index = p.block_index(a.len());
        for b in &p.blocks {
            if !Partition::block_preserved(b, a, &index) {
                report.push(SequenceViolation::NotPreserved {
                    level,
                    block: b.clone(),
                });
            }
        }
        parent = p.clone();
    }
    if parent.blocks.iter().any(|b| b.len() != 1) {
        report.push(SequenceViolation::BottomNotSingletons);
    }
    report
}

/// Depth-first search for a nested sequence of even-split preserved
/// partitions.
///
/// Each level is found by assigning states, in declaration order, to the
/// first (0) or second (1) half of their parent block; the earliest member of
/// every parent block always goes to half 0. Assignments are checked
/// incrementally: all members of a half must send their successors into the
/// same half. The first complete chain in this order is returned; when a
/// level has no valid halving, the search backtracks into the level above.
pub fn find_nested_sequence(a: &Automaton) -> Result<NestedSequence, PartitionError> {
    let n = a.len();
    if !n.is_power_of_two() {
        return Err(PartitionError::NotPowerOfTwo(n));
    }
    let preds = a.predecessors();
    let mut levels = Vec::new();
    if descend(a, &preds, &Partition::whole(a), &mut levels) {
        Ok(NestedSequence { levels })
    } else {
        Err(PartitionError::NoIsomorphicDecomposition)
    }
}

fn descend(a: &Automaton, preds: &[Vec<StateId>], parent: &Partition, levels: &mut Vec<Partition>) -> bool {
    if parent.blocks.iter().all(|b| b.len() == 1) {
        return true;
    }
    let flow = for_each_halving(a, preds, parent, &mut |p| {
        levels.push(p.clone());
        if descend(a, preds, &p, levels) {
            ControlFlow::Break(())
        } else {
            levels.pop();
            ControlFlow::Continue(())
        }
    });
    flow.is_break()
}

struct HalvingSearch<'a> {
    a: &'a Automaton,
    preds: &'a [Vec<StateId>],
    parent_of: Vec<usize>,
    half_size: Vec<usize>,
    leader: Vec<bool>,
    side: Vec<Option<u8>>,
    count: Vec<[usize; 2]>,
    /// Side that successors of each (parent block, side) class must take.
    target: Vec<[Option<u8>; 2]>,
}

/// Enumerate every preserved partition that halves each block of the
/// preserved partition `parent`, calling `visit` on each.
pub fn for_each_halving(
    a: &Automaton,
    preds: &[Vec<StateId>],
    parent: &Partition,
    visit: &mut dyn FnMut(Partition) -> ControlFlow<()>,
) -> ControlFlow<()> {
    if parent.blocks.iter().any(|b| b.len() % 2 != 0) {
        return ControlFlow::Continue(());
    }
    let mut leader = vec![false; a.len()];
    for b in &parent.blocks {
        leader[b[0].0] = true;
    }
    let mut search = HalvingSearch {
        a,
        preds,
        parent_of: parent.block_index(a.len()),
        half_size: parent.blocks.iter().map(|b| b.len() / 2).collect(),
        leader,
        side: vec![None; a.len()],
        count: vec![[0, 0]; parent.len()],
        target: vec![[None, None]; parent.len()],
    };
    search.run(0, visit)
}

impl HalvingSearch<'_> {
    fn run(&mut self, x: usize, visit: &mut dyn FnMut(Partition) -> ControlFlow<()>) -> ControlFlow<()> {
        if x == self.a.len() {
            return visit(self.partition());
        }
        let sides: &[u8] = if self.leader[x] { &[0] } else { &[0, 1] };
        for &s in sides {
            let mut undo = Vec::new();
            if self.try_assign(StateId(x), s, &mut undo) {
                self.run(x + 1, visit)?;
            }
            self.unassign(StateId(x), s, undo);
        }
        ControlFlow::Continue(())
    }

    fn try_assign(&mut self, x: StateId, s: u8, undo: &mut Vec<(usize, u8)>) -> bool {
        let b = self.parent_of[x.0];
        if self.count[b][s as usize] == self.half_size[b] {
            // marks the slot so unassign can tell nothing was counted
            self.side[x.0] = None;
            return false;
        }
        self.side[x.0] = Some(s);
        self.count[b][s as usize] += 1;
        // successors of x's class must share a side
        if let Some(t) = self.side[self.a.next(x).0] {
            if !self.require(b, s, t, undo) {
                return false;
            }
        }
        // x is the successor of each assigned predecessor
        for &y in self.preds[x.0].iter() {
            if let Some(sy) = self.side[y.0] {
                let by = self.parent_of[y.0];
                if !self.require(by, sy, s, undo) {
                    return false;
                }
            }
        }
        true
    }

    fn require(&mut self, block: usize, side: u8, t: u8, undo: &mut Vec<(usize, u8)>) -> bool {
        match self.target[block][side as usize] {
            Some(existing) => existing == t,
            None => {
                self.target[block][side as usize] = Some(t);
                undo.push((block, side));
                true
            }
        }
    }

    fn unassign(&mut self, x: StateId, s: u8, undo: Vec<(usize, u8)>) {
        if self.side[x.0] == Some(s) {
            self.count[self.parent_of[x.0]][s as usize] -= 1;
        }
        self.side[x.0] = None;
        for (block, side) in undo {
            self.target[block][side as usize] = None;
        }
    }

    fn partition(&self) -> Partition {
        let mut blocks = vec![Vec::new(); 2 * self.half_size.len()];
        for (x, s) in self.side.iter().enumerate() {
            let s = s.expect("complete assignment") as usize;
            blocks[2 * self.parent_of[x] + s].push(StateId(x));
        }
        Partition::new(blocks)
    }
}

/// Hierarchical labels: bit `i` of a state says which half of its level-`i`
/// parent block holds it, 0 for the half containing the parent's earliest
/// member.
pub fn encoding_from_sequence(ns: &NestedSequence) -> Result<Encoding, PartitionError> {
    let invalid = |v: SequenceViolation| {
        let mut report = ValidationReport::new();
        report.push(v);
        PartitionError::InvalidSequence(report)
    };
    let n = ns
        .levels
        .last()
        .map_or(1, |p| p.blocks.iter().map(Vec::len).sum());
    let width = ns.levels.len() as u32;
    let mut codes = vec![Code(0); n];
    let mut parent_index = vec![0usize; n];
    for (i, p) in ns.levels.iter().enumerate() {
        let level = i + 1;
        let covered: BTreeSet<StateId> = p.blocks.iter().flatten().copied().collect();
        let exact = covered.len() == n
            && p.blocks.iter().map(Vec::len).sum::<usize>() == n
            && covered.iter().enumerate().all(|(k, s)| s.0 == k)
            && p.blocks.iter().all(|b| !b.is_empty());
        if !exact {
            return Err(invalid(SequenceViolation::NotAPartition { level }));
        }
        // blocks are ordered by earliest member, so the first child seen for
        // each parent is the one holding the parent's earliest member
        let mut children = vec![0usize; n];
        for b in &p.blocks {
            let parent = parent_index[b[0].0];
            if b.iter().any(|s| parent_index[s.0] != parent) {
                return Err(invalid(SequenceViolation::NotRefinement {
                    level,
                    block: b.clone(),
                }));
            }
            let bit = children[parent];
            if bit > 1 {
                let members = (0..n)
                    .filter(|&s| parent_index[s] == parent)
                    .map(StateId)
                    .collect();
                return Err(invalid(SequenceViolation::UnevenSplit {
                    level,
                    parent: members,
                }));
            }
            children[parent] += 1;
            for s in b {
                codes[s.0] = codes[s.0].with_bit(i as u32, bit == 1);
            }
        }
        parent_index = p.block_index(n);
    }
    Encoding::from_codes(width, codes).map_err(|_| invalid(SequenceViolation::BottomNotSingletons))
}

/// The chain of partitions an encoding induces: level `i` groups states that
/// agree on bits `1..=i`. The encoding is hierarchical exactly when
/// [`validate_sequence`] accepts the result.
pub fn sequence_from_encoding(e: &Encoding) -> NestedSequence {
    let levels = (1..=e.width())
        .map(|i| {
            let mask = (1u32 << i) - 1;
            let mut groups: alloc::collections::BTreeMap<u32, Vec<StateId>> = Default::default();
            for (s, c) in e.codes().iter().enumerate() {
                groups.entry(c.0 & mask).or_default().push(StateId(s));
            }
            Partition::new(groups.into_values())
        })
        .collect();
    NestedSequence { levels }
}
