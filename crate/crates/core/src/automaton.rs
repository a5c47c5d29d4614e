//! Deterministic autonomous finite-state automata.
//!
//! An automaton has a single implicit input (the clock tick), so its dynamics
//! are a total function `next: S -> S`. Output labels are carried along for
//! reporting and isomorphism checks but never influence the dynamics.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::report::ValidationReport;

/// Index of a state in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

impl StateId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Automaton as written in an input file, before any checks.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FsaDescription {
    pub states: Vec<String>,
    pub next: BTreeMap<String, String>,
    pub outputs: Option<BTreeMap<String, String>>,
    pub initial: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoStates,
    DuplicateState(String),
    MissingTransition(String),
    UnknownSource(String),
    DanglingTarget { from: String, to: String },
    UnknownOutputState(String),
    UnknownInitial(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoStates => f.write_str("automaton has no states"),
            Violation::DuplicateState(s) => write!(f, "state {s:?} declared more than once"),
            Violation::MissingTransition(s) => write!(f, "state {s:?} has no successor"),
            Violation::UnknownSource(s) => {
                write!(f, "transition from undeclared state {s:?}")
            }
            Violation::DanglingTarget { from, to } => {
                write!(f, "successor {to:?} of {from:?} is not a declared state")
            }
            Violation::UnknownOutputState(s) => {
                write!(f, "output label for undeclared state {s:?}")
            }
            Violation::UnknownInitial(s) => write!(f, "initial state {s:?} is not declared"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomatonError {
    #[error("invalid automaton: {0}")]
    Invalid(ValidationReport<Violation>),
    #[error("unknown state {0:?}")]
    UnknownState(String),
}

/// Check every structural invariant of a description and report all
/// violations at once.
pub fn validate(desc: &FsaDescription) -> ValidationReport<Violation> {
    let mut report = ValidationReport::new();
    if desc.states.is_empty() {
        report.push(Violation::NoStates);
    }
    let mut seen = BTreeSet::new();
    for s in &desc.states {
        if !seen.insert(s.as_str()) {
            report.push(Violation::DuplicateState(s.clone()));
        }
    }
    for s in &desc.states {
        if !desc.next.contains_key(s) && seen.contains(s.as_str()) {
            report.push(Violation::MissingTransition(s.clone()));
            // report each missing state once even when duplicated
            seen.remove(s.as_str());
        }
    }
    let declared: BTreeSet<&str> = desc.states.iter().map(String::as_str).collect();
    for (from, to) in &desc.next {
        if !declared.contains(from.as_str()) {
            report.push(Violation::UnknownSource(from.clone()));
        }
        if !declared.contains(to.as_str()) {
            report.push(Violation::DanglingTarget {
                from: from.clone(),
                to: to.clone(),
            });
        }
    }
    if let Some(outputs) = &desc.outputs {
        for s in outputs.keys() {
            if !declared.contains(s.as_str()) {
                report.push(Violation::UnknownOutputState(s.clone()));
            }
        }
    }
    if let Some(init) = &desc.initial {
        if !declared.contains(init.as_str()) {
            report.push(Violation::UnknownInitial(init.clone()));
        }
    }
    report
}

/// A validated automaton. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automaton {
    names: Vec<String>,
    index: BTreeMap<String, StateId>,
    next: Vec<StateId>,
    outputs: Option<Vec<Option<String>>>,
    initial: Option<StateId>,
}

impl Automaton {
    pub fn new(desc: &FsaDescription) -> Result<Self, AutomatonError> {
        let report = validate(desc);
        if !report.is_valid() {
            return Err(AutomatonError::Invalid(report));
        }
        let index: BTreeMap<String, StateId> = desc
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), StateId(i)))
            .collect();
        let next = desc.states.iter().map(|s| index[&desc.next[s]]).collect();
        let outputs = desc.outputs.as_ref().map(|outs| {
            desc.states
                .iter()
                .map(|s| outs.get(s).cloned())
                .collect::<Vec<_>>()
        });
        let initial = desc.initial.as_ref().map(|s| index[s]);
        Ok(Self {
            names: desc.states.clone(),
            index,
            next,
            outputs,
            initial,
        })
    }

    /// Build from state names and successor indices.
    pub fn from_successors<S: Into<String>>(
        names: impl IntoIterator<Item = S>,
        next: &[usize],
    ) -> Result<Self, AutomatonError> {
        let states: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut map = BTreeMap::new();
        for (i, s) in states.iter().enumerate() {
            if let Some(&j) = next.get(i) {
                let target = states.get(j).cloned().unwrap_or_else(|| alloc::format!("#{j}"));
                map.insert(s.clone(), target);
            }
        }
        Self::new(&FsaDescription {
            states,
            next: map,
            outputs: None,
            initial: None,
        })
    }

    /// A cycle `s0 -> s1 -> ... -> s(n-1) -> s0` with generated names.
    pub fn cycle(len: usize) -> Self {
        let names: Vec<String> = (0..len).map(|i| alloc::format!("s{i}")).collect();
        let next: Vec<usize> = (0..len).map(|i| (i + 1) % len).collect();
        Self::from_successors(names, &next).expect("cycle is well formed")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn states(&self) -> impl ExactSizeIterator<Item = StateId> + '_ {
        (0..self.names.len()).map(StateId)
    }

    pub fn name(&self, s: StateId) -> &str {
        &self.names[s.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn id(&self, name: &str) -> Option<StateId> {
        self.index.get(name).copied()
    }

    pub fn lookup(&self, name: &str) -> Result<StateId, AutomatonError> {
        self.id(name)
            .ok_or_else(|| AutomatonError::UnknownState(name.into()))
    }

    pub fn next(&self, s: StateId) -> StateId {
        self.next[s.0]
    }

    pub fn successors(&self) -> &[StateId] {
        &self.next
    }

    pub fn output(&self, s: StateId) -> Option<&str> {
        self.outputs.as_ref()?[s.0].as_deref()
    }

    pub fn has_outputs(&self) -> bool {
        self.outputs.is_some()
    }

    pub fn initial(&self) -> Option<StateId> {
        self.initial
    }

    /// Back to the file-level description.
    pub fn description(&self) -> FsaDescription {
        FsaDescription {
            states: self.names.clone(),
            next: self
                .states()
                .map(|s| (self.names[s.0].clone(), self.names[self.next(s).0].clone()))
                .collect(),
            outputs: self.outputs.as_ref().map(|outs| {
                self.names
                    .iter()
                    .zip(outs)
                    .filter_map(|(n, o)| o.clone().map(|o| (n.clone(), o)))
                    .collect()
            }),
            initial: self.initial.map(|s| self.names[s.0].clone()),
        }
    }

    /// `steps + 1` states starting at `start`.
    pub fn orbit(&self, start: &str, steps: usize) -> Result<Vec<StateId>, AutomatonError> {
        let mut s = self.lookup(start)?;
        let mut out = Vec::with_capacity(steps + 1);
        out.push(s);
        for _ in 0..steps {
            s = self.next(s);
            out.push(s);
        }
        Ok(out)
    }

    pub fn predecessors(&self) -> Vec<Vec<StateId>> {
        let mut preds = vec![Vec::new(); self.len()];
        for s in self.states() {
            preds[self.next(s).0].push(s);
        }
        preds
    }
}

/// Orbit signature of each state: (length of the cycle it falls into,
/// steps until it reaches that cycle, in-degree). Conjugate states share it.
fn signatures(a: &Automaton) -> Vec<(usize, usize, usize)> {
    let n = a.len();
    let mut indeg = vec![0usize; n];
    for s in a.states() {
        indeg[a.next(s).0] += 1;
    }
    a.states()
        .map(|s| {
            let mut first_seen = vec![usize::MAX; n];
            let mut cur = s;
            let mut t = 0;
            while first_seen[cur.0] == usize::MAX {
                first_seen[cur.0] = t;
                cur = a.next(cur);
                t += 1;
            }
            let tail = first_seen[cur.0];
            (t - tail, tail, indeg[s.0])
        })
        .collect()
}

/// Find a bijection `h` with `h(next_a(s)) = next_b(h(s))` for all `s`,
/// matching output labels when both automata carry them.
///
/// Returns the lexicographically smallest such bijection, read as the
/// sequence `h(s0), h(s1), ...` over the states of `a` in declaration order,
/// with `b`'s states compared by their declaration order.
pub fn are_isomorphic(a: &Automaton, b: &Automaton) -> Option<Vec<StateId>> {
    if a.len() != b.len() {
        return None;
    }
    let sig_a = signatures(a);
    let sig_b = signatures(b);
    let mut sorted_a = sig_a.clone();
    let mut sorted_b = sig_b.clone();
    sorted_a.sort_unstable();
    sorted_b.sort_unstable();
    if sorted_a != sorted_b {
        return None;
    }
    let check_outputs = a.has_outputs() && b.has_outputs();
    let compatible =
        |x: StateId, y: StateId| sig_a[x.0] == sig_b[y.0] && (!check_outputs || a.output(x) == b.output(y));

    let mut map: Vec<Option<StateId>> = vec![None; a.len()];
    let mut used = vec![false; b.len()];
    if search_bijection(a, b, &compatible, &mut map, &mut used, 0) {
        Some(map.into_iter().map(|m| m.expect("complete")).collect())
    } else {
        None
    }
}

fn search_bijection(
    a: &Automaton,
    b: &Automaton,
    compatible: &dyn Fn(StateId, StateId) -> bool,
    map: &mut [Option<StateId>],
    used: &mut [bool],
    from: usize,
) -> bool {
    let Some(x) = (from..a.len()).find(|&i| map[i].is_none()) else {
        return true;
    };
    for y in b.states() {
        if used[y.0] || !compatible(StateId(x), y) {
            continue;
        }
        let mut trail = Vec::new();
        if assign(a, b, compatible, map, used, StateId(x), y, &mut trail)
            && search_bijection(a, b, compatible, map, used, x + 1)
        {
            return true;
        }
        for s in trail {
            if let Some(t) = map[s.0].take() {
                used[t.0] = false;
            }
        }
    }
    false
}

/// Assign `x -> y` and propagate forward along `next`. Records newly set
/// entries in `trail` so the caller can undo them.
#[allow(clippy::too_many_arguments)]
fn assign(
    a: &Automaton,
    b: &Automaton,
    compatible: &dyn Fn(StateId, StateId) -> bool,
    map: &mut [Option<StateId>],
    used: &mut [bool],
    mut x: StateId,
    mut y: StateId,
    trail: &mut Vec<StateId>,
) -> bool {
    loop {
        match map[x.0] {
            Some(existing) => return existing == y,
            None => {
                if used[y.0] || !compatible(x, y) {
                    return false;
                }
                map[x.0] = Some(y);
                used[y.0] = true;
                trail.push(x);
            }
        }
        x = a.next(x);
        y = b.next(y);
    }
}
