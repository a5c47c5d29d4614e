//! Integrated information (big phi, IIT 3.0) of deterministic binary
//! networks given as state-by-node transition matrices.
//!
//! The computation follows the reference implementation's defaults: earth
//! mover's distance with Hamming ground cost, bipartitions of mechanism and
//! purview, unidirectional system cuts, and rounding of every small-phi and
//! cause-effect distance to six decimals. The whole node set is evaluated as
//! one system; there is no complex search.
//!
//! States are little-endian: bit `k` of a state index is node `k`.

mod ces;
pub mod emd;
mod repertoire;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::{self, Write as _};

use thiserror::Error;

use crate::encoding::{dependency_graph, Code, Csa};

pub use repertoire::Direction;

/// Largest supported node count.
pub const MAX_NODES: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IitError {
    #[error("a network needs at least one node")]
    NoNodes,
    #[error("{0} nodes exceed the supported maximum of 5")]
    TooManyNodes(usize),
    #[error("expected {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("row {row} has {found} entries, expected {expected}")]
    RowWidth {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("entry ({row}, {node}) = {value} is not a probability")]
    NotAProbability { row: usize, node: usize, value: f64 },
    #[error("connectivity matrix must be {0} x {0}")]
    CmShape(usize),
    #[error("update table has don't-care codes; phi needs every code to be a state")]
    NonIsomorphicCsa,
    #[error("state {state} is out of range for {nodes} nodes")]
    StateOutOfRange { state: u32, nodes: usize },
}

/// State-by-node transition matrix with a connectivity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Tpm {
    nodes: usize,
    rows: Vec<Vec<f64>>,
    /// `inputs[j]`: mask of nodes with an edge into `j`.
    inputs: Vec<u32>,
}

impl Tpm {
    /// `rows[x][j]` is the probability node `j` is on after state `x`.
    /// `cm[i][j]` marks an edge from `i` to `j`; `None` means fully connected.
    pub fn new(rows: Vec<Vec<f64>>, cm: Option<Vec<Vec<bool>>>) -> Result<Self, IitError> {
        let found = rows.len();
        if found <= 1 {
            return Err(IitError::NoNodes);
        }
        if !found.is_power_of_two() {
            return Err(IitError::RowCount {
                expected: found.next_power_of_two(),
                found,
            });
        }
        let nodes = found.trailing_zeros() as usize;
        if nodes > MAX_NODES {
            return Err(IitError::TooManyNodes(nodes));
        }
        for (row, r) in rows.iter().enumerate() {
            if r.len() != nodes {
                return Err(IitError::RowWidth {
                    row,
                    expected: nodes,
                    found: r.len(),
                });
            }
            for (node, &value) in r.iter().enumerate() {
                if !(0.0..=1.0).contains(&value) {
                    return Err(IitError::NotAProbability { row, node, value });
                }
            }
        }
        let all = (1u32 << nodes) - 1;
        let inputs = match cm {
            None => vec![all; nodes],
            Some(cm) => {
                if cm.len() != nodes || cm.iter().any(|r| r.len() != nodes) {
                    return Err(IitError::CmShape(nodes));
                }
                (0..nodes)
                    .map(|j| (0..nodes).filter(|&i| cm[i][j]).fold(0, |m, i| m | 1 << i))
                    .collect()
            }
        };
        Ok(Self { nodes, rows, inputs })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, state: u32) -> &[f64] {
        &self.rows[state as usize]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.inputs[to] & 1 << from != 0
    }

    pub fn inputs_of(&self, node: usize) -> u32 {
        self.inputs[node]
    }

    /// `cm[i][j]` is true when node `i` feeds node `j`.
    pub fn cm(&self) -> Vec<Vec<bool>> {
        (0..self.nodes)
            .map(|i| (0..self.nodes).map(|j| self.has_edge(i, j)).collect())
            .collect()
    }

    pub fn is_deterministic(&self) -> bool {
        self.rows.iter().flatten().all(|&p| p == 0.0 || p == 1.0)
    }

    /// Every node reaches every other node along connectivity edges.
    pub fn is_strongly_connected(&self) -> bool {
        let n = self.nodes;
        let all = (1u32 << n) - 1;
        let closure = |forward: bool| {
            let mut seen = 1u32;
            let mut frontier = 1u32;
            while frontier != 0 {
                let mut next = 0;
                for v in 0..n {
                    if frontier & 1 << v == 0 {
                        continue;
                    }
                    for w in 0..n {
                        let edge = if forward {
                            self.has_edge(v, w)
                        } else {
                            self.has_edge(w, v)
                        };
                        if edge {
                            next |= 1 << w;
                        }
                    }
                }
                frontier = next & !seen;
                seen |= next;
            }
            seen
        };
        closure(true) == all && closure(false) == all
    }
}

/// Deterministic node-level matrix of an update table whose care set is the
/// whole code space. Connectivity comes from the minimal supports.
pub fn tpm_from_csa(c: &Csa) -> Result<Tpm, IitError> {
    if !c.is_isomorphic() {
        return Err(IitError::NonIsomorphicCsa);
    }
    let n = c.width() as usize;
    if n == 0 {
        return Err(IitError::NoNodes);
    }
    if n > MAX_NODES {
        return Err(IitError::TooManyNodes(n));
    }
    let rows = c
        .table()
        .iter()
        .map(|next| {
            let next = next.expect("isomorphic table");
            (0..n as u32)
                .map(|k| if next.bit(k) { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    let g = dependency_graph(c);
    let cm = (0..n as u32)
        .map(|i| (0..n as u32).map(|j| g.has_edge(i, j)).collect())
        .collect();
    Tpm::new(rows, Some(cm))
}

/// A unidirectional cut severing every edge from `from` to `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SystemCut {
    pub from: u32,
    pub to: u32,
}

impl SystemCut {
    pub fn severs(&self, from: usize, to: usize) -> bool {
        self.from & 1 << from != 0 && self.to & 1 << to != 0
    }

    /// Whether the mechanism has nodes on both sides.
    pub fn splits(&self, mechanism: u32) -> bool {
        mechanism & self.from != 0 && mechanism & self.to != 0
    }
}

impl fmt::Display for SystemCut {
    /// `Q1 -> Q2,Q3`: connections from the left set into the right set are cut.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |f: &mut fmt::Formatter<'_>, mask: u32| -> fmt::Result {
            let mut first = true;
            for k in 0..32 {
                if mask & 1 << k != 0 {
                    if !first {
                        f.write_char(',')?;
                    }
                    write!(f, "Q{}", k + 1)?;
                    first = false;
                }
            }
            Ok(())
        };
        side(f, self.from)?;
        f.write_str(" -> ")?;
        side(f, self.to)
    }
}

/// Nontrivial unidirectional bipartitions of `n` nodes, in the reference
/// implementation's enumeration order.
pub fn system_cuts(n: usize) -> Vec<SystemCut> {
    let halves = bipartition_indices(n);
    let mut directed: Vec<(u32, u32)> = halves.clone();
    directed.extend(halves.iter().rev().map(|&(a, b)| (b, a)));
    if directed.len() < 2 {
        return Vec::new();
    }
    directed[1..directed.len() - 1]
        .iter()
        .map(|&(from, to)| SystemCut { from, to })
        .collect()
}

/// Undirected bipartitions of positions `0..n` as `(part1, part0)` masks.
fn bipartition_indices(n: usize) -> Vec<(u32, u32)> {
    if n == 0 {
        return Vec::new();
    }
    (0..1u32 << (n - 1))
        .map(|i| {
            let ones = i & ((1 << n) - 1);
            let zeros = !i & ((1 << n) - 1);
            (ones, zeros)
        })
        .collect()
}

/// The same bipartitions applied to the members of `mask`.
pub(crate) fn bipartitions_of(mask: u32) -> Vec<(u32, u32)> {
    let k = mask.count_ones() as usize;
    bipartition_indices(k)
        .into_iter()
        .map(|(a, b)| (scatter(a, mask), scatter(b, mask)))
        .collect()
}

pub(crate) fn directed_bipartitions_of(mask: u32) -> Vec<(u32, u32)> {
    let undirected = bipartitions_of(mask);
    let mut out = undirected.clone();
    out.extend(undirected.iter().rev().map(|&(a, b)| (b, a)));
    out
}

/// Nonempty subsets of `0..n` by size, then lexicographically.
pub(crate) fn powerset(n: usize, include_empty: bool) -> Vec<u32> {
    let mut out = Vec::with_capacity(1 << n);
    if include_empty {
        out.push(0);
    }
    for r in 1..=n {
        combinations(n, r, 0, 0, &mut out);
    }
    out
}

fn combinations(n: usize, r: usize, start: usize, acc: u32, out: &mut Vec<u32>) {
    if r == 0 {
        out.push(acc);
        return;
    }
    for i in start..=n - r {
        combinations(n, r - 1, i + 1, acc | 1 << i, out);
    }
}

/// Deposit the low bits of `compact` into the set positions of `mask`.
pub(crate) fn scatter(compact: u32, mask: u32) -> u32 {
    let mut out = 0;
    let mut m = mask;
    let mut k = 0;
    while m != 0 {
        let bit = m & m.wrapping_neg();
        if compact & 1 << k != 0 {
            out |= bit;
        }
        m &= m - 1;
        k += 1;
    }
    out
}

/// Extract the bits of `x` at the set positions of `mask` into low bits.
pub(crate) fn gather(x: u32, mask: u32) -> u32 {
    let mut out = 0;
    let mut m = mask;
    let mut k = 0;
    while m != 0 {
        let bit = m & m.wrapping_neg();
        if x & bit != 0 {
            out |= 1 << k;
        }
        m &= m - 1;
        k += 1;
    }
    out
}

/// Round half-to-even on the exact binary value, to six decimals.
pub(crate) fn round6(x: f64) -> f64 {
    let mut s = String::new();
    let _ = write!(s, "{x:.6}");
    s.parse().unwrap_or(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhiConfig {
    /// Return zero without evaluating cuts when the connectivity matrix is
    /// not strongly connected. Such a system always has a cut that severs no
    /// edge, so this only saves time.
    pub skip_disconnected: bool,
}

impl Default for PhiConfig {
    fn default() -> Self {
        Self {
            skip_disconnected: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhiResult {
    pub state: Code,
    pub big_phi: f64,
    /// Minimizing cut; `None` when phi was settled without evaluating cuts.
    pub mip: Option<SystemCut>,
    /// Mechanism masks with their small phi, for the unpartitioned
    /// structure. Empty when cuts were not evaluated.
    pub concepts: Vec<(u32, f64)>,
}

pub fn compute_phi(t: &Tpm, state: Code) -> Result<PhiResult, IitError> {
    compute_phi_with(t, state, PhiConfig::default())
}

pub fn compute_phi_with(t: &Tpm, state: Code, config: PhiConfig) -> Result<PhiResult, IitError> {
    let n = t.nodes();
    if state.0 >> n != 0 {
        return Err(IitError::StateOutOfRange {
            state: state.0,
            nodes: n,
        });
    }
    let settled = PhiResult {
        state,
        big_phi: 0.0,
        mip: None,
        concepts: Vec::new(),
    };
    // a single node never has phi, with or without a self-loop
    if n == 1 || (config.skip_disconnected && !t.is_strongly_connected()) {
        return Ok(settled);
    }
    let whole = repertoire::System::new(t, state.0, None);
    let (unpartitioned, inherited) = ces::cause_effect_structure(&whole, &powerset(n, false), None, None);
    if unpartitioned.is_empty() {
        return Ok(settled);
    }
    let concepts: Vec<(u32, f64)> = unpartitioned.iter().map(|c| (c.mechanism, c.phi)).collect();
    let mut best: Option<(f64, SystemCut)> = None;
    for cut in system_cuts(n) {
        let cut_system = repertoire::System::new(t, state.0, Some(cut));
        let mechanisms: Vec<u32> = powerset(n, false)
            .into_iter()
            .filter(|&m| cut.splits(m) || unpartitioned.iter().any(|c| c.mechanism == m))
            .collect();
        let (partitioned, _) =
            ces::cause_effect_structure(&cut_system, &mechanisms, Some(&inherited), Some(&cut));
        let phi = ces::ces_distance(&unpartitioned, &whole, &partitioned, &cut_system);
        if phi == 0.0 {
            best = Some((0.0, cut));
            break;
        }
        if best.is_none_or(|(b, _)| phi < b) {
            best = Some((phi, cut));
        }
    }
    let (big_phi, cut) = best.expect("at least two nodes give at least one cut");
    Ok(PhiResult {
        state,
        big_phi,
        mip: Some(cut),
        concepts,
    })
}

/// Phi for every state, in state-index order.
pub fn phi_all_states(t: &Tpm) -> Result<Vec<PhiResult>, IitError> {
    (0..1u32 << t.nodes()).map(|s| compute_phi(t, Code(s))).collect()
}

/// Cause repertoire of `mechanism` over `purview` (node masks) in `state`,
/// indexed by the little-endian state of the purview nodes.
pub fn cause_repertoire(t: &Tpm, state: Code, mechanism: u32, purview: u32) -> Vec<f64> {
    repertoire::System::new(t, state.0, None).repertoire(Direction::Cause, mechanism, purview)
}

/// Effect repertoire, indexed like [`cause_repertoire`].
pub fn effect_repertoire(t: &Tpm, state: Code, mechanism: u32, purview: u32) -> Vec<f64> {
    repertoire::System::new(t, state.0, None).repertoire(Direction::Effect, mechanism, purview)
}
