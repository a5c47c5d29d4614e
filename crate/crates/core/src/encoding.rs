//! Binary labellings of automaton states and the per-bit dynamics they induce.
//!
//! Bit `k` of a [`Code`] is component `Q(k+1)`. When printed, the leftmost
//! character is `Q1`, so the code with only `Q1` set prints as `100`. The
//! numeric value of a code doubles as its row index in a little-endian
//! state-by-node table (`Q1` varies fastest).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::{self, Write as _};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::automaton::{Automaton, StateId};

/// Widest encoding supported (tables are dense over `2^width` codes).
pub const MAX_WIDTH: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Code(pub u32);

impl Code {
    pub fn bit(self, k: u32) -> bool {
        (self.0 >> k) & 1 == 1
    }

    pub fn with_bit(self, k: u32, value: bool) -> Code {
        if value {
            Code(self.0 | (1 << k))
        } else {
            Code(self.0 & !(1 << k))
        }
    }

    /// Parse a printed code such as `"110"` (leftmost character is `Q1`).
    /// Returns the code and its width.
    pub fn parse(text: &str) -> Option<(Code, u32)> {
        let width = u32::try_from(text.len()).ok()?;
        if width > MAX_WIDTH {
            return None;
        }
        let mut value = 0;
        for (k, c) in text.chars().enumerate() {
            match c {
                '0' => {}
                '1' => value |= 1 << k,
                _ => return None,
            }
        }
        Some((Code(value), width))
    }

    pub fn display(self, width: u32) -> CodeDisplay {
        CodeDisplay { code: self, width }
    }

    pub fn render(self, width: u32) -> String {
        let mut s = String::with_capacity(width as usize);
        let _ = write!(s, "{}", self.display(width));
        s
    }
}

pub struct CodeDisplay {
    code: Code,
    width: u32,
}

impl fmt::Display for CodeDisplay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.width {
            f.write_char(if self.code.bit(k) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodingError {
    #[error("no label for state {0:?}")]
    MissingState(String),
    #[error("label given for unknown state {0:?}")]
    UnknownState(String),
    #[error("label {0:?} is not a binary string of at most 16 bits")]
    InvalidLabel(String),
    #[error("label of {state:?} has width {found}, expected {expected}")]
    WidthMismatch {
        state: String,
        expected: u32,
        found: u32,
    },
    #[error("states {first:?} and {second:?} share label {label}")]
    DuplicateLabel {
        label: String,
        first: String,
        second: String,
    },
    #[error("{states} states do not fit in {width} bits")]
    InsufficientWidth { states: usize, width: u32 },
    #[error("fixed labels conflict: {0}")]
    ConflictingFixedLabels(String),
    #[error("encoding covers {encoded} states but the automaton has {states}")]
    StateCountMismatch { encoded: usize, states: usize },
}

/// A bijection from states (by [`StateId`]) to codes of a common width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoding {
    width: u32,
    labels: Vec<Code>,
}

impl Encoding {
    /// Build from per-state codes, checking width and distinctness.
    pub fn from_codes(width: u32, labels: Vec<Code>) -> Result<Self, EncodingError> {
        if width > MAX_WIDTH || (width < usize::BITS && labels.len() > 1usize << width) {
            return Err(EncodingError::InsufficientWidth {
                states: labels.len(),
                width,
            });
        }
        let mut owner: BTreeMap<Code, usize> = BTreeMap::new();
        for (i, &c) in labels.iter().enumerate() {
            if c.0 >> width != 0 {
                return Err(EncodingError::InvalidLabel(alloc::format!("{:b}", c.0)));
            }
            if let Some(&j) = owner.get(&c) {
                return Err(EncodingError::DuplicateLabel {
                    label: c.render(width),
                    first: alloc::format!("#{j}"),
                    second: alloc::format!("#{i}"),
                });
            }
            owner.insert(c, i);
        }
        Ok(Self { width, labels })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn code(&self, s: StateId) -> Code {
        self.labels[s.0]
    }

    pub fn codes(&self) -> &[Code] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Inverse lookup.
    pub fn state_of(&self, code: Code) -> Option<StateId> {
        self.labels.iter().position(|&c| c == code).map(StateId)
    }

    /// Every code of the width is used.
    pub fn is_isomorphic(&self) -> bool {
        (self.labels.len() as u64) == 1u64 << self.width
    }

    /// Printed labels keyed by state name.
    pub fn labels_by_name(&self, a: &Automaton) -> BTreeMap<String, String> {
        a.states()
            .map(|s| (String::from(a.name(s)), self.code(s).render(self.width)))
            .collect()
    }
}

/// Bind printed labels to the states of `a`.
pub fn encode(a: &Automaton, labels: &BTreeMap<String, String>) -> Result<Encoding, EncodingError> {
    for name in labels.keys() {
        if a.id(name).is_none() {
            return Err(EncodingError::UnknownState(name.clone()));
        }
    }
    let mut width = None;
    let mut codes = Vec::with_capacity(a.len());
    let mut owner: BTreeMap<Code, &str> = BTreeMap::new();
    for s in a.states() {
        let name = a.name(s);
        let text = labels
            .get(name)
            .ok_or_else(|| EncodingError::MissingState(name.into()))?;
        let (code, w) = Code::parse(text).ok_or_else(|| EncodingError::InvalidLabel(text.clone()))?;
        let expected = *width.get_or_insert(w);
        if w != expected {
            return Err(EncodingError::WidthMismatch {
                state: name.into(),
                expected,
                found: w,
            });
        }
        if let Some(first) = owner.insert(code, name) {
            return Err(EncodingError::DuplicateLabel {
                label: text.clone(),
                first: first.into(),
                second: name.into(),
            });
        }
        codes.push(code);
    }
    Encoding::from_codes(width.unwrap_or(0), codes)
}

/// A reproducible random bijection extending `fixed`.
///
/// Unfixed states receive the remaining codes in a seeded shuffle, assigned
/// in state declaration order.
pub fn random_encoding(
    a: &Automaton,
    width: u32,
    seed: u64,
    fixed: &BTreeMap<String, String>,
) -> Result<Encoding, EncodingError> {
    if width > MAX_WIDTH || (1u64 << width) < a.len() as u64 {
        return Err(EncodingError::InsufficientWidth {
            states: a.len(),
            width,
        });
    }
    let mut pinned: Vec<Option<Code>> = vec![None; a.len()];
    let mut taken: BTreeMap<Code, &str> = BTreeMap::new();
    for (name, text) in fixed {
        let s = a
            .id(name)
            .ok_or_else(|| EncodingError::UnknownState(name.clone()))?;
        let (code, w) = Code::parse(text).ok_or_else(|| EncodingError::InvalidLabel(text.clone()))?;
        if w != width {
            return Err(EncodingError::WidthMismatch {
                state: name.clone(),
                expected: width,
                found: w,
            });
        }
        if let Some(other) = taken.insert(code, name) {
            return Err(EncodingError::ConflictingFixedLabels(alloc::format!(
                "{other:?} and {name:?} both fixed to {text}"
            )));
        }
        pinned[s.0] = Some(code);
    }
    let mut free: Vec<Code> = (0..1u32 << width)
        .map(Code)
        .filter(|c| !taken.contains_key(c))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    free.shuffle(&mut rng);
    let mut free = free.into_iter();
    let codes = pinned
        .into_iter()
        .map(|p| p.unwrap_or_else(|| free.next().expect("enough free codes")))
        .collect();
    Encoding::from_codes(width, codes)
}

/// Encoded dynamics: for every code, the code of the successor state, or
/// `None` for codes that encode no state (don't-cares).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Csa {
    width: u32,
    next: Vec<Option<Code>>,
}

impl Csa {
    /// `next` must have `2^width` entries.
    pub fn from_table(width: u32, next: Vec<Option<Code>>) -> Option<Self> {
        if width > MAX_WIDTH || next.len() != 1usize << width {
            return None;
        }
        if next.iter().flatten().any(|c| c.0 >> width != 0) {
            return None;
        }
        Some(Self { width, next })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn table(&self) -> &[Option<Code>] {
        &self.next
    }

    pub fn step(&self, code: Code) -> Option<Code> {
        self.next.get(code.0 as usize).copied().flatten()
    }

    pub fn is_care(&self, code: Code) -> bool {
        self.step(code).is_some()
    }

    pub fn care_codes(&self) -> impl Iterator<Item = Code> + '_ {
        self.next
            .iter()
            .enumerate()
            .filter(|(_, n)| n.is_some())
            .map(|(i, _)| Code(i as u32))
    }

    /// Care set is every code of the width.
    pub fn is_isomorphic(&self) -> bool {
        self.next.iter().all(Option::is_some)
    }

    /// Next value of bit `k` for every code; `None` off the care set.
    pub fn bit_table(&self, k: u32) -> Vec<Option<bool>> {
        self.next.iter().map(|n| n.map(|c| c.bit(k))).collect()
    }
}

pub fn derive_csa(a: &Automaton, e: &Encoding) -> Result<Csa, EncodingError> {
    if e.len() != a.len() {
        return Err(EncodingError::StateCountMismatch {
            encoded: e.len(),
            states: a.len(),
        });
    }
    let mut next = vec![None; 1usize << e.width()];
    for s in a.states() {
        next[e.code(s).0 as usize] = Some(e.code(a.next(s)));
    }
    Ok(Csa {
        width: e.width(),
        next,
    })
}

/// Variables that every realization of `table` must read: some pair of care
/// codes differs only in that variable and disagrees in value.
pub fn essential_variables(table: &[Option<bool>], width: u32) -> u32 {
    let mut mask = 0;
    for k in 0..width {
        let flip = 1usize << k;
        let essential = (0..table.len())
            .any(|x| x & flip == 0 && matches!((table[x], table[x | flip]), (Some(u), Some(v)) if u != v));
        if essential {
            mask |= 1 << k;
        }
    }
    mask
}

/// Whether some function of only the variables in `support` agrees with
/// `table` on every care code.
fn support_suffices(table: &[Option<bool>], support: u32) -> bool {
    let mut seen: BTreeMap<usize, bool> = BTreeMap::new();
    for (x, v) in table.iter().enumerate() {
        if let Some(v) = *v {
            if let Some(prev) = seen.insert(x & support as usize, v) {
                if prev != v {
                    return false;
                }
            }
        }
    }
    true
}

/// Smallest variable set on which `table` can be realized, resolving
/// don't-cares so they never add a dependency.
///
/// Starts from the essential variables and, if those are not enough, adds
/// the fewest extra variables (lowest indices first among equal sizes).
pub fn minimal_support(table: &[Option<bool>], width: u32) -> u32 {
    let essential = essential_variables(table, width);
    if support_suffices(table, essential) {
        return essential;
    }
    let optional: Vec<u32> = (0..width).filter(|k| essential & (1 << k) == 0).collect();
    for size in 1..=optional.len() {
        let mut pick: Vec<usize> = (0..size).collect();
        loop {
            let extra = pick.iter().fold(0, |m, &i| m | 1 << optional[i]);
            if support_suffices(table, essential | extra) {
                return essential | extra;
            }
            // next combination in lexicographic order
            let Some(i) = (0..size).rev().find(|&i| pick[i] != i + optional.len() - size) else {
                break;
            };
            pick[i] += 1;
            for j in i + 1..size {
                pick[j] = pick[j - 1] + 1;
            }
        }
    }
    (1 << width) - 1
}

/// Directed graph of which bits each bit's minimized update reads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    width: u32,
    /// `(from, to)`: bit `to` depends on bit `from` (0-based).
    edges: BTreeSet<(u32, u32)>,
}

impl DependencyGraph {
    pub fn new(width: u32, edges: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let edges = edges
            .into_iter()
            .filter(|&(a, b)| a < width && b < width)
            .collect();
        Self { width, edges }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn edges(&self) -> &BTreeSet<(u32, u32)> {
        &self.edges
    }

    pub fn has_edge(&self, from: u32, to: u32) -> bool {
        self.edges.contains(&(from, to))
    }

    /// Bit mask of the bits `to` depends on.
    pub fn inputs_of(&self, to: u32) -> u32 {
        self.edges
            .iter()
            .filter(|&&(_, t)| t == to)
            .fold(0, |m, &(f, _)| m | 1 << f)
    }

    /// Reachability closure (`reach[i]` has bit `j` set if a path `i -> j`
    /// of length at least one exists).
    pub fn reachability(&self) -> Vec<u32> {
        let n = self.width as usize;
        let mut reach = vec![0u32; n];
        for &(f, t) in &self.edges {
            reach[f as usize] |= 1 << t;
        }
        for k in 0..n {
            for i in 0..n {
                if reach[i] & (1 << k) != 0 {
                    reach[i] |= reach[k];
                }
            }
        }
        reach
    }

    /// Graphviz rendering: `digraph { Q1 -> Q2; ... }`.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph {\n");
        for k in 0..self.width {
            let _ = writeln!(out, "  Q{};", k + 1);
        }
        for &(f, t) in &self.edges {
            let _ = writeln!(out, "  Q{} -> Q{};", f + 1, t + 1);
        }
        out.push('}');
        out.push('\n');
        out
    }
}

pub fn dependency_graph(c: &Csa) -> DependencyGraph {
    let mut edges = Vec::new();
    for to in 0..c.width {
        let support = minimal_support(&c.bit_table(to), c.width);
        for from in 0..c.width {
            if support & (1 << from) != 0 {
                edges.push((from, to));
            }
        }
    }
    DependencyGraph::new(c.width, edges)
}

/// No directed cycle through two or more distinct bits. Self-loops allowed.
pub fn is_feed_forward(g: &DependencyGraph) -> bool {
    let reach = g.reachability();
    (0..g.width as usize).all(|i| {
        (0..g.width as usize).all(|j| i == j || reach[i] & (1 << j) == 0 || reach[j] & (1 << i) == 0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn tollbooth() -> Automaton {
        Automaton::from_successors(
            ["A", "B", "C", "D", "E", "F", "G", "H"],
            &[1, 2, 3, 4, 5, 6, 7, 0],
        )
        .unwrap()
    }

    fn labels(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    }

    fn conscious() -> BTreeMap<String, String> {
        labels(&[
            ("A", "000"),
            ("B", "110"),
            ("C", "010"),
            ("D", "101"),
            ("E", "111"),
            ("F", "011"),
            ("G", "001"),
            ("H", "100"),
        ])
    }

    fn hierarchical() -> BTreeMap<String, String> {
        labels(&[
            ("A", "000"),
            ("B", "100"),
            ("C", "010"),
            ("D", "110"),
            ("E", "001"),
            ("F", "101"),
            ("G", "011"),
            ("H", "111"),
        ])
    }

    fn code(s: &str) -> Code {
        Code::parse(s).unwrap().0
    }

    #[test]
    fn code_orientation() {
        assert_eq!(code("100"), Code(1));
        assert_eq!(code("001"), Code(4));
        assert_eq!(Code(6).render(3), "011");
        assert!(Code::parse("01x").is_none());
    }

    #[test]
    fn published_labels_encode() {
        let a = tollbooth();
        let e = encode(&a, &conscious()).unwrap();
        assert_eq!(e.width(), 3);
        assert!(e.is_isomorphic());
        assert_eq!(e.labels_by_name(&a), conscious());
        assert!(encode(&a, &hierarchical()).is_ok());
    }

    #[test]
    fn encode_errors() {
        let a = Automaton::cycle(2);
        assert!(matches!(
            encode(&a, &labels(&[("s0", "01"), ("s1", "01")])),
            Err(EncodingError::DuplicateLabel { .. })
        ));
        assert!(matches!(
            encode(&a, &labels(&[("s0", "0"), ("s1", "01")])),
            Err(EncodingError::WidthMismatch { .. })
        ));
        assert_eq!(
            encode(&a, &labels(&[("s0", "0")])),
            Err(EncodingError::MissingState("s1".into()))
        );
        assert_eq!(
            encode(&a, &labels(&[("s0", "0"), ("s1", "1"), ("x", "1")])),
            Err(EncodingError::UnknownState("x".into()))
        );
        assert!(matches!(
            encode(&a, &labels(&[("s0", "0"), ("s1", "2")])),
            Err(EncodingError::InvalidLabel(_))
        ));
    }

    #[test]
    fn random_encoding_contract() {
        let a = tollbooth();
        let fixed = labels(&[("A", "000")]);
        let e1 = random_encoding(&a, 3, 7, &fixed).unwrap();
        let e2 = random_encoding(&a, 3, 7, &fixed).unwrap();
        assert_eq!(e1, e2);
        assert_eq!(e1.code(StateId(0)), Code(0));
        assert!(e1.is_isomorphic());
        assert!(matches!(
            random_encoding(&a, 2, 1, &BTreeMap::new()),
            Err(EncodingError::InsufficientWidth { .. })
        ));
        assert!(matches!(
            random_encoding(&a, 3, 1, &labels(&[("A", "000"), ("B", "000")])),
            Err(EncodingError::ConflictingFixedLabels(_))
        ));
        // wider than needed: some codes stay unused
        let wide = random_encoding(&a, 4, 3, &BTreeMap::new()).unwrap();
        assert!(!wide.is_isomorphic());
    }

    #[test]
    fn conscious_bit_tables() {
        let a = tollbooth();
        let c = derive_csa(&a, &encode(&a, &conscious()).unwrap()).unwrap();
        let q1 = c.bit_table(0);
        assert_eq!(q1[code("000").0 as usize], Some(true));
        assert_eq!(q1[code("110").0 as usize], Some(false));
        for s in a.states() {
            let e = encode(&a, &conscious()).unwrap();
            assert_eq!(c.step(e.code(s)), Some(e.code(a.next(s))));
        }
    }

    #[test]
    fn hierarchical_second_bit_is_xor() {
        let a = tollbooth();
        let c = derive_csa(&a, &encode(&a, &hierarchical()).unwrap()).unwrap();
        let q2 = c.bit_table(1);
        for x in 0..8u32 {
            let x = Code(x);
            assert_eq!(q2[x.0 as usize], Some(x.bit(0) ^ x.bit(1)));
        }
    }

    #[test]
    fn dependency_graphs_of_both_labelings() {
        let a = tollbooth();
        let hier = derive_csa(&a, &encode(&a, &hierarchical()).unwrap()).unwrap();
        let g = dependency_graph(&hier);
        assert!(g.edges().iter().all(|&(f, t)| f <= t));
        assert!(is_feed_forward(&g));

        let cons = derive_csa(&a, &encode(&a, &conscious()).unwrap()).unwrap();
        let g = dependency_graph(&cons);
        assert!(!is_feed_forward(&g));
        assert!((0..3).any(|i| (0..3).any(|j| i != j && g.has_edge(i, j) && g.has_edge(j, i))));
    }

    #[test]
    fn constant_bit_has_no_inputs() {
        // bit 0 always next 0, bit 1 copies bit 0
        let next = (0..4u32).map(|x| Some(Code((x & 1) << 1))).collect();
        let c = Csa::from_table(2, next).unwrap();
        let g = dependency_graph(&c);
        assert_eq!(g.inputs_of(0), 0);
        assert_eq!(g.inputs_of(1), 0b01);
        assert!(is_feed_forward(&DependencyGraph::new(3, [])));
    }

    #[test]
    fn dont_cares_never_force_dependencies() {
        // only codes 00 -> 0 and 11 -> 1 are cared about: one variable suffices
        let table = [Some(false), None, None, Some(true)];
        assert_eq!(essential_variables(&table, 2), 0);
        assert_eq!(minimal_support(&table, 2), 0b01);
        // a single care code needs nothing
        assert_eq!(minimal_support(&[None, Some(true), None, None], 2), 0);
    }

    #[test]
    fn dot_export() {
        let g = DependencyGraph::new(2, [(0, 1), (1, 1)]);
        assert_eq!(
            g.to_dot(),
            "digraph {\n  Q1;\n  Q2;\n  Q1 -> Q2;\n  Q2 -> Q2;\n}\n"
        );
    }
}
