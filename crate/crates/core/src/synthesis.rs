//! JK excitation tables, exact two-level minimization and netlist building.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::{self, Write as _};

use crate::encoding::{Code, Csa};

/// Three-valued table entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Trit {
    Zero,
    One,
    DontCare,
}

impl Trit {
    pub fn from_bool(b: bool) -> Trit {
        if b {
            Trit::One
        } else {
            Trit::Zero
        }
    }

    /// Whether `value` is allowed by this entry.
    pub fn admits(self, value: bool) -> bool {
        match self {
            Trit::DontCare => true,
            Trit::One => value,
            Trit::Zero => !value,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Trit::Zero => '0',
            Trit::One => '1',
            Trit::DontCare => '*',
        }
    }
}

/// Clocked JK update: 00 latch, 01 reset, 10 set, 11 toggle.
pub fn jk_update(q: bool, j: bool, k: bool) -> bool {
    match (j, k) {
        (false, false) => q,
        (false, true) => false,
        (true, false) => true,
        (true, true) => !q,
    }
}

/// Required (J, K) for a transition `q -> q_next`; the other channel is free.
pub fn jk_requirement(q: bool, q_next: bool) -> (Trit, Trit) {
    match (q, q_next) {
        (false, false) => (Trit::Zero, Trit::DontCare),
        (false, true) => (Trit::One, Trit::DontCare),
        (true, false) => (Trit::DontCare, Trit::One),
        (true, true) => (Trit::DontCare, Trit::Zero),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Channel {
    J,
    K,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExcitationTable {
    width: u32,
    j: Vec<Vec<Trit>>,
    k: Vec<Vec<Trit>>,
}

impl ExcitationTable {
    pub fn width(&self) -> u32 {
        self.width
    }

    /// Entries of one channel of flip-flop `bit`, indexed by code.
    pub fn channel(&self, bit: u32, channel: Channel) -> &[Trit] {
        match channel {
            Channel::J => &self.j[bit as usize],
            Channel::K => &self.k[bit as usize],
        }
    }
}

pub fn excitation_from_csa(c: &Csa) -> ExcitationTable {
    let width = c.width();
    let size = 1usize << width;
    let mut j = vec![vec![Trit::DontCare; size]; width as usize];
    let mut k = vec![vec![Trit::DontCare; size]; width as usize];
    for (x, next) in c.table().iter().enumerate() {
        let Some(next) = next else { continue };
        let x_code = Code(x as u32);
        for bit in 0..width {
            let (jv, kv) = jk_requirement(x_code.bit(bit), next.bit(bit));
            j[bit as usize][x] = jv;
            k[bit as usize][x] = kv;
        }
    }
    ExcitationTable { width, j, k }
}

/// A product term: variables in `mask` appear as literals with the polarity
/// given by the matching bit of `value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cube {
    pub mask: u32,
    pub value: u32,
}

impl Cube {
    pub fn minterm(code: u32, width: u32) -> Cube {
        let mask = if width == 32 { u32::MAX } else { (1 << width) - 1 };
        Cube { mask, value: code }
    }

    pub fn literals(self) -> u32 {
        self.mask.count_ones()
    }

    pub fn contains(self, code: u32) -> bool {
        code & self.mask == self.value
    }

    /// Literals as (variable, positive) pairs, in variable order.
    pub fn literal_list(self) -> impl Iterator<Item = (u32, bool)> {
        (0..32)
            .filter(move |v| self.mask & (1 << v) != 0)
            .map(move |v| (v, self.value & (1 << v) != 0))
    }

    fn merge(self, other: Cube) -> Option<Cube> {
        if self.mask != other.mask {
            return None;
        }
        let diff = self.value ^ other.value;
        (diff.count_ones() == 1).then_some(Cube {
            mask: self.mask & !diff,
            value: self.value & !diff,
        })
    }
}

/// Recognized shapes of a minimized function, for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExprForm {
    Constant(bool),
    Literal { var: u32, positive: bool },
    Xor(u32, u32),
    Xnor(u32, u32),
    SumOfProducts,
}

/// Sum of products over variables `Q1..Qn` (bit `k` is `Q(k+1)`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BooleanExpr {
    width: u32,
    terms: Vec<Cube>,
}

impl BooleanExpr {
    pub fn new(width: u32, mut terms: Vec<Cube>) -> Self {
        terms.sort_unstable();
        terms.dedup();
        Self { width, terms }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn terms(&self) -> &[Cube] {
        &self.terms
    }

    pub fn eval(&self, code: Code) -> bool {
        self.terms.iter().any(|t| t.contains(code.0))
    }

    pub fn literal_count(&self) -> u32 {
        self.terms.iter().map(|t| t.literals()).sum()
    }

    /// Support of the function (variables whose flip changes the output).
    pub fn support(&self) -> u32 {
        let size = 1u32 << self.width;
        (0..self.width)
            .filter(|&v| (0..size).any(|x| self.eval(Code(x)) != self.eval(Code(x ^ (1 << v)))))
            .fold(0, |m, v| m | 1 << v)
    }

    pub fn form(&self) -> ExprForm {
        let size = 1u32 << self.width;
        let f: Vec<bool> = (0..size).map(|x| self.eval(Code(x))).collect();
        if f.iter().all(|&v| v == f[0]) {
            return ExprForm::Constant(f[0]);
        }
        for var in 0..self.width {
            for positive in [true, false] {
                if (0..size).all(|x| f[x as usize] == ((x >> var & 1 == 1) == positive)) {
                    return ExprForm::Literal { var, positive };
                }
            }
        }
        for a in 0..self.width {
            for b in a + 1..self.width {
                let xor = |x: u32| (x >> a ^ x >> b) & 1 == 1;
                if (0..size).all(|x| f[x as usize] == xor(x)) {
                    return ExprForm::Xor(a, b);
                }
                if (0..size).all(|x| f[x as usize] != xor(x)) {
                    return ExprForm::Xnor(a, b);
                }
            }
        }
        ExprForm::SumOfProducts
    }
}

impl fmt::Display for BooleanExpr {
    /// `Q1 Q2' + Q3` style: juxtaposition is AND, `'` is NOT.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.form() {
            ExprForm::Constant(v) => return f.write_str(if v { "1" } else { "0" }),
            ExprForm::Xor(a, b) => return write!(f, "Q{} ^ Q{}", a + 1, b + 1),
            ExprForm::Xnor(a, b) => return write!(f, "(Q{} ^ Q{})'", a + 1, b + 1),
            _ => {}
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            for (j, (v, pos)) in t.literal_list().enumerate() {
                if j > 0 {
                    f.write_char(' ')?;
                }
                write!(f, "Q{}", v + 1)?;
                if !pos {
                    f.write_char('\'')?;
                }
            }
        }
        Ok(())
    }
}

/// Prime implicants of the function that is 1 on `on` and free on `dc`.
pub fn prime_implicants(on: &[u32], dc: &[u32], width: u32) -> Vec<Cube> {
    let mut current: BTreeSet<Cube> = on.iter().chain(dc).map(|&m| Cube::minterm(m, width)).collect();
    let mut primes = BTreeSet::new();
    while !current.is_empty() {
        let mut merged = BTreeSet::new();
        let mut used = BTreeSet::new();
        // group by mask so only comparable cubes are paired
        let mut by_mask: BTreeMap<u32, Vec<Cube>> = BTreeMap::new();
        for &c in &current {
            by_mask.entry(c.mask).or_default().push(c);
        }
        for group in by_mask.values() {
            for (i, &a) in group.iter().enumerate() {
                for &b in &group[i + 1..] {
                    if let Some(m) = a.merge(b) {
                        merged.insert(m);
                        used.insert(a);
                        used.insert(b);
                    }
                }
            }
        }
        primes.extend(current.iter().filter(|c| !used.contains(c)));
        current = merged;
    }
    primes.into_iter().collect()
}

/// Exact two-level minimization with don't-cares.
///
/// Returns a sum of prime implicants with the fewest terms, then the fewest
/// literals, then the lexicographically smallest sorted term list.
pub fn minimize(table: &[Trit], width: u32) -> BooleanExpr {
    let on: Vec<u32> = (0..table.len() as u32)
        .filter(|&x| table[x as usize] == Trit::One)
        .collect();
    if on.is_empty() {
        return BooleanExpr::new(width, Vec::new());
    }
    let dc: Vec<u32> = (0..table.len() as u32)
        .filter(|&x| table[x as usize] == Trit::DontCare)
        .collect();
    let primes: Vec<Cube> = prime_implicants(&on, &dc, width)
        .into_iter()
        .filter(|p| on.iter().any(|&m| p.contains(m)))
        .collect();
    let covering: Vec<Vec<usize>> = on
        .iter()
        .map(|&m| (0..primes.len()).filter(|&p| primes[p].contains(m)).collect())
        .collect();
    let mut cover = CoverSearch {
        primes: &primes,
        covering: &covering,
        min_literals: primes.iter().map(|p| p.literals()).min().unwrap_or(0),
        covered: vec![0; on.len()],
        chosen: Vec::new(),
        best: None,
    };
    cover.search(0);
    let (_, _, terms) = cover.best.expect("primes always cover the on-set");
    BooleanExpr::new(width, terms)
}

struct CoverSearch<'a> {
    primes: &'a [Cube],
    covering: &'a [Vec<usize>],
    min_literals: u32,
    covered: Vec<u32>,
    chosen: Vec<usize>,
    best: Option<(usize, u32, Vec<Cube>)>,
}

impl CoverSearch<'_> {
    fn cost(&self) -> (usize, u32) {
        (
            self.chosen.len(),
            self.chosen.iter().map(|&p| self.primes[p].literals()).sum(),
        )
    }

    fn worse_than_best(&self, bound: (usize, u32)) -> bool {
        match &self.best {
            Some((n, l, _)) => bound > (*n, *l),
            None => false,
        }
    }

    fn search(&mut self, lits: u32) {
        // the uncovered minterm with fewest options; essentials come first
        let pick = (0..self.covering.len())
            .filter(|&m| self.covered[m] == 0)
            .min_by_key(|&m| self.covering[m].len());
        let Some(m) = pick else {
            let (n, l) = self.cost();
            let mut terms: Vec<Cube> = self.chosen.iter().map(|&p| self.primes[p]).collect();
            terms.sort_unstable();
            let better = match &self.best {
                None => true,
                Some((bn, bl, bt)) => match (n, l).cmp(&(*bn, *bl)) {
                    Ordering::Less => true,
                    Ordering::Equal => terms < *bt,
                    Ordering::Greater => false,
                },
            };
            if better {
                self.best = Some((n, l, terms));
            }
            return;
        };
        let (n, _) = self.cost();
        if self.worse_than_best((n + 1, lits + self.min_literals)) {
            return;
        }
        for &p in &self.covering[m] {
            let p_lits = self.primes[p].literals();
            self.chosen.push(p);
            for (mi, opts) in self.covering.iter().enumerate() {
                if opts.contains(&p) {
                    self.covered[mi] += 1;
                }
            }
            self.search(lits + p_lits);
            for (mi, opts) in self.covering.iter().enumerate() {
                if opts.contains(&p) {
                    self.covered[mi] -= 1;
                }
            }
            self.chosen.pop();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GateOp {
    And,
    Or,
    Not,
    Xor,
    Nand,
}

impl GateOp {
    pub fn name(self) -> &'static str {
        match self {
            GateOp::And => "AND",
            GateOp::Or => "OR",
            GateOp::Not => "NOT",
            GateOp::Xor => "XOR",
            GateOp::Nand => "NAND",
        }
    }

    pub fn from_name(name: &str) -> Option<GateOp> {
        Some(match name {
            "AND" => GateOp::And,
            "OR" => GateOp::Or,
            "NOT" => GateOp::Not,
            "XOR" => GateOp::Xor,
            "NAND" => GateOp::Nand,
            _ => return None,
        })
    }

    pub fn apply(self, inputs: &[bool]) -> bool {
        match self {
            GateOp::And => inputs.iter().all(|&b| b),
            GateOp::Or => inputs.iter().any(|&b| b),
            GateOp::Not => !inputs[0],
            GateOp::Xor => inputs.iter().fold(false, |acc, &b| acc ^ b),
            GateOp::Nand => !inputs.iter().all(|&b| b),
        }
    }
}

pub const ONE: &str = "ONE";
pub const ZERO: &str = "ZERO";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub id: String,
    pub op: GateOp,
    pub inputs: Vec<String>,
}

/// Wires driving one flip-flop's J and K inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Drive {
    pub j: String,
    pub k: String,
}

/// JK flip-flops plus the combinational gates feeding them.
///
/// Wires are named: a flip-flop output by its name (`Q1`), a gate output by
/// the gate id, and the constants by [`ONE`] / [`ZERO`]. `drive[i]` belongs
/// to `flipflops[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Netlist {
    pub flipflops: Vec<String>,
    pub gates: Vec<Gate>,
    pub drive: Vec<Drive>,
}

impl Netlist {
    pub fn gate(&self, id: &str) -> Option<&Gate> {
        self.gates.iter().find(|g| g.id == id)
    }

    /// Flip-flop indices that the cone of `wire` reads.
    pub fn cone_inputs(&self, wire: &str) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut stack = vec![wire];
        let mut seen = BTreeSet::new();
        while let Some(w) = stack.pop() {
            if !seen.insert(w) {
                continue;
            }
            if let Some(i) = self.flipflops.iter().position(|f| f == w) {
                out.insert(i);
            } else if let Some(g) = self.gate(w) {
                stack.extend(g.inputs.iter().map(String::as_str));
            }
        }
        out
    }

    /// Graphviz rendering of the circuit graph.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph circuit {\n  rankdir=LR;\n");
        for ff in &self.flipflops {
            let _ = writeln!(out, "  {ff} [shape=box];");
        }
        for g in &self.gates {
            let _ = writeln!(out, "  {} [label=\"{}\"];", g.id, g.op.name());
            for i in &g.inputs {
                let _ = writeln!(out, "  {i} -> {};", g.id);
            }
        }
        for (ff, d) in self.flipflops.iter().zip(&self.drive) {
            let _ = writeln!(out, "  {} -> {ff} [label=\"J\"];", d.j);
            let _ = writeln!(out, "  {} -> {ff} [label=\"K\"];", d.k);
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    /// AND / OR with unbounded fan-in, NOT, and two-input XOR.
    AndOrNotXor,
    /// Two-input NAND only.
    NandOnly,
}

struct Builder {
    basis: Basis,
    gates: Vec<Gate>,
    interned: BTreeMap<(GateOp, Vec<String>), String>,
    /// Output wire of a NOT (or NAND(x, x)) -> its input.
    inverted: BTreeMap<String, String>,
}

impl Builder {
    fn new(basis: Basis) -> Self {
        Self {
            basis,
            gates: Vec::new(),
            interned: BTreeMap::new(),
            inverted: BTreeMap::new(),
        }
    }

    fn gate(&mut self, op: GateOp, inputs: Vec<String>) -> String {
        let key = (op, inputs);
        if let Some(id) = self.interned.get(&key) {
            return id.clone();
        }
        let id = alloc::format!("g{}", self.gates.len() + 1);
        self.gates.push(Gate {
            id: id.clone(),
            op,
            inputs: key.1.clone(),
        });
        self.interned.insert(key, id.clone());
        id
    }

    fn not(&mut self, w: String) -> String {
        if let Some(src) = self.inverted.get(&w) {
            return src.clone();
        }
        let out = match self.basis {
            Basis::AndOrNotXor => self.gate(GateOp::Not, vec![w.clone()]),
            Basis::NandOnly => self.gate(GateOp::Nand, vec![w.clone(), w.clone()]),
        };
        self.inverted.insert(out.clone(), w);
        out
    }

    fn and(&mut self, ws: Vec<String>) -> String {
        match self.basis {
            Basis::AndOrNotXor => {
                if ws.len() == 1 {
                    ws.into_iter().next().expect("one input")
                } else {
                    self.gate(GateOp::And, ws)
                }
            }
            Basis::NandOnly => {
                let mut it = ws.into_iter();
                let mut acc = it.next().expect("nonempty product");
                for w in it {
                    let nand = self.gate(GateOp::Nand, vec![acc, w]);
                    acc = self.not(nand);
                }
                acc
            }
        }
    }

    fn or(&mut self, ws: Vec<String>) -> String {
        match self.basis {
            Basis::AndOrNotXor => {
                if ws.len() == 1 {
                    ws.into_iter().next().expect("one input")
                } else {
                    self.gate(GateOp::Or, ws)
                }
            }
            Basis::NandOnly => {
                let mut it = ws.into_iter();
                let mut acc = it.next().expect("nonempty sum");
                for w in it {
                    let na = self.not(acc);
                    let nb = self.not(w);
                    acc = self.gate(GateOp::Nand, vec![na, nb]);
                }
                acc
            }
        }
    }

    fn xor(&mut self, a: String, b: String) -> String {
        match self.basis {
            Basis::AndOrNotXor => self.gate(GateOp::Xor, vec![a, b]),
            Basis::NandOnly => {
                let n1 = self.gate(GateOp::Nand, vec![a.clone(), b.clone()]);
                let n2 = self.gate(GateOp::Nand, vec![a, n1.clone()]);
                let n3 = self.gate(GateOp::Nand, vec![b, n1]);
                self.gate(GateOp::Nand, vec![n2, n3])
            }
        }
    }

    fn literal(&mut self, names: &[String], var: u32, positive: bool) -> String {
        let w = names[var as usize].clone();
        if positive {
            w
        } else {
            self.not(w)
        }
    }

    fn realize(&mut self, names: &[String], expr: &BooleanExpr) -> String {
        match expr.form() {
            ExprForm::Constant(v) => String::from(if v { ONE } else { ZERO }),
            ExprForm::Literal { var, positive } => self.literal(names, var, positive),
            ExprForm::Xor(a, b) => self.xor(names[a as usize].clone(), names[b as usize].clone()),
            ExprForm::Xnor(a, b) => {
                let x = self.xor(names[a as usize].clone(), names[b as usize].clone());
                self.not(x)
            }
            ExprForm::SumOfProducts => {
                let products: Vec<String> = expr
                    .terms()
                    .iter()
                    .map(|t| {
                        let lits = t
                            .literal_list()
                            .map(|(v, pos)| self.literal(names, v, pos))
                            .collect();
                        self.and(lits)
                    })
                    .collect();
                self.or(products)
            }
        }
    }
}

/// Minimized expression for every channel, in flip-flop order.
pub fn minimized_channels(ex: &ExcitationTable) -> Vec<(BooleanExpr, BooleanExpr)> {
    (0..ex.width)
        .map(|bit| {
            (
                minimize(ex.channel(bit, Channel::J), ex.width),
                minimize(ex.channel(bit, Channel::K), ex.width),
            )
        })
        .collect()
}

pub fn build_netlist(ex: &ExcitationTable, basis: Basis) -> Netlist {
    build_netlist_from(ex.width, &minimized_channels(ex), basis)
}

/// Netlist realizing already minimized channel expressions.
pub fn build_netlist_from(width: u32, channels: &[(BooleanExpr, BooleanExpr)], basis: Basis) -> Netlist {
    let names: Vec<String> = (1..=width).map(|i| alloc::format!("Q{i}")).collect();
    let mut b = Builder::new(basis);
    let drive = channels
        .iter()
        .map(|(j, k)| Drive {
            j: b.realize(&names, j),
            k: b.realize(&names, k),
        })
        .collect();
    Netlist {
        flipflops: names,
        gates: b.gates,
        drive,
    }
}
