//! Clock-synchronous simulation of JK netlists.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::automaton::Automaton;
use crate::encoding::{Code, Encoding};
use crate::synthesis::{jk_update, GateOp, Netlist, ONE, ZERO};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("wire `{wire}` read by `{reader}` is not defined")]
    DanglingWire { wire: String, reader: String },
    #[error("combinational loop through gate `{0}`")]
    CombinationalLoop(String),
    #[error("gate `{id}` ({op}) has {found} inputs")]
    BadArity {
        id: String,
        op: &'static str,
        found: usize,
    },
    #[error("wire id `{0}` is defined twice")]
    DuplicateId(String),
    #[error("flip-flop `{0}` has no J/K drive")]
    Undriven(String),
    #[error("state has {found} bits, netlist has {expected} flip-flops")]
    StateWidthMismatch { expected: usize, found: usize },
}

/// Flip-flop contents, in netlist flip-flop order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CircuitState {
    pub bits: Vec<bool>,
}

impl CircuitState {
    pub fn from_code(code: Code, width: u32) -> Self {
        Self {
            bits: (0..width).map(|k| code.bit(k)).collect(),
        }
    }

    pub fn code(&self) -> Code {
        Code(
            self.bits
                .iter()
                .enumerate()
                .fold(0, |acc, (k, &b)| acc | (b as u32) << k),
        )
    }

    pub fn width(&self) -> u32 {
        self.bits.len() as u32
    }
}

impl fmt::Display for CircuitState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.code().display(self.width()).fmt(f)
    }
}

#[derive(Debug, Clone, Copy)]
enum Wire {
    Const(bool),
    FlipFlop(usize),
    Gate(usize),
}

#[derive(Debug, Clone)]
struct CompiledGate {
    op: GateOp,
    inputs: Vec<Wire>,
}

/// A netlist with all wire names resolved and gates in evaluation order.
#[derive(Debug, Clone)]
pub struct Simulator {
    width: usize,
    gates: Vec<CompiledGate>,
    drive: Vec<(Wire, Wire)>,
}

impl Simulator {
    pub fn new(n: &Netlist) -> Result<Self, CircuitError> {
        let mut names: BTreeMap<&str, Wire> = BTreeMap::new();
        names.insert(ONE, Wire::Const(true));
        names.insert(ZERO, Wire::Const(false));
        for (i, ff) in n.flipflops.iter().enumerate() {
            if names.insert(ff, Wire::FlipFlop(i)).is_some() {
                return Err(CircuitError::DuplicateId(ff.clone()));
            }
        }
        let mut gate_index: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, g) in n.gates.iter().enumerate() {
            if names.contains_key(g.id.as_str()) || gate_index.insert(&g.id, i).is_some() {
                return Err(CircuitError::DuplicateId(g.id.clone()));
            }
            let ok = match g.op {
                GateOp::Not => g.inputs.len() == 1,
                GateOp::Xor | GateOp::Nand => g.inputs.len() >= 2,
                GateOp::And | GateOp::Or => !g.inputs.is_empty(),
            };
            if !ok {
                return Err(CircuitError::BadArity {
                    id: g.id.clone(),
                    op: g.op.name(),
                    found: g.inputs.len(),
                });
            }
        }

        // depth-first topological order over gates
        let mut order = Vec::with_capacity(n.gates.len());
        let mut mark = vec![0u8; n.gates.len()];
        for root in 0..n.gates.len() {
            let mut stack = vec![(root, 0usize)];
            while let Some((g, child)) = stack.pop() {
                if child == 0 {
                    match mark[g] {
                        2 => continue,
                        1 => return Err(CircuitError::CombinationalLoop(n.gates[g].id.clone())),
                        _ => mark[g] = 1,
                    }
                }
                let gate = &n.gates[g];
                if let Some(input) = gate.inputs.get(child) {
                    stack.push((g, child + 1));
                    if let Some(&dep) = gate_index.get(input.as_str()) {
                        match mark[dep] {
                            1 => return Err(CircuitError::CombinationalLoop(n.gates[dep].id.clone())),
                            0 => stack.push((dep, 0)),
                            _ => {}
                        }
                    } else if !names.contains_key(input.as_str()) {
                        return Err(CircuitError::DanglingWire {
                            wire: input.clone(),
                            reader: gate.id.clone(),
                        });
                    }
                } else {
                    mark[g] = 2;
                    order.push(g);
                }
            }
        }
        let position: BTreeMap<usize, usize> = order.iter().enumerate().map(|(pos, &g)| (g, pos)).collect();
        for (&id, &g) in &gate_index {
            names.insert(id, Wire::Gate(position[&g]));
        }
        let resolve = |wire: &str, reader: &str| {
            names
                .get(wire)
                .copied()
                .ok_or_else(|| CircuitError::DanglingWire {
                    wire: wire.into(),
                    reader: reader.into(),
                })
        };
        let gates = order
            .iter()
            .map(|&g| {
                let gate = &n.gates[g];
                Ok(CompiledGate {
                    op: gate.op,
                    inputs: gate
                        .inputs
                        .iter()
                        .map(|i| resolve(i, &gate.id))
                        .collect::<Result<_, _>>()?,
                })
            })
            .collect::<Result<_, CircuitError>>()?;
        if n.drive.len() != n.flipflops.len() {
            let missing = n.flipflops[n.drive.len().min(n.flipflops.len())..]
                .first()
                .cloned()
                .unwrap_or_default();
            return Err(CircuitError::Undriven(missing));
        }
        let drive = n
            .flipflops
            .iter()
            .zip(&n.drive)
            .map(|(ff, d)| Ok((resolve(&d.j, ff)?, resolve(&d.k, ff)?)))
            .collect::<Result<_, CircuitError>>()?;
        Ok(Self {
            width: n.flipflops.len(),
            gates,
            drive,
        })
    }

    pub fn width(&self) -> u32 {
        self.width as u32
    }

    pub fn step(&self, s: &CircuitState) -> Result<CircuitState, CircuitError> {
        if s.bits.len() != self.width {
            return Err(CircuitError::StateWidthMismatch {
                expected: self.width,
                found: s.bits.len(),
            });
        }
        let mut values = Vec::with_capacity(self.gates.len());
        let read = |w: Wire, values: &[bool]| match w {
            Wire::Const(b) => b,
            Wire::FlipFlop(i) => s.bits[i],
            Wire::Gate(g) => values[g],
        };
        let mut scratch = Vec::new();
        for g in &self.gates {
            scratch.clear();
            scratch.extend(g.inputs.iter().map(|&w| read(w, &values)));
            values.push(g.op.apply(&scratch));
        }
        let bits = self
            .drive
            .iter()
            .zip(&s.bits)
            .map(|(&(j, k), &q)| jk_update(q, read(j, &values), read(k, &values)))
            .collect();
        Ok(CircuitState { bits })
    }

    pub fn run(&self, s0: &CircuitState, steps: usize) -> Result<Vec<CircuitState>, CircuitError> {
        let mut out = Vec::with_capacity(steps + 1);
        out.push(s0.clone());
        for _ in 0..steps {
            let next = self.step(out.last().expect("nonempty"))?;
            out.push(next);
        }
        Ok(out)
    }

    /// Successor code of every code of the state space.
    pub fn transition_table(&self) -> Vec<Code> {
        let w = self.width as u32;
        (0..1u32 << w)
            .map(|x| {
                self.step(&CircuitState::from_code(Code(x), w))
                    .expect("width matches")
                    .code()
            })
            .collect()
    }
}

pub fn step(n: &Netlist, s: &CircuitState) -> Result<CircuitState, CircuitError> {
    Simulator::new(n)?.step(s)
}

pub fn run(n: &Netlist, s0: &CircuitState, steps: usize) -> Result<Vec<CircuitState>, CircuitError> {
    Simulator::new(n)?.run(s0, steps)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub state: String,
    pub code: CircuitState,
    pub expected: CircuitState,
    pub found: CircuitState,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "state {} ({}): expected {}, circuit gives {}",
            self.state, self.code, self.expected, self.found
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerificationReport {
    pub mismatches: Vec<Mismatch>,
}

impl VerificationReport {
    pub fn is_verified(&self) -> bool {
        self.mismatches.is_empty()
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.mismatches.is_empty() {
            return f.write_str("verified");
        }
        for (i, m) in self.mismatches.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

/// Checks `step(e(s)) == e(next(s))` for every state of `a`.
pub fn verify_against_fsa(
    n: &Netlist,
    a: &Automaton,
    e: &Encoding,
) -> Result<VerificationReport, CircuitError> {
    let sim = Simulator::new(n)?;
    let width = e.width();
    if width != sim.width() {
        return Err(CircuitError::StateWidthMismatch {
            expected: sim.width,
            found: width as usize,
        });
    }
    let mut report = VerificationReport::default();
    for s in a.states() {
        let code = CircuitState::from_code(e.code(s), width);
        let expected = CircuitState::from_code(e.code(a.next(s)), width);
        let found = sim.step(&code)?;
        if found != expected {
            report.mismatches.push(Mismatch {
                state: a.name(s).into(),
                code,
                expected,
                found,
            });
        }
    }
    Ok(report)
}
