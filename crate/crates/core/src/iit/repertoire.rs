//! Cause and effect repertoires, and small phi over mechanism partitions.

use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;

use super::emd::{effect_emd, hamming_emd};
use super::{bipartitions_of, directed_bipartitions_of, gather, powerset, round6, scatter, SystemCut, Tpm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Cause,
    Effect,
}

/// Maximally irreducible cause or effect of one mechanism.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Mice {
    pub direction: Direction,
    pub mechanism: u32,
    pub purview: u32,
    pub phi: f64,
    pub repertoire: Vec<f64>,
}

impl Mice {
    /// Whether `cut` changes this cause or effect: it splits the mechanism
    /// or severs a purview-mechanism connection.
    pub fn damaged_by(&self, cut: &SystemCut) -> bool {
        let (from, to) = match self.direction {
            Direction::Cause => (self.purview, self.mechanism),
            Direction::Effect => (self.mechanism, self.purview),
        };
        cut.splits(self.mechanism) || (from & cut.from != 0 && to & cut.to != 0)
    }
}

/// The network in one current state, optionally with a system cut applied.
pub(crate) struct System<'a> {
    pub n: usize,
    pub state: u32,
    inputs: Vec<u32>,
    /// Per node: probability of being on, indexed by the compact state of
    /// its inputs, with all other nodes averaged out.
    on: Vec<Vec<f64>>,
    cache: RefCell<Vec<Option<Vec<f64>>>>,
    _tpm: core::marker::PhantomData<&'a Tpm>,
}

impl<'a> System<'a> {
    pub fn new(tpm: &'a Tpm, state: u32, cut: Option<SystemCut>) -> Self {
        let n = tpm.nodes();
        let inputs: Vec<u32> = (0..n)
            .map(|j| {
                let mut m = tpm.inputs_of(j);
                if let Some(c) = cut {
                    if c.to & 1 << j != 0 {
                        m &= !c.from;
                    }
                }
                m
            })
            .collect();
        let all = (1u32 << n) - 1;
        let on = (0..n)
            .map(|j| {
                let inp = inputs[j];
                let rest = all & !inp;
                let count = (1u32 << rest.count_ones()) as f64;
                (0..1u32 << inp.count_ones())
                    .map(|a| {
                        let fixed = scatter(a, inp);
                        let sum: f64 = (0..1u32 << rest.count_ones())
                            .map(|y| tpm.row(fixed | scatter(y, rest))[j])
                            .sum();
                        sum / count
                    })
                    .collect()
            })
            .collect();
        Self {
            n,
            state,
            inputs,
            on,
            cache: RefCell::new(vec![None; 2 << (2 * n)]),
            _tpm: core::marker::PhantomData,
        }
    }

    /// Mean over `free` inputs of P(node `j` in `value` | inputs), with the
    /// inputs outside `free` taken from `fixed`.
    fn node_prob(&self, j: usize, value: bool, fixed: u32, free: u32) -> f64 {
        let inp = self.inputs[j];
        let sum: f64 = (0..1u32 << free.count_ones())
            .map(|y| {
                let on = self.on[j][gather(fixed | scatter(y, free), inp) as usize];
                if value {
                    on
                } else {
                    1.0 - on
                }
            })
            .sum();
        sum / (1u32 << free.count_ones()) as f64
    }

    fn compute_cause(&self, mechanism: u32, purview: u32) -> Vec<f64> {
        let size = 1usize << purview.count_ones();
        if purview == 0 {
            return vec![1.0];
        }
        if mechanism == 0 {
            return vec![1.0 / size as f64; size];
        }
        let mut joint: Option<Vec<f64>> = None;
        for j in (0..self.n).filter(|&j| mechanism & 1 << j != 0) {
            let value = self.state & 1 << j != 0;
            let inp = self.inputs[j];
            let free = inp & !purview;
            let single: Vec<f64> = (0..size as u32)
                .map(|x| self.node_prob(j, value, scatter(x, purview) & inp, free))
                .collect();
            joint = Some(match joint {
                None => single,
                Some(acc) => acc.iter().zip(&single).map(|(a, b)| a * b).collect(),
            });
        }
        let joint = joint.expect("nonempty mechanism");
        let total: f64 = joint.iter().sum();
        if total == 0.0 {
            return joint;
        }
        joint.iter().map(|v| v / total).collect()
    }

    fn compute_effect(&self, mechanism: u32, purview: u32) -> Vec<f64> {
        if purview == 0 {
            return vec![1.0];
        }
        let nodes: Vec<(f64, f64)> = (0..self.n)
            .filter(|&p| purview & 1 << p != 0)
            .map(|p| {
                let inp = self.inputs[p];
                let fixed = inp & mechanism & self.state;
                let free = inp & !mechanism;
                (
                    self.node_prob(p, false, fixed, free),
                    self.node_prob(p, true, fixed, free),
                )
            })
            .collect();
        (0..1u32 << nodes.len())
            .map(|x| {
                let mut it = nodes
                    .iter()
                    .enumerate()
                    .map(|(k, &(off, on))| if x & 1 << k != 0 { on } else { off });
                let first = it.next().expect("nonempty purview");
                it.fold(first, |acc, v| acc * v)
            })
            .collect()
    }

    pub fn repertoire(&self, direction: Direction, mechanism: u32, purview: u32) -> Vec<f64> {
        let slot = ((direction as usize) << (2 * self.n)) | (mechanism as usize) << self.n | purview as usize;
        if let Some(r) = &self.cache.borrow()[slot] {
            return r.clone();
        }
        let r = match direction {
            Direction::Cause => self.compute_cause(mechanism, purview),
            Direction::Effect => self.compute_effect(mechanism, purview),
        };
        self.cache.borrow_mut()[slot] = Some(r.clone());
        r
    }

    pub fn unconstrained(&self, direction: Direction, purview: u32) -> Vec<f64> {
        self.repertoire(direction, 0, purview)
    }

    /// Product of the part repertoires, over the union of their purviews.
    fn partitioned(&self, direction: Direction, parts: [(u32, u32); 2], purview: u32) -> Vec<f64> {
        let r0 = self.repertoire(direction, parts[0].0, parts[0].1);
        let r1 = self.repertoire(direction, parts[1].0, parts[1].1);
        (0..1u32 << purview.count_ones())
            .map(|x| {
                let full = scatter(x, purview);
                r0[gather(full, parts[0].1) as usize] * r1[gather(full, parts[1].1) as usize]
            })
            .collect()
    }

    /// Small phi of a mechanism over a purview: the rounded distance to the
    /// closest bipartitioned repertoire.
    pub fn find_mip(&self, direction: Direction, mechanism: u32, purview: u32) -> f64 {
        if purview == 0 {
            return 0.0;
        }
        let whole = self.repertoire(direction, mechanism, purview);
        // unreachable state
        if direction == Direction::Cause && whole.iter().all(|&v| v == 0.0) {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for (n0, n1) in bipartitions_of(mechanism) {
            for (d0, d1) in directed_bipartitions_of(purview) {
                if (n0 | d0) == 0 || (n1 | d1) == 0 {
                    continue;
                }
                let cut = self.partitioned(direction, [(n0, d0), (n1, d1)], purview);
                let d = match direction {
                    Direction::Cause => hamming_emd(&whole, &cut),
                    Direction::Effect => effect_emd(&whole, &cut),
                };
                let phi = round6(d);
                if phi == 0.0 {
                    return 0.0;
                }
                if phi < best {
                    best = phi;
                }
            }
        }
        best
    }

    /// The purview maximizing small phi; ties go to the larger purview, then
    /// to the first in enumeration order.
    pub fn find_mice(&self, direction: Direction, mechanism: u32) -> Mice {
        let mut best: Option<(f64, u32)> = None;
        for purview in powerset(self.n, false) {
            let phi = self.find_mip(direction, mechanism, purview);
            let better = match best {
                None => true,
                Some((bp, bpur)) => (phi, purview.count_ones()) > (bp, bpur.count_ones()),
            };
            if better {
                best = Some((phi, purview));
            }
        }
        let (phi, purview) = best.expect("at least one node");
        Mice {
            direction,
            mechanism,
            purview,
            phi,
            repertoire: self.repertoire(direction, mechanism, purview),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    /// Two nodes copying each other: A' = B, B' = A.
    fn swap() -> Tpm {
        let rows = (0..4u32)
            .map(|x| vec![(x >> 1 & 1) as f64, (x & 1) as f64])
            .collect();
        Tpm::new(rows, Some(vec![vec![false, true], vec![true, false]])).unwrap()
    }

    #[test]
    fn copy_mechanism_repertoires() {
        let t = swap();
        // state A=1, B=0
        let s = System::new(&t, 0b01, None);
        // A=1 now means B was 1
        assert_eq!(s.repertoire(Direction::Cause, 0b01, 0b10), vec![0.0, 1.0]);
        // A=1 now means B will be 1
        assert_eq!(s.repertoire(Direction::Effect, 0b01, 0b10), vec![0.0, 1.0]);
        assert_eq!(s.unconstrained(Direction::Effect, 0b11), vec![0.25; 4]);
        assert_eq!(s.repertoire(Direction::Cause, 0b01, 0b01), vec![0.5, 0.5]);
        assert_eq!(s.find_mip(Direction::Cause, 0b01, 0b10), 0.5);
        assert_eq!(s.find_mip(Direction::Effect, 0b01, 0b10), 0.5);
        assert_eq!(s.find_mip(Direction::Cause, 0b01, 0b01), 0.0);
        let mice = s.find_mice(Direction::Cause, 0b01);
        assert_eq!((mice.purview, mice.phi), (0b10, 0.5));
    }

    #[test]
    fn cut_removes_input() {
        let t = swap();
        let cut = SystemCut { from: 0b01, to: 0b10 };
        let s = System::new(&t, 0b01, Some(cut));
        // B no longer sees A, so A says nothing about B's future
        assert_eq!(s.repertoire(Direction::Effect, 0b01, 0b10), vec![0.5, 0.5]);
        assert_eq!(s.find_mip(Direction::Effect, 0b01, 0b10), 0.0);
        let mice = Mice {
            direction: Direction::Effect,
            mechanism: 0b01,
            purview: 0b10,
            phi: 0.5,
            repertoire: vec![0.0, 1.0],
        };
        assert!(mice.damaged_by(&cut));
        assert!(!Mice {
            direction: Direction::Cause,
            ..mice
        }
        .damaged_by(&cut));
    }
}
