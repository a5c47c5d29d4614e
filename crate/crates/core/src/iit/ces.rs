//! Cause-effect structures and the distance between them.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::emd::{emd, hamming_emd};
use super::repertoire::{Direction, Mice, System};
use super::{gather, round6, scatter};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Concept {
    pub mechanism: u32,
    pub phi: f64,
    pub cause: Mice,
    pub effect: Mice,
}

impl Concept {
    /// Same phi, mechanism, purviews and exactly equal repertoires.
    fn same_as(&self, other: &Concept) -> bool {
        self.phi == other.phi
            && self.mechanism == other.mechanism
            && self.cause.purview == other.cause.purview
            && self.cause.repertoire == other.cause.repertoire
            && self.effect.purview == other.effect.purview
            && self.effect.repertoire == other.effect.repertoire
    }

    fn null() -> Concept {
        let empty = |direction| Mice {
            direction,
            mechanism: 0,
            purview: 0,
            phi: 0.0,
            repertoire: vec![1.0],
        };
        Concept {
            mechanism: 0,
            phi: 0.0,
            cause: empty(Direction::Cause),
            effect: empty(Direction::Effect),
        }
    }
}

pub(crate) type MiceCache = BTreeMap<(Direction, u32), Mice>;

/// Concepts with positive phi among `mechanisms`, plus the causes and
/// effects with positive phi that a cut system may reuse.
///
/// With `inherited`, a cached cause or effect is reused unless the system's
/// cut damages it.
pub(crate) fn cause_effect_structure(
    system: &System<'_>,
    mechanisms: &[u32],
    inherited: Option<&MiceCache>,
    cut: Option<&super::SystemCut>,
) -> (Vec<Concept>, MiceCache) {
    let mut concepts = Vec::new();
    let mut cache = MiceCache::new();
    for &m in mechanisms {
        let mut find = |direction| {
            let reused = inherited
                .and_then(|c| c.get(&(direction, m)))
                .filter(|mice| cut.is_none_or(|cut| !mice.damaged_by(cut)));
            let mice = match reused {
                Some(mice) => mice.clone(),
                None => system.find_mice(direction, m),
            };
            if inherited.is_none() && mice.phi > 0.0 {
                cache.insert((direction, m), mice.clone());
            }
            mice
        };
        let cause = find(Direction::Cause);
        let effect = find(Direction::Effect);
        let phi = cause.phi.min(effect.phi);
        if phi > 0.0 {
            concepts.push(Concept {
                mechanism: m,
                phi,
                cause,
                effect,
            });
        }
    }
    (concepts, cache)
}

/// Spread a repertoire over `target` (a superset of its purview) using the
/// system's unconstrained repertoire on the added nodes, then normalize.
fn expand(system: &System<'_>, mice: &Mice, target: u32) -> Vec<f64> {
    let extra = target & !mice.purview;
    let uc = system.unconstrained(mice.direction, extra);
    let out: Vec<f64> = (0..1u32 << target.count_ones())
        .map(|x| {
            let full = scatter(x, target);
            mice.repertoire[gather(full, mice.purview) as usize] * uc[gather(full, extra) as usize]
        })
        .collect();
    let total: f64 = out.iter().sum();
    if total == 0.0 {
        return out;
    }
    out.iter().map(|v| v / total).collect()
}

fn concept_distance(a: &Concept, sa: &System<'_>, b: &Concept, sb: &System<'_>) -> f64 {
    let cause_purview = a.cause.purview | b.cause.purview;
    let effect_purview = a.effect.purview | b.effect.purview;
    hamming_emd(
        &expand(sa, &a.cause, cause_purview),
        &expand(sb, &b.cause, cause_purview),
    ) + hamming_emd(
        &expand(sa, &a.effect, effect_purview),
        &expand(sb, &b.effect, effect_purview),
    )
}

fn distance_to_null(c: &Concept, s: &System<'_>) -> f64 {
    concept_distance(c, s, &Concept::null(), s)
}

/// Extended earth mover's distance between two cause-effect structures,
/// rounded to six decimals.
pub(crate) fn ces_distance(c1: &[Concept], s1: &System<'_>, c2: &[Concept], s2: &System<'_>) -> f64 {
    let only1: Vec<&Concept> = c1.iter().filter(|a| !c2.iter().any(|b| a.same_as(b))).collect();
    let only2: Vec<&Concept> = c2.iter().filter(|b| !c1.iter().any(|a| b.same_as(a))).collect();
    let dist = if only1.is_empty() || only2.is_empty() {
        // concepts only disappeared: move each to the null concept
        let (big, sbig, small) = if c2.len() > c1.len() {
            (c2, s2, c1)
        } else {
            (c1, s1, c2)
        };
        big.iter()
            .filter(|a| !small.iter().any(|b| a.same_as(b)))
            .map(|a| a.phi * distance_to_null(a, sbig))
            .sum()
    } else {
        let (n, m) = (only1.len(), only2.len());
        let pair: Vec<Vec<f64>> = only1
            .iter()
            .map(|a| only2.iter().map(|b| concept_distance(a, s1, b, s2)).collect())
            .collect();
        let to_null: Vec<f64> = only1
            .iter()
            .map(|a| distance_to_null(a, s1))
            .chain(only2.iter().map(|b| distance_to_null(b, s2)))
            .collect();
        let size = n + m + 1;
        let fill = pair.iter().flatten().fold(f64::NEG_INFINITY, |x, &y| x.max(y)) + 1.0;
        let mut cost = vec![vec![fill; size]; size];
        for i in 0..n {
            for j in 0..m {
                cost[i][n + j] = pair[i][j];
                cost[n + j][i] = pair[i][j];
            }
        }
        for (k, &d) in to_null.iter().enumerate() {
            cost[size - 1][k] = d;
            cost[k][size - 1] = d;
        }
        cost[size - 1][size - 1] = 0.0;
        let mut d1 = vec![0.0; size];
        let mut d2 = vec![0.0; size];
        for (i, a) in only1.iter().enumerate() {
            d1[i] = a.phi;
        }
        for (j, b) in only2.iter().enumerate() {
            d2[n + j] = b.phi;
        }
        d2[size - 1] = d1.iter().sum::<f64>() - d2.iter().sum::<f64>();
        emd(&d1, &d2, &cost)
    };
    round6(dist)
}
