//! Earth mover's distance by exact min-cost transport.

use alloc::vec;
use alloc::vec::Vec;

const EPS: f64 = 1e-14;

/// Minimum cost of moving `supply` onto `demand` under the `cost` matrix
/// (`cost[i][j]` from bin `i` of `supply` to bin `j` of `demand`).
///
/// Mass shared by a bin index on both sides stays put at no cost, the
/// smaller of the two totals is transported, and any difference in totals is
/// charged at the largest cost entry. Negative entries on one side act as
/// mass on the other.
pub fn emd(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> f64 {
    let n = supply.len();
    debug_assert_eq!(demand.len(), n);
    let mut a = supply.to_vec();
    let mut b = demand.to_vec();
    for i in 0..n {
        if a[i] < b[i] {
            b[i] -= a[i];
            a[i] = 0.0;
        } else {
            a[i] -= b[i];
            b[i] = 0.0;
        }
    }
    let max_cost = cost
        .iter()
        .flat_map(|row| row.iter().copied())
        .fold(0.0, f64::max);
    let extra = (numpy_sum(supply) - numpy_sum(demand)).abs() * max_cost;
    let sources: Vec<usize> = (0..n).filter(|&i| a[i] > 0.0).collect();
    let sinks: Vec<usize> = (0..n).filter(|&j| b[j] > 0.0).collect();
    if sources.is_empty() || sinks.is_empty() {
        return extra;
    }
    let sub_cost: Vec<Vec<f64>> = sources
        .iter()
        .map(|&i| sinks.iter().map(|&j| cost[i][j]).collect())
        .collect();
    let s: Vec<f64> = sources.iter().map(|&i| a[i]).collect();
    let t: Vec<f64> = sinks.iter().map(|&j| b[j]).collect();
    let plan = transport_plan(&s, &t, &sub_cost);
    let mut products = vec![0.0; n * n];
    for (k, &i) in sources.iter().enumerate() {
        for (l, &j) in sinks.iter().enumerate() {
            products[i * n + j] = plan[k][l] * cost[i][j];
        }
    }
    numpy_sum(&products) + extra
}

/// Sum in the order numpy's `add.reduce` uses for a contiguous float64
/// array: the first element plus a pairwise sum of the rest, with blocks of
/// at most 128 elements unrolled over eight accumulators.
pub fn numpy_sum(x: &[f64]) -> f64 {
    fn pairwise(a: &[f64]) -> f64 {
        let n = a.len();
        if n < 8 {
            a.iter().fold(0.0, |acc, &v| acc + v)
        } else if n <= 128 {
            let mut r = [0.0; 8];
            r.copy_from_slice(&a[..8]);
            let whole = n - n % 8;
            for chunk in a[8..whole].chunks_exact(8) {
                for (acc, &v) in r.iter_mut().zip(chunk) {
                    *acc += v;
                }
            }
            let mut res = ((r[0] + r[1]) + (r[2] + r[3])) + ((r[4] + r[5]) + (r[6] + r[7]));
            for &v in &a[whole..] {
                res += v;
            }
            res
        } else {
            let half = n / 2;
            let half = half - half % 8;
            pairwise(&a[..half]) + pairwise(&a[half..])
        }
    }
    match x.split_first() {
        None => 0.0,
        Some((&first, rest)) => first + pairwise(rest),
    }
}

/// Min-cost transport of `min(sum(s), sum(t))` units between distinct source
/// and sink sets, by successive shortest augmenting paths.
pub fn transport(s: &[f64], t: &[f64], cost: &[Vec<f64>]) -> f64 {
    let plan = transport_plan(s, t, cost);
    let mut total = 0.0;
    for (row, c) in plan.iter().zip(cost) {
        for (f, c) in row.iter().zip(c) {
            total += f * c;
        }
    }
    total
}

/// An optimal flow matrix for [`transport`].
pub fn transport_plan(s: &[f64], t: &[f64], cost: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (ns, nt) = (s.len(), t.len());
    let mut supply = s.to_vec();
    let mut demand = t.to_vec();
    let mut flow = vec![vec![0.0f64; nt]; ns];
    let scale = s.iter().chain(t).fold(0.0f64, |m, &x| m.max(x.abs())).max(1.0);
    let eps = EPS * scale;
    let max_cost = cost.iter().flatten().fold(1.0f64, |m, &c| m.max(c.abs()));
    let tol = 1e-12 * max_cost;

    // node ids: sources 0..ns, sinks ns..ns+nt
    let nodes = ns + nt;
    loop {
        if supply.iter().all(|&x| x <= eps) || demand.iter().all(|&x| x <= eps) {
            break;
        }
        let mut dist = vec![f64::INFINITY; nodes];
        let mut prev = vec![usize::MAX; nodes];
        for i in 0..ns {
            if supply[i] > eps {
                dist[i] = 0.0;
            }
        }
        for _ in 0..nodes {
            let mut changed = false;
            for i in 0..ns {
                if dist[i].is_finite() {
                    for j in 0..nt {
                        let d = dist[i] + cost[i][j];
                        if d < dist[ns + j] - tol {
                            dist[ns + j] = d;
                            prev[ns + j] = i;
                            changed = true;
                        }
                    }
                }
            }
            for j in 0..nt {
                if dist[ns + j].is_finite() {
                    for i in 0..ns {
                        if flow[i][j] > eps {
                            let d = dist[ns + j] - cost[i][j];
                            if d < dist[i] - tol {
                                dist[i] = d;
                                prev[i] = ns + j;
                                changed = true;
                            }
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let Some(sink) = (0..nt)
            .filter(|&j| demand[j] > eps && dist[ns + j].is_finite())
            .min_by(|&x, &y| dist[ns + x].total_cmp(&dist[ns + y]))
        else {
            break;
        };

        let mut path = Vec::new();
        let mut v = ns + sink;
        while prev[v] != usize::MAX && path.len() <= nodes {
            path.push((prev[v], v));
            v = prev[v];
        }
        let origin = v;
        if origin >= ns {
            break;
        }
        let mut amount = demand[sink].min(supply[origin]);
        for &(u, v) in &path {
            if u >= ns {
                amount = amount.min(flow[v][u - ns]);
            }
        }
        if amount <= 0.0 {
            break;
        }
        for &(u, v) in &path {
            if u < ns {
                flow[u][v - ns] += amount;
            } else {
                flow[v][u - ns] -= amount;
            }
        }
        supply[origin] -= amount;
        demand[sink] -= amount;
    }
    flow
}

/// EMD between two distributions over the states of `k` binary nodes, with
/// Hamming distance as ground cost. Index bits are node states.
pub fn hamming_emd(d1: &[f64], d2: &[f64]) -> f64 {
    let n = d1.len();
    let cost: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| (i ^ j).count_ones() as f64).collect())
        .collect();
    emd(d1, d2, &cost)
}

/// Sum over nodes of the difference in probability of being off. Equal to
/// the Hamming EMD for product distributions.
pub fn effect_emd(d1: &[f64], d2: &[f64]) -> f64 {
    let bits = d1.len().trailing_zeros();
    (0..bits)
        .map(|k| {
            let off = |d: &[f64]| {
                d.iter()
                    .enumerate()
                    .filter(|(x, _)| x >> k & 1 == 0)
                    .map(|(_, &p)| p)
                    .sum::<f64>()
            };
            (off(d1) - off(d2)).abs()
        })
        .sum()
}
