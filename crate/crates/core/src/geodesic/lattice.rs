use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::model::SpinState;
use crate::potential::PotentialW;

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.partial_cmp(&self.0).unwrap_or(Ordering::Equal).then(other.1.cmp(&self.1))
    }
}

/// Shortest-path cost between two states on the 26-neighbour lattice over
/// [0, 1.5·R]³, R the largest well or endpoint radius. Edge weights are the mean
/// of √W at the two ends times the edge length; endpoints snap to the nearest node.
pub fn graph_oracle_cost(w: &PotentialW, xi0: SpinState, xi1: SpinState, resolution: usize) -> f64 {
    let res = resolution.max(2);
    let radius = w.wells().iter().chain([xi0, xi1].iter()).map(|s| s.norm()).fold(0.0, f64::max).max(1e-12);
    let side = 1.5 * radius;
    let h = side / (res - 1) as f64;
    let snap = |s: SpinState| {
        let c = s.to_array().map(|x| ((x / h).round() as isize).clamp(0, res as isize - 1) as usize);
        (c[0] * res + c[1]) * res + c[2]
    };
    let (src, dst) = (snap(xi0), snap(xi1));
    if src == dst {
        return 0.0;
    }
    let total = res * res * res;
    let coord = |idx: usize| [idx / (res * res), (idx / res) % res, idx % res];
    let sqrt_w: Vec<f64> = (0..total)
        .map(|idx| {
            let c = coord(idx);
            w.eval([c[0] as f64 * h, c[1] as f64 * h, c[2] as f64 * h]).max(0.0).sqrt()
        })
        .collect();

    let mut offsets = Vec::with_capacity(26);
    for di in -1isize..=1 {
        for dj in -1isize..=1 {
            for dk in -1isize..=1 {
                if (di, dj, dk) != (0, 0, 0) {
                    let len = h * ((di * di + dj * dj + dk * dk) as f64).sqrt();
                    offsets.push(([di, dj, dk], len));
                }
            }
        }
    }

    let mut best = vec![f64::INFINITY; total];
    let mut done = vec![false; total];
    let mut heap = BinaryHeap::new();
    best[src] = 0.0;
    heap.push(Entry(0.0, src));
    while let Some(Entry(d, u)) = heap.pop() {
        if done[u] {
            continue;
        }
        if u == dst {
            return d;
        }
        done[u] = true;
        let c = coord(u);
        for (off, len) in &offsets {
            let ni = c[0] as isize + off[0];
            let nj = c[1] as isize + off[1];
            let nk = c[2] as isize + off[2];
            let r = res as isize;
            if ni < 0 || nj < 0 || nk < 0 || ni >= r || nj >= r || nk >= r {
                continue;
            }
            let v = ((ni * r + nj) * r + nk) as usize;
            if done[v] {
                continue;
            }
            let nd = d + 0.5 * (sqrt_w[u] + sqrt_w[v]) * len;
            if nd < best[v] {
                best[v] = nd;
                heap.push(Entry(nd, v));
            }
        }
    }
    best[dst]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesic::segment_cost;
    use crate::model::ModelParams;
    use crate::potential::build_w;
    use crate::tf_solver::solve;

    #[test]
    fn oracle_properties() {
        let p = ModelParams::new(-0.5, -0.2, 1.0, 0.0).unwrap();
        let w = build_w(&p, &solve(&p).unwrap()).unwrap();
        let (a, b) = (w.state_a, w.state_b.unwrap());
        assert_eq!(graph_oracle_cost(&w, a, a, 20), 0.0);
        let c40 = graph_oracle_cost(&w, a, b, 40);
        let c79 = graph_oracle_cost(&w, a, b, 79);
        assert!((c40 - c79).abs() / c79 < 0.03);
        // with 40 nodes a and b are lattice nodes, and the diagonal segment between them is a lattice line
        let straight = segment_cost(&w, a.to_array(), b.to_array(), 1000);
        assert!(c40 <= straight + 1e-9);
    }
}
