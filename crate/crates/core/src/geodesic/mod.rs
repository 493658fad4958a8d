//! Degenerate geodesic distance g(ξ₀, ξ₁) = inf ∫√W |γ′| and the associated layer profiles.

mod lattice;
mod profile;

pub use lattice::graph_oracle_cost;
pub use profile::{
    boundary_profile, boundary_profile_with, internal_profile, internal_profile_with, LayerProfile, Polyline,
    ProfileOptions,
};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SpinState;
use crate::optim::lbfgs;
use crate::potential::PotentialW;

pub const DEFAULT_DELTAS: [f64; 5] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

#[derive(Debug, Clone, Serialize)]
pub struct GeodesicPath {
    pub samples: Vec<SpinState>,
    /// ∫√W |γ′| along the polyline, without regularization.
    pub cost: f64,
    pub delta_used: f64,
    /// Regularized cost reached for each δ of the schedule.
    pub delta_costs: Vec<(f64, f64)>,
    /// Final cost from each initial path, in the order they were tried.
    pub candidate_costs: Vec<f64>,
    /// Set when different initial paths settle on geometrically distinct geodesics.
    pub multiple_geodesics: bool,
}

impl GeodesicPath {
    pub fn points(&self) -> Vec<[f64; 3]> {
        self.samples.iter().map(|s| s.to_array()).collect()
    }

    pub fn length(&self) -> f64 {
        self.samples.windows(2).map(|w| w[0].dist(w[1])).sum()
    }
}

#[derive(Debug, Clone)]
pub struct GeodesicOptions {
    pub nodes: usize,
    pub delta_schedule: Vec<f64>,
    /// Outer rounds of (L-BFGS, reflection, reparametrization) per δ.
    pub max_rounds: usize,
    pub lbfgs_iters: usize,
    /// Relative cost change between rounds accepted as converged.
    pub tol: f64,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        GeodesicOptions {
            nodes: 128,
            delta_schedule: DEFAULT_DELTAS.to_vec(),
            max_rounds: 100,
            lbfgs_iters: 100,
            tol: 1e-10,
        }
    }
}

/// Σ ½(f_i + f_{i+1})|P_{i+1} − P_i| with f = √(W + δ).
pub fn path_cost_trapezoid(w: &PotentialW, pts: &[[f64; 3]], delta: f64) -> f64 {
    let f: Vec<f64> = pts.iter().map(|p| (w.eval(*p).max(0.0) + delta).sqrt()).collect();
    pts.windows(2).zip(f.windows(2)).map(|(p, fv)| 0.5 * (fv[0] + fv[1]) * dist(p[0], p[1])).sum()
}

/// Un-regularized cost with Simpson's rule on every segment.
pub fn path_cost(w: &PotentialW, pts: &[[f64; 3]]) -> f64 {
    let sw = |p: [f64; 3]| w.eval(p).max(0.0).sqrt();
    pts.windows(2)
        .map(|p| {
            let mid = [0.5 * (p[0][0] + p[1][0]), 0.5 * (p[0][1] + p[1][1]), 0.5 * (p[0][2] + p[1][2])];
            dist(p[0], p[1]) * (sw(p[0]) + 4.0 * sw(mid) + sw(p[1])) / 6.0
        })
        .sum()
}

/// ∫√W along the straight segment, by the composite midpoint rule with `pieces` pieces.
pub fn segment_cost(w: &PotentialW, a: [f64; 3], b: [f64; 3], pieces: usize) -> f64 {
    let len = dist(a, b);
    let h = 1.0 / pieces as f64;
    (0..pieces)
        .map(|k| {
            let t = (k as f64 + 0.5) * h;
            w.eval(lerp(a, b, t)).max(0.0).sqrt()
        })
        .sum::<f64>()
        * h
        * len
}

pub(crate) fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

pub(crate) fn lerp(a: [f64; 3], b: [f64; 3], t: f64) -> [f64; 3] {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2])]
}

/// Redistribute nodes at equal arclength along the polyline.
pub fn reparametrize(pts: &[[f64; 3]]) -> Vec<[f64; 3]> {
    let n = pts.len();
    let mut cum = vec![0.0; n];
    for i in 1..n {
        cum[i] = cum[i - 1] + dist(pts[i - 1], pts[i]);
    }
    let total = cum[n - 1];
    if total == 0.0 {
        return pts.to_vec();
    }
    let mut out = Vec::with_capacity(n);
    out.push(pts[0]);
    let mut seg = 0;
    for k in 1..n - 1 {
        let target = total * k as f64 / (n - 1) as f64;
        while seg + 1 < n - 1 && cum[seg + 1] < target {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let t = if len > 0.0 { (target - cum[seg]) / len } else { 0.0 };
        out.push(lerp(pts[seg], pts[seg + 1], t));
    }
    out.push(pts[n - 1]);
    out
}

fn cost_and_grad(w: &PotentialW, pts: &[[f64; 3]], delta: f64, grad: &mut [f64]) -> f64 {
    let n = pts.len();
    let f: Vec<f64> = pts.iter().map(|p| (w.eval(*p).max(0.0) + delta).sqrt()).collect();
    let mut len = vec![0.0; n - 1];
    let mut cost = 0.0;
    for i in 0..n - 1 {
        len[i] = dist(pts[i], pts[i + 1]);
        cost += 0.5 * (f[i] + f[i + 1]) * len[i];
    }
    for i in 1..n - 1 {
        let gw = w.grad(pts[i]);
        let wsum = 0.5 * (len[i - 1] + len[i]) / (2.0 * f[i]);
        let fl = 0.5 * (f[i - 1] + f[i]);
        let fr = 0.5 * (f[i] + f[i + 1]);
        for k in 0..3 {
            let mut g = gw[k] * wsum;
            if len[i - 1] > 0.0 {
                g += fl * (pts[i][k] - pts[i - 1][k]) / len[i - 1];
            }
            if len[i] > 0.0 {
                g -= fr * (pts[i + 1][k] - pts[i][k]) / len[i];
            }
            grad[3 * (i - 1) + k] = g;
        }
    }
    cost
}

fn spacing_ratio(pts: &[[f64; 3]]) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for p in pts.windows(2) {
        let d = dist(p[0], p[1]);
        lo = lo.min(d);
        hi = hi.max(d);
    }
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

fn abs_pts(pts: &mut [[f64; 3]]) {
    for p in pts.iter_mut() {
        for c in p.iter_mut() {
            *c = c.abs();
        }
    }
}

fn initial_paths(xi0: [f64; 3], xi1: [f64; 3], nodes: usize, scale: f64) -> Vec<Vec<[f64; 3]>> {
    let lift = 0.5 * scale;
    let c = 1.0 / 3f64.sqrt();
    let bends: [[f64; 3]; 5] =
        [[0.0; 3], [0.0, lift, 0.0], [lift, 0.0, 0.0], [0.0, 0.0, lift], [c * lift, c * lift, c * lift]];
    let mut out: Vec<Vec<[f64; 3]>> = bends
        .iter()
        .map(|b| {
            (0..nodes)
                .map(|i| {
                    let t = i as f64 / (nodes - 1) as f64;
                    let p = lerp(xi0, xi1, t);
                    let s = 4.0 * t * (1.0 - t);
                    [p[0] + s * b[0], p[1] + s * b[1], p[2] + s * b[2]]
                })
                .collect()
        })
        .collect();
    // a path pulled toward the origin
    out.push(
        (0..nodes)
            .map(|i| {
                let t = i as f64 / (nodes - 1) as f64;
                let p = lerp(xi0, xi1, t);
                let s = 1.0 - 0.6 * 4.0 * t * (1.0 - t);
                p.map(|x| x * s)
            })
            .collect(),
    );
    out
}

struct Relaxed {
    pts: Vec<[f64; 3]>,
    delta_costs: Vec<(f64, f64)>,
    cost: f64,
}

/// Alternate L-BFGS runs with reflection into the octant until the regularized cost stalls.
/// Returns the best path seen, its cost and the last relative gain.
fn relax_stage(
    w: &PotentialW,
    mut pts: Vec<[f64; 3]>,
    delta: f64,
    opts: &GeodesicOptions,
) -> (Vec<[f64; 3]>, f64, bool, f64) {
    let n = pts.len();
    let mut best_pts = pts.clone();
    let mut best = path_cost_trapezoid(w, &pts, delta);
    let mut last_gain = f64::INFINITY;
    let mut quiet = 0;
    let mut buf = vec![[0.0; 3]; n];
    for _ in 0..opts.max_rounds {
        let x0: Vec<f64> = pts[1..n - 1].iter().flat_map(|p| p.iter().copied()).collect();
        let (a, b) = (pts[0], pts[n - 1]);
        let res = lbfgs(
            |x, g| {
                buf[0] = a;
                buf[n - 1] = b;
                for i in 1..n - 1 {
                    buf[i] = [x[3 * (i - 1)], x[3 * (i - 1) + 1], x[3 * (i - 1) + 2]];
                }
                cost_and_grad(w, &buf, delta, g)
            },
            x0,
            opts.lbfgs_iters,
            10,
            1e-14,
        );
        for (p, x) in pts[1..n - 1].iter_mut().zip(res.x.chunks_exact(3)) {
            *p = [x[0], x[1], x[2]];
        }
        abs_pts(&mut pts);
        if spacing_ratio(&pts) > 2.0 {
            pts = reparametrize(&pts);
        }
        let c = path_cost_trapezoid(w, &pts, delta);
        last_gain = ((best - c) / c.max(1e-300)).max(0.0);
        if c < best {
            best = c;
            best_pts = pts.clone();
        }
        quiet = if last_gain <= opts.tol { quiet + 1 } else { 0 };
        if quiet >= 2 {
            return (best_pts, best, true, last_gain);
        }
    }
    (best_pts, best, false, last_gain)
}

fn kicked(pts: &[[f64; 3]], dir: [f64; 3], amp: f64) -> Vec<[f64; 3]> {
    let n = pts.len();
    pts.iter()
        .enumerate()
        .map(|(i, p)| {
            if i == 0 || i == n - 1 {
                return *p;
            }
            let bump = amp * (std::f64::consts::PI * i as f64 / (n - 1) as f64).sin();
            [p[0] + bump * dir[0], p[1] + bump * dir[1], p[2] + bump * dir[2]]
        })
        .collect()
}

fn relax(w: &PotentialW, mut pts: Vec<[f64; 3]>, opts: &GeodesicOptions) -> Result<Relaxed> {
    let mut delta_costs = Vec::with_capacity(opts.delta_schedule.len());
    abs_pts(&mut pts);
    pts = reparametrize(&pts);
    let scale = pts.iter().map(|p| dist(*p, [0.0; 3])).fold(0.0, f64::max).max(1e-12);
    let c = 1.0 / 3f64.sqrt();
    // kicks off invariant planes such as u₀ = 0, where saddle paths otherwise stay
    let kicks = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [c, c, c]];
    for &delta in &opts.delta_schedule {
        let (mut best_pts, mut best, converged, gain) = relax_stage(w, pts.clone(), delta, opts);
        if !converged && gain > 1e-6 {
            return Err(Error::NoConvergence(format!(
                "relative cost change {gain:e} at delta = {delta:e} after {} rounds",
                opts.max_rounds
            )));
        }
        for dir in kicks {
            let (p, cost, _, _) = relax_stage(w, kicked(&best_pts, dir, 0.1 * scale), delta, opts);
            if cost < best * (1.0 - 1e-7) {
                best = cost;
                best_pts = p;
            }
        }
        pts = best_pts;
        delta_costs.push((delta, best));
    }
    let pts = reparametrize(&pts);
    let cost = path_cost(w, &pts);
    Ok(Relaxed { pts, delta_costs, cost })
}

/// Minimal ∫√W |γ′| between two states, from several initial paths relaxed along the δ schedule.
pub fn geodesic_cost(w: &PotentialW, xi0: SpinState, xi1: SpinState, opts: &GeodesicOptions) -> Result<GeodesicPath> {
    if opts.nodes < 3 {
        return Err(Error::InvalidParameter("a path needs at least 3 nodes".into()));
    }
    if opts.delta_schedule.is_empty()
        || opts.delta_schedule.iter().any(|d| !(*d > 0.0))
        || opts.delta_schedule.windows(2).any(|d| d[1] >= d[0])
    {
        return Err(Error::InvalidParameter("delta schedule must be positive and decreasing".into()));
    }
    if !xi0.is_nonnegative() || !xi1.is_nonnegative() {
        return Err(Error::InvalidParameter("endpoints must lie in the nonnegative octant".into()));
    }
    let delta_used = *opts.delta_schedule.last().unwrap();
    if xi0 == xi1 {
        return Ok(GeodesicPath {
            samples: vec![xi0; opts.nodes],
            cost: 0.0,
            delta_used,
            delta_costs: opts.delta_schedule.iter().map(|d| (*d, 0.0)).collect(),
            candidate_costs: vec![0.0],
            multiple_geodesics: false,
        });
    }
    // fixed orientation so that g(a, b) and g(b, a) come from the same computation
    let reversed = xi1.to_array() < xi0.to_array();
    let (p0, p1) = if reversed { (xi1.to_array(), xi0.to_array()) } else { (xi0.to_array(), xi1.to_array()) };
    let scale = xi0.norm().max(xi1.norm()).max(w.params.n.sqrt());
    let starts = initial_paths(p0, p1, opts.nodes, scale);
    let results: Vec<Result<Relaxed>> = starts.into_par_iter().map(|s| relax(w, s, opts)).collect();

    let mut ok = Vec::new();
    let mut first_err = None;
    for r in results {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    if ok.is_empty() {
        return Err(first_err.unwrap());
    }
    let best_idx = (0..ok.len()).min_by(|&i, &j| ok[i].cost.partial_cmp(&ok[j].cost).unwrap()).unwrap();
    let candidate_costs: Vec<f64> = ok.iter().map(|r| r.cost).collect();
    let best = &ok[best_idx];
    let tol = 1e-2 * scale;
    let multiple_geodesics = ok.iter().any(|r| {
        let sep = r.pts.iter().zip(&best.pts).map(|(p, q)| dist(*p, *q)).fold(0.0, f64::max);
        sep > tol && (r.cost - best.cost) <= 1e-3 * best.cost
    });

    let mut pts = best.pts.clone();
    if reversed {
        pts.reverse();
    }
    Ok(GeodesicPath {
        samples: pts.into_iter().map(SpinState::from_array).collect(),
        cost: best.cost,
        delta_used,
        delta_costs: best.delta_costs.clone(),
        candidate_costs,
        multiple_geodesics,
    })
}

/// Surface tensions of a calibrated potential: g(a, b), g(0, a) and g(0, b).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tensions {
    pub g_ab: Option<f64>,
    pub g_0a: f64,
    pub g_0b: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TensionPaths {
    pub ab: Option<GeodesicPath>,
    pub zero_a: GeodesicPath,
    pub zero_b: Option<GeodesicPath>,
}

impl TensionPaths {
    pub fn tensions(&self) -> Tensions {
        Tensions {
            g_ab: self.ab.as_ref().map(|p| p.cost),
            g_0a: self.zero_a.cost,
            g_0b: self.zero_b.as_ref().map(|p| p.cost),
        }
    }
}

/// The geodesics between the wells and from the origin to each well, run concurrently.
pub fn surface_tensions(w: &PotentialW, opts: &GeodesicOptions) -> Result<TensionPaths> {
    let a = w.state_a;
    let (zero_a, rest) = rayon::join(
        || geodesic_cost(w, SpinState::ZERO, a, opts),
        || match w.state_b {
            Some(b) => {
                let (ab, zb) =
                    rayon::join(|| geodesic_cost(w, a, b, opts), || geodesic_cost(w, SpinState::ZERO, b, opts));
                Ok::<_, Error>((Some(ab?), Some(zb?)))
            }
            None => Ok((None, None)),
        },
    );
    let (ab, zero_b) = rest?;
    Ok(TensionPaths { ab, zero_a: zero_a?, zero_b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use crate::potential::build_w;
    use crate::tf_solver::solve;

    fn ms_ms() -> PotentialW {
        let p = ModelParams::new(-0.5, -0.2, 1.0, 0.0).unwrap();
        build_w(&p, &solve(&p).unwrap()).unwrap()
    }

    fn quick() -> GeodesicOptions {
        GeodesicOptions { nodes: 48, ..Default::default() }
    }

    #[test]
    fn reparametrization_is_uniform() {
        let pts = vec![[0.0, 0.0, 0.0], [0.1, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0]];
        let r = reparametrize(&pts);
        let expect = [[0.0, 0.0, 0.0], [2.0 / 3.0, 0.0, 0.0], [1.0, 1.0 / 3.0, 0.0], [1.0, 1.0, 0.0]];
        for (p, q) in r.iter().zip(&expect) {
            assert!(dist(*p, *q) < 1e-12);
        }
    }

    #[test]
    fn analytic_gradient_matches_differences() {
        let w = ms_ms();
        let pts: Vec<[f64; 3]> = (0..10)
            .map(|i| {
                let t = i as f64 / 9.0;
                [1.0 - t, 0.3 * (t * (1.0 - t)).sqrt() + 0.01, t]
            })
            .collect();
        let mut g = vec![0.0; 24];
        cost_and_grad(&w, &pts, 1e-3, &mut g);
        for k in 0..24 {
            let mut up = pts.clone();
            let mut dn = pts.clone();
            up[1 + k / 3][k % 3] += 1e-6;
            dn[1 + k / 3][k % 3] -= 1e-6;
            let fd = (path_cost_trapezoid(&w, &up, 1e-3) - path_cost_trapezoid(&w, &dn, 1e-3)) / 2e-6;
            assert!((fd - g[k]).abs() < 1e-6, "{k}: {fd} vs {}", g[k]);
        }
    }

    #[test]
    fn identical_endpoints_cost_nothing() {
        let w = ms_ms();
        let a = w.state_a;
        assert_eq!(geodesic_cost(&w, a, a, &quick()).unwrap().cost, 0.0);
    }

    #[test]
    fn boundary_geodesic_on_axis() {
        // √W = (1 − u₁²)/2 on the u₁ axis, so g(0, a) = 1/3
        let w = ms_ms();
        let g = geodesic_cost(&w, SpinState::ZERO, w.state_a, &quick()).unwrap();
        assert!((g.cost - 1.0 / 3.0).abs() < 1e-4, "{}", g.cost);
    }

    #[test]
    fn reversal_symmetric_and_monotone_in_delta() {
        let w = ms_ms();
        let (a, b) = (w.state_a, w.state_b.unwrap());
        let ab = geodesic_cost(&w, a, b, &quick()).unwrap();
        let ba = geodesic_cost(&w, b, a, &quick()).unwrap();
        assert!((ab.cost - ba.cost).abs() < 1e-8);
        assert_eq!(ab.samples[0], a);
        assert_eq!(*ab.samples.last().unwrap(), b);
        for d in ab.delta_costs.windows(2) {
            assert!(d[1].1 <= d[0].1);
        }
        let straight = segment_cost(&w, a.to_array(), b.to_array(), 2000);
        assert!(ab.cost < straight);
    }
}
