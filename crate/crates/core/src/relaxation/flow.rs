use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{energy_parts, projection_scales, GridField};
use crate::error::{Error, Result};
use crate::model::SpinState;
use crate::potential::PotentialW;
use crate::sharp_interface::{candidates_1d, SharpConfig};

#[derive(Debug, Clone)]
pub struct FlowOptions {
    pub max_iters: usize,
    /// Relative energy decrease over `window` accepted steps that counts as converged.
    pub tol: f64,
    pub window: usize,
    /// Time step is `step_factor`·h²/(ε·dim).
    pub step_factor: f64,
    /// Keep every k-th accepted energy in the trace (the last one is always kept).
    pub trace_every: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { max_iters: 2_000_000, tol: 1e-9, window: 200, step_factor: 0.2, trace_every: 100 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowReport {
    pub eps: f64,
    pub dim: u8,
    pub nodes: usize,
    pub h: f64,
    pub time_step: f64,
    /// (iteration, energy) after accepted steps.
    pub energy_trace: Vec<(usize, f64)>,
    pub final_energy: f64,
    pub gradient_energy: f64,
    pub potential_energy: f64,
    /// Discrete mass and magnetization minus their targets.
    pub constraint_residuals: [f64; 2],
    /// 1D: zero crossings of |u − a| − |u − b| between interior nodes.
    pub interface_positions: Vec<f64>,
    /// 2D: 1 where |u − a| < |u − b|, row-major over all nodes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<u8>>,
    pub l2_distance_to_tf: f64,
    pub iterations: usize,
    pub rejected_steps: usize,
    pub converged: bool,
    /// Set when step halving could not find a decrease before convergence.
    pub step_collapse: bool,
}

/// Targets (N, M) of the flow on the unit domain.
pub fn targets(w: &PotentialW) -> (f64, f64) {
    (w.params.n, w.params.m)
}

/// L² gradient of the discrete energy at interior nodes (zero on the boundary).
fn energy_gradient(field: &GridField, w: &PotentialW, eps: f64, out: &mut [[f64; 3]]) {
    let coef = 2.0 * eps / (field.h * field.h);
    for (k, g) in out.iter_mut().enumerate() {
        if field.is_boundary(k) {
            *g = [0.0; 3];
            continue;
        }
        let u = field.values[k];
        let (left, right) = (field.values[k - 1], field.values[k + 1]);
        let gw = w.grad(u);
        for c in 0..3 {
            let mut lap = 2.0 * u[c] - left[c] - right[c];
            if field.dim == 2 {
                lap += 2.0 * u[c] - field.values[k - field.nx][c] - field.values[k + field.nx][c];
            }
            g[c] = coef * lap + gw[c] / eps;
        }
    }
}

/// Remove the components of `g` along the constraint normals u and (u₁, 0, −u₋₁).
fn project_out_normals(field: &GridField, g: &mut [[f64; 3]]) {
    let (mut nn, mut nm, mut mm, mut gn, mut gm) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (k, u) in field.values.iter().enumerate() {
        let wk = field.weight(k);
        let m = [u[0], 0.0, -u[2]];
        let gk = g[k];
        nn += wk * (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
        nm += wk * (u[0] * m[0] + u[2] * m[2]);
        mm += wk * (m[0] * m[0] + m[2] * m[2]);
        gn += wk * (gk[0] * u[0] + gk[1] * u[1] + gk[2] * u[2]);
        gm += wk * (gk[0] * m[0] + gk[2] * m[2]);
    }
    let det = nn * mm - nm * nm;
    let (l1, l2) = if det > 1e-12 * nn * mm.max(1e-300) {
        ((gn * mm - gm * nm) / det, (gm * nn - gn * nm) / det)
    } else if nn > 0.0 {
        (gn / nn, 0.0)
    } else {
        (0.0, 0.0)
    };
    for (k, u) in field.values.iter().enumerate() {
        g[k][0] -= l1 * u[0] + l2 * u[0];
        g[k][1] -= l1 * u[1];
        g[k][2] -= l1 * u[2] - l2 * u[2];
    }
}

fn apply_scales(field: &mut GridField, s: [f64; 3]) {
    for v in &mut field.values {
        for c in 0..3 {
            v[c] *= s[c];
        }
    }
}

/// Level function |u − a| − |u − b|, negative on the a side.
fn level(u: [f64; 3], a: SpinState, b: SpinState) -> f64 {
    let u = SpinState::from_array(u);
    u.dist(a) - u.dist(b)
}

pub fn interface_positions_1d(field: &GridField, a: SpinState, b: SpinState) -> Vec<f64> {
    let mut out = Vec::new();
    if field.dim != 1 {
        return out;
    }
    for k in 1..field.nx.saturating_sub(2) {
        let (f0, f1) = (level(field.values[k], a, b), level(field.values[k + 1], a, b));
        if (f0 < 0.0) != (f1 < 0.0) {
            let t = f0 / (f0 - f1);
            out.push((k as f64 + t) * field.h);
        }
    }
    out
}

pub fn labels_2d(field: &GridField, a: SpinState, b: SpinState) -> Vec<u8> {
    field.values.iter().map(|u| (level(*u, a, b) < 0.0) as u8).collect()
}

/// L² distance to the closest sharp configuration taking the values a and b, among
/// the 1D arrangements with a-measure r and the one read off the field's own labels.
pub fn distance_to_sharp(field: &GridField, w: &PotentialW) -> f64 {
    let a = w.state_a;
    let Some(b) = w.state_b else {
        return field.l2_distance_to(|_, _| a.to_array());
    };
    let own = field.l2_distance_to(|x, y| {
        let k = ((y / field.h).round() as usize) * field.nx + (x / field.h).round() as usize;
        if level(field.values[k], a, b) < 0.0 {
            a.to_array()
        } else {
            b.to_array()
        }
    });
    if field.dim != 1 || !(w.r > 0.0 && w.r < 1.0) {
        return own;
    }
    let mut best = own;
    if let Ok(cands) = candidates_1d(w.r, a, b) {
        for c in cands {
            best = best.min(field.l2_distance_to(|x, y| c.value(x, y)));
        }
    }
    best
}

/// Constrained explicit gradient flow for the discrete G_ε.
///
/// Each step moves against the energy gradient with the constraint normals removed,
/// reflects to nonnegative values, rescales components onto (N, M) and is accepted
/// only if the energy does not increase; otherwise the step is halved.
pub fn minimize_geps(
    init: &GridField,
    w: &PotentialW,
    eps: f64,
    opts: &FlowOptions,
) -> Result<(GridField, FlowReport)> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let (mass, mag) = targets(w);
    let mut u = init.clone();
    u.abs_in_place();
    u.zero_boundary();
    let s = projection_scales(&u, mass, mag)?;
    apply_scales(&mut u, s);

    let tau0 = opts.step_factor * u.h * u.h / (eps * u.dim as f64);
    let tau_min = tau0 * 1e-10;
    let mut tau = tau0;
    let mut energy = energy_parts(&u, w, eps).total();
    let mut trace = vec![(0usize, energy)];
    let mut history = std::collections::VecDeque::with_capacity(opts.window + 1);
    history.push_back(energy);
    let mut grad = vec![[0.0; 3]; u.len()];
    let mut trial = u.clone();
    let (mut converged, mut collapse, mut rejected) = (false, false, 0usize);
    let mut iters = 0;

    while iters < opts.max_iters {
        iters += 1;
        energy_gradient(&u, w, eps, &mut grad);
        project_out_normals(&u, &mut grad);
        let mut accepted = false;
        while tau >= tau_min {
            for (k, v) in trial.values.iter_mut().enumerate() {
                let (x, g) = (u.values[k], grad[k]);
                *v = [(x[0] - tau * g[0]).abs(), (x[1] - tau * g[1]).abs(), (x[2] - tau * g[2]).abs()];
            }
            trial.zero_boundary();
            match projection_scales(&trial, mass, mag) {
                Ok(s) => apply_scales(&mut trial, s),
                Err(_) => {
                    tau *= 0.5;
                    rejected += 1;
                    continue;
                }
            }
            let e = energy_parts(&trial, w, eps).total();
            if e <= energy {
                std::mem::swap(&mut u, &mut trial);
                energy = e;
                accepted = true;
                tau = (tau * 1.1).min(tau0);
                break;
            }
            tau *= 0.5;
            rejected += 1;
        }
        if !accepted {
            let spread = history.front().map_or(0.0, |e0| (e0 - energy) / energy.abs().max(1e-300));
            converged = spread < opts.tol;
            collapse = !converged;
            break;
        }
        if iters % opts.trace_every.max(1) == 0 {
            trace.push((iters, energy));
        }
        history.push_back(energy);
        if history.len() > opts.window {
            let e0 = history.pop_front().unwrap();
            if (e0 - energy) / energy.abs().max(1e-300) < opts.tol {
                converged = true;
                break;
            }
        }
    }
    if trace.last().map(|t| t.0) != Some(iters) {
        trace.push((iters, energy));
    }
    let parts = energy_parts(&u, w, eps);
    let (a, b) = (w.state_a, w.state_b.unwrap_or(w.state_a));
    let report = FlowReport {
        eps,
        dim: u.dim,
        nodes: u.nx,
        h: u.h,
        time_step: tau0,
        energy_trace: trace,
        final_energy: parts.total(),
        gradient_energy: parts.gradient,
        potential_energy: parts.potential,
        constraint_residuals: [u.mass() - mass, u.magnetization() - mag],
        interface_positions: if w.state_b.is_some() { interface_positions_1d(&u, a, b) } else { Vec::new() },
        labels: (u.dim == 2).then(|| labels_2d(&u, a, b)),
        l2_distance_to_tf: distance_to_sharp(&u, w),
        iterations: iters,
        rejected_steps: rejected,
        converged,
        step_collapse: collapse,
    };
    Ok((u, report))
}

/// Mollified sharp configuration with a boundary ramp and a seeded relative
/// perturbation of size `noise`, projected onto the constraints of `w`.
pub fn initial_field(
    config: &SharpConfig,
    w: &PotentialW,
    nodes: usize,
    eps: f64,
    noise: f64,
    seed: u64,
) -> Result<GridField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = (config.a.to_array(), config.b.to_array());
    let mut g = GridField::new(config.dim(), nodes)?;
    for k in 0..g.len() {
        let (x, y) = g.coords(k);
        let d = config.signed_distance(x, y);
        let s = if d.is_finite() {
            0.5 * (1.0 - (d / (2.0 * eps)).tanh())
        } else if d < 0.0 {
            1.0
        } else {
            0.0
        };
        let ramp = (g.boundary_distance(k) / eps).tanh();
        let scale = a.iter().chain(b.iter()).fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
        for c in 0..3 {
            let v = ramp * (s * a[c] + (1.0 - s) * b[c]);
            g.values[k][c] = (v + noise * scale * rng.gen_range(-1.0..1.0)).abs();
        }
    }
    g.zero_boundary();
    let (mass, mag) = targets(w);
    let s = projection_scales(&g, mass, mag)?;
    apply_scales(&mut g, s);
    Ok(g)
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuationRow {
    pub eps: f64,
    pub energy: f64,
    pub g0: f64,
    pub gap: f64,
    pub l2_distance_to_tf: f64,
    pub interface_positions: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimize along a decreasing ε schedule, each run warm-started from the previous one.
pub fn continuation_in_eps(
    init: &GridField,
    w: &PotentialW,
    eps_list: &[f64],
    g0: f64,
    opts: &FlowOptions,
) -> Result<(GridField, Vec<ContinuationRow>)> {
    if eps_list.windows(2).any(|e| e[1] >= e[0]) {
        return Err(Error::InvalidParameter("eps list must be strictly decreasing".into()));
    }
    let mut field = init.clone();
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let (f, rep) = minimize_geps(&field, w, eps, opts)?;
        rows.push(ContinuationRow {
            eps,
            energy: rep.final_energy,
            g0,
            gap: rep.final_energy - g0,
            l2_distance_to_tf: rep.l2_distance_to_tf,
            interface_positions: rep.interface_positions.clone(),
            iterations: rep.iterations,
            converged: rep.converged,
        });
        field = f;
    }
    Ok((field, rows))
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

    #[test]
    fn gradient_matches_finite_differences() {
        let w = ms_ms();
        let eps = 0.1;
        let g = GridField::from_fn(2, 9, |x, y| [0.5 + x * y, 0.2 + 0.1 * x, 0.9 - y * y]).unwrap();
        let mut grad = vec![[0.0; 3]; g.len()];
        energy_gradient(&g, &w, eps, &mut grad);
        let k = 4 * 9 + 3;
        #[allow(clippy::needless_range_loop)]
        for c in 0..3 {
            let step = 1e-6;
            let (mut gp, mut gm) = (g.clone(), g.clone());
            gp.values[k][c] += step;
            gm.values[k][c] -= step;
            let fd = (energy_parts(&gp, &w, eps).total() - energy_parts(&gm, &w, eps).total()) / (2.0 * step);
            let analytic = grad[k][c] * g.weight(k);
            assert!((fd - analytic).abs() < 1e-6 * analytic.abs().max(1.0), "{c}: {fd} {analytic}");
        }
    }

    #[test]
    fn flow_is_monotone_and_conserves() {
        let w = ms_ms();
        let cfg = SharpConfig::line(vec![0.5], true, w.state_a, w.state_b.unwrap()).unwrap();
        let init = initial_field(&cfg, &w, 129, 0.08, 0.05, 7).unwrap();
        let opts = FlowOptions { max_iters: 3000, trace_every: 1, ..Default::default() };
        let (f, rep) = minimize_geps(&init, &w, 0.08, &opts).unwrap();
        assert!(rep.energy_trace.windows(2).all(|t| t[1].1 <= t[0].1));
        assert!(rep.constraint_residuals.iter().all(|r| r.abs() < 1e-10));
        assert!(f.values.iter().all(|v| v.iter().all(|x| *x >= 0.0)));
        assert_eq!(rep.interface_positions.len(), 1);
        assert!((rep.interface_positions[0] - 0.5).abs() < 2.0 * f.h, "{:?}", rep.interface_positions);
    }
}
