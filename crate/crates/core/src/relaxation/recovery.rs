use serde::Serialize;

use super::{energy_parts, GridField};
use crate::error::{Error, Result};
use crate::geodesic::LayerProfile;
use crate::model::SpinState;
use crate::potential::PotentialW;
use crate::sharp_interface::{Region, SharpConfig};

#[derive(Debug, Clone)]
pub struct RecoveryOptions {
    /// Cutoffs act on the scale ε^γ.
    pub gamma: f64,
    pub newton_tol: f64,
    pub max_newton: usize,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        RecoveryOptions { gamma: 2.0 / 3.0, newton_tol: 1e-13, max_newton: 50 }
    }
}

/// Layer profiles used to glue the construction: the internal one runs from a to b,
/// the boundary ones from 0 to the respective well.
#[derive(Debug, Clone, Copy)]
pub struct RecoveryProfiles<'a> {
    pub internal: Option<&'a LayerProfile>,
    pub boundary_a: &'a LayerProfile,
    pub boundary_b: Option<&'a LayerProfile>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecoveryReport {
    pub eps: f64,
    pub gamma: f64,
    pub nodes: usize,
    /// Coefficients of the two correction bumps.
    pub alpha: [f64; 2],
    pub newton_iters: usize,
    pub energy: f64,
    pub gradient_energy: f64,
    pub potential_energy: f64,
    pub constraint_residuals: [f64; 2],
    pub l2_distance_to_v0: f64,
}

/// ζ = 1 on [−1, 1], 0 outside [−2, 2], smooth in between.
pub fn cutoff(t: f64) -> f64 {
    let s = t.abs() - 1.0;
    if s <= 0.0 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        let (p, q) = ((-1.0 / s).exp(), (-1.0 / (1.0 - s)).exp());
        q / (p + q)
    }
}

fn blend(t: f64, x: [f64; 3], y: [f64; 3]) -> [f64; 3] {
    [t * x[0] + (1.0 - t) * y[0], t * x[1] + (1.0 - t) * y[1], t * x[2] + (1.0 - t) * y[2]]
}

/// Separation checks: interfaces must stay 4ε^γ away from each other and from ∂Ω,
/// and each phase needs room for its correction bump.
fn check_geometry(v0: &SharpConfig, scale: f64) -> Result<()> {
    if let Region::Line { interfaces, .. } = &v0.region {
        let mut marks = vec![0.0];
        marks.extend(interfaces.iter().copied());
        marks.push(1.0);
        for m in marks.windows(2) {
            if m[1] - m[0] <= 4.0 * scale {
                return Err(Error::GeometryTooTight(format!(
                    "segment [{:.4}, {:.4}] is not wider than 4·eps^gamma = {:.4}",
                    m[0],
                    m[1],
                    4.0 * scale
                )));
            }
        }
    }
    Ok(())
}

/// Recovery field v_ε = w_ε + α₁φ + α₂ψ on a uniform grid with `nodes` per side.
///
/// w_ε uses the boundary profile toward the local phase within ε^γ of ∂Ω, the
/// internal profile within ε^γ of the interface and the sharp value elsewhere,
/// with smooth cutoffs ζ(·/ε^γ) between the zones. φ and ψ are the phase values
/// times a plateau that vanishes within 2ε^γ of the interface and of ∂Ω; the
/// coefficients restore mass and magnetization by Newton's method.
pub fn build_recovery_sequence(
    v0: &SharpConfig,
    w: &PotentialW,
    profiles: RecoveryProfiles<'_>,
    eps: f64,
    nodes: usize,
    opts: &RecoveryOptions,
) -> Result<(GridField, RecoveryReport)> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let scale = eps.powf(opts.gamma);
    check_geometry(v0, scale)?;
    let (a, b) = (v0.a, v0.b);
    let mut field = GridField::new(v0.dim(), nodes)?;
    let n = field.len();

    // the internal profile may come in either orientation
    let internal = profiles.internal.map(|p| {
        let (lo, _) = p.t_range();
        let start = SpinState::from_array(p.eval(lo));
        (p, if start.dist(a) <= start.dist(b) { 1.0 } else { -1.0 })
    });

    let mut phi = vec![0.0; n];
    let mut psi = vec![0.0; n];
    for k in 0..n {
        let (x, y) = field.coords(k);
        let is_a = v0.is_a(x, y);
        let sharp = if is_a { a.to_array() } else { b.to_array() };
        let d = v0.signed_distance(x, y);
        let db = field.boundary_distance(k);
        let zi = if d.is_finite() { cutoff(d / scale) } else { 0.0 };
        let inner = match internal {
            Some((p, sign)) if zi > 0.0 => blend(zi, p.eval(sign * d / eps), sharp),
            _ => sharp,
        };
        let zb = cutoff(db / scale);
        let edge = if zb > 0.0 {
            let prof = if is_a { Some(profiles.boundary_a) } else { profiles.boundary_b };
            let prof = prof.ok_or_else(|| Error::InvalidParameter("missing boundary profile for phase b".into()))?;
            blend(zb, prof.eval(db / eps), inner)
        } else {
            inner
        };
        field.values[k] = edge;
        let plateau = (1.0 - zi) * (1.0 - zb);
        if is_a {
            phi[k] = plateau;
        } else {
            psi[k] = plateau;
        }
    }
    field.zero_boundary();

    let a_room = phi.iter().any(|p| *p > 0.0);
    let b_room = psi.iter().any(|p| *p > 0.0);
    // directions of the two corrections; a single phase splits its well into two directions
    let (dir1, dir2, bump2): ([f64; 3], [f64; 3], &Vec<f64>) = match (a_room, b_room) {
        (true, true) => (a.to_array(), b.to_array(), &psi),
        (true, false) => {
            let av = a.to_array();
            ([av[0], 0.0, 0.0], [0.0, av[1], av[2]], &phi)
        }
        (false, true) => {
            let bv = b.to_array();
            ([bv[0], 0.0, 0.0], [0.0, bv[1], bv[2]], &psi)
        }
        (false, false) => {
            return Err(Error::GeometryTooTight(
                "no node lies 2·eps^gamma away from the interface and the boundary".into(),
            ))
        }
    };
    let bump1 = if a_room { &phi } else { &psi };

    let base = field.clone();
    let (mass, mag) = super::flow::targets(w);
    let apply = |al: [f64; 2], out: &mut GridField| {
        for k in 0..n {
            for c in 0..3 {
                out.values[k][c] = base.values[k][c] + al[0] * bump1[k] * dir1[c] + al[1] * bump2[k] * dir2[c];
            }
        }
    };
    let mut al = [0.0; 2];
    let mut iters = 0;
    loop {
        apply(al, &mut field);
        let f = [field.mass() - mass, field.magnetization() - mag];
        if f[0].abs().max(f[1].abs()) < opts.newton_tol * mass.max(1.0) {
            break;
        }
        if iters >= opts.max_newton {
            return Err(Error::NoConvergence(format!("recovery correction residual {:?}", f)));
        }
        // ∂N/∂α_i = 2∫u·v_i, ∂M/∂α_i = 2∫(u₁v_i,₁ − u₋₁v_i,₋₁)
        let mut jac = [[0.0; 2]; 2];
        for k in 0..n {
            let (u, wk) = (field.values[k], field.weight(k));
            let v1 = [bump1[k] * dir1[0], bump1[k] * dir1[1], bump1[k] * dir1[2]];
            let v2 = [bump2[k] * dir2[0], bump2[k] * dir2[1], bump2[k] * dir2[2]];
            jac[0][0] += 2.0 * wk * (u[0] * v1[0] + u[1] * v1[1] + u[2] * v1[2]);
            jac[0][1] += 2.0 * wk * (u[0] * v2[0] + u[1] * v2[1] + u[2] * v2[2]);
            jac[1][0] += 2.0 * wk * (u[0] * v1[0] - u[2] * v1[2]);
            jac[1][1] += 2.0 * wk * (u[0] * v2[0] - u[2] * v2[2]);
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let size = jac.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(det.abs() > 1e-12 * size * size) {
            return Err(Error::JacobianSingular);
        }
        al[0] -= (jac[1][1] * f[0] - jac[0][1] * f[1]) / det;
        al[1] -= (jac[0][0] * f[1] - jac[1][0] * f[0]) / det;
        iters += 1;
    }
    field.abs_in_place();

    let parts = energy_parts(&field, w, eps);
    let report = RecoveryReport {
        eps,
        gamma: opts.gamma,
        nodes,
        alpha: al,
        newton_iters: iters,
        energy: parts.total(),
        gradient_energy: parts.gradient,
        potential_energy: parts.potential,
        constraint_residuals: [field.mass() - mass, field.magnetization() - mag],
        l2_distance_to_v0: field.l2_distance_to(|x, y| v0.value(x, y)),
    };
    Ok((field, report))
}
