//! Grid discretization of G_ε = ∫ ε|∇u|² + W(u)/ε with zero Dirichlet data,
//! constrained gradient flow and recovery-sequence construction.

mod flow;
mod recovery;

pub use flow::{
    continuation_in_eps, distance_to_sharp, initial_field, interface_positions_1d, labels_2d, minimize_geps, targets,
    ContinuationRow, FlowOptions, FlowReport,
};
pub use recovery::{build_recovery_sequence, cutoff, RecoveryOptions, RecoveryProfiles, RecoveryReport};

use std::io::Write;

use crate::error::{Error, Result};
use crate::potential::PotentialW;

/// Nodal values on the unit interval or unit square, boundary nodes included.
/// Nodes are stored row-major with x fastest; `ny == 1` in one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub dim: u8,
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub values: Vec<[f64; 3]>,
}

impl GridField {
    pub fn new_1d(nodes: usize) -> Result<Self> {
        if nodes < 3 {
            return Err(Error::InvalidParameter(format!("need at least 3 nodes, got {nodes}")));
        }
        Ok(GridField { dim: 1, nx: nodes, ny: 1, h: 1.0 / (nodes - 1) as f64, values: vec![[0.0; 3]; nodes] })
    }

    pub fn new_2d(nodes: usize) -> Result<Self> {
        if nodes < 3 {
            return Err(Error::InvalidParameter(format!("need at least 3 nodes per side, got {nodes}")));
        }
        Ok(GridField {
            dim: 2,
            nx: nodes,
            ny: nodes,
            h: 1.0 / (nodes - 1) as f64,
            values: vec![[0.0; 3]; nodes * nodes],
        })
    }

    pub fn new(dim: u8, nodes: usize) -> Result<Self> {
        match dim {
            1 => Self::new_1d(nodes),
            2 => Self::new_2d(nodes),
            _ => Err(Error::InvalidParameter(format!("dim must be 1 or 2, got {dim}"))),
        }
    }

    /// Fill every node from a function of position, then zero the boundary.
    pub fn from_fn<F: Fn(f64, f64) -> [f64; 3]>(dim: u8, nodes: usize, f: F) -> Result<Self> {
        let mut g = Self::new(dim, nodes)?;
        for k in 0..g.len() {
            let (x, y) = g.coords(k);
            g.values[k] = f(x, y);
        }
        g.zero_boundary();
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn coords(&self, k: usize) -> (f64, f64) {
        let (i, j) = (k % self.nx, k / self.nx);
        (i as f64 * self.h, if self.dim == 1 { 0.0 } else { j as f64 * self.h })
    }

    pub fn is_boundary(&self, k: usize) -> bool {
        let (i, j) = (k % self.nx, k / self.nx);
        i == 0 || i + 1 == self.nx || (self.dim == 2 && (j == 0 || j + 1 == self.ny))
    }

    /// Distance from node `k` to the domain boundary.
    pub fn boundary_distance(&self, k: usize) -> f64 {
        let (x, y) = self.coords(k);
        let d = x.min(1.0 - x);
        if self.dim == 1 {
            d
        } else {
            d.min(y).min(1.0 - y)
        }
    }

    /// Trapezoid quadrature weight; it sums to |Ω| = 1.
    pub fn weight(&self, k: usize) -> f64 {
        let (i, j) = (k % self.nx, k / self.nx);
        let edge = |idx: usize, n: usize| if idx == 0 || idx + 1 == n { 0.5 } else { 1.0 };
        let mut w = self.h * edge(i, self.nx);
        if self.dim == 2 {
            w *= self.h * edge(j, self.ny);
        }
        w
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    pub fn zero_boundary(&mut self) {
        for k in 0..self.len() {
            if self.is_boundary(k) {
                self.values[k] = [0.0; 3];
            }
        }
    }

    pub fn abs_in_place(&mut self) {
        for v in &mut self.values {
            *v = v.map(f64::abs);
        }
    }

    /// Per-component integrals ∫u₁², ∫u₀², ∫u₋₁².
    pub fn component_masses(&self) -> [f64; 3] {
        let mut m = [0.0; 3];
        for (k, v) in self.values.iter().enumerate() {
            let w = self.weight(k);
            for c in 0..3 {
                m[c] += w * v[c] * v[c];
            }
        }
        m
    }

    pub fn mass(&self) -> f64 {
        self.component_masses().iter().sum()
    }

    pub fn magnetization(&self) -> f64 {
        let m = self.component_masses();
        m[0] - m[2]
    }

    /// Weighted L² distance to another field, or to a function of position.
    pub fn l2_distance_to<F: Fn(f64, f64) -> [f64; 3]>(&self, f: F) -> f64 {
        let mut s = 0.0;
        for (k, v) in self.values.iter().enumerate() {
            let (x, y) = self.coords(k);
            let t = f(x, y);
            s += self.weight(k) * ((v[0] - t[0]).powi(2) + (v[1] - t[1]).powi(2) + (v[2] - t[2]).powi(2));
        }
        s.sqrt()
    }

    /// Neighbour pairs (k, k') joined by a grid edge.
    pub(crate) fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let nx = self.nx;
        let horizontal = (0..self.ny).flat_map(move |j| (0..nx - 1).map(move |i| (j * nx + i, j * nx + i + 1)));
        let vertical = (0..if self.dim == 2 { self.ny - 1 } else { 0 })
            .flat_map(move |j| (0..nx).map(move |i| (j * nx + i, (j + 1) * nx + i)));
        horizontal.chain(vertical)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        if self.dim == 1 {
            writeln!(out, "x,u1,u0,um1")?;
        } else {
            writeln!(out, "x,y,u1,u0,um1")?;
        }
        for (k, v) in self.values.iter().enumerate() {
            let (x, y) = self.coords(k);
            if self.dim == 1 {
                writeln!(out, "{:.12e},{:.12e},{:.12e},{:.12e}", x, v[0], v[1], v[2])?;
            } else {
                writeln!(out, "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}", x, y, v[0], v[1], v[2])?;
            }
        }
        Ok(())
    }
}

/// Gradient and potential parts of the discrete energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParts {
    pub gradient: f64,
    pub potential: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        self.gradient + self.potential
    }
}

pub fn energy_parts(field: &GridField, w: &PotentialW, eps: f64) -> EnergyParts {
    let scale = field.h.powi(field.dim as i32 - 2);
    let mut grad = 0.0;
    for (k, l) in field.edges() {
        let (u, v) = (field.values[k], field.values[l]);
        grad += (u[0] - v[0]).powi(2) + (u[1] - v[1]).powi(2) + (u[2] - v[2]).powi(2);
    }
    let pot: f64 = field.values.iter().enumerate().map(|(k, u)| field.weight(k) * w.eval(*u)).sum();
    EnergyParts { gradient: eps * scale * grad, potential: pot / eps }
}

/// ε Σ_edges |Δu|² h^(dim−2) + (1/ε) Σ_nodes W(u) ω_k, where the edge sum includes the
/// differences into the zero boundary nodes and ω_k are trapezoid weights.
pub fn discretize_energy(field: &GridField, w: &PotentialW, eps: f64) -> f64 {
    energy_parts(field, w, eps).total()
}

/// Rescale components so that mass and magnetization hit their targets.
///
/// With s₊², s₀², s₋² = c + d, c, c − d the constraints are linear in (c, d),
/// so the Newton iteration from (1, 1) terminates after one step.
pub fn project_constraints(field: &GridField, mass: f64, mag: f64) -> Result<GridField> {
    let mut out = field.clone();
    let scales = projection_scales(field, mass, mag)?;
    for v in &mut out.values {
        for c in 0..3 {
            v[c] *= scales[c];
        }
    }
    Ok(out)
}

pub(crate) fn projection_scales(field: &GridField, mass: f64, mag: f64) -> Result<[f64; 3]> {
    let [p, z, m] = field.component_masses();
    let total = p + z + m;
    if !(total > 0.0) {
        return Err(Error::ProjectionInfeasible("field has zero mass".into()));
    }
    let det = total * (p + m) - (p - m) * (p - m);
    let (c, d) = if det > 1e-14 * total * total {
        ((mass * (p + m) - mag * (p - m)) / det, (mag * total - mass * (p - m)) / det)
    } else if (mag - mass * (p - m) / total).abs() <= 1e-12 * mass.max(1.0) {
        (mass / total, 0.0)
    } else {
        return Err(Error::ProjectionInfeasible(format!(
            "magnetization {mag} is not reachable by rescaling the current field"
        )));
    };
    let sq = [c + d, c, c - d];
    let masses = [p, z, m];
    let mut s = [0.0; 3];
    for k in 0..3 {
        if masses[k] == 0.0 {
            s[k] = 1.0;
        } else if sq[k] > 0.0 {
            s[k] = sq[k].sqrt();
        } else {
            return Err(Error::ProjectionInfeasible(format!(
                "target (N, M) = ({mass}, {mag}) needs a negative squared multiplier"
            )));
        }
    }
    Ok(s)
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
    fn zero_field_energy_is_w0() {
        let w = ms_ms();
        let g = GridField::new_1d(101).unwrap();
        let e = energy_parts(&g, &w, 0.1);
        assert_eq!(e.gradient, 0.0);
        // (1 + α) A² / 2 with A = n = 1
        let w0 = 0.5 * 0.5;
        assert!((e.potential - w0 / 0.1).abs() < 1e-12);
        let g2 = GridField::new_2d(21).unwrap();
        assert!((discretize_energy(&g2, &w, 0.1) - w0 / 0.1).abs() < 1e-12);
    }

    #[test]
    fn well_field_pays_boundary_jumps() {
        let w = ms_ms();
        let a = w.state_a.to_array();
        let g = GridField::from_fn(1, 201, |_, _| a).unwrap();
        let e = energy_parts(&g, &w, 0.05);
        // two jumps of size |a| = 1 across one cell each
        assert!((e.gradient - 0.05 * 2.0 / g.h).abs() < 1e-9);
        assert!(e.potential > 0.0 && e.potential.is_finite());
    }

    #[test]
    fn smooth_field_grid_consistency() {
        let w = ms_ms();
        let f = |x: f64, y: f64| {
            let s = (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin();
            [0.8 * s, 0.3 * s * s, 0.5 * s]
        };
        let coarse = GridField::from_fn(2, 65, f).unwrap();
        let fine = GridField::from_fn(2, 129, f).unwrap();
        let (ec, ef) = (discretize_energy(&coarse, &w, 0.2), discretize_energy(&fine, &w, 0.2));
        assert!((ec - ef).abs() / ef < 0.01, "{ec} {ef}");
    }

    #[test]
    fn projection_hits_targets() {
        let mut g = GridField::from_fn(1, 64, |x, _| [1.0 + x, 0.3 + x * x, 0.7 - 0.5 * x]).unwrap();
        let p = project_constraints(&g, 1.0, 0.2).unwrap();
        assert!((p.mass() - 1.0).abs() < 1e-12 && (p.magnetization() - 0.2).abs() < 1e-12);
        let again = projection_scales(&p, 1.0, 0.2).unwrap();
        assert!(again.iter().all(|s| (s - 1.0).abs() < 1e-12));
        // mass 2N with M = 0: uniform 1/√2
        for v in &mut g.values {
            v[2] = v[0];
        }
        let n = g.mass() / 2.0;
        let s = projection_scales(&g, n, 0.0).unwrap();
        assert!(s.iter().all(|x| (x - 0.5f64.sqrt()).abs() < 1e-12));
    }

    #[test]
    fn projection_infeasible() {
        let g = GridField::from_fn(1, 32, |_, _| [0.0, 1.0, 0.0]).unwrap();
        assert!(matches!(project_constraints(&g, 1.0, 0.5), Err(Error::ProjectionInfeasible(_))));
        let g = GridField::from_fn(1, 32, |_, _| [1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(project_constraints(&g, 1.0, 1.5), Err(Error::ProjectionInfeasible(_))));
    }
}
