//! Regime-calibrated bulk potential W: H_TF plus constraint-affine terms, written
//! as a sum of squares that vanishes exactly at the Thomas-Fermi states.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ModelParams, Regime, SpinState, TFSolution};
use crate::tf_solver::{critical_q2, three_c_cubic};

/// Thomas-Fermi Hamiltonian density.
pub fn h_tf(u: SpinState, params: &ModelParams) -> f64 {
    let (u1, u0, um) = (u.u1, u.u0, u.um1);
    let rho = u.density();
    let sg = if params.alpha < 0.0 { -1.0 } else { 1.0 };
    let x = u1 - sg * um;
    let mz = u1 * u1 - um * um;
    0.5 * rho * rho + 0.5 * params.alpha * (2.0 * u0 * u0 * x * x + mz * mz) + params.q * (u1 * u1 + um * um)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "form")]
pub enum WCalib {
    NsMs {
        big_a: f64,
        beta1: f64,
        beta2: f64,
        q2: f64,
    },
    /// Shared by PURE_2C and NS_2C; `q1` is −A + √(A² + αB²).
    TwoC {
        big_a: f64,
        big_b: f64,
        k1: f64,
        k2: f64,
        q1: f64,
    },
    MsMs {
        big_a: f64,
    },
    ThreeC {
        n: f64,
        a_mult: f64,
        b: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialW {
    pub regime: Regime,
    pub params: ModelParams,
    pub calib: WCalib,
    pub state_a: SpinState,
    pub state_b: Option<SpinState>,
    /// Volume fraction of the `state_a` region in the Thomas-Fermi solution.
    pub r: f64,
}

pub fn build_w(params: &ModelParams, sol: &TFSolution) -> Result<PotentialW> {
    PotentialW::new(params, sol)
}

pub fn eval_w(w: &PotentialW, u: SpinState) -> f64 {
    w.eval(u.to_array())
}

pub fn grad_w(w: &PotentialW, u: SpinState) -> [f64; 3] {
    w.grad(u.to_array())
}

impl PotentialW {
    pub fn new(params: &ModelParams, sol: &TFSolution) -> Result<Self> {
        params.validate()?;
        if params.m < 0.0 {
            return Err(Error::InvalidParameter("potential expects reduced parameters with m >= 0".into()));
        }
        let (alpha, q) = (params.alpha, params.q);
        let need = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| Error::RegimeMismatch(format!("solution lacks calibration constant {key}")))
        };
        let calib = match sol.regime {
            Regime::NsMs => {
                let big_a = need(sol.calib.big_a, "A")?;
                let s = (1.0 + alpha).sqrt();
                WCalib::NsMs {
                    big_a,
                    beta1: -2.0 * big_a,
                    beta2: 2.0 * big_a - 2.0 * q - 2.0 * big_a * s,
                    q2: critical_q2(params)?,
                }
            }
            Regime::Pure2c | Regime::Ns2c => {
                let big_a = need(sol.calib.big_a, "A")?;
                let big_b = need(sol.calib.big_b, "B")?;
                let rad = (big_a * big_a + alpha * big_b * big_b).sqrt();
                let q1 = if sol.regime == Regime::Ns2c { q } else { rad - big_a };
                WCalib::TwoC { big_a, big_b, k1: big_a / rad, k2: big_b / rad, q1 }
            }
            Regime::MsMs => WCalib::MsMs { big_a: need(sol.calib.big_a, "A")? },
            Regime::Pure3c => {
                WCalib::ThreeC { n: params.n, a_mult: need(sol.calib.a_mult, "a_mult")?, b: need(sol.calib.b, "b")? }
            }
            other => {
                return Err(Error::RegimeMismatch(format!("no calibrated potential for the degenerate regime {other}")))
            }
        };
        if crate::tf_solver::classify(params) != sol.regime {
            return Err(Error::mismatch(sol.regime.as_str(), crate::tf_solver::classify(params)));
        }
        Ok(PotentialW {
            regime: sol.regime,
            params: *params,
            calib,
            state_a: sol.state_a,
            state_b: sol.state_b,
            r: sol.r,
        })
    }

    /// 3C potential calibrated directly from the cubic root, skipping the degeneracy guard
    /// of the solver. Its well is the formula state with u₀² clamped at zero.
    pub fn three_c_unguarded(params: &ModelParams) -> Result<Self> {
        if params.alpha >= 0.0 || params.q <= 0.0 {
            return Err(Error::mismatch("PURE_3C", crate::tf_solver::classify(params)));
        }
        let (alpha, q, n) = (params.alpha, params.q, params.n);
        let b = three_c_cubic(params).solve()?;
        let a_mult = q / 2.0 - b * b / (2.0 * q);
        let scale = (n + a_mult / alpha).max(0.0).sqrt();
        let u0_sq = (q * q - b * b) / (2.0 * q * q) * n - (q * q + b * b) / (2.0 * q * q) * (a_mult / alpha);
        let well = SpinState::new((q + b) / (2.0 * q) * scale, u0_sq.max(0.0).sqrt(), (q - b) / (2.0 * q) * scale);
        Ok(PotentialW {
            regime: Regime::Pure3c,
            params: *params,
            calib: WCalib::ThreeC { n, a_mult, b },
            state_a: well,
            state_b: None,
            r: 1.0,
        })
    }

    /// Copy with the calibration constant A (or a for 3C) shifted; used as a negative control.
    pub fn perturbed(&self, shift: f64) -> Self {
        let mut w = self.clone();
        w.calib = match w.calib {
            WCalib::NsMs { big_a, beta1, beta2, q2 } => WCalib::NsMs { big_a: big_a + shift, beta1, beta2, q2 },
            WCalib::TwoC { big_a, big_b, k1, k2, q1 } => WCalib::TwoC { big_a: big_a + shift, big_b, k1, k2, q1 },
            WCalib::MsMs { big_a } => WCalib::MsMs { big_a: big_a + shift },
            WCalib::ThreeC { n, a_mult, b } => WCalib::ThreeC { n, a_mult: a_mult + shift, b },
        };
        w
    }

    pub fn wells(&self) -> Vec<SpinState> {
        let mut v = vec![self.state_a];
        v.extend(self.state_b);
        v
    }

    /// (λ₁, λ₂, c) with W = H_TF + λ₁|u|² + λ₂(u₁² − u₋₁²) + c on the octant.
    pub fn affine_coefficients(&self) -> (f64, f64, f64) {
        let (alpha, q) = (self.params.alpha, self.params.q);
        match self.calib {
            WCalib::NsMs { big_a, beta1, beta2, .. } => (beta1 / 2.0, beta2 / 2.0, big_a * big_a / 2.0),
            WCalib::TwoC { big_a, big_b, .. } => {
                (-(big_a + q), -alpha * big_b, (big_a * big_a + alpha * big_b * big_b) / 2.0)
            }
            WCalib::MsMs { big_a } => (-(big_a * (1.0 + alpha) + q), 0.0, (1.0 + alpha) * big_a * big_a / 2.0),
            WCalib::ThreeC { n, a_mult, b } => {
                (-(a_mult + (1.0 + alpha) * n), -b, ((1.0 + alpha) * n * n - a_mult * a_mult / alpha) / 2.0)
            }
        }
    }

    /// W(0), the constant of the affine identity.
    pub fn value_at_origin(&self) -> f64 {
        self.affine_coefficients().2
    }

    /// H_TF(|u|) + λ₁|u|² + λ₂(u₁² − u₋₁²) + c, evaluated without the sum-of-squares form.
    pub fn eval_affine(&self, u: [f64; 3]) -> f64 {
        let s = SpinState::from_array(u).abs();
        let (l1, l2, c) = self.affine_coefficients();
        h_tf(s, &self.params) + l1 * s.density() + l2 * s.magnetization() + c
    }

    /// W on ℝ³ through its even extension in each component.
    pub fn eval(&self, u: [f64; 3]) -> f64 {
        let (u1, u0, um) = (u[0].abs(), u[1].abs(), u[2].abs());
        let alpha = self.params.alpha;
        let q = self.params.q;
        let (p1, p0, pm) = (u1 * u1, u0 * u0, um * um);
        let two_w = match self.calib {
            WCalib::NsMs { big_a, q2, .. } => {
                let s = (1.0 + alpha).sqrt();
                let sm = (s * s - s).sqrt();
                let t1 = s * p1 + p0 + (1.0 - alpha) / s * pm - big_a;
                let t2 = sm * u1 - alpha / sm * um;
                t1 * t1
                    + 2.0 * p0 * t2 * t2
                    + 2.0 * (1.0 - 1.0 / s) * p0 * pm
                    + 4.0 * alpha / (1.0 + alpha) * pm * pm
                    + 4.0 * (q - q2) * pm
            }
            WCalib::TwoC { big_a, big_b, k1, k2, q1 } => {
                let t1 = p1 + k1 * p0 + pm - big_a;
                let t2 = p1 + k2 * p0 - pm - big_b;
                let d = u1 - um;
                t1 * t1
                    + alpha * t2 * t2
                    + 2.0 * (q1 - q) * p0
                    + 2.0 * p0 * (alpha * d * d + (1.0 - k1) * (p1 + pm) - alpha * k2 * (p1 - pm))
            }
            WCalib::MsMs { big_a } => {
                let t1 = p1 + p0 + pm - big_a;
                let t2 = p0 - 2.0 * u1 * um;
                (1.0 + alpha) * t1 * t1 - alpha * t2 * t2 - 2.0 * q * p0
            }
            WCalib::ThreeC { n, a_mult, b } => {
                let t1 = p1 + p0 + pm - n;
                let t2 = p0 - 2.0 * u1 * um + a_mult / alpha;
                let t3 = (q - b) * u1 - (q + b) * um;
                (1.0 + alpha) * t1 * t1 - alpha * t2 * t2 + t3 * t3 / q
            }
        };
        0.5 * two_w
    }

    /// Gradient of the even extension; components sitting exactly at zero get a zero entry.
    pub fn grad(&self, u: [f64; 3]) -> [f64; 3] {
        let sgn = |x: f64| {
            if x > 0.0 {
                1.0
            } else if x < 0.0 {
                -1.0
            } else {
                0.0
            }
        };
        let (s1, s0, sm) = (sgn(u[0]), sgn(u[1]), sgn(u[2]));
        let (u1, u0, um) = (u[0].abs(), u[1].abs(), u[2].abs());
        let alpha = self.params.alpha;
        let q = self.params.q;
        let (l1, l2, _) = self.affine_coefficients();
        let rho = u1 * u1 + u0 * u0 + um * um;
        let sg = if alpha < 0.0 { -1.0 } else { 1.0 };
        let x = u1 - sg * um;
        let mz = u1 * u1 - um * um;
        let g1 =
            2.0 * rho * u1 + alpha * (2.0 * u0 * u0 * x + 2.0 * mz * u1) + 2.0 * q * u1 + 2.0 * l1 * u1 + 2.0 * l2 * u1;
        let g0 = 2.0 * rho * u0 + 2.0 * alpha * u0 * x * x + 2.0 * l1 * u0;
        let gm = 2.0 * rho * um + alpha * (-2.0 * sg * u0 * u0 * x - 2.0 * mz * um) + 2.0 * q * um + 2.0 * l1 * um
            - 2.0 * l2 * um;
        [s1 * g1, s0 * g0, sm * gm]
    }
}

/// Outcome of the well-verification protocol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WellReport {
    pub well_values: Vec<f64>,
    pub samples: usize,
    pub delta: f64,
    pub min_outside: f64,
    pub min_outside_at: [f64; 3],
    pub min_overall: f64,
    /// Per well: (smallest, largest) ratio W(u)/|u − well|² on a small sphere.
    pub quad_bounds: Vec<(f64, f64)>,
    /// Per well: worst ratio between the quadratic coefficients at radii ρ/10 and ρ.
    pub quad_consistency: Vec<f64>,
    pub growth_radius: f64,
    pub growth_min_ratio: f64,
}

/// Van der Corput radical inverse, used for Halton sequences.
pub fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

pub fn halton3(i: u64) -> [f64; 3] {
    [radical_inverse(i, 2), radical_inverse(i, 3), radical_inverse(i, 5)]
}

pub const WELL_SAMPLES: usize = 100_000;

pub fn verify_wells(w: &PotentialW) -> Result<WellReport> {
    verify_wells_with(w, WELL_SAMPLES)
}

pub fn verify_wells_with(w: &PotentialW, samples: usize) -> Result<WellReport> {
    let n = w.params.n;
    let wells = w.wells();
    let well_values: Vec<f64> = wells.iter().map(|s| w.eval(s.to_array())).collect();
    for (s, v) in wells.iter().zip(&well_values) {
        if v.abs() > 1e-12 {
            return Err(Error::WellViolation(format!("W({s}) = {v:e} is not zero")));
        }
    }

    let radius = wells.iter().map(|s| s.norm()).fold(n.sqrt(), f64::max);
    let side = 2.0 * radius;
    let delta = 0.05 * n.sqrt();
    let mut min_outside = f64::INFINITY;
    let mut min_at = [0.0; 3];
    let mut min_overall = f64::INFINITY;
    for i in 1..=samples as u64 {
        let h = halton3(i);
        let u = [h[0] * side, h[1] * side, h[2] * side];
        let v = w.eval(u);
        min_overall = min_overall.min(v);
        let s = SpinState::from_array(u);
        if wells.iter().all(|c| c.dist(s) > delta) && v < min_outside {
            min_outside = v;
            min_at = u;
        }
    }
    if min_overall < -1e-12 {
        return Err(Error::WellViolation(format!("W takes the negative value {min_overall:e}")));
    }
    if !(min_outside > 0.0) {
        return Err(Error::WellViolation(format!("W vanishes at {:?} away from the wells", min_at)));
    }

    let rho = 1e-2 * n.sqrt();
    let mut quad_bounds = Vec::new();
    let mut quad_consistency = Vec::new();
    for well in &wells {
        let dirs = feasible_directions(*well);
        let (mut lo, mut hi, mut worst) = (f64::INFINITY, 0.0f64, f64::INFINITY);
        for d in &dirs {
            let at = |t: f64| {
                let p = [well.u1 + t * d[0], well.u0 + t * d[1], well.um1 + t * d[2]];
                w.eval(p) / (t * t)
            };
            let (c_big, c_small) = (at(rho), at(rho / 10.0));
            lo = lo.min(c_big).min(c_small);
            hi = hi.max(c_big).max(c_small);
            worst = worst.min(c_small / c_big);
        }
        if !(lo > 0.0) || worst < 0.1 {
            return Err(Error::WellViolation(format!(
                "W is not quadratically bounded below near {well} (ratio {lo:e}, consistency {worst:e})"
            )));
        }
        quad_bounds.push((lo, hi));
        quad_consistency.push(worst);
    }

    let growth_radius = 10.0 * n.sqrt();
    let mut growth = f64::INFINITY;
    for i in 1..=2000u64 {
        let h = halton3(i);
        let v = [h[0] + 1e-9, h[1], h[2]];
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let u = v.map(|x| growth_radius * x / norm);
        growth = growth.min(w.eval(u) / (growth_radius * growth_radius));
    }
    if !(growth > 0.0) {
        return Err(Error::WellViolation(format!("no quadratic growth at radius {growth_radius}")));
    }

    Ok(WellReport {
        well_values,
        samples,
        delta,
        min_outside,
        min_outside_at: min_at,
        min_overall,
        quad_bounds,
        quad_consistency,
        growth_radius,
        growth_min_ratio: growth,
    })
}

/// Unit directions from `well` that stay in the closed octant: the 26 lattice
/// directions plus a fixed set of quasi-random ones.
fn feasible_directions(well: SpinState) -> Vec<[f64; 3]> {
    let c = well.to_array();
    let ok = |d: &[f64; 3]| (0..3).all(|i| c[i] > 1e-12 || d[i] >= 0.0);
    let mut out = Vec::new();
    let mut push = |d: [f64; 3]| {
        let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        if norm > 0.0 {
            let d = d.map(|x| x / norm);
            if ok(&d) {
                out.push(d);
            }
        }
    };
    for i in -1..=1 {
        for j in -1..=1 {
            for k in -1..=1 {
                push([i as f64, j as f64, k as f64]);
            }
        }
    }
    for i in 1..=64u64 {
        let h = halton3(i + 7);
        push(h.map(|x| 2.0 * x - 1.0));
    }
    out
}
