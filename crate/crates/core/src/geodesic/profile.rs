//! Layer profiles η(t) = γ(s(t)) travelling along a geodesic with ds/dt = √W(γ(s)),
//! so that |η′| = √W(η) and ∫|η′|² + W = 2∫√W |γ′|.

use serde::Serialize;

use super::{dist, geodesic_cost, lerp, GeodesicOptions, GeodesicPath};
use crate::error::{Error, Result};
use crate::model::SpinState;
use crate::potential::PotentialW;

#[derive(Debug, Clone)]
pub struct ProfileOptions {
    /// Stop once within this distance of the end state.
    pub well_tol: f64,
    /// Time cap, measured in units where the largest √W along the path is 1.
    pub t_max: f64,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions { well_tol: 1e-8, t_max: 50.0, rtol: 1e-11, atol: 1e-14 }
    }
}

/// Arclength-parametrized polyline.
#[derive(Debug, Clone, Default)]
pub struct Polyline {
    pub pts: Vec<[f64; 3]>,
    pub cum: Vec<f64>,
}

impl Polyline {
    pub fn new(pts: Vec<[f64; 3]>) -> Self {
        let mut cum = vec![0.0; pts.len()];
        for i in 1..pts.len() {
            cum[i] = cum[i - 1] + dist(pts[i - 1], pts[i]);
        }
        Polyline { pts, cum }
    }

    pub fn length(&self) -> f64 {
        *self.cum.last().unwrap_or(&0.0)
    }

    pub fn at(&self, s: f64) -> [f64; 3] {
        let n = self.pts.len();
        if s <= 0.0 {
            return self.pts[0];
        }
        if s >= self.length() {
            return self.pts[n - 1];
        }
        let i = self.cum.partition_point(|c| *c <= s) - 1;
        let len = self.cum[i + 1] - self.cum[i];
        if len == 0.0 {
            return self.pts[i];
        }
        lerp(self.pts[i], self.pts[i + 1], (s - self.cum[i]) / len)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LayerProfile {
    pub t_grid: Vec<f64>,
    pub values: Vec<SpinState>,
    /// Arclength along the geodesic at each t.
    pub arclength: Vec<f64>,
    /// ds/dt = √W(η) at each t.
    pub speed: Vec<f64>,
    /// ∫(|η′|² + W(η)) dt over the computed range.
    pub energy: f64,
    /// Fitted exponential approach rate c₁ (smallest over the ends that approach a well).
    pub decay_rate: f64,
    pub decay_r2: f64,
    /// sup_t ||η′| − √W(η)| on the interpolated numerical solution.
    pub equipartition_residual: f64,
    #[serde(skip)]
    pub path: Polyline,
}

impl LayerProfile {
    /// η(t), frozen at the end states outside the computed range.
    pub fn eval(&self, t: f64) -> [f64; 3] {
        self.path.at(self.arclength_at(t))
    }

    pub fn arclength_at(&self, t: f64) -> f64 {
        let n = self.t_grid.len();
        if t <= self.t_grid[0] {
            return self.arclength[0];
        }
        if t >= self.t_grid[n - 1] {
            return self.arclength[n - 1];
        }
        let i = self.t_grid.partition_point(|c| *c <= t) - 1;
        let (t0, t1) = (self.t_grid[i], self.t_grid[i + 1]);
        let (s0, s1) = (self.arclength[i], self.arclength[i + 1]);
        let h = t1 - t0;
        let s = hermite(s0, s1, self.speed[i] * h, self.speed[i + 1] * h, (t - t0) / h);
        s.clamp(s0.min(s1), s0.max(s1))
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.t_grid[0], *self.t_grid.last().unwrap())
    }
}

fn hermite(p0: f64, p1: f64, m0: f64, m1: f64, x: f64) -> f64 {
    let x2 = x * x;
    let x3 = x2 * x;
    (2.0 * x3 - 3.0 * x2 + 1.0) * p0 + (x3 - 2.0 * x2 + x) * m0 + (-2.0 * x3 + 3.0 * x2) * p1 + (x3 - x2) * m1
}

fn hermite_deriv(p0: f64, p1: f64, m0: f64, m1: f64, x: f64, h: f64) -> f64 {
    let x2 = x * x;
    ((6.0 * x2 - 6.0 * x) * p0
        + (3.0 * x2 - 4.0 * x + 1.0) * m0
        + (-6.0 * x2 + 6.0 * x) * p1
        + (3.0 * x2 - 2.0 * x) * m1)
        / h
}

// Dormand-Prince 5(4) tableau
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// One branch of the profile: s(t) from `s_start` moving toward `s_end`, with the energy density
/// integrated alongside.
struct Branch {
    t: Vec<f64>,
    s: Vec<f64>,
    f: Vec<f64>,
    energy: f64,
    residual: f64,
}

fn integrate_branch(
    w: &PotentialW,
    path: &Polyline,
    s_start: f64,
    forward: bool,
    opts: &ProfileOptions,
) -> Result<Branch> {
    let total = path.length();
    let dir = if forward { 1.0 } else { -1.0 };
    let target = if forward { total } else { 0.0 };
    let sqrt_w = |s: f64| w.eval(path.at(s)).max(0.0).sqrt();
    // y = (s, energy); |η′|² + W = 2W on the exact trajectory
    let rhs = |s: f64| {
        let f = sqrt_w(s);
        [dir * f, f * f + w.eval(path.at(s)).max(0.0)]
    };
    let remaining = |s: f64| dist(path.at(s), path.at(target));
    // the time cap is in units where max √W along the path is 1
    let peak = path.pts.iter().map(|p| w.eval(*p).max(0.0).sqrt()).fold(0.0, f64::max);
    let t_max = if peak > 0.0 { opts.t_max / peak } else { opts.t_max };
    // the exact flow cannot pass an interior zero of W, but a step taken within rtol of one can
    let barrier = interior_zero(path, &sqrt_w, s_start, target, 1e-6 * peak);

    let mut t = 0.0;
    let mut y = [s_start, 0.0];
    let mut k1 = rhs(y[0]);
    let mut out = Branch { t: vec![0.0], s: vec![s_start], f: vec![k1[0].abs()], energy: 0.0, residual: 0.0 };
    let mut h: f64 = 1e-3;
    let mut steps = 0usize;
    while remaining(y[0]) >= opts.well_tol && t < t_max {
        steps += 1;
        if steps > 2_000_000 {
            return Err(Error::StallDetected(y[0] / total));
        }
        if k1[0].abs() < 1e-300 {
            return Err(Error::StallDetected(y[0] / total));
        }
        h = h.min(t_max - t);
        let mut k = [[0.0; 2]; 7];
        k[0] = k1;
        for st in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(st) {
                ys[0] += h * A[st][j] * kj[0];
                ys[1] += h * A[st][j] * kj[1];
            }
            k[st] = rhs(ys[0]);
        }
        let mut y5 = y;
        let mut err = 0.0f64;
        for comp in 0..2 {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for st in 0..7 {
                d5 += B5[st] * k[st][comp];
                d4 += B4[st] * k[st][comp];
            }
            y5[comp] += h * d5;
            let sc = opts.atol + opts.rtol * y[comp].abs().max(y5[comp].abs());
            err = err.max((h * (d5 - d4)).abs() / sc);
        }
        // never step past the end of the path
        let overshoot = if forward { y5[0] > total } else { y5[0] < 0.0 };
        if let Some(b) = barrier {
            if (y5[0] - b) * dir >= 0.0 {
                return Err(Error::StallDetected(b / total));
            }
        }
        if err <= 1.0 && !overshoot {
            let (s0, s1, f0, f1) = (y[0], y5[0], k1[0], k[6][0]);
            let mid_s = hermite(s0, s1, f0 * h, f1 * h, 0.5);
            let mid_ds = hermite_deriv(s0, s1, f0 * h, f1 * h, 0.5, h);
            out.residual = out.residual.max((mid_ds.abs() - sqrt_w(mid_s)).abs());
            t += h;
            y = y5;
            k1 = k[6];
            out.t.push(t);
            out.s.push(y[0]);
            out.f.push(k1[0].abs());
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= factor;
        } else {
            h *= if overshoot { 0.5 } else { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) };
        }
        if h < 1e-14 {
            return Err(Error::StallDetected(y[0] / total));
        }
    }
    if remaining(y[0]) > 1e-3 * total.max(1e-300) {
        return Err(Error::StallDetected(y[0] / total));
    }
    out.energy = y[1];
    Ok(out)
}

/// First local minimum of √W below `tol` met when moving from `from` toward `to`, ignoring the end itself.
fn interior_zero(path: &Polyline, sqrt_w: &impl Fn(f64) -> f64, from: f64, to: f64, tol: f64) -> Option<f64> {
    const SUB: usize = 8;
    let total = path.length();
    let m = SUB * (path.pts.len() - 1);
    let ss: Vec<f64> = (0..=m)
        .map(|k| {
            let (i, j) = (k / SUB, k % SUB);
            if j == 0 {
                path.cum[i]
            } else {
                path.cum[i] + (path.cum[i + 1] - path.cum[i]) * j as f64 / SUB as f64
            }
        })
        .collect();
    let vals: Vec<f64> = ss.iter().map(|&s| sqrt_w(s)).collect();
    let margin = 1e-6 * total;
    let hits = (1..m).filter(|&k| {
        vals[k] < tol
            && vals[k] <= vals[k - 1]
            && vals[k] <= vals[k + 1]
            && (ss[k] - from) * (to - from) > 0.0
            && (to - ss[k]).abs() > margin
            && (ss[k] - to) * (from - to) > 0.0
    });
    if to > from {
        hits.map(|k| ss[k]).next()
    } else {
        hits.map(|k| ss[k]).next_back()
    }
}

/// Log-linear least squares of |η − end| against t over the tail window.
fn fit_decay(t: &[f64], d: &[f64], scale: f64) -> Option<(f64, f64)> {
    let (lo, hi) = (1e-7 * scale, 1e-2 * scale);
    let pts: Vec<(f64, f64)> = t.iter().zip(d).filter(|(_, &x)| x > lo && x < hi).map(|(&t, &x)| (t, x.ln())).collect();
    if pts.len() < 4 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope.abs(), sxy * sxy / (sxx * syy)))
}

fn check_endpoint(w: &PotentialW, p: [f64; 3], what: &str) -> Result<()> {
    if w.wells().iter().any(|s| dist(s.to_array(), p) < 1e-9) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} {p:?} is not a well of W")))
    }
}

fn assemble(
    path: Polyline,
    t: Vec<f64>,
    s: Vec<f64>,
    f: Vec<f64>,
    energy: f64,
    residual: f64,
    fits: Vec<(f64, f64)>,
) -> LayerProfile {
    let values = s.iter().map(|&x| SpinState::from_array(path.at(x))).collect();
    let (decay_rate, decay_r2) = if fits.is_empty() {
        (0.0, 0.0)
    } else {
        (fits.iter().map(|f| f.0).fold(f64::INFINITY, f64::min), fits.iter().map(|f| f.1).fold(f64::INFINITY, f64::min))
    };
    LayerProfile {
        t_grid: t,
        values,
        arclength: s,
        speed: f,
        energy,
        decay_rate,
        decay_r2,
        equipartition_residual: residual,
        path,
    }
}

pub fn internal_profile(w: &PotentialW, path: &GeodesicPath) -> Result<LayerProfile> {
    internal_profile_with(w, path, &ProfileOptions::default())
}

/// Heteroclinic profile between the end wells of `path`, centred at half arclength.
pub fn internal_profile_with(w: &PotentialW, path: &GeodesicPath, opts: &ProfileOptions) -> Result<LayerProfile> {
    let pts = path.points();
    if pts.len() < 2 {
        return Err(Error::InvalidParameter("path needs at least two samples".into()));
    }
    check_endpoint(w, pts[0], "path start")?;
    check_endpoint(w, *pts.last().unwrap(), "path end")?;
    let poly = Polyline::new(pts);
    let total = poly.length();
    if total == 0.0 {
        return Err(Error::InvalidParameter("path has zero length".into()));
    }
    let fwd = integrate_branch(w, &poly, 0.5 * total, true, opts)?;
    let bwd = integrate_branch(w, &poly, 0.5 * total, false, opts)?;

    let end = poly.at(total);
    let start = poly.at(0.0);
    let mut fits = Vec::new();
    let d_end: Vec<f64> = fwd.s.iter().map(|&s| dist(poly.at(s), end)).collect();
    fits.extend(fit_decay(&fwd.t, &d_end, total));
    let d_start: Vec<f64> = bwd.s.iter().map(|&s| dist(poly.at(s), start)).collect();
    fits.extend(fit_decay(&bwd.t, &d_start, total));

    let mut t: Vec<f64> = bwd.t.iter().rev().map(|x| -x).collect();
    let mut s: Vec<f64> = bwd.s.iter().rev().copied().collect();
    let mut f: Vec<f64> = bwd.f.iter().rev().copied().collect();
    t.extend_from_slice(&fwd.t[1..]);
    s.extend_from_slice(&fwd.s[1..]);
    f.extend_from_slice(&fwd.f[1..]);
    Ok(assemble(poly, t, s, f, fwd.energy + bwd.energy, fwd.residual.max(bwd.residual), fits))
}

pub fn boundary_profile(w: &PotentialW, target: SpinState) -> Result<LayerProfile> {
    let path = geodesic_cost(w, SpinState::ZERO, target, &GeodesicOptions::default())?;
    boundary_profile_with(w, &path, &ProfileOptions::default())
}

/// Half-line profile from the origin (t = 0) to the well at the end of `path`.
pub fn boundary_profile_with(w: &PotentialW, path: &GeodesicPath, opts: &ProfileOptions) -> Result<LayerProfile> {
    let pts = path.points();
    if pts.len() < 2 || pts[0] != [0.0; 3] {
        return Err(Error::InvalidParameter("boundary profile path must start at the origin".into()));
    }
    check_endpoint(w, *pts.last().unwrap(), "path end")?;
    let poly = Polyline::new(pts);
    let total = poly.length();
    let fwd = integrate_branch(w, &poly, 0.0, true, opts)?;
    let end = poly.at(total);
    let d_end: Vec<f64> = fwd.s.iter().map(|&s| dist(poly.at(s), end)).collect();
    let fits: Vec<(f64, f64)> = fit_decay(&fwd.t, &d_end, total).into_iter().collect();
    Ok(assemble(poly, fwd.t, fwd.s, fwd.f, fwd.energy, fwd.residual, fits))
}
