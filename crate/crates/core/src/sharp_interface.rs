//! The sharp-interface limit G₀: perimeter and wall-contact energies of two-phase
//! configurations, optimal 1D arrangements and contact angles.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SpinState;
use crate::relaxation::GridField;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Region {
    /// Sorted interface positions in (0, 1); the label of [0, x₁) is given.
    Line { interfaces: Vec<f64>, left_is_a: bool },
    /// Labels at the nodes of a uniform `nodes`×`nodes` grid on the unit square.
    Bitmap { nodes: usize, is_a: Vec<bool> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpConfig {
    pub region: Region,
    pub a: SpinState,
    pub b: SpinState,
    /// Measure of the region labeled a.
    pub r: f64,
}

impl SharpConfig {
    pub fn line(mut interfaces: Vec<f64>, left_is_a: bool, a: SpinState, b: SpinState) -> Result<Self> {
        interfaces.sort_by(|x, y| x.total_cmp(y));
        if interfaces.iter().any(|x| !(*x > 0.0 && *x < 1.0)) {
            return Err(Error::InvalidParameter("interface positions must lie in (0, 1)".into()));
        }
        let mut r = 0.0;
        let mut label = left_is_a;
        let mut prev = 0.0;
        for x in interfaces.iter().copied().chain(std::iter::once(1.0)) {
            if label {
                r += x - prev;
            }
            prev = x;
            label = !label;
        }
        Ok(SharpConfig { region: Region::Line { interfaces, left_is_a }, a, b, r })
    }

    pub fn bitmap(nodes: usize, is_a: Vec<bool>, a: SpinState, b: SpinState) -> Result<Self> {
        if nodes < 2 || is_a.len() != nodes * nodes {
            return Err(Error::InvalidParameter(format!("bitmap needs {nodes}² labels")));
        }
        let h = 1.0 / (nodes - 1) as f64;
        let edge = |i: usize| if i == 0 || i + 1 == nodes { 0.5 } else { 1.0 };
        let r =
            is_a.iter().enumerate().filter(|(_, l)| **l).map(|(k, _)| h * h * edge(k % nodes) * edge(k / nodes)).sum();
        Ok(SharpConfig { region: Region::Bitmap { nodes, is_a }, a, b, r })
    }

    pub fn bitmap_from_fn<F: Fn(f64, f64) -> bool>(nodes: usize, f: F, a: SpinState, b: SpinState) -> Result<Self> {
        let h = 1.0 / (nodes.max(2) - 1) as f64;
        let labels = (0..nodes * nodes).map(|k| f((k % nodes) as f64 * h, (k / nodes) as f64 * h)).collect();
        Self::bitmap(nodes, labels, a, b)
    }

    pub fn dim(&self) -> u8 {
        match self.region {
            Region::Line { .. } => 1,
            Region::Bitmap { .. } => 2,
        }
    }

    pub fn is_a(&self, x: f64, y: f64) -> bool {
        match &self.region {
            Region::Line { interfaces, left_is_a } => {
                let crossed = interfaces.iter().filter(|p| **p <= x).count();
                *left_is_a ^ (crossed % 2 == 1)
            }
            Region::Bitmap { .. } => self.label_level(x, y) < 0.0,
        }
    }

    pub fn value(&self, x: f64, y: f64) -> [f64; 3] {
        if self.is_a(x, y) {
            self.a.to_array()
        } else {
            self.b.to_array()
        }
    }

    /// Bilinear interpolation of the level function −1 (a) / +1 (b).
    fn label_level(&self, x: f64, y: f64) -> f64 {
        let Region::Bitmap { nodes, is_a } = &self.region else {
            return if self.is_a(x, y) { -1.0 } else { 1.0 };
        };
        let n = *nodes;
        let lv = |i: usize, j: usize| if is_a[j * n + i] { -1.0 } else { 1.0 };
        let s = |t: f64| {
            let u = (t * (n - 1) as f64).clamp(0.0, (n - 1) as f64);
            let i = (u.floor() as usize).min(n - 2);
            (i, u - i as f64)
        };
        let ((i, fx), (j, fy)) = (s(x), s(y));
        let bottom = lv(i, j) * (1.0 - fx) + lv(i + 1, j) * fx;
        let top = lv(i, j + 1) * (1.0 - fx) + lv(i + 1, j + 1) * fx;
        bottom * (1.0 - fy) + top * fy
    }

    /// Interface segments of a bitmap configuration.
    pub fn interface_contours(&self) -> Vec<Contour> {
        match &self.region {
            Region::Line { .. } => Vec::new(),
            Region::Bitmap { nodes, is_a } => {
                let f: Vec<f64> = is_a.iter().map(|l| if *l { -1.0 } else { 1.0 }).collect();
                contours(*nodes, *nodes, [0.0, 0.0], 1.0 / (*nodes - 1) as f64, &f)
            }
        }
    }

    /// Signed distance to the interface, negative inside the a region.
    /// Infinite when there is no interface.
    pub fn signed_distance(&self, x: f64, y: f64) -> f64 {
        let d = match &self.region {
            Region::Line { interfaces, .. } => interfaces.iter().map(|p| (x - p).abs()).fold(f64::INFINITY, f64::min),
            Region::Bitmap { .. } => {
                let mut best = f64::INFINITY;
                for c in self.interface_contours() {
                    for s in c.points.windows(2) {
                        best = best.min(segment_distance([x, y], s[0], s[1]));
                    }
                }
                best
            }
        };
        if self.is_a(x, y) {
            -d
        } else {
            d
        }
    }

    /// Interface measure inside Ω and boundary measure carrying each label.
    pub fn measures(&self) -> (f64, f64, f64) {
        match &self.region {
            Region::Line { interfaces, left_is_a } => {
                let right_is_a = *left_is_a ^ (interfaces.len() % 2 == 1);
                let ba = (*left_is_a as u8 + right_is_a as u8) as f64;
                (interfaces.len() as f64, ba, 2.0 - ba)
            }
            Region::Bitmap { nodes, is_a } => {
                let per = self.interface_contours().iter().map(Contour::length).sum();
                let n = *nodes;
                let h = 1.0 / (n - 1) as f64;
                let mut ring = Vec::with_capacity(4 * (n - 1));
                for i in 0..n - 1 {
                    ring.push((i, 0, i + 1, 0));
                    ring.push((i, n - 1, i + 1, n - 1));
                    ring.push((0, i, 0, i + 1));
                    ring.push((n - 1, i, n - 1, i + 1));
                }
                let mut ba = 0.0;
                for (i0, j0, i1, j1) in ring {
                    ba += 0.5 * h * (is_a[j0 * n + i0] as u8 + is_a[j1 * n + i1] as u8) as f64;
                }
                (per, ba, 4.0 - ba)
            }
        }
    }
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 { (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
    ((p[0] - a[0] - t * dx).powi(2) + (p[1] - a[1] - t * dy).powi(2)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct G0Breakdown {
    pub interior: f64,
    pub contact_a: f64,
    pub contact_b: f64,
    pub total: f64,
}

pub fn g0_energy(config: &SharpConfig, g_ab: f64, g_0a: f64, g_0b: f64) -> G0Breakdown {
    let (per, ba, bb) = config.measures();
    let interior = 2.0 * g_ab * per;
    let contact_a = 2.0 * g_0a * ba;
    let contact_b = 2.0 * g_0b * bb;
    G0Breakdown { interior, contact_a, contact_b, total: interior + contact_a + contact_b }
}

/// All alternating 1D arrangements with one to three interfaces and a-measure `r`,
/// equal-length segments per label. Fewest interfaces first, a on the left first.
pub fn candidates_1d(r: f64, a: SpinState, b: SpinState) -> Result<Vec<SharpConfig>> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidParameter(format!("volume fraction must lie in (0, 1), got {r}")));
    }
    let mut out = Vec::new();
    for k in 1..=3usize {
        for left_is_a in [true, false] {
            let labels: Vec<bool> = (0..=k).map(|s| left_is_a ^ (s % 2 == 1)).collect();
            let na = labels.iter().filter(|l| **l).count() as f64;
            let nb = labels.len() as f64 - na;
            let mut x = 0.0;
            let mut cuts = Vec::with_capacity(k);
            for l in &labels[..k] {
                x += if *l { r / na } else { (1.0 - r) / nb };
                cuts.push(x);
            }
            out.push(SharpConfig::line(cuts, left_is_a, a, b)?);
        }
    }
    Ok(out)
}

pub fn optimal_1d_config(
    r: f64,
    g_ab: f64,
    g_0a: f64,
    g_0b: f64,
    a: SpinState,
    b: SpinState,
) -> Result<(SharpConfig, G0Breakdown)> {
    if g_ab < 0.0 || g_0a < 0.0 || g_0b < 0.0 {
        return Err(Error::InvalidParameter("surface tensions must be nonnegative".into()));
    }
    let mut best: Option<(SharpConfig, G0Breakdown)> = None;
    for c in candidates_1d(r, a, b)? {
        let e = g0_energy(&c, g_ab, g_0a, g_0b);
        if best.as_ref().is_none_or(|(_, be)| e.total < be.total - 1e-14 * be.total.abs()) {
            best = Some((c, e));
        }
    }
    Ok(best.expect("candidate list is never empty"))
}

/// Contact angle θ with g_ab cos θ + g_0a − g_0b = 0, measured through the a region.
pub fn young_angle(g_ab: f64, g_0a: f64, g_0b: f64) -> Result<f64> {
    if !(g_ab > 0.0) {
        return Err(Error::ZeroTension);
    }
    let c = (g_0b - g_0a) / g_ab;
    if !(-1.0..=1.0).contains(&c) {
        return Err(Error::NoEquilibrium(c));
    }
    Ok(c.acos())
}

/// A polyline of a zero level set.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub points: Vec<[f64; 2]>,
    pub closed: bool,
}

impl Contour {
    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|s| ((s[1][0] - s[0][0]).powi(2) + (s[1][1] - s[0][1]).powi(2)).sqrt()).sum()
    }
}

/// Marching squares for the zero level of nodal values `f` on an `nx`×`ny` grid
/// with lower-left node at `origin`. Nodes with f < 0 are inside.
pub fn contours(nx: usize, ny: usize, origin: [f64; 2], h: f64, f: &[f64]) -> Vec<Contour> {
    let inside = |i: usize, j: usize| f[j * nx + i] < 0.0;
    // edge ids: 2·node for the edge to the right, 2·node + 1 for the edge above
    let crossing = |id: usize| -> [f64; 2] {
        let node = id / 2;
        let (i, j) = (node % nx, node / nx);
        let other = if id.is_multiple_of(2) { node + 1 } else { node + nx };
        let t = f[node] / (f[node] - f[other]);
        let (x, y) = (origin[0] + i as f64 * h, origin[1] + j as f64 * h);
        if id.is_multiple_of(2) {
            [x + t * h, y]
        } else {
            [x, y + t * h]
        }
    };
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut link = |e0: usize, e1: usize| {
        adj.entry(e0).or_default().push(e1);
        adj.entry(e1).or_default().push(e0);
    };
    for j in 0..ny.saturating_sub(1) {
        for i in 0..nx.saturating_sub(1) {
            let c = [inside(i, j), inside(i + 1, j), inside(i + 1, j + 1), inside(i, j + 1)];
            let n0 = j * nx + i;
            let edges = [2 * n0, 2 * (n0 + 1) + 1, 2 * (n0 + nx), 2 * n0 + 1];
            let cut: Vec<usize> = (0..4).filter(|&e| c[e] != c[(e + 1) % 4]).collect();
            match cut.len() {
                2 => link(edges[cut[0]], edges[cut[1]]),
                4 => {
                    let centre = 0.25 * (f[n0] + f[n0 + 1] + f[n0 + nx] + f[n0 + nx + 1]) < 0.0;
                    if centre == c[0] {
                        link(edges[0], edges[1]);
                        link(edges[2], edges[3]);
                    } else {
                        link(edges[3], edges[0]);
                        link(edges[1], edges[2]);
                    }
                }
                _ => {}
            }
        }
    }

    let mut keys: Vec<usize> = adj.keys().copied().collect();
    keys.sort_unstable();
    let mut used: HashMap<usize, bool> = HashMap::new();
    let mut out = Vec::new();
    let walk = |start: usize, used: &mut HashMap<usize, bool>| -> Contour {
        let mut chain = vec![start];
        used.insert(start, true);
        let mut cur = start;
        loop {
            let next = adj[&cur].iter().copied().find(|n| !used.get(n).copied().unwrap_or(false));
            match next {
                Some(n) => {
                    used.insert(n, true);
                    chain.push(n);
                    cur = n;
                }
                None => break,
            }
        }
        let closed = chain.len() > 2 && adj[&cur].contains(&start);
        let mut points: Vec<[f64; 2]> = chain.iter().map(|&e| crossing(e)).collect();
        if closed {
            points.push(points[0]);
        }
        Contour { points, closed }
    };
    for &k in &keys {
        if adj[&k].len() == 1 && !used.get(&k).copied().unwrap_or(false) {
            out.push(walk(k, &mut used));
        }
    }
    for &k in &keys {
        if !used.get(&k).copied().unwrap_or(false) {
            out.push(walk(k, &mut used));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContactPoint {
    pub point: [f64; 2],
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContactAngle {
    /// Mean over contact points, radians, measured through the a region.
    pub theta: f64,
    pub contacts: Vec<ContactPoint>,
    pub curvature_mean_abs: f64,
    pub curvature_variance: f64,
}

/// Contact angle of the interface {|u − a| = |u − b|} of a 2D field with the walls.
///
/// Only interior nodes are labeled, so the walls of the fit are the lines one cell
/// inside ∂Ω. A line is fitted to the interface within 6ε of each wall contact;
/// the curvature statistics use interface points more than 3ε from the walls.
pub fn measure_contact_angle(field: &GridField, a: SpinState, b: SpinState, eps: f64) -> Result<ContactAngle> {
    if field.dim != 2 || field.nx < 5 {
        return Err(Error::InvalidParameter("contact angles need a 2D field with at least 5 nodes per side".into()));
    }
    let (n, h) = (field.nx - 2, field.h);
    let mut f = Vec::with_capacity(n * n);
    for j in 1..=n {
        for i in 1..=n {
            let u = SpinState::from_array(field.values[j * field.nx + i]);
            f.push(u.dist(a) - u.dist(b));
        }
    }
    let lo = h;
    let hi = h * n as f64;
    let level = |x: f64, y: f64| {
        let s = |t: f64| {
            let u = ((t - lo) / h).clamp(0.0, (n - 1) as f64);
            let i = (u.floor() as usize).min(n - 2);
            (i, u - i as f64)
        };
        let ((i, fx), (j, fy)) = (s(x), s(y));
        let v = |i: usize, j: usize| f[j * n + i];
        (v(i, j) * (1.0 - fx) + v(i + 1, j) * fx) * (1.0 - fy) + (v(i, j + 1) * (1.0 - fx) + v(i + 1, j + 1) * fx) * fy
    };
    let wall_tol = 1e-9 * h;
    let lines = contours(n, n, [lo, lo], h, &f);
    let window = 6.0 * eps;
    let mut contacts = Vec::new();
    let mut kappa = Vec::new();
    for c in &lines {
        if c.points.len() < 2 {
            continue;
        }
        if !c.closed {
            for end in [0usize, 1] {
                let pts: Vec<[f64; 2]> =
                    if end == 0 { c.points.clone() } else { c.points.iter().rev().copied().collect() };
                let p0 = pts[0];
                // inward normal and tangent of the wall touched at p0
                let (normal, tangent) = if (p0[1] - lo).abs() < wall_tol {
                    ([0.0, 1.0], [1.0, 0.0])
                } else if (p0[1] - hi).abs() < wall_tol {
                    ([0.0, -1.0], [1.0, 0.0])
                } else if (p0[0] - lo).abs() < wall_tol {
                    ([1.0, 0.0], [0.0, 1.0])
                } else {
                    ([-1.0, 0.0], [0.0, 1.0])
                };
                let near: Vec<[f64; 2]> = pts
                    .iter()
                    .take_while(|p| ((p[0] - p0[0]).powi(2) + (p[1] - p0[1]).powi(2)).sqrt() <= window)
                    .copied()
                    .collect();
                if near.len() < 2 {
                    continue;
                }
                let mut dir = principal_direction(&near);
                if dir[0] * normal[0] + dir[1] * normal[1] < 0.0 {
                    dir = [-dir[0], -dir[1]];
                }
                let probe = |t: [f64; 2]| {
                    let along = 0.5 * window;
                    level(p0[0] + along * t[0] + h * normal[0], p0[1] + along * t[1] + h * normal[1])
                };
                let minus = [-tangent[0], -tangent[1]];
                let t_a = if probe(tangent) < probe(minus) { tangent } else { minus };
                let cos = (dir[0] * t_a[0] + dir[1] * t_a[1]).clamp(-1.0, 1.0);
                contacts.push(ContactPoint { point: p0, theta: cos.acos() });
            }
        }
        let keep: Vec<[f64; 2]> =
            c.points.iter().filter(|p| p[0].min(p[1]).min(1.0 - p[0]).min(1.0 - p[1]) > 3.0 * eps).copied().collect();
        let stride = 3;
        for k in stride..keep.len().saturating_sub(stride) {
            kappa.push(signed_curvature(keep[k - stride], keep[k], keep[k + stride]));
        }
    }
    if contacts.is_empty() {
        return Err(Error::NoContact);
    }
    let theta = contacts.iter().map(|c| c.theta).sum::<f64>() / contacts.len() as f64;
    let (mean_abs, var) = if kappa.is_empty() {
        (0.0, 0.0)
    } else {
        let m = kappa.iter().sum::<f64>() / kappa.len() as f64;
        (
            kappa.iter().map(|k| k.abs()).sum::<f64>() / kappa.len() as f64,
            kappa.iter().map(|k| (k - m).powi(2)).sum::<f64>() / kappa.len() as f64,
        )
    };
    Ok(ContactAngle { theta, contacts, curvature_mean_abs: mean_abs, curvature_variance: var })
}

fn principal_direction(pts: &[[f64; 2]]) -> [f64; 2] {
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p[0]).sum::<f64>() / k;
    let my = pts.iter().map(|p| p[1]).sum::<f64>() / k;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in pts {
        let (dx, dy) = (p[0] - mx, p[1] - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    [angle.cos(), angle.sin()]
}

fn signed_curvature(p0: [f64; 2], p1: [f64; 2], p2: [f64; 2]) -> f64 {
    let d = |a: [f64; 2], b: [f64; 2]| ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    let cross = (p1[0] - p0[0]) * (p2[1] - p1[1]) - (p1[1] - p0[1]) * (p2[0] - p1[0]);
    let denom = d(p0, p1) * d(p1, p2) * d(p0, p2);
    if denom > 0.0 {
        2.0 * cross / denom
    } else {
        0.0
    }
}
