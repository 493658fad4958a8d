//! Normalized parameters, spin states and the regime taxonomy.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalized physical parameters. `alpha = c_s/c_n`, `q` is in units of `c_n`,
/// `n` and `m` are mass and magnetization per unit volume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub q: f64,
    pub n: f64,
    pub m: f64,
    pub omega_volume: f64,
    pub dim: u8,
}

impl ModelParams {
    /// Unit-volume, one-dimensional parameters.
    pub fn new(alpha: f64, q: f64, n: f64, m: f64) -> Result<Self> {
        Self::with_domain(alpha, q, n, m, 1.0, 1)
    }

    pub fn with_domain(alpha: f64, q: f64, n: f64, m: f64, omega_volume: f64, dim: u8) -> Result<Self> {
        let p = ModelParams { alpha, q, n, m, omega_volume, dim };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.alpha, self.q, self.n, self.m, self.omega_volume].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("parameters must be finite".into()));
        }
        if self.n <= 0.0 {
            return Err(Error::NonPositiveMass(self.n));
        }
        if self.alpha.abs() > 1.0 {
            return Err(Error::InvalidCoupling(format!("|alpha| = {} exceeds 1", self.alpha.abs())));
        }
        if self.m.abs() > self.n {
            return Err(Error::MagnetizationExceedsMass { mag: self.m.abs(), mass: self.n });
        }
        if self.omega_volume <= 0.0 {
            return Err(Error::InvalidParameter(format!("domain volume must be positive (got {})", self.omega_volume)));
        }
        if !(1..=2).contains(&self.dim) {
            return Err(Error::InvalidParameter(format!("dim must be 1 or 2 (got {})", self.dim)));
        }
        Ok(())
    }

    /// Total mass N = n |Ω|.
    pub fn total_mass(&self) -> f64 {
        self.n * self.omega_volume
    }

    /// Total magnetization M = m |Ω|.
    pub fn total_magnetization(&self) -> f64 {
        self.m * self.omega_volume
    }
}

/// Divide the Thomas-Fermi energy by `c_n` and the constraints by the volume.
pub fn normalize_params(
    c_n: f64,
    c_s: f64,
    q_raw: f64,
    total_mass: f64,
    total_magnetization: f64,
    volume: f64,
    dim: u8,
) -> Result<ModelParams> {
    if total_mass <= 0.0 || total_mass.is_nan() {
        return Err(Error::NonPositiveMass(total_mass));
    }
    if c_n <= 0.0 || c_n.is_nan() {
        return Err(Error::InvalidCoupling(format!("c_n must be positive (got {c_n})")));
    }
    if c_s.abs() > c_n || c_s.is_nan() {
        return Err(Error::InvalidCoupling(format!("|c_s| = {} exceeds c_n = {c_n}", c_s.abs())));
    }
    if total_magnetization.abs() > total_mass {
        return Err(Error::MagnetizationExceedsMass { mag: total_magnetization.abs(), mass: total_mass });
    }
    if volume <= 0.0 || volume.is_nan() {
        return Err(Error::InvalidParameter(format!("volume must be positive (got {volume})")));
    }
    ModelParams::with_domain(c_s / c_n, q_raw / c_n, total_mass / volume, total_magnetization / volume, volume, dim)
}

/// Map m to |m|. When `flipped` is true, solutions of the reduced problem must
/// have u₁ and u₋₁ exchanged.
pub fn reduce_symmetry(params: &ModelParams) -> (ModelParams, bool) {
    let flipped = params.m < 0.0;
    let mut p = *params;
    if flipped {
        p.m = -p.m;
    }
    (p, flipped)
}

/// Amplitudes (u₁, u₀, u₋₁).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpinState {
    pub u1: f64,
    pub u0: f64,
    pub um1: f64,
}

impl SpinState {
    pub const ZERO: SpinState = SpinState { u1: 0.0, u0: 0.0, um1: 0.0 };

    pub const fn new(u1: f64, u0: f64, um1: f64) -> Self {
        SpinState { u1, u0, um1 }
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        SpinState::new(v[0], v[1], v[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.u1, self.u0, self.um1]
    }

    /// Densities (u₁², u₀², u₋₁²).
    pub fn densities(self) -> [f64; 3] {
        [self.u1 * self.u1, self.u0 * self.u0, self.um1 * self.um1]
    }

    /// |u|², the local mass density.
    pub fn density(self) -> f64 {
        self.u1 * self.u1 + self.u0 * self.u0 + self.um1 * self.um1
    }

    /// u₁² − u₋₁², the local magnetization density.
    pub fn magnetization(self) -> f64 {
        self.u1 * self.u1 - self.um1 * self.um1
    }

    pub fn swapped(self) -> Self {
        SpinState::new(self.um1, self.u0, self.u1)
    }

    pub fn abs(self) -> Self {
        SpinState::new(self.u1.abs(), self.u0.abs(), self.um1.abs())
    }

    pub fn is_nonnegative(self) -> bool {
        self.u1 >= 0.0 && self.u0 >= 0.0 && self.um1 >= 0.0
    }

    pub fn dist(self, other: SpinState) -> f64 {
        let d = [self.u1 - other.u1, self.u0 - other.u0, self.um1 - other.um1];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }

    pub fn norm(self) -> f64 {
        self.density().sqrt()
    }
}

impl fmt::Display for SpinState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.u1, self.u0, self.um1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "NS_MS")]
    NsMs,
    #[serde(rename = "NS_2C")]
    Ns2c,
    #[serde(rename = "PURE_2C")]
    Pure2c,
    #[serde(rename = "MS_MS")]
    MsMs,
    #[serde(rename = "PURE_3C")]
    Pure3c,
    #[serde(rename = "FERRO_Q0_DEGENERATE")]
    FerroQ0Degenerate,
    #[serde(rename = "ALPHA0_Q0")]
    Alpha0Q0,
    #[serde(rename = "ALPHA0_QPOS")]
    Alpha0QPos,
    #[serde(rename = "ALPHA0_QNEG")]
    Alpha0QNeg,
}

impl Regime {
    pub const ALL: [Regime; 9] = [
        Regime::NsMs,
        Regime::Ns2c,
        Regime::Pure2c,
        Regime::MsMs,
        Regime::Pure3c,
        Regime::FerroQ0Degenerate,
        Regime::Alpha0Q0,
        Regime::Alpha0QPos,
        Regime::Alpha0QNeg,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::NsMs => "NS_MS",
            Regime::Ns2c => "NS_2C",
            Regime::Pure2c => "PURE_2C",
            Regime::MsMs => "MS_MS",
            Regime::Pure3c => "PURE_3C",
            Regime::FerroQ0Degenerate => "FERRO_Q0_DEGENERATE",
            Regime::Alpha0Q0 => "ALPHA0_Q0",
            Regime::Alpha0QPos => "ALPHA0_QPOS",
            Regime::Alpha0QNeg => "ALPHA0_QNEG",
        }
    }

    /// Regimes whose ground state is a two-state mixture.
    pub fn is_mixed(self) -> bool {
        matches!(self, Regime::NsMs | Regime::Ns2c | Regime::MsMs)
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Regime::ALL
            .iter()
            .copied()
            .find(|r| r.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Usage(format!("unknown regime '{s}'")))
    }
}

/// Regime-dependent calibration constants; absent keys are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Calibration {
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    pub big_a: Option<f64>,
    #[serde(rename = "B", skip_serializing_if = "Option::is_none")]
    pub big_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_mult: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k2: Option<f64>,
}

impl Calibration {
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        [
            ("A", self.big_a),
            ("B", self.big_b),
            ("b", self.b),
            ("a_mult", self.a_mult),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("k1", self.k1),
            ("k2", self.k2),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
        .collect()
    }
}

/// Piecewise-constant Thomas-Fermi ground state `a` on a set of relative size `r`, `b` elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TFSolution {
    pub regime: Regime,
    pub state_a: SpinState,
    pub state_b: Option<SpinState>,
    pub r: f64,
    pub calib: Calibration,
    /// Thomas-Fermi energy over the whole domain.
    pub e0: f64,
    /// True when the minimizer is not unique and a representative is returned.
    pub degenerate: bool,
}

impl TFSolution {
    fn b_or_zero(&self) -> SpinState {
        self.state_b.unwrap_or(SpinState::ZERO)
    }

    pub fn mass(&self) -> f64 {
        self.r * self.state_a.density() + (1.0 - self.r) * self.b_or_zero().density()
    }

    pub fn magnetization(&self) -> f64 {
        self.r * self.state_a.magnetization() + (1.0 - self.r) * self.b_or_zero().magnetization()
    }

    pub fn mass_residual(&self, params: &ModelParams) -> f64 {
        (self.mass() - params.n).abs()
    }

    pub fn magnetization_residual(&self, params: &ModelParams) -> f64 {
        (self.magnetization() - params.m).abs()
    }

    /// Exchange u₁ and u₋₁ in every state.
    pub fn swapped(&self) -> Self {
        let mut s = self.clone();
        s.state_a = s.state_a.swapped();
        s.state_b = s.state_b.map(SpinState::swapped);
        s
    }

    /// The wells of the calibrated potential (one for pure states).
    pub fn wells(&self) -> Vec<SpinState> {
        let mut w = vec![self.state_a];
        if let Some(b) = self.state_b {
            w.push(b);
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn normalization_examples() {
        let p = normalize_params(1.0, 0.8, 0.1, 1.0, 0.2, 1.0, 1).unwrap();
        assert_eq!((p.alpha, p.q, p.n, p.m), (0.8, 0.1, 1.0, 0.2));
        let p = normalize_params(2.0, 1.6, 0.2, 2.0, 0.4, 2.0, 1).unwrap();
        assert!(close(p.alpha, 0.8, 1e-15) && close(p.q, 0.1, 1e-15));
        assert!(close(p.n, 1.0, 1e-15) && close(p.m, 0.2, 1e-15));
        let na = normalize_params(15.587, 0.4871, 0.0, 1.0, 0.0, 1.0, 1).unwrap();
        assert!(close(na.alpha, 0.03125, 2e-5));
    }

    #[test]
    fn normalization_errors() {
        assert!(matches!(normalize_params(1.0, 0.5, 0.0, 0.0, 0.0, 1.0, 1), Err(Error::NonPositiveMass(_))));
        assert!(matches!(normalize_params(0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1), Err(Error::InvalidCoupling(_))));
        assert!(matches!(normalize_params(1.0, 1.5, 0.0, 1.0, 0.0, 1.0, 1), Err(Error::InvalidCoupling(_))));
        assert!(matches!(
            normalize_params(1.0, 0.5, 0.0, 1.0, 1.5, 1.0, 1),
            Err(Error::MagnetizationExceedsMass { .. })
        ));
    }

    #[test]
    fn symmetry_reduction() {
        let p = ModelParams::new(0.5, 0.1, 1.0, 0.2).unwrap();
        assert_eq!(reduce_symmetry(&p), (p, false));
        let neg = ModelParams::new(0.5, 0.1, 1.0, -0.2).unwrap();
        let (r, flipped) = reduce_symmetry(&neg);
        assert!(flipped);
        assert_eq!(r.m, 0.2);
        let zero = ModelParams::new(0.5, 0.1, 1.0, 0.0).unwrap();
        assert_eq!(reduce_symmetry(&zero), (zero, false));
    }

    #[test]
    fn regime_tags_round_trip() {
        for r in Regime::ALL {
            assert_eq!(r.as_str().parse::<Regime>().unwrap(), r);
            let js = serde_json::to_string(&r).unwrap();
            assert_eq!(js, format!("\"{}\"", r.as_str()));
        }
    }

    #[test]
    fn state_helpers() {
        let s = SpinState::new(1.0, 2.0, 3.0);
        assert_eq!(s.density(), 14.0);
        assert_eq!(s.magnetization(), -8.0);
        assert_eq!(s.swapped().swapped(), s);
        assert_eq!(SpinState::new(-1.0, 0.5, -2.0).abs(), SpinState::new(1.0, 0.5, 2.0));
    }
}
