//! Closed-form Thomas-Fermi ground states and the (q, m) phase classification.

use crate::error::{Error, Result};
use crate::model::{reduce_symmetry, Calibration, ModelParams, Regime, SpinState, TFSolution};
use crate::potential::h_tf;

/// A real cubic c₃x³ + c₂x² + c₁x + c₀ with a sign-changing bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicProblem {
    pub coeffs: [f64; 4],
    pub lo: f64,
    pub hi: f64,
    pub tol: f64,
}

impl CubicProblem {
    pub fn eval(&self, x: f64) -> f64 {
        let [c3, c2, c1, c0] = self.coeffs;
        ((c3 * x + c2) * x + c1) * x + c0
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let [c3, c2, c1, _] = self.coeffs;
        (3.0 * c3 * x + 2.0 * c2) * x + c1
    }

    /// Bisection to 1e-14 followed by one bracket-guarded Newton step.
    /// An endpoint that is already a root (double roots included) is returned as is.
    pub fn solve(&self) -> Result<f64> {
        let (mut lo, mut hi) = (self.lo, self.hi);
        let (mut flo, fhi) = (self.eval(lo), self.eval(hi));
        if flo == 0.0 {
            return Ok(lo);
        }
        if fhi == 0.0 {
            return Ok(hi);
        }
        if flo.signum() == fhi.signum() {
            if flo.abs() <= self.tol {
                return Ok(lo);
            }
            if fhi.abs() <= self.tol {
                return Ok(hi);
            }
            return Err(Error::RootNotFound(format!("no sign change on [{lo}, {hi}]: f = {flo}, {fhi}")));
        }
        let x = bisect(|x| self.eval(x), &mut lo, &mut hi, &mut flo, 1e-14 * (1.0 + self.hi.abs().max(self.lo.abs())));
        Ok(self.polish(x, lo, hi))
    }

    fn polish(&self, x: f64, lo: f64, hi: f64) -> f64 {
        let d = self.deriv(x);
        if d == 0.0 {
            return x;
        }
        let y = x - self.eval(x) / d;
        if y >= lo && y <= hi && self.eval(y).abs() <= self.eval(x).abs() {
            y
        } else {
            x
        }
    }
}

fn bisect(f: impl Fn(f64) -> f64, lo: &mut f64, hi: &mut f64, flo: &mut f64, tol: f64) -> f64 {
    for _ in 0..400 {
        let mid = 0.5 * (*lo + *hi);
        if *hi - *lo <= tol || mid <= *lo || mid >= *hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            *lo = mid;
            *hi = mid;
            break;
        }
        if fm.signum() == flo.signum() {
            *lo = mid;
            *flo = fm;
        } else {
            *hi = mid;
        }
    }
    0.5 * (*lo + *hi)
}

/// Lower critical field q₁ = −n + √(n² + αm²).
pub fn critical_q1(params: &ModelParams) -> Result<f64> {
    if params.alpha <= 0.0 {
        return Err(Error::WrongSign("critical_q1"));
    }
    let (n, m, a) = (params.n, params.m.abs(), params.alpha);
    // rationalized to avoid cancellation for small αm²
    Ok(a * m * m / (n + (n * n + a * m * m).sqrt()))
}

/// Upper critical field q₂ = (1 − 1/√(1+α))(n + (√(1+α) − 1)m).
pub fn critical_q2(params: &ModelParams) -> Result<f64> {
    if params.alpha <= 0.0 {
        return Err(Error::WrongSign("critical_q2"));
    }
    let s = (1.0 + params.alpha).sqrt();
    Ok((1.0 - 1.0 / s) * (params.n + (s - 1.0) * params.m.abs()))
}

pub fn classify(params: &ModelParams) -> Regime {
    let q = params.q;
    if params.alpha > 0.0 {
        let q1 = critical_q1(params).expect("alpha > 0");
        let q2 = critical_q2(params).expect("alpha > 0");
        if q < q1 {
            Regime::Pure2c
        } else if q > q2 {
            Regime::NsMs
        } else {
            Regime::Ns2c
        }
    } else if params.alpha < 0.0 {
        if q < 0.0 {
            Regime::MsMs
        } else if q > 0.0 {
            Regime::Pure3c
        } else {
            Regime::FerroQ0Degenerate
        }
    } else if q > 0.0 {
        Regime::Alpha0QPos
    } else if q < 0.0 {
        Regime::Alpha0QNeg
    } else {
        Regime::Alpha0Q0
    }
}

/// |Ω| (r H_TF(a) + (1 − r) H_TF(b)).
pub fn tf_energy(sol: &TFSolution, params: &ModelParams) -> f64 {
    let ea = h_tf(sol.state_a, params);
    let eb = sol.state_b.map_or(0.0, |b| h_tf(b, params));
    let inner = if sol.r >= 1.0 {
        ea
    } else if sol.r <= 0.0 {
        eb
    } else {
        sol.r * ea + (1.0 - sol.r) * eb
    };
    params.omega_volume * inner
}

fn finish(mut sol: TFSolution, params: &ModelParams) -> TFSolution {
    sol.e0 = tf_energy(&sol, params);
    sol
}

fn require_reduced(params: &ModelParams) -> Result<()> {
    params.validate()?;
    if params.m < 0.0 {
        return Err(Error::InvalidParameter("solver expects reduced parameters with m >= 0".into()));
    }
    Ok(())
}

pub fn solve_ns_ms(params: &ModelParams) -> Result<TFSolution> {
    require_reduced(params)?;
    if params.alpha <= 0.0 {
        return Err(Error::mismatch("NS_MS", classify(params)));
    }
    let q2 = critical_q2(params)?;
    if params.q <= q2 {
        return Err(Error::mismatch("NS_MS (q > q2)", classify(params)));
    }
    let (n, m, q) = (params.n, params.m, params.q);
    let s = (1.0 + params.alpha).sqrt();
    let big_a = n + (s - 1.0) * m;
    let r = (s * m / big_a).min(1.0);
    let calib = Calibration {
        big_a: Some(big_a),
        beta1: Some(-2.0 * big_a),
        beta2: Some(2.0 * big_a - 2.0 * q - 2.0 * big_a * s),
        ..Default::default()
    };
    Ok(finish(
        TFSolution {
            regime: Regime::NsMs,
            state_a: SpinState::new((big_a / s).sqrt(), 0.0, 0.0),
            state_b: Some(SpinState::new(0.0, big_a.sqrt(), 0.0)),
            r,
            calib,
            e0: 0.0,
            degenerate: false,
        },
        params,
    ))
}

fn two_c_state(n: f64, m: f64) -> SpinState {
    SpinState::new(((n + m) / 2.0).sqrt(), 0.0, ((n - m).max(0.0) / 2.0).sqrt())
}

fn k_constants(alpha: f64, big_a: f64, big_b: f64) -> (f64, f64) {
    let rad = (big_a * big_a + alpha * big_b * big_b).sqrt();
    (big_a / rad, big_b / rad)
}

pub fn solve_2c(params: &ModelParams) -> Result<TFSolution> {
    require_reduced(params)?;
    if params.alpha <= 0.0 {
        return Err(Error::mismatch("PURE_2C", classify(params)));
    }
    let q1 = critical_q1(params)?;
    if params.q >= q1 {
        return Err(Error::mismatch("PURE_2C (q < q1)", classify(params)));
    }
    Ok(pure_2c_unchecked(params))
}

fn pure_2c_unchecked(params: &ModelParams) -> TFSolution {
    let (n, m) = (params.n, params.m);
    let (k1, k2) = k_constants(params.alpha, n, m);
    finish(
        TFSolution {
            regime: Regime::Pure2c,
            state_a: two_c_state(n, m),
            state_b: None,
            r: 1.0,
            calib: Calibration { big_a: Some(n), big_b: Some(m), k1: Some(k1), k2: Some(k2), ..Default::default() },
            e0: 0.0,
            degenerate: false,
        },
        params,
    )
}

/// Stable branch of the NS+2C volume-fraction relation, q̄ = Q1(r), with η = αm²/n².
pub fn branch_q1(r: f64, eta: f64) -> f64 {
    let d = (r.powi(4) + eta * (2.0 * r.powi(3) - r * r)).max(0.0);
    eta / (r * r + d.sqrt())
}

/// The other branch, Q2(r) = (−r² − √D)/(2r³ − r²); only defined where D ≥ 0 and r ≠ 1/2.
pub fn branch_q2(r: f64, eta: f64) -> f64 {
    let d = (r.powi(4) + eta * (2.0 * r.powi(3) - r * r)).max(0.0);
    (-r * r - d.sqrt()) / (2.0 * r.powi(3) - r * r)
}

/// Admissibility bound h(r) = (1 − (m/n)/r)/(1 − r) coming from B ≤ A.
pub fn admissibility_h(r: f64, m_over_n: f64) -> f64 {
    (1.0 - m_over_n / r) / (1.0 - r)
}

/// Turning point r₀ = −η + √(η² + η) where D(r) changes sign.
pub fn turning_point_r0(eta: f64) -> f64 {
    eta / (eta + (eta * eta + eta).sqrt())
}

/// Lower end r₂ of the admissible interval for the NS+2C root.
pub fn lower_root_bound(params: &ModelParams) -> f64 {
    let s = (1.0 + params.alpha).sqrt();
    if params.m <= 0.0 {
        return 0.0;
    }
    s / (s - 1.0 + params.n / params.m)
}

/// 2q²r³ + (2qn − q²)r² − αm², bracketed on [r₂, 1].
pub fn ns2c_cubic(params: &ModelParams) -> CubicProblem {
    let (q, n, m, a) = (params.q, params.n, params.m, params.alpha);
    CubicProblem {
        coeffs: [2.0 * q * q, 2.0 * q * n - q * q, 0.0, -a * m * m],
        lo: lower_root_bound(params),
        hi: 1.0,
        tol: 1e-12,
    }
}

pub fn solve_ns_2c(params: &ModelParams) -> Result<TFSolution> {
    require_reduced(params)?;
    if params.alpha <= 0.0 {
        return Err(Error::mismatch("NS_2C", classify(params)));
    }
    let q1 = critical_q1(params)?;
    let q2 = critical_q2(params)?;
    if params.q < q1 || params.q > q2 {
        return Err(Error::mismatch("NS_2C (q1 <= q <= q2)", classify(params)));
    }
    let (alpha, q, n, m) = (params.alpha, params.q, params.n, params.m);

    if m == 0.0 {
        // pure nematic with r = 0; the 2C well still defines the calibration
        let big_a = n - q;
        let big_b = ((2.0 * n - q) * q / alpha).max(0.0).sqrt();
        let (k1, k2) = k_constants(alpha, big_a, big_b);
        let a = SpinState::new(((big_a + big_b) / 2.0).sqrt(), 0.0, ((big_a - big_b).max(0.0) / 2.0).sqrt());
        return Ok(finish(
            TFSolution {
                regime: Regime::Ns2c,
                state_a: a,
                state_b: Some(SpinState::new(0.0, n.sqrt(), 0.0)),
                r: 0.0,
                calib: Calibration {
                    big_a: Some(big_a),
                    big_b: Some(big_b),
                    k1: Some(k1),
                    k2: Some(k2),
                    ..Default::default()
                },
                e0: 0.0,
                degenerate: false,
            },
            params,
        ));
    }

    let r = ns2c_volume_fraction(params)?;
    let big_a = n + (r - 1.0) * q;
    let big_b = (m / r).min(big_a);
    let (k1, k2) = k_constants(alpha, big_a, big_b);
    let a = SpinState::new(((big_a + big_b) / 2.0).sqrt(), 0.0, ((big_a - big_b).max(0.0) / 2.0).sqrt());
    let b = SpinState::new(0.0, (big_a * big_a + alpha * big_b * big_b).sqrt().sqrt(), 0.0);
    Ok(finish(
        TFSolution {
            regime: Regime::Ns2c,
            state_a: a,
            state_b: Some(b),
            r,
            calib: Calibration {
                big_a: Some(big_a),
                big_b: Some(big_b),
                k1: Some(k1),
                k2: Some(k2),
                ..Default::default()
            },
            e0: 0.0,
            degenerate: false,
        },
        params,
    ))
}

/// Root r ∈ [r₂, 1] of Q1(r) = q/n, polished on the cubic.
pub fn ns2c_volume_fraction(params: &ModelParams) -> Result<f64> {
    let (q, n, m) = (params.q, params.n, params.m);
    let eta = params.alpha * m * m / (n * n);
    let qbar = q / n;
    let r2 = lower_root_bound(params);
    if r2 >= 1.0 {
        return Ok(1.0);
    }
    let f = |r: f64| branch_q1(r, eta) - qbar;
    let (mut lo, mut hi) = (r2, 1.0);
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo <= 0.0 {
        return Ok(lo);
    }
    if fhi >= 0.0 {
        return Ok(hi);
    }
    let r = bisect(f, &mut lo, &mut hi, &mut flo, 1e-15);
    let cubic = ns2c_cubic(params);
    let r = cubic.polish(r, r2, 1.0);
    if !(r2..=1.0).contains(&r) {
        return Err(Error::RootNotFound(format!("volume fraction {r} outside [{r2}, 1]")));
    }
    Ok(r)
}

pub fn solve_ms_ms(params: &ModelParams) -> Result<TFSolution> {
    require_reduced(params)?;
    if params.alpha >= 0.0 || params.q >= 0.0 {
        return Err(Error::mismatch("MS_MS", classify(params)));
    }
    if params.alpha <= -1.0 {
        return Err(Error::DegenerateRegime("MS_MS requires alpha > -1".into()));
    }
    let (n, m) = (params.n, params.m);
    Ok(finish(
        TFSolution {
            regime: Regime::MsMs,
            state_a: SpinState::new(n.sqrt(), 0.0, 0.0),
            state_b: Some(SpinState::new(0.0, 0.0, n.sqrt())),
            r: 0.5 * (1.0 + m / n),
            calib: Calibration { big_a: Some(n), ..Default::default() },
            e0: 0.0,
            degenerate: false,
        },
        params,
    ))
}

/// b³ − (q² + 2αqn)b + 2αq²m on [√max(0, q² + 2αqn), q].
pub fn three_c_cubic(params: &ModelParams) -> CubicProblem {
    let (a, q, n, m) = (params.alpha, params.q, params.n, params.m);
    let l = q * q + 2.0 * a * q * n;
    CubicProblem { coeffs: [1.0, 0.0, -l, 2.0 * a * q * q * m], lo: l.max(0.0).sqrt().min(q), hi: q, tol: 1e-14 }
}

pub fn solve_3c(params: &ModelParams) -> Result<TFSolution> {
    require_reduced(params)?;
    if params.alpha >= 0.0 || params.q <= 0.0 {
        return Err(Error::mismatch("PURE_3C", classify(params)));
    }
    if params.alpha <= -1.0 {
        return Err(Error::DegenerateRegime("PURE_3C requires alpha > -1".into()));
    }
    let (alpha, q, n) = (params.alpha, params.q, params.n);
    let b = three_c_cubic(params).solve()?;
    let a_mult = q / 2.0 - b * b / (2.0 * q);
    let scale = n + a_mult / alpha;
    if scale <= 1e-12 * n {
        return Err(Error::DegenerateRegime(format!(
            "n + a/alpha = {scale:e}: the +-1 components vanish (b = {b}, a = {a_mult})"
        )));
    }
    let u1 = (q + b) / (2.0 * q) * scale.sqrt();
    let um1 = (q - b) / (2.0 * q) * scale.sqrt();
    let u0_sq = (q * q - b * b) / (2.0 * q * q) * n - (q * q + b * b) / (2.0 * q * q) * (a_mult / alpha);
    if u0_sq < -1e-12 {
        return Err(Error::DegenerateRegime(format!("u0^2 = {u0_sq:e} < 0")));
    }
    let state = SpinState::new(u1, u0_sq.max(0.0).sqrt(), um1);
    if (state.density() - n).abs() > 1e-8 * n.max(1.0) {
        return Err(Error::DegenerateRegime(format!("reconstructed mass {} differs from n = {n}", state.density())));
    }
    Ok(finish(
        TFSolution {
            regime: Regime::Pure3c,
            state_a: state,
            state_b: None,
            r: 1.0,
            calib: Calibration { b: Some(b), a_mult: Some(a_mult), ..Default::default() },
            e0: 0.0,
            degenerate: false,
        },
        params,
    ))
}

/// Representative of the infinite family |u₁| + |u₋₁| = √n, u₀² = 2u₁u₋₁ with constant magnetization m.
pub fn solve_ferro_q0(params: &ModelParams) -> Result<TFSolution> {
    require_reduced(params)?;
    if params.alpha >= 0.0 || params.q != 0.0 {
        return Err(Error::mismatch("FERRO_Q0_DEGENERATE", classify(params)));
    }
    let (n, m) = (params.n, params.m);
    let s = n.sqrt();
    let u1 = 0.5 * (s + m / s);
    let um1 = (0.5 * (s - m / s)).max(0.0);
    Ok(finish(
        TFSolution {
            regime: Regime::FerroQ0Degenerate,
            state_a: SpinState::new(u1, (2.0 * u1 * um1).sqrt(), um1),
            state_b: None,
            r: 1.0,
            calib: Calibration::default(),
            e0: 0.0,
            degenerate: true,
        },
        params,
    ))
}

pub fn solve_alpha_zero(params: &ModelParams) -> Result<TFSolution> {
    require_reduced(params)?;
    if params.alpha != 0.0 {
        return Err(Error::mismatch("ALPHA0_*", classify(params)));
    }
    let (n, m, q) = (params.n, params.m, params.q);
    let (regime, state) = if q > 0.0 {
        (Regime::Alpha0QPos, SpinState::new(m.sqrt(), (n - m).max(0.0).sqrt(), 0.0))
    } else if q < 0.0 {
        (Regime::Alpha0QNeg, two_c_state(n, m))
    } else {
        (Regime::Alpha0Q0, two_c_state(n, m))
    };
    Ok(finish(
        TFSolution {
            regime,
            state_a: state,
            state_b: None,
            r: 1.0,
            calib: Calibration::default(),
            e0: 0.0,
            degenerate: true,
        },
        params,
    ))
}

/// Solve the reduced problem for the classified regime.
pub fn solve_reduced(params: &ModelParams) -> Result<TFSolution> {
    match classify(params) {
        Regime::NsMs => solve_ns_ms(params),
        Regime::Ns2c => solve_ns_2c(params),
        Regime::Pure2c => solve_2c(params),
        Regime::MsMs => solve_ms_ms(params),
        Regime::Pure3c => solve_3c(params),
        Regime::FerroQ0Degenerate => solve_ferro_q0(params),
        Regime::Alpha0Q0 | Regime::Alpha0QPos | Regime::Alpha0QNeg => solve_alpha_zero(params),
    }
}

/// Solve for any admissible m, undoing the m → −m reduction on the result.
pub fn solve(params: &ModelParams) -> Result<TFSolution> {
    params.validate()?;
    let (reduced, flipped) = reduce_symmetry(params);
    let sol = solve_reduced(&reduced)?;
    Ok(if flipped { sol.swapped() } else { sol })
}
