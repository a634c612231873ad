//! Closed-form evolution of the mirror (mode 0) and the Stokes / anti-Stokes
//! sidebands (modes 1, 2).
//!
//! In scaled time the quadratures obey `dξ/dt′ = G ξ` with
//! `c = 1/√(r² − 1)`, `s = r c`:
//!
//! ```text
//! dX₀ = c X₁ − s X₂     dP₀ = −c P₁ − s P₂
//! dX₁ = c X₀            dP₁ = −c P₀
//! dX₂ = s X₀            dP₂ = s P₀
//! ```
//!
//! `s² − c² = 1` gives `G³ = −G`, hence `exp(G t′) = I + sin t′ G + (1 − cos t′) G²`.

use crate::error::{domain, Error, Result};
use crate::gaussian_core::{make_initial_state, GaussianState, SymplecticForm};
use crate::linalg::Matrix;
use crate::qd::Qd;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingParams {
    r: f64,
    nbar: f64,
}

impl CouplingParams {
    pub fn new(r: f64, nbar: f64) -> Result<CouplingParams> {
        check_r(r)?;
        if !nbar.is_finite() || nbar < 0.0 {
            return Err(domain(format!("mean thermal number must be finite and >= 0, got {nbar}")));
        }
        Ok(CouplingParams { r, nbar })
    }

    /// From the optical pump frequency and the mirror frequency.
    pub fn from_frequencies(omega0: f64, omega_m: f64, nbar: f64) -> Result<CouplingParams> {
        CouplingParams::new(coupling_ratio(omega0, omega_m)?, nbar)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    pub fn with_nbar(&self, nbar: f64) -> Result<CouplingParams> {
        CouplingParams::new(self.r, nbar)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CmCoefficients {
    pub q0: Qd,
    pub q1: Qd,
    pub q2: Qd,
    pub t0: Qd,
    pub t1: Qd,
    pub t2: Qd,
}

impl CmCoefficients {
    pub fn q(&self, k: usize) -> Qd {
        [self.q0, self.q1, self.q2][k]
    }

    pub fn t(&self, k: usize) -> Qd {
        [self.t0, self.t1, self.t2][k]
    }

    pub fn to_f64(&self) -> [f64; 6] {
        [self.q0, self.q1, self.q2, self.t0, self.t1, self.t2].map(Qd::to_f64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticTransform {
    matrix: Matrix,
}

impl SymplecticTransform {
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Largest entry of `SΩSᵀ − Ω`.
    pub fn symplectic_residual(&self) -> Qd {
        let om = SymplecticForm::new(self.matrix.rows() / 2);
        let lhs = &(&self.matrix * om.matrix()) * &self.matrix.transpose();
        (&lhs - om.matrix()).max_abs()
    }

    pub fn apply(&self, state: &GaussianState) -> Result<GaussianState> {
        if state.cm().rows() != self.matrix.rows() {
            return Err(Error::InvalidArgument("transform and state sizes differ".into()));
        }
        let s = &self.matrix;
        let cm = (&(s * state.cm()) * &s.transpose()).symmetrized();
        GaussianState::new_unchecked(s.mul_vec(state.mean()), cm)
    }
}

fn check_r(r: f64) -> Result<()> {
    if !r.is_finite() || r <= 1.0 {
        return Err(domain(format!("coupling ratio must be finite and > 1, got {r}")));
    }
    Ok(())
}

/// `[(ω₀ + Ω)/(ω₀ − Ω)]^{1/2}`.
pub fn coupling_ratio(omega0: f64, omega_m: f64) -> Result<f64> {
    if !omega0.is_finite() || !omega_m.is_finite() || omega_m < 0.0 || omega0 <= omega_m {
        return Err(domain(format!("need omega0 > Omega >= 0, got {omega0}, {omega_m}")));
    }
    Ok(((omega0 + omega_m) / (omega0 - omega_m)).sqrt())
}

fn c_and_s(r: f64) -> Result<(Qd, Qd)> {
    check_r(r)?;
    let rq = Qd::from(r);
    let c = ((rq - 1.0) * (rq + 1.0)).sqrt().recip();
    Ok((c, rq * c))
}

pub fn generator(r: f64) -> Result<Matrix> {
    let (c, s) = c_and_s(r)?;
    let mut g = Matrix::zeros(6, 6);
    g[(0, 2)] = c;
    g[(0, 4)] = -s;
    g[(1, 3)] = -c;
    g[(1, 5)] = -s;
    g[(2, 0)] = c;
    g[(3, 1)] = -c;
    g[(4, 0)] = s;
    g[(5, 1)] = s;
    Ok(g)
}

pub fn transfer_matrix(t: f64, r: f64) -> Result<SymplecticTransform> {
    if !t.is_finite() {
        return Err(domain("time must be finite"));
    }
    transfer_matrix_at(Qd::from(t), r)
}

/// As [`transfer_matrix`], with the time given in extended precision.
pub fn transfer_matrix_at(t: Qd, r: f64) -> Result<SymplecticTransform> {
    if !t.is_finite() {
        return Err(domain("time must be finite"));
    }
    let g = generator(r)?;
    let (a, b) = angle_weights(t);
    let g2 = &g * &g;
    let m = &(&Matrix::identity(6) + &g.scale(a)) + &g2.scale(b);
    Ok(SymplecticTransform { matrix: m })
}

/// `(sin t, 1 − cos t)`, through the half-angle pair `(σ, κ)` as `2σκ` and
/// `2σ²` so that nothing cancels near `t = 0 mod 2π`.
fn angle_weights(t: Qd) -> (Qd, Qd) {
    let turns = (t / Qd::TAU).round();
    let reduced = t - turns * Qd::TAU;
    let (sigma, kappa) = reduced.ldexp(-1).sin_cos();
    ((sigma * kappa).ldexp(1), sigma.sqr().ldexp(1))
}

pub fn evolve(t: f64, params: &CouplingParams) -> Result<GaussianState> {
    if !t.is_finite() {
        return Err(domain("time must be finite"));
    }
    evolve_at(Qd::from(t), params)
}

pub fn evolve_at(t: Qd, params: &CouplingParams) -> Result<GaussianState> {
    let s = transfer_matrix_at(t, params.r)?;
    s.apply(&make_initial_state(params.nbar)?)
}

pub fn coefficients(t: f64, params: &CouplingParams) -> Result<CmCoefficients> {
    coefficients_of(&evolve(t, params)?)
}

/// As [`coefficients`], at an extended-precision time, without forming the
/// full covariance. The initial covariance is diagonal, so each entry is a
/// weighted dot product of two rows of `S`.
pub fn coefficients_at(t: Qd, params: &CouplingParams) -> Result<CmCoefficients> {
    if !t.is_finite() {
        return Err(domain("time must be finite"));
    }
    let g = generator(params.r)?;
    let (a, b) = angle_weights(t);
    // rows 0, 2, 4 of S = I + aG + bG²; G never mixes X with P
    let row = |i: usize| -> [Qd; 6] {
        let mut out = [Qd::ZERO; 6];
        out[i] = Qd::ONE;
        for l in 0..6 {
            let gil = g[(i, l)];
            if gil == Qd::ZERO {
                continue;
            }
            out[l] += a * gil;
            for m in 0..6 {
                if g[(l, m)] != Qd::ZERO {
                    out[m] += b * gil * g[(l, m)];
                }
            }
        }
        out
    };
    let rows = [row(0), row(2), row(4)];
    let weights = [Qd::from(params.nbar) + 0.5, Qd::HALF, Qd::HALF];
    let entry = |x: usize, y: usize| -> Qd { (0..3).map(|m| rows[x][2 * m] * rows[y][2 * m] * weights[m]).sum() };
    Ok(CmCoefficients {
        q0: entry(0, 0),
        q1: entry(1, 1),
        q2: entry(2, 2),
        t0: entry(1, 2),
        t1: -entry(0, 2),
        t2: entry(0, 1),
    })
}

pub const PATTERN_TOL: f64 = 1e-9;

/// Reads `(Q₀, Q₁, Q₂, T₀, T₁, T₂)` off a three-mode covariance, checking the
/// sign pattern
///
/// ```text
///  Q₀   0   T₂   0  −T₁   0
///   0  Q₀    0 −T₂    0 −T₁
///  T₂   0   Q₁   0   T₀   0
///   0 −T₂    0  Q₁    0 −T₀
/// −T₁   0   T₀   0   Q₂   0
///   0 −T₁    0 −T₀    0  Q₂
/// ```
pub fn coefficients_of(state: &GaussianState) -> Result<CmCoefficients> {
    if state.n_modes() != 3 {
        return Err(Error::InvalidArgument("coefficients need a three-mode state".into()));
    }
    let v = state.cm();
    let co = CmCoefficients {
        q0: v[(0, 0)],
        q1: v[(2, 2)],
        q2: v[(4, 4)],
        t0: v[(2, 4)],
        t1: -v[(0, 4)],
        t2: v[(0, 2)],
    };
    let expected = Matrix::from_fn(6, 6, |i, j| {
        let (mi, mj) = (i / 2, j / 2);
        let (pi, pj) = (i % 2 == 1, j % 2 == 1);
        if pi != pj {
            return Qd::ZERO;
        }
        let val = match (mi.min(mj), mi.max(mj)) {
            (a, b) if a == b => co.q(a),
            (0, 1) => co.t2,
            (0, 2) => -co.t1,
            (1, 2) => co.t0,
            _ => unreachable!(),
        };
        // momenta flip the sign of the optical-optical and mirror-Stokes terms
        if pi && (mi, mj) != (0, 2) && (mi, mj) != (2, 0) && mi != mj {
            -val
        } else {
            val
        }
    });
    let dev = (v - &expected).max_abs();
    if dev.to_f64() > PATTERN_TOL {
        return Err(Error::Internal(format!("covariance departs from the expected sign pattern by {:e}", dev)));
    }
    Ok(co)
}
