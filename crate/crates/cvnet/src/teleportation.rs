//! Continuous-variable teleportation through a two-mode Gaussian channel.
//!
//! Alice mixes the input with her mode on a balanced beam splitter and
//! measures `(x₊, p₋)` for the plus protocol or `(x₋, p₊)` for the minus one.
//! Bob displaces by her result plus a drift correction `δ`. For a pure input
//! with covariance `V_in`
//!
//! ```text
//! F± = exp(−Q±) / √det E±
//! E± = 2 V_in + RAR + B ± (RC + CᵀR),   R = diag(1, −1)
//! Q± = D± E±⁻¹ D±ᵀ,   D± = (−δᴿ ∓ d₁ − d₃, −δᴵ ± d₂ − d₄)
//! ```
//!
//! where `(d₁, d₂, d₃, d₄)` is the channel mean divided by √2.

use num_complex::Complex;

use crate::error::{invalid, Error, Result};
use crate::gaussian_core::GaussianState;
use crate::linalg::Matrix;
use crate::qd::Qd;

/// Complex displacement in extended precision.
pub type Displacement = Complex<Qd>;

pub fn displacement(re: f64, im: f64) -> Displacement {
    Complex::new(Qd::from(re), Qd::from(im))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EprSign {
    Plus,
    Minus,
}

impl EprSign {
    pub fn value(self) -> f64 {
        match self {
            EprSign::Plus => 1.0,
            EprSign::Minus => -1.0,
        }
    }

    fn qd(self) -> Qd {
        Qd::from(self.value())
    }
}

/// `A = aI`, `B = bI`, `C = diag(c, c′)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StandardForm {
    pub a: Qd,
    pub b: Qd,
    pub c: Qd,
    pub c_prime: Qd,
}

impl StandardForm {
    pub fn matrix(&self) -> Matrix {
        let z = Qd::ZERO;
        let (a, b, c, cp) = (self.a, self.b, self.c, self.c_prime);
        Matrix::from_fn(4, 4, |i, j| {
            [[a, z, c, z], [z, a, z, cp], [c, z, b, z], [z, cp, z, b]][i][j]
        })
    }

    /// `⟨ΔX±²⟩ = a + b ± 2c`.
    pub fn var_x(&self, sign: EprSign) -> Qd {
        self.a + self.b + (self.c * sign.qd()).ldexp(1)
    }

    /// `⟨ΔP±²⟩ = a + b ± 2c′`.
    pub fn var_p(&self, sign: EprSign) -> Qd {
        self.a + self.b + (self.c_prime * sign.qd()).ldexp(1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelClass {
    /// `c′ = −c ≠ 0`
    Epr,
    /// `c′ = c ≠ 0`
    SymmetricClassical,
    General,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    alice_mode: usize,
    bob_mode: usize,
    state: GaussianState,
    standard_form: Option<StandardForm>,
}

// Deviations from the standard-form pattern below this (relative to the largest
// entry) are treated as rounding and snapped away.
const PATTERN_SNAP: f64 = 1e-30;

impl Channel {
    /// Validates the covariance and detects the standard form.
    pub fn new(alice_mode: usize, bob_mode: usize, cm: Matrix, drift: [Qd; 4]) -> Result<Channel> {
        check_roles(cm.rows(), alice_mode, bob_mode)?;
        let state = GaussianState::new(drift.to_vec(), cm)?;
        Ok(Channel::trusted(state, alice_mode, bob_mode))
    }

    pub fn from_state(state: &GaussianState, alice_mode: usize, bob_mode: usize) -> Result<Channel> {
        check_roles(state.cm().rows(), alice_mode, bob_mode)?;
        state.validate()?;
        Ok(Channel::trusted(state.clone(), alice_mode, bob_mode))
    }

    pub fn from_standard_form(alice_mode: usize, bob_mode: usize, sf: StandardForm, drift: [Qd; 4]) -> Result<Channel> {
        Channel::new(alice_mode, bob_mode, sf.matrix(), drift)
    }

    /// For states physical by construction.
    pub(crate) fn trusted(state: GaussianState, alice_mode: usize, bob_mode: usize) -> Channel {
        let (mean, cm) = state.into_parts();
        let (cm, standard_form) = match detect_standard_form(&cm) {
            Some(sf) => (sf.matrix(), Some(sf)),
            None => (cm, None),
        };
        let state = GaussianState::new_unchecked(mean, cm).expect("shape already checked");
        Channel { alice_mode, bob_mode, state, standard_form }
    }

    pub fn alice_mode(&self) -> usize {
        self.alice_mode
    }

    pub fn bob_mode(&self) -> usize {
        self.bob_mode
    }

    pub fn cm(&self) -> &Matrix {
        self.state.cm()
    }

    /// Mean quadratures `(X_A, P_A, X_B, P_B)`.
    pub fn drift(&self) -> [Qd; 4] {
        let m = self.state.mean();
        [m[0], m[1], m[2], m[3]]
    }

    /// `(d₁, d₂, d₃, d₄)`: the mean divided by √2.
    pub fn drift_coefficients(&self) -> [Qd; 4] {
        self.drift().map(|x| x / Qd::SQRT_2)
    }

    pub fn standard_form(&self) -> Option<&StandardForm> {
        self.standard_form.as_ref()
    }

    pub fn state(&self) -> &GaussianState {
        &self.state
    }

    /// Exchanges the roles of Alice and Bob.
    pub fn swap_roles(&self) -> Channel {
        let order = [2, 3, 0, 1];
        let cm = self.cm().select(&order, &order);
        let mean = order.iter().map(|&i| self.state.mean()[i]).collect();
        Channel {
            alice_mode: self.bob_mode,
            bob_mode: self.alice_mode,
            state: GaussianState::new_unchecked(mean, cm).expect("same shape"),
            standard_form: self.standard_form.map(|sf| StandardForm { a: sf.b, b: sf.a, ..sf }),
        }
    }

    fn blocks(&self) -> (Matrix, Matrix, Matrix) {
        let v = self.cm();
        (v.select(&[0, 1], &[0, 1]), v.select(&[2, 3], &[2, 3]), v.select(&[0, 1], &[2, 3]))
    }
}

fn check_roles(dim: usize, alice_mode: usize, bob_mode: usize) -> Result<()> {
    if dim != 4 {
        return Err(invalid(format!("a channel covariance is 4x4, got dimension {dim}")));
    }
    if alice_mode == bob_mode {
        return Err(invalid("Alice and Bob must hold different modes"));
    }
    Ok(())
}

fn detect_standard_form(cm: &Matrix) -> Option<StandardForm> {
    let tol = cm.max_abs() * Qd::from(PATTERN_SNAP);
    let zero_at = [(0, 1), (0, 3), (1, 2), (2, 3)];
    if zero_at.iter().any(|&(i, j)| cm[(i, j)].abs() > tol || cm[(j, i)].abs() > tol) {
        return None;
    }
    if (cm[(0, 0)] - cm[(1, 1)]).abs() > tol || (cm[(2, 2)] - cm[(3, 3)]).abs() > tol {
        return None;
    }
    if (cm[(0, 2)] - cm[(2, 0)]).abs() > tol || (cm[(1, 3)] - cm[(3, 1)]).abs() > tol {
        return None;
    }
    let h = Qd::HALF;
    Some(StandardForm {
        a: (cm[(0, 0)] + cm[(1, 1)]) * h,
        b: (cm[(2, 2)] + cm[(3, 3)]) * h,
        c: (cm[(0, 2)] + cm[(2, 0)]) * h,
        c_prime: (cm[(1, 3)] + cm[(3, 1)]) * h,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FidelityResult {
    pub fidelity: f64,
    /// `1 − F`, evaluated without cancellation.
    pub infidelity: f64,
    pub e_matrix: Matrix,
    pub q_term: f64,
    pub delta_used: Displacement,
}

/// The displacement that zeroes `D±`.
pub fn optimal_displacement(channel: &Channel, sign: EprSign) -> Displacement {
    let [d1, d2, d3, d4] = channel.drift_coefficients();
    let s = sign.qd();
    Complex::new(-(s * d1) - d3, s * d2 - d4)
}

fn r_mat() -> Matrix {
    Matrix::from_diagonal(&[Qd::ONE, -Qd::ONE])
}

/// The added-noise matrix `RAR + B ± (RC + CᵀR)`.
pub fn added_noise(channel: &Channel, sign: EprSign) -> Matrix {
    let (a, b, c) = channel.blocks();
    let r = r_mat();
    let rar = &(&r * &a) * &r;
    let cross = &(&r * &c) + &(&c.transpose() * &r);
    &(&rar + &b) + &cross.scale(sign.qd())
}

/// Net drift `D±` for a given Bob correction `δ`.
pub fn net_drift(channel: &Channel, sign: EprSign, delta: Displacement) -> [Qd; 2] {
    let [d1, d2, d3, d4] = channel.drift_coefficients();
    let s = sign.qd();
    [-delta.re - s * d1 - d3, -delta.im + s * d2 - d4]
}

fn check_pure_input(input_cm: &Matrix) -> Result<()> {
    if input_cm.rows() != 2 || input_cm.cols() != 2 {
        return Err(invalid("input covariance must be 2x2"));
    }
    let st = GaussianState::new(vec![Qd::ZERO; 2], input_cm.clone())?;
    let det = st.cm().determinant();
    if (det - 0.25).abs().to_f64() > 1e-9 {
        return Err(invalid(format!("input state is not pure: det = {}", det)));
    }
    Ok(())
}

pub fn fidelity_general(
    input_cm: &Matrix,
    channel: &Channel,
    sign: EprSign,
    delta: Displacement,
) -> Result<FidelityResult> {
    check_pure_input(input_cm)?;
    if !delta.re.is_finite() || !delta.im.is_finite() {
        return Err(invalid("displacement must be finite"));
    }
    let e = &input_cm.symmetrized().scale(Qd::from(2.0)) + &added_noise(channel, sign);
    let det = e.determinant();
    if !(det > Qd::ZERO) || !(e[(0, 0)] > Qd::ZERO) {
        return Err(Error::IllConditioned("E matrix is not positive definite".into()));
    }
    let d = net_drift(channel, sign, delta);
    let q = if d[0] == Qd::ZERO && d[1] == Qd::ZERO {
        Qd::ZERO
    } else {
        // D E⁻¹ Dᵀ with the 2x2 adjugate
        (d[0].sqr() * e[(1, 1)] - d[0] * d[1] * (e[(0, 1)] + e[(1, 0)]) + d[1].sqr() * e[(0, 0)]) / det
    };
    let fidelity = (-q.to_f64()).exp() / det.sqrt().to_f64();
    let log_f = -q.to_f64() - 0.5 * (det - 1.0).to_f64().ln_1p();
    Ok(FidelityResult {
        fidelity,
        infidelity: -log_f.exp_m1(),
        e_matrix: e,
        q_term: q.to_f64(),
        delta_used: delta,
    })
}

pub(crate) fn standard_fidelity(sf: &StandardForm, sign: EprSign) -> Qd {
    let opposite = match sign {
        EprSign::Plus => EprSign::Minus,
        EprSign::Minus => EprSign::Plus,
    };
    ((sf.var_x(sign) + 1.0) * (sf.var_p(opposite) + 1.0)).sqrt().recip()
}

/// `[(1 + ⟨ΔX±²⟩)(1 + ⟨ΔP∓²⟩)]^{−1/2}` for a coherent input with the drift
/// cancelled.
pub fn fidelity_coherent_standard(channel: &Channel, sign: EprSign) -> Result<f64> {
    let sf = channel
        .standard_form()
        .ok_or_else(|| invalid("channel is not in standard form"))?;
    Ok(standard_fidelity(sf, sign).to_f64())
}

pub const CLASS_TOL: f64 = 1e-10;

pub fn classify_channel(sf: &StandardForm) -> ChannelClass {
    let tol = Qd::from(CLASS_TOL);
    let correlated = sf.c.abs() > tol || sf.c_prime.abs() > tol;
    let class = if !correlated {
        ChannelClass::General
    } else if (sf.c_prime + sf.c).abs() <= tol {
        ChannelClass::Epr
    } else if (sf.c_prime - sf.c).abs() <= tol {
        ChannelClass::SymmetricClassical
    } else {
        ChannelClass::General
    };
    if class == ChannelClass::Epr {
        for sign in [EprSign::Plus, EprSign::Minus] {
            let v = sf.var_x(sign);
            // skip points sitting on the boundary within rounding
            if (v - 1.0).abs().to_f64() > 1e-40 {
                let f = standard_fidelity(sf, sign);
                assert_eq!(v < Qd::ONE, f > Qd::HALF, "EPR variance and fidelity disagree");
            }
        }
    }
    class
}
