//! Multimode Gaussian states in the symmetric-ordering convention.
//!
//! Quadratures are interleaved `(X₀, P₀, X₁, P₁, …)` with `a = (X + iP)/√2`,
//! so the vacuum has variance 1/2 and the covariance entries are the
//! symmetrised second moments themselves.

use num_complex::Complex64;

use crate::error::{domain, invalid, Error, Result};
use crate::linalg::Matrix;
use crate::qd::Qd;

pub const SYMMETRY_TOL: f64 = 1e-12;
pub const PHYSICALITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    mean: Vec<Qd>,
    cm: Matrix,
}

impl GaussianState {
    /// Validates symmetry and the uncertainty relation before accepting.
    pub fn new(mean: Vec<Qd>, cm: Matrix) -> Result<GaussianState> {
        let s = GaussianState::new_unchecked(mean, cm)?;
        s.validate()?;
        Ok(s)
    }

    pub fn from_f64(mean: &[f64], cm: &[Vec<f64>]) -> Result<GaussianState> {
        let mean = mean.iter().map(|&x| Qd::from(x)).collect();
        if cm.iter().any(|row| row.len() != cm.len()) {
            return Err(invalid("covariance matrix must be square"));
        }
        GaussianState::new(mean, Matrix::from_rows_f64(cm))
    }

    /// Shape checks only; for states built by symplectic maps or Gaussian
    /// conditioning, which preserve physicality.
    pub(crate) fn new_unchecked(mean: Vec<Qd>, cm: Matrix) -> Result<GaussianState> {
        if mean.is_empty() || mean.len() % 2 != 0 {
            return Err(invalid("mean length must be a positive even number"));
        }
        if cm.rows() != mean.len() || cm.cols() != mean.len() {
            return Err(invalid(format!(
                "covariance is {}x{}, expected {n}x{n}",
                cm.rows(),
                cm.cols(),
                n = mean.len()
            )));
        }
        if !cm.is_finite() || mean.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        Ok(GaussianState { mean, cm })
    }

    pub fn vacuum(n_modes: usize) -> GaussianState {
        GaussianState {
            mean: vec![Qd::ZERO; 2 * n_modes],
            cm: Matrix::identity(2 * n_modes).scale(Qd::HALF),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &[Qd] {
        &self.mean
    }

    pub fn cm(&self) -> &Matrix {
        &self.cm
    }

    pub fn into_parts(self) -> (Vec<Qd>, Matrix) {
        (self.mean, self.cm)
    }

    pub fn validate(&self) -> Result<()> {
        let scale = self.cm.max_abs().max(Qd::ONE);
        let asym = self.cm.asymmetry() / scale;
        if asym.to_f64() > SYMMETRY_TOL {
            return Err(Error::InvalidState(format!("covariance not symmetric (relative {:e})", asym)));
        }
        let n = self.cm.rows();
        let omega = SymplecticForm::new(self.n_modes());
        // V + iΩ/2 ⪰ 0, through its real embedding [[V, -Ω/2], [Ω/2, V]]
        let v = self.cm.symmetrized();
        let embed = Matrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => v[(i, j)],
            (false, false) => v[(i - n, j - n)],
            (true, false) => -omega.matrix()[(i, j - n)] * Qd::HALF,
            (false, true) => omega.matrix()[(i - n, j)] * Qd::HALF,
        });
        let min_eig = embed.symmetric_eigenvalues()[0];
        if min_eig.to_f64() < -PHYSICALITY_TOL {
            return Err(Error::InvalidState(format!(
                "V + iΩ/2 has eigenvalue {:e}",
                min_eig
            )));
        }
        let nu = symplectic_spectrum(&v)
            .ok_or_else(|| Error::InvalidState("covariance is not positive definite".into()))?;
        if (nu[0] - 0.5).to_f64() < -PHYSICALITY_TOL {
            return Err(Error::InvalidState(format!("symplectic eigenvalue {:e} below 1/2", nu[0])));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticForm {
    omega: Matrix,
}

impl SymplecticForm {
    pub fn new(n_modes: usize) -> SymplecticForm {
        let mut omega = Matrix::zeros(2 * n_modes, 2 * n_modes);
        for k in 0..n_modes {
            omega[(2 * k, 2 * k + 1)] = Qd::ONE;
            omega[(2 * k + 1, 2 * k)] = -Qd::ONE;
        }
        SymplecticForm { omega }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.omega
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EprReport {
    pub var_x_plus: f64,
    pub var_x_minus: f64,
    pub var_p_plus: f64,
    pub var_p_minus: f64,
    pub epr_plus: bool,
    pub epr_minus: bool,
}

/// Mode 0 thermal with occupation `nbar`, modes 1 and 2 in vacuum.
pub fn make_initial_state(nbar: f64) -> Result<GaussianState> {
    if !nbar.is_finite() || nbar < 0.0 {
        return Err(domain(format!("mean thermal number must be finite and >= 0, got {nbar}")));
    }
    let t = Qd::from(nbar) + 0.5;
    let h = Qd::HALF;
    Ok(GaussianState {
        mean: vec![Qd::ZERO; 6],
        cm: Matrix::from_diagonal(&[t, t, h, h, h, h]),
    })
}

fn quadrature_indices(modes: &[usize]) -> Vec<usize> {
    modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect()
}

fn check_modes(state: &GaussianState, modes: &[usize]) -> Result<()> {
    let n = state.n_modes();
    for (i, &m) in modes.iter().enumerate() {
        if m >= n {
            return Err(invalid(format!("mode {m} out of range for a {n}-mode state")));
        }
        if modes[..i].contains(&m) {
            return Err(invalid(format!("mode {m} listed twice")));
        }
    }
    Ok(())
}

/// Marginal over `keep`, in the order given.
pub fn partial_trace(state: &GaussianState, keep: &[usize]) -> Result<GaussianState> {
    if keep.is_empty() {
        return Err(invalid("keep list is empty"));
    }
    check_modes(state, keep)?;
    let idx = quadrature_indices(keep);
    let mean = idx.iter().map(|&i| state.mean[i]).collect();
    Ok(GaussianState { mean, cm: state.cm.select(&idx, &idx) })
}

/// Conditional state of the remaining modes (ascending order) after a
/// heterodyne measurement of mode `k` returned `alpha`.
pub fn heterodyne_condition(state: &GaussianState, k: usize, alpha: Complex64) -> Result<GaussianState> {
    let n = state.n_modes();
    if n < 2 {
        return Err(invalid("heterodyne conditioning needs at least two modes"));
    }
    check_modes(state, &[k])?;
    if !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(invalid("heterodyne outcome must be finite"));
    }
    let kept: Vec<usize> = (0..n).filter(|&m| m != k).collect();
    let ia = quadrature_indices(&kept);
    let ib = quadrature_indices(&[k]);
    let a = state.cm.select(&ia, &ia);
    let b = state.cm.select(&ib, &ib);
    let c = state.cm.select(&ia, &ib);

    let bh = &b + &Matrix::identity(2).scale(Qd::HALF);
    let det = bh.determinant();
    if !(det > Qd::ZERO) {
        return Err(Error::IllConditioned("measured block plus vacuum noise is not positive definite".into()));
    }
    let cond = (bh[(0, 0)] + bh[(1, 1)]).sqr() / det;
    if cond.to_f64() > 1e50 {
        return Err(Error::IllConditioned(format!("measured block condition ~{:e}", cond)));
    }
    let bh_inv = Matrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => bh[(1, 1)] / det,
        (1, 1) => bh[(0, 0)] / det,
        _ => -bh[(i, j)] / det,
    });
    let gain = &c * &bh_inv;
    let cm = &a - &(&gain * &c.transpose()).symmetrized();

    let outcome = [
        Qd::SQRT_2 * Qd::from(alpha.re) - state.mean[ib[0]],
        Qd::SQRT_2 * Qd::from(alpha.im) - state.mean[ib[1]],
    ];
    let shift = gain.mul_vec(&outcome);
    let mean = ia.iter().zip(shift).map(|(&i, s)| state.mean[i] + s).collect();
    Ok(GaussianState { mean, cm })
}

fn require_two_modes(state: &GaussianState) -> Result<()> {
    if state.n_modes() != 2 {
        return Err(invalid(format!("expected a two-mode state, got {} modes", state.n_modes())));
    }
    Ok(())
}

/// Variances of `Xᵢ ± Xⱼ` and `Pᵢ ± Pⱼ`.
pub fn epr_variances(state: &GaussianState) -> Result<EprReport> {
    require_two_modes(state)?;
    let v = &state.cm;
    let two = Qd::from(2.0);
    let x = v[(0, 0)] + v[(2, 2)];
    let p = v[(1, 1)] + v[(3, 3)];
    let xp = x + two * v[(0, 2)];
    let xm = x - two * v[(0, 2)];
    let pp = p + two * v[(1, 3)];
    let pm = p - two * v[(1, 3)];
    Ok(EprReport {
        var_x_plus: xp.to_f64(),
        var_x_minus: xm.to_f64(),
        var_p_plus: pp.to_f64(),
        var_p_minus: pm.to_f64(),
        epr_plus: xp + pm < two,
        epr_minus: xm + pp < two,
    })
}

/// Positive-partial-transpose test: flip the momentum of the second mode and
/// check the uncertainty relation.
pub fn ppt_separable(state: &GaussianState) -> Result<bool> {
    require_two_modes(state)?;
    state.validate()?;
    let mut flipped = state.cm.clone();
    for j in 0..4 {
        if j != 3 {
            flipped[(3, j)] = -flipped[(3, j)];
            flipped[(j, 3)] = -flipped[(j, 3)];
        }
    }
    let nu = symplectic_spectrum(&flipped)
        .ok_or_else(|| Error::Internal("partial transpose lost positive definiteness".into()))?;
    Ok((nu[0] - 0.5).to_f64() >= -PHYSICALITY_TOL)
}

/// Symplectic eigenvalues, ascending.
pub fn symplectic_eigenvalues(state: &GaussianState) -> Vec<Qd> {
    symplectic_spectrum(&state.cm).expect("a valid state has a positive definite covariance")
}

// The symplectic eigenvalues of V are the moduli of the eigenvalues of ΩV.
// With V = LLᵀ, ΩV is similar to K = LᵀΩL, which is antisymmetric, so -K² is
// symmetric with each ν² appearing twice. Working through the Cholesky factor
// keeps the computation well conditioned for strongly squeezed states.
pub(crate) fn symplectic_spectrum(cm: &Matrix) -> Option<Vec<Qd>> {
    let l = cm.cholesky()?;
    let omega = SymplecticForm::new(cm.rows() / 2);
    let k = &(&l.transpose() * omega.matrix()) * &l;
    let ksq = &k.transpose() * &k;
    let ev = ksq.symmetric_eigenvalues();
    Some(
        ev.chunks(2)
            .map(|pair| ((pair[0] + pair[1]) * Qd::HALF).max(Qd::ZERO).sqrt())
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(x: f64) -> Qd {
        Qd::from(x)
    }

    fn tms(r: f64) -> Matrix {
        // two-mode squeezed vacuum with squeezing r
        let ch = (2.0 * r).cosh() / 2.0;
        let sh = (2.0 * r).sinh() / 2.0;
        Matrix::from_rows_f64(&[
            vec![ch, 0.0, sh, 0.0],
            vec![0.0, ch, 0.0, -sh],
            vec![sh, 0.0, ch, 0.0],
            vec![0.0, -sh, 0.0, ch],
        ])
    }

    #[test]
    fn symplectic_form_properties() {
        let om = SymplecticForm::new(3);
        let sq = om.matrix() * om.matrix();
        assert_eq!(sq, Matrix::identity(6).scale(q(-1.0)));
        assert_eq!(om.matrix().transpose(), -om.matrix());
    }

    #[test]
    fn initial_state_values() {
        let s = make_initial_state(0.0).unwrap();
        assert_eq!(s.cm(), &Matrix::identity(6).scale(Qd::HALF));
        let s = make_initial_state(1000.0).unwrap();
        assert_eq!(s.cm()[(0, 0)].to_f64(), 1000.5);
        assert_eq!(s.cm()[(1, 1)].to_f64(), 1000.5);
        assert_eq!(s.cm()[(2, 2)].to_f64(), 0.5);
        let s = make_initial_state(1.0).unwrap();
        let d: Vec<f64> = (0..6).map(|i| s.cm()[(i, i)].to_f64()).collect();
        assert_eq!(d, vec![1.5, 1.5, 0.5, 0.5, 0.5, 0.5]);
        assert!(s.mean().iter().all(|&x| x == Qd::ZERO));
        assert!(make_initial_state(-1.0).is_err());
        assert!(make_initial_state(f64::NAN).is_err());
        assert!(make_initial_state(f64::INFINITY).is_err());
    }

    #[test]
    fn validation_rejects_unphysical() {
        let bad = Matrix::identity(2).scale(q(0.4));
        assert!(GaussianState::new(vec![Qd::ZERO; 2], bad).is_err());
        let asym = Matrix::from_rows_f64(&[vec![1.0, 0.1], vec![0.0, 1.0]]);
        assert!(GaussianState::new(vec![Qd::ZERO; 2], asym).is_err());
        // squeezed but pure is fine
        let sq = Matrix::from_rows_f64(&[vec![0.05, 0.0], vec![0.0, 5.0]]);
        assert!(GaussianState::new(vec![Qd::ZERO; 2], sq).is_ok());
        assert!(GaussianState::from_f64(&[0.0; 3], &vec![vec![0.5; 3]; 3]).is_err());
    }

    #[test]
    fn vacuum_and_thermal_spectra() {
        let v = GaussianState::vacuum(3);
        for nu in symplectic_eigenvalues(&v) {
            assert!((nu - 0.5).abs().to_f64() < 1e-60);
        }
        let th = make_initial_state(7.0).unwrap();
        let nu = symplectic_eigenvalues(&th);
        assert!((nu[2] - 7.5).abs().to_f64() < 1e-55);
        assert!((nu[0] - 0.5).abs().to_f64() < 1e-60);
    }

    #[test]
    fn tms_is_pure_and_entangled() {
        let s = GaussianState::new(vec![Qd::ZERO; 4], tms(1.2)).unwrap();
        for nu in symplectic_eigenvalues(&s) {
            assert!((nu - 0.5).abs().to_f64() < 1e-14);
        }
        assert!(!ppt_separable(&s).unwrap());
        let rep = epr_variances(&s).unwrap();
        assert!(rep.epr_minus);
        assert!(!rep.epr_plus);
        assert!((rep.var_x_minus - (-2.4f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn independent_vacua_are_epr_boundary() {
        let s = GaussianState::vacuum(2);
        let rep = epr_variances(&s).unwrap();
        for v in [rep.var_x_plus, rep.var_x_minus, rep.var_p_plus, rep.var_p_minus] {
            assert_eq!(v, 1.0);
        }
        assert!(!rep.epr_plus && !rep.epr_minus);
        assert!(ppt_separable(&s).unwrap());
        assert!(epr_variances(&GaussianState::vacuum(3)).is_err());
    }

    #[test]
    fn partial_trace_errors_and_order() {
        let s = make_initial_state(2.0).unwrap();
        assert!(partial_trace(&s, &[]).is_err());
        assert!(partial_trace(&s, &[0, 3]).is_err());
        assert!(partial_trace(&s, &[1, 1]).is_err());
        let t = partial_trace(&s, &[2, 0]).unwrap();
        assert_eq!(t.cm()[(2, 2)].to_f64(), 2.5);
        assert_eq!(t.cm()[(0, 0)].to_f64(), 0.5);
    }

    #[test]
    fn heterodyne_on_tms_half() {
        // measuring one arm of a TMS: the other collapses to a state with
        // variance ch - sh²/(ch + 1/2)
        let r = 0.7;
        let s = GaussianState::new(vec![Qd::ZERO; 4], tms(r)).unwrap();
        let out = heterodyne_condition(&s, 1, Complex64::new(0.3, -0.4)).unwrap();
        let ch = (2.0 * r).cosh() / 2.0;
        let sh = (2.0 * r).sinh() / 2.0;
        let want = ch - sh * sh / (ch + 0.5);
        assert!((out.cm()[(0, 0)].to_f64() - want).abs() < 1e-14);
        assert!((out.cm()[(1, 1)].to_f64() - want).abs() < 1e-14);
        let g = sh / (ch + 0.5);
        let sq2 = 2f64.sqrt();
        assert!((out.mean()[0].to_f64() - g * sq2 * 0.3).abs() < 1e-14);
        assert!((out.mean()[1].to_f64() - (-g) * sq2 * -0.4).abs() < 1e-14);
        assert!(out.validate().is_ok());
        assert!(heterodyne_condition(&GaussianState::vacuum(1), 0, Complex64::new(0.0, 0.0)).is_err());
        assert!(heterodyne_condition(&s, 0, Complex64::new(f64::NAN, 0.0)).is_err());
    }

    fn arb_thermal_pair() -> impl Strategy<Value = GaussianState> {
        (0.0f64..1e4, 0.0f64..1e4).prop_map(|(n1, n2)| {
            let cm = Matrix::from_diagonal(&[q(n1 + 0.5), q(n1 + 0.5), q(n2 + 0.5), q(n2 + 0.5)]);
            GaussianState::new(vec![Qd::ZERO; 4], cm).unwrap()
        })
    }

    // a random physical three-mode state: thermal noise pushed through a
    // product of two-mode squeezers and phase rotations
    fn arb_three_mode() -> impl Strategy<Value = GaussianState> {
        (
            proptest::collection::vec(0.0f64..3.0, 3),
            proptest::collection::vec(-1.0f64..1.0, 3),
            proptest::collection::vec(0.0f64..6.3, 3),
            proptest::collection::vec(-2.0f64..2.0, 6),
        )
            .prop_map(|(n, sq, ph, mean)| {
                let mut cm = Matrix::from_diagonal(&[
                    q(n[0] + 0.5),
                    q(n[0] + 0.5),
                    q(n[1] + 0.5),
                    q(n[1] + 0.5),
                    q(n[2] + 0.5),
                    q(n[2] + 0.5),
                ]);
                for (step, (&r, &phi)) in sq.iter().zip(&ph).enumerate() {
                    let (i, j) = [(0, 1), (1, 2), (0, 2)][step];
                    let mut s = Matrix::identity(6);
                    let (ch, sh) = (r.cosh(), r.sinh());
                    for m in [i, j] {
                        s[(2 * m, 2 * m)] = q(ch);
                        s[(2 * m + 1, 2 * m + 1)] = q(ch);
                    }
                    s[(2 * i, 2 * j)] = q(sh);
                    s[(2 * j, 2 * i)] = q(sh);
                    s[(2 * i + 1, 2 * j + 1)] = q(-sh);
                    s[(2 * j + 1, 2 * i + 1)] = q(-sh);
                    let mut rot = Matrix::identity(6);
                    rot[(2 * i, 2 * i)] = q(phi.cos());
                    rot[(2 * i, 2 * i + 1)] = q(-phi.sin());
                    rot[(2 * i + 1, 2 * i)] = q(phi.sin());
                    rot[(2 * i + 1, 2 * i + 1)] = q(phi.cos());
                    let m = &rot * &s;
                    cm = &(&m * &cm) * &m.transpose();
                }
                GaussianState::new(mean.iter().map(|&x| q(x)).collect(), cm.symmetrized()).unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn thermal_pairs_are_separable(s in arb_thermal_pair()) {
            prop_assert!(ppt_separable(&s).unwrap());
        }

        #[test]
        fn partial_trace_composes(s in arb_three_mode()) {
            let once = partial_trace(&s, &[2, 0]).unwrap();
            let twice = partial_trace(&partial_trace(&s, &[0, 2, 1]).unwrap(), &[1, 0]).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn heterodyne_on_uncorrelated_mode_is_identity(s in arb_three_mode(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let pair = partial_trace(&s, &[0, 1]).unwrap();
            let (pm, pc) = pair.clone().into_parts();
            let mut cm = Matrix::zeros(6, 6);
            let mut mean = vec![Qd::ZERO; 6];
            for i in 0..4 {
                mean[i] = pm[i];
                for j in 0..4 {
                    cm[(i, j)] = pc[(i, j)];
                }
            }
            cm[(4, 4)] = q(1.3);
            cm[(5, 5)] = q(0.9);
            cm[(4, 5)] = q(0.2);
            cm[(5, 4)] = q(0.2);
            mean[4] = q(0.7);
            let full = GaussianState::new(mean, cm).unwrap();
            let out = heterodyne_condition(&full, 2, Complex64::new(re, im)).unwrap();
            prop_assert_eq!(out, pair);
        }

        #[test]
        fn conditioning_stays_physical(s in arb_three_mode(), k in 0usize..3, re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let out = heterodyne_condition(&s, k, Complex64::new(re, im)).unwrap();
            prop_assert!(out.validate().is_ok());
            let tr = partial_trace(&s, &[(k + 1) % 3]).unwrap();
            prop_assert!(tr.validate().is_ok());
        }

        #[test]
        fn epr_minus_symmetric_under_exchange(s in arb_three_mode()) {
            let ab = epr_variances(&partial_trace(&s, &[0, 1]).unwrap()).unwrap();
            let ba = epr_variances(&partial_trace(&s, &[1, 0]).unwrap()).unwrap();
            prop_assert_eq!(ab.epr_minus, ba.epr_minus);
            prop_assert_eq!(ab.epr_plus, ba.epr_plus);
            prop_assert!((ab.var_x_minus - ba.var_x_minus).abs() <= 1e-12 * ab.var_x_minus.abs().max(1.0));
        }

        #[test]
        fn standard_form_variance_sum(a in 0.5f64..10.0, b in 0.5f64..10.0, c in -5.0f64..5.0, cp in -5.0f64..5.0) {
            let cm = Matrix::from_rows_f64(&[
                vec![a, 0.0, c, 0.0],
                vec![0.0, a, 0.0, cp],
                vec![c, 0.0, b, 0.0],
                vec![0.0, cp, 0.0, b],
            ]);
            let s = GaussianState::new_unchecked(vec![Qd::ZERO; 4], cm).unwrap();
            let rep = epr_variances(&s).unwrap();
            prop_assert!((rep.var_x_plus + rep.var_x_minus - 2.0 * (a + b)).abs() < 1e-12 * (a + b));
            prop_assert!((rep.var_x_plus - (a + b + 2.0 * c)).abs() < 1e-12 * (a + b + c.abs()));
            prop_assert!((rep.var_p_minus - (a + b - 2.0 * cp)).abs() < 1e-12 * (a + b + cp.abs()));
        }

        #[test]
        fn spectrum_matches_direct_eigensolve(s in arb_three_mode()) {
            // |eig(ΩV)| by the characteristic polynomial of (ΩV)², which is
            // -ν² twice for each ν; use a moderate-size check through the trace
            let om = SymplecticForm::new(3);
            let m = om.matrix() * s.cm();
            let m2 = &m * &m;
            let nu = symplectic_eigenvalues(&s);
            let tr2: Qd = nu.iter().map(|x| x.sqr()).sum();
            prop_assert!(((m2.trace() + tr2.ldexp(1)) / tr2).abs().to_f64() < 1e-50);
            let m4 = &m2 * &m2;
            let tr4: Qd = nu.iter().map(|x| x.sqr().sqr()).sum();
            prop_assert!(((m4.trace() - tr4.ldexp(1)) / tr4).abs().to_f64() < 1e-50);
            let m6 = &m4 * &m2;
            let tr6: Qd = nu.iter().map(|x| x.powi(6)).sum();
            prop_assert!(((m6.trace() + tr6.ldexp(1)) / tr6).abs().to_f64() < 1e-50);
        }
    }
}
