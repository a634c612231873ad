//! Monte Carlo replay of the teleportation protocol, independent of the
//! closed-form fidelity.
//!
//! Each draw samples Alice's Bell-measurement outcome from its exact Gaussian
//! marginal, conditions Bob's mode on it, applies Bob's displacement and
//! scores the overlap of the pure coherent input with the resulting Gaussian
//! state. Averages over draws estimate the output moments and the fidelity.
//!
//! Draws are split into shards of [`SHARD_SIZE`]. Shard `i` uses
//! `ChaCha20Rng::seed_from_u64(seed ^ i)` (the `rand_chacha` seeding, which
//! expands the `u64` with PCG32) and `StandardNormal` from `rand_distr`.
//! Shards are merged in index order, so the result does not depend on the
//! number of threads.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::qd::Qd;
use crate::teleportation::{Channel, Displacement, EprSign};

pub const SHARD_SIZE: u64 = 8192;

/// Above this the running sums in `f64` stop resolving single draws.
pub const MAX_SAMPLES: u64 = 1 << 53;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McConfig {
    pub n_samples: u64,
    pub seed: u64,
    pub input_amplitude: Complex64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct McEstimate {
    pub n_samples: u64,
    pub fidelity: f64,
    /// Estimated `1 − F`, averaged directly so that it keeps its digits.
    pub infidelity: f64,
    /// Standard error of either of the two above.
    pub fidelity_se: f64,
    /// `(X, P)` of Bob's averaged output state.
    pub output_mean: [f64; 2],
    pub output_mean_se: [f64; 2],
    pub output_cm: [[f64; 2]; 2],
    pub output_cm_se: [[f64; 2]; 2],
}

impl McEstimate {
    /// `(F_est − F) / SE`, formed on the infidelity scale.
    pub fn z_score(&self, analytic_infidelity: f64) -> f64 {
        let diff = analytic_infidelity - self.infidelity;
        if self.fidelity_se > 0.0 {
            diff / self.fidelity_se
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(diff)
        }
    }
}

// Everything that does not change from draw to draw, reduced to f64 after
// the cancellations have been done in extended precision.
struct Plan {
    // output mean = offset + mix · z with z ~ N(0, I₂)
    offset: [f64; 2],
    mix: [[f64; 2]; 2],
    // inverse of W = Bob's conditional CM + I/2, and ½ ln det W
    w_inv: [[f64; 2]; 2],
    half_log_det: f64,
    input_mean: [f64; 2],
    cond_cm: [[f64; 2]; 2],
}

fn plan(channel: &Channel, sign: EprSign, delta: Displacement, alpha: Complex64) -> Result<Plan> {
    let q = Qd::from;
    let h = Qd::SQRT_2.recip();
    let s = q(sign.value());
    // joint vector (X_in, P_in, X_A, P_A, X_B, P_B)
    let mut mean = vec![Qd::SQRT_2 * q(alpha.re), Qd::SQRT_2 * q(alpha.im)];
    mean.extend(channel.drift());
    let cov = Matrix::from_fn(6, 6, |i, j| match (i, j) {
        (0, 0) | (1, 1) => Qd::HALF,
        (i, j) if i >= 2 && j >= 2 => channel.cm()[(i - 2, j - 2)],
        _ => Qd::ZERO,
    });
    // after the beam splitter Alice reads x = (X_A ± X_in)/√2 and
    // p = (P_A ∓ P_in)/√2 with the upper signs for the plus protocol
    let z = Qd::ZERO;
    let t = Matrix::from_fn(4, 6, |i, j| {
        [
            [s * h, z, h, z, z, z],
            [z, -(s * h), z, h, z, z],
            [z, z, z, z, Qd::ONE, z],
            [z, z, z, z, z, Qd::ONE],
        ][i][j]
    });
    let my = t.mul_vec(&mean);
    let cy = (&(&t * &cov) * &t.transpose()).symmetrized();
    let (m, b) = ([0, 1], [2, 3]);
    let smm = cy.select(&m, &m);
    let sbm = cy.select(&b, &m);
    let sbb = cy.select(&b, &b);
    let smm_inv = smm
        .inverse()
        .ok_or_else(|| Error::IllConditioned("measurement marginal is singular".into()))?;
    let gain = &sbm * &smm_inv;
    let cond = (&sbb - &(&gain * &sbm.transpose())).symmetrized();

    // Bob adds √2 (s·x, −s·p) + √2 δ to his quadratures
    let kick = Matrix::from_diagonal(&[s * Qd::SQRT_2, -(s * Qd::SQRT_2)]);
    let residual = &gain + &kick;
    let root = sqrt_psd_2x2(&smm)?;
    let mix = &residual * &root;
    let base = kick.mul_vec(&my[..2]);
    let offset = [
        my[2] + base[0] + Qd::SQRT_2 * delta.re,
        my[3] + base[1] + Qd::SQRT_2 * delta.im,
    ];

    let w = &cond + &Matrix::identity(2).scale(Qd::HALF);
    let det = w.determinant();
    if !(det > Qd::ZERO) {
        return Err(Error::IllConditioned("conditional output is not positive definite".into()));
    }
    let w_inv = [
        [(w[(1, 1)] / det).to_f64(), (-w[(0, 1)] / det).to_f64()],
        [(-w[(1, 0)] / det).to_f64(), (w[(0, 0)] / det).to_f64()],
    ];
    let to2 = |m: &Matrix| [[m[(0, 0)].to_f64(), m[(0, 1)].to_f64()], [m[(1, 0)].to_f64(), m[(1, 1)].to_f64()]];
    Ok(Plan {
        offset: [(offset[0] - mean[0]).to_f64(), (offset[1] - mean[1]).to_f64()],
        mix: to2(&mix),
        w_inv,
        half_log_det: 0.5 * (det - 1.0).to_f64().ln_1p(),
        input_mean: [mean[0].to_f64(), mean[1].to_f64()],
        cond_cm: to2(&cond),
    })
}

/// A square root `L` with `L Lᵀ = M`: Cholesky, or the symmetric root when
/// the matrix is too close to singular for it.
fn sqrt_psd_2x2(m: &Matrix) -> Result<Matrix> {
    if let Some(l) = m.cholesky() {
        return Ok(l);
    }
    let (a, b, d) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
    let det = a * d - b * b;
    if det < Qd::ZERO || a < Qd::ZERO || d < Qd::ZERO {
        return Err(Error::IllConditioned("measurement marginal is not positive semidefinite".into()));
    }
    // √M = (M + √det I) / √(tr M + 2√det)
    let sd = det.sqrt();
    let norm = (a + d + sd.ldexp(1)).sqrt();
    if !(norm > Qd::ZERO) {
        return Ok(Matrix::zeros(2, 2));
    }
    Ok(Matrix::from_fn(2, 2, |i, j| {
        let v = m[(i, j)] + if i == j { sd } else { Qd::ZERO };
        v / norm
    }))
}

#[derive(Clone, Copy, Default)]
struct Moments {
    n: f64,
    // infidelity
    u_mean: f64,
    u_m2: f64,
    // offset of the output mean from the input mean
    d_mean: [f64; 2],
    d_m2: [[f64; 2]; 2],
}

impl Moments {
    fn push(&mut self, u: f64, d: [f64; 2]) {
        self.n += 1.0;
        let du = u - self.u_mean;
        self.u_mean += du / self.n;
        self.u_m2 += du * (u - self.u_mean);
        let dd = [d[0] - self.d_mean[0], d[1] - self.d_mean[1]];
        self.d_mean[0] += dd[0] / self.n;
        self.d_mean[1] += dd[1] / self.n;
        for i in 0..2 {
            for j in 0..2 {
                self.d_m2[i][j] += dd[i] * (d[j] - self.d_mean[j]);
            }
        }
    }

    // Chan et al. pairwise merge
    fn merge(self, o: Moments) -> Moments {
        if o.n == 0.0 {
            return self;
        }
        if self.n == 0.0 {
            return o;
        }
        let n = self.n + o.n;
        let w = o.n / n;
        let cross = self.n * o.n / n;
        let du = o.u_mean - self.u_mean;
        let dd = [o.d_mean[0] - self.d_mean[0], o.d_mean[1] - self.d_mean[1]];
        let mut d_m2 = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                d_m2[i][j] = self.d_m2[i][j] + o.d_m2[i][j] + dd[i] * dd[j] * cross;
            }
        }
        Moments {
            n,
            u_mean: self.u_mean + du * w,
            u_m2: self.u_m2 + o.u_m2 + du * du * cross,
            d_mean: [self.d_mean[0] + dd[0] * w, self.d_mean[1] + dd[1] * w],
            d_m2,
        }
    }
}

fn run_shard(plan: &Plan, seed: u64, count: u64) -> Moments {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut acc = Moments::default();
    for _ in 0..count {
        let z0: f64 = StandardNormal.sample(&mut rng);
        let z1: f64 = StandardNormal.sample(&mut rng);
        let d = [
            plan.offset[0] + plan.mix[0][0] * z0 + plan.mix[0][1] * z1,
            plan.offset[1] + plan.mix[1][0] * z0 + plan.mix[1][1] * z1,
        ];
        let wi = &plan.w_inv;
        let quad = d[0] * (wi[0][0] * d[0] + wi[0][1] * d[1]) + d[1] * (wi[1][0] * d[0] + wi[1][1] * d[1]);
        let u = -(-0.5 * quad - plan.half_log_det).exp_m1();
        acc.push(u, d);
    }
    acc
}

pub fn run_protocol(channel: &Channel, sign: EprSign, delta: Displacement, cfg: &McConfig) -> Result<McEstimate> {
    if cfg.n_samples == 0 || cfg.n_samples > MAX_SAMPLES {
        return Err(invalid(format!("n_samples must be in 1..=2^53, got {}", cfg.n_samples)));
    }
    let a = cfg.input_amplitude;
    if !a.re.is_finite() || !a.im.is_finite() || !delta.re.is_finite() || !delta.im.is_finite() {
        return Err(invalid("input amplitude and displacement must be finite"));
    }
    channel.state().validate()?;
    let plan = plan(channel, sign, delta, a)?;
    let shards = cfg.n_samples.div_ceil(SHARD_SIZE);
    let parts: Vec<Moments> = (0..shards)
        .into_par_iter()
        .map(|i| {
            let count = SHARD_SIZE.min(cfg.n_samples - i * SHARD_SIZE);
            run_shard(&plan, cfg.seed ^ i, count)
        })
        .collect();
    let m = parts.into_iter().fold(Moments::default(), Moments::merge);

    let n = m.n;
    let denom = if n > 1.0 { n - 1.0 } else { 1.0 };
    let u_var = m.u_m2 / denom;
    let spread = [
        [m.d_m2[0][0] / denom, m.d_m2[0][1] / denom],
        [m.d_m2[1][0] / denom, m.d_m2[1][1] / denom],
    ];
    let mut output_cm = [[0.0; 2]; 2];
    let mut output_cm_se = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            output_cm[i][j] = plan.cond_cm[i][j] + spread[i][j];
            output_cm_se[i][j] = ((spread[i][i] * spread[j][j] + spread[i][j] * spread[i][j]) / n).sqrt();
        }
    }
    Ok(McEstimate {
        n_samples: cfg.n_samples,
        fidelity: 1.0 - m.u_mean,
        infidelity: m.u_mean,
        fidelity_se: (u_var / n).sqrt(),
        output_mean: [plan.input_mean[0] + m.d_mean[0], plan.input_mean[1] + m.d_mean[1]],
        output_mean_se: [(spread[0][0] / n).sqrt(), (spread[1][1] / n).sqrt()],
        output_cm,
        output_cm_se,
    })
}

/// The reference channels used to cross-check the closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// Two uncorrelated vacua.
    Vacuum,
    /// Mirror traced out at `t′ = π`, `n̄ = 0`.
    TraceMirrorHalfPeriod,
    /// Anti-Stokes mode heterodyned, at the peak of `F₋⁽²⁾`.
    HeterodyneK2Peak,
    /// A drifted EPR channel with Bob's optimal correction.
    DriftedOptimal,
    /// The same channel without correction.
    DriftedUncorrected,
}

pub const ALL_PRESETS: [Preset; 5] = [
    Preset::Vacuum,
    Preset::TraceMirrorHalfPeriod,
    Preset::HeterodyneK2Peak,
    Preset::DriftedOptimal,
    Preset::DriftedUncorrected,
];

/// Coupling ratio used by the network presets.
pub const PRESET_R: f64 = 1.0 + 2.5e-7;
pub const PRESET_ALPHA: Complex64 = Complex64::new(0.7, -0.3);

#[derive(Clone, Debug)]
pub struct PresetRun {
    pub channel: Channel,
    pub sign: EprSign,
    pub delta: Displacement,
    /// Only set for the network presets.
    pub t_prime: Option<f64>,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Vacuum => "vacuum",
            Preset::TraceMirrorHalfPeriod => "trace-pi",
            Preset::HeterodyneK2Peak => "het-peak",
            Preset::DriftedOptimal => "drift-opt",
            Preset::DriftedUncorrected => "drift-raw",
        }
    }

    pub fn from_name(name: &str) -> Option<Preset> {
        ALL_PRESETS.into_iter().find(|p| p.name() == name)
    }

    pub fn build(self) -> Result<PresetRun> {
        use crate::dynamics::CouplingParams;
        use crate::network::{distill, distill_at, maximize_fidelity, DistillConfig, Method};
        use crate::teleportation::{displacement, optimal_displacement, StandardForm};

        let q = Qd::from;
        let drifted = || {
            let sf = StandardForm { a: q(1.2), b: q(1.2), c: q(1.0), c_prime: q(-1.0) };
            Channel::from_standard_form(0, 1, sf, [0.3, -0.2, 0.1, 0.4].map(Qd::from))
        };
        let run = match self {
            Preset::Vacuum => {
                let sf = StandardForm { a: Qd::HALF, b: Qd::HALF, c: Qd::ZERO, c_prime: Qd::ZERO };
                let channel = Channel::from_standard_form(0, 1, sf, [Qd::ZERO; 4])?;
                PresetRun { channel, sign: EprSign::Minus, delta: displacement(0.0, 0.0), t_prime: None }
            }
            Preset::TraceMirrorHalfPeriod => {
                let cfg = DistillConfig::new(0, Method::Trace, CouplingParams::new(PRESET_R, 0.0)?)?;
                let channel = distill_at(Qd::PI, &cfg)?;
                let delta = optimal_displacement(&channel, EprSign::Minus);
                PresetRun { channel, sign: EprSign::Minus, delta, t_prime: Some(std::f64::consts::PI) }
            }
            Preset::HeterodyneK2Peak => {
                let params = CouplingParams::new(PRESET_R, 0.0)?;
                let cfg = DistillConfig::new(2, Method::Heterodyne(PRESET_ALPHA), params)?;
                let tau = std::f64::consts::TAU;
                let (t, _) = maximize_fidelity(&cfg, EprSign::Minus, tau - 0.01, tau + 0.01)?;
                let channel = distill(t, &cfg)?;
                let delta = optimal_displacement(&channel, EprSign::Minus);
                PresetRun { channel, sign: EprSign::Minus, delta, t_prime: Some(t) }
            }
            Preset::DriftedOptimal => {
                let channel = drifted()?;
                let delta = optimal_displacement(&channel, EprSign::Plus);
                PresetRun { channel, sign: EprSign::Plus, delta, t_prime: None }
            }
            Preset::DriftedUncorrected => {
                PresetRun { channel: drifted()?, sign: EprSign::Plus, delta: displacement(0.0, 0.0), t_prime: None }
            }
        };
        Ok(run)
    }
}
