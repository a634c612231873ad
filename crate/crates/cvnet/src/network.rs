//! The three-mode system as a teleportation network: distill a two-mode
//! channel by tracing out or heterodyning the third mode, sweep fidelities
//! over time, and locate the telecloning window.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{coefficients_at, coefficients_of, evolve_at, CmCoefficients, CouplingParams};
use crate::error::{invalid, Result};
use crate::gaussian_core::{heterodyne_condition, partial_trace, GaussianState};
use crate::qd::Qd;
use crate::teleportation::{standard_fidelity, Channel, EprSign, StandardForm};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    Trace,
    /// Heterodyne the discarded mode with outcome `α`.
    Heterodyne(Complex64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistillConfig {
    k: usize,
    method: Method,
    params: CouplingParams,
    swap_roles: bool,
}

impl DistillConfig {
    pub fn new(k: usize, method: Method, params: CouplingParams) -> Result<DistillConfig> {
        if k > 2 {
            return Err(invalid(format!("discarded mode must be 0, 1 or 2, got {k}")));
        }
        if let Method::Heterodyne(a) = method {
            if !a.re.is_finite() || !a.im.is_finite() {
                return Err(invalid("heterodyne outcome must be finite"));
            }
        }
        Ok(DistillConfig { k, method, params, swap_roles: false })
    }

    /// Alice takes the higher-indexed remaining mode instead of the lower.
    pub fn with_swapped_roles(mut self) -> DistillConfig {
        self.swap_roles = !self.swap_roles;
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn params(&self) -> &CouplingParams {
        &self.params
    }

    pub fn roles_swapped(&self) -> bool {
        self.swap_roles
    }

    /// `(alice, bob)`
    pub fn modes(&self) -> (usize, usize) {
        let (i, j) = remaining(self.k);
        if self.swap_roles {
            (j, i)
        } else {
            (i, j)
        }
    }
}

fn remaining(k: usize) -> (usize, usize) {
    match k {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

fn check_time(t: Qd) -> Result<()> {
    if !t.is_finite() {
        return Err(invalid("time must be finite"));
    }
    Ok(())
}

pub fn distill_at(t: Qd, cfg: &DistillConfig) -> Result<Channel> {
    check_time(t)?;
    let state = evolve_at(t, &cfg.params)?;
    let (i, j) = remaining(cfg.k);
    let ch = match cfg.method {
        Method::Trace => {
            // read off the exact pattern, then rebuild the channel from it
            let sf = trace_form(&coefficients_of(&state)?, cfg.k);
            let reduced = partial_trace(&state, &[i, j])?;
            let (mean, _) = reduced.into_parts();
            let st = GaussianState::new_unchecked(mean, sf.matrix())?;
            Channel::trusted(st, i, j)
        }
        Method::Heterodyne(alpha) => Channel::trusted(heterodyne_condition(&state, cfg.k, alpha)?, i, j),
    };
    Ok(if cfg.swap_roles { ch.swap_roles() } else { ch })
}

pub fn distill(t: f64, cfg: &DistillConfig) -> Result<Channel> {
    distill_at(Qd::from(t), cfg)
}

/// Trace out mode `k`; modes `(i, j)` in ascending order go to Alice and Bob.
pub fn distill_trace(t: f64, params: &CouplingParams, k: usize) -> Result<Channel> {
    distill(t, &DistillConfig::new(k, Method::Trace, *params)?)
}

pub fn distill_heterodyne(t: f64, params: &CouplingParams, k: usize, alpha: Complex64) -> Result<Channel> {
    distill(t, &DistillConfig::new(k, Method::Heterodyne(alpha), *params)?)
}

/// `(F₊, F₋)` for a coherent input with the drift cancelled.
pub fn fidelities_at(t: Qd, cfg: &DistillConfig) -> Result<(f64, f64)> {
    let sf = match cfg.method {
        // the trace-out form needs only three coefficients
        Method::Trace => {
            check_time(t)?;
            trace_form(&coefficients_at(t, &cfg.params)?, cfg.k)
        }
        Method::Heterodyne(_) => *distill_at(t, cfg)?
            .standard_form()
            .ok_or_else(|| crate::error::Error::Internal("distilled channel lost the standard form".into()))?,
    };
    Ok((
        standard_fidelity(&sf, EprSign::Plus).to_f64(),
        standard_fidelity(&sf, EprSign::Minus).to_f64(),
    ))
}

/// `(a, b, c, c′) = (Qᵢ, Qⱼ, (−1)ᵏTₖ, −Tₖ)`
fn trace_form(co: &CmCoefficients, k: usize) -> StandardForm {
    let (i, j) = remaining(k);
    let tk = co.t(k);
    StandardForm {
        a: co.q(i),
        b: co.q(j),
        c: if k == 1 { -tk } else { tk },
        c_prime: -tk,
    }
}

pub fn fidelities(t: f64, cfg: &DistillConfig) -> Result<(f64, f64)> {
    fidelities_at(Qd::from(t), cfg)
}

fn fidelity(t: Qd, cfg: &DistillConfig, sign: EprSign) -> Result<f64> {
    let (p, m) = fidelities_at(t, cfg)?;
    Ok(match sign {
        EprSign::Plus => p,
        EprSign::Minus => m,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FidelityCurve {
    pub config: DistillConfig,
    pub grid: Vec<f64>,
    pub f_plus: Vec<f64>,
    pub f_minus: Vec<f64>,
}

pub const DEFAULT_GRID_POINTS: usize = 2001;
pub const DEFAULT_GRID_HALF_WIDTH: f64 = 1.5;

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !lo.is_finite() || !hi.is_finite() || n == 0 {
        return Err(invalid("grid needs finite bounds and at least one point"));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    if hi <= lo {
        return Err(invalid(format!("grid bounds must ascend, got {lo}..{hi}")));
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n).map(|i| if i + 1 == n { hi } else { lo + step * i as f64 }).collect())
}

/// Points at `2π + offset`, with the offset added in extended precision.
pub fn grid_around_2pi(half_width: f64, n: usize) -> Result<Vec<f64>> {
    let offsets = linear_grid(-half_width, half_width, n)?;
    Ok(offsets.into_iter().map(|o| (Qd::TAU + o).to_f64()).collect())
}

pub fn default_grid() -> Vec<f64> {
    grid_around_2pi(DEFAULT_GRID_HALF_WIDTH, DEFAULT_GRID_POINTS).expect("static grid")
}

pub fn fidelity_curve(cfg: &DistillConfig, grid: &[f64]) -> Result<FidelityCurve> {
    if grid.is_empty() {
        return Err(invalid("grid is empty"));
    }
    if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("grid must be finite and strictly ascending"));
    }
    let values: Vec<(f64, f64)> = grid.par_iter().map(|&t| fidelities(t, cfg)).collect::<Result<_>>()?;
    let (f_plus, f_minus) = values.into_iter().unzip();
    Ok(FidelityCurve { config: *cfg, grid: grid.to_vec(), f_plus, f_minus })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Milestones {
    /// `(1+r)²/[1+2r(1+r)]`
    pub f2_max: f64,
    /// `ς/2 + 2π`
    pub t_max: f64,
    /// `ς = arccos(2r⁻² − 1)`
    pub varsigma: f64,
    /// `1/2 + r/(r²+1)`
    pub f0_at_pi: f64,
    /// `(2+n̄)⁻¹`
    pub boundary_value: f64,
}

/// `ς`, written as `2 asin(√(r²−1)/r)` to stay accurate as `r → 1`.
pub fn varsigma(r: f64) -> f64 {
    2.0 * (((r - 1.0) * (r + 1.0)).sqrt() / r).asin()
}

pub fn milestones(params: &CouplingParams) -> Milestones {
    let r = params.r();
    let vs = varsigma(r);
    Milestones {
        f2_max: (1.0 + r).powi(2) / (1.0 + 2.0 * r * (1.0 + r)),
        t_max: (Qd::TAU + vs / 2.0).to_f64(),
        varsigma: vs,
        f0_at_pi: 0.5 + r / (r * r + 1.0),
        boundary_value: 1.0 / (2.0 + params.nbar()),
    }
}

const GOLDEN_TOL: f64 = 1e-12;

/// Maximizes `F_sign` over `[lo, hi]`: a scan finer than the narrowest peak,
/// then golden-section refinement around the best sample. Returns `(t′, F)`.
pub fn maximize_fidelity(cfg: &DistillConfig, sign: EprSign, lo: f64, hi: f64) -> Result<(f64, f64)> {
    if !lo.is_finite() || !hi.is_finite() || hi <= lo {
        return Err(invalid(format!("bad search bracket {lo}..{hi}")));
    }
    let step = (varsigma(cfg.params.r()) / 16.0).min((hi - lo) / 64.0);
    let n = ((hi - lo) / step).ceil() as usize + 1;
    let grid = linear_grid(lo, hi, n)?;
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&t| fidelity(Qd::from(t), cfg, sign))
        .collect::<Result<_>>()?;
    let best = (0..n).fold(0, |b, i| if values[i] > values[b] { i } else { b });
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(n - 1)]);
    let f = |t: f64| fidelity(Qd::from(t), cfg, sign);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while b - a > GOLDEN_TOL {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1)?;
        }
    }
    let (t, v) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    Ok(if values[best] > v { (grid[best], values[best]) } else { (t, v) })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TelecloningInterval {
    pub t_lo: f64,
    pub t_hi: f64,
    /// Where `F₋⁽²⁾` peaks inside the interval.
    pub t_peak: f64,
}

impl TelecloningInterval {
    pub fn width(&self) -> f64 {
        self.t_hi - self.t_lo
    }
}

pub const ROOT_TOL: f64 = 1e-9;

fn port_configs(params: &CouplingParams) -> Result<(DistillConfig, DistillConfig)> {
    // the Stokes mode 1 is the port in both channels
    let to_mirror = DistillConfig::new(2, Method::Trace, *params)?.with_swapped_roles();
    let to_anti_stokes = DistillConfig::new(0, Method::Trace, *params)?;
    Ok((to_mirror, to_anti_stokes))
}

/// `(F₋⁽²⁾, F₋⁽⁰⁾)`: the fidelities of the clones at the mirror (0) and at
/// the anti-Stokes mode (2) when the Stokes mode (1) is the port.
pub fn teleclone(t: f64, params: &CouplingParams) -> Result<(f64, f64)> {
    let (c2, c0) = port_configs(params)?;
    let t = Qd::from(t);
    Ok((fidelity(t, &c2, EprSign::Minus)?, fidelity(t, &c0, EprSign::Minus)?))
}

/// The window around the `F₋⁽²⁾` peak bounded by the crossings of `F₋⁽²⁾`
/// and `F₋⁽⁰⁾`. `None` when the bracket holds no such window.
pub fn telecloning_interval(params: &CouplingParams, lo: f64, hi: f64) -> Result<Option<TelecloningInterval>> {
    if !(lo < std::f64::consts::TAU && std::f64::consts::TAU < hi) {
        return Err(invalid(format!("bracket {lo}..{hi} must contain 2π")));
    }
    let (c2, _) = port_configs(params)?;
    let (t_peak, _) = maximize_fidelity(&c2, EprSign::Minus, lo, hi)?;
    let gap = |t: f64| -> Result<f64> {
        let (f2, f0) = teleclone(t, params)?;
        Ok(f2 - f0)
    };
    if gap(t_peak)? <= 0.0 {
        return Ok(None);
    }
    let step = varsigma(params.r()) / 16.0;
    let mut ends = [0.0; 2];
    for (slot, dir) in ends.iter_mut().zip([-1.0, 1.0]) {
        // walk out until the gap closes, then bisect
        let mut inside = t_peak;
        let mut outside = None;
        for n in 1.. {
            let t = t_peak + dir * step * n as f64;
            if t < lo || t > hi {
                break;
            }
            if gap(t)? <= 0.0 {
                outside = Some(t);
                break;
            }
            inside = t;
        }
        let Some(mut out) = outside else {
            return Ok(None);
        };
        while (out - inside).abs() > ROOT_TOL {
            let mid = 0.5 * (out + inside);
            if gap(mid)? > 0.0 {
                inside = mid;
            } else {
                out = mid;
            }
        }
        *slot = 0.5 * (out + inside);
    }
    Ok(Some(TelecloningInterval { t_lo: ends[0], t_hi: ends[1], t_peak }))
}
