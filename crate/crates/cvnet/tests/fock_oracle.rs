//! Checks the quadrature generator against brute-force Schrödinger evolution
//! of the three-mode Hamiltonian
//!
//! ```text
//! H = −iχ(a₁a₀ − a₁†a₀†) − iθ(a₂a₀† − a₂†a₀)
//! ```
//!
//! in a truncated Fock space, starting from a product of coherent states.

use cvnet::dynamics::transfer_matrix;
use cvnet::linalg::Matrix;
use cvnet::qd::Qd;
use num_complex::Complex64 as C;

const DIM: usize = 16;

fn idx(n: [usize; 3]) -> usize {
    (n[0] * DIM + n[1]) * DIM + n[2]
}

fn apply_h(psi: &[C], chi: f64, theta: f64) -> Vec<C> {
    let mut out = vec![C::new(0.0, 0.0); psi.len()];
    let i = C::new(0.0, 1.0);
    for n0 in 0..DIM {
        for n1 in 0..DIM {
            for n2 in 0..DIM {
                let amp = psi[idx([n0, n1, n2])];
                if amp == C::new(0.0, 0.0) {
                    continue;
                }
                let (f0, f1, f2) = (n0 as f64, n1 as f64, n2 as f64);
                // −iχ a₁a₀
                if n0 > 0 && n1 > 0 {
                    out[idx([n0 - 1, n1 - 1, n2])] += -i * chi * (f0 * f1).sqrt() * amp;
                }
                // +iχ a₁†a₀†
                if n0 + 1 < DIM && n1 + 1 < DIM {
                    out[idx([n0 + 1, n1 + 1, n2])] += i * chi * ((f0 + 1.0) * (f1 + 1.0)).sqrt() * amp;
                }
                // −iθ a₂a₀†
                if n2 > 0 && n0 + 1 < DIM {
                    out[idx([n0 + 1, n1, n2 - 1])] += -i * theta * (f2 * (f0 + 1.0)).sqrt() * amp;
                }
                // +iθ a₂†a₀
                if n0 > 0 && n2 + 1 < DIM {
                    out[idx([n0 - 1, n1, n2 + 1])] += i * theta * ((f2 + 1.0) * f0).sqrt() * amp;
                }
            }
        }
    }
    out
}

fn step(psi: &[C], chi: f64, theta: f64, dt: f64) -> Vec<C> {
    // exp(−iH dt) by its Taylor series
    let mut acc = psi.to_vec();
    let mut term = psi.to_vec();
    for k in 1..40 {
        let h = apply_h(&term, chi, theta);
        let f = C::new(0.0, -dt / k as f64);
        term = h.iter().map(|x| f * x).collect();
        let size: f64 = term.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for (a, t) in acc.iter_mut().zip(&term) {
            *a += t;
        }
        if size < 1e-20 {
            break;
        }
    }
    acc
}

fn coherent(alpha: C) -> Vec<C> {
    let mut v = vec![C::new(0.0, 0.0); DIM];
    let mut c = C::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for (n, slot) in v.iter_mut().enumerate() {
        if n > 0 {
            c = c * alpha / (n as f64).sqrt();
        }
        *slot = c;
    }
    v
}

fn lower(psi: &[C], mode: usize) -> Vec<C> {
    let mut out = vec![C::new(0.0, 0.0); psi.len()];
    for n0 in 0..DIM {
        for n1 in 0..DIM {
            for n2 in 0..DIM {
                let n = [n0, n1, n2];
                if n[mode] == 0 {
                    continue;
                }
                let mut m = n;
                m[mode] -= 1;
                out[idx(m)] += (n[mode] as f64).sqrt() * psi[idx(n)];
            }
        }
    }
    out
}

fn raise(psi: &[C], mode: usize) -> Vec<C> {
    let mut out = vec![C::new(0.0, 0.0); psi.len()];
    for n0 in 0..DIM {
        for n1 in 0..DIM {
            for n2 in 0..DIM {
                let n = [n0, n1, n2];
                if n[mode] + 1 >= DIM {
                    continue;
                }
                let mut m = n;
                m[mode] += 1;
                out[idx(m)] += ((n[mode] + 1) as f64).sqrt() * psi[idx(n)];
            }
        }
    }
    out
}

fn quadratures(psi: &[C]) -> Vec<Vec<C>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for mode in 0..3 {
        let a = lower(psi, mode);
        let ad = raise(psi, mode);
        out.push(a.iter().zip(&ad).map(|(x, y)| (x + y) * s).collect());
        out.push(a.iter().zip(&ad).map(|(x, y)| (x - y) * C::new(0.0, -s)).collect());
    }
    out
}

fn inner(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[test]
fn generator_matches_fock_space_evolution() {
    let r = 2f64.sqrt();
    let chi = 1.0;
    let theta = r * chi;
    let alphas = [C::new(0.2, -0.1), C::new(-0.15, 0.05), C::new(0.1, 0.2)];

    let single: Vec<Vec<C>> = alphas.iter().map(|&a| coherent(a)).collect();
    let mut psi = vec![C::new(0.0, 0.0); DIM * DIM * DIM];
    for n0 in 0..DIM {
        for n1 in 0..DIM {
            for n2 in 0..DIM {
                psi[idx([n0, n1, n2])] = single[0][n0] * single[1][n1] * single[2][n2];
            }
        }
    }

    let t = 0.35;
    let steps = 35;
    for _ in 0..steps {
        psi = step(&psi, chi, theta, t / steps as f64);
    }
    let norm: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
    assert!((norm - 1.0).abs() < 1e-9, "norm drift {norm}");
    let edge: f64 = (0..DIM * DIM * DIM)
        .filter(|&k| {
            let n = [k / (DIM * DIM), (k / DIM) % DIM, k % DIM];
            n.iter().any(|&x| x + 2 >= DIM)
        })
        .map(|k| psi[k].norm_sqr())
        .sum();
    assert!(edge < 1e-12, "truncation edge population {edge:e}");

    let xi = quadratures(&psi);
    let mean: Vec<f64> = xi.iter().map(|v| inner(&psi, v).re).collect();
    let mut cov = vec![vec![0.0; 6]; 6];
    for l in 0..6 {
        for m in 0..6 {
            cov[l][m] = inner(&xi[l], &xi[m]).re - mean[l] * mean[m];
        }
    }

    let tprime = t * (theta * theta - chi * chi).sqrt();
    let s = transfer_matrix(tprime, r).unwrap();
    let s = s.matrix();
    let sq2 = 2f64.sqrt();
    let mu0: Vec<Qd> = alphas
        .iter()
        .flat_map(|a| [Qd::from(sq2 * a.re), Qd::from(sq2 * a.im)])
        .collect();
    let want_mean = s.mul_vec(&mu0);
    let want_cov = (s * &s.transpose()).scale(Qd::HALF);

    for l in 0..6 {
        assert!(
            (mean[l] - want_mean[l].to_f64()).abs() < 1e-9,
            "mean {l}: fock {} vs closed form {}",
            mean[l],
            want_mean[l]
        );
        for m in 0..6 {
            assert!(
                (cov[l][m] - want_cov[(l, m)].to_f64()).abs() < 1e-9,
                "cov ({l},{m}): fock {} vs closed form {}",
                cov[l][m],
                want_cov[(l, m)]
            );
        }
    }
    // not trivially close to the initial state
    assert!((&want_cov - &Matrix::identity(6).scale(Qd::HALF)).max_abs().to_f64() > 0.1);
}
