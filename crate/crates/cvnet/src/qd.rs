//! Quad-double floating point: an unevaluated sum of four non-overlapping
//! `f64` limbs, giving roughly 62 significant decimal digits.
//!
//! The three-mode transfer matrix grows like `(r² - 1)^{-1/2}` while the
//! fidelities of interest sit a few units of `1e-14` below one, so plain
//! doubles lose every digit that matters.  All heavy numerics in this crate run
//! on [`Qd`] and only round to `f64` at the boundary.
//!
//! Addition uses the IEEE-style merge of Hida, Li and Bailey; multiplication
//! drops terms below `ε⁴`; division is long division with a final renormalise.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

#[derive(Clone, Copy, Default, PartialEq)]
pub struct Qd([f64; 4]);

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[cfg(target_feature = "fma")]
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[cfg(not(target_feature = "fma"))]
#[inline]
fn split(a: f64) -> (f64, f64) {
    const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1
    let t = SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

#[cfg(not(target_feature = "fma"))]
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

#[inline]
fn three_sum(a: f64, b: f64, c: f64) -> (f64, f64, f64) {
    let (t1, t2) = two_sum(a, b);
    let (a, t3) = two_sum(c, t1);
    let (b, c) = two_sum(t2, t3);
    (a, b, c)
}

#[inline]
fn three_sum2(a: f64, b: f64, c: f64) -> (f64, f64) {
    let (t1, t2) = two_sum(a, b);
    let (a, t3) = two_sum(c, t1);
    (a, t2 + t3)
}

fn renorm4(c0: f64, c1: f64, c2: f64, c3: f64) -> [f64; 4] {
    if c0.is_infinite() {
        return [c0, c1, c2, c3];
    }
    let (s, c3) = quick_two_sum(c2, c3);
    let (s, c2) = quick_two_sum(c1, s);
    let (c0, c1) = quick_two_sum(c0, s);

    let (mut s0, mut s1) = (c0, c1);
    let mut s2 = 0.0;
    let mut s3 = 0.0;
    if s1 != 0.0 {
        let (a, b) = quick_two_sum(s1, c2);
        s1 = a;
        s2 = b;
        if s2 != 0.0 {
            let (a, b) = quick_two_sum(s2, c3);
            s2 = a;
            s3 = b;
        } else {
            let (a, b) = quick_two_sum(s1, c3);
            s1 = a;
            s2 = b;
        }
    } else {
        let (a, b) = quick_two_sum(s0, c2);
        s0 = a;
        s1 = b;
        if s1 != 0.0 {
            let (a, b) = quick_two_sum(s1, c3);
            s1 = a;
            s2 = b;
        } else {
            let (a, b) = quick_two_sum(s0, c3);
            s0 = a;
            s1 = b;
        }
    }
    [s0, s1, s2, s3]
}

fn renorm5(c0: f64, c1: f64, c2: f64, c3: f64, c4: f64) -> [f64; 4] {
    if c0.is_infinite() {
        return [c0, c1, c2, c3];
    }
    let (s, c4) = quick_two_sum(c3, c4);
    let (s, c3) = quick_two_sum(c2, s);
    let (s, c2) = quick_two_sum(c1, s);
    let (c0, c1) = quick_two_sum(c0, s);

    let (mut s0, mut s1) = (c0, c1);
    let mut s2 = 0.0;
    let mut s3 = 0.0;
    if s1 != 0.0 {
        let (a, b) = quick_two_sum(s1, c2);
        s1 = a;
        s2 = b;
        if s2 != 0.0 {
            let (a, b) = quick_two_sum(s2, c3);
            s2 = a;
            s3 = b;
            if s3 != 0.0 {
                s3 += c4;
            } else {
                let (a, b) = quick_two_sum(s2, c4);
                s2 = a;
                s3 = b;
            }
        } else {
            let (a, b) = quick_two_sum(s1, c3);
            s1 = a;
            s2 = b;
            if s2 != 0.0 {
                let (a, b) = quick_two_sum(s2, c4);
                s2 = a;
                s3 = b;
            } else {
                let (a, b) = quick_two_sum(s1, c4);
                s1 = a;
                s2 = b;
            }
        }
    } else {
        let (a, b) = quick_two_sum(s0, c2);
        s0 = a;
        s1 = b;
        if s1 != 0.0 {
            let (a, b) = quick_two_sum(s1, c3);
            s1 = a;
            s2 = b;
            if s2 != 0.0 {
                let (a, b) = quick_two_sum(s2, c4);
                s2 = a;
                s3 = b;
            } else {
                let (a, b) = quick_two_sum(s1, c4);
                s1 = a;
                s2 = b;
            }
        } else {
            let (a, b) = quick_two_sum(s0, c3);
            s0 = a;
            s1 = b;
            if s1 != 0.0 {
                let (a, b) = quick_two_sum(s1, c4);
                s1 = a;
                s2 = b;
            } else {
                let (a, b) = quick_two_sum(s0, c4);
                s0 = a;
                s1 = b;
            }
        }
    }
    [s0, s1, s2, s3]
}

// Adds `c` into the double-length accumulator (a, b); returns a finished limb
// when the accumulator overflows its two slots.
#[inline]
fn quick_three_accum(a: &mut f64, b: &mut f64, c: f64) -> f64 {
    let (s, bb) = two_sum(*b, c);
    *b = bb;
    let (s, aa) = two_sum(*a, s);
    *a = aa;
    let za = *a != 0.0;
    let zb = *b != 0.0;
    if za && zb {
        return s;
    }
    if !zb {
        *b = *a;
        *a = s;
    } else {
        *a = s;
    }
    0.0
}

impl Qd {
    pub const ZERO: Qd = Qd([0.0, 0.0, 0.0, 0.0]);
    pub const ONE: Qd = Qd([1.0, 0.0, 0.0, 0.0]);
    pub const HALF: Qd = Qd([0.5, 0.0, 0.0, 0.0]);
    pub const PI: Qd = Qd([
        3.141592653589793,
        1.2246467991473532e-16,
        -2.9947698097183397e-33,
        1.1124542208633653e-49,
    ]);
    pub const TAU: Qd = Qd([
        6.283185307179586,
        2.4492935982947064e-16,
        -5.989539619436679e-33,
        2.2249084417267306e-49,
    ]);
    pub const SQRT_2: Qd = Qd([
        1.4142135623730951,
        -9.667293313452913e-17,
        4.1386753086994136e-33,
        4.935546991468351e-50,
    ]);
    /// Relative rounding unit, 2^-209.
    pub const EPSILON: f64 = 1.215_432_671_457_254_2e-63;

    /// Builds a value from raw limbs, renormalising them.
    pub fn from_limbs(limbs: [f64; 4]) -> Qd {
        Qd(renorm4(limbs[0], limbs[1], limbs[2], limbs[3]))
    }

    pub fn limbs(self) -> [f64; 4] {
        self.0
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.0[0] + self.0[1]
    }

    pub fn is_finite(self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn is_nan(self) -> bool {
        self.0[0].is_nan()
    }

    pub fn abs(self) -> Qd {
        if self.0[0] < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn signum(self) -> f64 {
        if self.0[0] > 0.0 {
            1.0
        } else if self.0[0] < 0.0 {
            -1.0
        } else {
            0.0
        }
    }

    pub fn max(self, other: Qd) -> Qd {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Qd) -> Qd {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn sqr(self) -> Qd {
        self * self
    }

    fn mul_f64(self, b: f64) -> Qd {
        let a = self.0;
        let (p0, q0) = two_prod(a[0], b);
        let (p1, q1) = two_prod(a[1], b);
        let (p2, q2) = two_prod(a[2], b);
        let p3 = a[3] * b;

        let s0 = p0;
        let (s1, s2) = two_sum(q0, p1);
        let (s2, q1, p2) = three_sum(s2, q1, p2);
        let (q1, q2) = three_sum2(q1, q2, p3);
        let s3 = q1;
        let s4 = q2 + p2;
        Qd(renorm5(s0, s1, s2, s3, s4))
    }

    /// Multiplies by an exact power of two.
    pub fn ldexp(self, e: i32) -> Qd {
        let f = 2f64.powi(e);
        Qd([self.0[0] * f, self.0[1] * f, self.0[2] * f, self.0[3] * f])
    }

    pub fn sqrt(self) -> Qd {
        if self.0[0] == 0.0 {
            return Qd::ZERO;
        }
        if self.0[0] < 0.0 {
            return Qd::from(f64::NAN);
        }
        // Newton on 1/sqrt(a), then one multiply.
        let mut r = Qd::from(1.0 / self.0[0].sqrt());
        let h = self.ldexp(-1);
        for _ in 0..3 {
            r += (Qd::HALF - h * r.sqr()) * r;
        }
        r * self
    }

    pub fn recip(self) -> Qd {
        Qd::ONE / self
    }

    /// Integer power by repeated squaring.
    pub fn powi(self, n: i32) -> Qd {
        if n == 0 {
            return Qd::ONE;
        }
        let mut base = self;
        let mut k = n.unsigned_abs();
        let mut acc = Qd::ONE;
        while k > 0 {
            if k & 1 == 1 {
                acc *= base;
            }
            base = base.sqr();
            k >>= 1;
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }

    /// Nearest integer, ties away from zero.
    pub fn round(self) -> Qd {
        let x0 = self.0[0].round();
        if x0 == self.0[0] {
            let x1 = self.0[1].round();
            if x1 == self.0[1] {
                let x2 = self.0[2].round();
                if x2 == self.0[2] {
                    return Qd::from_limbs([x0, x1, x2, self.0[3].round()]);
                }
                let mut x2 = x2;
                if (x2 - self.0[2]).abs() == 0.5 && self.0[3] < 0.0 {
                    x2 -= 1.0;
                }
                return Qd::from_limbs([x0, x1, x2, 0.0]);
            }
            let mut x1 = x1;
            if (x1 - self.0[1]).abs() == 0.5 && self.0[2] < 0.0 {
                x1 -= 1.0;
            }
            return Qd::from_limbs([x0, x1, 0.0, 0.0]);
        }
        let mut x0 = x0;
        if (x0 - self.0[0]).abs() == 0.5 && self.0[1] < 0.0 {
            x0 -= 1.0;
        }
        Qd([x0, 0.0, 0.0, 0.0])
    }

    /// Sine and cosine; accurate for moderate arguments (|x| up to a few
    /// hundred), reduced by halving and rebuilt with double-angle steps.
    pub fn sin_cos(self) -> (Qd, Qd) {
        if self.0[0] == 0.0 {
            return (Qd::ZERO, Qd::ONE);
        }
        let turns = (self / Qd::TAU).round();
        let x = self - turns * Qd::TAU;
        const HALVINGS: i32 = 8;
        let y = x.ldexp(-HALVINGS);
        let y2 = y.sqr();
        // Taylor series for the sine, |y| < 0.013; the cosine follows from it
        let mut s = y;
        let mut term = y;
        for k in 1..30 {
            let kk = (2 * k) as f64;
            term = -(term * y2).div_f64(kk * (kk + 1.0));
            s += term;
            if term.0[0].abs() < 1e-66 * y.0[0].abs() {
                break;
            }
        }
        let mut c = (Qd::ONE - s.sqr()).sqrt();
        for _ in 0..HALVINGS {
            let s2 = (s * c).ldexp(1);
            let c2 = Qd::ONE - s.sqr().ldexp(1);
            s = s2;
            c = c2;
        }
        (s, c)
    }

    /// Division by a double, cheaper than the general quotient.
    fn div_f64(self, b: f64) -> Qd {
        let step = |r: Qd| {
            let q = r.0[0] / b;
            let (p, e) = two_prod(q, b);
            (q, r - Qd([p, e, 0.0, 0.0]))
        };
        let (q0, r) = step(self);
        let (q1, r) = step(r);
        let (q2, r) = step(r);
        let (q3, r) = step(r);
        Qd(renorm5(q0, q1, q2, q3, r.0[0] / b))
    }

    fn ieee_add(a: [f64; 4], b: [f64; 4]) -> Qd {
        let mut i = 0;
        let mut j = 0;
        let mut x = [0.0f64; 4];

        let mut u = if a[i].abs() > b[j].abs() {
            i += 1;
            a[i - 1]
        } else {
            j += 1;
            b[j - 1]
        };
        let mut v = if a[i].abs() > b[j].abs() {
            i += 1;
            a[i - 1]
        } else {
            j += 1;
            b[j - 1]
        };
        let (uu, vv) = quick_two_sum(u, v);
        u = uu;
        v = vv;

        let mut k = 0;
        while k < 4 {
            if i >= 4 && j >= 4 {
                x[k] = u;
                if k < 3 {
                    k += 1;
                    x[k] = v;
                }
                break;
            }
            let t = if i >= 4 {
                j += 1;
                b[j - 1]
            } else if j >= 4 {
                i += 1;
                a[i - 1]
            } else if a[i].abs() > b[j].abs() {
                i += 1;
                a[i - 1]
            } else {
                j += 1;
                b[j - 1]
            };
            let s = quick_three_accum(&mut u, &mut v, t);
            if s != 0.0 {
                x[k] = s;
                k += 1;
            }
        }
        for &ak in &a[i..] {
            x[3] += ak;
        }
        for &bk in &b[j..] {
            x[3] += bk;
        }
        Qd(renorm4(x[0], x[1], x[2], x[3]))
    }
}

impl From<f64> for Qd {
    #[inline]
    fn from(x: f64) -> Qd {
        Qd([x, 0.0, 0.0, 0.0])
    }
}

impl From<i32> for Qd {
    fn from(x: i32) -> Qd {
        Qd([x as f64, 0.0, 0.0, 0.0])
    }
}

impl Neg for Qd {
    type Output = Qd;
    #[inline]
    fn neg(self) -> Qd {
        Qd([-self.0[0], -self.0[1], -self.0[2], -self.0[3]])
    }
}

impl Add for Qd {
    type Output = Qd;
    #[inline]
    fn add(self, rhs: Qd) -> Qd {
        Qd::ieee_add(self.0, rhs.0)
    }
}

impl Sub for Qd {
    type Output = Qd;
    #[inline]
    fn sub(self, rhs: Qd) -> Qd {
        Qd::ieee_add(self.0, (-rhs).0)
    }
}

impl Mul for Qd {
    type Output = Qd;
    fn mul(self, rhs: Qd) -> Qd {
        let a = self.0;
        let b = rhs.0;
        let (p0, q0) = two_prod(a[0], b[0]);

        let (p1, q1) = two_prod(a[0], b[1]);
        let (p2, q2) = two_prod(a[1], b[0]);

        let (p3, q3) = two_prod(a[0], b[2]);
        let (p4, q4) = two_prod(a[1], b[1]);
        let (p5, q5) = two_prod(a[2], b[0]);

        // O(ε) terms
        let (p1, p2, q0) = three_sum(p1, p2, q0);

        // O(ε²) terms
        let (p2, q1, q2) = three_sum(p2, q1, q2);
        let (p3, p4, p5) = three_sum(p3, p4, p5);
        let (s0, t0) = two_sum(p2, p3);
        let (s1, t1) = two_sum(q1, p4);
        let s2 = q2 + p5;
        let (s1, t0) = two_sum(s1, t0);
        let s2 = s2 + (t0 + t1);

        // O(ε³) terms
        let s1 = s1
            + (a[0] * b[3] + a[1] * b[2] + a[2] * b[1] + a[3] * b[0] + q0 + q3 + q4 + q5);
        Qd(renorm5(p0, p1, s0, s1, s2))
    }
}

impl Div for Qd {
    type Output = Qd;
    fn div(self, b: Qd) -> Qd {
        let q0 = self.0[0] / b.0[0];
        let mut r = self - b.mul_f64(q0);
        let q1 = r.0[0] / b.0[0];
        r -= b.mul_f64(q1);
        let q2 = r.0[0] / b.0[0];
        r -= b.mul_f64(q2);
        let q3 = r.0[0] / b.0[0];
        r -= b.mul_f64(q3);
        let q4 = r.0[0] / b.0[0];
        Qd(renorm5(q0, q1, q2, q3, q4))
    }
}

macro_rules! assign_ops {
    ($($tr:ident $m:ident $op:tt),*) => {$(
        impl $tr for Qd {
            #[inline]
            fn $m(&mut self, rhs: Qd) {
                *self = *self $op rhs;
            }
        }
    )*};
}
assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /);

macro_rules! f64_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<f64> for Qd {
            type Output = Qd;
            #[inline]
            fn $m(self, rhs: f64) -> Qd {
                $tr::$m(self, Qd::from(rhs))
            }
        }
        impl $tr<Qd> for f64 {
            type Output = Qd;
            #[inline]
            fn $m(self, rhs: Qd) -> Qd {
                $tr::$m(Qd::from(self), rhs)
            }
        }
    )*};
}
f64_ops!(Add add, Sub sub, Mul mul, Div div);

impl PartialOrd for Qd {
    fn partial_cmp(&self, other: &Qd) -> Option<Ordering> {
        for k in 0..4 {
            match self.0[k].partial_cmp(&other.0[k])? {
                Ordering::Equal => continue,
                ord => return Some(ord),
            }
        }
        Some(Ordering::Equal)
    }
}

impl Sum for Qd {
    fn sum<I: Iterator<Item = Qd>>(iter: I) -> Qd {
        iter.fold(Qd::ZERO, |a, b| a + b)
    }
}

impl fmt::Debug for Qd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Qd({:e}, {:e}, {:e}, {:e})",
            self.0[0], self.0[1], self.0[2], self.0[3]
        )
    }
}

/// Formats through the nearest `f64`.
impl fmt::Display for Qd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_f64(), f)
    }
}

impl fmt::LowerExp for Qd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::LowerExp::fmt(&self.to_f64(), f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};
    use proptest::prelude::*;

    fn exact(x: Qd) -> BigRational {
        x.0.iter()
            .map(|&l| BigRational::from_f64(l).unwrap())
            .fold(BigRational::zero(), |a, b| a + b)
    }

    fn rel_err(got: Qd, want: &BigRational) -> f64 {
        let diff = (exact(got) - want).abs();
        (diff / want.abs()).to_f64().unwrap()
    }

    fn arb_qd() -> impl Strategy<Value = Qd> {
        (
            -1.0f64..1.0,
            -40i32..40,
            -1.0f64..1.0,
            -1.0f64..1.0,
            -1.0f64..1.0,
        )
            .prop_map(|(m, e, a, b, c)| {
                let x0 = m * 2f64.powi(e);
                let u = x0.abs().max(f64::MIN_POSITIVE) * f64::EPSILON;
                Qd::from_limbs([x0, a * u, b * u * f64::EPSILON, c * u * f64::EPSILON * f64::EPSILON])
            })
    }

    const TOL: f64 = 1e-60;

    #[test]
    fn div_by_double_matches_general_division() {
        for (a, b) in [(1.0, 3.0), (-7.25, 12.0), (1e-30, 6.0), (5.5e20, -110.0)] {
            let x = Qd::PI * a;
            let fast = x.div_f64(b);
            let slow = x / Qd::from(b);
            assert!((fast - slow).abs() <= slow.abs() * 1e-62, "{a}/{b}");
        }
    }

    proptest! {
        #[test]
        fn add_matches_exact(a in arb_qd(), b in arb_qd()) {
            let want = exact(a) + exact(b);
            prop_assume!(!want.is_zero());
            prop_assert!(rel_err(a + b, &want) < TOL);
        }

        #[test]
        fn sub_with_cancellation(a in arb_qd(), tweak in -1.0f64..1.0, k in 1i32..150) {
            // b agrees with a in its leading bits
            let b = a + Qd::from(tweak) * a.abs() * Qd::from(2f64.powi(-k));
            let want = exact(a) - exact(b);
            prop_assume!(!want.is_zero());
            prop_assert!(rel_err(a - b, &want) < TOL);
        }

        #[test]
        fn mul_matches_exact(a in arb_qd(), b in arb_qd()) {
            let want = exact(a) * exact(b);
            prop_assume!(!want.is_zero());
            prop_assert!(rel_err(a * b, &want) < TOL);
        }

        #[test]
        fn div_matches_exact(a in arb_qd(), b in arb_qd()) {
            prop_assume!(b.0[0] != 0.0 && a.0[0] != 0.0);
            let want = exact(a) / exact(b);
            prop_assert!(rel_err(a / b, &want) < TOL);
        }

        #[test]
        fn sqrt_squares_back(a in arb_qd()) {
            let a = a.abs();
            prop_assume!(a.0[0] > 0.0);
            let s = a.sqrt();
            prop_assert!(rel_err(s * s, &exact(a)) < TOL);
        }

        #[test]
        fn ordering_agrees_with_exact(a in arb_qd(), b in arb_qd()) {
            let ea = exact(a);
            let eb = exact(b);
            prop_assert_eq!(a.partial_cmp(&b), ea.partial_cmp(&eb));
        }
    }

    fn atan_inv(n: i64) -> Qd {
        // arctan(1/n) by its Taylor series
        let x = Qd::from(1.0) / Qd::from(n as f64);
        let x2 = x * x;
        let mut term = x;
        let mut sum = Qd::ZERO;
        let mut k = 0;
        loop {
            let t = term / Qd::from((2 * k + 1) as f64);
            if t.abs().to_f64() < 1e-70 {
                break;
            }
            if k % 2 == 0 {
                sum += t;
            } else {
                sum -= t;
            }
            term *= x2;
            k += 1;
        }
        sum
    }

    #[test]
    fn pi_constant_matches_machin() {
        let pi = Qd::from(16.0) * atan_inv(5) - Qd::from(4.0) * atan_inv(239);
        let d = (pi - Qd::PI).abs().to_f64();
        assert!(d < 1e-62, "{d:e}");
        assert_eq!(Qd::TAU, Qd::PI.ldexp(1));
    }

    #[test]
    fn sqrt2_constant() {
        let s = Qd::from(2.0).sqrt();
        assert!((s - Qd::SQRT_2).abs().to_f64() < 1e-62);
        assert!((Qd::SQRT_2 * Qd::SQRT_2 - 2.0).abs().to_f64() < 1e-62);
    }

    #[test]
    fn catastrophic_cancellation_is_resolved() {
        let r = Qd::from(1.0 + 2.5e-7);
        let big = Qd::ONE / ((r - 1.0) * (r + 1.0));
        let back = (big + 0.25) - big;
        assert_eq!(back.to_f64(), 0.25);
    }

    #[test]
    fn sin_cos_known_values() {
        let (s, c) = (Qd::PI / Qd::from(6.0)).sin_cos();
        assert!((s - 0.5).abs().to_f64() < 1e-62);
        assert!((c - Qd::from(3.0).sqrt() * 0.5).abs().to_f64() < 1e-62);
        let (s, c) = Qd::PI.sin_cos();
        assert!(s.abs().to_f64() < 1e-62 && (c + 1.0).abs().to_f64() < 1e-62);
        let (s, c) = (Qd::PI.ldexp(-1) * 7.0).sin_cos();
        assert!((s + 1.0).abs().to_f64() < 1e-61 && c.abs().to_f64() < 1e-61);
        for x in [-40.0, -3.0, -1e-9, 0.3, 1.0, 2.5, 100.0] {
            let (s, c) = Qd::from(x).sin_cos();
            assert!((s.sqr() + c.sqr() - 1.0).abs().to_f64() < 1e-61);
            assert!((s.to_f64() - x.sin()).abs() < 1e-15);
            assert!((c.to_f64() - x.cos()).abs() < 1e-15);
        }
        // small-angle sine keeps relative precision
        let (s, _) = Qd::from(1e-20).sin_cos();
        assert!(((s - 1e-20) / 1e-20).abs().to_f64() < 1e-40);
    }

    #[test]
    fn round_and_powi() {
        assert_eq!(Qd::from(2.5).round().to_f64(), 3.0);
        assert_eq!(Qd::from(-2.5).round().to_f64(), -3.0);
        let x = Qd::from(7.0) + Qd::from(0.5) - Qd::from(1e-40);
        assert_eq!(x.round().to_f64(), 7.0);
        assert_eq!(Qd::from(3.0).powi(4).to_f64(), 81.0);
        assert!((Qd::from(2.0).powi(-2) - 0.25).abs().to_f64() < 1e-70);
    }

    #[test]
    fn to_f64_rounds_to_nearest() {
        let x = Qd::from(1.0) + Qd::from(f64::EPSILON * 0.75);
        assert_eq!(x.to_f64(), 1.0 + f64::EPSILON);
    }
}
