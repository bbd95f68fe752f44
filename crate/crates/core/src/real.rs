//! Certified real arithmetic.
//!
//! A [`RealApprox`] is a closed interval `[lo, hi]` with dyadic endpoints
//! (`mantissa * 2^exponent`). Every operation rounds outward, so the true
//! value of any expression built from exact inputs always lies inside the
//! resulting interval. Transcendental functions are evaluated by
//! fixed-point series with explicit error accounting.
//!
//! Comparisons against transcendental bounds go through [`decide`], which
//! re-evaluates a closure at doubling precisions until the sign is certified
//! or the precision ceiling is hit.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{LazyLock, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Precision used for reported values.
pub const DEFAULT_PRECISION: u32 = 128;
/// First rung of the precision ladder in [`decide`].
pub const PRECISION_FLOOR: u32 = 64;
/// Last rung of the precision ladder; beyond it a comparison is undecidable.
pub const PRECISION_CEILING: u32 = 4096;

/// Extra fixed-point bits carried by series evaluations.
const GUARD_BITS: u32 = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RealError {
    #[error("argument outside the domain of {0}")]
    Domain(&'static str),
    #[error("interval straddles a singularity of {0}; refine precision")]
    Indeterminate(&'static str),
}

/// `mant * 2^exp`, normalized so that `mant` is odd (or zero with `exp = 0`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

fn shr_floor(m: &BigInt, k: u64) -> BigInt {
    // `>>` on BigInt rounds toward negative infinity.
    m >> k
}

fn shr_ceil(m: &BigInt, k: u64) -> BigInt {
    -((-m) >> k)
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn new(mant: BigInt, exp: i64) -> Self {
        let mut d = Dyadic { mant, exp };
        d.normalize();
        d
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        Dyadic::new(n.into(), 0)
    }

    /// Exact conversion of a finite `f64`.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite f64");
        if x == 0.0 {
            return Dyadic::zero();
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 0 { 1i64 } else { -1 };
        let exponent = ((bits >> 52) & 0x7ff) as i64;
        let fraction = bits & 0xf_ffff_ffff_ffff;
        let (m, e) = if exponent == 0 {
            (fraction as i64, -1074)
        } else {
            ((fraction | (1 << 52)) as i64, exponent - 1075)
        };
        Dyadic::new(BigInt::from(sign * m), e)
    }

    fn normalize(&mut self) {
        if self.mant.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant >>= tz;
            self.exp += tz as i64;
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    pub fn abs(&self) -> Dyadic {
        Dyadic {
            mant: self.mant.abs(),
            exp: self.exp,
        }
    }

    /// Round to at most `prec` significant bits, toward `+inf` when `up`.
    pub fn round(&self, prec: u32, up: bool) -> Dyadic {
        let bits = self.mant.bits();
        if bits <= prec as u64 {
            return self.clone();
        }
        let shift = bits - prec as u64;
        let m = if up {
            shr_ceil(&self.mant, shift)
        } else {
            shr_floor(&self.mant, shift)
        };
        Dyadic::new(m, self.exp + shift as i64)
    }

    fn aligned(&self, other: &Dyadic) -> (BigInt, BigInt, i64) {
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as u64;
        let b = &other.mant << (other.exp - e) as u64;
        (a, b, e)
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (a, b, e) = self.aligned(other);
        Dyadic::new(a + b, e)
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic {
            mant: -&self.mant,
            exp: self.exp,
        }
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic::new(&self.mant * &other.mant, self.exp + other.exp)
    }

    pub fn mul_pow2(&self, k: i64) -> Dyadic {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            mant: self.mant.clone(),
            exp: self.exp + k,
        }
    }

    /// `num / den` rounded to `prec` bits in the requested direction.
    pub fn div(&self, other: &Dyadic, prec: u32, up: bool) -> Dyadic {
        assert!(!other.is_zero(), "dyadic division by zero");
        if self.is_zero() {
            return Dyadic::zero();
        }
        let shift = (prec as i64 + 2 + other.mant.bits() as i64 - self.mant.bits() as i64).max(0);
        let num = &self.mant << shift as u64;
        let q = if up {
            -((-num).div_floor(&other.mant))
        } else {
            num.div_floor(&other.mant)
        };
        Dyadic::new(q, self.exp - other.exp - shift).round(prec, up)
    }

    /// Directed rounding of an exact rational.
    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u32, up: bool) -> Dyadic {
        Dyadic::from_int(num.clone()).div(&Dyadic::from_int(den.clone()), prec, up)
    }

    /// Nearest `f64` (not directed; for display only).
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits();
        let (m, e) = if bits > 64 {
            let s = bits - 64;
            (&self.mant >> s, self.exp + s as i64)
        } else {
            (self.mant.clone(), self.exp)
        };
        let mf = m.to_f64().unwrap_or(f64::NAN);
        let e = e.clamp(-2000, 2000) as i32;
        if e < -1000 {
            mf * 2f64.powi(-1000) * 2f64.powi(e + 1000)
        } else if e > 1000 {
            mf * 2f64.powi(1000) * 2f64.powi(e - 1000)
        } else {
            mf * 2f64.powi(e)
        }
    }

    /// `floor(log2 |x|)`; `None` for zero.
    pub fn log2_floor(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.mant.bits() as i64 - 1 + self.exp)
        }
    }

    /// Scaled integer `floor(x * 2^w)` (or ceiling when `up`).
    fn to_fixed(&self, w: u32, up: bool) -> BigInt {
        let e = self.exp + w as i64;
        if e >= 0 {
            &self.mant << e as u64
        } else if up {
            shr_ceil(&self.mant, (-e) as u64)
        } else {
            shr_floor(&self.mant, (-e) as u64)
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

/// Fixed-point ball: the true value lies in `[(val - err) / 2^w, (val + err) / 2^w]`.
#[derive(Clone, Debug)]
struct Ball {
    val: BigInt,
    err: BigInt,
    w: u32,
}

impl Ball {
    fn exact(val: BigInt, w: u32) -> Ball {
        Ball {
            val,
            err: BigInt::zero(),
            w,
        }
    }

    fn one(w: u32) -> Ball {
        Ball::exact(BigInt::one() << w, w)
    }

    fn add(&self, o: &Ball) -> Ball {
        debug_assert_eq!(self.w, o.w);
        Ball {
            val: &self.val + &o.val,
            err: &self.err + &o.err,
            w: self.w,
        }
    }

    fn sub(&self, o: &Ball) -> Ball {
        debug_assert_eq!(self.w, o.w);
        Ball {
            val: &self.val - &o.val,
            err: &self.err + &o.err,
            w: self.w,
        }
    }

    fn mul(&self, o: &Ball) -> Ball {
        debug_assert_eq!(self.w, o.w);
        let w = self.w as u64;
        let prod = &self.val * &o.val;
        let err = self.val.abs() * &o.err + o.val.abs() * &self.err + &self.err * &o.err;
        Ball {
            val: shr_floor(&prod, w),
            err: shr_ceil(&err, w) + 1,
            w: self.w,
        }
    }

    fn mul_int(&self, k: &BigInt) -> Ball {
        Ball {
            val: &self.val * k,
            err: &self.err * k.abs(),
            w: self.w,
        }
    }

    fn div_small(&self, k: u64) -> Ball {
        let k = BigInt::from(k);
        Ball {
            val: self.val.div_floor(&k),
            err: (&self.err + &k - 1u32).div_floor(&k) + 1,
            w: self.w,
        }
    }

    fn magnitude(&self) -> BigInt {
        self.val.abs() + &self.err
    }

    fn widen(&mut self, e: impl Into<BigInt>) {
        self.err += e.into();
    }

    fn to_interval(&self, prec: u32, shift: i64) -> RealApprox {
        let e = shift - self.w as i64;
        let lo = Dyadic::new(&self.val - &self.err, e).round(prec, false);
        let hi = Dyadic::new(&self.val + &self.err, e).round(prec, true);
        RealApprox { lo, hi, prec }
    }
}

static LN2_CACHE: LazyLock<Mutex<HashMap<u32, Ball>>> = LazyLock::new(|| Mutex::new(HashMap::new()));
static PI_CACHE: LazyLock<Mutex<HashMap<u32, Ball>>> = LazyLock::new(|| Mutex::new(HashMap::new()));

/// ln 2 = 2 atanh(1/3).
fn ln2_ball(w: u32) -> Ball {
    if let Some(b) = LN2_CACHE.lock().unwrap().get(&w) {
        return b.clone();
    }
    let scale = BigInt::one() << (w + 1);
    let stop = BigInt::one() << (w + 2);
    let mut pow3 = BigInt::from(3u32);
    let nine = BigInt::from(9u32);
    let mut sum = BigInt::zero();
    let mut terms = 0u64;
    let mut k = 0u64;
    while pow3 <= stop {
        sum += scale.div_floor(&(&pow3 * (2 * k + 1)));
        pow3 *= &nine;
        k += 1;
        terms += 1;
    }
    let ball = Ball {
        val: sum,
        err: BigInt::from(terms + 2),
        w,
    };
    LN2_CACHE.lock().unwrap().insert(w, ball.clone());
    ball
}

fn atan_inv_ball(x: u64, w: u32) -> Ball {
    let scale = BigInt::one() << w;
    let stop = BigInt::one() << (w + 1);
    let x = BigInt::from(x);
    let x2 = &x * &x;
    let mut pow = x.clone();
    let mut sum = BigInt::zero();
    let mut terms = 0u64;
    let mut k = 0u64;
    while pow <= stop {
        let t = scale.div_floor(&(&pow * (2 * k + 1)));
        if k % 2 == 0 {
            sum += t;
        } else {
            sum -= t;
        }
        pow *= &x2;
        k += 1;
        terms += 1;
    }
    Ball {
        val: sum,
        err: BigInt::from(terms + 1),
        w,
    }
}

/// Machin: pi = 16 atan(1/5) - 4 atan(1/239).
fn pi_ball(w: u32) -> Ball {
    if let Some(b) = PI_CACHE.lock().unwrap().get(&w) {
        return b.clone();
    }
    let a = atan_inv_ball(5, w).mul_int(&BigInt::from(16));
    let b = atan_inv_ball(239, w).mul_int(&BigInt::from(4));
    let ball = a.sub(&b);
    PI_CACHE.lock().unwrap().insert(w, ball.clone());
    ball
}

/// Natural logarithm of a positive dyadic point.
fn ln_point(x: &Dyadic, prec: u32) -> RealApprox {
    debug_assert!(x.is_positive());
    if x.mant.is_one() && x.exp == 0 {
        return RealApprox::zero_with(prec);
    }
    let w = prec + GUARD_BITS;
    let mant = &x.mant;
    let mut b = mant.bits();
    // y = mant / 2^b in [1/2, 1); move into [1/sqrt 2, sqrt 2).
    let two_pow_2b = BigInt::one() << (2 * b);
    if (mant * mant) << 1u32 < two_pow_2b {
        b -= 1;
    }
    let s = x.exp + b as i64;
    let base = BigInt::one() << b;
    let t_num = (mant - &base) << w;
    let t_den = mant + &base;
    let t = Ball {
        val: t_num.div_floor(&t_den),
        err: BigInt::one(),
        w,
    };
    let t2 = t.mul(&t);
    let mut term = t.clone();
    let mut sum = t.clone();
    let mut k = 1u64;
    let two = BigInt::from(2u32);
    loop {
        term = term.mul(&t2);
        let q = term.div_small(2 * k + 1);
        sum = sum.add(&q);
        k += 1;
        if term.val.abs() <= BigInt::one() {
            let tail = term.magnitude() * 2 + 2;
            sum.widen(tail);
            break;
        }
    }
    let ln_y = sum.mul_int(&two);
    let total = ln2_ball(w).mul_int(&BigInt::from(s)).add(&ln_y);
    total.to_interval(prec, 0)
}

/// Exponential of a dyadic point.
fn exp_point(x: &Dyadic, prec: u32) -> RealApprox {
    if x.is_zero() {
        return RealApprox::one_with(prec);
    }
    let xf = x.to_f64();
    assert!(xf.abs() < 1e15, "exp argument out of supported range");
    let k = (xf / std::f64::consts::LN_2).round() as i64;
    let w = prec + GUARD_BITS + (64 - k.unsigned_abs().leading_zeros());
    let xb = Ball {
        val: x.to_fixed(w, false),
        err: BigInt::one(),
        w,
    };
    let r = xb.sub(&ln2_ball(w).mul_int(&BigInt::from(k)));
    let mut term = Ball::one(w);
    let mut sum = Ball::one(w);
    let mut j = 1u64;
    loop {
        term = term.mul(&r).div_small(j);
        sum = sum.add(&term);
        j += 1;
        if term.val.abs() <= BigInt::one() {
            let tail = term.magnitude() * 2 + 2;
            sum.widen(tail);
            break;
        }
    }
    sum.to_interval(prec, k)
}

/// `floor(sqrt(x))` (or ceiling) of a non-negative dyadic at `prec` bits.
fn sqrt_point(x: &Dyadic, prec: u32, up: bool) -> Dyadic {
    if x.is_zero() {
        return Dyadic::zero();
    }
    let bits = x.mant.bits() as i64;
    let mut s = (2 * prec as i64 + 4 - bits).max(0);
    if (x.exp - s) % 2 != 0 {
        s += 1;
    }
    let scaled = &x.mant << s as u64;
    let mut r = scaled.sqrt();
    if up && &r * &r != scaled {
        r += 1;
    }
    Dyadic::new(r, (x.exp - s) / 2).round(prec, up)
}

/// Closed interval with dyadic endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealApprox {
    lo: Dyadic,
    hi: Dyadic,
    prec: u32,
}

impl RealApprox {
    pub fn from_dyadic(d: Dyadic, prec: u32) -> Self {
        RealApprox {
            lo: d.round(prec, false),
            hi: d.round(prec, true),
            prec,
        }
    }

    pub fn zero_with(prec: u32) -> Self {
        RealApprox::from_dyadic(Dyadic::zero(), prec)
    }

    pub fn one_with(prec: u32) -> Self {
        RealApprox::from_dyadic(Dyadic::from_int(1), prec)
    }

    pub fn from_int(n: &BigInt, prec: u32) -> Self {
        RealApprox::from_dyadic(Dyadic::from_int(n.clone()), prec)
    }

    pub fn from_i64(n: i64, prec: u32) -> Self {
        RealApprox::from_dyadic(Dyadic::from_int(n), prec)
    }

    pub fn from_ratio(q: &BigRational, prec: u32) -> Self {
        RealApprox {
            lo: Dyadic::from_ratio(q.numer(), q.denom(), prec, false),
            hi: Dyadic::from_ratio(q.numer(), q.denom(), prec, true),
            prec,
        }
    }

    /// `num / den` for small integers, e.g. the constant 0.0001 as `(1, 10000)`.
    pub fn frac(num: i64, den: i64, prec: u32) -> Self {
        RealApprox::from_ratio(&BigRational::new(num.into(), den.into()), prec)
    }

    pub fn from_bounds(lo: Dyadic, hi: Dyadic, prec: u32) -> Self {
        assert!(lo <= hi, "inverted interval");
        RealApprox {
            lo: lo.round(prec, false),
            hi: hi.round(prec, true),
            prec,
        }
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    /// Midpoint, as the nearest f64.
    pub fn mid(&self) -> f64 {
        self.lo.add(&self.hi).mul_pow2(-1).to_f64()
    }

    /// Radius, rounded up to an f64.
    pub fn rad(&self) -> f64 {
        let r = self.hi.sub(&self.lo).mul_pow2(-1);
        let f = r.to_f64();
        if Dyadic::from_f64(f) < r {
            f.next_up()
        } else {
            f
        }
    }

    pub fn width(&self) -> Dyadic {
        self.hi.sub(&self.lo)
    }

    pub fn width_below(&self, tol: &RealApprox) -> bool {
        self.width() < tol.lo
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    pub fn is_nonneg(&self) -> bool {
        !self.lo.is_negative()
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn contains(&self, x: &Dyadic) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn overlaps(&self, other: &RealApprox) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn hull(&self, other: &RealApprox) -> RealApprox {
        RealApprox {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
            prec: self.prec.max(other.prec),
        }
    }

    /// Intervals after widening by `eps` on each side.
    pub fn widened(&self, eps: &Dyadic) -> RealApprox {
        let e = eps.abs();
        RealApprox {
            lo: self.lo.sub(&e),
            hi: self.hi.add(&e),
            prec: self.prec,
        }
    }

    pub fn abs(&self) -> RealApprox {
        if self.is_nonneg() {
            self.clone()
        } else if self.is_negative() {
            -self
        } else {
            RealApprox {
                lo: Dyadic::zero(),
                hi: self.hi.clone().max(self.lo.neg()),
                prec: self.prec,
            }
        }
    }

    pub fn max(&self, other: &RealApprox) -> RealApprox {
        RealApprox {
            lo: self.lo.clone().max(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
            prec: self.prec.max(other.prec),
        }
    }

    pub fn min(&self, other: &RealApprox) -> RealApprox {
        RealApprox {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().min(other.hi.clone()),
            prec: self.prec.max(other.prec),
        }
    }

    /// `max(x, 0)`.
    pub fn pos_part(&self) -> RealApprox {
        self.max(&RealApprox::zero_with(self.prec))
    }

    /// `min(x, 0)`.
    pub fn neg_part(&self) -> RealApprox {
        self.min(&RealApprox::zero_with(self.prec))
    }

    pub fn mul_int(&self, k: &BigInt) -> RealApprox {
        self * &RealApprox::from_int(k, self.prec)
    }

    pub fn mul_pow2(&self, k: i64) -> RealApprox {
        RealApprox {
            lo: self.lo.mul_pow2(k),
            hi: self.hi.mul_pow2(k),
            prec: self.prec,
        }
    }

    /// `None` if the divisor interval contains zero.
    pub fn checked_div(&self, other: &RealApprox) -> Option<RealApprox> {
        if other.contains_zero() {
            return None;
        }
        let prec = self.prec.max(other.prec);
        let cands = [
            (&self.lo, &other.lo),
            (&self.lo, &other.hi),
            (&self.hi, &other.lo),
            (&self.hi, &other.hi),
        ];
        let lo = cands
            .iter()
            .map(|(a, b)| a.div(b, prec, false))
            .min()
            .unwrap();
        let hi = cands
            .iter()
            .map(|(a, b)| a.div(b, prec, true))
            .max()
            .unwrap();
        Some(RealApprox { lo, hi, prec })
    }

    /// Natural logarithm; `None` unless the interval is certified positive.
    pub fn ln(&self) -> Option<RealApprox> {
        if !self.is_positive() {
            return None;
        }
        let a = ln_point(&self.lo, self.prec);
        if self.is_exact() {
            return Some(a);
        }
        let b = ln_point(&self.hi, self.prec);
        Some(RealApprox {
            lo: a.lo,
            hi: b.hi,
            prec: self.prec,
        })
    }

    pub fn exp(&self) -> RealApprox {
        let a = exp_point(&self.lo, self.prec);
        if self.is_exact() {
            return a;
        }
        let b = exp_point(&self.hi, self.prec);
        RealApprox {
            lo: a.lo,
            hi: b.hi,
            prec: self.prec,
        }
    }

    /// Square root; `None` if the interval reaches below zero.
    pub fn sqrt(&self) -> Option<RealApprox> {
        if self.lo.is_negative() {
            return None;
        }
        Some(RealApprox {
            lo: sqrt_point(&self.lo, self.prec, false),
            hi: sqrt_point(&self.hi, self.prec, true),
            prec: self.prec,
        })
    }

    pub fn ln2(prec: u32) -> RealApprox {
        ln2_ball(prec + GUARD_BITS).to_interval(prec, 0)
    }

    pub fn pi(prec: u32) -> RealApprox {
        pi_ball(prec + GUARD_BITS).to_interval(prec, 0)
    }

    /// Natural log of a positive integer.
    pub fn ln_int(n: &BigInt, prec: u32) -> Option<RealApprox> {
        RealApprox::from_int(n, prec).ln()
    }
}

impl fmt::Display for RealApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.15e} ± {:.2e}", self.mid(), self.rad())
    }
}

impl Add for &RealApprox {
    type Output = RealApprox;
    fn add(self, o: &RealApprox) -> RealApprox {
        let prec = self.prec.max(o.prec);
        RealApprox {
            lo: self.lo.add(&o.lo).round(prec, false),
            hi: self.hi.add(&o.hi).round(prec, true),
            prec,
        }
    }
}

impl Sub for &RealApprox {
    type Output = RealApprox;
    fn sub(self, o: &RealApprox) -> RealApprox {
        let prec = self.prec.max(o.prec);
        RealApprox {
            lo: self.lo.sub(&o.hi).round(prec, false),
            hi: self.hi.sub(&o.lo).round(prec, true),
            prec,
        }
    }
}

impl Mul for &RealApprox {
    type Output = RealApprox;
    fn mul(self, o: &RealApprox) -> RealApprox {
        let prec = self.prec.max(o.prec);
        let p = [
            self.lo.mul(&o.lo),
            self.lo.mul(&o.hi),
            self.hi.mul(&o.lo),
            self.hi.mul(&o.hi),
        ];
        let lo = p.iter().min().unwrap().round(prec, false);
        let hi = p.iter().max().unwrap().round(prec, true);
        RealApprox { lo, hi, prec }
    }
}

impl Neg for &RealApprox {
    type Output = RealApprox;
    fn neg(self) -> RealApprox {
        RealApprox {
            lo: self.hi.neg(),
            hi: self.lo.neg(),
            prec: self.prec,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for RealApprox {
            type Output = RealApprox;
            fn $m(self, o: RealApprox) -> RealApprox {
                (&self).$m(&o)
            }
        }
        impl $tr<&RealApprox> for RealApprox {
            type Output = RealApprox;
            fn $m(self, o: &RealApprox) -> RealApprox {
                (&self).$m(o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for RealApprox {
    type Output = RealApprox;
    fn neg(self) -> RealApprox {
        -&self
    }
}

/// `log(x)`; errors when `x` is not certified positive.
pub fn log(x: &RealApprox) -> Result<RealApprox, RealError> {
    if x.is_positive() {
        Ok(x.ln().expect("positive"))
    } else if !x.hi.is_positive() {
        Err(RealError::Domain("log"))
    } else {
        Err(RealError::Indeterminate("log"))
    }
}

/// `log+(x) = max{log x, 0}`, with `log+(0) = 0` for absolute values.
pub fn log_plus(x: &RealApprox) -> Result<RealApprox, RealError> {
    if x.hi.is_negative() {
        return Err(RealError::Domain("log+"));
    }
    if x.is_positive() {
        return Ok(x.ln().expect("positive").pos_part());
    }
    // Interval touches zero: lower end is 0.
    let upper = if x.hi > Dyadic::from_int(1) {
        ln_point(&x.hi, x.prec).hi
    } else {
        Dyadic::zero()
    };
    Ok(RealApprox {
        lo: Dyadic::zero(),
        hi: upper,
        prec: x.prec,
    })
}

/// `log-(x) = min{log x, 0}`.
pub fn log_minus(x: &RealApprox) -> Result<RealApprox, RealError> {
    log(x).map(|l| l.neg_part())
}

/// `log*(x) = max{log x, 1}`.
pub fn log_star(x: &RealApprox) -> Result<RealApprox, RealError> {
    log(x).map(|l| l.max(&RealApprox::one_with(x.prec)))
}

/// Outcome of a certified comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Decision {
    True,
    False,
    Undecided,
}

impl Decision {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Decision::True
        } else {
            Decision::False
        }
    }

    pub fn is_true(self) -> bool {
        self == Decision::True
    }
}

/// Precisions tried by [`decide`]: 64, 128, ..., `ceiling`.
pub fn precision_ladder(ceiling: u32) -> impl Iterator<Item = u32> {
    let ceiling = ceiling.max(PRECISION_FLOOR);
    std::iter::successors(Some(PRECISION_FLOOR), move |p| {
        let n = p * 2;
        (n <= ceiling).then_some(n)
    })
}

/// Certify a predicate on an interval-valued expression.
///
/// `eval(prec)` evaluates the expression at working precision `prec`;
/// `test` returns `Some(answer)` once the interval settles the question.
pub fn decide_with<F, T>(ceiling: u32, eval: F, test: T) -> Decision
where
    F: Fn(u32) -> Option<RealApprox>,
    T: Fn(&RealApprox) -> Option<bool>,
{
    for prec in precision_ladder(ceiling) {
        if let Some(v) = eval(prec) {
            if let Some(ans) = test(&v) {
                return Decision::from_bool(ans);
            }
        }
    }
    Decision::Undecided
}

/// Is the expression `>= 0`?
pub fn decide<F>(eval: F) -> Decision
where
    F: Fn(u32) -> Option<RealApprox>,
{
    decide_with(PRECISION_CEILING, eval, |v| {
        if v.is_nonneg() {
            Some(true)
        } else if v.is_negative() {
            Some(false)
        } else {
            None
        }
    })
}

/// Is the expression `> 0`?
pub fn decide_strict<F>(eval: F) -> Decision
where
    F: Fn(u32) -> Option<RealApprox>,
{
    decide_with(PRECISION_CEILING, eval, |v| {
        if v.is_positive() {
            Some(true)
        } else if !v.hi.is_positive() {
            Some(false)
        } else {
            None
        }
    })
}

/// Does the expression lie within `[-tol, tol]`?
pub fn decide_within<F>(tol: &BigRational, eval: F) -> Decision
where
    F: Fn(u32) -> Option<RealApprox>,
{
    decide_with(PRECISION_CEILING, eval, |v| {
        let t = RealApprox::from_ratio(tol, v.prec);
        if v.lo >= t.hi.neg() && v.hi <= t.lo {
            Some(true)
        } else if v.lo > t.hi || v.hi < t.lo.neg() {
            Some(false)
        } else {
            None
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn shift_rounds_toward_negative_infinity() {
        assert_eq!(shr_floor(&BigInt::from(-5), 1), BigInt::from(-3));
        assert_eq!(shr_ceil(&BigInt::from(-5), 1), BigInt::from(-2));
        assert_eq!(shr_ceil(&BigInt::from(5), 1), BigInt::from(3));
    }

    #[test]
    fn constants_enclose_reference_values() {
        for prec in [64, 128, 512] {
            let l2 = RealApprox::ln2(prec);
            assert!(l2.contains(&Dyadic::from_f64(std::f64::consts::LN_2)) || l2.rad() < 1e-17);
            assert!((l2.mid() - std::f64::consts::LN_2).abs() < 1e-15);
            let pi = RealApprox::pi(prec);
            assert!((pi.mid() - std::f64::consts::PI).abs() < 1e-15);
            assert!(pi.rad() < 2f64.powi(-(prec as i32) + 4));
        }
    }

    #[test]
    fn ln_and_exp_agree_with_libm() {
        for &x in &[0.5, 1.5, 2.0, 10.0, 1e-9, 12345.678, 1e30] {
            let a = RealApprox::from_dyadic(Dyadic::from_f64(x), 96);
            let l = a.ln().unwrap();
            assert!((l.mid() - x.ln()).abs() <= 1e-14 * x.ln().abs().max(1.0), "ln {x}");
            assert!(l.rad() < 1e-20);
        }
        for &x in &[-30.0, -1.0, -0.1, 0.3, 1.0, 5.5, 80.0] {
            let a = RealApprox::from_dyadic(Dyadic::from_f64(x), 96);
            let e = a.exp();
            assert!((e.mid() / x.exp() - 1.0).abs() < 1e-14, "exp {x}");
        }
    }

    #[test]
    fn ln_of_one_is_exact_zero() {
        let l = RealApprox::one_with(128).ln().unwrap();
        assert!(l.is_exact() && l.lo.is_zero());
    }

    #[test]
    fn exp_ln_round_trip_encloses_input() {
        let x = RealApprox::from_ratio(&r(7, 3), 256);
        let y = x.ln().unwrap().exp();
        assert!(y.overlaps(&x));
        assert!(y.rad() < 1e-60);
    }

    #[test]
    fn sqrt_two_squared_contains_two() {
        let s = RealApprox::from_i64(2, 200).sqrt().unwrap();
        let sq = &s * &s;
        assert!(sq.contains(&Dyadic::from_int(2)));
    }

    #[test]
    fn log_variants() {
        let half = RealApprox::frac(1, 2, 128);
        assert!(log_plus(&half).unwrap().is_exact());
        assert!(log_plus(&half).unwrap().lo.is_zero());
        assert!((log_minus(&half).unwrap().mid() + std::f64::consts::LN_2).abs() < 1e-15);
        let two = RealApprox::from_i64(2, 128);
        assert_eq!(log_star(&two).unwrap().mid(), 1.0);
        assert_eq!(log_plus(&RealApprox::zero_with(64)).unwrap().mid(), 0.0);
        assert_eq!(log(&RealApprox::zero_with(64)), Err(RealError::Domain("log")));
        assert!(log(&RealApprox::from_i64(-3, 64)).is_err());
    }

    #[test]
    fn decide_refines_until_certified() {
        // ln(2^200 + 1) - 200 ln 2 > 0 needs more than 64 bits.
        let big = (BigInt::one() << 200u32) + 1;
        let d = decide_strict(|p| {
            let a = RealApprox::ln_int(&big, p)?;
            let b = RealApprox::ln2(p).mul_int(&BigInt::from(200));
            Some(a - b)
        });
        assert_eq!(d, Decision::True);
        let d = decide(|p| Some(RealApprox::ln2(p) - RealApprox::ln2(p)));
        assert_eq!(d, Decision::Undecided);
    }

    #[test]
    fn decide_within_tolerance() {
        let tol = r(1, 1_000_000_000);
        let d = decide_within(&tol, |p| {
            let a = RealApprox::ln_int(&BigInt::from(6), p)?;
            let b = RealApprox::ln_int(&BigInt::from(2), p)? + RealApprox::ln_int(&BigInt::from(3), p)?;
            Some(a - b)
        });
        assert_eq!(d, Decision::True);
    }
}
