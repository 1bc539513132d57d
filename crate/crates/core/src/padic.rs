//! Fixed-precision arithmetic in `Q_p` and in its unramified quadratic
//! extension `Q_p(ω)`, `ω² = c` with `c` the smallest positive quadratic
//! non-residue modulo `p`.
//!
//! Every value carries an absolute precision `N`: it is known modulo `p^N`.
//! Arithmetic propagates precision the interval way (minimum of absolute
//! precisions for sums, minimum of relative precisions for products and
//! quotients), so no result ever claims digits its inputs do not justify.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use thiserror::Error;

/// Default absolute precision in base-`p` digits.
pub const DEFAULT_PRECISION: i64 = 40;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadicError {
    #[error("division by an element that is zero to working precision")]
    DivisionByZero,
    #[error("no certified digits remain")]
    PrecisionExhausted,
    #[error("element is not a p-adic unit")]
    NotAUnit,
    #[error("element is not a principal unit")]
    NotPrincipalUnit,
    #[error("argument outside the convergence domain of exp")]
    OutsideConvergenceDomain,
    #[error("operands live over different primes ({0} and {1})")]
    PrimeMismatch(u32, u32),
    #[error("unsupported prime {0}: an odd prime >= 5 is required")]
    UnsupportedPrime(u32),
    #[error("element is not a square")]
    NotASquare,
}

thread_local! {
    static POW_CACHE: RefCell<HashMap<(u32, u32), BigInt>> = RefCell::new(HashMap::new());
}

/// `p^k` for `k >= 0`, memoized per thread.
pub(crate) fn pow_p(p: u32, k: i64) -> BigInt {
    debug_assert!(k >= 0);
    let k = k as u32;
    if k < 4 {
        return BigInt::from(p).pow(k);
    }
    POW_CACHE.with(|cache| cache.borrow_mut().entry((p, k)).or_insert_with(|| BigInt::from(p).pow(k)).clone())
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Rejects anything but odd primes `>= 5`.
pub fn check_prime(p: u32) -> Result<(), PadicError> {
    if p >= 5 && is_prime(p) {
        Ok(())
    } else {
        Err(PadicError::UnsupportedPrime(p))
    }
}

/// Smallest positive quadratic non-residue modulo `p`.
pub fn smallest_nonresidue(p: u32) -> u32 {
    let p64 = p as u64;
    (2..p)
        .find(|&c| {
            // Euler's criterion
            let mut acc = 1u64;
            let mut base = c as u64 % p64;
            let mut e = (p64 - 1) / 2;
            while e > 0 {
                if e & 1 == 1 {
                    acc = acc * base % p64;
                }
                base = base * base % p64;
                e >>= 1;
            }
            acc == p64 - 1
        })
        .expect("every odd prime has a non-residue")
}

/// `v_p(n)` and the prime-to-`p` cofactor of a nonzero integer.
fn split_p(p: u32, n: &BigInt) -> (i64, BigInt) {
    debug_assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            break;
        }
        m = q;
        v += 1;
    }
    (v, m)
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.mod_floor(m).extended_gcd(m);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(m)
}

/// An element of `Q_p` known modulo `p^prec`.
///
/// Nonzero values are stored as `p^val · unit` with `0 < unit < p^(prec-val)`
/// and `p ∤ unit`. A value that is zero to precision stores `unit = 0` and
/// `val = prec`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Padic {
    p: u32,
    val: i64,
    unit: BigInt,
    prec: i64,
}

impl Padic {
    pub fn zero(p: u32, prec: i64) -> Self {
        Padic { p, val: prec, unit: BigInt::zero(), prec }
    }

    pub fn one(p: u32, prec: i64) -> Self {
        Self::from_i64(p, 1, prec)
    }

    fn normalize(p: u32, val: i64, x: BigInt, prec: i64) -> Self {
        if prec <= val {
            return Self::zero(p, prec);
        }
        let x = x.mod_floor(&pow_p(p, prec - val));
        if x.is_zero() {
            return Self::zero(p, prec);
        }
        let (shift, unit) = split_p(p, &x);
        Padic { p, val: val + shift, unit, prec }
    }

    pub fn from_bigint(p: u32, n: &BigInt, prec: i64) -> Self {
        Self::normalize(p, 0, n.clone(), prec)
    }

    pub fn from_i64(p: u32, n: i64, prec: i64) -> Self {
        Self::from_bigint(p, &BigInt::from(n), prec)
    }

    /// `num/den` as an element of `Q_p`, known modulo `p^prec`.
    pub fn from_ratio(p: u32, num: i64, den: i64, prec: i64) -> Result<Self, PadicError> {
        if den == 0 {
            return Err(PadicError::DivisionByZero);
        }
        Ok(Self::from_i64(p, num, prec + v_p_i64(p, den)).div_int(den))
    }

    /// `p^val · Σ digits[i] p^i`, known modulo `p^prec`.
    pub fn from_digits(p: u32, val: i64, digits: &[u32], prec: i64) -> Self {
        let pb = BigInt::from(p);
        let mut acc = BigInt::zero();
        for &d in digits.iter().rev() {
            acc = acc * &pb + BigInt::from(d % p);
        }
        Self::normalize(p, val, acc, prec)
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    /// `None` for an element that is zero to precision.
    pub fn valuation(&self) -> Option<i64> {
        if self.unit.is_zero() {
            None
        } else {
            Some(self.val)
        }
    }

    /// Lower bound on the valuation; for zero this is the precision.
    pub fn val_bound(&self) -> i64 {
        self.val
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    pub fn rel_precision(&self) -> i64 {
        self.prec - self.val
    }

    pub fn is_zero(&self) -> bool {
        self.unit.is_zero()
    }

    pub fn is_unit(&self) -> bool {
        !self.is_zero() && self.val == 0
    }

    /// Base-`p` digits of the unit part, least significant first.
    pub fn digits(&self) -> Vec<u32> {
        if self.is_zero() {
            return Vec::new();
        }
        let pb = BigInt::from(self.p);
        let mut out = Vec::with_capacity(self.rel_precision() as usize);
        let mut m = self.unit.clone();
        for _ in 0..self.rel_precision() {
            let (q, r) = m.div_rem(&pb);
            out.push(r.to_u32().unwrap_or(0));
            m = q;
        }
        out
    }

    /// The representative `p^val · unit` as an exact rational `(num, den)`
    /// with `den` a power of `p`.
    pub fn to_rational(&self) -> (BigInt, BigInt) {
        if self.is_zero() {
            return (BigInt::zero(), BigInt::one());
        }
        if self.val >= 0 {
            (&self.unit * pow_p(self.p, self.val), BigInt::one())
        } else {
            (self.unit.clone(), pow_p(self.p, -self.val))
        }
    }

    /// Integer representative in `[0, p^prec)` for an integral element.
    pub fn to_bigint(&self) -> Option<BigInt> {
        if self.is_zero() {
            return Some(BigInt::zero());
        }
        if self.val < 0 {
            return None;
        }
        Some(&self.unit * pow_p(self.p, self.val))
    }

    /// Same value, known to at most `prec` digits.
    pub fn with_precision(&self, prec: i64) -> Self {
        if prec >= self.prec {
            return self.clone();
        }
        if self.is_zero() {
            return Self::zero(self.p, prec);
        }
        Self::normalize(self.p, self.val, self.unit.clone(), prec)
    }

    /// Multiplication by `p^k`, exact.
    pub fn shift(&self, k: i64) -> Self {
        Padic { p: self.p, val: self.val + k, unit: self.unit.clone(), prec: self.prec + k }
    }

    /// Multiplication by an exact integer.
    pub fn mul_int(&self, n: i64) -> Self {
        if n == 0 {
            return Self::zero(self.p, self.prec);
        }
        let (k, m) = split_p(self.p, &BigInt::from(n));
        if self.is_zero() {
            return Self::zero(self.p, self.prec + k);
        }
        Self::normalize(self.p, self.val + k, &self.unit * m, self.prec + k)
    }

    /// Division by an exact nonzero integer.
    pub fn div_int(&self, n: i64) -> Self {
        assert!(n != 0, "div_int by zero");
        let (k, m) = split_p(self.p, &BigInt::from(n));
        if self.is_zero() {
            return Self::zero(self.p, self.prec - k);
        }
        let modulus = pow_p(self.p, self.rel_precision());
        let inv = mod_inverse(&m, &modulus);
        Self::normalize(self.p, self.val - k, &self.unit * inv, self.prec - k)
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, PadicError> {
        self.same_prime(other)?;
        if other.is_zero() {
            return Err(PadicError::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(Self::zero(self.p, self.prec - other.val));
        }
        let rel = self.rel_precision().min(other.rel_precision());
        let modulus = pow_p(self.p, rel);
        let inv = mod_inverse(&other.unit, &modulus);
        let val = self.val - other.val;
        Ok(Self::normalize(self.p, val, &self.unit * inv, val + rel))
    }

    pub fn inverse(&self) -> Result<Self, PadicError> {
        Self::one(self.p, self.rel_precision().max(1)).checked_div(self)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        if e == 0 {
            return Self::one(self.p, self.prec.max(1));
        }
        let mut acc: Option<Padic> = None;
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => &a * &base,
                });
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc.expect("nonzero exponent")
    }

    fn same_prime(&self, other: &Self) -> Result<(), PadicError> {
        if self.p == other.p {
            Ok(())
        } else {
            Err(PadicError::PrimeMismatch(self.p, other.p))
        }
    }

    /// Number of leading digits on which `self` and `other` agree: the
    /// largest `k` with `self ≡ other mod p^k` that the precision certifies.
    pub fn agreement(&self, other: &Self) -> i64 {
        let d = self - other;
        d.val
    }

    /// Teichmüller representative: the `(p-1)`-st root of unity congruent to
    /// `self` modulo `p`.
    pub fn teichmuller(&self) -> Result<Self, PadicError> {
        if !self.is_unit() {
            return Err(PadicError::NotAUnit);
        }
        let mut x = self.clone();
        for _ in 0..self.prec {
            x = x.pow(self.p as u64);
        }
        Ok(x.with_precision(self.prec))
    }

    /// Square root by Newton iteration; the root returned is the one whose
    /// leading digit is the smaller residue.
    pub fn sqrt(&self) -> Result<Self, PadicError> {
        if self.is_zero() {
            return Ok(Self::zero(self.p, self.prec / 2));
        }
        if self.val % 2 != 0 {
            return Err(PadicError::NotASquare);
        }
        let p = self.p as u64;
        let u0 = (&self.unit % BigInt::from(p)).to_u64().unwrap_or(0);
        let r0 = (1..p).find(|r| r * r % p == u0).ok_or(PadicError::NotASquare)?;
        let unit = Padic::normalize(self.p, 0, self.unit.clone(), self.rel_precision());
        let mut x = Padic::from_i64(self.p, r0 as i64, unit.prec);
        let mut known = 1;
        while known < 2 * unit.prec {
            let q = unit.checked_div(&x)?;
            x = (&x + &q).div_int(2);
            known *= 2;
        }
        Ok(x.with_precision(unit.prec).shift(self.val / 2))
    }

    /// Uniform random element of `Z_p / p^prec`.
    pub fn random_integer<R: Rng + ?Sized>(p: u32, prec: i64, rng: &mut R) -> Self {
        let digits: Vec<u32> = (0..prec).map(|_| rng.gen_range(0..p)).collect();
        Self::from_digits(p, 0, &digits, prec)
    }

    /// Uniform random element of `Z_p^×`.
    pub fn random_unit<R: Rng + ?Sized>(p: u32, prec: i64, rng: &mut R) -> Self {
        let mut digits: Vec<u32> = (0..prec).map(|_| rng.gen_range(0..p)).collect();
        digits[0] = rng.gen_range(1..p);
        Self::from_digits(p, 0, &digits, prec)
    }
}

fn v_p_i64(p: u32, n: i64) -> i64 {
    if n == 0 {
        return 0;
    }
    split_p(p, &BigInt::from(n)).0
}

impl fmt::Display for Padic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "O({}^{})", self.p, self.prec);
        }
        let mut first = true;
        for (i, d) in self.digits().iter().enumerate() {
            if *d == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}*{}^{}", d, self.p, self.val + i as i64)?;
        }
        write!(f, " + O({}^{})", self.p, self.prec)
    }
}

impl<'a> Add<&'a Padic> for &'a Padic {
    type Output = Padic;
    fn add(self, other: &Padic) -> Padic {
        assert_eq!(self.p, other.p, "prime mismatch");
        let prec = self.prec.min(other.prec);
        if self.is_zero() {
            return other.with_precision(prec);
        }
        if other.is_zero() {
            return self.with_precision(prec);
        }
        let m = self.val.min(other.val);
        if m >= prec {
            return Padic::zero(self.p, prec);
        }
        let x = &self.unit * pow_p(self.p, self.val - m) + &other.unit * pow_p(self.p, other.val - m);
        Padic::normalize(self.p, m, x, prec)
    }
}

impl Neg for &Padic {
    type Output = Padic;
    fn neg(self) -> Padic {
        if self.is_zero() {
            return self.clone();
        }
        let modulus = pow_p(self.p, self.rel_precision());
        Padic { p: self.p, val: self.val, unit: modulus - &self.unit, prec: self.prec }
    }
}

impl<'a> Sub<&'a Padic> for &'a Padic {
    type Output = Padic;
    fn sub(self, other: &Padic) -> Padic {
        self + &(-other)
    }
}

impl<'a> Mul<&'a Padic> for &'a Padic {
    type Output = Padic;
    fn mul(self, other: &Padic) -> Padic {
        assert_eq!(self.p, other.p, "prime mismatch");
        match (self.is_zero(), other.is_zero()) {
            (true, true) => Padic::zero(self.p, self.prec + other.prec),
            (true, false) => Padic::zero(self.p, self.prec + other.val),
            (false, true) => Padic::zero(self.p, other.prec + self.val),
            (false, false) => {
                let rel = self.rel_precision().min(other.rel_precision());
                let val = self.val + other.val;
                Padic::normalize(self.p, val, &self.unit * &other.unit, val + rel)
            }
        }
    }
}

macro_rules! forward_owned {
    ($t:ty, $tr:ident, $m:ident) => {
        impl $tr<$t> for $t {
            type Output = $t;
            fn $m(self, other: $t) -> $t {
                (&self).$m(&other)
            }
        }
        impl<'a> $tr<&'a $t> for $t {
            type Output = $t;
            fn $m(self, other: &'a $t) -> $t {
                (&self).$m(other)
            }
        }
    };
}

forward_owned!(Padic, Add, add);
forward_owned!(Padic, Sub, sub);
forward_owned!(Padic, Mul, mul);

impl Neg for Padic {
    type Output = Padic;
    fn neg(self) -> Padic {
        -&self
    }
}

/// An element `a + b·ω` of the unramified quadratic extension, `ω² = c`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadExt {
    a: Padic,
    b: Padic,
    c: u32,
}

impl QuadExt {
    pub fn new(a: Padic, b: Padic) -> Self {
        assert_eq!(a.p, b.p, "prime mismatch");
        let c = smallest_nonresidue(a.p);
        QuadExt { a, b, c }
    }

    pub fn from_base(a: Padic) -> Self {
        let b = Padic::zero(a.p, a.prec);
        Self::new(a, b)
    }

    pub fn zero(p: u32, prec: i64) -> Self {
        Self::new(Padic::zero(p, prec), Padic::zero(p, prec))
    }

    pub fn one(p: u32, prec: i64) -> Self {
        Self::new(Padic::one(p, prec), Padic::zero(p, prec))
    }

    /// The fixed generator `ω`.
    pub fn omega(p: u32, prec: i64) -> Self {
        Self::new(Padic::zero(p, prec), Padic::one(p, prec))
    }

    pub fn from_i64(p: u32, n: i64, prec: i64) -> Self {
        Self::from_base(Padic::from_i64(p, n, prec))
    }

    pub fn prime(&self) -> u32 {
        self.a.p
    }

    /// The constant `c` with `ω² = c`.
    pub fn omega_square(&self) -> u32 {
        self.c
    }

    pub fn re(&self) -> &Padic {
        &self.a
    }

    pub fn im(&self) -> &Padic {
        &self.b
    }

    pub fn precision(&self) -> i64 {
        self.a.prec.min(self.b.prec)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// `min(v(a), v(b))`; `None` when zero to precision.
    pub fn valuation(&self) -> Option<i64> {
        match (self.a.valuation(), self.b.valuation()) {
            (None, None) => None,
            (Some(x), None) => Some(x),
            (None, Some(y)) => Some(y),
            (Some(x), Some(y)) => Some(x.min(y)),
        }
    }

    pub fn val_bound(&self) -> i64 {
        self.a.val.min(self.b.val)
    }

    pub fn is_unit(&self) -> bool {
        self.valuation() == Some(0)
    }

    pub fn with_precision(&self, prec: i64) -> Self {
        QuadExt { a: self.a.with_precision(prec), b: self.b.with_precision(prec), c: self.c }
    }

    pub fn shift(&self, k: i64) -> Self {
        QuadExt { a: self.a.shift(k), b: self.b.shift(k), c: self.c }
    }

    pub fn mul_int(&self, n: i64) -> Self {
        QuadExt { a: self.a.mul_int(n), b: self.b.mul_int(n), c: self.c }
    }

    pub fn div_int(&self, n: i64) -> Self {
        QuadExt { a: self.a.div_int(n), b: self.b.div_int(n), c: self.c }
    }

    pub fn scale(&self, s: &Padic) -> Self {
        QuadExt { a: &self.a * s, b: &self.b * s, c: self.c }
    }

    /// The nontrivial automorphism over `Q_p`: `ω ↦ -ω`.
    pub fn frobenius(&self) -> Self {
        QuadExt { a: self.a.clone(), b: -&self.b, c: self.c }
    }

    pub fn norm(&self) -> Padic {
        &(&self.a * &self.a) - &(&self.b * &self.b).mul_int(self.c as i64)
    }

    pub fn trace(&self) -> Padic {
        self.a.mul_int(2)
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, PadicError> {
        let n = other.norm();
        if n.is_zero() {
            return Err(PadicError::DivisionByZero);
        }
        let num = self * &other.frobenius();
        Ok(QuadExt { a: num.a.checked_div(&n)?, b: num.b.checked_div(&n)?, c: self.c })
    }

    pub fn inverse(&self) -> Result<Self, PadicError> {
        let rel = self.precision() - self.val_bound();
        QuadExt::one(self.prime(), rel.max(1)).checked_div(self)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        if e == 0 {
            return QuadExt::one(self.prime(), self.precision().max(1));
        }
        let mut acc: Option<QuadExt> = None;
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => &a * &base,
                });
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc.expect("nonzero exponent")
    }

    /// Digits of agreement, minimum over the two coordinates.
    pub fn agreement(&self, other: &Self) -> i64 {
        self.a.agreement(&other.a).min(self.b.agreement(&other.b))
    }

    /// Teichmüller representative: the `(p²-1)`-st root of unity congruent
    /// to `self` modulo `p`.
    pub fn teichmuller(&self) -> Result<Self, PadicError> {
        if !self.is_unit() {
            return Err(PadicError::NotAUnit);
        }
        let prec = self.precision();
        let p2 = (self.prime() as u64).pow(2);
        let mut x = self.clone();
        for _ in 0..prec {
            x = x.pow(p2);
        }
        Ok(x.with_precision(prec))
    }

    /// p-adic logarithm of a principal unit, by the alternating series.
    pub fn plog(&self) -> Result<Self, PadicError> {
        let p = self.prime();
        let target = self.precision();
        let x = self - &QuadExt::one(p, target);
        let v = match x.valuation() {
            None => return Ok(QuadExt::zero(p, target)),
            Some(v) if v >= 1 => v,
            Some(_) => return Err(PadicError::NotPrincipalUnit),
        };
        let mut sum = QuadExt::zero(p, target);
        let mut power = x.clone();
        let mut k: i64 = 1;
        loop {
            if k * v - ilog(p, k) >= target {
                break;
            }
            let term = power.div_int(k);
            sum = if k % 2 == 1 { &sum + &term } else { &sum - &term };
            power = &power * &x;
            k += 1;
        }
        Ok(sum.with_precision(target))
    }

    /// p-adic exponential on `p·Z_{p²}`.
    pub fn pexp(&self) -> Result<Self, PadicError> {
        let p = self.prime();
        let target = self.precision();
        let v = match self.valuation() {
            None => return Ok(QuadExt::one(p, target)),
            Some(v) if v >= 1 => v,
            Some(_) => return Err(PadicError::OutsideConvergenceDomain),
        };
        let mut sum = QuadExt::one(p, target);
        let mut term = QuadExt::one(p, target + 64);
        let mut k: i64 = 1;
        loop {
            if k * v - (k - 1) / (p as i64 - 1) >= target {
                break;
            }
            term = (&term * self).div_int(k);
            sum = &sum + &term;
            k += 1;
        }
        Ok(sum.with_precision(target))
    }

    /// Uniform random unit of `Z_{p²}`.
    pub fn random_unit<R: Rng + ?Sized>(p: u32, prec: i64, rng: &mut R) -> Self {
        loop {
            let a = Padic::random_integer(p, prec, rng);
            let b = Padic::random_integer(p, prec, rng);
            let z = QuadExt::new(a, b);
            if z.is_unit() {
                return z;
            }
        }
    }
}

/// `floor(log_p(k))` for `k >= 1`.
fn ilog(p: u32, k: i64) -> i64 {
    let mut n = 0;
    let mut m = k;
    while m >= p as i64 {
        m /= p as i64;
        n += 1;
    }
    n
}

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) + ({})*w", self.a, self.b)
    }
}

impl<'a> Add<&'a QuadExt> for &'a QuadExt {
    type Output = QuadExt;
    fn add(self, other: &QuadExt) -> QuadExt {
        QuadExt { a: &self.a + &other.a, b: &self.b + &other.b, c: self.c }
    }
}

impl<'a> Sub<&'a QuadExt> for &'a QuadExt {
    type Output = QuadExt;
    fn sub(self, other: &QuadExt) -> QuadExt {
        QuadExt { a: &self.a - &other.a, b: &self.b - &other.b, c: self.c }
    }
}

impl Neg for &QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        QuadExt { a: -&self.a, b: -&self.b, c: self.c }
    }
}

impl<'a> Mul<&'a QuadExt> for &'a QuadExt {
    type Output = QuadExt;
    fn mul(self, other: &QuadExt) -> QuadExt {
        let ac = &self.a * &other.a;
        let bd = (&self.b * &other.b).mul_int(self.c as i64);
        let ad = &self.a * &other.b;
        let bc = &self.b * &other.a;
        QuadExt { a: &ac + &bd, b: &ad + &bc, c: self.c }
    }
}

forward_owned!(QuadExt, Add, add);
forward_owned!(QuadExt, Sub, sub);
forward_owned!(QuadExt, Mul, mul);

impl Neg for QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        -&self
    }
}

/// `x ∘ y` for the four field operations, with division checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn arith(x: &QuadExt, y: &QuadExt, op: ArithOp) -> Result<QuadExt, PadicError> {
    if x.prime() != y.prime() {
        return Err(PadicError::PrimeMismatch(x.prime(), y.prime()));
    }
    let out = match op {
        ArithOp::Add => x + y,
        ArithOp::Sub => x - y,
        ArithOp::Mul => x * y,
        ArithOp::Div => x.checked_div(y)?,
    };
    if out.precision() <= out.val_bound() && out.precision() <= 0 {
        return Err(PadicError::PrecisionExhausted);
    }
    Ok(out)
}
