//! Tate curves `E_q : y² + xy = x³ + a4·x + a6` over `Q_p` and the
//! uniformization `φ: E_℘^× → E_q(E_℘)` whose kernel is `q^Z`.

use thiserror::Error;

use crate::padic::{Padic, PadicError, QuadExt};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TateError {
    #[error("Tate period must have positive valuation")]
    InvalidPeriod,
    #[error("j-invariant is integral: no multiplicative reduction")]
    NotMultiplicativeReduction,
    #[error("reduction sign must be +1 or -1, got {0}")]
    InvalidReductionSign(i64),
    #[error("point computation ran out of certified digits")]
    PrecisionExhausted,
    #[error(transparent)]
    Padic(#[from] PadicError),
}

/// `s_k(q) = Σ_{n≥1} n^k q^n / (1 − q^n)`, with the tail below `p^-prec`.
fn eisenstein_sum(q: &Padic, k: u32, prec: i64) -> Result<Padic, TateError> {
    let p = q.prime();
    let vq = match q.valuation() {
        None => return Ok(Padic::zero(p, prec)),
        Some(v) => v,
    };
    let one = Padic::one(p, prec);
    let mut sum = Padic::zero(p, prec);
    let mut qn = q.clone();
    let mut n: i64 = 1;
    while n * vq < prec {
        let term = qn.checked_div(&(&one - &qn))?.mul_int(n.pow(k));
        sum = &sum + &term;
        qn = &qn * q;
        n += 1;
    }
    Ok(sum.with_precision(prec))
}

/// `(a4, a6)` of the Tate curve with period `q`.
pub fn tate_coefficients(q: &Padic, prec: i64) -> Result<(Padic, Padic), TateError> {
    if let Some(v) = q.valuation() {
        if v < 1 {
            return Err(TateError::InvalidPeriod);
        }
    }
    let s3 = eisenstein_sum(q, 3, prec)?;
    let s5 = eisenstein_sum(q, 5, prec)?;
    let a4 = s3.mul_int(-5);
    let a6 = -(&s3.mul_int(5) + &s5.mul_int(7)).div_int(12);
    Ok((a4, a6))
}

/// `(c4, Δ)` for `y² + xy = x³ + a4 x + a6`.
fn c4_and_discriminant(a4: &Padic, a6: &Padic) -> (Padic, Padic) {
    let p = a4.prime();
    let prec = a4.precision().min(a6.precision());
    let one = Padic::one(p, prec);
    let c4 = &one - &a4.mul_int(48);
    let a4sq = a4 * a4;
    // Δ = −b8 − 8 b4³ − 27 b6² + 9 b2 b4 b6 with b2 = 1, b4 = 2a4, b6 = 4a6, b8 = a6 − a4²
    let delta = &(&(&(&a4sq - a6) - &(&a4sq * a4).mul_int(64)) - &(a6 * a6).mul_int(432)) + &(a4 * a6).mul_int(72);
    (c4, delta)
}

/// `j(q) = c4³/Δ = 1/q + 744 + 196884 q + …`.
pub fn j_invariant(q: &Padic, prec: i64) -> Result<Padic, TateError> {
    if q.valuation().is_none_or(|v| v < 1) {
        return Err(TateError::InvalidPeriod);
    }
    let (a4, a6) = tate_coefficients(q, prec)?;
    let (c4, delta) = c4_and_discriminant(&a4, &a6);
    Ok((&(&c4 * &c4) * &c4).checked_div(&delta)?)
}

/// Recovers `q` from `j` by the fixed point `q = 1 / (j − (j(q) − 1/q))`.
pub fn tate_period_from_j(j: &Padic, prec: i64) -> Result<Padic, TateError> {
    let vj = j.valuation().ok_or(TateError::PrecisionExhausted)?;
    if vj >= 0 {
        return Err(TateError::NotMultiplicativeReduction);
    }
    let p = j.prime();
    let work = prec + 4 * (-vj);
    let j = j.clone();
    let mut q = j.inverse()?;
    let mut last = q.clone();
    for _ in 0..(work + 2) {
        let qw = q.with_precision(work);
        let tail = &j_invariant(&qw, work)? - &qw.inverse()?;
        q = (&j - &tail).inverse()?;
        if q.agreement(&last) >= q.precision() {
            break;
        }
        last = q.clone();
    }
    let _ = p;
    Ok(q.with_precision(prec))
}

/// A point of `E_q` over `E_℘ = Q_p(ω)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CurvePoint {
    Infinity,
    Affine { x: QuadExt, y: QuadExt },
}

impl CurvePoint {
    pub fn is_infinity(&self) -> bool {
        matches!(self, CurvePoint::Infinity)
    }

    /// Number of digits on which two points agree, relative to the size of
    /// the coordinates. Against the identity the formal parameter `z = −x/y`
    /// is used instead.
    pub fn agreement(&self, other: &CurvePoint) -> i64 {
        match (self, other) {
            (CurvePoint::Infinity, CurvePoint::Infinity) => i64::MAX,
            (CurvePoint::Infinity, CurvePoint::Affine { x, y })
            | (CurvePoint::Affine { x, y }, CurvePoint::Infinity) => match x.checked_div(y) {
                Ok(z) => z.val_bound().max(0),
                Err(_) => 0,
            },
            (CurvePoint::Affine { x: x1, y: y1 }, CurvePoint::Affine { x: x2, y: y2 }) => {
                let scale = x1.val_bound().min(y1.val_bound()).min(0);
                x1.agreement(x2).min(y1.agreement(y2)) - scale
            }
        }
    }
}

/// A Tate curve over `Q_p` with its uniformization data.
#[derive(Clone, Debug)]
pub struct TateCurve {
    p: u32,
    prec: i64,
    q: Padic,
    vq: i64,
    a4: Padic,
    a6: Padic,
    s1: Padic,
    reduction_sign: i64,
}

impl TateCurve {
    pub fn new(q: Padic, prec: i64, reduction_sign: i64) -> Result<Self, TateError> {
        crate::padic::check_prime(q.prime())?;
        if reduction_sign != 1 && reduction_sign != -1 {
            return Err(TateError::InvalidReductionSign(reduction_sign));
        }
        let vq = match q.valuation() {
            Some(v) if v >= 1 => v,
            _ => return Err(TateError::InvalidPeriod),
        };
        let (a4, a6) = tate_coefficients(&q, prec)?;
        let s1 = eisenstein_sum(&q, 1, prec)?;
        Ok(TateCurve { p: q.prime(), prec, q, vq, a4, a6, s1, reduction_sign })
    }

    pub fn from_j(j: &Padic, prec: i64, reduction_sign: i64) -> Result<Self, TateError> {
        Self::new(tate_period_from_j(j, prec)?, prec, reduction_sign)
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    pub fn period(&self) -> &Padic {
        &self.q
    }

    pub fn a4(&self) -> &Padic {
        &self.a4
    }

    pub fn a6(&self) -> &Padic {
        &self.a6
    }

    /// `a_℘`: `+1` split, `−1` non-split.
    pub fn reduction_sign(&self) -> i64 {
        self.reduction_sign
    }

    pub fn j_invariant(&self) -> Result<Padic, TateError> {
        let (c4, delta) = c4_and_discriminant(&self.a4, &self.a6);
        Ok((&(&c4 * &c4) * &c4).checked_div(&delta)?)
    }

    pub fn discriminant(&self) -> Padic {
        c4_and_discriminant(&self.a4, &self.a6).1
    }

    /// `φ(u)`, evaluated on the representative of `u q^Z` in the annulus
    /// `0 ≤ v(u) < v(q)`.
    pub fn phi(&self, u: &QuadExt) -> Result<CurvePoint, TateError> {
        let p = self.p;
        let prec = self.prec;
        let vu = u.valuation().ok_or(TateError::PrecisionExhausted)?;
        let k = vu.div_euclid(self.vq);
        let qk = QuadExt::from_base(self.q.pow(k.unsigned_abs()));
        let u = if k >= 0 { u.checked_div(&qk)? } else { u * &qk };
        let vu = u.valuation().ok_or(TateError::PrecisionExhausted)?;
        let one = QuadExt::one(p, prec);
        // work from w = 1 − u so that points near the identity keep every
        // digit the input carries
        let w = &one - &u;
        if w.is_zero() {
            return Ok(CurvePoint::Infinity);
        }
        let w2 = &w * &w;
        let mut x = u.checked_div(&w2)?;
        let mut y = (&u * &u).checked_div(&(&w2 * &w))?;

        let qe = QuadExt::from_base(self.q.clone());
        let mut qn = qe.clone();
        let mut n: i64 = 1;
        while n * self.vq + vu < prec {
            let t = &qn * &u;
            let d = &one - &t;
            let d2 = &d * &d;
            x = &x + &t.checked_div(&d2)?;
            y = &y + &(&t * &t).checked_div(&(&d2 * &d))?;
            qn = &qn * &qe;
            n += 1;
        }
        let uinv = u.inverse()?;
        let mut qm = qe.clone();
        let mut m: i64 = 1;
        while m * self.vq - vu < prec {
            let t = &qm * &uinv;
            let d = &one - &t;
            let d2 = &d * &d;
            x = &x + &t.checked_div(&d2)?;
            y = &y - &t.checked_div(&(&d2 * &d))?;
            qm = &qm * &qe;
            m += 1;
        }
        let s1 = QuadExt::from_base(self.s1.clone());
        x = &x - &s1.mul_int(2);
        y = &y + &s1;
        Ok(CurvePoint::Affine { x: x.with_precision(prec), y: y.with_precision(prec) })
    }

    pub fn negate(&self, pt: &CurvePoint) -> CurvePoint {
        match pt {
            CurvePoint::Infinity => CurvePoint::Infinity,
            CurvePoint::Affine { x, y } => CurvePoint::Affine { x: x.clone(), y: -&(y + x) },
        }
    }

    /// Chord–tangent addition.
    pub fn add_points(&self, a: &CurvePoint, b: &CurvePoint) -> Result<CurvePoint, TateError> {
        let (x1, y1, x2, y2) = match (a, b) {
            (CurvePoint::Infinity, _) => return Ok(b.clone()),
            (_, CurvePoint::Infinity) => return Ok(a.clone()),
            (CurvePoint::Affine { x: x1, y: y1 }, CurvePoint::Affine { x: x2, y: y2 }) => (x1, y1, x2, y2),
        };
        let a4 = QuadExt::from_base(self.a4.clone());
        let a6 = QuadExt::from_base(self.a6.clone());
        let dx = x2 - x1;
        let (lambda, nu) = if dx.is_zero() {
            if (&(y1 + y2) + x1).is_zero() {
                return Ok(CurvePoint::Infinity);
            }
            if !(y2 - y1).is_zero() {
                return Err(TateError::PrecisionExhausted);
            }
            let denom = &y1.mul_int(2) + x1;
            if denom.is_zero() {
                return Ok(CurvePoint::Infinity);
            }
            let x1sq = x1 * x1;
            let lambda = (&(&x1sq.mul_int(3) + &a4) - y1).checked_div(&denom)?;
            let nu = (&(&(&a4 * x1) - &(&x1sq * x1)) + &a6.mul_int(2)).checked_div(&denom)?;
            (lambda, nu)
        } else {
            let lambda = (y2 - y1).checked_div(&dx)?;
            let nu = (&(y1 * x2) - &(y2 * x1)).checked_div(&dx)?;
            (lambda, nu)
        };
        let x3 = &(&(&(&lambda * &lambda) + &lambda) - x1) - x2;
        let one = QuadExt::one(self.p, self.prec);
        let y3 = -&(&(&(&lambda + &one) * &x3) + &nu);
        Ok(CurvePoint::Affine { x: x3, y: y3 })
    }

    /// `[n]P` by double-and-add.
    pub fn multiply(&self, pt: &CurvePoint, n: i64) -> Result<CurvePoint, TateError> {
        let mut acc = CurvePoint::Infinity;
        let mut base = if n < 0 { self.negate(pt) } else { pt.clone() };
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add_points(&acc, &base)?;
            }
            k >>= 1;
            if k > 0 {
                base = self.add_points(&base, &base)?;
            }
        }
        Ok(acc)
    }

    /// Digits to which the Weierstrass equation holds, measured relative to
    /// the size of the point.
    pub fn on_curve_margin(&self, pt: &CurvePoint) -> i64 {
        match pt {
            CurvePoint::Infinity => i64::MAX,
            CurvePoint::Affine { x, y } => {
                let a4 = QuadExt::from_base(self.a4.clone());
                let a6 = QuadExt::from_base(self.a6.clone());
                let lhs = &(y * y) + &(x * y);
                let rhs = &(&(&(x * x) * x) + &(&a4 * x)) + &a6;
                let scale = 3 * x.val_bound().min(0);
                (&lhs - &rhs).val_bound() - scale
            }
        }
    }
}

/// Frobenius applied to both coordinates.
pub fn sigma_on_points(pt: &CurvePoint) -> CurvePoint {
    match pt {
        CurvePoint::Infinity => CurvePoint::Infinity,
        CurvePoint::Affine { x, y } => CurvePoint::Affine { x: x.frobenius(), y: y.frobenius() },
    }
}
