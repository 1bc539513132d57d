//! Coordinates on the torsion-free pro-p completion of `E_℘^×` for the
//! unramified quadratic extension `E_℘ = Q_p(ω)`.
//!
//! A nonzero `u = p^v · ζ · w` (ζ a Teichmüller root of unity, `w` a
//! principal unit) gets coordinates `(v, α, β)` with
//! `plog(w) = α·plog(1+p) + β·plog(u₀)` and `u₀ = (1+pω)/(1-pω)` the pinned
//! norm-one generator. Frobenius acts by `diag(1, 1, -1)` in these
//! coordinates, and the σ = −1 eigenspace is the `β` line.

use std::ops::{Add, Neg, Sub};

use crate::padic::{Padic, PadicError, QuadExt};

/// The two logarithms spanning `log(U¹)` over `Z_p`.
#[derive(Clone, Debug)]
pub struct UnitBasis {
    p: u32,
    prec: i64,
    /// `plog(1+p)`, a `Q_p` element of valuation 1
    log_base: Padic,
    /// ω-coordinate of `plog(u₀)`; `plog(u₀)` itself is purely imaginary
    log_minus: Padic,
}

impl UnitBasis {
    pub fn new(p: u32, prec: i64) -> Result<Self, PadicError> {
        crate::padic::check_prime(p)?;
        let work = prec + 4;
        let log_base = QuadExt::from_i64(p, 1 + p as i64, work).plog()?.re().clone();
        let log_minus = norm_one_unit(p, work)?.plog()?.im().clone();
        Ok(UnitBasis { p, prec, log_base, log_minus })
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    /// Coordinates of a nonzero element of `E_℘^×`.
    pub fn complete(&self, u: &QuadExt) -> Result<CompletedUnit, PadicError> {
        let v = u.valuation().ok_or(PadicError::PrecisionExhausted)?;
        let unit = u.shift(-v);
        let zeta = unit.teichmuller()?;
        let principal = unit.checked_div(&zeta)?;
        let log = principal.plog()?;
        let alpha = log.re().checked_div(&self.log_base)?;
        let beta = log.im().checked_div(&self.log_minus)?;
        Ok(CompletedUnit {
            val: Padic::from_i64(self.p, v, self.prec),
            alpha: alpha.with_precision(self.prec),
            beta: beta.with_precision(self.prec),
        })
    }

    /// The completion of `u₀`; its minus coordinate is 1 by construction.
    pub fn norm_one_generator(&self) -> Result<CompletedUnit, PadicError> {
        self.complete(&norm_one_unit(self.p, self.prec)?)
    }

    /// Inverse of the coordinate map on `Ê^×`, landing on the representative
    /// with trivial Teichmüller part.
    pub fn realize(&self, c: &CompletedUnit) -> Result<QuadExt, PadicError> {
        let v = c.val.to_bigint().and_then(|n| i64::try_from(n).ok()).ok_or(PadicError::PrecisionExhausted)?;
        let log = QuadExt::new(&c.alpha * &self.log_base, &c.beta * &self.log_minus);
        Ok(log.pexp()?.shift(v))
    }
}

/// `u₀ = (1 + pω) / (1 − pω)`.
pub fn norm_one_unit(p: u32, prec: i64) -> Result<QuadExt, PadicError> {
    let one = QuadExt::one(p, prec);
    let pw = QuadExt::omega(p, prec).mul_int(p as i64);
    (&one + &pw).checked_div(&(&one - &pw))
}

/// Coordinates `(v, α, β)` in `Ê_℘^× ≅ Z_p³`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompletedUnit {
    pub val: Padic,
    pub alpha: Padic,
    pub beta: Padic,
}

impl CompletedUnit {
    pub fn zero(p: u32, prec: i64) -> Self {
        CompletedUnit { val: Padic::zero(p, prec), alpha: Padic::zero(p, prec), beta: Padic::zero(p, prec) }
    }

    pub fn coords(&self) -> [&Padic; 3] {
        [&self.val, &self.alpha, &self.beta]
    }

    pub fn scale(&self, s: &Padic) -> Self {
        CompletedUnit { val: &self.val * s, alpha: &self.alpha * s, beta: &self.beta * s }
    }

    pub fn is_zero(&self) -> bool {
        self.coords().iter().all(|c| c.is_zero())
    }

    /// Minimum digit agreement over the three coordinates.
    pub fn agreement(&self, other: &Self) -> i64 {
        self.coords().iter().zip(other.coords()).map(|(a, b)| a.agreement(b)).min().unwrap_or(i64::MAX)
    }
}

impl<'a> Add<&'a CompletedUnit> for &'a CompletedUnit {
    type Output = CompletedUnit;
    fn add(self, o: &CompletedUnit) -> CompletedUnit {
        CompletedUnit { val: &self.val + &o.val, alpha: &self.alpha + &o.alpha, beta: &self.beta + &o.beta }
    }
}

impl<'a> Sub<&'a CompletedUnit> for &'a CompletedUnit {
    type Output = CompletedUnit;
    fn sub(self, o: &CompletedUnit) -> CompletedUnit {
        self + &(-o)
    }
}

impl Neg for &CompletedUnit {
    type Output = CompletedUnit;
    fn neg(self) -> CompletedUnit {
        CompletedUnit { val: -&self.val, alpha: -&self.alpha, beta: -&self.beta }
    }
}

/// Matrix of Frobenius on `(v, α, β)`.
pub const SIGMA_MATRIX: [[i64; 3]; 3] = [[1, 0, 0], [0, 1, 0], [0, 0, -1]];

pub fn sigma_on_completion(c: &CompletedUnit) -> CompletedUnit {
    CompletedUnit { val: c.val.clone(), alpha: c.alpha.clone(), beta: -&c.beta }
}

/// A coordinate on the rank-one module `Ê_℘^−`, in the basis `{u₀}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinusUnit {
    pub coord: Padic,
}

impl MinusUnit {
    /// Back into `Ê_℘^×` coordinates.
    pub fn embed(&self) -> CompletedUnit {
        let p = self.coord.prime();
        let prec = self.coord.precision();
        CompletedUnit { val: Padic::zero(p, prec), alpha: Padic::zero(p, prec), beta: self.coord.clone() }
    }
}

/// `((1 − σ)/2)(c)` read in the generator basis of `Ê_℘^−`.
pub fn minus_project(c: &CompletedUnit) -> MinusUnit {
    let twice = &c.beta - &sigma_on_completion(c).beta;
    MinusUnit { coord: twice.div_int(2) }
}

/// Integer matrix rank by fraction-free elimination.
pub(crate) fn int_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..m.len()).find(|&i| m[i][col] != 0) else { continue };
        m.swap(rank, piv);
        for i in 0..m.len() {
            if i != rank && m[i][col] != 0 {
                let (a, b) = (m[rank][col], m[i][col]);
                for j in 0..ncols {
                    m[i][j] = m[i][j] * a - m[rank][j] * b;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// `(total rank, rank of the σ = −1 eigenspace)` of the completion.
pub fn eigenspace_ranks() -> (usize, usize) {
    let one_minus_sigma: Vec<Vec<i64>> =
        (0..3).map(|i| (0..3).map(|j| i64::from(i == j) - SIGMA_MATRIX[i][j]).collect()).collect();
    let ident: Vec<Vec<i64>> = (0..3).map(|i| (0..3).map(|j| i64::from(i == j)).collect()).collect();
    (int_rank(&ident), int_rank(&one_minus_sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const P: u32 = 5;
    const N: i64 = 40;

    fn basis() -> UnitBasis {
        UnitBasis::new(P, N).unwrap()
    }

    #[test]
    fn uniformizer_has_valuation_coordinate_only() {
        let c = basis().complete(&QuadExt::from_i64(P, 5, N)).unwrap();
        assert_eq!(c.val, Padic::from_i64(P, 1, N));
        assert!(c.alpha.is_zero() && c.beta.is_zero());
    }

    #[test]
    fn roots_of_unity_die() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b = basis();
        for _ in 0..5 {
            let zeta = QuadExt::random_unit(P, N, &mut rng).teichmuller().unwrap();
            assert!(b.complete(&zeta).unwrap().is_zero());
        }
    }

    #[test]
    fn generator_is_normalized() {
        let b = basis();
        let u0 = norm_one_unit(P, N).unwrap();
        assert!(u0.norm().agreement(&Padic::one(P, N)) >= N);
        let g = b.norm_one_generator().unwrap();
        assert!(minus_project(&g).coord.agreement(&Padic::one(P, N)) >= N - 2);
        let g2 = b.complete(&(&u0 * &u0)).unwrap();
        assert!(g2.agreement(&(&g + &g)) >= N - 2);
    }

    #[test]
    fn sigma_involution_and_fixed_uniformizer() {
        let b = basis();
        let c = b.complete(&QuadExt::from_i64(P, 5, N)).unwrap();
        assert_eq!(sigma_on_completion(&c), c);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = b.complete(&QuadExt::random_unit(P, N, &mut rng)).unwrap();
        assert_eq!(sigma_on_completion(&sigma_on_completion(&d)), d);
    }

    #[test]
    fn sigma_commutes_with_completion() {
        let b = basis();
        let one = QuadExt::one(P, N);
        let pw = QuadExt::omega(P, N).mul_int(5);
        let plus = b.complete(&(&one + &pw)).unwrap();
        let minus = b.complete(&(&one - &pw)).unwrap();
        assert!(sigma_on_completion(&plus).agreement(&minus) >= N - 2);
    }

    #[test]
    fn projector_matches_direct_eigen_decomposition() {
        let b = basis();
        let one = QuadExt::one(P, N);
        let pw = QuadExt::omega(P, N).mul_int(5);
        let x = &one + &pw;
        let m = minus_project(&b.complete(&x).unwrap());
        assert!(!m.coord.is_zero());
        // plog(x / σ(x)) / 2, read against plog(u₀)
        let ratio = x.checked_div(&x.frobenius()).unwrap();
        let direct = ratio.plog().unwrap().im().div_int(2).checked_div(&b.log_minus).unwrap();
        assert!(m.coord.agreement(&direct) >= N - 2);
        // idempotent, and kills σ-fixed vectors
        let again = minus_project(&m.embed());
        assert_eq!(again.coord, m.coord);
        assert!(minus_project(&b.complete(&QuadExt::from_i64(P, 5, N)).unwrap()).coord.is_zero());
    }

    #[test]
    fn ranks_of_completion() {
        assert_eq!(eigenspace_ranks(), (3, 1));
        // (1 − σ)(1 + σ) = 0 as integer matrices
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0;
                for k in 0..3 {
                    let a = i64::from(i == k) - SIGMA_MATRIX[i][k];
                    let b = i64::from(k == j) + SIGMA_MATRIX[k][j];
                    acc += a * b;
                }
                assert_eq!(acc, 0);
            }
        }
    }

    #[test]
    fn realize_inverts_complete() {
        let b = basis();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = QuadExt::random_unit(P, N, &mut rng).shift(2);
        let c = b.complete(&u).unwrap();
        let back = b.realize(&c).unwrap();
        assert!(b.complete(&back).unwrap().agreement(&c) >= N - 3);
    }
}
