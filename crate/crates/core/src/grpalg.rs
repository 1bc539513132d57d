//! Truncated completed group algebras `Z_p⟦Q × Z_p^s⟧ ≅ Z_p[Q]⟦t₁…t_s⟧`,
//! with `[g_i] = 1 + t_i` for the chosen topological generators.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::padic::{Padic, PadicError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrpAlgError {
    #[error("group algebra elements have different shapes")]
    ShapeMismatch,
    #[error("element lies in I^{actual}, not I^{wanted}")]
    DegreeTooLow { wanted: usize, actual: usize },
    #[error("degree {0} exceeds the truncation degree {1}")]
    BeyondTruncation(usize, usize),
    #[error("rank {rank} below expected {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("elementary divisor {0} must be at least 2")]
    BadDivisor(u32),
    #[error(transparent)]
    Padic(#[from] PadicError),
}

/// `Q` as a product of cyclic groups, the free rank `s`, the truncation
/// degree `D` and the coefficient precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupShape {
    divisors: Vec<u32>,
    s: usize,
    degree: usize,
    p: u32,
    prec: i64,
}

impl GroupShape {
    pub fn new(divisors: Vec<u32>, s: usize, degree: usize, p: u32, prec: i64) -> Result<Self, GrpAlgError> {
        if let Some(&d) = divisors.iter().find(|&&d| d < 2) {
            return Err(GrpAlgError::BadDivisor(d));
        }
        Ok(GroupShape { divisors, s, degree, p, prec })
    }

    pub fn divisors(&self) -> &[u32] {
        &self.divisors
    }

    pub fn free_rank(&self) -> usize {
        self.s
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    /// `|Q|`.
    pub fn order(&self) -> usize {
        self.divisors.iter().map(|&d| d as usize).product()
    }

    /// Mixed-radix components of the element with index `i`.
    pub fn components(&self, mut i: usize) -> Vec<u32> {
        self.divisors
            .iter()
            .map(|&d| {
                let c = (i % d as usize) as u32;
                i /= d as usize;
                c
            })
            .collect()
    }

    pub fn index_of(&self, comps: &[u32]) -> usize {
        let mut i = 0usize;
        for (c, &d) in comps.iter().zip(&self.divisors).rev() {
            i = i * d as usize + (*c % d) as usize;
        }
        i
    }

    pub fn q_mul(&self, a: usize, b: usize) -> usize {
        let ca = self.components(a);
        let cb = self.components(b);
        let sum: Vec<u32> = ca.iter().zip(&cb).zip(&self.divisors).map(|((x, y), d)| (x + y) % d).collect();
        self.index_of(&sum)
    }

    pub fn q_inv(&self, a: usize) -> usize {
        let neg: Vec<u32> = self.components(a).iter().zip(&self.divisors).map(|(x, d)| (d - x) % d).collect();
        self.index_of(&neg)
    }
}

type Key = (usize, Vec<u8>);

fn total_degree(alpha: &[u8]) -> usize {
    alpha.iter().map(|&a| a as usize).sum()
}

fn insert_add(map: &mut BTreeMap<Key, Padic>, key: Key, c: Padic) {
    match map.get_mut(&key) {
        Some(v) => {
            let s = &*v + &c;
            if s.is_zero() {
                map.remove(&key);
            } else {
                *v = s;
            }
        }
        None => {
            if !c.is_zero() {
                map.insert(key, c);
            }
        }
    }
}

/// `Σ c_{q,α} [q] t^α`, truncated at total degree `D`.
///
/// `truncated` is sticky: it records that some product dropped nonzero terms
/// above `D`, so the element is only known modulo `(t)^{D+1}`.
#[derive(Clone, Debug)]
pub struct GroupAlgebraElem {
    shape: GroupShape,
    terms: BTreeMap<Key, Padic>,
    truncated: bool,
}

impl GroupAlgebraElem {
    pub fn zero(shape: &GroupShape) -> Self {
        GroupAlgebraElem { shape: shape.clone(), terms: BTreeMap::new(), truncated: false }
    }

    pub fn scalar(shape: &GroupShape, c: Padic) -> Self {
        Self::monomial(shape, 0, &vec![0; shape.s], c)
    }

    pub fn one(shape: &GroupShape) -> Self {
        Self::scalar(shape, Padic::one(shape.p, shape.prec))
    }

    /// `c·[q]·t^α`.
    pub fn monomial(shape: &GroupShape, q: usize, alpha: &[u8], c: Padic) -> Self {
        let mut out = Self::zero(shape);
        if total_degree(alpha) <= shape.degree {
            insert_add(&mut out.terms, (q % shape.order(), alpha.to_vec()), c);
        }
        out
    }

    /// The free variable `t_i = [g_i] − 1`.
    pub fn variable(shape: &GroupShape, i: usize) -> Self {
        let mut alpha = vec![0u8; shape.s];
        alpha[i] = 1;
        Self::monomial(shape, 0, &alpha, Padic::one(shape.p, shape.prec))
    }

    /// `[q · ∏ g_i^{e_i}] = [q] ∏ (1 + t_i)^{e_i}`, expanded binomially.
    pub fn group_element(shape: &GroupShape, q: usize, exps: &[i64]) -> Self {
        let mut out = Self::monomial(shape, q, &vec![0; shape.s], Padic::one(shape.p, shape.prec));
        for (i, &e) in exps.iter().enumerate() {
            let mut factor = Self::zero(shape);
            let mut binom = BigInt::one();
            for k in 0..=shape.degree {
                if binom.is_zero() {
                    break;
                }
                let mut alpha = vec![0u8; shape.s];
                alpha[i] = k as u8;
                insert_add(&mut factor.terms, (0, alpha), Padic::from_bigint(shape.p, &binom, shape.prec));
                binom = binom * BigInt::from(e - k as i64) / BigInt::from(k as i64 + 1);
            }
            out = out.mul_truncating(&factor, false);
        }
        out
    }

    pub fn shape(&self) -> &GroupShape {
        &self.shape
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(usize, Vec<u8>), &Padic)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, q: usize, alpha: &[u8]) -> Padic {
        self.terms.get(&(q, alpha.to_vec())).cloned().unwrap_or_else(|| Padic::zero(self.shape.p, self.shape.prec))
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(Padic::is_zero)
    }

    /// Minimum over coefficients of agreeing digits.
    pub fn agreement(&self, other: &Self) -> i64 {
        (self - other).terms.values().map(Padic::val_bound).min().unwrap_or(self.shape.prec)
    }

    pub fn scale(&self, c: &Padic) -> Self {
        let mut out = Self::zero(&self.shape);
        out.truncated = self.truncated;
        for (k, v) in &self.terms {
            insert_add(&mut out.terms, k.clone(), v * c);
        }
        out
    }

    fn mul_truncating(&self, other: &Self, flag: bool) -> Self {
        let mut out = Self::zero(&self.shape);
        out.truncated = self.truncated || other.truncated;
        let d = self.shape.degree;
        for ((qa, aa), ca) in &self.terms {
            let da = total_degree(aa);
            for ((qb, ab), cb) in &other.terms {
                if da + total_degree(ab) > d {
                    if flag && !(ca * cb).is_zero() {
                        out.truncated = true;
                    }
                    continue;
                }
                let alpha: Vec<u8> = aa.iter().zip(ab).map(|(x, y)| x + y).collect();
                insert_add(&mut out.terms, (self.shape.q_mul(*qa, *qb), alpha), ca * cb);
            }
        }
        out
    }

    /// Convolution in `Q` and series product in `t`, truncated at `D`.
    pub fn algebra_mul(&self, other: &Self) -> Result<Self, GrpAlgError> {
        if self.shape != other.shape {
            return Err(GrpAlgError::ShapeMismatch);
        }
        Ok(self.mul_truncating(other, true))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, GrpAlgError> {
        if self.shape != other.shape {
            return Err(GrpAlgError::ShapeMismatch);
        }
        let mut out = self.clone();
        out.truncated |= other.truncated;
        for (k, v) in &other.terms {
            insert_add(&mut out.terms, k.clone(), v.clone());
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(&self.shape);
        for _ in 0..e {
            acc = self.mul_truncating(&acc, true);
        }
        acc
    }

    /// The involution induced by `g ↦ g^{-1}`: `[q] ↦ [q^{-1}]` and
    /// `t_i ↦ (1 + t_i)^{-1} − 1 = Σ_{k≥1} (−t_i)^k`. Exact modulo `(t)^{D+1}`.
    pub fn involution(&self) -> Self {
        let shape = &self.shape;
        let d = shape.degree;
        // powers of the substituted variables, cached per (i, k)
        let mut powers: Vec<Vec<Self>> = Vec::with_capacity(shape.s);
        for i in 0..shape.s {
            let mut inv_t = Self::zero(shape);
            for k in 1..=d {
                let mut alpha = vec![0u8; shape.s];
                alpha[i] = k as u8;
                let c = if k % 2 == 0 { 1 } else { -1 };
                insert_add(&mut inv_t.terms, (0, alpha), Padic::from_i64(shape.p, c, shape.prec));
            }
            let mut row = vec![Self::one(shape)];
            for k in 1..=d {
                let next = row[k - 1].mul_truncating(&inv_t, false);
                row.push(next);
            }
            powers.push(row);
        }
        let mut out = Self::zero(shape);
        out.truncated = self.truncated;
        for ((q, alpha), c) in &self.terms {
            let mut term = Self::monomial(shape, shape.q_inv(*q), &vec![0; shape.s], c.clone());
            for (i, &a) in alpha.iter().enumerate() {
                if a > 0 {
                    term = term.mul_truncating(&powers[i][a as usize], false);
                }
            }
            for (k, v) in term.terms {
                insert_add(&mut out.terms, k, v);
            }
        }
        out
    }

    /// Largest `n ≤ D` with `x ∈ I_Q^n`: the least total `t`-degree present.
    pub fn rel_aug_degree(&self) -> usize {
        self.terms
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((_, a), _)| total_degree(a))
            .min()
            .unwrap_or(self.shape.degree)
            .min(self.shape.degree)
    }

    /// Image in `I_Q^n / I_Q^{n+1} ≅ Sym^n(Z_p^s) ⊗ Z_p[Q]`.
    pub fn leading_term(&self, n: usize) -> Result<GradedPiece, GrpAlgError> {
        if n > self.shape.degree {
            return Err(GrpAlgError::BeyondTruncation(n, self.shape.degree));
        }
        let actual = self.rel_aug_degree();
        if !self.is_zero() && actual < n {
            return Err(GrpAlgError::DegreeTooLow { wanted: n, actual });
        }
        let mut piece = GradedPiece::zero(&self.shape, n);
        for ((q, a), c) in &self.terms {
            if total_degree(a) == n {
                insert_add(&mut piece.terms, (*q, a.clone()), c.clone());
            }
        }
        Ok(piece)
    }
}

impl std::ops::Add for &GroupAlgebraElem {
    type Output = GroupAlgebraElem;
    fn add(self, rhs: &GroupAlgebraElem) -> GroupAlgebraElem {
        self.try_add(rhs).expect("shape mismatch")
    }
}

impl std::ops::Neg for &GroupAlgebraElem {
    type Output = GroupAlgebraElem;
    fn neg(self) -> GroupAlgebraElem {
        self.scale(&Padic::from_i64(self.shape.p, -1, self.shape.prec))
    }
}

impl std::ops::Sub for &GroupAlgebraElem {
    type Output = GroupAlgebraElem;
    fn sub(self, rhs: &GroupAlgebraElem) -> GroupAlgebraElem {
        self + &(-rhs)
    }
}

impl std::ops::Mul for &GroupAlgebraElem {
    type Output = GroupAlgebraElem;
    fn mul(self, rhs: &GroupAlgebraElem) -> GroupAlgebraElem {
        self.algebra_mul(rhs).expect("shape mismatch")
    }
}

/// A homogeneous degree-`n` element of `Sym^n(Z_p^s) ⊗ Z_p[Q]`, in the
/// monomial basis `t^α ⊗ [q]`.
#[derive(Clone, Debug)]
pub struct GradedPiece {
    shape: GroupShape,
    degree: usize,
    terms: BTreeMap<Key, Padic>,
}

impl GradedPiece {
    pub fn zero(shape: &GroupShape, degree: usize) -> Self {
        GradedPiece { shape: shape.clone(), degree, terms: BTreeMap::new() }
    }

    pub fn monomial(shape: &GroupShape, q: usize, alpha: &[u8], c: Padic) -> Self {
        let mut out = Self::zero(shape, total_degree(alpha));
        insert_add(&mut out.terms, (q % shape.order(), alpha.to_vec()), c);
        out
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn shape(&self) -> &GroupShape {
        &self.shape
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(usize, Vec<u8>), &Padic)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, q: usize, alpha: &[u8]) -> Padic {
        self.terms.get(&(q, alpha.to_vec())).cloned().unwrap_or_else(|| Padic::zero(self.shape.p, self.shape.prec))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(Padic::is_zero)
    }

    pub fn scale(&self, c: &Padic) -> Self {
        let mut out = Self::zero(&self.shape, self.degree);
        for (k, v) in &self.terms {
            insert_add(&mut out.terms, k.clone(), v * c);
        }
        out
    }

    /// `id ⊗ (−)^∨`: `[q] ↦ [q^{-1}]` on the group-ring factor.
    pub fn involution_q(&self) -> Self {
        let mut out = Self::zero(&self.shape, self.degree);
        for ((q, a), c) in &self.terms {
            insert_add(&mut out.terms, (self.shape.q_inv(*q), a.clone()), c.clone());
        }
        out
    }

    /// Translation by `[g]`.
    pub fn translate(&self, g: usize) -> Self {
        let mut out = Self::zero(&self.shape, self.degree);
        for ((q, a), c) in &self.terms {
            insert_add(&mut out.terms, (self.shape.q_mul(*q, g), a.clone()), c.clone());
        }
        out
    }

    /// Product in the graded ring `Sym(Z_p^s) ⊗ Z_p[Q]`.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(&self.shape, self.degree + other.degree);
        for ((qa, aa), ca) in &self.terms {
            for ((qb, ab), cb) in &other.terms {
                let alpha: Vec<u8> = aa.iter().zip(ab).map(|(x, y)| x + y).collect();
                insert_add(&mut out.terms, (self.shape.q_mul(*qa, *qb), alpha), ca * cb);
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            insert_add(&mut out.terms, k.clone(), -v);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            insert_add(&mut out.terms, k.clone(), v.clone());
        }
        out
    }

    /// Digits on which the two pieces agree (the working precision if equal).
    pub fn agreement(&self, other: &Self) -> i64 {
        if self.degree != other.degree && !(self.is_zero() && other.is_zero()) {
            return 0;
        }
        self.sub(other).terms.values().map(Padic::val_bound).min().unwrap_or(self.shape.prec)
    }
}

/// Output of the injectivity check on graded pieces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankCertificate {
    pub rows: usize,
    pub columns: usize,
    pub rank: usize,
    /// Largest pivot valuation, i.e. the power of `p` that had to be inverted.
    pub max_pivot_valuation: i64,
}

/// Pivot valuations allowed when passing to `Q_p` coefficients.
pub const DENOMINATOR_BUDGET: i64 = 10;

/// Column rank by `p`-adic elimination, always pivoting on an entry of least
/// valuation so that everything stays integral. Pivots beyond the
/// denominator budget do not count.
pub fn padic_rank(columns: &[Vec<Padic>]) -> (usize, i64) {
    let mut cols: Vec<Vec<Padic>> = columns.to_vec();
    let nrows = cols.first().map_or(0, Vec::len);
    let mut live_cols: Vec<usize> = (0..cols.len()).collect();
    let mut live_rows: Vec<usize> = (0..nrows).collect();
    let mut rank = 0;
    let mut max_val = 0;
    loop {
        let mut best: Option<(i64, usize, usize)> = None;
        for (ci, &c) in live_cols.iter().enumerate() {
            for (ri, &r) in live_rows.iter().enumerate() {
                if cols[c][r].is_zero() {
                    continue;
                }
                let v = cols[c][r].val_bound();
                if best.is_none_or(|(bv, _, _)| v < bv) {
                    best = Some((v, ci, ri));
                }
            }
        }
        let Some((v, ci, ri)) = best else { break };
        if v > DENOMINATOR_BUDGET {
            break;
        }
        let c = live_cols.swap_remove(ci);
        let r = live_rows.swap_remove(ri);
        max_val = max_val.max(v);
        rank += 1;
        let pv = cols[c][r].clone();
        for &cj in &live_cols {
            if cols[cj][r].is_zero() {
                continue;
            }
            let Ok(f) = cols[cj][r].checked_div(&pv) else { continue };
            for &rr in &live_rows {
                let t = &f * &cols[c][rr];
                cols[cj][rr] = &cols[cj][rr] - &t;
            }
            cols[cj][r] = Padic::zero(pv.prime(), pv.precision());
        }
    }
    (rank, max_val)
}

fn monomials(s: usize, n: usize) -> Vec<Vec<u8>> {
    if s == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=n).rev() {
        for mut rest in monomials(s - 1, n - first) {
            rest.insert(0, first as u8);
            out.push(rest);
        }
    }
    out
}

/// Degree-`n` monomials in `s` variables, in descending lexicographic order.
pub fn degree_monomials(s: usize, n: usize) -> Vec<Vec<u8>> {
    monomials(s, n)
}

/// Injectivity of `I(H)^n/I(H)^{n+1} ⊗ Q_p[Q] → I_Q(G)^n/I_Q(G)^{n+1} ⊗ Q_p`
/// for `H ⊆ Z_p^s` generated by `h_j = ∏ g_i^{A_ji}` with `A = p·U`, `U` the
/// upper unitriangular all-ones matrix: a finite-index subgroup that is not a
/// coordinate sublattice.
pub fn check_graded_injectivity(shape: &GroupShape, n: usize) -> Result<RankCertificate, GrpAlgError> {
    if n > shape.degree {
        return Err(GrpAlgError::BeyondTruncation(n, shape.degree));
    }
    let s = shape.s;
    let lattice: Vec<Vec<i64>> =
        (0..s).map(|j| (0..s).map(|i| if i >= j { shape.p as i64 } else { 0 }).collect()).collect();
    let one = GroupAlgebraElem::one(shape);
    let h_minus_one: Vec<GroupAlgebraElem> =
        lattice.iter().map(|row| &GroupAlgebraElem::group_element(shape, 0, row) - &one).collect();
    let target = degree_monomials(s, n);
    let order = shape.order();
    let mut columns = Vec::new();
    for beta in degree_monomials(s, n) {
        let mut prod = one.clone();
        for (j, &b) in beta.iter().enumerate() {
            prod = &prod * &h_minus_one[j].pow(b as u32);
        }
        let lead = prod.leading_term(n)?;
        for q in 0..order {
            let shifted = lead.translate(q);
            let mut col = Vec::with_capacity(order * target.len());
            for qq in 0..order {
                for alpha in &target {
                    col.push(shifted.coefficient(qq, alpha));
                }
            }
            columns.push(col);
        }
    }
    let rows = order * target.len();
    let expected = columns.len();
    let (rank, max_pivot_valuation) = padic_rank(&columns);
    if rank < expected {
        return Err(GrpAlgError::RankDeficient { rank, expected });
    }
    Ok(RankCertificate { rows, columns: expected, rank, max_pivot_valuation })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(divs: Vec<u32>, s: usize, d: usize) -> GroupShape {
        GroupShape::new(divs, s, d, 5, 20).unwrap()
    }

    #[test]
    fn mixed_radix_group() {
        let sh = shape(vec![2, 3], 0, 1);
        assert_eq!(sh.order(), 6);
        for i in 0..6 {
            assert_eq!(sh.index_of(&sh.components(i)), i);
            assert_eq!(sh.q_mul(i, sh.q_inv(i)), 0);
        }
        assert!(GroupShape::new(vec![1], 0, 1, 5, 20).is_err());
    }

    #[test]
    fn expansion_of_product_of_differences() {
        let sh = shape(vec![2, 2], 0, 2);
        let one = GroupAlgebraElem::one(&sh);
        let g = GroupAlgebraElem::group_element(&sh, 1, &[]);
        let h = GroupAlgebraElem::group_element(&sh, 2, &[]);
        let lhs = &(&g - &one) * &(&h - &one);
        let gh = GroupAlgebraElem::group_element(&sh, 3, &[]);
        let rhs = &(&(&gh - &g) - &h) + &one;
        assert!((&lhs - &rhs).is_zero());
        assert!((&(&lhs * &one) - &lhs).is_zero());
    }

    #[test]
    fn free_generator_squared() {
        let sh = shape(vec![], 2, 3);
        let one = GroupAlgebraElem::one(&sh);
        let t1 = &GroupAlgebraElem::group_element(&sh, 0, &[1, 0]) - &one;
        let sq = &t1 * &t1;
        let expected = GroupAlgebraElem::monomial(&sh, 0, &[2, 0], Padic::one(5, 20));
        assert!((&sq - &expected).is_zero());
    }

    #[test]
    fn involution_of_variable_is_geometric() {
        let sh = shape(vec![], 1, 4);
        let inv = GroupAlgebraElem::variable(&sh, 0).involution();
        for k in 1..=4u8 {
            let c = if k % 2 == 0 { 1 } else { -1 };
            assert_eq!(inv.coefficient(0, &[k]), Padic::from_i64(5, c, 20));
        }
        assert!((&GroupAlgebraElem::one(&sh).involution() - &GroupAlgebraElem::one(&sh)).is_zero());
    }

    #[test]
    fn augmentation_degrees() {
        let sh = shape(vec![2], 3, 4);
        assert_eq!(GroupAlgebraElem::one(&sh).rel_aug_degree(), 0);
        let c = Padic::one(5, 20);
        let x = GroupAlgebraElem::monomial(&sh, 0, &[1, 1, 0], c.clone())
            .try_add(&GroupAlgebraElem::monomial(&sh, 0, &[0, 0, 3], c))
            .unwrap();
        assert_eq!(x.rel_aug_degree(), 2);
        assert!(matches!(x.leading_term(3), Err(GrpAlgError::DegreeTooLow { wanted: 3, actual: 2 })));
    }

    #[test]
    fn truncation_is_flagged() {
        let sh = shape(vec![], 1, 2);
        let t = GroupAlgebraElem::variable(&sh, 0);
        assert!(!(&t * &t).is_truncated());
        assert!((&(&t * &t) * &t).is_truncated());
    }

    #[test]
    fn shape_mismatch() {
        let a = GroupAlgebraElem::one(&shape(vec![2], 1, 2));
        let b = GroupAlgebraElem::one(&shape(vec![3], 1, 2));
        assert_eq!(a.algebra_mul(&b).unwrap_err(), GrpAlgError::ShapeMismatch);
    }

    #[test]
    fn injectivity_trivial_case() {
        let cert = check_graded_injectivity(&shape(vec![], 1, 1), 1).unwrap();
        assert_eq!(cert.rank, 1);
    }
}
