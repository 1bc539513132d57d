//! Partial-Frobenius projectors, the determinant and norm maps on r-fold
//! tensors of local completions, plectic invariants and their Tate lift,
//! the derivative of reciprocity, and the identities tying them together.
//!
//! Local coordinates: a point `φ(u)` of the Tate curve over `E_℘` is
//! recorded by the completion of its preimage `u` modulo `q^{Z_p}`, as the
//! pair `(plus, minus) = (v_q·α − α_q·v, β)`. Frobenius on the Tate model is
//! `diag(1, −1)` in these coordinates; on the curve itself it is twisted by
//! the reduction sign `a_℘`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::grpalg::{GradedPiece, GroupAlgebraElem, GroupShape, GrpAlgError};
use crate::padic::{Padic, PadicError, QuadExt};
use crate::symalg::{collapse, mu, sqrt_ratio, DenseTensor, SymAlgError, SymTensor};
use crate::tate::{CurvePoint, TateCurve, TateError};
use crate::units::{norm_one_unit, CompletedUnit, UnitBasis};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlecticError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("character table determinant vanishes")]
    CharacterTableDegenerate,
    #[error("tensor is not in the image of the minus part")]
    NotInImage,
    #[error("signs are inconsistent: no group element satisfies the functional equation")]
    InconsistentSigns,
    #[error("{check} fails at {coefficient} (agreement {margin})")]
    IdentityFails { check: &'static str, coefficient: String, margin: i64 },
    #[error("point is trivial: unit lies in q^Z")]
    TrivialPoint,
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Tate(#[from] TateError),
    #[error(transparent)]
    GrpAlg(#[from] GrpAlgError),
    #[error(transparent)]
    SymAlg(#[from] SymAlgError),
}

/// Characters of `(Z/2)^t` in lexicographic order of their sign vectors,
/// evaluated on group elements in the same order.
pub fn character_table(t: u32) -> Vec<Vec<i64>> {
    let r = 1usize << t;
    (0..r).map(|a| (0..r).map(|g| if (a & g).count_ones() % 2 == 0 { 1 } else { -1 }).collect()).collect()
}

/// Rows are `r` distinct `±1` characters and `T·Tᵀ = r·Id`.
pub fn validate_character_table(table: &[Vec<i64>]) -> Result<(), PlecticError> {
    let r = table.len();
    if r == 0 || !r.is_power_of_two() || table.iter().any(|row| row.len() != r) {
        return Err(PlecticError::InvalidConfig("character table must be r×r with r a power of two".into()));
    }
    if table.iter().flatten().any(|&v| v != 1 && v != -1) {
        return Err(PlecticError::InvalidConfig("character values must be ±1".into()));
    }
    for (i, row) in table.iter().enumerate() {
        for g in 0..r {
            for h in 0..r {
                if row[g ^ h] != row[g] * row[h] {
                    return Err(PlecticError::InvalidConfig(format!("row {i} is not a character")));
                }
            }
        }
        for (j, other) in table.iter().enumerate() {
            let dot: i64 = row.iter().zip(other).map(|(a, b)| a * b).sum();
            let want = if i == j { r as i64 } else { 0 };
            if dot != want {
                return Err(PlecticError::InvalidConfig("character table rows are not orthogonal".into()));
            }
        }
    }
    Ok(())
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn exact_determinant(m: &[Vec<i64>]) -> BigInt {
    let n = m.len();
    let mut a: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        let Some(piv) = (k..n).find(|&i| !a[i][k].is_zero()) else { return BigInt::zero() };
        if piv != k {
            a.swap(piv, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// `C_𝔊 = det(η_i(τ_j))` for `τ_j` the `j`-th group element.
pub fn char_table_det(t: u32) -> BigInt {
    exact_determinant(&character_table(t))
}

/// `det(η_i(τ_j))` for arbitrary twists.
pub fn twisted_table_det(table: &[Vec<i64>], twists: &[usize]) -> BigInt {
    let m: Vec<Vec<i64>> = table.iter().map(|row| twists.iter().map(|&g| row[g]).collect()).collect();
    exact_determinant(&m)
}

/// Is `n/d` the square of a rational?
pub fn is_rational_square(num: &BigInt, den: &BigInt) -> bool {
    if num.is_zero() {
        return true;
    }
    if (num.is_negative()) != (den.is_negative()) {
        return false;
    }
    let g = num.gcd(den);
    let (n, d) = ((num / &g).abs(), (den / &g).abs());
    let sq = |x: &BigInt| {
        let s = x.sqrt();
        &s * &s == *x
    };
    sq(&n) && sq(&d)
}

/// Scenario-level data shared by every check.
#[derive(Clone, Debug)]
pub struct PlecticConfig {
    pub t: u32,
    pub a: i64,
    pub epsilon: i64,
    pub curve: TateCurve,
    pub shape: GroupShape,
    pub table: Vec<Vec<i64>>,
    pub twists: Vec<usize>,
    pub chi: Vec<i64>,
    pub xi: Vec<i64>,
}

impl PlecticConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        t: u32,
        epsilon: i64,
        curve: TateCurve,
        shape: GroupShape,
        table: Vec<Vec<i64>>,
        twists: Vec<usize>,
        chi: Vec<i64>,
        xi: Vec<i64>,
    ) -> Result<Self, PlecticError> {
        let r = 1usize << t;
        if epsilon != 1 && epsilon != -1 {
            return Err(PlecticError::InvalidConfig("global sign must be ±1".into()));
        }
        if table.len() != r {
            return Err(PlecticError::InvalidConfig(format!("character table needs {r} rows")));
        }
        validate_character_table(&table)?;
        if twists.len() != r || twists.iter().any(|&g| g >= r) {
            return Err(PlecticError::InvalidConfig(format!("need {r} twists in (Z/2)^{t}")));
        }
        if shape.free_rank() < r {
            return Err(PlecticError::InvalidConfig(format!("free rank {} below r = {r}", shape.free_rank())));
        }
        if shape.degree() < 2 * r {
            return Err(PlecticError::InvalidConfig(format!(
                "truncation degree {} below 2r = {}",
                shape.degree(),
                2 * r
            )));
        }
        for (name, values) in [("chi", &chi), ("xi", &xi)] {
            validate_group_character(&shape, values)
                .map_err(|e| PlecticError::InvalidConfig(format!("{name}: {e}")))?;
        }
        if shape.prime() != curve.prime() {
            return Err(PlecticError::InvalidConfig("group algebra and curve use different primes".into()));
        }
        let a = curve.reduction_sign();
        Ok(PlecticConfig { t, a, epsilon, curve, shape, table, twists, chi, xi })
    }

    pub fn r(&self) -> usize {
        1 << self.t
    }

    pub fn prime(&self) -> u32 {
        self.curve.prime()
    }

    pub fn precision(&self) -> i64 {
        self.curve.precision()
    }

    /// `ε_S = ∏ ε_𝔭` with `ε_𝔭 = −a_𝔭 = −a_℘`.
    pub fn epsilon_s(&self) -> i64 {
        (-self.a).pow(self.r() as u32)
    }

    pub fn table_det(&self) -> BigInt {
        twisted_table_det(&self.table, &self.twists)
    }
}

fn validate_group_character(shape: &GroupShape, values: &[i64]) -> Result<(), String> {
    let n = shape.order();
    if values.len() != n {
        return Err(format!("needs {n} values"));
    }
    if values.iter().any(|&v| v != 1 && v != -1) {
        return Err("only ±1-valued characters are supported".into());
    }
    for g in 0..n {
        for h in 0..n {
            if values[shape.q_mul(g, h)] != values[g] * values[h] {
                return Err("not multiplicative".into());
            }
        }
    }
    Ok(())
}

/// Local completions of units and points at `℘`.
#[derive(Clone, Debug)]
pub struct LocalPoints {
    basis: UnitBasis,
    curve: TateCurve,
    period_coords: CompletedUnit,
}

impl LocalPoints {
    pub fn new(curve: &TateCurve) -> Result<Self, PlecticError> {
        let basis = UnitBasis::new(curve.prime(), curve.precision())?;
        let period_coords = basis.complete(&QuadExt::from_base(curve.period().clone()))?;
        Ok(LocalPoints { basis, curve: curve.clone(), period_coords })
    }

    pub fn basis(&self) -> &UnitBasis {
        &self.basis
    }

    /// `φ(u)`, rejecting the identity.
    pub fn point(&self, u: &QuadExt) -> Result<CurvePoint, PlecticError> {
        let pt = self.curve.phi(u)?;
        if pt.is_infinity() {
            return Err(PlecticError::TrivialPoint);
        }
        Ok(pt)
    }

    /// `(plus, minus)` coordinates of `φ(u)` in `Â(E_℘)`.
    pub fn complete_point(&self, u: &QuadExt) -> Result<Vec<Padic>, PlecticError> {
        self.point(u)?;
        let c = self.basis.complete(u)?;
        let q = &self.period_coords;
        let plus = &(&q.val * &c.alpha) - &(&q.alpha * &c.val);
        Ok(vec![plus, c.beta])
    }

    /// Frobenius on `Â(E_℘)`: `a_℘ · diag(1, −1)`.
    pub fn sigma_matrix(&self) -> Vec<Vec<Padic>> {
        let p = self.curve.prime();
        let prec = self.curve.precision();
        let a = self.curve.reduction_sign();
        vec![
            vec![Padic::from_i64(p, a, prec), Padic::zero(p, prec)],
            vec![Padic::zero(p, prec), Padic::from_i64(p, -a, prec)],
        ]
    }

    /// Image of the generator `u₀` of `Ê_℘^−`.
    pub fn minus_generator_image(&self) -> Result<Vec<Padic>, PlecticError> {
        self.complete_point(&norm_one_unit(self.curve.prime(), self.curve.precision())?)
    }
}

/// `∏_𝔭 (1 ± a·σ_𝔭)` applied factor-wise, `sigma` the matrix of `σ_𝔭`.
pub fn projector(x: &DenseTensor, sigma: &[Vec<Padic>], a: i64, plus: bool) -> DenseTensor {
    let d = sigma.len();
    let s = if plus { a } else { -a };
    let factor: Vec<Vec<Padic>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let scaled = sigma[i][j].mul_int(s);
                    if i == j {
                        &scaled + &Padic::one(scaled.prime(), scaled.precision())
                    } else {
                        scaled
                    }
                })
                .collect()
        })
        .collect();
    x.apply_factorwise(&vec![factor; x.order()])
}

fn permutations(n: usize) -> Vec<(Vec<usize>, i64)> {
    if n == 0 {
        return vec![(vec![], 1)];
    }
    let mut out = vec![];
    for (perm, sign) in permutations(n - 1) {
        // insert n−1 at every position; moving it left past k entries flips k times
        for pos in 0..=perm.len() {
            let mut p = perm.clone();
            p.insert(pos, n - 1);
            let flips = (perm.len() - pos) as i64;
            out.push((p, if flips % 2 == 0 { sign } else { -sign }));
        }
    }
    out
}

/// `Σ_{π∈S_r} sgn(π) · M[π(1)][1] ⊗ … ⊗ M[π(r)][r]`, where `M[i][j]` is the
/// local image of the `i`-th point at the `j`-th place.
pub fn det_map(matrix: &[Vec<Vec<Padic>>]) -> DenseTensor {
    let r = matrix.len();
    let d = matrix[0][0].len();
    let p = matrix[0][0][0].prime();
    let prec = matrix[0][0][0].precision();
    let mut acc = DenseTensor::zero(vec![d; r], p, prec);
    for (perm, sign) in permutations(r) {
        let factors: Vec<Vec<Padic>> = (0..r).map(|j| matrix[perm[j]][j].clone()).collect();
        let term = DenseTensor::pure(&factors);
        acc = if sign > 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

/// `N_{S/℘}`: identify every factor with the module at `℘` and collapse.
pub fn norm_map(x: &DenseTensor) -> SymTensor {
    collapse(x)
}

/// An element of `Ê^−_{S,⊗} ⊗ Z_p[𝒢]`: in the pinned bases a coefficient
/// of `u₀ ⊗ … ⊗ u₀` for every group element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlecticInvariant {
    pub r: usize,
    pub coeffs: Vec<Padic>,
}

impl PlecticInvariant {
    /// `c · u₀^{⊗r} ⊗ [1]` in a group ring of the given order.
    pub fn pure(r: usize, c: Padic, order: usize) -> Self {
        let mut coeffs = vec![Padic::zero(c.prime(), c.precision()); order];
        coeffs[0] = c;
        PlecticInvariant { r, coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Padic::is_zero)
    }

    /// `Σ_g χ(g) c_g`.
    pub fn specialize(&self, chi: &[i64]) -> Padic {
        let p = self.coeffs[0].prime();
        let prec = self.coeffs[0].precision();
        self.coeffs.iter().zip(chi).fold(Padic::zero(p, prec), |acc, (c, &x)| &acc + &c.mul_int(x))
    }

    /// `Q^∨`: inversion on `Ê^−` (a sign per factor) and on `𝒢`.
    pub fn involution(&self, shape: &GroupShape) -> Self {
        let sign = if self.r.is_multiple_of(2) { 1 } else { -1 };
        let coeffs = (0..self.coeffs.len()).map(|g| self.coeffs[shape.q_inv(g)].mul_int(sign)).collect();
        PlecticInvariant { r: self.r, coeffs }
    }
}

/// `φ̂_S(c · u₀^{⊗r})`.
pub fn tate_image(local: &LocalPoints, r: usize, c: &Padic) -> Result<DenseTensor, PlecticError> {
    let g = local.minus_generator_image()?;
    Ok(DenseTensor::pure(&vec![g; r]).scale(c))
}

/// The unique `c` with `φ̂_S(c · u₀^{⊗r}) = x`.
pub fn lift_invariant(local: &LocalPoints, x: &DenseTensor) -> Result<Padic, PlecticError> {
    let g = local.minus_generator_image()?;
    if !g[0].is_zero() {
        return Err(PlecticError::NotInImage);
    }
    let r = x.order();
    let idx = vec![1; r];
    let coord = x.get(&idx).clone();
    for (flat, c) in x.coeffs().iter().enumerate() {
        if DenseTensor::unflatten(x.dims(), flat) != idx && !c.is_zero() {
            return Err(PlecticError::NotInImage);
        }
    }
    let scale = g[1].pow(r as u64);
    Ok(coord.checked_div(&scale)?)
}

/// `d rec_S`: `c_g · u₀^{⊗r} ⊗ [g] ↦ c_g · t₁⋯t_r ⊗ [g]` through `μ` and the
/// graded isomorphism, with `rec(u₀ at 𝔭_i) = g_i`.
pub fn drec(q: &PlecticInvariant, shape: &GroupShape) -> Result<GradedPiece, PlecticError> {
    let r = q.r;
    if shape.free_rank() < r || q.coeffs.len() != shape.order() {
        return Err(GrpAlgError::ShapeMismatch.into());
    }
    let mut out = GradedPiece::zero(shape, r);
    for (g, c) in q.coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let sym = mu(&DenseTensor::from_coeffs(vec![1; r], vec![c.clone()]));
        for (exps, coeff) in sym.terms() {
            let mut alpha = vec![0u8; shape.free_rank()];
            for (i, &e) in exps.iter().enumerate() {
                alpha[i] = e as u8;
            }
            out = out.add(&GradedPiece::monomial(shape, g, &alpha, coeff.clone()));
        }
    }
    Ok(out)
}

/// The homogeneous element of `Z_p⟦𝒢⟧` with the given graded piece.
pub fn lift_piece(piece: &GradedPiece) -> GroupAlgebraElem {
    let shape = piece.shape();
    piece.terms().fold(GroupAlgebraElem::zero(shape), |acc, ((g, alpha), c)| {
        &acc + &GroupAlgebraElem::monomial(shape, *g, alpha, c.clone())
    })
}

/// `2^{−r} · d rec_S(Q)^∨`, the forced leading term of any `ℒ` with
/// `2^r ∂^r(ℒ) = d rec_S(Q^∨)`. The involution is the one of `Z_p⟦𝒢⟧`.
pub fn gz_leading_term(q: &PlecticInvariant, shape: &GroupShape) -> Result<GradedPiece, PlecticError> {
    let r = q.r;
    let twisted = lift_piece(&drec(q, shape)?).involution().leading_term(r)?;
    let half = Padic::from_ratio(shape.prime(), 1, 1 << r, shape.precision())?;
    Ok(twisted.scale(&half))
}

/// Outcome of the sign check.
#[derive(Clone, Debug)]
pub struct SignVerdict {
    /// A group element realizing the functional equation.
    pub g: usize,
    pub epsilon: i64,
    pub epsilon_s: i64,
    pub margin: i64,
}

fn piece_margin(a: &GradedPiece, b: &GradedPiece, cap: i64) -> i64 {
    a.agreement(b).min(cap)
}

/// Builds `ℒ` from `Q`, imposes `ℒ^∨ = ε·ε_S·[g]·ℒ` at leading order for
/// some `g`, and re-derives `Q^{χ^{-1}} = χ(g)·ε·ε_S·(−1)^r·Q^χ`.
pub fn sign_check(config: &PlecticConfig, q: &PlecticInvariant) -> Result<SignVerdict, PlecticError> {
    if q.is_zero() {
        return Err(PlecticError::InvalidConfig("sign check needs a nonzero invariant".into()));
    }
    let shape = &config.shape;
    let prec = config.precision();
    let r = q.r;
    let big_l = lift_piece(&gz_leading_term(q, shape)?);
    let big_l_dual = big_l.involution();
    let square = &big_l * &big_l_dual;
    let lead = big_l.leading_term(r)?;
    let lead_dual = big_l_dual.leading_term(r)?;
    let es = config.epsilon * config.epsilon_s();
    let es_p = Padic::from_i64(config.prime(), es, prec);
    let sign_r = if r.is_multiple_of(2) { 1 } else { -1 };
    for g in 0..shape.order() {
        let rhs = lead.translate(g).scale(&es_p);
        let margin = piece_margin(&lead_dual, &rhs, prec);
        if margin < prec {
            continue;
        }
        // ℒ·ℒ^∨ = ε ε_S [g] ℒ² at leading order
        let sq_lead = square.leading_term(2 * r)?;
        let want = lead.mul(&lead).translate(g).scale(&es_p);
        if piece_margin(&sq_lead, &want, prec) < prec {
            continue;
        }
        let q_chi = q.specialize(&config.chi);
        let inv_chi: Vec<i64> = (0..shape.order()).map(|h| config.chi[shape.q_inv(h)]).collect();
        let q_chi_inv = q.specialize(&inv_chi);
        let relation = q_chi.mul_int(config.chi[g] * es * sign_r);
        if q_chi_inv.agreement(&relation) < prec {
            continue;
        }
        return Ok(SignVerdict { g, epsilon: config.epsilon, epsilon_s: config.epsilon_s(), margin });
    }
    Err(PlecticError::InconsistentSigns)
}

/// Heegner-point data per character: units in `E_℘^×`, comparison
/// constants `k_η` and the factorization constant `C_χ`.
#[derive(Clone, Debug)]
pub struct SyntheticPointFamily {
    pub units: Vec<QuadExt>,
    pub k: Vec<Padic>,
    pub c_chi: Padic,
    /// `C_χ` as an exact rational, when known.
    pub c_chi_rational: Option<(BigInt, BigInt)>,
}

/// Outcome of the factorization check.
#[derive(Clone, Debug)]
pub struct FactorizationVerdict {
    pub sqrt_c: Padic,
    pub square_margin: i64,
    pub root_margin: i64,
    pub norm_nonzero: bool,
    pub all_factors_nonzero: bool,
    pub c_is_rational_square: Option<bool>,
}

impl FactorizationVerdict {
    pub fn margin(&self) -> i64 {
        self.square_margin.min(self.root_margin)
    }
}

/// `Q_η = lift(pr^−(φ̂(u_η))) / k_η`.
pub fn character_invariants(
    local: &LocalPoints,
    family: &SyntheticPointFamily,
    a: i64,
) -> Result<Vec<Padic>, PlecticError> {
    let sigma = local.sigma_matrix();
    family
        .units
        .iter()
        .zip(&family.k)
        .map(|(u, k)| {
            let image = DenseTensor::pure(&[local.complete_point(u)?]);
            let projected = projector(&image, &sigma, a, false);
            Ok(lift_invariant(local, &projected)?.checked_div(k)?)
        })
        .collect()
}

fn first_divergence(x: &SymTensor, y: &SymTensor) -> String {
    x.terms()
        .map(|(k, _)| k.clone())
        .chain(y.terms().map(|(k, _)| k.clone()))
        .find(|k| {
            let a = x.coefficient(k);
            let b = y.coefficient(k);
            match (a, b) {
                (Some(a), Some(b)) => !(a - b).is_zero(),
                (Some(a), None) | (None, Some(a)) => !a.is_zero(),
                (None, None) => false,
            }
        })
        .map(|k| format!("{k:?}"))
        .unwrap_or_else(|| "precision".into())
}

/// `N(Q_S)² = C_χ·∏Q_η²` in `Sym^{2r}` and `N(Q_S) = √C_χ·∏Q_η` in `Sym^r`.
pub fn factorization_check(
    config: &PlecticConfig,
    local: &LocalPoints,
    family: &SyntheticPointFamily,
    q_s: &PlecticInvariant,
    floor: i64,
) -> Result<FactorizationVerdict, PlecticError> {
    let r = config.r();
    let prec = config.precision();
    if family.units.len() != r || family.k.len() != r {
        return Err(PlecticError::InvalidConfig(format!("need {r} units and constants")));
    }
    let q_eta = character_invariants(local, family, config.a)?;
    let q_chi = q_s.specialize(&config.chi);
    let norm = norm_map(&DenseTensor::from_coeffs(vec![1; r], vec![q_chi]));
    let mut prod = SymTensor::monomial(&[0], Padic::one(config.prime(), prec));
    for q in &q_eta {
        prod = prod.product(&SymTensor::monomial(&[1], q.clone()))?;
    }
    let lhs = norm.product(&norm)?;
    let rhs = prod.product(&prod)?.scale(&family.c_chi);
    let square_margin = lhs.agreement(&rhs).min(prec);
    if square_margin < floor {
        return Err(PlecticError::IdentityFails {
            check: "squared factorization",
            coefficient: first_divergence(&lhs, &rhs),
            margin: square_margin,
        });
    }
    let norm_nonzero = !norm.is_zero();
    let all_factors_nonzero = q_eta.iter().all(|q| !q.is_zero());
    if norm_nonzero != all_factors_nonzero {
        return Err(PlecticError::IdentityFails {
            check: "nonvanishing equivalence",
            coefficient: "norm".into(),
            margin: 0,
        });
    }
    let c_is_rational_square = family.c_chi_rational.as_ref().map(|(n, d)| is_rational_square(n, d));
    if !norm_nonzero {
        return Ok(FactorizationVerdict {
            sqrt_c: Padic::zero(config.prime(), prec),
            square_margin,
            root_margin: prec,
            norm_nonzero,
            all_factors_nonzero,
            c_is_rational_square,
        });
    }
    let root = sqrt_ratio(&norm, &prod).map_err(|_| PlecticError::IdentityFails {
        check: "square root",
        coefficient: first_divergence(&norm, &prod),
        margin: 0,
    })?;
    let root_margin = root.margin.min(root.square.agreement(&family.c_chi)).min(prec);
    if root_margin < floor {
        return Err(PlecticError::IdentityFails { check: "square root", coefficient: "C".into(), margin: root_margin });
    }
    Ok(FactorizationVerdict {
        sqrt_c: root.root,
        square_margin,
        root_margin,
        norm_nonzero,
        all_factors_nonzero,
        c_is_rational_square,
    })
}

/// `Q_S = √C_χ · ∏ Q_η · u₀^{⊗r} ⊗ [1]`: the invariant that the
/// factorization predicts.
pub fn forward_invariant(
    local: &LocalPoints,
    family: &SyntheticPointFamily,
    a: i64,
    sqrt_c: &Padic,
    order: usize,
) -> Result<PlecticInvariant, PlecticError> {
    let q_eta = character_invariants(local, family, a)?;
    let c = q_eta.iter().fold(sqrt_c.clone(), |acc, q| &acc * q);
    Ok(PlecticInvariant::pure(q_eta.len(), c, order))
}

/// Outcome of the algebraicity check.
#[derive(Clone, Debug)]
pub struct AlgebraicityVerdict {
    pub table_det: BigInt,
    pub det_margin: i64,
    pub projected_margin: i64,
}

impl AlgebraicityVerdict {
    pub fn margin(&self) -> i64 {
        self.det_margin.min(self.projected_margin)
    }
}

/// A plectic point with `pr^−(P) = φ̂_S(Q_S)`; the plus part is a fixed
/// filler that `pr^−` must kill.
pub fn plectic_point(local: &LocalPoints, r: usize, q_coord: &Padic) -> Result<DenseTensor, PlecticError> {
    let p = q_coord.prime();
    let prec = q_coord.precision();
    let minus = tate_image(local, r, q_coord)?;
    // pr^− is 2^r times the projection onto the minus line
    let scaled = minus.scale(&Padic::from_ratio(p, 1, 1 << r, prec)?);
    let mut filler = DenseTensor::zero(vec![2; r], p, prec);
    for flat in 0..filler.coeffs().len() {
        let idx = DenseTensor::unflatten(&vec![2; r], flat);
        if idx.contains(&0) {
            filler.set(&idx, Padic::from_i64(p, 1 + flat as i64, prec));
        }
    }
    Ok(scaled.add(&filler))
}

/// The determinant pipeline: `N(det w̃) = C_𝔊·∏ι(P_η)` and, after scaling by
/// `√C_χ / (C_𝔊·∏k_η)`, `N(pr^−(det w)) = N(pr^−(P_{A,S}))`.
pub fn algebraicity_check(
    config: &PlecticConfig,
    local: &LocalPoints,
    family: &SyntheticPointFamily,
    q_s: &PlecticInvariant,
    sqrt_c: &Padic,
    floor: i64,
) -> Result<AlgebraicityVerdict, PlecticError> {
    let r = config.r();
    let p = config.prime();
    let prec = config.precision();
    let table_det = config.table_det();
    if table_det.is_zero() {
        return Err(PlecticError::CharacterTableDegenerate);
    }
    let images: Vec<Vec<Padic>> = family.units.iter().map(|u| local.complete_point(u)).collect::<Result<_, _>>()?;
    let matrix: Vec<Vec<Vec<Padic>>> = (0..r)
        .map(|i| {
            (0..r)
                .map(|j| {
                    let s = config.table[i][config.twists[j]];
                    images[i].iter().map(|c| c.mul_int(s)).collect()
                })
                .collect()
        })
        .collect();
    let det = det_map(&matrix);
    let det_norm = norm_map(&det);
    let c_g = Padic::from_bigint(p, &table_det, prec);
    let mut prod = SymTensor::monomial(&[0, 0], c_g.clone());
    for img in &images {
        let mut lin = SymTensor::monomial(&[1, 0], img[0].clone());
        lin = lin.add(&SymTensor::monomial(&[0, 1], img[1].clone()))?;
        prod = prod.product(&lin)?;
    }
    let det_margin = det_norm.agreement(&prod).min(prec);
    if det_margin < floor {
        return Err(PlecticError::IdentityFails {
            check: "determinant norm",
            coefficient: first_divergence(&det_norm, &prod),
            margin: det_margin,
        });
    }
    let k_prod = family.k.iter().fold(Padic::one(p, prec), |acc, k| &acc * k);
    let scale = sqrt_c.checked_div(&(&c_g * &k_prod))?;
    let w = det.scale(&scale);
    let sigma = local.sigma_matrix();
    let lhs = norm_map(&projector(&w, &sigma, config.a, false));
    let point = plectic_point(local, r, &q_s.specialize(&config.chi))?;
    let rhs = norm_map(&projector(&point, &sigma, config.a, false));
    let projected_margin = lhs.agreement(&rhs).min(prec);
    if projected_margin < floor {
        return Err(PlecticError::IdentityFails {
            check: "projected determinant",
            coefficient: first_divergence(&lhs, &rhs),
            margin: projected_margin,
        });
    }
    Ok(AlgebraicityVerdict { table_det, det_margin, projected_margin })
}
