//! Tensor and symmetric powers of free modules of finite rank, with
//! `Sym(M) ≅ R[x₁,…,x_ℓ]` in the declared basis.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::padic::Padic;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymAlgError {
    #[error("tensors are not proportional")]
    NotProportional,
    #[error("denominator tensor is zero")]
    ZeroDenominator,
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("variable count mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("free modules need rank at least 1")]
    EmptyModule,
}

/// A free module with a named basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeModule {
    names: Vec<String>,
}

impl FreeModule {
    pub fn new(names: Vec<String>) -> Result<Self, SymAlgError> {
        if names.is_empty() {
            return Err(SymAlgError::EmptyModule);
        }
        Ok(FreeModule { names })
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// `M₁ ⊕ … ⊕ M_n`, basis names prefixed by the summand index.
    pub fn direct_sum(parts: &[FreeModule]) -> FreeModule {
        let names =
            parts.iter().enumerate().flat_map(|(i, m)| m.names.iter().map(move |n| format!("{n}_{}", i + 1))).collect();
        FreeModule { names }
    }
}

/// An element of `M^{⊗n}` (or `M₁ ⊗ … ⊗ M_n`), stored densely in row-major
/// order over the product basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    coeffs: Vec<Padic>,
}

impl DenseTensor {
    pub fn zero(dims: Vec<usize>, p: u32, prec: i64) -> Self {
        let len = dims.iter().product();
        DenseTensor { dims, coeffs: vec![Padic::zero(p, prec); len] }
    }

    pub fn from_coeffs(dims: Vec<usize>, coeffs: Vec<Padic>) -> Self {
        assert_eq!(dims.iter().product::<usize>(), coeffs.len());
        DenseTensor { dims, coeffs }
    }

    /// `v₁ ⊗ … ⊗ v_n`.
    pub fn pure(factors: &[Vec<Padic>]) -> Self {
        let dims: Vec<usize> = factors.iter().map(Vec::len).collect();
        let mut coeffs = vec![];
        let total: usize = dims.iter().product();
        for flat in 0..total {
            let idx = Self::unflatten(&dims, flat);
            let mut c = factors[0][idx[0]].clone();
            for (k, &i) in idx.iter().enumerate().skip(1) {
                c = &c * &factors[k][i];
            }
            coeffs.push(c);
        }
        DenseTensor { dims, coeffs }
    }

    pub fn unflatten(dims: &[usize], mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; dims.len()];
        for k in (0..dims.len()).rev() {
            idx[k] = flat % dims[k];
            flat /= dims[k];
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.dims).fold(0, |acc, (&i, &d)| acc * d + i)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn coeffs(&self) -> &[Padic] {
        &self.coeffs
    }

    pub fn get(&self, idx: &[usize]) -> &Padic {
        &self.coeffs[self.flatten(idx)]
    }

    pub fn set(&mut self, idx: &[usize], c: Padic) {
        let f = self.flatten(idx);
        self.coeffs[f] = c;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Padic::is_zero)
    }

    pub fn scale(&self, c: &Padic) -> Self {
        DenseTensor { dims: self.dims.clone(), coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dims, other.dims);
        DenseTensor {
            dims: self.dims.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dims, other.dims);
        DenseTensor {
            dims: self.dims.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        }
    }

    /// Applies `maps[k]` (a square matrix, `row = image coordinate`) to the
    /// `k`-th tensor factor.
    pub fn apply_factorwise(&self, maps: &[Vec<Vec<Padic>>]) -> Self {
        let mut cur = self.clone();
        for (k, m) in maps.iter().enumerate() {
            let mut next = cur.clone();
            for flat in 0..cur.coeffs.len() {
                let mut idx = Self::unflatten(&cur.dims, flat);
                let target = idx[k];
                let mut acc = Padic::zero(cur.coeffs[flat].prime(), cur.coeffs[flat].precision());
                for (j, entry) in m[target].iter().enumerate() {
                    if entry.is_zero() {
                        continue;
                    }
                    idx[k] = j;
                    acc = &acc + &(entry * cur.get(&idx));
                }
                next.coeffs[flat] = acc;
            }
            cur = next;
        }
        cur
    }

    /// Minimum over coordinates of agreeing digits.
    pub fn agreement(&self, other: &Self) -> i64 {
        self.sub(other).coeffs.iter().map(Padic::val_bound).min().unwrap_or(i64::MAX)
    }
}

/// A homogeneous element of `Sym^n` of a free module of rank `ℓ`, as a
/// polynomial in `ℓ` variables.
#[derive(Clone, Debug)]
pub struct SymTensor {
    nvars: usize,
    degree: usize,
    terms: BTreeMap<Vec<u16>, Padic>,
}

fn add_term(map: &mut BTreeMap<Vec<u16>, Padic>, key: Vec<u16>, c: Padic) {
    if let Some(v) = map.get_mut(&key) {
        *v = &*v + &c;
    } else {
        map.insert(key, c);
    }
}

impl SymTensor {
    pub fn zero(nvars: usize, degree: usize) -> Self {
        SymTensor { nvars, degree, terms: BTreeMap::new() }
    }

    /// `c · ∏ x_i^{e_i}`.
    pub fn monomial(exps: &[u16], c: Padic) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(exps.to_vec(), c);
        SymTensor { nvars: exps.len(), degree: exps.iter().map(|&e| e as usize).sum(), terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coefficient(&self, exps: &[u16]) -> Option<&Padic> {
        self.terms.get(exps)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u16>, &Padic)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(Padic::is_zero)
    }

    /// Leading nonzero term under graded lex with `x₁ > x₂ > …`.
    pub fn leading(&self) -> Option<(&Vec<u16>, &Padic)> {
        self.terms.iter().rev().find(|(_, c)| !c.is_zero())
    }

    pub fn scale(&self, c: &Padic) -> Self {
        SymTensor {
            nvars: self.nvars,
            degree: self.degree,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    fn check(&self, other: &Self) -> Result<(), SymAlgError> {
        if self.nvars != other.nvars {
            return Err(SymAlgError::RankMismatch(self.nvars, other.nvars));
        }
        if self.degree != other.degree && !self.terms.is_empty() && !other.terms.is_empty() {
            return Err(SymAlgError::DegreeMismatch(self.degree, other.degree));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SymAlgError> {
        self.check(other)?;
        let mut out = self.clone();
        if out.terms.is_empty() {
            out.degree = other.degree;
        }
        for (k, v) in &other.terms {
            add_term(&mut out.terms, k.clone(), v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SymAlgError> {
        self.check(other)?;
        let mut out = self.clone();
        if out.terms.is_empty() {
            out.degree = other.degree;
        }
        for (k, v) in &other.terms {
            add_term(&mut out.terms, k.clone(), -v);
        }
        Ok(out)
    }

    /// Product in `Sym(M)`.
    pub fn product(&self, other: &Self) -> Result<Self, SymAlgError> {
        if self.nvars != other.nvars {
            return Err(SymAlgError::RankMismatch(self.nvars, other.nvars));
        }
        let mut out = SymTensor::zero(self.nvars, self.degree + other.degree);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let k: Vec<u16> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                add_term(&mut out.terms, k, ca * cb);
            }
        }
        Ok(out)
    }

    /// `Sym^n(f)` for `f: R^ℓ → R^m` given by `matrix[j][i] = f(e_i)_j`.
    pub fn map_linear(&self, matrix: &[Vec<Padic>]) -> Self {
        let m = matrix.len();
        let mut out = SymTensor::zero(m, self.degree);
        for (exps, c) in &self.terms {
            let mut acc = SymTensor::monomial(&vec![0; m], c.clone());
            for (i, &e) in exps.iter().enumerate() {
                let mut image = SymTensor::zero(m, 1);
                for (j, row) in matrix.iter().enumerate() {
                    if !row[i].is_zero() {
                        let mut k = vec![0u16; m];
                        k[j] = 1;
                        add_term(&mut image.terms, k, row[i].clone());
                    }
                }
                for _ in 0..e {
                    acc = acc.product(&image).expect("same variable count");
                }
            }
            for (k, v) in acc.terms {
                add_term(&mut out.terms, k, v);
            }
        }
        out
    }

    /// Minimum over coefficients of agreeing digits.
    pub fn agreement(&self, other: &Self) -> i64 {
        match self.sub(other) {
            Ok(d) => d.terms.values().map(Padic::val_bound).min().unwrap_or(i64::MAX),
            Err(_) => 0,
        }
    }
}

/// `μ: M₁ ⊗ … ⊗ M_n → Sym^n(M₁ ⊕ … ⊕ M_n)`, `m₁ ⊗ … ⊗ m_n ↦ m₁⋯m_n`.
pub fn mu(t: &DenseTensor) -> SymTensor {
    let offsets: Vec<usize> = t
        .dims
        .iter()
        .scan(0, |acc, &d| {
            let o = *acc;
            *acc += d;
            Some(o)
        })
        .collect();
    let nvars: usize = t.dims.iter().sum();
    let mut out = SymTensor::zero(nvars, t.order());
    for (flat, c) in t.coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let idx = DenseTensor::unflatten(&t.dims, flat);
        let mut k = vec![0u16; nvars];
        for (f, &i) in idx.iter().enumerate() {
            k[offsets[f] + i] += 1;
        }
        add_term(&mut out.terms, k, c.clone());
    }
    out
}

/// `[−]: M^{⊗n} → Sym^n(M)`, `m₁ ⊗ … ⊗ m_n ↦ m₁⋯m_n`.
pub fn collapse(t: &DenseTensor) -> SymTensor {
    let l = t.dims[0];
    assert!(t.dims.iter().all(|&d| d == l), "collapse needs equal factors");
    let mut out = SymTensor::zero(l, t.order());
    for (flat, c) in t.coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mut k = vec![0u16; l];
        for i in DenseTensor::unflatten(&t.dims, flat) {
            k[i] += 1;
        }
        add_term(&mut out.terms, k, c.clone());
    }
    out
}

/// The fold map `M^{⊕n} → M`, `(m₁,…,m_n) ↦ Σ m_i`, as a matrix.
pub fn fold_matrix(rank: usize, copies: usize, p: u32, prec: i64) -> Vec<Vec<Padic>> {
    (0..rank)
        .map(|j| {
            (0..rank * copies).map(|i| if i % rank == j { Padic::one(p, prec) } else { Padic::zero(p, prec) }).collect()
        })
        .collect()
}

/// Result of [`sqrt_ratio`].
#[derive(Clone, Debug)]
pub struct SqrtRatio {
    /// `√C` with `x = √C·y`.
    pub root: Padic,
    /// `C`.
    pub square: Padic,
    /// Agreement of `x` with `√C·y`, in digits.
    pub margin: i64,
}

/// `√C` with `x = √C · y`, read off the coefficients at the pivot monomial
/// and certified on every coefficient, together with `x² = C·y²`. The pivot
/// is the monomial where `y` has least valuation, the graded-lex largest
/// among ties, so no digits are lost to the division.
pub fn sqrt_ratio(x: &SymTensor, y: &SymTensor) -> Result<SqrtRatio, SymAlgError> {
    x.check(y)?;
    let (lead, cy) = y
        .terms
        .iter()
        .rev()
        .filter(|(_, c)| !c.is_zero())
        .min_by_key(|(_, c)| c.val_bound())
        .ok_or(SymAlgError::ZeroDenominator)?;
    let cx = x.coefficient(lead).cloned().unwrap_or_else(|| Padic::zero(cy.prime(), cy.precision()));
    let root = cx.checked_div(cy).map_err(|_| SymAlgError::ZeroDenominator)?;
    let diff = x.sub(&y.scale(&root))?;
    if !diff.is_zero() {
        return Err(SymAlgError::NotProportional);
    }
    let square = &root * &root;
    let x2 = x.product(x)?;
    let y2 = y.product(y)?.scale(&square);
    if !x2.sub(&y2)?.is_zero() {
        return Err(SymAlgError::NotProportional);
    }
    let margin = x.agreement(&y.scale(&root));
    Ok(SqrtRatio { root, square, margin })
}
