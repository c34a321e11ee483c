//! Homogeneous polynomials over a fixed monomial basis.
//!
//! A degree-`n` homogeneous polynomial in `D` variables is stored as its
//! coefficient vector `c` against the Veronese map `nu_n`, so `p(x) = c . nu_n(x)`.
//! Monomials are ordered lexicographically descending on their exponent
//! tuples: for `D = 3, n = 2` that is `x1^2, x1x2, x1x3, x2^2, x2x3, x3^2`.

use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{FsascError, Result};

/// Number of degree-`n` monomials in `D` variables, `C(n + D - 1, n)`.
pub fn monomial_count(dim: usize, degree: usize) -> Result<usize> {
    if dim == 0 || degree == 0 {
        return Err(FsascError::contract(format!(
            "monomial_count needs D >= 1 and n >= 1 (got D = {dim}, n = {degree})"
        )));
    }
    binomial_multiset(dim, degree)
}

// C(dim - 1 + k, k) built incrementally; every partial product is itself a
// binomial coefficient so the division is exact.
fn binomial_multiset(dim: usize, degree: usize) -> Result<usize> {
    let mut acc: u128 = 1;
    for k in 1..=degree as u128 {
        acc = acc
            .checked_mul(dim as u128 - 1 + k)
            .ok_or_else(|| overflow(dim, degree))?
            / k;
    }
    usize::try_from(acc).map_err(|_| overflow(dim, degree))
}

fn overflow(dim: usize, degree: usize) -> FsascError {
    FsascError::Capacity(format!(
        "number of degree-{degree} monomials in {dim} variables exceeds usize"
    ))
}

/// One nonzero term of a partial derivative: `d/dx_var` maps monomial `source`
/// of degree `n` onto monomial `target` of degree `n - 1` with factor `mult`.
#[derive(Debug, Clone, Copy)]
struct DerivTerm {
    source: u32,
    var: u32,
    target: u32,
    mult: f64,
}

/// The ordered list of exponent tuples of all degree-`n` monomials in `D` variables.
#[derive(Debug, Clone)]
pub struct MonomialBasis {
    dim: usize,
    degree: usize,
    exponents: Vec<u32>,
    lower_exponents: Vec<u32>,
    derivative: Vec<DerivTerm>,
}

impl PartialEq for MonomialBasis {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.degree == other.degree
    }
}

impl MonomialBasis {
    pub fn new(dim: usize, degree: usize) -> Result<Self> {
        let size = monomial_count(dim, degree)?;
        let exponents = enumerate_exponents(dim, degree);
        debug_assert_eq!(exponents.len(), size * dim);
        let lower_exponents = enumerate_exponents(dim, degree - 1);

        let lower_index = |alpha: &[u32]| -> u32 {
            // Position of `alpha` in the lexicographically descending list.
            rank_descending(alpha, degree as u32 - 1) as u32
        };

        let mut derivative = Vec::new();
        let mut shifted = vec![0u32; dim];
        for (k, alpha) in exponents.chunks_exact(dim).enumerate() {
            for (i, &a) in alpha.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                shifted.copy_from_slice(alpha);
                shifted[i] -= 1;
                derivative.push(DerivTerm {
                    source: k as u32,
                    var: i as u32,
                    target: lower_index(&shifted),
                    mult: f64::from(a),
                });
            }
        }

        Ok(Self {
            dim,
            degree,
            exponents,
            lower_exponents,
            derivative,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `M_n(D)`.
    pub fn len(&self) -> usize {
        self.exponents.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponent(&self, k: usize) -> &[u32] {
        &self.exponents[k * self.dim..(k + 1) * self.dim]
    }

    pub fn exponents(&self) -> impl Iterator<Item = &[u32]> {
        self.exponents.chunks_exact(self.dim)
    }

    /// Index of a given exponent tuple, if it has the basis degree.
    pub fn index_of(&self, alpha: &[u32]) -> Option<usize> {
        if alpha.len() != self.dim || alpha.iter().sum::<u32>() as usize != self.degree {
            return None;
        }
        Some(rank_descending(alpha, self.degree as u32))
    }

    /// Veronese embedding `nu_n(x)`.
    pub fn embed(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut out = vec![0.0; self.len()];
        self.embed_into(x, &mut out);
        Ok(out)
    }

    /// Writes `nu_n(x)` into `out`; both lengths are assumed checked.
    pub(crate) fn embed_into(&self, x: &[f64], out: &mut [f64]) {
        eval_monomials(x, self.degree, &self.exponents, out);
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(FsascError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// Exponent tuples of total degree `degree`, lexicographically descending.
fn enumerate_exponents(dim: usize, degree: usize) -> Vec<u32> {
    fn rec(prefix: &mut Vec<u32>, remaining: u32, slots: usize, out: &mut Vec<u32>) {
        if slots == 1 {
            prefix.push(remaining);
            out.extend_from_slice(prefix);
            prefix.pop();
            return;
        }
        for a in (0..=remaining).rev() {
            prefix.push(a);
            rec(prefix, remaining - a, slots - 1, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(dim), degree as u32, dim, &mut out);
    out
}

// Number of tuples preceding `alpha` in the descending order. Tuples whose
// first coordinate exceeds alpha[0] come first; recurse on the tail.
fn rank_descending(alpha: &[u32], degree: u32) -> usize {
    let mut rank = 0usize;
    let mut remaining = degree;
    let mut slots = alpha.len();
    for &a in &alpha[..alpha.len() - 1] {
        // tuples with a larger leading entry b in (a, remaining]
        for b in (a + 1)..=remaining {
            rank += count_tuples(slots - 1, remaining - b);
        }
        remaining -= a;
        slots -= 1;
    }
    rank
}

// Number of exponent tuples with `slots` entries summing to `total`.
fn count_tuples(slots: usize, total: u32) -> usize {
    if slots == 0 {
        return usize::from(total == 0);
    }
    if total == 0 {
        return 1;
    }
    binomial_multiset(slots, total as usize).expect("small binomial")
}

fn eval_monomials(x: &[f64], degree: usize, exponents: &[u32], out: &mut [f64]) {
    let dim = x.len();
    // powers[i * (degree + 1) + e] = x_i^e
    let stride = degree + 1;
    let mut powers = vec![1.0; dim * stride];
    for (i, &xi) in x.iter().enumerate() {
        for e in 1..stride {
            powers[i * stride + e] = powers[i * stride + e - 1] * xi;
        }
    }
    for (slot, alpha) in out.iter_mut().zip(exponents.chunks_exact(dim)) {
        let mut v = 1.0;
        for (i, &a) in alpha.iter().enumerate() {
            if a != 0 {
                v *= powers[i * stride + a as usize];
            }
        }
        *slot = v;
    }
}

/// A homogeneous polynomial `p(x) = c . nu_n(x)`.
#[derive(Debug, Clone)]
pub struct HomoPoly {
    basis: Arc<MonomialBasis>,
    coeffs: Vec<f64>,
}

impl HomoPoly {
    pub fn new(basis: Arc<MonomialBasis>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(FsascError::DimensionMismatch {
                expected: basis.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self { basis, coeffs })
    }

    /// Convenience constructor that builds its own basis.
    pub fn from_coeffs(dim: usize, degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        Self::new(Arc::new(MonomialBasis::new(dim, degree)?), coeffs)
    }

    pub fn basis(&self) -> &Arc<MonomialBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.basis.degree
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.dim
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let v = self.basis.embed(x)?;
        Ok(crate::cloud::dot(&self.coeffs, &v))
    }

    /// Exact gradient from the coefficient representation.
    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.basis.check_dim(x)?;
        let mut out = vec![0.0; self.basis.dim];
        self.grad_into(x, &mut out);
        Ok(out)
    }

    pub(crate) fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        let b = &*self.basis;
        let lower_len = b.lower_exponents.len() / b.dim;
        let mut lower = vec![0.0; lower_len];
        eval_monomials(x, b.degree - 1, &b.lower_exponents, &mut lower);
        out.iter_mut().for_each(|g| *g = 0.0);
        for t in &b.derivative {
            let c = self.coeffs[t.source as usize];
            if c != 0.0 {
                out[t.var as usize] += c * t.mult * lower[t.target as usize];
            }
        }
    }

    /// Unit-normalized gradient and its original norm. Returns `None` when the
    /// gradient norm is at most `tol`.
    pub fn unit_grad(&self, x: &[f64], tol: f64) -> Result<Option<(Vec<f64>, f64)>> {
        let mut g = self.grad(x)?;
        let norm = crate::cloud::norm(&g);
        if norm <= tol {
            return Ok(None);
        }
        g.iter_mut().for_each(|v| *v /= norm);
        Ok(Some((g, norm)))
    }
}

impl PartialEq for HomoPoly {
    fn eq(&self, other: &Self) -> bool {
        self.basis == other.basis && self.coeffs == other.coeffs
    }
}

#[derive(Serialize, Deserialize)]
struct HomoPolyRepr {
    #[serde(rename = "D")]
    dim: usize,
    n: usize,
    coeffs: Vec<f64>,
}

impl Serialize for HomoPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        HomoPolyRepr {
            dim: self.basis.dim,
            n: self.basis.degree,
            coeffs: self.coeffs.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HomoPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = HomoPolyRepr::deserialize(d)?;
        HomoPoly::from_coeffs(r.dim, r.n, r.coeffs).map_err(serde::de::Error::custom)
    }
}

/// `nu_n(x)` for a freshly built basis.
pub fn veronese_embed(x: &[f64], basis: &MonomialBasis) -> Result<Vec<f64>> {
    basis.embed(x)
}

pub fn eval_poly(p: &HomoPoly, x: &[f64]) -> Result<f64> {
    p.eval(x)
}

pub fn grad_poly(p: &HomoPoly, x: &[f64]) -> Result<Vec<f64>> {
    p.grad(x)
}
