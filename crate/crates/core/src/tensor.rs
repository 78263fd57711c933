//! Covariant tensors with polynomial coefficients, the (unnormalised)
//! skew-symmetrisation operator and the flat covariant derivative of `R^n`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Sub};

use crate::error::{Error, Result};
use crate::form::DiffForm;
use crate::perm::{permutations, sort_with_sign};
use crate::poly::Poly;
use crate::scalar::Scalar;

/// Covariant tensor of `order` on `R^dim`. Index tuples are unrestricted.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CovTensor {
    dim: usize,
    order: usize,
    terms: BTreeMap<Vec<usize>, Poly>,
}

impl CovTensor {
    pub fn zero(dim: usize, order: usize) -> Self {
        CovTensor {
            dim,
            order,
            terms: BTreeMap::new(),
        }
    }

    /// Order-0 tensor.
    pub fn scalar(f: Poly) -> Self {
        let mut t = Self::zero(f.nvars(), 0);
        t.add_term(Vec::new(), f);
        t
    }

    /// `f dx_{i_1} ⊗ ... ⊗ dx_{i_r}`.
    pub fn term(f: Poly, indices: &[usize]) -> Result<Self> {
        let dim = f.nvars();
        if let Some(&bad) = indices.iter().find(|&&i| i >= dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad + 1,
            });
        }
        let mut t = Self::zero(dim, indices.len());
        t.add_term(indices.to_vec(), f);
        Ok(t)
    }

    fn add_term(&mut self, idx: Vec<usize>, f: Poly) {
        if f.is_zero() {
            return;
        }
        match self.terms.entry(idx) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(f);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + &f;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Poly)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, idx: &[usize]) -> Poly {
        self.terms
            .get(idx)
            .cloned()
            .unwrap_or_else(|| Poly::zero(self.dim))
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut out = Self::zero(self.dim, self.order);
        for (i, f) in &self.terms {
            out.add_term(i.clone(), f.scale(c));
        }
        out
    }

    fn check_same_space(&self, other: &CovTensor) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if self.order != other.order {
            return Err(Error::GradeMismatch {
                expected: self.order,
                found: other.order,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &CovTensor) -> Result<Self> {
        self.check_same_space(other)?;
        let mut out = self.clone();
        for (i, f) in &other.terms {
            out.add_term(i.clone(), f.clone());
        }
        Ok(out)
    }

    pub fn tensor_product(&self, other: &CovTensor) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut out = Self::zero(self.dim, self.order + other.order);
        for (i, f) in &self.terms {
            for (j, g) in &other.terms {
                let mut idx = i.clone();
                idx.extend_from_slice(j);
                out.add_term(idx, f * g);
            }
        }
        Ok(out)
    }

    /// `h(t) = sum_σ sgn(σ) σ·t`, with no `1/r!` normalisation.
    pub fn skew(&self) -> Self {
        let perms = permutations(self.order);
        let mut out = Self::zero(self.dim, self.order);
        for (idx, f) in &self.terms {
            let neg = -f;
            for (p, sign) in &perms {
                let permuted: Vec<usize> = p.iter().map(|&k| idx[k]).collect();
                out.add_term(permuted, if *sign > 0 { f.clone() } else { neg.clone() });
            }
        }
        out
    }

    pub fn is_antisymmetric(&self) -> bool {
        for (idx, f) in &self.terms {
            let mut sorted = idx.clone();
            match sort_with_sign(&mut sorted) {
                None => return false,
                Some(_) => {
                    // every transposition of adjacent slots must flip the sign
                    for k in 1..idx.len() {
                        let mut swapped = idx.clone();
                        swapped.swap(k - 1, k);
                        if self.coefficient(&swapped) != -f {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// The inclusion `Λ^q ⊂ ⊗^q`: `f dx_I ↦ f sum_σ sgn(σ) dx_{I∘σ}`.
    pub fn embed_form(a: &DiffForm) -> Self {
        let perms = permutations(a.grade());
        let mut out = Self::zero(a.dim(), a.grade());
        for (idx, f) in a.terms() {
            let neg = -f;
            for (p, sign) in &perms {
                let permuted: Vec<usize> = p.iter().map(|&k| idx[k]).collect();
                out.add_term(permuted, if *sign > 0 { f.clone() } else { neg.clone() });
            }
        }
        out
    }

    /// Inverse of [`CovTensor::embed_form`]: reads the coefficient of every
    /// increasing tuple of an antisymmetric tensor.
    pub fn project_form(&self) -> Result<DiffForm> {
        if !self.is_antisymmetric() {
            return Err(Error::NotAntisymmetric);
        }
        DiffForm::from_terms(
            self.dim,
            self.order,
            self.terms
                .iter()
                .filter(|(idx, _)| idx.windows(2).all(|w| w[0] < w[1]))
                .map(|(idx, f)| (idx.clone(), f.clone())),
        )
    }

    /// `∇^s t` for the flat connection: each application prepends a slot `j`
    /// holding `∂/∂x_j` of the coefficients.
    pub fn nabla(&self, s: usize) -> Self {
        let mut cur = self.clone();
        for _ in 0..s {
            let mut next = Self::zero(self.dim, cur.order + 1);
            for (idx, f) in &cur.terms {
                for j in 0..self.dim {
                    let mut key = Vec::with_capacity(idx.len() + 1);
                    key.push(j);
                    key.extend_from_slice(idx);
                    next.add_term(key, f.partial(j));
                }
            }
            cur = next;
        }
        cur
    }

    pub fn nabla_form(a: &DiffForm, s: usize) -> Self {
        Self::embed_form(a).nabla(s)
    }

    pub fn eval_at(&self, point: &[Scalar]) -> Result<Self> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: point.len(),
            });
        }
        let mut out = Self::zero(self.dim, self.order);
        for (idx, f) in &self.terms {
            out.add_term(idx.clone(), Poly::constant(self.dim, f.eval(point)));
        }
        Ok(out)
    }
}

impl fmt::Display for CovTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(idx, c)| {
                let idx: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
                format!("({}) ↦ {}", idx.join(","), c)
            })
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

impl Add for &CovTensor {
    type Output = CovTensor;
    fn add(self, rhs: &CovTensor) -> CovTensor {
        self.try_add(rhs).expect("tensors in the same space")
    }
}

impl Sub for &CovTensor {
    type Output = CovTensor;
    fn sub(self, rhs: &CovTensor) -> CovTensor {
        self.try_add(&rhs.scale(&crate::scalar::int(-1)))
            .expect("tensors in the same space")
    }
}
