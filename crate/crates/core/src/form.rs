//! Differential forms on `R^n` with polynomial coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::perm::sort_with_sign;
use crate::poly::{render_term, Poly};
use crate::scalar::{self, Scalar};
use crate::tensor::CovTensor;

/// A `grade`-form on `R^dim`, stored on strictly increasing index tuples.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DiffForm {
    dim: usize,
    grade: usize,
    terms: BTreeMap<Vec<usize>, Poly>,
}

impl DiffForm {
    pub fn zero(dim: usize, grade: usize) -> Self {
        DiffForm {
            dim,
            grade,
            terms: BTreeMap::new(),
        }
    }

    /// The 0-form given by a function.
    pub fn function(f: Poly) -> Self {
        let mut out = Self::zero(f.nvars(), 0);
        out.add_term(Vec::new(), f);
        out
    }

    pub fn constant(dim: usize, c: Scalar) -> Self {
        Self::function(Poly::constant(dim, c))
    }

    /// `f dx_{i_1} ^ ... ^ dx_{i_q}` for an arbitrary index order; repeated
    /// indices give zero.
    pub fn term(f: Poly, indices: &[usize]) -> Result<Self> {
        let dim = f.nvars();
        if let Some(&bad) = indices.iter().find(|&&i| i >= dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad + 1,
            });
        }
        let mut out = Self::zero(dim, indices.len());
        let mut idx = indices.to_vec();
        if let Some(sign) = sort_with_sign(&mut idx) {
            let f = if sign < 0 { -&f } else { f };
            out.add_term(idx, f);
        }
        Ok(out)
    }

    /// `dx_{i+1}` on `R^dim`. Panics when `i >= dim`.
    pub fn dx(dim: usize, i: usize) -> Self {
        Self::term(Poly::one(dim), &[i]).expect("coordinate index in range")
    }

    /// `dx_1 ^ ... ^ dx_dim`.
    pub fn volume(dim: usize) -> Self {
        let idx: Vec<usize> = (0..dim).collect();
        Self::term(Poly::one(dim), &idx).unwrap()
    }

    pub fn from_terms(
        dim: usize,
        grade: usize,
        terms: impl IntoIterator<Item = (Vec<usize>, Poly)>,
    ) -> Result<Self> {
        let mut out = Self::zero(dim, grade);
        for (idx, f) in terms {
            if idx.len() != grade {
                return Err(Error::GradeMismatch {
                    expected: grade,
                    found: idx.len(),
                });
            }
            if f.nvars() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: f.nvars(),
                });
            }
            out = &out + &Self::term(f, &idx)?;
        }
        Ok(out)
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

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Poly)> {
        self.terms.iter()
    }

    /// Coefficient on an increasing index tuple.
    pub fn coefficient(&self, idx: &[usize]) -> Poly {
        self.terms
            .get(idx)
            .cloned()
            .unwrap_or_else(|| Poly::zero(self.dim))
    }

    /// If the form is `c * dx_1 ^ ... ^ dx_{grade}` with constant `c`,
    /// returns `c`.
    pub fn leading_volume_multiple(&self) -> Option<Scalar> {
        let lead: Vec<usize> = (0..self.grade).collect();
        match self.terms.len() {
            0 => Some(Scalar::zero()),
            1 => self.terms.get(&lead).and_then(|p| p.as_constant()),
            _ => None,
        }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut out = Self::zero(self.dim, self.grade);
        for (idx, f) in &self.terms {
            out.add_term(idx.clone(), f.scale(c));
        }
        out
    }

    /// Multiplication by a function.
    pub fn mul_fn(&self, g: &Poly) -> Self {
        assert_eq!(g.nvars(), self.dim, "function arity");
        let mut out = Self::zero(self.dim, self.grade);
        for (idx, f) in &self.terms {
            out.add_term(idx.clone(), f * g);
        }
        out
    }

    fn check_same_space(&self, other: &DiffForm) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if self.grade != other.grade {
            return Err(Error::GradeMismatch {
                expected: self.grade,
                found: other.grade,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &DiffForm) -> Result<Self> {
        self.check_same_space(other)?;
        let mut out = self.clone();
        for (idx, f) in &other.terms {
            out.add_term(idx.clone(), f.clone());
        }
        Ok(out)
    }

    /// Exact `sum_i coeffs[i] * forms[i]`.
    pub fn linear_combine(coeffs: &[Scalar], forms: &[DiffForm]) -> Result<Self> {
        if coeffs.len() != forms.len() {
            return Err(Error::Invalid(format!(
                "{} coefficients for {} forms",
                coeffs.len(),
                forms.len()
            )));
        }
        let Some(first) = forms.first() else {
            return Err(Error::Invalid(
                "empty linear combination has no ambient space".into(),
            ));
        };
        let mut out = Self::zero(first.dim, first.grade);
        for (c, f) in coeffs.iter().zip(forms) {
            out = out.try_add(&f.scale(c))?;
        }
        Ok(out)
    }

    pub fn wedge(&self, other: &DiffForm) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let grade = self.grade + other.grade;
        let mut out = Self::zero(self.dim, grade);
        if grade > self.dim {
            return Ok(out);
        }
        let mut idx = Vec::with_capacity(grade);
        for (i, f) in &self.terms {
            for (j, g) in &other.terms {
                idx.clear();
                idx.extend_from_slice(i);
                idx.extend_from_slice(j);
                if let Some(sign) = sort_with_sign(&mut idx) {
                    let prod = f * g;
                    out.add_term(idx.clone(), if sign < 0 { -&prod } else { prod });
                }
            }
        }
        Ok(out)
    }

    /// Exterior derivative.
    pub fn ext_d(&self) -> Self {
        let mut out = Self::zero(self.dim, self.grade + 1);
        for (idx, f) in &self.terms {
            for j in 0..self.dim {
                if idx.contains(&j) {
                    continue;
                }
                let df = f.partial(j);
                if df.is_zero() {
                    continue;
                }
                // dx_j ^ dx_I: move dx_j past the indices smaller than j
                let pos = idx.iter().filter(|&&i| i < j).count();
                let mut key = idx.clone();
                key.insert(pos, j);
                out.add_term(key, if pos % 2 == 1 { -&df } else { df });
            }
        }
        out
    }

    /// `tau^* self`, a form on the source of `tau`.
    pub fn pullback(&self, tau: &SmoothMap) -> Result<Self> {
        if tau.target_dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: tau.target_dim,
            });
        }
        let m = tau.source_dim;
        let dtau: Vec<DiffForm> = tau
            .components
            .iter()
            .map(|c| DiffForm::function(c.clone()).ext_d())
            .collect();
        let mut out = Self::zero(m, self.grade);
        if self.grade > m {
            return Ok(out);
        }
        for (idx, f) in &self.terms {
            let fc = f.compose(&tau.components, m);
            if fc.is_zero() {
                continue;
            }
            let mut acc = DiffForm::function(fc);
            for &i in idx {
                acc = acc.wedge(&dtau[i])?;
            }
            out = out.try_add(&acc)?;
        }
        Ok(out)
    }

    /// Evaluates all coefficients at `point`, returning the corresponding
    /// antisymmetric covariant tensor with constant entries.
    pub fn eval_at(&self, point: &[Scalar]) -> Result<CovTensor> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: point.len(),
            });
        }
        let mut pointwise = Self::zero(self.dim, self.grade);
        for (idx, f) in &self.terms {
            pointwise.add_term(idx.clone(), Poly::constant(self.dim, f.eval(point)));
        }
        Ok(CovTensor::embed_form(&pointwise))
    }

    /// The homogeneous Taylor components `(w^0, ..., w^r)` at the origin.
    pub fn taylor_components(&self, r: u32) -> Vec<DiffForm> {
        (0..=r)
            .map(|s| {
                let mut out = Self::zero(self.dim, self.grade);
                for (idx, f) in &self.terms {
                    out.add_term(idx.clone(), f.homogeneous_part(s));
                }
                out
            })
            .collect()
    }
}

fn render_basis(idx: &[usize]) -> String {
    idx.iter()
        .map(|i| format!("dx{}", i + 1))
        .collect::<Vec<_>>()
        .join("^")
}

/// Returns `(negative, text)` for a coefficient multiplying a basis element.
fn render_coefficient(f: &Poly) -> (bool, String) {
    if f.len() == 1 {
        let (e, c) = f.terms().next().unwrap();
        let neg = c.is_negative();
        let c = if neg { -c } else { c.clone() };
        let text = if e.iter().all(|&k| k == 0) {
            if c.is_one() {
                String::new()
            } else {
                scalar::render_factor(&c)
            }
        } else {
            render_term(e, &c)
        };
        (neg, text)
    } else {
        (false, format!("({f})"))
    }
}

impl fmt::Display for DiffForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        if self.grade == 0 {
            return write!(f, "{}", self.terms.values().next().unwrap());
        }
        for (k, (idx, coef)) in self.terms.iter().enumerate() {
            let (neg, text) = render_coefficient(coef);
            let body = if text.is_empty() {
                render_basis(idx)
            } else {
                format!("{} {}", text, render_basis(idx))
            };
            match (k, neg) {
                (0, false) => write!(f, "{body}")?,
                (0, true) => write!(f, "-{body}")?,
                (_, false) => write!(f, " + {body}")?,
                (_, true) => write!(f, " - {body}")?,
            }
        }
        Ok(())
    }
}

impl Add for &DiffForm {
    type Output = DiffForm;
    fn add(self, rhs: &DiffForm) -> DiffForm {
        self.try_add(rhs).expect("forms in the same space")
    }
}

impl Sub for &DiffForm {
    type Output = DiffForm;
    fn sub(self, rhs: &DiffForm) -> DiffForm {
        self.try_add(&-rhs).expect("forms in the same space")
    }
}

impl Neg for &DiffForm {
    type Output = DiffForm;
    fn neg(self) -> DiffForm {
        DiffForm {
            dim: self.dim,
            grade: self.grade,
            terms: self.terms.iter().map(|(i, f)| (i.clone(), -f)).collect(),
        }
    }
}

/// A polynomial map `R^source_dim -> R^target_dim`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmoothMap {
    source_dim: usize,
    target_dim: usize,
    components: Vec<Poly>,
}

impl SmoothMap {
    pub fn new(source_dim: usize, components: Vec<Poly>) -> Result<Self> {
        if let Some(bad) = components.iter().find(|c| c.nvars() != source_dim) {
            return Err(Error::DimensionMismatch {
                expected: source_dim,
                found: bad.nvars(),
            });
        }
        Ok(SmoothMap {
            source_dim,
            target_dim: components.len(),
            components,
        })
    }

    pub fn identity(n: usize) -> Self {
        SmoothMap {
            source_dim: n,
            target_dim: n,
            components: (0..n).map(|i| Poly::var(n, i)).collect(),
        }
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &SmoothMap) -> Result<SmoothMap> {
        if inner.target_dim != self.source_dim {
            return Err(Error::DimensionMismatch {
                expected: self.source_dim,
                found: inner.target_dim,
            });
        }
        let components = self
            .components
            .iter()
            .map(|c| c.compose(&inner.components, inner.source_dim))
            .collect();
        Ok(SmoothMap {
            source_dim: inner.source_dim,
            target_dim: self.target_dim,
            components,
        })
    }

    pub fn eval(&self, point: &[Scalar]) -> Result<Vec<Scalar>> {
        if point.len() != self.source_dim {
            return Err(Error::DimensionMismatch {
                expected: self.source_dim,
                found: point.len(),
            });
        }
        Ok(self.components.iter().map(|c| c.eval(point)).collect())
    }

    /// Jacobian entries `d tau_i / d y_j`, row `i`, column `j`.
    pub fn jacobian(&self) -> Vec<Vec<Poly>> {
        self.components
            .iter()
            .map(|c| (0..self.source_dim).map(|j| c.partial(j)).collect())
            .collect()
    }
}

impl fmt::Display for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let comps: Vec<String> = self.components.iter().map(|c| c.to_string()).collect();
        write!(
            f,
            "R^{} -> R^{}: ({})",
            self.source_dim,
            self.target_dim,
            comps.join(", ")
        )
    }
}
