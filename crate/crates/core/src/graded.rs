//! The graded anti-commutative polynomial algebra `R{u_1, ..., u_k}` with
//! `u_i u_j = (-1)^{deg u_i deg u_j} u_j u_i`, and its evaluation on forms.

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::form::DiffForm;
use crate::scalar::{self, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GradedVar {
    pub name: String,
    pub degree: u32,
}

impl GradedVar {
    pub fn new(name: impl Into<String>, degree: u32) -> Self {
        GradedVar {
            name: name.into(),
            degree,
        }
    }

    pub fn is_odd(&self) -> bool {
        self.degree % 2 == 1
    }
}

/// An ordered list of graded variables; the order is the canonical factor
/// order of every monomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GradedAlgebra {
    vars: Arc<[GradedVar]>,
}

impl GradedAlgebra {
    pub fn new(vars: Vec<GradedVar>) -> Result<Self> {
        if let Some(v) = vars.iter().find(|v| v.degree == 0) {
            return Err(Error::Invalid(format!("variable {} has degree 0", v.name)));
        }
        Ok(GradedAlgebra { vars: vars.into() })
    }

    pub fn vars(&self) -> &[GradedVar] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn one(&self) -> GradedMono {
        GradedMono(vec![0; self.len()])
    }

    /// Total degree `sum e_i deg(v_i)`.
    pub fn degree(&self, mono: &GradedMono) -> usize {
        mono.0
            .iter()
            .zip(self.vars.iter())
            .map(|(&e, v)| e as usize * v.degree as usize)
            .sum()
    }

    /// Parses `u1^2*v1` (or `1`) into a sign and a normalised monomial.
    pub fn parse_monomial(&self, text: &str) -> Result<(i8, Option<GradedMono>)> {
        let text = text.trim();
        if text == "1" {
            return Ok((1, Some(self.one())));
        }
        let mut factors = Vec::new();
        for part in text.split('*') {
            let part = part.trim();
            let (name, exp) = match part.split_once('^') {
                Some((n, e)) => {
                    let e: u32 = e
                        .trim()
                        .parse()
                        .map_err(|_| Error::Invalid(format!("bad exponent in {part:?}")))?;
                    (n.trim(), e)
                }
                None => (part, 1),
            };
            let i = self
                .index_of(name)
                .ok_or_else(|| Error::Invalid(format!("unknown variable {name:?}")))?;
            factors.push((i, exp));
        }
        Ok(mono_normalize(self, &factors))
    }
}

/// Exponent vector aligned with a [`GradedAlgebra`]'s variable list.
///
/// Ordered so that iteration is descending lexicographic in the exponents
/// (`u1*u2` before `v1` before `v2`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GradedMono(pub Vec<u32>);

impl GradedMono {
    pub fn exponents(&self) -> &[u32] {
        &self.0
    }
}

impl Ord for GradedMono {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.cmp(&self.0)
    }
}

impl PartialOrd for GradedMono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Brings a product of powers into canonical variable order.
///
/// Returns the accumulated sign and the monomial, or sign 0 and `None` when
/// an odd-degree variable occurs more than once.
pub fn mono_normalize(alg: &GradedAlgebra, factors: &[(usize, u32)]) -> (i8, Option<GradedMono>) {
    let mut seq: Vec<usize> = Vec::new();
    for &(i, e) in factors {
        assert!(i < alg.len(), "variable index out of range");
        seq.extend(std::iter::repeat_n(i, e as usize));
    }
    let odd: Vec<bool> = alg.vars.iter().map(GradedVar::is_odd).collect();
    let mut sign = 1i8;
    // bubble sort, flipping the sign on every odd-odd transposition
    for end in (1..seq.len()).rev() {
        for j in 0..end {
            if seq[j] > seq[j + 1] {
                if odd[seq[j]] && odd[seq[j + 1]] {
                    sign = -sign;
                }
                seq.swap(j, j + 1);
            }
        }
    }
    let mut exps = vec![0u32; alg.len()];
    for i in seq {
        exps[i] += 1;
    }
    if exps.iter().zip(&odd).any(|(&e, &o)| o && e >= 2) {
        return (0, None);
    }
    (sign, Some(GradedMono(exps)))
}

fn expand(m: &GradedMono) -> impl Iterator<Item = (usize, u32)> + '_ {
    m.0.iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| (i, e))
}

/// Element of a graded anti-commutative algebra with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GradedPoly {
    alg: GradedAlgebra,
    terms: BTreeMap<GradedMono, Scalar>,
}

impl GradedPoly {
    pub fn zero(alg: &GradedAlgebra) -> Self {
        GradedPoly {
            alg: alg.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(alg: &GradedAlgebra) -> Self {
        Self::monomial(alg, alg.one(), Scalar::one())
    }

    /// `c * mono`; odd squares are rejected by construction.
    pub fn monomial(alg: &GradedAlgebra, mono: GradedMono, c: Scalar) -> Self {
        let mut p = Self::zero(alg);
        p.add_term(mono, c);
        p
    }

    /// The single variable with index `i`.
    pub fn var(alg: &GradedAlgebra, i: usize) -> Self {
        let mut e = vec![0; alg.len()];
        e[i] = 1;
        Self::monomial(alg, GradedMono(e), Scalar::one())
    }

    pub fn add_term(&mut self, mono: GradedMono, c: Scalar) {
        assert_eq!(mono.0.len(), self.alg.len(), "monomial arity");
        if c.is_zero() {
            return;
        }
        let (sign, norm) = mono_normalize(&self.alg, &expand(&mono).collect::<Vec<_>>());
        let Some(norm) = norm else { return };
        let c = if sign < 0 { -c } else { c };
        let entry = self.terms.entry(norm).or_insert_with(Scalar::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn algebra(&self) -> &GradedAlgebra {
        &self.alg
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GradedMono, &Scalar)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, mono: &GradedMono) -> Scalar {
        self.terms.get(mono).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some(d)` when every term has degree `d`; `None` for zero or mixed.
    pub fn homogeneous_degree(&self) -> Option<usize> {
        let mut degs = self.terms.keys().map(|m| self.alg.degree(m));
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    fn check_alg(&self, other: &GradedPoly) -> Result<()> {
        if self.alg != other.alg {
            return Err(Error::VariableMismatch);
        }
        Ok(())
    }

    pub fn gp_add(&self, other: &GradedPoly) -> Result<Self> {
        self.check_alg(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn gp_scale(&self, c: &Scalar) -> Self {
        let mut out = Self::zero(&self.alg);
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    pub fn gp_mul(&self, other: &GradedPoly) -> Result<Self> {
        self.check_alg(other)?;
        let mut out = Self::zero(&self.alg);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let factors: Vec<(usize, u32)> = expand(ma).chain(expand(mb)).collect();
                let (sign, mono) = mono_normalize(&self.alg, &factors);
                if let Some(mono) = mono {
                    let c = ca * cb;
                    out.add_term(mono, if sign < 0 { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    fn check_assignment(&self, dim: usize, forms: &[DiffForm]) -> Result<()> {
        if forms.len() != self.alg.len() {
            return Err(Error::Invalid(format!(
                "{} forms assigned to {} variables",
                forms.len(),
                self.alg.len()
            )));
        }
        for (v, f) in self.alg.vars.iter().zip(forms) {
            if f.grade() != v.degree as usize {
                return Err(Error::GradeMismatch {
                    expected: v.degree as usize,
                    found: f.grade(),
                });
            }
            if f.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: f.dim(),
                });
            }
        }
        Ok(())
    }

    fn eval_mono(
        &self,
        dim: usize,
        mono: &GradedMono,
        powers: &mut BTreeMap<(usize, u32), DiffForm>,
        forms: &[DiffForm],
    ) -> Result<DiffForm> {
        let mut acc = DiffForm::constant(dim, Scalar::one());
        for (i, e) in expand(mono) {
            let power = match powers.entry((i, e)) {
                Entry::Occupied(o) => o.into_mut(),
                Entry::Vacant(v) => {
                    let mut p = DiffForm::constant(dim, Scalar::one());
                    for _ in 0..e {
                        p = p.wedge(&forms[i])?;
                    }
                    v.insert(p)
                }
            };
            acc = acc.wedge(power)?;
        }
        Ok(acc)
    }

    /// Substitutes `forms[i]` for the `i`-th variable, products becoming
    /// wedge products. Every term must have degree `degree`.
    pub fn gp_eval(&self, dim: usize, forms: &[DiffForm], degree: usize) -> Result<DiffForm> {
        self.check_assignment(dim, forms)?;
        if self.terms.keys().any(|m| self.alg.degree(m) != degree) {
            return Err(Error::NotHomogeneous(degree));
        }
        let mut powers = BTreeMap::new();
        let mut out = DiffForm::zero(dim, degree);
        for (m, c) in &self.terms {
            let v = self.eval_mono(dim, m, &mut powers, forms)?;
            out = out.try_add(&v.scale(c))?;
        }
        Ok(out)
    }

    /// Evaluation of a possibly inhomogeneous element, slice by slice.
    pub fn gp_eval_graded(
        &self,
        dim: usize,
        forms: &[DiffForm],
    ) -> Result<BTreeMap<usize, DiffForm>> {
        self.check_assignment(dim, forms)?;
        let mut powers = BTreeMap::new();
        let mut out: BTreeMap<usize, DiffForm> = BTreeMap::new();
        for (m, c) in &self.terms {
            let d = self.alg.degree(m);
            let v = self.eval_mono(dim, m, &mut powers, forms)?.scale(c);
            let slot = out.entry(d).or_insert_with(|| DiffForm::zero(dim, d));
            *slot = slot.try_add(&v)?;
        }
        Ok(out)
    }
}

/// Renders a monomial as `u1^2*v1`, or `1` for the empty monomial.
pub fn render_mono(alg: &GradedAlgebra, mono: &GradedMono) -> String {
    let parts: Vec<String> = expand(mono)
        .map(|(i, e)| {
            let name = &alg.vars[i].name;
            if e == 1 {
                name.clone()
            } else {
                format!("{name}^{e}")
            }
        })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

fn render_scaled(alg: &GradedAlgebra, mono: &GradedMono, c: &Scalar) -> String {
    let m = render_mono(alg, mono);
    if m == "1" {
        scalar::render(c)
    } else if c.is_one() {
        m
    } else if (-c).is_one() {
        format!("-{m}")
    } else {
        format!("{}*{}", scalar::render_factor(c), m)
    }
}

impl fmt::Display for GradedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k == 0 {
                write!(f, "{}", render_scaled(&self.alg, m, c))?;
            } else if c.is_negative() {
                write!(f, " - {}", render_scaled(&self.alg, m, &-c))?;
            } else {
                write!(f, " + {}", render_scaled(&self.alg, m, c))?;
            }
        }
        Ok(())
    }
}
