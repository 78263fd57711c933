//! Sparse multivariate polynomials with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::scalar::{self, Scalar};

/// Polynomial in `nvars` variables. Terms map exponent vectors (length
/// `nvars`) to non-zero coefficients; the empty map is zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Scalar>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Scalar::one())
    }

    pub fn constant(nvars: usize, c: Scalar) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The coordinate function `x_{i+1}`.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(
            i < nvars,
            "variable index {i} out of range for {nvars} variables"
        );
        let mut exps = vec![0; nvars];
        exps[i] = 1;
        Self::monomial(exps, Scalar::one())
    }

    pub fn monomial(exps: Vec<u32>, c: Scalar) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(exps, c);
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, Scalar)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    /// Adds `c * x^exps` in place, pruning a cancelled term.
    pub fn add_term(&mut self, exps: Vec<u32>, c: Scalar) {
        assert_eq!(exps.len(), self.nvars, "exponent vector length");
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Scalar)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exps: &[u32]) -> Scalar {
        self.terms.get(exps).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// `Some(c)` when the polynomial is the constant `c` (including zero).
    pub fn as_constant(&self) -> Option<Scalar> {
        match self.terms.len() {
            0 => Some(Scalar::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                e.iter().all(|&k| k == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn partial(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[i] -= 1;
            out.add_term(d, c * scalar::int(e[i] as i64));
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Evaluates at `point`. Panics when the point has the wrong length.
    pub fn eval(&self, point: &[Scalar]) -> Scalar {
        assert_eq!(point.len(), self.nvars, "point length");
        let mut total = Scalar::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    t *= x;
                }
            }
            total += t;
        }
        total
    }

    /// Substitutes `subs[i]` (polynomials in `target_nvars` variables) for
    /// the `i`-th variable.
    pub fn compose(&self, subs: &[Poly], target_nvars: usize) -> Self {
        assert_eq!(subs.len(), self.nvars, "substitution count");
        assert!(
            subs.iter().all(|s| s.nvars == target_nvars),
            "substitution arity"
        );
        // powers[i][k] = subs[i]^k, built lazily up to the largest exponent used
        let mut max_exp = vec![0u32; self.nvars];
        for e in self.terms.keys() {
            for (m, &k) in max_exp.iter_mut().zip(e) {
                *m = (*m).max(k);
            }
        }
        let powers: Vec<Vec<Poly>> = subs
            .iter()
            .zip(&max_exp)
            .map(|(s, &m)| {
                let mut v = vec![Poly::one(target_nvars)];
                for k in 1..=m as usize {
                    let next = &v[k - 1] * s;
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Self::zero(target_nvars);
        for (e, c) in &self.terms {
            let mut t = Poly::constant(target_nvars, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = &t * &powers[i][k as usize];
                }
            }
            out = &out + &t;
        }
        out
    }

    /// The terms of total degree exactly `s`.
    pub fn homogeneous_part(&self, s: u32) -> Self {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.iter().sum::<u32>() == s)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Re-embeds into `nvars` variables by padding exponent vectors with
    /// zeros. Panics when shrinking would drop a used variable.
    pub fn with_nvars(&self, nvars: usize) -> Self {
        let mut out = Self::zero(nvars);
        for (e, c) in &self.terms {
            assert!(
                e[nvars.min(e.len())..].iter().all(|&k| k == 0),
                "variable in use"
            );
            let mut f = e.clone();
            f.resize(nvars, 0);
            out.add_term(f, c.clone());
        }
        out
    }

    /// Terms in rendering order: ascending total degree, then by variable
    /// index (`x1` before `x2`).
    fn sorted_terms(&self) -> Vec<(&Vec<u32>, &Scalar)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            da.cmp(&db).then_with(|| b.cmp(a))
        });
        v
    }
}

fn render_vars(exps: &[u32]) -> String {
    let mut parts = Vec::new();
    for (i, &k) in exps.iter().enumerate() {
        match k {
            0 => {}
            1 => parts.push(format!("x{}", i + 1)),
            _ => parts.push(format!("x{}^{}", i + 1, k)),
        }
    }
    parts.join("*")
}

/// Renders `c * x^exps` as a signed factor string, e.g. `-x1`, `(3/2)*x1*x2^2`.
pub(crate) fn render_term(exps: &[u32], c: &Scalar) -> String {
    let vars = render_vars(exps);
    if vars.is_empty() {
        scalar::render(c)
    } else if c.is_one() {
        vars
    } else if (-c).is_one() {
        format!("-{vars}")
    } else {
        format!("{}*{}", scalar::render_factor(c), vars)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.sorted_terms().into_iter().enumerate() {
            if k == 0 {
                write!(f, "{}", render_term(e, c))?;
            } else if c.is_negative() {
                write!(f, " - {}", render_term(e, &-c))?;
            } else {
                write!(f, " + {}", render_term(e, c))?;
            }
        }
        Ok(())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars, "polynomial arity");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars, "polynomial arity");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c);
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars, "polynomial arity");
        let mut out = Poly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}
