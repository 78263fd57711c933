//! Matrix-Lie-algebra-valued forms pulled back along a global section of a
//! trivial principal bundle: curvature, gauge normalisation at a point, and
//! Chern-Weil forms `T(Θ ^ ... ^ Θ)` for invariant polynomials `T`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::form::DiffForm;
use crate::linalg;
use crate::perm::permutations;
use crate::poly::Poly;
use crate::sampler;
use crate::scalar::{self, Scalar};

/// Square matrix with exact entries, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ScalarMatrix {
    size: usize,
    data: Vec<Scalar>,
}

impl ScalarMatrix {
    pub fn zero(size: usize) -> Self {
        ScalarMatrix {
            size,
            data: vec![Scalar::zero(); size * size],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zero(size);
        for i in 0..size {
            m.data[i * size + i] = Scalar::one();
        }
        m
    }

    /// The elementary matrix with a single 1 at `(i, j)`.
    pub fn unit(size: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zero(size);
        m.data[i * size + j] = Scalar::one();
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let size = rows.len();
        if rows.iter().any(|r| r.len() != size) {
            return Err(Error::Invalid("matrix must be square".into()));
        }
        Ok(ScalarMatrix {
            size,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_ints(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| scalar::int(v)).collect())
                .collect(),
        )
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.size + j]
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<Scalar>> {
        self.data
            .chunks(self.size.max(1))
            .map(<[Scalar]>::to_vec)
            .take(self.size)
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn trace(&self) -> Scalar {
        (0..self.size)
            .map(|i| self.get(i, i).clone())
            .fold(Scalar::zero(), |a, b| a + b)
    }

    pub fn mul(&self, other: &ScalarMatrix) -> ScalarMatrix {
        assert_eq!(self.size, other.size, "matrix size");
        let n = self.size;
        let mut out = Self::zero(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &ScalarMatrix) -> ScalarMatrix {
        assert_eq!(self.size, other.size, "matrix size");
        ScalarMatrix {
            size: self.size,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> ScalarMatrix {
        ScalarMatrix {
            size: self.size,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn sub(&self, other: &ScalarMatrix) -> ScalarMatrix {
        self.add(&other.scale(&-Scalar::one()))
    }

    pub fn commutator(&self, other: &ScalarMatrix) -> ScalarMatrix {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn inverse(&self) -> Result<ScalarMatrix> {
        let inv = linalg::inverse(&self.rows())?;
        Self::from_rows(inv)
    }
}

impl fmt::Display for ScalarMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows()
            .iter()
            .map(|r| {
                format!(
                    "[{}]",
                    r.iter().map(scalar::render).collect::<Vec<_>>().join(", ")
                )
            })
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

/// A Lie algebra of `size x size` matrices given by a basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatLieAlg {
    size: usize,
    basis: Vec<ScalarMatrix>,
}

/// On-disk description: matrix size and basis matrices with rational
/// entries written as strings (`"1"`, `"-1/2"`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LieAlgebraDescriptor {
    pub matrix_size: usize,
    pub basis: Vec<Vec<Vec<String>>>,
}

impl MatLieAlg {
    /// Checks linear independence and closure under the commutator.
    pub fn new(size: usize, basis: Vec<ScalarMatrix>) -> Result<Self> {
        if let Some(b) = basis.iter().find(|b| b.size != size) {
            return Err(Error::InvalidLieAlgebra(format!(
                "basis matrix of size {} in a size-{size} algebra",
                b.size
            )));
        }
        let alg = MatLieAlg { size, basis };
        let cols: Vec<Vec<Scalar>> = alg.basis.iter().map(|b| b.data.clone()).collect();
        if linalg::rank(&cols) != cols.len() {
            return Err(Error::InvalidLieAlgebra(
                "basis is linearly dependent".into(),
            ));
        }
        for (i, a) in alg.basis.iter().enumerate() {
            for b in &alg.basis[i + 1..] {
                if alg.coordinates(&a.commutator(b)).is_err() {
                    return Err(Error::InvalidLieAlgebra(
                        "span is not closed under the commutator".into(),
                    ));
                }
            }
        }
        Ok(alg)
    }

    /// `gl_m` with the elementary basis `E_11, E_12, ..., E_mm`.
    pub fn gl(m: usize) -> Self {
        let basis = (0..m)
            .flat_map(|i| (0..m).map(move |j| ScalarMatrix::unit(m, i, j)))
            .collect();
        MatLieAlg { size: m, basis }
    }

    /// `sl_2` with basis `H, E, F`.
    pub fn sl2() -> Self {
        let h = ScalarMatrix::from_ints(&[&[1, 0], &[0, -1]]).unwrap();
        let e = ScalarMatrix::from_ints(&[&[0, 1], &[0, 0]]).unwrap();
        let f = ScalarMatrix::from_ints(&[&[0, 0], &[1, 0]]).unwrap();
        MatLieAlg::new(2, vec![h, e, f]).unwrap()
    }

    /// `so_3` with the infinitesimal rotations `L_x, L_y, L_z`.
    pub fn so3() -> Self {
        let lx = ScalarMatrix::from_ints(&[&[0, 0, 0], &[0, 0, -1], &[0, 1, 0]]).unwrap();
        let ly = ScalarMatrix::from_ints(&[&[0, 0, 1], &[0, 0, 0], &[-1, 0, 0]]).unwrap();
        let lz = ScalarMatrix::from_ints(&[&[0, -1, 0], &[1, 0, 0], &[0, 0, 0]]).unwrap();
        MatLieAlg::new(3, vec![lx, ly, lz]).unwrap()
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "gl1" => Some(Self::gl(1)),
            "gl2" => Some(Self::gl(2)),
            "gl3" => Some(Self::gl(3)),
            "sl2" => Some(Self::sl2()),
            "so3" => Some(Self::so3()),
            _ => None,
        }
    }

    pub fn from_descriptor(d: &LieAlgebraDescriptor) -> Result<Self> {
        let basis = d
            .basis
            .iter()
            .map(|rows| {
                let rows = rows
                    .iter()
                    .map(|r| {
                        r.iter()
                            .map(|s| scalar::parse(s))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                ScalarMatrix::from_rows(rows)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(d.matrix_size, basis)
    }

    pub fn to_descriptor(&self) -> LieAlgebraDescriptor {
        LieAlgebraDescriptor {
            matrix_size: self.size,
            basis: self
                .basis
                .iter()
                .map(|b| {
                    b.rows()
                        .iter()
                        .map(|r| r.iter().map(scalar::render).collect())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ScalarMatrix] {
        &self.basis
    }

    /// Coordinates of a matrix in the basis.
    pub fn coordinates(&self, m: &ScalarMatrix) -> Result<Vec<Scalar>> {
        let cols: Vec<Vec<Scalar>> = self.basis.iter().map(|b| b.data.clone()).collect();
        linalg::coordinates(&cols, &m.data).ok_or(Error::NotInAlgebra)
    }

    pub fn combine(&self, coords: &[Scalar]) -> ScalarMatrix {
        coords
            .iter()
            .zip(&self.basis)
            .fold(ScalarMatrix::zero(self.size), |acc, (c, b)| {
                acc.add(&b.scale(c))
            })
    }

    /// Matrix of `Ad(g)` in the basis: column `a` holds the coordinates of
    /// `g e_a g^{-1}`.
    pub fn adjoint(&self, g: &ScalarMatrix) -> Result<Vec<Vec<Scalar>>> {
        if g.size != self.size {
            return Err(Error::DimensionMismatch {
                expected: self.size,
                found: g.size,
            });
        }
        let ginv = g.inverse()?;
        self.basis
            .iter()
            .map(|b| self.coordinates(&g.mul(b).mul(&ginv)))
            .collect()
    }
}

/// A differential form with values in `size x size` matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieForm {
    dim: usize,
    grade: usize,
    size: usize,
    entries: Vec<DiffForm>,
}

impl LieForm {
    pub fn zero(dim: usize, grade: usize, size: usize) -> Self {
        LieForm {
            dim,
            grade,
            size,
            entries: vec![DiffForm::zero(dim, grade); size * size],
        }
    }

    /// `sum_i form_i ⊗ matrix_i`.
    pub fn from_parts(
        dim: usize,
        grade: usize,
        size: usize,
        parts: &[(DiffForm, ScalarMatrix)],
    ) -> Result<Self> {
        let mut out = Self::zero(dim, grade, size);
        for (form, m) in parts {
            if m.size != size {
                return Err(Error::DimensionMismatch {
                    expected: size,
                    found: m.size,
                });
            }
            if form.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: form.dim(),
                });
            }
            if form.grade() != grade {
                return Err(Error::GradeMismatch {
                    expected: grade,
                    found: form.grade(),
                });
            }
            for (e, c) in out.entries.iter_mut().zip(&m.data) {
                if !c.is_zero() {
                    *e = &*e + &form.scale(c);
                }
            }
        }
        Ok(out)
    }

    /// Matrix-valued function (grade 0).
    pub fn from_functions(size: usize, entries: Vec<Poly>) -> Result<Self> {
        if entries.len() != size * size {
            return Err(Error::DimensionMismatch {
                expected: size * size,
                found: entries.len(),
            });
        }
        let dim = entries.first().map_or(0, Poly::nvars);
        Ok(LieForm {
            dim,
            grade: 0,
            size,
            entries: entries.into_iter().map(DiffForm::function).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entry(&self, i: usize, j: usize) -> &DiffForm {
        &self.entries[i * self.size + j]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(DiffForm::is_zero)
    }

    pub fn try_add(&self, other: &LieForm) -> Result<LieForm> {
        if self.size != other.size {
            return Err(Error::DimensionMismatch {
                expected: self.size,
                found: other.size,
            });
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.try_add(b))
            .collect::<Result<_>>()?;
        Ok(LieForm {
            dim: self.dim,
            grade: self.grade,
            size: self.size,
            entries,
        })
    }

    pub fn scale(&self, c: &Scalar) -> LieForm {
        LieForm {
            entries: self.entries.iter().map(|e| e.scale(c)).collect(),
            ..self.clone()
        }
    }

    /// Wedge product of the form parts with matrix multiplication of values.
    pub fn lie_wedge(&self, other: &LieForm) -> Result<LieForm> {
        if self.size != other.size {
            return Err(Error::DimensionMismatch {
                expected: self.size,
                found: other.size,
            });
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let n = self.size;
        let mut out = LieForm::zero(self.dim, self.grade + other.grade, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = DiffForm::zero(self.dim, self.grade + other.grade);
                for k in 0..n {
                    let (a, b) = (self.entry(i, k), other.entry(k, j));
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = &acc + &a.wedge(b)?;
                }
                out.entries[i * n + j] = acc;
            }
        }
        Ok(out)
    }

    /// Entrywise exterior derivative.
    pub fn ext_d(&self) -> LieForm {
        LieForm {
            dim: self.dim,
            grade: self.grade + 1,
            size: self.size,
            entries: self.entries.iter().map(DiffForm::ext_d).collect(),
        }
    }

    /// `Θ = dα + ½ α ∧ α`.
    pub fn curvature(&self) -> Result<LieForm> {
        if self.grade != 1 {
            return Err(Error::GradeMismatch {
                expected: 1,
                found: self.grade,
            });
        }
        self.ext_d()
            .try_add(&self.lie_wedge(self)?.scale(&scalar::frac(1, 2)))
    }

    /// Scalar-form components `Θ_a` with `self = sum_a Θ_a ⊗ e_a`.
    pub fn components(&self, alg: &MatLieAlg) -> Result<Vec<DiffForm>> {
        if alg.size != self.size {
            return Err(Error::DimensionMismatch {
                expected: alg.size,
                found: self.size,
            });
        }
        // collect, for every (basis tuple, monomial), the matrix of coefficients
        let mut slices: BTreeMap<(Vec<usize>, Vec<u32>), ScalarMatrix> = BTreeMap::new();
        for (pos, e) in self.entries.iter().enumerate() {
            for (idx, f) in e.terms() {
                for (exps, c) in f.terms() {
                    let m = slices
                        .entry((idx.clone(), exps.clone()))
                        .or_insert_with(|| ScalarMatrix::zero(self.size));
                    m.data[pos] = c.clone();
                }
            }
        }
        let mut comps: Vec<Vec<(Vec<usize>, Poly)>> = vec![Vec::new(); alg.dim()];
        for ((idx, exps), m) in slices {
            let coords = alg.coordinates(&m)?;
            for (a, c) in coords.into_iter().enumerate() {
                if !c.is_zero() {
                    comps[a].push((idx.clone(), Poly::monomial(exps.clone(), c)));
                }
            }
        }
        comps
            .into_iter()
            .map(|terms| DiffForm::from_terms(self.dim, self.grade, terms))
            .collect()
    }

    /// Matrix values at a point, one matrix per increasing index tuple.
    pub fn eval_at(&self, point: &[Scalar]) -> Result<BTreeMap<Vec<usize>, ScalarMatrix>> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: point.len(),
            });
        }
        let mut out: BTreeMap<Vec<usize>, ScalarMatrix> = BTreeMap::new();
        for (pos, e) in self.entries.iter().enumerate() {
            for (idx, f) in e.terms() {
                let m = out
                    .entry(idx.clone())
                    .or_insert_with(|| ScalarMatrix::zero(self.size));
                m.data[pos] = f.eval(point);
            }
        }
        out.retain(|_, m| !m.is_zero());
        Ok(out)
    }
}

/// `sum_{i=1}^q x_i dy_i ⊗ v_i` on `R^{2q}` with coordinates
/// `(x_1, ..., x_q, y_1, ..., y_q)`.
pub fn lemados_connection(vectors: &[ScalarMatrix]) -> Result<LieForm> {
    let q = vectors.len();
    if q == 0 {
        return Err(Error::Invalid(
            "at least one Lie algebra element is required".into(),
        ));
    }
    let size = vectors[0].size;
    let dim = 2 * q;
    let parts: Vec<(DiffForm, ScalarMatrix)> = vectors
        .iter()
        .enumerate()
        .map(|(i, v)| Ok((DiffForm::term(Poly::var(dim, i), &[q + i])?, v.clone())))
        .collect::<Result<_>>()?;
    LieForm::from_parts(dim, 1, size, &parts)
}

/// `dx_1 ^ dy_1 ^ ... ^ dx_q ^ dy_q` on `R^{2q}`.
pub fn lemados_volume(q: usize) -> DiffForm {
    let idx: Vec<usize> = (0..q).flat_map(|i| [i, q + i]).collect();
    DiffForm::term(Poly::one(2 * q), &idx).unwrap()
}

/// A linear functional on `S^q g`, keyed by multisets (sorted tuples) of
/// basis indices; `T(e_{a_1} ... e_{a_q})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantPoly {
    degree: usize,
    coeffs: BTreeMap<Vec<usize>, Scalar>,
}

fn multisets(n: usize, q: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, q: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == q {
            out.push(cur.clone());
            return;
        }
        for a in start..n {
            cur.push(a);
            rec(n, q, a, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, q, 0, &mut Vec::new(), &mut out);
    out
}

/// Number of distinct orderings of a sorted multiset.
fn orderings(m: &[usize]) -> Scalar {
    let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
    for &a in m {
        *counts.entry(a).or_default() += 1;
    }
    counts
        .values()
        .fold(scalar::factorial(m.len() as u32), |acc, &c| {
            acc / scalar::factorial(c)
        })
}

impl InvariantPoly {
    pub fn new(
        degree: usize,
        coeffs: impl IntoIterator<Item = (Vec<usize>, Scalar)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (mut k, c) in coeffs {
            if k.len() != degree {
                return Err(Error::GradeMismatch {
                    expected: degree,
                    found: k.len(),
                });
            }
            k.sort_unstable();
            if !c.is_zero() {
                *map.entry(k).or_insert_with(Scalar::zero) += c;
            }
        }
        map.retain(|_, c: &mut Scalar| !c.is_zero());
        Ok(InvariantPoly {
            degree,
            coeffs: map,
        })
    }

    /// The functional that is 1 on `e_{m_1} ... e_{m_q}` and 0 on every
    /// other basis monomial.
    pub fn dual(multiset: &[usize]) -> Self {
        Self::new(multiset.len(), [(multiset.to_vec(), Scalar::one())]).unwrap()
    }

    /// `T(X) = tr X`.
    pub fn trace(alg: &MatLieAlg) -> Self {
        Self::new(
            1,
            alg.basis
                .iter()
                .enumerate()
                .map(|(a, b)| (vec![a], b.trace())),
        )
        .unwrap()
    }

    /// Symmetrised trace of a `q`-fold product:
    /// `T(e_{a_1} ... e_{a_q}) = (1/q!) sum_σ tr(e_{a_σ(1)} ... e_{a_σ(q)})`.
    pub fn sym_trace(alg: &MatLieAlg, q: usize) -> Self {
        let perms = permutations(q);
        let norm = scalar::factorial(q as u32);
        let coeffs = multisets(alg.dim(), q).into_iter().map(|m| {
            let total = perms.iter().fold(Scalar::zero(), |acc, (p, _)| {
                let prod = p.iter().fold(ScalarMatrix::identity(alg.size), |acc, &k| {
                    acc.mul(&alg.basis[m[k]])
                });
                acc + prod.trace()
            });
            (m, total / &norm)
        });
        Self::new(q, coeffs).unwrap()
    }

    /// `T(X) = X_{ij}` (degree 1); generally not invariant.
    pub fn matrix_entry(alg: &MatLieAlg, i: usize, j: usize) -> Self {
        Self::new(
            1,
            alg.basis
                .iter()
                .enumerate()
                .map(|(a, b)| (vec![a], b.get(i, j).clone())),
        )
        .unwrap()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coefficient(&self, multiset: &[usize]) -> Scalar {
        let mut k = multiset.to_vec();
        k.sort_unstable();
        self.coeffs.get(&k).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Applies `T` to an element of `S^q g` given in the monomial basis.
    pub fn apply(&self, element: &BTreeMap<Vec<usize>, Scalar>) -> Scalar {
        element
            .iter()
            .fold(Scalar::zero(), |acc, (k, c)| acc + c * self.coefficient(k))
    }
}

/// `Θ^{∧q}` collected on `S^q g`: the value at a sorted multiset `M` is the
/// sum over all orderings of `M` of `Θ_{m_1} ^ ... ^ Θ_{m_q}`.
pub fn theta_power(
    theta: &LieForm,
    alg: &MatLieAlg,
    q: usize,
) -> Result<BTreeMap<Vec<usize>, DiffForm>> {
    if theta.grade != 2 {
        return Err(Error::GradeMismatch {
            expected: 2,
            found: theta.grade,
        });
    }
    let comps = theta.components(alg)?;
    multisets(alg.dim(), q)
        .into_iter()
        .map(|m| Ok((m.clone(), power_slot(&comps, &m, theta.dim)?)))
        .collect()
}

fn power_slot(comps: &[DiffForm], m: &[usize], dim: usize) -> Result<DiffForm> {
    // 2-forms commute, so every ordering contributes the same wedge
    let mut acc = DiffForm::constant(dim, Scalar::one());
    for &a in m {
        acc = acc.wedge(&comps[a])?;
        if acc.is_zero() {
            return Ok(DiffForm::zero(dim, 2 * m.len()));
        }
    }
    Ok(acc.scale(&orderings(m)))
}

/// `T ∘ (Θ ^ ... ^ Θ)`, a `2q`-form.
pub fn chern_form(t: &InvariantPoly, theta: &LieForm, alg: &MatLieAlg) -> Result<DiffForm> {
    if theta.grade != 2 {
        return Err(Error::GradeMismatch {
            expected: 2,
            found: theta.grade,
        });
    }
    let comps = theta.components(alg)?;
    let mut out = DiffForm::zero(theta.dim, 2 * t.degree);
    for (m, c) in &t.coeffs {
        if let Some(&bad) = m.iter().find(|&&a| a >= alg.dim()) {
            return Err(Error::DimensionMismatch {
                expected: alg.dim(),
                found: bad + 1,
            });
        }
        out = &out + &power_slot(&comps, m, theta.dim)?.scale(c);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaugeNormalization {
    /// `g(x) = I - A_{x0} (x - x0)` as a matrix of functions.
    pub gauge: LieForm,
    /// `A'_j(x0)` for each coordinate direction `j`.
    pub value: Vec<ScalarMatrix>,
}

impl GaugeNormalization {
    pub fn is_zero(&self) -> bool {
        self.value.iter().all(ScalarMatrix::is_zero)
    }
}

/// Builds the affine gauge `g` that kills the connection at `x0` and returns
/// the transformed connection `A' = g⁻¹ A g + g⁻¹ dg` at `x0`. Only the
/// first-order jet of `g⁻¹` is used, which is exact at `x0`.
pub fn normalize_at_point(a: &LieForm, x0: &[Scalar]) -> Result<GaugeNormalization> {
    if a.grade != 1 {
        return Err(Error::GradeMismatch {
            expected: 1,
            found: a.grade,
        });
    }
    if x0.len() != a.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            found: x0.len(),
        });
    }
    let (n, m) = (a.dim, a.size);
    let at_x0 = a.eval_at(x0)?;
    let direction = |j: usize| {
        at_x0
            .get(&vec![j])
            .cloned()
            .unwrap_or_else(|| ScalarMatrix::zero(m))
    };

    // shift(x) = sum_j A_j(x0) (x_j - x0_j), entrywise
    let mut shift = vec![Poly::zero(n); m * m];
    for (j, x0j) in x0.iter().enumerate() {
        let aj = direction(j);
        let dxj = &Poly::var(n, j) - &Poly::constant(n, x0j.clone());
        for (s, c) in shift.iter_mut().zip(aj.entries()) {
            if !c.is_zero() {
                *s = &*s + &dxj.scale(c);
            }
        }
    }
    let identity: Vec<Poly> = ScalarMatrix::identity(m)
        .entries()
        .iter()
        .map(|c| Poly::constant(n, c.clone()))
        .collect();
    let g = LieForm::from_functions(m, identity.iter().zip(&shift).map(|(i, s)| i - s).collect())?;
    let g_inv =
        LieForm::from_functions(m, identity.iter().zip(&shift).map(|(i, s)| i + s).collect())?;

    let transformed = g_inv
        .lie_wedge(a)?
        .lie_wedge(&g)?
        .try_add(&g_inv.lie_wedge(&g.ext_d())?)?;
    let values = transformed.eval_at(x0)?;
    let value = (0..n)
        .map(|j| {
            values
                .get(&vec![j])
                .cloned()
                .unwrap_or_else(|| ScalarMatrix::zero(m))
        })
        .collect();
    Ok(GaugeNormalization { gauge: g, value })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InvarianceVerdict {
    Pass,
    Fail {
        sample: usize,
        multiset: Vec<usize>,
        expected: Scalar,
        found: Scalar,
    },
}

impl InvarianceVerdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, InvarianceVerdict::Pass)
    }
}

/// Checks `T(Ad(g) w) = T(w)` for every basis monomial `w` of `S^q g` and
/// every sample `g`.
pub fn check_invariance(
    t: &InvariantPoly,
    alg: &MatLieAlg,
    samples: &[ScalarMatrix],
) -> Result<InvarianceVerdict> {
    for (si, g) in samples.iter().enumerate() {
        let ad = alg.adjoint(g)?;
        for w in multisets(alg.dim(), t.degree) {
            let mut image: BTreeMap<Vec<usize>, Scalar> =
                BTreeMap::from([(Vec::new(), Scalar::one())]);
            for &a in &w {
                let mut next: BTreeMap<Vec<usize>, Scalar> = BTreeMap::new();
                for (k, c) in &image {
                    for (b, cb) in ad[a].iter().enumerate() {
                        if cb.is_zero() {
                            continue;
                        }
                        let mut key = k.clone();
                        key.push(b);
                        key.sort_unstable();
                        *next.entry(key).or_insert_with(Scalar::zero) += c * cb;
                    }
                }
                image = next;
            }
            let found = t.apply(&image);
            let expected = t.coefficient(&w);
            if found != expected {
                return Ok(InvarianceVerdict::Fail {
                    sample: si,
                    multiset: w,
                    expected,
                    found,
                });
            }
        }
    }
    Ok(InvarianceVerdict::Pass)
}

/// A linear endomorphism of `g` acting on basis coordinates (column `a` is
/// the image of `e_a`), producing `g`-valued forms `T ∘ Θ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraEndo {
    matrix: Vec<Vec<Scalar>>,
}

impl AlgebraEndo {
    pub fn new(matrix: Vec<Vec<Scalar>>) -> Self {
        AlgebraEndo { matrix }
    }

    pub fn homothety(alg: &MatLieAlg, lambda: &Scalar) -> Self {
        let s = alg.dim();
        AlgebraEndo {
            matrix: (0..s)
                .map(|i| {
                    (0..s)
                        .map(|j| {
                            if i == j {
                                lambda.clone()
                            } else {
                                Scalar::zero()
                            }
                        })
                        .collect()
                })
                .collect(),
        }
    }

    fn image(&self, coords: &[Scalar]) -> Vec<Scalar> {
        self.matrix
            .iter()
            .map(|row| {
                row.iter()
                    .zip(coords)
                    .fold(Scalar::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    pub fn apply(&self, theta: &LieForm, alg: &MatLieAlg) -> Result<LieForm> {
        let comps = theta.components(alg)?;
        let mut parts = Vec::new();
        for (a, form) in comps.iter().enumerate() {
            let mut unit = vec![Scalar::zero(); alg.dim()];
            unit[a] = Scalar::one();
            parts.push((form.clone(), alg.combine(&self.image(&unit))));
        }
        LieForm::from_parts(theta.dim, theta.grade, theta.size, &parts)
    }

    /// `T(Ad(g) v) = Ad(g) T(v)` on every basis vector and sample.
    pub fn is_equivariant(&self, alg: &MatLieAlg, samples: &[ScalarMatrix]) -> Result<bool> {
        for g in samples {
            let ad = alg.adjoint(g)?;
            for (a, ad_a) in ad.iter().enumerate() {
                let mut unit = vec![Scalar::zero(); alg.dim()];
                unit[a] = Scalar::one();
                let lhs = self.image(ad_a);
                let t_a = self.image(&unit);
                let rhs: Vec<Scalar> = (0..alg.dim())
                    .map(|b| {
                        t_a.iter()
                            .zip(&ad)
                            .fold(Scalar::zero(), |acc, (c, col)| acc + c * &col[b])
                    })
                    .collect();
                if lhs != rhs {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Random connection `sum_a α_a ⊗ e_a` on `R^dim` with sparse polynomial
/// coefficients of degree at most 2.
pub fn random_connection(rng: &mut impl Rng, alg: &MatLieAlg, dim: usize) -> LieForm {
    let parts: Vec<(DiffForm, ScalarMatrix)> = alg
        .basis
        .iter()
        .map(|b| (sampler::random_form(rng, dim, 1), b.clone()))
        .collect();
    LieForm::from_parts(dim, 1, alg.size, &parts).unwrap()
}

/// Random rational point with small entries.
pub fn random_point(rng: &mut impl Rng, dim: usize) -> Vec<Scalar> {
    (0..dim)
        .map(|_| scalar::frac(rng.random_range(-6..=6), rng.random_range(1..=3)))
        .collect()
}
