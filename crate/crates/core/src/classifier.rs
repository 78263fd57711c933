//! Natural operations `Ω^{p_1} ⊕ ... ⊕ Ω^{p_k} → Ω^q`: the monomial basis of
//! the classifying algebra `R{u_1, v_1, ..., u_k, v_k}` (`deg u_i = p_i`,
//! `deg v_i = p_i + 1`), witness forms isolating each monomial, black-box
//! decomposition and a naturality fuzzer.

use std::fmt;
use std::ops::Range;

use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::form::{DiffForm, SmoothMap};
use crate::graded::{render_mono, GradedAlgebra, GradedMono, GradedPoly, GradedVar};
use crate::linalg::{self, Matrix};
use crate::poly::Poly;
use crate::sampler::{self, MapKind};
use crate::scalar::{self, Scalar};

/// Degrees `(p_1, ..., p_k)` of the input forms and degree `q` of the output.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    source_degrees: Vec<u32>,
    target_degree: u32,
}

impl Signature {
    pub fn new(source_degrees: Vec<u32>, target_degree: u32) -> Result<Self> {
        if source_degrees.contains(&0) {
            return Err(Error::InvalidSignature(
                "input degrees must be positive".into(),
            ));
        }
        Ok(Signature {
            source_degrees,
            target_degree,
        })
    }

    pub fn source_degrees(&self) -> &[u32] {
        &self.source_degrees
    }

    pub fn target_degree(&self) -> u32 {
        self.target_degree
    }

    pub fn q(&self) -> usize {
        self.target_degree as usize
    }

    pub fn k(&self) -> usize {
        self.source_degrees.len()
    }

    /// The algebra with variables `u1, v1, ..., uk, vk` in that order.
    pub fn algebra(&self) -> GradedAlgebra {
        let vars = self
            .source_degrees
            .iter()
            .enumerate()
            .flat_map(|(i, &p)| {
                [
                    GradedVar::new(format!("u{}", i + 1), p),
                    GradedVar::new(format!("v{}", i + 1), p + 1),
                ]
            })
            .collect();
        GradedAlgebra::new(vars).expect("positive degrees")
    }

    /// Checks arity and grades of an input tuple on `R^dim`.
    pub fn check_inputs(&self, dim: usize, forms: &[DiffForm]) -> Result<()> {
        if forms.len() != self.k() {
            return Err(Error::Invalid(format!(
                "expected {} input forms, got {}",
                self.k(),
                forms.len()
            )));
        }
        for (f, &p) in forms.iter().zip(&self.source_degrees) {
            if f.grade() != p as usize {
                return Err(Error::GradeMismatch {
                    expected: p as usize,
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
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p: Vec<String> = self.source_degrees.iter().map(u32::to_string).collect();
        write!(f, "p=[{}], q={}", p.join(","), self.target_degree)
    }
}

/// `(ω_1, dω_1, ..., ω_k, dω_k)`, the assignment for `u1, v1, ..., uk, vk`.
pub fn with_differentials(forms: &[DiffForm]) -> Vec<DiffForm> {
    forms.iter().flat_map(|w| [w.clone(), w.ext_d()]).collect()
}

/// All monomials of degree `q`, in descending lexicographic order of the
/// exponent vector `(d_{1,0}, d_{1,1}, ..., d_{k,0}, d_{k,1})`.
pub fn enumerate_basis(sig: &Signature) -> Vec<GradedMono> {
    fn rec(degrees: &[u32], remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<GradedMono>) {
        let Some((&p, rest)) = degrees.split_first() else {
            if remaining == 0 {
                out.push(GradedMono(prefix.clone()));
            }
            return;
        };
        // odd-degree variables appear at most once
        let max_a = if p % 2 == 1 {
            1.min(remaining / p)
        } else {
            remaining / p
        };
        for a in (0..=max_a).rev() {
            let left = remaining - a * p;
            let max_b = if (p + 1) % 2 == 1 {
                1.min(left / (p + 1))
            } else {
                left / (p + 1)
            };
            for b in (0..=max_b).rev() {
                prefix.push(a);
                prefix.push(b);
                rec(rest, left - b * (p + 1), prefix, out);
                prefix.truncate(prefix.len() - 2);
            }
        }
    }
    let mut out = Vec::new();
    rec(
        &sig.source_degrees,
        sig.target_degree,
        &mut Vec::new(),
        &mut out,
    );
    out
}

pub fn count_basis(sig: &Signature) -> usize {
    enumerate_basis(sig).len()
}

/// Shape of one factor's witness form, named after the monomial pattern in
/// `(u, v)` it isolates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WitnessCase {
    /// `u^0 v^s`, odd `p`.
    ZeroS,
    /// `u^1 v^s`, odd `p`.
    OneS,
    /// `u^s v^0`, even `p`.
    SZero,
    /// `u^s v^1`, even `p`.
    SOne,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorWitness {
    pub case: WitnessCase,
    pub repeat: u32,
    pub block: Range<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessAssignment {
    pub factors: Vec<FactorWitness>,
}

impl WitnessAssignment {
    /// Total number of coordinates used.
    pub fn width(&self) -> usize {
        self.factors.iter().map(|f| f.block.len()).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub assignment: WitnessAssignment,
    /// Input forms on `R^q`.
    pub forms: Vec<DiffForm>,
    /// `s_1! ... s_k!`, the volume multiple produced by the isolated monomial.
    pub expected: Scalar,
}

/// `sum_j y_{j0} dy_{j1} ^ ... ^ dy_{jp}` on consecutive blocks of `p + 1`
/// coordinates starting at `start`.
fn linear_times_volume_blocks(dim: usize, start: usize, p: usize, s: u32) -> DiffForm {
    let mut out = DiffForm::zero(dim, p);
    for j in 0..s as usize {
        let base = start + j * (p + 1);
        let idx: Vec<usize> = (base + 1..=base + p).collect();
        out = &out + &DiffForm::term(Poly::var(dim, base), &idx).unwrap();
    }
    out
}

/// `sum_j dy_{j1} ^ ... ^ dy_{jp}` on consecutive blocks of `p` coordinates.
fn volume_blocks(dim: usize, start: usize, p: usize, s: u32) -> DiffForm {
    let mut out = DiffForm::zero(dim, p);
    for j in 0..s as usize {
        let base = start + j * p;
        let idx: Vec<usize> = (base..base + p).collect();
        out = &out + &DiffForm::term(Poly::one(dim), &idx).unwrap();
    }
    out
}

fn check_in_basis(sig: &Signature, mono: &GradedMono) -> Result<()> {
    let alg = sig.algebra();
    let ok = mono.0.len() == 2 * sig.k()
        && alg.degree(mono) == sig.q()
        && mono
            .0
            .iter()
            .zip(alg.vars())
            .all(|(&e, v)| !(v.is_odd() && e > 1));
    if ok {
        Ok(())
    } else {
        Err(Error::NotInBasis(format!("{:?}", mono.0)))
    }
}

/// Witness forms on `R^q` on which `mono` evaluates to
/// `s_1! ... s_k! dx_1 ^ ... ^ dx_q`.
pub fn witness(sig: &Signature, mono: &GradedMono) -> Result<Witness> {
    check_in_basis(sig, mono)?;
    let q = sig.q();
    let mut factors = Vec::with_capacity(sig.k());
    let mut forms = Vec::with_capacity(sig.k());
    let mut expected = Scalar::one();
    let mut start = 0usize;
    for (i, &p) in sig.source_degrees.iter().enumerate() {
        let (a, b) = (mono.0[2 * i], mono.0[2 * i + 1]);
        let p = p as usize;
        let (case, s) = if p % 2 == 1 {
            (
                if a == 0 {
                    WitnessCase::ZeroS
                } else {
                    WitnessCase::OneS
                },
                b,
            )
        } else {
            (
                if b == 0 {
                    WitnessCase::SZero
                } else {
                    WitnessCase::SOne
                },
                a,
            )
        };
        let su = s as usize;
        let (form, width) = match case {
            WitnessCase::ZeroS => (linear_times_volume_blocks(q, start, p, s), su * (p + 1)),
            WitnessCase::OneS => {
                let lead: Vec<usize> = (start..start + p).collect();
                let head = DiffForm::term(Poly::one(q), &lead).unwrap();
                (
                    &head + &linear_times_volume_blocks(q, start + p, p, s),
                    p + su * (p + 1),
                )
            }
            WitnessCase::SZero => (volume_blocks(q, start, p, s), su * p),
            WitnessCase::SOne => {
                let lead: Vec<usize> = (start + 1..=start + p).collect();
                let head = DiffForm::term(Poly::var(q, start), &lead).unwrap();
                (
                    &head + &volume_blocks(q, start + p + 1, p, s),
                    p + 1 + su * p,
                )
            }
        };
        factors.push(FactorWitness {
            case,
            repeat: s,
            block: start..start + width,
        });
        forms.push(form);
        expected *= scalar::factorial(s);
        start += width;
    }
    debug_assert_eq!(start, q);
    Ok(Witness {
        assignment: WitnessAssignment { factors },
        forms,
        expected,
    })
}

/// Pulls forms on `R^q` back along the projection `R^dim -> R^q` onto the
/// first `q` coordinates.
pub fn lift_forms(forms: &[DiffForm], dim: usize) -> Result<Vec<DiffForm>> {
    forms
        .iter()
        .map(|f| {
            let q = f.dim();
            if dim < q {
                return Err(Error::DimensionMismatch {
                    expected: q,
                    found: dim,
                });
            }
            let proj = SmoothMap::new(dim, (0..q).map(|i| Poly::var(dim, i)).collect())?;
            f.pullback(&proj)
        })
        .collect()
}

/// A dimension-polymorphic operation on tuples of forms.
pub trait NaturalOp: Send + Sync {
    fn signature(&self) -> &Signature;

    /// Evaluates on forms living on `R^dim`.
    fn apply(&self, dim: usize, forms: &[DiffForm]) -> Result<DiffForm>;
}

/// `(ω_1, ..., ω_k) ↦ P(ω_1, dω_1, ..., ω_k, dω_k)`.
#[derive(Clone, Debug)]
pub struct PolynomialOp {
    sig: Signature,
    poly: GradedPoly,
}

impl PolynomialOp {
    pub fn new(sig: Signature, poly: GradedPoly) -> Result<Self> {
        if poly.algebra() != &sig.algebra() {
            return Err(Error::VariableMismatch);
        }
        if poly
            .terms()
            .any(|(m, _)| sig.algebra().degree(m) != sig.q())
        {
            return Err(Error::NotHomogeneous(sig.q()));
        }
        Ok(PolynomialOp { sig, poly })
    }

    pub fn poly(&self) -> &GradedPoly {
        &self.poly
    }
}

impl NaturalOp for PolynomialOp {
    fn signature(&self) -> &Signature {
        &self.sig
    }

    fn apply(&self, dim: usize, forms: &[DiffForm]) -> Result<DiffForm> {
        self.sig.check_inputs(dim, forms)?;
        self.poly
            .gp_eval(dim, &with_differentials(forms), self.sig.q())
    }
}

/// Wraps a closure as an operation.
pub struct FnOp<F> {
    sig: Signature,
    f: F,
}

impl<F> FnOp<F>
where
    F: Fn(usize, &[DiffForm]) -> Result<DiffForm> + Send + Sync,
{
    pub fn new(sig: Signature, f: F) -> Self {
        FnOp { sig, f }
    }
}

impl<F> NaturalOp for FnOp<F>
where
    F: Fn(usize, &[DiffForm]) -> Result<DiffForm> + Send + Sync,
{
    fn signature(&self) -> &Signature {
        &self.sig
    }

    fn apply(&self, dim: usize, forms: &[DiffForm]) -> Result<DiffForm> {
        self.sig.check_inputs(dim, forms)?;
        (self.f)(dim, forms)
    }
}

fn volume_multiple(value: &DiffForm, q: usize, what: &str) -> Result<Scalar> {
    if value.grade() != q {
        return Err(Error::GradeMismatch {
            expected: q,
            found: value.grade(),
        });
    }
    value
        .leading_volume_multiple()
        .ok_or_else(|| Error::NotClassifiedShape(format!("{what} gave {value}")))
}

/// Coefficient of `mono` in `op`, read off its witness: the volume multiple
/// divided by `s_1! ... s_k!`. Assumes the other basis monomials vanish on
/// the witness; [`decompose`] checks that.
pub fn evaluate_on_witness(op: &dyn NaturalOp, mono: &GradedMono) -> Result<Scalar> {
    let sig = op.signature();
    let w = witness(sig, mono)?;
    let value = op.apply(sig.q(), &w.forms)?;
    Ok(volume_multiple(&value, sig.q(), "witness evaluation")? / w.expected)
}

#[derive(Clone, Debug)]
pub struct DecomposeOptions {
    /// Dimension the witnesses are lifted to; defaults to `q`.
    pub witness_dim: Option<usize>,
    /// Dimensions of the residual check; defaults to `[q, q + 2]`.
    pub verify_dims: Option<Vec<usize>>,
    pub verify_trials: usize,
    pub seed: u64,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions {
            witness_dim: None,
            verify_dims: None,
            verify_trials: 4,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub poly: GradedPoly,
    pub basis: Vec<GradedMono>,
    /// Row `w`, column `m`: volume multiple of monomial `m` on witness `w`.
    pub evaluation_matrix: Matrix,
    /// Volume multiple of the operation on each witness.
    pub witness_values: Vec<Scalar>,
    /// Whether the matrix was diagonal with entries `s_1! ... s_k!`.
    pub diagonal: bool,
}

pub fn render_matrix(m: &Matrix) -> String {
    m.iter()
        .map(|row| row.iter().map(scalar::render).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Recovers the unique polynomial `P` with `op(ω) = P(ω, dω)` and verifies
/// the identity on random forms.
pub fn decompose(op: &dyn NaturalOp, opts: &DecomposeOptions) -> Result<Decomposition> {
    let sig = op.signature();
    let q = sig.q();
    let alg = sig.algebra();
    let wdim = opts.witness_dim.unwrap_or(q);
    if wdim < q {
        return Err(Error::DimensionMismatch {
            expected: q,
            found: wdim,
        });
    }
    let basis = enumerate_basis(sig);
    let mut witnesses = Vec::with_capacity(basis.len());
    for m in &basis {
        let w = witness(sig, m)?;
        let lifted = lift_forms(&w.forms, wdim)?;
        witnesses.push((w.expected, lifted));
    }

    let mut matrix = Vec::with_capacity(basis.len());
    let mut values = Vec::with_capacity(basis.len());
    for (_, forms) in &witnesses {
        let assignment = with_differentials(forms);
        let row = basis
            .iter()
            .map(|m| {
                let v = GradedPoly::monomial(&alg, m.clone(), Scalar::one()).gp_eval(
                    wdim,
                    &assignment,
                    q,
                )?;
                volume_multiple(&v, q, "basis monomial on witness")
            })
            .collect::<Result<Vec<_>>>()?;
        matrix.push(row);
        let v = op.apply(wdim, forms)?;
        // a natural operation is a constant multiple of the volume here
        let value = volume_multiple(&v, q, "operation on witness").map_err(|e| match e {
            Error::NotClassifiedShape(msg) => Error::NotNatural(msg),
            other => other,
        })?;
        values.push(value);
    }

    let diagonal = matrix.iter().enumerate().all(|(i, row)| {
        row.iter().enumerate().all(|(j, v)| {
            if i == j {
                *v == witnesses[i].0
            } else {
                v.is_zero()
            }
        })
    });
    let coeffs = if diagonal {
        values
            .iter()
            .zip(&witnesses)
            .map(|(v, (e, _))| v / e)
            .collect()
    } else {
        linalg::solve(&matrix, &values)
            .map_err(|_| Error::WitnessNotSeparating(render_matrix(&matrix)))?
    };

    let mut poly = GradedPoly::zero(&alg);
    for (m, c) in basis.iter().zip(coeffs) {
        poly.add_term(m.clone(), c);
    }

    let verify_dims = opts.verify_dims.clone().unwrap_or_else(|| vec![q, q + 2]);
    for &dim in &verify_dims {
        for t in 0..opts.verify_trials {
            let mut rng = sampler::trial_rng(opts.seed, (dim * 1_000 + t) as u64);
            let forms: Vec<DiffForm> = sig
                .source_degrees
                .iter()
                .map(|&p| sampler::random_form(&mut rng, dim, p as usize))
                .collect();
            let lhs = op.apply(dim, &forms)?;
            let rhs = poly.gp_eval(dim, &with_differentials(&forms), q)?;
            if lhs != rhs {
                return Err(Error::NotNatural(format!(
                    "on R^{dim} with inputs [{}]: operation gives {lhs}, polynomial {poly} gives {rhs}",
                    forms.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("; ")
                )));
            }
        }
    }

    Ok(Decomposition {
        poly,
        basis,
        evaluation_matrix: matrix,
        witness_values: values,
        diagonal,
    })
}

#[derive(Clone, Debug)]
pub struct NaturalityOptions {
    pub trials: usize,
    pub seed: u64,
    /// Candidate ambient dimensions for sampled maps.
    pub dims: Vec<usize>,
}

impl Default for NaturalityOptions {
    fn default() -> Self {
        NaturalityOptions {
            trials: 100,
            seed: 0,
            dims: vec![1, 2, 3, 4],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub seed: u64,
    pub trial: usize,
    pub kind: MapKind,
    pub map: SmoothMap,
    /// Inputs on the target of `map`.
    pub forms: Vec<DiffForm>,
    /// `map^* op(forms)`.
    pub pulled_back_output: DiffForm,
    /// `op(map^* forms)`.
    pub output_of_pulled_back: DiffForm,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass { seed: u64, trials: usize },
    Counterexample(Box<Counterexample>),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass { .. })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass { seed, trials } => write!(f, "pass ({trials} trials, seed {seed})"),
            Verdict::Counterexample(c) => {
                writeln!(f, "counterexample (trial {}, seed {})", c.trial, c.seed)?;
                writeln!(f, "  map ({}): {}", c.kind, c.map)?;
                for (i, w) in c.forms.iter().enumerate() {
                    writeln!(f, "  w{} = {}", i + 1, w)?;
                }
                writeln!(f, "  pullback of output: {}", c.pulled_back_output)?;
                write!(f, "  output of pullback: {}", c.output_of_pulled_back)
            }
        }
    }
}

fn naturality_trial(
    op: &dyn NaturalOp,
    opts: &NaturalityOptions,
    trial: usize,
) -> Result<Option<Counterexample>> {
    let sig = op.signature();
    let mut rng = sampler::trial_rng(opts.seed, trial as u64);
    let kind = MapKind::ALL[trial % MapKind::ALL.len()];
    // ambient dimensions too small for the output grade make every check vacuous
    let roomy: Vec<usize> = opts
        .dims
        .iter()
        .copied()
        .filter(|&n| n >= sig.q())
        .collect();
    let dims = if roomy.is_empty() { &opts.dims } else { &roomy };
    let n = dims[rng.random_range(0..dims.len())];
    let free = opts.dims[rng.random_range(0..opts.dims.len())];
    let map = sampler::random_map(&mut rng, kind, free, n);
    let forms: Vec<DiffForm> = sig
        .source_degrees
        .iter()
        .map(|&p| sampler::random_form(&mut rng, n, p as usize))
        .collect();
    let pulled_back_output = op.apply(n, &forms)?.pullback(&map)?;
    let pulled: Vec<DiffForm> = forms
        .iter()
        .map(|w| w.pullback(&map))
        .collect::<Result<_>>()?;
    let output_of_pulled_back = op.apply(map.source_dim(), &pulled)?;
    if pulled_back_output == output_of_pulled_back {
        Ok(None)
    } else {
        Ok(Some(Counterexample {
            seed: opts.seed,
            trial,
            kind,
            map,
            forms,
            pulled_back_output,
            output_of_pulled_back,
        }))
    }
}

/// Checks `τ^* op(ω) = op(τ^* ω)` on sampled maps and forms. Trials run in
/// parallel; the reported counterexample is the one with the lowest index.
pub fn check_naturality(op: &dyn NaturalOp, opts: &NaturalityOptions) -> Result<Verdict> {
    if opts.trials == 0 || opts.dims.is_empty() {
        return Err(Error::Invalid(
            "naturality check needs at least one trial and one dimension".into(),
        ));
    }
    let results: Vec<Option<Counterexample>> = (0..opts.trials)
        .into_par_iter()
        .map(|t| naturality_trial(op, opts, t))
        .collect::<Result<_>>()?;
    Ok(match results.into_iter().flatten().next() {
        Some(c) => Verdict::Counterexample(Box::new(c)),
        None => Verdict::Pass {
            seed: opts.seed,
            trials: opts.trials,
        },
    })
}

/// Random homogeneous element of degree `q` with integer coefficients in
/// `[-3, 3]`, non-zero whenever the basis is non-empty.
pub fn random_homogeneous(rng: &mut impl Rng, sig: &Signature) -> GradedPoly {
    let alg = sig.algebra();
    let basis = enumerate_basis(sig);
    let mut p = GradedPoly::zero(&alg);
    for m in &basis {
        p.add_term(
            m.clone(),
            scalar::int(rng.random_range(-sampler::COEFF_BOUND..=sampler::COEFF_BOUND)),
        );
    }
    if p.is_zero() {
        if let Some(m) = basis.first() {
            p.add_term(m.clone(), Scalar::one());
        }
    }
    p
}

/// One `{exponents, coefficient}` entry of the structured output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRecord {
    pub exponents: Vec<u32>,
    pub coefficient: String,
}

pub fn to_records(p: &GradedPoly) -> Vec<TermRecord> {
    p.terms()
        .map(|(m, c)| TermRecord {
            exponents: m.0.clone(),
            coefficient: scalar::render(c),
        })
        .collect()
}

pub fn basis_records(sig: &Signature) -> Vec<TermRecord> {
    enumerate_basis(sig)
        .into_iter()
        .map(|m| TermRecord {
            exponents: m.0,
            coefficient: "1".into(),
        })
        .collect()
}

pub fn from_records(sig: &Signature, records: &[TermRecord]) -> Result<GradedPoly> {
    let alg = sig.algebra();
    let mut p = GradedPoly::zero(&alg);
    for r in records {
        if r.exponents.len() != alg.len() {
            return Err(Error::Invalid(format!(
                "exponent vector {:?} has wrong length",
                r.exponents
            )));
        }
        p.add_term(
            GradedMono(r.exponents.clone()),
            scalar::parse(&r.coefficient)?,
        );
    }
    Ok(p)
}

pub fn render_basis(sig: &Signature) -> Vec<String> {
    let alg = sig.algebra();
    enumerate_basis(sig)
        .iter()
        .map(|m| render_mono(&alg, m))
        .collect()
}
