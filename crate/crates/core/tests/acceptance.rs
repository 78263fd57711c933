//! Acceptance suite: one line per criterion, non-zero exit on any failure.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use natforms_core::chern_weil::{
    check_invariance, chern_form, lemados_connection, lemados_volume, normalize_at_point,
    random_connection, random_point,
};
use natforms_core::classifier::{
    check_naturality, decompose, enumerate_basis, evaluate_on_witness, random_homogeneous,
    render_matrix, Counterexample, DecomposeOptions, FnOp, NaturalityOptions, PolynomialOp,
};
use natforms_core::expr::{bind, parse_expr};
use natforms_core::graded::render_mono;
use natforms_core::sampler::{random_form, random_map, trial_rng, MapKind};
use natforms_core::scalar::{factorial, int, render, Scalar};
use natforms_core::{
    CovTensor, DiffForm, GradedPoly, InvariantPoly, MatLieAlg, NaturalOp, Poly, ScalarMatrix,
    Signature, SmoothMap, Verdict,
};
use num_traits::{One, Zero};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sig(p: &[u32], q: u32) -> Signature {
    Signature::new(p.to_vec(), q).unwrap()
}

/// Every signature with `k <= 2`, `p_i <= 3`, `q <= 6`.
fn small_signatures() -> Vec<Signature> {
    let mut out = Vec::new();
    for q in 0..=6 {
        for p in 1..=3 {
            out.push(sig(&[p], q));
        }
        for p1 in 1..=3 {
            for p2 in 1..=3 {
                out.push(sig(&[p1, p2], q));
            }
        }
    }
    out
}

fn random_map_between(rng: &mut impl Rng, m: usize, n: usize) -> SmoothMap {
    let kind = if rng.random_bool(0.5) {
        MapKind::Linear
    } else {
        MapKind::Quadratic
    };
    random_map(rng, kind, m, n)
}

fn parity_sign(a: usize, b: usize) -> Scalar {
    if a * b % 2 == 1 {
        int(-1)
    } else {
        int(1)
    }
}

fn criterion_1() -> Outcome {
    const CASES: u64 = 200;
    let start = Instant::now();
    let mut checked = 0;
    for t in 0..CASES {
        let mut rng = trial_rng(1, t);
        let n = rng.random_range(0..=4);
        let p = rng.random_range(0..=n.max(1));
        let w = random_form(&mut rng, n, p);
        ensure(w.ext_d().ext_d().is_zero(), || format!("d∘d ≠ 0 on {w}"))?;
        checked += 1;
    }
    for t in 0..CASES {
        let mut rng = trial_rng(2, t);
        let n = rng.random_range(1..=4);
        let (p, q) = (rng.random_range(0..=3), rng.random_range(0..=3));
        let (a, b) = (random_form(&mut rng, n, p), random_form(&mut rng, n, q));
        let lhs = a.wedge(&b).unwrap().ext_d();
        let rhs =
            &a.ext_d().wedge(&b).unwrap() + &a.wedge(&b.ext_d()).unwrap().scale(&parity_sign(p, 1));
        ensure(lhs == rhs, || format!("Leibniz fails on {a} and {b}"))?;
        let swapped = b.wedge(&a).unwrap().scale(&parity_sign(p, q));
        ensure(a.wedge(&b).unwrap() == swapped, || {
            format!("graded commutativity fails on {a} and {b}")
        })?;
        checked += 2;
    }
    for t in 0..CASES {
        let mut rng = trial_rng(3, t);
        let (a, b, c) = (
            rng.random_range(0..=4),
            rng.random_range(0..=4),
            rng.random_range(0..=4),
        );
        let sigma = random_map_between(&mut rng, a, b);
        let tau = random_map_between(&mut rng, b, c);
        let p = rng.random_range(0..=3);
        let w = random_form(&mut rng, c, p);
        let lhs = w.pullback(&tau.after(&sigma).unwrap()).unwrap();
        let rhs = w.pullback(&tau).unwrap().pullback(&sigma).unwrap();
        ensure(lhs == rhs, || {
            format!("functoriality fails for {w} along {tau} after {sigma}")
        })?;
        checked += 1;
    }
    for t in 0..CASES {
        let mut rng = trial_rng(4, t);
        let (m, n) = (rng.random_range(0..=4), rng.random_range(1..=4));
        let tau = random_map_between(&mut rng, m, n);
        let (p, q) = (rng.random_range(0..=2), rng.random_range(0..=2));
        let (a, b) = (random_form(&mut rng, n, p), random_form(&mut rng, n, q));
        let lhs = a.wedge(&b).unwrap().pullback(&tau).unwrap();
        let rhs = a
            .pullback(&tau)
            .unwrap()
            .wedge(&b.pullback(&tau).unwrap())
            .unwrap();
        ensure(lhs == rhs, || {
            format!("pullback is not multiplicative on {a}, {b} along {tau}")
        })?;
        ensure(
            a.ext_d().pullback(&tau).unwrap() == a.pullback(&tau).unwrap().ext_d(),
            || format!("pullback does not commute with d on {a} along {tau}"),
        )?;
        checked += 2;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || {
        format!("took {elapsed:?}, limit 30s")
    })?;
    Ok(format!(
        "{checked} exact identity checks in {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn random_tensor(rng: &mut impl Rng, dim: usize, order: usize) -> CovTensor {
    let mut t = CovTensor::zero(dim, order);
    for _ in 0..rng.random_range(1..=3) {
        let idx: Vec<usize> = (0..order).map(|_| rng.random_range(0..dim)).collect();
        let f = natforms_core::sampler::random_poly(rng, dim, 2, 2);
        t = &t + &CovTensor::term(f, &idx).unwrap();
    }
    t
}

/// The constant `c` with `h(∇ω) = c·dω`, or an error if it depends on `ω`.
fn nabla_constant(q: usize) -> Result<Scalar, String> {
    let n = q + 1;
    let mut found: Option<Scalar> = None;
    let mut seen = 0;
    for t in 0..40 {
        let w = random_form(&mut trial_rng(20 + q as u64, t), n, q);
        let dw = w.ext_d();
        if dw.is_zero() {
            continue;
        }
        let h = CovTensor::nabla_form(&w, 1)
            .skew()
            .project_form()
            .map_err(|e| e.to_string())?;
        let (idx, f) = dw.terms().next().unwrap();
        let (exps, lead) = f.terms().next().unwrap();
        let c = h.coefficient(idx).coefficient(exps) / lead;
        if h != dw.scale(&c) {
            return Err(format!("h(∇ω) is not a multiple of dω for ω = {w}"));
        }
        match &found {
            Some(prev) if *prev != c => {
                return Err(format!(
                    "constant {} vs {} for q = {q}",
                    render(prev),
                    render(&c)
                ))
            }
            _ => found = Some(c),
        }
        seen += 1;
    }
    ensure(seen >= 10, || {
        format!("only {seen} samples with dω ≠ 0 for q = {q}")
    })?;
    Ok(found.unwrap())
}

fn criterion_2() -> Outcome {
    let mut rng = trial_rng(10, 0);
    for _ in 0..100 {
        let n = rng.random_range(1..=4);
        let (r, s) = (rng.random_range(0..=2), rng.random_range(0..=2));
        let (t, u) = (random_tensor(&mut rng, n, r), random_tensor(&mut rng, n, s));
        let lhs = t.tensor_product(&u).unwrap().skew().project_form().unwrap();
        let rhs = t
            .skew()
            .project_form()
            .unwrap()
            .wedge(&u.skew().project_form().unwrap())
            .unwrap();
        ensure(lhs == rhs, || {
            format!("h(T⊗T') ≠ h(T)∧h(T') for T = {t}, T' = {u}")
        })?;
    }
    for q in 0..=3 {
        for t in 0..25 {
            let w = random_form(&mut trial_rng(11, t), 4, q);
            let e = CovTensor::embed_form(&w);
            ensure(e.skew() == e.scale(&factorial(q as u32)), || {
                format!("h(ω) ≠ {q}!·ω for {w}")
            })?;
        }
    }
    let mut constants = Vec::new();
    for q in 1..=3 {
        let c = nabla_constant(q)?;
        if q == 1 {
            ensure(c.is_one(), || {
                format!("h(∇ω) = {}·dω for q = 1", render(&c))
            })?;
        }
        constants.push(format!(
            "q={q}: {} (q! = {})",
            render(&c),
            render(&factorial(q as u32))
        ));
    }
    Ok(format!("h(∇ω)/dω constants {}", constants.join(", ")))
}

fn criterion_3() -> Outcome {
    let mut out = Vec::new();
    for p in 1..=4u32 {
        let s = sig(&[p], p + 1);
        let alg = s.algebra();
        let basis = enumerate_basis(&s);
        let names: Vec<String> = basis.iter().map(|m| render_mono(&alg, m)).collect();
        ensure(names == ["v1"], || {
            format!("basis for p = {p} is {names:?}")
        })?;
        let d = FnOp::new(s.clone(), |_, f: &[DiffForm]| Ok(f[0].ext_d()));
        let dec = decompose(&d, &DecomposeOptions::default()).map_err(|e| e.to_string())?;
        ensure(dec.poly == GradedPoly::var(&alg, 1), || {
            format!("decompose(d) = {} for p = {p}", dec.poly)
        })?;
        out.push(format!("p={p}"));
    }
    Ok(format!(
        "basis {{v1}} and decompose(d) = v1 for {}",
        out.join(", ")
    ))
}

fn criterion_4() -> Outcome {
    let mut archive = String::new();
    let (mut monomials, mut diagonal, mut fallback) = (0, 0, 0);
    for s in small_signatures() {
        let alg = s.algebra();
        let basis = enumerate_basis(&s);
        for m in &basis {
            let op = PolynomialOp::new(
                s.clone(),
                GradedPoly::monomial(&alg, m.clone(), Scalar::one()),
            )
            .map_err(|e| e.to_string())?;
            let v = evaluate_on_witness(&op, m).map_err(|e| e.to_string())?;
            ensure(v.is_one(), || {
                format!(
                    "{} on its witness for {s} gives {}",
                    render_mono(&alg, m),
                    render(&v)
                )
            })?;
            monomials += 1;
        }
        if basis.is_empty() {
            continue;
        }
        let all = basis.iter().fold(GradedPoly::zero(&alg), |acc, m| {
            acc.gp_add(&GradedPoly::monomial(&alg, m.clone(), Scalar::one()))
                .unwrap()
        });
        let dec = decompose(
            &PolynomialOp::new(s.clone(), all.clone()).unwrap(),
            &DecomposeOptions::default(),
        )
        .map_err(|e| format!("{s}: {e}"))?;
        ensure(dec.poly == all, || {
            format!("{s}: cross-evaluation recovered {}", dec.poly)
        })?;
        if dec.diagonal {
            diagonal += 1;
        } else {
            fallback += 1;
        }
        let names: Vec<String> = basis.iter().map(|m| render_mono(&alg, m)).collect();
        let _ = writeln!(
            archive,
            "{s} basis [{}] diagonal={}",
            names.join(", "),
            dec.diagonal
        );
        let _ = writeln!(archive, "{}", render_matrix(&dec.evaluation_matrix));
    }
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("witness_matrices.txt");
    std::fs::write(&path, archive).map_err(|e| e.to_string())?;
    Ok(format!(
        "{monomials} monomials normalised to 1; {diagonal} diagonal matrices, {fallback} via linear solve; archived at {}",
        path.display()
    ))
}

fn criterion_5() -> Outcome {
    let sigs = small_signatures();
    let mut rng = trial_rng(50, 0);
    let mut done = 0;
    while done < 100 {
        let s = &sigs[rng.random_range(0..sigs.len())];
        let p = random_homogeneous(&mut rng, s);
        if p.is_zero() {
            continue;
        }
        let op = PolynomialOp::new(s.clone(), p.clone()).map_err(|e| e.to_string())?;
        let dec = decompose(
            &op,
            &DecomposeOptions {
                seed: done as u64,
                ..Default::default()
            },
        )
        .map_err(|e| format!("{s}: {e}"))?;
        ensure(dec.poly == p, || {
            format!("{s}: {p} decomposed as {}", dec.poly)
        })?;
        done += 1;
    }
    Ok(format!("{done} random polynomials recovered exactly"))
}

/// The divergence `ω ↦ Σ_j ∂_j ω_j` of a 1-form, read off the trace of `∇ω`.
fn divergence_op(
) -> FnOp<impl Fn(usize, &[DiffForm]) -> natforms_core::Result<DiffForm> + Send + Sync> {
    FnOp::new(sig(&[1], 0), |dim, f: &[DiffForm]| {
        let nabla = CovTensor::nabla_form(&f[0], 1);
        let trace = (0..dim).fold(Poly::zero(dim), |acc, j| &acc + &nabla.coefficient(&[j, j]));
        Ok(DiffForm::function(trace))
    })
}

/// Pointwise pullback `(τ^* T)_y` of a constant tensor at `τ(y)`.
fn pull_back_at(t: &CovTensor, tau: &SmoothMap, y: &[Scalar]) -> CovTensor {
    let jac: Vec<Vec<Scalar>> = tau
        .jacobian()
        .iter()
        .map(|row| row.iter().map(|f| f.eval(y)).collect())
        .collect();
    let m = tau.source_dim();
    let mut out = CovTensor::zero(m, t.order());
    for (idx, f) in t.terms() {
        let c = f.as_constant().unwrap();
        let mut partial: Vec<(Vec<usize>, Scalar)> = vec![(Vec::new(), c)];
        for &i in idx {
            partial = partial
                .into_iter()
                .flat_map(|(key, c)| {
                    let jac = &jac;
                    (0..m).filter_map(move |j| {
                        let v = &c * &jac[i][j];
                        (!v.is_zero()).then(|| {
                            let mut k = key.clone();
                            k.push(j);
                            (k, v)
                        })
                    })
                })
                .collect();
        }
        for (k, v) in partial {
            out = &out + &CovTensor::term(Poly::constant(m, v), &k).unwrap();
        }
    }
    out
}

/// Re-derives a counterexample pointwise, without symbolic pullback of the
/// operation's output: some point `y` must separate `τ^*(op ω)` from
/// `op(τ^* ω)`.
fn recheck(op: &dyn NaturalOp, c: &Counterexample) -> Result<(), String> {
    let tau = &c.map;
    let n = tau.target_dim();
    let output = op.apply(n, &c.forms).map_err(|e| e.to_string())?;
    let pulled: Vec<DiffForm> = c.forms.iter().map(|w| w.pullback(tau).unwrap()).collect();
    let other = op
        .apply(tau.source_dim(), &pulled)
        .map_err(|e| e.to_string())?;
    let mut rng = trial_rng(99, c.trial as u64);
    for _ in 0..20 {
        let y = random_point(&mut rng, tau.source_dim());
        let x = tau.eval(&y).unwrap();
        let lhs = pull_back_at(&output.eval_at(&x).unwrap(), tau, &y);
        let rhs = other.eval_at(&y).unwrap();
        if lhs != rhs {
            return Ok(());
        }
    }
    Err(format!(
        "no separating point found for the {} counterexample of trial {}",
        c.kind, c.trial
    ))
}

fn criterion_6() -> Outcome {
    let natural = [
        ("d(w1)", sig(&[1], 2)),
        ("w1 ^ d(w1)", sig(&[1], 3)),
        ("w1 ^ w2", sig(&[1, 1], 2)),
    ];
    for (text, s) in natural {
        let op = bind(parse_expr(text).unwrap(), &s).map_err(|e| e.to_string())?;
        let v = check_naturality(
            &op,
            &NaturalityOptions {
                trials: 100,
                seed: 7,
                ..Default::default()
            },
        )
        .map_err(|e| e.to_string())?;
        ensure(v.is_pass(), || format!("{text} rejected: {v}"))?;
    }
    let planted = bind(parse_expr("x1 * d(w1)").unwrap(), &sig(&[1], 2)).unwrap();
    let divergence = divergence_op();
    let candidates: [(&str, &dyn NaturalOp); 2] =
        [("x1 * d(w1)", &planted), ("divergence via ∇", &divergence)];
    let mut found = Vec::new();
    for (name, op) in candidates {
        let v = check_naturality(
            op,
            &NaturalityOptions {
                trials: 10,
                seed: 7,
                ..Default::default()
            },
        )
        .map_err(|e| e.to_string())?;
        let Verdict::Counterexample(c) = v else {
            return Err(format!("{name} passed 10 trials"));
        };
        recheck(op, &c)?;
        found.push(format!("{name} at trial {} ({})", c.trial, c.kind));
    }
    Ok(format!(
        "3 natural operations pass 100 trials; rejected {}",
        found.join(", ")
    ))
}

fn criterion_7() -> Outcome {
    let mut compared = 0;
    for s in small_signatures() {
        if enumerate_basis(&s).is_empty() {
            continue;
        }
        let mut rng = trial_rng(70, compared as u64);
        let p = random_homogeneous(&mut rng, &s);
        let op = PolynomialOp::new(s.clone(), p).unwrap();
        let q = s.q();
        let at = |dim: usize| {
            decompose(
                &op,
                &DecomposeOptions {
                    witness_dim: Some(dim),
                    verify_dims: Some(vec![dim]),
                    ..Default::default()
                },
            )
            .map(|d| d.poly)
            .map_err(|e| format!("{s} in dimension {dim}: {e}"))
        };
        let (low, high) = (at(q)?, at(q + 2)?);
        ensure(low == high, || {
            format!("{s}: {low} on R^{q} vs {high} on R^{}", q + 2)
        })?;
        compared += 1;
    }
    Ok(format!(
        "{compared} signatures decompose identically on R^q and R^(q+2)"
    ))
}

fn criterion_8() -> Outcome {
    let gl3 = MatLieAlg::gl(3);
    // E11, E12, E23: pairwise non-commuting where possible
    let picks = [0usize, 1, 5];
    for q in 1..=3 {
        let vectors: Vec<ScalarMatrix> =
            picks[..q].iter().map(|&a| gl3.basis()[a].clone()).collect();
        let theta = lemados_connection(&vectors)
            .and_then(|a| a.curvature())
            .map_err(|e| e.to_string())?;
        let got = chern_form(&InvariantPoly::dual(&picks[..q]), &theta, &gl3)
            .map_err(|e| e.to_string())?;
        let expected = lemados_volume(q).scale(&factorial(q as u32));
        ensure(got == expected, || {
            format!("q = {q}: got {got}, expected {expected}")
        })?;
    }
    Ok("T(Θ^q) = q!·dx1^dy1^...^dxq^dyq for q = 1, 2, 3 over gl3".into())
}

fn criterion_9() -> Outcome {
    let gl2 = MatLieAlg::gl(2);
    let invariants = [
        ("trace", InvariantPoly::trace(&gl2)),
        ("sym-trace 2", InvariantPoly::sym_trace(&gl2, 2)),
    ];
    let samples = [
        ScalarMatrix::from_ints(&[&[0, 1], &[1, 0]]).unwrap(),
        ScalarMatrix::from_ints(&[&[2, 1], &[1, 1]]).unwrap(),
        ScalarMatrix::from_ints(&[&[1, 3], &[0, -1]]).unwrap(),
    ];
    for (name, t) in &invariants {
        let v = check_invariance(t, &gl2, &samples).map_err(|e| e.to_string())?;
        ensure(v.is_pass(), || format!("{name} is not Ad-invariant: {v:?}"))?;
    }
    let mut nonzero = 0;
    for t in 0..20 {
        let a = random_connection(&mut trial_rng(90, t), &gl2, 5);
        let theta = a.curvature().map_err(|e| e.to_string())?;
        for (name, inv) in &invariants {
            let c = chern_form(inv, &theta, &gl2).map_err(|e| e.to_string())?;
            ensure(c.ext_d().is_zero(), || {
                format!("d({name}(Θ)) ≠ 0 for connection {t}")
            })?;
            if !c.is_zero() {
                nonzero += 1;
            }
        }
    }
    Ok(format!("d(T(Θ^q)) = 0 for 20 gl2 connections on R^5 and 2 invariants ({nonzero}/40 forms non-zero)"))
}

fn criterion_10() -> Outcome {
    let gl2 = MatLieAlg::gl(2);
    let mut dims = BTreeSet::new();
    for t in 0..20 {
        let mut rng = trial_rng(100, t);
        let n = rng.random_range(1..=4);
        let a = random_connection(&mut rng, &gl2, n);
        let x0 = random_point(&mut rng, n);
        let norm = normalize_at_point(&a, &x0).map_err(|e| e.to_string())?;
        ensure(norm.is_zero(), || {
            format!("connection {t} at {x0:?} normalises to {:?}", norm.value)
        })?;
        dims.insert(n);
    }
    Ok(format!(
        "20 gl2 connections vanish at their base point after the gauge change (dims {dims:?})"
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("core exterior-calculus identities", criterion_1),
        ("skew-symmetrisation identities", criterion_2),
        ("d is the only natural (p, p+1) operation", criterion_3),
        ("witness forms isolate every basis monomial", criterion_4),
        ("decomposition round trip", criterion_5),
        ("naturality fuzzer", criterion_6),
        ("dimension stability", criterion_7),
        ("Chern-Weil form of the model connection", criterion_8),
        ("closedness of Chern-Weil forms", criterion_9),
        ("gauge normalisation at a point", criterion_10),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] criterion {}: {name}: {detail} ({secs:.2}s)", i + 1),
            Err(detail) => {
                failures += 1;
                println!("[FAIL] criterion {}: {name}: {detail} ({secs:.2}s)", i + 1);
            }
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
