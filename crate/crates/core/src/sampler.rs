//! Seeded random polynomials, forms and maps for property checks and the
//! naturality fuzzer.
//!
//! Coefficient degree is at most 2 and integer coefficients lie in
//! `[-3, 3]`. Every trial draws from its own stream derived from
//! `(seed, trial)`, so results do not depend on scheduling.

use std::fmt;

use num_traits::Zero;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::form::{DiffForm, SmoothMap};
use crate::poly::Poly;
use crate::scalar::{self, Scalar};

pub const MAX_DEGREE: u32 = 2;
pub const COEFF_BOUND: i64 = 3;

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn nonzero_coeff(rng: &mut impl Rng) -> Scalar {
    loop {
        let c = rng.random_range(-COEFF_BOUND..=COEFF_BOUND);
        if c != 0 {
            return scalar::int(c);
        }
    }
}

fn random_exponents(rng: &mut impl Rng, nvars: usize, max_degree: u32) -> Vec<u32> {
    let mut e = vec![0u32; nvars];
    if nvars == 0 {
        return e;
    }
    let deg = rng.random_range(0..=max_degree);
    for _ in 0..deg {
        e[rng.random_range(0..nvars)] += 1;
    }
    e
}

/// Sparse polynomial with up to `max_terms` terms of degree `<= max_degree`.
pub fn random_poly(rng: &mut impl Rng, nvars: usize, max_degree: u32, max_terms: usize) -> Poly {
    let terms = rng.random_range(1..=max_terms.max(1));
    let mut p = Poly::zero(nvars);
    for _ in 0..terms {
        let e = random_exponents(rng, nvars, max_degree);
        let c = nonzero_coeff(rng);
        if p.coefficient(&e).is_zero() {
            p.add_term(e, c);
        }
    }
    p
}

fn random_tuple(rng: &mut impl Rng, dim: usize, grade: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..dim).collect();
    // partial Fisher-Yates
    for i in 0..grade {
        let j = rng.random_range(i..dim);
        all.swap(i, j);
    }
    let mut t = all[..grade].to_vec();
    t.sort_unstable();
    t
}

/// Sparse `grade`-form on `R^dim` with up to three basis terms.
pub fn random_form(rng: &mut impl Rng, dim: usize, grade: usize) -> DiffForm {
    let mut out = DiffForm::zero(dim, grade);
    if grade > dim {
        return out;
    }
    let terms = rng.random_range(1..=3);
    for _ in 0..terms {
        let idx = random_tuple(rng, dim, grade);
        let f = random_poly(rng, dim, MAX_DEGREE, 3);
        out = &out + &DiffForm::term(f, &idx).expect("indices in range");
    }
    out
}

/// Families of maps exercised by the naturality fuzzer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MapKind {
    Translation,
    Homothety,
    Linear,
    Quadratic,
    NonInjective,
    Projection,
    Inclusion,
}

impl MapKind {
    pub const ALL: [MapKind; 7] = [
        MapKind::Translation,
        MapKind::Homothety,
        MapKind::Linear,
        MapKind::Quadratic,
        MapKind::NonInjective,
        MapKind::Projection,
        MapKind::Inclusion,
    ];

    /// Source dimension for a map into `R^target` of this kind, given a
    /// freely chosen candidate `free`.
    pub fn source_dim(self, target: usize, free: usize) -> usize {
        match self {
            MapKind::Translation | MapKind::Homothety => target,
            MapKind::Projection => target + 1,
            MapKind::Inclusion => target.saturating_sub(1),
            MapKind::Linear | MapKind::Quadratic | MapKind::NonInjective => free,
        }
    }
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MapKind::Translation => "translation",
            MapKind::Homothety => "homothety",
            MapKind::Linear => "linear",
            MapKind::Quadratic => "quadratic",
            MapKind::NonInjective => "non-injective",
            MapKind::Projection => "projection",
            MapKind::Inclusion => "inclusion",
        };
        f.write_str(s)
    }
}

/// The homothety `x ↦ λx` of `R^n`.
pub fn homothety(n: usize, lambda: &Scalar) -> SmoothMap {
    SmoothMap::new(n, (0..n).map(|i| Poly::var(n, i).scale(lambda)).collect()).unwrap()
}

/// The translation `x ↦ x + c`.
pub fn translation(offset: &[Scalar]) -> SmoothMap {
    let n = offset.len();
    SmoothMap::new(
        n,
        offset
            .iter()
            .enumerate()
            .map(|(i, c)| &Poly::var(n, i) + &Poly::constant(n, c.clone()))
            .collect(),
    )
    .unwrap()
}

/// `R^m -> R^n` of the requested kind, where `m = kind.source_dim(n, m)`.
pub fn random_map(rng: &mut impl Rng, kind: MapKind, m: usize, n: usize) -> SmoothMap {
    let m = kind.source_dim(n, m);
    let comps: Vec<Poly> = match kind {
        MapKind::Translation => {
            let mut offset: Vec<Scalar> = (0..n)
                .map(|_| scalar::int(rng.random_range(-3..=3)))
                .collect();
            if let Some(first) = offset.first_mut() {
                if first.is_zero() {
                    *first = scalar::int(1);
                }
            }
            return translation(&offset);
        }
        MapKind::Homothety => {
            let choices = [
                scalar::int(2),
                scalar::int(3),
                scalar::int(-2),
                scalar::frac(1, 2),
            ];
            return homothety(n, choices.choose(rng).unwrap());
        }
        MapKind::Linear => (0..n).map(|_| random_linear(rng, m)).collect(),
        MapKind::Quadratic => (0..n).map(|_| random_poly(rng, m, MAX_DEGREE, 3)).collect(),
        MapKind::NonInjective => {
            // every component factors through the first coordinate
            (0..n)
                .map(|_| {
                    if m == 0 {
                        return Poly::constant(0, nonzero_coeff(rng));
                    }
                    let t = random_poly(rng, 1, MAX_DEGREE, 3);
                    let mut comp = Poly::zero(m);
                    for (e, c) in t.terms() {
                        let mut f = vec![0; m];
                        f[0] = e[0];
                        comp.add_term(f, c.clone());
                    }
                    comp
                })
                .collect()
        }
        MapKind::Projection => (0..n).map(|i| Poly::var(m, i)).collect(),
        MapKind::Inclusion => (0..n)
            .map(|i| {
                if i < m {
                    Poly::var(m, i)
                } else {
                    Poly::zero(m)
                }
            })
            .collect(),
    };
    SmoothMap::new(m, comps).unwrap()
}

fn random_linear(rng: &mut impl Rng, m: usize) -> Poly {
    let mut p = Poly::zero(m);
    for j in 0..m {
        let c = rng.random_range(-COEFF_BOUND..=COEFF_BOUND);
        let mut e = vec![0; m];
        e[j] = 1;
        p.add_term(e, scalar::int(c));
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    #[test]
    fn streams_are_reproducible() {
        let a = random_form(&mut trial_rng(7, 3), 4, 2);
        let b = random_form(&mut trial_rng(7, 3), 4, 2);
        assert_eq!(a, b);
        let c = random_form(&mut trial_rng(7, 4), 4, 2);
        assert_ne!(a, c);
    }

    #[test]
    fn sampled_data_respects_bounds() {
        let mut rng = trial_rng(1, 0);
        for _ in 0..50 {
            let p = random_poly(&mut rng, 3, MAX_DEGREE, 3);
            assert!(p.degree().unwrap_or(0) <= MAX_DEGREE);
            for (_, c) in p.terms() {
                assert!(c.abs() <= scalar::int(COEFF_BOUND));
            }
        }
        assert!(random_form(&mut rng, 2, 3).is_zero());
    }

    #[test]
    fn map_dimensions() {
        let mut rng = trial_rng(1, 0);
        for kind in MapKind::ALL {
            let tau = random_map(&mut rng, kind, 2, 3);
            assert_eq!(tau.target_dim(), 3);
            assert_eq!(tau.source_dim(), kind.source_dim(3, 2));
        }
    }
}
