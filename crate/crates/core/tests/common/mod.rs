#![allow(dead_code)]

use normrel::coset::{canonicalize, PGCosetFunction};
use normrel::hecke::{HeckeElement, Mono};
use normrel::padic::{qf, GElement, Mat2, Q};
use normrel::qsqrt::QSqrtP;
use normrel::report::random_coset;
use rand::Rng;

pub fn qs(p: u64, n: i64) -> QSqrtP {
    QSqrtP::int(p, n)
}

pub fn small_qsqrt<R: Rng>(p: u64, rng: &mut R) -> QSqrtP {
    let mut draw = || qf(rng.gen_range(-5..=5), rng.gen_range(1..=3));
    QSqrtP::new(p, draw(), draw())
}

pub fn random_hecke<R: Rng>(p: u64, rng: &mut R, terms: usize) -> HeckeElement {
    let mut h = HeckeElement::zero(p);
    for _ in 0..terms {
        let m = Mono::new(
            rng.gen_range(-2..=2),
            rng.gen_range(0..=2),
            rng.gen_range(-2..=2),
            rng.gen_range(0..=2),
        );
        h.add_term(m, &small_qsqrt(p, rng));
    }
    h
}

pub fn random_function<R: Rng>(p: u64, rng: &mut R, size: usize) -> PGCosetFunction {
    let mut f = PGCosetFunction::zero(p);
    for _ in 0..size {
        let x = random_coset(rng, 2, 2, 1);
        f.add_at(x, &QSqrtP::from_q(p, qf(rng.gen_range(-4..=4), rng.gen_range(1..=2))));
    }
    f
}

/// Slot-`slot` right-coset representatives of `K diag(p,1) K`, scaled by `scale`.
pub fn t_reps(p: u64, slot: u8, scale: &Q) -> Vec<GElement> {
    let pi = p as i64;
    let mut mats: Vec<Mat2> = (0..pi).map(|b| Mat2::from_ints(pi, b, 0, 1)).collect();
    mats.push(Mat2::from_ints(1, 0, 0, pi));
    mats.into_iter().map(|m| embed(slot, m.scale(scale))).collect()
}

pub fn embed(slot: u8, m: Mat2) -> GElement {
    if slot == 1 {
        GElement::new(m, Mat2::identity())
    } else {
        GElement::new(Mat2::identity(), m)
    }
}

/// `x -> sum_r f(x r)` computed from explicit matrices. `inverse_reps`
/// represent the right cosets of the inverse double coset and bound the
/// support: `x r` in `P y G°` forces `x` into `P y K r^-1 K`.
pub fn convolve(f: &PGCosetFunction, reps: &[GElement], inverse_reps: &[GElement]) -> PGCosetFunction {
    let p = f.p;
    let mut candidates = std::collections::BTreeSet::new();
    for y in f.support.keys() {
        for s in inverse_reps {
            candidates.insert(canonicalize(p, &y.representative(p).mul(s)));
        }
    }
    let mut out = PGCosetFunction::zero(p);
    for x in candidates {
        let xr = x.representative(p);
        for r in reps {
            out.add_at(x, &f.eval_at(&xr.mul(r)));
        }
    }
    out
}

pub fn central(p: u64, e: i64) -> Mat2 {
    Mat2::scalar(normrel::padic::ppow(p, e))
}
