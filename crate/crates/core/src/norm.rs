//! Hecke operators attached to lattice data, ideal certificates for the
//! local norm relations, and their mod-ℓ reductions.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coset::{hecke_act, volume_orbit, xi_c_lattice, trace_level, CanonicalCoset, PGCosetFunction};
use crate::error::{Error, Result};
use crate::hecke::{
    dual_euler_at_one, euler_at_one, gen_l_inverse_at_one, schur_operator, HeckeElement, LocalizedHecke,
    Mono, TermJson,
};
use crate::padic::{in_z_inv_p, ppow, q, qf, GElement, Mat2, Q};
use crate::qsqrt::QSqrtP;
use crate::schwartz::{lattice_membership, volume_stab_intersection, LatticeElement, Level, SchwartzFunction, Variant, PBox};

/// `𝒱 = vol · (S1 S2)^r0 · S1^r1`.
fn volume_operator(p: u64, x: &CanonicalCoset) -> HeckeElement {
    HeckeElement::monomial(Mono::new(x.r0 + x.r1, 0, x.r0, 0), QSqrtP::from_q(p, volume_orbit(p, x)))
}

/// `p^{-m/2} 𝒫^{(|m|+1)}(1)` in the slot picked by the sign of `m`.
fn main_operator(p: u64, x: &CanonicalCoset) -> HeckeElement {
    let g = if x.m >= 0 {
        gen_l_inverse_at_one(p, 1, x.m + 1)
    } else {
        gen_l_inverse_at_one(p, 2, -x.m + 1)
    };
    g.expect("r >= 1").scale(&QSqrtP::half_power(p, -x.m))
}

/// The coefficient of `𝒫_p(1)`; zero when `n = 0`.
fn correction_operator(p: u64, x: &CanonicalCoset) -> HeckeElement {
    let mut acc = HeckeElement::zero(p);
    let top = x.n - 1;
    for k in (-x.m).max(0)..x.n {
        let eps = if k == top { -qf(p as i64, p as i64 - 1) } else { q(-1) };
        let s = schur_operator(p, 1, k + x.m)
            .and_then(|a| Ok(a.mul(&schur_operator(p, 2, k)?)))
            .expect("indices >= -2");
        acc = acc.add(&s.scale_q(&eps));
    }
    acc.scale(&QSqrtP::half_power(p, -x.m))
}

/// The operator `q(x)` with `Θ(q(x)) = Λ(ch(x))` for every generic `Θ`.
pub fn q_operator(p: u64, x: &CanonicalCoset) -> HeckeElement {
    let main = main_operator(p, x);
    let corr = correction_operator(p, x).mul(&euler_at_one(p));
    volume_operator(p, x).mul(&main.add(&corr))
}

/// `𝒬_f = Σ f(x) q(x)`.
pub fn q_of_function(f: &PGCosetFunction) -> HeckeElement {
    f.support
        .iter()
        .fold(HeckeElement::zero(f.p), |acc, (x, v)| acc.add(&q_operator(f.p, x).scale(v)))
}

/// `-S_p 𝒬_f' / (1 - S_p)`, the operator carrying `f0` to `f`.
pub fn p_of_function(f: &PGCosetFunction) -> LocalizedHecke {
    let p = f.p;
    let numer = HeckeElement::sp(p, 1).mul(&q_of_function(f).dual()).neg();
    LocalizedHecke::new(numer, 1)
}

/// `𝒫_δ` for lattice data at level `Full`.
pub fn p_delta(p: u64, delta: &[LatticeElement], ceiling: u64) -> Result<LocalizedHecke> {
    let f = xi_c_lattice(p, delta)?;
    let out = p_of_function(&f);
    if !delta.is_empty() && lattice_membership(delta, Variant::S, ceiling)? {
        if out.denom_power != 0 {
            return Err(Error::falsification(format!(
                "certified δ but 𝒫_δ keeps a (1 - S_p)^{} denominator",
                out.denom_power
            )));
        }
        if !out.is_integral() {
            return Err(Error::falsification("certified δ but 𝒫_δ is not Z[1/p]-integral"));
        }
    }
    Ok(out)
}

/// Check `numer(P) · f0 = (1 - S_p)^k · target`.
pub fn apply_to_f0(p_op: &LocalizedHecke, target: &PGCosetFunction) -> Result<PGCosetFunction> {
    let p = target.p;
    let lhs = hecke_act(&p_op.numer, &PGCosetFunction::f0(p));
    let rhs = hecke_act(&HeckeElement::one_minus_sp(p).pow(p_op.denom_power), target);
    if lhs != rhs {
        return Err(Error::falsification(format!("𝒫·f0 = {lhs:?} but expected {rhs:?}")));
    }
    Ok(lhs)
}

/// Reduction modulo `1 - S1 S2`: `S2 -> S1^{-1}`.
pub fn reduce_mod_one_minus_sp(h: &HeckeElement) -> HeckeElement {
    let mut out = HeckeElement::zero(h.p);
    for (m, c) in &h.terms {
        out.add_term(Mono::new(m.e1 - m.e2, m.t1, 0, m.t2), c);
    }
    out
}

/// `target = ((p - 1) A + B 𝒫_p'(1)) / (1 - S_p)^denom_power`.
#[derive(Clone, Debug)]
pub struct IdealCertificate {
    pub p: u64,
    pub target: LocalizedHecke,
    pub a: HeckeElement,
    pub b: HeckeElement,
    pub denom_power: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub p: u64,
    pub target: Vec<TermJson>,
    pub target_denom_power: u32,
    #[serde(rename = "A")]
    pub a: Vec<TermJson>,
    #[serde(rename = "B")]
    pub b: Vec<TermJson>,
    #[serde(rename = "denomPower")]
    pub denom_power: u32,
    pub verified: bool,
}

impl IdealCertificate {
    pub fn combination(&self) -> LocalizedHecke {
        let p = self.p;
        let num = self
            .a
            .scale(&QSqrtP::int(p, p as i64 - 1))
            .add(&self.b.mul(&dual_euler_at_one(p)));
        LocalizedHecke { numer: num, denom_power: self.denom_power }
    }

    /// Exact re-check of the identity and the integrality conditions.
    pub fn verify(&self) -> bool {
        self.combination().equals(&self.target)
            && self.a.is_integral()
            && self.b.is_integral()
            && self.denom_power <= 1
    }

    pub fn to_json(&self) -> CertificateJson {
        CertificateJson {
            p: self.p,
            target: self.target.numer.to_json(),
            target_denom_power: self.target.denom_power,
            a: self.a.to_json(),
            b: self.b.to_json(),
            denom_power: self.denom_power,
            verified: self.verify(),
        }
    }

    pub fn from_json(j: &CertificateJson) -> Result<Self> {
        Ok(IdealCertificate {
            p: j.p,
            target: LocalizedHecke {
                numer: HeckeElement::from_json(j.p, &j.target)?,
                denom_power: j.target_denom_power,
            },
            a: HeckeElement::from_json(j.p, &j.a)?,
            b: HeckeElement::from_json(j.p, &j.b)?,
            denom_power: j.denom_power,
        })
    }
}

/// Split `𝒫_{Tr δ}` into the ideal `(p - 1, 𝒫_p'(1))`.
pub fn certificate(p: u64, delta: &[LatticeElement], variant: Variant, ceiling: u64) -> Result<IdealCertificate> {
    if delta.iter().any(|e| e.level != Level::DetP) {
        return Err(Error::Precondition("certificate expects level DetP data".into()));
    }
    if !lattice_membership(delta, variant, ceiling)? {
        return Err(Error::Precondition(format!("presentation not certified for the {variant:?} lattice at level DetP")));
    }
    let f = xi_c_lattice(p, &trace_level(delta))?;
    let target = p_of_function(&f);

    let sp = HeckeElement::sp(p, 1);
    let pd = dual_euler_at_one(p);
    let mut n_a = HeckeElement::zero(p);
    let mut n_b = HeckeElement::zero(p);
    for (x, v) in &f.support {
        let vd = volume_operator(p, x).dual().mul(&sp).neg().scale(v);
        n_a = n_a.add(&vd.mul(&main_operator(p, x).dual()));
        n_b = n_b.add(&vd.mul(&correction_operator(p, x).dual()));
    }
    let inv_pm1 = QSqrtP::from_q(p, qf(1, p as i64 - 1));

    let r = reduce_mod_one_minus_sp(&n_b);
    let split = n_b.sub(&r).divide_exact().and_then(|b| {
        n_a.add(&r.mul(&pd)).divide_exact().map(|a| (a.scale(&inv_pm1), b))
    });
    let cert = match split {
        Some((a, b)) if a.is_integral() && b.is_integral() => {
            IdealCertificate { p, target: target.clone(), a, b, denom_power: 0 }
        }
        _ => IdealCertificate { p, target: target.clone(), a: n_a.scale(&inv_pm1), b: n_b, denom_power: 1 },
    };
    if !cert.combination().equals(&target) {
        return Err(Error::falsification("certificate identity fails"));
    }
    if !cert.a.is_integral() || !cert.b.is_integral() {
        return Err(Error::falsification(format!(
            "certificate coefficients not Z[1/p]-integral: A = {}, B = {}",
            cert.a, cert.b
        )));
    }
    if variant == Variant::S0 && cert.denom_power != 0 {
        return Err(Error::falsification("S0 datum needs a (1 - S_p) denominator"));
    }
    Ok(cert)
}

/// Coefficients of `S1^{±1}, T1, S2^{±1}, T2`-monomials of the cleared target
/// and of `B 𝒫_p'(1)`, reduced mod `ell`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModEllRelation {
    pub ell: u64,
    pub target: BTreeMap<Mono, u64>,
    pub b_times_euler: BTreeMap<Mono, u64>,
}

impl ModEllRelation {
    pub fn holds(&self) -> bool {
        self.target == self.b_times_euler
    }
}

pub fn mod_ell_certificate(cert: &IdealCertificate, ell: u64) -> Result<ModEllRelation> {
    let p = cert.p;
    if !(p - 1).is_multiple_of(ell) {
        return Err(Error::domain(format!("{ell} does not divide p - 1 = {}", p - 1)));
    }
    for h in [&cert.a, &cert.b, &cert.target.numer] {
        h.reduce_mod_ell(ell)?;
    }
    if cert.target.denom_power > cert.denom_power {
        return Err(Error::domain("target denominator exceeds certificate denominator"));
    }
    let cleared = cert
        .target
        .numer
        .mul(&HeckeElement::one_minus_sp(p).pow(cert.denom_power - cert.target.denom_power));
    let rel = ModEllRelation {
        ell,
        target: cleared.reduce_mod_ell(ell)?,
        b_times_euler: cert.b.mul(&dual_euler_at_one(p)).reduce_mod_ell(ell)?,
    };
    if !rel.holds() {
        return Err(Error::falsification(format!("target ≢ B·𝒫_p'(1) mod {ell}")));
    }
    Ok(rel)
}

/// Rank of `q(x)` over `Q(sqrt p)` equals the number of cosets.
pub fn independence_check(p: u64, cosets: &[CanonicalCoset]) -> bool {
    let rows: Vec<HeckeElement> = cosets.iter().map(|x| q_operator(p, x)).collect();
    rank(p, &rows) == cosets.len()
}

/// Exact rank of Hecke elements as coefficient vectors.
pub fn rank(p: u64, rows: &[HeckeElement]) -> usize {
    let mut basis: Vec<Mono> = rows.iter().flat_map(|h| h.terms.keys().copied()).collect();
    basis.sort();
    basis.dedup();
    let mut mat: Vec<Vec<QSqrtP>> = rows
        .iter()
        .map(|h| basis.iter().map(|m| h.coeff(m)).collect())
        .collect();
    let mut r = 0;
    for col in 0..basis.len() {
        let Some(piv) = (r..mat.len()).find(|&i| !mat[i][col].is_zero()) else {
            continue;
        };
        mat.swap(r, piv);
        let inv = mat[r][col].inv();
        for i in 0..mat.len() {
            if i != r && !mat[i][col].is_zero() {
                let f = &mat[i][col] * &inv;
                for j in col..basis.len() {
                    let t = &f * &mat[r][j];
                    mat[i][j] -= &t;
                }
            }
        }
        r += 1;
        if r == mat.len() {
            break;
        }
    }
    let _ = p;
    r
}

/// `φ0 ⊗ ch(G°)`.
pub fn delta0_full(p: u64) -> Vec<LatticeElement> {
    vec![LatticeElement::new(Q::one(), SchwartzFunction::phi0(p), GElement::identity(), Level::Full)]
}

/// `(p - 1) φ0 ⊗ ch(G°[p])`.
pub fn delta0_datum(p: u64) -> Vec<LatticeElement> {
    vec![LatticeElement::new(q(p as i64 - 1), SchwartzFunction::phi0(p), GElement::identity(), Level::DetP)]
}

/// `(1, [[1, 1/p], [0, 1]])`.
pub fn unipotent_shift(p: u64) -> GElement {
    GElement::new(Mat2::identity(), Mat2::new(q(1), ppow(p, -1), q(0), q(1)))
}

/// `n · φ_{p,2} ⊗ (ch(G°[p]) - ch((1, [[1, 1/p], [0, 1]]) G°[p]))`.
pub fn delta1_datum(p: u64, n: Q) -> Vec<LatticeElement> {
    let phi = SchwartzFunction::phi_p2(p);
    vec![
        LatticeElement::new(n.clone(), phi.clone(), GElement::identity(), Level::DetP),
        LatticeElement::new(-n, phi, unipotent_shift(p), Level::DetP),
    ]
}

/// The scalar `1 / ((p - 1)^2 (p + 1))` attached to the δ₁ datum.
pub fn delta1_scalar(p: u64) -> Q {
    let p = p as i64;
    qf(1, (p - 1) * (p - 1) * (p + 1))
}

/// A random combination of boxes of depth at most `depth`.
pub fn random_schwartz<R: Rng>(p: u64, rng: &mut R, depth: i64, vanish_at_origin: bool) -> SchwartzFunction {
    loop {
        let nbox = rng.gen_range(1..=3);
        let mut parts = Vec::new();
        for _ in 0..nbox {
            let k = rng.gen_range(0..=depth);
            let l = rng.gen_range(0..=depth);
            let span = |e: i64| p.pow(e as u32) as i64;
            let a = q(rng.gen_range(0..span(k)));
            let b = q(rng.gen_range(0..span(l)));
            let v = q(rng.gen_range(1..=4) * if rng.gen_bool(0.5) { 1 } else { -1 });
            parts.push((PBox::new(p, a, k, b, l), v));
        }
        let mut phi = SchwartzFunction::from_boxes(p, parts).normalized();
        if vanish_at_origin {
            let c = phi.value_at_origin();
            if !c.is_zero() {
                let d = phi.depth();
                phi = phi.add(&SchwartzFunction::box_indicator(p, q(0), d, q(0), d).scale(&-c));
            }
        }
        if !phi.is_zero() {
            return phi;
        }
    }
}

/// A random `g` from products of small standard elements.
pub fn random_coset_element<R: Rng>(p: u64, rng: &mut R) -> GElement {
    let pinv = ppow(p, -1);
    let pool = [
        GElement::identity(),
        unipotent_shift(p),
        GElement::new(Mat2::identity(), Mat2::new(q(1), q(0), q(p as i64), q(1))),
        GElement::new(Mat2::diag(q(p as i64), q(1)), Mat2::identity()),
        GElement::new(Mat2::identity(), Mat2::diag(q(1), q(p as i64))),
        GElement::new(Mat2::new(q(1), pinv.clone(), q(0), q(1)), Mat2::identity()),
        GElement::new(Mat2::scalar(q(p as i64)), Mat2::scalar(q(p as i64))),
    ];
    let mut g = GElement::identity();
    for _ in 0..rng.gen_range(1..=2) {
        g = g.mul(&pool[rng.gen_range(0..pool.len())]);
    }
    g
}

/// The least positive prime-to-`p` scalar `c` such that `c φ ⊗ ch(g U)`
/// lies in the lattice.
pub fn lattice_scalar(phi: &SchwartzFunction, g: &GElement, level: Level, ceiling: u64) -> Result<Q> {
    let p = phi.p;
    let vol = volume_stab_intersection(phi, g, level, ceiling)?;
    let mut c = num_bigint::BigInt::one();
    for v in phi.values() {
        let w = &v * &vol;
        let mut d = w.denom().clone();
        while (&d % num_bigint::BigInt::from(p)).is_zero() {
            d /= num_bigint::BigInt::from(p);
        }
        c = num_integer::Integer::lcm(&c, &d);
    }
    let out = Q::from_integer(c);
    debug_assert!(phi.values().iter().all(|v| in_z_inv_p(p, &(&out * v * &vol))));
    Ok(out)
}

/// One certified generator per call; `S0` data vanish at the origin.
/// Draws whose stabilizer enumeration exceeds `ceiling` are redrawn.
pub fn random_certified_delta<R: Rng>(
    p: u64,
    rng: &mut R,
    level: Level,
    variant: Variant,
    ceiling: u64,
) -> Result<Vec<LatticeElement>> {
    let mut last = None;
    for _ in 0..64 {
        let phi = random_schwartz(p, rng, 2, variant == Variant::S0);
        let g = random_coset_element(p, rng);
        match lattice_scalar(&phi, &g, level, ceiling) {
            Ok(c) => {
                let unit = q(rng.gen_range(1..=3));
                return Ok(vec![LatticeElement::new(c * unit, phi, g, level)]);
            }
            Err(e @ Error::Resource(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::resource("no admissible draw")))
}
