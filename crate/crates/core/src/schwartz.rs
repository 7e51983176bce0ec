//! Schwartz functions on `Q_p^2`, stabilizer volumes and the integral
//! lattices of test data.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{
    in_z_inv_p, parse_q, ppow, q, q_str, reduce_int, residue, smith_normal_form, val_opt, GElement,
    Mat2, Q,
};

/// Default bound on the size of finite enumerations.
pub const DEFAULT_CEILING: u64 = 2_000_000;

/// `(a + p^k Z_p) x (b + p^l Z_p)`, with `a`, `b` reduced.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PBox {
    pub a: Q,
    pub k: i64,
    pub b: Q,
    pub l: i64,
}

impl PBox {
    pub fn new(p: u64, a: Q, k: i64, b: Q, l: i64) -> Self {
        PBox { a: residue(p, &a, k), k, b: residue(p, &b, l), l }
    }

    pub fn contains(&self, p: u64, v: (&Q, &Q)) -> bool {
        let inside = |x: &Q, c: &Q, k: i64| val_opt(p, &(x - c)).is_none_or(|e| e >= k);
        inside(v.0, &self.a, self.k) && inside(v.1, &self.b, self.l)
    }

    /// The least `j` with the box inside `p^j Z_p^2`.
    pub fn radius(&self, p: u64) -> i64 {
        let r = |c: &Q, k: i64| val_opt(p, c).map_or(k, |v| v.min(k));
        r(&self.a, self.k).min(r(&self.b, self.l))
    }

    pub fn measure(&self, p: u64) -> Q {
        ppow(p, -(self.k + self.l))
    }
}

/// Additive measure of `(c + p^k Z_p) ∩ p^s Z_p`.
fn mu_coset_ball(p: u64, c: &Q, k: i64, s: i64) -> Q {
    let cv = val_opt(p, c);
    if k >= s {
        if cv.is_none_or(|v| v >= s) {
            ppow(p, -k)
        } else {
            Q::zero()
        }
    } else if cv.is_none_or(|v| v >= k) {
        ppow(p, -s)
    } else {
        Q::zero()
    }
}

/// Subsets of `Q_p` of the form `p^s Z_p` or `p^s Z_p^x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shell1 {
    Ball(i64),
    Units(i64),
}

impl Shell1 {
    fn measure_in(&self, p: u64, c: &Q, k: i64) -> Q {
        match *self {
            Shell1::Ball(s) => mu_coset_ball(p, c, k, s),
            Shell1::Units(s) => mu_coset_ball(p, c, k, s) - mu_coset_ball(p, c, k, s + 1),
        }
    }

    fn measure(&self, p: u64) -> Q {
        match *self {
            Shell1::Ball(s) => ppow(p, -s),
            Shell1::Units(s) => ppow(p, -s) - ppow(p, -s - 1),
        }
    }
}

/// A finite combination of boxes.
#[derive(Clone, Debug)]
pub struct SchwartzFunction {
    pub p: u64,
    pub parts: Vec<(PBox, Q)>,
}

impl PartialEq for SchwartzFunction {
    fn eq(&self, o: &Self) -> bool {
        let d = self.depth().max(o.depth());
        self.p == o.p && self.cells(d) == o.cells(d)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxJson {
    pub a: String,
    pub k: i64,
    pub b: String,
    pub l: i64,
    pub value: String,
}

impl SchwartzFunction {
    pub fn zero(p: u64) -> Self {
        SchwartzFunction { p, parts: Vec::new() }
    }

    pub fn from_boxes(p: u64, parts: Vec<(PBox, Q)>) -> Self {
        SchwartzFunction { p, parts: parts.into_iter().filter(|(_, v)| !v.is_zero()).collect() }
    }

    pub fn box_indicator(p: u64, a: Q, k: i64, b: Q, l: i64) -> Self {
        SchwartzFunction::from_boxes(p, vec![(PBox::new(p, a, k, b, l), Q::one())])
    }

    /// `ch(Z_p^2)`.
    pub fn phi0(p: u64) -> Self {
        SchwartzFunction::box_indicator(p, Q::zero(), 0, Q::zero(), 0)
    }

    /// `ch(p^k Z_p x (1 + p^k Z_p))`.
    pub fn phi_pk(p: u64, k: i64) -> Self {
        SchwartzFunction::box_indicator(p, Q::zero(), k, q(1), k)
    }

    /// `ch(p^2 Z_p x (1 + p^2 Z_p))`.
    pub fn phi_p2(p: u64) -> Self {
        SchwartzFunction::phi_pk(p, 2)
    }

    pub fn scale(&self, s: &Q) -> Self {
        SchwartzFunction::from_boxes(
            self.p,
            self.parts.iter().map(|(b, v)| (b.clone(), v * s)).collect(),
        )
    }

    pub fn add(&self, o: &SchwartzFunction) -> Self {
        let mut parts = self.parts.clone();
        parts.extend(o.parts.iter().cloned());
        SchwartzFunction::from_boxes(self.p, parts).normalized()
    }

    /// Finest box exponent; the function is constant on `p^depth`-squares.
    pub fn depth(&self) -> i64 {
        self.parts.iter().map(|(b, _)| b.k.max(b.l)).max().unwrap_or(0)
    }

    /// Least `j` with support inside `p^j Z_p^2`.
    pub fn radius(&self) -> i64 {
        self.parts.iter().map(|(b, _)| b.radius(self.p)).min().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.cells(self.depth()).is_empty()
    }

    /// Values on the square cells `p^d`-cosets, keyed by reduced corner.
    pub fn cells(&self, d: i64) -> BTreeMap<(Q, Q), Q> {
        let p = self.p;
        let mut out: BTreeMap<(Q, Q), Q> = BTreeMap::new();
        for (bx, v) in &self.parts {
            assert!(bx.k <= d && bx.l <= d, "refinement below box size");
            let nx = p.pow((d - bx.k) as u32);
            let ny = p.pow((d - bx.l) as u32);
            let sx = ppow(p, bx.k);
            let sy = ppow(p, bx.l);
            for i in 0..nx {
                let x = residue(p, &(&bx.a + &sx * q(i as i64)), d);
                for j in 0..ny {
                    let y = residue(p, &(&bx.b + &sy * q(j as i64)), d);
                    *out.entry((x.clone(), y)).or_insert_with(Q::zero) += v;
                }
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// Merge into disjoint square boxes at the common depth.
    pub fn normalized(&self) -> Self {
        let d = self.depth();
        let parts = self
            .cells(d)
            .into_iter()
            .map(|((a, b), v)| (PBox { a, k: d, b, l: d }, v))
            .collect();
        SchwartzFunction { p: self.p, parts }
    }

    pub fn evaluate(&self, v: (&Q, &Q)) -> Q {
        self.parts
            .iter()
            .filter(|(b, _)| b.contains(self.p, v))
            .fold(Q::zero(), |acc, (_, x)| acc + x)
    }

    pub fn value_at_origin(&self) -> Q {
        self.evaluate((&Q::zero(), &Q::zero()))
    }

    /// Distinct nonzero values taken.
    pub fn values(&self) -> Vec<Q> {
        let mut v: Vec<Q> = self.cells(self.depth()).into_values().collect();
        v.sort();
        v.dedup();
        v
    }

    /// `v -> φ(v h)` for row vectors `v`.
    pub fn act(&self, h: &Mat2) -> Self {
        let p = self.p;
        let hinv = h.inverse();
        let snf = smith_normal_form(p, &hinv);
        let spread = p.pow((snf.c - snf.a) as u32);
        let mut parts = Vec::new();
        for (bx, v) in self.normalized().parts {
            let k = bx.k;
            let (cx, cy) = hinv.apply_row((&bx.a, &bx.b));
            let step = ppow(p, k + snf.a);
            for s in 0..spread {
                let t = &step * q(s as i64);
                let (dx, dy) = snf.k2.apply_row((&t, &Q::zero()));
                parts.push((PBox::new(p, &cx + dx, k + snf.c, &cy + dy, k + snf.c), v.clone()));
            }
        }
        SchwartzFunction::from_boxes(p, parts).normalized()
    }

    pub fn stabilizer_contains(&self, h: &Mat2) -> bool {
        self.act(h) == *self
    }

    /// `∫_{A x B} φ dμ` for product shells `A`, `B`.
    pub fn integrate_product(&self, sx: Shell1, sy: Shell1) -> Q {
        let p = self.p;
        self.parts.iter().fold(Q::zero(), |acc, (bx, v)| {
            acc + v * sx.measure_in(p, &bx.a, bx.k) * sy.measure_in(p, &bx.b, bx.l)
        })
    }

    /// `∫_{p^j (Z_p^2 - p Z_p^2)} φ dμ`.
    pub fn integrate_primitive_shell(&self, j: i64) -> Q {
        self.integrate_product(Shell1::Ball(j), Shell1::Ball(j))
            - self.integrate_product(Shell1::Ball(j + 1), Shell1::Ball(j + 1))
    }

    pub fn to_json(&self) -> Vec<BoxJson> {
        self.normalized()
            .parts
            .iter()
            .map(|(b, v)| BoxJson { a: q_str(&b.a), k: b.k, b: q_str(&b.b), l: b.l, value: q_str(v) })
            .collect()
    }

    pub fn from_json(p: u64, boxes: &[BoxJson]) -> Result<Self> {
        let mut parts = Vec::new();
        for b in boxes {
            parts.push((PBox::new(p, parse_q(&b.a)?, b.k, parse_q(&b.b)?, b.l), parse_q(&b.value)?));
        }
        Ok(SchwartzFunction::from_boxes(p, parts))
    }
}

/// Measure of a product shell, exposed for the orbit computations.
pub fn shell_measure(p: u64, sx: Shell1, sy: Shell1) -> Q {
    sx.measure(p) * sy.measure(p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    /// `GL2(Z_p) x GL2(Z_p)`.
    Full,
    /// The subgroup with `det(g2) = 1 mod p`.
    DetP,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    S,
    S0,
}

/// `coeff * [φ ⊗ ch(g U)]`.
#[derive(Clone, Debug)]
pub struct LatticeElement {
    pub coeff: Q,
    pub phi: SchwartzFunction,
    pub g: GElement,
    pub level: Level,
}

impl LatticeElement {
    pub fn new(coeff: Q, phi: SchwartzFunction, g: GElement, level: Level) -> Self {
        LatticeElement { coeff, phi, g, level }
    }
}

/// Data shared by the stabilizer and `Ξ` computations: with
/// `g1^{-1} g2 = k1 diag(p^a, p^c) k2`, `C = g1 k1` conjugates
/// `H ∩ g G° g^{-1}` onto `Γ_0(p^e)`, `e = c - a`.
#[derive(Clone, Debug)]
pub struct Conjugator {
    pub c: Mat2,
    pub e: i64,
}

impl Conjugator {
    pub fn of(p: u64, g: &GElement) -> Self {
        let snf = smith_normal_form(p, &(&g.s1.inverse() * &g.s2));
        Conjugator { c: &g.s1 * &snf.k1, e: snf.c - snf.a }
    }
}

/// `[GL2(Z_p) : Γ_0(p^e)]^{-1}`.
pub fn gamma0_volume(p: u64, e: i64) -> Q {
    if e <= 0 {
        Q::one()
    } else {
        Q::new(1.into(), (p.pow((e - 1) as u32) * (p + 1)).into())
    }
}

fn gl2_order(p: u64, m: u32) -> u64 {
    p.pow(4 * (m - 1)) * (p * p - 1) * (p * p - p)
}

/// Haar volume of `Stab(φ) ∩ {h : (h, h) ∈ g U g^{-1}}`, `vol(GL2(Z_p)) = 1`.
pub fn volume_stab_intersection(
    phi: &SchwartzFunction,
    g: &GElement,
    level: Level,
    ceiling: u64,
) -> Result<Q> {
    let p = phi.p;
    let conj = Conjugator::of(p, g);
    let f = phi.act(&conj.c.inverse());
    if f.is_zero() {
        return Ok(gamma0_volume(p, conj.e)
            * if level == Level::DetP { Q::new(1.into(), ((p - 1) as i64).into()) } else { Q::one() });
    }
    let jmin = f.radius();
    let d = f.depth().max(jmin);
    let r = (d - jmin) as u32;
    let m = 1.max(conj.e as u32).max(r);
    let size = (p as u128).pow(4 * m);
    if size > ceiling as u128 {
        return Err(Error::resource(format!(
            "stabilizer enumeration needs modulus p^{m} (p^{} residues), ceiling {ceiling}",
            4 * m
        )));
    }
    // Values of F on p^jmin (X, Y), X, Y mod p^r.
    let pr = p.pow(r);
    let scale = ppow(p, jmin);
    let mut ids: Vec<Q> = Vec::new();
    let mut grid = vec![0usize; (pr * pr) as usize];
    let mut support = Vec::new();
    for x in 0..pr {
        for y in 0..pr {
            let v = f.evaluate((&(&scale * q(x as i64)), &(&scale * q(y as i64))));
            let id = match ids.iter().position(|w| *w == v) {
                Some(i) => i,
                None => {
                    ids.push(v.clone());
                    ids.len() - 1
                }
            };
            grid[(x * pr + y) as usize] = id;
            if !v.is_zero() {
                support.push((x, y, id));
            }
        }
    }
    let pm = p.pow(m);
    let pe = p.pow(conj.e.max(0) as u32);
    #[cfg(feature = "parallel")]
    let rows = (0..pm).into_par_iter();
    #[cfg(not(feature = "parallel"))]
    let rows = (0..pm).into_iter();
    let count: u64 = rows
        .map(|a| {
            let mut n = 0u64;
            for b in 0..pm {
                for c in (0..pm).step_by(pe as usize) {
                    for dd in 0..pm {
                        let det = ((a * dd) % p + p - (b * c) % p) % p;
                        let ok_det = match level {
                            Level::Full => det != 0,
                            Level::DetP => det == 1,
                        };
                        if !ok_det {
                            continue;
                        }
                        let stable = support.iter().all(|&(x, y, id)| {
                            let nx = (x * a + y * c) % pr.max(1);
                            let ny = (x * b + y * dd) % pr.max(1);
                            grid[(nx * pr + ny) as usize] == id
                        });
                        if stable {
                            n += 1;
                        }
                    }
                }
            }
            n
        })
        .sum();
    Ok(Q::new(count.into(), gl2_order(p, m).into()))
}

/// Why a lattice element failed certification, if it did.
pub fn membership_failure(el: &LatticeElement, variant: Variant, ceiling: u64) -> Result<Option<String>> {
    let p = el.phi.p;
    if variant == Variant::S0 && !el.phi.value_at_origin().is_zero() {
        return Ok(Some("φ does not vanish at the origin".into()));
    }
    let vol = volume_stab_intersection(&el.phi, &el.g, el.level, ceiling)?;
    for v in el.phi.values() {
        let w = &el.coeff * &v * &vol;
        if !in_z_inv_p(p, &w) {
            return Ok(Some(format!(
                "value {} is not in vol^-1 Z[1/p] (vol = {})",
                q_str(&(&el.coeff * &v)),
                q_str(&vol)
            )));
        }
    }
    Ok(None)
}

/// Certify a presented list generator by generator.
pub fn lattice_membership(elements: &[LatticeElement], variant: Variant, ceiling: u64) -> Result<bool> {
    if let Some(first) = elements.first() {
        if elements.iter().any(|e| e.level != first.level) {
            return Err(Error::domain("lattice elements at mixed levels"));
        }
    }
    for el in elements {
        if membership_failure(el, variant, ceiling)?.is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Reduce a `Z_p`-integral rational to `Z/p^k`.
pub fn residue_int(p: u64, x: &Q, k: u32) -> u64 {
    reduce_int(p, x, k)
}
