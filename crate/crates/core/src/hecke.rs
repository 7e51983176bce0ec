//! The spherical Hecke algebra of `GL2 x GL2` as Laurent polynomials in
//! `S1^{±1}, T1, S2^{±1}, T2` with coefficients in `Q(sqrt p)`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{in_z_inv_p, mod_inverse, parse_q, q, q_str, Q};
use crate::qsqrt::QSqrtP;

/// `S1^e1 T1^t1 S2^e2 T2^t2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Mono {
    pub e1: i64,
    pub t1: u32,
    pub e2: i64,
    pub t2: u32,
}

impl Mono {
    pub const ONE: Mono = Mono { e1: 0, t1: 0, e2: 0, t2: 0 };

    pub fn new(e1: i64, t1: u32, e2: i64, t2: u32) -> Self {
        Mono { e1, t1, e2, t2 }
    }

    pub fn mul(&self, o: &Mono) -> Mono {
        Mono::new(self.e1 + o.e1, self.t1 + o.t1, self.e2 + o.e2, self.t2 + o.t2)
    }

    pub fn dual(&self) -> Mono {
        Mono::new(-self.e1 - self.t1 as i64, self.t1, -self.e2 - self.t2 as i64, self.t2)
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct HeckeElement {
    pub p: u64,
    pub terms: BTreeMap<Mono, QSqrtP>,
}

impl fmt::Debug for HeckeElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for HeckeElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for (name, e) in [("S1", m.e1), ("T1", m.t1 as i64), ("S2", m.e2), ("T2", m.t2 as i64)] {
                match e {
                    0 => {}
                    1 => write!(f, "*{name}")?,
                    _ => write!(f, "*{name}^{e}")?,
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub e1: i64,
    pub t1: u32,
    pub e2: i64,
    pub t2: u32,
    pub rat: String,
    pub irr: String,
}

impl HeckeElement {
    pub fn zero(p: u64) -> Self {
        HeckeElement { p, terms: BTreeMap::new() }
    }

    pub fn constant(c: QSqrtP) -> Self {
        HeckeElement::monomial(Mono::ONE, c)
    }

    pub fn from_int(p: u64, n: i64) -> Self {
        HeckeElement::constant(QSqrtP::int(p, n))
    }

    pub fn one(p: u64) -> Self {
        HeckeElement::from_int(p, 1)
    }

    pub fn monomial(m: Mono, c: QSqrtP) -> Self {
        let mut h = HeckeElement::zero(c.p);
        if !c.is_zero() {
            h.terms.insert(m, c);
        }
        h
    }

    /// `S_slot^e`.
    pub fn s(p: u64, slot: u8, e: i64) -> Self {
        let m = if slot == 1 { Mono::new(e, 0, 0, 0) } else { Mono::new(0, 0, e, 0) };
        HeckeElement::monomial(m, QSqrtP::one(p))
    }

    /// `T_slot`.
    pub fn t(p: u64, slot: u8) -> Self {
        let m = if slot == 1 { Mono::new(0, 1, 0, 0) } else { Mono::new(0, 0, 0, 1) };
        HeckeElement::monomial(m, QSqrtP::one(p))
    }

    /// `S_p^e = (S1 S2)^e`.
    pub fn sp(p: u64, e: i64) -> Self {
        HeckeElement::monomial(Mono::new(e, 0, e, 0), QSqrtP::one(p))
    }

    pub fn one_minus_sp(p: u64) -> Self {
        HeckeElement::one(p).sub(&HeckeElement::sp(p, 1))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Mono) -> QSqrtP {
        self.terms.get(m).cloned().unwrap_or_else(|| QSqrtP::zero(self.p))
    }

    pub fn add_term(&mut self, m: Mono, c: &QSqrtP) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(m).or_insert_with(|| QSqrtP::zero(c.p));
        *e += c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, o: &HeckeElement) -> HeckeElement {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(*m, c);
        }
        r
    }

    pub fn sub(&self, o: &HeckeElement) -> HeckeElement {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> HeckeElement {
        self.scale(&QSqrtP::int(self.p, -1))
    }

    pub fn scale(&self, s: &QSqrtP) -> HeckeElement {
        let mut r = HeckeElement::zero(self.p);
        for (m, c) in &self.terms {
            r.add_term(*m, &(c * s));
        }
        r
    }

    pub fn scale_q(&self, s: &Q) -> HeckeElement {
        self.scale(&QSqrtP::from_q(self.p, s.clone()))
    }

    pub fn mul(&self, o: &HeckeElement) -> HeckeElement {
        let mut r = HeckeElement::zero(self.p);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                r.add_term(m1.mul(m2), &(c1 * c2));
            }
        }
        r
    }

    pub fn mul_mono(&self, m: &Mono) -> HeckeElement {
        HeckeElement {
            p: self.p,
            terms: self.terms.iter().map(|(k, c)| (k.mul(m), c.clone())).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> HeckeElement {
        (0..e).fold(HeckeElement::one(self.p), |acc, _| acc.mul(self))
    }

    pub fn sum<'a>(p: u64, items: impl IntoIterator<Item = &'a HeckeElement>) -> HeckeElement {
        items.into_iter().fold(HeckeElement::zero(p), |acc, h| acc.add(h))
    }

    /// `Θ`: `S_i -> α_i β_i`, `T_i -> sqrt(p) (α_i + β_i)`.
    pub fn theta_eval(&self, sat: &SatakeData) -> QSqrtP {
        let p = self.p;
        let s1 = &sat.a1 * &sat.b1;
        let s2 = &sat.a2 * &sat.b2;
        let rp = QSqrtP::sqrt_p(p);
        let t1 = &rp * &(&sat.a1 + &sat.b1);
        let t2 = &rp * &(&sat.a2 + &sat.b2);
        let mut acc = QSqrtP::zero(p);
        for (m, c) in &self.terms {
            let v = c
                * &(&(&s1.pow(m.e1) * &t1.pow(m.t1 as i64)) * &(&s2.pow(m.e2) * &t2.pow(m.t2 as i64)));
            acc += &v;
        }
        acc
    }

    /// The inversion automorphism `S' = S^{-1}`, `T' = S^{-1} T`.
    pub fn dual(&self) -> HeckeElement {
        HeckeElement {
            p: self.p,
            terms: self.terms.iter().map(|(m, c)| (m.dual(), c.clone())).collect(),
        }
    }

    /// Coefficients rational with `p`-power denominators.
    pub fn is_integral(&self) -> bool {
        self.terms
            .values()
            .all(|c| c.is_rational() && in_z_inv_p(self.p, &c.rat))
    }

    /// Exact quotient by `1 - S1 S2`, if it exists.
    pub fn divide_exact(&self) -> Option<HeckeElement> {
        // Monomials sharing (t1, t2, e1 - e2) form a Laurent polynomial in
        // u = S1 S2; divide each class separately.
        let mut classes: BTreeMap<(u32, u32, i64), BTreeMap<i64, QSqrtP>> = BTreeMap::new();
        for (m, c) in &self.terms {
            classes
                .entry((m.t1, m.t2, m.e1 - m.e2))
                .or_default()
                .insert(m.e2, c.clone());
        }
        let mut out = HeckeElement::zero(self.p);
        for ((t1, t2, d), poly) in classes {
            let lo = *poly.keys().next().unwrap();
            let hi = *poly.keys().next_back().unwrap();
            let mut run = QSqrtP::zero(self.p);
            for k in lo..=hi {
                if let Some(c) = poly.get(&k) {
                    run += c;
                }
                if k < hi {
                    out.add_term(Mono::new(k + d, t1, k, t2), &run);
                }
            }
            if !run.is_zero() {
                return None;
            }
        }
        Some(out)
    }

    /// Coefficientwise reduction modulo a prime `ell != p`.
    pub fn reduce_mod_ell(&self, ell: u64) -> Result<BTreeMap<Mono, u64>> {
        if ell == self.p {
            return Err(Error::domain("ell must differ from p"));
        }
        if !self.is_integral() {
            return Err(Error::domain("reduction of a non-integral Hecke element"));
        }
        let mut out = BTreeMap::new();
        for (m, c) in &self.terms {
            let r = reduce_rational_mod(&c.rat, ell)?;
            if r != 0 {
                out.insert(*m, r);
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Vec<TermJson> {
        self.terms
            .iter()
            .map(|(m, c)| TermJson {
                e1: m.e1,
                t1: m.t1,
                e2: m.e2,
                t2: m.t2,
                rat: q_str(&c.rat),
                irr: q_str(&c.irr),
            })
            .collect()
    }

    pub fn from_json(p: u64, terms: &[TermJson]) -> Result<HeckeElement> {
        let mut h = HeckeElement::zero(p);
        for t in terms {
            let c = QSqrtP::new(p, parse_q(&t.rat)?, parse_q(&t.irr)?);
            h.add_term(Mono::new(t.e1, t.t1, t.e2, t.t2), &c);
        }
        Ok(h)
    }

    /// Largest total `T`-degree, used for bounding enumeration.
    pub fn t_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.t1 + m.t2).max().unwrap_or(0)
    }
}

/// Reduce `x` in `Z_(ell)` to `[0, ell)`.
pub fn reduce_rational_mod(x: &Q, ell: u64) -> Result<u64> {
    let l = BigInt::from(ell);
    let inv = mod_inverse(x.denom(), &l)
        .ok_or_else(|| Error::domain(format!("{} is not {}-integral", q_str(x), ell)))?;
    let r = num_integer::Integer::mod_floor(&(x.numer() * inv), &l);
    Ok(r.to_u64().unwrap())
}

fn binom(n: i64, k: i64) -> i64 {
    if k < 0 || k > n {
        return 0;
    }
    let mut r: i64 = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// `𝔰°_n` in slot `slot`, whose `Θ`-image is the Schur polynomial
/// `(α^{n+1} - β^{n+1}) / (α - β)`.
pub fn schur_operator(p: u64, slot: u8, n: i64) -> Result<HeckeElement> {
    match n {
        _ if n < -2 => Err(Error::domain(format!("schur_operator: n = {n} < -2"))),
        -2 => Ok(HeckeElement::s(p, slot, -1).neg()),
        -1 => Ok(HeckeElement::zero(p)),
        _ => {
            let mut h = HeckeElement::zero(p);
            for j in 0..=n / 2 {
                let c = QSqrtP::half_power(p, -(n - 2 * j))
                    .scale(&q((if j % 2 == 0 { 1 } else { -1 }) * binom(n - j, j)));
                let m = if slot == 1 {
                    Mono::new(j, (n - 2 * j) as u32, 0, 0)
                } else {
                    Mono::new(0, 0, j, (n - 2 * j) as u32)
                };
                h.add_term(m, &c);
            }
            Ok(h)
        }
    }
}

/// Coefficients `c0..c4` of the Euler quartic `𝒫_p(x)`.
pub fn euler_polynomial(p: u64) -> [HeckeElement; 5] {
    let inv_p = QSqrtP::from_q(p, Q::new(1.into(), (p as i64).into()));
    let mono = |e1, t1, e2, t2, c: &QSqrtP| HeckeElement::monomial(Mono::new(e1, t1, e2, t2), c.clone());
    let one = QSqrtP::one(p);
    [
        HeckeElement::one(p),
        mono(0, 1, 0, 1, &(-&inv_p)),
        mono(1, 0, 0, 2, &inv_p)
            .add(&mono(0, 2, 1, 0, &inv_p))
            .add(&mono(1, 0, 1, 0, &QSqrtP::int(p, -2))),
        mono(1, 1, 1, 1, &(-&inv_p)),
        mono(2, 0, 2, 0, &one),
    ]
}

/// `𝒫_p(1)`.
pub fn euler_at_one(p: u64) -> HeckeElement {
    HeckeElement::sum(p, euler_polynomial(p).iter())
}

/// `𝒫_p'(1)`, the dual of the Euler factor at one.
pub fn dual_euler_at_one(p: u64) -> HeckeElement {
    euler_at_one(p).dual()
}

/// Coefficients of `𝒫^{(r)}_{p,slot}(x)`, the inverse generalized L-factor.
pub fn gen_l_inverse(p: u64, slot: u8, r: i64) -> Result<[HeckeElement; 3]> {
    if r < 1 {
        return Err(Error::domain(format!("gen_l_inverse: r = {r} < 1")));
    }
    let other = 3 - slot;
    let c1 = HeckeElement::s(p, slot, 1)
        .mul(&HeckeElement::t(p, other))
        .scale(&QSqrtP::half_power(p, -1))
        .mul(&schur_operator(p, slot, r - 2)?)
        .neg();
    let c2 = HeckeElement::s(p, other, 1)
        .mul(&HeckeElement::s(p, slot, 2))
        .mul(&schur_operator(p, slot, r - 3)?);
    Ok([schur_operator(p, slot, r - 1)?, c1, c2])
}

/// `𝒫^{(r)}_{p,slot}(1)`.
pub fn gen_l_inverse_at_one(p: u64, slot: u8, r: i64) -> Result<HeckeElement> {
    Ok(HeckeElement::sum(p, gen_l_inverse(p, slot, r)?.iter()))
}

/// An element of `H[1/(1 - S_p)]` kept as `numer / (1 - S_p)^denom_power`.
#[derive(Clone, Debug)]
pub struct LocalizedHecke {
    pub numer: HeckeElement,
    pub denom_power: u32,
}

impl LocalizedHecke {
    pub fn new(numer: HeckeElement, denom_power: u32) -> Self {
        LocalizedHecke { numer, denom_power }.normalized()
    }

    pub fn from_element(h: HeckeElement) -> Self {
        LocalizedHecke { numer: h, denom_power: 0 }
    }

    /// Cancel exact factors of `1 - S_p`.
    pub fn normalized(mut self) -> Self {
        while self.denom_power > 0 {
            match self.numer.divide_exact() {
                Some(qt) => {
                    self.numer = qt;
                    self.denom_power -= 1;
                }
                None => break,
            }
        }
        self
    }

    pub fn equals(&self, o: &LocalizedHecke) -> bool {
        let p = self.numer.p;
        let oms = HeckeElement::one_minus_sp(p);
        let lhs = self.numer.mul(&oms.pow(o.denom_power));
        let rhs = o.numer.mul(&oms.pow(self.denom_power));
        lhs == rhs
    }

    pub fn theta_eval(&self, sat: &SatakeData) -> QSqrtP {
        let p = self.numer.p;
        let d = (&QSqrtP::one(p) - &sat.omega()).pow(self.denom_power as i64);
        &self.numer.theta_eval(sat) / &d
    }

    pub fn is_integral(&self) -> bool {
        self.numer.is_integral()
    }
}

/// Satake parameters `(α1, β1, α2, β2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SatakeData {
    pub a1: QSqrtP,
    pub b1: QSqrtP,
    pub a2: QSqrtP,
    pub b2: QSqrtP,
}

impl SatakeData {
    pub fn new(a1: QSqrtP, b1: QSqrtP, a2: QSqrtP, b2: QSqrtP) -> Self {
        SatakeData { a1, b1, a2, b2 }
    }

    pub fn from_q(p: u64, v: [Q; 4]) -> Self {
        let [a, b, c, d] = v;
        SatakeData::new(
            QSqrtP::from_q(p, a),
            QSqrtP::from_q(p, b),
            QSqrtP::from_q(p, c),
            QSqrtP::from_q(p, d),
        )
    }

    pub fn from_ints(p: u64, v: [i64; 4]) -> Self {
        SatakeData::from_q(p, v.map(q))
    }

    pub fn p(&self) -> u64 {
        self.a1.p
    }

    pub fn omega1(&self) -> QSqrtP {
        &self.a1 * &self.b1
    }

    pub fn omega2(&self) -> QSqrtP {
        &self.a2 * &self.b2
    }

    /// `ω(p) = α1 β1 α2 β2`.
    pub fn omega(&self) -> QSqrtP {
        &self.omega1() * &self.omega2()
    }

    pub fn slot(&self, slot: u8) -> (&QSqrtP, &QSqrtP) {
        if slot == 1 {
            (&self.a1, &self.b1)
        } else {
            (&self.a2, &self.b2)
        }
    }

    /// The four products `α_i α'_j`.
    pub fn cross(&self) -> [QSqrtP; 4] {
        [
            &self.a1 * &self.a2,
            &self.a1 * &self.b2,
            &self.b1 * &self.a2,
            &self.b1 * &self.b2,
        ]
    }

    /// Nonzero, `α_i != β_i`, `ω != 1` and no cross product equal to one.
    pub fn is_generic(&self) -> bool {
        let p = self.p();
        let one = QSqrtP::one(p);
        [&self.a1, &self.b1, &self.a2, &self.b2].iter().all(|x| !x.is_zero())
            && self.a1 != self.b1
            && self.a2 != self.b2
            && self.omega() != one
            && self.cross().iter().all(|c| *c != one)
    }

    pub fn check_generic(&self) -> Result<()> {
        if self.is_generic() {
            Ok(())
        } else {
            Err(Error::domain("non-generic Satake parameters"))
        }
    }

    /// Small nonzero rationals, rejecting non-generic tuples.
    pub fn random<R: Rng>(p: u64, rng: &mut R) -> Self {
        loop {
            let mut draw = || {
                let n: i64 = loop {
                    let n = rng.gen_range(-6i64..=6);
                    if n != 0 {
                        break n;
                    }
                };
                Q::new(n.into(), rng.gen_range(1i64..=4).into())
            };
            let s = SatakeData::from_q(p, [draw(), draw(), draw(), draw()]);
            if s.is_generic() {
                return s;
            }
        }
    }

    pub fn to_strings(&self) -> [String; 4] {
        [&self.a1, &self.b1, &self.a2, &self.b2].map(|x| x.to_string())
    }
}
