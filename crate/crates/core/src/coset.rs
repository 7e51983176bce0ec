//! Double cosets `P \ G / G°`, the Hecke action on compactly supported
//! `P`-invariant functions, and the maps `Ξ`, `Ξ_c`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hecke::{HeckeElement, Mono};
use crate::padic::{
    iwasawa_decompose, ppow, q, q_str, smith_normal_form, solve_double_coset, val_opt,
    GElement, Mat2, Q,
};
use crate::qsqrt::QSqrtP;
use crate::schwartz::{gamma0_volume, shell_measure, Conjugator, LatticeElement, Level, SchwartzFunction, Shell1};

/// The double coset of `p^r0 (p^r1 [[p^m, p^-n], [0, 1]], 1)`, with the
/// upper-right entry `0` when `n = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CanonicalCoset {
    pub r0: i64,
    pub r1: i64,
    pub m: i64,
    pub n: i64,
}

impl fmt::Display for CanonicalCoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.r0, self.r1, self.m, self.n)
    }
}

impl CanonicalCoset {
    pub const BASE: CanonicalCoset = CanonicalCoset { r0: 0, r1: 0, m: 0, n: 0 };

    pub fn new(r0: i64, r1: i64, m: i64, n: i64) -> Self {
        CanonicalCoset { r0, r1, m, n }
    }

    pub fn is_valid(&self) -> bool {
        self.n == 0 || (self.n >= 1 && self.m > -self.n)
    }

    /// The slot-one matrix `p^r1 [[p^m, p^-n], [0, 1]]`.
    pub fn gamma(&self, p: u64) -> Mat2 {
        let y = if self.n == 0 { Q::zero() } else { ppow(p, -self.n) };
        Mat2::new(ppow(p, self.m), y, Q::zero(), q(1)).scale(&ppow(p, self.r1))
    }

    pub fn representative(&self, p: u64) -> GElement {
        let z = ppow(p, self.r0);
        GElement::new(self.gamma(p).scale(&z), Mat2::scalar(z))
    }
}

/// Normal form of `P g G°`.
pub fn canonicalize(p: u64, g: &GElement) -> CanonicalCoset {
    let iw2 = iwasawa_decompose(p, &g.s2);
    let x2 = Mat2::new(
        ppow(p, iw2.t1 - iw2.t2),
        &iw2.y * ppow(p, -iw2.t2),
        Q::zero(),
        q(1),
    );
    let gamma = (&x2.inverse() * &g.s1).scale(&ppow(p, -iw2.t2));
    let iw = iwasawa_decompose(p, &gamma);
    let m = iw.t1 - iw.t2;
    let y = &iw.y * ppow(p, -iw.t2);
    let n = match val_opt(p, &y) {
        Some(v) if v < m.min(0) => -v,
        _ => 0,
    };
    CanonicalCoset { r0: iw2.t2, r1: iw.t2, m, n }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PVariant {
    P,
    P1,
}

/// `vol_P(P ∩ g G° g^{-1})` for the representative `g` of `x`, with
/// `d^x a db` normalized by `vol(Z_p^x) = vol(Z_p) = 1`.
pub fn volume_p_cap(p: u64, x: &CanonicalCoset, variant: PVariant) -> Q {
    let pm1 = q(p as i64 - 1);
    if x.n >= 1 {
        return Q::one() / (pm1 * ppow(p, x.m + x.n - 1));
    }
    let base = ppow(p, -x.m.max(0));
    match variant {
        PVariant::P => base,
        PVariant::P1 => base / pm1,
    }
}

/// The same volume by counting residues of `[[a, b], [0, 1]]`.
pub fn volume_p_cap_enumerated(p: u64, x: &CanonicalCoset, variant: PVariant) -> Q {
    // g^{-1} [[a,b],[0,1]] g is integral iff (a - 1) y + b ∈ p^m Z_p, where
    // y is the upper-right entry; with y = p^-n this reads
    // (a - 1) + p^n b ∈ p^{m+n} Z_p.
    let big = (x.m + x.n).max(x.m).max(1) as u32;
    let pl = p.pow(big) as i64;
    let pn = p.pow(x.n as u32) as i64;
    let target = p.pow((x.m + x.n).max(0) as u32) as i64;
    let target_b = p.pow(x.m.max(0) as u32) as i64;
    let mut count: i64 = 0;
    for a in 0..pl {
        if a % p as i64 == 0 {
            continue;
        }
        if variant == PVariant::P1 && a % p as i64 != 1 % p as i64 {
            continue;
        }
        for b in 0..pl {
            let ok = if x.n == 0 {
                b % target_b == 0
            } else {
                ((a - 1) + pn * b).rem_euclid(target) == 0
            };
            if ok {
                count += 1;
            }
        }
    }
    let units = (p as i64 - 1) * pl / p as i64;
    Q::new(count.into(), (units * pl).into())
}

/// `vol(P° γ0 GL2(Z_p))`.
pub fn volume_orbit(p: u64, x: &CanonicalCoset) -> Q {
    if x.n >= 1 {
        q(p as i64 - 1) * ppow(p, x.m + x.n - 1)
    } else {
        ppow(p, x.m.max(0))
    }
}

/// A finitely supported function on `P \ G / G°`.
#[derive(Clone, PartialEq, Eq)]
pub struct PGCosetFunction {
    pub p: u64,
    pub support: BTreeMap<CanonicalCoset, QSqrtP>,
}

impl fmt::Debug for PGCosetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.support.iter().map(|(x, v)| format!("{x}: {v}")).collect();
        write!(f, "{{{}}}", items.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetValueJson {
    pub r0: i64,
    pub r1: i64,
    pub m: i64,
    pub n: i64,
    pub rat: String,
    pub irr: String,
}

impl PGCosetFunction {
    pub fn zero(p: u64) -> Self {
        PGCosetFunction { p, support: BTreeMap::new() }
    }

    pub fn delta(p: u64, x: CanonicalCoset, v: QSqrtP) -> Self {
        let mut f = PGCosetFunction::zero(p);
        f.add_at(x, &v);
        f
    }

    pub fn indicator(p: u64, x: CanonicalCoset) -> Self {
        PGCosetFunction::delta(p, x, QSqrtP::one(p))
    }

    /// `f0 = ch(P G°)`.
    pub fn f0(p: u64) -> Self {
        PGCosetFunction::indicator(p, CanonicalCoset::BASE)
    }

    pub fn get(&self, x: &CanonicalCoset) -> QSqrtP {
        self.support.get(x).cloned().unwrap_or_else(|| QSqrtP::zero(self.p))
    }

    pub fn add_at(&mut self, x: CanonicalCoset, v: &QSqrtP) {
        if v.is_zero() {
            return;
        }
        let e = self.support.entry(x).or_insert_with(|| QSqrtP::zero(v.p));
        *e += v;
        if e.is_zero() {
            self.support.remove(&x);
        }
    }

    pub fn add(&self, o: &PGCosetFunction) -> Self {
        let mut r = self.clone();
        for (x, v) in &o.support {
            r.add_at(*x, v);
        }
        r
    }

    pub fn sub(&self, o: &PGCosetFunction) -> Self {
        self.add(&o.scale(&QSqrtP::int(self.p, -1)))
    }

    pub fn scale(&self, s: &QSqrtP) -> Self {
        let mut r = PGCosetFunction::zero(self.p);
        for (x, v) in &self.support {
            r.add_at(*x, &(v * s));
        }
        r
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    /// Evaluate at an arbitrary group element.
    pub fn eval_at(&self, g: &GElement) -> QSqrtP {
        self.get(&canonicalize(self.p, g))
    }

    pub fn to_json(&self) -> Vec<CosetValueJson> {
        self.support
            .iter()
            .map(|(x, v)| CosetValueJson {
                r0: x.r0,
                r1: x.r1,
                m: x.m,
                n: x.n,
                rat: q_str(&v.rat),
                irr: q_str(&v.irr),
            })
            .collect()
    }
}

/// Right translations `x -> x r` used by the generators, keyed for caching.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Move {
    /// Central `p^e` in one slot.
    Center { slot: u8, e: i64 },
    /// `[[p, beta], [0, 1]]` (`beta < p`) or `[[1, 0], [0, p]]` (`beta = p`).
    THecke { slot: u8, beta: u64 },
    /// `p^{-1}` times a `THecke` representative: right coset
    /// representatives of the inverse double coset.
    THeckeInv { slot: u8, beta: u64 },
}

fn move_matrix(p: u64, mv: Move) -> (u8, Mat2) {
    let t_rep = |beta: u64| {
        if beta < p {
            Mat2::from_ints(p as i64, beta as i64, 0, 1)
        } else {
            Mat2::from_ints(1, 0, 0, p as i64)
        }
    };
    match mv {
        Move::Center { slot, e } => (slot, Mat2::scalar(ppow(p, e))),
        Move::THecke { slot, beta } => (slot, t_rep(beta)),
        Move::THeckeInv { slot, beta } => (slot, t_rep(beta).scale(&ppow(p, -1))),
    }
}

type MoveCache = HashMap<(u64, CanonicalCoset, Move), CanonicalCoset>;

fn move_cache() -> &'static Mutex<MoveCache> {
    static CACHE: OnceLock<Mutex<MoveCache>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn apply_move(p: u64, x: &CanonicalCoset, mv: Move) -> CanonicalCoset {
    if let Some(y) = move_cache().lock().unwrap().get(&(p, *x, mv)) {
        return *y;
    }
    let (slot, r) = move_matrix(p, mv);
    let g = x.representative(p);
    let moved = if slot == 1 {
        GElement::new(&g.s1 * &r, g.s2)
    } else {
        GElement::new(g.s1, &g.s2 * &r)
    };
    let y = canonicalize(p, &moved);
    move_cache().lock().unwrap().insert((p, *x, mv), y);
    y
}

/// `(S_slot^e f)(x) = f(x p^e)`, slot-wise.
fn act_center(f: &PGCosetFunction, slot: u8, e: i64) -> PGCosetFunction {
    if e == 0 {
        return f.clone();
    }
    let mut out = PGCosetFunction::zero(f.p);
    for (y, v) in &f.support {
        out.add_at(apply_move(f.p, y, Move::Center { slot, e: -e }), v);
    }
    out
}

/// `(T_slot f)(x) = Σ_r f(x r)` over the `p + 1` right coset representatives.
fn act_t(f: &PGCosetFunction, slot: u8) -> PGCosetFunction {
    let p = f.p;
    let mut candidates = BTreeSet::new();
    for y in f.support.keys() {
        for beta in 0..=p {
            candidates.insert(apply_move(p, y, Move::THeckeInv { slot, beta }));
        }
    }
    let mut out = PGCosetFunction::zero(p);
    for x in candidates {
        let mut acc = QSqrtP::zero(p);
        for beta in 0..=p {
            acc += &f.get(&apply_move(p, &x, Move::THecke { slot, beta }));
        }
        out.add_at(x, &acc);
    }
    out
}

/// The module action of the Hecke algebra.
pub fn hecke_act(theta: &HeckeElement, f: &PGCosetFunction) -> PGCosetFunction {
    let p = f.p;
    let mut tpowers: HashMap<(u32, u32), PGCosetFunction> = HashMap::new();
    tpowers.insert((0, 0), f.clone());
    let mut out = PGCosetFunction::zero(p);
    for (m, c) in &theta.terms {
        let tf = t_power(&mut tpowers, m.t1, m.t2);
        let shifted = act_center(&act_center(&tf, 1, m.e1), 2, m.e2);
        out = out.add(&shifted.scale(c));
    }
    out
}

fn t_power(cache: &mut HashMap<(u32, u32), PGCosetFunction>, t1: u32, t2: u32) -> PGCosetFunction {
    if let Some(f) = cache.get(&(t1, t2)) {
        return f.clone();
    }
    let f = if t2 > 0 {
        act_t(&t_power(cache, t1, t2 - 1), 2)
    } else {
        act_t(&t_power(cache, t1 - 1, 0), 1)
    };
    cache.insert((t1, t2), f.clone());
    f
}

/// Apply a single monomial with unit coefficient.
pub fn hecke_act_mono(m: Mono, f: &PGCosetFunction) -> PGCosetFunction {
    hecke_act(&HeckeElement::monomial(m, QSqrtP::one(f.p)), f)
}

/// Pointwise evaluator of `Ξ` for one generator `φ ⊗ ch(g G°)`.
#[derive(Clone, Debug)]
pub struct XiGenerator {
    pub p: u64,
    pub g: GElement,
    pub conj: Conjugator,
    /// `k1` of the Cartan decomposition of `g1^{-1} g2`.
    pub k1: Mat2,
    /// `F(w) = φ(w C^{-1})`.
    pub f: SchwartzFunction,
    /// Cartan divisors of `g2^{-1} g1`.
    pub cartan: (i64, i64),
}

impl XiGenerator {
    pub fn new(phi: &SchwartzFunction, g: &GElement) -> Self {
        let p = phi.p;
        let conj = Conjugator::of(p, g);
        let k1 = &g.s1.inverse() * &conj.c;
        let f = phi.act(&conj.c.inverse());
        let snf = smith_normal_form(p, &(&g.s2.inverse() * &g.s1));
        XiGenerator { p, g: g.clone(), conj, k1, f, cartan: (snf.a, snf.c) }
    }

    /// `v1 = (0, 1) x1 k k1` at `r0 = 0`, if the coset meets the support.
    fn base_vector(&self, x: &CanonicalCoset) -> Option<(Q, Q)> {
        let gamma = x.gamma(self.p);
        let b = &self.g.s1.inverse() * &self.g.s2;
        let k = solve_double_coset(self.p, &gamma, &b)?;
        let m = &(&gamma * &k) * &self.k1;
        Some(m.apply_row((&Q::zero(), &q(1))))
    }

    /// `Ξ(x)`.
    pub fn eval(&self, x: &CanonicalCoset) -> Q {
        let p = self.p;
        let Some((w1, w2)) = self.base_vector(x) else {
            return Q::zero();
        };
        let z = ppow(p, x.r0);
        let (w1, w2) = (&w1 * &z, &w2 * &z);
        let j = [&w1, &w2].iter().filter_map(|c| val_opt(p, c)).min().unwrap();
        let e = self.conj.e;
        let t = val_opt(p, &w1).map_or(e, |v| (v - j).min(e));
        let (sx, sy, primitive) = if e == 0 {
            (Shell1::Ball(j), Shell1::Ball(j), true)
        } else if t == 0 {
            (Shell1::Units(j), Shell1::Ball(j), false)
        } else if t < e {
            (Shell1::Units(j + t), Shell1::Units(j), false)
        } else {
            (Shell1::Ball(j + e), Shell1::Units(j), false)
        };
        let (integral, measure) = if primitive {
            (
                self.f.integrate_primitive_shell(j),
                shell_measure(p, sx, sy) - shell_measure(p, Shell1::Ball(j + 1), Shell1::Ball(j + 1)),
            )
        } else {
            (self.f.integrate_product(sx, sy), shell_measure(p, sx, sy))
        };
        gamma0_volume(p, e) * integral / measure
    }

    pub fn eval_element(&self, x: &GElement) -> Q {
        self.eval(&canonicalize(self.p, x))
    }

    /// `(r1, m, n)` whose cosets can meet the support.
    pub fn candidate_types(&self) -> Vec<(i64, i64, i64)> {
        let (a, c) = self.cartan;
        let lambda = c - a;
        let mut out = vec![];
        for m in [lambda, -lambda] {
            out.push((a - m.min(0), m, 0));
        }
        for n in 1..lambda {
            out.push((a + n, lambda - 2 * n, n));
        }
        out.sort();
        out.dedup();
        out
    }

    /// Range of `r0` where `Ξ_c` may be nonzero for the type `(r1, m, n)`.
    pub fn r0_window(&self, r1: i64, m: i64, n: i64) -> Option<(i64, i64)> {
        let (w1, w2) = self.base_vector(&CanonicalCoset::new(0, r1, m, n))?;
        let j0 = [&w1, &w2].iter().filter_map(|c| val_opt(self.p, c)).min().unwrap();
        let jmin = self.f.radius();
        let d = self.f.depth().max(jmin);
        Some((jmin - j0, d - j0))
    }

    pub fn eval_c(&self, x: &CanonicalCoset) -> Q {
        let prev = CanonicalCoset { r0: x.r0 - 1, ..*x };
        self.eval(x) - self.eval(&prev)
    }
}

/// Widest window margin tried before reporting a window error.
pub const MAX_MARGIN: i64 = 6;

/// `Ξ_c(δ) = (1 - S_p^{-1}) Ξ(δ)` as a finite function.
pub fn xi_c(p: u64, delta: &[(Q, SchwartzFunction, GElement)]) -> Result<PGCosetFunction> {
    let mut out = PGCosetFunction::zero(p);
    for (coeff, phi, g) in delta {
        if coeff.is_zero() || phi.is_zero() {
            continue;
        }
        let gen = XiGenerator::new(phi, g);
        for (r1, m, n) in gen.candidate_types() {
            let Some((mut lo, mut hi)) = gen.r0_window(r1, m, n) else {
                continue;
            };
            let at = |r0| gen.eval_c(&CanonicalCoset::new(r0, r1, m, n));
            let mut margin = 0;
            loop {
                let shell_clear = (1..=2).all(|s| at(lo - s).is_zero() && at(hi + s).is_zero());
                if shell_clear {
                    break;
                }
                margin += 1;
                if margin > MAX_MARGIN {
                    return Err(Error::Window(format!(
                        "type (r1,m,n)=({r1},{m},{n}) still nonzero beyond r0 in [{lo},{hi}]"
                    )));
                }
                lo -= 1;
                hi += 1;
            }
            for r0 in lo..=hi {
                let v = at(r0);
                out.add_at(CanonicalCoset::new(r0, r1, m, n), &QSqrtP::from_q(p, v * coeff));
            }
        }
    }
    Ok(out)
}

/// `Ξ_c` of a list of lattice elements at level `Full`.
pub fn xi_c_lattice(p: u64, delta: &[LatticeElement]) -> Result<PGCosetFunction> {
    if delta.iter().any(|e| e.level != Level::Full) {
        return Err(Error::domain("xi_c expects level Full data; apply trace_level first"));
    }
    let data: Vec<_> = delta.iter().map(|e| (e.coeff.clone(), e.phi.clone(), e.g.clone())).collect();
    xi_c(p, &data)
}

/// `Tr(φ ⊗ ch(g G°[p])) = φ ⊗ ch(g G°)`.
pub fn trace_level(delta: &[LatticeElement]) -> Vec<LatticeElement> {
    delta
        .iter()
        .map(|e| LatticeElement { level: Level::Full, ..e.clone() })
        .collect()
}

/// Invariants to coinvariants: divide each value by `vol_P(P ∩ g G° g^{-1})`.
pub fn phi_iso(f: &PGCosetFunction) -> Vec<(QSqrtP, CanonicalCoset)> {
    f.support
        .iter()
        .map(|(x, v)| (v.scale(&(Q::one() / volume_p_cap(f.p, x, PVariant::P))), *x))
        .collect()
}

pub fn psi_iso(p: u64, coinv: &[(QSqrtP, CanonicalCoset)]) -> PGCosetFunction {
    let mut f = PGCosetFunction::zero(p);
    for (c, x) in coinv {
        f.add_at(*x, &c.scale(&volume_p_cap(p, x, PVariant::P)));
    }
    f
}
