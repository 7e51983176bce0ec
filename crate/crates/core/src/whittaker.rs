//! Spherical Whittaker values, truncated series and rational closed forms
//! in `X = p^{-s}` for the linear form `Λ` and the zeta integral `Z`.

use std::fmt;

use num_traits::{One, Zero};

use crate::coset::{volume_orbit, CanonicalCoset, PGCosetFunction};
use crate::error::{Error, Result};
use crate::hecke::{gen_l_inverse, HeckeElement, SatakeData};
use crate::padic::{ppow, Q};
use crate::qsqrt::QSqrtP;
use crate::schwartz::SchwartzFunction;

/// A Laurent polynomial `Σ coeffs[i] X^{low + i}`.
#[derive(Clone, PartialEq, Eq)]
pub struct LaurentX {
    pub p: u64,
    pub low: i64,
    pub coeffs: Vec<QSqrtP>,
}

impl fmt::Debug for LaurentX {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| format!("({c})X^{}", self.low + i as i64))
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl LaurentX {
    pub fn new(p: u64, low: i64, coeffs: Vec<QSqrtP>) -> Self {
        LaurentX { p, low, coeffs }.trimmed()
    }

    pub fn zero(p: u64) -> Self {
        LaurentX { p, low: 0, coeffs: vec![] }
    }

    pub fn constant(c: QSqrtP) -> Self {
        LaurentX::new(c.p, 0, vec![c])
    }

    pub fn one(p: u64) -> Self {
        LaurentX::constant(QSqrtP::one(p))
    }

    pub fn monomial(c: QSqrtP, e: i64) -> Self {
        LaurentX::new(c.p, e, vec![c])
    }

    fn trimmed(mut self) -> Self {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        self.coeffs.drain(..lead);
        self.low += lead as i64;
        if self.coeffs.is_empty() {
            self.low = 0;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn high(&self) -> i64 {
        self.low + self.coeffs.len() as i64 - 1
    }

    pub fn coeff(&self, e: i64) -> QSqrtP {
        let i = e - self.low;
        if i < 0 || i >= self.coeffs.len() as i64 {
            QSqrtP::zero(self.p)
        } else {
            self.coeffs[i as usize].clone()
        }
    }

    pub fn add(&self, o: &LaurentX) -> LaurentX {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let low = self.low.min(o.low);
        let high = self.high().max(o.high());
        let coeffs = (low..=high).map(|e| &self.coeff(e) + &o.coeff(e)).collect();
        LaurentX::new(self.p, low, coeffs)
    }

    pub fn neg(&self) -> LaurentX {
        self.scale(&QSqrtP::int(self.p, -1))
    }

    pub fn sub(&self, o: &LaurentX) -> LaurentX {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: &QSqrtP) -> LaurentX {
        LaurentX::new(self.p, self.low, self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn shift(&self, e: i64) -> LaurentX {
        LaurentX { low: self.low + e, ..self.clone() }.trimmed()
    }

    pub fn mul(&self, o: &LaurentX) -> LaurentX {
        if self.is_zero() || o.is_zero() {
            return LaurentX::zero(self.p);
        }
        let mut coeffs = vec![QSqrtP::zero(self.p); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                coeffs[i + j] += &(a * b);
            }
        }
        LaurentX::new(self.p, self.low + o.low, coeffs)
    }

    pub fn eval(&self, x: &QSqrtP) -> QSqrtP {
        let mut acc = QSqrtP::zero(self.p);
        for (i, c) in self.coeffs.iter().enumerate() {
            acc += &(c * &x.pow(self.low + i as i64));
        }
        acc
    }

    pub fn eval_at_one(&self) -> QSqrtP {
        self.coeffs.iter().fold(QSqrtP::zero(self.p), |acc, c| &acc + c)
    }
}

/// Coefficients of `X^e` for `low <= e <= order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalSeries {
    pub p: u64,
    pub low: i64,
    pub order: i64,
    pub coeffs: Vec<QSqrtP>,
}

impl FormalSeries {
    pub fn from_laurent(l: &LaurentX, low: i64, order: i64) -> Self {
        let coeffs = (low..=order).map(|e| l.coeff(e)).collect();
        FormalSeries { p: l.p, low, order, coeffs }
    }

    pub fn coeff(&self, e: i64) -> QSqrtP {
        if e < self.low || e > self.order {
            QSqrtP::zero(self.p)
        } else {
            self.coeffs[(e - self.low) as usize].clone()
        }
    }

    /// Equality of the overlapping truncations.
    pub fn agrees_with(&self, o: &FormalSeries) -> bool {
        let low = self.low.min(o.low);
        let high = self.order.min(o.order);
        (low..=high).all(|e| self.coeff(e) == o.coeff(e))
    }
}

/// `numer / denom` in `X`.
#[derive(Clone, Debug)]
pub struct RationalFunctionX {
    pub numer: LaurentX,
    pub denom: LaurentX,
}

impl PartialEq for RationalFunctionX {
    fn eq(&self, o: &Self) -> bool {
        self.numer.mul(&o.denom) == o.numer.mul(&self.denom)
    }
}

impl RationalFunctionX {
    pub fn new(numer: LaurentX, denom: LaurentX) -> Self {
        assert!(!denom.is_zero(), "zero denominator");
        RationalFunctionX { numer, denom }
    }

    pub fn from_laurent(l: LaurentX) -> Self {
        let p = l.p;
        RationalFunctionX::new(l, LaurentX::one(p))
    }

    pub fn zero(p: u64) -> Self {
        RationalFunctionX::from_laurent(LaurentX::zero(p))
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.denom == o.denom {
            return RationalFunctionX::new(self.numer.add(&o.numer), self.denom.clone());
        }
        RationalFunctionX::new(
            self.numer.mul(&o.denom).add(&o.numer.mul(&self.denom)),
            self.denom.mul(&o.denom),
        )
    }

    pub fn mul(&self, o: &Self) -> Self {
        RationalFunctionX::new(self.numer.mul(&o.numer), self.denom.mul(&o.denom))
    }

    pub fn scale(&self, s: &QSqrtP) -> Self {
        RationalFunctionX::new(self.numer.scale(s), self.denom.clone())
    }

    pub fn recip(&self) -> Self {
        RationalFunctionX::new(self.denom.clone(), self.numer.clone())
    }

    /// Value at `X = 1`.
    pub fn eval_at_one(&self) -> Result<QSqrtP> {
        let d = self.denom.eval_at_one();
        if d.is_zero() {
            return Err(Error::domain("pole at X = 1"));
        }
        Ok(&self.numer.eval_at_one() / &d)
    }

    /// Laurent expansion up to `X^order`.
    pub fn expand(&self, order: i64) -> FormalSeries {
        let p = self.numer.p;
        if self.numer.is_zero() {
            return FormalSeries { p, low: order + 1, order, coeffs: vec![] };
        }
        let d0 = self.denom.coeffs[0].inv();
        let low = self.numer.low - self.denom.low;
        let len = (order - low + 1).max(0) as usize;
        // Power-series division of the shifted numerator by the shifted denominator.
        let mut rem: Vec<QSqrtP> = (0..len)
            .map(|i| self.numer.coeffs.get(i).cloned().unwrap_or_else(|| QSqrtP::zero(p)))
            .collect();
        let mut out = vec![QSqrtP::zero(p); len];
        for i in 0..len {
            let c = &rem[i] * &d0;
            if !c.is_zero() {
                for (j, dj) in self.denom.coeffs.iter().enumerate() {
                    if i + j < len {
                        let t = &c * dj;
                        rem[i + j] -= &t;
                    }
                }
            }
            out[i] = c;
        }
        FormalSeries { p, low, order, coeffs: out }
    }
}

/// `(a^{n+1} - b^{n+1}) / (a - b)`, with `𝔰_{-1} = 0` and `𝔰_{-2} = -1/(ab)`.
pub fn schur_value(n: i64, a: &QSqrtP, b: &QSqrtP) -> Result<QSqrtP> {
    let p = a.p;
    match n {
        _ if n < -2 => Err(Error::domain(format!("schur_value: n = {n} < -2"))),
        -2 => Ok(-(&(a * b).inv())),
        -1 => Ok(QSqrtP::zero(p)),
        _ => {
            let mut acc = QSqrtP::zero(p);
            for i in 0..=n {
                acc += &(&a.pow(i) * &b.pow(n - i));
            }
            Ok(acc)
        }
    }
}

/// `W^sph(diag(p^val, 1))` in one slot.
pub fn whittaker_sph(slot: u8, sat: &SatakeData, val: i64) -> QSqrtP {
    let p = sat.p();
    if val < 0 {
        return QSqrtP::zero(p);
    }
    let (a, b) = sat.slot(slot);
    &QSqrtP::half_power(p, -val) * &schur_value(val, a, b).unwrap()
}

/// `∫_{p^k Z_p^x} ψ(a y) d^x a` where `vy = v_p(y)` (`None` for `y = 0`).
pub fn gauss_unit_integral(p: u64, k: i64, vy: Option<i64>) -> Q {
    match vy {
        None => Q::one(),
        Some(v) if k + v >= 0 => Q::one(),
        Some(v) if k + v == -1 => Q::new((-1).into(), ((p - 1) as i64).into()),
        Some(_) => Q::zero(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LKind {
    Rankin,
    Omega2s,
    Gen { slot: u8, r: i64 },
}

/// `Π (1 - α_i α'_j X)`.
pub fn rankin_inverse(sat: &SatakeData) -> LaurentX {
    let p = sat.p();
    sat.cross().iter().fold(LaurentX::one(p), |acc, c| {
        acc.mul(&LaurentX::new(p, 0, vec![QSqrtP::one(p), -c]))
    })
}

/// `Θ` of the coefficient list of `𝒫^{(r)}_{p,slot}` as a polynomial in `X`.
pub fn gen_l_inverse_poly(sat: &SatakeData, slot: u8, r: i64) -> Result<LaurentX> {
    let p = sat.p();
    let cs = gen_l_inverse(p, slot, r)?;
    Ok(LaurentX::new(p, 0, cs.iter().map(|c| c.theta_eval(sat)).collect()))
}

pub fn l_factor(kind: LKind, sat: &SatakeData) -> Result<RationalFunctionX> {
    sat.check_generic()?;
    let p = sat.p();
    let inv = match kind {
        LKind::Rankin => rankin_inverse(sat),
        LKind::Omega2s => LaurentX::new(p, 0, vec![QSqrtP::one(p), QSqrtP::zero(p), -sat.omega()]),
        LKind::Gen { slot, r } => gen_l_inverse_poly(sat, slot, r)?,
    };
    Ok(RationalFunctionX::new(LaurentX::one(p), inv))
}

/// `ω^{r0} X^{2 r0} vol · ω1^{r1} p^{-m/2}`.
fn coset_prefactor(x: &CanonicalCoset, sat: &SatakeData) -> LaurentX {
    let p = sat.p();
    let c = &(&sat.omega().pow(x.r0) * &sat.omega1().pow(x.r1))
        * &QSqrtP::half_power(p, -x.m).scale(&volume_orbit(p, x));
    LaurentX::monomial(c, 2 * x.r0)
}

fn vy(x: &CanonicalCoset) -> Option<i64> {
    if x.n == 0 {
        None
    } else {
        Some(-x.n)
    }
}

/// `Λ(s; ch(x))` summed term by term up to `X^order`.
pub fn lambda_series(x: &CanonicalCoset, sat: &SatakeData, order: i64) -> FormalSeries {
    let p = sat.p();
    let pre = coset_prefactor(x, sat);
    let shift = pre.low;
    let kmin = (-x.m).max(0);
    let mut inner = Vec::new();
    for k in kmin..=(order - shift).max(kmin - 1) {
        let g = gauss_unit_integral(p, k, vy(x));
        let s1 = schur_value(k + x.m, &sat.a1, &sat.b1).unwrap();
        let s2 = schur_value(k, &sat.a2, &sat.b2).unwrap();
        inner.push((&s1 * &s2).scale(&g));
    }
    let sum = LaurentX::new(p, kmin, inner);
    FormalSeries::from_laurent(&pre.mul(&sum), shift + kmin, order)
}

/// The correction polynomial `Σ_{k = max(0,-m)}^{n-1} (G(k) - 1) 𝔰_{k+m} 𝔰_k X^k`.
fn error_poly(x: &CanonicalCoset, sat: &SatakeData) -> LaurentX {
    let p = sat.p();
    let kmin = (-x.m).max(0);
    let mut out = LaurentX::zero(p);
    for k in kmin..x.n {
        let eps = gauss_unit_integral(p, k, vy(x)) - Q::one();
        let s = &schur_value(k + x.m, &sat.a1, &sat.b1).unwrap()
            * &schur_value(k, &sat.a2, &sat.b2).unwrap();
        out = out.add(&LaurentX::monomial(s.scale(&eps), k));
    }
    out
}

fn main_poly(x: &CanonicalCoset, sat: &SatakeData) -> LaurentX {
    let g = if x.m >= 0 {
        gen_l_inverse_poly(sat, 1, x.m + 1)
    } else {
        gen_l_inverse_poly(sat, 2, -x.m + 1)
    };
    g.unwrap().shift((-x.m).max(0))
}

/// `Λ(s; ch(x))` as a rational function: a main term `L · X^{max(-m,0)}
/// / L^{(|m|+1)}` plus a polynomial correction supported below `X^n`.
pub fn lambda_closed_form(x: &CanonicalCoset, sat: &SatakeData) -> RationalFunctionX {
    let pinv = rankin_inverse(sat);
    let numer = main_poly(x, sat).add(&pinv.mul(&error_poly(x, sat)));
    RationalFunctionX::new(coset_prefactor(x, sat).mul(&numer), pinv)
}

pub fn lambda_closed_form_fn(f: &PGCosetFunction, sat: &SatakeData) -> RationalFunctionX {
    let pinv = rankin_inverse(sat);
    let mut numer = LaurentX::zero(sat.p());
    for (x, v) in &f.support {
        let term = main_poly(x, sat).add(&pinv.mul(&error_poly(x, sat)));
        numer = numer.add(&coset_prefactor(x, sat).mul(&term).scale(v));
    }
    RationalFunctionX::new(numer, pinv)
}

/// `lim_{s -> 0} Λ(s; f) / L(Π, s)`.
pub fn lambda_value(f: &PGCosetFunction, sat: &SatakeData) -> Result<QSqrtP> {
    sat.check_generic()?;
    let p = sat.p();
    let p1 = rankin_inverse(sat).eval_at_one();
    let mut acc = QSqrtP::zero(p);
    for (x, v) in &f.support {
        let term = main_poly(x, sat).eval_at_one() + &p1 * &error_poly(x, sat).eval_at_one();
        acc += &(&(v * &coset_prefactor(x, sat).eval_at_one()) * &term);
    }
    Ok(acc)
}

/// `Θ` with the slot-two twist `S2 -> α2 β2 X^2`, `T2 -> sqrt(p) (α2 + β2) X`.
pub fn theta_x_eval(h: &HeckeElement, sat: &SatakeData) -> RationalFunctionX {
    let p = sat.p();
    let s1 = sat.omega1();
    let s2 = sat.omega2();
    let rp = QSqrtP::sqrt_p(p);
    let t1 = &rp * &(&sat.a1 + &sat.b1);
    let t2 = &rp * &(&sat.a2 + &sat.b2);
    let mut out = LaurentX::zero(p);
    for (m, c) in &h.terms {
        let v = &(c * &(&s1.pow(m.e1) * &t1.pow(m.t1 as i64))) * &(&s2.pow(m.e2) * &t2.pow(m.t2 as i64));
        out = out.add(&LaurentX::monomial(v, 2 * m.e2 + m.t2 as i64));
    }
    RationalFunctionX::from_laurent(out)
}

/// `∫_{shell_j} φ / μ(shell_j)` over `p^j (Z_p^2 - p Z_p^2)`.
pub fn shell_average(phi: &SchwartzFunction, j: i64) -> Q {
    let p = phi.p;
    let mu = ppow(p, -2 * j) * (Q::one() - ppow(p, -2));
    phi.integrate_primitive_shell(j) / mu
}

/// `Z(φ, W1^sph, W2^sph, s)`.
pub fn jpss_zeta(phi: &SchwartzFunction, sat: &SatakeData) -> Result<RationalFunctionX> {
    sat.check_generic()?;
    let p = sat.p();
    if phi.is_zero() {
        return Ok(RationalFunctionX::zero(p));
    }
    let omega = sat.omega();
    let d = phi.depth();
    let lo = phi.radius().min(d);
    let mut finite = LaurentX::zero(p);
    for j in lo..d {
        let c = omega.pow(j).scale(&shell_average(phi, j));
        finite = finite.add(&LaurentX::monomial(c, 2 * j));
    }
    let one_minus = LaurentX::new(p, 0, vec![QSqrtP::one(p), QSqrtP::zero(p), -&omega]);
    let tail = LaurentX::monomial(omega.pow(d).scale(&phi.value_at_origin()), 2 * d);
    Ok(RationalFunctionX::new(one_minus.mul(&finite).add(&tail), rankin_inverse(sat)))
}

/// `lim_{s -> 0} Z / L(Π, s)`.
pub fn jpss_period(phi: &SchwartzFunction, sat: &SatakeData) -> Result<QSqrtP> {
    let z = jpss_zeta(phi, sat)?;
    Ok(z.numer.eval_at_one())
}

/// Check that a series and a closed form agree to the given order.
pub fn series_matches_closed_form(x: &CanonicalCoset, sat: &SatakeData, order: i64) -> bool {
    let s = lambda_series(x, sat, order);
    let c = lambda_closed_form(x, sat).expand(order);
    s.agrees_with(&c)
}
