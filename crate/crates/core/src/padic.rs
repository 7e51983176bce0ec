//! Rational models of `Q_p` scalars and 2x2 matrices.
//!
//! Every matrix entry met in this crate is rational, so `Q_p` is modelled
//! by `Q` together with the valuation `v_p`.

use std::fmt;
use std::ops::Mul;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// `p^e` for any integer `e`.
pub fn ppow(p: u64, e: i64) -> Q {
    let base = BigInt::from(p);
    let mag = num_traits::pow(base, e.unsigned_abs() as usize);
    if e >= 0 {
        Q::from_integer(mag)
    } else {
        Q::new(BigInt::one(), mag)
    }
}

fn int_val(p: &BigInt, n: &BigInt) -> i64 {
    let mut n = n.clone();
    let mut e = 0;
    loop {
        let (quo, rem) = n.div_rem(p);
        if !rem.is_zero() {
            return e;
        }
        n = quo;
        e += 1;
    }
}

/// `v_p(x)`; zero has no valuation.
pub fn valuation(p: u64, x: &Q) -> Result<i64> {
    if x.is_zero() {
        return Err(Error::domain("valuation of zero"));
    }
    let pb = BigInt::from(p);
    Ok(int_val(&pb, x.numer()) - int_val(&pb, x.denom()))
}

/// Valuation with `None` standing for `+infinity`.
pub fn val_opt(p: u64, x: &Q) -> Option<i64> {
    valuation(p, x).ok()
}

/// `x / p^{v(x)}`, a `p`-adic unit.
pub fn unit_part(p: u64, x: &Q) -> Q {
    let v = valuation(p, x).expect("unit_part of zero");
    x * ppow(p, -v)
}

/// True iff `x` lies in `Z_(p)`.
pub fn is_padic_integer(p: u64, x: &Q) -> bool {
    x.is_zero() || valuation(p, x).unwrap() >= 0
}

/// True iff the denominator of `x` is a power of `p`.
pub fn in_z_inv_p(p: u64, x: &Q) -> bool {
    let mut d = x.denom().clone();
    let pb = BigInt::from(p);
    while (&d % &pb).is_zero() {
        d /= &pb;
    }
    d.is_one()
}

/// Canonical representative of `x + p^k Z_p` inside `Z[1/p] ∩ [0, p^k)`.
pub fn residue(p: u64, x: &Q, k: i64) -> Q {
    if x.is_zero() || valuation(p, x).unwrap() >= k {
        return Q::zero();
    }
    let pb = BigInt::from(p);
    let s = int_val(&pb, x.denom());
    let dprime = x.denom() / num_traits::pow(pb.clone(), s as usize);
    // k + s > 0 here because v(x) >= -s and v(x) < k.
    let modulus = num_traits::pow(pb, (k + s) as usize);
    let inv = mod_inverse(&dprime, &modulus).expect("denominator coprime to p");
    let r = (x.numer() * inv).mod_floor(&modulus);
    Q::new(r, num_traits::pow(BigInt::from(p), s as usize))
}

pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// Reduce a `p`-integral rational modulo `p^k` to an integer in `[0, p^k)`.
pub fn reduce_int(p: u64, x: &Q, k: u32) -> u64 {
    let r = residue(p, x, k as i64);
    debug_assert!(r.is_integer());
    r.to_integer().to_u64().unwrap()
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mat2 {
    pub a: Q,
    pub b: Q,
    pub c: Q,
    pub d: Q,
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

impl Mat2 {
    pub fn new(a: Q, b: Q, c: Q, d: Q) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn from_ints(a: i64, b: i64, c: i64, d: i64) -> Self {
        Mat2::new(q(a), q(b), q(c), q(d))
    }

    pub fn identity() -> Self {
        Mat2::from_ints(1, 0, 0, 1)
    }

    pub fn diag(x: Q, y: Q) -> Self {
        Mat2::new(x, Q::zero(), Q::zero(), y)
    }

    pub fn scalar(x: Q) -> Self {
        Mat2::diag(x.clone(), x)
    }

    pub fn det(&self) -> Q {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn is_invertible(&self) -> bool {
        !self.det().is_zero()
    }

    pub fn inverse(&self) -> Mat2 {
        let det = self.det();
        assert!(!det.is_zero(), "inverse of singular matrix");
        Mat2::new(
            &self.d / &det,
            -&self.b / &det,
            -&self.c / &det,
            &self.a / &det,
        )
    }

    pub fn scale(&self, s: &Q) -> Mat2 {
        Mat2::new(&self.a * s, &self.b * s, &self.c * s, &self.d * s)
    }

    pub fn entries(&self) -> [&Q; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    /// Minimum valuation of the nonzero entries.
    pub fn min_val(&self, p: u64) -> i64 {
        self.entries()
            .iter()
            .filter_map(|x| val_opt(p, x))
            .min()
            .expect("zero matrix")
    }

    pub fn swap_cols(&self) -> Mat2 {
        Mat2::new(self.b.clone(), self.a.clone(), self.d.clone(), self.c.clone())
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.a.clone(), self.c.clone(), self.b.clone(), self.d.clone())
    }

    /// Row vector times matrix.
    pub fn apply_row(&self, v: (&Q, &Q)) -> (Q, Q) {
        (
            v.0 * &self.a + v.1 * &self.c,
            v.0 * &self.b + v.1 * &self.d,
        )
    }
}

impl Mul for &Mat2 {
    type Output = Mat2;
    fn mul(self, o: &Mat2) -> Mat2 {
        Mat2::new(
            &self.a * &o.a + &self.b * &o.c,
            &self.a * &o.b + &self.b * &o.d,
            &self.c * &o.a + &self.d * &o.c,
            &self.c * &o.b + &self.d * &o.d,
        )
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        &self * &o
    }
}

/// An element of `G = GL2 x GL2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GElement {
    pub s1: Mat2,
    pub s2: Mat2,
}

impl GElement {
    pub fn new(s1: Mat2, s2: Mat2) -> Self {
        GElement { s1, s2 }
    }

    pub fn identity() -> Self {
        GElement::new(Mat2::identity(), Mat2::identity())
    }

    /// The diagonal image of `h` in `G`.
    pub fn diagonal(h: &Mat2) -> Self {
        GElement::new(h.clone(), h.clone())
    }

    pub fn mul(&self, o: &GElement) -> GElement {
        GElement::new(&self.s1 * &o.s1, &self.s2 * &o.s2)
    }

    pub fn inverse(&self) -> GElement {
        GElement::new(self.s1.inverse(), self.s2.inverse())
    }

    pub fn is_invertible(&self) -> bool {
        self.s1.is_invertible() && self.s2.is_invertible()
    }
}

/// Membership in `GL2(Z_p)`.
pub fn in_gl2_zp(p: u64, g: &Mat2) -> bool {
    g.entries().iter().all(|x| is_padic_integer(p, x))
        && !g.det().is_zero()
        && valuation(p, &g.det()).unwrap() == 0
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Iwasawa {
    pub t1: i64,
    pub t2: i64,
    pub y: Q,
    pub k: Mat2,
}

impl Iwasawa {
    pub fn borel(&self, p: u64) -> Mat2 {
        Mat2::new(ppow(p, self.t1), self.y.clone(), Q::zero(), ppow(p, self.t2))
    }
}

/// `g = [[p^t1, y], [0, p^t2]] * k` with `k` in `GL2(Z_p)`.
///
/// Right column operations on the bottom row, pivoting on the entry of
/// least valuation (ties go to the left column).
pub fn iwasawa_decompose(p: u64, g: &Mat2) -> Iwasawa {
    assert!(g.is_invertible());
    // r accumulates the right multiplications; g * r is reduced.
    let mut r = Mat2::identity();
    let mut h = g.clone();
    let left_pivot = match (val_opt(p, &h.c), val_opt(p, &h.d)) {
        (Some(vc), Some(vd)) => vc <= vd,
        (Some(_), None) => true,
        _ => false,
    };
    if left_pivot {
        let sw = Mat2::from_ints(0, 1, 1, 0);
        h = &h * &sw;
        r = &r * &sw;
    }
    if !h.c.is_zero() {
        let t = &h.c / &h.d;
        let e = Mat2::new(q(1), Q::zero(), -t, q(1));
        h = &h * &e;
        r = &r * &e;
    }
    let u2 = unit_part(p, &h.d);
    let u1 = unit_part(p, &h.a);
    let nrm = Mat2::diag(u1.recip(), u2.recip());
    h = &h * &nrm;
    r = &r * &nrm;
    debug_assert!(h.c.is_zero());
    Iwasawa {
        t1: valuation(p, &h.a).unwrap(),
        t2: valuation(p, &h.d).unwrap(),
        y: h.b.clone(),
        k: r.inverse(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Smith {
    pub k1: Mat2,
    pub a: i64,
    pub c: i64,
    pub k2: Mat2,
}

impl Smith {
    pub fn divisors(&self) -> (i64, i64) {
        (self.a, self.c)
    }
}

/// Cartan decomposition `g = k1 * diag(p^a, p^c) * k2` with `a <= c`.
pub fn smith_normal_form(p: u64, g: &Mat2) -> Smith {
    assert!(g.is_invertible());
    let mut l = Mat2::identity();
    let mut r = Mat2::identity();
    let mut h = g.clone();
    let vals: Vec<Option<i64>> = h.entries().iter().map(|x| val_opt(p, x)).collect();
    let mut best = 0;
    for i in 1..4 {
        if let Some(v) = vals[i] {
            if vals[best].is_none_or(|b| v < b) {
                best = i;
            }
        }
    }
    let sw = Mat2::from_ints(0, 1, 1, 0);
    if best == 1 || best == 3 {
        h = &h * &sw;
        r = &r * &sw;
    }
    if best == 2 || best == 3 {
        h = &sw * &h;
        l = &sw * &l;
    }
    let row = Mat2::new(q(1), Q::zero(), -(&h.c / &h.a), q(1));
    h = &row * &h;
    l = &row * &l;
    let col = Mat2::new(q(1), -(&h.b / &h.a), Q::zero(), q(1));
    h = &h * &col;
    r = &r * &col;
    let nrm = Mat2::diag(unit_part(p, &h.a).recip(), unit_part(p, &h.d).recip());
    h = &nrm * &h;
    l = &nrm * &l;
    let a = valuation(p, &h.a).unwrap();
    let c = valuation(p, &h.d).unwrap();
    debug_assert!(a <= c);
    Smith {
        k1: l.inverse(),
        a,
        c,
        k2: r.inverse(),
    }
}

/// Some `k` in `GL2(Z_p)` with `A k B` in `GL2(Z_p)`, if any exists.
pub fn solve_double_coset(p: u64, a: &Mat2, b: &Mat2) -> Option<Mat2> {
    let sa = smith_normal_form(p, a);
    let sb = smith_normal_form(p, &b.inverse());
    if sa.divisors() != sb.divisors() {
        return None;
    }
    Some(&sa.k2.inverse() * &sb.k2)
}

/// A random element of `GL2(Z_p)` with small integer entries.
pub fn random_gl2_zp<R: rand::Rng>(p: u64, rng: &mut R, bound: i64) -> Mat2 {
    loop {
        let m = Mat2::from_ints(
            rng.gen_range(-bound..=bound),
            rng.gen_range(-bound..=bound),
            rng.gen_range(-bound..=bound),
            rng.gen_range(-bound..=bound),
        );
        if in_gl2_zp(p, &m) {
            return m;
        }
    }
}

/// Render a rational as `n` or `n/d`.
pub fn q_str(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parse `n` or `n/d`.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::domain(format!("cannot parse rational '{s}'"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn abs_q(x: &Q) -> Q {
    x.abs()
}

pub fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}
