//! Arithmetic in `Q(sqrt p)`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::padic::{q, q_str, Q};

/// `rat + irr * sqrt(p)`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QSqrtP {
    pub p: u64,
    pub rat: Q,
    pub irr: Q,
}

impl fmt::Debug for QSqrtP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for QSqrtP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.irr.is_zero() {
            write!(f, "{}", q_str(&self.rat))
        } else if self.rat.is_zero() {
            write!(f, "{}*sqrt({})", q_str(&self.irr), self.p)
        } else {
            write!(f, "{} + {}*sqrt({})", q_str(&self.rat), q_str(&self.irr), self.p)
        }
    }
}

impl QSqrtP {
    pub fn new(p: u64, rat: Q, irr: Q) -> Self {
        QSqrtP { p, rat, irr }
    }

    pub fn from_q(p: u64, rat: Q) -> Self {
        QSqrtP::new(p, rat, Q::zero())
    }

    pub fn int(p: u64, n: i64) -> Self {
        QSqrtP::from_q(p, q(n))
    }

    pub fn zero(p: u64) -> Self {
        QSqrtP::int(p, 0)
    }

    pub fn one(p: u64) -> Self {
        QSqrtP::int(p, 1)
    }

    pub fn sqrt_p(p: u64) -> Self {
        QSqrtP::new(p, Q::zero(), Q::one())
    }

    /// `p^{e/2}`.
    pub fn half_power(p: u64, e: i64) -> Self {
        let whole = crate::padic::ppow(p, e.div_euclid(2));
        if e.rem_euclid(2) == 0 {
            QSqrtP::from_q(p, whole)
        } else {
            QSqrtP::new(p, Q::zero(), whole)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rat.is_zero() && self.irr.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.irr.is_zero()
    }

    pub fn conj(&self) -> Self {
        QSqrtP::new(self.p, self.rat.clone(), -&self.irr)
    }

    /// Field norm `rat^2 - p irr^2`.
    pub fn norm(&self) -> Q {
        &self.rat * &self.rat - &self.irr * &self.irr * q(self.p as i64)
    }

    pub fn inv(&self) -> Self {
        let n = self.norm();
        assert!(!n.is_zero(), "inverse of zero in Q(sqrt p)");
        let c = self.conj();
        QSqrtP::new(self.p, c.rat / &n, c.irr / n)
    }

    pub fn pow(&self, e: i64) -> Self {
        let base = if e < 0 { self.inv() } else { self.clone() };
        let mut acc = QSqrtP::one(self.p);
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        acc
    }

    pub fn scale(&self, s: &Q) -> Self {
        QSqrtP::new(self.p, &self.rat * s, &self.irr * s)
    }
}

impl Add for &QSqrtP {
    type Output = QSqrtP;
    fn add(self, o: &QSqrtP) -> QSqrtP {
        debug_assert_eq!(self.p, o.p);
        QSqrtP::new(self.p, &self.rat + &o.rat, &self.irr + &o.irr)
    }
}

impl Sub for &QSqrtP {
    type Output = QSqrtP;
    fn sub(self, o: &QSqrtP) -> QSqrtP {
        debug_assert_eq!(self.p, o.p);
        QSqrtP::new(self.p, &self.rat - &o.rat, &self.irr - &o.irr)
    }
}

impl Mul for &QSqrtP {
    type Output = QSqrtP;
    fn mul(self, o: &QSqrtP) -> QSqrtP {
        debug_assert_eq!(self.p, o.p);
        let pq = q(self.p as i64);
        QSqrtP::new(
            self.p,
            &self.rat * &o.rat + &self.irr * &o.irr * pq,
            &self.rat * &o.irr + &self.irr * &o.rat,
        )
    }
}

impl Div for &QSqrtP {
    type Output = QSqrtP;
    fn div(self, o: &QSqrtP) -> QSqrtP {
        self * &o.inv()
    }
}

impl Neg for &QSqrtP {
    type Output = QSqrtP;
    fn neg(self) -> QSqrtP {
        QSqrtP::new(self.p, -&self.rat, -&self.irr)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for QSqrtP {
            type Output = QSqrtP;
            fn $f(self, o: QSqrtP) -> QSqrtP {
                (&self).$f(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for QSqrtP {
    type Output = QSqrtP;
    fn neg(self) -> QSqrtP {
        -&self
    }
}

impl AddAssign<&QSqrtP> for QSqrtP {
    fn add_assign(&mut self, o: &QSqrtP) {
        self.rat += &o.rat;
        self.irr += &o.irr;
    }
}

impl SubAssign<&QSqrtP> for QSqrtP {
    fn sub_assign(&mut self, o: &QSqrtP) {
        self.rat -= &o.rat;
        self.irr -= &o.irr;
    }
}
