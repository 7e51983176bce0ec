//! Verification suites and their deterministic reports.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::coset::{
    hecke_act, trace_level, volume_p_cap, volume_p_cap_enumerated, xi_c_lattice, CanonicalCoset,
    PGCosetFunction, PVariant,
};
use crate::error::{Error, Result};
use crate::hecke::{dual_euler_at_one, euler_at_one, HeckeElement, LocalizedHecke, Mono, SatakeData};
use crate::norm::{
    apply_to_f0, certificate, delta0_datum, delta1_datum, mod_ell_certificate, p_delta,
    random_certified_delta,
};
use crate::padic::{parse_q, q, q_str, Q};
use crate::qsqrt::QSqrtP;
use crate::schwartz::{lattice_membership, membership_failure, Level, Variant};
use crate::whittaker::{lambda_closed_form, lambda_series, FormalSeries};

pub const SCHEMA: &str = "v1";

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    pub detail: Value,
}

impl Check {
    pub fn new(name: impl Into<String>, ok: bool, detail: Value) -> Self {
        Check { name: name.into(), ok, detail }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub prime: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub data: Value,
    /// Replaces `data` in text output when set.
    #[serde(skip)]
    pub summary: Option<String>,
}

impl Report {
    pub fn new(command: &str, prime: u64, seed: Option<u64>) -> Self {
        Report { schema: SCHEMA, command: command.into(), prime, seed, checks: vec![], data: Value::Null, summary: None }
    }

    pub fn all_ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} p={}", self.command, self.prime);
        for c in &self.checks {
            let _ = writeln!(s, "[{}] {}", if c.ok { "ok" } else { "FAIL" }, c.name);
        }
        if let Some(line) = &self.summary {
            let _ = writeln!(s, "{line}");
        } else if !self.data.is_null() {
            let _ = writeln!(s, "{}", serde_json::to_string_pretty(&self.data).unwrap());
        }
        s
    }
}

pub fn hecke_json(h: &HeckeElement) -> Value {
    json!({ "display": h.to_string(), "terms": h.to_json() })
}

pub fn localized_json(h: &LocalizedHecke) -> Value {
    json!({ "numer": hecke_json(&h.numer), "denomPower": h.denom_power })
}

pub fn function_json(f: &PGCosetFunction) -> Value {
    serde_json::to_value(f.to_json()).unwrap()
}

fn series_json(s: &FormalSeries) -> Value {
    let coeffs: Vec<String> = s.coeffs.iter().map(|c| c.to_string()).collect();
    json!({ "low": s.low, "order": s.order, "coeffs": coeffs })
}

/// `(p - 1) φ0 ⊗ ch(G°[p])` gives `P = p - 1`, `A = 1`, `B = 0`.
pub fn suite_delta0(p: u64, ceiling: u64) -> Result<Vec<Check>> {
    let delta = delta0_datum(p);
    let mut out = vec![];
    let member = lattice_membership(&delta, Variant::S, ceiling)?;
    out.push(Check::new("delta0 presentation certified (DetP, S)", member, Value::Null));
    let cert = certificate(p, &delta, Variant::S, ceiling)?;
    let pm1 = HeckeElement::from_int(p, p as i64 - 1);
    let target_ok = cert.target.equals(&LocalizedHecke::from_element(pm1.clone()));
    out.push(Check::new(
        "delta0 target = p - 1",
        target_ok,
        json!({ "target": localized_json(&cert.target) }),
    ));
    let ab_ok = cert.a == HeckeElement::one(p) && cert.b.is_zero() && cert.denom_power == 0;
    out.push(Check::new(
        "delta0 A = 1, B = 0",
        ab_ok,
        json!({ "certificate": cert.to_json() }),
    ));
    let f = xi_c_lattice(p, &trace_level(&delta))?;
    let realized = apply_to_f0(&LocalizedHecke::from_element(pm1), &f).is_ok();
    out.push(Check::new("delta0 (p - 1) f0 = Xi_c(Tr delta0)", realized, json!({ "xi": function_json(&f) })));
    Ok(out)
}

/// The δ₁ datum with scalar `n`.
pub fn suite_delta1(p: u64, n: &Q, ceiling: u64) -> Result<Vec<Check>> {
    let delta = delta1_datum(p, n.clone());
    let label = format!("n = {}", q_str(n));
    let mut out = vec![];
    let f = xi_c_lattice(p, &trace_level(&delta))?;
    let want = hecke_act(&dual_euler_at_one(p), &PGCosetFunction::f0(p));
    let ratio = f.support.get(&CanonicalCoset::BASE).map(|v| (&want.get(&CanonicalCoset::BASE) / v).to_string());
    out.push(Check::new(
        format!("delta1 ({label}) Xi_c(Tr delta1) = P'(1) f0"),
        f == want,
        json!({ "xi": function_json(&f), "expected": function_json(&want), "ratio_at_base": ratio }),
    ));
    let failures: Vec<String> = delta
        .iter()
        .filter_map(|e| membership_failure(e, Variant::S, ceiling).transpose())
        .collect::<Result<_>>()?;
    out.push(Check::new(
        format!("delta1 ({label}) presentation certified (DetP, S)"),
        failures.is_empty(),
        json!({ "failures": failures }),
    ));
    if failures.is_empty() {
        let cert = certificate(p, &delta, Variant::S, ceiling)?;
        let target_ok = cert.target.equals(&LocalizedHecke::from_element(dual_euler_at_one(p)));
        out.push(Check::new(
            format!("delta1 ({label}) certificate target = P'(1)"),
            target_ok && cert.verify(),
            json!({ "certificate": cert.to_json() }),
        ));
    }
    Ok(out)
}

/// The scalar that places δ₁ in the lattice and realizes `P'(1)` exactly.
pub fn delta1_lattice_scalar(p: u64) -> Q {
    let pi = p as i64;
    q(pi * (pi - 1) * (pi - 1) * (pi + 1))
}

#[derive(Clone, Copy, Debug)]
pub struct RandomCounts {
    pub full: usize,
    pub s0: usize,
    pub s: usize,
}

impl Default for RandomCounts {
    fn default() -> Self {
        RandomCounts { full: 10, s0: 10, s: 5 }
    }
}

/// Integrality of `P_δ` and the certificates for seeded random data.
pub fn suite_random(p: u64, seed: u64, ceiling: u64, counts: RandomCounts, ell: Option<u64>) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![];
    for i in 0..counts.full {
        let d = random_certified_delta(p, &mut rng, Level::Full, Variant::S, ceiling)?;
        let res = p_delta(p, &d, ceiling);
        let (ok, detail) = match &res {
            Ok(h) => (h.denom_power == 0 && h.is_integral(), localized_json(h)),
            Err(Error::Falsification(m)) => (false, json!(m)),
            Err(e) => return Err(e.clone()),
        };
        out.push(Check::new(format!("full #{i}: P_delta integral, denomPower 0"), ok, detail));
    }
    for (variant, count) in [(Variant::S0, counts.s0), (Variant::S, counts.s)] {
        for i in 0..count {
            let d = random_certified_delta(p, &mut rng, Level::DetP, variant, ceiling)?;
            let (ok, detail, cert) = match certificate(p, &d, variant, ceiling) {
                Ok(c) => {
                    let bound = if variant == Variant::S0 { 0 } else { 1 };
                    (c.verify() && c.denom_power <= bound, serde_json::to_value(c.to_json()).unwrap(), Some(c))
                }
                Err(Error::Falsification(m)) => (false, json!(m), None),
                Err(e) => return Err(e),
            };
            out.push(Check::new(format!("DetP {variant:?} #{i}: certificate"), ok, detail));
            if let (Some(l), Some(c)) = (ell, cert) {
                let r = mod_ell_certificate(&c, l);
                out.push(Check::new(
                    format!("DetP {variant:?} #{i}: mod {l} relation"),
                    r.as_ref().is_ok_and(|r| r.holds()),
                    json!(r.err().map(|e| e.to_string())),
                ));
            }
        }
    }
    Ok(out)
}

/// A valid coset with `|m|, |r0|, |r1|` and `n` bounded.
pub fn random_coset<R: Rng>(rng: &mut R, mb: i64, nb: i64, rb: i64) -> CanonicalCoset {
    loop {
        let x = CanonicalCoset::new(
            rng.gen_range(-rb..=rb),
            rng.gen_range(-rb..=rb),
            rng.gen_range(-mb..=mb),
            rng.gen_range(0..=nb),
        );
        if x.is_valid() {
            return x;
        }
    }
}

/// Series against closed form for `count` seeded cosets and `sats` Satake points each.
pub fn suite_oracle(p: u64, seed: u64, order: i64, count: usize, sats: usize) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![];
    for _ in 0..count {
        let x = random_coset(&mut rng, 3, 3, 2);
        for _ in 0..sats {
            let sat = SatakeData::random(p, &mut rng);
            out.push(oracle_check(&x, &sat, order));
        }
    }
    out
}

pub fn oracle_check(x: &CanonicalCoset, sat: &SatakeData, order: i64) -> Check {
    let series = lambda_series(x, sat, order);
    let closed = lambda_closed_form(x, sat);
    let expanded = closed.expand(order);
    Check::new(
        format!("{x} at {:?}", sat.to_strings()),
        series.agrees_with(&expanded),
        json!({
            "series": series_json(&series),
            "closed": {
                "numer": closed.numer.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "numer_low": closed.numer.low,
                "denom": closed.denom.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            },
        }),
    )
}

/// Closed-form cap volumes against enumeration, `|m| <= range`, `n <= range`.
pub fn volume_table(p: u64, range: i64) -> (Vec<Check>, Value) {
    let mut rows = vec![];
    let mut checks = vec![];
    for m in -range..=range {
        for n in 0..=range {
            let x = CanonicalCoset::new(0, 0, m, n);
            if !x.is_valid() {
                continue;
            }
            for (variant, name) in [(PVariant::P, "P"), (PVariant::P1, "P1")] {
                let closed = volume_p_cap(p, &x, variant);
                let counted = volume_p_cap_enumerated(p, &x, variant);
                checks.push(Check::new(format!("vol {name} m={m} n={n}"), closed == counted, Value::Null));
                rows.push(json!({
                    "m": m, "n": n, "variant": name,
                    "closed": q_str(&closed), "enumerated": q_str(&counted),
                }));
            }
        }
    }
    (checks, Value::Array(rows))
}

pub fn parse_coset(s: &str) -> Result<CanonicalCoset> {
    let v: Vec<i64> = s
        .trim_matches(|c| c == '(' || c == ')')
        .split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|e| Error::domain(format!("bad coset entry {t:?}: {e}"))))
        .collect::<Result<_>>()?;
    if v.len() != 4 {
        return Err(Error::domain("a coset needs four entries r0,r1,m,n"));
    }
    let x = CanonicalCoset::new(v[0], v[1], v[2], v[3]);
    if !x.is_valid() {
        return Err(Error::domain(format!("{x} is not a canonical coset")));
    }
    Ok(x)
}

pub fn parse_satake(p: u64, s: &str) -> Result<SatakeData> {
    let v: Vec<Q> = s.split(',').map(|t| parse_q(t.trim())).collect::<Result<_>>()?;
    let arr: [Q; 4] = v.try_into().map_err(|_| Error::domain("Satake data needs four rationals"))?;
    let sat = SatakeData::from_q(p, arr);
    sat.check_generic()?;
    Ok(sat)
}

/// Sums of products of `c`, `S1`, `S2`, `T1`, `T2`, `Sp`, `P`, `P'`, each
/// with an optional integer exponent (negative only for `S`-type factors).
pub fn parse_hecke(p: u64, s: &str) -> Result<HeckeElement> {
    let mut terms: Vec<(bool, String)> = vec![];
    let mut cur = String::new();
    let mut neg = false;
    for ch in s.chars().filter(|c| !c.is_whitespace()) {
        let after_caret = cur.ends_with('^');
        if (ch == '+' || ch == '-') && !after_caret && !cur.is_empty() {
            terms.push((neg, std::mem::take(&mut cur)));
            neg = ch == '-';
        } else if ch == '-' && cur.is_empty() {
            neg = !neg;
        } else if ch != '+' || after_caret {
            cur.push(ch);
        }
    }
    if !cur.is_empty() {
        terms.push((neg, cur));
    }
    if terms.is_empty() {
        return Err(Error::domain("empty Hecke expression"));
    }
    let mut acc = HeckeElement::zero(p);
    for (neg, t) in terms {
        let mut h = HeckeElement::one(p);
        for factor in t.split('*') {
            let (base, exp) = match factor.split_once('^') {
                Some((b, e)) => (b, e.parse::<i64>().map_err(|_| Error::domain(format!("bad exponent in {factor:?}")))?),
                None => (factor, 1),
            };
            let f = match base {
                "S1" => HeckeElement::s(p, 1, exp),
                "S2" => HeckeElement::s(p, 2, exp),
                "Sp" => HeckeElement::sp(p, exp),
                "T1" | "T2" | "P" | "P'" => {
                    if exp < 0 {
                        return Err(Error::domain(format!("{base} is not invertible")));
                    }
                    let b = match base {
                        "T1" => HeckeElement::t(p, 1),
                        "T2" => HeckeElement::t(p, 2),
                        "P" => euler_at_one(p),
                        _ => dual_euler_at_one(p),
                    };
                    b.pow(exp as u32)
                }
                "sqrtp" => HeckeElement::monomial(Mono::ONE, QSqrtP::half_power(p, exp)),
                c => HeckeElement::monomial(Mono::ONE, QSqrtP::from_q(p, parse_q(c)?).pow(exp)),
            };
            h = h.mul(&f);
        }
        acc = if neg { acc.sub(&h) } else { acc.add(&h) };
    }
    Ok(acc)
}
