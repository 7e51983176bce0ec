mod common;

use common::*;
use normrel::coset::{xi_c, xi_c_lattice, trace_level, CanonicalCoset, PGCosetFunction};
use normrel::hecke::{dual_euler_at_one, HeckeElement, LocalizedHecke, SatakeData};
use normrel::norm::*;
use normrel::padic::*;
use normrel::report::{delta1_lattice_scalar, random_coset};
use normrel::schwartz::*;
use normrel::whittaker::{jpss_period, lambda_value};
use normrel::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const C: u64 = DEFAULT_CEILING;

fn full(coeff: Q, phi: SchwartzFunction, g: GElement) -> Vec<LatticeElement> {
    vec![LatticeElement::new(coeff, phi, g, Level::Full)]
}

#[test]
fn q_operator_realizes_lambda() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for p in [2u64, 3, 5] {
        let sats: Vec<_> = (0..3).map(|_| SatakeData::random(p, &mut rng)).collect();
        let base = q_operator(p, &CanonicalCoset::BASE);
        for s in &sats {
            assert_eq!(base.theta_eval(s), &qs(p, 1) - &s.omega());
        }
        for r0 in -1..=1 {
            for r1 in -1..=1 {
                for m in -3..=3 {
                    for n in 0..=3 {
                        let x = CanonicalCoset::new(r0, r1, m, n);
                        if !x.is_valid() {
                            continue;
                        }
                        let h = q_operator(p, &x);
                        assert!(h.is_integral(), "p={p} x={x}: {h}");
                        for s in &sats {
                            let want = lambda_value(&PGCosetFunction::indicator(p, x), s).unwrap();
                            assert_eq!(h.theta_eval(s), want, "p={p} x={x}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn p_delta_examples() {
    for p in [2u64, 3] {
        let pi = p as i64;
        let one = LocalizedHecke::from_element(HeckeElement::one(p));
        assert!(p_delta(p, &delta0_full(p), C).unwrap().equals(&one));
        let z = Mat2::scalar(q(pi));
        let central = full(q(1), SchwartzFunction::phi0(p), GElement::new(z.clone(), z));
        // Ξ_c gives ch(1,0,0,0) = S_p^{-1} f0 under the right-translation action.
        let sp = LocalizedHecke::from_element(HeckeElement::sp(p, -1));
        assert!(p_delta(p, &central, C).unwrap().equals(&sp));

        let phi = SchwartzFunction::phi_p2(p);
        let c = lattice_scalar(&phi, &GElement::identity(), Level::Full, C).unwrap();
        let d = full(c, phi, GElement::identity());
        let out = p_delta(p, &d, C).unwrap();
        assert_eq!(out.denom_power, 0);
        assert!(out.is_integral());
        let f = xi_c_lattice(p, &d).unwrap();
        apply_to_f0(&out, &f).unwrap();
    }
}

#[test]
fn apply_to_f0_examples() {
    let p = 3;
    let one = LocalizedHecke::from_element(HeckeElement::one(p));
    assert_eq!(apply_to_f0(&one, &PGCosetFunction::f0(p)).unwrap(), PGCosetFunction::f0(p));
    let traced = xi_c_lattice(p, &trace_level(&delta0_datum(p))).unwrap();
    let pm1 = LocalizedHecke::from_element(HeckeElement::from_int(p, 2));
    apply_to_f0(&pm1, &traced).unwrap();
    let wrong = LocalizedHecke::from_element(HeckeElement::from_int(p, 3));
    assert!(matches!(apply_to_f0(&wrong, &traced), Err(Error::Falsification(_))));
}

#[test]
fn certified_full_data_have_integral_operators() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for p in [2u64, 3] {
        for _ in 0..10 {
            let d = random_certified_delta(p, &mut rng, Level::Full, Variant::S, C).unwrap();
            let out = p_delta(p, &d, C).unwrap();
            assert_eq!(out.denom_power, 0);
            assert!(out.is_integral());
            apply_to_f0(&out, &xi_c_lattice(p, &d).unwrap()).unwrap();
        }
    }
}

// Λ(P·f0) = Θ(P')·Λ(f0) and Λ(f0) = 1 - ω, while the zeta integral of φ
// over the spherical vectors realizes Θ(P'_δ) for δ = φ ⊗ ch(G°).
#[test]
fn operator_matches_both_linear_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for p in [2u64, 3] {
        for _ in 0..10 {
            let phi = random_schwartz(p, &mut rng, 2, false);
            let c = lattice_scalar(&phi, &GElement::identity(), Level::Full, C).unwrap();
            let d = full(c.clone(), phi.clone(), GElement::identity());
            let op = p_delta(p, &d, C).unwrap();
            let f = xi_c_lattice(p, &d).unwrap();
            for _ in 0..2 {
                let sat = SatakeData::random(p, &mut rng);
                let theta = op.numer.dual().theta_eval(&sat);
                let lam = lambda_value(&f, &sat).unwrap();
                assert_eq!(lam, &theta * &(&qs(p, 1) - &sat.omega()));
                assert_eq!(jpss_period(&phi.scale(&c), &sat).unwrap(), theta);
            }
        }
    }
}

#[test]
fn delta0_certificate() {
    for p in [2u64, 3, 5] {
        let cert = certificate(p, &delta0_datum(p), Variant::S, C).unwrap();
        assert_eq!(cert.a, HeckeElement::one(p));
        assert!(cert.b.is_zero());
        assert_eq!(cert.denom_power, 0);
        assert!(cert.target.equals(&LocalizedHecke::from_element(HeckeElement::from_int(p, p as i64 - 1))));
        assert!(cert.verify());
    }
    let p = 3;
    assert!(matches!(certificate(p, &delta0_datum(p), Variant::S0, C), Err(Error::Precondition(_))));
    assert!(matches!(certificate(p, &delta0_full(p), Variant::S, C), Err(Error::Precondition(_))));
}

#[test]
fn delta1_certificate() {
    for p in [2u64, 3] {
        let d = delta1_datum(p, delta1_lattice_scalar(p));
        let cert = certificate(p, &d, Variant::S0, C).unwrap();
        assert!(cert.verify());
        assert_eq!(cert.denom_power, 0);
        let target = LocalizedHecke::from_element(dual_euler_at_one(p));
        assert!(cert.target.equals(&target));
        let traced = xi_c_lattice(p, &trace_level(&d)).unwrap();
        apply_to_f0(&target, &traced).unwrap();
    }
}

// The scalar 1/((p-1)^2 (p+1)) does not certify the δ₁ generators, and the
// image of the uncertified datum is off from the Euler factor by exactly
// the ratio of the two scalars.
#[test]
fn delta1_literal_scalar_is_not_certified() {
    for p in [2u64, 3] {
        let literal = delta1_datum(p, delta1_scalar(p));
        assert!(matches!(certificate(p, &literal, Variant::S0, C), Err(Error::Precondition(_))));
        let traced = xi_c_lattice(p, &trace_level(&literal)).unwrap();
        let target = LocalizedHecke::from_element(dual_euler_at_one(p));
        assert!(apply_to_f0(&target, &traced).is_err());
        let ratio = delta1_lattice_scalar(p) / delta1_scalar(p);
        let pi = p as i64;
        assert_eq!(ratio, q(pi * (pi - 1).pow(4) * (pi + 1).pow(2)));
        let scaled = LocalizedHecke::from_element(dual_euler_at_one(p).scale_q(&(q(1) / ratio)));
        apply_to_f0(&scaled, &traced).unwrap();
    }
}

#[test]
fn random_level_certificates() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for p in [2u64, 3] {
        for _ in 0..6 {
            let d = random_certified_delta(p, &mut rng, Level::DetP, Variant::S0, C).unwrap();
            let cert = certificate(p, &d, Variant::S0, C).unwrap();
            assert!(cert.verify());
            assert_eq!(cert.denom_power, 0);
        }
        for _ in 0..4 {
            let d = random_certified_delta(p, &mut rng, Level::DetP, Variant::S, C).unwrap();
            let cert = certificate(p, &d, Variant::S, C).unwrap();
            assert!(cert.verify());
            assert!(cert.denom_power <= 1);
        }
    }
}

#[test]
fn certificate_json_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    let p = 3;
    for _ in 0..4 {
        let d = random_certified_delta(p, &mut rng, Level::DetP, Variant::S, C).unwrap();
        let cert = certificate(p, &d, Variant::S, C).unwrap();
        let text = serde_json::to_string(&cert.to_json()).unwrap();
        assert!(text.contains("\"denomPower\"") && text.contains("\"A\"") && text.contains("\"B\""));
        let back = IdealCertificate::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert!(back.verify());
        assert!(back.target.equals(&cert.target));
        assert_eq!(back.a, cert.a);
        assert_eq!(back.b, cert.b);
    }
}

#[test]
fn mod_ell_examples() {
    let p = 3;
    let c0 = certificate(p, &delta0_datum(p), Variant::S, C).unwrap();
    let r0 = mod_ell_certificate(&c0, 2).unwrap();
    assert!(r0.holds() && r0.target.is_empty());
    let c1 = certificate(p, &delta1_datum(p, delta1_lattice_scalar(p)), Variant::S0, C).unwrap();
    let r1 = mod_ell_certificate(&c1, 2).unwrap();
    assert!(r1.holds());
    assert_eq!(r1.target, dual_euler_at_one(p).reduce_mod_ell(2).unwrap());
    assert!(mod_ell_certificate(&c0, 5).is_err());
}

#[test]
fn independence() {
    for p in [2u64, 3] {
        assert!(independence_check(p, &[CanonicalCoset::new(1, -2, 3, 1)]));
        let x = CanonicalCoset::new(0, 0, 1, 1);
        assert!(!independence_check(p, &[x, x]));
        let family: Vec<_> = (-2..=2)
            .flat_map(|m| (0..=2).map(move |n| CanonicalCoset::new(0, 0, m, n)))
            .filter(|x| x.is_valid())
            .collect();
        assert_eq!(family.len(), 12);
        assert!(independence_check(p, &family));
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        let mut wide = std::collections::BTreeSet::new();
        while wide.len() < 30 {
            wide.insert(random_coset(&mut rng, 3, 3, 2));
        }
        assert!(independence_check(p, &wide.into_iter().collect::<Vec<_>>()));
    }
}

#[test]
fn localization_reduction() {
    let p = 3;
    let h = HeckeElement::s(p, 1, 2).mul(&HeckeElement::s(p, 2, 1)).mul(&HeckeElement::t(p, 2));
    let r = reduce_mod_one_minus_sp(&h);
    assert_eq!(r, HeckeElement::s(p, 1, 1).mul(&HeckeElement::t(p, 2)));
    assert!(h.sub(&r).divide_exact().is_some());
}

#[test]
fn uncertified_full_datum_is_still_computed() {
    let p = 3;
    let phi = SchwartzFunction::phi_p2(p);
    let d = full(q(1), phi.clone(), GElement::identity());
    let out = p_delta(p, &d, C).unwrap();
    assert!(!out.is_integral());
    let direct = xi_c(p, &[(q(1), phi, GElement::identity())]).unwrap();
    assert_eq!(direct, xi_c_lattice(p, &d).unwrap());
}
