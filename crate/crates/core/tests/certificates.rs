mod common;

use common::*;
use num::ToPrimitive;
use sephide_core::bounds::{f, lift3, lift_step, validate_hiding};
use sephide_core::constructions::*;
use sephide_core::discrimination::*;

#[test]
fn family_trace_norms_and_hiding_conditions() {
    for d in [3usize, 5, 7, 9] {
        let cert = exampled_certificate(d).unwrap();
        let (h, hp) = exampled_trace_norms(d);
        assert!((cert.tr_abs_h() - h.to_f64().unwrap()).abs() < 1e-9, "d={d}");
        assert!((cert.tr_abs_h_pt() - hp.to_f64().unwrap()).abs() < 1e-9, "d={d}");
        assert!(cert.feasibility_residual() <= 1e-9);
        let hid = validate_hiding(&cert);
        assert!(hid.is_hiding(), "d={d}: {:?}", hid.failure());
    }
}

#[test]
fn family_trace_norms_agree_with_jacobi() {
    for d in [3usize, 5] {
        let cert = exampled_certificate(d).unwrap();
        assert!((oracle_trace_norm(cert.h()) - cert.tr_abs_h()).abs() < 1e-10);
        assert!((oracle_trace_norm(cert.h_pt()) - cert.tr_abs_h_pt()).abs() < 1e-10);
    }
}

#[test]
fn family_closed_form_is_feasible_beyond_the_eigen_cap() {
    for d in [11usize, 13] {
        let e = exampled_ensemble(d).unwrap();
        let h = exampled_h(d).unwrap();
        let res = (&h + &h.partial_transpose()).max_abs_diff(&e.lambda());
        assert!(res < 1e-12, "d={d}: {res}");
        assert!(h.partial_transpose().max_abs_diff(&exampled_h_pt_closed_form(d).unwrap()) < 1e-12);
    }
}

#[test]
fn both_three_dimensional_certificates_share_trace_norms() {
    let a = example1_certificate().unwrap();
    let b = exampled_certificate(3).unwrap();
    assert!((a.tr_abs_h() - b.tr_abs_h()).abs() < 1e-12);
    assert!((a.tr_abs_h_pt() - b.tr_abs_h_pt()).abs() < 1e-12);
}

#[test]
fn balance_identity_for_construction_certificates() {
    let cases = [
        (example1_ensemble().unwrap(), example1_certificate().unwrap()),
        (exampled_ensemble(5).unwrap(), exampled_certificate(5).unwrap()),
        (exampled_ensemble(7).unwrap(), exampled_certificate(7).unwrap()),
    ];
    for (e, cert) in &cases {
        assert!(balance_residual(cert, e).unwrap() < 1e-8);
    }
}

#[test]
fn solver_certificates_balance_and_pair_nonnegatively() {
    let mut g = rng(31);
    for _ in 0..6 {
        let e = random_pt_invariant_ensemble(&mut g, 2);
        let dual = minimize_q(&e, &SolveParams::default()).unwrap();
        let cert = &dual.certificate;
        assert!(cert.is_valid());
        assert!(balance_residual(cert, &e).unwrap() < 1e-8);
        let primal = primal_ppt_ascent(&e, &SolveParams::primal()).unwrap();
        assert!(primal.measurement.is_ppt_measurement(1e-9).unwrap());
        for v in pairing_values(cert, &primal.measurement).unwrap() {
            assert!(v >= -1e-9, "pairing {v}");
        }
        // weak duality: any PPT measurement scores at most q(H)
        assert!(primal.value <= cert.q_value() + 1e-9);
        assert!(cert.q_value() <= helstrom(&e).unwrap() + 1e-8);
        assert!(locc_floor(&e) <= primal.value + 1e-12);
    }
}

#[test]
fn lift_step_on_first_example() {
    let e = example1_ensemble().unwrap();
    let cert = example1_certificate().unwrap();
    let lam = e.lambda();
    let next = lift_step(&cert, &lam, &lam).unwrap();
    assert_eq!(next.h().side(), 81);
    assert!(next.is_valid());
    assert!(next.q_value() <= 11.0 / 12.0 + 1e-12);
    let tr_lam = lam.trace_norm().unwrap();
    assert!(next.tr_abs_h() <= cert.tr_abs_h() * tr_lam + 1e-12);
}

#[test]
fn lift3_refuses_violated_hypothesis() {
    // adding K with K^PT = −K keeps H feasible but inflates both trace norms
    let e = product_pair(2, (0, 0), (1, 1));
    let lam = e.lambda();
    let x = random_hermitian(&mut rng(1), 2, 2);
    let k = &x - &x.partial_transpose();
    let cert = DualCertificate::certify(&lam.scale(0.5) + &k, &lam, 1e-12).unwrap();
    assert!(cert.is_valid());
    assert!(cert.tr_abs_h() + cert.tr_abs_h_pt() > 1.5);
    assert!(matches!(lift3(&cert, &lam), Err(sephide_core::Error::Hypothesis(_))));
}

#[test]
fn lift3_contracts_a_small_solver_certificate() {
    let mut g = rng(5);
    for _ in 0..20 {
        let e = random_pt_invariant_ensemble(&mut g, 2);
        let cert = minimize_q(&e, &SolveParams::default()).unwrap().certificate;
        if cert.tr_abs_h() + cert.tr_abs_h_pt() > 1.0 {
            continue;
        }
        let lifted = lift3(&cert, &e.lambda()).unwrap();
        assert!(lifted.is_valid());
        assert!(lifted.tr_abs_h() <= f(cert.tr_abs_h()) + 1e-8);
        assert!(lifted.tr_abs_h_pt() <= f(cert.tr_abs_h_pt()) + 1e-8);
        return;
    }
    panic!("no random certificate met the lift hypothesis");
}

#[test]
fn construction_certificates_are_ppt_optimal_numerically() {
    for (e, target) in [
        (example1_ensemble().unwrap(), 11.0 / 12.0),
        (exampled_ensemble(5).unwrap(), 0.5 + 7.0 / 20.0),
    ] {
        let lo = primal_ppt_ascent(&e, &SolveParams::primal()).unwrap().value;
        let hi = minimize_q(&e, &SolveParams::default()).unwrap().value();
        assert!(lo <= hi + 1e-9);
        assert!((hi - target).abs() < 1e-6 && (lo - target).abs() < 1e-6, "{lo} {hi}");
    }
}

#[test]
fn decompositions_and_sign_sums_up_to_nine() {
    for d in [3usize, 5, 7, 9] {
        let rep = verify_decomposition(d).unwrap();
        assert!(rep.residual0 <= 1e-9 && rep.residual1 <= 1e-9, "{rep:?}");
        assert_eq!(rep.subsets, 1 << (d - 1));
        assert!(verify_sign_sums(d).unwrap().passed());
        assert!(d_operators(d).unwrap().pt_identities().max_residual() <= 1e-10);
    }
}

#[test]
fn vectors_are_normalized_and_states_separable_by_construction() {
    for c in [Construction::Example1, Construction::ExampleD(5), Construction::ExampleD(7)] {
        let (m0, m1) = c.mixtures().unwrap();
        let e = c.ensemble().unwrap();
        assert!(m0.norm_defect() < 1e-12 && m1.norm_defect() < 1e-12);
        assert!(m0.to_operator().max_abs_diff(e.rho0()) <= 1e-12);
        assert!(m1.to_operator().max_abs_diff(e.rho1()) <= 1e-12);
        assert!(e.overlap() <= 1e-12);
    }
}
