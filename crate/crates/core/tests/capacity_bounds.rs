use qcap::capacity::{
    beta_bound, default_witnesses, gamma_bound, private_upper_bound, transposition_bound,
    verify_certificates, verify_certificates_against, CapacityReport, CertificateFamily,
    ReportConfig,
};
use qcap::channels::{make_md, make_ns, make_v, make_w, ChannelPair, Isometry};
use qcap::linalg::{identity, random_unitary};
use qcap::optimize::{OptimConfig, SwarmConfig};
use qcap::sdp::SdpSettings;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn identity_channel(d: usize) -> ChannelPair {
    ChannelPair::new(
        Isometry::new(identity(d), d, d, 1).unwrap(),
        format!("id{d}"),
    )
}

#[test]
fn gamma_and_transposition_match_closed_form_for_ns() {
    let settings = SdpSettings::default();
    for s in [0.0, 0.2, 0.5] {
        let pair = make_ns(s).unwrap();
        let expected = 1.0 + (1.0 - s).sqrt();
        let g = gamma_bound(&pair, &settings).unwrap();
        let t = transposition_bound(&pair, &settings).unwrap();
        assert!((g.value - expected).abs() < 1e-6, "gamma {s}: {}", g.value);
        assert!(
            (t.value - expected).abs() < 1e-6,
            "transposition {s}: {}",
            t.value
        );
        assert!((g.log2 - expected.log2()).abs() < 1e-6);
    }
}

#[test]
fn identity_channel_values() {
    let settings = SdpSettings::default();
    let qubit = identity_channel(2);
    assert!((gamma_bound(&qubit, &settings).unwrap().value - 2.0).abs() < 1e-6);
    let qutrit = identity_channel(3);
    assert!((beta_bound(&qutrit, &settings).unwrap().value - 3.0).abs() < 1e-6);
}

#[test]
fn beta_is_two_for_ns_and_md() {
    let settings = SdpSettings::default();
    for s in [0.0, 0.25, 0.5] {
        let b = beta_bound(&make_ns(s).unwrap(), &settings).unwrap();
        assert!((b.value - 2.0).abs() < 1e-6, "s = {s}: {}", b.value);
    }
    for d in [3, 4] {
        let b = beta_bound(&make_md(d).unwrap(), &settings).unwrap();
        assert!((b.value - 2.0).abs() < 1e-6, "d = {d}: {}", b.value);
    }
}

#[test]
fn md_transposition_bound() {
    let settings = SdpSettings::default();
    for d in [3, 4] {
        let t = transposition_bound(&make_md(d).unwrap(), &settings).unwrap();
        assert!(
            t.value <= 1.0 + 1.0 / ((d - 1) as f64).sqrt() + 1e-6,
            "d = {d}: {}",
            t.value
        );
    }
    let m3 = transposition_bound(&make_md(3).unwrap(), &settings).unwrap();
    let n_half = transposition_bound(&make_ns(0.5).unwrap(), &settings).unwrap();
    assert!((m3.value - n_half.value).abs() < 1e-6);
}

#[test]
fn gamma_never_exceeds_transposition_on_random_v_channels() {
    let settings = SdpSettings::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..4 {
        let s = rand::Rng::random_range(&mut rng, 0.05..0.95);
        let mu = rand::Rng::random_range(&mut rng, 0.05..0.95);
        let nu = rand::Rng::random_range(&mut rng, 0.05..0.95);
        let pair = make_v(s, mu, nu).unwrap();
        let g = gamma_bound(&pair, &settings).unwrap();
        let t = transposition_bound(&pair, &settings).unwrap();
        assert!(
            g.value <= t.value + 1e-6,
            "V({s}, {mu}, {nu}): {} > {}",
            g.value,
            t.value
        );
    }
}

#[test]
fn bounds_are_unitarily_invariant_on_the_output() {
    // Rotating the output by a unitary leaves every capacity bound unchanged.
    let settings = SdpSettings::default();
    let pair = make_ns(0.3).unwrap();
    let iso = pair.isometry();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u = random_unitary(3, &mut rng);
    let lift = qcap::linalg::tensor_product(&u, &identity(2));
    let rotated = ChannelPair::new(
        Isometry::new(&lift * &iso.matrix, 3, 3, 2).unwrap(),
        "rotated",
    );
    let a = beta_bound(&pair, &settings).unwrap().value;
    let b = beta_bound(&rotated, &settings).unwrap().value;
    assert!((a - b).abs() < 1e-6);
}

#[test]
fn private_upper_bound_dominates_ns_private_capacity() {
    let settings = SdpSettings::default();
    let pair = make_ns(0.3).unwrap();
    let ub = private_upper_bound(&pair, 5, &default_witnesses(3), &settings).unwrap();
    assert!(ub.value >= 1.0 - 1e-6, "{}", ub.value);
    assert_eq!(ub.levels, 5);
    assert_eq!(ub.witnesses, 6);
}

#[test]
fn private_upper_bound_rejects_bad_input() {
    let settings = SdpSettings::default();
    let pair = make_ns(0.3).unwrap();
    assert!(private_upper_bound(&pair, 0, &default_witnesses(3), &settings).is_err());
    let bad = vec![qcap::linalg::ket(3, 0) * qcap::linalg::r(2.0)];
    assert!(private_upper_bound(&pair, 2, &bad, &settings).is_err());
}

#[test]
fn ns_certificates_hold() {
    for k in 0..=10 {
        let s = 0.05 * k as f64;
        let report = verify_certificates(CertificateFamily::Ns(s)).unwrap();
        let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).collect();
        assert!(failed.is_empty(), "s = {s}: {failed:?}");
    }
    let report = verify_certificates(CertificateFamily::Ns(0.4)).unwrap();
    let target = 1.0 + 0.6f64.sqrt();
    assert!((report.check("transposition: ||Y_a||").unwrap().value - target).abs() < 1e-10);
    assert!((report.check("gamma: tr RJ").unwrap().value - target).abs() < 1e-10);
    assert!((report.check("beta: tr S").unwrap().value - 2.0).abs() < 1e-12);
}

#[test]
fn md_certificates_hold() {
    for d in 3..=6 {
        let report = verify_certificates(CertificateFamily::Md(d)).unwrap();
        let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).collect();
        assert!(failed.is_empty(), "d = {d}: {failed:?}");
    }
    let report = verify_certificates(CertificateFamily::Md(5)).unwrap();
    assert!(
        report
            .check("transposition: Y_a - (1 + 1/sqrt(d-1)) I")
            .unwrap()
            .value
            < 1e-12
    );
    assert!((report.check("transposition: ||Y_a||").unwrap().value - 1.5).abs() < 1e-12);
}

#[test]
fn certificates_reject_out_of_range_parameters() {
    assert!(verify_certificates(CertificateFamily::Ns(0.7)).is_err());
    assert!(verify_certificates(CertificateFamily::Md(2)).is_err());
}

#[test]
fn tampered_choi_fails_named_checks() {
    let mut j = make_ns(0.3).unwrap().choi(qcap::channels::Leg::Direct);
    j *= qcap::linalg::r(1.1);
    let report = verify_certificates_against(CertificateFamily::Ns(0.3), &j).unwrap();
    assert!(!report.passed());
    assert!(!report.check("gamma: tr RJ").unwrap().passed);
    let clean = make_md(4).unwrap().choi(qcap::channels::Leg::Direct);
    assert!(
        verify_certificates_against(CertificateFamily::Md(4), &clean)
            .unwrap()
            .passed()
    );
    assert!(verify_certificates_against(CertificateFamily::Md(4), &j).is_err());
}

#[test]
fn report_values_are_ordered() {
    let config = ReportConfig {
        optim: OptimConfig {
            restarts: 4,
            swarm: SwarmConfig {
                particles: 10,
                iters: 100,
                ..SwarmConfig::default()
            },
            ..OptimConfig::default()
        },
        levels: 3,
        ..ReportConfig::default()
    };
    for pair in [make_ns(0.3).unwrap(), make_w(0.5, 0.7).unwrap()] {
        let report = CapacityReport::compute(&pair, &config).unwrap();
        assert!(
            report.ordering_violations().is_empty(),
            "{:?}",
            report.ordering_violations()
        );
        assert!(report.ea >= report.holevo_lower - 1e-9);
        assert!(report.q1_lower >= 0.0 && report.q1_lower <= report.private_upper + 1e-6);
    }
}
