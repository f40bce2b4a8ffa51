use qcap::capacity::{
    ea_capacity, effective_ensemble_size, holevo_ensemble, holevo_info, log_singularity_probe,
    private_info, q1, q1_multiletter, renyi_q1_reduced, subchannel_ordering, ProbeConfig,
    Q1Strategy,
};
use qcap::channels::{make_md, make_ns, make_o, make_w, ChannelPair, Isometry, Leg};
use qcap::entropic::renyi_entropy;
use qcap::linalg::{c, identity, ket, projector, r, CMat};
use qcap::optimize::OptimConfig;
use qcap::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn quick() -> OptimConfig {
    OptimConfig {
        restarts: 6,
        ..OptimConfig::default()
    }
}

/// Every input is sent to `|0⟩_b`; the input is copied into the environment.
fn constant_channel(d: usize) -> ChannelPair {
    let mut v = CMat::zeros(2 * d, d);
    for i in 0..d {
        v[(i, i)] = c(1.0, 0.0);
    }
    ChannelPair::new(Isometry::new(v, d, 2, d).unwrap(), "constant")
}

fn qubit_identity() -> ChannelPair {
    ChannelPair::new(Isometry::new(identity(2), 2, 2, 1).unwrap(), "id2")
}

fn random_ascending_mu(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut raw: Vec<f64> = (0..d - 1).map(|_| rng.random_range(0.05..1.0)).collect();
    raw.sort_by(f64::total_cmp);
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    raw.iter().map(|x| x / norm).collect()
}

#[test]
fn q1_of_n0_is_one() {
    let res = q1(&make_ns(0.0).unwrap(), Q1Strategy::Reduced, &quick()).unwrap();
    assert!((res.value - 1.0).abs() < 1e-9, "{}", res.value);
}

#[test]
fn q1_of_dephasing_point() {
    let res = q1(&make_w(0.5, 0.5).unwrap(), Q1Strategy::General, &quick()).unwrap();
    assert!((res.value - 1.5f64.log2()).abs() < 1e-6, "{}", res.value);
}

#[test]
fn reduced_and_general_q1_agree() {
    let pair = make_ns(0.25).unwrap();
    let a = q1(&pair, Q1Strategy::Reduced, &quick()).unwrap().value;
    let b = q1(&pair, Q1Strategy::General, &quick()).unwrap().value;
    assert!((a - b).abs() < 1e-6, "{a} vs {b}");
}

#[test]
fn reduced_strategy_needs_o_family() {
    let err = q1(&make_w(0.5, 0.3).unwrap(), Q1Strategy::Reduced, &quick()).unwrap_err();
    assert!(matches!(err, Error::Unsupported(_)));
}

#[test]
fn multiletter_values() {
    let pair = make_ns(0.5).unwrap();
    let cfg = quick();
    let single = q1(&pair, Q1Strategy::General, &cfg).unwrap().value;
    let one = q1_multiletter(&pair, 1, &cfg).unwrap().value;
    assert!((one - single).abs() < 1e-8);
    let two = q1_multiletter(
        &pair,
        2,
        &OptimConfig {
            restarts: 3,
            ..cfg.clone()
        },
    )
    .unwrap()
    .value;
    assert!(two >= single - 1e-6, "{two} < {single}");
    assert!(two <= single + 1e-4, "{two} > {single}");
    assert!(matches!(
        q1_multiletter(&pair, 5, &cfg),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn holevo_values() {
    let cfg = quick();
    let ns = holevo_info(&make_ns(0.3).unwrap(), &cfg).unwrap().value;
    assert!((ns - 1.0).abs() < 1e-4, "{ns}");
    let w = holevo_info(&make_w(0.5, 0.5).unwrap(), &cfg).unwrap().value;
    assert!((w - 3f64.log2()).abs() < 1e-6, "{w}");
    let flat = holevo_info(&constant_channel(2), &cfg).unwrap().value;
    assert!(flat.abs() < 1e-9, "{flat}");
}

#[test]
fn private_info_values() {
    let cfg = quick();
    let ns = private_info(&make_ns(0.2).unwrap(), &cfg).unwrap().value;
    assert!(ns >= 1.0 - 1e-6, "{ns}");
    let flat = private_info(&constant_channel(2), &cfg).unwrap().value;
    assert!(flat.abs() < 1e-6, "{flat}");
    for mu in [0.3, 0.7] {
        let pair = make_w(0.5, mu).unwrap();
        let p = private_info(&pair, &cfg).unwrap().value;
        let q = q1(&pair, Q1Strategy::General, &cfg).unwrap().value;
        assert!(p >= q - 1e-6, "mu = {mu}: {p} < {q}");
    }
}

#[test]
fn entanglement_assisted_values() {
    let cfg = quick();
    for s in [0.1, 0.5] {
        let v = ea_capacity(&make_ns(s).unwrap(), &cfg).unwrap().value;
        assert!((v - 2.0).abs() < 1e-5, "s = {s}: {v}");
    }
    let w = ea_capacity(&make_w(0.5, 0.5).unwrap(), &cfg).unwrap().value;
    assert!((w - 4.5f64.log2()).abs() < 1e-5, "{w}");
    let id = ea_capacity(&qubit_identity(), &cfg).unwrap().value;
    assert!((id - 2.0).abs() < 1e-6, "{id}");
}

#[test]
fn assisted_capacity_dominates_holevo() {
    let cfg = quick();
    let pair = make_w(0.5, 0.8).unwrap();
    let ea = ea_capacity(&pair, &cfg).unwrap().value;
    let chi = holevo_info(&pair, &cfg).unwrap().value;
    assert!(ea >= chi - 1e-6);
}

#[test]
fn probe_sees_rate_one_singularity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for d in [3, 4, 5] {
        let mu = random_ascending_mu(d, &mut rng);
        let pair = make_o(&mu).unwrap();
        let rep = log_singularity_probe(
            &pair,
            &projector(d, 0),
            &projector(d, d - 1),
            &ProbeConfig::default(),
        )
        .unwrap();
        assert!(rep.delta_positive, "{mu:?}");
        assert!(
            (rep.rate_estimate - 1.0).abs() < 0.05,
            "{mu:?}: {}",
            rep.rate_estimate
        );
    }
    let pair = make_ns(0.3).unwrap();
    let rep = log_singularity_probe(
        &pair,
        &projector(3, 0),
        &projector(3, 2),
        &ProbeConfig::default(),
    )
    .unwrap();
    assert!((rep.rate_estimate - 1.0).abs() < 0.05);
    // The complement of [0] is full rank, so that leg has no singular term.
    let cfg = ProbeConfig {
        leg: Leg::Complement,
        ..ProbeConfig::default()
    };
    let rep = log_singularity_probe(&pair, &projector(3, 0), &projector(3, 2), &cfg).unwrap();
    assert!(rep.rate_estimate.abs() < 0.05, "{}", rep.rate_estimate);
}

#[test]
fn probe_rejects_bad_grid() {
    let pair = make_ns(0.3).unwrap();
    let cfg = ProbeConfig {
        eps_grid: vec![1e-3],
        ..ProbeConfig::default()
    };
    assert!(log_singularity_probe(&pair, &projector(3, 0), &projector(3, 2), &cfg).is_err());
}

#[test]
fn subchannels_are_ordered() {
    let cfg = quick();
    let raw = [0.3f64, 0.5, (1.0f64 - 0.34).sqrt()];
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mu: Vec<f64> = raw.iter().map(|x| x / norm).collect();
    let values = subchannel_ordering(&mu, &cfg).unwrap();
    assert_eq!(values.len(), 3);
    for w in values.windows(2) {
        assert!(w[1] >= w[0] - 1e-9, "{values:?}");
    }
    let full = q1(&make_o(&mu).unwrap(), Q1Strategy::Reduced, &cfg)
        .unwrap()
        .value;
    assert!((values[2] - full).abs() < 1e-9);

    let uniform = subchannel_ordering(&[1.0 / 3f64.sqrt(); 3], &cfg).unwrap();
    for v in &uniform {
        assert!((v - uniform[0]).abs() < 1e-9, "{uniform:?}");
    }
}

#[test]
fn renyi_reduced_limits() {
    let cfg = quick();
    let pair = make_md(4).unwrap();
    let von_neumann = q1(&pair, Q1Strategy::Reduced, &cfg).unwrap().value;
    let near_one = renyi_q1_reduced(&pair, 1.0, &cfg).unwrap().value;
    assert!((von_neumann - near_one).abs() < 1e-6);
    assert!(renyi_q1_reduced(&pair, -1.0, &cfg).is_err());
    assert!(renyi_q1_reduced(&make_w(0.5, 0.5).unwrap(), 2.0, &cfg).is_err());
}

#[test]
fn renyi_two_reduced_matches_grid_over_coherent_inputs() {
    // Inputs (1 − u)[0] + u[σ'] with σ' pure on span{|1⟩, |2⟩}, scanned on a grid.
    let pair = make_ns(0.5).unwrap();
    let reduced = renyi_q1_reduced(&pair, 2.0, &quick()).unwrap();
    let renyi = |m: &CMat| renyi_entropy(m, 2.0).unwrap();
    let mut best = f64::NEG_INFINITY;
    let steps = 60;
    for iu in 0..=200 {
        let u = iu as f64 / 200.0;
        for it in 0..=steps {
            let theta = std::f64::consts::PI * it as f64 / steps as f64;
            for ip in 0..steps {
                let phi = 2.0 * std::f64::consts::PI * ip as f64 / steps as f64;
                let a = (theta / 2.0).cos();
                let b = c(
                    (theta / 2.0).sin() * phi.cos(),
                    (theta / 2.0).sin() * phi.sin(),
                );
                let mut rho = projector(3, 0) * r(1.0 - u);
                let v = [c(0.0, 0.0), c(a, 0.0), b];
                for i in 0..3 {
                    for j in 0..3 {
                        rho[(i, j)] += v[i] * v[j].conj() * r(u);
                    }
                }
                let val = renyi(&pair.apply(&rho, Leg::Direct).unwrap())
                    - renyi(&pair.apply(&rho, Leg::Complement).unwrap());
                best = best.max(val);
            }
        }
    }
    assert!(reduced.value >= best - 1e-9, "{} < {best}", reduced.value);
    assert!(reduced.value - best < 1e-4, "{} vs {best}", reduced.value);
}

#[test]
fn min_entropy_difference_vanishes_at_pure_image() {
    let pair = make_ns(0.3).unwrap();
    let rho = projector(3, 2);
    let b = renyi_entropy(&pair.apply(&rho, Leg::Direct).unwrap(), f64::INFINITY).unwrap();
    let e = renyi_entropy(&pair.apply(&rho, Leg::Complement).unwrap(), f64::INFINITY).unwrap();
    assert!((b - e).abs() < 1e-12);
    assert!(
        renyi_q1_reduced(&pair, f64::INFINITY, &quick())
            .unwrap()
            .value
            >= -1e-12
    );
}

#[test]
fn effective_size_merges_repeated_states() {
    let states = vec![ket(3, 0), ket(3, 0) * c(0.0, 1.0), ket(3, 1), ket(3, 2)];
    assert_eq!(
        effective_ensemble_size(&[0.3, 0.3, 0.4, 0.0], &states, 1e-4),
        2
    );
    assert_eq!(effective_ensemble_size(&[0.25; 4], &states, 1e-4), 3);
}

#[test]
fn holevo_optimum_at_dephasing_point_needs_three_states() {
    // χ ≤ log₂ m for m states, so reaching log₂ 3 needs at least three.
    let res = holevo_info(&make_w(0.5, 0.5).unwrap(), &quick()).unwrap();
    let (probs, states) = holevo_ensemble(&res.argument).unwrap();
    assert!(effective_ensemble_size(&probs, &states, 1e-4) >= 3);
}
