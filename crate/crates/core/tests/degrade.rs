use qcap::channels::{make_o, make_v, make_w, ChannelPair, Leg};
use qcap::degrade::{
    compose_choi, dg_adg, omega, pcubed_coefficients, pcubed_criterion, pcubed_degradable,
    pcubed_gram,
};
use qcap::linalg::{c, identity, min_eigenvalue, random_unitary, tensor_vec, CMat, CVec, C64};
use qcap::sdp::SdpSettings;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ket3(amps: [C64; 3]) -> CVec {
    CVec::from_column_slice(&amps)
}

#[test]
fn product_basis_is_mapped_to_product_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..5 {
        let (s, mu, nu) = (
            rng.random_range(0.05..0.95),
            rng.random_range(0.05..0.95),
            rng.random_range(0.05..0.95),
        );
        let (k1, k2, l1, l2, rr) = pcubed_coefficients(s, mu, nu).unwrap();
        let v = &make_v(s, mu, nu).unwrap().isometry().matrix.clone();
        let one = c(1.0, 0.0);
        for i in 0..3u32 {
            let w = omega().powu(i);
            let alpha = ket3([one, w * k1, w * w * k2]);
            let beta = ket3([one, w * l1, w * w * l2]);
            let gamma = CVec::from_column_slice(&[one, w * w * rr]);
            let image = v * &alpha;
            let product = tensor_vec(&beta, &gamma);
            // Parallel vectors: |⟨x|y⟩| = |x||y|.
            let overlap = image.dotc(&product).norm();
            assert!(
                (overlap - image.norm() * product.norm()).abs() < 1e-10,
                "s={s} mu={mu} nu={nu} i={i}"
            );
        }
    }
}

#[test]
fn gram_values_at_half() {
    let mu = 0.3;
    let g = pcubed_gram(0.5, mu, 1.0 - mu).unwrap();
    assert!((g.input.m - c((1.0 - 2.0 * mu) / (2.0 * (2.0 - mu)), 0.0)).norm() < 1e-12);
    assert!((g.environment.m + omega() / 2.0).norm() < 1e-12);
    let w2 = omega() * omega();
    assert!((g.output.m - w2 * ((2.0 * mu - 1.0) / (2.0 - mu))).norm() < 1e-12);
    for mu in [0.1, 0.55, 0.9] {
        let g = pcubed_gram(0.5, mu, 1.0 - mu).unwrap();
        assert!((g.environment.m + omega() / 2.0).norm() < 1e-12);
    }
}

#[test]
fn gram_hadamard_identity_on_random_parameters() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let (s, mu, nu) = (
            rng.random_range(0.01..0.99),
            rng.random_range(0.01..0.99),
            rng.random_range(0.01..0.99),
        );
        let g = pcubed_gram(s, mu, nu).unwrap();
        let a = g.input.matrix();
        let bc = g.output.matrix().component_mul(&g.environment.matrix());
        assert!((a - bc).norm() < 1e-10);
        assert!(g.input.min_eigenvalue() > -1e-12);
    }
}

#[test]
fn gram_rejects_boundary_parameters() {
    assert!(pcubed_gram(0.0, 0.5, 0.5).is_err());
    assert!(pcubed_gram(0.5, 1.0, 0.5).is_err());
    assert!(pcubed_degradable(0.0).is_err());
    assert!(pcubed_degradable(1.0).is_err());
}

#[test]
fn criterion_examples() {
    assert!(pcubed_degradable(0.5).unwrap());
    assert!(!pcubed_degradable(0.7).unwrap());
    let edge = pcubed_criterion(2.0 / 3.0).unwrap();
    assert!(edge.criterion.abs() < 1e-12, "{}", edge.criterion);
    assert!(edge.degradable);
}

#[test]
fn criterion_flips_once_at_two_thirds() {
    let flips: Vec<f64> = (1..10_000)
        .map(|k| k as f64 * 1e-4)
        .collect::<Vec<_>>()
        .windows(2)
        .filter(|w| pcubed_degradable(w[0]).unwrap() != pcubed_degradable(w[1]).unwrap())
        .map(|w| w[1])
        .collect();
    assert_eq!(flips.len(), 1, "{flips:?}");
    assert!((flips[0] - 2.0 / 3.0).abs() <= 1e-4 + 1e-12, "{}", flips[0]);
}

/// Choi matrix of the composed channel built by applying both channels to `|i⟩⟨j|`.
fn composed_choi_direct(first: &ChannelPair, second: &ChannelPair) -> CMat {
    let da = first.d_in();
    let dout = second.d_out(Leg::Direct);
    let mut j = CMat::zeros(da * dout, da * dout);
    for i in 0..da {
        for k in 0..da {
            let mut e = CMat::zeros(da, da);
            e[(i, k)] = c(1.0, 0.0);
            let out = second.apply_unchecked(&first.apply_unchecked(&e, Leg::Direct), Leg::Direct);
            j.view_mut((i * dout, k * dout), (dout, dout))
                .copy_from(&out);
        }
    }
    j
}

#[test]
fn compose_choi_matches_direct_composition() {
    let first = make_w(0.5, 0.3).unwrap();
    let second = make_v(0.2, 0.6, 0.7).unwrap();
    let got = compose_choi(&first.choi(Leg::Direct), &second.choi(Leg::Direct), 3, 3, 3).unwrap();
    assert!((got - composed_choi_direct(&first, &second)).norm() < 1e-12);
    assert!(compose_choi(&identity(4), &identity(9), 3, 3, 3).is_err());
}

#[test]
fn dg_examples() {
    let settings = SdpSettings::default();
    let rep = dg_adg(&make_w(0.5, 0.3).unwrap(), &settings).unwrap();
    assert!(rep.dg < 1e-6, "{}", rep.dg);
    let anti = dg_adg(&make_w(0.5, 0.0).unwrap(), &settings).unwrap();
    assert!(anti.adg < 1e-6, "{}", anti.adg);
    let far = dg_adg(&make_w(0.5, 0.9).unwrap(), &settings).unwrap();
    assert!(far.dg > 1e-3, "{}", far.dg);
}

#[test]
fn degrading_map_is_a_channel_that_degrades() {
    let pair = make_w(0.5, 0.4).unwrap();
    let rep = dg_adg(&pair, &SdpSettings::default()).unwrap();
    assert!(rep.dg < 1e-6);
    let jd = rep.degrading_map_choi.unwrap();
    assert!(min_eigenvalue(&jd) > -1e-7);
    let tp = CMat::from_fn(3, 3, |i, j| {
        (0..2).map(|k| jd[(i * 2 + k, j * 2 + k)]).sum()
    });
    assert!((tp - identity(3)).norm() < 1e-7);
    let composed = compose_choi(&pair.choi(Leg::Direct), &jd, 3, 3, 2).unwrap();
    assert!((composed - pair.choi(Leg::Complement)).norm() < 1e-5);
}

#[test]
fn dg_agrees_with_gram_criterion_on_grid() {
    let settings = SdpSettings::default();
    for k in 0..=20 {
        let mu = (k as f64 / 20.0).clamp(1e-9, 1.0 - 1e-9);
        let criterion = pcubed_degradable(mu).unwrap();
        let dg = dg_adg(&make_w(0.5, mu).unwrap(), &settings).unwrap().dg;
        assert_eq!(
            dg < 1e-5,
            criterion,
            "mu = {mu}: dg = {dg}, criterion {criterion}"
        );
    }
}

#[test]
fn o_subchannels_are_degradable() {
    let mu = [0.3, 0.5, (1.0f64 - 0.34).sqrt()];
    let norm = mu.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mu: Vec<f64> = mu.iter().map(|x| x / norm).collect();
    let pair = make_o(&mu).unwrap();
    for i in 1..pair.d_in() {
        let sub = pair.restrict_to_basis(&[0, i]).unwrap();
        let rep = dg_adg(&sub, &SdpSettings::default()).unwrap();
        assert!(rep.dg < 1e-6, "sub-channel {i}: {}", rep.dg);
    }
}

#[test]
fn dg_is_invariant_under_output_rotation() {
    let pair = make_w(0.5, 0.8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let u = random_unitary(3, &mut rng);
    let lift = qcap::linalg::tensor_product(&u, &identity(2));
    let iso = qcap::channels::Isometry::new(&lift * &pair.isometry().matrix, 3, 3, 2).unwrap();
    let rotated = ChannelPair::new(iso, "rotated");
    let settings = SdpSettings::default();
    let a = dg_adg(&pair, &settings).unwrap();
    let b = dg_adg(&rotated, &settings).unwrap();
    assert!(
        (a.dg - b.dg).abs() < 1e-6 && (a.adg - b.adg).abs() < 1e-6,
        "{a:?} {b:?}"
    );
}
