use proptest::prelude::*;
use qcap::channels::is_density;
use qcap::entropic::{binary_entropy, shannon_bits, vn_entropy};
use qcap::linalg::{diag_real, identity, projector, r, random_density, tensor_product, CMat};
use qcap::optimize::OptimConfig;
use qcap::spinalign::{
    assemble_state, conjectured_value, lemma_maximizer, lemma_objective, n1_solution,
    renyi2_alignment_check, search_minimum, tripartite_lemma_check, AlignmentInstance, Assignment,
    SearchConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_search() -> SearchConfig {
    let mut optim = OptimConfig {
        restarts: 4,
        max_iters: 500,
        ..OptimConfig::default()
    };
    optim.swarm.particles = 16;
    optim.swarm.iters = 80;
    SearchConfig {
        optim,
        ..SearchConfig::default()
    }
}

fn qubit(s: f64) -> CMat {
    diag_real(&[s, 1.0 - s])
}

#[test]
fn single_spin_states() {
    let full = AlignmentInstance::qubit(1, 0.3, vec![0.0, 1.0]).unwrap();
    let omega = projector(2, 0);
    let a = Assignment {
        states: vec![identity(1), omega.clone()],
    };
    assert!((assemble_state(&full, &a).unwrap() - &omega).norm() < 1e-15);
    assert!(conjectured_value(&full).abs() < 1e-12);

    let empty = AlignmentInstance::qubit(1, 0.3, vec![1.0, 0.0]).unwrap();
    assert!((assemble_state(&empty, &a).unwrap() - qubit(0.3)).norm() < 1e-15);
    assert!((conjectured_value(&empty) - binary_entropy(0.3)).abs() < 1e-12);
}

#[test]
fn two_spin_state_matches_hand_built_matrix() {
    let s = 0.3;
    let q = qubit(s);
    let up = projector(2, 1);
    let inst = AlignmentInstance::qubit(2, s, vec![0.25; 4]).unwrap();
    let kappa = assemble_state(&inst, &Assignment::aligned(&inst)).unwrap();
    let expected = (tensor_product(&q, &q)
        + tensor_product(&up, &q)
        + tensor_product(&q, &up)
        + tensor_product(&up, &up))
        * r(0.25);
    assert!((kappa - expected).norm() < 1e-14);
}

#[test]
fn spin_keeps_its_tensor_slot() {
    // Weight only on {spin 1}: ω sits in the second factor.
    let s = 0.2;
    let inst = AlignmentInstance::qubit(2, s, vec![0.0, 0.0, 1.0, 0.0]).unwrap();
    let zero = projector(2, 0);
    let a = Assignment {
        states: vec![
            identity(1),
            zero.clone(),
            zero.clone(),
            identity(4) * r(0.25),
        ],
    };
    let kappa = assemble_state(&inst, &a).unwrap();
    assert!((kappa - tensor_product(&qubit(s), &zero)).norm() < 1e-15);
}

#[test]
fn assemble_rejects_mismatched_states() {
    let inst = AlignmentInstance::qubit(2, 0.3, vec![0.25; 4]).unwrap();
    let bad = Assignment {
        states: vec![identity(1), identity(2) * r(0.5)],
    };
    assert!(assemble_state(&inst, &bad).is_err());
    assert!(AlignmentInstance::qubit(2, 0.3, vec![0.5; 4]).is_err());
    assert!(AlignmentInstance::qubit(2, 0.3, vec![0.25; 3]).is_err());
}

#[test]
fn pure_full_weight_has_zero_entropy() {
    let inst = AlignmentInstance::qubit(2, 0.5, vec![0.0, 0.0, 0.0, 1.0]).unwrap();
    assert!(conjectured_value(&inst).abs() < 1e-12);
}

#[test]
fn n1_closed_form() {
    let q = qubit(0.3);
    let (v0, _) = n1_solution(0.0, &q).unwrap();
    assert!((v0 - binary_entropy(0.3)).abs() < 1e-12);
    let (v1, w1) = n1_solution(1.0, &q).unwrap();
    assert!(v1.abs() < 1e-12);
    assert!((w1 - projector(2, 1)).norm() < 1e-12);
    let (half, _) = n1_solution(0.5, &qubit(0.5)).unwrap();
    assert!((half - binary_entropy(0.25)).abs() < 1e-12);
    assert!(n1_solution(1.5, &q).is_err());
}

#[test]
fn n1_search_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..4 {
        let q = random_density(2, &mut rng);
        let x1 = rand::Rng::random_range(&mut rng, 0.0..1.0);
        let inst = AlignmentInstance::new(1, q.clone(), vec![1.0 - x1, x1]).unwrap();
        let out = search_minimum(&inst, &small_search()).unwrap();
        let (closed, _) = n1_solution(x1, &q).unwrap();
        assert!(
            (out.best.value - closed).abs() < 1e-7,
            "{} vs {closed}",
            out.best.value
        );
        assert!(out.matches_conjecture);
    }
}

#[test]
fn two_spins_at_half_match_conjecture() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..5 {
        let w = AlignmentInstance::random_weights(2, &mut rng);
        let inst = AlignmentInstance::qubit(2, 0.5, w).unwrap();
        let out = search_minimum(&inst, &small_search()).unwrap();
        assert!(
            (out.best.value - out.conjectured).abs() < 1e-5,
            "{} vs {}",
            out.best.value,
            out.conjectured
        );
    }
}

#[test]
fn three_spins_never_beat_conjecture() {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_search();
    cfg.optim.restarts = 2;
    cfg.swarm = false;
    cfg.replay_dir = Some(dir.path().to_path_buf());
    for k in 0..50 {
        let w = AlignmentInstance::random_weights(3, &mut rng);
        let inst = AlignmentInstance::qubit(3, 0.3, w).unwrap();
        let cfg = SearchConfig {
            optim: cfg.optim.with_seed(k),
            ..cfg.clone()
        };
        let out = search_minimum(&inst, &cfg).unwrap();
        assert!(
            out.best.value >= out.conjectured - 1e-6,
            "draw {k}: {} < {}",
            out.best.value,
            out.conjectured
        );
        assert!(out.best.value <= out.conjectured + 1e-9);
    }
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn full_and_empty_support_closed_form() {
    // s = 1/2: κ = x[pure] + (1 − x) I/2^n.
    for n in 1..=3 {
        let dim = 1usize << n;
        for x in [0.1, 0.6, 0.95] {
            let mut w = vec![0.0; dim];
            w[0] = 1.0 - x;
            w[dim - 1] = x;
            let inst = AlignmentInstance::qubit(n, 0.5, w).unwrap();
            let tail = (1.0 - x) / dim as f64;
            let mut spectrum = vec![tail; dim];
            spectrum[0] += x;
            let expected = shannon_bits(&spectrum);
            assert!((conjectured_value(&inst) - expected).abs() < 1e-12);
            let out = search_minimum(&inst, &small_search()).unwrap();
            assert!((out.best.value - expected).abs() < 1e-9);
        }
    }
}

#[test]
fn instance_text_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let inst =
        AlignmentInstance::qubit(3, 0.3, AlignmentInstance::random_weights(3, &mut rng)).unwrap();
    let text = inst.to_text().unwrap();
    assert!(text.starts_with("n=3 s=0.3\n"));
    assert_eq!(AlignmentInstance::from_text(&text).unwrap(), inst);

    let ups =
        AlignmentInstance::from_text("n=1 upsilon=0.2,0.3,0.5\nM=0 x=0.25\nM=1 x=0.75\n").unwrap();
    assert_eq!(ups.site_dim(), 3);
    assert!(
        (conjectured_value(&ups) - shannon_bits(&[0.25 * 0.2, 0.25 * 0.3, 0.25 * 0.5 + 0.75]))
            .abs()
            < 1e-12
    );
    assert_eq!(
        AlignmentInstance::from_text(&ups.to_text().unwrap()).unwrap(),
        ups
    );

    assert!(AlignmentInstance::from_text("M=1 x=1").is_err());
    assert!(AlignmentInstance::from_text("n=1 s=0.3\nM=2 x=1").is_err());
    assert!(AlignmentInstance::from_text("n=1 s=0.3\nM=1 x=abc").is_err());
    assert!(AlignmentInstance::from_text("n=1 s=0.3\nM=1 x=0.5").is_err());
}

#[test]
fn renyi2_examples() {
    let half = AlignmentInstance::qubit(1, 0.5, vec![0.5, 0.5]).unwrap();
    let rep = renyi2_alignment_check(&half, 1000, 1);
    assert!((rep.aligned_purity - 0.625).abs() < 1e-14);
    assert!(rep.passed(), "{rep:?}");

    let uniform = AlignmentInstance::qubit(2, 0.3, vec![0.25; 4]).unwrap();
    assert!(renyi2_alignment_check(&uniform, 1000, 2).passed());

    let pure = AlignmentInstance::qubit(2, 0.3, vec![0.0, 0.0, 0.0, 1.0]).unwrap();
    let rep = renyi2_alignment_check(&pure, 200, 3);
    assert!((rep.aligned_purity - 1.0).abs() < 1e-12);
    assert!((rep.best_random_purity - 1.0).abs() < 1e-12);
    assert!(rep.passed());
}

#[test]
fn lemma_on_diagonal_operators() {
    let theta = diag_real(&[0.3, 1.7]);
    let z = diag_real(&[0.9, 0.4]);
    let xi = qcap::linalg::ket(2, 0);
    let (mu, nu) = lemma_maximizer(&theta, &z, &xi).unwrap();
    let v = lemma_objective(&theta, &z, &mu, &nu).unwrap();
    assert!((v - 1.7 * 0.9).abs() < 1e-12);
}

#[test]
fn lemma_with_identity_theta_ties() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let z = random_density(2, &mut rng);
    let top = qcap::linalg::max_eigenvalue(&z);
    for k in 0..3 {
        let xi = qcap::linalg::random_pure(2, &mut rng);
        let (mu, nu) = lemma_maximizer(&identity(2), &z, &xi).unwrap();
        let v = lemma_objective(&identity(2), &z, &mu, &nu).unwrap();
        assert!((v - top).abs() < 1e-12, "{k}: {v} vs {top}");
    }
}

#[test]
fn lemma_sampling_sweeps() {
    for dims in [(2, 2, 2), (3, 2, 3), (2, 3, 4)] {
        let rep = tripartite_lemma_check(dims, 500, 17).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }
    assert!(tripartite_lemma_check((0, 2, 2), 1, 0).is_err());
}

fn permute_weights(w: &[f64], perm: &[usize]) -> Vec<f64> {
    // Spin k of the new instance is spin perm[k] of the old one.
    let mut out = vec![0.0; w.len()];
    for (mask, x) in w.iter().enumerate() {
        let new_mask = perm
            .iter()
            .enumerate()
            .filter(|(_, &p)| mask >> p & 1 == 1)
            .map(|(k, _)| 1 << k)
            .sum::<usize>();
        out[new_mask] = *x;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn assembled_state_is_a_density(seed in 0u64..10_000, n in 1usize..=3, s in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = AlignmentInstance::qubit(n, s, AlignmentInstance::random_weights(n, &mut rng)).unwrap();
        let kappa = assemble_state(&inst, &Assignment::random_pure(&inst, &mut rng)).unwrap();
        prop_assert!(is_density(&kappa, 1e-10));
        prop_assert!(vn_entropy(&kappa).is_ok());
    }

    #[test]
    fn conjectured_value_is_permutation_invariant(seed in 0u64..10_000, s in 0.05f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = AlignmentInstance::random_weights(3, &mut rng);
        let base = conjectured_value(&AlignmentInstance::qubit(3, s, w.clone()).unwrap());
        for perm in [[1, 0, 2], [2, 0, 1], [2, 1, 0]] {
            let moved = AlignmentInstance::qubit(3, s, permute_weights(&w, &perm)).unwrap();
            prop_assert!((conjectured_value(&moved) - base).abs() < 1e-12);
        }
    }

    #[test]
    fn aligned_purity_is_a_density_purity(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = AlignmentInstance::qubit(2, 0.4, AlignmentInstance::random_weights(2, &mut rng)).unwrap();
        let kappa = assemble_state(&inst, &Assignment::aligned(&inst)).unwrap();
        let direct = (&kappa * &kappa).trace().re;
        let rep = renyi2_alignment_check(&inst, 0, seed);
        prop_assert!((rep.aligned_purity - direct).abs() < 1e-12);
    }
}
