use nalgebra::DMatrix;
use proptest::prelude::*;
use qcap::linalg::{
    eigenvalues_hermitian, hermitian_eigensystem, partial_trace, partial_transpose,
    random_gaussian_matrix, random_hermitian, tensor_product,
};
use qcap::optimize::golden_max;
use qcap::sdp::{solve, BlockSparse, SdpProblem, SdpSettings, Sense};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..4, 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_trace_preserves_trace(seed in any::<u64>(), dims in dims_strategy(), mask in any::<u8>()) {
        let n: usize = dims.iter().product();
        let x = random_gaussian_matrix(n, n, &mut ChaCha8Rng::seed_from_u64(seed));
        let keep: Vec<usize> = (0..dims.len()).filter(|i| mask >> i & 1 == 1).collect();
        if keep.is_empty() {
            prop_assert!(partial_trace(&x, &dims, &keep).is_err());
            return Ok(());
        }
        let reduced = partial_trace(&x, &dims, &keep).unwrap();
        let kept: usize = keep.iter().map(|&i| dims[i]).product();
        prop_assert_eq!(reduced.nrows(), kept);
        prop_assert!((reduced.trace() - x.trace()).norm() < 1e-10 * (1.0 + x.norm()));
    }

    #[test]
    fn partial_trace_of_a_product_keeps_the_factor(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_gaussian_matrix(da, da, &mut rng);
        let b = random_gaussian_matrix(db, db, &mut rng);
        let ab = tensor_product(&a, &b);
        let left = partial_trace(&ab, &[da, db], &[0]).unwrap();
        prop_assert!((left - &a * b.trace()).norm() < 1e-10 * (1.0 + ab.norm()));
    }

    #[test]
    fn partial_transpose_is_an_involution(seed in any::<u64>(), dims in dims_strategy(), pick in 0usize..3) {
        let n: usize = dims.iter().product();
        let x = random_gaussian_matrix(n, n, &mut ChaCha8Rng::seed_from_u64(seed));
        let factor = pick % dims.len();
        let once = partial_transpose(&x, &dims, factor).unwrap();
        let twice = partial_transpose(&once, &dims, factor).unwrap();
        prop_assert!((twice - &x).norm() < 1e-12);
        prop_assert!((once.trace() - x.trace()).norm() < 1e-10 * (1.0 + x.norm()));
    }

    #[test]
    fn eigensystem_ascends_and_reconstructs(seed in any::<u64>(), n in 1usize..7) {
        let h = random_hermitian(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let e = hermitian_eigensystem(&h).unwrap();
        prop_assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!((e.reconstruct() - &h).norm() < 1e-10 * (1.0 + h.norm()));
        let sum: f64 = eigenvalues_hermitian(&h).iter().sum();
        prop_assert!((sum - h.trace().re).abs() < 1e-10 * (1.0 + h.norm()));
    }
}

fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    (&a + a.transpose()) * 0.5
}

/// `min <C0, X0> + <C1, X1>` over PSD blocks with `tr X0 + tr X1 = 1`.
/// The optimum is the smaller of the two least eigenvalues.
fn two_block_problem(c: &[DMatrix<f64>], order: [usize; 2], scale: f64) -> SdpProblem {
    let blocks = order.iter().map(|&k| c[k].nrows()).collect();
    let mut p = SdpProblem::new(blocks, Sense::Min);
    let mut trace = BlockSparse::new();
    for (slot, &k) in order.iter().enumerate() {
        let n = c[k].nrows();
        for i in 0..n {
            for j in i..n {
                p.objective.push(slot, i, j, c[k][(i, j)]);
            }
            trace.push(slot, i, i, scale);
        }
    }
    p.add_constraint(trace, scale);
    p
}

fn least_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigenvalues().min()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sdp_value_ignores_constraint_scaling_and_block_order(seed in any::<u64>(), scale in 0.01..100.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = [random_symmetric(2, &mut rng), random_symmetric(3, &mut rng)];
        let expected = least_eigenvalue(&c[0]).min(least_eigenvalue(&c[1]));
        let settings = SdpSettings::default();
        let base = solve(&two_block_problem(&c, [0, 1], 1.0), &settings).unwrap();
        let scaled = solve(&two_block_problem(&c, [0, 1], scale), &settings).unwrap();
        let swapped = solve(&two_block_problem(&c, [1, 0], 1.0), &settings).unwrap();
        for sol in [&base, &scaled, &swapped] {
            prop_assert!(sol.is_optimal(), "{:?}", sol.status);
            prop_assert!((sol.primal_obj - expected).abs() < 1e-6, "{} vs {}", sol.primal_obj, expected);
        }
        prop_assert!((scaled.primal_obj - base.primal_obj).abs() < 1e-7);
        prop_assert!((swapped.primal_obj - base.primal_obj).abs() < 1e-7);
    }
}

#[test]
fn golden_section_evaluation_count() {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    for (width, tol) in [(1.0, 1e-6), (0.5, 1e-10), (2.0, 1e-3)] {
        let mut calls = 0usize;
        let res = golden_max(
            |x| {
                calls += 1;
                -(x - 0.1) * (x - 0.1)
            },
            0.0,
            width,
            tol,
        )
        .unwrap();
        assert_eq!(res.evaluations, calls);
        // Two interior points, then one new point per shrink by 1/φ.
        let shrinks = ((tol / width).ln() / inv_phi.ln()).ceil() as usize;
        assert!(
            calls >= shrinks && calls <= shrinks + 3,
            "width {width}, tol {tol}: {calls} vs {shrinks}"
        );
        assert!((res.argument.as_scalar().unwrap() - 0.1).abs() <= tol);
    }
}
