mod common;

use common::*;
use proptest::prelude::*;

use normschur::clustering::{build_adjacency_threshold, connected_components};
use normschur::genmat::{generate, EnsembleSpec, MatrixClass};
use normschur::matcore::{
    apply_givens_left, frobenius_norm, normality_residual, offschur, DenseMatrix, GivensRotation,
};
use normschur::structured::sskh;

fn table_class() -> impl Strategy<Value = MatrixClass> {
    prop::sample::select(MatrixClass::BENCHMARK.to_vec())
}

fn truth_class() -> impl Strategy<Value = MatrixClass> {
    prop::sample::select(vec![
        MatrixClass::Exp2,
        MatrixClass::Exp3,
        MatrixClass::Exp4,
    ])
}

fn as_case(c: Check) -> Result<(), TestCaseError> {
    c.map_err(TestCaseError::fail)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn decomposition_reconstructs(class in table_class(), n in 2usize..=96, seed in any::<u64>()) {
        as_case(check_decomposition(class, n, seed))?;
    }

    #[test]
    fn spectrum_round_trips(class in truth_class(), n in 2usize..=64, seed in any::<u64>()) {
        as_case(check_spectrum_roundtrip(class, n, seed))?;
    }

    #[test]
    fn generated_matrices_are_normal(class in table_class(), n in 2usize..=64, seed in any::<u64>()) {
        let (a, _) = generate(&EnsembleSpec::new(n, class, seed));
        let norm = frobenius_norm(&a);
        prop_assert!(normality_residual(&a) <= 1e-12 * norm * norm);
    }

    #[test]
    fn generation_is_deterministic(class in table_class(), n in 2usize..=32, seed in any::<u64>()) {
        let spec = EnsembleSpec::new(n, class, seed);
        prop_assert_eq!(generate(&spec).0, generate(&spec).0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn skew4_matches_pfaffian(seed in any::<u64>()) {
        as_case(check_skew4(seed))?;
    }

    #[test]
    fn skew3_sigma_is_half_norm(seed in any::<u64>()) {
        as_case(check_skew3(seed))?;
    }

    #[test]
    fn sskh_residual_is_orthogonal(seed in any::<u64>()) {
        as_case(check_sskh_orthogonality(seed))?;
    }

    #[test]
    fn osp_identity_and_bounds(seed in any::<u64>()) {
        as_case(check_osp_identity_and_bounds(seed))?;
    }

    #[test]
    fn real_schur4_matches_quartic(seed in any::<u64>()) {
        as_case(check_real_schur4(seed))?;
    }

    #[test]
    fn givens_preserves_norm(n in 2usize..=12, seed in any::<u64>(), angle in -3.2f64..3.2) {
        let mut a = uniform_matrix(n, &mut rng(seed));
        let before = frobenius_norm(&a);
        let i = (seed % n as u64) as usize;
        let j = (i + 1) % n;
        apply_givens_left(&mut a, &GivensRotation::from_angle(i.min(j), i.max(j), angle));
        prop_assert!((frobenius_norm(&a) - before).abs() <= 1e-13 * before);
    }

    #[test]
    fn sskh_is_idempotent(m in 1usize..=6, seed in any::<u64>()) {
        let a = uniform_matrix(2 * m, &mut rng(seed));
        let p = sskh(&a).unwrap();
        let pp = sskh(&p).unwrap();
        prop_assert!(frobenius_norm(&p.sub(&pp)) <= 1e-15 * frobenius_norm(&a));
        prop_assert!(frobenius_norm(&p) <= frobenius_norm(&a) * (1.0 + 1e-15));
    }

    #[test]
    fn raising_threshold_refines_clusters(m in 2usize..=10, seed in any::<u64>(), t1 in 0.0f64..1.0, dt in 0.0f64..1.0) {
        let a = uniform_matrix(2 * m, &mut rng(seed));
        let coarse = connected_components(&build_adjacency_threshold(&a, t1));
        let fine = connected_components(&build_adjacency_threshold(&a, t1 + dt));
        prop_assert!(fine.is_partition_of(2 * m));
        for c in fine.iter() {
            let owner = coarse.cluster_of(c[0]);
            prop_assert!(c.iter().all(|&i| coarse.cluster_of(i) == owner));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn explicit_and_implicit_sweeps_agree(seed in any::<u64>()) {
        as_case(check_explicit_implicit(seed, true))?;
    }

    #[test]
    fn osp_matches_angle_grid(seed in any::<u64>()) {
        as_case(check_osp_grid(seed))?;
    }
}

#[test]
fn schur_form_input_is_left_alone() {
    let s = DenseMatrix::from_rows(&[
        &[1.0, -2.0, 0.0, 0.0],
        &[2.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, -3.0, 0.0],
        &[0.0, 0.0, 0.0, 0.5],
    ]);
    let r = normschur::decompose(&s, &normschur::Config::default()).unwrap();
    assert_eq!(offschur(&r.s), 0.0);
}

#[test]
fn pfaffian_oracle_on_block_diagonal() {
    let w = [
        [0.0, -3.0, 0.0, 0.0],
        [3.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0, 0.0],
    ];
    let (a, b) = pfaffian_sigmas(&w);
    assert!((a - 3.0).abs() < 1e-15 && (b - 1.0).abs() < 1e-15);
}

#[test]
fn quartic_oracle_on_known_roots() {
    // (x - 1)(x + 2)(x² - 2x + 4): roots 1, -2, 1 ± i√3.
    let roots = quartic_roots([-8.0, 8.0, 0.0, -1.0]);
    let want = [
        num_complex::Complex64::new(1.0, 0.0),
        num_complex::Complex64::new(-2.0, 0.0),
        num_complex::Complex64::new(1.0, 3f64.sqrt()),
        num_complex::Complex64::new(1.0, -(3f64.sqrt())),
    ];
    assert!(normschur::driver::spectrum_distance(&roots, &want) < 1e-12);
}
