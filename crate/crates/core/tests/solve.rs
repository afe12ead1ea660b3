use isoelast::error::Error;
use isoelast::solve::{estimate_infsup, solve_direct, SparseSystem, TripletBuffer};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn system(n: usize, entries: &[(usize, usize, f64)], rhs: Vec<f64>) -> SparseSystem {
    let mut m = TripletBuffer::new(n, n);
    m.extend(entries.iter().copied());
    SparseSystem { matrix: m, rhs, blocks: vec![("all".into(), 0..n)] }
}

#[test]
fn small_saddle_point() {
    // [[2, 1], [1, 0]] x = [3, 1]
    let s = system(2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0)], vec![3.0, 1.0]);
    let r = solve_direct(&s).unwrap();
    assert!((r.x[0] - 1.0).abs() < 1e-14 && (r.x[1] - 1.0).abs() < 1e-14);
    assert!(r.residual < 1e-14);
}

#[test]
fn duplicates_are_summed() {
    let mut m = TripletBuffer::new(2, 2);
    m.extend([(0, 0, 1.0), (0, 0, 2.0), (1, 1, 1.0), (0, 1, 0.0)]);
    m.compress();
    assert_eq!(m.entries(), &[(0, 0, 3.0), (1, 1, 1.0)]);
    assert_eq!(m.matvec(&[1.0, 2.0]), vec![3.0, 2.0]);
}

#[test]
fn asymmetry_measure() {
    let mut m = TripletBuffer::new(2, 2);
    m.extend([(0, 1, 1.0), (1, 0, 1.5)]);
    // relative to the largest entry
    assert!((m.asymmetry() - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn matches_dense_solve_on_random_spd() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 40;
    let a = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let spd = &a * a.transpose() + DMatrix::<f64>::identity(n, n) * n as f64;
    let b = DVector::<f64>::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let mut entries = Vec::new();
    for i in 0..n {
        for j in 0..n {
            entries.push((i, j, spd[(i, j)]));
        }
    }
    let r = solve_direct(&system(n, &entries, b.iter().copied().collect())).unwrap();
    let want = spd.cholesky().unwrap().solve(&b);
    for i in 0..n {
        assert!((r.x[i] - want[i]).abs() <= 1e-12 * (1.0 + want[i].abs()));
    }
}

#[test]
fn singular_systems_rejected() {
    // structurally singular: empty last row and column
    let s = system(3, &[(0, 0, 1.0), (1, 1, 1.0)], vec![1.0, 1.0, 1.0]);
    assert!(matches!(solve_direct(&s), Err(Error::Singular(_))));
    // numerically singular with an inconsistent right-hand side
    let mut s =
        system(3, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)], vec![1.0, 2.0, 1.0]);
    s.blocks = vec![("pair".into(), 0..2), ("single".into(), 2..3)];
    match solve_direct(&s) {
        Err(Error::Singular(_)) => {}
        other => panic!("expected a singular-system error, got {other:?}"),
    }
}

#[test]
fn shape_mismatch_rejected() {
    let s = system(2, &[(0, 0, 1.0), (1, 1, 1.0)], vec![1.0]);
    assert!(solve_direct(&s).is_err());
}

#[test]
fn infsup_of_identity_coupling() {
    let i = DMatrix::<f64>::identity(6, 6);
    assert!((estimate_infsup(&i, &i, &i).unwrap() - 1.0).abs() < 1e-12);
    // scaling the norm of the first space by 4 halves the constant
    let x = &i * 4.0;
    assert!((estimate_infsup(&i, &x, &i).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn infsup_matches_singular_values() {
    // with identity Gram matrices the constant is the smallest nonzero singular value of B
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let b = DMatrix::<f64>::from_fn(5, 9, |_, _| rng.gen_range(-1.0..1.0));
    let sv = b.clone().singular_values();
    let min = sv.iter().fold(f64::INFINITY, |a, &v| a.min(v));
    let est = estimate_infsup(&b, &DMatrix::identity(9, 9), &DMatrix::identity(5, 5)).unwrap();
    assert!((est - min).abs() <= 1e-10);
}

#[test]
fn infsup_budget_enforced() {
    let b = DMatrix::<f64>::zeros(3000, 3000);
    let x = DMatrix::<f64>::identity(3000, 3000);
    assert!(matches!(estimate_infsup(&b, &x, &x), Err(Error::Budget(_))));
}

#[test]
fn infsup_rejects_indefinite_norms() {
    let i = DMatrix::<f64>::identity(3, 3);
    let neg = &i * -1.0;
    assert!(matches!(estimate_infsup(&i, &neg, &i), Err(Error::Singular(_))));
}

proptest! {
    #[test]
    fn residual_is_small_for_diagonally_dominant(seed in 0u64..1000, n in 2usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut entries = Vec::new();
        for i in 0..n {
            entries.push((i, i, 3.0 + rng.gen::<f64>()));
            if i + 1 < n {
                entries.push((i, i + 1, rng.gen_range(-1.0..1.0)));
                entries.push((i + 1, i, rng.gen_range(-1.0..1.0)));
            }
        }
        let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = solve_direct(&system(n, &entries, rhs)).unwrap();
        prop_assert!(r.residual <= 1e-13);
    }
}
