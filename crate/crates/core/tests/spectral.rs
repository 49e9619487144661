use bts_core::combinatorics::Partition;
use bts_core::poly_engine::UniPoly;
use bts_core::scalar::{rat, Rational};
use bts_core::spectral::*;
use bts_core::tensor_core::*;
use bts_core::BtsError;
use num_complex::Complex64;
use proptest::prelude::*;

fn assert_same_multiset(a: &Spectrum, b: &Spectrum, tol: f64) {
    assert_same_values(&a.sigma_sq(), &b.sigma_sq(), tol);
}

fn assert_same_values(x: &[Complex64], y: &[Complex64], tol: f64) {
    assert_eq!(x.len(), y.len());
    let scale = x.iter().map(|v| v.norm()).fold(1.0, f64::max);
    // Matching by nearest neighbour tolerates reordering of near-equal real parts.
    let mut used = vec![false; y.len()];
    for v in x {
        let (k, gap) = y
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, w)| (k, (v - w).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        assert!(gap <= tol * scale, "{v} unmatched, gap {gap:e}");
        used[k] = true;
    }
}

fn diagonal(a: i64, h: i64) -> RationalTensor {
    let mut t = RationalTensor::zeros(3);
    t.set(&[0, 0, 0], rat(a, 1));
    t.set(&[1, 1, 1], rat(h, 1));
    t
}

#[test]
fn diagonal_tensor_spectrum() {
    let s = solve_222(&diagonal(3, 2)).unwrap();
    assert_eq!(s.data.len(), 6);
    let sq = s.sigma_sq();
    for target in [9.0, 4.0] {
        assert!(sq.iter().any(|v| (v - target).norm() < 1e-10), "missing {target}");
    }
    assert!(s.max_residual() < 1e-12);
    assert!(verify_product(&compress(&diagonal(3, 2), &Partition::ones(3)).unwrap()).unwrap().passes(1e-10));
}

#[test]
fn matrix_times_vector_has_a_zero_family() {
    // e₀ ⊗ M: the singular values of M plus a positive-dimensional family at σ = 0.
    let t = BinaryTensor::new(3, [2, 2, -2, 1, 0, 0, 0, 0].iter().map(|&v| rat(v, 1)).collect()).unwrap();
    let s = solve_222(&t).unwrap();
    assert!(s.degenerate.perturbed && s.degenerate.zero_singular_value);
    let mut re: Vec<f64> = s.sigma_sq().iter().map(|v| v.re).collect();
    re.sort_by(f64::total_cmp);
    for (got, want) in re.iter().zip([0.0, 0.0, 0.0, 0.0, 4.0, 9.0]) {
        assert!((got - want).abs() < 1e-9, "{re:?}");
    }
}

#[test]
fn isotropic_points_are_dropped_and_flagged() {
    // θ₂ = θ₃ = 0: two critical points escape to the isotropic cone.
    let t = BinaryTensor::new(3, [-2, -1, -1, 2, 0, -1, -1, 0].iter().map(|&v| rat(v, 1)).collect()).unwrap();
    let s = solve_222(&t).unwrap();
    assert!(s.degenerate.isotropic);
    assert_eq!(s.ed_degree, 6);
    assert!(s.data.len() < 6);
    assert!(s.max_residual() < 1e-9);
}

#[test]
fn zero_tensor_is_degenerate() {
    let err = solve_222(&RationalTensor::zeros(3)).unwrap_err();
    assert!(matches!(err, BtsError::Degenerate(_)), "{err}");
}

#[test]
fn symmetric_cubic_has_three_eigenvalues() {
    let c = random_mu_tensor(3, &Partition::single(3), &rat(1, 1));
    let s = solve(&c, &SolveOptions::default()).unwrap();
    assert_eq!(s.data.len(), 3);
    assert_eq!(s.ed_degree, 3);
    assert!(s.max_residual() < 1e-9);
}

#[test]
fn partially_symmetric_spectrum_nests_in_the_full_one() {
    let mu = Partition::new(vec![2, 1]).unwrap();
    let c = random_mu_tensor(11, &mu, &rat(1, 1));
    let part = solve(&c, &SolveOptions::default()).unwrap();
    let full = solve_222(&c.expand()).unwrap();
    assert_eq!(part.data.len(), 4);
    let extra = bts_core::invariants::extra_root_21(&c.to_f64()).unwrap();
    let fsq = full.sigma_sq();
    for v in part.sigma_sq().iter().chain([Complex64::new(extra, 0.0)].iter()) {
        assert!(fsq.iter().any(|w| (v - w).norm() < 1e-8 * w.norm().max(1.0)), "{v} not in full spectrum");
    }
}

#[test]
fn dispatch_rejects_large_unsymmetric_orders() {
    let c = random_mu_tensor(1, &Partition::ones(4), &rat(1, 1));
    assert!(matches!(solve(&c, &SolveOptions::default()), Err(BtsError::Unsupported(_))));
}

#[test]
fn ed_polynomials_vanish_at_critical_values() {
    let c = compress(&random_tensor(21, 3, &rat(1, 1)), &Partition::ones(3)).unwrap();
    let s = solve(&c, &SolveOptions::default()).unwrap();
    let dual = assemble_edpoly(&s, &c).unwrap();
    assert_eq!(dual.degree(), Some(6));
    let dual_c: UniPoly<Complex64> = dual.map(|&v| Complex64::new(v, 0.0));
    let scale: f64 = dual.coeffs().iter().map(|v| v.abs()).sum();
    for v in s.sigma_sq() {
        assert!(dual_c.eval(&v).norm() <= 1e-9 * scale * (1.0 + v.norm()).powi(6));
    }
    assert!(primal_root_residuals(&s, &c).unwrap().iter().all(|&r| r < 1e-9));
}

#[test]
fn best_rank_one_is_orthogonal_to_the_residual() {
    let t = random_tensor(8, 3, &rat(1, 1));
    let c = compress(&t, &Partition::ones(3)).unwrap();
    let s = solve(&c, &SolveOptions::default()).unwrap();
    let best = best_rank_one(&s, &t.to_f64()).unwrap();
    let tf = t.to_f64();
    let n2 = tf.norm_sq();
    // ‖t‖² = σ² + ‖t − σ x⊗y⊗z‖²
    assert!((n2 - best.sigma * best.sigma - best.distance_sq).abs() < 1e-10 * n2);
    let real_max = s
        .data
        .iter()
        .filter(|d| d.sigma_sq.im.abs() < 1e-9)
        .map(|d| d.sigma_sq.re)
        .fold(0.0, f64::max);
    assert!((best.sigma * best.sigma - real_max).abs() < 1e-10 * real_max);
}

#[test]
fn product_formula_on_symmetric_quartics() {
    let mu = Partition::single(4);
    for seed in 0..5 {
        let c = random_mu_tensor(seed, &mu, &rat(1, 1));
        let report = verify_product(&c).unwrap();
        assert!(report.passes(1e-8), "seed {seed}: {}", report.rel_error);
    }
}

fn rational_entries() -> impl Strategy<Value = RationalTensor> {
    prop::collection::vec(-64i64..=64, 8)
        .prop_map(|v| BinaryTensor::new(3, v.into_iter().map(|x| rat(x, 16)).collect()).unwrap())
        .prop_filter("non-zero", |t| !t.is_zero())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn spectrum_is_rotation_invariant(t in rational_entries(), p in prop::collection::vec((-5i64..=5, 1i64..=5), 3)) {
        let params: Vec<Rational> = p.into_iter().map(|(n, k)| rat(n, k)).collect();
        let r = rotate_exact(&t, &params).unwrap();
        let (a, b) = (solve_222(&t).unwrap(), solve_222(&r).unwrap());
        prop_assume!(a.data.len() == 6 && b.data.len() == 6);
        assert_same_multiset(&a, &b, 1e-7);
    }

    #[test]
    fn spectrum_is_permutation_invariant(t in rational_entries()) {
        let p = t.permute_slots(&[2, 0, 1]);
        let (a, b) = (solve_222(&t).unwrap(), solve_222(&p).unwrap());
        prop_assume!(a.data.len() == 6 && b.data.len() == 6);
        assert_same_multiset(&a, &b, 1e-7);
    }

    #[test]
    fn spectrum_is_closed_under_conjugation(t in rational_entries()) {
        let s = solve_222(&t).unwrap();
        let sq = s.sigma_sq();
        let scale = sq.iter().map(|v| v.norm()).fold(1.0, f64::max);
        for v in &sq {
            prop_assert!(sq.iter().any(|w| (v.conj() - w).norm() < 1e-7 * scale));
        }
        prop_assert!(!s.degenerate.uncertified);
        prop_assert!(s.max_residual() <= RESIDUAL_TOL * t.norm_f64());
    }

    #[test]
    fn scaling_scales_sigma_squared(t in rational_entries(), k in 1i64..=5) {
        let a = solve_222(&t).unwrap();
        let b = solve_222(&t.scale(&rat(k, 1))).unwrap();
        prop_assume!(a.data.len() == 6 && b.data.len() == 6);
        let kk = (k * k) as f64;
        let scaled: Vec<Complex64> = a.sigma_sq().iter().map(|v| v * kk).collect();
        assert_same_values(&scaled, &b.sigma_sq(), 1e-7);
    }
}
