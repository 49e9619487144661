use bts_core::combinatorics::Partition;
use bts_core::invariants::*;
use bts_core::scalar::{rat, Rational};
use bts_core::tensor_core::*;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn small(d: usize) -> impl Strategy<Value = RationalTensor> {
    prop::collection::vec(-6i64..=6, 1 << d)
        .prop_map(move |v| BinaryTensor::new(d, v.into_iter().map(|x| rat(x, 1)).collect()).unwrap())
}

fn param() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=6).prop_map(|(n, k)| rat(n, k))
}

fn sorted(mut v: Vec<Rational>) -> Vec<Rational> {
    v.sort();
    v
}

#[test]
fn diagonal_values() {
    let mut t = RationalTensor::zeros(3);
    t.set(&[0, 0, 0], rat(3, 1));
    t.set(&[1, 1, 1], rat(2, 1));
    let inv = invariants_222(&t).unwrap();
    assert_eq!(inv.det, rat(36, 1));
    assert_eq!(hyperdet_cayley(t.entries()), rat(36, 1));
    assert_eq!(inv.f3, [rat(36, 1), rat(36, 1), rat(36, 1)]);
}

#[test]
fn rank_one_has_zero_det() {
    let t = BinaryTensor::rank_one(&[[rat(1, 1), rat(2, 1)], [rat(-3, 1), rat(1, 1)], [rat(1, 2), rat(5, 1)]]);
    assert!(invariants_222(&t).unwrap().det.is_zero());
}

#[test]
fn wrong_order_is_rejected() {
    assert!(invariants_222(&RationalTensor::zeros(4)).is_err());
    assert!(pair_factor_4(&RationalTensor::zeros(3), 0, 1).is_err());
    assert!(pair_factor_4(&RationalTensor::zeros(4), 1, 1).is_err());
}

#[test]
fn extra_roots_agree_with_float_backend() {
    let mu = Partition::new(vec![2, 1]).unwrap();
    for seed in 0..20 {
        let c = random_mu_tensor(seed, &mu, &rat(1, 1));
        let exact = extra_root_21(&c).unwrap();
        let float = extra_root_21(&c.to_f64()).unwrap();
        let e = bts_core::scalar::rational_to_f64(&exact);
        assert!((e - float).abs() <= 1e-12 * e.abs().max(1.0), "seed {seed}");
    }
}

#[test]
fn canonical_21_moves_the_singleton() {
    let mu = Partition::new(vec![1, 2]).unwrap();
    let c = random_mu_tensor(5, &mu, &rat(1, 1));
    let d = canonical_21(&c).unwrap();
    assert_eq!(d.mu().parts(), &[2, 1]);
    assert_eq!(d.expand().norm_sq(), c.expand().norm_sq());
}

proptest! {
    #[test]
    fn det_forms_agree(t in small(3)) {
        prop_assert_eq!(hyperdet_minor(t.entries()), hyperdet_cayley(t.entries()));
        prop_assert_eq!(invariants_222(&t).unwrap().det, hyperdet_cayley(t.entries()));
    }

    #[test]
    fn invariant_under_exact_rotations(t in small(3), p in prop::collection::vec(param(), 3)) {
        let r = rotate_exact(&t, &p).unwrap();
        let (a, b) = (invariants_222(&t).unwrap(), invariants_222(&r).unwrap());
        prop_assert_eq!(a.theta_product(), b.theta_product());
        prop_assert_eq!(a.det, b.det);
        prop_assert_eq!(a.f3, b.f3);
    }

    #[test]
    fn slot_permutations_permute_slice_factors(t in small(3)) {
        let p = t.permute_slots(&[1, 2, 0]);
        let (a, b) = (invariants_222(&t).unwrap(), invariants_222(&p).unwrap());
        prop_assert_eq!(a.det.clone(), b.det.clone());
        prop_assert_eq!(sorted(a.f3.to_vec()), sorted(b.f3.to_vec()));
        prop_assert_eq!(slice_factor(&t, 1).unwrap(), slice_factor(&p, 0).unwrap());
    }

    #[test]
    fn real_factors_are_non_negative(t in small(3), u in small(4)) {
        let inv = invariants_222(&t).unwrap();
        prop_assert!(inv.theta.iter().all(|v| !v.is_negative()));
        prop_assert!(inv.f3.iter().all(|v| !v.is_negative()));
        for j in 0..4 {
            prop_assert!(!slice_factor(&u, j).unwrap().is_negative());
        }
        prop_assert!(!pair_factor_4(&u, 0, 2).unwrap().is_negative());
    }

    #[test]
    fn leading_coefficient_is_theta_product(t in small(3)) {
        let inv = invariants_222(&t).unwrap();
        let ext = extreme_coeffs_from(&inv);
        prop_assert_eq!(ext.a6, inv.theta_product());
    }
}
