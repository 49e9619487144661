use bts_core::combinatorics::Partition;
use bts_core::scalar::{rat, Rational};
use bts_core::tensor_core::*;
use proptest::prelude::*;

fn entries(d: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-9i64..=9, 1i64..=4), 1 << d)
        .prop_map(|v| v.into_iter().map(|(n, k)| rat(n, k)).collect())
}

fn tensor(d: usize) -> impl Strategy<Value = RationalTensor> {
    entries(d).prop_map(move |e| BinaryTensor::new(d, e).unwrap())
}

fn param() -> impl Strategy<Value = Rational> {
    (-8i64..=8, 1i64..=8).prop_map(|(n, k)| rat(n, k))
}

#[test]
fn bit_order_is_slot_major() {
    assert_eq!(index_of(&[1, 0, 0]), 4);
    assert_eq!(bits_of(6, 3), vec![1, 1, 0]);
    assert_eq!(bit_string(1, 3), "001");
}

#[test]
fn rank_one_contracts_to_product() {
    let t = BinaryTensor::rank_one(&[[rat(1, 1), rat(2, 1)], [rat(3, 1), rat(-1, 1)], [rat(1, 2), rat(1, 1)]]);
    assert_eq!(t.get(&[1, 0, 1]), &rat(6, 1));
    let y = [[rat(1, 1), rat(1, 1)], [rat(0, 1), rat(1, 1)], [rat(2, 1), rat(0, 1)]];
    // (1+2)(−1)(1)
    assert_eq!(t.contract_full(&y), rat(-3, 1));
}

#[test]
fn compress_rejects_asymmetric() {
    let mut t = RationalTensor::zeros(3);
    t.set(&[0, 0, 1], rat(1, 1));
    assert!(compress(&t, &Partition::single(3)).is_err());
    assert!(compress(&t, &Partition::ones(3)).is_ok());
    assert!(compress(&t, &Partition::ones(2)).is_err());
}

#[test]
fn slices_fix_one_index() {
    let t = BinaryTensor::from_fn(3, |b| rat(index_of(b) as i64, 1));
    let s = t.slice(1, 1).unwrap();
    assert_eq!(s.d(), 2);
    assert_eq!(s.entries(), &[rat(2, 1), rat(3, 1), rat(6, 1), rat(7, 1)]);
    assert!(t.slice(3, 0).is_err());
}

#[test]
fn rotation_length_is_checked() {
    let t = RationalTensor::zeros(3);
    assert!(rotate_exact(&t, &[rat(1, 2)]).is_err());
    assert!(rotate(&t.to_f64(), &[0.1; 4]).is_err());
}

proptest! {
    #[test]
    fn compress_expand_round_trip(seed in any::<u64>(), parts in prop::collection::vec(1usize..=3, 1..=3)) {
        let mu = Partition::new(parts).unwrap();
        let c = random_mu_tensor(seed, &mu, &rat(1, 1));
        let t = c.expand();
        prop_assert_eq!(compress(&t, &mu).unwrap(), c);
    }

    #[test]
    fn bombieri_matches_flat_pairing(a in any::<u64>(), b in any::<u64>()) {
        let mu = Partition::new(vec![2, 1]).unwrap();
        let x = random_mu_tensor(a, &mu, &rat(1, 1));
        let y = random_mu_tensor(b, &mu, &rat(1, 1));
        prop_assert_eq!(x.bombieri(&y).unwrap(), x.expand().dot(&y.expand()));
    }

    #[test]
    fn exact_rotations_are_orthogonal(t in tensor(3), p in prop::collection::vec(param(), 3)) {
        let r = rotate_exact(&t, &p).unwrap();
        prop_assert_eq!(r.norm_sq(), t.norm_sq());
        let back: Vec<Rational> = p.iter().map(|v| -v).collect();
        // The rotation for −p is the inverse of the one for p.
        prop_assert_eq!(rotate_exact(&r, &back).unwrap(), t);
    }

    #[test]
    fn slot_permutations_compose(t in tensor(4)) {
        let p = [2, 0, 3, 1];
        let inv = [1, 3, 0, 2];
        prop_assert_eq!(t.permute_slots(&p).permute_slots(&inv), t.clone());
        prop_assert_eq!(t.permute_slots(&p).norm_sq(), t.norm_sq());
    }

    #[test]
    fn symmetrize_is_a_projection(t in tensor(3)) {
        let mu = Partition::new(vec![2, 1]).unwrap();
        let s = symmetrize(&t, &mu, &[0, 0, 1]).unwrap();
        prop_assert_eq!(symmetrize(&s, &mu, &[0, 0, 1]).unwrap(), s.clone());
        prop_assert!(compress(&s, &mu).is_ok());
        // t − s is orthogonal to the symmetric part.
        prop_assert_eq!(t.sub(&s).dot(&s), rat(0, 1));
    }

    #[test]
    fn u_coordinates_scale_the_norm(t in tensor(3)) {
        // [[1, −i], [1, i]] is √2 times a unitary matrix.
        let u = to_u_coordinates(&t);
        let n: Rational = u.entries().iter().map(|z| &z.re * &z.re + &z.im * &z.im).sum();
        prop_assert_eq!(n, t.norm_sq() * rat(8, 1));
    }
}
