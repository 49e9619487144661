use bts_core::combinatorics::*;
use num_bigint::BigInt;
use proptest::prelude::*;

fn factorial(n: usize) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

#[test]
fn ed_degree_known_values() {
    for d in 1..=9 {
        assert_eq!(ed_degree(&Partition::ones(d)).unwrap(), factorial(d), "1^{d}");
    }
    for d in 2..=9 {
        assert_eq!(ed_degree(&Partition::single(d)).unwrap(), BigInt::from(d), "({d})");
    }
    assert_eq!(ed_degree_usize(&Partition::new(vec![2, 1]).unwrap()).unwrap(), 4);
}

#[test]
fn partition_parsing() {
    let p = Partition::parse("2,1").unwrap();
    assert_eq!(p.parts(), &[2, 1]);
    assert_eq!(p.d(), 3);
    assert_eq!(p.s(), 2);
    assert_eq!(Partition::parse(&p.to_string().replace(['(', ')'], "")).unwrap(), p);
    assert!(Partition::parse("2,0").is_err());
    assert!(Partition::parse("").is_err());
    assert!(Partition::parse("a").is_err());
    assert!(Partition::new(vec![]).is_err());
}

#[test]
fn all_partitions_counts() {
    // p(n) for n = 1..8
    let counts = [1, 2, 3, 5, 7, 11, 15, 22];
    for (d, &n) in (1..=8).zip(&counts) {
        let all = Partition::all_of(d);
        assert_eq!(all.len(), n, "d = {d}");
        assert!(all.iter().all(|p| p.d() == d));
    }
}

#[test]
fn subsets_enumerate_power_set() {
    let all: Vec<SubsetJ> = SubsetJ::all(3).collect();
    assert_eq!(all.len(), 8);
    assert!(all[0].is_empty());
    assert_eq!(SubsetJ::full(3).len(), 3);
    assert_eq!(SubsetJ::from_indices(&[0, 2]).members().collect::<Vec<_>>(), vec![0, 2]);
}

#[test]
fn degree_table_shape() {
    let mu = Partition::new(vec![2, 1]).unwrap();
    let table = degree_table(&mu).unwrap();
    assert_eq!(table.rows.len(), 4);
    assert_eq!(table.ed_degree, "4");
    assert!(table.identity_ok);
}

#[test]
fn ones_identity_through_twelve() {
    for d in 1..=12 {
        assert!(ones_identity(d), "d = {d}");
    }
}

fn partition() -> impl Strategy<Value = Partition> {
    prop::collection::vec(1usize..=3, 1..=4).prop_map(|v| Partition::new(v).unwrap())
}

proptest! {
    #[test]
    fn ed_degree_ignores_part_order(p in partition(), seed in any::<u64>()) {
        let mut parts = p.parts().to_vec();
        let n = parts.len();
        parts.rotate_left((seed as usize) % n);
        let q = Partition::new(parts).unwrap();
        prop_assert_eq!(ed_degree(&p).unwrap(), ed_degree(&q).unwrap());
        prop_assert_eq!(delta_mu(&p), delta_mu(&q));
    }

    #[test]
    fn degree_identity_holds(p in partition()) {
        prop_assert!(degree_identity_check(&p));
    }

    #[test]
    fn removing_everything_leaves_empty(p in partition()) {
        let r = p.remove(SubsetJ::full(p.s()));
        prop_assert!(r.is_empty());
        prop_assert_eq!(p.sum_over(SubsetJ::full(p.s())), p.d());
    }
}
