use proptest::prelude::*;

use qjets::count::{count_moment_fiber, CountOptions, Method};
use qjets::forms::{euler_form_raw, sym_form_raw};
use qjets::mukai::{mukai_pairing, MukaiVector, NsLattice};
use qjets::ring::{Ring, TruncatedPoly};
use qjets::{DimVector, Quiver};

fn small_quiver() -> impl Strategy<Value = Quiver> {
    (1usize..=3)
        .prop_flat_map(|n| proptest::collection::vec((0..n, 0..n), 0..6).prop_map(move |a| (n, a)))
        .prop_map(|(n, arrows)| Quiver::with_numbered_vertices(n, arrows).unwrap())
}

proptest! {
    #[test]
    fn json_round_trip_keeps_hash(q in small_quiver()) {
        let back = Quiver::from_json_str(&q.to_json_string()).unwrap();
        prop_assert_eq!(back.canonical_hash(), q.canonical_hash());
        prop_assert_eq!(back.count_matrix(), q.count_matrix());
    }

    #[test]
    fn symmetrized_form_is_symmetric_and_bilinear(
        q in small_quiver(),
        seed in proptest::collection::vec(0i64..4, 9),
    ) {
        let n = q.num_vertices();
        let (d, e, f) = (&seed[0..n], &seed[3..3 + n], &seed[6..6 + n]);
        prop_assert_eq!(sym_form_raw(&q, d, e), sym_form_raw(&q, e, d));
        prop_assert_eq!(sym_form_raw(&q, d, e), euler_form_raw(&q, d, e) + euler_form_raw(&q, e, d));
        let de: Vec<i64> = d.iter().zip(e).map(|(a, b)| a + b).collect();
        prop_assert_eq!(sym_form_raw(&q, &de, f), sym_form_raw(&q, d, f) + sym_form_raw(&q, e, f));
    }

    #[test]
    fn encoded_ring_matches_polynomials(
        (q, n) in prop_oneof![Just((2u64, 3usize)), Just((3, 2)), Just((5, 2)), Just((7, 1))],
        a in proptest::collection::vec(0u64..7, 3),
        b in proptest::collection::vec(0u64..7, 3),
    ) {
        let ring = Ring::new(q, n).unwrap();
        let pa = TruncatedPoly::new(q, n, &a[..n]).unwrap();
        let pb = TruncatedPoly::new(q, n, &b[..n]).unwrap();
        let (ea, eb) = (ring.encode(&pa).unwrap(), ring.encode(&pb).unwrap());
        prop_assert_eq!(ring.decode(ring.mul(ea, eb)), pa.mul(&pb).unwrap());
        prop_assert_eq!(ring.decode(ring.add(ea, eb)), pa.add(&pb).unwrap());
        prop_assert_eq!(ring.valuation(ea), pa.valuation());
    }

    #[test]
    fn mukai_pairing_is_bilinear(
        g in proptest::collection::vec(-3i64..4, 3),
        v in proptest::collection::vec(-4i64..5, 8),
    ) {
        let l = NsLattice::new(vec![vec![g[0], g[1]], vec![g[1], g[2]]]).unwrap();
        let x = MukaiVector::new(v[0], vec![v[1], v[2]], v[3]);
        let y = MukaiVector::new(v[4], vec![v[5], v[6]], v[7]);
        let sum = MukaiVector::new(x.r + y.r, vec![x.c[0] + y.c[0], x.c[1] + y.c[1]], x.a + y.a);
        let p = |a: &MukaiVector, b: &MukaiVector| mukai_pairing(a, b, &l).unwrap();
        prop_assert_eq!(p(&sum, &sum), p(&x, &x) + 2 * p(&x, &y) + p(&y, &y));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kernel_and_brute_force_agree(q in small_quiver(), d in proptest::collection::vec(0u32..=1, 3)) {
        let d = DimVector::new(d[..q.num_vertices()].to_vec());
        prop_assume!(!d.is_zero());
        let opts = CountOptions::with_threads(1);
        let k = count_moment_fiber(&q, &d, 2, 1, Method::Kernel, opts);
        let b = count_moment_fiber(&q, &d, 2, 1, Method::Brute, opts);
        match (k, b) {
            (Ok(k), Ok(b)) => prop_assert_eq!(k.count, b.count),
            (Err(_), Err(_)) => {}
            (k, b) => prop_assert!(false, "methods disagree on errors: {:?} {:?}", k.err(), b.err()),
        }
    }
}
