//! Class groups of imaginary quadratic ladders against form counts.

use num_bigint::BigInt;
use num_rational::BigRational;
use weilgraph::algebra::EtaleAlgebra;
use weilgraph::classgroup::*;
use weilgraph::ladder::{build_ladder, minimal_l_overorder};
use weilgraph::order::{maximal_ideals_above, Order};

fn rat(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

fn quad(t: i64, q: i64) -> (EtaleAlgebra, Order) {
    let k = EtaleAlgebra::from_i64(&[q, -t, 1], Some(q)).unwrap();
    let r = Order::equation_order(&k);
    (k, r)
}

// h(O)/h(O_K) from the classical formula, as an oracle for the ladder ratios.
fn classical_ratio(d: i64, d_k: i64, f: i64) -> BigRational {
    let kron = |p: i64| -> i64 {
        if d_k % p == 0 {
            0
        } else if p == 2 {
            if d_k.rem_euclid(8) == 1 {
                1
            } else {
                -1
            }
        } else {
            let e = d_k.rem_euclid(p);
            let mut x = 1i64;
            for _ in 0..(p - 1) / 2 {
                x = x * e % p;
            }
            if x == 1 {
                1
            } else {
                -1
            }
        }
    };
    let mut ratio = rat(f, 1);
    let mut n = f;
    let mut p = 2;
    while n > 1 {
        if n % p == 0 {
            ratio *= rat(p - kron(p), p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    let u = torsion_units(&BigInt::from(d_k)) / torsion_units(&BigInt::from(d));
    ratio / rat(u as i64, 1)
}

#[test]
fn classical_ratio_matches_form_counts() {
    for (d, dk, f) in [
        (-36, -4, 3),
        (-76, -19, 2),
        (-100, -4, 5),
        (-112, -7, 4),
        (-108, -3, 6),
        (-300, -3, 10),
    ] {
        let h = class_number(d) as i64;
        let hk = class_number(dk) as i64;
        assert_eq!(classical_ratio(d, dk, f), rat(h, hk), "disc {d}");
    }
}

#[test]
fn min_overorder_ratios() {
    // (t, q, l, expected #Cl(R)/#Cl(T))
    for (t, q, ell, expect) in [(4, 13, 3, 2), (4, 23, 2, 3), (0, 25, 5, 2)] {
        let (k, r) = quad(t, q);
        let l = &maximal_ideals_above(&k, &r, &BigInt::from(ell)).unwrap()[0];
        let (tt, _) = minimal_l_overorder(&k, &r, l).unwrap();
        let got = ratio_min_overorder(&k, &r, l, &tt, None).unwrap();
        assert_eq!(got, rat(expect, 1), "x^2-{t}x+{q}");
        let dr = quadratic_discriminant(&k, &r).unwrap();
        let dt = quadratic_discriminant(&k, &tt).unwrap();
        let hr = class_number(dr.try_into().unwrap()) as i64;
        let ht = class_number(dt.try_into().unwrap()) as i64;
        assert_eq!(got, rat(hr, ht));
    }
}

#[test]
fn ideal_form_round_trip_and_products() {
    let (k, r) = quad(2, 29); // disc -112
    let classes = QuadraticOrderClasses::new(&k, &r).unwrap();
    assert_eq!(classes.forms.discriminant, -112);
    let forms = reduced_forms(-112);
    for f in &forms {
        let i = classes.ideal_of_form(&k, f).unwrap();
        assert_eq!(
            classes.class_of_ideal(&k, &i).unwrap(),
            Some(classes.forms.class_of(f))
        );
    }
    // ideal multiplication agrees with composition
    let (k, r) = quad(1, 59); // disc -235, class number 2
    let classes = QuadraticOrderClasses::new(&k, &r).unwrap();
    let forms = reduced_forms(classes.forms.discriminant);
    for f in &forms {
        for g in &forms {
            let prod = k
                .lat_product(
                    &classes.ideal_of_form(&k, f).unwrap(),
                    &classes.ideal_of_form(&k, g).unwrap(),
                )
                .unwrap();
            let c = classes.class_of_ideal(&k, &prod).unwrap().unwrap();
            assert_eq!(c, classes.forms.class_of(&f.compose(g)));
        }
    }
}

#[test]
fn split_ladder_class_data() {
    // Z[π] of discriminant -112 = -7·4²; 2 splits in Q(√-7)
    let (k, r) = quad(2, 29);
    let l = &maximal_ideals_above(&k, &r, &BigInt::from(2)).unwrap()[0];
    let lad = build_ladder(&k, &r, l).unwrap();
    assert_eq!(lad.length(), 2);
    let data = imquad_class_data(&k, &lad).unwrap();
    let orders: Vec<u64> = data.groups.iter().map(|g| g.order()).collect();
    assert_eq!(orders, vec![1, 1, 2]);
    assert_eq!(data.delta_l, 1);
    assert_eq!(data.primes_above_l.len(), 2);
    let ratios = ladder_ratios(&k, &lad, &[BigInt::from(1), BigInt::from(1)]).unwrap();
    assert_eq!(ratios, vec![rat(1, 1), rat(2, 1)]);
    // l·O_d is not invertible in R
    assert_eq!(data.l_extension_class[2], None);
    let js = serde_json::to_string(&data.to_json()).unwrap();
    let back = ClassChainData::from_json(&serde_json::from_str(&js).unwrap()).unwrap();
    assert_eq!(back, data);
}

#[test]
fn inert_ladder_class_data() {
    // disc -36 = -4·3²: Z[3i] ⊂ Z[i]
    let (k, r) = quad(4, 13);
    let l = &maximal_ideals_above(&k, &r, &BigInt::from(3)).unwrap()[0];
    let lad = build_ladder(&k, &r, l).unwrap();
    let data = imquad_class_data(&k, &lad).unwrap();
    let orders: Vec<u64> = data.groups.iter().map(|g| g.order()).collect();
    assert_eq!(orders, vec![1, 2]);
    assert_eq!(data.unit_indices, Some(vec![2]));
    assert_eq!(data.delta_l, -1);
    assert_eq!(data.surjections[0].kernel_size(), 2);
}

#[test]
fn deeper_chain_with_nontrivial_surface() {
    // disc -368 = -23·4²; Cl(-23) = Z/3
    let (k, r) = quad(6, 101);
    assert_eq!(quadratic_discriminant(&k, &r).unwrap(), BigInt::from(-368));
    let l = &maximal_ideals_above(&k, &r, &BigInt::from(2)).unwrap()[0];
    let lad = build_ladder(&k, &r, l).unwrap();
    assert_eq!(lad.length(), 2);
    let data = imquad_class_data(&k, &lad).unwrap();
    let sizes: Vec<u64> = data.groups.iter().map(|g| g.order()).collect();
    let expect: Vec<u64> = [-23i64, -92, -368]
        .iter()
        .map(|&d| class_number(d) as u64)
        .collect();
    assert_eq!(sizes, expect);
    // 2 splits in Q(√-23): two prime classes, inverse to each other
    assert_eq!(data.delta_l, 1);
    let g0 = &data.groups[0];
    assert_eq!(
        g0.add(&data.primes_above_l[0], &data.primes_above_l[1]),
        g0.zero()
    );
    assert_ne!(data.primes_above_l[0], g0.zero());
}
