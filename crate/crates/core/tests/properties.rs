use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dman_core::atlas::{compose_atlases, cartesian_subfamily, AtlasDiagram, ContinuousMap, SieveMap};
use dman_core::io::{AtlasJson, HypercoverJson, PresheafJson};
use dman_core::lattice::{FinitePoset, FiniteSpace, PointSet};
use dman_core::qsmooth::corpus::instance;
use dman_core::qsmooth::{
    diagonal_point, diagonal_representation, is_transverse, jet_mapping_complex, product, product_point,
    tangent_complex, virtual_dimension,
};
use dman_core::qsmooth::model::hochschild_model;
use dman_core::sheaf::{
    atlas_colimit, covering_sieves, is_local_isomorphism, is_sheaf, pullback, sheafify, Presheaf, PresheafMap,
};
use dman_core::simplicial::{atlas_to_hypercover, delta_refinement_limit_check, hypercover_to_atlas, iota_test};
use dman_core::sweep::{boundary_squared_zero, is_atlas_of_covered, local_verdicts, random_presheaf};

/// A topology generated by up to four random subsets.
fn space(max_points: usize, max_opens: usize) -> impl Strategy<Value = FiniteSpace> {
    (0..=max_points)
        .prop_flat_map(|n| (Just(n), prop::collection::vec(0u64..(1 << n), 0..4)))
        .prop_map(|(n, gens)| {
            let full = PointSet::full(n);
            let mut opens = vec![PointSet::EMPTY, full];
            opens.extend(gens.into_iter().map(PointSet));
            opens.sort();
            opens.dedup();
            loop {
                let mut next = opens.clone();
                for &a in &opens {
                    for &b in &opens {
                        next.push(a.union(b));
                        next.push(a.intersection(b));
                    }
                }
                next.sort();
                next.dedup();
                if next.len() == opens.len() {
                    break;
                }
                opens = next;
            }
            let points = (0..n).map(|i| format!("p{i}")).collect();
            FiniteSpace::new(points, opens).unwrap()
        })
        .prop_filter("too many opens", move |s| s.opens().len() <= max_opens)
}

/// A poset whose order refines the index order, so every poset up to
/// isomorphism occurs.
fn poset(max: usize) -> impl Strategy<Value = FinitePoset> {
    (0..=max)
        .prop_flat_map(|n| (Just(n), prop::collection::vec(any::<bool>(), n * n.saturating_sub(1) / 2)))
        .prop_map(|(n, bits)| {
            let pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .zip(bits)
                .filter(|(_, b)| *b)
                .map(|(p, _)| p)
                .collect();
            FinitePoset::from_pairs((0..n).map(|i| format!("i{i}")).collect(), &pairs).unwrap()
        })
}

/// A monotone diagram: each element gets a random open above the opens of
/// the elements below it.
fn diagram(max_points: usize, max_opens: usize, max_index: usize) -> impl Strategy<Value = AtlasDiagram> {
    (space(max_points, max_opens), poset(max_index), prop::collection::vec(any::<usize>(), max_index)).prop_map(
        |(space, index, seeds)| {
            let mut assignment = vec![PointSet::EMPTY; index.len()];
            for j in 0..index.len() {
                let floor = (0..j)
                    .filter(|&i| index.leq(i, j))
                    .fold(PointSet::EMPTY, |acc, i| acc.union(assignment[i]));
                let candidates: Vec<PointSet> = space.opens().iter().copied().filter(|o| floor.is_subset(*o)).collect();
                assignment[j] = candidates[seeds[j] % candidates.len()];
            }
            AtlasDiagram::new(index, space, assignment).unwrap()
        },
    )
}

fn presheaf(max_points: usize, max_opens: usize, max_sections: usize) -> impl Strategy<Value = Presheaf> {
    (space(max_points, max_opens), any::<u64>()).prop_filter_map("no presheaf with these sizes", move |(s, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sizes: Vec<usize> = (0..s.opens().len())
            .map(|_| rand::Rng::gen_range(&mut rng, 0..=max_sections))
            .collect();
        random_presheaf(&s, &sizes, &mut rng)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sieve_lattice_is_distributive(p in poset(5)) {
        for i in 0..p.len() {
            prop_assert!(p.is_sieve(p.downset(i).unwrap().bits()));
        }
        let sieves = p.sieve_lattice(12).unwrap();
        for a in &sieves {
            for b in &sieves {
                prop_assert!(sieves.contains(&a.meet(b)) && sieves.contains(&a.join(b)));
                for c in &sieves {
                    prop_assert_eq!(a.meet(&b.join(c)), a.meet(b).join(&a.meet(c)));
                }
            }
        }
    }

    #[test]
    fn frame_meets_are_intersections(s in space(5, 12)) {
        let frame = s.frame_of();
        let opens = s.opens();
        for (a, &oa) in opens.iter().enumerate() {
            for (b, &ob) in opens.iter().enumerate() {
                prop_assert_eq!(frame.leq(a, b), oa.is_subset(ob));
                let meet = s.open_index(oa.intersection(ob)).unwrap();
                let join = s.open_index(oa.union(ob)).unwrap();
                for c in 0..opens.len() {
                    let below = frame.leq(c, a) && frame.leq(c, b);
                    prop_assert_eq!(below, frame.leq(c, meet));
                    let above = frame.leq(a, c) && frame.leq(b, c);
                    prop_assert_eq!(above, frame.leq(join, c));
                }
            }
        }
    }

    #[test]
    fn cover_condition_iff_meet_condition(u in diagram(5, 8, 4)) {
        prop_assert_eq!(u.is_atlas_cover_condition(), u.is_atlas_meet_condition_default().unwrap());
    }

    #[test]
    fn atlases_pull_back(u in diagram(4, 8, 3), x in space(4, 8), seed in any::<u64>()) {
        prop_assume!(u.is_atlas());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = u.space().n_points();
        prop_assume!(n > 0 || x.n_points() == 0);
        let point_map: Vec<usize> = (0..x.n_points()).map(|_| rand::Rng::gen_range(&mut rng, 0..n)).collect();
        let Ok(f) = ContinuousMap::new(x, u.space().clone(), point_map) else { return Ok(()) };
        let p = u.pullback(&f).unwrap();
        prop_assert!(p.input_was_atlas);
        prop_assert!(p.diagram.is_atlas());
        for i in 0..u.index().len() {
            prop_assert_eq!(p.diagram.open(i), f.preimage(u.open(i)));
        }
    }

    #[test]
    fn cartesian_subfamilies_are_atlases(u in diagram(4, 8, 3), seeds in prop::collection::vec(any::<usize>(), 3)) {
        prop_assume!(u.is_atlas());
        let opens = u.space().opens();
        let v: Vec<PointSet> = (0..u.index().len())
            .map(|i| {
                let inside: Vec<PointSet> = opens.iter().copied().filter(|o| o.is_subset(u.open(i))).collect();
                inside[seeds[i] % inside.len()]
            })
            .collect();
        if let Some(d) = cartesian_subfamily(&u, &v).unwrap() {
            prop_assert!(d.is_atlas());
        }
    }

    #[test]
    fn restrictions_of_atlases_are_atlases(u in diagram(4, 8, 4), gens in prop::collection::vec(any::<bool>(), 4)) {
        prop_assume!(u.is_atlas());
        let idx = u.index();
        let sieve = idx.generated_sieve((0..idx.len()).filter(|&i| gens[i]));
        prop_assert!(u.restrict_to_sieve(&sieve).unwrap().is_atlas());
    }

    #[test]
    fn compositions_are_atlases(u in diagram(3, 8, 3), j in poset(3), gens in prop::collection::vec(any::<u8>(), 3)) {
        let idx = u.index();
        let sieves = (0..j.len())
            .map(|k| idx.generated_sieve((0..idx.len()).filter(|&i| gens[k] >> i & 1 == 1)))
            .collect();
        let Ok(eta) = SieveMap::new(j, sieves) else { return Ok(()) };
        if let Ok(c) = compose_atlases(&u, &eta) {
            prop_assert!(c.diagram.is_atlas());
        }
    }

    #[test]
    fn atlas_iff_hypercover(u in diagram(4, 8, 3)) {
        let h = atlas_to_hypercover(&u, 2).unwrap();
        let level1 = h.is_hypercover(1).unwrap();
        let level2 = h.is_hypercover(2).unwrap();
        prop_assert_eq!(u.is_atlas(), level2);
        prop_assert_eq!(level1, level2);
        if level2 {
            prop_assert!(hypercover_to_atlas(&h).unwrap().atlas_verdict);
        }
    }

    #[test]
    fn iota_shapes_satisfy_identities(p in poset(3)) {
        let r = iota_test(&p, 3).unwrap().set().identity_report();
        prop_assert!(r.failure.is_none(), "{:?}", r.failure);
    }

    #[test]
    fn serialization_round_trips(u in diagram(4, 8, 3)) {
        let j = AtlasJson::from_model(&u);
        prop_assert_eq!(&j.to_model().unwrap(), &u);
        let h = atlas_to_hypercover(&u, 2).unwrap();
        let hj = HypercoverJson::from_model(&h);
        prop_assert_eq!(HypercoverJson::from_model(&hj.to_model().unwrap()), hj);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn delta_refinement_preserves_limits(u in diagram(3, 6, 3), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sizes: Vec<usize> = (0..u.space().opens().len()).map(|_| rand::Rng::gen_range(&mut rng, 1..=2)).collect();
        let f = random_presheaf(u.space(), &sizes, &mut rng).unwrap();
        prop_assert!(delta_refinement_limit_check(&u, &f, 2).unwrap().bijective);
    }

    #[test]
    fn sheaf_local_on_four_points(f in presheaf(4, 8, 3)) {
        let v = local_verdicts(&f).unwrap();
        prop_assert!(v.agree(), "{v:?} on {}", serde_json::to_string(&PresheafJson::from_model(&f)).unwrap());
        prop_assert_eq!(v.sheaf, is_sheaf(&f));
    }

    #[test]
    fn sheafification_is_idempotent_and_keeps_products(f in presheaf(3, 6, 2), g in presheaf(3, 6, 2)) {
        let sf = sheafify(&f).unwrap().sheaf;
        prop_assert!(is_sheaf(&sf));
        prop_assert_eq!(&sheafify(&sf).unwrap().sheaf, &sf);
        prop_assert_eq!(sheafify(&sf).unwrap().rounds, 0);
        if f.space() == g.space() {
            let sg = sheafify(&g).unwrap().sheaf;
            let lhs = sheafify(&f.product(&g).unwrap()).unwrap().sheaf;
            let rhs = sf.product(&sg).unwrap();
            prop_assert_eq!(lhs.sizes(), rhs.sizes());
        }
    }

    #[test]
    fn local_isomorphisms_compose_and_pull_back(s in space(3, 8), pick in any::<(usize, usize, usize)>()) {
        let sieves = covering_sieves(&s);
        let (open, outer) = &sieves[pick.0 % sieves.len()];
        let inner: Vec<&Vec<usize>> = sieves
            .iter()
            .filter(|(o, m)| o == open && m.iter().all(|x| outer.contains(x)))
            .map(|(_, m)| m)
            .collect();
        let inner = inner[pick.1 % inner.len()];
        let rep = Presheaf::representable(&s, s.opens()[*open]).unwrap();
        let big = Presheaf::subterminal(&s, outer).unwrap();
        let small = Presheaf::subterminal(&s, inner).unwrap();
        let psi = PresheafMap::to_subterminal(&big, &rep).unwrap();
        let chi = PresheafMap::to_subterminal(&small, &big).unwrap();
        prop_assert!(is_local_isomorphism(&psi).unwrap());
        prop_assert!(is_local_isomorphism(&chi).unwrap());
        prop_assert!(is_local_isomorphism(&chi.then(&psi).unwrap()).unwrap());

        // Along the inclusion of a smaller representable.
        let below: Vec<usize> = (0..s.opens().len()).filter(|&v| s.opens()[v].is_subset(s.opens()[*open])).collect();
        let v = below[pick.2 % below.len()];
        let rv = Presheaf::representable(&s, s.opens()[v]).unwrap();
        let phi = PresheafMap::to_subterminal(&rv, &rep).unwrap();
        let pb = pullback(&psi, &phi).unwrap();
        prop_assert!(is_local_isomorphism(&pb.to_base).unwrap());
    }

    #[test]
    fn atlas_colimits_are_local_isomorphisms(u in diagram(3, 8, 3)) {
        prop_assume!(is_atlas_of_covered(&u));
        prop_assert!(is_local_isomorphism(&atlas_colimit(&u).unwrap()).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tangent_complex_invariants(seed in any::<u64>(), index in 0usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = instance(&mut rng, index).unwrap();
        let (c, p) = (&inst.cospan, &inst.point);
        let tc = tangent_complex(c, p).unwrap();
        prop_assert_eq!(tc.euler_characteristic(), virtual_dimension(c));
        prop_assert_eq!(is_transverse(c, p).unwrap(), tc.homology_in(-1) == 0);

        let d = diagonal_representation(c);
        let dp = diagonal_point(c, p).unwrap();
        prop_assert_eq!(virtual_dimension(&d), virtual_dimension(c));
        prop_assert_eq!(is_transverse(&d, &dp).unwrap(), is_transverse(c, p).unwrap());
        prop_assert_eq!(tangent_complex(&d, &dp).unwrap().homology(), tc.homology());

        let other = instance(&mut rng, index + 1).unwrap();
        let prod = product(c, &other.cospan);
        let pp = product_point(c, p, &other.cospan, &other.point).unwrap();
        prop_assert_eq!(virtual_dimension(&prod), virtual_dimension(c) + virtual_dimension(&other.cospan));
        let sum = tc.direct_sum(&tangent_complex(&other.cospan, &other.point).unwrap()).unwrap();
        prop_assert_eq!(tangent_complex(&prod, &pp).unwrap().homology(), sum.homology());
    }

    #[test]
    fn hochschild_identities_and_boundary(seed in any::<u64>(), index in 0usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = instance(&mut rng, index).unwrap();
        let model = hochschild_model(&inst.cospan, 4);
        let (_, failure) = model.identity_report().unwrap();
        prop_assert!(failure.is_none(), "{:?}", failure);
        prop_assert!(boundary_squared_zero(&model).unwrap());
        let c = &inst.cospan;
        if c.a() + c.b() + 3 * c.c() <= 6 {
            let jets = jet_mapping_complex(c, &inst.point, 2, 3, 1).unwrap();
            prop_assert!(jets.identity_report().1.is_none());
            let betti = jets.betti();
            prop_assert_eq!(betti, jets.unnormalized_betti());
        }
    }
}
