//! Standalone property suites: the closed-form image/kernel tables of
//! the shear and Frobenius-shear maps, the square identity, both
//! directions of the invariance criterion for index-2 subgroups, the
//! norm-map containment for invariant index-4 subgroups, and the
//! order-4 existence corollary, plus randomized structural properties.

use pdslab::endo::{
    make_pi, make_rho, make_tau, order2_pair, order4_pair, order4_quotient_condition, EndoMap,
};
use pdslab::forms::FormSpec;
use pdslab::gf4::GF4;
use pdslab::group_table::TwistedTable;
use pdslab::pds::verify_pds;
use pdslab::regular::check_gkt;
use pdslab::twisted::{GroupContext, Subgroup};
use pdslab::IndexSet;
use proptest::prelude::*;

fn ctx(bits: &str) -> GroupContext {
    GroupContext::parse(bits).unwrap()
}

fn sorted_set(c: &GroupContext, lits: &[String]) -> Vec<usize> {
    let mut v: Vec<usize> = lits.iter().map(|l| c.parse_element(l).unwrap()).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Im(1+tau_v) = {(0,(v+eps)x)}, Im(1-tau_v) = {(0,vx)}, and for v in F2
/// also Ker(1-tau_v) = {((v+1)x, y)}; exhaustive on single blocks.
#[test]
fn shear_image_kernel_tables_single_block() {
    for bits in ["0", "1"] {
        let c = ctx(bits);
        let eps = GF4::new(c.twists()[0]);
        for v in GF4::ALL {
            let tau = make_tau(&c, &[v]).unwrap();
            let want_plus: Vec<String> = GF4::ALL
                .iter()
                .map(|&x| format!("0{}", ((v + eps) * x).to_char()))
                .collect();
            assert_eq!(
                tau.one_plus().image().unwrap().members().to_vec(),
                sorted_set(&c, &want_plus),
                "Im(1+tau_{v}) over e={bits}"
            );
            let want_minus: Vec<String> = GF4::ALL
                .iter()
                .map(|&x| format!("0{}", (v * x).to_char()))
                .collect();
            assert_eq!(
                tau.one_minus().image().unwrap().members().to_vec(),
                sorted_set(&c, &want_minus),
                "Im(1-tau_{v}) over e={bits}"
            );
        }
        for v in [GF4::ZERO, GF4::ONE] {
            let tau = make_tau(&c, &[v]).unwrap();
            let mut want = Vec::new();
            for x in GF4::ALL {
                for y in GF4::ALL {
                    want.push(format!("{}{}", ((v + GF4::ONE) * x).to_char(), y.to_char()));
                }
            }
            assert_eq!(
                tau.one_minus().kernel().unwrap().members().to_vec(),
                sorted_set(&c, &want),
                "Ker(1-tau_{v}) over e={bits}"
            );
        }
    }
}

/// The four case tables for 1 +/- rho_alpha; exhaustive on single blocks.
#[test]
fn frobenius_shear_image_kernel_tables_single_block() {
    let quad = |a: &str, b: &str, c_: &str, d: &str| -> Vec<String> {
        vec![a.into(), b.into(), c_.into(), d.into()]
    };
    let half = || -> Vec<String> {
        let mut v = Vec::new();
        for x in ["0", "1"] {
            for y in ["0", "1", "w", "W"] {
                v.push(format!("{x}{y}"));
            }
        }
        v
    };
    for bits in ["0", "1"] {
        let c = ctx(bits);
        let eps = GF4::new(c.twists()[0]);
        for alpha in GF4::ALL {
            let rho = make_rho(&c, &[alpha]).unwrap();
            // Im(1+rho_alpha): by alpha
            let want = match alpha {
                GF4::ZERO => quad("00", "01", "10", "11"),
                GF4::ONE => quad("00", "01", "1w", "1W"),
                _ => half(),
            };
            assert_eq!(
                rho.one_plus().image().unwrap().members().to_vec(),
                sorted_set(&c, &want),
                "Im(1+rho_{alpha}) over e={bits}"
            );
            // Ker(1+rho_alpha): by alpha + eps
            let want = if alpha == GF4::OMEGA || alpha == GF4::OMEGA1 {
                vec!["00".to_string(), "01".to_string()]
            } else if alpha + eps == GF4::ZERO {
                quad("00", "01", "10", "11")
            } else {
                quad("00", "01", "1w", "1W")
            };
            assert_eq!(
                rho.one_plus().kernel().unwrap().members().to_vec(),
                sorted_set(&c, &want),
                "Ker(1+rho_{alpha}) over e={bits}"
            );
            // Im(1-rho_alpha): by alpha + eps
            let want = if alpha == GF4::OMEGA || alpha == GF4::OMEGA1 {
                half()
            } else if alpha + eps == GF4::ZERO {
                quad("00", "01", "10", "11")
            } else {
                quad("00", "01", "1w", "1W")
            };
            assert_eq!(
                rho.one_minus().image().unwrap().members().to_vec(),
                sorted_set(&c, &want),
                "Im(1-rho_{alpha}) over e={bits}"
            );
            // Ker(1-rho_alpha): by alpha alone
            let want = match alpha {
                GF4::ZERO => quad("00", "01", "10", "11"),
                GF4::ONE => quad("00", "01", "1w", "1W"),
                _ => vec!["00".to_string(), "01".to_string()],
            };
            assert_eq!(
                rho.one_minus().kernel().unwrap().members().to_vec(),
                sorted_set(&c, &want),
                "Ker(1-rho_{alpha}) over e={bits}"
            );
        }
    }
}

/// rho_a composed with itself is the shear by the blockwise trace, for
/// every coefficient vector up to two blocks.
#[test]
fn frobenius_shear_squares_to_trace_shear() {
    for bits in ["0", "1"] {
        let c = ctx(bits);
        for a in GF4::ALL {
            let rho = make_rho(&c, &[a]).unwrap();
            assert_eq!(rho.power(2), make_tau(&c, &[a.trace()]).unwrap());
        }
    }
    for bits in ["00", "01", "10", "11"] {
        let c = ctx(bits);
        for a1 in GF4::ALL {
            for a2 in GF4::ALL {
                let rho = make_rho(&c, &[a1, a2]).unwrap();
                let tau = make_tau(&c, &[a1.trace(), a2.trace()]).unwrap();
                assert_eq!(rho.power(2), tau, "a=({a1},{a2}) e={bits}");
            }
        }
    }
}

fn automorphism_catalog(c: &GroupContext) -> Vec<EndoMap> {
    let n = c.block_count();
    let mut out = Vec::new();
    let vectors: Vec<Vec<GF4>> = if n == 1 {
        GF4::ALL.iter().map(|&x| vec![x]).collect()
    } else {
        let mut v = Vec::new();
        for a in GF4::ALL {
            for b in GF4::ALL {
                v.push(vec![a, b]);
            }
        }
        v
    };
    for v in &vectors {
        out.push(make_tau(c, v).unwrap());
        out.push(make_rho(c, v).unwrap());
    }
    out
}

/// Both directions of the invariance criterion: an index-2 subgroup is
/// phi-invariant exactly when it contains Im(1+phi). Exhaustive over the
/// shear catalogs and every index-2 subgroup, up to two blocks.
#[test]
fn index2_invariance_iff_image_containment() {
    for bits in ["0", "1", "00", "01", "11"] {
        let c = ctx(bits);
        let subgroups = c.index2_subgroups();
        for phi in automorphism_catalog(&c) {
            let im = phi.one_plus().image().unwrap();
            for k in &subgroups {
                let invariant = phi.leaves_invariant(k);
                let contains = im.is_subset_of(k);
                assert_eq!(invariant, contains, "e={bits} phi={phi:?}");
            }
        }
    }
}

/// Invariant index-4 subgroups absorb the norm map 1+phi+phi^2+phi^3;
/// checked on every pair the order-4 searches produce.
#[test]
fn norm_map_lands_in_invariant_index4_subgroups() {
    let mut encountered = 0;
    for bits in ["00", "01", "11"] {
        let c = ctx(bits);
        for phi in automorphism_catalog(&c) {
            if phi.order().unwrap() != 4 {
                continue;
            }
            let norm_im = phi.norm4().image().unwrap();
            for found in [order4_pair(&phi).unwrap(), order4_quotient_condition(&phi).unwrap()]
            {
                if let Some((k, _)) = found {
                    assert!(phi.leaves_invariant(&k));
                    assert!(norm_im.is_subset_of(&k), "e={bits} phi={phi:?}");
                    encountered += 1;
                }
            }
        }
    }
    assert!(encountered > 0, "the searches must produce invariant subgroups");
}

/// Over untwisted contexts the Frattini subgroup is trivial, so the
/// order-4 corollary applies to every order-4 shear: a pair exists iff
/// Ker(1+phi) meets Im(1+phi), iff Ker(1+phi) < Ker((1+phi)^2).
#[test]
fn order4_existence_corollary_untwisted() {
    let c = ctx("00");
    let mut applied = 0;
    for phi in automorphism_catalog(&c) {
        if phi.order().unwrap() != 4 {
            continue;
        }
        let one_plus = phi.one_plus();
        let im = one_plus.image().unwrap();
        let ker = one_plus.kernel().unwrap();
        let meet_nontrivial = ker.iter().any(|x| x != 0 && im.contains(x));
        let ker_sq = EndoMap::from_table(
            c.clone(),
            (0..c.order())
                .map(|g| one_plus.apply(one_plus.apply(g)) as u32)
                .collect(),
            "(1+phi)^2",
        )
        .unwrap()
        .kernel()
        .unwrap();
        assert_eq!(
            meet_nontrivial,
            ker.size() < ker_sq.size(),
            "kernel-growth reading must agree"
        );
        let found = order4_pair(&phi).unwrap().is_some();
        assert_eq!(found, meet_nontrivial, "phi={phi:?}");
        applied += 1;
    }
    assert!(applied > 0);
}

/// The rotation map agrees with both order-4 search routes and the
/// construction conditions at order 65536.
#[test]
fn rotation_cross_check_order4_routes() {
    let c = ctx("0000");
    let pi = make_pi(&c, &[]).unwrap();
    assert_eq!(pi.order().unwrap(), 4);
    let form = FormSpec::parse("0000").unwrap();
    let direct = order4_pair(&pi).unwrap().expect("pair must exist");
    let via_quotient = order4_quotient_condition(&pi)
        .unwrap()
        .expect("quotient condition is non-trivial here");
    for (k, h) in [direct, via_quotient] {
        let report = check_gkt(&form, &k, &pi, h).unwrap();
        assert!(report.ok, "violations: {:?}", report.violations);
        assert_eq!(k.size() * 4, c.order());
    }
}

/// Order-2 pairs satisfy the construction conditions across the whole
/// shear catalog; whenever the fixed subgroup has index above the map
/// order, the built group is non-abelian, and the nilpotency class obeys
/// the order-2/order-4 bounds.
#[test]
fn order2_pairs_always_satisfy_conditions() {
    for bits in ["0", "1", "01", "11"] {
        let c = ctx(bits);
        let all_zero: String = std::iter::repeat('0').take(c.block_count()).collect();
        let form = FormSpec::parse(&all_zero).unwrap();
        for phi in automorphism_catalog(&c) {
            if phi.order().unwrap() != 2 {
                continue;
            }
            // only generalized isometries of the reference form qualify
            if !pdslab::endo::is_generalized_isometry(&phi, &form).unwrap() {
                continue;
            }
            let (k, h) = order2_pair(&phi).unwrap();
            let report = check_gkt(&form, &k, &phi, h).unwrap();
            assert!(report.ok, "e={bits} phi={phi:?}: {:?}", report.violations);
            let group = pdslab::regular::RegularGroup::build(&form, &k, &phi, h).unwrap();
            let inv = group.invariants();
            if report.nonabelian_guaranteed {
                assert!(inv.derived.order() > 1, "e={bits} phi={phi:?}");
            }
            assert!(inv.class <= 3, "order-2 builds have class at most 3");
        }
    }
}

/// Class bound for order-4 builds: no larger than 6.
#[test]
fn order4_pairs_respect_class_bound() {
    for bits in ["00", "01", "11"] {
        let c = ctx(bits);
        for phi in automorphism_catalog(&c) {
            if phi.order().unwrap() != 4 {
                continue;
            }
            let Some((k, h)) = order4_pair(&phi).unwrap() else {
                continue;
            };
            // build against the matching-coefficient form so condition (a)
            // holds: rho_a is a generalized isometry of Q_a
            let pdslab::endo::Descriptor::Rho { a } = phi.descriptor() else {
                continue;
            };
            let form = FormSpec::parse(a).unwrap();
            if !pdslab::endo::is_generalized_isometry(&phi, &form).unwrap() {
                continue;
            }
            let group = pdslab::regular::RegularGroup::build(&form, &k, &phi, h).unwrap();
            let inv = group.invariants();
            assert!(inv.class <= 6, "e={bits} phi={phi:?}: class {}", inv.class);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Closures of arbitrary generator lists are subgroups whose counted
    /// abelian type multiplies back to the subgroup order.
    #[test]
    fn closure_type_order_consistency(
        twists in prop::collection::vec(0u8..2, 1..=3),
        raw_gens in prop::collection::vec(0usize..4096, 0..4),
    ) {
        let c = GroupContext::new(&twists).unwrap();
        let gens: Vec<usize> = raw_gens.iter().map(|&g| g % c.order()).collect();
        let s = Subgroup::closure(c.clone(), &gens);
        prop_assert!(s.contains(0));
        prop_assert_eq!(c.order() % s.size(), 0);
        prop_assert_eq!(s.abelian_type().order(), s.size() as u64);
        // closed under the group operation on a sample of pairs
        let members: Vec<usize> = s.iter().collect();
        for (i, &x) in members.iter().enumerate().take(20) {
            let y = members[(i * 7) % members.len()];
            prop_assert!(s.contains(c.add_idx(x, y)));
            prop_assert!(s.contains(c.neg_idx(x)));
        }
    }

    /// Any inverse-closed set avoiding the identity either fails
    /// verification or yields parameters satisfying the counting
    /// identity.
    #[test]
    fn verified_sets_satisfy_counting_identity(
        twists in prop::collection::vec(0u8..2, 1..=2),
        seeds in prop::collection::vec(1usize..256, 1..12),
    ) {
        let c = GroupContext::new(&twists).unwrap();
        let mut d = IndexSet::new(c.order());
        for &s in &seeds {
            let x = s % c.order();
            if x != 0 {
                d.insert(x);
                d.insert(c.neg_idx(x));
            }
        }
        let table = TwistedTable(&c);
        if let pdslab::pds::PdsOutcome::Verified(v) = verify_pds(&table, &d, 1).unwrap() {
            prop_assert!(v.params.counting_identity_holds());
            prop_assert_eq!(v.params.k, d.count() as u64);
        }
    }
}
