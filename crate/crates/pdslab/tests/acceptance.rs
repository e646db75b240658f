//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line. Every expected value is pinned here explicitly; everything is
//! recomputed from scratch by the library and compared exactly.

use pdslab::endo::{is_generalized_isometry, is_isometry};
use pdslab::families::{build_family, compare_predictions, FamilyInstance, FamilySpec};
use pdslab::forms::FormSpec;
use pdslab::gf4::GF4;
use pdslab::group_table::{FiniteGroup, TwistedTable};
use pdslab::pds::{classify_ls_nls, expected_params, verify_pds, LevelClass, PdsOutcome, PdsParams};
use pdslab::schemes::{build_scheme, intersection_numbers, is_amorphic, SchemeCheck, SchemeVariant};
use pdslab::twisted::GroupContext;

fn bits(s: &str) -> Vec<u8> {
    s.chars().map(|c| if c == '1' { 1 } else { 0 }).collect()
}

fn gf4s(s: &str) -> Vec<GF4> {
    GF4::parse_vec(s).unwrap()
}

fn level_params(e: &str, a: &str, level: GF4) -> (PdsParams, bool) {
    let ctx = GroupContext::parse(e).unwrap();
    let form = FormSpec::parse(a).unwrap();
    let d = form.level_set(&ctx, level).unwrap();
    match verify_pds(&TwistedTable(&ctx), &d, 1).unwrap() {
        PdsOutcome::Verified(v) => (v.params, v.degenerate),
        PdsOutcome::Failed(f) => panic!("level set failed verification: {f:?}"),
    }
}

#[test]
fn criterion_01_single_block_tables() {
    for e in ["0", "1"] {
        // trace-0 coefficients: hyperbolic, sign +1
        for a in ["0", "1"] {
            let (zero, degenerate) = level_params(e, a, GF4::ZERO);
            assert_eq!(zero.as_tuple(), (16, 6, 2, 2), "e={e} a={a} level 0");
            assert!(!degenerate);
            for level in [GF4::ONE, GF4::OMEGA, GF4::OMEGA1] {
                let (p, _) = level_params(e, a, level);
                assert_eq!(p.as_tuple(), (16, 3, 2, 0), "e={e} a={a} level {level}");
            }
        }
        // trace-1 coefficients: elliptic, sign -1
        for a in ["w", "W"] {
            let (zero, degenerate) = level_params(e, a, GF4::ZERO);
            assert_eq!(zero.as_tuple(), (16, 0, 0, 0), "e={e} a={a} level 0");
            assert!(degenerate, "empty zero level must be flagged");
            for level in [GF4::ONE, GF4::OMEGA, GF4::OMEGA1] {
                let (p, _) = level_params(e, a, level);
                assert_eq!(p.as_tuple(), (16, 5, 0, 2), "e={e} a={a} level {level}");
            }
        }
    }
    println!("criterion 1: PASS (8 single-block forms x 4 levels)");
}

#[test]
fn criterion_02_exhaustive_level_sets_n2() {
    let mut checked = 0;
    for e_bits in 0..4u32 {
        let e = format!("{}{}", e_bits >> 1, e_bits & 1);
        let ctx = GroupContext::parse(&e).unwrap();
        let table = TwistedTable(&ctx);
        for a_code in 0..16u32 {
            let a = format!(
                "{}{}",
                GF4::new((a_code >> 2) as u8).to_char(),
                GF4::new((a_code & 3) as u8).to_char()
            );
            let form = FormSpec::parse(&a).unwrap();
            for level in GF4::ALL {
                let d = form.level_set(&ctx, level).unwrap();
                let got = match verify_pds(&table, &d, 1).unwrap() {
                    PdsOutcome::Verified(v) => v.params,
                    PdsOutcome::Failed(f) => panic!("e={e} a={a} level {level}: {f:?}"),
                };
                let want = expected_params(
                    2,
                    form.sign(),
                    if level.is_zero() {
                        LevelClass::Zero
                    } else {
                        LevelClass::Nonzero
                    },
                );
                assert_eq!(got, want, "e={e} a={a} level {level}");
                assert!(got.counting_identity_holds());
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 4 * 16 * 4);
    println!("criterion 2: PASS ({checked} level sets over order 256)");
}

#[test]
fn criterion_03_amorphy_n2() {
    for e in ["00", "01", "10", "11"] {
        for (a, want_type) in [("00", "LS"), ("0w", "NLS")] {
            let ctx = GroupContext::parse(e).unwrap();
            let form = FormSpec::parse(a).unwrap();
            let table = TwistedTable(&ctx);
            for (variant, fusion_count) in [(SchemeVariant::Four, 15), (SchemeVariant::Three, 5)] {
                let s = build_scheme(&ctx, &form, variant).unwrap();
                match intersection_numbers(&table, &s).unwrap() {
                    SchemeCheck::Scheme(_) => {}
                    SchemeCheck::NotScheme(w) => panic!("e={e} a={a}: not a scheme: {w:?}"),
                }
                let report = is_amorphic(&table, &s).unwrap();
                assert!(report.amorphic, "e={e} a={a} variant {variant:?}");
                assert_eq!(report.fusions.len(), fusion_count);
                assert!(report.fusions.iter().all(|f| f.scheme));
                assert_eq!(report.uniform_type.as_deref(), Some(want_type));
                assert!(report.fusion_sums_consistent);
            }
        }
    }
    println!("criterion 3: PASS (4 twists x 2 signs x 2 variants, all fusions)");
}

/// Shared mechanics gate: order, regularity with class preservation over
/// the designated target, and the three generating-set identities.
fn assert_mechanics(instance: &FamilyInstance, label: &str) -> pdslab::regular::Invariants {
    let group = &instance.group;
    assert_eq!(group.size(), group.context().order(), "{label}: order");
    let classes = instance.designated_classes().unwrap();
    let action = group.verify_regular_action(&classes, 0xACCE97);
    assert_eq!(action.orbit_size, group.context().order(), "{label}: orbit");
    assert_eq!(action.stabilizer_size, 1, "{label}: stabilizer");
    assert!(action.classes_preserved, "{label}: class preservation");
    let inv = group.invariants();
    let report = group.check_closed_form_predictions(&inv);
    assert!(report.eq2_match, "{label}: derived chain formula");
    assert!(report.eq3_match, "{label}: center formula");
    assert!(report.eq4_match, "{label}: Frattini formula");
    assert!(report.eq4_variants_agree, "{label}: Frattini variants");
    inv
}

fn assert_pullback_matches(instance: &FamilyInstance, label: &str) {
    let ctx = instance.group.context();
    let table = TwistedTable(ctx);
    for (ci, class) in instance.designated_classes().unwrap().iter().enumerate() {
        let base = match verify_pds(&table, class, 1).unwrap() {
            PdsOutcome::Verified(v) => v.params,
            PdsOutcome::Failed(f) => panic!("{label}: abelian class {ci} not a PDS: {f:?}"),
        };
        let lifted = instance.group.pds_pullback(class);
        let pulled = match verify_pds(&instance.group, &lifted, 1).unwrap() {
            PdsOutcome::Verified(v) => v.params,
            PdsOutcome::Failed(f) => panic!("{label}: pulled-back class {ci} not a PDS: {f:?}"),
        };
        assert_eq!(base, pulled, "{label}: class {ci} parameters");
    }
}

#[test]
fn criterion_04_construction_mechanics() {
    // one representative per constructor; the full matrices in criteria
    // 5-8 run the same gate on every instance
    let specs = [
        FamilySpec::A {
            e: bits("11"),
            a: gf4s("00"),
            v: bits("11"),
            b: gf4s("10"),
        },
        FamilySpec::B {
            e: bits("01"),
            a: bits("11"),
            b: bits("01"),
        },
        FamilySpec::C {
            e: bits("00"),
            a: gf4s("w0"),
            b: bits("10"),
        },
    ];
    for spec in specs {
        let instance = build_family(&spec).unwrap();
        assert_mechanics(&instance, &format!("{spec:?}"));
    }
    println!("criterion 4: PASS (mechanics gate on one instance per family)");
}

#[test]
fn criterion_05_family_a_matrix() {
    let admissible_v: &[(&str, &[&str])] = &[
        ("00", &["11"]),
        ("01", &["10", "11"]),
        ("11", &["01", "10", "11"]),
    ];
    let mut count = 0;
    for (e, vs) in admissible_v {
        for a in ["00", "0w"] {
            for v in *vs {
                for b_code in 1..16u32 {
                    let b = format!(
                        "{}{}",
                        GF4::new((b_code >> 2) as u8).to_char(),
                        GF4::new((b_code & 3) as u8).to_char()
                    );
                    let spec = FamilySpec::A {
                        e: bits(e),
                        a: gf4s(a),
                        v: bits(v),
                        b: gf4s(&b),
                    };
                    let label = format!("A e={e} a={a} v={v} b={b}");
                    let instance = build_family(&spec).unwrap();
                    let inv = assert_mechanics(&instance, &label);
                    assert_eq!(inv.class, 2, "{label}: class");
                    assert_eq!(inv.exponent, 4, "{label}: exponent");
                    let (rows, all) = compare_predictions(&instance.predicted, &inv);
                    assert!(all, "{label}: case-display mismatch: {rows:?}");
                    assert_pullback_matches(&instance, &label);
                    count += 1;
                }
            }
        }
    }
    assert_eq!(count, 6 * 2 * 15);
    println!("criterion 5: PASS ({count} family-A instances, class 2 exponent 4)");
}

#[test]
fn criterion_06_family_b_matrix() {
    let mut count = 0;
    for e in ["00", "01", "11"] {
        for b in ["10", "01", "11"] {
            let spec = FamilySpec::B {
                e: bits(e),
                a: bits("11"),
                b: bits(b),
            };
            let label = format!("B e={e} a=11 b={b}");
            let instance = build_family(&spec).unwrap();
            let inv = assert_mechanics(&instance, &label);
            let w_e = bits(e).iter().filter(|&&x| x == 1).count();
            let expect_class = match (e, b) {
                ("00", _) => 2,
                ("01", "01") => 2, // w(e)=w(b)=w(e*b)=1
                _ => 3,
            };
            assert_eq!(inv.class, expect_class, "{label}: class");
            let expect_exponent = if w_e == 0 { 4 } else { 8 };
            assert_eq!(inv.exponent, expect_exponent, "{label}: exponent");
            // |Z(G)| = 2^(2(n-w(e))) * 4^w(e) = 2^(2n)
            assert_eq!(inv.center.order(), 16, "{label}: center order");
            let (rows, all) = compare_predictions(&instance.predicted, &inv);
            assert!(all, "{label}: case-display mismatch: {rows:?}");
            if w_e == 0 {
                assert!(
                    !instance.predicted.advisories.is_empty(),
                    "{label}: the w(e)=0 formula edge must be reported"
                );
            }
            assert_pullback_matches(&instance, &label);
            count += 1;
        }
    }
    assert_eq!(count, 9);
    println!("criterion 6: PASS ({count} family-B instances)");
}

#[test]
fn criterion_07_family_c_matrix() {
    let mut count = 0;
    for e in ["00", "11"] {
        for a in ["w0", "ww"] {
            for b in ["10", "01", "11"] {
                let spec = FamilySpec::C {
                    e: bits(e),
                    a: gf4s(a),
                    b: bits(b),
                };
                let label = format!("C e={e} a={a} b={b}");
                let instance = build_family(&spec).unwrap();
                let inv = assert_mechanics(&instance, &label);
                // derived order: 2^(2(n-1)+w(Tr a)) when b*Tr(a) = b,
                // else 2^(2n+w(Tr a)-1)
                let tr: Vec<u8> = gf4s(a).iter().map(|x| x.trace_bit()).collect();
                let w_t = tr.iter().filter(|&&x| x == 1).count() as u32;
                let bt_eq_b = bits(b)
                    .iter()
                    .zip(&tr)
                    .all(|(&bi, &ti)| bi == 0 || ti == 1);
                let want_derived = if bt_eq_b {
                    1u64 << (2 * (2 - 1) + w_t)
                } else {
                    1u64 << (2 * 2 + w_t - 1)
                };
                assert_eq!(inv.derived.order(), want_derived, "{label}: derived order");
                // class per the restriction order, exponent per Tr(a) = e.
                // Restricted order 4 forces class 4 unconditionally; in the
                // restricted-order-2 case the stated blanket class 2 only
                // holds when the derived subgroup is elementary, and the
                // builder must flag the one instance where it is not.
                let w_b = bits(b).iter().filter(|&&x| x == 1).count();
                let w_tb = bits(b)
                    .iter()
                    .zip(&tr)
                    .filter(|&(&bi, &ti)| bi == 1 && ti == 1)
                    .count();
                let restricted_two = w_t == 1 && w_b == 1 && w_tb == 1;
                if restricted_two {
                    assert!(inv.class == 2 || inv.class == 3, "{label}: class");
                    if inv.class == 3 {
                        assert!(
                            instance
                                .predicted
                                .advisories
                                .iter()
                                .any(|s| s.contains("class 3")),
                            "{label}: class-3 deviation must be flagged"
                        );
                        println!(
                            "criterion 7 note: {label} has class 3 (stated blanket class 2 \
                             for restricted order 2 is contradicted by its own derived display)"
                        );
                    }
                } else {
                    assert_eq!(inv.class, 4, "{label}: class");
                }
                let trace_matches_twist = tr == bits(e);
                let expect_exponent = if trace_matches_twist { 4 } else { 8 };
                assert_eq!(inv.exponent, expect_exponent, "{label}: exponent");
                // center and Frattini orders through the case engine
                let (rows, all) = compare_predictions(&instance.predicted, &inv);
                assert!(all, "{label}: case-display mismatch: {rows:?}");
                // the flat closed form for the Frattini order holds exactly
                // when the builder raised no advisory about it
                let flat = 1u64 << (2 * 2 - 1 + w_t + tr
                    .iter()
                    .zip(bits(e).iter())
                    .filter(|&(&ti, &ei)| ti == 0 && ei == 1)
                    .count() as u32);
                let flagged = instance
                    .predicted
                    .advisories
                    .iter()
                    .any(|s| s.contains("Frattini"));
                assert_eq!(
                    flat == inv.frattini.order(),
                    !flagged,
                    "{label}: flat formula vs advisory"
                );
                assert_pullback_matches(&instance, &label);
                count += 1;
            }
        }
    }
    assert_eq!(count, 12);
    println!("criterion 7: PASS ({count} family-C instances, regular on both graphs)");
}

#[test]
fn criterion_08a_family_d_epsilon0() {
    let spec = FamilySpec::D {
        epsilon: 0,
        alpha: GF4::ZERO,
        e: vec![],
        a: vec![],
        v: vec![],
    };
    let instance = build_family(&spec).unwrap();
    assert_eq!(instance.group.size(), 65536);
    let inv = assert_mechanics(&instance, "D epsilon=0");
    assert_eq!(inv.class, 4);
    assert_eq!(inv.exponent, 8);
    assert_eq!(inv.derived.order(), 1024);
    assert_eq!(inv.center.order(), 16);
    assert_eq!(inv.frattini.order(), 1 << 11);
    let (rows, all) = compare_predictions(&instance.predicted, &inv);
    assert!(all, "case-display mismatch: {rows:?}");

    // extended: the zero level pulls back as a PDS with the four-block
    // closed-form parameters (65536, 16575, 4286, 4160)
    let ctx = instance.group.context();
    let zero = instance.form.level_set(ctx, GF4::ZERO).unwrap();
    let want = expected_params(4, 1, LevelClass::Zero);
    assert_eq!(want.as_tuple(), (65536, 16575, 4286, 4160));
    let lifted = instance.group.pds_pullback(&zero);
    let pulled = match verify_pds(&instance.group, &lifted, 1).unwrap() {
        PdsOutcome::Verified(v) => v.params,
        PdsOutcome::Failed(f) => panic!("pullback failed: {f:?}"),
    };
    assert_eq!(pulled, want);
    println!("criterion 8a: PASS (epsilon=0: class 4, exponent 8, orders 1024/16/2^11, pullback)");
}

#[test]
fn criterion_08b_family_d_epsilon1() {
    let spec = FamilySpec::D {
        epsilon: 1,
        alpha: GF4::ZERO,
        e: vec![],
        a: vec![],
        v: vec![],
    };
    let instance = build_family(&spec).unwrap();
    assert_eq!(instance.group.size(), 65536);
    let inv = assert_mechanics(&instance, "D epsilon=1");
    assert_eq!(inv.class, 6);
    assert_eq!(inv.exponent, 16);
    assert_eq!(inv.derived.order(), 1024);
    assert_eq!(inv.center.order(), 16);

    // The stated Frattini order. Direct computation, the squares closure,
    // the generating-set identity, and an independent by-hand count all
    // give 2^12 here; the 2^13 closed form over-counts the base
    // Phi(K) + Im_K(1+pi) by one factor of 2. The assertion is kept as
    // stated and the discrepancy is documented, not patched.
    let stated = 1u64 << 13;
    if inv.frattini.order() != stated {
        println!(
            "criterion 8b: FAIL (epsilon=1 Frattini order measured 2^{}, stated 2^13; \
             all other epsilon=1 checks pass)",
            inv.frattini.order().trailing_zeros()
        );
    }
    assert_eq!(
        inv.frattini.order(),
        stated,
        "epsilon=1 Frattini order: measured {} against the stated 2^13; \
         the measured value is confirmed by the squares closure, the \
         generating-set identity, and an independent recount of \
         |Phi(K)+Im_K(1+pi)| = 2^11 (so 2*2^11 = 2^12)",
        inv.frattini.order()
    );
    println!("criterion 8b: PASS");
}

#[test]
fn criterion_09_nonabelian_pds_headline() {
    let cases = [
        (
            FamilySpec::A {
                e: bits("11"),
                a: gf4s("00"),
                v: bits("11"),
                b: gf4s("10"),
            },
            GF4::ZERO,
            (256u64, 75u64, 26u64, 20u64),
        ),
        (
            FamilySpec::B {
                e: bits("01"),
                a: bits("11"),
                b: bits("01"),
            },
            GF4::ONE,
            (256, 60, 20, 12),
        ),
        (
            FamilySpec::C {
                e: bits("00"),
                a: gf4s("w0"),
                b: bits("10"),
            },
            GF4::ONE,
            (256, 68, 12, 20),
        ),
    ];
    for (spec, level, want) in cases {
        let label = format!("{spec:?}");
        let instance = build_family(&spec).unwrap();
        let inv = instance.group.invariants();
        assert!(inv.derived.order() > 1, "{label}: group must be non-abelian");
        let ctx = instance.group.context();
        let d = instance.form.level_set(ctx, level).unwrap();
        let base = match verify_pds(&TwistedTable(ctx), &d, 1).unwrap() {
            PdsOutcome::Verified(v) => v.params,
            PdsOutcome::Failed(f) => panic!("{label}: abelian side: {f:?}"),
        };
        assert_eq!(base.as_tuple(), want, "{label}: abelian parameters");
        let lifted = instance.group.pds_pullback(&d);
        let pulled = match verify_pds(&instance.group, &lifted, 1).unwrap() {
            PdsOutcome::Verified(v) => v.params,
            PdsOutcome::Failed(f) => panic!("{label}: non-abelian side: {f:?}"),
        };
        assert_eq!(pulled, base, "{label}: parameters must transfer");
    }
    println!("criterion 9: PASS (A/B/C pulled-back difference sets in non-abelian groups)");
}

#[test]
fn criterion_10_property_suites_present() {
    // the suites themselves live in tests/properties.rs; this records the
    // criterion and spot-checks one row of each table from here
    let ctx = GroupContext::parse("0").unwrap();
    let tau = pdslab::endo::make_tau(&ctx, &gf4s("1")).unwrap();
    let im = tau.one_plus().image().unwrap();
    assert_eq!(im.size(), 4);
    let rho = pdslab::endo::make_rho(&ctx, &gf4s("w")).unwrap();
    assert_eq!(rho.power(2), pdslab::endo::make_tau(&ctx, &gf4s("1")).unwrap());
    let form = FormSpec::parse("w").unwrap();
    assert!(is_generalized_isometry(&rho, &form).unwrap());
    assert!(!is_isometry(&rho, &form).unwrap());
    println!("criterion 10: PASS (see the properties suite for the full tables)");
}

#[test]
fn classification_spot_checks() {
    // the LS/NLS tags behind the van Dam cross-check of criterion 3
    assert_eq!(
        classify_ls_nls(&PdsParams { v: 256, k: 75, lambda: 26, mu: 20 }).to_string(),
        "LS(16,5)"
    );
    assert_eq!(
        classify_ls_nls(&PdsParams { v: 256, k: 51, lambda: 2, mu: 12 }).to_string(),
        "NLS(16,3)"
    );
}
