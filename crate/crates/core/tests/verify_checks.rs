//! Check-level properties of the harness.

use qkflag::verify::{available_checks, CheckSpec, SuiteConfig, Verifier};

#[test]
fn pass_status_does_not_depend_on_truncation() {
    for n in 1..=2 {
        for d in 1..=4 {
            let v = Verifier::new(SuiteConfig::new(n, d));
            for r in v.run_all(&available_checks(n), 4) {
                assert!(r.passed(), "n={n} D={d} {}:\n{}", r.name, r.residual);
            }
        }
    }
}

#[test]
fn checks_are_idempotent() {
    let v = Verifier::new(SuiteConfig::new(2, 3));
    for spec in available_checks(2) {
        let a = v.run(&spec);
        let b = v.run(&spec);
        assert_eq!(
            (a.name, a.status, a.residual, a.params),
            (b.name, b.status, b.residual, b.params)
        );
    }
}

#[test]
fn listed_examples() {
    let v = Verifier::new(SuiteConfig::new(2, 3));
    for spec in [
        CheckSpec::QamAm {
            subset: vec![1, 2],
            sign: 1,
        },
        CheckSpec::ChainIndependence {
            subset: vec![1, 2],
            sign: 1,
        },
        CheckSpec::ChainIndependence {
            subset: vec![2],
            sign: -1,
        },
        CheckSpec::Borel { d: 2 },
    ] {
        assert!(v.run(&spec).passed(), "{}", spec.name());
    }
    let v3 = Verifier::new(SuiteConfig::new(3, 2));
    for spec in [
        CheckSpec::QamAm {
            subset: vec![2],
            sign: -1,
        },
        CheckSpec::ChainIndependence {
            subset: vec![1, 3],
            sign: 1,
        },
    ] {
        assert!(v3.run(&spec).passed(), "{}", spec.name());
    }
}

#[test]
fn check_names_are_unique() {
    for n in 1..=4 {
        let mut names: Vec<String> = available_checks(n).iter().map(CheckSpec::name).collect();
        let before = names.len();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), before);
    }
}
