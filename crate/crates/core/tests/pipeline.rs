mod common;

use common::*;
use refinable::bounds::{best_bound, enclosing_integer_box, Region};
use refinable::cascade::{
    cascade_run, empirical_support, integer_iterate, lattice_cell, CascadeConfig,
    InitialFunctionKind, DEFAULT_SUPPORT_EPS,
};
use refinable::mask::coset_sum_report;
use refinable::pointwise::{
    candidate_set, export_values, import_values, left_closed_values, refine_values,
    solve_integer_values, EigenOptions,
};
use refinable::RefinementKernel;

#[test]
fn every_fixture_parses_and_roundtrips() {
    let fixtures = all_fixtures();
    assert_eq!(fixtures.len(), 9);
    for (name, p) in fixtures {
        let again = refinable::parse_problem(&p.to_json()).unwrap();
        assert_eq!(again, p, "{name}");
    }
}

#[test]
fn d4_coset_sums_are_uniform() {
    let r = coset_sum_report(&load(D4));
    assert!(r.uniform);
    assert_eq!(r.classes.len(), 2);
    for c in &r.classes {
        assert!((c.sum - 0.5).abs() < 1e-12);
        assert_eq!(c.members, 2);
    }
}

#[test]
fn quincunx_candidates_match_brute_force() {
    let p = load(QUINCUNX);
    let (bound, points) = candidate_set(&p).unwrap();
    let Region::Ball { radius } = bound.region else {
        panic!("expected a ball")
    };
    let mut brute = Vec::new();
    for a in -10i64..=10 {
        for b in -10i64..=10 {
            if ((a * a + b * b) as f64).sqrt() <= radius + 1e-9 {
                brute.push(vec![a, b]);
            }
        }
    }
    assert_eq!(points, brute);
    assert_eq!(points.len(), 21);
}

#[test]
fn cascade_and_refinement_share_arithmetic() {
    for p in [load(D4), load(HAAR), load(QUINCUNX)] {
        let kernel = RefinementKernel::new(&p);
        let seed = integer_iterate(&p, &kernel, InitialFunctionKind::IndicatorBox, 40).unwrap();
        let (_, points) = candidate_set(&p).unwrap();
        let level0: Vec<f64> = points.iter().map(|k| seed.get(k)).collect();
        let table = refine_values(&p, &points, &level0, 4, false).unwrap();
        let runs = cascade_run(
            &p,
            &CascadeConfig {
                levels: 4,
                warmup: 40,
                ..Default::default()
            },
        )
        .unwrap();
        let mut compared = 0;
        for (j, level) in table.levels() {
            for (k, v) in level {
                if runs[j as usize].domain_box().contains(k) {
                    assert_eq!(
                        v.to_bits(),
                        runs[j as usize].value(k).to_bits(),
                        "level {j} {k:?}"
                    );
                    compared += 1;
                }
            }
        }
        assert!(compared > 0);
    }
}

#[test]
fn supports_stabilize() {
    for (p, warmup) in [(load(HAAR), 0), (load(D4), 100)] {
        let runs = cascade_run(
            &p,
            &CascadeConfig {
                levels: 7,
                warmup,
                ..Default::default()
            },
        )
        .unwrap();
        let s6 = empirical_support(&runs[6], DEFAULT_SUPPORT_EPS);
        let s7 = empirical_support(&runs[7], DEFAULT_SUPPORT_EPS);
        assert!(s6.hausdorff(&s7).unwrap() <= 2f64.powi(-6));
    }
}

#[test]
fn cascade_stays_inside_best_bound() {
    for (name, p) in all_fixtures() {
        let bound = best_bound(&p).unwrap();
        let h: Vec<f64> = enclosing_integer_box(&bound)
            .hi()
            .iter()
            .map(|&v| v as f64)
            .collect();
        let runs = cascade_run(
            &p,
            &CascadeConfig {
                levels: 6,
                ..Default::default()
            },
        )
        .unwrap();
        let top = &runs[6];
        let cell = lattice_cell(&top.inverse_power().to_f64());
        let s = empirical_support(top, DEFAULT_SUPPORT_EPS);
        assert!(
            s.within_symmetric(&h, &cell),
            "{name} ({})",
            bound.provenance
        );
    }
}

#[test]
fn exported_values_roundtrip() {
    for p in [load(HAAR), load(D4), load(QUINCUNX)] {
        let options = EigenOptions::default();
        let (b, values) = solve_integer_values(&p, &options).unwrap();
        let seed = left_closed_values(&p, &values, &options).unwrap();
        let table = refine_values(&p, b.points(), &seed, 3, false).unwrap();
        let text = export_values(&table, p.matrix().inverse());
        let back = import_values(&text).unwrap();
        assert_eq!(back.dim(), table.dim());
        for (j, level) in table.levels() {
            for (k, v) in level {
                assert_eq!(back.get(j, k).unwrap().to_bits(), v.to_bits());
            }
        }
    }
}

#[test]
fn haar_export_lists_support_rows() {
    let p = load(HAAR);
    let options = EigenOptions::default();
    let (b, values) = solve_integer_values(&p, &options).unwrap();
    let seed = left_closed_values(&p, &values, &options).unwrap();
    let table = refine_values(&p, b.points(), &seed, 1, false).unwrap();
    let text = export_values(&table, p.matrix().inverse());
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3 + 5);
    let ones = rows.iter().filter(|r| r.ends_with("\t1")).count();
    assert_eq!(ones, 1 + 2);
}
