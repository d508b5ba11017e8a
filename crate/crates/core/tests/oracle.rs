mod common;

use common::*;
use mfbwalk::homogeneous::{finite_arrivals, fullline_arrivals, halfline_arrivals, Occupancy};
use mfbwalk::mc::{mc_run, McConfig};
use mfbwalk::oracle::*;
use mfbwalk::walk_model::*;

fn n4() -> FiniteWalkSpec {
    FiniteWalkSpec {
        n: 4,
        interior: PqrsParams::uniform(),
        left: MfbParams::left(0.5, 0.25, 0.25),
        right: MfbParams::right(0.5, 0.25, 0.25),
    }
}

fn uniform_full() -> WalkSpec {
    WalkSpec::FullLine(FullLineWalkSpec {
        interior: PqrsParams::uniform(),
    })
}

#[test]
fn n4_chain_encoding() {
    let chain = build_chain(&WalkSpec::Finite(n4()), Window::Auto { around: 0 }).unwrap();
    assert_eq!(chain.len(), 5);
    assert_eq!((chain.state(0), chain.hi()), (0, 4));
    let q = chain.to_dense();
    for k in 0..5 {
        let row: f64 = q.row(k).iter().sum();
        assert!((row + 0.25 - 1.0).abs() < 1e-12);
    }
    let x = exact_visits(&chain, 2).unwrap();
    let ours = sites(&WalkSpec::Finite(n4()), 0, 4).visits(2);
    for k in 0..5 {
        assert_close(x[k], ours[k], 1e-13);
    }
    let d = dense_visits(&chain, 2).unwrap();
    for k in 0..5 {
        assert_close(d[k], ours[k], 1e-13);
    }
}

#[test]
fn auto_window_for_uniform_full_line() {
    let k = auto_half_width(&uniform_full(), 0).unwrap();
    assert!((28..=31).contains(&k), "half-width {k}");
    let (xi1, xi2) = quadratic_roots(&PqrsParams::uniform());
    let zeta = 1.0 / (xi1 - xi2) / 0.25;
    assert!(zeta * xi2.powi(k as i32) < 1e-11);
}

#[test]
fn auto_window_is_stable_under_doubling() {
    let specs = [
        uniform_full(),
        WalkSpec::FullLine(FullLineWalkSpec {
            interior: PqrsParams::new(0.5, 0.1, 0.3, 0.1),
        }),
        WalkSpec::HalfLine(HalfLineWalkSpec {
            interior: PqrsParams::new(0.2, 0.5, 0.2, 0.1),
            left: MfbParams::left(0.4, 0.4, 0.2),
        }),
    ];
    for spec in specs {
        let i0 = 3;
        let auto = build_chain(&spec, Window::Auto { around: i0 }).unwrap();
        let x = exact_visits(&auto, i0).unwrap();
        let k = auto_half_width(&spec, i0).unwrap();
        let wide = build_chain(&spec, Window::Range(i0 - 2 * k, i0 + 2 * k)).unwrap();
        let y = exact_visits(&wide, i0).unwrap();
        for (idx, v) in x.iter().enumerate() {
            let state = auto.state(idx);
            let w = y[wide.index(state).unwrap()];
            assert!((v - w).abs() < 1e-10, "state {state}: {v} vs {w}");
        }
    }
}

#[test]
fn dp_two_step_mass() {
    let steps = dp_nstep(&PqrsParams::uniform(), 2);
    assert_close(steps[2].at(0), 0.1875, 1e-15);
    assert_close(steps[2].survival(), 0.5625, 1e-15);
}

#[test]
fn chain_absorption_identities() {
    let spec = n4();
    let chain = build_chain(&WalkSpec::Finite(spec), Window::Auto { around: 0 }).unwrap();
    let a = exact_absorption(&chain, 2).unwrap();
    assert_close(a.probabilities.iter().sum::<f64>(), 1.0, 1e-12);
    assert_close(a.mean_time, 3.0, 1e-12);
    assert_close(a.defective_times.iter().sum::<f64>(), 3.0, 1e-12);
    assert_eq!(a.leaked, 0.0);
    let it = iterated_visits(&chain, 2, 1e-15, 10_000).unwrap();
    let x = finite_arrivals(&spec, 2).unwrap();
    for k in 0..5 {
        assert_close(it[k], x.values[k], 1e-12);
    }
}

#[test]
fn mc_finite_absorption_and_visits() {
    let spec = n4();
    let cfg = McConfig::new(1_000_000, 11).visit_window(0, 4);
    let report = mc_run(&WalkSpec::Finite(spec), 2, &cfg).unwrap();
    let x = finite_arrivals(&spec, 2).unwrap();
    for j in 0..=4 {
        let want = 0.25 * x.values[j as usize];
        let est = report.absorption_at(j).unwrap();
        assert!(est.z_score(want) < 4.0, "absorption at {j}: {} vs {want}", est.mean);
    }
    assert!(report.mean_time.unwrap().z_score(3.0) < 4.0);

    // Visits to 3 from 1 are f_13 · x_33.
    let from1 = mc_run(&WalkSpec::Finite(spec), 1, &cfg).unwrap();
    let x1 = finite_arrivals(&spec, 1).unwrap();
    assert!(from1.visits_at(3).unwrap().z_score(x1.values[3]) < 4.0);
}

#[test]
fn mc_halfline_visits() {
    let spec = HalfLineWalkSpec {
        interior: PqrsParams::uniform(),
        left: MfbParams::left(0.5, 0.25, 0.25),
    };
    let cfg = McConfig::new(1_000_000, 5).visit_window(0, 8);
    let report = mc_run(&WalkSpec::HalfLine(spec), 0, &cfg).unwrap();
    let x = halfline_arrivals(&spec, 0).unwrap();
    for j in [0, 1, 4] {
        assert!(report.visits_at(j).unwrap().z_score(x.at(j)) < 4.0);
    }
}

#[test]
fn mc_fullline_mean_time_and_occupancy() {
    let spec = uniform_full();
    let cfg = McConfig::new(400_000, 3).visit_window(-3, 3);
    let report = mc_run(&spec, 0, &cfg).unwrap();
    assert!(report.mean_time.unwrap().z_score(3.0) < 4.0);
    let WalkSpec::FullLine(f) = spec else { unreachable!() };
    for n in -3..=3 {
        assert!(report.visits_at(n).unwrap().z_score(fullline_arrivals(&f, 0, n).unwrap()) < 4.0);
    }
}

#[test]
fn mc_standard_error_shrinks_as_root_replicas() {
    let spec = WalkSpec::Finite(n4());
    let small = mc_run(&spec, 2, &McConfig::new(50_000, 1)).unwrap();
    let large = mc_run(&spec, 2, &McConfig::new(200_000, 2)).unwrap();
    let ratio = small.mean_time.unwrap().std_error / large.mean_time.unwrap().std_error;
    assert!((ratio - 2.0).abs() < 0.4, "ratio {ratio}");
}

#[test]
fn mc_is_schedule_independent() {
    let spec = WalkSpec::HalfLine(HalfLineWalkSpec {
        interior: PqrsParams::new(0.3, 0.3, 0.2, 0.2),
        left: MfbParams::left(0.5, 0.3, 0.2),
    });
    let cfg = McConfig::new(20_000, 99).visit_window(0, 5);
    let one = mc_run(&spec, 2, &cfg.clone().workers(1)).unwrap();
    let three = mc_run(&spec, 2, &cfg.workers(3)).unwrap();
    assert_eq!(one, three);
}
