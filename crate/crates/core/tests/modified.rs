mod common;

use common::strategies::{interior_barrier, left_end, regime, right_end};
use common::*;
use mfbwalk::displays::*;
use mfbwalk::homogeneous::{finite_arrivals, fullline_arrivals, Occupancy};
use mfbwalk::modified::*;
use mfbwalk::walk_model::*;
use proptest::prelude::*;

fn mfinite_example() -> ModifiedFiniteSpec {
    ModifiedFiniteSpec {
        n: 8,
        m: 3,
        right_regime: PqrsParams::uniform(),
        left_regime: PqrsParams::uniform(),
        left: MfbParams::left(0.5, 0.25, 0.25),
        barrier: MfbParams::interior(0.3, 0.3, 0.2, 0.2),
        right: MfbParams::right(0.5, 0.25, 0.25),
    }
}

fn absorbed(spec: &WalkSpec, values: &[f64], lo: i64) -> f64 {
    values.iter().enumerate().map(|(k, x)| site(spec, lo + k as i64)[3] * x).sum()
}

fn with_regime(p: PqrsParams, barrier: MfbParams) -> ModifiedFiniteSpec {
    ModifiedFiniteSpec {
        left_regime: p,
        right_regime: p,
        barrier,
        ..mfinite_example()
    }
}

// Frozen from the dense oracle: x_n from i0 = 5 for the example above.
const EXAMPLE_ROW5: [f64; 9] = [
    0.017_155_110_793_423_87,
    0.051_465_332_380_271_61,
    0.120_085_775_553_967_1,
    0.257_326_661_901_358_06,
    0.703_359_542_530_378_8,
    1.801_286_633_309_507,
    0.700_500_357_398_141_5,
    0.300_214_438_884_917_8,
    0.100_071_479_628_305_93,
];

#[test]
fn finite_example_matches_oracle() {
    let spec = mfinite_example();
    let w = WalkSpec::ModifiedFinite(spec);
    let oracle = sites(&w, 0, 8);
    for i0 in 0..=8 {
        let row = oracle.visits(i0);
        let x = mfinite_arrivals(&spec, i0).unwrap();
        for n in 0..=8 {
            assert_close(x.values[n], row[n], 1e-10);
        }
        assert_close(absorbed(&w, &x.values, 0), 1.0, 1e-10);
    }
    let row = oracle.visits(5);
    for n in 0..=8 {
        assert_close(row[n], EXAMPLE_ROW5[n], 1e-12);
    }
}

#[test]
fn reflection_example_and_involution() {
    let spec = ModifiedFiniteSpec {
        n: 10,
        m: 6,
        right_regime: PqrsParams::new(0.3, 0.2, 0.3, 0.2),
        left_regime: PqrsParams::new(0.1, 0.5, 0.1, 0.3),
        left: MfbParams::left(0.4, 0.4, 0.2),
        barrier: MfbParams::interior(0.2, 0.3, 0.1, 0.4),
        right: MfbParams::right(0.6, 0.1, 0.3),
    };
    let r = reflect_translate(&spec, 3).unwrap();
    assert_eq!((r.spec.n, r.spec.m, r.start), (10, 4, 7));
    assert_eq!(r.map.apply(3), 7);
    assert_eq!(mirror_finite(&r.spec), spec);
    assert_eq!((r.map.compose(&r.map))(5), 5);
    assert!(reflect_translate(&spec, 6).is_err());
    assert!(reflect_translate(&spec, 0).is_err());

    let direct = sites(&WalkSpec::ModifiedFinite(spec), 0, 10).visits(3);
    let mirrored = mfinite_arrivals(&r.spec, r.start).unwrap();
    for x in 0..=10 {
        assert_close(mirrored.values[r.map.apply(x) as usize], direct[x as usize], 1e-10);
    }
    let x = mfinite_arrivals(&spec, 3).unwrap();
    for n in 0..=10 {
        assert_close(x.values[n], direct[n], 1e-10);
    }
}

#[test]
fn mirror_symmetric_spec_is_a_fixed_point() {
    let spec = ModifiedFiniteSpec {
        n: 10,
        m: 5,
        right_regime: PqrsParams::new(0.3, 0.2, 0.3, 0.2),
        left_regime: PqrsParams::new(0.2, 0.3, 0.3, 0.2),
        left: MfbParams::left(0.4, 0.4, 0.2),
        barrier: MfbParams::interior(0.3, 0.3, 0.1, 0.3),
        right: MfbParams::right(0.4, 0.4, 0.2),
    };
    assert_eq!(mirror_finite(&spec), spec);
}

#[test]
fn plain_barrier_reduces_to_homogeneous() {
    let p = PqrsParams::new(0.3, 0.2, 0.1, 0.4);
    let spec = with_regime(p, MfbParams::interior(p.p, p.q, p.r, p.s));
    let plain = FiniteWalkSpec {
        n: spec.n,
        interior: p,
        left: spec.left,
        right: spec.right,
    };
    for i0 in 0..=spec.n {
        let a = mfinite_arrivals(&spec, i0).unwrap();
        let b = finite_arrivals(&plain, i0).unwrap();
        for n in 0..=spec.n as usize {
            assert_close(a.values[n], b.values[n], 1e-10);
        }
    }
}

#[test]
fn asymmetric_example() {
    let spec = with_regime(PqrsParams::new(0.6, 0.4, 0.0, 0.0), MfbParams::interior(0.3, 0.3, 0.2, 0.2));
    let w = WalkSpec::ModifiedFinite(spec);
    let oracle = sites(&w, 0, 8);
    for i0 in 4..=8 {
        let x = mfinite_asymmetric(&spec, i0).unwrap();
        let row = oracle.visits(i0);
        for n in 0..=8 {
            assert_close(x.values[n], row[n], 1e-10);
        }
        assert_close(absorbed(&w, &x.values, 0), 1.0, 1e-10);
    }
    let sym = with_regime(PqrsParams::new(0.5, 0.5, 0.0, 0.0), spec.barrier);
    assert!(mfinite_asymmetric(&sym, 5).is_err());
}

#[test]
fn symmetric_example_and_limit() {
    let barrier = MfbParams::interior(0.3, 0.3, 0.2, 0.2);
    let spec = with_regime(PqrsParams::new(0.5, 0.5, 0.0, 0.0), barrier);
    let w = WalkSpec::ModifiedFinite(spec);
    let oracle = sites(&w, 0, 8);
    let h = 1e-6;
    let up = with_regime(PqrsParams::new(0.5 + h, 0.5 - h, 0.0, 0.0), barrier);
    let down = with_regime(PqrsParams::new(0.5 - h, 0.5 + h, 0.0, 0.0), barrier);
    for i0 in 4..=8 {
        let x = mfinite_symmetric(&spec, i0).unwrap();
        let row = oracle.visits(i0);
        let a = mfinite_asymmetric(&up, i0).unwrap();
        let b = mfinite_asymmetric(&down, i0).unwrap();
        for n in 0..=8 {
            assert_close(x.values[n], row[n], 1e-10);
            assert!((x.values[n] - 0.5 * (a.values[n] + b.values[n])).abs() < 1e-6);
        }
        let barriers = [0usize, 3, 8].iter().map(|&n| site(&w, n as i64)[3] * x.values[n]).sum::<f64>();
        assert!((barriers - 1.0).abs() < 1e-12);
    }
}

#[test]
fn intermediates_satisfy_recurrences() {
    let spec = mfinite_example();
    let it = ModifiedFiniteIntermediates::new(&spec, 5, FiniteReading::LITERAL).unwrap();
    for n in 1..spec.n {
        assert!(it.phi_residual(n).abs() < 1e-10);
    }
    let sym = with_regime(PqrsParams::new(0.5, 0.5, 0.0, 0.0), spec.barrier);
    let k = SymmetricSpecialIntermediates::new(&sym);
    assert_eq!(k.k(sym.m as f64), sym.barrier.fwd);
    let slope = k.k(7.0) - k.k(6.0);
    assert!((k.k(2.0) - k.k(1.0) - slope).abs() < 1e-14);
}

fn mhalfline_example() -> ModifiedHalfLineSpec {
    ModifiedHalfLineSpec {
        m: 3,
        right_regime: PqrsParams::uniform(),
        left_regime: PqrsParams::uniform(),
        left: MfbParams::left(0.5, 0.25, 0.25),
        barrier: MfbParams::interior(0.3, 0.3, 0.2, 0.2),
    }
}

#[test]
fn halfline_example_matches_oracle() {
    let spec = mhalfline_example();
    let w = WalkSpec::ModifiedHalfLine(spec);
    let hi = 6 + reach(&spec.right_regime, 1e-15);
    let oracle = sites(&w, 0, hi);
    let row = oracle.visits(6);
    let x = mhalfline_arrivals(&spec, 6).unwrap();
    for n in 0..=30 {
        assert_close(x.value_at(n), row[n as usize], 1e-10);
    }
    let values: Vec<f64> = (0..=hi).map(|n| x.value_at(n)).collect();
    assert!((absorbed(&w, &values, 0) - 1.0).abs() < 1e-8);
    assert!(x.max_residual() < 1e-10);

    let long = ModifiedFiniteSpec {
        n: 80,
        m: spec.m,
        right_regime: spec.right_regime,
        left_regime: spec.left_regime,
        left: spec.left,
        barrier: spec.barrier,
        right: MfbParams::right(0.5, 0.25, 0.25),
    };
    let f = mfinite_arrivals(&long, 6).unwrap();
    for n in 0..=12 {
        assert_close(x.value_at(n), f.values[n as usize], 1e-8);
    }
}

#[test]
fn halfline_time_is_geometric_when_absorption_is_uniform() {
    let s = 0.25;
    let spec = ModifiedHalfLineSpec {
        m: 4,
        right_regime: PqrsParams::new(0.4, 0.2, 0.15, s),
        left_regime: PqrsParams::new(0.2, 0.3, 0.25, s),
        left: MfbParams::left(0.5, 0.25, s),
        barrier: MfbParams::interior(0.3, 0.3, 0.15, s),
    };
    let mut prev = f64::NAN;
    for i in 0..30 {
        let m = mhalfline_absorption_time(&spec, i).unwrap();
        assert_close(m, 3.0, 1e-10);
        prev = m;
    }
    assert!(prev.is_finite());
}

#[test]
fn halfline_time_relaxes_monotonically() {
    let spec = mhalfline_example();
    let sigma = spec.right_regime.sigma();
    let gaps: Vec<f64> = (spec.m..spec.m + 20)
        .map(|i| (mhalfline_absorption_time(&spec, i).unwrap() - sigma).abs())
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] <= w[0]));
}

fn mfullline_example() -> ModifiedFullLineSpec {
    ModifiedFullLineSpec {
        pos_regime: PqrsParams::uniform(),
        neg_regime: PqrsParams::new(0.4, 0.2, 0.2, 0.2),
        origin: MfbParams::interior(0.3, 0.3, 0.2, 0.2),
    }
}

fn fullline_window(spec: &ModifiedFullLineSpec, i0: i64) -> (i64, i64) {
    let k = reach(&spec.pos_regime, 1e-15).max(reach(&spec.neg_regime, 1e-15));
    (i0.min(0) - k, i0.max(0) + k)
}

#[test]
fn fullline_example_matches_oracle() {
    let spec = mfullline_example();
    let (lo, hi) = fullline_window(&spec, 4);
    let oracle = sites(&WalkSpec::ModifiedFullLine(spec), lo, hi);
    let row = oracle.visits(4);
    let x = mfullline_arrivals(&spec, 4).unwrap();
    for n in -15..=20 {
        assert_close(x.at(n), row[oracle.idx(n)], 1e-10);
    }
    let times = oracle.times();
    for i in -20..=20 {
        assert_close(mfullline_absorption_time(&spec, i).unwrap(), times[oracle.idx(i)], 1e-8);
    }
}

#[test]
fn fullline_modification_vanishes() {
    let p = PqrsParams::new(0.35, 0.25, 0.1, 0.3);
    let spec = ModifiedFullLineSpec {
        pos_regime: p,
        neg_regime: p,
        origin: MfbParams::interior(p.p, p.q, p.r, p.s),
    };
    let plain = FullLineWalkSpec { interior: p };
    for i0 in [-3, 0, 5] {
        let x = mfullline_arrivals(&spec, i0).unwrap();
        for n in -10..=10 {
            assert_close(x.at(n), fullline_arrivals(&plain, i0, n).unwrap(), 1e-12);
        }
    }
    for i in -10..=10 {
        assert_close(mfullline_absorption_time(&spec, i).unwrap(), p.sigma(), 1e-12);
    }
}

#[test]
fn fullline_origin_display_is_the_general_one_at_zero() {
    let spec = mfullline_example();
    let it = ModifiedFullLineIntermediates::new(&spec).unwrap();
    for n in -10..=10 {
        assert_close(fullline_origin_display_at(&spec, &it, n), fullline_display_at(&spec, &it, 0, n), 1e-12);
    }
}

#[test]
fn fullline_time_is_continuous_at_origin() {
    let spec = mfullline_example();
    let system = mfullline_absorption_time_via(&spec, 0, Route::System).unwrap();
    let display = fullline_time_display(&spec, 0, FullLineTimeReading::Corrected).unwrap();
    assert_close(display, system, 1e-12);
    // Both one-sided geometric relaxations, extended to 0, meet at m_0.
    let (a, b) = (fullline_time_display(&spec, 1, FullLineTimeReading::Corrected).unwrap(), fullline_time_display(&spec, 2, FullLineTimeReading::Corrected).unwrap());
    let (s1, _) = quadratic_roots(&spec.pos_regime);
    let sigma1 = spec.pos_regime.sigma();
    assert_close(sigma1 + (a - sigma1) * s1, system, 1e-12);
    assert_close((b - sigma1) * s1, a - sigma1, 1e-12);
}

fn escape_spec(neg: PqrsParams) -> ModifiedFullLineSpec {
    ModifiedFullLineSpec {
        pos_regime: PqrsParams::new(0.6, 0.4, 0.0, 0.0),
        neg_regime: neg,
        origin: MfbParams::interior(0.4, 0.4, 0.0, 0.2),
    }
}

/// Escape probabilities from a wide window whose edges leak.
fn leaked(spec: &ModifiedFullLineSpec, i0: i64, k: i64) -> (f64, f64, f64) {
    let oracle = sites(&WalkSpec::ModifiedFullLine(*spec), -k, k);
    let row = oracle.visits(i0);
    let at = |n: i64| row[oracle.idx(n)];
    (
        spec.origin.absorb * at(0),
        spec.pos_regime.p * at(k),
        spec.neg_regime.q * at(-k),
    )
}

#[test]
fn escape_case_one() {
    let spec = escape_spec(PqrsParams::new(0.6, 0.4, 0.0, 0.0));
    let e = mfullline_escape(&spec, 2).unwrap();
    assert!((e.total() - 1.0).abs() < 1e-12);
    assert_eq!(e.minus, 0.0);
    let (a, plus, minus) = leaked(&spec, 2, 200);
    assert_close(e.absorbed, a, 1e-10);
    assert_close(e.plus, plus, 1e-10);
    assert!(minus < 1e-12);
}

#[test]
fn escape_case_two() {
    let spec = escape_spec(PqrsParams::new(0.3, 0.6, 0.1, 0.0));
    for i0 in [0, 1, 5] {
        let e = mfullline_escape(&spec, i0).unwrap();
        assert!((e.total() - 1.0).abs() < 1e-12);
        let (a, plus, minus) = leaked(&spec, i0, 200);
        assert_close(e.absorbed, a, 1e-10);
        assert_close(e.plus, plus, 1e-10);
        assert_close(e.minus, minus, 1e-10);
    }
}

#[test]
fn escape_rejects_untreated_cases() {
    let back = ModifiedFullLineSpec {
        pos_regime: PqrsParams::new(0.4, 0.6, 0.0, 0.0),
        ..escape_spec(PqrsParams::new(0.6, 0.4, 0.0, 0.0))
    };
    assert!(matches!(mfullline_escape(&back, 2), Err(mfbwalk::Error::UnsupportedCase(_))));
    let level = escape_spec(PqrsParams::new(0.5, 0.5, 0.0, 0.0));
    assert!(matches!(mfullline_escape(&level, 2), Err(mfbwalk::Error::UnsupportedCase(_))));
    let ok = escape_spec(PqrsParams::new(0.6, 0.4, 0.0, 0.0));
    assert!(mfullline_escape(&ok, -1).is_err());
}

fn modified_finite() -> impl Strategy<Value = (ModifiedFiniteSpec, i64)> {
    (3i64..=30, regime(), regime(), left_end(), interior_barrier(), right_end())
        .prop_flat_map(|(n, r, l, left, barrier, right)| {
            (1..n, 0..=n).prop_map(move |(m, i0)| {
                (
                    ModifiedFiniteSpec {
                        n,
                        m,
                        right_regime: r,
                        left_regime: l,
                        left,
                        barrier,
                        right,
                    },
                    i0,
                )
            })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn finite_system_matches_dense_oracle((spec, i0) in modified_finite()) {
        let w = WalkSpec::ModifiedFinite(spec);
        let oracle = sites(&w, 0, spec.n);
        let row = oracle.visits(i0);
        for route in [Route::Auto, Route::System] {
            let x = mfinite_arrivals_via(&spec, i0, route).unwrap();
            for n in 0..=spec.n as usize {
                prop_assert!(rel(x.values[n], row[n]) < 1e-10);
            }
            prop_assert!((absorbed(&w, &x.values, 0) - 1.0).abs() < 1e-10);
        }
        let m = mfinite_absorption(&spec, i0).unwrap().mean_time;
        prop_assert!(rel(m, oracle.times()[i0 as usize]) < 1e-10);
    }

    #[test]
    fn halfline_system_matches_truncated_oracle(
        r in regime(), l in regime(), left in left_end(), barrier in interior_barrier(),
        m in 1i64..8, offset in 0i64..6,
    ) {
        let spec = ModifiedHalfLineSpec { m, right_regime: r, left_regime: l, left, barrier };
        let i0 = m + offset;
        let hi = m + 20 + reach(&r, 1e-15);
        let oracle = sites(&WalkSpec::ModifiedHalfLine(spec), 0, hi);
        let row = oracle.visits(i0);
        let x = mhalfline_arrivals(&spec, i0).unwrap();
        for n in 0..=m + 10 {
            prop_assert!(rel(x.value_at(n), row[n as usize]) < 1e-10);
        }
        let times = oracle.times();
        for i in 0..=m + 20 {
            prop_assert!(rel(mhalfline_absorption_time(&spec, i).unwrap(), times[i as usize]) < 1e-8);
        }
    }

    #[test]
    fn fullline_system_matches_truncated_oracle(
        pos in regime(), neg in regime(), origin in interior_barrier(), i0 in -5i64..=5,
    ) {
        let spec = ModifiedFullLineSpec { pos_regime: pos, neg_regime: neg, origin };
        let (lo, hi) = fullline_window(&spec, 20);
        let (lo, hi) = (lo.min(-20 - (hi - 20)), hi);
        let oracle = sites(&WalkSpec::ModifiedFullLine(spec), lo, hi);
        let row = oracle.visits(i0);
        let x = mfullline_arrivals(&spec, i0).unwrap();
        for n in -8..=8 {
            prop_assert!(rel(x.at(n), row[oracle.idx(n)]) < 1e-10);
        }
        let times = oracle.times();
        for i in -20..=20 {
            prop_assert!(rel(mfullline_absorption_time(&spec, i).unwrap(), times[oracle.idx(i)]) < 1e-8);
        }
    }
}
