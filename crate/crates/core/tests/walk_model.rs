mod common;

use common::strategies::{interior_barrier, left_end, regime, right_end};
use common::*;
use mfbwalk::modified::mfinite_arrivals;
use mfbwalk::walk_model::*;
use proptest::prelude::*;

fn any_prob() -> impl Strategy<Value = f64> {
    prop_oneof![
        4 => -0.5f64..1.5,
        1 => Just(f64::NAN),
        1 => Just(f64::INFINITY),
        1 => Just(0.0),
    ]
}

fn any_regime() -> impl Strategy<Value = PqrsParams> {
    (any_prob(), any_prob(), any_prob(), any_prob()).prop_map(|(p, q, r, s)| PqrsParams::new(p, q, r, s))
}

fn any_barrier() -> impl Strategy<Value = MfbParams> {
    (any_prob(), any_prob(), any_prob(), any_prob(), 0..3u8).prop_map(|(f, b, h, s, role)| MfbParams {
        fwd: f,
        bwd: b,
        hold: h,
        absorb: s,
        role: [BarrierRole::LeftEnd, BarrierRole::Interior, BarrierRole::RightEnd][role as usize],
    })
}

#[test]
fn validation_examples() {
    let full = |p| FullLineWalkSpec { interior: p };
    assert!(full(PqrsParams::uniform()).validate().is_ok());
    let bad = full(PqrsParams::new(0.5, 0.5, 0.1, 0.1)).validate();
    assert!(!bad.is_ok() && bad.mentions("sum ≠ 1"));
    let no_absorb = full(PqrsParams::new(0.5, 0.3, 0.2, 0.0)).validate();
    assert!(no_absorb.mentions("pqs > 0 required"));
}

proptest! {
    #[test]
    fn validate_is_total(
        n in -5i64..20, m in -5i64..20,
        a in any_regime(), b in any_regime(),
        x in any_barrier(), y in any_barrier(), z in any_barrier(),
    ) {
        let specs = [
            WalkSpec::Finite(FiniteWalkSpec { n, interior: a, left: x, right: y }),
            WalkSpec::HalfLine(HalfLineWalkSpec { interior: a, left: x }),
            WalkSpec::FullLine(FullLineWalkSpec { interior: a }),
            WalkSpec::ModifiedFinite(ModifiedFiniteSpec { n, m, right_regime: a, left_regime: b, left: x, barrier: y, right: z }),
            WalkSpec::ModifiedHalfLine(ModifiedHalfLineSpec { m, right_regime: a, left_regime: b, left: x, barrier: y }),
            WalkSpec::ModifiedFullLine(ModifiedFullLineSpec { pos_regime: a, neg_regime: b, origin: y }),
        ];
        for spec in specs {
            let report = spec.validate();
            prop_assert_eq!(report.is_ok(), report.violations.is_empty());
        }
    }

    #[test]
    fn reflected_arrivals_match_oracle(
        r in regime(), l in regime(), left in left_end(), barrier in interior_barrier(), right in right_end(),
        n in 4i64..=25, frac in 0.3f64..0.95, pick in 0.0f64..1.0,
    ) {
        let m = ((n as f64 * frac) as i64).clamp(2, n - 1);
        let i0 = 1 + ((m - 1) as f64 * pick) as i64;
        prop_assume!(i0 < m);
        let spec = ModifiedFiniteSpec { n, m, right_regime: r, left_regime: l, left, barrier, right };
        let refl = reflect_translate(&spec, i0).unwrap();
        prop_assert!(refl.spec.m < refl.start && refl.start < n);
        prop_assert_eq!(mirror_finite(&refl.spec), spec);
        let mirrored = mfinite_arrivals(&refl.spec, refl.start).unwrap();
        let row = sites(&WalkSpec::ModifiedFinite(spec), 0, n).visits(i0);
        for x in 0..=n {
            prop_assert!(rel(mirrored.values[refl.map.apply(x) as usize], row[x as usize]) < 1e-10);
        }
    }
}
