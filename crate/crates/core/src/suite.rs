//! Seeded random spec generators for verification suites.
//!
//! Probabilities are drawn as normalized uniforms on top of per-component
//! floors (`p, q, r ≥ 0.02`, `s ≥ 0.05`), which keeps the roots away from
//! degeneracy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::walk_model::{
    FiniteWalkSpec, FullLineWalkSpec, HalfLineWalkSpec, MfbParams, ModifiedFiniteSpec,
    ModifiedFullLineSpec, ModifiedHalfLineSpec, PqrsParams,
};

pub const MOVE_FLOOR: f64 = 0.02;
pub const ABSORB_FLOOR: f64 = 0.05;

/// Deterministic spec source.
pub struct SpecRng {
    rng: ChaCha8Rng,
}

impl SpecRng {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.gen_range(lo..=hi)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    fn floored<const K: usize>(&mut self, floors: [f64; K]) -> [f64; K] {
        let free = 1.0 - floors.iter().sum::<f64>();
        let draws: [f64; K] = std::array::from_fn(|_| self.rng.gen_range(1e-3..1.0));
        let total: f64 = draws.iter().sum();
        std::array::from_fn(|k| floors[k] + free * draws[k] / total)
    }

    pub fn regime(&mut self) -> PqrsParams {
        let [p, q, r, s] = self.floored([MOVE_FLOOR, MOVE_FLOOR, MOVE_FLOOR, ABSORB_FLOOR]);
        PqrsParams::new(p, q, r, s)
    }

    /// A regime with `s = 0`.
    pub fn conservative_regime(&mut self) -> PqrsParams {
        let [p, q, r] = self.floored([MOVE_FLOOR; 3]);
        PqrsParams::new(p, q, r, 0.0)
    }

    pub fn left_end(&mut self) -> MfbParams {
        let [f, h, a] = self.floored([MOVE_FLOOR, MOVE_FLOOR, ABSORB_FLOOR]);
        MfbParams::left(f, h, a)
    }

    pub fn right_end(&mut self) -> MfbParams {
        let [b, h, a] = self.floored([MOVE_FLOOR, MOVE_FLOOR, ABSORB_FLOOR]);
        MfbParams::right(b, h, a)
    }

    pub fn interior_barrier(&mut self) -> MfbParams {
        let [f, b, h, a] = self.floored([MOVE_FLOOR, MOVE_FLOOR, MOVE_FLOOR, ABSORB_FLOOR]);
        MfbParams::interior(f, b, h, a)
    }

    pub fn finite(&mut self, n_lo: i64, n_hi: i64) -> FiniteWalkSpec {
        FiniteWalkSpec {
            n: self.int(n_lo, n_hi),
            interior: self.regime(),
            left: self.left_end(),
            right: self.right_end(),
        }
    }

    pub fn halfline(&mut self) -> HalfLineWalkSpec {
        HalfLineWalkSpec {
            interior: self.regime(),
            left: self.left_end(),
        }
    }

    pub fn fullline(&mut self) -> FullLineWalkSpec {
        FullLineWalkSpec {
            interior: self.regime(),
        }
    }

    pub fn modified_finite(&mut self, n_lo: i64, n_hi: i64) -> ModifiedFiniteSpec {
        let n = self.int(n_lo.max(3), n_hi);
        ModifiedFiniteSpec {
            n,
            m: self.int(1, n - 2),
            right_regime: self.regime(),
            left_regime: self.regime(),
            left: self.left_end(),
            barrier: self.interior_barrier(),
            right: self.right_end(),
        }
    }

    pub fn modified_halfline(&mut self, m_hi: i64) -> ModifiedHalfLineSpec {
        ModifiedHalfLineSpec {
            m: self.int(1, m_hi),
            right_regime: self.regime(),
            left_regime: self.regime(),
            left: self.left_end(),
            barrier: self.interior_barrier(),
        }
    }

    pub fn modified_fullline(&mut self) -> ModifiedFullLineSpec {
        ModifiedFullLineSpec {
            pos_regime: self.regime(),
            neg_regime: self.regime(),
            origin: self.interior_barrier(),
        }
    }

    /// `r = s = 0` on both sides with a common `p` bounded away from 1/2.
    pub fn asymmetric(&mut self, n_lo: i64, n_hi: i64) -> ModifiedFiniteSpec {
        let mut p = self.uniform(0.1, 0.9);
        if (p - 0.5).abs() < 0.03 {
            p += 0.06;
        }
        let regime = PqrsParams::new(p, 1.0 - p, 0.0, 0.0);
        self.with_regime(regime, n_lo, n_hi)
    }

    /// `p = q = 1/2`, `r = s = 0` on both sides.
    pub fn symmetric(&mut self, n_lo: i64, n_hi: i64) -> ModifiedFiniteSpec {
        self.with_regime(PqrsParams::new(0.5, 0.5, 0.0, 0.0), n_lo, n_hi)
    }

    fn with_regime(&mut self, regime: PqrsParams, n_lo: i64, n_hi: i64) -> ModifiedFiniteSpec {
        let n = self.int(n_lo.max(3), n_hi);
        ModifiedFiniteSpec {
            n,
            m: self.int(1, n - 2),
            right_regime: regime,
            left_regime: regime,
            left: self.left_end(),
            barrier: self.interior_barrier(),
            right: self.right_end(),
        }
    }

    /// Zero interior absorption, `p1 > q1`, and `p2 > q2` (`left_drifts_in`
    /// false) or `p2 < q2` (true).
    pub fn escape(&mut self, left_drifts_in: bool) -> ModifiedFullLineSpec {
        let pos = self.drifting(true);
        let neg = self.drifting(!left_drifts_in);
        ModifiedFullLineSpec {
            pos_regime: pos,
            neg_regime: neg,
            origin: self.interior_barrier(),
        }
    }

    fn drifting(&mut self, forward: bool) -> PqrsParams {
        let r = self.uniform(0.0, 0.4);
        let lead = self.uniform(0.55, 0.9);
        let (a, b) = ((1.0 - r) * lead, (1.0 - r) * (1.0 - lead));
        if forward {
            PqrsParams::new(a, b, r, 0.0)
        } else {
            PqrsParams::new(b, a, r, 0.0)
        }
    }
}

pub fn finite_suite(seed: u64, count: usize, n_lo: i64, n_hi: i64) -> Vec<FiniteWalkSpec> {
    let mut rng = SpecRng::new(seed);
    (0..count).map(|_| rng.finite(n_lo, n_hi)).collect()
}

pub fn halfline_suite(seed: u64, count: usize) -> Vec<HalfLineWalkSpec> {
    let mut rng = SpecRng::new(seed);
    (0..count).map(|_| rng.halfline()).collect()
}

pub fn fullline_suite(seed: u64, count: usize) -> Vec<FullLineWalkSpec> {
    let mut rng = SpecRng::new(seed);
    (0..count).map(|_| rng.fullline()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk_model::Validate;

    #[test]
    fn floors_hold_and_specs_validate() {
        let mut rng = SpecRng::new(3);
        for _ in 0..200 {
            let r = rng.regime();
            assert!(r.p >= MOVE_FLOOR && r.q >= MOVE_FLOOR && r.r >= MOVE_FLOOR);
            assert!(r.s >= ABSORB_FLOOR);
            assert!(rng.finite(3, 50).validate().is_ok());
            assert!(rng.modified_finite(4, 50).validate().is_ok());
            assert!(rng.modified_halfline(20).validate().is_ok());
            assert!(rng.modified_fullline().validate().is_ok());
            assert!(rng.asymmetric(4, 30).validate().is_ok());
            assert!(rng.escape(true).validate().is_ok());
        }
    }

    #[test]
    fn same_seed_same_suite() {
        assert_eq!(finite_suite(9, 20, 3, 50), finite_suite(9, 20, 3, 50));
        assert_ne!(finite_suite(9, 20, 3, 50), finite_suite(10, 20, 3, 50));
    }
}
