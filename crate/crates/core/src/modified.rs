//! Walks with an interior multiple function barrier.
//!
//! The boundary systems of [`crate::proof_system`] are the primary route.
//! A closed-form display is used instead only when [`crate::gate`] enabled
//! it and the request lies inside the gated envelope.

use serde::{Deserialize, Serialize};

use crate::displays::{
    self, AsymmetricReading, EscapeProbabilities, ModifiedFullLineIntermediates, FiniteReading, HalfLineTimeReading,
    FullLineTimeReading,
};
use crate::error::{Error, Result};
use crate::gate::{self, DisplayId, GATE_MAX_M, GATE_MAX_N, GATE_MAX_REACH};
use crate::homogeneous::{AbsorptionSummary, ArrivalProfile, Occupancy, Provenance};
use crate::proof_system::{absorption_time_system, arrivals_system, ProofSystemSolution};
use crate::walk_model::{
    mirror_full_line, reflect_translate, Domain, Lattice, ModifiedFiniteSpec, ModifiedFullLineSpec,
    ModifiedHalfLineSpec, PqrsParams, Validate,
};

/// Which computation answers a request.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// Gated display when enabled and applicable, else the system.
    #[default]
    Auto,
    System,
    /// The display even if the gate disabled it (selected reading, or the
    /// literal one). Errors when the display does not cover the request.
    Display,
}

/// Reading index to use for `id` under `route`, or `None` for the system.
fn display_choice(id: DisplayId, route: Route, in_envelope: bool) -> Option<usize> {
    match route {
        Route::System => None,
        Route::Auto if in_envelope => gate::selected(id),
        Route::Auto => None,
        Route::Display => Some(gate::selected(id).unwrap_or(0)),
    }
}

fn not_covered(what: &str) -> Error {
    Error::UnsupportedCase(format!("no display covers {what}"))
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn finite_profile(i0: i64, values: Vec<f64>, provenance: Provenance) -> ArrivalProfile {
    ArrivalProfile {
        domain: Domain::Finite,
        start: i0,
        first: 0,
        values,
        provenance,
    }
}

fn check_finite_start(spec: &ModifiedFiniteSpec, i0: i64) -> Result<()> {
    spec.ensure_valid()?;
    if !(0..=spec.n).contains(&i0) {
        return Err(Error::Precondition(format!("start {i0} outside [0, {}]", spec.n)));
    }
    Ok(())
}

/// Apply `f` to the mirrored walk when `0 < i0 < M` and map the profile back.
fn with_reflection(
    spec: &ModifiedFiniteSpec,
    i0: i64,
    f: impl FnOnce(&ModifiedFiniteSpec, i64) -> Result<ArrivalProfile>,
) -> Result<ArrivalProfile> {
    if 0 < i0 && i0 < spec.m {
        let r = reflect_translate(spec, i0)?;
        let mut prof = f(&r.spec, r.start)?;
        prof.values.reverse();
        prof.start = i0;
        Ok(prof)
    } else {
        f(spec, i0)
    }
}

/// Boundary system for occupancy from `i0`, without reflection.
pub fn mfinite_system(spec: &ModifiedFiniteSpec, i0: i64) -> Result<ProofSystemSolution> {
    check_finite_start(spec, i0)?;
    arrivals_system(spec, i0)
}

fn system_profile(spec: &ModifiedFiniteSpec, i0: i64) -> Result<ArrivalProfile> {
    let sol = arrivals_system(spec, i0)?;
    Ok(finite_profile(i0, (0..=spec.n).map(|n| sol.value_at(n)).collect(), Provenance::ProofSystem))
}

/// Expected occupancy on `[0, N]` from `i0`.
pub fn mfinite_arrivals(spec: &ModifiedFiniteSpec, i0: i64) -> Result<ArrivalProfile> {
    mfinite_arrivals_via(spec, i0, Route::Auto)
}

pub fn mfinite_arrivals_via(spec: &ModifiedFiniteSpec, i0: i64, route: Route) -> Result<ArrivalProfile> {
    check_finite_start(spec, i0)?;
    with_reflection(spec, i0, |s, i| {
        let covered = s.m < i && i < s.n;
        let choice = display_choice(DisplayId::FiniteBarrier, route, covered && s.n <= GATE_MAX_N);
        if let Some(k) = choice {
            if !covered {
                return Err(not_covered("a start at a barrier"));
            }
            match displays::finite_display(s, i, FiniteReading::all()[k]) {
                Ok(v) if all_finite(&v) => return Ok(finite_profile(i, v, Provenance::ClosedForm)),
                Ok(_) if route == Route::Display => {
                    return Err(Error::Inconsistent("display overflowed".into()))
                }
                Err(e) if route == Route::Display => return Err(e),
                _ => {}
            }
        }
        system_profile(s, i)
    })
}

fn same_regime(a: &PqrsParams, b: &PqrsParams) -> bool {
    (a.p - b.p).abs() <= 1e-12 && (a.q - b.q).abs() <= 1e-12 && (a.r - b.r).abs() <= 1e-12 && (a.s - b.s).abs() <= 1e-12
}

/// Occupancy when both regimes are the same `(p, q, 0, 0)` with `p ≠ q`.
pub fn mfinite_asymmetric(spec: &ModifiedFiniteSpec, i0: i64) -> Result<ArrivalProfile> {
    check_finite_start(spec, i0)?;
    let reg = spec.right_regime;
    if !same_regime(&reg, &spec.left_regime) || reg.r != 0.0 || reg.s != 0.0 {
        return Err(Error::Precondition(
            "both regimes must be the same (p, q, 0, 0)".into(),
        ));
    }
    if (reg.p - reg.q).abs() <= 1e-12 {
        return Err(Error::Precondition("p = q: use mfinite_symmetric".into()));
    }
    with_reflection(spec, i0, |s, i| {
        let covered = s.m < i && i < s.n && s.n <= GATE_MAX_N;
        if let Some(k) = display_choice(DisplayId::Asymmetric, Route::Auto, covered) {
            if let Ok(v) = displays::asymmetric_profile(s, i, AsymmetricReading::all()[k]) {
                if all_finite(&v) {
                    return Ok(finite_profile(i, v, Provenance::ClosedForm));
                }
            }
        }
        system_profile(s, i)
    })
}

/// Occupancy when both regimes are `(1/2, 1/2, 0, 0)`.
pub fn mfinite_symmetric(spec: &ModifiedFiniteSpec, i0: i64) -> Result<ArrivalProfile> {
    check_finite_start(spec, i0)?;
    let half = PqrsParams::new(0.5, 0.5, 0.0, 0.0);
    if !same_regime(&spec.right_regime, &half) || !same_regime(&spec.left_regime, &half) {
        return Err(Error::Precondition("both regimes must be (1/2, 1/2, 0, 0)".into()));
    }
    with_reflection(spec, i0, |s, i| {
        let covered = s.m < i && s.left.absorb > 0.0 && s.right.absorb > 0.0 && s.n <= GATE_MAX_N;
        if display_choice(DisplayId::Symmetric, Route::Auto, covered).is_some() {
            if let Ok(v) = displays::symmetric_profile(s, i) {
                if all_finite(&v) {
                    return Ok(finite_profile(i, v, Provenance::ClosedForm));
                }
            }
        }
        system_profile(s, i)
    })
}

/// Absorption site probabilities and mean time from `i0`.
pub fn mfinite_absorption(spec: &ModifiedFiniteSpec, i0: i64) -> Result<AbsorptionSummary> {
    let prof = mfinite_arrivals(spec, i0)?;
    let probabilities = prof.iter().map(|(n, x)| spec.site(n).absorb * x).collect();
    let times = absorption_time_system(spec)?;
    Ok(AbsorptionSummary {
        start: i0,
        first: 0,
        probabilities,
        mean_time: times.value_at(i0),
        defective_times: None,
        provenance: prof.provenance,
    })
}

/// Mean absorption time for every start.
pub fn mfinite_absorption_times(spec: &ModifiedFiniteSpec) -> Result<ProofSystemSolution> {
    spec.ensure_valid()?;
    absorption_time_system(spec)
}

/// Expected occupancy on `[0, ∞)` from `i0 ≥ 0`.
pub fn mhalfline_arrivals(spec: &ModifiedHalfLineSpec, i0: i64) -> Result<ProofSystemSolution> {
    spec.ensure_valid()?;
    if i0 < 0 {
        return Err(Error::Precondition(format!("start {i0} is negative")));
    }
    arrivals_system(spec, i0)
}

/// Mean absorption time for every start, from the boundary system.
pub fn mhalfline_absorption_times(spec: &ModifiedHalfLineSpec) -> Result<ProofSystemSolution> {
    spec.ensure_valid()?;
    absorption_time_system(spec)
}

pub fn mhalfline_absorption_time(spec: &ModifiedHalfLineSpec, i: i64) -> Result<f64> {
    mhalfline_absorption_time_via(spec, i, Route::Auto)
}

pub fn mhalfline_absorption_time_via(spec: &ModifiedHalfLineSpec, i: i64, route: Route) -> Result<f64> {
    Ok(mhalfline_absorption_time_traced(spec, i, route)?.0)
}

/// As [`mhalfline_absorption_time_via`], also reporting which computation
/// produced the value.
pub fn mhalfline_absorption_time_traced(spec: &ModifiedHalfLineSpec, i: i64, route: Route) -> Result<(f64, Provenance)> {
    let sol = mhalfline_absorption_times(spec)?;
    if i < 0 {
        return Err(Error::Precondition(format!("start {i} is negative")));
    }
    let in_m = spec.m <= GATE_MAX_M;
    if i >= spec.m {
        if display_choice(DisplayId::HalfLineTimeRight, route, in_m).is_some() {
            let v = displays::halfline_time_right(spec, i, sol.value_at(spec.m))?;
            if v.is_finite() {
                return Ok((v, Provenance::ClosedForm));
            }
        }
    } else if let Some(k) = display_choice(DisplayId::HalfLineTimeLeft, route, in_m) {
        let v = displays::halfline_time_left(spec, i, HalfLineTimeReading::all()[k])?;
        if v.is_finite() || route == Route::Display {
            return Ok((v, Provenance::ClosedForm));
        }
    }
    Ok((sol.value_at(i), Provenance::ProofSystem))
}

/// Occupancy of the line with a barrier at the origin.
#[derive(Debug, Clone)]
pub struct ModifiedFullLineArrivals {
    start: i64,
    /// The computation runs on the mirrored walk for negative starts.
    mirrored: bool,
    solution: ProofSystemSolution,
    display: Option<FullLineDisplay>,
}

#[derive(Debug, Clone)]
struct FullLineDisplay {
    spec: ModifiedFullLineSpec,
    start: i64,
    it: ModifiedFullLineIntermediates,
}

impl FullLineDisplay {
    fn at(&self, n: i64) -> f64 {
        if self.start == 0 {
            displays::fullline_origin_display_at(&self.spec, &self.it, n)
        } else {
            displays::fullline_display_at(&self.spec, &self.it, self.start, n)
        }
    }
}

impl ModifiedFullLineArrivals {
    pub fn solution(&self) -> &ProofSystemSolution {
        &self.solution
    }

    pub fn uses_display(&self) -> bool {
        self.display.is_some()
    }
}

impl Occupancy for ModifiedFullLineArrivals {
    fn domain(&self) -> Domain {
        Domain::FullLine
    }
    fn start(&self) -> i64 {
        self.start
    }
    fn provenance(&self) -> Provenance {
        if self.display.is_some() {
            Provenance::ClosedForm
        } else {
            Provenance::ProofSystem
        }
    }
    fn at(&self, n: i64) -> f64 {
        let m = if self.mirrored { -n } else { n };
        match &self.display {
            Some(d) => {
                let v = d.at(m);
                if v.is_finite() {
                    v
                } else {
                    self.solution.value_at(m)
                }
            }
            None => self.solution.value_at(m),
        }
    }
}

fn check_fullline(spec: &ModifiedFullLineSpec) -> Result<()> {
    spec.ensure_valid()?;
    if spec.pos_regime.s == 0.0 || spec.neg_regime.s == 0.0 {
        return Err(Error::Precondition(
            "needs s > 0 in both regimes; use mfullline_escape when both are 0".into(),
        ));
    }
    Ok(())
}

pub fn mfullline_arrivals(spec: &ModifiedFullLineSpec, i0: i64) -> Result<ModifiedFullLineArrivals> {
    mfullline_arrivals_via(spec, i0, Route::Auto)
}

pub fn mfullline_arrivals_via(spec: &ModifiedFullLineSpec, i0: i64, route: Route) -> Result<ModifiedFullLineArrivals> {
    check_fullline(spec)?;
    let (work, start, mirrored) = if i0 < 0 {
        (mirror_full_line(spec), -i0, true)
    } else {
        (*spec, i0, false)
    };
    let solution = arrivals_system(&work, start)?;
    let id = if start == 0 {
        DisplayId::FullLineArrivalsOrigin
    } else {
        DisplayId::FullLineArrivals
    };
    let display = match display_choice(id, route, start <= GATE_MAX_REACH) {
        Some(_) => match ModifiedFullLineIntermediates::new(&work) {
            Ok(it) => Some(FullLineDisplay { spec: work, start, it }),
            Err(e) if route == Route::Display => return Err(e),
            Err(_) => None,
        },
        None => None,
    };
    Ok(ModifiedFullLineArrivals {
        start: i0,
        mirrored,
        solution,
        display,
    })
}

/// Absorption at the origin versus escape to `±∞` when `s1 = s2 = 0`.
pub fn mfullline_escape(spec: &ModifiedFullLineSpec, i0: i64) -> Result<EscapeProbabilities> {
    spec.ensure_valid()?;
    if spec.pos_regime.s != 0.0 || spec.neg_regime.s != 0.0 {
        return Err(Error::Precondition("escape needs s = 0 in both regimes".into()));
    }
    if !(spec.origin.absorb > 0.0) {
        return Err(Error::Precondition("escape needs an absorbing origin".into()));
    }
    displays::escape_probabilities(spec, i0)
}

pub fn mfullline_absorption_times(spec: &ModifiedFullLineSpec) -> Result<ProofSystemSolution> {
    check_fullline(spec)?;
    absorption_time_system(spec)
}

pub fn mfullline_absorption_time(spec: &ModifiedFullLineSpec, i: i64) -> Result<f64> {
    mfullline_absorption_time_via(spec, i, Route::Auto)
}

pub fn mfullline_absorption_time_via(spec: &ModifiedFullLineSpec, i: i64, route: Route) -> Result<f64> {
    Ok(mfullline_absorption_time_traced(spec, i, route)?.0)
}

pub fn mfullline_absorption_time_traced(spec: &ModifiedFullLineSpec, i: i64, route: Route) -> Result<(f64, Provenance)> {
    let sol = mfullline_absorption_times(spec)?;
    if let Some(k) = display_choice(DisplayId::FullLineTime, route, i.abs() <= GATE_MAX_REACH) {
        let v = displays::fullline_time_display(spec, i, FullLineTimeReading::all()[k])?;
        if v.is_finite() || route == Route::Display {
            return Ok((v, Provenance::ClosedForm));
        }
    }
    Ok((sol.value_at(i), Provenance::ProofSystem))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk_model::MfbParams;

    fn example() -> ModifiedFiniteSpec {
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

    #[test]
    fn reflection_agrees_with_direct_system() {
        let spec = example();
        for i0 in 1..3 {
            let a = mfinite_arrivals_via(&spec, i0, Route::System).unwrap();
            let b = arrivals_system(&spec, i0).unwrap();
            for (n, x) in a.iter() {
                assert!((x - b.value_at(n)).abs() < 1e-12, "i0={i0} n={n}");
            }
        }
    }

    #[test]
    fn routes_agree_on_example() {
        let spec = example();
        let sys = mfinite_arrivals_via(&spec, 5, Route::System).unwrap();
        let auto = mfinite_arrivals(&spec, 5).unwrap();
        for (n, x) in sys.iter() {
            assert!((x - auto.get(n).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn start_outside_is_rejected() {
        assert!(matches!(mfinite_arrivals(&example(), 9), Err(Error::Precondition(_))));
    }

    #[test]
    fn display_route_rejects_barrier_start() {
        assert!(matches!(
            mfinite_arrivals_via(&example(), 3, Route::Display),
            Err(Error::UnsupportedCase(_))
        ));
    }
}
