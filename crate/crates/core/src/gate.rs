//! Equivalence gate for the closed-form displays.
//!
//! Every reading of every display is compared against the boundary system
//! over a fixed seeded suite. A display is enabled as a fast path only when
//! some reading agrees on every spec; the first such reading is the one used.
//! The report keeps the per-spec deviation of every reading so that a
//! disabled display can be inspected.

use std::fmt::Write as _;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::displays::{
    self, AsymmetricReading, ModifiedFullLineIntermediates, FiniteReading, HalfLineTimeReading, FullLineTimeReading,
};
use crate::error::Result;
use crate::proof_system::{absorption_time_system, arrivals_system, ProofSystemSolution};
use crate::suite::SpecRng;
use crate::walk_model::{ModifiedFiniteSpec, ModifiedFullLineSpec, ModifiedHalfLineSpec};

pub const GATE_TOLERANCE: f64 = 1e-10;
pub const GATE_SEED: u64 = 20_240_611;
pub const GATE_SUITE_SIZE: usize = 200;
/// Largest `N` in the finite gate suite; the fast path is not used beyond it.
pub const GATE_MAX_N: i64 = 50;
/// Largest `M` in the half-line suite.
pub const GATE_MAX_M: i64 = 20;
/// Largest start (full line) and offset from the barrier compared.
pub const GATE_MAX_REACH: i64 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DisplayId {
    /// Finite interval occupancy with an interior barrier.
    FiniteBarrier,
    /// Its `r = s = 0`, `p ≠ q` special case.
    Asymmetric,
    /// Its simple symmetric special case.
    Symmetric,
    /// Half-line absorption time, `0 ≤ i ≤ M`.
    HalfLineTimeLeft,
    /// Half-line absorption time, `i ≥ M`.
    HalfLineTimeRight,
    /// Full-line occupancy, start `i0 > 0`.
    FullLineArrivals,
    /// Full-line occupancy, start at the origin.
    FullLineArrivalsOrigin,
    /// Full-line absorption time.
    FullLineTime,
}

impl DisplayId {
    pub const ALL: [Self; 8] = [
        Self::FiniteBarrier,
        Self::Asymmetric,
        Self::Symmetric,
        Self::HalfLineTimeLeft,
        Self::HalfLineTimeRight,
        Self::FullLineArrivals,
        Self::FullLineArrivalsOrigin,
        Self::FullLineTime,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::FiniteBarrier => "finite-barrier-arrivals",
            Self::Asymmetric => "finite-asymmetric-arrivals",
            Self::Symmetric => "finite-symmetric-arrivals",
            Self::HalfLineTimeLeft => "halfline-time-left",
            Self::HalfLineTimeRight => "halfline-time-right",
            Self::FullLineArrivals => "fullline-arrivals",
            Self::FullLineArrivalsOrigin => "fullline-arrivals-origin",
            Self::FullLineTime => "fullline-time",
        }
    }

    /// Reading names, literal reading first.
    pub fn readings(&self) -> Vec<String> {
        match self {
            Self::FiniteBarrier => FiniteReading::all().iter().map(|r| r.name()).collect(),
            Self::Asymmetric => AsymmetricReading::all().iter().map(|r| r.name().to_string()).collect(),
            Self::HalfLineTimeLeft => HalfLineTimeReading::all().iter().map(|r| r.name()).collect(),
            Self::FullLineTime => FullLineTimeReading::all().iter().map(|r| r.name().to_string()).collect(),
            _ => vec!["literal".to_string()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecDeviation {
    pub spec: usize,
    /// Start or evaluation range, for the log.
    pub case: String,
    /// Largest `|display − system| / max(1, |system|)`; infinite when the
    /// display could not be evaluated.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadingOutcome {
    pub reading: String,
    pub max_deviation: f64,
    pub failures: usize,
    pub per_spec: Vec<SpecDeviation>,
}

impl ReadingOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateOutcome {
    pub display: DisplayId,
    pub specs: usize,
    pub readings: Vec<ReadingOutcome>,
    /// Index into `readings` of the enabled reading.
    pub selected: Option<usize>,
}

impl GateOutcome {
    pub fn enabled(&self) -> bool {
        self.selected.is_some()
    }

    pub fn literal_passed(&self) -> bool {
        self.readings.first().is_some_and(|r| r.passed())
    }

    pub fn summary(&self) -> String {
        let status = match self.selected {
            Some(k) if k == 0 => "ENABLED (literal)".to_string(),
            Some(k) => format!("ENABLED (reading {})", self.readings[k].reading),
            None => "DISABLED".to_string(),
        };
        let best = self
            .readings
            .iter()
            .map(|r| r.max_deviation)
            .fold(f64::INFINITY, f64::min);
        format!(
            "{:<28} {status}; {} specs; best max deviation {best:.3e}",
            self.display.name(),
            self.specs
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub seed: u64,
    pub tolerance: f64,
    pub outcomes: Vec<GateOutcome>,
}

impl GateReport {
    pub fn outcome(&self, id: DisplayId) -> &GateOutcome {
        self.outcomes
            .iter()
            .find(|o| o.display == id)
            .expect("every display is gated")
    }

    /// Full per-spec log of every reading.
    pub fn log(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "gate seed {} tolerance {:e}", self.seed, self.tolerance);
        for o in &self.outcomes {
            let _ = writeln!(out, "{}", o.summary());
            for r in &o.readings {
                let _ = writeln!(
                    out,
                    "  reading {}: {} failing of {}, max deviation {:.3e}",
                    r.reading, r.failures, o.specs, r.max_deviation
                );
                for d in r.per_spec.iter().filter(|d| !(d.deviation <= self.tolerance)) {
                    let _ = writeln!(out, "    spec {:>3} {:<18} deviation {:.3e}", d.spec, d.case, d.deviation);
                }
            }
        }
        out
    }
}

fn deviation(display: &[f64], system: &[f64]) -> f64 {
    display
        .iter()
        .zip(system)
        .map(|(d, s)| {
            let e = (d - s).abs() / s.abs().max(1.0);
            if e.is_nan() {
                f64::INFINITY
            } else {
                e
            }
        })
        .fold(0.0, f64::max)
}

/// Collects one deviation per (reading, spec).
struct Collector {
    per_reading: Vec<Vec<SpecDeviation>>,
}

impl Collector {
    fn new(readings: usize) -> Self {
        Self {
            per_reading: vec![Vec::new(); readings],
        }
    }

    fn record(&mut self, reading: usize, spec: usize, case: String, display: Result<Vec<f64>>, system: &[f64]) {
        let dev = match display {
            Ok(v) => deviation(&v, system),
            Err(_) => f64::INFINITY,
        };
        self.per_reading[reading].push(SpecDeviation {
            spec,
            case,
            deviation: dev,
        });
    }

    fn finish(self, display: DisplayId, specs: usize) -> GateOutcome {
        let names = display.readings();
        let readings: Vec<ReadingOutcome> = self
            .per_reading
            .into_iter()
            .zip(names)
            .map(|(per_spec, reading)| ReadingOutcome {
                reading,
                max_deviation: per_spec.iter().map(|d| d.deviation).fold(0.0, f64::max),
                failures: per_spec.iter().filter(|d| !(d.deviation <= GATE_TOLERANCE)).count(),
                per_spec,
            })
            .collect();
        let selected = readings.iter().position(|r| r.passed());
        GateOutcome {
            display,
            specs,
            readings,
            selected,
        }
    }
}

fn system_profile(sol: &ProofSystemSolution, lo: i64, hi: i64) -> Vec<f64> {
    (lo..=hi).map(|n| sol.value_at(n)).collect()
}

fn finite_case(rng: &mut SpecRng, spec: ModifiedFiniteSpec) -> Option<(ModifiedFiniteSpec, i64, Vec<f64>)> {
    let i0 = rng.int(spec.m + 1, spec.n - 1);
    let sol = arrivals_system(&spec, i0).ok()?;
    Some((spec, i0, system_profile(&sol, 0, spec.n)))
}

fn gate_finite(seed: u64, count: usize) -> GateOutcome {
    let mut rng = SpecRng::new(seed);
    let readings = FiniteReading::all();
    let mut c = Collector::new(readings.len());
    for k in 0..count {
        let spec = rng.modified_finite(4, GATE_MAX_N);
        let Some((spec, i0, sys)) = finite_case(&mut rng, spec) else { continue };
        for (j, r) in readings.iter().enumerate() {
            c.record(j, k, format!("i0={i0}"), displays::finite_display(&spec, i0, *r), &sys);
        }
    }
    c.finish(DisplayId::FiniteBarrier, count)
}

fn gate_asymmetric(seed: u64, count: usize) -> GateOutcome {
    let mut rng = SpecRng::new(seed ^ 1);
    let readings = AsymmetricReading::all();
    let mut c = Collector::new(readings.len());
    for k in 0..count {
        let spec = rng.asymmetric(4, GATE_MAX_N);
        let Some((spec, i0, sys)) = finite_case(&mut rng, spec) else { continue };
        for (j, r) in readings.iter().enumerate() {
            c.record(j, k, format!("i0={i0}"), displays::asymmetric_profile(&spec, i0, *r), &sys);
        }
    }
    c.finish(DisplayId::Asymmetric, count)
}

fn gate_symmetric(seed: u64, count: usize) -> GateOutcome {
    let mut rng = SpecRng::new(seed ^ 2);
    let mut c = Collector::new(1);
    for k in 0..count {
        let spec = rng.symmetric(4, GATE_MAX_N);
        let Some((spec, i0, sys)) = finite_case(&mut rng, spec) else { continue };
        c.record(0, k, format!("i0={i0}"), displays::symmetric_profile(&spec, i0), &sys);
    }
    c.finish(DisplayId::Symmetric, count)
}

fn halfline_cases(seed: u64, count: usize) -> Vec<(ModifiedHalfLineSpec, ProofSystemSolution)> {
    let mut rng = SpecRng::new(seed ^ 3);
    (0..count)
        .filter_map(|_| {
            let spec = rng.modified_halfline(GATE_MAX_M);
            absorption_time_system(&spec).ok().map(|sol| (spec, sol))
        })
        .collect()
}

fn gate_halfline_left(seed: u64, count: usize) -> GateOutcome {
    let readings = HalfLineTimeReading::all();
    let mut c = Collector::new(readings.len());
    for (k, (spec, sol)) in halfline_cases(seed, count).iter().enumerate() {
        let sys = system_profile(sol, 0, spec.m);
        for (j, r) in readings.iter().enumerate() {
            let disp = (0..=spec.m).map(|i| displays::halfline_time_left(spec, i, *r)).collect();
            c.record(j, k, format!("0..={}", spec.m), disp, &sys);
        }
    }
    c.finish(DisplayId::HalfLineTimeLeft, count)
}

fn gate_halfline_right(seed: u64, count: usize) -> GateOutcome {
    let mut c = Collector::new(1);
    for (k, (spec, sol)) in halfline_cases(seed, count).iter().enumerate() {
        let hi = spec.m + GATE_MAX_REACH;
        let sys = system_profile(sol, spec.m, hi);
        let mm = sol.value_at(spec.m);
        let disp = (spec.m..=hi).map(|i| displays::halfline_time_right(spec, i, mm)).collect();
        c.record(0, k, format!("{}..={hi}", spec.m), disp, &sys);
    }
    c.finish(DisplayId::HalfLineTimeRight, count)
}

fn fullline_specs(seed: u64, count: usize) -> Vec<ModifiedFullLineSpec> {
    let mut rng = SpecRng::new(seed ^ 4);
    (0..count).map(|_| rng.modified_fullline()).collect()
}

fn gate_fullline_arrivals(seed: u64, count: usize, origin: bool) -> GateOutcome {
    let mut rng = SpecRng::new(seed ^ 5);
    let mut c = Collector::new(1);
    for (k, spec) in fullline_specs(seed, count).iter().enumerate() {
        let i0 = if origin { 0 } else { rng.int(1, GATE_MAX_REACH) };
        let (lo, hi) = (-GATE_MAX_REACH, i0 + GATE_MAX_REACH);
        let Ok(sol) = arrivals_system(spec, i0) else { continue };
        let sys = system_profile(&sol, lo, hi);
        let disp = ModifiedFullLineIntermediates::new(spec).map(|it| {
            (lo..=hi)
                .map(|n| {
                    if origin {
                        displays::fullline_origin_display_at(spec, &it, n)
                    } else {
                        displays::fullline_display_at(spec, &it, i0, n)
                    }
                })
                .collect()
        });
        c.record(0, k, format!("i0={i0}"), disp, &sys);
    }
    let id = if origin {
        DisplayId::FullLineArrivalsOrigin
    } else {
        DisplayId::FullLineArrivals
    };
    c.finish(id, count)
}

fn gate_fullline_time(seed: u64, count: usize) -> GateOutcome {
    let readings = FullLineTimeReading::all();
    let mut c = Collector::new(readings.len());
    for (k, spec) in fullline_specs(seed, count).iter().enumerate() {
        let Ok(sol) = absorption_time_system(spec) else { continue };
        let (lo, hi) = (-GATE_MAX_REACH, GATE_MAX_REACH);
        let sys = system_profile(&sol, lo, hi);
        for (j, r) in readings.iter().enumerate() {
            let disp = (lo..=hi).map(|i| displays::fullline_time_display(spec, i, *r)).collect();
            c.record(j, k, format!("{lo}..={hi}"), disp, &sys);
        }
    }
    c.finish(DisplayId::FullLineTime, count)
}

/// Run every gate over `count` specs drawn from `seed`.
pub fn run_gates(seed: u64, count: usize) -> GateReport {
    GateReport {
        seed,
        tolerance: GATE_TOLERANCE,
        outcomes: vec![
            gate_finite(seed, count),
            gate_asymmetric(seed, count),
            gate_symmetric(seed, count),
            gate_halfline_left(seed, count),
            gate_halfline_right(seed, count),
            gate_fullline_arrivals(seed, count, false),
            gate_fullline_arrivals(seed, count, true),
            gate_fullline_time(seed, count),
        ],
    }
}

/// The process-wide gate, computed once on first use.
pub fn report() -> &'static GateReport {
    static REPORT: OnceLock<GateReport> = OnceLock::new();
    REPORT.get_or_init(|| run_gates(GATE_SEED, GATE_SUITE_SIZE))
}

/// Index of the enabled reading of `id`, if any.
pub fn selected(id: DisplayId) -> Option<usize> {
    report().outcome(id).selected
}
