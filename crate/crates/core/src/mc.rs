//! Deterministic Monte Carlo simulation of any walk.
//!
//! Stream derivation: replica `k` of a run with seed `S` draws from
//! `ChaCha8Rng::seed_from_u64(S)` switched to stream `k`
//! (`set_stream(k)`), starting at word 0. Each step consumes one `u32`,
//! compared against cumulative thresholds `round(c · 2^32)` in the order
//! forward, backward, hold; anything above is absorption. Replicas are
//! grouped in fixed chunks of [`CHUNK`] and every accumulator is an integer,
//! so the estimates do not depend on the number of workers.

use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::walk_model::{Lattice, Site, Validate, WalkSpec};

pub const CHUNK: u64 = 4096;
/// First escape threshold, in states beyond the start.
pub const ESCAPE_START: i64 = 1000;
pub const ESCAPE_MAX_DOUBLINGS: u32 = 8;

/// How to classify walks that may never be absorbed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EscapePolicy {
    /// Run every replica until absorption.
    None,
    /// Count a replica as escaped once it is more than `H` states from the
    /// start, doubling `H` from `initial` until the classification is stable.
    Threshold { initial: i64, max_doublings: u32 },
}

impl EscapePolicy {
    pub fn standard() -> Self {
        Self::Threshold {
            initial: ESCAPE_START,
            max_doublings: ESCAPE_MAX_DOUBLINGS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub replicas: u64,
    pub seed: u64,
    pub workers: usize,
    pub escape: EscapePolicy,
    /// States whose visit counts are estimated.
    pub visit_window: Option<(i64, i64)>,
    /// Step budget per replica; exceeding it is an error.
    pub max_steps: u64,
}

impl McConfig {
    pub fn new(replicas: u64, seed: u64) -> Self {
        Self {
            replicas,
            seed,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            escape: EscapePolicy::None,
            visit_window: None,
            max_steps: 1 << 32,
        }
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn escape(mut self, escape: EscapePolicy) -> Self {
        self.escape = escape;
        self
    }

    pub fn visit_window(mut self, lo: i64, hi: i64) -> Self {
        self.visit_window = Some((lo, hi));
        self
    }
}

/// Sample mean with standard error `stdev / √replicas`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub replicas: u64,
    pub seed: u64,
}

impl McEstimate {
    fn from_sums(sum: u128, sum_sq: u128, replicas: u64, seed: u64) -> Self {
        let n = replicas as f64;
        let mean = sum as f64 / n;
        let var = if replicas > 1 {
            ((sum_sq as f64 - sum as f64 * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        Self {
            mean,
            std_error: (var / n).sqrt(),
            replicas,
            seed,
        }
    }

    /// `|mean − value|` in standard errors.
    pub fn z_score(&self, value: f64) -> f64 {
        let d = (self.mean - value).abs();
        if self.std_error > 0.0 {
            d / self.std_error
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateEstimate {
    pub state: i64,
    pub estimate: McEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapeEstimate {
    /// Threshold at which the classification was reported.
    pub threshold: i64,
    pub absorbed: McEstimate,
    pub plus: McEstimate,
    pub minus: McEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub start: i64,
    pub replicas: u64,
    pub seed: u64,
    /// Frequency of absorption at each state where it happened.
    pub absorption: Vec<StateEstimate>,
    /// Mean number of transitions before absorption; absent under an
    /// escape policy.
    pub mean_time: Option<McEstimate>,
    pub visits: Vec<StateEstimate>,
    pub escape: Option<EscapeEstimate>,
}

impl McReport {
    pub fn absorption_at(&self, state: i64) -> Option<McEstimate> {
        self.absorption.iter().find(|e| e.state == state).map(|e| e.estimate)
    }

    pub fn visits_at(&self, state: i64) -> Option<McEstimate> {
        self.visits.iter().find(|e| e.state == state).map(|e| e.estimate)
    }
}

#[derive(Debug, Clone, Copy)]
struct Cutoffs {
    fwd: u64,
    bwd: u64,
    hold: u64,
}

impl Cutoffs {
    fn new(site: Site) -> Self {
        let scale = (1u64 << 32) as f64;
        let c = |x: f64| (x * scale).round().clamp(0.0, scale) as u64;
        Self {
            fwd: c(site.fwd),
            bwd: c(site.fwd + site.bwd),
            hold: c(site.fwd + site.bwd + site.hold),
        }
    }
}

/// Per-state cutoffs: explicit on `[0, last]`, one regime on each side.
struct StepTable {
    below: Cutoffs,
    explicit: Vec<Cutoffs>,
    above: Cutoffs,
}

impl StepTable {
    fn new(spec: &WalkSpec) -> Self {
        let last = match spec {
            WalkSpec::Finite(s) => s.n,
            WalkSpec::ModifiedFinite(s) => s.n,
            WalkSpec::ModifiedHalfLine(s) => s.m,
            _ => 0,
        };
        Self {
            below: Cutoffs::new(spec.site(-1)),
            explicit: (0..=last).map(|n| Cutoffs::new(spec.site(n))).collect(),
            above: Cutoffs::new(spec.site(last + 1)),
        }
    }

    #[inline]
    fn at(&self, x: i64) -> &Cutoffs {
        if x < 0 {
            &self.below
        } else {
            self.explicit.get(x as usize).unwrap_or(&self.above)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Absorbed { state: i64, steps: u64 },
    /// Left the outer escape band; `plus` for the upper side.
    Escaped { plus: bool },
}

struct Walker<'a> {
    table: &'a StepTable,
    start: i64,
    max_steps: u64,
}

impl Walker<'_> {
    /// One replica, with the side on which the inner band was first left.
    /// `band` is the `(inner, outer)` pair of escape thresholds.
    fn run(&self, rng: &mut ChaCha8Rng, band: Option<(i64, i64)>, visits: Option<(&mut [u32], i64)>) -> Result<(Outcome, Option<bool>)> {
        let mut x = self.start;
        let mut steps = 0u64;
        // Side on which the inner band was first left.
        let mut inner_exit: Option<bool> = None;
        let mut visits = visits;
        loop {
            if let Some((counts, lo)) = visits.as_mut() {
                let k = x - *lo;
                if k >= 0 && (k as usize) < counts.len() {
                    counts[k as usize] += 1;
                }
            }
            let c = self.table.at(x);
            let u = rng.next_u32() as u64;
            if u < c.fwd {
                x += 1;
            } else if u < c.bwd {
                x -= 1;
            } else if u >= c.hold {
                return Ok((Outcome::Absorbed { state: x, steps }, inner_exit));
            }
            steps += 1;
            if let Some((inner, outer)) = band {
                let d = x - self.start;
                if inner_exit.is_none() && d.abs() > inner {
                    inner_exit = Some(d > 0);
                }
                if d.abs() > outer {
                    return Ok((Outcome::Escaped { plus: d > 0 }, inner_exit));
                }
            }
            if steps > self.max_steps {
                return Err(Error::NonTerminating);
            }
        }
    }
}

/// Integer accumulators of one chunk.
#[derive(Debug, Clone, Default)]
struct Tally {
    absorbed_at: BTreeMap<i64, u64>,
    time_sum: u128,
    time_sq: u128,
    visit_sum: Vec<u128>,
    visit_sq: Vec<u128>,
    /// `[absorbed, plus, minus]` at the inner and outer thresholds.
    inner: [u64; 3],
    outer: [u64; 3],
}

impl Tally {
    fn merge(&mut self, other: Tally) {
        for (k, v) in other.absorbed_at {
            *self.absorbed_at.entry(k).or_default() += v;
        }
        self.time_sum += other.time_sum;
        self.time_sq += other.time_sq;
        if self.visit_sum.len() < other.visit_sum.len() {
            self.visit_sum.resize(other.visit_sum.len(), 0);
            self.visit_sq.resize(other.visit_sq.len(), 0);
        }
        for (k, (a, b)) in other.visit_sum.iter().zip(&other.visit_sq).enumerate() {
            self.visit_sum[k] += a;
            self.visit_sq[k] += b;
        }
        for k in 0..3 {
            self.inner[k] += other.inner[k];
            self.outer[k] += other.outer[k];
        }
    }
}

fn class_index(outcome: Outcome) -> usize {
    match outcome {
        Outcome::Absorbed { .. } => 0,
        Outcome::Escaped { plus: true } => 1,
        Outcome::Escaped { plus: false } => 2,
    }
}

struct Pass<'a> {
    walker: Walker<'a>,
    config: &'a McConfig,
    band: Option<(i64, i64)>,
}

impl Pass<'_> {
    fn chunk(&self, index: u64) -> Result<Tally> {
        let first = index * CHUNK;
        let last = (first + CHUNK).min(self.config.replicas);
        let base = ChaCha8Rng::seed_from_u64(self.config.seed);
        let mut tally = Tally::default();
        let mut counts = match self.config.visit_window {
            Some((lo, hi)) if self.band.is_none() => vec![0u32; (hi - lo + 1).max(0) as usize],
            _ => Vec::new(),
        };
        tally.visit_sum = vec![0; counts.len()];
        tally.visit_sq = vec![0; counts.len()];
        let lo = self.config.visit_window.map_or(0, |w| w.0);
        for replica in first..last {
            let mut rng = base.clone();
            rng.set_stream(replica);
            rng.set_word_pos(0);
            counts.iter_mut().for_each(|c| *c = 0);
            let vis = if counts.is_empty() {
                None
            } else {
                Some((counts.as_mut_slice(), lo))
            };
            let (outcome, inner_exit) = self.walker.run(&mut rng, self.band, vis)?;
            if let Outcome::Absorbed { state, steps } = outcome {
                *tally.absorbed_at.entry(state).or_default() += 1;
                tally.time_sum += steps as u128;
                tally.time_sq += (steps as u128) * (steps as u128);
            }
            if self.band.is_some() {
                let inner_class = match inner_exit {
                    Some(true) => 1,
                    Some(false) => 2,
                    None => 0,
                };
                tally.inner[inner_class] += 1;
                tally.outer[class_index(outcome)] += 1;
            }
            for (k, &c) in counts.iter().enumerate() {
                tally.visit_sum[k] += c as u128;
                tally.visit_sq[k] += (c as u128) * (c as u128);
            }
        }
        Ok(tally)
    }

    fn run(&self, pool: &rayon::ThreadPool) -> Result<Tally> {
        let chunks = self.config.replicas.div_ceil(CHUNK);
        let parts: Vec<Result<Tally>> = pool.install(|| (0..chunks).into_par_iter().map(|c| self.chunk(c)).collect());
        let mut total = Tally::default();
        for p in parts {
            total.merge(p?);
        }
        Ok(total)
    }
}

fn needs_escape(spec: &WalkSpec) -> bool {
    matches!(spec, WalkSpec::ModifiedFullLine(s) if s.pos_regime.s == 0.0 && s.neg_regime.s == 0.0)
}

/// Simulate `config.replicas` walks from `i0`.
pub fn mc_run(spec: &WalkSpec, i0: i64, config: &McConfig) -> Result<McReport> {
    spec.ensure_valid()?;
    if config.replicas == 0 {
        return Err(Error::Precondition("replicas must be ≥ 1".into()));
    }
    if !spec.contains(i0) {
        return Err(Error::Precondition(format!("start {i0} outside the domain")));
    }
    if needs_escape(spec) && config.escape == EscapePolicy::None {
        return Err(Error::NonTerminating);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| Error::Inconsistent(format!("thread pool: {e}")))?;
    let table = StepTable::new(spec);
    let walker = || Walker {
        table: &table,
        start: i0,
        max_steps: config.max_steps,
    };
    let (r, seed) = (config.replicas, config.seed);
    let est = |count: u64| McEstimate::from_sums(count as u128, count as u128, r, seed);

    let (tally, escape) = match config.escape {
        EscapePolicy::None => {
            let pass = Pass {
                walker: walker(),
                config,
                band: None,
            };
            (pass.run(&pool)?, None)
        }
        EscapePolicy::Threshold { initial, max_doublings } => {
            let mut h = initial.max(1);
            let mut doublings = 0;
            loop {
                let pass = Pass {
                    walker: walker(),
                    config,
                    band: Some((h, 2 * h)),
                };
                let t = pass.run(&pool)?;
                let stable = (0..3).all(|k| {
                    let (a, b) = (est(t.inner[k]), est(t.outer[k]));
                    (a.mean - b.mean).abs() <= 3.0 * a.std_error.max(b.std_error)
                });
                doublings += 1;
                if stable || doublings >= max_doublings {
                    let e = EscapeEstimate {
                        threshold: 2 * h,
                        absorbed: est(t.outer[0]),
                        plus: est(t.outer[1]),
                        minus: est(t.outer[2]),
                    };
                    break (t, Some(e));
                }
                h *= 2;
            }
        }
    };

    let absorption = tally
        .absorbed_at
        .iter()
        .map(|(&state, &count)| StateEstimate {
            state,
            estimate: est(count),
        })
        .collect();
    let mean_time = escape
        .is_none()
        .then(|| McEstimate::from_sums(tally.time_sum, tally.time_sq, r, seed));
    let visits = match config.visit_window {
        Some((lo, _)) => tally
            .visit_sum
            .iter()
            .zip(&tally.visit_sq)
            .enumerate()
            .map(|(k, (&s, &q))| StateEstimate {
                state: lo + k as i64,
                estimate: McEstimate::from_sums(s, q, r, seed),
            })
            .collect(),
        None => Vec::new(),
    };
    Ok(McReport {
        start: i0,
        replicas: r,
        seed,
        absorption,
        mean_time,
        visits,
        escape,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk_model::{FiniteWalkSpec, MfbParams, PqrsParams};

    fn finite() -> WalkSpec {
        WalkSpec::Finite(FiniteWalkSpec {
            n: 4,
            interior: PqrsParams::uniform(),
            left: MfbParams::left(0.5, 0.25, 0.25),
            right: MfbParams::right(0.5, 0.25, 0.25),
        })
    }

    #[test]
    fn cutoffs_are_cumulative() {
        let c = Cutoffs::new(PqrsParams::uniform().site());
        assert_eq!(c.fwd, 1 << 30);
        assert_eq!(c.bwd, 1 << 31);
        assert_eq!(c.hold, 3 << 30);
        let never = Cutoffs::new(PqrsParams::new(0.5, 0.5, 0.0, 0.0).site());
        assert_eq!(never.hold, 1 << 32);
    }

    #[test]
    fn worker_count_does_not_matter() {
        let cfg = McConfig::new(10_000, 11).visit_window(0, 4);
        let a = mc_run(&finite(), 2, &cfg.clone().workers(1)).unwrap();
        let b = mc_run(&finite(), 2, &cfg.workers(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn seeds_differ() {
        let a = mc_run(&finite(), 2, &McConfig::new(1000, 1)).unwrap();
        let b = mc_run(&finite(), 2, &McConfig::new(1000, 2)).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn replicas_must_be_positive() {
        assert!(mc_run(&finite(), 2, &McConfig::new(0, 1)).is_err());
        assert!(mc_run(&finite(), 7, &McConfig::new(10, 1)).is_err());
    }

    #[test]
    fn single_replica_has_zero_error() {
        let r = mc_run(&finite(), 0, &McConfig::new(1, 5)).unwrap();
        assert_eq!(r.mean_time.unwrap().std_error, 0.0);
        assert_eq!(r.absorption.len(), 1);
    }
}
