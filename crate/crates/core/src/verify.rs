//! Compare the analytic routes with an oracle over one spec or a suite.
//!
//! Deviations are relative, `|analytic − oracle| / max(1, |oracle|)`, except
//! against Monte Carlo where the deviation is the distance in standard errors
//! and the tolerance is [`MC_SIGMAS`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homogeneous::{self, NstepMethod, Occupancy};
use crate::mc::{mc_run, McConfig};
use crate::modified;
use crate::oracle::{auto_half_width, build_chain, exact_absorption, exact_visits, iterated_visits, TransientChain, Window};
use crate::suite::SpecRng;
use crate::walk_model::{Lattice, WalkSpec};

pub const MC_SIGMAS: f64 = 4.0;
pub const MC_REPLICAS: u64 = 100_000;
/// States compared beyond the start on unbounded sides.
pub const REACH: i64 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleKind {
    /// Banded solve of the (windowed) fundamental matrix.
    Dense,
    /// Summed step distributions, plus the n-step three-way check on lines.
    Dp,
    Mc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub spec: usize,
    pub quantity: String,
    pub deviation: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.deviation <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecOutcome {
    pub spec: usize,
    pub kind: String,
    pub checks: usize,
    pub worst: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub oracle: OracleKind,
    pub tolerance: f64,
    pub specs: Vec<SpecOutcome>,
    /// Every check outside its tolerance.
    pub failures: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn kind_name(spec: &WalkSpec) -> &'static str {
    match spec {
        WalkSpec::Finite(_) => "finite",
        WalkSpec::HalfLine(_) => "halfline",
        WalkSpec::FullLine(_) => "fullline",
        WalkSpec::ModifiedFinite(_) => "modified-finite",
        WalkSpec::ModifiedHalfLine(_) => "modified-halfline",
        WalkSpec::ModifiedFullLine(_) => "modified-fullline",
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let d = (a - b).abs() / b.abs().max(1.0);
    if d.is_nan() {
        f64::INFINITY
    } else {
        d
    }
}

/// Collects the worst deviation per quantity.
struct Checks {
    spec: usize,
    tol: f64,
    out: Vec<Check>,
}

impl Checks {
    fn add(&mut self, quantity: impl Into<String>, deviation: f64) {
        self.out.push(Check {
            spec: self.spec,
            quantity: quantity.into(),
            deviation,
            tolerance: self.tol,
        });
    }

    fn series(&mut self, quantity: impl Into<String>, pairs: impl IntoIterator<Item = (f64, f64)>) {
        let d = pairs.into_iter().map(|(a, b)| rel(a, b)).fold(0.0, f64::max);
        self.add(quantity, d);
    }

    fn fail(&mut self, quantity: impl Into<String>, err: &Error) {
        self.add(format!("{}: {err}", quantity.into()), f64::INFINITY);
    }
}

/// Occupancy rows from a chain, by the chosen engine.
struct RowSource {
    chain: TransientChain,
    dp: bool,
}

impl RowSource {
    fn new(spec: &WalkSpec, lo: i64, hi: i64, dp: bool) -> Result<Self> {
        Ok(Self {
            chain: build_chain(spec, Window::Range(lo, hi))?,
            dp,
        })
    }

    fn row(&self, i0: i64) -> Result<Vec<f64>> {
        if self.dp {
            iterated_visits(&self.chain, i0, 1e-16, 10_000_000)
        } else {
            exact_visits(&self.chain, i0)
        }
    }

    fn at(&self, row: &[f64], n: i64) -> f64 {
        self.chain.index(n).map_or(0.0, |k| row[k])
    }

    fn mean_time(&self, i0: i64) -> Result<f64> {
        if self.dp {
            Ok(self.row(i0)?.iter().sum::<f64>() - 1.0)
        } else {
            Ok(exact_absorption(&self.chain, i0)?.mean_time)
        }
    }
}

/// Start states compared for a spec.
pub fn default_starts(spec: &WalkSpec) -> Vec<i64> {
    match spec {
        WalkSpec::Finite(s) => (0..=s.n).collect(),
        WalkSpec::ModifiedFinite(s) => (0..=s.n).collect(),
        WalkSpec::HalfLine(_) => vec![0, 3],
        WalkSpec::FullLine(_) => vec![0],
        WalkSpec::ModifiedHalfLine(s) => vec![0, s.m, s.m + 3],
        WalkSpec::ModifiedFullLine(_) => vec![-3, 0, 4],
    }
}

fn window(spec: &WalkSpec, starts: &[i64]) -> Result<(i64, i64)> {
    let (mut lo, mut hi) = (i64::MAX, i64::MIN);
    for &i in starts {
        let k = auto_half_width(spec, i)?;
        lo = lo.min(i - REACH - k);
        hi = hi.max(i + REACH + k);
    }
    if let WalkSpec::ModifiedHalfLine(s) = spec {
        hi = hi.max(s.m + REACH + auto_half_width(spec, s.m)?);
    }
    let lo = spec.lower().map_or(lo, |l| l.max(lo));
    let hi = spec.upper().map_or(hi, |u| u.min(hi));
    Ok((lo, hi))
}

/// `f_ij = x_ij / x_jj`, and the return probability `1 − 1/x_ii` on the diagonal.
fn hit(x_ij: f64, x_jj: f64, diagonal: bool) -> f64 {
    if diagonal {
        1.0 - 1.0 / x_jj
    } else {
        x_ij / x_jj
    }
}

fn compared_states(spec: &WalkSpec, i0: i64) -> (i64, i64) {
    let lo = spec.lower().unwrap_or(i0 - REACH);
    let hi = spec.upper().unwrap_or(i0 + REACH);
    (lo, hi)
}

fn exact_checks(spec: &WalkSpec, c: &mut Checks, dp: bool) -> Result<()> {
    let starts = default_starts(spec);
    let (lo, hi) = window(spec, &starts)?;
    let rows = RowSource::new(spec, lo, hi, dp)?;
    let mut diag_cache = std::collections::HashMap::new();
    let mut diag = |j: i64| -> Result<f64> {
        if let Some(&v) = diag_cache.get(&j) {
            return Ok(v);
        }
        let v = rows.at(&rows.row(j)?, j);
        diag_cache.insert(j, v);
        Ok(v)
    };
    for &i0 in &starts {
        let row = rows.row(i0)?;
        let (a, b) = compared_states(spec, i0);
        let oracle_x: Vec<f64> = (a..=b).map(|n| rows.at(&row, n)).collect();
        let m_oracle = rows.mean_time(i0)?;
        let defective = if dp { None } else { Some(exact_absorption(&rows.chain, i0)?) };
        match spec {
            WalkSpec::Finite(s) => {
                let prof = homogeneous::finite_arrivals(s, i0)?;
                c.series(format!("x({i0},·)"), (a..=b).map(|n| prof.get(n).unwrap_or(f64::NAN)).zip(oracle_x.iter().copied()));
                let abs = homogeneous::finite_absorption(s, i0)?;
                c.series(format!("m({i0})"), [(abs.mean_time, m_oracle)]);
                if let (Some(d), Some(o)) = (&abs.defective_times, &defective) {
                    c.series(format!("m({i0},·)"), d.iter().copied().zip(o.defective_times.iter().copied()));
                }
                let mut fs = Vec::new();
                for j in a..=b {
                    fs.push((homogeneous::finite_arrival_probability(s, i0, j)?, hit(rows.at(&row, j), diag(j)?, j == i0)));
                }
                c.series(format!("f({i0},·)"), fs);
            }
            WalkSpec::HalfLine(s) => {
                let prof = homogeneous::halfline_arrivals(s, i0)?;
                c.series(format!("x({i0},·)"), (a..=b).map(|n| prof.at(n)).zip(oracle_x.iter().copied()));
                c.series(format!("m({i0})"), [(homogeneous::halfline_absorption_time(s, i0)?, m_oracle)]);
                if let Some(o) = &defective {
                    let mut ds = Vec::new();
                    for j in a..=b {
                        let k = rows.chain.index(j).expect("window covers compared states");
                        ds.push((homogeneous::halfline_defective_time(s, i0, j)?, o.defective_times[k]));
                    }
                    c.series(format!("m({i0},·)"), ds);
                }
                let mut fs = Vec::new();
                for j in a..=b {
                    fs.push((homogeneous::halfline_arrival_probability(s, i0, j)?, hit(rows.at(&row, j), diag(j)?, j == i0)));
                }
                c.series(format!("f({i0},·)"), fs);
            }
            WalkSpec::FullLine(s) => {
                let prof = homogeneous::fullline_profile(s, i0)?;
                c.series(format!("x({i0},·)"), (a..=b).map(|n| prof.at(n)).zip(oracle_x.iter().copied()));
                c.series("m", [(homogeneous::fullline_absorption(s)?, m_oracle)]);
                if let Some(o) = &defective {
                    let mut ds = Vec::new();
                    for j in a..=b {
                        let k = rows.chain.index(j).expect("window covers compared states");
                        ds.push((homogeneous::fullline_defective_time(s, j - i0)?, o.defective_times[k]));
                    }
                    c.series(format!("m({i0},·)"), ds);
                }
                let mut fs = Vec::new();
                for j in a..=b {
                    fs.push((homogeneous::fullline_arrival_probability(s, i0, j)?, hit(rows.at(&row, j), diag(j)?, j == i0)));
                }
                c.series(format!("f({i0},·)"), fs);
            }
            WalkSpec::ModifiedFinite(s) => {
                let prof = modified::mfinite_arrivals(s, i0)?;
                c.series(format!("x({i0},·)"), (a..=b).map(|n| prof.get(n).unwrap_or(f64::NAN)).zip(oracle_x.iter().copied()));
                let abs = modified::mfinite_absorption(s, i0)?;
                c.series(format!("m({i0})"), [(abs.mean_time, m_oracle)]);
                c.series(format!("sum s·x({i0})"), [(abs.total_probability(), 1.0)]);
            }
            WalkSpec::ModifiedHalfLine(s) => {
                let prof = modified::mhalfline_arrivals(s, i0)?;
                c.series(format!("x({i0},·)"), (a..=b).map(|n| prof.at(n)).zip(oracle_x.iter().copied()));
                c.series(format!("m({i0})"), [(modified::mhalfline_absorption_time(s, i0)?, m_oracle)]);
            }
            WalkSpec::ModifiedFullLine(s) => {
                let prof = modified::mfullline_arrivals(s, i0)?;
                c.series(format!("x({i0},·)"), (a..=b).map(|n| prof.at(n)).zip(oracle_x.iter().copied()));
                c.series(format!("m({i0})"), [(modified::mfullline_absorption_time(s, i0)?, m_oracle)]);
            }
        }
    }
    if let (true, WalkSpec::FullLine(s)) = (dp, spec) {
        for n in 0..=30usize {
            let comb = homogeneous::nstep_distribution(&s.interior, n, NstepMethod::Comb)?;
            let pgf = homogeneous::nstep_distribution(&s.interior, n, NstepMethod::Pgf);
            let dpd = homogeneous::nstep_distribution(&s.interior, n, NstepMethod::Dp)?;
            c.series(format!("p^({n}) comb vs dp"), comb.probs.iter().copied().zip(dpd.probs.iter().copied()));
            match pgf {
                Ok(p) => c.series(format!("p^({n}) pgf vs dp"), p.probs.iter().copied().zip(dpd.probs.iter().copied())),
                Err(Error::Inconsistent(_)) => {}
                Err(e) => c.fail(format!("p^({n}) pgf"), &e),
            }
        }
    }
    Ok(())
}

fn analytic_site_probabilities(spec: &WalkSpec, i0: i64) -> Result<(Vec<(i64, f64)>, f64)> {
    let (a, b) = compared_states(spec, i0);
    let xs: Vec<(i64, f64)> = match spec {
        WalkSpec::Finite(s) => homogeneous::finite_arrivals(s, i0)?.iter().collect(),
        WalkSpec::HalfLine(s) => homogeneous::halfline_arrivals(s, i0)?.profile(a, b).iter().collect(),
        WalkSpec::FullLine(s) => homogeneous::fullline_profile(s, i0)?.profile(a, b).iter().collect(),
        WalkSpec::ModifiedFinite(s) => modified::mfinite_arrivals(s, i0)?.iter().collect(),
        WalkSpec::ModifiedHalfLine(s) => modified::mhalfline_arrivals(s, i0)?.profile(a, b).iter().collect(),
        WalkSpec::ModifiedFullLine(s) => modified::mfullline_arrivals(s, i0)?.profile(a, b).iter().collect(),
    };
    let m = match spec {
        WalkSpec::Finite(s) => homogeneous::finite_absorption(s, i0)?.mean_time,
        WalkSpec::HalfLine(s) => homogeneous::halfline_absorption_time(s, i0)?,
        WalkSpec::FullLine(s) => homogeneous::fullline_absorption(s)?,
        WalkSpec::ModifiedFinite(s) => modified::mfinite_absorption(s, i0)?.mean_time,
        WalkSpec::ModifiedHalfLine(s) => modified::mhalfline_absorption_time(s, i0)?,
        WalkSpec::ModifiedFullLine(s) => modified::mfullline_absorption_time(s, i0)?,
    };
    Ok((xs.into_iter().map(|(n, x)| (n, spec.site(n).absorb * x)).collect(), m))
}

fn mc_checks(spec: &WalkSpec, c: &mut Checks, seed: u64, replicas: u64) -> Result<()> {
    let i0 = default_starts(spec)[0];
    let (probs, m) = analytic_site_probabilities(spec, i0)?;
    let report = mc_run(spec, i0, &McConfig::new(replicas, seed))?;
    // States expected fewer than 100 times, and states outside the compared
    // range, form one pooled bin. Standard errors use the analytic probability.
    let r = replicas as f64;
    let z = |freq: f64, p: f64| {
        let se = (p * (1.0 - p) / r).sqrt();
        if se > 0.0 {
            (freq - p).abs() / se
        } else if freq == p {
            0.0
        } else {
            f64::INFINITY
        }
    };
    let mut worst: f64 = 0.0;
    let (mut big_p, mut big_f) = (0.0, 0.0);
    for (n, p) in probs {
        if p * r >= 100.0 {
            let f = report.absorption_at(n).map_or(0.0, |e| e.mean);
            worst = worst.max(z(f, p));
            big_p += p;
            big_f += f;
        }
    }
    let rest = (1.0 - big_p).max(0.0);
    if rest * r >= 10.0 {
        worst = worst.max(z((1.0 - big_f).max(0.0), rest));
    }
    c.add(format!("absorption site frequencies ({i0})"), worst);
    if let Some(t) = report.mean_time {
        c.add(format!("m({i0})"), t.z_score(m));
    }
    Ok(())
}

/// Check one spec; analytic errors become failing checks.
pub fn verify_spec(spec: &WalkSpec, index: usize, oracle: OracleKind, tol: f64, seed: u64) -> Vec<Check> {
    let mut c = Checks {
        spec: index,
        tol: if oracle == OracleKind::Mc { MC_SIGMAS } else { tol },
        out: Vec::new(),
    };
    let res = match oracle {
        OracleKind::Dense => exact_checks(spec, &mut c, false),
        OracleKind::Dp => exact_checks(spec, &mut c, true),
        OracleKind::Mc => mc_checks(spec, &mut c, seed.wrapping_add(index as u64), MC_REPLICAS),
    };
    if let Err(e) = res {
        c.fail(kind_name(spec), &e);
    }
    c.out
}

/// A mixed suite cycling through the six walk kinds.
pub fn random_suite(seed: u64, count: usize) -> Vec<WalkSpec> {
    let mut rng = SpecRng::new(seed);
    (0..count)
        .map(|k| match k % 6 {
            0 => WalkSpec::Finite(rng.finite(3, 50)),
            1 => WalkSpec::HalfLine(rng.halfline()),
            2 => WalkSpec::FullLine(rng.fullline()),
            3 => WalkSpec::ModifiedFinite(rng.modified_finite(4, 50)),
            4 => WalkSpec::ModifiedHalfLine(rng.modified_halfline(20)),
            _ => WalkSpec::ModifiedFullLine(rng.modified_fullline()),
        })
        .collect()
}

pub fn verify_suite(specs: &[WalkSpec], oracle: OracleKind, tol: f64, seed: u64) -> VerifyReport {
    let mut outcomes = Vec::with_capacity(specs.len());
    let mut failures = Vec::new();
    for (k, spec) in specs.iter().enumerate() {
        let checks = verify_spec(spec, k, oracle, tol, seed);
        let worst = checks.iter().map(|c| c.deviation).fold(0.0, f64::max);
        let passed = checks.iter().all(Check::passed);
        outcomes.push(SpecOutcome {
            spec: k,
            kind: kind_name(spec).to_string(),
            checks: checks.len(),
            worst,
            passed,
        });
        failures.extend(checks.into_iter().filter(|c| !c.passed()));
    }
    VerifyReport {
        oracle,
        tolerance: if oracle == OracleKind::Mc { MC_SIGMAS } else { tol },
        specs: outcomes,
        failures,
    }
}
