//! Closed forms for plain walks on `[0, N]`, `[0, ∞)` and the integers.
//!
//! The finite-interval formulas are evaluated after dividing numerator and
//! denominator by `ξ1^{N−2}`, so only `ρ = ξ2/ξ1 < 1` is raised to large
//! powers. Every formula is generic over [`Scalar`] and is also evaluated on
//! the z-scaled walk (`p → pz`, `q → qz`, `r → rz`, barrier entries likewise),
//! which gives the generating function `X(z)`; running it on dual numbers at
//! `z = 1` yields `X'(1)` and hence the defective times.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::characteristic::{dual_roots, roots_at, CharacteristicRoots};
use crate::dual::{Dual, Scalar};
use crate::error::{Error, Result};
use crate::walk_model::{
    Domain, FiniteWalkSpec, FullLineWalkSpec, HalfLineWalkSpec, Lattice, PqrsParams, Validate,
};

/// Where a value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    ProofSystem,
    DenseOracle,
    TruncatedOracle,
    DynamicProgramming,
    MonteCarlo,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::ClosedForm => "closed-form",
            Provenance::ProofSystem => "proof-system",
            Provenance::DenseOracle => "dense-oracle",
            Provenance::TruncatedOracle => "truncated-oracle",
            Provenance::DynamicProgramming => "dp",
            Provenance::MonteCarlo => "monte-carlo",
        }
    }
}

/// Expected occupancy `x_n` over a contiguous block of states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrivalProfile {
    pub domain: Domain,
    pub start: i64,
    /// State of `values[0]`.
    pub first: i64,
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl ArrivalProfile {
    pub fn get(&self, n: i64) -> Option<f64> {
        let k = n.checked_sub(self.first)?;
        usize::try_from(k).ok().and_then(|k| self.values.get(k).copied())
    }

    pub fn last(&self) -> i64 {
        self.first + self.values.len() as i64 - 1
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(k, &v)| (self.first + k as i64, v))
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Occupancy that can be evaluated at any state, including on unbounded
/// domains.
pub trait Occupancy {
    fn domain(&self) -> Domain;
    fn start(&self) -> i64;
    fn provenance(&self) -> Provenance;
    fn at(&self, n: i64) -> f64;

    /// Materialize states `lo..=hi`.
    fn profile(&self, lo: i64, hi: i64) -> ArrivalProfile {
        ArrivalProfile {
            domain: self.domain(),
            start: self.start(),
            first: lo,
            values: (lo..=hi).map(|n| self.at(n)).collect(),
            provenance: self.provenance(),
        }
    }
}

/// Absorption site probabilities and times for a start state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionSummary {
    pub start: i64,
    /// State of `probabilities[0]`.
    pub first: i64,
    /// `s_j x_j` per state.
    pub probabilities: Vec<f64>,
    /// Expected number of transitions before absorption.
    pub mean_time: f64,
    /// `E[T·1{absorbed at j}]` per state.
    pub defective_times: Option<Vec<f64>>,
    pub provenance: Provenance,
}

impl AbsorptionSummary {
    pub fn total_probability(&self) -> f64 {
        self.probabilities.iter().sum()
    }
}

/// Distribution of the displacement after `n` steps of a full-line walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDistribution {
    pub n: usize,
    /// `probs[k + n]` is the probability of being alive at displacement `k`.
    pub probs: Vec<f64>,
    /// Mass absorbed within the first `n` steps.
    pub absorbed: f64,
}

impl StepDistribution {
    pub fn at(&self, k: i64) -> f64 {
        let idx = k + self.n as i64;
        if idx < 0 {
            return 0.0;
        }
        self.probs.get(idx as usize).copied().unwrap_or(0.0)
    }

    pub fn survival(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// `v_i = p0 − (1−r0)ξ_i` and `w_i = qN − (1−rN)/ξ_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFactors {
    pub v1: f64,
    pub v2: f64,
    pub w1: f64,
    pub w2: f64,
}

pub fn boundary_factors(spec: &FiniteWalkSpec) -> Result<BoundaryFactors> {
    let roots = roots_at(&spec.interior, 1.0)?;
    Ok(BoundaryFactors {
        v1: spec.left.fwd - (1.0 - spec.left.hold) * roots.xi1,
        v2: spec.left.fwd - (1.0 - spec.left.hold) * roots.xi2,
        w1: spec.right.bwd - (1.0 - spec.right.hold) / roots.xi1,
        w2: spec.right.bwd - (1.0 - spec.right.hold) / roots.xi2,
    })
}

// ---------------------------------------------------------------------------
// Finite interval

struct FiniteKernel<T> {
    n: i64,
    xi1: T,
    xi2: T,
    zeta: T,
    rho: T,
    v1: T,
    v2: T,
    w1: T,
    w2: T,
    dt: T,
}

impl<T: Scalar> FiniteKernel<T> {
    #[allow(clippy::too_many_arguments)]
    fn new(n: i64, xi1: T, xi2: T, zeta: T, p0: T, r0: T, qn: T, rn: T) -> Self {
        let one = T::cst(1.0);
        let v1 = p0 - (one - r0) * xi1;
        let v2 = p0 - (one - r0) * xi2;
        let w1 = qn - (one - rn) / xi1;
        let w2 = qn - (one - rn) / xi2;
        let rho = xi2 / xi1;
        let dt = rho.ipow(n - 2) * v2 * w1 - v1 * w2;
        Self {
            n,
            xi1,
            xi2,
            zeta,
            rho,
            v1,
            v2,
            w1,
            w2,
            dt,
        }
    }

    fn x(&self, i0: i64, k: i64) -> T {
        let n = self.n;
        if k == 0 {
            self.xi1.ipow(1 - i0) * (self.w2 - self.rho.ipow(n - 1 - i0) * self.w1) / self.dt
        } else if k == n {
            self.xi2.ipow(n - 1 - i0) * (self.v1 - self.rho.ipow(i0 - 1) * self.v2) / self.dt
        } else if k <= i0 {
            self.zeta
                * self.xi1.ipow(k - i0)
                * (self.rho.ipow(n - 1 - i0) * self.w1 - self.w2)
                * (self.v1 - self.rho.ipow(k - 1) * self.v2)
                / self.dt
        } else {
            self.zeta
                * self.xi2.ipow(k - i0)
                * (self.rho.ipow(n - 1 - k) * self.w1 - self.w2)
                * (self.v1 - self.rho.ipow(i0 - 1) * self.v2)
                / self.dt
        }
    }
}

fn finite_kernel(spec: &FiniteWalkSpec) -> Result<FiniteKernel<f64>> {
    let r = roots_at(&spec.interior, 1.0)?;
    Ok(FiniteKernel::new(
        spec.n,
        r.xi1,
        r.xi2,
        r.zeta,
        spec.left.fwd,
        spec.left.hold,
        spec.right.bwd,
        spec.right.hold,
    ))
}

fn finite_kernel_dual(spec: &FiniteWalkSpec, z: f64) -> Result<FiniteKernel<Dual>> {
    let r = dual_roots(&spec.interior, z)?;
    let zz = Dual::new(z, 1.0);
    Ok(FiniteKernel::new(
        spec.n,
        r.xi1,
        r.xi2,
        r.zeta,
        Dual::cst(spec.left.fwd) * zz,
        Dual::cst(spec.left.hold) * zz,
        Dual::cst(spec.right.bwd) * zz,
        Dual::cst(spec.right.hold) * zz,
    ))
}

fn check_finite_state(spec: &FiniteWalkSpec, i: i64, name: &str) -> Result<()> {
    if !(0..=spec.n).contains(&i) {
        return Err(Error::Precondition(format!(
            "{name} = {i} lies outside [0, {}]",
            spec.n
        )));
    }
    Ok(())
}

/// Expected occupancy of every state of `[0, N]` starting from `i0`.
pub fn finite_arrivals(spec: &FiniteWalkSpec, i0: i64) -> Result<ArrivalProfile> {
    spec.ensure_valid()?;
    check_finite_state(spec, i0, "i0")?;
    let k = finite_kernel(spec)?;
    Ok(ArrivalProfile {
        domain: Domain::Finite,
        start: i0,
        first: 0,
        values: (0..=spec.n).map(|n| k.x(i0, n)).collect(),
        provenance: Provenance::ClosedForm,
    })
}

/// Probability of ever occupying `j` from `i`; for `i = j` the probability of
/// a return.
pub fn finite_arrival_probability(spec: &FiniteWalkSpec, i: i64, j: i64) -> Result<f64> {
    spec.ensure_valid()?;
    check_finite_state(spec, i, "i")?;
    check_finite_state(spec, j, "j")?;
    let k = finite_kernel(spec)?;
    let n = spec.n;
    Ok(if i == j {
        1.0 - 1.0 / k.x(i, i)
    } else if i < j {
        k.xi2.ipow(j - i) * (k.v1 - k.rho.ipow(i - 1) * k.v2) / (k.v1 - k.rho.ipow(j - 1) * k.v2)
    } else {
        k.xi1.ipow(j - i) * (k.rho.ipow(n - 1 - i) * k.w1 - k.w2)
            / (k.rho.ipow(n - 1 - j) * k.w1 - k.w2)
    })
}

/// Absorption probabilities, mean absorption time and defective times.
pub fn finite_absorption(spec: &FiniteWalkSpec, i0: i64) -> Result<AbsorptionSummary> {
    let profile = finite_arrivals(spec, i0)?;
    let k = finite_kernel(spec)?;
    let probabilities: Vec<f64> = profile
        .iter()
        .map(|(n, x)| spec.site(n).absorb * x)
        .collect();
    let s = spec.interior.s;
    let mean_time = if s > 0.0 {
        let c0 = 1.0 - spec.left.absorb / s;
        let cn = 1.0 - spec.right.absorb / s;
        let n = spec.n;
        let i = i0;
        let num = c0 * k.xi1.ipow(1 - i) * (k.rho.ipow(n - 1 - i) * k.w1 - k.w2)
            + cn * k.xi2.ipow(n - 1 - i) * (k.rho.ipow(i - 1) * k.v2 - k.v1);
        spec.interior.sigma() - num / k.dt
    } else {
        profile.total() - 1.0
    };
    let kd = finite_kernel_dual(spec, 1.0)?;
    let defective = (0..=spec.n)
        .map(|n| spec.site(n).absorb * kd.x(i0, n).d)
        .collect();
    Ok(AbsorptionSummary {
        start: i0,
        first: 0,
        probabilities,
        mean_time,
        defective_times: Some(defective),
        provenance: Provenance::ClosedForm,
    })
}

// ---------------------------------------------------------------------------
// Half line

struct HalfKernel<T> {
    xi1: T,
    xi2: T,
    zeta: T,
    rho: T,
    v1: T,
    v2: T,
}

impl<T: Scalar> HalfKernel<T> {
    fn new(xi1: T, xi2: T, zeta: T, p0: T, r0: T) -> Self {
        let one = T::cst(1.0);
        Self {
            xi1,
            xi2,
            zeta,
            rho: xi2 / xi1,
            v1: p0 - (one - r0) * xi1,
            v2: p0 - (one - r0) * xi2,
        }
    }

    fn x(&self, i0: i64, k: i64) -> T {
        let one = T::cst(1.0);
        if k == 0 {
            -self.xi1.ipow(1 - i0) / self.v1
        } else if k <= i0 {
            self.zeta * self.xi1.ipow(k - i0) * (one - self.rho.ipow(k - 1) * self.v2 / self.v1)
        } else {
            self.zeta * self.xi2.ipow(k - i0) * (one - self.rho.ipow(i0 - 1) * self.v2 / self.v1)
        }
    }
}

fn half_kernel_dual(spec: &HalfLineWalkSpec, z: f64) -> Result<HalfKernel<Dual>> {
    let r = dual_roots(&spec.interior, z)?;
    let zz = Dual::new(z, 1.0);
    Ok(HalfKernel::new(
        r.xi1,
        r.xi2,
        r.zeta,
        Dual::cst(spec.left.fwd) * zz,
        Dual::cst(spec.left.hold) * zz,
    ))
}

fn check_nonneg(i: i64, name: &str) -> Result<()> {
    if i < 0 {
        return Err(Error::Precondition(format!("{name} = {i} must be ≥ 0")));
    }
    Ok(())
}

/// Lazily evaluated occupancy of a half-line walk.
pub struct HalfLineArrivals {
    start: i64,
    roots: CharacteristicRoots,
    kernel: HalfKernel<f64>,
}

impl HalfLineArrivals {
    pub fn roots(&self) -> &CharacteristicRoots {
        &self.roots
    }
    pub fn v1(&self) -> f64 {
        self.kernel.v1
    }
    pub fn v2(&self) -> f64 {
        self.kernel.v2
    }
}

impl Occupancy for HalfLineArrivals {
    fn domain(&self) -> Domain {
        Domain::HalfLine
    }
    fn start(&self) -> i64 {
        self.start
    }
    fn provenance(&self) -> Provenance {
        Provenance::ClosedForm
    }
    fn at(&self, n: i64) -> f64 {
        if n < 0 {
            0.0
        } else {
            self.kernel.x(self.start, n)
        }
    }
}

pub fn halfline_arrivals(spec: &HalfLineWalkSpec, i0: i64) -> Result<HalfLineArrivals> {
    spec.ensure_valid()?;
    check_nonneg(i0, "i0")?;
    let roots = roots_at(&spec.interior, 1.0)?;
    Ok(HalfLineArrivals {
        start: i0,
        roots,
        kernel: HalfKernel::new(roots.xi1, roots.xi2, roots.zeta, spec.left.fwd, spec.left.hold),
    })
}

pub fn halfline_arrival_probability(spec: &HalfLineWalkSpec, i: i64, j: i64) -> Result<f64> {
    let a = halfline_arrivals(spec, i)?;
    check_nonneg(j, "j")?;
    let k = &a.kernel;
    Ok(if i == j {
        1.0 - 1.0 / k.x(i, i)
    } else if j < i {
        k.xi1.ipow(j - i)
    } else {
        k.xi2.ipow(j - i) * (1.0 - k.rho.ipow(i - 1) * k.v2 / k.v1)
            / (1.0 - k.rho.ipow(j - 1) * k.v2 / k.v1)
    })
}

/// `m_i = σ − v1^{−1}(1 − s0/s)ξ1^{1−i}`.
pub fn halfline_absorption_time(spec: &HalfLineWalkSpec, i: i64) -> Result<f64> {
    let a = halfline_arrivals(spec, i)?;
    let s = spec.interior.s;
    Ok(spec.interior.sigma()
        - (1.0 - spec.left.absorb / s) * a.kernel.xi1.ipow(1 - i) / a.kernel.v1)
}

/// `E[T·1{absorbed at j}]` from `s_j X'_ij(1)`.
pub fn halfline_defective_time(spec: &HalfLineWalkSpec, i: i64, j: i64) -> Result<f64> {
    spec.ensure_valid()?;
    check_nonneg(i, "i")?;
    check_nonneg(j, "j")?;
    let k = half_kernel_dual(spec, 1.0)?;
    Ok(spec.site(j).absorb * k.x(i, j).d)
}

/// Partial sum of defective times with the size of what was left out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefectiveSum {
    /// `Σ_{j ≤ last} m_ij`.
    pub sum: f64,
    pub last: i64,
    /// Magnitude of the omitted remainder `Σ_{j > last} m_ij`.
    pub tail_bound: f64,
}

/// Sum `m_ij` over `j` until the remainder drops below `tol`.
///
/// Beyond the start every `X_ij(z)` is `X_{i,J}(z)·ξ2(z)^{j−J}`, so the
/// remainder past `J` is `s·d/dz[X_{i,J+1}(z)/(1 − ξ2(z))]` at `z = 1`, which
/// is evaluated exactly rather than estimated.
pub fn halfline_defective_total(spec: &HalfLineWalkSpec, i: i64, tol: f64) -> Result<DefectiveSum> {
    spec.ensure_valid()?;
    check_nonneg(i, "i")?;
    let k = half_kernel_dual(spec, 1.0)?;
    let s = spec.interior.s;
    let tail_after = |last: i64| {
        let next = k.x(i, last + 1);
        (next / (Dual::cst(1.0) - k.xi2)).d * s
    };
    let mut sum = 0.0;
    let mut j = 0;
    loop {
        sum += spec.site(j).absorb * k.x(i, j).d;
        if j >= i {
            let tail = tail_after(j);
            if tail.abs() < tol || j > i + 1_000_000 {
                return Ok(DefectiveSum {
                    sum,
                    last: j,
                    tail_bound: tail.abs(),
                });
            }
        }
        j += 1;
    }
}

// ---------------------------------------------------------------------------
// Full line

/// Occupancy of a full-line walk.
pub struct FullLineArrivals {
    start: i64,
    roots: CharacteristicRoots,
}

impl Occupancy for FullLineArrivals {
    fn domain(&self) -> Domain {
        Domain::FullLine
    }
    fn start(&self) -> i64 {
        self.start
    }
    fn provenance(&self) -> Provenance {
        Provenance::ClosedForm
    }
    fn at(&self, n: i64) -> f64 {
        let r = &self.roots;
        if n <= self.start {
            r.zeta * r.xi1.ipow(n - self.start)
        } else {
            r.zeta * r.xi2.ipow(n - self.start)
        }
    }
}

pub fn fullline_profile(spec: &FullLineWalkSpec, i0: i64) -> Result<FullLineArrivals> {
    spec.ensure_valid()?;
    Ok(FullLineArrivals {
        start: i0,
        roots: roots_at(&spec.interior, 1.0)?,
    })
}

pub fn fullline_arrivals(spec: &FullLineWalkSpec, i0: i64, n: i64) -> Result<f64> {
    Ok(fullline_profile(spec, i0)?.at(n))
}

pub fn fullline_arrival_probability(spec: &FullLineWalkSpec, i: i64, j: i64) -> Result<f64> {
    spec.ensure_valid()?;
    let r = roots_at(&spec.interior, 1.0)?;
    Ok(if i == j {
        1.0 - r.lambda
    } else if j < i {
        r.xi1.ipow(j - i)
    } else {
        r.xi2.ipow(j - i)
    })
}

/// Return probability `1 − λ`.
pub fn fullline_return(spec: &FullLineWalkSpec) -> Result<f64> {
    fullline_arrival_probability(spec, 0, 0)
}

/// Mean absorption time, the same from every start.
pub fn fullline_absorption(spec: &FullLineWalkSpec) -> Result<f64> {
    spec.ensure_valid()?;
    Ok(spec.interior.sigma())
}

/// `m_0j = sζ1²ξ^j(ζ1[r(1−r) + 4pq] ± j)` with `ξ2` to the right of the start
/// and `ξ1` to the left.
pub fn fullline_defective_time(spec: &FullLineWalkSpec, j: i64) -> Result<f64> {
    spec.ensure_valid()?;
    let p = &spec.interior;
    let r = roots_at(p, 1.0)?;
    let c = r.zeta * (p.r * (1.0 - p.r) + 4.0 * p.p * p.q);
    let jf = j as f64;
    Ok(if j >= 0 {
        p.s * r.zeta * r.zeta * r.xi2.ipow(j) * (c + jf)
    } else {
        p.s * r.zeta * r.zeta * r.xi1.ipow(j) * (c - jf)
    })
}

/// `Σ_j m_0j` from the geometric and arithmetico-geometric series.
pub fn fullline_defective_total(spec: &FullLineWalkSpec) -> Result<f64> {
    spec.ensure_valid()?;
    let p = &spec.interior;
    let r = roots_at(p, 1.0)?;
    let c = r.zeta * (p.r * (1.0 - p.r) + 4.0 * p.p * p.q);
    let right = c / (1.0 - r.xi2) + r.xi2 / (1.0 - r.xi2).ipow(2);
    let u = 1.0 / r.xi1;
    let left = c * u / (1.0 - u) + u / (1.0 - u).ipow(2);
    Ok(p.s * r.zeta * r.zeta * (right + left))
}

// ---------------------------------------------------------------------------
// n-step probabilities

fn binom(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for t in 0..k {
        acc = acc * (n - t) as f64 / (t + 1) as f64;
    }
    acc
}

fn ln_binom(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|t| ((n - t) as f64 / (t + 1) as f64).ln()).sum()
}

fn pow_term(base: f64, e: u64) -> f64 {
    if e == 0 {
        1.0
    } else {
        base.powi(e as i32)
    }
}

/// Sum over the number of holds `n_r`, which must have the parity of `n − k`;
/// the remaining `n − n_r` moves split into `(n − n_r + k)/2` forward and
/// `(n − n_r − k)/2` backward.
pub fn nstep_combinatorial(params: &PqrsParams, k: i64, n: usize) -> f64 {
    let nn = n as i64;
    if k.abs() > nn {
        return 0.0;
    }
    let (p, q, r) = (params.p, params.q, params.r);
    let large = n > 500;
    let mut total = 0.0;
    let mut nr = ((nn - k) % 2).unsigned_abs() as i64;
    while nr <= nn - k.abs() {
        let moves = nn - nr;
        let np = ((moves + k) / 2) as u64;
        let nq = ((moves - k) / 2) as u64;
        let nr_u = nr as u64;
        let term = if large {
            let mut lg = ln_binom(n as u64, nr_u) + ln_binom(moves as u64, nq);
            let mut zero = false;
            for (base, e) in [(p, np), (q, nq), (r, nr_u)] {
                if e > 0 {
                    if base == 0.0 {
                        zero = true;
                    } else {
                        lg += e as f64 * base.ln();
                    }
                }
            }
            if zero {
                0.0
            } else {
                lg.exp()
            }
        } else {
            binom(n as u64, nr_u)
                * binom(moves as u64, nq)
                * pow_term(p, np)
                * pow_term(q, nq)
                * pow_term(r, nr_u)
        };
        total += term;
        nr += 2;
    }
    total
}

/// Coefficient extraction from `(pz + r + q/z)^n` through the factorization
/// `p(z − z1)(z − z2)/z` with `z_{1,2} = (−r ± √(r² − 4pq))/(2p)`.
///
/// The roots are complex when `r² < 4pq`; the imaginary part of the result
/// must then cancel, and a residue above `1e-10` is reported as an
/// inconsistency.
pub fn nstep_pgf(params: &PqrsParams, k: i64, n: usize) -> Result<f64> {
    let (p, q, r) = (params.p, params.q, params.r);
    if !(p > 0.0) {
        return Err(Error::Precondition("the generating-function route needs p > 0".into()));
    }
    let nn = n as i64;
    if k.abs() > nn {
        return Ok(0.0);
    }
    if q == 0.0 {
        // Only forward steps and holds: a single binomial term.
        let np = k as u64;
        return Ok(binom(n as u64, np) * pow_term(p, np) * pow_term(r, (nn - k) as u64));
    }
    let disc = Complex64::new(r * r - 4.0 * p * q, 0.0).sqrt();
    let z1 = (Complex64::new(-r, 0.0) + disc) / (2.0 * p);
    let z2 = (Complex64::new(-r, 0.0) - disc) / (2.0 * p);
    let ratio = z2 / z1;
    let lo = k.max(0);
    let hi = nn.min(nn + k);
    let mut sum = Complex64::new(0.0, 0.0);
    for m in lo..=hi {
        let c = binom(n as u64, m as u64) * binom(n as u64, (m - k) as u64);
        sum += ratio.powi(m as i32) * c;
    }
    let pref = (-z2).powi((-k - nn) as i32) * q.powi(nn as i32);
    let val = pref * sum;
    if val.im.abs() > 1e-10 {
        return Err(Error::Inconsistent(format!(
            "imaginary residue {:e} in the n-step generating-function sum",
            val.im
        )));
    }
    Ok(val.re)
}

/// Which route [`nstep_distribution`] takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NstepMethod {
    Comb,
    Pgf,
    Dp,
}

pub fn nstep_distribution(params: &PqrsParams, n: usize, method: NstepMethod) -> Result<StepDistribution> {
    params.ensure_valid()?;
    let probs = match method {
        NstepMethod::Comb => (-(n as i64)..=n as i64)
            .map(|k| nstep_combinatorial(params, k, n))
            .collect(),
        NstepMethod::Pgf => (-(n as i64)..=n as i64)
            .map(|k| nstep_pgf(params, k, n))
            .collect::<Result<Vec<_>>>()?,
        NstepMethod::Dp => {
            let all = crate::oracle::dp_nstep(params, n);
            all.into_iter().last().expect("dp returns n + 1 layers").probs
        }
    };
    let survival: f64 = probs.iter().sum();
    Ok(StepDistribution {
        n,
        probs,
        absorbed: 1.0 - survival,
    })
}

// ---------------------------------------------------------------------------
// Generating functions

/// Walk whose generating function [`pgf_evaluate`] evaluates.
#[derive(Debug, Clone, Copy)]
pub enum PgfTarget<'a> {
    Finite(&'a FiniteWalkSpec),
    HalfLine(&'a HalfLineWalkSpec),
    FullLine(&'a FullLineWalkSpec),
}

/// `X_ij(z) = Σ_k p_ij^{(k)} z^k` for `z ∈ (0, 1]`.
pub fn pgf_evaluate(target: PgfTarget<'_>, i: i64, j: i64, z: f64) -> Result<f64> {
    match target {
        PgfTarget::Finite(spec) => {
            spec.ensure_valid()?;
            check_finite_state(spec, i, "i")?;
            check_finite_state(spec, j, "j")?;
            Ok(finite_kernel_dual(spec, z)?.x(i, j).v)
        }
        PgfTarget::HalfLine(spec) => {
            spec.ensure_valid()?;
            check_nonneg(i, "i")?;
            check_nonneg(j, "j")?;
            Ok(half_kernel_dual(spec, z)?.x(i, j).v)
        }
        PgfTarget::FullLine(spec) => {
            spec.ensure_valid()?;
            let r = roots_at(&spec.interior, z)?;
            Ok(if j <= i {
                r.zeta * r.xi1.ipow(j - i)
            } else {
                r.zeta * r.xi2.ipow(j - i)
            })
        }
    }
}

/// `X'_ij(1)`, the expected number of transitions summed over occupancy of
/// `j`.
pub fn pgf_derivative_at_one(target: PgfTarget<'_>, i: i64, j: i64) -> Result<f64> {
    match target {
        PgfTarget::Finite(spec) => {
            spec.ensure_valid()?;
            check_finite_state(spec, i, "i")?;
            check_finite_state(spec, j, "j")?;
            Ok(finite_kernel_dual(spec, 1.0)?.x(i, j).d)
        }
        PgfTarget::HalfLine(spec) => {
            spec.ensure_valid()?;
            check_nonneg(i, "i")?;
            check_nonneg(j, "j")?;
            Ok(half_kernel_dual(spec, 1.0)?.x(i, j).d)
        }
        PgfTarget::FullLine(spec) => {
            spec.ensure_valid()?;
            let r = dual_roots(&spec.interior, 1.0)?;
            let d = j - i;
            Ok(if d <= 0 {
                (r.zeta * r.xi1.ipow(d)).d
            } else {
                (r.zeta * r.xi2.ipow(d)).d
            })
        }
    }
}
