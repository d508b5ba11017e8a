//! Closed-form displays for walks with an interior barrier. Several leave
//! some symbols ambiguous, so each takes a reading that pins them down; [`crate::gate`] decides which
//! readings, if any, agree with the boundary systems.

use serde::{Deserialize, Serialize};

use crate::characteristic::roots_at;
use crate::error::{Error, Result};
use crate::walk_model::{ModifiedFiniteSpec, ModifiedFullLineSpec, ModifiedHalfLineSpec, PqrsParams};

/// Quantities shared by the finite-interval display.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModifiedFiniteIntermediates {
    pub lambda1: f64,
    pub lambda2: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub t1: f64,
    pub t2: f64,
    pub t: f64,
    pub u1: f64,
    pub u2: f64,
    pub u: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub mu1: f64,
    pub mu2: f64,
    n: i64,
    m: i64,
    i0: i64,
    p2: f64,
    q2: f64,
    r2: f64,
}

/// How the ambiguous parts of the finite display are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteReading {
    /// `x_M` carries `λ1^{−1}` instead of `λ1`.
    pub lambda_inverse: bool,
    /// The `q_M φ_{M−1}/(q_2 φ_M)` term sits outside the `ξ_i^{−M}` bracket of `μ_i`.
    pub phi_outside_mu: bool,
}

impl FiniteReading {
    pub const LITERAL: Self = Self {
        lambda_inverse: false,
        phi_outside_mu: false,
    };

    pub fn all() -> [Self; 4] {
        [
            Self::LITERAL,
            Self {
                lambda_inverse: true,
                phi_outside_mu: false,
            },
            Self {
                lambda_inverse: false,
                phi_outside_mu: true,
            },
            Self {
                lambda_inverse: true,
                phi_outside_mu: true,
            },
        ]
    }

    pub fn name(&self) -> String {
        format!(
            "{}{}",
            if self.lambda_inverse { "inverse-lambda" } else { "lambda" },
            if self.phi_outside_mu { "/phi-outside-mu" } else { "/phi-inside-mu" }
        )
    }
}

impl ModifiedFiniteIntermediates {
    /// Intermediates from the regimes' roots.
    pub fn new(spec: &ModifiedFiniteSpec, i0: i64, reading: FiniteReading) -> Result<Self> {
        let r1 = roots_at(&spec.right_regime, 1.0)?;
        let r2 = roots_at(&spec.left_regime, 1.0)?;
        let lambda2 = spec.left_regime.q * (r2.xi1 - r2.xi2);
        Ok(Self::with_roots(
            spec,
            i0,
            (r1.xi1, r1.xi2),
            (r2.xi1, r2.xi2),
            r1.lambda,
            lambda2,
            reading,
        ))
    }

    /// Intermediates from explicitly supplied roots and `λ1`, for the
    /// special cases whose roots are stated rather than computed.
    pub fn with_roots(
        spec: &ModifiedFiniteSpec,
        i0: i64,
        xi: (f64, f64),
        eta: (f64, f64),
        lambda1: f64,
        lambda2: f64,
        reading: FiniteReading,
    ) -> Self {
        let PqrsParams { p: p1, q: q1, r: r1, .. } = spec.right_regime;
        let PqrsParams { p: p2, q: q2, r: r2, .. } = spec.left_regime;
        let (p0, r0) = (spec.left.fwd, spec.left.hold);
        let (qn, rn) = (spec.right.bwd, spec.right.hold);
        let (pm, qm, rm) = (spec.barrier.fwd, spec.barrier.bwd, spec.barrier.hold);
        let (n, m) = (spec.n, spec.m);
        let t1 = p2 * (1.0 - r0) - p0 * q2 * eta.0;
        let t2 = p2 * (1.0 - r0) - p0 * q2 * eta.1;
        let t = t1 / t2;
        let ufn = |x: f64| x.powi((n - 1) as i32) * (q1 * (1.0 - rn) * x - p1 * qn);
        let u1 = ufn(xi.0);
        let u2 = ufn(xi.1);
        let u = u1 / u2;
        let mut out = Self {
            lambda1,
            lambda2,
            xi1: xi.0,
            xi2: xi.1,
            eta1: eta.0,
            eta2: eta.1,
            t1,
            t2,
            t,
            u1,
            u2,
            u,
            gamma1: 0.0,
            gamma2: 0.0,
            mu1: 0.0,
            mu2: 0.0,
            n,
            m,
            i0,
            p2,
            q2,
            r2,
        };
        let b_next = out.beta(i0 + 1);
        let gamma = |x: f64| x.powi(-i0 as i32) * (r1 - 1.0 + q1 * (b_next + x));
        out.gamma1 = gamma(xi.0);
        out.gamma2 = gamma(xi.1);
        let ratio = p2 * qm * out.phi(m - 1) / (q2 * out.phi(m));
        let mu = |x: f64| {
            let head = 1.0 - rm - pm / x;
            if reading.phi_outside_mu {
                x.powi(-m as i32) * head - ratio
            } else {
                x.powi(-m as i32) * (head - ratio)
            }
        };
        out.mu1 = mu(xi.0);
        out.mu2 = mu(xi.1);
        out
    }

    /// `φ_n = η1^n − tη2^n`.
    pub fn phi(&self, n: i64) -> f64 {
        self.eta1.powi(n as i32) - self.t * self.eta2.powi(n as i32)
    }

    /// `β_n = (ξ1^n − uξ2^n)/(ξ1^{i0} − uξ2^{i0})`.
    pub fn beta(&self, n: i64) -> f64 {
        (self.xi1.powi(n as i32) - self.u * self.xi2.powi(n as i32))
            / (self.xi1.powi(self.i0 as i32) - self.u * self.xi2.powi(self.i0 as i32))
    }

    /// Residual of the left-regime recurrence satisfied by `φ`.
    pub fn phi_residual(&self, n: i64) -> f64 {
        self.q2 * self.phi(n + 1) - (1.0 - self.r2) * self.phi(n) + self.p2 * self.phi(n - 1)
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn m(&self) -> i64 {
        self.m
    }
}

fn require_right_start(spec: &ModifiedFiniteSpec, i0: i64) -> Result<()> {
    if !(spec.m < i0 && i0 < spec.n) {
        return Err(Error::Precondition(format!(
            "the display covers M < i0 < N, got i0 = {i0}, M = {}, N = {}",
            spec.m, spec.n
        )));
    }
    Ok(())
}

/// Six-case occupancy profile on `[0, N]` for `M < i0 < N`.
pub fn finite_display(spec: &ModifiedFiniteSpec, i0: i64, reading: FiniteReading) -> Result<Vec<f64>> {
    require_right_start(spec, i0)?;
    let it = ModifiedFiniteIntermediates::new(spec, i0, reading)?;
    Ok(finite_display_from(spec, &it, reading))
}

pub(crate) fn finite_display_from(spec: &ModifiedFiniteSpec, it: &ModifiedFiniteIntermediates, reading: FiniteReading) -> Vec<f64> {
    let (n, m, i0) = (spec.n, spec.m, it.i0);
    let (p1, q1) = (spec.right_regime.p, spec.right_regime.q);
    let (p2, q2) = (spec.left_regime.p, spec.left_regime.q);
    let p0 = spec.left.fwd;
    let qm = spec.barrier.bwd;
    let qn = spec.right.bwd;
    let den = it.gamma1 * it.mu2 - it.gamma2 * it.mu1;
    let lam = if reading.lambda_inverse {
        1.0 / it.lambda1
    } else {
        it.lambda1
    };
    let scale = (q1 / p1).powi(i0 as i32);
    let xm = lam * scale / den;
    let mut xs = vec![0.0; (n + 1) as usize];
    xs[0] = p2 * qm * it.phi(0) / (p0 * q2 * it.phi(m)) * xm;
    for k in 1..m {
        xs[k as usize] = qm * it.phi(k) / (q2 * it.phi(m)) * xm;
    }
    xs[m as usize] = xm;
    for k in m + 1..=i0 {
        xs[k as usize] =
            scale * (it.mu1 * it.xi1.powi(k as i32) - it.mu2 * it.xi2.powi(k as i32)) / den;
    }
    let at_start = xs[i0 as usize];
    for k in i0 + 1..n {
        xs[k as usize] = it.beta(k) * at_start;
    }
    xs[n as usize] = q1 / qn * it.beta(n) * at_start;
    xs
}

/// Readings of the asymmetric special case (`r = s = 0`, `p ≠ q`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AsymmetricReading {
    /// `ξ1 = η1 = p/q`, `ξ2 = η2 = 1`, `λ = |p − q|`.
    AsStated,
    /// Same labels with `λ = p − q` carrying its sign.
    SignedLambda,
    /// Roots ordered larger first and `λ = |p − q|`.
    OrderedRoots,
}

impl AsymmetricReading {
    pub fn all() -> [Self; 3] {
        [Self::AsStated, Self::SignedLambda, Self::OrderedRoots]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::AsStated => "as-stated",
            Self::SignedLambda => "signed-lambda",
            Self::OrderedRoots => "ordered-roots",
        }
    }
}

pub fn asymmetric_profile(spec: &ModifiedFiniteSpec, i0: i64, reading: AsymmetricReading) -> Result<Vec<f64>> {
    require_right_start(spec, i0)?;
    let PqrsParams { p, q, .. } = spec.right_regime;
    let a = p / q;
    let (roots, lambda) = match reading {
        AsymmetricReading::AsStated => ((a, 1.0), (p - q).abs()),
        AsymmetricReading::SignedLambda => ((a, 1.0), p - q),
        AsymmetricReading::OrderedRoots => ((a.max(1.0), a.min(1.0)), (p - q).abs()),
    };
    let it = ModifiedFiniteIntermediates::with_roots(
        spec,
        i0,
        roots,
        roots,
        lambda,
        lambda,
        FiniteReading::LITERAL,
    );
    Ok(finite_display_from(spec, &it, FiniteReading::LITERAL))
}

/// `Ω`, `θ` and the affine `k` of the simple symmetric case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricSpecialIntermediates {
    pub omega: f64,
    pub theta: f64,
    pub p_m: f64,
    pub m: i64,
}

impl SymmetricSpecialIntermediates {
    pub fn new(spec: &ModifiedFiniteSpec) -> Self {
        let (p0, s0) = (spec.left.fwd, spec.left.absorb);
        let (qn, sn) = (spec.right.bwd, spec.right.absorb);
        let (pm, qm, sm) = (spec.barrier.fwd, spec.barrier.bwd, spec.barrier.absorb);
        Self {
            omega: spec.n as f64 + qn / sn,
            theta: sm + qm / (spec.m as f64 + p0 / s0),
            p_m: pm,
            m: spec.m,
        }
    }

    pub fn k(&self, z: f64) -> f64 {
        self.p_m + self.theta * (z - self.m as f64)
    }
}

/// Linear profile for `p = q = 1/2`, `r = s = 0`, `M < i0 ≤ N`, `s0, sN > 0`.
pub fn symmetric_profile(spec: &ModifiedFiniteSpec, i0: i64) -> Result<Vec<f64>> {
    if !(spec.m < i0 && i0 <= spec.n) {
        return Err(Error::Precondition(format!("the display covers M < i0 ≤ N, got i0 = {i0}")));
    }
    if !(spec.left.absorb > 0.0 && spec.right.absorb > 0.0) {
        return Err(Error::Precondition("the display needs s0 > 0 and sN > 0".into()));
    }
    let it = SymmetricSpecialIntermediates::new(spec);
    let (n, m) = (spec.n, spec.m);
    let (p0, s0) = (spec.left.fwd, spec.left.absorb);
    let (qm, sn) = (spec.barrier.bwd, spec.right.absorb);
    let om = it.omega;
    let ko = it.k(om);
    let i0f = i0 as f64;
    let mf = m as f64;
    let mut xs = vec![0.0; (n + 1) as usize];
    xs[0] = qm * (om - i0f) / ((p0 + mf * s0) * ko);
    for k in 1..m {
        xs[k as usize] = 2.0 * qm * (k as f64 + p0 / s0) * (om - i0f) / ((mf + p0 / s0) * ko);
    }
    xs[m as usize] = (om - i0f) / ko;
    for k in m + 1..=i0 {
        xs[k as usize] = 2.0 * (om - i0f) * it.k(k as f64) / ko;
    }
    for k in i0..n {
        xs[k as usize] = 2.0 * (om - k as f64) * it.k(i0f) / ko;
    }
    xs[n as usize] = it.k(i0f) / (sn * ko);
    Ok(xs)
}

/// `σ_k`, `α_M` and the boundary factors of the half-line time display.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModifiedHalfLineIntermediates {
    pub sigma1: f64,
    pub sigma2: f64,
    pub alpha_m: f64,
    pub v1: f64,
    pub v2: f64,
}

/// Readings of the left branch of the half-line time display.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfLineTimeReading {
    /// Use the left regime's roots `η` where the display writes `ξ`.
    pub left_roots: bool,
    /// Use `η1` inside `α_M`.
    pub alpha_left_root: bool,
    /// Read the unsubscripted `p, q` as `p1, q1` instead of `p2, q2`.
    pub right_pq: bool,
}

impl HalfLineTimeReading {
    pub fn all() -> Vec<Self> {
        let mut out = Vec::new();
        for left_roots in [false, true] {
            for alpha_left_root in [false, true] {
                for right_pq in [false, true] {
                    out.push(Self {
                        left_roots,
                        alpha_left_root,
                        right_pq,
                    });
                }
            }
        }
        out
    }

    pub fn name(&self) -> String {
        format!(
            "roots={}/alpha={}/pq={}",
            if self.left_roots { "eta" } else { "xi" },
            if self.alpha_left_root { "eta1" } else { "xi1" },
            if self.right_pq { "p1q1" } else { "p2q2" }
        )
    }
}

impl ModifiedHalfLineIntermediates {
    pub fn new(spec: &ModifiedHalfLineSpec, reading: HalfLineTimeReading) -> Result<Self> {
        let r1 = roots_at(&spec.right_regime, 1.0)?;
        let r2 = roots_at(&spec.left_regime, 1.0)?;
        let (x1, x2) = if reading.left_roots {
            (r2.xi1, r2.xi2)
        } else {
            (r1.xi1, r1.xi2)
        };
        let a1 = if reading.alpha_left_root { r2.xi1 } else { r1.xi1 };
        let b = &spec.barrier;
        let (p0, r0) = (spec.left.fwd, spec.left.hold);
        Ok(Self {
            sigma1: spec.right_regime.sigma(),
            sigma2: spec.left_regime.sigma(),
            alpha_m: 1.0 - b.hold - b.fwd * a1.powi(spec.m as i32),
            v1: p0 - (1.0 - r0) * x1,
            v2: p0 - (1.0 - r0) * x2,
        })
    }
}

/// Left branch (`0 ≤ i ≤ M`) of the half-line absorption-time display.
pub fn halfline_time_left(spec: &ModifiedHalfLineSpec, i: i64, reading: HalfLineTimeReading) -> Result<f64> {
    if !(0..=spec.m).contains(&i) {
        return Err(Error::Precondition(format!("left branch covers 0 ≤ i ≤ M, got {i}")));
    }
    let it = ModifiedHalfLineIntermediates::new(spec, reading)?;
    let r1 = roots_at(&spec.right_regime, 1.0)?;
    let r2 = roots_at(&spec.left_regime, 1.0)?;
    let (x1, x2) = if reading.left_roots {
        (r2.xi1, r2.xi2)
    } else {
        (r1.xi1, r1.xi2)
    };
    let (p, q) = if reading.right_pq {
        (spec.right_regime.p, spec.right_regime.q)
    } else {
        (spec.left_regime.p, spec.left_regime.q)
    };
    let m = spec.m;
    let (p0, r0, s0) = (spec.left.fwd, spec.left.hold, spec.left.absorb);
    let b = &spec.barrier;
    let (sg1, sg2, am) = (it.sigma1, it.sigma2, it.alpha_m);
    let pw = |x: f64, e: i64| x.powi(e as i32);
    let num = q
        * (1.0 - (1.0 + sg2) * s0)
        * pw(q / p, i - 1)
        * (am * (pw(x1, i - m) - pw(x2, i - m)) - b.bwd * (pw(x1, i - m + 1) - pw(x2, i - m + 1)))
        + q * (1.0 - (1.0 + sg2) * b.absorb + b.fwd * (sg1 - sg2) * (1.0 - pw(x1, m)))
            * (it.v1 * pw(x2, 1 - i) - it.v2 * pw(x1, 1 - i));
    let den = p * (1.0 - r0) * am * (pw(x1, -m) - pw(x2, -m))
        + q * (p0 * am + (1.0 - r0) * b.bwd) * (pw(x1, 1 - m) - pw(x2, 1 - m))
        + q * p0 * b.bwd * (pw(x1, 2 - m) - pw(x2, 2 - m));
    Ok(sg2 + num / den)
}

/// Right branch `σ1 + (m_M − σ1)ξ1^{M−i}` for `i ≥ M`.
pub fn halfline_time_right(spec: &ModifiedHalfLineSpec, i: i64, m_at_barrier: f64) -> Result<f64> {
    if i < spec.m {
        return Err(Error::Precondition(format!("right branch covers i ≥ M, got {i}")));
    }
    let r1 = roots_at(&spec.right_regime, 1.0)?;
    let s1 = spec.right_regime.sigma();
    Ok(s1 + (m_at_barrier - s1) * r1.xi1.powi((spec.m - i) as i32))
}

/// `τ_{i,n}` of the full-line display.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModifiedFullLineIntermediates {
    pub xi1: f64,
    pub xi2: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub lambda1: f64,
    coef: f64,
    p0: f64,
}

impl ModifiedFullLineIntermediates {
    pub fn new(spec: &ModifiedFullLineSpec) -> Result<Self> {
        let r1 = roots_at(&spec.pos_regime, 1.0)?;
        let r2 = roots_at(&spec.neg_regime, 1.0)?;
        let o = &spec.origin;
        let coef = 1.0 - o.hold - spec.neg_regime.p * o.bwd / (spec.neg_regime.q * r2.xi1);
        Ok(Self {
            xi1: r1.xi1,
            xi2: r1.xi2,
            eta1: r2.xi1,
            eta2: r2.xi2,
            lambda1: r1.lambda,
            coef,
            p0: o.fwd,
        })
    }

    /// `τ_{i,n}` for `i ∈ {1, 2}`.
    pub fn tau(&self, i: u8, n: i64) -> f64 {
        let x = if i == 1 { self.xi1 } else { self.xi2 };
        (self.coef - self.p0 / x) * x.powi(n as i32)
    }
}

/// Four-case occupancy for a start `i0 ≥ 0` on the line.
pub fn fullline_display_at(spec: &ModifiedFullLineSpec, it: &ModifiedFullLineIntermediates, i0: i64, n: i64) -> f64 {
    let (q0, q2) = (spec.origin.bwd, spec.neg_regime.q);
    let t1 = it.tau(1, i0);
    if n < 0 {
        q0 * it.eta1.powi(n as i32) / (q2 * t1)
    } else if n == 0 {
        1.0 / t1
    } else if n <= i0 {
        (it.xi1.powi((n - i0) as i32) - it.tau(2, n) / t1) / it.lambda1
    } else {
        it.xi2.powi((n - i0) as i32) * (1.0 - it.tau(2, i0) / t1) / it.lambda1
    }
}

/// The simpler form for a start at the origin.
pub fn fullline_origin_display_at(spec: &ModifiedFullLineSpec, it: &ModifiedFullLineIntermediates, n: i64) -> f64 {
    let (q0, q2) = (spec.origin.bwd, spec.neg_regime.q);
    let (p0, p1) = (spec.origin.fwd, spec.pos_regime.p);
    let t1 = it.tau(1, 0);
    if n < 0 {
        q0 * it.eta1.powi(n as i32) / (q2 * t1)
    } else if n == 0 {
        1.0 / t1
    } else {
        p0 * it.xi2.powi(n as i32) / (p1 * t1)
    }
}

/// Readings of the two-sided time display.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FullLineTimeReading {
    /// `ξ2` on the negative side and in the denominator.
    Literal,
    /// The negative regime's `η2` in both places.
    LeftRoot,
    /// Re-derived from the origin balance equation: `η2` throughout, and
    /// coefficients `1 − s0/s_k` plus the cross term of the other side.
    Corrected,
}

impl FullLineTimeReading {
    pub fn all() -> [Self; 3] {
        [Self::Literal, Self::LeftRoot, Self::Corrected]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Literal => "literal",
            Self::LeftRoot => "left-root",
            Self::Corrected => "corrected",
        }
    }
}

pub fn fullline_time_display(spec: &ModifiedFullLineSpec, i: i64, reading: FullLineTimeReading) -> Result<f64> {
    let r1 = roots_at(&spec.pos_regime, 1.0)?;
    let r2 = roots_at(&spec.neg_regime, 1.0)?;
    let x2 = match reading {
        FullLineTimeReading::Literal => r1.xi2,
        FullLineTimeReading::LeftRoot | FullLineTimeReading::Corrected => r2.xi2,
    };
    let o = &spec.origin;
    let (s1, s2) = (spec.pos_regime.sigma(), spec.neg_regime.sigma());
    let den = o.absorb + o.fwd * (1.0 - 1.0 / r1.xi1) + o.bwd * (1.0 - x2);
    if reading == FullLineTimeReading::Corrected {
        let (a1, a2) = (spec.pos_regime.s, spec.neg_regime.s);
        return Ok(if i <= 0 {
            let b = 1.0 - o.absorb / a2 + (s1 - s2) * o.fwd * (1.0 - 1.0 / r1.xi1);
            s2 + b / den * x2.powi(-i as i32)
        } else {
            let a = 1.0 - o.absorb / a1 + (s2 - s1) * o.bwd * (1.0 - x2);
            s1 + a / den * r1.xi1.powi(-i as i32)
        });
    }
    Ok(if i <= 0 {
        ((s2 - s1) * o.fwd * (1.0 - 1.0 / r1.xi1) - s2 * o.absorb) / den * x2.powi(-i as i32) + s2
    } else {
        ((s2 - s1) * o.bwd * (1.0 - x2) - s1 * o.absorb) / den * r1.xi1.powi(-i as i32) + s1
    })
}

/// Absorption at the origin and escape to `±∞` when neither side absorbs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapeProbabilities {
    pub absorbed: f64,
    pub plus: f64,
    pub minus: f64,
}

impl EscapeProbabilities {
    pub fn total(&self) -> f64 {
        self.absorbed + self.plus + self.minus
    }
}

/// Closed forms for `p1 > q1` with `p2 > q2` or `p2 < q2`, start `i0 ≥ 0`.
pub fn escape_probabilities(spec: &ModifiedFullLineSpec, i0: i64) -> Result<EscapeProbabilities> {
    let (p1, q1) = (spec.pos_regime.p, spec.pos_regime.q);
    let (p2, q2) = (spec.neg_regime.p, spec.neg_regime.q);
    let o = &spec.origin;
    if i0 < 0 {
        return Err(Error::Precondition(format!("escape formulas need i0 ≥ 0, got {i0}")));
    }
    if p1 <= q1 {
        return Err(Error::UnsupportedCase(
            "p1 ≤ q1: the right side is recurrent or drifts to the origin; no closed form covers it".into(),
        ));
    }
    let lift = (p1 / q1).powi(i0 as i32);
    let right = o.fwd * (1.0 - q1 / p1);
    if p2 > q2 {
        let absorbed = o.absorb / ((o.absorb + right) * lift);
        Ok(EscapeProbabilities {
            absorbed,
            plus: 1.0 - absorbed,
            minus: 0.0,
        })
    } else if p2 < q2 {
        let left = o.bwd * (1.0 - p2 / q2);
        let d = (o.absorb + right + left) * lift;
        Ok(EscapeProbabilities {
            absorbed: o.absorb / d,
            plus: 1.0 - (o.absorb + left) / d,
            minus: left / d,
        })
    } else {
        Err(Error::UnsupportedCase(
            "p2 = q2: only p2 > q2 and p2 < q2 have closed forms".into(),
        ))
    }
}
