//! Walk-instance descriptions shared by the analytic and oracle modules.
//!
//! Every state carries four probabilities: step forward (+1), step backward
//! (-1), hold, and absorb. A homogeneous stretch of states uses one
//! [`PqrsParams`] regime; special states (the ends of an interval and the
//! interior barrier `M`) use [`MfbParams`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on probability sums.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Default bound on `N` and `M` so that dense oracles stay feasible.
pub const DEFAULT_STATE_CAP: i64 = 1_000_000;

/// One step regime: forward `p`, backward `q`, hold `r`, absorb `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PqrsParams {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
}

impl PqrsParams {
    pub const fn new(p: f64, q: f64, r: f64, s: f64) -> Self {
        Self { p, q, r, s }
    }

    /// The regime with all four probabilities equal to 1/4.
    pub const fn uniform() -> Self {
        Self::new(0.25, 0.25, 0.25, 0.25)
    }

    /// Mirror image: forward and backward exchanged.
    pub fn mirrored(&self) -> Self {
        Self::new(self.q, self.p, self.r, self.s)
    }

    pub fn site(&self) -> Site {
        Site {
            fwd: self.p,
            bwd: self.q,
            hold: self.r,
            absorb: self.s,
        }
    }

    /// `(1-s)/s`, the mean number of transitions of a geometric lifetime.
    pub fn sigma(&self) -> f64 {
        (1.0 - self.s) / self.s
    }

    fn check(&self, path: &str, report: &mut ValidationReport) {
        check_four(path, ["p", "q", "r", "s"], [self.p, self.q, self.r, self.s], report);
    }
}

/// Which position a multiple function barrier occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BarrierRole {
    LeftEnd,
    Interior,
    RightEnd,
}

/// Probabilities at a multiple function barrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MfbParams {
    pub fwd: f64,
    pub bwd: f64,
    pub hold: f64,
    pub absorb: f64,
    pub role: BarrierRole,
}

impl MfbParams {
    /// Left end of an interval; cannot step backward.
    pub const fn left(fwd: f64, hold: f64, absorb: f64) -> Self {
        Self {
            fwd,
            bwd: 0.0,
            hold,
            absorb,
            role: BarrierRole::LeftEnd,
        }
    }

    /// Right end of an interval; cannot step forward.
    pub const fn right(bwd: f64, hold: f64, absorb: f64) -> Self {
        Self {
            fwd: 0.0,
            bwd,
            hold,
            absorb,
            role: BarrierRole::RightEnd,
        }
    }

    pub const fn interior(fwd: f64, bwd: f64, hold: f64, absorb: f64) -> Self {
        Self {
            fwd,
            bwd,
            hold,
            absorb,
            role: BarrierRole::Interior,
        }
    }

    pub fn site(&self) -> Site {
        Site {
            fwd: self.fwd,
            bwd: self.bwd,
            hold: self.hold,
            absorb: self.absorb,
        }
    }

    /// Mirror image; end roles swap.
    pub fn mirrored(&self) -> Self {
        let role = match self.role {
            BarrierRole::LeftEnd => BarrierRole::RightEnd,
            BarrierRole::RightEnd => BarrierRole::LeftEnd,
            BarrierRole::Interior => BarrierRole::Interior,
        };
        Self {
            fwd: self.bwd,
            bwd: self.fwd,
            hold: self.hold,
            absorb: self.absorb,
            role,
        }
    }

    fn check(&self, path: &str, expected: BarrierRole, report: &mut ValidationReport) {
        check_four(
            path,
            ["fwd", "bwd", "hold", "absorb"],
            [self.fwd, self.bwd, self.hold, self.absorb],
            report,
        );
        if self.role != expected {
            report.push(
                format!("{path}.role"),
                format!("expected {expected:?}, found {:?}", self.role),
            );
        }
        match expected {
            BarrierRole::LeftEnd if self.bwd != 0.0 => {
                report.push(format!("{path}.bwd"), "left end must have bwd = 0")
            }
            BarrierRole::RightEnd if self.fwd != 0.0 => {
                report.push(format!("{path}.fwd"), "right end must have fwd = 0")
            }
            _ => {}
        }
    }
}

/// Transition probabilities out of a single state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub fwd: f64,
    pub bwd: f64,
    pub hold: f64,
    pub absorb: f64,
}

/// Which subset of the integers the walk lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Finite,
    HalfLine,
    FullLine,
}

/// Plain walk on `[0, N]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteWalkSpec {
    pub n: i64,
    pub interior: PqrsParams,
    pub left: MfbParams,
    pub right: MfbParams,
}

/// Plain walk on `[0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfLineWalkSpec {
    pub interior: PqrsParams,
    pub left: MfbParams,
}

/// Plain walk on the integers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullLineWalkSpec {
    pub interior: PqrsParams,
}

/// Walk on `[0, N]` with regime `left_regime` on `(0, M)` and `right_regime`
/// on `(M, N)`, and barriers at 0, `M` and `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModifiedFiniteSpec {
    pub n: i64,
    pub m: i64,
    pub right_regime: PqrsParams,
    pub left_regime: PqrsParams,
    pub left: MfbParams,
    pub barrier: MfbParams,
    pub right: MfbParams,
}

/// Walk on `[0, ∞)` with regime `left_regime` on `(0, M)` and `right_regime`
/// beyond `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModifiedHalfLineSpec {
    pub m: i64,
    pub right_regime: PqrsParams,
    pub left_regime: PqrsParams,
    pub left: MfbParams,
    pub barrier: MfbParams,
}

/// Walk on the integers with `pos_regime` on the positive integers,
/// `neg_regime` on the negative integers and a barrier at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModifiedFullLineSpec {
    pub pos_regime: PqrsParams,
    pub neg_regime: PqrsParams,
    pub origin: MfbParams,
}

/// Any walk instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WalkSpec {
    Finite(FiniteWalkSpec),
    HalfLine(HalfLineWalkSpec),
    FullLine(FullLineWalkSpec),
    ModifiedFinite(ModifiedFiniteSpec),
    ModifiedHalfLine(ModifiedHalfLineSpec),
    ModifiedFullLine(ModifiedFullLineSpec),
}

/// State-indexed transition structure of a walk.
pub trait Lattice {
    fn site(&self, n: i64) -> Site;
    /// Smallest state, or `None` when unbounded below.
    fn lower(&self) -> Option<i64>;
    /// Largest state, or `None` when unbounded above.
    fn upper(&self) -> Option<i64>;

    fn contains(&self, n: i64) -> bool {
        self.lower().is_none_or(|lo| n >= lo) && self.upper().is_none_or(|hi| n <= hi)
    }
}

impl Lattice for FiniteWalkSpec {
    fn site(&self, n: i64) -> Site {
        if n == 0 {
            self.left.site()
        } else if n == self.n {
            self.right.site()
        } else {
            self.interior.site()
        }
    }
    fn lower(&self) -> Option<i64> {
        Some(0)
    }
    fn upper(&self) -> Option<i64> {
        Some(self.n)
    }
}

impl Lattice for HalfLineWalkSpec {
    fn site(&self, n: i64) -> Site {
        if n == 0 {
            self.left.site()
        } else {
            self.interior.site()
        }
    }
    fn lower(&self) -> Option<i64> {
        Some(0)
    }
    fn upper(&self) -> Option<i64> {
        None
    }
}

impl Lattice for FullLineWalkSpec {
    fn site(&self, _n: i64) -> Site {
        self.interior.site()
    }
    fn lower(&self) -> Option<i64> {
        None
    }
    fn upper(&self) -> Option<i64> {
        None
    }
}

impl Lattice for ModifiedFiniteSpec {
    fn site(&self, n: i64) -> Site {
        match n {
            0 => self.left.site(),
            n if n == self.m => self.barrier.site(),
            n if n == self.n => self.right.site(),
            n if n < self.m => self.left_regime.site(),
            _ => self.right_regime.site(),
        }
    }
    fn lower(&self) -> Option<i64> {
        Some(0)
    }
    fn upper(&self) -> Option<i64> {
        Some(self.n)
    }
}

impl Lattice for ModifiedHalfLineSpec {
    fn site(&self, n: i64) -> Site {
        match n {
            0 => self.left.site(),
            n if n == self.m => self.barrier.site(),
            n if n < self.m => self.left_regime.site(),
            _ => self.right_regime.site(),
        }
    }
    fn lower(&self) -> Option<i64> {
        Some(0)
    }
    fn upper(&self) -> Option<i64> {
        None
    }
}

impl Lattice for ModifiedFullLineSpec {
    fn site(&self, n: i64) -> Site {
        match n.signum() {
            0 => self.origin.site(),
            1 => self.pos_regime.site(),
            _ => self.neg_regime.site(),
        }
    }
    fn lower(&self) -> Option<i64> {
        None
    }
    fn upper(&self) -> Option<i64> {
        None
    }
}

impl Lattice for WalkSpec {
    fn site(&self, n: i64) -> Site {
        match self {
            WalkSpec::Finite(s) => s.site(n),
            WalkSpec::HalfLine(s) => s.site(n),
            WalkSpec::FullLine(s) => s.site(n),
            WalkSpec::ModifiedFinite(s) => s.site(n),
            WalkSpec::ModifiedHalfLine(s) => s.site(n),
            WalkSpec::ModifiedFullLine(s) => s.site(n),
        }
    }
    fn lower(&self) -> Option<i64> {
        match self {
            WalkSpec::FullLine(_) | WalkSpec::ModifiedFullLine(_) => None,
            _ => Some(0),
        }
    }
    fn upper(&self) -> Option<i64> {
        match self {
            WalkSpec::Finite(s) => Some(s.n),
            WalkSpec::ModifiedFinite(s) => Some(s.n),
            _ => None,
        }
    }
}

impl WalkSpec {
    pub fn domain(&self) -> Domain {
        match self {
            WalkSpec::Finite(_) | WalkSpec::ModifiedFinite(_) => Domain::Finite,
            WalkSpec::HalfLine(_) | WalkSpec::ModifiedHalfLine(_) => Domain::HalfLine,
            WalkSpec::FullLine(_) | WalkSpec::ModifiedFullLine(_) => Domain::FullLine,
        }
    }

    pub fn is_modified(&self) -> bool {
        matches!(
            self,
            WalkSpec::ModifiedFinite(_) | WalkSpec::ModifiedHalfLine(_) | WalkSpec::ModifiedFullLine(_)
        )
    }
}

/// One violated invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Dotted path of the offending field, e.g. `interior.p`.
    pub path: String,
    pub message: String,
}

/// Outcome of validating a walk description.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            path: path.into(),
            message: message.into(),
        });
    }

    /// True when some violation mentions `needle` in its message.
    pub fn mentions(&self, needle: &str) -> bool {
        self.violations.iter().any(|v| v.message.contains(needle))
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(Error::Invalid(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{}: {}", v.path, v.message)?;
        }
        Ok(())
    }
}

/// Knobs for [`Validate::validate_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    /// Upper bound on `N` and `M`.
    pub state_cap: i64,
    /// Require `s > 0` in every interior regime of a finite walk instead of
    /// only requiring that absorption is certain.
    pub require_interior_absorption: bool,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            state_cap: DEFAULT_STATE_CAP,
            require_interior_absorption: false,
        }
    }
}

/// Report-style validation; never fails abnormally.
pub trait Validate {
    fn validate_with(&self, opts: &ValidationOptions) -> ValidationReport;

    fn validate(&self) -> ValidationReport {
        self.validate_with(&ValidationOptions::default())
    }

    fn ensure_valid(&self) -> Result<()> {
        self.validate().into_result()
    }
}

fn check_four(path: &str, names: [&str; 4], vals: [f64; 4], report: &mut ValidationReport) {
    let mut finite = true;
    for (name, v) in names.iter().zip(vals) {
        if !v.is_finite() {
            report.push(format!("{path}.{name}"), "must be finite");
            finite = false;
        } else if v < 0.0 {
            report.push(format!("{path}.{name}"), "must be ≥ 0");
        }
    }
    if finite {
        let sum: f64 = vals.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            report.push(path.to_string(), format!("sum ≠ 1 (sum = {sum})"));
        }
    }
}

fn require_pqs(path: &str, params: &PqrsParams, report: &mut ValidationReport) {
    if !(params.p > 0.0 && params.q > 0.0 && params.s > 0.0) {
        report.push(path.to_string(), "pqs > 0 required");
    }
}

fn require_pq(path: &str, params: &PqrsParams, report: &mut ValidationReport) {
    if !(params.p > 0.0 && params.q > 0.0) {
        report.push(path.to_string(), "pq > 0 required");
    }
}

fn check_cap(path: &str, value: i64, opts: &ValidationOptions, report: &mut ValidationReport) {
    if value > opts.state_cap {
        report.push(
            path.to_string(),
            format!("{value} exceeds the state cap {}", opts.state_cap),
        );
    }
}

impl Validate for PqrsParams {
    fn validate_with(&self, _opts: &ValidationOptions) -> ValidationReport {
        let mut report = ValidationReport::default();
        self.check("params", &mut report);
        report
    }
}

impl Validate for FiniteWalkSpec {
    fn validate_with(&self, opts: &ValidationOptions) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.n < 2 {
            report.push("N", "N ≥ 2 required");
        }
        check_cap("N", self.n, opts, &mut report);
        self.interior.check("interior", &mut report);
        require_pq("interior", &self.interior, &mut report);
        self.left.check("barriers.0", BarrierRole::LeftEnd, &mut report);
        self.right.check("barriers.N", BarrierRole::RightEnd, &mut report);
        if opts.require_interior_absorption && self.interior.s <= 0.0 {
            report.push("interior.s", "s > 0 required");
        }
        if !(self.interior.s > 0.0 || self.left.absorb + self.right.absorb > 0.0) {
            report.push("interior.s", "absorption is not certain (s = 0 and no absorbing end)");
        }
        report
    }
}

impl Validate for HalfLineWalkSpec {
    fn validate_with(&self, _opts: &ValidationOptions) -> ValidationReport {
        let mut report = ValidationReport::default();
        self.interior.check("interior", &mut report);
        require_pqs("interior", &self.interior, &mut report);
        self.left.check("barriers.0", BarrierRole::LeftEnd, &mut report);
        if !(self.left.fwd > 0.0 && self.left.absorb > 0.0) {
            report.push("barriers.0", "fwd·absorb > 0 required");
        }
        report
    }
}

impl Validate for FullLineWalkSpec {
    fn validate_with(&self, _opts: &ValidationOptions) -> ValidationReport {
        let mut report = ValidationReport::default();
        self.interior.check("interior", &mut report);
        require_pqs("interior", &self.interior, &mut report);
        report
    }
}

impl Validate for ModifiedFiniteSpec {
    fn validate_with(&self, opts: &ValidationOptions) -> ValidationReport {
        let mut report = ValidationReport::default();
        if !(0 < self.m && self.m < self.n) {
            report.push("M", "0 < M < N required");
        }
        check_cap("N", self.n, opts, &mut report);
        self.right_regime.check("right_regime", &mut report);
        self.left_regime.check("left_regime", &mut report);
        require_pq("right_regime", &self.right_regime, &mut report);
        require_pq("left_regime", &self.left_regime, &mut report);
        self.left.check("barriers.0", BarrierRole::LeftEnd, &mut report);
        self.barrier.check("barriers.M", BarrierRole::Interior, &mut report);
        self.right.check("barriers.N", BarrierRole::RightEnd, &mut report);
        if opts.require_interior_absorption
            && (self.left_regime.s <= 0.0 || self.right_regime.s <= 0.0)
        {
            report.push("right_regime.s", "s > 0 required in both regimes");
        }
        let absorbing = self.left_regime.s > 0.0
            || self.right_regime.s > 0.0
            || self.left.absorb + self.barrier.absorb + self.right.absorb > 0.0;
        if !absorbing {
            report.push("barriers", "absorption is not certain (no absorbing state)");
        }
        report
    }
}

impl Validate for ModifiedHalfLineSpec {
    fn validate_with(&self, opts: &ValidationOptions) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.m < 1 {
            report.push("M", "M ≥ 1 required");
        }
        check_cap("M", self.m, opts, &mut report);
        self.right_regime.check("right_regime", &mut report);
        self.left_regime.check("left_regime", &mut report);
        require_pqs("right_regime", &self.right_regime, &mut report);
        require_pqs("left_regime", &self.left_regime, &mut report);
        self.left.check("barriers.0", BarrierRole::LeftEnd, &mut report);
        self.barrier.check("barriers.M", BarrierRole::Interior, &mut report);
        report
    }
}

impl Validate for ModifiedFullLineSpec {
    fn validate_with(&self, _opts: &ValidationOptions) -> ValidationReport {
        let mut report = ValidationReport::default();
        self.pos_regime.check("right_regime", &mut report);
        self.neg_regime.check("left_regime", &mut report);
        require_pq("right_regime", &self.pos_regime, &mut report);
        require_pq("left_regime", &self.neg_regime, &mut report);
        self.origin.check("barriers.0", BarrierRole::Interior, &mut report);
        let general = self.pos_regime.s > 0.0 && self.neg_regime.s > 0.0;
        let escape_case =
            self.pos_regime.s == 0.0 && self.neg_regime.s == 0.0 && self.origin.absorb > 0.0;
        if !(general || escape_case) {
            report.push(
                "right_regime.s",
                "pqs > 0 required in both regimes (or s = 0 on both sides with an absorbing origin)",
            );
        }
        report
    }
}

impl Validate for WalkSpec {
    fn validate_with(&self, opts: &ValidationOptions) -> ValidationReport {
        match self {
            WalkSpec::Finite(s) => s.validate_with(opts),
            WalkSpec::HalfLine(s) => s.validate_with(opts),
            WalkSpec::FullLine(s) => s.validate_with(opts),
            WalkSpec::ModifiedFinite(s) => s.validate_with(opts),
            WalkSpec::ModifiedHalfLine(s) => s.validate_with(opts),
            WalkSpec::ModifiedFullLine(s) => s.validate_with(opts),
        }
    }
}

/// Relabeling `x ↦ N - x` of `[0, N]`. It is its own inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexMap {
    pub n: i64,
}

impl IndexMap {
    pub fn apply(&self, x: i64) -> i64 {
        self.n - x
    }

    pub fn compose(&self, other: &IndexMap) -> impl Fn(i64) -> i64 {
        let (a, b) = (*self, *other);
        move |x| a.apply(b.apply(x))
    }
}

/// Result of [`reflect_translate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reflection {
    pub spec: ModifiedFiniteSpec,
    pub start: i64,
    pub map: IndexMap,
}

/// Mirror `spec` through `x ↦ N - x`, with no precondition on the start.
pub fn mirror_finite(spec: &ModifiedFiniteSpec) -> ModifiedFiniteSpec {
    ModifiedFiniteSpec {
        n: spec.n,
        m: spec.n - spec.m,
        right_regime: spec.left_regime.mirrored(),
        left_regime: spec.right_regime.mirrored(),
        left: spec.right.mirrored(),
        barrier: spec.barrier.mirrored(),
        right: spec.left.mirrored(),
    }
}

/// Turn a start `0 < i0 < M` into the equivalent start `M' < i0' < N` of the
/// mirrored walk. State `x` of the original walk is state `map.apply(x)` of the
/// returned one.
pub fn reflect_translate(spec: &ModifiedFiniteSpec, i0: i64) -> Result<Reflection> {
    if !(0 < i0 && i0 < spec.m) {
        return Err(Error::Precondition(format!(
            "reflection needs 0 < i0 < M, got i0 = {i0}, M = {}",
            spec.m
        )));
    }
    let map = IndexMap { n: spec.n };
    Ok(Reflection {
        spec: mirror_finite(spec),
        start: map.apply(i0),
        map,
    })
}

/// Mirror a full-line walk through the origin (`x ↦ -x`).
pub fn mirror_full_line(spec: &ModifiedFullLineSpec) -> ModifiedFullLineSpec {
    ModifiedFullLineSpec {
        pos_regime: spec.neg_regime.mirrored(),
        neg_regime: spec.pos_regime.mirrored(),
        origin: spec.origin.mirrored(),
    }
}
