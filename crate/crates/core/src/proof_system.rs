//! Linear systems that glue homogeneous pieces together at special states.
//!
//! A walk is cut at its barriers (and, for occupancy, at the start state).
//! Between two cuts the parameters are constant, so the occupancy is a
//! combination of a growing and a decaying power of the regime's roots and
//! the absorption time is that plus a particular solution. The unknowns are
//! the values at the cuts and two coefficients per piece (one for a piece
//! that runs off to infinity, where only the bounded power is kept). The
//! equations are the balance equations at the cuts plus, for every piece
//! end, the condition that the piece's pattern continued one state past its
//! end reproduces the flow across the cut.
//!
//! For the modified walk on `[0, N]` with `M < i0 < N` this is exactly the
//! ten-equation system in unknowns `x_0, x_M, x_{i0}, x_N` and the three
//! coefficient pairs; on the half line it has eight unknowns because the
//! right piece keeps only its decaying power.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::characteristic::roots_at;
use crate::error::{Error, Result};
use crate::homogeneous::{Occupancy, Provenance};
use crate::walk_model::{
    Domain, FiniteWalkSpec, FullLineWalkSpec, HalfLineWalkSpec, Lattice, ModifiedFiniteSpec,
    ModifiedFullLineSpec, ModifiedHalfLineSpec, PqrsParams, Site,
};

/// A walk described as constant regimes separated by barrier states.
pub trait Segmented: Lattice {
    fn domain(&self) -> Domain;
    /// Barrier states, ascending.
    fn barriers(&self) -> Vec<i64>;
    /// Regime at a non-barrier state.
    fn regime(&self, n: i64) -> PqrsParams;
}

impl Segmented for FiniteWalkSpec {
    fn domain(&self) -> Domain {
        Domain::Finite
    }
    fn barriers(&self) -> Vec<i64> {
        vec![0, self.n]
    }
    fn regime(&self, _n: i64) -> PqrsParams {
        self.interior
    }
}

impl Segmented for HalfLineWalkSpec {
    fn domain(&self) -> Domain {
        Domain::HalfLine
    }
    fn barriers(&self) -> Vec<i64> {
        vec![0]
    }
    fn regime(&self, _n: i64) -> PqrsParams {
        self.interior
    }
}

impl Segmented for FullLineWalkSpec {
    fn domain(&self) -> Domain {
        Domain::FullLine
    }
    fn barriers(&self) -> Vec<i64> {
        Vec::new()
    }
    fn regime(&self, _n: i64) -> PqrsParams {
        self.interior
    }
}

impl Segmented for ModifiedFiniteSpec {
    fn domain(&self) -> Domain {
        Domain::Finite
    }
    fn barriers(&self) -> Vec<i64> {
        vec![0, self.m, self.n]
    }
    fn regime(&self, n: i64) -> PqrsParams {
        if n < self.m {
            self.left_regime
        } else {
            self.right_regime
        }
    }
}

impl Segmented for ModifiedHalfLineSpec {
    fn domain(&self) -> Domain {
        Domain::HalfLine
    }
    fn barriers(&self) -> Vec<i64> {
        vec![0, self.m]
    }
    fn regime(&self, n: i64) -> PqrsParams {
        if n < self.m {
            self.left_regime
        } else {
            self.right_regime
        }
    }
}

impl Segmented for ModifiedFullLineSpec {
    fn domain(&self) -> Domain {
        Domain::FullLine
    }
    fn barriers(&self) -> Vec<i64> {
        vec![0]
    }
    fn regime(&self, n: i64) -> PqrsParams {
        if n > 0 {
            self.pos_regime
        } else {
            self.neg_regime
        }
    }
}

/// Which quantity a system solves for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    Arrivals { start: i64 },
    AbsorptionTime,
}

/// Homogeneous solutions used on a piece.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    /// `growing^{n−hi}` and `decaying^{n−lo}`.
    Exponential { growing: f64, decaying: f64 },
    /// `1` and `(n − lo + 1)/(hi − lo + 2)`; used when the roots coincide.
    Linear,
}

/// Particular solution of the absorption-time recurrence on a piece.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Particular {
    None,
    /// `(1 − s)/s`.
    Constant(f64),
    /// `slope·(n − lo)`.
    Linear { slope: f64 },
    /// `coef·(n − lo)²`.
    Quadratic { coef: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PieceSolution {
    pub lo: Option<i64>,
    pub hi: Option<i64>,
    pub regime: PqrsParams,
    pub basis: Basis,
    pub particular: Particular,
    /// Coefficient of the growing power; absent on a piece unbounded above.
    pub growing: Option<f64>,
    /// Coefficient of the decaying power; absent on a piece unbounded below.
    pub decaying: Option<f64>,
}

impl PieceSolution {
    fn contains(&self, n: i64) -> bool {
        self.lo.is_none_or(|lo| n >= lo) && self.hi.is_none_or(|hi| n <= hi)
    }

    fn basis_at(&self, n: i64) -> (f64, f64) {
        match self.basis {
            Basis::Exponential { growing, decaying } => {
                let g = self.hi.map_or(0.0, |hi| crate::dual::pow_i64(growing, n - hi));
                let d = self.lo.map_or(0.0, |lo| crate::dual::pow_i64(decaying, n - lo));
                (g, d)
            }
            Basis::Linear => {
                let (lo, hi) = (self.lo.unwrap(), self.hi.unwrap());
                (1.0, (n - lo + 1) as f64 / (hi - lo + 2) as f64)
            }
        }
    }

    fn particular_at(&self, n: i64) -> f64 {
        let off = self.lo.map_or(0, |lo| n - lo) as f64;
        match self.particular {
            Particular::None => 0.0,
            Particular::Constant(c) => c,
            Particular::Linear { slope } => slope * off,
            Particular::Quadratic { coef } => coef * off * off,
        }
    }

    pub fn value_at(&self, n: i64) -> f64 {
        let (g, d) = self.basis_at(n);
        self.particular_at(n) + self.growing.unwrap_or(0.0) * g + self.decaying.unwrap_or(0.0) * d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeValue {
    pub state: i64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub equation: String,
    pub value: f64,
}

/// Solved boundary system: values at the cuts and piece coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofSystemSolution {
    pub kind: SystemKind,
    pub domain: Domain,
    pub nodes: Vec<NodeValue>,
    pub pieces: Vec<PieceSolution>,
    pub residuals: Vec<Residual>,
}

impl ProofSystemSolution {
    pub fn unknowns(&self) -> usize {
        self.nodes.len()
            + self
                .pieces
                .iter()
                .map(|p| p.growing.is_some() as usize + p.decaying.is_some() as usize)
                .sum::<usize>()
    }

    pub fn equations(&self) -> usize {
        self.residuals.len()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.value.abs()).fold(0.0, f64::max)
    }

    pub fn node(&self, state: i64) -> Option<f64> {
        self.nodes.iter().find(|n| n.state == state).map(|n| n.value)
    }

    /// Value at any state of the domain.
    pub fn value_at(&self, n: i64) -> f64 {
        if let Some(v) = self.node(n) {
            return v;
        }
        match self.pieces.iter().find(|p| p.contains(n)) {
            Some(p) => p.value_at(n),
            None => match self.kind {
                SystemKind::Arrivals { .. } => 0.0,
                SystemKind::AbsorptionTime => f64::NAN,
            },
        }
    }
}

impl Occupancy for ProofSystemSolution {
    fn domain(&self) -> Domain {
        self.domain
    }
    fn start(&self) -> i64 {
        match self.kind {
            SystemKind::Arrivals { start } => start,
            SystemKind::AbsorptionTime => 0,
        }
    }
    fn provenance(&self) -> Provenance {
        Provenance::ProofSystem
    }
    fn at(&self, n: i64) -> f64 {
        self.value_at(n)
    }
}

enum Loc {
    Node(usize),
    Piece(usize),
    Outside,
}

struct Layout {
    nodes: Vec<(i64, Site)>,
    pieces: Vec<PieceSolution>,
    /// Index of the first coefficient unknown of each piece.
    slots: Vec<(Option<usize>, Option<usize>)>,
    unknowns: usize,
}

impl Layout {
    fn new<W: Segmented>(walk: &W, extra: Option<i64>, kind: SystemKind) -> Result<Self> {
        let mut cuts = walk.barriers();
        if let Some(e) = extra {
            cuts.push(e);
        }
        cuts.sort_unstable();
        cuts.dedup();
        if cuts.is_empty() {
            return Err(Error::Precondition("a boundary system needs at least one cut".into()));
        }
        let nodes: Vec<(i64, Site)> = cuts.iter().map(|&c| (c, walk.site(c))).collect();
        let mut spans: Vec<(Option<i64>, Option<i64>)> = Vec::new();
        if walk.lower().is_none() {
            spans.push((None, Some(cuts[0] - 1)));
        }
        for w in cuts.windows(2) {
            if w[1] - w[0] >= 2 {
                spans.push((Some(w[0] + 1), Some(w[1] - 1)));
            }
        }
        if walk.upper().is_none() {
            spans.push((Some(cuts[cuts.len() - 1] + 1), None));
        }
        let mut pieces = Vec::with_capacity(spans.len());
        for (lo, hi) in spans {
            let probe = lo.or(hi).unwrap();
            let regime = walk.regime(probe);
            pieces.push(make_piece(regime, lo, hi, kind)?);
        }
        let mut next = nodes.len();
        let mut slots = Vec::with_capacity(pieces.len());
        for p in &pieces {
            let g = if p.hi.is_some() || matches!(p.basis, Basis::Linear) {
                next += 1;
                Some(next - 1)
            } else {
                None
            };
            let d = if p.lo.is_some() {
                next += 1;
                Some(next - 1)
            } else {
                None
            };
            slots.push((g, d));
        }
        Ok(Self {
            nodes,
            pieces,
            slots,
            unknowns: next,
        })
    }

    fn locate<W: Segmented>(&self, walk: &W, n: i64) -> Loc {
        if !walk.contains(n) {
            return Loc::Outside;
        }
        if let Some(k) = self.nodes.iter().position(|(s, _)| *s == n) {
            return Loc::Node(k);
        }
        match self.pieces.iter().position(|p| p.contains(n)) {
            Some(k) => Loc::Piece(k),
            None => Loc::Outside,
        }
    }

    /// Add `coef × (value of piece k at n)` to a row, moving the particular
    /// part to the right-hand side.
    fn add_piece(&self, row: &mut [f64], rhs: &mut f64, k: usize, n: i64, coef: f64) {
        let p = &self.pieces[k];
        let (g, d) = p.basis_at(n);
        let (sg, sd) = self.slots[k];
        if let Some(i) = sg {
            row[i] += coef * g;
        }
        if let Some(i) = sd {
            row[i] += coef * d;
        }
        *rhs -= coef * p.particular_at(n);
    }
}

fn make_piece(regime: PqrsParams, lo: Option<i64>, hi: Option<i64>, kind: SystemKind) -> Result<PieceSolution> {
    let bounded = lo.is_some() && hi.is_some();
    let basis = match roots_at(&regime, 1.0) {
        Ok(r) => match kind {
            SystemKind::Arrivals { .. } => Basis::Exponential {
                growing: r.xi1,
                decaying: r.xi2,
            },
            SystemKind::AbsorptionTime => Basis::Exponential {
                growing: 1.0 / r.xi2,
                decaying: 1.0 / r.xi1,
            },
        },
        Err(Error::DegenerateRoots { .. }) if bounded => Basis::Linear,
        Err(e) => return Err(e),
    };
    let particular = match kind {
        SystemKind::Arrivals { .. } => Particular::None,
        SystemKind::AbsorptionTime if regime.s > 0.0 => Particular::Constant(regime.sigma()),
        SystemKind::AbsorptionTime if !bounded => {
            return Err(Error::UnsupportedCase(
                "absorption time on an unbounded piece without interior absorption".into(),
            ))
        }
        SystemKind::AbsorptionTime if regime.p != regime.q => Particular::Linear {
            slope: 1.0 / (regime.q - regime.p),
        },
        SystemKind::AbsorptionTime => Particular::Quadratic {
            coef: -1.0 / (2.0 * regime.p),
        },
    };
    Ok(PieceSolution {
        lo,
        hi,
        regime,
        basis,
        particular,
        growing: None,
        decaying: None,
    })
}

#[derive(Default)]
struct System {
    rows: Vec<Vec<f64>>,
    b: Vec<f64>,
    labels: Vec<String>,
}

impl System {
    fn push(&mut self, row: Vec<f64>, rhs: f64, label: String) {
        self.rows.push(row);
        self.b.push(rhs);
        self.labels.push(label);
    }
}

fn solve(layout: Layout, sys: System, kind: SystemKind, domain: Domain) -> Result<ProofSystemSolution> {
    let n = layout.unknowns;
    if sys.rows.len() != n {
        return Err(Error::Inconsistent(format!(
            "boundary system has {} equations for {n} unknowns",
            sys.rows.len()
        )));
    }
    let a = DMatrix::from_fn(n, n, |i, j| sys.rows[i][j]);
    let b = DVector::from_vec(sys.b);
    let x = a.clone().lu().solve(&b).ok_or(Error::NotAbsorbing)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotAbsorbing);
    }
    let res = &a * &x - &b;
    let residuals = sys
        .labels
        .into_iter()
        .zip(res.iter())
        .map(|(equation, &value)| Residual { equation, value })
        .collect();
    let nodes = layout
        .nodes
        .iter()
        .enumerate()
        .map(|(k, (state, _))| NodeValue {
            state: *state,
            value: x[k],
        })
        .collect();
    let pieces = layout
        .pieces
        .iter()
        .zip(&layout.slots)
        .map(|(p, (sg, sd))| PieceSolution {
            growing: sg.map(|i| x[i]),
            decaying: sd.map(|i| x[i]),
            ..*p
        })
        .collect();
    Ok(ProofSystemSolution {
        kind,
        domain,
        nodes,
        pieces,
        residuals,
    })
}

/// Expected occupancy from `start`.
pub fn arrivals_system<W: Segmented>(walk: &W, start: i64) -> Result<ProofSystemSolution> {
    if !walk.contains(start) {
        return Err(Error::Precondition(format!("start {start} lies outside the domain")));
    }
    let kind = SystemKind::Arrivals { start };
    let layout = Layout::new(walk, Some(start), kind)?;
    let mut sys = System::default();
    for (k, &(state, site)) in layout.nodes.iter().enumerate() {
        let mut row = vec![0.0; layout.unknowns];
        let mut rhs = if state == start { 1.0 } else { 0.0 };
        row[k] += 1.0 - site.hold;
        match layout.locate(walk, state - 1) {
            Loc::Node(j) => row[j] -= layout.nodes[j].1.fwd,
            Loc::Piece(j) => {
                let p = layout.pieces[j].regime.p;
                layout.add_piece(&mut row, &mut rhs, j, state - 1, -p);
            }
            Loc::Outside => {}
        }
        match layout.locate(walk, state + 1) {
            Loc::Node(j) => row[j] -= layout.nodes[j].1.bwd,
            Loc::Piece(j) => {
                let q = layout.pieces[j].regime.q;
                layout.add_piece(&mut row, &mut rhs, j, state + 1, -q);
            }
            Loc::Outside => {}
        }
        sys.push(row, rhs, format!("balance@{state}"));
    }
    for (j, piece) in layout.pieces.iter().enumerate() {
        if let Some(lo) = piece.lo {
            let k = node_index(&layout, lo - 1)?;
            let mut row = vec![0.0; layout.unknowns];
            let mut rhs = 0.0;
            layout.add_piece(&mut row, &mut rhs, j, lo - 1, 1.0);
            row[k] -= layout.nodes[k].1.fwd / piece.regime.p;
            sys.push(row, rhs, format!("inflow@{lo}"));
        }
        if let Some(hi) = piece.hi {
            let k = node_index(&layout, hi + 1)?;
            let mut row = vec![0.0; layout.unknowns];
            let mut rhs = 0.0;
            layout.add_piece(&mut row, &mut rhs, j, hi + 1, 1.0);
            row[k] -= layout.nodes[k].1.bwd / piece.regime.q;
            sys.push(row, rhs, format!("inflow@{hi}"));
        }
    }
    solve(layout, sys, kind, walk.domain())
}

/// Expected number of transitions before absorption, from every state.
pub fn absorption_time_system<W: Segmented>(walk: &W) -> Result<ProofSystemSolution> {
    let kind = SystemKind::AbsorptionTime;
    let layout = Layout::new(walk, None, kind)?;
    let mut sys = System::default();
    for (k, &(state, site)) in layout.nodes.iter().enumerate() {
        let mut row = vec![0.0; layout.unknowns];
        let mut rhs = 1.0 - site.absorb;
        row[k] += 1.0 - site.hold;
        for (nb, w) in [(state + 1, site.fwd), (state - 1, site.bwd)] {
            if w == 0.0 {
                continue;
            }
            match layout.locate(walk, nb) {
                Loc::Node(j) => row[j] -= w,
                Loc::Piece(j) => layout.add_piece(&mut row, &mut rhs, j, nb, -w),
                Loc::Outside => {}
            }
        }
        sys.push(row, rhs, format!("balance@{state}"));
    }
    for (j, piece) in layout.pieces.iter().enumerate() {
        for (edge, label) in [(piece.lo.map(|l| l - 1), "lo"), (piece.hi.map(|h| h + 1), "hi")] {
            if let Some(e) = edge {
                let k = node_index(&layout, e)?;
                let mut row = vec![0.0; layout.unknowns];
                let mut rhs = 0.0;
                layout.add_piece(&mut row, &mut rhs, j, e, 1.0);
                row[k] -= 1.0;
                sys.push(row, rhs, format!("continuity-{label}@{e}"));
            }
        }
    }
    solve(layout, sys, kind, walk.domain())
}

fn node_index(layout: &Layout, state: i64) -> Result<usize> {
    layout
        .nodes
        .iter()
        .position(|(s, _)| *s == state)
        .ok_or_else(|| Error::Inconsistent(format!("piece end {state} is not adjacent to a cut")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk_model::MfbParams;

    fn modified() -> ModifiedFiniteSpec {
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
    fn finite_system_has_ten_equations() {
        let sol = arrivals_system(&modified(), 5).unwrap();
        assert_eq!(sol.unknowns(), 10);
        assert_eq!(sol.equations(), 10);
        assert!(sol.max_residual() < 1e-12);
    }

    #[test]
    fn half_line_system_size() {
        let spec = ModifiedHalfLineSpec {
            m: 3,
            right_regime: PqrsParams::uniform(),
            left_regime: PqrsParams::uniform(),
            left: MfbParams::left(0.5, 0.25, 0.25),
            barrier: MfbParams::interior(0.3, 0.3, 0.2, 0.2),
        };
        assert_eq!(arrivals_system(&spec, 6).unwrap().unknowns(), 8);
        assert_eq!(absorption_time_system(&spec).unwrap().unknowns(), 5);
    }

    #[test]
    fn full_line_time_system_size() {
        let spec = ModifiedFullLineSpec {
            pos_regime: PqrsParams::uniform(),
            neg_regime: PqrsParams::new(0.4, 0.2, 0.2, 0.2),
            origin: MfbParams::interior(0.3, 0.3, 0.2, 0.2),
        };
        assert_eq!(absorption_time_system(&spec).unwrap().unknowns(), 3);
        assert_eq!(arrivals_system(&spec, 4).unwrap().unknowns(), 6);
    }

    #[test]
    fn geometric_lifetime_everywhere() {
        let spec = ModifiedFiniteSpec {
            barrier: MfbParams::interior(0.1, 0.4, 0.25, 0.25),
            ..modified()
        };
        // Every state absorbs with probability 1/4.
        let sol = absorption_time_system(&spec).unwrap();
        for n in 0..=8 {
            assert!((sol.value_at(n) - 3.0).abs() < 1e-12, "m_{n} = {}", sol.value_at(n));
        }
    }

    #[test]
    fn start_outside_domain() {
        assert!(arrivals_system(&modified(), 9).is_err());
    }
}
