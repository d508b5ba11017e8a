//! Ground truth that shares no formulas with the closed forms: linear solves
//! on the absorbing chain and step-by-step dynamic programming.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homogeneous::StepDistribution;
use crate::walk_model::{Lattice, PqrsParams, Validate, WalkSpec, SUM_TOLERANCE};

/// Occupancy at the window edges below which an AUTO window is accepted.
pub const AUTO_EDGE_OCCUPANCY: f64 = 1e-12;

const AUTO_INITIAL_HALF_WIDTH: i64 = 8;
const AUTO_MAX_HALF_WIDTH: i64 = 1 << 22;

/// Transient states `lo..lo+len` of a birth-death chain with holding and
/// killing. Mass that would step out of the window is recorded in `leak`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransientChain {
    pub lo: i64,
    pub fwd: Vec<f64>,
    pub bwd: Vec<f64>,
    pub hold: Vec<f64>,
    pub absorb: Vec<f64>,
    pub leak: Vec<f64>,
}

impl TransientChain {
    /// Chain with no leakage. Row `k` must satisfy
    /// `fwd + bwd + hold + absorb = 1`, `bwd[0] = 0` and `fwd[last] = 0`.
    pub fn new(lo: i64, fwd: Vec<f64>, bwd: Vec<f64>, hold: Vec<f64>, absorb: Vec<f64>) -> Result<Self> {
        let n = fwd.len();
        if n == 0 || bwd.len() != n || hold.len() != n || absorb.len() != n {
            return Err(Error::Precondition("chain vectors must be non-empty and of equal length".into()));
        }
        let chain = Self {
            lo,
            fwd,
            bwd,
            hold,
            absorb,
            leak: vec![0.0; n],
        };
        chain.check()?;
        Ok(chain)
    }

    fn check(&self) -> Result<()> {
        let n = self.len();
        for k in 0..n {
            let vals = [self.fwd[k], self.bwd[k], self.hold[k], self.absorb[k], self.leak[k]];
            if vals.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::Precondition(format!("row {} has a negative or non-finite entry", self.state(k))));
            }
            if (vals.iter().sum::<f64>() - 1.0).abs() > SUM_TOLERANCE {
                return Err(Error::Precondition(format!("row {} does not sum to 1", self.state(k))));
            }
        }
        if self.bwd[0] != 0.0 || self.fwd[n - 1] != 0.0 {
            return Err(Error::Precondition("transitions out of the chain must be recorded as leak".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.fwd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fwd.is_empty()
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.len() as i64 - 1
    }

    pub fn state(&self, k: usize) -> i64 {
        self.lo + k as i64
    }

    pub fn index(&self, state: i64) -> Option<usize> {
        let k = state.checked_sub(self.lo)?;
        if k >= 0 && (k as usize) < self.len() {
            Some(k as usize)
        } else {
            None
        }
    }

    /// The transient block `Q` as a dense matrix.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut q = DMatrix::zeros(n, n);
        for k in 0..n {
            q[(k, k)] = self.hold[k];
            if k + 1 < n {
                q[(k, k + 1)] = self.fwd[k];
            }
            if k > 0 {
                q[(k, k - 1)] = self.bwd[k];
            }
        }
        q
    }

    /// One step of the sub-stochastic evolution `dist ↦ dist·Q`.
    pub fn step(&self, dist: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        for k in 0..n {
            let m = dist[k];
            if m == 0.0 {
                continue;
            }
            out[k] += m * self.hold[k];
            if k + 1 < n {
                out[k + 1] += m * self.fwd[k];
            }
            if k > 0 {
                out[k - 1] += m * self.bwd[k];
            }
        }
        out
    }

    /// Solve `(I − Q)ᵀ x = b` with the Thomas algorithm.
    ///
    /// `(I − Q)ᵀ` is column diagonally dominant with non-positive off-diagonal
    /// entries, so elimination without pivoting is stable and keeps every
    /// intermediate non-negative.
    fn solve_transposed(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        // Row k: -fwd[k-1]·x[k-1] + (1-hold[k])·x[k] - bwd[k+1]·x[k+1] = b[k]
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut prev_c = 0.0;
        let mut prev_d = 0.0;
        for k in 0..n {
            let sub = if k > 0 { -self.fwd[k - 1] } else { 0.0 };
            let sup = if k + 1 < n { -self.bwd[k + 1] } else { 0.0 };
            let diag = 1.0 - self.hold[k];
            let pivot = diag - sub * prev_c;
            if !(pivot > 1e-13 * diag.max(1e-300)) {
                return Err(Error::NotAbsorbing);
            }
            c[k] = sup / pivot;
            d[k] = (b[k] - sub * prev_d) / pivot;
            prev_c = c[k];
            prev_d = d[k];
        }
        let mut x = vec![0.0; n];
        x[n - 1] = d[n - 1];
        for k in (0..n - 1).rev() {
            x[k] = d[k] - c[k] * x[k + 1];
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotAbsorbing);
        }
        Ok(x)
    }
}

/// Window for infinite domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Window {
    /// Explicit inclusive state range, clipped to the domain.
    Range(i64, i64),
    /// Smallest window around `around` whose edge occupancy is below
    /// [`AUTO_EDGE_OCCUPANCY`].
    Auto { around: i64 },
}

fn encode(spec: &WalkSpec, lo: i64, hi: i64) -> TransientChain {
    let n = (hi - lo + 1) as usize;
    let mut chain = TransientChain {
        lo,
        fwd: Vec::with_capacity(n),
        bwd: Vec::with_capacity(n),
        hold: Vec::with_capacity(n),
        absorb: Vec::with_capacity(n),
        leak: Vec::with_capacity(n),
    };
    for state in lo..=hi {
        let s = spec.site(state);
        let mut leak = 0.0;
        let fwd = if state == hi {
            leak += s.fwd;
            0.0
        } else {
            s.fwd
        };
        let bwd = if state == lo {
            leak += s.bwd;
            0.0
        } else {
            s.bwd
        };
        chain.fwd.push(fwd);
        chain.bwd.push(bwd);
        chain.hold.push(s.hold);
        chain.absorb.push(s.absorb);
        chain.leak.push(leak);
    }
    chain
}

/// Encode a walk as an absorbing chain. Finite walks ignore `window`.
pub fn build_chain(spec: &WalkSpec, window: Window) -> Result<TransientChain> {
    spec.ensure_valid()?;
    if let (Some(lo), Some(hi)) = (spec.lower(), spec.upper()) { return Ok(encode(spec, lo, hi)) }
    match window {
        Window::Range(a, b) => {
            let lo = spec.lower().map_or(a, |l| a.max(l));
            let hi = spec.upper().map_or(b, |u| b.min(u));
            if lo > hi {
                return Err(Error::Precondition(format!("empty window [{a}, {b}]")));
            }
            Ok(encode(spec, lo, hi))
        }
        Window::Auto { around } => auto_window(spec, around).map(|(lo, hi, _)| encode(spec, lo, hi)),
    }
}

fn window_for(spec: &WalkSpec, around: i64, k: i64) -> (i64, i64) {
    // Keep every barrier inside the window as well as the start.
    let (mut a, mut b) = (around, around);
    if let WalkSpec::ModifiedHalfLine(m) = spec {
        b = b.max(m.m);
    }
    if let WalkSpec::ModifiedFullLine(_) = spec {
        a = a.min(0);
        b = b.max(0);
    }
    let lo = spec.lower().map_or(a - k, |l| l.max(a - k));
    (lo, b + k)
}

fn edge_occupancy(spec: &WalkSpec, around: i64, k: i64) -> Result<f64> {
    let (lo, hi) = window_for(spec, around, k);
    let chain = encode(spec, lo, hi);
    let x = exact_visits(&chain, around)?;
    let mut edge = x[x.len() - 1];
    if spec.lower().is_none() {
        edge = edge.max(x[0]);
    }
    Ok(edge)
}

/// Double the half-width until the edge occupancy falls below the
/// threshold, then bisect back to the smallest half-width that passes.
fn auto_window(spec: &WalkSpec, around: i64) -> Result<(i64, i64, i64)> {
    if !spec.contains(around) {
        return Err(Error::Precondition(format!("start {around} lies outside the domain")));
    }
    let mut k = AUTO_INITIAL_HALF_WIDTH;
    let mut last_fail = 0;
    while edge_occupancy(spec, around, k)? >= AUTO_EDGE_OCCUPANCY {
        last_fail = k;
        k *= 2;
        if k > AUTO_MAX_HALF_WIDTH {
            return Err(Error::Precondition(
                "occupancy does not decay away from the start; pass an explicit window".into(),
            ));
        }
    }
    let (mut bad, mut good) = (last_fail, k);
    while good - bad > 1 {
        let mid = (bad + good) / 2;
        if edge_occupancy(spec, around, mid)? < AUTO_EDGE_OCCUPANCY {
            good = mid;
        } else {
            bad = mid;
        }
    }
    let (lo, hi) = window_for(spec, around, good);
    Ok((lo, hi, good))
}

/// Half-width chosen by [`Window::Auto`] for a start state.
pub fn auto_half_width(spec: &WalkSpec, around: i64) -> Result<i64> {
    spec.ensure_valid()?;
    Ok(auto_window(spec, around)?.2)
}

fn start_index(chain: &TransientChain, i0: i64) -> Result<usize> {
    chain.index(i0).ok_or(Error::WindowTooSmall {
        lo: chain.lo,
        hi: chain.hi(),
        start: i0,
    })
}

/// Row `i0` of `(I − Q)^{−1}`: expected occupancy of every state.
pub fn exact_visits(chain: &TransientChain, i0: i64) -> Result<Vec<f64>> {
    let k = start_index(chain, i0)?;
    let mut e = vec![0.0; chain.len()];
    e[k] = 1.0;
    chain.solve_transposed(&e)
}

/// Site probabilities, mean time and defective times from a start state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainAbsorption {
    pub lo: i64,
    pub probabilities: Vec<f64>,
    pub mean_time: f64,
    pub defective_times: Vec<f64>,
    pub leaked: f64,
}

/// `absorb_j·x_j`, `Σx − 1`, and `absorb_j·[Q(I−Q)^{−2}]_{i0,j}`.
///
/// The last factor is `y(I−Q)^{−1} − y` with `y` the visit row, so it costs
/// one more tridiagonal solve.
pub fn exact_absorption(chain: &TransientChain, i0: i64) -> Result<ChainAbsorption> {
    let y = exact_visits(chain, i0)?;
    let z = chain.solve_transposed(&y)?;
    let probabilities: Vec<f64> = y.iter().zip(&chain.absorb).map(|(x, a)| x * a).collect();
    let defective_times = (0..chain.len())
        .map(|k| chain.absorb[k] * (z[k] - y[k]))
        .collect();
    let leaked = y.iter().zip(&chain.leak).map(|(x, l)| x * l).sum();
    Ok(ChainAbsorption {
        lo: chain.lo,
        probabilities,
        mean_time: y.iter().sum::<f64>() - 1.0,
        defective_times,
        leaked,
    })
}

/// Expected occupancy by summing the step distributions until the mass
/// still in the chain falls below `tol`.
pub fn iterated_visits(chain: &TransientChain, i0: i64, tol: f64, max_steps: usize) -> Result<Vec<f64>> {
    let k = start_index(chain, i0)?;
    let mut dist = vec![0.0; chain.len()];
    dist[k] = 1.0;
    let mut total = dist.clone();
    for _ in 0..max_steps {
        dist = chain.step(&dist);
        let mut mass = 0.0;
        for (t, d) in total.iter_mut().zip(&dist) {
            *t += d;
            mass += d;
        }
        if mass < tol {
            return Ok(total);
        }
    }
    Err(Error::NotAbsorbing)
}

/// Expected occupancy by a dense LU solve of the whole transient block.
pub fn dense_visits(chain: &TransientChain, i0: i64) -> Result<Vec<f64>> {
    let k = start_index(chain, i0)?;
    let n = chain.len();
    let a = (DMatrix::identity(n, n) - chain.to_dense()).transpose();
    let mut e = nalgebra::DVector::zeros(n);
    e[k] = 1.0;
    let x = a.lu().solve(&e).ok_or(Error::NotAbsorbing)?;
    Ok(x.iter().copied().collect())
}

/// Displacement distributions after `0..=n_max` steps of the free walk,
/// by repeated convolution with the kernel `{+1: p, 0: r, −1: q}`.
pub fn dp_nstep(params: &PqrsParams, n_max: usize) -> Vec<StepDistribution> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut cur = vec![1.0];
    for n in 0..=n_max {
        let survival: f64 = cur.iter().sum();
        out.push(StepDistribution {
            n,
            probs: cur.clone(),
            absorbed: 1.0 - survival,
        });
        let mut next = vec![0.0; cur.len() + 2];
        for (k, &m) in cur.iter().enumerate() {
            next[k] += m * params.q;
            next[k + 1] += m * params.r;
            next[k + 2] += m * params.p;
        }
        cur = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk_model::{FiniteWalkSpec, FullLineWalkSpec, MfbParams};

    fn n4() -> WalkSpec {
        WalkSpec::Finite(FiniteWalkSpec {
            n: 4,
            interior: PqrsParams::uniform(),
            left: MfbParams::left(0.5, 0.25, 0.25),
            right: MfbParams::right(0.5, 0.25, 0.25),
        })
    }

    #[test]
    fn finite_encoding() {
        let c = build_chain(&n4(), Window::Range(0, 0)).unwrap();
        assert_eq!(c.len(), 5);
        assert_eq!(c.absorb, vec![0.25; 5]);
        assert_eq!(c.leak, vec![0.0; 5]);
    }

    #[test]
    fn one_state_chain() {
        let c = TransientChain::new(0, vec![0.0], vec![0.0], vec![0.75], vec![0.25]).unwrap();
        assert!((exact_visits(&c, 0).unwrap()[0] - 4.0).abs() < 1e-15);
        let a = exact_absorption(&c, 0).unwrap();
        assert!((a.mean_time - 3.0).abs() < 1e-14);
        assert!((a.probabilities[0] - 1.0).abs() < 1e-15);
        assert!((a.defective_times[0] - 3.0).abs() < 1e-13);
    }

    #[test]
    fn thomas_matches_dense_lu() {
        let c = build_chain(&n4(), Window::Range(0, 0)).unwrap();
        for i0 in 0..=4 {
            let a = exact_visits(&c, i0).unwrap();
            let b = dense_visits(&c, i0).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-13);
            }
            assert!((a.iter().sum::<f64>() - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn iteration_matches_solve() {
        let c = build_chain(&n4(), Window::Range(0, 0)).unwrap();
        let a = exact_visits(&c, 1).unwrap();
        let b = iterated_visits(&c, 1, 1e-16, 10_000).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-13);
        }
        let stuck = TransientChain::new(0, vec![0.5, 0.0], vec![0.0, 0.5], vec![0.5, 0.5], vec![0.0, 0.0]).unwrap();
        assert!(matches!(iterated_visits(&stuck, 0, 1e-12, 100), Err(Error::NotAbsorbing)));
    }

    #[test]
    fn singular_chain_is_reported() {
        let c = TransientChain::new(0, vec![0.5, 0.0], vec![0.0, 0.5], vec![0.5, 0.5], vec![0.0, 0.0]).unwrap();
        assert!(matches!(exact_visits(&c, 0), Err(Error::NotAbsorbing)));
    }

    #[test]
    fn start_outside_window() {
        let spec = WalkSpec::FullLine(FullLineWalkSpec {
            interior: PqrsParams::uniform(),
        });
        let c = build_chain(&spec, Window::Range(-3, 3)).unwrap();
        assert!(matches!(exact_visits(&c, 7), Err(Error::WindowTooSmall { .. })));
    }

    #[test]
    fn auto_window_for_uniform_full_line() {
        let spec = WalkSpec::FullLine(FullLineWalkSpec {
            interior: PqrsParams::uniform(),
        });
        let k = auto_half_width(&spec, 0).unwrap();
        assert!((28..=31).contains(&k), "half-width {k}");
        let c = build_chain(&spec, Window::Auto { around: 0 }).unwrap();
        assert_eq!((c.lo, c.hi()), (-k, k));
    }

    #[test]
    fn dp_small_cases() {
        let d = dp_nstep(&PqrsParams::uniform(), 2);
        assert_eq!(d[0].probs, vec![1.0]);
        assert!((d[2].at(0) - 0.1875).abs() < 1e-15);
        assert!((d[2].survival() - 0.5625).abs() < 1e-15);
    }
}
