//! Oracles written independently of the library: their own site table, a
//! dense Gaussian elimination with partial pivoting, step iteration and path
//! enumeration.

#![allow(dead_code)]

use mfbwalk::walk_model::{MfbParams, PqrsParams, WalkSpec};

/// `[fwd, bwd, hold, absorb]` of each state in `lo..=hi`.
pub struct Sites {
    pub lo: i64,
    pub rows: Vec<[f64; 4]>,
}

fn reg(p: &PqrsParams) -> [f64; 4] {
    [p.p, p.q, p.r, p.s]
}

fn bar(b: &MfbParams) -> [f64; 4] {
    [b.fwd, b.bwd, b.hold, b.absorb]
}

pub fn site(spec: &WalkSpec, n: i64) -> [f64; 4] {
    match spec {
        WalkSpec::Finite(s) => match n {
            0 => bar(&s.left),
            _ if n == s.n => bar(&s.right),
            _ => reg(&s.interior),
        },
        WalkSpec::HalfLine(s) => {
            if n == 0 {
                bar(&s.left)
            } else {
                reg(&s.interior)
            }
        }
        WalkSpec::FullLine(s) => reg(&s.interior),
        WalkSpec::ModifiedFinite(s) => {
            if n == 0 {
                bar(&s.left)
            } else if n == s.n {
                bar(&s.right)
            } else if n == s.m {
                bar(&s.barrier)
            } else if n < s.m {
                reg(&s.left_regime)
            } else {
                reg(&s.right_regime)
            }
        }
        WalkSpec::ModifiedHalfLine(s) => {
            if n == 0 {
                bar(&s.left)
            } else if n == s.m {
                bar(&s.barrier)
            } else if n < s.m {
                reg(&s.left_regime)
            } else {
                reg(&s.right_regime)
            }
        }
        WalkSpec::ModifiedFullLine(s) => {
            if n == 0 {
                bar(&s.origin)
            } else if n > 0 {
                reg(&s.pos_regime)
            } else {
                reg(&s.neg_regime)
            }
        }
    }
}

/// States `lo..=hi`; moves out of the range are lost (truncation).
pub fn sites(spec: &WalkSpec, lo: i64, hi: i64) -> Sites {
    Sites {
        lo,
        rows: (lo..=hi).map(|n| site(spec, n)).collect(),
    }
}

impl Sites {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn idx(&self, n: i64) -> usize {
        (n - self.lo) as usize
    }

    fn q(&self, a: usize, b: usize) -> f64 {
        let r = &self.rows[a];
        if a == b {
            r[2]
        } else if b == a + 1 {
            r[0]
        } else if b + 1 == a {
            r[1]
        } else {
            0.0
        }
    }

    /// Row `i0` of `(I − Q)^{-1}` by Gaussian elimination on `(I − Q)ᵀ`.
    pub fn visits(&self, i0: i64) -> Vec<f64> {
        let n = self.len();
        let mut a = vec![vec![0.0; n + 1]; n];
        for (r, row) in a.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().take(n).enumerate() {
                *v = if r == c { 1.0 } else { 0.0 } - self.q(c, r);
            }
        }
        a[self.idx(i0)][n] = 1.0;
        gauss(a)
    }

    /// Mean times from every start: `(I − Q) m = 1 − absorb`.
    pub fn times(&self) -> Vec<f64> {
        let n = self.len();
        let mut a = vec![vec![0.0; n + 1]; n];
        for (r, row) in a.iter_mut().enumerate() {
            for c in 0..n {
                row[c] = if r == c { 1.0 } else { 0.0 } - self.q(r, c);
            }
            row[n] = 1.0 - self.rows[r][3];
        }
        gauss(a)
    }

    /// Occupancy, and `Σ_k k·P(X_k = j)`, by iterating the distribution.
    pub fn iterate(&self, i0: i64, tol: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.len();
        let mut dist = vec![0.0; n];
        dist[self.idx(i0)] = 1.0;
        let mut occ = dist.clone();
        let mut weighted = vec![0.0; n];
        for k in 1.. {
            let mut next = vec![0.0; n];
            for (a, &m) in dist.iter().enumerate() {
                if m == 0.0 {
                    continue;
                }
                let r = &self.rows[a];
                next[a] += m * r[2];
                if a + 1 < n {
                    next[a + 1] += m * r[0];
                }
                if a > 0 {
                    next[a - 1] += m * r[1];
                }
            }
            dist = next;
            let mass: f64 = dist.iter().sum();
            for j in 0..n {
                occ[j] += dist[j];
                weighted[j] += k as f64 * dist[j];
            }
            if mass < tol {
                break;
            }
        }
        (occ, weighted)
    }
}

fn gauss(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())
            .unwrap();
        a.swap(col, piv);
        let p = a[col][col];
        assert!(p.abs() > 1e-300, "singular system");
        for r in 0..n {
            if r != col && a[r][col] != 0.0 {
                let f = a[r][col] / p;
                for c in col..=n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    (0..n).map(|r| a[r][n] / a[r][r]).collect()
}

/// `P(X_n = k)` from 0 by enumerating all `3^n` move sequences.
pub fn enumerate_paths(p: &PqrsParams, n: u32, k: i64) -> f64 {
    let mut total = 0.0;
    for code in 0..3u64.pow(n) {
        let (mut c, mut pos, mut prob) = (code, 0i64, 1.0);
        for _ in 0..n {
            match c % 3 {
                0 => {
                    pos += 1;
                    prob *= p.p;
                }
                1 => {
                    pos -= 1;
                    prob *= p.q;
                }
                _ => prob *= p.r,
            }
            c /= 3;
        }
        if pos == k {
            total += prob;
        }
    }
    total
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

#[track_caller]
pub fn assert_close(a: f64, b: f64, tol: f64) {
    assert!(rel(a, b) <= tol, "{a} vs {b}: relative deviation {:e} > {tol:e}", rel(a, b));
}

pub mod strategies {
    use mfbwalk::walk_model::{FiniteWalkSpec, HalfLineWalkSpec, MfbParams, PqrsParams};
    use proptest::prelude::*;

    fn normalize<const K: usize>(w: [f64; K]) -> [f64; K] {
        let t: f64 = w.iter().sum();
        let mut out = w.map(|v| v / t);
        let head: f64 = out[..K - 1].iter().sum();
        out[K - 1] = 1.0 - head;
        out
    }

    /// Interior regime with `p, q, s ≥ ~0.02`.
    pub fn regime() -> impl Strategy<Value = PqrsParams> {
        (0.1f64..1.0, 0.1f64..1.0, 0.0f64..1.0, 0.1f64..1.0).prop_map(|(a, b, c, d)| {
            let [p, q, r, s] = normalize([a, b, c, d]);
            PqrsParams::new(p, q, r, s)
        })
    }

    pub fn left_end() -> impl Strategy<Value = MfbParams> {
        (0.1f64..1.0, 0.0f64..1.0, 0.1f64..1.0).prop_map(|(a, b, c)| {
            let [f, h, s] = normalize([a, b, c]);
            MfbParams::left(f, h, s)
        })
    }

    pub fn right_end() -> impl Strategy<Value = MfbParams> {
        (0.1f64..1.0, 0.0f64..1.0, 0.1f64..1.0).prop_map(|(a, b, c)| {
            let [f, h, s] = normalize([a, b, c]);
            MfbParams::right(f, h, s)
        })
    }

    pub fn interior_barrier() -> impl Strategy<Value = MfbParams> {
        (0.1f64..1.0, 0.1f64..1.0, 0.0f64..1.0, 0.0f64..1.0).prop_map(|(a, b, c, d)| {
            let [f, g, h, s] = normalize([a, b, c, d]);
            MfbParams::interior(f, g, h, s)
        })
    }

    pub fn finite(n_max: i64) -> impl Strategy<Value = FiniteWalkSpec> {
        (2..=n_max, regime(), left_end(), right_end()).prop_map(|(n, interior, left, right)| FiniteWalkSpec {
            n,
            interior,
            left,
            right,
        })
    }

    pub fn halfline() -> impl Strategy<Value = HalfLineWalkSpec> {
        (regime(), left_end()).prop_map(|(interior, left)| HalfLineWalkSpec { interior, left })
    }
}

/// Roots of `qξ² − (1−r)ξ + p`, larger first, by the textbook formula.
pub fn quadratic_roots(p: &PqrsParams) -> (f64, f64) {
    let b = 1.0 - p.r;
    let d = (b * b - 4.0 * p.p * p.q).sqrt();
    ((b + d) / (2.0 * p.q), (b - d) / (2.0 * p.q))
}

/// Half-width around the start beyond which the occupancy of a translation
/// invariant walk is below `tol` (relative).
pub fn reach(p: &PqrsParams, tol: f64) -> i64 {
    let (x1, x2) = quadratic_roots(p);
    let decay = x2.max(1.0 / x1);
    (tol.ln() / decay.ln()).ceil() as i64 + 2
}

/// One-step convolution of the free walk from 0, `n` times.
pub fn convolve(p: &PqrsParams, n: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![1.0]];
    for step in 1..=n {
        let prev = &out[step - 1];
        let mut next = vec![0.0; 2 * step + 1];
        for (idx, &m) in prev.iter().enumerate() {
            // prev index idx is state idx - (step - 1); next index is state + step
            next[idx + 1] += m * p.r;
            next[idx + 2] += m * p.p;
            next[idx] += m * p.q;
        }
        out.push(next);
    }
    out
}
