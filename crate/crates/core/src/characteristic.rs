//! Roots of `qzξ² − (1−rz)ξ + pz = 0` and their z-derivatives.
//!
//! Every closed form in this crate is a combination of powers of the two
//! roots, scaled by `ζ_z = [(1−rz)² − 4pqz²]^{-1/2}`.

use serde::{Deserialize, Serialize};

use crate::dual::Dual;
use crate::error::{Error, Result};
use crate::walk_model::PqrsParams;

/// Discriminants below this are treated as coincident roots.
pub const DEGENERACY_THRESHOLD: f64 = 1e-14;

/// Characteristic roots of one regime at generating-function argument `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicRoots {
    /// Larger root ξ1(z).
    pub xi1: f64,
    /// Smaller root ξ2(z).
    pub xi2: f64,
    /// ζ_z, the reciprocal square root of the discriminant.
    pub zeta: f64,
    /// `√((1−r)² − 4pq)`, the square root of the discriminant at z = 1.
    pub lambda: f64,
    pub z: f64,
}

/// z-derivatives of ξ1, ξ2 and ζ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootDerivatives {
    pub dxi1: f64,
    pub dxi2: f64,
    pub dzeta: f64,
}

fn discriminant(params: &PqrsParams, z: f64) -> f64 {
    let b = 1.0 - params.r * z;
    b * b - 4.0 * params.p * params.q * z * z
}

/// Both roots at `z ∈ (0, 1]`, larger first.
///
/// The larger root is formed without cancellation and the smaller one is
/// recovered from the product `ξ1ξ2 = p/q`.
pub fn roots_at(params: &PqrsParams, z: f64) -> Result<CharacteristicRoots> {
    if !(params.q > 0.0) {
        return Err(Error::Precondition("characteristic roots need q > 0".into()));
    }
    if !(z > 0.0 && z <= 1.0) {
        return Err(Error::Precondition(format!("z must lie in (0, 1], got {z}")));
    }
    let disc = discriminant(params, z);
    if !(disc >= DEGENERACY_THRESHOLD) {
        return Err(Error::DegenerateRoots { discriminant: disc });
    }
    let root = disc.sqrt();
    let b = 1.0 - params.r * z;
    let xi1 = (b + root) / (2.0 * params.q * z);
    let xi2 = params.p / (params.q * xi1);
    let disc1 = discriminant(params, 1.0);
    Ok(CharacteristicRoots {
        xi1,
        xi2,
        zeta: 1.0 / root,
        lambda: disc1.max(0.0).sqrt(),
        z,
    })
}

/// Derivatives at z = 1 from the closed identities
/// `dξ_i/dz = (−1)^i ζ1 ξ_i` and `dζ/dz = ζ1³[r(1−r) + 4pq]`.
pub fn root_derivatives(params: &PqrsParams) -> Result<RootDerivatives> {
    let roots = roots_at(params, 1.0)?;
    let z1 = roots.zeta;
    Ok(RootDerivatives {
        dxi1: -z1 * roots.xi1,
        dxi2: z1 * roots.xi2,
        dzeta: z1.powi(3) * (params.r * (1.0 - params.r) + 4.0 * params.p * params.q),
    })
}

/// Derivatives at an arbitrary `z ∈ (0, 1]` by implicit differentiation.
///
/// With `F = qzξ² − (1−rz)ξ + pz` one has `F_z = ξ/z` on a root and
/// `F_ξ = ±√disc`, so `dξ_i/dz = (−1)^i ζ_z ξ_i / z`.
pub fn root_derivatives_at(params: &PqrsParams, z: f64) -> Result<RootDerivatives> {
    let roots = roots_at(params, z)?;
    let zeta = roots.zeta;
    Ok(RootDerivatives {
        dxi1: -zeta * roots.xi1 / z,
        dxi2: zeta * roots.xi2 / z,
        dzeta: zeta.powi(3) * (params.r * (1.0 - params.r * z) + 4.0 * params.p * params.q * z),
    })
}

/// ξ1, ξ2 and ζ as dual numbers carrying their z-derivatives.
#[derive(Debug, Clone, Copy)]
pub struct DualRoots {
    pub xi1: Dual,
    pub xi2: Dual,
    pub zeta: Dual,
}

pub fn dual_roots(params: &PqrsParams, z: f64) -> Result<DualRoots> {
    let roots = roots_at(params, z)?;
    let der = if z == 1.0 {
        root_derivatives(params)?
    } else {
        root_derivatives_at(params, z)?
    };
    Ok(DualRoots {
        xi1: Dual::new(roots.xi1, der.dxi1),
        xi2: Dual::new(roots.xi2, der.dxi2),
        zeta: Dual::new(roots.zeta, der.dzeta),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    // Independent route: textbook quadratic formula for aξ² + bξ + c = 0.
    fn textbook_roots(a: f64, b: f64, c: f64) -> (f64, f64) {
        let d = (b * b - 4.0 * a * c).sqrt();
        ((-b + d) / (2.0 * a), (-b - d) / (2.0 * a))
    }

    #[test]
    fn uniform_regime_roots() {
        let r = roots_at(&PqrsParams::uniform(), 1.0).unwrap();
        // 0.25ξ² − 0.75ξ + 0.25 = 0
        let (a, b) = textbook_roots(0.25, -0.75, 0.25);
        assert!(close(r.xi1, a, 1e-14) && close(r.xi2, b, 1e-14));
        assert!(close(r.xi1, 2.618_034_0, 1e-7));
        assert!(close(r.xi2, 0.381_966_0, 1e-7));
        assert!(close(r.zeta, 1.0 / 0.3125f64.sqrt(), 1e-14));
        assert!(close(r.zeta, 1.788_854_4, 1e-7));
        assert!(close(r.lambda, 0.3125f64.sqrt(), 1e-15));
    }

    #[test]
    fn biased_regime_roots() {
        let p = PqrsParams::new(0.4, 0.2, 0.2, 0.2);
        let r = roots_at(&p, 1.0).unwrap();
        let (a, b) = textbook_roots(0.2, -0.8, 0.4);
        assert!(close(r.xi1, a, 1e-14) && close(r.xi2, b, 1e-14));
        assert!(close(r.xi1, 3.414_213_6, 1e-7));
        assert!(close(r.xi2, 0.585_786_4, 1e-7));
        assert!(close(r.zeta, 1.767_767_0, 1e-7));
        assert!(close(r.xi1 * r.xi2, 2.0, 1e-12));
    }

    #[test]
    fn uniform_regime_derivatives() {
        let d = root_derivatives(&PqrsParams::uniform()).unwrap();
        let r = roots_at(&PqrsParams::uniform(), 1.0).unwrap();
        assert!(close(d.dxi1, -r.zeta * r.xi1, 1e-15));
        assert!(close(d.dxi1, -4.683_281_6, 1e-7));
        assert!(close(d.dxi2, 0.683_281_6, 1e-7));
    }

    #[test]
    fn degenerate_and_bad_inputs() {
        let sym = PqrsParams::new(0.5, 0.5, 0.0, 0.0);
        match roots_at(&sym, 1.0) {
            Err(Error::DegenerateRoots { discriminant }) => assert!(discriminant.abs() < 1e-14),
            other => panic!("expected degeneracy, got {other:?}"),
        }
        assert!(roots_at(&PqrsParams::new(0.5, 0.0, 0.0, 0.5), 1.0).is_err());
        assert!(roots_at(&PqrsParams::uniform(), 0.0).is_err());
        assert!(roots_at(&PqrsParams::uniform(), 1.5).is_err());
        assert!(matches!(
            root_derivatives(&sym),
            Err(Error::DegenerateRoots { .. })
        ));
    }

    #[test]
    fn general_z_derivatives_reduce_at_one() {
        let p = PqrsParams::new(0.3, 0.15, 0.35, 0.2);
        let a = root_derivatives(&p).unwrap();
        let b = root_derivatives_at(&p, 1.0).unwrap();
        assert!(close(a.dxi1, b.dxi1, 1e-14));
        assert!(close(a.dxi2, b.dxi2, 1e-14));
        assert!(close(a.dzeta, b.dzeta, 1e-13));
    }

    fn params() -> impl Strategy<Value = PqrsParams> {
        (0.02f64..1.0, 0.02f64..1.0, 0.0f64..1.0, 0.05f64..1.0).prop_map(|(p, q, r, s)| {
            let t = p + q + r + s;
            PqrsParams::new(p / t, q / t, r / t, s / t)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn vieta_and_bracketing(params in params(), z in 0.05f64..=1.0) {
            let r = roots_at(&params, z).unwrap();
            prop_assert!((r.xi1 * r.xi2 - params.p / params.q).abs() <= 1e-12 * (params.p / params.q).max(1.0));
            let sum = (1.0 - params.r * z) / (params.q * z);
            prop_assert!((r.xi1 + r.xi2 - sum).abs() <= 1e-12 * sum.max(1.0));
            prop_assert!((r.zeta - 1.0 / (params.q * z * (r.xi1 - r.xi2))).abs() <= 1e-12 * r.zeta.max(1.0));
            prop_assert!(r.xi1 > 1.0);
            prop_assert!(r.xi2 > 0.0 && r.xi2 < 1.0);
        }

        #[test]
        fn residual_at_one(params in params()) {
            let r = roots_at(&params, 1.0).unwrap();
            for x in [r.xi1, r.xi2] {
                let res = params.q * x * x - (1.0 - params.r) * x + params.p;
                prop_assert!(res.abs() < 1e-12 * x.max(1.0) * x.max(1.0));
            }
        }

        #[test]
        fn derivatives_match_finite_differences(params in params()) {
            let h = 1e-5;
            let lo = roots_at(&params, 1.0 - 2.0 * h).unwrap();
            let mid_lo = roots_at(&params, 1.0 - h).unwrap();
            let d = root_derivatives(&params).unwrap();
            // One-sided second-order difference, since z = 1 is the right end.
            let one = roots_at(&params, 1.0).unwrap();
            let fd = |f1: f64, f_h: f64, f_2h: f64| (3.0 * f1 - 4.0 * f_h + f_2h) / (2.0 * h);
            let tol = |x: f64| 1e-6 * x.abs().max(1.0);
            prop_assert!((fd(one.xi1, mid_lo.xi1, lo.xi1) - d.dxi1).abs() < tol(d.dxi1));
            prop_assert!((fd(one.xi2, mid_lo.xi2, lo.xi2) - d.dxi2).abs() < tol(d.dxi2));
            prop_assert!((fd(one.zeta, mid_lo.zeta, lo.zeta) - d.dzeta).abs() < tol(d.dzeta));
        }

        #[test]
        fn interior_central_differences(params in params(), z in 0.2f64..0.9) {
            let h = 1e-5;
            let a = roots_at(&params, z + h).unwrap();
            let b = roots_at(&params, z - h).unwrap();
            let d = root_derivatives_at(&params, z).unwrap();
            let tol = |x: f64| 1e-6 * x.abs().max(1.0);
            prop_assert!(((a.xi1 - b.xi1) / (2.0 * h) - d.dxi1).abs() < tol(d.dxi1));
            prop_assert!(((a.xi2 - b.xi2) / (2.0 * h) - d.dxi2).abs() < tol(d.dxi2));
            prop_assert!(((a.zeta - b.zeta) / (2.0 * h) - d.dzeta).abs() < tol(d.dzeta));
        }

        #[test]
        fn continuity_in_z(params in params(), z in 0.05f64..0.99) {
            let a = roots_at(&params, z).unwrap();
            let b = roots_at(&params, z + 1e-9).unwrap();
            prop_assert!((a.xi1 - b.xi1).abs() < 1e-6 * a.xi1.max(1.0));
            prop_assert!((a.xi2 - b.xi2).abs() < 1e-6);
        }
    }
}
