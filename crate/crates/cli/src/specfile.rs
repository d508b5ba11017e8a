//! JSON walk descriptions.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use mfbwalk::walk_model::*;

use crate::failure::Failure;

/// Deviation from 1 that is silently renormalized; anything larger is an error.
const RENORMALIZE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainTag {
    Finite,
    Halfline,
    Fullline,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeFile {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierFile {
    pub fwd: f64,
    pub bwd: f64,
    pub hold: f64,
    pub absorb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkSpecFile {
    pub domain: DomainTag,
    #[serde(default)]
    pub modified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interior: Option<RegimeFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left_regime: Option<RegimeFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right_regime: Option<RegimeFile>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub barriers: BTreeMap<String, BarrierFile>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<i64>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<i64>,
}

fn renormalize<const K: usize>(path: &str, vals: &mut [f64; K]) -> Result<(), Failure> {
    if vals.iter().any(|v| !v.is_finite()) {
        return Ok(()); // left to validation, which names the field
    }
    let sum: f64 = vals.iter().sum();
    let dev = (sum - 1.0).abs();
    if dev > RENORMALIZE_TOLERANCE {
        return Err(Failure::validation(path, format!("sum ≠ 1 (sum = {sum})")));
    }
    if dev > 0.0 {
        for v in vals.iter_mut() {
            *v /= sum;
        }
    }
    Ok(())
}

impl RegimeFile {
    fn params(&self, path: &str) -> Result<PqrsParams, Failure> {
        let mut v = [self.p, self.q, self.r, self.s];
        renormalize(path, &mut v)?;
        Ok(PqrsParams::new(v[0], v[1], v[2], v[3]))
    }
}

impl BarrierFile {
    fn params(&self, path: &str, role: BarrierRole) -> Result<MfbParams, Failure> {
        let mut v = [self.fwd, self.bwd, self.hold, self.absorb];
        renormalize(path, &mut v)?;
        Ok(MfbParams {
            fwd: v[0],
            bwd: v[1],
            hold: v[2],
            absorb: v[3],
            role,
        })
    }
}

impl WalkSpecFile {
    fn regime(&self, key: &str) -> Result<PqrsParams, Failure> {
        let field = match key {
            "interior" => self.interior,
            "left_regime" => self.left_regime,
            _ => self.right_regime,
        };
        field
            .ok_or_else(|| Failure::validation(key, format!("missing key \"{key}\"")))?
            .params(key)
    }

    fn barrier(&self, key: &str, role: BarrierRole) -> Result<MfbParams, Failure> {
        let path = format!("barriers.{key}");
        self.barriers
            .get(key)
            .ok_or_else(|| Failure::validation(&path, format!("missing barrier \"{key}\"")))?
            .params(&path, role)
    }

    fn size(&self, key: &str) -> Result<i64, Failure> {
        let v = if key == "N" { self.n } else { self.m };
        v.ok_or_else(|| Failure::validation(key, format!("missing key \"{key}\"")))
    }

    /// Keys that belong to the chosen shape; anything else present is an error.
    fn check_keys(&self, regimes: &[&str], barriers: &[&str], sizes: &[&str]) -> Result<(), Failure> {
        let present = [
            ("interior", self.interior.is_some()),
            ("left_regime", self.left_regime.is_some()),
            ("right_regime", self.right_regime.is_some()),
            ("N", self.n.is_some()),
            ("M", self.m.is_some()),
        ];
        for (key, here) in present {
            if here && !regimes.contains(&key) && !sizes.contains(&key) {
                return Err(Failure::validation(key, format!("key \"{key}\" does not apply to this domain")));
            }
        }
        for key in self.barriers.keys() {
            if !barriers.contains(&key.as_str()) {
                return Err(Failure::validation(
                    &format!("barriers.{key}"),
                    format!("barrier \"{key}\" does not apply to this domain"),
                ));
            }
        }
        Ok(())
    }

    pub fn to_spec(&self) -> Result<WalkSpec, Failure> {
        use BarrierRole::*;
        let spec = match (self.domain, self.modified) {
            (DomainTag::Finite, false) => {
                self.check_keys(&["interior"], &["0", "N"], &["N"])?;
                WalkSpec::Finite(FiniteWalkSpec {
                    n: self.size("N")?,
                    interior: self.regime("interior")?,
                    left: self.barrier("0", LeftEnd)?,
                    right: self.barrier("N", RightEnd)?,
                })
            }
            (DomainTag::Halfline, false) => {
                self.check_keys(&["interior"], &["0"], &[])?;
                WalkSpec::HalfLine(HalfLineWalkSpec {
                    interior: self.regime("interior")?,
                    left: self.barrier("0", LeftEnd)?,
                })
            }
            (DomainTag::Fullline, false) => {
                self.check_keys(&["interior"], &[], &[])?;
                WalkSpec::FullLine(FullLineWalkSpec {
                    interior: self.regime("interior")?,
                })
            }
            (DomainTag::Finite, true) => {
                self.check_keys(&["left_regime", "right_regime"], &["0", "M", "N"], &["N", "M"])?;
                WalkSpec::ModifiedFinite(ModifiedFiniteSpec {
                    n: self.size("N")?,
                    m: self.size("M")?,
                    right_regime: self.regime("right_regime")?,
                    left_regime: self.regime("left_regime")?,
                    left: self.barrier("0", LeftEnd)?,
                    barrier: self.barrier("M", Interior)?,
                    right: self.barrier("N", RightEnd)?,
                })
            }
            (DomainTag::Halfline, true) => {
                self.check_keys(&["left_regime", "right_regime"], &["0", "M"], &["M"])?;
                WalkSpec::ModifiedHalfLine(ModifiedHalfLineSpec {
                    m: self.size("M")?,
                    right_regime: self.regime("right_regime")?,
                    left_regime: self.regime("left_regime")?,
                    left: self.barrier("0", LeftEnd)?,
                    barrier: self.barrier("M", Interior)?,
                })
            }
            (DomainTag::Fullline, true) => {
                self.check_keys(&["left_regime", "right_regime"], &["0"], &[])?;
                WalkSpec::ModifiedFullLine(ModifiedFullLineSpec {
                    pos_regime: self.regime("right_regime")?,
                    neg_regime: self.regime("left_regime")?,
                    origin: self.barrier("0", Interior)?,
                })
            }
        };
        let report = spec.validate();
        if !report.is_ok() {
            return Err(Failure::invalid(report));
        }
        Ok(spec)
    }
}

/// A validated walk together with the document it came from.
#[derive(Debug)]
pub struct LoadedSpec {
    pub file: WalkSpecFile,
    pub spec: WalkSpec,
}

pub fn parse_str(text: &str) -> Result<LoadedSpec, Failure> {
    let file: WalkSpecFile =
        serde_json::from_str(text).map_err(|e| Failure::validation("$", format!("malformed spec document: {e}")))?;
    let spec = file.to_spec()?;
    Ok(LoadedSpec { file, spec })
}

pub fn parse_spec(path: &Path) -> Result<LoadedSpec, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read spec file {}: {e}", path.display())))?;
    parse_str(&text)
}
