//! JSON model files.
//!
//! ```json
//! { "kind": "banded", "offsets": [-1, 0, 1], "stencil": [-1, 2.5, -1],
//!   "envelope": { "c": 0.5, "norm_bound": 4.5, "d": 0 },
//!   "boundary": { "kind": "zero" } }
//! { "kind": "lattice", "a": 1, "b": 1 }
//! ```
//!
//! Stencil values are numbers or `[re, im]` pairs. `boundary` is optional:
//! lattice models default to periodic, banded models to zero. Corner entries
//! `[i, j, re, im]` address the window edges by side, `-1` for `-P` and `1`
//! for `Q`.

use num_complex::Complex64;
use serde::Deserialize;

use crate::driver::{BoundaryPolicy, CornerBoundary, ZeroBoundary};
use crate::error::{Error, Result};
use crate::lattice::{lattice_spec, LatticeModelParams, PeriodicBoundary};
use crate::matrix::{InfiniteMatrixSpec, SpectralEnvelope};

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Scalar> for Complex64 {
    fn from(s: Scalar) -> Self {
        match s {
            Scalar::Real(re) => Complex64::new(re, 0.0),
            Scalar::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeConfig {
    pub c: f64,
    pub norm_bound: f64,
    #[serde(default)]
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BoundaryConfig {
    Zero,
    Periodic,
    Corners { entries: Vec<[f64; 4]> },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MatrixConfig {
    Banded {
        offsets: Vec<i64>,
        stencil: Vec<Scalar>,
        envelope: EnvelopeConfig,
        #[serde(default)]
        boundary: Option<BoundaryConfig>,
    },
    Lattice {
        a: f64,
        b: f64,
        #[serde(default)]
        boundary: Option<BoundaryConfig>,
    },
}

/// A matrix together with the boundary policy used to truncate it.
pub struct Model {
    pub spec: InfiniteMatrixSpec,
    pub policy: Box<dyn BoundaryPolicy>,
    pub lattice: Option<LatticeModelParams>,
}

impl std::fmt::Debug for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Model")
            .field("spec", &self.spec)
            .field("lattice", &self.lattice)
            .finish_non_exhaustive()
    }
}

impl MatrixConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn build(&self) -> Result<Model> {
        match self {
            MatrixConfig::Banded {
                offsets,
                stencil,
                envelope,
                boundary,
            } => {
                let env = SpectralEnvelope::new(envelope.c, envelope.norm_bound, envelope.d)
                    .map_err(|e| Error::Config(format!("envelope: {e}")))?;
                let values: Vec<Complex64> = stencil.iter().map(|&s| s.into()).collect();
                let spec = InfiniteMatrixSpec::banded(offsets, &values, env)
                    .map_err(|e| Error::Config(format!("stencil: {e}")))?;
                let policy: Box<dyn BoundaryPolicy> = match boundary {
                    None | Some(BoundaryConfig::Zero) => Box::new(ZeroBoundary),
                    Some(BoundaryConfig::Periodic) => {
                        return Err(Error::Config(
                            "boundary: periodic boundary is only defined for lattice models".into(),
                        ))
                    }
                    Some(BoundaryConfig::Corners { entries }) => Box::new(corner_policy(entries)?),
                };
                Ok(Model { spec, policy, lattice: None })
            }
            MatrixConfig::Lattice { a, b, boundary } => {
                let params = LatticeModelParams::new(*a, *b).map_err(|e| Error::Config(format!("lattice: {e}")))?;
                let policy: Box<dyn BoundaryPolicy> = match boundary {
                    None | Some(BoundaryConfig::Periodic) => Box::new(PeriodicBoundary(params)),
                    Some(BoundaryConfig::Zero) => Box::new(ZeroBoundary),
                    Some(BoundaryConfig::Corners { entries }) => Box::new(corner_policy(entries)?),
                };
                Ok(Model {
                    spec: lattice_spec(params),
                    policy,
                    lattice: Some(params),
                })
            }
        }
    }
}

fn corner_policy(entries: &[[f64; 4]]) -> Result<CornerBoundary> {
    let side = |v: f64| -> Result<bool> {
        match v {
            -1.0 => Ok(false),
            1.0 => Ok(true),
            other => Err(Error::Config(format!(
                "boundary.entries: corner side {other} must be -1 (for -P) or 1 (for Q)"
            ))),
        }
    };
    let mut slots: [[Option<Complex64>; 2]; 2] = [[None; 2]; 2];
    for &[i, j, re, im] in entries {
        let (hi_i, hi_j) = (side(i)?, side(j)?);
        let slot = &mut slots[hi_i as usize][hi_j as usize];
        if slot.is_some() {
            return Err(Error::Config(format!("boundary.entries: corner ({i}, {j}) given twice")));
        }
        *slot = Some(Complex64::new(re, im));
    }
    let get = |i: usize, j: usize| slots[i][j].unwrap_or_default();
    for k in 0..2 {
        if get(k, k).im != 0.0 {
            return Err(Error::Config("boundary.entries: diagonal corners must be real".into()));
        }
    }
    if get(0, 1) != get(1, 0).conj() {
        return Err(Error::Config(
            "boundary.entries: corners (-1, 1) and (1, -1) must be complex conjugates".into(),
        ));
    }
    Ok(CornerBoundary {
        low_low: get(0, 0).re,
        low_high: get(0, 1),
        high_high: get(1, 1).re,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Window;

    #[test]
    fn banded_config() {
        let cfg = MatrixConfig::from_json(
            r#"{"kind":"banded","offsets":[-1,0,1],"stencil":[[-1,0.5],2.5,[-1,-0.5]],
                "envelope":{"c":0.1,"norm_bound":5,"d":0}}"#,
        )
        .unwrap();
        let model = cfg.build().unwrap();
        assert_eq!(model.spec.entry(0, 1).unwrap(), Complex64::new(-1.0, -0.5));
        assert_eq!(model.spec.envelope().w(), 5.0);
        assert!(model.policy.boundary(Window::symmetric(3).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn lattice_defaults_to_periodic() {
        let model = MatrixConfig::from_json(r#"{"kind":"lattice","a":1,"b":2}"#).unwrap().build().unwrap();
        let d = model.policy.boundary(Window::new(2, 3).unwrap()).unwrap();
        assert_eq!(d.get(-2, 3), Complex64::new(-2.0, 0.0));
        assert_eq!(model.lattice.unwrap().b(), 2.0);
    }

    #[test]
    fn errors_name_the_field() {
        let e = MatrixConfig::from_json(r#"{"kind":"lattice","a":1}"#).unwrap_err();
        assert!(e.to_string().contains("`b`"), "{e}");
        let e = MatrixConfig::from_json(r#"{"kind":"lattice","a":0,"b":1}"#).unwrap().build().unwrap_err();
        assert!(e.to_string().contains("a = 0"), "{e}");
        let e = MatrixConfig::from_json(
            r#"{"kind":"banded","offsets":[0],"stencil":[1],"envelope":{"c":2,"norm_bound":1}}"#,
        )
        .unwrap()
        .build()
        .unwrap_err();
        assert!(e.to_string().contains("envelope"), "{e}");
        let e = MatrixConfig::from_json(
            r#"{"kind":"banded","offsets":[0],"stencil":[1],"envelope":{"c":1,"norm_bound":1},"boundary":{"kind":"periodic"}}"#,
        )
        .unwrap()
        .build()
        .unwrap_err();
        assert!(e.to_string().contains("periodic"), "{e}");
    }

    #[test]
    fn corner_entries() {
        let model = MatrixConfig::from_json(
            r#"{"kind":"lattice","a":1,"b":1,"boundary":{"kind":"corners","entries":[[-1,1,-0.5,0],[1,-1,-0.5,0],[1,1,0.25,0]]}}"#,
        )
        .unwrap()
        .build()
        .unwrap();
        let d = model.policy.boundary(Window::new(4, 5).unwrap()).unwrap();
        assert_eq!(d.get(-4, 5).re, -0.5);
        assert_eq!(d.get(5, 5).re, 0.25);
        assert_eq!(d.get(-4, -4).re, 0.0);

        let bad = MatrixConfig::from_json(
            r#"{"kind":"lattice","a":1,"b":1,"boundary":{"kind":"corners","entries":[[0,1,1,0]]}}"#,
        )
        .unwrap()
        .build();
        assert!(bad.is_err());
        let asym = MatrixConfig::from_json(
            r#"{"kind":"lattice","a":1,"b":1,"boundary":{"kind":"corners","entries":[[-1,1,1,0]]}}"#,
        )
        .unwrap()
        .build();
        assert!(asym.is_err());
    }
}
