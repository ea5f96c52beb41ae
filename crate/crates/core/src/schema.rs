//! Serde file formats for the command line.
//!
//! Rationals are `"p/q"` strings (plain JSON integers are accepted on
//! input); polynomials are coefficient arrays, lowest degree first; vectors
//! are arrays of rationals.

use serde::{Deserialize, Serialize};

use crate::convexgeo::{InnerProduct, Vector};
use crate::error::{Error, Result};
use crate::hntheta::{AtomRef, SheafProfile, StableAtom};
use crate::quotmodel::{HnType, QuotPoint, QuotStep};
use crate::ratpoly::Polynomial;
use crate::scalar::parse_scalar;
use crate::strata::{GroupKind, SupportPoint, WeightSystem};
use crate::{IntPolynomial, RatVector, Rational};

#[derive(Deserialize)]
#[serde(untagged)]
enum RawScalar {
    Str(String),
    Int(i64),
}

/// A rational that serialises as `"p/q"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawScalar", into = "String")]
pub struct Rat(pub Rational);

impl TryFrom<RawScalar> for Rat {
    type Error = String;
    fn try_from(r: RawScalar) -> std::result::Result<Self, String> {
        match r {
            RawScalar::Int(v) => Ok(Rat(Rational::from_integer(v.into()))),
            RawScalar::Str(s) => parse_scalar(&s)
                .map(Rat)
                .ok_or_else(|| format!("not a rational: {s:?}")),
        }
    }
}

impl From<Rat> for String {
    fn from(r: Rat) -> Self {
        r.0.to_string()
    }
}

impl From<Rational> for Rat {
    fn from(r: Rational) -> Self {
        Rat(r)
    }
}

pub fn rats(v: &[Rational]) -> Vec<Rat> {
    v.iter().cloned().map(Rat).collect()
}

fn unrat(v: &[Rat]) -> Vec<Rational> {
    v.iter().map(|r| r.0.clone()).collect()
}

pub fn vector_json(v: &RatVector) -> Vec<Rat> {
    rats(v.entries())
}

pub fn poly_json(p: &IntPolynomial) -> Vec<Rat> {
    rats(p.coeffs())
}

fn poly(v: &[Rat]) -> IntPolynomial {
    Polynomial::new(unrat(v))
}

fn vector(v: &[Rat], dim: usize) -> Result<RatVector> {
    if v.len() != dim {
        return Err(Error::Dimension {
            expected: dim,
            found: v.len(),
        });
    }
    Ok(Vector::new(unrat(v)))
}

fn default_group() -> GroupKind {
    GroupKind::Torus
}

/// Weights of a torus action, optionally with a candidate index, a support
/// and a perturbed weight list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsFile {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<Vec<Vec<Rat>>>,
    pub weights: Vec<Vec<Rat>>,
    #[serde(default = "default_group")]
    pub group: GroupKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<Rat>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbed: Option<Vec<Vec<Rat>>>,
}

impl WeightsFile {
    pub fn inner_product(&self) -> Result<InnerProduct<Rational>> {
        match &self.gram {
            None => Ok(InnerProduct::identity(self.dim)),
            Some(g) => {
                if g.len() != self.dim {
                    return Err(Error::Dimension {
                        expected: self.dim,
                        found: g.len(),
                    });
                }
                InnerProduct::new(g.iter().map(|r| unrat(r)).collect())
            }
        }
    }

    fn system_from(&self, weights: &[Vec<Rat>]) -> Result<WeightSystem<Rational>> {
        let ws = weights
            .iter()
            .map(|w| vector(w, self.dim))
            .collect::<Result<_>>()?;
        WeightSystem::new(ws, self.inner_product()?, self.group)
    }

    pub fn system(&self) -> Result<WeightSystem<Rational>> {
        self.system_from(&self.weights)
    }

    pub fn perturbed_system(&self) -> Result<Option<WeightSystem<Rational>>> {
        self.perturbed.as_ref().map(|p| self.system_from(p)).transpose()
    }

    pub fn beta(&self) -> Result<Option<RatVector>> {
        self.beta.as_ref().map(|b| vector(b, self.dim)).transpose()
    }

    pub fn support(&self) -> Result<Option<SupportPoint>> {
        self.support.clone().map(SupportPoint::new).transpose()
    }
}

/// A Harder–Narasimhan type, optionally with a stability parameter, a
/// point to test for minimality and a sample count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauFile {
    pub e: usize,
    pub polys: Vec<Vec<Rat>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<Rat>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<Rat>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

impl TauFile {
    pub fn from_type(tau: &HnType<Rational>) -> Self {
        Self {
            e: tau.e(),
            polys: tau.polys().iter().map(poly_json).collect(),
            theta: None,
            point: None,
            samples: None,
        }
    }

    pub fn tau(&self) -> Result<HnType<Rational>> {
        HnType::new(self.polys.iter().map(|p| poly(p)).collect(), self.e)
    }

    pub fn theta(&self) -> Option<Vec<Rational>> {
        self.theta.as_deref().map(unrat)
    }

    pub fn point(&self) -> Option<Vec<Rational>> {
        self.point.as_deref().map(unrat)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomJson {
    pub id: String,
    pub poly: Vec<Rat>,
}

/// A sheaf profile, optionally with a stability parameter and a filtration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFile {
    pub e: usize,
    pub layers: Vec<Vec<AtomJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<Rat>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<Vec<AtomRef>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<i64>>,
}

impl ProfileFile {
    pub fn from_profile(p: &SheafProfile<Rational>) -> Self {
        Self {
            e: p.e(),
            layers: p
                .layers()
                .iter()
                .map(|l| {
                    l.iter()
                        .map(|a| AtomJson {
                            id: a.id.clone(),
                            poly: poly_json(&a.poly),
                        })
                        .collect()
                })
                .collect(),
            theta: None,
            blocks: None,
            weights: None,
        }
    }

    pub fn profile(&self) -> Result<SheafProfile<Rational>> {
        let layers = self
            .layers
            .iter()
            .map(|l| l.iter().map(|a| StableAtom::new(a.id.clone(), poly(&a.poly))).collect())
            .collect();
        SheafProfile::new(self.e, layers)
    }

    pub fn theta(&self) -> Option<Vec<Rational>> {
        self.theta.as_deref().map(unrat)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepJson {
    pub dim: u64,
    pub poly: Vec<Rat>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuotFile {
    pub total: Vec<Rat>,
    pub n: i64,
    pub steps: Vec<StepJson>,
    pub weights: Vec<i64>,
}

impl QuotFile {
    pub fn from_point(q: &QuotPoint<Rational>) -> Self {
        Self {
            total: poly_json(q.total()),
            n: q.n(),
            steps: q
                .steps()
                .iter()
                .map(|s| StepJson {
                    dim: s.dim,
                    poly: poly_json(&s.poly),
                })
                .collect(),
            weights: q.weights().to_vec(),
        }
    }

    pub fn point(&self) -> Result<QuotPoint<Rational>> {
        let steps = self
            .steps
            .iter()
            .map(|s| QuotStep {
                dim: s.dim,
                poly: poly(&s.poly),
            })
            .collect();
        QuotPoint::new(poly(&self.total), self.n, steps, self.weights.clone())
    }
}

/// Two profiles, for direct sums and S-equivalence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairFile {
    pub a: ProfileFile,
    pub b: ProfileFile,
    #[serde(default)]
    pub strict: bool,
}
