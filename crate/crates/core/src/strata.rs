//! Instability stratification of a linear action on projective space,
//! computed from the weights of a maximal torus.
//!
//! A point of `ℙⁿ` is modelled by its support, the set of coordinates that do
//! not vanish: the index `β` of its torus stratum, and its membership in
//! `Z_β` and `Y_β`, depend only on which coordinates vanish.
//!
//! The index set `𝓑` collects, up to the Weyl group, the nearest points to
//! the origin of the hulls of all nonempty subsets of weights.
//! [`epsilon_bounds`] and [`check_refinement`] certify that a small
//! perturbation of the weights refines the stratification.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convexgeo::{closest_point, weyl_representative, InnerProduct, Vector};
use crate::error::{Error, Result};
use crate::scalar::{min_of, Scalar};

pub const DEFAULT_INDEX_CAP: usize = 20;
pub const DEFAULT_DENOMINATOR_BOUND: u64 = 1 << 20;

/// Which group acts, fixing the Weyl group used to normalise indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupKind {
    /// Trivial Weyl group.
    #[serde(rename = "torus")]
    Torus,
    /// `SL`. In dimension `d ≥ 2` weights are trace-free diagonal
    /// coordinates permuted by `S_d`; in dimension 1 the coordinate is the
    /// `SL(2)` coroot coordinate, on which the Weyl group acts by `±1`.
    #[serde(rename = "sl")]
    SpecialLinear,
    /// `GL`: diagonal coordinates permuted by `S_d`.
    #[serde(rename = "gl")]
    GeneralLinear,
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupKind::Torus => "torus",
            GroupKind::SpecialLinear => "sl",
            GroupKind::GeneralLinear => "gl",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightSystem<T> {
    weights: Vec<Vector<T>>,
    ip: InnerProduct<T>,
    group: GroupKind,
}

impl<T: Scalar> WeightSystem<T> {
    pub fn new(weights: Vec<Vector<T>>, ip: InnerProduct<T>, group: GroupKind) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Invalid("weight system without weights".into()));
        }
        for w in &weights {
            ip.check_dim(w)?;
        }
        let d = ip.dim();
        if group == GroupKind::SpecialLinear && d >= 2 {
            if let Some(w) = weights.iter().find(|w| !w.coordinate_sum().is_zero()) {
                return Err(Error::Invalid(format!("sl weight {w} is not trace-free")));
            }
        }
        if group != GroupKind::Torus && d >= 2 && !ip.is_permutation_invariant() {
            return Err(Error::Invalid(
                "inner product is not invariant under coordinate permutations".into(),
            ));
        }
        Ok(Self { weights, ip, group })
    }

    /// Euclidean inner product on `ℚ^d`.
    pub fn euclidean(weights: Vec<Vector<T>>, group: GroupKind) -> Result<Self> {
        let d = weights.first().map_or(0, Vector::dim);
        Self::new(weights, InnerProduct::identity(d), group)
    }

    pub fn weights(&self) -> &[Vector<T>] {
        &self.weights
    }

    pub fn ip(&self) -> &InnerProduct<T> {
        &self.ip
    }

    pub fn group(&self) -> GroupKind {
        self.group
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.ip.dim()
    }

    /// Same inner product and group, new weights.
    pub fn with_weights(&self, weights: Vec<Vector<T>>) -> Result<Self> {
        Self::new(weights, self.ip.clone(), self.group)
    }

    /// Representative of the Weyl orbit of `v` in the positive chamber.
    pub fn weyl_rep(&self, v: &Vector<T>) -> Vector<T> {
        match self.group {
            GroupKind::Torus => v.clone(),
            GroupKind::SpecialLinear if v.dim() == 1 => Vector(vec![v.0[0].abs()]),
            GroupKind::SpecialLinear | GroupKind::GeneralLinear => weyl_representative(v),
        }
    }

    fn pairing(&self, i: usize, beta: &Vector<T>) -> T {
        self.ip.pair(&self.weights[i], beta)
    }

    fn subset(&self, idx: &[usize]) -> Vec<Vector<T>> {
        idx.iter().map(|&i| self.weights[i].clone()).collect()
    }
}

/// The coordinates `x_i ≠ 0` of a point of `ℙⁿ`, increasing and nonempty.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct SupportPoint(Vec<usize>);

impl SupportPoint {
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if indices.is_empty() {
            return Err(Error::Invalid("empty support".into()));
        }
        Ok(Self(indices))
    }

    /// Support given by the set bits of `mask`.
    pub fn from_mask(mask: u64) -> Result<Self> {
        Self::new((0..64).filter(|b| mask >> b & 1 == 1).collect())
    }

    /// All `2^n − 1` supports in increasing bitmask order.
    pub fn all(n: usize) -> impl Iterator<Item = SupportPoint> {
        (1u64..(1u64 << n)).map(|m| SupportPoint::from_mask(m).unwrap())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    fn check<T: Scalar>(&self, ws: &WeightSystem<T>) -> Result<()> {
        match self.0.last() {
            Some(&i) if i >= ws.len() => Err(Error::Invalid(format!(
                "support index {i} out of range for {} weights",
                ws.len()
            ))),
            _ => Ok(()),
        }
    }
}

impl TryFrom<Vec<usize>> for SupportPoint {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SupportPoint> for Vec<usize> {
    fn from(s: SupportPoint) -> Self {
        s.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSet<T> {
    /// Chamber representatives in increasing order.
    pub indices: Vec<Vector<T>>,
    /// One weight subset per index whose hull has that nearest point.
    pub witnesses: BTreeMap<Vector<T>, Vec<usize>>,
}

impl<T: Scalar> IndexSet<T> {
    pub fn contains(&self, beta: &Vector<T>) -> bool {
        self.witnesses.contains_key(beta)
    }

    pub fn contains_zero(&self) -> bool {
        self.indices.iter().any(Vector::is_zero)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap || n >= 63 {
        return Err(Error::Capacity { size: n, cap });
    }
    Ok(())
}

/// Exhaustive index set over all nonempty weight subsets.
///
/// The witness recorded for each index is the subset with the smallest
/// bitmask.
pub fn index_set<T: Scalar>(ws: &WeightSystem<T>, cap: usize) -> Result<IndexSet<T>> {
    let n = ws.len();
    check_cap(n, cap)?;
    let labels: Vec<(Vector<T>, Vec<usize>)> = (1u64..(1u64 << n))
        .into_par_iter()
        .map(|mask| {
            let s = SupportPoint::from_mask(mask)?;
            let hull = closest_point(&ws.subset(s.indices()), ws.ip())?;
            Ok((ws.weyl_rep(&hull.point), s.0))
        })
        .collect::<Result<_>>()?;
    let mut witnesses = BTreeMap::new();
    for (beta, subset) in labels {
        witnesses.entry(beta).or_insert(subset);
    }
    Ok(IndexSet {
        indices: witnesses.keys().cloned().collect(),
        witnesses,
    })
}

/// Index of the torus stratum containing points with support `x`: the
/// nearest point to the origin of `conv{α_i : i ∈ x}`, not Weyl-normalised.
///
/// For a non-abelian group this is the stratum for its maximal torus.
pub fn torus_stratum<T: Scalar>(ws: &WeightSystem<T>, x: &SupportPoint) -> Result<Vector<T>> {
    x.check(ws)?;
    let beta = closest_point(&ws.subset(x.indices()), ws.ip())?.point;
    if !y_membership(ws, &beta, x)? {
        return Err(Error::Invariant(format!(
            "support {:?} is not in Y_beta for its own nearest point {beta}",
            x.indices()
        )));
    }
    Ok(beta)
}

fn membership_prelude<T: Scalar>(
    ws: &WeightSystem<T>,
    beta: &Vector<T>,
    x: &SupportPoint,
) -> Result<T> {
    x.check(ws)?;
    ws.ip().check_dim(beta)?;
    Ok(ws.ip().norm_sq(beta))
}

/// `x ∈ Z_β`: every supported weight satisfies `α_i·β = ‖β‖²`.
pub fn z_membership<T: Scalar>(
    ws: &WeightSystem<T>,
    beta: &Vector<T>,
    x: &SupportPoint,
) -> Result<bool> {
    let bb = membership_prelude(ws, beta, x)?;
    Ok(x.indices().iter().all(|&i| ws.pairing(i, beta) == bb))
}

/// `x ∈ Y_β`: every supported weight satisfies `α_i·β ≥ ‖β‖²`, at least one
/// with equality.
pub fn y_membership<T: Scalar>(
    ws: &WeightSystem<T>,
    beta: &Vector<T>,
    x: &SupportPoint,
) -> Result<bool> {
    let bb = membership_prelude(ws, beta, x)?;
    let mut on_plane = false;
    for &i in x.indices() {
        let p = ws.pairing(i, beta);
        if p < bb {
            return Ok(false);
        }
        on_plane |= p == bb;
    }
    Ok(on_plane)
}

/// The retraction `p_β : Y_β → Z_β`, which zeroes every coordinate whose
/// weight lies off the hyperplane `α·β = ‖β‖²`.
pub fn p_beta_retraction<T: Scalar>(
    ws: &WeightSystem<T>,
    beta: &Vector<T>,
    x: &SupportPoint,
) -> Result<SupportPoint> {
    if !y_membership(ws, beta, x)? {
        return Err(Error::NotInY);
    }
    let bb = ws.ip().norm_sq(beta);
    SupportPoint::new(
        x.indices()
            .iter()
            .copied()
            .filter(|&i| ws.pairing(i, beta) == bb)
            .collect(),
    )
}

/// A minimum that may be taken over the empty set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Extended<T> {
    Finite(T),
    Infinite,
}

impl<T: Scalar> Extended<T> {
    pub fn finite(&self) -> Option<&T> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Infinite => None,
        }
    }

    fn min_with(self, v: T) -> Self {
        match self {
            Extended::Infinite => Extended::Finite(v),
            Extended::Finite(u) => Extended::Finite(min_of(u, v)),
        }
    }
}

impl<T: Scalar> fmt::Display for Extended<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EpsilonOptions<T> {
    pub cap: usize,
    /// Denominator scale for square-root brackets.
    pub denominator_bound: u64,
    /// Replaces the hull bound `max_i ‖α_i‖` for `M`.
    pub m_override: Option<T>,
}

impl<T> Default for EpsilonOptions<T> {
    fn default() -> Self {
        Self {
            cap: DEFAULT_INDEX_CAP,
            denominator_bound: DEFAULT_DENOMINATOR_BOUND,
            m_override: None,
        }
    }
}

/// Perturbation tolerances for a weight system.
///
/// `epsilon1` is a certified lower bound and `m_bound` a certified upper
/// bound; each is exact when the relevant norms are rational, as flagged.
/// `epsilon` is then a certified lower bound for
/// `min{1, ε₀/(4M+1), ε₁/3}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsilonBounds<T> {
    pub epsilon0: Extended<T>,
    pub epsilon1: Extended<T>,
    pub epsilon1_exact: bool,
    pub m_bound: T,
    pub m_exact: bool,
    pub epsilon: T,
    pub indices: IndexSet<T>,
}

pub fn epsilon_bounds<T: Scalar>(
    ws: &WeightSystem<T>,
    opts: &EpsilonOptions<T>,
) -> Result<EpsilonBounds<T>> {
    let b = index_set(ws, opts.cap)?;
    let ip = ws.ip();
    let denom = opts.denominator_bound;

    let mut eps0 = Extended::Infinite;
    for beta in &b.indices {
        let bb = ip.norm_sq(beta);
        for i in 0..ws.len() {
            let p = ws.pairing(i, beta);
            if bb > p {
                eps0 = eps0.min_with(bb.clone() - p);
            }
        }
    }

    // |‖a‖ − ‖b‖| = (A − B)/(√A + √B) ≥ (A − B)/(hi√A + hi√B); the minimum over
    // all pairs is attained by consecutive distinct norms.
    let mut norms: Vec<T> = b.indices.iter().map(|v| ip.norm_sq(v)).collect();
    norms.sort();
    norms.dedup();
    let mut eps1 = Extended::Infinite;
    let mut eps1_exact = true;
    for pair in norms.windows(2) {
        let (lo_a, hi_a) = pair[0].sqrt_bracket(denom);
        let (lo_b, hi_b) = pair[1].sqrt_bracket(denom);
        eps1_exact &= lo_a == hi_a && lo_b == hi_b;
        eps1 = eps1.min_with((pair[1].clone() - pair[0].clone()) / (hi_a + hi_b));
    }

    let (m_bound, m_exact) = match &opts.m_override {
        Some(m) => (m.clone(), true),
        None => {
            let max_sq = ws
                .weights()
                .iter()
                .map(|w| ip.norm_sq(w))
                .max()
                .unwrap_or_else(T::zero);
            let (lo, hi) = max_sq.sqrt_bracket(denom);
            (hi.clone(), lo == hi)
        }
    };

    let mut epsilon = T::one();
    if let Some(e0) = eps0.finite() {
        let four_m = T::from_i64(4) * m_bound.clone();
        epsilon = min_of(epsilon, e0.clone() / (four_m + T::one()));
    }
    if let Some(e1) = eps1.finite() {
        epsilon = min_of(epsilon, e1.clone() / T::from_i64(3));
    }

    Ok(EpsilonBounds {
        epsilon0: eps0,
        epsilon1: eps1,
        epsilon1_exact: eps1_exact,
        m_bound,
        m_exact,
        epsilon,
        indices: b,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinementRow<T> {
    pub support: SupportPoint,
    pub beta: Vector<T>,
    pub gamma: Vector<T>,
}

/// A perturbed index `γ` and the unperturbed index `β_γ` it refines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Correspondence<T> {
    pub gamma: Vector<T>,
    /// Weights `i` with `α_i^per·γ ≥ ‖γ‖²`.
    pub far_side: Vec<usize>,
    pub beta_gamma: Vector<T>,
    pub distance_sq: T,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinementReport<T> {
    pub bounds: EpsilonBounds<T>,
    /// `max_i ‖α_i − α_i^per‖²`.
    pub perturbation_sq: T,
    pub rows: Vec<RefinementRow<T>>,
    pub correspondence: Vec<Correspondence<T>>,
    pub violations: Vec<String>,
    pub holds: bool,
}

impl<T: Scalar> RefinementReport<T> {
    /// Every perturbed index refines itself.
    pub fn is_identity(&self) -> bool {
        self.correspondence.iter().all(|c| c.gamma == c.beta_gamma)
    }
}

fn check_compatible<T: Scalar>(ws: &WeightSystem<T>, per: &WeightSystem<T>) -> Result<()> {
    if ws.group() != GroupKind::Torus || per.group() != GroupKind::Torus {
        return Err(Error::Shape("refinement check needs torus weight systems".into()));
    }
    if ws.len() != per.len() {
        return Err(Error::Shape(format!(
            "{} weights against {} perturbed weights",
            ws.len(),
            per.len()
        )));
    }
    if ws.ip() != per.ip() {
        return Err(Error::Shape("perturbed system uses a different inner product".into()));
    }
    Ok(())
}

fn perturbation_sq<T: Scalar>(ws: &WeightSystem<T>, per: &WeightSystem<T>) -> T {
    ws.weights()
        .iter()
        .zip(per.weights())
        .map(|(a, b)| ws.ip().norm_sq(&(a - b)))
        .max()
        .unwrap_or_else(T::zero)
}

fn stratum_table<T: Scalar>(
    ws: &WeightSystem<T>,
    per: &WeightSystem<T>,
) -> Result<Vec<RefinementRow<T>>> {
    let n = ws.len();
    (1u64..(1u64 << n))
        .into_par_iter()
        .map(|mask| {
            let support = SupportPoint::from_mask(mask)?;
            Ok(RefinementRow {
                beta: torus_stratum(ws, &support)?,
                gamma: torus_stratum(per, &support)?,
                support,
            })
        })
        .collect()
}

fn correspondences<T: Scalar>(
    ws: &WeightSystem<T>,
    per: &WeightSystem<T>,
    rows: &[RefinementRow<T>],
) -> Result<Vec<Correspondence<T>>> {
    let mut gammas: Vec<&Vector<T>> = rows.iter().map(|r| &r.gamma).collect();
    gammas.sort();
    gammas.dedup();
    gammas
        .into_iter()
        .map(|gamma| {
            let gg = per.ip().norm_sq(gamma);
            let far_side: Vec<usize> = (0..per.len())
                .filter(|&i| per.pairing(i, gamma) >= gg)
                .collect();
            let beta_gamma =
                ws.weyl_rep(&closest_point(&ws.subset(&far_side), ws.ip())?.point);
            let distance_sq = ws.ip().norm_sq(&(gamma - &beta_gamma));
            Ok(Correspondence {
                gamma: gamma.clone(),
                far_side,
                beta_gamma,
                distance_sq,
            })
        })
        .collect()
}

/// Conditions on the perturbation: (b) every weight moves by less than `ε`,
/// which bounds `‖μ − μ_per‖` because both moment images are convex
/// combinations of the weights; (a) every perturbed index lies within `ε` of
/// the index it is sent to.
fn certify<T: Scalar>(
    eps: &T,
    pert_sq: &T,
    corr: &[Correspondence<T>],
) -> Result<()> {
    let eps_sq = eps.clone() * eps.clone();
    if pert_sq >= &eps_sq {
        return Err(Error::PerturbationTooLarge {
            bound: "max_i |alpha_i - alpha_i^per|^2".into(),
            value: pert_sq.to_string(),
            limit: eps_sq.to_string(),
        });
    }
    if let Some(c) = corr.iter().find(|c| c.distance_sq >= eps_sq) {
        return Err(Error::PerturbationTooLarge {
            bound: format!("|gamma - beta_gamma|^2 at gamma = {}", c.gamma),
            value: c.distance_sq.to_string(),
            limit: eps_sq.to_string(),
        });
    }
    Ok(())
}

/// Verifies on every support that the perturbed stratification refines the
/// original one.
///
/// The perturbation must be certified small: see [`certify`] for the two
/// conditions checked against [`epsilon_bounds`]. Then for each perturbed
/// index `γ`, every support labelled `γ` must carry the original label
/// `β_γ`, the nearest point of the original weights indexed by
/// `{i : α_i^per·γ ≥ ‖γ‖²}`.
pub fn check_refinement<T: Scalar>(
    ws: &WeightSystem<T>,
    per: &WeightSystem<T>,
    opts: &EpsilonOptions<T>,
) -> Result<RefinementReport<T>> {
    check_compatible(ws, per)?;
    let bounds = epsilon_bounds(ws, opts)?;
    let pert_sq = perturbation_sq(ws, per);
    let rows = stratum_table(ws, per)?;
    let correspondence = correspondences(ws, per, &rows)?;
    certify(&bounds.epsilon, &pert_sq, &correspondence)?;

    let target: BTreeMap<&Vector<T>, &Vector<T>> = correspondence
        .iter()
        .map(|c| (&c.gamma, &c.beta_gamma))
        .collect();
    let mut violations = Vec::new();
    for row in &rows {
        let expected = target[&row.gamma];
        let got = ws.weyl_rep(&row.beta);
        if &got != expected {
            violations.push(format!(
                "support {:?}: perturbed label {} expects {} but original label is {}",
                row.support.indices(),
                row.gamma,
                expected,
                got
            ));
        }
    }
    let holds = violations.is_empty();
    Ok(RefinementReport {
        bounds,
        perturbation_sq: pert_sq,
        rows,
        correspondence,
        violations,
        holds,
    })
}

/// Moves each weight along `directions`, scaled into the certified regime of
/// [`check_refinement`]: the step starts at the largest power of two giving
/// displacements of at most `ε/2` and is halved until both perturbation
/// conditions hold.
pub fn certified_perturbation<T: Scalar>(
    ws: &WeightSystem<T>,
    directions: &[Vector<T>],
    opts: &EpsilonOptions<T>,
) -> Result<WeightSystem<T>> {
    if directions.len() != ws.len() {
        return Err(Error::Shape(format!(
            "{} directions for {} weights",
            directions.len(),
            ws.len()
        )));
    }
    for d in directions {
        ws.ip().check_dim(d)?;
    }
    let bounds = epsilon_bounds(ws, opts)?;
    let dir_sq = directions
        .iter()
        .map(|d| ws.ip().norm_sq(d))
        .max()
        .unwrap_or_else(T::zero);
    if dir_sq.is_zero() {
        return Ok(ws.clone());
    }
    let (_, dir_hi) = dir_sq.sqrt_bracket(opts.denominator_bound);
    let two = T::from_i64(2);
    // a power of two keeps the perturbed weights' denominators small
    let target = bounds.epsilon.clone() / (two.clone() * dir_hi);
    let mut step = T::one();
    while step > target {
        step = step / two.clone();
    }
    for _ in 0..64 {
        let moved: Vec<Vector<T>> = ws
            .weights()
            .iter()
            .zip(directions)
            .map(|(w, d)| w + &d.scale(&step))
            .collect();
        let per = ws.with_weights(moved)?;
        let rows = stratum_table(ws, &per)?;
        let corr = correspondences(ws, &per, &rows)?;
        if certify(&bounds.epsilon, &perturbation_sq(ws, &per), &corr).is_ok() {
            return Ok(per);
        }
        step = step / two.clone();
    }
    Err(Error::PerturbationTooLarge {
        bound: "step".into(),
        value: step.to_string(),
        limit: "no certified step after 64 halvings".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{RatVector, Rational, WeightSystem as Ws};

    fn v(x: &[i64]) -> RatVector {
        Vector::from_ints(x)
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_frac(n, d)
    }

    fn sp(i: &[usize]) -> SupportPoint {
        SupportPoint::new(i.to_vec()).unwrap()
    }

    fn example_sl2() -> Ws {
        Ws::euclidean(vec![v(&[1]), v(&[-1])], GroupKind::SpecialLinear).unwrap()
    }

    fn example_torus() -> Ws {
        Ws::euclidean(vec![v(&[1]), v(&[-1])], GroupKind::Torus).unwrap()
    }

    fn unit_pair(group: GroupKind) -> Ws {
        Ws::euclidean(vec![v(&[1, 0]), v(&[0, 1])], group).unwrap()
    }

    #[test]
    fn sl2_index_set() {
        let b = index_set(&example_sl2(), DEFAULT_INDEX_CAP).unwrap();
        assert_eq!(b.indices, vec![v(&[0]), v(&[1])]);
        assert_eq!(b.witnesses[&v(&[1])], vec![0]);
        assert_eq!(b.witnesses[&v(&[0])], vec![0, 1]);
    }

    #[test]
    fn torus_index_set_keeps_both_signs() {
        let b = index_set(&example_torus(), DEFAULT_INDEX_CAP).unwrap();
        assert_eq!(b.indices, vec![v(&[-1]), v(&[0]), v(&[1])]);
    }

    #[test]
    fn unit_pair_index_sets() {
        let half = RatVector::new(vec![q(1, 2), q(1, 2)]);
        let gl = index_set(&unit_pair(GroupKind::GeneralLinear), 20).unwrap();
        assert_eq!(gl.indices, vec![half.clone(), v(&[1, 0])]);
        let t = index_set(&unit_pair(GroupKind::Torus), 20).unwrap();
        assert_eq!(t.indices, vec![v(&[0, 1]), half, v(&[1, 0])]);
    }

    #[test]
    fn single_weight_index_set() {
        let ws = Ws::euclidean(vec![v(&[2, 1])], GroupKind::GeneralLinear).unwrap();
        assert_eq!(index_set(&ws, 20).unwrap().indices, vec![v(&[2, 1])]);
    }

    #[test]
    fn witnesses_reproduce_their_index() {
        let ws = Ws::euclidean(
            vec![v(&[2, -1, -1]), v(&[-1, 2, -1]), v(&[0, 1, -1]), v(&[1, 1, -2])],
            GroupKind::SpecialLinear,
        )
        .unwrap();
        let b = index_set(&ws, 20).unwrap();
        for (beta, w) in &b.witnesses {
            let hull = closest_point(&ws.subset(w), ws.ip()).unwrap();
            assert_eq!(&ws.weyl_rep(&hull.point), beta);
            assert_eq!(&weyl_representative(beta), beta);
        }
    }

    #[test]
    fn capacity_error() {
        let ws = Ws::euclidean(vec![v(&[1]); 5], GroupKind::Torus).unwrap();
        assert!(matches!(index_set(&ws, 4), Err(Error::Capacity { size: 5, cap: 4 })));
    }

    #[test]
    fn sl_weights_must_be_trace_free() {
        assert!(Ws::euclidean(vec![v(&[1, 0])], GroupKind::SpecialLinear).is_err());
        let skew = InnerProduct::diagonal(&[q(1, 1), q(2, 1)]).unwrap();
        assert!(WeightSystem::new(vec![v(&[1, -1])], skew, GroupKind::SpecialLinear).is_err());
    }

    #[test]
    fn torus_strata_examples() {
        let ws = example_torus();
        assert_eq!(torus_stratum(&ws, &sp(&[0])).unwrap(), v(&[1]));
        assert_eq!(torus_stratum(&ws, &sp(&[0, 1])).unwrap(), v(&[0]));
        let ws = unit_pair(GroupKind::Torus);
        assert_eq!(
            torus_stratum(&ws, &sp(&[0, 1])).unwrap(),
            RatVector::new(vec![q(1, 2), q(1, 2)])
        );
        assert!(torus_stratum(&ws, &sp(&[2])).is_err());
    }

    #[test]
    fn membership_examples() {
        let ws = example_sl2();
        let one = v(&[1]);
        assert!(z_membership(&ws, &one, &sp(&[0])).unwrap());
        assert!(!z_membership(&ws, &one, &sp(&[0, 1])).unwrap());
        assert!(z_membership(&ws, &v(&[0]), &sp(&[0, 1])).unwrap());
        assert!(y_membership(&ws, &one, &sp(&[0])).unwrap());
        assert!(!y_membership(&ws, &one, &sp(&[1])).unwrap());
        let ws = unit_pair(GroupKind::Torus);
        let half = RatVector::new(vec![q(1, 2), q(1, 2)]);
        assert!(y_membership(&ws, &half, &sp(&[0, 1])).unwrap());
        assert!(matches!(
            z_membership(&ws, &v(&[1]), &sp(&[0])),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn retraction_examples() {
        let ws = example_sl2();
        assert_eq!(p_beta_retraction(&ws, &v(&[1]), &sp(&[0])).unwrap(), sp(&[0]));
        assert!(matches!(
            p_beta_retraction(&ws, &v(&[1]), &sp(&[1])),
            Err(Error::NotInY)
        ));

        let ws = Ws::euclidean(vec![v(&[2]), v(&[1]), v(&[-1])], GroupKind::Torus).unwrap();
        assert_eq!(torus_stratum(&ws, &sp(&[0, 1])).unwrap(), v(&[1]));
        assert_eq!(p_beta_retraction(&ws, &v(&[1]), &sp(&[0, 1])).unwrap(), sp(&[1]));

        let ws = Ws::euclidean(vec![v(&[1, 0]), v(&[0, 1]), v(&[1, 1])], GroupKind::Torus).unwrap();
        let half = RatVector::new(vec![q(1, 2), q(1, 2)]);
        let r = p_beta_retraction(&ws, &half, &sp(&[0, 1, 2])).unwrap();
        assert_eq!(r, sp(&[0, 1]));
        assert!(z_membership(&ws, &half, &r).unwrap());
    }

    #[test]
    fn epsilon_for_sl2_example() {
        let eb = epsilon_bounds(&example_sl2(), &EpsilonOptions::default()).unwrap();
        // ε₀: β = 1, α = −1 gives 1 − (−1); ε₁ = |1 − 0|; M = 1
        assert_eq!(eb.epsilon0, Extended::Finite(q(2, 1)));
        assert_eq!(eb.epsilon1, Extended::Finite(q(1, 1)));
        assert!(eb.epsilon1_exact && eb.m_exact);
        assert_eq!(eb.m_bound, q(1, 1));
        let hand = [q(1, 1), q(2, 1) / (q(4, 1) * q(1, 1) + q(1, 1)), q(1, 3)]
            .into_iter()
            .min()
            .unwrap();
        assert_eq!(eb.epsilon, hand);
        assert_eq!(eb.epsilon, q(1, 3));
    }

    #[test]
    fn epsilon_with_only_the_zero_index() {
        let ws = Ws::euclidean(vec![v(&[0, 0])], GroupKind::Torus).unwrap();
        let eb = epsilon_bounds(&ws, &EpsilonOptions::default()).unwrap();
        assert_eq!(eb.epsilon0, Extended::Infinite);
        assert_eq!(eb.epsilon1, Extended::Infinite);
        assert_eq!(eb.epsilon, q(1, 1));
    }

    #[test]
    fn epsilon_for_unit_pair_is_positive() {
        let ws = unit_pair(GroupKind::Torus);
        let eb = epsilon_bounds(&ws, &EpsilonOptions::default()).unwrap();
        let e0 = eb.epsilon0.finite().unwrap().clone();
        let e1 = eb.epsilon1.finite().unwrap().clone();
        assert!(e0 > q(0, 1) && e1 > q(0, 1) && eb.epsilon > q(0, 1));
        // ε₀ recomputed from the index set: β = (1,0), α = (0,1) → 1
        assert_eq!(e0, q(1, 1));
        // norms 1/√2 and 1 are irrational apart: ε₁ is a strict lower bound
        assert!(!eb.epsilon1_exact);
        let gap_sq = q(3, 2) - q(2, 1) * q(1, 2).sqrt_bracket(1 << 20).0;
        assert!(e1.clone() * e1 <= gap_sq);
    }

    #[test]
    fn zero_perturbation_is_identity_refinement() {
        let ws = example_torus();
        let r = check_refinement(&ws, &ws, &EpsilonOptions::default()).unwrap();
        assert!(r.holds && r.is_identity());
        assert_eq!(r.rows.len(), 3);
    }

    #[test]
    fn small_perturbation_of_sl2_weights_refines() {
        let ws = example_torus();
        // ε = 1/3 here, so δ = 1/10 is inside the radius
        let per = ws
            .with_weights(vec![v(&[1]), RatVector::new(vec![q(-11, 10)])])
            .unwrap();
        let r = check_refinement(&ws, &per, &EpsilonOptions::default()).unwrap();
        assert!(r.holds, "{:?}", r.violations);
        let big = ws.with_weights(vec![v(&[1]), v(&[-2])]).unwrap();
        assert!(matches!(
            check_refinement(&ws, &big, &EpsilonOptions::default()),
            Err(Error::PerturbationTooLarge { .. })
        ));
    }

    #[test]
    fn certified_perturbation_refines() {
        let ws = Ws::euclidean(
            vec![v(&[1, 0]), v(&[0, 1]), v(&[-1, -1]), v(&[2, 1])],
            GroupKind::Torus,
        )
        .unwrap();
        let dirs = vec![v(&[1, -1]), v(&[0, 1]), v(&[1, 1]), v(&[-1, 0])];
        let opts = EpsilonOptions::default();
        let per = certified_perturbation(&ws, &dirs, &opts).unwrap();
        assert!(check_refinement(&ws, &per, &opts).unwrap().holds);
    }

    #[test]
    fn refinement_rejects_non_torus() {
        let ws = example_sl2();
        assert!(matches!(
            check_refinement(&ws, &ws, &EpsilonOptions::default()),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn semistable_iff_origin_in_hull() {
        let ws = Ws::euclidean(
            vec![v(&[1, 0]), v(&[0, 1]), v(&[-1, -1]), v(&[-1, 0])],
            GroupKind::Torus,
        )
        .unwrap();
        for s in SupportPoint::all(ws.len()) {
            let beta = torus_stratum(&ws, &s).unwrap();
            let col: Vec<RatVector> = s.indices().iter().map(|&i| ws.weights()[i].clone()).collect();
            let origin_in_hull = crate::convexgeo::closest_point_oracle(&col, ws.ip())
                .unwrap()
                .point
                .is_zero();
            assert_eq!(beta.is_zero(), origin_in_hull);
            let r = p_beta_retraction(&ws, &beta, &s).unwrap();
            assert!(z_membership(&ws, &beta, &r).unwrap());
        }
    }
}
