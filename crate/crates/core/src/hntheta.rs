//! θ-stability for sheaves of a fixed Harder–Narasimhan type, on a symbolic
//! model.
//!
//! A [`SheafProfile`] is a formal polystable sheaf: a direct sum of stable
//! atoms, grouped into layers by reduced Hilbert polynomial. The layers are
//! its Harder–Narasimhan filtration and define its canonical
//! rigidification. Subsheaves are modelled by sub-sums of atoms, which are
//! automatically compatible with the type, so θ-stability quantifies over
//! those sub-sums. This is exact for the distinguished subobjects of a
//! polystable sheaf; non-split subsheaves of genuine sheaves are outside the
//! model.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quotmodel::HnType;
use crate::ratpoly::{compare_reduced, multiplicity, Polynomial};
use crate::scalar::Scalar;

pub const DEFAULT_ATOM_CAP: usize = 16;

/// A stable sheaf, known by its Hilbert polynomial. The id is a label only.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StableAtom<T> {
    pub id: String,
    pub poly: Polynomial<T>,
}

impl<T: Scalar> StableAtom<T> {
    pub fn new(id: impl Into<String>, poly: Polynomial<T>) -> Self {
        Self { id: id.into(), poly }
    }
}

/// Position of an atom occurrence: `(layer, index within layer)`.
pub type AtomRef = (usize, usize);

/// Layers of atoms with equal reduced Hilbert polynomial, strictly decreasing
/// from layer to layer. Atoms within a layer are kept sorted, so equality is
/// equality of the layer multisets.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SheafProfile<T> {
    e: usize,
    layers: Vec<Vec<StableAtom<T>>>,
}

impl<T: Scalar> SheafProfile<T> {
    pub fn new(e: usize, mut layers: Vec<Vec<StableAtom<T>>>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Invalid("profile without layers".into()));
        }
        for layer in &mut layers {
            if layer.is_empty() {
                return Err(Error::Invalid("empty layer".into()));
            }
            for a in layer.iter() {
                if !multiplicity(&a.poly, e)?.is_positive() {
                    return Err(Error::Degenerate(format!(
                        "atom {} has nonpositive multiplicity",
                        a.id
                    )));
                }
                if !a.poly.is_integer_valued() {
                    return Err(Error::Invalid(format!("atom {} is not integer-valued", a.id)));
                }
            }
            for a in &layer[1..] {
                if compare_reduced(&layer[0].poly, &a.poly, e)? != Ordering::Equal {
                    return Err(Error::Invalid(format!(
                        "atoms {} and {} in one layer have different reduced polynomials",
                        layer[0].id, a.id
                    )));
                }
            }
            layer.sort();
        }
        for w in layers.windows(2) {
            if compare_reduced(&w[0][0].poly, &w[1][0].poly, e)? != Ordering::Greater {
                return Err(Error::Invalid(format!(
                    "reduced polynomials of layers containing {} and {} are not strictly decreasing",
                    w[0][0].id, w[1][0].id
                )));
            }
        }
        Ok(Self { e, layers })
    }

    /// Single-layer profiles, one per atom. Convenient for building sums.
    pub fn atom(e: usize, atom: StableAtom<T>) -> Result<Self> {
        Self::new(e, vec![vec![atom]])
    }

    pub fn e(&self) -> usize {
        self.e
    }

    pub fn layers(&self) -> &[Vec<StableAtom<T>>] {
        &self.layers
    }

    pub fn s(&self) -> usize {
        self.layers.len()
    }

    pub fn atom_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn atom_refs(&self) -> Vec<AtomRef> {
        self.layers
            .iter()
            .enumerate()
            .flat_map(|(i, l)| (0..l.len()).map(move |j| (i, j)))
            .collect()
    }

    pub fn get(&self, r: AtomRef) -> Option<&StableAtom<T>> {
        self.layers.get(r.0).and_then(|l| l.get(r.1))
    }

    pub fn layer_polys(&self) -> Vec<Polynomial<T>> {
        self.layers
            .iter()
            .map(|l| l.iter().map(|a| &a.poly).sum())
            .collect()
    }

    pub fn total(&self) -> Polynomial<T> {
        self.layer_polys().iter().sum()
    }

    fn check_atoms_positive(&self, n: i64) -> Result<()> {
        for a in self.layers.iter().flatten() {
            let v = a.poly.eval_int(n);
            if !v.is_positive() {
                return Err(Error::TwistTooSmall(format!(
                    "atom {} has P({n}) = {v}",
                    a.id
                )));
            }
        }
        Ok(())
    }
}

/// The type `τ = (Σ layer 1, …, Σ layer s)`.
pub fn hn_type<T: Scalar>(profile: &SheafProfile<T>) -> HnType<T> {
    HnType::new(profile.layer_polys(), profile.e).expect("profile layers form a valid type")
}

/// How often each branch of the maximal-destabilising-subsheaf comparison
/// was taken while merging two profiles.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HnSumTrace {
    /// The first summand's leading layer is strictly larger.
    pub case_i: usize,
    /// The second summand's leading layer is strictly larger.
    pub case_ii: usize,
    /// Equal reduced polynomials: the leading layers are added.
    pub case_iii: usize,
}

impl std::ops::AddAssign for HnSumTrace {
    fn add_assign(&mut self, o: Self) {
        self.case_i += o.case_i;
        self.case_ii += o.case_ii;
        self.case_iii += o.case_iii;
    }
}

fn check_degree<T: Scalar>(a: &SheafProfile<T>, b: &SheafProfile<T>) -> Result<()> {
    if a.e != b.e {
        return Err(Error::Degree {
            expected: a.e.to_string(),
            found: b.e.to_string(),
        });
    }
    Ok(())
}

/// Harder–Narasimhan layers of `a ⊕ b`, with branch counts.
///
/// The maximal destabilising subsheaf of `𝓔 ⊕ 𝓕` is `𝓔⁽¹⁾` when
/// `P(𝓔⁽¹⁾) r(𝓕⁽¹⁾) > P(𝓕⁽¹⁾) r(𝓔⁽¹⁾)`, `𝓕⁽¹⁾` in the opposite case and
/// `𝓔⁽¹⁾ ⊕ 𝓕⁽¹⁾` on equality; repeating on the quotient merges the layers.
pub fn direct_sum_hn_traced<T: Scalar>(
    a: &SheafProfile<T>,
    b: &SheafProfile<T>,
) -> Result<(SheafProfile<T>, HnSumTrace)> {
    check_degree(a, b)?;
    let e = a.e;
    let (la, lb) = (a.layer_polys(), b.layer_polys());
    let mut trace = HnSumTrace::default();
    let mut layers = Vec::with_capacity(a.s() + b.s());
    let (mut i, mut j) = (0, 0);
    while i < a.s() && j < b.s() {
        match compare_reduced(&la[i], &lb[j], e)? {
            Ordering::Greater => {
                trace.case_i += 1;
                layers.push(a.layers[i].clone());
                i += 1;
            }
            Ordering::Less => {
                trace.case_ii += 1;
                layers.push(b.layers[j].clone());
                j += 1;
            }
            Ordering::Equal => {
                trace.case_iii += 1;
                let mut l = a.layers[i].clone();
                l.extend(b.layers[j].iter().cloned());
                layers.push(l);
                i += 1;
                j += 1;
            }
        }
    }
    layers.extend(a.layers[i..].iter().cloned());
    layers.extend(b.layers[j..].iter().cloned());
    Ok((SheafProfile::new(e, layers)?, trace))
}

pub fn direct_sum_hn<T: Scalar>(a: &SheafProfile<T>, b: &SheafProfile<T>) -> Result<SheafProfile<T>> {
    direct_sum_hn_traced(a, b).map(|(p, _)| p)
}

/// A sub-sum of atoms. Its filtration by the parent's layers is a
/// generalised Harder–Narasimhan filtration, possibly with repeated steps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubProfile<T> {
    pub selection: Vec<AtomRef>,
    /// `P(𝓕′_i)` per parent layer; zero where the selection misses a layer.
    pub layer_polys: Vec<Polynomial<T>>,
}

impl<T: Scalar> SubProfile<T> {
    pub fn total(&self) -> Polynomial<T> {
        self.layer_polys.iter().sum()
    }
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap || n >= 63 {
        return Err(Error::Capacity { size: n, cap });
    }
    Ok(())
}

/// Every proper nonempty sub-sum of atoms, one per generalised type; the
/// complementary sub-sum is the quotient. Ordered by the smallest selection
/// bitmask realising each type.
pub fn enumerate_subprofiles<T: Scalar>(
    profile: &SheafProfile<T>,
    cap: usize,
) -> Result<Vec<SubProfile<T>>> {
    let refs = profile.atom_refs();
    let n = refs.len();
    check_cap(n, cap)?;
    let s = profile.s();
    let full = (1u64 << n) - 1;
    let types: Vec<(u64, Vec<Polynomial<T>>)> = (1..full)
        .into_par_iter()
        .map(|mask| {
            let mut polys = vec![Polynomial::zero(); s];
            for (b, &(i, j)) in refs.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    polys[i] = &polys[i] + &profile.layers[i][j].poly;
                }
            }
            (mask, polys)
        })
        .collect();
    let mut first: BTreeMap<Vec<Polynomial<T>>, u64> = BTreeMap::new();
    for (mask, polys) in types {
        first.entry(polys).or_insert(mask);
    }
    let mut out: Vec<(u64, SubProfile<T>)> = first
        .into_iter()
        .map(|(layer_polys, mask)| {
            let selection = refs
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, &r)| r)
                .collect();
            (mask, SubProfile { selection, layer_polys })
        })
        .collect();
    out.sort_by_key(|(m, _)| *m);
    Ok(out.into_iter().map(|(_, s)| s).collect())
}

/// A stability parameter `θ ∈ ℚ^s` at twist `n`, with
/// `β′_i = θ_i − Σ_j θ_j P_j(n) / P(n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaParam<T> {
    pub theta: Vec<T>,
    pub n: i64,
    pub beta_prime: Vec<T>,
    tau: HnType<T>,
}

impl<T: Scalar> ThetaParam<T> {
    pub fn new(theta: Vec<T>, n: i64, tau: &HnType<T>) -> Result<Self> {
        if theta.len() != tau.len() {
            return Err(Error::Shape(format!(
                "theta has {} entries for a type with {} blocks",
                theta.len(),
                tau.len()
            )));
        }
        let sizes = tau.block_sizes(n)?;
        let pn = sizes.iter().fold(T::zero(), |a, b| a + b.clone());
        let avg = theta
            .iter()
            .zip(&sizes)
            .fold(T::zero(), |a, (t, c)| a + t.clone() * c.clone())
            / pn;
        let beta_prime = theta.iter().map(|t| t.clone() - avg.clone()).collect();
        Ok(Self {
            theta,
            n,
            beta_prime,
            tau: tau.clone(),
        })
    }

    pub fn tau(&self) -> &HnType<T> {
        &self.tau
    }

    /// `Σ β′_i P_i(n)`, zero by construction.
    pub fn beta_prime_trace(&self) -> T {
        self.tau
            .polys()
            .iter()
            .zip(&self.beta_prime)
            .fold(T::zero(), |a, (p, b)| a + b.clone() * p.eval_int(self.n))
    }

    fn check_profile(&self, profile: &SheafProfile<T>) -> Result<()> {
        if profile.s() != self.theta.len() {
            return Err(Error::Shape(format!(
                "profile has {} layers but theta has {} entries",
                profile.s(),
                self.theta.len()
            )));
        }
        if profile.layer_polys() != self.tau.polys() || profile.e != self.tau.e() {
            return Err(Error::Shape(
                "profile type differs from the type of the stability parameter".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Compare the two sides as rational functions for `n → ∞`.
    Asymptotic,
    /// Compare the two sides at the parameter's twist `n`.
    AtN,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    StrictlySemistable,
    Unstable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Stable => "stable",
            Verdict::StrictlySemistable => "strictly_semistable",
            Verdict::Unstable => "unstable",
        })
    }
}

impl Verdict {
    /// Combines per-subobject comparisons `LHS ⋚ RHS`.
    pub fn from_comparisons(cmps: impl IntoIterator<Item = Ordering>) -> Self {
        let mut v = Verdict::Stable;
        for c in cmps {
            match c {
                Ordering::Less => return Verdict::Unstable,
                Ordering::Equal => v = Verdict::StrictlySemistable,
                Ordering::Greater => {}
            }
        }
        v
    }
}

fn weighted<T: Scalar>(theta: &[T], polys: &[Polynomial<T>]) -> Polynomial<T> {
    theta
        .iter()
        .zip(polys)
        .map(|(t, p)| p.scale(t))
        .fold(Polynomial::zero(), |a, p| &a + &p)
}

/// `Σθ_i P(𝓕′_i)·P(𝓕) − Σθ_i P(𝓕_i)·P(𝓕′)`: the two sides of the
/// θ-inequality, cross-multiplied by the positive denominators.
pub fn theta_difference<T: Scalar>(
    profile: &SheafProfile<T>,
    sub: &SubProfile<T>,
    theta: &[T],
) -> Polynomial<T> {
    let full = profile.layer_polys();
    let lhs = &weighted(theta, &sub.layer_polys) * &profile.total();
    let rhs = &weighted(theta, &full) * &sub.total();
    &lhs - &rhs
}

/// Leading sign of a polynomial: its ordering against zero for large argument.
fn eventual_sign<T: Scalar>(p: &Polynomial<T>) -> Ordering {
    p.leading().cmp(&T::zero())
}

/// `Σθ_i P(𝓕′_i,n)/P(𝓕′,n)` against `Σθ_i P(𝓕_i,n)/P(𝓕,n)`.
pub fn ratio_comparison_at_n<T: Scalar>(
    profile: &SheafProfile<T>,
    sub: &SubProfile<T>,
    theta: &[T],
    n: i64,
) -> Ordering {
    let ev = |ps: &[Polynomial<T>]| -> Vec<T> { ps.iter().map(|p| p.eval_int(n)).collect() };
    let ratio = |vals: &[T]| {
        let num = theta
            .iter()
            .zip(vals)
            .fold(T::zero(), |a, (t, v)| a + t.clone() * v.clone());
        let den = vals.iter().fold(T::zero(), |a, v| a + v.clone());
        num / den
    };
    ratio(&ev(&sub.layer_polys)).cmp(&ratio(&ev(&profile.layer_polys())))
}

/// `Σ β′_i P(𝓕′_i, n)` against zero.
pub fn git_sign<T: Scalar>(sub: &SubProfile<T>, tp: &ThetaParam<T>) -> Ordering {
    sub.layer_polys
        .iter()
        .zip(&tp.beta_prime)
        .fold(T::zero(), |a, (p, b)| a + b.clone() * p.eval_int(tp.n))
        .cmp(&T::zero())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaReport<T> {
    pub verdict: Verdict,
    /// The first subobject violating the inequality, when unstable.
    pub witness: Option<SubProfile<T>>,
    pub subprofiles: usize,
    /// Subobjects on which the GIT sign test gives the same comparison as
    /// the mode's test.
    pub git_agreements: usize,
    pub git_disagreements: usize,
}

/// θ-(semi)stability: `Σθ_i P(𝓕′_i)/P(𝓕′) ≥ Σθ_i P(𝓕_i)/P(𝓕)` for every
/// proper nonzero compatible subobject, strictly for stability.
///
/// In [`Mode::AtN`] every atom must be positive at `n`; the comparison then
/// differs from the GIT test `Σ β′_i P(𝓕′_i, n) ≥ 0` by the positive factor
/// `P(𝓕′, n)`, and any disagreement is an invariant error.
pub fn theta_semistable<T: Scalar>(
    profile: &SheafProfile<T>,
    tp: &ThetaParam<T>,
    mode: Mode,
    cap: usize,
) -> Result<ThetaReport<T>> {
    tp.check_profile(profile)?;
    if mode == Mode::AtN {
        profile.check_atoms_positive(tp.n)?;
    }
    let subs = enumerate_subprofiles(profile, cap)?;
    let cmps: Vec<(Ordering, Ordering)> = subs
        .par_iter()
        .map(|sub| {
            let c = match mode {
                Mode::Asymptotic => eventual_sign(&theta_difference(profile, sub, &tp.theta)),
                Mode::AtN => ratio_comparison_at_n(profile, sub, &tp.theta, tp.n),
            };
            (c, git_sign(sub, tp))
        })
        .collect();
    let git_agreements = cmps.iter().filter(|(c, g)| c == g).count();
    let git_disagreements = cmps.len() - git_agreements;
    if mode == Mode::AtN && git_disagreements > 0 {
        return Err(Error::Invariant(format!(
            "{git_disagreements} subobjects where the ratio test and the GIT test disagree"
        )));
    }
    let verdict = Verdict::from_comparisons(cmps.iter().map(|(c, _)| *c));
    let witness = cmps
        .iter()
        .position(|(c, _)| *c == Ordering::Less)
        .map(|k| subs[k].clone());
    Ok(ThetaReport {
        verdict,
        witness,
        subprofiles: subs.len(),
        git_agreements,
        git_disagreements,
    })
}

/// `(Σ θ_i P_i(n))/P(n) ≥ (Σ θ_i P_i(m))/P(m)`. When this fails there are
/// no θ-semistable sheaves of type `τ`.
pub fn cross_condition<T: Scalar>(tp: &ThetaParam<T>, tau: &HnType<T>, m: i64) -> Result<bool> {
    if m <= tp.n {
        return Err(Error::TwistTooSmall(format!("m = {m} must exceed n = {}", tp.n)));
    }
    if tp.theta.len() != tau.len() {
        return Err(Error::Shape(format!(
            "theta has {} entries for a type with {} blocks",
            tp.theta.len(),
            tau.len()
        )));
    }
    let side = |x: i64| -> Result<T> {
        let vals = tau.block_sizes(x)?;
        let num = tp
            .theta
            .iter()
            .zip(&vals)
            .fold(T::zero(), |a, (t, v)| a + t.clone() * v.clone());
        Ok(num / vals.iter().fold(T::zero(), |a, v| a + v.clone()))
    };
    Ok(side(tp.n)? >= side(m)?)
}

/// A filtration `𝓕^{[1]} ⊂ ⋯ ⊂ 𝓕^{[r]}` of a profile by sub-sums of atoms,
/// given by its graded pieces, with the weights `k_1 > ⋯ > k_r` of the
/// one-parameter subgroup.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Filtration {
    pub blocks: Vec<Vec<AtomRef>>,
    pub weights: Vec<i64>,
}

fn check_blocks<T: Scalar>(profile: &SheafProfile<T>, blocks: &[Vec<AtomRef>]) -> Result<()> {
    if blocks.is_empty() || blocks.iter().any(Vec::is_empty) {
        return Err(Error::Invalid("filtration blocks must be nonempty".into()));
    }
    let mut seen: Vec<AtomRef> = blocks.iter().flatten().copied().collect();
    seen.sort_unstable();
    if seen != profile.atom_refs() {
        return Err(Error::Invalid(
            "filtration blocks must partition the atoms of the profile".into(),
        ));
    }
    Ok(())
}

/// `c[j][i] = P(𝓕_i^j, n)`, the layer-`i` content of block `j` at `n`.
fn block_contents<T: Scalar>(
    profile: &SheafProfile<T>,
    blocks: &[Vec<AtomRef>],
    n: i64,
) -> Vec<Vec<T>> {
    blocks
        .iter()
        .map(|b| {
            let mut row = vec![T::zero(); profile.s()];
            for &(i, j) in b {
                row[i] = row[i].clone() + profile.layers[i][j].poly.eval_int(n);
            }
            row
        })
        .collect()
}

fn check_epsilon<T: Scalar>(eps: &T) -> Result<()> {
    if !eps.is_positive() {
        return Err(Error::Invalid(format!("epsilon = {eps} must be positive")));
    }
    Ok(())
}

fn perturbed_hm_weighted<T: Scalar>(
    contents: &[Vec<T>],
    weights: &[T],
    tp: &ThetaParam<T>,
    eps: &T,
) -> Result<T> {
    let dims: Vec<T> = contents
        .iter()
        .map(|row| row.iter().fold(T::zero(), |a, v| a + v.clone()))
        .collect();
    let sl = weights
        .iter()
        .zip(&dims)
        .fold(T::zero(), |a, (k, d)| a + k.clone() * d.clone());
    if !sl.is_zero() {
        return Err(Error::NotSl(sl.to_string()));
    }
    let mut total = T::zero();
    for (row, k) in contents.iter().zip(weights) {
        for (c, b) in row.iter().zip(&tp.beta_prime) {
            total = total + k.clone() * b.clone() * c.clone();
        }
    }
    Ok(eps.clone() * total)
}

/// `μ(ρ, λ) = ε Σ_j Σ_i k_j β′_i P(𝓕_i^j, n)` for the perturbed
/// linearisation.
pub fn perturbed_hm<T: Scalar>(
    profile: &SheafProfile<T>,
    filtration: &Filtration,
    tp: &ThetaParam<T>,
    eps: &T,
) -> Result<T> {
    tp.check_profile(profile)?;
    check_epsilon(eps)?;
    check_blocks(profile, &filtration.blocks)?;
    if filtration.weights.len() != filtration.blocks.len() {
        return Err(Error::Shape(format!(
            "{} weights for {} blocks",
            filtration.weights.len(),
            filtration.blocks.len()
        )));
    }
    if filtration.weights.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::Invalid(format!(
            "weights {:?} are not strictly decreasing",
            filtration.weights
        )));
    }
    let contents = block_contents(profile, &filtration.blocks, tp.n);
    let k: Vec<T> = filtration.weights.iter().map(|&k| T::from_i64(k)).collect();
    perturbed_hm_weighted(&contents, &k, tp, eps)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaReport<T> {
    /// `γ_j = −ε Σ_i β′_i P(𝓕_i^j, n) / P(𝓕^j, n)`.
    pub gamma: Vec<T>,
    /// `P(𝓕^j, n)`.
    pub block_dims: Vec<T>,
    /// `D`, the least common denominator of the `γ_j`.
    pub denominator: T,
    /// `ε Σ_j Σ_i (Dγ_j) β′_i P(𝓕_i^j, n)`.
    pub hm_at_cleared: T,
    /// `‖γ‖² = Σ_j γ_j² P(𝓕^j, n)`.
    pub norm_sq: T,
    /// `Σ γ_j P(𝓕^j, n) = 0`.
    pub trace_free: bool,
    /// `hm_at_cleared = −D‖γ‖²`.
    pub normalized: bool,
}

/// The index `γ` of the perturbed stratum attached to a destabilising
/// filtration. The order of the blocks must make `γ` strictly decreasing.
pub fn gamma_of_destabilizing<T: Scalar>(
    profile: &SheafProfile<T>,
    blocks: &[Vec<AtomRef>],
    tp: &ThetaParam<T>,
    eps: &T,
) -> Result<GammaReport<T>> {
    tp.check_profile(profile)?;
    check_epsilon(eps)?;
    check_blocks(profile, blocks)?;
    profile.check_atoms_positive(tp.n)?;
    let contents = block_contents(profile, blocks, tp.n);
    let block_dims: Vec<T> = contents
        .iter()
        .map(|row| row.iter().fold(T::zero(), |a, v| a + v.clone()))
        .collect();
    let gamma: Vec<T> = contents
        .iter()
        .zip(&block_dims)
        .map(|(row, d)| {
            let s = row
                .iter()
                .zip(&tp.beta_prime)
                .fold(T::zero(), |a, (c, b)| a + b.clone() * c.clone());
            -(eps.clone() * s) / d.clone()
        })
        .collect();
    if gamma.windows(2).any(|w| w[0] <= w[1]) {
        let list: Vec<String> = gamma.iter().map(ToString::to_string).collect();
        return Err(Error::NotAdapted(list.join(", ")));
    }
    let trace = gamma
        .iter()
        .zip(&block_dims)
        .fold(T::zero(), |a, (g, d)| a + g.clone() * d.clone());
    let norm_sq = gamma
        .iter()
        .zip(&block_dims)
        .fold(T::zero(), |a, (g, d)| a + g.clone() * g.clone() * d.clone());
    let denominator = T::denominator_lcm(&gamma);
    let cleared: Vec<T> = gamma.iter().map(|g| g.clone() * denominator.clone()).collect();
    let hm_at_cleared = perturbed_hm_weighted(&contents, &cleared, tp, eps)?;
    let normalized = hm_at_cleared == -(denominator.clone() * norm_sq.clone());
    if !trace.is_zero() || !normalized {
        return Err(Error::Invariant(format!(
            "gamma normalisation fails: trace {trace}, weight {hm_at_cleared} vs -D|gamma|^2 = {}",
            -(denominator.clone() * norm_sq)
        )));
    }
    Ok(GammaReport {
        gamma,
        block_dims,
        denominator,
        hm_at_cleared,
        norm_sq,
        trace_free: true,
        normalized,
    })
}

/// Equality of the graded objects, layer by layer, up to relabelling atoms;
/// `strict` also compares ids.
pub fn s_equivalent<T: Scalar>(a: &SheafProfile<T>, b: &SheafProfile<T>, strict: bool) -> bool {
    if a.e != b.e || a.s() != b.s() {
        return false;
    }
    if strict {
        return a == b;
    }
    a.layers.iter().zip(&b.layers).all(|(x, y)| {
        let mut px: Vec<&Polynomial<T>> = x.iter().map(|t| &t.poly).collect();
        let mut py: Vec<&Polynomial<T>> = y.iter().map(|t| &t.poly).collect();
        px.sort();
        py.sort();
        px == py
    })
}

/// Where the at-`n` verdict settles on the asymptotic one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stabilization<T> {
    pub asymptotic: Verdict,
    /// Beyond this every comparison polynomial and every atom has its
    /// eventual sign (largest Cauchy root bound).
    pub cauchy_bound: T,
    /// Smallest `n₀ ≥ 1` with at-`n` verdict equal to the asymptotic one for
    /// every `n ≥ n₀`.
    pub stable_from: i64,
}

/// Scans `n` from the Cauchy bound down to 1.
pub fn stabilization_threshold<T: Scalar>(
    profile: &SheafProfile<T>,
    theta: &[T],
    cap: usize,
    max_scan: i64,
) -> Result<Stabilization<T>> {
    if theta.len() != profile.s() {
        return Err(Error::Shape(format!(
            "theta has {} entries for {} layers",
            theta.len(),
            profile.s()
        )));
    }
    let subs = enumerate_subprofiles(profile, cap)?;
    let diffs: Vec<Polynomial<T>> = subs
        .iter()
        .map(|s| theta_difference(profile, s, theta))
        .collect();
    let asymptotic = Verdict::from_comparisons(diffs.iter().map(|d| {
        if d.is_zero() {
            Ordering::Equal
        } else {
            eventual_sign(d)
        }
    }));
    let bound = diffs
        .iter()
        .filter(|d| !d.is_zero())
        .map(Polynomial::sign_threshold)
        .chain(profile.layers.iter().flatten().map(|a| a.poly.sign_threshold()))
        .max()
        .unwrap_or_else(T::one);
    let top = bound
        .floor_i64()
        .map(|f| f + 1)
        .filter(|&t| t <= max_scan)
        .ok_or(Error::Capacity {
            size: usize::MAX,
            cap: max_scan.max(0) as usize,
        })?;
    let verdict_at = |n: i64| -> Option<Verdict> {
        if profile
            .layers
            .iter()
            .flatten()
            .any(|a| !a.poly.eval_int(n).is_positive())
        {
            return None;
        }
        Some(Verdict::from_comparisons(
            diffs.iter().map(|d| d.eval_int(n).cmp(&T::zero())),
        ))
    };
    let mut stable_from = top.max(1);
    while stable_from > 1 && verdict_at(stable_from - 1) == Some(asymptotic) {
        stable_from -= 1;
    }
    Ok(Stabilization {
        asymptotic,
        cauchy_bound: bound,
        stable_from,
    })
}
