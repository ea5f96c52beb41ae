//! Hilbert–Mumford weights on the quot scheme, computed from numerical data.
//!
//! A point `ρ : V ⊗ 𝒪(−n) → 𝓕` together with a one-parameter subgroup of
//! `SL(V)` with weights `k_1 > ⋯ > k_s` determines a filtration
//! `V⁽¹⁾ ⊂ ⋯ ⊂ V⁽ˢ⁾ = V` and subsheaves `𝓕⁽ⁱ⁾ = ρ(V⁽ⁱ⁾ ⊗ 𝒪(−n))`. The
//! Hilbert–Mumford weight only depends on `dim V⁽ⁱ⁾` and `P(𝓕⁽ⁱ⁾)`, which is
//! all a [`QuotPoint`] stores.
//!
//! For a Harder–Narasimhan type `τ = (P_1, …, P_s)`, [`beta_of_tau`] gives
//! the rational weight `β(τ)` whose stratum contains the sheaves of type `τ`.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ratpoly::{compare_reduced, lex_compare, multiplicity, Polynomial};
use crate::scalar::Scalar;

fn check_twist(n: i64) -> Result<()> {
    if n <= 0 {
        return Err(Error::TwistTooSmall(format!("twist n = {n} must be positive")));
    }
    Ok(())
}

fn check_m(n: i64, m: i64) -> Result<()> {
    check_twist(n)?;
    if m <= n {
        return Err(Error::TwistTooSmall(format!("m = {m} must exceed n = {n}")));
    }
    Ok(())
}

/// A Harder–Narasimhan type: Hilbert polynomials of the successive quotients,
/// with strictly decreasing reduced Hilbert polynomials.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HnType<T> {
    polys: Vec<Polynomial<T>>,
    e: usize,
}

impl<T: Scalar> HnType<T> {
    pub fn new(polys: Vec<Polynomial<T>>, e: usize) -> Result<Self> {
        if polys.is_empty() {
            return Err(Error::Invalid("empty Harder-Narasimhan type".into()));
        }
        for p in &polys {
            if !multiplicity(p, e)?.is_positive() {
                return Err(Error::Degenerate(format!("{p} has nonpositive multiplicity")));
            }
            if !p.is_integer_valued() {
                return Err(Error::Invalid(format!("{p} is not integer-valued")));
            }
        }
        for w in polys.windows(2) {
            if compare_reduced(&w[0], &w[1], e)? != Ordering::Greater {
                return Err(Error::Invalid(format!(
                    "reduced Hilbert polynomials of {} and {} are not strictly decreasing",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { polys, e })
    }

    pub fn polys(&self) -> &[Polynomial<T>] {
        &self.polys
    }

    pub fn e(&self) -> usize {
        self.e
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    /// `P = Σ P_i`.
    pub fn total(&self) -> Polynomial<T> {
        self.polys.iter().sum()
    }

    pub fn multiplicities(&self) -> Vec<T> {
        self.polys
            .iter()
            .map(|p| multiplicity(p, self.e).expect("validated degree"))
            .collect()
    }

    /// Partial sums `P(𝓕⁽ⁱ⁾) = P_1 + ⋯ + P_i`.
    pub fn partial_sums(&self) -> Vec<Polynomial<T>> {
        let mut acc = Polynomial::zero();
        self.polys
            .iter()
            .map(|p| {
                acc = &acc + p;
                acc.clone()
            })
            .collect()
    }

    /// `P_i(n)`, each required positive.
    pub fn block_sizes(&self, n: i64) -> Result<Vec<T>> {
        check_twist(n)?;
        self.polys
            .iter()
            .map(|p| {
                let v = p.eval_int(n);
                if v.is_positive() {
                    Ok(v)
                } else {
                    Err(Error::TwistTooSmall(format!("{p} evaluates to {v} at n = {n}")))
                }
            })
            .collect()
    }
}

/// One step `(dim V⁽ⁱ⁾, P(𝓕⁽ⁱ⁾))` of the filtration induced by a 1-PS.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotStep<T> {
    pub dim: u64,
    pub poly: Polynomial<T>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotPoint<T> {
    total: Polynomial<T>,
    n: i64,
    steps: Vec<QuotStep<T>>,
    weights: Vec<i64>,
}

impl<T: Scalar> QuotPoint<T> {
    pub fn new(
        total: Polynomial<T>,
        n: i64,
        steps: Vec<QuotStep<T>>,
        weights: Vec<i64>,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidQuotPoint(m));
        if n <= 0 {
            return bad(format!("twist n = {n} must be positive"));
        }
        if steps.is_empty() {
            return bad("no filtration steps".into());
        }
        if steps.len() != weights.len() {
            return bad(format!("{} steps but {} weights", steps.len(), weights.len()));
        }
        let pn = total.eval_int(n);
        let last = steps.last().unwrap();
        if T::from_i64(last.dim as i64) != pn {
            return bad(format!("dim V = {} but P(n) = {pn}", last.dim));
        }
        if last.poly != total {
            return bad(format!("last step {} is not the total {total}", last.poly));
        }
        if steps[0].dim == 0 {
            return bad("first step has dimension 0".into());
        }
        for w in steps.windows(2) {
            if w[0].dim >= w[1].dim {
                return bad(format!("dimensions {} and {} not increasing", w[0].dim, w[1].dim));
            }
            if lex_compare(&w[0].poly, &w[1].poly) == Ordering::Greater {
                return bad(format!("subsheaf polynomials {} > {}", w[0].poly, w[1].poly));
            }
        }
        if weights.windows(2).any(|w| w[0] <= w[1]) {
            return bad(format!("weights {weights:?} not strictly decreasing"));
        }
        let mut prev = 0u64;
        let mut sl = T::zero();
        for (s, &k) in steps.iter().zip(&weights) {
            sl = sl + T::from_i64(k) * T::from_i64((s.dim - prev) as i64);
            prev = s.dim;
        }
        if !sl.is_zero() {
            return bad(format!("sum k_i dim V_(k_i) = {sl}, not 0"));
        }
        Ok(Self {
            total,
            n,
            steps,
            weights,
        })
    }

    pub fn total(&self) -> &Polynomial<T> {
        &self.total
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn steps(&self) -> &[QuotStep<T>] {
        &self.steps
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    /// Same filtration, new weights.
    pub fn with_weights(&self, weights: Vec<i64>) -> Result<Self> {
        Self::new(self.total.clone(), self.n, self.steps.clone(), weights)
    }

    /// The point and 1-PS attached to a filtration with quotients `τ`, the
    /// `V⁽ⁱ⁾` of dimension `P(𝓕⁽ⁱ⁾, n)`.
    pub fn from_hn_type(tau: &HnType<T>, n: i64, weights: Vec<i64>) -> Result<Self> {
        let steps = tau
            .partial_sums()
            .into_iter()
            .map(|p| {
                let d = p.eval_int(n);
                let dim = if d.is_integer() && d.is_positive() {
                    d.to_string().parse::<u64>().ok()
                } else {
                    None
                };
                let dim = dim.ok_or_else(|| {
                    Error::InvalidQuotPoint(format!("{p} at n = {n} is not a positive dimension"))
                })?;
                Ok(QuotStep { dim, poly: p })
            })
            .collect::<Result<_>>()?;
        Self::new(tau.total(), n, steps, weights)
    }
}

/// The Hilbert–Mumford weight in its two algebraically equal forms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HmValue<T> {
    /// `Σ_{i<s} (k_i − k_{i+1})(P(𝓕⁽ⁱ⁾,m) − dim V⁽ⁱ⁾ P(𝓕,m)/P(𝓕,n))`.
    pub telescoped: T,
    /// `Σ_i k_i (P(𝓕_{k_i},m) − dim V_{k_i} P(𝓕,m)/P(𝓕,n))`, graded form.
    pub graded: T,
}

/// `μ^𝓛(ρ, λ)` for the line bundle determined by `m > n`.
pub fn hm_function<T: Scalar>(rho: &QuotPoint<T>, m: i64) -> Result<HmValue<T>> {
    check_m(rho.n, m)?;
    let pm = rho.total.eval_int(m);
    let pn = rho.total.eval_int(rho.n);
    let ratio = pm / pn;
    let k: Vec<T> = rho.weights.iter().map(|&k| T::from_i64(k)).collect();
    let s = rho.steps.len();

    let mut telescoped = T::zero();
    for i in 0..s.saturating_sub(1) {
        let step = &rho.steps[i];
        let term = step.poly.eval_int(m) - T::from_i64(step.dim as i64) * ratio.clone();
        telescoped = telescoped + (k[i].clone() - k[i + 1].clone()) * term;
    }

    let mut graded = T::zero();
    let mut prev_dim = 0u64;
    let mut prev_poly = Polynomial::zero();
    for (step, ki) in rho.steps.iter().zip(&k) {
        let quotient = &step.poly - &prev_poly;
        let dv = T::from_i64((step.dim - prev_dim) as i64);
        graded = graded + ki.clone() * (quotient.eval_int(m) - dv * ratio.clone());
        prev_dim = step.dim;
        prev_poly = step.poly.clone();
    }

    if telescoped != graded {
        return Err(Error::Invariant(format!(
            "Hilbert-Mumford forms disagree: {telescoped} vs {graded}"
        )));
    }
    Ok(HmValue { telescoped, graded })
}

/// `β(τ)` at twists `n < m`, with each block `β_i` repeated `P_i(n)` times.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BetaTau<T> {
    pub tau: HnType<T>,
    pub n: i64,
    pub m: i64,
    pub beta: Vec<T>,
    pub block_sizes: Vec<T>,
    pub norm_sq: T,
}

/// Outcome of the identities a [`BetaTau`] should satisfy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BetaChecks {
    pub formula: bool,
    pub trace_free: bool,
    pub strictly_decreasing: bool,
    pub norm_forms_agree: bool,
    /// `β_1 > 0 > β_s`; expected for `s ≥ 2` once `m` is large.
    pub sign_pattern: bool,
    pub diagnostics: Vec<String>,
}

impl<T: Scalar> BetaTau<T> {
    pub fn s(&self) -> usize {
        self.beta.len()
    }

    /// `Σ P_i(m)²/P_i(n) − P(m)²/P(n)`.
    pub fn norm_sq_alt(&self) -> T {
        let pm = self.tau.total().eval_int(self.m);
        let pn = self.tau.total().eval_int(self.n);
        let sum = self
            .tau
            .polys()
            .iter()
            .map(|p| {
                let v = p.eval_int(self.m);
                v.clone() * v / p.eval_int(self.n)
            })
            .fold(T::zero(), |a, b| a + b);
        sum - pm.clone() * pm / pn
    }

    pub fn checks(&self) -> BetaChecks {
        let pm = self.tau.total().eval_int(self.m);
        let pn = self.tau.total().eval_int(self.n);
        let formula = self.tau.polys().iter().zip(&self.beta).all(|(p, b)| {
            *b == pm.clone() / pn.clone() - p.eval_int(self.m) / p.eval_int(self.n)
        });
        let trace = self
            .beta
            .iter()
            .zip(&self.block_sizes)
            .fold(T::zero(), |a, (b, c)| a + b.clone() * c.clone());
        let norm = self
            .beta
            .iter()
            .zip(&self.block_sizes)
            .fold(T::zero(), |a, (b, c)| a + b.clone() * b.clone() * c.clone());
        let strictly_decreasing = self.beta.windows(2).all(|w| w[0] > w[1]);
        let norm_forms_agree = norm == self.norm_sq && self.norm_sq == self.norm_sq_alt();
        let s = self.s();
        let sign_pattern =
            s < 2 || (self.beta[0].is_positive() && self.beta[s - 1].is_negative());
        let mut diagnostics = Vec::new();
        if !strictly_decreasing {
            diagnostics.push(format!(
                "beta is not strictly decreasing at n = {}, m = {}: the twists are too small \
                 for decreasing reduced Hilbert polynomials to separate the blocks",
                self.n, self.m
            ));
        }
        if !sign_pattern {
            diagnostics.push(format!(
                "beta_1 > 0 > beta_s fails at n = {}, m = {}",
                self.n, self.m
            ));
        }
        BetaChecks {
            formula,
            trace_free: trace.is_zero(),
            strictly_decreasing,
            norm_forms_agree,
            sign_pattern,
            diagnostics,
        }
    }
}

/// `β_i = P(m)/P(n) − P_i(m)/P_i(n)`.
///
/// Monotonicity of `β` is reported by [`BetaTau::checks`] rather than
/// enforced: at small `(n, m)` it may fail even for a valid type.
pub fn beta_of_tau<T: Scalar>(tau: &HnType<T>, n: i64, m: i64) -> Result<BetaTau<T>> {
    check_m(n, m)?;
    let block_sizes = tau.block_sizes(n)?;
    let total = tau.total();
    let ratio = total.eval_int(m) / total.eval_int(n);
    let beta: Vec<T> = tau
        .polys()
        .iter()
        .zip(&block_sizes)
        .map(|(p, c)| ratio.clone() - p.eval_int(m) / c.clone())
        .collect();
    let norm_sq = beta
        .iter()
        .zip(&block_sizes)
        .fold(T::zero(), |a, (b, c)| a + b.clone() * b.clone() * c.clone());
    let bt = BetaTau {
        tau: tau.clone(),
        n,
        m,
        beta,
        block_sizes,
        norm_sq,
    };
    let c = bt.checks();
    if !(c.formula && c.trace_free && c.norm_forms_agree) {
        return Err(Error::Invariant(format!("beta(tau) identities fail: {c:?}")));
    }
    Ok(bt)
}

/// The numerator and squared denominator of the objective
/// `f(x) = Σ_{i<s} (x_i − x_{i+1})(P(𝓕⁽ⁱ⁾,m) − P(𝓕⁽ⁱ⁾,n)P(m)/P(n)) / (Σ x_i² P_i(n))^{1/2}`.
struct Objective<T> {
    coeffs: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> Objective<T> {
    fn new(tau: &HnType<T>, n: i64, m: i64) -> Result<Self> {
        let weights = tau.block_sizes(n)?;
        let total = tau.total();
        let ratio = total.eval_int(m) / total.eval_int(n);
        let coeffs = tau
            .partial_sums()
            .iter()
            .map(|f| f.eval_int(m) - f.eval_int(n) * ratio.clone())
            .collect();
        Ok(Self { coeffs, weights })
    }

    fn numerator(&self, x: &[T]) -> T {
        (0..x.len().saturating_sub(1)).fold(T::zero(), |acc, i| {
            acc + (x[i].clone() - x[i + 1].clone()) * self.coeffs[i].clone()
        })
    }

    fn dot(&self, a: &[T], b: &[T]) -> T {
        a.iter()
            .zip(b)
            .zip(&self.weights)
            .fold(T::zero(), |acc, ((x, y), w)| acc + x.clone() * y.clone() * w.clone())
    }

    /// Orders `f(a)` against `f(b)` without square roots.
    fn compare(&self, a: &[T], b: &[T]) -> Ordering {
        let (na, da) = (self.numerator(a), self.dot(a, a));
        let (nb, db) = (self.numerator(b), self.dot(b, b));
        let (sa, sb) = (sign(&na), sign(&nb));
        if sa != sb {
            return sa.cmp(&sb);
        }
        // same sign: compare |n|/√d through n²·d'
        let lhs = na.clone() * na * db;
        let rhs = nb.clone() * nb * da;
        match sa {
            Ordering::Less => rhs.cmp(&lhs),
            Ordering::Equal => Ordering::Equal,
            Ordering::Greater => lhs.cmp(&rhs),
        }
    }
}

fn sign<T: Scalar>(v: &T) -> Ordering {
    v.cmp(&T::zero())
}

const SAMPLE_SCALES: [i64; 3] = [10, 100, 1000];

/// Sampled check that `point` minimises the objective among nearby points
/// of the constraint set `Σ x_i P_i(n) = 0`.
///
/// The objective is scale-invariant, so each random direction is projected
/// (in the inner product weighted by `P_i(n)`) onto the complement of both
/// the constraint normal and `point` itself. For `s ≤ 2` that complement is
/// zero and the check is vacuous.
pub fn verify_minimizer_at<T: Scalar>(
    tau: &HnType<T>,
    n: i64,
    m: i64,
    point: &[T],
    samples: usize,
    seed: u64,
) -> Result<bool> {
    check_m(n, m)?;
    if point.len() != tau.len() {
        return Err(Error::Shape(format!(
            "point has {} entries for a type with {} blocks",
            point.len(),
            tau.len()
        )));
    }
    let obj = Objective::new(tau, n, m)?;
    let ones = vec![T::one(); point.len()];
    let g = obj.dot(point, &ones);
    if !g.is_zero() {
        return Err(Error::Invalid(format!("point is infeasible: sum x_i P_i(n) = {g}")));
    }
    let pp = obj.dot(point, point);
    if pp.is_zero() || point.len() <= 2 {
        return Ok(true);
    }
    let one_one = obj.dot(&ones, &ones);
    let amp = point.iter().map(|x| x.abs()).max().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut drawn = 0;
    let mut attempts = 0;
    while drawn < samples {
        attempts += 1;
        if attempts > 100 * samples.max(1) {
            return Err(Error::Invariant("could not draw nonzero feasible directions".into()));
        }
        let mut d: Vec<T> = (0..point.len())
            .map(|_| T::from_frac(rng.gen_range(-1000..=1000), 1000))
            .collect();
        let c1 = obj.dot(&d, &ones) / one_one.clone();
        let cx = obj.dot(&d, point) / pp.clone();
        for (di, xi) in d.iter_mut().zip(point) {
            *di = di.clone() - c1.clone() - cx.clone() * xi.clone();
        }
        let dmax = match d.iter().map(|x| x.abs()).max() {
            Some(v) if !v.is_zero() => v,
            _ => continue,
        };
        drawn += 1;
        let scale = SAMPLE_SCALES[rng.gen_range(0..SAMPLE_SCALES.len())];
        let factor = amp.clone() / (dmax * T::from_i64(scale));
        let moved: Vec<T> = point
            .iter()
            .zip(&d)
            .map(|(x, di)| x.clone() + di.clone() * factor.clone())
            .collect();
        if obj.compare(point, &moved) == Ordering::Greater {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn verify_beta_minimizer<T: Scalar>(
    bt: &BetaTau<T>,
    samples: usize,
    seed: u64,
) -> Result<bool> {
    verify_minimizer_at(&bt.tau, bt.n, bt.m, &bt.beta, samples, seed)
}

/// The rational `c` with `P_i(m) = −β_i P_i(n) + c·P_i(n)` for all `i`, if
/// one exists. The central character `Π t_i^{P_i(m)}` then agrees with
/// `Π t_i^{−β_i P_i(n)}` on `Π t_i^{P_i(n)} = 1`.
pub fn central_character_multiple<T: Scalar>(bt: &BetaTau<T>) -> Option<T> {
    let diff: Vec<T> = bt
        .tau
        .polys()
        .iter()
        .zip(&bt.beta)
        .zip(&bt.block_sizes)
        .map(|((p, b), c)| p.eval_int(bt.m) + b.clone() * c.clone())
        .collect();
    let c = diff[0].clone() / bt.block_sizes[0].clone();
    diff.iter()
        .zip(&bt.block_sizes)
        .all(|(d, s)| *d == c.clone() * s.clone())
        .then_some(c)
}

pub fn central_character_identity<T: Scalar>(bt: &BetaTau<T>) -> bool {
    central_character_multiple(bt).is_some()
}

/// `−μ^𝓛(ρ̄, λ_β) = Σ P_i(m)²/P_i(n) − P(m)²/P(n)` for the graded limit
/// `ρ̄`; must equal `‖β‖²`.
pub fn graded_limit_weight<T: Scalar>(bt: &BetaTau<T>) -> Result<T> {
    let w = bt.norm_sq_alt();
    if w != bt.norm_sq {
        return Err(Error::Invariant(format!(
            "graded limit weight {w} differs from |beta|^2 = {}",
            bt.norm_sq
        )));
    }
    Ok(w)
}
