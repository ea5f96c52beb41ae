//! Nearest point to the origin of a convex hull, in exact arithmetic.
//!
//! [`closest_point`] runs Wolfe's nearest-point method. Every quantity is
//! expressed through the Gram matrix of the input points, so an arbitrary
//! positive-definite inner product costs nothing extra. With exact scalars no
//! tolerance is involved: the method walks a finite sequence of affinely
//! independent "corrals" with strictly decreasing norm.
//!
//! [`closest_point_oracle`] is an independent brute-force solver that projects
//! the origin onto the affine span of every subset.

use std::fmt;
use std::ops::{Add, Sub};

use itertools::Itertools;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{determinant, solve, Matrix};
use crate::scalar::Scalar;

/// A point of the Cartan algebra model `ℚ^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vector<T>(pub Vec<T>);

impl<T: Scalar> Vector<T> {
    pub fn new(entries: Vec<T>) -> Self {
        Self(entries)
    }

    pub fn zeros(d: usize) -> Self {
        Self(vec![T::zero(); d])
    }

    pub fn from_ints(v: &[i64]) -> Self {
        Self(v.iter().map(|&x| T::from_i64(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[T] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, c: &T) -> Self {
        Self(self.0.iter().map(|x| x.clone() * c.clone()).collect())
    }

    pub fn coordinate_sum(&self) -> T {
        self.0.iter().cloned().fold(T::zero(), |a, b| a + b)
    }
}

impl<T: Scalar> Add for &Vector<T> {
    type Output = Vector<T>;
    fn add(self, rhs: Self) -> Vector<T> {
        Vector(
            self.0
                .iter()
                .zip(&rhs.0)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        )
    }
}

impl<T: Scalar> Sub for &Vector<T> {
    type Output = Vector<T>;
    fn sub(self, rhs: Self) -> Vector<T> {
        Vector(
            self.0
                .iter()
                .zip(&rhs.0)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        )
    }
}

impl<T: Scalar> fmt::Display for Vector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.iter().join(", "))
    }
}

/// Positive-definite symmetric bilinear form given by its Gram matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InnerProduct<T> {
    gram: Matrix<T>,
}

impl<T: Scalar> InnerProduct<T> {
    /// Validates symmetry and positive-definiteness (leading principal minors).
    pub fn new(gram: Matrix<T>) -> Result<Self> {
        let d = gram.len();
        if d == 0 {
            return Err(Error::Invalid("empty Gram matrix".into()));
        }
        if let Some(row) = gram.iter().find(|r| r.len() != d) {
            return Err(Error::Dimension {
                expected: d,
                found: row.len(),
            });
        }
        for i in 0..d {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::Invalid(format!(
                        "Gram matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        for k in 1..=d {
            let minor: Matrix<T> = gram[..k].iter().map(|r| r[..k].to_vec()).collect();
            if determinant(&minor) <= T::zero() {
                return Err(Error::Invalid(format!(
                    "Gram matrix not positive definite (leading minor {k})"
                )));
            }
        }
        Ok(Self { gram })
    }

    pub fn identity(d: usize) -> Self {
        let gram = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| if i == j { T::one() } else { T::zero() })
                    .collect()
            })
            .collect();
        Self { gram }
    }

    /// Diagonal pairing `Σ w_k a_k b_k`; every weight must be positive.
    pub fn diagonal(weights: &[T]) -> Result<Self> {
        let d = weights.len();
        let gram = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| if i == j { weights[i].clone() } else { T::zero() })
                    .collect()
            })
            .collect();
        Self::new(gram)
    }

    pub fn dim(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &Matrix<T> {
        &self.gram
    }

    /// `aᵀ G b`. Both arguments must have dimension [`Self::dim`].
    pub fn pair(&self, a: &Vector<T>, b: &Vector<T>) -> T {
        debug_assert_eq!(a.dim(), self.dim());
        debug_assert_eq!(b.dim(), self.dim());
        let mut acc = T::zero();
        for (i, ai) in a.0.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            let row = &self.gram[i];
            let mut s = T::zero();
            for (g, bj) in row.iter().zip(&b.0) {
                if !g.is_zero() && !bj.is_zero() {
                    s = s + g.clone() * bj.clone();
                }
            }
            acc = acc + ai.clone() * s;
        }
        acc
    }

    pub fn norm_sq(&self, a: &Vector<T>) -> T {
        self.pair(a, a)
    }

    /// Invariance under simultaneous permutation of coordinates: the Gram
    /// matrix has a constant diagonal and a constant off-diagonal.
    pub fn is_permutation_invariant(&self) -> bool {
        let d = self.dim();
        let diag = &self.gram[0][0];
        let off = if d > 1 { Some(&self.gram[0][1]) } else { None };
        (0..d).all(|i| {
            (0..d).all(|j| {
                if i == j {
                    &self.gram[i][j] == diag
                } else {
                    Some(&self.gram[i][j]) == off
                }
            })
        })
    }

    pub fn check_dim(&self, v: &Vector<T>) -> Result<()> {
        if v.dim() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: v.dim(),
            });
        }
        Ok(())
    }
}

/// Nearest point of a hull together with a face witnessing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HullSolution<T> {
    pub point: Vector<T>,
    /// Indices into the input list, increasing.
    pub support: Vec<usize>,
    /// Convex coefficients aligned with `support`.
    pub barycentric: Vec<T>,
}

impl<T: Scalar> HullSolution<T> {
    /// `⟨c, p − c⟩ ≥ 0` for every input point `p`.
    pub fn satisfies_variational_inequality(
        &self,
        points: &[Vector<T>],
        ip: &InnerProduct<T>,
    ) -> bool {
        let cc = ip.norm_sq(&self.point);
        points.iter().all(|p| ip.pair(&self.point, p) >= cc)
    }
}

fn validate<T: Scalar>(points: &[Vector<T>], ip: &InnerProduct<T>) -> Result<()> {
    if points.is_empty() {
        return Err(Error::Invalid("closest point of an empty hull".into()));
    }
    points.iter().try_for_each(|p| ip.check_dim(p))
}

fn gram_of<T: Scalar>(points: &[Vector<T>], ip: &InnerProduct<T>) -> Matrix<T> {
    let n = points.len();
    let mut k = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let v = ip.pair(&points[i], &points[j]);
            k[j][i] = v.clone();
            k[i][j] = v;
        }
    }
    k
}

/// Barycentric weights of the point of `aff{p_s : s ∈ set}` nearest the
/// origin, or `None` if the set is affinely dependent.
fn affine_minimizer<T: Scalar>(k: &Matrix<T>, set: &[usize]) -> Option<Vec<T>> {
    let m = set.len();
    // [ K_S  -1 ] [w]   [0]
    // [ 1ᵀ    0 ] [t] = [1]
    let mut a = vec![vec![T::zero(); m + 1]; m + 1];
    for (r, &i) in set.iter().enumerate() {
        for (c, &j) in set.iter().enumerate() {
            a[r][c] = k[i][j].clone();
        }
        a[r][m] = -T::one();
        a[m][r] = T::one();
    }
    let mut b = vec![T::zero(); m + 1];
    b[m] = T::one();
    let mut sol = solve(&a, &b)?;
    sol.truncate(m);
    Some(sol)
}

fn combine<T: Scalar>(points: &[Vector<T>], set: &[usize], weights: &[T]) -> Vector<T> {
    let d = points[set[0]].dim();
    let mut out = vec![T::zero(); d];
    for (&i, w) in set.iter().zip(weights) {
        for (o, x) in out.iter_mut().zip(&points[i].0) {
            *o = o.clone() + w.clone() * x.clone();
        }
    }
    Vector(out)
}

/// Nearest point of `conv(points)` to the origin under `ip`.
///
/// The reported support is, among all index sets whose hull contains the
/// minimizer, one of minimal size, and the lexicographically smallest
/// among those.
pub fn closest_point<T: Scalar>(
    points: &[Vector<T>],
    ip: &InnerProduct<T>,
) -> Result<HullSolution<T>> {
    validate(points, ip)?;
    let n = points.len();
    let k = gram_of(points, ip);

    let start = (0..n).min_by(|&a, &b| k[a][a].cmp(&k[b][b])).unwrap();
    let mut set = vec![start];
    let mut lam = vec![T::one()];

    let dot_x = |set: &[usize], lam: &[T], j: usize| -> T {
        set.iter()
            .zip(lam)
            .fold(T::zero(), |acc, (&i, l)| acc + l.clone() * k[i][j].clone())
    };

    // Each major round strictly lowers ‖x‖, so the corral count bounds it.
    let guard = 1usize << n.min(40);
    let mut rounds = 0usize;
    loop {
        rounds += 1;
        if rounds > guard {
            return Err(Error::Invariant("nearest point iteration did not terminate".into()));
        }
        let xx = set
            .iter()
            .zip(&lam)
            .fold(T::zero(), |acc, (&i, l)| acc + l.clone() * dot_x(&set, &lam, i));
        let (j, xj) = (0..n)
            .map(|j| (j, dot_x(&set, &lam, j)))
            .min_by(|a, b| a.1.cmp(&b.1))
            .unwrap();
        if xj >= xx {
            break;
        }
        set.push(j);
        lam.push(T::zero());

        loop {
            let w = affine_minimizer(&k, &set).ok_or_else(|| {
                Error::Invariant("corral became affinely dependent".into())
            })?;
            if w.iter().all(|v| v > &T::zero()) {
                lam = w;
                break;
            }
            let theta = set
                .iter()
                .enumerate()
                .filter(|&(a, _)| w[a] <= T::zero())
                .map(|(a, _)| lam[a].clone() / (lam[a].clone() - w[a].clone()))
                .min()
                .unwrap();
            let keep: Vec<(usize, T)> = set
                .iter()
                .zip(&lam)
                .zip(&w)
                .map(|((&i, l), wi)| {
                    (
                        i,
                        theta.clone() * wi.clone() + (T::one() - theta.clone()) * l.clone(),
                    )
                })
                .filter(|(_, l)| !l.is_zero())
                .collect();
            if keep.len() == set.len() {
                return Err(Error::Invariant("minor cycle made no progress".into()));
            }
            set = keep.iter().map(|(i, _)| *i).collect();
            lam = keep.into_iter().map(|(_, l)| l).collect();
        }
    }

    let point = combine(points, &set, &lam);
    let (support, barycentric) = canonical_support(points, &k, &point, ip, set.len());
    Ok(HullSolution {
        point,
        support,
        barycentric,
    })
}

/// Minimal, lexicographically first index set whose hull contains `x`.
///
/// Any such set lies on the face `{i : ⟨x, p_i⟩ = ‖x‖²}` and has `x` as the
/// nearest point of its affine span.
fn canonical_support<T: Scalar>(
    points: &[Vector<T>],
    k: &Matrix<T>,
    x: &Vector<T>,
    ip: &InnerProduct<T>,
    max_size: usize,
) -> (Vec<usize>, Vec<T>) {
    let xx = ip.norm_sq(x);
    let face: Vec<usize> = (0..points.len())
        .filter(|&i| ip.pair(x, &points[i]) == xx)
        .collect();
    for size in 1..=max_size {
        for combo in face.iter().copied().combinations(size) {
            let Some(w) = affine_minimizer(k, &combo) else {
                continue;
            };
            if w.iter().any(|v| v < &T::zero()) {
                continue;
            }
            if &combine(points, &combo, &w) == x {
                return (combo, w);
            }
        }
    }
    unreachable!("the final corral always witnesses the minimizer")
}

/// Brute-force nearest point: projects the origin onto the affine span of
/// every subset, keeps projections with nonnegative convex coefficients and
/// returns the smallest. Ties go to the first subset in (size, lexicographic)
/// order.
pub fn closest_point_oracle<T: Scalar>(
    points: &[Vector<T>],
    ip: &InnerProduct<T>,
) -> Result<HullSolution<T>> {
    validate(points, ip)?;
    let n = points.len();
    let mut best: Option<(T, HullSolution<T>)> = None;
    for size in 1..=n {
        for subset in (0..n).combinations(size) {
            let base = &points[subset[0]];
            let diffs: Vec<Vector<T>> = subset[1..].iter().map(|&i| &points[i] - base).collect();
            // minimize ‖base + Σ t_k diff_k‖²: A t = −b
            let m = diffs.len();
            let a: Matrix<T> = (0..m)
                .map(|r| (0..m).map(|c| ip.pair(&diffs[r], &diffs[c])).collect())
                .collect();
            let b: Vec<T> = diffs.iter().map(|d| -ip.pair(d, base)).collect();
            let t = if m == 0 {
                Vec::new()
            } else {
                match solve(&a, &b) {
                    Some(t) => t,
                    None => continue,
                }
            };
            let t_sum = t.iter().cloned().fold(T::zero(), |acc, v| acc + v);
            let mut bary = vec![T::one() - t_sum];
            bary.extend(t.iter().cloned());
            if bary.iter().any(|v| v < &T::zero()) {
                continue;
            }
            let mut point = base.clone();
            for (tk, dk) in t.iter().zip(&diffs) {
                point = &point + &dk.scale(tk);
            }
            let norm = ip.norm_sq(&point);
            if best.as_ref().is_none_or(|(bn, _)| &norm < bn) {
                best = Some((
                    norm,
                    HullSolution {
                        point,
                        support: subset,
                        barycentric: bary,
                    },
                ));
            }
        }
    }
    Ok(best.expect("singletons are always feasible").1)
}

/// Type-A Weyl chamber representative: coordinates in weakly decreasing order.
pub fn weyl_representative<T: Scalar>(v: &Vector<T>) -> Vector<T> {
    let mut e = v.0.clone();
    e.sort_by(|a, b| b.cmp(a));
    Vector(e)
}
