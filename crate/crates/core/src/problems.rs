//! Test problems `find x with 0 ∈ Σ F_i(x)` together with reference
//! solutions computed without the splitting engine.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{norm, solve, DenseMatrix};
use crate::operators::{saddle_matrix, Descriptor, MonotoneOperator, OperatorTuple, ProxFunction};
use crate::scalar::Real;
use crate::scheme::json_error;

/// How a reference solution was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Closed form.
    Analytic,
    /// Independent numerical computation (dense solve, grid, optimality check).
    Oracle,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reference<T> {
    pub point: Vec<T>,
    pub provenance: Provenance,
}

#[derive(Clone, Debug)]
pub struct Problem<T> {
    pub operators: OperatorTuple<T>,
    pub reference: Option<Reference<T>>,
    pub description: String,
}

impl<T: Real> Problem<T> {
    pub fn dim(&self) -> usize {
        self.operators.dim()
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn reference_point(&self) -> Option<&[T]> {
        self.reference.as_ref().map(|r| r.point.as_slice())
    }

    /// `‖Σ F_i(x)‖` when every operator is single-valued.
    pub fn sum_residual(&self, x: &[T]) -> Option<T> {
        self.operators.sum_evaluate(x).map(|s| norm(&s))
    }
}

fn check_count(n: usize, what: &str) -> Result<()> {
    if n < 2 {
        return Err(Error::Contract(format!(
            "{what} needs at least two terms, got {n}"
        )));
    }
    Ok(())
}

/// `F_i(x) = x − a_i`; the unique zero is the mean of the `a_i`.
pub fn affine_consensus<T: Real>(anchors: &[Vec<T>]) -> Result<Problem<T>> {
    check_count(anchors.len(), "affine consensus")?;
    let d = anchors[0].len();
    let mut mean = vec![T::zero(); d];
    let mut ops = Vec::with_capacity(anchors.len());
    for (i, a) in anchors.iter().enumerate() {
        if a.len() != d {
            return Err(Error::Shape(format!(
                "anchor {i} has dimension {}, expected {d}",
                a.len()
            )));
        }
        for (m, &ai) in mean.iter_mut().zip(a) {
            *m = *m + ai;
        }
        ops.push(MonotoneOperator::affine(
            DenseMatrix::identity(d),
            a.iter().map(|&ai| -ai).collect(),
        )?);
    }
    let count = T::from_count(anchors.len());
    for m in &mut mean {
        *m = *m / count;
    }
    Ok(Problem {
        operators: OperatorTuple::new(ops)?,
        reference: Some(Reference {
            point: mean,
            provenance: Provenance::Analytic,
        }),
        description: format!("affine consensus, n={}, d={d}", anchors.len()),
    })
}

/// `[max lower, min upper]`, or `None` when empty.
pub fn interval_intersection<T: Real>(intervals: &[(T, T)]) -> Option<(T, T)> {
    let lo = intervals
        .iter()
        .map(|i| i.0)
        .fold(T::neg_infinity(), T::max);
    let hi = intervals.iter().map(|i| i.1).fold(T::infinity(), T::min);
    (lo <= hi).then_some((lo, hi))
}

/// Normal cones of intervals; the zero set is their intersection. The
/// reference is its midpoint.
pub fn interval_feasibility<T: Real>(intervals: &[(T, T)]) -> Result<Problem<T>> {
    check_count(intervals.len(), "interval feasibility")?;
    let (lo, hi) = interval_intersection(intervals)
        .ok_or_else(|| Error::Construction("intervals have an empty intersection".into()))?;
    let ops = intervals
        .iter()
        .map(|&(l, u)| {
            MonotoneOperator::prox(
                1,
                ProxFunction::Box {
                    lower: vec![l],
                    upper: vec![u],
                },
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let two = T::one() + T::one();
    Ok(Problem {
        operators: OperatorTuple::new(ops)?,
        reference: Some(Reference {
            point: vec![(lo + hi) / two],
            provenance: Provenance::Oracle,
        }),
        description: format!("interval feasibility, intersection [{lo}, {hi}]"),
    })
}

/// `½xᵀQx − bᵀx + λ‖x‖₁`.
pub fn lasso_objective<T: Real>(q: &DenseMatrix<T>, b: &[T], lambda: T, x: &[T]) -> T {
    let two = T::one() + T::one();
    let qx = q.mul_vec(x).expect("dimension checked by caller");
    let quad = x
        .iter()
        .zip(&qx)
        .fold(T::zero(), |acc, (&a, &c)| acc + a * c)
        / two;
    let lin = x.iter().zip(b).fold(T::zero(), |acc, (&a, &c)| acc + a * c);
    let l1 = x.iter().fold(T::zero(), |acc, &a| acc + a.abs());
    quad - lin + lambda * l1
}

/// Largest violation of `0 ∈ Qx − b + λ∂‖x‖₁`.
pub fn lasso_optimality_gap<T: Real>(q: &DenseMatrix<T>, b: &[T], lambda: T, x: &[T]) -> T {
    let qx = q.mul_vec(x).expect("dimension checked by caller");
    let mut gap = T::zero();
    for i in 0..x.len() {
        let g = qx[i] - b[i];
        let v = if x[i] > T::zero() {
            (g + lambda).abs()
        } else if x[i] < T::zero() {
            (g - lambda).abs()
        } else {
            (g.abs() - lambda).max(T::zero())
        };
        gap = gap.max(v);
    }
    gap
}

fn soft_threshold<T: Real>(y: T, lambda: T) -> T {
    y.signum() * (y.abs() - lambda).max(T::zero())
}

/// Cyclic coordinate descent to stationarity.
fn lasso_coordinate_descent<T: Real>(q: &DenseMatrix<T>, b: &[T], lambda: T) -> Result<Vec<T>> {
    let d = b.len();
    let mut x = vec![T::zero(); d];
    let tiny = T::from_f64_lossy(1e-15);
    for i in 0..d {
        if q.get(i, i) <= tiny && b[i].abs() > lambda {
            return Err(Error::Construction(format!(
                "objective is unbounded below along coordinate {i}"
            )));
        }
    }
    for _ in 0..1_000_000 {
        let mut change = T::zero();
        for i in 0..d {
            let qii = q.get(i, i);
            if qii <= tiny {
                continue;
            }
            let mut r = b[i];
            for j in 0..d {
                if j != i {
                    r = r - q.get(i, j) * x[j];
                }
            }
            let xi = soft_threshold(r, lambda) / qii;
            change = change.max((xi - x[i]).abs());
            x[i] = xi;
        }
        if change <= tiny * (T::one() + norm(&x)) {
            break;
        }
    }
    Ok(x)
}

/// Coarse-to-fine grid search of a function on a box around `center`.
pub fn grid_minimize<T: Real>(
    f: impl Fn(&[T]) -> T,
    center: &[T],
    radius: T,
    levels: usize,
) -> Vec<T> {
    const STEPS: i32 = 20;
    let d = center.len();
    let mut best = center.to_vec();
    let mut r = radius;
    let steps = T::from_count(STEPS as usize);
    for _ in 0..levels {
        let h = r / steps;
        let mut idx = vec![-STEPS; d];
        let base = best.clone();
        let mut best_val = f(&best);
        loop {
            let p: Vec<T> = base
                .iter()
                .zip(&idx)
                .map(|(&c, &k)| c + h * T::from_i32(k).expect("small integer"))
                .collect();
            let v = f(&p);
            if v < best_val {
                best_val = v;
                best = p;
            }
            // odometer increment
            let mut k = 0;
            while k < d && idx[k] == STEPS {
                idx[k] = -STEPS;
                k += 1;
            }
            if k == d {
                break;
            }
            idx[k] += 1;
        }
        r = h * (T::one() + T::one());
    }
    best
}

/// `f₁ = ½xᵀQx − bᵀx` (affine gradient) and `f₂ = λ‖x‖₁` (soft threshold).
pub fn lasso_split<T: Real>(q: DenseMatrix<T>, b: Vec<T>, lambda: T) -> Result<Problem<T>> {
    if !(lambda > T::zero()) {
        return Err(Error::Contract(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let d = b.len();
    if q.shape() != (d, d) {
        return Err(Error::Shape(format!(
            "Q is {:?}, expected {d}x{d}",
            q.shape()
        )));
    }
    if d > 0 {
        if !q.is_symmetric(1e-12) {
            return Err(Error::Convexity("Q is not symmetric".into()));
        }
        let lam = crate::numerics::min_eigenvalue_symmetric(&q)?;
        if lam < -T::from_f64_lossy(crate::operators::MONOTONE_TOL) {
            return Err(Error::Convexity(format!("Q has negative eigenvalue {lam}")));
        }
    }
    let x = lasso_coordinate_descent(&q, &b, lambda)?;
    let gap = lasso_optimality_gap(&q, &b, lambda, &x);
    let scale = T::one() + norm(&b) + lambda;
    if gap > T::from_f64_lossy(1e-8) * scale {
        return Err(Error::Construction(format!(
            "reference failed the optimality check, gap {gap}"
        )));
    }
    if d <= 2 {
        let f = |p: &[T]| lasso_objective(&q, &b, lambda, p);
        let radius = T::one() + norm(&x) * (T::one() + T::one());
        let g = grid_minimize(f, &vec![T::zero(); d], radius, 12);
        let slack = T::from_f64_lossy(1e-9) * (T::one() + f(&x).abs());
        if f(&g) < f(&x) - slack {
            return Err(Error::Construction(
                "grid search found a better point than the reference".into(),
            ));
        }
    }
    let f1 = MonotoneOperator::affine(q, b.iter().map(|&bi| -bi).collect())?;
    let f2 = MonotoneOperator::prox(d, ProxFunction::L1 { lambda })?;
    Ok(Problem {
        operators: OperatorTuple::new(vec![f1, f2])?,
        reference: Some(Reference {
            point: x,
            provenance: Provenance::Oracle,
        }),
        description: format!("lasso, d={d}, lambda={lambda}"),
    })
}

/// One term `φ_i(u, v) = ½uᵀPu + uᵀCv − ½vᵀQv + b_uᵀu − b_vᵀv`.
#[derive(Clone, Debug, PartialEq)]
pub struct SaddleTerm<T> {
    pub p: DenseMatrix<T>,
    pub c: DenseMatrix<T>,
    pub q: DenseMatrix<T>,
    pub b: Option<Vec<T>>,
}

impl<T: Real> SaddleTerm<T> {
    pub fn new(p: DenseMatrix<T>, c: DenseMatrix<T>, q: DenseMatrix<T>) -> Self {
        Self { p, c, q, b: None }
    }

    pub fn with_offset(mut self, b: Vec<T>) -> Self {
        self.b = Some(b);
        self
    }
}

/// Sum of quadratic saddle operators. The reference solves
/// `[[ΣP, ΣC], [−ΣCᵀ, ΣQ]] x = −Σ b_i` densely; an all-zero aggregate gives
/// reference `0`.
pub fn quadratic_game<T: Real>(terms: Vec<SaddleTerm<T>>) -> Result<Problem<T>> {
    check_count(terms.len(), "quadratic game")?;
    let (d1, d2) = (terms[0].p.rows(), terms[0].q.rows());
    let (d, n) = (d1 + d2, terms.len());
    let mut k = DenseMatrix::zeros(d, d);
    let mut rhs = vec![T::zero(); d];
    let mut ops = Vec::with_capacity(terms.len());
    for (i, t) in terms.into_iter().enumerate() {
        if t.p.rows() != d1 || t.q.rows() != d2 {
            return Err(Error::Shape(format!(
                "term {i} has blocks {}+{}, expected {d1}+{d2}",
                t.p.rows(),
                t.q.rows()
            )));
        }
        let b = t.b.unwrap_or_else(|| vec![T::zero(); d]);
        k = k.add(&saddle_matrix(&t.p, &t.c, &t.q))?;
        for (r, &bi) in rhs.iter_mut().zip(&b) {
            *r = *r - bi;
        }
        ops.push(MonotoneOperator::saddle_with_offset(t.p, t.c, t.q, b)?);
    }
    let point = if k.is_zero() && rhs.iter().all(|r| r.is_zero()) {
        vec![T::zero(); d]
    } else {
        solve(&k, &rhs)
            .map_err(|_| Error::Construction("aggregate saddle system is singular".into()))?
    };
    Ok(Problem {
        operators: OperatorTuple::new(ops)?,
        reference: Some(Reference {
            point,
            provenance: Provenance::Oracle,
        }),
        description: format!("quadratic game, n={n}, d={d1}+{d2}"),
    })
}

fn uniform<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::from_f64_lossy(rng.gen_range(-1.0..1.0))
}

pub fn random_matrix<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
) -> DenseMatrix<T> {
    DenseMatrix::from_fn(rows, cols, |_, _| uniform(rng))
}

pub fn random_vector<T: Real, R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<T> {
    (0..len).map(|_| uniform(rng)).collect()
}

/// `G Gᵀ / d + ridge·I`, symmetric by construction.
pub fn random_psd<T: Real, R: Rng + ?Sized>(rng: &mut R, d: usize, ridge: T) -> DenseMatrix<T> {
    let g = random_matrix::<T, R>(rng, d, d);
    let s = T::from_count(d.max(1));
    let mut p = g.transpose().gram().map(|x| x / s);
    for i in 0..d {
        for j in 0..i {
            let v = p.get(i, j);
            p.set(j, i, v);
        }
        p.set(i, i, p.get(i, i) + ridge);
    }
    p
}

/// `F(x) = A x + b` with `A` = PSD + 0.1·I + skew part.
pub fn random_monotone_affine<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
) -> Result<MonotoneOperator<T>> {
    let sym = random_psd::<T, R>(rng, d, T::from_f64_lossy(0.1));
    let g = random_matrix::<T, R>(rng, d, d);
    let skew = g.sub(&g.transpose())?;
    let a = sym.add(&skew)?;
    MonotoneOperator::affine(a, random_vector(rng, d))
}

/// `n` random strongly monotone affine operators; the reference solves
/// `(Σ A_i) x = −Σ b_i`.
pub fn random_affine_problem<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    d: usize,
) -> Result<Problem<T>> {
    check_count(n, "random affine problem")?;
    let mut k = DenseMatrix::zeros(d, d);
    let mut rhs = vec![T::zero(); d];
    let mut ops = Vec::with_capacity(n);
    for _ in 0..n {
        let op = random_monotone_affine::<T, R>(rng, d)?;
        if let Descriptor::Affine { matrix, offset } = op.descriptor() {
            k = k.add(matrix)?;
            for (r, &b) in rhs.iter_mut().zip(offset) {
                *r = *r - b;
            }
        }
        ops.push(op);
    }
    Ok(Problem {
        operators: OperatorTuple::new(ops)?,
        reference: Some(Reference {
            point: solve(&k, &rhs)?,
            provenance: Provenance::Oracle,
        }),
        description: format!("random monotone affine, n={n}, d={d}"),
    })
}

/// Random quadratic game with `d = d₁ + d₂`, `d₁ = ⌈d/2⌉`.
pub fn random_game<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    d: usize,
) -> Result<Problem<T>> {
    let d1 = d.div_ceil(2);
    let d2 = d - d1;
    let ridge = T::from_f64_lossy(0.1);
    let terms = (0..n)
        .map(|_| {
            SaddleTerm::new(
                random_psd::<T, R>(rng, d1, ridge),
                random_matrix::<T, R>(rng, d1, d2),
                random_psd::<T, R>(rng, d2, ridge),
            )
            .with_offset(random_vector(rng, d))
        })
        .collect();
    let mut p = quadratic_game(terms)?;
    p.description = format!("random quadratic game, n={n}, d={d1}+{d2}");
    Ok(p)
}

/// On-disk problem document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProblemDocument {
    pub dim: usize,
    pub operators: Vec<OperatorDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReferenceDocument {
    pub point: Vec<f64>,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorDocument {
    Zero {},
    Affine {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    Prox(ProxDocument),
    Saddle {
        #[serde(rename = "P")]
        p: Vec<Vec<f64>>,
        #[serde(rename = "C")]
        c: Vec<Vec<f64>>,
        #[serde(rename = "Q")]
        q: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<Vec<f64>>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum ProxDocument {
    L1 {
        lambda: f64,
    },
    SquaredDistance {
        point: Vec<f64>,
        #[serde(default = "one")]
        weight: f64,
    },
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    AffineSet {
        #[serde(rename = "G")]
        g: Vec<Vec<f64>>,
        h: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

fn cast_vec<T: Real>(v: &[f64]) -> Vec<T> {
    v.iter().map(|&x| T::from_f64_lossy(x)).collect()
}

fn to_f64_vec<T: Real>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.to_f64_lossy()).collect()
}

fn matrix_from<T: Real>(
    rows: &[Vec<f64>],
    r: usize,
    c: usize,
    what: &str,
) -> Result<DenseMatrix<T>> {
    if rows.len() != r || rows.iter().any(|row| row.len() != c) {
        return Err(Error::Shape(format!("{what} must be {r}x{c}")));
    }
    DenseMatrix::from_row_major(
        r,
        c,
        rows.iter()
            .flatten()
            .map(|&x| T::from_f64_lossy(x))
            .collect(),
    )
}

fn matrix_rows<T: Real>(m: &DenseMatrix<T>) -> Vec<Vec<f64>> {
    m.to_rows().iter().map(|r| to_f64_vec(r)).collect()
}

impl OperatorDocument {
    fn build<T: Real>(&self, dim: usize) -> Result<MonotoneOperator<T>> {
        match self {
            OperatorDocument::Zero {} => Ok(MonotoneOperator::zero(dim)),
            OperatorDocument::Affine { a, b } => {
                MonotoneOperator::affine(matrix_from(a, dim, dim, "A")?, cast_vec(b))
            }
            OperatorDocument::Prox(p) => {
                let f = match p {
                    ProxDocument::L1 { lambda } => ProxFunction::L1 {
                        lambda: T::from_f64_lossy(*lambda),
                    },
                    ProxDocument::SquaredDistance { point, weight } => {
                        ProxFunction::SquaredDistance {
                            point: cast_vec(point),
                            weight: T::from_f64_lossy(*weight),
                        }
                    }
                    ProxDocument::Box { lower, upper } => ProxFunction::Box {
                        lower: cast_vec(lower),
                        upper: cast_vec(upper),
                    },
                    ProxDocument::AffineSet { g, h } => ProxFunction::AffineSet {
                        matrix: matrix_from(g, h.len(), dim, "G")?,
                        rhs: cast_vec(h),
                    },
                };
                MonotoneOperator::prox(dim, f)
            }
            OperatorDocument::Saddle { p, c, q, b } => {
                let (d1, d2) = (p.len(), q.len());
                if d1 + d2 != dim {
                    return Err(Error::Shape(format!(
                        "saddle blocks {d1}+{d2} do not match dim {dim}"
                    )));
                }
                let p = matrix_from(p, d1, d1, "P")?;
                let q = matrix_from(q, d2, d2, "Q")?;
                let c = if d1 == 0 || d2 == 0 {
                    DenseMatrix::zeros(d1, d2)
                } else {
                    matrix_from(c, d1, d2, "C")?
                };
                let b = b.as_deref().map_or_else(|| vec![T::zero(); dim], cast_vec);
                MonotoneOperator::saddle_with_offset(p, c, q, b)
            }
        }
    }

    fn from_operator<T: Real>(op: &MonotoneOperator<T>) -> Result<Self> {
        Ok(match op.descriptor() {
            Descriptor::Zero => OperatorDocument::Zero {},
            Descriptor::Affine { matrix, offset } => OperatorDocument::Affine {
                a: matrix_rows(matrix),
                b: to_f64_vec(offset),
            },
            Descriptor::Prox(f) => OperatorDocument::Prox(match f {
                ProxFunction::L1 { lambda } => ProxDocument::L1 {
                    lambda: lambda.to_f64_lossy(),
                },
                ProxFunction::SquaredDistance { point, weight } => ProxDocument::SquaredDistance {
                    point: to_f64_vec(point),
                    weight: weight.to_f64_lossy(),
                },
                ProxFunction::Box { lower, upper } => ProxDocument::Box {
                    lower: to_f64_vec(lower),
                    upper: to_f64_vec(upper),
                },
                ProxFunction::AffineSet { matrix, rhs } => ProxDocument::AffineSet {
                    g: matrix_rows(matrix),
                    h: to_f64_vec(rhs),
                },
            }),
            Descriptor::Saddle { p, c, q, offset } => OperatorDocument::Saddle {
                p: matrix_rows(p),
                c: matrix_rows(c),
                q: matrix_rows(q),
                b: Some(to_f64_vec(offset)),
            },
            Descriptor::Custom { name } => {
                return Err(Error::Unsupported(format!(
                    "custom operator {name:?} has no document form"
                )))
            }
        })
    }
}

impl ProblemDocument {
    pub fn into_problem<T: Real>(self) -> Result<Problem<T>> {
        if self.operators.is_empty() {
            return Err(Error::Contract("problem has no operators".into()));
        }
        let ops = self
            .operators
            .iter()
            .enumerate()
            .map(|(i, o)| {
                o.build(self.dim)
                    .map_err(|e| Error::parse(format!("operator {i}"), e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let reference = match self.reference {
            Some(r) if r.point.len() != self.dim => {
                return Err(Error::parse(
                    "reference",
                    format!(
                        "point has dimension {}, expected {}",
                        r.point.len(),
                        self.dim
                    ),
                ))
            }
            Some(r) => Some(Reference {
                point: cast_vec(&r.point),
                provenance: r.provenance,
            }),
            None => None,
        };
        Ok(Problem {
            operators: OperatorTuple::new(ops)?,
            reference,
            description: self
                .description
                .unwrap_or_else(|| "problem document".into()),
        })
    }

    pub fn from_problem<T: Real>(problem: &Problem<T>) -> Result<Self> {
        Ok(Self {
            dim: problem.dim(),
            operators: problem
                .operators
                .iter()
                .map(OperatorDocument::from_operator)
                .collect::<Result<_>>()?,
            reference: problem.reference.as_ref().map(|r| ReferenceDocument {
                point: to_f64_vec(&r.point),
                provenance: r.provenance,
            }),
            description: Some(problem.description.clone()),
        })
    }
}

pub fn load_problem<T: Real>(text: &str) -> Result<Problem<T>> {
    let doc: ProblemDocument = serde_json::from_str(text).map_err(json_error)?;
    doc.into_problem()
}

pub fn save_problem<T: Real>(problem: &Problem<T>) -> Result<String> {
    Ok(serde_json::to_string_pretty(
        &ProblemDocument::from_problem(problem)?,
    )?)
}

/// Shorthand problem descriptions.
///
/// * `consensus:a1,a2,...` — anchors separated by `,`, components by `;`
/// * `intervals:l1/u1,l2/u2,...`
/// * `lasso:lambda:b1;b2;...` — `Q = I`
/// * `game:n,d` and `random-affine:n,d` — seeded random instances
/// * anything else is a path to a problem document
#[derive(Clone, Debug, PartialEq)]
pub enum ProblemSpec {
    Consensus(Vec<Vec<f64>>),
    Intervals(Vec<(f64, f64)>),
    Lasso { lambda: f64, b: Vec<f64> },
    Game { n: usize, d: usize },
    RandomAffine { n: usize, d: usize },
    File(String),
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::parse(what, format!("not a number: {s:?}")))
}

fn parse_pair(s: &str, what: &str) -> Result<(usize, usize)> {
    let parts: Vec<_> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [n, d] => Ok((
            n.parse()
                .map_err(|_| Error::parse(what, format!("bad count {n:?}")))?,
            d.parse()
                .map_err(|_| Error::parse(what, format!("bad dimension {d:?}")))?,
        )),
        _ => Err(Error::parse(what, "expected n,d")),
    }
}

impl FromStr for ProblemSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        match head {
            "consensus" => Ok(ProblemSpec::Consensus(
                rest.split(',')
                    .map(|a| a.split(';').map(|x| parse_f64(x, "consensus")).collect())
                    .collect::<Result<_>>()?,
            )),
            "intervals" => Ok(ProblemSpec::Intervals(
                rest.split(',')
                    .map(|iv| {
                        let (l, u) = iv.split_once('/').ok_or_else(|| {
                            Error::parse("intervals", format!("expected l/u, got {iv:?}"))
                        })?;
                        Ok((parse_f64(l, "intervals")?, parse_f64(u, "intervals")?))
                    })
                    .collect::<Result<_>>()?,
            )),
            "lasso" => {
                let (lambda, b) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::parse("lasso", "expected lambda:b1;b2;..."))?;
                Ok(ProblemSpec::Lasso {
                    lambda: parse_f64(lambda, "lasso")?,
                    b: b.split(';')
                        .map(|x| parse_f64(x, "lasso"))
                        .collect::<Result<_>>()?,
                })
            }
            "game" => {
                let (n, d) = parse_pair(rest, "game")?;
                Ok(ProblemSpec::Game { n, d })
            }
            "random-affine" => {
                let (n, d) = parse_pair(rest, "random-affine")?;
                Ok(ProblemSpec::RandomAffine { n, d })
            }
            _ => Ok(ProblemSpec::File(s.to_string())),
        }
    }
}

impl ProblemSpec {
    /// Builds the problem; `rng` is only consulted by random instances.
    pub fn build<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Problem<f64>> {
        match self {
            ProblemSpec::Consensus(a) => affine_consensus(a),
            ProblemSpec::Intervals(iv) => interval_feasibility(iv),
            ProblemSpec::Lasso { lambda, b } => {
                lasso_split(DenseMatrix::identity(b.len()), b.clone(), *lambda)
            }
            ProblemSpec::Game { n, d } => random_game(rng, *n, *d),
            ProblemSpec::RandomAffine { n, d } => random_affine_problem(rng, *n, *d),
            ProblemSpec::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::parse(path.clone(), e.to_string()))?;
                load_problem(&text)
            }
        }
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join =
            |v: &[f64], sep: &str| v.iter().map(f64::to_string).collect::<Vec<_>>().join(sep);
        match self {
            ProblemSpec::Consensus(a) => {
                let parts: Vec<_> = a.iter().map(|x| join(x, ";")).collect();
                write!(f, "consensus:{}", parts.join(","))
            }
            ProblemSpec::Intervals(iv) => {
                let parts: Vec<_> = iv.iter().map(|(l, u)| format!("{l}/{u}")).collect();
                write!(f, "intervals:{}", parts.join(","))
            }
            ProblemSpec::Lasso { lambda, b } => write!(f, "lasso:{lambda}:{}", join(b, ";")),
            ProblemSpec::Game { n, d } => write!(f, "game:{n},{d}"),
            ProblemSpec::RandomAffine { n, d } => write!(f, "random-affine:{n},{d}"),
            ProblemSpec::File(p) => f.write_str(p),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn m(rows: &[&[f64]]) -> DenseMatrix<f64> {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn consensus_references() {
        let p = affine_consensus(&[vec![0.0], vec![2.0]]).unwrap();
        assert_eq!(p.reference_point().unwrap(), &[1.0]);
        let a: Vec<Vec<f64>> = (1..=5).map(|i| vec![i as f64]).collect();
        let p = affine_consensus(&a).unwrap();
        assert_eq!(p.reference_point().unwrap(), &[3.0]);
        assert_eq!(p.sum_residual(&[3.0]).unwrap(), 0.0);
        assert_eq!(p.reference.unwrap().provenance, Provenance::Analytic);
    }

    #[test]
    fn consensus_contract() {
        assert!(affine_consensus(&[vec![1.0]]).is_err());
        assert!(matches!(
            affine_consensus(&[vec![1.0], vec![1.0, 2.0]]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn intervals() {
        let iv = [(0.0, 2.0), (1.0, 3.0), (1.5, 2.5)];
        assert_eq!(interval_intersection(&iv), Some((1.5, 2.0)));
        let p = interval_feasibility(&iv).unwrap();
        assert_eq!(p.reference_point().unwrap(), &[1.75]);
        assert_eq!(
            interval_intersection(&[(1.0, 4.0), (1.0, 4.0)]),
            Some((1.0, 4.0))
        );
        assert!(matches!(
            interval_feasibility(&[(0.0, 1.0), (2.0, 3.0)]),
            Err(Error::Construction(_))
        ));
    }

    #[test]
    fn lasso_examples() {
        let p = lasso_split(DenseMatrix::identity(1), vec![3.0_f64], 1.0).unwrap();
        assert!((p.reference_point().unwrap()[0] - 2.0).abs() <= 1e-12);
        let p = lasso_split(DenseMatrix::identity(2), vec![0.5, -0.9], 1.0).unwrap();
        assert_eq!(p.reference_point().unwrap(), &[0.0, 0.0]);
        // small lambda approaches the unregularized solve Q⁻¹b = 2
        let p = lasso_split(m(&[&[2.0]]), vec![4.0], 1e-9).unwrap();
        assert!((p.reference_point().unwrap()[0] - 2.0).abs() <= 1e-8);
        assert!(lasso_split(DenseMatrix::identity(1), vec![3.0], 0.0).is_err());
    }

    #[test]
    fn lasso_matches_grid_in_two_dimensions() {
        let q = m(&[&[2.0, 0.5], &[0.5, 1.0]]);
        let b = vec![1.0, -2.0];
        let p = lasso_split(q.clone(), b.clone(), 0.3).unwrap();
        let x = p.reference_point().unwrap();
        let g = grid_minimize(|v| lasso_objective(&q, &b, 0.3, v), &[0.0, 0.0], 5.0, 14);
        assert!(crate::numerics::distance(x, &g) <= 1e-6, "{x:?} vs {g:?}");
        assert!(lasso_optimality_gap(&q, &b, 0.3, x) <= 1e-10);
    }

    #[test]
    fn game_single_term() {
        let zero = DenseMatrix::zeros(1, 1);
        let terms = vec![
            SaddleTerm::new(
                DenseMatrix::identity(1),
                zero.clone(),
                DenseMatrix::identity(1),
            )
            .with_offset(vec![-1.0, 0.0]),
            SaddleTerm::new(zero.clone(), zero.clone(), zero.clone()),
        ];
        let p = quadratic_game(terms).unwrap();
        assert_eq!(p.reference_point().unwrap(), &[1.0, 0.0]);
        assert_eq!(p.sum_residual(&[1.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn game_all_zero() {
        let z = DenseMatrix::<f64>::zeros(1, 1);
        let terms = vec![SaddleTerm::new(z.clone(), z.clone(), z.clone()); 3];
        let p = quadratic_game(terms).unwrap();
        assert_eq!(p.reference_point().unwrap(), &[0.0, 0.0]);
    }

    #[test]
    fn random_instances_have_small_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let p = random_game::<f64, _>(&mut rng, 3, 4).unwrap();
            assert!(p.sum_residual(p.reference_point().unwrap()).unwrap() <= 1e-10);
            let p = random_affine_problem::<f64, _>(&mut rng, 4, 3).unwrap();
            assert!(p.sum_residual(p.reference_point().unwrap()).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn document_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = random_game::<f64, _>(&mut rng, 3, 3).unwrap();
        let text = save_problem(&p).unwrap();
        let q: Problem<f64> = load_problem(&text).unwrap();
        let x = [0.3, -0.2, 0.9];
        assert_eq!(p.operators.sum_evaluate(&x), q.operators.sum_evaluate(&x));
        assert_eq!(p.reference, q.reference);
    }

    #[test]
    fn document_format() {
        let text = r#"{
            "dim": 1,
            "operators": [
                {"affine": {"A": [[1.0]], "b": [-2.0]}},
                {"prox": {"kind": "box", "params": {"lower": [0.0], "upper": [5.0]}}},
                {"prox": {"kind": "l1", "params": {"lambda": 0.5}}},
                {"zero": {}}
            ],
            "reference": {"point": [1.5], "provenance": "oracle"}
        }"#;
        let p: Problem<f64> = load_problem(text).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.operators.get(2).resolvent(&[2.0]).unwrap(), vec![1.5]);
        let err = load_problem::<f64>("{\"dim\": 1,\n \"operators\": [}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let bad = r#"{"dim": 2, "operators": [{"affine": {"A": [[1.0]], "b": [0.0]}}]}"#;
        assert!(matches!(load_problem::<f64>(bad), Err(Error::Parse { .. })));
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(
            "consensus:1,2,3".parse::<ProblemSpec>().unwrap(),
            ProblemSpec::Consensus(vec![vec![1.0], vec![2.0], vec![3.0]])
        );
        assert_eq!(
            "consensus:1;0,2;4".parse::<ProblemSpec>().unwrap(),
            ProblemSpec::Consensus(vec![vec![1.0, 0.0], vec![2.0, 4.0]])
        );
        assert_eq!(
            "intervals:0/2,1/3".parse::<ProblemSpec>().unwrap(),
            ProblemSpec::Intervals(vec![(0.0, 2.0), (1.0, 3.0)])
        );
        assert_eq!(
            "game:3,4".parse::<ProblemSpec>().unwrap(),
            ProblemSpec::Game { n: 3, d: 4 }
        );
        assert_eq!(
            "game.json".parse::<ProblemSpec>().unwrap(),
            ProblemSpec::File("game.json".into())
        );
        assert!("consensus:1,x".parse::<ProblemSpec>().is_err());
        for s in [
            "consensus:1,2",
            "intervals:0/2,1/3",
            "lasso:1:3",
            "random-affine:3,2",
        ] {
            assert_eq!(s.parse::<ProblemSpec>().unwrap().to_string(), s);
        }
    }
}
