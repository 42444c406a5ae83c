//! Maximal monotone operators on `R^d`, exposed through their resolvents
//! `J_F = (Id + F)^{-1}`.
//!
//! Only operators with exact resolvents are provided: affine maps (dense LU
//! solve), proximity operators with closed forms, quadratic saddle
//! operators, and user supplied resolvents.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{min_eigenvalue_symmetric, DenseMatrix, Lu};
use crate::scalar::Real;

/// Slack allowed on `A + A^T ⪰ 0` and on `P, Q ⪰ 0`.
pub const MONOTONE_TOL: f64 = 1e-10;

/// Convex functions whose proximity operators are available in closed form.
#[derive(Clone, Debug, PartialEq)]
pub enum ProxFunction<T> {
    /// `lambda * ||x||_1`.
    L1 { lambda: T },
    /// `(weight / 2) * ||x - point||^2`.
    SquaredDistance { point: Vec<T>, weight: T },
    /// Indicator of `{x : lower <= x <= upper}`.
    Box { lower: Vec<T>, upper: Vec<T> },
    /// Indicator of `{x : G x = h}` with `G` of full row rank.
    AffineSet { matrix: DenseMatrix<T>, rhs: Vec<T> },
}

/// Structured tag describing how an operator was built.
#[derive(Clone, Debug, PartialEq)]
pub enum Descriptor<T> {
    Zero,
    /// `F(x) = A x + b`.
    Affine {
        matrix: DenseMatrix<T>,
        offset: Vec<T>,
    },
    /// `F = ∂f`.
    Prox(ProxFunction<T>),
    /// Monotone operator of `φ(u, v) = ½uᵀPu + uᵀCv − ½vᵀQv + b_uᵀu − b_vᵀv`,
    /// i.e. `(u, v) ↦ (Pu + Cv + b_u, −Cᵀu + Qv + b_v)`.
    Saddle {
        p: DenseMatrix<T>,
        c: DenseMatrix<T>,
        q: DenseMatrix<T>,
        offset: Vec<T>,
    },
    Custom {
        name: String,
    },
}

impl<T> Descriptor<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            Descriptor::Zero => "zero",
            Descriptor::Affine { .. } => "affine",
            Descriptor::Prox(_) => "prox",
            Descriptor::Saddle { .. } => "saddle",
            Descriptor::Custom { .. } => "custom",
        }
    }
}

type ResolventFn<T> = Arc<dyn Fn(&[T]) -> Vec<T> + Send + Sync>;

#[derive(Clone)]
enum Resolver<T> {
    Identity,
    Linear {
        lu: Lu<T>,
        offset: Vec<T>,
    },
    SoftThreshold(T),
    Average {
        point: Vec<T>,
        weight: T,
    },
    Clamp {
        lower: Vec<T>,
        upper: Vec<T>,
    },
    Project {
        matrix: DenseMatrix<T>,
        rhs: Vec<T>,
        gram: Lu<T>,
    },
    Custom(ResolventFn<T>),
}

#[derive(Clone)]
pub struct MonotoneOperator<T> {
    dim: usize,
    descriptor: Descriptor<T>,
    resolver: Resolver<T>,
}

impl<T: fmt::Debug> fmt::Debug for MonotoneOperator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneOperator")
            .field("dim", &self.dim)
            .field("descriptor", &self.descriptor)
            .finish()
    }
}

fn tol<T: Real>(x: f64) -> T {
    T::from_f64_lossy(x)
}

fn check_len<T>(v: &[T], dim: usize, what: &str) -> Result<()> {
    if v.len() != dim {
        return Err(Error::Shape(format!(
            "{what} has length {}, expected {dim}",
            v.len()
        )));
    }
    Ok(())
}

impl<T: Real> MonotoneOperator<T> {
    /// `F = 0`; its resolvent is the identity.
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            descriptor: Descriptor::Zero,
            resolver: Resolver::Identity,
        }
    }

    /// `F(x) = A x + b`, monotone when `A + A^T ⪰ 0`.
    pub fn affine(matrix: DenseMatrix<T>, offset: Vec<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Shape(format!(
                "affine operator needs a square matrix, got {:?}",
                matrix.shape()
            )));
        }
        let dim = matrix.rows();
        check_len(&offset, dim, "affine offset")?;
        if dim > 0 {
            let sym = matrix.add(&matrix.transpose())?;
            let lam = min_eigenvalue_symmetric(&sym)?;
            if lam < -tol::<T>(MONOTONE_TOL) {
                return Err(Error::Monotonicity(format!("A + A^T has eigenvalue {lam}")));
            }
        }
        let shifted = DenseMatrix::identity(dim).add(&matrix)?;
        let lu = Lu::factor(&shifted).expect("Id + A is nonsingular for monotone A");
        Ok(Self {
            dim,
            descriptor: Descriptor::Affine {
                matrix,
                offset: offset.clone(),
            },
            resolver: Resolver::Linear { lu, offset },
        })
    }

    /// Subdifferential of a convex function, resolved by its proximity
    /// operator.
    pub fn prox(dim: usize, f: ProxFunction<T>) -> Result<Self> {
        let resolver = match &f {
            ProxFunction::L1 { lambda } => {
                if !(*lambda >= T::zero()) || !lambda.is_finite() {
                    return Err(Error::Construction(format!(
                        "l1 weight must be finite and nonnegative, got {lambda}"
                    )));
                }
                Resolver::SoftThreshold(*lambda)
            }
            ProxFunction::SquaredDistance { point, weight } => {
                check_len(point, dim, "squared-distance anchor")?;
                if !(*weight >= T::zero()) || !weight.is_finite() {
                    return Err(Error::Construction(format!(
                        "squared-distance weight must be finite and nonnegative, got {weight}"
                    )));
                }
                Resolver::Average {
                    point: point.clone(),
                    weight: *weight,
                }
            }
            ProxFunction::Box { lower, upper } => {
                check_len(lower, dim, "box lower bound")?;
                check_len(upper, dim, "box upper bound")?;
                if let Some(i) = (0..dim).find(|&i| !(lower[i] <= upper[i])) {
                    return Err(Error::Construction(format!(
                        "box is empty in coordinate {i}: [{}, {}]",
                        lower[i], upper[i]
                    )));
                }
                Resolver::Clamp {
                    lower: lower.clone(),
                    upper: upper.clone(),
                }
            }
            ProxFunction::AffineSet { matrix, rhs } => {
                if matrix.cols() != dim {
                    return Err(Error::Shape(format!(
                        "affine set matrix has {} columns, expected {dim}",
                        matrix.cols()
                    )));
                }
                check_len(rhs, matrix.rows(), "affine set right-hand side")?;
                let gram = matrix.matmul(&matrix.transpose())?;
                let gram = Lu::factor(&gram).map_err(|_| {
                    Error::Construction("affine set matrix must have full row rank".into())
                })?;
                Resolver::Project {
                    matrix: matrix.clone(),
                    rhs: rhs.clone(),
                    gram,
                }
            }
        };
        Ok(Self {
            dim,
            descriptor: Descriptor::Prox(f),
            resolver,
        })
    }

    /// Monotone operator of the quadratic saddle function
    /// `φ(u, v) = ½uᵀPu + uᵀCv − ½vᵀQv`.
    pub fn saddle(p: DenseMatrix<T>, c: DenseMatrix<T>, q: DenseMatrix<T>) -> Result<Self> {
        let offset = vec![T::zero(); p.rows() + q.rows()];
        Self::saddle_with_offset(p, c, q, offset)
    }

    /// Saddle operator shifted by a constant `b = (b_u, b_v)`.
    pub fn saddle_with_offset(
        p: DenseMatrix<T>,
        c: DenseMatrix<T>,
        q: DenseMatrix<T>,
        offset: Vec<T>,
    ) -> Result<Self> {
        let (d1, d2) = (p.rows(), q.rows());
        if !p.is_square() || !q.is_square() || c.shape() != (d1, d2) {
            return Err(Error::Shape(format!(
                "saddle blocks P {:?}, C {:?}, Q {:?} are inconsistent",
                p.shape(),
                c.shape(),
                q.shape()
            )));
        }
        check_len(&offset, d1 + d2, "saddle offset")?;
        for (name, block) in [("P", &p), ("Q", &q)] {
            if block.rows() == 0 {
                continue;
            }
            if !block.is_symmetric(1e-12) {
                return Err(Error::Convexity(format!("{name} is not symmetric")));
            }
            let lam = min_eigenvalue_symmetric(block)?;
            if lam < -tol::<T>(MONOTONE_TOL) {
                return Err(Error::Convexity(format!(
                    "{name} has negative eigenvalue {lam}"
                )));
            }
        }
        let full = saddle_matrix(&p, &c, &q);
        let affine = Self::affine(full, offset.clone())?;
        Ok(Self {
            dim: d1 + d2,
            descriptor: Descriptor::Saddle { p, c, q, offset },
            resolver: affine.resolver,
        })
    }

    /// Operator known only through a caller supplied resolvent. The caller
    /// is responsible for firm nonexpansiveness.
    pub fn custom(
        dim: usize,
        name: impl Into<String>,
        resolvent: impl Fn(&[T]) -> Vec<T> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            descriptor: Descriptor::Custom { name: name.into() },
            resolver: Resolver::Custom(Arc::new(resolvent)),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn descriptor(&self) -> &Descriptor<T> {
        &self.descriptor
    }

    pub fn resolvent(&self, y: &[T]) -> Result<Vec<T>> {
        check_len(y, self.dim, "resolvent argument")?;
        let mut out = vec![T::zero(); self.dim];
        self.resolve_into(y, &mut out);
        Ok(out)
    }

    /// Unchecked resolvent evaluation into `out`.
    pub(crate) fn resolve_into(&self, y: &[T], out: &mut [T]) {
        match &self.resolver {
            Resolver::Identity => out.copy_from_slice(y),
            Resolver::Linear { lu, offset } => {
                let rhs: Vec<T> = y.iter().zip(offset).map(|(&a, &b)| a - b).collect();
                let x = lu.solve(&rhs).expect("dimension checked at construction");
                out.copy_from_slice(&x);
            }
            Resolver::SoftThreshold(lambda) => {
                for (o, &v) in out.iter_mut().zip(y) {
                    let mag = (v.abs() - *lambda).max(T::zero());
                    *o = if v < T::zero() { -mag } else { mag };
                }
            }
            Resolver::Average { point, weight } => {
                let denom = T::one() + *weight;
                for ((o, &v), &a) in out.iter_mut().zip(y).zip(point) {
                    *o = (v + *weight * a) / denom;
                }
            }
            Resolver::Clamp { lower, upper } => {
                for (i, (o, &v)) in out.iter_mut().zip(y).enumerate() {
                    *o = v.max(lower[i]).min(upper[i]);
                }
            }
            Resolver::Project { matrix, rhs, gram } => {
                let gy = matrix
                    .mul_vec(y)
                    .expect("dimension checked at construction");
                let r: Vec<T> = gy.iter().zip(rhs).map(|(&a, &b)| a - b).collect();
                let w = gram.solve(&r).expect("dimension checked at construction");
                let corr = matrix
                    .transpose()
                    .mul_vec(&w)
                    .expect("dimension checked at construction");
                for ((o, &v), &c) in out.iter_mut().zip(y).zip(&corr) {
                    *o = v - c;
                }
            }
            Resolver::Custom(f) => {
                let x = f(y);
                assert_eq!(x.len(), self.dim, "custom resolvent returned wrong length");
                out.copy_from_slice(&x);
            }
        }
    }

    /// `F(x)` for operators that are single-valued everywhere.
    pub fn evaluate(&self, x: &[T]) -> Option<Vec<T>> {
        if x.len() != self.dim {
            return None;
        }
        match &self.descriptor {
            Descriptor::Zero => Some(vec![T::zero(); self.dim]),
            Descriptor::Affine { matrix, offset } => Some(affine_eval(matrix, offset, x)),
            Descriptor::Saddle { p, c, q, offset } => {
                Some(affine_eval(&saddle_matrix(p, c, q), offset, x))
            }
            Descriptor::Prox(ProxFunction::SquaredDistance { point, weight }) => Some(
                x.iter()
                    .zip(point)
                    .map(|(&xi, &ai)| *weight * (xi - ai))
                    .collect(),
            ),
            Descriptor::Prox(_) | Descriptor::Custom { .. } => None,
        }
    }

    /// Operator `alpha * F`.
    pub fn scale(&self, alpha: T) -> Result<Self> {
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return Err(Error::Contract(format!(
                "scale must be positive, got {alpha}"
            )));
        }
        match &self.descriptor {
            Descriptor::Zero => Ok(self.clone()),
            Descriptor::Affine { matrix, offset } => Self::affine(
                matrix.scale(alpha),
                offset.iter().map(|&b| alpha * b).collect(),
            ),
            Descriptor::Saddle { p, c, q, offset } => Self::saddle_with_offset(
                p.scale(alpha),
                c.scale(alpha),
                q.scale(alpha),
                offset.iter().map(|&b| alpha * b).collect(),
            ),
            Descriptor::Prox(f) => {
                let scaled = match f {
                    ProxFunction::L1 { lambda } => ProxFunction::L1 {
                        lambda: alpha * *lambda,
                    },
                    ProxFunction::SquaredDistance { point, weight } => {
                        ProxFunction::SquaredDistance {
                            point: point.clone(),
                            weight: alpha * *weight,
                        }
                    }
                    // indicators are invariant under positive scaling
                    ProxFunction::Box { .. } | ProxFunction::AffineSet { .. } => f.clone(),
                };
                Self::prox(self.dim, scaled)
            }
            Descriptor::Custom { name } => Err(Error::Unsupported(format!(
                "no scaling rule for custom operator {name:?}"
            ))),
        }
    }
}

fn affine_eval<T: Real>(matrix: &DenseMatrix<T>, offset: &[T], x: &[T]) -> Vec<T> {
    matrix
        .mul_vec(x)
        .expect("dimension checked by caller")
        .into_iter()
        .zip(offset)
        .map(|(a, &b)| a + b)
        .collect()
}

/// `[[P, C], [-C^T, Q]]`.
pub fn saddle_matrix<T: Real>(
    p: &DenseMatrix<T>,
    c: &DenseMatrix<T>,
    q: &DenseMatrix<T>,
) -> DenseMatrix<T> {
    let d1 = p.rows();
    DenseMatrix::from_fn(d1 + q.rows(), d1 + q.rows(), |i, j| {
        match (i < d1, j < d1) {
            (true, true) => p.get(i, j),
            (true, false) => c.get(i, j - d1),
            (false, true) => -c.get(j, i - d1),
            (false, false) => q.get(i - d1, j - d1),
        }
    })
}

pub fn affine_op<T: Real>(a: DenseMatrix<T>, b: Vec<T>) -> Result<MonotoneOperator<T>> {
    MonotoneOperator::affine(a, b)
}

pub fn prox_op<T: Real>(dim: usize, f: ProxFunction<T>) -> Result<MonotoneOperator<T>> {
    MonotoneOperator::prox(dim, f)
}

pub fn saddle_op<T: Real>(
    p: DenseMatrix<T>,
    c: DenseMatrix<T>,
    q: DenseMatrix<T>,
) -> Result<MonotoneOperator<T>> {
    MonotoneOperator::saddle(p, c, q)
}

pub fn scale_op<T: Real>(f: &MonotoneOperator<T>, alpha: T) -> Result<MonotoneOperator<T>> {
    f.scale(alpha)
}

/// Ordered list `(F_1, ..., F_n)` acting on a common space `R^d`.
#[derive(Clone, Debug)]
pub struct OperatorTuple<T> {
    dim: usize,
    ops: Vec<MonotoneOperator<T>>,
}

impl<T: Real> OperatorTuple<T> {
    pub fn new(ops: Vec<MonotoneOperator<T>>) -> Result<Self> {
        let Some(first) = ops.first() else {
            return Err(Error::Shape("operator tuple is empty".into()));
        };
        let dim = first.dim();
        if let Some((i, op)) = ops.iter().enumerate().find(|(_, op)| op.dim() != dim) {
            return Err(Error::Shape(format!(
                "operator {i} acts on R^{} but operator 0 acts on R^{dim}",
                op.dim()
            )));
        }
        Ok(Self { dim, ops })
    }

    pub fn zeros(n: usize, dim: usize) -> Self {
        Self {
            dim,
            ops: (0..n).map(|_| MonotoneOperator::zero(dim)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize) -> &MonotoneOperator<T> {
        &self.ops[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &MonotoneOperator<T>> {
        self.ops.iter()
    }

    pub fn as_slice(&self) -> &[MonotoneOperator<T>] {
        &self.ops
    }

    /// `sum_i F_i(x)` when every member is single-valued.
    pub fn sum_evaluate(&self, x: &[T]) -> Option<Vec<T>> {
        let mut acc = vec![T::zero(); self.dim];
        for op in &self.ops {
            let fx = op.evaluate(x)?;
            for (a, v) in acc.iter_mut().zip(fx) {
                *a = *a + v;
            }
        }
        Some(acc)
    }

    pub fn all_evaluable(&self) -> bool {
        let probe = vec![T::zero(); self.dim];
        self.ops.iter().all(|op| op.evaluate(&probe).is_some())
    }
}
