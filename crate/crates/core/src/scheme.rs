//! Splitting schemes `(M, N, gamma)` and their validation.
//!
//! A scheme defines the operator `T(z) = z + gamma * M x` where
//! `x = J_F(S z + N x)` and `S = -M^T`. `S` is never stored. `M` is kept in
//! factored form `M = sqrt(c) * B` so that the Gram matrix `M^T M = c B^T B`
//! is formed without rounding through the square root; for most schemes
//! `c = 1`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{max_eigenvalue_symmetric, numerical_rank, DenseMatrix, DEFAULT_RANK_TOL};
use crate::scalar::{Real, Scalar};

/// Tolerance on `|M e|` and on `|sum N - n|`.
pub const KERNEL_TOL: f64 = 1e-10;
/// Tolerance on the largest eigenvalue of the defect matrix.
pub const PSD_TOL: f64 = 1e-9;
/// Relaxation used when a document does not specify one.
pub const DEFAULT_GAMMA: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct SplittingScheme<T> {
    m_scale_sq: T,
    m_base: DenseMatrix<T>,
    n_mat: DenseMatrix<T>,
    gamma: T,
    gamma_defaulted: bool,
}

impl<T: Scalar> SplittingScheme<T> {
    /// Scheme with coefficient matrices `M` (m x n) and `N` (n x n).
    pub fn new(m: DenseMatrix<T>, n: DenseMatrix<T>, gamma: T) -> Result<Self> {
        Self::with_scaled_m(T::one(), m, n, gamma)
    }

    /// Scheme with `M = sqrt(scale_sq) * base`.
    pub fn with_scaled_m(
        scale_sq: T,
        base: DenseMatrix<T>,
        n: DenseMatrix<T>,
        gamma: T,
    ) -> Result<Self> {
        if !n.is_square() {
            return Err(Error::Shape(format!(
                "N must be square, got {:?}",
                n.shape()
            )));
        }
        if base.cols() != n.rows() {
            return Err(Error::Shape(format!(
                "M has {} columns but N is {}x{}",
                base.cols(),
                n.rows(),
                n.cols()
            )));
        }
        if n.rows() == 0 {
            return Err(Error::Shape("a scheme needs at least one operator".into()));
        }
        if scale_sq <= T::zero() {
            return Err(Error::Contract(format!(
                "scale of M must be positive, got {scale_sq}"
            )));
        }
        if gamma <= T::zero() {
            return Err(Error::Contract(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        Ok(Self {
            m_scale_sq: scale_sq,
            m_base: base,
            n_mat: n,
            gamma,
            gamma_defaulted: false,
        })
    }

    pub fn with_gamma(mut self, gamma: T) -> Result<Self> {
        if gamma <= T::zero() {
            return Err(Error::Contract(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        self.gamma = gamma;
        self.gamma_defaulted = false;
        Ok(self)
    }

    /// Number of operators.
    pub fn n(&self) -> usize {
        self.n_mat.rows()
    }

    /// Lifting dimension.
    pub fn m(&self) -> usize {
        self.m_base.rows()
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    /// True when `gamma` was not given and [`DEFAULT_GAMMA`] was used.
    pub fn gamma_defaulted(&self) -> bool {
        self.gamma_defaulted
    }

    /// `gamma` lies in the open interval `(0, 1)` required for convergence.
    pub fn gamma_conforming(&self) -> bool {
        self.gamma > T::zero() && self.gamma < T::one()
    }

    pub fn n_matrix(&self) -> &DenseMatrix<T> {
        &self.n_mat
    }

    /// `c` in `M = sqrt(c) * B`.
    pub fn m_scale_sq(&self) -> T {
        self.m_scale_sq
    }

    /// `B` in `M = sqrt(c) * B`.
    pub fn m_base(&self) -> &DenseMatrix<T> {
        &self.m_base
    }

    /// `M^T M`, formed as `c B^T B`.
    pub fn gram(&self) -> DenseMatrix<T> {
        let g = self.m_base.gram();
        if self.m_scale_sq.is_one() {
            g
        } else {
            g.scale(self.m_scale_sq)
        }
    }

    /// `M^T M + N + N^T - 2I`. Exactly symmetric.
    pub fn defect(&self) -> DenseMatrix<T> {
        let n = self.n();
        let two = T::one() + T::one();
        let g = self.gram();
        DenseMatrix::from_fn(n, n, |i, j| {
            let mut v = g.get(i, j) + (self.n_mat.get(i, j) + self.n_mat.get(j, i));
            if i == j {
                v = v - two;
            }
            v
        })
    }

    pub fn n_sum(&self) -> T {
        self.n_mat.sum()
    }
}

impl<T: Real> SplittingScheme<T> {
    /// Dense `M`.
    pub fn m_matrix(&self) -> DenseMatrix<T> {
        if self.m_scale_sq == T::one() {
            self.m_base.clone()
        } else {
            self.m_base.scale(self.m_scale_sq.sqrt())
        }
    }

    /// `S = -M^T`.
    pub fn derive_s(&self) -> DenseMatrix<T> {
        self.m_matrix().transpose().neg()
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }
}

/// Outcome of checking a scheme against the four structural conditions:
/// (a) `ker M = span{e}`, (b) `N` strictly lower triangular with entries
/// summing to `n`, (c) `S = -M^T`, (d) defect negative semidefinite.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub n: usize,
    pub m: usize,
    pub kernel_residual: f64,
    pub rank: usize,
    pub kernel_ok: bool,
    pub lower_triangular: bool,
    pub n_sum: f64,
    pub n_sum_ok: bool,
    pub adjoint_ok: bool,
    pub defect: DenseMatrix<f64>,
    pub defect_max_eigenvalue: f64,
    pub defect_ok: bool,
    pub gamma: f64,
    pub gamma_conforming: bool,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn condition_a(&self) -> bool {
        self.kernel_ok
    }

    pub fn condition_b(&self) -> bool {
        self.lower_triangular && self.n_sum_ok
    }

    pub fn condition_c(&self) -> bool {
        self.adjoint_ok
    }

    pub fn condition_d(&self) -> bool {
        self.defect_ok
    }

    pub fn is_valid(&self) -> bool {
        self.condition_a() && self.condition_b() && self.condition_c() && self.condition_d()
    }

    /// Labels of the failing conditions, e.g. `["(b)"]`.
    pub fn failures(&self) -> Vec<&'static str> {
        [
            ("(a)", self.condition_a()),
            ("(b)", self.condition_b()),
            ("(c)", self.condition_c()),
            ("(d)", self.condition_d()),
        ]
        .into_iter()
        .filter(|(_, ok)| !ok)
        .map(|(l, _)| l)
        .collect()
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scheme: n = {}, m = {}", self.n, self.m)?;
        writeln!(
            f,
            "(a) ker M = span{{e}}: {} (|Me| = {:e}, rank = {}, expected {})",
            verdict(self.condition_a()),
            self.kernel_residual,
            self.rank,
            self.n - 1
        )?;
        writeln!(
            f,
            "(b) N strictly lower triangular, sum N = n: {} (lower = {}, sum N = {})",
            verdict(self.condition_b()),
            self.lower_triangular,
            self.n_sum
        )?;
        writeln!(f, "(c) S = -M^T: {} (derived)", verdict(self.condition_c()))?;
        writeln!(
            f,
            "(d) M^T M + N + N^T - 2I <= 0: {} (defect max eigenvalue = {:e})",
            verdict(self.condition_d()),
            self.defect_max_eigenvalue
        )?;
        writeln!(
            f,
            "gamma = {} ({})",
            self.gamma,
            if self.gamma_conforming {
                "conforming"
            } else {
                "non-conforming: outside (0,1)"
            }
        )?;
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        write!(f, "valid: {}", if self.is_valid() { "yes" } else { "no" })
    }
}

pub fn derive_s<T: Real>(scheme: &SplittingScheme<T>) -> DenseMatrix<T> {
    scheme.derive_s()
}

pub fn defect<T: Scalar>(scheme: &SplittingScheme<T>) -> DenseMatrix<T> {
    scheme.defect()
}

pub fn validate<T: Real>(scheme: &SplittingScheme<T>) -> ValidationReport {
    let n = scheme.n();
    let m_dense = scheme.m_matrix();

    let me = m_dense.row_sums();
    let kernel_residual = me
        .iter()
        .map(|x| x.to_f64_lossy().abs())
        .fold(0.0, f64::max);
    let rank = numerical_rank(&m_dense, DEFAULT_RANK_TOL).unwrap_or(0);
    let kernel_ok = kernel_residual <= KERNEL_TOL && rank == n - 1;

    let lower_triangular = scheme.n_matrix().is_strictly_lower_triangular();
    let n_sum = scheme.n_sum().to_f64_lossy();
    let n_sum_ok = (n_sum - n as f64).abs() <= KERNEL_TOL;

    let defect = scheme.defect().cast::<f64>();
    let defect_max_eigenvalue = if defect.is_zero() {
        0.0
    } else {
        max_eigenvalue_symmetric(&defect).unwrap_or(f64::INFINITY)
    };
    let defect_ok = defect_max_eigenvalue <= PSD_TOL;

    let mut warnings = Vec::new();
    if scheme.gamma_defaulted() {
        warnings.push(format!(
            "gamma missing from document; defaulted to {DEFAULT_GAMMA}"
        ));
    }
    if !scheme.gamma_conforming() {
        warnings.push("gamma outside (0,1): convergence is not guaranteed".into());
    }

    ValidationReport {
        n,
        m: scheme.m(),
        kernel_residual,
        rank,
        kernel_ok,
        lower_triangular,
        n_sum,
        n_sum_ok,
        adjoint_ok: true,
        defect,
        defect_max_eigenvalue,
        defect_ok,
        gamma: scheme.gamma().to_f64_lossy(),
        gamma_conforming: scheme.gamma_conforming(),
        warnings,
    }
}

/// On-disk scheme document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchemeDocument {
    pub n: usize,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(rename = "M")]
    pub m_rows: Vec<Vec<f64>>,
    #[serde(rename = "N")]
    pub n_rows: Vec<Vec<f64>>,
}

impl SchemeDocument {
    pub fn from_scheme<T: Real>(scheme: &SplittingScheme<T>) -> Self {
        let to_f64 = |m: &DenseMatrix<T>| -> Vec<Vec<f64>> {
            m.to_rows()
                .into_iter()
                .map(|r| r.into_iter().map(|x| x.to_f64_lossy()).collect())
                .collect()
        };
        Self {
            n: scheme.n(),
            m: scheme.m(),
            gamma: Some(scheme.gamma().to_f64_lossy()),
            m_rows: to_f64(&scheme.m_matrix()),
            n_rows: to_f64(scheme.n_matrix()),
        }
    }

    pub fn into_scheme<T: Real>(self) -> Result<SplittingScheme<T>> {
        let (n, m) = (self.n, self.m);
        if self.m_rows.len() != m {
            return Err(Error::Shape(format!(
                "\"M\" has {} rows but \"m\" = {m}",
                self.m_rows.len()
            )));
        }
        if let Some((i, r)) = self.m_rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Shape(format!(
                "\"M\" row {i} has {} entries but \"n\" = {n}",
                r.len()
            )));
        }
        if self.n_rows.len() != n {
            return Err(Error::Shape(format!(
                "\"N\" has {} rows but \"n\" = {n}",
                self.n_rows.len()
            )));
        }
        if let Some((i, r)) = self.n_rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Shape(format!(
                "\"N\" row {i} has {} entries but \"n\" = {n}",
                r.len()
            )));
        }
        let conv = |rows: Vec<Vec<f64>>| -> Vec<T> {
            rows.into_iter().flatten().map(T::from_f64_lossy).collect()
        };
        let m_mat = DenseMatrix::from_row_major(m, n, conv(self.m_rows))?;
        let n_mat = DenseMatrix::from_row_major(n, n, conv(self.n_rows))?;
        let defaulted = self.gamma.is_none();
        let gamma = T::from_f64_lossy(self.gamma.unwrap_or(DEFAULT_GAMMA));
        let mut scheme = SplittingScheme::new(m_mat, n_mat, gamma)?;
        scheme.gamma_defaulted = defaulted;
        Ok(scheme)
    }
}

pub(crate) fn json_error(e: serde_json::Error) -> Error {
    Error::parse(
        format!("line {} column {}", e.line(), e.column()),
        e.to_string(),
    )
}

/// Parses a scheme document.
pub fn load_scheme<T: Real>(text: &str) -> Result<SplittingScheme<T>> {
    let doc: SchemeDocument = serde_json::from_str(text).map_err(json_error)?;
    doc.into_scheme()
}

/// Serializes a scheme with `M` materialized densely.
pub fn save_scheme<T: Real>(scheme: &SplittingScheme<T>) -> String {
    serde_json::to_string_pretty(&SchemeDocument::from_scheme(scheme))
        .expect("scheme documents always serialize")
}
