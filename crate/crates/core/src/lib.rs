//! Frugal resolvent splitting for finite sums of maximal monotone operators.
//!
//! A scheme is a pair `(M, N)` with `M` of size `m × n` and `N` strictly
//! lower triangular. For operators `F_1, …, F_n` and `γ ∈ (0, 1)` it defines
//!
//! ```text
//! T(z) = z + γ M x,    x = J_F(S z + N x),    S = −Mᵀ,
//! ```
//!
//! where `x` is computed by one resolvent evaluation per operator, in order.
//! Fixed points of `T` correspond to zeros of `Σ F_i`.
//!
//! The library is generic over the scalar type: matrices, schemes and the
//! builders in [`schemes`] work over any [`Scalar`] (including exact
//! rationals), while resolvents and iteration require a [`Real`]. The
//! aliases below fix the scalar to `f64`.
//!
//! ```
//! use resolvent_splitting::{problems, schemes, iteration::{iterate, StopRule}, BlockVector};
//!
//! let scheme = schemes::minimal_lifting(5, 0.5).unwrap();
//! let problem = problems::affine_consensus(&[vec![1.0], vec![2.0], vec![3.0], vec![4.0], vec![5.0]]).unwrap();
//! let trace = iterate(&scheme, &problem.operators, BlockVector::zeros(4, 1), StopRule::default()).unwrap();
//! assert!((trace.solution().0[0] - 3.0).abs() < 1e-6);
//! ```

// `!(a <= b)` is used deliberately so that NaN fails range checks; index
// loops mirror the matrix formulas in the dense kernels.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod graph;
pub mod iteration;
pub mod numerics;
pub mod operators;
pub mod problems;
pub mod scalar;
pub mod scheme;
pub mod schemes;
pub mod simulator;

pub use error::{Error, Result};
pub use graph::{load_edge_list, Graph};
pub use iteration::{Status, StopRule};
pub use scalar::{Real, Scalar};
pub use scheme::{load_scheme, save_scheme, SplittingScheme, ValidationReport};
pub use schemes::{GraphSpec, SchemeSpec};

pub type Matrix = numerics::DenseMatrix<f64>;
pub type BlockVector = numerics::BlockVector<f64>;
pub type Scheme = scheme::SplittingScheme<f64>;
pub type Operator = operators::MonotoneOperator<f64>;
pub type Operators = operators::OperatorTuple<f64>;
pub type Trace = iteration::Trace<f64>;
pub type SimTrace = simulator::SimTrace<f64>;
pub type Problem = problems::Problem<f64>;

/// Exact rational scalar for matrix identities.
pub type Rational = num_rational::Rational64;
pub type RationalMatrix = numerics::DenseMatrix<Rational>;
pub type RationalScheme = scheme::SplittingScheme<Rational>;
