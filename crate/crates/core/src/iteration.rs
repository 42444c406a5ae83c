//! Fixed-point engine for `T(z) = z + γ M x`, `x = J_F(S z + N x)`.
//!
//! Two equivalent drivers are provided: the lifted form on `z ∈ H^m` and
//! the reduced form on `v = S z ∈ H^n`, which updates
//! `v ← v − γ MᵀM x` and never materializes `z`.

use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::numerics::{
    distance, kron_apply, kron_apply_into, pseudo_inverse, BlockVector, DenseMatrix,
};
use crate::operators::OperatorTuple;
use crate::scalar::Real;
use crate::scheme::SplittingScheme;

/// Tolerance on `‖S z − (y − N x)‖` and on `‖T(z) − z‖` for embedded
/// fixed points, relative to `1 + ‖·‖` of the data.
pub const EMBED_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StopRule<T> {
    tol_fp: T,
    tol_consensus: T,
    max_iters: usize,
}

impl<T: Real> StopRule<T> {
    pub fn new(tol_fp: T, tol_consensus: T, max_iters: usize) -> Result<Self> {
        if !(tol_fp > T::zero()) || !(tol_consensus > T::zero()) {
            return Err(Error::Contract(format!(
                "tolerances must be positive, got {tol_fp} and {tol_consensus}"
            )));
        }
        if max_iters == 0 {
            return Err(Error::Contract("max_iters must be at least 1".into()));
        }
        Ok(Self {
            tol_fp,
            tol_consensus,
            max_iters,
        })
    }

    pub fn tol_fp(&self) -> T {
        self.tol_fp
    }

    pub fn tol_consensus(&self) -> T {
        self.tol_consensus
    }

    pub fn max_iters(&self) -> usize {
        self.max_iters
    }

    pub fn is_met(&self, fp_residual: T, consensus_residual: T) -> bool {
        fp_residual <= self.tol_fp && consensus_residual <= self.tol_consensus
    }
}

impl<T: Real> Default for StopRule<T> {
    fn default() -> Self {
        let tol = T::from_f64_lossy(1e-8);
        Self {
            tol_fp: tol,
            tol_consensus: tol,
            max_iters: 100_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIters,
    Diverged,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIters => "max-iters",
            Status::Diverged => "diverged",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which variable the driver iterates on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Form {
    /// `z ∈ H^m`.
    Lifted,
    /// `v = S z ∈ H^n`.
    Reduced,
}

/// Snapshot of iteration `k`: the driving variable (`z^k` or `v^k`), the
/// resolvent outputs `x^k` computed from it, and their residuals.
#[derive(Clone, Debug)]
pub struct IterationState<T> {
    pub k: usize,
    pub form: Form,
    pub state: BlockVector<T>,
    pub x: BlockVector<T>,
    /// `‖M x^k‖`.
    pub fp_residual: T,
    /// `max_i ‖x_i^k − mean(x^k)‖`.
    pub consensus_residual: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Record<T> {
    pub k: usize,
    pub fp_residual: T,
    pub consensus_residual: T,
    pub ref_error: Option<T>,
}

#[derive(Clone, Debug)]
pub struct Trace<T> {
    pub records: Vec<Record<T>>,
    pub status: Status,
    /// Driving variable at the last recorded iteration.
    pub final_state: BlockVector<T>,
    /// Resolvent outputs at the last recorded iteration.
    pub final_x: BlockVector<T>,
    /// Every `(state, x)` pair when requested through [`RunOptions`].
    pub history: Vec<(BlockVector<T>, BlockVector<T>)>,
    /// Free-form annotations exported as comment lines.
    pub notes: Vec<String>,
}

impl<T: Real> Trace<T> {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn last(&self) -> Option<&Record<T>> {
        self.records.last()
    }

    /// Blockwise mean of the final `x` and its consensus residual.
    pub fn solution(&self) -> (Vec<T>, T) {
        recover_solution(&self.final_x)
    }

    /// CSV with header `k,fp_residual,consensus_residual,ref_error`, notes as
    /// `# ` comment lines and a trailing `# status=<...>` line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,fp_residual,consensus_residual,ref_error\n");
        for r in &self.records {
            write_record(&mut out, r);
            out.push('\n');
        }
        write_footer(&mut out, &self.notes, self.status);
        out
    }
}

pub(crate) fn write_record<T: Real>(out: &mut String, r: &Record<T>) {
    let _ = write!(out, "{},{},{},", r.k, r.fp_residual, r.consensus_residual);
    if let Some(e) = r.ref_error {
        let _ = write!(out, "{e}");
    }
}

pub(crate) fn write_footer(out: &mut String, notes: &[String], status: Status) {
    for n in notes {
        let _ = writeln!(out, "# {n}");
    }
    let _ = writeln!(out, "# status={status}");
}

#[derive(Clone, Debug)]
pub struct RunOptions<T> {
    pub stop: StopRule<T>,
    /// Reference solution for the `ref_error` column.
    pub reference: Option<Vec<T>>,
    /// Permit `γ ∉ (0, 1)`; the trace is annotated as non-conforming.
    pub allow_nonconforming_gamma: bool,
    /// Keep every iterate in [`Trace::history`].
    pub keep_history: bool,
}

impl<T: Real> RunOptions<T> {
    pub fn new(stop: StopRule<T>) -> Self {
        Self {
            stop,
            reference: None,
            allow_nonconforming_gamma: false,
            keep_history: false,
        }
    }
}

impl<T: Real> Default for RunOptions<T> {
    fn default() -> Self {
        Self::new(StopRule::default())
    }
}

/// A scheme bound to an operator tuple with its dense matrices prepared.
#[derive(Clone, Debug)]
pub struct Splitting<'a, T> {
    scheme: &'a SplittingScheme<T>,
    ops: &'a OperatorTuple<T>,
    m: DenseMatrix<T>,
    s: DenseMatrix<T>,
    gram: DenseMatrix<T>,
}

impl<'a, T: Real> Splitting<'a, T> {
    pub fn new(scheme: &'a SplittingScheme<T>, ops: &'a OperatorTuple<T>) -> Result<Self> {
        if ops.len() != scheme.n() {
            return Err(Error::Shape(format!(
                "scheme expects {} operators, got {}",
                scheme.n(),
                ops.len()
            )));
        }
        let m = scheme.m_matrix();
        let s = m.transpose().neg();
        Ok(Self {
            scheme,
            ops,
            m,
            s,
            gram: scheme.gram(),
        })
    }

    pub fn scheme(&self) -> &SplittingScheme<T> {
        self.scheme
    }

    pub fn operators(&self) -> &OperatorTuple<T> {
        self.ops
    }

    pub fn dim(&self) -> usize {
        self.ops.dim()
    }

    pub fn gamma(&self) -> T {
        self.scheme.gamma()
    }

    fn check(&self, u: &BlockVector<T>, blocks: usize, what: &str) -> Result<()> {
        if u.blocks() != blocks || u.dim() != self.dim() {
            return Err(Error::Shape(format!(
                "{what} has {} blocks of dimension {}, expected {blocks} of dimension {}",
                u.blocks(),
                u.dim(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// `x_i = J_{F_i}(base_i + Σ_{j<i} N_ij x_j)` in index order.
    fn forward_substitute(&self, base: &BlockVector<T>) -> BlockVector<T> {
        let n = self.scheme.n();
        let d = self.dim();
        let nm = self.scheme.n_matrix();
        let mut x = BlockVector::zeros(n, d);
        let mut y = vec![T::zero(); d];
        for i in 0..n {
            y.copy_from_slice(base.block(i));
            for j in 0..i {
                let nij = nm.get(i, j);
                if nij.is_zero() {
                    continue;
                }
                for (yk, &xk) in y.iter_mut().zip(x.block(j)) {
                    *yk = *yk + nij * xk;
                }
            }
            self.ops.get(i).resolve_into(&y, x.block_mut(i));
        }
        x
    }

    pub fn solve_x(&self, z: &BlockVector<T>) -> Result<BlockVector<T>> {
        self.check(z, self.scheme.m(), "z")?;
        let sz = kron_apply(&self.s, z)?;
        Ok(self.forward_substitute(&sz))
    }

    /// `x = J_F(v + N x)`.
    pub fn solve_x_reduced(&self, v: &BlockVector<T>) -> Result<BlockVector<T>> {
        self.check(v, self.scheme.n(), "v")?;
        Ok(self.forward_substitute(v))
    }

    /// `(T(z), x)`.
    pub fn apply_t(&self, z: &BlockVector<T>) -> Result<(BlockVector<T>, BlockVector<T>)> {
        let x = self.solve_x(z)?;
        let mx = kron_apply(&self.m, &x)?;
        Ok((z.axpy(self.gamma(), &mx)?, x))
    }

    /// `‖M x‖`.
    pub fn fp_residual(&self, x: &BlockVector<T>) -> T {
        kron_apply(&self.m, x)
            .map(|mx| mx.norm())
            .unwrap_or_else(|_| T::nan())
    }

    /// Lifted driver starting at `z0`.
    pub fn lifted(&self, z0: BlockVector<T>) -> Result<Iterates<'_, 'a, T>> {
        self.check(&z0, self.scheme.m(), "z0")?;
        Ok(Iterates::new(self, Form::Lifted, z0))
    }

    /// Reduced driver starting at `v0`, which should lie in `range S`.
    pub fn reduced(&self, v0: BlockVector<T>) -> Result<Iterates<'_, 'a, T>> {
        self.check(&v0, self.scheme.n(), "v0")?;
        Ok(Iterates::new(self, Form::Reduced, v0))
    }

    pub fn s_matrix(&self) -> &DenseMatrix<T> {
        &self.s
    }

    pub fn m_matrix(&self) -> &DenseMatrix<T> {
        &self.m
    }

    pub fn gram(&self) -> &DenseMatrix<T> {
        &self.gram
    }
}

/// Unbounded stream of iteration states.
pub struct Iterates<'s, 'a, T> {
    splitting: &'s Splitting<'a, T>,
    form: Form,
    state: BlockVector<T>,
    scratch: BlockVector<T>,
    k: usize,
}

impl<'s, 'a, T: Real> Iterates<'s, 'a, T> {
    fn new(splitting: &'s Splitting<'a, T>, form: Form, state: BlockVector<T>) -> Self {
        let scratch_blocks = match form {
            Form::Lifted => splitting.scheme.m(),
            Form::Reduced => splitting.scheme.n(),
        };
        Self {
            splitting,
            form,
            scratch: BlockVector::zeros(scratch_blocks, splitting.dim()),
            state,
            k: 0,
        }
    }
}

impl<T: Real> Iterator for Iterates<'_, '_, T> {
    type Item = IterationState<T>;

    fn next(&mut self) -> Option<Self::Item> {
        let sp = self.splitting;
        let gamma = sp.gamma();
        let x = match self.form {
            Form::Lifted => {
                let mut sz = BlockVector::zeros(sp.scheme.n(), sp.dim());
                kron_apply_into(&sp.s, &self.state, &mut sz);
                sp.forward_substitute(&sz)
            }
            Form::Reduced => sp.forward_substitute(&self.state),
        };
        let mut mx = BlockVector::zeros(sp.scheme.m(), sp.dim());
        kron_apply_into(&sp.m, &x, &mut mx);
        let fp_residual = mx.norm();
        let (_, consensus_residual) = recover_solution(&x);
        let snapshot = IterationState {
            k: self.k,
            form: self.form,
            state: self.state.clone(),
            x,
            fp_residual,
            consensus_residual,
        };
        // advance
        match self.form {
            Form::Lifted => {
                self.state = self.state.axpy(gamma, &mx).expect("shapes fixed");
            }
            Form::Reduced => {
                kron_apply_into(&sp.gram, &snapshot.x, &mut self.scratch);
                self.state = self
                    .state
                    .axpy(-gamma, &self.scratch)
                    .expect("shapes fixed");
            }
        }
        self.k += 1;
        Some(snapshot)
    }
}

/// Runs a driver under `opts`, recording one entry per iteration.
pub fn run<T: Real>(
    splitting: &Splitting<'_, T>,
    iterates: Iterates<'_, '_, T>,
    opts: &RunOptions<T>,
) -> Result<Trace<T>> {
    let scheme = splitting.scheme();
    let mut notes = Vec::new();
    if !scheme.gamma_conforming() {
        if !opts.allow_nonconforming_gamma {
            return Err(Error::Contract(format!(
                "gamma = {} lies outside (0,1); enable the non-conforming override to run anyway",
                scheme.gamma()
            )));
        }
        notes.push(format!("gamma={} non-conforming", scheme.gamma()));
    }
    if let Some(r) = &opts.reference {
        if r.len() != splitting.dim() {
            return Err(Error::Shape(format!(
                "reference has dimension {}, expected {}",
                r.len(),
                splitting.dim()
            )));
        }
    }
    let mut records = Vec::new();
    let mut history = Vec::new();
    let mut status = Status::MaxIters;
    let mut last = None;
    for it in iterates.take(opts.stop.max_iters()) {
        let point = opts.reference.as_ref().map(|r| {
            let (mean, _) = recover_solution(&it.x);
            distance(&mean, r)
        });
        records.push(Record {
            k: it.k,
            fp_residual: it.fp_residual,
            consensus_residual: it.consensus_residual,
            ref_error: point,
        });
        if opts.keep_history {
            history.push((it.state.clone(), it.x.clone()));
        }
        let finite = it.fp_residual.is_finite()
            && it.consensus_residual.is_finite()
            && it.x.is_finite()
            && it.state.is_finite();
        let done = if !finite {
            status = Status::Diverged;
            true
        } else if opts.stop.is_met(it.fp_residual, it.consensus_residual) {
            status = Status::Converged;
            true
        } else {
            false
        };
        last = Some(it);
        if done {
            break;
        }
    }
    let last = last.expect("max_iters >= 1");
    Ok(Trace {
        records,
        status,
        final_state: last.state,
        final_x: last.x,
        history,
        notes,
    })
}

pub fn solve_x<T: Real>(
    scheme: &SplittingScheme<T>,
    ops: &OperatorTuple<T>,
    z: &BlockVector<T>,
) -> Result<BlockVector<T>> {
    Splitting::new(scheme, ops)?.solve_x(z)
}

pub fn apply_t<T: Real>(
    scheme: &SplittingScheme<T>,
    ops: &OperatorTuple<T>,
    z: &BlockVector<T>,
) -> Result<(BlockVector<T>, BlockVector<T>)> {
    Splitting::new(scheme, ops)?.apply_t(z)
}

/// Iterates `z^{k+1} = T(z^k)` from `z0`.
pub fn iterate<T: Real>(
    scheme: &SplittingScheme<T>,
    ops: &OperatorTuple<T>,
    z0: BlockVector<T>,
    stop: StopRule<T>,
) -> Result<Trace<T>> {
    iterate_with(scheme, ops, z0, &RunOptions::new(stop))
}

pub fn iterate_with<T: Real>(
    scheme: &SplittingScheme<T>,
    ops: &OperatorTuple<T>,
    z0: BlockVector<T>,
    opts: &RunOptions<T>,
) -> Result<Trace<T>> {
    let sp = Splitting::new(scheme, ops)?;
    let it = sp.lifted(z0)?;
    run(&sp, it, opts)
}

/// Iterates the reduced form `x^k = J_F(v^k + N x^k)`,
/// `v^{k+1} = v^k − γ MᵀM x^k` from `v0`.
pub fn iterate_reduced<T: Real>(
    scheme: &SplittingScheme<T>,
    ops: &OperatorTuple<T>,
    v0: BlockVector<T>,
    stop: StopRule<T>,
) -> Result<Trace<T>> {
    iterate_reduced_with(scheme, ops, v0, &RunOptions::new(stop))
}

pub fn iterate_reduced_with<T: Real>(
    scheme: &SplittingScheme<T>,
    ops: &OperatorTuple<T>,
    v0: BlockVector<T>,
    opts: &RunOptions<T>,
) -> Result<Trace<T>> {
    let sp = Splitting::new(scheme, ops)?;
    let it = sp.reduced(v0)?;
    run(&sp, it, opts)
}

/// Blockwise mean of `x` and the largest distance of a block from it.
pub fn recover_solution<T: Real>(x: &BlockVector<T>) -> (Vec<T>, T) {
    let mean = x.block_mean();
    let residual = x
        .iter_blocks()
        .map(|b| distance(b, &mean))
        .fold(T::zero(), T::max);
    (mean, residual)
}

/// Builds a fixed point `z` of `T` from a zero `x_star` of `Σ F_i` and
/// certificates `v_i ∈ F_i(x_star)` with `Σ v_i = 0`. Returns the
/// minimal-norm least-squares solution of `S z = y − N x`, `y = v + x`.
pub fn embed_solution<T: Real>(
    scheme: &SplittingScheme<T>,
    ops: &OperatorTuple<T>,
    x_star: &[T],
    v_star: &[Vec<T>],
) -> Result<BlockVector<T>> {
    let sp = Splitting::new(scheme, ops)?;
    let (n, d) = (scheme.n(), ops.dim());
    if x_star.len() != d {
        return Err(Error::Shape(format!(
            "x_star has dimension {}, expected {d}",
            x_star.len()
        )));
    }
    let v = BlockVector::from_blocks(v_star)?;
    if v.blocks() != n || (n > 0 && v.dim() != d) {
        return Err(Error::Shape(format!(
            "expected {n} certificates of dimension {d}, got {} of dimension {}",
            v.blocks(),
            v.dim()
        )));
    }
    let tol = T::from_f64_lossy(EMBED_TOL);
    let scale = v
        .iter_blocks()
        .map(crate::numerics::norm)
        .fold(T::zero(), T::max);
    let vsum = crate::numerics::norm(&v.block_sum());
    if vsum > T::from_f64_lossy(1e-10) * (T::one() + scale) {
        return Err(Error::Contract(format!(
            "certificates must sum to zero, |Σ v_i| = {vsum}"
        )));
    }
    for (i, op) in ops.iter().enumerate() {
        if let Some(fx) = op.evaluate(x_star) {
            let gap = distance(&fx, v.block(i));
            if gap > tol * (T::one() + crate::numerics::norm(&fx)) {
                return Err(Error::Contract(format!(
                    "certificate {i} is not F_{i}(x_star): distance {gap}"
                )));
            }
        }
    }
    let x = BlockVector::repeated(x_star, n);
    let y = v.add(&x)?;
    let nx = kron_apply(scheme.n_matrix(), &x)?;
    let rhs = y.sub(&nx)?;
    let pinv = pseudo_inverse(sp.s_matrix(), crate::numerics::DEFAULT_RANK_TOL)?;
    let z = kron_apply(&pinv, &rhs)?;
    let residual = kron_apply(sp.s_matrix(), &z)?.sub(&rhs)?.norm();
    let allowed = tol * (T::one() + rhs.norm());
    if !(residual <= allowed) {
        return Err(Error::Embedding {
            residual: residual.to_f64_lossy(),
            tolerance: allowed.to_f64_lossy(),
        });
    }
    let (tz, _) = sp.apply_t(&z)?;
    let moved = tz.sub(&z)?.norm();
    let allowed = tol * (T::one() + z.norm());
    if !(moved <= allowed) {
        return Err(Error::Embedding {
            residual: moved.to_f64_lossy(),
            tolerance: allowed.to_f64_lossy(),
        });
    }
    Ok(z)
}

/// Certificates `v_i = F_i(x_star)` for `i < n` and `v_n = −Σ_{i<n} v_i`,
/// for tuples whose first `n − 1` members are single-valued.
pub fn certificates_by_evaluation<T: Real>(
    ops: &OperatorTuple<T>,
    x_star: &[T],
) -> Result<Vec<Vec<T>>> {
    let n = ops.len();
    let d = ops.dim();
    let mut v = Vec::with_capacity(n);
    let mut acc = vec![T::zero(); d];
    for (i, op) in ops.iter().take(n - 1).enumerate() {
        let fx = op.evaluate(x_star).ok_or_else(|| {
            Error::Unsupported(format!(
                "operator {i} ({}) is not single-valued",
                op.descriptor().kind()
            ))
        })?;
        for (a, &b) in acc.iter_mut().zip(&fx) {
            *a = *a + b;
        }
        v.push(fx);
    }
    v.push(acc.into_iter().map(|a| -a).collect());
    Ok(v)
}

/// Terms of the averagedness inequality
/// `‖Tz − Tz̄‖² + ((1−γ)/γ)‖(Id−T)z − (Id−T)z̄‖² + γ⟨Δx, (2I − MᵀM − N − Nᵀ)Δx⟩ ≤ ‖z − z̄‖²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AveragedCheck<T> {
    /// Sum of the three left-hand terms.
    pub lhs: T,
    pub rhs: T,
    /// `γ⟨Δx, (2I − MᵀM − N − Nᵀ)Δx⟩`, nonnegative for valid schemes.
    pub defect_term: T,
}

impl<T: Real> AveragedCheck<T> {
    pub fn slack(&self) -> T {
        self.rhs - self.lhs
    }

    pub fn holds(&self, tol: T) -> bool {
        self.lhs <= self.rhs + tol
    }
}

pub fn check_averaged_inequality<T: Real>(
    scheme: &SplittingScheme<T>,
    ops: &OperatorTuple<T>,
    z: &BlockVector<T>,
    z_bar: &BlockVector<T>,
) -> Result<AveragedCheck<T>> {
    let sp = Splitting::new(scheme, ops)?;
    let gamma = scheme.gamma();
    let (tz, x) = sp.apply_t(z)?;
    let (tzb, xb) = sp.apply_t(z_bar)?;
    let dt = tz.sub(&tzb)?;
    // (Id − T)z − (Id − T)z̄ = (z − z̄) − (Tz − Tz̄)
    let dz = z.sub(z_bar)?;
    let dr = dz.sub(&dt)?;
    let dx = x.sub(&xb)?;
    let neg_defect = scheme.defect().neg();
    let defect_term = gamma * dx.dot(&kron_apply(&neg_defect, &dx)?)?;
    let lhs = dt.norm_sq() + (T::one() - gamma) / gamma * dr.norm_sq() + defect_term;
    Ok(AveragedCheck {
        lhs,
        rhs: dz.norm_sq(),
        defect_term,
    })
}
