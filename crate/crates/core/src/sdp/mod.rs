//! Dense primal-dual interior-point solver for small block-diagonal SDPs.
//!
//! Standard pair, over real symmetric blocks:
//!
//! ```text
//! (P) min <C, X>  s.t. <A_i, X> = b_i,  X ⪰ 0
//! (D) max b·y     s.t. S = C − Σ y_i A_i ⪰ 0
//! ```
//!
//! With `Sense::Max` the primal maximizes `<C, X>`; the reported dual vector then
//! satisfies `S = Σ y_i A_i − C ⪰ 0` and the dual minimizes `b·y`.

mod complex;
mod lmi;
mod solver;

pub use complex::{embed_complex, extract_hermitian, HermitianProblem, HermitianSparse};
pub use lmi::{LmiBuilder, LmiSolution, MatrixVar};
pub use solver::solve;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Symmetric block-diagonal matrix given by its upper-triangular entries
/// `(block, row, col, value)` with `row <= col`; `value` sits at both `(row, col)`
/// and `(col, row)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BlockSparse {
    entries: Vec<(usize, usize, usize, f64)>,
}

impl BlockSparse {
    pub fn new() -> Self {
        BlockSparse {
            entries: Vec::new(),
        }
    }

    /// Adds `value` at `(row, col)` and its mirror. Repeated positions accumulate.
    pub fn push(&mut self, block: usize, row: usize, col: usize, value: f64) {
        let (i, j) = if row <= col { (row, col) } else { (col, row) };
        self.entries.push((block, i, j, value));
    }

    /// Sorts entries, merges duplicates and drops exact zeros.
    pub fn compress(&mut self) {
        self.entries
            .sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
        let mut out: Vec<(usize, usize, usize, f64)> = Vec::with_capacity(self.entries.len());
        for e in self.entries.drain(..) {
            match out.last_mut() {
                Some(last) if (last.0, last.1, last.2) == (e.0, e.1, e.2) => last.3 += e.3,
                _ => out.push(e),
            }
        }
        out.retain(|e| e.3 != 0.0);
        self.entries = out;
    }

    pub fn entries(&self) -> &[(usize, usize, usize, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        BlockSparse {
            entries: self
                .entries
                .iter()
                .map(|&(b, i, j, v)| (b, i, j, v * factor))
                .collect(),
        }
    }

    /// Trace inner product with a block-diagonal matrix.
    pub fn dot(&self, x: &[DMatrix<f64>]) -> f64 {
        self.entries
            .iter()
            .map(|&(b, i, j, v)| {
                if i == j {
                    v * x[b][(i, j)]
                } else {
                    v * (x[b][(i, j)] + x[b][(j, i)])
                }
            })
            .sum()
    }

    pub fn add_to(&self, x: &mut [DMatrix<f64>], factor: f64) {
        for &(b, i, j, v) in &self.entries {
            x[b][(i, j)] += factor * v;
            if i != j {
                x[b][(j, i)] += factor * v;
            }
        }
    }

    pub fn to_dense(&self, blocks: &[usize]) -> Vec<DMatrix<f64>> {
        let mut out = zero_blocks(blocks);
        self.add_to(&mut out, 1.0);
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, i, j, v)| if i == j { v * v } else { 2.0 * v * v })
            .sum::<f64>()
            .sqrt()
    }

    fn check(&self, blocks: &[usize]) -> Result<()> {
        for &(b, _, j, v) in &self.entries {
            if b >= blocks.len() || j >= blocks[b] {
                return Err(Error::Dimension(format!(
                    "entry ({b}, _, {j}) outside block structure {blocks:?}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite(v));
            }
        }
        Ok(())
    }
}

pub fn zero_blocks(blocks: &[usize]) -> Vec<DMatrix<f64>> {
    blocks.iter().map(|&n| DMatrix::zeros(n, n)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem {
    pub blocks: Vec<usize>,
    pub objective: BlockSparse,
    pub constraints: Vec<(BlockSparse, f64)>,
    pub sense: Sense,
}

impl SdpProblem {
    pub fn new(blocks: Vec<usize>, sense: Sense) -> Self {
        SdpProblem {
            blocks,
            objective: BlockSparse::new(),
            constraints: Vec::new(),
            sense,
        }
    }

    pub fn add_constraint(&mut self, a: BlockSparse, b: f64) {
        self.constraints.push((a, b));
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() || self.blocks.contains(&0) {
            return Err(Error::Dimension(
                "blocks must be nonempty with positive sizes".into(),
            ));
        }
        let n = self.total_dim();
        if self.constraints.len() > n * n {
            return Err(Error::Dimension(format!(
                "{} constraints exceed {}",
                self.constraints.len(),
                n * n
            )));
        }
        self.objective.check(&self.blocks)?;
        for (a, b) in &self.constraints {
            a.check(&self.blocks)?;
            if !b.is_finite() {
                return Err(Error::NonFinite(*b));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpSettings {
    pub max_iters: usize,
    /// Relative tolerance on the gap and on both residuals.
    pub tol: f64,
    /// Iterate norm beyond which the problem is declared infeasible.
    pub divergence: f64,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
}

impl Default for SdpSettings {
    fn default() -> Self {
        SdpSettings {
            max_iters: 200,
            tol: 1e-8,
            divergence: 1e12,
            step_fraction: 0.95,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    /// Primal or dual iterates diverged; the other side has no feasible point.
    Infeasible,
    /// Iteration budget exhausted or progress stalled before reaching the tolerance.
    MaxIters,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub x: Vec<DMatrix<f64>>,
    pub y: DVector<f64>,
    pub s: Vec<DMatrix<f64>>,
    pub primal_obj: f64,
    pub dual_obj: f64,
    /// `max(|primal_obj − dual_obj|, <X, S>)`.
    pub gap: f64,
    pub status: SdpStatus,
    pub iterations: usize,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    /// `‖A(X) − b‖₂`.
    pub primal_residual: f64,
    /// `‖C − A*(y) − S‖_F` (sign-adjusted for maximization).
    pub dual_residual: f64,
    pub complementarity: f64,
    /// `max(0, −λ_min(X_k))` over blocks.
    pub primal_cone_violation: f64,
    pub dual_cone_violation: f64,
}

impl ResidualReport {
    pub fn max_residual(&self) -> f64 {
        self.primal_residual
            .max(self.dual_residual)
            .max(self.complementarity.abs())
            .max(self.primal_cone_violation)
            .max(self.dual_cone_violation)
    }
}

fn min_eig_sym(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn verify_solution(problem: &SdpProblem, sol: &SdpSolution) -> ResidualReport {
    let primal_residual = problem
        .constraints
        .iter()
        .map(|(a, b)| (a.dot(&sol.x) - b).powi(2))
        .sum::<f64>()
        .sqrt();
    // min: C − Σ y A − S; max: Σ y A − C − S
    let sign = match problem.sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    let mut r = zero_blocks(&problem.blocks);
    problem.objective.add_to(&mut r, sign);
    for ((a, _), y) in problem.constraints.iter().zip(sol.y.iter()) {
        a.add_to(&mut r, -sign * y);
    }
    let dual_residual = r
        .iter()
        .zip(&sol.s)
        .map(|(ri, si)| (ri - si).norm_squared())
        .sum::<f64>()
        .sqrt();
    let complementarity = sol.x.iter().zip(&sol.s).map(|(x, s)| x.dot(s)).sum();
    let cone = |blocks: &[DMatrix<f64>]| {
        blocks
            .iter()
            .map(|m| (-min_eig_sym(m)).max(0.0))
            .fold(0.0, f64::max)
    };
    ResidualReport {
        primal_residual,
        dual_residual,
        complementarity,
        primal_cone_violation: cone(&sol.x),
        dual_cone_violation: cone(&sol.s),
    }
}
