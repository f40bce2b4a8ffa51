//! Complex Hermitian programs and their real symmetric embedding
//! `H ↦ [[Re H, −Im H], [Im H, Re H]]`.

use nalgebra::DMatrix;

use super::{BlockSparse, SdpProblem, Sense};
use crate::error::{Error, Result};
use crate::linalg::{c, CMat, C64};

const HERMITIAN_TOL: f64 = 1e-12;

/// Hermitian block-diagonal matrix given by entries `(block, row, col, z)` with
/// `row <= col`; `z` sits at `(row, col)` and `conj(z)` at `(col, row)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HermitianSparse {
    entries: Vec<(usize, usize, usize, C64)>,
}

impl HermitianSparse {
    pub fn new() -> Self {
        HermitianSparse {
            entries: Vec::new(),
        }
    }

    /// Adds `z` at `(row, col)` and `conj(z)` at `(col, row)`. On the diagonal the
    /// imaginary part must vanish.
    pub fn push(&mut self, block: usize, row: usize, col: usize, z: C64) {
        if row <= col {
            self.entries.push((block, row, col, z));
        } else {
            self.entries.push((block, col, row, z.conj()));
        }
    }

    /// Upper triangle of a dense Hermitian matrix; entries with modulus below `drop` are skipped.
    pub fn from_dense(block: usize, m: &CMat, drop: f64) -> Result<Self> {
        let mut out = HermitianSparse::new();
        out.add_dense(block, m, 1.0, drop)?;
        Ok(out)
    }

    pub fn add_dense(&mut self, block: usize, m: &CMat, factor: f64, drop: f64) -> Result<()> {
        let defect = crate::linalg::hermiticity_defect(m);
        if defect > HERMITIAN_TOL * (1.0 + m.norm()) {
            return Err(Error::NotHermitian(defect));
        }
        for j in 0..m.ncols() {
            for i in 0..=j {
                let z = if i == j {
                    c(m[(i, i)].re, 0.0)
                } else {
                    0.5 * (m[(i, j)] + m[(j, i)].conj())
                };
                if z.norm() > drop {
                    self.entries.push((block, i, j, z * factor));
                }
            }
        }
        Ok(())
    }

    pub fn extend_scaled(&mut self, other: &HermitianSparse, factor: f64) {
        self.entries.extend(
            other
                .entries
                .iter()
                .map(|&(b, i, j, z)| (b, i, j, z * factor)),
        );
    }

    pub fn compress(&mut self) {
        self.entries
            .sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
        let mut out: Vec<(usize, usize, usize, C64)> = Vec::with_capacity(self.entries.len());
        for e in self.entries.drain(..) {
            match out.last_mut() {
                Some(last) if (last.0, last.1, last.2) == (e.0, e.1, e.2) => last.3 += e.3,
                _ => out.push(e),
            }
        }
        out.retain(|e| e.3.norm() != 0.0);
        self.entries = out;
    }

    pub fn entries(&self) -> &[(usize, usize, usize, C64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_dense(&self, blocks: &[usize]) -> Vec<CMat> {
        let mut out: Vec<CMat> = blocks.iter().map(|&n| CMat::zeros(n, n)).collect();
        for &(b, i, j, z) in &self.entries {
            out[b][(i, j)] += z;
            if i != j {
                out[b][(j, i)] += z.conj();
            }
        }
        out
    }

    /// `Σ_blocks Re tr(A X)`.
    pub fn dot(&self, x: &[CMat]) -> f64 {
        self.entries
            .iter()
            .map(|&(b, i, j, z)| {
                if i == j {
                    z.re * x[b][(i, i)].re
                } else {
                    // z X_ji + conj(z) X_ij
                    2.0 * (z * x[b][(j, i)]).re
                }
            })
            .sum()
    }

    fn check(&self, blocks: &[usize]) -> Result<()> {
        for &(b, i, j, z) in &self.entries {
            if b >= blocks.len() || j >= blocks[b] {
                return Err(Error::Dimension(format!(
                    "entry ({b}, {i}, {j}) outside blocks {blocks:?}"
                )));
            }
            if i == j && z.im.abs() > HERMITIAN_TOL * (1.0 + z.re.abs()) {
                return Err(Error::NotHermitian(z.im.abs()));
            }
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite(z.norm()));
            }
        }
        Ok(())
    }

    fn embed(&self, blocks: &[usize], factor: f64) -> BlockSparse {
        let mut out = BlockSparse::new();
        for &(b, i, j, z) in &self.entries {
            let n = blocks[b];
            let (a, bi) = (z.re * factor, z.im * factor);
            if a != 0.0 {
                out.push(b, i, j, a);
                out.push(b, i + n, j + n, a);
            }
            if i != j && bi != 0.0 {
                out.push(b, i, j + n, -bi);
                out.push(b, j, i + n, bi);
            }
        }
        out.compress();
        out
    }
}

/// Same pair as [`SdpProblem`] with Hermitian blocks and `Re tr` inner products.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianProblem {
    pub blocks: Vec<usize>,
    pub objective: HermitianSparse,
    pub constraints: Vec<(HermitianSparse, f64)>,
    pub sense: Sense,
}

impl HermitianProblem {
    pub fn new(blocks: Vec<usize>, sense: Sense) -> Self {
        HermitianProblem {
            blocks,
            objective: HermitianSparse::new(),
            constraints: Vec::new(),
            sense,
        }
    }
}

/// Real embedding with the objective and constraint data halved, so that the
/// real program has the same optimal value and the same dual vector.
pub fn embed_complex(problem: &HermitianProblem) -> Result<SdpProblem> {
    problem.objective.check(&problem.blocks)?;
    for (a, _) in &problem.constraints {
        a.check(&problem.blocks)?;
    }
    let blocks: Vec<usize> = problem.blocks.iter().map(|n| 2 * n).collect();
    let mut out = SdpProblem::new(blocks, problem.sense);
    out.objective = problem.objective.embed(&problem.blocks, 0.5);
    for (a, b) in &problem.constraints {
        out.add_constraint(a.embed(&problem.blocks, 0.5), *b);
    }
    Ok(out)
}

/// Recovers the Hermitian matrix from a (possibly unstructured) real embedding by
/// averaging the two copies.
pub fn extract_hermitian(x: &DMatrix<f64>) -> CMat {
    let n = x.nrows() / 2;
    CMat::from_fn(n, n, |i, j| {
        let re = 0.5 * (x[(i, j)] + x[(i + n, j + n)]);
        let im = 0.5 * (x[(i + n, j)] - x[(i, j + n)]);
        c(re, im)
    })
}
