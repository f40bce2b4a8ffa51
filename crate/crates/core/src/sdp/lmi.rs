//! Linear matrix inequalities over free real variables and Hermitian matrix
//! variables, solved as the dual side of the standard pair.
//!
//! A problem reads `max/min c·y  s.t.  F_0 + Σ y_k F_k ⪰ 0` (one Hermitian block per
//! inequality) and `G y = h`. The equalities are eliminated by a reduced row
//! echelon form before solving, which keeps the remaining data sparse.

use super::complex::{embed_complex, extract_hermitian, HermitianProblem, HermitianSparse};
use super::{solve, SdpSettings, SdpSolution, SdpStatus, Sense};
use crate::error::{Error, Result};
use crate::linalg::{c, CMat};

const PIVOT_TOL: f64 = 1e-12;
const DROP_TOL: f64 = 1e-14;

/// A matrix variable backed by consecutive real variables.
///
/// Hermitian `n × n`: `n²` parameters, for each `i <= j` (column-major over the
/// upper triangle) the diagonal entry or the real and imaginary parts of `(i, j)`.
/// General `r × c`: `2rc` parameters, real and imaginary part of each entry in
/// column-major order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixVar {
    offset: usize,
    rows: usize,
    cols: usize,
    hermitian: bool,
}

impl MatrixVar {
    pub fn dim(&self) -> usize {
        self.rows
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn param_count(&self) -> usize {
        if self.hermitian {
            self.rows * self.rows
        } else {
            2 * self.rows * self.cols
        }
    }

    /// `(row, col, imaginary)` for each parameter.
    fn basis(&self) -> Vec<(usize, usize, bool)> {
        let mut out = Vec::with_capacity(self.param_count());
        if self.hermitian {
            for j in 0..self.rows {
                for i in 0..=j {
                    out.push((i, j, false));
                    if i != j {
                        out.push((i, j, true));
                    }
                }
            }
        } else {
            for j in 0..self.cols {
                for i in 0..self.rows {
                    out.push((i, j, false));
                    out.push((i, j, true));
                }
            }
        }
        out
    }

    fn basis_matrix(&self, i: usize, j: usize, imag: bool) -> CMat {
        let mut m = CMat::zeros(self.rows, self.cols);
        let z = if imag { c(0.0, 1.0) } else { c(1.0, 0.0) };
        m[(i, j)] = z;
        if self.hermitian && i != j {
            m[(j, i)] = z.conj();
        }
        m
    }

    /// Variable index of the diagonal entry `(i, i)` of a Hermitian variable;
    /// column `j` of the upper triangle starts after `j²` parameters.
    pub fn diag_index(&self, i: usize) -> usize {
        debug_assert!(self.hermitian);
        self.offset + i * i + 2 * i
    }

    pub fn value(&self, y: &[f64]) -> CMat {
        let mut m = CMat::zeros(self.rows, self.cols);
        for (k, (i, j, imag)) in self.basis().into_iter().enumerate() {
            m += self.basis_matrix(i, j, imag) * c(y[self.offset + k], 0.0);
        }
        m
    }
}

#[derive(Clone, Debug)]
pub struct LmiSolution {
    /// Objective `c·y` at the returned point.
    pub value: f64,
    /// Value of the companion (primal) program; brackets `value` within `gap`.
    pub bound: f64,
    pub variables: Vec<f64>,
    pub status: SdpStatus,
    pub gap: f64,
    pub iterations: usize,
    pub sdp: SdpSolution,
}

impl LmiSolution {
    pub fn matrix(&self, var: &MatrixVar) -> CMat {
        var.value(&self.variables)
    }

    pub fn scalar(&self, var: usize) -> f64 {
        self.variables[var]
    }

    /// Dual multiplier (PSD matrix) attached to inequality block `block`.
    pub fn multiplier(&self, block: usize) -> CMat {
        extract_hermitian(&self.sdp.x[block])
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }
}

#[derive(Clone, Debug, Default)]
pub struct LmiBuilder {
    blocks: Vec<usize>,
    constant: HermitianSparse,
    terms: Vec<HermitianSparse>,
    objective: Vec<f64>,
    equalities: Vec<(Vec<(usize, f64)>, f64)>,
    maximize: bool,
}

impl LmiBuilder {
    pub fn new() -> Self {
        LmiBuilder {
            maximize: true,
            ..Default::default()
        }
    }

    pub fn maximize(&mut self) {
        self.maximize = true;
    }

    pub fn minimize(&mut self) {
        self.maximize = false;
    }

    pub fn variable_count(&self) -> usize {
        self.terms.len()
    }

    pub fn scalar(&mut self) -> usize {
        self.terms.push(HermitianSparse::new());
        self.objective.push(0.0);
        self.terms.len() - 1
    }

    pub fn hermitian(&mut self, dim: usize) -> MatrixVar {
        self.matrix(dim, dim, true)
    }

    /// Unconstrained complex `rows × cols` matrix.
    pub fn general(&mut self, rows: usize, cols: usize) -> MatrixVar {
        self.matrix(rows, cols, false)
    }

    fn matrix(&mut self, rows: usize, cols: usize, hermitian: bool) -> MatrixVar {
        let var = MatrixVar {
            offset: self.terms.len(),
            rows,
            cols,
            hermitian,
        };
        for _ in 0..var.param_count() {
            self.scalar();
        }
        var
    }

    /// New inequality block `F(y) ⪰ 0` of size `dim`.
    pub fn block(&mut self, dim: usize) -> usize {
        self.blocks.push(dim);
        self.blocks.len() - 1
    }

    pub fn add_constant(&mut self, block: usize, m: &CMat) -> Result<()> {
        self.check_block(block, m)?;
        self.constant.add_dense(block, m, 1.0, DROP_TOL)
    }

    /// `F_block += y_var · m`.
    pub fn add_scalar_term(&mut self, block: usize, var: usize, m: &CMat) -> Result<()> {
        self.check_block(block, m)?;
        self.terms[var].add_dense(block, m, 1.0, DROP_TOL)
    }

    /// `F_block += map(V)` for a real-linear `map` with Hermitian output.
    pub fn add_map(
        &mut self,
        block: usize,
        var: &MatrixVar,
        map: impl Fn(&CMat) -> CMat,
    ) -> Result<()> {
        for (k, (i, j, imag)) in var.basis().into_iter().enumerate() {
            let image = map(&var.basis_matrix(i, j, imag));
            self.check_block(block, &image)?;
            self.terms[var.offset + k].add_dense(block, &image, 1.0, DROP_TOL)?;
        }
        Ok(())
    }

    pub fn add_objective(&mut self, var: usize, coef: f64) {
        self.objective[var] += coef;
    }

    /// Objective term `Re tr(M V)`.
    pub fn add_objective_trace(&mut self, var: &MatrixVar, m: &CMat) {
        for (k, (i, j, imag)) in var.basis().into_iter().enumerate() {
            let b = var.basis_matrix(i, j, imag);
            self.objective[var.offset + k] += (m * b).trace().re;
        }
    }

    pub fn add_equality(&mut self, terms: Vec<(usize, f64)>, rhs: f64) {
        self.equalities.push((terms, rhs));
    }

    /// `Re tr(M V) = rhs`.
    pub fn add_trace_equality(&mut self, var: &MatrixVar, m: &CMat, rhs: f64) {
        let mut terms = Vec::new();
        for (k, (i, j, imag)) in var.basis().into_iter().enumerate() {
            let v = (m * var.basis_matrix(i, j, imag)).trace().re;
            if v.abs() > DROP_TOL {
                terms.push((var.offset + k, v));
            }
        }
        self.add_equality(terms, rhs);
    }

    /// Entrywise `map(V) = target` for a real-linear map with Hermitian output (one
    /// equality per real parameter of the target).
    pub fn add_map_equality(
        &mut self,
        var: &MatrixVar,
        map: impl Fn(&CMat) -> CMat,
        target: &CMat,
    ) {
        let images: Vec<CMat> = var
            .basis()
            .into_iter()
            .map(|(i, j, imag)| map(&var.basis_matrix(i, j, imag)))
            .collect();
        let n = target.nrows();
        for col in 0..n {
            for row in 0..=col {
                let parts: &[bool] = if row == col { &[false] } else { &[false, true] };
                for &imag in parts {
                    let pick = |z: crate::linalg::C64| if imag { z.im } else { z.re };
                    let terms: Vec<(usize, f64)> = images
                        .iter()
                        .enumerate()
                        .map(|(k, img)| (var.offset + k, pick(img[(row, col)])))
                        .filter(|(_, v)| v.abs() > DROP_TOL)
                        .collect();
                    self.add_equality(terms, pick(target[(row, col)]));
                }
            }
        }
    }

    fn check_block(&self, block: usize, m: &CMat) -> Result<()> {
        match self.blocks.get(block) {
            Some(&n) if n == m.nrows() && n == m.ncols() => Ok(()),
            Some(&n) => Err(Error::Dimension(format!(
                "block {block} has size {n}, got {}×{}",
                m.nrows(),
                m.ncols()
            ))),
            None => Err(Error::Dimension(format!("no block {block}"))),
        }
    }

    /// Returns `(y0, columns)` with `y = y0 + Σ_f w_f · columns[f]` describing the
    /// affine solution set of the equalities; each column is sparse.
    fn eliminate(&self) -> Result<(Vec<f64>, Vec<Vec<(usize, f64)>>)> {
        let nv = self.terms.len();
        let mut rows: Vec<Vec<f64>> = self
            .equalities
            .iter()
            .map(|(terms, rhs)| {
                let mut r = vec![0.0; nv + 1];
                for &(k, v) in terms {
                    r[k] += v;
                }
                r[nv] = *rhs;
                r
            })
            .collect();
        let mut pivots: Vec<usize> = Vec::new();
        let mut rank = 0;
        for col in 0..nv {
            if rank == rows.len() {
                break;
            }
            let (best, size) = (rank..rows.len())
                .map(|r| (r, rows[r][col].abs()))
                .fold((rank, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if size <= PIVOT_TOL {
                continue;
            }
            rows.swap(rank, best);
            let p = rows[rank][col];
            for v in rows[rank].iter_mut() {
                *v /= p;
            }
            let pivot_row = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row[col] != 0.0 {
                    let f = row[col];
                    for (v, pv) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                    row[col] = 0.0;
                }
            }
            pivots.push(col);
            rank += 1;
        }
        for row in &rows[rank..] {
            if row[nv].abs() > 1e-9 {
                return Err(Error::InvalidParameter(
                    "inconsistent equality constraints".into(),
                ));
            }
        }
        let mut y0 = vec![0.0; nv];
        let mut is_pivot = vec![None; nv];
        for (r, &p) in pivots.iter().enumerate() {
            y0[p] = rows[r][nv];
            is_pivot[p] = Some(r);
        }
        let mut columns = Vec::new();
        for f in 0..nv {
            if is_pivot[f].is_some() {
                continue;
            }
            let mut col = vec![(f, 1.0)];
            for (r, &p) in pivots.iter().enumerate() {
                let v = rows[r][f];
                if v.abs() > DROP_TOL {
                    col.push((p, -v));
                }
            }
            columns.push(col);
        }
        Ok((y0, columns))
    }

    pub fn solve(&self, settings: &SdpSettings) -> Result<LmiSolution> {
        if self.blocks.is_empty() {
            return Err(Error::Dimension("no inequality blocks".into()));
        }
        let (y0, columns) = self.eliminate()?;
        let sign = if self.maximize { 1.0 } else { -1.0 };

        // S(w) = [F0 + Σ y0_k F_k] + Σ_f w_f G_f, with G_f = Σ_k N_kf F_k.
        // Standard dual form S = C − Σ w_f A_f uses A_f = −G_f.
        let mut constant = self.constant.clone();
        for (k, v) in y0.iter().enumerate() {
            if *v != 0.0 {
                constant.extend_scaled(&self.terms[k], *v);
            }
        }
        constant.compress();
        let mut problem = HermitianProblem::new(self.blocks.clone(), Sense::Min);
        problem.objective = constant;
        for col in &columns {
            let mut a = HermitianSparse::new();
            let mut b = 0.0;
            for &(k, v) in col {
                a.extend_scaled(&self.terms[k], -v);
                b += v * self.objective[k];
            }
            a.compress();
            problem.constraints.push((a, sign * b));
        }
        let offset: f64 = y0.iter().zip(&self.objective).map(|(a, b)| a * b).sum();

        let real = embed_complex(&problem)?;
        let sol = solve(&real, settings)?;
        let mut y = y0;
        for (col, w) in columns.iter().zip(sol.y.iter()) {
            for &(k, v) in col {
                y[k] += v * w;
            }
        }
        let value: f64 = y.iter().zip(&self.objective).map(|(a, b)| a * b).sum();
        Ok(LmiSolution {
            value,
            bound: offset + sign * sol.primal_obj,
            variables: y,
            status: sol.status,
            gap: sol.gap,
            iterations: sol.iterations,
            sdp: sol,
        })
    }
}
