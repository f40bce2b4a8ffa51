//! HKM-direction infeasible primal-dual path following with Mehrotra's
//! predictor-corrector. The Schur complement is assembled from the sparse
//! constraint data and factored with a dense Cholesky.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};

use super::{zero_blocks, SdpProblem, SdpSettings, SdpSolution, SdpStatus, Sense};
use crate::error::{Error, Result};

const REFINEMENTS: usize = 2;

/// Constraint entries expanded to full `(row, col, value)` triples, grouped by block.
struct Structure {
    per_block: Vec<Vec<(usize, Vec<(usize, usize, f64)>)>>,
}

impl Structure {
    fn new(problem: &SdpProblem) -> Self {
        let mut per_block: Vec<Vec<(usize, Vec<(usize, usize, f64)>)>> =
            vec![Vec::new(); problem.blocks.len()];
        for (k, (a, _)) in problem.constraints.iter().enumerate() {
            for &(b, i, j, v) in a.entries() {
                let list = &mut per_block[b];
                if list.last().map(|(kk, _)| *kk) != Some(k) {
                    list.push((k, Vec::new()));
                }
                let ents = &mut list.last_mut().unwrap().1;
                ents.push((i, j, v));
                if i != j {
                    ents.push((j, i, v));
                }
            }
        }
        Structure { per_block }
    }

    fn block_norm(&self, block: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.per_block[block]
            .iter()
            .map(|(k, ents)| (*k, ents.iter().map(|e| e.2 * e.2).sum::<f64>().sqrt()))
    }
}

fn inner(x: &[DMatrix<f64>], s: &[DMatrix<f64>]) -> f64 {
    x.iter().zip(s).map(|(a, b)| a.dot(b)).sum()
}

fn frob(x: &[DMatrix<f64>]) -> f64 {
    x.iter().map(|a| a.norm_squared()).sum::<f64>().sqrt()
}

fn apply_a(problem: &SdpProblem, z: &[DMatrix<f64>]) -> DVector<f64> {
    DVector::from_iterator(
        problem.constraints.len(),
        problem.constraints.iter().map(|(a, _)| a.dot(z)),
    )
}

fn apply_adjoint(problem: &SdpProblem, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
    let mut out = zero_blocks(&problem.blocks);
    for ((a, _), yk) in problem.constraints.iter().zip(y.iter()) {
        a.add_to(&mut out, *yk);
    }
    out
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest `α` with `X + αΔ ⪰ 0` (infinite when `Δ ⪰ 0`).
fn max_step(x: &[DMatrix<f64>], dx: &[DMatrix<f64>]) -> Result<f64> {
    let mut alpha = f64::INFINITY;
    for (xb, db) in x.iter().zip(dx) {
        let chol = xb
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Solver("iterate left the cone interior".into()))?;
        let l = chol.l();
        let half = l
            .solve_lower_triangular(db)
            .ok_or_else(|| Error::Solver("singular factor".into()))?;
        let full = l
            .solve_lower_triangular(&half.transpose())
            .ok_or_else(|| Error::Solver("singular factor".into()))?;
        let lmin = symmetrize(&full)
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if lmin < 0.0 {
            alpha = alpha.min(-1.0 / lmin);
        }
    }
    Ok(alpha)
}

fn inverse_spd(s: &[DMatrix<f64>]) -> Result<Vec<DMatrix<f64>>> {
    s.iter()
        .map(|sb| {
            sb.clone()
                .cholesky()
                .map(|c| symmetrize(&c.inverse()))
                .ok_or_else(|| Error::Solver("dual slack lost positive definiteness".into()))
        })
        .collect()
}

/// `M_ij = <A_i, X A_j S⁻¹>`, symmetric positive definite for independent `A_i`.
fn schur(structure: &Structure, x: &[DMatrix<f64>], t: &[DMatrix<f64>], m: usize) -> Mat<f64> {
    let mut mat = Mat::<f64>::zeros(m, m);
    for (b, list) in structure.per_block.iter().enumerate() {
        let n = x[b].nrows();
        let mut w = DMatrix::<f64>::zeros(n, n);
        for (idx, (i, ents_i)) in list.iter().enumerate() {
            // W = T A_i X, so tr(A_i X A_j T) = Σ A_j[r, s] W[s, r]
            w.fill(0.0);
            for &(p, q, a) in ents_i {
                w.ger(a, &t[b].column(p), &x[b].column(q), 1.0);
            }
            for (j, ents_j) in &list[idx..] {
                let v: f64 = ents_j.iter().map(|&(r, s, c)| c * w[(s, r)]).sum();
                mat[(*i, *j)] += v;
            }
        }
    }
    for i in 0..m {
        for j in (i + 1)..m {
            mat[(j, i)] = mat[(i, j)];
        }
    }
    mat
}

struct Factored {
    mat: Mat<f64>,
    llt: faer::linalg::solvers::Llt<f64>,
}

impl Factored {
    fn new(mut mat: Mat<f64>) -> Result<Self> {
        let m = mat.nrows();
        let scale = (0..m)
            .map(|i| mat[(i, i)].abs())
            .fold(0.0, f64::max)
            .max(1e-300);
        let mut added = 0.0;
        for ridge in [0.0, 1e-14, 1e-12, 1e-10, 1e-8] {
            let target = ridge * scale;
            for i in 0..m {
                mat[(i, i)] += target - added;
            }
            added = target;
            if let Ok(llt) = mat.llt(Side::Lower) {
                for i in 0..m {
                    mat[(i, i)] -= added;
                }
                return Ok(Factored { mat, llt });
            }
        }
        Err(Error::Solver(
            "Schur complement is not positive definite".into(),
        ))
    }

    /// Solves with two rounds of iterative refinement against the unridged matrix.
    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let r = Mat::<f64>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        let mut sol = self.llt.solve(&r);
        for _ in 0..REFINEMENTS {
            let residual = &r - &self.mat * &sol;
            sol += self.llt.solve(&residual);
        }
        DVector::from_fn(rhs.len(), |i, _| sol[(i, 0)])
    }
}

struct Direction {
    dx: Vec<DMatrix<f64>>,
    dy: DVector<f64>,
    ds: Vec<DMatrix<f64>>,
}

#[allow(clippy::too_many_arguments)]
fn direction(
    problem: &SdpProblem,
    factored: &Factored,
    x: &[DMatrix<f64>],
    t: &[DMatrix<f64>],
    rp: &DVector<f64>,
    rd: &[DMatrix<f64>],
    target: f64,
    corr: Option<&[DMatrix<f64>]>,
) -> Direction {
    // R = σμ S⁻¹ − X − X Rd S⁻¹ − corr
    let mut big_r: Vec<DMatrix<f64>> = x
        .iter()
        .zip(t)
        .zip(rd)
        .map(|((xb, tb), rb)| tb * target - xb - xb * rb * tb)
        .collect();
    if let Some(c) = corr {
        for (rb, cb) in big_r.iter_mut().zip(c) {
            *rb -= cb;
        }
    }
    let rhs = rp - apply_a(problem, &big_r);
    let dy = factored.solve(&rhs);
    let aty = apply_adjoint(problem, &dy);
    let ds: Vec<DMatrix<f64>> = rd.iter().zip(&aty).map(|(r, a)| r - a).collect();
    let dx: Vec<DMatrix<f64>> = x
        .iter()
        .zip(t)
        .zip(&ds)
        .enumerate()
        .map(|(k, ((xb, tb), dsb))| {
            let mut d = tb * target - xb - xb * dsb * tb;
            if let Some(c) = corr {
                d -= &c[k];
            }
            symmetrize(&d)
        })
        .collect();
    Direction { dx, dy, ds }
}

/// One predictor-corrector step; the iterate is only updated on success.
#[allow(clippy::too_many_arguments)]
fn newton_step(
    problem: &SdpProblem,
    structure: &Structure,
    settings: &SdpSettings,
    x: &mut [DMatrix<f64>],
    y: &mut DVector<f64>,
    s: &mut [DMatrix<f64>],
    rp: &DVector<f64>,
    rd: &[DMatrix<f64>],
    mu: f64,
) -> Result<(f64, f64)> {
    let n_total = x.iter().map(|b| b.nrows()).sum::<usize>() as f64;
    let m = problem.constraints.len();
    let t = inverse_spd(s)?;
    let factored = Factored::new(schur(structure, x, &t, m))?;

    let pred = direction(problem, &factored, x, &t, rp, rd, 0.0, None);
    let ap = (settings.step_fraction * max_step(x, &pred.dx)?).min(1.0);
    let ad = (settings.step_fraction * max_step(s, &pred.ds)?).min(1.0);
    let x_aff: Vec<DMatrix<f64>> = x.iter().zip(&pred.dx).map(|(a, d)| a + d * ap).collect();
    let s_aff: Vec<DMatrix<f64>> = s.iter().zip(&pred.ds).map(|(a, d)| a + d * ad).collect();
    let mu_aff = inner(&x_aff, &s_aff) / n_total;
    let expon = (3.0 * ap.min(ad).powi(2)).max(1.0);
    let sigma = (mu_aff / mu).max(0.0).powf(expon).min(1.0);

    let corr: Vec<DMatrix<f64>> = pred
        .dx
        .iter()
        .zip(&pred.ds)
        .zip(&t)
        .map(|((dxb, dsb), tb)| dxb * dsb * tb)
        .collect();
    let dir = direction(problem, &factored, x, &t, rp, rd, sigma * mu, Some(&corr));
    let ap = (settings.step_fraction * max_step(x, &dir.dx)?).min(1.0);
    let ad = (settings.step_fraction * max_step(s, &dir.ds)?).min(1.0);
    for (xb, d) in x.iter_mut().zip(&dir.dx) {
        *xb += d * ap;
        *xb = symmetrize(xb);
    }
    for (sb, d) in s.iter_mut().zip(&dir.ds) {
        *sb += d * ad;
        *sb = symmetrize(sb);
    }
    *y += &dir.dy * ad;
    Ok((ap, ad))
}

/// Solves the block SDP pair. Errors are reserved for invalid input and numerical
/// breakdown of the Newton system; infeasibility and iteration limits are statuses.
pub fn solve(problem: &SdpProblem, settings: &SdpSettings) -> Result<SdpSolution> {
    problem.validate()?;
    let sign = match problem.sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    let blocks = &problem.blocks;
    let m = problem.constraints.len();
    let n_total = problem.total_dim() as f64;
    let c: Vec<DMatrix<f64>> = problem
        .objective
        .to_dense(blocks)
        .into_iter()
        .map(|b| b * sign)
        .collect();
    let b = DVector::from_iterator(m, problem.constraints.iter().map(|(_, v)| *v));
    let structure = Structure::new(problem);
    let b_norm = b.norm();
    let c_norm = frob(&c);

    let mut x = zero_blocks(blocks);
    let mut s = zero_blocks(blocks);
    for (k, &nb) in blocks.iter().enumerate() {
        let rn = (nb as f64).sqrt();
        let mut xi = 10f64.max(rn);
        let mut eta = 10f64.max(rn).max(c[k].norm());
        for (idx, a_norm) in structure.block_norm(k) {
            xi = xi.max(rn * (1.0 + b[idx].abs()) / (1.0 + a_norm));
            eta = eta.max(a_norm);
        }
        x[k] = DMatrix::identity(nb, nb) * xi;
        s[k] = DMatrix::identity(nb, nb) * eta;
    }
    let mut y = DVector::zeros(m);

    let mut status = SdpStatus::MaxIters;
    let mut iterations = 0;
    let mut stalled = 0;
    for it in 0..settings.max_iters {
        iterations = it;
        let rp = &b - apply_a(problem, &x);
        let aty = apply_adjoint(problem, &y);
        let rd: Vec<DMatrix<f64>> = c
            .iter()
            .zip(&s)
            .zip(&aty)
            .map(|((cb, sb), ab)| cb - sb - ab)
            .collect();
        let pobj = inner(&c, &x);
        let dobj = b.dot(&y);
        let xs = inner(&x, &s);
        let gap = (pobj - dobj).abs().max(xs);
        let pinf = rp.norm() / (1.0 + b_norm);
        let dinf = frob(&rd) / (1.0 + c_norm);
        if gap <= settings.tol * (1.0 + pobj.abs()) && pinf <= settings.tol && dinf <= settings.tol
        {
            status = SdpStatus::Optimal;
            break;
        }
        if frob(&x) > settings.divergence
            || y.norm() > settings.divergence
            || frob(&s) > settings.divergence
        {
            status = SdpStatus::Infeasible;
            break;
        }
        if stalled >= 5 {
            break;
        }
        let mu = xs / n_total;
        let (ap, ad) = match newton_step(
            problem, &structure, settings, &mut x, &mut y, &mut s, &rp, &rd, mu,
        ) {
            Ok(steps) => steps,
            // A breakdown after progress keeps the last iterate; the status stays MaxIters.
            Err(_) if it > 0 => break,
            Err(e) => return Err(e),
        };
        if ap.max(ad) < 1e-10 {
            stalled += 1;
        } else {
            stalled = 0;
        }
        iterations = it + 1;
    }

    let pobj = inner(&c, &x);
    let dobj = b.dot(&y);
    let xs = inner(&x, &s);
    Ok(SdpSolution {
        primal_obj: sign * pobj,
        dual_obj: sign * dobj,
        gap: (pobj - dobj).abs().max(xs),
        x,
        y: y * sign,
        s,
        status,
        iterations,
    })
}
