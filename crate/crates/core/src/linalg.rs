//! Dense complex matrix kernel.
//!
//! Composite spaces use the row-major Kronecker convention: the basis state
//! `|i_1 ... i_k>` sits at index `((i_1 d_2 + i_2) d_3 + ...) + i_k`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Eigenvalues below this magnitude count as exact zeros.
pub const EIG_CUTOFF: f64 = 1e-12;

const HERMITIAN_TOL: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn ket(dim: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(dim);
    v[i] = r(1.0);
    v
}

/// `|v><v|`
pub fn dyad(v: &CVec) -> CMat {
    v * v.adjoint()
}

/// `|i><i|` in dimension `dim`.
pub fn projector(dim: usize, i: usize) -> CMat {
    let mut m = CMat::zeros(dim, dim);
    m[(i, i)] = r(1.0);
    m
}

pub fn diag_real(values: &[f64]) -> CMat {
    let n = values.len();
    CMat::from_fn(n, n, |i, j| if i == j { r(values[i]) } else { r(0.0) })
}

pub fn trace(a: &CMat) -> C64 {
    a.trace()
}

/// Hilbert-Schmidt inner product `tr(A† B)`.
pub fn hs_inner(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Real part of `tr(A B)` for Hermitian `A`, `B`.
pub fn trace_product_re(a: &CMat, b: &CMat) -> f64 {
    // tr(AB) = sum_ij A_ij B_ji = sum_ij conj(A_ji) B_ji for Hermitian A
    hs_inner(a, b).re
}

pub fn tensor_product(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn tensor_all(factors: &[&CMat]) -> CMat {
    let mut out = CMat::from_element(1, 1, r(1.0));
    for f in factors {
        out = out.kronecker(*f);
    }
    out
}

pub fn tensor_vec(a: &CVec, b: &CVec) -> CVec {
    a.kronecker(b)
}

pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()) * r(0.5)
}

/// Relative deviation `‖H − H†‖_F / ‖H‖_F` (absolute when `H` is zero).
pub fn hermiticity_defect(h: &CMat) -> f64 {
    let scale = h.norm();
    let diff = (h - h.adjoint()).norm();
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

fn check_square(x: &CMat, dims: &[usize]) -> Result<()> {
    let n: usize = dims.iter().product();
    if x.nrows() != x.ncols() || x.nrows() != n {
        return Err(Error::Dimension(format!(
            "operator is {}x{} but factor dimensions {:?} multiply to {}",
            x.nrows(),
            x.ncols(),
            dims,
            n
        )));
    }
    Ok(())
}

fn digits(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
}

/// Traces out every factor not listed in `keep`. Kept factors retain their order.
pub fn partial_trace(x: &CMat, dims: &[usize], keep: &[usize]) -> Result<CMat> {
    check_square(x, dims)?;
    if keep.is_empty() {
        return Err(Error::Dimension(
            "partial trace must keep at least one factor".into(),
        ));
    }
    let mut kept = vec![false; dims.len()];
    for &k in keep {
        if k >= dims.len() || kept[k] {
            return Err(Error::Dimension(format!(
                "invalid kept factor list {keep:?}"
            )));
        }
        kept[k] = true;
    }
    let keep_sorted: Vec<usize> = (0..dims.len()).filter(|&k| kept[k]).collect();
    let traced: Vec<usize> = (0..dims.len()).filter(|&k| !kept[k]).collect();
    let keep_dims: Vec<usize> = keep_sorted.iter().map(|&k| dims[k]).collect();
    let trace_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let dk: usize = keep_dims.iter().product();
    let dt: usize = trace_dims.iter().product();

    // stride of each factor in the full index
    let mut stride = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        stride[k] = stride[k + 1] * dims[k + 1];
    }
    let offset = |sub: usize, which: &[usize], sub_dims: &[usize], buf: &mut [usize]| -> usize {
        digits(sub, sub_dims, buf);
        which
            .iter()
            .zip(buf.iter())
            .map(|(&k, &d)| d * stride[k])
            .sum()
    };

    let mut buf = vec![0usize; dims.len()];
    let keep_off: Vec<usize> = (0..dk)
        .map(|i| offset(i, &keep_sorted, &keep_dims, &mut buf[..keep_dims.len()]))
        .collect();
    let trace_off: Vec<usize> = (0..dt)
        .map(|t| offset(t, &traced, &trace_dims, &mut buf[..trace_dims.len()]))
        .collect();

    let mut out = CMat::zeros(dk, dk);
    for i in 0..dk {
        for j in 0..dk {
            let mut acc = C64::new(0.0, 0.0);
            for &t in &trace_off {
                acc += x[(keep_off[i] + t, keep_off[j] + t)];
            }
            out[(i, j)] = acc;
        }
    }

    // restore caller's requested factor order if it differs from ascending
    if keep != keep_sorted.as_slice() {
        let perm: Vec<usize> = keep
            .iter()
            .map(|k| keep_sorted.iter().position(|x| x == k).unwrap())
            .collect();
        return permute_factors(&out, &keep_dims, &perm);
    }
    Ok(out)
}

/// Reorders tensor factors: output factor `k` is input factor `perm[k]`.
pub fn permute_factors(x: &CMat, dims: &[usize], perm: &[usize]) -> Result<CMat> {
    check_square(x, dims)?;
    let n = x.nrows();
    let map = factor_permutation(dims, perm);
    let mut out = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(map[i], map[j])] = x[(i, j)];
        }
    }
    Ok(out)
}

/// Index map sending an old basis index to its position after permuting factors.
pub fn factor_permutation(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let n: usize = dims.iter().product();
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut d = vec![0usize; dims.len()];
    (0..n)
        .map(|i| {
            digits(i, dims, &mut d);
            perm.iter()
                .zip(new_dims.iter())
                .fold(0, |acc, (&p, &nd)| acc * nd + d[p])
        })
        .collect()
}

/// Transposes a single tensor factor in the computational basis.
pub fn partial_transpose(x: &CMat, dims: &[usize], factor: usize) -> Result<CMat> {
    check_square(x, dims)?;
    if factor >= dims.len() {
        return Err(Error::Dimension(format!(
            "factor {factor} out of range for {dims:?}"
        )));
    }
    let n = x.nrows();
    let stride: usize = dims[factor + 1..].iter().product();
    let df = dims[factor];
    let digit = |i: usize| (i / stride) % df;
    let mut out = CMat::zeros(n, n);
    for i in 0..n {
        let di = digit(i);
        for j in 0..n {
            let dj = digit(j);
            // swap the chosen factor's digit between row and column
            let ii = i + (dj * stride) - (di * stride);
            let jj = j + (di * stride) - (dj * stride);
            out[(ii, jj)] = x[(i, j)];
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: CMat,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> CMat {
        self.apply(|x| x)
    }

    /// `U f(Λ) U†` with `f` evaluated on stored eigenvalues.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMat {
        let u = &self.eigenvectors;
        let mut scaled = u.clone();
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            let fk = f(l);
            scaled.column_mut(k).scale_mut(fk);
        }
        &scaled * u.adjoint()
    }

    pub fn max_eigenvector(&self) -> CVec {
        self.eigenvectors
            .column(self.eigenvalues.len() - 1)
            .into_owned()
    }
}

pub fn hermitian_eigensystem(h: &CMat) -> Result<HermitianEigen> {
    if h.nrows() != h.ncols() {
        return Err(Error::Dimension(format!(
            "{}x{} is not square",
            h.nrows(),
            h.ncols()
        )));
    }
    let defect = hermiticity_defect(h);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    Ok(eigen_unchecked(&hermitian_part(h)))
}

fn eigen_unchecked(h: &CMat) -> HermitianEigen {
    let n = h.nrows();
    if n == 0 {
        return HermitianEigen {
            eigenvalues: vec![],
            eigenvectors: CMat::zeros(0, 0),
        };
    }
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = CMat::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    HermitianEigen {
        eigenvalues,
        eigenvectors,
    }
}

/// Ascending eigenvalues of the Hermitian part of `h`, without the hermiticity check.
pub fn eigenvalues_hermitian(h: &CMat) -> Vec<f64> {
    let hh = hermitian_part(h);
    let mut ev: Vec<f64> = SymmetricEigen::new(hh)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn min_eigenvalue(h: &CMat) -> f64 {
    eigenvalues_hermitian(h).first().copied().unwrap_or(0.0)
}

pub fn max_eigenvalue(h: &CMat) -> f64 {
    eigenvalues_hermitian(h).last().copied().unwrap_or(0.0)
}

/// `U f(Λ) U†`. Eigenvalues within [`EIG_CUTOFF`] of zero are snapped to zero;
/// if `f(0)` is not finite those components are dropped (so `log` acts on the support).
pub fn operator_function(h: &CMat, f: impl Fn(f64) -> f64) -> Result<CMat> {
    let eig = hermitian_eigensystem(h)?;
    let mut values = Vec::with_capacity(eig.eigenvalues.len());
    for &l in &eig.eigenvalues {
        let l = if l.abs() < EIG_CUTOFF { 0.0 } else { l };
        let v = f(l);
        if v.is_finite() {
            values.push(v);
        } else if l == 0.0 {
            values.push(0.0);
        } else {
            return Err(Error::UndefinedFunction(l));
        }
    }
    let snapped = HermitianEigen {
        eigenvalues: values,
        eigenvectors: eig.eigenvectors,
    };
    Ok(snapped.reconstruct())
}

/// Matrix of `⟨k|` on factor `factor` of a product space, i.e. `I ⊗ ⟨k| ⊗ I`.
pub fn bra_on_factor(dims: &[usize], factor: usize, k: usize) -> CMat {
    let left: usize = dims[..factor].iter().product();
    let right: usize = dims[factor + 1..].iter().product();
    let bra = CMat::from_fn(1, dims[factor], |_, j| if j == k { r(1.0) } else { r(0.0) });
    tensor_all(&[&identity(left), &bra, &identity(right)])
}

pub fn is_psd(h: &CMat, tol: f64) -> bool {
    min_eigenvalue(h) >= -tol
}

pub fn random_gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        c(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        )
    })
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    hermitian_part(&random_gaussian_matrix(n, n, rng))
}

/// Full-rank (almost surely) density operator from the Ginibre ensemble.
pub fn random_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let g = random_gaussian_matrix(n, n, rng);
    let rho = &g * g.adjoint();
    let t = rho.trace();
    rho / t
}

pub fn random_pure<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVec {
    let g = random_gaussian_matrix(n, 1, rng);
    let v = g.column(0).into_owned();
    let nrm = v.norm();
    v / r(nrm)
}

/// Haar-random unitary via QR of a Ginibre matrix with phase correction.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let g = random_gaussian_matrix(n, n, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let rr = qr.r();
    for k in 0..n {
        let d = rr[(k, k)];
        if d.norm() > 0.0 {
            let ph = d / d.norm();
            for i in 0..n {
                q[(i, k)] *= ph;
            }
        }
    }
    q
}
