//! Entropies (base 2), channel information functionals, their gradients, and majorization.

use crate::channels::{ChannelPair, Ensemble, Leg};
use crate::error::{Error, Result};
use crate::linalg::{
    dyad, eigenvalues_hermitian, hermitian_eigensystem, identity, partial_trace, r, CMat, CVec,
    EIG_CUTOFF,
};

const NEGATIVE_TOL: f64 = 1e-8;

/// Nonnegative values sorted in descending order.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    /// Sorts descending; rejects entries below `−1e−8` and clamps the rest at zero.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = values
            .iter()
            .find(|v| !v.is_finite() || **v < -NEGATIVE_TOL)
        {
            return Err(Error::NegativeEigenvalue(bad));
        }
        for v in values.iter_mut() {
            *v = v.max(0.0);
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Spectrum { values })
    }

    /// Eigenvalues of a PSD operator.
    pub fn of(rho: &CMat) -> Result<Self> {
        let e = hermitian_eigensystem(rho)?;
        Spectrum::new(e.eigenvalues)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Shannon entropy in bits with `0 log 0 = 0`.
    pub fn entropy(&self) -> f64 {
        shannon_bits(&self.values)
    }
}

pub fn shannon_bits(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&x| x > EIG_CUTOFF)
        .map(|&x| -x * x.log2())
        .sum()
}

pub fn binary_entropy(p: f64) -> f64 {
    shannon_bits(&[p, 1.0 - p])
}

/// Von Neumann entropy without validation; small negative eigenvalues are ignored.
pub fn entropy_bits(rho: &CMat) -> f64 {
    shannon_bits(&eigenvalues_hermitian(rho))
}

pub fn vn_entropy(rho: &CMat) -> Result<f64> {
    let e = hermitian_eigensystem(rho)?;
    if let Some(&lo) = e.eigenvalues.first() {
        if lo < -NEGATIVE_TOL {
            return Err(Error::NegativeEigenvalue(lo));
        }
    }
    Ok(shannon_bits(&e.eigenvalues))
}

/// `(1/(1−α)) log2 tr ρ^α`; `α = 1` is the von Neumann entropy, `α = ∞` the min-entropy.
pub fn renyi_entropy(rho: &CMat, alpha: f64) -> Result<f64> {
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "Rényi order {alpha} must be ≥ 0"
        )));
    }
    if alpha == 1.0 {
        return vn_entropy(rho);
    }
    let e = hermitian_eigensystem(rho)?;
    if let Some(&lo) = e.eigenvalues.first() {
        if lo < -NEGATIVE_TOL {
            return Err(Error::NegativeEigenvalue(lo));
        }
    }
    Ok(renyi_of_values(&e.eigenvalues, alpha))
}

pub(crate) fn renyi_of_values(values: &[f64], alpha: f64) -> f64 {
    let support = values.iter().copied().filter(|&x| x > EIG_CUTOFF);
    if alpha == 1.0 {
        return shannon_bits(values);
    }
    if alpha.is_infinite() {
        let max = support.fold(0.0f64, f64::max);
        return -max.log2();
    }
    if alpha == 0.0 {
        return (support.count() as f64).log2();
    }
    let s: f64 = support.map(|x| x.powf(alpha)).sum();
    s.log2() / (1.0 - alpha)
}

fn check_input(pair: &ChannelPair, rho: &CMat) -> Result<()> {
    let d = pair.d_in();
    if rho.nrows() != d || rho.ncols() != d {
        return Err(Error::Dimension(format!(
            "{} expects a {d}x{d} input, got {}x{}",
            pair.label(),
            rho.nrows(),
            rho.ncols()
        )));
    }
    Ok(())
}

/// `S(B(ρ)) − S(B^c(ρ))`.
pub fn coherent_information(pair: &ChannelPair, rho: &CMat) -> Result<f64> {
    check_input(pair, rho)?;
    let b = vn_entropy(&pair.apply_unchecked(rho, Leg::Direct))?;
    let cc = vn_entropy(&pair.apply_unchecked(rho, Leg::Complement))?;
    Ok(b - cc)
}

/// Coherent information without validation, for use inside optimizers.
pub fn coherent_information_fast(pair: &ChannelPair, rho: &CMat) -> f64 {
    entropy_bits(&pair.apply_unchecked(rho, Leg::Direct))
        - entropy_bits(&pair.apply_unchecked(rho, Leg::Complement))
}

/// `log2 σ` restricted to the support of `σ`.
pub(crate) fn log2_on_support(sigma: &CMat) -> CMat {
    let e = hermitian_eigensystem(&crate::linalg::hermitian_part(sigma))
        .expect("Hermitian part is Hermitian");
    e.apply(|x| if x > EIG_CUTOFF { x.log2() } else { 0.0 })
}

/// Subtracts the identity component so the result is traceless.
pub fn project_traceless(g: &CMat) -> CMat {
    let d = g.nrows();
    let t = g.trace() / r(d as f64);
    g - identity(d) * t
}

/// Euclidean gradient of `ρ ↦ S(B(ρ)) − S(B^c(ρ))` on Hermitian matrices, identity
/// component removed. Logs act on supports only, so no rank condition is enforced.
pub fn ci_gradient_unchecked(pair: &ChannelPair, rho: &CMat) -> CMat {
    let lb = log2_on_support(&pair.apply_unchecked(rho, Leg::Direct));
    let lc = log2_on_support(&pair.apply_unchecked(rho, Leg::Complement));
    let g = pair.adjoint_apply(&lc, Leg::Complement) - pair.adjoint_apply(&lb, Leg::Direct);
    project_traceless(&crate::linalg::hermitian_part(&g))
}

/// Gradient of the coherent information; the input must be full rank
/// (regularize with [`regularize`] first when it is not).
pub fn ci_gradient(pair: &ChannelPair, rho: &CMat) -> Result<CMat> {
    check_input(pair, rho)?;
    let e = hermitian_eigensystem(rho)?;
    let lo = e.eigenvalues[0];
    if lo < EIG_CUTOFF {
        return Err(Error::RankDeficient(lo));
    }
    Ok(ci_gradient_unchecked(pair, rho))
}

/// `(1 − ε)ρ + ε I/d`.
pub fn regularize(rho: &CMat, eps: f64) -> CMat {
    let d = rho.nrows();
    rho * r(1.0 - eps) + identity(d) * r(eps / d as f64)
}

/// Default regularization weight for gradients at rank-deficient points.
pub const GRADIENT_EPS: f64 = 1e-9;

/// True when `x` majorizes `y` (`y ≺ x`): every descending partial sum of `x`
/// is at least the matching partial sum of `y`.
pub fn majorizes(x: &Spectrum, y: &Spectrum) -> Result<bool> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "spectra of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    let (sx, sy) = (x.sum(), y.sum());
    if (sx - sy).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "spectra sum to {sx} and {sy}"
        )));
    }
    let mut px = 0.0;
    let mut py = 0.0;
    for (a, b) in x.values().iter().zip(y.values()) {
        px += a;
        py += b;
        if px - py < -1e-10 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn check_ensemble(pair: &ChannelPair, ens: &Ensemble) -> Result<()> {
    if ens.dim() != pair.d_in() {
        return Err(Error::Dimension(format!(
            "ensemble dimension {} does not match channel input {}",
            ens.dim(),
            pair.d_in()
        )));
    }
    Ok(())
}

/// `S(B(ρ̄)) − Σ p_x S(B(ρ_x))`.
pub fn ensemble_holevo(pair: &ChannelPair, ens: &Ensemble) -> Result<f64> {
    check_ensemble(pair, ens)?;
    let avg = vn_entropy(&pair.apply_unchecked(&ens.average(), Leg::Direct))?;
    let mut inner = 0.0;
    for (p, st) in ens.probs().iter().zip(ens.states()) {
        inner += p * vn_entropy(&pair.apply_unchecked(st, Leg::Direct))?;
    }
    Ok(avg - inner)
}

/// `Δ(B, ρ̄) − Σ p_x Δ(B, ρ_x)`.
pub fn ensemble_private_value(pair: &ChannelPair, ens: &Ensemble) -> Result<f64> {
    check_ensemble(pair, ens)?;
    let avg = coherent_information(pair, &ens.average())?;
    let mut inner = 0.0;
    for (p, st) in ens.probs().iter().zip(ens.states()) {
        inner += p * coherent_information(pair, st)?;
    }
    Ok(avg - inner)
}

/// Purification `Σ_k √λ_k |k>_R |u_k>_A` with one reference dimension per
/// nonzero eigenvalue. Returned as a vector on `R ⊗ A` with its reference dimension.
pub fn purify(rho: &CMat) -> Result<(CVec, usize)> {
    let e = hermitian_eigensystem(rho)?;
    let d = rho.nrows();
    let support: Vec<usize> = (0..d).filter(|&k| e.eigenvalues[k] > EIG_CUTOFF).collect();
    let rank = support.len().max(1);
    let mut psi = CVec::zeros(rank * d);
    for (slot, &k) in support.iter().enumerate() {
        let w = e.eigenvalues[k].sqrt();
        for i in 0..d {
            psi[slot * d + i] += e.eigenvectors[(i, k)] * r(w);
        }
    }
    Ok((psi, rank))
}

/// `S(σ_R) + S(σ_B) − S(σ_RB)` where `σ = (id ⊗ B)` applied to a purification of `ρ`.
pub fn mutual_information_ea(pair: &ChannelPair, rho: &CMat) -> Result<f64> {
    check_input(pair, rho)?;
    let (psi, rank) = purify(rho)?;
    let d_b = pair.d_out(Leg::Direct);
    let joint = dyad(&psi);
    let mut sigma = CMat::zeros(rank * d_b, rank * d_b);
    for k in pair.kraus_ops(Leg::Direct) {
        let lifted = crate::linalg::tensor_product(&identity(rank), k);
        sigma += &lifted * &joint * lifted.adjoint();
    }
    let s_r = vn_entropy(&partial_trace(&sigma, &[rank, d_b], &[0])?)?;
    let s_b = vn_entropy(&partial_trace(&sigma, &[rank, d_b], &[1])?)?;
    let s_rb = vn_entropy(&sigma)?;
    Ok(s_r + s_b - s_rb)
}

/// Mutual information through the identity `S(ρ) + S(B(ρ)) − S(B^c(ρ))`.
pub fn mutual_information_fast(pair: &ChannelPair, rho: &CMat) -> f64 {
    entropy_bits(rho) + coherent_information_fast(pair, rho)
}

/// Gradient of [`mutual_information_fast`], identity component removed.
pub fn mutual_information_gradient(pair: &ChannelPair, rho: &CMat) -> CMat {
    let own = log2_on_support(rho);
    ci_gradient_unchecked(pair, rho) - project_traceless(&own)
}
