//! Single-letter information quantities found by numerical search.

use crate::channels::{make_o, ChannelPair, Leg};
use crate::entropic::{
    ci_gradient_unchecked, coherent_information_fast, entropy_bits, log2_on_support,
    mutual_information_fast, mutual_information_gradient, regularize, renyi_of_values,
    GRADIENT_EPS,
};
use crate::error::{Error, Result};
use crate::linalg::{
    c, dyad, eigenvalues_hermitian, identity, ket, projector, r, tensor_product, trace_product_re,
    CMat, CVec,
};
use crate::optimize::{density_ascent, golden_max, sphere_min, Argument, OptimConfig, OptimResult};

/// Coarse grid points scanned before golden-section refinement.
const SCAN_POINTS: usize = 200;
/// Largest input dimension of a tensor power searched by [`q1_multiletter`].
const MULTILETTER_CAP: usize = 81;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Q1Strategy {
    /// One-parameter family `(1 − u)[0] + u[d−1]`; only for the O family.
    Reduced,
    /// Gradient ascent over all input states.
    General,
}

/// Grid scan over `[0, 1]` followed by golden-section search in the best cell.
pub(crate) fn scan_then_golden(f: impl Fn(f64) -> f64, tol: f64) -> Result<OptimResult> {
    let mut best = (0, f64::NEG_INFINITY);
    for k in 0..=SCAN_POINTS {
        let v = f(k as f64 / SCAN_POINTS as f64);
        if !v.is_finite() {
            return Err(Error::NonFinite(k as f64 / SCAN_POINTS as f64));
        }
        if v > best.1 {
            best = (k, v);
        }
    }
    let lo = best.0.saturating_sub(1) as f64 / SCAN_POINTS as f64;
    let hi = (best.0 + 1).min(SCAN_POINTS) as f64 / SCAN_POINTS as f64;
    let mut res = golden_max(&f, lo, hi, tol)?;
    res.evaluations += SCAN_POINTS + 1;
    if best.1 > res.value {
        res.value = best.1;
        res.argument = Argument::Scalar(best.0 as f64 / SCAN_POINTS as f64);
    }
    Ok(res)
}

/// Schmidt amplitudes of an O-family channel, or an `Unsupported` error.
fn o_amplitudes(pair: &ChannelPair) -> Result<Vec<f64>> {
    pair.spec().and_then(|s| s.o_family_mu()).ok_or_else(|| {
        Error::Unsupported(format!(
            "the reduced search needs an O-family channel, got {}",
            pair.label()
        ))
    })
}

/// `(1 − u)[0] + u[i]`.
fn two_level_state(d: usize, i: usize, u: f64) -> CMat {
    projector(d, 0) * r(1.0 - u) + projector(d, i) * r(u)
}

/// Largest coherent information of one use of the channel.
pub fn q1(pair: &ChannelPair, strategy: Q1Strategy, config: &OptimConfig) -> Result<OptimResult> {
    config.validate()?;
    match strategy {
        Q1Strategy::Reduced => {
            let d = o_amplitudes(pair)?.len() + 1;
            scan_then_golden(
                |u| coherent_information_fast(pair, &two_level_state(d, d - 1, u)),
                config.golden_tol,
            )
        }
        Q1Strategy::General => Ok(q1_general(pair, config, &[])),
    }
}

fn q1_general(pair: &ChannelPair, config: &OptimConfig, initial: &[CMat]) -> OptimResult {
    density_ascent(
        pair.d_in(),
        |rho| coherent_information_fast(pair, rho),
        |rho| ci_gradient_unchecked(pair, &regularize(rho, GRADIENT_EPS)),
        config,
        initial,
    )
}

/// Per-letter coherent information of `B^{⊗n}`, seeded with `ρ*^{⊗n}` for the
/// best single-letter input `ρ*`.
pub fn q1_multiletter(pair: &ChannelPair, n: usize, config: &OptimConfig) -> Result<OptimResult> {
    config.validate()?;
    if n == 0 {
        return Err(Error::InvalidParameter(
            "number of channel uses must be positive".into(),
        ));
    }
    let dim = pair.d_in().checked_pow(n as u32).unwrap_or(usize::MAX);
    if dim > MULTILETTER_CAP {
        return Err(Error::Unsupported(format!(
            "input dimension {dim} of {n} uses exceeds the cap of {MULTILETTER_CAP}"
        )));
    }
    let single = q1_general(pair, config, &[]);
    if n == 1 {
        return Ok(single);
    }
    let rho = single
        .argument
        .as_matrix()
        .expect("density ascent returns a matrix")
        .clone();
    let mut product = rho.clone();
    for _ in 1..n {
        product = tensor_product(&product, &rho);
    }
    let joint = pair.tensor_power(n);
    let mut res = q1_general(&joint, config, &[product]);
    res.value /= n as f64;
    Ok(res)
}

/// Entanglement-assisted capacity `max_ρ I(ρ, B)`. The objective is concave, so
/// only three restarts are used.
pub fn ea_capacity(pair: &ChannelPair, config: &OptimConfig) -> Result<OptimResult> {
    config.validate()?;
    let cfg = OptimConfig {
        restarts: config.restarts.min(3),
        ..config.clone()
    };
    Ok(density_ascent(
        pair.d_in(),
        |rho| mutual_information_fast(pair, rho),
        |rho| mutual_information_gradient(pair, &regularize(rho, GRADIENT_EPS)),
        &cfg,
        &[identity(pair.d_in()) * r(1.0 / pair.d_in() as f64)],
    ))
}

fn fourier_state(d: usize, k: usize) -> CVec {
    let norm = 1.0 / (d as f64).sqrt();
    CVec::from_fn(d, |j, _| {
        let phase = 2.0 * std::f64::consts::PI * (j * k) as f64 / d as f64;
        c(phase.cos() * norm, phase.sin() * norm)
    })
}

fn uniform_amplitudes(m: usize) -> CVec {
    CVec::from_element(m, r(1.0 / (m as f64).sqrt()))
}

fn keep_best(results: Vec<OptimResult>) -> OptimResult {
    let evaluations = results.iter().map(|r| r.evaluations).sum();
    let mut best = results
        .into_iter()
        .reduce(|a, b| if b.value > a.value + 1e-12 { b } else { a })
        .expect("at least one ensemble size");
    best.evaluations = evaluations;
    best
}

/// Holevo information over pure-state ensembles of `d_a` to `d_a²` members.
///
/// The argument is `[amplitudes, ψ_1, …, ψ_m]` with probabilities `|amplitude_x|²`.
pub fn holevo_info(pair: &ChannelPair, config: &OptimConfig) -> Result<OptimResult> {
    config.validate()?;
    let d = pair.d_in();
    let results = (d..=d * d)
        .map(|m| holevo_of_size(pair, m, config))
        .collect();
    Ok(keep_best(results))
}

fn holevo_of_size(pair: &ChannelPair, m: usize, config: &OptimConfig) -> OptimResult {
    let d = pair.d_in();
    let mut shape = vec![m];
    shape.extend(std::iter::repeat_n(d, m));
    let outputs = |v: &[CVec]| -> Vec<CMat> {
        v[1..]
            .iter()
            .map(|psi| pair.apply_unchecked(&dyad(psi), Leg::Direct))
            .collect()
    };
    let average = |probs: &[f64], outs: &[CMat]| -> CMat {
        outs.iter().zip(probs).fold(
            CMat::zeros(outs[0].nrows(), outs[0].ncols()),
            |acc, (o, p)| acc + o * r(*p),
        )
    };
    let probs_of = |v: &[CVec]| -> Vec<f64> { v[0].iter().map(|a| a.norm_sqr()).collect() };
    let objective = |v: &[CVec]| {
        let probs = probs_of(v);
        let outs = outputs(v);
        let inner: f64 = outs
            .iter()
            .zip(&probs)
            .map(|(o, p)| p * entropy_bits(o))
            .sum();
        inner - entropy_bits(&average(&probs, &outs))
    };
    let gradient = |v: &[CVec]| {
        let probs = probs_of(v);
        let outs = outputs(v);
        let log_avg = log2_on_support(&average(&probs, &outs));
        let mut grads = Vec::with_capacity(m + 1);
        // Minimizing −χ: ∂/∂p_x = S(ω_x) + tr(ω_x log σ̄).
        grads.push(CVec::from_fn(m, |x, _| {
            v[0][x] * r(2.0 * (entropy_bits(&outs[x]) + trace_product_re(&log_avg, &outs[x])))
        }));
        for x in 0..m {
            let diff = log2_on_support(&outs[x]) - &log_avg;
            let pulled = pair.adjoint_apply(&diff, Leg::Direct);
            grads.push(&pulled * &v[x + 1] * r(-2.0 * probs[x]));
        }
        grads
    };
    let mut initial = Vec::new();
    if m >= d {
        // Computational and Fourier bases padded with repeats.
        for basis in [0, 1] {
            let mut point = vec![uniform_amplitudes(m)];
            for x in 0..m {
                point.push(if basis == 0 {
                    ket(d, x % d)
                } else {
                    fourier_state(d, x % d)
                });
            }
            initial.push(point);
        }
    }
    let mut res = sphere_min(&shape, objective, gradient, config, &initial);
    res.value = -res.value;
    res
}

/// Channel private information over ensembles of `2` to `d_a²` mixed states
/// `ρ_x = L_x L_x†`.
///
/// The argument is `[amplitudes, vec(L_1), …, vec(L_m)]`, each `L_x` flattened
/// column-major.
pub fn private_info(pair: &ChannelPair, config: &OptimConfig) -> Result<OptimResult> {
    config.validate()?;
    let d = pair.d_in();
    let results = (2..=d * d)
        .map(|m| private_of_size(pair, m, config))
        .collect();
    Ok(keep_best(results))
}

/// `ρ = L L†` for a flattened factor.
pub fn state_from_factor(v: &CVec, d: usize) -> CMat {
    let l = CMat::from_column_slice(d, d, v.as_slice());
    &l * l.adjoint()
}

fn private_of_size(pair: &ChannelPair, m: usize, config: &OptimConfig) -> OptimResult {
    let d = pair.d_in();
    let mut shape = vec![m];
    shape.extend(std::iter::repeat_n(d * d, m));
    let states =
        |v: &[CVec]| -> Vec<CMat> { v[1..].iter().map(|f| state_from_factor(f, d)).collect() };
    let probs_of = |v: &[CVec]| -> Vec<f64> { v[0].iter().map(|a| a.norm_sqr()).collect() };
    let average = |probs: &[f64], sts: &[CMat]| -> CMat {
        sts.iter()
            .zip(probs)
            .fold(CMat::zeros(d, d), |acc, (s, p)| acc + s * r(*p))
    };
    let objective = |v: &[CVec]| {
        let probs = probs_of(v);
        let sts = states(v);
        let inner: f64 = sts
            .iter()
            .zip(&probs)
            .map(|(s, p)| p * coherent_information_fast(pair, s))
            .sum();
        inner - coherent_information_fast(pair, &average(&probs, &sts))
    };
    let gradient = |v: &[CVec]| {
        let probs = probs_of(v);
        let sts = states(v);
        let g_avg = ci_gradient_unchecked(pair, &regularize(&average(&probs, &sts), GRADIENT_EPS));
        let mut grads = Vec::with_capacity(m + 1);
        grads.push(CVec::from_fn(m, |x, _| {
            v[0][x]
                * r(2.0
                    * (coherent_information_fast(pair, &sts[x])
                        - trace_product_re(&g_avg, &sts[x])))
        }));
        for x in 0..m {
            let g_x = ci_gradient_unchecked(pair, &regularize(&sts[x], GRADIENT_EPS));
            let l = CMat::from_column_slice(d, d, v[x + 1].as_slice());
            let g_l = (g_x - &g_avg) * l * r(2.0 * probs[x]);
            grads.push(CVec::from_column_slice(g_l.as_slice()));
        }
        grads
    };
    let flatten = |rho: &CMat| -> CVec {
        let e = crate::linalg::hermitian_eigensystem(rho).expect("Hermitian start");
        let root = e.apply(|x| x.max(0.0).sqrt());
        CVec::from_column_slice(root.as_slice())
    };
    // Starts: one pure basis state against the mixture of the rest, and the
    // uniform computational-basis ensemble.
    let mut initial = Vec::new();
    let rest =
        (1..d).fold(CMat::zeros(d, d), |acc, i| acc + projector(d, i)) * r(1.0 / (d - 1) as f64);
    let mut split = vec![
        uniform_amplitudes(m),
        flatten(&projector(d, 0)),
        flatten(&rest),
    ];
    for x in 2..m {
        split.push(flatten(&projector(d, x % d)));
    }
    initial.push(split);
    if m >= d {
        let mut basis = vec![uniform_amplitudes(m)];
        basis.extend((0..m).map(|x| flatten(&projector(d, x % d))));
        initial.push(basis);
    }
    let mut res = sphere_min(&shape, objective, gradient, config, &initial);
    res.value = -res.value;
    res
}

/// Probabilities and states of an ensemble found by [`private_info`].
pub fn private_ensemble(argument: &Argument, d: usize) -> Option<(Vec<f64>, Vec<CMat>)> {
    let v = argument.as_vectors()?;
    let probs = v[0].iter().map(|a| a.norm_sqr()).collect();
    let states = v[1..].iter().map(|f| state_from_factor(f, d)).collect();
    Some((probs, states))
}

/// Probabilities and pure states of an ensemble found by [`holevo_info`].
pub fn holevo_ensemble(argument: &Argument) -> Option<(Vec<f64>, Vec<CVec>)> {
    let v = argument.as_vectors()?;
    Some((v[0].iter().map(|a| a.norm_sqr()).collect(), v[1..].to_vec()))
}

/// Number of distinct states in a pure-state ensemble once states with overlap
/// `|⟨ψ|φ⟩|² > 1 − 1e−6` are merged and merged weights below `weight_tol` dropped.
pub fn effective_ensemble_size(probs: &[f64], states: &[CVec], weight_tol: f64) -> usize {
    let mut groups: Vec<(CVec, f64)> = Vec::new();
    for (psi, &p) in states.iter().zip(probs) {
        let psi = psi.normalize();
        match groups
            .iter_mut()
            .find(|(rep, _)| rep.dotc(&psi).norm_sqr() > 1.0 - 1e-6)
        {
            Some(group) => group.1 += p,
            None => groups.push((psi, p)),
        }
    }
    groups.iter().filter(|(_, w)| *w > weight_tol).count()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeConfig {
    pub eps_grid: Vec<f64>,
    /// Output whose entropy is fitted.
    pub leg: Leg,
}

impl Default for ProbeConfig {
    /// Forty log-spaced points from `1e−6` to `1e−3` on the direct output.
    fn default() -> Self {
        let n = 40;
        let eps_grid = (0..n)
            .map(|k| 10f64.powf(-6.0 + 3.0 * k as f64 / (n - 1) as f64))
            .collect();
        ProbeConfig {
            eps_grid,
            leg: Leg::Direct,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeReport {
    /// `Δ(ε) > 0` at every grid point.
    pub delta_positive: bool,
    /// Coefficient of `ε log₂(1/ε)` in the least-squares fit of `S(ε) − S(0)`.
    pub rate_estimate: f64,
    /// Coefficient of the linear term of the same fit.
    pub linear_coefficient: f64,
    /// `(ε, Δ(ε))` at each grid point.
    pub deltas: Vec<(f64, f64)>,
}

/// Coherent information along `ρ(ε) = (1 − ε) base + ε direction` and the
/// strength of the `ε log(1/ε)` term in the chosen output entropy.
pub fn log_singularity_probe(
    pair: &ChannelPair,
    base: &CMat,
    direction: &CMat,
    config: &ProbeConfig,
) -> Result<ProbeReport> {
    let d = pair.d_in();
    for m in [base, direction] {
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::Dimension(format!("probe states must be {d}x{d}")));
        }
    }
    if config.eps_grid.len() < 2 || config.eps_grid.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(Error::InvalidParameter(
            "probe grid needs at least two points in (0, 1)".into(),
        ));
    }
    let state = |eps: f64| base * r(1.0 - eps) + direction * r(eps);
    let leg_entropy = |rho: &CMat| entropy_bits(&pair.apply_unchecked(rho, config.leg));
    let s0 = leg_entropy(base);
    let mut deltas = Vec::with_capacity(config.eps_grid.len());
    // Normal equations for y ≈ a·x1 + b·x2 with x1 = ε log₂(1/ε), x2 = ε.
    let (mut s11, mut s12, mut s22, mut t1, mut t2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &eps in &config.eps_grid {
        let rho = state(eps);
        deltas.push((eps, coherent_information_fast(pair, &rho)));
        let y = leg_entropy(&rho) - s0;
        let x1 = -eps * eps.log2();
        let x2 = eps;
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        t1 += x1 * y;
        t2 += x2 * y;
    }
    let det = s11 * s22 - s12 * s12;
    if det.abs() < 1e-300 {
        return Err(Error::InvalidParameter(
            "probe grid does not separate the fit terms".into(),
        ));
    }
    let rate = (t1 * s22 - t2 * s12) / det;
    let linear = (s11 * t2 - s12 * t1) / det;
    Ok(ProbeReport {
        delta_positive: deltas.iter().all(|(_, v)| *v > 0.0),
        rate_estimate: rate,
        linear_coefficient: linear,
        deltas,
    })
}

/// `Q1` of each restriction of the O channel to `span{|0⟩, |i⟩}`, `i = 1, …, d−1`,
/// searched over `(1 − u)[0] + u[i]`.
pub fn subchannel_ordering(mu: &[f64], config: &OptimConfig) -> Result<Vec<f64>> {
    let pair = make_o(mu)?;
    let d = mu.len() + 1;
    (1..d)
        .map(|i| {
            scan_then_golden(
                |u| coherent_information_fast(&pair, &two_level_state(d, i, u)),
                config.golden_tol,
            )
            .map(|res| res.value)
        })
        .collect()
}

/// `max_u S_α(ρ_b(u)) − S_α(ρ_c(u))` on the reduced O-family inputs.
pub fn renyi_q1_reduced(
    pair: &ChannelPair,
    alpha: f64,
    config: &OptimConfig,
) -> Result<OptimResult> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Rényi order must be nonnegative, got {alpha}"
        )));
    }
    let d = o_amplitudes(pair)?.len() + 1;
    let renyi = |m: &CMat| renyi_of_values(&eigenvalues_hermitian(m), alpha);
    scan_then_golden(
        |u| {
            let rho = two_level_state(d, d - 1, u);
            renyi(&pair.apply_unchecked(&rho, Leg::Direct))
                - renyi(&pair.apply_unchecked(&rho, Leg::Complement))
        },
        config.golden_tol,
    )
}
