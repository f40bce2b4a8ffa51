//! Seeded optimizers: golden-section search, ascent over density matrices,
//! Riemannian descent over products of complex unit spheres, and particle swarm.
//!
//! Every multi-start routine evaluates restart `k` with its own generator seeded by
//! `derive_seed(config.seed, k)`, so results do not depend on the worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigensystem, hermitian_part, r, random_gaussian_matrix, CMat, CVec};

const INV_PHI: f64 = 0.618_033_988_749_894_8;
const ARMIJO_C: f64 = 1e-4;
const MIN_STEP: f64 = 1e-18;
const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SwarmConfig {
    pub particles: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub iters: usize,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        SwarmConfig {
            particles: 40,
            inertia: 0.7,
            cognitive: 1.5,
            social: 1.5,
            iters: 2000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimConfig {
    pub seed: u64,
    pub restarts: usize,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub step_init: f64,
    pub golden_tol: f64,
    pub swarm: SwarmConfig,
}

impl Default for OptimConfig {
    fn default() -> Self {
        OptimConfig {
            seed: 42,
            restarts: 50,
            max_iters: 2000,
            grad_tol: 1e-8,
            step_init: 1.0,
            golden_tol: 1e-10,
            swarm: SwarmConfig::default(),
        }
    }
}

impl OptimConfig {
    pub fn validate(&self) -> Result<()> {
        let s = &self.swarm;
        let positive_counts =
            self.restarts > 0 && self.max_iters > 0 && s.particles > 0 && s.iters > 0;
        let tolerances = [self.grad_tol, self.golden_tol];
        if !positive_counts {
            return Err(Error::InvalidParameter(
                "optimizer counts must be positive".into(),
            ));
        }
        if tolerances.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
            return Err(Error::InvalidParameter(
                "optimizer tolerances must lie in (0, 1)".into(),
            ));
        }
        if !(self.step_init > 0.0) || !(s.inertia > 0.0 && s.cognitive > 0.0 && s.social > 0.0) {
            return Err(Error::InvalidParameter(
                "step and swarm weights must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        OptimConfig {
            seed,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug)]
pub enum Argument {
    Scalar(f64),
    Matrix(CMat),
    Coords(Vec<f64>),
    Vectors(Vec<CVec>),
}

impl Argument {
    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            Argument::Scalar(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_matrix(&self) -> Option<&CMat> {
        match self {
            Argument::Matrix(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_vectors(&self) -> Option<&[CVec]> {
        match self {
            Argument::Vectors(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_coords(&self) -> Option<&[f64]> {
        match self {
            Argument::Coords(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OptimResult {
    pub value: f64,
    pub argument: Argument,
    pub iterations: usize,
    pub converged: bool,
    pub seed_used: u64,
    /// Function evaluations (all restarts).
    pub evaluations: usize,
    /// Index of the restart that produced the returned value.
    pub best_restart: usize,
}

/// SplitMix64 step applied to `base ^ golden * (index + 1)`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_for(base: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, index))
}

/// Picks the best result; ties within `1e−12` go to the lowest index.
fn pick_best(results: Vec<OptimResult>, maximize: bool) -> OptimResult {
    let total_evals: usize = results.iter().map(|r| r.evaluations).sum();
    let mut best: Option<OptimResult> = None;
    for res in results {
        let better = match &best {
            None => true,
            Some(b) => {
                if maximize {
                    res.value > b.value + TIE_TOL
                } else {
                    res.value < b.value - TIE_TOL
                }
            }
        };
        if better {
            best = Some(res);
        }
    }
    let mut best = best.expect("at least one restart");
    best.evaluations = total_evals;
    best
}

/// Golden-section maximization on `[lo, hi]`. The returned point lies in a final
/// bracket of width at most `tol`.
pub fn golden_max(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<OptimResult> {
    if !(lo < hi) || !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bad interval [{lo}, {hi}] or tolerance {tol}"
        )));
    }
    let mut evals = 0usize;
    let mut eval = |x: f64| -> Result<f64> {
        evals += 1;
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite(x))
        }
    };
    let (mut a, mut b) = (lo, hi);
    if b - a <= tol {
        let x = 0.5 * (a + b);
        let v = eval(x)?;
        return Ok(OptimResult {
            value: v,
            argument: Argument::Scalar(x),
            iterations: 0,
            converged: true,
            seed_used: 0,
            evaluations: evals,
            best_restart: 0,
        });
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let last = (b - a) * INV_PHI <= tol;
        if fc >= fd {
            b = d;
            if last {
                break;
            }
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            if last {
                break;
            }
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d)?;
        }
    }
    // the surviving interior point is the better of the last pair
    let (x, v) = if fc >= fd { (c, fc) } else { (d, fd) };
    Ok(OptimResult {
        value: v,
        argument: Argument::Scalar(x),
        iterations,
        converged: true,
        seed_used: 0,
        evaluations: evals,
        best_restart: 0,
    })
}

fn re_inner(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum()
}

fn density_of(l: &CMat) -> CMat {
    let rho = l * l.adjoint();
    let t = rho.trace().re;
    hermitian_part(&(rho / r(t)))
}

/// Operator square root of a PSD matrix mixed with a tiny multiple of the identity,
/// so rank-deficient seeds can still grow their support.
fn factor_of(rho: &CMat) -> CMat {
    let d = rho.nrows();
    let mixed = hermitian_part(rho) * r(1.0 - 1e-12) + CMat::identity(d, d) * r(1e-12 / d as f64);
    let e = hermitian_eigensystem(&mixed).expect("Hermitian input");
    e.apply(|x| x.max(0.0).sqrt())
}

/// Multi-start gradient ascent over density matrices `ρ = LL†/tr(LL†)`.
///
/// `gradient` returns the Euclidean gradient of `objective` with respect to `ρ`
/// (any identity component is harmless). Restart order: the supplied `initial`
/// states, then `ρ = I/d`, then Ginibre-random factors.
pub fn density_ascent<F, G>(
    dim: usize,
    objective: F,
    gradient: G,
    config: &OptimConfig,
    initial: &[CMat],
) -> OptimResult
where
    F: Fn(&CMat) -> f64 + Sync,
    G: Fn(&CMat) -> CMat + Sync,
{
    let n = config.restarts.max(initial.len());
    let results: Vec<OptimResult> = (0..n)
        .into_par_iter()
        .map(|k| {
            let start = if k < initial.len() {
                factor_of(&initial[k])
            } else if k == initial.len() {
                CMat::identity(dim, dim)
            } else {
                let mut rng = rng_for(config.seed, k as u64);
                random_gaussian_matrix(dim, dim, &mut rng)
            };
            let mut res = ascend_factor(start, &objective, &gradient, config);
            res.best_restart = k;
            res
        })
        .collect();
    let mut best = pick_best(results, true);
    best.seed_used = config.seed;
    best
}

fn ascend_factor<F, G>(
    mut l: CMat,
    objective: &F,
    gradient: &G,
    config: &OptimConfig,
) -> OptimResult
where
    F: Fn(&CMat) -> f64,
    G: Fn(&CMat) -> CMat,
{
    let normalize = |m: &CMat| -> CMat {
        let t = m.norm();
        m / r(t)
    };
    l = normalize(&l);
    let mut rho = density_of(&l);
    let mut f = objective(&rho);
    let mut evals = 1;
    let grad_l = |rho: &CMat, l: &CMat| -> CMat {
        let g = hermitian_part(&gradient(rho));
        let lam = re_inner(&g, rho);
        let shifted = g - CMat::identity(rho.nrows(), rho.nrows()) * r(lam);
        // tr(LL†) = 1 after normalization
        shifted * l * r(2.0)
    };
    let mut g = grad_l(&rho, &l);
    let mut step = config.step_init;
    let mut prev: Option<(CMat, CMat)> = None;
    let mut converged = false;
    let mut iterations = 0;
    let mut stalled = 0;
    for it in 0..config.max_iters {
        iterations = it + 1;
        let gnorm2 = re_inner(&g, &g);
        if gnorm2.sqrt() < config.grad_tol {
            converged = true;
            break;
        }
        if let Some((dl, dg)) = &prev {
            let sy = re_inner(dl, dg).abs();
            if sy > 0.0 {
                step = (re_inner(dl, dl) / sy).clamp(1e-10, 1e6);
            }
        }
        let mut accepted = None;
        let mut eta = step;
        while eta > MIN_STEP {
            let cand = normalize(&(&l + &g * r(eta)));
            let rho_c = density_of(&cand);
            let fc = objective(&rho_c);
            evals += 1;
            if fc.is_finite() && fc >= f + ARMIJO_C * eta * gnorm2 {
                accepted = Some((cand, rho_c, fc));
                break;
            }
            eta *= 0.5;
        }
        let Some((cand, rho_c, fc)) = accepted else {
            break;
        };
        let gc = grad_l(&rho_c, &cand);
        prev = Some((&cand - &l, &g - &gc));
        let gain = fc - f;
        l = cand;
        rho = rho_c;
        f = fc;
        g = gc;
        if gain <= 1e-15 * (1.0 + f.abs()) {
            stalled += 1;
            if stalled >= 20 {
                break;
            }
        } else {
            stalled = 0;
        }
    }
    OptimResult {
        value: f,
        argument: Argument::Matrix(rho),
        iterations,
        converged,
        seed_used: config.seed,
        evaluations: evals,
        best_restart: 0,
    }
}

fn normalize_vec(v: &CVec) -> CVec {
    let n = v.norm();
    v / r(n)
}

fn random_unit<R: Rng>(dim: usize, rng: &mut R) -> CVec {
    let g = random_gaussian_matrix(dim, 1, rng);
    normalize_vec(&g.column(0).into_owned())
}

/// Multi-start Riemannian gradient descent over a product of complex unit spheres.
///
/// `gradient` returns, per sphere, the Euclidean gradient `g` with
/// `df = Re<g, dv>`. Restart order: the supplied `initial` points, then random points.
pub fn sphere_min<F, G>(
    shape: &[usize],
    objective: F,
    gradient: G,
    config: &OptimConfig,
    initial: &[Vec<CVec>],
) -> OptimResult
where
    F: Fn(&[CVec]) -> f64 + Sync,
    G: Fn(&[CVec]) -> Vec<CVec> + Sync,
{
    let n = config.restarts.max(initial.len());
    let results: Vec<OptimResult> = (0..n)
        .into_par_iter()
        .map(|k| {
            let start: Vec<CVec> = if k < initial.len() {
                initial[k].iter().map(normalize_vec).collect()
            } else {
                let mut rng = rng_for(config.seed, k as u64);
                shape.iter().map(|&d| random_unit(d, &mut rng)).collect()
            };
            let mut res = descend_spheres(start, &objective, &gradient, config);
            res.best_restart = k;
            res
        })
        .collect();
    let mut best = pick_best(results, false);
    best.seed_used = config.seed;
    best
}

fn tangent(v: &[CVec], g: &[CVec]) -> Vec<CVec> {
    v.iter()
        .zip(g)
        .map(|(vi, gi)| {
            let radial = vi.dotc(gi).re;
            gi - vi * r(radial)
        })
        .collect()
}

fn sq_norm(x: &[CVec]) -> f64 {
    x.iter().map(|v| v.norm_squared()).sum()
}

fn re_dot(a: &[CVec], b: &[CVec]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dotc(y).re).sum()
}

fn descend_spheres<F, G>(
    mut v: Vec<CVec>,
    objective: &F,
    gradient: &G,
    config: &OptimConfig,
) -> OptimResult
where
    F: Fn(&[CVec]) -> f64,
    G: Fn(&[CVec]) -> Vec<CVec>,
{
    let mut f = objective(&v);
    let mut evals = 1;
    let mut xi = tangent(&v, &gradient(&v));
    let mut step = config.step_init;
    let mut prev: Option<(Vec<CVec>, Vec<CVec>)> = None;
    let mut converged = false;
    let mut iterations = 0;
    let mut stalled = 0;
    for it in 0..config.max_iters {
        iterations = it + 1;
        let gnorm2 = sq_norm(&xi);
        if gnorm2.sqrt() < config.grad_tol {
            converged = true;
            break;
        }
        if let Some((dv, dg)) = &prev {
            let sy = re_dot(dv, dg).abs();
            if sy > 0.0 {
                step = (sq_norm(dv) / sy).clamp(1e-10, 1e6);
            }
        }
        let mut accepted = None;
        let mut eta = step;
        while eta > MIN_STEP {
            let cand: Vec<CVec> = v
                .iter()
                .zip(&xi)
                .map(|(vi, xii)| normalize_vec(&(vi - xii * r(eta))))
                .collect();
            let fc = objective(&cand);
            evals += 1;
            if fc.is_finite() && fc <= f - ARMIJO_C * eta * gnorm2 {
                accepted = Some((cand, fc));
                break;
            }
            eta *= 0.5;
        }
        let Some((cand, fc)) = accepted else {
            break;
        };
        let xc = tangent(&cand, &gradient(&cand));
        let dv: Vec<CVec> = cand.iter().zip(&v).map(|(a, b)| a - b).collect();
        let dg: Vec<CVec> = xc.iter().zip(&xi).map(|(a, b)| a - b).collect();
        prev = Some((dv, dg));
        let gain = f - fc;
        v = cand;
        f = fc;
        xi = xc;
        if gain <= 1e-15 * (1.0 + f.abs()) {
            stalled += 1;
            if stalled >= 20 {
                break;
            }
        } else {
            stalled = 0;
        }
    }
    OptimResult {
        value: f,
        argument: Argument::Vectors(v),
        iterations,
        converged,
        seed_used: config.seed,
        evaluations: evals,
        best_restart: 0,
    }
}

#[derive(Clone, Debug)]
pub enum SearchSpace {
    /// Box `[lo_i, hi_i]` per coordinate.
    Bounds(Vec<(f64, f64)>),
    /// Product of complex unit spheres; each sphere of dimension `d` uses `2d`
    /// real coordinates `(re_0, im_0, re_1, ...)` and is renormalized after each move.
    Spheres(Vec<usize>),
}

impl SearchSpace {
    fn dimension(&self) -> usize {
        match self {
            SearchSpace::Bounds(b) => b.len(),
            SearchSpace::Spheres(s) => s.iter().map(|d| 2 * d).sum(),
        }
    }

    fn project(&self, x: &mut [f64]) {
        match self {
            SearchSpace::Bounds(b) => {
                for (xi, (lo, hi)) in x.iter_mut().zip(b) {
                    *xi = xi.clamp(*lo, *hi);
                }
            }
            SearchSpace::Spheres(s) => {
                let mut off = 0;
                for d in s {
                    let block = &mut x[off..off + 2 * d];
                    let n = block.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if n > 0.0 {
                        block.iter_mut().for_each(|v| *v /= n);
                    } else {
                        block[0] = 1.0;
                    }
                    off += 2 * d;
                }
            }
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            SearchSpace::Bounds(b) => b
                .iter()
                .map(|(lo, hi)| rng.random_range(*lo..=*hi))
                .collect(),
            SearchSpace::Spheres(_) => {
                let mut x: Vec<f64> = (0..self.dimension())
                    .map(|_| rng.sample(rand_distr::StandardNormal))
                    .collect();
                self.project(&mut x);
                x
            }
        }
    }

    fn velocity_limit(&self) -> Vec<f64> {
        match self {
            SearchSpace::Bounds(b) => b.iter().map(|(lo, hi)| hi - lo).collect(),
            SearchSpace::Spheres(_) => vec![1.0; self.dimension()],
        }
    }
}

/// Unpacks sphere coordinates produced by [`SearchSpace::Spheres`].
pub fn coords_to_vectors(shape: &[usize], x: &[f64]) -> Vec<CVec> {
    let mut off = 0;
    shape
        .iter()
        .map(|&d| {
            let v = CVec::from_fn(d, |i, _| {
                crate::linalg::c(x[off + 2 * i], x[off + 2 * i + 1])
            });
            off += 2 * d;
            v
        })
        .collect()
}

pub fn vectors_to_coords(v: &[CVec]) -> Vec<f64> {
    v.iter()
        .flat_map(|vi| vi.iter().flat_map(|z| [z.re, z.im]))
        .collect()
}

/// Global-best particle swarm minimization. Particle 0 starts at `initial[0]`
/// when given (and so on); the rest are sampled from the search space.
pub fn particle_swarm<F>(
    objective: F,
    space: &SearchSpace,
    config: &OptimConfig,
    initial: &[Vec<f64>],
) -> OptimResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let sw = &config.swarm;
    let dim = space.dimension();
    let mut rng = rng_for(config.seed, u64::MAX);
    let vmax = space.velocity_limit();
    let np = sw.particles.max(initial.len());

    let mut pos: Vec<Vec<f64>> = (0..np)
        .map(|k| {
            if k < initial.len() {
                let mut x = initial[k].clone();
                space.project(&mut x);
                x
            } else {
                space.sample(&mut rng)
            }
        })
        .collect();
    let mut vel: Vec<Vec<f64>> = (0..np)
        .map(|_| {
            (0..dim)
                .map(|j| rng.random_range(-0.1..=0.1) * vmax[j])
                .collect()
        })
        .collect();

    let eval_all = |pos: &[Vec<f64>]| -> Vec<f64> {
        pos.par_iter()
            .map(|x| {
                let v = objective(x);
                if v.is_finite() {
                    v
                } else {
                    f64::INFINITY
                }
            })
            .collect()
    };
    let mut vals = eval_all(&pos);
    let mut evals = np;
    let mut pbest = pos.clone();
    let mut pbest_val = vals.clone();
    let mut g = 0;
    for k in 1..np {
        if pbest_val[k] < pbest_val[g] - TIE_TOL {
            g = k;
        }
    }
    let mut gbest = pbest[g].clone();
    let mut gbest_val = pbest_val[g];

    for _ in 0..sw.iters {
        for k in 0..np {
            for j in 0..dim {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let v = sw.inertia * vel[k][j]
                    + sw.cognitive * r1 * (pbest[k][j] - pos[k][j])
                    + sw.social * r2 * (gbest[j] - pos[k][j]);
                vel[k][j] = v.clamp(-vmax[j], vmax[j]);
                pos[k][j] += vel[k][j];
            }
            space.project(&mut pos[k]);
        }
        vals = eval_all(&pos);
        evals += np;
        for k in 0..np {
            if vals[k] < pbest_val[k] {
                pbest_val[k] = vals[k];
                pbest[k] = pos[k].clone();
                if vals[k] < gbest_val - TIE_TOL {
                    gbest_val = vals[k];
                    gbest = pos[k].clone();
                }
            }
        }
    }
    OptimResult {
        value: gbest_val,
        argument: Argument::Coords(gbest),
        iterations: sw.iters,
        converged: false,
        seed_used: config.seed,
        evaluations: evals,
        best_restart: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropic::entropy_bits;
    use crate::linalg::{diag_real, ket, projector};

    fn quick() -> OptimConfig {
        OptimConfig {
            restarts: 5,
            max_iters: 3000,
            ..OptimConfig::default()
        }
    }

    #[test]
    fn golden_quadratic_and_binary_entropy() {
        let res = golden_max(|u| -(u - 0.3) * (u - 0.3), 0.0, 1.0, 1e-10).unwrap();
        assert!((res.argument.as_scalar().unwrap() - 0.3).abs() < 1e-9);
        assert!(res.value.abs() < 1e-18);
        let res = golden_max(crate::entropic::binary_entropy, 0.0, 1.0, 1e-10).unwrap();
        assert!((res.argument.as_scalar().unwrap() - 0.5).abs() < 1e-5);
        assert!((res.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn golden_rejects_non_finite() {
        assert!(matches!(
            golden_max(|_| f64::NAN, 0.0, 1.0, 1e-6),
            Err(Error::NonFinite(_))
        ));
        assert!(golden_max(|x| x, 1.0, 0.0, 1e-6).is_err());
    }

    #[test]
    fn density_ascent_linear_objective() {
        let h = diag_real(&[1.0, 2.0, 3.0]);
        let res = density_ascent(
            3,
            |rho| crate::linalg::trace_product_re(&h, rho),
            |_| h.clone(),
            &quick(),
            &[],
        );
        assert!((res.value - 3.0).abs() < 1e-6);
        let rho = res.argument.as_matrix().unwrap();
        assert!((rho - projector(3, 2)).norm() < 1e-3);
    }

    #[test]
    fn density_ascent_entropy() {
        let grad = |rho: &CMat| -> CMat {
            let e = hermitian_eigensystem(&hermitian_part(rho)).unwrap();
            e.apply(|x| -(x.max(1e-300)).log2())
        };
        let res = density_ascent(3, entropy_bits, grad, &quick(), &[]);
        assert!((res.value - 3f64.log2()).abs() < 1e-9);
    }

    #[test]
    fn sphere_rayleigh_quotient() {
        let h = diag_real(&[1.0, 2.0]);
        let res = sphere_min(
            &[2],
            |v| (v[0].adjoint() * &h * &v[0])[(0, 0)].re,
            |v| vec![&h * &v[0] * r(2.0)],
            &quick(),
            &[],
        );
        assert!((res.value - 1.0).abs() < 1e-10);
        let v = &res.argument.as_vectors().unwrap()[0];
        assert!((v[0].norm() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn sphere_orthogonal_pair() {
        let res = sphere_min(
            &[2, 2],
            |v| v[0].dotc(&v[1]).norm_sqr(),
            |v| {
                let ip = v[0].dotc(&v[1]);
                vec![&v[1] * (ip.conj() * r(2.0)), &v[0] * (ip * r(2.0))]
            },
            &quick(),
            &[vec![ket(2, 0), ket(2, 0) + ket(2, 1)]],
        );
        assert!(res.value < 1e-12);
    }

    #[test]
    fn swarm_quadratic_and_rastrigin() {
        let cfg = OptimConfig {
            swarm: SwarmConfig {
                iters: 300,
                ..SwarmConfig::default()
            },
            ..quick()
        };
        let res = particle_swarm(
            |x| (x[0] - 1.0).powi(2),
            &SearchSpace::Bounds(vec![(-5.0, 5.0)]),
            &cfg,
            &[],
        );
        assert!(res.value < 1e-10);
        let rastrigin = |x: &[f64]| {
            20.0 + x
                .iter()
                .map(|v| v * v - 10.0 * (2.0 * std::f64::consts::PI * v).cos())
                .sum::<f64>()
        };
        let cfg = OptimConfig {
            swarm: SwarmConfig::default(),
            ..quick()
        };
        let res = particle_swarm(
            rastrigin,
            &SearchSpace::Bounds(vec![(-5.12, 5.12); 2]),
            &cfg,
            &[],
        );
        assert!(res.value < 1e-3, "rastrigin best {}", res.value);
    }

    #[test]
    fn swarm_is_deterministic() {
        let cfg = OptimConfig {
            swarm: SwarmConfig {
                iters: 50,
                ..SwarmConfig::default()
            },
            ..quick()
        };
        let f = |x: &[f64]| x.iter().map(|v| (v - 0.2).powi(2)).sum::<f64>();
        let space = SearchSpace::Spheres(vec![2, 3]);
        let a = particle_swarm(f, &space, &cfg, &[]);
        let b = particle_swarm(f, &space, &cfg, &[]);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn config_validation() {
        assert!(OptimConfig::default().validate().is_ok());
        assert!(OptimConfig {
            restarts: 0,
            ..OptimConfig::default()
        }
        .validate()
        .is_err());
        assert!(OptimConfig {
            grad_tol: 2.0,
            ..OptimConfig::default()
        }
        .validate()
        .is_err());
    }
}
