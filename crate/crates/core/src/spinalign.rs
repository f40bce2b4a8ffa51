//! Entropy minimization over "spin" states mixed with a fixed background state.
//!
//! An instance fixes `n` sites, a site state `Q` and weights `x_M` over subsets
//! `M ⊆ {0..n-1}` (bitmask, bit `i` = spin `i`). An assignment picks a state `ω_M`
//! on the spins of every nonempty `M`; the mixture is
//! `κ = Σ_M x_M ω_M ⊗ Q^{⊗M^c}` with every spin kept in its own tensor slot.
//! The alignment conjecture says `S(κ)` is minimized by `ω_M = [γ]^{⊗|M|}`,
//! `γ` the top eigenvector of `Q`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::Exp1;

use crate::entropic::{log2_on_support, shannon_bits};
use crate::error::{Error, Result};
use crate::linalg::{
    diag_real, dyad, eigenvalues_hermitian, hermitian_eigensystem, identity, r, random_density,
    random_pure, tensor_all, tensor_vec, trace, CMat, CVec,
};
use crate::optimize::{
    coords_to_vectors, particle_swarm, rng_for, sphere_min, vectors_to_coords, Argument,
    OptimConfig, OptimResult, SearchSpace,
};

/// Largest total dimension `site_dim^n` accepted.
pub const MAX_STATE_DIM: usize = 64;
const WEIGHT_TOL: f64 = 1e-12;
/// A search counts as a counterexample when it beats the aligned value by this much.
pub const COUNTEREXAMPLE_MARGIN: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct AlignmentInstance {
    n: usize,
    site_state: CMat,
    weights: Vec<f64>,
}

impl AlignmentInstance {
    /// `weights[mask]` is `x_M`; there must be exactly `2^n` of them.
    pub fn new(n: usize, site_state: CMat, weights: Vec<f64>) -> Result<Self> {
        let d = site_state.nrows();
        if n == 0 || d < 2 || site_state.ncols() != d {
            return Err(Error::Dimension(format!(
                "need n >= 1 and a square site state of size >= 2, got n = {n}, {d}x{}",
                site_state.ncols()
            )));
        }
        if d.checked_pow(n as u32).is_none_or(|t| t > MAX_STATE_DIM) {
            return Err(Error::Unsupported(format!(
                "site_dim^n must not exceed {MAX_STATE_DIM}"
            )));
        }
        if weights.len() != 1 << n {
            return Err(Error::Dimension(format!(
                "expected {} subset weights, got {}",
                1 << n,
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "subset weight {w} is negative"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidParameter(format!(
                "subset weights sum to {total}"
            )));
        }
        if !crate::channels::is_density(&site_state, 1e-10) {
            return Err(Error::InvalidParameter(
                "site state must be a density operator".into(),
            ));
        }
        Ok(AlignmentInstance {
            n,
            site_state,
            weights,
        })
    }

    /// Qubit instance with `Q = s[0] + (1 − s)[1]`.
    pub fn qubit(n: usize, s: f64, weights: Vec<f64>) -> Result<Self> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidParameter(format!("s = {s} outside [0, 1]")));
        }
        Self::new(n, diag_real(&[s, 1.0 - s]), weights)
    }

    /// Weights drawn uniformly from the simplex over all `2^n` subsets.
    pub fn random_weights<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
        let raw: Vec<f64> = (0..1usize << n)
            .map(|_| rng.sample::<f64, _>(Exp1))
            .collect();
        let total: f64 = raw.iter().sum();
        let mut w: Vec<f64> = raw.iter().map(|v| v / total).collect();
        // Push the rounding error into the largest entry so the sum is 1 to machine precision.
        let err = 1.0 - w.iter().sum::<f64>();
        let k = (0..w.len())
            .max_by(|&a, &b| w[a].total_cmp(&w[b]))
            .unwrap_or(0);
        w[k] += err;
        w
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn site_dim(&self) -> usize {
        self.site_state.nrows()
    }

    pub fn site_state(&self) -> &CMat {
        &self.site_state
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn state_dim(&self) -> usize {
        self.site_dim().pow(self.n as u32)
    }

    /// Sphere dimensions of a pure assignment, masks `1..2^n` in counter order.
    pub fn shape(&self) -> Vec<usize> {
        (1..1usize << self.n)
            .map(|m| self.site_dim().pow(m.count_ones()))
            .collect()
    }

    /// Top eigenvector of the site state.
    pub fn aligned_vector(&self) -> CVec {
        let e = hermitian_eigensystem(&self.site_state).expect("site state is Hermitian");
        e.eigenvectors.column(self.site_dim() - 1).into_owned()
    }

    /// Parses `n=<int> s=<real>` or `n=<int> upsilon=<comma reals>` followed by
    /// `M=<bitmask> x=<real>` lines. Blank lines and `#` comments are skipped;
    /// subsets that are not listed get weight zero.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut header: Option<(usize, CMat)> = None;
        let mut entries = Vec::new();
        for line in text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
        {
            let fields = parse_fields(line)?;
            match fields.first().map(|(k, _)| *k) {
                Some("n") => {
                    let n = field(&fields, "n")?
                        .parse::<usize>()
                        .map_err(|e| Error::Parse(format!("n: {e}")))?;
                    let site = if let Ok(s) = field(&fields, "s") {
                        let s = parse_real(s)?;
                        diag_real(&[s, 1.0 - s])
                    } else {
                        let vals = field(&fields, "upsilon")?
                            .split(',')
                            .map(parse_real)
                            .collect::<Result<Vec<_>>>()?;
                        diag_real(&vals)
                    };
                    header = Some((n, site));
                }
                Some("M") => {
                    let mask = field(&fields, "M")?
                        .parse::<usize>()
                        .map_err(|e| Error::Parse(format!("M: {e}")))?;
                    entries.push((mask, parse_real(field(&fields, "x")?)?));
                }
                _ => {
                    // Replay files carry extra records after the instance.
                }
            }
        }
        let (n, site) = header.ok_or_else(|| Error::Parse("missing `n=` header line".into()))?;
        if n == 0 || n > 16 {
            return Err(Error::Parse(format!("n = {n} out of range")));
        }
        let mut weights = vec![0.0; 1 << n];
        for (mask, x) in entries {
            let slot = weights
                .get_mut(mask)
                .ok_or_else(|| Error::Parse(format!("mask {mask} has bits beyond n = {n}")))?;
            *slot += x;
        }
        Self::new(n, site, weights)
    }

    /// Inverse of [`AlignmentInstance::from_text`]; only diagonal site states can be written.
    pub fn to_text(&self) -> Result<String> {
        let d = self.site_dim();
        let offdiag = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .filter(|(i, j)| i != j);
        if offdiag
            .map(|(i, j)| self.site_state[(i, j)].norm())
            .any(|v| v > 0.0)
        {
            return Err(Error::Unsupported(
                "instance files store diagonal site states only".into(),
            ));
        }
        let diag: Vec<f64> = (0..d).map(|i| self.site_state[(i, i)].re).collect();
        let mut out = format!("n={}", self.n);
        if d == 2 && diag[0] + diag[1] == 1.0 {
            write!(out, " s={}", diag[0]).unwrap();
        } else {
            let list: Vec<String> = diag.iter().map(|v| v.to_string()).collect();
            write!(out, " upsilon={}", list.join(",")).unwrap();
        }
        out.push('\n');
        for (mask, x) in self.weights.iter().enumerate().filter(|(_, x)| **x != 0.0) {
            writeln!(out, "M={mask} x={x}").unwrap();
        }
        Ok(out)
    }
}

fn parse_fields(line: &str) -> Result<Vec<(&str, &str)>> {
    line.split_whitespace()
        .map(|tok| {
            tok.split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{tok}`")))
        })
        .collect()
}

fn field<'a>(fields: &[(&str, &'a str)], key: &str) -> Result<&'a str> {
    fields
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::Parse(format!("missing `{key}=`")))
}

fn parse_real(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("`{s}`: {e}")))
}

/// States `ω_M` indexed by mask; entry 0 is the trivial `1×1` state.
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    pub states: Vec<CMat>,
}

impl Assignment {
    /// `ω_M = [γ]^{⊗|M|}`.
    pub fn aligned(instance: &AlignmentInstance) -> Self {
        Self::from_vectors(&aligned_vectors(instance))
    }

    /// Pure states from unit vectors for masks `1..2^n` in counter order.
    pub fn from_vectors(vectors: &[CVec]) -> Self {
        let mut states = vec![identity(1)];
        states.extend(vectors.iter().map(|v| dyad(&(v / r(v.norm())))));
        Assignment { states }
    }

    pub fn random_pure<R: Rng + ?Sized>(instance: &AlignmentInstance, rng: &mut R) -> Self {
        let vectors: Vec<CVec> = instance
            .shape()
            .iter()
            .map(|&d| random_pure(d, rng))
            .collect();
        Self::from_vectors(&vectors)
    }
}

/// Index bookkeeping for embedding `ω_M ⊗ Q^{⊗M^c}` into the full space.
struct Layout {
    dim: usize,
    blocks: Vec<Block>,
}

struct Block {
    size: usize,
    inner: Vec<usize>,
    outer: Vec<usize>,
    background: CMat,
}

impl Layout {
    fn new(instance: &AlignmentInstance) -> Self {
        let (n, d) = (instance.n, instance.site_dim());
        let dim = instance.state_dim();
        let digit = |i: usize, k: usize| (i / d.pow((n - 1 - k) as u32)) % d;
        let blocks = (0..1usize << n)
            .map(|mask| {
                let index = |i: usize, inside: bool| {
                    (0..n)
                        .filter(|k| (mask >> k & 1 == 1) == inside)
                        .fold(0, |acc, k| acc * d + digit(i, k))
                };
                let outside = n - mask.count_ones() as usize;
                let factors: Vec<&CMat> = vec![&instance.site_state; outside];
                Block {
                    size: d.pow(mask.count_ones()),
                    inner: (0..dim).map(|i| index(i, true)).collect(),
                    outer: (0..dim).map(|i| index(i, false)).collect(),
                    background: if outside == 0 {
                        identity(1)
                    } else {
                        tensor_all(&factors)
                    },
                }
            })
            .collect();
        Layout { dim, blocks }
    }

    fn assemble(&self, weights: &[f64], states: &[CMat]) -> CMat {
        let mut kappa = CMat::zeros(self.dim, self.dim);
        for ((b, &x), w) in self.blocks.iter().zip(weights).zip(states) {
            if x == 0.0 {
                continue;
            }
            for j in 0..self.dim {
                for i in 0..self.dim {
                    kappa[(i, j)] +=
                        r(x) * w[(b.inner[i], b.inner[j])] * b.background[(b.outer[i], b.outer[j])];
                }
            }
        }
        kappa
    }

    /// `Σ L[(a,c),(b,e)] Q[e,c]`: the operator `G` with `tr(L (ω ⊗ Q)) = tr(G ω)`.
    fn reduce(&self, mask: usize, l: &CMat) -> CMat {
        let b = &self.blocks[mask];
        let mut g = CMat::zeros(b.size, b.size);
        for j in 0..self.dim {
            for i in 0..self.dim {
                g[(b.inner[i], b.inner[j])] += l[(i, j)] * b.background[(b.outer[j], b.outer[i])];
            }
        }
        g
    }
}

/// `κ = Σ_M x_M ω_M ⊗ Q^{⊗M^c}`.
pub fn assemble_state(instance: &AlignmentInstance, assignment: &Assignment) -> Result<CMat> {
    let n_masks = 1usize << instance.n;
    if assignment.states.len() != n_masks {
        return Err(Error::Dimension(format!(
            "expected {n_masks} states, got {}",
            assignment.states.len()
        )));
    }
    for (mask, w) in assignment.states.iter().enumerate() {
        let d = instance.site_dim().pow(mask.count_ones());
        if w.nrows() != d || w.ncols() != d {
            return Err(Error::Dimension(format!(
                "state for mask {mask} must be {d}x{d}, got {}x{}",
                w.nrows(),
                w.ncols()
            )));
        }
    }
    Ok(Layout::new(instance).assemble(&instance.weights, &assignment.states))
}

/// `S(κ)` at the aligned assignment.
pub fn conjectured_value(instance: &AlignmentInstance) -> f64 {
    let kappa =
        Layout::new(instance).assemble(&instance.weights, &Assignment::aligned(instance).states);
    shannon_bits(&eigenvalues_hermitian(&kappa))
}

/// Single spin: the optimum is the top eigenprojector of `Q`.
pub fn n1_solution(x1: f64, site_state: &CMat) -> Result<(f64, CMat)> {
    if !(0.0..=1.0).contains(&x1) {
        return Err(Error::InvalidParameter(format!("x1 = {x1} outside [0, 1]")));
    }
    let inst = AlignmentInstance::new(1, site_state.clone(), vec![1.0 - x1, x1])?;
    let omega = dyad(&inst.aligned_vector());
    let kappa = &omega * r(x1) + site_state * r(1.0 - x1);
    Ok((shannon_bits(&eigenvalues_hermitian(&kappa)), omega))
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub optim: OptimConfig,
    /// Also run a particle swarm after the gradient restarts.
    pub swarm: bool,
    /// Agreement tolerance for [`SearchOutcome::matches_conjecture`].
    pub tolerance: f64,
    /// Directory receiving replay files for counterexamples.
    pub replay_dir: Option<PathBuf>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            optim: OptimConfig::default(),
            swarm: true,
            tolerance: 1e-5,
            replay_dir: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    /// Best value over both searches; the argument holds the unit vectors per mask.
    pub best: OptimResult,
    pub conjectured: f64,
    pub matches_conjecture: bool,
    /// Set when `best < conjectured − 1e−6` and a replay file was written.
    pub replay_file: Option<PathBuf>,
}

impl SearchOutcome {
    pub fn is_counterexample(&self) -> bool {
        self.best.value < self.conjectured - COUNTEREXAMPLE_MARGIN
    }
}

/// Minimizes `S(κ)` over pure assignments. The aligned assignment is restart 0 of
/// the gradient search and particle 0 of the swarm.
pub fn search_minimum(
    instance: &AlignmentInstance,
    config: &SearchConfig,
) -> Result<SearchOutcome> {
    let layout = Layout::new(instance);
    let shape = instance.shape();
    let (objective, gradient) = entropy_and_gradient(instance, &layout);
    let aligned = aligned_vectors(instance);
    let conjectured = objective(&aligned);
    let mut best = sphere_min(
        &shape,
        &objective,
        &gradient,
        &config.optim,
        std::slice::from_ref(&aligned),
    );
    if config.swarm {
        let space = SearchSpace::Spheres(shape.clone());
        let swarm = particle_swarm(
            |x| objective(&coords_to_vectors(&shape, x)),
            &space,
            &config.optim,
            &[vectors_to_coords(&aligned)],
        );
        let evaluations = best.evaluations + swarm.evaluations;
        if swarm.value < best.value {
            let coords = swarm.argument.as_coords().unwrap_or_default();
            best = OptimResult {
                argument: Argument::Vectors(coords_to_vectors(&shape, coords)),
                ..swarm
            };
        }
        best.evaluations = evaluations;
    }

    let mut outcome = SearchOutcome {
        matches_conjecture: (best.value - conjectured).abs() <= config.tolerance,
        best,
        conjectured,
        replay_file: None,
    };
    if outcome.is_counterexample() {
        if let Some(dir) = &config.replay_dir {
            outcome.replay_file = Some(write_replay(dir, instance, &outcome)?);
        }
    }
    Ok(outcome)
}

fn entropy_and_gradient<'a>(
    instance: &'a AlignmentInstance,
    layout: &'a Layout,
) -> (
    impl Fn(&[CVec]) -> f64 + Sync + 'a,
    impl Fn(&[CVec]) -> Vec<CVec> + Sync + 'a,
) {
    let weights = &instance.weights;
    let kappa_of = move |v: &[CVec]| layout.assemble(weights, &Assignment::from_vectors(v).states);
    let objective = move |v: &[CVec]| shannon_bits(&eigenvalues_hermitian(&kappa_of(v)));
    let gradient = move |v: &[CVec]| -> Vec<CVec> {
        let kappa = kappa_of(v);
        // S = −tr κ log₂κ, so dS = tr(L dκ) with L = −log₂κ − I/ln 2.
        let l = -(log2_on_support(&kappa) + identity(layout.dim) * r(std::f64::consts::LOG2_E));
        v.iter()
            .enumerate()
            .map(|(k, vk)| {
                let mask = k + 1;
                if weights[mask] == 0.0 {
                    return CVec::zeros(vk.len());
                }
                layout.reduce(mask, &l) * vk * r(2.0 * weights[mask])
            })
            .collect()
    };

    (objective, gradient)
}

fn aligned_vectors(instance: &AlignmentInstance) -> Vec<CVec> {
    let g = instance.aligned_vector();
    (1..1usize << instance.n)
        .map(|m| (1..m.count_ones()).fold(g.clone(), |acc, _| tensor_vec(&acc, &g)))
        .collect()
}

/// Writes the instance, seed, values and assignment coordinates to
/// `replay-<seed>-<hash>.txt` through a temporary file and a rename.
fn write_replay(
    dir: &Path,
    instance: &AlignmentInstance,
    outcome: &SearchOutcome,
) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut text = instance.to_text()?;
    let vectors = outcome.best.argument.as_vectors().unwrap_or_default();
    let coords: Vec<String> = vectors_to_coords(vectors)
        .iter()
        .map(|v| v.to_string())
        .collect();
    writeln!(text, "seed={}", outcome.best.seed_used).unwrap();
    writeln!(
        text,
        "best={} conjectured={}",
        outcome.best.value, outcome.conjectured
    )
    .unwrap();
    writeln!(text, "coords={}", coords.join(",")).unwrap();
    let tag = text.bytes().fold(0xcbf29ce484222325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x100000001b3)
    });
    let path = dir.join(format!("replay-{}-{tag:016x}.txt", outcome.best.seed_used));
    let tmp = dir.join(format!(".replay-{tag:016x}.tmp"));
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, &path)?;
    Ok(path)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Renyi2Report {
    /// `tr κ²` at the aligned assignment.
    pub aligned_purity: f64,
    /// Largest `tr κ²` over the random pure assignments.
    pub best_random_purity: f64,
    pub trials: usize,
    /// Random assignments exceeding the aligned purity by more than `1e−12`.
    pub violations: usize,
}

impl Renyi2Report {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Compares the purity of the aligned assignment with random pure assignments.
pub fn renyi2_alignment_check(
    instance: &AlignmentInstance,
    trials: usize,
    seed: u64,
) -> Renyi2Report {
    let layout = Layout::new(instance);
    let purity = |a: &Assignment| {
        let k = layout.assemble(&instance.weights, &a.states);
        k.iter().map(|z| z.norm_sqr()).sum::<f64>()
    };
    let aligned_purity = purity(&Assignment::aligned(instance));
    let mut rng = rng_for(seed, 0);
    let mut best_random_purity = f64::NEG_INFINITY;
    let mut violations = 0;
    for _ in 0..trials {
        let p = purity(&Assignment::random_pure(instance, &mut rng));
        best_random_purity = best_random_purity.max(p);
        if p > aligned_purity + 1e-12 {
            violations += 1;
        }
    }
    Renyi2Report {
        aligned_purity,
        best_random_purity,
        trials,
        violations,
    }
}

/// `tr[(|μ⟩⟨μ|₁₂ ⊗ Θ₃)(Z₁ ⊗ |ν⟩⟨ν|₂₃)]` with `Θ` on system 3 and `Z` on system 1.
pub fn lemma_objective(theta: &CMat, z: &CMat, mu: &CVec, nu: &CVec) -> Result<f64> {
    let (d1, d3) = (z.nrows(), theta.nrows());
    if mu.len() % d1 != 0 || d1 == 0 || d3 == 0 {
        return Err(Error::Dimension("mu must live on systems 1 and 2".into()));
    }
    let d2 = mu.len() / d1;
    if nu.len() != d2 * d3 {
        return Err(Error::Dimension(format!(
            "nu has length {}, expected {}",
            nu.len(),
            d2 * d3
        )));
    }
    let left = tensor_all(&[&dyad(mu), theta]);
    let right = tensor_all(&[z, &dyad(nu)]);
    Ok(trace(&(left * right)).re)
}

/// The maximizer from the lemma: `|μ⟩ = |ζ⟩ ⊗ |ξ⟩`, `|ν⟩ = |ξ⟩ ⊗ |θ⟩` with `ζ`, `θ`
/// top eigenvectors of `Z` (system 1) and `Θ` (system 3), `ξ` any unit vector.
pub fn lemma_maximizer(theta: &CMat, z: &CMat, xi: &CVec) -> Result<(CVec, CVec)> {
    let top = |m: &CMat| -> Result<CVec> {
        let e = hermitian_eigensystem(m)?;
        Ok(e.eigenvectors.column(m.nrows() - 1).into_owned())
    };
    let xi = xi / r(xi.norm());
    Ok((tensor_vec(&top(z)?, &xi), tensor_vec(&xi, &top(theta)?)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaReport {
    pub dims: (usize, usize, usize),
    pub trials: usize,
    /// Samples whose objective exceeded the proposed value by more than `1e−12`.
    pub violations: usize,
    /// Largest `|proposed − λmax(Θ) λmax(Z)|` seen.
    pub max_bound_error: f64,
    /// Largest sampled objective minus the proposed value.
    pub max_excess: f64,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.max_bound_error <= 1e-12
    }
}

/// Draws random PSD `Θ, Z` per trial, evaluates the proposed maximizer and one
/// random pair `(μ, ν)`.
pub fn tripartite_lemma_check(
    dims: (usize, usize, usize),
    trials: usize,
    seed: u64,
) -> Result<LemmaReport> {
    let (d1, d2, d3) = dims;
    if d1 == 0 || d2 == 0 || d3 == 0 {
        return Err(Error::InvalidParameter(format!(
            "dimensions must be positive, got {dims:?}"
        )));
    }
    let mut rng = rng_for(seed, 0);
    let mut report = LemmaReport {
        dims,
        trials,
        violations: 0,
        max_bound_error: 0.0,
        max_excess: f64::NEG_INFINITY,
    };
    for _ in 0..trials {
        let theta = random_density(d3, &mut rng) * r(rng.random_range(0.5..2.0));
        let z = random_density(d1, &mut rng) * r(rng.random_range(0.5..2.0));
        let (mu0, nu0) = lemma_maximizer(&theta, &z, &random_pure(d2, &mut rng))?;
        let proposed = lemma_objective(&theta, &z, &mu0, &nu0)?;
        let bound = max_eig(&theta) * max_eig(&z);
        report.max_bound_error = report.max_bound_error.max((proposed - bound).abs());
        let sample = lemma_objective(
            &theta,
            &z,
            &random_pure(d1 * d2, &mut rng),
            &random_pure(d2 * d3, &mut rng),
        )?;
        report.max_excess = report.max_excess.max(sample - proposed);
        if sample > proposed + 1e-12 {
            report.violations += 1;
        }
    }
    Ok(report)
}

fn max_eig(m: &CMat) -> f64 {
    eigenvalues_hermitian(m).last().copied().unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let inst = AlignmentInstance::qubit(2, 0.3, AlignmentInstance::random_weights(2, &mut rng))
            .unwrap();
        let layout = Layout::new(&inst);
        let (f, g) = entropy_and_gradient(&inst, &layout);
        let v: Vec<CVec> = inst
            .shape()
            .iter()
            .map(|&d| random_pure(d, &mut rng))
            .collect();
        let grad = g(&v);
        let h = 1e-6;
        for k in 0..v.len() {
            for i in 0..v[k].len() {
                for dir in [crate::linalg::c(1.0, 0.0), crate::linalg::c(0.0, 1.0)] {
                    let mut plus = v.clone();
                    plus[k][i] += dir * h;
                    let mut minus = v.clone();
                    minus[k][i] -= dir * h;
                    // f normalizes its inputs, so compare against the tangent projection.
                    let fd = (f(&plus) - f(&minus)) / (2.0 * h);
                    let radial = v[k].dotc(&grad[k]).re;
                    let projected = &grad[k] - &v[k] * r(radial);
                    let analytic = (projected[i].conj() * dir).re;
                    let radial_part = (v[k][i].conj() * dir).re * radial;
                    assert!(
                        (fd - analytic).abs() < 1e-5 + 1e-5 * radial_part.abs(),
                        "{k},{i}: {fd} vs {analytic}"
                    );
                }
            }
        }
    }
}
