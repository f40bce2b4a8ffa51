//! Semidefinite upper bounds on quantum, classical and private capacities.

use crate::channels::{ChannelPair, Leg};
use crate::error::{Error, Result};
use crate::linalg::{c, identity, ket, r, tensor_product, CMat, CVec};
use crate::sdp::{LmiBuilder, LmiSolution, MatrixVar, SdpSettings, SdpStatus};

/// Accepted relative gap when the solver stalls. The multi-level private program
/// loses primal accuracy near `1e−8` in the Newton solves, which leaves a gap of a
/// few `1e−6`; the larger objective value is reported, so the bound stays valid.
const STALL_GAP: f64 = 1e-5;

/// Optimal value of a bound program.
#[derive(Clone, Debug, PartialEq)]
pub struct SdpBound {
    /// Optimum of the program (e.g. `Γ`, not `log₂ Γ`). Of the two objective values
    /// bracketing the optimum, the larger one is reported so that the result stays an
    /// upper bound for maximization and minimization programs alike.
    pub value: f64,
    pub log2: f64,
    /// Duality gap reported by the solver.
    pub gap: f64,
    pub iterations: usize,
    pub status: SdpStatus,
}

impl SdpBound {
    fn from_solution(sol: &LmiSolution) -> Result<Self> {
        let rel_gap = (sol.value - sol.bound).abs() / (1.0 + sol.value.abs());
        let usable = match sol.status {
            SdpStatus::Optimal => true,
            SdpStatus::MaxIters => rel_gap <= STALL_GAP,
            SdpStatus::Infeasible => false,
        };
        if !usable {
            return Err(Error::Solver(format!(
                "status {:?} after {} iterations (relative gap {rel_gap:.2e})",
                sol.status, sol.iterations
            )));
        }
        let value = sol.value.max(sol.bound);
        Ok(SdpBound {
            value,
            log2: value.log2(),
            gap: sol.gap,
            iterations: sol.iterations,
            status: sol.status,
        })
    }
}

/// Partial transpose of the second factor of `a ⊗ b`.
pub(crate) fn transpose_second(x: &CMat, da: usize, db: usize) -> CMat {
    CMat::from_fn(da * db, da * db, |row, col| {
        let (i, k) = (row / db, row % db);
        let (j, l) = (col / db, col % db);
        x[(i * db + l, j * db + k)]
    })
}

/// `tr_b` of an operator on `a ⊗ b`.
pub(crate) fn trace_second(x: &CMat, da: usize, db: usize) -> CMat {
    CMat::from_fn(da, da, |i, j| {
        (0..db).map(|k| x[(i * db + k, j * db + k)]).sum()
    })
}

/// `I_a ⊗ x`.
fn lift_second(x: &CMat, da: usize) -> CMat {
    tensor_product(&identity(da), x)
}

/// `x ⊗ I_b`.
fn lift_first(x: &CMat, db: usize) -> CMat {
    tensor_product(x, &identity(db))
}

fn choi_dims(pair: &ChannelPair) -> (CMat, usize, usize) {
    (pair.choi(Leg::Direct), pair.d_in(), pair.d_out(Leg::Direct))
}

/// `Γ(B) = max tr(R J)` over `R ⪰ 0`, states `ρ` with `−ρ⊗I ⪯ T_b(R) ⪯ ρ⊗I`.
pub fn gamma_bound(pair: &ChannelPair, settings: &SdpSettings) -> Result<SdpBound> {
    let (j, da, db) = choi_dims(pair);
    let n = da * db;
    let mut lmi = LmiBuilder::new();
    let rv = lmi.hermitian(n);
    let rho = lmi.hermitian(da);
    lmi.add_objective_trace(&rv, &j);
    lmi.add_trace_equality(&rho, &identity(da), 1.0);

    let b = lmi.block(n);
    lmi.add_map(b, &rv, |x| x.clone())?;
    let b = lmi.block(da);
    lmi.add_map(b, &rho, |x| x.clone())?;
    for sign in [1.0, -1.0] {
        let b = lmi.block(n);
        lmi.add_map(b, &rho, |x| lift_first(x, db))?;
        lmi.add_map(b, &rv, |x| transpose_second(x, da, db) * r(-sign))?;
    }
    SdpBound::from_solution(&lmi.solve(settings)?)
}

/// Diamond norm of `T ∘ B`.
///
/// The usual program has two blocks `Y, Z` with objective `(‖Y_a‖ + ‖Z_a‖)/2`.
/// Swapping `Y` and `Z` preserves feasibility, so averaging shows `Y = Z` loses
/// nothing; then `[[Y, −X], [−X, Y]] ⪰ 0` splits into `Y ± X ⪰ 0`.
pub fn transposition_bound(pair: &ChannelPair, settings: &SdpSettings) -> Result<SdpBound> {
    let (j, da, db) = choi_dims(pair);
    let n = da * db;
    let tj = transpose_second(&j, da, db);
    let mut lmi = LmiBuilder::new();
    lmi.minimize();
    let t = lmi.scalar();
    let y = lmi.hermitian(n);
    lmi.add_objective(t, 1.0);
    for sign in [1.0, -1.0] {
        let b = lmi.block(n);
        lmi.add_map(b, &y, |x| x.clone())?;
        lmi.add_constant(b, &(&tj * r(sign)))?;
    }
    let b = lmi.block(da);
    lmi.add_scalar_term(b, t, &identity(da))?;
    lmi.add_map(b, &y, |x| -trace_second(x, da, db))?;
    SdpBound::from_solution(&lmi.solve(settings)?)
}

/// `β(B) = min tr S` over Hermitian `R, S` with `−R ⪯ T_b(J) ⪯ R` and
/// `−I⊗S ⪯ T_b(R) ⪯ I⊗S`.
pub fn beta_bound(pair: &ChannelPair, settings: &SdpSettings) -> Result<SdpBound> {
    let (j, da, db) = choi_dims(pair);
    let n = da * db;
    let tj = transpose_second(&j, da, db);
    let mut lmi = LmiBuilder::new();
    lmi.minimize();
    let rv = lmi.hermitian(n);
    let s = lmi.hermitian(db);
    lmi.add_objective_trace(&s, &identity(db));
    for sign in [1.0, -1.0] {
        let b = lmi.block(n);
        lmi.add_map(b, &rv, |x| x.clone())?;
        lmi.add_constant(b, &(&tj * r(-sign)))?;
        let b = lmi.block(n);
        lmi.add_map(b, &s, |x| lift_second(x, da))?;
        lmi.add_map(b, &rv, |x| transpose_second(x, da, db) * r(-sign))?;
    }
    SdpBound::from_solution(&lmi.solve(settings)?)
}

/// Upper bound on the private capacity together with the program optimum `U`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrivateUpperBound {
    /// `l 2^l − (2^l+1) log₂(2^l+1) + (2^l+1) log₂ U`.
    pub value: f64,
    pub program: SdpBound,
    pub levels: u32,
    pub witnesses: usize,
}

/// Computational basis followed by the Fourier basis `(1/√d) Σ_j ω^{jk} |j⟩`.
pub fn default_witnesses(dim: usize) -> Vec<CVec> {
    let mut out: Vec<CVec> = (0..dim).map(|i| ket(dim, i)).collect();
    let norm = 1.0 / (dim as f64).sqrt();
    for k in 0..dim {
        out.push(CVec::from_fn(dim, |j, _| {
            let phase = 2.0 * std::f64::consts::PI * (j * k) as f64 / dim as f64;
            c(phase.cos() * norm, phase.sin() * norm)
        }));
    }
    out
}

fn hermitian_sum(z: &CMat) -> CMat {
    z + z.adjoint()
}

/// `[[top_left, off], [off†, bottom_right]]` assembled from variable images.
fn place(top: Option<&CMat>, off: Option<&CMat>, bottom: Option<&CMat>, n: usize) -> CMat {
    let mut m = CMat::zeros(2 * n, 2 * n);
    if let Some(t) = top {
        m.view_mut((0, 0), (n, n)).copy_from(t);
    }
    if let Some(k) = off {
        m.view_mut((0, n), (n, n)).copy_from(k);
        m.view_mut((n, 0), (n, n)).copy_from(&k.adjoint());
    }
    if let Some(b) = bottom {
        m.view_mut((n, n), (n, n)).copy_from(b);
    }
    m
}

/// Private-capacity bound from a Rényi-type conic program with divergence order
/// `1 + 2^{−levels}`, where block positivity of `ρ⊗I − (Z₀ + Z₀†)` is relaxed to
/// positivity on the conjugated witness states.
pub fn private_upper_bound(
    pair: &ChannelPair,
    levels: u32,
    witnesses: &[CVec],
    settings: &SdpSettings,
) -> Result<PrivateUpperBound> {
    if levels == 0 || levels > 20 {
        return Err(Error::InvalidParameter(format!(
            "levels must lie in 1..=20, got {levels}"
        )));
    }
    let (j, da, db) = choi_dims(pair);
    for w in witnesses {
        if w.len() != da || (w.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "witness states must be unit vectors in dimension {da}"
            )));
        }
    }
    let n = da * db;
    let l = levels as usize;
    let mut lmi = LmiBuilder::new();
    let rho = lmi.hermitian(da);
    let k = lmi.general(n, n);
    let zs: Vec<MatrixVar> = (0..=l).map(|_| lmi.general(n, n)).collect();
    let ws: Vec<MatrixVar> = (0..l).map(|_| lmi.hermitian(n)).collect();

    lmi.add_trace_equality(&rho, &identity(da), 1.0);
    lmi.add_objective_trace(&k, &(&j * r(2.0)));
    for w in &ws {
        lmi.add_objective_trace(w, &(-&j));
    }

    let b = lmi.block(2 * n);
    lmi.add_map(b, &rho, |x| place(Some(&lift_first(x, db)), None, None, n))?;
    lmi.add_map(b, &k, |x| place(None, Some(x), None, n))?;
    lmi.add_map(b, &zs[l], |x| place(None, None, Some(&hermitian_sum(x)), n))?;
    for i in 1..=l {
        let b = lmi.block(2 * n);
        lmi.add_map(b, &ws[i - 1], |x| place(Some(x), None, None, n))?;
        lmi.add_map(b, &zs[i], |x| place(None, Some(x), None, n))?;
        lmi.add_map(b, &zs[i - 1], |x| {
            place(None, None, Some(&hermitian_sum(x)), n)
        })?;
    }
    for w in witnesses {
        // tr_a(σ (φ^T ⊗ I)) = V† σ V with V = conj(φ) ⊗ I.
        let v = tensor_product(
            &CMat::from_column_slice(da, 1, w.conjugate().as_slice()),
            &identity(db),
        );
        let b = lmi.block(db);
        lmi.add_map(b, &rho, |x| v.adjoint() * lift_first(x, db) * &v)?;
        lmi.add_map(b, &zs[0], |x| -(v.adjoint() * hermitian_sum(x) * &v))?;
    }
    let program = SdpBound::from_solution(&lmi.solve(settings)?)?;
    let p = 2f64.powi(levels as i32);
    let value = levels as f64 * p - (p + 1.0) * (p + 1.0).log2() + (p + 1.0) * program.log2;
    Ok(PrivateUpperBound {
        value,
        program,
        levels,
        witnesses: witnesses.len(),
    })
}
