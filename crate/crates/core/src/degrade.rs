//! Degradability of small channels.
//!
//! Two routes: the product-basis ("pcubed") description of the three-parameter
//! qutrit isometry, where degradability reduces to positivity of a 3×3 circulant
//! Gram matrix, and a general SDP computing how far a channel is from being
//! degradable (or anti-degradable) in diamond norm.

use crate::channels::{ChannelPair, Leg};
use crate::error::{Error, Result};
use crate::linalg::{c, identity, r, CMat, C64};
use crate::sdp::{LmiBuilder, SdpSettings, SdpStatus};

/// Tolerance of the Hadamard-product identity between the three Gram matrices.
pub const HADAMARD_TOL: f64 = 1e-10;
/// Largest `d_b · d_c` accepted by [`dg_adg`].
pub const MAX_DG_DIM: usize = 36;
const STALL_GAP: f64 = 1e-6;

/// Primitive cube root of unity `e^{2πi/3}`.
pub fn omega() -> C64 {
    C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0)
}

/// Circulant Gram matrix `[[1, m, m*], [m*, 1, m], [m, m*, 1]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GramMatrix {
    pub m: C64,
}

impl GramMatrix {
    pub fn matrix(&self) -> CMat {
        let (m, mc, one) = (self.m, self.m.conj(), c(1.0, 0.0));
        CMat::from_row_slice(3, 3, &[one, m, mc, mc, one, m, m, mc, one])
    }

    /// `det M = 1 + 2 Re(m³) − 3|m|²`.
    pub fn criterion(&self) -> f64 {
        1.0 + 2.0 * self.m.powu(3).re - 3.0 * self.m.norm_sqr()
    }

    /// Eigenvalues are `1 + 2 Re(m ω^k)`; computed here by a dense eigensolve.
    pub fn min_eigenvalue(&self) -> f64 {
        crate::linalg::min_eigenvalue(&self.matrix())
    }
}

/// Gram data of the product-basis decomposition `V|α_i⟩ = |β_i⟩ ⊗ |γ_i⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct PcubedGram {
    /// Gram matrices of `{α_i}`, `{β_i}`, `{γ_i}`.
    pub input: GramMatrix,
    pub output: GramMatrix,
    pub environment: GramMatrix,
    /// `max |A − B∘C|` entrywise.
    pub hadamard_residual: f64,
}

impl PcubedGram {
    /// The `D` with `B = C∘D`; the channel is degradable iff it is PSD.
    pub fn degrading_gram(&self) -> GramMatrix {
        GramMatrix {
            m: self.output.m / self.environment.m,
        }
    }

    pub fn degradable(&self) -> bool {
        self.degrading_gram().min_eigenvalue() >= -1e-9
    }
}

/// Coefficients `(k₁, k₂, l₁, l₂, r)` of the product basis for interior parameters.
pub fn pcubed_coefficients(s: f64, mu: f64, nu: f64) -> Result<(f64, f64, f64, f64, f64)> {
    for (name, v) in [("s", s), ("mu", mu), ("nu", nu)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "product-basis decomposition needs 0 < {name} < 1, got {v}"
            )));
        }
    }
    let rr = ((1.0 - s) * (1.0 - mu) * (1.0 - nu) / (s * mu * nu)).powf(1.0 / 6.0);
    let k1 = ((1.0 - s) / nu).sqrt() / rr;
    let l1 = ((1.0 - s) / s).sqrt() / rr;
    let k2 = rr * (s / (1.0 - mu)).sqrt();
    let l2 = rr * (mu / (1.0 - mu)).sqrt();
    Ok((k1, k2, l1, l2, rr))
}

/// `m = (1 + ω x² + ω² y²) / (1 + x² + y²)`.
fn normalized_overlap(x: f64, y: f64) -> C64 {
    let w = omega();
    (c(1.0, 0.0) + w * x * x + w * w * y * y) / (1.0 + x * x + y * y)
}

pub fn pcubed_gram(s: f64, mu: f64, nu: f64) -> Result<PcubedGram> {
    let (k1, k2, l1, l2, rr) = pcubed_coefficients(s, mu, nu)?;
    let input = GramMatrix {
        m: normalized_overlap(k1, k2),
    };
    let output = GramMatrix {
        m: normalized_overlap(l1, l2),
    };
    let environment = GramMatrix {
        m: normalized_overlap(0.0, rr),
    };
    let a = input.matrix();
    let bc = output.matrix().component_mul(&environment.matrix());
    let hadamard_residual = (a - bc).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if hadamard_residual > HADAMARD_TOL {
        return Err(Error::InvalidParameter(format!(
            "Gram matrices violate A = B∘C by {hadamard_residual:.3e}"
        )));
    }
    Ok(PcubedGram {
        input,
        output,
        environment,
        hadamard_residual,
    })
}

/// Outcome of the Gram criterion for `W_{1/2,μ}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GramCriterion {
    /// `d = 2ω(1 − 2μ)/(2 − μ)`.
    pub d: C64,
    /// `1 + 2d³ − 3|d|²`.
    pub criterion: f64,
    /// Smallest eigenvalue of the circulant `D`.
    pub min_eigenvalue: f64,
    pub degradable: bool,
}

/// Degradability of `W_{1/2,μ}` from the Gram criterion, cross-checked against
/// the eigenvalues of `D` and the general `B/C` construction.
pub fn pcubed_criterion(mu: f64) -> Result<GramCriterion> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < mu < 1, got {mu}"
        )));
    }
    let d = omega() * (2.0 * (1.0 - 2.0 * mu) / (2.0 - mu));
    let gram = GramMatrix { m: d };
    let general = pcubed_gram(0.5, mu, 1.0 - mu)?.degrading_gram();
    if (general.m - d).norm() > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "B/C gives {} but the closed form gives {d}",
            general.m
        )));
    }
    let criterion = gram.criterion();
    let min_eigenvalue = gram.min_eigenvalue();
    let degradable = criterion >= -1e-12;
    if degradable != (min_eigenvalue >= -1e-9) {
        return Err(Error::InvalidParameter(format!(
            "criterion {criterion:.3e} and smallest eigenvalue {min_eigenvalue:.3e} disagree at mu = {mu}"
        )));
    }
    Ok(GramCriterion {
        d,
        criterion,
        min_eigenvalue,
        degradable,
    })
}

pub fn pcubed_degradable(mu: f64) -> Result<bool> {
    Ok(pcubed_criterion(mu)?.degradable)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DegradabilityReport {
    /// `min_D ‖D∘B − B^c‖_◊` over channels `D: b → c`.
    pub dg: f64,
    /// `min_E ‖E∘B^c − B‖_◊` over channels `E: c → b`.
    pub adg: f64,
    /// Choi matrix (on `b ⊗ c`) of the optimal degrading map.
    pub degrading_map_choi: Option<CMat>,
}

/// Choi matrix of `D∘N` on `a ⊗ c` from the Choi matrices of `N` (`a ⊗ b`) and
/// `D` (`b ⊗ c`): `J[(i,k),(j,l)] = Σ_{p,q} J_N[(i,p),(j,q)] J_D[(p,k),(q,l)]`.
pub fn compose_choi(
    j_first: &CMat,
    j_second: &CMat,
    da: usize,
    db: usize,
    dc: usize,
) -> Result<CMat> {
    if j_first.shape() != (da * db, da * db) || j_second.shape() != (db * dc, db * dc) {
        return Err(Error::Dimension(
            "Choi matrices do not match the given dimensions".into(),
        ));
    }
    Ok(CMat::from_fn(da * dc, da * dc, |row, col| {
        let (i, k) = (row / dc, row % dc);
        let (j, l) = (col / dc, col % dc);
        let mut acc = c(0.0, 0.0);
        for p in 0..db {
            for q in 0..db {
                acc += j_first[(i * db + p, j * db + q)] * j_second[(p * dc + k, q * dc + l)];
            }
        }
        acc
    }))
}

/// `tr` over the second factor of an operator on `x ⊗ y`.
fn trace_out_second(m: &CMat, dx: usize, dy: usize) -> CMat {
    CMat::from_fn(dx, dx, |i, j| {
        (0..dy).map(|k| m[(i * dy + k, j * dy + k)]).sum()
    })
}

/// `min_D ‖D∘first − second‖_◊` over channels `D` from the output of `first` to
/// the output of `second`, with the optimal Choi matrix of `D`.
fn distance_to_composition(
    first: &CMat,
    second: &CMat,
    da: usize,
    db: usize,
    dc: usize,
    settings: &SdpSettings,
) -> Result<(f64, CMat)> {
    let mut lmi = LmiBuilder::new();
    lmi.minimize();
    let t = lmi.scalar();
    let y = lmi.hermitian(da * dc);
    let jd = lmi.hermitian(db * dc);
    lmi.add_objective(t, 1.0);
    lmi.add_map_equality(&jd, |x| trace_out_second(x, db, dc), &identity(db));

    let b = lmi.block(db * dc);
    lmi.add_map(b, &jd, |x| x.clone())?;
    for sign in [1.0, -1.0] {
        // Y ± (J_{D∘first} − J_second) ⪰ 0.
        let b = lmi.block(da * dc);
        lmi.add_map(b, &y, |x| x.clone())?;
        lmi.add_map(b, &jd, |x| {
            compose_choi(first, x, da, db, dc).expect("dimensions checked") * r(sign)
        })?;
        lmi.add_constant(b, &(second * r(-sign)))?;
    }
    let b = lmi.block(da);
    lmi.add_scalar_term(b, t, &identity(da))?;
    lmi.add_map(b, &y, |x| -trace_out_second(x, da, dc))?;

    let sol = lmi.solve(settings)?;
    let rel_gap = (sol.value - sol.bound).abs() / (1.0 + sol.value.abs());
    let usable = match sol.status {
        SdpStatus::Optimal => true,
        SdpStatus::MaxIters => rel_gap <= STALL_GAP,
        SdpStatus::Infeasible => false,
    };
    if !usable {
        return Err(Error::Solver(format!(
            "status {:?} (relative gap {rel_gap:.2e})",
            sol.status
        )));
    }
    Ok((sol.value.max(sol.bound).max(0.0), sol.matrix(&jd)))
}

pub fn dg_adg(pair: &ChannelPair, settings: &SdpSettings) -> Result<DegradabilityReport> {
    let (da, db, dc) = (
        pair.d_in(),
        pair.d_out(Leg::Direct),
        pair.d_out(Leg::Complement),
    );
    if db * dc > MAX_DG_DIM {
        return Err(Error::Unsupported(format!(
            "d_b * d_c = {} exceeds {MAX_DG_DIM}",
            db * dc
        )));
    }
    let jb = pair.choi(Leg::Direct);
    let jc = pair.choi(Leg::Complement);
    let (dg, choi) = distance_to_composition(&jb, &jc, da, db, dc, settings)?;
    let (adg, _) = distance_to_composition(&jc, &jb, da, dc, db, settings)?;
    Ok(DegradabilityReport {
        dg,
        adg,
        degrading_map_choi: Some(choi),
    })
}
