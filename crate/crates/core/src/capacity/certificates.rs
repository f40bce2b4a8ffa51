//! Explicit feasible points for the Γ, transposition and β programs of the
//! `N_s` and `M_d` channels, checked constraint by constraint.

use super::bounds::{trace_second, transpose_second};
use crate::channels::{make_md, make_ns, Leg};
use crate::error::{Error, Result};
use crate::linalg::{
    dyad, eigenvalues_hermitian, identity, ket, max_eigenvalue, min_eigenvalue, r, tensor_product,
    tensor_vec, trace_product_re, CMat, CVec,
};

/// Tolerance for every check.
pub const CERTIFICATE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CertificateFamily {
    Ns(f64),
    Md(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub enum CheckKind {
    /// `value` is the smallest eigenvalue of an operator required to be PSD.
    Psd,
    /// `value` must equal `target`.
    Equals { target: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateCheck {
    pub name: String,
    pub kind: CheckKind,
    pub value: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateReport {
    pub family: CertificateFamily,
    pub checks: Vec<CertificateCheck>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CertificateCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn psd(&mut self, name: &str, m: &CMat) {
        let value = min_eigenvalue(m);
        self.checks.push(CertificateCheck {
            name: name.into(),
            kind: CheckKind::Psd,
            value,
            passed: value >= -CERTIFICATE_TOL,
        });
    }

    fn equals(&mut self, name: &str, value: f64, target: f64) {
        self.checks.push(CertificateCheck {
            name: name.into(),
            kind: CheckKind::Equals { target },
            value,
            passed: (value - target).abs() <= CERTIFICATE_TOL,
        });
    }
}

fn ab(da: usize, db: usize, i: usize, j: usize) -> CVec {
    tensor_vec(&ket(da, i), &ket(db, j))
}

fn proj_ab(da: usize, db: usize, i: usize, j: usize) -> CMat {
    dyad(&ab(da, db, i, j))
}

fn block2(top: &CMat, off: &CMat, bottom: &CMat) -> CMat {
    let n = top.nrows();
    let mut m = CMat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(top);
    m.view_mut((0, n), (n, n)).copy_from(off);
    m.view_mut((n, 0), (n, n)).copy_from(&off.adjoint());
    m.view_mut((n, n), (n, n)).copy_from(bottom);
    m
}

fn sorted_spectrum_distance(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    let len = a.len().max(b.len());
    a.resize(len, 0.0);
    b.resize(len, 0.0);
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Builds and checks the certificates for one channel.
pub fn verify_certificates(family: CertificateFamily) -> Result<CertificateReport> {
    let choi = match family {
        CertificateFamily::Ns(s) => {
            check_ns_range(s)?;
            make_ns(s)?.choi(Leg::Direct)
        }
        CertificateFamily::Md(d) => {
            check_md_range(d)?;
            make_md(d)?.choi(Leg::Direct)
        }
    };
    verify_certificates_against(family, &choi)
}

/// Checks the family's certificates against a supplied Choi matrix instead of the
/// channel's own (used to confirm that a corrupted channel is caught).
pub fn verify_certificates_against(
    family: CertificateFamily,
    choi: &CMat,
) -> Result<CertificateReport> {
    let dim = match family {
        CertificateFamily::Ns(_) => 9,
        CertificateFamily::Md(d) => d * d,
    };
    if choi.shape() != (dim, dim) {
        return Err(Error::Dimension(format!("Choi matrix must be {dim}x{dim}")));
    }
    let mut report = CertificateReport {
        family,
        checks: Vec::new(),
    };
    match family {
        CertificateFamily::Ns(s) => ns_certificates(s, choi, &mut report)?,
        CertificateFamily::Md(d) => md_certificates(d, choi, &mut report)?,
    }
    Ok(report)
}

fn check_ns_range(s: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&s) {
        return Err(Error::InvalidParameter(format!(
            "certificates cover s in [0, 1/2], got {s}"
        )));
    }
    Ok(())
}

fn check_md_range(d: usize) -> Result<()> {
    if d < 3 {
        return Err(Error::InvalidParameter(format!(
            "certificates cover d >= 3, got {d}"
        )));
    }
    Ok(())
}

fn ns_certificates(s: f64, j: &CMat, report: &mut CertificateReport) -> Result<()> {
    check_ns_range(s)?;
    let (da, db) = (3, 3);
    let tj = transpose_second(j, da, db);
    let root = (1.0 - s).sqrt();
    let target = 1.0 + root;

    // Γ: ρ = ([0] + [2])/2 and R with a coherence between |01⟩ and |22⟩.
    let rho = (dyad(&ket(da, 0)) + dyad(&ket(da, 2))) * r(0.5);
    let mut rr = proj_ab(da, db, 0, 0) + proj_ab(da, db, 0, 1) + proj_ab(da, db, 2, 2);
    let cross = ab(da, db, 0, 1) * ab(da, db, 2, 2).adjoint();
    rr += &cross + cross.adjoint();
    rr *= r(0.5);
    report.psd("gamma: R", &rr);
    report.psd("gamma: rho", &rho);
    report.equals("gamma: tr rho", rho.trace().re, 1.0);
    let lifted = tensor_product(&rho, &identity(db));
    let trr = transpose_second(&rr, da, db);
    report.psd("gamma: rho⊗I - T(R)", &(&lifted - &trr));
    report.psd("gamma: rho⊗I + T(R)", &(&lifted + &trr));
    report.equals("gamma: tr RJ", trace_product_re(&rr, j), target);

    // Transposition: Y = Z.
    let phi = ab(da, db, 1, 0) * r((s * s / (1.0 - s)).powf(0.25))
        + ab(da, db, 2, 1) * r((1.0 - s).powf(0.25));
    let mut y = proj_ab(da, db, 0, 0) * r(s)
        + proj_ab(da, db, 0, 1) * r(1.0 - s)
        + proj_ab(da, db, 0, 2) * r(root);
    y += proj_ab(da, db, 1, 2) + proj_ab(da, db, 2, 2) + dyad(&phi);
    report.psd("transposition: Y", &y);
    let block = block2(&y, &(-&tj), &y);
    report.psd("transposition: [[Y, -T(J)], [-T(J), Y]]", &block);
    report.equals(
        "transposition: ||Y_a||",
        max_eigenvalue(&trace_second(&y, da, db)),
        target,
    );
    // Spectrum of the block-diagonal form s M ⊕ (1−s) M ⊕ M⊗I₂ ⊕ (s/√(1−s))[φ₁] ⊕ √(1−s)[φ₂]
    // with M = [[1, −1], [−1, 1]].
    // ‖√(s/√(1−s)) φ₁‖² and √(1−s)‖φ₂‖², written without the 1/s factors.
    let phi1_weight = 2.0 * root + s / root;
    let phi2_weight = root * (s / (1.0 - s) + 2.0);
    let expected = vec![
        0.0,
        2.0 * s,
        0.0,
        2.0 * (1.0 - s),
        0.0,
        0.0,
        2.0,
        2.0,
        phi1_weight,
        phi2_weight,
    ];
    report.equals(
        "transposition: block-diagonal spectrum residual",
        sorted_spectrum_distance(eigenvalues_hermitian(&block), expected),
        0.0,
    );

    // β: R and S from the classical-capacity bound.
    let psi = ab(da, db, 1, 0) * r(s.sqrt()) + ab(da, db, 2, 1) * r(root);
    let mut rb =
        proj_ab(da, db, 0, 0) * r(s) + proj_ab(da, db, 0, 1) * r(1.0 - s) + proj_ab(da, db, 0, 2);
    rb += dyad(&psi) + proj_ab(da, db, 1, 2) + proj_ab(da, db, 2, 2);
    let sb = crate::linalg::diag_real(&[s, 1.0 - s, 1.0]);
    beta_checks(report, &rb, &sb, &tj, da, db);
    Ok(())
}

fn beta_checks(
    report: &mut CertificateReport,
    rb: &CMat,
    sb: &CMat,
    tj: &CMat,
    da: usize,
    db: usize,
) {
    report.psd("beta: R - T(J)", &(rb - tj));
    report.psd("beta: R + T(J)", &(rb + tj));
    let lifted = tensor_product(&identity(da), sb);
    let trb = transpose_second(rb, da, db);
    report.psd("beta: I⊗S - T(R)", &(&lifted - &trb));
    report.psd("beta: I⊗S + T(R)", &(&lifted + &trb));
    report.equals("beta: tr S", sb.trace().re, 2.0);
}

fn md_certificates(d: usize, j: &CMat, report: &mut CertificateReport) -> Result<()> {
    check_md_range(d)?;
    let (da, db) = (d, d);
    let tj = transpose_second(j, da, db);
    let inv = 1.0 / (d - 1) as f64;
    let target = 1.0 + inv.sqrt();

    // Transposition: Y = Z with Y = T(J) Y⁺ T(J).
    let xi =
        (1..d).fold(CVec::zeros(da * db), |acc, k| acc + ab(da, db, k, k - 1)) * r(inv.powf(0.25));
    let mut y = (0..d - 1).fold(CMat::zeros(da * db, da * db), |acc, k| {
        acc + proj_ab(da, db, 0, k)
    }) * r(inv);
    y += proj_ab(da, db, 0, d - 1) * r(inv.sqrt());
    for k in 1..d {
        y += proj_ab(da, db, k, d - 1);
    }
    y += dyad(&xi);
    report.psd("transposition: Y", &y);
    let block = block2(&y, &(-&tj), &y);
    report.psd("transposition: [[Y, -T(J)], [-T(J), Y]]", &block);
    let ya = trace_second(&y, da, db);
    report.equals("transposition: ||Y_a||", max_eigenvalue(&ya), target);
    report.equals(
        "transposition: Y_a - (1 + 1/sqrt(d-1)) I",
        (&ya - identity(da) * r(target)).norm(),
        0.0,
    );
    let pinv = y
        .clone()
        .pseudo_inverse(1e-12)
        .map_err(|e| Error::Solver(e.to_string()))?;
    report.equals(
        "transposition: Schur residual",
        (&y - &tj * pinv * &tj).norm(),
        0.0,
    );

    // β.
    let psi =
        (1..d).fold(CVec::zeros(da * db), |acc, k| acc + ab(da, db, k, k - 1)) * r(inv.sqrt());
    let mut rb = (0..d - 1).fold(CMat::zeros(da * db, da * db), |acc, k| {
        acc + proj_ab(da, db, 0, k)
    }) * r(inv);
    for k in 0..d {
        rb += proj_ab(da, db, k, d - 1);
    }
    rb += dyad(&psi);
    let mut diag = vec![inv; d];
    diag[d - 1] = 1.0;
    let sb = crate::linalg::diag_real(&diag);
    beta_checks(report, &rb, &sb, &tj, da, db);
    Ok(())
}
