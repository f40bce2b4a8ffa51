//! Channel pairs generated by isometries, and the concrete families studied here.
//!
//! An isometry `E: H_a -> H_b ⊗ H_c` is stored as a `(d_b d_c) x d_a` matrix whose
//! row `b * d_c + c` holds the amplitude of `|b>|c>`. The direct channel keeps `b`,
//! the complementary channel keeps `c`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{
    dyad, factor_permutation, identity, ket, partial_trace, r, tensor_all, tensor_product,
    tensor_vec, CMat, CVec, C64,
};

const ISOMETRY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Leg {
    Direct,
    Complement,
}

impl Leg {
    pub fn other(self) -> Leg {
        match self {
            Leg::Direct => Leg::Complement,
            Leg::Complement => Leg::Direct,
        }
    }
}

/// Parameterized channel families, also the text format accepted by the CLI.
#[derive(Clone, Debug, PartialEq)]
pub enum ChannelSpec {
    Ns { s: f64 },
    Md { d: usize },
    O { mu: Vec<f64> },
    V { s: f64, mu: f64, nu: f64 },
    W { s: f64, mu: f64 },
}

impl ChannelSpec {
    pub fn build(&self) -> Result<ChannelPair> {
        match self {
            ChannelSpec::Ns { s } => make_ns(*s),
            ChannelSpec::Md { d } => make_md(*d),
            ChannelSpec::O { mu } => make_o(mu),
            ChannelSpec::V { s, mu, nu } => make_v(*s, *mu, *nu),
            ChannelSpec::W { s, mu } => make_w(*s, *mu),
        }
    }

    /// Schmidt coefficients of `|0>` when the channel belongs to the `O` family.
    pub fn o_family_mu(&self) -> Option<Vec<f64>> {
        match self {
            ChannelSpec::Ns { s } => Some(vec![s.sqrt(), (1.0 - s).sqrt()]),
            ChannelSpec::Md { d } => Some(vec![1.0 / ((*d - 1) as f64).sqrt(); d - 1]),
            ChannelSpec::O { mu } => Some(mu.clone()),
            _ => None,
        }
    }
}

impl fmt::Display for ChannelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelSpec::Ns { s } => write!(f, "Ns:s={s}"),
            ChannelSpec::Md { d } => write!(f, "Md:d={d}"),
            ChannelSpec::O { mu } => {
                let parts: Vec<String> = mu.iter().map(|m| m.to_string()).collect();
                write!(f, "O:mu={}", parts.join(","))
            }
            ChannelSpec::V { s, mu, nu } => write!(f, "V:s={s},mu={mu},nu={nu}"),
            ChannelSpec::W { s, mu } => write!(f, "W:s={s},mu={mu}"),
        }
    }
}

fn parse_real(key: &str, value: &str) -> Result<f64> {
    value.trim().parse::<f64>().map_err(|_| {
        Error::Parse(format!(
            "parameter {key}: cannot read '{value}' as a number"
        ))
    })
}

impl FromStr for ChannelSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let (family, params) = text
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected '<family>:<params>', got '{text}'")))?;
        let family = family.trim();

        // "mu=0.1,0.2,s=0.5" style lists: a bare number continues the previous key
        let mut pairs: Vec<(String, Vec<String>)> = Vec::new();
        for tok in params.split(',') {
            let tok = tok.trim();
            if tok.is_empty() {
                continue;
            }
            match tok.split_once('=') {
                Some((k, v)) => pairs.push((k.trim().to_string(), vec![v.trim().to_string()])),
                None => match pairs.last_mut() {
                    Some((_, vals)) => vals.push(tok.to_string()),
                    None => return Err(Error::Parse(format!("dangling value '{tok}'"))),
                },
            }
        }
        let get = |key: &str| -> Result<&Vec<String>> {
            pairs
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v)
                .ok_or_else(|| Error::Parse(format!("{family} channel needs parameter '{key}'")))
        };
        let scalar = |key: &str| -> Result<f64> {
            let v = get(key)?;
            if v.len() != 1 {
                return Err(Error::Parse(format!("parameter {key} takes one value")));
            }
            parse_real(key, &v[0])
        };
        let known: &[&str] = match family {
            "Ns" => &["s"],
            "Md" => &["d"],
            "O" => &["mu"],
            "V" => &["s", "mu", "nu"],
            "W" => &["s", "mu"],
            _ => return Err(Error::Parse(format!("unknown channel family '{family}'"))),
        };
        for (k, _) in &pairs {
            if !known.contains(&k.as_str()) {
                return Err(Error::Parse(format!(
                    "{family} channel has no parameter '{k}'"
                )));
            }
        }
        let spec = match family {
            "Ns" => ChannelSpec::Ns { s: scalar("s")? },
            "Md" => {
                let v = get("d")?;
                let d = v[0]
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("d must be an integer, got '{}'", v[0])))?;
                ChannelSpec::Md { d }
            }
            "O" => {
                let mu = get("mu")?
                    .iter()
                    .map(|v| parse_real("mu", v))
                    .collect::<Result<Vec<_>>>()?;
                ChannelSpec::O { mu }
            }
            "V" => ChannelSpec::V {
                s: scalar("s")?,
                mu: scalar("mu")?,
                nu: scalar("nu")?,
            },
            _ => ChannelSpec::W {
                s: scalar("s")?,
                mu: scalar("mu")?,
            },
        };
        Ok(spec)
    }
}

#[derive(Clone, Debug)]
pub struct Isometry {
    pub matrix: CMat,
    pub d_a: usize,
    pub d_b: usize,
    pub d_c: usize,
}

impl Isometry {
    pub fn new(matrix: CMat, d_a: usize, d_b: usize, d_c: usize) -> Result<Self> {
        if matrix.nrows() != d_b * d_c || matrix.ncols() != d_a {
            return Err(Error::Dimension(format!(
                "isometry matrix is {}x{}, expected {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                d_b * d_c,
                d_a
            )));
        }
        let defect = (matrix.adjoint() * &matrix - identity(d_a)).norm();
        if defect > ISOMETRY_TOL {
            return Err(Error::InvalidParameter(format!(
                "matrix is not an isometry (‖E†E − I‖ = {defect:.3e})"
            )));
        }
        Ok(Isometry {
            matrix,
            d_a,
            d_b,
            d_c,
        })
    }

    /// Builds the matrix from the images of the input basis kets.
    fn from_images(images: Vec<CVec>, d_b: usize, d_c: usize) -> Result<Self> {
        let d_a = images.len();
        let m = CMat::from_fn(d_b * d_c, d_a, |row, col| images[col][row]);
        Isometry::new(m, d_a, d_b, d_c)
    }
}

/// `Σ amp |b>|c>` in `H_b ⊗ H_c`.
fn bc_state(d_b: usize, d_c: usize, terms: &[(f64, usize, usize)]) -> CVec {
    let mut v = CVec::zeros(d_b * d_c);
    for &(amp, b, cc) in terms {
        v[b * d_c + cc] += r(amp);
    }
    v
}

#[derive(Clone, Debug)]
pub struct ChannelPair {
    isometry: Isometry,
    label: String,
    spec: Option<ChannelSpec>,
    kraus_direct: Vec<CMat>,
    kraus_complement: Vec<CMat>,
}

impl ChannelPair {
    pub fn new(isometry: Isometry, label: impl Into<String>) -> Self {
        let Isometry { d_a, d_b, d_c, .. } = isometry;
        let e = &isometry.matrix;
        // K_k = (I_b ⊗ <k|_c) E and L_j = (<j|_b ⊗ I_c) E
        let kraus_direct = (0..d_c)
            .map(|k| CMat::from_fn(d_b, d_a, |b, a| e[(b * d_c + k, a)]))
            .collect();
        let kraus_complement = (0..d_b)
            .map(|j| CMat::from_fn(d_c, d_a, |cc, a| e[(j * d_c + cc, a)]))
            .collect();
        ChannelPair {
            isometry,
            label: label.into(),
            spec: None,
            kraus_direct,
            kraus_complement,
        }
    }

    fn with_spec(mut self, spec: ChannelSpec) -> Self {
        self.label = spec.to_string();
        self.spec = Some(spec);
        self
    }

    pub fn isometry(&self) -> &Isometry {
        &self.isometry
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn spec(&self) -> Option<&ChannelSpec> {
        self.spec.as_ref()
    }

    pub fn d_in(&self) -> usize {
        self.isometry.d_a
    }

    pub fn d_out(&self, leg: Leg) -> usize {
        match leg {
            Leg::Direct => self.isometry.d_b,
            Leg::Complement => self.isometry.d_c,
        }
    }

    pub fn kraus_ops(&self, leg: Leg) -> &[CMat] {
        match leg {
            Leg::Direct => &self.kraus_direct,
            Leg::Complement => &self.kraus_complement,
        }
    }

    fn check_input(&self, rho: &CMat) -> Result<()> {
        let d = self.d_in();
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::Dimension(format!(
                "{} expects a {d}x{d} input, got {}x{}",
                self.label,
                rho.nrows(),
                rho.ncols()
            )));
        }
        Ok(())
    }

    pub fn apply(&self, rho: &CMat, leg: Leg) -> Result<CMat> {
        self.check_input(rho)?;
        Ok(self.apply_unchecked(rho, leg))
    }

    /// `Σ_k K_k ρ K_k†` without the dimension check.
    pub fn apply_unchecked(&self, rho: &CMat, leg: Leg) -> CMat {
        let d = self.d_out(leg);
        let mut out = CMat::zeros(d, d);
        for k in self.kraus_ops(leg) {
            out += k * rho * k.adjoint();
        }
        out
    }

    /// Heisenberg-picture map `X ↦ Σ_k K_k† X K_k`.
    pub fn adjoint_apply(&self, x: &CMat, leg: Leg) -> CMat {
        let d = self.d_in();
        let mut out = CMat::zeros(d, d);
        for k in self.kraus_ops(leg) {
            out += k.adjoint() * x * k;
        }
        out
    }

    /// Joint output state `E ρ E†` on `H_b ⊗ H_c`.
    pub fn apply_isometry(&self, rho: &CMat) -> Result<CMat> {
        self.check_input(rho)?;
        let e = &self.isometry.matrix;
        Ok(e * rho * e.adjoint())
    }

    /// Unnormalized Choi operator `Σ_ij |i><j| ⊗ B(|i><j|)` on `H_a ⊗ H_out`.
    pub fn choi(&self, leg: Leg) -> CMat {
        let d_a = self.d_in();
        let d_o = self.d_out(leg);
        let mut j = CMat::zeros(d_a * d_o, d_a * d_o);
        for k in self.kraus_ops(leg) {
            let v = CVec::from_fn(d_a * d_o, |idx, _| k[(idx % d_o, idx / d_o)]);
            j += dyad(&v);
        }
        j
    }

    /// `B1 ⊗ B2` with outputs grouped as `(b1 b2 | c1 c2)`.
    pub fn tensor(&self, other: &ChannelPair) -> ChannelPair {
        let a = &self.isometry;
        let b = &other.isometry;
        let joint = tensor_product(&a.matrix, &b.matrix);
        // rows of the Kronecker product are ordered (b1 c1 b2 c2)
        let map = factor_permutation(&[a.d_b, a.d_c, b.d_b, b.d_c], &[0, 2, 1, 3]);
        let mut m = CMat::zeros(joint.nrows(), joint.ncols());
        for (old, &new) in map.iter().enumerate() {
            m.row_mut(new).copy_from(&joint.row(old));
        }
        let iso = Isometry {
            matrix: m,
            d_a: a.d_a * b.d_a,
            d_b: a.d_b * b.d_b,
            d_c: a.d_c * b.d_c,
        };
        ChannelPair::new(iso, format!("({})⊗({})", self.label, other.label))
    }

    pub fn tensor_power(&self, n: usize) -> ChannelPair {
        let mut out = self.clone();
        for _ in 1..n {
            out = out.tensor(self);
        }
        out
    }

    /// Sub-channel on the span of the given orthonormal columns.
    pub fn restrict_input(&self, kets: &CMat) -> Result<ChannelPair> {
        if kets.nrows() != self.d_in() {
            return Err(Error::Dimension(format!(
                "kets live in dimension {}, channel input is {}",
                kets.nrows(),
                self.d_in()
            )));
        }
        let k = kets.ncols();
        let gram_defect = (kets.adjoint() * kets - identity(k)).norm();
        if gram_defect > ISOMETRY_TOL {
            return Err(Error::InvalidParameter(format!(
                "restriction kets are not orthonormal (defect {gram_defect:.3e})"
            )));
        }
        let iso = Isometry {
            matrix: &self.isometry.matrix * kets,
            d_a: k,
            d_b: self.isometry.d_b,
            d_c: self.isometry.d_c,
        };
        Ok(ChannelPair::new(
            iso,
            format!("{}|restricted({k})", self.label),
        ))
    }

    /// Sub-channel on the span of selected computational basis states.
    pub fn restrict_to_basis(&self, indices: &[usize]) -> Result<ChannelPair> {
        let d = self.d_in();
        if indices.iter().any(|&i| i >= d) {
            return Err(Error::Dimension(format!(
                "basis index out of range for dimension {d}"
            )));
        }
        let kets = CMat::from_fn(d, indices.len(), |row, col| {
            if row == indices[col] {
                r(1.0)
            } else {
                r(0.0)
            }
        });
        self.restrict_input(&kets)
    }

    /// Channel pair with the roles of output and environment exchanged.
    pub fn swapped(&self) -> ChannelPair {
        let Isometry { d_a, d_b, d_c, .. } = self.isometry;
        let map = factor_permutation(&[d_b, d_c], &[1, 0]);
        let mut m = CMat::zeros(d_b * d_c, d_a);
        for (old, &new) in map.iter().enumerate() {
            m.row_mut(new).copy_from(&self.isometry.matrix.row(old));
        }
        let iso = Isometry {
            matrix: m,
            d_a,
            d_b: d_c,
            d_c: d_b,
        };
        ChannelPair::new(iso, format!("{}^c", self.label))
    }
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) || !x.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "{name} = {x} is outside [0, 1]"
        )));
    }
    Ok(())
}

pub fn make_ns(s: f64) -> Result<ChannelPair> {
    if !(0.0..=0.5).contains(&s) {
        return Err(Error::InvalidParameter(format!(
            "s = {s} is outside [0, 1/2]"
        )));
    }
    let images = vec![
        bc_state(3, 2, &[(s.sqrt(), 0, 0), ((1.0 - s).sqrt(), 1, 1)]),
        bc_state(3, 2, &[(1.0, 2, 0)]),
        bc_state(3, 2, &[(1.0, 2, 1)]),
    ];
    let iso = Isometry::from_images(images, 3, 2)?;
    Ok(ChannelPair::new(iso, "").with_spec(ChannelSpec::Ns { s }))
}

pub fn make_md(d: usize) -> Result<ChannelPair> {
    if d < 3 {
        return Err(Error::InvalidParameter(format!(
            "d = {d} must be at least 3"
        )));
    }
    let mu = vec![1.0 / ((d - 1) as f64).sqrt(); d - 1];
    let iso = o_isometry(&mu)?;
    Ok(ChannelPair::new(iso, "").with_spec(ChannelSpec::Md { d }))
}

fn o_isometry(mu: &[f64]) -> Result<Isometry> {
    let d = mu.len() + 1;
    let mut images = Vec::with_capacity(d);
    let first: Vec<(f64, usize, usize)> = mu.iter().enumerate().map(|(j, &m)| (m, j, j)).collect();
    images.push(bc_state(d, d - 1, &first));
    for i in 1..d {
        images.push(bc_state(d, d - 1, &[(1.0, d - 1, i - 1)]));
    }
    Isometry::from_images(images, d, d - 1)
}

pub fn make_o(mu: &[f64]) -> Result<ChannelPair> {
    if mu.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least two Schmidt coefficients".into(),
        ));
    }
    if mu.iter().any(|m| !m.is_finite() || *m < 0.0) {
        return Err(Error::InvalidParameter(
            "Schmidt coefficients must be nonnegative".into(),
        ));
    }
    if mu.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter(
            "Schmidt coefficients must be ascending".into(),
        ));
    }
    let norm: f64 = mu.iter().map(|m| m * m).sum();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "Σ μ² = {norm}, expected 1"
        )));
    }
    let iso = o_isometry(mu)?;
    Ok(ChannelPair::new(iso, "").with_spec(ChannelSpec::O { mu: mu.to_vec() }))
}

pub fn make_v(s: f64, mu: f64, nu: f64) -> Result<ChannelPair> {
    check_unit("s", s)?;
    check_unit("mu", mu)?;
    check_unit("nu", nu)?;
    let iso = v_isometry(s, mu, nu)?;
    Ok(ChannelPair::new(iso, "").with_spec(ChannelSpec::V { s, mu, nu }))
}

fn v_isometry(s: f64, mu: f64, nu: f64) -> Result<Isometry> {
    let images = vec![
        bc_state(3, 2, &[(s.sqrt(), 0, 0), ((1.0 - s).sqrt(), 1, 1)]),
        bc_state(3, 2, &[(nu.sqrt(), 1, 0), ((1.0 - nu).sqrt(), 2, 1)]),
        bc_state(3, 2, &[(mu.sqrt(), 2, 0), ((1.0 - mu).sqrt(), 0, 1)]),
    ];
    Isometry::from_images(images, 3, 2)
}

/// The two-parameter subfamily `V(s, μ, 1 − μ)`.
pub fn make_w(s: f64, mu: f64) -> Result<ChannelPair> {
    check_unit("s", s)?;
    check_unit("mu", mu)?;
    let iso = v_isometry(s, mu, 1.0 - mu)?;
    Ok(ChannelPair::new(iso, "").with_spec(ChannelSpec::W { s, mu }))
}

#[derive(Clone, Debug)]
pub struct Ensemble {
    probs: Vec<f64>,
    states: Vec<CMat>,
}

impl Ensemble {
    pub fn new(probs: Vec<f64>, states: Vec<CMat>) -> Result<Self> {
        if probs.is_empty() || probs.len() != states.len() {
            return Err(Error::Dimension(format!(
                "{} probabilities for {} states",
                probs.len(),
                states.len()
            )));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidParameter(
                "probabilities must be nonnegative".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {total}"
            )));
        }
        let d = states[0].nrows();
        for st in &states {
            if st.nrows() != d || st.ncols() != d {
                return Err(Error::Dimension(
                    "ensemble states differ in dimension".into(),
                ));
            }
            let tr = st.trace();
            if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
                return Err(Error::InvalidParameter(format!(
                    "ensemble state has trace {tr}"
                )));
            }
            if crate::linalg::min_eigenvalue(st) < -1e-10 {
                return Err(Error::InvalidParameter("ensemble state is not PSD".into()));
            }
        }
        Ok(Ensemble { probs, states })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn states(&self) -> &[CMat] {
        &self.states
    }

    pub fn dim(&self) -> usize {
        self.states[0].nrows()
    }

    pub fn average(&self) -> CMat {
        let d = self.dim();
        let mut avg = CMat::zeros(d, d);
        for (p, st) in self.probs.iter().zip(&self.states) {
            avg += st * r(*p);
        }
        avg
    }
}

#[derive(Clone, Debug)]
pub struct PbitReport {
    /// `|ν>` on `A ⊗ B ⊗ E` (dimensions 3, 3, 2).
    pub state: CVec,
    /// Image on `K_A S_A K_B S_B E` (all qubits).
    pub transformed_state: CVec,
    /// Largest vector-norm difference against the closed forms.
    pub max_deviation: f64,
    /// Frobenius distance between `tr_E` of the transformed state and
    /// `U([φ] ⊗ σ)U†` with `U_11` the swap and `σ = s[00] + (1−s)[01]`.
    pub pbit_form_deviation: f64,
}

/// Builds the 3x3 private-bit state produced by sending half of an entangled
/// state through `N_s`, maps it to key/shield qubits, and checks the closed forms.
pub fn pbit_witness(s: f64) -> Result<PbitReport> {
    let pair = make_ns(s)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let sq = s.sqrt();
    let sc = (1.0 - s).sqrt();

    let mut prepared = CVec::zeros(9);
    prepared[0] = r(h);
    prepared[4] = r(h * sq);
    prepared[8] = r(h * sc);
    let lifted = tensor_product(&identity(3), &pair.isometry().matrix);
    let state = &lifted * &prepared;

    // index = a*6 + b*2 + e
    let abe = |a: usize, b: usize, e: usize| a * 6 + b * 2 + e;
    let mut expected = CVec::zeros(18);
    expected[abe(0, 0, 0)] = r(h * sq);
    expected[abe(0, 1, 1)] = r(h * sc);
    expected[abe(1, 2, 0)] = r(h * sq);
    expected[abe(2, 2, 1)] = r(h * sc);
    let dev_state = (&state - &expected).norm();

    let q = |i: usize| ket(2, i);
    let two = |x: usize, y: usize| tensor_vec(&q(x), &q(y));
    let local_a = CMat::from_columns(&[two(0, 0), two(1, 0), two(1, 1)]);
    let local_b = CMat::from_columns(&[two(0, 0), two(0, 1), two(1, 0)]);
    let local = tensor_all(&[&local_a, &local_b, &identity(2)]);
    let transformed_state = &local * &state;

    // K_A S_A K_B S_B E
    let idx = |ka: usize, sa: usize, kb: usize, sb: usize, e: usize| {
        (((ka * 2 + sa) * 2 + kb) * 2 + sb) * 2 + e
    };
    let mut keyed = CVec::zeros(32);
    keyed[idx(0, 0, 0, 0, 0)] += r(h * sq);
    keyed[idx(0, 0, 0, 1, 1)] += r(h * sc);
    keyed[idx(1, 0, 1, 0, 0)] += r(h * sq);
    keyed[idx(1, 1, 1, 0, 1)] += r(h * sc);
    let dev_keyed = (&transformed_state - &keyed).norm();

    // reorder to K_A K_B S_A S_B E and trace out E
    let map = factor_permutation(&[2, 2, 2, 2, 2], &[0, 2, 1, 3, 4]);
    let mut reordered = CVec::zeros(32);
    for (old, &new) in map.iter().enumerate() {
        reordered[new] = transformed_state[old];
    }
    let gamma = partial_trace(&dyad(&reordered), &[4, 4, 2], &[0, 1])?;

    let mut phi = CVec::zeros(4);
    phi[0] = r(h);
    phi[3] = r(h);
    let sigma = crate::linalg::diag_real(&[s, 1.0 - s, 0.0, 0.0]);
    let swap = CMat::from_fn(4, 4, |i, j| {
        let (i1, i2) = (i / 2, i % 2);
        let (j1, j2) = (j / 2, j % 2);
        if i1 == j2 && i2 == j1 {
            r(1.0)
        } else {
            r(0.0)
        }
    });
    let mut u = CMat::zeros(16, 16);
    for ka in 0..2 {
        for kb in 0..2 {
            let block = if ka == 1 && kb == 1 {
                swap.clone()
            } else {
                identity(4)
            };
            u += tensor_product(&crate::linalg::projector(4, ka * 2 + kb), &block);
        }
    }
    let pbit = &u * tensor_product(&dyad(&phi), &sigma) * u.adjoint();
    let pbit_form_deviation = (gamma - pbit).norm();

    Ok(PbitReport {
        state,
        transformed_state,
        max_deviation: dev_state.max(dev_keyed),
        pbit_form_deviation,
    })
}

/// Unit-trace density operator check used across modules.
pub fn is_density(rho: &CMat, tol: f64) -> bool {
    let tr: C64 = rho.trace();
    rho.is_square()
        && crate::linalg::hermiticity_defect(rho) <= tol.max(1e-10)
        && (tr.re - 1.0).abs() <= tol
        && tr.im.abs() <= tol
        && crate::linalg::min_eigenvalue(rho) >= -tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{projector, random_density};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ns_at_half_has_equal_schmidt_weights() {
        let p = make_ns(0.5).unwrap();
        let e = &p.isometry().matrix;
        assert!((e[(0, 0)].re - e[(3, 0)].re).abs() < 1e-15);
        assert!((e[(0, 0)].re - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn parameter_ranges_are_enforced() {
        assert!(make_ns(0.6).is_err());
        assert!(make_ns(-0.1).is_err());
        assert!(make_md(2).is_err());
        assert!(make_o(&[0.8, 0.6]).is_err());
        assert!(make_o(&[0.5, 0.5]).is_err());
        assert!(make_v(0.5, 1.2, 0.3).is_err());
    }

    #[test]
    fn ns_images_of_basis_states() {
        let s = 0.3;
        let p = make_ns(s).unwrap();
        let b = p.apply(&projector(3, 0), Leg::Direct).unwrap();
        assert!((b - crate::linalg::diag_real(&[s, 1.0 - s, 0.0])).norm() < 1e-14);
        let c = p.apply(&projector(3, 1), Leg::Complement).unwrap();
        assert!((c - projector(2, 0)).norm() < 1e-14);
    }

    #[test]
    fn kraus_completeness_and_action() {
        let p = make_ns(0.2).unwrap();
        let mut sum = CMat::zeros(3, 3);
        for k in p.kraus_ops(Leg::Direct) {
            sum += k.adjoint() * k;
        }
        assert!((sum - identity(3)).norm() < 1e-14);
        let mut g = ChaCha8Rng::seed_from_u64(3);
        let rho = random_density(3, &mut g);
        let joint = p.apply_isometry(&rho).unwrap();
        let via_trace = partial_trace(&joint, &[3, 2], &[0]).unwrap();
        assert!((via_trace - p.apply(&rho, Leg::Direct).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn spec_text_round_trip() {
        for text in [
            "Ns:s=0.3",
            "Md:d=4",
            "V:s=0.5,mu=0.7,nu=0.3",
            "W:s=0.5,mu=0.7",
            "O:mu=0.6,0.8",
        ] {
            let spec: ChannelSpec = text.parse().unwrap();
            let again: ChannelSpec = spec.to_string().parse().unwrap();
            assert_eq!(spec, again);
            spec.build().unwrap();
        }
        assert!("Q:s=1".parse::<ChannelSpec>().is_err());
        assert!("Ns:t=0.1".parse::<ChannelSpec>().is_err());
        assert!("Ns".parse::<ChannelSpec>().is_err());
    }

    #[test]
    fn swapped_pair_exchanges_legs() {
        let p = make_w(0.5, 0.3).unwrap();
        let q = p.swapped();
        let mut g = ChaCha8Rng::seed_from_u64(5);
        let rho = random_density(3, &mut g);
        let a = p.apply(&rho, Leg::Complement).unwrap();
        let b = q.apply(&rho, Leg::Direct).unwrap();
        assert!((a - b).norm() < 1e-14);
    }

    #[test]
    fn ensemble_validation() {
        let st = vec![projector(2, 0), projector(2, 1)];
        assert!(Ensemble::new(vec![0.5, 0.5], st.clone()).is_ok());
        assert!(Ensemble::new(vec![0.5, 0.6], st.clone()).is_err());
        assert!(Ensemble::new(vec![1.0], st).is_err());
    }
}
