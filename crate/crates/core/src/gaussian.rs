//! Zero-mean Gaussian states described by their covariance matrix
//! `σ_ij = ⟨{R_i, R_j}⟩` in interleaved ordering `(x₁, p₁, …, x_N, p_N)`.

use crate::correlators::{commutator, Correlators, FieldParams, ModeSpec};
use crate::error::{domain, Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::io::{BufRead, Write};

/// Margin below 1 at which a symplectic eigenvalue counts as genuinely
/// smaller than 1.
pub const NU_MARGIN: f64 = 1e-9;
const SYMMETRY_TOL: f64 = 1e-12;
const PAIRING_TOL: f64 = 1e-8;
const COMMUTATOR_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    sigma: DMatrix<f64>,
}

impl GaussianState {
    pub fn new(sigma: DMatrix<f64>) -> Result<Self> {
        let n = sigma.nrows();
        if n == 0 || n != sigma.ncols() || !n.is_multiple_of(2) {
            return Err(domain(format!(
                "covariance must be a non-empty square matrix of even size, got {}x{}",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        if sigma.iter().any(|v| !v.is_finite()) {
            return Err(domain("covariance has non-finite entries"));
        }
        let scale = sigma.amax().max(1.0);
        for i in 0..n {
            for j in 0..i {
                if (sigma[(i, j)] - sigma[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(domain(format!("covariance is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { sigma })
    }

    /// Ground state of `n` uncoupled oscillators.
    pub fn vacuum(n: usize) -> Self {
        Self {
            sigma: DMatrix::identity(2 * n, 2 * n),
        }
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn n_modes(&self) -> usize {
        self.sigma.nrows() / 2
    }

    /// Principal submatrix on the listed modes, in the given order.
    pub fn reduced(&self, modes: &[usize]) -> Result<Self> {
        if modes.is_empty() {
            return Err(domain("reduced state needs at least one mode"));
        }
        let n = self.n_modes();
        if let Some(bad) = modes.iter().find(|&&m| m >= n) {
            return Err(domain(format!("mode {bad} out of range for {n} modes")));
        }
        let idx: Vec<usize> = modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        let k = idx.len();
        let sigma = DMatrix::from_fn(k, k, |i, j| self.sigma[(idx[i], idx[j])]);
        Ok(Self { sigma })
    }

    /// `S σ Sᵀ`.
    pub fn transformed(&self, s: &DMatrix<f64>) -> Result<Self> {
        if s.nrows() != self.sigma.nrows() || s.ncols() != self.sigma.ncols() {
            return Err(domain("transformation has the wrong size"));
        }
        let m = s * &self.sigma * s.transpose();
        Ok(Self {
            sigma: 0.5 * (&m + m.transpose()),
        })
    }

    /// Smallest eigenvalue of `σ + iΩ`; non-negative for physical states.
    pub fn uncertainty_floor(&self) -> f64 {
        let n = self.sigma.nrows();
        let omega = symplectic_form(self.n_modes());
        // real embedding of the Hermitian matrix σ + iΩ
        let mut big = DMatrix::zeros(2 * n, 2 * n);
        big.view_mut((0, 0), (n, n)).copy_from(&self.sigma);
        big.view_mut((n, n), (n, n)).copy_from(&self.sigma);
        big.view_mut((0, n), (n, n)).copy_from(&(-&omega));
        big.view_mut((n, 0), (n, n)).copy_from(&omega);
        SymmetricEigen::new(big).eigenvalues.min()
    }

    pub fn is_physical(&self) -> bool {
        self.uncertainty_floor() >= -NU_MARGIN
    }
}

/// `Ω_N = ⊕ [[0, 1], [−1, 0]]`.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut o = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for i in 0..n_modes {
        o[(2 * i, 2 * i + 1)] = 1.0;
        o[(2 * i + 1, 2 * i)] = -1.0;
    }
    o
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Side>", into = "Vec<Side>")]
pub struct Bipartition {
    labels: Vec<Side>,
}

impl TryFrom<Vec<Side>> for Bipartition {
    type Error = Error;
    fn try_from(labels: Vec<Side>) -> Result<Self> {
        Self::new(labels)
    }
}

impl From<Bipartition> for Vec<Side> {
    fn from(b: Bipartition) -> Self {
        b.labels
    }
}

impl Bipartition {
    pub fn new(labels: Vec<Side>) -> Result<Self> {
        let b = Self { labels };
        if b.n_a() == 0 || b.n_b() == 0 {
            return Err(domain("both subsystems need at least one mode"));
        }
        Ok(b)
    }

    /// The first `n_a` modes form A, the next `n_b` form B.
    pub fn split(n_a: usize, n_b: usize) -> Result<Self> {
        Self::new(
            std::iter::repeat_n(Side::A, n_a)
                .chain(std::iter::repeat_n(Side::B, n_b))
                .collect(),
        )
    }

    pub fn labels(&self) -> &[Side] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_a(&self) -> usize {
        self.labels.iter().filter(|s| **s == Side::A).count()
    }

    pub fn n_b(&self) -> usize {
        self.labels.len() - self.n_a()
    }

    pub fn indices(&self, side: Side) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == side)
            .map(|(i, _)| i)
            .collect()
    }

    fn check(&self, state: &GaussianState) -> Result<()> {
        if self.labels.len() != state.n_modes() {
            return Err(domain(format!(
                "bipartition labels {} modes but the state has {}",
                self.labels.len(),
                state.n_modes()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum {
    /// Ascending.
    pub values: Vec<f64>,
}

impl SymplecticSpectrum {
    pub fn min(&self) -> f64 {
        self.values[0]
    }
}

/// Williamson eigenvalues: with `σ = LLᵀ`, the singular values of `LᵀΩL`
/// come in equal pairs, one pair per mode.
pub fn symplectic_spectrum(state: &GaussianState) -> Result<SymplecticSpectrum> {
    let n = state.n_modes();
    let chol = state
        .sigma
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Degeneracy("covariance is not positive definite".into()))?;
    let l = chol.l();
    let m = l.transpose() * symplectic_form(n) * &l;
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    let mut values = Vec::with_capacity(n);
    for pair in sv.chunks(2) {
        let (a, b) = (pair[0], pair[1]);
        if (a - b).abs() > PAIRING_TOL * b.max(1.0) {
            return Err(Error::Degeneracy(format!(
                "unpaired symplectic eigenvalues {a} and {b}"
            )));
        }
        values.push(0.5 * (a + b));
    }
    Ok(SymplecticSpectrum { values })
}

fn entropy_term(nu: f64) -> Result<f64> {
    if nu < 1.0 - NU_MARGIN {
        return Err(domain(format!(
            "symplectic eigenvalue {nu} violates the uncertainty principle"
        )));
    }
    if nu <= 1.0 {
        return Ok(0.0);
    }
    let plus = 0.5 * (nu + 1.0);
    let minus = 0.5 * (nu - 1.0);
    Ok(plus * plus.log2() - minus * minus.log2())
}

/// Entropy in bits from a symplectic spectrum.
pub fn entropy_of_spectrum(spec: &SymplecticSpectrum) -> Result<f64> {
    spec.values.iter().map(|&v| entropy_term(v)).sum()
}

pub fn von_neumann_entropy(state: &GaussianState) -> Result<f64> {
    entropy_of_spectrum(&symplectic_spectrum(state)?)
}

/// `S_A + S_B − S_AB` in bits.
pub fn mutual_information(state: &GaussianState, part: &Bipartition) -> Result<f64> {
    part.check(state)?;
    let sa = von_neumann_entropy(&state.reduced(&part.indices(Side::A))?)?;
    let sb = von_neumann_entropy(&state.reduced(&part.indices(Side::B))?)?;
    let sab = von_neumann_entropy(state)?;
    Ok(sa + sb - sab)
}

/// Flips the sign of every B-mode momentum.
pub fn partial_transpose(state: &GaussianState, part: &Bipartition) -> Result<GaussianState> {
    part.check(state)?;
    let mut sigma = state.sigma.clone();
    for m in part.indices(Side::B) {
        let k = 2 * m + 1;
        sigma.row_mut(k).neg_mut();
        sigma.column_mut(k).neg_mut();
    }
    Ok(GaussianState { sigma })
}

pub fn partial_transpose_spectrum(
    state: &GaussianState,
    part: &Bipartition,
) -> Result<SymplecticSpectrum> {
    symplectic_spectrum(&partial_transpose(state, part)?)
}

/// `Σ max(0, −log₂ ν̃)` over eigenvalues below `1 − NU_MARGIN`.
pub fn log_negativity_of_spectrum(spec: &SymplecticSpectrum) -> f64 {
    spec.values
        .iter()
        .filter(|&&v| v < 1.0 - NU_MARGIN)
        .fold(0.0, |acc, &v| acc - v.log2())
}

pub fn log_negativity(state: &GaussianState, part: &Bipartition) -> Result<f64> {
    Ok(log_negativity_of_spectrum(&partial_transpose_spectrum(
        state, part,
    )?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Entangled,
    Separable,
    /// Positive partial transpose with several modes on each side: bound
    /// entanglement is not excluded, but nothing can be distilled.
    NotDistillable,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Entangled => "entangled",
            Verdict::Separable => "separable",
            Verdict::NotDistillable => "not distillable",
        })
    }
}

pub fn verdict(log_neg: f64, part: &Bipartition) -> Verdict {
    if log_neg > 0.0 {
        Verdict::Entangled
    } else if part.n_a() == 1 || part.n_b() == 1 {
        Verdict::Separable
    } else {
        Verdict::NotDistillable
    }
}

/// Symplectic two-mode squeezing between modes `i` and `j`.
pub fn mixing_matrix(n_modes: usize, i: usize, j: usize, z: f64) -> Result<DMatrix<f64>> {
    if i == j || i >= n_modes || j >= n_modes {
        return Err(domain(format!(
            "invalid mode pair ({i}, {j}) for {n_modes} modes"
        )));
    }
    let (ch, sh) = (z.cosh(), z.sinh());
    let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
    let (xi, pi, xj, pj) = (2 * i, 2 * i + 1, 2 * j, 2 * j + 1);
    s[(xi, xi)] = ch;
    s[(xi, xj)] = sh;
    s[(pi, pi)] = ch;
    s[(pi, pj)] = -sh;
    s[(xj, xi)] = sh;
    s[(xj, xj)] = ch;
    s[(pj, pi)] = -sh;
    s[(pj, pj)] = ch;
    Ok(s)
}

pub fn mix_modes(state: &GaussianState, i: usize, j: usize, z: f64) -> Result<GaussianState> {
    state.transformed(&mixing_matrix(state.n_modes(), i, j, z)?)
}

const THRESHOLD_BRACKET: f64 = 10.0;
const THRESHOLD_TOL: f64 = 1e-8;

/// Smallest `|z|` at which mixing modes `i` and `j` entangles them, taken
/// over both signs of `z`.
pub fn entanglement_threshold(state: &GaussianState, i: usize, j: usize) -> Result<f64> {
    let pair = state.reduced(&[i, j])?;
    // det σ is a symplectic invariant; taking it before mixing avoids the
    // cancellation in the strongly squeezed matrices near the bracket edge
    let det = pair.sigma.determinant();
    let gap = |z: f64| -> Result<f64> {
        Ok(two_mode_pt_min_with_det(&mix_modes(&pair, 0, 1, z)?, det) - 1.0)
    };
    if gap(0.0)? <= 0.0 {
        return Ok(0.0);
    }
    let mut best: Option<f64> = None;
    for sign in [1.0, -1.0] {
        if gap(sign * THRESHOLD_BRACKET)? > 0.0 {
            continue;
        }
        let (mut lo, mut hi) = (0.0, THRESHOLD_BRACKET);
        while hi - lo > THRESHOLD_TOL {
            let mid = 0.5 * (lo + hi);
            if gap(sign * mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        best = Some(best.map_or(hi, |b: f64| b.min(hi)));
    }
    best.ok_or(Error::NoThreshold(THRESHOLD_BRACKET))
}

/// Smallest partially transposed symplectic eigenvalue of a two-mode state,
/// from the local invariants.
pub fn two_mode_pt_min(state: &GaussianState) -> Result<f64> {
    if state.n_modes() != 2 {
        return Err(domain(
            "two-mode formula applied to a state with a different number of modes",
        ));
    }
    Ok(two_mode_pt_min_with_det(state, state.sigma.determinant()))
}

fn two_mode_pt_min_with_det(state: &GaussianState, det: f64) -> f64 {
    let s = &state.sigma;
    let det2 = |r: usize, c: usize| s[(r, c)] * s[(r + 1, c + 1)] - s[(r, c + 1)] * s[(r + 1, c)];
    let delta = det2(0, 0) + det2(2, 2) - 2.0 * det2(0, 2);
    let disc = (delta * delta - 4.0 * det).max(0.0).sqrt();
    (2.0 * det / (delta + disc)).sqrt()
}

/// Regularised covariance of a pair of Rindler modes of frequency `ω` seen
/// by observers of acceleration `a`, ordering `(X_R, P_R, X_L, P_L)`.
pub fn rindler_two_mode(omega_over_a: f64) -> Result<GaussianState> {
    if !(omega_over_a > 0.0) || !omega_over_a.is_finite() {
        return Err(domain(format!(
            "omega/a must be positive, got {omega_over_a}"
        )));
    }
    let t = std::f64::consts::PI * omega_over_a;
    if t > 30.0 {
        return Ok(GaussianState::vacuum(2));
    }
    let (coth, csch) = (1.0 / t.tanh(), 1.0 / t.sinh());
    #[rustfmt::skip]
    let sigma = DMatrix::from_row_slice(4, 4, &[
        coth, 0.0, csch, 0.0,
        0.0, coth, 0.0, -csch,
        csch, 0.0, coth, 0.0,
        0.0, -csch, 0.0, coth,
    ]);
    GaussianState::new(sigma)
}

/// Covariance matrix of the field vacuum restricted to the given modes.
pub fn build_covariance(modes: &[ModeSpec], params: &FieldParams) -> Result<GaussianState> {
    build_covariance_with(modes, &Correlators::new(*params)?)
}

pub fn build_covariance_with(modes: &[ModeSpec], corr: &Correlators) -> Result<GaussianState> {
    if modes.is_empty() {
        return Err(domain("need at least one mode"));
    }
    for (i, m) in modes.iter().enumerate() {
        m.validate(i, corr.params())?;
    }
    let ops: Vec<&[crate::correlators::Term]> = modes
        .iter()
        .flat_map(|m| [m.x.as_slice(), m.p.as_slice()])
        .collect();
    let n = ops.len();
    let omega = symplectic_form(modes.len());
    for a in 0..n {
        for b in (a + 1)..n {
            let c = commutator(ops[a], ops[b])?;
            let deviation = (c - omega[(a, b)]).abs();
            if deviation > COMMUTATOR_TOL {
                return Err(Error::CommutatorViolation {
                    deviation,
                    row: a,
                    col: b,
                });
            }
        }
    }
    let mut sigma = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let v = corr.operators(ops[a], ops[b])?;
            sigma[(a, b)] = v;
            sigma[(b, a)] = v;
        }
    }
    GaussianState::new(sigma)
}

/// Row-major text dump with full round-trip precision.
pub fn write_covariance<W: Write>(state: &GaussianState, mut out: W) -> Result<()> {
    let n = state.sigma.nrows();
    writeln!(out, "# covariance {n}x{n}, ordering x1 p1 x2 p2 ...")?;
    for i in 0..n {
        let mut line = String::new();
        for j in 0..n {
            if j > 0 {
                line.push(' ');
            }
            write!(line, "{:e}", state.sigma[(i, j)]).expect("writing to a String");
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Parses the format of [`write_covariance`]; `#` starts a comment line.
pub fn read_covariance<R: BufRead>(input: R) -> Result<GaussianState> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let row = t
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|e| domain(format!("line {}: `{tok}`: {e}", lineno + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(domain(
            "covariance rows must all have as many entries as there are rows",
        ));
    }
    GaussianState::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}
