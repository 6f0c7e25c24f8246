//! Single-mode states on a truncated Fock space.
//!
//! Matrices are stored dense; for every quantity computed here the truncated
//! dimension stays in the low hundreds. [`required_dim`] picks the dimension
//! for a thermal occupation so the discarded tail is below a tolerance, and
//! the dynamics add their own guard row on top (see [`crate::jc`]).

use ndarray::Array2;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::hermitian_min_eigenvalue;
use crate::scalar::Scalar;

/// Default tail tolerance used by sweep drivers when picking a dimension.
pub const DEFAULT_TAIL_TOL: f64 = 1e-9;

/// Mean thermal occupation together with the two-level excitation
/// probability; the pair every dynamics call is parameterized by.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalParams<F: Scalar> {
    pub nbar: F,
    pub pe: F,
}

impl<F: Scalar> ThermalParams<F> {
    /// Requires `nbar >= 0` and `0 <= pe <= 1/2`.
    pub fn new(nbar: F, pe: F) -> Result<Self> {
        if !(nbar >= F::zero()) {
            return Err(Error::InvalidParameter(format!("nbar = {nbar} must be >= 0")));
        }
        if !(pe >= F::zero() && pe <= F::of(0.5)) {
            return Err(Error::InvalidParameter(format!("pe = {pe} must lie in [0, 1/2]")));
        }
        Ok(Self { nbar, pe })
    }
}

/// Photon-number probabilities. Entries may carry eigensolver-scale negative
/// noise; reads clamp anything in `(-NOISE_TOL, 0)` to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct NumberDistribution<F: Scalar> {
    probs: Vec<F>,
}

impl<F: Scalar> NumberDistribution<F> {
    /// Requires every entry `>= -NOISE_TOL` and a total at most `1 + SYM_TOL`.
    pub fn new(probs: Vec<F>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDimension("empty number distribution".into()));
        }
        for (n, &p) in probs.iter().enumerate() {
            if !(p >= -F::NOISE_TOL) || !p.is_finite() {
                return Err(Error::CorruptedState(format!("P({n}) = {p} is not a probability")));
            }
        }
        let sum: F = probs.iter().copied().sum();
        if sum > F::one() + F::SYM_TOL {
            return Err(Error::CorruptedState(format!("total probability {sum} exceeds 1")));
        }
        Ok(Self { probs })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// P(n), clamped to zero below; zero beyond the stored range.
    pub fn get(&self, n: usize) -> F {
        match self.probs.get(n) {
            Some(&p) => p.max(F::zero()),
            None => F::zero(),
        }
    }

    /// Clamped entries in order.
    pub fn iter(&self) -> impl Iterator<Item = F> + '_ {
        self.probs.iter().map(|&p| p.max(F::zero()))
    }

    pub fn total(&self) -> F {
        self.iter().sum()
    }

    /// Mean occupation sum_n n P(n).
    pub fn mean(&self) -> F {
        self.iter()
            .enumerate()
            .map(|(n, p)| F::of(n as f64) * p)
            .sum()
    }
}

/// Poisson number distribution with the given mean, truncated to `len`
/// entries. The number statistics of ideal coherent light.
pub fn poisson_distribution<F: Scalar>(mean: F, len: usize) -> Result<NumberDistribution<F>> {
    if !(mean >= F::zero()) {
        return Err(Error::InvalidParameter(format!("Poisson mean {mean} must be >= 0")));
    }
    let mut probs = Vec::with_capacity(len);
    let mut p = (-mean).exp();
    for n in 0..len {
        probs.push(p);
        p = p * mean / F::of((n + 1) as f64);
    }
    NumberDistribution::new(probs)
}

/// Dense density matrix on a truncated Fock space.
///
/// Valid states are Hermitian to `SYM_TOL`, have trace in `(0, 1 + SYM_TOL]`
/// and smallest eigenvalue above `-PSD_TOL`. Construction does not enforce
/// those bounds; [`DensityMatrix::validate`] reports on them.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<F: Scalar> {
    dim: usize,
    elements: Array2<Complex<F>>,
}

impl<F: Scalar> DensityMatrix<F> {
    /// Wraps a square complex matrix.
    pub fn from_elements(elements: Array2<Complex<F>>) -> Result<Self> {
        let (rows, cols) = elements.dim();
        if rows == 0 || rows != cols {
            return Err(Error::InvalidDimension(format!(
                "density matrix must be square and non-empty, got {rows}x{cols}"
            )));
        }
        Ok(Self { dim: rows, elements })
    }

    /// Diagonal state with the given populations.
    pub fn from_diagonal(probs: &[F]) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDimension("empty diagonal".into()));
        }
        let dim = probs.len();
        let mut elements = Array2::zeros((dim, dim));
        for (n, &p) in probs.iter().enumerate() {
            elements[[n, n]] = Complex::new(p, F::zero());
        }
        Ok(Self { dim, elements })
    }

    /// Pure Fock state |n><n| on a `dim`-level space.
    pub fn fock_state(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::InvalidDimension(format!("|{n}> needs dim > {n}, got {dim}")));
        }
        let mut probs = vec![F::zero(); dim];
        probs[n] = F::one();
        Self::from_diagonal(&probs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &Array2<Complex<F>> {
        &self.elements
    }

    /// Real part of the trace.
    pub fn trace(&self) -> F {
        (0..self.dim).map(|i| self.elements[[i, i]].re).sum()
    }

    /// Truncation mass 1 - trace.
    pub fn leakage(&self) -> F {
        F::one() - self.trace()
    }

    /// Largest magnitude among off-diagonal elements.
    pub fn max_off_diagonal(&self) -> F {
        let mut max = F::zero();
        for ((i, j), z) in self.elements.indexed_iter() {
            if i != j {
                max = max.max(z.norm_sqr().sqrt());
            }
        }
        max
    }

    pub fn is_diagonal(&self, tol: F) -> bool {
        self.max_off_diagonal() <= tol
    }

    /// Largest deviation from Hermiticity, max_ij |rho_ij - conj(rho_ji)|.
    pub fn hermiticity_deviation(&self) -> F {
        let mut max = F::zero();
        for i in 0..self.dim {
            for j in i..self.dim {
                let diff = self.elements[[i, j]] - self.elements[[j, i]].conj();
                max = max.max(diff.norm_sqr().sqrt());
            }
        }
        max
    }

    /// Diagonal as a number distribution. Imaginary parts on the diagonal
    /// beyond `SYM_TOL` mean the state is corrupted.
    pub fn number_distribution(&self) -> Result<NumberDistribution<F>> {
        let mut probs = Vec::with_capacity(self.dim);
        for n in 0..self.dim {
            let z = self.elements[[n, n]];
            if z.im.abs() > F::SYM_TOL {
                return Err(Error::CorruptedState(format!(
                    "diagonal element {n} has imaginary part {}",
                    z.im
                )));
            }
            probs.push(z.re);
        }
        NumberDistribution::new(probs)
    }

    /// Drops rows and columns at `new_dim` and above. Only legal when the
    /// discarded diagonal mass is negligible.
    pub(crate) fn trimmed(&self, new_dim: usize) -> Result<Self> {
        if new_dim == 0 || new_dim > self.dim {
            return Err(Error::InvalidDimension(format!(
                "cannot trim {} levels to {new_dim}",
                self.dim
            )));
        }
        let dropped: F = (new_dim..self.dim).map(|i| self.elements[[i, i]].re).sum();
        if dropped > F::TINY {
            return Err(Error::CorruptedState(format!(
                "trim would discard population {dropped}"
            )));
        }
        let elements = self
            .elements
            .slice(ndarray::s![..new_dim, ..new_dim])
            .to_owned();
        Ok(Self { dim: new_dim, elements })
    }

    /// Diagnostic report on the state invariants.
    pub fn validate(&self) -> Result<ValidationReport<F>> {
        let hermiticity_deviation = self.hermiticity_deviation();
        let trace = self.trace();
        let min_eigenvalue = hermitian_min_eigenvalue(&self.elements)?;
        Ok(ValidationReport {
            hermiticity_deviation,
            trace,
            leakage: F::one() - trace,
            min_eigenvalue,
            hermitian_ok: hermiticity_deviation <= F::SYM_TOL,
            trace_ok: trace > F::zero() && trace <= F::one() + F::SYM_TOL,
            psd_ok: min_eigenvalue >= -F::PSD_TOL,
        })
    }
}

/// What [`DensityMatrix::validate`] found.
#[derive(Debug, Clone, Copy)]
pub struct ValidationReport<F: Scalar> {
    pub hermiticity_deviation: F,
    pub trace: F,
    pub leakage: F,
    pub min_eigenvalue: F,
    pub hermitian_ok: bool,
    pub trace_ok: bool,
    pub psd_ok: bool,
}

impl<F: Scalar> ValidationReport<F> {
    pub fn all_ok(&self) -> bool {
        self.hermitian_ok && self.trace_ok && self.psd_ok
    }
}

/// Thermal (geometric) state diag(nbar^n / (1+nbar)^(n+1)) truncated to
/// `dim` levels.
pub fn thermal_state<F: Scalar>(nbar: F, dim: usize) -> Result<DensityMatrix<F>> {
    if !(nbar >= F::zero()) {
        return Err(Error::InvalidParameter(format!("nbar = {nbar} must be >= 0")));
    }
    if dim == 0 {
        return Err(Error::InvalidDimension("thermal state needs dim >= 1".into()));
    }
    let q = nbar / (F::one() + nbar);
    let mut probs = Vec::with_capacity(dim);
    let mut p = F::one() / (F::one() + nbar);
    for _ in 0..dim {
        probs.push(p);
        p = p * q;
    }
    DensityMatrix::from_diagonal(&probs)
}

/// Smallest dimension D with discarded thermal tail (nbar/(1+nbar))^D below
/// `tail_tol`; never less than 2.
pub fn required_dim<F: Scalar>(nbar: F, tail_tol: F) -> Result<usize> {
    if !(nbar >= F::zero()) {
        return Err(Error::InvalidParameter(format!("nbar = {nbar} must be >= 0")));
    }
    if !(tail_tol > F::zero() && tail_tol < F::one()) {
        return Err(Error::InvalidParameter(format!(
            "tail_tol = {tail_tol} must lie in (0, 1)"
        )));
    }
    if nbar == F::zero() {
        return Ok(2);
    }
    let q = nbar / (F::one() + nbar);
    let mut d = (tail_tol.ln() / q.ln())
        .ceil()
        .to_usize()
        .unwrap_or(2)
        .max(2);
    // The log estimate can be off by one either way; settle it exactly.
    while q.powi(d as i32) >= tail_tol {
        d += 1;
    }
    while d > 2 && q.powi(d as i32 - 1) < tail_tol {
        d -= 1;
    }
    Ok(d)
}

/// Excitation probability at which absorption and emission balance for a
/// thermal mode: nbar / (1 + 2 nbar).
pub fn equilibrium_pe<F: Scalar>(nbar: F) -> Result<F> {
    if !(nbar >= F::zero()) {
        return Err(Error::InvalidParameter(format!("nbar = {nbar} must be >= 0")));
    }
    Ok(nbar / (F::one() + F::of(2.0) * nbar))
}
