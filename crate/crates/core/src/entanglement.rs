//! Entanglement potential of a single-mode state: send it through a 50:50
//! beam splitter against the vacuum and measure how entangled the two
//! outputs are.
//!
//! Splitting a state that is diagonal in the number basis scatters each
//! level m into the total-photon-number sector m, and the two-mode state
//! block-diagonalizes over those sectors. The sector representation stores
//! only those blocks, which is what makes thermal inputs with a hundred or
//! more levels tractable; a dense two-mode matrix is kept as the fallback
//! for inputs with number coherences.

use ndarray::Array2;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, NumberDistribution};
use crate::linalg::{hermitian_eigenvalues, symmetric_eigenvalues_labeled};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
enum Repr<F: Scalar> {
    /// Block s is the (s+1) x (s+1) matrix over |k, s-k> with k ascending.
    /// Entries outside every block are zero by construction.
    Sectors(Vec<Array2<F>>),
    /// Full matrix over |k, l> with row index k * dim + l.
    Dense(Array2<Complex<F>>),
}

/// State of two field modes with `dim` levels each.
#[derive(Debug, Clone)]
pub struct TwoModeDensityMatrix<F: Scalar> {
    dim: usize,
    repr: Repr<F>,
}

impl<F: Scalar> TwoModeDensityMatrix<F> {
    /// Wraps a dense two-mode matrix; the side length must be a perfect
    /// square since rows are indexed by the pair (k, l).
    pub fn from_dense(elements: Array2<Complex<F>>) -> Result<Self> {
        let (rows, cols) = elements.dim();
        if rows != cols || rows == 0 {
            return Err(Error::InvalidDimension(format!(
                "two-mode matrix must be square and nonempty, got {rows}x{cols}"
            )));
        }
        let dim = (rows as f64).sqrt().round() as usize;
        if dim * dim != rows {
            return Err(Error::InvalidDimension(format!(
                "side {rows} is not a perfect square"
            )));
        }
        Ok(Self { dim, repr: Repr::Dense(elements) })
    }

    /// Wraps a list of total-photon-number sector blocks.
    pub(crate) fn from_sectors(sectors: Vec<Array2<F>>) -> Result<Self> {
        if sectors.is_empty() {
            return Err(Error::InvalidDimension("no sector blocks".into()));
        }
        for (s, block) in sectors.iter().enumerate() {
            if block.dim() != (s + 1, s + 1) {
                return Err(Error::InvalidDimension(format!(
                    "sector {s} block has shape {:?}, want {}x{}",
                    block.dim(),
                    s + 1,
                    s + 1
                )));
            }
        }
        let dim = sectors.len();
        Ok(Self { dim, repr: Repr::Sectors(sectors) })
    }

    /// Levels per mode.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True when the state is held as sector blocks.
    pub fn is_sector_form(&self) -> bool {
        matches!(self.repr, Repr::Sectors(_))
    }

    /// Matrix element <ka, lb| rho |ka2, lb2>.
    pub fn element(&self, ka: usize, lb: usize, ka2: usize, lb2: usize) -> Complex<F> {
        assert!(
            ka < self.dim && lb < self.dim && ka2 < self.dim && lb2 < self.dim,
            "mode index out of range for dim {}",
            self.dim
        );
        match &self.repr {
            Repr::Sectors(sectors) => {
                let s = ka + lb;
                if s != ka2 + lb2 || s >= sectors.len() {
                    Complex::new(F::zero(), F::zero())
                } else {
                    Complex::new(sectors[s][[ka, ka2]], F::zero())
                }
            }
            Repr::Dense(m) => m[[ka * self.dim + lb, ka2 * self.dim + lb2]],
        }
    }

    /// Expands to the full (dim^2) x (dim^2) matrix.
    pub fn to_dense(&self) -> Array2<Complex<F>> {
        match &self.repr {
            Repr::Dense(m) => m.clone(),
            Repr::Sectors(sectors) => {
                let d = self.dim;
                let mut out = Array2::zeros((d * d, d * d));
                for (s, block) in sectors.iter().enumerate() {
                    for k in 0..=s {
                        for k2 in 0..=s {
                            out[[k * d + (s - k), k2 * d + (s - k2)]] =
                                Complex::new(block[[k, k2]], F::zero());
                        }
                    }
                }
                out
            }
        }
    }

    pub fn trace(&self) -> F {
        match &self.repr {
            Repr::Sectors(sectors) => sectors
                .iter()
                .map(|b| (0..b.nrows()).map(|k| b[[k, k]]).sum::<F>())
                .sum(),
            Repr::Dense(m) => (0..self.dim * self.dim).map(|i| m[[i, i]].re).sum(),
        }
    }

    /// Occupation distribution of the first mode.
    pub fn reduced_a(&self) -> Result<NumberDistribution<F>> {
        let d = self.dim;
        let mut probs = vec![F::zero(); d];
        match &self.repr {
            Repr::Sectors(sectors) => {
                for (s, block) in sectors.iter().enumerate() {
                    for k in 0..=s.min(d - 1) {
                        probs[k] += block[[k, k]];
                    }
                }
            }
            Repr::Dense(m) => {
                for k in 0..d {
                    for l in 0..d {
                        probs[k] += m[[k * d + l, k * d + l]].re;
                    }
                }
            }
        }
        NumberDistribution::new(probs)
    }

    /// Occupation distribution of the second mode.
    pub fn reduced_b(&self) -> Result<NumberDistribution<F>> {
        let d = self.dim;
        let mut probs = vec![F::zero(); d];
        match &self.repr {
            Repr::Sectors(sectors) => {
                for (s, block) in sectors.iter().enumerate() {
                    for k in 0..=s {
                        let l = s - k;
                        if l < d {
                            probs[l] += block[[k, k]];
                        }
                    }
                }
            }
            Repr::Dense(m) => {
                for k in 0..d {
                    for l in 0..d {
                        probs[l] += m[[k * d + l, k * d + l]].re;
                    }
                }
            }
        }
        NumberDistribution::new(probs)
    }

    /// Transposes the second mode's indices, returning a dense matrix.
    ///
    /// The result is dense even for sector-form input because the transpose
    /// scatters sector entries across total photon numbers; keep `dim`
    /// moderate before calling this.
    pub fn partial_transpose(&self) -> Self {
        let d = self.dim;
        let mut out = Array2::zeros((d * d, d * d));
        for k in 0..d {
            for l in 0..d {
                for k2 in 0..d {
                    for l2 in 0..d {
                        out[[k * d + l, k2 * d + l2]] = self.element(k, l2, k2, l);
                    }
                }
            }
        }
        Self { dim: d, repr: Repr::Dense(out) }
    }

    /// Trace norm of the partial transpose.
    ///
    /// Sector form never builds the transposed matrix: blocks of fixed
    /// occupation difference are extracted and diagonalized one at a time.
    /// Negative eigenvalues smaller than the symmetry tolerance are rounding
    /// debris and count as zero.
    pub fn pt_trace_norm(&self) -> Result<F> {
        match &self.repr {
            Repr::Sectors(sectors) => {
                let d = self.dim;
                let mut total = F::zero();
                for diff in -(d as i64 - 1)..=(d as i64 - 1) {
                    let e = diff.unsigned_abs() as usize;
                    let size = d - e;
                    let mut m = Array2::zeros((size, size));
                    for r in 0..size {
                        for rp in 0..size {
                            let s = r + rp + e;
                            if s < d {
                                m[[r, rp]] = if diff >= 0 {
                                    sectors[s][[r + e, rp + e]]
                                } else {
                                    sectors[s][[r, rp]]
                                };
                            }
                        }
                    }
                    for lambda in symmetric_eigenvalues_labeled(&m, diff)? {
                        total += clamped_abs(lambda);
                    }
                }
                Ok(total)
            }
            Repr::Dense(_) => {
                let pt = self.partial_transpose();
                let Repr::Dense(m) = &pt.repr else { unreachable!() };
                let eig = if m.iter().all(|z| z.im == F::zero()) {
                    let real = m.mapv(|z| z.re);
                    crate::linalg::symmetric_eigenvalues(&real)?
                } else {
                    hermitian_eigenvalues(m)?
                };
                Ok(eig.into_iter().map(clamped_abs).sum())
            }
        }
    }

    /// Logarithmic negativity, log2 of the partial-transpose trace norm.
    pub fn log_negativity(&self) -> Result<F> {
        Ok(self.pt_trace_norm()?.log2())
    }

    /// Entanglement measure on the doubled-negativity scale,
    /// log2(2 |rho_PT|_1 - 1), clamped at zero.
    ///
    /// Writing the trace norm as 1 + 2N with N the summed magnitude of
    /// negative eigenvalues, this is log2(1 + 4N): it doubles the weight of
    /// the negativity inside the logarithm, so a lone maximally entangled
    /// two-level coherence scores 1/2 instead of log2(3/2). All potential
    /// figures in this crate use this scale.
    pub fn lnp(&self) -> Result<F> {
        let s = self.pt_trace_norm()?;
        let arg = F::of(2.0) * s - F::one();
        if arg <= F::zero() {
            return Ok(F::zero());
        }
        Ok(arg.log2().max(F::zero()))
    }
}

fn clamped_abs<F: Scalar>(lambda: F) -> F {
    if lambda >= F::zero() {
        lambda
    } else if -lambda < F::SYM_TOL {
        F::zero()
    } else {
        -lambda
    }
}

/// Splits a single-mode state on a balanced beam splitter with vacuum in
/// the other port.
///
/// Number-diagonal input takes the sector route; anything with coherences
/// falls back to the dense route.
pub fn split_state<F: Scalar>(rho: &DensityMatrix<F>) -> Result<TwoModeDensityMatrix<F>> {
    if rho.is_diagonal(F::SYM_TOL) {
        split_diagonal(rho)
    } else {
        split_general(rho)
    }
}

/// Amplitudes <k, m-k | split of |m> >: square roots of symmetric binomial
/// weights, all positive.
fn split_amplitudes<F: Scalar>(m: usize) -> Vec<F> {
    let mut v = Vec::with_capacity(m + 1);
    let mut value = F::of(2.0).powf(-F::of(m as f64) / F::of(2.0));
    for k in 0..=m {
        v.push(value);
        if k < m {
            value = value * (F::of((m - k) as f64) / F::of((k + 1) as f64)).sqrt();
        }
    }
    v
}

/// Sector route: each input level m becomes the rank-one block p_m v v' in
/// total-photon-number sector m.
pub(crate) fn split_diagonal<F: Scalar>(
    rho: &DensityMatrix<F>,
) -> Result<TwoModeDensityMatrix<F>> {
    if !rho.is_diagonal(F::SYM_TOL) {
        return Err(Error::CorruptedState(
            "sector split needs a number-diagonal state".into(),
        ));
    }
    let d = rho.dim();
    let mut sectors = Vec::with_capacity(d);
    for m in 0..d {
        let p = rho.elements()[[m, m]].re;
        let v = split_amplitudes::<F>(m);
        let mut block = Array2::zeros((m + 1, m + 1));
        for k in 0..=m {
            for k2 in 0..=m {
                block[[k, k2]] = p * v[k] * v[k2];
            }
        }
        sectors.push(block);
    }
    TwoModeDensityMatrix::from_sectors(sectors)
}

/// Dense route: beam-splitter amplitudes built by the one-photon-at-a-time
/// recursion rather than binomials, filling the full two-mode matrix.
pub(crate) fn split_general<F: Scalar>(
    rho: &DensityMatrix<F>,
) -> Result<TwoModeDensityMatrix<F>> {
    let d = rho.dim();
    let mut table: Vec<Vec<F>> = Vec::with_capacity(d);
    table.push(vec![F::one()]);
    for m in 1..d {
        let prev = &table[m - 1];
        let norm = (F::of(2.0) * F::of(m as f64)).sqrt();
        let mut row = vec![F::zero(); m + 1];
        for (k, slot) in row.iter_mut().enumerate() {
            let from_a = if k >= 1 {
                F::of(k as f64).sqrt() * prev[k - 1]
            } else {
                F::zero()
            };
            let from_b = if k < m {
                F::of((m - k) as f64).sqrt() * prev[k]
            } else {
                F::zero()
            };
            *slot = (from_a + from_b) / norm;
        }
        table.push(row);
    }

    let zero = Complex::new(F::zero(), F::zero());
    let mut out = Array2::from_elem((d * d, d * d), zero);
    for m in 0..d {
        for m2 in 0..d {
            let z = rho.elements()[[m, m2]];
            if z == zero {
                continue;
            }
            for k in 0..=m {
                for k2 in 0..=m2 {
                    out[[k * d + (m - k), k2 * d + (m2 - k2)]] =
                        z.scale(table[m][k] * table[m2][k2]);
                }
            }
        }
    }
    TwoModeDensityMatrix::from_dense(out)
}

/// Entanglement potential of a single-mode state: split it and score the
/// result on the doubled-negativity scale.
pub fn lnp<F: Scalar>(rho: &DensityMatrix<F>) -> Result<F> {
    split_state(rho)?.lnp()
}

/// Potential of the state a single ground-state-dominated atom pass leaves
/// behind the vacuum: input |0><0|, atom excited with probability `pe`,
/// pulse area `gt`.
///
/// The output is diag(1 - pe sin^2 gt, pe sin^2 gt), whose split has
/// partial-transpose trace norm p1 + sqrt(p0^2 + p1^2); everything follows
/// in closed form.
pub fn lnp_ground_closed_form<F: Scalar>(pe: F, gt: F) -> Result<F> {
    let half = F::of(0.5);
    if !pe.is_finite() || pe < F::zero() || pe > half {
        return Err(Error::InvalidParameter(format!(
            "excited-state probability must lie in [0, 1/2], got {pe}"
        )));
    }
    if !gt.is_finite() || gt < F::zero() {
        return Err(Error::InvalidParameter(format!(
            "pulse area must be finite and nonnegative, got {gt}"
        )));
    }
    let s2 = gt.sin() * gt.sin();
    let p1 = pe * s2;
    let p0 = F::one() - p1;
    let norm = (p0 * p0 + p1 * p1).sqrt();
    let arg = F::of(2.0) * (p1 + norm) - F::one();
    if arg <= F::zero() {
        return Ok(F::zero());
    }
    Ok(arg.log2().max(F::zero()))
}

/// Projects both modes onto the levels 0..=`max_level` and renormalizes.
///
/// Returns the surviving state and the success probability (the trace kept
/// by the projection). Refuses when effectively nothing survives.
pub fn filter_project<F: Scalar>(
    rho2: &TwoModeDensityMatrix<F>,
    max_level: usize,
) -> Result<(TwoModeDensityMatrix<F>, F)> {
    let d = rho2.dim();
    let keep = |k: usize, l: usize| k <= max_level && l <= max_level;

    let (repr, success) = match &rho2.repr {
        Repr::Sectors(sectors) => {
            let mut kept: Vec<Array2<F>> = Vec::with_capacity(sectors.len());
            let mut success = F::zero();
            for (s, block) in sectors.iter().enumerate() {
                let mut out = Array2::zeros((s + 1, s + 1));
                for k in 0..=s {
                    if !keep(k, s - k) {
                        continue;
                    }
                    for k2 in 0..=s {
                        if keep(k2, s - k2) {
                            out[[k, k2]] = block[[k, k2]];
                        }
                    }
                    success += out[[k, k]];
                }
                kept.push(out);
            }
            (Repr::Sectors(kept), success)
        }
        Repr::Dense(m) => {
            let zero = Complex::new(F::zero(), F::zero());
            let mut out = Array2::from_elem((d * d, d * d), zero);
            let mut success = F::zero();
            for k in 0..d {
                for l in 0..d {
                    if !keep(k, l) {
                        continue;
                    }
                    let row = k * d + l;
                    success += m[[row, row]].re;
                    for k2 in 0..d {
                        for l2 in 0..d {
                            if keep(k2, l2) {
                                out[[row, k2 * d + l2]] = m[[row, k2 * d + l2]];
                            }
                        }
                    }
                }
            }
            (Repr::Dense(out), success)
        }
    };

    if success < F::TINY {
        return Err(Error::EmptyFilter {
            trace: success.to_f64().unwrap_or(f64::NAN),
        });
    }
    let inv = F::one() / success;
    let repr = match repr {
        Repr::Sectors(sectors) => {
            Repr::Sectors(sectors.into_iter().map(|b| b.mapv(|x| x * inv)).collect())
        }
        Repr::Dense(m) => Repr::Dense(m.mapv(|z| z.scale(inv))),
    };
    Ok((TwoModeDensityMatrix { dim: d, repr }, success))
}
