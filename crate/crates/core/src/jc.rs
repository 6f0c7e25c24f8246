//! Resonant absorption of a single field mode by a ground- or excited-state
//! two-level atom, in the rotating-wave approximation.
//!
//! One interaction of pulse area `gt` maps a field state on `dim` levels to a
//! state on `dim + 1` levels: an excited atom can deposit one quantum above
//! the old truncation edge. The map is completely positive and trace
//! preserving on the enlarged space, built from four real Kraus operators
//! (atom found in the ground or excited state, entered in the ground or
//! excited state).

use ndarray::{s, Array2};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, NumberDistribution};
use crate::scalar::Scalar;

fn check_pe<F: Scalar>(pe: F) -> Result<()> {
    let half = F::of(0.5);
    if !pe.is_finite() || pe < F::zero() || pe > half {
        return Err(Error::InvalidParameter(format!(
            "excited-state probability must lie in [0, 1/2], got {pe}"
        )));
    }
    Ok(())
}

fn check_gt<F: Scalar>(gt: F) -> Result<()> {
    if !gt.is_finite() || gt < F::zero() {
        return Err(Error::InvalidParameter(format!(
            "pulse area must be finite and nonnegative, got {gt}"
        )));
    }
    Ok(())
}

/// The four Kraus operators of one absorption step, as real matrices on the
/// `dim + 1` dimensional workspace.
///
/// Naming is atom-out, atom-in: `a_eg` is the branch where a ground-state
/// atom is found excited (it absorbed one quantum), `a_ge` where an excited
/// atom is found in the ground state (it emitted one quantum).
#[derive(Debug, Clone)]
pub struct KrausSet<F: Scalar> {
    gt: F,
    dim: usize,
    a_gg: Array2<F>,
    a_eg: Array2<F>,
    a_ee: Array2<F>,
    a_ge: Array2<F>,
}

impl<F: Scalar> KrausSet<F> {
    /// Builds the operators for pulse area `gt` acting on `dim` input levels.
    pub fn new(gt: F, dim: usize) -> Result<Self> {
        check_gt(gt)?;
        if dim == 0 {
            return Err(Error::InvalidDimension(
                "absorption needs at least one field level".into(),
            ));
        }
        let w = dim + 1;
        let mut a_gg = Array2::zeros((w, w));
        let mut a_eg = Array2::zeros((w, w));
        let mut a_ee = Array2::zeros((w, w));
        let mut a_ge = Array2::zeros((w, w));
        for n in 0..w {
            let root_n = F::of(n as f64).sqrt();
            let root_n1 = F::of((n + 1) as f64).sqrt();
            a_gg[[n, n]] = (gt * root_n).cos();
            a_ee[[n, n]] = (gt * root_n1).cos();
            if n >= 1 {
                // absorption lowers the photon number by one
                a_eg[[n - 1, n]] = (gt * root_n).sin();
            }
            if n + 1 < w {
                // emission raises it; the sign follows from i sin applied twice
                a_ge[[n + 1, n]] = -(gt * root_n1).sin();
            }
        }
        Ok(Self { gt, dim, a_gg, a_eg, a_ee, a_ge })
    }

    pub fn gt(&self) -> F {
        self.gt
    }

    /// Number of input levels; the operators act on `dim() + 1`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn a_gg(&self) -> &Array2<F> {
        &self.a_gg
    }

    pub fn a_eg(&self) -> &Array2<F> {
        &self.a_eg
    }

    pub fn a_ee(&self) -> &Array2<F> {
        &self.a_ee
    }

    pub fn a_ge(&self) -> &Array2<F> {
        &self.a_ge
    }

    /// Max deviation of `A_gg' A_gg + A_eg' A_eg` from the identity, over the
    /// whole workspace. Exactly zero in exact arithmetic.
    pub fn ground_completeness_deviation(&self) -> F {
        let sum = self.a_gg.t().dot(&self.a_gg) + self.a_eg.t().dot(&self.a_eg);
        max_identity_deviation(&sum, self.dim + 1)
    }

    /// Max deviation of `A_ee' A_ee + A_ge' A_ge` from the identity on the
    /// input block (indices below `dim`). The top workspace row is excluded:
    /// an excited atom at the truncation edge has nowhere to deposit its
    /// quantum, so completeness holds only where the input state lives.
    pub fn excited_completeness_deviation(&self) -> F {
        let sum = self.a_ee.t().dot(&self.a_ee) + self.a_ge.t().dot(&self.a_ge);
        max_identity_deviation(&sum, self.dim)
    }
}

fn max_identity_deviation<F: Scalar>(m: &Array2<F>, upto: usize) -> F {
    let mut worst = F::zero();
    for i in 0..upto {
        for j in 0..upto {
            let target = if i == j { F::one() } else { F::zero() };
            let dev = (m[[i, j]] - target).abs();
            if dev > worst {
                worst = dev;
            }
        }
    }
    worst
}

fn sandwich<F: Scalar>(a: &Array2<Complex<F>>, rho: &Array2<Complex<F>>) -> Array2<Complex<F>> {
    // all Kraus operators are real, so the adjoint is the plain transpose
    a.dot(rho).dot(&a.t())
}

fn complexify<F: Scalar>(a: &Array2<F>) -> Array2<Complex<F>> {
    a.mapv(|x| Complex::new(x, F::zero()))
}

/// Sends `rho` through one absorption step against an atom that is excited
/// with probability `pe`. The output has one more level than the input.
///
/// The input must carry negligible population at its truncation edge;
/// otherwise the step would push real weight out of the representable space
/// and the result is refused.
pub fn apply<F: Scalar>(rho: &DensityMatrix<F>, pe: F, gt: F) -> Result<DensityMatrix<F>> {
    check_pe(pe)?;
    check_gt(gt)?;
    let leakage = rho.leakage();
    if leakage > F::LEAK_TOL {
        return Err(Error::TruncationLeakage {
            leakage: leakage.to_f64().unwrap_or(f64::NAN),
            limit: F::LEAK_TOL.to_f64().unwrap_or(f64::NAN),
        });
    }
    let dim = rho.dim();
    let kraus = KrausSet::new(gt, dim)?;
    let w = dim + 1;

    let mut emb = Array2::<Complex<F>>::zeros((w, w));
    emb.slice_mut(s![..dim, ..dim]).assign(rho.elements());

    let ground = sandwich(&complexify(&kraus.a_gg), &emb)
        + sandwich(&complexify(&kraus.a_eg), &emb);
    let excited = sandwich(&complexify(&kraus.a_ee), &emb)
        + sandwich(&complexify(&kraus.a_ge), &emb);

    let pg = Complex::new(F::one() - pe, F::zero());
    let pc = Complex::new(pe, F::zero());
    let out = ground.mapv(|z| z * pg) + excited.mapv(|z| z * pc);
    DensityMatrix::from_elements(out)
}

/// Photon-number distribution after one absorption step on a truncated
/// thermal state, by direct bookkeeping of the four branches instead of
/// matrix products.
///
/// Population can enter level `n` three ways: survive there (atom measured
/// in the state it entered with), drop from `n + 1` (absorption), or climb
/// from `n - 1` (emission). The input is the thermal distribution cut off at
/// `dim` levels, so this matches the matrix route entry for entry.
pub fn output_number_stats<F: Scalar>(
    nbar: F,
    pe: F,
    gt: F,
    dim: usize,
) -> Result<NumberDistribution<F>> {
    check_pe(pe)?;
    check_gt(gt)?;
    if !nbar.is_finite() || nbar < F::zero() {
        return Err(Error::InvalidParameter(format!(
            "mean occupation must be finite and nonnegative, got {nbar}"
        )));
    }
    if dim == 0 {
        return Err(Error::InvalidDimension(
            "need at least one field level".into(),
        ));
    }

    let one = F::one();
    let q = nbar / (one + nbar);
    let mut p = Vec::with_capacity(dim);
    let mut value = one / (one + nbar);
    for _ in 0..dim {
        p.push(value);
        value *= q;
    }
    let p_at = |n: isize| -> F {
        if n >= 0 && (n as usize) < dim {
            p[n as usize]
        } else {
            F::zero()
        }
    };

    let pg = one - pe;
    let mut out = Vec::with_capacity(dim);
    for n in 0..dim {
        let i = n as isize;
        let sin_n = (gt * F::of(n as f64).sqrt()).sin();
        let cos_n = (gt * F::of(n as f64).sqrt()).cos();
        let sin_n1 = (gt * F::of((n + 1) as f64).sqrt()).sin();
        let cos_n1 = (gt * F::of((n + 1) as f64).sqrt()).cos();
        let ground = cos_n * cos_n * p_at(i) + sin_n1 * sin_n1 * p_at(i + 1);
        let excited = cos_n1 * cos_n1 * p_at(i) + sin_n * sin_n * p_at(i - 1);
        out.push(pg * ground + pe * excited);
    }
    NumberDistribution::new(out)
}

/// Runs `m` absorption steps with ground-state atoms (`pe = 0`), trimming
/// the workspace back to `dim + 1` levels after each step.
///
/// Ground-state atoms only remove quanta, so the level gained per step stays
/// empty after the first and trimming discards nothing.
pub fn repeated_absorption<F: Scalar>(
    rho: &DensityMatrix<F>,
    gt: F,
    m: usize,
) -> Result<DensityMatrix<F>> {
    check_gt(gt)?;
    let mut state = rho.clone();
    let target = rho.dim() + 1;
    for _ in 0..m {
        state = apply(&state, F::zero(), gt)?;
        if state.dim() > target {
            state = state.trimmed(target)?;
        }
    }
    Ok(state)
}
