//! Witness behavior in the limit of very hot input light.
//!
//! When the mean occupation is large, neighboring thermal populations are
//! nearly equal and one absorption pass reshapes them by the factor
//! 2 pe + F_n (1 - 2 pe), where F_n = cos^2(gt sqrt(n)) + sin^2(gt sqrt(n+1)).
//! The witness sign then depends only on gt, the order n, and the atom
//! excitation pe, so detectability can be mapped without ever building a
//! state. The best possible configuration (F_n = 2, neighbors 0) gives the
//! order-n excitation ceiling sqrt(n^2 + n) - n.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Descending pe samples used to locate the positive region of the
/// criterion before bisecting.
const PE_SAMPLES: usize = 256;
/// Bisection width in pe at which the root is considered converged.
const PE_TOL: f64 = 1e-9;
/// Golden-section window width in gt at which refinement stops.
const GT_REFINE_TOL: f64 = 1e-6;

/// The population reshaping factor F_n = cos^2(gt sqrt(n)) + sin^2(gt sqrt(n+1)).
///
/// Bounded by [0, 2]; equals 1 at gt = 0 for every n, and 1 + sin^2(gt)
/// at n = 0.
pub fn big_f<F: Scalar>(gt: F, n: usize) -> F {
    let c = (gt * F::of(n as f64).sqrt()).cos();
    let s = (gt * F::of((n + 1) as f64).sqrt()).sin();
    c * c + s * s
}

fn bracket<F: Scalar>(f: F, pe: F) -> F {
    let two_pe = F::of(2.0) * pe;
    two_pe + f * (F::one() - two_pe)
}

fn criterion_from_triple<F: Scalar>(fs: [F; 3], n: usize, pe: F) -> F {
    let b_below = bracket(fs[0], pe);
    let b_at = bracket(fs[1], pe);
    let b_above = bracket(fs[2], pe);
    F::of(n as f64) * b_at * b_at - F::of((n + 1) as f64) * b_below * b_above
}

fn f_triple<F: Scalar>(gt: F, n: usize) -> [F; 3] {
    [big_f(gt, n - 1), big_f(gt, n), big_f(gt, n + 1)]
}

/// Hot-light witness criterion at order n: positive means the order-n
/// witness fires on the output of one absorption pass, for any input
/// occupation large compared to n.
pub fn asymptotic_criterion<F: Scalar>(gt: F, n: usize, pe: F) -> Result<F> {
    if n == 0 {
        return Err(Error::InvalidParameter("witness order starts at 1".into()));
    }
    Ok(criterion_from_triple(f_triple(gt, n), n, pe))
}

/// Excitation ceiling sqrt(n^2 + n) - n for order-n detection, computed in
/// the cancellation-free form n / (sqrt(n^2 + n) + n).
pub fn pe_bound<F: Scalar>(n: usize) -> Result<F> {
    if n == 0 {
        return Err(Error::InvalidParameter("witness order starts at 1".into()));
    }
    let nf = F::of(n as f64);
    Ok(nf / ((nf * nf + nf).sqrt() + nf))
}

/// Outcome of the maximal-excitation search at one witness order.
#[derive(Debug, Clone)]
pub struct AsymptoticResult<F: Scalar> {
    pub n: usize,
    /// Pulse area at which the largest root was found; 0 when nothing was.
    pub gt_star: F,
    /// Largest atom excitation at which the order-n witness still fires.
    pub pe_star: F,
    /// The analytic ceiling sqrt(n^2 + n) - n.
    pub bound: F,
    /// False when the criterion was never positive anywhere in the range.
    pub detected: bool,
    /// (F_{n-1}, F_n, F_{n+1}) at gt_star; how close the search got to the
    /// ideal (0, 2, 0) configuration.
    pub f_triple: [F; 3],
}

/// Largest pe in [0, 1/2] with a positive criterion at this gt, or None.
///
/// The criterion is quadratic in pe and always -1 at pe = 1/2, so a
/// descending sample scan finds the top of the positive region and
/// bisection sharpens it.
fn max_root<F: Scalar>(fs: [F; 3], n: usize) -> Option<F> {
    let half = F::of(0.5);
    let step = half / F::of(PE_SAMPLES as f64);
    let mut top = None;
    for i in (0..PE_SAMPLES).rev() {
        let pe = step * F::of(i as f64);
        if criterion_from_triple(fs, n, pe) > F::zero() {
            top = Some(pe);
            break;
        }
    }
    let mut lo = top?;
    let mut hi = (lo + step).min(half);
    let tol = F::of(PE_TOL);
    while hi - lo > tol {
        let mid = (lo + hi) * half;
        if mid <= lo || mid >= hi {
            break;
        }
        if criterion_from_triple(fs, n, mid) > F::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((lo + hi) * half)
}

/// Scans pulse areas in `gt_range` on a grid of the given resolution
/// (seeded additionally with pi sqrt(n), the natural resonance), finds the
/// largest excitation with a positive criterion at each, and refines the
/// best candidate by golden-section search in gt.
pub fn search_max_pe<F: Scalar>(
    n: usize,
    gt_range: (F, F),
    resolution: F,
) -> Result<AsymptoticResult<F>> {
    if n == 0 {
        return Err(Error::InvalidParameter("witness order starts at 1".into()));
    }
    let (lo, hi) = gt_range;
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi || lo < F::zero() {
        return Err(Error::InvalidParameter(format!(
            "need a nonempty pulse-area range with 0 <= lo < hi, got ({lo}, {hi})"
        )));
    }
    if !(resolution > F::zero()) {
        return Err(Error::InvalidParameter(format!(
            "resolution must be positive, got {resolution}"
        )));
    }
    let bound = pe_bound(n)?;

    let evaluate = |gt: F| -> Option<(F, F)> {
        max_root(f_triple(gt, n), n).map(|root| (root, gt))
    };

    let mut best: Option<(F, F)> = None;
    let mut consider = |candidate: Option<(F, F)>| {
        if let Some((root, gt)) = candidate {
            if best.map_or(true, |(r, _)| root > r) {
                best = Some((root, gt));
            }
        }
    };
    let steps = ((hi - lo) / resolution)
        .floor()
        .to_usize()
        .ok_or_else(|| Error::InvalidParameter("resolution too fine for range".into()))?;
    for k in 1..=steps {
        consider(evaluate(lo + resolution * F::of(k as f64)));
    }
    let seed = F::of(std::f64::consts::PI) * F::of(n as f64).sqrt();
    if seed > lo && seed < hi {
        consider(evaluate(seed));
    }

    let Some((grid_root, grid_gt)) = best else {
        return Ok(AsymptoticResult {
            n,
            gt_star: F::zero(),
            pe_star: F::zero(),
            bound,
            detected: false,
            f_triple: f_triple(F::zero(), n),
        });
    };

    // golden-section maximization of the root around the winning grid point
    let objective = |gt: F| evaluate(gt).map_or(F::of(-1.0), |(root, _)| root);
    let mut a = (grid_gt - resolution).max(lo);
    let mut b = (grid_gt + resolution).min(hi);
    let inv_phi = F::of((5.0f64.sqrt() - 1.0) / 2.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = objective(c);
    let mut fd = objective(d);
    let gt_tol = F::of(GT_REFINE_TOL);
    while b - a > gt_tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
    }
    let refined_gt = (a + b) * F::of(0.5);
    let (pe_star, gt_star) = match evaluate(refined_gt) {
        Some((root, gt)) if root > grid_root => (root, gt),
        _ => (grid_root, grid_gt),
    };

    Ok(AsymptoticResult {
        n,
        gt_star,
        pe_star,
        bound,
        detected: true,
        f_triple: f_triple(gt_star, n),
    })
}
