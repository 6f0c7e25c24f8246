//! Dense symmetric eigenvalue routines.
//!
//! Classic two-stage solver: Householder reduction to tridiagonal form
//! followed by implicit-shift QL iteration, eigenvalues only. Complex
//! Hermitian matrices are handled through the real 2n x 2n embedding
//! [[X, -Y], [Y, X]], whose spectrum is that of X + iY with every
//! eigenvalue doubled.

use ndarray::Array2;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// sqrt(a^2 + b^2) without intermediate over/underflow.
fn pythag<F: Scalar>(a: F, b: F) -> F {
    let (aa, ab) = (a.abs(), b.abs());
    let (big, small) = if aa >= ab { (aa, ab) } else { (ab, aa) };
    if big == F::zero() {
        return F::zero();
    }
    let r = small / big;
    big * (F::one() + r * r).sqrt()
}

/// Householder reduction of the symmetric matrix held row-major in `v`.
/// On return `d` holds the tridiagonal diagonal and `e[1..]` the
/// subdiagonal (`e[0]` is zero). Only the lower triangle of `v` is read.
fn tridiagonalize<F: Scalar>(v: &mut [F], n: usize, d: &mut [F], e: &mut [F]) {
    let idx = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = F::zero();
        let mut h = F::zero();
        for item in d.iter().take(i) {
            scale = scale + item.abs();
        }
        if scale == F::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[idx(i - 1, j)];
            }
        } else {
            for k in 0..i {
                d[k] = d[k] / scale;
                h = h + d[k] * d[k];
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > F::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h = h - f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = F::zero();
            }
            for j in 0..i {
                let fj = d[j];
                let mut gj = e[j] + v[idx(j, j)] * fj;
                for k in (j + 1)..i {
                    gj = gj + v[idx(k, j)] * d[k];
                    e[k] = e[k] + v[idx(k, j)] * fj;
                }
                e[j] = gj;
            }
            let mut fsum = F::zero();
            for j in 0..i {
                e[j] = e[j] / h;
                fsum = fsum + e[j] * d[j];
            }
            let hh = fsum / (h + h);
            for j in 0..i {
                e[j] = e[j] - hh * d[j];
            }
            for j in 0..i {
                let fj = d[j];
                let gj = e[j];
                for k in j..i {
                    v[idx(k, j)] = v[idx(k, j)] - (fj * e[k] + gj * d[k]);
                }
                d[j] = v[idx(i - 1, j)];
            }
        }
    }
    for j in 0..n {
        d[j] = v[idx(j, j)];
    }
    e[0] = F::zero();
}

/// Implicit-shift QL iteration on a tridiagonal matrix; `d`/`e` as produced
/// by [`tridiagonalize`]. Eigenvalues are left in `d`, unsorted.
fn tql_eigenvalues<F: Scalar>(d: &mut [F], e: &mut [F], block: i64) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = F::zero();

    let mut f = F::zero();
    let mut tst1 = F::zero();
    let eps = F::epsilon();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        // e[n-1] is exactly zero, so m <= n-1 here.
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::EigenNonConvergence { block });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / ((F::one() + F::one()) * e[l]);
                let mut r = pythag(p, F::one());
                if p < F::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item = *item - h;
                }
                f = f + h;

                p = d[m];
                let mut c = F::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = F::zero();
                let mut s2 = F::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let gi = c * e[i];
                    let hi = c * p;
                    r = pythag(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * gi;
                    d[i + 1] = hi + s * (c * gi + s * d[i]);
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] = d[l] + f;
        e[l] = F::zero();
    }
    Ok(())
}

pub(crate) fn symmetric_eigenvalues_labeled<F: Scalar>(
    a: &Array2<F>,
    block: i64,
) -> Result<Vec<F>> {
    let (rows, cols) = a.dim();
    if rows != cols {
        return Err(Error::InvalidDimension(format!(
            "eigensolver needs a square matrix, got {rows}x{cols}"
        )));
    }
    let n = rows;
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![a[[0, 0]]]);
    }
    let mut v = vec![F::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            v[i * n + j] = a[[i, j]];
        }
    }
    let mut d = vec![F::zero(); n];
    let mut e = vec![F::zero(); n];
    tridiagonalize(&mut v, n, &mut d, &mut e);
    tql_eigenvalues(&mut d, &mut e, block)?;
    d.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalue is NaN"));
    Ok(d)
}

/// Eigenvalues of a real symmetric matrix, ascending. Only the lower
/// triangle is read, so tiny asymmetries in the input are harmless.
pub fn symmetric_eigenvalues<F: Scalar>(a: &Array2<F>) -> Result<Vec<F>> {
    symmetric_eigenvalues_labeled(a, -1)
}

fn check_square<F: Scalar>(m: &Array2<Complex<F>>) -> Result<usize> {
    let (rows, cols) = m.dim();
    if rows != cols {
        return Err(Error::InvalidDimension(format!(
            "eigensolver needs a square matrix, got {rows}x{cols}"
        )));
    }
    if rows == 0 {
        return Err(Error::InvalidDimension("empty matrix".into()));
    }
    Ok(rows)
}

fn is_exactly_diagonal<F: Scalar>(m: &Array2<Complex<F>>) -> bool {
    m.indexed_iter()
        .all(|((i, j), z)| i == j || (z.re == F::zero() && z.im == F::zero()))
}

/// All eigenvalues of the Hermitian part of a complex matrix, ascending.
///
/// Uses the real 2n x 2n embedding [[X, -Y], [Y, X]], whose spectrum is the
/// Hermitian spectrum with every eigenvalue doubled; adjacent pairs of the
/// sorted embedded spectrum are averaged back down to n values.
pub fn hermitian_eigenvalues<F: Scalar>(m: &Array2<Complex<F>>) -> Result<Vec<F>> {
    let n = check_square(m)?;
    if is_exactly_diagonal(m) {
        let mut eig: Vec<F> = (0..n).map(|i| m[[i, i]].re).collect();
        eig.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalue is NaN"));
        return Ok(eig);
    }

    let half = F::of(0.5);
    let mut embedded = Array2::<F>::zeros((2 * n, 2 * n));
    for i in 0..n {
        for j in 0..n {
            // Hermitian part: X symmetric, Y antisymmetric.
            let x = (m[[i, j]].re + m[[j, i]].re) * half;
            let y = (m[[i, j]].im - m[[j, i]].im) * half;
            embedded[[i, j]] = x;
            embedded[[n + i, n + j]] = x;
            embedded[[i, n + j]] = -y;
            embedded[[n + i, j]] = y;
        }
    }
    let eig = symmetric_eigenvalues(&embedded)?;
    Ok((0..n).map(|i| (eig[2 * i] + eig[2 * i + 1]) * half).collect())
}

/// Smallest eigenvalue of the Hermitian part of a complex matrix.
///
/// Exactly diagonal input short-circuits to the minimum diagonal entry;
/// anything else goes through the real 2n x 2n embedding.
pub fn hermitian_min_eigenvalue<F: Scalar>(m: &Array2<Complex<F>>) -> Result<F> {
    let n = check_square(m)?;
    if is_exactly_diagonal(m) {
        let mut min = m[[0, 0]].re;
        for i in 1..n {
            min = min.min(m[[i, i]].re);
        }
        return Ok(min);
    }
    Ok(hermitian_eigenvalues(m)?[0])
}
