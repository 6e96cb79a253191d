//! Symmetric tridiagonal eigenproblems: Sturm-count bisection and inverse iteration.

use crate::error::{LtError, Result};

/// Number of eigenvalues strictly below `x`.
pub fn count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = diag[0] - x;
    if q.abs() < tiny {
        q = -tiny;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        q = diag[i] - x - off[i - 1] * off[i - 1] / q;
        if q.abs() < tiny {
            q = -tiny;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin enclosure of the spectrum.
pub fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - left - right);
        hi = hi.max(diag[i] + left + right);
    }
    (lo, hi)
}

/// The (at most `k`) smallest eigenvalues below `upper`, ascending, to bisection accuracy.
pub fn lowest_eigenvalues(diag: &[f64], off: &[f64], k: usize, upper: f64) -> Vec<f64> {
    if diag.is_empty() {
        return Vec::new();
    }
    let (glo, ghi) = gershgorin(diag, off);
    let scale = glo.abs().max(ghi.abs()).max(f64::MIN_POSITIVE);
    let top = upper.min(ghi + scale * 1e-12);
    let available = count_below(diag, off, top).min(k);
    let mut out = Vec::with_capacity(available);
    let mut floor = glo - scale * 1e-12;
    for j in 0..available {
        let mut lo = floor;
        let mut hi = top;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
            if count_below(diag, off, mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let lam = 0.5 * (lo + hi);
        out.push(lam);
        floor = lo;
    }
    out
}

/// Solves (T − σ)x = b in place by Gaussian elimination with partial pivoting.
fn shifted_solve(diag: &[f64], off: &[f64], sigma: f64, b: &mut [f64], eps: f64) {
    let n = diag.len();
    if n == 1 {
        let a = diag[0] - sigma;
        b[0] /= if a.abs() < eps { eps } else { a };
        return;
    }
    let mut a: Vec<f64> = diag.iter().map(|d| d - sigma).collect();
    let mut c: Vec<f64> = off.to_vec();
    let mut l: Vec<f64> = off.to_vec();
    let mut c2 = vec![0.0; n];
    let mut swapped = vec![false; n];
    for i in 0..n - 1 {
        if a[i].abs() >= l[i].abs() {
            if a[i].abs() < eps {
                a[i] = eps;
            }
            let f = l[i] / a[i];
            l[i] = f;
            a[i + 1] -= f * c[i];
        } else {
            let f = a[i] / l[i];
            a[i] = l[i];
            l[i] = f;
            let old_c = c[i];
            c[i] = a[i + 1];
            a[i + 1] = old_c - f * a[i + 1];
            if i + 2 < n {
                c2[i] = c[i + 1];
                c[i + 1] = -f * c2[i];
            }
            swapped[i] = true;
        }
    }
    if a[n - 1].abs() < eps {
        a[n - 1] = eps;
    }
    for i in 0..n - 1 {
        if swapped[i] {
            let bi = b[i];
            b[i] = b[i + 1];
            b[i + 1] = bi - l[i] * b[i];
        } else {
            b[i + 1] -= l[i] * b[i];
        }
    }
    b[n - 1] /= a[n - 1];
    b[n - 2] = (b[n - 2] - c[n - 2] * b[n - 1]) / a[n - 2];
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - c[i] * b[i + 1] - c2[i] * b[i + 2]) / a[i];
    }
}

fn matvec(diag: &[f64], off: &[f64], v: &[f64], out: &mut [f64]) {
    let n = diag.len();
    for i in 0..n {
        let mut s = diag[i] * v[i];
        if i > 0 {
            s += off[i - 1] * v[i - 1];
        }
        if i + 1 < n {
            s += off[i] * v[i + 1];
        }
        out[i] = s;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    for x in v.iter_mut() {
        *x /= n;
    }
}

/// Eigenpairs below `upper` (at most `k`), with unit Euclidean eigenvectors.
pub fn lowest_eigenpairs(
    diag: &[f64],
    off: &[f64],
    k: usize,
    upper: f64,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let values = lowest_eigenvalues(diag, off, k, upper);
    let n = diag.len();
    let (glo, ghi) = gershgorin(diag, off);
    let norm = glo.abs().max(ghi.abs());
    let eps = f64::EPSILON * norm.max(1.0);
    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::with_capacity(values.len());
    let mut tv = vec![0.0; n];
    for (j, &lam) in values.iter().enumerate() {
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.25 * ((i as f64 + 1.0) * 0.618_033_988_7 * (j as f64 + 1.0)).sin())
            .collect();
        normalize(&mut v);
        let mut resid = f64::INFINITY;
        for it in 0..8 {
            shifted_solve(diag, off, lam, &mut v, eps);
            for (mu, u) in pairs.iter() {
                if (mu - lam).abs() <= 1e-6 * norm.max(1.0) {
                    let c = dot(&v, u);
                    for (x, y) in v.iter_mut().zip(u) {
                        *x -= c * y;
                    }
                }
            }
            normalize(&mut v);
            matvec(diag, off, &v, &mut tv);
            resid = tv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - lam * b).powi(2))
                .sum::<f64>()
                .sqrt();
            if it >= 1 && resid <= 1e-10 * norm.max(1.0) {
                break;
            }
        }
        if !(resid <= 1e-7 * norm.max(1.0)) {
            return Err(LtError::ConvergenceFailure(format!(
                "inverse iteration residual {resid:e} for eigenvalue {lam}"
            )));
        }
        pairs.push((lam, v));
    }
    Ok(pairs)
}
