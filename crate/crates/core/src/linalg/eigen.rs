//! Dense nonsymmetric eigensolver.
//!
//! Pipeline: diagonal balancing, Householder reduction to upper Hessenberg
//! form, Francis double-shift QR on the Hessenberg matrix, then inverse
//! iteration on the balanced matrix for one eigenvector per eigenvalue.
//! Everything is deterministic for a given input.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest matrix the solver accepts.
pub const MAX_DIM: usize = 512;

const RADIX: f64 = 2.0;

/// Eigenvalues with refined eigenvectors and backward-error certificates.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<Complex64>,
    pub vectors: Vec<DVector<Complex64>>,
    /// `‖A v − λ v‖ / ‖v‖` on the input matrix.
    pub residuals: Vec<f64>,
    /// Frobenius norm of the input matrix.
    pub norm: f64,
}

impl Eigen {
    pub fn max_real(&self) -> f64 {
        self.values.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Worst residual relative to `‖A‖`.
    pub fn max_relative_residual(&self) -> f64 {
        let scale = self.norm.max(f64::MIN_POSITIVE);
        self.residuals.iter().fold(0.0, |m, r| m.max(r / scale))
    }
}

/// Balances `a` in place; returns the diagonal scaling `d` with
/// `a_balanced = D⁻¹ a D`.
pub fn balance(a: &mut DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let sqrdx = RADIX * RADIX;
    let mut scale = vec![1.0; n];
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                scale[i] *= f;
                for j in 0..n {
                    a[(i, j)] /= f;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
    scale
}

/// Householder reduction to upper Hessenberg form, in place. The reflectors
/// are discarded: only eigenvalues are extracted from the result.
pub fn hessenberg(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    let mut v = vec![0.0; n];
    for k in 0..n - 2 {
        let alpha: f64 = (k + 1..n).map(|i| a[(i, k)] * a[(i, k)]).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let sign = if x0 >= 0.0 { 1.0 } else { -1.0 };
        for i in 0..n {
            v[i] = 0.0;
        }
        v[k + 1] = x0 + sign * alpha;
        for i in k + 2..n {
            v[i] = a[(i, k)];
        }
        let vnorm2: f64 = (k + 1..n).map(|i| v[i] * v[i]).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // a <- (I - beta v vᵀ) a
        for j in k..n {
            let dot: f64 = (k + 1..n).map(|i| v[i] * a[(i, j)]).sum();
            let f = beta * dot;
            for i in k + 1..n {
                a[(i, j)] -= f * v[i];
            }
        }
        // a <- a (I - beta v vᵀ)
        for i in 0..n {
            let dot: f64 = (k + 1..n).map(|j| a[(i, j)] * v[j]).sum();
            let f = beta * dot;
            for j in k + 1..n {
                a[(i, j)] -= f * v[j];
            }
        }
        for i in k + 2..n {
            a[(i, k)] = 0.0;
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix (destroyed).
/// Fails after `30 n` total iterations.
pub fn hessenberg_eigenvalues(h: &mut DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = h.nrows();
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    let mut found = vec![false; n];
    let anorm: f64 = {
        let mut s = 0.0;
        for i in 0..n {
            for j in i.saturating_sub(1)..n {
                s += h[(i, j)].abs();
            }
        }
        s
    };
    let budget = 30 * n.max(1);
    let mut total = 0usize;
    let mut t = 0.0;
    // `nn` is one past the active window's last row (so 0 means finished).
    let mut nn = n;
    let a = h;
    while nn >= 1 {
        let mut its = 0;
        loop {
            let last = nn - 1;
            // Look for a small subdiagonal element.
            let mut l = last;
            while l >= 1 {
                let mut s = a[(l - 1, l - 1)].abs() + a[(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[(l, l - 1)].abs() <= f64::EPSILON * s {
                    a[(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[(last, last)];
            if l == last {
                wr[last] = x + t;
                wi[last] = 0.0;
                found[last] = true;
                nn -= 1;
                break;
            }
            let mut y = a[(last - 1, last - 1)];
            let mut w = a[(last, last - 1)] * a[(last - 1, last)];
            if l + 1 == last {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + sign(z, p);
                    wr[last - 1] = x + z;
                    wr[last] = if z != 0.0 { x - w / z } else { x + z };
                    wi[last - 1] = 0.0;
                    wi[last] = 0.0;
                } else {
                    wr[last - 1] = x + p;
                    wr[last] = x + p;
                    wi[last - 1] = z;
                    wi[last] = -z;
                }
                found[last] = true;
                found[last - 1] = true;
                nn -= 2;
                break;
            }
            if total >= budget {
                let partial = (0..n)
                    .filter(|&i| found[i])
                    .map(|i| Complex64::new(wr[i], wi[i]))
                    .collect::<Vec<_>>();
                return Err(Error::NoConvergence {
                    sweeps: total,
                    found: partial.len(),
                    size: n,
                    partial,
                });
            }
            if its == 10 || its == 20 {
                // exceptional shift
                t += x;
                for i in 0..=last {
                    a[(i, i)] -= x;
                }
                let s = a[(last, last - 1)].abs() + a[(last - 1, last - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            total += 1;
            // Form the shift and look for two consecutive small subdiagonals.
            let mut m = last - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a[(m, m)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[(m + 1, m)] + a[(m, m + 1)];
                q = a[(m + 1, m + 1)] - z - rr - ss;
                r = a[(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[(m - 1, m - 1)].abs() + z.abs() + a[(m + 1, m + 1)].abs());
                if u <= f64::EPSILON * v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=last {
                a[(i, i - 2)] = 0.0;
                if i != m + 2 {
                    a[(i, i - 3)] = 0.0;
                }
            }
            // Double-shift QR sweep on rows/columns l..=last.
            let mut k = m;
            while k < last {
                let mut xk = 0.0;
                if k != m {
                    p = a[(k, k - 1)];
                    q = a[(k + 1, k - 1)];
                    r = if k != last - 1 { a[(k + 2, k - 1)] } else { 0.0 };
                    xk = p.abs() + q.abs() + r.abs();
                    if xk != 0.0 {
                        p /= xk;
                        q /= xk;
                        r /= xk;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[(k, k - 1)] = -a[(k, k - 1)];
                        }
                    } else {
                        a[(k, k - 1)] = -s * xk;
                    }
                    p += s;
                    let xx = p / s;
                    let yy = q / s;
                    let zz = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=last {
                        let mut pj = a[(k, j)] + q * a[(k + 1, j)];
                        if k != last - 1 {
                            pj += r * a[(k + 2, j)];
                            a[(k + 2, j)] -= pj * zz;
                        }
                        a[(k + 1, j)] -= pj * yy;
                        a[(k, j)] -= pj * xx;
                    }
                    let mmin = last.min(k + 3);
                    for i in l..=mmin {
                        let mut pi = xx * a[(i, k)] + yy * a[(i, k + 1)];
                        if k != last - 1 {
                            pi += zz * a[(i, k + 2)];
                            a[(i, k + 2)] -= pi * r;
                        }
                        a[(i, k + 1)] -= pi * q;
                        a[(i, k)] -= pi;
                    }
                }
                k += 1;
            }
            if l + 1 >= nn {
                break;
            }
        }
    }
    Ok(wr
        .into_iter()
        .zip(wi)
        .map(|(re, im)| Complex64::new(re, im))
        .collect())
}

fn check_square(a: &DMatrix<f64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::Shape(format!(
            "eigensolver needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.nrows() > MAX_DIM {
        return Err(Error::Shape(format!(
            "matrix of size {} exceeds the eigensolver limit {MAX_DIM}",
            a.nrows()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Shape("matrix has non-finite entries".into()));
    }
    Ok(())
}

/// Eigenvalues only, sorted by descending real part then descending imaginary part.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    check_square(a)?;
    let mut h = a.clone();
    balance(&mut h);
    hessenberg(&mut h);
    let mut vals = hessenberg_eigenvalues(&mut h)?;
    sort_spectrum(&mut vals);
    Ok(vals)
}

pub(crate) fn sort_spectrum(vals: &mut [Complex64]) {
    vals.sort_by(|x, y| {
        y.re.partial_cmp(&x.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(y.im.partial_cmp(&x.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

/// Eigenvalues plus one inverse-iteration eigenvector each.
pub fn eigen(a: &DMatrix<f64>) -> Result<Eigen> {
    check_square(a)?;
    let n = a.nrows();
    let mut bal = a.clone();
    let scale = balance(&mut bal);
    let mut h = bal.clone();
    hessenberg(&mut h);
    let mut values = hessenberg_eigenvalues(&mut h)?;
    sort_spectrum(&mut values);

    let norm = a.norm();
    let bal_c = bal.map(|v| Complex64::new(v, 0.0));
    let a_c = a.map(|v| Complex64::new(v, 0.0));
    let mut vectors = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    for &lambda in &values {
        let u = inverse_iteration(&bal_c, lambda, bal.norm());
        // undo balancing: v = D u
        let mut v = DVector::from_iterator(n, u.iter().zip(&scale).map(|(x, d)| x * d));
        let vn = v.norm();
        if vn > 0.0 {
            v /= Complex64::new(vn, 0.0);
        }
        let r = (&a_c * &v - &v * lambda).norm();
        vectors.push(v);
        residuals.push(r);
    }
    Ok(Eigen {
        values,
        vectors,
        residuals,
        norm,
    })
}

fn inverse_iteration(a: &DMatrix<Complex64>, lambda: Complex64, norm: f64) -> DVector<Complex64> {
    let n = a.nrows();
    let mut shift = lambda;
    let mut x = DVector::from_fn(n, |i, _| Complex64::new(1.0 + (i as f64 * 0.618_033_988_7).fract(), 0.0));
    x /= Complex64::new(x.norm(), 0.0);
    let eye = DMatrix::<Complex64>::identity(n, n);
    for attempt in 0..4 {
        let lu = (a - &eye * shift).lu();
        let mut ok = true;
        for _ in 0..3 {
            match lu.solve(&x) {
                Some(y) if y.iter().all(|v| v.re.is_finite() && v.im.is_finite()) => {
                    let yn = y.norm();
                    if yn == 0.0 {
                        ok = false;
                        break;
                    }
                    x = y / Complex64::new(yn, 0.0);
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return x;
        }
        // exactly singular factorization: nudge the shift off the eigenvalue
        let eps = f64::EPSILON * norm.max(1.0) * 10f64.powi(attempt);
        shift = lambda + Complex64::new(eps, eps);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn close(vals: &[Complex64], expected: &[Complex64], tol: f64) {
        assert_eq!(vals.len(), expected.len());
        for e in expected {
            let d = vals.iter().map(|v| (v - e).norm()).fold(f64::INFINITY, f64::min);
            assert!(d <= tol, "missing {e}: nearest at {d:e} in {vals:?}");
        }
    }

    #[test]
    fn harmonic_oscillator() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -9.0, 0.0]);
        let vals = eigenvalues(&a).unwrap();
        close(&vals, &[Complex64::new(0.0, 3.0), Complex64::new(0.0, -3.0)], 1e-12);
    }

    #[test]
    fn companion_roots() {
        // (λ+1)(λ+2)(λ+3) = λ³ + 6λ² + 11λ + 6
        let a = DMatrix::from_row_slice(3, 3, &[-6.0, -11.0, -6.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let e = eigen(&a).unwrap();
        close(
            &e.values,
            &[-1.0, -2.0, -3.0].map(|r| Complex64::new(r, 0.0)),
            1e-12,
        );
        assert!(e.max_relative_residual() < 1e-12);
    }

    #[test]
    fn one_by_one_and_empty() {
        let a = DMatrix::from_element(1, 1, 4.5);
        assert_eq!(eigenvalues(&a).unwrap(), vec![Complex64::new(4.5, 0.0)]);
        let z = DMatrix::<f64>::zeros(0, 0);
        assert!(eigenvalues(&z).unwrap().is_empty());
    }

    #[test]
    fn triangular_matrix() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 5.0, -2.0, 0.0, 2.0, 7.0, 0.0, 0.0, 3.0]);
        let vals = eigenvalues(&a).unwrap();
        close(&vals, &[1.0, 2.0, 3.0].map(|r| Complex64::new(r, 0.0)), 1e-12);
    }

    #[test]
    fn rejects_non_square() {
        let a = DMatrix::<f64>::zeros(2, 3);
        assert!(matches!(eigenvalues(&a), Err(Error::Shape(_))));
    }

    #[test]
    fn balancing_preserves_spectrum() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 1e6, 0.0, 1e-6, 2.0, 1e4, 0.0, 1e-4, 3.0]);
        let mut b = a.clone();
        let d = balance(&mut b);
        let dm = DMatrix::from_diagonal(&DVector::from_vec(d.clone()));
        let dinv = DMatrix::from_diagonal(&DVector::from_vec(d.iter().map(|x| 1.0 / x).collect()));
        let back = &dinv * &a * &dm;
        assert_relative_eq!(back, b, epsilon = 1e-9);
        assert!(b.norm() < a.norm());
    }

    #[test]
    fn hessenberg_form_is_similar() {
        let a = DMatrix::from_fn(6, 6, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0 + (i == j) as u8 as f64);
        let mut h = a.clone();
        hessenberg(&mut h);
        for i in 2..6 {
            for j in 0..i - 1 {
                assert_eq!(h[(i, j)], 0.0);
            }
        }
        assert_relative_eq!(h.trace(), a.trace(), epsilon = 1e-12);
        assert_relative_eq!(h.norm(), a.norm(), epsilon = 1e-10);
    }
}
