//! Matrix exponential by scaling and squaring with a diagonal Padé
//! approximant of order 6.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const ORDER: usize = 6;

/// Scaled matrices are pushed below this 1-norm before the Padé step.
const THETA: f64 = 0.5;

fn norm1(a: &DMatrix<f64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Number of squarings used for `a`.
pub fn squarings(a: &DMatrix<f64>) -> u32 {
    let nrm = norm1(a);
    if nrm <= THETA {
        0
    } else {
        (nrm / THETA).log2().ceil() as u32
    }
}

/// `exp(a)`.
pub fn expm(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Shape(format!("expm needs a square matrix, got {}x{}", n, a.ncols())));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Shape("expm input has non-finite entries".into()));
    }
    let s = squarings(a);
    let x = a * 0.5f64.powi(s as i32);

    let mut c = [0.0; ORDER + 1];
    c[0] = 1.0;
    for k in 1..=ORDER {
        c[k] = c[k - 1] * (ORDER - k + 1) as f64 / (k * (2 * ORDER - k + 1)) as f64;
    }
    let eye = DMatrix::<f64>::identity(n, n);
    let mut num = &eye * c[0];
    let mut den = &eye * c[0];
    let mut power = eye.clone();
    for (k, ck) in c.iter().enumerate().skip(1) {
        power = &power * &x;
        num += &power * *ck;
        if k % 2 == 0 {
            den += &power * *ck;
        } else {
            den -= &power * *ck;
        }
    }
    let mut e = den
        .lu()
        .solve(&num)
        .ok_or_else(|| Error::Integration("Padé denominator is singular".into()))?;
    for _ in 0..s {
        e = &e * &e;
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_gives_identity() {
        let z = DMatrix::<f64>::zeros(4, 4);
        assert_eq!(expm(&z).unwrap(), DMatrix::identity(4, 4));
    }

    #[test]
    fn rotation() {
        let w = 3.0;
        let t = 2.7;
        let a = DMatrix::from_row_slice(2, 2, &[0.0, w * t, -w * t, 0.0]);
        let e = expm(&a).unwrap();
        let expect = DMatrix::from_row_slice(
            2,
            2,
            &[(w * t).cos(), (w * t).sin(), -(w * t).sin(), (w * t).cos()],
        );
        assert_relative_eq!(e, expect, epsilon = 1e-13);
    }

    #[test]
    fn diagonal_and_nilpotent() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 0.5, 10.0]));
        let e = expm(&d).unwrap();
        assert_relative_eq!(e[(0, 0)], (-1f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(e[(2, 2)], 10f64.exp(), max_relative = 1e-13);
        let jn = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 2.0]);
        let e = expm(&jn).unwrap();
        assert_relative_eq!(e[(0, 1)], 2f64.exp(), max_relative = 1e-14);
    }

    #[test]
    fn semigroup_property() {
        let a = DMatrix::from_row_slice(3, 3, &[-1.0, 2.0, 0.3, -2.0, -0.1, 1.0, 0.0, -1.0, -0.5]);
        let e1 = expm(&a).unwrap();
        let e2 = expm(&(&a * 2.0)).unwrap();
        assert_relative_eq!(&e1 * &e1, e2, epsilon = 1e-13);
    }
}
