//! Resolvent solves and norms against dense linear algebra.

use gurtin::modal::PronyBlock;
use gurtin::spectra::{resolvent_norm, resolvent_solve};
use gurtin::{Coupling, KernelTerm, ModelParams, PronyKernel};
use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;

fn params() -> Vec<ModelParams> {
    let k = PronyKernel::new(vec![KernelTerm::new(0.9, 1.2), KernelTerm::new(0.3, 4.0)]).unwrap();
    vec![
        ModelParams::bresse(Coupling::One, 2.0, 1.0, 3.0, 1.0, 0.5f64.sqrt(), k.clone()).unwrap(),
        ModelParams::bresse(Coupling::Zero, 1.0, 2.0, 3.0, 0.8, 1.0, k.clone()).unwrap(),
        ModelParams::timoshenko(Coupling::One, 1.0, 2.0, 0.7, k.clone()).unwrap(),
        ModelParams::timoshenko(Coupling::Zero, 1.0, 1.0, 1.0, k).unwrap(),
    ]
}

fn cplx(a: &DMatrix<f64>) -> DMatrix<Complex64> {
    a.map(|v| Complex64::new(v, 0.0))
}

#[test]
fn solve_matches_the_dense_inverse() {
    for p in params() {
        for m in [1u64, 4, 11] {
            let b = PronyBlock::assemble(&p, m).unwrap();
            let n = b.generator.nrows();
            for lambda in [0.3, 2.0, 17.0, 140.0] {
                let z = Complex64::new(0.0, lambda);
                let f = DVector::from_fn(n, |i, _| Complex64::new((i as f64 + 1.0).sqrt(), 0.5 - 0.1 * i as f64));
                let x = resolvent_solve(&b, z, &f).unwrap();
                let inv = (DMatrix::<Complex64>::identity(n, n) * z - cplx(&b.generator))
                    .try_inverse()
                    .unwrap();
                let want = inv * &f;
                let err = (&x - &want).norm() / want.norm();
                assert!(err < 1e-10, "m={m} λ={lambda}: {err}");
            }
        }
    }
}

/// `‖(iλ − A)⁻¹‖` in the norm `‖x‖² = xᵀGx` as the largest singular value
/// of `Lᵀ R L⁻ᵀ` with `G = LLᵀ`.
fn svd_norm(b: &PronyBlock, lambda: f64) -> f64 {
    let n = b.generator.nrows();
    let l = Cholesky::new(b.gram.clone()).unwrap().l();
    let lt = cplx(&l.transpose());
    let lt_inv = lt.clone().try_inverse().unwrap();
    let r = (DMatrix::<Complex64>::identity(n, n) * Complex64::new(0.0, lambda) - cplx(&b.generator))
        .try_inverse()
        .unwrap();
    let m = lt * r * lt_inv;
    m.singular_values().max()
}

#[test]
fn power_iteration_norm_matches_svd() {
    let (mut total, mut converged) = (0, 0);
    for p in params() {
        for m in [1u64, 3, 9] {
            let b = PronyBlock::assemble(&p, m).unwrap();
            for lambda in [0.5, 3.0, 25.0, 90.0] {
                let s = resolvent_norm(&b, lambda).unwrap();
                let want = svd_norm(&b, lambda);
                // A lower bound always, and sharp once converged.
                assert!(s.norm <= want * (1.0 + 1e-10), "m={m} λ={lambda}: {} > {want}", s.norm);
                total += 1;
                if s.converged {
                    converged += 1;
                    assert!((s.norm - want).abs() <= 1e-4 * want, "m={m} λ={lambda}: {} vs {want}", s.norm);
                }
                // Any operator norm bounds the spectral radius 1/distance.
                assert!(want >= (1.0 - 1e-9) / s.distance);
            }
        }
    }
    assert!(2 * converged > total, "{converged} of {total} converged");
}
