//! Mode blocks checked against the field equations evaluated pointwise on
//! trigonometric fields, and against an energy computed by quadrature.

use std::f64::consts::PI;

use gurtin::linalg::eigenvalues;
use gurtin::modal::{ModalOperator, PronyBlock};
use gurtin::{Coupling, Family, ModelParams, PronyKernel};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn kernel() -> PronyKernel {
    PronyKernel::new(vec![
        gurtin::KernelTerm::new(0.7, 0.8),
        gurtin::KernelTerm::new(0.4, 2.5),
    ])
    .unwrap()
}

fn configurations() -> Vec<ModelParams> {
    vec![
        ModelParams::bresse(Coupling::One, 1.3, 0.7, 2.1, 0.9, 0.6, kernel()).unwrap(),
        ModelParams::bresse(Coupling::Zero, 1.3, 0.7, 2.1, 0.9, 0.6, kernel()).unwrap(),
        ModelParams::timoshenko(Coupling::One, 1.7, 0.8, 1.1, kernel()).unwrap(),
        ModelParams::timoshenko(Coupling::Zero, 1.7, 0.8, 1.1, kernel()).unwrap(),
    ]
}

/// `d^k/dx^k` of `cos(nx)` (or `sin(nx)`) at `x`.
fn basis(cosine: bool, n: f64, k: u32, x: f64) -> f64 {
    let phase = n * x + k as f64 * PI / 2.0;
    n.powi(k as i32) * if cosine { phase.cos() } else { phase.sin() }
}

/// A field `coef · basis(nx)` with its parity, boundary conditions decide
/// which: Neumann-type unknowns take cosines, Dirichlet-type take sines.
#[derive(Clone, Copy)]
struct Field {
    coef: f64,
    cosine: bool,
}

impl Field {
    fn at(self, n: f64, k: u32, x: f64) -> f64 {
        self.coef * basis(self.cosine, n, k, x)
    }
}

/// Right-hand sides `(φ_tt, ψ_tt, w_tt, θ_t)` of the field equations at `x`,
/// with the memory integral `∫ f(s) θ(t−s) ds` of the mode supplied as
/// `memory · basis`.
#[allow(clippy::too_many_arguments)]
fn field_rhs(p: &ModelParams, n: f64, x: f64, phi: Field, phi_t: Field, psi: Field, w: Field, th: Field, memory: Field) -> [f64; 4] {
    let l = p.l;
    let shear = phi.at(n, 1, x) + psi.at(n, 0, x) + l * w.at(n, 0, x);
    let shear_x = phi.at(n, 2, x) + psi.at(n, 1, x) + l * w.at(n, 1, x);
    let axial = w.at(n, 1, x) - l * phi.at(n, 0, x);
    let axial_x = w.at(n, 2, x) - l * phi.at(n, 1, x);
    let (heat_in_phi, phi_in_heat) = match p.k {
        Coupling::One => (th.at(n, 1, x), -phi_t.at(n, 1, x)),
        Coupling::Zero => (th.at(n, 0, x), phi_t.at(n, 0, x)),
    };
    [
        p.k1 * shear_x + l * p.k3 * axial - p.delta * heat_in_phi,
        p.k2 * psi.at(n, 2, x) - p.k1 * shear,
        p.k3 * axial_x - l * p.k1 * shear,
        memory.at(n, 2, x) + p.delta * phi_in_heat,
    ]
}

/// Least-squares coefficient of `values` on `basis` samples and the relative
/// misfit; a nonzero misfit means the field left the mode.
fn project(values: &[f64], basis: &[f64]) -> (f64, f64) {
    let num: f64 = values.iter().zip(basis).map(|(v, b)| v * b).sum();
    let den: f64 = basis.iter().map(|b| b * b).sum();
    let c = num / den;
    let res: f64 = values.iter().zip(basis).map(|(v, b)| (v - c * b).powi(2)).sum::<f64>().sqrt();
    let scale = values.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
    (c, res / scale)
}

#[test]
fn generator_matches_the_field_equations_on_each_mode() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let xs: Vec<f64> = (0..9).map(|i| 0.05 + 0.1 * i as f64 + 0.013 * (i % 3) as f64).collect();
    for p in configurations() {
        let bresse = p.family == Family::Bresse;
        // Parities from the boundary conditions: order one clamps φ_x, so φ
        // is a cosine series; order zero clamps φ and the other two slopes.
        let (phi_cos, rest_cos) = match p.k {
            Coupling::One => (true, false),
            Coupling::Zero => (false, true),
        };
        for m in [1u64, 2, 5, 13] {
            let block = PronyBlock::assemble(&p, m).unwrap();
            let n = block.wave_number;
            let md = block.mech_dim();
            for _ in 0..20 {
                let x = DVector::from_fn(block.dim(), |_, _| rng.random_range(-1.0..1.0));
                let ax = block.apply(&x);
                let f = |i: usize, cosine: bool| Field { coef: x[i], cosine };
                let zero = Field { coef: 0.0, cosine: false };
                let phi = f(0, phi_cos);
                let psi = f(2, rest_cos);
                let w = if bresse { f(4, rest_cos) } else { zero };
                let th = f(md, false);
                let memory = Field {
                    coef: p.kernel.terms().iter().enumerate().map(|(j, t)| t.weight * x[md + 1 + j]).sum(),
                    cosine: false,
                };
                let rhs: Vec<[f64; 4]> = xs
                    .iter()
                    .map(|&xx| field_rhs(&p, n, xx, phi, f(1, phi_cos), psi, w, th, memory))
                    .collect();
                let scale = ax.amax().max(1.0);
                let check = |eq: usize, cosine: bool, row: usize| {
                    let vals: Vec<f64> = rhs.iter().map(|r| r[eq]).collect();
                    let b: Vec<f64> = xs.iter().map(|&xx| basis(cosine, n, 0, xx)).collect();
                    let (c, misfit) = project(&vals, &b);
                    assert!(misfit < 1e-12, "{:?} k={:?} m={m} equation {eq} leaves the mode: {misfit}", p.family, p.k);
                    assert!(
                        (c - ax[row]).abs() <= 1e-12 * scale,
                        "{:?} k={:?} m={m} row {row}: field {c} vs block {}",
                        p.family,
                        p.k,
                        ax[row]
                    );
                };
                check(0, phi_cos, 1);
                check(1, rest_cos, 3);
                if bresse {
                    check(2, rest_cos, 5);
                }
                check(3, false, md);
                // Displacement rows and the memory definition.
                for i in (0..md).step_by(2) {
                    assert_eq!(ax[i], x[i + 1]);
                }
                for (j, t) in p.kernel.terms().iter().enumerate() {
                    let v = md + 1 + j;
                    assert!((ax[v] - (x[md] - t.rate * x[v])).abs() <= 1e-14 * scale);
                }
            }
        }
    }
}

#[test]
fn gram_matches_the_energy_integral() {
    // Midpoint rule with M points integrates products of modes below M exactly.
    const M: usize = 2048;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for p in configurations() {
        let bresse = p.family == Family::Bresse;
        let (phi_cos, rest_cos) = match p.k {
            Coupling::One => (true, false),
            Coupling::Zero => (false, true),
        };
        for m in [1u64, 3, 8] {
            let block = PronyBlock::assemble(&p, m).unwrap();
            let n = block.wave_number;
            let md = block.mech_dim();
            for _ in 0..5 {
                let x = DVector::from_fn(block.dim(), |_, _| rng.random_range(-1.0..1.0));
                let f = |i: usize, cosine: bool| Field { coef: x[i], cosine };
                let zero = Field { coef: 0.0, cosine: false };
                let (phi, psi) = (f(0, phi_cos), f(2, rest_cos));
                let (w, w_t) = if bresse { (f(4, rest_cos), f(5, rest_cos)) } else { (zero, zero) };
                let mut integral = 0.0;
                for i in 0..M {
                    let xx = (i as f64 + 0.5) / M as f64;
                    let shear = phi.at(n, 1, xx) + psi.at(n, 0, xx) + p.l * w.at(n, 0, xx);
                    let axial = w.at(n, 1, xx) - p.l * phi.at(n, 0, xx);
                    integral += f(1, phi_cos).at(n, 0, xx).powi(2)
                        + f(3, rest_cos).at(n, 0, xx).powi(2)
                        + w_t.at(n, 0, xx).powi(2)
                        + p.k1 * shear * shear
                        + p.k2 * psi.at(n, 1, xx).powi(2)
                        + p.k3 * axial * axial
                        + f(md, false).at(n, 0, xx).powi(2);
                }
                let mechanical = 0.5 * integral / M as f64;
                let memory: f64 = p
                    .kernel
                    .terms()
                    .iter()
                    .enumerate()
                    .map(|(j, t)| 0.25 * n * n * t.weight * x[md + 1 + j].powi(2))
                    .sum();
                let e = block.energy(&x);
                assert!(
                    (e - mechanical - memory).abs() <= 1e-11 * e,
                    "{:?} k={:?} m={m}: {e} vs {}",
                    p.family,
                    p.k,
                    mechanical + memory
                );
            }
        }
    }
}

#[test]
fn dissipation_identity_holds_on_every_block() {
    for p in configurations() {
        for m in [1u64, 2, 7, 30] {
            let b = PronyBlock::assemble(&p, m).unwrap();
            let scale = (b.generator.norm() * b.gram.norm()).max(1.0);
            let defect = b.identity_defect();
            assert!(defect <= 1e-12 * scale, "{:?} m={m}: {defect}", p.family);
            if m == 1 {
                assert!(defect <= 1e-12);
            }
        }
    }
}

#[test]
fn uncoupled_mechanics_is_undamped() {
    for p in configurations() {
        let b = PronyBlock::assemble(&p.with_delta(0.0), 3).unwrap();
        let md = b.mech_dim();
        let mech = b.generator.view((0, 0), (md, md));
        assert_eq!(mech.trace(), 0.0);
        assert!(b.generator.view((md, 0), (b.dim() - md, md)).iter().all(|v| *v == 0.0));
        assert!(b.generator.view((0, md), (md, b.dim() - md)).iter().all(|v| *v == 0.0));
    }
}

/// Characteristic polynomial coefficients, highest degree first, by the
/// Faddeev–LeVerrier recursion.
fn char_poly(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut coeffs = vec![1.0];
    let mut m = DMatrix::<f64>::zeros(n, n);
    let id = DMatrix::<f64>::identity(n, n);
    let mut c = 1.0;
    for k in 1..=n {
        m = a * &m + &id * c;
        let am = a * &m;
        c = -am.trace() / k as f64;
        coeffs.push(c);
    }
    coeffs
}

/// All roots of a monic polynomial by Durand–Kerner iteration.
fn roots(coeffs: &[f64]) -> Vec<Complex64> {
    let deg = coeffs.len() - 1;
    let eval = |z: Complex64| coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c);
    let radius = 1.0 + coeffs[1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..deg).map(|k| seed.powu(k as u32) * (0.5 * radius)).collect();
    for _ in 0..5000 {
        let mut shift = 0.0f64;
        for i in 0..deg {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / den;
            z[i] -= step;
            shift = shift.max(step.norm());
        }
        if shift < 1e-15 * radius {
            break;
        }
    }
    // Newton polish on the polynomial itself.
    let deriv: Vec<f64> = coeffs[..deg].iter().enumerate().map(|(i, c)| c * (deg - i) as f64).collect();
    let eval_d = |z: Complex64| deriv.iter().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c);
    for r in &mut z {
        for _ in 0..3 {
            let d = eval_d(*r);
            if d.norm() > 0.0 {
                *r -= eval(*r) / d;
            }
        }
    }
    z
}

fn match_sets(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for z in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, w)| (j, (z - w).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

#[test]
fn eigenvalues_agree_with_characteristic_polynomial_roots() {
    let single = PronyKernel::single(1.0, 1.0).unwrap();
    let reference = ModelParams::timoshenko(Coupling::One, 1.0, 1.0, 1.0, single).unwrap();
    let b = PronyBlock::assemble(&reference, 1).unwrap();
    assert_eq!(b.dim(), 6);
    let ev = eigenvalues(&b.generator).unwrap();
    let pr = roots(&char_poly(&b.generator));
    let err = match_sets(&ev, &pr);
    assert!(err <= 1e-9, "{err}");

    for p in configurations() {
        let b = PronyBlock::assemble(&p, 1).unwrap();
        let ev = eigenvalues(&b.generator).unwrap();
        let pr = roots(&char_poly(&b.generator));
        let scale = ev.iter().fold(1.0f64, |m, z| m.max(z.norm()));
        let err = match_sets(&ev, &pr);
        assert!(err <= 1e-8 * scale, "{:?} k={:?}: {err}", p.family, p.k);
    }
}

#[test]
fn order_one_bresse_second_order_form() {
    // Coefficients of the second-order system, written out by hand.
    let p = &configurations()[0];
    let (k1, k2, k3, l, dl) = (p.k1, p.k2, p.k3, p.l, p.delta);
    for m in [1u64, 4] {
        let b = PronyBlock::assemble(p, m).unwrap();
        let n = b.wave_number;
        let a = &b.generator;
        let rows = [
            (1, [-(k1 * n * n + l * l * k3), k1 * n, l * (k1 + k3) * n, -dl * n]),
            (3, [k1 * n, -(k2 * n * n + k1), -k1 * l, 0.0]),
            (5, [l * (k1 + k3) * n, -l * k1, -(k3 * n * n + l * l * k1), 0.0]),
        ];
        for (r, want) in rows {
            for (col, w) in [0usize, 2, 4, 6].iter().zip(want) {
                assert!((a[(r, *col)] - w).abs() <= 1e-12 * w.abs().max(1.0), "row {r} col {col}");
            }
        }
        assert!((a[(6, 1)] - dl * n).abs() < 1e-12);
    }
}
