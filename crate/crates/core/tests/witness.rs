use gurtin::modal::PronyBlock;
use gurtin::witness::{build_witness, verify_witness, WitnessCase};
use gurtin::{Coupling, ModelParams, PronyKernel};
use nalgebra::DVector;
use num_complex::Complex64;

fn kernel(w: f64, r: f64) -> PronyKernel {
    PronyKernel::single(w, r).unwrap()
}

fn bresse(k: Coupling, k1: f64, k2: f64, k3: f64, l: f64, delta: f64) -> ModelParams {
    ModelParams::bresse(k, k1, k2, k3, l, delta, kernel(1.0, 1.0)).unwrap()
}

fn timo(k: Coupling, k1: f64, k2: f64, delta: f64) -> ModelParams {
    ModelParams::timoshenko(k, k1, k2, delta, kernel(1.0, 1.0)).unwrap()
}

fn cases() -> Vec<(ModelParams, WitnessCase)> {
    use Coupling::*;
    use WitnessCase::*;
    vec![
        (bresse(One, 1.0, 2.0, 2.0, 1.0, 1.0), BresseK2eqK3),
        (bresse(Zero, 3.0, 0.5, 0.5, 0.7, 2.0), BresseK2eqK3),
        (bresse(One, 1.0, 2.0, 3.0, 0.8, 1.0), BresseCase32),
        (bresse(One, 3.0, 2.0, 4.0, 0.8, 1.0), BresseCase32),
        (bresse(Zero, 1.0, 2.0, 3.0, 0.8, 1.0), BresseCase32),
        (bresse(One, 1.0, 2.0, 3.0, 0.8, 1.0), BresseCase33),
        (bresse(Zero, 2.0, 2.0, 3.0, 0.8, 1.0), BresseCase33),
        (timo(One, 1.0, 2.0, 1.0), TimoCase1),
        (timo(Zero, 1.0, 2.0, 1.0), TimoCase1),
        (timo(Zero, 2.0, 2.0, 1.0), TimoCase2),
        (timo(Zero, 0.5, 0.5, 0.3), TimoCase2),
    ]
}

/// Lifts a witness to the Prony state: each memory variable of a
/// time-harmonic temperature is `θ/(ν + iλ)`.
fn prony_residual(params: &ModelParams, case: WitnessCase, n: u64) -> (f64, f64) {
    let w = build_witness(params, case, n).unwrap();
    let block = PronyBlock::assemble(params, n + 1).unwrap();
    let dim = block.generator.nrows();
    let core = w.state.len();
    let mut x = DVector::from_element(dim, Complex64::new(0.0, 0.0));
    let mut f = DVector::from_element(dim, Complex64::new(0.0, 0.0));
    for i in 0..core {
        x[i] = w.state[i];
        f[i] = w.forcing[i];
    }
    let iz = Complex64::new(0.0, w.lambda);
    for (j, t) in params.kernel.terms().iter().enumerate() {
        x[core + j] = w.state[core - 1] / (iz + t.rate);
    }
    let a = block.generator.map(|v| Complex64::new(v, 0.0));
    let r = x.map(|v| v * iz) - &a * &x - f;
    (r.norm(), w.phi_norm)
}

#[test]
fn witnesses_solve_the_full_memory_resolvent() {
    for (p, case) in cases() {
        for n in [0u64, 3, 10, 40] {
            let (r, phi) = prony_residual(&p, case, n);
            assert!(r <= 1e-9 * (1.0 + phi), "{case:?} n={n}: residual {r}, |phi| {phi}");
        }
    }
}

#[test]
fn witnesses_grow_at_least_linearly() {
    let idx: Vec<u64> = [1u64, 2, 5, 10, 20, 50, 100, 200].to_vec();
    for (p, case) in cases() {
        let rep = verify_witness(&p, case, &idx).unwrap_or_else(|e| panic!("{case:?} {p:?}: {e:?}"));
        assert!(rep.passed, "{case:?}: {rep:?}");
        assert!(rep.max_f_norm <= 1.0);
    }
}

#[test]
fn matching_g0_gives_quadratic_growth() {
    // g0 = k2: the leading coefficient of α2 no longer cancels.
    let p = ModelParams::timoshenko(Coupling::One, 1.0, 2.0, 1.0, kernel(2.0, 1.0)).unwrap();
    let rep = verify_witness(&p, WitnessCase::TimoCase1, &[10, 20, 50, 100, 200]).unwrap();
    assert!(rep.exponent > 1.8, "exponent {}", rep.exponent);
}

#[test]
fn order_zero_forcing_stays_normalized() {
    for (p, case) in cases() {
        if p.k != Coupling::Zero {
            continue;
        }
        for n in [0u64, 1, 7, 500] {
            let w = build_witness(&p, case, n).unwrap();
            assert!(w.f_norm <= 1.0 + 1e-12, "{case:?} n={n}: {}", w.f_norm);
        }
    }
}
