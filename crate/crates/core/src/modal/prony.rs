use nalgebra::{DMatrix, DVector};

use super::{fill_core, mech_dim, wave_number, Backend, ModalOperator};
use crate::error::{Error, Result};
use crate::model::{Family, ModelParams};

/// Generator of one Fourier mode with the memory reduced to auxiliary
/// variables `v_j(t) = ∫₀^∞ e^(−ν_j s) θ_m(t − s) ds`.
///
/// The reduced energy `E_red = xᵀ G x` obeys `AᵀG + GA = −D` with `D`
/// diagonal, nonzero only on the memory variables.
#[derive(Debug, Clone)]
pub struct PronyBlock {
    pub mode: u64,
    /// `N = mπ`.
    pub wave_number: f64,
    pub family: Family,
    pub generator: DMatrix<f64>,
    pub gram: DMatrix<f64>,
    pub dissipation: DMatrix<f64>,
}

impl PronyBlock {
    pub fn assemble(params: &ModelParams, m: u64) -> Result<Self> {
        if m < 1 {
            return Err(Error::Domain("modes start at m = 1".into()));
        }
        params.validate_structure()?;
        let n = wave_number(m);
        let md = mech_dim(params.family);
        let terms = params.kernel.terms();
        let dim = md + 1 + terms.len();
        let mut a = DMatrix::zeros(dim, dim);
        let mut g = DMatrix::zeros(dim, dim);
        let mut diss = DMatrix::zeros(dim, dim);
        fill_core(params, n, &mut a, &mut g);
        let d = md;
        let n2 = n * n;
        for (j, t) in terms.iter().enumerate() {
            let v = md + 1 + j;
            a[(d, v)] = -n2 * t.weight;
            a[(v, d)] = 1.0;
            a[(v, v)] = -t.rate;
            g[(v, v)] = 0.25 * n2 * t.weight;
            diss[(v, v)] = 0.5 * n2 * t.weight * t.rate;
        }
        Ok(PronyBlock {
            mode: m,
            wave_number: n,
            family: params.family,
            generator: a,
            gram: g,
            dissipation: diss,
        })
    }

    pub fn mech_dim(&self) -> usize {
        mech_dim(self.family)
    }

    pub fn theta_index(&self) -> usize {
        self.mech_dim()
    }

    /// `−dE_red/dt = xᵀ D x` along the flow.
    pub fn dissipation_rate(&self, x: &DVector<f64>) -> f64 {
        x.dot(&(&self.dissipation * x))
    }

    /// `‖AᵀG + GA + D‖` (Frobenius); zero up to rounding.
    pub fn identity_defect(&self) -> f64 {
        let a = &self.generator;
        let g = &self.gram;
        (a.transpose() * g + g * a + &self.dissipation).norm()
    }
}

impl ModalOperator for PronyBlock {
    fn mode(&self) -> u64 {
        self.mode
    }
    fn backend(&self) -> Backend {
        Backend::Prony
    }
    fn dim(&self) -> usize {
        self.generator.nrows()
    }
    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.generator * x
    }
    fn energy(&self, x: &DVector<f64>) -> f64 {
        x.dot(&(&self.gram * x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{KernelTerm, PronyKernel};
    use crate::model::Coupling;
    use std::f64::consts::PI;

    fn bresse1() -> ModelParams {
        ModelParams::bresse(
            Coupling::One,
            2.0,
            1.0,
            3.0,
            1.0,
            0.5f64.sqrt(),
            PronyKernel::new(vec![KernelTerm::new(1.0, 1.0), KernelTerm::new(0.5, 3.0)]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn bresse_order_one_rows() {
        let p = bresse1();
        let b = PronyBlock::assemble(&p, 2).unwrap();
        let n = 2.0 * PI;
        let (k1, k2, k3, l, d) = (p.k1, p.k2, p.k3, p.l, p.delta);
        let a = &b.generator;
        let tol = 1e-12 * n * n;
        let close = |x: f64, y: f64| assert!((x - y).abs() <= tol, "{x} vs {y}");
        close(a[(1, 0)], -(k1 * n * n + l * l * k3));
        close(a[(1, 2)], k1 * n);
        close(a[(1, 4)], l * (k1 + k3) * n);
        close(a[(1, 6)], -d * n);
        close(a[(3, 0)], k1 * n);
        close(a[(3, 2)], -(k2 * n * n + k1));
        close(a[(3, 4)], -k1 * l);
        close(a[(5, 0)], l * (k1 + k3) * n);
        close(a[(5, 2)], -l * k1);
        close(a[(5, 4)], -(k3 * n * n + l * l * k1));
        close(a[(6, 1)], d * n);
        close(a[(6, 7)], -n * n);
        close(a[(6, 8)], -0.5 * n * n);
        close(a[(8, 8)], -3.0);
        assert_eq!(b.dim(), 9);
    }

    #[test]
    fn dissipation_identity_exact() {
        for m in [1, 5, 50] {
            let b = PronyBlock::assemble(&bresse1(), m).unwrap();
            let scale = b.gram.norm() * b.generator.norm();
            assert!(b.identity_defect() <= 1e-14 * scale);
        }
    }

    #[test]
    fn uncoupled_mechanics_has_zero_trace() {
        let p = bresse1().with_delta(0.0);
        let b = PronyBlock::assemble(&p, 3).unwrap();
        let mech = b.generator.view((0, 0), (6, 6));
        assert_eq!(mech.trace(), 0.0);
        for i in 0..6 {
            assert_eq!(b.generator[(i, 6)], 0.0);
            assert_eq!(b.generator[(6, i)], 0.0);
        }
    }

    #[test]
    fn mode_zero_rejected() {
        assert!(matches!(PronyBlock::assemble(&bresse1(), 0), Err(Error::Domain(_))));
    }
}
