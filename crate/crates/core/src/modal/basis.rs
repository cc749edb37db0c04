use serde::Serialize;

use crate::model::{Coupling, Family, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Cos,
    Sin,
}

impl Parity {
    /// Evaluates the basis function of wave number `n` at `x`.
    pub fn eval(self, n: f64, x: f64) -> f64 {
        match self {
            Parity::Cos => (n * x).cos(),
            Parity::Sin => (n * x).sin(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Unknown {
    Phi,
    Psi,
    W,
    Theta,
    Eta,
}

/// Trigonometric parity of every unknown. Modes run over `m ≥ 1`; the `m = 0`
/// content of cosine unknowns is handled by the mean-mode reduction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BasisAssignment {
    pub phi: Parity,
    pub psi: Parity,
    /// `None` for Timoshenko.
    pub w: Option<Parity>,
    pub theta: Parity,
    pub eta: Parity,
}

impl BasisAssignment {
    pub fn parity(&self, u: Unknown) -> Option<Parity> {
        match u {
            Unknown::Phi => Some(self.phi),
            Unknown::Psi => Some(self.psi),
            Unknown::W => self.w,
            Unknown::Theta => Some(self.theta),
            Unknown::Eta => Some(self.eta),
        }
    }
}

pub fn assign_bases(params: &ModelParams) -> BasisAssignment {
    let (phi, other) = match params.k {
        Coupling::One => (Parity::Cos, Parity::Sin),
        Coupling::Zero => (Parity::Sin, Parity::Cos),
    };
    BasisAssignment {
        phi,
        psi: other,
        w: (params.family == Family::Bresse).then_some(other),
        theta: Parity::Sin,
        eta: Parity::Sin,
    }
}
