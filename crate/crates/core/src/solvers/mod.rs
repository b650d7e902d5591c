//! Stokes initializer, one-step updates of the four fixed-point methods and
//! the iteration driver.

mod discretization;
mod driver;
mod steps;

use std::fmt;
use std::str::FromStr;

pub use discretization::{solve_stokes_initial, Discretization};
pub(crate) use driver::drive as driver_with_gains;
pub use driver::{fixed_point_solve, IterationRecord, IterationTrace, Status, DIVERGENCE_THRESHOLD};
pub use steps::{NsSolver, Stepper};

use crate::error::{Error, Result};
use crate::fem::ElementPair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Arrow-Hurwicz.
    Ah,
    /// Arrow-Hurwicz with grad-div stabilization in the velocity solve.
    GradDivAh,
    /// Iterated penalty Picard.
    Ipp,
    /// Coupled Picard linearization.
    Picard,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Ah => "ah",
            Method::GradDivAh => "graddiv-ah",
            Method::Ipp => "ipp",
            Method::Picard => "picard",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "ah" => Ok(Method::Ah),
            "graddiv-ah" | "graddivah" | "gdah" => Ok(Method::GradDivAh),
            "ipp" => Ok(Method::Ipp),
            "picard" => Ok(Method::Picard),
            other => Err(Error::config(format!("unknown method `{other}`"))),
        }
    }
}

/// Norm of `u_k − u_{k−1}` used by the stopping test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StoppingNorm {
    #[default]
    L2,
    H1,
    /// `sqrt(‖∇δu‖² + α‖δp‖²)`.
    H,
}

impl FromStr for StoppingNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" => Ok(StoppingNorm::L2),
            "h1" => Ok(StoppingNorm::H1),
            "h" => Ok(StoppingNorm::H),
            other => Err(Error::config(format!("unknown stopping norm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NsConfig {
    pub nu: f64,
    pub rho: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub element: ElementPair,
    pub method: Method,
    pub epsilon: f64,
    pub stopping_norm: StoppingNorm,
}

impl NsConfig {
    /// Grad-div AH on Scott-Vogelius with `ρ = α = ν⁻¹`, `γ = 1`.
    pub fn new(re: f64) -> Self {
        let nu = 1.0 / re;
        Self {
            nu,
            rho: re,
            alpha: re,
            gamma: 1.0,
            tol: 1e-6,
            max_iters: 1000,
            element: ElementPair::ScottVogelius,
            method: Method::GradDivAh,
            epsilon: 0.1,
            stopping_norm: StoppingNorm::L2,
        }
    }

    pub fn reynolds(&self) -> f64 {
        1.0 / self.nu
    }

    /// Parameters under which grad-div AH and IPP with penalty `ε` produce
    /// the same iterates: `ρ = ν⁻¹`, `α = ε/ν`, `γ = ε⁻¹`.
    pub fn ipp_equivalent(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self.rho = 1.0 / self.nu;
        self.alpha = epsilon / self.nu;
        self.gamma = 1.0 / epsilon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("nu", self.nu), ("rho", self.rho), ("alpha", self.alpha), ("tol", self.tol)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::config(format!("gamma must be non-negative, got {}", self.gamma)));
        }
        if self.method == Method::Ipp && !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::config(format!("IPP needs epsilon > 0, got {}", self.epsilon)));
        }
        Ok(())
    }

    /// Non-fatal parameter warnings for the Arrow-Hurwicz family.
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if !matches!(self.method, Method::Ah | Method::GradDivAh) {
            return out;
        }
        let gamma = if self.method == Method::Ah { 0.0 } else { self.gamma };
        if gamma < self.rho / self.alpha {
            out.push(Diagnostic::GammaBelowRhoOverAlpha {
                gamma,
                bound: self.rho / self.alpha,
            });
        }
        if self.rho > 1.0 / self.nu {
            out.push(Diagnostic::RhoAboveInverseViscosity {
                rho: self.rho,
                bound: 1.0 / self.nu,
            });
        }
        if self.alpha <= 2.0 * self.rho * self.rho {
            out.push(Diagnostic::AlphaNotAboveTwoRhoSquared {
                alpha: self.alpha,
                bound: 2.0 * self.rho * self.rho,
            });
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Diagnostic {
    GammaBelowRhoOverAlpha { gamma: f64, bound: f64 },
    RhoAboveInverseViscosity { rho: f64, bound: f64 },
    AlphaNotAboveTwoRhoSquared { alpha: f64, bound: f64 },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Diagnostic::GammaBelowRhoOverAlpha { gamma, bound } => {
                write!(f, "gamma = {gamma} is below rho/alpha = {bound}; contraction is not guaranteed")
            }
            Diagnostic::RhoAboveInverseViscosity { rho, bound } => {
                write!(f, "rho = {rho} exceeds 1/nu = {bound}")
            }
            Diagnostic::AlphaNotAboveTwoRhoSquared { alpha, bound } => {
                write!(f, "alpha = {alpha} does not exceed 2 rho^2 = {bound}")
            }
        }
    }
}

/// One iterate: velocity and pressure coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u: Vec<f64>,
    pub p: Vec<f64>,
}

impl State {
    pub fn zeros(nu: usize, np: usize) -> Self {
        Self {
            u: vec![0.0; nu],
            p: vec![0.0; np],
        }
    }

    /// `(u, p)` as one vector.
    pub fn concat(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.u.len() + self.p.len());
        x.extend_from_slice(&self.u);
        x.extend_from_slice(&self.p);
        x
    }

    pub fn split(x: &[f64], nu: usize) -> Self {
        Self {
            u: x[..nu].to_vec(),
            p: x[nu..].to_vec(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.p).all(|v| v.is_finite())
    }
}
