//! Harmonic solutions `u = Re F + d₀` with `F′ = f`, and directional derivatives.
//!
//! The gradient is encoded by `f = u_x − i·u_y`, so `∂u/∂ν = Re(ν·f)`. On a
//! mapped domain the disk problem is solved for `g̃ = f_D ∘ ω` and the potential
//! is the antiderivative of `g̃·ω′` in the disk variable.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::boundary_data::{BoundaryFunction, DirectionField, UNIT_MODULUS_TOL};
use crate::disk_harmonic::Analytic;
use crate::error::{Error, Result};
use crate::quadrature::{antiderivative, Antiderivative, QuadratureParams};
use crate::rh_solver::{solve_rh, AnalyticSolution, SolverParams};

/// Conformal map `ω` from the unit disk onto a domain, with `ω(0) = 0`.
pub trait DomainMap: Send + Sync + fmt::Debug {
    fn omega(&self, z: Complex64) -> Complex64;
    fn omega_prime(&self, z: Complex64) -> Complex64;
    /// Preimage of a point of the domain.
    fn inverse(&self, w: Complex64) -> Result<Complex64>;
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DirectionalParams {
    pub solver: SolverParams,
    pub quadrature: QuadratureParams,
    pub d0: f64,
}

#[derive(Clone)]
pub struct HarmonicSolution {
    rh: AnalyticSolution,
    map: Option<Arc<dyn DomainMap>>,
    potential: Antiderivative,
    d0: f64,
    notes: Vec<String>,
}

impl fmt::Debug for HarmonicSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HarmonicSolution")
            .field("map", &self.map)
            .field("potential", &self.potential)
            .field("d0", &self.d0)
            .field("notes", &self.notes)
            .finish()
    }
}

impl HarmonicSolution {
    pub fn new(
        rh: AnalyticSolution,
        map: Option<Arc<dyn DomainMap>>,
        quadrature: QuadratureParams,
        d0: f64,
    ) -> Result<Self> {
        if !d0.is_finite() {
            return Err(Error::Config("d0 must be finite".into()));
        }
        let integrand: Arc<dyn Analytic> = match &map {
            None => Arc::new(rh.clone()),
            Some(m) => {
                let (g, m) = (rh.clone(), Arc::clone(m));
                Arc::new(move |z: Complex64| g.value(z) * m.omega_prime(z))
            }
        };
        let potential = antiderivative(integrand, quadrature)?;
        Ok(HarmonicSolution {
            rh,
            map,
            potential,
            d0,
            notes: Vec::new(),
        })
    }

    pub fn rh(&self) -> &AnalyticSolution {
        &self.rh
    }

    pub fn map(&self) -> Option<&Arc<dyn DomainMap>> {
        self.map.as_ref()
    }

    pub fn d0(&self) -> f64 {
        self.d0
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub fn push_note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// Same solution with a different additive constant.
    pub fn with_shift(&self, d0: f64) -> Self {
        HarmonicSolution { d0, ..self.clone() }
    }

    /// `F(z) + d₀` in the disk variable.
    pub fn potential(&self, z: Complex64) -> Complex64 {
        self.potential.value(z) + self.d0
    }

    /// `u` at the disk point `z` (the preimage point on a mapped domain).
    pub fn u(&self, z: Complex64) -> f64 {
        self.potential.value(z).re + self.d0
    }

    /// `f_D` at the image of the disk point `z`.
    pub fn f(&self, z: Complex64) -> Complex64 {
        self.rh.value(z)
    }

    /// Preimage of a physical point, with a domain check.
    pub fn to_disk(&self, w: Complex64) -> Result<Complex64> {
        match &self.map {
            None if w.norm() < 1.0 => Ok(w),
            None => Err(Error::Domain(format!(
                "|z| = {} is outside the open unit disk",
                w.norm()
            ))),
            Some(m) => m.inverse(w),
        }
    }

    /// `u` at a physical point.
    pub fn u_at(&self, w: Complex64) -> Result<f64> {
        Ok(self.u(self.to_disk(w)?))
    }

    /// `f_D = u_x − i·u_y` at a physical point.
    pub fn f_at(&self, w: Complex64) -> Result<Complex64> {
        Ok(self.f(self.to_disk(w)?))
    }

    /// `(u_x, u_y)` at a physical point.
    pub fn gradient_at(&self, w: Complex64) -> Result<(f64, f64)> {
        let f = self.f_at(w)?;
        Ok((f.re, -f.im))
    }
}

pub fn solve_directional(
    nu: &DirectionField,
    phi: &BoundaryFunction,
    params: &DirectionalParams,
) -> Result<HarmonicSolution> {
    let rh = solve_rh(nu, phi, &params.solver)?;
    HarmonicSolution::new(rh, None, params.quadrature, params.d0)
}

/// `∂u/∂ν = Re(ν·f)` at a physical point.
pub fn directional_derivative(sol: &HarmonicSolution, w: Complex64, nu: Complex64) -> Result<f64> {
    if (nu.norm() - 1.0).abs() > 1e3 * UNIT_MODULUS_TOL {
        return Err(Error::Config(format!("direction {nu} is not a unit vector")));
    }
    Ok((nu * sol.f_at(w)?).re)
}
