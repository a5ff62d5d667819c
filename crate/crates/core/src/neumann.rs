//! The Neumann problem: the directional problem with `ν` the inward unit normal.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::boundary_data::{node_angle, BoundaryFunction, DirectionField, ValueKind};
use crate::direction_solver::{solve_directional, DirectionalParams, HarmonicSolution};
use crate::error::{Error, Result};
use crate::jordan_domain::{solve_on_map, ConformalMap};

/// Tolerance on `|ζ′(s)| = 1` for a natural parametrization.
pub const NATURAL_PARAMETER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalProvenance {
    Disk,
    Parametrization,
}

#[derive(Debug, Clone)]
pub struct NormalField {
    pub underlying: DirectionField,
    pub provenance: NormalProvenance,
}

impl NormalField {
    pub fn disk(n: usize, cut: f64) -> Result<Self> {
        Ok(NormalField {
            underlying: DirectionField::disk_inner_normal(n, cut)?,
            provenance: NormalProvenance::Disk,
        })
    }
}

/// A closed curve `ζ(s)`, `0 ≤ s < length`, with its derivative.
#[derive(Clone)]
pub struct Parametrization {
    pub length: f64,
    pub zeta: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>,
    pub derivative: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>,
}

impl fmt::Debug for Parametrization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Parametrization").field("length", &self.length).finish()
    }
}

impl Parametrization {
    pub fn circle(radius: f64, counterclockwise: bool) -> Self {
        let sign = if counterclockwise { 1.0 } else { -1.0 };
        Parametrization {
            length: TAU * radius,
            zeta: Arc::new(move |s| Complex64::from_polar(radius, sign * s / radius)),
            derivative: Arc::new(move |s| Complex64::new(0.0, sign) * Complex64::from_polar(1.0, sign * s / radius)),
        }
    }
}

/// Inward normal at a single boundary point: whichever of `±i·τ` points
/// toward `interior`.
pub fn inward_normal_at(tangent: Complex64, boundary_point: Complex64, interior: Complex64) -> Result<Complex64> {
    let tau = tangent / tangent.norm();
    let to_interior = interior - boundary_point;
    for candidate in [Complex64::i() * tau, -Complex64::i() * tau] {
        if (candidate * to_interior.conj()).re > 0.0 {
            return Ok(candidate);
        }
    }
    Err(Error::Orientation(format!(
        "neither ±iτ at {boundary_point} points toward {interior}"
    )))
}

/// Winding number of the sampled curve about `p`.
fn winding_number(points: &[Complex64], p: Complex64) -> i64 {
    let total: f64 = (0..points.len())
        .map(|j| ((points[(j + 1) % points.len()] - p) / (points[j] - p)).arg())
        .sum();
    (total / TAU).round() as i64
}

/// Inward normal `n = i·τ` of a counterclockwise natural parametrization, as a
/// direction field on `θ = 2π s / length`. The orientation is checked by the
/// winding number about `interior`.
pub fn inner_normal(boundary: &Parametrization, interior: Complex64, n: usize, cut: f64) -> Result<NormalField> {
    if !(boundary.length > 0.0 && boundary.length.is_finite()) {
        return Err(Error::Parametrization("curve length must be positive".into()));
    }
    let s_of = |theta: f64| boundary.length * theta / TAU;
    let mut points = Vec::with_capacity(n);
    for j in 0..n {
        let s = s_of(node_angle(j, n));
        let d = (boundary.derivative)(s);
        if (d.norm() - 1.0).abs() > NATURAL_PARAMETER_TOL {
            return Err(Error::Parametrization(format!(
                "|ζ′(s)| = {} at s = {s}; a natural parameter is required",
                d.norm()
            )));
        }
        points.push((boundary.zeta)(s));
    }
    match winding_number(&points, interior) {
        1 => {}
        -1 => {
            return Err(Error::Orientation(
                "curve is clockwise about the interior point; i·τ points outward".into(),
            ))
        }
        w => {
            return Err(Error::Orientation(format!(
                "interior point {interior} has winding number {w}"
            )))
        }
    }
    let derivative = Arc::clone(&boundary.derivative);
    let length = boundary.length;
    let base = BoundaryFunction::from_fn(
        move |theta| {
            let d = derivative(length * theta / TAU);
            Complex64::i() * d / d.norm()
        },
        ValueKind::Complex,
        n,
    )?;
    Ok(NormalField {
        underlying: DirectionField::new(base, cut)?,
        provenance: NormalProvenance::Parametrization,
    })
}

#[derive(Debug, Clone)]
pub enum Domain {
    Disk,
    Mapped(Arc<ConformalMap>),
}

/// `∮ φ ds` on the boundary of the domain.
pub fn boundary_integral(phi: &BoundaryFunction, domain: &Domain) -> f64 {
    match domain {
        Domain::Disk => phi.mean().re * TAU,
        Domain::Mapped(map) => map.boundary_integral(phi),
    }
}

/// Note emitted when the classical compatibility condition fails.
pub fn compatibility_note(integral: f64) -> Option<String> {
    (integral.abs() > 1e-8).then(|| {
        format!(
            "classical compatibility condition fails: ∮φ ds = {integral:.6e} ≠ 0; \
             no classical Neumann solution exists and the returned solution is nonclassical"
        )
    })
}

/// Neumann problem `∂u/∂n → φ`. On a mapped domain `φ` is a function of the
/// polar angle of the boundary point.
pub fn solve_neumann(
    phi: &BoundaryFunction,
    domain: &Domain,
    cut: f64,
    params: &DirectionalParams,
) -> Result<HarmonicSolution> {
    if phi.kind() != ValueKind::Real {
        return Err(Error::Type("Neumann data must be real-valued".into()));
    }
    let mut sol = match domain {
        Domain::Disk => {
            let normal = NormalField::disk(phi.len(), cut)?;
            solve_directional(&normal.underlying, phi, params)?
        }
        Domain::Mapped(map) => {
            let normal = map.normal_field(phi.len(), cut)?;
            solve_on_map(map, &normal, &map.pull_back(phi)?, params)?
        }
    };
    if let Some(note) = compatibility_note(boundary_integral(phi, domain)) {
        sol.push_note(note);
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary_data::Piece;
    use crate::jordan_domain::TheodorsenParams;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unit_circle_normal() {
        let nf = inner_normal(&Parametrization::circle(1.0, true), c(0.0, 0.0), 64, 0.0).unwrap();
        for j in 0..64 {
            let t = node_angle(j, 64);
            assert!((nf.underlying.value(t) + Complex64::from_polar(1.0, t)).norm() < 1e-14);
        }
        assert_eq!(nf.provenance, NormalProvenance::Parametrization);
    }

    #[test]
    fn square_bottom_edge() {
        let n = inward_normal_at(c(1.0, 0.0), c(0.5, 0.0), c(0.5, 0.5)).unwrap();
        assert!((n - Complex64::i()).norm() < 1e-15);
        assert!(matches!(
            inward_normal_at(c(1.0, 0.0), c(0.5, 0.0), c(0.9, 0.0)),
            Err(Error::Orientation(_))
        ));
    }

    #[test]
    fn orientation_and_parametrization_errors() {
        let cw = inner_normal(&Parametrization::circle(1.0, false), c(0.0, 0.0), 64, 0.0);
        assert!(matches!(cw, Err(Error::Orientation(_))));
        let outside = inner_normal(&Parametrization::circle(1.0, true), c(3.0, 0.0), 64, 0.0);
        assert!(matches!(outside, Err(Error::Orientation(_))));
        let slow = Parametrization {
            length: TAU,
            zeta: Arc::new(|s| Complex64::from_polar(2.0, s)),
            derivative: Arc::new(|s| Complex64::i() * Complex64::from_polar(2.0, s)),
        };
        assert!(matches!(
            inner_normal(&slow, c(0.0, 0.0), 64, 0.0),
            Err(Error::Parametrization(_))
        ));
    }

    #[test]
    fn disk_cosine() {
        let phi =
            BoundaryFunction::from_pieces(vec![Piece::new(0.0, TAU, "cos(theta)").unwrap()], ValueKind::Real, 512)
                .unwrap();
        let sol = solve_neumann(
            &phi,
            &Domain::Disk,
            0.0,
            &DirectionalParams {
                d0: 0.7,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((sol.u(c(0.5, 0.0)) - (-0.5 + 0.7)).abs() < 1e-9);
        assert!(sol.notes().is_empty());
    }

    #[test]
    fn disk_zero_is_constant() {
        let phi = BoundaryFunction::constant(0.0, 64).unwrap();
        let sol = solve_neumann(
            &phi,
            &Domain::Disk,
            0.0,
            &DirectionalParams {
                d0: 1.5,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(sol.u(c(0.3, -0.6)), 1.5);
    }

    #[test]
    fn incompatible_data_noted() {
        let phi = BoundaryFunction::constant(1.0, 256).unwrap();
        let sol = solve_neumann(&phi, &Domain::Disk, 0.0, &DirectionalParams::default()).unwrap();
        assert_eq!(sol.notes().len(), 1);
        assert!(sol.notes()[0].contains("compatibility"));
        // u = −2 log|1 − z|
        let z = c(0.2, 0.3);
        assert!((sol.u(z) + 2.0 * (c(1.0, 0.0) - z).norm().ln()).abs() < 1e-9);
    }

    #[test]
    fn radial_quotient_matches_normal_derivative() {
        let phi = BoundaryFunction::from_pieces(
            vec![Piece::new(0.0, TAU, "sin(theta)^2").unwrap()],
            ValueKind::Real,
            256,
        )
        .unwrap();
        let sol = solve_neumann(&phi, &Domain::Disk, 0.0, &DirectionalParams::default()).unwrap();
        for k in 1..8 {
            let zeta = Complex64::from_polar(1.0, 0.7 * k as f64);
            let (r, h) = (0.6, 1e-5);
            let radial = (sol.u(zeta * (r + h)) - sol.u(zeta * (r - h))) / (2.0 * h);
            let dn = crate::direction_solver::directional_derivative(&sol, zeta * r, -zeta).unwrap();
            assert!((dn + radial).abs() < 1e-5);
        }
    }

    #[test]
    fn scaled_disk_via_neumann() {
        let map = Arc::new(
            ConformalMap::from_expr(
                "2",
                TheodorsenParams {
                    n: 128,
                    ..Default::default()
                },
            )
            .unwrap(),
        );
        let phi =
            BoundaryFunction::from_pieces(vec![Piece::new(0.0, TAU, "cos(a)").unwrap()], ValueKind::Real, 128).unwrap();
        let sol = solve_neumann(&phi, &Domain::Mapped(map), 0.0, &DirectionalParams::default()).unwrap();
        let w = c(0.7, -1.1);
        assert!((sol.u_at(w).unwrap() + w.re).abs() < 1e-9);
    }
}
