//! Conformal maps of the disk onto star-like domains `{r < ρ(a)}` by
//! Theodorsen's iteration, and transplantation of boundary problems.
//!
//! The boundary correspondence `σ` solves `σ(t) = t + H[log ρ ∘ σ](t)`, and then
//! `ω(z) = z·exp(S[log ρ ∘ σ](z))` with `arg ω(e^{it}) = σ(t)`.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::boundary_data::{node_angle, BoundaryFunction, DirectionField, ValueKind};
use crate::direction_solver::{DirectionalParams, DomainMap, HarmonicSolution};
use crate::disk_harmonic::{conjugate_boundary, schwarz_integral, SeriesEvaluator};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::rh_solver::solve_rh;

pub type RadiusFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheodorsenParams {
    pub n: usize,
    pub max_iter: usize,
    pub fp_tol: f64,
}

impl Default for TheodorsenParams {
    fn default() -> Self {
        TheodorsenParams {
            n: 1024,
            max_iter: 200,
            fp_tol: 1e-13,
        }
    }
}

#[derive(Clone)]
pub struct ConformalMap {
    rho: RadiusFn,
    rho_source: Option<String>,
    /// `S[log ρ ∘ σ]`.
    log_series: SeriesEvaluator,
    omega: SeriesEvaluator,
    omega_prime: SeriesEvaluator,
    sigma: Vec<f64>,
    residual: f64,
    history: Vec<f64>,
}

impl fmt::Debug for ConformalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConformalMap")
            .field("rho", &self.rho_source)
            .field("n", &self.sigma.len())
            .field("terms", &self.omega.coefficients().len())
            .field("residual", &self.residual)
            .field("iterations", &self.history.len())
            .finish()
    }
}

fn finite_difference(rho: &RadiusFn, a: f64) -> f64 {
    let h = 1e-5;
    (rho(a + h) - rho(a - h)) / (2.0 * h)
}

pub fn theodorsen_map(rho: RadiusFn, params: TheodorsenParams) -> Result<ConformalMap> {
    let n = params.n;
    crate::boundary_data::check_node_count(n)?;
    if !(params.fp_tol > 0.0) || params.max_iter == 0 {
        return Err(Error::Config(
            "Theodorsen iteration needs fp_tol > 0 and max_iter ≥ 1".into(),
        ));
    }
    let mut epsilon: f64 = 0.0;
    for j in 0..n {
        let a = node_angle(j, n);
        let r = rho(a);
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::ConvergenceDomain(format!("ρ({a}) = {r} is not positive")));
        }
        epsilon = epsilon.max((finite_difference(&rho, a) / r).abs());
    }
    if epsilon >= 1.0 {
        return Err(Error::ConvergenceDomain(format!(
            "max |ρ′/ρ| = {epsilon:.6} violates the Theodorsen condition |ρ′/ρ| < 1"
        )));
    }
    let t: Vec<f64> = (0..n).map(|j| node_angle(j, n)).collect();
    let mut sigma = t.clone();
    let mut history = Vec::new();
    let mut log_rho = BoundaryFunction::from_samples(sigma.iter().map(|&s| rho(s).ln()).collect())?;
    loop {
        let h = conjugate_boundary(&log_rho)?.real_samples();
        let next: Vec<f64> = t.iter().zip(&h).map(|(t, h)| t + h).collect();
        let change = next.iter().zip(&sigma).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        sigma = next;
        history.push(change);
        log_rho = BoundaryFunction::from_samples(sigma.iter().map(|&s| rho(s).ln()).collect())?;
        if change < params.fp_tol {
            break;
        }
        if history.len() >= params.max_iter {
            return Err(Error::NonConvergence {
                iterations: history.len(),
                last: change,
                history,
            });
        }
    }
    let log_series = schwarz_integral(&log_rho)?;
    // Taylor coefficients of ω from its values on the circle
    let m = 2 * n;
    let mut values: Vec<Complex64> = (0..m)
        .map(|j| {
            let z = Complex64::from_polar(1.0, node_angle(j, m));
            z * log_series.value(z).exp()
        })
        .collect();
    let mut planner = rustfft::FftPlanner::<f64>::new();
    planner.plan_fft_forward(m).process(&mut values);
    let mut coefficients: Vec<Complex64> = values[..m / 2].iter().map(|v| v / m as f64).collect();
    let scale = coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max);
    while coefficients.len() > 2 && coefficients.last().is_some_and(|c| c.norm() < 1e-16 * scale) {
        coefficients.pop();
    }
    coefficients[0] = Complex64::new(0.0, 0.0);
    let omega = SeriesEvaluator::new(coefficients, 1.0 - 1.0 / n as f64)?;
    let omega_prime = omega.differentiate()?;
    let mut map = ConformalMap {
        rho,
        rho_source: None,
        log_series,
        omega,
        omega_prime,
        sigma,
        residual: 0.0,
        history,
    };
    map.residual = map.correspondence_residual(n);
    map.check_injective()?;
    Ok(map)
}

impl ConformalMap {
    /// Map for `ρ` given as an expression in the polar angle `a`.
    pub fn from_expr(source: &str, params: TheodorsenParams) -> Result<Self> {
        let expr = Expr::parse(source)?;
        for j in 0..params.n.max(16) {
            expr.eval_real(node_angle(j, params.n.max(16)))?;
        }
        let e = expr.clone();
        let rho: RadiusFn = Arc::new(move |a| e.eval(a).re);
        let mut map = theodorsen_map(rho, params)?;
        map.rho_source = Some(source.to_string());
        Ok(map)
    }

    pub fn identity(n: usize) -> Result<Self> {
        theodorsen_map(
            Arc::new(|_| 1.0),
            TheodorsenParams {
                n,
                ..Default::default()
            },
        )
    }

    pub fn rho(&self, a: f64) -> f64 {
        (self.rho)(a)
    }

    pub fn rho_source(&self) -> Option<&str> {
        self.rho_source.as_deref()
    }

    pub fn omega_series(&self) -> &SeriesEvaluator {
        &self.omega
    }

    pub fn omega_prime_series(&self) -> &SeriesEvaluator {
        &self.omega_prime
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    /// `σ` at the nodes from the final iterate.
    pub fn sigma_samples(&self) -> &[f64] {
        &self.sigma
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn iterations(&self) -> usize {
        self.history.len()
    }

    pub fn history(&self) -> &[f64] {
        &self.history
    }

    /// Boundary correspondence `σ(t) = t + Im S[log ρ ∘ σ](e^{it})`.
    pub fn sigma(&self, t: f64) -> f64 {
        t + self.log_series.value(Complex64::from_polar(1.0, t)).im
    }

    fn sigma_derivative(&self, t: f64) -> f64 {
        let z = Complex64::from_polar(1.0, t);
        1.0 + (z * self.log_series.derivative(z)).re
    }

    /// Parameter `t` with `σ(t) = a (mod 2π)`, in `[0, 2π)`.
    pub fn sigma_inverse(&self, a: f64) -> f64 {
        let a = a.rem_euclid(TAU);
        let mut t = a;
        for _ in 0..60 {
            let step = (self.sigma(t) - a) / self.sigma_derivative(t);
            t -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        t.rem_euclid(TAU)
    }

    /// `max_j | |ω(e^{iθ_j})| − ρ(arg ω(e^{iθ_j})) |` over `n` nodes.
    pub fn correspondence_residual(&self, n: usize) -> f64 {
        (0..n)
            .map(|j| self.boundary_residual(node_angle(j, n)))
            .fold(0.0, f64::max)
    }

    pub fn boundary_residual(&self, t: f64) -> f64 {
        let w = self.omega.value(Complex64::from_polar(1.0, t));
        (w.norm() - self.rho(w.arg())).abs()
    }

    fn check_injective(&self) -> Result<()> {
        let scale = self.omega_prime.value(Complex64::new(0.0, 0.0)).norm();
        for i in 1..=19 {
            let r = 0.05 * i as f64;
            for k in 0..128 {
                let z = Complex64::from_polar(r, TAU * k as f64 / 128.0);
                if self.omega_prime.value(z).norm() < 1e-8 * scale {
                    return Err(Error::Invariant(format!("ω′ vanishes near z = {z}")));
                }
            }
        }
        Ok(())
    }

    /// Inward unit normal at `ω(e^{it})`.
    pub fn inner_normal(&self, t: f64) -> Complex64 {
        let z = Complex64::from_polar(1.0, t);
        let d = z * self.omega_prime.value(z);
        -d / d.norm()
    }

    pub fn normal_field(&self, n: usize, cut: f64) -> Result<DirectionField> {
        let map = self.clone();
        DirectionField::new(
            BoundaryFunction::from_fn(move |t| map.inner_normal(t), ValueKind::Complex, n)?,
            cut,
        )
    }

    /// Cumulative arclength `s(t_j)` at the nodes by the trapezoid rule on
    /// `|ω′(e^{it})|`, and the total length.
    pub fn arclength(&self, n: usize) -> (Vec<f64>, f64) {
        let speed: Vec<f64> = (0..=n)
            .map(|j| {
                self.omega_prime
                    .value(Complex64::from_polar(1.0, node_angle(j, n)))
                    .norm()
            })
            .collect();
        let h = TAU / n as f64;
        let mut s = Vec::with_capacity(n);
        let mut acc = 0.0;
        for j in 0..n {
            s.push(acc);
            acc += 0.5 * h * (speed[j] + speed[j + 1]);
        }
        (s, acc)
    }

    /// `∮ φ ds` for `φ` given on the polar angle.
    pub fn boundary_integral(&self, phi: &BoundaryFunction) -> f64 {
        let n = phi.len();
        (0..n)
            .map(|j| {
                let t = node_angle(j, n);
                let speed = self.omega_prime.value(Complex64::from_polar(1.0, t)).norm();
                phi.real_value(self.sigma(t)) * speed
            })
            .sum::<f64>()
            * TAU
            / n as f64
    }

    /// `t ↦ f(σ(t))` for a function of the polar angle.
    pub fn pull_back(&self, f: &BoundaryFunction) -> Result<BoundaryFunction> {
        let map = self.clone();
        let jump_params: Vec<f64> = f.jumps().iter().map(|j| self.sigma_inverse(j.angle)).collect();
        BoundaryFunction::compose(
            Arc::new(f.clone()),
            Arc::new(move |t| map.sigma(t).rem_euclid(TAU)),
            &jump_params,
            f.len(),
        )
    }

    pub fn pull_back_direction(&self, nu: &DirectionField) -> Result<DirectionField> {
        DirectionField::new(self.pull_back(nu.base())?, nu.cut())
    }

    /// Point of the boundary at polar angle `a`.
    pub fn boundary_point(&self, a: f64) -> Complex64 {
        Complex64::from_polar(self.rho(a), a)
    }
}

impl DomainMap for ConformalMap {
    fn omega(&self, z: Complex64) -> Complex64 {
        self.omega.value(z)
    }

    fn omega_prime(&self, z: Complex64) -> Complex64 {
        self.omega_prime.value(z)
    }

    fn inverse(&self, w: Complex64) -> Result<Complex64> {
        let r = w.norm();
        if r == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let a = w.arg();
        let radius = self.rho(a);
        if r >= radius {
            return Err(Error::Domain(format!("w = {w} is outside the domain")));
        }
        let mut z = Complex64::from_polar(r / radius, self.sigma_inverse(a));
        for _ in 0..100 {
            let residual = self.omega.value(z) - w;
            if residual.norm() <= 1e-15 * (1.0 + r) {
                return Ok(z);
            }
            let mut step = residual / self.omega_prime.value(z);
            while (z - step).norm() >= 1.0 {
                step *= 0.5;
            }
            z -= step;
            if step.norm() < 1e-17 {
                return Ok(z);
            }
        }
        if (self.omega.value(z) - w).norm() <= 1e-12 * (1.0 + r) {
            return Ok(z);
        }
        Err(Error::PointQuery {
            point: w,
            message: "Newton iteration for ω(z) = w did not converge".into(),
        })
    }
}

/// Solves the directional problem on the mapped domain. `nu` (or the inward
/// normal when `None`) and `phi` are functions of the polar angle of the
/// boundary point.
pub fn transplant_solve(
    map: &Arc<ConformalMap>,
    nu: Option<&DirectionField>,
    phi: &BoundaryFunction,
    params: &DirectionalParams,
) -> Result<HarmonicSolution> {
    let n = phi.len();
    let lambda = match nu {
        Some(nu) => map.pull_back_direction(nu)?,
        None => map.normal_field(n, 0.0)?,
    };
    solve_on_map(map, &lambda, &map.pull_back(phi)?, params)
}

/// Disk problem for `g̃ = f_D ∘ ω` with coefficient and data already given on
/// the disk parameter `t`.
pub fn solve_on_map(
    map: &Arc<ConformalMap>,
    lambda: &DirectionField,
    phi_t: &BoundaryFunction,
    params: &DirectionalParams,
) -> Result<HarmonicSolution> {
    let rh = solve_rh(lambda, phi_t, &params.solver)?;
    let map: Arc<dyn DomainMap> = map.clone();
    HarmonicSolution::new(rh, Some(map), params.quadrature, params.d0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary_data::Piece;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ellipse() -> ConformalMap {
        ConformalMap::from_expr(
            "0.8/sqrt(0.64*cos(a)^2 + sin(a)^2)",
            TheodorsenParams {
                n: 256,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn identity_map() {
        let m = ConformalMap::identity(64).unwrap();
        for &z in &[c(0.3, 0.2), c(-0.7, 0.1)] {
            assert!((m.omega(z) - z).norm() < 1e-12);
        }
        assert!(m.residual() < 1e-14);
        assert!((m.sigma(1.3) - 1.3).abs() < 1e-14);
    }

    #[test]
    fn scaling_map() {
        let m = ConformalMap::from_expr(
            "2",
            TheodorsenParams {
                n: 64,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((m.omega(c(0.3, -0.2)) - c(0.6, -0.4)).norm() < 1e-12);
        assert!((m.inverse(c(1.0, 1.0)).unwrap() - c(0.5, 0.5)).norm() < 1e-14);
    }

    #[test]
    fn ellipse_converges_and_is_symmetric() {
        let m = ellipse();
        assert!(m.residual() < 1e-6);
        assert!(m.iterations() <= 200);
        assert!(m.omega_prime(c(0.0, 0.0)).im.abs() < 1e-14 && m.omega_prime(c(0.0, 0.0)).re > 0.0);
        for &z in &[c(0.3, 0.4), c(-0.5, 0.6), c(0.9, -0.1)] {
            assert!((m.omega(z.conj()) - m.omega(z).conj()).norm() < 1e-10);
            let w = m.omega(z);
            assert!((m.inverse(w).unwrap() - z).norm() < 1e-12);
        }
        // boundary point lies on the ellipse x² + (y/0.8)² = 1
        for k in 0..10 {
            let w = m.omega(Complex64::from_polar(1.0, 0.6 * k as f64));
            assert!((w.re * w.re + w.im * w.im / 0.64 - 1.0).abs() < 1e-6);
        }
        assert!(matches!(m.inverse(c(0.99, 0.5)), Err(Error::Domain(_))));
    }

    #[test]
    fn normal_points_inward() {
        let m = ellipse();
        for k in 0..32 {
            let t = TAU * k as f64 / 32.0;
            let w = m.omega(Complex64::from_polar(1.0, t));
            let inside = w + 1e-3 * m.inner_normal(t);
            assert!(inside.re * inside.re + inside.im * inside.im / 0.64 < 1.0);
        }
        let (_, length) = m.arclength(256);
        // Ramanujan's perimeter approximation for a = 1, b = 0.8
        let (a, b) = (1.0f64, 0.8f64);
        let hh = ((a - b) / (a + b)).powi(2);
        let p = std::f64::consts::PI * (a + b) * (1.0 + 3.0 * hh / (10.0 + (4.0 - 3.0 * hh).sqrt()));
        assert!((length - p).abs() < 1e-8);
    }

    #[test]
    fn epsilon_condition() {
        let r = ConformalMap::from_expr(
            "1 + 0.9*cos(3*a)",
            TheodorsenParams {
                n: 64,
                ..Default::default()
            },
        );
        assert!(matches!(r, Err(Error::ConvergenceDomain(_))));
        let r = ConformalMap::from_expr(
            "1 + 0.2*cos(3*a)",
            TheodorsenParams {
                n: 64,
                max_iter: 2,
                fp_tol: 1e-14,
            },
        );
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn scaled_disk_neumann() {
        let m = Arc::new(
            ConformalMap::from_expr(
                "2",
                TheodorsenParams {
                    n: 256,
                    ..Default::default()
                },
            )
            .unwrap(),
        );
        let phi =
            BoundaryFunction::from_pieces(vec![Piece::new(0.0, TAU, "cos(a)").unwrap()], ValueKind::Real, 256).unwrap();
        let sol = transplant_solve(&m, None, &phi, &DirectionalParams::default()).unwrap();
        for &w in &[c(0.5, 0.2), c(-1.2, 1.0), c(0.0, -1.9)] {
            assert!((sol.u_at(w).unwrap() + w.re).abs() < 1e-9);
        }
    }

    #[test]
    fn ellipse_zero_data() {
        let m = Arc::new(ellipse());
        let zero = BoundaryFunction::constant(0.0, 256).unwrap();
        let sol = transplant_solve(&m, None, &zero, &DirectionalParams::default()).unwrap();
        assert_eq!(sol.u_at(c(0.3, 0.2)).unwrap(), 0.0);
    }
}
