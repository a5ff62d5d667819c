//! Riemann–Hilbert problem `Re(ν(ζ)·f(z)) → φ(ζ)` on the unit disk.
//!
//! With `α = arg ν`, `A = S[α]` and `ψ = φ·e^{−H[α]}`, the function
//! `f = e^{−iA}·S[ψ]` satisfies `ν·f → e^{H[α]}·S[ψ]` on the circle, whose real
//! part is `φ`. Homogeneous solutions are `e^{−iA}·i·p` with `p` real on the
//! circle away from finitely many poles.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::boundary_data::{
    circular_distance, measurable_arg, node_angle, BoundaryFunction, DirectionField, Jump, ValueKind, ANGLE_EPS,
    UNIT_MODULUS_TOL,
};
use crate::disk_harmonic::{
    conjugate_boundary, schwarz_integral_with, Analytic, SchwarzOptions, SeriesEvaluator, CONJUGATE_CLAMP,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverParams {
    /// Poles `ζ_k` of the homogeneous part.
    pub hom_points: Vec<Complex64>,
    /// Real coefficients `c_0..c_k`; empty means all zero.
    pub hom_coeffs: Vec<f64>,
    pub schwarz: SchwarzOptions,
}

#[derive(Debug, Clone)]
pub struct AnalyticSolution {
    nu: DirectionField,
    alpha: BoundaryFunction,
    a: SeriesEvaluator,
    h_alpha: BoundaryFunction,
    weight: BoundaryFunction,
    psi: BoundaryFunction,
    g: SeriesEvaluator,
    hom_points: Vec<Complex64>,
    hom_coeffs: Vec<f64>,
    /// Number of conjugate samples that hit the clamp.
    clamped: usize,
}

impl AnalyticSolution {
    pub fn nu(&self) -> &DirectionField {
        &self.nu
    }

    pub fn alpha(&self) -> &BoundaryFunction {
        &self.alpha
    }

    /// `A = S[α]`.
    pub fn argument_completion(&self) -> &SeriesEvaluator {
        &self.a
    }

    /// `H[α]` at the nodes.
    pub fn conjugate_alpha(&self) -> &BoundaryFunction {
        &self.h_alpha
    }

    pub fn weight(&self) -> &BoundaryFunction {
        &self.weight
    }

    pub fn psi(&self) -> &BoundaryFunction {
        &self.psi
    }

    pub fn g(&self) -> &SeriesEvaluator {
        &self.g
    }

    pub fn hom_points(&self) -> &[Complex64] {
        &self.hom_points
    }

    pub fn hom_coeffs(&self) -> &[f64] {
        &self.hom_coeffs
    }

    pub fn clamped_samples(&self) -> usize {
        self.clamped
    }

    /// Boundary angles where the solution is not expected to have a limit:
    /// discontinuities of `α` and of `ψ`, and the homogeneous poles.
    pub fn exceptional_angles(&self) -> Vec<f64> {
        let mut out = self.alpha.discontinuities();
        out.extend(self.psi.discontinuities());
        out.extend(self.hom_points.iter().map(|p| p.arg().rem_euclid(TAU)));
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() < ANGLE_EPS);
        out
    }

    /// `e^{−iA(z)}`.
    pub fn factor(&self, z: Complex64) -> Complex64 {
        (-Complex64::i() * self.a.value(z)).exp()
    }

    /// `p(z) = c_0 + Σ c_k·i(ζ_k + z)/(ζ_k − z)`.
    pub fn homogeneous_part(&self, z: Complex64) -> Complex64 {
        let Some((&c0, rest)) = self.hom_coeffs.split_first() else {
            return Complex64::new(0.0, 0.0);
        };
        let mut p = Complex64::new(c0, 0.0);
        for (c, zeta) in rest.iter().zip(&self.hom_points) {
            if *c != 0.0 {
                p += Complex64::i() * (zeta + z) / (zeta - z) * *c;
            }
        }
        p
    }

    pub fn value(&self, z: Complex64) -> Complex64 {
        self.factor(z) * (self.g.value(z) + Complex64::i() * self.homogeneous_part(z))
    }

    /// Value restricted to the open disk.
    pub fn checked_value(&self, z: Complex64) -> Result<Complex64> {
        if z.norm() >= 1.0 {
            return Err(Error::Domain(format!(
                "|z| = {} is outside the open unit disk",
                z.norm()
            )));
        }
        let v = self.value(z);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Evaluation {
                point: z,
                message: "solution is not finite".into(),
            });
        }
        Ok(v)
    }

    /// Same construction with a different homogeneous part.
    pub fn with_homogeneous(&self, points: Vec<Complex64>, coeffs: Vec<f64>) -> Result<Self> {
        check_hom(&points, &coeffs)?;
        Ok(AnalyticSolution {
            hom_points: points,
            hom_coeffs: coeffs,
            ..self.clone()
        })
    }

    /// `Re(ν(θ)·f(z))`.
    pub fn boundary_functional(&self, theta: f64, z: Complex64) -> f64 {
        (self.nu.value(theta) * self.value(z)).re
    }
}

impl Analytic for AnalyticSolution {
    fn value(&self, z: Complex64) -> Complex64 {
        AnalyticSolution::value(self, z)
    }
}

fn check_hom(points: &[Complex64], coeffs: &[f64]) -> Result<()> {
    for (k, p) in points.iter().enumerate() {
        if (p.norm() - 1.0).abs() > UNIT_MODULUS_TOL {
            return Err(Error::Config(format!(
                "homogeneous point {p} is not on the unit circle"
            )));
        }
        for q in &points[..k] {
            if circular_distance(p.arg(), q.arg()) < ANGLE_EPS {
                return Err(Error::Config(format!("duplicate homogeneous point {p}")));
            }
        }
    }
    if !coeffs.is_empty() && coeffs.len() != points.len() + 1 {
        return Err(Error::Config(format!(
            "{} homogeneous coefficients given for {} points; expected {}",
            coeffs.len(),
            points.len(),
            points.len() + 1
        )));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::Config("homogeneous coefficients must be finite".into()));
    }
    Ok(())
}

/// `e^{−H[α](θ)}` off the nodes, through the boundary trace of `Im A`.
fn weight_at(a: &SeriesEvaluator, alpha: &BoundaryFunction, theta: f64) -> f64 {
    let h = match alpha
        .jumps()
        .iter()
        .find(|j| circular_distance(j.angle, theta) < ANGLE_EPS)
    {
        Some(j) => -j.size.re.signum() * CONJUGATE_CLAMP,
        None => a.value(Complex64::from_polar(1.0, theta)).im,
    };
    (-h.clamp(-CONJUGATE_CLAMP, CONJUGATE_CLAMP)).exp()
}

pub fn solve_rh(nu: &DirectionField, phi: &BoundaryFunction, params: &SolverParams) -> Result<AnalyticSolution> {
    if phi.kind() != ValueKind::Real {
        return Err(Error::Type("boundary data φ must be real-valued".into()));
    }
    phi.check_same_nodes(nu.base())?;
    check_hom(&params.hom_points, &params.hom_coeffs)?;
    let n = phi.len();
    let alpha = measurable_arg(nu)?;
    let a = schwarz_integral_with(&alpha, params.schwarz)?;
    let h_alpha = conjugate_boundary(&alpha)?;
    let clamped = h_alpha
        .real_samples()
        .iter()
        .filter(|h| h.abs() >= CONJUGATE_CLAMP)
        .count();
    let weight_samples: Vec<Complex64> = h_alpha
        .real_samples()
        .iter()
        .map(|h| Complex64::new((-h).exp(), 0.0))
        .collect();
    let weight = BoundaryFunction::derived(
        weight_samples.clone(),
        ValueKind::Real,
        Vec::new(),
        alpha.discontinuities(),
    )?;
    let phi_samples = phi.real_samples();
    let mut psi_samples = Vec::with_capacity(n);
    for (j, (p, w)) in phi_samples.iter().zip(&weight_samples).enumerate() {
        let v = p * w.re;
        if !v.is_finite() {
            return Err(Error::NumericalRange {
                node: j,
                angle: node_angle(j, n),
                message: format!("ψ = φ·e^{{−H[α]}} is not finite (φ = {p}, weight = {})", w.re),
            });
        }
        psi_samples.push(Complex64::new(v, 0.0));
    }
    let mut psi_jumps = Vec::new();
    for jump in phi.jumps() {
        let w = weight_at(&a, &alpha, jump.angle);
        let size = jump.size.re * w;
        if !size.is_finite() {
            let j = ((jump.angle / TAU) * n as f64).round() as usize % n;
            return Err(Error::NumericalRange {
                node: j,
                angle: jump.angle,
                message: "jump of ψ is not finite".into(),
            });
        }
        if size != 0.0 {
            psi_jumps.push(Jump {
                angle: jump.angle,
                size: Complex64::new(size, 0.0),
            });
        }
    }
    let mut psi_singular = alpha.discontinuities();
    psi_singular.extend(phi.singularities());
    let psi = BoundaryFunction::derived(psi_samples, ValueKind::Real, psi_jumps, psi_singular)?;
    let g = schwarz_integral_with(&psi, params.schwarz)?;
    Ok(AnalyticSolution {
        nu: nu.clone(),
        alpha,
        a,
        h_alpha,
        weight,
        psi,
        g,
        hom_points: params.hom_points.clone(),
        hom_coeffs: params.hom_coeffs.clone(),
        clamped,
    })
}

/// `k + 1` solutions of the homogeneous problem `Re(ν f) → 0`: the constant
/// member `i·e^{−iA}` and one member per pole.
pub fn homogeneous_family(nu: &DirectionField, points: &[Complex64]) -> Result<Vec<AnalyticSolution>> {
    check_hom(points, &[])?;
    for p in points {
        let angle = p.arg().rem_euclid(TAU);
        if nu
            .base()
            .jumps()
            .iter()
            .any(|j| circular_distance(j.angle, angle) < ANGLE_EPS)
        {
            return Err(Error::Config(format!(
                "homogeneous point {p} coincides with a jump of ν"
            )));
        }
    }
    let zero = BoundaryFunction::constant(0.0, nu.len())?;
    let base = solve_rh(nu, &zero, &SolverParams::default())?;
    let k = points.len();
    (0..=k)
        .map(|m| {
            let mut coeffs = vec![0.0; k + 1];
            coeffs[m] = 1.0;
            base.with_homogeneous(points.to_vec(), coeffs)
        })
        .collect()
}

/// `k` roots of `−1`, rotated so that they keep clear of the given angles.
pub fn default_hom_points(k: usize, avoid: &[f64]) -> Vec<Complex64> {
    if k == 0 {
        return Vec::new();
    }
    let spacing = TAU / k as f64;
    let base = |m: usize, shift: f64| PI / k as f64 + m as f64 * spacing + shift;
    let clearance = |shift: f64| {
        (0..k)
            .flat_map(|m| avoid.iter().map(move |&a| circular_distance(base(m, shift), a)))
            .fold(f64::INFINITY, f64::min)
    };
    let steps = 64;
    let target = (spacing / 4.0).min(0.1);
    let mut best = (0.0, clearance(0.0));
    for s in 0..steps {
        let shift = s as f64 * spacing / steps as f64;
        let c = clearance(shift);
        if c >= target {
            best = (shift, c);
            break;
        }
        if c > best.1 {
            best = (shift, c);
        }
    }
    (0..k).map(|m| Complex64::from_polar(1.0, base(m, best.0))).collect()
}

/// Largest relative Cauchy–Riemann defect `|∂_x f − (−i)∂_y f| / (1 + |∂_x f|)`
/// over the given points, by fourth-order central differences.
pub fn cauchy_riemann_residual<F: Analytic + ?Sized>(f: &F, points: &[Complex64], h: f64) -> f64 {
    let diff = |z: Complex64, step: Complex64| {
        (f.value(z - 2.0 * step) - 8.0 * f.value(z - step) + 8.0 * f.value(z + step) - f.value(z + 2.0 * step))
            / (12.0 * h)
    };
    points
        .iter()
        .map(|&z| {
            let dx = diff(z, Complex64::new(h, 0.0));
            let dy = diff(z, Complex64::new(0.0, h));
            (dx + Complex64::i() * dy).norm() / (1.0 + dx.norm())
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary_data::Piece;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real(src: &str, n: usize) -> BoundaryFunction {
        BoundaryFunction::from_pieces(vec![Piece::new(0.0, TAU, src).unwrap()], ValueKind::Real, n).unwrap()
    }

    fn interior(count: usize, rmax: f64, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let r = rmax * rng.gen::<f64>().sqrt();
                Complex64::from_polar(r, rng.gen_range(0.0..TAU))
            })
            .collect()
    }

    #[test]
    fn trivial_direction_gives_schwarz_integral() {
        let nu = DirectionField::constant(c(1.0, 0.0), 64, 0.0).unwrap();
        let sol = solve_rh(&nu, &real("cos(theta)", 64), &SolverParams::default()).unwrap();
        assert!(sol.alpha().real_samples().iter().all(|a| a.abs() < 1e-15));
        for z in interior(20, 0.99, 1) {
            assert!((sol.value(z) - z).norm() < 1e-13);
        }
        for j in 0..64 {
            let t = node_angle(j, 64);
            let f = sol.value(Complex64::from_polar(1.0, t));
            assert!((f.re - t.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn disk_normal_closed_form_trace() {
        let n = 256;
        let nu = DirectionField::disk_inner_normal(n, 0.0).unwrap();
        let sol = solve_rh(&nu, &real("cos(theta)", n), &SolverParams::default()).unwrap();
        // α = θ − π
        for (j, a) in sol.alpha().real_samples().iter().enumerate() {
            assert!((a - (node_angle(j, n) - PI)).abs() < 1e-12);
        }
        // A = −2i log(1 − z)
        for z in interior(10, 0.95, 2) {
            let a = -2.0 * Complex64::i() * (c(1.0, 0.0) - z).ln();
            assert!((sol.argument_completion().value(z) - a).norm() < 1e-10);
        }
        // H[α] = −2 log(2 sin(θ/2)) and ψ = −1 + 2cos θ − cos 2θ
        for j in 1..n {
            let t = node_angle(j, n);
            let h = -2.0 * (2.0 * (t / 2.0).sin()).ln();
            assert!((sol.conjugate_alpha().real_samples()[j] - h).abs() < 1e-10);
            let psi = -1.0 + 2.0 * t.cos() - (2.0 * t).cos();
            assert!((sol.psi().real_samples()[j] - psi).abs() < 1e-10);
        }
        for z in interior(50, 0.999, 3) {
            let g = c(-1.0, 0.0) + 2.0 * z - z * z;
            assert!((sol.g().value(z) - g).norm() < 1e-10);
            assert!((sol.value(z) - c(-1.0, 0.0)).norm() < 1e-8, "f({z}) = {}", sol.value(z));
        }
    }

    #[test]
    fn disk_normal_constant_data() {
        let n = 512;
        let nu = DirectionField::disk_inner_normal(n, 0.0).unwrap();
        let sol = solve_rh(
            &nu,
            &BoundaryFunction::constant(1.0, n).unwrap(),
            &SolverParams::default(),
        )
        .unwrap();
        for z in interior(50, 0.999, 4) {
            let f = 2.0 / (c(1.0, 0.0) - z);
            assert!((sol.value(z) - f).norm() < 1e-8 * f.norm());
        }
    }

    #[test]
    fn zero_data_zero_solution() {
        let nu = DirectionField::from_expr("exp(i*(theta + sin(theta)))", 128, 0.0).unwrap();
        let sol = solve_rh(
            &nu,
            &BoundaryFunction::constant(0.0, 128).unwrap(),
            &SolverParams::default(),
        )
        .unwrap();
        for z in interior(20, 0.99, 5) {
            assert_eq!(sol.value(z), c(0.0, 0.0));
        }
    }

    #[test]
    fn boundary_condition_for_smooth_rotating_field() {
        let n = 512;
        let nu = DirectionField::from_expr("exp(i*(2*theta + 0.3*sin(theta)))", n, 0.0).unwrap();
        let phi = real("sin(theta) + 0.5*cos(3*theta)", n);
        let sol = solve_rh(&nu, &phi, &SolverParams::default()).unwrap();
        // f grows like (1 − z)^{−4} at the cut, so stay a quarter turn away
        for j in (n / 8..7 * n / 8).step_by(17) {
            let t = node_angle(j, n);
            let z = Complex64::from_polar(1.0 - 1e-9, t);
            let got = sol.boundary_functional(t, z);
            let want = t.sin() + 0.5 * (3.0 * t).cos();
            assert!((got - want).abs() < 1e-6, "θ = {t}: {got} vs {want}");
        }
    }

    #[test]
    fn analytic_by_cauchy_riemann() {
        let nu = DirectionField::disk_inner_normal(256, 0.0).unwrap();
        let phi = BoundaryFunction::from_pieces(
            vec![Piece::new(0.0, PI, "1").unwrap(), Piece::new(PI, TAU, "-1").unwrap()],
            ValueKind::Real,
            256,
        )
        .unwrap();
        let sol = solve_rh(&nu, &phi, &SolverParams::default()).unwrap();
        assert!(cauchy_riemann_residual(&sol, &interior(40, 0.7, 6), 1e-3) < 1e-8);
    }

    #[test]
    fn superposition_and_scaling() {
        let n = 256;
        let nu = DirectionField::from_expr("exp(i*(theta + 0.2*cos(theta)))", n, 0.0).unwrap();
        let p1 = real("cos(theta)", n);
        let p2 = real("exp(sin(theta))", n);
        let p12 = real("cos(theta) + exp(sin(theta))", n);
        let s1 = solve_rh(&nu, &p1, &SolverParams::default()).unwrap();
        let s2 = solve_rh(&nu, &p2, &SolverParams::default()).unwrap();
        let s12 = solve_rh(&nu, &p12, &SolverParams::default()).unwrap();
        let p3 = real("3*cos(theta)", n);
        let s3 = solve_rh(&nu, &p3, &SolverParams::default()).unwrap();
        for z in interior(30, 0.95, 7) {
            let sum = s1.value(z) + s2.value(z);
            assert!((sum - s12.value(z)).norm() < 1e-9 * (1.0 + sum.norm()));
            assert!((s3.value(z) - 3.0 * s1.value(z)).norm() < 1e-12 * (1.0 + s3.value(z).norm()));
        }
    }

    #[test]
    fn homogeneous_members() {
        let nu = DirectionField::constant(c(1.0, 0.0), 64, 0.0).unwrap();
        let fam = homogeneous_family(&nu, &[]).unwrap();
        assert_eq!(fam.len(), 1);
        assert!((fam[0].value(c(0.3, 0.1)) - Complex64::i()).norm() < 1e-15);

        let fam = homogeneous_family(&nu, &[c(-1.0, 0.0)]).unwrap();
        assert_eq!(fam.len(), 2);
        for z in interior(10, 0.9, 8) {
            let want = (z - 1.0) / (z + 1.0);
            assert!((fam[1].value(z) - want).norm() < 1e-14);
        }
        for j in 0..64 {
            if j == 32 {
                continue;
            }
            let z = Complex64::from_polar(1.0, node_angle(j, 64));
            assert!(fam[1].value(z).re.abs() < 1e-8);
        }
    }

    #[test]
    fn homogeneous_errors() {
        let nu = DirectionField::constant(c(1.0, 0.0), 64, 0.0).unwrap();
        assert!(matches!(
            homogeneous_family(&nu, &[c(0.0, 1.0), c(0.0, 1.0)]),
            Err(Error::Config(_))
        ));
        assert!(homogeneous_family(&nu, &[c(0.0, 1.1)]).is_err());
        let phi = BoundaryFunction::constant(1.0, 64).unwrap();
        let params = SolverParams {
            hom_points: vec![c(0.0, 1.0)],
            hom_coeffs: vec![1.0],
            ..Default::default()
        };
        assert!(matches!(solve_rh(&nu, &phi, &params), Err(Error::Config(_))));
    }

    #[test]
    fn mismatched_resolution() {
        let nu = DirectionField::constant(c(1.0, 0.0), 64, 0.0).unwrap();
        let phi = BoundaryFunction::constant(1.0, 128).unwrap();
        assert!(matches!(
            solve_rh(&nu, &phi, &SolverParams::default()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn default_points_avoid_jumps() {
        let pts = default_hom_points(4, &[]);
        assert!((pts[0] - Complex64::from_polar(1.0, PI / 4.0)).norm() < 1e-15);
        for p in &pts {
            assert!((p.powi(4) + 1.0).norm() < 1e-12);
        }
        let avoid = [PI / 4.0, 3.0 * PI / 4.0];
        let pts = default_hom_points(4, &avoid);
        for p in &pts {
            for a in &avoid {
                assert!(circular_distance(p.arg(), *a) > 0.05);
            }
        }
    }
}
