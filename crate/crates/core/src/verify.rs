//! Numerical certification of the boundary behaviour of a solution.
//!
//! A vertex passes when `Re(ν(ζ)·f(z)) → φ(ζ)` along every requested Stolz
//! path, with the limit converged and within `tol`. Vertices within `δ` of a
//! jump, of the branch cut of `arg ν`, or of a homogeneous pole are excluded
//! and carry the reason.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::boundary_data::{circular_distance, node_angle, BoundaryFunction, DirectionField, ANGLE_EPS};
use crate::direction_solver::HarmonicSolution;
use crate::disk_harmonic::{default_probe_depth, nontangential_eval, StolzPath};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySettings {
    /// Number of uniformly spaced vertices.
    pub vertices: usize,
    pub apertures: Vec<f64>,
    pub tol: f64,
    /// Exclusion radius around exceptional angles.
    pub delta: f64,
    /// Deepest probe exponent; `None` picks it from the resolution.
    pub probe_depth: Option<u32>,
    /// Tolerance for the normal difference quotient.
    pub quotient_tol: f64,
    /// Exponent `j` of the quotient step `t = 2^{−j}`.
    pub quotient_depth: u32,
    pub chords: usize,
    pub chord_tol: f64,
    /// Laplacian check: grid points per side on `[−r, r]²`, radius `r`, step `h`.
    pub residual_grid: usize,
    pub residual_radius: f64,
    pub residual_step: f64,
    pub seed: u64,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            vertices: 500,
            apertures: vec![0.0, 0.5, -0.5, 1.0, -1.0],
            tol: 1e-3,
            delta: 1e-2,
            probe_depth: None,
            quotient_tol: 1e-2,
            quotient_depth: 12,
            chords: 20,
            chord_tol: 1e-6,
            residual_grid: 41,
            residual_radius: 0.9,
            residual_step: 1e-3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExclusionReason {
    #[serde(rename = "jump-neighborhood")]
    Jump,
    #[serde(rename = "cut-neighborhood")]
    Cut,
    #[serde(rename = "hom-pole-neighborhood")]
    HomPole,
}

impl ExclusionReason {
    pub fn as_str(self) -> &'static str {
        match self {
            ExclusionReason::Jump => "jump-neighborhood",
            ExclusionReason::Cut => "cut-neighborhood",
            ExclusionReason::HomPole => "hom-pole-neighborhood",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexRecord {
    pub angle: f64,
    pub target: f64,
    /// Estimate along the path with the largest error.
    pub estimate: f64,
    pub error: f64,
    pub converged: bool,
    pub passed: bool,
    /// Pass flag per aperture, in settings order.
    pub aperture_pass: Vec<bool>,
    pub excluded: Option<ExclusionReason>,
    /// Radial limit of `u` and its convergence flag.
    pub radial_limit: Option<(f64, bool)>,
    /// `(u(ζ + t·ν) − u(ζ))/t` at the smallest step.
    pub normal_quotient: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ResidualStats {
    pub max: f64,
    pub mean: f64,
    pub evaluated: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub per_vertex: Vec<VertexRecord>,
    pub pass_fraction: f64,
    /// Fraction of non-excluded vertices whose pass flag agrees across apertures.
    pub aperture_agreement: f64,
    /// Fraction of non-excluded vertices whose radial limit of `u` converged.
    pub radial_fraction: f64,
    /// Fraction of non-excluded vertices whose normal quotient is within `quotient_tol`.
    pub quotient_fraction: f64,
    /// Largest chord-recovery error, `None` if no chord fit in the domain.
    pub chord_error: Option<f64>,
    pub residual_stats: ResidualStats,
    /// Same grid with the `h²` stencil term cancelled.
    pub residual_extrapolated: ResidualStats,
    /// Total excluded arc length and the bound `2δ·(#jumps + #poles + 1)`.
    pub excluded_measure: f64,
    pub excluded_bound: f64,
    pub settings: VerifySettings,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn active(&self) -> impl Iterator<Item = &VertexRecord> {
        self.per_vertex.iter().filter(|r| r.excluded.is_none())
    }

    pub fn active_count(&self) -> usize {
        self.active().count()
    }

    /// Plain-text serialization: one record per line, then a summary block.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("angle,target,estimate,error,converged,excluded,reason\n");
        for r in &self.per_vertex {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{},{},{}",
                r.angle,
                r.target,
                r.estimate,
                r.error,
                r.converged,
                r.excluded.is_some(),
                r.excluded.map_or("-", ExclusionReason::as_str)
            );
        }
        out.push_str("# summary\n");
        let _ = writeln!(out, "vertices={}", self.per_vertex.len());
        let _ = writeln!(out, "active={}", self.active_count());
        let _ = writeln!(out, "pass_fraction={:.16e}", self.pass_fraction);
        let _ = writeln!(out, "aperture_agreement={:.16e}", self.aperture_agreement);
        let _ = writeln!(out, "radial_fraction={:.16e}", self.radial_fraction);
        let _ = writeln!(out, "quotient_fraction={:.16e}", self.quotient_fraction);
        match self.chord_error {
            Some(e) => {
                let _ = writeln!(out, "chord_error={e:.16e}");
            }
            None => out.push_str("chord_error=-\n"),
        }
        let _ = writeln!(out, "residual_max={:.16e}", self.residual_stats.max);
        let _ = writeln!(out, "residual_mean={:.16e}", self.residual_stats.mean);
        let _ = writeln!(out, "residual_skipped={}", self.residual_stats.skipped);
        let _ = writeln!(out, "residual_extrapolated_max={:.16e}", self.residual_extrapolated.max);
        let _ = writeln!(out, "excluded_measure={:.16e}", self.excluded_measure);
        let _ = writeln!(out, "excluded_bound={:.16e}", self.excluded_bound);
        let _ = writeln!(
            out,
            "settings={}",
            serde_json::to_string(&self.settings).expect("settings serialize")
        );
        for note in &self.notes {
            let _ = writeln!(out, "note={note}");
        }
        out
    }
}

/// Exceptional angles of a solution with their exclusion reasons.
fn exceptional(sol: &HarmonicSolution, nu: &DirectionField, phi: &BoundaryFunction) -> Vec<(f64, ExclusionReason)> {
    let rh = sol.rh();
    let cut = nu.cut();
    let mut out = Vec::new();
    for a in rh.alpha().discontinuities() {
        let reason = if circular_distance(a, cut) < ANGLE_EPS {
            ExclusionReason::Cut
        } else {
            ExclusionReason::Jump
        };
        out.push((a, reason));
    }
    out.push((cut, ExclusionReason::Cut));
    for a in phi.discontinuities().into_iter().chain(rh.psi().discontinuities()) {
        out.push((a, ExclusionReason::Jump));
    }
    for p in rh.hom_points() {
        out.push((p.arg().rem_euclid(TAU), ExclusionReason::HomPole));
    }
    out
}

/// Length of the union of the `δ`-arcs around the given angles.
fn union_measure(angles: &[f64], delta: f64) -> f64 {
    if angles.is_empty() {
        return 0.0;
    }
    if delta >= std::f64::consts::PI {
        return TAU;
    }
    let mut a: Vec<f64> = angles.iter().map(|x| x.rem_euclid(TAU)).collect();
    a.sort_by(f64::total_cmp);
    a.dedup_by(|x, y| (*x - *y).abs() < ANGLE_EPS);
    let mut total = 0.0;
    for k in 0..a.len() {
        let gap = if k + 1 < a.len() {
            a[k + 1] - a[k]
        } else {
            a[0] + TAU - a[k]
        };
        total += gap.min(2.0 * delta);
    }
    total.min(TAU)
}

/// Physical boundary point at the disk parameter `theta`.
fn boundary_point(sol: &HarmonicSolution, theta: f64) -> Complex64 {
    let z = Complex64::from_polar(1.0, theta);
    match sol.map() {
        None => z,
        Some(m) => m.omega(z),
    }
}

fn gauss_rule(n: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(n).expect("positive node count"));
    rule.as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect()
}

pub fn verify_solution(
    sol: &HarmonicSolution,
    nu: &DirectionField,
    phi: &BoundaryFunction,
    settings: &VerifySettings,
) -> Result<VerificationReport> {
    if settings.vertices < 8 {
        return Err(Error::Config(format!(
            "at least 8 vertices are required, got {}",
            settings.vertices
        )));
    }
    if settings.apertures.is_empty() {
        return Err(Error::Config("at least one aperture is required".into()));
    }
    if !(settings.tol > 0.0 && settings.delta >= 0.0) {
        return Err(Error::Config("tol must be positive and delta non-negative".into()));
    }
    if phi.len() != nu.len() {
        return Err(Error::Config(format!(
            "φ has {} nodes but ν has {}",
            phi.len(),
            nu.len()
        )));
    }
    let n = phi.len();
    let j_max = settings.probe_depth.unwrap_or_else(|| default_probe_depth(n));
    let exceptional = exceptional(sol, nu, phi);

    let mut records = Vec::with_capacity(settings.vertices);
    for v in 0..settings.vertices {
        let theta = node_angle(v, settings.vertices);
        let target = phi.real_value(theta);
        let excluded = exceptional
            .iter()
            .filter(|(a, _)| circular_distance(*a, theta) <= settings.delta)
            .min_by(|x, y| circular_distance(x.0, theta).total_cmp(&circular_distance(y.0, theta)))
            .map(|&(_, r)| r);
        let vertex = Complex64::from_polar(1.0, theta);
        let nu_value = nu.value(theta);
        let mut worst = (0.0, f64::NAN);
        let mut converged = true;
        let mut aperture_pass = Vec::with_capacity(settings.apertures.len());
        for &kappa in &settings.apertures {
            let path = StolzPath::new(vertex, kappa, 3, j_max)?;
            let est = nontangential_eval(
                |z| Ok(Complex64::new((nu_value * sol.f(z)).re, 0.0)),
                &path,
                settings.tol,
            )?;
            let err = (est.estimate.re - target).abs();
            aperture_pass.push(est.converged && err <= settings.tol);
            converged &= est.converged;
            if !(err <= worst.0) {
                worst = (err, est.estimate.re);
            }
        }
        let passed = aperture_pass.iter().all(|&p| p);
        let mut radial_limit = None;
        let mut normal_quotient = None;
        if excluded.is_none() {
            let path = StolzPath::new(vertex, 0.0, 3, j_max)?;
            let est = nontangential_eval(|z| Ok(Complex64::new(sol.u(z), 0.0)), &path, settings.tol)?;
            radial_limit = Some((est.estimate.re, est.converged));
            // one-sided quotient along ν from the boundary point, when ν points inward
            let w0 = boundary_point(sol, theta);
            let t = 2f64.powi(-(settings.quotient_depth as i32));
            if let Ok(u_t) = sol.u_at(w0 + nu_value * t) {
                normal_quotient = Some((u_t - est.estimate.re) / t);
            }
        }
        records.push(VertexRecord {
            angle: theta,
            target,
            estimate: worst.1,
            error: worst.0,
            converged,
            passed,
            aperture_pass,
            excluded,
            radial_limit,
            normal_quotient,
        });
    }

    let active: Vec<&VertexRecord> = records.iter().filter(|r| r.excluded.is_none()).collect();
    let fraction = |count: usize| {
        if active.is_empty() {
            0.0
        } else {
            count as f64 / active.len() as f64
        }
    };
    let pass_fraction = fraction(active.iter().filter(|r| r.passed).count());
    let aperture_agreement = fraction(
        active
            .iter()
            .filter(|r| r.aperture_pass.iter().all(|&p| p == r.aperture_pass[0]))
            .count(),
    );
    let radial_fraction = fraction(active.iter().filter(|r| r.radial_limit.is_some_and(|(_, c)| c)).count());
    let quotient_fraction = fraction(
        active
            .iter()
            .filter(|r| {
                r.normal_quotient
                    .is_some_and(|q| (q - r.target).abs() <= settings.quotient_tol)
            })
            .count(),
    );

    let angles: Vec<f64> = exceptional.iter().map(|e| e.0).collect();
    let excluded_measure = union_measure(&angles, settings.delta);
    let mut distinct = angles.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup_by(|a, b| (*a - *b).abs() < ANGLE_EPS);
    let excluded_bound = 2.0 * settings.delta * (distinct.len() as f64 + 1.0);

    let chord_error = chord_check(sol, nu, settings)?;
    let grid = square_grid(settings.residual_grid, settings.residual_radius);
    let residual_stats = solution_residual(sol, &grid, settings.residual_radius, settings.residual_step);
    let residual_extrapolated =
        solution_extrapolated_residual(sol, &grid, settings.residual_radius, settings.residual_step);

    let mut notes = sol.notes().to_vec();
    if sol.rh().clamped_samples() > 0 {
        notes.push(format!(
            "{} conjugate samples clamped at ±ln(1e12)",
            sol.rh().clamped_samples()
        ));
    }
    Ok(VerificationReport {
        per_vertex: records,
        pass_fraction,
        aperture_agreement,
        radial_fraction,
        quotient_fraction,
        chord_error,
        residual_stats,
        residual_extrapolated,
        excluded_measure,
        excluded_bound,
        settings: settings.clone(),
        notes,
    })
}

/// Line-integral recovery of `u` along chords in the direction `ν`:
/// `u(w₁) = u(w₀) + |w₁ − w₀| ∫₀¹ Re(e·f)(w₀ + τ(w₁ − w₀)) dτ` with `e` the unit
/// chord direction. Returns the largest discrepancy.
pub fn chord_check(sol: &HarmonicSolution, nu: &DirectionField, settings: &VerifySettings) -> Result<Option<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let rule = gauss_rule(48);
    let mut worst: Option<f64> = None;
    let mut done = 0;
    let mut attempts = 0;
    while done < settings.chords && attempts < 50 * settings.chords.max(1) {
        attempts += 1;
        let theta = rng.gen_range(0.0..TAU);
        let e = nu.value(theta);
        let w0 = match sol.map() {
            None => Complex64::from_polar(rng.gen_range(0.0..0.9), rng.gen_range(0.0..TAU)),
            Some(m) => m.omega(Complex64::from_polar(rng.gen_range(0.0..0.9), rng.gen_range(0.0..TAU))),
        };
        let length = rng.gen_range(0.05..0.8);
        let w1 = w0 + e * length;
        let inside = |w: Complex64| sol.to_disk(w).is_ok_and(|z| z.norm() <= 0.9);
        if !(inside(w0) && inside(w1) && inside(0.5 * (w0 + w1))) {
            continue;
        }
        let mut integral = 0.0;
        for &(tau, wt) in &rule {
            integral += wt * (e * sol.f_at(w0 + (w1 - w0) * tau)?).re;
        }
        let recovered = sol.u_at(w0)? + length * integral;
        let err = (recovered - sol.u_at(w1)?).abs();
        worst = Some(worst.map_or(err, |w: f64| w.max(err)));
        done += 1;
    }
    Ok(worst)
}

/// `m × m` grid on `[−r, r]²` (points outside the disk of radius `r` dropped).
pub fn square_grid(m: usize, r: f64) -> Vec<Complex64> {
    if m < 2 {
        return vec![Complex64::new(0.0, 0.0)];
    }
    let step = 2.0 * r / (m - 1) as f64;
    let mut out = Vec::with_capacity(m * m);
    for i in 0..m {
        for k in 0..m {
            let z = Complex64::new(-r + step * k as f64, -r + step * i as f64);
            if z.norm() <= r + 1e-12 {
                out.push(z);
            }
        }
    }
    out
}

/// Five-point Laplacian of `u` over the grid. Points whose stencil leaves the
/// domain (where `u` errors) are skipped and counted.
pub fn laplacian_residual<F>(u: F, grid: &[Complex64], h: f64) -> ResidualStats
where
    F: Fn(Complex64) -> Result<f64>,
{
    let mut stats = ResidualStats::default();
    let mut sum = 0.0;
    for &z in grid {
        let stencil = [
            u(z + h),
            u(z - h),
            u(z + Complex64::new(0.0, h)),
            u(z - Complex64::new(0.0, h)),
            u(z),
        ];
        if stencil.iter().any(|v| v.is_err()) {
            stats.skipped += 1;
            continue;
        }
        let v: Vec<f64> = stencil.into_iter().map(|v| v.unwrap()).collect();
        let r = ((v[0] + v[1] + v[2] + v[3] - 4.0 * v[4]) / (h * h)).abs();
        stats.max = stats.max.max(r);
        sum += r;
        stats.evaluated += 1;
    }
    if stats.evaluated > 0 {
        stats.mean = sum / stats.evaluated as f64;
    }
    stats
}

/// Five-point Laplacian at steps `h` and `h/2` combined as `(4Δ_{h/2} − Δ_h)/3`,
/// which cancels the `O(h²)` truncation term of the stencil.
pub fn extrapolated_laplacian_residual<F>(u: F, grid: &[Complex64], h: f64) -> ResidualStats
where
    F: Fn(Complex64) -> Result<f64>,
{
    let five_point = |z: Complex64, h: f64| -> Result<f64> {
        let s = u(z + h)? + u(z - h)? + u(z + Complex64::new(0.0, h))? + u(z - Complex64::new(0.0, h))?;
        Ok((s - 4.0 * u(z)?) / (h * h))
    };
    let mut stats = ResidualStats::default();
    let mut sum = 0.0;
    for &z in grid {
        match (five_point(z, h), five_point(z, 0.5 * h)) {
            (Ok(coarse), Ok(fine)) => {
                let r = ((4.0 * fine - coarse) / 3.0).abs();
                stats.max = stats.max.max(r);
                sum += r;
                stats.evaluated += 1;
            }
            _ => stats.skipped += 1,
        }
    }
    if stats.evaluated > 0 {
        stats.mean = sum / stats.evaluated as f64;
    }
    stats
}

/// Laplacian residual of a solution. On the disk the grid is used as is; on a
/// mapped domain it is carried to the domain by `ω`.
pub fn solution_residual(sol: &HarmonicSolution, grid: &[Complex64], radius: f64, h: f64) -> ResidualStats {
    on_solution(sol, grid, radius, 2.0 * h, |u, g| laplacian_residual(u, g, h))
}

/// As [`solution_residual`] with the extrapolated stencil.
pub fn solution_extrapolated_residual(
    sol: &HarmonicSolution,
    grid: &[Complex64],
    radius: f64,
    h: f64,
) -> ResidualStats {
    on_solution(sol, grid, radius, 2.0 * h, |u, g| {
        extrapolated_laplacian_residual(u, g, h)
    })
}

fn on_solution<R>(sol: &HarmonicSolution, grid: &[Complex64], radius: f64, margin: f64, residual: R) -> ResidualStats
where
    R: Fn(&dyn Fn(Complex64) -> Result<f64>, &[Complex64]) -> ResidualStats,
{
    let limit = radius + margin;
    match sol.map() {
        None => residual(
            &|z: Complex64| {
                if z.norm() <= limit {
                    Ok(sol.u(z))
                } else {
                    Err(Error::Domain("outside".into()))
                }
            },
            grid,
        ),
        Some(m) => {
            let physical: Vec<Complex64> = grid.iter().map(|&z| m.omega(z)).collect();
            residual(&|w: Complex64| sol.u_at(w), &physical)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionCertificate {
    pub sigma_min: f64,
    pub singular_values: Vec<f64>,
    pub members: usize,
    pub diagnostics: Vec<String>,
}

/// Smallest singular value of the row-normalized matrix of `u`-values
/// (rows = solutions, columns = sample points).
pub fn dimension_certificate(family: &[HarmonicSolution], points: &[Complex64]) -> Result<DimensionCertificate> {
    if family.is_empty() {
        return Err(Error::Config("empty family".into()));
    }
    if points.len() < 2 * family.len() {
        return Err(Error::Config(format!(
            "{} sample points for {} members; at least {} are needed",
            points.len(),
            family.len(),
            2 * family.len()
        )));
    }
    let mut matrix = DMatrix::<f64>::zeros(family.len(), points.len());
    let mut diagnostics = Vec::new();
    for (i, sol) in family.iter().enumerate() {
        for (k, &w) in points.iter().enumerate() {
            matrix[(i, k)] = sol.u_at(w)?;
        }
        let norm = matrix.row(i).norm();
        if norm == 0.0 || !norm.is_finite() {
            diagnostics.push(format!("member {i} vanishes at every sample point"));
        } else {
            matrix.row_mut(i).scale_mut(1.0 / norm);
        }
    }
    let mut singular_values: Vec<f64> = matrix.singular_values().iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let sigma_min = if diagnostics.is_empty() {
        *singular_values.last().unwrap_or(&0.0)
    } else {
        0.0
    };
    Ok(DimensionCertificate {
        sigma_min,
        singular_values,
        members: family.len(),
        diagnostics,
    })
}

/// `m` deterministic sample points on rings `0.3 ≤ |z| ≤ 0.8`, angles offset
/// from the given pole angles.
pub fn certificate_points(m: usize, poles: &[Complex64]) -> Vec<Complex64> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut out = Vec::with_capacity(m);
    let mut k = 0usize;
    while out.len() < m {
        let r = 0.3 + 0.5 * ((k % 7) as f64 / 6.0);
        let a = (k as f64 * golden).rem_euclid(TAU);
        k += 1;
        if poles.iter().any(|p| circular_distance(p.arg(), a) < 0.02) {
            continue;
        }
        out.push(Complex64::from_polar(r, a));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary_data::{Piece, ValueKind};
    use crate::direction_solver::DirectionalParams;
    use crate::neumann::{solve_neumann, Domain};

    fn cosine(n: usize) -> BoundaryFunction {
        BoundaryFunction::from_pieces(vec![Piece::new(0.0, TAU, "cos(theta)").unwrap()], ValueKind::Real, n).unwrap()
    }

    fn quick() -> VerifySettings {
        VerifySettings {
            vertices: 64,
            chords: 5,
            residual_grid: 11,
            ..Default::default()
        }
    }

    #[test]
    fn exact_solution_passes() {
        let n = 256;
        let phi = cosine(n);
        let nu = DirectionField::disk_inner_normal(n, 0.0).unwrap();
        let sol = solve_neumann(&phi, &Domain::Disk, 0.0, &DirectionalParams::default()).unwrap();
        let report = verify_solution(&sol, &nu, &phi, &quick()).unwrap();
        assert!(report.pass_fraction >= 0.99, "{}", report.pass_fraction);
        assert!(report.chord_error.unwrap() < 1e-9);
        assert!(report.residual_stats.max < 1e-6);
        assert_eq!(report.aperture_agreement, 1.0);
        assert!(report
            .per_vertex
            .iter()
            .filter(|r| r.excluded.is_some())
            .all(|r| r.excluded == Some(ExclusionReason::Cut)));
    }

    #[test]
    fn wrong_solution_rejected() {
        let n = 256;
        let nu = DirectionField::disk_inner_normal(n, 0.0).unwrap();
        let zero = solve_neumann(
            &BoundaryFunction::constant(0.0, n).unwrap(),
            &Domain::Disk,
            0.0,
            &DirectionalParams::default(),
        )
        .unwrap();
        let report = verify_solution(&zero, &nu, &cosine(n), &quick()).unwrap();
        assert!(report.pass_fraction <= 0.05);
    }

    #[test]
    fn too_few_vertices() {
        let nu = DirectionField::disk_inner_normal(64, 0.0).unwrap();
        let sol = solve_neumann(&cosine(64), &Domain::Disk, 0.0, &DirectionalParams::default()).unwrap();
        let settings = VerifySettings { vertices: 7, ..quick() };
        assert!(matches!(
            verify_solution(&sol, &nu, &cosine(64), &settings),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn laplacian_examples() {
        let grid = square_grid(11, 0.9);
        let harmonic = laplacian_residual(|z| Ok((z * z).re), &grid, 1e-3);
        assert!(harmonic.max < 1e-9);
        let square = laplacian_residual(|z| Ok(z.re * z.re), &grid, 1e-3);
        assert!((square.max - 2.0).abs() < 1e-5 && (square.mean - 2.0).abs() < 1e-5);
        let partial = laplacian_residual(
            |z| {
                if z.norm() < 0.5 {
                    Ok(z.re)
                } else {
                    Err(Error::Domain("out".into()))
                }
            },
            &grid,
            1e-3,
        );
        assert!(partial.skipped > 0 && partial.evaluated > 0);
    }

    #[test]
    fn union_of_arcs() {
        assert!((union_measure(&[0.0], 0.1) - 0.2).abs() < 1e-15);
        assert!((union_measure(&[0.0, 0.05], 0.1) - 0.25).abs() < 1e-15);
        assert!((union_measure(&[0.0, TAU - 0.05], 0.1) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn certificate_examples() {
        let n = 64;
        let sol = solve_neumann(&cosine(n), &Domain::Disk, 0.0, &DirectionalParams::default()).unwrap();
        let pts = certificate_points(16, &[]);
        let cert = dimension_certificate(&[sol.clone(), sol.with_shift(1.0)], &pts).unwrap();
        assert!(cert.sigma_min > 0.1);
        let dup = dimension_certificate(&[sol.clone(), sol.clone()], &pts).unwrap();
        assert!(dup.sigma_min < 1e-12);
        let zero = solve_neumann(
            &BoundaryFunction::constant(0.0, n).unwrap(),
            &Domain::Disk,
            0.0,
            &DirectionalParams::default(),
        )
        .unwrap();
        let z = dimension_certificate(&[sol, zero], &pts).unwrap();
        assert_eq!(z.sigma_min, 0.0);
        assert_eq!(z.diagnostics.len(), 1);
        assert!(dimension_certificate(&[], &pts).is_err());
    }

    #[test]
    fn report_text_is_deterministic() {
        let n = 128;
        let nu = DirectionField::disk_inner_normal(n, 0.0).unwrap();
        let sol = solve_neumann(&cosine(n), &Domain::Disk, 0.0, &DirectionalParams::default()).unwrap();
        let a = verify_solution(&sol, &nu, &cosine(n), &quick()).unwrap().to_text();
        let b = verify_solution(&sol, &nu, &cosine(n), &quick()).unwrap().to_text();
        assert_eq!(a, b);
        assert!(a.starts_with("angle,target,estimate,error,converged,excluded,reason\n"));
        assert!(a.contains("pass_fraction="));
    }
}
