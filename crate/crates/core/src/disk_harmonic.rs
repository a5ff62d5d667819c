//! Harmonic analysis on the unit disk: Schwarz and Poisson integrals, the
//! conjugate function, and nontangential limit estimation.
//!
//! Boundary data are split into a continuous remainder, handled spectrally
//! through the FFT of its node samples, plus one sawtooth per recorded jump,
//! handled in closed form. For a unit jump at `θ_k` the sawtooth
//! `s(θ) = (π − (θ − θ_k) mod 2π) / 2π` has
//!
//! ```text
//! S[s](z) = (i/π) · log(1 − z e^{−iθ_k}),     H[s](θ) = (1/π) · log|2 sin((θ − θ_k)/2)|
//! ```
//!
//! so jump discontinuities cost no spectral accuracy.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::boundary_data::{node_angle, BoundaryFunction, ValueKind, ANGLE_EPS};
use crate::error::{Error, Result};

/// Conjugate-function samples at log singularities are clamped to `±ln(1e12)`.
pub const CONJUGATE_CLAMP: f64 = 27.631_021_115_928_547;

/// An analytic function on the unit disk.
pub trait Analytic: Send + Sync {
    fn value(&self, z: Complex64) -> Complex64;
}

impl<F> Analytic for F
where
    F: Fn(Complex64) -> Complex64 + Send + Sync,
{
    fn value(&self, z: Complex64) -> Complex64 {
        self(z)
    }
}

/// `weight · log(1 − z e^{−i·angle})`, principal branch; analytic on the open disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogTerm {
    pub weight: Complex64,
    pub angle: f64,
}

impl LogTerm {
    fn value(&self, z: Complex64) -> Complex64 {
        let w = Complex64::from_polar(1.0, -self.angle);
        self.weight * (Complex64::new(1.0, 0.0) - z * w).ln()
    }

    fn derivative(&self, z: Complex64) -> Complex64 {
        let w = Complex64::from_polar(1.0, -self.angle);
        -self.weight * w / (Complex64::new(1.0, 0.0) - z * w)
    }
}

/// Truncated power series `Σ c_n z^n` plus closed-form logarithmic terms.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesEvaluator {
    coefficients: Vec<Complex64>,
    log_terms: Vec<LogTerm>,
    radius_cap: f64,
}

impl SeriesEvaluator {
    pub fn new(coefficients: Vec<Complex64>, radius_cap: f64) -> Result<Self> {
        Self::with_log_terms(coefficients, Vec::new(), radius_cap)
    }

    pub fn with_log_terms(coefficients: Vec<Complex64>, log_terms: Vec<LogTerm>, radius_cap: f64) -> Result<Self> {
        if coefficients.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Data("series coefficients must be finite".into()));
        }
        if log_terms
            .iter()
            .any(|t| !t.weight.re.is_finite() || !t.weight.im.is_finite())
        {
            return Err(Error::Data("log-term weights must be finite".into()));
        }
        if !(radius_cap > 0.0 && radius_cap < 1.0) {
            return Err(Error::Config(format!("radius cap {radius_cap} must lie in (0, 1)")));
        }
        Ok(SeriesEvaluator {
            coefficients,
            log_terms,
            radius_cap,
        })
    }

    pub fn zero() -> Self {
        SeriesEvaluator {
            coefficients: vec![Complex64::new(0.0, 0.0)],
            log_terms: Vec::new(),
            radius_cap: 0.99,
        }
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn log_terms(&self) -> &[LogTerm] {
        &self.log_terms
    }

    pub fn radius_cap(&self) -> f64 {
        self.radius_cap
    }

    pub fn value(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coefficients.iter().rev() {
            acc = acc * z + c;
        }
        for t in &self.log_terms {
            acc += t.value(z);
        }
        acc
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (n, c) in self.coefficients.iter().enumerate().skip(1).rev() {
            acc = acc * z + c * n as f64;
        }
        for t in &self.log_terms {
            acc += t.derivative(z);
        }
        acc
    }

    /// Evaluation restricted to the open disk; the flag reports `|z|` beyond the radius cap.
    pub fn checked_value(&self, z: Complex64) -> Result<(Complex64, bool)> {
        let r = z.norm();
        if r >= 1.0 {
            return Err(Error::Domain(format!("|z| = {r} is outside the open unit disk")));
        }
        Ok((self.value(z), r > self.radius_cap))
    }

    /// First `m` Taylor coefficients, log terms expanded.
    pub fn taylor_coefficients(&self, m: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); m];
        for (k, c) in self.coefficients.iter().enumerate().take(m) {
            out[k] = *c;
        }
        for t in &self.log_terms {
            for (k, slot) in out.iter_mut().enumerate().skip(1) {
                *slot -= t.weight * Complex64::from_polar(1.0, -(k as f64) * t.angle) / k as f64;
            }
        }
        out
    }

    /// Termwise antiderivative vanishing at 0. Only defined for pure power series.
    pub fn integrate(&self) -> Result<SeriesEvaluator> {
        if !self.log_terms.is_empty() {
            return Err(Error::Type(
                "termwise integration needs a pure power series; use Antiderivative".into(),
            ));
        }
        let mut out = Vec::with_capacity(self.coefficients.len() + 1);
        out.push(Complex64::new(0.0, 0.0));
        for (n, c) in self.coefficients.iter().enumerate() {
            out.push(c / (n + 1) as f64);
        }
        SeriesEvaluator::new(out, self.radius_cap)
    }

    /// Termwise derivative of a pure power series.
    pub fn differentiate(&self) -> Result<SeriesEvaluator> {
        if !self.log_terms.is_empty() {
            return Err(Error::Type("termwise differentiation needs a pure power series".into()));
        }
        let out: Vec<Complex64> = if self.coefficients.len() <= 1 {
            vec![Complex64::new(0.0, 0.0)]
        } else {
            self.coefficients
                .iter()
                .enumerate()
                .skip(1)
                .map(|(n, c)| c * n as f64)
                .collect()
        };
        SeriesEvaluator::new(out, self.radius_cap)
    }

    pub fn scaled(&self, factor: Complex64) -> SeriesEvaluator {
        SeriesEvaluator {
            coefficients: self.coefficients.iter().map(|c| c * factor).collect(),
            log_terms: self
                .log_terms
                .iter()
                .map(|t| LogTerm {
                    weight: t.weight * factor,
                    angle: t.angle,
                })
                .collect(),
            radius_cap: self.radius_cap,
        }
    }
}

impl Analytic for SeriesEvaluator {
    fn value(&self, z: Complex64) -> Complex64 {
        SeriesEvaluator::value(self, z)
    }
}

/// Default radius cap `1 − 8/N`.
pub fn default_radius_cap(n: usize) -> f64 {
    (1.0 - 8.0 / n as f64).max(0.5)
}

/// Unit sawtooth with jump +1 at `angle`, right-continuous.
pub(crate) fn sawtooth(theta: f64, angle: f64) -> f64 {
    let x = (theta - angle).rem_euclid(TAU);
    let x = if TAU - x < ANGLE_EPS || x < ANGLE_EPS { 0.0 } else { x };
    (PI - x) / TAU
}

/// `(1/π) log|2 sin((θ − angle)/2)|`, the conjugate of [`sawtooth`].
pub(crate) fn sawtooth_conjugate(theta: f64, angle: f64) -> f64 {
    ((2.0 * ((theta - angle) / 2.0).sin()).abs()).ln() / PI
}

fn require_real(mu: &BoundaryFunction, op: &str) -> Result<()> {
    if mu.kind() != ValueKind::Real {
        return Err(Error::Type(format!("{op} requires real-valued boundary data")));
    }
    Ok(())
}

/// Continuous remainder after removing the recorded jumps.
fn remainder_samples(mu: &BoundaryFunction) -> Vec<f64> {
    let n = mu.len();
    let mut r = mu.real_samples();
    for jump in mu.jumps() {
        for (j, v) in r.iter_mut().enumerate() {
            *v -= jump.size.re * sawtooth(node_angle(j, n), jump.angle);
        }
    }
    r
}

/// Discrete Fourier transform `X_k = Σ_j x_j e^{−2πijk/N}`.
fn forward_fft(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

fn inverse_fft(mut buf: Vec<Complex64>) -> Vec<Complex64> {
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_inverse(buf.len()).process(&mut buf);
    buf
}

fn trim_trailing(coefficients: &mut Vec<Complex64>) {
    let scale = coefficients.iter().map(|c| c.norm()).fold(1.0_f64, f64::max);
    let tol = 1e-15 * scale;
    while coefficients.len() > 1 && coefficients.last().is_some_and(|c| c.norm() <= tol) {
        coefficients.pop();
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SchwarzOptions {
    /// Fejér (Cesàro) damping of the spectral coefficients; diagnostics only.
    pub fejer: bool,
}

/// The Schwarz integral `S[μ]`: analytic, `Re S[μ]` is the Poisson extension of
/// `μ`, and `Im S[μ](0) = 0`. The spectral part keeps `n ≤ N/2 − 1`.
pub fn schwarz_integral(mu: &BoundaryFunction) -> Result<SeriesEvaluator> {
    schwarz_integral_with(mu, SchwarzOptions::default())
}

pub fn schwarz_integral_with(mu: &BoundaryFunction, options: SchwarzOptions) -> Result<SeriesEvaluator> {
    require_real(mu, "schwarz_integral")?;
    let n = mu.len();
    let half = n / 2;
    let spectrum = forward_fft(&remainder_samples(mu));
    let mut coefficients = Vec::with_capacity(half);
    coefficients.push(Complex64::new(spectrum[0].re / n as f64, 0.0));
    for (k, x) in spectrum.iter().enumerate().take(half).skip(1) {
        let damping = if options.fejer {
            1.0 - k as f64 / half as f64
        } else {
            1.0
        };
        coefficients.push(x * (2.0 * damping / n as f64));
    }
    trim_trailing(&mut coefficients);
    let log_terms = mu
        .jumps()
        .iter()
        .map(|j| LogTerm {
            weight: Complex64::new(0.0, j.size.re / PI),
            angle: j.angle,
        })
        .collect();
    SeriesEvaluator::with_log_terms(coefficients, log_terms, default_radius_cap(n))
}

/// Poisson integral of real `μ` at an interior point.
pub fn poisson_extend(mu: &BoundaryFunction, z: Complex64) -> Result<f64> {
    require_real(mu, "poisson_extend")?;
    if z.norm() >= 1.0 {
        return Err(Error::Domain(format!("|z| = {} is not inside the unit disk", z.norm())));
    }
    Ok(schwarz_integral(mu)?.value(z).re)
}

/// Conjugate function `H[μ]`, the boundary trace of `Im S[μ]`, at the nodes.
///
/// At a node that coincides with a jump of `μ` the conjugate is infinite; the
/// sample there is clamped to `±CONJUGATE_CLAMP`. Jump and singular angles of
/// `μ` are recorded as singular angles of the result.
pub fn conjugate_boundary(mu: &BoundaryFunction) -> Result<BoundaryFunction> {
    require_real(mu, "conjugate_boundary")?;
    let n = mu.len();
    let half = n / 2;
    let mut spectrum = forward_fft(&remainder_samples(mu));
    spectrum[0] = Complex64::new(0.0, 0.0);
    spectrum[half] = Complex64::new(0.0, 0.0);
    for (k, x) in spectrum.iter_mut().enumerate().skip(1) {
        // multiplier −i·sign(k)
        let sign = if k < half { 1.0 } else { -1.0 };
        *x = Complex64::new(x.im, -x.re) * sign / n as f64;
    }
    let spatial = inverse_fft(spectrum);
    let mut samples: Vec<Complex64> = spatial.iter().map(|v| Complex64::new(v.re, 0.0)).collect();
    for jump in mu.jumps() {
        let size = jump.size.re;
        for (j, s) in samples.iter_mut().enumerate() {
            let theta = node_angle(j, n);
            if (theta - jump.angle)
                .rem_euclid(TAU)
                .min((jump.angle - theta).rem_euclid(TAU))
                < ANGLE_EPS
            {
                // log|2 sin| → −∞ at the jump
                s.re += -size.signum() * CONJUGATE_CLAMP;
            } else {
                s.re += size * sawtooth_conjugate(theta, jump.angle);
            }
        }
    }
    for s in samples.iter_mut() {
        s.re = s.re.clamp(-CONJUGATE_CLAMP, CONJUGATE_CLAMP);
    }
    let singular = mu.discontinuities();
    BoundaryFunction::derived(samples, ValueKind::Real, Vec::new(), singular)
}

/// A dyadic approach path inside a Stolz angle at `vertex`:
/// `z_j = ζ · r_j · e^{iκ(1 − r_j)}` with `r_j = 1 − 2^{−j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StolzPath {
    vertex: Complex64,
    aperture: f64,
    j_min: u32,
    j_max: u32,
    radius_cap: Option<f64>,
}

/// Deepest probe exponent used by default at resolution `n`.
pub fn default_probe_depth(n: usize) -> u32 {
    (2 * n.trailing_zeros() + 4).min(40)
}

impl StolzPath {
    pub fn new(vertex: Complex64, aperture: f64, j_min: u32, j_max: u32) -> Result<Self> {
        if (vertex.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("path vertex {vertex} is not on the unit circle")));
        }
        if !aperture.is_finite() {
            return Err(Error::Config("aperture must be finite".into()));
        }
        if j_min == 0 || j_min > j_max || j_max > 48 {
            return Err(Error::Config(format!(
                "probe exponents must satisfy 1 ≤ {j_min} ≤ {j_max} ≤ 48"
            )));
        }
        Ok(StolzPath {
            vertex,
            aperture,
            j_min,
            j_max,
            radius_cap: None,
        })
    }

    /// Path with `j = 3 ..= default_probe_depth(n)`, flagged against the cap `1 − 8/n`.
    pub fn for_resolution(vertex: Complex64, aperture: f64, n: usize) -> Result<Self> {
        let mut p = Self::new(vertex, aperture, 3, default_probe_depth(n))?;
        p.radius_cap = Some(default_radius_cap(n));
        Ok(p)
    }

    pub fn with_radius_cap(mut self, cap: f64) -> Self {
        self.radius_cap = Some(cap);
        self
    }

    pub fn vertex(&self) -> Complex64 {
        self.vertex
    }

    pub fn aperture(&self) -> f64 {
        self.aperture
    }

    pub fn depth(&self) -> (u32, u32) {
        (self.j_min, self.j_max)
    }

    /// `C(κ) = 1 + |κ|`: every path point satisfies `|ζ − z| ≤ C(κ)(1 − |z|)`.
    pub fn aperture_constant(&self) -> f64 {
        1.0 + self.aperture.abs()
    }

    pub fn radii(&self) -> Vec<f64> {
        (self.j_min..=self.j_max)
            .map(|j| 1.0 - 2f64.powi(-(j as i32)))
            .collect()
    }

    pub fn points(&self) -> Vec<Complex64> {
        self.radii()
            .into_iter()
            .map(|r| self.vertex * r * Complex64::from_polar(1.0, self.aperture * (1.0 - r)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitDiagnostics {
    pub radii: Vec<f64>,
    pub values: Vec<Complex64>,
    pub differences: Vec<f64>,
    /// Number of probes beyond the radius cap.
    pub beyond_cap: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitEstimate {
    pub estimate: Complex64,
    pub converged: bool,
    pub diagnostics: LimitDiagnostics,
}

/// Convergence test on successive probe differences: the final difference is
/// below `tol` and the last three do not increase. Differences below
/// `tol·1e−3` count as settled.
pub(crate) fn differences_converged(differences: &[f64], tol: f64) -> bool {
    let k = differences.len();
    if k < 3 {
        return false;
    }
    let floor = tol * 1e-3;
    let last = &differences[k - 3..];
    let monotone = last.windows(2).all(|w| w[1] <= w[0] || w[1] <= floor);
    monotone && last[2] < tol
}

/// Estimates `lim h(z)` as `z → ζ` along `path`; the estimate is the deepest probe.
pub fn nontangential_eval<F>(mut h: F, path: &StolzPath, tol: f64) -> Result<LimitEstimate>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let points = path.points();
    let mut values = Vec::with_capacity(points.len());
    for &z in &points {
        let v = h(z).map_err(|e| Error::Evaluation {
            point: z,
            message: e.to_string(),
        })?;
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Evaluation {
                point: z,
                message: format!("non-finite value {v}"),
            });
        }
        values.push(v);
    }
    let differences: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let converged = differences_converged(&differences, tol);
    let beyond_cap = match path.radius_cap {
        Some(cap) => points.iter().filter(|z| z.norm() > cap).count(),
        None => 0,
    };
    Ok(LimitEstimate {
        estimate: *values.last().expect("path has at least one point"),
        converged,
        diagnostics: LimitDiagnostics {
            radii: path.radii(),
            values,
            differences,
            beyond_cap,
        },
    })
}
