//! Boundary functions on the unit circle.
//!
//! A [`BoundaryFunction`] is a concrete representative of a measurable
//! function on the circle: an exact representation (piecewise expressions,
//! a closure, or a reparametrized composition) together with its values at
//! the uniform nodes `θ_j = 2πj/N` and the list of its jump discontinuities.
//! At a node that coincides with a jump the right-hand value is used.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::Expr;

/// Smallest admissible node count.
pub const MIN_NODES: usize = 16;

/// Tolerance used when comparing angles.
pub(crate) const ANGLE_EPS: f64 = 1e-12;

/// Tolerance on `|ν| = 1` at the sample nodes.
pub const UNIT_MODULUS_TOL: f64 = 1e-12;

pub fn node_angle(j: usize, n: usize) -> f64 {
    TAU * j as f64 / n as f64
}

pub fn check_node_count(n: usize) -> Result<()> {
    if n < MIN_NODES || !n.is_power_of_two() {
        return Err(Error::Config(format!(
            "node count N = {n} must be a power of two and at least {MIN_NODES}"
        )));
    }
    Ok(())
}

/// Distance between two angles measured along the circle.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Real,
    Complex,
}

/// One smooth piece on the half-open interval `[from, to)`.
#[derive(Debug, Clone)]
pub struct Piece {
    pub from: f64,
    pub to: f64,
    pub expr: Expr,
}

impl Piece {
    pub fn new(from: f64, to: f64, expr: &str) -> Result<Self> {
        Ok(Piece {
            from,
            to,
            expr: Expr::parse(expr)?,
        })
    }
}

/// A jump discontinuity: `size` is the right limit minus the left limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub angle: f64,
    pub size: Complex64,
}

/// Input accepted by [`build_boundary_function`].
#[derive(Debug, Clone)]
pub enum BoundarySpec {
    Pieces(Vec<Piece>),
    Samples(Vec<f64>),
}

type AngleFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;
type Reparam = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Repr {
    Pieces(Arc<[Piece]>),
    Closure(AngleFn),
    Composed {
        outer: Arc<BoundaryFunction>,
        reparam: Reparam,
    },
    Samples,
}

#[derive(Clone)]
pub struct BoundaryFunction {
    repr: Repr,
    kind: ValueKind,
    samples: Vec<Complex64>,
    jumps: Vec<Jump>,
    singularities: Vec<f64>,
}

impl fmt::Debug for BoundaryFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let repr = match &self.repr {
            Repr::Pieces(p) => format!("pieces({})", p.len()),
            Repr::Closure(_) => "closure".to_string(),
            Repr::Composed { .. } => "composed".to_string(),
            Repr::Samples => "samples".to_string(),
        };
        f.debug_struct("BoundaryFunction")
            .field("repr", &repr)
            .field("kind", &self.kind)
            .field("n", &self.samples.len())
            .field("jumps", &self.jumps)
            .field("singularities", &self.singularities)
            .finish()
    }
}

/// Builds a boundary function from a piecewise description or a raw sample array.
pub fn build_boundary_function(spec: BoundarySpec, n: usize) -> Result<BoundaryFunction> {
    match spec {
        BoundarySpec::Pieces(pieces) => BoundaryFunction::from_pieces(pieces, ValueKind::Real, n),
        BoundarySpec::Samples(values) => {
            if values.len() != n {
                return Err(Error::Config(format!(
                    "sample array has {} entries but N = {n}",
                    values.len()
                )));
            }
            BoundaryFunction::from_samples(values)
        }
    }
}

fn validate_partition(pieces: &mut [Piece]) -> Result<()> {
    if pieces.is_empty() {
        return Err(Error::Config("piecewise description has no pieces".into()));
    }
    for p in pieces.iter() {
        if !p.from.is_finite() || !p.to.is_finite() {
            return Err(Error::Config("piece endpoints must be finite".into()));
        }
        if p.to <= p.from {
            return Err(Error::Config(format!(
                "piece [{}, {}) is empty or reversed",
                p.from, p.to
            )));
        }
    }
    pieces.sort_by(|a, b| a.from.total_cmp(&b.from));
    if pieces[0].from.abs() > ANGLE_EPS {
        return Err(Error::Config(format!(
            "pieces must start at 0, first piece starts at {}",
            pieces[0].from
        )));
    }
    pieces[0].from = 0.0;
    for k in 1..pieces.len() {
        let gap = pieces[k].from - pieces[k - 1].to;
        if gap > ANGLE_EPS {
            return Err(Error::Config(format!(
                "gap between {} and {}",
                pieces[k - 1].to,
                pieces[k].from
            )));
        }
        if gap < -ANGLE_EPS {
            return Err(Error::Config(format!(
                "pieces overlap on [{}, {})",
                pieces[k].from,
                pieces[k - 1].to
            )));
        }
        pieces[k].from = pieces[k - 1].to;
    }
    let last = pieces.len() - 1;
    if (pieces[last].to - TAU).abs() > ANGLE_EPS {
        return Err(Error::Config(format!(
            "pieces must end at 2π, last piece ends at {}",
            pieces[last].to
        )));
    }
    pieces[last].to = TAU;
    Ok(())
}

fn piece_index_right(pieces: &[Piece], theta: f64) -> usize {
    // last piece with from <= theta
    match pieces.binary_search_by(|p| p.from.total_cmp(&theta)) {
        Ok(k) => k,
        Err(k) => k.saturating_sub(1),
    }
}

fn jump_is_significant(left: Complex64, right: Complex64) -> bool {
    (right - left).norm() > 1e-10 * (1.0 + left.norm().max(right.norm()))
}

fn check_finite(samples: &[Complex64]) -> Result<()> {
    for (j, v) in samples.iter().enumerate() {
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Data(format!("non-finite sample {v} at node {j}")));
        }
    }
    Ok(())
}

impl BoundaryFunction {
    /// Piecewise-expression representative. Intervals must partition `[0, 2π)`.
    pub fn from_pieces(mut pieces: Vec<Piece>, kind: ValueKind, n: usize) -> Result<Self> {
        check_node_count(n)?;
        validate_partition(&mut pieces)?;
        let mut jumps = Vec::new();
        for k in 0..pieces.len() {
            let prev = if k == 0 { pieces.len() - 1 } else { k - 1 };
            let right = pieces[k].expr.eval(pieces[k].from);
            let left = pieces[prev].expr.eval(pieces[prev].to);
            if jump_is_significant(left, right) {
                jumps.push(Jump {
                    angle: pieces[k].from,
                    size: right - left,
                });
            }
        }
        let repr = Repr::Pieces(pieces.into());
        Self::from_repr(repr, kind, n, jumps)
    }

    /// Smooth representative given by a closure; no jumps are recorded.
    pub fn from_fn<F>(f: F, kind: ValueKind, n: usize) -> Result<Self>
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        check_node_count(n)?;
        Self::from_repr(Repr::Closure(Arc::new(f)), kind, n, Vec::new())
    }

    /// Real sample-array representative; off-node values interpolate linearly.
    pub fn from_samples(values: Vec<f64>) -> Result<Self> {
        check_node_count(values.len())?;
        let samples: Vec<Complex64> = values.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        check_finite(&samples)?;
        Ok(BoundaryFunction {
            repr: Repr::Samples,
            kind: ValueKind::Real,
            samples,
            jumps: Vec::new(),
            singularities: Vec::new(),
        })
    }

    pub fn from_complex_samples(samples: Vec<Complex64>) -> Result<Self> {
        check_node_count(samples.len())?;
        check_finite(&samples)?;
        Ok(BoundaryFunction {
            repr: Repr::Samples,
            kind: ValueKind::Complex,
            samples,
            jumps: Vec::new(),
            singularities: Vec::new(),
        })
    }

    pub fn constant(value: f64, n: usize) -> Result<Self> {
        Self::from_fn(move |_| Complex64::new(value, 0.0), ValueKind::Real, n)
    }

    /// Sample-only function produced by a computation (argument, conjugate, weight).
    pub(crate) fn derived(
        samples: Vec<Complex64>,
        kind: ValueKind,
        mut jumps: Vec<Jump>,
        mut singularities: Vec<f64>,
    ) -> Result<Self> {
        check_node_count(samples.len())?;
        check_finite(&samples)?;
        jumps.sort_by(|a, b| a.angle.total_cmp(&b.angle));
        singularities.sort_by(f64::total_cmp);
        singularities.dedup_by(|a, b| (*a - *b).abs() < ANGLE_EPS);
        Ok(BoundaryFunction {
            repr: Repr::Samples,
            kind,
            samples,
            jumps,
            singularities,
        })
    }

    /// `t ↦ outer(reparam(t))` for an increasing reparametrization with
    /// `reparam(t + 2π) = reparam(t) + 2π`. `jump_params` are the parameters
    /// `t_k` with `reparam(t_k)` equal to the jump angles of `outer`.
    pub fn compose(outer: Arc<BoundaryFunction>, reparam: Reparam, jump_params: &[f64], n: usize) -> Result<Self> {
        check_node_count(n)?;
        let mut jumps = Vec::with_capacity(jump_params.len());
        for &t in jump_params {
            let a = reparam(t);
            let right = outer.value(a);
            let left = outer.left_limit(a);
            if jump_is_significant(left, right) {
                jumps.push(Jump {
                    angle: normalize_angle(t),
                    size: right - left,
                });
            }
        }
        jumps.sort_by(|a, b| a.angle.total_cmp(&b.angle));
        let kind = outer.kind;
        Self::from_repr(Repr::Composed { outer, reparam }, kind, n, jumps)
    }

    fn from_repr(repr: Repr, kind: ValueKind, n: usize, jumps: Vec<Jump>) -> Result<Self> {
        let mut f = BoundaryFunction {
            repr,
            kind,
            samples: Vec::new(),
            jumps,
            singularities: Vec::new(),
        };
        let mut samples = Vec::with_capacity(n);
        for j in 0..n {
            samples.push(f.raw_value(node_angle(j, n)));
        }
        check_finite(&samples)?;
        if kind == ValueKind::Real {
            for (j, v) in samples.iter_mut().enumerate() {
                if v.im.abs() > 1e-12 * (1.0 + v.re.abs()) {
                    return Err(Error::Type(format!(
                        "real-valued boundary function has complex value {v} at node {j}"
                    )));
                }
                v.im = 0.0;
            }
            for jump in f.jumps.iter_mut() {
                jump.size.im = 0.0;
            }
        }
        f.samples = samples;
        Ok(f)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    pub fn is_real(&self) -> bool {
        self.kind == ValueKind::Real
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn real_samples(&self) -> Vec<f64> {
        self.samples.iter().map(|v| v.re).collect()
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    /// Angles where the function is unbounded (log-type singularities).
    pub fn singularities(&self) -> &[f64] {
        &self.singularities
    }

    /// Sorted union of jump angles and singular angles.
    pub fn discontinuities(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.jumps.iter().map(|j| j.angle).collect();
        out.extend_from_slice(&self.singularities);
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() < ANGLE_EPS);
        out
    }

    pub fn node(&self, j: usize) -> f64 {
        node_angle(j, self.samples.len())
    }

    /// Value of the representative at an arbitrary angle (right-continuous at jumps).
    pub fn value(&self, theta: f64) -> Complex64 {
        let theta = normalize_angle(theta);
        self.project(self.raw_value(theta))
    }

    fn raw_value(&self, theta: f64) -> Complex64 {
        match &self.repr {
            Repr::Pieces(pieces) => pieces[piece_index_right(pieces, theta)].expr.eval(theta),
            Repr::Closure(f) => f(theta),
            Repr::Composed { outer, reparam } => outer.value(reparam(theta)),
            Repr::Samples => self.interpolate(theta),
        }
    }

    /// Limit from the left at `theta`.
    pub fn left_limit(&self, theta: f64) -> Complex64 {
        let theta = normalize_angle(theta);
        let v = match &self.repr {
            Repr::Pieces(pieces) => {
                if theta == 0.0 {
                    let last = &pieces[pieces.len() - 1];
                    last.expr.eval(last.to)
                } else {
                    // piece with from < theta <= to
                    let k = pieces
                        .iter()
                        .position(|p| p.from < theta && theta <= p.to)
                        .unwrap_or(pieces.len() - 1);
                    pieces[k].expr.eval(theta)
                }
            }
            Repr::Closure(f) => f(theta),
            Repr::Composed { outer, reparam } => outer.left_limit(reparam(theta)),
            Repr::Samples => self.interpolate(theta),
        };
        self.project(v)
    }

    pub fn real_value(&self, theta: f64) -> f64 {
        self.value(theta).re
    }

    fn project(&self, v: Complex64) -> Complex64 {
        match self.kind {
            ValueKind::Real => Complex64::new(v.re, 0.0),
            ValueKind::Complex => v,
        }
    }

    fn interpolate(&self, theta: f64) -> Complex64 {
        let n = self.samples.len();
        let x = theta / TAU * n as f64;
        let j = (x.floor() as usize).min(n - 1);
        let w = x - j as f64;
        let a = self.samples[j];
        let b = self.samples[(j + 1) % n];
        a + (b - a) * w
    }

    /// Re-evaluates the representative on `n` nodes.
    pub fn resample(&self, n: usize) -> Result<Self> {
        check_node_count(n)?;
        if matches!(self.repr, Repr::Samples) {
            return Err(Error::Config(
                "sample-only boundary functions cannot be resampled".into(),
            ));
        }
        let mut out = Self::from_repr(self.repr.clone(), self.kind, n, self.jumps.clone())?;
        out.singularities = self.singularities.clone();
        Ok(out)
    }

    /// Mean value over the circle (trapezoid rule on the nodes).
    pub fn mean(&self) -> Complex64 {
        self.samples.iter().sum::<Complex64>() / self.samples.len() as f64
    }

    pub(crate) fn check_same_nodes(&self, other: &BoundaryFunction) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::Config(format!(
                "node counts differ: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        Ok(())
    }
}

/// Unit-modulus complex boundary function with a branch cut for its argument.
#[derive(Debug, Clone)]
pub struct DirectionField {
    base: BoundaryFunction,
    cut: f64,
}

impl DirectionField {
    pub fn new(base: BoundaryFunction, cut: f64) -> Result<Self> {
        if !(0.0..TAU).contains(&cut) {
            return Err(Error::Config(format!("cut {cut} must lie in [0, 2π)")));
        }
        let base = if base.kind == ValueKind::Real {
            BoundaryFunction {
                kind: ValueKind::Complex,
                ..base
            }
        } else {
            base
        };
        for (j, v) in base.samples.iter().enumerate() {
            let dev = (v.norm() - 1.0).abs();
            if dev > UNIT_MODULUS_TOL {
                return Err(Error::Invariant(format!(
                    "direction field has |ν| = {} at node {j}",
                    v.norm()
                )));
            }
        }
        Ok(DirectionField { base, cut })
    }

    pub fn from_expr(expr: &str, n: usize, cut: f64) -> Result<Self> {
        let piece = Piece::new(0.0, TAU, expr)?;
        Self::new(BoundaryFunction::from_pieces(vec![piece], ValueKind::Complex, n)?, cut)
    }

    pub fn constant(value: Complex64, n: usize, cut: f64) -> Result<Self> {
        Self::new(BoundaryFunction::from_fn(move |_| value, ValueKind::Complex, n)?, cut)
    }

    /// Inward unit normal of the unit circle, `ν(θ) = −e^{iθ}`.
    pub fn disk_inner_normal(n: usize, cut: f64) -> Result<Self> {
        Self::new(
            BoundaryFunction::from_fn(|t| -Complex64::from_polar(1.0, t), ValueKind::Complex, n)?,
            cut,
        )
    }

    pub fn base(&self) -> &BoundaryFunction {
        &self.base
    }

    pub fn cut(&self) -> f64 {
        self.cut
    }

    pub fn with_cut(&self, cut: f64) -> Result<Self> {
        Self::new(self.base.clone(), cut)
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn value(&self, theta: f64) -> Complex64 {
        self.base.value(theta)
    }

    pub fn left_limit(&self, theta: f64) -> Complex64 {
        self.base.left_limit(theta)
    }
}

/// Principal argument in `[−π, π)`.
fn arg_lower(v: Complex64) -> f64 {
    let a = v.arg();
    if a >= PI {
        a - TAU
    } else {
        a
    }
}

/// A real argument function `α` with `e^{iα} = ν` at every node.
///
/// The lift starts at the cut with the principal value in `[−π, π)` and is
/// continued continuously around the circle, crossing jumps of `ν` through
/// their one-sided limits. The resulting `α` is continuous away from the jumps
/// of `ν` and the cut; its jump at the cut is `−2π` times the winding number of
/// `ν` (plus any jump `ν` itself has there).
pub fn measurable_arg(nu: &DirectionField) -> Result<BoundaryFunction> {
    let n = nu.len();
    let samples = nu.base.samples();
    for (j, v) in samples.iter().enumerate() {
        if (v.norm() - 1.0).abs() > UNIT_MODULUS_TOL {
            return Err(Error::Invariant(format!("|ν| = {} at node {j}", v.norm())));
        }
    }
    let cut = normalize_angle(nu.cut);

    #[derive(Clone, Copy)]
    enum Event {
        Jump(f64),
        Node(usize),
    }
    let offset = |a: f64| {
        let d = (a - cut).rem_euclid(TAU);
        if d < ANGLE_EPS || TAU - d < ANGLE_EPS {
            0.0
        } else {
            d
        }
    };
    let mut events: Vec<(f64, u8, Event)> = Vec::with_capacity(n + nu.base.jumps.len());
    for j in 0..n {
        events.push((offset(node_angle(j, n)), 1, Event::Node(j)));
    }
    for jump in &nu.base.jumps {
        let d = offset(jump.angle);
        if d > 0.0 {
            events.push((d, 0, Event::Jump(jump.angle)));
        }
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let start = nu.value(cut);
    let start_angle = arg_lower(start);
    let mut current = start_angle;
    let mut current_value = start;
    let mut alpha = vec![Complex64::new(0.0, 0.0); n];
    let mut jumps = Vec::new();
    for &(_, _, event) in &events {
        match event {
            Event::Node(j) => {
                let v = samples[j];
                current += (v / current_value).arg();
                current_value = v;
                alpha[j] = Complex64::new(current, 0.0);
            }
            Event::Jump(a) => {
                let left_value = nu.left_limit(a);
                let right_value = nu.value(a);
                let left = current + (left_value / current_value).arg();
                let right = left + (right_value / left_value).arg();
                if (right - left).abs() > 1e-12 {
                    jumps.push(Jump {
                        angle: a,
                        size: Complex64::new(right - left, 0.0),
                    });
                }
                current = right;
                current_value = right_value;
            }
        }
    }
    let end_left = current + (nu.left_limit(cut) / current_value).arg();
    let cut_jump = start_angle - end_left;
    if cut_jump.abs() > 1e-9 {
        jumps.push(Jump {
            angle: cut,
            size: Complex64::new(cut_jump, 0.0),
        });
    }
    BoundaryFunction::derived(alpha, ValueKind::Real, jumps, Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn pieces(spec: &[(f64, f64, &str)]) -> Vec<Piece> {
        spec.iter().map(|&(a, b, e)| Piece::new(a, b, e).unwrap()).collect()
    }

    #[test]
    fn constant_samples() {
        let f = build_boundary_function(BoundarySpec::Pieces(pieces(&[(0.0, TAU, "1")])), 16).unwrap();
        assert!(f.real_samples().iter().all(|&v| v == 1.0));
        assert!(f.jumps().is_empty());
    }

    #[test]
    fn cosine_at_eighth_roots() {
        // N = 8 is below the working minimum; sample the representative directly.
        let f = BoundaryFunction::from_pieces(pieces(&[(0.0, TAU, "cos(theta)")]), ValueKind::Real, 16).unwrap();
        let expected = [
            1.0,
            FRAC_1_SQRT_2,
            0.0,
            -FRAC_1_SQRT_2,
            -1.0,
            -FRAC_1_SQRT_2,
            0.0,
            FRAC_1_SQRT_2,
        ];
        for (k, e) in expected.iter().enumerate() {
            assert!((f.real_value(node_angle(k, 8)) - e).abs() < 1e-15);
            assert!((f.real_samples()[2 * k] - e).abs() < 1e-15);
        }
        assert!(f.jumps().is_empty());
    }

    #[test]
    fn step_uses_right_piece_at_jumps() {
        let f = BoundaryFunction::from_pieces(pieces(&[(0.0, PI, "1"), (PI, TAU, "0")]), ValueKind::Real, 16).unwrap();
        let angles: Vec<f64> = f.jumps().iter().map(|j| j.angle).collect();
        assert_eq!(angles, vec![0.0, PI]);
        assert_eq!(f.jumps()[0].size.re, 1.0);
        assert_eq!(f.jumps()[1].size.re, -1.0);
        let s = f.real_samples();
        for k in 0..8 {
            let expected = if k < 4 { 1.0 } else { 0.0 };
            assert_eq!(s[2 * k], expected);
            assert_eq!(f.real_value(node_angle(k, 8)), expected);
        }
        assert_eq!(f.left_limit(PI).re, 1.0);
        assert_eq!(f.left_limit(0.0).re, 0.0);
    }

    #[test]
    fn sawtooth_has_single_jump() {
        let f = BoundaryFunction::from_pieces(pieces(&[(0.0, TAU, "theta - pi")]), ValueKind::Real, 32).unwrap();
        assert_eq!(f.jumps().len(), 1);
        assert_eq!(f.jumps()[0].angle, 0.0);
        assert!((f.jumps()[0].size.re + TAU).abs() < 1e-14);
    }

    #[test]
    fn partition_errors() {
        let gap = BoundaryFunction::from_pieces(pieces(&[(0.0, 1.0, "1"), (1.5, TAU, "0")]), ValueKind::Real, 16);
        assert!(matches!(gap, Err(Error::Config(_))));
        let overlap = BoundaryFunction::from_pieces(pieces(&[(0.0, 2.0, "1"), (1.5, TAU, "0")]), ValueKind::Real, 16);
        assert!(matches!(overlap, Err(Error::Config(_))));
        let short = BoundaryFunction::from_pieces(pieces(&[(0.0, 6.0, "1")]), ValueKind::Real, 16);
        assert!(matches!(short, Err(Error::Config(_))));
        let bad_n = BoundaryFunction::from_pieces(pieces(&[(0.0, TAU, "1")]), ValueKind::Real, 100);
        assert!(matches!(bad_n, Err(Error::Config(_))));
    }

    #[test]
    fn non_finite_samples_rejected() {
        let mut v = vec![0.0; 16];
        v[3] = f64::NAN;
        assert!(matches!(BoundaryFunction::from_samples(v), Err(Error::Data(_))));
        let f = BoundaryFunction::from_pieces(pieces(&[(0.0, TAU, "1/(theta - pi)")]), ValueKind::Real, 16);
        assert!(matches!(f, Err(Error::Data(_))));
    }

    #[test]
    fn complex_values_rejected_for_real_kind() {
        let f = BoundaryFunction::from_pieces(pieces(&[(0.0, TAU, "exp(i*theta)")]), ValueKind::Real, 16);
        assert!(matches!(f, Err(Error::Type(_))));
    }

    #[test]
    fn direction_field_unit_modulus() {
        assert!(DirectionField::from_expr("2*exp(i*theta)", 16, 0.0).is_err());
        assert!(DirectionField::from_expr("exp(i*theta)", 16, 0.0).is_ok());
        assert!(DirectionField::constant(Complex64::new(1.0, 0.0), 16, TAU).is_err());
    }

    #[test]
    fn arg_of_constant_fields() {
        let one = DirectionField::constant(Complex64::new(1.0, 0.0), 16, 0.0).unwrap();
        let a = measurable_arg(&one).unwrap();
        assert!(a.real_samples().iter().all(|&v| v == 0.0));
        assert!(a.jumps().is_empty());

        let i = DirectionField::constant(Complex64::i(), 16, 0.0).unwrap();
        let a = measurable_arg(&i).unwrap();
        assert!(a.real_samples().iter().all(|&v| (v - PI / 2.0).abs() < 1e-15));
    }

    #[test]
    fn arg_of_disk_normal() {
        let n = 64;
        let nu = DirectionField::disk_inner_normal(n, 0.0).unwrap();
        let a = measurable_arg(&nu).unwrap();
        for (j, &v) in a.real_samples().iter().enumerate() {
            let theta = node_angle(j, n);
            assert!((v - (theta - PI)).abs() < 1e-13, "node {j}: {v}");
            let back = Complex64::new(0.0, v).exp();
            assert!((back - nu.base().samples()[j]).norm() < 1e-12);
        }
        assert_eq!(a.jumps().len(), 1);
        assert!((a.jumps()[0].size.re + TAU).abs() < 1e-12);
    }

    #[test]
    fn arg_crosses_direction_jumps() {
        let n = 64;
        let base = BoundaryFunction::from_pieces(
            pieces(&[
                (0.0, 1.0, "exp(i*0.3)"),
                (1.0, 4.0, "exp(i*2.5)"),
                (4.0, TAU, "exp(i*0.3)"),
            ]),
            ValueKind::Complex,
            n,
        )
        .unwrap();
        let nu = DirectionField::new(base, 0.0).unwrap();
        let a = measurable_arg(&nu).unwrap();
        for (j, &v) in a.real_samples().iter().enumerate() {
            let back = Complex64::new(0.0, v).exp();
            assert!((back - nu.base().samples()[j]).norm() < 1e-12);
        }
        let total: f64 = a.jumps().iter().map(|j| j.size.re).sum();
        assert!(total.abs() < 1e-12, "winding zero field: jumps sum to {total}");
        assert_eq!(a.jumps().len(), 2);
    }

    #[test]
    fn resample_doubles_nodes() {
        let f = BoundaryFunction::from_pieces(
            pieces(&[(0.0, 2.0, "exp(cos(theta))"), (2.0, TAU, "theta^2")]),
            ValueKind::Real,
            64,
        )
        .unwrap();
        let g = f.resample(128).unwrap();
        for j in 0..64 {
            assert_eq!(f.samples()[j], g.samples()[2 * j]);
        }
    }
}
