//! Fixed quadrature rules for line integrals of analytic functions.
//!
//! [`RayRule`] is a composite Gauss–Legendre rule on `[0, 1]` whose panels are
//! graded geometrically toward `t = 1`. For a fixed rule the nodes and weights
//! do not depend on the endpoint, so `F(z) = z · Σ w_k f(t_k z)` is an analytic
//! function of `z`. The grading depth is chosen from `|z|` on the dyadic shells
//! `1 − 2^{−k} ≤ |z| < 1 − 2^{−k−1}`; across a shell boundary `F` changes by the
//! quadrature error only.

use std::num::NonZeroUsize;
use std::sync::Arc;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

use crate::disk_harmonic::{Analytic, SeriesEvaluator};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureParams {
    /// Gauss–Legendre nodes per panel.
    pub nodes_per_panel: usize,
    /// Number of dyadic panels `[1 − 2^{−k+1}, 1 − 2^{−k}]` before the final one.
    pub graded_panels: usize,
}

impl Default for QuadratureParams {
    fn default() -> Self {
        QuadratureParams {
            nodes_per_panel: 12,
            graded_panels: 24,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RayRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    params: QuadratureParams,
}

impl RayRule {
    pub fn new(params: QuadratureParams) -> Result<Self> {
        let Some(degree) = NonZeroUsize::new(params.nodes_per_panel) else {
            return Err(Error::Config("quadrature needs at least one node per panel".into()));
        };
        if params.graded_panels > 50 {
            return Err(Error::Config("at most 50 graded panels are supported".into()));
        }
        let gauss = GaussLegendre::new(degree);
        let mut breaks = vec![0.0];
        for k in 1..=params.graded_panels {
            breaks.push(1.0 - 2f64.powi(-(k as i32)));
        }
        breaks.push(1.0);
        let mut nodes = Vec::with_capacity((breaks.len() - 1) * params.nodes_per_panel);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            for &(x, wt) in gauss.as_node_weight_pairs() {
                nodes.push(0.5 * (b - a) * x + 0.5 * (b + a));
                weights.push(0.5 * (b - a) * wt);
            }
        }
        Ok(RayRule { nodes, weights, params })
    }

    /// Plain (ungraded) Gauss–Legendre rule on `[0, 1]`.
    pub fn uniform(nodes: usize) -> Result<Self> {
        let Some(degree) = NonZeroUsize::new(nodes) else {
            return Err(Error::Config("quadrature needs at least one node".into()));
        };
        let gauss = GaussLegendre::new(degree);
        let (nodes, weights) = gauss
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (0.5 * x + 0.5, 0.5 * w))
            .unzip();
        Ok(RayRule {
            nodes,
            weights,
            params: QuadratureParams {
                nodes_per_panel: degree.get(),
                graded_panels: 0,
            },
        })
    }

    pub fn params(&self) -> QuadratureParams {
        self.params
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `∫_a^b f(w) dw` along the straight segment, graded toward `b`.
    pub fn segment<F>(&self, a: Complex64, b: Complex64, mut f: F) -> Complex64
    where
        F: FnMut(Complex64) -> Complex64,
    {
        let d = b - a;
        let mut acc = Complex64::new(0.0, 0.0);
        for (t, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(a + d * *t) * *w;
        }
        acc * d
    }

    /// `∫_0^1 g(t) dt` for a real integrand, graded toward 1.
    pub fn integrate_real<F>(&self, mut g: F) -> f64
    where
        F: FnMut(f64) -> f64,
    {
        self.nodes.iter().zip(&self.weights).map(|(t, w)| g(*t) * w).sum()
    }
}

/// Antiderivative `F` of an analytic `f` with `F(0) = 0`.
#[derive(Clone)]
pub enum Antiderivative {
    /// Termwise integrated power series (exact in coefficients).
    Series(SeriesEvaluator),
    /// Ray quadrature `F(z) = z · Σ w_k f(t_k z)`.
    Ray {
        integrand: Arc<dyn Analytic>,
        /// `rules[p]` has `p` graded panels.
        rules: Arc<[RayRule]>,
    },
}

impl std::fmt::Debug for Antiderivative {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Antiderivative::Series(s) => f.debug_tuple("Series").field(s).finish(),
            Antiderivative::Ray { rules, .. } => f
                .debug_struct("Ray")
                .field("max_nodes", &rules.last().map_or(0, RayRule::len))
                .finish(),
        }
    }
}

impl Antiderivative {
    pub fn value(&self, z: Complex64) -> Complex64 {
        match self {
            Antiderivative::Series(s) => s.value(z),
            Antiderivative::Ray { integrand, rules } => {
                let rule = &rules[grading_depth(z.norm(), rules.len() - 1)];
                rule.segment(Complex64::new(0.0, 0.0), z, |w| integrand.value(w))
            }
        }
    }

    /// `F′(z)`, i.e. the integrand.
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        match self {
            Antiderivative::Series(s) => s.derivative(z),
            Antiderivative::Ray { integrand, .. } => integrand.value(z),
        }
    }
}

impl Analytic for Antiderivative {
    fn value(&self, z: Complex64) -> Complex64 {
        Antiderivative::value(self, z)
    }
}

/// Graded panels needed for a ray to `|z| = r`: the last panel is at most a
/// quarter of the distance from the ray end to the unit circle.
pub fn grading_depth(r: f64, max: usize) -> usize {
    if !(r < 1.0) {
        return max;
    }
    let shells = (1.0 / (1.0 - r)).log2().floor().max(0.0) as usize;
    (shells + 3).min(max)
}

/// Antiderivative of a power series: exact termwise integration.
pub fn integrate_series(f: &SeriesEvaluator) -> Result<Antiderivative> {
    Ok(Antiderivative::Series(f.integrate()?))
}

/// Antiderivative of a general analytic function by ray quadrature.
///
/// A probe at the origin rejects integrands that are not finite there.
pub fn antiderivative(f: Arc<dyn Analytic>, params: QuadratureParams) -> Result<Antiderivative> {
    let origin = f.value(Complex64::new(0.0, 0.0));
    if !origin.re.is_finite() || !origin.im.is_finite() {
        return Err(Error::Evaluation {
            point: Complex64::new(0.0, 0.0),
            message: "integrand is not finite at the origin".into(),
        });
    }
    let rules = (0..=params.graded_panels)
        .map(|graded_panels| {
            RayRule::new(QuadratureParams {
                graded_panels,
                ..params
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Antiderivative::Ray {
        integrand: f,
        rules: rules.into(),
    })
}
