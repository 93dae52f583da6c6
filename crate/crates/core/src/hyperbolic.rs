//! Closed-form hyperbolic trigonometry for the building blocks.
//!
//! `P_x` is the pair of pants with boundary lengths `(1, 1, 2x)`. Cutting it
//! along the common perpendiculars gives two right-angled hexagons with
//! alternate sides `½, ½, x`, so the distance between its two unit cuffs is
//!
//! ```text
//! f(x) = acosh((cosh²(½) + cosh x) / sinh²(½))
//! ```
//!
//! which increases strictly from `f_min = f(0⁺)` to infinity.

use thiserror::Error;

use crate::graph::MetricGraph;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HyperbolicError {
    #[error("waist parameter must be positive, got {0}")]
    NonPositiveWaist(f64),
    #[error("distance {distance} is not above f_min = {f_min}")]
    BelowFMin { distance: f64, f_min: f64 },
    #[error("vertex degree {0} is below 3")]
    DegreeTooSmall(usize),
    #[error("margin must be positive, got {0}")]
    NonPositiveMargin(f64),
}

fn cosh_half_sq() -> f64 {
    0.5f64.cosh().powi(2)
}

fn sinh_half_sq() -> f64 {
    0.5f64.sinh().powi(2)
}

/// Distance between the two unit cuffs of `P_x`.
pub fn waist_distance(x: f64) -> Result<f64, HyperbolicError> {
    if x.is_nan() || x <= 0.0 {
        return Err(HyperbolicError::NonPositiveWaist(x));
    }
    Ok(((cosh_half_sq() + x.cosh()) / sinh_half_sq()).acosh())
}

/// Infimum of [`waist_distance`], approached as `x → 0⁺`.
pub fn f_min() -> f64 {
    ((cosh_half_sq() + 1.0) / sinh_half_sq()).acosh()
}

/// Inverse of [`waist_distance`] on `(f_min, ∞)`.
pub fn waist_for_distance(distance: f64) -> Result<f64, HyperbolicError> {
    let fm = f_min();
    if distance.is_nan() || distance <= fm || !distance.is_finite() {
        return Err(HyperbolicError::BelowFMin {
            distance,
            f_min: fm,
        });
    }
    let arg = distance.cosh() * sinh_half_sq() - cosh_half_sq();
    // rounding can push arg just below 1 for distances within an ulp of f_min
    Ok(arg.max(1.0).acosh())
}

/// Length of the orthogeodesic from the centre of the vertex sphere `S(v)`
/// to each of its unit boundaries: `asinh(coth(¼)·coth(π/deg))`.
pub fn foot_length(degree: usize) -> Result<f64, HyperbolicError> {
    if degree < 3 {
        return Err(HyperbolicError::DegreeTooSmall(degree));
    }
    let coth = |x: f64| 1.0 / x.tanh();
    Ok((coth(0.25) * coth(std::f64::consts::PI / degree as f64)).asinh())
}

/// `x_u + x_v` for an edge with endpoints `u`, `v` (twice `x_u` for a loop).
pub fn edge_clearance(g: &MetricGraph, edge: usize) -> Result<f64, HyperbolicError> {
    let (u, v) = g.endpoints(edge);
    Ok(foot_length(g.degree(u))? + foot_length(g.degree(v))?)
}

/// Default margin kept between `t·d(e) - l(e)` and `f_min`.
pub const DEFAULT_MARGIN: f64 = 0.1;

/// Rescaling factor and per-vertex / per-edge block dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleParams {
    pub t: f64,
    pub margin: f64,
    pub f_min: f64,
    /// `x_v` per vertex.
    pub foot: Vec<f64>,
    /// `l(e)` per edge.
    pub clearance: Vec<f64>,
    /// `x_e` per edge; the free cuff of the edge pants has length `2 x_e`.
    pub waist: Vec<f64>,
}

/// Smallest `t` with `t·d(e) ≥ l(e) + f_min + margin` on every edge, and the
/// waists `x_e = f⁻¹(t·d(e) - l(e))`.
pub fn choose_scale(g: &MetricGraph, margin: f64) -> Result<ScaleParams, HyperbolicError> {
    if margin.is_nan() || margin <= 0.0 {
        return Err(HyperbolicError::NonPositiveMargin(margin));
    }
    let fm = f_min();
    let foot = g
        .degrees()
        .into_iter()
        .map(foot_length)
        .collect::<Result<Vec<_>, _>>()?;
    let clearance: Vec<f64> = (0..g.edge_count())
        .map(|e| {
            let (u, v) = g.endpoints(e);
            foot[u] + foot[v]
        })
        .collect();
    let t = (0..g.edge_count())
        .map(|e| (clearance[e] + fm + margin) / g.length(e))
        .fold(f64::MIN, f64::max);
    let waist = (0..g.edge_count())
        .map(|e| {
            // the binding edge sits exactly at f_min + margin up to rounding
            let available = (t * g.length(e) - clearance[e]).max(fm + margin);
            waist_for_distance(available)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ScaleParams {
        t,
        margin,
        f_min: fm,
        foot,
        clearance,
        waist,
    })
}
