//! Skies of events sampled over a spacelike Cauchy slice.
//!
//! A sky is the set of future-pointing null geodesics through one event.  Each
//! geodesic meets the slice `{t = t0}` exactly once; recording the crossing
//! point together with the unit codirection of `gbar(gamma', .)` identifies the
//! sky with a curve in the spherical cotangent bundle of the slice.  The fan
//! is parameterised by the launch angle of the spatial direction at the event,
//! measured in the event's spatial metric.
//!
//! Events above the slice are integrated backward along their future-pointing
//! null directions; the codirection is always taken from the future-pointing
//! velocity, which is why families of skies along past-directed timelike
//! curves come out non-negative downstream.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{
    CausalClass, Event, GeodesicPath, GeometryError, SpacetimeMetric, Tangent, TimeSense,
};
use crate::linalg;

/// The level set `{t = t0}` of the product chart, with the induced base metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchySlice {
    pub level: f64,
}

impl CauchySlice {
    pub fn new(level: f64) -> Self {
        CauchySlice { level }
    }
}

/// A point of the spherical cotangent bundle of the slice: a base point and a
/// unit covector class, represented by the `gbar`-unit vector metric-dual to it.
#[derive(Debug, Clone, PartialEq)]
pub struct STStarPoint {
    pub base: Vec<f64>,
    pub codirection: Vec<f64>,
}

/// A discretised sky: the closed fan of null geodesics through `event`,
/// recorded on the slice, ordered by launch angle `2 pi k / n`.
#[derive(Debug, Clone)]
pub struct SkySample {
    pub event: Event,
    pub slice: CauchySlice,
    pub samples: Vec<STStarPoint>,
    pub n: usize,
    /// Distance between the recomputed `phi = 2 pi` sample and sample 0.
    pub closure_defect: f64,
}

impl SkySample {
    pub fn fan_angle(&self, k: usize) -> f64 {
        core::f64::consts::TAU * k as f64 / self.n as f64
    }
}

/// Skies along a parameterised curve, with the curve samples retained.
#[derive(Debug, Clone)]
pub struct SkyFamily {
    pub skies: Vec<SkySample>,
    pub events: Vec<Event>,
    /// Worst pointwise displacement between consecutive skies.
    pub max_step_displacement: f64,
}

#[derive(Debug, Clone)]
pub struct SkyOptions {
    /// Integrator tolerance for the fan geodesics.
    pub tol: f64,
    /// Extra affine parameter integrated past the slice so crossings bracket.
    pub pad: f64,
    /// Budget for extending paths that have not crossed yet.
    pub s_budget: f64,
    /// Pointwise bound on the displacement between consecutive family skies.
    pub continuity_bound: f64,
}

impl Default for SkyOptions {
    fn default() -> Self {
        SkyOptions {
            tol: 1e-10,
            pad: 1e-3,
            s_budget: 64.0,
            continuity_bound: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub enum SkyError {
    Geometry(GeometryError),
    /// The path never reached the slice inside the parameter budget.
    NoSliceCrossing { budget: f64 },
    /// The covector restriction to the slice was numerically zero, which
    /// signals a non-spacelike slice or broken nullity.
    DegenerateRestriction { norm: f64 },
    /// Family curve segment failed the past-directed timelike classification.
    NonTimelikeSegment { index: usize },
    /// Consecutive family skies tore apart further than the continuity bound.
    FanTearing { step: usize, displacement: f64 },
    /// Error while processing one fan direction.
    AtFanAngle { phi: f64, source: Box<SkyError> },
    CurveTooShort,
}

impl fmt::Display for SkyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkyError::Geometry(e) => write!(f, "{e}"),
            SkyError::NoSliceCrossing { budget } => {
                write!(f, "geodesic did not reach the slice within |s| <= {budget}")
            }
            SkyError::DegenerateRestriction { norm } => {
                write!(f, "covector restriction to the slice has norm {norm}")
            }
            SkyError::NonTimelikeSegment { index } => {
                write!(f, "curve segment {index} is not past-directed timelike")
            }
            SkyError::FanTearing { step, displacement } => {
                write!(f, "family step {step} moved a sample by {displacement}")
            }
            SkyError::AtFanAngle { phi, source } => {
                write!(f, "at fan angle {phi}: {source}")
            }
            SkyError::CurveTooShort => write!(f, "family curve needs at least two samples"),
        }
    }
}

impl core::error::Error for SkyError {}

impl From<GeometryError> for SkyError {
    fn from(e: GeometryError) -> Self {
        SkyError::Geometry(e)
    }
}

/// Locate the slice crossing of a null path, extending the integration up to
/// the options' budget if the recorded range does not reach it.
pub fn cauchy_intersection(
    metric: &SpacetimeMetric,
    path: &GeodesicPath,
    slice: &CauchySlice,
    options: &SkyOptions,
) -> Result<(Event, Tangent), SkyError> {
    let t_index = metric.time_index();
    let crossings = path.coordinate_crossings(t_index, slice.level, 1e-10);
    if let Some(&s) = crossings.first() {
        let (x, v) = path.sample(s);
        let event = Event::new(x);
        let tangent = Tangent::new(event.clone(), v);
        return Ok((event, tangent));
    }

    // Extend from the end node in the direction that moves t toward the slice.
    let end = path.end();
    let vt = *end.v.last().expect("tangent has components");
    let remaining = (slice.level - end.x[t_index]) / vt;
    if !remaining.is_finite() || remaining.abs() > options.s_budget {
        return Err(SkyError::NoSliceCrossing {
            budget: options.s_budget,
        });
    }
    let extension = metric.geodesic_flow(
        &end.event(),
        &end.tangent(),
        remaining + remaining.signum() * options.pad,
        path.tol,
    )?;
    let crossings = extension.coordinate_crossings(t_index, slice.level, 1e-10);
    match crossings.first() {
        Some(&s) => {
            let (x, v) = extension.sample(s);
            let event = Event::new(x);
            let tangent = Tangent::new(event.clone(), v);
            Ok((event, tangent))
        }
        None => Err(SkyError::NoSliceCrossing {
            budget: options.s_budget,
        }),
    }
}

/// The identification of a null geodesic with a point of the spherical
/// cotangent bundle: restrict `gbar(gamma', .)` to the slice tangent space and
/// normalise to a unit codirection.
pub fn rho_m(
    metric: &SpacetimeMetric,
    _slice: &CauchySlice,
    crossing_event: &Event,
    crossing_velocity: &Tangent,
) -> Result<STStarPoint, SkyError> {
    let base = crossing_event.spatial().to_vec();
    let mut spatial = crossing_velocity.spatial().to_vec();
    if let SpacetimeMetric::RoundSphereProduct = metric {
        // The restriction only sees the tangential part of the velocity.
        let radial = linalg::dot(&spatial, &base);
        for (c, p) in spatial.iter_mut().zip(&base) {
            *c -= radial * p;
        }
    }
    let norm = metric.spatial_norm(&base, &spatial);
    if norm < 1e-12 {
        return Err(SkyError::DegenerateRestriction { norm });
    }
    let codirection = linalg::scale(&spatial, 1.0 / norm);
    Ok(STStarPoint { base, codirection })
}

fn sky_sample_at(
    metric: &SpacetimeMetric,
    slice: &CauchySlice,
    x: &Event,
    phi: f64,
    options: &SkyOptions,
) -> Result<STStarPoint, SkyError> {
    let q = metric.unit_spatial_direction(x.spatial(), phi);
    let v = metric.null_future_direction(x, &q)?;
    let s_target = slice.level - x.time();
    if s_target == 0.0 {
        return rho_m(metric, slice, x, &v);
    }
    let s_max = s_target + s_target.signum() * options.pad;
    let path = metric.geodesic_flow(x, &v, s_max, options.tol)?;
    let (event, tangent) = cauchy_intersection(metric, &path, slice, options)?;
    rho_m(metric, slice, &event, &tangent)
}

/// Build the sky of `x` over the slice with `n` fan directions.
pub fn build_sky(
    metric: &SpacetimeMetric,
    slice: &CauchySlice,
    x: &Event,
    n: usize,
    options: &SkyOptions,
) -> Result<SkySample, SkyError> {
    assert!(n >= 64, "sky fans need at least 64 directions");
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let phi = core::f64::consts::TAU * k as f64 / n as f64;
        let sample = sky_sample_at(metric, slice, x, phi, options).map_err(|e| {
            SkyError::AtFanAngle {
                phi,
                source: Box::new(e),
            }
        })?;
        samples.push(sample);
    }
    // Cyclic closure: the fan at phi = 2 pi must reproduce sample 0.
    let wrap = sky_sample_at(metric, slice, x, core::f64::consts::TAU, options)
        .map_err(|e| SkyError::AtFanAngle {
            phi: core::f64::consts::TAU,
            source: Box::new(e),
        })?;
    let closure_defect = linalg::dist(&wrap.base, &samples[0].base)
        .max(linalg::dist(&wrap.codirection, &samples[0].codirection));
    Ok(SkySample {
        event: x.clone(),
        slice: *slice,
        samples,
        n,
        closure_defect,
    })
}

/// Linear interpolation along the curve samples (renormalised on the sphere).
fn interpolate_curve(metric: &SpacetimeMetric, curve: &[Event], t: f64) -> Event {
    let segments = curve.len() - 1;
    let pos = t * segments as f64;
    let idx = (pos.floor() as usize).min(segments - 1);
    let frac = pos - idx as f64;
    let a = &curve[idx].coords;
    let b = &curve[idx + 1].coords;
    let mut coords: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x + frac * (y - x))
        .collect();
    if let SpacetimeMetric::RoundSphereProduct = metric {
        let norm = linalg::norm(&coords[..3]);
        for c in &mut coords[..3] {
            *c /= norm;
        }
    }
    Event::new(coords)
}

fn sky_displacement(a: &SkySample, b: &SkySample) -> f64 {
    a.samples
        .iter()
        .zip(&b.samples)
        .map(|(p, q)| linalg::dist(&p.base, &q.base))
        .fold(0.0, f64::max)
}

/// Skies along a past-directed timelike curve, resampled at `steps + 1`
/// parameter values.
pub fn sky_family_along_curve(
    metric: &SpacetimeMetric,
    slice: &CauchySlice,
    curve: &[Event],
    n: usize,
    steps: usize,
    options: &SkyOptions,
) -> Result<SkyFamily, SkyError> {
    assert!(steps >= 8, "families need at least 8 steps");
    if curve.len() < 2 {
        return Err(SkyError::CurveTooShort);
    }
    // Classify every consecutive segment of the input curve.
    for (index, pair) in curve.windows(2).enumerate() {
        let delta = linalg::sub(&pair[1].coords, &pair[0].coords);
        let tangent = Tangent::new(pair[0].clone(), delta);
        match metric.classify(&tangent) {
            Ok(CausalClass::Timelike(TimeSense::Past)) => {}
            _ => return Err(SkyError::NonTimelikeSegment { index }),
        }
    }

    let mut events = Vec::with_capacity(steps + 1);
    let mut skies = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = k as f64 / steps as f64;
        let event = interpolate_curve(metric, curve, t);
        skies.push(build_sky(metric, slice, &event, n, options)?);
        events.push(event);
    }

    let mut max_step_displacement: f64 = 0.0;
    for (step, pair) in skies.windows(2).enumerate() {
        let displacement = sky_displacement(&pair[0], &pair[1]);
        if displacement > options.continuity_bound {
            return Err(SkyError::FanTearing { step, displacement });
        }
        max_step_displacement = max_step_displacement.max(displacement);
    }

    Ok(SkyFamily {
        skies,
        events,
        max_step_displacement,
    })
}

/// A constant family sitting at one event; the degenerate but legal case.
pub fn constant_sky_family(
    metric: &SpacetimeMetric,
    slice: &CauchySlice,
    x: &Event,
    n: usize,
    steps: usize,
    options: &SkyOptions,
) -> Result<SkyFamily, SkyError> {
    let sky = build_sky(metric, slice, x, n, options)?;
    Ok(SkyFamily {
        skies: alloc::vec![sky; steps + 1],
        events: alloc::vec![x.clone(); steps + 1],
        max_step_displacement: 0.0,
    })
}
