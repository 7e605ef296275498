//! Adaptive Dormand-Prince 5(4) integration of the geodesic equation.
//!
//! The state is `(x, v)` with derivative `(v, -Gamma(v, v))`.  Accepted nodes
//! keep position, velocity, and acceleration so the path supports cubic
//! Hermite dense output.  The local error per step is controlled against the
//! caller's `tol`; the scheme identity is an implementation detail behind the
//! error contract.

use alloc::vec;
use alloc::vec::Vec;

use super::{Event, GeodesicPath, GeometryError, PathNode, SpacetimeMetric};

// Dormand-Prince coefficients.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th- and 4th-order weights (error estimator).
const E1: f64 = B1 - 5179.0 / 57600.0;
const E3: f64 = B3 - 7571.0 / 16695.0;
const E4: f64 = B4 - 393.0 / 640.0;
const E5: f64 = B5 + 92097.0 / 339200.0;
const E6: f64 = B6 - 187.0 / 2100.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone)]
pub struct FlowOptions {
    /// Hard cap on accepted + rejected steps.
    pub max_steps: usize,
    /// Initial step magnitude; `None` picks one from the span.
    pub initial_step: Option<f64>,
    /// Cap on the step magnitude; `None` leaves it to the controller.
    pub max_step: Option<f64>,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            max_steps: 200_000,
            initial_step: None,
            max_step: None,
        }
    }
}

struct System<'m> {
    metric: &'m SpacetimeMetric,
    dim: usize,
}

impl System<'_> {
    /// dy/ds for y = (x, v).
    fn deriv(&self, y: &[f64], out: &mut [f64]) {
        let d = self.dim;
        out[..d].copy_from_slice(&y[d..]);
        let (x, v) = y.split_at(d);
        self.metric.accel(x, v, &mut out[d..]);
    }
}

pub fn flow(
    metric: &SpacetimeMetric,
    x0: &Event,
    v0: &[f64],
    s_max: f64,
    tol: f64,
    options: &FlowOptions,
) -> Result<GeodesicPath, GeometryError> {
    assert!(tol > 0.0, "tolerance must be positive");
    let dim = metric.chart_dim();
    assert_eq!(x0.coords.len(), dim);
    assert_eq!(v0.len(), dim);
    if !metric.chart_contains(&x0.coords, 1e-9) {
        return Err(GeometryError::OutOfChart {
            coords: x0.coords.clone(),
        });
    }

    let sys = System { metric, dim };
    let n = 2 * dim;
    let direction = if s_max < 0.0 { -1.0 } else { 1.0 };
    let span = s_max.abs();

    let mut y = vec![0.0; n];
    y[..dim].copy_from_slice(&x0.coords);
    y[dim..].copy_from_slice(v0);
    normalise_sphere_state(metric, &mut y, dim);

    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];

    sys.deriv(&y, &mut k1);

    let mut nodes = Vec::new();
    let mut s = 0.0;
    push_node(&mut nodes, s, &y, &k1, dim);

    if span == 0.0 {
        return Ok(GeodesicPath { nodes, tol });
    }

    let mut h = options
        .initial_step
        .unwrap_or_else(|| (span / 16.0).min(0.1))
        .min(span)
        * direction;

    let mut steps = 0usize;
    while (s * direction) < span {
        steps += 1;
        if steps > options.max_steps {
            return Err(GeometryError::TooManySteps {
                s,
                partial: GeodesicPath { nodes, tol },
            });
        }
        // Clip final step to land on s_max exactly.
        if (s + h) * direction > span {
            h = s_max - s;
        }
        if h.abs() < 1e-14 * (1.0 + s.abs()) {
            return Err(GeometryError::StepUnderflow {
                s,
                partial: GeodesicPath { nodes, tol },
            });
        }

        for i in 0..n {
            stage[i] = y[i] + h * A21 * k1[i];
        }
        sys.deriv(&stage, &mut k2);
        for i in 0..n {
            stage[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        sys.deriv(&stage, &mut k3);
        for i in 0..n {
            stage[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        sys.deriv(&stage, &mut k4);
        for i in 0..n {
            stage[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        sys.deriv(&stage, &mut k5);
        for i in 0..n {
            stage[i] =
                y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        sys.deriv(&stage, &mut k6);
        for i in 0..n {
            y_new[i] =
                y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        sys.deriv(&y_new, &mut k7);

        let mut err_sq = 0.0;
        for i in 0..n {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = tol * (1.0 + y[i].abs().max(y_new[i].abs()));
            err_sq += (e / scale) * (e / scale);
        }
        let err = libm::sqrt(err_sq / n as f64);

        if err <= 1.0 {
            s += h;
            y.copy_from_slice(&y_new);
            if normalise_sphere_state(metric, &mut y, dim) {
                sys.deriv(&y, &mut k7);
            }
            if !metric.chart_contains(&y[..dim], 1e-6) {
                return Err(GeometryError::OutOfChart {
                    coords: y[..dim].to_vec(),
                });
            }
            k1.copy_from_slice(&k7);
            push_node(&mut nodes, s, &y, &k1, dim);
        }

        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * libm::pow(err, -0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if let Some(cap) = options.max_step {
            h = h.clamp(-cap, cap);
        }
    }

    Ok(GeodesicPath { nodes, tol })
}

fn push_node(nodes: &mut Vec<PathNode>, s: f64, y: &[f64], deriv: &[f64], dim: usize) {
    nodes.push(PathNode {
        s,
        x: y[..dim].to_vec(),
        v: y[dim..].to_vec(),
        a: deriv[dim..].to_vec(),
    });
}

/// Project the sphere chart back onto the constraint manifold.  Returns true
/// when anything moved (so the cached derivative must be refreshed).
fn normalise_sphere_state(metric: &SpacetimeMetric, y: &mut [f64], dim: usize) -> bool {
    if !matches!(metric, SpacetimeMetric::RoundSphereProduct) {
        return false;
    }
    let norm = libm::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]);
    for i in 0..3 {
        y[i] /= norm;
    }
    let radial: f64 = (0..3).map(|i| y[i] * y[dim + i]).sum();
    for i in 0..3 {
        y[dim + i] -= radial * y[i];
    }
    (norm - 1.0).abs() > 1e-16 || radial.abs() > 1e-16
}
