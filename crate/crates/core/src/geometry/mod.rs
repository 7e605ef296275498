//! Chart-based Lorentz metrics, causal classification, and geodesics.
//!
//! Three product spacetimes are supported, each on a single global chart with
//! the time coordinate last and signature `(+,...,+,-)`:
//!
//! * `Minkowski(m)` on `R^{m+1}`;
//! * a conformally flat product `(R^2, e^{2*lambda} * delta) x R` with
//!   `lambda(x) = a * exp(-|x|^2)`;
//! * the round-sphere product `S^2 x R`, with the sphere kept in its unit
//!   embedding chart in `R^3` (so chart points carry four coordinates and the
//!   spatial part stays on the unit sphere).
//!
//! The time orientation is the coordinate field `d/dt`: a non-spacelike vector
//! is future-pointing exactly when its `dt`-component is positive.

mod integrator;


use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::fmath;
use crate::linalg::{self, SymMatrix};

pub use integrator::FlowOptions;

/// Tolerance band below which `g(v,v)` counts as null, relative to `|v|^2`.
pub const NULL_BAND: f64 = 1e-10;

/// A chart point `(x_1, ..., x_m, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub coords: Vec<f64>,
}

impl Event {
    pub fn new(coords: Vec<f64>) -> Self {
        Event { coords }
    }

    /// Spatial block followed by the time coordinate.
    pub fn from_parts(spatial: &[f64], t: f64) -> Self {
        let mut coords = spatial.to_vec();
        coords.push(t);
        Event { coords }
    }

    pub fn time(&self) -> f64 {
        *self.coords.last().expect("event has coordinates")
    }

    pub fn spatial(&self) -> &[f64] {
        &self.coords[..self.coords.len() - 1]
    }
}

/// A chart velocity attached to an event.
#[derive(Debug, Clone, PartialEq)]
pub struct Tangent {
    pub base: Event,
    pub components: Vec<f64>,
}

impl Tangent {
    pub fn new(base: Event, components: Vec<f64>) -> Self {
        Tangent { base, components }
    }

    pub fn dt(&self) -> f64 {
        *self.components.last().expect("tangent has components")
    }

    pub fn spatial(&self) -> &[f64] {
        &self.components[..self.components.len() - 1]
    }
}

/// Future/past flag for non-spacelike vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeSense {
    Future,
    Past,
}

/// Causal type of a tangent vector; the orientation flag exists exactly for
/// the non-spacelike classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CausalClass {
    Timelike(TimeSense),
    Null(TimeSense),
    Spacelike,
}

impl CausalClass {
    pub fn is_timelike(&self) -> bool {
        matches!(self, CausalClass::Timelike(_))
    }

    pub fn is_null(&self) -> bool {
        matches!(self, CausalClass::Null(_))
    }

    pub fn sense(&self) -> Option<TimeSense> {
        match self {
            CausalClass::Timelike(s) | CausalClass::Null(s) => Some(*s),
            CausalClass::Spacelike => None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum GeometryError {
    /// Chart point outside the metric's domain.
    OutOfChart { coords: Vec<f64> },
    /// Classification of the zero vector requested.
    ZeroVector,
    /// Spatial direction was not unit in the slice metric.
    NonUnitDirection { norm: f64 },
    /// Spatial direction not tangent to the sphere chart.
    NotTangent { normal_component: f64 },
    /// Adaptive step size underflowed; carries the partial trajectory.
    StepUnderflow { s: f64, partial: GeodesicPath },
    /// Step budget exhausted before reaching `s_max`.
    TooManySteps { s: f64, partial: GeodesicPath },
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::OutOfChart { coords } => {
                write!(f, "chart point {coords:?} outside metric domain")
            }
            GeometryError::ZeroVector => write!(f, "causal classification of the zero vector"),
            GeometryError::NonUnitDirection { norm } => {
                write!(f, "spatial direction has metric norm {norm}, expected 1")
            }
            GeometryError::NotTangent { normal_component } => write!(
                f,
                "direction has normal component {normal_component} in the sphere chart"
            ),
            GeometryError::StepUnderflow { s, .. } => {
                write!(f, "integrator step underflow at s = {s}")
            }
            GeometryError::TooManySteps { s, .. } => {
                write!(f, "integrator step budget exhausted at s = {s}")
            }
        }
    }
}

impl core::error::Error for GeometryError {}

/// Supported spacetime metrics, all of product type `base x (R, -dt^2)`.
#[derive(Debug, Clone, PartialEq)]
pub enum SpacetimeMetric {
    /// Flat `R^{m,1}`, `m >= 2`.
    Minkowski { dim_space: usize },
    /// `(R^2, e^{2 lambda} delta) x R` with `lambda(x) = amplitude * exp(-|x|^2)`.
    ConformalProduct { amplitude: f64 },
    /// `S^2 x R` with the unit sphere embedded in `R^3`.
    RoundSphereProduct,
}

impl SpacetimeMetric {
    pub fn minkowski(dim_space: usize) -> Self {
        assert!(dim_space >= 2, "need at least two spatial dimensions");
        SpacetimeMetric::Minkowski { dim_space }
    }

    pub fn conformal(amplitude: f64) -> Self {
        SpacetimeMetric::ConformalProduct { amplitude }
    }

    /// Dimension `m` of the underlying space manifold.
    pub fn dim_space(&self) -> usize {
        match self {
            SpacetimeMetric::Minkowski { dim_space } => *dim_space,
            SpacetimeMetric::ConformalProduct { .. } => 2,
            SpacetimeMetric::RoundSphereProduct => 2,
        }
    }

    /// Number of chart coordinates (spatial block plus time).
    pub fn chart_dim(&self) -> usize {
        self.spatial_chart_dim() + 1
    }

    /// Width of the spatial coordinate block in the chart.
    pub fn spatial_chart_dim(&self) -> usize {
        match self {
            SpacetimeMetric::Minkowski { dim_space } => *dim_space,
            SpacetimeMetric::ConformalProduct { .. } => 2,
            SpacetimeMetric::RoundSphereProduct => 3,
        }
    }

    /// Index of the time coordinate.
    pub fn time_index(&self) -> usize {
        self.spatial_chart_dim()
    }

    pub(crate) fn lambda(&self, spatial: &[f64]) -> f64 {
        match self {
            SpacetimeMetric::ConformalProduct { amplitude } => {
                amplitude * fmath::exp(-linalg::dot(spatial, spatial))
            }
            _ => 0.0,
        }
    }

    pub(crate) fn lambda_grad(&self, spatial: &[f64]) -> Vec<f64> {
        match self {
            SpacetimeMetric::ConformalProduct { .. } => {
                let l = self.lambda(spatial);
                spatial.iter().map(|x| -2.0 * x * l).collect()
            }
            _ => vec![0.0; spatial.len()],
        }
    }

    /// Is the chart point inside the metric's domain (with slack `tol` for the
    /// sphere constraint)?
    pub fn chart_contains(&self, coords: &[f64], tol: f64) -> bool {
        if coords.len() != self.chart_dim() || coords.iter().any(|c| !c.is_finite()) {
            return false;
        }
        match self {
            SpacetimeMetric::RoundSphereProduct => {
                (linalg::norm(&coords[..3]) - 1.0).abs() <= tol
            }
            _ => true,
        }
    }

    /// Component matrix `g_{mu nu}(x)`.
    ///
    /// For the sphere chart this is the tangential projection form on the
    /// embedding coordinates (degenerate along the chart normal), so its
    /// eigenvalues are `m` positive ones, one negative one, and a zero.
    pub fn components(&self, x: &Event) -> Result<SymMatrix, GeometryError> {
        if !self.chart_contains(&x.coords, 1e-9) {
            return Err(GeometryError::OutOfChart {
                coords: x.coords.clone(),
            });
        }
        let n = self.chart_dim();
        let mut g = SymMatrix::zeros(n);
        match self {
            SpacetimeMetric::Minkowski { .. } => {
                for i in 0..n - 1 {
                    g.set(i, i, 1.0);
                }
            }
            SpacetimeMetric::ConformalProduct { .. } => {
                let factor = fmath::exp(2.0 * self.lambda(x.spatial()));
                g.set(0, 0, factor);
                g.set(1, 1, factor);
            }
            SpacetimeMetric::RoundSphereProduct => {
                let p = x.spatial();
                for i in 0..3 {
                    for j in 0..3 {
                        let delta = if i == j { 1.0 } else { 0.0 };
                        g.set(i, j, delta - p[i] * p[j]);
                    }
                }
            }
        }
        g.set(n - 1, n - 1, -1.0);
        Ok(g)
    }

    /// `g(v, v)` without building the component matrix.
    pub fn quadratic_form(&self, base: &Event, v: &[f64]) -> f64 {
        let m = self.spatial_chart_dim();
        let vt = v[m];
        match self {
            SpacetimeMetric::Minkowski { .. } => linalg::dot(&v[..m], &v[..m]) - vt * vt,
            SpacetimeMetric::ConformalProduct { .. } => {
                let factor = fmath::exp(2.0 * self.lambda(base.spatial()));
                factor * linalg::dot(&v[..m], &v[..m]) - vt * vt
            }
            SpacetimeMetric::RoundSphereProduct => {
                let p = base.spatial();
                let vs = &v[..3];
                let tangential = linalg::dot(vs, vs) - linalg::dot(vs, p).powi(2);
                tangential - vt * vt
            }
        }
    }

    /// Spatial block metric `gbar(a, b)` at a point of the slice.
    pub fn spatial_form(&self, base: &[f64], a: &[f64], b: &[f64]) -> f64 {
        match self {
            SpacetimeMetric::Minkowski { .. } => linalg::dot(a, b),
            SpacetimeMetric::ConformalProduct { .. } => {
                fmath::exp(2.0 * self.lambda(base)) * linalg::dot(a, b)
            }
            SpacetimeMetric::RoundSphereProduct => {
                linalg::dot(a, b) - linalg::dot(a, base) * linalg::dot(b, base)
            }
        }
    }

    pub fn spatial_norm(&self, base: &[f64], a: &[f64]) -> f64 {
        fmath::sqrt(self.spatial_form(base, a, a).max(0.0))
    }

    /// The `gbar`-unit spatial direction with launch angle `phi` at `base`.
    ///
    /// This fixes the fan parameterisation of skies: in flat and conformal
    /// charts the angle is measured against the coordinate axes; on the sphere
    /// it is measured in a deterministic orthonormal tangent frame.
    pub fn unit_spatial_direction(&self, base: &[f64], phi: f64) -> Vec<f64> {
        match self {
            SpacetimeMetric::Minkowski { dim_space } => {
                let mut q = vec![0.0; *dim_space];
                q[0] = fmath::cos(phi);
                q[1] = fmath::sin(phi);
                q
            }
            SpacetimeMetric::ConformalProduct { .. } => {
                let scale = fmath::exp(-self.lambda(base));
                vec![scale * fmath::cos(phi), scale * fmath::sin(phi)]
            }
            SpacetimeMetric::RoundSphereProduct => {
                let (e1, e2) = sphere_tangent_frame(base);
                let (c, s) = (fmath::cos(phi), fmath::sin(phi));
                (0..3).map(|i| c * e1[i] + s * e2[i]).collect()
            }
        }
    }

    /// Causal class of a non-zero tangent vector.
    ///
    /// `g(v,v)` within `1e-10 * |v|^2` of zero counts as null; the orientation
    /// flag comes from the sign of the `dt`-component.
    pub fn classify(&self, v: &Tangent) -> Result<CausalClass, GeometryError> {
        let norm2 = linalg::dot(&v.components, &v.components);
        if norm2 <= 1e-28 {
            return Err(GeometryError::ZeroVector);
        }
        let gvv = self.quadratic_form(&v.base, &v.components);
        let band = NULL_BAND * norm2;
        let sense = if v.dt() > 0.0 {
            TimeSense::Future
        } else {
            TimeSense::Past
        };
        Ok(if gvv.abs() <= band {
            CausalClass::Null(sense)
        } else if gvv < 0.0 {
            CausalClass::Timelike(sense)
        } else {
            CausalClass::Spacelike
        })
    }

    /// Levi-Civita symbols `Gamma^l_{mn}` as a flat `[l][m][n]` array.
    pub fn christoffel(&self, x: &Event) -> Result<Christoffel, GeometryError> {
        if !self.chart_contains(&x.coords, 1e-9) {
            return Err(GeometryError::OutOfChart {
                coords: x.coords.clone(),
            });
        }
        let n = self.chart_dim();
        let mut gamma = Christoffel {
            dim: n,
            data: vec![0.0; n * n * n],
        };
        match self {
            SpacetimeMetric::Minkowski { .. } => {}
            SpacetimeMetric::ConformalProduct { .. } => {
                let grad = self.lambda_grad(x.spatial());
                for i in 0..2 {
                    for j in 0..2 {
                        for k in 0..2 {
                            let mut v = 0.0;
                            if i == j {
                                v += grad[k];
                            }
                            if i == k {
                                v += grad[j];
                            }
                            if j == k {
                                v -= grad[i];
                            }
                            gamma.set(i, j, k, v);
                        }
                    }
                }
            }
            SpacetimeMetric::RoundSphereProduct => {
                let p = x.spatial();
                for i in 0..3 {
                    for j in 0..3 {
                        gamma.set(i, j, j, p[i]);
                    }
                }
            }
        }
        Ok(gamma)
    }

    /// Geodesic acceleration `-Gamma(v, v)` written into `out`.
    pub(crate) fn accel(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        match self {
            SpacetimeMetric::Minkowski { .. } => {}
            SpacetimeMetric::ConformalProduct { .. } => {
                let spatial = &x[..2];
                let vs = &v[..2];
                let grad = self.lambda_grad(spatial);
                let gv = linalg::dot(&grad, vs);
                let v2 = linalg::dot(vs, vs);
                for i in 0..2 {
                    out[i] = -(2.0 * vs[i] * gv - grad[i] * v2);
                }
            }
            SpacetimeMetric::RoundSphereProduct => {
                let p = &x[..3];
                let vs = &v[..3];
                let v2 = linalg::dot(vs, vs);
                for i in 0..3 {
                    out[i] = -p[i] * v2;
                }
            }
        }
    }

    /// The future-pointing null lift of a `gbar`-unit spatial direction, with
    /// `dt`-component `+1`.
    pub fn null_future_direction(
        &self,
        x: &Event,
        q: &[f64],
    ) -> Result<Tangent, GeometryError> {
        let norm = self.spatial_norm(x.spatial(), q);
        if (norm - 1.0).abs() > 1e-8 {
            return Err(GeometryError::NonUnitDirection { norm });
        }
        if let SpacetimeMetric::RoundSphereProduct = self {
            let normal = linalg::dot(q, x.spatial());
            if normal.abs() > 1e-8 {
                return Err(GeometryError::NotTangent {
                    normal_component: normal,
                });
            }
        }
        let mut components = q.to_vec();
        components.push(1.0);
        Ok(Tangent::new(x.clone(), components))
    }

    /// Integrate the geodesic through `(x, v)` up to affine parameter `s_max`
    /// (negative for backward flow) with local error tolerance `tol`.
    pub fn geodesic_flow(
        &self,
        x: &Event,
        v: &Tangent,
        s_max: f64,
        tol: f64,
    ) -> Result<GeodesicPath, GeometryError> {
        integrator::flow(self, x, &v.components, s_max, tol, &FlowOptions::default())
    }

    /// As [`geodesic_flow`](Self::geodesic_flow) with explicit options.
    pub fn geodesic_flow_with(
        &self,
        x: &Event,
        v: &Tangent,
        s_max: f64,
        tol: f64,
        options: &FlowOptions,
    ) -> Result<GeodesicPath, GeometryError> {
        integrator::flow(self, x, &v.components, s_max, tol, options)
    }
}

/// Deterministic orthonormal frame of the tangent plane at a sphere point.
pub(crate) fn sphere_tangent_frame(p: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let pick = if p[2].abs() < 0.9 {
        [0.0, 0.0, 1.0]
    } else {
        [1.0, 0.0, 0.0]
    };
    // e1 = normalize(pick x p), e2 = p x e1
    let mut e1 = [
        pick[1] * p[2] - pick[2] * p[1],
        pick[2] * p[0] - pick[0] * p[2],
        pick[0] * p[1] - pick[1] * p[0],
    ];
    let n = fmath::sqrt(e1.iter().map(|x| x * x).sum());
    e1.iter_mut().for_each(|x| *x /= n);
    let e2 = [
        p[1] * e1[2] - p[2] * e1[1],
        p[2] * e1[0] - p[0] * e1[2],
        p[0] * e1[1] - p[1] * e1[0],
    ];
    (e1.to_vec(), e2.to_vec())
}

/// `Gamma^l_{mn}` with row-major `[l][m][n]` layout.
#[derive(Debug, Clone)]
pub struct Christoffel {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Christoffel {
    #[inline]
    pub fn get(&self, l: usize, m: usize, n: usize) -> f64 {
        self.data[(l * self.dim + m) * self.dim + n]
    }

    #[inline]
    fn set(&mut self, l: usize, m: usize, n: usize, v: f64) {
        self.data[(l * self.dim + m) * self.dim + n] = v;
    }
}

/// One accepted integrator node with enough data for dense output.
#[derive(Debug, Clone)]
pub struct PathNode {
    /// Affine parameter.
    pub s: f64,
    /// Chart position.
    pub x: Vec<f64>,
    /// Chart velocity.
    pub v: Vec<f64>,
    /// Acceleration at `(x, v)`; cubic Hermite data for the velocity block.
    pub a: Vec<f64>,
}

impl PathNode {
    pub fn event(&self) -> Event {
        Event::new(self.x.clone())
    }

    pub fn tangent(&self) -> Tangent {
        Tangent::new(self.event(), self.v.clone())
    }
}

/// Dense-output geodesic trajectory.
#[derive(Debug, Clone)]
pub struct GeodesicPath {
    pub nodes: Vec<PathNode>,
    /// Local error tolerance the integrator was run at.
    pub tol: f64,
}

impl GeodesicPath {
    pub fn start(&self) -> &PathNode {
        self.nodes.first().expect("path has nodes")
    }

    pub fn end(&self) -> &PathNode {
        self.nodes.last().expect("path has nodes")
    }

    pub fn s_span(&self) -> (f64, f64) {
        (self.start().s, self.end().s)
    }

    fn segment_for(&self, s: f64) -> usize {
        let forward = self.end().s >= self.start().s;
        let mut lo = 0;
        let mut hi = self.nodes.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            let inside = if forward {
                self.nodes[mid].s <= s
            } else {
                self.nodes[mid].s >= s
            };
            if inside {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Dense output at parameter `s`: quintic Hermite on the position (value,
    /// velocity, and acceleration are all stored per node) and its derivative
    /// for the velocity.
    pub fn sample(&self, s: f64) -> (Vec<f64>, Vec<f64>) {
        let idx = self.segment_for(s);
        let n0 = &self.nodes[idx];
        let n1 = &self.nodes[idx + 1];
        let h = n1.s - n0.s;
        if h == 0.0 {
            return (n0.x.clone(), n0.v.clone());
        }
        let u = (s - n0.s) / h;
        let (u2, u3) = (u * u, u * u * u);
        let (u4, u5) = (u2 * u2, u2 * u3);
        let h0 = 1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5;
        let h1 = u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5;
        let h2 = 0.5 * u2 - 1.5 * u3 + 1.5 * u4 - 0.5 * u5;
        let h3 = 10.0 * u3 - 15.0 * u4 + 6.0 * u5;
        let h4 = -4.0 * u3 + 7.0 * u4 - 3.0 * u5;
        let h5 = 0.5 * u3 - u4 + 0.5 * u5;
        let d0 = -30.0 * u2 + 60.0 * u3 - 30.0 * u4;
        let d1 = 1.0 - 18.0 * u2 + 32.0 * u3 - 15.0 * u4;
        let d2 = u - 4.5 * u2 + 6.0 * u3 - 2.5 * u4;
        let d3 = 30.0 * u2 - 60.0 * u3 + 30.0 * u4;
        let d4 = -12.0 * u2 + 28.0 * u3 - 15.0 * u4;
        let d5 = 1.5 * u2 - 4.0 * u3 + 2.5 * u4;
        let dim = n0.x.len();
        let mut x = vec![0.0; dim];
        let mut v = vec![0.0; dim];
        for i in 0..dim {
            x[i] = h0 * n0.x[i]
                + h1 * h * n0.v[i]
                + h2 * h * h * n0.a[i]
                + h3 * n1.x[i]
                + h4 * h * n1.v[i]
                + h5 * h * h * n1.a[i];
            v[i] = (d0 * n0.x[i]
                + d1 * h * n0.v[i]
                + d2 * h * h * n0.a[i]
                + d3 * n1.x[i]
                + d4 * h * n1.v[i]
                + d5 * h * h * n1.a[i])
                / h;
        }
        (x, v)
    }

    /// All parameters where coordinate `coord` crosses `value`, refined on the
    /// dense output to `|x_coord - value| < refine_tol`.
    pub fn coordinate_crossings(&self, coord: usize, value: f64, refine_tol: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for w in self.nodes.windows(2) {
            let f0 = w[0].x[coord] - value;
            let f1 = w[1].x[coord] - value;
            if f0 == 0.0 {
                out.push(w[0].s);
                continue;
            }
            if f0 * f1 < 0.0 {
                out.push(self.refine_crossing(coord, value, w[0].s, w[1].s, refine_tol));
            }
        }
        if let Some(last) = self.nodes.last() {
            if last.x[coord] - value == 0.0 {
                out.push(last.s);
            }
        }
        out
    }

    fn refine_crossing(&self, coord: usize, value: f64, s0: f64, s1: f64, tol: f64) -> f64 {
        let mut a = s0;
        let mut b = s1;
        let eval = |s: f64| self.sample(s).0[coord] - value;
        let mut fa = eval(a);
        for _ in 0..200 {
            // secant guess, bisection fallback
            let fb = eval(b);
            let mid = if (fb - fa).abs() > 1e-300 {
                let cand = b - fb * (b - a) / (fb - fa);
                if (cand - a) * (cand - b) < 0.0 {
                    cand
                } else {
                    0.5 * (a + b)
                }
            } else {
                0.5 * (a + b)
            };
            let fm = eval(mid);
            if fm.abs() < tol || (b - a).abs() < 1e-15 {
                return mid;
            }
            if fa * fm <= 0.0 {
                b = mid;
            } else {
                a = mid;
                fa = fm;
            }
        }
        0.5 * (a + b)
    }

    /// Worst deviation of `g(v, v)` from its initial value over the nodes.
    pub fn quadratic_form_drift(&self, metric: &SpacetimeMetric) -> f64 {
        let initial = metric.quadratic_form(&self.start().event(), &self.start().v);
        self.nodes
            .iter()
            .map(|n| (metric.quadratic_form(&n.event(), &n.v) - initial).abs())
            .fold(0.0, f64::max)
    }
}
