//! Front diagrams in the `(phi, u)` annulus: crossings, cusps, and the
//! classical invariants read off them.
//!
//! Conventions (declared once, used everywhere): at a front crossing the
//! strand with the larger momentum `p` is in front; crossing signs come from
//! the orientation of the (over-tangent, under-tangent) frame; components are
//! oriented by traversal order (increasing `phi` for graph fronts); the
//! Thurston-Bennequin number is the front writhe minus half the cusp count,
//! computed in the annulus with its blackboard framing; the rotation number
//! is half the down-minus-up cusp count, a cusp counting as "up" when the
//! momentum increases through it.

use alloc::vec::Vec;

use super::{wrap_angle, ContactError, JetPoint, LegendrianCurve, TANGENCY_BAND};

/// A transverse front crossing.
#[derive(Debug, Clone, PartialEq)]
pub struct Crossing {
    pub phi: f64,
    pub u: f64,
    /// Component id of the front strand (larger momentum).
    pub over: usize,
    /// Component id of the back strand.
    pub under: usize,
    pub sign: i8,
}

/// A front cusp.
#[derive(Debug, Clone, PartialEq)]
pub struct Cusp {
    pub phi: f64,
    pub u: f64,
    pub component: usize,
    /// Momentum increases through the cusp.
    pub upward: bool,
}

/// Crossings, cusps, and tangency flags of a one- or two-component front.
#[derive(Debug, Clone)]
pub struct FrontDiagram {
    pub components: Vec<usize>,
    pub crossings: Vec<Crossing>,
    pub cusps: Vec<Cusp>,
    /// Angles of crossing candidates inside the tangency band; verdicts on
    /// diagrams carrying these are refused rather than guessed.
    pub tangencies: Vec<f64>,
    /// For crossingless two-component diagrams: sign of `u_first - u_second`.
    pub vertical_order: Option<i8>,
}

impl FrontDiagram {
    pub fn inter_crossing_count(&self) -> usize {
        self.crossings
            .iter()
            .filter(|c| c.over != c.under)
            .count()
    }

    pub fn self_crossings(&self, component: usize) -> impl Iterator<Item = &Crossing> {
        self.crossings
            .iter()
            .filter(move |c| c.over == component && c.under == component)
    }
}

/// Classical invariants of one component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComponentInvariants {
    pub rotation: i64,
    pub tb: i64,
    pub winding: i64,
}

impl ComponentInvariants {
    /// The declared formulas on raw front data: rotation is
    /// `(down - up) / 2`, tb is the front writhe minus half the cusp count.
    pub fn from_front_data(
        up_cusps: usize,
        down_cusps: usize,
        writhe: i64,
        winding: i64,
    ) -> Result<Self, ContactError> {
        let count = up_cusps + down_cusps;
        if count % 2 != 0 {
            return Err(ContactError::CuspParity { count });
        }
        Ok(ComponentInvariants {
            rotation: (down_cusps as i64 - up_cusps as i64) / 2,
            tb: writhe - (count as i64) / 2,
            winding,
        })
    }
}

/// Cusps of one sampled component: parameter slots where the traversal
/// reverses its `phi` direction.
fn detect_cusps(curve: &LegendrianCurve) -> Vec<Cusp> {
    let n = curve.samples.len();
    let deltas: Vec<f64> = (0..n)
        .map(|k| wrap_angle(curve.samples[(k + 1) % n].phi - curve.samples[k].phi))
        .collect();
    let mut cusps = Vec::new();
    for k in 0..n {
        let d0 = deltas[k];
        let d1 = deltas[(k + 1) % n];
        if d0 * d1 < 0.0 {
            // Fold between samples k+1 and its neighbours; refine the angle by
            // the parabola through the three unwrapped angles.
            let i = (k + 1) % n;
            let prev = &curve.samples[k];
            let here = &curve.samples[i];
            let next = &curve.samples[(k + 2) % n];
            let x0 = -d0;
            let x1 = 0.0;
            let x2 = d1;
            // Quadratic through (tau, phi) with tau in {-1, 0, 1}.
            let a = 0.5 * (x2 + x0) - x1;
            let b = 0.5 * (x2 - x0);
            let tau_star = if a.abs() > 1e-300 {
                (-b / (2.0 * a)).clamp(-1.0, 1.0)
            } else {
                0.0
            };
            let phi_star = here.phi + a * tau_star * tau_star + b * tau_star;
            cusps.push(Cusp {
                phi: phi_star,
                u: here.u,
                component: curve.component,
                upward: next.p > prev.p,
            });
        }
    }
    cusps
}

struct Segment {
    phi0: f64,
    u0: f64,
    phi1: f64,
    u1: f64,
    p0: f64,
    p1: f64,
    index: usize,
}

fn segments_of(curve: &LegendrianCurve) -> Vec<Segment> {
    let n = curve.samples.len();
    (0..n)
        .map(|k| {
            let a = &curve.samples[k];
            let b = &curve.samples[(k + 1) % n];
            let d = wrap_angle(b.phi - a.phi);
            Segment {
                phi0: a.phi,
                u0: a.u,
                phi1: a.phi + d,
                u1: b.u,
                p0: a.p,
                p1: b.p,
                index: k,
            }
        })
        .collect()
}

struct Hit {
    phi: f64,
    u: f64,
    /// Momentum and tangent of each strand at the hit.
    p_a: f64,
    p_b: f64,
    tan_a: (f64, f64),
    tan_b: (f64, f64),
}

/// Transverse intersection of two front segments, with the second segment
/// shifted by `shift` along the angle axis.
fn segment_hit(a: &Segment, b: &Segment, shift: f64) -> Option<Hit> {
    let (ax0, ax1) = (a.phi0, a.phi1);
    let (bx0, bx1) = (b.phi0 + shift, b.phi1 + shift);
    if ax0.max(ax1) < bx0.min(bx1) - 1e-12 || bx0.max(bx1) < ax0.min(ax1) - 1e-12 {
        return None;
    }
    if a.u0.max(a.u1) < b.u0.min(b.u1) - 1e-12 || b.u0.max(b.u1) < a.u0.min(a.u1) - 1e-12 {
        return None;
    }
    let r = (ax1 - ax0, a.u1 - a.u0);
    let s = (bx1 - bx0, b.u1 - b.u0);
    let det = r.0 * s.1 - r.1 * s.0;
    if det.abs() < 1e-15 {
        return None;
    }
    let qp = (bx0 - ax0, b.u0 - a.u0);
    let t = (qp.0 * s.1 - qp.1 * s.0) / det;
    let w = (qp.0 * r.1 - qp.1 * r.0) / -det;
    // Half-open endpoints avoid double counting at shared sample points.
    if !(0.0..1.0).contains(&t) || !(0.0..1.0).contains(&w) {
        return None;
    }
    Some(Hit {
        phi: ax0 + t * r.0,
        u: a.u0 + t * r.1,
        p_a: a.p0 + t * (a.p1 - a.p0),
        p_b: b.p0 + w * (b.p1 - b.p0),
        tan_a: r,
        tan_b: s,
    })
}

fn record_hit(
    hit: Hit,
    comp_a: usize,
    comp_b: usize,
    crossings: &mut Vec<Crossing>,
    tangencies: &mut Vec<f64>,
) {
    if (hit.p_a - hit.p_b).abs() < TANGENCY_BAND {
        tangencies.push(hit.phi);
        return;
    }
    let (over_p, under_p, over, under, t_over, t_under) = if hit.p_a > hit.p_b {
        (hit.p_a, hit.p_b, comp_a, comp_b, hit.tan_a, hit.tan_b)
    } else {
        (hit.p_b, hit.p_a, comp_b, comp_a, hit.tan_b, hit.tan_a)
    };
    let _ = (over_p, under_p);
    let det = t_over.0 * t_under.1 - t_over.1 * t_under.0;
    crossings.push(Crossing {
        phi: hit.phi,
        u: hit.u,
        over,
        under,
        sign: if det > 0.0 { 1 } else { -1 },
    });
}

/// Self-crossings of one component by segment sweep on the cylinder.
fn self_crossings(
    curve: &LegendrianCurve,
    crossings: &mut Vec<Crossing>,
    tangencies: &mut Vec<f64>,
) {
    if curve.is_graph() {
        return; // graphs over the circle cannot self-intersect
    }
    let segs = segments_of(curve);
    let n = segs.len();
    for i in 0..n {
        for j in (i + 1)..n {
            // Skip traversal-adjacent segments; they share a sample point.
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            for shift in [-core::f64::consts::TAU, 0.0, core::f64::consts::TAU] {
                if let Some(hit) = segment_hit(&segs[i], &segs[j], shift) {
                    record_hit(hit, curve.component, curve.component, crossings, tangencies);
                }
            }
        }
    }
}

/// Merged cyclic angle grid of two graph curves.
fn merged_grid(a: &LegendrianCurve, b: &LegendrianCurve) -> Vec<f64> {
    let mut grid: Vec<f64> = a
        .samples
        .iter()
        .chain(&b.samples)
        .map(|s| {
            let mut phi = s.phi % core::f64::consts::TAU;
            if phi < 0.0 {
                phi += core::f64::consts::TAU;
            }
            phi
        })
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    grid
}

/// Inter-component crossings of two graph fronts: sign changes of the height
/// difference on the merged grid, refined to angle accuracy 1e-9.
fn graph_inter_crossings(
    a: &LegendrianCurve,
    b: &LegendrianCurve,
    crossings: &mut Vec<Crossing>,
    tangencies: &mut Vec<f64>,
) -> Result<Option<i8>, ContactError> {
    let grid = merged_grid(a, b);
    let diff = |phi: f64| a.u_at(phi) - b.u_at(phi);
    let values: Vec<f64> = grid.iter().map(|&phi| diff(phi)).collect();

    let sup = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if sup < 1e-8 {
        return Err(ContactError::NotDisjoint { phi: grid[0] });
    }

    let m = grid.len();
    let mut roots = Vec::new();
    for k in 0..m {
        let (g0, mut g1) = (grid[k], grid[(k + 1) % m]);
        if k + 1 == m {
            g1 += core::f64::consts::TAU;
        }
        let (d0, d1) = (values[k], values[(k + 1) % m]);
        if d0 == 0.0 {
            roots.push(g0);
            continue;
        }
        if d0 * d1 < 0.0 {
            // Bisection/secant hybrid on the interpolated difference.
            let (mut lo, mut hi) = (g0, g1);
            let mut flo = d0;
            while hi - lo > 1e-9 {
                let fhi = diff(hi);
                let mid = if (fhi - flo).abs() > 1e-300 {
                    let cand = hi - fhi * (hi - lo) / (fhi - flo);
                    if cand > lo && cand < hi {
                        cand
                    } else {
                        0.5 * (lo + hi)
                    }
                } else {
                    0.5 * (lo + hi)
                };
                let fmid = diff(mid);
                if flo * fmid <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fmid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
    }

    for phi in roots {
        let (p_a, p_b) = (a.p_at(phi), b.p_at(phi));
        if (p_a - p_b).abs() < TANGENCY_BAND {
            tangencies.push(phi);
            continue;
        }
        let (over, under, t_over, t_under) = if p_a > p_b {
            (a.component, b.component, (1.0, p_a), (1.0, p_b))
        } else {
            (b.component, a.component, (1.0, p_b), (1.0, p_a))
        };
        let det = t_over.0 * t_under.1 - t_over.1 * t_under.0;
        crossings.push(Crossing {
            phi,
            u: a.u_at(phi),
            over,
            under,
            sign: if det > 0.0 { 1 } else { -1 },
        });
    }

    let inter = crossings.iter().filter(|c| c.over != c.under).count();
    if inter == 0 && tangencies.is_empty() {
        let sign = if values[0] > 0.0 { 1 } else { -1 };
        if values.iter().any(|v| (*v > 0.0) != (sign > 0)) {
            // A sign flip without a detected crossing cannot happen on a
            // consistent grid; treat it as a tangency.
            return Err(ContactError::UnresolvedTangency { phi: grid[0] });
        }
        return Ok(Some(sign));
    }
    Ok(None)
}

/// General inter-component crossings by segment sweep (used whenever a
/// component is not a graph).
fn polyline_inter_crossings(
    a: &LegendrianCurve,
    b: &LegendrianCurve,
    crossings: &mut Vec<Crossing>,
    tangencies: &mut Vec<f64>,
) {
    let sa = segments_of(a);
    let sb = segments_of(b);
    for i in &sa {
        for j in &sb {
            for shift in [-core::f64::consts::TAU, 0.0, core::f64::consts::TAU] {
                if let Some(hit) = segment_hit(i, j, shift) {
                    record_hit(hit, a.component, b.component, crossings, tangencies);
                }
            }
        }
    }
}

/// Build the front diagram of one or two components.
///
/// Crossing candidates with momentum gap inside the tangency band are flagged
/// in `tangencies` rather than resolved.  Identical fronts are refused: link
/// components must be disjoint.
pub fn front_diagram(curves: &[&LegendrianCurve]) -> Result<FrontDiagram, ContactError> {
    assert!(
        !curves.is_empty() && curves.len() <= 2,
        "front diagrams take one or two components"
    );
    let mut crossings = Vec::new();
    let mut tangencies = Vec::new();
    let mut cusps = Vec::new();
    for curve in curves {
        cusps.extend(detect_cusps(curve));
        self_crossings(curve, &mut crossings, &mut tangencies);
    }
    let mut vertical_order = None;
    if curves.len() == 2 {
        let (a, b) = (curves[0], curves[1]);
        if a.is_graph() && b.is_graph() {
            vertical_order = graph_inter_crossings(a, b, &mut crossings, &mut tangencies)?;
        } else {
            polyline_inter_crossings(a, b, &mut crossings, &mut tangencies);
        }
    }
    crossings.sort_by(|x, y| x.phi.total_cmp(&y.phi));
    cusps.sort_by(|x, y| x.phi.total_cmp(&y.phi));
    Ok(FrontDiagram {
        components: curves.iter().map(|c| c.component).collect(),
        crossings,
        cusps,
        tangencies,
        vertical_order,
    })
}

/// Rotation number, Thurston-Bennequin number, and winding degree of one
/// component, via its own front diagram.
pub fn classical_invariants(
    curve: &LegendrianCurve,
) -> Result<ComponentInvariants, ContactError> {
    let mut crossings = Vec::new();
    let mut tangencies = Vec::new();
    self_crossings(curve, &mut crossings, &mut tangencies);
    if let Some(&phi) = tangencies.first() {
        return Err(ContactError::UnresolvedTangency { phi });
    }
    let cusps = detect_cusps(curve);
    let up = cusps.iter().filter(|c| c.upward).count();
    let down = cusps.len() - up;
    let writhe: i64 = crossings.iter().map(|c| c.sign as i64).sum();
    ComponentInvariants::from_front_data(up, down, writhe, curve.winding())
}

/// Positions of a single jet sample in the diagram; convenience for tests.
pub fn jet_of(curve: &LegendrianCurve, k: usize) -> JetPoint {
    curve.samples[k]
}
