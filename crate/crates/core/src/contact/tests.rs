use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::geometry::Event;
use crate::skies::{build_sky, sky_family_along_curve, CauchySlice, SkyOptions};

const TAU: f64 = core::f64::consts::TAU;
const PI: f64 = core::f64::consts::PI;

fn minkowski2() -> SpacetimeMetric {
    SpacetimeMetric::minkowski(2)
}

#[test]
fn hodograph_chart_examples() {
    // (x = (1, 0), phi = 0) -> (0, 0, 1)
    let jet = hodograph([1.0, 0.0], 0.0);
    assert_eq!((jet.phi, jet.p, jet.u), (0.0, 0.0, 1.0));

    // The fibre over the origin maps to the zero section.
    for phi in [0.0, 0.7, 2.0, 4.9] {
        let jet = hodograph([0.0, 0.0], phi);
        assert_eq!(jet.p, 0.0);
        assert_eq!(jet.u, 0.0);
    }
}

#[test]
fn fibre_image_is_a_one_jet_graph() {
    // p must equal du/dphi; the derivative oracle is a first-harmonic fit of
    // the sampled heights, independent of the hodograph momentum formula.
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..20 {
        let x = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        let n = 256;
        let mut ac = 0.0;
        let mut bs = 0.0;
        for k in 0..n {
            let phi = TAU * k as f64 / n as f64;
            let u = hodograph(x, phi).u;
            ac += u * libm::cos(phi) * (TAU / n as f64);
            bs += u * libm::sin(phi) * (TAU / n as f64);
        }
        let (a, b) = (ac / PI, bs / PI);
        for k in 0..n {
            let phi = TAU * k as f64 / n as f64;
            let jet = hodograph(x, phi);
            let fitted_derivative = -a * libm::sin(phi) + b * libm::cos(phi);
            assert!((jet.p - fitted_derivative).abs() < 1e-10);
        }
    }
}

#[test]
fn inverse_hodograph_examples() {
    let (x, phi) = inverse_hodograph(&JetPoint {
        phi: 0.0,
        p: 0.0,
        u: 1.0,
    });
    assert_eq!(x, [1.0, 0.0]);
    assert_eq!(phi, 0.0);

    let (x, _) = inverse_hodograph(&JetPoint {
        phi: 2.2,
        p: 0.0,
        u: 0.0,
    });
    assert!(x[0].abs() < 1e-16 && x[1].abs() < 1e-16);
}

proptest! {
    #[test]
    fn hodograph_round_trip(
        x0 in -10.0f64..10.0, x1 in -10.0f64..10.0, phi in 0.0f64..TAU,
    ) {
        let jet = hodograph([x0, x1], phi);
        let (back, _) = inverse_hodograph(&jet);
        prop_assert!((back[0] - x0).abs() < 1e-12);
        prop_assert!((back[1] - x1).abs() < 1e-12);
    }
}

#[test]
fn minkowski_sky_front_is_the_flat_closed_form() {
    let m = minkowski2();
    let slice = CauchySlice::new(0.0);
    let x = Event::new(vec![1.0, 2.0, 3.0]);
    let sky = build_sky(&m, &slice, &x, 128, &SkyOptions::default()).unwrap();
    let curve = sky_to_legendrian(&m, &sky, 0).unwrap();
    for jet in &curve.samples {
        let expected_u = libm::cos(jet.phi) + 2.0 * libm::sin(jet.phi) - 3.0;
        let expected_p = -libm::sin(jet.phi) + 2.0 * libm::cos(jet.phi);
        assert!((jet.u - expected_u).abs() < 1e-9);
        assert!((jet.p - expected_p).abs() < 1e-9);
    }
    assert!(curve.legendrian_residual() < 1e-6);
    let inv = classical_invariants(&curve).unwrap();
    assert_eq!(
        inv,
        ComponentInvariants {
            rotation: 0,
            tb: 0,
            winding: 1
        }
    );
}

#[test]
fn on_slice_sky_maps_to_fibre_graph() {
    let m = minkowski2();
    let slice = CauchySlice::new(0.0);
    let x = Event::new(vec![0.8, -0.6, 0.0]);
    let sky = build_sky(&m, &slice, &x, 128, &SkyOptions::default()).unwrap();
    let curve = sky_to_legendrian(&m, &sky, 0).unwrap();
    let fibre = curve.fibre_point(1e-6).expect("fibre curve");
    assert!((fibre[0] - 0.8).abs() < 1e-8);
    assert!((fibre[1] + 0.6).abs() < 1e-8);

    // Origin on the slice: the zero section.
    let origin = Event::new(vec![0.0, 0.0, 0.0]);
    let sky = build_sky(&m, &slice, &origin, 128, &SkyOptions::default()).unwrap();
    let curve = sky_to_legendrian(&m, &sky, 0).unwrap();
    for jet in &curve.samples {
        assert!(jet.u.abs() < 1e-10 && jet.p.abs() < 1e-10);
    }
}

#[test]
fn sphere_skies_have_no_hodograph_chart() {
    let m = SpacetimeMetric::RoundSphereProduct;
    let slice = CauchySlice::new(0.0);
    let x = Event::new(vec![0.0, 0.0, 1.0, 1.0]);
    let sky = build_sky(&m, &slice, &x, 64, &SkyOptions::default()).unwrap();
    assert!(matches!(
        sky_to_legendrian(&m, &sky, 0),
        Err(ContactError::UnsupportedBase)
    ));
}

fn zero_section(n: usize, component: usize) -> LegendrianCurve {
    LegendrianCurve::graph(|_| (0.0, 0.0), n, component)
}

#[test]
fn front_crossings_of_two_cosine_against_zero_section() {
    let a = zero_section(720, 0);
    let b = LegendrianCurve::graph(
        |phi| (2.0 * libm::cos(phi), -2.0 * libm::sin(phi)),
        720,
        1,
    );
    let diagram = front_diagram(&[&a, &b]).unwrap();
    let inter: Vec<&Crossing> = diagram.crossings.iter().collect();
    assert_eq!(inter.len(), 2);
    assert!((inter[0].phi - PI / 2.0).abs() < 1e-9);
    assert!((inter[1].phi - 3.0 * PI / 2.0).abs() < 1e-9);
    assert!(diagram.vertical_order.is_none());
}

#[test]
fn constant_separation_gives_vertical_order() {
    let a = zero_section(720, 0);
    let b = LegendrianCurve::graph(|_| (-1.0, 0.0), 720, 1);
    let diagram = front_diagram(&[&a, &b]).unwrap();
    assert_eq!(diagram.crossings.len(), 0);
    // Second component sits below the first.
    assert_eq!(diagram.vertical_order, Some(1));
}

#[test]
fn minkowski_sky_pair_crosses_at_predicted_angles() {
    let m = minkowski2();
    let slice = CauchySlice::new(0.0);
    let x = Event::new(vec![1.0, 0.0, 0.5]);
    let y = Event::new(vec![0.0, 0.0, 0.0]);
    let sky_x = build_sky(&m, &slice, &x, 720, &SkyOptions::default()).unwrap();
    let sky_y = build_sky(&m, &slice, &y, 720, &SkyOptions::default()).unwrap();
    let cx = sky_to_legendrian(&m, &sky_x, 0).unwrap();
    let cy = sky_to_legendrian(&m, &sky_y, 1).unwrap();
    let diagram = front_diagram(&[&cx, &cy]).unwrap();
    // u_x - u_y = cos phi - 1/2: zeros at phi = pi/3 and 5 pi/3.
    assert_eq!(diagram.crossings.len(), 2);
    assert!((diagram.crossings[0].phi - PI / 3.0).abs() < 1e-7);
    assert!((diagram.crossings[1].phi - 5.0 * PI / 3.0).abs() < 1e-7);
}

#[test]
fn graph_invariants_are_trivial() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let (a, b, c) = (
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-1.0..1.0),
        );
        let curve = LegendrianCurve::graph(
            |phi| {
                (
                    a * libm::cos(phi) + b * libm::sin(phi) + c * libm::cos(2.0 * phi),
                    -a * libm::sin(phi) + b * libm::cos(phi) - 2.0 * c * libm::sin(2.0 * phi),
                )
            },
            512,
            0,
        );
        let inv = classical_invariants(&curve).unwrap();
        assert_eq!((inv.rotation, inv.tb, inv.winding), (0, 0, 1));
    }
}

#[test]
fn invariant_formulas_on_stated_front_data() {
    // Two up and two down cusps with front writhe -1.
    let inv = ComponentInvariants::from_front_data(2, 2, -1, 1).unwrap();
    assert_eq!(inv.rotation, 0);
    assert_eq!(inv.tb, -3);

    // One stabilisation: both cusps of one kind, no crossings.
    let inv = ComponentInvariants::from_front_data(2, 0, 0, 1).unwrap();
    assert_eq!(inv.rotation, -1);
    assert_eq!(inv.tb, -1);

    assert!(matches!(
        ComponentInvariants::from_front_data(2, 1, 0, 1),
        Err(ContactError::CuspParity { count: 3 })
    ));
}

/// Closed Legendrian with winding one and two zigzags: phi folds back twice.
/// u is the exact antiderivative of p dphi, so the curve is Legendrian to
/// machine precision.
fn double_zigzag_fixture(fold: f64, p1: f64, p2: f64, n: usize) -> LegendrianCurve {
    let a = fold; // phi(tau) = tau + a sin 2 tau
    let samples = (0..n)
        .map(|k| {
            let tau = TAU * k as f64 / n as f64;
            let phi = tau + a * libm::sin(2.0 * tau);
            let p = p1 * libm::sin(tau) + p2 * libm::cos(tau);
            // u' = p phi' integrated in closed form.
            let u = -p1 * (1.0 - a) * libm::cos(tau) - p1 * a / 3.0 * libm::cos(3.0 * tau)
                + p2 * (1.0 + a) * libm::sin(tau)
                + p2 * a / 3.0 * libm::sin(3.0 * tau);
            JetPoint { phi, p, u }
        })
        .collect();
    LegendrianCurve {
        samples,
        component: 0,
    }
}

#[test]
fn cusped_fixture_counts_and_invariants() {
    let curve = double_zigzag_fixture(0.8, 1.0, 0.6, 2048);
    assert!(!curve.is_graph());
    assert_eq!(curve.winding(), 1);
    assert!(curve.legendrian_residual() < 1e-5);
    let diagram = front_diagram(&[&curve]).unwrap();
    assert_eq!(diagram.cusps.len(), 4);
    let up = diagram.cusps.iter().filter(|c| c.upward).count();
    assert_eq!(up, 2);
    let writhe: i64 = diagram
        .self_crossings(0)
        .map(|c| c.sign as i64)
        .sum();
    assert_eq!(writhe, -1);
    let inv = classical_invariants(&curve).unwrap();
    assert_eq!(inv.rotation, 0);
    assert_eq!(inv.tb, -3);
    assert_eq!(inv.winding, 1);
}

#[test]
fn trivial_link_reference_examples() {
    let (a, b) = trivial_link_reference([0.0, 0.0], [1.0, 0.0], 720).unwrap();
    // Zero section and the graph of cos phi.
    assert!(a.samples.iter().all(|s| s.u == 0.0));
    let diagram = front_diagram(&[&a, &b]).unwrap();
    assert_eq!(diagram.crossings.len(), 2);
    assert!((diagram.crossings[0].phi - PI / 2.0).abs() < 1e-9);

    assert!(matches!(
        trivial_link_reference([0.3, 0.3], [0.3, 0.3], 64),
        Err(ContactError::CoincidentPoints)
    ));
}

#[test]
fn reference_signature_is_point_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut check = |x: [f64; 2], y: [f64; 2]| {
        let (a, b) = trivial_link_reference(x, y, 720).unwrap();
        let sig = link_signature(&a, &b).unwrap();
        for c in &sig.components {
            assert_eq!((c.rotation, c.tb, c.winding), (0, 0, 1));
        }
        assert_eq!(sig.inter_crossings, 2);
        assert_eq!(sig.vertical_order, None);
        assert_eq!(unlink_verdict(&sig).unwrap(), LinkVerdict::TrivialClassSignature);
    };
    for _ in 0..10 {
        let x = [rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)];
        let y = [rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)];
        if (x[0] - y[0]).abs() + (x[1] - y[1]).abs() > 1e-6 {
            check(x, y);
        }
    }
    // Arbitrarily close distinct points still cross twice.
    check([0.0, 0.0], [0.0, 1e-3]);
}

#[test]
fn verdicts_follow_causal_structure_in_flat_space() {
    let m = minkowski2();
    let slice = CauchySlice::new(0.0);
    let options = SkyOptions::default();
    let front = |e: &Event, comp: usize| {
        let sky = build_sky(&m, &slice, e, 720, &options).unwrap();
        sky_to_legendrian(&m, &sky, comp).unwrap()
    };

    // Spacelike pair: |dx| > |dt|.
    let x = front(&Event::new(vec![0.0, 0.0, 0.5]), 0);
    let y = front(&Event::new(vec![3.0, 0.0, 0.0]), 1);
    let sig = link_signature(&x, &y).unwrap();
    assert_eq!(sig.inter_crossings, 2);
    assert_eq!(unlink_verdict(&sig).unwrap(), LinkVerdict::TrivialClassSignature);

    // Chronological pair: nested fronts, definite vertical order.
    let x = front(&Event::new(vec![0.2, -0.1, 0.0]), 0);
    let y = front(&Event::new(vec![0.5, 0.0, 2.0]), 1);
    let sig = link_signature(&x, &y).unwrap();
    assert_eq!(sig.inter_crossings, 0);
    assert!(sig.vertical_order.is_some());
    assert_eq!(unlink_verdict(&sig).unwrap(), LinkVerdict::LinkedSignature);

    // Order dependence: swapping the components flips the vertical order.
    let sig_rev = link_signature(&y, &x).unwrap();
    assert_eq!(
        sig.vertical_order.unwrap(),
        -sig_rev.vertical_order.unwrap()
    );

    // The future event's front lies below (heights u = <x, q> - t).
    assert_eq!(sig.vertical_order, Some(1));
}

#[test]
fn sky_paired_with_itself_is_rejected() {
    let m = minkowski2();
    let slice = CauchySlice::new(0.0);
    let x = Event::new(vec![0.4, 1.0, 0.7]);
    let sky = build_sky(&m, &slice, &x, 256, &SkyOptions::default()).unwrap();
    let a = sky_to_legendrian(&m, &sky, 0).unwrap();
    let mut b = sky_to_legendrian(&m, &sky, 1).unwrap();
    assert!(matches!(
        front_diagram(&[&a, &b]),
        Err(ContactError::NotDisjoint { .. })
    ));
    // Shifting the same curve by a full period changes nothing.
    for s in &mut b.samples {
        s.phi += TAU;
    }
    assert!(matches!(
        front_diagram(&[&a, &b]),
        Err(ContactError::NotDisjoint { .. })
    ));
}

#[test]
fn winding_zero_components_are_unsupported() {
    let sig = LinkSignature {
        components: vec![
            ComponentInvariants {
                rotation: 0,
                tb: 0,
                winding: 0,
            },
            ComponentInvariants {
                rotation: 0,
                tb: 0,
                winding: 1,
            },
        ],
        inter_crossings: 2,
        vertical_order: None,
    };
    assert!(matches!(
        unlink_verdict(&sig),
        Err(ContactError::WindingUnsupported { winding: 0 })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn inter_crossing_parity_is_even_for_graph_pairs(
        a0 in -2.0f64..2.0, a1 in -2.0f64..2.0, a2 in -1.0f64..1.0,
        b0 in -2.0f64..2.0, b1 in -2.0f64..2.0, b2 in -1.0f64..1.0,
    ) {
        let a = LegendrianCurve::graph(
            |phi| (
                a0 * libm::cos(phi) + a1 * libm::sin(phi) + a2 * libm::sin(2.0 * phi),
                -a0 * libm::sin(phi) + a1 * libm::cos(phi) + 2.0 * a2 * libm::cos(2.0 * phi),
            ),
            360,
            0,
        );
        let b = LegendrianCurve::graph(
            |phi| (
                b0 * libm::cos(phi) + b1 * libm::sin(phi) + b2 * libm::sin(2.0 * phi) + 0.05,
                -b0 * libm::sin(phi) + b1 * libm::cos(phi) + 2.0 * b2 * libm::cos(2.0 * phi),
            ),
            360,
            1,
        );
        match front_diagram(&[&a, &b]) {
            Ok(diagram) if diagram.tangencies.is_empty() => {
                prop_assert_eq!(diagram.inter_crossing_count() % 2, 0);
            }
            _ => {} // tangent or coincident configurations carry no verdict
        }
    }
}

#[test]
fn nonneg_check_examples() {
    // u_t(phi) = -(1 - t), p = 0: rate 1, pass.
    let steps = 10;
    let family: Vec<LegendrianCurve> = (0..=steps)
        .map(|k| {
            let t = k as f64 / steps as f64;
            LegendrianCurve::graph(move |_| (-(1.0 - t), 0.0), 64, 0)
        })
        .collect();
    let report = nonneg_isotopy_check(&family, 1e-8).unwrap();
    assert!(report.pass);
    assert!((report.min_rate - 1.0).abs() < 1e-12);

    // Constant family: rate 0, still passes.
    let constant: Vec<LegendrianCurve> =
        (0..=steps).map(|_| zero_section(64, 0)).collect();
    let report = nonneg_isotopy_check(&constant, 1e-8).unwrap();
    assert!(report.pass);
    assert_eq!(report.min_rate, 0.0);

    // Time reversal flips the sign and fails.
    let reversed: Vec<LegendrianCurve> = family.into_iter().rev().collect();
    let report = nonneg_isotopy_check(&reversed, 1e-8).unwrap();
    assert!(!report.pass);
    assert!((report.min_rate + 1.0).abs() < 1e-12);
}

#[test]
fn sky_families_along_past_timelike_curves_are_nonnegative() {
    let slice = CauchySlice::new(0.0);
    for metric in [minkowski2(), SpacetimeMetric::conformal(0.2)] {
        let curve = vec![
            Event::new(vec![0.3, -0.2, 1.1]),
            Event::new(vec![0.5, 0.0, 0.4]),
        ];
        let family =
            sky_family_along_curve(&metric, &slice, &curve, 128, 8, &SkyOptions::default())
                .unwrap();
        let legendrians = sky_family_to_legendrians(&metric, &family).unwrap();
        let report = nonneg_isotopy_check(&legendrians, 1e-8).unwrap();
        assert!(report.pass, "min rate {}", report.min_rate);
        assert!(report.min_rate > 0.0);

        let reversed: Vec<LegendrianCurve> = legendrians.into_iter().rev().collect();
        let report = nonneg_isotopy_check(&reversed, 1e-8).unwrap();
        assert!(!report.pass);
        assert!(report.min_rate < -1e-3);
    }
}

#[test]
fn fibre_endpoint_rigidity_holds_for_shipped_families() {
    // A passing family that starts and ends at fibres must be a constant
    // family over one fibre.  The constant family realises it; a family
    // moving into the past starts at a fibre but must not end at one.
    let m = minkowski2();
    let slice = CauchySlice::new(0.0);
    let x = Event::new(vec![0.6, 0.2, 0.0]);
    let constant = crate::skies::constant_sky_family(&m, &slice, &x, 128, 8, &SkyOptions::default())
        .unwrap();
    let curves = sky_family_to_legendrians(&m, &constant).unwrap();
    let report = nonneg_isotopy_check(&curves, 1e-8).unwrap();
    assert!(report.pass);
    let start = curves.first().unwrap().fibre_point(1e-6);
    let end = curves.last().unwrap().fibre_point(1e-6);
    let (start, end) = (start.expect("fibre start"), end.expect("fibre end"));
    assert!((start[0] - end[0]).abs() < 1e-8 && (start[1] - end[1]).abs() < 1e-8);
    assert!(family_constancy_defect(&curves) < 1e-8);

    let past = vec![x.clone(), Event::new(vec![0.6, 0.2, -0.9])];
    let moving = sky_family_along_curve(&m, &slice, &past, 128, 8, &SkyOptions::default()).unwrap();
    let curves = sky_family_to_legendrians(&m, &moving).unwrap();
    let report = nonneg_isotopy_check(&curves, 1e-8).unwrap();
    assert!(report.pass);
    assert!(curves.first().unwrap().fibre_point(1e-6).is_some());
    assert!(curves.last().unwrap().fibre_point(1e-6).is_none());
}

#[test]
fn matched_distance_and_sample_mismatch() {
    let a = zero_section(64, 0);
    let b = LegendrianCurve::graph(|_| (0.5, 0.0), 64, 0);
    assert!((matched_curve_distance(&a, &b) - 0.5).abs() < 1e-15);
    let short = zero_section(32, 0);
    assert!(matches!(
        nonneg_isotopy_check(&[a, short], 1e-8),
        Err(ContactError::SampleMismatch { .. })
    ));
}
