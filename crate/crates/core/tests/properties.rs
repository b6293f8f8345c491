use std::f64::consts::PI;

use lenslab::flow::{trace_from_boundary, TraceMethod};
use lenslab::intgeo::{count_intersections, length_via_crofton};
use lenslab::jacobi::{first_conjugate, inverse_square_functional, propagate_from_boundary};
use lenslab::lens::{build_lens_table, compare_lens};
use lenslab::surface::ChartPoint;
use lenslab::{BoundaryVector, GeodesicState, GridSpec, LensTable, SurfaceKind, SurfaceModel, TraceOptions, TraceStatus};
use proptest::prelude::*;

fn catalog(k: usize, shift: f64) -> SurfaceModel {
    match k {
        0 => SurfaceModel::flat_cylinder(0.0, 1.0).unwrap(),
        1 => SurfaceModel::bump(0.05, 0.2, shift).unwrap(),
        2 => SurfaceModel::cosh_cylinder(),
        3 => SurfaceModel::mobius(1.0).unwrap(),
        _ => SurfaceModel::capped(1.0).unwrap(),
    }
}

fn surface() -> impl Strategy<Value = SurfaceModel> {
    (0usize..5, -0.5f64..0.5).prop_map(|(k, s)| catalog(k, s))
}

fn warped() -> impl Strategy<Value = SurfaceModel> {
    (1usize..3, -0.5f64..0.5).prop_map(|(k, s)| catalog(k, s))
}

fn boundary_vector(s: &SurfaceModel, comp: usize, frac: f64, theta: f64) -> BoundaryVector {
    let comps = s.boundary().components;
    let c = &comps[comp % comps.len()];
    BoundaryVector::new(c.id, frac * c.length, theta)
}

fn circ_dist(a: f64, b: f64, len: f64) -> f64 {
    let d = (a - b).rem_euclid(len);
    d.min(len - d)
}

/// Fourth-order second derivative by Richardson extrapolation of central
/// second differences.
fn fd_second(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
    let d = |h: f64| (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn metric_is_positive_definite(s in surface(), a in 0.0f64..1.0, x in -10.0f64..10.0) {
        let t = s.t_min() + a * s.width();
        let g = s.metric_coeffs(ChartPoint::new(t, x)).unwrap();
        prop_assert!(g.g_tt > 0.0 && g.g_tt * g.g_xx - g.g_tx * g.g_tx > 0.0);
    }

    #[test]
    fn curvature_matches_finite_differences(s in warped(), a in 0.02f64..0.98) {
        let t = s.t_min() + a * s.width();
        if let Some(lenslab::surface::WarpedProfile::Bump(b)) = s.profile() {
            // the edge layer of the bump outruns any fixed-step stencil
            let u = (b.shift + t).abs() / b.half_width;
            prop_assume!(u <= 0.8 || u >= 1.0);
        }
        let k = s.curvature(ChartPoint::new(t, 0.0)).unwrap();
        let fd = -fd_second(|t| s.warp(t).f, t, 1e-3) / s.warp(t).f;
        prop_assert!((k - fd).abs() <= 1e-6 * k.abs().max(1.0), "K {k} fd {fd}");
    }

    #[test]
    fn bump_is_flat_off_its_support(shift in -0.5f64..0.5) {
        let s = SurfaceModel::bump(0.05, 0.2, shift).unwrap();
        for t in [s.t_min(), s.t_max(), -shift - 0.2, -shift + 0.2] {
            let w = s.warp(t);
            prop_assert_eq!((w.f, w.df), (1.0, 0.0));
        }
    }

    #[test]
    fn glue_twice_is_the_identity(kind in 3usize..5, x in 0.0f64..(2.0 * PI), alpha in 0.1f64..(PI - 0.1)) {
        let s = catalog(kind, 0.0);
        let level = if s.kind() == SurfaceKind::MobiusQuotient { s.t_min() } else { s.t_max() };
        let sign = if s.kind() == SurfaceKind::MobiusQuotient { -1.0 } else { 1.0 };
        let v = GeodesicState::new(level, x, sign * alpha.sin(), alpha.cos());
        let once = s.glue_map(&v).unwrap();
        prop_assert!((once.state.speed_sq(&s) - 1.0).abs() < 1e-15);
        let twice = s.glue_map(&once.state.reversed()).unwrap().state;
        let back = v.reversed();
        prop_assert!(circ_dist(twice.x, back.x, s.circumference()) < 1e-12);
        prop_assert_eq!((twice.t, twice.v_t, twice.v_x), (back.t, back.v_t, back.v_x));
    }

    #[test]
    fn ode_conserves_speed_and_clairaut(s in warped(), comp in 0usize..2, frac in 0.0f64..1.0, theta in -1.4f64..1.4) {
        let bv = boundary_vector(&s, comp, frac, theta);
        // integrator states only; resampled points are Hermite interpolants
        let opts = TraceOptions { max_turn: 10.0, ..TraceOptions::default().with_method(TraceMethod::Ode) };
        let r = trace_from_boundary(&s, &bv, &opts).unwrap();
        let c = r.clairaut.unwrap();
        for p in r.polyline.pieces.iter().flatten() {
            let st = GeodesicState::new(p.t, p.x, p.v_t, p.v_x);
            prop_assert!((st.speed_sq(&s) - 1.0).abs() < 1e-9, "speed {:e} at {}", st.speed_sq(&s) - 1.0, p.arclen);
            prop_assert!((st.clairaut(&s) - c).abs() < 1e-9);
        }
    }

    #[test]
    fn polylines_obey_the_turning_contract(s in surface(), comp in 0usize..2, frac in 0.0f64..1.0, theta in -1.5f64..1.5) {
        let bv = boundary_vector(&s, comp, frac, theta);
        let r = trace_from_boundary(&s, &bv, &TraceOptions::default()).unwrap();
        if r.status == TraceStatus::Exited {
            r.polyline.validate().unwrap();
            prop_assert!(r.polyline.max_turn() < 0.05);
        }
    }

    #[test]
    fn scattering_is_an_involution(s in surface(), comp in 0usize..2, frac in 0.0f64..1.0, theta in -1.5f64..1.5) {
        let opts = TraceOptions::default().without_polyline();
        let bv = boundary_vector(&s, comp, frac, theta);
        let r = trace_from_boundary(&s, &bv, &opts).unwrap();
        prop_assume!(r.status == TraceStatus::Exited);
        let e = r.exit.unwrap();
        let back = trace_from_boundary(&s, &BoundaryVector::new(e.component, e.s, -e.theta), &opts).unwrap();
        let b = back.exit.unwrap();
        let len = s.component(bv.component).unwrap().length;
        prop_assert_eq!(b.component, bv.component);
        prop_assert!(circ_dist(b.s, bv.s, len) < 1e-8);
        prop_assert!((b.theta + bv.theta).abs() < 1e-8);
        prop_assert!((back.travel_time.unwrap() - r.travel_time.unwrap()).abs() < 1e-8);
    }

    #[test]
    fn mobius_and_cap_differ_by_one_half_great_circle(frac in 0.0f64..1.0, theta in -1.5f64..1.5) {
        let opts = TraceOptions::default().without_polyline();
        let m = SurfaceModel::mobius(1.0).unwrap();
        let c = SurfaceModel::capped(1.0).unwrap();
        let bv = boundary_vector(&m, 0, frac, theta);
        let (a, b) = (trace_from_boundary(&m, &bv, &opts).unwrap(), trace_from_boundary(&c, &bv, &opts).unwrap());
        prop_assert_eq!((a.glue_crossings, b.glue_crossings), (1, 1));
        prop_assert!((b.travel_time.unwrap() - a.travel_time.unwrap() - PI * c.cap_radius()).abs() < 1e-10);
    }

    #[test]
    fn intersection_count_is_symmetric(
        s in surface(),
        g in (0usize..2, 0.0f64..1.0, -1.4f64..1.4),
        h in (0usize..2, 0.0f64..1.0, -1.4f64..1.4),
    ) {
        let opts = TraceOptions::default();
        let p = trace_from_boundary(&s, &boundary_vector(&s, g.0, g.1, g.2), &opts).unwrap();
        let q = trace_from_boundary(&s, &boundary_vector(&s, h.0, h.1, h.2), &opts).unwrap();
        prop_assume!(p.status == TraceStatus::Exited && q.status == TraceStatus::Exited);
        let (p, q) = (&p.polyline, &q.polyline);
        let n = count_intersections(&s, p, q).unwrap();
        prop_assume!(n.is_clean());
        prop_assert_eq!(count_intersections(&s, q, p).unwrap().count, n.count);
        prop_assert_eq!(count_intersections(&s, &p.reversed(), q).unwrap().count, n.count);
        prop_assert_eq!(count_intersections(&s, p, &q.reversed()).unwrap().count, n.count);
    }

    #[test]
    fn cosh_geodesics_have_no_conjugate_points(comp in 0usize..2, frac in 0.0f64..1.0, theta in -1.2f64..1.2) {
        let s = SurfaceModel::cosh_cylinder();
        let r = first_conjugate(&s, &boundary_vector(&s, comp, frac, theta), &TraceOptions::default()).unwrap();
        prop_assert!(r.first.is_none());
        prop_assert!(r.trace.samples.iter().skip(1).all(|p| p.j > 0.0));
    }

    #[test]
    fn jacobi_residual_is_small(k in prop_oneof![Just(0usize), Just(2), Just(4)], comp in 0usize..2, frac in 0.0f64..1.0, theta in -1.2f64..1.2) {
        let s = catalog(k, 0.0);
        let bv = boundary_vector(&s, comp, frac, theta);
        let tr = propagate_from_boundary(&s, &bv, (0.0, 1.0), None, &TraceOptions::default()).unwrap();
        prop_assert!(tr.residual() < 1e-6, "residual {}", tr.residual());
    }

    #[test]
    fn fan_satisfies_the_convexity_bound(shift in -0.5f64..0.5, theta in 0.0f64..(2.0 * PI)) {
        let opts = TraceOptions::default();
        for s in [SurfaceModel::flat_cylinder(0.0, 1.0).unwrap(), SurfaceModel::bump(0.05, 0.2, shift).unwrap()] {
            let row = inverse_square_functional(&s, &[theta], &opts).unwrap()[0];
            let l = s.width();
            let jensen = l * l * l / (row.integral_j * row.integral_j);
            if s.is_flat_band() {
                prop_assert!((row.integral_inv_sq - jensen).abs() < 1e-12);
            } else {
                prop_assert!(row.integral_inv_sq > jensen);
            }
        }
    }

    #[test]
    fn crofton_sampling_is_reproducible(seed in any::<u64>()) {
        let s = SurfaceModel::flat_cylinder(0.0, 1.0).unwrap();
        let g = trace_from_boundary(&s, &BoundaryVector::new(0, 1.0, 0.3), &TraceOptions::default()).unwrap();
        let a = length_via_crofton(&s, &g.polyline, 2000, seed, &TraceOptions::default()).unwrap();
        let b = length_via_crofton(&s, &g.polyline, 2000, seed, &TraceOptions::default()).unwrap();
        prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
        prop_assert!(a.error > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn lens_tables_round_trip(k in 0usize..5, shift in -0.5f64..0.5, n_s in 2usize..6, n_theta in 2usize..6) {
        let s = catalog(k, shift);
        let table = build_lens_table(&s, &GridSpec::uniform(&s, n_s, n_theta), &TraceOptions::default()).unwrap();
        prop_assert_eq!(table.records.len(), table.grid.node_count());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.csv");
        table.save(&path).unwrap();
        prop_assert_eq!(LensTable::load(&path).unwrap(), table);
    }

    #[test]
    fn bump_family_is_lens_equivalent(a in 0.05f64..0.1, s0 in -0.5f64..0.5, s1 in -0.5f64..0.5) {
        let opts = TraceOptions::default();
        let ta = SurfaceModel::bump(a, 0.2, s0).unwrap();
        let tb = SurfaceModel::bump(a, 0.2, s1).unwrap();
        let grid = GridSpec::uniform(&ta, 8, 7);
        let r = compare_lens(&build_lens_table(&ta, &grid, &opts).unwrap(), &build_lens_table(&tb, &grid, &opts).unwrap(), 1e-6).unwrap();
        prop_assert!(r.lens_equivalent, "{r:?}");
    }
}
