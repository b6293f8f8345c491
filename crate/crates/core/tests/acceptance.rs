//! Acceptance suite: one pass/fail line per criterion, with its runtime.
//! Run with `cargo test -p lenslab --test acceptance`.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use lenslab::flow::{double_cover_exit, trace_from_boundary, TraceMethod, TraceOptions};
use lenslab::intgeo::{
    average_angle_identity, crofton_check, difference_sweep, length_via_crofton, random_boundary_vector,
    santalo_check, theta_grid, trapped_measure, CroftonGrid, CurveSpec,
};
use lenslab::jacobi::{
    area_via_fan, finite_difference_field, first_conjugate, inverse_square_functional, propagate_from_boundary,
};
use lenslab::lens::{build_lens_table, compare_lens, scattering, GridSpec, LensTable};
use lenslab::ode::Tolerances;
use lenslab::quad::{integrate, QuadOptions};
use lenslab::surface::{BumpProfile, SurfaceModel};
use lenslab::{BoundaryVector, Result, TrapVerdict};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// pinned tolerances
const MOBIUS_CAP_TOL: f64 = 1e-8;
const BUMP_LENS_TOL: f64 = 1e-6;
const CROFTON_REL: f64 = 1e-3;
const SANTALO_REL: f64 = 1e-6;
const LENGTH_SIGMAS: f64 = 3.0;
const LENGTH_RUNS: u64 = 100;
const LENGTH_MIN_PASS: usize = 99;
const LENGTH_SAMPLES: usize = 100_000;
const JACOBI_FLAT_TOL: f64 = 1e-12;
const JACOBI_SHIFT_TOL: f64 = 1e-9;
const JACOBI_CLOSED_TOL: f64 = 1e-8;
const JACOBI_FD_REL: f64 = 1e-4;
const FAN_AREA_REL: f64 = 1e-8;
const TRAPPED_DIRECTIONS: usize = 10_000;
const ANGLE_TOL: f64 = 1e-9;
const EXACT_ODE_TOL: f64 = 1e-8;
const DOUBLE_COVER_TOL: f64 = 1e-10;
const INVOLUTION_TOL: f64 = 1e-8;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn all(parts: Vec<Outcome>) -> Outcome {
    outcome(
        parts.iter().all(|p| p.ok),
        parts
            .iter()
            .map(|p| format!("{}{}", if p.ok { "" } else { "FAILED " }, p.detail))
            .collect::<Vec<_>>()
            .join("; "),
    )
}

fn bump(s: f64) -> SurfaceModel {
    SurfaceModel::bump(0.05, 0.2, s).unwrap()
}

fn c1_mobius_cap() -> Result<Outcome> {
    let m = SurfaceModel::mobius(1.0)?;
    let c = SurfaceModel::capped(1.0)?;
    let opts = TraceOptions::default();
    let a = build_lens_table(&m, &GridSpec::uniform(&m, 64, 33), &opts)?;
    let b = build_lens_table(&c, &GridSpec::uniform(&c, 64, 33), &opts)?;
    let r = compare_lens(&a, &b, MOBIUS_CAP_TOL)?;
    let off = r.tt_offset.expect("compared nodes");
    let dev = (off.min - PI).abs().max((off.max - PI).abs());
    Ok(all(vec![
        outcome(r.scattering_equivalent, format!("scattering max {:.2e}/{:.2e}", r.max_position, r.max_angle)),
        outcome(dev < MOBIUS_CAP_TOL, format!("tt offset dev {dev:.2e} over {} nodes", r.compared)),
    ]))
}

fn c2_bump_family() -> Result<Outcome> {
    let opts = TraceOptions::default();
    let (s0, s1) = (bump(0.0), bump(0.3));
    let a = build_lens_table(&s0, &GridSpec::uniform(&s0, 64, 33), &opts)?;
    let b = build_lens_table(&s1, &GridSpec::uniform(&s1, 64, 33), &opts)?;
    let r = compare_lens(&a, &b, BUMP_LENS_TOL)?;
    Ok(outcome(
        r.lens_equivalent,
        format!(
            "pos {:.2e} angle {:.2e} tt {:.2e} over {} nodes",
            r.max_position, r.max_angle, r.max_travel_time, r.compared
        ),
    ))
}

fn c3_intersection_difference() -> Result<Outcome> {
    let opts = TraceOptions::default();
    let m = SurfaceModel::mobius(1.0)?;
    let c = SurfaceModel::capped(1.0)?;
    let mc = difference_sweep(&m, &c, 1000, 11, &opts)?;
    let bp = difference_sweep(&bump(0.0), &bump(0.3), 1000, 12, &opts)?;
    let (em, eb) = (mc.exceptions(-1).len(), bp.exceptions(0).len());
    Ok(all(vec![
        outcome(em == 0 && mc.samples.len() == 1000, format!("mobius/cap {:?} ({} redrawn)", mc.histogram(), mc.redrawn)),
        outcome(eb == 0 && bp.samples.len() == 1000, format!("bump {:?} ({} redrawn)", bp.histogram(), bp.redrawn)),
    ]))
}

fn c4_crofton() -> Result<Outcome> {
    let opts = TraceOptions::default();
    let grid = CroftonGrid {
        n_s: 256,
        n_theta: 256,
        n_tau: 16,
        n_phi: 256,
    };
    let flat = SurfaceModel::flat_cylinder(0.0, 1.0)?;
    let circle = crofton_check(&flat, &CurveSpec::Circle { t: 0.5 }, &grid, &opts)?;
    let meridian = crofton_check(&flat, &CurveSpec::Meridian { x: 1.0, t0: 0.0, t1: 1.0 }, &grid, &opts)?;
    let waist = crofton_check(&SurfaceModel::cosh_cylinder(), &CurveSpec::Circle { t: 0.0 }, &grid, &opts)?;
    let rel = |v: f64, e: f64| (v - e).abs() / e;
    let c_ok = rel(circle.lhs.value, 8.0 * PI) < CROFTON_REL && rel(circle.rhs.value, 8.0 * PI) < CROFTON_REL;
    let m_ok = rel(meridian.lhs.value, 4.0) < CROFTON_REL && rel(meridian.rhs.value, 4.0) < CROFTON_REL;
    let combined = waist.lhs.error + waist.rhs.error;
    Ok(all(vec![
        outcome(c_ok, format!("circle {:.6}/{:.6}", circle.lhs.value, circle.rhs.value)),
        outcome(m_ok, format!("meridian {:.6}/{:.6}", meridian.lhs.value, meridian.rhs.value)),
        outcome(
            waist.discrepancy() <= combined,
            format!("waist {:.6}/{:.6} diff {:.2e} <= {:.2e}", waist.lhs.value, waist.rhs.value, waist.discrepancy(), combined),
        ),
    ]))
}

fn c5_santalo() -> Result<Outcome> {
    let opts = TraceOptions::default();
    let mut parts = Vec::new();
    for (name, s) in [
        ("flat", SurfaceModel::flat_cylinder(0.0, 1.0)?),
        ("bump", bump(0.0)),
        ("cosh", SurfaceModel::cosh_cylinder()),
    ] {
        let r = santalo_check(&s, 2, 1e-10, &opts)?;
        let trapped = trapped_volume(&s);
        let mut detail = format!("{name} {:.9}/{:.9} rel {:.1e}", r.boundary.value, r.phase_volume, r.relative_diff());
        if trapped > 0.0 {
            let rel = ((r.boundary.value + trapped) - r.phase_volume).abs() / r.phase_volume;
            detail += &format!(" (trapped volume {trapped:.9}, boundary + trapped rel {rel:.1e})");
        }
        parts.push(outcome(r.relative_diff() < SANTALO_REL, detail));
    }
    Ok(all(parts))
}

/// Liouville volume of the directions with Clairaut constant above the
/// boundary warp, which never reach the boundary.
fn trapped_volume(s: &SurfaceModel) -> f64 {
    let f_b = s.warp(s.t_min()).f.max(s.warp(s.t_max()).f);
    let n = 200_000;
    let h = s.width() / n as f64;
    (0..n)
        .map(|k| {
            let f = s.warp(s.t_min() + (k as f64 + 0.5) * h).f;
            if f > f_b {
                2.0 * f * (PI - 2.0 * (f_b / f).asin())
            } else {
                0.0
            }
        })
        .sum::<f64>()
        * h
        * s.circumference()
}

fn c6_length() -> Result<Outcome> {
    let flat = SurfaceModel::flat_cylinder(0.0, 1.0)?;
    let opts = TraceOptions::default();
    let mut parts = Vec::new();
    for (len, theta) in [(1.0, 0.0), (2.0, PI / 3.0)] {
        let g = trace_from_boundary(&flat, &BoundaryVector::new(0, 1.0, theta), &opts)?;
        let traced = g.travel_time.unwrap();
        let mut pass = 0;
        for seed in 0..LENGTH_RUNS {
            let e = length_via_crofton(&flat, &g.polyline, LENGTH_SAMPLES, seed, &opts)?;
            if (e.value - len).abs() <= LENGTH_SIGMAS * e.error {
                pass += 1;
            }
        }
        parts.push(outcome(
            pass >= LENGTH_MIN_PASS && (traced - len).abs() < 1e-12,
            format!("L={len}: {pass}/{LENGTH_RUNS} within 3 se"),
        ));
    }
    Ok(all(parts))
}

fn c7_jacobi() -> Result<Outcome> {
    let opts = TraceOptions::default();
    let flat = SurfaceModel::flat_cylinder(0.0, 1.0)?;
    let rows = inverse_square_functional(&flat, &[0.0, 1.0, 2.5, 5.0], &opts)?;
    let flat_dev = rows.iter().map(|r| (r.integral_inv_sq - 1.0).abs()).fold(0.0, f64::max);

    // bump fan: shift invariance and the direct quadrature of (1 + h)⁻²
    let prof = BumpProfile::new(0.05, 0.2, 0.0);
    let oracle = integrate(
        |u| (1.0 + prof.eval(u).0).powi(-2),
        -1.0,
        1.0,
        &[-0.2, 0.0, 0.2],
        QuadOptions {
            abs_tol: 1e-15,
            rel_tol: 1e-14,
            max_intervals: 1000,
        },
    )
    .value;
    let vals: Vec<f64> = [0.0, 0.15, 0.3]
        .iter()
        .map(|&s| Ok(inverse_square_functional(&bump(s), &[0.7], &opts)?[0].integral_inv_sq))
        .collect::<Result<_>>()?;
    let spread = vals.iter().map(|v| (v - vals[0]).abs()).fold(0.0, f64::max);
    let vs_oracle = vals.iter().map(|v| (v - oracle).abs()).fold(0.0, f64::max);

    // ODE against closed forms
    let mut closed: f64 = 0.0;
    for s in [0.0, 0.3] {
        let b = bump(s);
        let tr = propagate_from_boundary(&b, &BoundaryVector::new(0, 0.0, 0.0), (1.0, 0.0), None, &opts)?;
        for p in &tr.samples {
            closed = closed.max((p.j - b.warp(p.t).f).abs());
        }
    }
    let cosh = SurfaceModel::cosh_cylinder();
    let tr = propagate_from_boundary(&cosh, &BoundaryVector::new(0, 0.0, 0.0), (0.0, 1.0), None, &opts)?;
    for p in &tr.samples {
        closed = closed.max((p.j - p.arclen.sinh()).abs());
    }

    // finite-difference oracle on oblique geodesics
    let mut fd_rel: f64 = 0.0;
    for (s, bv) in [
        (&cosh, BoundaryVector::new(0, 0.4, 0.5)),
        (&bump(0.1), BoundaryVector::new(1, 2.0, -0.7)),
    ] {
        let tr = propagate_from_boundary(s, &bv, (0.0, 1.0), Some(0.2), &opts)?;
        let pts: Vec<_> = tr.samples.iter().skip(1).filter(|p| p.arclen < tr.end.arclen - 1e-6).collect();
        let at: Vec<f64> = pts.iter().map(|p| p.arclen).collect();
        let fd = finite_difference_field(s, &bv, 1e-5, &at, &opts)?;
        for (p, q) in pts.iter().zip(&fd) {
            fd_rel = fd_rel.max((p.j - q).abs() / p.j.abs());
        }
    }

    let areas = [area_via_fan(&cosh, 8, &opts)?, area_via_fan(&bump(0.0), 8, &opts)?];
    let area_rel = areas.iter().map(|a| a.relative_diff()).fold(0.0, f64::max);
    Ok(all(vec![
        outcome(flat_dev <= JACOBI_FLAT_TOL, format!("flat |V-1| {flat_dev:.1e}")),
        outcome(
            spread < JACOBI_SHIFT_TOL && vs_oracle < JACOBI_SHIFT_TOL,
            format!("bump spread {spread:.1e} vs quadrature {vs_oracle:.1e}"),
        ),
        outcome(closed < JACOBI_CLOSED_TOL, format!("closed form {closed:.1e}")),
        outcome(fd_rel < JACOBI_FD_REL, format!("finite difference {fd_rel:.1e}")),
        outcome(area_rel < FAN_AREA_REL, format!("fan area {area_rel:.1e}")),
    ]))
}

fn c8_trapped() -> Result<Outcome> {
    let opts = TraceOptions::default();
    let cosh = SurfaceModel::cosh_cylinder();
    let n = TRAPPED_DIRECTIONS;
    let step = 2.0 * PI / n as f64;
    let mut bracket_ok = true;
    let mut worst: f64 = 0.0;
    for t0 in [-0.8, -0.5, -0.2, 0.25, 0.5, 0.9] {
        let r = trapped_measure(&cosh, t0, 0.3, n, &opts)?;
        let a = (1.0 / f64::cosh(t0)).asin();
        let base = if t0 > 0.0 { PI - a } else { a };
        let mut expect = [-base, base];
        expect.sort_by(f64::total_cmp);
        let mut centers: Vec<f64> = r.brackets.iter().map(|b| b.center()).collect();
        centers.sort_by(f64::total_cmp);
        if centers.len() != 2 {
            bracket_ok = false;
            continue;
        }
        for (c, e) in centers.iter().zip(&expect) {
            worst = worst.max((c - e).abs());
        }
    }
    let waist = trapped_measure(&cosh, 0.0, 0.0, n, &opts)?;
    let waist_ok = waist.brackets.len() == 2 && waist.brackets.iter().all(|b| b.center_verdict == TrapVerdict::TotallyTrapped);

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut conjugate = 0;
    let mut traced = 0;
    while traced < 1000 {
        let bv = random_boundary_vector(&cosh, &mut rng);
        if scattering(&cosh, &bv, &opts.without_polyline())?.travel_time.is_none() {
            continue;
        }
        traced += 1;
        if first_conjugate(&cosh, &bv, &opts)?.first.is_some() {
            conjugate += 1;
        }
    }

    let tight = TraceOptions {
        tol: Tolerances {
            rtol: 1e-12,
            atol: 1e-14,
        },
        ..opts
    };
    let angle = average_angle_identity(&cosh, &theta_grid(32), 64, 21, &tight)?;
    Ok(all(vec![
        outcome(bracket_ok && worst <= step, format!("2 brackets at 6 points, center dev {worst:.1e}")),
        outcome(waist_ok, "waist brackets totally trapped"),
        outcome(conjugate == 0, format!("{conjugate} conjugate points on {traced} geodesics")),
        outcome(
            angle.max_deviation() < ANGLE_TOL,
            format!("Theta dev {:.1e} over {} samples", angle.max_deviation(), angle.samples),
        ),
    ]))
}

fn max_table_diff(a: &LensTable, b: &LensTable) -> Result<f64> {
    let r = compare_lens(a, b, 0.0)?;
    if r.status_mismatches > 0 {
        return Ok(f64::INFINITY);
    }
    Ok(r.max_position.max(r.max_angle).max(r.max_travel_time))
}

fn c9_infrastructure() -> Result<Outcome> {
    let opts = TraceOptions::default();
    let cosh = SurfaceModel::cosh_cylinder();
    // includes the critical angle, so trapped rows are exercised
    let crit = (1.0 / f64::cosh(1.0)).asin();
    let grid = GridSpec::parse(&format!("8x[-1.2;{:?};0.0;{crit:?};1.2],8x5", -crit))?;
    let t = build_lens_table(&cosh, &grid, &opts)?;
    let text = t.to_csv_string()?;
    let back = LensTable::parse_csv(&text)?;
    let lossless = back == t && back.to_csv_string()? == text;

    let flat = SurfaceModel::flat_cylinder(0.0, 1.0)?;
    let g = GridSpec::uniform(&flat, 32, 17);
    let exact = build_lens_table(&flat, &g, &opts.with_method(TraceMethod::Exact))?;
    let ode = build_lens_table(&flat, &g, &opts.with_method(TraceMethod::Ode))?;
    let exact_ode = max_table_diff(&exact, &ode)?;

    let m = SurfaceModel::mobius(1.0)?;
    let mut cover: f64 = 0.0;
    for bv in GridSpec::uniform(&m, 32, 17).nodes(&m.boundary().lengths())? {
        let r = trace_from_boundary(&m, &bv, &opts.without_polyline())?;
        let (e, tt) = double_cover_exit(&m, &bv, &opts)?;
        let f = r.exit.unwrap();
        let len = m.boundary().lengths()[0];
        let ds = (f.s - e.s).rem_euclid(len);
        cover = cover
            .max(ds.min(len - ds))
            .max((f.theta - e.theta).abs())
            .max((r.travel_time.unwrap() - tt).abs());
    }

    let mut involution: f64 = 0.0;
    for s in [flat.clone(), bump(0.2), cosh.clone(), m.clone(), SurfaceModel::capped(1.0)?] {
        let table = build_lens_table(&s, &GridSpec::uniform(&s, 16, 9), &opts)?;
        let lengths = s.boundary().lengths();
        for rec in &table.records {
            let Some(out) = rec.output else { continue };
            let back = scattering(&s, &out.flipped(), &opts.without_polyline())?;
            let b = back.output.unwrap();
            if back.status != rec.status || b.component != rec.input.component {
                involution = f64::INFINITY;
                continue;
            }
            let ds = (b.s - rec.input.s).rem_euclid(lengths[b.component]);
            involution = involution
                .max(ds.min(lengths[b.component] - ds))
                .max((b.theta + rec.input.theta).abs())
                .max((back.travel_time.unwrap() - rec.travel_time.unwrap()).abs());
        }
    }
    Ok(all(vec![
        outcome(lossless, "lens csv round-trip"),
        outcome(exact_ode < EXACT_ODE_TOL, format!("exact vs ode {exact_ode:.1e}")),
        outcome(cover < DOUBLE_COVER_TOL, format!("fold vs double cover {cover:.1e}")),
        outcome(involution < INVOLUTION_TOL, format!("involution {involution:.1e}")),
    ]))
}

type Check = fn() -> Result<Outcome>;

fn main() {
    let criteria: [(&str, Duration, Check); 9] = [
        ("1 mobius/cap scattering and pi offset", Duration::from_secs(10), c1_mobius_cap),
        ("2 bump family lens equivalence", Duration::from_secs(60), c2_bump_family),
        ("3 intersection difference", Duration::from_secs(60), c3_intersection_difference),
        ("4 crofton formula", Duration::from_secs(60), c4_crofton),
        ("5 santalo identity", Duration::from_secs(30), c5_santalo),
        ("6 length via crofton", Duration::from_secs(300), c6_length),
        ("7 jacobi invariant", Duration::from_secs(30), c7_jacobi),
        ("8 trapped-set structure", Duration::from_secs(120), c8_trapped),
        ("9 infrastructure", Duration::from_secs(120), c9_infrastructure),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, budget, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let (ok, detail) = match result {
            Ok(o) => (o.ok && took <= budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {detail} [{:.1}s / {}s]",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
