//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use anyhow::{ensure, Context, Result};
use nullcone::cone::{ConeGrid, ConePoint, Interval, PhiMap, WarpingFunction};
use nullcone::convergence::{
    epsilon_isometry, lift_correspondence, null_convergence_check, product_cone_space, sandwich_bounds,
    uniform_total_boundedness, SamplePairs, WarpingSequence,
};
use nullcone::curvature::{
    compute_k, concavity_check, sample_timelike_triangles, triangle_comparison, BoundDirection, Concavity,
    TimelikeTriangle, TriangleBounds,
};
use nullcone::lpls::{
    check_anti_lipschitz, check_time_function, properties_report, random_minkowski_instance, validate_pls,
    DiscretePreLengthSpace, GeneralizedTimeFunction, PlsViolation,
};
use nullcone::metric::{gh_distance_exact, quadruple_curvature_check, Correspondence, FiniteLengthSpace};
use nullcone::SquareMatrix;

type Cone = ConeGrid<f64>;
type Criterion = (&'static str, fn() -> Result<String>);
type Space = FiniteLengthSpace<f64>;

/// Slack for comparisons the library states as exact.
const EXACT: f64 = 1e-9;
const SEED: u64 = 20;

fn interval(a: f64, b: f64) -> Interval<f64> {
    Interval::new(a, b).unwrap()
}

fn constant(c: f64) -> WarpingFunction<f64> {
    WarpingFunction::constant(c, interval(0.0, 1.0)).unwrap()
}

fn path_cone(fiber_points: usize, n_t: usize, f: WarpingFunction<f64>) -> Cone {
    ConeGrid::new(Space::uniform_path(fiber_points, 1.0).unwrap(), f, n_t).unwrap()
}

fn sampled(g: &Cone) -> Vec<usize> {
    SamplePairs::default_for(g.len(), SEED).sources(g.len())
}

/// Comparison of a square path cone against `max(c * |dx|, |dt|)`, with
/// fiber and time steps equal.
#[derive(Debug, Default)]
struct ClosedForm {
    pairs: usize,
    causal_max: f64,
    noncausal_max: f64,
    below: usize,
    /// Largest closed-form value.
    diameter: f64,
    /// Largest relative error over pairs at distance at least 0.5.
    far_relative: f64,
}

fn closed_form(g: &Cone, c: usize, sources: &[usize]) -> ClosedForm {
    let m = g.fiber_len();
    let h = g.step();
    assert_eq!(m, g.n_levels());
    let mut r = ClosedForm::default();
    g.visit_null_distance_rows(sources, |s, row| {
        let (i, a) = (s / m, s % m);
        for (k, chunk) in row.chunks(m).enumerate() {
            let dt = i.abs_diff(k);
            for (x, &d) in chunk.iter().enumerate() {
                let dx = c * a.abs_diff(x);
                let want = dx.max(dt) as f64 * h;
                let err = d - want;
                if dx <= dt {
                    r.causal_max = r.causal_max.max(err.abs());
                } else {
                    r.noncausal_max = r.noncausal_max.max(err.abs());
                }
                if err < -EXACT {
                    r.below += 1;
                }
                r.diameter = r.diameter.max(want);
                if want >= 0.5 {
                    r.far_relative = r.far_relative.max(err.abs() / want);
                }
            }
        }
        r.pairs += row.len();
    });
    r
}

// ---------------------------------------------------------------- 1-2

fn c1() -> Result<String> {
    let start = Instant::now();
    let g = path_cone(201, 200, constant(1.0));
    let all: Vec<usize> = (0..g.len()).collect();
    let coarse = closed_form(&g, 1, &all);
    let secs = start.elapsed().as_secs_f64();
    let fine_grid = path_cone(401, 400, constant(1.0));
    let fine = closed_form(&fine_grid, 1, &sampled(&fine_grid));
    let ratio = coarse.noncausal_max / fine.noncausal_max;
    let detail = format!(
        "{} pairs in {secs:.1} s; causal max err {:.1e}; non-causal max err {:.4} (n_t 200), {:.4} (n_t 400); halving ratio {ratio:.3}",
        coarse.pairs, coarse.causal_max, coarse.noncausal_max, fine.noncausal_max
    );
    ensure!(coarse.causal_max <= 1e-9, "causal error: {detail}");
    ensure!(coarse.noncausal_max <= 2.0 / 200.0, "non-causal error: {detail}");
    ensure!((2.0 / 1.5..=2.0 * 1.5).contains(&ratio), "halving: {detail}");
    ensure!(secs <= 60.0, "runtime: {detail}");
    Ok(detail)
}

fn c2() -> Result<String> {
    let g = path_cone(201, 200, constant(2.0));
    let all: Vec<usize> = (0..g.len()).collect();
    let coarse = closed_form(&g, 2, &all);
    let fine_grid = path_cone(401, 400, constant(2.0));
    let fine = closed_form(&fine_grid, 2, &sampled(&fine_grid));
    let end = g.null_distance_row(g.index(0, 0))[g.index(0, 200)];
    let (rel200, rel400) = (coarse.noncausal_max / coarse.diameter, fine.noncausal_max / fine.diameter);
    let detail = format!(
        "sup err / diameter {:.4} (n_t 200, all pairs), {:.4} (n_t 400, sampled); pairs at d >= 0.5: max rel err {:.4}, {:.4}; endpoints {end}",
        rel200, rel400, coarse.far_relative, fine.far_relative
    );
    ensure!(coarse.below + fine.below == 0, "values below the closed form: {detail}");
    ensure!(coarse.causal_max <= EXACT && fine.causal_max <= EXACT, "causal error: {detail}");
    ensure!(rel200 <= 0.02 && rel400 <= 0.01, "{detail}");
    ensure!((end - 2.0).abs() <= 0.02 * 2.0, "{detail}");
    Ok(detail)
}

// ---------------------------------------------------------------- 3-4

fn c3() -> Result<String> {
    let members = [4usize, 10, 100].iter().map(|&j| (j, constant(1.0 + 1.0 / j as f64))).collect();
    let seq = WarpingSequence::new(members, constant(1.0), 1.0)?;
    let fiber = Space::uniform_path(201, 1.0)?;
    let pairs = SamplePairs::default_for(201 * 201, SEED);
    let r = null_convergence_check(&seq, &fiber, 200, &pairs)?;
    ensure!(r.checked.len() == 3, "excluded members: {:?}", r.excluded);
    let violations: usize = r.checked.iter().map(|m| m.lower_violations + m.upper_violations).sum();
    let dev: Vec<f64> = r.checked.iter().map(|m| m.sup_deviation).collect();
    let detail = format!(
        "{} pairs per member, {violations} violations; sup deviation j=4,10,100: {:.4}, {:.4}, {:.4}",
        r.checked[0].pairs, dev[0], dev[1], dev[2]
    );
    ensure!(r.sandwich_holds() && violations == 0, "{detail}");
    ensure!(dev[2] < dev[1], "{detail}");
    Ok(detail)
}

fn c4() -> Result<String> {
    let g = path_cone(201, 200, WarpingFunction::affine(1.0, 2.0, interval(0.0, 1.0))?);
    let r = g.sandwich_report(&sampled(&g))?;
    let excess = r.worst_upper_excess.map_or(0.0, |w| w.2);
    let detail = format!(
        "{} pairs; lower violations {}; worst upper excess {excess:.6} against {:.6}",
        r.pairs_checked, r.lower_violations, r.upper_tolerance
    );
    ensure!(r.upper_tolerance <= 2.0 / 200.0 + EXACT, "{detail}");
    ensure!(r.lower_violations == 0 && r.pass(), "{detail}");
    Ok(detail)
}

// ---------------------------------------------------------------- 5-7

fn every_correspondence(na: usize, nb: usize) -> Vec<Correspondence> {
    let cells: Vec<(usize, usize)> = (0..na).flat_map(|i| (0..nb).map(move |j| (i, j))).collect();
    (1u32..1 << cells.len())
        .filter_map(|mask| {
            let pairs: Vec<_> = cells.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &p)| p).collect();
            Correspondence::new(pairs, na, nb).ok()
        })
        .collect()
}

fn c5() -> Result<String> {
    let spaces = [
        Space::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])?,
        Space::from_rows(&[vec![0.0, 1.3], vec![1.3, 0.0]])?,
        Space::from_rows(&[vec![0.0, 1.0, 1.5], vec![1.0, 0.0, 0.7], vec![1.5, 0.7, 0.0]])?,
        Space::line(&[0.0, 0.4, 2.0])?,
    ];
    let cone = |s: &Space| ConeGrid::new(s.clone(), constant(1.0), 4).unwrap();
    let mut checked = 0;
    for a in &spaces {
        for b in &spaces {
            let (ca, cb) = (cone(a), cone(b));
            for r in every_correspondence(a.len(), b.len()) {
                let l = lift_correspondence(&r, &ca, &cb)?;
                ensure!(l.lifted_distortion <= l.base_distortion, "{:?}: {} > {}", r.pairs(), l.lifted_distortion, l.base_distortion);
                checked += 1;
            }
        }
    }
    let times = [0.0, 0.4];
    let mut gh = Vec::new();
    for (a, b) in [(&spaces[0], &spaces[1]), (&spaces[2], &spaces[1]), (&spaces[3], &spaces[0])] {
        let base = gh_distance_exact(a, b)?.distance;
        let lifted = gh_distance_exact(&product_cone_space(a, &times)?, &product_cone_space(b, &times)?)?.distance;
        ensure!(lifted <= base + 1e-9, "lifted GH {lifted} > fiber GH {base}");
        gh.push(format!("{lifted:.3} <= {base:.3}"));
    }
    Ok(format!("{checked} correspondences; lifted GH {}", gh.join(", ")))
}

fn c6() -> Result<String> {
    let fiber = Space::uniform_path(11, 1.0)?;
    let g = ConeGrid::new(fiber.clone(), constant(1.0), 10)?;
    let gn = ConeGrid::new(fiber, constant(1.05), 10)?;
    let eps = sandwich_bounds(1.0, 0.05, 1.0).1 - 1.0;
    let iso = epsilon_isometry(&g, &gn, 0.5, g.index(5, 5), eps)?;
    let detail = format!(
        "eps {eps:.3}; distortion {:.4} <= {:.4}; net radius {:.4}; GH bound {:.4} <= {:.4}",
        iso.distortion,
        3.0 * eps,
        iso.net_radius,
        iso.gh_bound,
        6.0 * eps
    );
    ensure!(iso.pass() && iso.distortion <= 3.0 * eps && iso.net_radius <= eps, "{detail}");
    ensure!(iso.gh_bound <= 6.0 * eps, "{detail}");
    Ok(detail)
}

fn c7() -> Result<String> {
    let fiber = Space::uniform_path(31, 1.0)?;
    let family = [constant(1.0), constant(2.0), constant(3.0)];
    let c = uniform_total_boundedness(&family, 3.0, &fiber, 30, 0.25)?;
    let worst: Vec<String> = c.members.iter().map(|m| format!("{:.4}", m.worst.1)).collect();
    let detail = format!("{} net points; mesh {}; worst distances {}", c.cardinality(), c.mesh, worst.join(", "));
    ensure!((c.mesh - 0.75).abs() <= 1e-15, "{detail}");
    ensure!(c.members.len() == 3 && c.all_certified(), "{detail}");
    Ok(detail)
}

// ---------------------------------------------------------------- 8-10

fn c8() -> Result<String> {
    let i = interval(0.0, 1.0);
    let (mut endpoint, mut nullity, mut length) = (0.0f64, 0.0f64, 0.0f64);
    let mut curves = 0;
    for f in [WarpingFunction::constant(1.0, i)?, WarpingFunction::affine(1.0, 1.0, i)?] {
        let g = path_cone(11, 10, f);
        let w = g.warping();
        for (p, q) in [
            (ConePoint::new(0.0, 0), ConePoint::new(0.0, 5)),
            (ConePoint::new(0.1, 3), ConePoint::new(0.6, 3)),
            (ConePoint::new(0.0, 0), ConePoint::new(0.2, 9)),
            (ConePoint::new(0.9, 9), ConePoint::new(0.2, 1)),
            (ConePoint::new(0.0, 0), ConePoint::new(1.0, 10)),
            (ConePoint::new(0.5, 10), ConePoint::new(0.5, 0)),
        ] {
            let c = g.null_curve(p, q)?;
            ensure!(c.ends_on_target_fiber(), "{p:?} -> {q:?} misses the target fiber");
            endpoint = endpoint.max(c.endpoint_time_error(w));
            nullity = nullity.max(c.max_nullity_defect(w, 64));
            length = length.max((c.null_length() - c.total_variation(w, 64)).abs());
            curves += 1;
        }
    }
    let detail = format!("{curves} curves; endpoint {endpoint:.1e}, nullity {nullity:.1e}, length gap {length:.1e}");
    ensure!(endpoint <= 1e-6 && nullity <= 1e-6 && length <= 1e-9, "{detail}");
    Ok(detail)
}

fn c9() -> Result<String> {
    let mut errors = Vec::new();
    for n_t in [50usize, 100, 200] {
        let g = path_cone(5 * n_t + 1, n_t, constant(1.0));
        let rho = g.time_separation_between(g.index(0, 0), g.index(n_t, 3 * n_t));
        errors.push((n_t, rho, (rho - 0.8).abs()));
    }
    let detail = errors.iter().map(|(n, r, e)| format!("n_t {n}: {r:.6} (err {e:.1e})")).collect::<Vec<_>>().join("; ");
    ensure!(errors[2].2 <= 0.02 * 0.8, "{detail}");
    ensure!(errors.windows(2).all(|w| w[1].2 <= w[0].2), "not monotone: {detail}");
    Ok(detail)
}

fn c10() -> Result<String> {
    let g = path_cone(21, 20, WarpingFunction::affine(1.0, 2.0, interval(0.0, 1.0))?);
    let all: Vec<usize> = (0..g.len()).collect();
    let base = g.null_distance_rows(&all);
    let (doubled, rep) = g.null_distance_phi_rows(&PhiMap::affine(2.0, 5.0)?, &all)?;
    let mut worst = 0.0f64;
    for (a, b) in doubled.iter().flatten().zip(base.iter().flatten()) {
        worst = worst.max((a - 2.0 * b).abs() / (1.0 + b));
    }
    ensure!(rep.pass() && worst <= 1e-12, "affine phi: relative error {worst:.1e}, {rep:?}");
    let mut parts = vec![format!("2t+5 doubles to {worst:.1e}")];
    let phis = [
        ("t+t^2/2", PhiMap::polynomial(vec![0.0, 1.0, 0.5], 0.0, 1.0)?),
        ("exp", PhiMap::new(f64::exp, f64::exp, 1f64.exp(), 1.0)?),
    ];
    for (name, phi) in phis {
        let (_, rep) = g.null_distance_phi_rows(&phi, &all)?;
        ensure!(rep.causal_max_error == 0.0, "{name}: causal error {}", rep.causal_max_error);
        ensure!(rep.gap_violations == 0 && rep.noncausal_pairs > 0, "{name}: {rep:?}");
        parts.push(format!("{name}: {} causal exact, {} non-causal within the gap bound", rep.causal_pairs, rep.noncausal_pairs));
    }
    Ok(parts.join("; "))
}

// ---------------------------------------------------------------- 11-12

fn c11() -> Result<String> {
    let tol = 0.05;
    let strip = path_cone(801, 40, constant(1.0));
    let bounds = TriangleBounds { side_cap: None, min_steepness: 0.5 };
    let sample = sample_timelike_triangles(&strip, 10, 42, 0.0, bounds)?;
    ensure!(sample.triangles.len() == 10, "drew {} triangles: {:?}", sample.triangles.len(), sample.diagnostic);
    let mut worst = 0.0f64;
    for t in &sample.triangles {
        for dir in [BoundDirection::Lower, BoundDirection::Upper] {
            let v = triangle_comparison(&strip, t, 0.0, dir, 5, tol)?;
            ensure!(v.pass && v.probes.len() == 5, "flat triangle {:?} fails {dir:?}", t.vertices);
            worst = v.probes.iter().fold(worst, |m, p| m.max((p.rho - p.rho_model).abs()));
        }
    }
    ensure!(worst <= tol, "flat margin {worst}");

    let legs = 100;
    let tripod = ConeGrid::new(Space::tripod(legs, 0.4)?, WarpingFunction::constant(1.0, interval(0.0, 2.0))?, 100)?;
    let tip = |leg: usize| (leg + 1) * legs;
    let tri = TimelikeTriangle::from_vertices(&tripod, [tripod.index(0, tip(0)), tripod.index(50, tip(1)), tripod.index(100, tip(2))])?;
    let v = triangle_comparison(&tripod, &tri, 0.0, BoundDirection::Lower, 5, tol)?;
    ensure!(!v.pass, "tripod passes the lower bound");
    let gap = v.probes.iter().map(|p| p.rho - p.rho_model).fold(f64::MIN, f64::max);

    let cosh = WarpingFunction::cosh(1.0, 1.0, 0.0, interval(0.0, 1.0))?;
    let concave = concavity_check(&cosh, 1.0, Concavity::Concave)?;
    let k = compute_k(&cosh, 1.0);
    ensure!(concave.pass, "cosh is not (-1)-concave: {concave:?}");
    ensure!((k - 1.0).abs() <= 1e-12, "compute_K = {k}");
    Ok(format!("flat max |rho - rho'| {worst:.4} <= {tol}; tripod excess {gap:.3}; cosh K = {k}"))
}

fn c12() -> Result<String> {
    let tripod = Space::tripod(1, 1.0)?;
    let v = quadruple_curvature_check(&tripod, 0.0, 1e-9)?;
    let sum = v.worst.context("no quadruple checked")?.angle_sum;
    ensure!(!v.pass && (sum - 3.0 * PI).abs() <= 1e-12, "tripod: pass {} angle sum {sum}", v.pass);
    let line = quadruple_curvature_check(&Space::line(&[0.0, 1.0, 2.0, 3.0])?, 0.0, 1e-9)?;
    ensure!(line.pass && line.quadruples_checked > 0, "collinear quadruples fail: {line:?}");
    Ok(format!("tripod angle sum {:.12} pi; {} collinear quadruples pass", sum / PI, line.quadruples_checked))
}

// ---------------------------------------------------------------- 13

fn pls(points: &[f64], causal: &[(usize, usize)], chrono: &[(usize, usize)], rho: &[(usize, usize, f64)]) -> DiscretePreLengthSpace<f64> {
    let n = points.len();
    let mut r = SquareMatrix::filled(n, 0.0);
    for &(i, j, v) in rho {
        r[(i, j)] = v;
    }
    DiscretePreLengthSpace::new(
        Space::line(points).unwrap(),
        SquareMatrix::from_fn(n, |i, j| causal.contains(&(i, j))),
        SquareMatrix::from_fn(n, |i, j| chrono.contains(&(i, j))),
        r,
    )
    .unwrap()
}

fn c13() -> Result<String> {
    for seed in 0..100u64 {
        let n = 1 + (seed % 8) as usize;
        let (s, tau) = random_minkowski_instance::<f64>(n, seed)?;
        ensure!(validate_pls(&s).is_valid(), "seed {seed}: {:?}", validate_pls(&s).violations);
        ensure!(check_time_function(&s, &tau)?.pass, "seed {seed}: time function");
        let props = properties_report(&s, &tau)?;
        ensure!(props.all_pass(), "seed {seed}: {props:?}");
    }

    let refl = [(0, 0), (1, 1), (2, 2)];
    let with = |extra: &[(usize, usize)]| refl.iter().chain(extra).copied().collect::<Vec<_>>();
    let chain = [(0, 1), (1, 2), (0, 2)];
    let x = [0.0, 1.0, 2.0];
    let rho_chain = [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 2.0)];
    type Expect = fn(&PlsViolation<f64>) -> bool;
    let broken: [(&str, DiscretePreLengthSpace<f64>, Expect); 7] = [
        ("causal not reflexive", pls(&x, &chain, &chain, &rho_chain), |v| {
            matches!(v, PlsViolation::CausalNotReflexive { i: 0 })
        }),
        ("causal not transitive", pls(&x, &with(&chain[..2]), &chain[..2], &rho_chain[..2]), |v| {
            matches!(v, PlsViolation::CausalNotTransitive { i: 0, j: 1, k: 2 })
        }),
        ("chrono not causal", pls(&x, &refl, &[(0, 1)], &[(0, 1, 1.0)]), |v| {
            matches!(v, PlsViolation::ChronoNotCausal { i: 0, j: 1 })
        }),
        ("chrono not transitive", pls(&x, &with(&chain), &chain[..2], &rho_chain[..2]), |v| {
            matches!(v, PlsViolation::ChronoNotTransitive { i: 0, j: 1, k: 2 })
        }),
        ("negative rho", pls(&x, &with(&chain), &chain, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 2.0), (1, 0, -0.5)]), |v| {
            matches!(v, PlsViolation::NegativeRho { i: 1, j: 0, .. })
        }),
        ("rho without chronology", pls(&x, &with(&chain), &chain[..1], &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 2.0)]), |v| {
            matches!(v, PlsViolation::RhoChronoMismatch { i: 1, j: 2, chrono: false, .. })
        }),
        ("reverse triangle", pls(&x, &with(&chain), &chain, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.5)]), |v| {
            matches!(v, PlsViolation::ReverseTriangle { i: 0, j: 1, k: 2, .. })
        }),
    ];
    for (name, s, expect) in &broken {
        let r = validate_pls(s);
        ensure!(r.violations.iter().any(expect), "{name}: witness missing from {:?}", r.violations);
    }

    let pair = pls(&[0.0, 1.0], &[(0, 0), (1, 1), (0, 1)], &[(0, 1)], &[(0, 1, 1.0)]);
    let tf = check_time_function(&pair, &GeneralizedTimeFunction::new(vec![1.0, 0.0]))?;
    ensure!(!tf.pass && tf.witness == Some((0, 1)), "decreasing tau: {tf:?}");
    let steep = SquareMatrix::from_fn(2, |i, j| if i == j { 0.0 } else { 3.0 });
    let al = check_anti_lipschitz(&pair, &GeneralizedTimeFunction::new(vec![0.0, 1.0]), &[0, 1], &steep)?;
    ensure!(!al.pass && al.witness == Some((0, 1)), "anti-Lipschitz: {al:?}");
    Ok(format!("100 random instances pass; {} broken axioms, time function and anti-Lipschitz witnesses caught", broken.len()))
}

// ---------------------------------------------------------------- 14

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn run_suite(out: &Path) -> Result<BTreeMap<String, Vec<u8>>> {
    let mut names: Vec<PathBuf> = std::fs::read_dir(scenario_dir())?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    names.retain(|p| p.extension().is_some_and(|e| e == "json"));
    names.sort();
    let mut files = BTreeMap::new();
    for cfg in &names {
        let stem = cfg.file_stem().unwrap().to_string_lossy().into_owned();
        let dir = out.join(&stem);
        let o = Command::new(env!("CARGO_BIN_EXE_ncone")).arg("--config").arg(cfg).arg("--out").arg(&dir).output()?;
        ensure!(o.status.code() == Some(0), "{stem}: exit {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr));
        for e in std::fs::read_dir(&dir)? {
            let e = e?;
            files.insert(format!("{stem}/{}", e.file_name().to_string_lossy()), std::fs::read(e.path())?);
        }
    }
    Ok(files)
}

fn c14() -> Result<String> {
    let tmp = tempfile::tempdir()?;
    let first = run_suite(&tmp.path().join("first"))?;
    let second = run_suite(&tmp.path().join("second"))?;
    let commands: std::collections::BTreeSet<_> = first.keys().filter_map(|k| k.split('/').next()).collect();
    ensure!(commands.len() == 9, "suite covers {} commands", commands.len());
    ensure!(first.keys().eq(second.keys()), "different file sets");
    let differing: Vec<_> = first.iter().filter(|(k, v)| second[*k] != **v).map(|(k, _)| k.clone()).collect();
    ensure!(differing.is_empty(), "differing artifacts: {differing:?}");
    let bytes: usize = first.values().map(Vec::len).sum();
    Ok(format!("{} scenarios, {} artifacts, {bytes} bytes identical", commands.len(), first.len()))
}

// ---------------------------------------------------------------- driver

fn main() {
    let criteria: [Criterion; 14] = [
        ("product closed form", c1),
        ("constant warping", c2),
        ("convergence sandwich", c3),
        ("affine sandwich", c4),
        ("GH lifting", c5),
        ("3eps-isometry", c6),
        ("compactness nets", c7),
        ("null curves", c8),
        ("time separation", c9),
        ("phi time functions", c10),
        ("triangle comparison", c11),
        ("quadruple condition", c12),
        ("pre-length suite", c13),
        ("determinism", c14),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let n = k + 1;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(anyhow::anyhow!("panic: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS #{n} {name} [{secs:.1} s]: {detail}"),
            Err(e) => {
                failed += 1;
                println!("FAIL #{n} {name} [{secs:.1} s]: {e:#}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
