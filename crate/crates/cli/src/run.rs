//! Command dispatch and artifact writing.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use nullcone::cone::{ConeGrid, ConePoint, FiberPosition, Interval, PhiMap, WarpingFunction, MATRIX_POINT_LIMIT};
use nullcone::convergence::{null_convergence_check, uniform_total_boundedness, SamplePairs, WarpingSequence};
use nullcone::curvature::{
    persistence_experiment, sample_timelike_triangles, triangle_comparison, BoundDirection, CurvatureVerdict,
    PersistenceConfig, PersistenceMode, TimelikeTriangle, TriangleBounds,
};
use nullcone::lpls::{
    check_time_function, properties_report, random_minkowski_instance, validate_pls, DiscretePreLengthSpace,
    GeneralizedTimeFunction, PlsViolation, PropertyReport, Verdict,
};
use nullcone::{gh_distance_exact, intrinsic_metric, validate_metric, Cone, Matrix, MetricViolation, Side, Space, SquareMatrix};
use serde_json::{json, Value};

use crate::io::{fmt_f64, long_matrix, read_edge_csv, read_matrix_csv, sha256_file, Table};
use crate::scenario::*;
use crate::{InputError, EXIT_CHECK_FAILED, EXIT_PASS};

/// Result of a run before anything is written.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    pub report: Value,
    /// `(file name, table)` in write order.
    pub tables: Vec<(String, Table)>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            EXIT_PASS
        } else {
            EXIT_CHECK_FAILED
        }
    }
}

fn num(v: f64) -> String {
    fmt_f64(v)
}

fn space(sc: &Scenario, spec: &SpaceSpec) -> anyhow::Result<Space> {
    Ok(match spec {
        SpaceSpec::MatrixCsv(p) => {
            let path = sc.resolve(p);
            let (ids, m) = read_matrix_csv(&path)?;
            let report = validate_metric(&m);
            if let Some(v) = report.violations.first() {
                return Err(InputError::new(path.display().to_string(), format!("not a metric: {}", violation_text(v, &ids))).into());
            }
            Space::from_matrix(ids, m)?
        }
        SpaceSpec::EdgeCsv(p) => {
            let path = sc.resolve(p);
            let (n, edges) = read_edge_csv(&path)?;
            intrinsic_metric(n, &edges).with_context(|| path.display().to_string())?
        }
        SpaceSpec::UniformPath { n, length } => Space::uniform_path(*n, *length)?,
        SpaceSpec::Tripod { leg_points, leg_length } => Space::tripod(*leg_points, *leg_length)?,
        SpaceSpec::Cycle { n, circumference } => Space::cycle(*n, *circumference)?,
        SpaceSpec::Line(xs) => Space::line(xs)?,
    })
}

fn interval(iv: [f64; 2]) -> anyhow::Result<Interval<f64>> {
    Ok(Interval::new(iv[0], iv[1])?)
}

fn warping(spec: &WarpingSpec, dom: Interval<f64>) -> anyhow::Result<WarpingFunction<f64>> {
    Ok(match spec {
        WarpingSpec::Constant { value } => WarpingFunction::constant(*value, dom)?,
        WarpingSpec::Affine { intercept, slope } => WarpingFunction::affine(*intercept, *slope, dom)?,
        WarpingSpec::Exponential { scale, rate } => WarpingFunction::exponential(*scale, *rate, dom)?,
        WarpingSpec::Cosh { scale, rate, shift } => WarpingFunction::cosh(*scale, *rate, *shift, dom)?,
        WarpingSpec::Tabulated { knots, values } => WarpingFunction::tabulated(knots.clone(), values.clone(), dom)?,
    })
}

fn cone(sc: &Scenario, spec: &ConeSpec) -> anyhow::Result<Cone> {
    let fiber = space(sc, &spec.fiber)?;
    let w = warping(&spec.warping, interval(spec.interval)?)?;
    Ok(ConeGrid::new(fiber, w, spec.n_t)?)
}

fn node_id(g: &Cone, v: usize) -> String {
    format!("{}:{}", g.level_of(v), g.fiber().ids()[g.fiber_of(v)])
}

fn node_json(g: &Cone, v: usize) -> Value {
    let p = g.point(v);
    json!({"node": v, "id": node_id(g, v), "t": p.t, "x": g.fiber().ids()[p.x]})
}

fn locate(g: &Cone, p: &PointSpec) -> anyhow::Result<usize> {
    if p.x >= g.fiber_len() {
        bail!("fiber index {} out of range for {} points", p.x, g.fiber_len());
    }
    Ok(g.locate(ConePoint::new(p.t, p.x))?)
}

fn sources_for(g: &Cone, explicit: &Option<Vec<usize>>, seed: u64) -> anyhow::Result<Vec<usize>> {
    let n = g.len();
    match explicit {
        Some(s) => {
            if let Some(bad) = s.iter().find(|&&v| v >= n) {
                bail!("source node {bad} out of range for {n} grid nodes");
            }
            Ok(s.clone())
        }
        None if n <= MATRIX_POINT_LIMIT => Ok((0..n).collect()),
        None => Ok(SamplePairs::default_for(n, seed).sources(n)),
    }
}

/// Runs the scenario; input problems surface as errors, failed checks as `pass = false`.
pub fn run(sc: &Scenario) -> anyhow::Result<Outcome> {
    let (pass, mut report, tables) = match &sc.command {
        Command::Validate(p) => validate(sc, p)?,
        Command::Nulldist(p) => nulldist(sc, p)?,
        Command::Timesep(p) => timesep(sc, p)?,
        Command::Nullcurve(p) => nullcurve(sc, p)?,
        Command::Converge(p) => converge(sc, p)?,
        Command::Gh(p) => gh(sc, p)?,
        Command::Net(p) => net(sc, p)?,
        Command::Curvature(p) => curvature(sc, p)?,
        Command::Persist(p) => persist(sc, p)?,
    };
    let obj = report.as_object_mut().expect("reports are objects");
    obj.insert("command".into(), json!(sc.command.name()));
    obj.insert("status".into(), json!(if pass { "pass" } else { "fail" }));
    Ok(Outcome { pass, report, tables })
}

type Parts = (bool, Value, Vec<(String, Table)>);

// ---------------------------------------------------------------- validate

fn violation_text(v: &MetricViolation<f64>, ids: &[String]) -> String {
    match *v {
        MetricViolation::NonZeroDiagonal { i, value } => format!("d({0}, {0}) = {value}", ids[i]),
        MetricViolation::NonPositive { i, j, value } => format!("d({}, {}) = {value}", ids[i], ids[j]),
        MetricViolation::Asymmetric { i, j, forward, backward } => {
            format!("d({0}, {1}) = {forward} but d({1}, {0}) = {backward}", ids[i], ids[j])
        }
        MetricViolation::Triangle { i, j, k, excess } => {
            format!("d({}, {}) exceeds the path through {} by {excess}", ids[i], ids[j], ids[k])
        }
    }
}

fn metric_violation_json(v: &MetricViolation<f64>, ids: &[String]) -> Value {
    let names = |idx: &[usize]| idx.iter().map(|&i| ids[i].clone()).collect::<Vec<_>>();
    match *v {
        MetricViolation::NonZeroDiagonal { i, value } => json!({"kind": "nonzero_diagonal", "points": names(&[i]), "value": value}),
        MetricViolation::NonPositive { i, j, value } => json!({"kind": "nonpositive", "points": names(&[i, j]), "value": value}),
        MetricViolation::Asymmetric { i, j, forward, backward } => {
            json!({"kind": "symmetry", "points": names(&[i, j]), "forward": forward, "backward": backward})
        }
        MetricViolation::Triangle { i, j, k, excess } => json!({"kind": "triangle", "points": names(&[i, j, k]), "excess": excess}),
    }
}

fn pls_violation_json(v: &PlsViolation<f64>) -> Value {
    match *v {
        PlsViolation::CausalNotReflexive { i } => json!({"kind": "causal_not_reflexive", "points": [i]}),
        PlsViolation::CausalNotTransitive { i, j, k } => json!({"kind": "causal_not_transitive", "points": [i, j, k]}),
        PlsViolation::ChronoNotCausal { i, j } => json!({"kind": "chrono_not_causal", "points": [i, j]}),
        PlsViolation::ChronoNotTransitive { i, j, k } => json!({"kind": "chrono_not_transitive", "points": [i, j, k]}),
        PlsViolation::NegativeRho { i, j, value } => json!({"kind": "negative_rho", "points": [i, j], "value": value}),
        PlsViolation::RhoChronoMismatch { i, j, rho, chrono } => {
            json!({"kind": "rho_chrono_mismatch", "points": [i, j], "rho": rho, "chrono": chrono})
        }
        PlsViolation::ReverseTriangle { i, j, k, deficit } => json!({"kind": "reverse_triangle", "points": [i, j, k], "deficit": deficit}),
    }
}

fn verdict_json<W: serde::Serialize>(v: &Verdict<W>) -> Value {
    json!({"pass": v.pass, "witness": v.witness})
}

fn properties_json(r: &PropertyReport) -> Value {
    json!({
        "all_pass": r.all_pass(),
        "lower_bound": verdict_json(&r.lower_bound),
        "causal_equality": verdict_json(&r.causal_equality),
        "diamond_time": verdict_json(&r.diamond_time),
        "diamond_bound": verdict_json(&r.diamond_bound),
        "scaling": verdict_json(&r.scaling),
    })
}

fn validate(sc: &Scenario, p: &ValidateParams) -> anyhow::Result<Parts> {
    if p.space.is_none() && p.pls.is_none() {
        bail!(InputError::new("params", "validate needs `space`, `pls` or both"));
    }
    let mut pass = true;
    let mut report = json!({});
    let mut table = Table::new(&["object", "kind", "points", "value"]);
    if let Some(spec) = &p.space {
        let (ids, m): (Vec<String>, Matrix) = match spec {
            SpaceSpec::MatrixCsv(f) => read_matrix_csv(&sc.resolve(f))?,
            other => {
                let s = space(sc, other)?;
                (s.ids().to_vec(), s.matrix().clone())
            }
        };
        let r = validate_metric(&m);
        pass &= r.is_valid();
        let witnesses: Vec<Value> = r.violations.iter().map(|v| metric_violation_json(v, &ids)).collect();
        for w in &witnesses {
            table.push(vec!["metric".into(), w["kind"].as_str().unwrap_or_default().into(), points_cell(w), value_cell(w)]);
        }
        report["metric"] = json!({"points": ids.len(), "valid": r.is_valid(), "violations": witnesses});
    }
    if let Some(spec) = &p.pls {
        let (s, tau): (DiscretePreLengthSpace<f64>, Option<GeneralizedTimeFunction<f64>>) = match spec {
            PlsSpec::Inline { base, causal, chrono, rho, tau } => {
                let b = space(sc, base)?;
                let s = DiscretePreLengthSpace::new(
                    b,
                    SquareMatrix::from_rows(causal).context("causal")?,
                    SquareMatrix::from_rows(chrono).context("chrono")?,
                    SquareMatrix::from_rows(rho).context("rho")?,
                )?;
                (s, tau.clone().map(GeneralizedTimeFunction::new))
            }
            PlsSpec::RandomMinkowski { n } => {
                let (s, tau) = random_minkowski_instance(*n, sc.seed)?;
                (s, Some(tau))
            }
        };
        let r = validate_pls(&s);
        pass &= r.is_valid();
        let witnesses: Vec<Value> = r.violations.iter().map(pls_violation_json).collect();
        for w in &witnesses {
            table.push(vec!["pls".into(), w["kind"].as_str().unwrap_or_default().into(), points_cell(w), value_cell(w)]);
        }
        let mut entry = json!({"points": s.len(), "valid": r.is_valid(), "violations": witnesses});
        if let Some(tau) = tau {
            let tf = check_time_function(&s, &tau)?;
            pass &= tf.pass;
            entry["time_function"] = verdict_json(&tf);
            if tf.pass && r.is_valid() {
                let props = properties_report(&s, &tau)?;
                pass &= props.all_pass();
                entry["properties"] = properties_json(&props);
            }
        }
        report["pls"] = entry;
    }
    Ok((pass, report, vec![("violations.csv".into(), table)]))
}

fn points_cell(w: &Value) -> String {
    w["points"]
        .as_array()
        .map(|a| a.iter().map(|v| v.as_str().map_or_else(|| v.to_string(), str::to_string)).collect::<Vec<_>>().join(" "))
        .unwrap_or_default()
}

fn value_cell(w: &Value) -> String {
    ["value", "excess", "deficit", "rho", "forward"]
        .iter()
        .find_map(|k| w[*k].as_f64())
        .map(num)
        .unwrap_or_default()
}

// ---------------------------------------------------------------- nulldist

fn phi_map(spec: &PhiSpec, iv: [f64; 2]) -> anyhow::Result<PhiMap<f64>> {
    Ok(match spec {
        PhiSpec::Affine { lambda, c } => PhiMap::affine(*lambda, *c)?,
        PhiSpec::Polynomial { coeffs } => PhiMap::polynomial(coeffs.clone(), iv[0], iv[1])?,
    })
}

fn worst_json(g: &Cone, w: Option<(usize, usize, f64)>) -> Value {
    match w {
        Some((p, q, v)) => json!({"p": node_id(g, p), "q": node_id(g, q), "value": v}),
        None => Value::Null,
    }
}

fn rows_table(g: &Cone, sources: &[usize], rows: &[Vec<f64>]) -> Table {
    let mut t = long_matrix();
    for (&s, row) in sources.iter().zip(rows) {
        let sid = node_id(g, s);
        for (v, &d) in row.iter().enumerate() {
            t.push(vec![sid.clone(), node_id(g, v), num(d)]);
        }
    }
    t
}

fn nulldist(sc: &Scenario, p: &NulldistParams) -> anyhow::Result<Parts> {
    let g = cone(sc, &p.cone)?;
    let sources = sources_for(&g, &p.sources, sc.seed)?;
    let rows = g.null_distance_rows(&sources);
    let b = g.bounds_report(&sources);
    let mut pass = b.exact_checks_pass();
    let mut report = json!({
        "grid": {"nodes": g.len(), "levels": g.n_levels(), "fiber_points": g.fiber_len(), "step": g.step()},
        "sources": sources.len(),
        "bounds": {
            "pairs_checked": b.pairs_checked,
            "lower_violations": b.lower_violations,
            "causal_mismatches": b.causal_mismatches,
            "definiteness_violations": b.definiteness_violations,
            "anti_lipschitz_violations": b.anti_lipschitz_violations,
            "exact_checks_pass": b.exact_checks_pass(),
            "worst_upper_excess": worst_json(&g, b.worst_upper_excess),
            "upper_tolerance": b.upper_tolerance,
            "upper_within_tolerance": b.upper_within_tolerance(),
            "refinement_hint": b.refinement_hint,
        },
    });
    let mut tables = vec![("nulldist.csv".to_string(), rows_table(&g, &sources, &rows))];
    if let Some(spec) = &p.phi {
        let phi = phi_map(spec, p.cone.interval)?;
        let (prow, eq) = g.null_distance_phi_rows(&phi, &sources)?;
        pass &= eq.pass();
        report["phi"] = json!({
            "pass": eq.pass(),
            "pairs_checked": eq.pairs_checked,
            "causal_pairs": eq.causal_pairs,
            "causal_max_error": eq.causal_max_error,
            "noncausal_pairs": eq.noncausal_pairs,
            "gap_violations": eq.gap_violations,
            "worst_gap": worst_json(&g, eq.worst_gap),
            "gap_tolerance": eq.gap_tolerance,
        });
        tables.push(("nulldist_phi.csv".into(), rows_table(&g, &sources, &prow)));
    }
    Ok((pass, report, tables))
}

// ---------------------------------------------------------------- timesep

fn timesep(sc: &Scenario, p: &TimesepParams) -> anyhow::Result<Parts> {
    let g = cone(sc, &p.cone)?;
    let sources = sources_for(&g, &p.sources, sc.seed)?;
    let rows = g.time_separation_rows(&sources);
    let mut t = long_matrix();
    let (mut order_violations, mut negative) = (0usize, 0usize);
    for r in &rows {
        let sid = node_id(&g, r.source);
        for (v, &val) in r.values.iter().enumerate() {
            if !r.reachable[v] {
                continue;
            }
            if !g.node_relation(r.source, v).is_causal() {
                order_violations += 1;
            }
            if val < 0.0 {
                negative += 1;
            }
            t.push(vec![sid.clone(), node_id(&g, v), num(val)]);
        }
    }
    let mut pt = Table::new(&["p_t", "p_x", "q_t", "q_x", "rho"]);
    let mut pairs = Vec::new();
    for [a, b] in &p.pairs {
        let (u, v) = (locate(&g, a)?, locate(&g, b)?);
        let rho = g.time_separation_between(u, v);
        pt.push(vec![num(a.t), a.x.to_string(), num(b.t), b.x.to_string(), num(rho)]);
        pairs.push(json!({"p": node_json(&g, u), "q": node_json(&g, v), "rho": rho}));
    }
    let pass = order_violations == 0 && negative == 0;
    let report = json!({
        "grid": {"nodes": g.len(), "levels": g.n_levels(), "fiber_points": g.fiber_len(), "step": g.step()},
        "sources": sources.len(),
        "reachable_outside_causal_future": order_violations,
        "negative_values": negative,
        "pairs": pairs,
    });
    Ok((pass, report, vec![("timesep.csv".into(), t), ("timesep_pairs.csv".into(), pt)]))
}

// ---------------------------------------------------------------- nullcurve

pub const NULLCURVE_ENDPOINT_TOL: f64 = 1e-6;
pub const NULLCURVE_NULLITY_TOL: f64 = 1e-6;
pub const NULLCURVE_LENGTH_TOL: f64 = 1e-9;

fn nullcurve(sc: &Scenario, p: &NullcurveParams) -> anyhow::Result<Parts> {
    if p.samples < 2 || p.per_segment == 0 {
        bail!(InputError::new("params", "`samples` must be at least 2 and `per_segment` positive"));
    }
    let g = cone(sc, &p.cone)?;
    let w = g.warping();
    let ids = g.fiber().ids();
    let mut t = Table::new(&["curve", "s", "t", "from", "to", "offset"]);
    let mut pass = true;
    let mut curves = Vec::new();
    for (c, [a, b]) in p.pairs.iter().enumerate() {
        for q in [a, b] {
            if q.x >= g.fiber_len() {
                bail!("fiber index {} out of range for {} points", q.x, g.fiber_len());
            }
        }
        let curve = g.null_curve(ConePoint::new(a.t, a.x), ConePoint::new(b.t, b.x))?;
        let endpoint = curve.endpoint_time_error(w);
        let nullity = curve.max_nullity_defect(w, p.per_segment);
        let length = curve.null_length();
        let variation = curve.total_variation(w, p.per_segment);
        let on_fiber = curve.ends_on_target_fiber();
        let ok = endpoint <= NULLCURVE_ENDPOINT_TOL
            && nullity <= NULLCURVE_NULLITY_TOL
            && (length - variation).abs() <= NULLCURVE_LENGTH_TOL
            && on_fiber;
        pass &= ok;
        let total = curve.parameter_length();
        for k in 0..p.samples {
            let s = total * k as f64 / (p.samples - 1) as f64;
            let (from, to, off) = match curve.fiber_position(s) {
                FiberPosition::Vertex(v) => (v, v, 0.0),
                FiberPosition::OnSegment { from, to, offset } => (from, to, offset),
            };
            t.push(vec![c.to_string(), num(s), num(curve.alpha(w, s)), ids[from].clone(), ids[to].clone(), num(off)]);
        }
        curves.push(json!({
            "from": {"t": a.t, "x": ids[a.x]},
            "to": {"t": b.t, "x": ids[b.x]},
            "pass": ok,
            "segments": curve.segments.len(),
            "parameter_length": total,
            "endpoint_time_error": endpoint,
            "max_nullity_defect": nullity,
            "null_length": length,
            "total_variation": variation,
            "ends_on_target_fiber": on_fiber,
        }));
    }
    let report = json!({
        "tolerances": {"endpoint": NULLCURVE_ENDPOINT_TOL, "nullity": NULLCURVE_NULLITY_TOL, "length": NULLCURVE_LENGTH_TOL},
        "curves": curves,
    });
    Ok((pass, report, vec![("nullcurve.csv".into(), t)]))
}

// ---------------------------------------------------------------- converge

fn converge(sc: &Scenario, p: &ConvergeParams) -> anyhow::Result<Parts> {
    let fiber = space(sc, &p.fiber)?;
    let dom = interval(p.interval)?;
    let members = p.members.iter().map(|m| Ok((m.j, warping(&m.warping, dom)?))).collect::<anyhow::Result<Vec<_>>>()?;
    let seq = WarpingSequence::new(members, warping(&p.limit, dom)?, p.lower_bound)?;
    let n = fiber.len() * (p.n_t + 1);
    let pairs = match &p.sources {
        Some(s) => SamplePairs::Sources(s.clone()),
        None => SamplePairs::default_for(n, sc.seed),
    };
    let r = null_convergence_check(&seq, &fiber, p.n_t, &pairs)?;
    let mut t = Table::new(&["j", "eps", "pairs", "sup_deviation", "lower_violations", "upper_violations", "lower_slack", "upper_slack"]);
    let mut checked = Vec::new();
    for ir in &r.checked {
        t.push(vec![
            ir.j.to_string(),
            num(ir.eps),
            ir.pairs.to_string(),
            num(ir.sup_deviation),
            ir.lower_violations.to_string(),
            ir.upper_violations.to_string(),
            num(ir.worst_lower.2),
            num(ir.worst_upper.2),
        ]);
        checked.push(json!({
            "j": ir.j, "eps": ir.eps, "pairs": ir.pairs, "sup_deviation": ir.sup_deviation,
            "lower_violations": ir.lower_violations, "upper_violations": ir.upper_violations,
            "worst_lower": {"p": ir.worst_lower.0, "q": ir.worst_lower.1, "slack": ir.worst_lower.2},
            "worst_upper": {"p": ir.worst_upper.0, "q": ir.worst_upper.1, "slack": ir.worst_upper.2},
        }));
    }
    let pass = r.sandwich_holds() && r.deviations_nonincreasing;
    let report = json!({
        "f_min": r.f_min,
        "grid_tolerance": r.grid_tolerance,
        "sampled_sources": match &pairs { SamplePairs::All => Value::from("all"), SamplePairs::Sources(s) => Value::from(s.len()) },
        "sandwich_holds": r.sandwich_holds(),
        "deviations_nonincreasing": r.deviations_nonincreasing,
        "checked": checked,
        "excluded": r.excluded.iter().map(|(j, e, why)| json!({"j": j, "eps": e, "reason": why})).collect::<Vec<_>>(),
    });
    Ok((pass, report, vec![("converge.csv".into(), t)]))
}

// ---------------------------------------------------------------- gh

fn gh(sc: &Scenario, p: &GhParams) -> anyhow::Result<Parts> {
    let (a, b) = (space(sc, &p.a)?, space(sc, &p.b)?);
    let r = gh_distance_exact(&a, &b)?;
    let mut t = Table::new(&["a_id", "b_id"]);
    for &(i, j) in r.witness.pairs() {
        t.push(vec![a.ids()[i].clone(), b.ids()[j].clone()]);
    }
    let report = json!({"points": [a.len(), b.len()], "distance": r.distance, "witness_pairs": r.witness.pairs().len()});
    Ok((true, report, vec![("gh_witness.csv".into(), t)]))
}

// ---------------------------------------------------------------- net

fn net(sc: &Scenario, p: &NetParams) -> anyhow::Result<Parts> {
    let fiber = space(sc, &p.fiber)?;
    let dom = interval(p.interval)?;
    let family = p.family.iter().map(|w| warping(w, dom)).collect::<anyhow::Result<Vec<_>>>()?;
    let c = uniform_total_boundedness(&family, p.bound, &fiber, p.n_t, p.eps)?;
    let times = dom.uniform_grid(p.n_t);
    let m = fiber.len();
    let id = |v: usize| format!("{}:{}", v / m, fiber.ids()[v % m]);
    let mut members = Table::new(&["member", "worst_node", "worst_distance", "certified", "certified_within_grid_tolerance"]);
    for mc in &c.members {
        members.push(vec![
            mc.index.to_string(),
            id(mc.worst.0),
            num(mc.worst.1),
            mc.certified.to_string(),
            mc.certified_within_grid_tolerance.to_string(),
        ]);
    }
    let mut points = Table::new(&["node", "t", "x"]);
    for &v in &c.net {
        points.push(vec![id(v), num(times[v / m]), fiber.ids()[v % m].clone()]);
    }
    let report = json!({
        "cardinality": c.cardinality(),
        "mesh": c.mesh,
        "time_levels": c.time_levels,
        "fiber_points": c.fiber_points.iter().map(|&i| fiber.ids()[i].clone()).collect::<Vec<_>>(),
        "all_certified": c.all_certified(),
        "members": c.members.iter().map(|mc| json!({
            "index": mc.index, "worst_node": id(mc.worst.0), "worst_distance": mc.worst.1,
            "certified": mc.certified, "certified_within_grid_tolerance": mc.certified_within_grid_tolerance,
        })).collect::<Vec<_>>(),
        "excluded": c.excluded.iter().map(|(i, why)| json!({"index": i, "reason": why})).collect::<Vec<_>>(),
    });
    Ok((c.all_certified(), report, vec![("net.csv".into(), members), ("net_points.csv".into(), points)]))
}

// ---------------------------------------------------------------- curvature

fn side_name(s: Side) -> &'static str {
    match s {
        Side::XY => "xy",
        Side::YZ => "yz",
        Side::XZ => "xz",
    }
}

fn bounds(side_cap: Option<f64>, min_steepness: f64) -> TriangleBounds<f64> {
    TriangleBounds { side_cap, min_steepness }
}

fn verdict_json_full(g: &Cone, v: &CurvatureVerdict<f64>) -> Value {
    json!({
        "pass": v.pass,
        "vertices": v.triangle.iter().map(|&n| node_json(g, n)).collect::<Vec<_>>(),
        "sides": v.sides,
        "worst_probe": v.worst,
        "worst_margin": v.worst_margin(),
        "tolerance_dominates_dp": v.tolerance_dominates_dp,
    })
}

fn curvature(sc: &Scenario, p: &CurvatureParams) -> anyhow::Result<Parts> {
    let g = cone(sc, &p.cone)?;
    let dir = match p.direction {
        Direction::Lower => BoundDirection::Lower,
        Direction::Upper => BoundDirection::Upper,
    };
    let sample = sample_timelike_triangles(&g, p.n_triangles, sc.seed, p.k, bounds(p.side_cap, p.min_steepness))?;
    let mut triangles = sample.triangles.clone();
    for tri in &p.triangles {
        let v = [locate(&g, &tri[0])?, locate(&g, &tri[1])?, locate(&g, &tri[2])?];
        triangles.push(TimelikeTriangle::from_vertices(&g, v)?);
    }
    let mut t = Table::new(&[
        "triangle", "probe", "side_p", "side_q", "param_p", "param_q", "node_p", "node_q", "rho", "rho_model", "dp_bound", "margin",
    ]);
    let mut verdicts = Vec::new();
    let mut pass = true;
    for (i, tri) in triangles.iter().enumerate() {
        let v = triangle_comparison(&g, tri, p.k, dir, p.n_probe, p.tol)?;
        pass &= v.pass;
        for (k, pr) in v.probes.iter().enumerate() {
            t.push(vec![
                i.to_string(),
                k.to_string(),
                side_name(pr.sides.0).into(),
                side_name(pr.sides.1).into(),
                num(pr.params.0),
                num(pr.params.1),
                node_id(&g, pr.nodes.0),
                node_id(&g, pr.nodes.1),
                num(pr.rho),
                num(pr.rho_model),
                num(pr.dp_bound),
                num(pr.margin),
            ]);
        }
        verdicts.push(verdict_json_full(&g, &v));
    }
    let empty = triangles.is_empty() && (p.n_triangles > 0 || !p.triangles.is_empty());
    pass &= !empty;
    let report = json!({
        "k": p.k,
        "direction": p.direction,
        "tolerance": p.tol,
        "sample": {
            "requested": p.n_triangles,
            "drawn": sample.triangles.len(),
            "attempts": sample.attempts,
            "filtered_size": sample.filtered_size,
            "filtered_cap": sample.filtered_cap,
            "diagnostic": sample.diagnostic,
        },
        "no_triangles": empty,
        "triangles": verdicts,
    });
    Ok((pass, report, vec![("curvature.csv".into(), t)]))
}

// ---------------------------------------------------------------- persist

fn persist(sc: &Scenario, p: &PersistParams) -> anyhow::Result<Parts> {
    let mode = match &p.mode {
        ModeSpec::Product { interval: iv } => PersistenceMode::Product { interval: interval(*iv)? },
        ModeSpec::MinkowskiCone { interval: iv } => PersistenceMode::MinkowskiCone { interval: interval(*iv)? },
        ModeSpec::Warped { members, limit } => {
            let member = |m: &WarpedMember| -> anyhow::Result<(WarpingFunction<f64>, f64)> {
                Ok((warping(&m.warping, interval(m.interval)?)?, m.k))
            };
            PersistenceMode::Warped { members: members.iter().map(member).collect::<anyhow::Result<_>>()?, limit: member(limit)? }
        }
    };
    let fibers = p.fibers.iter().map(|f| space(sc, f)).collect::<anyhow::Result<Vec<_>>>()?;
    let limit = space(sc, &p.limit)?;
    let cfg = PersistenceConfig {
        n_t: p.n_t,
        fiber_mesh: p.fiber_mesh,
        seed: sc.seed,
        n_triangles: p.n_triangles,
        n_probe: p.n_probe,
        tol: p.tol,
        quadruple_tol: p.quadruple_tol,
        bounds: bounds(p.side_cap, p.min_steepness),
    };
    let r = persistence_experiment(&fibers, &limit, &mode, &cfg)?;
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    let optb = |v: Option<bool>| v.map(|b| b.to_string()).unwrap_or_default();
    let mut t = Table::new(&[
        "label", "quadruple_k", "quadruple_pass", "triangle_k", "triangle_pass", "triangles", "worst_margin", "concavity_pass",
        "computed_k", "gh_to_limit",
    ]);
    let mut rows = Vec::new();
    for row in &r.rows {
        t.push(vec![
            row.label.clone(),
            num(row.quadruple_k),
            row.quadruple_pass.to_string(),
            num(row.triangle_k),
            optb(row.triangle_pass),
            row.triangles.to_string(),
            opt(row.worst_margin),
            optb(row.concavity_pass),
            opt(row.computed_k),
            opt(row.gh_to_limit),
        ]);
        rows.push(json!({
            "label": row.label, "quadruple_k": row.quadruple_k, "quadruple_pass": row.quadruple_pass,
            "triangle_k": row.triangle_k, "triangle_pass": row.triangle_pass, "triangles": row.triangles,
            "worst_margin": row.worst_margin, "concavity_pass": row.concavity_pass, "computed_k": row.computed_k,
            "gh_to_limit": row.gh_to_limit, "diagnostics": row.diagnostics,
        }));
    }
    let disagreements = r.disagreements();
    let report = json!({
        "mode": r.mode,
        "all_pass": r.all_pass(),
        "disagreements": disagreements,
        "rows": rows,
    });
    Ok((disagreements.is_empty(), report, vec![("persist.csv".into(), t)]))
}

// ---------------------------------------------------------------- artifacts

/// Manifest: everything the outputs depend on.
pub fn manifest(sc: &Scenario, outputs: &[String]) -> anyhow::Result<Value> {
    let mut inputs = Vec::new();
    for f in sc.command.input_files() {
        let (sha, bytes) = sha256_file(&sc.resolve(f))?;
        inputs.push(json!({"path": f, "sha256": sha, "bytes": bytes}));
    }
    Ok(json!({
        "tool": "ncone",
        "version": env!("CARGO_PKG_VERSION"),
        "library": {"name": "nullcone", "version": nullcone::VERSION},
        "scenario": sc,
        "inputs": inputs,
        "outputs": outputs,
    }))
}

fn write_json(path: &Path, v: &Value) -> anyhow::Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    std::fs::write(path, s).with_context(|| path.display().to_string())
}

/// Writes tables, `report.json` and `manifest.json` into `dir`.
pub fn write_artifacts(dir: &Path, sc: &Scenario, o: &Outcome) -> anyhow::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| dir.display().to_string())?;
    let mut names: Vec<String> = o.tables.iter().map(|(n, _)| n.clone()).collect();
    names.push("report.json".into());
    let man = manifest(sc, &names)?;
    let mut written = Vec::new();
    for (name, table) in &o.tables {
        let path = dir.join(name);
        table.write(&path)?;
        written.push(path);
    }
    for (name, v) in [("report.json", &o.report), ("manifest.json", &man)] {
        let path = dir.join(name);
        write_json(&path, v)?;
        written.push(path);
    }
    Ok(written)
}

/// Runs `sc` and writes its artifacts; returns the exit status.
pub fn execute(sc: &Scenario) -> anyhow::Result<i32> {
    let dir = sc
        .output_dir
        .as_ref()
        .map(|d| sc.resolve(d))
        .ok_or_else(|| InputError::new("scenario", "no output directory: set `output_dir` or pass --out"))?;
    let o = run(sc)?;
    write_artifacts(&dir, sc, &o)?;
    Ok(o.exit_code())
}
