//! One function per subcommand. Each returns a report; only bad input is an error.

use std::path::Path;

use cayley_core::curves::{
    build_cone, cayley_residual, default_r_grid, degree_sphere, fund_forms, i1_line_and_sections, deformation_check,
    minimality_residual, pseudoholo_residual, reduction_check, second_fund_iil, DbarConfig, LineField,
    MinimalityReport, SectionField,
};
use cayley_core::examples::{
    build_curve, build_section, parse_spec, random_spin7, BuiltCurve, CurveSpec, ExampleSpec,
    OrbitSpec,
};
use cayley_core::forms::basis_vec;
use cayley_core::frames::{twistor_project, Completion, Stencil};
use cayley_core::spin7::{basis, comass_estimate, float_tables, invariance_report, tables};
use cayley_core::symbolic::{define_frames, run_suite, suite_names, Expectation};
use cayley_core::{CurveError, Mode, Scalar};
use serde_json::json;

use crate::report::{Check, Report};
use crate::{Opts, RunError};

type Run = Result<Report, RunError>;

const FLOAT_TOL: f64 = 1e-10;
const CURVE_TOL: f64 = 1e-7;
const DEFAULT_H: f64 = 1e-4;

fn usage(msg: impl Into<String>) -> RunError {
    RunError::Usage(msg.into())
}

fn new_report(cmd: &str, o: &Opts) -> Report {
    let mut r = Report::new(cmd);
    r.seed = o.seed;
    r
}

fn load_spec(path: &Path) -> Result<ExampleSpec, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    parse_spec(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn require_spec(o: &Opts) -> Result<ExampleSpec, RunError> {
    match &o.spec {
        Some(p) => load_spec(p),
        None => Err(usage("this command needs --spec PATH")),
    }
}

fn curve_of(spec: &ExampleSpec) -> Result<BuiltCurve, RunError> {
    let c = spec.curve.as_ref().ok_or_else(|| usage("spec has no curve"))?;
    build_curve(c).map_err(|e| usage(e.to_string()))
}

fn stencil(o: &Opts) -> Result<Stencil, RunError> {
    let h = o.h.unwrap_or(DEFAULT_H);
    if !(h > 0.0 && h < 0.1) {
        return Err(usage(format!("--h must lie in (0, 0.1), got {h}")));
    }
    Ok(Stencil { h, richardson: true })
}

fn tol_or(o: &Opts, default: f64) -> Result<f64, RunError> {
    let t = o.tol.unwrap_or(default);
    if !(t > 0.0) {
        return Err(usage(format!("--tol must be positive, got {t}")));
    }
    Ok(t)
}

fn samples_or(o: &Opts, default: usize) -> Result<usize, RunError> {
    match o.samples {
        Some(0) => Err(usage("--samples must be positive")),
        Some(n) => Ok(n),
        None => Ok(default),
    }
}

fn spec_echo(s: &ExampleSpec) -> serde_json::Value {
    serde_json::to_value(s).unwrap_or(serde_json::Value::Null)
}

pub fn verify_forms(o: &Opts) -> Run {
    let mut rep = new_report("verify-forms", o);
    let mode = if o.exact { Mode::Exact } else { Mode::Float };
    let tol = tol_or(o, FLOAT_TOL)?;
    let t = tables();
    let (phi, psi) = match mode {
        Mode::Exact => (t.phi.clone(), t.psi.clone()),
        Mode::Float => (t.phi.to_float(), t.psi.iter().map(|f| f.to_float()).collect()),
    };
    rep.push(Check::flag("phi-term-count", phi.len() == 14, 1, format!("{} terms", phi.len())));
    let counts: Vec<usize> = psi.iter().map(|f| f.len()).collect();
    rep.push(Check::flag(
        "psi-term-counts",
        psi.len() == 7 && counts.iter().all(|&n| n == 8),
        psi.len(),
        format!("{counts:?}"),
    ));
    // exact equality in exact mode, |difference| < tol otherwise
    let compare = |name: &str, got: &Scalar, want: i64| -> Check {
        let diff = (got.to_f64() - want as f64).abs();
        match mode {
            Mode::Exact => Check::flag(name, *got == Scalar::int(want, Mode::Exact), 1, format!("value {}", got.to_f64())),
            Mode::Float => Check::threshold(name, diff, diff, 1, tol),
        }
    };
    let pp = rep.time("wedge", || phi.wedge(&phi)).map_err(|e| usage(e.to_string()))?;
    let top = pp.coeff(&[1, 2, 3, 4, 5, 6, 7, 8]);
    let mut c = compare("phi-wedge-phi-is-14-vol", &top, 14);
    if pp.len() != 1 {
        c = Check::flag("phi-wedge-phi-is-14-vol", false, 1, format!("{} terms", pp.len()));
    }
    rep.push(c);
    let e: Vec<Vec<Scalar>> = (1..=4).map(|i| basis_vec(8, i, mode)).collect();
    let v = phi.evaluate(&e).map_err(|e| usage(e.to_string()))?;
    rep.push(compare("phi-on-e1234", &v, 1));
    let mut worst = 0.0f64;
    let mut exact_zero = true;
    for f in &psi {
        let x = f.evaluate(&e).map_err(|e| usage(e.to_string()))?;
        worst = worst.max(x.abs_f64());
        exact_zero &= x.is_zero();
    }
    rep.push(match mode {
        Mode::Exact => Check::flag("psi-vanish-on-e1234", exact_zero, 7, "all seven psi_m"),
        Mode::Float => Check::threshold("psi-vanish-on-e1234", worst, worst, 7, tol),
    });
    rep.data = json!({ "mode": if o.exact { "exact" } else { "float" }, "tables": t.to_json() });
    Ok(rep)
}

pub fn verify_algebra(o: &Opts) -> Run {
    let mut rep = new_report("verify-algebra", o);
    let tol = tol_or(o, FLOAT_TOL)?;
    let n = samples_or(o, 100)?;
    let seed = o.seed.unwrap_or(0);
    let b = basis();
    rep.push(Check::flag(
        "spin7-dimension",
        b.spin7.len() == 21 && b.nullity == 21,
        1,
        format!("dim {}", b.spin7.len()),
    ));
    rep.push(Check::flag(
        "complement-dimension",
        b.complement.len() == 7 && b.relation_rank == 7,
        1,
        format!("dim {}, relation rank {}", b.complement.len(), b.relation_rank),
    ));
    let (closed, pairs) = rep.time("bracket", || {
        let mut ok = true;
        let mut pairs = 0;
        for (i, x) in b.spin7.iter().enumerate() {
            for y in &b.spin7[i + 1..] {
                pairs += 1;
                ok &= x.bracket(y).and_then(|br| b.expansion_residual(&br)).is_ok_and(|r| r.is_zero());
            }
        }
        (ok, pairs)
    });
    rep.push(Check::flag("bracket-closure", closed, pairs, "exact re-expansion"));
    match rep.time("invariance", || invariance_report(tables(), b)) {
        Ok(r) => {
            rep.push(Check::flag("phi-annihilated", r.phi_annihilated == 21, 21, "A . Phi = 0 exactly"));
            rep.push(Check::flag("psi-equivariance", true, 21 * 7, "A . psi_m in span(psi)"));
            rep.push(Check::flag("psi-representation-skew", r.all_skew, 21, "induced 7x7 matrices"));
            let moves = r.complement_moves_phi.iter().filter(|&&m| m).count();
            rep.push(Check::flag("complement-moves-phi", moves == 7, 7, format!("{moves} of 7")));
        }
        Err(v) => rep.push(Check::flag(
            "phi-annihilated",
            false,
            21,
            format!("element {} moves {} ({} terms)", v.element, v.form, v.residual_terms),
        )),
    }
    let ft = float_tables();
    let defects: Vec<f64> = rep.time("group", || {
        (0..n).map(|k| ft.phi_pullback_defect(&random_spin7(seed.wrapping_add(k as u64)))).collect()
    });
    let sup = defects.iter().cloned().fold(0.0, f64::max);
    let mean = defects.iter().sum::<f64>() / n as f64;
    rep.push(Check::threshold("group-preserves-phi", sup, mean, n, tol));
    Ok(rep)
}

pub fn verify_symbolic(o: &Opts) -> Run {
    let mut rep = new_report("verify-symbolic", o);
    if let Some(name) = &o.identity {
        let names = suite_names();
        if !names.contains(name) {
            return Err(usage(format!("unknown identity {name:?}; known: {}", names.join(", "))));
        }
    }
    let env = rep.time("frames", define_frames);
    let suite = rep.time("suite", || run_suite(&env, o.identity.as_deref()));
    for e in &suite.entries {
        let mut detail = format!("{} residual terms; {}", e.check.residual_terms, e.description);
        if e.expectation == Expectation::Erratum {
            detail = format!("misprint, expected to fail; {detail}");
        }
        rep.push(Check::flag(&e.name, e.passed(), 1, detail));
    }
    rep.data = serde_json::to_value(&suite).unwrap_or_default();
    Ok(rep)
}

/// Largest pairwise distance between twistor images of the samples.
fn twistor_diameter(c: &cayley_core::curves::CurveChart, pts: &[(f64, f64)]) -> Result<f64, CurveError> {
    let mut t = Vec::with_capacity(pts.len());
    for &(u, v) in pts {
        t.push(twistor_project(&c.plane(u, v)?, Completion::Canonical)?);
    }
    let mut d: f64 = 0.0;
    for (i, a) in t.iter().enumerate() {
        for b in &t[i + 1..] {
            d = d.max(a.distance(b));
        }
    }
    Ok(d)
}

fn curve_failure(rep: &mut Report, name: &str, e: CurveError) {
    rep.push(Check::refused(name, e.to_string()));
}

pub fn check_curve(o: &Opts) -> Run {
    let spec = require_spec(o)?;
    let built = curve_of(&spec)?;
    let mut rep = new_report("check-curve", o);
    rep.spec = spec_echo(&spec);
    let tol = tol_or(o, CURVE_TOL)?;
    let chart = built.chart().clone().with_stencil(stencil(o)?);
    let pts = chart.samples(samples_or(o, 8)?);
    let ph = match rep.time("pseudoholo", || pseudoholo_residual(&chart, &pts, tol)) {
        Ok(r) => r,
        Err(e) => {
            curve_failure(&mut rep, "pseudoholomorphic", e);
            return Ok(rep);
        }
    };
    let ok = ph.passed();
    let mut c = Check::from_residual(&ph);
    c.name = "pseudoholomorphic".into();
    rep.push(c);
    if !ok {
        rep.push(Check::refused("fundamental-forms", "curve is not pseudoholomorphic"));
        return Ok(rep);
    }
    let ff = match rep.time("fund_forms", || fund_forms(&chart, &pts)) {
        Ok(f) => f,
        Err(e) => {
            curve_failure(&mut rep, "fundamental-forms", e);
            return Ok(rep);
        }
    };
    let n = ff.samples.len();
    rep.push(Check::info("I1-sup", Some(ff.i1_sup), n, format!("zero at {} of {n} samples", ff.r1_count)));
    rep.push(Check::info("I2-sup", Some(ff.i2_sup), n, format!("zero at {} of {n} samples", ff.r2_count)));
    rep.push(Check::flag("zero-loci-disjoint", ff.r1_r2_disjoint, n, "R1 and R2 do not meet"));
    rep.push(Check::threshold("fundamental-forms-type-(1,0)", ff.type_residual, ff.type_residual, n, 1e-6));
    match twistor_diameter(&chart, &pts) {
        Ok(d) => {
            let vanishes = ff.i1_vanishes();
            let constant = d < 1e-8;
            let detail = format!(
                "diameter {d:.3e}; I1 {}; image {}",
                if vanishes { "vanishes" } else { "nonzero" },
                if constant { "a point" } else { "a surface" }
            );
            rep.push(Check::flag("twistor-image-vs-I1", vanishes == constant, n, detail));
        }
        Err(e) => curve_failure(&mut rep, "twistor-image-vs-I1", e),
    }
    match second_fund_iil(&chart, &LineField::Tautological, &pts) {
        Ok(r) => {
            if let Some(m) = r.theta2_match {
                rep.push(Check::threshold("tautological-line-second-form", m, m, r.samples, 1e-8));
            }
            rep.push(Check::threshold("tautological-line-type-(1,0)", r.part01, r.part01, r.samples, 1e-6));
        }
        Err(e) => curve_failure(&mut rep, "tautological-line-second-form", e),
    }
    match rep.time("minimality", || minimality_residual(&chart, &pts, 1e-3)) {
        Ok(MinimalityReport::ConstantMap { sup_differential }) => {
            rep.push(Check::info("twistor-minimality", Some(sup_differential), n, "constant map: no surface to test"))
        }
        Ok(MinimalityReport::Surface { sup, mean, samples, branch_points }) => {
            let mut c = Check::threshold("twistor-minimality", sup, mean, samples, 1e-4);
            if !branch_points.is_empty() {
                c.detail = Some(format!("{} branch points excluded", branch_points.len()));
            }
            rep.push(c);
        }
        Err(e) => curve_failure(&mut rep, "twistor-minimality", e),
    }
    rep.data = json!({ "fundamental_forms": {
        "scale": ff.scale, "i1_sup": ff.i1_sup, "i2_sup": ff.i2_sup,
        "r1_count": ff.r1_count, "r2_count": ff.r2_count, "samples": n,
    }});
    Ok(rep)
}

fn section_of(spec: &ExampleSpec, built: &BuiltCurve) -> Result<Option<Box<dyn SectionField>>, RunError> {
    spec.section
        .as_ref()
        .map(|s| build_section(s, built).map_err(|e| usage(e.to_string())))
        .transpose()
}

pub fn check_cone(o: &Opts) -> Run {
    let spec = require_spec(o)?;
    let built = curve_of(&spec)?;
    let section = section_of(&spec, &built)?;
    let mut rep = new_report("check-cone", o);
    rep.spec = spec_echo(&spec);
    let tol = tol_or(o, CURVE_TOL)?;
    let chart = built.chart().clone().with_stencil(stencil(o)?);
    let pts = chart.samples(samples_or(o, 6)?);
    let grid = default_r_grid();
    let name = if section.is_some() { "deformed-cone-cayley" } else { "cone-cayley" };
    let res = rep.time("cayley", || {
        let cone = build_cone(&chart, section.as_deref(), &pts)?;
        cayley_residual(&cone, &pts, &grid, tol)
    });
    match res {
        Ok(r) => {
            let mut c = Check::from_residual(&r);
            c.name = name.into();
            rep.push(c);
        }
        Err(e) => curve_failure(&mut rep, name, e),
    }
    if section.is_none() {
        match rep.time("reduction", || reduction_check(&chart, &pts, &grid)) {
            Ok(r) => {
                let scale = r.direct_sup.max(1.0);
                rep.push(Check::threshold("psi-reduction-to-lines", r.discrepancy, r.discrepancy, r.samples, 1e-6 * scale));
                if r.constant.is_finite() {
                    rep.push(Check::info("psi-reduction-constant", Some(r.constant), r.samples, "least-squares fit"));
                } else {
                    rep.push(Check::info("psi-reduction-constant", None, r.samples, "undetermined: all line sums vanish"));
                }
                rep.data = serde_json::to_value(&r).unwrap_or_default();
            }
            Err(e) => curve_failure(&mut rep, "psi-reduction-to-lines", e),
        }
    }
    Ok(rep)
}

pub fn degree(o: &Opts) -> Run {
    let spec = require_spec(o)?;
    let built = curve_of(&spec)?;
    let atlas = built
        .atlas()
        .ok_or_else(|| usage("degree needs a closed curve; use a fiber_polynomial spec"))?;
    let mut rep = new_report("degree", o);
    rep.spec = spec_echo(&spec);
    let tol = tol_or(o, 1e-6)?;
    let n_r = samples_or(o, 1024)?;
    match rep.time("quadrature", || degree_sphere(atlas, n_r, 64)) {
        Ok(d) => {
            rep.notes.push(format!("degree = {} (integrality defect {:.0e})", d.nearest, d.defect));
            let mut c = Check::threshold("degree-integrality", d.defect, d.defect, d.n_r * d.n_phi * 2, tol);
            c.detail = Some(format!("value {:.9}", d.value));
            rep.push(c);
            rep.data = serde_json::to_value(&d).unwrap_or_default();
        }
        Err(e) => curve_failure(&mut rep, "degree-integrality", e),
    }
    Ok(rep)
}

pub fn deform(o: &Opts) -> Run {
    let spec = require_spec(o)?;
    let built = curve_of(&spec)?;
    let section = section_of(&spec, &built)?;
    let mut rep = new_report("deform", o);
    rep.spec = spec_echo(&spec);
    let chart = built.chart().clone().with_stencil(stencil(o)?);
    let pts = chart.samples(samples_or(o, 5)?);
    let grid = default_r_grid();
    if let Some(s) = section {
        match rep.time("deformation", || deformation_check(&chart, s.as_ref(), &pts, &grid, 1.0)) {
            Ok(r) => {
                rep.push(Check::info("alpha-(0,1)-part", Some(r.alpha01), pts.len(), "section equation residual"));
                rep.push(Check::info("deformed-cone-cayley", Some(r.cayley), pts.len() * grid.len(), "first-order residual"));
                rep.push(Check::flag(
                    "deformation-criterion-consistent",
                    r.consistent(),
                    pts.len(),
                    format!("{:?} (small < {:.0e}, large > {:.0e})", r.verdict, r.small, r.large),
                ));
                rep.data = serde_json::to_value(&r).unwrap_or_default();
            }
            Err(e) => curve_failure(&mut rep, "deformation-criterion-consistent", e),
        }
        return Ok(rep);
    }
    match rep.time("i1_section", || i1_line_and_sections(&chart, &DbarConfig::default(), &pts, &grid)) {
        Ok((sol, _)) => {
            rep.push(Check::info("dbar-least-squares", Some(sol.ls_residual), 0, "collocation residual"));
            rep.push(Check::threshold("I1-adapted-frame", sol.adapted_defect, sol.adapted_defect, pts.len(), 1e-6));
            let mut a = Check::from_residual(&sol.alpha);
            a.name = "I1-section-alpha-(0,1)".into();
            rep.push(a);
            let mut c = Check::from_residual(&sol.cayley);
            c.name = "I1-section-cone-cayley".into();
            rep.push(c);
            rep.data = serde_json::to_value(&sol).unwrap_or_default();
        }
        Err(e) => curve_failure(&mut rep, "I1-section", e),
    }
    Ok(rep)
}

pub fn comass(o: &Opts) -> Run {
    let mut rep = new_report("comass", o);
    let n = samples_or(o, 512)?;
    let seed = o.seed.unwrap_or(0);
    let r = rep.time("ascent", || comass_estimate(&tables().phi, n, 200, seed));
    let lower = tol_or(o, 1e-6)?;
    let ok = r.value <= 1.0 + 1e-9 && r.value >= 1.0 - lower;
    rep.notes.push(format!("comass(Phi) = {:.12}", r.value));
    rep.push(Check::flag(
        "comass-equals-one",
        ok,
        n,
        format!("value {:.12} in [1 - {lower:.0e}, 1 + 1e-9], best start {}", r.value, r.best_start),
    ));
    let e: Vec<Vec<Scalar>> = (1..=4).map(|i| basis_vec(8, i, Mode::Exact)).collect();
    let v = tables().phi.evaluate(&e).map_err(|e| usage(e.to_string()))?;
    rep.push(Check::flag("attained-at-e1234", v == Scalar::int(1, Mode::Exact), 1, "exact"));
    rep.data = serde_json::to_value(&r).unwrap_or_default();
    Ok(rep)
}

fn so8_params(m: &cayley_core::linalg::Mat8) -> Vec<f64> {
    let mut p = Vec::with_capacity(28);
    for i in 0..8 {
        for j in i + 1..8 {
            p.push(m[(i, j)]);
        }
    }
    p
}

pub fn search_orbit(o: &Opts) -> Run {
    let spec = o.spec.as_deref().map(load_spec).transpose()?;
    let mut cfg = spec.as_ref().and_then(|s| s.search).unwrap_or_default();
    if let Some(n) = o.samples {
        cfg.n_starts = n;
    }
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    if let Some(t) = o.tol {
        cfg.tol = t;
    }
    if cfg.n_starts == 0 || !(cfg.tol > 0.0) {
        return Err(usage("search needs n_starts > 0 and tol > 0"));
    }
    let mut rep = new_report("search-orbit", o);
    rep.seed = Some(cfg.seed);
    if let Some(s) = &spec {
        rep.spec = spec_echo(s);
    }
    let res = rep.time("search", || cayley_core::examples::search_orbit(&cfg, None));
    rep.push(Check::threshold("orbit-residual", res.residual, res.residual, cfg.n_starts, cfg.tol));
    let found = ExampleSpec {
        schema: 1,
        name: Some(format!("orbit-seed-{}", cfg.seed)),
        curve: Some(CurveSpec::Orbit(OrbitSpec {
            a: so8_params(&res.a),
            b: so8_params(&res.b),
            base_plane: None,
            domain: None,
        })),
        section: None,
        search: None,
    };
    if res.success {
        // independent re-validation on a chart around the base point
        let chart = res.chart(0.4);
        let pts = chart.samples(samples_or(o, 4)?.min(8));
        match pseudoholo_residual(&chart, &pts, 1e-8) {
            Ok(r) => {
                let mut c = Check::from_residual(&r);
                c.name = "orbit-pseudoholomorphic".into();
                rep.push(c);
            }
            Err(e) => curve_failure(&mut rep, "orbit-pseudoholomorphic", e),
        }
        match fund_forms(&chart, &pts) {
            Ok(f) => rep.push(Check::flag(
                "orbit-not-in-a-fiber",
                f.r1_count == 0,
                f.samples.len(),
                format!("I1 sup {:.3e}", f.i1_sup),
            )),
            Err(e) => curve_failure(&mut rep, "orbit-not-in-a-fiber", e),
        }
        match minimality_residual(&chart, &pts, 1e-3) {
            Ok(MinimalityReport::Surface { sup, mean, samples, .. }) => {
                rep.push(Check::threshold("twistor-minimality", sup, mean, samples, 1e-4))
            }
            Ok(MinimalityReport::ConstantMap { .. }) => {
                rep.push(Check::flag("twistor-minimality", false, pts.len(), "twistor image is a point"))
            }
            Err(e) => curve_failure(&mut rep, "twistor-minimality", e),
        }
    }
    rep.data = json!({ "result": res, "spec": found });
    Ok(rep)
}
