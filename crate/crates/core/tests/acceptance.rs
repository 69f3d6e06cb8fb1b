//! Acceptance suite: one PASS/FAIL line per criterion, each checked at its
//! stated tolerance against the report values. Runs without the libtest
//! harness so the lines are always printed.

use std::process::ExitCode;
use std::time::Instant;

use quantlab::report::to_json;
use quantlab::suite::{run_suite, Suite, SuiteConfig};
use quantlab::CheckReport;

struct Criterion {
    index: usize,
    name: &'static str,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Criterion {
    fn new(index: usize, name: &'static str) -> Self {
        Self {
            index,
            name,
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// `value <= bound`, recorded under `label`.
    fn at_most(&mut self, label: &str, value: f64, bound: f64) {
        self.notes.push(format!("{label}={value:.3e}"));
        // NaN must fail.
        if value.is_nan() || value > bound {
            self.failures
                .push(format!("{label}: {value:.3e} > {bound:.1e}"));
        }
    }

    fn holds(&mut self, label: &str, ok: bool) {
        if !ok {
            self.failures.push(label.to_string());
        }
    }

    fn missing(&mut self, id: &str) {
        self.failures.push(format!("missing check '{id}'"));
    }

    fn print(&self) -> bool {
        let pass = self.failures.is_empty();
        let tag = if pass { "PASS" } else { "FAIL" };
        let detail = if pass {
            self.notes.join(" ")
        } else {
            self.failures.join("; ")
        };
        println!("criterion {} {tag} {}: {detail}", self.index, self.name);
        pass
    }
}

fn parts(r: &CheckReport) -> Vec<CheckReport> {
    r.metadata
        .get("parts")
        .and_then(|v| serde_json::from_value(v.clone()).ok())
        .unwrap_or_default()
}

/// Depth-first search for `id` among `reports` and their nested parts.
fn find(reports: &[CheckReport], id: &str) -> Option<CheckReport> {
    for r in reports {
        if r.check_id == id {
            return Some(r.clone());
        }
        if let Some(hit) = find(&parts(r), id) {
            return Some(hit);
        }
    }
    None
}

/// `find` restricted to the parts of the top-level report `parent`.
fn find_in(reports: &[CheckReport], parent: &str, id: &str) -> Option<CheckReport> {
    find(reports, parent).and_then(|p| find(&parts(&p), id))
}

fn meta_f64(r: &CheckReport, key: &str) -> f64 {
    r.metadata
        .get(key)
        .and_then(|v| v.as_f64())
        .unwrap_or(f64::NAN)
}

fn error_of(c: &mut Criterion, reports: &[CheckReport], id: &str, bound: f64) {
    match find(reports, id) {
        Some(r) => c.at_most(id, r.max_error, bound),
        None => c.missing(id),
    }
}

fn config(model: &str, suite: Suite) -> SuiteConfig {
    SuiteConfig {
        model: model.into(),
        suite,
        ..SuiteConfig::default()
    }
}

fn run(model: &str, suite: Suite) -> Vec<CheckReport> {
    run_suite(&config(model, suite)).unwrap_or_else(|e| panic!("{model}/{suite}: {e}"))
}

fn kahler(reports: &[CheckReport], seconds: f64) -> Criterion {
    let mut c = Criterion::new(1, "Kahler suite on su2");
    match find(reports, "kahler.complex_structure") {
        Some(r) => c.holds("at least 10^4 samples", meta_f64(&r, "samples") >= 10_000.0),
        None => c.missing("kahler.complex_structure"),
    }
    error_of(&mut c, reports, "kahler.j_squared", 1e-10);
    error_of(&mut c, reports, "kahler.potential", 1e-5);
    match find(reports, "kahler.completeness.bound") {
        Some(r) => c.at_most("sup |df|_g^2 - 4", meta_f64(&r, "sup_numeric") - 4.0, 1e-9),
        None => c.missing("kahler.completeness.bound"),
    }
    error_of(&mut c, reports, "kahler.completeness.agreement", 1e-6);
    c.at_most("runtime_s", seconds, 10.0);
    c
}

fn dphi(reports: &[CheckReport]) -> Criterion {
    let mut c = Criterion::new(2, "polar map differential vs finite differences");
    match find(reports, "kahler.dphi") {
        Some(r) => c.holds("at least 1000 samples", meta_f64(&r, "samples") >= 1000.0),
        None => c.missing("kahler.dphi"),
    }
    error_of(&mut c, reports, "kahler.dphi.finite_difference", 1e-6);
    c
}

fn eta(reports: &[CheckReport]) -> Criterion {
    let mut c = Criterion::new(3, "eta positivity and log-eta Hessian");
    match find(reports, "density.eta_log_convexity") {
        Some(r) => {
            c.holds("grid of 10^4 points", meta_f64(&r, "grid") >= 10_000.0);
            c.holds("(sinh^2 t - t^2)/t^4 > 0", meta_f64(&r, "min_value") > 0.0);
        }
        None => c.missing("density.eta_log_convexity"),
    }
    error_of(&mut c, reports, "density.eta_log_convexity.agreement", 1e-5);
    match find(reports, "density.log_eta_convex") {
        // The reported error is the negative part of the smallest Hessian
        // eigenvalue over the grid.
        Some(r) => {
            c.at_most("hessian negative part", r.max_error, 1e-8);
            c.at_most("-min eigenvalue", -meta_f64(&r, "min_eigenvalue_g"), 1e-8);
        }
        None => c.missing("density.log_eta_convex"),
    }
    c
}

fn psh(reports: &[CheckReport]) -> Criterion {
    let mut c = Criterion::new(4, "PSH closed form vs Hermitian oracle");
    let tau = std::f64::consts::TAU;
    let potentials = [
        "square".to_string(),
        "logeta".to_string(),
        format!("combined:{tau},2"),
        format!("combined:{tau},1"),
    ];
    for p in &potentials {
        let parent = format!("psh.oracle.{p}");
        match find_in(reports, &parent, "psh.oracle.spectrum") {
            Some(r) => c.at_most(&format!("{p}.spectrum"), r.max_error, 1e-4),
            None => c.missing(&parent),
        }
        match find_in(reports, &parent, "psh.oracle.grid_size") {
            Some(r) => c.holds(
                &format!("{p}: at least 50 points"),
                meta_f64(&r, "points") >= 50.0,
            ),
            None => c.missing(&parent),
        }
    }
    error_of(&mut c, reports, "psh.smooth_limit.square", 1e-5);
    error_of(&mut c, reports, "psh.smooth_limit.logeta", 1e-5);
    c
}

fn transform(u1: &[CheckReport], su2: &[CheckReport]) -> Criterion {
    let mut c = Criterion::new(5, "transform unitarity, sigma and equivariance");
    match find(u1, "transform.unitarity") {
        Some(r) => c.holds("u1 cutoff 8", meta_f64(&r, "cutoff") == 8.0),
        None => c.missing("transform.unitarity"),
    }
    match find(u1, "transform.unitarity.gram") {
        Some(r) => c.at_most("u1.gram", r.max_error, 1e-6),
        None => c.missing("u1 transform.unitarity.gram"),
    }
    match find(su2, "transform.unitarity") {
        Some(r) => c.holds("su2 cutoff 2", meta_f64(&r, "cutoff") == 2.0),
        None => c.missing("transform.unitarity"),
    }
    match find(su2, "transform.unitarity.gram") {
        Some(r) => c.at_most("su2.gram", r.max_error, 1e-4),
        None => c.missing("su2 transform.unitarity.gram"),
    }
    match find(u1, "transform.sigma") {
        Some(r) => c.at_most("u1.sigma", r.max_error, 1e-10),
        None => c.missing("u1 transform.sigma"),
    }
    for (model, reports) in [("u1", u1), ("su2", su2)] {
        for id in [
            "transform.equivariance.peter_weyl",
            "transform.equivariance.quadrature",
        ] {
            match find(reports, id) {
                Some(r) => c.at_most(&format!("{model}.{id}"), r.max_error, 1e-8),
                None => c.missing(id),
            }
        }
    }
    error_of(&mut c, su2, "transform.equivariance.weyl.commutation", 1e-8);
    c
}

fn reduction(reports: &[CheckReport]) -> Criterion {
    let mut c = Criterion::new(6, "reduction suite on su2");
    error_of(&mut c, reports, "reduction.momentum_equivariance", 1e-10);
    error_of(&mut c, reports, "reduction.round_trip.representative", 1e-8);
    error_of(&mut c, reports, "reduction.isometry", 1e-6);
    error_of(&mut c, reports, "density.weyl_isometry", 1e-6);
    c
}

fn qr(su2: &[CheckReport], tori: &[(&str, Vec<CheckReport>)]) -> Criterion {
    let mut c = Criterion::new(7, "quantization commutes with reduction");
    match find(su2, "reduction.qr_commutes") {
        Some(r) => c.holds("su2 cutoff 2", meta_f64(&r, "cutoff") == 2.0),
        None => c.missing("reduction.qr_commutes"),
    }
    error_of(&mut c, su2, "reduction.qr.side_a", 1e-4);
    error_of(&mut c, su2, "reduction.qr.side_b", 1e-4);
    match find(su2, "reduction.qr.dimensions") {
        Some(r) => c.holds("su2 dimensions match", r.pass),
        None => c.missing("reduction.qr.dimensions"),
    }
    for (model, reports) in tori {
        match find(reports, "reduction.qr.coincidence") {
            Some(r) => c.at_most(&format!("{model}.coincidence"), r.max_error, 0.0),
            None => c.missing(&format!("{model} reduction.qr.coincidence")),
        }
        match find(reports, "reduction.qr.dimensions") {
            Some(r) => c.holds(&format!("{model} dimensions match"), r.pass),
            None => c.missing(&format!("{model} reduction.qr.dimensions")),
        }
    }
    c
}

fn density(reports: &[CheckReport]) -> Criterion {
    let mut c = Criterion::new(8, "codimension-2 removal density demo");
    match find(reports, "stratum.decreasing") {
        Some(r) => c.holds("E(m) strictly decreasing", r.pass),
        None => c.missing("stratum.decreasing"),
    }
    match find(reports, "stratum.rate") {
        Some(r) => {
            let p = meta_f64(&r, "rate_exponent");
            c.notes.push(format!("rate_exponent={p:.3}"));
            c.holds(
                &format!("rate exponent {p:.3} outside [0.5, 2]"),
                (0.5..=2.0).contains(&p),
            );
        }
        None => c.missing("stratum.rate"),
    }
    match find(reports, "stratum.line_contrast") {
        Some(r) => {
            let (line, threshold) = (meta_f64(&r, "line_min"), meta_f64(&r, "threshold"));
            c.notes.push(format!("line_min={line:.3}"));
            c.holds("line errors stay above 0.1 E(e^1)", line > threshold);
        }
        None => c.missing("stratum.line_contrast"),
    }
    error_of(&mut c, reports, "stratum.refinement", 0.1);
    c
}

fn determinism(first: &[CheckReport]) -> Criterion {
    let mut c = Criterion::new(9, "same seed gives byte-identical JSON");
    let second = run("su2", Suite::All);
    match (to_json(first), to_json(&second)) {
        (Ok(a), Ok(b)) => {
            c.notes.push(format!("bytes={}", a.len()));
            c.holds("reports differ", a == b);
        }
        _ => c.holds("serialization failed", false),
    }
    c
}

fn main() -> ExitCode {
    let start = Instant::now();
    let t = Instant::now();
    let su2_kahler = run("su2", Suite::Kahler);
    let kahler_seconds = t.elapsed().as_secs_f64();

    let su2 = run("su2", Suite::All);
    let u1 = run("u1", Suite::All);
    let t2 = run("t2", Suite::Reduction);

    let criteria = [
        kahler(&su2_kahler, kahler_seconds),
        dphi(&su2),
        eta(&su2),
        psh(&su2),
        transform(&u1, &su2),
        reduction(&su2),
        qr(&su2, &[("u1", u1.clone()), ("t2", t2)]),
        density(&su2),
        determinism(&su2),
    ];
    let passed = criteria.iter().map(Criterion::print).filter(|p| *p).count();
    println!(
        "acceptance: {passed}/{} criteria passed in {:.1} s",
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if passed == criteria.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
