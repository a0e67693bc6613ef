//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use argprin::runner::random_cases;
use argprin::scenario::{load_scenario, RandomSuite, Scenario};
use argprin::{run, Report};
use argprin_core::argument::{
    linking_number, log_residue_pv, round_to_integer, winding_number, zero_count, HolomorphicBoundary,
};
use argprin_core::contour::{angles, ClosedCurve};
use argprin_core::cr::classify;
use argprin_core::poly::Polynomial;
use argprin_core::scalar::cis;
use nalgebra::DMatrix;
use num_complex::Complex64 as C;

const FAMILY_BUILTINS: [&str; 6] = ["example1", "example2", "example3", "example4", "model_torus", "degree_one"];

fn scenario(id: &str) -> Scenario {
    load_scenario(&format!("builtin:{id}")).unwrap_or_else(|e| panic!("{id}: {e}"))
}

fn timed_run(s: &Scenario) -> (Report, Duration) {
    let start = Instant::now();
    let r = run(s).unwrap_or_else(|e| panic!("{}: {e}", s.id));
    (r, start.elapsed())
}

/// Reports of the built-ins at their own grids, computed once.
fn report(id: &str) -> Report {
    static CACHE: OnceLock<Mutex<BTreeMap<String, Report>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(r) = cache.lock().unwrap().get(id) {
        return r.clone();
    }
    let r = timed_run(&scenario(id)).0;
    cache.lock().unwrap().insert(id.to_string(), r.clone());
    r
}

fn metric(r: &Report, key: &str) -> f64 {
    *r.metrics.get(key).or_else(|| r.diagnostics.get(key)).unwrap_or_else(|| panic!("{}: no value {key}", r.id))
}

fn flag(r: &Report, key: &str) -> bool {
    *r.flags.get(key).unwrap_or_else(|| panic!("{}: no flag {key}", r.id))
}

fn verdict<'a>(r: &'a Report, key: &str) -> &'a str {
    r.verdicts.get(key).unwrap_or_else(|| panic!("{}: no verdict {key}", r.id))
}

fn check(r: &Report, name: &str) -> bool {
    r.checks.iter().find(|c| c.name == name).unwrap_or_else(|| panic!("{}: no check {name}", r.id)).pass
}

/// Criterion outcome: failures collected as messages.
struct Outcome {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self { failures: Vec::new(), notes: Vec::new() }
    }

    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }
}

/// Zeros of `Σ cₖ zᵏ − b` inside the unit disc, from the eigenvalues of the companion matrix.
fn roots_inside(coefficients: &[C], b: C) -> usize {
    let mut c = coefficients.to_vec();
    c[0] -= b;
    let d = c.len() - 1;
    let lead = c[d];
    let m = DMatrix::<C>::from_fn(d, d, |i, j| {
        if j == d - 1 {
            -c[i] / lead
        } else if i == j + 1 {
            C::new(1.0, 0.0)
        } else {
            C::new(0.0, 0.0)
        }
    });
    let eig = m.schur().eigenvalues().expect("complex Schur form is triangular");
    eig.iter().filter(|z| z.norm() < 1.0).count()
}

fn criterion_1() -> Outcome {
    let mut o = Outcome::new();
    let suite = RandomSuite { polynomials: 20, max_degree: 5, targets: 5 };
    let cases = random_cases(20240611, &suite);
    let start = Instant::now();
    let mut counts = Vec::new();
    for c in &cases {
        let phi = HolomorphicBoundary::from_taylor(256, &c.coefficients).unwrap();
        let curve = ClosedCurve::from_scalar(phi.samples().to_vec()).unwrap();
        for &b in &c.targets {
            let n = zero_count(&phi, b).unwrap();
            let w = round_to_integer(winding_number(&curve, b).unwrap(), 1e-6).unwrap();
            counts.push((n, w, b));
        }
    }
    let elapsed = start.elapsed();
    let mut k = 0;
    for c in &cases {
        o.require(c.coefficients.len() <= 6, "degree above 5");
        for &b in &c.targets {
            let (n, w, _) = counts[k];
            k += 1;
            let oracle = roots_inside(&c.coefficients, b) as f64;
            o.require(n == w as f64, format!("zero_count {n} vs winding {w} at b = {b}"));
            o.require(n == oracle, format!("zero_count {n} vs companion-matrix roots {oracle} at b = {b}"));
        }
    }
    o.require(counts.len() == 100, format!("{} cases", counts.len()));
    o.require(elapsed < Duration::from_secs(5), format!("took {elapsed:?}"));
    let ap = report("ap_suite");
    o.require(check(&ap, "random.count_equals_winding"), "workbench random suite disagrees");
    o.note(format!("{} cases in {:.3} s", counts.len(), elapsed.as_secs_f64()));
    o
}

fn criterion_2() -> Outcome {
    let mut o = Outcome::new();
    let n = 256;
    // Disc ζ ↦ (ζ, ζ²/2) in ℂ².
    let disc = |z: C| [z, z * z * 0.5];
    let points: Vec<Vec<C>> = angles::<f64>(n).into_iter().map(|p| disc(cis(p)).to_vec()).collect();
    let curve = ClosedCurve::from_points(&points).unwrap();
    let one = C::new(1.0, 0.0);
    let fixtures: [(&str, Vec<(C, &[u32])>, f64); 3] = [
        ("z1", vec![(one, &[1, 0])], 1.0),
        ("z1 - 2", vec![(one, &[1, 0]), (C::new(-2.0, 0.0), &[0, 0])], 0.0),
        ("z1^2 - 0.25", vec![(one, &[2, 0]), (C::new(-0.25, 0.0), &[0, 0])], 2.0),
    ];
    for (name, terms, want) in fixtures {
        let p = Polynomial::from_terms(2, &terms).unwrap();
        let link = linking_number(&curve, &p).unwrap();
        let composite = HolomorphicBoundary::from_fn(n, |z| p.eval(&disc(z))).unwrap();
        let count = zero_count(&composite, C::new(0.0, 0.0)).unwrap();
        o.require((link - want).abs() < 1e-9, format!("{name}: link {link}, expected {want}"));
        o.require((link - count).abs() < 1e-9, format!("{name}: link {link} vs weighted count {count}"));
    }
    let ap = report("ap_suite");
    for k in 0..3 {
        o.require(check(&ap, &format!("linking.{k}.equals_zero_count")), format!("workbench linking.{k}"));
        o.require(check(&ap, &format!("expect.linking.{k}")), format!("workbench linking.{k} value"));
    }
    o
}

fn criterion_3() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let cases: [(&str, fn(C) -> C, f64, f64); 3] = [
        ("2iζ²", |z| C::new(0.0, 2.0) * z * z, 4.0, 1e-5),
        ("ζ", |z| z, 2.0, 1e-6),
        ("2 + ζ", |z| z + 2.0, 0.0, 1e-8),
    ];
    for (name, f, want, tol) in cases {
        let j = HolomorphicBoundary::from_fn(256, f).unwrap();
        let v = log_residue_pv(&j).unwrap().value;
        o.require((v - C::new(want, 0.0)).norm() < tol, format!("{name}: {v}, expected {want} ± {tol:e}"));
        o.note(format!("{name} → {:.3e}", (v - C::new(want, 0.0)).norm()));
    }
    let elapsed = start.elapsed();
    o.require(elapsed < Duration::from_secs(2), format!("took {elapsed:?}"));
    o
}

fn criterion_4() -> Outcome {
    let mut o = Outcome::new();
    let e2 = report("example2");
    o.require(flag(&e2, "hypotheses_hold"), "example2 hypotheses fail");
    o.require(metric(&e2, "max_rank") == 1.0, format!("example2 max rank {}", metric(&e2, "max_rank")));
    let q = metric(&e2, "rank.sigma2_ratio.max");
    o.require(q < 1e-10, format!("example2 σ₂/σ₁ up to {q:e}"));
    for id in ["example1", "example3"] {
        let r = report(id);
        o.require(verdict(&r, "violated").split(',').any(|v| v == "orbit"), format!("{id}: orbit not violated"));
        o.require(!flag(&r, "orbit.nontrivial"), format!("{id}: orbit reported nontrivial"));
        let dense = metric(&r, "rank.fraction_sigma2_above_1e-2");
        o.require(dense > 0.5, format!("{id}: σ₂/σ₁ > 1e-2 on only {dense}"));
        o.require(verdict(&r, "outcome") == "counterexample-confirmed", format!("{id}: outcome {}", verdict(&r, "outcome")));
        o.note(format!("{id}: σ₂/σ₁ > 1e-2 on {:.1}%", 100.0 * dense));
    }
    o
}

fn criterion_5() -> Outcome {
    let mut o = Outcome::new();
    let r = report("model_torus");
    let d = metric(&r, "max_dzeta");
    o.require(d < 1e-9, format!("max |∂ζΦ| = {d:e}"));
    o.require(verdict(&r, "collapse") == "image collapses", "no collapse");
    o
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::new();
    let mut total = Duration::ZERO;
    for (id, value) in [("example1", 0usize), ("example2", 1), ("example3", 0), ("example4", 1)] {
        let s = scenario(id);
        let patch = s.patch_from(s.patch.as_ref().unwrap()).unwrap();
        let start = Instant::now();
        let field = classify(&patch, s.tolerances.rank).unwrap();
        total += start.elapsed();
        let off: Vec<usize> = field.points.iter().zip(&field.c).filter(|(_, &c)| c != value).map(|(&i, _)| i).collect();
        if id == "example3" {
            // c = 1 only within one lattice cell of z₁ = 0.
            for &i in &off {
                let z = patch.point(i).unwrap();
                let u = patch.param(i);
                let mut cell: f64 = 0.0;
                for (a, axis) in patch.axes().iter().enumerate() {
                    let mut v = u.clone();
                    v[a] += axis.spacing();
                    let q = patch.eval(&v).unwrap();
                    cell = cell.max(q.iter().zip(&z).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt());
                }
                let c = field.c[field.points.iter().position(|&p| p == i).unwrap()];
                o.require(c == 1 && z[0].norm() <= cell, format!("example3: c = {c} at z₁ = {}", z[0]));
            }
            o.require(!off.is_empty(), "example3: exceptional circle not detected");
            o.note(format!("example3: {} points with c = 1 near z₁ = 0", off.len()));
        } else {
            o.require(off.is_empty(), format!("{id}: {} of {} points with c ≠ {value}", off.len(), field.c.len()));
        }
        let r = report(id);
        for c in r.checks.iter().filter(|c| c.name.starts_with("expect.c") || c.name == "expect.class" || c.name == "expect.constant") {
            o.require(c.pass, format!("{id}: {} ({})", c.name, c.detail));
        }
    }
    o.require(total < Duration::from_secs(30), format!("classification took {total:?}"));
    o.note(format!("classification {:.2} s", total.as_secs_f64()));
    o
}

fn criterion_7() -> Outcome {
    let mut o = Outcome::new();
    let t = report("strip_translating");
    let m = metric(&t, "moments.max_abs");
    o.require(m < 1e-8, format!("translating moments {m:e}"));
    o.require(!flag(&t, "orbit.common_point_found"), "translating: common point found");
    o.require(verdict(&t, "holomorphy") == "holomorphy certified", format!("translating: {}", verdict(&t, "holomorphy")));
    let d = metric(&t, "dbar.max");
    o.require(d < 1e-6, format!("translating ∂̄ residual {d:e}"));

    let c = report("strip_concentric");
    let m = metric(&c, "moments.max_abs");
    o.require(m < 1e-10, format!("concentric moments {m:e}"));
    o.require(flag(&c, "orbit.common_point_found"), "concentric: no common point");
    let b = C::new(metric(&c, "orbit.common_point.re"), metric(&c, "orbit.common_point.im"));
    let h = metric(&c, "orbit.grid_spacing");
    o.require(b.norm() <= h, format!("concentric common point {b} not within one search cell ({h}) of 0"));
    o.require(verdict(&c, "holomorphy") == "verdict withheld", format!("concentric: {}", verdict(&c, "holomorphy")));
    for q in ["dbar.q05", "dbar.median", "dbar.q95"] {
        let v = metric(&c, q);
        o.require((v - 0.5).abs() < 1e-3, format!("concentric {q} = {v}"));
    }
    o.note(format!("concentric ∂̄ median {}", metric(&c, "dbar.median")));
    o
}

fn criterion_8() -> Outcome {
    let mut o = Outcome::new();
    for id in FAMILY_BUILTINS {
        let r = report(id);
        if r.diagnostics.contains_key("jacobian.max_origin") {
            let origin = metric(&r, "jacobian.max_origin");
            let mass = metric(&r, "jacobian.max_negative_mass");
            o.require(origin < 1e-10, format!("{id}: max |J(0,t)| = {origin:e}"));
            o.require(mass < 1e-9, format!("{id}: negative mass {mass:e}"));
        } else {
            o.note(format!("{id}: {}", verdict(&r, "jacobian")));
        }
    }
    let e1 = report("example1");
    let v = metric(&e1, "fiber_ratio.max_violation");
    let c = metric(&e1, "fiber_ratio.control_violation");
    o.require(v < 1e-6, format!("example1 fiber ratio {v:e}"));
    o.require(c > 1e-2, format!("example1 control {c:e}"));
    o.note(format!("example1 ratio {v:.1e}, control {c:.2}"));
    o
}

fn relative_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn criterion_9() -> Outcome {
    let mut o = Outcome::new();
    for id in argprin::builtins::ids() {
        let s = scenario(id);
        let (a, ta) = timed_run(&s);
        let b = report(id);
        o.require(a.to_json() == b.to_json(), format!("{id}: reports differ between runs"));
        o.require(ta < Duration::from_secs(60), format!("{id}: took {ta:?}"));
        let fine = timed_run(&s.refined()).0;
        let keys: BTreeSet<&String> = a.metrics.keys().chain(fine.metrics.keys()).collect();
        for k in keys {
            match (a.metrics.get(k), fine.metrics.get(k)) {
                (Some(&x), Some(&y)) => {
                    let rel = relative_change(x, y);
                    o.require(rel < 1e-8, format!("{id}: {k} {x} → {y} (relative {rel:e})"));
                }
                _ => o.require(false, format!("{id}: metric {k} present on only one grid")),
            }
        }
        o.require(a.verdicts == fine.verdicts, format!("{id}: verdicts change under refinement"));
        o.note(format!("{id} {:.1} s", ta.as_secs_f64()));
    }
    o
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("zero count equals winding on random polynomials", criterion_1),
        ("linking numbers equal weighted zero counts", criterion_2),
        ("logarithmic residues", criterion_3),
        ("rank collapse and counterexamples", criterion_4),
        ("model torus is constant along discs", criterion_5),
        ("CR dimension fields", criterion_6),
        ("strip problems", criterion_7),
        ("Jacobian holomorphy and fiber ratios", criterion_8),
        ("determinism and grid convergence", criterion_9),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        let secs = start.elapsed().as_secs_f64();
        let status = if o.failures.is_empty() { "PASS" } else { "FAIL" };
        println!("{status} criterion {}: {name} ({secs:.1} s)", k + 1);
        for n in &o.notes {
            println!("    {n}");
        }
        for e in &o.failures {
            println!("    failure: {e}");
        }
        failed += usize::from(!o.failures.is_empty());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
