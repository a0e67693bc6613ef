//! Runs a scenario through the matching pipeline and assembles the report.

use std::fmt;
use std::sync::Arc;

use argprin_core::argument::{
    curve_degree, linking_number, locate_zeros, log_residue_pv, round_to_integer, winding_number, zero_count, Disc,
    HolomorphicBoundary,
};
use argprin_core::contour::{angles, ClosedCurve};
use argprin_core::cr::{classify, cr_verdict_from_rank, CrField, ManifoldPatch};
use argprin_core::family::{
    build_family, fiber_ratio_test, jacobian_field, max_dzeta, orbit_nontriviality, parametric_ap_verdict_with,
    rank_field_from, sample_family, sample_partials, strip_regularity, track_zeros, DiscFamily, OrbitMode, OrbitVerdict, Outcome,
    Perturbation,
};
use argprin_core::linalg::real_rank;
use argprin_core::moments::{complex_moments_with, dbar_planar, dbar_tangential, disc_extension, monomial_forms, PlanarGrid};
use argprin_core::poly::Polynomial;
use argprin_core::scalar::cis;
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::expr::{parse_complex, Expr};
use crate::report::{Field, Report};
use crate::scenario::{FamilyMode, Kind, LoadError, RandomSuite, Scenario};

/// A pipeline failure tagged with the stage that raised it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunError {
    pub stage: String,
    pub message: String,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.stage, self.message)
    }
}

impl std::error::Error for RunError {}

trait Stage<T> {
    fn stage(self, name: &str) -> Result<T, RunError>;
}

impl<T, E: fmt::Display> Stage<T> for Result<T, E> {
    fn stage(self, name: &str) -> Result<T, RunError> {
        self.map_err(|e| RunError { stage: name.into(), message: e.to_string() })
    }
}

fn load(e: LoadError) -> RunError {
    RunError { stage: "compile".into(), message: e.to_string() }
}

/// Executes the scenario and returns its report.
pub fn run(s: &Scenario) -> Result<Report, RunError> {
    let mut r = Report::new(s);
    match s.kind {
        Kind::FamilyVerdict => family_verdict(s, &mut r)?,
        Kind::StripProblem => strip_problem(s, &mut r)?,
        Kind::CrField => {
            let patch = s.patch_from(s.patch.as_ref().expect("validated")).map_err(load)?;
            let field = classify(&patch, s.tolerances.rank).stage("classify")?;
            cr_summary(s, &mut r, &patch, &field)?;
        }
        Kind::ArgumentPrinciple => argument_principle(s, &mut r)?,
        Kind::MomentCheck => moment_check(s, &mut r)?,
    }
    Ok(r)
}

fn build(s: &Scenario) -> Result<DiscFamily<f64>, RunError> {
    let spec = s.family.as_ref().expect("validated");
    let phi = s.family_fn(spec).map_err(load)?;
    let m = s.manifold(spec).stage("manifold")?;
    if s.kind == Kind::FamilyVerdict {
        build_family(phi, m, s.zeta_grid(), spec.d).stage("build_family")
    } else {
        sample_family(phi, m, s.zeta_grid(), spec.d).stage("build_family")
    }
}

fn family_verdict(s: &Scenario, r: &mut Report) -> Result<(), RunError> {
    let f = build(s)?;
    let spec = s.family.as_ref().expect("validated");
    r.metric("n", f.n() as f64);
    r.metric("k", f.k() as f64);
    r.metric("d", f.d() as f64);
    r.diagnostic("holomorphy_defect", f.holomorphy_defect());
    r.flag("low_homology_vanishes", f.manifold().low_homology_vanishes());
    let (hypotheses, collapsed) = match spec.mode {
        FamilyMode::Theorem => theorem(s, r, &f)?,
        FamilyMode::Collapse => {
            collapse(s, r, &f)?;
            (false, false)
        }
    };
    jacobian(r, &f)?;
    if let Some(p) = &s.patch {
        let patch = s.patch_from(p).map_err(load)?;
        let cv = cr_verdict_from_rank(hypotheses, collapsed, &patch, s.tolerances.rank).stage("cr_verdict")?;
        r.flag("cr.predicted", cv.predicted);
        r.verdict(
            "cr.prediction",
            match cv.confirmed {
                Some(true) => "c ≥ 1 predicted and confirmed",
                Some(false) => "c ≥ 1 predicted but not found",
                None => "no prediction",
            },
        );
        r.check("cr.cross-check", cv.confirmed != Some(false), "rank collapse predicts c ≥ 1 on the image");
        cr_summary(s, r, &patch, &cv.field)?;
    }
    Ok(())
}

fn theorem(s: &Scenario, r: &mut Report, f: &DiscFamily<f64>) -> Result<(bool, bool), RunError> {
    let mode = s.orbit_mode().expect("validated");
    let v = parametric_ap_verdict_with(f, mode, s.tolerances.rank).stage("parametric_ap_verdict")?;
    r.verdict("outcome", v.outcome.name());
    r.verdict("degeneracy", v.degeneracy.branch.name());
    r.verdict("orbit", v.orbit.verdict.name());
    r.verdict("violated", if v.violated.is_empty() { "none".to_string() } else { v.violated.join(",") });
    r.flag("regular", v.regularity.pass());
    r.flag("regularity.t_rank", v.regularity.t_rank_pass);
    r.flag("regularity.boundary_rank", v.regularity.boundary_rank_pass);
    r.flag("degenerate", v.degeneracy.branch.is_degenerate());
    r.flag("degeneracy.verified", v.degeneracy.verified);
    r.flag("orbit.declared", v.orbit.declared);
    r.flag("orbit.nontrivial", v.orbit.verdict == OrbitVerdict::Nontrivial);
    r.flag("hypotheses_hold", v.hypotheses_hold);
    r.flag("conclusion_holds", v.conclusion_holds);
    r.metric("max_rank", v.max_rank as f64);
    r.metric("degeneracy.boundary_max_real_rank", v.degeneracy.boundary_max_real_rank as f64);
    if let Some(deg) = v.degeneracy.degree {
        r.metric("degeneracy.degree", deg as f64);
        r.diagnostic("degeneracy.preimages", v.degeneracy.preimages as f64);
    }
    r.diagnostic("regularity.t_rank_failures", v.regularity.t_rank_failures.len() as f64);
    for (rank, count) in &v.regularity.boundary_ranks {
        r.diagnostic(&format!("regularity.boundary_rank.{rank}"), *count as f64);
    }
    if let Some(cp) = v.orbit.common_point {
        r.diagnostic("orbit.common_point.re", cp.point.re);
        r.diagnostic("orbit.common_point.im", cp.point.im);
        r.diagnostic("orbit.common_point.clearance", cp.clearance);
    }
    if let Some(h) = v.orbit.grid_spacing {
        r.diagnostic("orbit.grid_spacing", h);
    }
    let ratios = v.rank.second_ratio();
    let n = ratios.len().max(1) as f64;
    r.diagnostic("rank.sigma2_ratio.max", ratios.iter().copied().fold(0.0, f64::max));
    r.diagnostic("rank.sigma2_ratio.min", ratios.iter().copied().fold(f64::INFINITY, f64::min));
    r.diagnostic("rank.fraction_sigma2_above_1e-2", ratios.iter().filter(|&&q| q > 1e-2).count() as f64 / n);
    r.diagnostic("rank.points", ratios.len() as f64);
    r.check(
        "theorem.implication",
        v.outcome != Outcome::Fail,
        format!("hypotheses {} ⇒ max rank {} < d = {}", v.hypotheses_hold, v.max_rank, v.d),
    );
    if let Some(want) = &s.expect.outcome {
        r.expect("outcome", v.outcome.name() == want, format!("expected {want}, got {}", v.outcome.name()));
    }
    if let Some(want) = s.expect.max_rank {
        r.expect("max_rank", v.max_rank == want, format!("expected {want}, got {}", v.max_rank));
    }

    let zi0 = f.zeta_grid().interior_len();
    let nb = f.zeta_grid().boundary;
    let values: Vec<Option<f64>> = (0..v.rank.n_t)
        .flat_map(|ti| (0..nb).map(move |j| (ti, j)))
        .map(|(ti, j)| Some(v.rank.ranks[ti * v.rank.n_zeta + zi0 + j] as f64))
        .collect();
    r.fields.push(Field::new(
        "rank",
        ("psi", "t_index"),
        angles::<f64>(nb),
        (0..v.rank.n_t).map(|t| t as f64).collect(),
        values,
        true,
    ));
    Ok((v.hypotheses_hold, v.conclusion_holds))
}

fn collapse(s: &Scenario, r: &mut Report, f: &DiscFamily<f64>) -> Result<(), RunError> {
    let parts = sample_partials(f).stage("partials")?;
    let dz = max_dzeta(&parts);
    let mut spread: f64 = 0.0;
    for ti in 0..f.manifold().len() {
        let curve = f.boundary_curve(ti).stage("boundary_curve")?;
        let centre = f.eval(C::new(0.0, 0.0), &f.manifold().coords(ti)).stage("eval")?;
        for j in 0..curve.len() {
            let p = curve.point(j);
            let d = p.iter().zip(&centre).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            spread = spread.max(d);
        }
    }
    let floor = 1e-12 * f.scale().max(1.0);
    let zetas = f.zeta_points();
    let mut image_rank = 0;
    for row in &parts {
        for (zi, p) in row.iter().enumerate() {
            if f.zeta_grid().is_boundary(zi) {
                let mut cols = vec![p.dpsi(zetas[zi])];
                cols.extend(p.fields.iter().cloned());
                image_rank = image_rank.max(real_rank(&cols, s.tolerances.rank, floor));
            }
        }
    }
    let rank = rank_field_from(f, &parts, s.tolerances.rank);
    r.metric("image_real_rank", image_rank as f64);
    r.metric("max_rank", rank.max_rank() as f64);
    r.diagnostic("max_dzeta", dz);
    r.diagnostic("boundary_curve_spread", spread);
    let constant = dz < 1e-9 && spread < 1e-9;
    r.flag("constant_in_zeta", constant);
    let collapses = constant && image_rank <= 1;
    r.flag("image_collapses", collapses);
    let verdict = if collapses { "image collapses" } else { "no collapse" };
    r.verdict("collapse", verdict);
    r.check("collapse.rank", !constant || image_rank <= 1, "a family constant in ζ has at most one-dimensional image");
    if let Some(want) = &s.expect.verdict {
        r.expect("verdict", verdict == want, format!("expected {want}, got {verdict}"));
    }
    Ok(())
}

fn jacobian(r: &mut Report, f: &DiscFamily<f64>) -> Result<(), RunError> {
    let jf = match jacobian_field(f, None, None) {
        Ok(jf) => jf,
        Err(e) => {
            r.verdict("jacobian", format!("not available: {e}"));
            return Ok(());
        }
    };
    r.verdict("jacobian.eta", format!("{:?}", jf.eta));
    r.verdict("jacobian.fields", format!("{:?}", jf.fields_used));
    let masses = jf.negative_masses().stage("jacobian")?;
    let max_mass = masses.iter().copied().fold(0.0, f64::max);
    let origin = jf.max_origin();
    r.diagnostic("jacobian.max_origin", origin);
    r.diagnostic("jacobian.max_negative_mass", max_mass);
    r.diagnostic("jacobian.scale", jf.scale);
    r.check("jacobian.vanishes_at_centre", origin < 1e-10 * jf.scale.max(1.0), format!("max |J(0,t)| = {origin:e}"));
    r.check("jacobian.holomorphic", max_mass < 1e-9, format!("max negative Fourier mass {max_mass:e}"));
    let nb = jf.boundary.first().map_or(0, Vec::len);
    let values: Vec<Option<f64>> = jf.boundary.iter().flat_map(|row| row.iter().map(|j| Some(j.norm()))).collect();
    r.fields.push(Field::new(
        "abs_j",
        ("psi", "t_index"),
        angles::<f64>(nb),
        (0..jf.t_count()).map(|t| t as f64).collect(),
        values,
        false,
    ));

    let ratio = fiber_ratio_test(&jf, f, None).stage("fiber_ratio_test")?;
    r.flag("fiber_ratio.vacuous", ratio.vacuous);
    r.diagnostic("fiber_ratio.pairs", ratio.pairs as f64);
    if !ratio.vacuous {
        r.diagnostic("fiber_ratio.max_violation", ratio.max_violation);
        r.check("fiber_ratio", ratio.pass, format!("max |J/J̄ difference| {:e}", ratio.max_violation));
        // Holomorphic in ζ and zero-free on the boundary, but not constant on fibers.
        let control: Perturbation<f64> = Arc::new(|z: C, t: &[C]| z * (t.first().copied().unwrap_or_default() + 2.0));
        let c = fiber_ratio_test(&jf, f, Some(control)).stage("fiber_ratio_test")?;
        r.diagnostic("fiber_ratio.control_violation", c.max_violation);
        r.check("fiber_ratio.control_detected", c.max_violation > 1e-2, format!("perturbed J violation {:e}", c.max_violation));
    }

    let tr = track_zeros(&jf).stage("track_zeros")?;
    r.flag("zeros.conserved", tr.conserved);
    r.diagnostic("zeros.singular_fibers", tr.singular_fibers.len() as f64);
    r.diagnostic("zeros.chains", tr.chains.len() as f64);
    let counts: Vec<f64> = tr.fibers.iter().filter_map(|fz| fz.count).collect();
    if let Some(mx) = counts.iter().copied().reduce(f64::max) {
        r.diagnostic("zeros.max_count", mx);
    }
    r.check("zeros.conservation", tr.conserved, "located multiplicities match the argument-principle count on every fiber");
    Ok(())
}

/// Real-dimension cell size of the lattice at `idx`: largest image step along one axis.
fn cell_size(patch: &ManifoldPatch<f64>, idx: usize) -> Result<f64, RunError> {
    let u = patch.param(idx);
    let base = patch.eval(&u).stage("patch")?;
    let mut best: f64 = 0.0;
    for (a, axis) in patch.axes().iter().enumerate() {
        let mut v = u.clone();
        v[a] += axis.spacing();
        let q = patch.eval(&v).stage("patch")?;
        best = best.max(q.iter().zip(&base).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt());
    }
    Ok(best)
}

fn cr_summary(s: &Scenario, r: &mut Report, patch: &ManifoldPatch<f64>, field: &CrField<f64>) -> Result<(), RunError> {
    r.metric("cr.d", field.d as f64);
    r.metric("cr.n", field.n as f64);
    r.metric("cr.min_c", field.min_c() as f64);
    r.metric("cr.max_c", field.max_c() as f64);
    r.flag("cr.constant", field.constant);
    r.flag("cr.bounds_hold", field.bounds_hold());
    r.diagnostic("cr.points", field.c.len() as f64);
    for c in field.min_c()..=field.max_c() {
        r.diagnostic(&format!("cr.fraction.c{c}"), field.fraction(c));
    }
    let mut classes: Vec<String> = field.classes.iter().map(|c| c.name()).collect();
    classes.sort();
    classes.dedup();
    r.verdict("cr.classes", classes.join(","));
    r.check("cr.bounds", field.bounds_hold(), "max(0, d − n) ≤ c ≤ ⌊d/2⌋ at every point");

    // c over the first two axes, maximised over the rest.
    let axes = patch.axes();
    let nx = axes[0].count;
    let ny = axes.get(1).map_or(1, |a| a.count);
    let mut grid = vec![None::<f64>; nx * ny];
    for (&idx, &c) in field.points.iter().zip(&field.c) {
        let m = patch.multi_index(idx);
        let k = m.get(1).copied().unwrap_or(0) * nx + m[0];
        grid[k] = Some(grid[k].map_or(c as f64, |v: f64| v.max(c as f64)));
    }
    let names: Vec<String> = s.patch.as_ref().map(|p| p.axes.iter().map(|a| a.name.clone()).collect()).unwrap_or_default();
    let xl = names.first().cloned().unwrap_or_else(|| "u0".into());
    let yl = names.get(1).cloned().unwrap_or_else(|| "u1".into());
    r.fields.push(Field::new(
        "c",
        (&xl, &yl),
        (0..nx).map(|i| axes[0].value(i)).collect(),
        (0..ny).map(|j| axes.get(1).map_or(0.0, |a| a.value(j))).collect(),
        grid,
        true,
    ));

    if let Some(e) = &s.expect.c {
        let mut off = 0;
        let mut exceptional = 0;
        for (&idx, &c) in field.points.iter().zip(&field.c) {
            if c == e.value {
                continue;
            }
            match &e.exception {
                Some(x) if c == x.c => {
                    let z = patch.point(idx).stage("patch")?;
                    let near = z.get(x.coordinate).map_or(f64::INFINITY, |w| w.norm()) <= x.within_cells * cell_size(patch, idx)?;
                    if near {
                        exceptional += 1;
                    } else {
                        off += 1;
                    }
                }
                _ => off += 1,
            }
        }
        r.diagnostic("cr.exceptional_points", exceptional as f64);
        let locus_seen = e.exception.is_none() || exceptional > 0;
        r.expect(
            "c",
            off == 0 && locus_seen,
            format!("{off} points off the expected value {}, {exceptional} on the exceptional locus", e.value),
        );
        if let Some(class) = &e.class {
            let ok = field.c.iter().zip(&field.classes).filter(|(c, _)| **c == e.value).all(|(_, k)| &k.name() == class);
            r.expect("class", ok, format!("points with c = {} classified as {class}", e.value));
        }
        if let Some(constant) = e.constant {
            r.expect("constant", field.constant == constant, format!("constancy flag {}", field.constant));
        }
    }
    Ok(())
}

fn eval_function(e: &Expr, z: &[C]) -> C {
    if z.len() == 1 {
        e.eval(&[z[0], z[0]])
    } else {
        e.eval(z)
    }
}

/// Moments and extension of `f` on every disc boundary of the family.
struct DiscMoments {
    max_moment: f64,
    max_negative_mass: f64,
    all_vanish: bool,
    all_extend: bool,
    consistent: bool,
}

fn disc_moments(s: &Scenario, f: &DiscFamily<f64>, e: &Expr) -> Result<DiscMoments, RunError> {
    let forms = monomial_forms(f.n(), s.k_max);
    let rows: Vec<Result<(f64, f64, bool, bool), RunError>> = (0..f.manifold().len())
        .into_par_iter()
        .map(|ti| {
            let curve = f.boundary_curve(ti).stage("boundary_curve")?;
            let vals: Vec<C> = (0..curve.len()).map(|j| eval_function(e, &curve.point(j))).collect();
            if let Some(j) = vals.iter().position(|v| !v.is_finite()) {
                return Err(RunError { stage: "function".into(), message: format!("{} is not finite at {:?}", e.source(), curve.point(j)) });
            }
            let m = complex_moments_with(&curve, &vals, &forms, s.tolerances.moment).stage("complex_moments")?;
            let x = disc_extension(&curve, &vals).stage("disc_extension")?;
            let scale = vals.iter().fold(1.0f64, |a, v| a.max(v.norm()));
            let extends = x.negative_mass < s.tolerances.extension * scale;
            Ok((m.max_abs, x.negative_mass, m.vanish, extends))
        })
        .collect();
    let mut out = DiscMoments { max_moment: 0.0, max_negative_mass: 0.0, all_vanish: true, all_extend: true, consistent: true };
    for row in rows {
        let (m, x, v, ext) = row?;
        out.max_moment = out.max_moment.max(m);
        out.max_negative_mass = out.max_negative_mass.max(x);
        out.all_vanish &= v;
        out.all_extend &= ext;
        out.consistent &= v == ext;
    }
    Ok(out)
}

fn strip_problem(s: &Scenario, r: &mut Report) -> Result<(), RunError> {
    let f = build(s)?;
    let fun = s.functions_for(1).map_err(load)?.remove(0);
    let dm = disc_moments(s, &f, &fun)?;
    r.diagnostic("moments.max_abs", dm.max_moment);
    r.diagnostic("extension.max_negative_mass", dm.max_negative_mass);
    r.flag("moments.vanish", dm.all_vanish);
    r.flag("extension.extends", dm.all_extend);
    r.check("moments.equivalence", dm.consistent, "vanishing moments ⇔ holomorphic extension on every circle");
    r.metric("k_max", s.k_max as f64);

    let orbit = orbit_nontriviality(&f, OrbitMode::Planar { coordinate: 0 }).stage("orbit")?;
    r.verdict("orbit", orbit.verdict.name());
    r.flag("orbit.nontrivial", orbit.verdict == OrbitVerdict::Nontrivial);
    r.flag("orbit.common_point_found", orbit.common_point.is_some());
    if let Some(cp) = orbit.common_point {
        r.diagnostic("orbit.common_point.re", cp.point.re);
        r.diagnostic("orbit.common_point.im", cp.point.im);
        r.diagnostic("orbit.common_point.clearance", cp.clearance);
    }
    if let Some(h) = orbit.grid_spacing {
        r.diagnostic("orbit.grid_spacing", h);
    }
    let reg = strip_regularity(&f, 0).stage("strip_regularity")?;
    r.flag("regular", reg.pass);
    r.diagnostic("regularity.min_abs_im", reg.min_abs_im);
    r.diagnostic("regularity.checked", reg.checked as f64);
    r.diagnostic("regularity.excluded", reg.excluded as f64);

    let verdict = if !dm.all_vanish {
        "moment condition fails"
    } else if orbit.verdict == OrbitVerdict::Nontrivial && reg.pass {
        "holomorphy certified"
    } else {
        "verdict withheld"
    };
    r.verdict("holomorphy", verdict);

    // ∂̄ residual on the covered part of a planar grid.
    let curves: Vec<Vec<C>> = (0..f.manifold().len())
        .map(|ti| Ok(f.boundary_curve(ti).stage("boundary_curve")?.coord(0).to_vec()))
        .collect::<Result<_, RunError>>()?;
    let grid = match s.planar_grid {
        Some(g) => PlanarGrid::square(g.lo, g.hi, g.count),
        None => {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for z in curves.iter().flatten() {
                lo = lo.min(z.re).min(z.im);
                hi = hi.max(z.re).max(z.im);
            }
            PlanarGrid::square(lo, hi, 41)
        }
    };
    let pts = grid.points();
    let mask: Vec<bool> = pts
        .par_iter()
        .map(|&p| curves.iter().any(|c| argprin_core::argument::polygon_winding(c, p).unwrap_or(0) >= 1))
        .collect();
    let values: Vec<C> = pts.iter().map(|&p| eval_function(&fun, &[p])).collect();
    let dbar = dbar_planar(&grid, &values, Some(&mask)).stage("dbar_residual")?;
    let max = dbar.iter().map(|d| d.value).fold(0.0, f64::max);
    let min = dbar.iter().map(|d| d.value).fold(f64::INFINITY, f64::min);
    let mean = dbar.iter().map(|d| d.value).sum::<f64>() / dbar.len().max(1) as f64;
    r.diagnostic("dbar.max", max);
    r.diagnostic("dbar.min", min);
    r.diagnostic("dbar.mean", mean);
    let mut sorted: Vec<f64> = dbar.iter().map(|d| d.value).collect();
    sorted.sort_by(f64::total_cmp);
    if !sorted.is_empty() {
        let q = |p: f64| sorted[((sorted.len() - 1) as f64 * p).round() as usize];
        r.diagnostic("dbar.q05", q(0.05));
        r.diagnostic("dbar.median", q(0.5));
        r.diagnostic("dbar.q95", q(0.95));
    }
    r.diagnostic("dbar.points", dbar.len() as f64);
    r.diagnostic("dbar.step", grid.h);
    let holomorphic = !dbar.is_empty() && max < s.tolerances.dbar;
    r.flag("dbar.holomorphic", holomorphic);
    match verdict {
        "holomorphy certified" => r.check("dbar.cross-check", holomorphic, format!("certified, max |∂̄f| = {max:e}")),
        "moment condition fails" => r.check("dbar.cross-check", !holomorphic, format!("moments fail, max |∂̄f| = {max:e}")),
        _ => {}
    }
    let mut field = vec![None; grid.len()];
    for d in &dbar {
        field[d.index] = Some(d.value);
    }
    let xs: Vec<f64> = (0..grid.nx).map(|i| grid.origin.re + grid.h * i as f64).collect();
    let ys: Vec<f64> = (0..grid.ny).map(|j| grid.origin.im + grid.h * j as f64).collect();
    r.fields.push(Field::new("dbar", ("re z", "im z"), xs, ys, field, false));
    if let Some(want) = &s.expect.verdict {
        r.expect("verdict", verdict == want, format!("expected {want}, got {verdict}"));
    }
    Ok(())
}

fn moment_check(s: &Scenario, r: &mut Report) -> Result<(), RunError> {
    let f = build(s)?;
    let funs = s.functions_for(f.n()).map_err(load)?;
    r.metric("n", f.n() as f64);
    r.metric("k_max", s.k_max as f64);
    r.metric("forms", monomial_forms(f.n(), s.k_max).len() as f64);
    let patch = match &s.patch {
        Some(p) => {
            let patch = s.patch_from(p).map_err(load)?;
            let field = classify(&patch, s.tolerances.rank).stage("classify")?;
            cr_summary(s, r, &patch, &field)?;
            Some(patch)
        }
        None => None,
    };
    for (k, e) in funs.iter().enumerate() {
        let key = format!("f{k}");
        let dm = disc_moments(s, &f, e)?;
        r.verdict(&format!("{key}.function"), e.source());
        r.verdict(&format!("{key}.extension"), if dm.all_extend { "extends into every disc" } else { "does not extend" });
        r.flag(&format!("{key}.moments_vanish"), dm.all_vanish);
        r.flag(&format!("{key}.extends"), dm.all_extend);
        r.diagnostic(&format!("{key}.moments.max_abs"), dm.max_moment);
        r.diagnostic(&format!("{key}.extension.max_negative_mass"), dm.max_negative_mass);
        r.check(&format!("{key}.equivalence"), dm.consistent, "vanishing moments ⇔ holomorphic extension on every disc");
        if let Some(patch) = &patch {
            let vals: Vec<C> = (0..patch.len())
                .map(|idx| patch.point(idx).map(|z| eval_function(e, &z)))
                .collect::<Result<_, _>>()
                .stage("patch")?;
            let d = dbar_tangential(patch, &vals).stage("dbar_residual")?;
            let max = d.iter().map(|x| x.value).fold(0.0, f64::max);
            r.diagnostic(&format!("{key}.dbar_tangential.max"), max);
            let cr = !d.is_empty() && max < s.tolerances.dbar_tangential;
            r.flag(&format!("{key}.cr_by_dbar"), cr);
            r.check(
                &format!("{key}.cr-cross-check"),
                cr == dm.all_extend,
                format!("extension {} vs tangential ∂̄ max {max:e}", dm.all_extend),
            );
        }
        if let Some(&want) = s.expect.extends.get(k) {
            r.expect(&format!("{key}.extends"), dm.all_extend == want, format!("expected {want}, got {}", dm.all_extend));
        }
    }
    Ok(())
}

/// One random polynomial (Taylor coefficients) with its targets.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomCase {
    pub coefficients: Vec<C>,
    pub targets: Vec<C>,
}

/// Seeded polynomials of degree `1..=max_degree` with coefficients in the unit
/// square and targets in `[−1.5, 1.5]²` at distance ≥ `10⁻²·max(1, max|p|)`
/// from the image of the unit circle.
pub fn random_cases(seed: u64, suite: &RandomSuite) -> Vec<RandomCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = |rng: &mut ChaCha8Rng, r: f64| C::new(rng.gen_range(-r..r), rng.gen_range(-r..r));
    (0..suite.polynomials)
        .map(|_| {
            let degree = rng.gen_range(1..=suite.max_degree);
            let mut coefficients: Vec<C> = (0..=degree).map(|_| unit(&mut rng, 1.0)).collect();
            while coefficients[degree].norm() < 0.1 {
                coefficients[degree] = unit(&mut rng, 1.0);
            }
            let image: Vec<C> = (0..4096)
                .map(|j| {
                    let z = cis(std::f64::consts::TAU * j as f64 / 4096.0);
                    coefficients.iter().rev().fold(C::new(0.0, 0.0), |acc, a| acc * z + a)
                })
                .collect();
            let scale = image.iter().fold(1.0f64, |a, v| a.max(v.norm()));
            let mut targets = Vec::with_capacity(suite.targets);
            while targets.len() < suite.targets {
                let b = unit(&mut rng, 1.5);
                if image.iter().all(|v| (v - b).norm() >= 1e-2 * scale) {
                    targets.push(b);
                }
            }
            RandomCase { coefficients, targets }
        })
        .collect()
}

fn boundary_of(e: &Expr, samples: usize) -> Result<HolomorphicBoundary<f64>, RunError> {
    HolomorphicBoundary::from_fn(samples, |z| e.eval(&[z])).stage("sample")
}

fn argument_principle(s: &Scenario, r: &mut Report) -> Result<(), RunError> {
    let a = s.argument.as_ref().expect("validated");
    let n = s.grid.boundary;
    let tol = s.tolerances.integer;
    if let Some(suite) = &a.random {
        let cases = random_cases(s.seed, suite);
        let rows: Vec<Result<Vec<(i64, i64)>, RunError>> = cases
            .par_iter()
            .map(|c| {
                let phi = HolomorphicBoundary::from_taylor(n, &c.coefficients).stage("sample")?;
                let curve = ClosedCurve::from_scalar(phi.samples().to_vec()).stage("sample")?;
                c.targets
                    .iter()
                    .map(|&b| {
                        let w = round_to_integer(winding_number(&curve, b).stage("winding_number")?, tol).stage("winding_number")?;
                        let k = round_to_integer(zero_count(&phi, b).stage("zero_count")?, tol).stage("zero_count")?;
                        Ok((k, w))
                    })
                    .collect()
            })
            .collect();
        let mut agree = 0;
        let mut total = 0;
        for (p, row) in rows.into_iter().enumerate() {
            for (t, (k, w)) in row?.into_iter().enumerate() {
                r.metric(&format!("random.{p:02}.{t}.count"), k as f64);
                r.metric(&format!("random.{p:02}.{t}.winding"), w as f64);
                total += 1;
                agree += usize::from(k == w);
            }
        }
        r.metric("random.cases", total as f64);
        r.metric("random.agreements", agree as f64);
        r.check("random.count_equals_winding", agree == total, format!("{agree}/{total} cases agree"));
    }
    for (k, c) in a.counts.iter().enumerate() {
        let key = format!("count.{k}");
        let e = Expr::parse(&c.phi, &["zeta"]).map_err(|x| load(LoadError { field: key.clone(), message: x.to_string() }))?;
        let b = parse_complex(&c.target).stage("compile")?;
        let phi = boundary_of(&e, n)?;
        let count = zero_count(&phi, b).stage("zero_count")?;
        r.verdict(&format!("{key}.phi"), c.phi.as_str());
        r.metric_scaled(&format!("{key}.value"), count, 1.0);
        let zeros = locate_zeros(&phi.shifted(b), Disc::unit()).stage("locate_zeros")?;
        r.metric_scaled(&format!("{key}.located"), zeros.weighted_count(), 1.0);
        r.diagnostic(&format!("{key}.zeros"), zeros.len() as f64);
        r.check(
            &format!("{key}.locate"),
            (zeros.weighted_count() - count).abs() < 1e-6,
            format!("located weight {} vs count {count}", zeros.weighted_count()),
        );
        let curve = ClosedCurve::from_scalar(phi.samples().to_vec()).stage("sample")?;
        if let Ok(w) = winding_number(&curve, b) {
            r.metric_scaled(&format!("{key}.winding"), w, 1.0);
            r.check(&format!("{key}.argument_principle"), (w - count).abs() < 1e-6, format!("winding {w} vs count {count}"));
        }
        if let Some(want) = c.expected {
            r.expect(&format!("{key}"), (count - want).abs() < 1e-6, format!("expected {want}, got {count}"));
        }
    }
    for (k, c) in a.residues.iter().enumerate() {
        let key = format!("residue.{k}");
        let e = Expr::parse(&c.j, &["zeta"]).map_err(|x| load(LoadError { field: key.clone(), message: x.to_string() }))?;
        let j = boundary_of(&e, n)?;
        let v = log_residue_pv(&j).stage("log_residue_pv")?;
        let count = zero_count(&j, C::new(0.0, 0.0)).stage("zero_count")?;
        r.verdict(&format!("{key}.j"), c.j.as_str());
        r.metric_scaled(&format!("{key}.re"), v.value.re, v.value.norm());
        r.metric_scaled(&format!("{key}.im"), v.value.im, v.value.norm());
        r.metric_scaled(&format!("{key}.zero_count"), count, 1.0);
        r.diagnostic(&format!("{key}.pv_windows"), v.pv_windows.len() as f64);
        r.check(
            &format!("{key}.twice_count"),
            (v.value - C::new(2.0 * count, 0.0)).norm() < 1e-6,
            format!("I = {} vs 2N = {}", v.value, 2.0 * count),
        );
        if let Some(want) = c.expected {
            r.expect(&key, (v.value - C::new(want, 0.0)).norm() < 1e-5, format!("expected {want}, got {}", v.value));
        }
    }
    for (k, c) in a.linking.iter().enumerate() {
        let key = format!("linking.{k}");
        let disc: Vec<Expr> = c
            .disc
            .iter()
            .map(|d| Expr::parse(d, &["zeta"]))
            .collect::<Result<_, _>>()
            .stage("compile")?;
        let coeffs: Vec<C> = c.polynomial.iter().map(|t| parse_complex(&t.coefficient)).collect::<Result<_, _>>().stage("compile")?;
        let terms: Vec<(C, &[u32])> = coeffs.iter().zip(&c.polynomial).map(|(a, t)| (*a, t.exponents.as_slice())).collect();
        let p = Polynomial::from_terms(disc.len(), &terms).stage("polynomial")?;
        let points: Vec<Vec<C>> = angles::<f64>(n).into_iter().map(|psi| disc.iter().map(|d| d.eval(&[cis(psi)])).collect()).collect();
        let curve = ClosedCurve::from_points(&points).stage("sample")?;
        let link = linking_number(&curve, &p).stage("linking_number")?;
        let composite = HolomorphicBoundary::from_fn(n, |z| p.eval(&disc.iter().map(|d| d.eval(&[z])).collect::<Vec<_>>())).stage("sample")?;
        let count = zero_count(&composite, C::new(0.0, 0.0)).stage("zero_count")?;
        r.metric_scaled(&format!("{key}.value"), link, 1.0);
        r.metric_scaled(&format!("{key}.zero_count"), count, 1.0);
        let agree = match (round_to_integer(link, tol), round_to_integer(count, tol)) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        };
        r.check(&format!("{key}.equals_zero_count"), agree, format!("link {link} vs weighted count {count}"));
        if let Some(want) = c.expected {
            r.expect(&key, (link - want).abs() < tol, format!("expected {want}, got {link}"));
        }
    }
    for (k, c) in a.degrees.iter().enumerate() {
        let key = format!("degree.{k}");
        let e = Expr::parse(&c.map, &["zeta"]).stage("compile")?;
        let reference = parse_complex(&c.reference).stage("compile")?;
        let samples: Vec<C> = angles::<f64>(n).into_iter().map(|psi| e.eval(&[cis(psi)])).collect();
        let curve = ClosedCurve::from_scalar(samples).stage("sample")?;
        let deg = curve_degree(&curve, reference).stage("curve_degree")?;
        r.metric(&format!("{key}.value"), deg as f64);
        if let Some(want) = c.expected {
            r.expect(&key, deg == want, format!("expected {want}, got {deg}"));
        }
    }
    Ok(())
}
