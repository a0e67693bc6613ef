use std::sync::Arc;

use argprin_core::family::{
    build_family, degeneracy_check, jacobian_field, max_dzeta, parametric_ap_verdict, partials, rank_field_from,
    regularity_check, sample_partials, track_zeros, DegeneracyBranch, DiscFamily, FamilyFn, OrbitMode, Outcome,
    ParamManifold, ZetaGrid, RANK_TOL,
};
use argprin_core::linalg::{complex_rank, svd, ColMatrix};
use argprin_core::C64;

fn example3() -> DiscFamily<f64> {
    let phi: FamilyFn<f64> = Arc::new(|z: C64, l: &[C64]| Ok(vec![l[0] * z, l[1] * z, C64::new(l[0].norm_sqr(), 0.0)]));
    build_family(phi, ParamManifold::sphere(1.0, 2, 6, 6).unwrap(), ZetaGrid::with_boundary(64), 3).unwrap()
}

fn example4() -> DiscFamily<f64> {
    let s = 3f64.sqrt();
    let phi: FamilyFn<f64> = Arc::new(move |z: C64, t: &[C64]| {
        let w1 = t[0] - z * t[1].conj() * s;
        let w2 = t[1] + z * t[0].conj() * s;
        Ok(vec![w1, w2, w1])
    });
    build_family(phi, ParamManifold::sphere(0.5, 2, 6, 6).unwrap(), ZetaGrid::with_boundary(64), 3).unwrap()
}

fn model_torus() -> DiscFamily<f64> {
    let phi: FamilyFn<f64> = Arc::new(|_: C64, t: &[C64]| Ok(vec![t[0] * t[0] * 0.5 + t[0].conj() * 0.2, t[0]]));
    build_family(phi, ParamManifold::circle(32).unwrap(), ZetaGrid::with_boundary(64), 1).unwrap()
}

fn lifted_translating() -> DiscFamily<f64> {
    let phi: FamilyFn<f64> = Arc::new(|z: C64, t: &[C64]| {
        let w = t[0] * 1.5 + z;
        Ok(vec![w, w.exp()])
    });
    build_family(phi, ParamManifold::circle(16).unwrap(), ZetaGrid::with_boundary(64), 2).unwrap()
}

#[test]
fn disc_boundaries_lie_on_their_manifolds() {
    let f = example4();
    for ti in 0..f.manifold().len() {
        let c = f.boundary_curve(ti).unwrap();
        for j in 0..c.len() {
            let p = c.point(j);
            assert!((p[0].norm_sqr() + p[1].norm_sqr() - 1.0).abs() < 1e-12);
            assert!((p[2] - p[0]).norm() < 1e-15);
        }
    }
}

#[test]
fn example3_is_a_counterexample() {
    let f = example3();
    let v = parametric_ap_verdict(&f, OrbitMode::Declared(false)).unwrap();
    assert_eq!(v.degeneracy.branch, DegeneracyBranch::DimensionDrop);
    assert!(v.degeneracy.verified);
    assert!(v.violated.contains(&"orbit".to_string()));
    assert_eq!(v.max_rank, 3);
    assert_eq!(v.outcome, Outcome::CounterexampleConfirmed);
    // Rank 3 on a dense set: σ₂/σ₁ well away from zero at most points.
    let ratios = v.rank.second_ratio();
    let big = ratios.iter().filter(|&&q| q > 1e-2).count();
    assert!(big as f64 > 0.5 * ratios.len() as f64);
}

#[test]
fn example4_passes() {
    let f = example4();
    let v = parametric_ap_verdict(&f, OrbitMode::Declared(true)).unwrap();
    assert!(v.regularity.pass(), "{:?}", v.regularity.boundary_ranks);
    assert_eq!(v.degeneracy.branch, DegeneracyBranch::DimensionDrop);
    assert!(v.hypotheses_hold);
    assert!(v.max_rank <= 2);
    assert_eq!(v.outcome, Outcome::Pass);
}

#[test]
fn model_torus_is_constant_in_zeta() {
    let f = model_torus();
    let parts = sample_partials(&f).unwrap();
    assert!(max_dzeta(&parts) < 1e-9);
    assert_eq!(degeneracy_check(&f).unwrap().branch, DegeneracyBranch::DimensionDrop);
    assert!(regularity_check(&f).unwrap().t_rank_pass);
}

#[test]
fn jacobian_vanishes_at_center_for_every_minor() {
    let fams = [example3(), example4(), lifted_translating()];
    for f in &fams {
        let n = f.n();
        let d = f.d();
        let m = f.manifold().field_count();
        let etas: Vec<Vec<usize>> = if n == 3 && d == 3 { vec![vec![0, 1, 2]] } else { vec![vec![0, 1]] };
        let sets: Vec<Vec<usize>> = if m == 4 { vec![vec![0, 1], vec![1, 3], vec![2, 3]] } else { vec![vec![0]] };
        for e in &etas {
            for s in &sets {
                let jf = jacobian_field(f, Some(e.clone()), Some(s.clone())).unwrap();
                assert!(jf.max_origin() < 1e-10);
                assert!(jf.negative_masses().unwrap().iter().all(|&x| x < 1e-9));
            }
        }
    }
}

#[test]
fn rank_is_bounded_and_ignores_the_angular_column() {
    for f in [example3(), example4(), lifted_translating()] {
        let parts = sample_partials(&f).unwrap();
        let r = rank_field_from(&f, &parts, RANK_TOL);
        assert!(r.max_rank() <= (f.k() + 1).min(f.n()));
        for (ti, row) in parts.iter().enumerate().step_by(7) {
            for (zi, p) in row.iter().enumerate().step_by(13) {
                let z = f.zeta_points()[zi];
                let mut cols = p.columns();
                let base = complex_rank(&cols, RANK_TOL, 1e-12);
                cols.push(p.dpsi(z));
                assert_eq!(complex_rank(&cols, RANK_TOL, 1e-12), base, "t {ti} ζ {zi}");
            }
        }
    }
}

#[test]
fn translating_lift_has_collapsed_jacobian() {
    // Both columns are multiples of (1, e^Ψ), so every fiber of J vanishes.
    let f = lifted_translating();
    let jf = jacobian_field(&f, None, None).unwrap();
    let tr = track_zeros(&jf).unwrap();
    assert_eq!(tr.singular_fibers.len(), f.manifold().len());
    assert!(tr.chains.is_empty());
}

#[test]
fn partials_match_svd_of_lattice_columns() {
    let f = example4();
    let p = partials(&f, 5, 3).unwrap();
    let s = svd(&ColMatrix::from_columns(3, p.columns()));
    assert!(s.sigma[2] / s.sigma[0] < 1e-9);
}
