use super::topology::degeneracy_from;
use super::{
    orbit_nontriviality, rank_field_from, regularity_from, sample_partials, DegeneracyReport, DiscFamily, OrbitMode,
    OrbitReport, OrbitVerdict, RankField, RegularityReport, RANK_TOL,
};
use crate::error::Result;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    /// Hypotheses hold and the rank collapses.
    Pass,
    /// Hypotheses hold but the rank does not collapse.
    Fail,
    /// A hypothesis fails and so does the conclusion.
    CounterexampleConfirmed,
    /// A hypothesis fails while the conclusion still holds.
    HypothesisViolatedConclusionHolds,
    /// A hypothesis could not be decided.
    Undetermined,
}

impl Outcome {
    pub fn name(&self) -> &'static str {
        match self {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::CounterexampleConfirmed => "counterexample-confirmed",
            Outcome::HypothesisViolatedConclusionHolds => "hypothesis-violated-conclusion-holds",
            Outcome::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApVerdict<T> {
    pub regularity: RegularityReport,
    pub degeneracy: DegeneracyReport,
    pub orbit: OrbitReport<T>,
    pub rank: RankField<T>,
    pub max_rank: usize,
    pub d: usize,
    pub hypotheses_hold: bool,
    /// Names of the violated hypotheses: `regularity`, `degeneracy`, `orbit`.
    pub violated: Vec<String>,
    /// `max rank_ℂ dΦ < d` over the lattice.
    pub conclusion_holds: bool,
    pub outcome: Outcome,
}

/// Evaluates the hypotheses (regular, degenerate on the boundary, nontrivial
/// orbit) and the rank conclusion on the lattice.
pub fn parametric_ap_verdict<T: Real>(f: &DiscFamily<T>, orbit: OrbitMode) -> Result<ApVerdict<T>> {
    parametric_ap_verdict_with(f, orbit, T::lit(RANK_TOL))
}

/// Same as [`parametric_ap_verdict`] with rank tolerance `tau` for the rank field.
pub fn parametric_ap_verdict_with<T: Real>(f: &DiscFamily<T>, orbit: OrbitMode, tau: T) -> Result<ApVerdict<T>> {
    let parts = sample_partials(f)?;
    let regularity = regularity_from(f, &parts);
    let degeneracy = degeneracy_from(f, &parts)?;
    let orbit = orbit_nontriviality(f, orbit)?;
    let rank = rank_field_from(f, &parts, tau);
    let max_rank = rank.max_rank();
    let d = f.d();
    let mut violated = Vec::new();
    if !regularity.pass() {
        violated.push("regularity".to_string());
    }
    let undecided =
        orbit.verdict == OrbitVerdict::Inconclusive || degeneracy.branch == super::DegeneracyBranch::Unknown;
    if !degeneracy.branch.is_degenerate() && degeneracy.branch != super::DegeneracyBranch::Unknown {
        violated.push("degeneracy".to_string());
    }
    if orbit.verdict == OrbitVerdict::Trivial {
        violated.push("orbit".to_string());
    }
    let conclusion_holds = max_rank < d;
    let hypotheses_hold = violated.is_empty() && !undecided;
    let outcome = match (violated.is_empty(), undecided, conclusion_holds) {
        (true, true, _) => Outcome::Undetermined,
        (true, false, true) => Outcome::Pass,
        (true, false, false) => Outcome::Fail,
        (false, _, false) => Outcome::CounterexampleConfirmed,
        (false, _, true) => Outcome::HypothesisViolatedConclusionHolds,
    };
    Ok(ApVerdict { regularity, degeneracy, orbit, rank, max_rank, d, hypotheses_hold, violated, conclusion_holds, outcome })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use num_complex::Complex;

    use super::super::tests::{example1, example2};
    use super::super::{build_family, FamilyFn, ParamManifold, ZetaGrid};
    use super::*;

    type C = Complex<f64>;

    #[test]
    fn example2_passes() {
        let v = parametric_ap_verdict(&example2(16), OrbitMode::Declared(true)).unwrap();
        assert!(v.hypotheses_hold, "{:?}", v.violated);
        assert_eq!((v.max_rank, v.outcome), (1, Outcome::Pass));
    }

    #[test]
    fn example1_is_a_counterexample() {
        let v = parametric_ap_verdict(&example1(16), OrbitMode::Planar { coordinate: 0 }).unwrap();
        assert!(v.violated.contains(&"orbit".to_string()));
        assert_eq!((v.max_rank, v.outcome), (2, Outcome::CounterexampleConfirmed));
    }

    #[test]
    fn degree_one_violates_degeneracy() {
        let phi: FamilyFn<f64> = Arc::new(|z: C, t: &[C]| Ok(vec![z, t[0]]));
        let f = build_family(phi, ParamManifold::circle(16).unwrap(), ZetaGrid::with_boundary(32), 2).unwrap();
        let v = parametric_ap_verdict(&f, OrbitMode::Declared(true)).unwrap();
        assert_eq!(v.violated, vec!["degeneracy".to_string()]);
        assert_eq!(v.outcome, Outcome::CounterexampleConfirmed);
    }
}
