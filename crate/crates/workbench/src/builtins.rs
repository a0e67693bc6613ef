//! Scenarios shipped with the binary, loadable as `builtin:<id>`.

const BUILTINS: [(&str, &str); 10] = [
    ("example1", include_str!("../scenarios/example1.json")),
    ("example2", include_str!("../scenarios/example2.json")),
    ("example3", include_str!("../scenarios/example3.json")),
    ("example4", include_str!("../scenarios/example4.json")),
    ("model_torus", include_str!("../scenarios/model_torus.json")),
    ("degree_one", include_str!("../scenarios/degree_one.json")),
    ("strip_translating", include_str!("../scenarios/strip_translating.json")),
    ("strip_concentric", include_str!("../scenarios/strip_concentric.json")),
    ("nagel_rudin", include_str!("../scenarios/nagel_rudin.json")),
    ("ap_suite", include_str!("../scenarios/ap_suite.json")),
];

pub fn ids() -> Vec<&'static str> {
    BUILTINS.iter().map(|(id, _)| *id).collect()
}

/// JSON text of a built-in scenario.
pub fn source(id: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|(k, _)| *k == id).map(|(_, s)| *s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    #[test]
    fn every_builtin_validates_and_matches_its_id() {
        for id in ids() {
            let s = parse_scenario(source(id).unwrap()).unwrap_or_else(|e| panic!("{id}: {e}"));
            assert_eq!(s.id, id);
        }
    }
}
