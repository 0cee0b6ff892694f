//! Scenario files compiled into the binary so the tool runs out of the
//! box: `gravicol run electron_collapse`.

pub const BUNDLED: &[(&str, &str)] = &[
    (
        "electron_collapse",
        include_str!("../scenarios/electron_collapse.scn"),
    ),
    (
        "nucleus_collapse",
        include_str!("../scenarios/nucleus_collapse.scn"),
    ),
    (
        "nanogram_oscillator",
        include_str!("../scenarios/nanogram_oscillator.scn"),
    ),
    (
        "nanogram_oscillator_fraction",
        include_str!("../scenarios/nanogram_oscillator_fraction.scn"),
    ),
    (
        "qubit_census",
        include_str!("../scenarios/qubit_census.scn"),
    ),
    (
        "two_branch_generic",
        include_str!("../scenarios/two_branch_generic.scn"),
    ),
    ("born_d5", include_str!("../scenarios/born_d5.scn")),
    (
        "rotation_sweep",
        include_str!("../scenarios/rotation_sweep.scn"),
    ),
    ("sn_ground", include_str!("../scenarios/sn_ground.scn")),
    ("sn_spread", include_str!("../scenarios/sn_spread.scn")),
    ("pd_compare", include_str!("../scenarios/pd_compare.scn")),
    (
        "weak_monitor",
        include_str!("../scenarios/weak_monitor.scn"),
    ),
];

pub fn find(name: &str) -> Option<&'static str> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Scenario;

    #[test]
    fn every_bundled_scenario_parses_and_matches_its_name() {
        for (name, text) in BUNDLED {
            let s = Scenario::parse(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(&s.name, name);
        }
    }

    #[test]
    fn lookup_finds_known_names_only() {
        assert!(find("born_d5").is_some());
        assert!(find("no_such_scenario").is_none());
    }
}
