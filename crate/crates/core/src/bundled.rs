//! Catalog, stances and plausibility ratings shipped with the crate.

use crate::model::{Catalog, ModelError, StanceSpec};

pub const CATALOG_JSON: &str = include_str!("../data/catalog.json");
pub const RATINGS_CSV: &str = include_str!("../data/ratings.csv");

/// `(file name, contents)` for every bundled stance.
pub const STANCE_FILES: [(&str, &str); 13] = [
    ("global-workspace.json", include_str!("../data/stances/global-workspace.json")),
    ("recurrent-pure.json", include_str!("../data/stances/recurrent-pure.json")),
    ("recurrent-perceptual.json", include_str!("../data/stances/recurrent-perceptual.json")),
    ("computational-analogy.json", include_str!("../data/stances/computational-analogy.json")),
    ("biological-analogy.json", include_str!("../data/stances/biological-analogy.json")),
    ("field-mechanisms.json", include_str!("../data/stances/field-mechanisms.json")),
    ("simple-valence.json", include_str!("../data/stances/simple-valence.json")),
    ("attention-schema.json", include_str!("../data/stances/attention-schema.json")),
    ("higher-order.json", include_str!("../data/stances/higher-order.json")),
    ("integrated-information.json", include_str!("../data/stances/integrated-information.json")),
    ("person-like.json", include_str!("../data/stances/person-like.json")),
    ("cognitive-complexity.json", include_str!("../data/stances/cognitive-complexity.json")),
    ("embodied-agency.json", include_str!("../data/stances/embodied-agency.json")),
];

pub fn catalog() -> Catalog {
    Catalog::parse(CATALOG_JSON).expect("bundled catalog is valid")
}

pub fn stances() -> Vec<StanceSpec> {
    STANCE_FILES
        .iter()
        .map(|(_, text)| StanceSpec::parse(text).expect("bundled stance is valid"))
        .collect()
}

/// Parse every bundled file, returning the first failure instead of panicking.
pub fn try_load() -> Result<(Catalog, Vec<StanceSpec>), ModelError> {
    let catalog = Catalog::parse(CATALOG_JSON)?;
    let stances = STANCE_FILES
        .iter()
        .map(|(_, text)| StanceSpec::parse(text))
        .collect::<Result<Vec<_>, _>>()?;
    for s in &stances {
        s.check_against(&catalog)?;
        catalog.stance_tree(s)?;
    }
    Ok((catalog, stances))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_data_loads() {
        let (catalog, stances) = try_load().unwrap();
        assert_eq!(stances.len(), 13);
        assert_eq!(catalog.features.len(), 23);
        assert_eq!(catalog.indicators.len(), 140);
        assert!(catalog.unreferenced_indicators(&stances).is_empty());
    }
}
