//! Parse and compile the bundled catalog and stances, then print the size of
//! each stance's tree.

use dcm::bundled;
use dcm::model::DEFAULT_CONCENTRATION;

fn main() {
    let (catalog, stances) = bundled::try_load().expect("bundled data is valid");
    println!(
        "catalog: {} features, {} subfeatures, {} indicators",
        catalog.features.len(),
        catalog.subfeatures.len(),
        catalog.indicators.len()
    );
    for stance in &stances {
        let tree = catalog
            .stance_tree(stance)
            .and_then(|t| t.compile(DEFAULT_CONCENTRATION))
            .expect("stance compiles");
        println!(
            "{:<36} {:>2} features {:>3} latents {:>3} indicators",
            stance.name,
            stance.features.len(),
            tree.latent_count(),
            tree.indicator_ids().count()
        );
    }
    let orphans = catalog.unreferenced_indicators(&stances);
    println!("unreferenced indicators: {}", orphans.len());
}
