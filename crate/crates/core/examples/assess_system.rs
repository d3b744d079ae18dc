//! Run every bundled stance on a small hand-built panel.

use dcm::assessment::{run_stance, InferenceMode, RunConfig};
use dcm::bundled;
use dcm::evidence::IndicatorPanel;
use dcm::model::DEFAULT_CONCENTRATION;
use dcm::sensitivity::preset;

fn main() {
    let catalog = bundled::catalog();
    // Illustrative credences only.
    let panel = IndicatorPanel::from_credences(
        "example-robot",
        catalog
            .indicators
            .iter()
            .enumerate()
            .map(|(k, ind)| (ind.id.clone(), if k % 3 == 0 { 0.8 } else { 0.3 })),
    );
    let prior = preset("baseline").unwrap();
    let config = RunConfig::new(200, InferenceMode::Exact, 2024).unwrap();
    for stance in bundled::stances() {
        let tree = catalog.stance_tree(&stance).unwrap().compile(DEFAULT_CONCENTRATION).unwrap();
        let s = run_stance(&tree, &panel, &prior, &config).unwrap();
        println!(
            "{:<36} median {:.3}  50% [{:.3}, {:.3}]  90% [{:.3}, {:.3}]",
            stance.name, s.median, s.q25, s.q75, s.q05, s.q95
        );
    }
}
