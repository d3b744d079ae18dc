//! Pool stance results with equal weights and with the bundled plausibility
//! ratings, and report likelihood ratios against the prior.

use std::collections::BTreeMap;

use dcm::assessment::{
    aggregate_stances, likelihood_ratio, run_stance, weights_from_ratings, InferenceMode, Ratings,
    RunConfig, StanceWeights,
};
use dcm::bundled;
use dcm::evidence::IndicatorPanel;
use dcm::model::DEFAULT_CONCENTRATION;
use dcm::sensitivity::preset;

fn main() {
    let catalog = bundled::catalog();
    let panel = IndicatorPanel::from_credences(
        "example-chatbot",
        catalog
            .indicators
            .iter()
            .enumerate()
            .map(|(k, ind)| (ind.id.clone(), if k % 4 == 0 { 0.7 } else { 0.15 })),
    );
    let prior = preset("baseline").unwrap();
    let config = RunConfig::new(200, InferenceMode::Exact, 7).unwrap();

    let mut summaries = BTreeMap::new();
    for stance in bundled::stances() {
        let tree = catalog.stance_tree(&stance).unwrap().compile(DEFAULT_CONCENTRATION).unwrap();
        summaries.insert(stance.name.clone(), run_stance(&tree, &panel, &prior, &config).unwrap());
    }

    let ratings = Ratings::parse(bundled::RATINGS_CSV).unwrap();
    for (label, weights) in [
        ("equal", StanceWeights::equal(summaries.keys().cloned()).unwrap()),
        ("ratings", weights_from_ratings(&ratings.scores).unwrap()),
    ] {
        let agg = aggregate_stances(&summaries, &weights, None, 7).unwrap();
        let lr = likelihood_ratio(prior.mean(), agg.summary.median.clamp(1e-9, 1.0 - 1e-9)).unwrap();
        println!(
            "{label:<8} median {:.4}  90% [{:.4}, {:.4}]  weighted median {:.4}  LR {:.3}",
            agg.summary.median, agg.summary.q05, agg.summary.q95, agg.weighted_median, lr
        );
    }
}
