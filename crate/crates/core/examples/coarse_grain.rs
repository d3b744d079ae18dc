//! Collapse every link to the coarse levels and compare the update against
//! the original model.

use dcm::assessment::{InferenceMode, RunConfig};
use dcm::bundled;
use dcm::evidence::IndicatorPanel;
use dcm::model::DEFAULT_CONCENTRATION;
use dcm::sensitivity::{compare_variants, presets, prior_sweep, sweep_columns, PriorColumn, COARSE_VARIANT};

fn main() {
    let catalog = bundled::catalog();
    let panels = [IndicatorPanel::from_credences(
        "all-present",
        catalog.indicators.iter().map(|i| (i.id.clone(), 1.0)),
    )];
    let stances = bundled::stances();
    let base: Vec<_> = stances
        .iter()
        .map(|s| catalog.stance_tree(s).unwrap().compile(DEFAULT_CONCENTRATION).unwrap())
        .collect();
    let coarse: Vec<_> = stances
        .iter()
        .map(|s| {
            catalog
                .stance_tree(s)
                .unwrap()
                .coarse_grained()
                .compile(DEFAULT_CONCENTRATION)
                .unwrap()
        })
        .collect();
    let priors = [presets()[1].clone()];
    let config = RunConfig::new(1, InferenceMode::Exact, 0).unwrap();
    let a = prior_sweep(&panels, &base, &priors, &config).unwrap();
    let columns: Vec<_> = priors.iter().cloned().map(PriorColumn::Preset).collect();
    let b = sweep_columns(&panels, &coarse, &columns, &config, COARSE_VARIANT).unwrap();
    for c in compare_variants(&a, &b) {
        println!(
            "{:<36} base {:.4}  coarse {:.4}  same direction {}  smaller move {}",
            c.stance,
            c.base_median,
            c.variant_median,
            c.same_direction(),
            c.shrunk()
        );
    }
}
