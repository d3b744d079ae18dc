//! Sweep the five prior presets over two illustrative systems and check
//! that the system ordering holds under every prior.

use dcm::assessment::{InferenceMode, RunConfig};
use dcm::bundled;
use dcm::evidence::IndicatorPanel;
use dcm::model::DEFAULT_CONCENTRATION;
use dcm::sensitivity::{ordinal_stability, presets, prior_sweep, UpdateDirection, DEFAULT_TAU};

fn main() {
    let catalog = bundled::catalog();
    let panel = |name: &str, c: f64| {
        IndicatorPanel::from_credences(name, catalog.indicators.iter().map(|i| (i.id.clone(), c)))
    };
    let panels = [panel("mostly-present", 0.8), panel("mostly-absent", 0.2)];
    let trees: Vec<_> = bundled::stances()
        .iter()
        .take(4)
        .map(|s| catalog.stance_tree(s).unwrap().compile(DEFAULT_CONCENTRATION).unwrap())
        .collect();
    let config = RunConfig::new(100, InferenceMode::Exact, 99).unwrap();
    let sweep = prior_sweep(&panels, &trees, &presets(), &config).unwrap();

    for cell in &sweep.cells {
        let dir = UpdateDirection::from_values(cell.summary.median, cell.prior_mean, DEFAULT_TAU);
        println!(
            "{:<15} {:<36} {:<9} median {:.4} ({})",
            cell.system,
            cell.stance,
            cell.prior,
            cell.summary.median,
            dir.as_str()
        );
    }
    let report = ordinal_stability(&sweep).unwrap();
    println!("violations: {}  ties: {}", report.violations.len(), report.ties.len());
}
