//! Print the conditional probabilities and implied likelihood ratios for
//! every (support, demandingness) pair.

use dcm::levels::{DemandingnessLevel, SupportLevel};
use dcm::model::{conditionals_from_levels, CALIBRATION, DEFAULT_CONCENTRATION};

fn main() {
    println!("{:<28} {:<26} {:>7} {:>7} {:>8} {:>7}", "support", "demandingness", "p1", "p0", "LR+", "LR-");
    for s in SupportLevel::ALL {
        for d in DemandingnessLevel::ALL {
            let pair = conditionals_from_levels(s, d, DEFAULT_CONCENTRATION).unwrap();
            let tag = if CALIBRATION.iter().any(|&(cs, cd, _, _)| cs == s && cd == d) {
                " *"
            } else {
                ""
            };
            println!(
                "{:<28} {:<26} {:>7.4} {:>7.4} {:>8.3} {:>7.3}{tag}",
                s.name(),
                d.name(),
                pair.pi1.mean(),
                pair.pi0.mean(),
                pair.lr_present(),
                pair.lr_absent()
            );
        }
    }
    println!("* calibrated row");
}
