//! Compare the three inference routes on one stance with a random partial
//! assignment of its indicators.

use dcm::bundled;
use dcm::inference::{
    enumerate_posterior, exact_posterior, sample_posterior, IndicatorAssignment, Observation,
    SamplerSettings, MAX_ENUMERATED_LATENTS,
};
use dcm::model::DEFAULT_CONCENTRATION;
use dcm::sensitivity::preset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let catalog = bundled::catalog();
    let stance = bundled::stances()
        .into_iter()
        .find(|s| s.name == "Embodied agency")
        .unwrap();
    let tree = catalog.stance_tree(&stance).unwrap().compile(DEFAULT_CONCENTRATION).unwrap();
    let prior = preset("baseline").unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut assignment = IndicatorAssignment::new();
    for id in tree.indicator_ids() {
        let obs = match rng.random_range(0..3) {
            0 => Observation::Present,
            1 => Observation::Absent,
            _ => Observation::Missing,
        };
        assignment.set(id, obs);
    }

    let exact = exact_posterior(&tree, &assignment, &prior).unwrap();
    println!("exact      {:.6}", exact.probability);
    if tree.latent_count() <= MAX_ENUMERATED_LATENTS {
        let e = enumerate_posterior(&tree, &assignment, &prior).unwrap();
        println!("enumerated {:.6}", e.probability);
    } else {
        println!("enumerated skipped ({} latents)", tree.latent_count());
    }
    let s = sample_posterior(&tree, &assignment, &prior, &SamplerSettings::new(20_000, 4, 3)).unwrap();
    println!(
        "sampled    {:.6}  (R-hat {:.4}, {} draws)",
        s.probability,
        s.rhat.unwrap(),
        s.samples.unwrap()
    );
}
