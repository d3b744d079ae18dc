use dcm::evidence::{sample_assignment, IndicatorPanel};
use dcm::inference::Observation;

const DRAWS: u64 = 10_000;

fn frequency(panel: &IndicatorPanel, id: &str) -> f64 {
    let hits = (0..DRAWS)
        .filter(|&s| sample_assignment(panel, s).get(id) == Observation::Present)
        .count();
    hits as f64 / DRAWS as f64
}

#[test]
fn presence_frequency_tracks_credence() {
    let panel = IndicatorPanel::from_credences("s", [("x", 0.7)]);
    let f = frequency(&panel, "x");
    assert!((0.68..=0.72).contains(&f), "{f}");
}

#[test]
fn frequencies_within_three_sigma() {
    let credences = [0.05, 0.2, 0.5, 0.7, 0.93];
    let panel = IndicatorPanel::from_credences(
        "s",
        credences.iter().enumerate().map(|(k, &c)| (format!("i{k}"), c)),
    );
    for (k, &c) in credences.iter().enumerate() {
        let f = frequency(&panel, &format!("i{k}"));
        let sigma = (c * (1.0 - c) / DRAWS as f64).sqrt();
        assert!((f - c).abs() <= 3.0 * sigma, "i{k}: {f} vs {c}");
    }
}

#[test]
fn draws_are_pairwise_uncorrelated() {
    let ids = ["a", "b", "c", "d"];
    let panel = IndicatorPanel::from_credences("s", ids.iter().map(|&id| (id, 0.5)));
    let draws: Vec<Vec<f64>> = (0..DRAWS)
        .map(|s| {
            let a = sample_assignment(&panel, s);
            ids.iter()
                .map(|id| f64::from(u8::from(a.get(id) == Observation::Present)))
                .collect()
        })
        .collect();
    let n = DRAWS as f64;
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            let (mut sx, mut sy, mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for d in &draws {
                sx += d[i];
                sy += d[j];
                sxy += d[i] * d[j];
                sxx += d[i] * d[i];
                syy += d[j] * d[j];
            }
            let cov = sxy / n - sx * sy / n / n;
            let r = cov / ((sxx / n - (sx / n).powi(2)) * (syy / n - (sy / n).powi(2))).sqrt();
            // Under independence r has standard error about 1/sqrt(n).
            assert!(r.abs() <= 3.0 / n.sqrt(), "{}-{}: r = {r}", ids[i], ids[j]);
        }
    }
}

#[test]
fn missing_stays_missing_and_seed_is_deterministic() {
    let mut panel = IndicatorPanel::from_credences("s", [("x", 0.4)]);
    panel.credences.insert("y".into(), None);
    panel.n_respondents.insert("y".into(), 0);
    for s in 0..100 {
        let a = sample_assignment(&panel, s);
        assert_eq!(a.get("y"), Observation::Missing);
        assert_eq!(a, sample_assignment(&panel, s));
    }
}
