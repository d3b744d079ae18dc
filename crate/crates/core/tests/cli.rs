use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dcm::bundled;
use dcm::inference::{enumerate_posterior, IndicatorAssignment, Observation, MAX_ENUMERATED_LATENTS};
use dcm::model::DEFAULT_CONCENTRATION;
use dcm::sensitivity::preset;
use tempfile::TempDir;

fn dcm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcm"))
        .args(args)
        .env_remove("DCM_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Write a project whose single expert gives `credence(indicator)` for
/// every bundled indicator of each listed system.
fn project(systems: &[(&str, &dyn Fn(usize) -> f64)], extra: &str) -> (TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let catalog = bundled::catalog();
    let mut csv = String::from("# dcm-survey v1\nexpert_id,system_id,indicator,credence\n");
    for (system, credence) in systems {
        for (k, ind) in catalog.indicators.iter().enumerate() {
            csv.push_str(&format!("e1,{system},{},{}\n", ind.id, credence(k)));
        }
    }
    std::fs::write(dir.path().join("surveys.csv"), csv).unwrap();
    let config = dir.path().join("project.toml");
    std::fs::write(
        &config,
        format!("seed = 5\nsurveys = [\"surveys.csv\"]\nout = \"out\"\n{extra}\n[run]\nn_runs = 20\n"),
    )
    .unwrap();
    (dir, config)
}

fn data_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_bundled_demo_project() {
    let demo = concat!(env!("CARGO_MANIFEST_DIR"), "/data/demo/project.toml");
    let o = dcm(&["--config", demo, "validate"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("13 stances checked, 0 errors, 0 warnings"));
}

#[test]
fn validate_reads_config_from_environment() {
    let (_dir, config) = project(&[("a", &|_| 0.5)], "");
    let o = Command::new(env!("CARGO_BIN_EXE_dcm"))
        .arg("validate")
        .env("DCM_CONFIG", &config)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn unknown_feature_is_a_validation_error() {
    let (dir, config) = project(&[("a", &|_| 0.5)], "stances = [\"bad.json\"]");
    std::fs::write(
        dir.path().join("bad.json"),
        r#"{"schema":"dcm-stance/1","name":"Bad","features":[{"feature":"telepathy","support":"weak support","demandingness":"neutral"}]}"#,
    )
    .unwrap();
    let o = dcm(&["--config", s(&config), "validate"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("error:")).count(), 1, "{out}");
    assert!(out.contains("bad.json") && out.contains("telepathy"), "{out}");
}

#[test]
fn syntax_error_reports_position() {
    let (dir, config) = project(&[("a", &|_| 0.5)], "stances = [\"broken.json\"]");
    std::fs::write(dir.path().join("broken.json"), "{\n  \"schema\": \"dcm-stance/1\",\n  \"name\": \n}").unwrap();
    let o = dcm(&["--config", s(&config), "validate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("broken.json: syntax error at line 4"), "{}", stdout(&o));
}

#[test]
fn orphan_indicator_is_a_warning() {
    let (dir, config) = project(&[("a", &|_| 0.5)], "catalog = \"catalog.json\"");
    let mut catalog: serde_json::Value = serde_json::from_str(bundled::CATALOG_JSON).unwrap();
    catalog["indicators"]
        .as_array_mut()
        .unwrap()
        .push(serde_json::json!({"id": "stray", "name": "Stray"}));
    std::fs::write(dir.path().join("catalog.json"), catalog.to_string()).unwrap();
    let before: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    let o = dcm(&["--config", s(&config), "validate"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("warning: catalog.json: indicator `stray`"), "{}", stdout(&o));
    let after: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(before.len(), after.len(), "validate must not write files");
}

#[test]
fn degenerate_panel_gives_zero_spread() {
    let (dir, config) = project(&[("a", &|k| (k % 2) as f64)], "");
    let o = dcm(&["--config", s(&config), "assess", "--system", "a", "--stance", "embodied-agency"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&dir.path().join("out/summary.csv"));
    assert_eq!(rows.len(), 1);
    // q05 and q95 columns
    assert_eq!(rows[0][6], rows[0][9]);
}

#[test]
fn assess_is_byte_reproducible_and_long_format_complete() {
    let (dir, config) = project(&[("a", &|k| 0.2 + 0.6 * ((k % 5) as f64) / 4.0)], "");
    let run = |out: &str| {
        let o = dcm(&["--config", s(&config), "assess", "--system", "a", "--runs", "30", "--out", out]);
        assert!(o.status.success(), "{}", stderr(&o));
    };
    let (o1, o2) = (dir.path().join("o1"), dir.path().join("o2"));
    run(s(&o1));
    run(s(&o2));
    for f in ["summary.csv", "runs.csv"] {
        assert_eq!(std::fs::read(o1.join(f)).unwrap(), std::fs::read(o2.join(f)).unwrap(), "{f}");
    }
    assert_eq!(data_rows(&o1.join("runs.csv")).len(), 30 * 13);
    let text = std::fs::read_to_string(o1.join("summary.csv")).unwrap();
    assert!(text.contains("# seed: 5"));
    assert!(text.contains("# input: surveys.csv sha256:"));
}

#[test]
fn all_present_panel_confirms_every_stance() {
    let (dir, config) = project(&[("a", &|_| 1.0)], "");
    let o = dcm(&["--config", s(&config), "assess", "--system", "a"]);
    assert!(o.status.success());
    let prior = preset("baseline").unwrap();
    for row in data_rows(&dir.path().join("out/summary.csv")) {
        let median: f64 = row[4].parse().unwrap();
        assert!(median > prior.mean(), "{}: {median}", row[1]);
    }
    // Brute-force check of the direction wherever enumeration is feasible.
    let catalog = bundled::catalog();
    let mut checked = 0;
    for stance in bundled::stances() {
        let tree = catalog.stance_tree(&stance).unwrap().compile(DEFAULT_CONCENTRATION).unwrap();
        if tree.latent_count() > MAX_ENUMERATED_LATENTS {
            continue;
        }
        let a: IndicatorAssignment = tree
            .indicator_ids()
            .map(|id| (id.to_string(), Observation::Present))
            .collect();
        let p = enumerate_posterior(&tree, &a, &prior).unwrap().probability;
        assert!(p > prior.mean(), "{}", stance.name);
        checked += 1;
    }
    assert!(checked >= 3);
}

#[test]
fn unknown_labels_are_errors() {
    let (_dir, config) = project(&[("a", &|_| 0.5)], "");
    let o = dcm(&["--config", s(&config), "assess", "--system", "zzz"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown system `zzz`"));
    let o = dcm(&["--config", s(&config), "assess", "--system", "a", "--prior", "huge"]);
    assert_eq!(o.status.code(), Some(1));
    let o = dcm(&["--config", s(&config), "assess", "--system", "a", "--stance", "nope"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn equal_weights_are_one_thirteenth() {
    let (dir, config) = project(&[("a", &|k| (k % 3) as f64 / 2.0)], "");
    let o = dcm(&["--config", s(&config), "aggregate", "--system", "a", "--weights", "equal"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&dir.path().join("out/weights.csv"));
    assert_eq!(rows.len(), 13);
    for r in rows {
        let w: f64 = r[1].parse().unwrap();
        assert!((w - 1.0 / 13.0).abs() < 1e-15);
    }
}

#[test]
fn ratings_weights_follow_average_scores() {
    let (dir, config) = project(&[("a", &|k| (k % 3) as f64 / 2.0)], "");
    let o = dcm(&["--config", s(&config), "aggregate", "--system", "a", "--weights", "ratings"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let weights: std::collections::BTreeMap<String, f64> = data_rows(&dir.path().join("out/weights.csv"))
        .into_iter()
        .map(|r| (r[0].clone(), r[1].parse().unwrap()))
        .collect();
    let ratio = weights["Biological analogy"] / weights["Field mechanisms"];
    assert!((ratio - 72.0 / 22.0).abs() < 1e-9, "{ratio}");
}

#[test]
fn missing_ratings_file_is_an_error() {
    let (dir, config) = project(&[("a", &|_| 0.5)], "");
    let missing = dir.path().join("nope.csv");
    let o = dcm(&["--config", s(&config), "aggregate", "--system", "a", "--weights", s(&missing)]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("nope.csv"));
}

#[test]
fn single_stance_aggregate_matches_stance() {
    let (dir, config) = project(&[("a", &|k| 0.1 + 0.8 * ((k % 7) as f64) / 6.0)], "");
    let o = dcm(&["--config", s(&config), "aggregate", "--system", "a", "--stance", "person-like"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stance = &data_rows(&dir.path().join("out/summary.csv"))[0];
    let agg = &data_rows(&dir.path().join("out/aggregate.csv"))[0];
    assert_eq!(agg[1], "all-stances");
    for col in 4..10 {
        assert_eq!(stance[col], agg[col], "column {col}");
    }
}

#[test]
fn single_cell_sweep() {
    let (dir, config) = project(&[("a", &|_| 0.5)], "");
    let o = dcm(&[
        "--config", s(&config), "sweep", "--system", "a", "--stance", "embodied-agency", "--prior", "baseline",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(data_rows(&dir.path().join("out/sweep.csv")).len(), 1);
    assert!(!dir.path().join("out/ordinal.csv").exists());
}

#[test]
fn sweep_medians_rise_with_prior_mean() {
    let (dir, config) = project(&[("hi", &|_| 0.9), ("lo", &|_| 0.1)], "");
    let o = dcm(&["--config", s(&config), "sweep", "--stance", "recurrent-pure", "--stance", "field-mechanisms"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("0 ordinal violations"));
    let rows = data_rows(&dir.path().join("out/sweep.csv"));
    assert_eq!(rows.len(), 2 * 2 * 5);
    for chunk in rows.chunks(5) {
        // presets are listed by increasing mean
        let medians: Vec<f64> = chunk.iter().map(|r| r[4].parse().unwrap()).collect();
        assert!(medians.windows(2).all(|w| w[0] <= w[1]), "{medians:?}");
    }
}

#[test]
fn coarse_sweep_writes_labeled_second_grid() {
    let (dir, config) = project(&[("a", &|_| 1.0)], "");
    let o = dcm(&["--config", s(&config), "sweep", "--prior", "baseline", "--coarse"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&dir.path().join("out/sweep_coarse.csv"));
    assert_eq!(rows.len(), 13);
    assert!(rows.iter().all(|r| r[3] == "coarse"));
    let cmp = data_rows(&dir.path().join("out/comparison.csv"));
    assert!(cmp.iter().all(|r| r[8] == "true" && r[9] == "true"));
}

#[test]
fn per_system_priors_column() {
    let (dir, config) = project(&[("bio", &|_| 0.5), ("llm", &|_| 0.5)], "system_priors = \"priors.csv\"");
    std::fs::write(
        dir.path().join("priors.csv"),
        "# dcm-system-priors v1\nsystem_id,label,alpha,beta\nbio,bio-high,18,2\n",
    )
    .unwrap();
    let o = dcm(&["--config", s(&config), "sweep", "--stance", "embodied-agency"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&dir.path().join("out/sweep.csv"));
    assert_eq!(rows.len(), 2 * 6);
    let per: Vec<_> = rows.iter().filter(|r| r[13] == "per-system").collect();
    assert_eq!(per.len(), 2);
    assert_eq!(per[0][2], "bio-high");
    assert_eq!(per[1][2], "baseline");
}

#[test]
fn missing_config_is_an_error() {
    let o = dcm(&["validate"]);
    assert_eq!(o.status.code(), Some(2));
}
