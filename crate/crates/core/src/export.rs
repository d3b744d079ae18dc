//! CSV exports. Every file opens with a version line and provenance
//! comments (tool version, master seed, SHA-256 of each input), so two runs
//! on the same inputs and seed produce identical bytes.
//!
//! Floats are written in Rust's shortest round-trip form.

use sha2::{Digest, Sha256};

use crate::assessment::{AggregateSummary, PosteriorSummary};
use crate::sensitivity::{OrdinalReport, SweepResult, UpdateDirection, VariantComparison, DEFAULT_TAU};

pub const TOOL: &str = concat!("dcm ", env!("CARGO_PKG_VERSION"));

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportMeta {
    pub seed: u64,
    /// `(label, sha256)` per input, in the order given.
    pub inputs: Vec<(String, String)>,
}

impl ExportMeta {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inputs: Vec::new(),
        }
    }

    pub fn with_input(mut self, label: impl Into<String>, bytes: &[u8]) -> Self {
        self.inputs.push((label.into(), sha256_hex(bytes)));
        self
    }

    fn header(&self, kind: &str, extra: &[(&str, String)]) -> String {
        let mut out = format!("# dcm-{kind} v1\n# tool: {TOOL}\n# seed: {}\n", self.seed);
        for (label, digest) in &self.inputs {
            out.push_str(&format!("# input: {label} sha256:{digest}\n"));
        }
        for (k, v) in extra {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out
    }
}

/// Quote a field if it would otherwise break the row.
fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

const SUMMARY_COLUMNS: &str = "system,stance,prior,variant,median,mean,q05,q25,q75,q95,n_runs,unconverged,seed";

fn summary_fields(s: &PosteriorSummary) -> String {
    let p = &s.provenance;
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
        field(&p.system),
        field(&p.stance),
        field(&p.prior),
        field(&p.variant),
        s.median,
        s.mean,
        s.q05,
        s.q25,
        s.q75,
        s.q95,
        s.n_runs,
        s.unconverged,
        p.seed
    )
}

/// One row per summary.
pub fn summary_csv<'a>(meta: &ExportMeta, summaries: impl IntoIterator<Item = &'a PosteriorSummary>) -> String {
    let mut out = meta.header("summary", &[]);
    out.push_str(SUMMARY_COLUMNS);
    out.push('\n');
    for s in summaries {
        out.push_str(&summary_fields(s));
        out.push('\n');
    }
    out
}

/// One row per run per summary, for distribution plots.
pub fn runs_csv<'a>(meta: &ExportMeta, summaries: impl IntoIterator<Item = &'a PosteriorSummary>) -> String {
    let mut out = meta.header("runs", &[]);
    out.push_str("system,stance,prior,variant,run,posterior\n");
    for s in summaries {
        let p = &s.provenance;
        let key = format!(
            "{},{},{},{}",
            field(&p.system),
            field(&p.stance),
            field(&p.prior),
            field(&p.variant)
        );
        for (r, v) in s.values.iter().enumerate() {
            out.push_str(&format!("{key},{r},{v}\n"));
        }
    }
    out
}

/// The pooled summary row plus the weighted average of stance medians.
pub fn aggregate_csv(meta: &ExportMeta, agg: &AggregateSummary) -> String {
    let mut out = meta.header(
        "aggregate",
        &[
            ("pool_size", agg.pool_size.to_string()),
            ("pool_seed", agg.pool_seed.to_string()),
        ],
    );
    out.push_str(SUMMARY_COLUMNS);
    out.push_str(",weighted_median\n");
    out.push_str(&format!("{},{}\n", summary_fields(&agg.summary), agg.weighted_median));
    out
}

/// Normalized weight and pooled draw count per stance.
pub fn weights_csv(meta: &ExportMeta, agg: &AggregateSummary) -> String {
    let mut out = meta.header("weights", &[]);
    out.push_str("stance,weight,pool_count\n");
    for (stance, w) in agg.weights.iter() {
        let n = agg.counts.get(stance).copied().unwrap_or(0);
        out.push_str(&format!("{},{w},{n}\n", field(stance)));
    }
    out
}

/// Summary columns plus the prior column, the mean of the prior actually
/// used, and the update direction.
pub fn sweep_csv(meta: &ExportMeta, sweep: &SweepResult) -> String {
    let mut out = meta.header("sweep", &[("tau", DEFAULT_TAU.to_string())]);
    out.push_str(SUMMARY_COLUMNS);
    out.push_str(",prior_column,prior_mean,direction\n");
    for c in &sweep.cells {
        let dir = UpdateDirection::from_values(c.summary.median, c.prior_mean, DEFAULT_TAU);
        out.push_str(&format!(
            "{},{},{},{}\n",
            summary_fields(&c.summary),
            field(&c.prior),
            c.prior_mean,
            dir.as_str()
        ));
    }
    out
}

/// Rankings, ties and violations, one record per line. Rankings list
/// systems from highest to lowest median separated by `>`; pairs are
/// separated by `|`.
pub fn ordinal_csv(meta: &ExportMeta, report: &OrdinalReport) -> String {
    let mut out = meta.header("ordinal", &[("reference_prior", report.reference_prior.clone())]);
    out.push_str("record,stance,prior,detail\n");
    for r in &report.rankings {
        out.push_str(&format!(
            "ranking,{},{},{}\n",
            field(&r.stance),
            field(&r.prior),
            field(&r.order.join(">"))
        ));
    }
    for (kind, flags) in [("violation", &report.violations), ("tie", &report.ties)] {
        for f in flags {
            out.push_str(&format!(
                "{kind},{},{},{}\n",
                field(&f.stance),
                field(&f.prior),
                field(&format!("{}|{}", f.systems.0, f.systems.1))
            ));
        }
    }
    out
}

pub fn comparison_csv(meta: &ExportMeta, comparisons: &[VariantComparison]) -> String {
    let mut out = meta.header("variant-comparison", &[]);
    out.push_str(
        "system,stance,prior,prior_mean,base_median,variant_median,base_direction,variant_direction,same_direction,shrunk\n",
    );
    for c in comparisons {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            field(&c.system),
            field(&c.stance),
            field(&c.prior),
            c.prior_mean,
            c.base_median,
            c.variant_median,
            c.base_direction.as_str(),
            c.variant_direction.as_str(),
            c.same_direction(),
            c.shrunk()
        ));
    }
    out
}
