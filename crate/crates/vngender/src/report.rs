//! Tab-separated text tables for metrics, ablations and dataset statistics.

use std::fmt::Write as _;

use vngender_core::data::{ComponentRanking, DatasetStats};
use vngender_core::eval::{AblationReport, ConfusionMatrix, ExperimentResult, MacroMetrics};

pub fn metrics_tsv(m: &MacroMetrics, cm: &ConfusionMatrix) -> String {
    let mut s = String::from("class\tprecision\trecall\tf1\tsupport\n");
    for (name, c) in [("male", &m.male), ("female", &m.female)] {
        let _ = writeln!(s, "{name}\t{:.4}\t{:.4}\t{:.4}\t{}", c.precision, c.recall, c.f1, c.support);
    }
    let _ = writeln!(s, "macro\t{:.4}\t{:.4}\t{:.4}\t{}", m.macro_precision, m.macro_recall, m.macro_f1, cm.total());
    let _ = writeln!(s, "accuracy\t{:.4}", m.accuracy);
    let _ = writeln!(s, "confusion\ttp={}\tfp={}\ttn={}\tfn={}", cm.tp, cm.fp, cm.tn, cm.fn_);
    s
}

pub fn experiment_tsv(r: &ExperimentResult) -> String {
    let mut s = format!("# model {} mask {} train {} test {} skipped {}\n", r.model, r.mask, r.n_train, r.n_test, r.skipped);
    s.push_str(&metrics_tsv(&r.metrics, &r.confusion));
    s
}

/// Macro F1 per mask (rows) and model (columns).
pub fn ablation_tsv(rep: &AblationReport) -> String {
    let mut s = String::from("mask");
    for m in &rep.models {
        let _ = write!(s, "\t{m}");
    }
    s.push_str("\tskipped\n");
    for (i, mask) in rep.masks.iter().enumerate() {
        s.push_str(mask.label());
        for m in &rep.models {
            match rep.cell(*mask, m) {
                Some(c) => {
                    let _ = write!(s, "\t{:.4}", c.metrics.macro_f1);
                }
                None => s.push_str("\t-"),
            }
        }
        let _ = writeln!(s, "\t{}", rep.skipped[i]);
    }
    s
}

pub fn misclassified_tsv(r: &ExperimentResult) -> String {
    let mut s = String::from("components\ttrue\tpredicted\tscore\n");
    for m in &r.misclassified {
        let _ = writeln!(s, "{}\t{}\t{}\t{:.4}", m.text, m.truth.as_u8(), m.predicted.as_u8(), m.score);
    }
    s
}

fn ranking(s: &mut String, title: &str, r: &ComponentRanking) {
    let _ = writeln!(s, "\n# {title}\nrank\tmale\tcount\tfemale\tcount");
    for i in 0..r.male.len().max(r.female.len()) {
        let cell = |v: &[(String, usize)]| v.get(i).map_or(("-".to_string(), String::new()), |(t, c)| (t.clone(), c.to_string()));
        let (m, mc) = cell(&r.male);
        let (f, fc) = cell(&r.female);
        let _ = writeln!(s, "{}\t{m}\t{mc}\t{f}\t{fc}", i + 1);
    }
}

pub fn stats_tsv(st: &DatasetStats) -> String {
    let mut s = String::from("measure\tvalue\n");
    let _ = writeln!(s, "total\t{}", st.total);
    let _ = writeln!(s, "male\t{}\t{:.4}", st.male_count, st.male_fraction);
    let _ = writeln!(s, "female\t{}\t{:.4}", st.female_count, st.female_fraction);
    let _ = writeln!(s, "duplicate_names\t{}", st.duplicate_names);
    ranking(&mut s, "family names", &st.top_family_names);
    ranking(&mut s, "middle names", &st.top_middle_tokens);
    ranking(&mut s, "given names", &st.top_given_names);
    s
}
