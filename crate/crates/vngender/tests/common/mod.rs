#![allow(dead_code)]

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::Rng;
use vngender::bundle::{BundleMeta, ModelBundle};
use vngender::dataset::load_embeddings;
use vngender_core::data::Dataset;
use vngender_core::eval::{stratified_split, train_and_evaluate, ExperimentResult, SplitSpec};
use vngender_core::featurize::VectorizerConfig;
use vngender_core::lstm::LstmTrainConfig;
use vngender_core::names::{self, ComponentMask};
use vngender_core::pipeline::ModelSpec;
use vngender_core::rng;

const SYLLABLES: &[&str] = &[
    "Nguyễn", "Trần", "Văn", "Thị", "Minh", "Ngọc", "An", "Hoa", "Lan", "Đù", "Xuân", "Bảo", "Khải", "Tường",
    "Phụng", "Ánh", "Kiều", "Oanh", "Sang", "Lộc", "Zed", "Qu", "ÊÊ", "Ýến",
];

/// Names of 1 to 5 tokens, a mix of known and unseen tokens, with odd casing
/// and spacing.
pub fn random_names(n: usize, seed: u64) -> Vec<String> {
    let mut r = rng::seeded(seed);
    (0..n)
        .map(|_| {
            let len = r.random_range(1..=5);
            let toks: Vec<String> = (0..len)
                .map(|_| {
                    let t = *SYLLABLES.choose(&mut r).unwrap();
                    if r.random_bool(0.2) { t.to_uppercase() } else { t.to_string() }
                })
                .collect();
            let sep = if r.random_bool(0.1) { "   " } else { " " };
            toks.join(sep)
        })
        .collect()
}

/// Writes a `.vec` file covering the normalized tokens of `d`.
pub fn write_vec_file(d: &Dataset, dim: usize, seed: u64, path: &Path) {
    let mut tokens: Vec<String> =
        d.records.iter().flat_map(|r| names::parse(&r.full_name).unwrap().tokens().map(str::to_string).collect::<Vec<_>>()).collect();
    tokens.sort();
    tokens.dedup();
    let mut r = rng::seeded(seed);
    let mut f = std::fs::File::create(path).unwrap();
    writeln!(f, "{} {dim}", tokens.len()).unwrap();
    for t in tokens {
        let v: Vec<String> = (0..dim).map(|_| format!("{:.5}", r.random_range(-1.0..1.0))).collect();
        writeln!(f, "{t} {}", v.join(" ")).unwrap();
    }
}

pub fn small_lstm(vec_path: &Path, dim: usize) -> ModelSpec {
    let (table, _) = load_embeddings(vec_path, dim, 7).unwrap();
    let cfg = LstmTrainConfig { hidden: 8, epochs: 2, learning_rate: 0.3, seed: 5, ..LstmTrainConfig::default() };
    ModelSpec::lstm(cfg, Arc::new(table))
}

pub fn bundle(
    d: &Dataset,
    spec: &ModelSpec,
    vcfg: &VectorizerConfig,
    mask: ComponentMask,
    embedding_source: Option<&Path>,
) -> (ModelBundle, ExperimentResult) {
    let split = stratified_split(d, &SplitSpec::with_seed(3)).unwrap();
    let (model, result) = train_and_evaluate(&split, mask, spec, vcfg).unwrap();
    let meta = BundleMeta {
        model_id: result.model.clone(),
        mask,
        dataset_tag: d.source_tag.clone(),
        seed: 3,
        created_unix: 0,
        metrics: Some(result.metrics),
    };
    (ModelBundle::new(model, meta, embedding_source.map(Path::to_path_buf)), result)
}
