//! Token vocabularies and sparse count / TF-IDF vectors.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FeaturizeError {
    #[error("cannot fit a vocabulary: every document is empty")]
    EmptyCorpus,
    #[error("max_features must be at least 1")]
    ZeroMaxFeatures,
    #[error("sparse entries must have strictly increasing indices and non-zero finite weights")]
    InvalidEntries,
}

/// Sorted `(feature index, weight)` pairs with no explicit zeros.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: Vec<(usize, f64)>) -> Result<Self, FeaturizeError> {
        let sorted = entries.windows(2).all(|w| w[0].0 < w[1].0);
        let weights_ok = entries.iter().all(|&(_, w)| w != 0.0 && w.is_finite());
        if sorted && weights_ok {
            Ok(Self { entries })
        } else {
            Err(FeaturizeError::InvalidEntries)
        }
    }

    /// Builds from a dense slice, skipping zeros.
    pub fn from_dense(dense: &[f64]) -> Self {
        Self {
            entries: dense.iter().copied().enumerate().filter(|&(_, w)| w != 0.0).collect(),
        }
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |e| e.0)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|e| e.0)
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, w)| w * dense[i]).sum()
    }

    pub fn l1_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.1.abs()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        math::sqrt(self.entries.iter().map(|e| e.1 * e.1).sum())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { entries: self.entries.iter().map(|&(i, w)| (i, w * factor)).collect() }
    }

    pub fn to_dense(&self, n_features: usize) -> Vec<f64> {
        let mut v = alloc::vec![0.0; n_features];
        for &(i, w) in &self.entries {
            v[i] = w;
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VectorizerMode {
    Count,
    Tfidf,
}

impl core::str::FromStr for VectorizerMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "count" => Ok(Self::Count),
            "tfidf" | "tf-idf" => Ok(Self::Tfidf),
            other => Err(alloc::format!("unknown vectorizer `{other}` (expected count or tfidf)")),
        }
    }
}

impl core::fmt::Display for VectorizerMode {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Self::Count => "count",
            Self::Tfidf => "tfidf",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorizerConfig {
    pub mode: VectorizerMode,
    pub max_features: Option<usize>,
}

impl VectorizerConfig {
    /// Raw counts over the full vocabulary.
    pub fn count() -> Self {
        Self { mode: VectorizerMode::Count, max_features: None }
    }

    /// TF-IDF capped at 4,000 features.
    pub fn tfidf() -> Self {
        Self { mode: VectorizerMode::Tfidf, max_features: Some(4000) }
    }

    pub fn for_mode(mode: VectorizerMode) -> Self {
        match mode {
            VectorizerMode::Count => Self::count(),
            VectorizerMode::Tfidf => Self::tfidf(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    index_of: BTreeMap<String, usize>,
    doc_freq: Vec<usize>,
    n_docs: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.doc_freq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_freq.is_empty()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index_of.get(token).copied()
    }

    pub fn doc_freq(&self, index: usize) -> usize {
        self.doc_freq[index]
    }

    /// Tokens in index order.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        // Indices were assigned in lexicographic order, same as the map's.
        self.index_of.keys().map(String::as_str)
    }

    /// Smoothed idf: `ln((1 + N) / (1 + df)) + 1`.
    pub fn idf(&self, index: usize) -> f64 {
        math::ln((1 + self.n_docs) as f64 / (1 + self.doc_freq[index]) as f64) + 1.0
    }

    fn counts<S: AsRef<str>>(&self, doc: &[S]) -> BTreeMap<usize, f64> {
        let mut tf = BTreeMap::new();
        for t in doc {
            if let Some(i) = self.index_of(t.as_ref()) {
                *tf.entry(i).or_insert(0.0) += 1.0;
            }
        }
        tf
    }
}

/// Fits a vocabulary. With `max_features`, keeps the tokens with the highest
/// total term count (ties: lexicographically smaller first). Surviving tokens
/// are indexed in lexicographic order.
pub fn fit_vocabulary<D, S>(corpus: &[D], cfg: &VectorizerConfig) -> Result<Vocabulary, FeaturizeError>
where
    D: AsRef<[S]>,
    S: AsRef<str>,
{
    if cfg.max_features == Some(0) {
        return Err(FeaturizeError::ZeroMaxFeatures);
    }
    // token -> (total count, doc freq)
    let mut stats: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for doc in corpus {
        let doc = doc.as_ref();
        for (pos, t) in doc.iter().enumerate() {
            let t = t.as_ref();
            let first_in_doc = !doc[..pos].iter().any(|p| p.as_ref() == t);
            let e = stats.entry(t).or_insert((0, 0));
            e.0 += 1;
            if first_in_doc {
                e.1 += 1;
            }
        }
    }
    if stats.is_empty() {
        return Err(FeaturizeError::EmptyCorpus);
    }
    let mut kept: Vec<(&str, (usize, usize))> = stats.into_iter().collect();
    if let Some(cap) = cfg.max_features {
        if kept.len() > cap {
            kept.sort_by(|a, b| b.1 .0.cmp(&a.1 .0).then_with(|| a.0.cmp(b.0)));
            kept.truncate(cap);
            kept.sort_by(|a, b| a.0.cmp(b.0));
        }
    }
    let mut index_of = BTreeMap::new();
    let mut doc_freq = Vec::with_capacity(kept.len());
    for (i, (tok, (_, df))) in kept.into_iter().enumerate() {
        index_of.insert(String::from(tok), i);
        doc_freq.push(df);
    }
    Ok(Vocabulary { index_of, doc_freq, n_docs: corpus.len() })
}

/// Raw term counts; out-of-vocabulary tokens are dropped.
pub fn transform_count<S: AsRef<str>>(doc: &[S], v: &Vocabulary) -> SparseVector {
    SparseVector { entries: v.counts(doc).into_iter().collect() }
}

/// `tf * idf`, then L2-normalized.
pub fn transform_tfidf<S: AsRef<str>>(doc: &[S], v: &Vocabulary) -> SparseVector {
    let mut entries: Vec<(usize, f64)> = v.counts(doc).into_iter().map(|(i, tf)| (i, tf * v.idf(i))).collect();
    let norm = math::sqrt(entries.iter().map(|e| e.1 * e.1).sum());
    if norm > 0.0 {
        for e in &mut entries {
            e.1 /= norm;
        }
    }
    SparseVector { entries }
}

/// A fitted vocabulary bundled with its weighting mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vectorizer {
    pub config: VectorizerConfig,
    pub vocabulary: Vocabulary,
}

impl Vectorizer {
    pub fn fit<D, S>(corpus: &[D], config: VectorizerConfig) -> Result<Self, FeaturizeError>
    where
        D: AsRef<[S]>,
        S: AsRef<str>,
    {
        Ok(Self { vocabulary: fit_vocabulary(corpus, &config)?, config })
    }

    pub fn n_features(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn transform<S: AsRef<str>>(&self, doc: &[S]) -> SparseVector {
        match self.config.mode {
            VectorizerMode::Count => transform_count(doc, &self.vocabulary),
            VectorizerMode::Tfidf => transform_tfidf(doc, &self.vocabulary),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn vocab(corpus: &[Vec<&str>], cfg: VectorizerConfig) -> Vocabulary {
        fit_vocabulary(corpus, &cfg).unwrap()
    }

    #[test]
    fn vocabulary_size_and_doc_freq() {
        let v = vocab(&[vec!["thị", "hiền"], vec!["văn", "nam"]], VectorizerConfig::count());
        assert_eq!(v.len(), 4);
        assert_eq!(v.tokens().collect::<Vec<_>>(), vec!["hiền", "nam", "thị", "văn"]);

        let v = vocab(&[vec!["a"], vec!["a"], vec!["b"]], VectorizerConfig::count());
        assert_eq!(v.doc_freq(v.index_of("a").unwrap()), 2);
        assert_eq!(v.doc_freq(v.index_of("b").unwrap()), 1);
        assert_eq!(v.n_docs(), 3);

        // a repeated token counts once toward doc freq
        let v = vocab(&[vec!["a", "a"]], VectorizerConfig::count());
        assert_eq!(v.doc_freq(0), 1);
    }

    #[test]
    fn max_features_tie_break_is_lexicographic() {
        let corpus = [vec!["thị", "hiền"], vec!["văn", "nam"]];
        // Oracle: every token has total count 1, so sorting by (-count, token)
        // puts the smallest token first.
        let mut all: Vec<&str> = corpus.iter().flatten().copied().collect();
        all.sort();
        let expected = all[0];
        let cfg = VectorizerConfig { mode: VectorizerMode::Count, max_features: Some(1) };
        let v = vocab(&corpus, cfg);
        assert_eq!(v.tokens().collect::<Vec<_>>(), vec![expected]);
        assert_eq!(expected, "hiền");
    }

    #[test]
    fn max_features_prefers_frequent_tokens() {
        let corpus = [vec!["z", "z"], vec!["a"], vec!["m", "z"], vec!["m"]];
        let cfg = VectorizerConfig { mode: VectorizerMode::Count, max_features: Some(2) };
        let v = vocab(&corpus, cfg);
        assert_eq!(v.tokens().collect::<Vec<_>>(), vec!["m", "z"]);
        assert_eq!(v.index_of("m"), Some(0));
        assert_eq!(v.index_of("a"), None);
    }

    #[test]
    fn fit_errors() {
        let empty: [Vec<&str>; 2] = [vec![], vec![]];
        assert_eq!(fit_vocabulary(&empty, &VectorizerConfig::count()), Err(FeaturizeError::EmptyCorpus));
        let none: [Vec<&str>; 0] = [];
        assert_eq!(fit_vocabulary(&none, &VectorizerConfig::count()), Err(FeaturizeError::EmptyCorpus));
        let cfg = VectorizerConfig { mode: VectorizerMode::Tfidf, max_features: Some(0) };
        assert_eq!(fit_vocabulary(&[vec!["a"]], &cfg), Err(FeaturizeError::ZeroMaxFeatures));
    }

    #[test]
    fn count_transform() {
        let v = vocab(&[vec!["thị", "hiền"]], VectorizerConfig::count());
        let x = transform_count(&["thị", "thị", "hiền"], &v);
        assert_eq!(x.get(v.index_of("thị").unwrap()), 2.0);
        assert_eq!(x.get(v.index_of("hiền").unwrap()), 1.0);
        assert!(transform_count(&["zzz"], &v).is_empty());
        assert!(transform_count::<&str>(&[], &v).is_empty());
    }

    #[test]
    fn tfidf_transform() {
        let v = vocab(&[vec!["a", "b"]], VectorizerConfig::tfidf());
        let x = transform_tfidf(&["a", "b"], &v);
        let h = 1.0 / 2f64.sqrt();
        assert!((x.get(0) - h).abs() < 1e-15 && (x.get(1) - h).abs() < 1e-15);
        let x = transform_tfidf(&["a", "a"], &v);
        assert_eq!(x.entries(), &[(0, 1.0)]);
        assert!(transform_tfidf::<&str>(&[], &v).is_empty());
    }

    #[test]
    fn tfidf_weights_follow_smoothed_idf() {
        let corpus = [vec!["a", "b"], vec!["a"], vec!["c"]];
        let v = vocab(&corpus, VectorizerConfig::tfidf());
        let x = transform_tfidf(&["a", "b", "b"], &v);
        // idf(a) = ln(4/3) + 1, idf(b) = ln(4/2) + 1; tf(b) = 2
        let wa = (4.0f64 / 3.0).ln() + 1.0;
        let wb = 2.0 * (2.0f64.ln() + 1.0);
        let n = (wa * wa + wb * wb).sqrt();
        assert!((x.get(0) - wa / n).abs() < 1e-14);
        assert!((x.get(1) - wb / n).abs() < 1e-14);
    }

    #[test]
    fn sparse_vector_validation() {
        assert!(SparseVector::from_entries(vec![(0, 1.0), (3, 2.0)]).is_ok());
        assert!(SparseVector::from_entries(vec![(3, 1.0), (0, 2.0)]).is_err());
        assert!(SparseVector::from_entries(vec![(1, 1.0), (1, 2.0)]).is_err());
        assert!(SparseVector::from_entries(vec![(1, 0.0)]).is_err());
        assert_eq!(SparseVector::from_dense(&[0.0, 2.0, 0.0]).entries(), &[(1, 2.0)]);
    }

    fn corpus_strategy() -> impl Strategy<Value = Vec<Vec<String>>> {
        let tok = prop_oneof![Just("a"), Just("b"), Just("thị"), Just("văn"), Just("hiền"), Just("đù")]
            .prop_map(String::from);
        proptest::collection::vec(proptest::collection::vec(tok, 0..5), 1..8)
    }

    proptest! {
        #[test]
        fn count_vectors_are_integral_and_l1_matches(corpus in corpus_strategy(), doc in corpus_strategy()) {
            prop_assume!(corpus.iter().any(|d| !d.is_empty()));
            let v = fit_vocabulary(&corpus, &VectorizerConfig::count()).unwrap();
            for d in &doc {
                let x = transform_count(d, &v);
                let in_vocab = d.iter().filter(|t| v.index_of(t).is_some()).count();
                prop_assert_eq!(x.l1_norm(), in_vocab as f64);
                prop_assert!(x.iter().all(|(_, w)| w >= 1.0 && w.fract() == 0.0));
                prop_assert!(x.entries().windows(2).all(|w| w[0].0 < w[1].0));
            }
        }

        #[test]
        fn tfidf_vectors_are_unit_norm(corpus in corpus_strategy(), doc in corpus_strategy()) {
            prop_assume!(corpus.iter().any(|d| !d.is_empty()));
            let v = fit_vocabulary(&corpus, &VectorizerConfig::tfidf()).unwrap();
            for d in &doc {
                let x = transform_tfidf(d, &v);
                if !x.is_empty() {
                    prop_assert!((x.l2_norm() - 1.0).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn vocabulary_is_a_deterministic_bijection(corpus in corpus_strategy()) {
            prop_assume!(corpus.iter().any(|d| !d.is_empty()));
            let a = fit_vocabulary(&corpus, &VectorizerConfig::count()).unwrap();
            let b = fit_vocabulary(&corpus, &VectorizerConfig::count()).unwrap();
            prop_assert_eq!(&a, &b);
            let idx: Vec<usize> = a.tokens().map(|t| a.index_of(t).unwrap()).collect();
            prop_assert_eq!(idx, (0..a.len()).collect::<Vec<_>>());
            for i in 0..a.len() {
                prop_assert!(a.doc_freq(i) >= 1 && a.doc_freq(i) <= a.n_docs());
            }
        }

        #[test]
        fn capping_keeps_surviving_count_weights(corpus in corpus_strategy(), cap in 1usize..4) {
            prop_assume!(corpus.iter().any(|d| !d.is_empty()));
            let full = fit_vocabulary(&corpus, &VectorizerConfig::count()).unwrap();
            let capped = fit_vocabulary(&corpus, &VectorizerConfig { mode: VectorizerMode::Count, max_features: Some(cap) }).unwrap();
            for d in &corpus {
                let xf = transform_count(d, &full);
                let xc = transform_count(d, &capped);
                for t in capped.tokens() {
                    prop_assert_eq!(xc.get(capped.index_of(t).unwrap()), xf.get(full.index_of(t).unwrap()));
                }
            }
        }
    }
}
