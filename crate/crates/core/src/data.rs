//! Labeled name records, descriptive statistics and a seeded synthetic
//! corpus with a planted middle-name rule.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::names::{self, NameComponents};
use crate::rng;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DataError {
    #[error("dataset is empty")]
    Empty,
    #[error("full name is empty")]
    EmptyName,
    #[error("label `{0}` is not 0 or 1")]
    BadLabel(String),
    #[error("top_k must be at least 1")]
    ZeroTopK,
    #[error("synthetic dataset needs n >= 2 (got {0})")]
    TooSmall(usize),
    #[error("fidelity {0} is outside [0, 1]")]
    BadFidelity(f64),
}

/// Binary label with the corpus encoding: 1 = male, 0 = female.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Gender {
    Female = 0,
    Male = 1,
}

impl Gender {
    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn from_bool(male: bool) -> Self {
        if male {
            Gender::Male
        } else {
            Gender::Female
        }
    }

    pub fn is_male(self) -> bool {
        self == Gender::Male
    }

    pub fn flip(self) -> Self {
        Self::from_bool(!self.is_male())
    }

    pub fn name(self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
        }
    }

    /// Strict parse of a label field: exactly `0` or `1` after trimming.
    pub fn parse_label(s: &str) -> Result<Self, DataError> {
        match s.trim() {
            "1" => Ok(Gender::Male),
            "0" => Ok(Gender::Female),
            other => Err(DataError::BadLabel(other.to_string())),
        }
    }
}

impl From<Gender> for u8 {
    fn from(g: Gender) -> u8 {
        g.as_u8()
    }
}

impl TryFrom<u8> for Gender {
    type Error = DataError;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            0 => Ok(Gender::Female),
            1 => Ok(Gender::Male),
            other => Err(DataError::BadLabel(other.to_string())),
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub full_name: String,
    pub gender: Gender,
}

impl DatasetRecord {
    /// Trims the name; rejects it if nothing is left.
    pub fn new(full_name: &str, gender: Gender) -> Result<Self, DataError> {
        let full_name = full_name.trim();
        if full_name.is_empty() {
            return Err(DataError::EmptyName);
        }
        Ok(Self { full_name: full_name.to_string(), gender })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub records: Vec<DatasetRecord>,
    pub source_tag: String,
}

impl Dataset {
    pub fn new(records: Vec<DatasetRecord>, source_tag: impl Into<String>) -> Self {
        Self { records, source_tag: source_tag.into() }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// (male, female) counts.
    pub fn label_counts(&self) -> (usize, usize) {
        let male = self.records.iter().filter(|r| r.gender.is_male()).count();
        (male, self.records.len() - male)
    }
}

/// Ranked (token, count) lists for one name component, split by gender.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ComponentRanking {
    pub male: Vec<(String, usize)>,
    pub female: Vec<(String, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub total: usize,
    pub male_count: usize,
    pub female_count: usize,
    pub male_fraction: f64,
    pub female_fraction: f64,
    /// Records whose normalized full name already appeared earlier.
    pub duplicate_names: usize,
    pub top_family_names: ComponentRanking,
    /// Whole middle names ("văn minh" counts once), so every record adds at
    /// most one to this table.
    pub top_middle_tokens: ComponentRanking,
    pub top_given_names: ComponentRanking,
}

#[derive(Default)]
struct Tally {
    male: BTreeMap<String, usize>,
    female: BTreeMap<String, usize>,
}

impl Tally {
    fn add(&mut self, g: Gender, token: String) {
        let map = if g.is_male() { &mut self.male } else { &mut self.female };
        *map.entry(token).or_insert(0) += 1;
    }

    fn rank(self, top_k: usize) -> ComponentRanking {
        ComponentRanking { male: top(self.male, top_k), female: top(self.female, top_k) }
    }
}

// Count descending, then token ascending.
fn top(map: BTreeMap<String, usize>, k: usize) -> Vec<(String, usize)> {
    let mut v: Vec<_> = map.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v.truncate(k);
    v
}

pub fn dataset_stats(d: &Dataset, top_k: usize) -> Result<DatasetStats, DataError> {
    if d.is_empty() {
        return Err(DataError::Empty);
    }
    if top_k == 0 {
        return Err(DataError::ZeroTopK);
    }
    let (male_count, female_count) = d.label_counts();
    let mut family = Tally::default();
    let mut middle = Tally::default();
    let mut given = Tally::default();
    let mut seen = BTreeMap::new();
    let mut duplicate_names = 0;
    for r in &d.records {
        let Ok(norm) = names::normalize(&r.full_name) else { continue };
        let c = names::segment(&norm).expect("normalized names are non-empty");
        if seen.insert(norm, ()).is_some() {
            duplicate_names += 1;
        }
        if let Some(f) = c.family {
            family.add(r.gender, f);
        }
        if !c.middle.is_empty() {
            middle.add(r.gender, c.middle.join(" "));
        }
        given.add(r.gender, c.given);
    }
    let total = d.len();
    Ok(DatasetStats {
        total,
        male_count,
        female_count,
        male_fraction: male_count as f64 / total as f64,
        female_fraction: female_count as f64 / total as f64,
        duplicate_names,
        top_family_names: family.rank(top_k),
        top_middle_tokens: middle.rank(top_k),
        top_given_names: given.rank(top_k),
    })
}

// Rough surname frequencies (per mille); nguyễn dominates as in the real
// population.
const FAMILY_POOL: &[(&str, u32)] = &[
    ("Nguyễn", 380),
    ("Trần", 110),
    ("Lê", 95),
    ("Phạm", 70),
    ("Hoàng", 50),
    ("Huỳnh", 40),
    ("Phan", 40),
    ("Vũ", 35),
    ("Võ", 35),
    ("Đặng", 25),
    ("Bùi", 25),
    ("Đỗ", 20),
    ("Hồ", 20),
    ("Ngô", 15),
    ("Dương", 15),
    ("Lý", 10),
];

const MALE_MIDDLE: &[&str] = &["Văn", "Minh", "Đức", "Quốc", "Hữu", "Công", "Thành", "Gia"];
const FEMALE_MIDDLE: &[&str] = &["Thị", "Ngọc", "Thu", "Thùy", "Mỹ", "Kim", "Phương", "Diễm"];

// Given names are drawn independently of gender so the middle token carries
// all of the signal.
const GIVEN_POOL: &[&str] = &[
    "An", "Anh", "Bình", "Châu", "Chi", "Dũng", "Duy", "Giang", "Hà", "Hải", "Hạnh", "Hiền", "Hiếu",
    "Hòa", "Hùng", "Hương", "Khánh", "Khoa", "Lan", "Linh", "Long", "Mai", "Nam", "Nga", "Nhung",
    "Phong", "Phúc", "Quân", "Quang", "Quỳnh", "Sơn", "Tâm", "Thảo", "Trang", "Trung", "Tú", "Tuấn",
    "Uyên", "Việt", "Vy", "Yến", "Đù",
];

/// Share of records whose planted gender is male.
pub const SYNTHETIC_MALE_SHARE: f64 = 0.58;

/// The planted rule: the gender a (normalized) middle token implies, if it
/// belongs to either middle-name pool.
pub fn planted_rule(middle_token: &str) -> Option<Gender> {
    let hit = |pool: &[&str]| pool.iter().any(|m| names::normalize(m).as_deref() == Ok(middle_token));
    if hit(MALE_MIDDLE) {
        Some(Gender::Male)
    } else if hit(FEMALE_MIDDLE) {
        Some(Gender::Female)
    } else {
        None
    }
}

/// Seeded corpus of `family middle given` names. The label follows
/// [`planted_rule`] on the middle token with probability `fidelity` and is
/// flipped otherwise; family and given names are independent of the label.
pub fn generate_synthetic(n: usize, fidelity: f64, seed: u64) -> Result<Dataset, DataError> {
    if n < 2 {
        return Err(DataError::TooSmall(n));
    }
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(DataError::BadFidelity(fidelity));
    }
    let mut rng = rng::seeded(rng::derive(seed, 0x5359_4E54));
    let family_dist = WeightedIndex::new(FAMILY_POOL.iter().map(|f| f.1)).expect("non-empty weights");
    let mut records = Vec::with_capacity(n);
    for _ in 0..n {
        let planted = Gender::from_bool(rng.random_bool(SYNTHETIC_MALE_SHARE));
        let family = FAMILY_POOL[family_dist.sample(&mut rng)].0;
        let pool = if planted.is_male() { MALE_MIDDLE } else { FEMALE_MIDDLE };
        let middle = pool.choose(&mut rng).expect("pool non-empty");
        let given = GIVEN_POOL.choose(&mut rng).expect("pool non-empty");
        let gender = if rng.random_bool(fidelity) { planted } else { planted.flip() };
        let mut full = String::with_capacity(32);
        full.push_str(family);
        full.push(' ');
        full.push_str(middle);
        full.push(' ');
        full.push_str(given);
        records.push(DatasetRecord { full_name: full, gender });
    }
    Ok(Dataset::new(records, alloc::format!("synthetic(n={n},fidelity={fidelity},seed={seed})")))
}

/// Fraction of records whose label agrees with the planted rule on their
/// middle token. Records without a recognised middle token count as
/// disagreements.
pub fn rule_agreement(d: &Dataset) -> f64 {
    if d.is_empty() {
        return 0.0;
    }
    let agree = d
        .records
        .iter()
        .filter(|r| {
            names::parse(&r.full_name)
                .ok()
                .and_then(|c: NameComponents| c.middle.first().and_then(|m| planted_rule(m)))
                == Some(r.gender)
        })
        .count();
    agree as f64 / d.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn rec(name: &str, g: u8) -> DatasetRecord {
        DatasetRecord::new(name, Gender::try_from(g).unwrap()).unwrap()
    }

    #[test]
    fn label_parsing_is_strict() {
        assert_eq!(Gender::parse_label("1").unwrap(), Gender::Male);
        assert_eq!(Gender::parse_label(" 0 ").unwrap(), Gender::Female);
        for bad in ["2", "01", "male", "", "1.0", "-1"] {
            assert!(Gender::parse_label(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn record_rejects_blank_name() {
        assert_eq!(DatasetRecord::new("   ", Gender::Male), Err(DataError::EmptyName));
        assert_eq!(DatasetRecord::new(" Võ Minh Đù ", Gender::Male).unwrap().full_name, "Võ Minh Đù");
    }

    #[test]
    fn stats_on_symmetric_counts() {
        let d = Dataset::new(
            vec![
                rec("Nguyễn Văn Nam", 1),
                rec("NGUYỄN Văn Nam", 1),
                rec("Nguyễn Thị Hiền", 0),
                rec("Trần Thị Lan", 0),
            ],
            "t",
        );
        let s = dataset_stats(&d, 5).unwrap();
        assert_eq!((s.male_fraction, s.female_fraction), (0.5, 0.5));
        assert_eq!(s.duplicate_names, 1);
        assert_eq!(s.top_family_names.male, vec![("nguyễn".to_string(), 2)]);
        assert_eq!(
            s.top_family_names.female,
            vec![("nguyễn".to_string(), 1), ("trần".to_string(), 1)]
        );
        assert_eq!(s.top_middle_tokens.female, vec![("thị".to_string(), 2)]);
    }

    #[test]
    fn stats_errors() {
        assert_eq!(dataset_stats(&Dataset::new(vec![], "e"), 3), Err(DataError::Empty));
        let d = Dataset::new(vec![rec("a b", 1)], "t");
        assert_eq!(dataset_stats(&d, 0), Err(DataError::ZeroTopK));
    }

    #[test]
    fn stats_ties_break_lexicographically() {
        let d = Dataset::new(vec![rec("B x y", 1), rec("A x z", 1), rec("C x w", 1)], "t");
        let s = dataset_stats(&d, 2).unwrap();
        assert_eq!(s.top_family_names.male, vec![("a".to_string(), 1), ("b".to_string(), 1)]);
    }

    #[test]
    fn stats_counts_bounded_by_gender_totals() {
        let d = generate_synthetic(3000, 0.9, 11).unwrap();
        let s = dataset_stats(&d, 1000).unwrap();
        assert!((s.male_fraction + s.female_fraction - 1.0).abs() < 1e-12);
        for ranking in [&s.top_family_names, &s.top_middle_tokens, &s.top_given_names] {
            assert!(ranking.male.iter().map(|t| t.1).sum::<usize>() <= s.male_count);
            assert!(ranking.female.iter().map(|t| t.1).sum::<usize>() <= s.female_count);
        }
        assert_eq!(s.top_family_names.male[0].0, "nguyễn");
        assert_eq!(s.top_family_names.female[0].0, "nguyễn");
    }

    #[test]
    fn synthetic_full_fidelity_follows_rule() {
        let d = generate_synthetic(1000, 1.0, 7).unwrap();
        assert_eq!(d.len(), 1000);
        assert_eq!(rule_agreement(&d), 1.0);
    }

    #[test]
    fn synthetic_is_deterministic() {
        assert_eq!(generate_synthetic(1000, 0.95, 7).unwrap(), generate_synthetic(1000, 0.95, 7).unwrap());
        assert_ne!(generate_synthetic(1000, 0.95, 7).unwrap(), generate_synthetic(1000, 0.95, 8).unwrap());
    }

    #[test]
    fn synthetic_agreement_rate_tracks_fidelity() {
        let d = generate_synthetic(10_000, 0.95, 7).unwrap();
        let rate = rule_agreement(&d);
        assert!((rate - 0.95).abs() <= 0.01, "{rate}");
        let (m, _) = d.label_counts();
        let male_share = m as f64 / d.len() as f64;
        // 0.58 * 0.95 + 0.42 * 0.05
        assert!((male_share - 0.572).abs() < 0.02, "{male_share}");
    }

    #[test]
    fn synthetic_argument_errors() {
        assert_eq!(generate_synthetic(1, 0.5, 0), Err(DataError::TooSmall(1)));
        assert!(matches!(generate_synthetic(10, 1.5, 0), Err(DataError::BadFidelity(_))));
        assert!(matches!(generate_synthetic(10, -0.1, 0), Err(DataError::BadFidelity(_))));
    }
}
