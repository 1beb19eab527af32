//! Name normalization and positional segmentation.
//!
//! A Vietnamese full name is written family name first, then zero or more
//! middle tokens, then the given name. Segmentation is strictly positional:
//! compound surnames are not detected.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NameError {
    #[error("name is empty after trimming")]
    EmptyName,
    #[error("component mask {0} selects nothing from this name")]
    EmptySelection(ComponentMask),
    #[error("a component mask needs at least one component")]
    EmptyMask,
    #[error("unknown component mask `{0}` (expected fan, mn, fin, fan+mn, fan+fin, mn+fin or full)")]
    UnknownMask(String),
}

/// Trims, collapses internal whitespace, lowercases and applies canonical
/// composition (NFC).
pub fn normalize(raw: &str) -> Result<String, NameError> {
    let mut out = String::with_capacity(raw.len());
    for (i, word) in raw.split_whitespace().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&word.to_lowercase());
    }
    if out.is_empty() {
        return Err(NameError::EmptyName);
    }
    Ok(out.nfc().collect())
}

/// Strips diacritics for display/export. Never used on the model path,
/// where "tú" and "tu" must stay distinct tokens.
pub fn fold_diacritics(s: &str) -> String {
    s.nfd()
        .filter(|c| !unicode_normalization::char::is_combining_mark(*c))
        .map(|c| match c {
            'đ' => 'd',
            'Đ' => 'D',
            c => c,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NameComponents {
    pub family: Option<String>,
    pub middle: Vec<String>,
    pub given: String,
}

impl NameComponents {
    /// Tokens in original order.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.family
            .as_deref()
            .into_iter()
            .chain(self.middle.iter().map(String::as_str))
            .chain(core::iter::once(self.given.as_str()))
    }

    /// Tokens of the components selected by `mask`, in original order.
    pub fn select(&self, mask: ComponentMask) -> Result<Vec<&str>, NameError> {
        let mut out = Vec::with_capacity(self.middle.len() + 2);
        if mask.family() {
            out.extend(self.family.as_deref());
        }
        if mask.middle() {
            out.extend(self.middle.iter().map(String::as_str));
        }
        if mask.given() {
            out.push(self.given.as_str());
        }
        if out.is_empty() {
            Err(NameError::EmptySelection(mask))
        } else {
            Ok(out)
        }
    }
}

/// Splits an already-normalized name: one token is the given name, two are
/// family + given, and with three or more every interior token is middle.
pub fn segment(normalized: &str) -> Result<NameComponents, NameError> {
    let mut tokens: Vec<&str> = normalized.split(' ').filter(|t| !t.is_empty()).collect();
    let given = tokens.pop().ok_or(NameError::EmptyName)?.to_string();
    let family = if tokens.is_empty() {
        None
    } else {
        Some(tokens.remove(0).to_string())
    };
    Ok(NameComponents {
        family,
        middle: tokens.into_iter().map(str::to_string).collect(),
        given,
    })
}

/// `normalize` followed by `segment`.
pub fn parse(raw: &str) -> Result<NameComponents, NameError> {
    segment(&normalize(raw)?)
}

/// Owned token list for `mask`.
pub fn select_components(c: &NameComponents, mask: ComponentMask) -> Result<Vec<String>, NameError> {
    Ok(c.select(mask)?.into_iter().map(str::to_string).collect())
}

/// Which of family (FaN), middle (MN) and given (FiN) name feed a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ComponentMask {
    bits: u8,
}

const FAMILY: u8 = 0b100;
const MIDDLE: u8 = 0b010;
const GIVEN: u8 = 0b001;

impl ComponentMask {
    pub const FAN: Self = Self { bits: FAMILY };
    pub const MN: Self = Self { bits: MIDDLE };
    pub const FIN: Self = Self { bits: GIVEN };
    pub const FAN_MN: Self = Self { bits: FAMILY | MIDDLE };
    pub const FAN_FIN: Self = Self { bits: FAMILY | GIVEN };
    pub const MN_FIN: Self = Self { bits: MIDDLE | GIVEN };
    pub const FULL: Self = Self { bits: FAMILY | MIDDLE | GIVEN };

    /// The seven non-empty masks, in ablation-table order.
    pub const ALL: [Self; 7] = [
        Self::FAN,
        Self::MN,
        Self::FIN,
        Self::FAN_MN,
        Self::FAN_FIN,
        Self::MN_FIN,
        Self::FULL,
    ];

    pub fn new(use_family: bool, use_middle: bool, use_given: bool) -> Result<Self, NameError> {
        let bits = (u8::from(use_family) << 2) | (u8::from(use_middle) << 1) | u8::from(use_given);
        if bits == 0 {
            Err(NameError::EmptyMask)
        } else {
            Ok(Self { bits })
        }
    }

    pub fn family(self) -> bool {
        self.bits & FAMILY != 0
    }

    pub fn middle(self) -> bool {
        self.bits & MIDDLE != 0
    }

    pub fn given(self) -> bool {
        self.bits & GIVEN != 0
    }

    /// CLI spelling, e.g. `mn+fin`.
    pub fn as_str(self) -> &'static str {
        match self.bits {
            FAMILY => "fan",
            MIDDLE => "mn",
            GIVEN => "fin",
            b if b == FAMILY | MIDDLE => "fan+mn",
            b if b == FAMILY | GIVEN => "fan+fin",
            b if b == MIDDLE | GIVEN => "mn+fin",
            _ => "full",
        }
    }

    /// Table label, e.g. `MN + FiN`.
    pub fn label(self) -> &'static str {
        match self.bits {
            FAMILY => "FaN",
            MIDDLE => "MN",
            GIVEN => "FiN",
            b if b == FAMILY | MIDDLE => "FaN + MN",
            b if b == FAMILY | GIVEN => "FaN + FiN",
            b if b == MIDDLE | GIVEN => "MN + FiN",
            _ => "FaN + MN + FiN",
        }
    }
}

impl fmt::Display for ComponentMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ComponentMask {
    type Err = NameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        if key == "full" || key == "fan+mn+fin" {
            return Ok(Self::FULL);
        }
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == key)
            .ok_or_else(|| NameError::UnknownMask(s.to_string()))
    }
}

impl TryFrom<String> for ComponentMask {
    type Error = NameError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<ComponentMask> for String {
    fn from(m: ComponentMask) -> Self {
        m.as_str().to_string()
    }
}
