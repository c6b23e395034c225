//! Dual-encoding compatibility matrix, loaded from a JSON data file so the
//! entries can be edited without touching code.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ChannelKind;

/// The shipped matrix.
pub const MATRIX_JSON: &str = include_str!("../../data/compatibility.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Compatibility {
    Compatible,
    CompatibleIfMonochromeGlyph { reason: String },
    Incompatible { reason: String },
    /// Pair the design space does not adjudicate; treated as incompatible.
    Unspecified { reason: String },
}

impl Compatibility {
    pub fn is_compatible(&self) -> bool {
        matches!(self, Compatibility::Compatible)
    }

    pub fn reason(&self) -> Option<&str> {
        match self {
            Compatibility::Compatible => None,
            Compatibility::CompatibleIfMonochromeGlyph { reason }
            | Compatibility::Incompatible { reason }
            | Compatibility::Unspecified { reason } => Some(reason),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("malformed matrix file: {0}")]
    Malformed(String),
    #[error("pair {0}/{1} is listed more than once")]
    DuplicatePair(&'static str, &'static str),
    #[error("diagonal entry {0} is fixed and may not be listed")]
    DiagonalEntry(&'static str),
    #[error("pair {0}/{1} needs a reason")]
    MissingReason(&'static str, &'static str),
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawVerdict {
    Compatible,
    CompatibleIfMonochromeGlyph,
    Incompatible,
}

#[derive(Deserialize)]
struct RawEntry {
    a: ChannelKind,
    b: ChannelKind,
    verdict: RawVerdict,
    #[serde(default)]
    reason: Option<String>,
}

#[derive(Deserialize)]
struct RawMatrix {
    unspecified_reason: String,
    same_channel_reason: String,
    entries: Vec<RawEntry>,
}

/// One unordered pair and its stored verdict, as listed by the catalog.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairEntry {
    pub a: ChannelKind,
    pub b: ChannelKind,
    #[serde(flatten)]
    pub compatibility: Compatibility,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityMatrix {
    entries: BTreeMap<(ChannelKind, ChannelKind), Compatibility>,
    unspecified_reason: String,
    same_channel_reason: String,
}

fn ordered(a: ChannelKind, b: ChannelKind) -> (ChannelKind, ChannelKind) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl CompatibilityMatrix {
    pub fn from_json(text: &str) -> Result<Self, MatrixError> {
        let raw: RawMatrix = serde_json::from_str(text).map_err(|e| MatrixError::Malformed(e.to_string()))?;
        let mut entries = BTreeMap::new();
        for e in raw.entries {
            if e.a == e.b {
                return Err(MatrixError::DiagonalEntry(e.a.name()));
            }
            let reason = e.reason.filter(|r| !r.trim().is_empty());
            let verdict = match (e.verdict, reason) {
                (RawVerdict::Compatible, _) => Compatibility::Compatible,
                (RawVerdict::CompatibleIfMonochromeGlyph, Some(reason)) => {
                    Compatibility::CompatibleIfMonochromeGlyph { reason }
                }
                (RawVerdict::Incompatible, Some(reason)) => Compatibility::Incompatible { reason },
                (_, None) => return Err(MatrixError::MissingReason(e.a.name(), e.b.name())),
            };
            if entries.insert(ordered(e.a, e.b), verdict).is_some() {
                return Err(MatrixError::DuplicatePair(e.a.name(), e.b.name()));
            }
        }
        Ok(Self {
            entries,
            unspecified_reason: raw.unspecified_reason,
            same_channel_reason: raw.same_channel_reason,
        })
    }

    pub fn bundled() -> &'static CompatibilityMatrix {
        static MATRIX: OnceLock<CompatibilityMatrix> = OnceLock::new();
        MATRIX.get_or_init(|| CompatibilityMatrix::from_json(MATRIX_JSON).expect("bundled matrix is valid"))
    }

    /// Stored entry, with the monochrome condition left unresolved.
    pub fn get(&self, a: ChannelKind, b: ChannelKind) -> Compatibility {
        if a == b {
            return Compatibility::Incompatible {
                reason: self.same_channel_reason.clone(),
            };
        }
        self.entries
            .get(&ordered(a, b))
            .cloned()
            .unwrap_or_else(|| Compatibility::Unspecified {
                reason: self.unspecified_reason.clone(),
            })
    }

    /// Entry with the monochrome-glyph condition resolved by the flag.
    pub fn check(&self, a: ChannelKind, b: ChannelKind, glyph_monochrome: bool) -> Compatibility {
        match self.get(a, b) {
            Compatibility::CompatibleIfMonochromeGlyph { .. } if glyph_monochrome => Compatibility::Compatible,
            Compatibility::CompatibleIfMonochromeGlyph { reason } => Compatibility::Incompatible { reason },
            other => other,
        }
    }

    /// All 45 unordered pairs of distinct channels.
    pub fn pairs(&self) -> Vec<PairEntry> {
        let mut out = Vec::with_capacity(45);
        for (i, a) in ChannelKind::ALL.iter().enumerate() {
            for b in &ChannelKind::ALL[i + 1..] {
                out.push(PairEntry {
                    a: *a,
                    b: *b,
                    compatibility: self.get(*a, *b),
                });
            }
        }
        out
    }
}

/// Verdict from the bundled matrix.
pub fn check_compatibility(a: ChannelKind, b: ChannelKind, glyph_monochrome: bool) -> Compatibility {
    CompatibilityMatrix::bundled().check(a, b, glyph_monochrome)
}
