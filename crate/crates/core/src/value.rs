//! Cell values: finite doubles or spreadsheet-style error markers.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// The error kinds a cell can hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    /// Division by zero, or any arithmetic that left the finite range.
    Div0,
    /// A reference that could not be resolved.
    Ref,
    /// A function received an argument it cannot handle.
    Fn,
}

impl ErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Div0 => "#DIV/0!",
            ErrorKind::Ref => "#REF!",
            ErrorKind::Fn => "#FN!",
        }
    }

    pub fn parse(text: &str) -> Option<ErrorKind> {
        match text.trim() {
            "#DIV/0!" => Some(ErrorKind::Div0),
            "#REF!" => Some(ErrorKind::Ref),
            "#FN!" => Some(ErrorKind::Fn),
            _ => None,
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A single cube value.
///
/// `Number` is always finite: [`CellValue::number`] folds NaN and infinities
/// into `Error(Div0)`, so arithmetic never has to re-check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellValue {
    Number(f64),
    Error(ErrorKind),
}

impl CellValue {
    pub const ZERO: CellValue = CellValue::Number(0.0);

    #[inline]
    pub fn number(value: f64) -> CellValue {
        if value.is_finite() {
            CellValue::Number(value)
        } else {
            CellValue::Error(ErrorKind::Div0)
        }
    }

    pub fn as_number(self) -> Option<f64> {
        match self {
            CellValue::Number(n) => Some(n),
            CellValue::Error(_) => None,
        }
    }

    pub fn is_error(self) -> bool {
        matches!(self, CellValue::Error(_))
    }

    /// Bitwise identity, so `-0.0` and `0.0` differ. Used by determinism checks.
    pub fn bit_eq(self, other: CellValue) -> bool {
        match (self, other) {
            (CellValue::Number(a), CellValue::Number(b)) => a.to_bits() == b.to_bits(),
            (CellValue::Error(a), CellValue::Error(b)) => a == b,
            _ => false,
        }
    }
}

impl Default for CellValue {
    fn default() -> Self {
        CellValue::ZERO
    }
}

impl From<f64> for CellValue {
    fn from(value: f64) -> Self {
        CellValue::number(value)
    }
}

/// Numbers print as the shortest decimal that round-trips; errors print as
/// their marker text.
impl fmt::Display for CellValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellValue::Number(n) => write!(f, "{n}"),
            CellValue::Error(kind) => f.write_str(kind.as_str()),
        }
    }
}

impl Serialize for CellValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            CellValue::Number(n) => serializer.serialize_f64(*n),
            CellValue::Error(kind) => serializer.serialize_str(kind.as_str()),
        }
    }
}

impl<'de> Deserialize<'de> for CellValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(n) => Ok(CellValue::number(n)),
            Raw::Text(text) => ErrorKind::parse(&text)
                .map(CellValue::Error)
                .ok_or_else(|| serde::de::Error::custom(format!("not a cell value: {text}"))),
        }
    }
}
