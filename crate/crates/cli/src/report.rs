//! Report envelope shared by all commands.

use serde::Serialize;
use serde_json::{json, Value};
use xpaudit::rational::to_decimal;
use xpaudit::Rational;

pub const DECIMAL_PLACES: usize = 6;

#[derive(Clone, Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
}

/// `{"exact": "p/q", "decimal": "0.123456"}`; the decimal is for display.
pub fn number(value: &Rational) -> Value {
    json!({
        "exact": value.to_string(),
        "decimal": to_decimal(value, DECIMAL_PLACES),
    })
}

pub fn pretty(value: &Rational) -> String {
    format!("{value} ({})", to_decimal(value, DECIMAL_PLACES))
}
