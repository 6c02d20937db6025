use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BusinessRecord {
    pub business_id: String,
    /// Aggregate rating in half-star steps on [1, 5].
    pub stars: f64,
    pub categories: Vec<String>,
    pub review_count: u64,
}

impl BusinessRecord {
    pub fn has_category(&self, category: &str) -> bool {
        self.categories.iter().any(|c| c == category)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReviewRecord {
    pub review_id: String,
    pub business_id: String,
    /// Per-review rating. Carried along, never used as a regression target.
    pub stars: u8,
    pub text: String,
}

/// Outcome of parsing one well-formed JSON line.
#[derive(Clone, Debug, PartialEq)]
pub enum Parsed<T> {
    Record(T),
    Skip(SkipReason),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkipReason {
    /// The object describes another record type (user, check-in, tip).
    OtherType,
    MissingField(&'static str),
    InvalidStars,
}

fn parse_object(line: &str, line_no: usize) -> Result<Map<String, Value>> {
    match serde_json::from_str::<Value>(line) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(Error::MalformedJson {
            line: line_no,
            message: "expected a JSON object".into(),
        }),
        Err(e) => Err(Error::MalformedJson {
            line: line_no,
            message: e.to_string(),
        }),
    }
}

fn is_other_type(obj: &Map<String, Value>, expected: &str) -> bool {
    matches!(obj.get("type"), Some(Value::String(t)) if t != expected)
}

fn non_empty_str<'a>(obj: &'a Map<String, Value>, key: &str) -> Option<&'a str> {
    obj.get(key)
        .and_then(Value::as_str)
        .filter(|s| !s.is_empty())
}

fn valid_half_star(stars: f64) -> bool {
    (1.0..=5.0).contains(&stars) && (stars * 2.0).fract() == 0.0
}

/// Parse one line of a business file.
///
/// `categories` may be a JSON array (2013-era dumps) or a comma-separated
/// string (later dumps); a missing or null value means no categories.
pub fn parse_business_line(line: &str, line_no: usize) -> Result<Parsed<BusinessRecord>> {
    let obj = parse_object(line, line_no)?;
    if is_other_type(&obj, "business") {
        return Ok(Parsed::Skip(SkipReason::OtherType));
    }
    let Some(business_id) = non_empty_str(&obj, "business_id") else {
        return Ok(Parsed::Skip(SkipReason::MissingField("business_id")));
    };
    let Some(stars) = obj.get("stars").and_then(Value::as_f64) else {
        return Ok(Parsed::Skip(SkipReason::MissingField("stars")));
    };
    if !valid_half_star(stars) {
        return Ok(Parsed::Skip(SkipReason::InvalidStars));
    }
    let categories = match obj.get("categories") {
        Some(Value::Array(items)) => items
            .iter()
            .filter_map(Value::as_str)
            .map(str::to_string)
            .collect(),
        Some(Value::String(s)) => s
            .split(',')
            .map(str::trim)
            .filter(|c| !c.is_empty())
            .map(str::to_string)
            .collect(),
        _ => Vec::new(),
    };
    let review_count = obj.get("review_count").and_then(Value::as_u64).unwrap_or(0);
    Ok(Parsed::Record(BusinessRecord {
        business_id: business_id.to_string(),
        stars,
        categories,
        review_count,
    }))
}

/// Parse one line of a review file. Reviews without text or stars are skipped.
pub fn parse_review_line(line: &str, line_no: usize) -> Result<Parsed<ReviewRecord>> {
    let obj = parse_object(line, line_no)?;
    if is_other_type(&obj, "review") {
        return Ok(Parsed::Skip(SkipReason::OtherType));
    }
    let Some(business_id) = non_empty_str(&obj, "business_id") else {
        return Ok(Parsed::Skip(SkipReason::MissingField("business_id")));
    };
    let Some(text) = obj.get("text").and_then(Value::as_str) else {
        return Ok(Parsed::Skip(SkipReason::MissingField("text")));
    };
    let Some(stars) = obj.get("stars").and_then(Value::as_f64) else {
        return Ok(Parsed::Skip(SkipReason::MissingField("stars")));
    };
    if !(1.0..=5.0).contains(&stars) || stars.fract() != 0.0 {
        return Ok(Parsed::Skip(SkipReason::InvalidStars));
    }
    let review_id = obj
        .get("review_id")
        .and_then(Value::as_str)
        .unwrap_or_default();
    Ok(Parsed::Record(ReviewRecord {
        review_id: review_id.to_string(),
        business_id: business_id.to_string(),
        stars: stars as u8,
        text: text.to_string(),
    }))
}
