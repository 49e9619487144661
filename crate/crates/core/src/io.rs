//! JSON tensor files: `{"d": 3, "mu": [2,1] | null, "entries": {"000": "3/4", ...}}`.
//!
//! Keys are bit strings in slot-major order (slot 1 is the leftmost bit). Values
//! are rational strings or JSON numbers; a number is read as its exact decimal.
//! Missing keys are zero.

use crate::combinatorics::Partition;
use crate::error::{BtsError, Result};
use crate::scalar::{format_rational, parse_rational, Rational};
use crate::tensor_core::{bit_string, compress, MuTensor, RationalTensor};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    d: usize,
    #[serde(default)]
    mu: Option<Vec<usize>>,
    #[serde(default)]
    entries: BTreeMap<String, Value>,
}

#[derive(Serialize)]
struct OutFile<'a> {
    d: usize,
    mu: Option<&'a [usize]>,
    entries: BTreeMap<String, String>,
}

/// A tensor read from disk with its declared partition, if any.
#[derive(Clone, Debug)]
pub struct TensorInput {
    pub tensor: RationalTensor,
    pub mu: Option<Partition>,
}

impl TensorInput {
    /// The compressed tensor for `mu_override`, the declared μ, or 1^d.
    pub fn to_mu(&self, mu_override: Option<&Partition>) -> Result<MuTensor<Rational>> {
        let mu = match (mu_override, &self.mu) {
            (Some(m), _) | (None, Some(m)) => m.clone(),
            (None, None) => Partition::ones(self.tensor.d()),
        };
        if mu.d() != self.tensor.d() {
            return Err(BtsError::PartitionMismatch {
                left: mu.to_string(),
                right: format!("d = {}", self.tensor.d()),
            });
        }
        compress(&self.tensor, &mu)
    }
}

const MAX_D: usize = 16;

pub fn parse_tensor_json(text: &str) -> Result<TensorInput> {
    let raw: RawFile = serde_json::from_str(text)
        .map_err(|e| BtsError::Parse(format!("line {} column {}: {e}", e.line(), e.column())))?;
    if raw.d == 0 || raw.d > MAX_D {
        return Err(BtsError::Parse(format!("d must be in 1..={MAX_D}, got {}", raw.d)));
    }
    let mut t = RationalTensor::zeros(raw.d);
    for (key, value) in &raw.entries {
        if key.len() != raw.d || !key.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(BtsError::Parse(format!(
                "entry key {key:?} is not a bit string of length {}",
                raw.d
            )));
        }
        let v = match value {
            Value::String(s) => parse_rational(s),
            Value::Number(n) => parse_rational(&n.to_string()),
            _ => None,
        }
        .ok_or_else(|| BtsError::Parse(format!("entry {key}: cannot read {value} as a rational")))?;
        let bits: Vec<u8> = key.bytes().map(|b| b - b'0').collect();
        t.set(&bits, v);
    }
    let mu = raw.mu.map(Partition::new).transpose()?;
    if let Some(m) = &mu {
        if m.d() != raw.d {
            return Err(BtsError::Parse(format!("mu {m} does not sum to d = {}", raw.d)));
        }
        compress(&t, m)?;
    }
    Ok(TensorInput { tensor: t, mu })
}

/// Writes every non-zero entry as an exact rational string.
pub fn tensor_to_json(t: &RationalTensor, mu: Option<&Partition>) -> String {
    let entries = t
        .entries()
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .map(|(i, v)| (bit_string(i, t.d()), format_rational(v)))
        .collect();
    let out = OutFile {
        d: t.d(),
        mu: mu.map(|m| m.parts()),
        entries,
    };
    serde_json::to_string_pretty(&out).expect("plain data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn round_trip() {
        let text = r#"{"d": 3, "mu": null, "entries": {"000": "3/4", "111": -2, "101": 0.125}}"#;
        let input = parse_tensor_json(text).unwrap();
        assert_eq!(input.tensor.get(&[0, 0, 0]), &rat(3, 4));
        assert_eq!(input.tensor.get(&[1, 0, 1]), &rat(1, 8));
        let again = parse_tensor_json(&tensor_to_json(&input.tensor, None)).unwrap();
        assert_eq!(again.tensor, input.tensor);
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_tensor_json("{\"d\": 3,\n \"entries\": {\"000\": }}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(parse_tensor_json(r#"{"d": 2, "entries": {"000": 1}}"#).is_err());
        assert!(parse_tensor_json(r#"{"d": 2, "mu": [2], "entries": {"01": 1}}"#).is_err());
    }
}
