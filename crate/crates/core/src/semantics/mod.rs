//! Constant binding, static validation, expression evaluation and the
//! next-state relation.

mod eval;
mod ir;
mod validate;

use thiserror::Error;

use crate::model::SpecModel;
use crate::value::{Kind, Value};

pub use eval::{Env, EvalError, Machine};
pub use ir::Compiled;
pub use validate::{validate, validate_model, StaticError};

/// A spec together with one value per declared constant, in declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSpec {
    pub spec: SpecModel,
    pub constant_values: Vec<Value>,
}

impl BoundSpec {
    pub fn constant(&self, name: &str) -> Option<&Value> {
        self.spec
            .constant_index(name)
            .map(|i| &self.constant_values[i])
    }

    /// `(name, value)` pairs in declaration order.
    pub fn constants(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.spec
            .constants
            .iter()
            .map(|c| c.name.as_str())
            .zip(self.constant_values.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BindError {
    #[error("constant {0} unbound")]
    Missing(String),
    #[error("unknown constant {0}")]
    Unknown(String),
    #[error("constant {name} is declared {expected} but was given {found}")]
    KindMismatch {
        name: String,
        expected: Kind,
        found: Value,
    },
    #[error("constant {0} assigned more than once")]
    Duplicate(String),
    #[error("malformed constant assignment `{0}` (expected name=value)")]
    Malformed(String),
}

pub fn bind_constants(
    spec: SpecModel,
    assignments: &[(String, Value)],
) -> Result<BoundSpec, BindError> {
    let mut values: Vec<Option<Value>> = vec![None; spec.constants.len()];
    for (name, value) in assignments {
        let idx = spec
            .constant_index(name)
            .ok_or_else(|| BindError::Unknown(name.clone()))?;
        let decl = &spec.constants[idx];
        if value.kind() != decl.kind {
            return Err(BindError::KindMismatch {
                name: name.clone(),
                expected: decl.kind,
                found: value.clone(),
            });
        }
        if values[idx].replace(value.clone()).is_some() {
            return Err(BindError::Duplicate(name.clone()));
        }
    }
    let constant_values = values
        .into_iter()
        .zip(&spec.constants)
        .map(|(v, decl)| v.ok_or_else(|| BindError::Missing(decl.name.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BoundSpec {
        spec,
        constant_values,
    })
}

/// Parses `name=value`, where value is an integer, `true`/`false`, or a quoted string.
pub fn parse_assignment(text: &str) -> Result<(String, Value), BindError> {
    let malformed = || BindError::Malformed(text.to_string());
    let (name, value) = text.split_once('=').ok_or_else(malformed)?;
    let name = name.trim();
    let valid_name = name
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if !valid_name {
        return Err(malformed());
    }
    let value = Value::parse_literal(value).ok_or_else(malformed)?;
    Ok((name.to_string(), value))
}
