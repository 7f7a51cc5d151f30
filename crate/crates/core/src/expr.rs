//! Closed-form scalar fields `f(x, y)` read from scenario files.

use std::fmt;
use std::sync::Arc;

use exmex::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("cannot parse expression `{source_text}`: {message}")]
    Parse { source_text: String, message: String },
    #[error("expression `{source_text}` uses unknown variable `{name}` (only x and y are allowed)")]
    UnknownVariable { source_text: String, name: String },
}

/// A parsed expression in the variables `x` and `y`.
#[derive(Clone)]
pub struct Expr2 {
    source: String,
    compiled: Arc<FlatEx<f64>>,
    // position of x and y in the compiled variable list
    slots: Vec<Slot>,
}

#[derive(Clone, Copy, Debug)]
enum Slot {
    X,
    Y,
}

impl Expr2 {
    pub fn parse(source: &str) -> Result<Self, ExprError> {
        let compiled = exmex::parse::<f64>(source).map_err(|e| ExprError::Parse {
            source_text: source.to_string(),
            message: e.to_string(),
        })?;
        let slots = compiled
            .var_names()
            .iter()
            .map(|v| match v.as_str() {
                "x" => Ok(Slot::X),
                "y" => Ok(Slot::Y),
                other => Err(ExprError::UnknownVariable {
                    source_text: source.to_string(),
                    name: other.to_string(),
                }),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            source: source.to_string(),
            compiled: Arc::new(compiled),
            slots,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let mut args = [0.0; 2];
        for (arg, slot) in args.iter_mut().zip(&self.slots) {
            *arg = match slot {
                Slot::X => x,
                Slot::Y => y,
            };
        }
        self.compiled
            .eval(&args[..self.slots.len()])
            .unwrap_or(f64::NAN)
    }
}

impl fmt::Debug for Expr2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr2({:?})", self.source)
    }
}

impl PartialEq for Expr2 {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
    }
}

impl Serialize for Expr2 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.source)
    }
}

impl<'de> Deserialize<'de> for Expr2 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Expr2::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_in_either_variable_order() {
        let e = Expr2::parse("y - 2*x").unwrap();
        assert_eq!(e.eval(1.0, 5.0), 3.0);
        let c = Expr2::parse("3").unwrap();
        assert_eq!(c.eval(9.0, 9.0), 3.0);
        let s = Expr2::parse("signum(y - 0.5)").unwrap();
        assert_eq!(s.eval(0.0, 0.9), 1.0);
        assert_eq!(s.eval(0.0, 0.1), -1.0);
    }

    #[test]
    fn rejects_foreign_variables() {
        assert!(matches!(Expr2::parse("x + z"), Err(ExprError::UnknownVariable { .. })));
        assert!(matches!(Expr2::parse("x +* 2"), Err(ExprError::Parse { .. })));
    }
}
