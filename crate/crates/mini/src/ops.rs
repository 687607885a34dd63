//! Primitive operations shared by the direct interpreter and the runtime.

use crate::ast::{BinOp, Field, Value};
use crate::error::MiniError;

pub fn binary(op: BinOp, a: &Value, b: &Value) -> Result<Value, MiniError> {
    use Value::{Bool, Int};
    Ok(match (op, a, b) {
        (BinOp::Eq, _, _) => Bool(a == b),
        (BinOp::Ne, _, _) => Bool(a != b),
        (BinOp::Add, Int(x), Int(y)) => Int(x.wrapping_add(*y)),
        (BinOp::Sub, Int(x), Int(y)) => Int(x.wrapping_sub(*y)),
        (BinOp::Lt, Int(x), Int(y)) => Bool(x < y),
        (BinOp::And, Bool(x), Bool(y)) => Bool(*x && *y),
        (BinOp::Or, Bool(x), Bool(y)) => Bool(*x || *y),
        _ => return Err(MiniError::Dynamic(format!("{a} {} {b}", op.symbol()))),
    })
}

pub fn select(field: Field, v: &Value) -> Result<Value, MiniError> {
    match (field, v) {
        (Field::IsNil, Value::Nil) => Ok(Value::Bool(true)),
        (Field::IsNil, Value::Cons(_)) => Ok(Value::Bool(false)),
        (Field::Head, Value::Cons(c)) => Ok(c.0.clone()),
        (Field::Tail, Value::Cons(c)) => Ok(c.1.clone()),
        _ => Err(MiniError::Dynamic(format!("{v}.{}", field.name()))),
    }
}

pub fn truthy(v: &Value) -> Result<bool, MiniError> {
    match v {
        Value::Bool(b) => Ok(*b),
        _ => Err(MiniError::Dynamic(format!("condition {v} is not a Bool"))),
    }
}

/// Exceptions carry a single Int payload.
pub fn exception_payload(v: Value) -> Result<Value, MiniError> {
    match v {
        Value::Int(_) => Ok(v),
        _ => Err(MiniError::Dynamic(format!("thrown value {v} is not an Int"))),
    }
}
