//! Type abbreviations, the type substitution and the two helper lambdas.

use lsq_core::Type;
use lsq_target::build::*;
use lsq_target::{TargetTerm, TargetType};

use crate::CpsError;

/// `t => Out[y, r]`: a continuation expecting `t`.
pub fn kappa(t: TargetType, y: TargetType, r: TargetType) -> TargetType {
    TargetType::fun(t, TargetType::out(y, r))
}

/// `Ref[Unit => Out[y, r]]`: the state of a coroutine instance.
pub fn rho(y: TargetType, r: TargetType) -> TargetType {
    TargetType::reference(kappa(TargetType::Unit, y, r))
}

/// `(Unit => Out[y, r]) => Unit`: a store function.
pub fn sigma_t(y: TargetType, r: TargetType) -> TargetType {
    TargetType::fun(kappa(TargetType::Unit, y, r), TargetType::Unit)
}

/// `sigma[y, r] => t1 => Out[y, r]`: a translated coroutine.
pub fn gamma_t(t1: TargetType, y: TargetType, r: TargetType) -> TargetType {
    TargetType::fun(sigma_t(y.clone(), r.clone()), kappa(t1, y, r))
}

/// `Out[y, r] => Out[y, q]`: an output transformer.
pub fn phi_t(y: TargetType, r: TargetType, q: TargetType) -> TargetType {
    TargetType::fun(TargetType::out(y.clone(), r), TargetType::out(y, q))
}

/// The type substitution. `Bot` becomes the uninhabited `Never`.
pub fn translate_type(t: &Type) -> Result<TargetType, CpsError> {
    Ok(match t {
        Type::Unit => TargetType::Unit,
        Type::Int => TargetType::Int,
        Type::Bot => TargetType::Never,
        Type::Top => return Err(CpsError::TopType),
        Type::Fun(a, r) => TargetType::fun(translate_type(a)?, translate_type(r)?),
        Type::Coroutine(a, y, r) => gamma_t(translate_type(a)?, translate_type(y)?, translate_type(r)?),
        Type::Instance(y, r) => rho(translate_type(y)?, translate_type(r)?),
    })
}

/// The output transformer: forwards `Yield` and `Term`, and passes the payload
/// of `Ret` to `k`, which must have type `kappa[r, y, q]`.
pub fn build_output_transformer(y: &TargetType, r: &TargetType, q: &TargetType, k: TargetTerm) -> TargetTerm {
    lam(
        "%o",
        TargetType::out(y.clone(), r.clone()),
        matches(
            var("%o"),
            ("%x", app(k, var("%x"))),
            ("%x", yield_tag(y, q, var("%x"))),
            term_tag(y, q),
        ),
    )
}

/// The store function constructor: `(x: rho[y, r]) => (k) => x := k`.
pub fn build_store_constructor(y: &TargetType, r: &TargetType) -> TargetTerm {
    lam(
        "%x",
        rho(y.clone(), r.clone()),
        lam(
            "%k",
            kappa(TargetType::Unit, y.clone(), r.clone()),
            assign(var("%x"), var("%k")),
        ),
    )
}
