//! Translation of the coroutine calculus into the target calculus.
//!
//! Coroutine bodies are translated in continuation-passing style with an
//! extra store-function parameter; everything outside coroutine bodies is
//! translated structurally, leaving coroutine-free code unchanged.

pub mod abbrev;
mod transform;

use lsq_core::{check_user_program, Mode, Term, Type, TypeError, TypingContext};
use lsq_target::TargetTerm;
use thiserror::Error;

pub use abbrev::{
    build_output_transformer, build_store_constructor, gamma_t, kappa, phi_t, rho, sigma_t, translate_type,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CpsError {
    #[error("source type error: {0}")]
    Type(#[from] TypeError),
    #[error("type Top has no counterpart in the target language")]
    TopType,
    #[error("the CPS rules need a non-Bot yield type; use transform_free")]
    UnsupportedAtBottom,
    #[error("term yields {0} outside of a coroutine")]
    FreeYield(Type),
    #[error("unsupported fix: {0}")]
    UnsupportedFix(String),
    #[error("runtime-only forms cannot be translated")]
    RuntimeForm,
}

/// Position of a term inside a coroutine body with yield type `yields` and
/// return type `ret`.
#[derive(Debug, Clone)]
pub struct TransformEnv {
    pub gamma: TypingContext,
    pub yields: Type,
    pub ret: Type,
}

/// Translates a possibly yielding term into a function of a store function
/// and a continuation.
pub fn transform(env: &TransformEnv, t: &Term) -> Result<TargetTerm, CpsError> {
    if env.yields.is_bot() {
        return Err(CpsError::UnsupportedAtBottom);
    }
    if t.contains_runtime_form() {
        return Err(CpsError::RuntimeForm);
    }
    let mut tx = transform::Tx::default();
    let xi = tx.xi_public(&env.gamma, &env.yields, &env.ret, t)?;
    Ok(tx.wrap_cells(xi))
}

/// Translates a term that does not yield.
pub fn transform_free(gamma: &TypingContext, t: &Term) -> Result<TargetTerm, CpsError> {
    if t.contains_runtime_form() {
        return Err(CpsError::RuntimeForm);
    }
    let j = lsq_core::infer(&Default::default(), gamma, t, Mode::Base)?;
    if !j.yields.is_bot() {
        return Err(CpsError::FreeYield(j.yields));
    }
    let mut tx = transform::Tx::default();
    let out = tx.free(gamma, t)?;
    Ok(tx.wrap_cells(out))
}

/// Typechecks a closed user program in base mode and translates it.
pub fn transform_program(t: &Term) -> Result<TargetTerm, CpsError> {
    check_user_program(t, Mode::Base)?;
    transform_free(&TypingContext::new(), t)
}
