use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MiniError {
    #[error("unknown coroutine '{0}'")]
    UnknownCoroutine(String),
    #[error("coroutine '{name}' expects {expected} argument(s), got {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("unbound variable '{0}'")]
    Unbound(String),
    #[error("dynamic type error: {0}")]
    Dynamic(String),
    #[error("out of fuel")]
    OutOfFuel,
    #[error("resume called on a terminated instance")]
    ResumeOnDead,
    #[error("instance field '{0}' is not set")]
    FieldUnset(&'static str),
    #[error("program is not in restricted form: {0}")]
    NotRestricted(String),
}
