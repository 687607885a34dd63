//! Step-by-step safety checks for the calculus.
//!
//! A program is run one transition at a time. The instance typing grows with
//! every `start` and `snapshot`, and after each step the new configuration
//! must be well typed: the term keeps its type (a subtype in subtyping mode)
//! and still yields nothing at top level, and the instance store agrees with
//! the instance typing.

use lsq_core::eval::{step_mut, Halt, StoreEffect};
use lsq_core::typeck::{infer, store_well_typed, subtype};
use lsq_core::{check_user_program, Configuration, InstanceTyping, Mode, Term, Type, TypingContext};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SafetyEnd {
    Value(Term),
    OutOfFuel,
    Stuck(String),
    SuspendedAtTop,
}

#[derive(Debug, Clone)]
pub struct SafetyReport {
    pub end: SafetyEnd,
    pub steps: usize,
    /// Descriptions of failed preservation or store checks, with the step.
    pub violations: Vec<String>,
}

impl SafetyReport {
    pub fn is_safe(&self) -> bool {
        self.violations.is_empty() && matches!(self.end, SafetyEnd::Value(_) | SafetyEnd::OutOfFuel)
    }
}

fn extend(sigma: &mut InstanceTyping, effect: &StoreEffect, mode: Mode) -> Result<(), String> {
    match effect {
        StoreEffect::Started { label, coroutine } => {
            let j = infer(sigma, &TypingContext::new(), coroutine, mode).map_err(|e| e.to_string())?;
            let Type::Coroutine(_, y, r) = j.ty else {
                return Err(format!("started a non-coroutine of type {}", j.ty));
            };
            sigma.insert(*label, Type::Instance(y, r));
        }
        StoreEffect::Copied { from, to } => {
            let t = sigma
                .get(from)
                .cloned()
                .ok_or_else(|| format!("snapshot of unknown #inst{from}"))?;
            sigma.insert(*to, t);
        }
    }
    Ok(())
}

/// Runs a closed user program for at most `fuel` steps, checking preservation
/// and store typing after every step.
pub fn check_safety(program: &Term, mode: Mode, fuel: usize) -> Result<SafetyReport, lsq_core::TypeError> {
    let ty = check_user_program(program, mode)?;
    let mut config = Configuration::new(program.clone());
    let mut sigma = InstanceTyping::new();
    let mut violations = Vec::new();
    for steps in 0..fuel {
        let effect = match step_mut(&mut config) {
            Ok((_, effect)) => effect,
            Err(Halt::Finished(v)) => {
                return Ok(SafetyReport {
                    end: SafetyEnd::Value(v),
                    steps,
                    violations,
                })
            }
            Err(Halt::SuspendedAtTop { .. }) => {
                return Ok(SafetyReport {
                    end: SafetyEnd::SuspendedAtTop,
                    steps,
                    violations,
                })
            }
            Err(Halt::Stuck(why)) => {
                return Ok(SafetyReport {
                    end: SafetyEnd::Stuck(why),
                    steps,
                    violations,
                })
            }
        };
        if let Some(e) = &effect {
            if let Err(why) = extend(&mut sigma, e, mode) {
                violations.push(format!("step {}: {why}", steps + 1));
            }
        }
        match infer(&sigma, &TypingContext::new(), &config.term, mode) {
            Ok(j) => {
                let kept = match mode {
                    Mode::Base => j.ty == ty,
                    Mode::Subtyping => subtype(&j.ty, &ty),
                };
                if !kept {
                    violations.push(format!("step {}: type {} became {}", steps + 1, ty, j.ty));
                }
                if !j.yields.is_bot() {
                    violations.push(format!("step {}: term may yield {} at top level", steps + 1, j.yields));
                }
            }
            Err(e) => violations.push(format!("step {}: {e}", steps + 1)),
        }
        if !store_well_typed(&sigma, &config.store.bindings, mode) {
            violations.push(format!("step {}: store does not match the instance typing", steps + 1));
        }
        if !violations.is_empty() {
            return Ok(SafetyReport {
                end: SafetyEnd::Stuck("ill-typed configuration".into()),
                steps: steps + 1,
                violations,
            });
        }
    }
    let end = if config.term.is_value() {
        SafetyEnd::Value(config.term)
    } else {
        SafetyEnd::OutOfFuel
    };
    Ok(SafetyReport {
        end,
        steps: fuel,
        violations,
    })
}
