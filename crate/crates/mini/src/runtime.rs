//! Trampolined coroutine instances with explicit growable stacks.
//!
//! An instance keeps three stacks. The coroutine stack says which coroutine
//! each frame runs. The program-counter stack holds each frame's resume pc
//! and the base of its slots. The value stack holds the slots themselves.
//! `resume` enters the top frame's entry point in a loop while the call flag
//! is set, so calls and returns never grow the host stack.

use crate::ast::Value;
use crate::codegen::{CompiledCoroutine, CompiledProgram, EntryPoint};
use crate::error::MiniError;
use crate::interp::{Completion, RunOutcome};
use crate::ops;
use crate::resolve::{Atom, Rhs, SId, SKind};
use crate::split::{EntryKind, Ep, ExitKind};
use std::sync::Arc;

pub const INITIAL_CAPACITY: usize = 4;

/// A stack whose capacity starts at [`INITIAL_CAPACITY`] and doubles,
/// counting the elements copied by each reallocation.
#[derive(Debug, Clone)]
pub struct GrowStack<T> {
    items: Vec<T>,
    capacity: usize,
    copy_work: usize,
    history: Vec<usize>,
}

impl<T> Default for GrowStack<T> {
    fn default() -> Self {
        GrowStack {
            items: Vec::with_capacity(INITIAL_CAPACITY),
            capacity: INITIAL_CAPACITY,
            copy_work: 0,
            history: vec![INITIAL_CAPACITY],
        }
    }
}

impl<T> GrowStack<T> {
    pub fn push(&mut self, x: T) {
        if self.items.len() == self.capacity {
            self.capacity *= 2;
            let mut bigger = Vec::with_capacity(self.capacity);
            self.copy_work += self.items.len();
            bigger.append(&mut self.items);
            self.items = bigger;
            self.history.push(self.capacity);
        }
        self.items.push(x);
    }

    pub fn pop(&mut self) -> Option<T> {
        self.items.pop()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn truncate(&mut self, len: usize) {
        self.items.truncate(len);
    }

    pub fn last(&self) -> Option<&T> {
        self.items.last()
    }

    pub fn last_mut(&mut self) -> Option<&mut T> {
        self.items.last_mut()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn copy_work(&self) -> usize {
        self.copy_work
    }

    /// Every capacity the stack has had, in order.
    pub fn history(&self) -> &[usize] {
        &self.history
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameState {
    pub pc: u32,
    pub base: u32,
}

#[derive(Debug, Clone)]
pub struct Instance {
    program: Arc<CompiledProgram>,
    live: bool,
    call: bool,
    value: Option<Value>,
    result: Option<Value>,
    exception: Option<Value>,
    /// Result handed from a returning callee to its caller.
    retval: Option<Value>,
    pub cstack: GrowStack<u32>,
    pub pstack: GrowStack<FrameState>,
    pub vstack: GrowStack<Value>,
    max_host_depth: usize,
    fuel: Option<u64>,
}

enum Flow {
    Throw(Value),
    Exit,
    Fail(MiniError),
}

impl From<MiniError> for Flow {
    fn from(e: MiniError) -> Self {
        Flow::Fail(e)
    }
}

pub fn start_instance(program: &Arc<CompiledProgram>, name: &str, args: Vec<Value>) -> Result<Instance, MiniError> {
    let co = program
        .find(name)
        .ok_or_else(|| MiniError::UnknownCoroutine(name.to_string()))?;
    let mut inst = Instance {
        program: Arc::clone(program),
        live: true,
        call: false,
        value: None,
        result: None,
        exception: None,
        retval: None,
        cstack: GrowStack::default(),
        pstack: GrowStack::default(),
        vstack: GrowStack::default(),
        max_host_depth: 0,
        fuel: None,
    };
    inst.push_frame(co, args)?;
    Ok(inst)
}

/// Runs until the next yield or termination. Returns `Ok(true)` iff the
/// instance yielded.
pub fn resume_instance(inst: &mut Instance) -> Result<bool, MiniError> {
    inst.resume()
}

pub fn snapshot_instance(inst: &Instance) -> Instance {
    inst.clone()
}

pub fn read_value(inst: &Instance) -> Result<Value, MiniError> {
    inst.value.clone().ok_or(MiniError::FieldUnset("value"))
}

pub fn read_result(inst: &Instance) -> Result<Value, MiniError> {
    inst.result.clone().ok_or(MiniError::FieldUnset("result"))
}

pub fn read_exception(inst: &Instance) -> Result<Value, MiniError> {
    inst.exception.clone().ok_or(MiniError::FieldUnset("exception"))
}

impl Instance {
    pub fn is_live(&self) -> bool {
        self.live
    }

    pub fn program(&self) -> &Arc<CompiledProgram> {
        &self.program
    }

    /// Deepest nesting of structured statements reached while running entry
    /// points. Independent of coroutine call depth.
    pub fn max_host_depth(&self) -> usize {
        self.max_host_depth
    }

    /// Limits the statements executed by later resumes; `None` removes the limit.
    pub fn set_fuel(&mut self, fuel: Option<u64>) {
        self.fuel = fuel;
    }

    pub fn resume(&mut self) -> Result<bool, MiniError> {
        if !self.live {
            return Err(MiniError::ResumeOnDead);
        }
        self.value = None;
        loop {
            self.enter()?;
            if !self.call {
                break;
            }
        }
        Ok(self.live)
    }

    fn push_frame(&mut self, co: usize, args: Vec<Value>) -> Result<(), MiniError> {
        let slots = self.program.coroutines[co].slot_count();
        let c = &self.program.coroutines[co];
        if args.len() != c.resolved.arity {
            return Err(MiniError::Arity {
                name: c.resolved.name.clone(),
                expected: c.resolved.arity,
                found: args.len(),
            });
        }
        let base = self.vstack.len();
        let n_args = args.len();
        for a in args {
            self.vstack.push(a);
        }
        for _ in n_args..slots {
            self.vstack.push(Value::Unit);
        }
        self.cstack.push(co as u32);
        self.pstack.push(FrameState {
            pc: 0,
            base: base as u32,
        });
        Ok(())
    }

    /// Pops the top frame; reports whether a caller frame remains.
    fn pop_frame(&mut self) -> bool {
        self.cstack.pop();
        let frame = self.pstack.pop().expect("frame");
        self.vstack.truncate(frame.base as usize);
        !self.cstack.is_empty()
    }

    fn finish_return(&mut self, v: Value) {
        if self.pop_frame() {
            self.retval = Some(v);
            self.call = true;
        } else {
            self.result = Some(v);
            self.live = false;
            self.call = false;
        }
    }

    fn finish_throw(&mut self, v: Value) {
        self.exception = Some(v);
        if self.pop_frame() {
            self.call = true;
        } else {
            self.live = false;
            self.call = false;
        }
    }

    fn enter(&mut self) -> Result<(), MiniError> {
        let co = *self.cstack.last().expect("frame") as usize;
        let frame = *self.pstack.last().expect("frame");
        let program = Arc::clone(&self.program);
        let cc = &program.coroutines[co];
        let ep = &cc.entries[frame.pc as usize];
        let base = frame.base as usize;
        let mut locals = vec![Value::Unit; cc.slot_count()];
        for &v in &ep.loads {
            locals[v] = self.vstack.items[base + v].clone();
        }
        let mut ex = Exec {
            inst: self,
            cc,
            ep,
            locals,
            base,
        };
        match ex.block(&ep.body, 1) {
            Err(Flow::Exit) => Ok(()),
            Err(Flow::Throw(v)) if ep.unwind_handler => {
                self.finish_throw(v);
                Ok(())
            }
            Err(Flow::Throw(v)) => Err(MiniError::Dynamic(format!(
                "exception {v} escaped entry point {}",
                ep.pc
            ))),
            Err(Flow::Fail(e)) => Err(e),
            Ok(()) => Err(MiniError::Dynamic(format!("entry point {} fell off its end", ep.pc))),
        }
    }
}

struct Exec<'a> {
    inst: &'a mut Instance,
    cc: &'a CompiledCoroutine,
    ep: &'a EntryPoint,
    locals: Vec<Value>,
    base: usize,
}

impl<'a> Exec<'a> {
    fn tick(&mut self) -> Result<(), MiniError> {
        match &mut self.inst.fuel {
            Some(0) => Err(MiniError::OutOfFuel),
            Some(f) => {
                *f -= 1;
                Ok(())
            }
            None => Ok(()),
        }
    }

    fn atom(&self, a: &Atom) -> Value {
        match a {
            Atom::Const(v) => v.clone(),
            Atom::Var(x) => self.locals[*x].clone(),
        }
    }

    fn kind(&self, sid: SId) -> &'a SKind {
        &self.cc.resolved.stmts[sid].kind
    }

    fn stmt(&mut self, sid: SId) -> Result<(), MiniError> {
        self.tick()?;
        let cc = self.cc;
        match &cc.resolved.stmts[sid].kind {
            SKind::Decl(v, None) => self.locals[*v] = Value::Unit,
            SKind::Decl(v, Some(rhs)) => {
                self.locals[*v] = match rhs {
                    Rhs::Atom(a) => self.atom(a),
                    Rhs::Bin(op, a, b) => ops::binary(*op, &self.atom(a), &self.atom(b))?,
                    Rhs::Sel(f, a) => ops::select(*f, &self.atom(a))?,
                    Rhs::List(xs) => Value::list(xs.iter().map(|a| self.atom(a)).collect::<Vec<_>>()),
                }
            }
            SKind::Assign(v, a) => self.locals[*v] = self.atom(a),
            other => unreachable!("not a simple statement: {other:?}"),
        }
        Ok(())
    }

    fn cond(&self, sid: SId) -> Result<bool, MiniError> {
        match self.kind(sid) {
            SKind::While(c, _) | SKind::If(c, _, _) => ops::truthy(&self.atom(c)),
            _ => unreachable!(),
        }
    }

    fn block(&mut self, eps: &[Ep], depth: usize) -> Result<(), Flow> {
        if depth > self.inst.max_host_depth {
            self.inst.max_host_depth = depth;
        }
        for ep in eps {
            match ep {
                Ep::Stmt(s) => self.stmt(*s)?,
                Ep::While { sid, body } => loop {
                    self.tick()?;
                    if !self.cond(*sid)? {
                        break;
                    }
                    self.block(body, depth + 1)?;
                },
                Ep::If { sid, then, els } => {
                    let branch = if self.cond(*sid)? { then } else { els };
                    self.block(branch, depth + 1)?;
                }
                Ep::Block { body, .. } => self.block(body, depth + 1)?,
                Ep::Try { sid, body, .. } => match self.block(body, depth + 1) {
                    Err(Flow::Throw(v)) => {
                        let cc = self.cc;
                        let SKind::Try { catch, handler, .. } = &cc.resolved.stmts[*sid].kind else {
                            unreachable!()
                        };
                        self.locals[*catch] = v;
                        for &h in handler {
                            self.stmt(h)?;
                        }
                    }
                    other => other?,
                },
                Ep::Throw(s) => {
                    let SKind::Throw(a) = self.kind(*s) else { unreachable!() };
                    return Err(Flow::Throw(ops::exception_payload(self.atom(a))?));
                }
                Ep::Pending(s) => {
                    if let Some(e) = self.inst.exception.take() {
                        return Err(Flow::Throw(e));
                    }
                    let SKind::Call { var, .. } = self.kind(*s) else {
                        unreachable!()
                    };
                    let var = *var;
                    self.locals[var] = self.inst.retval.take().ok_or(MiniError::FieldUnset("result"))?;
                }
                Ep::Suspend(_) => unreachable!("suspensions only occur in whole-coroutine trees"),
                Ep::Exit(id) => {
                    self.exit(*id)?;
                    return Err(Flow::Exit);
                }
            }
        }
        Ok(())
    }

    fn store(&mut self, vars: &[usize]) {
        for &v in vars {
            self.inst.vstack.items[self.base + v] = self.locals[v].clone();
        }
    }

    fn exit(&mut self, id: usize) -> Result<(), MiniError> {
        let ep = self.ep;
        let exit = &ep.exits[id];
        match &exit.kind {
            ExitKind::Yield { sid, resume } => {
                let SKind::Yield { value, .. } = self.kind(*sid) else {
                    unreachable!()
                };
                let v = self.atom(value);
                self.store(&exit.stores);
                self.inst.value = Some(v);
                self.inst.pstack.last_mut().expect("frame").pc = *resume as u32;
                self.inst.call = false;
            }
            ExitKind::Call { sid, resume } => {
                let SKind::Call { callee, args, .. } = self.kind(*sid) else {
                    unreachable!()
                };
                let args: Vec<Value> = args.iter().map(|a| self.atom(a)).collect();
                let callee = *callee;
                self.store(&exit.stores);
                self.inst.pstack.last_mut().expect("frame").pc = *resume as u32;
                self.inst.push_frame(callee, args)?;
                self.inst.call = true;
            }
            ExitKind::Throw(sid) => {
                let SKind::Throw(a) = self.kind(*sid) else {
                    unreachable!()
                };
                let v = ops::exception_payload(self.atom(a))?;
                self.inst.finish_throw(v);
            }
            ExitKind::Return => {
                let v = self.atom(&self.cc.resolved.result);
                self.inst.finish_return(v);
            }
        }
        Ok(())
    }
}

/// Runs a compiled coroutine to completion, recording every yielded value.
/// `fuel` bounds the statements executed across all resumes.
pub fn run_compiled(
    program: &Arc<CompiledProgram>,
    name: &str,
    args: Vec<Value>,
    fuel: u64,
) -> Result<RunOutcome, MiniError> {
    let mut inst = start_instance(program, name, args)?;
    inst.set_fuel(Some(fuel));
    let mut yields = Vec::new();
    while inst.resume()? {
        yields.push(read_value(&inst)?);
    }
    Ok(RunOutcome {
        yields,
        end: completion(&inst)?,
    })
}

/// How a terminated instance ended.
pub fn completion(inst: &Instance) -> Result<Completion, MiniError> {
    match (&inst.result, &inst.exception) {
        (Some(r), _) => Ok(Completion::Result(r.clone())),
        (None, Some(e)) => Ok(Completion::Exception(e.clone())),
        (None, None) => Err(MiniError::FieldUnset("result")),
    }
}

/// Entry kind of the frame on top of the stack, if any.
pub fn current_entry_kind(inst: &Instance) -> Option<EntryKind> {
    let co = *inst.cstack.last()? as usize;
    let pc = inst.pstack.last()?.pc as usize;
    Some(inst.program.coroutines[co].entries[pc].kind)
}
