//! Splitting a coroutine body into entry-point segments.
//!
//! A segment starts at the method entry or right after a yield or call site
//! and runs until it reaches a yield, call, uncaught throw or return. When the
//! resume point sits inside a loop, branch or try body, the remainder of that
//! block is emitted as a repaired block (`Bs`..`Be`). A loop is then restarted
//! from its condition, and a try body gets a replica of the user handler.
//! Segments are discovered with a worklist, and their program counters follow
//! discovery order.

use crate::resolve::{Owner, Resolved, SId, SKind};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntryKind {
    MethodEntry,
    AfterYield,
    AfterCall,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExitKind {
    Yield {
        sid: SId,
        resume: usize,
    },
    Call {
        sid: SId,
        resume: usize,
    },
    /// Uncaught within the entry point: pops the frame.
    Throw(SId),
    Return,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ep {
    Stmt(SId),
    While {
        sid: SId,
        body: Vec<Ep>,
    },
    If {
        sid: SId,
        then: Vec<Ep>,
        els: Vec<Ep>,
    },
    /// `replica` holds the anchor of a repaired try body, as for `Block`.
    Try {
        sid: SId,
        body: Vec<Ep>,
        replica: Option<SId>,
    },
    /// Remainder of a block of statement `sid` after the resume point.
    /// `anchor` is the statement of that block the resume point lies in; its
    /// scope is the scope of the whole repaired block.
    Block {
        sid: SId,
        anchor: SId,
        body: Vec<Ep>,
    },
    /// A throw caught by an enclosing try of the same entry point.
    Throw(SId),
    /// Start of an after-call segment: rethrow a pending exception, or bind
    /// the callee's result.
    Pending(SId),
    /// A yield or call that does not end the path. Only used when building
    /// the CFG of a whole coroutine.
    Suspend(SId),
    Exit(usize),
}

#[derive(Debug, Clone)]
pub struct Segment {
    pub pc: usize,
    pub kind: EntryKind,
    /// The yield or call statement this segment resumes after.
    pub resume_from: Option<SId>,
    pub body: Vec<Ep>,
    pub exits: Vec<ExitKind>,
}

impl Segment {
    /// Program counters of the segments this one can hand control to.
    pub fn successors(&self) -> Vec<usize> {
        self.exits
            .iter()
            .filter_map(|e| match e {
                ExitKind::Yield { resume, .. } | ExitKind::Call { resume, .. } => Some(*resume),
                _ => None,
            })
            .collect()
    }
}

struct Splitter<'r> {
    res: &'r Resolved,
    pending: Vec<(EntryKind, Option<SId>)>,
    pc_of: HashMap<SId, usize>,
    whole: bool,
}

struct Emit {
    eps: Vec<Ep>,
    /// True when every path through the emitted code leaves the entry point.
    exits: bool,
}

impl Splitter<'_> {
    fn resume_pc(&mut self, sid: SId, kind: EntryKind) -> usize {
        if let Some(&pc) = self.pc_of.get(&sid) {
            return pc;
        }
        let pc = self.pending.len();
        self.pending.push((kind, Some(sid)));
        self.pc_of.insert(sid, pc);
        pc
    }

    fn exit(&self, exits: &mut Vec<ExitKind>, kind: ExitKind) -> Ep {
        exits.push(kind);
        Ep::Exit(exits.len() - 1)
    }

    fn block(&mut self, sids: &[SId], try_depth: usize, exits: &mut Vec<ExitKind>) -> Emit {
        let mut eps = Vec::new();
        for &sid in sids {
            match &self.res.stmts[sid].kind {
                SKind::Decl(..) | SKind::Assign(..) => eps.push(Ep::Stmt(sid)),
                SKind::Yield { .. } | SKind::Call { .. } if self.whole => eps.push(Ep::Suspend(sid)),
                SKind::Yield { .. } => {
                    let resume = self.resume_pc(sid, EntryKind::AfterYield);
                    eps.push(self.exit(exits, ExitKind::Yield { sid, resume }));
                    return Emit { eps, exits: true };
                }
                SKind::Call { .. } => {
                    let resume = self.resume_pc(sid, EntryKind::AfterCall);
                    eps.push(self.exit(exits, ExitKind::Call { sid, resume }));
                    return Emit { eps, exits: true };
                }
                SKind::Throw(_) if try_depth > 0 => {
                    eps.push(Ep::Throw(sid));
                    return Emit { eps, exits: false };
                }
                SKind::Throw(_) => {
                    eps.push(self.exit(exits, ExitKind::Throw(sid)));
                    return Emit { eps, exits: true };
                }
                SKind::While(_, body) => {
                    let body = self.block(body, try_depth, exits).eps;
                    eps.push(Ep::While { sid, body });
                }
                SKind::If(_, t, f) => {
                    let t = self.block(t, try_depth, exits);
                    let f = self.block(f, try_depth, exits);
                    eps.push(Ep::If {
                        sid,
                        then: t.eps,
                        els: f.eps,
                    });
                    if t.exits && f.exits {
                        return Emit { eps, exits: true };
                    }
                }
                SKind::Try { body, .. } => {
                    let body = self.block(body, try_depth + 1, exits).eps;
                    eps.push(Ep::Try {
                        sid,
                        body,
                        replica: None,
                    });
                }
            }
        }
        Emit { eps, exits: false }
    }

    fn method_body(&mut self, exits: &mut Vec<ExitKind>) -> Vec<Ep> {
        let res = self.res;
        let mut e = self.block(&res.body, 0, exits);
        if !e.exits {
            let ret = self.exit(exits, ExitKind::Return);
            e.eps.push(ret);
        }
        e.eps
    }

    fn continuation(&mut self, kind: EntryKind, from: SId, exits: &mut Vec<ExitKind>) -> Vec<Ep> {
        let res = self.res;
        let RStmtLoc { mut owner, index } = loc(res, from);
        let mut anchor = from;
        let mut eps = Vec::new();
        if kind == EntryKind::AfterCall {
            eps.push(Ep::Pending(from));
        }
        let rest = self.block(&res.block(owner)[index + 1..], res.try_depth(owner), exits);
        eps.extend(rest.eps);
        let mut done = rest.exits;
        while let Some(parent) = parent_of(owner) {
            let mut wrapped = match owner {
                Owner::Body(_) => {
                    let mut w = vec![Ep::Block {
                        sid: parent,
                        anchor,
                        body: eps,
                    }];
                    if !done {
                        let again = self.block(&[parent], res.try_depth(res.stmts[parent].owner), exits);
                        w.extend(again.eps);
                    }
                    w
                }
                Owner::Then(_) | Owner::Else(_) => vec![Ep::Block {
                    sid: parent,
                    anchor,
                    body: eps,
                }],
                Owner::TryBody(_) => {
                    done = false;
                    vec![Ep::Try {
                        sid: parent,
                        body: eps,
                        replica: Some(anchor),
                    }]
                }
                Owner::Handler(_) | Owner::Top => unreachable!("handlers contain no suspension points"),
            };
            let ploc = loc(res, parent);
            if !done {
                let rest = self.block(
                    &res.block(ploc.owner)[ploc.index + 1..],
                    res.try_depth(ploc.owner),
                    exits,
                );
                wrapped.extend(rest.eps);
                done = rest.exits;
            }
            eps = wrapped;
            owner = ploc.owner;
            anchor = parent;
        }
        if !done {
            let ret = self.exit(exits, ExitKind::Return);
            eps.push(ret);
        }
        eps
    }
}

struct RStmtLoc {
    owner: Owner,
    index: usize,
}

fn loc(res: &Resolved, sid: SId) -> RStmtLoc {
    RStmtLoc {
        owner: res.stmts[sid].owner,
        index: res.stmts[sid].index,
    }
}

fn parent_of(owner: Owner) -> Option<SId> {
    match owner {
        Owner::Top => None,
        Owner::Body(s) | Owner::Then(s) | Owner::Else(s) | Owner::TryBody(s) | Owner::Handler(s) => Some(s),
    }
}

/// Splits a resolved coroutine into segments, method entry first.
pub fn split_segments(res: &Resolved) -> Vec<Segment> {
    let mut sp = Splitter {
        res,
        pending: vec![(EntryKind::MethodEntry, None)],
        pc_of: HashMap::new(),
        whole: false,
    };
    let mut segments = Vec::new();
    let mut pc = 0;
    while pc < sp.pending.len() {
        let (kind, from) = sp.pending[pc];
        let mut exits = Vec::new();
        let body = match from {
            None => sp.method_body(&mut exits),
            Some(sid) => sp.continuation(kind, sid, &mut exits),
        };
        segments.push(Segment {
            pc,
            kind,
            resume_from: from,
            body,
            exits,
        });
        pc += 1;
    }
    segments
}

/// The whole body as one tree, with yields and calls falling through.
pub fn whole_body(res: &Resolved) -> (Vec<Ep>, Vec<ExitKind>) {
    let mut sp = Splitter {
        res,
        pending: Vec::new(),
        pc_of: HashMap::new(),
        whole: true,
    };
    let mut exits = Vec::new();
    let body = sp.method_body(&mut exits);
    (body, exits)
}
