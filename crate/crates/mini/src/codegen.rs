//! Entry-point generation.

use crate::analysis::{analyze, LivenessReport};
use crate::ast::{CoroutineDef, MiniProgram};
use crate::cfg::{build_cfg, segment_cfg, Cfg};
use crate::error::MiniError;
use crate::normalize::{is_restricted, normalize};
use crate::resolve::{resolve, Resolved, SId, SKind, VarId};
use crate::split::{split_segments, EntryKind, Ep, ExitKind, Segment};
use std::collections::HashMap;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompileOptions {
    pub optimize: bool,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { optimize: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledExit {
    pub kind: ExitKind,
    pub stores: Vec<VarId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryPoint {
    pub pc: usize,
    pub kind: EntryKind,
    pub resume_from: Option<SId>,
    pub loads: Vec<VarId>,
    pub body: Vec<Ep>,
    pub exits: Vec<CompiledExit>,
    /// After-call entries rethrow a callee's exception; if nothing in the
    /// entry catches it, the frame is popped with the exception set.
    pub unwind_handler: bool,
    /// Whether the body carries a replica of a user try/catch.
    pub user_handler_replica: bool,
}

#[derive(Debug, Clone)]
pub struct CompiledCoroutine {
    pub normalized: CoroutineDef,
    pub resolved: Resolved,
    pub cfg: Cfg,
    pub segments: Vec<Segment>,
    pub segment_cfgs: Vec<Cfg>,
    pub report: LivenessReport,
    pub entries: Vec<EntryPoint>,
}

impl CompiledCoroutine {
    pub fn slot_count(&self) -> usize {
        self.resolved.var_names.len()
    }
}

#[derive(Debug, Clone)]
pub struct CompiledProgram {
    pub coroutines: Vec<CompiledCoroutine>,
    pub options: CompileOptions,
    index: HashMap<String, usize>,
}

impl CompiledProgram {
    pub fn find(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn get(&self, name: &str) -> Option<&CompiledCoroutine> {
        self.find(name).map(|i| &self.coroutines[i])
    }
}

fn has_replica(eps: &[Ep]) -> bool {
    eps.iter().any(|ep| match ep {
        Ep::Try { replica: Some(_), .. } => true,
        Ep::Try { body, .. } | Ep::While { body, .. } | Ep::Block { body, .. } => has_replica(body),
        Ep::If { then, els, .. } => has_replica(then) || has_replica(els),
        _ => false,
    })
}

pub fn generate_entry_points(segments: &[Segment], report: &LivenessReport) -> Vec<EntryPoint> {
    segments
        .iter()
        .map(|seg| EntryPoint {
            pc: seg.pc,
            kind: seg.kind,
            resume_from: seg.resume_from,
            loads: report.loads[seg.pc].iter().copied().collect(),
            body: seg.body.clone(),
            exits: seg
                .exits
                .iter()
                .zip(&report.stores[seg.pc])
                .map(|(kind, stores)| CompiledExit {
                    kind: kind.clone(),
                    stores: stores.iter().copied().collect(),
                })
                .collect(),
            unwind_handler: seg.kind == EntryKind::AfterCall,
            user_handler_replica: has_replica(&seg.body),
        })
        .collect()
}

/// Normalizes, splits, analyzes and generates entry points for every coroutine.
pub fn compile(prog: &MiniProgram, options: CompileOptions) -> Result<CompiledProgram, MiniError> {
    let normalized = normalize(prog);
    if !is_restricted(&normalized) {
        return Err(MiniError::NotRestricted(
            "normalization did not reach restricted form".into(),
        ));
    }
    let mut coroutines = Vec::new();
    for c in &normalized.coroutines {
        let resolved = resolve(&normalized, c)?;
        let cfg = build_cfg(&resolved);
        let segments = split_segments(&resolved);
        let segment_cfgs: Vec<Cfg> = segments.iter().map(|s| segment_cfg(&resolved, s)).collect();
        let report = analyze(&resolved, &segments, &segment_cfgs, options.optimize);
        let entries = generate_entry_points(&segments, &report);
        coroutines.push(CompiledCoroutine {
            normalized: c.clone(),
            resolved,
            cfg,
            segments,
            segment_cfgs,
            report,
            entries,
        });
    }
    let index = coroutines
        .iter()
        .enumerate()
        .map(|(i, c)| (c.resolved.name.clone(), i))
        .collect();
    Ok(CompiledProgram {
        coroutines,
        options,
        index,
    })
}

fn vars(res: &Resolved, vs: impl IntoIterator<Item = VarId>) -> String {
    let names: Vec<String> = vs.into_iter().map(|v| res.var_label(v)).collect();
    format!("{{{}}}", names.join(", "))
}

fn kind_name(k: EntryKind) -> &'static str {
    match k {
        EntryKind::MethodEntry => "MethodEntry",
        EntryKind::AfterYield => "AfterYield",
        EntryKind::AfterCall => "AfterCall",
    }
}

impl CompiledCoroutine {
    pub fn dump_cfg(&self) -> String {
        self.cfg.dump(&self.resolved)
    }

    pub fn dump_segments(&self) -> String {
        let mut out = String::new();
        for (seg, cfg) in self.segments.iter().zip(&self.segment_cfgs) {
            let from = seg.resume_from.map(|s| format!(" after s{s}")).unwrap_or_default();
            let _ = writeln!(out, "segment {} ({}{from})", seg.pc, kind_name(seg.kind));
            out.push_str(&cfg.dump(&self.resolved));
        }
        out
    }

    pub fn dump_entries(&self) -> String {
        let res = &self.resolved;
        let mut out = String::new();
        for ep in &self.entries {
            let from = ep.resume_from.map(|s| format!(" after s{s}")).unwrap_or_default();
            let _ = writeln!(out, "ep{} ({}{from})", ep.pc, kind_name(ep.kind));
            let _ = writeln!(out, "  load {}", vars(res, ep.loads.iter().copied()));
            if ep.unwind_handler {
                out.push_str("  unwind: on uncaught exception set exception, pop frame\n");
            }
            self.dump_body(&mut out, ep, &ep.body, 1);
        }
        out
    }

    fn dump_body(&self, out: &mut String, ep: &EntryPoint, eps: &[Ep], depth: usize) {
        let res = &self.resolved;
        let pad = "  ".repeat(depth);
        let text = |s: SId| res.stmts[s].text.trim_end_matches(';').to_string();
        for e in eps {
            match e {
                Ep::Stmt(s) => {
                    let _ = writeln!(out, "{pad}{}", text(*s));
                }
                Ep::While { sid, body } => {
                    let _ = writeln!(out, "{pad}{} {{", text(*sid));
                    self.dump_body(out, ep, body, depth + 1);
                    let _ = writeln!(out, "{pad}}}");
                }
                Ep::If { sid, then, els } => {
                    let _ = writeln!(out, "{pad}{} {{", text(*sid));
                    self.dump_body(out, ep, then, depth + 1);
                    let _ = writeln!(out, "{pad}}} else {{");
                    self.dump_body(out, ep, els, depth + 1);
                    let _ = writeln!(out, "{pad}}}");
                }
                Ep::Block { body, .. } => {
                    let _ = writeln!(out, "{pad}{{");
                    self.dump_body(out, ep, body, depth + 1);
                    let _ = writeln!(out, "{pad}}}");
                }
                Ep::Try { sid, body, replica } => {
                    let _ = writeln!(out, "{pad}try {{");
                    self.dump_body(out, ep, body, depth + 1);
                    let SKind::Try { catch, handler, .. } = &res.stmts[*sid].kind else {
                        unreachable!()
                    };
                    let tag = if replica.is_some() { " (replica)" } else { "" };
                    let _ = writeln!(out, "{pad}}} catch {}{tag} {{", res.var_label(*catch));
                    for h in handler {
                        let _ = writeln!(out, "{pad}  {}", text(*h));
                    }
                    let _ = writeln!(out, "{pad}}}");
                }
                Ep::Throw(s) => {
                    let _ = writeln!(out, "{pad}{}", text(*s));
                }
                Ep::Pending(s) => {
                    let SKind::Call { var, .. } = res.stmts[*s].kind else {
                        unreachable!()
                    };
                    let _ = writeln!(
                        out,
                        "{pad}if exception pending: rethrow; else {} = callee result",
                        res.var_label(var)
                    );
                }
                Ep::Suspend(s) => {
                    let _ = writeln!(out, "{pad}{}", text(*s));
                }
                Ep::Exit(id) => {
                    let exit = &ep.exits[*id];
                    let stores = vars(res, exit.stores.iter().copied());
                    let line = match &exit.kind {
                        ExitKind::Yield { sid, resume } => {
                            format!("{}: store {stores}; value = yielded; pc = {resume}; return", text(*sid))
                        }
                        ExitKind::Call { sid, resume } => {
                            format!("{}: store {stores}; pc = {resume}; push callee; return", text(*sid))
                        }
                        ExitKind::Throw(sid) => format!("{}: set exception; pop; return", text(*sid)),
                        ExitKind::Return => "result = value; pop; return".to_string(),
                    };
                    let _ = writeln!(out, "{pad}{line}");
                }
            }
        }
    }
}
