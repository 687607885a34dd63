//! Load and store sets for entry points.
//!
//! A segment loads a variable when some read of it is not dominated by a
//! write. An exit stores a variable only if three conditions hold. The
//! variable is still in scope after the exit. Some path in scope leads from a
//! write to the exit. And a later segment needs it: either the segment the
//! exit resumes at loads it, or that segment passes it on unchanged in scope
//! to an exit that needs it.
//!
//! A store counts as a read at its exit. Without that, a variable written on
//! only one path to an exit would be stored from an unloaded local on the
//! other path. Loads, needs and stores are therefore iterated together until
//! they stop changing.

use crate::cfg::{Cfg, NodeKind};
use crate::resolve::{Atom, Resolved, SKind, VarId};
use crate::split::{EntryKind, ExitKind, Segment};
use std::collections::{BTreeSet, HashMap};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LivenessReport {
    /// Variables loaded from the frame by each entry point, indexed by pc.
    pub loads: Vec<BTreeSet<VarId>>,
    /// Variables stored by each exit, indexed by pc and then exit id.
    pub stores: Vec<Vec<BTreeSet<VarId>>>,
}

struct SegInfo<'a> {
    seg: &'a Segment,
    cfg: &'a Cfg,
    reach: Vec<bool>,
    dom: Vec<Vec<bool>>,
    reads: Vec<Vec<VarId>>,
    writes: Vec<Vec<VarId>>,
    scope: Vec<BTreeSet<VarId>>,
    /// Node index of each exit id.
    exit_node: Vec<usize>,
}

fn call_or_yield_var(res: &Resolved, sid: usize) -> VarId {
    match res.stmts[sid].kind {
        SKind::Yield { var, .. } | SKind::Call { var, .. } => var,
        _ => unreachable!("resume point is a yield or call"),
    }
}

fn node_facts(res: &Resolved, seg: &Segment, kind: NodeKind) -> (Vec<VarId>, Vec<VarId>, BTreeSet<VarId>) {
    let scope_of = |s: usize| res.stmts[s].scope.clone();
    // Repaired blocks and try bodies open at the resume point, so their
    // openings share its scope.
    let resume_scope = || match seg.resume_from {
        None => (0..res.arity).collect(),
        Some(s) => scope_of(s),
    };
    match kind {
        NodeKind::Entry => match seg.resume_from {
            Some(s) if seg.kind == EntryKind::AfterYield => (vec![], vec![call_or_yield_var(res, s)], resume_scope()),
            _ => (vec![], vec![], resume_scope()),
        },
        NodeKind::Bs { .. } | NodeKind::Es(_, Some(_)) => (vec![], vec![], resume_scope()),
        NodeKind::Pending(s) => (vec![], vec![call_or_yield_var(res, s)], scope_of(s)),
        NodeKind::Stmt(s) => {
            let w = match res.stmts[s].kind {
                SKind::Decl(v, _) | SKind::Assign(v, _) => vec![v],
                _ => vec![],
            };
            (res.reads(s), w, scope_of(s))
        }
        NodeKind::Yield(s) | NodeKind::Call(s) | NodeKind::Throw(s) | NodeKind::Ws(s) | NodeKind::Is(s) => {
            (res.reads(s), vec![], scope_of(s))
        }
        NodeKind::We(s)
        | NodeKind::Ie(s)
        | NodeKind::Es(s, None)
        | NodeKind::Ee(s, None)
        | NodeKind::Ee(_, Some(s))
        | NodeKind::Be { anchor: s, .. } => (vec![], vec![], scope_of(s)),
        NodeKind::Catch(s) => {
            let SKind::Try { catch, .. } = res.stmts[s].kind else {
                unreachable!()
            };
            let mut sc = scope_of(s);
            sc.insert(catch);
            (vec![], vec![catch], sc)
        }
        NodeKind::Return => {
            let reads = match &res.result {
                Atom::Var(v) => vec![*v],
                Atom::Const(_) => vec![],
            };
            (reads, vec![], res.end_scope.clone())
        }
    }
}

impl<'a> SegInfo<'a> {
    fn new(res: &Resolved, seg: &'a Segment, cfg: &'a Cfg) -> Self {
        let mut reads = Vec::new();
        let mut writes = Vec::new();
        let mut scope = Vec::new();
        for node in &cfg.nodes {
            let (r, w, s) = node_facts(res, seg, node.kind);
            reads.push(r);
            writes.push(w);
            scope.push(s);
        }
        let mut exit_node = vec![usize::MAX; seg.exits.len()];
        for (i, node) in cfg.nodes.iter().enumerate() {
            if let Some(e) = node.exit {
                exit_node[e] = i;
            }
        }
        SegInfo {
            seg,
            cfg,
            reach: cfg.reachable(),
            dom: cfg.dominators(),
            reads,
            writes,
            scope,
            exit_node,
        }
    }

    fn must_load(&self, extra: &[BTreeSet<VarId>]) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        for n in (0..self.cfg.nodes.len()).filter(|&n| self.reach[n]) {
            let extra_reads = self.cfg.nodes[n].exit.map(|e| &extra[e]);
            let reads = self.reads[n].iter().chain(extra_reads.into_iter().flatten());
            for &v in reads {
                let covered =
                    (0..self.cfg.nodes.len()).any(|w| w != n && self.dom[n][w] && self.writes[w].contains(&v));
                if !covered && self.scope[0].contains(&v) {
                    out.insert(v);
                }
            }
        }
        out
    }

    /// Nodes reachable from `starts` along paths on which `v` stays in scope.
    fn scoped_reach(&self, v: VarId, starts: impl Iterator<Item = usize>) -> Vec<bool> {
        let mut seen = vec![false; self.cfg.nodes.len()];
        let mut stack: Vec<usize> = starts.filter(|&s| self.scope[s].contains(&v)).collect();
        while let Some(n) = stack.pop() {
            if std::mem::replace(&mut seen[n], true) {
                continue;
            }
            for &s in &self.cfg.nodes[n].succ {
                if self.scope[s].contains(&v) && !seen[s] {
                    stack.push(s);
                }
            }
        }
        seen
    }

    fn changed_at(&self, v: VarId) -> Vec<bool> {
        let writers = (0..self.cfg.nodes.len()).filter(|&w| self.reach[w] && self.writes[w].contains(&v));
        self.scoped_reach(v, writers)
    }

    fn resume_of(&self, exit: usize) -> Option<usize> {
        match self.seg.exits[exit] {
            ExitKind::Yield { resume, .. } | ExitKind::Call { resume, .. } => Some(resume),
            _ => None,
        }
    }
}

/// Computes load and store sets. With `optimize` off, every variable in scope
/// is loaded at each entry and stored at each exit.
pub fn analyze(res: &Resolved, segments: &[Segment], cfgs: &[Cfg], optimize: bool) -> LivenessReport {
    let infos: Vec<SegInfo> = segments
        .iter()
        .zip(cfgs)
        .map(|(s, c)| SegInfo::new(res, s, c))
        .collect();
    let suspending = |info: &SegInfo, e: usize| info.resume_of(e).is_some();

    if !optimize {
        return LivenessReport {
            loads: infos.iter().map(|i| i.scope[0].clone()).collect(),
            stores: infos
                .iter()
                .map(|i| {
                    (0..i.seg.exits.len())
                        .map(|e| {
                            if suspending(i, e) {
                                i.scope[i.exit_node[e]].clone()
                            } else {
                                BTreeSet::new()
                            }
                        })
                        .collect()
                })
                .collect(),
        };
    }

    let vars: Vec<VarId> = (0..res.var_names.len()).collect();
    // changed[pc][v][node] and entry_live[pc][v][node] do not depend on the fixpoint.
    let changed: Vec<Vec<Vec<bool>>> = infos
        .iter()
        .map(|i| vars.iter().map(|&v| i.changed_at(v)).collect())
        .collect();
    let entry_live: Vec<Vec<Vec<bool>>> = infos
        .iter()
        .map(|i| vars.iter().map(|&v| i.scoped_reach(v, std::iter::once(0))).collect())
        .collect();

    let mut stores: Vec<Vec<BTreeSet<VarId>>> =
        infos.iter().map(|i| vec![BTreeSet::new(); i.seg.exits.len()]).collect();
    loop {
        let loads: Vec<BTreeSet<VarId>> = infos.iter().zip(&stores).map(|(i, st)| i.must_load(st)).collect();

        // needed[(pc, exit, v)], least fixpoint.
        let mut needed: HashMap<(usize, usize, VarId), bool> = HashMap::new();
        let mut grew = true;
        while grew {
            grew = false;
            for (pc, info) in infos.iter().enumerate() {
                for e in 0..info.seg.exits.len() {
                    let Some(next) = info.resume_of(e) else { continue };
                    for &v in &vars {
                        if needed.get(&(pc, e, v)).copied().unwrap_or(false) {
                            continue;
                        }
                        let target = &infos[next];
                        let passes_on = (0..target.seg.exits.len()).any(|e2| {
                            let node = target.exit_node[e2];
                            node != usize::MAX
                                && entry_live[next][v][node]
                                && needed.get(&(next, e2, v)).copied().unwrap_or(false)
                        });
                        if loads[next].contains(&v) || passes_on {
                            needed.insert((pc, e, v), true);
                            grew = true;
                        }
                    }
                }
            }
        }

        let next_stores: Vec<Vec<BTreeSet<VarId>>> = infos
            .iter()
            .enumerate()
            .map(|(pc, info)| {
                (0..info.seg.exits.len())
                    .map(|e| {
                        let node = info.exit_node[e];
                        if !suspending(info, e) || node == usize::MAX {
                            return BTreeSet::new();
                        }
                        info.scope[node]
                            .iter()
                            .copied()
                            .filter(|&v| changed[pc][v][node])
                            .filter(|&v| needed.get(&(pc, e, v)).copied().unwrap_or(false))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        if next_stores == stores {
            return LivenessReport { loads, stores };
        }
        stores = next_stores;
    }
}
