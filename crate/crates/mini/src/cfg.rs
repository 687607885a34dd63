//! Control-flow graphs over segment trees.
//!
//! Structured statements contribute paired control nodes: `Ws`/`We` for
//! loops, `Is`/`Ie` for branches, `Es`/`Ee` for try regions and `Bs`/`Be`
//! for repaired blocks. A loop's `Ws` branches to its body and to `We`. `We`
//! jumps back to `Ws` and falls through to the next statement. `Y`, `C` and
//! uncaught `T` nodes end a segment.

use crate::resolve::{Resolved, SId, SKind};
use crate::split::{Ep, ExitKind, Segment};
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Entry,
    Stmt(SId),
    Yield(SId),
    Call(SId),
    Throw(SId),
    Return,
    Ws(SId),
    We(SId),
    Is(SId),
    Ie(SId),
    /// Repaired block of statement `block`, scoped like `anchor`.
    Bs {
        block: SId,
        anchor: SId,
    },
    Be {
        block: SId,
        anchor: SId,
    },
    /// Try region; the anchor is set for a repaired try body.
    Es(SId, Option<SId>),
    Ee(SId, Option<SId>),
    Catch(SId),
    Pending(SId),
}

impl NodeKind {
    /// Short tag used in dumps and control-node counts.
    pub fn tag(self) -> &'static str {
        match self {
            NodeKind::Entry => "entry",
            NodeKind::Stmt(_) => "stmt",
            NodeKind::Yield(_) => "Y",
            NodeKind::Call(_) => "C",
            NodeKind::Throw(_) => "T",
            NodeKind::Return => "return",
            NodeKind::Ws(_) => "Ws",
            NodeKind::We(_) => "We",
            NodeKind::Is(_) => "Is",
            NodeKind::Ie(_) => "Ie",
            NodeKind::Bs { .. } => "Bs",
            NodeKind::Be { .. } => "Be",
            NodeKind::Es(..) => "Es",
            NodeKind::Ee(..) => "Ee",
            NodeKind::Catch(_) => "catch",
            NodeKind::Pending(_) => "pending",
        }
    }

    pub fn is_control(self) -> bool {
        !matches!(
            self,
            NodeKind::Entry | NodeKind::Stmt(_) | NodeKind::Return | NodeKind::Catch(_) | NodeKind::Pending(_)
        )
    }

    pub fn sid(self) -> Option<SId> {
        match self {
            NodeKind::Entry | NodeKind::Return => None,
            NodeKind::Stmt(s)
            | NodeKind::Yield(s)
            | NodeKind::Call(s)
            | NodeKind::Throw(s)
            | NodeKind::Ws(s)
            | NodeKind::We(s)
            | NodeKind::Is(s)
            | NodeKind::Ie(s)
            | NodeKind::Bs { block: s, .. }
            | NodeKind::Be { block: s, .. }
            | NodeKind::Es(s, _)
            | NodeKind::Ee(s, _)
            | NodeKind::Catch(s)
            | NodeKind::Pending(s) => Some(s),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Node {
    pub kind: NodeKind,
    pub succ: Vec<usize>,
    /// Index into the segment's exit table, for exit nodes.
    pub exit: Option<usize>,
}

/// A control-flow graph whose node 0 is the entry.
#[derive(Debug, Clone)]
pub struct Cfg {
    pub nodes: Vec<Node>,
}

struct Builder<'r> {
    res: &'r Resolved,
    exits: &'r [ExitKind],
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn add(&mut self, kind: NodeKind, preds: &[usize]) -> usize {
        let n = self.nodes.len();
        self.nodes.push(Node {
            kind,
            succ: Vec::new(),
            exit: None,
        });
        for &p in preds {
            self.edge(p, n);
        }
        n
    }

    fn edge(&mut self, from: usize, to: usize) {
        if !self.nodes[from].succ.contains(&to) {
            self.nodes[from].succ.push(to);
        }
    }

    /// Emits `eps` after `preds`; returns the nodes that fall through.
    fn seq(&mut self, eps: &[Ep], mut preds: Vec<usize>, catch: Option<usize>) -> Vec<usize> {
        for ep in eps {
            preds = match ep {
                Ep::Stmt(s) => vec![self.add(NodeKind::Stmt(*s), &preds)],
                Ep::Suspend(s) => {
                    let kind = match self.res.stmts[*s].kind {
                        SKind::Yield { .. } => NodeKind::Yield(*s),
                        _ => NodeKind::Call(*s),
                    };
                    let n = self.add(kind, &preds);
                    if let (NodeKind::Call(_), Some(c)) = (kind, catch) {
                        self.edge(n, c);
                    }
                    vec![n]
                }
                Ep::Throw(s) => {
                    let n = self.add(NodeKind::Throw(*s), &preds);
                    self.edge(n, catch.expect("caught throw outside a try"));
                    vec![]
                }
                Ep::Pending(s) => {
                    let n = self.add(NodeKind::Pending(*s), &preds);
                    if let Some(c) = catch {
                        self.edge(n, c);
                    }
                    vec![n]
                }
                Ep::Exit(id) => {
                    let kind = match self.exits[*id] {
                        ExitKind::Yield { sid, .. } => NodeKind::Yield(sid),
                        ExitKind::Call { sid, .. } => NodeKind::Call(sid),
                        ExitKind::Throw(sid) => NodeKind::Throw(sid),
                        ExitKind::Return => NodeKind::Return,
                    };
                    let n = self.add(kind, &preds);
                    self.nodes[n].exit = Some(*id);
                    vec![]
                }
                Ep::While { sid, body } => {
                    let ws = self.add(NodeKind::Ws(*sid), &preds);
                    let mut tails = self.seq(body, vec![ws], catch);
                    tails.push(ws);
                    let we = self.add(NodeKind::We(*sid), &tails);
                    self.edge(we, ws);
                    vec![we]
                }
                Ep::If { sid, then, els } => {
                    let is = self.add(NodeKind::Is(*sid), &preds);
                    let mut tails = self.seq(then, vec![is], catch);
                    tails.extend(self.seq(els, vec![is], catch));
                    vec![self.add(NodeKind::Ie(*sid), &tails)]
                }
                Ep::Block { sid, anchor, body } => {
                    let bs = self.add(
                        NodeKind::Bs {
                            block: *sid,
                            anchor: *anchor,
                        },
                        &preds,
                    );
                    let tails = self.seq(body, vec![bs], catch);
                    vec![self.add(
                        NodeKind::Be {
                            block: *sid,
                            anchor: *anchor,
                        },
                        &tails,
                    )]
                }
                Ep::Try { sid, body, replica } => {
                    let es = self.add(NodeKind::Es(*sid, *replica), &preds);
                    let c = self.add(NodeKind::Catch(*sid), &[]);
                    let mut tails = self.seq(body, vec![es], Some(c));
                    let SKind::Try { handler, .. } = &self.res.stmts[*sid].kind else {
                        unreachable!()
                    };
                    let handler: Vec<Ep> = handler.iter().map(|&h| Ep::Stmt(h)).collect();
                    tails.extend(self.seq(&handler, vec![c], catch));
                    vec![self.add(NodeKind::Ee(*sid, *replica), &tails)]
                }
            };
        }
        preds
    }
}

fn build(res: &Resolved, body: &[Ep], exits: &[ExitKind]) -> Cfg {
    let mut b = Builder {
        res,
        exits,
        nodes: Vec::new(),
    };
    let entry = b.add(NodeKind::Entry, &[]);
    b.seq(body, vec![entry], None);
    Cfg { nodes: b.nodes }
}

/// CFG of a whole coroutine, before splitting.
pub fn build_cfg(res: &Resolved) -> Cfg {
    let (body, exits) = crate::split::whole_body(res);
    build(res, &body, &exits)
}

/// CFG of one segment.
pub fn segment_cfg(res: &Resolved, seg: &Segment) -> Cfg {
    build(res, &seg.body, &seg.exits)
}

impl Cfg {
    pub fn preds(&self) -> Vec<Vec<usize>> {
        let mut preds = vec![Vec::new(); self.nodes.len()];
        for (n, node) in self.nodes.iter().enumerate() {
            for &s in &node.succ {
                preds[s].push(n);
            }
        }
        preds
    }

    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0];
        while let Some(n) = stack.pop() {
            if !std::mem::replace(&mut seen[n], true) {
                stack.extend(self.nodes[n].succ.iter().copied());
            }
        }
        seen
    }

    /// `dom[n][d]` holds when `d` dominates `n`. Unreachable nodes are
    /// dominated by nothing.
    pub fn dominators(&self) -> Vec<Vec<bool>> {
        let n = self.nodes.len();
        let reach = self.reachable();
        let preds = self.preds();
        let mut dom: Vec<Vec<bool>> = (0..n)
            .map(|i| {
                if i == 0 {
                    (0..n).map(|j| j == 0).collect()
                } else {
                    reach.clone()
                }
            })
            .collect();
        for i in 0..n {
            if !reach[i] {
                dom[i] = vec![false; n];
            }
        }
        let mut changed = true;
        while changed {
            changed = false;
            for i in 1..n {
                if !reach[i] {
                    continue;
                }
                let mut next = vec![true; n];
                for &p in preds[i].iter().filter(|&&p| reach[p]) {
                    for (k, bit) in next.iter_mut().enumerate() {
                        *bit &= dom[p][k];
                    }
                }
                next[i] = true;
                if next != dom[i] {
                    dom[i] = next;
                    changed = true;
                }
            }
        }
        dom
    }

    /// Count of control nodes by tag.
    pub fn control_counts(&self) -> BTreeMap<&'static str, usize> {
        let mut m = BTreeMap::new();
        for node in self.nodes.iter().filter(|n| n.kind.is_control()) {
            *m.entry(node.kind.tag()).or_insert(0) += 1;
        }
        m
    }

    pub fn dump(&self, res: &Resolved) -> String {
        let mut out = String::new();
        for (i, node) in self.nodes.iter().enumerate() {
            let label = match node.kind {
                NodeKind::Stmt(s) | NodeKind::Yield(s) | NodeKind::Call(s) | NodeKind::Throw(s) => {
                    format!("{} s{s}: {}", node.kind.tag(), res.stmts[s].text)
                }
                NodeKind::Entry | NodeKind::Return => node.kind.tag().to_string(),
                k => format!("{} s{}", k.tag(), k.sid().expect("structural node")),
            };
            let succ: Vec<String> = node.succ.iter().map(|s| s.to_string()).collect();
            let _ = writeln!(out, "{i:>3} {label} -> [{}]", succ.join(", "));
        }
        out
    }
}

/// Whether node `a` dominates node `b`.
pub fn dominates(cfg: &Cfg, a: usize, b: usize) -> bool {
    cfg.dominators()[b][a]
}
