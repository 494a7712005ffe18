use std::collections::HashMap;

use super::graph::{EdgeKind, TaskGraph};
use super::search::{Game, Pebble, State, Step, Trace};
use crate::error::PebbleError;
use crate::schedule::{
    Coef, HalfDim, Instruction, LinTerm, Op, OverwritePolicy, Role, Schedule, Shape, Slot, TempDecl, Variant,
};

fn malformed(msg: impl Into<String>) -> PebbleError {
    PebbleError::MalformedTrace(msg.into())
}

fn writable(policy: OverwritePolicy, slot: Slot) -> bool {
    match slot.role() {
        Role::InputA => policy.overwrites_a(),
        Role::InputB => policy.overwrites_b(),
        _ => true,
    }
}

/// Recursive variant for a product whose operands are (`lhs_dead`, `rhs_dead`)
/// after the call.
fn variant_for(acc: bool, lhs_dead: bool, rhs_dead: bool) -> Variant {
    match (acc, lhs_dead, rhs_dead) {
        (false, true, true) => Variant::IP,
        (false, true, false) => Variant::OvL,
        (false, false, true) => Variant::OvR,
        (false, false, false) => Variant::Std2,
        (true, true, true) => Variant::AcLR,
        (true, _, true) => Variant::AccR,
        (true, _, false) => Variant::Acc3,
    }
}

struct Builder<'a, 'g> {
    game: &'a Game<'g>,
    trace: &'a Trace,
    slots: Vec<Option<Slot>>,
    temps: Vec<Slot>,
    out: Vec<Instruction>,
    /// Content of a node started by rule 2 whose first instruction is still to come.
    pending: HashMap<usize, LinTerm>,
}

impl Builder<'_, '_> {
    fn graph(&self) -> &TaskGraph {
        self.game.graph
    }

    fn name(&self, v: usize) -> String {
        self.game.node_name(v, &self.trace.steps)
    }

    /// The original node a copy descends from.
    fn origin(&self, mut v: usize) -> usize {
        while v >= self.graph().nodes.len() {
            v = self
                .trace
                .steps
                .iter()
                .find_map(|s| match s {
                    Step::Copy { node, copy, .. } if *copy == v => Some(*node),
                    _ => None,
                })
                .expect("copies come from Copy steps");
        }
        v
    }

    fn slot(&mut self, pebble: usize) -> Result<Slot, PebbleError> {
        if let Some(s) = self.slots[pebble] {
            return Ok(s);
        }
        let s = match self.game.pebbles[pebble] {
            Pebble::Initial { node } | Pebble::Output { node } => self.graph().nodes[node]
                .slot
                .ok_or_else(|| malformed(format!("node `{}` has no memory slot", self.graph().nodes[node].name)))?,
            Pebble::Temp { .. } => {
                let s = *Slot::TEMPS.get(self.temps.len()).ok_or_else(|| malformed("more than three temporaries"))?;
                self.temps.push(s);
                s
            }
        };
        self.slots[pebble] = Some(s);
        Ok(s)
    }

    fn term(&self, st: &State, e: usize) -> LinTerm {
        let edge = self.graph().edges[e];
        let src = st.src[e] as usize;
        let mut coef = match edge.kind {
            EdgeKind::Sum { neg: true } => Coef::MINUS_ONE,
            _ => Coef::ONE,
        };
        let o = &self.graph().nodes[self.origin(src)];
        if o.initial && o.slot.is_some_and(|s| s.role() == Role::InoutC) {
            coef = coef.mul(Coef::BETA);
        }
        LinTerm { coef, src: self.name(src) }
    }

    fn dead(&mut self, after: &State, v: usize) -> Result<bool, PebbleError> {
        if self.game.keep[v] || !self.game.outs(after, v).is_empty() {
            return Ok(false);
        }
        let slot = self.slot(after.peb[v] as usize)?;
        Ok(writable(self.trace.policy, slot))
    }

    fn push(&mut self, name: String, dst: Slot, op: Op) {
        let label = (self.out.len() + 1).to_string();
        self.out.push(Instruction { label, name, dst, op });
    }

    /// Emits the instructions computing `edges` of `node` into `dst`.
    /// `own` is the term already present in `dst` (the node itself, or the
    /// operand whose memory is being reused); `None` means `dst` is fresh.
    fn emit(
        &mut self,
        st: &State,
        after: &State,
        node: usize,
        dst: Slot,
        own: Option<LinTerm>,
        edges: &[usize],
    ) -> Result<(), PebbleError> {
        let game = self.game;
        let g = game.graph;
        let pair: Vec<usize> = edges.iter().copied().filter(|&e| matches!(g.edges[e].kind, EdgeKind::Prod { .. })).collect();
        let sums: Vec<LinTerm> = edges
            .iter()
            .copied()
            .filter(|&e| matches!(g.edges[e].kind, EdgeKind::Sum { .. }))
            .map(|e| self.term(st, e))
            .collect();
        let name = self.name(node);
        let self_term = LinTerm { coef: Coef::ONE, src: name.clone() };
        let mut own = own;
        if !pair.is_empty() {
            let by_pos = |p: u8| {
                pair.iter()
                    .copied()
                    .find(|&e| g.edges[e].kind == EdgeKind::Prod { pos: p })
                    .map(|e| st.src[e] as usize)
                    .ok_or_else(|| malformed("incomplete product"))
            };
            let (l, r) = (by_pos(0)?, by_pos(1)?);
            let acc = own.take();
            let (ld, rd) = (self.dead(after, l)?, self.dead(after, r)?);
            let variant = match (self.trace.in_place, ld && rd) {
                (true, true) if acc.is_none() => Variant::IP,
                (true, _) => Variant::SelfCall,
                (false, _) => variant_for(acc.is_some(), ld, rd),
            };
            let coef = if g.accumulating() { Coef::ALPHA } else { Coef::ONE };
            let op = Op::Product { variant, coef, lhs: self.name(l), rhs: self.name(r), acc };
            self.push(name.clone(), dst, op);
            own = Some(self_term);
        }
        let renamed = own.as_ref().is_some_and(|t| t.src != name || t.coef != Coef::ONE);
        if !sums.is_empty() || renamed {
            let mut terms: Vec<LinTerm> = own.into_iter().collect();
            terms.extend(sums);
            self.push(name, dst, Op::Linear(terms));
        }
        Ok(())
    }
}

/// Turns a goal-reaching trace into a schedule. Initial pebbles keep their
/// slots, results land in their C slots and free pebbles become X, Y, Z in
/// order of first use.
pub fn trace_to_schedule(g: &TaskGraph, trace: &Trace) -> Result<Schedule, PebbleError> {
    let game = Game::for_trace(g, trace);
    game.replay(&trace.steps)?;
    let mut b = Builder { game: &game, trace, slots: vec![None; game.pebbles.len()], temps: Vec::new(), out: Vec::new(), pending: HashMap::new() };
    let mut st = game.start();
    for step in &trace.steps {
        let after = game.apply(&st, step).map_err(malformed)?;
        match step {
            Step::Compute { node, edges } => {
                let dst = b.slot(st.peb[*node] as usize)?;
                let own = b.pending.remove(node).unwrap_or(LinTerm { coef: Coef::ONE, src: b.name(*node) });
                b.emit(&st, &after, *node, dst, Some(own), edges)?;
            }
            Step::Move { from, to, edges } => {
                let dst = b.slot(st.peb[*from] as usize)?;
                let e_from = *edges.iter().find(|&&e| st.src[e] as usize == *from).ok_or_else(|| malformed("move"))?;
                let own = b.term(&st, e_from);
                let rest: Vec<usize> = edges.iter().copied().filter(|&e| e != e_from).collect();
                if rest.is_empty() && !game.ins(&after, *to).is_empty() {
                    b.pending.insert(*to, own);
                    st = after;
                    continue;
                }
                b.emit(&st, &after, *to, dst, Some(own), &rest)?;
            }
            Step::Add { node, pebble, edges } => {
                let dst = b.slot(*pebble)?;
                b.emit(&st, &after, *node, dst, None, edges)?;
            }
            Step::Copy { node, copy, pebble, .. } => {
                let dst = b.slot(*pebble)?;
                let op = Op::Linear(vec![LinTerm { coef: Coef::ONE, src: b.name(*node) }]);
                let name = b.name(*copy);
                b.push(name, dst, op);
            }
            Step::Free { .. } => {}
        }
        st = after;
    }
    let temps = b.temps.iter().map(|&slot| TempDecl { slot, rows: HalfDim::M, cols: HalfDim::N }).collect();
    Ok(Schedule {
        name: "searched".into(),
        contract: trace.policy,
        accumulating: g.accumulating(),
        shape: Shape::Square,
        temps,
        instructions: b.out,
    })
}
