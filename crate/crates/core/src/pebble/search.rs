use std::collections::HashSet;
use std::time::{Duration, Instant};

use super::graph::{EdgeKind, TaskGraph};
use crate::error::PebbleError;
use crate::schedule::{OverwritePolicy, Role};

const NONE: u8 = u8::MAX;

/// One rule application.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Step {
    /// Rule 0: compute (part of) a pebbled node from pebbled, complete operands.
    Compute { node: usize, edges: Vec<usize> },
    /// Rule 1: free the pebble of an isolated, non-final node.
    Free { node: usize },
    /// Rule 2: start `to` in the memory of its operand `from`; `edges` holds the
    /// edge from `from` and any other ready in-edges of `to`.
    Move { from: usize, to: usize, edges: Vec<usize> },
    /// Rule 3: compute (part of) an empty node into a free pebble.
    Add { node: usize, pebble: usize, edges: Vec<usize> },
    /// Rule 4: duplicate a complete node; `moved` out-edges now leave from the copy.
    Copy { node: usize, copy: usize, pebble: usize, moved: Vec<usize> },
}

impl Step {
    pub fn rule(&self) -> u8 {
        match self {
            Step::Compute { .. } => 0,
            Step::Free { .. } => 1,
            Step::Move { .. } => 2,
            Step::Add { .. } => 3,
            Step::Copy { .. } => 4,
        }
    }
}

/// A goal-reaching sequence of rule applications, with the game it was played in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub free_pebbles: usize,
    pub policy: OverwritePolicy,
    pub copy_budget: usize,
    /// Products had to be computed by temporary-free callees.
    pub in_place: bool,
    pub steps: Vec<Step>,
}

#[derive(Clone, Debug)]
pub struct Limits {
    pub copy_budget: usize,
    pub time_budget: Option<Duration>,
    /// Maximum number of distinct states visited.
    pub state_cap: usize,
    pub products: ProductModel,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { copy_budget: 2, time_budget: None, state_cap: 20_000_000, products: ProductModel::Auto }
    }
}

/// What a recursive product call may do to its operands.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ProductModel {
    /// `InPlace` when there are no free pebbles, `Preserving` otherwise.
    #[default]
    Auto,
    /// Callees keep their operands and may use memory of their own.
    Preserving,
    /// Callees use no memory of their own, so they are either the in-place
    /// product (destroying both operands) or the schedule being searched
    /// (destroying the operands its policy allows). Destroyed operands must
    /// have no other use left.
    InPlace,
}

impl ProductModel {
    pub fn resolve(self, free_pebbles: usize) -> bool {
        match self {
            ProductModel::Auto => free_pebbles == 0,
            ProductModel::Preserving => false,
            ProductModel::InPlace => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Found(Trace),
    /// Every reachable state was visited without reaching the goal.
    Exhausted,
    /// The time budget or state cap ran out first.
    TimedOut,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchResult {
    pub outcome: Outcome,
    pub states: usize,
}

/// A memory location in the game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pebble {
    /// Holds initial node `node` at the start.
    Initial { node: usize },
    /// Starts free; reserved for results whose slot no initial node occupies.
    Output { node: usize },
    Temp { index: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct State {
    pub(crate) peb: Vec<u8>,
    pub(crate) rem: u128,
    pub(crate) src: Vec<u8>,
    copies: u8,
}

/// The static part of a game: graph, pebble inventory and which nodes are kept.
#[derive(Clone, Debug)]
pub struct Game<'g> {
    pub graph: &'g TaskGraph,
    pub pebbles: Vec<Pebble>,
    pub policy: OverwritePolicy,
    pub copy_budget: usize,
    pub in_place: bool,
    /// Nodes that must hold a pebble at the end and may never lose it.
    pub keep: Vec<bool>,
    /// Pebble a final node must end on.
    pub designated: Vec<Option<usize>>,
    base: usize,
}

fn frozen(policy: OverwritePolicy, role: Option<Role>) -> bool {
    match role {
        Some(Role::InputA) => !policy.overwrites_a(),
        Some(Role::InputB) => !policy.overwrites_b(),
        Some(_) => false,
        None => policy == OverwritePolicy::ReadOnly,
    }
}

impl<'g> Game<'g> {
    pub fn new(graph: &'g TaskGraph, free_pebbles: usize, policy: OverwritePolicy, copy_budget: usize) -> Self {
        let n = graph.nodes.len();
        let mut pebbles = Vec::new();
        let mut designated = vec![None; n + copy_budget];
        let mut keep = vec![false; n + copy_budget];
        for (i, node) in graph.nodes.iter().enumerate() {
            if node.initial {
                pebbles.push(Pebble::Initial { node: i });
                keep[i] = node.fin || frozen(policy, node.slot.map(|s| s.role()));
                designated[i] = Some(pebbles.len() - 1);
            }
        }
        for (i, node) in graph.nodes.iter().enumerate() {
            if node.fin && !node.initial {
                keep[i] = true;
                let shared = node.slot.and_then(|s| {
                    pebbles.iter().position(|p| matches!(p, Pebble::Initial { node } if graph.nodes[*node].slot == Some(s)))
                });
                designated[i] = Some(shared.unwrap_or_else(|| {
                    pebbles.push(Pebble::Output { node: i });
                    pebbles.len() - 1
                }));
            }
        }
        pebbles.extend((0..free_pebbles).map(|index| Pebble::Temp { index }));
        assert!(pebbles.len() < NONE as usize, "too many pebbles");
        Game { graph, pebbles, policy, copy_budget, in_place: false, keep, designated, base: n }
    }

    pub fn with_in_place(mut self, in_place: bool) -> Self {
        self.in_place = in_place;
        self
    }

    /// The game a trace was played in.
    pub fn for_trace(graph: &'g TaskGraph, t: &Trace) -> Self {
        Game::new(graph, t.free_pebbles, t.policy, t.copy_budget).with_in_place(t.in_place)
    }

    /// Whether operand `v` may be destroyed by a product consuming `pair`.
    fn consumable(&self, st: &State, v: usize, pair: &[usize]) -> bool {
        !self.keep[v] && self.outs(st, v).iter().all(|e| pair.contains(e))
    }

    /// Under the in-place model: the in-place product, or a call to the
    /// schedule itself, which destroys what the policy allows.
    pub(crate) fn product_allowed(&self, st: &State, pair: &[usize]) -> bool {
        if !self.in_place {
            return true;
        }
        let side = |pos: u8| {
            pair.iter()
                .copied()
                .find(|&e| self.graph.edges[e].kind == EdgeKind::Prod { pos })
                .map(|e| self.consumable(st, st.src[e] as usize, pair))
                .unwrap_or(false)
        };
        let (l, r) = (side(0), side(1));
        (l && r) || ((l || !self.policy.overwrites_a()) && (r || !self.policy.overwrites_b()))
    }

    pub fn node_count(&self) -> usize {
        self.base + self.copy_budget
    }

    /// Name of node `v`, copies included.
    pub fn node_name(&self, v: usize, trace: &[Step]) -> String {
        if v < self.base {
            return self.graph.nodes[v].name.clone();
        }
        for s in trace {
            if let Step::Copy { node, copy, .. } = s {
                if *copy == v {
                    return format!("{}'", self.node_name(*node, trace));
                }
            }
        }
        format!("copy{}", v - self.base)
    }

    pub(crate) fn start(&self) -> State {
        let mut peb = vec![NONE; self.node_count()];
        for (p, kind) in self.pebbles.iter().enumerate() {
            if let Pebble::Initial { node } = kind {
                peb[*node] = p as u8;
            }
        }
        let rem = if self.graph.edges.len() == 128 { u128::MAX } else { (1u128 << self.graph.edges.len()) - 1 };
        let src = self.graph.edges.iter().map(|e| e.src as u8).collect();
        State { peb, rem, src, copies: 0 }
    }

    fn live(&self, st: &State) -> impl Iterator<Item = usize> + '_ {
        let rem = st.rem;
        (0..self.graph.edges.len()).filter(move |&e| rem >> e & 1 == 1)
    }

    /// Remaining in-edges of `v`.
    pub(crate) fn ins(&self, st: &State, v: usize) -> Vec<usize> {
        self.live(st).filter(|&e| self.graph.edges[e].dst == v).collect()
    }

    fn has_in(&self, st: &State, v: usize) -> bool {
        v < self.base && self.live(st).any(|e| self.graph.edges[e].dst == v)
    }

    pub(crate) fn outs(&self, st: &State, v: usize) -> Vec<usize> {
        self.live(st).filter(|&e| st.src[e] as usize == v).collect()
    }

    fn available(&self, st: &State, v: usize) -> bool {
        st.peb[v] != NONE && !self.has_in(st, v)
    }

    fn pebble_free(&self, st: &State, p: usize) -> bool {
        !st.peb.contains(&(p as u8))
    }

    /// Remaining in-edges of `v` grouped as they must be removed (a product's
    /// pair together), and whether each group is computable now.
    fn groups(&self, st: &State, v: usize) -> Vec<(Vec<usize>, bool)> {
        let mut out = Vec::new();
        let mut pair = Vec::new();
        for e in self.live(st).filter(|&e| self.graph.edges[e].dst == v) {
            match self.graph.edges[e].kind {
                EdgeKind::Sum { .. } => out.push((vec![e], self.available(st, st.src[e] as usize))),
                EdgeKind::Prod { .. } => pair.push(e),
            }
        }
        if !pair.is_empty() {
            let ok = pair.len() == 2
                && pair.iter().all(|&e| self.available(st, st.src[e] as usize))
                && self.product_allowed(st, &pair);
            out.push((pair, ok));
        }
        out
    }

    fn check_edges(&self, st: &State, v: usize, edges: &[usize]) -> Result<(), String> {
        if edges.is_empty() {
            return Err("no edges".into());
        }
        let groups = self.groups(st, v);
        for &e in edges {
            let g = groups
                .iter()
                .find(|(g, _)| g.contains(&e))
                .ok_or_else(|| format!("edge {e} is not a remaining in-edge of node {v}"))?;
            if !g.1 {
                return Err(format!("edge {e} has an operand that is not ready"));
            }
            if !g.0.iter().all(|x| edges.contains(x)) {
                return Err("product operands must be consumed together".into());
            }
        }
        Ok(())
    }

    fn remove(st: &mut State, edges: &[usize]) {
        for &e in edges {
            st.rem &= !(1u128 << e);
        }
    }

    /// Applies one step, checking the rule's preconditions.
    pub(crate) fn apply(&self, st: &State, step: &Step) -> Result<State, String> {
        let mut next = st.clone();
        let nodes = self.node_count();
        let in_range = |v: usize| if v < nodes { Ok(()) } else { Err(format!("node {v} out of range")) };
        match step {
            Step::Compute { node, edges } => {
                in_range(*node)?;
                if st.peb[*node] == NONE {
                    return Err("rule 0 on a node without pebble".into());
                }
                self.check_edges(st, *node, edges)?;
                Self::remove(&mut next, edges);
            }
            Step::Free { node } => {
                in_range(*node)?;
                if st.peb[*node] == NONE || self.keep[*node] {
                    return Err("rule 1 on an empty or kept node".into());
                }
                if self.has_in(st, *node) || !self.outs(st, *node).is_empty() {
                    return Err("rule 1 on a node that is not isolated".into());
                }
                next.peb[*node] = NONE;
            }
            Step::Move { from, to, edges } => {
                in_range(*from)?;
                in_range(*to)?;
                if !self.available(st, *from) || self.keep[*from] {
                    return Err("rule 2 needs a complete, movable parent".into());
                }
                let outs = self.outs(st, *from);
                let single = outs.len() == 1
                    && self.graph.edges[outs[0]].dst == *to
                    && matches!(self.graph.edges[outs[0]].kind, EdgeKind::Sum { .. });
                if !single {
                    return Err("rule 2 needs a single remaining sum child".into());
                }
                if *to >= self.base || st.peb[*to] != NONE {
                    return Err("rule 2 target must be empty".into());
                }
                if self.keep[*to] && self.designated[*to] != Some(st.peb[*from] as usize) {
                    return Err("result would end up in the wrong location".into());
                }
                if !edges.contains(&outs[0]) {
                    return Err("rule 2 must consume the moved edge".into());
                }
                self.check_edges(st, *to, edges)?;
                Self::remove(&mut next, edges);
                next.peb[*to] = st.peb[*from];
                next.peb[*from] = NONE;
            }
            Step::Add { node, pebble, edges } => {
                in_range(*node)?;
                if *node >= self.base || st.peb[*node] != NONE || self.graph.nodes[*node].initial {
                    return Err("rule 3 target must be an empty computed node".into());
                }
                if *pebble >= self.pebbles.len() || !self.pebble_free(st, *pebble) {
                    return Err("rule 3 needs a free pebble".into());
                }
                if self.keep[*node] && self.designated[*node] != Some(*pebble) {
                    return Err("result would end up in the wrong location".into());
                }
                self.check_edges(st, *node, edges)?;
                Self::remove(&mut next, edges);
                next.peb[*node] = *pebble as u8;
            }
            Step::Copy { node, copy, pebble, moved } => {
                in_range(*node)?;
                if st.copies as usize >= self.copy_budget || *copy != self.base + st.copies as usize {
                    return Err("copy budget exhausted".into());
                }
                if !self.available(st, *node) {
                    return Err("rule 4 needs a complete node".into());
                }
                if *pebble >= self.pebbles.len() || !self.pebble_free(st, *pebble) {
                    return Err("rule 4 needs a free pebble".into());
                }
                let outs = self.outs(st, *node);
                if moved.is_empty() || moved.len() >= outs.len() || !moved.iter().all(|e| outs.contains(e)) {
                    return Err("rule 4 must split the out-edges".into());
                }
                for &e in moved {
                    next.src[e] = *copy as u8;
                }
                next.peb[*copy] = *pebble as u8;
                next.copies += 1;
            }
        }
        Ok(next)
    }

    pub(crate) fn is_goal(&self, st: &State) -> bool {
        (0..self.base).filter(|&v| self.keep[v]).all(|v| {
            st.peb[v] != NONE && !self.has_in(st, v) && self.designated[v].is_none_or(|d| d == st.peb[v] as usize)
        })
    }

    /// Replays a trace from the start state, checking every step.
    pub fn replay(&self, steps: &[Step]) -> Result<(), PebbleError> {
        let mut st = self.start();
        for (i, s) in steps.iter().enumerate() {
            st = self.apply(&st, s).map_err(|m| PebbleError::MalformedTrace(format!("step {}: {m}", i + 1)))?;
        }
        if !self.is_goal(&st) {
            return Err(PebbleError::MalformedTrace("trace does not reach the goal".into()));
        }
        Ok(())
    }

    /// Applies rules 0 and 1 until neither applies. Both only ever help, so
    /// the search never branches on them.
    fn closure(&self, st: &mut State, steps: &mut Vec<Step>) {
        loop {
            let mut changed = false;
            for v in 0..self.node_count() {
                if st.peb[v] == NONE || v >= self.base {
                    continue;
                }
                let edges: Vec<usize> = self.groups(st, v).into_iter().filter(|g| g.1).flat_map(|g| g.0).collect();
                if !edges.is_empty() {
                    Self::remove(st, &edges);
                    steps.push(Step::Compute { node: v, edges });
                    changed = true;
                }
            }
            for v in 0..self.node_count() {
                if st.peb[v] != NONE && !self.keep[v] && !self.has_in(st, v) && self.outs(st, v).is_empty() {
                    st.peb[v] = NONE;
                    steps.push(Step::Free { node: v });
                    changed = true;
                }
            }
            if !changed {
                return;
            }
        }
    }

    /// Free pebbles worth trying for a new value: every named location, and
    /// one representative of the interchangeable temporaries.
    fn candidates(&self, st: &State) -> Vec<usize> {
        let mut out = Vec::new();
        let mut temp_seen = false;
        for (p, kind) in self.pebbles.iter().enumerate() {
            if !self.pebble_free(st, p) {
                continue;
            }
            if let Pebble::Temp { .. } = kind {
                if temp_seen {
                    continue;
                }
                temp_seen = true;
            }
            out.push(p);
        }
        out
    }

    fn moves(&self, st: &State) -> Vec<Step> {
        let mut out = Vec::new();
        for from in 0..self.node_count() {
            if !self.available(st, from) || self.keep[from] {
                continue;
            }
            let outs = self.outs(st, from);
            if let [e] = outs[..] {
                let to = self.graph.edges[e].dst;
                let lands = !self.keep[to] || self.designated[to] == Some(st.peb[from] as usize);
                if st.peb[to] == NONE && lands && matches!(self.graph.edges[e].kind, EdgeKind::Sum { .. }) {
                    // Whatever else is ready would be accumulated by the closure anyway.
                    let edges = self.groups(st, to).into_iter().filter(|g| g.1).flat_map(|g| g.0).collect();
                    out.push(Step::Move { from, to, edges });
                }
            }
        }
        let cands = self.candidates(st);
        for node in 0..self.base {
            if st.peb[node] != NONE || self.graph.nodes[node].initial {
                continue;
            }
            let edges: Vec<usize> = self.groups(st, node).into_iter().filter(|g| g.1).flat_map(|g| g.0).collect();
            if edges.is_empty() {
                continue;
            }
            for &p in &cands {
                if self.keep[node] && self.designated[node] != Some(p) {
                    continue;
                }
                out.push(Step::Add { node, pebble: p, edges: edges.clone() });
            }
        }
        if (st.copies as usize) < self.copy_budget {
            let copy = self.base + st.copies as usize;
            for node in 0..self.node_count() {
                if !self.available(st, node) {
                    continue;
                }
                let outs = self.outs(st, node);
                if outs.len() < 2 || outs.len() > 8 {
                    continue;
                }
                for &p in &cands {
                    for mask in 1..(1u32 << outs.len()) - 1 {
                        let moved = outs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
                        out.push(Step::Copy { node, copy, pebble: p, moved });
                    }
                }
            }
        }
        out
    }

    /// Memo key with interchangeable temporaries renamed by first use.
    fn key(&self, st: &State) -> Vec<u8> {
        let mut rename = vec![NONE; self.pebbles.len()];
        let mut next_temp = self.pebbles.iter().position(|p| matches!(p, Pebble::Temp { .. })).unwrap_or(0) as u8;
        let mut key = Vec::with_capacity(st.peb.len() + 17 + st.src.len());
        for &p in &st.peb {
            let q = if p == NONE {
                NONE
            } else if matches!(self.pebbles[p as usize], Pebble::Temp { .. }) {
                if rename[p as usize] == NONE {
                    rename[p as usize] = next_temp;
                    next_temp += 1;
                }
                rename[p as usize]
            } else {
                p
            };
            key.push(q);
        }
        key.extend_from_slice(&st.rem.to_le_bytes());
        key.push(st.copies);
        if st.copies > 0 {
            key.extend_from_slice(&st.src);
        }
        key
    }
}

struct Dfs<'a, 'g> {
    game: &'a Game<'g>,
    seen: HashSet<Vec<u8>>,
    limits: &'a Limits,
    started: Instant,
    out_of_budget: bool,
}

impl Dfs<'_, '_> {
    fn visit(&mut self, mut st: State, steps: &mut Vec<Step>) -> bool {
        let mark = steps.len();
        self.game.closure(&mut st, steps);
        if self.game.is_goal(&st) {
            return true;
        }
        if !self.seen.insert(self.game.key(&st)) {
            steps.truncate(mark);
            return false;
        }
        if self.seen.len() >= self.limits.state_cap
            || (self.seen.len() % 4096 == 0 && self.limits.time_budget.is_some_and(|t| self.started.elapsed() > t))
        {
            self.out_of_budget = true;
        }
        for step in self.game.moves(&st) {
            if self.out_of_budget {
                break;
            }
            let next = self.game.apply(&st, &step).expect("generated moves are legal");
            steps.push(step);
            if self.visit(next, steps) {
                return true;
            }
            steps.pop();
        }
        steps.truncate(mark);
        false
    }
}

impl Game<'_> {
    fn pebble_name(&self, p: usize) -> String {
        match &self.pebbles[p] {
            Pebble::Initial { node } | Pebble::Output { node } => match self.graph.nodes[*node].slot {
                Some(s) => s.to_string(),
                None => format!("@{}", self.graph.nodes[*node].name),
            },
            Pebble::Temp { index } => format!("T{index}"),
        }
    }

    fn edge_list(&self, edges: &[usize], trace: &[Step]) -> String {
        let names: Vec<String> = edges.iter().map(|&e| self.node_name(self.graph.edges[e].src, trace)).collect();
        names.join(",")
    }

    /// One line per step: rule number, nodes, pebble and consumed operands.
    pub fn render(&self, trace: &[Step]) -> String {
        let mut out = String::new();
        for (i, step) in trace.iter().enumerate() {
            let name = |v: usize| self.node_name(v, trace);
            let line = match step {
                Step::Compute { node, edges } => format!("{} <- [{}]", name(*node), self.edge_list(edges, trace)),
                Step::Free { node } => format!("free {}", name(*node)),
                Step::Move { from, to, edges } => {
                    format!("{} takes the pebble of {} <- [{}]", name(*to), name(*from), self.edge_list(edges, trace))
                }
                Step::Add { node, pebble, edges } => {
                    format!("{} on {} <- [{}]", name(*node), self.pebble_name(*pebble), self.edge_list(edges, trace))
                }
                Step::Copy { node, copy, pebble, .. } => {
                    format!("{} on {} <- copy of {}", name(*copy), self.pebble_name(*pebble), name(*node))
                }
            };
            out += &format!("{:>3}. rule {}: {line}\n", i + 1, step.rule());
        }
        out
    }
}

/// Depth-first search over rule applications with memoization of visited states.
pub fn search(g: &TaskGraph, free_pebbles: usize, policy: OverwritePolicy, limits: &Limits) -> SearchResult {
    let in_place = limits.products.resolve(free_pebbles);
    let game = Game::new(g, free_pebbles, policy, limits.copy_budget).with_in_place(in_place);
    let mut dfs = Dfs { game: &game, seen: HashSet::new(), limits, started: Instant::now(), out_of_budget: false };
    let mut steps = Vec::new();
    let found = dfs.visit(game.start(), &mut steps);
    let outcome = if found {
        Outcome::Found(Trace { free_pebbles, policy, copy_budget: limits.copy_budget, in_place, steps })
    } else if dfs.out_of_budget {
        Outcome::TimedOut
    } else {
        Outcome::Exhausted
    };
    SearchResult { outcome, states: dfs.seen.len() }
}

/// The smallest rectangular extension of the pebble argument: with pebbles the
/// size of a C quadrant, an A or B quadrant larger than that cannot be
/// overwritten by any of the sums, so `k <= min(m, n)` is required.
pub fn rectangular_feasible(m: usize, k: usize, n: usize) -> bool {
    k <= m.min(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_copies() -> Limits {
        Limits { copy_budget: 0, ..Limits::default() }
    }

    #[test]
    fn classical_toy() {
        let g = TaskGraph::classical_2x2();
        let r = search(&g, 0, OverwritePolicy::ReadOnly, &no_copies());
        assert_eq!(r.outcome, Outcome::Exhausted);
        let r = search(&g, 1, OverwritePolicy::ReadOnly, &no_copies());
        let Outcome::Found(t) = r.outcome else { panic!("no trace with one pebble") };
        let game = Game::new(&g, 1, OverwritePolicy::ReadOnly, 0);
        game.replay(&t.steps).unwrap();
    }

    #[test]
    fn replay_rejects_illegal_steps() {
        let g = TaskGraph::classical_2x2();
        let game = Game::new(&g, 1, OverwritePolicy::ReadOnly, 0);
        let a11 = g.node("A11").unwrap();
        assert!(game.replay(&[Step::Free { node: a11 }]).is_err());
        assert!(game.replay(&[]).is_err());
    }
}
