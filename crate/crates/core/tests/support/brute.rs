//! Breadth-first enumeration of every rule application on a small task graph.
//! Shares nothing with the library search but the graph type.

use std::collections::{HashSet, VecDeque};

use winomem::pebble::{EdgeKind, TaskGraph};
use winomem::schedule::{OverwritePolicy, Role};

#[derive(Clone, PartialEq, Eq, Hash)]
struct St {
    at: Vec<Option<usize>>,
    rem: u128,
}

struct Rules<'g> {
    g: &'g TaskGraph,
    pebbles: usize,
    keep: Vec<bool>,
    home: Vec<Option<usize>>,
    policy: OverwritePolicy,
    in_place: bool,
}

impl<'g> Rules<'g> {
    fn new(g: &'g TaskGraph, free: usize, policy: OverwritePolicy) -> Self {
        let n = g.nodes.len();
        let mut keep = vec![false; n];
        let mut home = vec![None; n];
        let mut pebbles = 0;
        let mut slot_owner = Vec::new();
        for (v, node) in g.nodes.iter().enumerate() {
            if !node.initial {
                continue;
            }
            let role = node.slot.map(|s| s.role());
            let locked = match role {
                Some(Role::InputA) => !policy.overwrites_a(),
                Some(Role::InputB) => !policy.overwrites_b(),
                Some(_) => false,
                None => policy == OverwritePolicy::ReadOnly,
            };
            keep[v] = node.fin || locked;
            home[v] = Some(pebbles);
            slot_owner.push((node.slot, pebbles));
            pebbles += 1;
        }
        for (v, node) in g.nodes.iter().enumerate() {
            if node.fin && !node.initial {
                keep[v] = true;
                let shared = slot_owner.iter().find(|(s, _)| s.is_some() && *s == node.slot).map(|x| x.1);
                home[v] = Some(shared.unwrap_or_else(|| {
                    pebbles += 1;
                    pebbles - 1
                }));
            }
        }
        Rules { g, pebbles: pebbles + free, keep, home, policy, in_place: free == 0 }
    }

    fn live_in(&self, s: &St, v: usize) -> Vec<usize> {
        (0..self.g.edges.len()).filter(|&e| s.rem >> e & 1 == 1 && self.g.edges[e].dst == v).collect()
    }

    fn live_out(&self, s: &St, v: usize) -> Vec<usize> {
        (0..self.g.edges.len()).filter(|&e| s.rem >> e & 1 == 1 && self.g.edges[e].src == v).collect()
    }

    fn done(&self, s: &St, v: usize) -> bool {
        s.at[v].is_some() && self.live_in(s, v).is_empty()
    }

    fn eaten(&self, s: &St, v: usize, pair: &[usize]) -> bool {
        !self.keep[v] && self.live_out(s, v).iter().all(|e| pair.contains(e))
    }

    /// Removable units of `v`'s remaining in-edges that are ready now.
    fn ready_units(&self, s: &St, v: usize) -> Vec<Vec<usize>> {
        let ins = self.live_in(s, v);
        let mut units = Vec::new();
        let mut pair = Vec::new();
        for &e in &ins {
            match self.g.edges[e].kind {
                EdgeKind::Sum { .. } => {
                    if self.done(s, self.g.edges[e].src) {
                        units.push(vec![e]);
                    }
                }
                EdgeKind::Prod { .. } => pair.push(e),
            }
        }
        if pair.len() == 2 && pair.iter().all(|&e| self.done(s, self.g.edges[e].src)) {
            let side = |pos| {
                let e = *pair.iter().find(|&&e| self.g.edges[e].kind == EdgeKind::Prod { pos }).unwrap();
                self.eaten(s, self.g.edges[e].src, &pair)
            };
            let (l, r) = (side(0), side(1));
            let ok = !self.in_place
                || (l && r)
                || ((l || !self.policy.overwrites_a()) && (r || !self.policy.overwrites_b()));
            if ok {
                units.push(pair);
            }
        }
        units
    }

    fn subsets(units: &[Vec<usize>]) -> Vec<Vec<usize>> {
        (1u32..1 << units.len())
            .map(|m| units.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).flat_map(|(_, u)| u.clone()).collect())
            .collect()
    }

    fn goal(&self, s: &St) -> bool {
        (0..self.g.nodes.len()).filter(|&v| self.keep[v]).all(|v| self.done(s, v) && s.at[v] == self.home[v])
    }

    fn next(&self, s: &St) -> Vec<St> {
        let n = self.g.nodes.len();
        let mut out = Vec::new();
        let drop = |s: &St, edges: &[usize]| edges.iter().fold(s.rem, |r, &e| r & !(1u128 << e));
        for v in 0..n {
            if s.at[v].is_none() {
                continue;
            }
            // rule 0
            for sub in Self::subsets(&self.ready_units(s, v)) {
                out.push(St { at: s.at.clone(), rem: drop(s, &sub) });
            }
            // rule 1
            if !self.keep[v] && self.live_in(s, v).is_empty() && self.live_out(s, v).is_empty() {
                let mut at = s.at.clone();
                at[v] = None;
                out.push(St { at, rem: s.rem });
            }
            // rule 2
            let outs = self.live_out(s, v);
            if self.done(s, v) && !self.keep[v] && outs.len() == 1 {
                let e = outs[0];
                let to = self.g.edges[e].dst;
                if matches!(self.g.edges[e].kind, EdgeKind::Sum { .. })
                    && s.at[to].is_none()
                    && (!self.keep[to] || self.home[to] == s.at[v])
                {
                    let others: Vec<Vec<usize>> = self.ready_units(s, to).into_iter().filter(|u| u != &[e]).collect();
                    let mut subs = Self::subsets(&others);
                    subs.push(Vec::new());
                    for mut sub in subs {
                        sub.push(e);
                        let mut at = s.at.clone();
                        at[to] = s.at[v];
                        at[v] = None;
                        out.push(St { at, rem: drop(s, &sub) });
                    }
                }
            }
        }
        // rule 3
        for v in 0..n {
            if s.at[v].is_some() || self.g.nodes[v].initial {
                continue;
            }
            let subs = Self::subsets(&self.ready_units(s, v));
            for p in 0..self.pebbles {
                if s.at.contains(&Some(p)) || (self.keep[v] && self.home[v] != Some(p)) {
                    continue;
                }
                for sub in &subs {
                    let mut at = s.at.clone();
                    at[v] = Some(p);
                    out.push(St { at, rem: drop(s, sub) });
                }
            }
        }
        out
    }
}

/// Whether the goal is reachable with `free` extra pebbles and no copies.
pub fn feasible(g: &TaskGraph, free: usize, policy: OverwritePolicy) -> bool {
    let r = Rules::new(g, free, policy);
    let mut at = vec![None; g.nodes.len()];
    for v in 0..g.nodes.len() {
        if g.nodes[v].initial {
            at[v] = r.home[v];
        }
    }
    let start = St { at, rem: (1u128 << g.edges.len()) - 1 };
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        if r.goal(&s) {
            return true;
        }
        for t in r.next(&s) {
            if seen.insert(t.clone()) {
                queue.push_back(t);
            }
        }
    }
    false
}
