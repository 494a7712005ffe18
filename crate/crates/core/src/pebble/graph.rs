use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::PebbleError;
use crate::schedule::Slot;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    pub initial: bool,
    /// Must hold a pebble at the end (results, and inputs kept intact).
    pub fin: bool,
    /// Memory location of an initial node, or where a final result must end up.
    pub slot: Option<Slot>,
    /// The two factors of a product node.
    pub prod: Option<(usize, usize)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    Sum { neg: bool },
    /// Operand `pos` (0 or 1) of the destination's product.
    Prod { pos: u8 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub kind: EdgeKind,
}

/// Operands point to results; a node's value is the signed sum of its sum
/// in-edges plus the product of its product in-edges.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TaskGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

impl TaskGraph {
    pub fn node(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    pub fn in_edges(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().enumerate().filter(move |(_, e)| e.dst == v).map(|(i, _)| i)
    }

    pub fn out_edges(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().enumerate().filter(move |(_, e)| e.src == v).map(|(i, _)| i)
    }

    /// True when initial C quadrants feed the results.
    pub fn accumulating(&self) -> bool {
        self.nodes.iter().any(|n| n.initial && n.slot.is_some_and(|s| s.role() == crate::schedule::Role::InoutC))
    }

    fn add_node(&mut self, name: &str, initial: bool, fin: bool, slot: Option<Slot>) -> usize {
        self.nodes.push(Node { name: name.to_string(), initial, fin, slot, prod: None });
        self.nodes.len() - 1
    }

    fn add_sum(&mut self, dst: &str, terms: &[(&str, bool)]) {
        let d = self.node(dst).expect("declared");
        for &(s, neg) in terms {
            let s = self.node(s).expect("declared");
            self.edges.push(Edge { src: s, dst: d, kind: EdgeKind::Sum { neg } });
        }
    }

    fn add_prod(&mut self, dst: &str, a: &str, b: &str) {
        let d = self.node(dst).expect("declared");
        let (a, b) = (self.node(a).expect("declared"), self.node(b).expect("declared"));
        self.nodes[d].prod = Some((a, b));
        self.edges.push(Edge { src: a, dst: d, kind: EdgeKind::Prod { pos: 0 } });
        self.edges.push(Edge { src: b, dst: d, kind: EdgeKind::Prod { pos: 1 } });
    }

    /// The 22-operation Winograd task graph; `accumulate` adds the C quadrants
    /// as extra initial operands of the four results.
    pub fn winograd(accumulate: bool) -> TaskGraph {
        let mut g = TaskGraph::default();
        for s in &Slot::ALL[..8] {
            g.add_node(s.name(), true, false, Some(*s));
        }
        if accumulate {
            for s in &Slot::ALL[8..12] {
                g.add_node(s.name(), true, false, Some(*s));
            }
        }
        for t in ["S1", "S2", "S3", "T1", "T2", "T3", "S4", "T4", "P1", "P2", "P3", "P4", "P5", "P6", "P7"] {
            g.add_node(t, false, false, None);
        }
        for (u, out) in [
            ("U1", Some(Slot::C11)),
            ("U2", None),
            ("U3", None),
            ("U4", None),
            ("U5", Some(Slot::C12)),
            ("U6", Some(Slot::C21)),
            ("U7", Some(Slot::C22)),
        ] {
            g.add_node(u, false, out.is_some(), out);
        }
        let (p, m) = (false, true);
        g.add_sum("S1", &[("A21", p), ("A22", p)]);
        g.add_sum("S2", &[("S1", p), ("A11", m)]);
        g.add_sum("S3", &[("A11", p), ("A21", m)]);
        g.add_sum("T1", &[("B12", p), ("B11", m)]);
        g.add_sum("T2", &[("B22", p), ("T1", m)]);
        g.add_sum("T3", &[("B22", p), ("B12", m)]);
        g.add_sum("S4", &[("A12", p), ("S2", m)]);
        g.add_sum("T4", &[("T2", p), ("B21", m)]);
        for (d, a, b) in [
            ("P1", "A11", "B11"),
            ("P2", "A12", "B21"),
            ("P3", "S4", "B22"),
            ("P4", "A22", "T4"),
            ("P5", "S1", "T1"),
            ("P6", "S2", "T2"),
            ("P7", "S3", "T3"),
        ] {
            g.add_prod(d, a, b);
        }
        g.add_sum("U1", &[("P1", p), ("P2", p)]);
        g.add_sum("U2", &[("P1", p), ("P6", p)]);
        g.add_sum("U3", &[("U2", p), ("P7", p)]);
        g.add_sum("U4", &[("U2", p), ("P5", p)]);
        g.add_sum("U5", &[("U4", p), ("P3", p)]);
        g.add_sum("U6", &[("U3", p), ("P4", m)]);
        g.add_sum("U7", &[("U3", p), ("P5", p)]);
        if accumulate {
            g.add_sum("U1", &[("C11", p)]);
            g.add_sum("U5", &[("C12", p)]);
            g.add_sum("U6", &[("C21", p)]);
            g.add_sum("U7", &[("C22", p)]);
        }
        g
    }

    /// Classical 2x2 block product: 8 products and 4 two-term sums.
    pub fn classical_2x2() -> TaskGraph {
        let mut g = TaskGraph::default();
        for s in &Slot::ALL[..8] {
            g.add_node(s.name(), true, false, Some(*s));
        }
        for i in 1..=2 {
            for j in 1..=2 {
                for l in 1..=2 {
                    g.add_node(&format!("P{i}{j}{l}"), false, false, None);
                }
            }
        }
        for s in &Slot::ALL[8..12] {
            g.add_node(&format!("R{}", &s.name()[1..]), false, true, Some(*s));
        }
        for i in 1..=2 {
            for j in 1..=2 {
                for l in 1..=2 {
                    g.add_prod(&format!("P{i}{j}{l}"), &format!("A{i}{l}"), &format!("B{l}{j}"));
                }
                g.add_sum(&format!("R{i}{j}"), &[(&format!("P{i}{j}1"), false), (&format!("P{i}{j}2"), false)]);
            }
        }
        g
    }

    /// `builtin:winograd`, `builtin:winograd-acc`, `builtin:classical`, or graph text.
    pub fn load(spec: &str) -> Result<TaskGraph, PebbleError> {
        match spec {
            "builtin:winograd" => Ok(TaskGraph::winograd(false)),
            "builtin:winograd-acc" => Ok(TaskGraph::winograd(true)),
            "builtin:classical" => Ok(TaskGraph::classical_2x2()),
            text => TaskGraph::parse(text),
        }
    }

    /// Lines `node <id> <initial|temp|final> [slot]`, `edge <src> <dst> <+|->`
    /// and `prod <id> <op1> <op2>`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<TaskGraph, PebbleError> {
        let mut g = TaskGraph::default();
        let mut ids: HashMap<String, usize> = HashMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = no + 1;
            let err = |msg: String| PebbleError::MalformedGraph { line, msg };
            let words: Vec<&str> = raw.split('#').next().unwrap_or("").split_whitespace().collect();
            let lookup = |name: &str| ids.get(name).copied().ok_or_else(|| err(format!("unknown node `{name}`")));
            match words.as_slice() {
                [] => {}
                ["node", id, kind, rest @ ..] => {
                    if ids.contains_key(*id) {
                        return Err(err(format!("node `{id}` declared twice")));
                    }
                    let (initial, fin) = match *kind {
                        "initial" => (true, false),
                        "temp" => (false, false),
                        "final" => (false, true),
                        other => return Err(err(format!("unknown node kind `{other}`"))),
                    };
                    let slot = match rest {
                        [] => None,
                        [s] => Some(Slot::parse(s).ok_or_else(|| err(format!("unknown slot `{s}`")))?),
                        _ => return Err(err("trailing words".into())),
                    };
                    ids.insert(id.to_string(), g.add_node(id, initial, fin, slot));
                }
                ["edge", s, d, sign] => {
                    let neg = match *sign {
                        "+" => false,
                        "-" => true,
                        other => return Err(err(format!("sign must be + or -, got `{other}`"))),
                    };
                    let (s, d) = (lookup(s)?, lookup(d)?);
                    g.edges.push(Edge { src: s, dst: d, kind: EdgeKind::Sum { neg } });
                }
                ["prod", d, a, b] => {
                    let (d, a, b) = (lookup(d)?, lookup(a)?, lookup(b)?);
                    if g.nodes[d].prod.is_some() {
                        return Err(err("node already has a product".into()));
                    }
                    g.nodes[d].prod = Some((a, b));
                    g.edges.push(Edge { src: a, dst: d, kind: EdgeKind::Prod { pos: 0 } });
                    g.edges.push(Edge { src: b, dst: d, kind: EdgeKind::Prod { pos: 1 } });
                }
                _ => return Err(err(format!("cannot parse `{}`", raw.trim()))),
            }
        }
        g.check().map_err(|msg| PebbleError::MalformedGraph { line: 0, msg })?;
        Ok(g)
    }

    fn check(&self) -> Result<(), String> {
        if self.edges.len() > 128 {
            return Err("at most 128 edges are supported".into());
        }
        for (i, n) in self.nodes.iter().enumerate() {
            let has_in = self.in_edges(i).next().is_some();
            if n.initial && has_in {
                return Err(format!("initial node `{}` has operands", n.name));
            }
            if !n.initial && !has_in {
                return Err(format!("node `{}` has no operands", n.name));
            }
        }
        // Kahn's algorithm: every node must be reachable in topological order.
        let mut indeg: Vec<usize> = (0..self.nodes.len()).map(|i| self.in_edges(i).count()).collect();
        let mut ready: Vec<usize> = (0..self.nodes.len()).filter(|&i| indeg[i] == 0).collect();
        let mut seen = 0;
        while let Some(v) = ready.pop() {
            seen += 1;
            for e in self.out_edges(v) {
                let d = self.edges[e].dst;
                indeg[d] -= 1;
                if indeg[d] == 0 {
                    ready.push(d);
                }
            }
        }
        if seen != self.nodes.len() {
            return Err("graph has a cycle".into());
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            let kind = if n.initial {
                "initial"
            } else if n.fin {
                "final"
            } else {
                "temp"
            };
            let _ = write!(out, "node {} {kind}", n.name);
            if let Some(s) = n.slot {
                let _ = write!(out, " {s}");
            }
            out.push('\n');
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if let Some((a, b)) = n.prod {
                let _ = writeln!(out, "prod {} {} {}", n.name, self.nodes[a].name, self.nodes[b].name);
            }
            for e in self.in_edges(i) {
                if let EdgeKind::Sum { neg } = self.edges[e].kind {
                    let sign = if neg { '-' } else { '+' };
                    let _ = writeln!(out, "edge {} {} {sign}", self.nodes[self.edges[e].src].name, n.name);
                }
            }
        }
        out
    }
}
