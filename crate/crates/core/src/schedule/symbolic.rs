//! Static checks of a schedule: operand order, overwrite contract, symbolic
//! correctness over noncommutative formal products, and block dimensions.

use std::collections::BTreeMap;
use std::fmt;

use super::*;

/// Formal symbols: A quadrants are 0..4, B quadrants 4..8, initial C quadrants 8..12.
type Word = Vec<u8>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Mono {
    alpha: u8,
    beta: u8,
    word: Word,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Poly(BTreeMap<Mono, i64>);

impl Poly {
    fn atom(sym: u8) -> Poly {
        Poly(BTreeMap::from([(Mono { alpha: 0, beta: 0, word: vec![sym] }, 1)]))
    }

    fn add_scaled(&mut self, other: &Poly, c: Coef) {
        for (m, v) in &other.0 {
            let key = Mono { alpha: m.alpha + c.alpha, beta: m.beta + c.beta, word: m.word.clone() };
            let e = self.0.entry(key).or_insert(0);
            *e += v * c.num;
        }
        self.0.retain(|_, v| *v != 0);
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::default();
        for (a, x) in &self.0 {
            for (b, y) in &other.0 {
                let mut word = a.word.clone();
                word.extend_from_slice(&b.word);
                let key = Mono { alpha: a.alpha + b.alpha, beta: a.beta + b.beta, word };
                *out.0.entry(key).or_insert(0) += x * y;
            }
        }
        out.0.retain(|_, v| *v != 0);
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, v)) in self.0.iter().enumerate() {
            let c = Coef { num: *v, alpha: m.alpha, beta: m.beta };
            let body: Vec<&str> = m.word.iter().map(|&s| Slot::ALL[s as usize].name()).collect();
            let t = LinTerm { coef: c, src: body.join("*") };
            let rendered = render_rhs(&Op::Linear(vec![t]));
            match (i, rendered.strip_prefix('-')) {
                (0, _) => f.write_str(&rendered)?,
                (_, Some(rest)) => write!(f, " - {rest}")?,
                (_, None) => write!(f, " + {rendered}")?,
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Check {
    Order,
    Contract,
    Symbolic,
    Dimensions,
    Structure,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Issue {
    pub check: Check,
    /// Instruction label, when the issue belongs to one instruction.
    pub label: Option<String>,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub schedule: String,
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn passed(&self, check: Check) -> bool {
        !self.issues.iter().any(|i| i.check == check)
    }

    fn push(&mut self, check: Check, label: Option<&str>, message: String) {
        self.issues.push(Issue { check, label: label.map(str::to_string), message });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in [Check::Order, Check::Contract, Check::Symbolic, Check::Dimensions, Check::Structure] {
            writeln!(f, "{:<10} {}", format!("{c:?}"), if self.passed(c) { "ok" } else { "FAIL" })?;
        }
        for i in &self.issues {
            match &i.label {
                Some(l) => writeln!(f, "  [{:?}] row {l}: {}", i.check, i.message)?,
                None => writeln!(f, "  [{:?}] {}", i.check, i.message)?,
            }
        }
        Ok(())
    }
}

fn describe(r: &Resolve, name: &str) -> String {
    match r {
        Resolve::Ok(_) => unreachable!(),
        Resolve::Stale { slot } => format!("`{name}` in {slot} was overwritten before this read"),
        Resolve::Uninitialized { slot } => format!("{slot} holds no defined value here"),
        Resolve::Undefined => format!("`{name}` is neither a defined value nor a slot"),
    }
}

/// Runs every check and collects the failures.
pub fn validate(s: &Schedule) -> ValidationReport {
    let mut report = ValidationReport { schedule: s.name.clone(), issues: Vec::new() };
    symbolic_pass(s, &mut report);
    dimension_pass(s, &mut report);
    report
}

fn symbolic_pass(s: &Schedule, report: &mut ValidationReport) {
    let mut frame: Frame<Poly> = Frame::new(|slot| match slot.role() {
        Role::InputA | Role::InputB => Some(Poly::atom(slot.index() as u8)),
        Role::InoutC if s.accumulating => Some(Poly::atom(slot.index() as u8)),
        _ => None,
    });
    for ins in &s.instructions {
        let label = Some(ins.label.as_str());
        if !s.contract.allows_write(ins.dst) {
            report.push(Check::Contract, label, format!("writes {} under {}", ins.dst, s.contract));
        }
        let mut slots = Vec::new();
        for name in ins.operands() {
            match frame.resolve(name) {
                Resolve::Ok(slot) => slots.push(slot),
                r => report.push(Check::Order, label, describe(&r, name)),
            }
        }
        if slots.len() != ins.operands().len() {
            frame.clobber(ins.dst);
            continue;
        }
        let get = |frame: &Frame<Poly>, slot: Slot| frame.content(slot).cloned().unwrap_or_default();
        let value = match &ins.op {
            Op::Linear(terms) => {
                let mut p = Poly::default();
                for (t, &slot) in terms.iter().zip(&slots) {
                    p.add_scaled(&get(&frame, slot), t.coef);
                }
                p
            }
            Op::Product { variant, coef, acc, .. } => {
                let (l, r) = (slots[0], slots[1]);
                if l == ins.dst || r == ins.dst {
                    report.push(Check::Structure, label, format!("product writes over its own operand in {}", ins.dst));
                }
                if l == r {
                    report.push(Check::Structure, label, format!("both operands live in {l}"));
                }
                if let Some(a) = acc {
                    if slots[2] != ins.dst {
                        report.push(
                            Check::Structure,
                            label,
                            format!("accumulator `{}` lives in {}, not in {}", a.src, slots[2], ins.dst),
                        );
                    }
                    if s.callee_accumulates(*variant) == Some(false) {
                        report.push(Check::Structure, label, format!("{variant} cannot accumulate"));
                    }
                }
                let mut p = Poly::default();
                p.add_scaled(&get(&frame, l).mul(&get(&frame, r)), *coef);
                if let Some(a) = acc {
                    p.add_scaled(&get(&frame, slots[2]), a.coef);
                }
                let callee = s.callee_contract(*variant);
                for (slot, destroyed) in [(l, callee.overwrites_a()), (r, callee.overwrites_b())] {
                    if destroyed {
                        if !s.contract.allows_write(slot) {
                            report.push(
                                Check::Contract,
                                label,
                                format!("{variant} destroys {slot} under {}", s.contract),
                            );
                        }
                        frame.clobber(slot);
                    }
                }
                p
            }
        };
        frame.define(&ins.name, ins.dst, value);
    }

    for c in [Slot::C11, Slot::C12, Slot::C21, Slot::C22] {
        let q = c.quadrant().unwrap();
        let (i, j) = (q / 2, q % 2);
        let scale = if s.accumulating { Coef::ALPHA } else { Coef::ONE };
        let mut want = Poly::default();
        for l in 0..2 {
            let a = Poly::atom((2 * i + l) as u8);
            let b = Poly::atom((4 + 2 * l + j) as u8);
            want.add_scaled(&a.mul(&b), scale);
        }
        if s.accumulating {
            want.add_scaled(&Poly::atom(c.index() as u8), Coef::BETA);
        }
        match frame.content(c) {
            Some(got) if *got == want => {}
            Some(got) => report.push(Check::Symbolic, None, format!("{c} = {got}, expected {want}")),
            None => report.push(Check::Symbolic, None, format!("{c} holds garbage at the end")),
        }
    }
}

/// Shapes the dimension check samples: square, or every triple over {2,4,8}.
fn sample_shapes(shape: Shape) -> Vec<(usize, usize, usize)> {
    let sizes = [2, 4, 8];
    match shape {
        Shape::Square => sizes.iter().map(|&n| (n, n, n)).collect(),
        Shape::Rectangular => {
            let mut v = Vec::new();
            for m in sizes {
                for k in sizes {
                    for n in sizes {
                        v.push((m, k, n));
                    }
                }
            }
            v
        }
    }
}

fn slot_dims(s: &Schedule, slot: Slot, (m, k, n): (usize, usize, usize)) -> Option<(usize, usize)> {
    match slot.role() {
        Role::InputA => Some((m / 2, k / 2)),
        Role::InputB => Some((k / 2, n / 2)),
        Role::InoutC => Some((m / 2, n / 2)),
        Role::Temporary => s.temp(slot).map(|t| (t.rows.eval(m, k, n), t.cols.eval(m, k, n))),
    }
}

fn dimension_pass(s: &Schedule, report: &mut ValidationReport) {
    for slot in Slot::TEMPS {
        if s.temp(slot).is_none() && s.instructions.iter().any(|i| i.dst == slot) {
            report.push(Check::Dimensions, None, format!("temporary {slot} is used but not declared"));
            return;
        }
    }
    let mut reported = std::collections::HashSet::new();
    for shape in sample_shapes(s.shape) {
        let mut frame: Frame<(usize, usize)> = Frame::new(|slot| slot_dims(s, slot, shape));
        for ins in &s.instructions {
            let mut fail = |msg: String| {
                if reported.insert(ins.label.clone()) {
                    report.push(
                        Check::Dimensions,
                        Some(&ins.label),
                        format!("at (m,k,n) = {shape:?}: {msg}"),
                    );
                }
            };
            let dims: Option<Vec<(usize, usize)>> = ins
                .operands()
                .iter()
                .map(|name| match frame.resolve(name) {
                    Resolve::Ok(slot) => frame.content(slot).copied(),
                    _ => None,
                })
                .collect();
            let Some(dims) = dims else {
                // order problems are reported by the symbolic pass
                frame.clobber(ins.dst);
                continue;
            };
            let value = match &ins.op {
                Op::Linear(_) => {
                    if dims.iter().any(|d| *d != dims[0]) {
                        fail(format!("adding blocks of shapes {dims:?}"));
                    }
                    dims[0]
                }
                Op::Product { variant, .. } => {
                    let (l, r) = (dims[0], dims[1]);
                    if l.1 != r.0 {
                        fail(format!("product of {}x{} by {}x{}", l.0, l.1, r.0, r.1));
                    }
                    let out = (l.0, r.1);
                    if dims.len() == 3 && dims[2] != out {
                        fail(format!("accumulator {:?} for a {:?} product", dims[2], out));
                    }
                    let square_callee = match variant {
                        Variant::SelfCall => s.shape == Shape::Square,
                        v => v.schedule_id().is_some_and(|id| id.shape() == Shape::Square),
                    };
                    if square_callee && (l.0 != l.1 || r.0 != r.1) {
                        fail(format!("{variant} needs square operands, got {l:?} and {r:?}"));
                    }
                    out
                }
            };
            let cap = slot_dims(s, ins.dst, shape).unwrap_or((0, 0));
            if value.0 > cap.0 || value.1 > cap.1 {
                fail(format!("{}x{} value does not fit in {} ({}x{})", value.0, value.1, ins.dst, cap.0, cap.1));
            }
            if let Op::Product { variant, .. } = &ins.op {
                let callee = s.callee_contract(*variant);
                let names = ins.operands();
                for (name, destroyed) in [(names[0], callee.overwrites_a()), (names[1], callee.overwrites_b())] {
                    if let (true, Resolve::Ok(slot)) = (destroyed, frame.resolve(name)) {
                        frame.clobber(slot);
                    }
                }
            }
            frame.define(&ins.name, ins.dst, value);
        }
    }
}
