//! Schedules as data: slots, instructions, the textual form, the builtin
//! catalog and the symbolic validator.

mod catalog;
mod dsl;
mod frame;
mod symbolic;

use std::fmt;

pub use catalog::{builtin, builtin_text};
pub use dsl::{parse_schedule, render_instruction, render_schedule};
pub(crate) use dsl::render_rhs;
pub(crate) use frame::{Frame, Resolve};
pub use symbolic::{validate, Check, Issue, ValidationReport};

/// A memory location inside one recursion level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    A11,
    A12,
    A21,
    A22,
    B11,
    B12,
    B21,
    B22,
    C11,
    C12,
    C21,
    C22,
    X,
    Y,
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    InputA,
    InputB,
    InoutC,
    Temporary,
}

impl Slot {
    pub const ALL: [Slot; 15] = [
        Slot::A11,
        Slot::A12,
        Slot::A21,
        Slot::A22,
        Slot::B11,
        Slot::B12,
        Slot::B21,
        Slot::B22,
        Slot::C11,
        Slot::C12,
        Slot::C21,
        Slot::C22,
        Slot::X,
        Slot::Y,
        Slot::Z,
    ];
    pub const TEMPS: [Slot; 3] = [Slot::X, Slot::Y, Slot::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn role(self) -> Role {
        match self.index() {
            0..=3 => Role::InputA,
            4..=7 => Role::InputB,
            8..=11 => Role::InoutC,
            _ => Role::Temporary,
        }
    }

    /// Quadrant position `0..4` (row-major) for A, B and C slots.
    pub fn quadrant(self) -> Option<usize> {
        match self.role() {
            Role::Temporary => None,
            _ => Some(self.index() % 4),
        }
    }

    pub fn name(self) -> &'static str {
        [
            "A11", "A12", "A21", "A22", "B11", "B12", "B21", "B22", "C11", "C12", "C21", "C22", "X", "Y", "Z",
        ][self.index()]
    }

    pub fn parse(s: &str) -> Option<Slot> {
        Slot::ALL.into_iter().find(|x| x.name() == s)
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Recursion tag carried by a product instruction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Classic,
    Std2,
    Acc3,
    IP,
    OvL,
    OvR,
    AcLR,
    AccR,
    Acc2,
    AcR,
    /// Recurse into the enclosing schedule.
    SelfCall,
    /// Not a product: a linear combination of blocks.
    LeafAdd,
}

impl Variant {
    pub const CALLABLE: [Variant; 11] = [
        Variant::Classic,
        Variant::Std2,
        Variant::Acc3,
        Variant::IP,
        Variant::OvL,
        Variant::OvR,
        Variant::AcLR,
        Variant::AccR,
        Variant::Acc2,
        Variant::AcR,
        Variant::SelfCall,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Classic => "Classic",
            Variant::Std2 => "Std2",
            Variant::Acc3 => "Acc3",
            Variant::IP => "IP",
            Variant::OvL => "OvL",
            Variant::OvR => "OvR",
            Variant::AcLR => "AcLR",
            Variant::AccR => "AccR",
            Variant::Acc2 => "Acc2",
            Variant::AcR => "AcR",
            Variant::SelfCall => "Self",
            Variant::LeafAdd => "LeafAdd",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        if s == "Acc" {
            return Some(Variant::Acc2);
        }
        Variant::CALLABLE.into_iter().find(|v| v.name() == s)
    }

    /// The builtin a named tag refers to (`None` for Classic, Self and LeafAdd).
    pub fn schedule_id(self) -> Option<ScheduleId> {
        Some(match self {
            Variant::Std2 => ScheduleId::Std2,
            Variant::Acc3 => ScheduleId::Acc3,
            Variant::IP => ScheduleId::Ip,
            Variant::OvL => ScheduleId::Ovl,
            Variant::OvR => ScheduleId::Ovr,
            Variant::AcLR => ScheduleId::Aclr,
            Variant::AccR => ScheduleId::Accr,
            Variant::Acc2 => ScheduleId::Acc2,
            Variant::AcR => ScheduleId::Acr,
            Variant::Classic | Variant::SelfCall | Variant::LeafAdd => return None,
        })
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The builtin schedule catalog.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScheduleId {
    Std2,
    Acc3,
    Ip,
    Ovl,
    Ovl2,
    Ovr,
    Aclr,
    Accr,
    Acc2,
    Acr,
}

impl ScheduleId {
    pub const ALL: [ScheduleId; 10] = [
        ScheduleId::Std2,
        ScheduleId::Acc3,
        ScheduleId::Ip,
        ScheduleId::Ovl,
        ScheduleId::Ovl2,
        ScheduleId::Ovr,
        ScheduleId::Aclr,
        ScheduleId::Accr,
        ScheduleId::Acc2,
        ScheduleId::Acr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScheduleId::Std2 => "std2",
            ScheduleId::Acc3 => "acc3",
            ScheduleId::Ip => "ip",
            ScheduleId::Ovl => "ovl",
            ScheduleId::Ovl2 => "ovl2",
            ScheduleId::Ovr => "ovr",
            ScheduleId::Aclr => "aclr",
            ScheduleId::Accr => "accr",
            ScheduleId::Acc2 => "acc2",
            ScheduleId::Acr => "acr",
        }
    }

    pub fn parse(s: &str) -> Option<ScheduleId> {
        ScheduleId::ALL.into_iter().find(|x| x.name() == s)
    }

    pub fn contract(self) -> OverwritePolicy {
        match self {
            ScheduleId::Std2 | ScheduleId::Acc3 | ScheduleId::Acc2 => OverwritePolicy::ReadOnly,
            ScheduleId::Ip | ScheduleId::Aclr => OverwritePolicy::OverwriteBoth,
            ScheduleId::Ovl | ScheduleId::Ovl2 => OverwritePolicy::OverwriteA,
            ScheduleId::Ovr | ScheduleId::Accr | ScheduleId::Acr => OverwritePolicy::OverwriteB,
        }
    }

    pub fn accumulating(self) -> bool {
        matches!(
            self,
            ScheduleId::Acc3 | ScheduleId::Aclr | ScheduleId::Accr | ScheduleId::Acc2 | ScheduleId::Acr
        )
    }

    pub fn shape(self) -> Shape {
        match self {
            ScheduleId::Std2 | ScheduleId::Acc3 | ScheduleId::Acr => Shape::Rectangular,
            _ => Shape::Square,
        }
    }
}

impl fmt::Display for ScheduleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which inputs a schedule may destroy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OverwritePolicy {
    ReadOnly,
    OverwriteA,
    OverwriteB,
    OverwriteBoth,
}

impl OverwritePolicy {
    pub fn overwrites_a(self) -> bool {
        matches!(self, OverwritePolicy::OverwriteA | OverwritePolicy::OverwriteBoth)
    }

    pub fn overwrites_b(self) -> bool {
        matches!(self, OverwritePolicy::OverwriteB | OverwritePolicy::OverwriteBoth)
    }

    pub fn from_sides(a: bool, b: bool) -> Self {
        match (a, b) {
            (false, false) => OverwritePolicy::ReadOnly,
            (true, false) => OverwritePolicy::OverwriteA,
            (false, true) => OverwritePolicy::OverwriteB,
            (true, true) => OverwritePolicy::OverwriteBoth,
        }
    }

    pub fn allows_write(self, slot: Slot) -> bool {
        match slot.role() {
            Role::InputA => self.overwrites_a(),
            Role::InputB => self.overwrites_b(),
            _ => true,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OverwritePolicy::ReadOnly => "read-only",
            OverwritePolicy::OverwriteA => "overwrite-A",
            OverwritePolicy::OverwriteB => "overwrite-B",
            OverwritePolicy::OverwriteBoth => "overwrite-both",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "read-only" | "none" => Some(OverwritePolicy::ReadOnly),
            "overwrite-A" | "A" => Some(OverwritePolicy::OverwriteA),
            "overwrite-B" | "B" => Some(OverwritePolicy::OverwriteB),
            "overwrite-both" | "both" => Some(OverwritePolicy::OverwriteBoth),
            _ => None,
        }
    }
}

impl fmt::Display for OverwritePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Shape {
    Square,
    Rectangular,
}

/// One half-dimension of a recursion level, as a function of `(m, k, n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HalfDim {
    M,
    K,
    N,
    MaxMK,
    MaxKN,
}

impl HalfDim {
    pub fn eval(self, m: usize, k: usize, n: usize) -> usize {
        match self {
            HalfDim::M => m / 2,
            HalfDim::K => k / 2,
            HalfDim::N => n / 2,
            HalfDim::MaxMK => m.max(k) / 2,
            HalfDim::MaxKN => k.max(n) / 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HalfDim::M => "m/2",
            HalfDim::K => "k/2",
            HalfDim::N => "n/2",
            HalfDim::MaxMK => "max(m/2,k/2)",
            HalfDim::MaxKN => "max(k/2,n/2)",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [HalfDim::M, HalfDim::K, HalfDim::N, HalfDim::MaxMK, HalfDim::MaxKN]
            .into_iter()
            .find(|d| d.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TempDecl {
    pub slot: Slot,
    pub rows: HalfDim,
    pub cols: HalfDim,
}

/// Formal scalar factor `num * alpha^a * beta^b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Coef {
    pub num: i64,
    pub alpha: u8,
    pub beta: u8,
}

impl Coef {
    pub const ONE: Coef = Coef { num: 1, alpha: 0, beta: 0 };
    pub const MINUS_ONE: Coef = Coef { num: -1, alpha: 0, beta: 0 };
    pub const ALPHA: Coef = Coef { num: 1, alpha: 1, beta: 0 };
    pub const BETA: Coef = Coef { num: 1, alpha: 0, beta: 1 };

    pub fn neg(self) -> Coef {
        Coef { num: -self.num, ..self }
    }

    pub fn mul(self, o: Coef) -> Coef {
        Coef { num: self.num * o.num, alpha: self.alpha + o.alpha, beta: self.beta + o.beta }
    }

    pub fn eval(self, m: crate::ring::Modulus, alpha: u32, beta: u32) -> u32 {
        let mut v = m.from_i64(self.num);
        for _ in 0..self.alpha {
            v = m.mul(v, alpha);
        }
        for _ in 0..self.beta {
            v = m.mul(v, beta);
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinTerm {
    pub coef: Coef,
    pub src: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    /// `dst = sum coef * src` over one or two terms (a single term is a copy).
    Linear(Vec<LinTerm>),
    /// `dst = coef * lhs * rhs [+ acc]`, computed by a recursive call.
    /// When present, the accumulator must live in the destination slot.
    Product { variant: Variant, coef: Coef, lhs: String, rhs: String, acc: Option<LinTerm> },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Instruction {
    /// Row label: a number, optionally suffixed (`18bis`).
    pub label: String,
    /// Name of the value produced (`S3`, `P7`, `U2`, ...).
    pub name: String,
    pub dst: Slot,
    pub op: Op,
}

impl Instruction {
    pub fn variant(&self) -> Variant {
        match &self.op {
            Op::Linear(_) => Variant::LeafAdd,
            Op::Product { variant, .. } => *variant,
        }
    }

    pub fn is_product(&self) -> bool {
        matches!(self.op, Op::Product { .. })
    }

    /// Names read by this instruction, in order.
    pub fn operands(&self) -> Vec<&str> {
        match &self.op {
            Op::Linear(t) => t.iter().map(|t| t.src.as_str()).collect(),
            Op::Product { lhs, rhs, acc, .. } => {
                let mut v = vec![lhs.as_str(), rhs.as_str()];
                if let Some(a) = acc {
                    v.push(a.src.as_str());
                }
                v
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub name: String,
    pub contract: OverwritePolicy,
    pub accumulating: bool,
    pub shape: Shape,
    pub temps: Vec<TempDecl>,
    pub instructions: Vec<Instruction>,
}

impl Schedule {
    pub fn product_count(&self) -> usize {
        self.instructions.iter().filter(|i| i.is_product()).count()
    }

    /// `true` at instructions that perform the last write to a C quadrant.
    pub fn final_flags(&self) -> Vec<bool> {
        let mut flags = vec![false; self.instructions.len()];
        for c in [Slot::C11, Slot::C12, Slot::C21, Slot::C22] {
            if let Some(pos) = self.instructions.iter().rposition(|i| i.dst == c) {
                flags[pos] = true;
            }
        }
        flags
    }

    pub fn temp(&self, slot: Slot) -> Option<&TempDecl> {
        self.temps.iter().find(|t| t.slot == slot)
    }

    /// Which inputs a call tagged `v` may destroy, from inside this schedule.
    pub fn callee_contract(&self, v: Variant) -> OverwritePolicy {
        match v {
            Variant::SelfCall => self.contract,
            other => other.schedule_id().map(|id| id.contract()).unwrap_or(OverwritePolicy::ReadOnly),
        }
    }

    /// Whether a call tagged `v` computes `C <- alpha*A*B + beta*C`.
    pub fn callee_accumulates(&self, v: Variant) -> Option<bool> {
        match v {
            Variant::SelfCall => Some(self.accumulating),
            Variant::Classic => None,
            other => other.schedule_id().map(|id| id.accumulating()),
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_schedule(self))
    }
}
