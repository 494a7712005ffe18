//! Textual schedule format.
//!
//! ```text
//! schedule std2
//! contract read-only
//! accumulating false
//! shape rect
//! temp X m/2 max(k/2,n/2)
//! 1: S3 = A11 - A21 @ X
//! 3: P7 = Std2(S3*T3) @ C21
//! ```
//!
//! Header lines are optional. Untagged products recurse into the enclosing
//! schedule when their accumulator matches its kind, otherwise into `Std2`
//! (no accumulator) or `Acc3` (with one).

use super::*;
use crate::error::ScheduleError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
}

fn tokenize(s: &str, line: usize) -> Result<Vec<Tok>, ScheduleError> {
    let mut out = Vec::new();
    let mut chars = s.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '+' | '-' | '*' | '(' | ')' => {
                chars.next();
                out.push(match c {
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '(' => Tok::LParen,
                    _ => Tok::RParen,
                });
            }
            c if c.is_ascii_digit() => {
                let mut end = i;
                while let Some(&(j, d)) = chars.peek() {
                    if !d.is_ascii_digit() {
                        break;
                    }
                    end = j + 1;
                    chars.next();
                }
                let v = s[i..end].parse().map_err(|_| syntax(line, "integer too large"))?;
                out.push(Tok::Int(v));
            }
            c if c.is_alphanumeric() || c == '_' => {
                let mut end = i;
                while let Some(&(j, d)) = chars.peek() {
                    if !(d.is_alphanumeric() || d == '_' || d == '\'') {
                        break;
                    }
                    end = j + d.len_utf8();
                    chars.next();
                }
                out.push(Tok::Ident(s[i..end].to_string()));
            }
            other => return Err(syntax(line, &format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

fn syntax(line: usize, msg: &str) -> ScheduleError {
    ScheduleError::Syntax { line, msg: msg.to_string() }
}

#[derive(Clone, Debug)]
enum Raw {
    Name(Coef, String),
    Product(Coef, String, String),
    Call(Coef, Variant, Vec<Raw>),
}

struct Parser<'a> {
    toks: &'a [Tok],
    pos: usize,
    line: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn terms(&mut self) -> Result<Vec<Raw>, ScheduleError> {
        let mut out = Vec::new();
        loop {
            let mut sign = 1;
            match self.peek() {
                Some(Tok::Plus) => self.pos += 1,
                Some(Tok::Minus) => {
                    sign = -1;
                    self.pos += 1;
                }
                _ if out.is_empty() => {}
                None | Some(Tok::RParen) => break,
                Some(_) => return Err(syntax(self.line, "expected `+` or `-` between terms")),
            }
            out.push(self.term(sign)?);
            if matches!(self.peek(), None | Some(Tok::RParen)) {
                break;
            }
        }
        if out.is_empty() {
            return Err(syntax(self.line, "empty expression"));
        }
        Ok(out)
    }

    fn term(&mut self, sign: i64) -> Result<Raw, ScheduleError> {
        let line = self.line;
        let mut coef = Coef { num: sign, alpha: 0, beta: 0 };
        let mut names = Vec::new();
        let mut calls = Vec::new();
        loop {
            match self.toks.get(self.pos).cloned() {
                Some(Tok::Int(v)) => {
                    self.pos += 1;
                    coef.num *= v;
                }
                Some(Tok::Ident(id)) => {
                    self.pos += 1;
                    if id == "alpha" {
                        coef.alpha += 1;
                    } else if id == "beta" {
                        coef.beta += 1;
                    } else if let (Some(v), Some(Tok::LParen)) = (Variant::parse(&id), self.peek()) {
                        self.pos += 1;
                        let inner = self.terms()?;
                        if self.peek() != Some(&Tok::RParen) {
                            return Err(syntax(line, "missing `)`"));
                        }
                        self.pos += 1;
                        calls.push((v, inner));
                    } else {
                        names.push(id);
                    }
                }
                _ => return Err(syntax(line, "expected a scalar, slot or call")),
            }
            if self.peek() == Some(&Tok::Star) {
                self.pos += 1;
            } else {
                break;
            }
        }
        match (names.len(), calls.len()) {
            (1, 0) => Ok(Raw::Name(coef, names.pop().unwrap())),
            (2, 0) => {
                let r = names.pop().unwrap();
                Ok(Raw::Product(coef, names.pop().unwrap(), r))
            }
            (0, 1) => {
                let (v, inner) = calls.pop().unwrap();
                Ok(Raw::Call(coef, v, inner))
            }
            _ => Err(syntax(line, "a term is a slot, a product of two slots, or one call")),
        }
    }
}

/// Product recorded before the untagged default is known.
struct Pending {
    variant: Option<Variant>,
    coef: Coef,
    lhs: String,
    rhs: String,
    acc: Option<LinTerm>,
}

fn build(terms: Vec<Raw>, line: usize) -> Result<(Option<Pending>, Vec<LinTerm>), ScheduleError> {
    let mut product: Option<Pending> = None;
    let mut lin = Vec::new();
    let mut set = |p: Pending| {
        if product.is_some() {
            return Err(syntax(line, "at most one product per instruction"));
        }
        product = Some(p);
        Ok(())
    };
    for t in terms {
        match t {
            Raw::Name(c, s) => lin.push(LinTerm { coef: c, src: s }),
            Raw::Product(c, l, r) => set(Pending { variant: None, coef: c, lhs: l, rhs: r, acc: None })?,
            Raw::Call(c, v, inner) => {
                let (p, inner_lin) = build(inner, line)?;
                let mut p = p.ok_or_else(|| syntax(line, "a call must contain a product"))?;
                if p.variant.is_some() {
                    return Err(syntax(line, "nested calls are not allowed"));
                }
                if inner_lin.len() > 1 {
                    return Err(syntax(line, "a call takes at most one accumulator"));
                }
                p.variant = Some(v);
                p.coef = c.mul(p.coef);
                p.acc = inner_lin.into_iter().next().map(|a| LinTerm { coef: c.mul(a.coef), src: a.src });
                set(p)?;
            }
        }
    }
    Ok((product, lin))
}

struct Line {
    no: usize,
    label: String,
    name: String,
    dst: Slot,
    product: Option<Pending>,
    lin: Vec<LinTerm>,
}

fn parse_instruction(text: &str, no: usize) -> Result<Line, ScheduleError> {
    let (label, rest) = text.split_once(':').ok_or_else(|| syntax(no, "expected `INDEX:`"))?;
    let label = label.trim();
    if label.is_empty() || !label.starts_with(|c: char| c.is_ascii_digit()) {
        return Err(syntax(no, "instruction index must start with a digit"));
    }
    let (name, rest) = rest.split_once('=').ok_or_else(|| syntax(no, "expected `NAME =`"))?;
    let name = name.trim();
    if name.is_empty() || name.contains(char::is_whitespace) {
        return Err(syntax(no, "bad value name"));
    }
    let (rhs, loc) = rest.rsplit_once('@').ok_or_else(|| syntax(no, "expected `@ SLOT`"))?;
    let loc = loc.trim();
    let dst = Slot::parse(loc).ok_or_else(|| ScheduleError::UnknownSlot { line: no, name: loc.to_string() })?;
    let toks = tokenize(rhs, no)?;
    let mut p = Parser { toks: &toks, pos: 0, line: no };
    let terms = p.terms()?;
    if p.pos != toks.len() {
        return Err(syntax(no, "unbalanced `)`"));
    }
    let (product, mut lin) = build(terms, no)?;
    match &product {
        Some(pr) => {
            if lin.len() + pr.acc.is_some() as usize > 1 {
                return Err(syntax(no, "a product takes at most one accumulator"));
            }
        }
        None => {
            if lin.len() > 2 {
                return Err(syntax(no, "at most two slot terms"));
            }
        }
    }
    let mut product = product;
    if let Some(pr) = product.as_mut() {
        if let Some(a) = lin.pop() {
            pr.acc = Some(a);
        }
    }
    Ok(Line { no, label: label.to_string(), name: name.to_string(), dst, product, lin })
}

fn parse_bool(s: &str, line: usize) -> Result<bool, ScheduleError> {
    match s {
        "true" | "yes" => Ok(true),
        "false" | "no" => Ok(false),
        _ => Err(syntax(line, "expected true or false")),
    }
}

pub fn parse_schedule(text: &str) -> Result<Schedule, ScheduleError> {
    let mut name = None;
    let mut contract = None;
    let mut accumulating = None;
    let mut shape = None;
    let mut temps: Vec<TempDecl> = Vec::new();
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let body = raw.split('#').next().unwrap().trim();
        if body.is_empty() {
            continue;
        }
        let mut words = body.split_whitespace();
        let head = words.next().unwrap();
        let args: Vec<&str> = words.collect();
        let one = || match args.as_slice() {
            [a] => Ok(*a),
            _ => Err(syntax(no, &format!("`{head}` takes one argument"))),
        };
        match head {
            "schedule" => name = Some(one()?.to_string()),
            "contract" => {
                contract = Some(OverwritePolicy::parse(one()?).ok_or_else(|| syntax(no, "unknown contract"))?)
            }
            "accumulating" => accumulating = Some(parse_bool(one()?, no)?),
            "shape" => {
                shape = Some(match one()? {
                    "square" => Shape::Square,
                    "rect" | "rectangular" => Shape::Rectangular,
                    _ => return Err(syntax(no, "shape is square or rect")),
                })
            }
            "temp" => {
                let [s, r, c] = args.as_slice() else {
                    return Err(syntax(no, "expected `temp SLOT ROWS COLS`"));
                };
                let slot = Slot::parse(s)
                    .filter(|s| s.role() == Role::Temporary)
                    .ok_or_else(|| ScheduleError::UnknownSlot { line: no, name: s.to_string() })?;
                let dim = |d: &str| HalfDim::parse(d).ok_or_else(|| syntax(no, &format!("bad dimension `{d}`")));
                if temps.iter().any(|t| t.slot == slot) {
                    return Err(syntax(no, "temporary declared twice"));
                }
                temps.push(TempDecl { slot, rows: dim(r)?, cols: dim(c)? });
            }
            _ => lines.push(parse_instruction(body, no)?),
        }
    }

    let contract = contract.unwrap_or(OverwritePolicy::ReadOnly);
    let accumulating = accumulating.unwrap_or_else(|| reads_initial_c(&lines));
    for l in &lines {
        if !contract.allows_write(l.dst) {
            return Err(ScheduleError::ContractViolation {
                line: l.no,
                slot: l.dst.name().to_string(),
                contract: contract.name().to_string(),
            });
        }
        if l.dst.role() == Role::Temporary && !temps.iter().any(|t| t.slot == l.dst) {
            temps.push(TempDecl { slot: l.dst, rows: HalfDim::M, cols: HalfDim::N });
        }
    }
    temps.sort_by_key(|t| t.slot);

    let instructions = lines
        .into_iter()
        .map(|l| {
            let op = match l.product {
                None => Op::Linear(l.lin),
                Some(p) => {
                    let variant = p.variant.unwrap_or(match (p.acc.is_some(), accumulating) {
                        (a, b) if a == b => Variant::SelfCall,
                        (false, _) => Variant::Std2,
                        (true, _) => Variant::Acc3,
                    });
                    Op::Product { variant, coef: p.coef, lhs: p.lhs, rhs: p.rhs, acc: p.acc }
                }
            };
            Instruction { label: l.label, name: l.name, dst: l.dst, op }
        })
        .collect();

    Ok(Schedule {
        name: name.unwrap_or_else(|| "custom".to_string()),
        contract,
        accumulating,
        shape: shape.unwrap_or(Shape::Square),
        temps,
        instructions,
    })
}

/// Whether some operand names a C slot before any value of that name exists.
fn reads_initial_c(lines: &[Line]) -> bool {
    let mut defined = std::collections::HashSet::new();
    for l in lines {
        let mut srcs: Vec<&str> = l.lin.iter().map(|t| t.src.as_str()).collect();
        if let Some(p) = &l.product {
            srcs.extend([p.lhs.as_str(), p.rhs.as_str()]);
            srcs.extend(p.acc.iter().map(|a| a.src.as_str()));
        }
        if srcs
            .iter()
            .any(|s| !defined.contains(*s) && Slot::parse(s).is_some_and(|x| x.role() == Role::InoutC))
        {
            return true;
        }
        defined.insert(l.name.as_str());
    }
    false
}

fn term(c: Coef, body: &str, first: bool) -> String {
    let mag = c.num.unsigned_abs();
    let mut parts = Vec::new();
    if mag != 1 {
        parts.push(mag.to_string());
    }
    parts.extend(std::iter::repeat_n("alpha".to_string(), c.alpha as usize));
    parts.extend(std::iter::repeat_n("beta".to_string(), c.beta as usize));
    parts.push(body.to_string());
    let sign = match (first, c.num < 0) {
        (true, false) => "",
        (true, true) => "-",
        (false, false) => " + ",
        (false, true) => " - ",
    };
    format!("{sign}{}", parts.join("*"))
}

pub(crate) fn render_rhs(op: &Op) -> String {
    match op {
        Op::Linear(ts) => ts.iter().enumerate().map(|(i, t)| term(t.coef, &t.src, i == 0)).collect(),
        Op::Product { variant, coef, lhs, rhs, acc } => {
            let mut inner = term(*coef, &format!("{lhs}*{rhs}"), true);
            if let Some(a) = acc {
                inner.push_str(&term(a.coef, &a.src, false));
            }
            format!("{}({inner})", variant.name())
        }
    }
}

pub fn render_instruction(i: &Instruction) -> String {
    format!("{}: {} = {} @ {}", i.label, i.name, render_rhs(&i.op), i.dst)
}

/// Canonical text: header lines, then one instruction per line.
pub fn render_schedule(s: &Schedule) -> String {
    let mut out = format!(
        "schedule {}\ncontract {}\naccumulating {}\nshape {}\n",
        s.name,
        s.contract,
        s.accumulating,
        match s.shape {
            Shape::Square => "square",
            Shape::Rectangular => "rect",
        }
    );
    for t in &s.temps {
        out.push_str(&format!("temp {} {} {}\n", t.slot, t.rows.name(), t.cols.name()));
    }
    for i in &s.instructions {
        out.push_str(&render_instruction(i));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_leaf_add() {
        let s = parse_schedule("1: S1 = A21 + A22 @ X").unwrap();
        assert_eq!(s.instructions.len(), 1);
        let i = &s.instructions[0];
        assert_eq!(i.variant(), Variant::LeafAdd);
        assert_eq!(i.dst, Slot::X);
        assert_eq!(
            i.op,
            Op::Linear(vec![
                LinTerm { coef: Coef::ONE, src: "A21".into() },
                LinTerm { coef: Coef::ONE, src: "A22".into() }
            ])
        );
        assert!(!s.accumulating);
    }

    #[test]
    fn contract_checked_on_destinations() {
        assert!(parse_schedule("contract read-only\n1: C11 = IP(A11*B11) @ C11").is_ok());
        let e = parse_schedule("contract read-only\n1: A11 = A11 - A21 @ A11").unwrap_err();
        assert!(matches!(e, ScheduleError::ContractViolation { line: 2, .. }));
        assert!(parse_schedule("contract overwrite-A\n1: S = A11 - A21 @ A11").is_ok());
        assert!(parse_schedule("contract overwrite-A\n1: S = B11 - B21 @ B11").is_err());
    }

    #[test]
    fn errors_carry_lines() {
        assert!(matches!(parse_schedule("1: S = A11 + @ X"), Err(ScheduleError::Syntax { line: 1, .. })));
        assert!(matches!(parse_schedule("\n1: S = A11 @ W"), Err(ScheduleError::UnknownSlot { line: 2, .. })));
        assert!(parse_schedule("1: S = A11*B11 + A12*B21 @ C11").is_err());
        assert!(parse_schedule("1: S = A11 + A12 + A21 @ X").is_err());
        assert!(parse_schedule("1: S = IP(A11*B11 @ X").is_err());
        assert!(parse_schedule("1: S = A11*B11*B12 @ X").is_err());
    }

    #[test]
    fn scalars_and_accumulators() {
        let s = parse_schedule("accumulating true\n1: C11 = alpha*A11*B11 - beta*C11 @ C11").unwrap();
        match &s.instructions[0].op {
            Op::Product { variant, coef, acc, .. } => {
                assert_eq!(*variant, Variant::SelfCall);
                assert_eq!(*coef, Coef::ALPHA);
                assert_eq!(acc.as_ref().unwrap().coef, Coef::BETA.neg());
            }
            _ => panic!(),
        }
        let t = parse_schedule("1: U = -alpha*AccR(A22*T - U3) @ C11").unwrap();
        match &t.instructions[0].op {
            Op::Product { variant, coef, acc, .. } => {
                assert_eq!(*variant, Variant::AccR);
                assert_eq!(*coef, Coef::ALPHA.neg());
                assert_eq!(acc.as_ref().unwrap().coef, Coef::ALPHA);
            }
            _ => panic!(),
        }
        assert!(t.accumulating == false);
    }

    #[test]
    fn untagged_defaults() {
        let s = parse_schedule("1: P = A11*B11 @ X\n2: C11 = A12*B21 + C11 @ C11").unwrap();
        assert!(s.accumulating);
        assert_eq!(s.instructions[0].variant(), Variant::Std2);
        assert_eq!(s.instructions[1].variant(), Variant::SelfCall);
    }

    #[test]
    fn render_round_trip() {
        let text = "schedule t\ncontract overwrite-both\naccumulating true\nshape square\ntemp X m/2 n/2\n\
                    1: S = A11 - A21 @ X\n2: P = AcLR(alpha*S*B11 - 2*beta*C11) @ C11\n";
        let s = parse_schedule(text).unwrap();
        assert_eq!(render_schedule(&s), text);
        assert_eq!(parse_schedule(&render_schedule(&s)).unwrap(), s);
    }
}
