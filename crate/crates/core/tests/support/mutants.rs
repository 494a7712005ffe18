//! Deliberately broken copies of the builtin schedules.

use winomem::schedule::{builtin, Op, Schedule, ScheduleId, Slot};

fn reads(op: &Op) -> Vec<&str> {
    match op {
        Op::Linear(terms) => terms.iter().map(|t| t.src.as_str()).collect(),
        Op::Product { lhs, rhs, acc, .. } => {
            let mut v = vec![lhs.as_str(), rhs.as_str()];
            v.extend(acc.iter().map(|t| t.src.as_str()));
            v
        }
    }
}

fn flip_sign(s: &Schedule, from_end: bool) -> Option<Schedule> {
    let mut m = s.clone();
    let n = m.instructions.len();
    let mut order: Vec<usize> = (0..n).collect();
    if from_end {
        order.reverse();
    }
    let i = order.into_iter().find(|&i| matches!(&m.instructions[i].op, Op::Linear(t) if t.len() >= 2))?;
    if let Op::Linear(terms) = &mut m.instructions[i].op {
        let last = terms.last_mut()?;
        last.coef = last.coef.neg();
    }
    Some(m)
}

fn swap_dependent_rows(s: &Schedule) -> Option<Schedule> {
    let i = (0..s.instructions.len() - 1).find(|&i| {
        let name = s.instructions[i].name.as_str();
        reads(&s.instructions[i + 1].op).contains(&name)
    })?;
    let mut m = s.clone();
    m.instructions.swap(i, i + 1);
    Some(m)
}

fn misplace_result(s: &Schedule) -> Option<Schedule> {
    let cs = [Slot::C11, Slot::C12, Slot::C21, Slot::C22];
    let i = (0..s.instructions.len()).rev().find(|&i| cs.contains(&s.instructions[i].dst))?;
    let mut m = s.clone();
    let k = cs.iter().position(|&c| c == m.instructions[i].dst).unwrap();
    m.instructions[i].dst = cs[(k + 1) % 4];
    Some(m)
}

/// `(description, mutant)` pairs: two sign flips, a row swap and a misplaced
/// result for every builtin.
pub fn all() -> Vec<(String, Schedule)> {
    let mut out = Vec::new();
    for id in ScheduleId::ALL {
        let s = builtin(id);
        let cases = [
            ("first sign flip", flip_sign(&s, false)),
            ("last sign flip", flip_sign(&s, true)),
            ("row swap", swap_dependent_rows(&s)),
            ("wrong location", misplace_result(&s)),
        ];
        for (what, m) in cases {
            out.push((format!("{id}: {what}"), m.unwrap_or_else(|| panic!("{id} has no {what} site"))));
        }
    }
    out
}
