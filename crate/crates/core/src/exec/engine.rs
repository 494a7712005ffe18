//! The recursive interpreter shared by `multiply` and the drivers.

use std::sync::Arc;

use crate::error::ExecError;
use crate::meter::{CallEvent, CostMeter};
use crate::ring::{block_lincomb, block_scale, classical_mul, Elem, MatView, Workspace};
use crate::schedule::{builtin, Frame, Instruction, Op, Resolve, Schedule, Shape, Slot, Variant};

/// A view handed to a multiplication, and whether the callee may destroy it.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Bound {
    pub view: MatView,
    pub writable: bool,
}

impl Bound {
    pub fn constant(view: MatView) -> Self {
        Bound { view, writable: false }
    }

    pub fn scratch(view: MatView) -> Self {
        Bound { view, writable: true }
    }
}

/// Where a recursive product goes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Dispatch {
    Classic,
    Schedule(Arc<Schedule>),
}

/// The schedule a product instruction recurses into. `Self` is the enclosing
/// schedule; named tags are the builtins of that name.
pub fn dispatch_policy(enclosing: &Arc<Schedule>, ins: &Instruction) -> Option<Dispatch> {
    match ins.variant() {
        Variant::LeafAdd => None,
        Variant::Classic => Some(Dispatch::Classic),
        Variant::SelfCall => Some(Dispatch::Schedule(enclosing.clone())),
        v => Some(Dispatch::Schedule(builtin(v.schedule_id().expect("named variant")))),
    }
}

/// Temporaries carved out of a caller-designated region instead of the heap.
///
/// Rectangles are cut guillotine style; a call restores the free list it
/// found when it returns, so usage is stack shaped.
#[derive(Clone, Debug)]
pub(crate) struct Arena {
    free: Vec<MatView>,
}

impl Arena {
    pub fn new(region: MatView) -> Self {
        Arena { free: vec![region] }
    }

    fn take(&mut self, rows: usize, cols: usize) -> Result<MatView, ExecError> {
        let best = self
            .free
            .iter()
            .enumerate()
            .filter(|(_, r)| r.rows >= rows && r.cols >= cols)
            .min_by_key(|(_, r)| r.rows * r.cols)
            .map(|(i, _)| i)
            .ok_or(ExecError::ScratchExhausted { rows, cols })?;
        let r = self.free.swap_remove(best);
        let right = r.sub(0, cols, rows, r.cols - cols)?;
        let below = r.sub(rows, 0, r.rows - rows, r.cols)?;
        self.free.extend([right, below].into_iter().filter(|v| !v.is_empty()));
        Ok(r.sub(0, 0, rows, cols)?)
    }
}

enum Temp {
    Heap(MatView),
    Carved,
}

pub(crate) struct Engine<'a> {
    pub ws: &'a mut Workspace,
    pub meter: &'a mut CostMeter,
    pub cutoff: usize,
}

fn is_unit(md: crate::ring::Modulus, x: Elem) -> bool {
    x == 1 || x == md.minus_one()
}

impl Engine<'_> {
    /// `C <- alpha*A*B (+ beta*C)` with `target`, `None` meaning classical.
    #[allow(clippy::too_many_arguments)]
    pub fn mult(
        &mut self,
        target: Option<&Arc<Schedule>>,
        a: Bound,
        b: Bound,
        c: MatView,
        alpha: Elem,
        beta: Option<Elem>,
        arena: &mut Option<Arena>,
        depth: usize,
    ) -> Result<(), ExecError> {
        let (m, k, n) = (a.view.rows, a.view.cols, b.view.cols);
        if b.view.rows != k || c.dims() != (m, n) {
            return Err(ExecError::Dimension(format!(
                "C {}x{} <- A {}x{} * B {}x{}",
                c.rows, c.cols, m, k, b.view.rows, n
            )));
        }
        let beta = beta.filter(|&x| x != 0);
        let sched = match target {
            Some(s) if m.min(k).min(n) > self.cutoff => s,
            _ => return self.leaf(a.view, b.view, c, alpha, beta),
        };
        if sched.shape == Shape::Square && !(m == k && k == n) {
            return Err(ExecError::ShapeUnsupported(format!("{} needs square inputs, got {m}x{k}x{n}", sched.name)));
        }
        if !sched.accumulating && beta.is_some() {
            return Err(ExecError::BadSchedule(format!("{} does not accumulate but was given beta", sched.name)));
        }
        if (sched.contract.overwrites_a() && !a.writable) || (sched.contract.overwrites_b() && !b.writable) {
            return Err(ExecError::ContractBreach(format!(
                "{} ({}) called on a constant operand",
                sched.name,
                sched.contract.name()
            )));
        }
        if m % 2 + k % 2 + n % 2 > 0 {
            return self.peel(sched, a, b, c, alpha, beta, arena, depth);
        }
        self.run(sched, a, b, c, alpha, beta, arena, depth)
    }

    pub fn leaf(&mut self, a: MatView, b: MatView, c: MatView, alpha: Elem, beta: Option<Elem>) -> Result<(), ExecError> {
        let md = self.ws.modulus();
        let (m, k, n) = (a.rows as u64, a.cols as u64, b.cols as u64);
        classical_mul(self.ws, &c, &a, &b, alpha, beta)?;
        self.meter.mults += m * k * n;
        self.meter.adds += m * n * k.saturating_sub(1);
        if !is_unit(md, alpha) {
            self.meter.mults += m * n;
        }
        if let Some(bv) = beta {
            self.meter.adds += m * n;
            if !is_unit(md, bv) {
                self.meter.mults += m * n;
            }
        }
        Ok(())
    }

    /// Runs the even-sized core with `sched` and finishes the trailing
    /// odd row, column and inner strip classically.
    #[allow(clippy::too_many_arguments)]
    fn peel(
        &mut self,
        sched: &Arc<Schedule>,
        a: Bound,
        b: Bound,
        c: MatView,
        alpha: Elem,
        beta: Option<Elem>,
        arena: &mut Option<Arena>,
        depth: usize,
    ) -> Result<(), ExecError> {
        if sched.contract.overwrites_a() || sched.contract.overwrites_b() || sched.shape == Shape::Square {
            return Err(ExecError::ShapeUnsupported(format!(
                "{} cannot peel odd dimensions {}x{}x{}",
                sched.name, a.view.rows, a.view.cols, b.view.cols
            )));
        }
        let (m, k, n) = (a.view.rows, a.view.cols, b.view.cols);
        let (me, ke, ne) = (m & !1, k & !1, n & !1);
        let core = |v: MatView, r: usize, c: usize| v.sub(0, 0, r, c);
        let a0 = Bound { view: core(a.view, me, ke)?, ..a };
        let b0 = Bound { view: core(b.view, ke, ne)?, ..b };
        let c0 = core(c, me, ne)?;
        // Column and row strips of C read the old C, so do them before the core.
        if n != ne {
            let cc = c.sub(0, ne, m, 1)?;
            self.leaf(a.view, b.view.sub(0, ne, k, 1)?, cc, alpha, beta)?;
        }
        if m != me {
            let cr = c.sub(me, 0, 1, ne)?;
            self.leaf(a.view.sub(me, 0, 1, k)?, b.view.sub(0, 0, k, ne)?, cr, alpha, beta)?;
        }
        // Every dimension exceeds the cutoff here, so the even core is nonempty.
        self.mult(Some(sched), a0, b0, c0, alpha, beta, arena, depth)?;
        if k != ke {
            let a1 = a.view.sub(0, ke, me, 1)?;
            let b1 = b.view.sub(ke, 0, 1, ne)?;
            self.leaf(a1, b1, c0, alpha, Some(1))?;
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn run(
        &mut self,
        sched: &Arc<Schedule>,
        a: Bound,
        b: Bound,
        c: MatView,
        alpha: Elem,
        beta: Option<Elem>,
        arena: &mut Option<Arena>,
        depth: usize,
    ) -> Result<(), ExecError> {
        let md = self.ws.modulus();
        let (m, k, n) = (a.view.rows, a.view.cols, b.view.cols);
        let (aq, bq, cq) = (a.view.quad_split()?, b.view.quad_split()?, c.quad_split()?);
        let mut binds: [Option<MatView>; 15] = [None; 15];
        for i in 0..4 {
            binds[Slot::A11.index() + i] = Some(aq[i]);
            binds[Slot::B11.index() + i] = Some(bq[i]);
            binds[Slot::C11.index() + i] = Some(cq[i]);
        }
        let saved = arena.clone();
        let mut temps = Vec::new();
        for decl in &sched.temps {
            let (r, cl) = (decl.rows.eval(m, k, n), decl.cols.eval(m, k, n));
            let (view, t) = match arena.as_mut() {
                Some(ar) => (ar.take(r, cl)?, Temp::Carved),
                None => {
                    let v = self.ws.push_buffer(r, cl);
                    self.meter.alloc((r * cl) as u64, depth, decl.slot.name());
                    (v, Temp::Heap(v))
                }
            };
            binds[decl.slot.index()] = Some(view);
            temps.push(t);
        }
        let result = self.body(sched, &binds, a.writable, b.writable, alpha, beta, arena, depth);
        for t in temps.into_iter().rev() {
            if let Temp::Heap(v) = t {
                self.ws.pop_buffer(v);
                self.meter.free(v.len() as u64);
            }
        }
        *arena = saved;
        result?;
        if !sched.accumulating && alpha != 1 {
            block_scale(self.ws, &c, alpha)?;
            if alpha != md.minus_one() {
                self.meter.mults += c.len() as u64;
            }
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn body(
        &mut self,
        sched: &Arc<Schedule>,
        binds: &[Option<MatView>; 15],
        a_writable: bool,
        b_writable: bool,
        alpha: Elem,
        beta: Option<Elem>,
        arena: &mut Option<Arena>,
        depth: usize,
    ) -> Result<(), ExecError> {
        let md = self.ws.modulus();
        let bv = beta.unwrap_or(0);
        use crate::schedule::Role;
        // Each slot's content is tracked by its dimensions: a value may occupy
        // only the top-left corner of a larger temporary.
        let mut frame: Frame<(usize, usize)> = Frame::new(|s| {
            let live = match s.role() {
                Role::InputA | Role::InputB => true,
                Role::InoutC => sched.accumulating,
                Role::Temporary => false,
            };
            binds[s.index()].filter(|_| live).map(|v| v.dims())
        });
        let writable = |s: Slot| match s.role() {
            Role::InputA => a_writable && sched.contract.overwrites_a(),
            Role::InputB => b_writable && sched.contract.overwrites_b(),
            _ => true,
        };
        let window = |s: Slot, (r, c): (usize, usize), label: &str| -> Result<MatView, ExecError> {
            let full = binds[s.index()]
                .ok_or_else(|| ExecError::BadSchedule(format!("row {label}: slot {} is not bound", s.name())))?;
            full.top_left(r, c)
                .map_err(|_| ExecError::BadSchedule(format!("row {label}: a {r}x{c} value does not fit in {}", s.name())))
        };
        for ins in &sched.instructions {
            let resolve = |name: &str| match frame.resolve(name) {
                Resolve::Ok(s) => {
                    let dims = *frame.content(s).expect("resolved slots hold values");
                    Ok((s, window(s, dims, &ins.label)?))
                }
                other => Err(ExecError::BadSchedule(format!("row {}: operand {name} is {other:?}", ins.label))),
            };
            if !writable(ins.dst) {
                return Err(ExecError::ContractBreach(format!(
                    "{} row {} writes {}",
                    sched.name,
                    ins.label,
                    ins.dst.name()
                )));
            }
            let dims = match &ins.op {
                Op::Linear(terms) => {
                    let mut resolved = Vec::with_capacity(terms.len());
                    let mut dims = None;
                    for t in terms {
                        let (_, v) = resolve(&t.src)?;
                        dims.get_or_insert(v.dims());
                        let coef = t.coef.eval(md, alpha, bv);
                        if coef != 0 {
                            resolved.push((coef, v));
                        }
                    }
                    let dims = dims.unwrap_or_else(|| binds[ins.dst.index()].map_or((0, 0), |v| v.dims()));
                    let dst = window(ins.dst, dims, &ins.label)?;
                    self.count_linear(&dst, &resolved);
                    block_lincomb(self.ws, &dst, &resolved)?;
                    dims
                }
                Op::Product { coef, lhs, rhs, acc, .. } => {
                    let ((ls, lv), (rs, rv)) = (resolve(lhs)?, resolve(rhs)?);
                    let dims = (lv.rows, rv.cols);
                    let dst = window(ins.dst, dims, &ins.label)?;
                    let child_beta = match acc {
                        Some(t) => {
                            let (accs, accv) = resolve(&t.src)?;
                            if accs != ins.dst || accv != dst {
                                return Err(ExecError::BadSchedule(format!(
                                    "row {}: accumulator {} is not the destination {}",
                                    ins.label,
                                    t.src,
                                    ins.dst.name()
                                )));
                            }
                            Some(t.coef.eval(md, alpha, bv))
                        }
                        None => None,
                    };
                    let target = match dispatch_policy(sched, ins).expect("product") {
                        Dispatch::Classic => None,
                        Dispatch::Schedule(s) => Some(s),
                    };
                    let accumulates = target.as_ref().is_none_or(|s| s.accumulating);
                    if !accumulates && child_beta.is_some_and(|x| x != 0) {
                        return Err(ExecError::BadSchedule(format!(
                            "row {}: {} does not accumulate",
                            ins.label,
                            ins.variant()
                        )));
                    }
                    let a = Bound { view: lv, writable: writable(ls) };
                    let b = Bound { view: rv, writable: writable(rs) };
                    self.meter.call(CallEvent {
                        target: target.as_ref().map_or("classic".to_string(), |s| s.name.clone()),
                        m: lv.rows,
                        k: lv.cols,
                        n: rv.cols,
                        depth: depth + 1,
                        classical: target.is_none() || lv.rows.min(lv.cols).min(rv.cols) <= self.cutoff,
                    });
                    let alpha2 = coef.eval(md, alpha, bv);
                    self.mult(target.as_ref(), a, b, dst, alpha2, child_beta, arena, depth + 1)?;
                    if let Some(t) = &target {
                        if t.contract.overwrites_a() {
                            frame.clobber(ls);
                        }
                        if t.contract.overwrites_b() {
                            frame.clobber(rs);
                        }
                    }
                    dims
                }
            };
            frame.define(&ins.name, ins.dst, dims);
        }
        Ok(())
    }

    fn count_linear(&mut self, dst: &MatView, terms: &[(Elem, MatView)]) {
        let md = self.ws.modulus();
        let size = dst.len() as u64;
        let scaled = terms.iter().filter(|(c, _)| !is_unit(md, *c)).count() as u64;
        self.meter.mults += scaled * size;
        match terms {
            [] => self.meter.word_moves += size,
            [(c, src)] if *c == 1 => {
                if !src.same_window(dst) {
                    self.meter.word_moves += size;
                }
            }
            [_] => self.meter.adds += if scaled == 0 { size } else { 0 },
            _ => self.meter.adds += (terms.len() as u64 - 1) * size,
        }
    }
}
