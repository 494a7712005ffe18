//! Composite algorithms that tile the operands and run schedules on the
//! tiles, borrowing dead parts of the operands as scratch.

use crate::algorithm::Algorithm;
use crate::error::ExecError;
use crate::exec::{multiply, Arena, Bound, Engine, MulOptions};
use crate::meter::models::schedule_cost;
use crate::meter::CostReport;
use crate::ring::{Elem, MatView, Matrix};
use crate::schedule::{builtin, ScheduleId};

fn pow2(x: usize) -> bool {
    x.is_power_of_two()
}

pub(crate) fn check_supported(alg: &Algorithm, m: usize, k: usize, n: usize) -> Result<(), ExecError> {
    let bad = |why: String| Err(ExecError::ShapeUnsupported(format!("{alg} on {m}x{k}x{n}: {why}")));
    match alg {
        Algorithm::Ipmm => {
            if m != n || !pow2(n) || !pow2(k) {
                return bad("needs an n x k by k x n product with powers of two".into());
            }
            if k < n {
                return bad("needs k >= n (multiply the transposes instead)".into());
            }
        }
        Algorithm::Ipovmm => {
            if !(pow2(m) && pow2(k) && pow2(n)) || n >= m.min(k) {
                return bad("needs n < min(m, k), powers of two".into());
            }
        }
        Algorithm::BlockedAcc { t, .. } => {
            if m != k || k != n {
                return bad("square inputs only".into());
            }
            if n % t != 0 || !pow2(n / t) {
                return bad(format!("n/t must be a power of two for t = {t}"));
            }
        }
        _ => {}
    }
    Ok(())
}

/// `n x n` block `(i, j)` of `v`.
fn tile(v: MatView, h: usize, i: usize, j: usize) -> Result<MatView, ExecError> {
    Ok(v.sub(i * h, j * h, h, h)?)
}

/// In-place product of an `n x k` A by a `k x n` B, both kept intact.
/// C11, C12 and C21 are computed with C22 as scratch, then C22 recursively.
pub(crate) fn ipmm_views(eng: &mut Engine, a: MatView, b: MatView, c: MatView, alpha: Elem) -> Result<(), ExecError> {
    let (n, k) = (a.rows, a.cols);
    if n <= eng.cutoff {
        return eng.leaf(a, b, c, alpha, None);
    }
    let h = n / 2;
    let stripes = k / h;
    let need = schedule_cost(ScheduleId::Std2, h, h, h, eng.cutoff)
        .peak
        .max(schedule_cost(ScheduleId::Acc3, h, h, h, eng.cutoff).peak);
    assert!(need <= (h * h) as u64, "C22 cannot hold the temporaries of a {h}x{h} product");
    let (std2, acc3) = (builtin(ScheduleId::Std2), builtin(ScheduleId::Acc3));
    let scratch = tile(c, h, 1, 1)?;
    for (i, l) in [(0, 0), (0, 1), (1, 0)] {
        let ci = tile(c, h, i, l)?;
        for j in 0..stripes {
            let aij = Bound::constant(tile(a, h, i, j)?);
            let bjl = Bound::constant(tile(b, h, j, l)?);
            let mut arena = Some(Arena::new(scratch));
            let (s, beta) = if j == 0 { (&std2, None) } else { (&acc3, Some(1)) };
            eng.mult(Some(s), aij, bjl, ci, alpha, beta, &mut arena, 1)?;
        }
    }
    let a2 = a.sub(h, 0, h, k)?;
    let b2 = b.sub(0, h, k, h)?;
    ipmm_views(eng, a2, b2, scratch, alpha)
}

/// Product of an `m x k` A by a `k x n` B with `n < min(m, k)`, overwriting
/// both inputs and allocating nothing.
pub(crate) fn ipovmm_views(eng: &mut Engine, a: MatView, b: MatView, c: MatView, alpha: Elem) -> Result<(), ExecError> {
    let n = b.cols;
    let (m0, k0) = (a.rows / n, a.cols / n);
    let (std2, ovl, acc3) = (builtin(ScheduleId::Std2), builtin(ScheduleId::Ovl), builtin(ScheduleId::Acc3));
    let a_blk = |i, j| tile(a, n, i, j);
    let b_blk = |j| tile(b, n, j, 0);
    let c_blk = |i| tile(c, n, i, 0);
    let b0 = Bound::scratch(b_blk(0)?);
    let mut arena = Some(Arena::new(c_blk(1)?));
    eng.mult(Some(&std2), Bound::scratch(a_blk(0, 0)?), b0, c_blk(0)?, alpha, None, &mut arena, 1)?;
    // A11 is dead from here on and becomes the scratch block.
    let scratch = a_blk(0, 0)?;
    for i in 1..m0 {
        let mut arena = Some(Arena::new(scratch));
        eng.mult(Some(&ovl), Bound::scratch(a_blk(i, 0)?), b0, c_blk(i)?, alpha, None, &mut arena, 1)?;
    }
    for j in 1..k0 {
        for i in 0..m0 {
            let mut arena = Some(Arena::new(scratch));
            let aij = Bound::scratch(a_blk(i, j)?);
            eng.mult(Some(&acc3), aij, Bound::scratch(b_blk(j)?), c_blk(i)?, alpha, Some(1), &mut arena, 1)?;
        }
    }
    Ok(())
}

/// `C <- alpha*A*B + beta*C` as `t^3` base-schedule accumulations on
/// `n/t`-sized blocks sharing one scratch chunk.
#[allow(clippy::too_many_arguments)]
pub(crate) fn blocked_acc_views(
    eng: &mut Engine,
    t: usize,
    base: ScheduleId,
    a: MatView,
    b: MatView,
    c: MatView,
    alpha: Elem,
    beta: Elem,
) -> Result<(), ExecError> {
    let s = builtin(base);
    if t == 1 {
        return eng.mult(Some(&s), Bound::constant(a), Bound::constant(b), c, alpha, Some(beta), &mut None, 0);
    }
    let h = a.rows / t;
    let chunk = eng.ws.push_buffer(h, h);
    eng.meter.alloc((h * h) as u64, 0, "scratch");
    let mut run = || -> Result<(), ExecError> {
        for i in 0..t {
            for l in 0..t {
                let cil = tile(c, h, i, l)?;
                for j in 0..t {
                    let (aij, bjl) = (Bound::constant(tile(a, h, i, j)?), Bound::constant(tile(b, h, j, l)?));
                    let mut arena = Some(Arena::new(chunk));
                    let beta_j = if j == 0 { beta } else { 1 };
                    eng.mult(Some(&s), aij, bjl, cil, alpha, Some(beta_j), &mut arena, 1)?;
                }
            }
        }
        Ok(())
    };
    let result = run();
    eng.ws.pop_buffer(chunk);
    eng.meter.free((h * h) as u64);
    result
}

/// `C <- A*B` for an `n x k` A and `k x n` B without temporaries; A and B are unchanged.
pub fn ipmm(a: &Matrix, b: &Matrix, c: &mut Matrix, cutoff: usize) -> Result<CostReport, ExecError> {
    let (mut a, mut b) = (a.clone(), b.clone());
    multiply(&Algorithm::Ipmm, &mut a, &mut b, c, &MulOptions::with_cutoff(cutoff))
}

/// `C <- A*B` for `n < min(m, k)` without temporaries; A and B are destroyed.
pub fn ipovmm(a: &mut Matrix, b: &mut Matrix, c: &mut Matrix, cutoff: usize) -> Result<CostReport, ExecError> {
    multiply(&Algorithm::Ipovmm, a, b, c, &MulOptions::with_cutoff(cutoff))
}

/// `C <- alpha*A*B + beta*C` with a `t x t` blocking of C.
pub fn blocked_acc(
    a: &Matrix,
    b: &Matrix,
    c: &mut Matrix,
    t: usize,
    base: ScheduleId,
    opts: &MulOptions,
) -> Result<CostReport, ExecError> {
    let (mut a, mut b) = (a.clone(), b.clone());
    multiply(&Algorithm::BlockedAcc { t, base }, &mut a, &mut b, c, opts)
}
