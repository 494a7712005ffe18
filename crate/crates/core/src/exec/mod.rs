//! Running algorithms on matrices: binding, recursion, contracts and metering.

mod engine;

use std::sync::Arc;

pub use engine::{dispatch_policy, Dispatch};
pub(crate) use engine::{Arena, Bound, Engine};

use crate::algorithm::Algorithm;
use crate::drivers;
use crate::error::{ExecError, RingError};
use crate::meter::{CostMeter, CostReport};
use crate::ring::{Elem, Matrix, Workspace};
use crate::schedule::{builtin, Schedule, Shape};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MulOptions {
    pub alpha: Elem,
    /// Ignored by non-accumulating algorithms.
    pub beta: Elem,
    pub cutoff: usize,
}

impl Default for MulOptions {
    fn default() -> Self {
        MulOptions { alpha: 1, beta: 1, cutoff: 1 }
    }
}

impl MulOptions {
    pub fn with_cutoff(cutoff: usize) -> Self {
        MulOptions { cutoff, ..Self::default() }
    }
}

/// The schedule behind a builtin or custom algorithm.
pub fn schedule_of(alg: &Algorithm) -> Option<Arc<Schedule>> {
    match alg {
        Algorithm::Builtin(id) => Some(builtin(*id)),
        Algorithm::Custom(s) => Some(s.clone()),
        _ => None,
    }
}

/// Rejects shapes a schedule cannot recurse on before any data is touched.
pub fn check_supported(alg: &Algorithm, m: usize, k: usize, n: usize, cutoff: usize) -> Result<(), ExecError> {
    if cutoff == 0 {
        return Err(ExecError::Dimension("cutoff must be at least 1".into()));
    }
    if m == 0 || k == 0 || n == 0 {
        return Err(ExecError::Dimension("empty matrices".into()));
    }
    let Some(s) = schedule_of(alg) else {
        return drivers::check_supported(alg, m, k, n);
    };
    let unsupported = |why: &str| Err(ExecError::ShapeUnsupported(format!("{} on {m}x{k}x{n}: {why}", s.name)));
    if s.shape == Shape::Square && !(m == k && k == n) {
        return unsupported("square inputs only");
    }
    let peelable = s.shape == Shape::Rectangular && !s.contract.overwrites_a() && !s.contract.overwrites_b();
    let (mut x, mut y, mut z) = (m, k, n);
    while x.min(y).min(z) > cutoff {
        if (x | y | z) & 1 == 1 && !peelable {
            return unsupported("odd dimension below the top level");
        }
        (x, y, z) = (x / 2, y / 2, z / 2);
    }
    Ok(())
}

/// `C <- alpha*A*B + beta*C` for accumulating algorithms, `C <- alpha*A*B`
/// otherwise. Inputs the algorithm's contract marks as overwritable may be
/// left holding garbage.
pub fn multiply(
    alg: &Algorithm,
    a: &mut Matrix,
    b: &mut Matrix,
    c: &mut Matrix,
    opts: &MulOptions,
) -> Result<CostReport, ExecError> {
    multiply_metered(alg, a, b, c, opts, &mut CostMeter::new())
}

/// [`multiply`] with a caller-supplied meter, for access to the logs.
pub fn multiply_metered(
    alg: &Algorithm,
    a: &mut Matrix,
    b: &mut Matrix,
    c: &mut Matrix,
    opts: &MulOptions,
    meter: &mut CostMeter,
) -> Result<CostReport, ExecError> {
    let p = a.modulus();
    if b.modulus() != p || c.modulus() != p {
        return Err(RingError::ModulusMismatch.into());
    }
    let (m, k, n) = (a.rows(), a.cols(), b.cols());
    if b.rows() != k || c.rows() != m || c.cols() != n {
        return Err(ExecError::Dimension(format!(
            "A {}x{}, B {}x{}, C {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols(),
            c.rows(),
            c.cols()
        )));
    }
    check_supported(alg, m, k, n, opts.cutoff)?;
    let mut ws = Workspace::new(p);
    let take = |x: &mut Matrix| std::mem::replace(x, Matrix::zeros(0, 0, p));
    let av = ws.insert(take(a))?;
    let bv = ws.insert(take(b))?;
    let cv = ws.insert(take(c))?;
    let (wa, wb) = alg.overwrites();
    let (ba, bb) = (Bound { view: av, writable: wa }, Bound { view: bv, writable: wb });
    let beta = alg.accumulating().then_some(opts.beta);
    let mut eng = Engine { ws: &mut ws, meter, cutoff: opts.cutoff };
    let result = match alg {
        Algorithm::Classic => eng.leaf(av, bv, cv, opts.alpha, None),
        Algorithm::Builtin(_) | Algorithm::Custom(_) => {
            let s = schedule_of(alg).expect("schedule algorithm");
            eng.mult(Some(&s), ba, bb, cv, opts.alpha, beta, &mut None, 0)
        }
        Algorithm::Ipmm => drivers::ipmm_views(&mut eng, av, bv, cv, opts.alpha),
        Algorithm::Ipovmm => drivers::ipovmm_views(&mut eng, av, bv, cv, opts.alpha),
        Algorithm::BlockedAcc { t, base } => {
            drivers::blocked_acc_views(&mut eng, *t, *base, av, bv, cv, opts.alpha, opts.beta)
        }
    };
    *a = ws.extract(&av);
    *b = ws.extract(&bv);
    *c = ws.extract(&cv);
    result?;
    Ok(meter.report(&alg.name(), (m, k, n), opts.cutoff))
}
