//! Exact cost predictions from the recurrences of each schedule, evaluated
//! down to the cutoff, plus the published closed forms for comparison.
//!
//! Counts assume `alpha = beta = 1`, where scalar factors cost nothing.

use std::collections::HashMap;

use num_rational::Ratio;

use super::CostReport;
use crate::algorithm::Algorithm;
use crate::error::ModelError;
use crate::schedule::{Shape, ScheduleId};

pub type Q = Ratio<i128>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Cost {
    pub mults: u64,
    pub adds: u64,
    pub peak: u64,
    pub total: u64,
    pub moves: u64,
}

impl Cost {
    pub fn ops(&self) -> u64 {
        self.mults + self.adds
    }

    fn add_child(&mut self, c: Cost, times: u64) {
        self.mults += times * c.mults;
        self.adds += times * c.adds;
        self.total += times * c.total;
        self.moves += times * c.moves;
        self.peak = self.peak.max(c.peak);
    }
}

/// Classical `m x k` by `k x n` product, optionally adding into C.
pub fn classical_cost(m: usize, k: usize, n: usize, accumulate: bool) -> Cost {
    let (m, k, n) = (m as u64, k as u64, n as u64);
    let adds = m * n * k.saturating_sub(1) + if accumulate { m * n } else { 0 };
    Cost { mults: m * k * n, adds, ..Cost::default() }
}

struct Level {
    temps: u64,
    adds: u64,
    moves: u64,
    children: &'static [(ScheduleId, u64)],
}

/// Per-level bookkeeping of each schedule: temporaries, block additions,
/// copies and recursive calls.
fn level(id: ScheduleId, m: u64, k: u64, n: u64) -> Level {
    use ScheduleId::*;
    let (hm, hk, hn) = (m / 2, k / 2, n / 2);
    let (a, b, c) = (hm * hk, hk * hn, hm * hn);
    let product = 4 * a + 4 * b + 7 * c;
    match id {
        Std2 => Level { temps: hm * hk.max(hn) + b, adds: product, moves: 0, children: &[(Std2, 7)] },
        Acc3 => Level { temps: a + b + c, adds: 4 * a + 4 * b + 6 * c, moves: 0, children: &[(Acc3, 5), (Std2, 2)] },
        Ip => Level { temps: 0, adds: product, moves: 0, children: &[(Ip, 7)] },
        Ovl => Level { temps: c, adds: product, moves: 0, children: &[(Ovl, 4), (Ip, 3)] },
        Ovl2 => Level { temps: c, adds: product, moves: 2 * a, children: &[(Ovl, 4), (Ip, 2), (Ovr, 1)] },
        Ovr => Level { temps: c, adds: product, moves: 0, children: &[(Ovr, 4), (Ip, 3)] },
        Aclr => Level { temps: 2 * c, adds: 4 * a + 4 * b + 9 * c, moves: 0, children: &[(Aclr, 4), (Ip, 3)] },
        Accr => Level {
            temps: 2 * c,
            adds: 4 * a + 4 * b + 9 * c,
            moves: 0,
            children: &[(Accr, 4), (Ovr, 2), (Ip, 1)],
        },
        Acc2 => Level {
            temps: 2 * c,
            adds: 4 * a + 6 * b + 7 * c,
            moves: 0,
            children: &[(Acc2, 4), (Std2, 1), (Aclr, 1), (Accr, 1)],
        },
        Acr => Level {
            temps: hm.max(hk) * hn + a,
            adds: 4 * a + 4 * b + 8 * c,
            moves: 0,
            children: &[(Acr, 5), (Std2, 2)],
        },
    }
}

fn schedule_cost_memo(
    id: ScheduleId,
    dims: (usize, usize, usize),
    cutoff: usize,
    memo: &mut HashMap<(ScheduleId, (usize, usize, usize)), Cost>,
) -> Cost {
    let (m, k, n) = dims;
    if m.min(k).min(n) <= cutoff {
        return classical_cost(m, k, n, id.accumulating());
    }
    if let Some(c) = memo.get(&(id, dims)) {
        return *c;
    }
    let lv = level(id, m as u64, k as u64, n as u64);
    let mut cost = Cost::default();
    for &(child, times) in lv.children {
        let c = schedule_cost_memo(child, (m / 2, k / 2, n / 2), cutoff, memo);
        cost.add_child(c, times);
    }
    cost.adds += lv.adds;
    cost.moves += lv.moves;
    cost.peak += lv.temps;
    cost.total += lv.temps;
    memo.insert((id, dims), cost);
    cost
}

/// Recurrence value of a builtin schedule (no shape checks).
pub fn schedule_cost(id: ScheduleId, m: usize, k: usize, n: usize, cutoff: usize) -> Cost {
    schedule_cost_memo(id, (m, k, n), cutoff.max(1), &mut HashMap::new())
}

/// Cost of the in-place product of an `n x k` by a `k x n` matrix.
pub fn ipmm_cost(n: usize, k: usize, cutoff: usize) -> Cost {
    if n <= cutoff.max(1) {
        return classical_cost(n, k, n, false);
    }
    let h = n / 2;
    let stripes = (2 * k / n) as u64;
    let mut cost = Cost::default();
    let w = schedule_cost(ScheduleId::Std2, h, h, h, cutoff);
    let wacc = schedule_cost(ScheduleId::Acc3, h, h, h, cutoff);
    let rest = ipmm_cost(h, k, cutoff);
    cost.mults = 3 * w.mults + 3 * (stripes - 1) * wacc.mults + rest.mults;
    cost.adds = 3 * w.adds + 3 * (stripes - 1) * wacc.adds + rest.adds;
    cost
}

fn is_pow2(x: usize) -> bool {
    x.is_power_of_two()
}

fn need(ok: bool, what: &str) -> Result<(), ModelError> {
    if ok {
        Ok(())
    } else {
        Err(ModelError::Unsupported(what.to_string()))
    }
}

/// Predicted [`CostReport`] for running `alg` on `m x k` by `k x n` inputs.
pub fn expected_costs(alg: &Algorithm, m: usize, k: usize, n: usize, cutoff: usize) -> Result<CostReport, ModelError> {
    need(cutoff >= 1, "cutoff >= 1")?;
    let cost = match alg {
        Algorithm::Classic => classical_cost(m, k, n, false),
        Algorithm::Builtin(id) => {
            need(is_pow2(m) && is_pow2(k) && is_pow2(n), "power-of-two dimensions")?;
            if id.shape() == Shape::Square {
                need(m == k && k == n, "square inputs")?;
            }
            schedule_cost(*id, m, k, n, cutoff)
        }
        Algorithm::Custom(s) => return Err(ModelError::UnknownVariant(s.name.clone())),
        Algorithm::Ipmm => {
            need(m == n && k >= n && is_pow2(n) && is_pow2(k), "an n x k by k x n product with k >= n")?;
            ipmm_cost(n, k, cutoff)
        }
        Algorithm::Ipovmm => {
            need(n < m.min(k) && is_pow2(m) && is_pow2(k) && is_pow2(n), "n < min(m, k), powers of two")?;
            let (m0, k0) = ((m / n) as u64, (k / n) as u64);
            let mut c = Cost::default();
            c.add_child(schedule_cost(ScheduleId::Std2, n, n, n, cutoff), 1);
            c.add_child(schedule_cost(ScheduleId::Ovl, n, n, n, cutoff), m0 - 1);
            c.add_child(schedule_cost(ScheduleId::Acc3, n, n, n, cutoff), (k0 - 1) * m0);
            Cost { peak: 0, total: 0, ..c }
        }
        Algorithm::BlockedAcc { t, base } => {
            let t = *t;
            need(m == k && k == n && t >= 1 && n % t == 0 && is_pow2(n / t), "square n with n/t a power of two")?;
            let b = n / t;
            let inner = schedule_cost(*base, b, b, b, cutoff);
            if t == 1 {
                inner
            } else {
                let calls = (t * t * t) as u64;
                let mut c = Cost::default();
                c.add_child(inner, calls);
                c.peak = (b * b) as u64;
                c.total = (b * b) as u64;
                c
            }
        }
    };
    Ok(CostReport {
        algorithm: alg.name(),
        m,
        k,
        n,
        cutoff,
        mults: cost.mults,
        adds: cost.adds,
        peak_extra_words: cost.peak,
        total_alloc_words: cost.total,
        word_moves: cost.moves,
    })
}

/// Homogeneous quadratic `xy*x*y + yz*y*z + xz*x*z + xx*x^2 + yy*y^2 + zz*z^2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Quadratic {
    pub xy: i64,
    pub yz: i64,
    pub xz: i64,
    pub xx: i64,
    pub yy: i64,
    pub zz: i64,
}

impl Quadratic {
    pub fn eval(&self, x: Q, y: Q, z: Q) -> Q {
        let c = |v: i64| Q::from_integer(v as i128);
        c(self.xy) * x * y + c(self.yz) * y * z + c(self.xz) * x * z + c(self.xx) * x * x + c(self.yy) * y * y
            + c(self.zz) * z * z
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
/// Sum of a quadratic over the recursion levels, recursively and in closed form.
pub struct HalvingSum {
    /// `f(m,k,n) = g(m/2,k/2,n/2) + f(m/2,k/2,n/2)`, zero once a dimension reaches 1.
    pub recursive: Q,
    /// `(1/3)(1 - 1/M^2) g(m,k,n)` with `M = min(m,k,n)`.
    pub closed: Q,
}

pub fn halving_sum_with(g: impl Fn(Q, Q, Q) -> Q, m: usize, k: usize, n: usize) -> HalvingSum {
    let q = |v: usize| Q::from_integer(v as i128);
    let mut recursive = Q::from_integer(0);
    let (mut a, mut b, mut c) = (m, k, n);
    while a > 1 && b > 1 && c > 1 {
        a /= 2;
        b /= 2;
        c /= 2;
        recursive += g(q(a), q(b), q(c));
    }
    let mm = q(m.min(k).min(n));
    let closed = Q::new(1, 3) * (Q::from_integer(1) - Q::from_integer(1) / (mm * mm)) * g(q(m), q(k), q(n));
    HalvingSum { recursive, closed }
}

pub fn halving_sum(g: &Quadratic, m: usize, k: usize, n: usize) -> HalvingSum {
    halving_sum_with(|x, y, z| g.eval(x, y, z), m, k, n)
}

/// Published closed forms, evaluated exactly at `n = 2^l`.
pub mod closed {
    use super::Q;

    fn l_of(n: usize) -> u32 {
        assert!(n.is_power_of_two(), "closed forms are stated for powers of two");
        n.trailing_zeros()
    }

    fn q(v: i128) -> Q {
        Q::from_integer(v)
    }

    /// `n^(log2 7) = 7^l`.
    pub fn n_log7(n: usize) -> Q {
        q(7i128.pow(l_of(n)))
    }

    /// `n^(log2 5) = 5^l`.
    pub fn n_log5(n: usize) -> Q {
        q(5i128.pow(l_of(n)))
    }

    fn n2(n: usize) -> Q {
        q((n * n) as i128)
    }

    fn n2_log(n: usize) -> Q {
        n2(n) * q(l_of(n) as i128)
    }

    /// `6 n^log7 - 5 n^2`: std2, ip, ovl, ovr.
    pub fn w_product(n: usize) -> Q {
        q(6) * n_log7(n) - q(5) * n2(n)
    }

    /// `6 n^log7 - 4 n^2`: acc3.
    pub fn w_acc3(n: usize) -> Q {
        q(6) * n_log7(n) - q(4) * n2(n)
    }

    /// `6 n^log7 - 4 n^2 + n^2 log n / 2`: aclr and accr.
    pub fn w_overwriting_acc(n: usize) -> Q {
        w_acc3(n) + Q::new(1, 2) * n2_log(n)
    }

    /// acc2 as tabulated: `6 n^log7 - 4 n^2 + (4/3) n^2 log n`.
    pub fn w_acc2_tabulated(n: usize) -> Q {
        w_acc3(n) + Q::new(4, 3) * n2_log(n)
    }

    /// acc2 as derived in the cost proof: `... + (4/3) n^2 (log n - 10/3) + 4/9`.
    pub fn w_acc2_derived(n: usize) -> Q {
        w_acc3(n) + Q::new(4, 3) * n2(n) * (q(l_of(n) as i128) - Q::new(10, 3)) + Q::new(4, 9)
    }

    /// `G(n,k) = 7.2 k n^(log7 - 1) - 12 k n - n^2 + 34k/5`.
    pub fn g_ipmm(n: usize, k: usize) -> Q {
        let k = q(k as i128);
        Q::new(36, 5) * k * n_log7(n) / q(n as i128) - q(12) * k * q(n as i128) - n2(n) + Q::new(34, 5) * k
    }

    /// `R_t(n) = t^3 W_acc(n/t) = 6 t^3 7^j - 4 t n^2` for `n = t 2^j`.
    pub fn r_blocked(t: usize, n: usize) -> Q {
        assert!(n % t == 0);
        let t3 = q((t * t * t) as i128);
        t3 * q(6) * n_log7(n / t) - q(4 * t as i128) * n2(n)
    }

    /// Peak extra words `(2/3)(n^2 - 1)`: std2, aclr, accr, acc2.
    pub fn m_two_thirds(n: usize) -> Q {
        Q::new(2, 3) * (n2(n) - q(1))
    }

    /// `n^2 - 1`: acc3.
    pub fn m_acc3(n: usize) -> Q {
        n2(n) - q(1)
    }

    /// `(1/3)(n^2 - 1)`: ovl, ovr.
    pub fn m_one_third(n: usize) -> Q {
        Q::new(1, 3) * (n2(n) - q(1))
    }

    /// `(2/3)(n^log7 - n^2)`: std2.
    pub fn a_std2(n: usize) -> Q {
        Q::new(2, 3) * (n_log7(n) - n2(n))
    }

    /// `(2/3) n^log7 + n^log5 - (5/3) n^2`: acc3.
    pub fn a_acc3(n: usize) -> Q {
        Q::new(2, 3) * n_log7(n) + n_log5(n) - Q::new(5, 3) * n2(n)
    }

    /// `(1/4) n^2 log n`: ovl, ovr.
    pub fn a_one_temp(n: usize) -> Q {
        Q::new(1, 4) * n2_log(n)
    }

    /// `(1/2) n^2 log n`: aclr, as tabulated.
    pub fn a_aclr(n: usize) -> Q {
        Q::new(1, 2) * n2_log(n)
    }

    /// `2 n^log5 - 2 n^2`: accr as tabulated (exact only for `n <= 4`).
    pub fn a_accr(n: usize) -> Q {
        q(2) * n_log5(n) - q(2) * n2(n)
    }

    /// acc2 as derived: `(2/9) n^log7 + 2 n^log5 - (22/9) n^2 + 2/9`.
    pub fn a_acc2_derived(n: usize) -> Q {
        Q::new(2, 9) * n_log7(n) + q(2) * n_log5(n) - Q::new(22, 9) * n2(n) + Q::new(2, 9)
    }
}
