use std::fmt;
use std::sync::Arc;

use crate::error::ScheduleError;
use crate::schedule::{Schedule, ScheduleId};

/// Everything `multiply` can run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Algorithm {
    /// The classical triple loop, no recursion.
    Classic,
    Builtin(ScheduleId),
    Custom(Arc<Schedule>),
    /// In-place product with constant inputs, using C22 as scratch.
    Ipmm,
    /// In-place product of a tall-and-wide A by a thin B, overwriting both.
    Ipovmm,
    /// `t x t` blocking of C with one shared scratch chunk; `base` is acc3 or acc2.
    BlockedAcc { t: usize, base: ScheduleId },
}

impl Algorithm {
    /// Accepts builtin names, `classic`, `ipmm`, `ipovmm` and
    /// `blocked_acc[:t=T][:acc3|acc2]` (defaults `t=2`, `acc3`).
    pub fn parse(s: &str) -> Result<Algorithm, ScheduleError> {
        let unknown = || ScheduleError::UnknownSchedule(s.to_string());
        match s {
            "classic" | "classical" => return Ok(Algorithm::Classic),
            "ipmm" => return Ok(Algorithm::Ipmm),
            "ipovmm" => return Ok(Algorithm::Ipovmm),
            _ => {}
        }
        if let Some(id) = ScheduleId::parse(s) {
            return Ok(Algorithm::Builtin(id));
        }
        let mut parts = s.split(':');
        if parts.next() != Some("blocked_acc") {
            return Err(unknown());
        }
        let (mut t, mut base) = (2, ScheduleId::Acc3);
        for p in parts {
            if let Some(v) = p.strip_prefix("t=") {
                t = v.parse().map_err(|_| unknown())?;
            } else {
                base = ScheduleId::parse(p).ok_or_else(unknown)?;
            }
        }
        if t == 0 || !matches!(base, ScheduleId::Acc3 | ScheduleId::Acc2) {
            return Err(unknown());
        }
        Ok(Algorithm::BlockedAcc { t, base })
    }

    pub fn name(&self) -> String {
        match self {
            Algorithm::Classic => "classic".into(),
            Algorithm::Builtin(id) => id.name().into(),
            Algorithm::Custom(s) => s.name.clone(),
            Algorithm::Ipmm => "ipmm".into(),
            Algorithm::Ipovmm => "ipovmm".into(),
            Algorithm::BlockedAcc { t, base } => format!("blocked_acc:t={t}:{base}"),
        }
    }

    /// Whether the algorithm computes `C <- alpha*A*B + beta*C` rather than `C <- A*B`.
    pub fn accumulating(&self) -> bool {
        match self {
            Algorithm::Builtin(id) => id.accumulating(),
            Algorithm::Custom(s) => s.accumulating,
            Algorithm::BlockedAcc { .. } => true,
            Algorithm::Classic | Algorithm::Ipmm | Algorithm::Ipovmm => false,
        }
    }

    /// Which inputs may be destroyed.
    pub fn overwrites(&self) -> (bool, bool) {
        match self {
            Algorithm::Builtin(id) => (id.contract().overwrites_a(), id.contract().overwrites_b()),
            Algorithm::Custom(s) => (s.contract.overwrites_a(), s.contract.overwrites_b()),
            Algorithm::Ipovmm => (true, true),
            _ => (false, false),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}
