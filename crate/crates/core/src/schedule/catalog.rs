use std::sync::{Arc, OnceLock};

use super::{parse_schedule, Schedule, ScheduleId};

/// Canonical text of a builtin schedule.
pub fn builtin_text(id: ScheduleId) -> &'static str {
    match id {
        ScheduleId::Std2 => include_str!("../../schedules/std2.sched"),
        ScheduleId::Acc3 => include_str!("../../schedules/acc3.sched"),
        ScheduleId::Ip => include_str!("../../schedules/ip.sched"),
        ScheduleId::Ovl => include_str!("../../schedules/ovl.sched"),
        ScheduleId::Ovl2 => include_str!("../../schedules/ovl2.sched"),
        ScheduleId::Ovr => include_str!("../../schedules/ovr.sched"),
        ScheduleId::Aclr => include_str!("../../schedules/aclr.sched"),
        ScheduleId::Accr => include_str!("../../schedules/accr.sched"),
        ScheduleId::Acc2 => include_str!("../../schedules/acc2.sched"),
        ScheduleId::Acr => include_str!("../../schedules/acr.sched"),
    }
}

/// The parsed builtin, shared.
pub fn builtin(id: ScheduleId) -> Arc<Schedule> {
    static CACHE: OnceLock<Vec<Arc<Schedule>>> = OnceLock::new();
    let all = CACHE.get_or_init(|| {
        ScheduleId::ALL
            .iter()
            .map(|&id| Arc::new(parse_schedule(builtin_text(id)).expect("builtin schedules parse")))
            .collect()
    });
    all[id as usize].clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::*;

    #[test]
    fn catalog_shape() {
        for id in ScheduleId::ALL {
            let s = builtin(id);
            assert_eq!(s.name, id.name());
            assert_eq!(s.contract, id.contract());
            assert_eq!(s.accumulating, id.accumulating());
            assert_eq!(s.product_count(), 7, "{id}");
            assert_eq!(s.final_flags().iter().filter(|&&f| f).count(), 4);
        }
        let std2 = builtin(ScheduleId::Std2);
        assert_eq!(std2.instructions.len(), 22);
        assert_eq!(render_instruction(&std2.instructions[0]), "1: S3 = A11 - A21 @ X");
        let ip = builtin(ScheduleId::Ip);
        assert_eq!(ip.instructions.len(), 22);
        assert_eq!(render_instruction(&ip.instructions[8]), "9: P5 = IP(S1*T1) @ A11");
        let acc2 = builtin(ScheduleId::Acc2);
        assert_eq!(render_instruction(&acc2.instructions[0]), "1: Z1 = C22 - C12 @ C22");
        assert_eq!(builtin(ScheduleId::Ovl2).instructions.len(), 24);
        assert_eq!(builtin(ScheduleId::Acc3).instructions.len(), 21);
    }

    #[test]
    fn fixtures_are_canonical() {
        for id in ScheduleId::ALL {
            assert_eq!(render_schedule(&builtin(id)), builtin_text(id), "{id}");
        }
    }
}
