mod support;

use support::mutants;
use winomem::schedule::{builtin, builtin_text, parse_schedule, render_schedule, validate, ScheduleId};

#[test]
fn builtins_pass_every_check() {
    for id in ScheduleId::ALL {
        let r = validate(&builtin(id));
        assert!(r.ok(), "{id}:\n{r}");
    }
}

#[test]
fn text_round_trip() {
    for id in ScheduleId::ALL {
        let s = builtin(id);
        let again = parse_schedule(&render_schedule(&s)).unwrap();
        assert_eq!(*s, again, "{id}");
        assert_eq!(parse_schedule(builtin_text(id)).unwrap(), again, "{id}");
    }
}

#[test]
fn every_mutant_is_rejected() {
    let all = mutants::all();
    assert!(all.len() >= 30);
    for (what, m) in all {
        assert!(!validate(&m).ok(), "{what} slipped through");
    }
}
