mod support;

use std::sync::Arc;

use proptest::prelude::*;
use support::{brute, oracle, toys};
use winomem::algorithm::Algorithm;
use winomem::exec::{multiply, MulOptions};
use winomem::pebble::{search, Game, trace_to_schedule, Limits, Outcome, ProductModel, TaskGraph, Trace};
use winomem::ring::{Matrix, Modulus};
use winomem::schedule::{builtin, validate, OverwritePolicy, Schedule, ScheduleId};

const POLICIES: [OverwritePolicy; 4] = [
    OverwritePolicy::ReadOnly,
    OverwritePolicy::OverwriteA,
    OverwritePolicy::OverwriteB,
    OverwritePolicy::OverwriteBoth,
];

fn replays(g: &TaskGraph, t: &Trace) {
    Game::for_trace(g, t).replay(&t.steps).unwrap();
}

fn no_copies() -> Limits {
    Limits { copy_budget: 0, ..Limits::default() }
}

fn found(g: &TaskGraph, free: usize, policy: OverwritePolicy, limits: &Limits) -> Option<Trace> {
    match search(g, free, policy, limits).outcome {
        Outcome::Found(t) => Some(t),
        Outcome::Exhausted => None,
        Outcome::TimedOut => panic!("search ran out of budget"),
    }
}

/// Runs `s` on random n x n operands and checks the result and the inputs it must keep.
fn execute(s: Schedule, n: usize, seed: u64) {
    let p = Modulus::default();
    let policy = s.contract;
    let alg = Algorithm::Custom(Arc::new(s));
    let opts = MulOptions { alpha: 3, beta: 5, cutoff: 1 };
    let mut a = Matrix::random(n, n, p, seed);
    let mut b = Matrix::random(n, n, p, seed + 1);
    let mut c = Matrix::random(n, n, p, seed + 2);
    let beta = alg.accumulating().then_some(opts.beta);
    let want = oracle(&a, &b, &c, opts.alpha, beta);
    let (da, db) = (a.digest(), b.digest());
    multiply(&alg, &mut a, &mut b, &mut c, &opts).unwrap();
    assert_eq!(c, want, "n = {n}");
    if !policy.overwrites_a() {
        assert_eq!(a.digest(), da);
    }
    if !policy.overwrites_b() {
        assert_eq!(b.digest(), db);
    }
}

#[test]
fn toy_feasibility_matches_brute_force() {
    for (name, g) in toys::all() {
        for policy in POLICIES {
            for free in 0..=4 {
                let want = brute::feasible(&g, free, policy);
                let got = found(&g, free, policy, &no_copies());
                assert_eq!(got.is_some(), want, "{name} {policy:?} with {free} free");
                if let Some(t) = got {
                    replays(&g, &t);
                }
            }
        }
    }
}

#[test]
fn more_pebbles_never_hurt() {
    let graphs: Vec<TaskGraph> = toys::all().into_iter().map(|x| x.1).chain([TaskGraph::classical_2x2()]).collect();
    for g in &graphs {
        for policy in POLICIES {
            let limits = Limits { products: ProductModel::Preserving, ..no_copies() };
            let mut seen = false;
            for free in 0..=3 {
                let ok = found(g, free, policy, &limits).is_some();
                assert!(ok || !seen, "{policy:?}: feasible below {free} free pebbles but not at it");
                seen |= ok;
            }
        }
    }
}

#[test]
fn classical_toy_needs_one_temporary() {
    let g = TaskGraph::classical_2x2();
    assert!(found(&g, 0, OverwritePolicy::ReadOnly, &no_copies()).is_none());
    let t = found(&g, 1, OverwritePolicy::ReadOnly, &no_copies()).unwrap();
    replays(&g, &t);
    let s = trace_to_schedule(&g, &t).unwrap();
    assert_eq!(s.instructions.len(), 12);
    let report = validate(&s);
    assert!(report.ok(), "{report}");
    for n in [2, 4, 8] {
        execute(s.clone(), n, 11);
    }
}

#[test]
fn in_place_winograd_end_to_end() {
    let g = TaskGraph::winograd(false);
    let t = found(&g, 0, OverwritePolicy::OverwriteBoth, &Limits::default()).unwrap();
    replays(&g, &t);
    let s = trace_to_schedule(&g, &t).unwrap();
    assert!(s.temps.is_empty());
    assert_eq!(s.contract, OverwritePolicy::OverwriteBoth);
    let report = validate(&s);
    assert!(report.ok(), "{report}");
    for n in [2, 4, 8] {
        execute(s.clone(), n, 3);
    }
}

#[test]
fn read_only_winograd_uses_two_temporaries() {
    let g = TaskGraph::winograd(false);
    let limits = no_copies();
    assert!(found(&g, 1, OverwritePolicy::ReadOnly, &limits).is_none());
    let t = found(&g, 2, OverwritePolicy::ReadOnly, &limits).unwrap();
    let s = trace_to_schedule(&g, &t).unwrap();
    assert_eq!(s.temps.len(), 2);
    assert!(validate(&s).ok());
    execute(s, 4, 9);
}

#[test]
fn one_side_overwrite_has_no_in_place_schedule() {
    let g = TaskGraph::winograd(false);
    for policy in [OverwritePolicy::OverwriteA, OverwritePolicy::OverwriteB] {
        assert_eq!(search(&g, 0, policy, &no_copies()).outcome, Outcome::Exhausted, "{policy:?}");
    }
}

#[test]
fn accumulating_graph_needs_three_temporaries_when_overwriting() {
    // The fixed graph cannot fold C quadrants into each other, so it needs more
    // memory than the hand-written accumulating schedules.
    let g = TaskGraph::winograd(true);
    let limits = no_copies();
    assert!(found(&g, 3, OverwritePolicy::ReadOnly, &limits).is_none());
    assert!(found(&g, 2, OverwritePolicy::OverwriteBoth, &limits).is_none());
    let t = found(&g, 3, OverwritePolicy::OverwriteBoth, &limits).unwrap();
    let s = trace_to_schedule(&g, &t).unwrap();
    let report = validate(&s);
    assert!(report.ok(), "{report}");
    for n in [2, 4, 8] {
        execute(s.clone(), n, 21);
    }
}

#[test]
fn builtin_graph_round_trips_through_text() {
    for g in [TaskGraph::winograd(false), TaskGraph::winograd(true), TaskGraph::classical_2x2()] {
        let back = TaskGraph::parse(&g.to_text()).unwrap();
        assert_eq!(back.to_text(), g.to_text());
    }
    assert!(builtin(ScheduleId::Ip).temps.is_empty());
}

#[test]
fn time_budget_reports_timeout() {
    let g = TaskGraph::winograd(false);
    let limits = Limits { state_cap: 10, ..no_copies() };
    assert_eq!(search(&g, 0, OverwritePolicy::OverwriteA, &limits).outcome, Outcome::TimedOut);
}

/// Text of a random graph over A11, A12, B11, B12 with `mids` inner nodes and
/// finals in C11 and C12; `picks` drives every choice.
fn random_graph(mids: usize, picks: &[usize]) -> String {
    let mut names: Vec<String> = ["A11", "A12", "B11", "B12"].map(String::from).to_vec();
    let mut text: String = names.iter().map(|s| format!("node {s} initial {s}\n")).collect();
    let mut it = picks.iter().copied().cycle();
    let two = |avail: usize, it: &mut dyn Iterator<Item = usize>| {
        let x = it.next().unwrap() % avail;
        let y = (x + 1 + it.next().unwrap() % (avail - 1)) % avail;
        (x, y)
    };
    for i in 0..mids + 2 {
        let (x, y) = two(names.len(), &mut it);
        let name = if i < mids { format!("M{i}") } else { format!("R{}", i - mids) };
        let kind = if i < mids { "temp".to_string() } else { format!("final C1{}", i - mids + 1) };
        text += &format!("node {name} {kind}\n");
        if i < mids && it.next().unwrap() % 2 == 0 {
            text += &format!("prod {name} {} {}\n", names[x], names[y]);
        } else {
            let sign = if it.next().unwrap() % 2 == 0 { '+' } else { '-' };
            text += &format!("edge {} {name} +\nedge {} {name} {sign}\n", names[x], names[y]);
        }
        names.push(name);
    }
    text
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_graphs_agree_with_brute_force(
        mids in 1usize..5,
        picks in prop::collection::vec(0usize..64, 8..24),
        free in 0usize..3,
        pol in 0usize..4,
    ) {
        let g = TaskGraph::parse(&random_graph(mids, &picks)).unwrap();
        let policy = POLICIES[pol];
        let got = found(&g, free, policy, &no_copies());
        prop_assert_eq!(got.is_some(), brute::feasible(&g, free, policy));
        if let Some(t) = got {
            replays(&g, &t);
        }
    }
}
