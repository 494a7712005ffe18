mod support;

use winomem::algorithm::Algorithm;
use winomem::exec::{multiply, MulOptions};
use winomem::meter::compare;
use winomem::meter::models::expected_costs;
use winomem::ring::{Matrix, Modulus};
use winomem::schedule::ScheduleId;

use support::oracle;

fn run(alg: &Algorithm, m: usize, k: usize, n: usize, seed: u64, opts: MulOptions) {
    let p = Modulus::default();
    let mut a = Matrix::random(m, k, p, seed);
    let mut b = Matrix::random(k, n, p, seed + 1000);
    let mut c = Matrix::random(m, n, p, seed + 2000);
    let beta = alg.accumulating().then_some(opts.beta);
    let want = oracle(&a, &b, &c, opts.alpha, beta);
    let (da, db) = (a.digest(), b.digest());
    let r = multiply(alg, &mut a, &mut b, &mut c, &opts).unwrap_or_else(|e| panic!("{alg} {m}x{k}x{n}: {e}"));
    assert_eq!(c, want, "{alg} {m}x{k}x{n} seed {seed}");
    let (wa, wb) = alg.overwrites();
    if !wa {
        assert_eq!(a.digest(), da, "{alg} touched A");
    }
    if !wb {
        assert_eq!(b.digest(), db, "{alg} touched B");
    }
    if opts.alpha == 1 && opts.beta == 1 && m.is_power_of_two() && k.is_power_of_two() && n.is_power_of_two() {
        let e = expected_costs(alg, m, k, n, opts.cutoff).unwrap();
        let d = compare(&r, &e);
        assert!(d.is_empty(), "{alg} {m}x{k}x{n} cutoff {}: {d}", opts.cutoff);
    }
}

#[test]
fn builtins_square() {
    for id in ScheduleId::ALL {
        for n in [1, 2, 4, 8, 16] {
            for cutoff in [1, 2] {
                run(&Algorithm::Builtin(id), n, n, n, n as u64, MulOptions::with_cutoff(cutoff));
            }
        }
    }
}

#[test]
fn builtins_rectangular() {
    for id in [ScheduleId::Std2, ScheduleId::Acc3, ScheduleId::Acr] {
        for (m, k, n) in [(2, 4, 8), (8, 2, 4), (4, 8, 2), (8, 8, 2), (16, 4, 8)] {
            run(&Algorithm::Builtin(id), m, k, n, 7, MulOptions::default());
        }
    }
}

#[test]
fn scalars() {
    let opts = MulOptions { alpha: 3, beta: 65520, cutoff: 1 };
    for id in ScheduleId::ALL {
        run(&Algorithm::Builtin(id), 8, 8, 8, 3, opts);
    }
}

#[test]
fn drivers() {
    for (n, k) in [(1, 1), (2, 2), (4, 4), (2, 8), (8, 16), (16, 16)] {
        run(&Algorithm::Ipmm, n, k, n, 5, MulOptions::default());
    }
    for (m, k, n) in [(4, 4, 2), (8, 8, 2), (8, 4, 2), (16, 8, 4), (4, 8, 1)] {
        run(&Algorithm::Ipovmm, m, k, n, 9, MulOptions::default());
    }
    for base in [ScheduleId::Acc3, ScheduleId::Acc2] {
        for (t, n) in [(1, 8), (2, 4), (2, 16), (4, 16), (3, 12)] {
            run(&Algorithm::BlockedAcc { t, base }, n, n, n, 11, MulOptions::default());
        }
    }
}

#[test]
fn peeling() {
    for (m, k, n) in [(3, 3, 3), (5, 7, 6), (6, 6, 6), (12, 10, 9)] {
        for id in [ScheduleId::Std2, ScheduleId::Acc3] {
            run(&Algorithm::Builtin(id), m, k, n, 13, MulOptions::default());
        }
    }
}
