use std::time::Instant;

use winomem::algorithm::Algorithm;
use winomem::exec::{check_supported, multiply, MulOptions};
use winomem::meter::CostReport;
use winomem::ring::{Matrix, Modulus};

use crate::common::{self, EXIT_MISMATCH, EXIT_OK, EXIT_USAGE};
use crate::{BenchArgs, Format};

const SPOT_CHECKS: usize = 16;

struct Row {
    report: CostReport,
    seconds: f64,
    spot_ok: bool,
}

/// Compares a few entries of `c` with dot products of the original operands.
fn spot_check(a: &Matrix, b: &Matrix, c0: &Matrix, c: &Matrix, accumulate: bool, seed: u64) -> bool {
    let p = a.modulus();
    let (m, n) = (c.rows(), c.cols());
    let mut x = seed | 1;
    (0..SPOT_CHECKS).all(|_| {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        let (i, j) = ((x as usize) % m, ((x >> 32) as usize) % n);
        let mut v = if accumulate { c0.get(i, j) } else { 0 };
        for l in 0..a.cols() {
            v = p.add(v, p.mul(a.get(i, l), b.get(l, j)));
        }
        v == c.get(i, j)
    })
}

fn run_row(alg: &Algorithm, n: usize, p: Modulus, args: &BenchArgs) -> Result<Row, String> {
    let (m, k) = if *alg == Algorithm::Ipovmm { (2 * n, 2 * n) } else { (n, n) };
    let (a, b, c0) = common::operands(m, k, n, p, args.seed);
    let (mut a2, mut b2, mut c) = (a.clone(), b.clone(), c0.clone());
    let start = Instant::now();
    let report = multiply(alg, &mut a2, &mut b2, &mut c, &MulOptions::with_cutoff(args.cutoff)).map_err(|e| e.to_string())?;
    let seconds = start.elapsed().as_secs_f64();
    let spot_ok = spot_check(&a, &b, &c0, &c, alg.accumulating(), args.seed ^ n as u64);
    Ok(Row { report, seconds, spot_ok })
}

pub fn run(args: &BenchArgs) -> u8 {
    let p = match common::modulus(args.modulus) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_USAGE;
        }
    };
    let mut cells = Vec::new();
    for v in args.variants.iter().filter(|v| !v.trim().is_empty()) {
        let alg = match common::algorithm(v) {
            Ok(a) => a,
            Err(e) => {
                eprintln!("error: {e:#}");
                return EXIT_USAGE;
            }
        };
        for &n in &args.sizes {
            let (m, k) = if alg == Algorithm::Ipovmm { (2 * n, 2 * n) } else { (n, n) };
            if let Err(e) = check_supported(&alg, m, k, n, args.cutoff) {
                eprintln!("error: {e}");
                return EXIT_USAGE;
            }
            cells.push((alg.clone(), n));
        }
    }
    // Timings are only comparable one at a time unless asked otherwise.
    let rows = common::par_map(&cells, common::threads(1), |(alg, n)| run_row(alg, *n, p, args));
    match args.format {
        Format::Csv => println!("{},seconds", CostReport::CSV_HEADER),
        Format::Table => println!("{:<22} {:>6} {:>16} {:>16} {:>10} {:>12} {:>10}", "variant", "n", "mults", "adds", "peak", "total", "seconds"),
        Format::JsonLines => {}
    }
    let mut bad = false;
    for row in rows {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_USAGE;
            }
        };
        if !row.spot_ok {
            eprintln!("error: {} n={} failed the spot check", row.report.algorithm, row.report.n);
            bad = true;
        }
        let r = &row.report;
        match args.format {
            Format::Csv => println!("{},{:.6}", r.csv_row(), row.seconds),
            Format::Table => println!(
                "{:<22} {:>6} {:>16} {:>16} {:>10} {:>12} {:>10.4}",
                r.algorithm, r.n, r.mults, r.adds, r.peak_extra_words, r.total_alloc_words, row.seconds
            ),
            Format::JsonLines => {
                let mut v = common::report_json(r);
                v["seconds"] = row.seconds.into();
                println!("{v}");
            }
        }
    }
    if bad {
        EXIT_MISMATCH
    } else {
        EXIT_OK
    }
}
