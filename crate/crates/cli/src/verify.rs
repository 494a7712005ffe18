use winomem::algorithm::Algorithm;
use winomem::exec::{check_supported, multiply, MulOptions};
use winomem::meter::models::expected_costs;
use winomem::meter::{compare, CostReport};
use winomem::schedule::{validate, ScheduleId};

use crate::common::{self, EXIT_MISMATCH, EXIT_OK, EXIT_USAGE};
use crate::{Format, VerifyArgs};

/// Published peak bound as a fraction of n^2, where there is one.
fn bound(alg: &Algorithm) -> Option<(u64, u64)> {
    use ScheduleId::*;
    match alg {
        Algorithm::Builtin(id) => match id {
            Std2 | Aclr | Accr | Acc2 => Some((2, 3)),
            Acc3 => Some((1, 1)),
            Ip => Some((0, 1)),
            Ovl | Ovl2 | Ovr => Some((1, 3)),
            Acr => None,
        },
        Algorithm::Ipmm | Algorithm::Ipovmm => Some((0, 1)),
        _ => None,
    }
}

/// The algorithm whose cost model applies: a schedule file named after a
/// builtin is held to that builtin's costs.
fn model_of(alg: &Algorithm) -> Algorithm {
    match alg {
        Algorithm::Custom(s) => ScheduleId::parse(&s.name).map(Algorithm::Builtin).unwrap_or_else(|| alg.clone()),
        _ => alg.clone(),
    }
}

fn dims(alg: &Algorithm, n: usize) -> (usize, usize, usize) {
    match alg {
        Algorithm::Ipovmm => (2 * n, 2 * n, n),
        _ => (n, n, n),
    }
}

struct Cell {
    alg: Algorithm,
    n: usize,
}

enum CellResult {
    Skipped,
    Failed(String),
    Done { report: CostReport, problems: Vec<String>, bound_ok: Option<bool> },
}

fn run_cell(cell: &Cell, args: &VerifyArgs) -> CellResult {
    let (m, k, n) = dims(&cell.alg, cell.n);
    if check_supported(&cell.alg, m, k, n, args.cutoff).is_err() {
        return CellResult::Skipped;
    }
    let p = match common::modulus(args.modulus) {
        Ok(p) => p,
        Err(e) => return CellResult::Failed(e.to_string()),
    };
    let (mut a, mut b, mut c) = common::operands(m, k, n, p, args.seed ^ (cell.n as u64) << 8);
    let want = common::reference(&a, &b, &c, 1, cell.alg.accumulating().then_some(1)).expect("dimensions agree");
    let (da, db) = (a.digest(), b.digest());
    let report = match multiply(&cell.alg, &mut a, &mut b, &mut c, &MulOptions::with_cutoff(args.cutoff)) {
        Ok(r) => r,
        Err(e) => return CellResult::Failed(e.to_string()),
    };
    let mut problems = Vec::new();
    if c != want {
        problems.push("result differs from the classical product".to_string());
    }
    let (wa, wb) = cell.alg.overwrites();
    if !wa && a.digest() != da {
        problems.push("A changed".into());
    }
    if !wb && b.digest() != db {
        problems.push("B changed".into());
    }
    match expected_costs(&model_of(&cell.alg), m, k, n, args.cutoff) {
        Ok(e) => {
            let d = compare(&report, &e);
            if !d.is_empty() {
                problems.push(d.to_string());
            }
        }
        Err(e) => problems.push(format!("no model: {e}")),
    }
    let bound_ok = bound(&cell.alg).map(|(num, den)| {
        let n2 = (n * n) as u64;
        if num == 0 {
            report.peak_extra_words == 0
        } else {
            report.peak_extra_words * den < num * n2
        }
    });
    if bound_ok == Some(false) {
        problems.push("peak exceeds the published bound".into());
    }
    CellResult::Done { report, problems, bound_ok }
}

pub fn run(args: &VerifyArgs) -> u8 {
    let mut algs = Vec::new();
    for v in args.variants.iter().filter(|v| !v.trim().is_empty()) {
        match common::algorithm(v) {
            Ok(a) => algs.push(a),
            Err(e) => {
                eprintln!("error: {e:#}");
                return EXIT_USAGE;
            }
        }
    }
    if let Some(path) = &args.schedule_file {
        let alg = match common::schedule_file(path) {
            Ok(a) => a,
            Err(e) => {
                eprintln!("error: {e:#}");
                return EXIT_USAGE;
            }
        };
        if let Algorithm::Custom(s) = &alg {
            let r = validate(s);
            if !r.ok() {
                println!("{} fails validation:\n{r}", path.display());
                return EXIT_MISMATCH;
            }
        }
        algs.push(alg);
    }
    if args.cutoff == 0 || args.max_n < 2 {
        eprintln!("error: need cutoff >= 1 and max-n >= 2");
        return EXIT_USAGE;
    }
    let sizes: Vec<usize> = std::iter::successors(Some(2usize), |n| Some(n * 2)).take_while(|&n| n <= args.max_n).collect();
    let cells: Vec<Cell> = algs.iter().flat_map(|a| sizes.iter().map(|&n| Cell { alg: a.clone(), n })).collect();
    let results = common::par_map(&cells, common::threads(common::all_cores()), |c| run_cell(c, args));

    let mut failed = 0;
    if args.format == Format::Table {
        println!("{:<22} {:>5} {:>14} {:>14} {:>10} {:>12} {:>6}  status", "variant", "n", "mults", "adds", "peak", "total", "bound");
    } else if args.format == Format::Csv {
        println!("{},status", CostReport::CSV_HEADER);
    }
    for (cell, res) in cells.iter().zip(&results) {
        let status = match res {
            CellResult::Skipped => "skipped".to_string(),
            CellResult::Failed(e) => {
                failed += 1;
                format!("FAIL: {e}")
            }
            CellResult::Done { problems, .. } if problems.is_empty() => "ok".to_string(),
            CellResult::Done { problems, .. } => {
                failed += 1;
                format!("FAIL: {}", problems.join("; "))
            }
        };
        match (args.format, res) {
            (Format::Table, CellResult::Done { report: r, bound_ok, .. }) => {
                let b = match bound_ok {
                    Some(true) => "<",
                    Some(false) => "!",
                    None => "-",
                };
                println!(
                    "{:<22} {:>5} {:>14} {:>14} {:>10} {:>12} {:>6}  {status}",
                    r.algorithm, cell.n, r.mults, r.adds, r.peak_extra_words, r.total_alloc_words, b
                );
            }
            (Format::Table, _) => println!("{:<22} {:>5} {status}", cell.alg.name(), cell.n),
            (Format::Csv, CellResult::Done { report, .. }) => println!("{},{status}", report.csv_row()),
            (Format::Csv, _) => {}
            (Format::JsonLines, CellResult::Done { report, .. }) => {
                let mut v = common::report_json(report);
                v["status"] = status.into();
                println!("{v}");
            }
            (Format::JsonLines, _) => {
                println!("{}", serde_json::json!({ "variant": cell.alg.name(), "n": cell.n, "status": status }));
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} cell(s) failed");
        EXIT_MISMATCH
    } else {
        EXIT_OK
    }
}
