use anyhow::{bail, Context, Result};
use winomem::algorithm::Algorithm;
use winomem::error::ExecError;
use winomem::exec::{multiply, MulOptions};
use winomem::meter::CostReport;
use winomem::ring::Matrix;

use crate::common::{self, EXIT_MISMATCH, EXIT_OK, EXIT_USAGE};
use crate::{Format, MultiplyArgs};

struct Outcome {
    report: CostReport,
    matches: bool,
    a_kept: Option<bool>,
    b_kept: Option<bool>,
}

fn load(path: &std::path::Path) -> Result<Matrix> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Matrix::read_text(&text).with_context(|| format!("parsing {}", path.display()))
}

fn operands(args: &MultiplyArgs) -> Result<(Matrix, Matrix, Matrix)> {
    let p = common::modulus(args.modulus)?;
    if let (Some(a), Some(b)) = (&args.a, &args.b) {
        let (a, b) = (load(a)?, load(b)?);
        let c = match &args.c {
            Some(c) => load(c)?,
            None => Matrix::zeros(a.rows(), b.cols(), p),
        };
        return Ok((a, b, c));
    }
    let Some(n) = args.n.or(args.m).or(args.k) else {
        bail!("give --n (and optionally --m, --k) or --a and --b");
    };
    let (m, k) = (args.m.unwrap_or(n), args.k.unwrap_or(n));
    Ok(common::operands(m, k, n, p, args.seed))
}

fn execute(alg: &Algorithm, args: &MultiplyArgs) -> Result<std::result::Result<Outcome, ExecError>> {
    let (mut a, mut b, mut c) = operands(args)?;
    let p = a.modulus();
    let opts = MulOptions { alpha: p.reduce(args.alpha), beta: p.reduce(args.beta), cutoff: args.cutoff };
    let want = common::reference(&a, &b, &c, opts.alpha, alg.accumulating().then_some(opts.beta));
    let (da, db) = (a.digest(), b.digest());
    let report = match multiply(alg, &mut a, &mut b, &mut c, &opts) {
        Ok(r) => r,
        Err(e) => return Ok(Err(e)),
    };
    let want = want?;
    let (wa, wb) = alg.overwrites();
    Ok(Ok(Outcome {
        report,
        matches: c == want,
        a_kept: (!wa).then(|| a.digest() == da),
        b_kept: (!wb).then(|| b.digest() == db),
    }))
}

pub fn run(args: &MultiplyArgs) -> u8 {
    let alg = match (&args.schedule_file, &args.variant) {
        (Some(path), _) => common::schedule_file(path),
        (None, Some(v)) => common::algorithm(v),
        (None, None) => unreachable!("clap requires one of them"),
    };
    let alg = match alg {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_USAGE;
        }
    };
    let out = match execute(&alg, args) {
        Ok(Ok(o)) => o,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            return match e {
                ExecError::ContractBreach(_) | ExecError::BadSchedule(_) => EXIT_MISMATCH,
                _ => EXIT_USAGE,
            };
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_USAGE;
        }
    };
    let kept = |k: Option<bool>| match k {
        Some(true) => "unchanged",
        Some(false) => "CHANGED",
        None => "overwritable",
    };
    let ok = out.matches && out.a_kept != Some(false) && out.b_kept != Some(false);
    match args.format {
        Format::Table => {
            println!("{}", out.report);
            println!("oracle: {}", if out.matches { "match" } else { "MISMATCH" });
            println!("A: {}, B: {}", kept(out.a_kept), kept(out.b_kept));
        }
        Format::Csv => {
            println!("{},oracle", CostReport::CSV_HEADER);
            println!("{},{}", out.report.csv_row(), if ok { "ok" } else { "fail" });
        }
        Format::JsonLines => {
            let mut v = common::report_json(&out.report);
            v["oracle"] = out.matches.into();
            v["a"] = kept(out.a_kept).into();
            v["b"] = kept(out.b_kept).into();
            println!("{v}");
        }
    }
    if ok {
        EXIT_OK
    } else {
        EXIT_MISMATCH
    }
}
