use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use anyhow::{bail, Context, Result};
use serde_json::json;
use winomem::algorithm::Algorithm;
use winomem::meter::CostReport;
use winomem::ring::{Elem, Matrix, Modulus};
use winomem::schedule::parse_schedule;

pub const EXIT_OK: u8 = 0;
pub const EXIT_MISMATCH: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

pub fn modulus(p: u64) -> Result<Modulus> {
    Modulus::new(p).with_context(|| format!("bad modulus {p}"))
}

pub fn algorithm(name: &str) -> Result<Algorithm> {
    Ok(Algorithm::parse(name)?)
}

pub fn schedule_file(path: &Path) -> Result<Algorithm> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let s = parse_schedule(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(Algorithm::Custom(Arc::new(s)))
}

/// The three operands of one run, drawn from one seed in the order A, B, C.
pub fn operands(m: usize, k: usize, n: usize, p: Modulus, seed: u64) -> (Matrix, Matrix, Matrix) {
    (
        Matrix::random(m, k, p, seed),
        Matrix::random(k, n, p, seed.wrapping_add(1)),
        Matrix::random(m, n, p, seed.wrapping_add(2)),
    )
}

/// `alpha*A*B (+ beta*C)` by the classical product.
pub fn reference(a: &Matrix, b: &Matrix, c: &Matrix, alpha: Elem, beta: Option<Elem>) -> Result<Matrix> {
    let p = a.modulus();
    let mut out = a.naive_product(b)?;
    for i in 0..out.rows() {
        for j in 0..out.cols() {
            let mut v = p.mul(alpha, out.get(i, j));
            if let Some(bt) = beta {
                v = p.add(v, p.mul(bt, c.get(i, j)));
            }
            out.set(i, j, v);
        }
    }
    Ok(out)
}

pub fn threads(default: usize) -> usize {
    match std::env::var("WINOMEM_THREADS") {
        Ok(v) => v.trim().parse().ok().filter(|&t| t > 0).unwrap_or(default),
        Err(_) => default,
    }
}

pub fn all_cores() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Maps `f` over `items` on up to `threads` workers, keeping the input order.
pub fn par_map<T: Sync, R: Send>(items: &[T], threads: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let out: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..threads.clamp(1, items.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                out.lock().unwrap()[i] = Some(r);
            });
        }
    });
    out.into_inner().unwrap().into_iter().map(|r| r.expect("every cell ran")).collect()
}

pub fn report_json(r: &CostReport) -> serde_json::Value {
    json!({
        "variant": r.algorithm,
        "m": r.m,
        "k": r.k,
        "n": r.n,
        "cutoff": r.cutoff,
        "mults": r.mults,
        "adds": r.adds,
        "peak_extra": r.peak_extra_words,
        "total_alloc": r.total_alloc_words,
        "moves": r.word_moves,
    })
}

/// Parses `600`, `600s`, `250ms`, `10m` or `2h`.
pub fn duration(s: &str) -> Result<std::time::Duration> {
    let s = s.trim();
    let split = s.find(|c: char| !c.is_ascii_digit() && c != '.').unwrap_or(s.len());
    let (num, unit) = s.split_at(split);
    let v: f64 = num.parse().with_context(|| format!("bad duration `{s}`"))?;
    let secs = match unit {
        "" | "s" => v,
        "ms" => v / 1000.0,
        "m" | "min" => v * 60.0,
        "h" => v * 3600.0,
        _ => bail!("bad duration unit in `{s}`"),
    };
    Ok(std::time::Duration::from_secs_f64(secs))
}
