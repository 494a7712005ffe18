//! Operation and memory accounting, plus the exact cost models it is checked against.

pub mod models;

use std::fmt;

/// One temporary allocation taken from the heap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AllocEvent {
    pub words: u64,
    pub depth: usize,
    pub slot: String,
}

/// One multiplication dispatched by the executor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CallEvent {
    pub target: String,
    pub m: usize,
    pub k: usize,
    pub n: usize,
    pub depth: usize,
    /// The call fell through to the classical kernel.
    pub classical: bool,
}

/// Counters for one execution context.
///
/// Only temporaries taken from the heap count towards memory; inputs,
/// outputs and scratch regions carved out of them do not.
#[derive(Clone, Debug, Default)]
pub struct CostMeter {
    pub mults: u64,
    pub adds: u64,
    /// Words copied by single-term instructions; not arithmetic.
    pub word_moves: u64,
    live: u64,
    peak: u64,
    total: u64,
    logging: bool,
    pub allocs: Vec<AllocEvent>,
    pub calls: Vec<CallEvent>,
}

impl CostMeter {
    pub fn new() -> Self {
        Self::default()
    }

    /// A meter that also keeps the allocation and call logs.
    pub fn with_log() -> Self {
        CostMeter { logging: true, ..Self::default() }
    }

    pub fn logging(&self) -> bool {
        self.logging
    }

    pub fn alloc(&mut self, words: u64, depth: usize, slot: &str) {
        self.live += words;
        self.total += words;
        self.peak = self.peak.max(self.live);
        if self.logging {
            self.allocs.push(AllocEvent { words, depth, slot: slot.to_string() });
        }
    }

    pub fn free(&mut self, words: u64) {
        assert!(words <= self.live, "freeing more than is live");
        self.live -= words;
    }

    pub fn call(&mut self, ev: CallEvent) {
        if self.logging {
            self.calls.push(ev);
        }
    }

    pub fn live_words(&self) -> u64 {
        self.live
    }

    pub fn peak_words(&self) -> u64 {
        self.peak
    }

    pub fn total_words(&self) -> u64 {
        self.total
    }

    pub fn report(&self, algorithm: &str, (m, k, n): (usize, usize, usize), cutoff: usize) -> CostReport {
        CostReport {
            algorithm: algorithm.to_string(),
            m,
            k,
            n,
            cutoff,
            mults: self.mults,
            adds: self.adds,
            peak_extra_words: self.peak,
            total_alloc_words: self.total,
            word_moves: self.word_moves,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CostReport {
    pub algorithm: String,
    pub m: usize,
    pub k: usize,
    pub n: usize,
    pub cutoff: usize,
    pub mults: u64,
    pub adds: u64,
    pub peak_extra_words: u64,
    pub total_alloc_words: u64,
    pub word_moves: u64,
}

impl CostReport {
    pub const CSV_HEADER: &'static str = "variant,m,k,n,cutoff,mults,adds,peak_extra,total_alloc";

    pub fn ops(&self) -> u64 {
        self.mults + self.adds
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.algorithm,
            self.m,
            self.k,
            self.n,
            self.cutoff,
            self.mults,
            self.adds,
            self.peak_extra_words,
            self.total_alloc_words
        )
    }
}

impl fmt::Display for CostReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} m={} k={} n={} cutoff={}: mults={} adds={} peak_extra={} total_alloc={} moves={}",
            self.algorithm,
            self.m,
            self.k,
            self.n,
            self.cutoff,
            self.mults,
            self.adds,
            self.peak_extra_words,
            self.total_alloc_words,
            self.word_moves
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldDiff {
    pub field: &'static str,
    pub measured: u64,
    pub expected: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DiffReport {
    pub diffs: Vec<FieldDiff>,
}

impl DiffReport {
    pub fn is_empty(&self) -> bool {
        self.diffs.is_empty()
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.diffs.iter().map(|d| d.field).collect()
    }
}

impl fmt::Display for DiffReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.diffs.is_empty() {
            return f.write_str("no differences");
        }
        let parts: Vec<String> = self
            .diffs
            .iter()
            .map(|d| format!("{}: measured {} expected {}", d.field, d.measured, d.expected))
            .collect();
        f.write_str(&parts.join("; "))
    }
}

/// Exact field-by-field comparison of the counted quantities.
pub fn compare(measured: &CostReport, expected: &CostReport) -> DiffReport {
    let fields = [
        ("mults", measured.mults, expected.mults),
        ("adds", measured.adds, expected.adds),
        ("peak_extra_words", measured.peak_extra_words, expected.peak_extra_words),
        ("total_alloc_words", measured.total_alloc_words, expected.total_alloc_words),
        ("word_moves", measured.word_moves, expected.word_moves),
    ];
    DiffReport {
        diffs: fields
            .into_iter()
            .filter(|(_, a, b)| a != b)
            .map(|(field, measured, expected)| FieldDiff { field, measured, expected })
            .collect(),
    }
}
