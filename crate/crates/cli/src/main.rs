mod bench;
mod common;
mod multiply;
mod search;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "winomem", version, about = "Memory-reduced Strassen-Winograd products over Z/p")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Multiply random or loaded matrices, check against the classical product and print the costs.
    Multiply(MultiplyArgs),
    /// Sweep variants over sizes and compare measured costs with the models.
    Verify(VerifyArgs),
    /// Search a task graph for a schedule with a given number of free pebbles.
    Search(SearchArgs),
    /// Time variants over sizes and print the costs.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    JsonLines,
}

#[derive(Args)]
pub struct MultiplyArgs {
    /// Builtin schedule, classic, ipmm, ipovmm or blocked_acc[:t=T][:acc3|acc2].
    #[arg(long, required_unless_present = "schedule_file")]
    pub variant: Option<String>,
    /// Run a schedule read from a file instead of a named variant.
    #[arg(long)]
    pub schedule_file: Option<PathBuf>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 65521)]
    pub modulus: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub cutoff: usize,
    #[arg(long, default_value_t = 1)]
    pub alpha: u64,
    #[arg(long, default_value_t = 1)]
    pub beta: u64,
    /// Matrix files in the text format; dimensions are taken from them.
    #[arg(long, requires = "b")]
    pub a: Option<PathBuf>,
    #[arg(long, requires = "a")]
    pub b: Option<PathBuf>,
    #[arg(long)]
    pub c: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Comma-separated variants.
    #[arg(long, value_delimiter = ',', default_value = "std2,acc3,ip,ovl,ovr,aclr,accr,acc2")]
    pub variants: Vec<String>,
    /// Also verify a schedule file; costs are compared with the builtin of the same name.
    #[arg(long)]
    pub schedule_file: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    pub max_n: usize,
    #[arg(long, default_value_t = 1)]
    pub cutoff: usize,
    #[arg(long, default_value_t = 65521)]
    pub modulus: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Overwrite {
    None,
    A,
    B,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Products {
    Auto,
    Preserving,
    InPlace,
}

#[derive(Args)]
pub struct SearchArgs {
    /// `builtin:winograd`, `builtin:winograd-acc`, `builtin:classical` or a graph file.
    #[arg(long, default_value = "builtin:winograd")]
    pub graph: String,
    /// Free pebbles (temporaries) on top of the initial and output locations.
    #[arg(long, default_value_t = 0)]
    pub pebbles: usize,
    #[arg(long, value_enum, ignore_case = true, default_value_t = Overwrite::None)]
    pub overwrite: Overwrite,
    #[arg(long, default_value_t = 2)]
    pub copy_budget: usize,
    /// Wall-clock limit such as `600s`, `10m` or `1h`.
    #[arg(long)]
    pub time_budget: Option<String>,
    #[arg(long, default_value_t = 20_000_000)]
    pub state_cap: usize,
    #[arg(long, value_enum, default_value_t = Products::Auto)]
    pub products: Products,
    /// Write the schedule of a found trace to this file.
    #[arg(long)]
    pub emit: Option<PathBuf>,
}

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "classic,std2,ipmm")]
    pub variants: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "256,512")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 64)]
    pub cutoff: usize,
    #[arg(long, default_value_t = 65521)]
    pub modulus: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Multiply(a) => multiply::run(&a),
        Command::Verify(a) => verify::run(&a),
        Command::Search(a) => search::run(&a),
        Command::Bench(a) => bench::run(&a),
    };
    ExitCode::from(code)
}
