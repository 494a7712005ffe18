use std::time::Instant;

use anyhow::{Context, Result};
use winomem::pebble::{search, trace_to_schedule, Game, Limits, Outcome, ProductModel, TaskGraph};
use winomem::schedule::{render_schedule, validate, OverwritePolicy};

use crate::common::{self, EXIT_OK, EXIT_USAGE};
use crate::{Overwrite, Products, SearchArgs};

const EXIT_EXHAUSTED: u8 = 3;
const EXIT_TIMED_OUT: u8 = 4;

fn graph(spec: &str) -> Result<TaskGraph> {
    if spec.starts_with("builtin:") {
        return Ok(TaskGraph::load(spec)?);
    }
    let text = std::fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
    Ok(TaskGraph::parse(&text)?)
}

fn limits(args: &SearchArgs) -> Result<Limits> {
    let time_budget = args.time_budget.as_deref().map(common::duration).transpose()?;
    let products = match args.products {
        Products::Auto => ProductModel::Auto,
        Products::Preserving => ProductModel::Preserving,
        Products::InPlace => ProductModel::InPlace,
    };
    Ok(Limits { copy_budget: args.copy_budget, time_budget, state_cap: args.state_cap, products })
}

pub fn run(args: &SearchArgs) -> u8 {
    let setup = graph(&args.graph).and_then(|g| Ok((g, limits(args)?)));
    let (g, limits) = match setup {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_USAGE;
        }
    };
    let policy = match args.overwrite {
        Overwrite::None => OverwritePolicy::ReadOnly,
        Overwrite::A => OverwritePolicy::OverwriteA,
        Overwrite::B => OverwritePolicy::OverwriteB,
        Overwrite::Both => OverwritePolicy::OverwriteBoth,
    };
    let start = Instant::now();
    let res = search(&g, args.pebbles, policy, &limits);
    let took = start.elapsed();
    let head = format!("{} free pebble(s), {policy}, copy budget {}", args.pebbles, args.copy_budget);
    match res.outcome {
        Outcome::Found(t) => {
            println!("found: {head}; {} states in {took:.2?}; {} steps", res.states, t.steps.len());
            print!("{}", Game::for_trace(&g, &t).render(&t.steps));
            if let Some(path) = &args.emit {
                let s = match trace_to_schedule(&g, &t) {
                    Ok(s) => s,
                    Err(e) => {
                        eprintln!("error: {e}");
                        return EXIT_USAGE;
                    }
                };
                let report = validate(&s);
                if !report.ok() {
                    eprintln!("warning: emitted schedule does not validate:\n{report}");
                }
                if let Err(e) = std::fs::write(path, render_schedule(&s)) {
                    eprintln!("error: writing {}: {e}", path.display());
                    return EXIT_USAGE;
                }
                println!("schedule written to {}", path.display());
            }
            EXIT_OK
        }
        Outcome::Exhausted => {
            println!("exhausted: {head}; {} states in {took:.2?}", res.states);
            EXIT_EXHAUSTED
        }
        Outcome::TimedOut => {
            println!("timed out: {head}; {} states in {took:.2?}", res.states);
            EXIT_TIMED_OUT
        }
    }
}
