//! Differential harness: generate random `par` programs over a configured
//! variable pool, classify each one under the capability checker and the
//! heap-write effect discipline, and report the four-cell contingency table
//! quantifying the precision gap in both directions.

pub mod classify;
pub mod generate;

use crate::cap::TypeEnv;
use crate::kernel::{parse, print_command, Command, Program};
use serde::{Deserialize, Serialize};
use std::sync::LazyLock;

pub use classify::{classify, disjoint_write_spot_check, Cell};
pub use generate::generate;

/// Per-qualifier sizes of the generator's variable pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarPool {
    pub writable: usize,
    pub readable: usize,
    pub immutable: usize,
    pub isolated: usize,
}

impl Default for VarPool {
    fn default() -> Self {
        VarPool { writable: 2, readable: 2, immutable: 2, isolated: 2 }
    }
}

/// Grammar-production weights, loaded from the shipped config file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenWeights {
    pub skip: u32,
    pub var_assign: u32,
    pub field_write: u32,
    pub field_read: u32,
    pub alloc: u32,
    pub consume_write: u32,
    pub let_block: u32,
    pub seq: u32,
    /// percent chance a source is picked without compatibility filtering
    pub junk_percent: u32,
}

const DEFAULT_WEIGHTS_TOML: &str = include_str!("../../data/diff_weights.toml");

impl Default for GenWeights {
    fn default() -> Self {
        toml::from_str(DEFAULT_WEIGHTS_TOML).expect("shipped weight table parses")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    pub max_depth: u32,
    pub pool: VarPool,
    pub program_count: usize,
    pub weights: GenWeights,
}

impl GenConfig {
    pub fn new(seed: u64, program_count: usize) -> Self {
        GenConfig {
            seed,
            max_depth: 3,
            pool: VarPool::default(),
            program_count,
            weights: GenWeights::default(),
        }
    }
}

/// The fixed class table generated programs are checked against.
pub static HARNESS_PROGRAM: LazyLock<Program> = LazyLock::new(|| {
    parse("class T { field f: writable T; field g: readable T; } skip")
        .expect("harness class table parses")
});

/// One stored example program for a report cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    /// pool bindings as `name: qualifier class` lines
    pub env: Vec<String>,
    pub program: String,
}

/// Up to five witnesses per cell, keyed like the counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witnesses {
    #[serde(rename = "bothAccept")]
    pub both_accept: Vec<Witness>,
    #[serde(rename = "bothReject")]
    pub both_reject: Vec<Witness>,
    #[serde(rename = "capOnly")]
    pub cap_only: Vec<Witness>,
    #[serde(rename = "effectOnly")]
    pub effect_only: Vec<Witness>,
    #[serde(rename = "illFormed")]
    pub ill_formed: Vec<Witness>,
}

/// The contingency table. All buckets (including ill-formed) sum to the
/// configured program count.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapReport {
    #[serde(rename = "bothAccept")]
    pub both_accept: u64,
    #[serde(rename = "bothReject")]
    pub both_reject: u64,
    #[serde(rename = "capOnly")]
    pub cap_only: u64,
    pub count: u64,
    #[serde(rename = "effectOnly")]
    pub effect_only: u64,
    #[serde(rename = "illFormed")]
    pub ill_formed: u64,
    pub seed: u64,
    pub witnesses: Witnesses,
}

const WITNESSES_PER_CELL: usize = 5;

/// Generate, classify, and aggregate. Deterministic in the seed.
pub fn run_diff(cfg: &GenConfig) -> GapReport {
    let mut report = GapReport {
        seed: cfg.seed,
        count: cfg.program_count as u64,
        ..GapReport::default()
    };
    for (env, command) in generate(cfg) {
        let cell = classify(&HARNESS_PROGRAM, &env, &command);
        let (counter, bucket) = match cell {
            Cell::BothAccept => (&mut report.both_accept, &mut report.witnesses.both_accept),
            Cell::BothReject => (&mut report.both_reject, &mut report.witnesses.both_reject),
            Cell::CapOnly => (&mut report.cap_only, &mut report.witnesses.cap_only),
            Cell::EffectOnly => (&mut report.effect_only, &mut report.witnesses.effect_only),
            Cell::IllFormed => (&mut report.ill_formed, &mut report.witnesses.ill_formed),
        };
        *counter += 1;
        if bucket.len() < WITNESSES_PER_CELL {
            bucket.push(witness(&env, &command));
        }
    }
    report
}

fn witness(env: &TypeEnv, command: &Command) -> Witness {
    Witness {
        env: env.iter().map(|(name, ty)| format!("{name}: {ty}")).collect(),
        program: print_command(command),
    }
}
