//! Grammar-directed random generation of `par` programs.
//!
//! Every generated program is a parallel composition of two bodies drawn
//! from the kernel grammar over the configured pool. Locals are used only
//! after they have been assigned, so every heap write in a well-typed
//! program is rooted in a consumed isolated pool variable or a fresh
//! allocation. The junk knob deliberately emits some ill-typed sources
//! (including re-reads of consumed isolateds) to keep the ill-formed
//! bucket visible. Generation is deterministic in the seed: each program
//! index gets its own ChaCha stream.

use super::{GenConfig, GenWeights};
use crate::cap::{adapt_field, sub_qualifier, TypeEnv};
use crate::kernel::freevars::normalize_seqs;
use crate::kernel::{Command, QualType, Qualifier};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

/// The pool environment for a config: `w0..`, `r0..`, `m0..`, `i0..`, all
/// of class `T`.
pub fn pool_env(cfg: &GenConfig) -> TypeEnv {
    let mut env = TypeEnv::new();
    let mut add = |prefix: &str, qualifier: Qualifier, count: usize| {
        for i in 0..count {
            env.bind(format!("{prefix}{i}"), QualType { qualifier, class: "T".to_string() });
        }
    };
    add("w", Qualifier::Writable, cfg.pool.writable);
    add("r", Qualifier::Readable, cfg.pool.readable);
    add("m", Qualifier::Immutable, cfg.pool.immutable);
    add("i", Qualifier::Isolated, cfg.pool.isolated);
    env
}

/// Deterministically generate `program_count` environment/program pairs.
pub fn generate(cfg: &GenConfig) -> Vec<(TypeEnv, Command)> {
    let env = pool_env(cfg);
    (0..cfg.program_count)
        .map(|index| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(index as u64);
            let mut gen = Gen {
                rng,
                weights: cfg.weights.clone(),
                pool: env.iter().map(|(n, t)| (n.clone(), t.qualifier)).collect(),
                fresh: 0,
            };
            let left = normalize_seqs(gen.body(cfg.max_depth, &mut Scope::default()));
            let right = normalize_seqs(gen.body(cfg.max_depth, &mut Scope::default()));
            (env.clone(), Command::par(left, right))
        })
        .collect()
}

#[derive(Clone)]
struct Local {
    name: String,
    qualifier: Qualifier,
    initialized: bool,
}

/// Per-branch generation state.
#[derive(Default, Clone)]
struct Scope {
    locals: Vec<Local>,
    consumed: BTreeSet<String>,
}

impl Scope {
    fn mark_initialized(&mut self, name: &str) {
        if let Some(local) = self.locals.iter_mut().rev().find(|l| l.name == name) {
            local.initialized = true;
        }
        self.consumed.remove(name);
    }
}

struct Gen {
    rng: ChaCha8Rng,
    weights: GenWeights,
    pool: Vec<(String, Qualifier)>,
    fresh: u32,
}

impl Gen {
    fn fresh_name(&mut self) -> String {
        let name = format!("b{}", self.fresh);
        self.fresh += 1;
        name
    }

    fn junk(&mut self) -> bool {
        self.rng.gen_range(0..100) < self.weights.junk_percent
    }

    /// Readable candidates: pool plus initialized locals, minus consumed
    /// names unless `ignore_consumed` (junk picks keep consumed names to
    /// surface double-consumption in the ill-formed bucket).
    fn sources(
        &self,
        scope: &Scope,
        ignore_consumed: bool,
        pred: impl Fn(Qualifier) -> bool,
    ) -> Vec<(String, Qualifier)> {
        self.pool
            .iter()
            .cloned()
            .chain(scope.locals.iter().filter(|l| l.initialized).map(|l| (l.name.clone(), l.qualifier)))
            .filter(|(n, q)| (ignore_consumed || !scope.consumed.contains(n)) && pred(*q))
            .collect()
    }

    /// Assignment targets: pool plus all locals, initialized or not.
    fn targets(&self, scope: &Scope) -> Vec<(String, Qualifier)> {
        self.pool
            .iter()
            .cloned()
            .chain(scope.locals.iter().map(|l| (l.name.clone(), l.qualifier)))
            .collect()
    }

    fn pick(&mut self, options: &[(String, Qualifier)]) -> Option<(String, Qualifier)> {
        if options.is_empty() {
            None
        } else {
            let i = self.rng.gen_range(0..options.len());
            Some(options[i].clone())
        }
    }

    fn read_var(&mut self, scope: &mut Scope, picked: &(String, Qualifier)) {
        if picked.1 == Qualifier::Isolated {
            scope.consumed.insert(picked.0.clone());
        }
    }

    fn body(&mut self, depth: u32, scope: &mut Scope) -> Command {
        let w = self.weights.clone();
        let mut table: Vec<(u32, u32)> = vec![
            (0, w.skip),
            (1, w.var_assign),
            (2, w.field_write),
            (3, w.field_read),
            (4, w.alloc),
            (5, w.consume_write),
        ];
        if depth > 0 {
            table.push((6, w.let_block));
            table.push((7, w.seq));
        }
        let total: u32 = table.iter().map(|(_, weight)| weight).sum();
        let mut roll = self.rng.gen_range(0..total.max(1));
        let mut production = 0;
        for (id, weight) in table {
            if roll < weight {
                production = id;
                break;
            }
            roll -= weight;
        }
        match production {
            1 => self.var_assign(scope),
            2 => self.field_write(scope),
            3 => self.field_read(scope),
            4 => {
                let target = self.fresh_name();
                scope.locals.push(Local {
                    name: target.clone(),
                    qualifier: Qualifier::Isolated,
                    initialized: true,
                });
                Command::alloc(target, "T")
            }
            5 => self.consume_write(scope),
            6 => {
                let var = self.fresh_name();
                let qualifier = *[
                    Qualifier::Writable,
                    Qualifier::Readable,
                    Qualifier::Immutable,
                    Qualifier::Isolated,
                ]
                .get(self.rng.gen_range(0..4usize))
                .unwrap();
                scope.locals.push(Local { name: var.clone(), qualifier, initialized: false });
                let body = self.body(depth - 1, scope);
                scope.locals.pop();
                Command::let_in(var, QualType { qualifier, class: "T".to_string() }, body)
            }
            7 => {
                let first = self.body(depth - 1, scope);
                let second = self.body(depth - 1, scope);
                Command::seq(first, second)
            }
            _ => Command::skip(),
        }
    }

    fn pick_source(&mut self, scope: &Scope, target_q: Qualifier) -> Option<(String, Qualifier)> {
        if self.junk() {
            let any = self.sources(scope, true, |_| true);
            self.pick(&any)
        } else {
            let compatible = self.sources(scope, false, |q| sub_qualifier(q, target_q));
            self.pick(&compatible)
        }
    }

    fn var_assign(&mut self, scope: &mut Scope) -> Command {
        let fresh_target = self.rng.gen_range(0..100) < 45;
        if fresh_target {
            let all = self.sources(scope, false, |_| true);
            let Some(source) = self.pick(&all) else { return Command::skip() };
            self.read_var(scope, &source);
            let target = self.fresh_name();
            scope.locals.push(Local { name: target.clone(), qualifier: source.1, initialized: true });
            Command::var_assign(target, source.0)
        } else {
            let targets = self.targets(scope);
            let Some(target) = self.pick(&targets) else { return Command::skip() };
            let Some(source) = self.pick_source(scope, target.1) else { return Command::skip() };
            self.read_var(scope, &source);
            scope.mark_initialized(&target.0);
            Command::var_assign(target.0, source.0)
        }
    }

    fn field_write(&mut self, scope: &mut Scope) -> Command {
        let bases = self.sources(scope, false, |q| q == Qualifier::Writable);
        let Some(base) = self.pick(&bases) else { return Command::skip() };
        let Some(source) = self.pick_source(scope, Qualifier::Writable) else {
            return Command::skip();
        };
        self.read_var(scope, &source);
        Command::field_write(base.0, "f", source.0)
    }

    fn field_read(&mut self, scope: &mut Scope) -> Command {
        let bases = if self.junk() {
            self.sources(scope, true, |_| true)
        } else {
            self.sources(scope, false, |q| q != Qualifier::Isolated)
        };
        let Some(base) = self.pick(&bases) else { return Command::skip() };
        let field = if self.rng.gen_range(0..2) == 0 { "f" } else { "g" };
        let declared = if field == "f" { Qualifier::Writable } else { Qualifier::Readable };
        let result = adapt_field(base.1, declared).unwrap_or(Qualifier::Readable);
        let target = self.fresh_name();
        scope.locals.push(Local { name: target.clone(), qualifier: result, initialized: true });
        Command::field_read(target, base.0, field)
    }

    /// `let w: writable T { w = i; w.f := w }` — partition mutable state
    /// into this branch through an isolated reference.
    fn consume_write(&mut self, scope: &mut Scope) -> Command {
        let isos = self.sources(scope, false, |q| q == Qualifier::Isolated);
        let Some(iso) = self.pick(&isos) else { return Command::skip() };
        scope.consumed.insert(iso.0.clone());
        let holder = self.fresh_name();
        let body = Command::seq(
            Command::var_assign(holder.clone(), iso.0),
            Command::field_write(holder.clone(), "f", holder.clone()),
        );
        Command::let_in(holder, QualType { qualifier: Qualifier::Writable, class: "T".to_string() }, body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{print_command, CommandKind};

    fn all_bodies(c: &Command) -> (&Command, &Command) {
        match &c.kind {
            CommandKind::Par(a, b) => (a, b),
            _ => panic!("generated programs are pars"),
        }
    }

    fn contains(c: &Command, pred: &impl Fn(&Command) -> bool) -> bool {
        if pred(c) {
            return true;
        }
        match &c.kind {
            CommandKind::Let { body, .. }
            | CommandKind::Recover { body, .. }
            | CommandKind::SpawnBackground(body)
            | CommandKind::AsyncUi(body) => contains(body, pred),
            CommandKind::Seq(a, b) | CommandKind::Par(a, b) => {
                contains(a, pred) || contains(b, pred)
            }
            _ => false,
        }
    }

    #[test]
    fn generation_is_reproducible_byte_for_byte() {
        let cfg = GenConfig::new(1, 1);
        let a = generate(&cfg);
        let b = generate(&cfg);
        assert_eq!(a.len(), 1);
        assert_eq!(print_command(&a[0].1), print_command(&b[0].1));
        all_bodies(&a[0].1);
    }

    #[test]
    fn writable_only_pool_produces_bare_assignment_bodies() {
        let mut cfg = GenConfig::new(5, 300);
        cfg.pool = super::super::VarPool { writable: 3, readable: 0, immutable: 0, isolated: 0 };
        cfg.max_depth = 1;
        let programs = generate(&cfg);
        let is_pool_assign = |c: &Command| {
            matches!(
                &c.kind,
                CommandKind::VarAssign { target, source }
                    if target.starts_with('w') && source.starts_with('w')
            )
        };
        assert!(
            programs.iter().any(|(_, p)| contains(p, &is_pool_assign)),
            "expected a pool-to-pool variable assignment in the corpus"
        );
    }

    #[test]
    fn isolated_pool_produces_consume_then_write_bodies() {
        let cfg = GenConfig::new(5, 300);
        let programs = generate(&cfg);
        let is_consume_write = |c: &Command| {
            if let CommandKind::Let { body, .. } = &c.kind {
                if let CommandKind::Seq(a, b) = &body.kind {
                    return matches!(&a.kind, CommandKind::VarAssign { source, .. } if source.starts_with('i'))
                        && matches!(&b.kind, CommandKind::FieldWrite { .. });
                }
            }
            false
        };
        assert!(
            programs.iter().any(|(_, p)| contains(p, &is_consume_write)),
            "expected a consume-then-write body in the corpus"
        );
    }

    #[test]
    fn generated_programs_reparse() {
        let cfg = GenConfig::new(9, 50);
        for (_, program) in generate(&cfg) {
            let text = print_command(&program);
            let reparsed = crate::kernel::parse(&text).expect("generated program parses");
            assert_eq!(reparsed.main, program, "round trip failed for {text}");
        }
    }
}
