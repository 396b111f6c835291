//! Bounded model finder: grounding, SAT search, instance extraction, and
//! deletion-minimized unsat cores at AST-node granularity.

pub mod ground;
pub mod prop;
pub mod solver;
pub mod universe;

pub use ground::{Env, Grounder, ParamRel, SymRel};
pub use solver::{Budget, StepBudget, Unbounded};
pub use universe::{AtomId, Scope, Universe, VarOrigin};

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::ast::{Model, NodeId, ParamInfo};
use crate::error::{Error, Result};
use crate::eval::Instance;
use crate::finder::prop::{pand, pxor, CnfBuilder, Lit, DEF_TAG};
use crate::finder::solver::Solver;

/// Default cap on ground variables (relation plus definitional).
pub const DEFAULT_VAR_CAP: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Sat,
    Unsat,
}

/// Outcome of a solve: a concrete instance when satisfiable, and an
/// AST-node core when unsatisfiable and requested.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: Status,
    pub instance: Option<Instance>,
    /// Witness values for command parameters, in parameter order.
    pub param_witness: Vec<BTreeSet<Vec<AtomId>>>,
    pub core: Option<BTreeSet<NodeId>>,
}

/// A grounded problem: CNF clauses tagged by conjunct, conjunct provenance,
/// and the universe the variables live in.
pub struct GroundFormula {
    pub universe: Universe,
    pub num_vars: usize,
    pub clauses: Vec<(Vec<Lit>, u32)>,
    /// Conjunct index -> finest originating AST node.
    pub conjunct_nodes: Vec<NodeId>,
    pub params: Vec<ParamRel>,
    pub var_cap: usize,
}

/// What a command solves: a body formula, negated for assertion checks,
/// with existentially-bound parameters.
pub struct CommandSpec<'a> {
    pub body: NodeId,
    pub negate: bool,
    pub params: &'a [ParamInfo],
}

/// Ground the conjunction of all facts plus a positive command formula.
pub fn ground(model: &Model, command_formula: NodeId, scope: &Scope) -> Result<GroundFormula> {
    ground_command(
        model,
        &CommandSpec { body: command_formula, negate: false, params: &[] },
        scope,
    )
}

/// Ground facts, structural constraints, and a command.
pub fn ground_command(
    model: &Model,
    cmd: &CommandSpec<'_>,
    scope: &Scope,
) -> Result<GroundFormula> {
    debug_assert!(model.resolved, "ground requires a resolved model");
    let universe = Universe::build(model, scope)?;
    if universe.relation_var_count() > DEFAULT_VAR_CAP {
        return Err(Error::Capacity {
            message: alloc::format!(
                "{} ground variables exceed the cap of {}",
                universe.relation_var_count(),
                DEFAULT_VAR_CAP
            ),
        });
    }
    let mut g = Grounder::new(&universe);
    g.add_structure(model)?;
    g.add_facts(model)?;
    let mut env = Env::default();
    for param in cmd.params {
        let rel = g.add_param(model, param)?;
        env.bind(param.node, 0, rel);
    }
    if cmd.negate {
        g.split(model, cmd.body, &env, prop::ptrue(), false)?;
    } else {
        g.split(model, cmd.body, &env, prop::ptrue(), true)?;
    }
    let Grounder { next_var, conjuncts, params, origins, .. } = g;
    finish(universe, next_var, conjuncts, params, origins, DEFAULT_VAR_CAP)
}

fn finish(
    mut universe: Universe,
    next_var: u32,
    conjuncts: Vec<ground::Conjunct>,
    params: Vec<ParamRel>,
    origins: Vec<VarOrigin>,
    var_cap: usize,
) -> Result<GroundFormula> {
    universe.origins = origins;
    let mut builder = CnfBuilder::new(next_var as usize, var_cap);
    let mut conjunct_nodes = Vec::with_capacity(conjuncts.len());
    for (i, c) in conjuncts.iter().enumerate() {
        builder.assert_conjunct(&c.prop, i as u32);
        conjunct_nodes.push(c.node);
    }
    if builder.exceeded() {
        return Err(Error::Capacity {
            message: alloc::format!("CNF conversion exceeds the cap of {} variables", var_cap),
        });
    }
    Ok(GroundFormula {
        universe,
        num_vars: builder.num_vars,
        clauses: builder.clauses,
        conjunct_nodes,
        params,
        var_cap,
    })
}

fn run_sat(
    g: &GroundFormula,
    skip_nodes: Option<&BTreeSet<NodeId>>,
    keep_only: Option<&BTreeSet<NodeId>>,
    budget: &dyn Budget,
) -> Result<(bool, Option<Solver>)> {
    let mut solver = Solver::new(g.num_vars);
    let mut alive = true;
    for (clause, tag) in &g.clauses {
        if *tag != DEF_TAG {
            let node = g.conjunct_nodes[*tag as usize];
            if let Some(skip) = skip_nodes {
                if skip.contains(&node) {
                    continue;
                }
            }
            if let Some(keep) = keep_only {
                if !keep.contains(&node) {
                    continue;
                }
            }
        }
        if !solver.add_clause(clause) {
            alive = false;
            break;
        }
    }
    if !alive {
        return Ok((false, None));
    }
    let sat = solver.solve(budget)?;
    Ok((sat, if sat { Some(solver) } else { None }))
}

fn extract_instance(model: &Model, g: &GroundFormula, solver: &Solver) -> Instance {
    let mut inst = Instance::empty(model, &g.universe);
    for (ai, mv) in g.universe.member_var.iter().enumerate() {
        let present = match mv {
            None => true,
            Some(v) => solver.model_value(*v),
        };
        if present {
            let sig = g.universe.atoms[ai].sig;
            inst.sig_atoms[sig].insert(ai as AtomId);
        }
    }
    for ((si, fi), vars) in &g.universe.field_vars {
        let set = inst.fields.entry((*si, *fi)).or_default();
        for (tuple, var) in vars {
            if solver.model_value(*var) {
                set.insert(tuple.clone());
            }
        }
    }
    inst
}

fn extract_params(g: &GroundFormula, solver: &Solver) -> Vec<BTreeSet<Vec<AtomId>>> {
    g.params
        .iter()
        .map(|p| {
            p.tuples
                .iter()
                .filter(|(_, v)| solver.model_value(*v))
                .map(|(t, _)| t.clone())
                .collect()
        })
        .collect()
}

/// Decide satisfiability; extract an instance on SAT, and a locally-minimal
/// node core on UNSAT when `want_core` is set.
pub fn solve(model: &Model, g: &GroundFormula, want_core: bool) -> Result<SolveResult> {
    solve_budgeted(model, g, want_core, &Unbounded)
}

pub fn solve_budgeted(
    model: &Model,
    g: &GroundFormula,
    want_core: bool,
    budget: &dyn Budget,
) -> Result<SolveResult> {
    let (sat, solver) = run_sat(g, None, None, budget)?;
    if sat {
        let solver = solver.unwrap();
        Ok(SolveResult {
            status: Status::Sat,
            instance: Some(extract_instance(model, g, &solver)),
            param_witness: extract_params(g, &solver),
            core: None,
        })
    } else {
        let core = if want_core {
            let all: BTreeSet<NodeId> = g.conjunct_nodes.iter().copied().collect();
            Some(minimize_core_budgeted(g, &all, budget)?)
        } else {
            None
        };
        Ok(SolveResult { status: Status::Unsat, instance: None, param_witness: Vec::new(), core })
    }
}

/// Satisfiability of the conjuncts belonging to `nodes` alone.
pub fn solve_with_nodes(
    g: &GroundFormula,
    nodes: &BTreeSet<NodeId>,
    budget: &dyn Budget,
) -> Result<Status> {
    let (sat, _) = run_sat(g, None, Some(nodes), budget)?;
    Ok(if sat { Status::Sat } else { Status::Unsat })
}

/// Deletion-based core minimization at AST-node granularity. Nodes are
/// dropped in descending id order; each survivor is necessary: removing
/// any single one leaves a satisfiable residue.
pub fn minimize_core(g: &GroundFormula, initial_core: &BTreeSet<NodeId>) -> Result<BTreeSet<NodeId>> {
    minimize_core_budgeted(g, initial_core, &Unbounded)
}

pub fn minimize_core_budgeted(
    g: &GroundFormula,
    initial_core: &BTreeSet<NodeId>,
    budget: &dyn Budget,
) -> Result<BTreeSet<NodeId>> {
    let (sat, _) = run_sat(g, None, Some(initial_core), budget)?;
    if sat {
        return Err(Error::NotUnsat);
    }
    let mut core = initial_core.clone();
    let order: Vec<NodeId> = core.iter().rev().copied().collect();
    for n in order {
        let mut candidate = core.clone();
        candidate.remove(&n);
        let (sat, _) = run_sat(g, None, Some(&candidate), budget)?;
        if !sat {
            core = candidate;
        }
    }
    Ok(core)
}

/// Outcome of a distinguishing solve between a model and its mutant.
#[derive(Debug, Clone)]
pub struct Distinguisher {
    pub instance: Instance,
    /// Witness parameter values, in the mutated paragraph's parameter order.
    pub params: Vec<BTreeSet<Vec<AtomId>>>,
}

/// The comparison shape for a distinguishing solve. Parameter pairs carry
/// the declaration from each side (ids match, bounds may differ after a
/// mutation inside a bound expression).
pub enum CompareKind {
    /// Fact-level semantics changed: SAT(F_a xor F_b).
    Facts,
    /// Predicate body changed: SAT((F_a and B_a(w)) xor (F_b and B_b(w))).
    PredBody { body_a: NodeId, body_b: NodeId, params: Vec<(ParamInfo, ParamInfo)> },
    /// Function body changed: SAT(F_a and F_b and B_a(w) != B_b(w)).
    FunBody { body_a: NodeId, body_b: NodeId, params: Vec<(ParamInfo, ParamInfo)> },
}

/// Search for an instance (plus parameter witness) on which the two models
/// disagree. `None` means the models are equivalent within scope for the
/// compared surface.
pub fn distinguish(
    a: &Model,
    b: &Model,
    kind: &CompareKind,
    scope: &Scope,
    budget: &dyn Budget,
) -> Result<Option<Distinguisher>> {
    debug_assert!(a.resolved && b.resolved);
    let universe = Universe::build_merged(a, b, scope)?;
    if universe.relation_var_count() > DEFAULT_VAR_CAP {
        return Err(Error::Capacity {
            message: String::from("merged universe exceeds the variable cap"),
        });
    }
    let mut g = Grounder::new(&universe);

    let facts_a = {
        let mut parts = Vec::new();
        collect_model_formula(&mut g, a, &mut parts)?;
        pand(parts)
    };
    let facts_b = {
        let mut parts = Vec::new();
        collect_model_formula(&mut g, b, &mut parts)?;
        pand(parts)
    };

    let formula = match kind {
        CompareKind::Facts => pxor(&facts_a, &facts_b),
        CompareKind::PredBody { body_a, body_b, params } => {
            let mut env = Env::default();
            for (pa, pb) in params {
                let rel = g.add_param_pair(a, pa, b, pb)?;
                env.bind(pa.node, 0, rel.clone());
                env.bind(pb.node, 0, rel);
            }
            let ba = g.formula(a, *body_a, &env)?;
            let bb = g.formula(b, *body_b, &env)?;
            pxor(&pand(alloc::vec![facts_a, ba]), &pand(alloc::vec![facts_b, bb]))
        }
        CompareKind::FunBody { body_a, body_b, params } => {
            let mut env = Env::default();
            for (pa, pb) in params {
                let rel = g.add_param_pair(a, pa, b, pb)?;
                env.bind(pa.node, 0, rel.clone());
                env.bind(pb.node, 0, rel);
            }
            let ra = g.eval_in(a, *body_a, &env)?;
            let rb = g.eval_in(b, *body_b, &env)?;
            let eq = rel_eq_prop(&ra, &rb);
            pand(alloc::vec![facts_a, facts_b, prop::pnot(&eq)])
        }
    };
    g.conjuncts.push(ground::Conjunct { prop: formula, node: a.root });

    let Grounder { next_var, conjuncts, params, origins, .. } = g;
    let gf = finish(universe, next_var, conjuncts, params, origins, DEFAULT_VAR_CAP)?;
    let (sat, solver) = run_sat(&gf, None, None, budget)?;
    match solver {
        Some(solver) if sat => {
            let instance = extract_instance(a, &gf, &solver);
            let params = extract_params(&gf, &solver);
            Ok(Some(Distinguisher { instance, params }))
        }
        _ => Ok(None),
    }
}

/// Facts, appended facts, and structural constraints of one model as
/// propositional parts over the shared universe.
fn collect_model_formula(
    g: &mut Grounder<'_>,
    model: &Model,
    parts: &mut Vec<prop::P>,
) -> Result<()> {
    let mark = g.conjuncts.len();
    g.add_structure(model)?;
    g.add_facts(model)?;
    // Structural and fact conjuncts were pushed into the sink; fold them
    // into a single formula for this side instead.
    let drained: Vec<ground::Conjunct> = g.conjuncts.drain(mark..).collect();
    parts.extend(drained.into_iter().map(|c| c.prop));
    Ok(())
}

fn rel_eq_prop(a: &SymRel, b: &SymRel) -> prop::P {
    let mut parts = Vec::new();
    let mut keys: BTreeSet<&Vec<AtomId>> = a.tuples.keys().collect();
    keys.extend(b.tuples.keys());
    for t in keys {
        let pa = a.tuples.get(t).cloned().unwrap_or_else(prop::pfalse);
        let pb = b.tuples.get(t).cloned().unwrap_or_else(prop::pfalse);
        parts.push(prop::piff(&pa, &pb));
    }
    pand(parts)
}

/// Map a ground variable assignment into per-relation tuple sets, used by
/// tests and debugging output.
pub fn origin_map(g: &GroundFormula) -> BTreeMap<u32, VarOrigin> {
    g.universe
        .origins
        .iter()
        .enumerate()
        .map(|(i, o)| (i as u32, o.clone()))
        .collect()
}
