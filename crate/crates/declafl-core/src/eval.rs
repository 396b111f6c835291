//! Direct evaluation of formulas against concrete instances.
//!
//! This is the second, solver-independent route through the semantics: a
//! plain tree-walking interpreter over concrete tuple sets. It backs
//! soundness checks (a SAT instance must satisfy the original formulas),
//! expectation assignment for generated tests, and the exhaustive
//! enumeration oracle used to validate the solver.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::ast::{
    BinOp, Binding, ConstKind, DeclMult, Model, NodeId, Op, Quantifier, SigMult, UnOp,
};
use crate::error::{Error, Result};
use crate::finder::universe::{AtomId, Universe};

/// Concrete relation: a set of equal-length tuples.
pub type Rel = BTreeSet<Vec<AtomId>>;

/// A concrete valuation of every signature and field within a universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    /// Present atoms per signature own-pool.
    pub sig_atoms: Vec<BTreeSet<AtomId>>,
    /// Field tuples keyed by (sig index, field index).
    pub fields: BTreeMap<(usize, usize), Rel>,
}

impl Instance {
    pub fn empty(model: &Model, _u: &Universe) -> Instance {
        Instance {
            sig_atoms: alloc::vec![BTreeSet::new(); model.sigs.len()],
            fields: BTreeMap::new(),
        }
    }

    /// Extent of a signature: own atoms plus subsignature extents.
    pub fn extent(&self, model: &Model, sig: usize) -> BTreeSet<AtomId> {
        let mut out = self.sig_atoms[sig].clone();
        for &c in &model.sigs[sig].subsigs {
            out.extend(self.extent(model, c));
        }
        out
    }

    pub fn present(&self, atom: AtomId) -> bool {
        self.sig_atoms.iter().any(|s| s.contains(&atom))
    }

    /// All present atoms.
    pub fn univ(&self) -> BTreeSet<AtomId> {
        let mut out = BTreeSet::new();
        for s in &self.sig_atoms {
            out.extend(s.iter().copied());
        }
        out
    }
}

/// Variable environment for evaluation, keyed by declaration node.
#[derive(Debug, Clone, Default)]
pub struct EvalEnv {
    map: BTreeMap<(NodeId, usize), Rel>,
}

impl EvalEnv {
    pub fn bind(&mut self, decl: NodeId, index: usize, value: Rel) {
        self.map.insert((decl, index), value);
    }

    fn get(&self, decl: NodeId, index: usize) -> Option<&Rel> {
        self.map.get(&(decl, index))
    }
}

pub struct Evaluator<'m> {
    pub model: &'m Model,
    pub universe: &'m Universe,
    pub instance: &'m Instance,
}

impl<'m> Evaluator<'m> {
    pub fn new(model: &'m Model, universe: &'m Universe, instance: &'m Instance) -> Self {
        Evaluator { model, universe, instance }
    }

    pub fn formula(&self, n: NodeId, env: &EvalEnv) -> Result<bool> {
        let model = self.model;
        Ok(match model.op(n).clone() {
            Op::Block | Op::AppendedFact => {
                for &c in model.children(n) {
                    if !self.formula(c, env)? {
                        return Ok(false);
                    }
                }
                true
            }
            Op::Bin { op } if op.is_logical() => {
                let c = model.children(n);
                let a = self.formula(c[0], env)?;
                match op {
                    BinOp::And => a && self.formula(c[1], env)?,
                    BinOp::Or => a || self.formula(c[1], env)?,
                    BinOp::Implies => !a || self.formula(c[1], env)?,
                    BinOp::Iff => a == self.formula(c[1], env)?,
                    _ => unreachable!(),
                }
            }
            Op::ImpliesElse => {
                let c = model.children(n);
                if self.formula(c[0], env)? {
                    self.formula(c[1], env)?
                } else {
                    self.formula(c[2], env)?
                }
            }
            Op::Un { op: UnOp::Not } => !self.formula(model.children(n)[0], env)?,
            Op::Bin { op: BinOp::In } => {
                let c = model.children(n);
                let lhs = self.expr(c[0], env)?;
                let rhs = self.expr(c[1], env)?;
                lhs.is_subset(&rhs)
            }
            Op::Bin { op: BinOp::Eq } => {
                let c = model.children(n);
                self.expr(c[0], env)? == self.expr(c[1], env)?
            }
            Op::MultForm { m } => {
                let rel = self.expr(model.children(n)[0], env)?;
                match m {
                    Quantifier::Some => !rel.is_empty(),
                    Quantifier::No => rel.is_empty(),
                    Quantifier::Lone => rel.len() <= 1,
                    Quantifier::One => rel.len() == 1,
                    Quantifier::All => {
                        return Err(Error::Arity {
                            message: String::from("`all` is not a multiplicity"),
                            span: model.span(n),
                        })
                    }
                }
            }
            Op::Quant { q } => {
                let children = model.children(n).to_vec();
                let body = *children.last().unwrap();
                let decls = &children[..children.len() - 1];
                let mut sat = 0usize;
                let mut total = 0usize;
                self.for_assignments(decls, 0, env.clone(), &mut |env2| {
                    total += 1;
                    if self.formula(body, env2)? {
                        sat += 1;
                    }
                    Ok(())
                })?;
                match q {
                    Quantifier::All => sat == total,
                    Quantifier::Some => sat >= 1,
                    Quantifier::No => sat == 0,
                    Quantifier::Lone => sat <= 1,
                    Quantifier::One => sat == 1,
                }
            }
            Op::Let { .. } => {
                let c = model.children(n).to_vec();
                let value = self.expr(c[0], env)?;
                let mut env2 = env.clone();
                env2.bind(n, 0, value);
                self.formula(c[1], &env2)?
            }
            Op::Call { .. } | Op::Ident { .. } => {
                if let Some(Binding::Pred { pred }) = model.bindings.get(&n) {
                    let p = model.preds[*pred].clone();
                    let args = model.children(n).to_vec();
                    let mut env2 = EvalEnv::default();
                    for (param, &arg) in p.params.iter().zip(args.iter()) {
                        let value = self.expr(arg, env)?;
                        env2.bind(param.node, 0, value);
                    }
                    return self.formula(p.body, &env2);
                }
                return Err(Error::Arity {
                    message: String::from("expression used where a formula is required"),
                    span: model.span(n),
                });
            }
            _ => {
                return Err(Error::Arity {
                    message: String::from("expression used where a formula is required"),
                    span: model.span(n),
                })
            }
        })
    }

    /// Visit every assignment of the declaration list.
    fn for_assignments(
        &self,
        decls: &[NodeId],
        idx: usize,
        env: EvalEnv,
        f: &mut dyn FnMut(&EvalEnv) -> Result<()>,
    ) -> Result<()> {
        if idx == decls.len() {
            return f(&env);
        }
        let d = decls[idx];
        let (names_len, disj) = match self.model.op(d) {
            Op::QuantDecl { names, disj } => (names.len(), *disj),
            _ => (0, false),
        };
        let bound = self.expr(self.model.children(d)[0], &env)?;
        let atoms: Vec<AtomId> = bound.iter().map(|t| t[0]).collect();
        self.assign_names(decls, idx, d, names_len, disj, &atoms, Vec::new(), env, f)
    }

    #[allow(clippy::too_many_arguments)]
    fn assign_names(
        &self,
        decls: &[NodeId],
        idx: usize,
        d: NodeId,
        names_len: usize,
        disj: bool,
        atoms: &[AtomId],
        chosen: Vec<AtomId>,
        env: EvalEnv,
        f: &mut dyn FnMut(&EvalEnv) -> Result<()>,
    ) -> Result<()> {
        if chosen.len() == names_len {
            return self.for_assignments(decls, idx + 1, env, f);
        }
        for &a in atoms {
            if disj && chosen.contains(&a) {
                continue;
            }
            let mut env2 = env.clone();
            let mut single = BTreeSet::new();
            single.insert(alloc::vec![a]);
            env2.bind(d, chosen.len(), single);
            let mut chosen2 = chosen.clone();
            chosen2.push(a);
            self.assign_names(decls, idx, d, names_len, disj, atoms, chosen2, env2, f)?;
        }
        Ok(())
    }

    pub fn expr(&self, n: NodeId, env: &EvalEnv) -> Result<Rel> {
        let model = self.model;
        Ok(match model.op(n).clone() {
            Op::Ident { .. } | Op::Call { .. } => return self.eval_ref(n, env),
            Op::Const { k } => match k {
                ConstKind::None => Rel::new(),
                ConstKind::Univ => self.instance.univ().into_iter().map(|a| alloc::vec![a]).collect(),
                ConstKind::Iden => self
                    .instance
                    .univ()
                    .into_iter()
                    .map(|a| alloc::vec![a, a])
                    .collect(),
            },
            Op::Bin { op } => {
                let c = model.children(n).to_vec();
                match op {
                    BinOp::Union => {
                        let mut a = self.expr(c[0], env)?;
                        a.extend(self.expr(c[1], env)?);
                        a
                    }
                    BinOp::Diff => {
                        let a = self.expr(c[0], env)?;
                        let b = self.expr(c[1], env)?;
                        a.difference(&b).cloned().collect()
                    }
                    BinOp::Inter => {
                        let a = self.expr(c[0], env)?;
                        let b = self.expr(c[1], env)?;
                        a.intersection(&b).cloned().collect()
                    }
                    BinOp::Product => {
                        let a = self.expr(c[0], env)?;
                        let b = self.expr(c[1], env)?;
                        let mut out = Rel::new();
                        for ta in &a {
                            for tb in &b {
                                let mut t = ta.clone();
                                t.extend_from_slice(tb);
                                out.insert(t);
                            }
                        }
                        out
                    }
                    BinOp::Join => {
                        let a = self.expr(c[0], env)?;
                        let b = self.expr(c[1], env)?;
                        join(&a, &b)
                    }
                    _ => {
                        return Err(Error::Arity {
                            message: String::from("formula used where an expression is required"),
                            span: model.span(n),
                        })
                    }
                }
            }
            Op::Un { op } => {
                let inner = self.expr(model.children(n)[0], env)?;
                match op {
                    UnOp::Transpose => inner.into_iter().map(|t| alloc::vec![t[1], t[0]]).collect(),
                    UnOp::Closure => closure(&inner),
                    UnOp::RClosure => {
                        let mut out = closure(&inner);
                        for a in self.instance.univ() {
                            out.insert(alloc::vec![a, a]);
                        }
                        out
                    }
                    UnOp::Not => {
                        return Err(Error::Arity {
                            message: String::from("formula used where an expression is required"),
                            span: model.span(n),
                        })
                    }
                }
            }
            Op::Let { .. } => {
                let c = model.children(n).to_vec();
                let value = self.expr(c[0], env)?;
                let mut env2 = env.clone();
                env2.bind(n, 0, value);
                self.expr(c[1], &env2)?
            }
            _ => {
                return Err(Error::Arity {
                    message: String::from("formula used where an expression is required"),
                    span: model.span(n),
                })
            }
        })
    }

    fn eval_ref(&self, n: NodeId, env: &EvalEnv) -> Result<Rel> {
        let model = self.model;
        let binding = model.bindings.get(&n).copied().ok_or(Error::UnknownNode { id: n.0 })?;
        let base = match binding {
            Binding::Var { decl, index } => env
                .get(decl, index)
                .cloned()
                .ok_or(Error::UnknownNode { id: n.0 })?,
            Binding::Param { decl } | Binding::LetVar { decl } => env
                .get(decl, 0)
                .cloned()
                .ok_or(Error::UnknownNode { id: n.0 })?,
            Binding::Sig { sig } => self
                .instance
                .extent(model, sig)
                .into_iter()
                .map(|a| alloc::vec![a])
                .collect(),
            Binding::Field { sig, field } => self
                .instance
                .fields
                .get(&(sig, field))
                .cloned()
                .unwrap_or_default(),
            Binding::OrdFirst { open } => {
                let sig = model.opens[open].sig;
                let extent = &self.universe.extents[sig];
                extent.first().map(|&a| alloc::vec![a]).into_iter().collect()
            }
            Binding::OrdLast { open } => {
                let sig = model.opens[open].sig;
                let extent = &self.universe.extents[sig];
                extent.last().map(|&a| alloc::vec![a]).into_iter().collect()
            }
            Binding::OrdNext { open } => {
                let sig = model.opens[open].sig;
                let extent = &self.universe.extents[sig];
                extent.windows(2).map(|w| alloc::vec![w[0], w[1]]).collect()
            }
            Binding::Fun { fun } => {
                let f = model.funs[fun].clone();
                let args = model.children(n).to_vec();
                let mut env2 = EvalEnv::default();
                for (param, &arg) in f.params.iter().zip(args.iter()) {
                    let value = self.expr(arg, env)?;
                    env2.bind(param.node, 0, value);
                }
                return self.expr(f.body, &env2);
            }
            Binding::Pred { .. } => {
                return Err(Error::Arity {
                    message: String::from("predicate used where an expression is required"),
                    span: model.span(n),
                })
            }
        };
        let args = model.children(n).to_vec();
        if matches!(model.op(n), Op::Call { .. }) && !args.is_empty() {
            let mut acc = base;
            for &arg in &args {
                let a = self.expr(arg, env)?;
                acc = join(&a, &acc);
            }
            Ok(acc)
        } else {
            Ok(base)
        }
    }

    /// Structural well-formedness: signature multiplicities hold, field
    /// tuples connect present atoms, stay in range, and respect field
    /// multiplicities. Mirrors the grounder's structural conjuncts.
    pub fn wellformed(&self) -> Result<bool> {
        let model = self.model;
        for (si, sig) in model.sigs.iter().enumerate() {
            let extent = self.instance.extent(model, si);
            match sig.mult {
                SigMult::One => {
                    if extent.len() != 1 {
                        return Ok(false);
                    }
                }
                SigMult::Lone => {
                    if extent.len() > 1 {
                        return Ok(false);
                    }
                }
                _ => {}
            }
            for (fi, field) in sig.fields.iter().enumerate() {
                let tuples = self.instance.fields.get(&(si, fi)).cloned().unwrap_or_default();
                let range = self.expr(field.range, &EvalEnv::default())?;
                for t in &tuples {
                    if !extent.contains(&t[0]) || !self.instance.present(t[1]) {
                        return Ok(false);
                    }
                    if !range.contains(&alloc::vec![t[1]]) {
                        return Ok(false);
                    }
                }
                if field.mult != DeclMult::Set {
                    for &o in &extent {
                        let row = tuples.iter().filter(|t| t[0] == o).count();
                        let ok = match field.mult {
                            DeclMult::One => row == 1,
                            DeclMult::Lone => row <= 1,
                            DeclMult::SomeOf => row >= 1,
                            DeclMult::Set => true,
                        };
                        if !ok {
                            return Ok(false);
                        }
                    }
                }
            }
        }
        Ok(true)
    }

    /// All facts plus appended signature facts.
    pub fn facts_hold(&self) -> Result<bool> {
        for fact in &self.model.facts {
            if !self.formula(fact.body, &EvalEnv::default())? {
                return Ok(false);
            }
        }
        for sig in &self.model.sigs {
            if let Some(appended) = sig.appended {
                if !self.formula(appended, &EvalEnv::default())? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

fn join(a: &Rel, b: &Rel) -> Rel {
    let mut out = Rel::new();
    for ta in a {
        for tb in b {
            if ta[ta.len() - 1] == tb[0] {
                let mut t = ta[..ta.len() - 1].to_vec();
                t.extend_from_slice(&tb[1..]);
                out.insert(t);
            }
        }
    }
    out
}

fn closure(rel: &Rel) -> Rel {
    let mut out = rel.clone();
    loop {
        let step = join(&out, rel);
        let before = out.len();
        out.extend(step);
        if out.len() == before {
            return out;
        }
    }
}

/// Enumerate every valuation of the universe's relation variables, calling
/// `f` with each well-formed instance. Returns early if `f` says to stop.
pub fn enumerate_instances(
    model: &Model,
    universe: &Universe,
    f: &mut dyn FnMut(&Instance) -> Result<bool>,
) -> Result<()> {
    let vars = universe.relation_var_count();
    if vars > 26 {
        return Err(Error::Capacity {
            message: String::from("enumeration limited to 26 ground variables"),
        });
    }
    for bits in 0u64..(1u64 << vars) {
        let inst = instance_from_bits(model, universe, bits);
        let keep_going = f(&inst)?;
        if !keep_going {
            return Ok(());
        }
    }
    Ok(())
}

/// Build an instance from a bitmask over the universe's relation variables.
pub fn instance_from_bits(model: &Model, universe: &Universe, bits: u64) -> Instance {
    let mut inst = Instance::empty(model, universe);
    let on = |v: u32| bits & (1u64 << v) != 0;
    for (ai, mv) in universe.member_var.iter().enumerate() {
        let present = match mv {
            None => true,
            Some(v) => on(*v),
        };
        if present {
            let sig = universe.atoms[ai].sig;
            inst.sig_atoms[sig].insert(ai as AtomId);
        }
    }
    for ((si, fi), vars) in &universe.field_vars {
        let set = inst.fields.entry((*si, *fi)).or_default();
        for (tuple, var) in vars {
            if on(*var) {
                set.insert(tuple.clone());
            }
        }
    }
    inst
}

/// Brute-force satisfiability of facts plus a command body (optionally
/// negated) by exhaustive enumeration. The independent oracle for the
/// solver path.
pub fn enumerate_status(
    model: &Model,
    universe: &Universe,
    body: NodeId,
    negate: bool,
) -> Result<crate::finder::Status> {
    let mut found = false;
    enumerate_instances(model, universe, &mut |inst| {
        let ev = Evaluator::new(model, universe, inst);
        if !ev.wellformed()? || !ev.facts_hold()? {
            return Ok(true);
        }
        let mut value = ev.formula(body, &EvalEnv::default())?;
        if negate {
            value = !value;
        }
        if value {
            found = true;
            return Ok(false);
        }
        Ok(true)
    })?;
    Ok(if found { crate::finder::Status::Sat } else { crate::finder::Status::Unsat })
}
