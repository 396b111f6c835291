//! Grounding: translate facts plus a command formula into propositional
//! conjuncts over the universe's relation variables.
//!
//! Top-level structure is decomposed as far as possible: conjunctions and
//! blocks split, universal quantifiers expand over atoms (negations pushed
//! inward first, existentials expanding to disjunctions over the scope),
//! and predicate invocations inline their bodies. Each resulting conjunct
//! is labeled with the finest AST node that produced it, which is what
//! makes unsat cores point inside paragraph bodies.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::ast::{
    BinOp, Binding, ConstKind, DeclMult, Model, NodeId, Op, ParamInfo, Quantifier, SigMult, UnOp,
};
use crate::error::{Error, Result};
use crate::finder::prop::{
    at_least_one, pand, pfalse, pimplies, pnot, por, ptrue, pvar, Lit, P,
};
use crate::finder::universe::{upper_bound_atoms, AtomId, Universe, VarOrigin};

/// A relation with symbolic tuple presence.
#[derive(Debug, Clone)]
pub struct SymRel {
    pub arity: u8,
    pub tuples: BTreeMap<Vec<AtomId>, P>,
}

impl SymRel {
    pub fn empty(arity: u8) -> SymRel {
        SymRel { arity, tuples: BTreeMap::new() }
    }

    fn insert(&mut self, tuple: Vec<AtomId>, p: P) {
        use crate::finder::prop::Prop;
        if matches!(*p, Prop::False) {
            return;
        }
        match self.tuples.remove(&tuple) {
            Some(old) => {
                self.tuples.insert(tuple, por(alloc::vec![old, p]));
            }
            None => {
                self.tuples.insert(tuple, p);
            }
        }
    }
}

/// Environment binding declaration nodes to symbolic values.
#[derive(Debug, Clone, Default)]
pub struct Env {
    map: BTreeMap<(NodeId, usize), SymRel>,
}

impl Env {
    pub fn bind(&mut self, decl: NodeId, index: usize, value: SymRel) {
        self.map.insert((decl, index), value);
    }

    fn get(&self, decl: NodeId, index: usize) -> Option<&SymRel> {
        self.map.get(&(decl, index))
    }
}

/// One ground conjunct: a propositional formula plus its source node.
#[derive(Debug, Clone)]
pub struct Conjunct {
    pub prop: P,
    pub node: NodeId,
}

/// Free relation introduced for a command or comparison parameter.
#[derive(Debug, Clone)]
pub struct ParamRel {
    pub name: String,
    pub decl: NodeId,
    pub tuples: Vec<(Vec<AtomId>, u32)>,
}

pub struct Grounder<'m> {
    pub universe: &'m Universe,
    pub next_var: u32,
    pub conjuncts: Vec<Conjunct>,
    pub params: Vec<ParamRel>,
    pub origins: Vec<VarOrigin>,
    ops: u64,
    ops_cap: u64,
}

const DEFAULT_OPS_CAP: u64 = 20_000_000;

impl<'m> Grounder<'m> {
    pub fn new(universe: &'m Universe) -> Grounder<'m> {
        Grounder {
            universe,
            next_var: universe.relation_var_count() as u32,
            conjuncts: Vec::new(),
            params: Vec::new(),
            origins: universe.origins.clone(),
            ops: 0,
            ops_cap: DEFAULT_OPS_CAP,
        }
    }

    fn tick(&mut self, n: u64) -> Result<()> {
        self.ops += n;
        if self.ops > self.ops_cap {
            return Err(Error::Capacity {
                message: String::from("ground formula expansion exceeds the configured cap"),
            });
        }
        Ok(())
    }

    /// Emit the structural conjuncts of a model: signature multiplicities,
    /// field frames, typing, and field multiplicities. Provenance points at
    /// the declaring nodes.
    pub fn add_structure(&mut self, model: &Model) -> Result<()> {
        for (si, sig) in model.sigs.iter().enumerate() {
            let extent = &self.universe.extents[si];
            let presences: Vec<P> = extent
                .iter()
                .map(|&a| self.atom_presence(a))
                .collect();
            match sig.mult {
                SigMult::One => {
                    let need = pand(alloc::vec![
                        or_of(&presences),
                        at_most_one_props(&presences),
                    ]);
                    self.conjuncts.push(Conjunct { prop: need, node: sig.node });
                }
                SigMult::Lone => {
                    self.conjuncts.push(Conjunct {
                        prop: at_most_one_props(&presences),
                        node: sig.node,
                    });
                }
                _ => {}
            }
            for (fi, field) in sig.fields.iter().enumerate() {
                let vars = self.universe.field_vars.get(&(si, fi)).cloned().unwrap_or_default();
                let range = self.eval_in(model, field.range, &Env::default())?;
                let mut parts = Vec::new();
                for (tuple, var) in &vars {
                    let owner = self.atom_presence(tuple[0]);
                    let target = self.atom_presence(tuple[1]);
                    let in_range = range
                        .tuples
                        .get(&alloc::vec![tuple[1]])
                        .cloned()
                        .unwrap_or_else(pfalse);
                    let t = pvar(*var);
                    parts.push(pimplies(&t, &owner));
                    parts.push(pimplies(&t, &target));
                    parts.push(pimplies(&t, &in_range));
                }
                // Field multiplicity per owner atom.
                if field.mult != DeclMult::Set {
                    for &o in extent.iter() {
                        let row: Vec<P> = vars
                            .iter()
                            .filter(|(t, _)| t[0] == o)
                            .map(|(_, v)| pvar(*v))
                            .collect();
                        let owner = self.atom_presence(o);
                        let constraint = match field.mult {
                            DeclMult::One => pand(alloc::vec![
                                or_of(&row),
                                at_most_one_props(&row),
                            ]),
                            DeclMult::Lone => at_most_one_props(&row),
                            DeclMult::SomeOf => or_of(&row),
                            DeclMult::Set => ptrue(),
                        };
                        parts.push(pimplies(&owner, &constraint));
                    }
                }
                self.conjuncts.push(Conjunct { prop: pand(parts), node: field.node });
            }
        }
        Ok(())
    }

    /// Conjuncts of all facts and appended signature facts.
    pub fn add_facts(&mut self, model: &Model) -> Result<()> {
        for fact in &model.facts {
            self.split(model, fact.body, &Env::default(), ptrue(), true)?;
        }
        for sig in &model.sigs {
            if let Some(appended) = sig.appended {
                self.split(model, appended, &Env::default(), ptrue(), true)?;
            }
        }
        Ok(())
    }

    /// Introduce a free relation for a parameter declaration, constrained
    /// to its bound and multiplicity.
    pub fn add_param(&mut self, model: &Model, param: &ParamInfo) -> Result<SymRel> {
        let bound_atoms = upper_bound_atoms(model, self.universe, param.bound);
        let bound = self.eval_in(model, param.bound, &Env::default())?;
        let mut rel = SymRel::empty(1);
        let mut tuples = Vec::new();
        let mut lits = Vec::new();
        let mut parts = Vec::new();
        for &a in &bound_atoms {
            let var = self.next_var;
            self.next_var += 1;
            self.origins.push(VarOrigin::ParamTuple {
                param: self.params.len(),
                tuple: alloc::vec![a],
            });
            tuples.push((alloc::vec![a], var));
            rel.insert(alloc::vec![a], pvar(var));
            lits.push(Lit::pos(var));
            let in_bound = bound.tuples.get(&alloc::vec![a]).cloned().unwrap_or_else(pfalse);
            parts.push(pimplies(&pvar(var), &in_bound));
        }
        match param.mult {
            DeclMult::Set => {}
            DeclMult::One => {
                parts.push(at_least_one(&lits));
                parts.push(crate::finder::prop::at_most_one(&lits));
            }
            DeclMult::Lone => parts.push(crate::finder::prop::at_most_one(&lits)),
            DeclMult::SomeOf => parts.push(at_least_one(&lits)),
        }
        self.conjuncts.push(Conjunct { prop: pand(parts), node: param.node });
        self.params.push(ParamRel {
            name: param.name.clone(),
            decl: param.node,
            tuples,
        });
        Ok(rel)
    }

    /// A free parameter relation with no typing constraints, candidate
    /// tuples drawn from the union of both models' bound upper sets. Used
    /// by distinguishing solves, where a killing test may invoke the
    /// predicate with arbitrary arguments.
    pub fn add_param_pair(
        &mut self,
        a: &Model,
        pa: &ParamInfo,
        b: &Model,
        pb: &ParamInfo,
    ) -> Result<SymRel> {
        let mut atoms = upper_bound_atoms(a, self.universe, pa.bound);
        atoms.extend(upper_bound_atoms(b, self.universe, pb.bound));
        atoms.sort_unstable();
        atoms.dedup();
        let mut rel = SymRel::empty(1);
        let mut tuples = Vec::new();
        for &at in &atoms {
            let var = self.next_var;
            self.next_var += 1;
            self.origins.push(VarOrigin::ParamTuple {
                param: self.params.len(),
                tuple: alloc::vec![at],
            });
            tuples.push((alloc::vec![at], var));
            rel.insert(alloc::vec![at], pvar(var));
        }
        self.params.push(ParamRel { name: pa.name.clone(), decl: pa.node, tuples });
        Ok(rel)
    }

    /// Translate a formula into a single propositional value (no splitting).
    pub fn formula(&mut self, model: &Model, n: NodeId, env: &Env) -> Result<P> {
        self.translate(model, n, env)
    }

    /// Split a formula into labeled conjuncts under an accumulated guard.
    /// `positive` is the polarity.
    pub fn split(
        &mut self,
        model: &Model,
        n: NodeId,
        env: &Env,
        guard: P,
        positive: bool,
    ) -> Result<()> {
        self.tick(1)?;
        match model.op(n).clone() {
            Op::Block | Op::AppendedFact if positive => {
                for &c in model.children(n).to_vec().iter() {
                    self.split(model, c, env, guard.clone(), true)?;
                }
                Ok(())
            }
            Op::Bin { op: BinOp::And } if positive => {
                let c = model.children(n).to_vec();
                self.split(model, c[0], env, guard.clone(), true)?;
                self.split(model, c[1], env, guard, true)
            }
            Op::Bin { op: BinOp::Or } if !positive => {
                let c = model.children(n).to_vec();
                self.split(model, c[0], env, guard.clone(), false)?;
                self.split(model, c[1], env, guard, false)
            }
            Op::Bin { op: BinOp::Implies } if !positive => {
                // not (a => b) == a and not b
                let c = model.children(n).to_vec();
                self.split(model, c[0], env, guard.clone(), true)?;
                self.split(model, c[1], env, guard, false)
            }
            Op::Un { op: UnOp::Not } => {
                self.split(model, model.children(n)[0], env, guard, !positive)
            }
            Op::Let { .. } => {
                let c = model.children(n).to_vec();
                let value = self.eval_in(model, c[0], env)?;
                let mut env2 = env.clone();
                env2.bind(n, 0, value);
                self.split(model, c[1], &env2, guard, positive)
            }
            Op::Quant { q } => {
                // Universally-shaped quantifiers expand to one conjunct per
                // assignment: `all` positively, `some` under negation, and
                // `no` positively (for all, the body fails).
                let body_polarity = match (q, positive) {
                    (Quantifier::All, true) => Some(true),
                    (Quantifier::Some, false) => Some(false),
                    (Quantifier::No, true) => Some(false),
                    _ => None,
                };
                if let Some(polarity) = body_polarity {
                    let children = model.children(n).to_vec();
                    let body = *children.last().unwrap();
                    let decls = &children[..children.len() - 1];
                    let assignments = self.expand_decls(model, decls, env)?;
                    for (env2, presence) in assignments {
                        let g = pand(alloc::vec![guard.clone(), presence]);
                        self.split(model, body, &env2, g, polarity)?;
                    }
                    Ok(())
                } else {
                    self.leaf(model, n, env, guard, positive)
                }
            }
            Op::Call { .. } | Op::Ident { .. } => {
                if let Some(Binding::Pred { pred }) = model.bindings.get(&n) {
                    let p = model.preds[*pred].clone();
                    let args = model.children(n).to_vec();
                    let mut env2 = Env::default();
                    for (param, &arg) in p.params.iter().zip(args.iter()) {
                        let value = self.eval_in(model, arg, env)?;
                        env2.bind(param.node, 0, value);
                    }
                    return self.split(model, p.body, &env2, guard, positive);
                }
                self.leaf(model, n, env, guard, positive)
            }
            _ => self.leaf(model, n, env, guard, positive),
        }
    }

    fn leaf(&mut self, model: &Model, n: NodeId, env: &Env, guard: P, positive: bool) -> Result<()> {
        let p = self.translate_in(model, n, env)?;
        let p = if positive { p } else { pnot(&p) };
        let prop = pimplies(&guard, &p);
        self.conjuncts.push(Conjunct { prop, node: n });
        Ok(())
    }

    /// All variable assignments of a declaration list: returns extended
    /// environments plus the conjunction of presence conditions.
    fn expand_decls(
        &mut self,
        model: &Model,
        decls: &[NodeId],
        env: &Env,
    ) -> Result<Vec<(Env, P)>> {
        let mut states = alloc::vec![(env.clone(), ptrue())];
        for &d in decls {
            let (names_len, disj) = match model.op(d) {
                Op::QuantDecl { names, disj } => (names.len(), *disj),
                _ => (0, false),
            };
            let bound_node = model.children(d)[0];
            let mut next = Vec::new();
            for (cur_env, cur_p) in states {
                let bound = self.eval_in(model, bound_node, &cur_env)?;
                if bound.arity != 1 {
                    return Err(Error::Arity {
                        message: String::from("quantifier bound must be unary"),
                        span: model.span(bound_node),
                    });
                }
                let candidates: Vec<(AtomId, P)> = bound
                    .tuples
                    .iter()
                    .map(|(t, p)| (t[0], p.clone()))
                    .collect();
                // Assignment vectors for this declaration's names.
                let mut partial = alloc::vec![(cur_env.clone(), cur_p.clone(), Vec::new())];
                for i in 0..names_len {
                    let mut grown = Vec::new();
                    for (e, p, chosen) in partial {
                        for (atom, presence) in &candidates {
                            if disj && chosen.contains(atom) {
                                continue;
                            }
                            self.tick(1)?;
                            let mut e2 = e.clone();
                            let mut single = SymRel::empty(1);
                            single.insert(alloc::vec![*atom], ptrue());
                            e2.bind(d, i, single);
                            let mut chosen2 = chosen.clone();
                            chosen2.push(*atom);
                            grown.push((
                                e2,
                                pand(alloc::vec![p.clone(), presence.clone()]),
                                chosen2,
                            ));
                        }
                    }
                    partial = grown;
                }
                next.extend(partial.into_iter().map(|(e, p, _)| (e, p)));
            }
            states = next;
        }
        Ok(states)
    }

    fn translate(&mut self, model: &Model, n: NodeId, env: &Env) -> Result<P> {
        self.translate_in(model, n, env)
    }

    /// Translate a formula node to a propositional value.
    fn translate_in(&mut self, model: &Model, n: NodeId, env: &Env) -> Result<P> {
        self.tick(1)?;
        Ok(match model.op(n).clone() {
            Op::Block | Op::AppendedFact => {
                let mut parts = Vec::new();
                for &c in model.children(n).to_vec().iter() {
                    parts.push(self.translate_in(model, c, env)?);
                }
                pand(parts)
            }
            Op::Bin { op } if op.is_logical() => {
                let c = model.children(n).to_vec();
                let a = self.translate_in(model, c[0], env)?;
                let b = self.translate_in(model, c[1], env)?;
                match op {
                    BinOp::And => pand(alloc::vec![a, b]),
                    BinOp::Or => por(alloc::vec![a, b]),
                    BinOp::Implies => pimplies(&a, &b),
                    BinOp::Iff => crate::finder::prop::piff(&a, &b),
                    _ => unreachable!(),
                }
            }
            Op::ImpliesElse => {
                let c = model.children(n).to_vec();
                let cond = self.translate_in(model, c[0], env)?;
                let t = self.translate_in(model, c[1], env)?;
                let e = self.translate_in(model, c[2], env)?;
                por(alloc::vec![
                    pand(alloc::vec![cond.clone(), t]),
                    pand(alloc::vec![pnot(&cond), e]),
                ])
            }
            Op::Un { op: UnOp::Not } => pnot(&self.translate_in(model, model.children(n)[0], env)?),
            Op::Bin { op: BinOp::In } => {
                let c = model.children(n).to_vec();
                let lhs = self.eval_in(model, c[0], env)?;
                let rhs = self.eval_in(model, c[1], env)?;
                subset_prop(&lhs, &rhs)
            }
            Op::Bin { op: BinOp::Eq } => {
                let c = model.children(n).to_vec();
                let lhs = self.eval_in(model, c[0], env)?;
                let rhs = self.eval_in(model, c[1], env)?;
                pand(alloc::vec![subset_prop(&lhs, &rhs), subset_prop(&rhs, &lhs)])
            }
            Op::MultForm { m } => {
                let rel = self.eval_in(model, model.children(n)[0], env)?;
                let presences: Vec<P> = rel.tuples.values().cloned().collect();
                match m {
                    Quantifier::Some => or_of(&presences),
                    Quantifier::No => pnot(&or_of(&presences)),
                    Quantifier::Lone => at_most_one_props(&presences),
                    Quantifier::One => pand(alloc::vec![
                        or_of(&presences),
                        at_most_one_props(&presences),
                    ]),
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
                let assignments = self.expand_decls(model, decls, env)?;
                let mut bodies = Vec::new();
                for (env2, presence) in &assignments {
                    let b = self.translate_in(model, body, env2)?;
                    bodies.push((presence.clone(), b));
                }
                match q {
                    Quantifier::All => pand(
                        bodies.iter().map(|(g, b)| pimplies(g, b)).collect(),
                    ),
                    Quantifier::Some => {
                        or_of(&bodies.iter().map(|(g, b)| pand(alloc::vec![g.clone(), b.clone()])).collect::<Vec<P>>())
                    }
                    Quantifier::No => pnot(&or_of(
                        &bodies.iter().map(|(g, b)| pand(alloc::vec![g.clone(), b.clone()])).collect::<Vec<P>>(),
                    )),
                    Quantifier::Lone => at_most_one_props(
                        &bodies.iter().map(|(g, b)| pand(alloc::vec![g.clone(), b.clone()])).collect::<Vec<P>>(),
                    ),
                    Quantifier::One => {
                        let terms: Vec<P> = bodies
                            .iter()
                            .map(|(g, b)| pand(alloc::vec![g.clone(), b.clone()]))
                            .collect();
                        pand(alloc::vec![or_of(&terms), at_most_one_props(&terms)])
                    }
                }
            }
            Op::Let { .. } => {
                let c = model.children(n).to_vec();
                let value = self.eval_in(model, c[0], env)?;
                let mut env2 = env.clone();
                env2.bind(n, 0, value);
                self.translate_in(model, c[1], &env2)?
            }
            Op::Call { .. } | Op::Ident { .. } => {
                if let Some(Binding::Pred { pred }) = model.bindings.get(&n) {
                    let p = model.preds[*pred].clone();
                    let args = model.children(n).to_vec();
                    let mut env2 = Env::default();
                    for (param, &arg) in p.params.iter().zip(args.iter()) {
                        let value = self.eval_in(model, arg, env)?;
                        env2.bind(param.node, 0, value);
                    }
                    return self.translate_in(model, p.body, &env2);
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

    fn atom_presence(&self, atom: AtomId) -> P {
        match self.universe.member_var[atom as usize] {
            None => ptrue(),
            Some(v) => pvar(v),
        }
    }

    /// Evaluate a relational expression symbolically.
    pub fn eval_in(&mut self, model: &Model, n: NodeId, env: &Env) -> Result<SymRel> {
        self.tick(1)?;
        Ok(match model.op(n).clone() {
            Op::Ident { .. } | Op::Call { .. } => return self.eval_ref(model, n, env),
            Op::Const { k } => match k {
                ConstKind::None => SymRel::empty(1),
                ConstKind::Univ => {
                    let mut rel = SymRel::empty(1);
                    for a in self.universe.univ_atoms() {
                        let p = self.atom_presence(a);
                        rel.insert(alloc::vec![a], p);
                    }
                    rel
                }
                ConstKind::Iden => {
                    let mut rel = SymRel::empty(2);
                    for a in self.universe.univ_atoms() {
                        let p = self.atom_presence(a);
                        rel.insert(alloc::vec![a, a], p);
                    }
                    rel
                }
            },
            Op::Bin { op } => {
                let c = model.children(n).to_vec();
                match op {
                    BinOp::Union => {
                        let mut a = self.eval_in(model, c[0], env)?;
                        let b = self.eval_in(model, c[1], env)?;
                        for (t, p) in b.tuples {
                            a.insert(t, p);
                        }
                        a
                    }
                    BinOp::Diff => {
                        let a = self.eval_in(model, c[0], env)?;
                        let b = self.eval_in(model, c[1], env)?;
                        let mut out = SymRel::empty(a.arity);
                        for (t, p) in a.tuples {
                            let cut = b.tuples.get(&t).cloned().unwrap_or_else(pfalse);
                            out.insert(t, pand(alloc::vec![p, pnot(&cut)]));
                        }
                        out
                    }
                    BinOp::Inter => {
                        let a = self.eval_in(model, c[0], env)?;
                        let b = self.eval_in(model, c[1], env)?;
                        let mut out = SymRel::empty(a.arity);
                        for (t, p) in a.tuples {
                            if let Some(q) = b.tuples.get(&t) {
                                out.insert(t, pand(alloc::vec![p, q.clone()]));
                            }
                        }
                        out
                    }
                    BinOp::Product => {
                        let a = self.eval_in(model, c[0], env)?;
                        let b = self.eval_in(model, c[1], env)?;
                        let mut out = SymRel::empty(a.arity + b.arity);
                        for (ta, pa) in &a.tuples {
                            for (tb, pb) in &b.tuples {
                                self.tick(1)?;
                                let mut t = ta.clone();
                                t.extend_from_slice(tb);
                                out.insert(t, pand(alloc::vec![pa.clone(), pb.clone()]));
                            }
                        }
                        out
                    }
                    BinOp::Join => {
                        let a = self.eval_in(model, c[0], env)?;
                        let b = self.eval_in(model, c[1], env)?;
                        self.join(&a, &b)?
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
                let inner = self.eval_in(model, model.children(n)[0], env)?;
                match op {
                    UnOp::Transpose => {
                        let mut out = SymRel::empty(2);
                        for (t, p) in inner.tuples {
                            out.insert(alloc::vec![t[1], t[0]], p);
                        }
                        out
                    }
                    UnOp::Closure => self.closure(&inner)?,
                    UnOp::RClosure => {
                        let mut out = self.closure(&inner)?;
                        for a in self.universe.univ_atoms() {
                            let p = self.atom_presence(a);
                            out.insert(alloc::vec![a, a], p);
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
                let value = self.eval_in(model, c[0], env)?;
                let mut env2 = env.clone();
                env2.bind(n, 0, value);
                self.eval_in(model, c[1], &env2)?
            }
            _ => {
                return Err(Error::Arity {
                    message: String::from("formula used where an expression is required"),
                    span: model.span(n),
                })
            }
        })
    }

    fn eval_ref(&mut self, model: &Model, n: NodeId, env: &Env) -> Result<SymRel> {
        let binding = model.bindings.get(&n).copied().ok_or(Error::UnknownNode { id: n.0 })?;
        let base = match binding {
            Binding::Var { decl, index } => env
                .get(decl, index)
                .cloned()
                .ok_or(Error::UnknownNode { id: n.0 })?,
            Binding::Param { decl } => env
                .get(decl, 0)
                .cloned()
                .ok_or(Error::UnknownNode { id: n.0 })?,
            Binding::LetVar { decl } => env
                .get(decl, 0)
                .cloned()
                .ok_or(Error::UnknownNode { id: n.0 })?,
            Binding::Sig { sig } => {
                let mut rel = SymRel::empty(1);
                for &a in self.universe.extents[sig].clone().iter() {
                    let p = self.atom_presence(a);
                    rel.insert(alloc::vec![a], p);
                }
                rel
            }
            Binding::Field { sig, field } => {
                let mut rel = SymRel::empty(2);
                for (t, v) in self.universe.field_vars.get(&(sig, field)).cloned().unwrap_or_default()
                {
                    rel.insert(t, pvar(v));
                }
                rel
            }
            Binding::OrdFirst { open } => {
                let sig = self.model_open_sig(model, open);
                let extent = self.universe.extents[sig].clone();
                let mut rel = SymRel::empty(1);
                if let Some(&a) = extent.first() {
                    rel.insert(alloc::vec![a], ptrue());
                }
                rel
            }
            Binding::OrdLast { open } => {
                let sig = self.model_open_sig(model, open);
                let extent = self.universe.extents[sig].clone();
                let mut rel = SymRel::empty(1);
                if let Some(&a) = extent.last() {
                    rel.insert(alloc::vec![a], ptrue());
                }
                rel
            }
            Binding::OrdNext { open } => {
                let sig = self.model_open_sig(model, open);
                let extent = self.universe.extents[sig].clone();
                let mut rel = SymRel::empty(2);
                for w in extent.windows(2) {
                    rel.insert(alloc::vec![w[0], w[1]], ptrue());
                }
                rel
            }
            Binding::Fun { fun } => {
                let f = model.funs[fun].clone();
                let args = model.children(n).to_vec();
                let mut env2 = Env::default();
                for (param, &arg) in f.params.iter().zip(args.iter()) {
                    let value = self.eval_in(model, arg, env)?;
                    env2.bind(param.node, 0, value);
                }
                return self.eval_in(model, f.body, &env2);
            }
            Binding::Pred { .. } => {
                return Err(Error::Arity {
                    message: String::from("predicate used where an expression is required"),
                    span: model.span(n),
                })
            }
        };
        // Box join for call arguments on relational bindings.
        let args = model.children(n).to_vec();
        if matches!(model.op(n), Op::Call { .. }) && !args.is_empty() {
            let mut acc = base;
            for &arg in &args {
                let a = self.eval_in(model, arg, env)?;
                acc = self.join(&a, &acc)?;
            }
            Ok(acc)
        } else {
            Ok(base)
        }
    }

    fn model_open_sig(&self, model: &Model, open: usize) -> usize {
        model.opens[open].sig
    }

    fn join(&mut self, a: &SymRel, b: &SymRel) -> Result<SymRel> {
        let arity = a.arity + b.arity - 2;
        let mut out = SymRel::empty(arity);
        for (ta, pa) in &a.tuples {
            for (tb, pb) in &b.tuples {
                if ta[ta.len() - 1] == tb[0] {
                    self.tick(1)?;
                    let mut t = ta[..ta.len() - 1].to_vec();
                    t.extend_from_slice(&tb[1..]);
                    out.insert(t, pand(alloc::vec![pa.clone(), pb.clone()]));
                }
            }
        }
        Ok(out)
    }

    fn closure(&mut self, rel: &SymRel) -> Result<SymRel> {
        let mut matrix: BTreeMap<(AtomId, AtomId), P> = rel
            .tuples
            .iter()
            .map(|(t, p)| ((t[0], t[1]), p.clone()))
            .collect();
        let mut atoms: Vec<AtomId> = Vec::new();
        for (a, b) in matrix.keys() {
            atoms.push(*a);
            atoms.push(*b);
        }
        atoms.sort_unstable();
        atoms.dedup();
        for &k in &atoms {
            for &i in &atoms {
                let ik = match matrix.get(&(i, k)) {
                    Some(p) => p.clone(),
                    None => continue,
                };
                for &j in &atoms {
                    let kj = match matrix.get(&(k, j)) {
                        Some(p) => p.clone(),
                        None => continue,
                    };
                    self.tick(1)?;
                    let through = pand(alloc::vec![ik.clone(), kj]);
                    match matrix.remove(&(i, j)) {
                        Some(old) => {
                            matrix.insert((i, j), por(alloc::vec![old, through]));
                        }
                        None => {
                            matrix.insert((i, j), through);
                        }
                    }
                }
            }
        }
        let mut out = SymRel::empty(2);
        for ((i, j), p) in matrix {
            out.insert(alloc::vec![i, j], p);
        }
        Ok(out)
    }
}

fn or_of(parts: &[P]) -> P {
    por(parts.to_vec())
}

fn at_most_one_props(parts: &[P]) -> P {
    let mut out = Vec::new();
    for i in 0..parts.len() {
        for j in (i + 1)..parts.len() {
            out.push(pnot(&pand(alloc::vec![parts[i].clone(), parts[j].clone()])));
        }
    }
    pand(out)
}

fn subset_prop(lhs: &SymRel, rhs: &SymRel) -> P {
    let mut parts = Vec::new();
    for (t, p) in &lhs.tuples {
        let q = rhs.tuples.get(t).cloned().unwrap_or_else(pfalse);
        parts.push(pimplies(p, &q));
    }
    pand(parts)
}
