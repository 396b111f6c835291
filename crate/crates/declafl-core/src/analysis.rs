//! Name resolution and static dependency analysis.
//!
//! `resolve` binds every identifier and call to its declaration, infers
//! expression arities, counts variable uses (the coverage analysis prunes
//! declarations whose variable is never used), and rejects call cycles.
//!
//! `used_paragraphs` computes the paragraphs a test transitively depends
//! on: all facts are implicitly used, and from there signature references,
//! field references, and invocations pull in further paragraphs.
//! `static_coverage` closes that set over descendants.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::ast::{BinOp, Binding, ConstKind, Model, NodeId, Op, UnOp};
use crate::error::{Error, Result};

/// Paragraph-level dependency edges plus per-test coverage, as exposed by
/// the `deps` command.
#[derive(Debug, Clone, Default)]
pub struct DependencyGraph {
    /// paragraph name -> names of paragraphs it uses directly.
    pub edges: BTreeMap<String, BTreeSet<String>>,
    /// test name -> covered node set.
    pub coverage: BTreeMap<String, BTreeSet<NodeId>>,
}

struct Resolver<'m> {
    model: &'m Model,
    scopes: Vec<BTreeMap<String, Binding>>,
    bindings: BTreeMap<NodeId, Binding>,
    arity: BTreeMap<NodeId, u8>,
    var_uses: BTreeMap<(NodeId, usize), u32>,
    /// Pred/fun call edges for cycle detection: caller node -> callee node.
    call_edges: Vec<(NodeId, NodeId)>,
}

/// Resolve names and arities in place.
pub fn resolve(model: &mut Model) -> Result<()> {
    let mut r = Resolver {
        model,
        scopes: Vec::new(),
        bindings: BTreeMap::new(),
        arity: BTreeMap::new(),
        var_uses: BTreeMap::new(),
        call_edges: Vec::new(),
    };
    r.run()?;
    let Resolver { bindings, arity, var_uses, call_edges, .. } = r;
    check_call_cycles(model, &call_edges)?;
    model.bindings = bindings;
    model.arity = arity;
    model.var_uses = var_uses;
    model.resolved = true;
    Ok(())
}

fn check_call_cycles(model: &Model, edges: &[(NodeId, NodeId)]) -> Result<()> {
    let mut adjacency: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for &(a, b) in edges {
        adjacency.entry(a).or_default().push(b);
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state: BTreeMap<NodeId, u8> = BTreeMap::new();
    fn visit(
        n: NodeId,
        adjacency: &BTreeMap<NodeId, Vec<NodeId>>,
        state: &mut BTreeMap<NodeId, u8>,
        model: &Model,
    ) -> Result<()> {
        match state.get(&n).copied().unwrap_or(0) {
            1 => {
                return Err(Error::Name {
                    ident: format!("recursive invocation involving `{}`", describe(model, n)),
                    span: model.span(n),
                })
            }
            2 => return Ok(()),
            _ => {}
        }
        state.insert(n, 1);
        if let Some(next) = adjacency.get(&n) {
            for &m in next.clone().iter() {
                visit(m, adjacency, state, model)?;
            }
        }
        state.insert(n, 2);
        Ok(())
    }
    let keys: Vec<NodeId> = adjacency.keys().copied().collect();
    for n in keys {
        visit(n, &adjacency, &mut state, model)?;
    }
    Ok(())
}

fn describe(model: &Model, n: NodeId) -> String {
    match model.op(n) {
        Op::Pred { name } | Op::Fun { name } => name.clone(),
        _ => String::from("?"),
    }
}

impl<'m> Resolver<'m> {
    fn run(&mut self) -> Result<()> {
        self.check_unique_names()?;
        for i in 0..self.model.sigs.len() {
            if let Op::Sig { parent: Some(pname), .. } = self.model.op(self.model.sigs[i].node) {
                if self.model.sigs[i].parent.is_none() {
                    return Err(Error::Name {
                        ident: pname.clone(),
                        span: self.model.span(self.model.sigs[i].node),
                    });
                }
            }
            for f in self.model.sigs[i].fields.clone() {
                let a = self.expr(f.range)?;
                if a != 1 {
                    return Err(Error::Arity {
                        message: format!(
                            "field `{}` range must have arity 1, found {}",
                            f.name, a
                        ),
                        span: self.model.span(f.range),
                    });
                }
            }
            if let Some(appended) = self.model.sigs[i].appended {
                for &f in self.model.children(appended) {
                    self.formula(f)?;
                }
            }
        }
        for fact in self.model.facts.clone() {
            self.formula(fact.body)?;
        }
        for a in self.model.asserts.clone() {
            self.formula(a.body)?;
        }
        for pred in self.model.preds.clone() {
            self.scopes.push(BTreeMap::new());
            for p in &pred.params {
                let a = self.expr(p.bound)?;
                if a != 1 {
                    return Err(Error::Arity {
                        message: format!("parameter `{}` bound must have arity 1", p.name),
                        span: self.model.span(p.bound),
                    });
                }
                self.scopes
                    .last_mut()
                    .unwrap()
                    .insert(p.name.clone(), Binding::Param { decl: p.node });
                self.var_uses.entry((p.node, 0)).or_insert(0);
            }
            self.formula(pred.body)?;
            self.scopes.pop();
        }
        for fun in self.model.funs.clone() {
            self.scopes.push(BTreeMap::new());
            for p in &fun.params {
                let a = self.expr(p.bound)?;
                if a != 1 {
                    return Err(Error::Arity {
                        message: format!("parameter `{}` bound must have arity 1", p.name),
                        span: self.model.span(p.bound),
                    });
                }
                self.scopes
                    .last_mut()
                    .unwrap()
                    .insert(p.name.clone(), Binding::Param { decl: p.node });
                self.var_uses.entry((p.node, 0)).or_insert(0);
            }
            self.expr(fun.ret)?;
            self.expr(fun.body)?;
            self.scopes.pop();
        }
        Ok(())
    }

    fn check_unique_names(&self) -> Result<()> {
        fn dup<'a, I: Iterator<Item = (&'a str, NodeId)>>(items: I) -> Option<(&'a str, NodeId)> {
            let mut seen = BTreeSet::new();
            for (name, node) in items {
                if !seen.insert(name) {
                    return Some((name, node));
                }
            }
            None
        }
        let m = self.model;
        let clash = dup(m.sigs.iter().map(|s| (s.name.as_str(), s.node)))
            .or_else(|| dup(m.preds.iter().map(|p| (p.name.as_str(), p.node))))
            .or_else(|| dup(m.funs.iter().map(|f| (f.name.as_str(), f.node))))
            .or_else(|| dup(m.facts.iter().map(|f| (f.name.as_str(), f.node))))
            .or_else(|| dup(m.asserts.iter().map(|a| (a.name.as_str(), a.node))));
        if let Some((name, node)) = clash {
            return Err(Error::Name {
                ident: format!("duplicate declaration of `{}`", name),
                span: m.span(node),
            });
        }
        Ok(())
    }

    /// Resolve a formula node; formulas have no arity.
    fn formula(&mut self, n: NodeId) -> Result<()> {
        match self.model.op(n).clone() {
            Op::Block | Op::AppendedFact => {
                for &f in self.model.children(n).clone().iter() {
                    self.formula(f)?;
                }
            }
            Op::Bin { op } if op.is_logical() => {
                let c = self.model.children(n).to_vec();
                self.formula(c[0])?;
                self.formula(c[1])?;
            }
            Op::ImpliesElse => {
                let c = self.model.children(n).to_vec();
                self.formula(c[0])?;
                self.formula(c[1])?;
                self.formula(c[2])?;
            }
            Op::Un { op: UnOp::Not } => {
                self.formula(self.model.children(n)[0])?;
            }
            Op::Bin { op: BinOp::In | BinOp::Eq } => {
                let c = self.model.children(n).to_vec();
                let a = self.expr(c[0])?;
                let b = self.expr(c[1])?;
                if a != b {
                    return Err(Error::Arity {
                        message: format!("comparison of arity {} and arity {}", a, b),
                        span: self.model.span(n),
                    });
                }
            }
            Op::MultForm { .. } => {
                self.expr(self.model.children(n)[0])?;
            }
            Op::Quant { .. } => {
                let children = self.model.children(n).to_vec();
                let body = *children.last().unwrap();
                self.scopes.push(BTreeMap::new());
                for &d in &children[..children.len() - 1] {
                    let bound = self.model.children(d)[0];
                    let a = self.expr(bound)?;
                    if a != 1 {
                        self.scopes.pop();
                        return Err(Error::Arity {
                            message: format!("quantifier bound must have arity 1, found {}", a),
                            span: self.model.span(bound),
                        });
                    }
                    if let Op::QuantDecl { names, .. } = self.model.op(d) {
                        for (i, name) in names.iter().enumerate() {
                            self.scopes
                                .last_mut()
                                .unwrap()
                                .insert(name.clone(), Binding::Var { decl: d, index: i });
                            self.var_uses.entry((d, i)).or_insert(0);
                        }
                    }
                }
                self.formula(body)?;
                self.scopes.pop();
            }
            Op::Let { .. } => {
                let c = self.model.children(n).to_vec();
                self.expr(c[0])?;
                self.scopes.push(BTreeMap::new());
                if let Op::Let { name } = self.model.op(n) {
                    self.scopes
                        .last_mut()
                        .unwrap()
                        .insert(name.clone(), Binding::LetVar { decl: n });
                    self.var_uses.entry((n, 0)).or_insert(0);
                }
                self.formula(c[1])?;
                self.scopes.pop();
            }
            Op::Call { .. } | Op::Ident { .. } => {
                // Bare predicate invocation in formula position, or a
                // relational expression misused; `expr` sorts it out.
                self.formula_call_or_expr(n)?;
            }
            _ => {
                let a = self.expr(n)?;
                if a != 0 {
                    return Err(Error::Arity {
                        message: String::from("expression used where a formula is required"),
                        span: self.model.span(n),
                    });
                }
            }
        }
        Ok(())
    }

    fn formula_call_or_expr(&mut self, n: NodeId) -> Result<()> {
        let name = match self.model.op(n) {
            Op::Call { name } | Op::Ident { name } => name.clone(),
            _ => unreachable!(),
        };
        if self.lookup_local(&name).is_none() {
            if let Some(p) = self.model.pred_index(&name) {
                return self.bind_invocation(n, Binding::Pred { pred: p });
            }
        }
        let a = self.expr(n)?;
        if a != 0 {
            return Err(Error::Arity {
                message: String::from("expression used where a formula is required"),
                span: self.model.span(n),
            });
        }
        Ok(())
    }

    fn bind_invocation(&mut self, n: NodeId, binding: Binding) -> Result<()> {
        let args = self.model.children(n).to_vec();
        let (params, target_node) = match binding {
            Binding::Pred { pred } => {
                let p = &self.model.preds[pred];
                (p.params.len(), p.node)
            }
            Binding::Fun { fun } => {
                let f = &self.model.funs[fun];
                (f.params.len(), f.node)
            }
            _ => unreachable!(),
        };
        if args.len() != params {
            return Err(Error::Arity {
                message: format!(
                    "call expects {} argument(s), found {}",
                    params,
                    args.len()
                ),
                span: self.model.span(n),
            });
        }
        for &a in &args {
            let arity = self.expr(a)?;
            if arity != 1 {
                return Err(Error::Arity {
                    message: format!("call arguments must have arity 1, found {}", arity),
                    span: self.model.span(a),
                });
            }
        }
        // Record edge from enclosing paragraph body owner for cycle check.
        if let Some(owner) = self.enclosing_invocable(n) {
            self.call_edges.push((owner, target_node));
        }
        self.bindings.insert(n, binding);
        Ok(())
    }

    fn enclosing_invocable(&self, n: NodeId) -> Option<NodeId> {
        let mut cur = n;
        loop {
            match self.model.op(cur) {
                Op::Pred { .. } | Op::Fun { .. } => return Some(cur),
                _ => {}
            }
            cur = self.model.parent(cur)?;
        }
    }

    fn lookup_local(&mut self, name: &str) -> Option<Binding> {
        for scope in self.scopes.iter().rev() {
            if let Some(b) = scope.get(name) {
                return Some(*b);
            }
        }
        None
    }

    fn lookup(&mut self, name: &str, n: NodeId) -> Result<Binding> {
        if let Some(b) = self.lookup_local(name) {
            match b {
                Binding::Var { decl, index } => {
                    *self.var_uses.entry((decl, index)).or_insert(0) += 1;
                }
                Binding::Param { decl } => {
                    *self.var_uses.entry((decl, 0)).or_insert(0) += 1;
                }
                Binding::LetVar { decl } => {
                    *self.var_uses.entry((decl, 0)).or_insert(0) += 1;
                }
                _ => {}
            }
            return Ok(b);
        }
        // Qualified ordering primitives.
        if let Some((alias, prim)) = name.split_once('/') {
            for (i, open) in self.model.opens.iter().enumerate() {
                if open.alias == alias {
                    return match prim {
                        "first" => Ok(Binding::OrdFirst { open: i }),
                        "last" => Ok(Binding::OrdLast { open: i }),
                        "next" => Ok(Binding::OrdNext { open: i }),
                        _ => Err(Error::Name {
                            ident: name.to_string(),
                            span: self.model.span(n),
                        }),
                    };
                }
            }
            return Err(Error::Name { ident: name.to_string(), span: self.model.span(n) });
        }
        for (si, sig) in self.model.sigs.iter().enumerate() {
            for (fi, field) in sig.fields.iter().enumerate() {
                if field.name == name {
                    return Ok(Binding::Field { sig: si, field: fi });
                }
            }
        }
        if let Some(si) = self.model.sig_index(name) {
            return Ok(Binding::Sig { sig: si });
        }
        if let Some(p) = self.model.pred_index(name) {
            return Ok(Binding::Pred { pred: p });
        }
        if let Some(f) = self.model.fun_index(name) {
            return Ok(Binding::Fun { fun: f });
        }
        Err(Error::Name { ident: name.to_string(), span: self.model.span(n) })
    }

    fn binding_arity(&self, b: Binding) -> u8 {
        match b {
            Binding::Var { .. } | Binding::Param { .. } | Binding::Sig { .. } => 1,
            Binding::LetVar { decl } => {
                let value = self.model.children(decl)[0];
                self.arity.get(&value).copied().unwrap_or(1)
            }
            Binding::Field { .. } => 2,
            Binding::OrdFirst { .. } | Binding::OrdLast { .. } => 1,
            Binding::OrdNext { .. } => 2,
            Binding::Pred { .. } | Binding::Fun { .. } => 0,
        }
    }

    /// Resolve an expression node and return its arity.
    fn expr(&mut self, n: NodeId) -> Result<u8> {
        let arity = match self.model.op(n).clone() {
            Op::Ident { name } => {
                let b = self.lookup(&name, n)?;
                match b {
                    Binding::Pred { pred } => {
                        // Bare reference to a nullary predicate is an
                        // invocation; anything else is a misuse.
                        if self.model.preds[pred].params.is_empty() {
                            self.bind_invocation(n, b)?;
                            return Ok(0);
                        }
                        return Err(Error::Arity {
                            message: format!("predicate `{}` requires arguments", name),
                            span: self.model.span(n),
                        });
                    }
                    Binding::Fun { fun } => {
                        if self.model.funs[fun].params.is_empty() {
                            self.bind_invocation(n, b)?;
                            let body = self.model.funs[fun].body;
                            self.arity.get(&body).copied().unwrap_or(1)
                        } else {
                            return Err(Error::Arity {
                                message: format!("function `{}` requires arguments", name),
                                span: self.model.span(n),
                            });
                        }
                    }
                    other => {
                        self.bindings.insert(n, other);
                        self.binding_arity(other)
                    }
                }
            }
            Op::Call { name } => {
                let b = self.lookup(&name, n)?;
                match b {
                    Binding::Pred { .. } => {
                        self.bind_invocation(n, b)?;
                        return Ok(0);
                    }
                    Binding::Fun { fun } => {
                        self.bind_invocation(n, b)?;
                        let body = self.model.funs[fun].body;
                        self.arity.get(&body).copied().unwrap_or(1)
                    }
                    relational => {
                        // Box join: `r[a, b]` is `b.(a.r)`.
                        self.bindings.insert(n, relational);
                        let mut arity = self.binding_arity(relational);
                        let args = self.model.children(n).to_vec();
                        for &a in &args {
                            let aa = self.expr(a)?;
                            if arity + aa < 2 + 1 {
                                return Err(Error::Arity {
                                    message: String::from("box join on expression of arity < 2"),
                                    span: self.model.span(n),
                                });
                            }
                            arity = arity + aa - 2;
                        }
                        arity
                    }
                }
            }
            Op::Const { k } => match k {
                ConstKind::None | ConstKind::Univ => 1,
                ConstKind::Iden => 2,
            },
            Op::Un { op } => {
                let c = self.model.children(n)[0];
                match op {
                    UnOp::Not => {
                        self.formula(c)?;
                        // Formulas carry no arity; calling context must be
                        // a formula, which `formula` already enforced.
                        self.arity.insert(n, 0);
                        return Ok(0);
                    }
                    UnOp::Transpose | UnOp::Closure | UnOp::RClosure => {
                        let a = self.expr(c)?;
                        if a != 2 {
                            return Err(Error::Arity {
                                message: format!(
                                    "`{}` requires a binary relation, found arity {}",
                                    op.symbol(),
                                    a
                                ),
                                span: self.model.span(n),
                            });
                        }
                        2
                    }
                }
            }
            Op::Bin { op } => {
                let c = self.model.children(n).to_vec();
                match op {
                    BinOp::And | BinOp::Or | BinOp::Implies | BinOp::Iff => {
                        self.formula(n)?;
                        return Ok(0);
                    }
                    BinOp::In | BinOp::Eq => {
                        self.formula(n)?;
                        return Ok(0);
                    }
                    BinOp::Union | BinOp::Diff | BinOp::Inter => {
                        let a = self.expr(c[0])?;
                        let b = self.expr(c[1])?;
                        if a != b {
                            return Err(Error::Arity {
                                message: format!(
                                    "`{}` on mismatched arities {} and {}",
                                    op.symbol(),
                                    a,
                                    b
                                ),
                                span: self.model.span(n),
                            });
                        }
                        a
                    }
                    BinOp::Product => {
                        let a = self.expr(c[0])?;
                        let b = self.expr(c[1])?;
                        a + b
                    }
                    BinOp::Join => {
                        let a = self.expr(c[0])?;
                        let b = self.expr(c[1])?;
                        if a + b < 3 {
                            return Err(Error::Arity {
                                message: String::from("join of two unary expressions"),
                                span: self.model.span(n),
                            });
                        }
                        a + b - 2
                    }
                }
            }
            Op::ImpliesElse | Op::MultForm { .. } | Op::Quant { .. } | Op::Let { .. }
            | Op::Block => {
                self.formula(n)?;
                return Ok(0);
            }
            other => {
                return Err(Error::Arity {
                    message: format!("unexpected node in expression position: {:?}", other),
                    span: self.model.span(n),
                })
            }
        };
        self.arity.insert(n, arity);
        Ok(arity)
    }
}

/// The paragraphs transitively used by a formula: facts are always
/// included, and references inside any used paragraph pull in more.
/// Declarations whose bound variable is never referenced contribute no
/// dependency. Returns paragraph indices plus referenced open directives.
pub fn used_paragraph_set(model: &Model, start: NodeId) -> (BTreeSet<usize>, BTreeSet<usize>) {
    debug_assert!(model.resolved);
    let mut used: BTreeSet<usize> = BTreeSet::new();
    let mut opens: BTreeSet<usize> = BTreeSet::new();
    let mut queue: Vec<NodeId> = Vec::new();

    queue.push(start);
    for fact in &model.facts {
        if let Some(pi) = model.owning_paragraph(fact.node) {
            if used.insert(pi) {
                queue.push(fact.body);
            }
        }
    }
    // Appended signature facts constrain their signature whenever it exists,
    // so they behave like facts for the owning signature once it is used.

    while let Some(n) = queue.pop() {
        scan_refs(model, n, &mut used, &mut opens, &mut queue);
    }
    (used, opens)
}

fn mark_sig(
    model: &Model,
    si: usize,
    used: &mut BTreeSet<usize>,
    queue: &mut Vec<NodeId>,
) {
    let node = model.sigs[si].node;
    if let Some(pi) = model.owning_paragraph(node) {
        if used.insert(pi) {
            // A used signature brings its field ranges and appended facts
            // into the dependency frontier. Parents and subsignatures are
            // pulled in too: extents tie the hierarchy together.
            for f in &model.sigs[si].fields {
                queue.push(f.range);
            }
            if let Some(a) = model.sigs[si].appended {
                queue.push(a);
            }
            if let Some(p) = model.sigs[si].parent {
                mark_sig(model, p, used, queue);
            }
            for &c in &model.sigs[si].subsigs {
                mark_sig(model, c, used, queue);
            }
        }
    }
}

fn scan_refs(
    model: &Model,
    n: NodeId,
    used: &mut BTreeSet<usize>,
    opens: &mut BTreeSet<usize>,
    queue: &mut Vec<NodeId>,
) {
    // Skip declarations whose variables are all unused.
    if let Op::QuantDecl { names, .. } = model.op(n) {
        let unused = (0..names.len())
            .all(|i| model.var_uses.get(&(n, i)).copied().unwrap_or(0) == 0);
        if unused {
            return;
        }
    }
    match model.bindings.get(&n) {
        Some(Binding::Sig { sig }) => mark_sig(model, *sig, used, queue),
        Some(Binding::Field { sig, field }) => {
            mark_sig(model, *sig, used, queue);
            queue.push(model.sigs[*sig].fields[*field].range);
        }
        Some(Binding::Pred { pred }) => {
            let p = &model.preds[*pred];
            if let Some(pi) = model.owning_paragraph(p.node) {
                if used.insert(pi) {
                    for param in &p.params {
                        if model.var_uses.get(&(param.node, 0)).copied().unwrap_or(0) > 0 {
                            queue.push(param.bound);
                        }
                    }
                    queue.push(p.body);
                }
            }
        }
        Some(Binding::Fun { fun }) => {
            let f = &model.funs[*fun];
            if let Some(pi) = model.owning_paragraph(f.node) {
                if used.insert(pi) {
                    for param in &f.params {
                        if model.var_uses.get(&(param.node, 0)).copied().unwrap_or(0) > 0 {
                            queue.push(param.bound);
                        }
                    }
                    queue.push(f.ret);
                    queue.push(f.body);
                }
            }
        }
        Some(Binding::OrdFirst { open } | Binding::OrdLast { open } | Binding::OrdNext { open }) => {
            opens.insert(*open);
            mark_sig(model, model.opens[*open].sig, used, queue);
        }
        _ => {}
    }
    for &c in model.children(n) {
        scan_refs(model, c, used, opens, queue);
    }
}

/// Node ids of the paragraph declarations used by the test formula rooted
/// at `start`, restricted to model paragraphs. Open directives referenced
/// through ordering primitives are included.
pub fn used_paragraph_nodes(model: &Model, start: NodeId) -> BTreeSet<NodeId> {
    let (used, opens) = used_paragraph_set(model, start);
    let mut out: BTreeSet<NodeId> = used
        .into_iter()
        .map(|pi| model.paragraphs[pi].node)
        .filter(|&n| model.is_model_node(n))
        .collect();
    for oi in opens {
        let n = model.opens[oi].node;
        if model.is_model_node(n) {
            out.insert(n);
        }
    }
    out
}

/// Full static coverage of a test formula: every used model paragraph
/// contributes its inclusive descendant set.
pub fn static_coverage_of(model: &Model, start: NodeId) -> BTreeSet<NodeId> {
    let mut out = BTreeSet::new();
    for n in used_paragraph_nodes(model, start) {
        out.extend(model.descendants_inclusive(n).unwrap());
    }
    out
}

/// Paragraph-level dependency graph over the whole model.
pub fn dependency_graph(model: &Model) -> DependencyGraph {
    debug_assert!(model.resolved);
    let mut graph = DependencyGraph::default();
    for para in &model.paragraphs {
        let mut direct: BTreeSet<String> = BTreeSet::new();
        collect_direct(model, para.node, para.node, &mut direct);
        graph.edges.insert(para.name.clone(), direct);
    }
    graph
}

fn collect_direct(model: &Model, n: NodeId, root: NodeId, out: &mut BTreeSet<String>) {
    match model.bindings.get(&n) {
        Some(Binding::Sig { sig }) => {
            if model.sigs[*sig].node != root {
                out.insert(model.sigs[*sig].name.clone());
            }
        }
        Some(Binding::Field { sig, .. }) => {
            if model.sigs[*sig].node != root {
                out.insert(model.sigs[*sig].name.clone());
            }
        }
        Some(Binding::Pred { pred }) => {
            if model.preds[*pred].node != root {
                out.insert(model.preds[*pred].name.clone());
            }
        }
        Some(Binding::Fun { fun }) => {
            if model.funs[*fun].node != root {
                out.insert(model.funs[*fun].name.clone());
            }
        }
        Some(Binding::OrdFirst { open } | Binding::OrdLast { open } | Binding::OrdNext { open }) => {
            out.insert(alloc::format!("ordering[{}]", model.sigs[model.opens[*open].sig].name));
        }
        _ => {}
    }
    for &c in model.children(n) {
        collect_direct(model, c, root, out);
    }
}
