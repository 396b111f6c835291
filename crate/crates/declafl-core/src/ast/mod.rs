//! Arena-backed AST for the bounded relational modeling language.
//!
//! A `Model` owns a node arena forming a forest: the synthetic whole-model
//! root has the open directives and paragraphs as children, and every other
//! node is reachable from exactly one paragraph. Node ids are dense, stable
//! across passes, and never reused within one model. Mutation may orphan
//! nodes (they stay in the arena but become unreachable); all traversal
//! helpers walk the live tree only.

mod lexer;
mod parser;
mod printer;

pub use lexer::{Lexer, Token, TokenKind};
pub use parser::{parse, parse_into};
pub use printer::{pretty_print, print_subtree};

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Dense node identifier, unique per parsed model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Byte span plus 1-based line/column of the start position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    /// Index into `Model::sources`.
    pub file: u16,
    pub start: u32,
    pub end: u32,
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn merge(self, other: Span) -> Span {
        Span {
            file: self.file,
            start: self.start.min(other.start),
            end: self.end.max(other.end),
            line: self.line.min(other.line),
            col: if other.line < self.line || (other.line == self.line && other.col < self.col) {
                other.col
            } else {
                self.col
            },
        }
    }
}

/// Signature multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigMult {
    Default,
    One,
    Lone,
    Abstract,
}

/// Field or parameter multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeclMult {
    Set,
    One,
    Lone,
    SomeOf,
}

/// Quantifier keyword; `Some`/`No`/`Lone`/`One` double as multiplicity formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Quantifier {
    All,
    Some,
    No,
    Lone,
    One,
}

impl Quantifier {
    pub fn keyword(self) -> &'static str {
        match self {
            Quantifier::All => "all",
            Quantifier::Some => "some",
            Quantifier::No => "no",
            Quantifier::Lone => "lone",
            Quantifier::One => "one",
        }
    }
}

/// Binary operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BinOp {
    And,
    Or,
    Implies,
    Iff,
    In,
    Eq,
    Union,
    Diff,
    Inter,
    Join,
    Product,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::Implies => "=>",
            BinOp::Iff => "<=>",
            BinOp::In => "in",
            BinOp::Eq => "=",
            BinOp::Union => "+",
            BinOp::Diff => "-",
            BinOp::Inter => "&",
            BinOp::Join => ".",
            BinOp::Product => "->",
        }
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or | BinOp::Implies | BinOp::Iff)
    }
}

/// Unary operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum UnOp {
    Not,
    Transpose,
    Closure,
    RClosure,
}

impl UnOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnOp::Not => "!",
            UnOp::Transpose => "~",
            UnOp::Closure => "^",
            UnOp::RClosure => "*",
        }
    }
}

/// Relational constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstKind {
    None,
    Univ,
    Iden,
}

/// Operator tag of an arena node.
#[derive(Debug, Clone, PartialEq)]
pub enum Op {
    /// Synthetic whole-model root.
    Root,
    /// `open util/ordering[S] as alias`; the child is a sig reference.
    Open { alias: String },
    /// Signature declaration; children are field declarations plus an
    /// optional appended-fact block as the last child.
    Sig { name: String, mult: SigMult, parent: Option<String> },
    /// Field declaration inside a signature; the child is the range expression.
    Field { name: String, mult: DeclMult },
    Fact { name: String },
    /// Predicate declaration; children are parameter declarations then the body.
    Pred { name: String },
    /// Function declaration; children are parameters, the result type, then the body.
    Fun { name: String },
    Assert { name: String },
    /// Parameter declaration; the child is the bound expression.
    Param { name: String, mult: DeclMult },
    /// Quantifier variable declaration; the child is the bound expression.
    QuantDecl { names: Vec<String>, disj: bool },
    /// Quantified formula; children are the declarations then the body.
    Quant { q: Quantifier },
    /// `let name = value | body`; children are value then body.
    Let { name: String },
    /// Conjunctive formula block `{ f1 f2 ... }`; an empty block is true.
    Block,
    /// Appended signature fact block.
    AppendedFact,
    Bin { op: BinOp },
    /// `c => t else e`.
    ImpliesElse,
    Un { op: UnOp },
    /// Multiplicity formula, e.g. `some e` / `no e`.
    MultForm { m: Quantifier },
    /// `name[args...]`: predicate/function invocation or relational box join.
    Call { name: String },
    /// Bare identifier; resolution decides what it denotes.
    Ident { name: String },
    Const { k: ConstKind },
}

#[derive(Debug, Clone)]
pub struct AstNode {
    pub op: Op,
    pub children: Vec<NodeId>,
    pub parent: Option<NodeId>,
    pub span: Span,
}

/// Top-level model unit kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParagraphKind {
    Signature,
    Fact,
    Predicate,
    Function,
    Assertion,
}

#[derive(Debug, Clone)]
pub struct Paragraph {
    pub kind: ParagraphKind,
    pub name: String,
    /// Arena node of the declaration itself.
    pub node: NodeId,
    /// Body root for body-carrying paragraphs; `None` for signatures.
    pub body: Option<NodeId>,
    /// True for paragraphs contributed by a test-suite file.
    pub from_suite: bool,
}

#[derive(Debug, Clone)]
pub struct FieldInfo {
    pub name: String,
    pub mult: DeclMult,
    pub node: NodeId,
    pub range: NodeId,
}

#[derive(Debug, Clone)]
pub struct SigInfo {
    pub name: String,
    pub mult: SigMult,
    /// Index of the parent signature for `extends`.
    pub parent: Option<usize>,
    pub fields: Vec<FieldInfo>,
    pub node: NodeId,
    pub appended: Option<NodeId>,
    /// Set when an `open util/ordering` directive targets this signature.
    pub ordered: bool,
    /// Children in the `extends` hierarchy.
    pub subsigs: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ParamInfo {
    pub name: String,
    pub mult: DeclMult,
    pub node: NodeId,
    pub bound: NodeId,
}

#[derive(Debug, Clone)]
pub struct PredInfo {
    pub name: String,
    pub node: NodeId,
    pub params: Vec<ParamInfo>,
    pub body: NodeId,
    pub from_suite: bool,
}

#[derive(Debug, Clone)]
pub struct FunInfo {
    pub name: String,
    pub node: NodeId,
    pub params: Vec<ParamInfo>,
    pub ret: NodeId,
    pub body: NodeId,
}

#[derive(Debug, Clone)]
pub struct FactInfo {
    pub name: String,
    pub node: NodeId,
    pub body: NodeId,
}

#[derive(Debug, Clone)]
pub struct AssertInfo {
    pub name: String,
    pub node: NodeId,
    pub body: NodeId,
}

#[derive(Debug, Clone)]
pub struct OpenInfo {
    pub alias: String,
    pub node: NodeId,
    /// Index of the ordered signature.
    pub sig: usize,
}

#[derive(Debug, Clone)]
pub struct SourceFile {
    pub name: String,
    pub text: String,
}

/// Command kind: `run` invokes predicates, `check` invokes assertions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Run,
    Check,
}

/// Per-signature scope item: `[exactly] N Sig`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScopeItem {
    pub sig: String,
    pub count: u32,
    pub exact: bool,
}

/// Unresolved scope clause of a command.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScopeAst {
    pub default: Option<u32>,
    pub items: Vec<ScopeItem>,
}

/// A `run`/`check` command as parsed. Inline bodies are stored as anonymous
/// predicate paragraphs and referenced here by their generated name.
#[derive(Debug, Clone)]
pub struct Command {
    pub kind: CommandKind,
    pub name: String,
    pub inline: bool,
    pub scope: ScopeAst,
    pub expect: Option<bool>,
    pub span: Span,
}

/// What a resolved identifier or call denotes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Binding {
    /// Quantifier variable: declaring node and index into its name list.
    Var { decl: NodeId, index: usize },
    /// Predicate or function parameter.
    Param { decl: NodeId },
    /// Let-bound name.
    LetVar { decl: NodeId },
    Field { sig: usize, field: usize },
    Sig { sig: usize },
    Pred { pred: usize },
    Fun { fun: usize },
    OrdFirst { open: usize },
    OrdLast { open: usize },
    OrdNext { open: usize },
}

#[derive(Debug, Clone, Default)]
pub struct Model {
    pub nodes: Vec<AstNode>,
    pub root: NodeId,
    pub paragraphs: Vec<Paragraph>,
    pub sigs: Vec<SigInfo>,
    pub preds: Vec<PredInfo>,
    pub funs: Vec<FunInfo>,
    pub facts: Vec<FactInfo>,
    pub asserts: Vec<AssertInfo>,
    pub opens: Vec<OpenInfo>,
    pub commands: Vec<Command>,
    pub sources: Vec<SourceFile>,
    /// Nodes with id below this limit belong to the model proper; nodes at or
    /// above it were appended by a test-suite file.
    pub model_node_limit: u32,
    /// Strict-descendant counts over the live tree.
    pub desc_count: Vec<u32>,
    /// Resolution results; populated by `analysis::resolve`.
    pub bindings: BTreeMap<NodeId, Binding>,
    /// Expression arity per node (relational expressions only).
    pub arity: BTreeMap<NodeId, u8>,
    /// Reference counts per declared variable: (decl node, name index) -> uses.
    pub var_uses: BTreeMap<(NodeId, usize), u32>,
    pub resolved: bool,
}

impl Model {
    pub fn node(&self, id: NodeId) -> &AstNode {
        &self.nodes[id.index()]
    }

    pub fn op(&self, id: NodeId) -> &Op {
        &self.nodes[id.index()].op
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id.index()].children
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id.index()].parent
    }

    pub fn span(&self, id: NodeId) -> Span {
        self.nodes[id.index()].span
    }

    pub fn check_node(&self, id: NodeId) -> Result<()> {
        if id.index() < self.nodes.len() && self.is_live(id) {
            Ok(())
        } else {
            Err(Error::UnknownNode { id: id.0 })
        }
    }

    /// True when `id` is reachable from the synthetic root.
    pub fn is_live(&self, id: NodeId) -> bool {
        if id.index() >= self.nodes.len() {
            return false;
        }
        let mut cur = id;
        loop {
            if cur == self.root {
                return true;
            }
            match self.nodes[cur.index()].parent {
                Some(p) => cur = p,
                None => return false,
            }
        }
    }

    /// True when the node belongs to the model proper (not a suite file).
    pub fn is_model_node(&self, id: NodeId) -> bool {
        id.0 < self.model_node_limit
    }

    pub fn alloc(&mut self, op: Op, children: Vec<NodeId>, span: Span) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        for &c in &children {
            self.nodes[c.index()].parent = Some(id);
        }
        self.nodes.push(AstNode { op, children, parent: None, span });
        id
    }

    /// Strict descendants of `n`, in ascending node-id order.
    pub fn descendants(&self, n: NodeId) -> Result<BTreeSet<NodeId>> {
        self.check_node(n)?;
        let mut out = BTreeSet::new();
        let mut stack: Vec<NodeId> = self.children(n).to_vec();
        while let Some(id) = stack.pop() {
            if out.insert(id) {
                stack.extend_from_slice(self.children(id));
            }
        }
        Ok(out)
    }

    /// `n` together with all strict descendants.
    pub fn descendants_inclusive(&self, n: NodeId) -> Result<BTreeSet<NodeId>> {
        let mut out = self.descendants(n)?;
        out.insert(n);
        Ok(out)
    }

    pub fn descendant_count(&self, n: NodeId) -> u32 {
        self.desc_count.get(n.index()).copied().unwrap_or(0)
    }

    /// All live node ids in ascending order.
    pub fn live_nodes(&self) -> Vec<NodeId> {
        let mut live = alloc::vec![false; self.nodes.len()];
        let mut stack = alloc::vec![self.root];
        while let Some(id) = stack.pop() {
            if !live[id.index()] {
                live[id.index()] = true;
                stack.extend_from_slice(self.children(id));
            }
        }
        (0..self.nodes.len())
            .filter(|&i| live[i])
            .map(|i| NodeId(i as u32))
            .collect()
    }

    /// Live nodes belonging to the model proper, ascending.
    pub fn model_nodes(&self) -> Vec<NodeId> {
        self.live_nodes()
            .into_iter()
            .filter(|&n| self.is_model_node(n))
            .collect()
    }

    /// Drop unreachable nodes and renumber densely, preserving relative id
    /// order. Only used right after parsing, where multi-name declarations
    /// leave prototype subtrees behind; never after mutation, where outside
    /// node identities must stay stable.
    pub fn compact(&mut self) {
        let live = {
            let mut live = alloc::vec![false; self.nodes.len()];
            let mut stack = alloc::vec![self.root];
            while let Some(id) = stack.pop() {
                if !live[id.index()] {
                    live[id.index()] = true;
                    stack.extend_from_slice(self.children(id));
                }
            }
            live
        };
        let mut remap = alloc::vec![NodeId(0); self.nodes.len()];
        let mut next = 0u32;
        for (i, &keep) in live.iter().enumerate() {
            if keep {
                remap[i] = NodeId(next);
                next += 1;
            }
        }
        let mut nodes = Vec::with_capacity(next as usize);
        for (i, node) in self.nodes.drain(..).enumerate() {
            if live[i] {
                let mut node = node;
                for c in &mut node.children {
                    *c = remap[c.index()];
                }
                if let Some(p) = &mut node.parent {
                    *p = remap[p.index()];
                }
                nodes.push(node);
            }
        }
        self.nodes = nodes;
        self.root = remap[self.root.index()];
    }

    /// Recompute parent links and descendant counts over the live tree.
    pub fn refresh_tree(&mut self) {
        for node in &mut self.nodes {
            node.parent = None;
        }
        let mut stack = alloc::vec![self.root];
        let mut order = Vec::new();
        while let Some(id) = stack.pop() {
            order.push(id);
            let children = self.nodes[id.index()].children.clone();
            for c in children {
                self.nodes[c.index()].parent = Some(id);
                stack.push(c);
            }
        }
        self.desc_count = alloc::vec![0; self.nodes.len()];
        for &id in order.iter().rev() {
            let mut total = 0;
            for &c in &self.nodes[id.index()].children {
                total += 1 + self.desc_count[c.index()];
            }
            self.desc_count[id.index()] = total;
        }
    }

    /// The paragraph owning `n`, if any.
    pub fn owning_paragraph(&self, n: NodeId) -> Option<usize> {
        let mut cur = n;
        loop {
            if let Some(idx) = self.paragraphs.iter().position(|p| p.node == cur) {
                return Some(idx);
            }
            cur = self.parent(cur)?;
        }
    }

    pub fn sig_index(&self, name: &str) -> Option<usize> {
        self.sigs.iter().position(|s| s.name == name)
    }

    pub fn pred_index(&self, name: &str) -> Option<usize> {
        self.preds.iter().position(|p| p.name == name)
    }

    pub fn fun_index(&self, name: &str) -> Option<usize> {
        self.funs.iter().position(|f| f.name == name)
    }

    pub fn assert_index(&self, name: &str) -> Option<usize> {
        self.asserts.iter().position(|a| a.name == name)
    }

    /// Source text of a node's span.
    pub fn snippet(&self, n: NodeId) -> &str {
        let span = self.span(n);
        let src = &self.sources[span.file as usize].text;
        &src[span.start as usize..span.end as usize]
    }

    /// Rebuild the paragraph and declaration tables from the arena.
    ///
    /// Used after parsing and after a mutation rewrote part of the tree.
    pub fn rebuild_tables(&mut self) {
        self.paragraphs.clear();
        self.sigs.clear();
        self.preds.clear();
        self.funs.clear();
        self.facts.clear();
        self.asserts.clear();
        self.opens.clear();

        let top = self.children(self.root).to_vec();
        // Signatures first so parent/field indices are known.
        for &id in &top {
            if let Op::Sig { name, mult, .. } = self.op(id) {
                let name = name.clone();
                let mult = *mult;
                let mut fields = Vec::new();
                let mut appended = None;
                for &c in self.children(id) {
                    match self.op(c) {
                        Op::Field { name, mult } => fields.push(FieldInfo {
                            name: name.clone(),
                            mult: *mult,
                            node: c,
                            range: self.children(c)[0],
                        }),
                        Op::AppendedFact => appended = Some(c),
                        _ => {}
                    }
                }
                self.sigs.push(SigInfo {
                    name,
                    mult,
                    parent: None,
                    fields,
                    node: id,
                    appended,
                    ordered: false,
                    subsigs: Vec::new(),
                });
            }
        }
        // Parent links by name.
        for i in 0..self.sigs.len() {
            if let Op::Sig { parent: Some(pname), .. } = self.op(self.sigs[i].node) {
                let pname = pname.clone();
                if let Some(pi) = self.sig_index(&pname) {
                    self.sigs[i].parent = Some(pi);
                }
            }
        }
        for i in 0..self.sigs.len() {
            if let Some(pi) = self.sigs[i].parent {
                self.sigs[pi].subsigs.push(i);
            }
        }

        for &id in &top {
            match self.op(id).clone() {
                Op::Open { alias } => {
                    let target = self.children(id)[0];
                    if let Op::Ident { name } = self.op(target) {
                        let name = name.clone();
                        if let Some(si) = self.sig_index(&name) {
                            self.sigs[si].ordered = true;
                            self.opens.push(OpenInfo { alias, node: id, sig: si });
                        }
                    }
                }
                Op::Sig { name, .. } => {
                    self.paragraphs.push(Paragraph {
                        kind: ParagraphKind::Signature,
                        name,
                        node: id,
                        body: None,
                        from_suite: !self.is_model_node(id),
                    });
                }
                Op::Fact { name } => {
                    let body = *self.children(id).last().unwrap();
                    self.facts.push(FactInfo { name: name.clone(), node: id, body });
                    self.paragraphs.push(Paragraph {
                        kind: ParagraphKind::Fact,
                        name,
                        node: id,
                        body: Some(body),
                        from_suite: !self.is_model_node(id),
                    });
                }
                Op::Pred { name } => {
                    let children = self.children(id).to_vec();
                    let (params, body) = split_params(self, &children, 1);
                    self.preds.push(PredInfo {
                        name: name.clone(),
                        node: id,
                        params,
                        body,
                        from_suite: !self.is_model_node(id),
                    });
                    self.paragraphs.push(Paragraph {
                        kind: ParagraphKind::Predicate,
                        name,
                        node: id,
                        body: Some(body),
                        from_suite: !self.is_model_node(id),
                    });
                }
                Op::Fun { name } => {
                    let children = self.children(id).to_vec();
                    let (params, body) = split_params(self, &children, 2);
                    let ret = children[children.len() - 2];
                    self.funs.push(FunInfo { name: name.clone(), node: id, params, ret, body });
                    self.paragraphs.push(Paragraph {
                        kind: ParagraphKind::Function,
                        name,
                        node: id,
                        body: Some(body),
                        from_suite: !self.is_model_node(id),
                    });
                }
                Op::Assert { name } => {
                    let body = *self.children(id).last().unwrap();
                    self.asserts.push(AssertInfo { name: name.clone(), node: id, body });
                    self.paragraphs.push(Paragraph {
                        kind: ParagraphKind::Assertion,
                        name,
                        node: id,
                        body: Some(body),
                        from_suite: !self.is_model_node(id),
                    });
                }
                _ => {}
            }
        }
        self.refresh_tree();
    }
}

fn split_params(model: &Model, children: &[NodeId], tail: usize) -> (Vec<ParamInfo>, NodeId) {
    let mut params = Vec::new();
    for &c in &children[..children.len() - tail] {
        if let Op::Param { name, mult } = model.op(c) {
            params.push(ParamInfo {
                name: name.clone(),
                mult: *mult,
                node: c,
                bound: model.children(c)[0],
            });
        }
    }
    (params, *children.last().unwrap())
}

/// Structural equality of two live trees, ignoring node ids and spans.
pub fn structurally_equal(a: &Model, b: &Model) -> bool {
    fn eq(a: &Model, an: NodeId, b: &Model, bn: NodeId) -> bool {
        if a.op(an) != b.op(bn) {
            return false;
        }
        let ac = a.children(an);
        let bc = b.children(bn);
        ac.len() == bc.len() && ac.iter().zip(bc).all(|(&x, &y)| eq(a, x, b, y))
    }
    eq(a, a.root, b, b.root)
}
