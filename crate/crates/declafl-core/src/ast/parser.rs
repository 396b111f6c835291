//! Recursive descent parser.
//!
//! Formulas and relational expressions share one precedence-climbing
//! grammar; kind and arity mismatches are reported by resolution, not here.
//! Multi-name declarations (`sig A, B ...`, `near, far: set Object`) are
//! split into one declaration per name with copied subtrees so that every
//! declaration has its own node identity.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::ast::lexer::{Lexer, Token, TokenKind};
use crate::ast::{
    BinOp, Command, CommandKind, ConstKind, DeclMult, Model, NodeId, Op, Quantifier, ScopeAst,
    ScopeItem, SigMult, SourceFile, Span, UnOp,
};
use crate::error::{Error, Result};

/// Parse a model source file.
pub fn parse(source: &str) -> Result<Model> {
    let mut model = Model::default();
    let root = model.alloc(Op::Root, Vec::new(), Span::default());
    model.root = root;
    parse_into(&mut model, source, "model")?;
    Ok(model)
}

/// Append the paragraphs and commands of another source file (a test suite)
/// into an existing model's arena.
pub fn parse_into(model: &mut Model, source: &str, filename: &str) -> Result<()> {
    let file = model.sources.len() as u16;
    model.sources.push(SourceFile { name: filename.to_string(), text: source.to_string() });
    let tokens = Lexer::new(source, file).tokenize()?;
    let mut parser = Parser { model, tokens, pos: 0, anon: 0 };
    parser.parse_file()?;
    model.compact();
    if model.model_node_limit == 0 {
        model.model_node_limit = model.nodes.len() as u32;
    }
    model.rebuild_tables();
    model.resolved = false;
    Ok(())
}

struct Parser<'m> {
    model: &'m mut Model,
    tokens: Vec<Token>,
    pos: usize,
    anon: u32,
}

impl<'m> Parser<'m> {
    fn peek(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn peek_at(&self, n: usize) -> &TokenKind {
        let idx = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[idx].kind
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> TokenKind {
        let kind = self.tokens[self.pos].kind.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        kind
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek() == kind {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<Span> {
        if self.peek() == &kind {
            let span = self.span();
            self.bump();
            Ok(span)
        } else {
            Err(self.err(format!("expected {}, found {}", kind.describe(), self.peek().describe())))
        }
    }

    fn expect_ident(&mut self) -> Result<(String, Span)> {
        match self.peek().clone() {
            TokenKind::Ident(name) => {
                let span = self.span();
                self.bump();
                Ok((name, span))
            }
            other => Err(self.err(format!("expected identifier, found {}", other.describe()))),
        }
    }

    fn err(&self, message: String) -> Error {
        Error::Syntax { message, span: self.span() }
    }

    fn alloc(&mut self, op: Op, children: Vec<NodeId>, span: Span) -> NodeId {
        self.model.alloc(op, children, span)
    }

    fn parse_file(&mut self) -> Result<()> {
        while self.peek() != &TokenKind::Eof {
            self.parse_top()?;
        }
        Ok(())
    }

    fn parse_top(&mut self) -> Result<()> {
        let start = self.span();
        match self.peek() {
            TokenKind::Open => self.parse_open(start),
            TokenKind::Sig => self.parse_sig(SigMult::Default, start),
            TokenKind::Abstract | TokenKind::One | TokenKind::Lone
                if self.peek_at(1) == &TokenKind::Sig =>
            {
                let mult = match self.bump() {
                    TokenKind::Abstract => SigMult::Abstract,
                    TokenKind::One => SigMult::One,
                    _ => SigMult::Lone,
                };
                self.parse_sig(mult, start)
            }
            TokenKind::Fact => self.parse_fact(start),
            TokenKind::Pred => self.parse_pred(start),
            TokenKind::Fun => self.parse_fun(start),
            TokenKind::Assert => self.parse_assert(start),
            TokenKind::Run => self.parse_command(CommandKind::Run, start),
            TokenKind::Check => self.parse_command(CommandKind::Check, start),
            other => Err(self.err(format!("expected a paragraph or command, found {}", other.describe()))),
        }
    }

    fn parse_open(&mut self, start: Span) -> Result<()> {
        self.expect(TokenKind::Open)?;
        let (path, path_span) = self.expect_ident()?;
        if path != "util/ordering" {
            return Err(Error::Syntax {
                message: format!("only `util/ordering` can be opened, found `{}`", path),
                span: path_span,
            });
        }
        self.expect(TokenKind::LBracket)?;
        let (target, target_span) = self.expect_ident()?;
        self.expect(TokenKind::RBracket)?;
        let alias = if self.eat(&TokenKind::As) {
            self.expect_ident()?.0
        } else {
            String::from("ordering")
        };
        let sig_ref = self.alloc(Op::Ident { name: target }, Vec::new(), target_span);
        let span = start.merge(self.prev_span());
        let open = self.alloc(Op::Open { alias }, alloc::vec![sig_ref], span);
        self.attach_top(open);
        Ok(())
    }

    fn attach_top(&mut self, id: NodeId) {
        let root = self.model.root;
        self.model.nodes[root.index()].children.push(id);
        self.model.nodes[id.index()].parent = Some(root);
    }

    fn parse_sig(&mut self, mult: SigMult, start: Span) -> Result<()> {
        self.expect(TokenKind::Sig)?;
        let mut names = alloc::vec![self.expect_ident()?.0];
        while self.eat(&TokenKind::Comma) {
            names.push(self.expect_ident()?.0);
        }
        let parent = if self.eat(&TokenKind::Extends) {
            Some(self.expect_ident()?.0)
        } else {
            None
        };
        self.expect(TokenKind::LBrace)?;
        // Field declarations: name(, name)* : mult expr, separated by commas.
        let mut fields: Vec<(Vec<String>, DeclMult, NodeId)> = Vec::new();
        while self.peek() != &TokenKind::RBrace {
            let mut fnames = alloc::vec![self.expect_ident()?.0];
            while self.eat(&TokenKind::Comma) {
                fnames.push(self.expect_ident()?.0);
            }
            self.expect(TokenKind::Colon)?;
            let fmult = self.parse_decl_mult();
            let range = self.parse_expr_only()?;
            fields.push((fnames, fmult, range));
            if !self.eat(&TokenKind::Comma) {
                break;
            }
        }
        self.expect(TokenKind::RBrace)?;
        let appended = if self.peek() == &TokenKind::LBrace {
            let block_start = self.span();
            self.expect(TokenKind::LBrace)?;
            let mut formulas = Vec::new();
            while self.peek() != &TokenKind::RBrace {
                formulas.push(self.parse_formula()?);
            }
            self.expect(TokenKind::RBrace)?;
            let span = block_start.merge(self.prev_span());
            Some((formulas, span))
        } else {
            None
        };
        let span = start.merge(self.prev_span());

        for name in names {
            let mut children = Vec::new();
            for (fnames, fmult, range) in &fields {
                for fname in fnames {
                    let range_copy = self.deep_copy(*range);
                    let fspan = self.model.span(range_copy);
                    let field = self.alloc(
                        Op::Field { name: fname.clone(), mult: *fmult },
                        alloc::vec![range_copy],
                        fspan,
                    );
                    children.push(field);
                }
            }
            if let Some((formulas, fspan)) = &appended {
                let copies: Vec<NodeId> = formulas.iter().map(|&f| self.deep_copy(f)).collect();
                let block = self.alloc(Op::AppendedFact, copies, *fspan);
                children.push(block);
            }
            let sig = self.alloc(
                Op::Sig { name, mult, parent: parent.clone() },
                children,
                span,
            );
            self.attach_top(sig);
        }
        // Prototype field/appended subtrees stay unattached; compaction
        // drops them once parsing finishes.
        Ok(())
    }

    fn deep_copy(&mut self, n: NodeId) -> NodeId {
        let node = self.model.nodes[n.index()].clone();
        let children: Vec<NodeId> = node.children.iter().map(|&c| self.deep_copy(c)).collect();
        self.alloc(node.op, children, node.span)
    }

    fn parse_decl_mult(&mut self) -> DeclMult {
        match self.peek() {
            TokenKind::Set => {
                self.bump();
                DeclMult::Set
            }
            TokenKind::One => {
                self.bump();
                DeclMult::One
            }
            TokenKind::Lone => {
                self.bump();
                DeclMult::Lone
            }
            TokenKind::Some => {
                self.bump();
                DeclMult::SomeOf
            }
            _ => DeclMult::One,
        }
    }

    fn parse_fact(&mut self, start: Span) -> Result<()> {
        self.expect(TokenKind::Fact)?;
        let name = match self.peek().clone() {
            TokenKind::Ident(name) => {
                self.bump();
                name
            }
            _ => {
                self.anon += 1;
                format!("fact${}", self.anon)
            }
        };
        let body = self.parse_block()?;
        let span = start.merge(self.prev_span());
        let fact = self.alloc(Op::Fact { name }, alloc::vec![body], span);
        self.attach_top(fact);
        Ok(())
    }

    fn parse_params(&mut self) -> Result<Vec<NodeId>> {
        let mut params = Vec::new();
        if self.eat(&TokenKind::LBracket) {
            while self.peek() != &TokenKind::RBracket {
                let mut names = alloc::vec![self.expect_ident()?];
                while self.eat(&TokenKind::Comma) {
                    // Lookahead: a comma may separate parameter groups.
                    if matches!(self.peek(), TokenKind::Ident(_)) {
                        names.push(self.expect_ident()?);
                    } else {
                        return Err(self.err("expected parameter name".to_string()));
                    }
                    if self.peek() == &TokenKind::Colon {
                        break;
                    }
                }
                self.expect(TokenKind::Colon)?;
                let mult = self.parse_decl_mult();
                let bound = self.parse_expr_only()?;
                for (name, nspan) in names {
                    let bound_copy = self.deep_copy(bound);
                    let span = nspan.merge(self.model.span(bound_copy));
                    let param =
                        self.alloc(Op::Param { name, mult }, alloc::vec![bound_copy], span);
                    params.push(param);
                }
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
            self.expect(TokenKind::RBracket)?;
        }
        Ok(params)
    }

    fn parse_pred(&mut self, start: Span) -> Result<()> {
        self.expect(TokenKind::Pred)?;
        let (name, _) = self.expect_ident()?;
        let mut children = self.parse_params()?;
        let body = self.parse_block()?;
        children.push(body);
        let span = start.merge(self.prev_span());
        let pred = self.alloc(Op::Pred { name }, children, span);
        self.attach_top(pred);
        Ok(())
    }

    fn parse_fun(&mut self, start: Span) -> Result<()> {
        self.expect(TokenKind::Fun)?;
        let (name, _) = self.expect_ident()?;
        let mut children = self.parse_params()?;
        self.expect(TokenKind::Colon)?;
        let _ret_mult = self.parse_decl_mult();
        let ret = self.parse_expr_only()?;
        children.push(ret);
        self.expect(TokenKind::LBrace)?;
        let body = self.parse_formula()?;
        self.expect(TokenKind::RBrace)?;
        children.push(body);
        let span = start.merge(self.prev_span());
        let fun = self.alloc(Op::Fun { name }, children, span);
        self.attach_top(fun);
        Ok(())
    }

    fn parse_assert(&mut self, start: Span) -> Result<()> {
        self.expect(TokenKind::Assert)?;
        let (name, _) = self.expect_ident()?;
        let body = self.parse_block()?;
        let span = start.merge(self.prev_span());
        let a = self.alloc(Op::Assert { name }, alloc::vec![body], span);
        self.attach_top(a);
        Ok(())
    }

    fn parse_command(&mut self, kind: CommandKind, start: Span) -> Result<()> {
        self.bump(); // run / check
        let (name, inline) = if self.peek() == &TokenKind::LBrace {
            // Inline body becomes an anonymous predicate paragraph so the
            // nodes are reachable and rankable like any other body.
            self.anon += 1;
            let name = format!(
                "{}${}",
                match kind {
                    CommandKind::Run => "run",
                    CommandKind::Check => "check",
                },
                self.anon
            );
            let body = self.parse_block()?;
            let span = start.merge(self.prev_span());
            let pred = self.alloc(Op::Pred { name: name.clone() }, alloc::vec![body], span);
            self.attach_top(pred);
            (name, true)
        } else {
            (self.expect_ident()?.0, false)
        };
        let mut scope = ScopeAst::default();
        if self.eat(&TokenKind::For) {
            if let TokenKind::Int(n) = self.peek().clone() {
                self.bump();
                scope.default = Some(n);
                if self.eat(&TokenKind::But) {
                    self.parse_scope_items(&mut scope)?;
                }
            } else {
                self.parse_scope_items(&mut scope)?;
            }
        }
        let expect = if self.eat(&TokenKind::Expect) {
            match self.bump() {
                TokenKind::Int(0) => Some(false),
                TokenKind::Int(1) => Some(true),
                other => {
                    return Err(self.err(format!("expected 0 or 1 after `expect`, found {}", other.describe())))
                }
            }
        } else {
            None
        };
        let span = start.merge(self.prev_span());
        self.model.commands.push(Command { kind, name, inline, scope, expect, span });
        Ok(())
    }

    fn parse_scope_items(&mut self, scope: &mut ScopeAst) -> Result<()> {
        loop {
            let exact = self.eat(&TokenKind::Exactly);
            let count = match self.bump() {
                TokenKind::Int(n) => n,
                other => return Err(self.err(format!("expected atom count, found {}", other.describe()))),
            };
            let (sig, _) = self.expect_ident()?;
            scope.items.push(ScopeItem { sig, count, exact });
            if !self.eat(&TokenKind::Comma) {
                break;
            }
        }
        Ok(())
    }

    /// `{ f1 f2 ... }`. Single-formula blocks unwrap to the formula itself.
    fn parse_block(&mut self) -> Result<NodeId> {
        let start = self.expect(TokenKind::LBrace)?;
        let mut formulas = Vec::new();
        while self.peek() != &TokenKind::RBrace {
            formulas.push(self.parse_formula()?);
        }
        self.expect(TokenKind::RBrace)?;
        if formulas.len() == 1 {
            return Ok(formulas[0]);
        }
        let span = start.merge(self.prev_span());
        Ok(self.alloc(Op::Block, formulas, span))
    }

    // ---- formula / expression grammar ----

    fn parse_formula(&mut self) -> Result<NodeId> {
        self.parse_or()
    }

    /// Entry used where only a relational expression makes sense (field
    /// ranges, parameter bounds, function result types).
    fn parse_expr_only(&mut self) -> Result<NodeId> {
        self.parse_union()
    }

    fn parse_or(&mut self) -> Result<NodeId> {
        let mut lhs = self.parse_iff()?;
        while matches!(self.peek(), TokenKind::BarBar | TokenKind::Or) {
            self.bump();
            let rhs = self.parse_iff()?;
            let span = self.model.span(lhs).merge(self.model.span(rhs));
            lhs = self.alloc(Op::Bin { op: BinOp::Or }, alloc::vec![lhs, rhs], span);
        }
        Ok(lhs)
    }

    fn parse_iff(&mut self) -> Result<NodeId> {
        let mut lhs = self.parse_implies()?;
        while matches!(self.peek(), TokenKind::IffArrow | TokenKind::Iff) {
            self.bump();
            let rhs = self.parse_implies()?;
            let span = self.model.span(lhs).merge(self.model.span(rhs));
            lhs = self.alloc(Op::Bin { op: BinOp::Iff }, alloc::vec![lhs, rhs], span);
        }
        Ok(lhs)
    }

    fn parse_implies(&mut self) -> Result<NodeId> {
        let cond = self.parse_and()?;
        if matches!(self.peek(), TokenKind::FatArrow | TokenKind::Implies) {
            self.bump();
            let then = self.parse_implies()?;
            if self.eat(&TokenKind::Else) {
                let els = self.parse_implies()?;
                let span = self.model.span(cond).merge(self.model.span(els));
                return Ok(self.alloc(Op::ImpliesElse, alloc::vec![cond, then, els], span));
            }
            let span = self.model.span(cond).merge(self.model.span(then));
            return Ok(self.alloc(Op::Bin { op: BinOp::Implies }, alloc::vec![cond, then], span));
        }
        Ok(cond)
    }

    fn parse_and(&mut self) -> Result<NodeId> {
        let mut lhs = self.parse_neg()?;
        while matches!(self.peek(), TokenKind::AmpAmp | TokenKind::And) {
            self.bump();
            let rhs = self.parse_neg()?;
            let span = self.model.span(lhs).merge(self.model.span(rhs));
            lhs = self.alloc(Op::Bin { op: BinOp::And }, alloc::vec![lhs, rhs], span);
        }
        Ok(lhs)
    }

    fn parse_neg(&mut self) -> Result<NodeId> {
        let start = self.span();
        if matches!(self.peek(), TokenKind::Bang | TokenKind::Not) {
            self.bump();
            let inner = self.parse_neg()?;
            let span = start.merge(self.model.span(inner));
            return Ok(self.alloc(Op::Un { op: UnOp::Not }, alloc::vec![inner], span));
        }
        if let Some(q) = self.peek_quantifier() {
            if self.is_quant_decl_ahead() {
                return self.parse_quant(q);
            }
        }
        if self.peek() == &TokenKind::Let {
            return self.parse_let();
        }
        self.parse_comparison()
    }

    fn peek_quantifier(&self) -> Option<Quantifier> {
        match self.peek() {
            TokenKind::All => Some(Quantifier::All),
            TokenKind::Some => Some(Quantifier::Some),
            TokenKind::No => Some(Quantifier::No),
            TokenKind::Lone => Some(Quantifier::Lone),
            TokenKind::One => Some(Quantifier::One),
            _ => None,
        }
    }

    /// After a quantifier keyword, `disj` or `ident (, ident)* :` starts a
    /// declaration; anything else is a multiplicity formula.
    fn is_quant_decl_ahead(&self) -> bool {
        let mut i = 1;
        if self.peek_at(i) == &TokenKind::Disj {
            return true;
        }
        loop {
            match self.peek_at(i) {
                TokenKind::Ident(_) => i += 1,
                _ => return false,
            }
            match self.peek_at(i) {
                TokenKind::Colon => return true,
                TokenKind::Comma => i += 1,
                _ => return false,
            }
        }
    }

    fn parse_quant(&mut self, q: Quantifier) -> Result<NodeId> {
        let start = self.span();
        self.bump();
        let mut children = Vec::new();
        loop {
            let decl_start = self.span();
            let disj = self.eat(&TokenKind::Disj);
            let mut names = alloc::vec![self.expect_ident()?.0];
            while self.peek() == &TokenKind::Comma
                && matches!(self.peek_at(1), TokenKind::Ident(_))
                && !self.comma_starts_new_decl()
            {
                self.bump();
                names.push(self.expect_ident()?.0);
            }
            self.expect(TokenKind::Colon)?;
            let bound = self.parse_expr_only()?;
            let span = decl_start.merge(self.model.span(bound));
            let decl = self.alloc(Op::QuantDecl { names, disj }, alloc::vec![bound], span);
            children.push(decl);
            if !self.eat(&TokenKind::Comma) {
                break;
            }
        }
        let body = if self.peek() == &TokenKind::LBrace {
            self.parse_block()?
        } else {
            self.expect(TokenKind::Bar)?;
            self.parse_formula()?
        };
        children.push(body);
        let span = start.merge(self.prev_span());
        Ok(self.alloc(Op::Quant { q }, children, span))
    }

    /// Distinguish `x, y: S` (same declaration) from `x: S, y: T` at the
    /// comma after a name: a following `disj` always starts a new decl.
    fn comma_starts_new_decl(&self) -> bool {
        self.peek_at(1) == &TokenKind::Disj
    }

    fn parse_let(&mut self) -> Result<NodeId> {
        let start = self.span();
        self.expect(TokenKind::Let)?;
        let mut bindings = Vec::new();
        loop {
            let (name, _) = self.expect_ident()?;
            self.expect(TokenKind::EqSign)?;
            let value = self.parse_expr_only()?;
            bindings.push((name, value));
            if !self.eat(&TokenKind::Comma) {
                break;
            }
        }
        let body = if self.peek() == &TokenKind::LBrace {
            self.parse_block()?
        } else {
            self.expect(TokenKind::Bar)?;
            self.parse_formula()?
        };
        let span = start.merge(self.prev_span());
        let mut node = body;
        for (name, value) in bindings.into_iter().rev() {
            node = self.alloc(Op::Let { name }, alloc::vec![value, node], span);
        }
        Ok(node)
    }

    fn parse_comparison(&mut self) -> Result<NodeId> {
        if let Some(q) = self.peek_quantifier() {
            // Multiplicity formula: `some e`, `no e`, ...; `all e` is not a
            // formula, so `all` never reaches here with a declaration.
            if q != Quantifier::All {
                let start = self.span();
                self.bump();
                let expr = self.parse_union()?;
                let span = start.merge(self.model.span(expr));
                return Ok(self.alloc(Op::MultForm { m: q }, alloc::vec![expr], span));
            }
            return Err(self.err("`all` requires a variable declaration".to_string()));
        }
        let lhs = self.parse_union()?;
        let op = match self.peek() {
            TokenKind::In => Some(BinOp::In),
            TokenKind::EqSign => Some(BinOp::Eq),
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            let rhs = self.parse_union()?;
            let span = self.model.span(lhs).merge(self.model.span(rhs));
            return Ok(self.alloc(Op::Bin { op }, alloc::vec![lhs, rhs], span));
        }
        Ok(lhs)
    }

    fn parse_union(&mut self) -> Result<NodeId> {
        let mut lhs = self.parse_inter()?;
        loop {
            let op = match self.peek() {
                TokenKind::Plus => BinOp::Union,
                TokenKind::Minus => BinOp::Diff,
                _ => break,
            };
            self.bump();
            let rhs = self.parse_inter()?;
            let span = self.model.span(lhs).merge(self.model.span(rhs));
            lhs = self.alloc(Op::Bin { op }, alloc::vec![lhs, rhs], span);
        }
        Ok(lhs)
    }

    fn parse_inter(&mut self) -> Result<NodeId> {
        let mut lhs = self.parse_product()?;
        while self.peek() == &TokenKind::Amp {
            self.bump();
            let rhs = self.parse_product()?;
            let span = self.model.span(lhs).merge(self.model.span(rhs));
            lhs = self.alloc(Op::Bin { op: BinOp::Inter }, alloc::vec![lhs, rhs], span);
        }
        Ok(lhs)
    }

    fn parse_product(&mut self) -> Result<NodeId> {
        let mut lhs = self.parse_join()?;
        while self.peek() == &TokenKind::Arrow {
            self.bump();
            let rhs = self.parse_join()?;
            let span = self.model.span(lhs).merge(self.model.span(rhs));
            lhs = self.alloc(Op::Bin { op: BinOp::Product }, alloc::vec![lhs, rhs], span);
        }
        Ok(lhs)
    }

    fn parse_join(&mut self) -> Result<NodeId> {
        let mut lhs = self.parse_unary()?;
        loop {
            match self.peek() {
                TokenKind::Dot => {
                    self.bump();
                    let rhs = self.parse_unary()?;
                    let span = self.model.span(lhs).merge(self.model.span(rhs));
                    lhs = self.alloc(Op::Bin { op: BinOp::Join }, alloc::vec![lhs, rhs], span);
                }
                TokenKind::LBracket => {
                    self.bump();
                    let mut args = Vec::new();
                    while self.peek() != &TokenKind::RBracket {
                        args.push(self.parse_union()?);
                        if !self.eat(&TokenKind::Comma) {
                            break;
                        }
                    }
                    self.expect(TokenKind::RBracket)?;
                    let span = self.model.span(lhs).merge(self.prev_span());
                    lhs = if let Op::Ident { name } = self.model.op(lhs).clone() {
                        // Named application: invocation or box join, decided
                        // by resolution. The bare identifier node is replaced
                        // by the call node.
                        self.model.nodes[lhs.index()].op = Op::Call { name };
                        self.model.nodes[lhs.index()].children = args.clone();
                        for &a in &args {
                            self.model.nodes[a.index()].parent = Some(lhs);
                        }
                        self.model.nodes[lhs.index()].span = span;
                        lhs
                    } else {
                        // `e1[e2, e3]` desugars to `e3.(e2.e1)`.
                        let mut acc = lhs;
                        for a in args {
                            let jspan = self.model.span(a).merge(self.model.span(acc));
                            acc = self
                                .alloc(Op::Bin { op: BinOp::Join }, alloc::vec![a, acc], jspan);
                        }
                        acc
                    };
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<NodeId> {
        let start = self.span();
        let op = match self.peek() {
            TokenKind::Tilde => Some(UnOp::Transpose),
            TokenKind::Caret => Some(UnOp::Closure),
            TokenKind::Star => Some(UnOp::RClosure),
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            let inner = self.parse_unary()?;
            let span = start.merge(self.model.span(inner));
            return Ok(self.alloc(Op::Un { op }, alloc::vec![inner], span));
        }
        self.parse_primary()
    }

    fn parse_primary(&mut self) -> Result<NodeId> {
        let span = self.span();
        match self.peek().clone() {
            TokenKind::LParen => {
                self.bump();
                let inner = self.parse_formula()?;
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            TokenKind::LBrace => self.parse_block(),
            TokenKind::Ident(name) => {
                self.bump();
                Ok(self.alloc(Op::Ident { name }, Vec::new(), span))
            }
            TokenKind::NoneKw => {
                self.bump();
                Ok(self.alloc(Op::Const { k: ConstKind::None }, Vec::new(), span))
            }
            TokenKind::Univ => {
                self.bump();
                Ok(self.alloc(Op::Const { k: ConstKind::Univ }, Vec::new(), span))
            }
            TokenKind::Iden => {
                self.bump();
                Ok(self.alloc(Op::Const { k: ConstKind::Iden }, Vec::new(), span))
            }
            other => Err(self.err(format!("expected an expression, found {}", other.describe()))),
        }
    }
}
