//! Canonical text emission.
//!
//! `parse(pretty_print(m))` is structurally equal to `m`: parentheses are
//! inserted wherever a child's precedence would otherwise rebind it.

use alloc::string::String;
use alloc::vec::Vec;

use crate::ast::{
    BinOp, CommandKind, DeclMult, Model, NodeId, Op, ParagraphKind, SigMult, UnOp,
};

/// Emit the whole model in canonical form.
pub fn pretty_print(model: &Model) -> String {
    let mut out = String::new();
    for open in &model.opens {
        let sig = &model.sigs[open.sig].name;
        out.push_str(&alloc::format!("open util/ordering[{}] as {}\n", sig, open.alias));
    }
    for para in &model.paragraphs {
        // Anonymous predicates hold inline command bodies; the command
        // printer emits them.
        if para.name.contains('$') && para.kind == ParagraphKind::Predicate {
            continue;
        }
        print_paragraph(model, para.node, &mut out);
        out.push('\n');
    }
    for cmd in &model.commands {
        let kw = match cmd.kind {
            CommandKind::Run => "run",
            CommandKind::Check => "check",
        };
        out.push_str(kw);
        out.push(' ');
        if cmd.inline {
            // Inline commands reference an anonymous predicate; print its
            // body back in inline form.
            if let Some(idx) = model.pred_index(&cmd.name) {
                let body = model.preds[idx].body;
                print_block_or_formula(model, body, &mut out);
            }
        } else {
            out.push_str(&cmd.name);
        }
        if let Some(n) = cmd.scope.default {
            out.push_str(&alloc::format!(" for {}", n));
            if !cmd.scope.items.is_empty() {
                out.push_str(" but ");
                print_scope_items(&cmd.scope.items, &mut out);
            }
        } else if !cmd.scope.items.is_empty() {
            out.push_str(" for ");
            print_scope_items(&cmd.scope.items, &mut out);
        }
        if let Some(e) = cmd.expect {
            out.push_str(if e { " expect 1" } else { " expect 0" });
        }
        out.push('\n');
    }
    out
}

fn print_scope_items(items: &[crate::ast::ScopeItem], out: &mut String) {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        if item.exact {
            out.push_str("exactly ");
        }
        out.push_str(&alloc::format!("{} {}", item.count, item.sig));
    }
}

fn print_paragraph(model: &Model, node: NodeId, out: &mut String) {
    match model.op(node).clone() {
        Op::Sig { name, mult, parent } => {
            match mult {
                SigMult::Default => {}
                SigMult::One => out.push_str("one "),
                SigMult::Lone => out.push_str("lone "),
                SigMult::Abstract => out.push_str("abstract "),
            }
            out.push_str("sig ");
            out.push_str(&name);
            if let Some(p) = parent {
                out.push_str(" extends ");
                out.push_str(&p);
            }
            out.push_str(" {");
            let mut first = true;
            let mut appended = None;
            for &c in model.children(node) {
                match model.op(c) {
                    Op::Field { name, mult } => {
                        if !first {
                            out.push(',');
                        }
                        first = false;
                        out.push(' ');
                        out.push_str(name);
                        out.push_str(": ");
                        print_decl_mult(*mult, out);
                        print_expr(model, model.children(c)[0], 0, out);
                    }
                    Op::AppendedFact => appended = Some(c),
                    _ => {}
                }
            }
            out.push_str(if first { "}" } else { " }" });
            if let Some(a) = appended {
                out.push_str(" { ");
                for &f in model.children(a) {
                    print_expr(model, f, 0, out);
                    out.push(' ');
                }
                out.push('}');
            }
        }
        Op::Fact { name } => {
            out.push_str("fact ");
            if !name.contains('$') {
                out.push_str(&name);
                out.push(' ');
            }
            print_body_block(model, *model.children(node).last().unwrap(), out);
        }
        Op::Pred { name } => {
            if name.contains('$') {
                return;
            }
            out.push_str("pred ");
            out.push_str(&name);
            print_params(model, node, 1, out);
            out.push(' ');
            print_body_block(model, *model.children(node).last().unwrap(), out);
        }
        Op::Fun { name } => {
            out.push_str("fun ");
            out.push_str(&name);
            print_params(model, node, 2, out);
            let children = model.children(node);
            out.push_str(": set ");
            print_expr(model, children[children.len() - 2], 7, out);
            out.push_str(" { ");
            print_expr(model, *children.last().unwrap(), 0, out);
            out.push_str(" }");
        }
        Op::Assert { name } => {
            out.push_str("assert ");
            out.push_str(&name);
            out.push(' ');
            print_body_block(model, *model.children(node).last().unwrap(), out);
        }
        _ => {}
    }
}

fn print_decl_mult(mult: DeclMult, out: &mut String) {
    match mult {
        DeclMult::Set => out.push_str("set "),
        DeclMult::One => out.push_str("one "),
        DeclMult::Lone => out.push_str("lone "),
        DeclMult::SomeOf => out.push_str("some "),
    }
}

fn print_params(model: &Model, node: NodeId, tail: usize, out: &mut String) {
    let children = model.children(node);
    let params = &children[..children.len() - tail];
    if params.is_empty() {
        return;
    }
    out.push('[');
    let mut first = true;
    for &p in params {
        if let Op::Param { name, mult } = model.op(p) {
            if !first {
                out.push_str(", ");
            }
            first = false;
            out.push_str(name);
            out.push_str(": ");
            print_decl_mult(*mult, out);
            print_expr(model, model.children(p)[0], 0, out);
        }
    }
    out.push(']');
}

/// Paragraph bodies always print inside braces even when the body is a
/// single formula (blocks of one were unwrapped at parse time).
fn print_body_block(model: &Model, body: NodeId, out: &mut String) {
    if matches!(model.op(body), Op::Block) {
        print_expr(model, body, 0, out);
    } else {
        out.push_str("{ ");
        print_expr(model, body, 0, out);
        out.push_str(" }");
    }
}

fn print_block_or_formula(model: &Model, body: NodeId, out: &mut String) {
    print_body_block(model, body, out)
}

/// Print the subtree rooted at `n` as source text.
pub fn print_subtree(model: &Model, n: NodeId) -> String {
    let mut out = String::new();
    if model.children(model.root).contains(&n) {
        print_paragraph(model, n, &mut out);
    } else {
        print_expr(model, n, 0, &mut out);
    }
    out
}

fn prec(model: &Model, n: NodeId) -> u8 {
    match model.op(n) {
        // Quantifiers and lets swallow everything to their right, so they
        // are parenthesized in any non-tail position.
        Op::Quant { .. } | Op::Let { .. } => 0,
        Op::Bin { op } => match op {
            BinOp::Or => 1,
            BinOp::Iff => 2,
            BinOp::Implies => 3,
            BinOp::And => 4,
            BinOp::In | BinOp::Eq => 6,
            BinOp::Union | BinOp::Diff => 7,
            BinOp::Inter => 8,
            BinOp::Product => 9,
            BinOp::Join => 10,
        },
        Op::ImpliesElse => 3,
        Op::Un { op } => match op {
            UnOp::Not => 5,
            _ => 11,
        },
        Op::MultForm { .. } => 6,
        // `name[args]` re-attaches to a preceding dot chain when reparsed,
        // so calls rank with joins rather than atoms.
        Op::Call { .. } => 10,
        _ => 12,
    }
}

fn print_expr(model: &Model, n: NodeId, min_prec: u8, out: &mut String) {
    let p = prec(model, n);
    let wrap = p < min_prec;
    if wrap {
        out.push('(');
    }
    match model.op(n).clone() {
        Op::Bin { op } => {
            let (lp, rp) = match op {
                // `=>` is right-associative; everything else associates left.
                BinOp::Implies => (p + 1, p),
                _ => (p, p + 1),
            };
            print_expr(model, model.children(n)[0], lp, out);
            match op {
                BinOp::Join => out.push_str("."),
                BinOp::In => out.push_str(" in "),
                BinOp::Eq => out.push_str(" = "),
                other => {
                    out.push(' ');
                    out.push_str(other.symbol());
                    out.push(' ');
                }
            }
            print_expr(model, model.children(n)[1], rp, out);
        }
        Op::ImpliesElse => {
            let c = model.children(n);
            print_expr(model, c[0], p + 1, out);
            out.push_str(" => ");
            print_expr(model, c[1], p + 1, out);
            out.push_str(" else ");
            print_expr(model, c[2], p, out);
        }
        Op::Un { op } => {
            out.push_str(op.symbol());
            let inner_min = if op == UnOp::Not { 5 } else { 11 };
            print_expr(model, model.children(n)[0], inner_min, out);
        }
        Op::MultForm { m } => {
            out.push_str(m.keyword());
            out.push(' ');
            print_expr(model, model.children(n)[0], 7, out);
        }
        Op::Quant { q } => {
            out.push_str(q.keyword());
            out.push(' ');
            let children = model.children(n).to_vec();
            let body = *children.last().unwrap();
            for (i, &d) in children[..children.len() - 1].iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                if let Op::QuantDecl { names, disj } = model.op(d) {
                    if *disj {
                        out.push_str("disj ");
                    }
                    out.push_str(&names.join(", "));
                    out.push_str(": ");
                    print_expr(model, model.children(d)[0], 7, out);
                }
            }
            if matches!(model.op(body), Op::Block) {
                out.push(' ');
                print_expr(model, body, 0, out);
            } else {
                out.push_str(" | ");
                print_expr(model, body, 0, out);
            }
        }
        Op::Let { name } => {
            out.push_str("let ");
            out.push_str(&name);
            out.push_str(" = ");
            let c = model.children(n);
            print_expr(model, c[0], 7, out);
            if matches!(model.op(c[1]), Op::Block) {
                out.push(' ');
                print_expr(model, c[1], 0, out);
            } else {
                out.push_str(" | ");
                print_expr(model, c[1], 0, out);
            }
        }
        Op::Block => {
            out.push_str("{ ");
            for &f in model.children(n) {
                print_expr(model, f, 0, out);
                out.push(' ');
            }
            out.push('}');
        }
        Op::Call { name } => {
            out.push_str(&name);
            out.push('[');
            for (i, &a) in model.children(n).iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                print_expr(model, a, 0, out);
            }
            out.push(']');
        }
        Op::Ident { name } => out.push_str(&name),
        Op::Const { k } => out.push_str(match k {
            crate::ast::ConstKind::None => "none",
            crate::ast::ConstKind::Univ => "univ",
            crate::ast::ConstKind::Iden => "iden",
        }),
        _ => {}
    }
    if wrap {
        out.push(')');
    }
}

/// Collect print output lines for tests.
pub fn print_lines(model: &Model) -> Vec<String> {
    pretty_print(model).lines().map(String::from).collect()
}
