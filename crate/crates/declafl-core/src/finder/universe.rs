//! Bounded universe construction: atom pools per signature and the ground
//! variable layout shared by the grounder and the enumeration-based
//! evaluator.
//!
//! Pools are structural: a `one`/`lone` signature owns a single atom, a
//! default signature owns `scope` atoms, an abstract signature owns none
//! (its extent is the union of its subsignatures), and `extends` children
//! own disjoint fresh pools. Signatures targeted by `open util/ordering`
//! are exact: all their atoms are forced present, and the order follows
//! atom index, which is satisfiability-preserving because source text can
//! never name atoms directly.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::ast::{Model, NodeId, ScopeAst, SigMult};
use crate::error::{Error, Result};

/// Per-signature atom bounds for bounded checking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scope {
    pub default_atoms: u32,
    /// signature name -> (count, exact).
    pub overrides: BTreeMap<String, (u32, bool)>,
}

impl Scope {
    pub fn new(default_atoms: u32) -> Self {
        Scope { default_atoms, overrides: BTreeMap::new() }
    }

    pub fn with_override(mut self, sig: &str, count: u32, exact: bool) -> Self {
        self.overrides.insert(String::from(sig), (count, exact));
        self
    }

    /// Resolve the scope clause of a parsed command. A missing `for` clause
    /// defaults to 3 atoms per signature.
    pub fn from_ast(ast: &ScopeAst) -> Self {
        let mut scope = Scope::new(ast.default.unwrap_or(3));
        for item in &ast.items {
            scope.overrides.insert(item.sig.clone(), (item.count, item.exact));
        }
        scope
    }
}

impl Default for Scope {
    fn default() -> Self {
        Scope::new(3)
    }
}

pub type AtomId = u16;

#[derive(Debug, Clone)]
pub struct AtomInfo {
    /// Owning signature index (the signature whose own pool holds the atom).
    pub sig: usize,
    pub index: u32,
    /// Present in every instance (one-sigs, exact scopes, ordered sigs).
    pub forced: bool,
}

/// What a ground variable denotes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VarOrigin {
    /// Atom membership in its owning signature's own pool.
    Member { sig: usize, atom: AtomId },
    /// Field tuple: (owner atom, range atom).
    FieldTuple { sig: usize, field: usize, tuple: Vec<AtomId> },
    /// Tuple of a free parameter relation (test command or equivalence check).
    ParamTuple { param: usize, tuple: Vec<AtomId> },
    /// Definitional variable introduced by CNF conversion.
    Aux,
}

#[derive(Debug, Clone)]
pub struct Universe {
    pub atoms: Vec<AtomInfo>,
    /// Own pool per signature index.
    pub pools: Vec<Vec<AtomId>>,
    /// Extent pool (own plus descendants) per signature index.
    pub extents: Vec<Vec<AtomId>>,
    /// Membership variable per atom; `None` when forced.
    pub member_var: Vec<Option<u32>>,
    /// Field tuple variables: (sig, field) -> ordered (tuple, var) pairs.
    pub field_vars: BTreeMap<(usize, usize), Vec<(Vec<AtomId>, u32)>>,
    /// Variable origins, indexed by variable id.
    pub origins: Vec<VarOrigin>,
    pub scope: Scope,
}

impl Universe {
    /// Build the universe for a model under a scope.
    pub fn build(model: &Model, scope: &Scope) -> Result<Universe> {
        let sizes = pool_sizes(model, scope)?;
        Universe::build_inner(model, None, scope, &sizes, false)
    }

    /// Shared universe for a model and its mutant: per-signature pools take
    /// the larger of the two sizes, one-sig atoms stay optional so each side
    /// asserts its own multiplicity, and field bounds are unioned because a
    /// mutation may widen a range expression.
    pub fn build_merged(a: &Model, b: &Model, scope: &Scope) -> Result<Universe> {
        let sizes = merged_pool_sizes(a, b, scope)?;
        Universe::build_inner(a, Some(b), scope, &sizes, true)
    }

    fn build_inner(
        model: &Model,
        other: Option<&Model>,
        scope: &Scope,
        sizes: &[u32],
        relaxed: bool,
    ) -> Result<Universe> {
        let mut u = Universe {
            atoms: Vec::new(),
            pools: alloc::vec![Vec::new(); model.sigs.len()],
            extents: alloc::vec![Vec::new(); model.sigs.len()],
            member_var: Vec::new(),
            field_vars: BTreeMap::new(),
            origins: Vec::new(),
            scope: scope.clone(),
        };
        for (si, sig) in model.sigs.iter().enumerate() {
            let exact = sig.ordered
                || matches!(scope.overrides.get(&sig.name), Some((_, true)))
                || (!relaxed && sig.mult == SigMult::One);
            for k in 0..sizes[si] {
                let id = u.atoms.len() as AtomId;
                u.atoms.push(AtomInfo { sig: si, index: k, forced: exact });
                u.pools[si].push(id);
            }
        }
        for si in 0..model.sigs.len() {
            u.extents[si] = extent_of(model, &u.pools, si);
            if model.sigs[si].ordered && u.extents[si].is_empty() {
                return Err(Error::Scope {
                    message: format!(
                        "ordered signature `{}` has an empty scope",
                        model.sigs[si].name
                    ),
                });
            }
        }
        // Membership variables for non-forced atoms, in atom order.
        u.member_var = alloc::vec![None; u.atoms.len()];
        for (ai, atom) in u.atoms.iter().enumerate() {
            if !atom.forced {
                let var = u.origins.len() as u32;
                u.origins.push(VarOrigin::Member { sig: atom.sig, atom: ai as AtomId });
                u.member_var[ai] = Some(var);
            }
        }
        // Field tuple variables in (sig, field, owner atom, range atom) order.
        for (si, sig) in model.sigs.iter().enumerate() {
            for (fi, field) in sig.fields.iter().enumerate() {
                let owners = u.extents[si].clone();
                let mut range = upper_bound_atoms(model, &u, field.range);
                if let Some(b) = other {
                    let extra = upper_bound_atoms(b, &u, b.sigs[si].fields[fi].range);
                    range.extend(extra);
                    range.sort_unstable();
                    range.dedup();
                }
                let mut vars = Vec::new();
                for &o in &owners {
                    for &r in &range {
                        let var = u.origins.len() as u32;
                        let tuple = alloc::vec![o, r];
                        u.origins.push(VarOrigin::FieldTuple {
                            sig: si,
                            field: fi,
                            tuple: tuple.clone(),
                        });
                        vars.push((tuple, var));
                    }
                }
                u.field_vars.insert((si, fi), vars);
            }
        }
        Ok(u)
    }

    pub fn relation_var_count(&self) -> usize {
        self.origins.len()
    }

    pub fn atom_name(&self, model: &Model, atom: AtomId) -> String {
        let info = &self.atoms[atom as usize];
        format!("{}${}", model.sigs[info.sig].name, info.index)
    }

    pub fn univ_atoms(&self) -> Vec<AtomId> {
        (0..self.atoms.len() as u16).collect()
    }
}

/// Own-pool sizes per signature under a scope.
pub fn pool_sizes(model: &Model, scope: &Scope) -> Result<Vec<u32>> {
    let mut sizes = Vec::with_capacity(model.sigs.len());
    for sig in &model.sigs {
        let declared = scope
            .overrides
            .get(&sig.name)
            .map(|&(n, _)| n)
            .unwrap_or(scope.default_atoms);
        let size = match sig.mult {
            SigMult::One => {
                if declared == 0 {
                    return Err(Error::Scope {
                        message: format!("signature `{}` is exactly one but scope is 0", sig.name),
                    });
                }
                1
            }
            SigMult::Lone => declared.min(1),
            // Abstract signatures own no atoms; subsignatures provide them.
            SigMult::Abstract => 0,
            SigMult::Default => declared,
        };
        sizes.push(size);
    }
    Ok(sizes)
}

/// Merge the pools of two structurally related models (a model and its
/// mutant): per signature, the larger of the two pools.
pub fn merged_pool_sizes(a: &Model, b: &Model, scope: &Scope) -> Result<Vec<u32>> {
    let sa = pool_sizes(a, scope)?;
    let sb = pool_sizes(b, scope)?;
    Ok(sa.iter().zip(&sb).map(|(&x, &y)| x.max(y)).collect())
}

fn extent_of(model: &Model, pools: &[Vec<AtomId>], si: usize) -> Vec<AtomId> {
    let mut out = pools[si].clone();
    for &c in &model.sigs[si].subsigs {
        out.extend(extent_of(model, pools, c));
    }
    out.sort_unstable();
    out
}

/// Syntactic upper bound of a range expression, as a sorted atom list.
pub fn upper_bound_atoms(model: &Model, u: &Universe, expr: NodeId) -> Vec<AtomId> {
    use crate::ast::{BinOp, Binding, Op};
    match model.op(expr) {
        Op::Ident { .. } => match model.bindings.get(&expr) {
            Some(Binding::Sig { sig }) => u.extents[*sig].clone(),
            _ => u.univ_atoms(),
        },
        Op::Bin { op: BinOp::Union } => {
            let c = model.children(expr);
            let mut out = upper_bound_atoms(model, u, c[0]);
            out.extend(upper_bound_atoms(model, u, c[1]));
            out.sort_unstable();
            out.dedup();
            out
        }
        Op::Bin { op: BinOp::Diff } => upper_bound_atoms(model, u, model.children(expr)[0]),
        Op::Bin { op: BinOp::Inter } => {
            let c = model.children(expr);
            let a = upper_bound_atoms(model, u, c[0]);
            let b = upper_bound_atoms(model, u, c[1]);
            a.into_iter().filter(|x| b.contains(x)).collect()
        }
        Op::Const { k: crate::ast::ConstKind::None } => Vec::new(),
        _ => u.univ_atoms(),
    }
}
