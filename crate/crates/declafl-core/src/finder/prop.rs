//! Propositional formulas with structural sharing, and CNF conversion.
//!
//! Each top-level ground conjunct is converted to clauses via a
//! definitional (Tseitin) encoding. Definition clauses carry a sentinel
//! tag so core extraction can drop a conjunct by dropping only its
//! assertion unit; definitions alone are always satisfiable.

use alloc::collections::BTreeMap;
use alloc::rc::Rc;
use alloc::vec::Vec;

/// A literal: variable index with sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Lit(pub i32);

impl Lit {
    pub fn pos(var: u32) -> Lit {
        Lit(var as i32 + 1)
    }

    pub fn neg(var: u32) -> Lit {
        Lit(-(var as i32 + 1))
    }

    pub fn var(self) -> u32 {
        (self.0.unsigned_abs()) - 1
    }

    pub fn is_pos(self) -> bool {
        self.0 > 0
    }

    pub fn negate(self) -> Lit {
        Lit(-self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Prop {
    True,
    False,
    Lit(Lit),
    And(Vec<Rc<Prop>>),
    Or(Vec<Rc<Prop>>),
}

pub type P = Rc<Prop>;

pub fn ptrue() -> P {
    Rc::new(Prop::True)
}

pub fn pfalse() -> P {
    Rc::new(Prop::False)
}

pub fn plit(lit: Lit) -> P {
    Rc::new(Prop::Lit(lit))
}

pub fn pvar(var: u32) -> P {
    plit(Lit::pos(var))
}

pub fn pand(parts: Vec<P>) -> P {
    let mut flat = Vec::new();
    for p in parts {
        match &*p {
            Prop::True => {}
            Prop::False => return pfalse(),
            Prop::And(items) => flat.extend(items.iter().cloned()),
            _ => flat.push(p),
        }
    }
    match flat.len() {
        0 => ptrue(),
        1 => flat.pop().unwrap(),
        _ => Rc::new(Prop::And(flat)),
    }
}

pub fn por(parts: Vec<P>) -> P {
    let mut flat = Vec::new();
    for p in parts {
        match &*p {
            Prop::False => {}
            Prop::True => return ptrue(),
            Prop::Or(items) => flat.extend(items.iter().cloned()),
            _ => flat.push(p),
        }
    }
    match flat.len() {
        0 => pfalse(),
        1 => flat.pop().unwrap(),
        _ => Rc::new(Prop::Or(flat)),
    }
}

/// Negation with de Morgan push-down.
pub fn pnot(p: &P) -> P {
    match &**p {
        Prop::True => pfalse(),
        Prop::False => ptrue(),
        Prop::Lit(l) => plit(l.negate()),
        Prop::And(items) => por(items.iter().map(pnot).collect()),
        Prop::Or(items) => pand(items.iter().map(pnot).collect()),
    }
}

pub fn pimplies(a: &P, b: &P) -> P {
    por(alloc::vec![pnot(a), b.clone()])
}

pub fn piff(a: &P, b: &P) -> P {
    pand(alloc::vec![pimplies(a, b), pimplies(b, a)])
}

pub fn pxor(a: &P, b: &P) -> P {
    por(alloc::vec![
        pand(alloc::vec![a.clone(), pnot(b)]),
        pand(alloc::vec![pnot(a), b.clone()]),
    ])
}

/// At most one of the literals is true (pairwise encoding; pools are tiny).
pub fn at_most_one(lits: &[Lit]) -> P {
    let mut parts = Vec::new();
    for i in 0..lits.len() {
        for j in (i + 1)..lits.len() {
            parts.push(por(alloc::vec![plit(lits[i].negate()), plit(lits[j].negate())]));
        }
    }
    pand(parts)
}

pub fn at_least_one(lits: &[Lit]) -> P {
    por(lits.iter().map(|&l| plit(l)).collect())
}

/// Tag for clauses that define auxiliary variables; never removed during
/// core minimization.
pub const DEF_TAG: u32 = u32::MAX;

/// Clause set under construction.
pub struct CnfBuilder {
    pub num_vars: usize,
    pub clauses: Vec<(Vec<Lit>, u32)>,
    cache: BTreeMap<usize, Lit>,
    aux_budget: usize,
    exceeded: bool,
}

impl CnfBuilder {
    pub fn new(num_vars: usize, aux_budget: usize) -> Self {
        CnfBuilder {
            num_vars,
            clauses: Vec::new(),
            cache: BTreeMap::new(),
            aux_budget,
            exceeded: false,
        }
    }

    pub fn exceeded(&self) -> bool {
        self.exceeded
    }

    fn fresh(&mut self) -> u32 {
        let v = self.num_vars as u32;
        self.num_vars += 1;
        if self.num_vars > self.aux_budget {
            self.exceeded = true;
        }
        v
    }

    /// Assert one conjunct under tag `tag`. Shallow shapes emit clauses
    /// directly; deeper structure goes through definitional variables.
    pub fn assert_conjunct(&mut self, p: &P, tag: u32) {
        match &**p {
            Prop::True => {}
            Prop::False => self.clauses.push((Vec::new(), tag)),
            Prop::Lit(l) => self.clauses.push((alloc::vec![*l], tag)),
            Prop::And(items) => {
                for item in items.clone() {
                    self.assert_conjunct(&item, tag);
                }
            }
            Prop::Or(items) => {
                let mut clause = Vec::new();
                for item in items {
                    match self.flatten_or_operand(item) {
                        Some(l) => clause.push(l),
                        None => {
                            let l = self.define(item);
                            clause.push(l);
                        }
                    }
                }
                self.clauses.push((clause, tag));
            }
        }
    }

    fn flatten_or_operand(&mut self, p: &P) -> Option<Lit> {
        match &**p {
            Prop::Lit(l) => Some(*l),
            _ => None,
        }
    }

    /// Literal equivalent to `p`, defined by DEF-tagged clauses.
    fn define(&mut self, p: &P) -> Lit {
        let key = Rc::as_ptr(p) as usize;
        if let Some(&l) = self.cache.get(&key) {
            return l;
        }
        let lit = match &**p {
            Prop::True => {
                let v = self.fresh();
                self.clauses.push((alloc::vec![Lit::pos(v)], DEF_TAG));
                Lit::pos(v)
            }
            Prop::False => {
                let v = self.fresh();
                self.clauses.push((alloc::vec![Lit::neg(v)], DEF_TAG));
                Lit::pos(v)
            }
            Prop::Lit(l) => *l,
            Prop::And(items) => {
                let parts: Vec<Lit> = items.clone().iter().map(|i| self.define(i)).collect();
                let v = Lit::pos(self.fresh());
                // v <-> and(parts)
                for &part in &parts {
                    self.clauses.push((alloc::vec![v.negate(), part], DEF_TAG));
                }
                let mut clause: Vec<Lit> = parts.iter().map(|l| l.negate()).collect();
                clause.push(v);
                self.clauses.push((clause, DEF_TAG));
                v
            }
            Prop::Or(items) => {
                let parts: Vec<Lit> = items.clone().iter().map(|i| self.define(i)).collect();
                let v = Lit::pos(self.fresh());
                // v <-> or(parts)
                for &part in &parts {
                    self.clauses.push((alloc::vec![v, part.negate()], DEF_TAG));
                }
                let mut clause: Vec<Lit> = parts.clone();
                clause.push(v.negate());
                self.clauses.push((clause, DEF_TAG));
                v
            }
        };
        self.cache.insert(key, lit);
        lit
    }
}
