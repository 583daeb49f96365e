//! Derivations on jet coordinates and the augmented generator
//! `D = Δ + ∂/∂s` whose powers produce Taylor coefficients.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cell::RefCell;

use crate::expr::{simplify, Atom, Expr, ExprError, FuncAtom, Rational, Symbol, SPACE_VAR};
use crate::problem::{Problem, ProblemError, ProblemKind};

/// How jet coordinates are represented.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JetKind {
    /// Each coordinate is a plain symbol `c`.
    Point,
    /// Each coordinate is a function of `x` with its derivative tower
    /// `c, c', c'', ...`.
    Functional,
}

/// `Σ F_i ∂/∂c_i`, prolonged to `Σ_j D_x^j(F_i) ∂/∂c_i^(j)` for
/// functional coordinates.
#[derive(Debug)]
pub struct Derivation {
    kind: JetKind,
    targets: Vec<Symbol>,
    // towers[i][j] = D_x^j F_i, grown on demand
    towers: RefCell<Vec<Vec<Expr>>>,
}

impl Clone for Derivation {
    fn clone(&self) -> Self {
        Derivation {
            kind: self.kind,
            targets: self.targets.clone(),
            towers: RefCell::new(self.towers.borrow().clone()),
        }
    }
}

impl Derivation {
    pub fn new(kind: JetKind, fields: Vec<(Symbol, Expr)>) -> Derivation {
        let (targets, coefs): (Vec<_>, Vec<_>) = fields.into_iter().unzip();
        Derivation {
            kind,
            targets,
            towers: RefCell::new(coefs.into_iter().map(|c| alloc::vec![c]).collect()),
        }
    }

    pub fn kind(&self) -> JetKind {
        self.kind
    }

    pub fn targets(&self) -> &[Symbol] {
        &self.targets
    }

    /// Coefficient of `∂/∂c_i^(j)`.
    pub fn coefficient(&self, i: usize, j: u32) -> Expr {
        let mut towers = self.towers.borrow_mut();
        let tower = &mut towers[i];
        while tower.len() <= j as usize {
            let next = tower
                .last()
                .unwrap()
                .total_diff_x_in(None)
                .expect("space derivative without a time symbol cannot fail");
            tower.push(next);
        }
        tower[j as usize].clone()
    }

    fn image(&self, a: &Atom) -> Option<Expr> {
        let (name, order) = match (self.kind, a) {
            (JetKind::Point, Atom::Sym(s)) => (s, 0),
            (JetKind::Functional, Atom::Func(f)) if f.time.is_none() => (&f.name, f.order),
            _ => return None,
        };
        let i = self.targets.iter().position(|t| t == name)?;
        Some(self.coefficient(i, order))
    }

    pub fn apply(&self, e: &Expr) -> Expr {
        e.derive_with(&mut |a: &Atom| Ok(self.image(a)))
            .expect("derivation images never fail")
    }
}

/// `Δ + ∂/∂s` (or bare `Δ` when `shift` is off), together with the data
/// needed to restrict to `s = a`.
#[derive(Clone, Debug)]
pub struct Generator {
    derivation: Derivation,
    s: Symbol,
    shift: bool,
    point: Rational,
    // jet coordinate and the initial datum it stands for, when they differ
    aliases: Vec<(Symbol, Expr)>,
    unknowns: Vec<Symbol>,
}

impl Generator {
    /// A generator with no restriction data; `restrict` only sets `s := 0`.
    pub fn new(derivation: Derivation, s: Symbol, shift: bool) -> Generator {
        let unknowns = derivation.targets.clone();
        Generator {
            derivation,
            s,
            shift,
            point: Rational::from_integer(0.into()),
            aliases: Vec::new(),
            unknowns,
        }
    }

    pub fn derivation(&self) -> &Derivation {
        &self.derivation
    }

    pub fn s(&self) -> &Symbol {
        &self.s
    }

    pub fn includes_shift(&self) -> bool {
        self.shift
    }

    pub fn unknowns(&self) -> &[Symbol] {
        &self.unknowns
    }

    /// Jet coordinate standing for the `i`-th unknown at `s = a`.
    pub fn jet(&self, i: usize) -> Expr {
        let c = &self.derivation.targets[i];
        match self.derivation.kind {
            JetKind::Point => Expr::sym(c),
            JetKind::Functional => Expr::func_atom(FuncAtom {
                name: c.clone(),
                order: 0,
                time: None,
            }),
        }
    }

    pub fn apply(&self, e: &Expr) -> Expr {
        let s = &self.s;
        e.derive_with(&mut |a: &Atom| {
            if self.shift && matches!(a, Atom::Sym(x) if x == s) {
                return Ok(Some(Expr::one()));
            }
            Ok(self.derivation.image(a))
        })
        .expect("derivation images never fail")
    }

    /// Evaluates at `s = a` and replaces placeholder jets by the initial data.
    pub fn restrict(&self, e: &Expr) -> Result<Expr, ExprError> {
        let mut out = e.substitute_symbol(&self.s, &Expr::rational(self.point.clone()))?;
        if !self.aliases.is_empty() {
            let kind = self.derivation.kind;
            let mut towers: BTreeMap<Symbol, Vec<Expr>> = BTreeMap::new();
            out = out.map_atoms(&mut |a: &Atom| {
                let (name, order) = match (kind, a) {
                    (JetKind::Point, Atom::Sym(s)) => (s, 0),
                    (JetKind::Functional, Atom::Func(f)) if f.time.is_none() => (&f.name, f.order),
                    _ => return Ok(None),
                };
                let Some((_, init)) = self.aliases.iter().find(|(c, _)| c == name) else {
                    return Ok(None);
                };
                let tower = towers
                    .entry(name.clone())
                    .or_insert_with(|| alloc::vec![init.clone()]);
                while tower.len() <= order as usize {
                    let next = tower.last().unwrap().total_diff_x_in(None)?;
                    tower.push(next);
                }
                Ok(Some(tower[order as usize].clone()))
            })?;
        }
        Ok(simplify(&out))
    }
}

/// `Σ F_i(s, c) ∂/∂c_i + ∂/∂s` for a first-order ODE system.
pub fn ode_generator(p: &Problem) -> Result<Generator, ProblemError> {
    if p.kind() != ProblemKind::Ode {
        return Err(ProblemError::WrongKind("ODE"));
    }
    build(p, JetKind::Point)
}

/// The prolonged generator for a first-order (1+1)-dimensional PDE system.
pub fn pde_generator(p: &Problem) -> Result<Generator, ProblemError> {
    if p.kind() != ProblemKind::Pde {
        return Err(ProblemError::WrongKind("PDE"));
    }
    build(p, JetKind::Functional)
}

/// Dispatches on the problem kind.
pub fn generator_for(p: &Problem) -> Result<Generator, ProblemError> {
    match p.kind() {
        ProblemKind::Ode => ode_generator(p),
        ProblemKind::Pde => pde_generator(p),
    }
}

fn collect_names(e: &Expr, out: &mut BTreeSet<String>) {
    for a in e.named_atoms() {
        match a {
            Atom::Sym(s) => out.insert(s.as_str().into()),
            Atom::Func(f) => out.insert(f.name.as_str().into()),
            _ => false,
        };
    }
}

fn fresh(base: &str, taken: &mut BTreeSet<String>) -> Symbol {
    let mut name = String::from(base);
    while taken.contains(&name) {
        name.push('_');
    }
    taken.insert(name.clone());
    Symbol::new(&name)
}

fn build(p: &Problem, kind: JetKind) -> Result<Generator, ProblemError> {
    if !p.is_first_order() {
        return Err(ProblemError::NotFirstOrder);
    }
    let eqs = p.equations();
    let mut taken: BTreeSet<String> = BTreeSet::new();
    taken.insert(SPACE_VAR.into());
    taken.insert(p.time().as_str().into());
    for q in p.params() {
        taken.insert(q.as_str().into());
    }
    let mut rhs_names = BTreeSet::new();
    for eq in eqs {
        taken.insert(eq.unknown.as_str().into());
        collect_names(&eq.rhs, &mut rhs_names);
    }
    taken.extend(rhs_names.iter().cloned());
    let mut init_names = BTreeSet::new();
    for eq in eqs {
        collect_names(&eq.initial[0], &mut init_names);
    }

    // Reuse an initial datum as its own jet coordinate when it is a bare,
    // otherwise unused name.
    let bare = |e: &Expr| -> Option<Symbol> {
        match kind {
            JetKind::Point => e.as_symbol().cloned(),
            JetKind::Functional => e
                .as_func()
                .filter(|f| f.order == 0 && f.time.is_none())
                .map(|f| f.name.clone()),
        }
    };
    let mut seen: BTreeMap<Symbol, usize> = BTreeMap::new();
    for eq in eqs {
        if let Some(c) = bare(&eq.initial[0]) {
            *seen.entry(c).or_insert(0) += 1;
        }
    }
    let mut jets = Vec::with_capacity(eqs.len());
    let mut aliases = Vec::new();
    let mut reserved = taken.clone();
    reserved.extend(init_names.iter().cloned());
    for eq in eqs {
        match bare(&eq.initial[0]) {
            Some(c) if seen[&c] == 1 && !taken.contains(c.as_str()) => jets.push(c),
            _ => {
                let c = fresh(&format!("c_{}", eq.unknown), &mut reserved);
                aliases.push((c.clone(), eq.initial[0].clone()));
                jets.push(c);
            }
        }
    }
    let s = fresh("s", &mut reserved);

    let fields = eqs
        .iter()
        .map(|eq| {
            let f = eq
                .rhs
                .substitute_symbol(p.time(), &Expr::sym(&s))?
                .map_atoms(&mut |a: &Atom| {
                    let Atom::Func(f) = a else { return Ok(None) };
                    let Some(i) = eqs.iter().position(|e| e.unknown == f.name) else {
                        return Ok(None);
                    };
                    Ok(Some(match kind {
                        JetKind::Point => Expr::sym(&jets[i]),
                        JetKind::Functional => Expr::func_atom(FuncAtom {
                            name: jets[i].clone(),
                            order: f.order,
                            time: None,
                        }),
                    }))
                })?;
            Ok((
                jets[eqs.iter().position(|e| e.unknown == eq.unknown).unwrap()].clone(),
                f,
            ))
        })
        .collect::<Result<Vec<_>, ExprError>>()?;
    Ok(Generator {
        derivation: Derivation::new(kind, fields),
        s,
        shift: true,
        point: p.point().clone(),
        aliases,
        unknowns: p.unknowns().cloned().collect(),
    })
}

#[cfg(test)]
mod tests;
