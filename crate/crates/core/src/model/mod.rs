//! Mixed-integer linear models for the tour problems.
//!
//! `MipModel` is a plain container (variables, rows, objective) plus a role
//! registry tying every variable back to its meaning in the tour, so solver
//! output can be decoded into an `Itinerary`.

mod build;
mod extract;

use std::collections::HashMap;

use crate::domain::PoiId;
use crate::error::{Error, Result};
use crate::graph::GadgetKind;

pub use build::{build, BuildOptions, Tours};
pub use extract::{extract_itinerary, extract_itineraries, validate_assignment, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Binary,
    Integer,
    Continuous,
}

impl VarKind {
    pub fn is_integral(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    /// `(variable index, coefficient)`, sorted by index, no zero entries.
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * values[j]).sum()
    }

    /// Amount by which `values` violates the row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub sense: Sense,
    pub terms: Vec<(usize, f64)>,
}

/// Meaning of a variable in the tour model. `tour` is `Some(k)` for the
/// per-copy variables of multi-tour models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    EdgeUse { from: PoiId, to: PoiId, tour: Option<usize> },
    SelfLoop { base: PoiId, tour: Option<usize> },
    Visit { poi: PoiId, tour: Option<usize> },
    Order { poi: PoiId, tour: Option<usize> },
    StayTime { poi: PoiId, tour: Option<usize> },
    Reward { poi: PoiId },
    BlockTime { poi: PoiId, block: usize },
    BlockReward { poi: PoiId, block: usize },
    BlockActive { poi: PoiId, block: usize },
    Gadget { base: PoiId, kind: GadgetKind },
    TourStart { base: PoiId, tour: Option<usize> },
    TourEnd { base: PoiId, tour: Option<usize> },
    /// Variables of models not built from an instance (e.g. re-imported files).
    Generic,
}

/// Kind of row emitted by the builder; used to drop row families in
/// negative-control experiments and to label export output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowFamily {
    Flow,
    SubTour,
    Curve,
    Gadget,
    Budget,
    Tours,
    Generic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MipModel {
    pub name: String,
    variables: Vec<Variable>,
    roles: Vec<Role>,
    constraints: Vec<Constraint>,
    families: Vec<RowFamily>,
    objective: Objective,
    index: HashMap<String, usize>,
    row_index: HashMap<String, usize>,
}

impl MipModel {
    pub fn new(name: impl Into<String>, sense: Sense) -> Self {
        Self {
            name: name.into(),
            variables: Vec::new(),
            roles: Vec::new(),
            constraints: Vec::new(),
            families: Vec::new(),
            objective: Objective { sense, terms: Vec::new() },
            index: HashMap::new(),
            row_index: HashMap::new(),
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lower: f64, upper: f64, role: Role) -> Result<usize> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(Error::NameCollision(name));
        }
        let (lower, upper) = if kind == VarKind::Binary { (lower.max(0.0), upper.min(1.0)) } else { (lower, upper) };
        let id = self.variables.len();
        self.index.insert(name.clone(), id);
        self.variables.push(Variable { name, kind, lower, upper });
        self.roles.push(role);
        Ok(id)
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (usize, f64)>,
        relation: Relation,
        rhs: f64,
        family: RowFamily,
    ) -> Result<usize> {
        let name = name.into();
        if self.row_index.contains_key(&name) {
            return Err(Error::NameCollision(name));
        }
        let terms = merge_terms(terms, self.variables.len())?;
        let id = self.constraints.len();
        self.row_index.insert(name.clone(), id);
        self.constraints.push(Constraint { name, terms, relation, rhs });
        self.families.push(family);
        Ok(id)
    }

    pub fn set_objective(&mut self, sense: Sense, terms: impl IntoIterator<Item = (usize, f64)>) -> Result<()> {
        self.objective = Objective { sense, terms: merge_terms(terms, self.variables.len())? };
        Ok(())
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn role(&self, var: usize) -> Role {
        self.roles[var]
    }

    pub fn family(&self, row: usize) -> RowFamily {
        self.families[row]
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn find_role(&self, role: Role) -> Option<usize> {
        self.roles.iter().position(|&r| r == role)
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_rows(&self) -> usize {
        self.constraints.len()
    }

    pub fn count_kind(&self, kind: VarKind) -> usize {
        self.variables.iter().filter(|v| v.kind == kind).count()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.terms.iter().map(|&(j, c)| c * values[j]).sum()
    }

    /// Copy without the rows of `family`.
    pub fn without_family(&self, family: RowFamily) -> MipModel {
        let mut out = MipModel::new(self.name.clone(), self.objective.sense);
        out.variables = self.variables.clone();
        out.roles = self.roles.clone();
        out.index = self.index.clone();
        out.objective = self.objective.clone();
        for (row, &fam) in self.constraints.iter().zip(&self.families) {
            if fam != family {
                out.row_index.insert(row.name.clone(), out.constraints.len());
                out.constraints.push(row.clone());
                out.families.push(fam);
            }
        }
        out
    }

    /// Copy with the bounds of `var` replaced.
    pub fn with_bounds(&self, var: usize, lower: f64, upper: f64) -> MipModel {
        let mut out = self.clone();
        out.variables[var].lower = lower;
        out.variables[var].upper = upper;
        out
    }

    /// Largest row violation, bound violation, or integrality gap of `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let rows = self.constraints.iter().map(|c| c.violation(values)).fold(0.0, f64::max);
        let bounds = self
            .variables
            .iter()
            .zip(values)
            .map(|(v, &x)| {
                let b = (v.lower - x).max(x - v.upper).max(0.0);
                let frac = if v.kind.is_integral() { (x - x.round()).abs() } else { 0.0 };
                b.max(frac)
            })
            .fold(0.0, f64::max);
        rows.max(bounds)
    }
}

fn merge_terms(terms: impl IntoIterator<Item = (usize, f64)>, nvars: usize) -> Result<Vec<(usize, f64)>> {
    let mut v: Vec<(usize, f64)> = terms.into_iter().collect();
    if let Some(&(j, _)) = v.iter().find(|&&(j, _)| j >= nvars) {
        return Err(Error::InvalidInstance(format!("row references undeclared variable {j}")));
    }
    v.sort_by_key(|t| t.0);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(v.len());
    for (j, a) in v {
        match out.last_mut() {
            Some(last) if last.0 == j => last.1 += a,
            _ => out.push((j, a)),
        }
    }
    out.retain(|t| t.1 != 0.0);
    Ok(out)
}
