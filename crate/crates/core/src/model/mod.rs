//! Solver-agnostic mixed-integer linear models.
//!
//! A [`MilpModel`] is a flat list of bounded variables, linear rows and a
//! minimisation objective. Builders in [`build`] emit the sub-problems used by
//! the alternating optimiser and keep a [`Layout`] so a solver assignment can
//! be decoded back into a [`Schedule`](crate::schedule::Schedule), and a
//! schedule can be encoded into a full warm-start assignment.

mod build;
mod mps;

pub use build::{build_fixed_all, build_fixed_x, build_fixed_yz, build_monolithic};
pub use mps::write_mps;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a variable inside its model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * values[v.0]).sum()
    }

    /// Amount by which `values` violates the row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            RowSense::Le => (lhs - self.rhs).max(0.0),
            RowSense::Ge => (self.rhs - lhs).max(0.0),
            RowSense::Eq => (lhs - self.rhs).abs(),
        }
    }

    fn scale(&self, values: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|&(v, a)| (a * values[v.0]).abs())
            .fold(self.rhs.abs().max(1.0), f64::max)
    }
}

/// Which builder produced a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuilderKind {
    /// Job assignment free, precedence and data placement fixed.
    FixedYz,
    /// Precedence and data placement free, job assignment fixed.
    FixedX,
    /// Every integer decision fixed: a pure LP.
    FixedAll,
    /// All decisions free, products linearised.
    Monolithic,
}

impl std::fmt::Display for BuilderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BuilderKind::FixedYz => "fixed-yz",
            BuilderKind::FixedX => "fixed-x",
            BuilderKind::FixedAll => "fixed-all",
            BuilderKind::Monolithic => "monolithic",
        })
    }
}

/// Where each block of decision variables lives, or the constant it is fixed to.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub x: Block<Vec<Vec<VarId>>, Vec<usize>>,
    /// `y[i][j]`, `None` on the diagonal.
    pub y: Block<Vec<Vec<Option<VarId>>>, Vec<usize>>,
    pub z: Block<Vec<Vec<VarId>>, Vec<usize>>,
    pub makespan: VarId,
    pub job_start: Vec<VarId>,
    pub exec_start: Vec<VarId>,
    pub exec_length: Option<Vec<VarId>>,
    pub remote_delay: Option<Vec<VarId>>,
    /// `(w, a, b)` with `w = a * b` over binaries.
    pub products: Vec<(VarId, VarId, VarId)>,
}

/// A decision block is either free (variables) or a constant.
#[derive(Debug, Clone, PartialEq)]
pub enum Block<V, C> {
    Free(V),
    Fixed(C),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpModel {
    pub(crate) variables: Vec<Variable>,
    pub(crate) constraints: Vec<Constraint>,
    pub(crate) objective: Vec<(VarId, f64)>,
    pub(crate) warm_start: Option<Vec<f64>>,
    pub(crate) big_a: f64,
    pub(crate) kind: BuilderKind,
    pub(crate) layout: Layout,
}

/// Absolute-or-relative tolerance used by substitution checks.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-6;

impl MilpModel {
    pub(crate) fn empty(kind: BuilderKind, big_a: f64) -> Self {
        MilpModel {
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            warm_start: None,
            big_a,
            kind,
            layout: Layout {
                x: Block::Fixed(Vec::new()),
                y: Block::Fixed(Vec::new()),
                z: Block::Fixed(Vec::new()),
                makespan: VarId(0),
                job_start: Vec::new(),
                exec_start: Vec::new(),
                exec_length: None,
                remote_delay: None,
                products: Vec::new(),
            },
        }
    }

    pub fn add_variable(&mut self, name: impl Into<String>, lower: f64, upper: f64, integer: bool) -> VarId {
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
            integer,
        });
        VarId(self.variables.len() - 1)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> VarId {
        self.add_variable(name, 0.0, 1.0, true)
    }

    pub fn add_continuous(&mut self, name: impl Into<String>) -> VarId {
        self.add_variable(name, 0.0, f64::INFINITY, false)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        sense: RowSense,
        rhs: f64,
    ) {
        self.constraints.push(Constraint {
            name: name.into(),
            terms,
            sense,
            rhs,
        });
    }

    pub fn set_objective(&mut self, terms: Vec<(VarId, f64)>) {
        self.objective = terms;
    }

    /// Pins a variable by tightening both bounds to `value`.
    pub fn fix_variable(&mut self, var: VarId, value: f64) {
        let v = &mut self.variables[var.0];
        v.lower = value;
        v.upper = value;
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[(VarId, f64)] {
        &self.objective
    }

    pub fn warm_start(&self) -> Option<&[f64]> {
        self.warm_start.as_deref()
    }

    pub fn big_a(&self) -> f64 {
        self.big_a
    }

    pub fn kind(&self) -> BuilderKind {
        self.kind
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn num_integer(&self) -> usize {
        self.variables.iter().filter(|v| v.integer).count()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * values[v.0]).sum()
    }

    /// Structural well-formedness: every term references a declared variable
    /// and all numbers are finite where they must be.
    pub fn validate(&self) -> Result<()> {
        let n = self.variables.len();
        for v in &self.variables {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(Error::Validation(format!("variable {} has bad bounds", v.name)));
            }
        }
        let check = |terms: &[(VarId, f64)], what: &str| -> Result<()> {
            for &(var, coef) in terms {
                if var.0 >= n {
                    return Err(Error::Validation(format!("{what} references undeclared variable {}", var.0)));
                }
                if !coef.is_finite() {
                    return Err(Error::Validation(format!("{what} has non-finite coefficient")));
                }
            }
            Ok(())
        };
        for row in &self.constraints {
            check(&row.terms, &row.name)?;
            if !row.rhs.is_finite() {
                return Err(Error::Validation(format!("{} has non-finite rhs", row.name)));
            }
        }
        check(&self.objective, "objective")?;
        if let Some(ws) = &self.warm_start {
            if ws.len() != n {
                return Err(Error::Validation("warm start length mismatch".into()));
            }
        }
        Ok(())
    }

    /// Substitution check of a full assignment against bounds, integrality and
    /// every row, at the given relative tolerance.
    pub fn check_assignment(&self, values: &[f64], tolerance: f64) -> Result<()> {
        if values.len() != self.variables.len() {
            return Err(Error::Validation(format!(
                "assignment has {} values, model has {} variables",
                values.len(),
                self.variables.len()
            )));
        }
        for (var, &x) in self.variables.iter().zip(values) {
            if !x.is_finite() {
                return Err(Error::Validation(format!("{} = {x}", var.name)));
            }
            let slack = tolerance * x.abs().max(1.0);
            if x < var.lower - slack || x > var.upper + slack {
                return Err(Error::Validation(format!(
                    "{} = {x} outside [{}, {}]",
                    var.name, var.lower, var.upper
                )));
            }
            if var.integer && (x - x.round()).abs() > tolerance {
                return Err(Error::Validation(format!("{} = {x} is not integral", var.name)));
            }
        }
        for row in &self.constraints {
            let violation = row.violation(values);
            if violation > tolerance * row.scale(values) {
                return Err(Error::Validation(format!(
                    "row {} violated by {violation:.3e}",
                    row.name
                )));
            }
        }
        Ok(())
    }

    /// Installs `values` as the warm start if it passes the substitution
    /// check; otherwise logs a warning and leaves the model without one.
    pub fn set_warm_start(&mut self, values: Vec<f64>) -> bool {
        match self.check_assignment(&values, FEASIBILITY_TOLERANCE) {
            Ok(()) => {
                self.warm_start = Some(values);
                true
            }
            Err(err) => {
                log::warn!("dropping infeasible warm start for {} model: {err}", self.kind);
                self.warm_start = None;
                false
            }
        }
    }

    pub fn clear_warm_start(&mut self) {
        self.warm_start = None;
    }
}
