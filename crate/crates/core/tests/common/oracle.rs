//! A definition-driven reference for rule application, independent of the
//! engine: its own model representation, expression trees and evaluator.
//!
//! The value of a cell after the first `t` rules is the value the `t`-th
//! rule computes for it (reading every operand after the first `t - 1`
//! rules) when that rule is enabled and covers the cell, else its value
//! after `t - 1` rules; after zero rules it is the loaded data or 0.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Val {
    Num(f64),
    Div0,
}

impl Val {
    fn num(x: f64) -> Val {
        if x.is_finite() {
            Val::Num(x)
        } else {
            Val::Div0
        }
    }
}

#[derive(Debug, Clone)]
pub enum Expr {
    Lit(f64),
    Ref { member: usize, overrides: Vec<(usize, usize)> },
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Sum(Vec<Expr>),
    IfError(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone)]
pub struct Rule {
    pub dim: usize,
    pub target: usize,
    pub expr: Expr,
    /// Allowed members per dimension; `None` = all.
    pub filters: Vec<Option<Vec<usize>>>,
    pub enabled: bool,
}

#[derive(Debug, Clone)]
pub struct Model {
    pub sizes: Vec<usize>,
    pub rules: Vec<Rule>,
    pub data: HashMap<Vec<usize>, f64>,
}

pub fn dim_name(d: usize) -> String {
    format!("D{d}")
}

pub fn member_name(d: usize, m: usize) -> String {
    format!("m{d}x{m}")
}

fn render(e: &Expr, dim: usize) -> String {
    match e {
        Expr::Lit(x) => format!("{x}"),
        Expr::Ref { member, overrides } => {
            if overrides.is_empty() {
                format!("{{{}}}", member_name(dim, *member))
            } else {
                let pins: Vec<String> =
                    overrides.iter().map(|&(d, m)| format!("{}={}", dim_name(d), member_name(d, m))).collect();
                format!("{{{} | {}}}", member_name(dim, *member), pins.join(", "))
            }
        }
        Expr::Add(a, b) => format!("({}) + ({})", render(a, dim), render(b, dim)),
        Expr::Sub(a, b) => format!("({}) - ({})", render(a, dim), render(b, dim)),
        Expr::Mul(a, b) => format!("({}) * ({})", render(a, dim), render(b, dim)),
        Expr::Div(a, b) => format!("({}) / ({})", render(a, dim), render(b, dim)),
        Expr::Neg(a) => format!("-({})", render(a, dim)),
        Expr::Sum(args) => format!("SUM({})", args.iter().map(|a| render(a, dim)).collect::<Vec<_>>().join(", ")),
        Expr::IfError(a, b) => format!("IFERROR({}, {})", render(a, dim), render(b, dim)),
    }
}

impl Rule {
    pub fn formula(&self) -> String {
        format!("={}", render(&self.expr, self.dim))
    }

    fn covers(&self, cell: &[usize]) -> bool {
        cell[self.dim] == self.target
            && self.filters.iter().zip(cell).all(|(f, m)| f.as_ref().map_or(true, |allowed| allowed.contains(m)))
    }
}

impl Model {
    pub fn total(&self) -> usize {
        self.sizes.iter().product()
    }

    /// All cells, first dimension outermost.
    pub fn cells(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for &n in &self.sizes {
            out = out.into_iter().flat_map(|p| (0..n).map(move |m| [p.clone(), vec![m]].concat())).collect();
        }
        out
    }

    pub fn is_leaf(&self, d: usize, m: usize) -> bool {
        !self.rules.iter().any(|r| r.enabled && r.dim == d && r.target == m)
    }

    /// Sequence (1-based) of the last enabled rule covering the cell.
    pub fn winner(&self, cell: &[usize]) -> Option<usize> {
        self.rules.iter().enumerate().rev().find(|(_, r)| r.enabled && r.covers(cell)).map(|(i, _)| i + 1)
    }
}

pub struct Oracle<'a> {
    model: &'a Model,
    memo: HashMap<(Vec<usize>, usize), Val>,
}

impl<'a> Oracle<'a> {
    pub fn new(model: &'a Model) -> Self {
        Oracle { model, memo: HashMap::new() }
    }

    /// Final value of a cell.
    pub fn value(&mut self, cell: &[usize]) -> Val {
        self.value_after(cell, self.model.rules.len())
    }

    fn value_after(&mut self, cell: &[usize], t: usize) -> Val {
        if t == 0 {
            return Val::Num(self.model.data.get(cell).copied().unwrap_or(0.0));
        }
        if let Some(&v) = self.memo.get(&(cell.to_vec(), t)) {
            return v;
        }
        let rule = &self.model.rules[t - 1];
        let v = if rule.enabled && rule.covers(cell) {
            let rule = rule.clone();
            self.eval(&rule.expr, rule.dim, cell, t - 1)
        } else {
            self.value_after(cell, t - 1)
        };
        self.memo.insert((cell.to_vec(), t), v);
        v
    }

    fn eval(&mut self, e: &Expr, dim: usize, cell: &[usize], t: usize) -> Val {
        let binary = |this: &mut Self, a: &Expr, b: &Expr, f: fn(f64, f64) -> Val| {
            let x = this.eval(a, dim, cell, t);
            let y = this.eval(b, dim, cell, t);
            match (x, y) {
                (Val::Num(x), Val::Num(y)) => f(x, y),
                (Val::Div0, _) | (_, Val::Div0) => Val::Div0,
            }
        };
        match e {
            Expr::Lit(x) => Val::num(*x),
            Expr::Ref { member, overrides } => {
                let mut operand = cell.to_vec();
                operand[dim] = *member;
                for &(d, m) in overrides {
                    operand[d] = m;
                }
                self.value_after(&operand, t)
            }
            Expr::Add(a, b) => binary(self, a, b, |x, y| Val::num(x + y)),
            Expr::Sub(a, b) => binary(self, a, b, |x, y| Val::num(x - y)),
            Expr::Mul(a, b) => binary(self, a, b, |x, y| Val::num(x * y)),
            Expr::Div(a, b) => binary(self, a, b, |x, y| if y == 0.0 { Val::Div0 } else { Val::num(x / y) }),
            Expr::Neg(a) => match self.eval(a, dim, cell, t) {
                Val::Num(x) => Val::num(-x),
                err => err,
            },
            Expr::Sum(args) => {
                let mut acc = 0.0;
                for a in args {
                    match self.eval(a, dim, cell, t) {
                        Val::Num(x) => acc += x,
                        err => return err,
                    }
                }
                Val::num(acc)
            }
            Expr::IfError(a, b) => match self.eval(a, dim, cell, t) {
                Val::Div0 => self.eval(b, dim, cell, t),
                v => v,
            },
        }
    }
}

fn random_expr<R: Rng>(rng: &mut R, sizes: &[usize], dim: usize, target: usize, depth: usize) -> Expr {
    let leaf = depth == 0 || rng.gen_bool(0.35);
    if leaf {
        let others: Vec<usize> = (0..sizes[dim]).filter(|&m| m != target).collect();
        if others.is_empty() || rng.gen_bool(0.15) {
            return Expr::Lit(*[0.0, 1.0, 2.0, 0.5, 3.25].choose(rng).unwrap());
        }
        let member = *others.choose(rng).unwrap();
        let mut overrides = Vec::new();
        for (d, &size) in sizes.iter().enumerate() {
            if d != dim && rng.gen_bool(0.15) {
                overrides.push((d, rng.gen_range(0..size)));
            }
        }
        return Expr::Ref { member, overrides };
    }
    let sub = |rng: &mut R| Box::new(random_expr(rng, sizes, dim, target, depth - 1));
    match rng.gen_range(0..7) {
        0 => Expr::Add(sub(rng), sub(rng)),
        1 => Expr::Sub(sub(rng), sub(rng)),
        2 => Expr::Mul(sub(rng), sub(rng)),
        3 => Expr::Div(sub(rng), sub(rng)),
        4 => Expr::Neg(sub(rng)),
        5 => Expr::Sum((0..rng.gen_range(1..=3)).map(|_| *sub(rng)).collect()),
        _ => Expr::IfError(sub(rng), sub(rng)),
    }
}

/// A random model: up to 4 dimensions of up to 6 members, up to 8 rules.
/// References never name the rule's own target, so no rule reads its own
/// scope.
pub fn random_model<R: Rng>(rng: &mut R) -> Model {
    let ndims = rng.gen_range(2..=4);
    let sizes: Vec<usize> = (0..ndims).map(|_| rng.gen_range(1..=6)).collect();
    let nrules = rng.gen_range(0..=8);
    let mut rules = Vec::with_capacity(nrules);
    for _ in 0..nrules {
        let dim = rng.gen_range(0..ndims);
        let target = rng.gen_range(0..sizes[dim]);
        let mut filters = vec![None; ndims];
        if ndims > 1 && rng.gen_bool(0.3) {
            let d = (dim + rng.gen_range(1..ndims)) % ndims;
            let mut allowed: Vec<usize> = (0..sizes[d]).filter(|_| rng.gen_bool(0.5)).collect();
            if allowed.is_empty() {
                allowed.push(0);
            }
            filters[d] = Some(allowed);
        }
        rules.push(Rule {
            dim,
            target,
            expr: random_expr(rng, &sizes, dim, target, 3),
            filters,
            enabled: rng.gen_bool(0.85),
        });
    }
    let mut model = Model { sizes, rules, data: HashMap::new() };
    let cells = model.cells();
    for cell in cells {
        let input = cell.iter().enumerate().all(|(d, &m)| model.is_leaf(d, m));
        if input && rng.gen_bool(0.7) {
            let v = if rng.gen_bool(0.5) { rng.gen_range(-50i32..50) as f64 } else { rng.gen_range(-100.0..100.0) };
            model.data.insert(cell, v);
        }
    }
    model
}

/// Builds the same model in the engine and loads its data.
pub fn to_engine(model: &Model) -> pivotmodel::pivot::PivotModel {
    use pivotmodel::model::{DimensionDef, ModelStructure};
    use pivotmodel::{RuleDef, RuleSet};

    let defs: Vec<DimensionDef> = model
        .sizes
        .iter()
        .enumerate()
        .map(|(d, &n)| DimensionDef::flat(dim_name(d), &(0..n).map(|m| member_name(d, m)).collect::<Vec<_>>()))
        .collect();
    let structure = ModelStructure::build("random", &defs).expect("valid structure");
    let rule_defs: Vec<RuleDef> = model
        .rules
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut def = RuleDef::new(format!("r{}", i + 1), dim_name(r.dim), member_name(r.dim, r.target), r.formula());
            def.enabled = r.enabled;
            for (d, f) in r.filters.iter().enumerate() {
                if let Some(allowed) = f {
                    def.filters.insert(dim_name(d), allowed.iter().map(|&m| member_name(d, m)).collect());
                }
            }
            def
        })
        .collect();
    let rules = RuleSet::build(&structure, &rule_defs).expect("rules bind");
    let mut pivot = pivotmodel::pivot::PivotModel::new(structure, rules);
    let structure = pivot.structure().clone();
    let cube = pivot.cube_mut();
    for (cell, &v) in &model.data {
        let linear = structure.linear_index(&pivotmodel::CellAddress::new(cell.clone())).unwrap();
        cube.set_data(linear, v, "random");
    }
    pivot
}

/// Compares every cell's value (bit for bit) and provenance kind. Returns
/// the first mismatch.
pub fn compare(model: &Model, engine: &pivotmodel::pivot::PivotModel) -> Result<(), String> {
    use pivotmodel::model::CellSource;
    use pivotmodel::CellValue;

    let mut oracle = Oracle::new(model);
    for cell in model.cells() {
        let address = pivotmodel::CellAddress::new(cell.clone());
        let linear = engine.structure().linear_index(&address).unwrap();
        let got = engine.cube().value(linear);
        let want = oracle.value(&cell);
        let same = match (got, want) {
            (CellValue::Number(a), Val::Num(b)) => a.to_bits() == b.to_bits(),
            (CellValue::Error(pivotmodel::ErrorKind::Div0), Val::Div0) => true,
            _ => false,
        };
        let source = engine.cube().source(linear);
        let expected_kind = match model.winner(&cell) {
            Some(seq) => {
                if source != CellSource::Rule(seq as u32) {
                    return Err(format!("cell {cell:?}: provenance {source:?}, expected RULE({seq})"));
                }
                "RULE"
            }
            None if model.data.contains_key(&cell) => "DATA",
            None => "EMPTY",
        };
        if source.kind() != expected_kind {
            return Err(format!("cell {cell:?}: provenance {}, expected {expected_kind}", source.kind()));
        }
        if !same {
            return Err(format!("cell {cell:?}: engine {got}, oracle {want:?}"));
        }
    }
    Ok(())
}
