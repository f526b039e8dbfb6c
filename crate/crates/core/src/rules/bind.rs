use super::ast::{BinaryOp, Expression, Function, MemberRef};
use super::BindError;
use crate::model::{CellAddress, ModelStructure};

/// A member reference resolved to ordinals.
///
/// `pins` lists every coordinate the reference fixes: the resolved member
/// first, then any overrides. Coordinates not pinned follow the base cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundRef {
    pub dimension: usize,
    pub member: usize,
    pub overrides: Vec<(usize, usize)>,
    pins: Vec<(usize, usize)>,
}

impl BoundRef {
    pub fn pins(&self) -> &[(usize, usize)] {
        &self.pins
    }

    /// The operand cell read when evaluating at `base`.
    pub fn operand_address(&self, base: &CellAddress) -> CellAddress {
        let mut address = base.clone();
        for &(d, m) in &self.pins {
            address.set(d, m);
        }
        address
    }

    /// Linear index of the operand cell, given the base cell's linear index.
    #[inline]
    pub fn operand_linear(&self, structure: &ModelStructure, base: usize) -> usize {
        let strides = structure.strides();
        let mut linear = base;
        for &(d, m) in &self.pins {
            let current = structure.coordinate(base, d);
            linear = linear + m * strides[d] - current * strides[d];
        }
        linear
    }

    /// `{Member}` or `{Member | DIM=Member}` with canonical names.
    pub fn display(&self, structure: &ModelStructure) -> String {
        Expression::Member(self.to_member_ref(structure)).to_string()
    }

    fn to_member_ref(&self, structure: &ModelStructure) -> MemberRef {
        let mut r = MemberRef::new(structure.dimension(self.dimension).member_name(self.member));
        for &(d, m) in &self.overrides {
            let dim = structure.dimension(d);
            r.overrides.push((dim.name().to_string(), dim.member_name(m).to_string()));
        }
        r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundNode {
    Number(f64),
    /// Index into [`BoundExpr::refs`].
    Ref(usize),
    Call(Function, Vec<BoundNode>),
    Binary(BinaryOp, Box<BoundNode>, Box<BoundNode>),
    Negate(Box<BoundNode>),
}

/// An expression whose member references are resolved against a structure.
/// References are numbered in left-to-right order of appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundExpr {
    pub(super) root: BoundNode,
    refs: Vec<BoundRef>,
    anchor: usize,
}

impl BoundExpr {
    pub fn refs(&self) -> &[BoundRef] {
        &self.refs
    }

    pub fn root(&self) -> &BoundNode {
        &self.root
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    /// Rebuilds the expression with canonical member names.
    pub fn to_expression(&self, structure: &ModelStructure) -> Expression {
        fn walk(node: &BoundNode, refs: &[BoundRef], s: &ModelStructure) -> Expression {
            match node {
                BoundNode::Number(n) => Expression::Number(*n),
                BoundNode::Ref(i) => Expression::Member(refs[*i].to_member_ref(s)),
                BoundNode::Call(f, args) => {
                    Expression::Call { function: *f, args: args.iter().map(|a| walk(a, refs, s)).collect() }
                }
                BoundNode::Binary(op, l, r) => Expression::binary(*op, walk(l, refs, s), walk(r, refs, s)),
                BoundNode::Negate(c) => Expression::Negate(Box::new(walk(c, refs, s))),
            }
        }
        walk(&self.root, &self.refs, structure)
    }

    /// Formula text in business terms, e.g. `{Total sales} - {Discounts and allowances}`.
    pub fn display(&self, structure: &ModelStructure) -> String {
        self.to_expression(structure).to_string()
    }
}

struct Binder<'a> {
    structure: &'a ModelStructure,
    anchor: usize,
    refs: Vec<BoundRef>,
}

impl Binder<'_> {
    fn bind_ref(&self, r: &MemberRef) -> Result<BoundRef, BindError> {
        let s = self.structure;
        let mut overrides: Vec<(usize, usize)> = Vec::with_capacity(r.overrides.len());
        for (dim_name, member_name) in &r.overrides {
            let d = s.find_dimension(dim_name).ok_or_else(|| BindError::UnknownDimension(dim_name.clone()))?;
            if overrides.iter().any(|&(od, _)| od == d) {
                return Err(BindError::RepeatedOverride {
                    dimension: s.dimension(d).name().to_string(),
                });
            }
            let m = s.dimension(d).find(member_name).ok_or_else(|| BindError::UnknownMember {
                dimension: s.dimension(d).name().to_string(),
                member: member_name.clone(),
            })?;
            overrides.push((d, m));
        }

        let anchor_dim = s.dimension(self.anchor);
        let (dimension, member) = match anchor_dim.find(&r.name) {
            Some(m) => (self.anchor, m),
            // With the anchor pinned by an override, the name may live in
            // another dimension (e.g. `{Sales | PRODUCT=Total Products}`
            // inside a PRODUCT rule).
            None if overrides.iter().any(|&(d, _)| d == self.anchor) => {
                let hits: Vec<(usize, usize)> = (0..s.dimension_count())
                    .filter(|&d| d != self.anchor)
                    .filter_map(|d| s.dimension(d).find(&r.name).map(|m| (d, m)))
                    .collect();
                match hits.as_slice() {
                    [hit] => *hit,
                    [] => {
                        return Err(BindError::UnknownMember {
                            dimension: anchor_dim.name().to_string(),
                            member: r.name.clone(),
                        })
                    }
                    _ => {
                        return Err(BindError::Ambiguous {
                            member: r.name.clone(),
                            dimensions: hits.iter().map(|&(d, _)| s.dimension(d).name().to_string()).collect(),
                        })
                    }
                }
            }
            None => {
                return Err(BindError::UnknownMember {
                    dimension: anchor_dim.name().to_string(),
                    member: r.name.clone(),
                })
            }
        };

        // An override on the reference's own dimension is a no-op when it
        // repeats the member, and a contradiction otherwise.
        if let Some(&(_, m)) = overrides.iter().find(|&&(d, _)| d == dimension) {
            if m != member {
                return Err(BindError::ConflictingOverride {
                    dimension: s.dimension(dimension).name().to_string(),
                    member: r.name.clone(),
                });
            }
            overrides.retain(|&(d, _)| d != dimension);
        }

        let mut pins = vec![(dimension, member)];
        pins.extend_from_slice(&overrides);
        Ok(BoundRef { dimension, member, overrides, pins })
    }

    fn bind(&mut self, e: &Expression) -> Result<BoundNode, BindError> {
        Ok(match e {
            Expression::Number(n) => BoundNode::Number(*n),
            Expression::Member(r) => {
                let bound = self.bind_ref(r)?;
                self.refs.push(bound);
                BoundNode::Ref(self.refs.len() - 1)
            }
            Expression::Call { function, args } => {
                let (min, max) = function.arity();
                if args.len() < min || max.is_some_and(|max| args.len() > max) {
                    return Err(BindError::Arity { function: function.name(), got: args.len() });
                }
                let args = args.iter().map(|a| self.bind(a)).collect::<Result<Vec<_>, _>>()?;
                BoundNode::Call(*function, args)
            }
            Expression::Binary { op, left, right } => {
                let l = self.bind(left)?;
                let r = self.bind(right)?;
                BoundNode::Binary(*op, Box::new(l), Box::new(r))
            }
            Expression::Negate(child) => BoundNode::Negate(Box::new(self.bind(child)?)),
        })
    }
}

/// Resolves member names (canonical names, then aliases, case-insensitive).
/// Unqualified references bind in the anchor dimension.
pub fn bind(expression: &Expression, structure: &ModelStructure, anchor: usize) -> Result<BoundExpr, BindError> {
    let mut binder = Binder { structure, anchor, refs: Vec::new() };
    let root = binder.bind(expression)?;
    Ok(BoundExpr { root, refs: binder.refs, anchor })
}
