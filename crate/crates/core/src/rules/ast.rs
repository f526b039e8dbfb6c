use std::fmt;

/// A member reference as written: `{name}` or `{name | DIM=Member, ...}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberRef {
    pub name: String,
    pub overrides: Vec<(String, String)>,
}

impl MemberRef {
    pub fn new(name: impl Into<String>) -> Self {
        MemberRef { name: name.into(), overrides: Vec::new() }
    }

    pub fn with_override(mut self, dimension: impl Into<String>, member: impl Into<String>) -> Self {
        self.overrides.push((dimension.into(), member.into()));
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    pub fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinaryOp::Add | BinaryOp::Sub => 1,
            BinaryOp::Mul | BinaryOp::Div => 2,
        }
    }
}

/// Supported functions. SUM and IFERROR cover the classic planning rules;
/// the rest are conveniences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Function {
    Sum,
    IfError,
    Average,
    Min,
    Max,
    Abs,
    Round,
}

impl Function {
    pub const ALL: [Function; 7] = [
        Function::Sum,
        Function::IfError,
        Function::Average,
        Function::Min,
        Function::Max,
        Function::Abs,
        Function::Round,
    ];

    pub fn from_name(name: &str) -> Option<Function> {
        Function::ALL.into_iter().find(|f| f.name().eq_ignore_ascii_case(name))
    }

    pub fn name(self) -> &'static str {
        match self {
            Function::Sum => "SUM",
            Function::IfError => "IFERROR",
            Function::Average => "AVERAGE",
            Function::Min => "MIN",
            Function::Max => "MAX",
            Function::Abs => "ABS",
            Function::Round => "ROUND",
        }
    }

    /// Minimum and (optional) maximum argument count.
    pub fn arity(self) -> (usize, Option<usize>) {
        match self {
            Function::Sum | Function::Average | Function::Min | Function::Max => (1, None),
            Function::IfError | Function::Round => (2, Some(2)),
            Function::Abs => (1, Some(1)),
        }
    }
}

/// Unbound syntax tree of a rule formula.
#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Number(f64),
    Member(MemberRef),
    Call { function: Function, args: Vec<Expression> },
    Binary { op: BinaryOp, left: Box<Expression>, right: Box<Expression> },
    Negate(Box<Expression>),
}

impl Expression {
    pub fn binary(op: BinaryOp, left: Expression, right: Expression) -> Expression {
        Expression::Binary { op, left: Box::new(left), right: Box::new(right) }
    }

    pub fn member(name: &str) -> Expression {
        Expression::Member(MemberRef::new(name))
    }

    fn precedence(&self) -> u8 {
        match self {
            Expression::Binary { op, .. } => op.precedence(),
            Expression::Negate(_) => 3,
            _ => 4,
        }
    }

    /// Member references in left-to-right order of appearance.
    pub fn member_refs(&self) -> Vec<&MemberRef> {
        fn walk<'a>(e: &'a Expression, out: &mut Vec<&'a MemberRef>) {
            match e {
                Expression::Number(_) => {}
                Expression::Member(r) => out.push(r),
                Expression::Call { args, .. } => args.iter().for_each(|a| walk(a, out)),
                Expression::Binary { left, right, .. } => {
                    walk(left, out);
                    walk(right, out);
                }
                Expression::Negate(child) => walk(child, out),
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Expression, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

/// Prints with minimal parentheses; the output parses back to the same tree.
impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Number(n) => write!(f, "{n}"),
            Expression::Member(r) => {
                write!(f, "{{{}", r.name)?;
                for (i, (dim, member)) in r.overrides.iter().enumerate() {
                    let sep = if i == 0 { " | " } else { ", " };
                    write!(f, "{sep}{dim}={member}")?;
                }
                f.write_str("}")
            }
            Expression::Call { function, args } => {
                write!(f, "{}(", function.name())?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{arg}")?;
                }
                f.write_str(")")
            }
            Expression::Binary { op, left, right } => {
                let p = op.precedence();
                write_child(f, left, left.precedence() < p)?;
                write!(f, " {} ", op.symbol())?;
                write_child(f, right, right.precedence() <= p)
            }
            Expression::Negate(child) => {
                f.write_str("-")?;
                write_child(f, child, child.precedence() < 3)
            }
        }
    }
}
