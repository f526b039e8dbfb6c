use super::ast::{BinaryOp, Function};
use super::bind::{BoundExpr, BoundNode};
use crate::value::{CellValue, ErrorKind};

impl BoundExpr {
    /// Evaluates the expression. `read` receives the index of each member
    /// reference (see [`BoundExpr::refs`]) and returns the operand's value.
    ///
    /// Never fails: problems surface as `CellValue::Error`, and the first
    /// error in left-to-right order wins.
    #[inline]
    pub fn evaluate<F: FnMut(usize) -> CellValue>(&self, read: &mut F) -> CellValue {
        eval_node(&self.root, read)
    }

    /// Evaluates with operand values supplied positionally.
    pub fn evaluate_with(&self, operands: &[CellValue]) -> CellValue {
        self.evaluate(&mut |i| operands[i])
    }
}

fn eval_node<F: FnMut(usize) -> CellValue>(node: &BoundNode, read: &mut F) -> CellValue {
    match node {
        BoundNode::Number(n) => CellValue::number(*n),
        BoundNode::Ref(i) => read(*i),
        BoundNode::Negate(child) => match eval_node(child, read) {
            CellValue::Number(n) => CellValue::number(-n),
            err => err,
        },
        BoundNode::Binary(op, left, right) => {
            let l = eval_node(left, read);
            let r = eval_node(right, read);
            match (l, r) {
                (CellValue::Error(_), _) => l,
                (_, CellValue::Error(_)) => r,
                (CellValue::Number(a), CellValue::Number(b)) => match op {
                    BinaryOp::Add => CellValue::number(a + b),
                    BinaryOp::Sub => CellValue::number(a - b),
                    BinaryOp::Mul => CellValue::number(a * b),
                    BinaryOp::Div if b == 0.0 => CellValue::Error(ErrorKind::Div0),
                    BinaryOp::Div => CellValue::number(a / b),
                },
            }
        }
        BoundNode::Call(function, args) => eval_call(*function, args, read),
    }
}

fn numbers<F: FnMut(usize) -> CellValue>(args: &[BoundNode], read: &mut F) -> Result<Vec<f64>, CellValue> {
    let mut out = Vec::with_capacity(args.len());
    for arg in args {
        match eval_node(arg, read) {
            CellValue::Number(n) => out.push(n),
            err => return Err(err),
        }
    }
    Ok(out)
}

fn eval_call<F: FnMut(usize) -> CellValue>(function: Function, args: &[BoundNode], read: &mut F) -> CellValue {
    match function {
        Function::IfError => match eval_node(&args[0], read) {
            CellValue::Error(_) => eval_node(&args[1], read),
            v => v,
        },
        Function::Sum => {
            let mut acc = 0.0;
            for arg in args {
                match eval_node(arg, read) {
                    CellValue::Number(n) => acc += n,
                    err => return err,
                }
            }
            CellValue::number(acc)
        }
        _ => {
            let xs = match numbers(args, read) {
                Ok(xs) => xs,
                Err(err) => return err,
            };
            match function {
                Function::Average => CellValue::number(xs.iter().sum::<f64>() / xs.len() as f64),
                Function::Min => CellValue::number(xs.iter().copied().fold(f64::INFINITY, f64::min)),
                Function::Max => CellValue::number(xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
                Function::Abs => CellValue::number(xs[0].abs()),
                Function::Round => round(xs[0], xs[1]),
                Function::Sum | Function::IfError => unreachable!(),
            }
        }
    }
}

/// Rounds half away from zero to `digits` places; negative digits round to
/// tens, hundreds, and so on.
fn round(x: f64, digits: f64) -> CellValue {
    let digits = digits.trunc();
    if digits.abs() > 15.0 {
        return CellValue::Error(ErrorKind::Fn);
    }
    let scale = 10f64.powi(digits.abs() as i32);
    if digits >= 0.0 {
        CellValue::number((x * scale).round() / scale)
    } else {
        CellValue::number((x / scale).round() * scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DimensionDef, ModelStructure};
    use crate::rules::{bind, parse};

    fn eval(text: &str, operands: &[f64]) -> CellValue {
        let s = ModelStructure::build(
            "t",
            &[
                DimensionDef::flat("A", &["a", "b", "c", "d", "e", "f", "g", "h"]),
                DimensionDef::flat("B", &["x"]),
            ],
        )
        .unwrap();
        let e = bind(&parse(text).unwrap(), &s, 0).unwrap();
        let vals: Vec<CellValue> = operands.iter().map(|&v| CellValue::number(v)).collect();
        e.evaluate_with(&vals)
    }

    #[test]
    fn figure_four_column() {
        // Net sales and total cost of sales from the printed column.
        let ns = eval("{a} - {b}", &[9904.06, 3.48]).as_number().unwrap();
        assert!((ns - 9900.58).abs() < 1e-9);
        let tcs = eval("SUM({a},{b},{c})", &[6616.63, 93.74, 44.23]).as_number().unwrap();
        assert!((tcs - 6754.60).abs() < 1e-9);
        let pct = eval("{a}/{b}", &[1489.71, 9904.06]).as_number().unwrap();
        assert!((pct - 0.150414).abs() < 1e-5);
    }

    #[test]
    fn errors_and_iferror() {
        assert_eq!(eval("1/0", &[]), CellValue::Error(ErrorKind::Div0));
        assert_eq!(eval("IFERROR(1/0, 0)", &[]), CellValue::Number(0.0));
        assert_eq!(eval("IFERROR({a}/{b}, 7)", &[1.0, 4.0]), CellValue::Number(0.25));
        assert_eq!(eval("SUM({a}, 1/0, {b})", &[1.0, 2.0]), CellValue::Error(ErrorKind::Div0));
        assert_eq!(eval("-(1/0)", &[]), CellValue::Error(ErrorKind::Div0));
        assert_eq!(eval("1e308 * 10", &[]), CellValue::Error(ErrorKind::Div0));
    }

    #[test]
    fn first_error_wins() {
        let s = ModelStructure::build("t", &[DimensionDef::flat("A", &["a", "b"]), DimensionDef::flat("B", &["x"])])
            .unwrap();
        let e = bind(&parse("{a} + {b}").unwrap(), &s, 0).unwrap();
        let v = e.evaluate_with(&[CellValue::Error(ErrorKind::Ref), CellValue::Error(ErrorKind::Div0)]);
        assert_eq!(v, CellValue::Error(ErrorKind::Ref));
    }

    #[test]
    fn sum_of_empty_is_zero() {
        assert_eq!(eval("SUM({a},{b},{c})", &[0.0, 0.0, 0.0]), CellValue::Number(0.0));
    }

    #[test]
    fn extension_functions() {
        assert_eq!(eval("AVERAGE({a},{b})", &[1.0, 4.0]), CellValue::Number(2.5));
        assert_eq!(eval("MIN({a},{b},3)", &[1.0, -4.0]), CellValue::Number(-4.0));
        assert_eq!(eval("MAX({a},{b},3)", &[1.0, -4.0]), CellValue::Number(3.0));
        assert_eq!(eval("ABS({a})", &[-2.0]), CellValue::Number(2.0));
        assert_eq!(eval("ROUND({a}, 1)", &[2.25]), CellValue::Number(2.3));
        assert_eq!(eval("ROUND({a}, 0)", &[-2.5]), CellValue::Number(-3.0));
        assert_eq!(eval("ROUND({a}, -2)", &[1250.0]), CellValue::Number(1300.0));
        assert_eq!(eval("ROUND({a}, 99)", &[1.0]), CellValue::Error(ErrorKind::Fn));
    }
}
