use std::collections::HashMap;
use std::sync::Arc;

use super::ast::{BinaryOp, Expr, UnaryOp};

impl Expr {
    /// Exact partial derivative with respect to `var`; every other variable
    /// is held fixed.
    pub fn derivative(&self, var: &str) -> Expr {
        let mut memo = HashMap::new();
        derive(self, var, &mut memo)
    }
}

fn derive_child(child: &Arc<Expr>, var: &str, memo: &mut HashMap<*const Expr, Expr>) -> Expr {
    let key = Arc::as_ptr(child);
    if let Some(d) = memo.get(&key) {
        return d.clone();
    }
    let d = derive(child, var, memo);
    memo.insert(key, d.clone());
    d
}

fn derive(e: &Expr, var: &str, memo: &mut HashMap<*const Expr, Expr>) -> Expr {
    match e {
        Expr::Const(_) => Expr::zero(),
        Expr::Var(name) => {
            if &**name == var {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Unary(op, arg) => {
            let du = derive_child(arg, var, memo);
            if du.is_const(0.0) {
                return Expr::zero();
            }
            let u = (**arg).clone();
            let outer = match op {
                UnaryOp::Neg => return -du,
                UnaryOp::Sin => u.cos(),
                UnaryOp::Cos => -u.sin(),
                UnaryOp::Exp => e.clone(),
                UnaryOp::Log => return du / u,
                UnaryOp::Sqrt => return du / (2.0 * e.clone()),
                UnaryOp::Abs => u.clone() / u.abs(),
            };
            outer * du
        }
        Expr::Binary(op, lhs, rhs) => {
            let du = derive_child(lhs, var, memo);
            let dv = derive_child(rhs, var, memo);
            let u = (**lhs).clone();
            let v = (**rhs).clone();
            match op {
                BinaryOp::Add => du + dv,
                BinaryOp::Sub => du - dv,
                BinaryOp::Mul => du * v + u * dv,
                BinaryOp::Div => {
                    if dv.is_const(0.0) {
                        du / v
                    } else {
                        du / v.clone() - u * dv / v.powf(2.0)
                    }
                }
                BinaryOp::Pow => {
                    if dv.is_const(0.0) {
                        // exponent independent of var: power rule
                        let reduced = match v.as_const() {
                            Some(c) => Expr::Const(c - 1.0),
                            None => v.clone() - 1.0,
                        };
                        v * u.pow(reduced) * du
                    } else if du.is_const(0.0) {
                        e.clone() * u.ln() * dv
                    } else {
                        e.clone() * (dv * u.clone().ln() + v * du / u)
                    }
                }
            }
        }
    }
}
