use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops;
use std::sync::Arc;

use super::ExprError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl UnaryOp {
    pub const FUNCTIONS: [UnaryOp; 6] = [
        UnaryOp::Sin,
        UnaryOp::Cos,
        UnaryOp::Exp,
        UnaryOp::Log,
        UnaryOp::Sqrt,
        UnaryOp::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "neg",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Abs => "abs",
        }
    }

    /// Function-call form only; negation is an operator.
    pub fn from_function_name(name: &str) -> Option<UnaryOp> {
        UnaryOp::FUNCTIONS.into_iter().find(|op| op.name() == name)
    }

    pub fn apply(self, x: f64) -> Result<f64, ExprError> {
        let value = match self {
            UnaryOp::Neg => -x,
            UnaryOp::Sin => x.sin(),
            UnaryOp::Cos => x.cos(),
            UnaryOp::Exp => x.exp(),
            UnaryOp::Log => {
                if x <= 0.0 {
                    return Err(domain("log", format!("argument {x} is not positive")));
                }
                x.ln()
            }
            UnaryOp::Sqrt => {
                if x < 0.0 {
                    return Err(domain("sqrt", format!("argument {x} is negative")));
                }
                x.sqrt()
            }
            UnaryOp::Abs => x.abs(),
        };
        finite(self.name(), value, || format!("{}({x})", self.name()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    pub fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
            BinaryOp::Pow => '^',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinaryOp::Add | BinaryOp::Sub => 1,
            BinaryOp::Mul | BinaryOp::Div => 2,
            BinaryOp::Pow => 3,
        }
    }

    pub fn apply(self, a: f64, b: f64) -> Result<f64, ExprError> {
        let value = match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => {
                if b == 0.0 {
                    return Err(domain("div", format!("division of {a} by zero")));
                }
                a / b
            }
            BinaryOp::Pow => return checked_pow(a, b),
        };
        finite(
            match self {
                BinaryOp::Add => "add",
                BinaryOp::Sub => "sub",
                BinaryOp::Mul => "mul",
                _ => "div",
            },
            value,
            || format!("{a} {} {b}", self.symbol()),
        )
    }
}

fn domain(op: &'static str, detail: String) -> ExprError {
    ExprError::Domain { op, detail }
}

fn finite(
    op: &'static str,
    value: f64,
    describe: impl FnOnce() -> String,
) -> Result<f64, ExprError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(domain(op, format!("{} is not finite", describe())))
    }
}

fn checked_pow(base: f64, exponent: f64) -> Result<f64, ExprError> {
    let integral = exponent.fract() == 0.0;
    if base < 0.0 && !integral {
        return Err(domain(
            "pow",
            format!("negative base {base} with non-integer exponent {exponent}"),
        ));
    }
    if base == 0.0 && exponent < 0.0 {
        return Err(domain(
            "pow",
            format!("zero base with negative exponent {exponent}"),
        ));
    }
    let value = if integral && exponent.abs() <= i32::MAX as f64 {
        base.powi(exponent as i32)
    } else {
        base.powf(exponent)
    };
    finite("pow", value, || format!("{base}^{exponent}"))
}

/// Variable lookup used by tree evaluation.
pub trait Bindings {
    fn value(&self, name: &str) -> Option<f64>;
}

impl Bindings for HashMap<String, f64> {
    fn value(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl Bindings for HashMap<&str, f64> {
    fn value(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl Bindings for BTreeMap<String, f64> {
    fn value(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl Bindings for [(&str, f64)] {
    fn value(&self, name: &str) -> Option<f64> {
        self.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }
}

impl<const N: usize> Bindings for [(&str, f64); N] {
    fn value(&self, name: &str) -> Option<f64> {
        self.as_slice().value(name)
    }
}

impl Bindings for Vec<(String, f64)> {
    fn value(&self, name: &str) -> Option<f64> {
        self.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Arc<str>),
    Unary(UnaryOp, Arc<Expr>),
    Binary(BinaryOp, Arc<Expr>, Arc<Expr>),
}

impl Expr {
    pub fn constant(value: f64) -> Expr {
        Expr::Const(value)
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(Arc::from(name))
    }

    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    pub fn one() -> Expr {
        Expr::Const(1.0)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_const(&self, value: f64) -> bool {
        self.as_const() == Some(value)
    }

    /// Build a unary node, folding constants when the result is defined.
    pub fn unary(op: UnaryOp, arg: Expr) -> Expr {
        if let Some(c) = arg.as_const() {
            if let Ok(v) = op.apply(c) {
                return Expr::Const(v);
            }
        }
        if op == UnaryOp::Neg {
            if let Expr::Unary(UnaryOp::Neg, inner) = &arg {
                return (**inner).clone();
            }
        }
        Expr::Unary(op, Arc::new(arg))
    }

    /// Build a binary node with constant folding and identity elimination
    /// (`x+0`, `x-0`, `x*1`, `x*0`, `x/1`, `x^1`, `x^0`).
    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        if let (Some(a), Some(b)) = (lhs.as_const(), rhs.as_const()) {
            if let Ok(v) = op.apply(a, b) {
                return Expr::Const(v);
            }
        }
        match op {
            BinaryOp::Add => {
                if lhs.is_const(0.0) {
                    return rhs;
                }
                if rhs.is_const(0.0) {
                    return lhs;
                }
            }
            BinaryOp::Sub => {
                if rhs.is_const(0.0) {
                    return lhs;
                }
                if lhs.is_const(0.0) {
                    return Expr::unary(UnaryOp::Neg, rhs);
                }
            }
            BinaryOp::Mul => {
                if lhs.is_const(0.0) || rhs.is_const(0.0) {
                    return Expr::zero();
                }
                if lhs.is_const(1.0) {
                    return rhs;
                }
                if rhs.is_const(1.0) {
                    return lhs;
                }
                // c1 * (c2 * x) -> (c1 c2) * x
                if let (Some(a), Expr::Binary(BinaryOp::Mul, inner_l, inner_r)) =
                    (lhs.as_const(), &rhs)
                {
                    if let Some(b) = inner_l.as_const() {
                        if let Ok(c) = BinaryOp::Mul.apply(a, b) {
                            return Expr::binary(BinaryOp::Mul, Expr::Const(c), (**inner_r).clone());
                        }
                    }
                }
            }
            BinaryOp::Div => {
                if rhs.is_const(1.0) {
                    return lhs;
                }
            }
            BinaryOp::Pow => {
                if rhs.is_const(1.0) {
                    return lhs;
                }
                if rhs.is_const(0.0) {
                    return Expr::one();
                }
            }
        }
        Expr::Binary(op, Arc::new(lhs), Arc::new(rhs))
    }

    pub fn pow(self, exponent: Expr) -> Expr {
        Expr::binary(BinaryOp::Pow, self, exponent)
    }

    pub fn powf(self, exponent: f64) -> Expr {
        self.pow(Expr::Const(exponent))
    }

    pub fn sin(self) -> Expr {
        Expr::unary(UnaryOp::Sin, self)
    }

    pub fn cos(self) -> Expr {
        Expr::unary(UnaryOp::Cos, self)
    }

    pub fn exp(self) -> Expr {
        Expr::unary(UnaryOp::Exp, self)
    }

    pub fn ln(self) -> Expr {
        Expr::unary(UnaryOp::Log, self)
    }

    pub fn sqrt(self) -> Expr {
        Expr::unary(UnaryOp::Sqrt, self)
    }

    pub fn abs(self) -> Expr {
        Expr::unary(UnaryOp::Abs, self)
    }

    /// Sum of an iterator of expressions (zero when empty).
    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
        terms.into_iter().fold(Expr::zero(), |acc, t| acc + t)
    }

    /// Tree evaluation with named bindings.
    pub fn eval(&self, bindings: &(impl Bindings + ?Sized)) -> Result<f64, ExprError> {
        match self {
            Expr::Const(c) => Ok(*c),
            Expr::Var(name) => bindings
                .value(name)
                .ok_or_else(|| ExprError::UnboundVariable(name.to_string())),
            Expr::Unary(op, arg) => op.apply(arg.eval(bindings)?),
            Expr::Binary(op, lhs, rhs) => {
                let a = lhs.eval(bindings)?;
                let b = rhs.eval(bindings)?;
                op.apply(a, b)
            }
        }
    }

    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(name) => {
                out.insert(name.to_string());
            }
            Expr::Unary(_, arg) => arg.collect_variables(out),
            Expr::Binary(_, lhs, rhs) => {
                lhs.collect_variables(out);
                rhs.collect_variables(out);
            }
        }
    }

    pub fn depends_on(&self, name: &str) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(v) => &**v == name,
            Expr::Unary(_, arg) => arg.depends_on(name),
            Expr::Binary(_, lhs, rhs) => lhs.depends_on(name) || rhs.depends_on(name),
        }
    }

    /// Replace variables by expressions. Shared subtrees stay shared.
    pub fn substitute(&self, replacements: &HashMap<&str, Expr>) -> Expr {
        let mut memo = HashMap::new();
        self.substitute_memo(replacements, &mut memo)
    }

    fn substitute_memo(
        &self,
        replacements: &HashMap<&str, Expr>,
        memo: &mut HashMap<*const Expr, Expr>,
    ) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(name) => replacements
                .get(&**name)
                .cloned()
                .unwrap_or_else(|| self.clone()),
            Expr::Unary(op, arg) => {
                let a = substitute_child(arg, replacements, memo);
                Expr::unary(*op, a)
            }
            Expr::Binary(op, lhs, rhs) => {
                let a = substitute_child(lhs, replacements, memo);
                let b = substitute_child(rhs, replacements, memo);
                Expr::binary(*op, a, b)
            }
        }
    }

    /// Number of nodes counted as a tree (shared children counted each time).
    pub fn tree_size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Unary(_, arg) => 1 + arg.tree_size(),
            Expr::Binary(_, lhs, rhs) => 1 + lhs.tree_size() + rhs.tree_size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Unary(_, arg) => 1 + arg.depth(),
            Expr::Binary(_, lhs, rhs) => 1 + lhs.depth().max(rhs.depth()),
        }
    }
}

fn substitute_child(
    child: &Arc<Expr>,
    replacements: &HashMap<&str, Expr>,
    memo: &mut HashMap<*const Expr, Expr>,
) -> Expr {
    let key = Arc::as_ptr(child);
    if let Some(done) = memo.get(&key) {
        return done.clone();
    }
    let out = child.substitute_memo(replacements, memo);
    memo.insert(key, out.clone());
    out
}

impl From<f64> for Expr {
    fn from(value: f64) -> Expr {
        Expr::Const(value)
    }
}

macro_rules! binary_operator {
    ($trait:ident, $method:ident, $op:expr) => {
        impl ops::$trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, self, rhs)
            }
        }
        impl ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::binary($op, self.clone(), rhs.clone())
            }
        }
        impl ops::$trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::binary($op, self, Expr::Const(rhs))
            }
        }
        impl ops::$trait<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, Expr::Const(self), rhs)
            }
        }
    };
}

binary_operator!(Add, add, BinaryOp::Add);
binary_operator!(Sub, sub, BinaryOp::Sub);
binary_operator!(Mul, mul, BinaryOp::Mul);
binary_operator!(Div, div, BinaryOp::Div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(UnaryOp::Neg, self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(UnaryOp::Neg, self.clone())
    }
}

// Rendering follows the input grammar so that `parse(render(e))` rebuilds an
// equivalent tree. In that grammar a leading minus binds tighter than `^`
// (`-x^2` is `(-x)^2`), so negated operands are always parenthesized.

#[derive(Clone, Copy, PartialEq)]
enum Slot {
    Top,
    Left(u8),
    Right(u8),
    PowBase,
    PowExponent,
    Operand,
}

fn write_number(f: &mut fmt::Formatter<'_>, value: f64) -> fmt::Result {
    // Debug formatting is the shortest representation that round-trips.
    let text = format!("{value:?}");
    let text = text.strip_suffix(".0").unwrap_or(&text);
    f.write_str(text)
}

impl Expr {
    fn render(&self, f: &mut fmt::Formatter<'_>, slot: Slot) -> fmt::Result {
        let bare = matches!(slot, Slot::Top | Slot::Left(_));
        let needs_parens = match self {
            Expr::Const(c) => c.is_sign_negative() && !bare,
            Expr::Var(_) => false,
            Expr::Unary(UnaryOp::Neg, _) => !bare,
            Expr::Unary(_, _) => false,
            Expr::Binary(op, _, _) => {
                let p = op.precedence();
                match slot {
                    Slot::Top => false,
                    Slot::Left(parent) => p < parent,
                    Slot::Right(parent) => p <= parent,
                    Slot::PowBase | Slot::PowExponent | Slot::Operand => true,
                }
            }
        };

        if needs_parens {
            f.write_str("(")?;
        }
        match self {
            Expr::Const(c) => write_number(f, *c)?,
            Expr::Var(name) => f.write_str(name)?,
            Expr::Unary(UnaryOp::Neg, arg) => {
                f.write_str("-")?;
                arg.render(f, Slot::Operand)?;
            }
            Expr::Unary(op, arg) => {
                write!(f, "{}(", op.name())?;
                arg.render(f, Slot::Top)?;
                f.write_str(")")?;
            }
            Expr::Binary(BinaryOp::Pow, lhs, rhs) => {
                lhs.render(f, Slot::PowBase)?;
                f.write_str("^")?;
                rhs.render(f, Slot::PowExponent)?;
            }
            Expr::Binary(op, lhs, rhs) => {
                let p = op.precedence();
                lhs.render(f, Slot::Left(p))?;
                write!(f, " {} ", op.symbol())?;
                rhs.render(f, Slot::Right(p))?;
            }
        }
        if needs_parens {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.render(f, Slot::Top)
    }
}
