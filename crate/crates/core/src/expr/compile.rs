use std::collections::HashMap;
use std::sync::Arc;

use super::ast::{BinaryOp, Expr, UnaryOp};
use super::space::VarSpace;
use super::ExprError;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Instr {
    Const(f64),
    Load(usize),
    Unary(UnaryOp, u32),
    Binary(BinaryOp, u32, u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Key {
    Const(u64),
    Load(usize),
    Unary(UnaryOp, u32),
    Binary(BinaryOp, u32, u32),
}

/// A straight-line register program evaluating one or more expressions over
/// the variables of a [`VarSpace`], with structurally equal subexpressions
/// computed once. Domain checks match [`Expr::eval`].
#[derive(Debug, Clone)]
pub struct Program {
    instrs: Vec<Instr>,
    outputs: Vec<u32>,
    n_inputs: usize,
}

struct Compiler<'a> {
    space: &'a VarSpace,
    instrs: Vec<Instr>,
    keys: HashMap<Key, u32>,
    by_ptr: HashMap<*const Expr, u32>,
}

impl Compiler<'_> {
    fn emit(&mut self, key: Key, instr: Instr) -> u32 {
        if let Some(&r) = self.keys.get(&key) {
            return r;
        }
        let r = self.instrs.len() as u32;
        self.instrs.push(instr);
        self.keys.insert(key, r);
        r
    }

    fn child(&mut self, e: &Arc<Expr>) -> Result<u32, ExprError> {
        let ptr = Arc::as_ptr(e);
        if let Some(&r) = self.by_ptr.get(&ptr) {
            return Ok(r);
        }
        let r = self.node(e)?;
        self.by_ptr.insert(ptr, r);
        Ok(r)
    }

    fn node(&mut self, e: &Expr) -> Result<u32, ExprError> {
        Ok(match e {
            Expr::Const(c) => self.emit(Key::Const(c.to_bits()), Instr::Const(*c)),
            Expr::Var(name) => {
                let slot = self
                    .space
                    .index_of(name)
                    .ok_or_else(|| ExprError::UnknownVariable(name.to_string()))?;
                self.emit(Key::Load(slot), Instr::Load(slot))
            }
            Expr::Unary(op, arg) => {
                let a = self.child(arg)?;
                self.emit(Key::Unary(*op, a), Instr::Unary(*op, a))
            }
            Expr::Binary(op, lhs, rhs) => {
                let a = self.child(lhs)?;
                let b = self.child(rhs)?;
                self.emit(Key::Binary(*op, a, b), Instr::Binary(*op, a, b))
            }
        })
    }
}

impl Program {
    pub fn compile(expr: &Expr, space: &VarSpace) -> Result<Program, ExprError> {
        Program::compile_many(std::slice::from_ref(expr), space)
    }

    pub fn compile_many(exprs: &[Expr], space: &VarSpace) -> Result<Program, ExprError> {
        let mut c = Compiler {
            space,
            instrs: Vec::new(),
            keys: HashMap::new(),
            by_ptr: HashMap::new(),
        };
        let outputs = exprs.iter().map(|e| c.node(e)).collect::<Result<_, _>>()?;
        Ok(Program {
            instrs: c.instrs,
            outputs,
            n_inputs: space.len(),
        })
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Number of instructions after common-subexpression elimination.
    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }

    fn run(&self, inputs: &[f64]) -> Result<Vec<f64>, ExprError> {
        assert_eq!(
            inputs.len(),
            self.n_inputs,
            "program expects {} inputs",
            self.n_inputs
        );
        let mut regs = Vec::with_capacity(self.instrs.len());
        for instr in &self.instrs {
            let v = match *instr {
                Instr::Const(c) => c,
                Instr::Load(slot) => inputs[slot],
                Instr::Unary(op, a) => op.apply(regs[a as usize])?,
                Instr::Binary(op, a, b) => op.apply(regs[a as usize], regs[b as usize])?,
            };
            regs.push(v);
        }
        Ok(regs)
    }

    /// Value of the first output.
    pub fn eval(&self, inputs: &[f64]) -> Result<f64, ExprError> {
        let regs = self.run(inputs)?;
        Ok(regs[self.outputs[0] as usize])
    }

    pub fn eval_into(&self, inputs: &[f64], out: &mut [f64]) -> Result<(), ExprError> {
        let regs = self.run(inputs)?;
        for (o, &r) in out.iter_mut().zip(&self.outputs) {
            *o = regs[r as usize];
        }
        Ok(())
    }

    pub fn eval_vec(&self, inputs: &[f64]) -> Result<Vec<f64>, ExprError> {
        let regs = self.run(inputs)?;
        Ok(self.outputs.iter().map(|&r| regs[r as usize]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn matches_tree_evaluation() {
        let space = VarSpace::full(1);
        let e = parse("sin(x_1)*phi^2 + sin(x_1)/(1 + g_1^2)", &space).unwrap();
        let prog = Program::compile(&e, &space).unwrap();
        let bindings = [("x_1", 0.3), ("phi", -1.2), ("g_1", 2.5)];
        assert_eq!(prog.eval(&[0.3, -1.2, 2.5]).unwrap(), e.eval(&bindings).unwrap());
    }

    #[test]
    fn shared_subexpressions_are_computed_once() {
        let space = VarSpace::coordinates(1);
        let e = parse("sin(x_1) + sin(x_1) + sin(x_1)", &space).unwrap();
        let prog = Program::compile(&e, &space).unwrap();
        // load, sin, add, add
        assert_eq!(prog.len(), 4);
    }

    #[test]
    fn domain_errors_propagate() {
        let space = VarSpace::coordinates(1);
        let prog = Program::compile(&parse("log(x_1)", &space).unwrap(), &space).unwrap();
        assert!(matches!(prog.eval(&[-1.0]), Err(ExprError::Domain { op: "log", .. })));
    }

    #[test]
    fn undeclared_variable_rejected() {
        let e = Expr::var("q");
        assert_eq!(
            Program::compile(&e, &VarSpace::coordinates(1)).unwrap_err(),
            ExprError::UnknownVariable("q".into())
        );
    }
}
