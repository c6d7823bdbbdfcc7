//! Expressions for interval endpoints, guards, updates and fickle functions.

mod classify;
pub mod maximize;

pub use classify::{classify, classify_fn, FickleClass, FickleFn, FickleSpec};
pub use maximize::{maximize_diff, ThetaFn};

use std::fmt::Write as _;
use std::ops;

use crate::model::{Config, PlaceId, VarId};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Abs,
    Floor,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Min,
    Max,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Num(Rational),
    Bool(bool),
    Var(VarId),
    Tokens(PlaceId),
    /// Value before the firing currently being processed.
    OldVar(VarId),
    OldTokens(PlaceId),
    Theta,
    Un(UnOp, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Num(Rational),
    Bool(bool),
}

/// Evaluation environment. `old` defaults to `config` when absent.
#[derive(Clone, Copy)]
pub struct Env<'a> {
    pub config: &'a Config,
    pub old: Option<&'a Config>,
    pub theta: Option<&'a Rational>,
}

impl<'a> Env<'a> {
    pub fn new(config: &'a Config) -> Self {
        Env {
            config,
            old: None,
            theta: None,
        }
    }

    pub fn with_old(self, old: &'a Config) -> Self {
        Env {
            old: Some(old),
            ..self
        }
    }

    pub fn with_theta(self, theta: &'a Rational) -> Self {
        Env {
            theta: Some(theta),
            ..self
        }
    }

    fn old_config(&self) -> &'a Config {
        self.old.unwrap_or(self.config)
    }
}

/// Name lookup used when printing expressions back to source.
pub trait Names {
    fn place_name(&self, p: PlaceId) -> &str;
    fn var_name(&self, v: VarId) -> &str;
}

impl Expr {
    pub fn num(r: Rational) -> Expr {
        Expr::Num(r)
    }

    pub fn int(n: i64) -> Expr {
        Expr::Num(Rational::int(n))
    }

    pub fn un(op: UnOp, e: Expr) -> Expr {
        Expr::Un(op, Box::new(e))
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn abs(self) -> Expr {
        Expr::un(UnOp::Abs, self)
    }

    pub fn floor(self) -> Expr {
        Expr::un(UnOp::Floor, self)
    }

    pub fn min(self, o: Expr) -> Expr {
        Expr::bin(BinOp::Min, self, o)
    }

    pub fn max(self, o: Expr) -> Expr {
        Expr::bin(BinOp::Max, self, o)
    }

    pub fn lt(self, o: Expr) -> Expr {
        Expr::bin(BinOp::Lt, self, o)
    }

    pub fn le(self, o: Expr) -> Expr {
        Expr::bin(BinOp::Le, self, o)
    }

    pub fn gt(self, o: Expr) -> Expr {
        Expr::bin(BinOp::Gt, self, o)
    }

    pub fn ge(self, o: Expr) -> Expr {
        Expr::bin(BinOp::Ge, self, o)
    }

    pub fn eq_(self, o: Expr) -> Expr {
        Expr::bin(BinOp::Eq, self, o)
    }

    pub fn ne_(self, o: Expr) -> Expr {
        Expr::bin(BinOp::Ne, self, o)
    }

    pub fn and(self, o: Expr) -> Expr {
        Expr::bin(BinOp::And, self, o)
    }

    pub fn or(self, o: Expr) -> Expr {
        Expr::bin(BinOp::Or, self, o)
    }

    pub fn ite(c: Expr, a: Expr, b: Expr) -> Expr {
        Expr::If(Box::new(c), Box::new(a), Box::new(b))
    }

    /// Replaces `Var`/`Tokens` by their `old(..)` counterparts.
    pub fn to_old(&self) -> Expr {
        self.map_leaves(&|e| match e {
            Expr::Var(v) => Expr::OldVar(*v),
            Expr::Tokens(p) => Expr::OldTokens(*p),
            _ => e.clone(),
        })
    }

    /// Substitutes `theta` by `e`.
    pub fn subst_theta(&self, e: &Expr) -> Expr {
        self.map_leaves(&|x| {
            if *x == Expr::Theta {
                e.clone()
            } else {
                x.clone()
            }
        })
    }

    fn map_leaves(&self, f: &dyn Fn(&Expr) -> Expr) -> Expr {
        match self {
            Expr::Un(op, a) => Expr::un(*op, a.map_leaves(f)),
            Expr::Bin(op, a, b) => Expr::bin(*op, a.map_leaves(f), b.map_leaves(f)),
            Expr::If(c, a, b) => Expr::ite(c.map_leaves(f), a.map_leaves(f), b.map_leaves(f)),
            leaf => f(leaf),
        }
    }

    pub fn any(&self, pred: &dyn Fn(&Expr) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Expr::Un(_, a) => a.any(pred),
            Expr::Bin(_, a, b) => a.any(pred) || b.any(pred),
            Expr::If(c, a, b) => c.any(pred) || a.any(pred) || b.any(pred),
            _ => false,
        }
    }

    pub fn has_theta(&self) -> bool {
        self.any(&|e| matches!(e, Expr::Theta))
    }

    /// True when the value does not depend on the configuration.
    pub fn is_config_free(&self) -> bool {
        !self.any(&|e| {
            matches!(
                e,
                Expr::Var(_) | Expr::Tokens(_) | Expr::OldVar(_) | Expr::OldTokens(_)
            )
        })
    }

    pub fn eval(&self, env: &Env) -> Result<Value, String> {
        Ok(match self {
            Expr::Num(r) => Value::Num(r.clone()),
            Expr::Bool(b) => Value::Bool(*b),
            Expr::Var(v) => Value::Num(lookup_var(env.config, *v)?),
            Expr::Tokens(p) => Value::Num(lookup_tokens(env.config, *p)?),
            Expr::OldVar(v) => Value::Num(lookup_var(env.old_config(), *v)?),
            Expr::OldTokens(p) => Value::Num(lookup_tokens(env.old_config(), *p)?),
            Expr::Theta => match env.theta {
                Some(t) => Value::Num(t.clone()),
                None => return Err("theta used outside a fickle expression".into()),
            },
            Expr::Un(op, a) => {
                let v = a.eval(env)?;
                match (op, v) {
                    (UnOp::Neg, Value::Num(x)) => Value::Num(-x),
                    (UnOp::Abs, Value::Num(x)) => Value::Num(x.abs()),
                    (UnOp::Floor, Value::Num(x)) => Value::Num(x.floor()),
                    (UnOp::Not, Value::Bool(b)) => Value::Bool(!b),
                    (op, _) => return Err(format!("type mismatch for {op:?}")),
                }
            }
            Expr::Bin(op, a, b) => {
                if matches!(op, BinOp::And | BinOp::Or) {
                    let l = a.eval_bool(env)?;
                    return match (op, l) {
                        (BinOp::And, false) => Ok(Value::Bool(false)),
                        (BinOp::Or, true) => Ok(Value::Bool(true)),
                        _ => b.eval_bool(env).map(Value::Bool),
                    };
                }
                let x = a.eval_num(env)?;
                let y = b.eval_num(env)?;
                match op {
                    BinOp::Add => Value::Num(x + y),
                    BinOp::Sub => Value::Num(x - y),
                    BinOp::Mul => Value::Num(x * y),
                    BinOp::Div => match x.checked_div(&y) {
                        Some(r) => Value::Num(r),
                        None => return Err("division by zero".into()),
                    },
                    BinOp::Min => Value::Num(x.min(y)),
                    BinOp::Max => Value::Num(x.max(y)),
                    BinOp::Lt => Value::Bool(x < y),
                    BinOp::Le => Value::Bool(x <= y),
                    BinOp::Gt => Value::Bool(x > y),
                    BinOp::Ge => Value::Bool(x >= y),
                    BinOp::Eq => Value::Bool(x == y),
                    BinOp::Ne => Value::Bool(x != y),
                    BinOp::And | BinOp::Or => unreachable!(),
                }
            }
            Expr::If(c, a, b) => {
                if c.eval_bool(env)? {
                    a.eval(env)?
                } else {
                    b.eval(env)?
                }
            }
        })
    }

    pub fn eval_num(&self, env: &Env) -> Result<Rational, String> {
        match self.eval(env)? {
            Value::Num(r) => Ok(r),
            Value::Bool(_) => Err("expected a number, found a boolean".into()),
        }
    }

    pub fn eval_bool(&self, env: &Env) -> Result<bool, String> {
        match self.eval(env)? {
            Value::Bool(b) => Ok(b),
            Value::Num(_) => Err("expected a boolean, found a number".into()),
        }
    }

    /// Replaces configuration references by their values and folds constants.
    /// The result mentions at most `theta`.
    pub fn specialize(&self, config: &Config, old: Option<&Config>) -> Result<Expr, String> {
        let env = Env {
            config,
            old,
            theta: None,
        };
        self.partial(&env)
    }

    fn partial(&self, env: &Env) -> Result<Expr, String> {
        if !self.has_theta() {
            return Ok(match self.eval(env)? {
                Value::Num(r) => Expr::Num(r),
                Value::Bool(b) => Expr::Bool(b),
            });
        }
        Ok(match self {
            Expr::Theta => Expr::Theta,
            Expr::Un(op, a) => Expr::un(*op, a.partial(env)?),
            Expr::Bin(op, a, b) => Expr::bin(*op, a.partial(env)?, b.partial(env)?),
            Expr::If(c, a, b) => match c.partial(env)? {
                Expr::Bool(true) => a.partial(env)?,
                Expr::Bool(false) => b.partial(env)?,
                c => Expr::ite(c, a.partial(env)?, b.partial(env)?),
            },
            _ => unreachable!("leaf without theta handled above"),
        })
    }

    /// Folds subtrees that contain only constants. Never fails: subtrees whose
    /// evaluation errors are left untouched.
    pub fn fold(&self) -> Expr {
        let pure = !self.has_theta() && self.is_config_free();
        if pure {
            let dummy = Config::default();
            if let Ok(v) = self.eval(&Env::new(&dummy)) {
                return match v {
                    Value::Num(r) => Expr::Num(r),
                    Value::Bool(b) => Expr::Bool(b),
                };
            }
            return self.clone();
        }
        match self {
            Expr::Un(op, a) => Expr::un(*op, a.fold()),
            Expr::Bin(op, a, b) => Expr::bin(*op, a.fold(), b.fold()),
            Expr::If(c, a, b) => match c.fold() {
                Expr::Bool(true) => a.fold(),
                Expr::Bool(false) => b.fold(),
                c => Expr::ite(c, a.fold(), b.fold()),
            },
            leaf => leaf.clone(),
        }
    }

    /// Float evaluation of a specialized (theta-only) expression.
    pub fn eval_f64(&self, theta: f64) -> f64 {
        match self {
            Expr::Num(r) => r.to_f64(),
            Expr::Theta => theta,
            Expr::Un(UnOp::Neg, a) => -a.eval_f64(theta),
            Expr::Un(UnOp::Abs, a) => a.eval_f64(theta).abs(),
            Expr::Un(UnOp::Floor, a) => a.eval_f64(theta).floor(),
            Expr::Bin(op, a, b) => {
                let (x, y) = (a.eval_f64(theta), b.eval_f64(theta));
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                    BinOp::Min => x.min(y),
                    BinOp::Max => x.max(y),
                    _ => f64::NAN,
                }
            }
            Expr::If(c, a, b) => match c.eval_bool_f64(theta) {
                Some(true) => a.eval_f64(theta),
                Some(false) => b.eval_f64(theta),
                None => f64::NAN,
            },
            _ => f64::NAN,
        }
    }

    fn eval_bool_f64(&self, theta: f64) -> Option<bool> {
        match self {
            Expr::Bool(b) => Some(*b),
            Expr::Un(UnOp::Not, a) => a.eval_bool_f64(theta).map(|b| !b),
            Expr::Bin(BinOp::And, a, b) => Some(a.eval_bool_f64(theta)? && b.eval_bool_f64(theta)?),
            Expr::Bin(BinOp::Or, a, b) => Some(a.eval_bool_f64(theta)? || b.eval_bool_f64(theta)?),
            Expr::Bin(op, a, b) => {
                let (x, y) = (a.eval_f64(theta), b.eval_f64(theta));
                Some(match op {
                    BinOp::Lt => x < y,
                    BinOp::Le => x <= y,
                    BinOp::Gt => x > y,
                    BinOp::Ge => x >= y,
                    BinOp::Eq => x == y,
                    BinOp::Ne => x != y,
                    _ => return None,
                })
            }
            _ => None,
        }
    }

    /// Source text; parses back to a structurally equal expression.
    pub fn to_source(&self, names: &dyn Names) -> String {
        let mut s = String::new();
        self.write(names, &mut s, 0);
        s
    }

    fn write(&self, n: &dyn Names, out: &mut String, ctx: u8) {
        let prec = self.precedence();
        let paren = prec < ctx;
        if paren {
            out.push('(');
        }
        match self {
            Expr::Num(r) => {
                let _ = write!(out, "{r}");
            }
            Expr::Bool(b) => {
                let _ = write!(out, "{b}");
            }
            Expr::Var(v) => out.push_str(n.var_name(*v)),
            Expr::Tokens(p) => {
                out.push('#');
                out.push_str(n.place_name(*p));
            }
            Expr::OldVar(v) => {
                let _ = write!(out, "old({})", n.var_name(*v));
            }
            Expr::OldTokens(p) => {
                let _ = write!(out, "old(#{})", n.place_name(*p));
            }
            Expr::Theta => out.push_str("theta"),
            Expr::Un(UnOp::Neg, a) => {
                out.push('-');
                // `-3` would read back as a literal, so keep `-(3)` explicit
                let inner = if matches!(**a, Expr::Num(_)) {
                    PREC_ATOM + 1
                } else {
                    PREC_UNARY + 1
                };
                a.write(n, out, inner);
            }
            Expr::Un(UnOp::Not, a) => {
                out.push_str("not ");
                a.write(n, out, PREC_NOT);
            }
            Expr::Un(op, a) => {
                out.push_str(if *op == UnOp::Abs { "abs(" } else { "floor(" });
                a.write(n, out, 0);
                out.push(')');
            }
            Expr::Bin(op @ (BinOp::Min | BinOp::Max), a, b) => {
                out.push_str(if *op == BinOp::Min { "min(" } else { "max(" });
                a.write(n, out, 0);
                out.push_str(", ");
                b.write(n, out, 0);
                out.push(')');
            }
            Expr::Bin(op, a, b) => {
                let (sym, lp, rp) = match op {
                    BinOp::Or => ("or", prec, prec + 1),
                    BinOp::And => ("and", prec, prec + 1),
                    BinOp::Lt => ("<", prec + 1, prec + 1),
                    BinOp::Le => ("<=", prec + 1, prec + 1),
                    BinOp::Gt => (">", prec + 1, prec + 1),
                    BinOp::Ge => (">=", prec + 1, prec + 1),
                    BinOp::Eq => ("==", prec + 1, prec + 1),
                    BinOp::Ne => ("!=", prec + 1, prec + 1),
                    BinOp::Add => ("+", prec, prec + 1),
                    BinOp::Sub => ("-", prec, prec + 1),
                    BinOp::Mul => ("*", prec, prec + 1),
                    BinOp::Div => ("/", prec, prec + 1),
                    BinOp::Min | BinOp::Max => unreachable!(),
                };
                a.write(n, out, lp);
                let _ = write!(out, " {sym} ");
                b.write(n, out, rp);
            }
            Expr::If(c, a, b) => {
                out.push_str("if(");
                c.write(n, out, 0);
                out.push_str(", ");
                a.write(n, out, 0);
                out.push_str(", ");
                b.write(n, out, 0);
                out.push(')');
            }
        }
        if paren {
            out.push(')');
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Or, ..) => PREC_OR,
            Expr::Bin(BinOp::And, ..) => PREC_AND,
            Expr::Un(UnOp::Not, _) => PREC_NOT,
            Expr::Bin(
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne,
                ..,
            ) => PREC_CMP,
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => PREC_ADD,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => PREC_MUL,
            Expr::Un(UnOp::Neg, _) => PREC_UNARY,
            // a negative literal prints with a leading minus
            Expr::Num(r) if r.is_negative() => PREC_UNARY,
            _ => PREC_ATOM,
        }
    }
}

pub(crate) const PREC_OR: u8 = 1;
pub(crate) const PREC_AND: u8 = 2;
pub(crate) const PREC_NOT: u8 = 3;
pub(crate) const PREC_CMP: u8 = 4;
pub(crate) const PREC_ADD: u8 = 5;
pub(crate) const PREC_MUL: u8 = 6;
pub(crate) const PREC_UNARY: u8 = 7;
pub(crate) const PREC_ATOM: u8 = 9;

fn lookup_var(c: &Config, v: VarId) -> Result<Rational, String> {
    c.valuation
        .get(v)
        .cloned()
        .ok_or_else(|| format!("unbound variable #{v}"))
}

fn lookup_tokens(c: &Config, p: PlaceId) -> Result<Rational, String> {
    c.marking
        .get(p)
        .map(|&n| Rational::from(n))
        .ok_or_else(|| format!("unbound place #{p}"))
}

macro_rules! expr_op {
    ($tr:ident, $m:ident, $op:expr) => {
        impl ops::$tr for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::bin($op, self, rhs)
            }
        }
    };
}

expr_op!(Add, add, BinOp::Add);
expr_op!(Sub, sub, BinOp::Sub);
expr_op!(Mul, mul, BinOp::Mul);
expr_op!(Div, div, BinOp::Div);

impl ops::Not for Expr {
    type Output = Expr;
    fn not(self) -> Expr {
        Expr::un(UnOp::Not, self)
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self {
            Expr::Num(r) => Expr::Num(-r),
            e => Expr::un(UnOp::Neg, e),
        }
    }
}

impl From<Rational> for Expr {
    fn from(r: Rational) -> Self {
        Expr::Num(r)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn cfg(marking: Vec<u32>, vals: Vec<Rational>) -> Config {
        Config {
            marking,
            valuation: vals,
        }
    }

    #[test]
    fn theta_plus_one() {
        let c = Config::default();
        let t = q(5, 2);
        let e = Expr::Theta + Expr::int(1);
        assert_eq!(e.eval_num(&Env::new(&c).with_theta(&t)).unwrap(), q(7, 2));
        assert!(e.eval_num(&Env::new(&c)).is_err());
    }

    #[test]
    fn marking_count() {
        let c = cfg(vec![2], vec![]);
        let e = Expr::Tokens(0) * Expr::int(3);
        assert_eq!(e.eval_num(&Env::new(&c)).unwrap(), Rational::int(6));
    }

    #[test]
    fn quantum_over_slope() {
        // Q / abs(f_x), f_x = -x
        let c = cfg(vec![], vec![Rational::int(4000)]);
        let e = Expr::int(500) / (-Expr::Var(0)).abs();
        assert_eq!(e.eval_num(&Env::new(&c)).unwrap(), q(1, 8));
    }

    #[test]
    fn division_by_zero_is_reported() {
        let c = cfg(vec![0], vec![]);
        let e = Expr::int(1) / Expr::Tokens(0);
        assert_eq!(e.eval_num(&Env::new(&c)).unwrap_err(), "division by zero");
    }

    #[test]
    fn specialize_keeps_theta_only() {
        let c = cfg(vec![3], vec![q(1, 2)]);
        let e = Expr::Theta * Expr::Var(0) + Expr::Tokens(0);
        let s = e.specialize(&c, None).unwrap();
        assert_eq!(s, Expr::Theta * Expr::Num(q(1, 2)) + Expr::int(3));
        assert_eq!(s.eval_f64(2.0), 4.0);
    }

    #[test]
    fn old_refers_to_previous_config() {
        let now = cfg(vec![], vec![Rational::int(1)]);
        let before = cfg(vec![], vec![Rational::int(7)]);
        let e = Expr::OldVar(0) - Expr::Var(0);
        assert_eq!(
            e.eval_num(&Env::new(&now).with_old(&before)).unwrap(),
            Rational::int(6)
        );
        assert_eq!(e.eval_num(&Env::new(&now)).unwrap(), Rational::zero());
    }
}
