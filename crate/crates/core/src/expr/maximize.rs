//! Functions of theta and the bounded maximization `sup B(θ) − A(θ − μ)`.
//!
//! Piecewise-affine and low-degree polynomial functions are handled exactly;
//! anything else goes through a sampled search rounded up to a fixed grid.

use super::{BinOp, Expr, UnOp};
use crate::error::{Error, Result};
use crate::model::Config;
use crate::rational::{Rational, TimeBound};

const GRID: usize = 1024;
const GOLDEN_ITERS: usize = 80;
const REL_TOL: f64 = 1e-9;

/// Continuous piecewise-affine function on the reals. Piece `k` applies on
/// `[breaks[k-1], breaks[k]]`, with the first and last pieces unbounded.
#[derive(Debug, Clone, PartialEq)]
pub struct Pwa {
    breaks: Vec<Rational>,
    pieces: Vec<(Rational, Rational)>,
}

impl Pwa {
    pub fn constant(c: Rational) -> Self {
        Pwa {
            breaks: vec![],
            pieces: vec![(Rational::zero(), c)],
        }
    }

    pub fn theta() -> Self {
        Pwa {
            breaks: vec![],
            pieces: vec![(Rational::one(), Rational::zero())],
        }
    }

    pub fn from_expr(e: &Expr) -> Option<Pwa> {
        Some(match e {
            Expr::Num(c) => Pwa::constant(c.clone()),
            Expr::Theta => Pwa::theta(),
            Expr::Un(UnOp::Neg, a) => Pwa::from_expr(a)?.scale(&-Rational::one()),
            Expr::Un(UnOp::Abs, a) => {
                let f = Pwa::from_expr(a)?;
                let g = f.scale(&-Rational::one());
                f.max(&g)
            }
            Expr::Bin(BinOp::Add, a, b) => Pwa::from_expr(a)?.add(&Pwa::from_expr(b)?),
            Expr::Bin(BinOp::Sub, a, b) => {
                Pwa::from_expr(a)?.add(&Pwa::from_expr(b)?.scale(&-Rational::one()))
            }
            Expr::Bin(BinOp::Mul, a, b) => {
                let (f, g) = (Pwa::from_expr(a)?, Pwa::from_expr(b)?);
                match (f.as_constant(), g.as_constant()) {
                    (Some(c), _) => g.scale(&c),
                    (_, Some(c)) => f.scale(&c),
                    _ => return None,
                }
            }
            Expr::Bin(BinOp::Div, a, b) => {
                let c = Pwa::from_expr(b)?.as_constant()?;
                Pwa::from_expr(a)?.scale(&c.recip()?)
            }
            Expr::Bin(BinOp::Max, a, b) => Pwa::from_expr(a)?.max(&Pwa::from_expr(b)?),
            Expr::Bin(BinOp::Min, a, b) => {
                let m = Rational::int(-1);
                let f = Pwa::from_expr(a)?.scale(&m);
                let g = Pwa::from_expr(b)?.scale(&m);
                f.max(&g).scale(&m)
            }
            _ => return None,
        })
    }

    fn as_constant(&self) -> Option<Rational> {
        match self.pieces.as_slice() {
            [(s, c)] if s.is_zero() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let k = self.breaks.partition_point(|b| b < x);
        let (s, c) = &self.pieces[k];
        s * x + c
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.pieces.iter().all(|(s, _)| !s.is_negative())
    }

    pub fn scale(&self, k: &Rational) -> Pwa {
        Pwa {
            breaks: self.breaks.clone(),
            pieces: self.pieces.iter().map(|(s, c)| (s * k, c * k)).collect(),
        }
    }

    /// `x ↦ f(x − mu)`.
    pub fn shift(&self, mu: &Rational) -> Pwa {
        Pwa {
            breaks: self.breaks.iter().map(|b| b + mu).collect(),
            pieces: self
                .pieces
                .iter()
                .map(|(s, c)| (s.clone(), c - &(s * mu)))
                .collect(),
        }
    }

    fn union_breaks(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
        let mut v: Vec<Rational> = a.iter().chain(b).cloned().collect();
        v.sort();
        v.dedup();
        v
    }

    fn sample(breaks: &[Rational], k: usize) -> Rational {
        let n = breaks.len();
        if n == 0 {
            Rational::zero()
        } else if k == 0 {
            &breaks[0] - &Rational::one()
        } else if k == n {
            &breaks[n - 1] + &Rational::one()
        } else {
            (&breaks[k - 1] + &breaks[k]) / Rational::int(2)
        }
    }

    fn piece_at(&self, x: &Rational) -> &(Rational, Rational) {
        &self.pieces[self.breaks.partition_point(|b| b < x)]
    }

    pub fn add(&self, o: &Pwa) -> Pwa {
        let breaks = Self::union_breaks(&self.breaks, &o.breaks);
        let pieces = (0..=breaks.len())
            .map(|k| {
                let x = Self::sample(&breaks, k);
                let (s1, c1) = self.piece_at(&x);
                let (s2, c2) = o.piece_at(&x);
                (s1 + s2, c1 + c2)
            })
            .collect();
        Pwa { breaks, pieces }.simplify()
    }

    pub fn max(&self, o: &Pwa) -> Pwa {
        let mut breaks = Self::union_breaks(&self.breaks, &o.breaks);
        let mut extra = vec![];
        for k in 0..=breaks.len() {
            let x = Self::sample(&breaks, k);
            let (s1, c1) = self.piece_at(&x);
            let (s2, c2) = o.piece_at(&x);
            if s1 != s2 {
                let cross = (c2 - c1) / (s1 - s2);
                let above = k == 0 || cross > breaks[k - 1];
                let below = k == breaks.len() || cross < breaks[k];
                if above && below {
                    extra.push(cross);
                }
            }
        }
        breaks = Self::union_breaks(&breaks, &extra);
        let pieces = (0..=breaks.len())
            .map(|k| {
                let x = Self::sample(&breaks, k);
                let p = self.piece_at(&x);
                let q = o.piece_at(&x);
                if &p.0 * &x + &p.1 >= &q.0 * &x + &q.1 {
                    p.clone()
                } else {
                    q.clone()
                }
            })
            .collect();
        Pwa { breaks, pieces }.simplify()
    }

    fn simplify(mut self) -> Pwa {
        let mut k = 0;
        while k < self.breaks.len() {
            if self.pieces[k] == self.pieces[k + 1] {
                self.breaks.remove(k);
                self.pieces.remove(k + 1);
            } else {
                k += 1;
            }
        }
        self
    }

    fn candidates(&self, lo: &Rational, hi: &TimeBound) -> Vec<Rational> {
        let mut xs = vec![lo.clone()];
        for b in &self.breaks {
            if b > lo && TimeBound::Finite(b.clone()) < *hi {
                xs.push(b.clone());
            }
        }
        if let TimeBound::Finite(h) = hi {
            xs.push(h.clone());
        }
        xs
    }

    pub fn sup(&self, lo: &Rational, hi: &TimeBound) -> TimeBound {
        if hi.is_infinite() && self.pieces.last().unwrap().0.is_positive() {
            return TimeBound::Infinite;
        }
        let best = self
            .candidates(lo, hi)
            .iter()
            .map(|x| self.eval(x))
            .max()
            .unwrap();
        TimeBound::Finite(best)
    }

    /// `None` when the infimum is `-inf`.
    pub fn inf(&self, lo: &Rational, hi: &TimeBound) -> Option<Rational> {
        if hi.is_infinite() && self.pieces.last().unwrap().0.is_negative() {
            return None;
        }
        self.candidates(lo, hi).iter().map(|x| self.eval(x)).min()
    }
}

/// Polynomial in theta, lowest degree first, no trailing zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(Vec<Rational>);

impl Poly {
    fn norm(mut v: Vec<Rational>) -> Poly {
        while v.last().is_some_and(|c| c.is_zero()) {
            v.pop();
        }
        Poly(v)
    }

    pub fn constant(c: Rational) -> Poly {
        Poly::norm(vec![c])
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    fn coeff(&self, k: usize) -> Rational {
        self.0.get(k).cloned().unwrap_or_default()
    }

    pub fn from_expr(e: &Expr) -> Option<Poly> {
        Some(match e {
            Expr::Num(c) => Poly::constant(c.clone()),
            Expr::Theta => Poly(vec![Rational::zero(), Rational::one()]),
            Expr::Un(UnOp::Neg, a) => Poly::from_expr(a)?.scale(&Rational::int(-1)),
            Expr::Bin(BinOp::Add, a, b) => Poly::from_expr(a)?.add(&Poly::from_expr(b)?),
            Expr::Bin(BinOp::Sub, a, b) => {
                Poly::from_expr(a)?.add(&Poly::from_expr(b)?.scale(&Rational::int(-1)))
            }
            Expr::Bin(BinOp::Mul, a, b) => Poly::from_expr(a)?.mul(&Poly::from_expr(b)?),
            Expr::Bin(BinOp::Div, a, b) => {
                let d = Poly::from_expr(b)?;
                if d.degree() != 0 {
                    return None;
                }
                Poly::from_expr(a)?.scale(&d.coeff(0).recip()?)
            }
            _ => return None,
        })
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly::norm((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        Poly::norm(self.0.iter().map(|c| c * k).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.0.is_empty() || o.0.is_empty() {
            return Poly(vec![]);
        }
        let mut v = vec![Rational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                v[i + j] = &v[i + j] + &(a * b);
            }
        }
        Poly::norm(v)
    }

    /// `x ↦ p(x − mu)`.
    pub fn shift(&self, mu: &Rational) -> Poly {
        let lin = Poly::norm(vec![-mu, Rational::one()]);
        let mut acc = Poly(vec![]);
        for c in self.0.iter().rev() {
            acc = acc.mul(&lin).add(&Poly::constant(c.clone()));
        }
        acc
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.0.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    /// Exact supremum for degree at most two; `None` otherwise.
    fn sup_exact(&self, lo: &Rational, hi: &TimeBound) -> Option<TimeBound> {
        let (b, a) = (self.coeff(1), self.coeff(2));
        match self.degree() {
            0 | 1 => {
                if hi.is_infinite() && b.is_positive() {
                    return Some(TimeBound::Infinite);
                }
            }
            2 => {
                if hi.is_infinite() && a.is_positive() {
                    return Some(TimeBound::Infinite);
                }
            }
            _ => return None,
        }
        let mut best = self.eval(lo);
        if let TimeBound::Finite(h) = hi {
            best = best.max(self.eval(h));
        }
        if self.degree() == 2 && a.is_negative() {
            let vertex = -(b / (Rational::int(2) * a));
            if vertex > *lo && TimeBound::Finite(vertex.clone()) < *hi {
                best = best.max(self.eval(&vertex));
            }
        }
        Some(TimeBound::Finite(best))
    }
}

/// A fickle endpoint specialized to one configuration.
#[derive(Debug, Clone)]
pub struct ThetaFn {
    expr: Expr,
    pwa: Option<Pwa>,
    poly: Option<Poly>,
}

impl ThetaFn {
    pub fn identity() -> ThetaFn {
        ThetaFn::compile(Expr::Theta)
    }

    /// `expr` must mention no configuration references.
    pub fn compile(expr: Expr) -> ThetaFn {
        ThetaFn {
            pwa: Pwa::from_expr(&expr),
            poly: Poly::from_expr(&expr),
            expr,
        }
    }

    pub fn specialize(expr: &Expr, config: &Config, old: Option<&Config>) -> Result<ThetaFn> {
        let e = expr
            .specialize(config, old)
            .map_err(|m| Error::eval("fickle", m))?;
        Ok(ThetaFn::compile(e))
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn is_identity(&self) -> bool {
        self.expr == Expr::Theta
    }

    pub fn eval(&self, x: &Rational) -> Result<Rational> {
        if let Some(p) = &self.pwa {
            return Ok(p.eval(x));
        }
        let empty = Config::default();
        let env = super::Env::new(&empty).with_theta(x);
        self.expr
            .eval_num(&env)
            .map_err(|m| Error::eval("fickle", m))
    }

    /// Value at a bound, with `f(inf) = inf`.
    pub fn eval_bound(&self, x: &TimeBound) -> Result<TimeBound> {
        match x {
            TimeBound::Finite(r) => Ok(TimeBound::Finite(self.eval(r)?)),
            TimeBound::Infinite => Ok(TimeBound::Infinite),
        }
    }

    /// Known to be nondecreasing (exact for piecewise-affine functions;
    /// other shapes are trusted to carry a monotone assertion).
    pub fn is_nondecreasing(&self) -> bool {
        self.pwa.as_ref().is_none_or(Pwa::is_nondecreasing)
    }

    pub fn pwa(&self) -> Option<&Pwa> {
        self.pwa.as_ref()
    }
}

/// `sup { B(θ) − A(θ − μ) | lo ≤ θ ≤ hi }`, never below the endpoint values.
pub fn maximize_diff(
    b: &ThetaFn,
    a: &ThetaFn,
    mu: &Rational,
    lo: &Rational,
    hi: &TimeBound,
) -> Result<TimeBound> {
    if let (Some(pb), Some(pa)) = (&b.poly, &a.poly) {
        let g = pb.add(&pa.shift(mu).scale(&Rational::int(-1)));
        if let Some(v) = g.sup_exact(lo, hi) {
            return Ok(v);
        }
    }
    if let (Some(pb), Some(pa)) = (&b.pwa, &a.pwa) {
        let g = pb.add(&pa.shift(mu).scale(&Rational::int(-1)));
        return Ok(g.sup(lo, hi));
    }
    let TimeBound::Finite(hi) = hi else {
        return Err(Error::UnsupportedUnboundedMax(format!(
            "{:?} / {:?}",
            b.expr, a.expr
        )));
    };
    numeric_sup(b, a, mu, lo, hi)
}

fn numeric_sup(
    b: &ThetaFn,
    a: &ThetaFn,
    mu: &Rational,
    lo: &Rational,
    hi: &Rational,
) -> Result<TimeBound> {
    let exact = |x: &Rational| -> Result<Rational> { Ok(b.eval(x)? - a.eval(&(x - mu))?) };
    let endpoint = exact(lo)?.max(exact(hi)?);
    let muf = mu.to_f64();
    let g = |x: f64| b.expr.eval_f64(x) - a.expr.eval_f64(x - muf);
    let (l, h) = (lo.to_f64(), hi.to_f64());
    let step = (h - l) / GRID as f64;
    let mut samples: Vec<(f64, usize)> = (0..=GRID).map(|k| (g(l + k as f64 * step), k)).collect();
    if samples.iter().any(|(v, _)| v.is_nan()) {
        return Err(Error::eval(
            "fickle",
            "numeric maximization hit an undefined value",
        ));
    }
    samples.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut best = samples[0].0;
    for &(_, k) in samples.iter().take(3) {
        let mut x0 = l + k.saturating_sub(1) as f64 * step;
        let mut x1 = (l + (k + 1) as f64 * step).min(h);
        let r = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..GOLDEN_ITERS {
            let c = x1 - r * (x1 - x0);
            let d = x0 + r * (x1 - x0);
            if g(c) >= g(d) {
                x1 = d;
            } else {
                x0 = c;
            }
        }
        best = best.max(g((x0 + x1) / 2.0));
    }
    let up = round_up(best)?;
    Ok(TimeBound::Finite(up.max(endpoint)))
}

/// Outward rounding to a power-of-two grid finer than the relative tolerance,
/// plus one grid step to absorb float error.
fn round_up(v: f64) -> Result<Rational> {
    let tol = REL_TOL * v.abs().max(1.0);
    let step = 2f64.powi(tol.log2().floor() as i32);
    let k = (v / step).ceil() + 1.0;
    let r = Rational::from_f64(k * step)
        .ok_or_else(|| Error::eval("fickle", "non-finite maximization result"))?;
    Ok(r)
}
