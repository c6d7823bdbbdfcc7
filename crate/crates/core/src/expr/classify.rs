//! Syntactic classification of fickle functions.

use super::{BinOp, Expr, UnOp};
use crate::error::{Error, Result};
use crate::model::{Config, TransId};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub enum FickleClass {
    Identity,
    Translation,
    Affine,
    GeneralMonotone,
}

/// Endpoint functions `[A(theta), B(theta)]` of a dynamic interval.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FickleFn {
    pub lo: Expr,
    pub hi: Expr,
    /// User assertion that both endpoints increase on `theta >= start`.
    pub monotone: Option<Rational>,
}

impl FickleFn {
    pub fn new(lo: Expr, hi: Expr) -> Self {
        FickleFn {
            lo,
            hi,
            monotone: None,
        }
    }

    pub fn point(e: Expr) -> Self {
        FickleFn {
            lo: e.clone(),
            hi: e,
            monotone: None,
        }
    }

    pub fn monotone_from(mut self, start: Rational) -> Self {
        self.monotone = Some(start);
        self
    }
}

/// Dynamic interval function: per-trigger entries with an optional default.
/// A missing entry is the identity `[theta, theta]`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct FickleSpec {
    pub default: Option<FickleFn>,
    pub by_trigger: Vec<(TransId, FickleFn)>,
}

impl FickleSpec {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn is_trivial(&self) -> bool {
        self.default.is_none() && self.by_trigger.is_empty()
    }

    /// Entry applied when `trigger` fires; `None` means identity.
    pub fn select(&self, trigger: TransId) -> Option<&FickleFn> {
        self.by_trigger
            .iter()
            .find(|(t, _)| *t == trigger)
            .map(|(_, f)| f)
            .or(self.default.as_ref())
    }

    pub fn entries(&self) -> impl Iterator<Item = &FickleFn> {
        self.default
            .iter()
            .chain(self.by_trigger.iter().map(|(_, f)| f))
    }
}

/// Most specific class covering every entry of the spec.
pub fn classify(spec: &FickleSpec) -> Result<FickleClass> {
    let mut class = FickleClass::Identity;
    for f in spec.entries() {
        class = class.max(classify_fn(f)?);
    }
    Ok(class)
}

pub fn classify_fn(f: &FickleFn) -> Result<FickleClass> {
    let (lo, hi) = (f.lo.fold(), f.hi.fold());
    if is_identity(&lo) && is_identity(&hi) {
        return Ok(FickleClass::Identity);
    }
    if is_clamped_shift(&lo) && is_upper_translation(&hi) {
        return Ok(FickleClass::Translation);
    }
    if affine_parts(&lo).is_some() && affine_parts(&hi).is_some() {
        return Ok(FickleClass::Affine);
    }
    match f.monotone {
        Some(ref start) => {
            spot_check(f, start)?;
            Ok(FickleClass::GeneralMonotone)
        }
        None => {
            let bad = if affine_parts(&lo).is_none() {
                &f.lo
            } else {
                &f.hi
            };
            Err(Error::NonLinearTheta(format!("{bad:?}")))
        }
    }
}

/// Samples 64 points from `start` and rejects a visible decrease. Only
/// expressions that do not depend on the configuration can be checked here.
fn spot_check(f: &FickleFn, start: &Rational) -> Result<()> {
    let empty = Config::default();
    for e in [&f.lo, &f.hi] {
        let Ok(s) = e.specialize(&empty, None) else {
            continue;
        };
        let mut prev: Option<Rational> = None;
        for k in 0..64 {
            let theta = start + &Rational::new(k, 4);
            let env = super::Env::new(&empty).with_theta(&theta);
            let Ok(v) = s.eval_num(&env) else { break };
            if let Some(p) = &prev {
                if v < *p {
                    return Err(Error::Model(format!(
                        "fickle function flagged monotone decreases near theta = {theta}"
                    )));
                }
            }
            prev = Some(v);
        }
    }
    Ok(())
}

/// `(slope, intercept)` of an expression affine in theta, both theta-free.
pub(crate) fn affine_parts(e: &Expr) -> Option<(Expr, Expr)> {
    if !e.has_theta() {
        return Some((Expr::int(0), e.clone()));
    }
    match e {
        Expr::Theta => Some((Expr::int(1), Expr::int(0))),
        Expr::Un(UnOp::Neg, a) => {
            let (s, c) = affine_parts(a)?;
            Some((-s, -c))
        }
        Expr::Bin(op @ (BinOp::Add | BinOp::Sub), a, b) => {
            let (s1, c1) = affine_parts(a)?;
            let (s2, c2) = affine_parts(b)?;
            Some((Expr::bin(*op, s1, s2), Expr::bin(*op, c1, c2)))
        }
        Expr::Bin(BinOp::Mul, a, b) => {
            if !a.has_theta() {
                let (s, c) = affine_parts(b)?;
                Some(((**a).clone() * s, (**a).clone() * c))
            } else if !b.has_theta() {
                let (s, c) = affine_parts(a)?;
                Some((s * (**b).clone(), c * (**b).clone()))
            } else {
                None
            }
        }
        Expr::Bin(BinOp::Div, a, b) if !b.has_theta() => {
            let (s, c) = affine_parts(a)?;
            Some((s / (**b).clone(), c / (**b).clone()))
        }
        Expr::If(c, a, b) if !c.has_theta() => {
            let (s1, c1) = affine_parts(a)?;
            let (s2, c2) = affine_parts(b)?;
            Some((
                Expr::ite((**c).clone(), s1, s2),
                Expr::ite((**c).clone(), c1, c2),
            ))
        }
        _ => None,
    }
}

fn folds_to(e: &Expr, n: i64) -> bool {
    e.fold() == Expr::int(n)
}

/// `theta + c` with slope syntactically one.
fn is_shift(e: &Expr) -> bool {
    matches!(affine_parts(e), Some((s, _)) if folds_to(&s, 1))
}

fn is_identity(e: &Expr) -> bool {
    match e {
        Expr::Bin(BinOp::Max, a, b) if folds_to(a, 0) => is_identity(b),
        Expr::Bin(BinOp::Max, a, b) if folds_to(b, 0) => is_identity(a),
        _ => matches!(affine_parts(e), Some((s, c)) if folds_to(&s, 1) && folds_to(&c, 0)),
    }
}

/// `theta + c` or `max(0, theta + c)`.
fn is_clamped_shift(e: &Expr) -> bool {
    match e {
        Expr::Bin(BinOp::Max, a, b) if folds_to(a, 0) => is_shift(b),
        Expr::Bin(BinOp::Max, a, b) if folds_to(b, 0) => is_shift(a),
        _ => is_shift(e),
    }
}

/// Clamped shift, or `max(A, theta + c)` with `A` a clamped shift.
fn is_upper_translation(e: &Expr) -> bool {
    if is_clamped_shift(e) {
        return true;
    }
    match e {
        Expr::Bin(BinOp::Max, a, b) => {
            (is_clamped_shift(a) && is_shift(b)) || (is_shift(a) && is_clamped_shift(b))
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn th() -> Expr {
        Expr::Theta
    }

    #[test]
    fn identity_and_translation() {
        assert_eq!(
            classify_fn(&FickleFn::point(th())).unwrap(),
            FickleClass::Identity
        );
        let t1 = FickleFn::point(th() + Expr::int(1));
        assert_eq!(classify_fn(&t1).unwrap(), FickleClass::Translation);
        let clamped = Expr::int(0).max(th() + Expr::Tokens(0) - Expr::int(2));
        let upper = clamped.clone().max(th() + Expr::int(1));
        assert_eq!(
            classify_fn(&FickleFn::new(clamped, upper)).unwrap(),
            FickleClass::Translation
        );
    }

    #[test]
    fn affine_with_config_coefficients() {
        let f = FickleFn::point(Expr::Var(0) / Expr::Var(1) * th());
        assert_eq!(classify_fn(&f).unwrap(), FickleClass::Affine);
        let g = FickleFn::point(Expr::ite(
            Expr::Var(0).gt(Expr::int(0)),
            th() * Expr::int(2),
            Expr::int(3) - th(),
        ));
        assert_eq!(classify_fn(&g).unwrap(), FickleClass::Affine);
    }

    #[test]
    fn quadratic_needs_flag() {
        let sq = (th() - Expr::Num(q(1, 2))) * (th() - Expr::Num(q(1, 2)));
        assert!(matches!(
            classify_fn(&FickleFn::point(sq.clone())),
            Err(Error::NonLinearTheta(_))
        ));
        let flagged = FickleFn::point(sq).monotone_from(q(1, 2));
        assert_eq!(classify_fn(&flagged).unwrap(), FickleClass::GeneralMonotone);
    }

    #[test]
    fn wrong_monotone_flag_is_caught() {
        let dec = FickleFn::point(Expr::int(10) - th() * th()).monotone_from(Rational::zero());
        assert!(classify_fn(&dec).is_err());
    }

    #[test]
    fn spec_takes_most_general_entry() {
        let mut s = FickleSpec::identity();
        assert_eq!(classify(&s).unwrap(), FickleClass::Identity);
        s.by_trigger.push((0, FickleFn::point(th() + Expr::int(1))));
        assert_eq!(classify(&s).unwrap(), FickleClass::Translation);
        s.default = Some(FickleFn::point(th() * Expr::int(2)));
        assert_eq!(classify(&s).unwrap(), FickleClass::Affine);
        assert_eq!(s.select(0).unwrap().lo, th() + Expr::int(1));
        assert_eq!(s.select(5).unwrap().lo, th() * Expr::int(2));
    }
}
