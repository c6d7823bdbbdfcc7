//! Fourier-Motzkin elimination over rational inequality systems.
//!
//! Independent of the matrix code above; used as a reference in tests.

use std::collections::HashMap;

use super::FiringDomain;
use crate::model::TransId;
use crate::rational::{Rational, TimeBound};

/// `sum coeffs[k] * x_k <= rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ineq {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub nvars: usize,
    pub rows: Vec<Ineq>,
}

impl LinearSystem {
    pub fn new(nvars: usize) -> Self {
        LinearSystem {
            nvars,
            rows: vec![],
        }
    }

    /// System with `x_k >= 0` for every variable.
    pub fn nonnegative(nvars: usize) -> Self {
        let mut s = Self::new(nvars);
        for k in 0..nvars {
            s.add_ge(&[(k, Rational::one())], Rational::zero());
        }
        s
    }

    pub fn add_var(&mut self) -> usize {
        for r in &mut self.rows {
            r.coeffs.push(Rational::zero());
        }
        self.nvars += 1;
        self.nvars - 1
    }

    fn dense(&self, terms: &[(usize, Rational)]) -> Vec<Rational> {
        let mut c = vec![Rational::zero(); self.nvars];
        for (k, a) in terms {
            c[*k] = &c[*k] + a;
        }
        c
    }

    pub fn add_le(&mut self, terms: &[(usize, Rational)], rhs: Rational) {
        let coeffs = self.dense(terms);
        self.rows.push(Ineq { coeffs, rhs });
    }

    pub fn add_ge(&mut self, terms: &[(usize, Rational)], rhs: Rational) {
        let neg: Vec<_> = terms.iter().map(|(k, a)| (*k, -a)).collect();
        self.add_le(&neg, -rhs);
    }

    pub fn add_eq(&mut self, terms: &[(usize, Rational)], rhs: Rational) {
        self.add_le(terms, rhs.clone());
        self.add_ge(terms, rhs);
    }

    /// `x_i - x_j <= b`.
    pub fn add_diff(&mut self, i: usize, j: usize, b: &TimeBound) {
        if let TimeBound::Finite(b) = b {
            self.add_le(&[(i, Rational::one()), (j, -Rational::one())], b.clone());
        }
    }

    /// Constraints of a domain over variables `map[k]`.
    pub fn add_domain(&mut self, d: &FiringDomain, map: &[usize]) {
        for k in 0..d.dim() {
            self.add_ge(&[(map[k], Rational::one())], d.alpha(k));
            if let TimeBound::Finite(b) = d.beta(k) {
                self.add_le(&[(map[k], Rational::one())], b.clone());
            }
            for j in 0..d.dim() {
                if j != k {
                    self.add_diff(map[k], map[j], d.gamma(k, j));
                }
            }
        }
    }

    /// Removes `x_v`. `None` when a contradiction `0 <= negative` appears.
    pub fn eliminate(&self, v: usize) -> Option<LinearSystem> {
        let (mut pos, mut neg, mut rest) = (vec![], vec![], vec![]);
        for r in &self.rows {
            match r.coeffs[v].signum() {
                1 => pos.push(r),
                -1 => neg.push(r),
                _ => rest.push(r.clone()),
            }
        }
        for p in &pos {
            for n in &neg {
                let a = p.coeffs[v].clone();
                let b = -&n.coeffs[v];
                // b * p + a * n cancels x_v
                let coeffs = p
                    .coeffs
                    .iter()
                    .zip(&n.coeffs)
                    .map(|(x, y)| &(&b * x) + &(&a * y))
                    .collect();
                let rhs = &(&b * &p.rhs) + &(&a * &n.rhs);
                rest.push(Ineq { coeffs, rhs });
            }
        }
        LinearSystem {
            nvars: self.nvars,
            rows: rest,
        }
        .normalize()
    }

    /// Scales rows to a unit leading coefficient, drops duplicates and
    /// trivial rows, and detects `0 <= negative`.
    fn normalize(self) -> Option<LinearSystem> {
        let mut best: HashMap<Vec<Rational>, Rational> = HashMap::new();
        let mut order = vec![];
        for r in self.rows {
            let Some(lead) = r.coeffs.iter().find(|c| !c.is_zero()).map(Rational::abs) else {
                if r.rhs.is_negative() {
                    return None;
                }
                continue;
            };
            let coeffs: Vec<Rational> = r.coeffs.iter().map(|c| c / &lead).collect();
            let rhs = &r.rhs / &lead;
            match best.get_mut(&coeffs) {
                Some(b) => {
                    if rhs < *b {
                        *b = rhs;
                    }
                }
                None => {
                    order.push(coeffs.clone());
                    best.insert(coeffs, rhs);
                }
            }
        }
        let rows = order
            .into_iter()
            .map(|c| {
                let rhs = best[&c].clone();
                Ineq { coeffs: c, rhs }
            })
            .collect();
        Some(LinearSystem {
            nvars: self.nvars,
            rows,
        })
    }

    pub fn eliminate_all_but(&self, keep: &[usize]) -> Option<LinearSystem> {
        let mut s = self.clone().normalize()?;
        for v in 0..self.nvars {
            if !keep.contains(&v) {
                s = s.eliminate(v)?;
            }
        }
        Some(s)
    }

    pub fn is_feasible(&self) -> bool {
        self.eliminate_all_but(&[]).is_some()
    }

    /// Supremum of `sum obj * x`; `None` when infeasible.
    pub fn maximize(&self, obj: &[(usize, Rational)]) -> Option<TimeBound> {
        let mut s = self.clone();
        let z = s.add_var();
        let mut terms = obj.to_vec();
        terms.push((z, -Rational::one()));
        s.add_eq(&terms, Rational::zero());
        let only_z = s.eliminate_all_but(&[z])?;
        let mut best = TimeBound::Infinite;
        for r in &only_z.rows {
            let a = &r.coeffs[z];
            if a.is_positive() {
                let b = TimeBound::Finite(&r.rhs / a);
                if b < best {
                    best = b;
                }
            }
        }
        Some(best)
    }
}

/// Tightest difference system containing the projection onto `keep`
/// (`keep[k]` is the system variable labelled `labels[k]`). `None` when the
/// system is infeasible.
pub fn fm_project(
    system: &LinearSystem,
    keep: &[usize],
    labels: &[TransId],
) -> Option<FiringDomain> {
    let proj = system.eliminate_all_but(keep)?;
    let mut d = FiringDomain::unconstrained(labels.to_vec());
    let one = Rational::one();
    for (k, &v) in keep.iter().enumerate() {
        let up = proj.maximize(&[(v, one.clone())])?;
        let down = proj.maximize(&[(v, -&one)])?;
        d.set_beta(k, up);
        // lower bounds of firing dates are finite and nonnegative here
        let lo = match down {
            TimeBound::Finite(r) => -r,
            TimeBound::Infinite => Rational::zero(),
        };
        d.set_alpha(k, &lo);
        for (j, &w) in keep.iter().enumerate() {
            if j != k {
                let g = proj.maximize(&[(v, one.clone()), (w, -&one)])?;
                d.set_gamma(k, j, g);
            }
        }
    }
    d.close()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn r(n: i64) -> Rational {
        Rational::int(n)
    }

    #[test]
    fn shifted_persistent_date() {
        // vars: 0 = x1, 1 = xt, 2 = x1' with x1 - xt = x1'
        let mut s = LinearSystem::nonnegative(3);
        s.add_eq(&[(0, r(1)), (1, r(-1)), (2, r(-1))], r(0));
        s.add_ge(&[(0, r(1))], r(1));
        s.add_le(&[(0, r(1))], r(2));
        s.add_le(&[(1, r(1))], r(1));
        s.add_ge(&[(0, r(1)), (1, r(-1))], r(0));
        let d = fm_project(&s, &[2], &[0]).unwrap();
        assert_eq!(d.alpha(0), r(0));
        assert_eq!(*d.beta(0), TimeBound::from(2));
    }

    #[test]
    fn empty_system_is_unbounded() {
        let s = LinearSystem::nonnegative(2);
        let d = fm_project(&s, &[0, 1], &[0, 1]).unwrap();
        for k in 0..2 {
            assert_eq!(d.alpha(k), r(0));
            assert_eq!(*d.beta(k), TimeBound::Infinite);
        }
        assert_eq!(*d.gamma(0, 1), TimeBound::Infinite);
    }

    #[test]
    fn infeasible_system() {
        let mut s = LinearSystem::nonnegative(1);
        s.add_le(&[(0, r(1))], q(-1, 2));
        assert!(fm_project(&s, &[0], &[0]).is_none());
        assert!(!s.is_feasible());
    }

    #[test]
    fn general_coefficients() {
        // 2x + 3y <= 12, x, y >= 0: max x - y = 6
        let mut s = LinearSystem::nonnegative(2);
        s.add_le(&[(0, r(2)), (1, r(3))], r(12));
        assert_eq!(
            s.maximize(&[(0, r(1)), (1, r(-1))]),
            Some(TimeBound::from(6))
        );
        assert_eq!(s.maximize(&[(1, r(1))]), Some(TimeBound::from(4)));
    }
}
