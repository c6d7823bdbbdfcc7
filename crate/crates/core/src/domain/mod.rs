//! Firing domains as difference-bound matrices.
//!
//! Index 0 is the zero reference; variable `k` sits at index `k + 1`, and
//! `m[i][j]` bounds `x_i − x_j` from above. Thus `beta_k = m[k][0]` and
//! `alpha_k = −m[0][k]`.

pub mod fm;

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{Net, TimeInterval, TransId};
use crate::rational::{Rational, TimeBound};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiringDomain {
    vars: Vec<TransId>,
    m: Vec<TimeBound>,
    closed: bool,
}

impl FiringDomain {
    /// Unconstrained (nonnegative) dates for `vars`, which must be sorted.
    pub fn unconstrained(vars: Vec<TransId>) -> Self {
        let n = vars.len() + 1;
        let mut m = vec![TimeBound::Infinite; n * n];
        for i in 0..n {
            m[i * n + i] = TimeBound::zero();
            m[i] = TimeBound::zero();
        }
        FiringDomain {
            vars,
            m,
            closed: false,
        }
    }

    /// Product of intervals, in closure form.
    pub fn from_box(vars: Vec<TransId>, ivs: &[TimeInterval]) -> Self {
        let mut d = Self::unconstrained(vars);
        for (k, iv) in ivs.iter().enumerate() {
            d.set_alpha(k, &iv.lo);
            d.set_beta(k, iv.hi.clone());
        }
        d.close()
            .expect("a product of nonempty intervals is consistent")
    }

    /// Reduced form from explicit bounds; not closed.
    pub fn from_bounds(
        vars: Vec<TransId>,
        alpha: &[Rational],
        beta: &[TimeBound],
        gamma: &[(usize, usize, TimeBound)],
    ) -> Self {
        let mut d = Self::unconstrained(vars);
        for k in 0..alpha.len() {
            d.set_alpha(k, &alpha[k]);
            d.set_beta(k, beta[k].clone());
        }
        for (i, j, g) in gamma {
            d.tighten_gamma(*i, *j, g.clone());
        }
        d
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[TransId] {
        &self.vars
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn position(&self, t: TransId) -> Option<usize> {
        self.vars.binary_search(&t).ok()
    }

    fn n(&self) -> usize {
        self.vars.len() + 1
    }

    /// Raw matrix entry over extended indices (0 = zero node).
    pub fn entry(&self, i: usize, j: usize) -> &TimeBound {
        &self.m[i * self.n() + j]
    }

    fn set(&mut self, i: usize, j: usize, v: TimeBound) {
        let n = self.n();
        self.m[i * n + j] = v;
        self.closed = false;
    }

    pub fn alpha(&self, k: usize) -> Rational {
        match self.entry(0, k + 1) {
            TimeBound::Finite(r) => -r,
            TimeBound::Infinite => Rational::zero(),
        }
    }

    pub fn beta(&self, k: usize) -> &TimeBound {
        self.entry(k + 1, 0)
    }

    /// Upper bound of `x_i − x_j`.
    pub fn gamma(&self, i: usize, j: usize) -> &TimeBound {
        self.entry(i + 1, j + 1)
    }

    pub fn set_alpha(&mut self, k: usize, a: &Rational) {
        self.set(0, k + 1, TimeBound::Finite(-a));
    }

    pub fn set_beta(&mut self, k: usize, b: TimeBound) {
        self.set(k + 1, 0, b);
    }

    pub fn set_gamma(&mut self, i: usize, j: usize, g: TimeBound) {
        self.set(i + 1, j + 1, g);
    }

    pub fn tighten_gamma(&mut self, i: usize, j: usize, g: TimeBound) {
        if g < *self.gamma(i, j) {
            self.set_gamma(i, j, g);
        }
    }

    /// Floyd-Warshall tightening; `None` when the system has no solution.
    pub fn close(self) -> Option<Self> {
        match self.int_matrix() {
            Some(m) => self.close_int(m),
            None => self.close_exact(),
        }
    }

    /// Entries as small integers (`None` for +inf), when they all are.
    fn int_matrix(&self) -> Option<Vec<Option<i64>>> {
        const LIMIT: i64 = 1 << 40;
        self.m
            .iter()
            .map(|b| match b {
                TimeBound::Infinite => Some(None),
                TimeBound::Finite(r) => match r.as_small() {
                    Some((v, 1)) if v.abs() < LIMIT => Some(Some(v)),
                    _ => None,
                },
            })
            .collect()
    }

    fn close_int(mut self, mut m: Vec<Option<i64>>) -> Option<Self> {
        let n = self.n();
        for k in 0..n {
            for i in 0..n {
                let Some(ik) = m[i * n + k] else { continue };
                for j in 0..n {
                    if let Some(kj) = m[k * n + j] {
                        let via = ik + kj;
                        let cur = &mut m[i * n + j];
                        if cur.is_none_or(|c| via < c) {
                            *cur = Some(via);
                        }
                    }
                }
            }
            if (0..n).any(|i| m[i * n + i].is_some_and(|d| d < 0)) {
                return None;
            }
        }
        for (dst, v) in self.m.iter_mut().zip(m) {
            *dst = match v {
                Some(v) => TimeBound::Finite(Rational::int(v)),
                None => TimeBound::Infinite,
            };
        }
        self.closed = true;
        Some(self)
    }

    fn close_exact(mut self) -> Option<Self> {
        let n = self.n();
        for k in 0..n {
            for i in 0..n {
                let ik = self.m[i * n + k].clone();
                let TimeBound::Finite(ik) = ik else { continue };
                for j in 0..n {
                    if let TimeBound::Finite(kj) = &self.m[k * n + j] {
                        let via = &ik + kj;
                        let cur = &mut self.m[i * n + j];
                        let better = match cur {
                            TimeBound::Finite(c) => via < *c,
                            TimeBound::Infinite => true,
                        };
                        if better {
                            *cur = TimeBound::Finite(via);
                        }
                    }
                }
            }
            if (0..n).any(|i| self.m[i * n + i] < TimeBound::zero()) {
                return None;
            }
        }
        self.closed = true;
        Some(self)
    }

    /// Can `t` fire first, i.e. is `D ∧ {x_k ≥ x_t}` satisfiable?
    pub fn consistent_with_firer(&self, t: TransId) -> Result<bool> {
        let i = self.position(t).ok_or_else(|| {
            Error::DomainMismatch(format!("transition #{t} is not in the domain"))
        })?;
        if !self.closed {
            return Err(Error::DomainMismatch("domain is not closed".into()));
        }
        // for closed D the added constraints x_t - x_k <= 0 create a negative
        // cycle exactly when some gamma[k][t] is negative
        Ok((0..self.dim()).all(|k| k == i || *self.gamma(k, i) >= TimeBound::zero()))
    }

    /// Coefficient equality of closure forms.
    pub fn equal(&self, other: &Self) -> bool {
        self.vars == other.vars && self.m == other.m
    }

    /// Solution membership, used by tests and samplers.
    pub fn contains(&self, point: &[Rational]) -> bool {
        let n = self.n();
        let val = |i: usize| {
            if i == 0 {
                Rational::zero()
            } else {
                point[i - 1].clone()
            }
        };
        (0..n).all(|i| {
            (0..n).all(|j| match self.entry(i, j) {
                TimeBound::Finite(b) => &val(i) - &val(j) <= *b,
                TimeBound::Infinite => true,
            })
        })
    }

    /// One line per bound in variable order; `name` renders a transition.
    pub fn dump_with(&self, name: &dyn Fn(TransId) -> String) -> String {
        let mut s = String::new();
        for (k, &t) in self.vars.iter().enumerate() {
            let _ = writeln!(s, "alpha {} = {}", name(t), self.alpha(k));
            let _ = writeln!(s, "beta {} = {}", name(t), self.beta(k));
        }
        for (i, &ti) in self.vars.iter().enumerate() {
            for (j, &tj) in self.vars.iter().enumerate() {
                if i != j {
                    let _ = writeln!(s, "gamma {} {} = {}", name(ti), name(tj), self.gamma(i, j));
                }
            }
        }
        s
    }

    pub fn dump(&self, net: &Net) -> String {
        self.dump_with(&|t| net.transitions[t].name.clone())
    }

    /// Canonical bytes; the diagonal is omitted.
    pub fn encode_into(&self, out: &mut Vec<u8>) {
        put_varint(out, self.vars.len() as u64);
        for &t in &self.vars {
            put_varint(out, t as u64);
        }
        let n = self.n();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    encode_bound(out, &self.m[i * n + j]);
                }
            }
        }
    }

    pub fn decode(buf: &mut &[u8]) -> Option<Self> {
        let nv = get_varint(buf)? as usize;
        let vars = (0..nv)
            .map(|_| get_varint(buf).map(|v| v as TransId))
            .collect::<Option<Vec<_>>>()?;
        let n = nv + 1;
        let mut m = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                m.push(if i == j {
                    TimeBound::zero()
                } else {
                    decode_bound(buf)?
                });
            }
        }
        Some(FiringDomain {
            vars,
            m,
            closed: true,
        })
    }
}

pub(crate) fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    loop {
        let b = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(b);
            return;
        }
        out.push(b | 0x80);
    }
}

pub(crate) fn get_varint(buf: &mut &[u8]) -> Option<u64> {
    let mut v = 0u64;
    let mut shift = 0;
    loop {
        let (&b, rest) = buf.split_first()?;
        *buf = rest;
        v |= ((b & 0x7f) as u64) << shift;
        if b & 0x80 == 0 {
            return Some(v);
        }
        shift += 7;
    }
}

fn zigzag(n: i64) -> u64 {
    ((n << 1) ^ (n >> 63)) as u64
}

fn unzigzag(v: u64) -> i64 {
    ((v >> 1) as i64) ^ -((v & 1) as i64)
}

// tag 0: +inf, 1: big rational as text, d + 1 for d >= 1: small with denominator d
fn encode_bound(out: &mut Vec<u8>, b: &TimeBound) {
    match b {
        TimeBound::Infinite => put_varint(out, 0),
        TimeBound::Finite(r) => encode_rational(out, r),
    }
}

pub(crate) fn encode_rational(out: &mut Vec<u8>, r: &Rational) {
    match r.as_small() {
        Some((n, d)) => {
            put_varint(out, d as u64 + 1);
            put_varint(out, zigzag(n));
        }
        None => {
            put_varint(out, 1);
            let s = r.to_string();
            put_varint(out, s.len() as u64);
            out.extend_from_slice(s.as_bytes());
        }
    }
}

fn decode_bound(buf: &mut &[u8]) -> Option<TimeBound> {
    if buf.first() == Some(&0) {
        *buf = &buf[1..];
        return Some(TimeBound::Infinite);
    }
    decode_rational(buf).map(TimeBound::Finite)
}

pub(crate) fn decode_rational(buf: &mut &[u8]) -> Option<Rational> {
    match get_varint(buf)? {
        0 => None,
        1 => {
            let len = get_varint(buf)? as usize;
            let (s, rest) = buf.split_at_checked(len)?;
            *buf = rest;
            std::str::from_utf8(s).ok()?.parse().ok()
        }
        d => {
            let n = unzigzag(get_varint(buf)?);
            Some(Rational::new(n, d as i64 - 1))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn iv(lo: i64, hi: i64) -> TimeInterval {
        TimeInterval::new(lo.into(), hi.into()).unwrap()
    }

    #[test]
    fn box_closure_adds_differences() {
        let d = FiringDomain::from_box(vec![0, 1], &[iv(1, 2), iv(2, 3)]);
        assert_eq!(*d.gamma(0, 1), TimeBound::zero());
        assert_eq!(*d.gamma(1, 0), TimeBound::from(2));
        assert_eq!(d.dump_with(&|t| format!("t{}", t + 1)),
            "alpha t1 = 1\nbeta t1 = 2\nalpha t2 = 2\nbeta t2 = 3\ngamma t1 t2 = 0\ngamma t2 t1 = 2\n");
    }

    #[test]
    fn empty_box_is_inconsistent() {
        let mut d = FiringDomain::unconstrained(vec![0]);
        d.set_beta(0, 1.into());
        d.set_alpha(0, &Rational::int(3));
        assert!(d.close().is_none());
    }

    #[test]
    fn close_is_fixpoint() {
        let d = FiringDomain::from_box(vec![0, 1], &[iv(1, 2), iv(2, 3)]);
        assert!(d.clone().close().unwrap().equal(&d));
    }

    #[test]
    fn firer_test() {
        let d = FiringDomain::from_box(vec![0, 1], &[iv(1, 2), iv(2, 3)]);
        assert!(d.consistent_with_firer(0).unwrap());
        let e = FiringDomain::from_box(vec![0, 1], &[iv(0, 1), iv(3, 4)]);
        assert!(!e.consistent_with_firer(1).unwrap());
        let s = FiringDomain::from_box(vec![4], &[iv(7, 9)]);
        assert!(s.consistent_with_firer(4).unwrap());
        assert!(s.consistent_with_firer(3).is_err());
    }

    #[test]
    fn different_boxes_differ() {
        let a = FiringDomain::from_box(vec![0, 1], &[iv(1, 2), iv(2, 3)]);
        let b = FiringDomain::from_box(vec![0, 1], &[iv(1, 2), iv(2, 4)]);
        assert!(!a.equal(&b));
    }

    #[test]
    fn redundant_constraints_vanish_after_close() {
        let base = FiringDomain::from_bounds(
            vec![0, 1],
            &[1.into(), 2.into()],
            &[2.into(), 3.into()],
            &[],
        );
        let extra = FiringDomain::from_bounds(
            vec![0, 1],
            &[1.into(), 2.into()],
            &[2.into(), 3.into()],
            &[(1, 0, 5.into())],
        );
        assert!(!base.equal(&extra));
        assert!(base.close().unwrap().equal(&extra.close().unwrap()));
    }

    #[test]
    fn encoding_round_trips() {
        let mut d = FiringDomain::from_box(
            vec![2, 5],
            &[
                iv(1, 2),
                TimeInterval::new(q(1, 3), TimeBound::Infinite).unwrap(),
            ],
        );
        d.set_gamma(
            0,
            1,
            TimeBound::Finite(Rational::int(i64::MAX) * Rational::int(4)),
        );
        let mut buf = vec![];
        d.encode_into(&mut buf);
        let back = FiringDomain::decode(&mut buf.as_slice()).unwrap();
        assert_eq!(back.m, d.m);
        assert_eq!(back.vars, d.vars);
    }
}
