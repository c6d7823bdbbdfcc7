//! State classes and the incremental successor computation.

mod classify;
mod explore;

pub use classify::{classify_net, ExactnessReport, NetClass};
pub use explore::{explore, ClassGraph, Limits};

use crate::domain::{decode_rational, encode_rational, get_varint, put_varint, FiringDomain};
use crate::error::{Error, Result};
use crate::expr::{maximize_diff, ThetaFn};
use crate::model::{Config, Net, TransId};
use crate::rational::{Rational, TimeBound};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateClass {
    pub config: Config,
    pub domain: FiringDomain,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Successor {
    Class(StateClass),
    NotFirable,
}

impl StateClass {
    /// Canonical bytes: equal keys iff equal configurations and domains.
    pub fn key(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(64);
        for &m in &self.config.marking {
            put_varint(&mut out, m as u64);
        }
        for v in &self.config.valuation {
            encode_rational(&mut out, v);
        }
        self.domain.encode_into(&mut out);
        out
    }

    pub fn from_key(net: &Net, mut buf: &[u8]) -> Option<StateClass> {
        let buf = &mut buf;
        let marking = (0..net.places.len())
            .map(|_| get_varint(buf).map(|v| v as u32))
            .collect::<Option<_>>()?;
        let valuation = (0..net.variables.len())
            .map(|_| decode_rational(buf))
            .collect::<Option<_>>()?;
        let domain = FiringDomain::decode(buf)?;
        Some(StateClass {
            config: Config { marking, valuation },
            domain,
        })
    }
}

pub fn initial_class(net: &Net) -> Result<StateClass> {
    let config = net.initial_config();
    let vars = net.enabled(&config)?;
    let ivs = vars
        .iter()
        .map(|&t| net.static_interval(t, &config, None))
        .collect::<Result<Vec<_>>>()?;
    let domain = FiringDomain::from_box(vars, &ivs);
    Ok(StateClass { config, domain })
}

fn neg_bound(b: &TimeBound) -> Option<Rational> {
    b.finite().map(|r| -r)
}

fn sub_bound(a: &TimeBound, b: &Rational) -> TimeBound {
    a.sub_r(b)
}

struct Slot {
    kappa: Rational,
    lambda: TimeBound,
    /// Position in the parent domain for persistent transitions.
    parent: Option<usize>,
    lo_fn: ThetaFn,
    hi_fn: ThetaFn,
}

/// Class reached by firing `t` from `class`.
pub fn successor(net: &Net, class: &StateClass, t: TransId) -> Result<Successor> {
    let d = &class.domain;
    let Some(it) = d.position(t) else {
        return Err(Error::DomainMismatch(format!(
            "`{}` is not enabled in the class",
            net.transitions[t].name
        )));
    };
    if !d.consistent_with_firer(t)? {
        return Ok(Successor::NotFirable);
    }
    let (pers, newly, next) = net.pers_nenabl(&class.config, t)?;
    let mut vars: Vec<TransId> = pers.iter().chain(&newly).copied().collect();
    vars.sort_unstable();

    let mut slots = Vec::with_capacity(vars.len());
    for &k in &vars {
        if pers.binary_search(&k).is_ok() {
            let ip = d
                .position(k)
                .expect("persistent transitions are in the parent domain");
            // t fires first, so every enabled date bounds it from above
            let kappa = (0..d.dim())
                .filter_map(|j| neg_bound(d.gamma(j, ip)))
                .fold(Rational::zero(), Rational::max);
            let lambda = d.gamma(ip, it).clone();
            let (lo_fn, hi_fn) = match net.transitions[k].fickle.select(t) {
                None => (ThetaFn::identity(), ThetaFn::identity()),
                Some(f) => (
                    ThetaFn::specialize(&f.lo, &next, Some(&class.config))
                        .map_err(|e| rename(e, net, k))?,
                    ThetaFn::specialize(&f.hi, &next, Some(&class.config))
                        .map_err(|e| rename(e, net, k))?,
                ),
            };
            slots.push(Slot {
                kappa,
                lambda,
                parent: Some(ip),
                lo_fn,
                hi_fn,
            });
        } else {
            let iv = net.static_interval(k, &next, Some(&class.config))?;
            slots.push(Slot {
                kappa: iv.lo,
                lambda: iv.hi,
                parent: None,
                lo_fn: ThetaFn::identity(),
                hi_fn: ThetaFn::identity(),
            });
        }
    }

    let n = vars.len();
    let mut alpha = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    let mut monotone = Vec::with_capacity(n);
    for (k, s) in slots.iter().enumerate() {
        let name = || net.transitions[vars[k]].name.clone();
        let mono = s.lo_fn.is_nondecreasing() && s.hi_fn.is_nondecreasing();
        let (a, b) = if mono {
            (s.lo_fn.eval(&s.kappa)?, s.hi_fn.eval_bound(&s.lambda)?)
        } else {
            // exact range of a piecewise-affine endpoint over [kappa, lambda]
            let lo = s.lo_fn.pwa().and_then(|p| p.inf(&s.kappa, &s.lambda));
            let hi = s.hi_fn.pwa().map(|p| p.sup(&s.kappa, &s.lambda));
            match (lo, hi) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(Error::UnsupportedUnboundedMax(name())),
            }
        };
        if a.is_negative() || TimeBound::Finite(a.clone()) > b {
            return Err(Error::Model(format!(
                "fickle function of `{}` yields an invalid interval [{a}, {b}]",
                name()
            )));
        }
        alpha.push(a);
        beta.push(b);
        monotone.push(mono);
    }

    let mut nd = FiringDomain::unconstrained(vars.clone());
    for k in 0..n {
        nd.set_alpha(k, &alpha[k]);
        nd.set_beta(k, beta[k].clone());
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (si, sj) = (&slots[i], &slots[j]);
            let reach = sub_bound(&si.lambda, &sj.kappa);
            let mu = match (si.parent, sj.parent) {
                (Some(pi), Some(pj)) => d.gamma(pi, pj).clone().min(reach),
                _ => reach,
            };
            let clamp = sub_bound(&beta[i], &alpha[j]);
            let g = if si.parent.is_none() && sj.parent.is_none() {
                mu.min(clamp)
            } else {
                match &mu {
                    TimeBound::Infinite => clamp,
                    TimeBound::Finite(mu) if monotone[i] && monotone[j] => {
                        if si.hi_fn.is_identity() && sj.lo_fn.is_identity() {
                            TimeBound::Finite(mu.clone()).min(clamp)
                        } else {
                            let lo = &sj.kappa + mu;
                            maximize_diff(&si.hi_fn, &sj.lo_fn, mu, &lo, &si.lambda)
                                .map_err(|e| rename(e, net, vars[i]))?
                                .min(clamp)
                        }
                    }
                    TimeBound::Finite(_) => clamp,
                }
            };
            nd.set_gamma(i, j, g);
        }
    }
    let domain = nd.close().ok_or_else(|| {
        Error::Internal(format!(
            "inconsistent successor after firing `{}`",
            net.transitions[t].name
        ))
    })?;
    Ok(Successor::Class(StateClass {
        config: next,
        domain,
    }))
}

fn rename(e: Error, net: &Net, k: TransId) -> Error {
    match e {
        Error::Eval { message, .. } => Error::eval(net.transitions[k].name.clone(), message),
        Error::UnsupportedUnboundedMax(_) => {
            Error::UnsupportedUnboundedMax(net.transitions[k].name.clone())
        }
        e => e,
    }
}

/// All firable successors of a class, in transition order.
pub fn successors(net: &Net, class: &StateClass) -> Result<Vec<(TransId, StateClass)>> {
    let mut out = vec![];
    for &t in class.domain.vars() {
        if let Successor::Class(c) = successor(net, class, t)? {
            out.push((t, c));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Expr, FickleFn, FickleSpec};
    use crate::model::Transition;
    use crate::rational::q;

    fn two(fickle: Option<FickleFn>) -> Net {
        let mut n = Net::new("n");
        let p1 = n.add_place("p1", 1);
        let p2 = n.add_place("p2", 1);
        n.add_transition(Transition::timed("t1", 1.into(), 2.into()).input(p1, 1));
        let t2 = Transition::timed("t2", 2.into(), 3.into()).input(p2, 1);
        n.add_transition(t2.fickle(FickleSpec {
            default: fickle,
            by_trigger: vec![],
        }));
        n
    }

    fn only(s: Successor) -> StateClass {
        match s {
            Successor::Class(c) => c,
            Successor::NotFirable => panic!("expected a class"),
        }
    }

    #[test]
    fn initial_box() {
        let c = initial_class(&two(None)).unwrap();
        assert_eq!(*c.domain.gamma(0, 1), TimeBound::zero());
        assert_eq!(*c.domain.gamma(1, 0), TimeBound::from(2));
    }

    #[test]
    fn persistent_after_first_firing() {
        let n = two(None);
        let c = only(successor(&n, &initial_class(&n).unwrap(), 0).unwrap());
        assert_eq!(c.domain.vars(), &[1]);
        assert_eq!(c.domain.alpha(0), Rational::zero());
        assert_eq!(*c.domain.beta(0), TimeBound::from(2));
    }

    #[test]
    fn translated_persistent() {
        let n = two(Some(FickleFn::point(Expr::Theta + Expr::int(1))));
        let c = only(successor(&n, &initial_class(&n).unwrap(), 0).unwrap());
        assert_eq!(c.domain.alpha(0), Rational::one());
        assert_eq!(*c.domain.beta(0), TimeBound::from(3));
    }

    #[test]
    fn late_transition_not_firable() {
        let mut n = Net::new("n");
        n.add_transition(Transition::timed("a", 0.into(), 1.into()));
        n.add_transition(Transition::timed("b", 3.into(), 4.into()));
        assert_eq!(
            successor(&n, &initial_class(&n).unwrap(), 1).unwrap(),
            Successor::NotFirable
        );
    }

    /// Three concurrent transitions; firing `t` leaves `i` and `j` persistent
    /// with `mu[i][j] = 3/2`, and `j` squares its shifted date.
    pub(crate) fn quadratic_example() -> Net {
        let mut n = Net::new("quadratic");
        let pt = n.add_place("pt", 1);
        let pi = n.add_place("pi", 1);
        let pj = n.add_place("pj", 1);
        let t = n.add_transition(Transition::timed("t", 0.into(), 1.into()).input(pt, 1));
        n.add_transition(Transition::timed("i", 0.into(), 3.into()).input(pi, 1));
        let half = Expr::Num(q(1, 2));
        let sq = (Expr::Theta - half.clone()) * (Expr::Theta - half);
        let f = FickleFn::point(sq).monotone_from(q(1, 2));
        let j = Transition::timed("j", q(3, 2), 3.into()).input(pj, 1);
        n.add_transition(j.fickle(FickleSpec {
            default: None,
            by_trigger: vec![(t, f)],
        }));
        n
    }

    #[test]
    fn quadratic_coefficient() {
        let n = quadratic_example();
        let c = only(successor(&n, &initial_class(&n).unwrap(), 0).unwrap());
        assert_eq!(c.domain.vars(), &[1, 2]);
        assert_eq!(*c.domain.gamma(0, 1), TimeBound::Finite(q(9, 4)));
    }

    #[test]
    fn key_round_trip() {
        let n = quadratic_example();
        let c = only(successor(&n, &initial_class(&n).unwrap(), 0).unwrap());
        let back = StateClass::from_key(&n, &c.key()).unwrap();
        assert_eq!(back, c);
    }
}
