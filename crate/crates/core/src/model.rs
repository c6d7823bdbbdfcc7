//! Nets, configurations and marking algebra.

use crate::error::{Error, Result};
use crate::expr::{Env, Expr, FickleSpec, Names};
use crate::rational::{Rational, TimeBound};

pub type PlaceId = usize;
pub type TransId = usize;
pub type VarId = usize;

pub type Marking = Vec<u32>;
pub type Valuation = Vec<Rational>;

/// Discrete part of a state: marking plus variable valuation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Config {
    pub marking: Marking,
    pub valuation: Valuation,
}

/// Closed interval `[lo, hi]`, `hi` possibly infinite.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TimeInterval {
    pub lo: Rational,
    pub hi: TimeBound,
}

impl TimeInterval {
    pub fn new(lo: Rational, hi: TimeBound) -> std::result::Result<Self, String> {
        if lo.is_negative() {
            return Err(format!("negative lower bound {lo}"));
        }
        if TimeBound::Finite(lo.clone()) > hi {
            return Err(format!("empty interval [{lo}, {hi}]"));
        }
        Ok(TimeInterval { lo, hi })
    }

    pub fn point(r: Rational) -> Self {
        TimeInterval {
            hi: TimeBound::Finite(r.clone()),
            lo: r,
        }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        *x >= self.lo && TimeBound::Finite(x.clone()) <= self.hi
    }
}

impl std::fmt::Display for TimeInterval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Place {
    pub name: String,
    pub initial: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Variable {
    pub name: String,
    pub initial: Rational,
}

/// Static interval endpoints; `hi = None` stands for `+inf`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StaticInterval {
    pub lo: Expr,
    pub hi: Option<Expr>,
}

impl StaticInterval {
    pub fn constant(lo: Rational, hi: TimeBound) -> Self {
        StaticInterval {
            lo: Expr::Num(lo),
            hi: hi.finite().cloned().map(Expr::Num),
        }
    }

    pub fn is_config_free(&self) -> bool {
        self.lo.is_config_free() && self.hi.as_ref().is_none_or(Expr::is_config_free)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transition {
    pub name: String,
    pub pre: Vec<(PlaceId, u32)>,
    pub post: Vec<(PlaceId, u32)>,
    pub inhibitors: Vec<PlaceId>,
    pub guard: Option<Expr>,
    pub updates: Vec<(VarId, Expr)>,
    pub interval: StaticInterval,
    pub fickle: FickleSpec,
}

impl Transition {
    pub fn new(name: impl Into<String>, lo: impl Into<Expr>, hi: Option<Expr>) -> Self {
        Transition {
            name: name.into(),
            pre: vec![],
            post: vec![],
            inhibitors: vec![],
            guard: None,
            updates: vec![],
            interval: StaticInterval { lo: lo.into(), hi },
            fickle: FickleSpec::identity(),
        }
    }

    /// Transition with a constant interval.
    pub fn timed(name: impl Into<String>, lo: Rational, hi: TimeBound) -> Self {
        let mut t = Transition::new(name, Expr::int(0), None);
        t.interval = StaticInterval::constant(lo, hi);
        t
    }

    pub fn input(mut self, p: PlaceId, w: u32) -> Self {
        self.pre.push((p, w));
        self
    }

    pub fn output(mut self, p: PlaceId, w: u32) -> Self {
        self.post.push((p, w));
        self
    }

    pub fn inhibitor(mut self, p: PlaceId) -> Self {
        self.inhibitors.push(p);
        self
    }

    pub fn guard(mut self, g: Expr) -> Self {
        self.guard = Some(g);
        self
    }

    pub fn update(mut self, v: VarId, e: Expr) -> Self {
        self.updates.push((v, e));
        self
    }

    pub fn fickle(mut self, f: FickleSpec) -> Self {
        self.fickle = f;
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Net {
    pub name: String,
    pub places: Vec<Place>,
    pub transitions: Vec<Transition>,
    pub variables: Vec<Variable>,
}

impl Names for Net {
    fn place_name(&self, p: PlaceId) -> &str {
        &self.places[p].name
    }

    fn var_name(&self, v: VarId) -> &str {
        &self.variables[v].name
    }
}

fn sorted_merge(arcs: &[(PlaceId, u32)], n: usize) -> Vec<u32> {
    let mut v = vec![0u32; n];
    for &(p, w) in arcs {
        v[p] += w;
    }
    v
}

impl Net {
    pub fn new(name: impl Into<String>) -> Self {
        Net {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn add_place(&mut self, name: impl Into<String>, initial: u32) -> PlaceId {
        self.places.push(Place {
            name: name.into(),
            initial,
        });
        self.places.len() - 1
    }

    pub fn add_variable(&mut self, name: impl Into<String>, initial: Rational) -> VarId {
        self.variables.push(Variable {
            name: name.into(),
            initial,
        });
        self.variables.len() - 1
    }

    pub fn add_transition(&mut self, t: Transition) -> TransId {
        self.transitions.push(t);
        self.transitions.len() - 1
    }

    pub fn place(&self, name: &str) -> Option<PlaceId> {
        self.places.iter().position(|p| p.name == name)
    }

    pub fn transition(&self, name: &str) -> Option<TransId> {
        self.transitions.iter().position(|t| t.name == name)
    }

    pub fn variable(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn initial_config(&self) -> Config {
        Config {
            marking: self.places.iter().map(|p| p.initial).collect(),
            valuation: self.variables.iter().map(|v| v.initial.clone()).collect(),
        }
    }

    /// Checks references and that `theta` only appears in fickle functions.
    pub fn validate(&self) -> Result<()> {
        let (np, nv, nt) = (
            self.places.len(),
            self.variables.len(),
            self.transitions.len(),
        );
        let bad_ref = |e: &Expr| {
            e.any(&|x| match x {
                Expr::Var(v) | Expr::OldVar(v) => *v >= nv,
                Expr::Tokens(p) | Expr::OldTokens(p) => *p >= np,
                _ => false,
            })
        };
        for t in &self.transitions {
            let err = |m: &str| Err(Error::Model(format!("transition `{}`: {m}", t.name)));
            if t.pre.iter().chain(&t.post).any(|&(p, _)| p >= np)
                || t.inhibitors.iter().any(|&p| p >= np)
            {
                return err("arc to an undeclared place");
            }
            let plain = t
                .guard
                .iter()
                .chain(t.updates.iter().map(|(_, e)| e))
                .chain(std::iter::once(&t.interval.lo))
                .chain(t.interval.hi.iter());
            for e in plain {
                if bad_ref(e) {
                    return err("reference to an undeclared place or variable");
                }
                if e.has_theta() {
                    return err("theta outside a fickle function");
                }
            }
            if t.updates.iter().any(|(v, _)| *v >= nv) {
                return err("update of an undeclared variable");
            }
            for (trig, _) in &t.fickle.by_trigger {
                if *trig >= nt {
                    return err("fickle trigger is not a transition");
                }
            }
            for f in t.fickle.entries() {
                if bad_ref(&f.lo) || bad_ref(&f.hi) {
                    return err("reference to an undeclared place or variable");
                }
            }
        }
        Ok(())
    }

    fn eval_err(&self, t: TransId, m: String) -> Error {
        Error::eval(self.transitions[t].name.clone(), m)
    }

    /// Arc-level enabling: enough tokens and empty inhibitor places.
    pub fn marking_enables(&self, t: TransId, m: &[u32]) -> bool {
        let tr = &self.transitions[t];
        tr.pre.iter().all(|&(p, w)| m[p] >= w) && tr.inhibitors.iter().all(|&p| m[p] == 0)
    }

    fn guard_holds(&self, t: TransId, c: &Config) -> Result<bool> {
        match &self.transitions[t].guard {
            None => Ok(true),
            Some(g) => g.eval_bool(&Env::new(c)).map_err(|m| self.eval_err(t, m)),
        }
    }

    pub fn is_enabled(&self, t: TransId, c: &Config) -> Result<bool> {
        Ok(self.marking_enables(t, &c.marking) && self.guard_holds(t, c)?)
    }

    pub fn enabled(&self, c: &Config) -> Result<Vec<TransId>> {
        let mut v = vec![];
        for t in 0..self.transitions.len() {
            if self.is_enabled(t, c)? {
                v.push(t);
            }
        }
        Ok(v)
    }

    /// `m − Pre(t) + Post(t)` with updates applied in order.
    pub fn fire_marking(&self, c: &Config, t: TransId) -> Result<Config> {
        let tr = &self.transitions[t];
        let mut next = c.clone();
        for &(p, w) in &tr.pre {
            next.marking[p] = next.marking[p]
                .checked_sub(w)
                .ok_or_else(|| Error::NotFirable(tr.name.clone(), "not enough tokens".into()))?;
        }
        for &(p, w) in &tr.post {
            next.marking[p] += w;
        }
        for (v, e) in &tr.updates {
            let val = e
                .eval_num(&Env::new(&next).with_old(c))
                .map_err(|m| self.eval_err(t, m))?;
            next.valuation[*v] = val;
        }
        Ok(next)
    }

    /// Persistent and newly enabled transitions after firing `t` from `c`,
    /// together with the successor configuration. Both lists are sorted.
    pub fn pers_nenabl(
        &self,
        c: &Config,
        t: TransId,
    ) -> Result<(Vec<TransId>, Vec<TransId>, Config)> {
        let next = self.fire_marking(c, t)?;
        let pre_t = sorted_merge(&self.transitions[t].pre, self.places.len());
        let inter: Vec<u32> = c.marking.iter().zip(&pre_t).map(|(m, w)| m - w).collect();
        let mut pers = vec![];
        let mut newly = vec![];
        for k in 0..self.transitions.len() {
            if !self.is_enabled(k, &next)? {
                continue;
            }
            let kept = k != t
                && self.is_enabled(k, c)?
                && self.transitions[k].pre.iter().all(|&(p, w)| inter[p] >= w);
            if kept {
                pers.push(k);
            } else {
                newly.push(k);
            }
        }
        Ok((pers, newly, next))
    }

    /// Static interval of `t` evaluated at `c`; `old` is the configuration
    /// before the firing that produced `c`, if any.
    pub fn static_interval(
        &self,
        t: TransId,
        c: &Config,
        old: Option<&Config>,
    ) -> Result<TimeInterval> {
        let si = &self.transitions[t].interval;
        let env = Env {
            config: c,
            old,
            theta: None,
        };
        let lo = si.lo.eval_num(&env).map_err(|m| self.eval_err(t, m))?;
        let hi = match &si.hi {
            None => TimeBound::Infinite,
            Some(e) => TimeBound::Finite(e.eval_num(&env).map_err(|m| self.eval_err(t, m))?),
        };
        TimeInterval::new(lo, hi)
            .map_err(|m| Error::Model(format!("transition `{}`: {m}", self.transitions[t].name)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn timed(name: &str, lo: i64, hi: i64) -> Transition {
        Transition::timed(name, lo.into(), hi.into())
    }

    #[test]
    fn enabling_with_inhibitor() {
        let mut n = Net::new("n");
        let p = n.add_place("p", 1);
        let qq = n.add_place("q", 1);
        n.add_transition(timed("t1", 0, 1).input(p, 1));
        n.add_transition(timed("t2", 0, 1).input(p, 1).inhibitor(qq));
        assert_eq!(n.enabled(&n.initial_config()).unwrap(), vec![0]);
    }

    #[test]
    fn guard_on_slope() {
        let mut n = Net::new("qss");
        let x = n.add_variable("x", Rational::zero());
        n.add_transition(timed("down", 0, 1).guard((-Expr::Var(x)).ne_(Expr::int(0))));
        assert!(n.enabled(&n.initial_config()).unwrap().is_empty());
    }

    #[test]
    fn self_loop_is_newly_enabled() {
        let mut n = Net::new("n");
        let p = n.add_place("p", 1);
        n.add_transition(timed("t", 1, 1).input(p, 1).output(p, 1));
        let (pers, newly, _) = n.pers_nenabl(&n.initial_config(), 0).unwrap();
        assert!(pers.is_empty());
        assert_eq!(newly, vec![0]);
    }

    #[test]
    fn disjoint_presets_persist() {
        let mut n = Net::new("n");
        let p1 = n.add_place("p1", 1);
        let p2 = n.add_place("p2", 1);
        let q1 = n.add_place("q1", 0);
        let q2 = n.add_place("q2", 0);
        n.add_transition(timed("t1", 1, 2).input(p1, 1).output(q1, 1));
        n.add_transition(timed("t2", 2, 3).input(p2, 1).output(q2, 1));
        let (pers, newly, _) = n.pers_nenabl(&n.initial_config(), 0).unwrap();
        assert_eq!(pers, vec![1]);
        assert!(newly.is_empty());
    }

    #[test]
    fn conflict_disables() {
        let mut n = Net::new("n");
        let p = n.add_place("p", 1);
        let a = n.add_place("q", 0);
        let b = n.add_place("r", 0);
        n.add_transition(timed("t1", 0, 0).input(p, 1).output(a, 1));
        n.add_transition(timed("t2", 0, 5).input(p, 1).output(b, 1));
        let (pers, newly, next) = n.pers_nenabl(&n.initial_config(), 0).unwrap();
        assert!(pers.is_empty() && newly.is_empty());
        assert_eq!(next.marking, vec![0, 1, 0]);
    }

    #[test]
    fn updates_run_in_order() {
        let mut n = Net::new("n");
        let x = n.add_variable("x", Rational::int(4000));
        let y = n.add_variable("y", Rational::zero());
        n.add_transition(
            timed("step", 1, 1)
                .update(x, Expr::Var(x) - Expr::int(500))
                .update(y, Expr::Var(x) + Expr::OldVar(x)),
        );
        let c = n.fire_marking(&n.initial_config(), 0).unwrap();
        assert_eq!(c.valuation, vec![Rational::int(3500), Rational::int(7500)]);
    }

    #[test]
    fn marking_dependent_interval() {
        let mut n = Net::new("n");
        let p = n.add_place("p", 2);
        n.add_transition(Transition::new(
            "t",
            Expr::Tokens(p),
            Some(Expr::Tokens(p) + Expr::int(1)),
        ));
        let i = n.static_interval(0, &n.initial_config(), None).unwrap();
        assert_eq!(i, TimeInterval::new(Rational::int(2), 3.into()).unwrap());
        let mut bad = n.clone();
        bad.transitions[0].interval.hi = Some(Expr::Num(q(1, 2)));
        assert!(bad.static_interval(0, &bad.initial_config(), None).is_err());
    }
}
