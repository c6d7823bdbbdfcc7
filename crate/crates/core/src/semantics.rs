//! Concrete timed semantics: states, time elapse, firing, simulation.

use std::collections::{HashMap, HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Env;
use crate::model::{Config, Net, TimeInterval, TransId};
use crate::rational::{Rational, TimeBound};

/// Configuration plus the firing date of every enabled transition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConcreteState {
    pub config: Config,
    /// Sorted by transition id.
    pub phi: Vec<(TransId, Rational)>,
}

impl ConcreteState {
    pub fn date(&self, t: TransId) -> Option<&Rational> {
        self.phi.iter().find(|(k, _)| *k == t).map(|(_, d)| d)
    }

    pub fn min_date(&self) -> Option<&Rational> {
        self.phi.iter().map(|(_, d)| d).min()
    }
}

/// Picks a date inside an interval.
pub trait DateChooser {
    fn choose(&mut self, net: &Net, t: TransId, iv: &TimeInterval) -> Result<Rational>;
}

pub struct Earliest;

impl DateChooser for Earliest {
    fn choose(&mut self, _: &Net, _: TransId, iv: &TimeInterval) -> Result<Rational> {
        Ok(iv.lo.clone())
    }
}

pub struct Latest;

impl DateChooser for Latest {
    fn choose(&mut self, net: &Net, t: TransId, iv: &TimeInterval) -> Result<Rational> {
        iv.hi
            .finite()
            .cloned()
            .ok_or_else(|| Error::UnboundedLatest(net.transitions[t].name.clone()))
    }
}

/// Uniform choice on the lattice `lo + k/denom`. Unbounded intervals are
/// sampled on `[lo, lo + unbounded_span]`.
pub struct RandomLattice {
    pub rng: ChaCha8Rng,
    pub denom: u64,
    pub unbounded_span: Rational,
}

impl RandomLattice {
    pub fn new(seed: u64) -> Self {
        RandomLattice {
            rng: ChaCha8Rng::seed_from_u64(seed),
            denom: 1000,
            unbounded_span: Rational::int(10),
        }
    }

    pub fn with_denom(mut self, denom: u64) -> Self {
        self.denom = denom;
        self
    }
}

impl DateChooser for RandomLattice {
    fn choose(&mut self, _: &Net, _: TransId, iv: &TimeInterval) -> Result<Rational> {
        let width = match &iv.hi {
            TimeBound::Finite(h) => h - &iv.lo,
            TimeBound::Infinite => self.unbounded_span.clone(),
        };
        let den = Rational::int(self.denom as i64);
        let steps = (&width * &den).floor();
        let Some((n, 1)) = steps.as_small() else {
            return Err(Error::Model("random lattice too fine for interval".into()));
        };
        let k = self.rng.gen_range(0..=n.max(0));
        Ok(&iv.lo + &(Rational::int(k) / den))
    }
}

/// Dynamic interval of persistent `k` after `trigger` fired, given its
/// residual date.
pub fn dynamic_interval(
    net: &Net,
    k: TransId,
    trigger: TransId,
    next: &Config,
    prev: &Config,
    date: &Rational,
) -> Result<TimeInterval> {
    let tr = &net.transitions[k];
    let Some(f) = tr.fickle.select(trigger) else {
        return Ok(TimeInterval::point(date.clone()));
    };
    let env = Env::new(next).with_old(prev).with_theta(date);
    let ctx = || tr.name.clone();
    let lo = f.lo.eval_num(&env).map_err(|m| Error::eval(ctx(), m))?;
    let hi = f.hi.eval_num(&env).map_err(|m| Error::eval(ctx(), m))?;
    TimeInterval::new(lo, TimeBound::Finite(hi))
        .map_err(|m| Error::Model(format!("fickle function of `{}`: {m}", tr.name)))
}

pub fn initial_state(net: &Net, chooser: &mut dyn DateChooser) -> Result<ConcreteState> {
    let config = net.initial_config();
    let mut phi = vec![];
    for t in net.enabled(&config)? {
        let iv = net.static_interval(t, &config, None)?;
        phi.push((t, chooser.choose(net, t, &iv)?));
    }
    Ok(ConcreteState { config, phi })
}

pub fn elapse(net: &Net, s: &ConcreteState, theta: &Rational) -> Result<ConcreteState> {
    if theta.is_negative() {
        return Err(Error::Model(format!("negative delay {theta}")));
    }
    let mut phi = Vec::with_capacity(s.phi.len());
    for (t, d) in &s.phi {
        if d < theta {
            return Err(Error::IllDefinedElapse {
                transition: net.transitions[*t].name.clone(),
                delay: theta.to_string(),
                date: d.to_string(),
            });
        }
        phi.push((*t, d - theta));
    }
    Ok(ConcreteState {
        config: s.config.clone(),
        phi,
    })
}

pub fn fire(
    net: &Net,
    s: &ConcreteState,
    t: TransId,
    chooser: &mut dyn DateChooser,
) -> Result<ConcreteState> {
    let name = || net.transitions[t].name.clone();
    match s.date(t) {
        None => return Err(Error::NotFirable(name(), "not enabled".into())),
        Some(d) if !d.is_zero() => {
            return Err(Error::NotFirable(name(), format!("date is {d}, not 0")))
        }
        _ => {}
    }
    let (pers, newly, next) = net.pers_nenabl(&s.config, t)?;
    let mut phi = Vec::with_capacity(pers.len() + newly.len());
    let (mut pi, mut ni) = (0, 0);
    while pi < pers.len() || ni < newly.len() {
        if ni >= newly.len() || (pi < pers.len() && pers[pi] < newly[ni]) {
            let k = pers[pi];
            let date = s.date(k).expect("persistent transitions were enabled");
            let iv = dynamic_interval(net, k, t, &next, &s.config, date)?;
            phi.push((k, chooser.choose(net, k, &iv)?));
            pi += 1;
        } else {
            let k = newly[ni];
            let iv = net.static_interval(k, &next, Some(&s.config))?;
            phi.push((k, chooser.choose(net, k, &iv)?));
            ni += 1;
        }
    }
    Ok(ConcreteState { config: next, phi })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DateChoice {
    Earliest,
    Latest,
    Random { seed: u64, denom: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TieBreak {
    Declared,
    Priority(Vec<TransId>),
    Random,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Strategy {
    pub dates: DateChoice,
    pub ties: TieBreak,
}

impl Strategy {
    pub fn earliest() -> Self {
        Strategy {
            dates: DateChoice::Earliest,
            ties: TieBreak::Declared,
        }
    }

    pub fn latest() -> Self {
        Strategy {
            dates: DateChoice::Latest,
            ties: TieBreak::Declared,
        }
    }

    pub fn random(seed: u64) -> Self {
        Strategy {
            dates: DateChoice::Random { seed, denom: 1000 },
            ties: TieBreak::Random,
        }
    }

    pub fn priority(order: Vec<TransId>) -> Self {
        Strategy {
            dates: DateChoice::Earliest,
            ties: TieBreak::Priority(order),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stop {
    Deadlock,
    Horizon,
    MaxSteps,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Delay(Rational),
    Fire(TransId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub initial: ConcreteState,
    /// Each step with the state it leads to.
    pub steps: Vec<(Step, ConcreteState)>,
    pub elapsed: Rational,
    pub stop: Stop,
}

impl Trace {
    pub fn firings(&self) -> impl Iterator<Item = TransId> + '_ {
        self.steps.iter().filter_map(|(s, _)| match s {
            Step::Fire(t) => Some(*t),
            Step::Delay(_) => None,
        })
    }

    pub fn final_state(&self) -> &ConcreteState {
        self.steps.last().map(|(_, s)| s).unwrap_or(&self.initial)
    }

    /// Configurations visited, in order, initial included.
    pub fn configs(&self) -> impl Iterator<Item = &Config> + '_ {
        std::iter::once(&self.initial.config).chain(self.steps.iter().filter_map(
            |(s, st)| match s {
                Step::Fire(_) => Some(&st.config),
                Step::Delay(_) => None,
            },
        ))
    }
}

/// Maximal-progress driver: elapse to the next event and fire one of the
/// transitions due, until deadlock, horizon or `max_steps` firings.
pub fn simulate(
    net: &Net,
    strategy: &Strategy,
    horizon: &Rational,
    max_steps: usize,
) -> Result<Trace> {
    let seed = match strategy.dates {
        DateChoice::Random { seed, .. } => seed,
        _ => 0,
    };
    let mut tie_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut chooser: Box<dyn DateChooser> = match strategy.dates {
        DateChoice::Earliest => Box::new(Earliest),
        DateChoice::Latest => Box::new(Latest),
        DateChoice::Random { seed, denom } => Box::new(RandomLattice::new(seed).with_denom(denom)),
    };
    let initial = initial_state(net, chooser.as_mut())?;
    let mut steps = vec![];
    let mut state = initial.clone();
    let mut elapsed = Rational::zero();
    let mut fired = 0;
    let stop = loop {
        let Some(next) = state.min_date().cloned() else {
            break Stop::Deadlock;
        };
        if &elapsed + &next > *horizon {
            break Stop::Horizon;
        }
        if fired >= max_steps {
            break Stop::MaxSteps;
        }
        if next.is_positive() {
            state = elapse(net, &state, &next)?;
            elapsed = &elapsed + &next;
            steps.push((Step::Delay(next), state.clone()));
        }
        let due: Vec<TransId> = state
            .phi
            .iter()
            .filter(|(_, d)| d.is_zero())
            .map(|(t, _)| *t)
            .collect();
        let t = match &strategy.ties {
            TieBreak::Declared => due[0],
            TieBreak::Priority(order) => order
                .iter()
                .copied()
                .find(|t| due.contains(t))
                .unwrap_or(due[0]),
            TieBreak::Random => due[tie_rng.gen_range(0..due.len())],
        };
        state = fire(net, &state, t, chooser.as_mut())?;
        steps.push((Step::Fire(t), state.clone()));
        fired += 1;
    };
    Ok(Trace {
        initial,
        steps,
        elapsed,
        stop,
    })
}

/// All dates `lo + k/denom` of an interval; unbounded ones stop at `cap`.
pub fn lattice_points(iv: &TimeInterval, denom: i64, cap: &Rational) -> Vec<Rational> {
    let hi = match &iv.hi {
        TimeBound::Finite(h) => h.clone(),
        TimeBound::Infinite => (&iv.lo + cap).max(iv.lo.clone()),
    };
    let step = Rational::new(1, denom);
    let mut v = vec![];
    let mut x = iv.lo.clone();
    while x <= hi {
        v.push(x.clone());
        x = &x + &step;
    }
    v
}

/// Every firing successor of `s` on the date lattice: the transitions due now
/// and each combination of lattice dates for the resulting intervals.
pub fn lattice_fire_successors(
    net: &Net,
    s: &ConcreteState,
    denom: i64,
    cap: &Rational,
) -> Result<Vec<(TransId, ConcreteState)>> {
    let mut out = vec![];
    for &(t, ref d) in &s.phi {
        if !d.is_zero() {
            continue;
        }
        let (pers, newly, next) = net.pers_nenabl(&s.config, t)?;
        let mut options: Vec<(TransId, Vec<Rational>)> = vec![];
        for &k in &pers {
            let iv = dynamic_interval(net, k, t, &next, &s.config, s.date(k).unwrap())?;
            options.push((k, lattice_points(&iv, denom, cap)));
        }
        for &k in &newly {
            let iv = net.static_interval(k, &next, Some(&s.config))?;
            options.push((k, lattice_points(&iv, denom, cap)));
        }
        options.sort_by_key(|(k, _)| *k);
        let mut combos: Vec<Vec<(TransId, Rational)>> = vec![vec![]];
        for (k, pts) in &options {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    pts.iter().map(move |p| {
                        let mut c = c.clone();
                        c.push((*k, p.clone()));
                        c
                    })
                })
                .collect();
        }
        for phi in combos {
            out.push((
                t,
                ConcreteState {
                    config: next.clone(),
                    phi,
                },
            ));
        }
    }
    Ok(out)
}

/// Reachable concrete states when every chosen date and every delay lies on
/// the `1/denom` lattice. `None` when more than `cap_states` states exist.
pub fn explore_lattice(
    net: &Net,
    denom: i64,
    unbounded_span: &Rational,
    cap_states: usize,
) -> Result<Option<HashSet<ConcreteState>>> {
    let mut seen: HashSet<ConcreteState> = HashSet::new();
    let mut queue = VecDeque::new();
    let config = net.initial_config();
    let enabled = net.enabled(&config)?;
    let mut combos: Vec<Vec<(TransId, Rational)>> = vec![vec![]];
    for &t in &enabled {
        let pts = lattice_points(
            &net.static_interval(t, &config, None)?,
            denom,
            unbounded_span,
        );
        combos = combos
            .into_iter()
            .flat_map(|c| {
                pts.iter().map(move |p| {
                    let mut c = c.clone();
                    c.push((t, p.clone()));
                    c
                })
            })
            .collect();
    }
    for phi in combos {
        let s = ConcreteState {
            config: config.clone(),
            phi,
        };
        if seen.insert(s.clone()) {
            queue.push_back(s);
        }
    }
    let tick = Rational::new(1, denom);
    while let Some(s) = queue.pop_front() {
        if seen.len() > cap_states {
            return Ok(None);
        }
        let mut succ: Vec<ConcreteState> = lattice_fire_successors(net, &s, denom, unbounded_span)?
            .into_iter()
            .map(|(_, x)| x)
            .collect();
        if s.min_date().is_some_and(|d| *d >= tick) {
            succ.push(elapse(net, &s, &tick)?);
        }
        for x in succ {
            if seen.insert(x.clone()) {
                queue.push_back(x);
            }
        }
    }
    Ok(Some(seen))
}

/// Replays a firing sequence on the lattice, searching over delays and date
/// choices. Returns whether some concrete run fires exactly `trace`.
pub fn realizable(
    net: &Net,
    trace: &[TransId],
    denom: i64,
    unbounded_span: &Rational,
) -> Result<bool> {
    let mut memo: HashMap<(ConcreteState, usize), bool> = HashMap::new();
    let config = net.initial_config();
    let mut combos: Vec<Vec<(TransId, Rational)>> = vec![vec![]];
    for t in net.enabled(&config)? {
        let pts = lattice_points(
            &net.static_interval(t, &config, None)?,
            denom,
            unbounded_span,
        );
        combos = combos
            .into_iter()
            .flat_map(|c| {
                pts.iter().map(move |p| {
                    let mut c = c.clone();
                    c.push((t, p.clone()));
                    c
                })
            })
            .collect();
    }
    for phi in combos {
        let s = ConcreteState {
            config: config.clone(),
            phi,
        };
        if replay(net, s, trace, 0, denom, unbounded_span, &mut memo)? {
            return Ok(true);
        }
    }
    Ok(false)
}

fn replay(
    net: &Net,
    s: ConcreteState,
    trace: &[TransId],
    pos: usize,
    denom: i64,
    cap: &Rational,
    memo: &mut HashMap<(ConcreteState, usize), bool>,
) -> Result<bool> {
    if pos == trace.len() {
        return Ok(true);
    }
    let key = (s, pos);
    if let Some(&r) = memo.get(&key) {
        return Ok(r);
    }
    let s = &key.0;
    let target = trace[pos];
    let mut ok = false;
    // the due transition must be the next one of the trace, after the
    // minimal delay that makes it due
    if let Some(d) = s.date(target).cloned() {
        if s.min_date() == Some(&d) {
            let at = elapse(net, s, &d)?;
            for (t, x) in lattice_fire_successors(net, &at, denom, cap)? {
                if t == target && replay(net, x, trace, pos + 1, denom, cap, memo)? {
                    ok = true;
                    break;
                }
            }
        }
    }
    memo.insert(key, ok);
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Expr, FickleFn, FickleSpec};
    use crate::model::Transition;
    use crate::rational::q;

    fn single(lo: i64, hi: TimeBound) -> Net {
        let mut n = Net::new("n");
        let p = n.add_place("p", 1);
        let qq = n.add_place("q", 0);
        n.add_transition(
            Transition::timed("t1", lo.into(), hi)
                .input(p, 1)
                .output(qq, 1),
        );
        n
    }

    #[test]
    fn choosers() {
        let n = single(1, 2.into());
        assert_eq!(
            initial_state(&n, &mut Earliest).unwrap().phi,
            vec![(0, Rational::one())]
        );
        let u = single(2, TimeBound::Infinite);
        assert!(matches!(
            initial_state(&u, &mut Latest),
            Err(Error::UnboundedLatest(_))
        ));
        let a = initial_state(&n, &mut RandomLattice::new(42)).unwrap();
        let b = initial_state(&n, &mut RandomLattice::new(42)).unwrap();
        assert_eq!(a, b);
        assert!(TimeInterval::new(1.into(), 2.into())
            .unwrap()
            .contains(&a.phi[0].1));
    }

    #[test]
    fn elapse_rules() {
        let mut n = single(1, 1.into());
        n.add_transition(Transition::timed("t2", 2.into(), 2.into()));
        let s = ConcreteState {
            config: n.initial_config(),
            phi: vec![(0, q(3, 2))],
        };
        assert_eq!(
            elapse(&n, &s, &q(3, 2)).unwrap().phi,
            vec![(0, Rational::zero())]
        );
        assert_eq!(elapse(&n, &s, &Rational::zero()).unwrap(), s);
        let two = ConcreteState {
            config: n.initial_config(),
            phi: vec![(0, 1.into()), (1, 2.into())],
        };
        assert!(matches!(
            elapse(&n, &two, &q(3, 2)),
            Err(Error::IllDefinedElapse { .. })
        ));
    }

    #[test]
    fn fickle_delay_and_conflict() {
        let mut n = Net::new("n");
        let a = n.add_place("a", 1);
        let b = n.add_place("b", 1);
        n.add_transition(Transition::timed("t", 0.into(), 0.into()).input(a, 1));
        let id = FickleFn::new(Expr::Theta + Expr::int(1), Expr::Theta + Expr::int(2));
        n.add_transition(
            Transition::timed("k", 0.into(), 5.into())
                .input(b, 1)
                .fickle(FickleSpec {
                    default: Some(id),
                    by_trigger: vec![],
                }),
        );
        let s = ConcreteState {
            config: n.initial_config(),
            phi: vec![(0, 0.into()), (1, 0.into())],
        };
        let s2 = fire(&n, &s, 0, &mut Earliest).unwrap();
        assert_eq!(s2.phi, vec![(1, Rational::one())]);

        let mut c = Net::new("c");
        let p = c.add_place("p", 1);
        c.add_transition(Transition::timed("t1", 0.into(), 0.into()).input(p, 1));
        c.add_transition(Transition::timed("t2", 0.into(), 5.into()).input(p, 1));
        let s = initial_state(&c, &mut Earliest).unwrap();
        assert!(fire(&c, &s, 0, &mut Earliest).unwrap().phi.is_empty());
    }

    #[test]
    fn identity_fickle_keeps_dates() {
        let mut n = Net::new("n");
        let a = n.add_place("a", 1);
        let b = n.add_place("b", 1);
        n.add_transition(Transition::timed("t", 0.into(), 0.into()).input(a, 1));
        n.add_transition(Transition::timed("k", 0.into(), 5.into()).input(b, 1));
        let s = ConcreteState {
            config: n.initial_config(),
            phi: vec![(0, 0.into()), (1, q(7, 3))],
        };
        assert_eq!(
            fire(&n, &s, 0, &mut Latest).unwrap().phi,
            vec![(1, q(7, 3))]
        );
    }

    #[test]
    fn single_transition_trace() {
        let n = single(2, 2.into());
        let tr = simulate(&n, &Strategy::earliest(), &Rational::int(100), 10).unwrap();
        assert_eq!(tr.stop, Stop::Deadlock);
        assert_eq!(tr.elapsed, Rational::int(2));
        assert_eq!(tr.firings().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn priority_tie_break() {
        let mut n = Net::new("n");
        n.add_transition(Transition::timed("t0", 1.into(), 1.into()));
        n.add_transition(Transition::timed("t1", 1.into(), 1.into()));
        let tr = simulate(&n, &Strategy::priority(vec![1, 0]), &Rational::int(1), 1).unwrap();
        assert_eq!(tr.firings().next(), Some(1));
    }

    #[test]
    fn lattice_exploration_of_conflict() {
        let mut c = Net::new("c");
        let p = c.add_place("p", 1);
        let a = c.add_place("q", 0);
        let b = c.add_place("r", 0);
        c.add_transition(
            Transition::timed("t1", 0.into(), 1.into())
                .input(p, 1)
                .output(a, 1),
        );
        c.add_transition(
            Transition::timed("t2", 1.into(), 2.into())
                .input(p, 1)
                .output(b, 1),
        );
        let states = explore_lattice(&c, 2, &Rational::int(4), 1000)
            .unwrap()
            .unwrap();
        let configs: HashSet<_> = states.iter().map(|s| s.config.marking.clone()).collect();
        assert_eq!(configs.len(), 3);
        assert!(realizable(&c, &[1], 2, &Rational::int(4)).unwrap());
        assert!(!realizable(&c, &[0, 1], 2, &Rational::int(4)).unwrap());
    }
}
