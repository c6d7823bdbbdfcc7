//! Expansion of a bounded weak net into an equivalent 1-safe time Petri net.
//!
//! Every reachable configuration becomes a place. Each pair of a transition
//! `t` and one of its possible static intervals `I` gets two places, `p`
//! (waiting for the firing date) and `q` (date reached), a timer `t_I` moving
//! the token from `p` to `q` within `I`, and urgent transitions `t_{I,m,P}`
//! committing the firing of `t` from configuration `m`. `P` selects where the
//! tokens of the transitions disabled by the firing currently sit.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::io::print_net;
use crate::model::{Config, Net, PlaceId, TimeInterval, TransId, Transition};
use crate::rational::{Rational, TimeBound};
use crate::scg::{classify_net, explore, initial_class, successors, Limits, NetClass, StateClass};
use crate::semantics::ConcreteState;

/// Reachable configurations and the static intervals each transition can get.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkingUniverse {
    /// Initial configuration first.
    pub configs: Vec<Config>,
    /// Sorted, per transition.
    pub intervals: Vec<Vec<TimeInterval>>,
}

impl MarkingUniverse {
    pub fn index(&self, c: &Config) -> Option<usize> {
        self.configs.iter().position(|x| x == c)
    }

    /// Position of `iv` in the interval set of `t`.
    pub fn interval_index(&self, t: TransId, iv: &TimeInterval) -> Option<usize> {
        self.intervals[t].binary_search(iv).ok()
    }

    pub fn interval_count(&self) -> usize {
        self.intervals.iter().map(Vec::len).sum()
    }
}

fn mentions_old(e: &Expr) -> bool {
    e.any(&|x| matches!(x, Expr::OldVar(_) | Expr::OldTokens(_)))
}

fn check_weak(net: &Net) -> Result<()> {
    let r = classify_net(net)?;
    if !matches!(r.net_class, NetClass::Tpn | NetClass::Weak) {
        return Err(Error::NotWeak(format!(
            "{} has non-trivial fickle functions",
            r.net_class.label()
        )));
    }
    let old = net
        .transitions
        .iter()
        .find(|t| mentions_old(&t.interval.lo) || t.interval.hi.as_ref().is_some_and(mentions_old));
    if let Some(t) = old {
        return Err(Error::NotWeak(format!(
            "interval of `{}` depends on the previous configuration",
            t.name
        )));
    }
    Ok(())
}

/// Reachable configurations of a weak net, at most `cap` of them.
pub fn enumerate_markings(net: &Net, cap: usize) -> Result<MarkingUniverse> {
    check_weak(net)?;
    // class graph BFS, stopped as soon as the configuration count passes the cap
    let mut g = Lazy::new(net)?;
    let mut configs: Vec<Config> = vec![g.classes[0].config.clone()];
    let mut seen: BTreeSet<Config> = BTreeSet::from([configs[0].clone()]);
    let mut next = 0;
    while next < g.classes.len() {
        for (_, c) in g.successors(next)? {
            let config = &g.classes[c].config;
            if !seen.contains(config) {
                if seen.len() == cap {
                    return Err(Error::OverCap { cap });
                }
                seen.insert(config.clone());
                configs.push(config.clone());
            }
        }
        next += 1;
    }
    let mut intervals = vec![BTreeSet::new(); net.transitions.len()];
    for c in &configs {
        for t in net.enabled(c)? {
            intervals[t].insert(net.static_interval(t, c, None)?);
        }
    }
    let intervals = intervals
        .into_iter()
        .map(|s| s.into_iter().collect())
        .collect();
    Ok(MarkingUniverse { configs, intervals })
}

/// A place of the subnet of `(t, I)`: waiting (`p`) or due (`q`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SubPlace {
    pub transition: TransId,
    pub interval: usize,
    pub due: bool,
}

/// Transitions disabled when `t` fires from `m`: enabled before, not the
/// fired transition and not persistent.
pub fn conflicting(net: &Net, m: &Config, t: TransId) -> Result<Vec<TransId>> {
    let (pers, _, _) = net.pers_nenabl(m, t)?;
    Ok(net
        .enabled(m)?
        .into_iter()
        .filter(|&k| k != t && pers.binary_search(&k).is_err())
        .collect())
}

/// Every choice of one subnet place per conflicting transition.
pub fn conflict_sets(
    net: &Net,
    universe: &MarkingUniverse,
    m: &Config,
    t: TransId,
) -> Result<Vec<Vec<SubPlace>>> {
    let mut sets: Vec<Vec<SubPlace>> = vec![vec![]];
    for k in conflicting(net, m, t)? {
        let mut next = vec![];
        for s in &sets {
            for interval in 0..universe.intervals[k].len() {
                for due in [false, true] {
                    let mut s = s.clone();
                    s.push(SubPlace {
                        transition: k,
                        interval,
                        due,
                    });
                    next.push(s);
                }
            }
        }
        sets = next;
    }
    Ok(sets)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum PlaceOrigin {
    Config(usize),
    Sub(SubPlace),
    /// Added by the equivalence check.
    Extra,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum TransOrigin {
    /// `t_I`: the date of `transition` is reached.
    Timer {
        transition: TransId,
        interval: usize,
    },
    /// `t_{I,m,P}`: `transition` fires from configuration `config`.
    Fire {
        transition: TransId,
        interval: usize,
        config: usize,
        conflicts: Vec<SubPlace>,
    },
    Extra,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpandedNet {
    pub net: Net,
    pub universe: MarkingUniverse,
    pub place_origin: Vec<PlaceOrigin>,
    pub trans_origin: Vec<TransOrigin>,
    config_place: Vec<PlaceId>,
    sub_place: HashMap<SubPlace, PlaceId>,
}

impl ExpandedNet {
    pub fn config_place(&self, m: usize) -> PlaceId {
        self.config_place[m]
    }

    pub fn sub_place(&self, s: SubPlace) -> Option<PlaceId> {
        self.sub_place.get(&s).copied()
    }

    /// Copy with transition `i` removed (for mutation testing).
    pub fn without_transition(&self, i: TransId) -> ExpandedNet {
        let mut e = self.clone();
        e.net.transitions.remove(i);
        e.trans_origin.remove(i);
        e
    }

    /// Net text with one origin comment per place and transition.
    pub fn to_text(&self, source: &Net) -> String {
        let mut out = print_net(&self.net);
        out.push_str("# origins\n");
        for (p, o) in self.place_origin.iter().enumerate() {
            let desc = match o {
                PlaceOrigin::Config(m) => format!(
                    "configuration {}",
                    config_text(source, &self.universe.configs[*m])
                ),
                PlaceOrigin::Sub(s) => self.sub_text(source, s),
                PlaceOrigin::Extra => "extra".into(),
            };
            let _ = writeln!(out, "#   {} : {desc}", self.net.places[p].name);
        }
        for (t, o) in self.trans_origin.iter().enumerate() {
            let desc = match o {
                TransOrigin::Timer {
                    transition,
                    interval,
                } => {
                    format!(
                        "date of {} in {}",
                        source.transitions[*transition].name,
                        self.universe.intervals[*transition][*interval]
                    )
                }
                TransOrigin::Fire {
                    transition,
                    config,
                    conflicts,
                    ..
                } => {
                    let cs: Vec<String> = conflicts
                        .iter()
                        .map(|s| self.net.places[self.sub_place[s]].name.clone())
                        .collect();
                    format!(
                        "fire {} from {} removing {{{}}}",
                        source.transitions[*transition].name,
                        self.net.places[self.config_place[*config]].name,
                        cs.join(", ")
                    )
                }
                TransOrigin::Extra => "extra".into(),
            };
            let _ = writeln!(out, "#   {} : {desc}", self.net.transitions[t].name);
        }
        out
    }

    fn sub_text(&self, source: &Net, s: &SubPlace) -> String {
        let name = &source.transitions[s.transition].name;
        let iv = &self.universe.intervals[s.transition][s.interval];
        format!("{} {name} {iv}", if s.due { "due" } else { "waiting" })
    }

    /// Source transition of each expanded transition, `None` when silent.
    pub fn label(&self, t: TransId) -> Option<TransId> {
        match &self.trans_origin[t] {
            TransOrigin::Fire { transition, .. } => Some(*transition),
            _ => None,
        }
    }

    fn is_timer(&self, t: TransId) -> bool {
        matches!(self.trans_origin[t], TransOrigin::Timer { .. })
    }
}

fn config_text(net: &Net, c: &Config) -> String {
    let mut parts: Vec<String> = c
        .marking
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0)
        .map(|(p, &n)| format!("{}={n}", net.places[p].name))
        .collect();
    parts.extend(
        c.valuation
            .iter()
            .enumerate()
            .map(|(v, r)| format!("{}={r}", net.variables[v].name)),
    );
    if parts.is_empty() {
        "(empty)".into()
    } else {
        parts.join(" ")
    }
}

pub fn expand(net: &Net, universe: &MarkingUniverse) -> Result<ExpandedNet> {
    check_weak(net)?;
    let mut x = Net::new(format!("{}_expanded", net.name));
    let mut place_origin = vec![];
    let mut config_place = vec![];
    for (i, _) in universe.configs.iter().enumerate() {
        config_place.push(x.add_place(format!("M{i}"), 0));
        place_origin.push(PlaceOrigin::Config(i));
    }
    let mut sub_place = HashMap::new();
    for (t, ivs) in universe.intervals.iter().enumerate() {
        for interval in 0..ivs.len() {
            for due in [false, true] {
                let s = SubPlace {
                    transition: t,
                    interval,
                    due,
                };
                let name = format!(
                    "{}.{}{interval}",
                    net.transitions[t].name,
                    if due { 'q' } else { 'p' }
                );
                sub_place.insert(s, x.add_place(name, 0));
                place_origin.push(PlaceOrigin::Sub(s));
            }
        }
    }
    let sp = |t: TransId, interval: usize, due: bool| {
        sub_place[&SubPlace {
            transition: t,
            interval,
            due,
        }]
    };
    let interval_of = |t: TransId, c: &Config| -> Result<usize> {
        let iv = net.static_interval(t, c, None)?;
        universe.interval_index(t, &iv).ok_or_else(|| {
            Error::Internal(format!(
                "interval {iv} of `{}` missing from the universe",
                net.transitions[t].name
            ))
        })
    };

    let mut trans_origin = vec![];
    for (t, ivs) in universe.intervals.iter().enumerate() {
        for (k, iv) in ivs.iter().enumerate() {
            let timer = Transition::timed(
                format!("{}.I{k}", net.transitions[t].name),
                iv.lo.clone(),
                iv.hi.clone(),
            );
            x.add_transition(timer.input(sp(t, k, false), 1).output(sp(t, k, true), 1));
            trans_origin.push(TransOrigin::Timer {
                transition: t,
                interval: k,
            });
        }
    }
    for (mi, m) in universe.configs.iter().enumerate() {
        for t in net.enabled(m)? {
            let (_, newly, next) = net.pers_nenabl(m, t)?;
            // enabled but never firable in time from m
            let Some(mj) = universe.index(&next) else {
                continue;
            };
            let mut nbl = vec![];
            for &n in &newly {
                nbl.push(sp(n, interval_of(n, &next)?, false));
            }
            // a persistent t keeps the interval drawn when it was enabled
            let sets = conflict_sets(net, universe, m, t)?;
            for (k, (pi, set)) in (0..universe.intervals[t].len())
                .flat_map(|k| sets.iter().cloned().enumerate().map(move |x| (k, x)))
            {
                let name = format!("{}.I{k}.M{mi}.P{pi}", net.transitions[t].name);
                let mut tr = Transition::timed(name, Rational::zero(), TimeBound::zero())
                    .input(sp(t, k, true), 1)
                    .input(config_place[mi], 1);
                for s in &set {
                    tr = tr.input(sub_place[s], 1);
                }
                tr = tr.output(config_place[mj], 1);
                for &p in &nbl {
                    tr = tr.output(p, 1);
                }
                x.add_transition(tr);
                trans_origin.push(TransOrigin::Fire {
                    transition: t,
                    interval: k,
                    config: mi,
                    conflicts: set,
                });
            }
        }
    }
    let m0 = &universe.configs[0];
    x.places[config_place[0]].initial = 1;
    for t in net.enabled(m0)? {
        x.places[sp(t, interval_of(t, m0)?, false)].initial = 1;
    }
    Ok(ExpandedNet {
        net: x,
        universe: universe.clone(),
        place_origin,
        trans_origin,
        config_place,
        sub_place,
    })
}

/// Checks the structural invariants on a marking of the expanded net.
pub fn check_properties(net: &Net, e: &ExpandedNet, marking: &[u32]) -> Result<()> {
    let bad = |m: String| Err(Error::MalformedExpandedState(m));
    if let Some(p) = marking.iter().position(|&n| n > 1) {
        return bad(format!(
            "place {} holds {} tokens",
            e.net.places[p].name, marking[p]
        ));
    }
    let marked: Vec<usize> = (0..e.universe.configs.len())
        .filter(|&i| marking[e.config_place[i]] > 0)
        .collect();
    let [m] = marked[..] else {
        return bad(format!("{} configuration places marked", marked.len()));
    };
    let enabled = net.enabled(&e.universe.configs[m])?;
    for t in 0..net.transitions.len() {
        let subs: Vec<SubPlace> = (0..e.universe.intervals[t].len())
            .flat_map(|interval| {
                [false, true].map(|due| SubPlace {
                    transition: t,
                    interval,
                    due,
                })
            })
            .filter(|s| marking[e.sub_place[s]] > 0)
            .collect();
        let want = usize::from(enabled.contains(&t));
        if subs.len() != want {
            return bad(format!(
                "{} tokens in the subnets of `{}`",
                subs.len(),
                net.transitions[t].name
            ));
        }
        if let [s] = subs[..] {
            if !s.due {
                continue;
            }
            let firable = e
                .trans_origin
                .iter()
                .enumerate()
                .filter(|(_, o)| {
                    matches!(o, TransOrigin::Fire { transition, interval, config, .. }
                    if *transition == t && *interval == s.interval && *config == m)
                })
                .filter(|(i, _)| e.net.marking_enables(*i, marking))
                .count();
            if firable != 1 {
                return bad(format!(
                    "{firable} commit transitions enabled for due `{}`",
                    net.transitions[t].name
                ));
            }
        }
    }
    Ok(())
}

/// Configuration encoded by a marking of the expanded net.
pub fn interpret_marking(e: &ExpandedNet, marking: &[u32]) -> Result<Config> {
    let marked: Vec<usize> = (0..e.universe.configs.len())
        .filter(|&i| marking[e.config_place[i]] > 0)
        .collect();
    match marked[..] {
        [m] if marking[e.config_place[m]] == 1 => Ok(e.universe.configs[m].clone()),
        _ => Err(Error::MalformedExpandedState(format!(
            "{} configuration places marked",
            marked.len()
        ))),
    }
}

/// Concrete state of the source net encoded by a state of the expanded net.
pub fn interpret(net: &Net, e: &ExpandedNet, s: &ConcreteState) -> Result<ConcreteState> {
    check_properties(net, e, &s.config.marking)?;
    let config = interpret_marking(e, &s.config.marking)?;
    let mut phi = vec![];
    for t in net.enabled(&config)? {
        let sub = (0..e.universe.intervals[t].len())
            .flat_map(|interval| {
                [false, true].map(|due| SubPlace {
                    transition: t,
                    interval,
                    due,
                })
            })
            .find(|sub| s.config.marking[e.sub_place[sub]] > 0)
            .expect("checked above");
        let date = if sub.due {
            Rational::zero()
        } else {
            let timer = e
                .trans_origin
                .iter()
                .position(|o| {
                    *o == TransOrigin::Timer {
                        transition: t,
                        interval: sub.interval,
                    }
                })
                .ok_or_else(|| Error::MalformedExpandedState("timer transition missing".into()))?;
            s.date(timer)
                .cloned()
                .ok_or_else(|| Error::MalformedExpandedState("timer without a date".into()))?
        };
        phi.push((t, date));
    }
    Ok(ConcreteState { config, phi })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Equivalent,
    Inequivalent,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub source: usize,
    pub expanded: usize,
    pub equal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub status: Status,
    pub depth: usize,
    pub configs: Option<Check>,
    pub traces: Option<Check>,
    pub timing_equal: Option<bool>,
    pub property_violation: Option<String>,
    /// Trace (source transition names) exhibiting a difference.
    pub witness: Option<Vec<String>>,
    pub reason: Option<String>,
}

impl EquivalenceReport {
    fn inconclusive(depth: usize, reason: &str) -> Self {
        EquivalenceReport {
            status: Status::Inconclusive,
            depth,
            configs: None,
            traces: None,
            timing_equal: None,
            property_violation: None,
            witness: None,
            reason: Some(reason.into()),
        }
    }
}

/// Date of the clock transition; large enough not to constrain the traces
/// compared.
const CLOCK: i64 = 1 << 20;

fn with_clock(net: &Net) -> (Net, TransId) {
    let mut n = net.clone();
    let p = n.add_place("clock.p", 1);
    let c = Rational::int(CLOCK);
    let t =
        n.add_transition(Transition::timed("clock", c.clone(), TimeBound::Finite(c)).input(p, 1));
    (n, t)
}

/// Lazily explored class graph.
struct Lazy<'a> {
    net: &'a Net,
    ids: HashMap<Vec<u8>, usize>,
    classes: Vec<StateClass>,
    succ: Vec<Option<Vec<(TransId, usize)>>>,
}

impl<'a> Lazy<'a> {
    fn new(net: &'a Net) -> Result<Self> {
        let root = initial_class(net)?;
        let mut l = Lazy {
            net,
            ids: HashMap::new(),
            classes: vec![],
            succ: vec![],
        };
        l.intern(root);
        Ok(l)
    }

    fn intern(&mut self, c: StateClass) -> usize {
        let key = c.key();
        if let Some(&i) = self.ids.get(&key) {
            return i;
        }
        self.ids.insert(key, self.classes.len());
        self.classes.push(c);
        self.succ.push(None);
        self.classes.len() - 1
    }

    fn successors(&mut self, id: usize) -> Result<Vec<(TransId, usize)>> {
        if let Some(s) = &self.succ[id] {
            return Ok(s.clone());
        }
        let list = successors(self.net, &self.classes[id])?;
        let out: Vec<(TransId, usize)> =
            list.into_iter().map(|(t, c)| (t, self.intern(c))).collect();
        self.succ[id] = Some(out.clone());
        Ok(out)
    }

    /// Elapsed time since the start, from the clock's remaining date.
    fn elapsed(&self, id: usize, clock: TransId) -> (TimeBound, TimeBound) {
        let d = &self.classes[id].domain;
        let k = d
            .position(clock)
            .expect("the clock never fires in compared traces");
        let c = Rational::int(CLOCK);
        let lo = d
            .beta(k)
            .finite()
            .map_or(TimeBound::zero(), |b| TimeBound::Finite(&c - b));
        (lo, TimeBound::Finite(&c - &d.alpha(k)))
    }
}

type TraceMap = BTreeMap<Vec<TransId>, (TimeBound, TimeBound)>;

fn hull(a: (TimeBound, TimeBound), b: &(TimeBound, TimeBound)) -> (TimeBound, TimeBound) {
    (a.0.min(b.0.clone()), a.1.max(b.1.clone()))
}

fn source_traces(net: &Net, depth: usize) -> Result<TraceMap> {
    let (n, clock) = with_clock(net);
    let mut g = Lazy::new(&n)?;
    let mut out = TraceMap::new();
    out.insert(vec![], g.elapsed(0, clock));
    let mut frontier = vec![(vec![], 0usize)];
    for _ in 0..depth {
        let mut next = vec![];
        for (seq, id) in frontier {
            for (t, c) in g.successors(id)? {
                if t == clock {
                    continue;
                }
                let mut s: Vec<TransId> = seq.clone();
                s.push(t);
                let iv = g.elapsed(c, clock);
                out.entry(s.clone())
                    .and_modify(|x| *x = hull(x.clone(), &iv))
                    .or_insert(iv);
                next.push((s, c));
            }
        }
        frontier = next;
    }
    Ok(out)
}

fn expanded_traces(e: &ExpandedNet, depth: usize) -> Result<TraceMap> {
    let (n, clock) = with_clock(&e.net);
    let mut g = Lazy::new(&n)?;
    let mut out = TraceMap::new();
    let mut frontier: BTreeMap<Vec<TransId>, BTreeSet<usize>> =
        BTreeMap::from([(vec![], BTreeSet::from([0]))]);
    out.insert(vec![], g.elapsed(0, clock));
    for _ in 0..depth {
        let mut next: BTreeMap<Vec<TransId>, BTreeSet<usize>> = BTreeMap::new();
        for (seq, ids) in frontier {
            // silent closure
            let mut closure: BTreeSet<usize> = ids.clone();
            let mut stack: Vec<usize> = ids.into_iter().collect();
            while let Some(id) = stack.pop() {
                for (t, c) in g.successors(id)? {
                    if t != clock && e.is_timer(t) && closure.insert(c) {
                        stack.push(c);
                    }
                }
            }
            for id in closure {
                for (t, c) in g.successors(id)? {
                    if t == clock || e.is_timer(t) {
                        continue;
                    }
                    let mut s = seq.clone();
                    s.push(e.label(t).expect("visible transitions have a label"));
                    next.entry(s).or_default().insert(c);
                }
            }
        }
        for (s, ids) in &next {
            let mut it = ids.iter().map(|&c| g.elapsed(c, clock));
            let first = it.next().expect("non-empty");
            out.insert(s.clone(), it.fold(first, |a, b| hull(a, &b)));
        }
        frontier = next;
    }
    Ok(out)
}

/// Bounded-depth comparison of a weak net with its expansion: reachable
/// configurations, silent-abstracted traces up to `depth` and their elapsed
/// time ranges, plus the structural invariants on every reachable state of
/// the expansion.
pub fn check_equivalence(
    net: &Net,
    e: &ExpandedNet,
    depth: usize,
    limits: &Limits,
) -> Result<EquivalenceReport> {
    let names = |s: &[TransId]| {
        s.iter()
            .map(|&t| net.transitions[t].name.clone())
            .collect::<Vec<_>>()
    };
    let gn = explore(net, limits)?;
    let gx = explore(&e.net, limits)?;
    if gn.truncated || gx.truncated {
        return Ok(EquivalenceReport::inconclusive(
            depth,
            "exploration limit reached",
        ));
    }
    let mut report = EquivalenceReport::inconclusive(depth, "");
    report.status = Status::Equivalent;
    report.reason = None;

    let mut expanded_configs = BTreeSet::new();
    for c in gx.classes(&e.net) {
        if let Err(err) = check_properties(net, e, &c.config.marking) {
            report.property_violation = Some(err.to_string());
            break;
        }
        expanded_configs.insert(interpret_marking(e, &c.config.marking)?);
    }
    let source_configs: BTreeSet<Config> = gn.classes(net).map(|c| c.config).collect();
    if report.property_violation.is_none() {
        report.configs = Some(Check {
            source: source_configs.len(),
            expanded: expanded_configs.len(),
            equal: source_configs == expanded_configs,
        });
    }

    let a = source_traces(net, depth)?;
    let b = expanded_traces(e, depth)?;
    let ka: BTreeSet<&Vec<TransId>> = a.keys().collect();
    let kb: BTreeSet<&Vec<TransId>> = b.keys().collect();
    report.traces = Some(Check {
        source: a.len(),
        expanded: b.len(),
        equal: ka == kb,
    });
    if let Some(w) = ka.symmetric_difference(&kb).next() {
        report.witness = Some(names(w));
    }
    let timing_diff = a.iter().find(|(s, iv)| b.get(*s).is_some_and(|x| x != *iv));
    report.timing_equal = Some(timing_diff.is_none());
    if report.witness.is_none() {
        report.witness = timing_diff.map(|(s, _)| names(s));
    }

    let ok = report.property_violation.is_none()
        && report.configs.as_ref().is_some_and(|c| c.equal)
        && report.traces.as_ref().is_some_and(|c| c.equal)
        && report.timing_equal == Some(true);
    if !ok {
        report.status = Status::Inequivalent;
    }
    Ok(report)
}
