//! Compilation of ODEs into nets: forward Euler and first-order QSS.
//!
//! Dynamics are `dx/dt = rhs(x) / scale`. Every builder can add a `start`
//! transition firing at time 0, so the graph has a distinct initial class.

use crate::error::{Error, Result};
use crate::expr::{Expr, FickleFn, FickleSpec};
use crate::model::{Net, Transition, VarId};
use crate::rational::{Rational, TimeBound};
use crate::semantics::{simulate, Strategy};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateVar {
    pub var: VarId,
    pub rhs: Expr,
    /// Values are kept inside `[lo, hi]`.
    pub bounds: Option<(Rational, Rational)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Method {
    Qss {
        quantum: Rational,
    },
    /// `grid` rounds every new value to a multiple of it.
    Euler {
        step: Rational,
        grid: Option<Rational>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RescaleMode {
    /// Preserves the remaining distance to the next level.
    Physical,
    /// Scales the date by the ratio of the new and old rates.
    RateRatio,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OdeSpec {
    /// Variables (state and auxiliary) plus any extra places and transitions.
    pub base: Net,
    pub states: Vec<StateVar>,
    pub method: Method,
    pub scale: Rational,
    pub stop: Option<Expr>,
    pub mode: RescaleMode,
    pub startup: bool,
}

impl OdeSpec {
    pub fn new(base: Net, states: Vec<StateVar>, method: Method) -> Self {
        OdeSpec {
            base,
            states,
            method,
            scale: Rational::one(),
            stop: None,
            mode: RescaleMode::Physical,
            startup: true,
        }
    }

    fn check(&self) -> Result<()> {
        let ok = match &self.method {
            Method::Qss { quantum } => quantum.is_positive(),
            Method::Euler { step, grid } => {
                step.is_positive() && grid.as_ref().is_none_or(Rational::is_positive)
            }
        };
        if !ok || !self.scale.is_positive() {
            return Err(Error::Model(
                "quantum, step, grid and scale must be positive".into(),
            ));
        }
        if self.states.is_empty() {
            return Err(Error::Model("no state variables".into()));
        }
        for s in &self.states {
            let bad = s.rhs.any(&|e| match e {
                Expr::Var(v) | Expr::OldVar(v) => *v >= self.base.variables.len(),
                Expr::Theta => true,
                _ => false,
            });
            if bad || s.var >= self.base.variables.len() {
                return Err(Error::Model(
                    "right-hand side references an undeclared variable".into(),
                ));
            }
        }
        Ok(())
    }

    fn quantum(&self) -> Result<&Rational> {
        match &self.method {
            Method::Qss { quantum } => Ok(quantum),
            Method::Euler { .. } => Err(Error::Model("expected a QSS method".into())),
        }
    }

    /// Net according to the declared method.
    pub fn build(&self) -> Result<Net> {
        match self.method {
            Method::Euler { .. } => build_euler(self),
            Method::Qss { .. } if self.states.len() == 1 && self.base.transitions.is_empty() => {
                build_qss1(self)
            }
            Method::Qss { .. } => build_coupled_qss(self),
        }
    }
}

fn not_stopped(spec: &OdeSpec) -> Option<Expr> {
    spec.stop.clone().map(std::ops::Not::not)
}

fn and_opt(a: Option<Expr>, b: Expr) -> Expr {
    match a {
        Some(a) => a.and(b),
        None => b,
    }
}

/// Adds the optional `start` transition; returns the place the dynamics run on.
fn run_place(spec: &OdeSpec, net: &mut Net) -> usize {
    if spec.startup {
        let init = net.add_place("init", 1);
        let run = net.add_place("run", 0);
        net.add_transition(
            Transition::timed("start", Rational::zero(), TimeBound::zero())
                .input(init, 1)
                .output(run, 1),
        );
        run
    } else {
        net.add_place("run", 1)
    }
}

fn var_name(spec: &OdeSpec, v: VarId) -> &str {
    &spec.base.variables[v].name
}

/// Synchronous loop: one transition with interval `[h, h]` updating every
/// variable from the values before the step.
pub fn build_euler(spec: &OdeSpec) -> Result<Net> {
    spec.check()?;
    let Method::Euler { step, grid } = &spec.method else {
        return Err(Error::Model("expected an Euler method".into()));
    };
    let mut net = spec.base.clone();
    let run = run_place(spec, &mut net);
    let mut t = Transition::timed("step", step.clone(), TimeBound::Finite(step.clone()))
        .input(run, 1)
        .output(run, 1);
    if let Some(g) = not_stopped(spec) {
        t = t.guard(g);
    }
    let h = Expr::Num(step / &spec.scale);
    for s in &spec.states {
        let mut e = Expr::OldVar(s.var) + h.clone() * s.rhs.to_old();
        if let Some(g) = grid {
            let g = Expr::Num(g.clone());
            e = (e / g.clone() + Expr::Num(Rational::new(1, 2))).floor() * g;
        }
        if let Some((lo, hi)) = &s.bounds {
            e = Expr::Num(lo.clone()).max(Expr::Num(hi.clone()).min(e));
        }
        t = t.update(s.var, e);
    }
    net.add_transition(t);
    Ok(net)
}

/// Level-crossing guard of one direction, with the optional bounds.
fn direction_guard(s: &StateVar, q: &Rational, up: bool) -> Expr {
    let x = Expr::Var(s.var);
    let f = s.rhs.clone();
    let mut g = if up {
        f.gt(Expr::int(0))
    } else {
        f.lt(Expr::int(0))
    };
    if let Some((lo, hi)) = &s.bounds {
        g = if up {
            g.and((x + Expr::Num(q.clone())).le(Expr::Num(hi.clone())))
        } else {
            g.and((x - Expr::Num(q.clone())).ge(Expr::Num(lo.clone())))
        };
    }
    g
}

/// Time to the next level: `Q / |rhs / scale|`.
fn level_time(spec: &OdeSpec, s: &StateVar, q: &Rational) -> Expr {
    Expr::Num(q * &spec.scale) / s.rhs.clone().abs()
}

/// Single variable: one transition per direction, `x := x ± Q` after
/// `Q / |f(x)|`.
pub fn build_qss1(spec: &OdeSpec) -> Result<Net> {
    spec.check()?;
    if spec.states.len() != 1 {
        return Err(Error::Model(
            "single-variable QSS expects exactly one state variable".into(),
        ));
    }
    let q = spec.quantum()?.clone();
    let s = &spec.states[0];
    let mut net = spec.base.clone();
    let run = run_place(spec, &mut net);
    let theta = level_time(spec, s, &q);
    let name = var_name(spec, s.var).to_string();
    for (up, suffix, delta) in [(true, "up", q.clone()), (false, "down", -&q)] {
        let g = and_opt(not_stopped(spec), direction_guard(s, &q, up));
        let t = Transition::new(
            format!("{name}_{suffix}"),
            theta.clone(),
            Some(theta.clone()),
        )
        .input(run, 1)
        .output(run, 1)
        .guard(g)
        .update(s.var, Expr::Var(s.var) + Expr::Num(delta));
        net.add_transition(t);
    }
    Ok(net)
}

/// Rescaled pending date of a variable after some other transition changed
/// its slope from `old(f)` to `f`.
pub fn rescale_expr(mode: RescaleMode, f: &Expr, q: &Rational, scale: &Rational) -> Expr {
    let old = f.to_old();
    let (fo, fnew) = (old.clone().abs(), f.clone().abs());
    let same = (old * f.clone()).gt(Expr::int(0));
    let th = Expr::Theta;
    match mode {
        RescaleMode::Physical => Expr::ite(
            same,
            th.clone() * fo.clone() / fnew.clone(),
            (Expr::Num(Rational::int(2) * q * scale) - fo * th) / fnew,
        ),
        RescaleMode::RateRatio => {
            let ratio = fnew / fo.clone();
            Expr::ite(
                same,
                ratio.clone() * th.clone(),
                ratio * (Expr::Num(Rational::int(2) * q / scale) * fo - th),
            )
        }
    }
}

/// One transition per variable; pending dates are rescaled whenever another
/// transition fires.
pub fn build_coupled_qss(spec: &OdeSpec) -> Result<Net> {
    spec.check()?;
    let q = spec.quantum()?.clone();
    let mut net = spec.base.clone();
    let run = run_place(spec, &mut net);
    for s in &spec.states {
        let theta = level_time(spec, s, &q);
        let up = direction_guard(s, &q, true);
        let down = direction_guard(s, &q, false);
        let g = and_opt(not_stopped(spec), up.or(down));
        let f = s.rhs.clone();
        let step = Expr::Num(q.clone()) * f.clone() / f.clone().abs();
        let resc = rescale_expr(spec.mode, &f, &q, &spec.scale);
        let t = Transition::new(
            format!("{}_step", var_name(spec, s.var)),
            theta.clone(),
            Some(theta),
        )
        .input(run, 1)
        .output(run, 1)
        .guard(g)
        .update(s.var, Expr::Var(s.var) + step)
        .fickle(FickleSpec {
            default: Some(FickleFn::point(resc)),
            by_trigger: vec![],
        });
        net.add_transition(t);
    }
    Ok(net)
}

/// Sampled values of the state variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub names: Vec<String>,
    pub points: Vec<(Rational, Vec<Rational>)>,
}

/// Earliest-date simulation of `net` (built from `spec`), sampled after each
/// firing. Samples at equal times are merged, keeping the last.
pub fn trajectory(
    net: &Net,
    spec: &OdeSpec,
    horizon: &Rational,
    max_steps: usize,
) -> Result<Trajectory> {
    let vars: Vec<VarId> = spec.states.iter().map(|s| s.var).collect();
    let tr = simulate(net, &Strategy::earliest(), horizon, max_steps)?;
    let sample = |c: &crate::model::Config| {
        vars.iter()
            .map(|&v| c.valuation[v].clone())
            .collect::<Vec<_>>()
    };
    let mut points = vec![(Rational::zero(), sample(&tr.initial.config))];
    let mut now = Rational::zero();
    for (step, st) in &tr.steps {
        match step {
            crate::semantics::Step::Delay(d) => now = &now + d,
            crate::semantics::Step::Fire(_) => {
                let v = sample(&st.config);
                match points.last_mut() {
                    Some((t, last)) if *t == now => *last = v,
                    _ => points.push((now.clone(), v)),
                }
            }
        }
    }
    let names = vars
        .iter()
        .map(|&v| var_name(spec, v).to_string())
        .collect();
    Ok(Trajectory { names, points })
}

/// Largest deviation from `analytic` over the sample times (in f64).
pub fn global_error(traj: &Trajectory, analytic: &dyn Fn(f64) -> Vec<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for (t, vals) in &traj.points {
        let reference = analytic(t.to_f64());
        for (v, r) in vals.iter().zip(reference) {
            worst = worst.max((v.to_f64() - r).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Env;
    use crate::model::Config;
    use crate::rational::q;
    use crate::scg::{explore, Limits};

    fn decay(method: Method, scale: i64, stop: Option<Expr>) -> OdeSpec {
        let mut base = Net::new("decay");
        let x = base.add_variable("x", Rational::int(4000));
        let mut s = OdeSpec::new(
            base,
            vec![StateVar {
                var: x,
                rhs: -Expr::Var(x),
                bounds: None,
            }],
            method,
        );
        s.scale = Rational::int(scale);
        s.stop = stop;
        s
    }

    fn qss(quantum: i64) -> OdeSpec {
        decay(
            Method::Qss {
                quantum: quantum.into(),
            },
            1,
            None,
        )
    }

    #[test]
    fn qss_decay_levels() {
        let spec = qss(500);
        let net = build_qss1(&spec).unwrap();
        let tr = trajectory(&net, &spec, &Rational::int(100), 1000).unwrap();
        assert_eq!(tr.points.len(), 9);
        let xs: Vec<i64> = tr
            .points
            .iter()
            .map(|(_, v)| v[0].as_small().unwrap().0)
            .collect();
        assert_eq!(xs, (0..=8).rev().map(|k| k * 500).collect::<Vec<_>>());
        let total = (1..=8).fold(Rational::zero(), |a, k| a + q(1, k));
        assert_eq!(tr.points.last().unwrap().0, total);
        assert_eq!(tr.points[1].0, q(1, 8));
    }

    #[test]
    fn qss_class_counts() {
        for (quantum, expected) in [(500, 10), (100, 42)] {
            let net = build_qss1(&qss(quantum)).unwrap();
            assert_eq!(
                explore(&net, &Limits::default()).unwrap().class_count(),
                expected
            );
        }
    }

    #[test]
    fn qss_zero_start_is_dead() {
        let mut spec = qss(500);
        spec.base.variables[0].initial = Rational::zero();
        spec.startup = false;
        let net = build_qss1(&spec).unwrap();
        assert!(net.enabled(&net.initial_config()).unwrap().is_empty());
    }

    #[test]
    fn euler_step_value() {
        let spec = decay(
            Method::Euler {
                step: 1150.into(),
                grid: None,
            },
            10_000,
            None,
        );
        let net = build_euler(&spec).unwrap();
        let c = net
            .fire_marking(&net.fire_marking(&net.initial_config(), 0).unwrap(), 1)
            .unwrap();
        assert_eq!(c.valuation[0], Rational::int(3540));
    }

    #[test]
    fn euler_times_are_multiples_of_h() {
        let spec = decay(
            Method::Euler {
                step: 1150.into(),
                grid: None,
            },
            5530,
            Some(Expr::Var(0).le(Expr::int(1))),
        );
        let net = build_euler(&spec).unwrap();
        let tr = trajectory(&net, &spec, &Rational::int(1_000_000), 1000).unwrap();
        for (k, (t, _)) in tr.points.iter().enumerate() {
            assert_eq!(*t, Rational::int(1150 * k as i64));
        }
    }

    #[test]
    fn euler_without_dynamics_runs_until_max_steps() {
        let mut spec = decay(
            Method::Euler {
                step: 1.into(),
                grid: None,
            },
            1,
            None,
        );
        spec.states[0].rhs = Expr::int(0);
        let net = build_euler(&spec).unwrap();
        let tr = simulate(&net, &Strategy::earliest(), &Rational::int(1000), 20).unwrap();
        assert_eq!(tr.stop, crate::semantics::Stop::MaxSteps);
        assert_eq!(tr.final_state().config.valuation[0], Rational::int(4000));
    }

    fn eval_rescale(mode: RescaleMode, f_old: i64, f_new: i64, theta: Rational) -> Rational {
        let f = Expr::Var(0);
        let e = rescale_expr(mode, &f, &Rational::one(), &Rational::one());
        let now = Config {
            marking: vec![],
            valuation: vec![f_new.into()],
        };
        let before = Config {
            marking: vec![],
            valuation: vec![f_old.into()],
        };
        e.eval_num(&Env::new(&now).with_old(&before).with_theta(&theta))
            .unwrap()
    }

    #[test]
    fn rescale_formulas() {
        assert_eq!(
            eval_rescale(RescaleMode::Physical, -2, -3, q(3, 10)),
            q(1, 5)
        );
        assert_eq!(
            eval_rescale(RescaleMode::RateRatio, -2, -3, q(3, 10)),
            q(9, 20)
        );
        for mode in [RescaleMode::Physical, RescaleMode::RateRatio] {
            assert_eq!(eval_rescale(mode, 4, 4, q(1, 7)), q(1, 7));
        }
        // opposite slopes: remaining distance 3/5 of a quantum 1, so 7/5 to go
        assert_eq!(
            eval_rescale(RescaleMode::Physical, -2, 1, q(3, 10)),
            q(7, 5)
        );
    }

    #[test]
    fn qss_error_bounds() {
        let spec = qss(500);
        let net = build_qss1(&spec).unwrap();
        let tr = trajectory(&net, &spec, &Rational::int(100), 1000).unwrap();
        let err = global_error(&tr, &|t| vec![4000.0 * (-t).exp()]);
        assert!(err < 500.0, "{err}");
        let exact = Trajectory {
            names: tr.names.clone(),
            points: vec![(Rational::zero(), vec![4000.into()])],
        };
        assert_eq!(global_error(&exact, &|t| vec![4000.0 * (-t).exp()]), 0.0);
    }
}
