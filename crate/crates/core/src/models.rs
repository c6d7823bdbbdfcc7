//! Built-in example models.

use crate::expr::{Expr, FickleFn, FickleSpec};
use crate::model::{Net, Transition};
use crate::qss::{Method, OdeSpec, StateVar};
use crate::rational::{Rational, TimeBound};

/// One preemptive task (period 5, duration 1) and `n - 1` simple tasks
/// (period 10, duration 6). Task1 preempts the others: each time it starts,
/// the completion date of every running simple task moves back by 1.
///
/// A release while the task is not waiting marks that task's `err` place.
pub fn scheduling(n: usize) -> Net {
    assert!(n >= 2, "at least two tasks");
    let mut net = Net::new(format!("sched{n}"));
    let task = |net: &mut Net, i: usize, period: i64| {
        let s = net.add_place(format!("s{i}"), 1);
        let psched = net.add_place(format!("psched{i}"), 1);
        let w = net.add_place(format!("w{i}"), 1);
        let e = net.add_place(format!("e{i}"), 0);
        let err = net.add_place(format!("err{i}"), 0);
        let p = Rational::int(period);
        net.add_transition(
            Transition::timed(format!("Sched{i}"), p.clone(), TimeBound::Finite(p))
                .input(s, 1)
                .output(s, 1)
                .output(psched, 1),
        );
        net.add_transition(
            Transition::timed(format!("Error{i}"), 0.into(), TimeBound::zero())
                .input(psched, 1)
                .inhibitor(w)
                .output(err, 1),
        );
        (psched, w, e)
    };
    let (ps1, w1, e1) = task(&mut net, 1, 5);
    let t1s = net.add_transition(
        Transition::timed("Task1Scheduled", 0.into(), TimeBound::zero())
            .input(w1, 1)
            .input(ps1, 1)
            .output(e1, 1),
    );
    net.add_transition(
        Transition::timed("Task1Finished", 1.into(), 1.into())
            .input(e1, 1)
            .output(w1, 1),
    );
    for i in 2..=n {
        let (ps, w, e) = task(&mut net, i, 10);
        let sched = Transition::timed(format!("Task{i}Scheduled"), 0.into(), TimeBound::zero());
        net.add_transition(sched.input(w, 1).input(ps, 1).inhibitor(e1).output(e, 1));
        let shift = FickleFn::point(Expr::Theta + Expr::int(1));
        let fin = Transition::timed(format!("Task{i}Finished"), 6.into(), 6.into())
            .input(e, 1)
            .output(w, 1);
        net.add_transition(fin.fickle(FickleSpec {
            default: None,
            by_trigger: vec![(t1s, shift)],
        }));
    }
    net
}

/// Three concurrent transitions where firing `t` squares the shifted date of
/// `j`; the tightest bound on `i - j` afterwards is 9/4.
pub fn quadratic() -> Net {
    let mut n = Net::new("quadratic");
    let pt = n.add_place("pt", 1);
    let pi = n.add_place("pi", 1);
    let pj = n.add_place("pj", 1);
    let t = n.add_transition(Transition::timed("t", 0.into(), 1.into()).input(pt, 1));
    n.add_transition(Transition::timed("i", 0.into(), 3.into()).input(pi, 1));
    let half = Expr::Num(Rational::new(1, 2));
    let sq = (Expr::Theta - half.clone()) * (Expr::Theta - half);
    let f = FickleFn::point(sq).monotone_from(Rational::new(1, 2));
    let j = Transition::timed("j", Rational::new(3, 2), 3.into()).input(pj, 1);
    n.add_transition(j.fickle(FickleSpec {
        default: None,
        by_trigger: vec![(t, f)],
    }));
    n
}

/// Time scale that makes the Euler counterparts of the decay models land on
/// 38 and 182 classes with the `x <= 1` stop condition.
pub const DECAY_SCALE: i64 = 5540;

/// `dx/dt = -x / K` from 4000.
pub fn decay(method: Method) -> OdeSpec {
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
    s.scale = Rational::int(DECAY_SCALE);
    if let Method::Euler { .. } = s.method {
        s.stop = Some(Expr::Var(x).le(Expr::int(1)));
    }
    s
}

/// Cylinder position: `dx/dt = 5 - x` while opening, `-1` while closing,
/// on `[0, 5]`; the mode may toggle at any time. The Euler variant rounds
/// to a 1/100 grid, which gives it fixed points at both ends.
pub fn landing_gear(method: Method) -> OdeSpec {
    let mut base = Net::new("landing_gear");
    let x = base.add_variable("x", Rational::zero());
    let mode = base.add_variable("mode", Rational::zero());
    let ctl = base.add_place("ctl", 1);
    let toggle = Transition::timed("toggle", 0.into(), TimeBound::Infinite)
        .input(ctl, 1)
        .output(ctl, 1)
        .update(mode, Expr::int(1) - Expr::Var(mode));
    base.add_transition(toggle);
    let opening = Expr::Var(mode).eq_(Expr::int(0));
    let rhs = Expr::ite(opening, Expr::int(5) - Expr::Var(x), Expr::int(-1));
    let bounds = Some((Rational::zero(), Rational::int(5)));
    let mut s = OdeSpec::new(
        base,
        vec![StateVar {
            var: x,
            rhs,
            bounds,
        }],
        method,
    );
    if let Method::Euler { grid, .. } = &mut s.method {
        *grid = Some(Rational::new(1, 100));
    }
    s.startup = false;
    s
}

/// Set point of the cruise controller.
pub const PI_TARGET: i64 = 10;

/// `dx1/dt = x2`, `dx2/dt = kp*x2 + ki*(S - x1)` with `kp = -3`,
/// `ki = 1/10`, `S = 10`, from rest at 0.
///
/// The Euler variant stops once both `|S - x1|` and `|x2|` are at most
/// 1/100, with values rounded to a 10^-6 grid after each step.
pub fn pi_controller(method: Method) -> OdeSpec {
    let (kp, ki, target) = (
        Rational::int(-3),
        Rational::new(1, 10),
        Rational::int(PI_TARGET),
    );
    let mut base = Net::new("pi_controller");
    let x1 = base.add_variable("x1", Rational::zero());
    let x2 = base.add_variable("x2", Rational::zero());
    let f1 = Expr::Var(x2);
    let f2 =
        Expr::Num(kp) * Expr::Var(x2) + Expr::Num(ki) * (Expr::Num(target.clone()) - Expr::Var(x1));
    let states = vec![
        StateVar {
            var: x1,
            rhs: f1,
            bounds: None,
        },
        StateVar {
            var: x2,
            rhs: f2,
            bounds: None,
        },
    ];
    let mut s = OdeSpec::new(base, states, method);
    if let Method::Euler { grid, .. } = &mut s.method {
        *grid = Some(Rational::new(1, 1_000_000));
        let tol = Expr::Num(Rational::new(1, 100));
        let near = (Expr::Num(target) - Expr::Var(x1)).abs().le(tol.clone());
        s.stop = Some(near.and(Expr::Var(x2).abs().le(tol)));
    }
    s
}
