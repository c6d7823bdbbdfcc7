//! Writer for the text format; `parse(print(net))` gives `net` back.

use std::fmt::Write;

use super::parse::HEADER;
use crate::expr::{Expr, FickleFn};
use crate::model::{Net, Transition};
use crate::qss::{Method, OdeSpec, RescaleMode};

fn interval(net: &Net, lo: &Expr, hi: Option<&Expr>) -> String {
    let hi = hi.map_or("inf".to_string(), |e| e.to_source(net));
    format!("[{}, {}]", lo.to_source(net), hi)
}

fn fickle_line(net: &Net, trigger: Option<usize>, f: &FickleFn) -> String {
    let mut s = String::from("  fickle");
    if let Some(k) = trigger {
        let _ = write!(s, " on {}", net.transitions[k].name);
    }
    let _ = write!(s, " : [{}, {}]", f.lo.to_source(net), f.hi.to_source(net));
    match &f.monotone {
        Some(r) if r.is_zero() => s.push_str(" monotone"),
        Some(r) => {
            let _ = write!(s, " monotone from {r}");
        }
        None => {}
    }
    s
}

fn transition(net: &Net, t: &Transition, out: &mut String) {
    let _ = write!(
        out,
        "tr {} {}",
        t.name,
        interval(net, &t.interval.lo, t.interval.hi.as_ref())
    );
    for &(p, w) in &t.pre {
        let name = &net.places[p].name;
        let _ = if w == 1 {
            write!(out, " {name}")
        } else {
            write!(out, " {name}*{w}")
        };
    }
    for &p in &t.inhibitors {
        let _ = write!(out, " {}?0", net.places[p].name);
    }
    out.push_str(" ->");
    for &(p, w) in &t.post {
        let name = &net.places[p].name;
        let _ = if w == 1 {
            write!(out, " {name}")
        } else {
            write!(out, " {name}*{w}")
        };
    }
    out.push('\n');
    if let Some(g) = &t.guard {
        let _ = writeln!(out, "  on {}", g.to_source(net));
    }
    if !t.updates.is_empty() {
        let ups: Vec<String> = t
            .updates
            .iter()
            .map(|(v, e)| format!("{} := {}", net.variables[*v].name, e.to_source(net)))
            .collect();
        let _ = writeln!(out, "  do {}", ups.join("; "));
    }
    if let Some(f) = &t.fickle.default {
        let _ = writeln!(out, "{}", fickle_line(net, None, f));
    }
    for (k, f) in &t.fickle.by_trigger {
        let _ = writeln!(out, "{}", fickle_line(net, Some(*k), f));
    }
}

fn body(net: &Net, out: &mut String) {
    for p in &net.places {
        let _ = writeln!(out, "pl {} ({})", p.name, p.initial);
    }
    for v in &net.variables {
        let _ = writeln!(out, "var {} = {}", v.name, v.initial);
    }
    for t in &net.transitions {
        transition(net, t, out);
    }
}

pub fn print_net(net: &Net) -> String {
    let mut out = format!("{HEADER}\nnet {}\n", net.name);
    body(net, &mut out);
    out
}

pub fn print_ode(spec: &OdeSpec) -> String {
    let net = &spec.base;
    let mut out = format!("{HEADER}\node {}\n", net.name);
    body(net, &mut out);
    for s in &spec.states {
        let name = &net.variables[s.var].name;
        let _ = writeln!(out, "der {name} = {}", s.rhs.to_source(net));
        if let Some((lo, hi)) = &s.bounds {
            let _ = writeln!(out, "bound {name} [{lo}, {hi}]");
        }
    }
    match &spec.method {
        Method::Qss { quantum } => {
            let _ = writeln!(out, "method qss {quantum}");
        }
        Method::Euler { step, grid } => {
            let _ = writeln!(out, "method euler {step}");
            if let Some(g) = grid {
                let _ = writeln!(out, "grid {g}");
            }
        }
    }
    let _ = writeln!(out, "scale {}", spec.scale);
    if let Some(s) = &spec.stop {
        let _ = writeln!(out, "stop {}", s.to_source(net));
    }
    let mode = match spec.mode {
        RescaleMode::Physical => "physical",
        RescaleMode::RateRatio => "paper",
    };
    let _ = writeln!(out, "rescale {mode}");
    let _ = writeln!(out, "startup {}", if spec.startup { "on" } else { "off" });
    out
}
