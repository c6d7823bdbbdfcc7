//! DOT, JSON and CSV exports. Output depends only on the inputs, so runs are
//! byte-identical whatever the worker count.

use std::fmt::Write;

use serde_json::{json, Map, Value};

use super::parse::HEADER;
use crate::domain::FiringDomain;
use crate::model::{Config, Net};
use crate::qss::Trajectory;
use crate::rational::{Rational, TimeBound};
use crate::scg::{ClassGraph, ExactnessReport};
use crate::semantics::{ConcreteState, Step, Trace};

const FORMAT: &str = "dtpn-format 1";

fn rat(r: &Rational) -> Value {
    serde_json::to_value(r).expect("rationals serialize")
}

fn bound(b: &TimeBound) -> Value {
    serde_json::to_value(b).expect("bounds serialize")
}

/// Marking with zero entries omitted, plus the valuation.
fn config_json(net: &Net, c: &Config) -> Value {
    let marking: Map<String, Value> = c
        .marking
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0)
        .map(|(p, &n)| (net.places[p].name.clone(), json!(n)))
        .collect();
    let valuation: Map<String, Value> = c
        .valuation
        .iter()
        .enumerate()
        .map(|(v, r)| (net.variables[v].name.clone(), rat(r)))
        .collect();
    json!({ "marking": marking, "valuation": valuation })
}

fn domain_json(net: &Net, d: &FiringDomain) -> Value {
    let name = |k: usize| net.transitions[d.vars()[k]].name.clone();
    let mut vars = vec![];
    for k in 0..d.dim() {
        let mut gamma = Map::new();
        for j in 0..d.dim() {
            if j != k {
                gamma.insert(name(j), bound(d.gamma(k, j)));
            }
        }
        vars.push(json!({ "transition": name(k), "alpha": rat(&d.alpha(k)), "beta": bound(d.beta(k)), "gamma": gamma }));
    }
    Value::Array(vars)
}

pub fn graph_json(graph: &ClassGraph, net: &Net, report: Option<&ExactnessReport>) -> Value {
    let classes: Vec<Value> = graph
        .classes(net)
        .enumerate()
        .map(|(id, c)| {
            let mut v = config_json(net, &c.config);
            v["id"] = json!(id);
            v["depth"] = json!(graph.depth(id));
            v["domain"] = domain_json(net, &c.domain);
            v
        })
        .collect();
    let edges: Vec<Value> = graph
        .edges
        .iter()
        .map(|&(s, t, d)| json!({ "from": s, "transition": net.transitions[t].name, "to": d }))
        .collect();
    let mut out = json!({
        "format": FORMAT,
        "net": net.name,
        "classes": classes,
        "edges": edges,
        "stats": { "classes": graph.class_count(), "edges": graph.edge_count(), "truncated": graph.truncated },
    });
    if let Some(r) = report {
        out["exactness"] = report_json(r);
    }
    out
}

pub fn export_json(graph: &ClassGraph, net: &Net, report: Option<&ExactnessReport>) -> String {
    let mut out = vec![];
    write_json(&mut out, graph, net, report).expect("writing to memory succeeds");
    String::from_utf8(out).expect("json is utf-8")
}

/// Same document as [`graph_json`], written one class per line so large
/// graphs never exist as a single value.
pub fn write_json(
    w: &mut (impl std::io::Write + ?Sized),
    graph: &ClassGraph,
    net: &Net,
    report: Option<&ExactnessReport>,
) -> std::io::Result<()> {
    let s = |v: &Value| serde_json::to_string(v).expect("json values serialize");
    writeln!(
        w,
        "{{\n  \"format\": {},\n  \"net\": {},\n  \"classes\": [",
        s(&json!(FORMAT)),
        s(&json!(net.name))
    )?;
    for (id, c) in graph.classes(net).enumerate() {
        let mut v = config_json(net, &c.config);
        v["id"] = json!(id);
        v["depth"] = json!(graph.depth(id));
        v["domain"] = domain_json(net, &c.domain);
        let sep = if id + 1 < graph.class_count() {
            ","
        } else {
            ""
        };
        writeln!(w, "    {}{sep}", s(&v))?;
    }
    writeln!(w, "  ],\n  \"edges\": [")?;
    for (i, &(a, t, b)) in graph.edges.iter().enumerate() {
        let sep = if i + 1 < graph.edges.len() { "," } else { "" };
        writeln!(
            w,
            "    {}{sep}",
            s(&json!({ "from": a, "transition": net.transitions[t].name, "to": b }))
        )?;
    }
    let stats = json!({ "classes": graph.class_count(), "edges": graph.edge_count(), "truncated": graph.truncated });
    write!(w, "  ],\n  \"stats\": {}", s(&stats))?;
    if let Some(r) = report {
        write!(w, ",\n  \"exactness\": {}", s(&report_json(r)))?;
    }
    writeln!(w, "\n}}")
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

pub fn report_json(r: &ExactnessReport) -> Value {
    let transitions: Map<String, Value> = r
        .transitions
        .iter()
        .map(|(n, c)| {
            (
                n.clone(),
                serde_json::to_value(c).expect("classes serialize"),
            )
        })
        .collect();
    json!({ "net_class": r.net_class.label(), "exact": r.exact, "transitions": transitions })
}

fn state_json(net: &Net, s: &ConcreteState) -> Value {
    let mut v = config_json(net, &s.config);
    let phi: Map<String, Value> = s
        .phi
        .iter()
        .map(|(t, d)| (net.transitions[*t].name.clone(), rat(d)))
        .collect();
    v["phi"] = Value::Object(phi);
    v
}

pub fn trace_json(trace: &Trace, net: &Net) -> Value {
    let mut now = Rational::zero();
    let steps: Vec<Value> = trace
        .steps
        .iter()
        .map(|(step, st)| {
            let head = match step {
                Step::Delay(d) => {
                    now = &now + d;
                    json!({ "delay": rat(d) })
                }
                Step::Fire(t) => json!({ "fire": net.transitions[*t].name, "time": rat(&now) }),
            };
            json!({ "step": head, "state": state_json(net, st) })
        })
        .collect();
    json!({
        "format": FORMAT,
        "net": net.name,
        "initial": state_json(net, &trace.initial),
        "steps": steps,
        "elapsed": rat(&trace.elapsed),
        "stop": trace.stop,
    })
}

pub fn export_trace_json(trace: &Trace, net: &Net) -> String {
    pretty(&trace_json(trace, net))
}

/// Delays recorded in an exported trace, in order.
pub fn trace_delays(v: &Value) -> Option<Vec<Rational>> {
    v["steps"]
        .as_array()?
        .iter()
        .filter_map(|s| s["step"].get("delay"))
        .map(|d| serde_json::from_value(d.clone()).ok())
        .collect()
}

fn config_label(net: &Net, c: &Config) -> String {
    let mut parts: Vec<String> = c
        .marking
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0)
        .map(|(p, &n)| {
            if n == 1 {
                net.places[p].name.clone()
            } else {
                format!("{}*{n}", net.places[p].name)
            }
        })
        .collect();
    parts.extend(
        c.valuation
            .iter()
            .enumerate()
            .map(|(v, r)| format!("{}={r}", net.variables[v].name)),
    );
    parts.join(" ")
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\")
        .replace('"', "\\\"")
        .replace('\n', "\\n")
}

pub fn export_dot(graph: &ClassGraph, net: &Net, with_domains: bool) -> String {
    let mut out = format!("// {HEADER}\ndigraph \"{}\" {{\n", escape(&net.name));
    if graph.truncated {
        let _ = writeln!(
            out,
            "  // truncated: exploration stopped at {} classes",
            graph.class_count()
        );
    }
    for (id, c) in graph.classes(net).enumerate() {
        let mut label = config_label(net, &c.config);
        if with_domains {
            label.push('\n');
            label.push_str(c.domain.dump(net).trim_end());
        }
        let _ = writeln!(out, "  c{id} [label=\"{}\"];", escape(&label));
    }
    for &(s, t, d) in &graph.edges {
        let _ = writeln!(
            out,
            "  c{s} -> c{d} [label=\"{}\"];",
            escape(&net.transitions[t].name)
        );
    }
    out.push_str("}\n");
    out
}

pub fn export_edges_csv(graph: &ClassGraph, net: &Net) -> String {
    let mut out = String::from("from,transition,to\n");
    for &(s, t, d) in &graph.edges {
        let _ = writeln!(out, "{s},{},{d}", net.transitions[t].name);
    }
    out
}

/// One row per firing: time, transition and the valuation afterwards.
pub fn export_trace_csv(trace: &Trace, net: &Net) -> String {
    let mut out = String::from("time,transition");
    for v in &net.variables {
        let _ = write!(out, ",{}", v.name);
    }
    out.push('\n');
    let row = |out: &mut String, now: &Rational, name: &str, c: &Config| {
        let _ = write!(out, "{now},{name}");
        for r in &c.valuation {
            let _ = write!(out, ",{r}");
        }
        out.push('\n');
    };
    let mut now = Rational::zero();
    row(&mut out, &now, "", &trace.initial.config);
    for (step, st) in &trace.steps {
        match step {
            Step::Delay(d) => now = &now + d,
            Step::Fire(t) => row(&mut out, &now, &net.transitions[*t].name, &st.config),
        }
    }
    out
}

pub fn export_trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("time");
    for n in &traj.names {
        let _ = write!(out, ",{n}");
    }
    out.push('\n');
    for (t, vals) in &traj.points {
        let _ = write!(out, "{t}");
        for v in vals {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}
