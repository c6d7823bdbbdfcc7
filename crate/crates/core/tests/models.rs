//! The shipped model files describe the same nets as the built-in builders.

use std::path::Path;

use dtpn::io::{parse_document, print_net, print_ode, Document};
use dtpn::models;
use dtpn::qss::{Method, OdeSpec};
use dtpn::{Net, Rational};

fn read(name: &str) -> Document {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(format!("{name}.dtpn"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_document(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn net_file(name: &str) -> Net {
    match read(name) {
        Document::Net(d) => d.net,
        Document::Ode(_) => panic!("{name} is an ODE description"),
    }
}

fn ode_file(name: &str) -> OdeSpec {
    match read(name) {
        Document::Ode(s) => s,
        Document::Net(_) => panic!("{name} is a net"),
    }
}

fn qss(quantum: Rational) -> Method {
    Method::Qss { quantum }
}

fn euler(step: Rational, grid: Option<Rational>) -> Method {
    Method::Euler { step, grid }
}

fn same_ode(name: &str, built: OdeSpec) {
    let file = ode_file(name);
    assert_eq!(print_ode(&file), print_ode(&built), "{name}");
    assert_eq!(file.build().unwrap(), built.build().unwrap(), "{name}");
}

#[test]
fn scheduling_files() {
    for n in [2, 3, 5, 10] {
        let name = format!("sched{n}");
        let built = models::scheduling(n);
        assert_eq!(print_net(&net_file(&name)), print_net(&built), "{name}");
        assert_eq!(net_file(&name), built, "{name}");
    }
}

#[test]
fn quadratic_file() {
    assert_eq!(net_file("quadratic"), models::quadratic());
}

#[test]
fn decay_files() {
    same_ode("decay_qss500", models::decay(qss(500.into())));
    same_ode("decay_qss100", models::decay(qss(100.into())));
    same_ode("decay_euler1150", models::decay(euler(1150.into(), None)));
    same_ode("decay_euler250", models::decay(euler(250.into(), None)));
}

#[test]
fn controller_and_gear_files() {
    let r = Rational::new;
    same_ode("pi_qss", models::pi_controller(qss(r(1, 10))));
    same_ode(
        "pi_euler_h10",
        models::pi_controller(euler(r(1, 10), Some(r(1, 1_000_000)))),
    );
    same_ode(
        "pi_euler_h100",
        models::pi_controller(euler(r(1, 100), Some(r(1, 1_000_000)))),
    );
    same_ode("gear_qss", models::landing_gear(qss(r(1, 10))));
    same_ode(
        "gear_euler",
        models::landing_gear(euler(r(1, 10), Some(r(1, 100)))),
    );
}

#[test]
fn weak_files_parse() {
    for name in ["weak_conflict", "weak_buffer"] {
        let net = net_file(name);
        assert!(!net.transitions.is_empty(), "{name}");
    }
}
