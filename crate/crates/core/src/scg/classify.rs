//! Net classes and the exactness verdict of the class graph.

use serde::Serialize;

use crate::error::Result;
use crate::expr::{classify, FickleClass};
use crate::model::Net;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum NetClass {
    Tpn,
    Weak,
    Translation,
    General,
}

impl NetClass {
    pub fn label(self) -> &'static str {
        match self {
            NetClass::Tpn => "TPN",
            NetClass::Weak => "weak DTPN",
            NetClass::Translation => "translation DTPN",
            NetClass::General => "general DTPN",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExactnessReport {
    pub transitions: Vec<(String, FickleClass)>,
    pub net_class: NetClass,
    pub exact: bool,
}

pub fn classify_net(net: &Net) -> Result<ExactnessReport> {
    let mut transitions = vec![];
    let mut worst = FickleClass::Identity;
    for t in &net.transitions {
        let c = classify(&t.fickle)?;
        worst = worst.max(c);
        transitions.push((t.name.clone(), c));
    }
    let constant = net.transitions.iter().all(|t| t.interval.is_config_free());
    let net_class = match worst {
        FickleClass::Identity if constant => NetClass::Tpn,
        FickleClass::Identity => NetClass::Weak,
        FickleClass::Translation => NetClass::Translation,
        _ => NetClass::General,
    };
    Ok(ExactnessReport {
        transitions,
        net_class,
        exact: net_class != NetClass::General,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Expr, FickleFn, FickleSpec};
    use crate::model::Transition;

    #[test]
    fn classes() {
        let mut n = Net::new("n");
        let p = n.add_place("p", 1);
        n.add_transition(Transition::timed("a", 1.into(), 2.into()).input(p, 1));
        let r = classify_net(&n).unwrap();
        assert_eq!((r.net_class, r.exact), (NetClass::Tpn, true));

        n.add_transition(Transition::new("b", Expr::Tokens(p), None));
        assert_eq!(classify_net(&n).unwrap().net_class, NetClass::Weak);

        let f = FickleSpec {
            default: None,
            by_trigger: vec![(0, FickleFn::point(Expr::Theta + Expr::int(1)))],
        };
        n.transitions[1].fickle = f;
        assert_eq!(classify_net(&n).unwrap().net_class, NetClass::Translation);

        n.transitions[1].fickle.default = Some(FickleFn::point(Expr::Theta * Expr::Var(0)));
        n.add_variable("k", 2.into());
        let r = classify_net(&n).unwrap();
        assert_eq!((r.net_class, r.exact), (NetClass::General, false));
    }
}
