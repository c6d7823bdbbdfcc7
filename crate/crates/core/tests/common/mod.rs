//! Random net generators and reference computations shared by the
//! integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fmt::Write;

use dtpn::domain::fm::LinearSystem;
use dtpn::domain::FiringDomain;
use dtpn::io::parse;
use dtpn::scg::StateClass;
use dtpn::{Config, Net, Rational, TimeBound};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape of a generated net.
#[derive(Clone, Copy)]
pub struct Shape {
    pub places: usize,
    pub transitions: usize,
    /// Interval bounds are drawn from `0..=max_bound`.
    pub max_bound: i64,
    /// Every transition moves tokens without creating any, so the net is
    /// bounded by its initial token count.
    pub conservative: bool,
    pub max_tokens: u32,
    /// Probability of an infinite upper bound.
    pub p_inf: f64,
}

impl Shape {
    pub fn small(places: usize, transitions: usize, max_bound: i64) -> Self {
        Shape {
            places,
            transitions,
            max_bound,
            conservative: false,
            max_tokens: 2,
            p_inf: 0.1,
        }
    }

    pub fn bounded(places: usize, transitions: usize, max_bound: i64, max_tokens: u32) -> Self {
        Shape {
            places,
            transitions,
            max_bound,
            conservative: true,
            max_tokens,
            p_inf: 0.0,
        }
    }
}

fn pick(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(rng);
    all.truncate(k.min(n));
    all.sort_unstable();
    all
}

/// Arc list with repeated places folded into weights.
fn names(places: &[usize]) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < places.len() {
        let w = places[i..].iter().take_while(|&&p| p == places[i]).count();
        let _ = if w == 1 {
            write!(out, " p{}", places[i])
        } else {
            write!(out, " p{}*{w}", places[i])
        };
        i += w;
    }
    out
}

fn arcs_out(rng: &mut ChaCha8Rng, shape: Shape, np: usize, pre: &[usize]) -> Vec<usize> {
    if shape.conservative {
        // same token count, preferably moved somewhere else
        let mut post = vec![];
        for _ in 0..4 {
            post = (0..pre.len()).map(|_| rng.gen_range(0..np)).collect();
            post.sort_unstable();
            if post != pre {
                break;
            }
        }
        post
    } else {
        let k = rng.gen_range(0..=2.min(np));
        pick(rng, np, k)
    }
}

/// Arcs and interval of each transition; `interval(t)` may override the
/// generated constant bounds.
pub fn net_text(
    rng: &mut ChaCha8Rng,
    shape: Shape,
    mut interval: impl FnMut(&mut ChaCha8Rng, usize) -> Option<String>,
    mut extra: impl FnMut(&mut ChaCha8Rng, usize) -> Vec<String>,
) -> String {
    let np = rng.gen_range(2.min(shape.places)..=shape.places);
    let nt = rng.gen_range(2.min(shape.transitions)..=shape.transitions);
    let mut s = String::from("net random\n");
    let mut tokens = vec![0u32; np];
    if shape.conservative {
        for _ in 0..shape.max_tokens {
            tokens[rng.gen_range(0..np)] += 1;
        }
    } else {
        for n in &mut tokens {
            *n = rng.gen_range(0..=shape.max_tokens);
        }
    }
    for (p, n) in tokens.iter().enumerate() {
        let _ = writeln!(s, "pl p{p} ({n})");
    }
    for t in 0..nt {
        let (pre, post) = if shape.conservative && t < np && rng.gen_bool(0.7) {
            // ring p_t -> p_{t+1}, sometimes reading a second place
            let (mut pre, mut post) = (vec![t], vec![(t + 1) % np]);
            if rng.gen_bool(0.3) {
                let c = rng.gen_range(0..np);
                pre.push(c);
                post.push(c);
            }
            pre.sort_unstable();
            post.sort_unstable();
            (pre, post)
        } else {
            let k = rng.gen_range(1..=2.min(np));
            let pre = pick(rng, np, k);
            let post = arcs_out(rng, shape, np, &pre);
            (pre, post)
        };
        let iv = interval(rng, t).unwrap_or_else(|| {
            let lo = rng.gen_range(0..=shape.max_bound);
            if rng.gen_bool(shape.p_inf) {
                format!("[{lo}, inf]")
            } else {
                format!("[{lo}, {}]", rng.gen_range(lo..=shape.max_bound))
            }
        });
        let _ = writeln!(s, "tr t{t} {iv}{} ->{}", names(&pre), names(&post));
        for line in extra(rng, nt) {
            let _ = writeln!(s, "  {line}");
        }
    }
    s
}

pub fn random_tpn(rng: &mut ChaCha8Rng, shape: Shape) -> Net {
    let text = net_text(rng, shape, |_, _| None, |_, _| vec![]);
    parse(&text).unwrap_or_else(|e| panic!("{e}\n{text}")).net
}

/// Translation net: some transitions get a clamped shift by `-2..=2` when a
/// chosen trigger fires.
pub fn random_translation(rng: &mut ChaCha8Rng, shape: Shape) -> Net {
    let text = net_text(
        rng,
        shape,
        |_, _| None,
        |rng, nt| {
            if !rng.gen_bool(0.6) {
                return vec![];
            }
            let trigger = rng.gen_range(0..nt);
            let a = rng.gen_range(-2..=2);
            let b = rng.gen_range(a..=2);
            vec![format!(
                "fickle on t{trigger} : [max(0, theta + {a}), max(0, theta + {b})]"
            )]
        },
    );
    parse(&text).unwrap_or_else(|e| panic!("{e}\n{text}")).net
}

/// Affine or quadratic (monotone) fickle functions.
pub fn random_general(rng: &mut ChaCha8Rng, shape: Shape) -> Net {
    let text = net_text(
        rng,
        shape,
        |_, _| None,
        |rng, _| {
            let f = match rng.gen_range(0..4) {
                0 => "fickle : [2 * theta, 2 * theta + 1]".to_string(),
                1 => "fickle : [theta / 2, theta]".to_string(),
                2 => "fickle : [theta * theta, theta * theta + 1] monotone".to_string(),
                _ => return vec![],
            };
            vec![f]
        },
    );
    parse(&text).unwrap_or_else(|e| panic!("{e}\n{text}")).net
}

/// Weak net: some intervals depend on the marking.
pub fn random_weak(rng: &mut ChaCha8Rng, shape: Shape) -> Net {
    let np = shape.places;
    let text = net_text(
        rng,
        shape,
        |rng, _| {
            if !rng.gen_bool(0.5) {
                return None;
            }
            let p = rng.gen_range(0..np);
            let c = rng.gen_range(0..=shape.max_bound);
            Some(format!("[#p{p}, #p{p} + {c}]"))
        },
        |_, _| vec![],
    );
    match parse(&text) {
        Ok(d) => d.net,
        // the marking-dependent bound named a place that was not generated
        Err(_) => random_weak(rng, shape),
    }
}

/// Successor domain of firing `t`, computed by maximizing each bound of the
/// new dates over the parent domain restricted to `t` firing first (Fourier-
/// Motzkin elimination). Persistent dates are `phi_k - phi_t`; newly enabled
/// ones range over their static interval independently. `None` when `t`
/// cannot fire first.
pub fn fm_successor(net: &Net, class: &StateClass, t: usize) -> Option<FiringDomain> {
    let d = &class.domain;
    let n = d.dim();
    let it = d.position(t)?;
    let (pers, newly, next) = net.pers_nenabl(&class.config, t).unwrap();
    let mut succ: Vec<usize> = pers.iter().chain(&newly).copied().collect();
    succ.sort_unstable();
    let one = Rational::one();
    let mut sys = LinearSystem::nonnegative(n);
    sys.add_domain(d, &(0..n).collect::<Vec<_>>());
    for k in 0..n {
        sys.add_le(&[(it, one.clone()), (k, -&one)], Rational::zero());
    }
    if !sys.is_feasible() {
        return None;
    }
    // objective terms of each new date; `None` for newly enabled ones
    let terms: Vec<Option<usize>> = succ
        .iter()
        .map(|k| pers.contains(k).then(|| d.position(*k).unwrap()))
        .collect();
    let ivs: Vec<_> = succ
        .iter()
        .map(|&k| net.static_interval(k, &next, Some(&class.config)).unwrap())
        .collect();
    let max_of = |obj: Vec<(usize, Rational)>| sys.maximize(&obj).unwrap();
    let upper = |i: usize| match terms[i] {
        Some(p) => max_of(vec![(p, one.clone()), (it, -&one)]),
        None => ivs[i].hi.clone(),
    };
    let lower = |i: usize| match terms[i] {
        Some(p) => match max_of(vec![(p, -&one), (it, one.clone())]) {
            TimeBound::Finite(r) => -r,
            TimeBound::Infinite => Rational::zero(),
        },
        None => ivs[i].lo.clone(),
    };
    let mut out = FiringDomain::unconstrained(succ.clone());
    for i in 0..succ.len() {
        out.set_alpha(i, &lower(i));
        out.set_beta(i, upper(i));
        for j in 0..succ.len() {
            if i == j {
                continue;
            }
            let g = match (terms[i], terms[j]) {
                (Some(p), Some(q)) => max_of(vec![(p, one.clone()), (q, -&one)]),
                _ => upper(i).sub_r(&lower(j)),
            };
            out.set_gamma(i, j, g);
        }
    }
    out.close()
}

pub fn config_set(configs: impl IntoIterator<Item = Config>) -> BTreeSet<Config> {
    configs.into_iter().collect()
}
