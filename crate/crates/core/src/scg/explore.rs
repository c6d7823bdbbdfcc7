//! Breadth-first class graph construction.
//!
//! Each level is processed in chunks; successors of a chunk are computed in
//! parallel and merged in frontier order, so numbering does not depend on
//! the number of workers.

use std::time::{Duration, Instant};

use indexmap::IndexSet;
use rayon::prelude::*;

use super::{initial_class, successors, StateClass};
use crate::error::{Error, Result};
use crate::model::{Net, TransId};

const CHUNK: usize = 2048;

/// Fired transition and the key of the class it leads to.
type Edge = (TransId, Vec<u8>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Limits {
    pub max_classes: usize,
    pub max_depth: Option<usize>,
    pub workers: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_classes: 10_000_000,
            max_depth: None,
            workers: 1,
        }
    }
}

impl Limits {
    pub fn classes(max_classes: usize) -> Self {
        Limits {
            max_classes,
            ..Default::default()
        }
    }
}

/// Classes are stored as canonical keys and decoded on demand.
#[derive(Debug, Clone)]
pub struct ClassGraph {
    keys: IndexSet<Box<[u8]>>,
    depth: Vec<u32>,
    pub edges: Vec<(u32, TransId, u32)>,
    pub truncated: bool,
    pub elapsed: Duration,
}

impl ClassGraph {
    pub fn class_count(&self) -> usize {
        self.keys.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn class(&self, net: &Net, id: usize) -> StateClass {
        StateClass::from_key(net, &self.keys[id]).expect("stored keys decode")
    }

    pub fn classes<'a>(&'a self, net: &'a Net) -> impl Iterator<Item = StateClass> + 'a {
        (0..self.keys.len()).map(move |i| self.class(net, i))
    }

    pub fn depth(&self, id: usize) -> usize {
        self.depth[id] as usize
    }

    pub fn find(&self, class: &StateClass) -> Option<usize> {
        self.keys.get_index_of(class.key().as_slice())
    }

    /// Outgoing edges of every class, in edge order.
    pub fn adjacency(&self) -> Vec<Vec<(TransId, u32)>> {
        let mut adj = vec![vec![]; self.keys.len()];
        for &(s, t, d) in &self.edges {
            adj[s as usize].push((t, d));
        }
        adj
    }
}

pub fn explore(net: &Net, limits: &Limits) -> Result<ClassGraph> {
    let start = Instant::now();
    let pool = if limits.workers > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(limits.workers)
                .build()
                .map_err(|e| Error::Internal(e.to_string()))?,
        )
    } else {
        None
    };
    let root = initial_class(net)?;
    let mut keys: IndexSet<Box<[u8]>> = IndexSet::new();
    keys.insert(root.key().into_boxed_slice());
    let mut depth = vec![0u32];
    let mut edges = vec![];
    let mut truncated = limits.max_classes == 0;
    let mut frontier: Vec<u32> = vec![0];
    let mut level = 0usize;

    'levels: while !frontier.is_empty() {
        if limits.max_depth.is_some_and(|d| level >= d) {
            // unexpanded classes with enabled transitions are cut off
            truncated = frontier.iter().any(|&id| {
                let c = StateClass::from_key(net, &keys[id as usize]).expect("stored keys decode");
                c.domain.dim() > 0
            });
            break;
        }
        let mut next = vec![];
        for chunk in frontier.chunks(CHUNK) {
            let work = |&id: &u32| -> Result<Vec<Edge>> {
                let c = StateClass::from_key(net, &keys[id as usize]).expect("stored keys decode");
                Ok(successors(net, &c)?
                    .into_iter()
                    .map(|(t, s)| (t, s.key()))
                    .collect())
            };
            let results: Vec<Result<Vec<Edge>>> = match &pool {
                Some(p) => p.install(|| chunk.par_iter().map(work).collect()),
                None => chunk.iter().map(work).collect(),
            };
            for (&src, res) in chunk.iter().zip(results) {
                for (t, key) in res? {
                    let (idx, fresh) = keys.insert_full(key.into_boxed_slice());
                    if fresh {
                        if keys.len() > limits.max_classes {
                            keys.pop();
                            truncated = true;
                            break 'levels;
                        }
                        depth.push(level as u32 + 1);
                        next.push(idx as u32);
                    }
                    edges.push((src, t, idx as u32));
                }
            }
        }
        frontier = next;
        level += 1;
    }
    Ok(ClassGraph {
        keys,
        depth,
        edges,
        truncated,
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Expr, FickleFn, FickleSpec};
    use crate::model::Transition;

    #[test]
    fn single_transition_graph() {
        let mut n = Net::new("n");
        let p = n.add_place("p", 1);
        let q = n.add_place("q", 0);
        n.add_transition(
            Transition::timed("t", 2.into(), 3.into())
                .input(p, 1)
                .output(q, 1),
        );
        let g = explore(&n, &Limits::default()).unwrap();
        assert_eq!(
            (g.class_count(), g.edge_count(), g.truncated),
            (2, 1, false)
        );
    }

    #[test]
    fn ever_delayed_transition_truncates() {
        let mut n = Net::new("n");
        let p = n.add_place("p", 1);
        let a = n.add_place("a", 1);
        n.add_transition(
            Transition::timed("tick", 1.into(), 1.into())
                .input(p, 1)
                .output(p, 1),
        );
        // the pending date grows by one per tick
        let f = FickleFn::point(Expr::Theta + Expr::int(2));
        let slow = Transition::timed("slow", 1.into(), 1.into()).input(a, 1);
        n.add_transition(slow.fickle(FickleSpec {
            default: Some(f),
            by_trigger: vec![],
        }));
        let g = explore(&n, &Limits::classes(50)).unwrap();
        assert!(g.truncated);
        assert_eq!(g.class_count(), 50);
    }

    #[test]
    fn depth_limit() {
        let mut n = Net::new("n");
        let p = n.add_place("p", 0);
        n.add_transition(Transition::timed("gen", 1.into(), 1.into()).output(p, 1));
        let g = explore(
            &n,
            &Limits {
                max_depth: Some(3),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(g.class_count(), 4);
        assert!(g.truncated);
    }
}
