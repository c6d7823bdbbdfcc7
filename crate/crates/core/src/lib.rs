//! Time Petri nets whose pending firing dates may be rewritten when other
//! transitions fire: concrete simulation, state class graphs, QSS and Euler
//! encodings of ODEs, and expansion of weak nets into 1-safe time Petri nets.

pub mod domain;
pub mod error;
pub mod expand;
pub mod expr;
pub mod io;
pub mod model;
pub mod models;
pub mod qss;
pub mod rational;
pub mod scg;
pub mod semantics;

pub use error::{Error, Result};
pub use model::{Config, Net, TimeInterval, Transition};
pub use rational::{Rational, TimeBound};
