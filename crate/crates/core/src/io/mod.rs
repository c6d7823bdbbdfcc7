//! Text format, diagnostics and exports.

use std::fmt;

mod export;
mod parse;
mod print;

pub use export::{
    export_dot, export_edges_csv, export_json, export_trace_csv, export_trace_json,
    export_trajectory_csv, graph_json, pretty, report_json, trace_delays, trace_json, write_json,
};
pub use parse::{
    parse, parse_document, parse_expr, parse_ode, Document, NetDocument, Spans, HEADER,
};
pub use print::{print_net, print_ode};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseErrors(pub Vec<Diagnostic>);

impl fmt::Display for ParseErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}:{}: {}", d.line, d.col, d.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseErrors {}
