pub mod aids;
pub mod cli;
pub mod curves;
pub mod domain;
pub mod error;
pub mod graph;
pub mod instances;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod solver;
