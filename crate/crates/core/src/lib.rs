//! Constitutional governance over metric spaces.

pub mod amendment;
pub mod epoch;
pub mod gap;
pub mod governance;
pub mod metric;
pub mod sim;

pub use governance::{Aggregator, Electorate, GovernanceError, RoundResult, Rule, Threshold};
pub use metric::{MetricError, MetricSpace, Point, PointRepr, Violation};
