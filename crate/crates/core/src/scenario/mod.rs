//! Scenarios: what to replay, and the drivers that replay it.

mod builtin;
mod dsl;
mod runner;

use serde::{Deserialize, Serialize};

use crate::ledger::TransactionEvent;
use crate::market::PricePath;

pub use builtin::{
    builtin, offset_grid_cases, OffsetCase, UnknownScenario, BLOCK, BUILTIN_NAMES, GRID_FUTURES,
    GRID_PRESENT,
};
pub use dsl::{format_scenario, parse_scenario, ParseError, ParseErrorKind};
pub use runner::{
    compare, run, run_with, CashPoint, ComparisonReport, ComparisonRow, EngineError, RunConfig,
    RunError, RunReport, Totals,
};

/// A price path plus the trades to replay against it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub prices: PricePath,
    pub events: Vec<TransactionEvent>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heir_label: Option<String>,
}

impl Scenario {
    /// Same prices, events and heir, ignoring the name.
    pub fn same_structure(&self, other: &Scenario) -> bool {
        self.prices == other.prices
            && self.events == other.events
            && self.heir_label == other.heir_label
    }
}
