//! Capital-gains realization engine for ordinary sales and short sales of
//! securities.
//!
//! The engine replays a [`Scenario`](scenario::Scenario) (a price path plus
//! a tick-ordered list of trades) through four layers:
//!
//! * [`market`]: exact centavo money, tax rates and price paths.
//! * [`ledger`]: lots, borrow positions and cash, one event at a time.
//! * [`realization`]: turns ledger effects into dated realization events
//!   under either the current rule (a short sale realizes only at cover) or
//!   the constructive-sale rule (shorting identical owned shares is a
//!   disposal of the owned shares).
//! * [`taxation`]: nets realized gains per window and applies a rate
//!   schedule.
//!
//! [`scenario`] ties them together with a small text format, the built-in
//! worked examples, and the run/compare drivers.

pub mod ledger;
pub mod market;
pub mod realization;
pub mod scenario;
pub mod taxation;

pub use ledger::{EventKind, LotPolicy, PortfolioState, TransactionEvent};
pub use market::{Money, PricePath, Rate, SecurityId, Tick};
pub use realization::{RealizationEvent, RealizationKind, Regime};
pub use scenario::{
    builtin, compare, format_scenario, parse_scenario, run, ComparisonReport, RunReport, Scenario,
};
pub use taxation::{NettingWindow, RateSchedule, TaxLine, TaxTimeline};
