use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Scenario;
use crate::ledger::{BorrowPosition, LedgerError, Lot, LotPolicy, MatchOptions, PortfolioState};
use crate::market::{Money, Tick};
use crate::realization::{realize, RealizationError, RealizationEvent, Regime, Reservations};
use crate::taxation::{tax_timeline, NettingWindow, RateSchedule, TaxTimeline};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Realization(#[from] RealizationError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("event {index} (tick {at}): {source}")]
pub struct RunError {
    pub index: usize,
    pub at: Tick,
    #[source]
    pub source: EngineError,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunConfig {
    pub regime: Regime,
    pub schedule: RateSchedule,
    pub window: NettingWindow,
    pub policy: LotPolicy,
}

/// Pre-tax cash moved at one tick, and the running total after it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CashPoint {
    pub tick: Tick,
    pub delta: Money,
    pub cumulative: Money,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Totals {
    pub total_tax: Money,
    pub net_capital_gain: Money,
    pub pre_tax_cash: Money,
    pub after_tax_cash: Money,
    pub final_lots: Vec<Lot>,
    pub open_borrows: Vec<BorrowPosition>,
    pub reservations: Reservations,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub regime: Regime,
    pub schedule: RateSchedule,
    pub window: NettingWindow,
    pub realizations: Vec<RealizationEvent>,
    pub tax: TaxTimeline,
    pub cash: Vec<CashPoint>,
    pub totals: Totals,
}

pub fn run(
    scenario: &Scenario,
    regime: Regime,
    schedule: RateSchedule,
    window: NettingWindow,
) -> Result<RunReport, RunError> {
    run_with(
        scenario,
        &RunConfig {
            regime,
            schedule,
            window,
            policy: LotPolicy::Fifo,
        },
    )
}

pub fn run_with(scenario: &Scenario, config: &RunConfig) -> Result<RunReport, RunError> {
    let mut state = PortfolioState::new();
    let mut reservations = Reservations::new();
    let mut realizations = Vec::new();
    let mut cash_by_tick: BTreeMap<Tick, Money> = BTreeMap::new();

    for (index, ev) in scenario.events.iter().enumerate() {
        let fail = |source: EngineError| RunError {
            index,
            at: ev.at,
            source,
        };
        let opts = MatchOptions {
            policy: config.policy.clone(),
            locked: reservations.locks(),
        };
        let (next, effects) = state
            .apply_event_with(ev, &scenario.prices, &opts)
            .map_err(|e| fail(e.into()))?;
        let (realized, next_reservations) =
            realize(&effects, config.regime, &reservations).map_err(|e| fail(e.into()))?;
        *cash_by_tick.entry(ev.at).or_default() += effects.cash_delta;
        realizations.extend(realized);
        state = next;
        reservations = next_reservations;
    }

    let mut cumulative = Money::ZERO;
    let cash = cash_by_tick
        .into_iter()
        .map(|(tick, delta)| {
            cumulative += delta;
            CashPoint {
                tick,
                delta,
                cumulative,
            }
        })
        .collect();

    let tax = tax_timeline(&realizations, config.window, config.schedule);
    let totals = Totals {
        total_tax: tax.total_tax,
        net_capital_gain: realizations.iter().map(|r| r.gain_total).sum(),
        pre_tax_cash: state.cash(),
        after_tax_cash: state.cash() - tax.total_tax,
        final_lots: state.lots().to_vec(),
        open_borrows: state.borrows().to_vec(),
        reservations,
    };
    Ok(RunReport {
        scenario: scenario.name.clone(),
        regime: config.regime,
        schedule: config.schedule,
        window: config.window,
        realizations,
        tax,
        cash,
        totals,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub period: Tick,
    pub current_net: Money,
    pub current_tax: Money,
    pub proposed_net: Money,
    pub proposed_tax: Money,
    pub delta_tax: Money,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub scenario: String,
    pub schedule: RateSchedule,
    pub window: NettingWindow,
    pub rows: Vec<ComparisonRow>,
    pub current_total: Money,
    pub proposed_total: Money,
    pub delta_total: Money,
    pub current: RunReport,
    pub proposed: RunReport,
}

/// Runs both regimes and lines their tax timelines up period by period.
pub fn compare(
    scenario: &Scenario,
    schedule: RateSchedule,
    window: NettingWindow,
) -> Result<ComparisonReport, RunError> {
    let current = run(scenario, Regime::Current, schedule, window)?;
    let proposed = run(scenario, Regime::Proposed, schedule, window)?;

    let mut periods: BTreeMap<Tick, ComparisonRow> = BTreeMap::new();
    let blank = |period| ComparisonRow {
        period,
        current_net: Money::ZERO,
        current_tax: Money::ZERO,
        proposed_net: Money::ZERO,
        proposed_tax: Money::ZERO,
        delta_tax: Money::ZERO,
    };
    for line in &current.tax.lines {
        let row = periods.entry(line.period).or_insert_with(|| blank(line.period));
        row.current_net += line.net_capital_gain;
        row.current_tax += line.tax_due;
    }
    for line in &proposed.tax.lines {
        let row = periods.entry(line.period).or_insert_with(|| blank(line.period));
        row.proposed_net += line.net_capital_gain;
        row.proposed_tax += line.tax_due;
    }
    let rows = periods
        .into_values()
        .map(|mut r| {
            r.delta_tax = r.proposed_tax - r.current_tax;
            r
        })
        .collect();

    Ok(ComparisonReport {
        scenario: scenario.name.clone(),
        schedule,
        window,
        rows,
        current_total: current.totals.total_tax,
        proposed_total: proposed.totals.total_tax,
        delta_total: proposed.totals.total_tax - current.totals.total_tax,
        current,
        proposed,
    })
}
