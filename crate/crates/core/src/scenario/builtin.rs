//! Built-in worked scenarios.
//!
//! All but `offset_grid` use one security, ABC, traded in blocks of 100,000
//! shares at ₱50 (tick 1), ₱100 (tick 2) and ₱30 (tick 3).

use thiserror::Error;

use super::Scenario;
use crate::ledger::{EventKind, TransactionEvent};
use crate::market::{Money, PricePath, SecurityId};

pub const BUILTIN_NAMES: [&str; 6] = [
    "strategy1",
    "strategy2",
    "strategy3",
    "proposed_demo",
    "death_avoidance",
    "offset_grid",
];

pub const BLOCK: u64 = 100_000;

/// Future prices of the offsetting grid, against a present price of ₱100.
pub const GRID_FUTURES: [i64; 7] = [25, 50, 75, 100, 125, 150, 175];
pub const GRID_PRESENT: i64 = 100;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown scenario `{0}` (built-ins: strategy1, strategy2, strategy3, proposed_demo, death_avoidance, offset_grid)")]
pub struct UnknownScenario(pub String);

fn abc() -> SecurityId {
    SecurityId::new("ABC").expect("valid symbol")
}

fn path(prices: &[(u64, i64)]) -> PricePath {
    let sec = abc();
    prices
        .iter()
        .fold(PricePath::new(), |p, &(t, pesos)| p.with(&sec, t, Money::from_pesos(pesos)))
}

fn base_path() -> PricePath {
    path(&[(1, 50), (2, 100), (3, 30)])
}

fn at(t: u64, kind: EventKind) -> TransactionEvent {
    TransactionEvent::new(t, kind)
}

fn buy(t: u64) -> TransactionEvent {
    at(t, EventKind::Buy { sec: abc(), qty: BLOCK })
}

fn short_against_box(t: u64) -> [TransactionEvent; 2] {
    [
        at(t, EventKind::Borrow { sec: abc(), qty: BLOCK }),
        at(t, EventKind::ShortSell { sec: abc(), qty: BLOCK }),
    ]
}

fn named(name: &str, prices: PricePath, events: Vec<TransactionEvent>) -> Scenario {
    Scenario {
        name: name.to_string(),
        prices,
        events,
        heir_label: None,
    }
}

fn strategy3_events() -> Vec<TransactionEvent> {
    let mut events = vec![buy(1)];
    events.extend(short_against_box(2));
    events.push(at(3, EventKind::CoverByOwnedLot { sec: abc(), qty: BLOCK }));
    events
}

pub fn builtin(name: &str) -> Result<Scenario, UnknownScenario> {
    let scenario = match name {
        // Sell at tick 2.
        "strategy1" => named(
            name,
            base_path(),
            vec![buy(1), at(2, EventKind::SellOwned { sec: abc(), qty: BLOCK })],
        ),
        // Hold through tick 3, then sell.
        "strategy2" => named(
            name,
            base_path(),
            vec![buy(1), at(3, EventKind::SellOwned { sec: abc(), qty: BLOCK })],
        ),
        // Short against the box at tick 2, deliver the owned shares at tick 3.
        "strategy3" | "proposed_demo" => named(name, base_path(), strategy3_events()),
        // Owner dies at tick 3 with ABC at ₱130; the heir covers at tick 4.
        "death_avoidance" => {
            let mut events = vec![buy(1)];
            events.extend(short_against_box(2));
            events.push(at(3, EventKind::Death));
            events.push(at(4, EventKind::CoverByOwnedLot { sec: abc(), qty: BLOCK }));
            Scenario {
                heir_label: Some("Y".to_string()),
                ..named(name, path(&[(1, 50), (2, 100), (3, 130), (4, 130)]), events)
            }
        }
        "offset_grid" => offset_grid(),
        _ => return Err(UnknownScenario(name.to_string())),
    };
    Ok(scenario)
}

/// One row of the offsetting grid: the same present/future window traded
/// long (buy now, sell later) and short (sell now, cover by purchase later).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OffsetCase {
    pub present: Money,
    pub future: Money,
    pub ordinary: Scenario,
    pub short: Scenario,
}

pub fn offset_grid_cases() -> Vec<OffsetCase> {
    GRID_FUTURES
        .iter()
        .map(|&future| {
            let prices = path(&[(1, GRID_PRESENT), (2, future)]);
            OffsetCase {
                present: Money::from_pesos(GRID_PRESENT),
                future: Money::from_pesos(future),
                ordinary: named(
                    &format!("offset_ordinary_{future}"),
                    prices.clone(),
                    vec![buy(1), at(2, EventKind::SellOwned { sec: abc(), qty: BLOCK })],
                ),
                short: named(
                    &format!("offset_short_{future}"),
                    prices,
                    short_against_box(1)
                        .into_iter()
                        .chain([at(2, EventKind::CoverByPurchase { sec: abc(), qty: BLOCK })])
                        .collect(),
                ),
            }
        })
        .collect()
}

/// The seven grid rows laid end to end on one price path. Row `i` trades
/// long over ticks `4i+1 → 4i+2` and short over `4i+3 → 4i+4`, so no long
/// position is ever open while shorting.
fn offset_grid() -> Scenario {
    let mut prices = Vec::new();
    let mut events = Vec::new();
    for (i, &future) in GRID_FUTURES.iter().enumerate() {
        let base = 4 * i as u64;
        prices.extend([
            (base + 1, GRID_PRESENT),
            (base + 2, future),
            (base + 3, GRID_PRESENT),
            (base + 4, future),
        ]);
        events.push(buy(base + 1));
        events.push(at(base + 2, EventKind::SellOwned { sec: abc(), qty: BLOCK }));
        events.extend(short_against_box(base + 3));
        events.push(at(base + 4, EventKind::CoverByPurchase { sec: abc(), qty: BLOCK }));
    }
    named("offset_grid", path(&prices), events)
}
