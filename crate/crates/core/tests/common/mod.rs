#![allow(dead_code)]

use proptest::prelude::*;
use realize_core::ledger::{EventKind, MatchOptions, PortfolioState, TransactionEvent};
use realize_core::realization::{realize, Regime, Reservations};
use realize_core::{Money, PricePath, Scenario, SecurityId};

pub const SYMBOLS: [&str; 2] = ["ABC", "XYZ"];

pub fn sec(s: &str) -> SecurityId {
    SecurityId::new(s).unwrap()
}

/// One regime's replay state, advanced only by events that succeed.
#[derive(Clone)]
struct Replay {
    regime: Regime,
    state: PortfolioState,
    reservations: Reservations,
}

impl Replay {
    fn try_apply(&self, ev: &TransactionEvent, path: &PricePath) -> Option<Replay> {
        let opts = MatchOptions {
            locked: self.reservations.locks(),
            ..Default::default()
        };
        let (state, fx) = self.state.apply_event_with(ev, path, &opts).ok()?;
        let (_, reservations) = realize(&fx, self.regime, &self.reservations).ok()?;
        Some(Replay {
            regime: self.regime,
            state,
            reservations,
        })
    }
}

/// Raw material for a random scenario: prices ₱1..₱1000 on every tick for
/// every symbol, and a list of proposed actions.
#[derive(Debug, Clone)]
pub struct RawScenario {
    pub ticks: u64,
    pub prices: Vec<Vec<i64>>,
    pub actions: Vec<(u8, usize, bool, u64)>,
}

pub fn raw_scenario() -> impl Strategy<Value = RawScenario> {
    (2u64..8).prop_flat_map(|ticks| {
        (
            Just(ticks),
            prop::collection::vec(prop::collection::vec(1i64..=1000, ticks as usize), SYMBOLS.len()),
            prop::collection::vec((0u8..7, 0..SYMBOLS.len(), any::<bool>(), 1u64..300), 0..24),
        )
            .prop_map(|(ticks, prices, actions)| RawScenario {
                ticks,
                prices,
                actions,
            })
    })
}

/// Turns raw actions into a scenario whose every event is valid under both
/// regimes; actions that either regime would reject are dropped.
pub fn build(raw: &RawScenario) -> Scenario {
    let mut path = PricePath::new();
    for (i, sym) in SYMBOLS.iter().enumerate() {
        for t in 1..=raw.ticks {
            path.insert(sec(sym), realize_core::Tick(t), Money::from_pesos(raw.prices[i][t as usize - 1]));
        }
    }
    let mut replays = [Regime::Current, Regime::Proposed].map(|regime| Replay {
        regime,
        state: PortfolioState::new(),
        reservations: Reservations::new(),
    });
    let mut tick = 1;
    let mut events = Vec::new();
    for &(action, sym, advance, qty) in &raw.actions {
        if advance && tick < raw.ticks {
            tick += 1;
        }
        let s = sec(SYMBOLS[sym]);
        let kind = match action {
            0 => EventKind::Buy { sec: s, qty },
            1 => EventKind::Borrow { sec: s, qty },
            2 => EventKind::ShortSell { sec: s, qty },
            3 => EventKind::SellOwned { sec: s, qty },
            4 => EventKind::CoverByPurchase { sec: s, qty },
            5 => EventKind::CoverByOwnedLot { sec: s, qty },
            _ => EventKind::Death,
        };
        let ev = TransactionEvent::new(tick, kind);
        let next: Option<Vec<Replay>> = replays.iter().map(|r| r.try_apply(&ev, &path)).collect();
        if let Some(next) = next {
            replays = [next[0].clone(), next[1].clone()];
            events.push(ev);
        }
    }
    Scenario {
        name: "random".into(),
        prices: path,
        events,
        heir_label: None,
    }
}
