//! Netting of realized gains and capital gains tax.

use std::collections::BTreeMap;
use std::fmt;
use std::num::NonZeroU64;

use serde::{Deserialize, Serialize};

use crate::market::{apply_rate, Money, Rate, Tick};
use crate::realization::RealizationEvent;

/// First-tier ceiling of the statutory schedule: ₱100,000.00.
pub const STATUTORY_TIER: Money = Money::from_pesos(100_000);

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateSchedule {
    /// 10% of the whole net gain.
    #[default]
    Flat,
    /// 5% of the first ₱100,000.00 of net gain, 10% of the excess.
    Statutory,
}

impl fmt::Display for RateSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateSchedule::Flat => "flat-10%",
            RateSchedule::Statutory => "statutory-5/10%",
        })
    }
}

/// How realization events are grouped before netting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NettingWindow {
    #[default]
    PerTick,
    /// Consecutive blocks of `ticks_per_year` ticks starting at tick 0.
    Annual { ticks_per_year: NonZeroU64 },
    WholeRun,
}

impl NettingWindow {
    fn key(self, t: Tick) -> u64 {
        match self {
            NettingWindow::PerTick => t.0,
            NettingWindow::Annual { ticks_per_year } => t.0 / ticks_per_year.get(),
            NettingWindow::WholeRun => 0,
        }
    }
}

impl fmt::Display for NettingWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NettingWindow::PerTick => f.write_str("per-tick"),
            NettingWindow::Annual { ticks_per_year } => write!(f, "annual:{ticks_per_year}"),
            NettingWindow::WholeRun => f.write_str("whole-run"),
        }
    }
}

/// Net gain of one window, labelled by the last tick in the window that
/// realized anything.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetGain {
    pub period: Tick,
    pub net: Money,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxLine {
    pub period: Tick,
    pub net_capital_gain: Money,
    pub tax_due: Money,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxTimeline {
    pub lines: Vec<TaxLine>,
    pub total_tax: Money,
}

impl TaxTimeline {
    pub fn tax_at(&self, period: Tick) -> Money {
        self.lines
            .iter()
            .filter(|l| l.period == period)
            .map(|l| l.tax_due)
            .sum()
    }
}

/// Signed sum of gains and losses per netting window. Windows without
/// events are omitted.
pub fn net_by_period(events: &[RealizationEvent], window: NettingWindow) -> Vec<NetGain> {
    let mut windows: BTreeMap<u64, NetGain> = BTreeMap::new();
    for ev in events {
        let entry = windows.entry(window.key(ev.at)).or_insert(NetGain {
            period: ev.at,
            net: Money::ZERO,
        });
        entry.period = entry.period.max(ev.at);
        entry.net += ev.gain_total;
    }
    windows.into_values().collect()
}

pub fn tax_due(net_gain: Money, schedule: RateSchedule) -> Money {
    if !net_gain.is_positive() {
        return Money::ZERO;
    }
    let rate = |amount, r| apply_rate(amount, r).expect("non-negative base");
    match schedule {
        RateSchedule::Flat => rate(net_gain, Rate::TEN_PERCENT),
        RateSchedule::Statutory => {
            let first = net_gain.min(STATUTORY_TIER);
            let excess = (net_gain - STATUTORY_TIER).max(Money::ZERO);
            rate(first, Rate::FIVE_PERCENT) + rate(excess, Rate::TEN_PERCENT)
        }
    }
}

pub fn tax_timeline(
    events: &[RealizationEvent],
    window: NettingWindow,
    schedule: RateSchedule,
) -> TaxTimeline {
    let lines: Vec<TaxLine> = net_by_period(events, window)
        .into_iter()
        .map(|g| TaxLine {
            period: g.period,
            net_capital_gain: g.net,
            tax_due: tax_due(g.net, schedule),
        })
        .collect();
    let total_tax = lines.iter().map(|l| l.tax_due).sum();
    TaxTimeline { lines, total_tax }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::SecurityId;
    use crate::realization::RealizationKind;

    fn gain(at: u64, pesos: i64) -> RealizationEvent {
        // one share so gain_total == gain_per_share
        RealizationEvent::new(
            Tick(at),
            RealizationKind::OrdinarySale,
            SecurityId::new("ABC").unwrap(),
            1,
            Money::from_pesos(pesos),
            Money::ZERO,
        )
    }

    #[test]
    fn same_tick_gains_and_losses_net() {
        let got = net_by_period(&[gain(3, 7_000_000), gain(3, -2_000_000)], NettingWindow::PerTick);
        assert_eq!(
            got,
            vec![NetGain {
                period: Tick(3),
                net: Money::from_pesos(5_000_000)
            }]
        );
        let got = net_by_period(&[gain(3, 0), gain(3, -3_000_000)], NettingWindow::PerTick);
        assert_eq!(got[0].net, Money::from_pesos(-3_000_000));
        assert!(net_by_period(&[], NettingWindow::PerTick).is_empty());
    }

    #[test]
    fn windows_group_ticks() {
        let evs = [gain(1, 10), gain(2, -4), gain(5, 3)];
        let annual = NettingWindow::Annual {
            ticks_per_year: NonZeroU64::new(4).unwrap(),
        };
        let got = net_by_period(&evs, annual);
        assert_eq!(got.len(), 2);
        assert_eq!((got[0].period, got[0].net), (Tick(2), Money::from_pesos(6)));
        assert_eq!((got[1].period, got[1].net), (Tick(5), Money::from_pesos(3)));
        let got = net_by_period(&evs, NettingWindow::WholeRun);
        assert_eq!(got, vec![NetGain { period: Tick(5), net: Money::from_pesos(9) }]);
    }

    #[test]
    fn tax_schedules() {
        let five_m = Money::from_pesos(5_000_000);
        assert_eq!(tax_due(five_m, RateSchedule::Flat), Money::from_pesos(500_000));
        // 5% of 100,000 + 10% of 4,900,000
        assert_eq!(tax_due(five_m, RateSchedule::Statutory), Money::from_pesos(495_000));
        for s in [RateSchedule::Flat, RateSchedule::Statutory] {
            assert_eq!(tax_due(Money::from_pesos(-2_000_000), s), Money::ZERO);
            assert_eq!(tax_due(Money::ZERO, s), Money::ZERO);
        }
        assert_eq!(
            tax_due(Money::from_pesos(100_000), RateSchedule::Statutory),
            Money::from_pesos(5_000)
        );
        assert_eq!(
            tax_due(Money::from_pesos(100_001), RateSchedule::Statutory),
            Money::from_centavos(500_010)
        );
    }

    #[test]
    fn timeline_totals() {
        let evs = [gain(2, 5_000_000), gain(3, 7_000_000)];
        let tl = tax_timeline(&evs, NettingWindow::PerTick, RateSchedule::Flat);
        assert_eq!(tl.lines.len(), 2);
        assert_eq!(tl.tax_at(Tick(2)), Money::from_pesos(500_000));
        assert_eq!(tl.tax_at(Tick(3)), Money::from_pesos(700_000));
        assert_eq!(tl.total_tax, Money::from_pesos(1_200_000));
        assert_eq!(
            tax_timeline(&[], NettingWindow::PerTick, RateSchedule::Flat),
            TaxTimeline::default()
        );
    }
}
