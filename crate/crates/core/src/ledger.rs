//! Event-sourced portfolio state.
//!
//! [`PortfolioState::apply_event`] is the only way state moves forward. It
//! returns a fresh state together with a [`LedgerEffects`] record describing
//! exactly which lots, borrow positions and cash were touched. The
//! realization rules work from those effects alone.
//!
//! Borrowed shares are owned once borrowed, but they are inventoried apart
//! from purchased or inherited [`Lot`]s so they are never matched as owned
//! identical shares.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market::{MarketError, Money, PricePath, SecurityId, Tick};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LedgerError {
    #[error("quantity must be positive")]
    InvalidQuantity,
    #[error("cannot deliver {requested} {sec}: only {available} owned shares available")]
    InsufficientOwnedShares {
        sec: SecurityId,
        requested: u64,
        available: u64,
    },
    #[error("cannot short-sell {requested} {sec}: only {available} borrowed shares unsold")]
    NoOpenBorrow {
        sec: SecurityId,
        requested: u64,
        available: u64,
    },
    #[error("cannot cover {requested} {sec}: only {outstanding} shares outstanding")]
    OverCover {
        sec: SecurityId,
        requested: u64,
        outstanding: u64,
    },
    #[error("lot {0} does not exist or holds a different security")]
    UnknownLotId(LotId),
    #[error("nothing to transmit: no lots and no open borrow positions")]
    EmptyEstate,
    #[error(transparent)]
    Market(#[from] MarketError),
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct LotId(pub u64);

impl fmt::Display for LotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}", self.0)
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct PositionId(pub u64);

impl fmt::Display for PositionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcquisitionMethod {
    Purchase,
    Inheritance,
}

/// A parcel of identical owned shares.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lot {
    pub id: LotId,
    pub sec: SecurityId,
    pub qty: u64,
    pub basis_per_share: Money,
    pub acquired_at: Tick,
    pub method: AcquisitionMethod,
}

/// An open securities-borrowing obligation.
///
/// A position is either wholly unsold or wholly sold short: a partial short
/// sale splits the position in two, so one proceeds figure always covers
/// every share in it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BorrowPosition {
    pub id: PositionId,
    pub sec: SecurityId,
    pub qty_borrowed: u64,
    pub borrowed_at: Tick,
    pub qty_sold_short: u64,
    pub short_proceeds_per_share: Option<Money>,
    pub sold_at: Option<Tick>,
    pub qty_outstanding: u64,
}

impl BorrowPosition {
    pub fn is_sold(&self) -> bool {
        self.qty_sold_short > 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventKind {
    Buy { sec: SecurityId, qty: u64 },
    Borrow { sec: SecurityId, qty: u64 },
    ShortSell { sec: SecurityId, qty: u64 },
    SellOwned { sec: SecurityId, qty: u64 },
    CoverByPurchase { sec: SecurityId, qty: u64 },
    CoverByOwnedLot { sec: SecurityId, qty: u64 },
    /// Transmits every lot and open borrow to the heir, stepping lot bases
    /// up to the price at the event's tick.
    Death,
}

impl EventKind {
    pub fn security(&self) -> Option<&SecurityId> {
        match self {
            EventKind::Buy { sec, .. }
            | EventKind::Borrow { sec, .. }
            | EventKind::ShortSell { sec, .. }
            | EventKind::SellOwned { sec, .. }
            | EventKind::CoverByPurchase { sec, .. }
            | EventKind::CoverByOwnedLot { sec, .. } => Some(sec),
            EventKind::Death => None,
        }
    }

    pub fn quantity(&self) -> Option<u64> {
        match self {
            EventKind::Buy { qty, .. }
            | EventKind::Borrow { qty, .. }
            | EventKind::ShortSell { qty, .. }
            | EventKind::SellOwned { qty, .. }
            | EventKind::CoverByPurchase { qty, .. }
            | EventKind::CoverByOwnedLot { qty, .. } => Some(*qty),
            EventKind::Death => None,
        }
    }

    /// Whether the event executes at the market price of its tick.
    pub fn needs_price(&self) -> bool {
        !matches!(self, EventKind::Borrow { .. } | EventKind::Death)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransactionEvent {
    pub at: Tick,
    #[serde(flatten)]
    pub kind: EventKind,
}

impl TransactionEvent {
    pub fn new(at: u64, kind: EventKind) -> Self {
        TransactionEvent { at: Tick(at), kind }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LotPolicy {
    #[default]
    Fifo,
    /// Consume only the listed lots, in the listed order.
    SpecificId(Vec<LotId>),
}

/// Matching inputs beyond the policy: shares of a lot that are locked by a
/// constructive sale and may not be sold again.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MatchOptions {
    pub policy: LotPolicy,
    pub locked: BTreeMap<LotId, u64>,
}

/// A portion of one lot consumed by a disposal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LotSlice {
    pub lot_id: LotId,
    pub qty: u64,
    pub basis_per_share: Money,
    /// Taken from the locked portion of the lot.
    pub from_locked: bool,
}

/// A portion of one sold-short borrow position discharged by a cover.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverSlice {
    pub position_id: PositionId,
    pub qty: u64,
    pub short_proceeds_per_share: Money,
    pub sold_at: Tick,
}

/// A lot of the shorted security held at the moment of a short sale.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LotHolding {
    pub lot_id: LotId,
    pub qty: u64,
    pub basis_per_share: Money,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SteppedUpLot {
    pub lot_id: LotId,
    pub sec: SecurityId,
    pub qty: u64,
    pub prior_basis: Money,
    pub basis: Money,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Movement {
    Bought {
        lot: Lot,
        price: Money,
    },
    Borrowed {
        position: PositionId,
        sec: SecurityId,
        qty: u64,
    },
    ShortSold {
        sec: SecurityId,
        qty: u64,
        price: Money,
        positions: Vec<(PositionId, u64)>,
        owned: Vec<LotHolding>,
    },
    SoldOwned {
        sec: SecurityId,
        qty: u64,
        price: Money,
        slices: Vec<LotSlice>,
    },
    CoveredByPurchase {
        sec: SecurityId,
        qty: u64,
        price: Money,
        covers: Vec<CoverSlice>,
    },
    CoveredByOwnedLot {
        sec: SecurityId,
        qty: u64,
        price: Money,
        covers: Vec<CoverSlice>,
        slices: Vec<LotSlice>,
    },
    Transmitted {
        generation: u32,
        lots: Vec<SteppedUpLot>,
        open_positions: Vec<PositionId>,
    },
}

/// What one applied event moved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEffects {
    pub at: Tick,
    pub movement: Movement,
    pub cash_delta: Money,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortfolioState {
    lots: Vec<Lot>,
    borrows: Vec<BorrowPosition>,
    cash: Money,
    owner_generation: u32,
    next_lot: u64,
    next_position: u64,
}

#[derive(Clone, Copy)]
enum LockMode {
    /// Only unlocked shares are eligible.
    SkipLocked,
    /// Locked shares are delivered first, then unlocked ones.
    LockedFirst,
}

impl PortfolioState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn lots(&self) -> &[Lot] {
        &self.lots
    }

    pub fn borrows(&self) -> &[BorrowPosition] {
        &self.borrows
    }

    pub fn cash(&self) -> Money {
        self.cash
    }

    pub fn owner_generation(&self) -> u32 {
        self.owner_generation
    }

    pub fn owned_qty(&self, sec: &SecurityId) -> u64 {
        self.lots.iter().filter(|l| &l.sec == sec).map(|l| l.qty).sum()
    }

    /// Shares borrowed but not yet sold short.
    pub fn unsold_borrowed_qty(&self, sec: &SecurityId) -> u64 {
        self.borrows
            .iter()
            .filter(|b| &b.sec == sec && !b.is_sold())
            .map(|b| b.qty_outstanding)
            .sum()
    }

    /// Shares sold short and still owed to the lender.
    pub fn short_outstanding_qty(&self, sec: &SecurityId) -> u64 {
        self.borrows
            .iter()
            .filter(|b| &b.sec == sec && b.is_sold())
            .map(|b| b.qty_outstanding)
            .sum()
    }

    pub fn lot(&self, id: LotId) -> Option<&Lot> {
        self.lots.iter().find(|l| l.id == id)
    }

    /// Applies one event with FIFO matching and no locked shares.
    pub fn apply_event(
        &self,
        ev: &TransactionEvent,
        path: &PricePath,
    ) -> Result<(PortfolioState, LedgerEffects), LedgerError> {
        self.apply_event_with(ev, path, &MatchOptions::default())
    }

    pub fn apply_event_with(
        &self,
        ev: &TransactionEvent,
        path: &PricePath,
        opts: &MatchOptions,
    ) -> Result<(PortfolioState, LedgerEffects), LedgerError> {
        if ev.kind.quantity() == Some(0) {
            return Err(LedgerError::InvalidQuantity);
        }
        let at = ev.at;
        let mut next = self.clone();
        let (movement, cash_delta) = match &ev.kind {
            EventKind::Buy { sec, qty } => {
                let price = path.price_at(sec, at)?;
                let lot = Lot {
                    id: next.fresh_lot_id(),
                    sec: sec.clone(),
                    qty: *qty,
                    basis_per_share: price,
                    acquired_at: at,
                    method: AcquisitionMethod::Purchase,
                };
                next.lots.push(lot.clone());
                (Movement::Bought { lot, price }, -price.times(*qty))
            }
            EventKind::Borrow { sec, qty } => {
                let id = next.fresh_position_id();
                next.borrows.push(BorrowPosition {
                    id,
                    sec: sec.clone(),
                    qty_borrowed: *qty,
                    borrowed_at: at,
                    qty_sold_short: 0,
                    short_proceeds_per_share: None,
                    sold_at: None,
                    qty_outstanding: *qty,
                });
                (
                    Movement::Borrowed {
                        position: id,
                        sec: sec.clone(),
                        qty: *qty,
                    },
                    Money::ZERO,
                )
            }
            EventKind::ShortSell { sec, qty } => {
                let available = self.unsold_borrowed_qty(sec);
                if *qty > available {
                    return Err(LedgerError::NoOpenBorrow {
                        sec: sec.clone(),
                        requested: *qty,
                        available,
                    });
                }
                let price = path.price_at(sec, at)?;
                let positions = next.sell_borrowed(sec, *qty, price, at);
                let owned = self
                    .lots
                    .iter()
                    .filter(|l| &l.sec == sec)
                    .map(|l| LotHolding {
                        lot_id: l.id,
                        qty: l.qty,
                        basis_per_share: l.basis_per_share,
                    })
                    .collect();
                (
                    Movement::ShortSold {
                        sec: sec.clone(),
                        qty: *qty,
                        price,
                        positions,
                        owned,
                    },
                    price.times(*qty),
                )
            }
            EventKind::SellOwned { sec, qty } => {
                let slices = self.match_available(sec, *qty, opts, LockMode::SkipLocked)?;
                let price = path.price_at(sec, at)?;
                next.remove_slices(&slices);
                (
                    Movement::SoldOwned {
                        sec: sec.clone(),
                        qty: *qty,
                        price,
                        slices,
                    },
                    price.times(*qty),
                )
            }
            EventKind::CoverByPurchase { sec, qty } => {
                self.check_cover(sec, *qty)?;
                let price = path.price_at(sec, at)?;
                let covers = next.discharge(sec, *qty);
                (
                    Movement::CoveredByPurchase {
                        sec: sec.clone(),
                        qty: *qty,
                        price,
                        covers,
                    },
                    -price.times(*qty),
                )
            }
            EventKind::CoverByOwnedLot { sec, qty } => {
                let slices = self.match_available(sec, *qty, opts, LockMode::LockedFirst)?;
                self.check_cover(sec, *qty)?;
                let price = path.price_at(sec, at)?;
                next.remove_slices(&slices);
                let covers = next.discharge(sec, *qty);
                (
                    Movement::CoveredByOwnedLot {
                        sec: sec.clone(),
                        qty: *qty,
                        price,
                        covers,
                        slices,
                    },
                    Money::ZERO,
                )
            }
            EventKind::Death => {
                let stepped = self.step_up(at, path)?;
                let lots = self
                    .lots
                    .iter()
                    .zip(&stepped.lots)
                    .map(|(before, after)| SteppedUpLot {
                        lot_id: after.id,
                        sec: after.sec.clone(),
                        qty: after.qty,
                        prior_basis: before.basis_per_share,
                        basis: after.basis_per_share,
                    })
                    .collect();
                let open_positions = stepped.borrows.iter().map(|b| b.id).collect();
                let generation = stepped.owner_generation;
                next = stepped;
                (
                    Movement::Transmitted {
                        generation,
                        lots,
                        open_positions,
                    },
                    Money::ZERO,
                )
            }
        };
        next.cash += cash_delta;
        Ok((
            next,
            LedgerEffects {
                at,
                movement,
                cash_delta,
            },
        ))
    }

    /// Lots that would be consumed by disposing of `qty` shares under
    /// `policy`. The state itself is not modified.
    pub fn match_lots(
        &self,
        sec: &SecurityId,
        qty: u64,
        policy: &LotPolicy,
    ) -> Result<Vec<LotSlice>, LedgerError> {
        let opts = MatchOptions {
            policy: policy.clone(),
            locked: BTreeMap::new(),
        };
        self.match_available(sec, qty, &opts, LockMode::SkipLocked)
    }

    /// Transmits the portfolio to a single heir. Every lot's basis becomes
    /// its security's price at `at`; open borrow positions pass unchanged.
    pub fn step_up(&self, at: Tick, path: &PricePath) -> Result<PortfolioState, LedgerError> {
        if self.lots.is_empty() && self.borrows.is_empty() {
            return Err(LedgerError::EmptyEstate);
        }
        let mut next = self.clone();
        for lot in &mut next.lots {
            lot.basis_per_share = path.price_at(&lot.sec, at)?;
            lot.method = AcquisitionMethod::Inheritance;
            lot.acquired_at = at;
        }
        next.owner_generation += 1;
        Ok(next)
    }

    fn fresh_lot_id(&mut self) -> LotId {
        self.next_lot += 1;
        LotId(self.next_lot)
    }

    fn fresh_position_id(&mut self) -> PositionId {
        self.next_position += 1;
        PositionId(self.next_position)
    }

    fn ordered_lots(&self, sec: &SecurityId, policy: &LotPolicy) -> Result<Vec<&Lot>, LedgerError> {
        match policy {
            LotPolicy::Fifo => Ok(self.lots.iter().filter(|l| &l.sec == sec).collect()),
            LotPolicy::SpecificId(ids) => {
                let mut seen = std::collections::BTreeSet::new();
                ids.iter()
                    .filter(|id| seen.insert(**id))
                    .map(|id| {
                    self.lot(*id)
                        .filter(|l| &l.sec == sec)
                        .ok_or(LedgerError::UnknownLotId(*id))
                    })
                    .collect()
            }
        }
    }

    fn match_available(
        &self,
        sec: &SecurityId,
        qty: u64,
        opts: &MatchOptions,
        mode: LockMode,
    ) -> Result<Vec<LotSlice>, LedgerError> {
        if qty == 0 {
            return Err(LedgerError::InvalidQuantity);
        }
        let lots = self.ordered_lots(sec, &opts.policy)?;
        let locked = |lot: &Lot| opts.locked.get(&lot.id).copied().unwrap_or(0).min(lot.qty);
        let passes: &[bool] = match mode {
            LockMode::LockedFirst => &[true, false],
            LockMode::SkipLocked => &[false],
        };

        let mut remaining = qty;
        let mut slices = Vec::new();
        for &from_locked in passes {
            for lot in &lots {
                if remaining == 0 {
                    break;
                }
                let eligible = if from_locked {
                    locked(lot)
                } else {
                    lot.qty - locked(lot)
                };
                let take = eligible.min(remaining);
                if take > 0 {
                    slices.push(LotSlice {
                        lot_id: lot.id,
                        qty: take,
                        basis_per_share: lot.basis_per_share,
                        from_locked,
                    });
                    remaining -= take;
                }
            }
        }
        if remaining > 0 {
            return Err(LedgerError::InsufficientOwnedShares {
                sec: sec.clone(),
                requested: qty,
                available: qty - remaining,
            });
        }
        Ok(slices)
    }

    fn remove_slices(&mut self, slices: &[LotSlice]) {
        for slice in slices {
            let lot = self
                .lots
                .iter_mut()
                .find(|l| l.id == slice.lot_id)
                .expect("slice refers to a live lot");
            lot.qty -= slice.qty;
        }
        self.lots.retain(|l| l.qty > 0);
    }

    fn sell_borrowed(
        &mut self,
        sec: &SecurityId,
        qty: u64,
        price: Money,
        at: Tick,
    ) -> Vec<(PositionId, u64)> {
        let mut remaining = qty;
        let mut sold = Vec::new();
        let mut i = 0;
        while remaining > 0 {
            let pos = &self.borrows[i];
            if &pos.sec != sec || pos.is_sold() {
                i += 1;
                continue;
            }
            let unsold = pos.qty_outstanding;
            let take = remaining.min(unsold);
            if take < unsold {
                let rest = BorrowPosition {
                    id: self.fresh_position_id(),
                    qty_borrowed: unsold - take,
                    qty_outstanding: unsold - take,
                    ..self.borrows[i].clone()
                };
                self.borrows.insert(i + 1, rest);
            }
            let pos = &mut self.borrows[i];
            pos.qty_borrowed = take;
            pos.qty_outstanding = take;
            pos.qty_sold_short = take;
            pos.short_proceeds_per_share = Some(price);
            pos.sold_at = Some(at);
            sold.push((pos.id, take));
            remaining -= take;
            i += 1;
        }
        sold
    }

    fn check_cover(&self, sec: &SecurityId, qty: u64) -> Result<(), LedgerError> {
        let outstanding = self.short_outstanding_qty(sec);
        if qty > outstanding {
            return Err(LedgerError::OverCover {
                sec: sec.clone(),
                requested: qty,
                outstanding,
            });
        }
        Ok(())
    }

    fn discharge(&mut self, sec: &SecurityId, qty: u64) -> Vec<CoverSlice> {
        let mut remaining = qty;
        let mut covers = Vec::new();
        for pos in self.borrows.iter_mut() {
            if remaining == 0 {
                break;
            }
            if &pos.sec != sec || !pos.is_sold() || pos.qty_outstanding == 0 {
                continue;
            }
            let take = remaining.min(pos.qty_outstanding);
            pos.qty_outstanding -= take;
            remaining -= take;
            covers.push(CoverSlice {
                position_id: pos.id,
                qty: take,
                short_proceeds_per_share: pos
                    .short_proceeds_per_share
                    .expect("sold position has proceeds"),
                sold_at: pos.sold_at.expect("sold position has a sale tick"),
            });
        }
        self.borrows.retain(|b| b.qty_outstanding > 0);
        covers
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> SecurityId {
        SecurityId::new("ABC").unwrap()
    }

    fn path() -> PricePath {
        PricePath::new()
            .with(&abc(), 1, Money::from_pesos(50))
            .with(&abc(), 2, Money::from_pesos(100))
            .with(&abc(), 3, Money::from_pesos(30))
            .with(&abc(), 4, Money::from_pesos(80))
    }

    fn ev(at: u64, kind: EventKind) -> TransactionEvent {
        TransactionEvent::new(at, kind)
    }

    fn apply_all(events: &[TransactionEvent]) -> Result<PortfolioState, LedgerError> {
        let path = path();
        events
            .iter()
            .try_fold(PortfolioState::new(), |s, e| Ok(s.apply_event(e, &path)?.0))
    }

    #[test]
    fn buy_creates_lot_and_spends_cash() {
        let s = apply_all(&[ev(1, EventKind::Buy { sec: abc(), qty: 100_000 })]).unwrap();
        assert_eq!(s.lots().len(), 1);
        let lot = &s.lots()[0];
        assert_eq!(lot.qty, 100_000);
        assert_eq!(lot.basis_per_share, Money::from_pesos(50));
        assert_eq!(lot.method, AcquisitionMethod::Purchase);
        assert_eq!(s.cash(), Money::from_pesos(-5_000_000));
    }

    #[test]
    fn borrow_then_short_sell_receives_proceeds() {
        let s = apply_all(&[
            ev(2, EventKind::Borrow { sec: abc(), qty: 100_000 }),
            ev(2, EventKind::ShortSell { sec: abc(), qty: 100_000 }),
        ])
        .unwrap();
        let pos = &s.borrows()[0];
        assert_eq!(pos.qty_outstanding, 100_000);
        assert_eq!(pos.short_proceeds_per_share, Some(Money::from_pesos(100)));
        assert_eq!(pos.sold_at, Some(Tick(2)));
        assert_eq!(s.cash(), Money::from_pesos(10_000_000));
        assert_eq!(s.owned_qty(&abc()), 0);
    }

    #[test]
    fn cover_with_owned_requires_owned_shares() {
        let err = apply_all(&[
            ev(2, EventKind::Borrow { sec: abc(), qty: 100_000 }),
            ev(2, EventKind::ShortSell { sec: abc(), qty: 100_000 }),
            ev(3, EventKind::CoverByOwnedLot { sec: abc(), qty: 100_000 }),
        ])
        .unwrap_err();
        assert!(matches!(err, LedgerError::InsufficientOwnedShares { available: 0, .. }));

        let err = apply_all(&[ev(3, EventKind::CoverByOwnedLot { sec: abc(), qty: 1 })]).unwrap_err();
        assert!(matches!(err, LedgerError::InsufficientOwnedShares { .. }));
    }

    #[test]
    fn short_sell_needs_borrowed_shares() {
        let err = apply_all(&[
            ev(1, EventKind::Buy { sec: abc(), qty: 10 }),
            ev(2, EventKind::ShortSell { sec: abc(), qty: 10 }),
        ])
        .unwrap_err();
        assert!(matches!(err, LedgerError::NoOpenBorrow { available: 0, .. }));
    }

    #[test]
    fn over_cover_is_rejected() {
        let err = apply_all(&[
            ev(2, EventKind::Borrow { sec: abc(), qty: 10 }),
            ev(2, EventKind::ShortSell { sec: abc(), qty: 10 }),
            ev(3, EventKind::CoverByPurchase { sec: abc(), qty: 11 }),
        ])
        .unwrap_err();
        assert!(matches!(err, LedgerError::OverCover { outstanding: 10, .. }));
        // Borrowed but never sold: nothing to cover.
        let err = apply_all(&[
            ev(2, EventKind::Borrow { sec: abc(), qty: 10 }),
            ev(3, EventKind::CoverByPurchase { sec: abc(), qty: 1 }),
        ])
        .unwrap_err();
        assert!(matches!(err, LedgerError::OverCover { outstanding: 0, .. }));
    }

    #[test]
    fn partial_short_sale_splits_position() {
        let s = apply_all(&[
            ev(1, EventKind::Borrow { sec: abc(), qty: 100 }),
            ev(2, EventKind::ShortSell { sec: abc(), qty: 40 }),
            ev(3, EventKind::ShortSell { sec: abc(), qty: 60 }),
            ev(4, EventKind::CoverByPurchase { sec: abc(), qty: 50 }),
        ])
        .unwrap();
        // 40 @100 fully covered; 10 of the 60 @30 covered.
        assert_eq!(s.borrows().len(), 1);
        let pos = &s.borrows()[0];
        assert_eq!(pos.qty_borrowed, 60);
        assert_eq!(pos.qty_outstanding, 50);
        assert_eq!(pos.short_proceeds_per_share, Some(Money::from_pesos(30)));
        let cash = Money::from_pesos(40 * 100 + 60 * 30 - 50 * 80);
        assert_eq!(s.cash(), cash);
    }

    #[test]
    fn fifo_matching_across_lots() {
        let p = PricePath::new()
            .with(&abc(), 1, Money::from_pesos(50))
            .with(&abc(), 2, Money::from_pesos(80));
        let mut s = PortfolioState::new();
        for (t, q) in [(1, 60_000), (2, 60_000)] {
            s = s.apply_event(&ev(t, EventKind::Buy { sec: abc(), qty: q }), &p).unwrap().0;
        }
        let slices = s.match_lots(&abc(), 100_000, &LotPolicy::Fifo).unwrap();
        let got: Vec<_> = slices.iter().map(|x| (x.lot_id, x.qty, x.basis_per_share)).collect();
        assert_eq!(
            got,
            vec![
                (LotId(1), 60_000, Money::from_pesos(50)),
                (LotId(2), 40_000, Money::from_pesos(80)),
            ]
        );
        // match_lots does not mutate.
        assert_eq!(s.owned_qty(&abc()), 120_000);

        let single = s.match_lots(&abc(), 60_000, &LotPolicy::Fifo).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].qty, 60_000);

        assert_eq!(
            s.match_lots(&abc(), 0, &LotPolicy::Fifo),
            Err(LedgerError::InvalidQuantity)
        );
        assert!(matches!(
            s.match_lots(&abc(), 120_001, &LotPolicy::Fifo),
            Err(LedgerError::InsufficientOwnedShares { available: 120_000, .. })
        ));
    }

    #[test]
    fn specific_id_matching() {
        let p = PricePath::new()
            .with(&abc(), 1, Money::from_pesos(50))
            .with(&abc(), 2, Money::from_pesos(80));
        let mut s = PortfolioState::new();
        for (t, q) in [(1, 60_000), (2, 60_000)] {
            s = s.apply_event(&ev(t, EventKind::Buy { sec: abc(), qty: q }), &p).unwrap().0;
        }
        let slices = s
            .match_lots(&abc(), 70_000, &LotPolicy::SpecificId(vec![LotId(2), LotId(1)]))
            .unwrap();
        assert_eq!(slices[0].lot_id, LotId(2));
        assert_eq!(slices[0].qty, 60_000);
        assert_eq!(slices[1].lot_id, LotId(1));
        assert_eq!(slices[1].qty, 10_000);
        assert_eq!(
            s.match_lots(&abc(), 1, &LotPolicy::SpecificId(vec![LotId(7)])),
            Err(LedgerError::UnknownLotId(LotId(7)))
        );
        assert!(matches!(
            s.match_lots(&abc(), 70_000, &LotPolicy::SpecificId(vec![LotId(1)])),
            Err(LedgerError::InsufficientOwnedShares { .. })
        ));
    }

    #[test]
    fn locked_shares_are_not_sold_but_delivered_first() {
        let s = apply_all(&[
            ev(1, EventKind::Buy { sec: abc(), qty: 100 }),
            ev(2, EventKind::Buy { sec: abc(), qty: 100 }),
        ])
        .unwrap();
        let opts = MatchOptions {
            policy: LotPolicy::Fifo,
            locked: BTreeMap::from([(LotId(2), 30)]),
        };
        let sell = ev(3, EventKind::SellOwned { sec: abc(), qty: 170 });
        let (_, fx) = s.apply_event_with(&sell, &path(), &opts).unwrap();
        let Movement::SoldOwned { slices, .. } = fx.movement else { panic!() };
        assert!(slices.iter().all(|s| !s.from_locked));
        let too_many = ev(3, EventKind::SellOwned { sec: abc(), qty: 171 });
        assert!(s.apply_event_with(&too_many, &path(), &opts).is_err());

        let s = [
            ev(2, EventKind::Borrow { sec: abc(), qty: 50 }),
            ev(2, EventKind::ShortSell { sec: abc(), qty: 50 }),
        ]
        .iter()
        .fold(s, |s, e| s.apply_event(e, &path()).unwrap().0);
        let cover = ev(3, EventKind::CoverByOwnedLot { sec: abc(), qty: 50 });
        let (_, fx) = s.apply_event_with(&cover, &path(), &opts).unwrap();
        let Movement::CoveredByOwnedLot { slices, .. } = fx.movement else { panic!() };
        assert_eq!(
            slices.iter().map(|s| (s.lot_id, s.qty, s.from_locked)).collect::<Vec<_>>(),
            vec![(LotId(2), 30, true), (LotId(1), 20, false)]
        );
    }

    #[test]
    fn step_up_resets_basis_and_keeps_borrows() {
        let p = path().with(&abc(), 5, Money::from_pesos(130));
        let s = apply_all(&[
            ev(1, EventKind::Buy { sec: abc(), qty: 100_000 }),
            ev(2, EventKind::Borrow { sec: abc(), qty: 100_000 }),
            ev(2, EventKind::ShortSell { sec: abc(), qty: 100_000 }),
        ])
        .unwrap();
        let heir = s.step_up(Tick(5), &p).unwrap();
        let lot = &heir.lots()[0];
        assert_eq!(lot.basis_per_share, Money::from_pesos(130));
        assert_eq!(lot.method, AcquisitionMethod::Inheritance);
        assert_eq!(lot.acquired_at, Tick(5));
        assert_eq!(heir.borrows(), s.borrows());
        assert_eq!(heir.owner_generation(), 1);
        assert_eq!(heir.cash(), s.cash());

        let again = heir.step_up(Tick(5), &p).unwrap();
        assert_eq!(again.lots()[0].basis_per_share, Money::from_pesos(130));

        assert!(matches!(
            s.step_up(Tick(9), &p),
            Err(LedgerError::Market(MarketError::MissingPrice { .. }))
        ));
        assert_eq!(
            PortfolioState::new().step_up(Tick(1), &p),
            Err(LedgerError::EmptyEstate)
        );
    }

    #[test]
    fn missing_price_propagates() {
        let err = apply_all(&[ev(9, EventKind::Buy { sec: abc(), qty: 1 })]).unwrap_err();
        assert!(matches!(err, LedgerError::Market(MarketError::MissingPrice { .. })));
    }

    #[test]
    fn zero_quantity_rejected() {
        let err = apply_all(&[ev(1, EventKind::Buy { sec: abc(), qty: 0 })]).unwrap_err();
        assert_eq!(err, LedgerError::InvalidQuantity);
    }
}
