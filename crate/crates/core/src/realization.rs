//! Realization rules: which ledger movements produce a taxable gain or loss,
//! when, and with what amount realized and basis.
//!
//! Under [`Regime::Current`] a short sale is a receipt of cash, not a
//! realization; the short cycle realizes once, at cover. Covering with owned
//! shares realizes twice at the cover tick: the owned shares are disposed of
//! at the cover-tick market price, and the short cycle closes at that same
//! price.
//!
//! Under [`Regime::Proposed`] a short sale of a security the seller already
//! owns is a constructive disposal of the owned shares at the short-sale
//! price. The disposed shares are reserved; delivering them later to the
//! lender closes only the short cycle.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ledger::{LedgerEffects, LotId, LotSlice, Movement, PortfolioState, PositionId};
use crate::market::{Money, SecurityId, Tick};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    #[default]
    Current,
    Proposed,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Current => "current",
            Regime::Proposed => "proposed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RealizationKind {
    OrdinarySale,
    ShortCover,
    OwnedDisposalAtCover,
    ConstructiveSale,
}

impl RealizationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RealizationKind::OrdinarySale => "ordinary_sale",
            RealizationKind::ShortCover => "short_cover",
            RealizationKind::OwnedDisposalAtCover => "owned_disposal_at_cover",
            RealizationKind::ConstructiveSale => "constructive_sale",
        }
    }
}

impl fmt::Display for RealizationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A dated gain or loss.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizationEvent {
    pub at: Tick,
    pub kind: RealizationKind,
    pub sec: SecurityId,
    pub qty: u64,
    pub amount_realized_per_share: Money,
    pub basis_per_share: Money,
    pub gain_per_share: Money,
    pub gain_total: Money,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lot: Option<LotId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub position: Option<PositionId>,
}

impl RealizationEvent {
    pub fn new(
        at: Tick,
        kind: RealizationKind,
        sec: SecurityId,
        qty: u64,
        amount_realized_per_share: Money,
        basis_per_share: Money,
    ) -> Self {
        let gain_per_share = amount_realized_per_share - basis_per_share;
        RealizationEvent {
            at,
            kind,
            sec,
            qty,
            amount_realized_per_share,
            basis_per_share,
            gain_per_share,
            gain_total: gain_per_share.times(qty),
            lot: None,
            position: None,
        }
    }

    fn for_lot(mut self, lot: LotId) -> Self {
        self.lot = Some(lot);
        self
    }

    fn for_position(mut self, position: PositionId) -> Self {
        self.position = Some(position);
        self
    }

    pub fn amount_realized_total(&self) -> Money {
        self.amount_realized_per_share.times(self.qty)
    }

    pub fn basis_total(&self) -> Money {
        self.basis_per_share.times(self.qty)
    }
}

/// Owned shares already disposed of by a constructive sale.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructiveReservation {
    pub lot_id: LotId,
    pub sec: SecurityId,
    pub qty: u64,
    pub reserved_at: Tick,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Reservations(Vec<ConstructiveReservation>);

impl Reservations {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ConstructiveReservation> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn reserved_in_lot(&self, lot: LotId) -> u64 {
        self.0.iter().filter(|r| r.lot_id == lot).map(|r| r.qty).sum()
    }

    pub fn reserved_in_security(&self, sec: &SecurityId) -> u64 {
        self.0.iter().filter(|r| &r.sec == sec).map(|r| r.qty).sum()
    }

    /// Reserved quantity per lot, the form the ledger's matcher takes.
    pub fn locks(&self) -> BTreeMap<LotId, u64> {
        let mut locks = BTreeMap::new();
        for r in &self.0 {
            *locks.entry(r.lot_id).or_insert(0) += r.qty;
        }
        locks
    }

    fn reserve(&mut self, lot_id: LotId, sec: SecurityId, qty: u64, at: Tick) {
        self.0.push(ConstructiveReservation {
            lot_id,
            sec,
            qty,
            reserved_at: at,
        });
    }

    /// Consumes reserved shares of one lot, oldest reservation first.
    fn consume(&mut self, lot: LotId, qty: u64) -> Result<(), RealizationError> {
        let available = self.reserved_in_lot(lot);
        if available < qty {
            return Err(RealizationError::ReservationMismatch {
                lot,
                claimed: qty,
                reserved: available,
            });
        }
        let mut remaining = qty;
        for r in self.0.iter_mut().filter(|r| r.lot_id == lot) {
            let take = r.qty.min(remaining);
            r.qty -= take;
            remaining -= take;
        }
        self.0.retain(|r| r.qty > 0);
        Ok(())
    }

    /// Releases up to `qty` reserved shares of `sec`, oldest first.
    fn release(&mut self, sec: &SecurityId, qty: u64) {
        let mut remaining = qty;
        for r in self.0.iter_mut().filter(|r| &r.sec == sec) {
            let take = r.qty.min(remaining);
            r.qty -= take;
            remaining -= take;
        }
        self.0.retain(|r| r.qty > 0);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RealizationError {
    #[error("cover claims {claimed} reserved shares of lot {lot} but only {reserved} are reserved")]
    ReservationMismatch {
        lot: LotId,
        claimed: u64,
        reserved: u64,
    },
}

/// Owned, unreserved shares of `sec` that a short sale of `sec` would
/// constructively dispose of.
pub fn trigger_check(state: &PortfolioState, reservations: &Reservations, sec: &SecurityId) -> u64 {
    state
        .lots()
        .iter()
        .filter(|l| &l.sec == sec)
        .map(|l| l.qty.saturating_sub(reservations.reserved_in_lot(l.id)))
        .sum()
}

/// Realization events produced by one ledger movement, and the reservation
/// set to carry into the next event.
pub fn realize(
    effects: &LedgerEffects,
    regime: Regime,
    reservations: &Reservations,
) -> Result<(Vec<RealizationEvent>, Reservations), RealizationError> {
    let at = effects.at;
    let mut reservations = reservations.clone();
    let mut out = Vec::new();

    match &effects.movement {
        Movement::Bought { .. } | Movement::Borrowed { .. } | Movement::Transmitted { .. } => {}

        Movement::ShortSold {
            sec,
            qty,
            price,
            owned,
            ..
        } => {
            if regime == Regime::Proposed {
                let mut remaining = *qty;
                for holding in owned {
                    if remaining == 0 {
                        break;
                    }
                    let free = holding
                        .qty
                        .saturating_sub(reservations.reserved_in_lot(holding.lot_id));
                    let take = free.min(remaining);
                    if take == 0 {
                        continue;
                    }
                    out.push(
                        RealizationEvent::new(
                            at,
                            RealizationKind::ConstructiveSale,
                            sec.clone(),
                            take,
                            *price,
                            holding.basis_per_share,
                        )
                        .for_lot(holding.lot_id),
                    );
                    reservations.reserve(holding.lot_id, sec.clone(), take, at);
                    remaining -= take;
                }
                // Any excess over the owned shares waits for the cover.
            }
        }

        Movement::SoldOwned {
            sec, price, slices, ..
        } => {
            for slice in slices {
                if slice.from_locked {
                    return Err(mismatch(slice, &reservations));
                }
                out.push(
                    RealizationEvent::new(
                        at,
                        RealizationKind::OrdinarySale,
                        sec.clone(),
                        slice.qty,
                        *price,
                        slice.basis_per_share,
                    )
                    .for_lot(slice.lot_id),
                );
            }
        }

        Movement::CoveredByPurchase {
            sec,
            qty,
            price,
            covers,
        } => {
            out.extend(covers.iter().map(|c| {
                RealizationEvent::new(
                    at,
                    RealizationKind::ShortCover,
                    sec.clone(),
                    c.qty,
                    c.short_proceeds_per_share,
                    *price,
                )
                .for_position(c.position_id)
            }));
            if regime == Regime::Proposed {
                reservations.release(sec, *qty);
            }
        }

        Movement::CoveredByOwnedLot {
            sec,
            price,
            covers,
            slices,
            ..
        } => {
            for slice in slices {
                if slice.from_locked {
                    if regime == Regime::Current {
                        return Err(mismatch(slice, &reservations));
                    }
                    // Disposed of at the short sale already.
                    reservations.consume(slice.lot_id, slice.qty)?;
                    continue;
                }
                out.push(
                    RealizationEvent::new(
                        at,
                        RealizationKind::OwnedDisposalAtCover,
                        sec.clone(),
                        slice.qty,
                        *price,
                        slice.basis_per_share,
                    )
                    .for_lot(slice.lot_id),
                );
            }
            out.extend(covers.iter().map(|c| {
                RealizationEvent::new(
                    at,
                    RealizationKind::ShortCover,
                    sec.clone(),
                    c.qty,
                    c.short_proceeds_per_share,
                    *price,
                )
                .for_position(c.position_id)
            }));
        }
    }

    Ok((out, reservations))
}

fn mismatch(slice: &LotSlice, reservations: &Reservations) -> RealizationError {
    RealizationError::ReservationMismatch {
        lot: slice.lot_id,
        claimed: slice.qty,
        reserved: reservations.reserved_in_lot(slice.lot_id),
    }
}
