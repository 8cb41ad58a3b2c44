//! Exact money arithmetic, tax rates, security identifiers and price paths.
//!
//! Every amount in the engine is an integer number of centavos. Nothing in
//! this crate touches floating point.

use std::collections::BTreeMap;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MarketError {
    #[error("no price quoted for {sec} at tick {tick}")]
    MissingPrice { sec: SecurityId, tick: Tick },
    #[error("a tax rate cannot be applied to a negative amount ({0})")]
    NegativeBase(Money),
    #[error("invalid rate {numerator}/{denominator}")]
    InvalidRate { numerator: u32, denominator: u32 },
    #[error("invalid security symbol {0:?}")]
    InvalidSymbol(String),
    #[error("invalid money amount {0:?}")]
    InvalidMoney(String),
}

/// A signed peso amount held as integer centavos.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Money(i64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub const fn from_centavos(centavos: i64) -> Self {
        Money(centavos)
    }

    pub const fn from_pesos(pesos: i64) -> Self {
        Money(pesos * 100)
    }

    pub const fn centavos(self) -> i64 {
        self.0
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn abs(self) -> Money {
        Money(self.0.abs())
    }

    /// Per-share amount times a share count.
    pub fn times(self, qty: u64) -> Money {
        let qty = i64::try_from(qty).expect("share quantity exceeds i64");
        Money(self.0.checked_mul(qty).expect("money overflow"))
    }

    /// Whole pesos and centavos with thousands separators, no currency sign.
    ///
    /// `-2000000.5` renders as `-2,000,000.50`.
    pub fn grouped(self) -> String {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        format!("{sign}{}.{:02}", group_digits(abs / 100), abs % 100)
    }

    /// Like [`Money::grouped`] but prefixed with the peso sign: `-₱2,000,000.50`.
    pub fn peso(self) -> String {
        let sign = if self.0 < 0 { "-" } else { "" };
        format!("{sign}₱{}", self.abs().grouped())
    }
}

pub(crate) fn group_digits(mut n: u64) -> String {
    if n == 0 {
        return "0".to_string();
    }
    let mut groups = Vec::new();
    while n > 0 {
        groups.push(n % 1000);
        n /= 1000;
    }
    let mut out = groups.pop().unwrap().to_string();
    while let Some(g) = groups.pop() {
        out.push_str(&format!(",{g:03}"));
    }
    out
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:02}", abs / 100, abs % 100)
    }
}

impl FromStr for Money {
    type Err = MarketError;

    /// Accepts `50`, `50.5`, `-0.25`. At most two fractional digits.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MarketError::InvalidMoney(s.to_string());
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (whole, frac) = match body.split_once('.') {
            Some((w, f)) => (w, f),
            None => (body, ""),
        };
        if whole.is_empty() || !whole.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        if body.contains('.') && (frac.is_empty() || frac.len() > 2) {
            return Err(bad());
        }
        if !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let pesos: i64 = whole.parse().map_err(|_| bad())?;
        let cents: i64 = match frac.len() {
            0 => 0,
            1 => frac.parse::<i64>().map_err(|_| bad())? * 10,
            _ => frac.parse().map_err(|_| bad())?,
        };
        let total = pesos
            .checked_mul(100)
            .and_then(|c| c.checked_add(cents))
            .ok_or_else(bad)?;
        Ok(Money(if negative { -total } else { total }))
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0.checked_add(rhs.0).expect("money overflow"))
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0.checked_sub(rhs.0).expect("money overflow"))
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        *self = *self + rhs;
    }
}

impl SubAssign for Money {
    fn sub_assign(&mut self, rhs: Money) {
        *self = *self - rhs;
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Money> for Money {
    fn sum<I: Iterator<Item = &'a Money>>(iter: I) -> Money {
        iter.copied().sum()
    }
}

/// A rational tax rate between 0% and 100% inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rate {
    numerator: u32,
    denominator: u32,
}

impl Rate {
    pub const ZERO: Rate = Rate::percent(0);
    pub const FIVE_PERCENT: Rate = Rate::percent(5);
    pub const TEN_PERCENT: Rate = Rate::percent(10);
    pub const FULL: Rate = Rate::percent(100);

    pub fn new(numerator: u32, denominator: u32) -> Result<Self, MarketError> {
        if denominator == 0 || numerator > denominator {
            return Err(MarketError::InvalidRate {
                numerator,
                denominator,
            });
        }
        Ok(Rate {
            numerator,
            denominator,
        })
    }

    /// # Panics
    /// If `pct > 100` (only reachable from const contexts).
    pub const fn percent(pct: u32) -> Self {
        assert!(pct <= 100);
        Rate {
            numerator: pct,
            denominator: 100,
        }
    }

    pub fn numerator(self) -> u32 {
        self.numerator
    }

    pub fn denominator(self) -> u32 {
        self.denominator
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let scaled = u64::from(self.numerator) * 100;
        let den = u64::from(self.denominator);
        if scaled % den == 0 {
            write!(f, "{}%", scaled / den)
        } else {
            write!(f, "{}/{}", self.numerator, self.denominator)
        }
    }
}

/// `amount × rate`, rounded to the centavo with ties going to the even
/// centavo.
pub fn apply_rate(amount: Money, rate: Rate) -> Result<Money, MarketError> {
    if amount.is_negative() {
        return Err(MarketError::NegativeBase(amount));
    }
    let product = i128::from(amount.centavos()) * i128::from(rate.numerator);
    let den = i128::from(rate.denominator);
    let mut quotient = product / den;
    let twice_rem = 2 * (product % den);
    if twice_rem > den || (twice_rem == den && quotient % 2 == 1) {
        quotient += 1;
    }
    Ok(Money(
        i64::try_from(quotient).expect("rate never exceeds 100%"),
    ))
}

/// Ticker symbol. Two holdings are the same security iff their symbols are
/// equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SecurityId(String);

impl SecurityId {
    pub fn new(symbol: impl Into<String>) -> Result<Self, MarketError> {
        let symbol = symbol.into();
        if symbol.is_empty() || symbol.chars().any(|c| c.is_whitespace() || c == '#') {
            return Err(MarketError::InvalidSymbol(symbol));
        }
        Ok(SecurityId(symbol))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SecurityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Discrete time index.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Tick(pub u64);

impl fmt::Display for Tick {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Per-share quotes keyed by security and tick.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PricePath {
    quotes: BTreeMap<SecurityId, BTreeMap<Tick, Money>>,
}

impl PricePath {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a quote, returning the one it replaced.
    pub fn insert(&mut self, sec: SecurityId, tick: Tick, price: Money) -> Option<Money> {
        self.quotes.entry(sec).or_default().insert(tick, price)
    }

    pub fn with(mut self, sec: &SecurityId, tick: u64, price: Money) -> Self {
        self.insert(sec.clone(), Tick(tick), price);
        self
    }

    pub fn price_at(&self, sec: &SecurityId, tick: Tick) -> Result<Money, MarketError> {
        self.quotes
            .get(sec)
            .and_then(|q| q.get(&tick))
            .copied()
            .ok_or_else(|| MarketError::MissingPrice {
                sec: sec.clone(),
                tick,
            })
    }

    pub fn has_security(&self, sec: &SecurityId) -> bool {
        self.quotes.get(sec).is_some_and(|q| !q.is_empty())
    }

    pub fn securities(&self) -> impl Iterator<Item = &SecurityId> {
        self.quotes.keys()
    }

    /// All quotes ordered by security then tick.
    pub fn iter(&self) -> impl Iterator<Item = (&SecurityId, Tick, Money)> {
        self.quotes
            .iter()
            .flat_map(|(sec, q)| q.iter().map(move |(t, p)| (sec, *t, *p)))
    }

    pub fn is_empty(&self) -> bool {
        self.quotes.values().all(BTreeMap::is_empty)
    }
}
