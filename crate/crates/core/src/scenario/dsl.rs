//! Line-oriented scenario format.
//!
//! ```text
//! # comments run to end of line
//! scenario strategy3
//! price ABC 1 50
//! price ABC 2 100
//! price ABC 3 30
//! at 1 buy ABC 100000
//! at 2 borrow ABC 100000
//! at 2 short-sell ABC 100000
//! at 3 cover ABC 100000 with-owned
//! ```
//!
//! Other event forms: `at <t> sell <SYM> <qty>`, `at <t> cover <SYM> <qty>
//! by-purchase`, `at <t> death [heir <LABEL>]`. The `scenario` line is
//! optional; without it the scenario is named `scenario`.

use std::fmt::{self, Write as _};

use thiserror::Error;

use super::Scenario;
use crate::ledger::{EventKind, TransactionEvent};
use crate::market::{Money, PricePath, SecurityId, Tick};

pub const DEFAULT_NAME: &str = "scenario";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax {
        expected: String,
        found: Option<String>,
    },
    UnknownDirective(String),
    NonMonotonicTick {
        previous: Tick,
        found: Tick,
    },
    UndefinedPrice {
        sec: SecurityId,
        tick: Tick,
    },
    InvalidQuantity(String),
    DuplicatePrice {
        sec: SecurityId,
        tick: Tick,
    },
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax {
                expected,
                found: Some(found),
            } => write!(f, "expected {expected}, found `{found}`"),
            ParseErrorKind::Syntax {
                expected,
                found: None,
            } => write!(f, "expected {expected}, found end of line"),
            ParseErrorKind::UnknownDirective(d) => write!(f, "unknown directive `{d}`"),
            ParseErrorKind::NonMonotonicTick { previous, found } => {
                write!(f, "tick {found} is earlier than the preceding event's tick {previous}")
            }
            ParseErrorKind::UndefinedPrice { sec, tick } => {
                write!(f, "no price for {sec} at tick {tick}")
            }
            ParseErrorKind::InvalidQuantity(q) => {
                write!(f, "invalid quantity `{q}`: must be a positive integer")
            }
            ParseErrorKind::DuplicatePrice { sec, tick } => {
                write!(f, "price for {sec} at tick {tick} given twice")
            }
        }
    }
}

#[derive(Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    col: usize,
}

struct Line<'a> {
    number: usize,
    tokens: Vec<Token<'a>>,
    pos: usize,
    end_col: usize,
}

impl<'a> Line<'a> {
    fn new(number: usize, raw: &'a str) -> Self {
        let body = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let mut tokens = Vec::new();
        let mut start: Option<usize> = None;
        for (byte, ch) in body.char_indices().chain(std::iter::once((body.len(), ' '))) {
            match (ch.is_whitespace(), start) {
                (false, None) => start = Some(byte),
                (true, Some(s)) => {
                    tokens.push(Token {
                        text: &body[s..byte],
                        col: body[..s].chars().count() + 1,
                    });
                    start = None;
                }
                _ => {}
            }
        }
        let end_col = body.trim_end().chars().count() + 1;
        Line {
            number,
            tokens,
            pos: 0,
            end_col,
        }
    }

    fn err(&self, col: usize, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: self.number,
            col,
            kind,
        }
    }

    fn next(&mut self, expected: &str) -> Result<Token<'a>, ParseError> {
        match self.tokens.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(*t)
            }
            None => Err(self.err(
                self.end_col,
                ParseErrorKind::Syntax {
                    expected: expected.to_string(),
                    found: None,
                },
            )),
        }
    }

    fn peek(&self) -> Option<Token<'a>> {
        self.tokens.get(self.pos).copied()
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(self.err(t.col, syntax("end of line", t))),
        }
    }

    fn tick(&mut self) -> Result<(Tick, Token<'a>), ParseError> {
        let t = self.next("tick")?;
        let value = t
            .text
            .parse::<u64>()
            .map_err(|_| self.err(t.col, syntax("non-negative integer tick", t)))?;
        Ok((Tick(value), t))
    }

    fn symbol(&mut self) -> Result<(SecurityId, Token<'a>), ParseError> {
        let t = self.next("security symbol")?;
        let sec = SecurityId::new(t.text).map_err(|_| self.err(t.col, syntax("security symbol", t)))?;
        Ok((sec, t))
    }

    fn quantity(&mut self) -> Result<u64, ParseError> {
        let t = self.next("quantity")?;
        let is_integer = {
            let digits = t.text.strip_prefix(['-', '+']).unwrap_or(t.text);
            !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
        };
        if !is_integer {
            return Err(self.err(t.col, syntax("integer quantity", t)));
        }
        match t.text.parse::<u64>() {
            Ok(q) if q > 0 => Ok(q),
            _ => Err(self.err(
                t.col,
                ParseErrorKind::InvalidQuantity(t.text.to_string()),
            )),
        }
    }
}

fn syntax(expected: &str, found: Token<'_>) -> ParseErrorKind {
    ParseErrorKind::Syntax {
        expected: expected.to_string(),
        found: Some(found.text.to_string()),
    }
}

/// Where a parsed event came from, for diagnostics raised after parsing.
struct EventSite {
    line: usize,
    sec_col: usize,
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ParseError> {
    let mut name: Option<String> = None;
    let mut prices = PricePath::new();
    let mut events = Vec::new();
    let mut sites = Vec::new();
    let mut heir_label: Option<String> = None;

    for (i, raw) in text.lines().enumerate() {
        let mut line = Line::new(i + 1, raw);
        let Some(head) = line.peek() else { continue };
        line.pos += 1;
        match head.text {
            "scenario" => {
                let t = line.next("scenario name")?;
                if name.is_some() {
                    return Err(line.err(head.col, syntax("a single `scenario` line", head)));
                }
                name = Some(t.text.to_string());
            }
            "price" => {
                let (sec, _) = line.symbol()?;
                let (tick, _) = line.tick()?;
                let t = line.next("price")?;
                let price: Money = t
                    .text
                    .parse()
                    .ok()
                    .filter(|p: &Money| !p.is_negative())
                    .ok_or_else(|| line.err(t.col, syntax("non-negative decimal price", t)))?;
                if prices.insert(sec.clone(), tick, price).is_some() {
                    return Err(line.err(head.col, ParseErrorKind::DuplicatePrice { sec, tick }));
                }
            }
            "at" => {
                let (tick, tick_tok) = line.tick()?;
                if let Some(prev) = events.last().map(|e: &TransactionEvent| e.at) {
                    if tick < prev {
                        return Err(line.err(
                            tick_tok.col,
                            ParseErrorKind::NonMonotonicTick {
                                previous: prev,
                                found: tick,
                            },
                        ));
                    }
                }
                let action = line.next("event")?;
                let mut sec_col = action.col;
                let kind = match action.text {
                    "buy" | "borrow" | "short-sell" | "sell" | "cover" => {
                        let (sec, sec_tok) = line.symbol()?;
                        sec_col = sec_tok.col;
                        let qty = line.quantity()?;
                        match action.text {
                            "buy" => EventKind::Buy { sec, qty },
                            "borrow" => EventKind::Borrow { sec, qty },
                            "short-sell" => EventKind::ShortSell { sec, qty },
                            "sell" => EventKind::SellOwned { sec, qty },
                            _ => {
                                let how = line.next("`by-purchase` or `with-owned`")?;
                                match how.text {
                                    "by-purchase" => EventKind::CoverByPurchase { sec, qty },
                                    "with-owned" => EventKind::CoverByOwnedLot { sec, qty },
                                    _ => {
                                        return Err(line.err(
                                            how.col,
                                            syntax("`by-purchase` or `with-owned`", how),
                                        ))
                                    }
                                }
                            }
                        }
                    }
                    "death" => {
                        if let Some(kw) = line.peek() {
                            if kw.text != "heir" {
                                return Err(line.err(kw.col, syntax("`heir` or end of line", kw)));
                            }
                            line.pos += 1;
                            let label = line.next("heir label")?;
                            if heir_label.as_deref().is_some_and(|h| h != label.text) {
                                return Err(line.err(label.col, syntax("the same heir label", label)));
                            }
                            heir_label = Some(label.text.to_string());
                        }
                        EventKind::Death
                    }
                    other => {
                        return Err(line.err(
                            action.col,
                            ParseErrorKind::UnknownDirective(other.to_string()),
                        ))
                    }
                };
                events.push(TransactionEvent { at: tick, kind });
                sites.push(EventSite {
                    line: line.number,
                    sec_col,
                });
            }
            other => {
                return Err(line.err(head.col, ParseErrorKind::UnknownDirective(other.to_string())));
            }
        }
        line.finish()?;
    }

    for (ev, site) in events.iter().zip(&sites) {
        let Some(sec) = ev.kind.security() else { continue };
        let defined = if ev.kind.needs_price() {
            prices.price_at(sec, ev.at).is_ok()
        } else {
            prices.has_security(sec)
        };
        if !defined {
            return Err(ParseError {
                line: site.line,
                col: site.sec_col,
                kind: ParseErrorKind::UndefinedPrice {
                    sec: sec.clone(),
                    tick: ev.at,
                },
            });
        }
    }

    Ok(Scenario {
        name: name.unwrap_or_else(|| DEFAULT_NAME.to_string()),
        prices,
        events,
        heir_label,
    })
}

fn price_text(price: Money) -> String {
    if price.centavos() % 100 == 0 {
        (price.centavos() / 100).to_string()
    } else {
        price.to_string()
    }
}

/// Renders a scenario in the text format; `parse_scenario` reads it back
/// unchanged.
pub fn format_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario {}", s.name);
    for (sec, tick, price) in s.prices.iter() {
        let _ = writeln!(out, "price {sec} {tick} {}", price_text(price));
    }
    let mut heir_written = false;
    for ev in &s.events {
        let at = ev.at;
        let _ = match &ev.kind {
            EventKind::Buy { sec, qty } => writeln!(out, "at {at} buy {sec} {qty}"),
            EventKind::Borrow { sec, qty } => writeln!(out, "at {at} borrow {sec} {qty}"),
            EventKind::ShortSell { sec, qty } => writeln!(out, "at {at} short-sell {sec} {qty}"),
            EventKind::SellOwned { sec, qty } => writeln!(out, "at {at} sell {sec} {qty}"),
            EventKind::CoverByPurchase { sec, qty } => {
                writeln!(out, "at {at} cover {sec} {qty} by-purchase")
            }
            EventKind::CoverByOwnedLot { sec, qty } => {
                writeln!(out, "at {at} cover {sec} {qty} with-owned")
            }
            EventKind::Death => match (&s.heir_label, heir_written) {
                (Some(heir), false) => {
                    heir_written = true;
                    writeln!(out, "at {at} death heir {heir}")
                }
                _ => writeln!(out, "at {at} death"),
            },
        };
    }
    out
}
