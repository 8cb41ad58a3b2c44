//! The worked tables, rebuilt from engine output in their published layout.
//!
//! Every number printed here comes from a scenario replayed through the
//! engine; only the row labels are fixed text.

use realize_core::market::Rate;
use realize_core::realization::{RealizationEvent, RealizationKind};
use realize_core::scenario::{offset_grid_cases, BLOCK};
use realize_core::taxation::tax_due;
use realize_core::{
    builtin, compare, parse_scenario, run, EventKind, Money, NettingWindow, RateSchedule, Regime,
    RunReport, Scenario, SecurityId, Tick,
};
use serde::Serialize;

use crate::render::{Align, TextTable};

const SHORT_T1_T2: &str = "\
price ABC 1 50
price ABC 2 100
at 1 borrow ABC 100000
at 1 short-sell ABC 100000
at 2 cover ABC 100000 by-purchase
";

const SHORT_T2_T3: &str = "\
price ABC 2 100
price ABC 3 30
at 2 borrow ABC 100000
at 2 short-sell ABC 100000
at 3 cover ABC 100000 by-purchase
";

const LONG_T2_T3: &str = "\
price ABC 2 100
price ABC 3 30
at 2 buy ABC 100000
at 3 sell ABC 100000
";

const COVER_WITH_OWNED_T1_T2: &str = "\
price ABC 1 50
price ABC 2 100
at 1 buy ABC 100000
at 1 borrow ABC 100000
at 1 short-sell ABC 100000
at 2 cover ABC 100000 with-owned
";

fn script(text: &str) -> Scenario {
    parse_scenario(text).expect("built-in script parses")
}

fn replay(s: &Scenario, regime: Regime) -> RunReport {
    run(s, regime, RateSchedule::Flat, NettingWindow::PerTick).expect("built-in scenario runs")
}

fn current(s: &Scenario) -> RunReport {
    replay(s, Regime::Current)
}

fn event(r: &RunReport, kind: RealizationKind) -> &RealizationEvent {
    r.realizations
        .iter()
        .find(|e| e.kind == kind)
        .expect("expected realization event")
}

fn abc() -> SecurityId {
    SecurityId::new("ABC").expect("valid symbol")
}

fn price(s: &Scenario, tick: u64) -> Money {
    s.prices.price_at(&abc(), Tick(tick)).expect("quoted tick")
}

/// Whole pesos print without decimals, as in `5,000,000`.
fn whole(m: Money) -> String {
    let s = m.grouped();
    match s.strip_suffix(".00") {
        Some(w) => w.to_string(),
        None => s,
    }
}

fn cents(m: Money) -> String {
    m.grouped()
}

fn rate() -> String {
    Rate::TEN_PERCENT.to_string()
}

fn per_share_tax(gain_per_share: Money) -> Money {
    tax_due(gain_per_share, RateSchedule::Flat)
}

/// `Capital Gain` for gains and zero, `Capital Loss` with the magnitude for
/// losses.
fn gain_or_loss<'a>(gain: &'a str, loss: &'a str, m: Money) -> (&'a str, Money) {
    if m.is_negative() {
        (loss, m.abs())
    } else {
        (gain, m)
    }
}

struct Golden {
    title: &'static str,
    body: String,
}

fn golden(title: &'static str, t: &TextTable) -> Golden {
    Golden {
        title,
        body: t.render(),
    }
}

fn per_share_header(t: &mut TextTable) {
    t.row(["", "Per Share (₱)", "Total (₱)"]);
}

fn amount_row(t: &mut TextTable, label: &str, per_share: Money, total: Money, fmt: fn(Money) -> String) {
    t.row([label.to_string(), whole(per_share), fmt(total)]);
}

fn rate_row(t: &mut TextTable, label: &str) {
    t.row([label.to_string(), rate(), rate()]);
}

/// Selling price, basis, gain and (for gains) tax of a single realization.
fn simple_sale(
    title: &'static str,
    labels: [&str; 5],
    e: &RealizationEvent,
    tax_total: Money,
    show_tax: bool,
) -> Golden {
    let [amount, basis, gain, loss, tax] = labels;
    let mut t = TextTable::labelled(3);
    per_share_header(&mut t);
    amount_row(&mut t, amount, e.amount_realized_per_share, e.amount_realized_total(), whole);
    amount_row(&mut t, basis, e.basis_per_share, e.basis_total(), whole);
    let (label, ps) = gain_or_loss(gain, loss, e.gain_per_share);
    amount_row(&mut t, label, ps, e.gain_total.abs(), whole);
    if show_tax {
        rate_row(&mut t, "Multiply by: Rate of Capital Gains Tax");
        amount_row(&mut t, tax, per_share_tax(e.gain_per_share), tax_total, whole);
    }
    golden(title, &t)
}

fn ordinary_sale_gain() -> Golden {
    let r = current(&builtin("strategy1").expect("built-in"));
    simple_sale(
        "ORDINARY SALE OF STOCK: BUY AT TIME 1, SELL AT TIME 2",
        ["Selling Price", "Less: Basis", "Capital Gain", "Capital Loss", "Capital Gains Tax"],
        event(&r, RealizationKind::OrdinarySale),
        r.totals.total_tax,
        true,
    )
}

fn ordinary_sale_loss() -> Golden {
    let r = current(&script(LONG_T2_T3));
    simple_sale(
        "ORDINARY SALE OF STOCK: BUY AT TIME 2, SELL AT TIME 3",
        ["Selling Price", "Less: Basis", "Capital Gain", "Capital Loss", "Capital Gains Tax"],
        event(&r, RealizationKind::OrdinarySale),
        r.totals.total_tax,
        false,
    )
}

fn short_sale_t1_t2() -> Golden {
    let r = current(&script(SHORT_T1_T2));
    simple_sale(
        "SHORT SALE OF STOCK: SELL AT TIME 1, COVER AT TIME 2",
        [
            "Selling Price from Short Sale",
            "Less: Cost of Replacing Borrowed Shares",
            "Capital Gain",
            "Capital Loss",
            "Capital Gains Tax",
        ],
        event(&r, RealizationKind::ShortCover),
        r.totals.total_tax,
        false,
    )
}

fn short_sale_t2_t3() -> Golden {
    let r = current(&script(SHORT_T2_T3));
    simple_sale(
        "SHORT SALE OF STOCK: SELL AT TIME 2, COVER AT TIME 3",
        [
            "Selling Price from Short Sale (time 2)",
            "Less: Cost of Replacing Borrowed Shares (time 3)",
            "Capital Gain (time 3)",
            "Capital Loss (time 3)",
            "Capital Gains Tax",
        ],
        event(&r, RealizationKind::ShortCover),
        r.totals.total_tax,
        true,
    )
}

/// One side of an inverse-relationship table: label/value pairs.
fn inverse_side(
    e: &RealizationEvent,
    amount_at: u64,
    basis_at: u64,
    gain_label_time: bool,
) -> Vec<(String, String)> {
    let suffix = if gain_label_time {
        format!(" (time {})", e.at.0)
    } else {
        String::new()
    };
    let (label, ps) = gain_or_loss("Capital Gain", "Capital Loss", e.gain_per_share);
    let mut side = vec![
        (format!("Amount Realized (time {amount_at})"), whole(e.amount_realized_per_share)),
        (format!("Less: Basis (time {basis_at})"), whole(e.basis_per_share)),
        (format!("{label}{suffix}"), whole(ps)),
    ];
    if e.gain_per_share.is_positive() {
        side.push(("Multiply by: Rate of CGT".into(), rate()));
        side.push(("Capital Gains Tax".into(), whole(per_share_tax(e.gain_per_share))));
    }
    side
}

fn inverse_table(title: &'static str, ordinary: Vec<(String, String)>, short: Vec<(String, String)>) -> Golden {
    let mut t = TextTable::new(&[Align::Left, Align::Right, Align::Left, Align::Right]);
    t.row(["Ordinary Sale", "", "Short Sale", ""]);
    t.row(["", "Per Share (₱)", "", "Per Share (₱)"]);
    for i in 0..ordinary.len().max(short.len()) {
        let (a, b) = ordinary.get(i).cloned().unwrap_or_default();
        let (c, d) = short.get(i).cloned().unwrap_or_default();
        t.row([a, b, c, d]);
    }
    golden(title, &t)
}

fn inverse_t1_t2() -> Golden {
    let long = current(&builtin("strategy1").expect("built-in"));
    let short = current(&script(SHORT_T1_T2));
    inverse_table(
        "INVERSE RELATIONSHIP: TIME 1 TO TIME 2",
        inverse_side(event(&long, RealizationKind::OrdinarySale), 2, 1, true),
        inverse_side(event(&short, RealizationKind::ShortCover), 1, 2, true),
    )
}

fn inverse_t2_t3() -> Golden {
    let long = current(&script(LONG_T2_T3));
    let short = current(&script(SHORT_T2_T3));
    inverse_table(
        "INVERSE RELATIONSHIP: TIME 2 TO TIME 3",
        inverse_side(event(&long, RealizationKind::OrdinarySale), 3, 2, false),
        inverse_side(event(&short, RealizationKind::ShortCover), 2, 3, true),
    )
}

/// One row of the offsetting grid, per share.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridRow {
    pub present: Money,
    pub future: Money,
    pub ordinary_selling_price: Money,
    pub ordinary_basis: Money,
    pub ordinary_gain: Money,
    pub short_selling_price: Money,
    pub short_basis: Money,
    pub short_gain: Money,
}

pub fn offset_grid() -> Vec<GridRow> {
    offset_grid_cases()
        .into_iter()
        .map(|case| {
            let long = current(&case.ordinary);
            let short = current(&case.short);
            let o = event(&long, RealizationKind::OrdinarySale);
            let s = event(&short, RealizationKind::ShortCover);
            GridRow {
                present: case.present,
                future: case.future,
                ordinary_selling_price: o.amount_realized_per_share,
                ordinary_basis: o.basis_per_share,
                ordinary_gain: o.gain_per_share,
                short_selling_price: s.amount_realized_per_share,
                short_basis: s.basis_per_share,
                short_gain: s.gain_per_share,
            }
        })
        .collect()
}

pub fn grid_table(rows: &[GridRow]) -> String {
    let mut t = TextTable::new(&[Align::Right; 6]);
    t.row(["Ordinary Sale (₱)", "", "", "Short Sale (₱)", "", ""]);
    t.row(["Selling Price", "Basis", "Gain (Loss)", "Selling Price", "Basis", "Gain (Loss)"]);
    t.row([
        "Price at future date",
        "Price at present date",
        "",
        "Price at present date",
        "Price at future date",
        "",
    ]);
    for r in rows {
        t.row([
            r.ordinary_selling_price,
            r.ordinary_basis,
            r.ordinary_gain,
            r.short_selling_price,
            r.short_basis,
            r.short_gain,
        ]
        .map(whole));
    }
    t.render()
}

pub fn grid_csv(rows: &[GridRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "present",
        "future",
        "ordinary_selling_price",
        "ordinary_basis",
        "ordinary_gain",
        "short_selling_price",
        "short_basis",
        "short_gain",
    ])
    .expect("writing to memory");
    for r in rows {
        w.write_record(
            [
                r.present,
                r.future,
                r.ordinary_selling_price,
                r.ordinary_basis,
                r.ordinary_gain,
                r.short_selling_price,
                r.short_basis,
                r.short_gain,
            ]
            .map(|m| m.centavos().to_string()),
        )
        .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is UTF-8")
}

fn grid() -> Golden {
    let rows = offset_grid();
    let mut prices = TextTable::new(&[Align::Right, Align::Right]);
    prices.row(["Present Share Price (₱)", "Probable Share Price in the Future (₱)"]);
    for r in &rows {
        prices.row([whole(r.present), whole(r.future)]);
    }
    Golden {
        title: "OFFSETTING EFFECT: PRESENT PRICE AGAINST PROBABLE FUTURE PRICES",
        body: format!("{}\n{}", prices.render(), grid_table(&rows)),
    }
}

fn timing_of_receipt() -> Golden {
    let long = builtin("strategy1").expect("built-in");
    let short = script(SHORT_T1_T2);
    let mut columns = Vec::new();
    for s in [&long, &short] {
        let r = current(s);
        for t in [1, 2] {
            let action = s
                .events
                .iter()
                .filter(|e| e.at == Tick(t))
                .find_map(|e| match e.kind {
                    EventKind::Buy { .. } | EventKind::CoverByPurchase { .. } => Some("Acquire (buy)"),
                    EventKind::SellOwned { .. } | EventKind::ShortSell { .. } => Some("Dispose (sell)"),
                    _ => None,
                })
                .unwrap_or("");
            let tick = |b: bool| if b { "✓" } else { "" };
            let realized = r.realizations.iter().any(|e| e.at == Tick(t));
            let received = r.cash.iter().any(|c| c.tick == Tick(t) && c.delta.is_positive());
            columns.push([format!("time {t}"), action.into(), tick(realized).into(), tick(received).into()]);
        }
    }
    let mut t = TextTable::new(&[Align::Left; 5]);
    t.row(["Time period", "Ordinary Sale", "", "Short Sale", ""]);
    let labels = ["", "Sequence of events", "Date of realization", "Date of receipt of sale proceeds"];
    for (i, label) in labels.into_iter().enumerate() {
        t.row(std::iter::once(label.to_string()).chain(columns.iter().map(|c: &[String; 4]| c[i].clone())));
    }
    golden("TIMING DIFFERENCE IN RECEIPT OF SALE PROCEEDS", &t)
}

fn cover_with_owned() -> Vec<Golden> {
    let long = current(&builtin("strategy1").expect("built-in"));
    let sale = event(&long, RealizationKind::OrdinarySale);
    let r = current(&script(COVER_WITH_OWNED_T1_T2));
    let owned = event(&r, RealizationKind::OwnedDisposalAtCover);
    let short = event(&r, RealizationKind::ShortCover);

    let mut side = TextTable::labelled(3);
    side.row(["", "Ordinary Sale (₱)", "Disposition of Owned Share to Replace the Borrowed Share (₱)"]);
    side.row([
        "Proceeds of Disposition".to_string(),
        whole(sale.amount_realized_per_share),
        whole(owned.amount_realized_per_share),
    ]);
    side.row(["Less: Basis".to_string(), whole(sale.basis_per_share), whole(owned.basis_per_share)]);
    side.row(["Capital Gain".to_string(), whole(sale.gain_per_share), whole(owned.gain_per_share)]);

    let disposal = simple_sale(
        "DISPOSITION OF OWNED SHARES TO REPLACE BORROWED SHARES",
        [
            "Proceeds of Disposition (time 2)",
            "Less: Basis (time 1)",
            "Capital Gain",
            "Capital Loss",
            "Capital Gains Tax",
        ],
        owned,
        Money::ZERO,
        false,
    );
    let short_sale = simple_sale(
        "SHORT SALE COVERED WITH OWNED SHARES",
        [
            "Selling Price from Short Sale (time 1)",
            "Less: Cost of Replacing Borrowed Shares (time 2)",
            "Capital Gain",
            "Capital Loss",
            "Capital Gains Tax",
        ],
        short,
        Money::ZERO,
        false,
    );

    let net = r.tax.lines.iter().map(|l| l.net_capital_gain).sum::<Money>();
    let mut t = TextTable::labelled(3);
    per_share_header(&mut t);
    amount_row(
        &mut t,
        "Capital Gain from Disposition of Owned Share",
        owned.gain_per_share,
        owned.gain_total,
        whole,
    );
    amount_row(
        &mut t,
        "Less: Capital Loss from Short Sale",
        -short.gain_per_share,
        -short.gain_total,
        whole,
    );
    amount_row(
        &mut t,
        "Net Capital Gain",
        owned.gain_per_share + short.gain_per_share,
        net,
        whole,
    );

    vec![
        golden("ORDINARY SALE AND DISPOSITION OF OWNED SHARE", &side),
        disposal,
        short_sale,
        golden("NET CAPITAL GAIN ON COVERING WITH OWNED SHARES", &t),
    ]
}

/// `Original Purchase Price`, then one unrealized-movement row and one share
/// price row per later point. Points are `(tick, time label)`.
fn holding_walk(t: &mut TextTable, s: &Scenario, points: &[(u64, u64)]) {
    let (first, n0) = points[0];
    let p0 = price(s, first);
    amount_row(t, &format!("Original Purchase Price (time {n0})"), p0, p0.times(BLOCK), cents);
    for pair in points.windows(2) {
        let ((a, na), (b, nb)) = (pair[0], pair[1]);
        let move_ = price(s, b) - price(s, a);
        let label = if move_.is_negative() {
            "Less: Unrealized Capital Loss"
        } else {
            "Add: Unrealized Capital Gains"
        };
        amount_row(t, &format!("{label} (time {na}-{nb})"), move_.abs(), move_.abs().times(BLOCK), cents);
        let pb = price(s, b);
        amount_row(t, &format!("Share Price (time {nb})"), pb, pb.times(BLOCK), cents);
    }
}

fn strategy1() -> Golden {
    let s = builtin("strategy1").expect("built-in");
    let r = current(&s);
    let e = event(&r, RealizationKind::OrdinarySale);
    let mut t = TextTable::labelled(3);
    per_share_header(&mut t);
    holding_walk(&mut t, &s, &[(1, 1), (2, 2)]);
    amount_row(&mut t, "Selling Price (time 2)", e.amount_realized_per_share, e.amount_realized_total(), cents);
    amount_row(&mut t, "Less: Basis (time 1)", e.basis_per_share, e.basis_total(), cents);
    amount_row(&mut t, "Capital Gains (time 2)", e.gain_per_share, e.gain_total, cents);
    rate_row(&mut t, "Multiply by: Rate of Capital Gains Tax");
    amount_row(
        &mut t,
        "Capital Gains Tax (time 2)",
        per_share_tax(e.gain_per_share),
        r.tax.tax_at(Tick(2)),
        cents,
    );
    golden("STRATEGY 1: SELL AT TIME 2", &t)
}

fn strategy2() -> Golden {
    let s = builtin("strategy2").expect("built-in");
    let r = current(&s);
    let e = event(&r, RealizationKind::OrdinarySale);
    let mut t = TextTable::labelled(3);
    per_share_header(&mut t);
    holding_walk(&mut t, &s, &[(1, 1), (3, 3)]);
    t.rule();
    amount_row(&mut t, "Selling Price (time 3)", e.amount_realized_per_share, e.amount_realized_total(), cents);
    amount_row(&mut t, "Less: Basis", e.basis_per_share, e.basis_total(), cents);
    let paren = |m: Money, f: fn(Money) -> String| {
        if m.is_negative() {
            format!("({})", f(m.abs()))
        } else {
            f(m)
        }
    };
    let (label, _) = gain_or_loss("Capital Gain (time 3)", "Capital Loss (time 3)", e.gain_per_share);
    t.row([label.to_string(), paren(e.gain_per_share, whole), paren(e.gain_total, cents)]);
    golden("STRATEGY 2: SELL AT TIME 3", &t)
}

/// Labels of the two realization events at cover, and which tick numbers the
/// printed table calls them.
struct CoverLabels {
    basis: &'static str,
    cover_time: u64,
    short_time: u64,
}

/// The owned-shares, short-sale and netting sections shared by Strategy 3
/// and the death scenario.
fn cover_sections(t: &mut TextTable, s: &Scenario, r: &RunReport, walk: &[(u64, u64)], labels: CoverLabels) {
    let owned = event(r, RealizationKind::OwnedDisposalAtCover);
    let short = event(r, RealizationKind::ShortCover);
    let ct = labels.cover_time;

    let owned_gain = !owned.gain_per_share.is_negative();
    t.text(if owned_gain {
        "CAPITAL GAINS FROM SHARES OWNED"
    } else {
        "CAPITAL LOSS FROM SHARES OWNED"
    });
    t.text("");
    per_share_header(t);
    holding_walk(t, s, walk);
    amount_row(
        t,
        &format!("Proceeds from Disposition of Shares (time {ct})"),
        owned.amount_realized_per_share,
        owned.amount_realized_total(),
        cents,
    );
    amount_row(t, labels.basis, owned.basis_per_share, owned.basis_total(), cents);
    let (owned_label, _) = gain_or_loss("Capital Gain", "Capital Loss", owned.gain_per_share);
    let owned_line = format!("{owned_label} from Disposition of Owned Shares (time {ct})");
    amount_row(t, &owned_line, owned.gain_per_share.abs(), owned.gain_total.abs(), cents);

    t.text("");
    let short_gain = !short.gain_per_share.is_negative();
    t.text(if short_gain {
        "CAPITAL GAINS FROM SHORT SALE"
    } else {
        "CAPITAL LOSS FROM SHORT SALE"
    });
    t.text("");
    amount_row(
        t,
        &format!("Proceeds from Sale of Borrowed Shares (time {})", labels.short_time),
        short.amount_realized_per_share,
        short.amount_realized_total(),
        cents,
    );
    amount_row(
        t,
        &format!("Less: Cost of Replacing Borrowed Shares (time {ct})"),
        short.basis_per_share,
        short.basis_total(),
        cents,
    );
    let (short_label, _) = gain_or_loss("Capital Gains", "Capital Loss", short.gain_per_share);
    let short_line = format!("{short_label} from Short Sale (time {ct})");
    amount_row(t, &short_line, short.gain_per_share.abs(), short.gain_total.abs(), cents);

    let net_ps = owned.gain_per_share + short.gain_per_share;
    let net_total: Money = r.tax.lines.iter().map(|l| l.net_capital_gain).sum();
    t.text("");
    t.text(if net_ps.is_negative() {
        "NET CAPITAL LOSS COMPUTATION"
    } else {
        "NET CAPITAL GAINS COMPUTATION"
    });
    t.text("");
    // Gains first, then what is added or subtracted from them.
    let mut items = vec![
        (
            format!("Disposition of Owned Shares (time {ct})"),
            owned.gain_per_share,
            owned.gain_total,
        ),
        (format!("Short Sale (time {ct})"), short.gain_per_share, short.gain_total),
    ];
    items.sort_by_key(|i| i.1.is_negative());
    for (i, (what, ps, total)) in items.into_iter().enumerate() {
        let label = match (i, ps.is_negative()) {
            (0, false) => format!("Capital Gains from {what}"),
            (0, true) => format!("Capital Loss from {what}"),
            (_, false) => format!("Add: Capital Gains from {what}"),
            (_, true) => format!("Less: Capital Loss from {what}"),
        };
        amount_row(t, &label, ps.abs(), total.abs(), cents);
    }
    let (net_label, _) = gain_or_loss("Net Capital Gains", "Net Capital Loss", net_ps);
    amount_row(t, &format!("{net_label} (time {ct})"), net_ps.abs(), net_total.abs(), cents);
    if net_ps.is_positive() {
        rate_row(t, "Multiply by: Rate of Capital Gains Tax");
        amount_row(
            t,
            &format!("Capital Gains Tax (time {ct})"),
            per_share_tax(net_ps),
            r.totals.total_tax,
            cents,
        );
    }
}

fn strategy3() -> Golden {
    let s = builtin("strategy3").expect("built-in");
    let r = current(&s);
    let mut t = TextTable::labelled(3);
    cover_sections(
        &mut t,
        &s,
        &r,
        &[(1, 1), (2, 2), (3, 3)],
        CoverLabels {
            basis: "Less: Basis (time 1)",
            cover_time: 3,
            short_time: 2,
        },
    );
    golden("STRATEGY 3: TAX DEFERRAL SCHEME", &t)
}

fn death_avoidance() -> Golden {
    let s = builtin("death_avoidance").expect("built-in");
    let r = current(&s);
    let mut t = TextTable::labelled(3);
    // The death tick sits between time 2 and time 3; the cover tick is time 3.
    cover_sections(
        &mut t,
        &s,
        &r,
        &[(1, 1), (2, 2), (4, 3)],
        CoverLabels {
            basis: "Less: Basis (intervening period between time 2 and time 3)",
            cover_time: 3,
            short_time: 2,
        },
    );
    golden("TAX AVOIDANCE SCHEME WITH INTERVENTION OF DEATH", &t)
}

fn proposed_rule() -> Vec<Golden> {
    let s = builtin("proposed_demo").expect("built-in");
    let c = compare(&s, RateSchedule::Flat, NettingWindow::PerTick).expect("built-in scenario runs");
    let cs = event(&c.proposed, RealizationKind::ConstructiveSale);
    let sc = event(&c.proposed, RealizationKind::ShortCover);

    let mut t2 = TextTable::labelled(3);
    per_share_header(&mut t2);
    amount_row(&mut t2, "Selling Price (time 2)", cs.amount_realized_per_share, cs.amount_realized_total(), whole);
    amount_row(&mut t2, "Less: Acquisition Cost (time 1)", cs.basis_per_share, cs.basis_total(), whole);
    amount_row(&mut t2, "Capital Gain (time 2)", cs.gain_per_share, cs.gain_total, whole);
    rate_row(&mut t2, "Multiply by: CGT rate");
    amount_row(
        &mut t2,
        "Capital Gains Tax (time 2)",
        per_share_tax(cs.gain_per_share),
        c.proposed.tax.tax_at(Tick(2)),
        whole,
    );

    let mut t3 = TextTable::labelled(3);
    per_share_header(&mut t3);
    amount_row(&mut t3, "Proceeds from Short Sale (time 2)", sc.amount_realized_per_share, sc.amount_realized_total(), whole);
    amount_row(
        &mut t3,
        "Less: Cost of Replacement of Borrowed Share (time 3)",
        sc.basis_per_share,
        sc.basis_total(),
        whole,
    );
    amount_row(&mut t3, "Capital Gain (time 3)", sc.gain_per_share, sc.gain_total, whole);
    rate_row(&mut t3, "Multiply by: CGT rate");
    amount_row(
        &mut t3,
        "Capital Gains Tax (time 3)",
        per_share_tax(sc.gain_per_share),
        c.proposed.tax.tax_at(Tick(3)),
        whole,
    );

    let per_share = |m: Money| Money::from_centavos(m.centavos() / BLOCK as i64);
    let mut cmp = TextTable::labelled(3);
    per_share_header(&mut cmp);
    for row in &c.rows {
        if !row.current_tax.is_positive() {
            continue;
        }
        let label = format!("Existing Rule, Capital Gains Tax (time {})", row.period.0);
        amount_row(&mut cmp, &label, per_share(row.current_tax), row.current_tax, whole);
    }
    for row in &c.rows {
        let label = format!("Proposed Rule, Capital Gains Tax (time {})", row.period.0);
        amount_row(&mut cmp, &label, per_share(row.proposed_tax), row.proposed_tax, whole);
    }
    amount_row(&mut cmp, "Existing Rule, Total", per_share(c.current_total), c.current_total, whole);
    amount_row(&mut cmp, "Proposed Rule, Total", per_share(c.proposed_total), c.proposed_total, whole);

    vec![
        golden("PROPOSED RULE: CONSTRUCTIVE SALE AT TIME 2", &t2),
        golden("PROPOSED RULE: COVER AT TIME 3", &t3),
        golden("EXISTING RULE AGAINST PROPOSED RULE", &cmp),
    ]
}

/// Every worked table, in reading order, as one byte-stable text block.
pub fn paper_tables() -> String {
    let mut tables = vec![
        ordinary_sale_gain(),
        ordinary_sale_loss(),
        short_sale_t1_t2(),
        inverse_t1_t2(),
        short_sale_t2_t3(),
        inverse_t2_t3(),
        grid(),
        timing_of_receipt(),
    ];
    tables.extend(cover_with_owned());
    tables.extend([strategy1(), strategy2(), strategy3(), death_avoidance()]);
    tables.extend(proposed_rule());

    let mut out = String::new();
    for (i, g) in tables.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(g.title);
        out.push_str("\n\n");
        out.push_str(&g.body);
    }
    out
}
