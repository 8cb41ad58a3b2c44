//! Text, CSV and JSON renderings of run and comparison reports.

use std::str::FromStr;

use realize_core::{ComparisonReport, Money, RunReport};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Table,
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "table" => Ok(OutputFormat::Table),
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}` (expected table, csv or json)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Align {
    Left,
    Right,
}

#[derive(Debug, Clone)]
enum Line {
    Cells(Vec<String>),
    Text(String),
    Rule,
}

/// Plain-text table with per-column alignment. Widths count characters, so
/// `₱` and `✓` take one column each.
#[derive(Debug, Clone)]
pub struct TextTable {
    aligns: Vec<Align>,
    lines: Vec<Line>,
}

impl TextTable {
    pub fn new(aligns: &[Align]) -> Self {
        TextTable {
            aligns: aligns.to_vec(),
            lines: Vec::new(),
        }
    }

    /// First column left-aligned, the remaining `n - 1` right-aligned.
    pub fn labelled(n: usize) -> Self {
        let mut aligns = vec![Align::Right; n];
        aligns[0] = Align::Left;
        TextTable::new(&aligns)
    }

    pub fn row<I, S>(&mut self, cells: I) -> &mut Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.lines.push(Line::Cells(cells.into_iter().map(Into::into).collect()));
        self
    }

    /// A free-standing line that does not take part in column sizing.
    pub fn text(&mut self, s: impl Into<String>) -> &mut Self {
        self.lines.push(Line::Text(s.into()));
        self
    }

    pub fn rule(&mut self) -> &mut Self {
        self.lines.push(Line::Rule);
        self
    }

    pub fn render(&self) -> String {
        let mut widths: Vec<usize> = Vec::new();
        for line in &self.lines {
            if let Line::Cells(cells) = line {
                for (i, c) in cells.iter().enumerate() {
                    let w = c.chars().count();
                    if i == widths.len() {
                        widths.push(w);
                    } else if widths[i] < w {
                        widths[i] = w;
                    }
                }
            }
        }
        let total = widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1);
        let mut out = String::new();
        for line in &self.lines {
            let rendered = match line {
                Line::Text(s) => s.clone(),
                Line::Rule => "-".repeat(total),
                Line::Cells(cells) => {
                    let mut s = String::new();
                    for (i, c) in cells.iter().enumerate() {
                        if i > 0 {
                            s.push_str("  ");
                        }
                        let pad = widths[i] - c.chars().count();
                        match self.aligns.get(i).copied().unwrap_or(Align::Right) {
                            Align::Left => {
                                s.push_str(c);
                                s.extend(std::iter::repeat_n(' ', pad));
                            }
                            Align::Right => {
                                s.extend(std::iter::repeat_n(' ', pad));
                                s.push_str(c);
                            }
                        }
                    }
                    s
                }
            };
            out.push_str(rendered.trim_end());
            out.push('\n');
        }
        out
    }
}

/// `+₱500,000.00` for gains, `-₱…` for losses, `₱0.00` for nothing.
pub fn signed_peso(m: Money) -> String {
    if m.is_positive() {
        format!("+{}", m.peso())
    } else {
        m.peso()
    }
}

fn qty(q: u64) -> String {
    Money::from_pesos(q as i64).grouped().trim_end_matches(".00").to_string()
}

pub fn run_table(r: &RunReport) -> String {
    let mut out = String::new();
    let mut head = TextTable::labelled(2);
    head.row(["scenario", r.scenario.as_str()]);
    head.row(["regime".to_string(), r.regime.to_string()]);
    head.row(["rates".to_string(), r.schedule.to_string()]);
    head.row(["window".to_string(), r.window.to_string()]);
    out.push_str(&head.render());

    out.push_str("\nRealization events\n");
    if r.realizations.is_empty() {
        out.push_str("(none)\n");
    } else {
        let mut t = TextTable::new(&[
            Align::Right,
            Align::Left,
            Align::Left,
            Align::Right,
            Align::Right,
            Align::Right,
            Align::Right,
            Align::Right,
        ]);
        t.row(["tick", "kind", "security", "qty", "amount/share", "basis/share", "gain/share", "gain"]);
        for e in &r.realizations {
            t.row([
                e.at.0.to_string(),
                e.kind.as_str().to_string(),
                e.sec.to_string(),
                qty(e.qty),
                e.amount_realized_per_share.peso(),
                e.basis_per_share.peso(),
                e.gain_per_share.peso(),
                e.gain_total.peso(),
            ]);
        }
        out.push_str(&t.render());
    }

    out.push_str("\nTax timeline\n");
    if r.tax.lines.is_empty() {
        out.push_str("(none)\n");
    } else {
        let mut t = TextTable::new(&[Align::Right, Align::Right, Align::Right]);
        t.row(["period", "net capital gain", "tax due"]);
        for l in &r.tax.lines {
            t.row([l.period.0.to_string(), l.net_capital_gain.peso(), l.tax_due.peso()]);
        }
        out.push_str(&t.render());
    }

    out.push_str("\nCash\n");
    if r.cash.is_empty() {
        out.push_str("(none)\n");
    } else {
        let mut t = TextTable::new(&[Align::Right, Align::Right, Align::Right]);
        t.row(["tick", "delta", "cumulative"]);
        for c in &r.cash {
            t.row([c.tick.0.to_string(), signed_peso(c.delta), c.cumulative.peso()]);
        }
        out.push_str(&t.render());
    }

    out.push_str("\nTotals\n");
    let mut t = TextTable::labelled(2);
    t.row(["total tax".to_string(), r.totals.total_tax.peso()]);
    t.row(["net capital gain".to_string(), r.totals.net_capital_gain.peso()]);
    t.row(["pre-tax cash".to_string(), r.totals.pre_tax_cash.peso()]);
    t.row(["after-tax cash".to_string(), r.totals.after_tax_cash.peso()]);
    out.push_str(&t.render());
    out
}

pub fn compare_table(c: &ComparisonReport) -> String {
    let mut out = String::new();
    let mut head = TextTable::labelled(2);
    head.row(["scenario", c.scenario.as_str()]);
    head.row(["rates".to_string(), c.schedule.to_string()]);
    head.row(["window".to_string(), c.window.to_string()]);
    out.push_str(&head.render());
    out.push('\n');

    let mut t = TextTable::labelled(6);
    t.row(["period", "current net", "current tax", "proposed net", "proposed tax", "delta tax"]);
    for r in &c.rows {
        t.row([
            r.period.0.to_string(),
            r.current_net.peso(),
            r.current_tax.peso(),
            r.proposed_net.peso(),
            r.proposed_tax.peso(),
            signed_peso(r.delta_tax),
        ]);
    }
    t.rule();
    t.row([
        "total".to_string(),
        c.current.totals.net_capital_gain.peso(),
        c.current_total.peso(),
        c.proposed.totals.net_capital_gain.peso(),
        c.proposed_total.peso(),
        signed_peso(c.delta_total),
    ]);
    out.push_str(&t.render());
    out
}

const RUN_CSV_HEADER: [&str; 11] = [
    "scenario",
    "regime",
    "record",
    "tick",
    "item",
    "security",
    "qty",
    "amount_per_share",
    "basis_per_share",
    "gain_per_share",
    "centavos",
];

fn csv_string(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is UTF-8")
}

fn c(m: Money) -> String {
    m.centavos().to_string()
}

fn run_csv_rows(r: &RunReport) -> Vec<Vec<String>> {
    let base = |record: &str, tick: String, item: &str| {
        vec![
            r.scenario.clone(),
            r.regime.to_string(),
            record.to_string(),
            tick,
            item.to_string(),
        ]
    };
    let mut rows = Vec::new();
    for e in &r.realizations {
        let mut row = base("realization", e.at.0.to_string(), e.kind.as_str());
        row.extend([
            e.sec.to_string(),
            e.qty.to_string(),
            c(e.amount_realized_per_share),
            c(e.basis_per_share),
            c(e.gain_per_share),
            c(e.gain_total),
        ]);
        rows.push(row);
    }
    let blank = || vec![String::new(); 5];
    let mut push = |record: &str, tick: String, item: &str, value: Money| {
        let mut row = base(record, tick, item);
        row.extend(blank());
        row.push(c(value));
        rows.push(row);
    };
    for l in &r.tax.lines {
        push("tax", l.period.0.to_string(), "net_capital_gain", l.net_capital_gain);
        push("tax", l.period.0.to_string(), "tax_due", l.tax_due);
    }
    for p in &r.cash {
        push("cash", p.tick.0.to_string(), "delta", p.delta);
        push("cash", p.tick.0.to_string(), "cumulative", p.cumulative);
    }
    let t = &r.totals;
    push("total", String::new(), "total_tax", t.total_tax);
    push("total", String::new(), "net_capital_gain", t.net_capital_gain);
    push("total", String::new(), "pre_tax_cash", t.pre_tax_cash);
    push("total", String::new(), "after_tax_cash", t.after_tax_cash);
    rows
}

/// One CSV document for any number of runs; the `scenario` column tells
/// them apart.
pub fn runs_csv(reports: &[RunReport]) -> String {
    let mut rows = vec![RUN_CSV_HEADER.iter().map(|s| s.to_string()).collect()];
    for r in reports {
        rows.extend(run_csv_rows(r));
    }
    csv_string(rows)
}

pub fn compares_csv(reports: &[ComparisonReport]) -> String {
    let mut rows: Vec<Vec<String>> = vec![[
        "scenario",
        "period",
        "current_net",
        "current_tax",
        "proposed_net",
        "proposed_tax",
        "delta_tax",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()];
    for r in reports {
        for row in &r.rows {
            rows.push(vec![
                r.scenario.clone(),
                row.period.0.to_string(),
                c(row.current_net),
                c(row.current_tax),
                c(row.proposed_net),
                c(row.proposed_tax),
                c(row.delta_tax),
            ]);
        }
        rows.push(vec![
            r.scenario.clone(),
            "total".to_string(),
            c(r.current.totals.net_capital_gain),
            c(r.current_total),
            c(r.proposed.totals.net_capital_gain),
            c(r.proposed_total),
            c(r.delta_total),
        ]);
    }
    csv_string(rows)
}

/// A single report as one JSON object, several as an array.
pub fn json<T: Serialize>(reports: &[T]) -> String {
    let mut s = match reports {
        [one] => serde_json::to_string_pretty(one),
        many => serde_json::to_string_pretty(many),
    }
    .expect("reports serialize");
    s.push('\n');
    s
}
