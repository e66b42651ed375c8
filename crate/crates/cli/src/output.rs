use std::io::Write;

use serde::Serialize;
use stp_core::eval::EvalResult;
use stp_core::recommend::Feed;
use stp_core::report::ReportRow;
use stp_core::survey::SurveyTable;

use crate::Format;

/// Compact JSON, the same bytes the API sends for the same value.
pub fn print_json<T: Serialize>(value: &T) {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer(&mut out, value).expect("stdout");
    writeln!(out).expect("stdout");
}

struct Table {
    headers: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(headers: &[&'static str]) -> Self {
        Table {
            headers: headers.to_vec(),
            rows: Vec::new(),
        }
    }

    fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    fn print(&self, format: Format) {
        let mut out = std::io::stdout().lock();
        if format == Format::Csv {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&self.headers).expect("stdout");
            for r in &self.rows {
                w.write_record(r).expect("stdout");
            }
            w.flush().expect("stdout");
            return;
        }
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for r in &self.rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |cells: &mut dyn Iterator<Item = &str>| {
            let padded: Vec<String> = cells.zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            padded.join("  ").trim_end().to_string()
        };
        writeln!(out, "{}", line(&mut self.headers.iter().copied())).expect("stdout");
        for r in &self.rows {
            writeln!(out, "{}", line(&mut r.iter().map(String::as_str))).expect("stdout");
        }
    }
}

pub fn feed_table(feed: &Feed, format: Format) {
    let mut t = Table::new(&["#", "score", "content", "collab", "start", "title", "stp_id"]);
    for (i, e) in feed.recommendations.iter().enumerate() {
        t.row(vec![
            (i + 1).to_string(),
            format!("{:.4}", e.score),
            format!("{:.4}", e.content_component),
            format!("{:.4}", e.collab_component),
            e.start_date.to_string(),
            e.title.clone(),
            e.stp_id.to_string(),
        ]);
    }
    t.print(format);
}

pub fn eval_table(r: &EvalResult, format: Format) {
    let mut t = Table::new(&["k", "n_trials", "hit_rate", "random_baseline", "lift"]);
    t.row(vec![
        r.k.to_string(),
        r.n_trials.to_string(),
        format!("{:.4}", r.hit_rate),
        format!("{:.4}", r.random_baseline),
        format!("{:.2}", r.lift),
    ]);
    t.print(format);
}

pub fn report_table(rows: &[ReportRow]) {
    let mut t = Table::new(&["faculty_name", "college", "item_title", "provider", "date_attended"]);
    for r in rows {
        t.row(vec![
            r.faculty_name.clone(),
            r.college.clone(),
            r.item_title.clone(),
            r.provider.clone(),
            r.date_attended.to_string(),
        ]);
    }
    t.print(Format::Table);
}

pub fn survey_table(table: &SurveyTable, format: Format) {
    let mut t = Table::new(&["item", "n", "mean", "interpretation", "rank"]);
    for r in &table.rows {
        t.row(vec![
            r.item.clone(),
            r.n.to_string(),
            format!("{:.2}", r.mean),
            r.interpretation.to_string(),
            r.rank.to_string(),
        ]);
    }
    t.row(vec![
        "Composite Mean".into(),
        String::new(),
        format!("{:.2}", table.composite_mean),
        table.composite_interpretation.to_string(),
        String::new(),
    ]);
    t.print(format);
}
