//! key=value lines on stdout, an aligned table on stderr.

use std::fmt::Display;

#[derive(Default)]
pub struct Report {
    pairs: Vec<(String, String)>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

/// Shortest round-trip form in scientific notation.
pub fn sci(x: f64) -> String {
    format!("{x:e}")
}

pub fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn kv(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.pairs.push((key.to_string(), value.to_string()));
        self
    }

    pub fn header(&mut self, cols: &[&str]) -> &mut Self {
        self.header = cols.iter().map(|c| c.to_string()).collect();
        self
    }

    pub fn row(&mut self, cells: Vec<String>) -> &mut Self {
        self.rows.push(cells);
        self
    }

    pub fn print(&self) {
        for (k, v) in &self.pairs {
            println!("{k}={v}");
        }
        if self.header.is_empty() {
            return;
        }
        let mut width: Vec<usize> = self.header.iter().map(String::len).collect();
        for r in &self.rows {
            for (w, c) in width.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line =
            |cells: &[String]| cells.iter().zip(&width).map(|(c, w)| format!("{c:<w$}")).collect::<Vec<_>>().join("  ");
        eprintln!("{}", line(&self.header).trim_end());
        eprintln!("{}", width.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  "));
        for r in &self.rows {
            eprintln!("{}", line(r).trim_end());
        }
    }
}
