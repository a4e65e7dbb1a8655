//! Deterministic CSV output: `#` metadata lines, a column header and rows of
//! numbers with 9 significant digits.

use std::path::Path;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `x` in scientific notation with 9 significant digits; `-0` prints as `0`.
pub fn fmt_float(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.8e}")
}

pub struct Table {
    header: Vec<String>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(
        command: &str,
        config: &RunConfig,
        spec_hash: u64,
        columns: &[&'static str],
    ) -> Self {
        let header = vec![
            format!("mslz {VERSION}"),
            format!("command: {command}"),
            format!("spec_hash: {spec_hash:016x}"),
            format!("coupling_model: {}", config.system.coupling_model.label()),
            format!("config_json: {}", config.to_json()),
        ];
        Self {
            header,
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push_floats(&mut self, values: &[f64]) {
        self.rows
            .push(values.iter().map(|&v| fmt_float(v)).collect());
    }

    pub fn push(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for h in &self.header {
            out.push_str("# ");
            out.push_str(h);
            out.push('\n');
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        out.push_str(
            &String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output"),
        );
        out
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        std::fs::write(path, self.render())
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
    }
}

/// Configuration embedded in the `# config_json:` line of an emitted file.
pub fn embedded_config(text: &str) -> CliResult<RunConfig> {
    text.lines()
        .take_while(|l| l.starts_with('#'))
        .find_map(|l| l.strip_prefix("# config_json: "))
        .ok_or_else(|| CliError::Config("no config_json header".into()))
        .and_then(RunConfig::from_json)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_float(1.0), "1.00000000e0");
        assert_eq!(fmt_float(-0.0), "0.00000000e0");
        assert_eq!(fmt_float(5.5070000001), "5.50700000e0");
        assert_eq!(fmt_float(1.3e-4), "1.30000000e-4");
        assert_eq!(fmt_float(1.0 / 3.0).parse::<f64>().unwrap(), 0.333333333);
    }

    #[test]
    fn header_round_trips() {
        let mut c = RunConfig::default();
        c.fock.n_list = vec![4, 2];
        let mut t = Table::new("sweep", &c, 7, &["a", "b"]);
        t.push_floats(&[1.0, 2.0]);
        let text = t.render();
        assert!(text.starts_with("# mslz "));
        assert!(text.ends_with("a,b\n1.00000000e0,2.00000000e0\n"));
        assert_eq!(embedded_config(&text).unwrap(), c);
    }
}
