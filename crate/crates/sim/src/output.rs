//! CSV tables with a leading `# seed=N` comment line.

use std::io::Write;

use crate::CliError;

/// Header plus rows of already formatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Index of column `name`.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| *h == name)
    }

    pub fn write<W: Write>(&self, seed: u64, mut out: W) -> Result<(), CliError> {
        writeln!(out, "# seed={seed}")?;
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self, seed: u64) -> String {
        let mut buf = Vec::new();
        self.write(seed, &mut buf)
            .expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("cells are UTF-8")
    }
}

/// Shortest round-trip decimal, `.` as separator whatever the locale.
pub fn num(x: f64) -> String {
    format!("{x}")
}
