//! File plumbing shared by the subcommands.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use hhc_core::io::instance_from_json;
use hhc_core::metrics::Point;
use hhc_core::Instance;

use crate::Failure;

pub fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

pub fn read_instance(path: &Path) -> Result<Instance, Failure> {
    instance_from_json(&read_text(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Writes to `path`, or to stdout when `None`.
pub fn write_bytes(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure::Io(format!("stdout: {e}"))),
    }
}

/// In-memory CSV table written in one go.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Self { writer }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).expect("in-memory write");
    }

    pub fn save(self, path: Option<&Path>) -> Result<(), Failure> {
        let bytes = self.writer.into_inner().expect("in-memory flush");
        write_bytes(path, &bytes)
    }
}

pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else if x > 0.0 {
        "inf".into()
    } else if x < 0.0 {
        "-inf".into()
    } else {
        "nan".into()
    }
}

/// Feasible objective vectors of a front CSV. Rows with a `feasible`
/// column set to false are dropped.
pub fn read_front(path: &Path) -> Result<Vec<Point>, Failure> {
    let bad = |m: String| Failure::Usage(format!("{}: {m}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => Failure::Io(format!("{}: {e}", path.display())),
        _ => bad(e.to_string()),
    })?;
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(a), Some(b), Some(c)) = (col("f1"), col("f2"), col("f3")) else {
        return Err(bad("missing f1, f2 or f3 column".into()));
    };
    let feasible = col("feasible");
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        if feasible.is_some_and(|i| &record[i] == "false") {
            continue;
        }
        let mut p = [0.0; 3];
        for (k, i) in [a, b, c].into_iter().enumerate() {
            p[k] = record[i]
                .parse()
                .map_err(|_| bad(format!("not a number: {}", &record[i])))?;
        }
        points.push(p);
    }
    Ok(points)
}
