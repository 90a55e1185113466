//! CSV export of the energy ledger and of audit tables.
//!
//! Ledger columns are [`COLUMN_NAMES`]. `step` is written as an integer and
//! every other value as `{:.16e}`, which is 17 significant digits and therefore
//! round-trips every `f64` exactly.

use std::io::{Read, Write};
use std::path::Path;

use ferro_spectral::diagnostics::{EnergyLedger, COLUMN_NAMES};

pub fn write_ledger(ledger: &EnergyLedger, w: impl Write) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(COLUMN_NAMES)?;
    for row in &ledger.rows {
        let v = row.values();
        let mut rec = Vec::with_capacity(v.len());
        rec.push(row.step.to_string());
        rec.extend(v[1..].iter().map(|x| format!("{x:.16e}")));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn export_ledger_csv(ledger: &EnergyLedger, path: &Path) -> csv::Result<()> {
    write_ledger(ledger, std::fs::File::create(path)?)
}

/// Rows of a ledger CSV, in [`COLUMN_NAMES`] order.
pub fn read_ledger(r: impl Read) -> csv::Result<Vec<[f64; COLUMN_NAMES.len()]>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers()?.clone();
    if header.iter().ne(COLUMN_NAMES.iter().copied()) {
        return Err(csv::Error::from(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            "ledger header does not match the documented columns",
        )));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let mut row = [0.0; COLUMN_NAMES.len()];
        for (slot, field) in row.iter_mut().zip(rec.iter()) {
            *slot = field.parse().map_err(|_| {
                csv::Error::from(std::io::Error::new(std::io::ErrorKind::InvalidData, format!("bad number `{field}`")))
            })?;
        }
        rows.push(row);
    }
    Ok(rows)
}

/// A generic table with a header row, for audit reports.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> csv::Result<()> {
    let mut out = csv::Writer::from_path(path)?;
    out.write_record(header)?;
    for r in rows {
        out.write_record(r)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_ledger_is_header_only() {
        let mut buf = Vec::new();
        write_ledger(&EnergyLedger::new(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert_eq!(text.trim_end().split(',').count(), COLUMN_NAMES.len());
        assert!(read_ledger(text.as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, f64::MIN_POSITIVE, 1.234_567_890_123_456_7e300, -2.5e-310, f64::MAX] {
            let s = format!("{x:.16e}");
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }
}
