//! Noise batch and series files.
//!
//! CSV files start with `#` comment lines carrying the run manifest, then a
//! header row, then one row per time index with one column per sequence.
//! Values are written with 17 significant digits so they read back exactly.
//!
//! Binary files hold the magic bytes `MLNB`, a little-endian `u32` version
//! (1), `u64` N and `u64` T, followed by N·T little-endian `f64` values in
//! row-major order (sequence by sequence). Their manifest lives in a sidecar.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use clap::ValueEnum;
use mlnoise::NoiseBatch;

pub const MAGIC: &[u8; 4] = b"MLNB";
pub const VERSION: u32 = 1;
/// Bytes before the first value of a binary file.
pub const BIN_HEADER_LEN: usize = 4 + 4 + 8 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Bin,
}

impl Format {
    pub fn as_str(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Bin => "bin",
        }
    }

    /// Guesses the format from a file extension; anything but `.bin` is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") => Format::Bin,
            _ => Format::Csv,
        }
    }
}

/// An input file that could not be read as a noise batch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MalformedInput(pub String);

impl fmt::Display for MalformedInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "malformed input: {}", self.0)
    }
}

impl std::error::Error for MalformedInput {}

fn bad(msg: impl Into<String>) -> MalformedInput {
    MalformedInput(msg.into())
}

fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a batch as CSV: `header` comment lines, a `t,x0,x1,...` row and
/// one row per time index.
pub fn write_noise_csv<W: Write>(w: &mut W, batch: &NoiseBatch, header: &[String]) -> io::Result<()> {
    for line in header {
        writeln!(w, "{line}")?;
    }
    let mut row = String::from("t");
    for m in 0..batch.n() {
        row.push_str(&format!(",x{m}"));
    }
    writeln!(w, "{row}")?;
    for s in 0..batch.t() {
        row.clear();
        row.push_str(&s.to_string());
        for m in 0..batch.n() {
            row.push(',');
            row.push_str(&fmt_value(batch.row(m)[s]));
        }
        writeln!(w, "{row}")?;
    }
    Ok(())
}

pub fn write_bin_header<W: Write>(w: &mut W, n: usize, t: usize) -> io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(n as u64).to_le_bytes())?;
    w.write_all(&(t as u64).to_le_bytes())
}

/// Appends one sequence to a binary file after its header.
pub fn write_bin_row<W: Write>(w: &mut W, row: &[f64]) -> io::Result<()> {
    let mut bytes = Vec::with_capacity(row.len() * 8);
    for v in row {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&bytes)
}

pub fn write_noise_bin<W: Write>(w: &mut W, batch: &NoiseBatch) -> io::Result<()> {
    write_bin_header(w, batch.n(), batch.t())?;
    for row in batch.rows() {
        write_bin_row(w, row)?;
    }
    Ok(())
}

/// Parses a binary batch, checking the header and the exact payload length.
pub fn parse_noise_bin(bytes: &[u8]) -> Result<NoiseBatch, MalformedInput> {
    if bytes.len() < BIN_HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(bad("missing MLNB header"));
    }
    let word = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(bad(format!("unsupported binary version {version}")));
    }
    let (n, t) = (word(8), word(16));
    let count = n
        .checked_mul(t)
        .and_then(|c| usize::try_from(c).ok())
        .ok_or_else(|| bad("N*T overflows"))?;
    let payload = &bytes[BIN_HEADER_LEN..];
    if count.checked_mul(8) != Some(payload.len()) {
        return Err(bad(format!(
            "header declares {n}x{t} values but the payload holds {} bytes",
            payload.len()
        )));
    }
    let data = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    NoiseBatch::from_data(n as usize, t as usize, data).map_err(|e| bad(e.to_string()))
}

/// Parses a CSV batch as written by [`write_noise_csv`].
pub fn parse_noise_csv(text: &str) -> Result<NoiseBatch, MalformedInput> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
    let (_, header) = lines.next().ok_or_else(|| bad("no header row"))?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    if names.first() != Some(&"t") || names.len() < 2 {
        return Err(bad("header row must read t,x0,..."));
    }
    let n = names.len() - 1;
    let mut columns = Vec::new();
    let mut t = 0usize;
    for (lineno, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != n + 1 {
            return Err(bad(format!(
                "line {}: expected {} fields, found {}",
                lineno + 1,
                n + 1,
                fields.len()
            )));
        }
        if fields[0].parse::<usize>().ok() != Some(t) {
            return Err(bad(format!("line {}: expected time index {t}", lineno + 1)));
        }
        for f in &fields[1..] {
            let v: f64 = f
                .parse()
                .map_err(|_| bad(format!("line {}: cannot parse {f:?}", lineno + 1)))?;
            columns.push(v);
        }
        t += 1;
    }
    if t == 0 {
        return Err(bad("no data rows"));
    }
    // rows of the file are time indices; the batch is stored sequence-major
    let mut data = vec![0.0; n * t];
    for (s, row) in columns.chunks_exact(n).enumerate() {
        for (m, &v) in row.iter().enumerate() {
            data[m * t + s] = v;
        }
    }
    NoiseBatch::from_data(n, t, data).map_err(|e| bad(e.to_string()))
}

/// Reads a batch in either format, telling them apart by the magic bytes.
pub fn read_noise(path: &Path) -> Result<NoiseBatch, MalformedInput> {
    let bytes = fs::read(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
    if bytes.starts_with(MAGIC) {
        parse_noise_bin(&bytes)
    } else {
        let text = std::str::from_utf8(&bytes).map_err(|_| bad("neither MLNB binary nor UTF-8 text"))?;
        parse_noise_csv(text)
    }
}

pub fn write_noise(path: &Path, batch: &NoiseBatch, format: Format, header: &[String]) -> io::Result<()> {
    let mut w = io::BufWriter::new(fs::File::create(path)?);
    match format {
        Format::Csv => write_noise_csv(&mut w, batch, header)?,
        Format::Bin => write_noise_bin(&mut w, batch)?,
    }
    w.flush()
}

/// Writes a two-column series, e.g. `lag,acf`.
pub fn write_series_csv<W: Write>(
    w: &mut W,
    header: &[String],
    columns: (&str, &str),
    xs: &[usize],
    values: &[f64],
) -> io::Result<()> {
    for line in header {
        writeln!(w, "{line}")?;
    }
    writeln!(w, "{},{}", columns.0, columns.1)?;
    for (x, v) in xs.iter().zip(values) {
        writeln!(w, "{x},{}", fmt_value(*v))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn batch() -> NoiseBatch {
        NoiseBatch::from_data(2, 3, vec![0.1, -2.5, 1e-300, 3.0, f64::MAX, -0.0]).unwrap()
    }

    #[test]
    fn csv_layout() {
        let mut out = Vec::new();
        write_noise_csv(&mut out, &batch(), &["# hello".into()]).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# hello");
        assert_eq!(lines[1], "t,x0,x1");
        assert_eq!(lines[2], "0,1.0000000000000001e-1,3.0000000000000000e0");
        assert_eq!(lines.len(), 5);
    }

    #[test]
    fn both_formats_round_trip_bit_exactly() {
        let b = batch();
        let mut csv = Vec::new();
        write_noise_csv(&mut csv, &b, &[]).unwrap();
        let back = parse_noise_csv(std::str::from_utf8(&csv).unwrap()).unwrap();
        let bits = |x: &NoiseBatch| x.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back), bits(&b));
        let mut bin = Vec::new();
        write_noise_bin(&mut bin, &b).unwrap();
        assert_eq!(bin.len(), BIN_HEADER_LEN + 6 * 8);
        assert_eq!(&bin[..4], b"MLNB");
        assert_eq!(bits(&parse_noise_bin(&bin).unwrap()), bits(&b));
    }

    #[test]
    fn malformed_inputs() {
        assert!(parse_noise_csv("").is_err());
        assert!(parse_noise_csv("t,x0\n").is_err());
        assert!(parse_noise_csv("a,b\n0,1\n").is_err());
        assert!(parse_noise_csv("t,x0\n0,1\n2,1\n").is_err());
        assert!(parse_noise_csv("t,x0\n0,abc\n").is_err());
        assert!(parse_noise_csv("t,x0\n0,NaN\n").is_err());
        assert!(parse_noise_csv("t,x0,x1\n0,1\n").is_err());
        let mut bin = Vec::new();
        write_noise_bin(&mut bin, &batch()).unwrap();
        assert!(parse_noise_bin(&bin[..bin.len() - 1]).is_err());
        let mut wrong = bin.clone();
        wrong[4] = 2;
        assert!(parse_noise_bin(&wrong).is_err());
        assert!(parse_noise_bin(b"MLN").is_err());
    }
}
