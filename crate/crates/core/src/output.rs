//! CSV output: `#` metadata lines, a header, then rows.

use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::market::GENERATOR_NAME;

/// Formats like C's `%.12g`, with Rust's exponent notation (`1.5e-7`).
pub fn fmt_g12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    // Round to 12 significant digits first so the exponent is final.
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if !(-4..12).contains(&exp) {
        return format!("{}e{}", trim_zeros(mantissa), exp);
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Metadata block written above the header.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvMeta {
    pub kind: String,
    pub seed: u64,
    /// Extra `key: value` lines.
    pub extra: Vec<(String, String)>,
}

/// Writes metadata, header and rows. The timestamp is the only line that
/// varies between identical runs.
pub fn write_csv<W: Write>(out: W, meta: &CsvMeta, header: &[&str], rows: &[Vec<String>]) -> std::io::Result<()> {
    let mut out = out;
    writeln!(out, "# tool: spectrum-lease {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(out, "# kind: {}", meta.kind)?;
    writeln!(out, "# seed: {}", meta.seed)?;
    writeln!(out, "# generator: {}", GENERATOR_NAME)?;
    for (k, v) in &meta.extra {
        writeln!(out, "# {k}: {v}")?;
    }
    let now = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    writeln!(out, "# timestamp_unix: {now}")?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Drops the timestamp line; what remains is deterministic for a given run.
pub fn strip_timestamp(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with("# timestamp_unix:"))
        .map(|l| format!("{l}\n"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g12_matches_printf() {
        assert_eq!(fmt_g12(2.0), "2");
        assert_eq!(fmt_g12(306.0), "306");
        assert_eq!(fmt_g12(2.610_123_456_789_9), "2.61012345679");
        assert_eq!(fmt_g12(0.1), "0.1");
        assert_eq!(fmt_g12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_g12(-1.5e-7), "-1.5e-7");
        assert_eq!(fmt_g12(1e12), "1e12");
        assert_eq!(fmt_g12(123_456_789_012.0), "123456789012");
        assert_eq!(fmt_g12(0.0001), "0.0001");
        assert_eq!(fmt_g12(9.999_999_999_999_9), "10");
        assert_eq!(fmt_g12(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        let meta = CsvMeta {
            kind: "demo".into(),
            seed: 3,
            extra: vec![],
        };
        write_csv(&mut buf, &meta, &["a", "b"], &[vec!["1".into(), "x,y".into()]]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let body = strip_timestamp(&text);
        assert!(body.starts_with("# tool: spectrum-lease"));
        assert!(body.contains("# seed: 3\n"));
        assert!(body.ends_with("a,b\n1,\"x,y\"\n"));
        assert!(!body.contains("timestamp"));
    }
}
