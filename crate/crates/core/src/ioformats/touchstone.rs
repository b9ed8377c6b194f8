//! Touchstone v1 parsing and writing (1-port and 2-port, RI/MA/DB formats).
//!
//! Values are normalized to complex on parse; frequencies keep the file's
//! unit for faithful round trips and are exposed in Hz through accessors.
//! Output is always RI with 12-significant-digit scientific notation.

use num_complex::Complex64;

use super::fmt_g12;
use crate::error::{Error, Result};
use crate::rfnet::{ComplexTrace, FrequencyGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrequencyUnit {
    Hz,
    KHz,
    MHz,
    GHz,
}

impl FrequencyUnit {
    pub fn scale(&self) -> f64 {
        match self {
            FrequencyUnit::Hz => 1.0,
            FrequencyUnit::KHz => 1e3,
            FrequencyUnit::MHz => 1e6,
            FrequencyUnit::GHz => 1e9,
        }
    }

    fn token(&self) -> &'static str {
        match self {
            FrequencyUnit::Hz => "HZ",
            FrequencyUnit::KHz => "KHZ",
            FrequencyUnit::MHz => "MHZ",
            FrequencyUnit::GHz => "GHZ",
        }
    }

    fn from_token(t: &str) -> Option<Self> {
        match t.to_ascii_uppercase().as_str() {
            "HZ" => Some(FrequencyUnit::Hz),
            "KHZ" => Some(FrequencyUnit::KHz),
            "MHZ" => Some(FrequencyUnit::MHz),
            "GHZ" => Some(FrequencyUnit::GHz),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueFormat {
    /// Real/imaginary pairs.
    Ri,
    /// Magnitude and angle in degrees.
    Ma,
    /// dB magnitude and angle in degrees.
    Db,
}

impl ValueFormat {
    fn from_token(t: &str) -> Option<Self> {
        match t.to_ascii_uppercase().as_str() {
            "RI" => Some(ValueFormat::Ri),
            "MA" => Some(ValueFormat::Ma),
            "DB" => Some(ValueFormat::Db),
            _ => None,
        }
    }
}

/// A parsed Touchstone file. `data[k]` holds the complex parameters of row
/// `k` in file order (1-port: `[s11]`; 2-port: `[s11, s21, s12, s22]`).
#[derive(Debug, Clone, PartialEq)]
pub struct TouchstoneDocument {
    pub unit: FrequencyUnit,
    /// Format the values were written in (output is always RI).
    pub format: ValueFormat,
    /// Reference resistance from the option line, Ohms.
    pub resistance: f64,
    /// Leading comment lines, without the `!`.
    pub comments: Vec<String>,
    /// Frequencies in the file's unit.
    pub frequencies: Vec<f64>,
    pub data: Vec<Vec<Complex64>>,
    pub n_ports: usize,
}

impl TouchstoneDocument {
    /// Frequencies normalized to Hz.
    pub fn frequencies_hz(&self) -> Vec<f64> {
        let s = self.unit.scale();
        self.frequencies.iter().map(|f| f * s).collect()
    }

    pub fn grid(&self) -> Result<FrequencyGrid> {
        FrequencyGrid::new(self.frequencies_hz())
    }

    /// The single parameter of a 1-port document as a trace.
    pub fn to_trace(&self) -> Result<ComplexTrace> {
        if self.n_ports != 1 {
            return Err(Error::Parameter(format!(
                "expected a 1-port document, found {} ports",
                self.n_ports
            )));
        }
        ComplexTrace::new(self.grid()?, self.data.iter().map(|row| row[0]).collect())
    }

    /// Wrap a trace as a 1-port document (Hz, RI, 50 Ohm).
    pub fn from_trace(trace: &ComplexTrace) -> Self {
        Self {
            unit: FrequencyUnit::Hz,
            format: ValueFormat::Ri,
            resistance: 50.0,
            comments: Vec::new(),
            frequencies: trace.grid().points().to_vec(),
            data: trace.values().iter().map(|&v| vec![v]).collect(),
            n_ports: 1,
        }
    }
}

fn parse_f64(tok: &str, line_no: usize, what: &str) -> Result<f64> {
    tok.parse::<f64>().map_err(|_| Error::parse(line_no, format!("bad {what} '{tok}'")))
}

fn decode(format: ValueFormat, a: f64, b: f64) -> Complex64 {
    match format {
        ValueFormat::Ri => Complex64::new(a, b),
        ValueFormat::Ma => Complex64::from_polar(a, b.to_radians()),
        ValueFormat::Db => Complex64::from_polar(10f64.powf(a / 20.0), b.to_radians()),
    }
}

/// Parse Touchstone v1 text. Option-line defaults are `GHZ S MA R 50`; data
/// rows must carry 3 columns (1-port) or 9 columns (2-port, order
/// S11 S21 S12 S22), one row per frequency.
pub fn parse_touchstone(text: &str) -> Result<TouchstoneDocument> {
    let mut comments = Vec::new();
    let mut option: Option<(FrequencyUnit, ValueFormat, f64, usize)> = None;
    let mut frequencies: Vec<f64> = Vec::new();
    let mut data: Vec<Vec<Complex64>> = Vec::new();
    let mut n_ports = 0usize;
    let mut last_line = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        // '!' starts a comment anywhere in the line
        let (content, comment) = match raw.find('!') {
            Some(p) => (&raw[..p], Some(&raw[p + 1..])),
            None => (raw, None),
        };
        if content.trim().is_empty() {
            if let Some(c) = comment {
                if data.is_empty() && option.is_none() {
                    comments.push(c.trim().to_string());
                }
            }
            continue;
        }
        let line = content.trim();

        if let Some(rest) = line.strip_prefix('#') {
            if option.is_some() {
                return Err(Error::parse(line_no, "second option line"));
            }
            let mut unit = FrequencyUnit::GHz;
            let mut format = ValueFormat::Ma;
            let mut resistance = 50.0;
            let mut toks = rest.split_whitespace().peekable();
            while let Some(t) = toks.next() {
                if let Some(u) = FrequencyUnit::from_token(t) {
                    unit = u;
                } else if let Some(fmt) = ValueFormat::from_token(t) {
                    format = fmt;
                } else if t.eq_ignore_ascii_case("S") {
                    // parameter type: only S-parameters are supported
                } else if t.eq_ignore_ascii_case("R") {
                    let val = toks
                        .next()
                        .ok_or_else(|| Error::parse(line_no, "R token without a resistance"))?;
                    resistance = parse_f64(val, line_no, "reference resistance")?;
                    if !resistance.is_finite() || resistance <= 0.0 {
                        return Err(Error::parse(
                            line_no,
                            format!("non-positive reference resistance {resistance}"),
                        ));
                    }
                } else if ["Y", "Z", "G", "H"].iter().any(|p| t.eq_ignore_ascii_case(p)) {
                    return Err(Error::parse(line_no, format!("unsupported parameter type '{t}'")));
                } else {
                    return Err(Error::parse(line_no, format!("unknown option token '{t}'")));
                }
            }
            option = Some((unit, format, resistance, line_no));
            continue;
        }

        // data row
        let (unit, format, ..) =
            option.ok_or_else(|| Error::parse(line_no, "data before option line"))?;
        let cols: Vec<&str> = line.split_whitespace().collect();
        if n_ports == 0 {
            n_ports = match cols.len() {
                3 => 1,
                9 => 2,
                n => {
                    return Err(Error::parse(
                        line_no,
                        format!("row has {n} columns; expected 3 (1-port) or 9 (2-port)"),
                    ))
                }
            };
        }
        let expect = 1 + 2 * n_ports * n_ports;
        if cols.len() != expect {
            return Err(Error::parse(
                line_no,
                format!(
                    "row has {} columns; expected {expect} for a {n_ports}-port file",
                    cols.len()
                ),
            ));
        }
        let f = parse_f64(cols[0], line_no, "frequency")?;
        if let Some(&prev) = frequencies.last() {
            if f * unit.scale() <= prev * unit.scale() {
                return Err(Error::parse(
                    line_no,
                    format!("frequency {f} not strictly increasing"),
                ));
            }
        }
        let mut row = Vec::with_capacity(n_ports * n_ports);
        for k in 0..(n_ports * n_ports) {
            let a = parse_f64(cols[1 + 2 * k], line_no, "value")?;
            let b = parse_f64(cols[2 + 2 * k], line_no, "value")?;
            row.push(decode(format, a, b));
        }
        frequencies.push(f);
        data.push(row);
    }

    let (unit, format, resistance, _) =
        option.ok_or_else(|| Error::parse(last_line.max(1), "missing option line"))?;
    if data.is_empty() {
        return Err(Error::parse(last_line.max(1), "no data rows"));
    }
    Ok(TouchstoneDocument { unit, format, resistance, comments, frequencies, data, n_ports })
}

/// Render a document as Touchstone v1 text. Values are always written RI.
pub fn write_touchstone(doc: &TouchstoneDocument) -> Result<String> {
    if doc.data.is_empty() {
        return Err(Error::Parameter("document has no data rows".into()));
    }
    if !(doc.n_ports == 1 || doc.n_ports == 2) {
        return Err(Error::Parameter(format!(
            "{}-port documents are not supported",
            doc.n_ports
        )));
    }
    if doc.data.len() != doc.frequencies.len() {
        return Err(Error::Parameter("row count does not match frequency count".into()));
    }
    let mut out = String::new();
    for c in &doc.comments {
        out.push('!');
        if !c.is_empty() {
            out.push(' ');
            out.push_str(c);
        }
        out.push('\n');
    }
    out.push_str(&format!("# {} S RI R {}\n", doc.unit.token(), doc.resistance));
    for (f, row) in doc.frequencies.iter().zip(&doc.data) {
        if row.len() != doc.n_ports * doc.n_ports {
            return Err(Error::Parameter("row arity does not match port count".into()));
        }
        out.push_str(&fmt_g12(*f));
        for v in row {
            out.push(' ');
            out.push_str(&fmt_g12(v.re));
            out.push(' ');
            out.push_str(&fmt_g12(v.im));
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ri_row() {
        let doc = parse_touchstone("# GHz S RI R 50\n6.0 0.5 -0.5\n").unwrap();
        assert_eq!(doc.n_ports, 1);
        assert_eq!(doc.frequencies_hz(), vec![6e9]);
        assert_eq!(doc.data[0][0], Complex64::new(0.5, -0.5));
        assert_eq!(doc.resistance, 50.0);
    }

    #[test]
    fn parses_ma_with_unit_conversion() {
        let doc = parse_touchstone("# MHz S MA R 50\n6000 1.0 90\n").unwrap();
        assert_eq!(doc.frequencies_hz(), vec![6e9]);
        let v = doc.data[0][0];
        assert!((v - Complex64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn parses_db_rows() {
        let doc = parse_touchstone("# HZ S DB R 50\n1.0e9 -20 0\n2.0e9 0 180\n").unwrap();
        assert!((doc.data[0][0].re - 0.1).abs() < 1e-12);
        assert!((doc.data[1][0].re + 1.0).abs() < 1e-12);
    }

    #[test]
    fn same_data_in_ghz_and_hz_parse_identically() {
        let a = parse_touchstone("# GHz S RI R 50\n4.5 0.1 0.2\n5.5 0.3 0.4\n").unwrap();
        let b = parse_touchstone("# HZ S RI R 50\n4.5e9 0.1 0.2\n5.5e9 0.3 0.4\n").unwrap();
        assert_eq!(a.frequencies_hz(), b.frequencies_hz());
        assert_eq!(a.data, b.data);
    }

    #[test]
    fn rejects_bad_arity_with_line_number() {
        let err = parse_touchstone("# GHz S RI R 50\n6.0 0.5 -0.5\n6.1 0.5\n").unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("columns"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_non_monotonic_frequency() {
        let err = parse_touchstone("# GHz S RI R 50\n6.0 0.1 0.0\n5.9 0.1 0.0\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_token_and_param_type() {
        assert!(matches!(
            parse_touchstone("# GHz S RI R 50 XX\n6.0 0.1 0.0\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_touchstone("# GHz Y RI R 50\n6.0 0.1 0.0\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn rejects_empty_and_missing_option() {
        assert!(parse_touchstone("# GHz S RI R 50\n").is_err());
        assert!(parse_touchstone("6.0 0.1 0.0\n").is_err());
        assert!(parse_touchstone("").is_err());
    }

    #[test]
    fn two_port_rows_parse_in_standard_order() {
        let doc =
            parse_touchstone("# HZ S RI R 50\n1e9 0.1 0.0 0.9 0.0 0.8 0.0 0.2 0.0\n").unwrap();
        assert_eq!(doc.n_ports, 2);
        assert_eq!(doc.data[0][1], Complex64::new(0.9, 0.0)); // s21
        assert_eq!(doc.data[0][2], Complex64::new(0.8, 0.0)); // s12
    }

    #[test]
    fn comments_survive_round_trip() {
        let doc = parse_touchstone("! measured at 15 mK\n# HZ S RI R 50\n1e9 0.1 0.2\n").unwrap();
        assert_eq!(doc.comments, vec!["measured at 15 mK".to_string()]);
        let text = write_touchstone(&doc).unwrap();
        assert!(text.starts_with("! measured at 15 mK\n"));
        let doc2 = parse_touchstone(&text).unwrap();
        assert_eq!(doc2.comments, doc.comments);
    }

    #[test]
    fn write_parse_write_is_a_fixpoint() {
        let doc = parse_touchstone("# MHz S MA R 50\n6000 0.923 45.5\n6100 0.8 -12.25\n").unwrap();
        let t1 = write_touchstone(&doc).unwrap();
        let doc2 = parse_touchstone(&t1).unwrap();
        let t2 = write_touchstone(&doc2).unwrap();
        assert_eq!(t1, t2);
        // values identical within 1e-12 relative
        for (a, b) in doc.data.iter().flatten().zip(doc2.data.iter().flatten()) {
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn writing_empty_document_fails() {
        let doc = TouchstoneDocument {
            unit: FrequencyUnit::Hz,
            format: ValueFormat::Ri,
            resistance: 50.0,
            comments: vec![],
            frequencies: vec![],
            data: vec![],
            n_ports: 1,
        };
        assert!(write_touchstone(&doc).is_err());
    }

    #[test]
    fn trace_round_trip() {
        let grid = FrequencyGrid::linspace(4e9, 5e9, 7).unwrap();
        let trace = ComplexTrace::new(
            grid,
            (0..7).map(|i| Complex64::new(0.1 * i as f64, -0.05 * i as f64)).collect(),
        )
        .unwrap();
        let doc = TouchstoneDocument::from_trace(&trace);
        let text = write_touchstone(&doc).unwrap();
        let back = parse_touchstone(&text).unwrap().to_trace().unwrap();
        for ((fa, va), (fb, vb)) in trace.iter().zip(back.iter()) {
            assert!((fa - fb).abs() <= 1e-12 * fa);
            assert!((va - vb).norm() <= 1e-12);
        }
    }
}
