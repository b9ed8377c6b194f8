//! Power-sweep manifests: a CSV that pairs applied powers with traces, either
//! referencing per-power Touchstone files or carrying inline points.
//!
//! ```text
//! power_dbm,file
//! -60,trace_m60.s1p
//! -70,trace_m70.s1p
//! ```
//!
//! or, inline (frequency/re/im triplets after the power):
//!
//! ```text
//! power_dbm,points
//! -60,4.0e9,0.5,0.1,4.1e9,0.4,0.2
//! ```

use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rfnet::{ComplexTrace, FrequencyGrid};

use super::touchstone::parse_touchstone;

/// One entry of a power sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTrace {
    pub power_dbm: f64,
    pub trace: ComplexTrace,
}

/// Load a manifest from disk; file references resolve relative to it.
pub fn load_power_sweep(path: impl AsRef<Path>) -> Result<Vec<PowerTrace>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    load_power_sweep_str(&text, path.parent())
}

/// Parse manifest text. `base_dir` anchors relative file references.
pub fn load_power_sweep_str(text: &str, base_dir: Option<&Path>) -> Result<Vec<PowerTrace>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (header_line, header) = lines.next().ok_or_else(|| Error::parse(1, "empty manifest"))?;
    let by_file = match header {
        "power_dbm,file" => true,
        "power_dbm,points" => false,
        other => {
            return Err(Error::parse(
                header_line,
                format!("unknown header '{other}'; expected 'power_dbm,file' or 'power_dbm,points'"),
            ))
        }
    };

    let mut out: Vec<PowerTrace> = Vec::new();
    for (line_no, line) in lines {
        let mut cols = line.split(',');
        let p: f64 = cols
            .next()
            .unwrap()
            .trim()
            .parse()
            .map_err(|_| Error::parse(line_no, "bad power value"))?;
        if out.iter().any(|e| e.power_dbm == p) {
            return Err(Error::parse(line_no, format!("duplicate power {p} dBm")));
        }
        let trace = if by_file {
            let rel = cols
                .next()
                .ok_or_else(|| Error::parse(line_no, "missing file column"))?
                .trim();
            if cols.next().is_some() {
                return Err(Error::parse(line_no, "extra columns after file name"));
            }
            let full = match base_dir {
                Some(d) => d.join(rel),
                None => rel.into(),
            };
            let text = std::fs::read_to_string(&full).map_err(|e| {
                Error::parse(line_no, format!("cannot read '{}': {e}", full.display()))
            })?;
            parse_touchstone(&text)?.to_trace()?
        } else {
            let rest: Vec<&str> = cols.map(str::trim).collect();
            if rest.is_empty() || rest.len() % 3 != 0 {
                return Err(Error::parse(
                    line_no,
                    format!("expected frequency/re/im triplets, got {} values", rest.len()),
                ));
            }
            let mut freqs = Vec::with_capacity(rest.len() / 3);
            let mut values = Vec::with_capacity(rest.len() / 3);
            for chunk in rest.chunks(3) {
                let f: f64 =
                    chunk[0].parse().map_err(|_| Error::parse(line_no, "bad frequency"))?;
                let re: f64 = chunk[1].parse().map_err(|_| Error::parse(line_no, "bad value"))?;
                let im: f64 = chunk[2].parse().map_err(|_| Error::parse(line_no, "bad value"))?;
                freqs.push(f);
                values.push(Complex64::new(re, im));
            }
            ComplexTrace::new(FrequencyGrid::new(freqs)?, values)?
        };
        out.push(PowerTrace { power_dbm: p, trace });
    }
    if out.is_empty() {
        return Err(Error::parse(header_line, "manifest has no entries"));
    }
    out.sort_by(|a, b| b.power_dbm.partial_cmp(&a.power_dbm).unwrap());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ioformats::touchstone::{write_touchstone, TouchstoneDocument};

    #[test]
    fn inline_points_parse_and_sort_descending() {
        let text = "power_dbm,points\n-70,4.0e9,0.5,0.1,4.1e9,0.4,0.2\n-60,4.0e9,0.6,0.0,4.1e9,0.5,0.1\n";
        let sweep = load_power_sweep_str(text, None).unwrap();
        assert_eq!(sweep.len(), 2);
        assert_eq!(sweep[0].power_dbm, -60.0);
        assert_eq!(sweep[1].power_dbm, -70.0);
        assert_eq!(sweep[0].trace.len(), 2);
    }

    #[test]
    fn file_references_load_traces() {
        let dir = std::env::temp_dir().join(format!("sweep_test_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let grid = FrequencyGrid::linspace(4e9, 5e9, 3).unwrap();
        for (name, scale) in [("a.s1p", 0.5), ("b.s1p", 0.25)] {
            let tr = ComplexTrace::new(
                grid.clone(),
                vec![Complex64::new(scale, 0.0); 3],
            )
            .unwrap();
            let text = write_touchstone(&TouchstoneDocument::from_trace(&tr)).unwrap();
            std::fs::write(dir.join(name), text).unwrap();
        }
        let manifest = "power_dbm,file\n-60,a.s1p\n-65,b.s1p\n";
        let sweep = load_power_sweep_str(manifest, Some(&dir)).unwrap();
        assert_eq!(sweep.len(), 2);
        assert_eq!(sweep[0].trace.values()[0].re, 0.5);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn duplicate_power_rejected() {
        let text = "power_dbm,points\n-60,4e9,0.1,0.0\n-60,4e9,0.2,0.0\n";
        assert!(matches!(
            load_power_sweep_str(text, None),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn missing_file_and_empty_manifest_rejected() {
        assert!(load_power_sweep_str("", None).is_err());
        assert!(load_power_sweep_str("power_dbm,file\n", None).is_err());
        assert!(load_power_sweep_str("power_dbm,file\n-60,/does/not/exist.s1p\n", None).is_err());
    }
}
