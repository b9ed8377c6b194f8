//! Calibration-kit and error-term files.
//!
//! Both use the same self-describing sectioned layout: a metadata header
//! followed by three labeled blocks, each embedding Touchstone-style rows, so
//! kind tags and metadata travel with the data.
//!
//! ```text
//! [calkit]
//! name = cryokit
//! temperature = 15mK
//! [standard open]
//! # HZ S RI R 50
//! 4.0e9 1.0 0.0
//! ...
//! [standard short]
//! ...
//! [standard load]
//! ...
//! ```
//!
//! Error-term files replace `[calkit]` with `[error-terms]` and the standard
//! blocks with `[term e00]`, `[term e11]`, `[term e01e10]`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::onecal::{CalKit, CalStandard, OnePortErrorTerms, StandardKind, DEFAULT_CONDITIONING_FLOOR};
use crate::rfnet::ComplexTrace;

use super::touchstone::{parse_touchstone, write_touchstone, TouchstoneDocument};
use super::fmt_g12;

struct Section {
    header: String,
    start_line: usize,
    body: Vec<(usize, String)>,
}

fn split_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if let Some(h) = line.strip_prefix('[') {
            let h = h
                .strip_suffix(']')
                .ok_or_else(|| Error::parse(line_no, "unterminated section header"))?;
            sections.push(Section { header: h.trim().to_string(), start_line: line_no, body: Vec::new() });
        } else if let Some(s) = sections.last_mut() {
            s.body.push((line_no, raw.to_string()));
        } else if !line.is_empty() && !line.starts_with('!') {
            return Err(Error::parse(line_no, "content before first section header"));
        }
    }
    if sections.is_empty() {
        return Err(Error::parse(1, "no sections found"));
    }
    Ok(sections)
}

fn parse_metadata(s: &Section) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (line_no, raw) in &s.body {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('!') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(*line_no, "expected 'key = value'"))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn parse_embedded_trace(s: &Section) -> Result<ComplexTrace> {
    let text: String = s.body.iter().map(|(_, l)| format!("{l}\n")).collect();
    let offset = s.body.first().map(|(n, _)| n - 1).unwrap_or(s.start_line);
    let doc = parse_touchstone(&text).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse { line: line + offset, message },
        other => other,
    })?;
    doc.to_trace()
}

fn render_trace_block(trace: &ComplexTrace) -> String {
    write_touchstone(&TouchstoneDocument::from_trace(trace))
        .expect("trace blocks are non-empty 1-port documents")
}

/// Parse a calibration kit from its text form.
pub fn load_calkit_str(text: &str) -> Result<CalKit> {
    let sections = split_sections(text)?;
    if sections[0].header != "calkit" {
        return Err(Error::parse(sections[0].start_line, "first section must be [calkit]"));
    }
    let mut name = String::new();
    let mut temperature = String::new();
    let mut date = None;
    let mut floor = DEFAULT_CONDITIONING_FLOOR;
    for (k, v) in parse_metadata(&sections[0])? {
        match k.as_str() {
            "name" => name = v,
            "temperature" => temperature = v,
            "date" => date = Some(v),
            "floor" => {
                floor = v.parse().map_err(|_| {
                    Error::parse(sections[0].start_line, format!("bad conditioning floor '{v}'"))
                })?
            }
            other => {
                return Err(Error::parse(
                    sections[0].start_line,
                    format!("unknown calkit key '{other}'"),
                ))
            }
        }
    }

    let mut standards: Vec<CalStandard> = Vec::new();
    for s in &sections[1..] {
        let kind_label = s
            .header
            .strip_prefix("standard ")
            .ok_or_else(|| Error::parse(s.start_line, format!("unexpected section [{}]", s.header)))?
            .trim();
        let kind = StandardKind::from_label(kind_label)
            .ok_or_else(|| Error::parse(s.start_line, format!("unknown standard kind '{kind_label}'")))?;
        standards.push(CalStandard::new(kind, parse_embedded_trace(s)?)?);
    }
    for kind in [StandardKind::Open, StandardKind::Short, StandardKind::Load] {
        if !standards.iter().any(|s| s.kind == kind) {
            return Err(Error::Parameter(format!("{} standard absent", kind.label())));
        }
    }
    if standards.len() != 3 {
        return Err(Error::Parameter(format!(
            "expected exactly three standards, found {}",
            standards.len()
        )));
    }
    let mut kit = CalKit {
        standards: [standards[0].clone(), standards[1].clone(), standards[2].clone()],
        name,
        temperature_label: temperature,
        date,
        conditioning_floor: floor,
    };
    kit.standards.sort_by_key(|s| match s.kind {
        StandardKind::Open => 0,
        StandardKind::Short => 1,
        StandardKind::Load => 2,
        StandardKind::Data => 3,
    });
    kit.validate()?;
    Ok(kit)
}

/// Render a calibration kit to its text form.
pub fn write_calkit(kit: &CalKit) -> String {
    let mut out = String::from("[calkit]\n");
    out.push_str(&format!("name = {}\n", kit.name));
    if !kit.temperature_label.is_empty() {
        out.push_str(&format!("temperature = {}\n", kit.temperature_label));
    }
    if let Some(d) = &kit.date {
        out.push_str(&format!("date = {d}\n"));
    }
    if kit.conditioning_floor != DEFAULT_CONDITIONING_FLOOR {
        out.push_str(&format!("floor = {}\n", kit.conditioning_floor));
    }
    for s in &kit.standards {
        out.push_str(&format!("[standard {}]\n", s.kind.label()));
        out.push_str(&render_trace_block(&s.known_gamma));
    }
    out
}

pub fn load_calkit(path: impl AsRef<Path>) -> Result<CalKit> {
    load_calkit_str(&std::fs::read_to_string(path)?)
}

pub fn save_calkit(kit: &CalKit, path: impl AsRef<Path>) -> Result<()> {
    Ok(std::fs::write(path, write_calkit(kit))?)
}

const TERM_LABELS: [&str; 3] = ["e00", "e11", "e01e10"];

/// Parse error terms from their text form.
pub fn load_error_terms_str(text: &str) -> Result<OnePortErrorTerms> {
    let sections = split_sections(text)?;
    if sections[0].header != "error-terms" {
        return Err(Error::parse(sections[0].start_line, "first section must be [error-terms]"));
    }
    for (k, _) in parse_metadata(&sections[0])? {
        if !matches!(k.as_str(), "name" | "date") {
            return Err(Error::parse(
                sections[0].start_line,
                format!("unknown error-terms key '{k}'"),
            ));
        }
    }
    let mut traces: [Option<ComplexTrace>; 3] = [None, None, None];
    for s in &sections[1..] {
        let label = s
            .header
            .strip_prefix("term ")
            .ok_or_else(|| Error::parse(s.start_line, format!("unexpected section [{}]", s.header)))?
            .trim();
        let slot = TERM_LABELS
            .iter()
            .position(|&t| t == label)
            .ok_or_else(|| Error::parse(s.start_line, format!("unknown term '{label}'")))?;
        traces[slot] = Some(parse_embedded_trace(s)?);
    }
    let [e00, e11, e01e10] = traces;
    let (e00, e11, e01e10) = match (e00, e11, e01e10) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(Error::Parameter("error-terms file must carry e00, e11 and e01e10".into())),
    };
    if e11.grid() != e00.grid() || e01e10.grid() != e00.grid() {
        return Err(Error::Parameter("error-term blocks use different grids".into()));
    }
    OnePortErrorTerms::new(
        e00.grid().clone(),
        e00.values().to_vec(),
        e11.values().to_vec(),
        e01e10.values().to_vec(),
    )
}

/// Render error terms to their text form. `date` lands in the metadata header
/// when given (data rows never carry timestamps).
pub fn write_error_terms(terms: &OnePortErrorTerms, name: &str, date: Option<&str>) -> String {
    let mut out = String::from("[error-terms]\n");
    out.push_str(&format!("name = {name}\n"));
    if let Some(d) = date {
        out.push_str(&format!("date = {d}\n"));
    }
    let grid = terms.grid();
    for (label, values) in TERM_LABELS.iter().zip([terms.e00(), terms.e11(), terms.e01e10()]) {
        out.push_str(&format!("[term {label}]\n# HZ S RI R 50\n"));
        for (f, v) in grid.points().iter().zip(values) {
            out.push_str(&format!("{} {} {}\n", fmt_g12(*f), fmt_g12(v.re), fmt_g12(v.im)));
        }
    }
    out
}

pub fn load_error_terms(path: impl AsRef<Path>) -> Result<OnePortErrorTerms> {
    load_error_terms_str(&std::fs::read_to_string(path)?)
}

pub fn save_error_terms(
    terms: &OnePortErrorTerms,
    name: &str,
    date: Option<&str>,
    path: impl AsRef<Path>,
) -> Result<()> {
    Ok(std::fs::write(path, write_error_terms(terms, name, date))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rfnet::FrequencyGrid;
    use num_complex::Complex64;

    fn ideal_kit_text() -> String {
        let grid = FrequencyGrid::linspace(4e9, 8e9, 5).unwrap();
        let mut kit = CalKit::ideal(grid).unwrap();
        kit.name = "flat".into();
        kit.temperature_label = "295K".into();
        write_calkit(&kit)
    }

    #[test]
    fn kit_round_trip() {
        let text = ideal_kit_text();
        let kit = load_calkit_str(&text).unwrap();
        assert_eq!(kit.name, "flat");
        assert_eq!(kit.temperature_label, "295K");
        assert_eq!(kit.standards[0].kind, StandardKind::Open);
        assert_eq!(kit.standards[0].known_gamma.values()[0], Complex64::ONE);
        // textual fixpoint
        assert_eq!(write_calkit(&kit), text);
    }

    #[test]
    fn kit_missing_load_is_reported() {
        let text = ideal_kit_text();
        let truncated: String = text
            .lines()
            .take_while(|l| !l.starts_with("[standard load]"))
            .map(|l| format!("{l}\n"))
            .collect();
        match load_calkit_str(&truncated) {
            Err(Error::Parameter(msg)) => assert!(msg.contains("load standard absent"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn kit_with_coincident_standards_fails_conditioning() {
        // turn the short definition into a copy of the open
        let text = ideal_kit_text().replace("-1.00000000000e0", "1.00000000000e0");
        assert!(matches!(load_calkit_str(&text), Err(Error::Conditioning(_))));
    }

    #[test]
    fn kit_grid_mismatch_is_rejected() {
        let grid_a = FrequencyGrid::linspace(4e9, 8e9, 5).unwrap();
        let grid_b = FrequencyGrid::linspace(4e9, 8e9, 7).unwrap();
        let mut text = String::from("[calkit]\nname = x\n");
        for (kind, grid, v) in [
            ("open", &grid_a, "1e0 0e0"),
            ("short", &grid_a, "-1e0 0e0"),
            ("load", &grid_b, "0e0 0e0"),
        ] {
            text.push_str(&format!("[standard {kind}]\n# HZ S RI R 50\n"));
            for f in grid.points() {
                text.push_str(&format!("{} {v}\n", fmt_g12(*f)));
            }
        }
        assert!(matches!(load_calkit_str(&text), Err(Error::Parameter(_))));
    }

    #[test]
    fn embedded_parse_errors_carry_file_line_numbers() {
        let text = ideal_kit_text();
        // corrupt one data value in the short block (line 10: [calkit], name,
        // temperature, [standard open], option, 5 rows -> short option line at 10+)
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let idx = lines.iter().position(|l| l.starts_with("[standard short]")).unwrap() + 2;
        lines[idx] = "not a number".into();
        let err = load_calkit_str(&lines.join("\n")).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, idx + 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn error_terms_round_trip() {
        let grid = FrequencyGrid::linspace(4e9, 8e9, 4).unwrap();
        let terms = OnePortErrorTerms::new(
            grid.clone(),
            vec![Complex64::new(0.1, -0.2); 4],
            vec![Complex64::new(0.0, 0.3); 4],
            vec![Complex64::new(0.95, 0.05); 4],
        )
        .unwrap();
        let text = write_error_terms(&terms, "bench", Some("2026-01-01"));
        let back = load_error_terms_str(&text).unwrap();
        for (a, b) in back.grid().points().iter().zip(grid.points()) {
            assert!((a - b).abs() <= 1e-12 * b);
        }
        for i in 0..4 {
            assert!((back.e00()[i] - terms.e00()[i]).norm() < 1e-12);
            assert!((back.e11()[i] - terms.e11()[i]).norm() < 1e-12);
            assert!((back.e01e10()[i] - terms.e01e10()[i]).norm() < 1e-12);
        }
        // no-date output is byte-stable
        let a = write_error_terms(&terms, "bench", None);
        let b = write_error_terms(&terms, "bench", None);
        assert_eq!(a, b);
        assert!(!a.contains("date"));
    }

    #[test]
    fn error_terms_missing_block_fails() {
        let grid = FrequencyGrid::linspace(4e9, 8e9, 3).unwrap();
        let terms = OnePortErrorTerms::identity(grid);
        let text = write_error_terms(&terms, "x", None);
        let truncated: String = text
            .lines()
            .take_while(|l| !l.starts_with("[term e01e10]"))
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(matches!(load_error_terms_str(&truncated), Err(Error::Parameter(_))));
    }
}
