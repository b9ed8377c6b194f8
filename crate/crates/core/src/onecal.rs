//! One-port error-adapter calibration from short-open-load standards.
//!
//! The adapter maps an actual reflection `Γa` to the measured `S11m` through
//! directivity `e00`, source match `e11` and reflection tracking `e01e10`:
//! `S11m = e00 + e01e10 Γa / (1 − e11 Γa)`. Three known standards per
//! frequency point determine all three terms.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rfnet::{ComplexTrace, FrequencyGrid};

/// Floor used when reporting the magnitude of an exact zero in dB.
pub const DB_FLOOR: f64 = -200.0;

/// Default minimum pairwise separation between standard definitions.
pub const DEFAULT_CONDITIONING_FLOOR: f64 = 0.1;

/// Per-frequency error-adapter terms.
#[derive(Debug, Clone, PartialEq)]
pub struct OnePortErrorTerms {
    grid: FrequencyGrid,
    e00: Vec<Complex64>,
    e11: Vec<Complex64>,
    e01e10: Vec<Complex64>,
    /// Max absolute residual of the solve per frequency; empty when the terms
    /// were constructed directly (e.g. loaded from a file).
    solve_residuals: Vec<f64>,
}

impl OnePortErrorTerms {
    pub fn new(
        grid: FrequencyGrid,
        e00: Vec<Complex64>,
        e11: Vec<Complex64>,
        e01e10: Vec<Complex64>,
    ) -> Result<Self> {
        let n = grid.len();
        if e00.len() != n || e11.len() != n || e01e10.len() != n {
            return Err(Error::Parameter("error-term vectors do not match grid length".into()));
        }
        if let Some(i) = e01e10.iter().position(|v| v.norm() == 0.0) {
            return Err(Error::Parameter(format!(
                "reflection tracking vanishes at frequency index {i}; adapter is degenerate"
            )));
        }
        Ok(Self { grid, e00, e11, e01e10, solve_residuals: Vec::new() })
    }

    /// Identity adapter (no directivity, no source match, unit tracking).
    pub fn identity(grid: FrequencyGrid) -> Self {
        let n = grid.len();
        Self {
            grid,
            e00: vec![Complex64::ZERO; n],
            e11: vec![Complex64::ZERO; n],
            e01e10: vec![Complex64::ONE; n],
            solve_residuals: Vec::new(),
        }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn e00(&self) -> &[Complex64] {
        &self.e00
    }

    pub fn e11(&self) -> &[Complex64] {
        &self.e11
    }

    pub fn e01e10(&self) -> &[Complex64] {
        &self.e01e10
    }

    pub fn solve_residuals(&self) -> &[f64] {
        &self.solve_residuals
    }
}

/// The role a calibration standard plays in the kit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StandardKind {
    Open,
    Short,
    Load,
    /// A generic measured one-port definition.
    Data,
}

impl StandardKind {
    pub fn label(&self) -> &'static str {
        match self {
            StandardKind::Open => "open",
            StandardKind::Short => "short",
            StandardKind::Load => "load",
            StandardKind::Data => "data",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "open" => Some(StandardKind::Open),
            "short" => Some(StandardKind::Short),
            "load" => Some(StandardKind::Load),
            "data" => Some(StandardKind::Data),
            _ => None,
        }
    }
}

/// A data-based calibration standard: its known reflection versus frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct CalStandard {
    pub kind: StandardKind,
    pub known_gamma: ComplexTrace,
}

impl CalStandard {
    pub fn new(kind: StandardKind, known_gamma: ComplexTrace) -> Result<Self> {
        if let Some((f, v)) = known_gamma.iter().find(|(_, v)| v.norm() > 1.0 + 1e-6) {
            return Err(Error::Parameter(format!(
                "standard '{}' has |gamma| = {} > 1 at {f} Hz",
                kind.label(),
                v.norm()
            )));
        }
        Ok(Self { kind, known_gamma })
    }

    /// Ideal flat standard over `grid`: open = +1, short = −1, load = 0.
    pub fn ideal(kind: StandardKind, grid: FrequencyGrid) -> Result<Self> {
        let value = match kind {
            StandardKind::Open => Complex64::ONE,
            StandardKind::Short => -Complex64::ONE,
            StandardKind::Load => Complex64::ZERO,
            StandardKind::Data => {
                return Err(Error::Parameter("no ideal definition for a data standard".into()))
            }
        };
        let n = grid.len();
        Ok(Self { kind, known_gamma: ComplexTrace::new(grid, vec![value; n])? })
    }
}

/// Three distinct standards plus kit metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct CalKit {
    pub standards: [CalStandard; 3],
    pub name: String,
    pub temperature_label: String,
    pub date: Option<String>,
    pub conditioning_floor: f64,
}

impl CalKit {
    pub fn new(standards: [CalStandard; 3], name: impl Into<String>) -> Result<Self> {
        let kit = Self {
            standards,
            name: name.into(),
            temperature_label: String::new(),
            date: None,
            conditioning_floor: DEFAULT_CONDITIONING_FLOOR,
        };
        kit.validate()?;
        Ok(kit)
    }

    /// Ideal open/short/load kit over `grid`.
    pub fn ideal(grid: FrequencyGrid) -> Result<Self> {
        Self::new(
            [
                CalStandard::ideal(StandardKind::Open, grid.clone())?,
                CalStandard::ideal(StandardKind::Short, grid.clone())?,
                CalStandard::ideal(StandardKind::Load, grid)?,
            ],
            "ideal",
        )
    }

    pub fn validate(&self) -> Result<()> {
        let kinds: Vec<_> = self.standards.iter().map(|s| s.kind).collect();
        if kinds[0] == kinds[1] || kinds[0] == kinds[2] || kinds[1] == kinds[2] {
            return Err(Error::Parameter("calibration kit has duplicate standard kinds".into()));
        }
        let g0 = self.standards[0].known_gamma.grid();
        for s in &self.standards[1..] {
            if s.known_gamma.grid() != g0 {
                return Err(Error::Parameter("calibration kit standards use different grids".into()));
            }
        }
        self.check_separation(self.conditioning_floor)
    }

    /// Pairwise separation of the standard definitions at every frequency.
    pub fn check_separation(&self, floor: f64) -> Result<()> {
        for (pt, f) in self.standards[0].known_gamma.grid().points().iter().enumerate() {
            for i in 0..3 {
                for j in (i + 1)..3 {
                    let gi = self.standards[i].known_gamma.values()[pt];
                    let gj = self.standards[j].known_gamma.values()[pt];
                    let sep = (gi - gj).norm();
                    if sep < floor {
                        return Err(Error::Conditioning(format!(
                            "standards '{}' and '{}' separated by only {sep:.3e} at {f} Hz (floor {floor})",
                            self.standards[i].kind.label(),
                            self.standards[j].kind.label()
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> &FrequencyGrid {
        self.standards[0].known_gamma.grid()
    }

    pub fn standard(&self, kind: StandardKind) -> Option<&CalStandard> {
        self.standards.iter().find(|s| s.kind == kind)
    }
}

/// Linearly interpolate a standard definition onto `grid` (real and imaginary
/// parts independently). Requests outside the measured span are range errors.
pub fn resample_standard(std: &CalStandard, grid: &FrequencyGrid) -> Result<CalStandard> {
    let src_f = std.known_gamma.grid().points();
    let src_v = std.known_gamma.values();
    let lo = src_f[0];
    let hi = src_f[src_f.len() - 1];
    let mut out = Vec::with_capacity(grid.len());
    for &f in grid.points() {
        if f < lo || f > hi {
            return Err(Error::Range(format!(
                "{f} Hz is outside the calibration bandwidth {lo}-{hi} Hz"
            )));
        }
        let k = match src_f.binary_search_by(|probe| probe.partial_cmp(&f).unwrap()) {
            Ok(exact) => {
                out.push(src_v[exact]);
                continue;
            }
            Err(ins) => ins, // f lies in (src_f[ins-1], src_f[ins])
        };
        let (f0, f1) = (src_f[k - 1], src_f[k]);
        let t = (f - f0) / (f1 - f0);
        out.push(src_v[k - 1] * (1.0 - t) + src_v[k] * t);
    }
    Ok(CalStandard { kind: std.kind, known_gamma: ComplexTrace::new(grid.clone(), out)? })
}

/// Solve the error adapter from three measured standard traces.
///
/// Per frequency this solves the linear system
/// `Γm_i = e00 + Γa_i Γm_i e11 − Γa_i Δ` for `(e00, e11, Δ)` with
/// `Δ = e00 e11 − e01e10`, then recovers `e01e10 = e00 e11 − Δ`.
/// Measurements are paired with `kit.standards` by position.
pub fn solve_sol(measured: [&ComplexTrace; 3], kit: &CalKit) -> Result<OnePortErrorTerms> {
    kit.validate()?;
    let grid = kit.grid();
    for (i, m) in measured.iter().enumerate() {
        if m.grid() != grid {
            return Err(Error::Parameter(format!(
                "measured trace {i} is not on the calibration grid"
            )));
        }
    }
    let n = grid.len();
    let mut e00 = Vec::with_capacity(n);
    let mut e11 = Vec::with_capacity(n);
    let mut e01e10 = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);

    for (pt, &f) in grid.points().iter().enumerate() {
        let ga: Vec<Complex64> = kit.standards.iter().map(|s| s.known_gamma.values()[pt]).collect();
        let gm: Vec<Complex64> = measured.iter().map(|m| m.values()[pt]).collect();
        let a = Matrix3::new(
            Complex64::ONE, ga[0] * gm[0], -ga[0],
            Complex64::ONE, ga[1] * gm[1], -ga[1],
            Complex64::ONE, ga[2] * gm[2], -ga[2],
        );
        let b = Vector3::new(gm[0], gm[1], gm[2]);
        let lu = a.lu();
        let x = lu.solve(&b).ok_or_else(|| {
            Error::Conditioning(format!("singular calibration system at {f} Hz"))
        })?;
        let residual = (a * x - b).iter().map(|r| r.norm()).fold(0.0, f64::max);
        if !x.iter().all(|v| v.re.is_finite() && v.im.is_finite()) || !residual.is_finite() {
            return Err(Error::Conditioning(format!(
                "calibration solve produced non-finite terms at {f} Hz"
            )));
        }
        let tracking = x[0] * x[1] - x[2];
        if tracking.norm() == 0.0 {
            return Err(Error::Conditioning(format!(
                "reflection tracking vanishes at {f} Hz"
            )));
        }
        e00.push(x[0]);
        e11.push(x[1]);
        e01e10.push(tracking);
        residuals.push(residual);
    }

    let mut terms = OnePortErrorTerms::new(grid.clone(), e00, e11, e01e10)?;
    terms.solve_residuals = residuals;
    Ok(terms)
}

/// De-embed a measured trace: `S11a = (S11m − e00) / (e01e10 + e11 (S11m − e00))`.
pub fn apply_cal(terms: &OnePortErrorTerms, measured: &ComplexTrace) -> Result<ComplexTrace> {
    if measured.grid() != terms.grid() {
        return Err(Error::Parameter("measured trace is not on the calibration grid".into()));
    }
    let mut out = Vec::with_capacity(measured.len());
    for (i, (&m, &f)) in measured
        .values()
        .iter()
        .zip(terms.grid.points())
        .enumerate()
    {
        let num = m - terms.e00[i];
        let den = terms.e01e10[i] + terms.e11[i] * num;
        if den.norm() == 0.0 {
            return Err(Error::Numeric(format!(
                "calibration denominator vanishes at {f} Hz (index {i})"
            )));
        }
        out.push(num / den);
    }
    ComplexTrace::new(measured.grid().clone(), out)
}

/// One row of the error-adapter magnitude report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorTermRow {
    pub frequency_hz: f64,
    pub e00_db: f64,
    pub e11_db: f64,
    pub e01e10_db: f64,
}

/// Magnitudes of the three terms in dB, one row per frequency. Exact zeros are
/// reported at the −200 dB floor so report files stay finite.
pub fn error_term_report(terms: &OnePortErrorTerms) -> Vec<ErrorTermRow> {
    let db = |v: Complex64| {
        let m = v.norm();
        if m == 0.0 {
            DB_FLOOR
        } else {
            (20.0 * m.log10()).max(DB_FLOOR)
        }
    };
    terms
        .grid
        .points()
        .iter()
        .enumerate()
        .map(|(i, &f)| ErrorTermRow {
            frequency_hz: f,
            e00_db: db(terms.e00[i]),
            e11_db: db(terms.e11[i]),
            e01e10_db: db(terms.e01e10[i]),
        })
        .collect()
}
