//! Synthesis of hanger- and reflection-mode resonator measurement circuits.
//!
//! Both circuits carry a parallel LCR resonator coupled through a series
//! capacitor. The hanger hangs the resonator branch off a through feedline
//! (optionally behind wirebond inductors); the reflection circuit looks at
//! the branch through a leaky circulator. Everything is assembled at 50 Ω
//! references and renormalized to the port impedances at the very end.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::onecal::OnePortErrorTerms;
use crate::rfnet::{
    abcd_to_s, cascade, cascade_s, component_abcd, renormalize_s, terminate_3port, AbcdMatrix,
    ComplexTrace, Element, FrequencyGrid, LoadImpedance, SMatrix2, SMatrix3,
};

const J: Complex64 = Complex64::new(0.0, 1.0);

/// Internal assembly reference impedance.
const Z_ASSEMBLY: f64 = 50.0;

/// Lossless line segment: characteristic impedance, electrical length in
/// degrees at the stated reference frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionLine {
    pub z0: f64,
    pub length_deg: f64,
    pub f_ref: f64,
}

impl TransmissionLine {
    pub fn new(z0: f64, length_deg: f64, f_ref: f64) -> Self {
        Self { z0, length_deg, f_ref }
    }

    /// Zero-length 50 Ω segment (an identity element).
    pub fn none() -> Self {
        Self { z0: Z_ASSEMBLY, length_deg: 0.0, f_ref: 6e9 }
    }

    fn abcd(&self, f: f64) -> Result<AbcdMatrix> {
        component_abcd(
            &Element::Line { z0: self.z0, length_deg: self.length_deg, f_ref: self.f_ref },
            f,
        )
    }

    fn s(&self, f: f64) -> Result<SMatrix2> {
        abcd_to_s(&self.abcd(f)?, Z_ASSEMBLY, Z_ASSEMBLY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircuitMode {
    Hanger,
    Reflection,
}

/// Full parameterization of the simulated measurement circuits.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec {
    pub mode: CircuitMode,
    /// Source and output port impedances, Ohms.
    pub z1: f64,
    pub z2: f64,
    /// Input feed (reflection mode only).
    pub tl1: TransmissionLine,
    /// Output feed (reflection mode only).
    pub tl2: TransmissionLine,
    /// Segment between circulator and resonator (reflection) or left feed
    /// segment (hanger).
    pub tl3: TransmissionLine,
    /// Right feed segment (hanger only).
    pub tl4: TransmissionLine,
    /// Resonator inductance, H.
    pub l_res: f64,
    /// Resonator capacitance, F.
    pub c_res: f64,
    /// Resonator parallel resistance, Ohms.
    pub r_res: f64,
    /// Coupling capacitance, F.
    pub c_couple: f64,
    /// Circulator isolation, dB (reflection mode only).
    pub circulator_isolation_db: f64,
    /// Wirebond inductances, H (hanger mode only; 0 disables them).
    pub wirebond_l1: f64,
    pub wirebond_l2: f64,
}

impl CircuitSpec {
    /// Hanger circuit: `series(jωL1) · TL3 · shunt(resonator) · TL4 · series(jωL2)`
    /// between ports `z1` and `z2`.
    pub fn hanger(
        z1: f64,
        z2: f64,
        tl3: TransmissionLine,
        tl4: TransmissionLine,
        l_res: f64,
        c_res: f64,
        r_res: f64,
        c_couple: f64,
        wirebond_l1: f64,
        wirebond_l2: f64,
    ) -> Result<Self> {
        let spec = Self {
            mode: CircuitMode::Hanger,
            z1,
            z2,
            tl1: TransmissionLine::none(),
            tl2: TransmissionLine::none(),
            tl3,
            tl4,
            l_res,
            c_res,
            r_res,
            c_couple,
            circulator_isolation_db: 300.0,
            wirebond_l1,
            wirebond_l2,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Reflection circuit: resonator behind TL3 on circulator port 2, input
    /// through TL1 on port 1, output through TL2 on port 3.
    pub fn reflection(
        z1: f64,
        z2: f64,
        tl1: TransmissionLine,
        tl2: TransmissionLine,
        tl3: TransmissionLine,
        l_res: f64,
        c_res: f64,
        r_res: f64,
        c_couple: f64,
        circulator_isolation_db: f64,
    ) -> Result<Self> {
        let spec = Self {
            mode: CircuitMode::Reflection,
            z1,
            z2,
            tl1,
            tl2,
            tl3,
            tl4: TransmissionLine::none(),
            l_res,
            c_res,
            r_res,
            c_couple,
            circulator_isolation_db,
            wirebond_l1: 0.0,
            wirebond_l2: 0.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let positives = [
            ("z1", self.z1),
            ("z2", self.z2),
            ("l_res", self.l_res),
            ("c_res", self.c_res),
            ("r_res", self.r_res),
            ("c_couple", self.c_couple),
        ];
        for (name, v) in positives {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Parameter(format!("{name} = {v}; must be > 0")));
            }
        }
        for (name, v) in [("wirebond_l1", self.wirebond_l1), ("wirebond_l2", self.wirebond_l2)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Parameter(format!("{name} = {v}; must be >= 0")));
            }
        }
        if !self.circulator_isolation_db.is_finite() || self.circulator_isolation_db < 0.0 {
            return Err(Error::Parameter(format!(
                "circulator isolation {} dB; must be >= 0",
                self.circulator_isolation_db
            )));
        }
        Ok(())
    }

    /// Frequency of the resonance dip: the branch series resonance
    /// `1 / (2π sqrt(L (C + Cc)))`, slightly below the bare LC frequency.
    pub fn resonance_frequency(&self) -> f64 {
        1.0 / (2.0 * PI * (self.l_res * (self.c_res + self.c_couple)).sqrt())
    }

    /// Coupling quality factor implied by the coupling capacitor against the
    /// assembly impedance. The hanger feedline loads the branch with half the
    /// impedance of the reflection case, doubling Qc.
    pub fn designed_qc(&self) -> f64 {
        let w0 = 2.0 * PI * self.resonance_frequency();
        let load = match self.mode {
            CircuitMode::Reflection => Z_ASSEMBLY,
            CircuitMode::Hanger => Z_ASSEMBLY / 2.0,
        };
        let r_ext = 1.0 / (w0 * w0 * self.c_couple * self.c_couple * load);
        r_ext * ((self.c_res + self.c_couple) / self.l_res).sqrt()
    }

    /// Loaded quality factor from the designed internal and coupling Q.
    pub fn designed_q(&self) -> Result<f64> {
        let qi = designed_qi(self.r_res, self.l_res, self.c_res)?;
        Ok(1.0 / (1.0 / qi + 1.0 / self.designed_qc()))
    }

    /// 2,001-point grid spanning ±`half_linewidths` loaded linewidths around
    /// the resonance dip.
    pub fn default_grid(&self, half_linewidths: f64) -> Result<FrequencyGrid> {
        self.grid(half_linewidths, 2001)
    }

    pub fn grid(&self, half_linewidths: f64, points: usize) -> Result<FrequencyGrid> {
        let f0 = self.resonance_frequency();
        let lw = f0 / self.designed_q()?;
        FrequencyGrid::linspace(f0 - half_linewidths * lw, f0 + half_linewidths * lw, points)
    }
}

/// Three-port circulator with circulation order 1→2→3→1: forward paths have
/// unit magnitude, reverse paths are suppressed by the isolation, port
/// reflections are zero and the leakage phase is 0°.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirculatorModel {
    pub isolation_db: f64,
}

impl CirculatorModel {
    pub fn new(isolation_db: f64) -> Result<Self> {
        if !isolation_db.is_finite() || isolation_db < 0.0 {
            return Err(Error::Parameter(format!(
                "circulator isolation {isolation_db} dB; must be >= 0"
            )));
        }
        Ok(Self { isolation_db })
    }

    pub fn leakage(&self) -> f64 {
        10f64.powf(-self.isolation_db / 20.0)
    }

    pub fn s_matrix(&self, z_ref: f64) -> Result<SMatrix3> {
        let eps = Complex64::new(self.leakage(), 0.0);
        let mut s = [[Complex64::ZERO; 3]; 3];
        s[1][0] = Complex64::ONE; // 1 -> 2
        s[2][1] = Complex64::ONE; // 2 -> 3
        s[0][2] = Complex64::ONE; // 3 -> 1
        s[0][1] = eps; // 2 -> 1 reverse
        s[1][2] = eps; // 3 -> 2 reverse
        s[2][0] = eps; // 1 -> 3 reverse
        SMatrix3::new(s, [z_ref; 3])
    }
}

/// Impedance of the coupled resonator branch:
/// `Z = 1/(jωCc) + [1/R + 1/(jωL) + jωC]^-1`.
pub fn lcr_branch_impedance(spec: &CircuitSpec, f: f64) -> Result<Complex64> {
    if !f.is_finite() || f <= 0.0 {
        return Err(Error::Parameter(format!("frequency {f} must be > 0")));
    }
    spec.validate()?;
    let w = 2.0 * PI * f;
    let y_par = Complex64::new(1.0 / spec.r_res, 0.0) + (J * w * spec.l_res).finv() + J * w * spec.c_res;
    Ok((J * w * spec.c_couple).finv() + y_par.finv())
}

/// Designed internal quality factor of the parallel LCR: `Qi = R sqrt(C / L)`.
pub fn designed_qi(r: f64, l: f64, c: f64) -> Result<f64> {
    for (name, v) in [("R", r), ("L", l), ("C", c)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::Parameter(format!("{name} = {v}; must be > 0")));
        }
    }
    Ok(r * (c / l).sqrt())
}

/// Transmission trace of the hanger circuit.
pub fn simulate_hanger(spec: &CircuitSpec, grid: &FrequencyGrid) -> Result<ComplexTrace> {
    if spec.mode != CircuitMode::Hanger {
        return Err(Error::Parameter("circuit spec is not hanger mode".into()));
    }
    spec.validate()?;
    let mut values = Vec::with_capacity(grid.len());
    for (i, &f) in grid.points().iter().enumerate() {
        let w = 2.0 * PI * f;
        let branch = lcr_branch_impedance(spec, f)?;
        let chain = cascade(&[
            component_abcd(&Element::Series { z: J * w * spec.wirebond_l1 }, f)?,
            spec.tl3.abcd(f)?,
            component_abcd(&Element::Shunt { y: branch.finv() }, f)?,
            spec.tl4.abcd(f)?,
            component_abcd(&Element::Series { z: J * w * spec.wirebond_l2 }, f)?,
        ])?;
        let s = abcd_to_s(&chain, Z_ASSEMBLY, Z_ASSEMBLY)
            .and_then(|s| renormalize_s(&s, (spec.z1, spec.z2)))
            .map_err(|e| Error::Numeric(format!("{e} at frequency index {i} ({f} Hz)")))?;
        values.push(s.s21);
    }
    ComplexTrace::new(grid.clone(), values)
}

/// Transmission trace of the reflection circuit with the LCR branch as DUT.
pub fn simulate_reflection(spec: &CircuitSpec, grid: &FrequencyGrid) -> Result<ComplexTrace> {
    let gamma: Vec<Complex64> = grid
        .points()
        .iter()
        .map(|&f| {
            lcr_branch_impedance(spec, f)
                .and_then(|z| crate::rfnet::reflection_of_impedance(LoadImpedance::Finite(z), Z_ASSEMBLY))
        })
        .collect::<Result<_>>()?;
    reflection_system_response(spec, grid, &gamma)
}

/// Transmission trace of the reflection circuit for an arbitrary DUT
/// reflection, given at the far end of TL3 (the sample reference plane).
///
/// The same embedding network measured with different DUTs realizes the
/// synthetic-calibration scenarios: pass ideal open/short/load reflections to
/// obtain standard measurements through one common error network.
pub fn reflection_system_response(
    spec: &CircuitSpec,
    grid: &FrequencyGrid,
    dut_gamma: &[Complex64],
) -> Result<ComplexTrace> {
    if spec.mode != CircuitMode::Reflection {
        return Err(Error::Parameter("circuit spec is not reflection mode".into()));
    }
    spec.validate()?;
    if dut_gamma.len() != grid.len() {
        return Err(Error::Parameter(format!(
            "DUT reflection has {} points for {} grid points",
            dut_gamma.len(),
            grid.len()
        )));
    }
    let circulator = CirculatorModel::new(spec.circulator_isolation_db)?;
    let mut values = Vec::with_capacity(grid.len());
    for (i, (&f, &gamma)) in grid.points().iter().zip(dut_gamma).enumerate() {
        let step = || -> Result<Complex64> {
            // DUT reflection seen at circulator port 2, through TL3
            let tl3 = spec.tl3.s(f)?;
            let den = Complex64::ONE - tl3.s22 * gamma;
            if den.norm() == 0.0 {
                return Err(Error::Numeric("resonant loop behind TL3".into()));
            }
            let gamma_in = tl3.s11 + tl3.s12 * tl3.s21 * gamma / den;
            let reduced = terminate_3port(&circulator.s_matrix(Z_ASSEMBLY)?, 2, gamma_in)?;
            let total = cascade_s(&cascade_s(&spec.tl1.s(f)?, &reduced)?, &spec.tl2.s(f)?)?;
            Ok(renormalize_s(&total, (spec.z1, spec.z2))?.s21)
        };
        values.push(step().map_err(|e| Error::Numeric(format!("{e} at frequency index {i} ({f} Hz)")))?);
    }
    ComplexTrace::new(grid.clone(), values)
}

/// Forward error-adapter embedding:
/// `S11m = e00 + e01e10 · S11a / (1 − e11 · S11a)` per frequency.
pub fn embed_error(terms: &OnePortErrorTerms, actual: &ComplexTrace) -> Result<ComplexTrace> {
    if actual.grid() != terms.grid() {
        return Err(Error::Parameter("trace is not on the error-term grid".into()));
    }
    let mut out = Vec::with_capacity(actual.len());
    for (i, (&a, &f)) in actual.values().iter().zip(terms.grid().points()).enumerate() {
        let den = Complex64::ONE - terms.e11()[i] * a;
        if den.norm() == 0.0 {
            return Err(Error::Numeric(format!(
                "embedding denominator vanishes at {f} Hz (index {i})"
            )));
        }
        out.push(terms.e00()[i] + terms.e01e10()[i] * a / den);
    }
    ComplexTrace::new(actual.grid().clone(), out)
}

/// Canonical parameter sets used throughout: resonator L = 1.2 nH,
/// C = 580 fF, Cc = 1 fF (resonance near 6.03 GHz, reflection Qc near 3e5).
pub mod presets {
    use super::*;

    pub const L_RES: f64 = 1.2e-9;
    pub const C_RES: f64 = 580e-15;
    pub const C_COUPLE: f64 = 1e-15;
    pub const F_REF: f64 = 6e9;
    /// Parallel resistance for a designed Qi of 2.2e6.
    pub const R_QI_2P2E6: f64 = 1e8;
    /// Parallel resistance for a designed Qi of 2.2e10.
    pub const R_QI_2P2E10: f64 = 1e12;

    /// Matched reflection circuit (all ports and lines 50 Ω, 90° feeds,
    /// resonator directly on the circulator) at the given isolation.
    pub fn isolation_benchmark(isolation_db: f64, r_res: f64) -> Result<CircuitSpec> {
        CircuitSpec::reflection(
            50.0,
            50.0,
            TransmissionLine::new(50.0, 90.0, F_REF),
            TransmissionLine::new(50.0, 90.0, F_REF),
            TransmissionLine::new(50.0, 0.0, F_REF),
            L_RES,
            C_RES,
            r_res,
            C_COUPLE,
            isolation_db,
        )
    }

    /// Reflection circuit with strongly mismatched source/output ports
    /// (20 Ω / 120 Ω) and a selectable TL3 length.
    pub fn mismatched_reflection(l3_deg: f64, r_res: f64) -> Result<CircuitSpec> {
        CircuitSpec::reflection(
            20.0,
            120.0,
            TransmissionLine::new(50.0, 90.0, F_REF),
            TransmissionLine::new(50.0, 90.0, F_REF),
            TransmissionLine::new(50.0, l3_deg, F_REF),
            L_RES,
            C_RES,
            r_res,
            C_COUPLE,
            300.0,
        )
    }

    /// Hanger with wirebond inductors (0.5 nH / 1.5 nH) around the feed
    /// segments; all impedances 50 Ω.
    pub fn wirebonded_hanger(l3_deg: f64, l4_deg: f64, r_res: f64) -> Result<CircuitSpec> {
        CircuitSpec::hanger(
            50.0,
            50.0,
            TransmissionLine::new(50.0, l3_deg, F_REF),
            TransmissionLine::new(50.0, l4_deg, F_REF),
            L_RES,
            C_RES,
            r_res,
            C_COUPLE,
            0.5e-9,
            1.5e-9,
        )
    }
}
