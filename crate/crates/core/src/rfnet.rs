//! Frequency-domain two-port and three-port network algebra.
//!
//! Everything here is a pure function of its inputs; matrices are computed
//! independently per frequency point and never interpolated.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Strictly increasing, positive frequency points in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    points: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Parameter("frequency grid is empty".into()));
        }
        for (i, &f) in points.iter().enumerate() {
            if !f.is_finite() || f <= 0.0 {
                return Err(Error::Parameter(format!(
                    "frequency point {i} is {f}; must be finite and > 0"
                )));
            }
            if i > 0 && f <= points[i - 1] {
                return Err(Error::Parameter(format!(
                    "frequency grid not strictly increasing at index {i}"
                )));
            }
        }
        Ok(Self { points })
    }

    /// Evenly spaced grid of `n` points over `[start, stop]`.
    pub fn linspace(start: f64, stop: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Parameter("linspace needs at least 2 points".into()));
        }
        let step = (stop - start) / (n - 1) as f64;
        Self::new((0..n).map(|i| start + step * i as f64).collect())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.points[0]
    }

    pub fn stop(&self) -> f64 {
        *self.points.last().unwrap()
    }

    pub fn span(&self) -> f64 {
        self.stop() - self.start()
    }
}

/// Frequency-indexed complex samples; the universal carrier between the
/// simulator, the calibrator and the fitters.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTrace {
    grid: FrequencyGrid,
    values: Vec<Complex64>,
}

impl ComplexTrace {
    pub fn new(grid: FrequencyGrid, values: Vec<Complex64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::Parameter(format!(
                "trace has {} values for {} grid points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Parameter(format!("trace value {i} is not finite")));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Iterate over `(frequency, value)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.grid.points().iter().copied().zip(self.values.iter().copied())
    }

    /// Pointwise map sharing the same grid.
    pub fn map(&self, f: impl FnMut(Complex64) -> Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().copied().map(f).collect(),
        }
    }
}

/// 2x2 chain (ABCD) matrix: `a`, `d` dimensionless, `b` in Ohms, `c` in Siemens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbcdMatrix {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl AbcdMatrix {
    pub fn identity() -> Self {
        Self {
            a: Complex64::ONE,
            b: Complex64::ZERO,
            c: Complex64::ZERO,
            d: Complex64::ONE,
        }
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    fn mul(&self, rhs: &Self) -> Self {
        Self {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }
}

/// Two-port S-matrix with real reference impedances per port.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SMatrix2 {
    pub s11: Complex64,
    pub s12: Complex64,
    pub s21: Complex64,
    pub s22: Complex64,
    /// Reference impedance of port 1 and port 2, Ohms.
    pub z_ref: [f64; 2],
}

impl SMatrix2 {
    pub fn new(s11: Complex64, s12: Complex64, s21: Complex64, s22: Complex64, z_ref: [f64; 2]) -> Result<Self> {
        check_refs(&z_ref)?;
        Ok(Self { s11, s12, s21, s22, z_ref })
    }

    /// Largest singular value of the 2x2 matrix (passivity check helper).
    pub fn max_singular_value(&self) -> f64 {
        // eigenvalues of the 2x2 Hermitian Gram matrix, closed form
        let g11 = self.s11.norm_sqr() + self.s21.norm_sqr();
        let g22 = self.s12.norm_sqr() + self.s22.norm_sqr();
        let g12 = self.s11.conj() * self.s12 + self.s21.conj() * self.s22;
        let tr = g11 + g22;
        let det = g11 * g22 - g12.norm_sqr();
        let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
        (0.5 * (tr + disc)).max(0.0).sqrt()
    }
}

/// Three-port S-matrix with real reference impedances per port.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SMatrix3 {
    pub s: [[Complex64; 3]; 3],
    pub z_ref: [f64; 3],
}

impl SMatrix3 {
    pub fn new(s: [[Complex64; 3]; 3], z_ref: [f64; 3]) -> Result<Self> {
        check_refs(&z_ref)?;
        Ok(Self { s, z_ref })
    }
}

fn check_refs(z_ref: &[f64]) -> Result<()> {
    for (i, &z) in z_ref.iter().enumerate() {
        if !z.is_finite() || z <= 0.0 {
            return Err(Error::Parameter(format!(
                "reference impedance of port {} is {z}; must be a positive real",
                i + 1
            )));
        }
    }
    Ok(())
}

/// A circuit element realizable as an ABCD matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Element {
    /// Lossless line: characteristic impedance in Ohms, electrical length in
    /// degrees at `f_ref`; phase scales linearly with frequency.
    Line { z0: f64, length_deg: f64, f_ref: f64 },
    /// Series impedance in Ohms.
    Series { z: Complex64 },
    /// Shunt admittance in Siemens.
    Shunt { y: Complex64 },
}

/// ABCD matrix of a single element evaluated at frequency `f`.
pub fn component_abcd(element: &Element, f: f64) -> Result<AbcdMatrix> {
    if !f.is_finite() || f <= 0.0 {
        return Err(Error::Parameter(format!("frequency {f} must be finite and > 0")));
    }
    match *element {
        Element::Line { z0, length_deg, f_ref } => {
            if !z0.is_finite() || z0 <= 0.0 {
                return Err(Error::Parameter(format!("line Z0 = {z0}; must be > 0")));
            }
            if !length_deg.is_finite() || !f_ref.is_finite() || f_ref <= 0.0 {
                return Err(Error::Parameter("line length/reference frequency not finite".into()));
            }
            let phi = length_deg.to_radians() * (f / f_ref);
            let (sin, cos) = phi.sin_cos();
            Ok(AbcdMatrix {
                a: Complex64::new(cos, 0.0),
                b: Complex64::new(0.0, z0 * sin),
                c: Complex64::new(0.0, sin / z0),
                d: Complex64::new(cos, 0.0),
            })
        }
        Element::Series { z } => {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::Parameter("series impedance not finite".into()));
            }
            Ok(AbcdMatrix {
                a: Complex64::ONE,
                b: z,
                c: Complex64::ZERO,
                d: Complex64::ONE,
            })
        }
        Element::Shunt { y } => {
            if !y.re.is_finite() || !y.im.is_finite() {
                return Err(Error::Parameter("shunt admittance not finite".into()));
            }
            Ok(AbcdMatrix {
                a: Complex64::ONE,
                b: Complex64::ZERO,
                c: y,
                d: Complex64::ONE,
            })
        }
    }
}

/// Left-to-right product of a chain of ABCD matrices.
pub fn cascade(elements: &[AbcdMatrix]) -> Result<AbcdMatrix> {
    let (first, rest) = elements
        .split_first()
        .ok_or_else(|| Error::Parameter("cascade of zero elements".into()))?;
    Ok(rest.iter().fold(*first, |acc, m| acc.mul(m)))
}

/// Standard ABCD to S conversion generalized to unequal real reference
/// impedances `zref1` (port 1) and `zref2` (port 2).
pub fn abcd_to_s(m: &AbcdMatrix, zref1: f64, zref2: f64) -> Result<SMatrix2> {
    check_refs(&[zref1, zref2])?;
    let den = m.a * zref2 + m.b + m.c * zref1 * zref2 + m.d * zref1;
    if den.norm() == 0.0 {
        return Err(Error::Numeric("degenerate network in ABCD to S conversion".into()));
    }
    let root = (zref1 * zref2).sqrt();
    SMatrix2::new(
        (m.a * zref2 + m.b - m.c * zref1 * zref2 - m.d * zref1) / den,
        2.0 * m.det() * root / den,
        Complex64::new(2.0 * root, 0.0) / den,
        (-m.a * zref2 + m.b - m.c * zref1 * zref2 + m.d * zref1) / den,
        [zref1, zref2],
    )
}

/// Chain two two-ports (port 2 of `first` into port 1 of `second`).
pub fn cascade_s(first: &SMatrix2, second: &SMatrix2) -> Result<SMatrix2> {
    if (first.z_ref[1] - second.z_ref[0]).abs() > 1e-9 * first.z_ref[1] {
        return Err(Error::Parameter(format!(
            "cascade joint references differ: {} vs {}",
            first.z_ref[1], second.z_ref[0]
        )));
    }
    let den = Complex64::ONE - first.s22 * second.s11;
    if den.norm() == 0.0 {
        return Err(Error::Numeric("resonant loop in S-matrix cascade".into()));
    }
    SMatrix2::new(
        first.s11 + first.s12 * second.s11 * first.s21 / den,
        first.s12 * second.s12 / den,
        second.s21 * first.s21 / den,
        second.s22 + second.s21 * first.s22 * second.s12 / den,
        [first.z_ref[0], second.z_ref[1]],
    )
}

/// Power-wave renormalization of a two-port to new real reference impedances.
///
/// Built from the exact wave change of basis per port: with
/// `alpha = (zo + zn) / (2 sqrt(zo zn))` and `beta = (zo - zn) / (2 sqrt(zo zn))`,
/// the new matrix is `(B + A S)(A + B S)^-1` for diagonal `A`, `B`.
pub fn renormalize_s(s: &SMatrix2, new_refs: (f64, f64)) -> Result<SMatrix2> {
    check_refs(&[new_refs.0, new_refs.1])?;
    let coeff = |zo: f64, zn: f64| {
        let root = 2.0 * (zo * zn).sqrt();
        ((zo + zn) / root, (zo - zn) / root)
    };
    let (a1, b1) = coeff(s.z_ref[0], new_refs.0);
    let (a2, b2) = coeff(s.z_ref[1], new_refs.1);

    // M = A + B S, N = B + A S (A, B diagonal with entries a_i, b_i)
    let m11 = a1 + b1 * s.s11;
    let m12 = b1 * s.s12;
    let m21 = b2 * s.s21;
    let m22 = a2 + b2 * s.s22;
    let n11 = b1 + a1 * s.s11;
    let n12 = a1 * s.s12;
    let n21 = a2 * s.s21;
    let n22 = b2 + a2 * s.s22;

    let det = m11 * m22 - m12 * m21;
    if det.norm() == 0.0 {
        return Err(Error::Numeric("singular renormalization system".into()));
    }
    // N * M^-1
    SMatrix2::new(
        (n11 * m22 - n12 * m21) / det,
        (n12 * m11 - n11 * m12) / det,
        (n21 * m22 - n22 * m21) / det,
        (n22 * m11 - n21 * m12) / det,
        [new_refs.0, new_refs.1],
    )
}

/// Terminate one port of a three-port with reflection coefficient `gamma`,
/// returning the two-port of the remaining ports (in ascending order).
///
/// `port` is 1-based. Reduced entries follow
/// `s'_ij = s_ij + s_ik γ s_kj / (1 − s_kk γ)` for terminated port `k`.
pub fn terminate_3port(s: &SMatrix3, port: usize, gamma: Complex64) -> Result<SMatrix2> {
    if !(1..=3).contains(&port) {
        return Err(Error::Parameter(format!("port {port} not in 1..=3")));
    }
    if !gamma.re.is_finite() || !gamma.im.is_finite() {
        return Err(Error::Parameter("termination reflection not finite".into()));
    }
    let k = port - 1;
    let den = Complex64::ONE - s.s[k][k] * gamma;
    if den.norm() == 0.0 {
        return Err(Error::Numeric(format!(
            "resonant termination singularity at port {port}"
        )));
    }
    let keep: Vec<usize> = (0..3).filter(|&i| i != k).collect();
    let entry = |i: usize, j: usize| s.s[i][j] + s.s[i][k] * gamma * s.s[k][j] / den;
    SMatrix2::new(
        entry(keep[0], keep[0]),
        entry(keep[0], keep[1]),
        entry(keep[1], keep[0]),
        entry(keep[1], keep[1]),
        [s.z_ref[keep[0]], s.z_ref[keep[1]]],
    )
}

/// A one-port load: either a finite complex impedance or an ideal open.
///
/// The open carries its own tag so Γ = +1 comes out exactly instead of
/// through a large-number limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoadImpedance {
    Finite(Complex64),
    Open,
}

/// Reflection coefficient Γ = (z − zref) / (z + zref) of a load.
pub fn reflection_of_impedance(z: LoadImpedance, zref: f64) -> Result<Complex64> {
    check_refs(&[zref])?;
    match z {
        LoadImpedance::Open => Ok(Complex64::ONE),
        LoadImpedance::Finite(z) => {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::Parameter("load impedance not finite".into()));
            }
            let den = z + zref;
            if den.norm() == 0.0 {
                return Err(Error::Numeric(format!("load impedance equals -{zref}")));
            }
            Ok((z - zref) / den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const J: Complex64 = Complex64::new(0.0, 1.0);

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_c_close(a: Complex64, b: Complex64, tol: f64) {
        assert!(
            (a - b).norm() <= tol,
            "complex values differ: {a} vs {b} (tol {tol})"
        );
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(FrequencyGrid::new(vec![]).is_err());
        assert!(FrequencyGrid::new(vec![1e9, 1e9]).is_err());
        assert!(FrequencyGrid::new(vec![2e9, 1e9]).is_err());
        assert!(FrequencyGrid::new(vec![-1.0, 1e9]).is_err());
        assert!(FrequencyGrid::new(vec![1e9, 2e9]).is_ok());
    }

    #[test]
    fn trace_checks_length_and_finiteness() {
        let g = FrequencyGrid::linspace(1e9, 2e9, 3).unwrap();
        assert!(ComplexTrace::new(g.clone(), vec![Complex64::ZERO; 2]).is_err());
        assert!(ComplexTrace::new(g.clone(), vec![c(f64::NAN, 0.0); 3]).is_err());
        assert!(ComplexTrace::new(g, vec![Complex64::ZERO; 3]).is_ok());
    }

    #[test]
    fn zero_length_line_is_identity() {
        let m = component_abcd(&Element::Line { z0: 50.0, length_deg: 0.0, f_ref: 6e9 }, 6e9).unwrap();
        assert_c_close(m.a, Complex64::ONE, 1e-15);
        assert_c_close(m.b, Complex64::ZERO, 1e-15);
        assert_c_close(m.c, Complex64::ZERO, 1e-15);
        assert_c_close(m.d, Complex64::ONE, 1e-15);
    }

    #[test]
    fn quarter_wave_line_closed_form() {
        let m = component_abcd(&Element::Line { z0: 50.0, length_deg: 90.0, f_ref: 6e9 }, 6e9).unwrap();
        assert_c_close(m.a, Complex64::ZERO, 1e-15);
        assert_c_close(m.b, J * 50.0, 1e-12);
        assert_c_close(m.c, J / 50.0, 1e-15);
        assert_c_close(m.d, Complex64::ZERO, 1e-15);
    }

    #[test]
    fn one_ff_series_coupler_reactance() {
        // 1 fF series capacitor at 6 GHz
        let w = 2.0 * std::f64::consts::PI * 6e9;
        let z = (J * w * 1e-15).finv();
        let m = component_abcd(&Element::Series { z }, 6e9).unwrap();
        assert_abs_diff_eq!(m.b.im, -2.6526e4, epsilon = 0.5);
        assert_abs_diff_eq!(m.b.re, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn line_determinant_is_unity() {
        for f in [1e9, 4.3e9, 6e9, 11e9] {
            let m = component_abcd(&Element::Line { z0: 73.0, length_deg: 123.4, f_ref: 6e9 }, f).unwrap();
            assert!((m.det() - Complex64::ONE).norm() < 1e-9);
        }
    }

    #[test]
    fn component_rejects_bad_params() {
        assert!(component_abcd(&Element::Line { z0: -50.0, length_deg: 10.0, f_ref: 6e9 }, 6e9).is_err());
        assert!(component_abcd(&Element::Line { z0: 50.0, length_deg: f64::NAN, f_ref: 6e9 }, 6e9).is_err());
        assert!(component_abcd(&Element::Series { z: c(f64::INFINITY, 0.0) }, 6e9).is_err());
        assert!(component_abcd(&Element::Shunt { y: Complex64::ZERO }, 0.0).is_err());
    }

    #[test]
    fn cascade_of_identities_and_empty() {
        let id = AbcdMatrix::identity();
        let m = cascade(&[id, id]).unwrap();
        assert_c_close(m.a, Complex64::ONE, 1e-15);
        assert_c_close(m.b, Complex64::ZERO, 1e-15);
        assert!(cascade(&[]).is_err());
    }

    #[test]
    fn two_eighth_waves_equal_quarter_wave() {
        let half = component_abcd(&Element::Line { z0: 50.0, length_deg: 45.0, f_ref: 6e9 }, 6e9).unwrap();
        let full = component_abcd(&Element::Line { z0: 50.0, length_deg: 90.0, f_ref: 6e9 }, 6e9).unwrap();
        let m = cascade(&[half, half]).unwrap();
        assert_c_close(m.a, full.a, 1e-12);
        assert_c_close(m.b, full.b, 1e-10);
        assert_c_close(m.c, full.c, 1e-14);
        assert_c_close(m.d, full.d, 1e-12);
    }

    #[test]
    fn cascade_with_numeric_inverse_is_identity() {
        let m = cascade(&[
            component_abcd(&Element::Series { z: c(3.0, 7.0) }, 6e9).unwrap(),
            component_abcd(&Element::Shunt { y: c(0.01, -0.02) }, 6e9).unwrap(),
        ])
        .unwrap();
        // inverse of [[a,b],[c,d]] with det 1 is [[d,-b],[-c,a]]
        let det = m.det();
        let inv = AbcdMatrix { a: m.d / det, b: -m.b / det, c: -m.c / det, d: m.a / det };
        let id = cascade(&[m, inv]).unwrap();
        assert_c_close(id.a, Complex64::ONE, 1e-12);
        assert_c_close(id.b, Complex64::ZERO, 1e-12);
        assert_c_close(id.c, Complex64::ZERO, 1e-12);
        assert_c_close(id.d, Complex64::ONE, 1e-12);
    }

    #[test]
    fn identity_abcd_converts_to_transparent_s() {
        let s = abcd_to_s(&AbcdMatrix::identity(), 50.0, 50.0).unwrap();
        assert_c_close(s.s11, Complex64::ZERO, 1e-15);
        assert_c_close(s.s21, Complex64::ONE, 1e-15);
        assert_c_close(s.s12, Complex64::ONE, 1e-15);
        assert_c_close(s.s22, Complex64::ZERO, 1e-15);
    }

    #[test]
    fn series_fifty_ohm_s_params() {
        let m = component_abcd(&Element::Series { z: c(50.0, 0.0) }, 6e9).unwrap();
        let s = abcd_to_s(&m, 50.0, 50.0).unwrap();
        assert_c_close(s.s11, c(1.0 / 3.0, 0.0), 1e-12);
        assert_c_close(s.s21, c(2.0 / 3.0, 0.0), 1e-12);
    }

    #[test]
    fn quarter_wave_s21_is_minus_j() {
        let m = component_abcd(&Element::Line { z0: 50.0, length_deg: 90.0, f_ref: 6e9 }, 6e9).unwrap();
        let s = abcd_to_s(&m, 50.0, 50.0).unwrap();
        assert_c_close(s.s21, -J, 1e-12);
        assert!(s.s11.norm() < 1e-12);
    }

    #[test]
    fn renormalize_identity_when_refs_unchanged() {
        let m = component_abcd(&Element::Series { z: c(20.0, 35.0) }, 6e9).unwrap();
        let s = abcd_to_s(&m, 50.0, 50.0).unwrap();
        let r = renormalize_s(&s, (50.0, 50.0)).unwrap();
        assert_c_close(r.s11, s.s11, 1e-14);
        assert_c_close(r.s21, s.s21, 1e-14);
    }

    #[test]
    fn matched_line_shows_mismatch_after_renormalization() {
        let m = component_abcd(&Element::Line { z0: 50.0, length_deg: 30.0, f_ref: 6e9 }, 6e9).unwrap();
        let s = abcd_to_s(&m, 50.0, 50.0).unwrap();
        assert!(s.s11.norm() < 1e-12);
        let r = renormalize_s(&s, (20.0, 120.0)).unwrap();
        // closed form: reflection of a 50-ohm line between 20/120-ohm ports
        let direct = abcd_to_s(&m, 20.0, 120.0).unwrap();
        assert!(r.s11.norm() > 0.1);
        assert_c_close(r.s11, direct.s11, 1e-12);
        assert_c_close(r.s21, direct.s21, 1e-12);
    }

    #[test]
    fn renormalize_round_trip_recovers_input() {
        let m = cascade(&[
            component_abcd(&Element::Line { z0: 62.0, length_deg: 77.0, f_ref: 6e9 }, 5.1e9).unwrap(),
            component_abcd(&Element::Shunt { y: c(0.004, 0.013) }, 5.1e9).unwrap(),
        ])
        .unwrap();
        let s = abcd_to_s(&m, 50.0, 50.0).unwrap();
        let there = renormalize_s(&s, (20.0, 120.0)).unwrap();
        let back = renormalize_s(&there, (50.0, 50.0)).unwrap();
        for (got, want) in [
            (back.s11, s.s11),
            (back.s12, s.s12),
            (back.s21, s.s21),
            (back.s22, s.s22),
        ] {
            assert_c_close(got, want, 1e-12);
        }
    }

    #[test]
    fn renormalize_rejects_nonpositive_refs() {
        let s = abcd_to_s(&AbcdMatrix::identity(), 50.0, 50.0).unwrap();
        assert!(renormalize_s(&s, (0.0, 50.0)).is_err());
        assert!(renormalize_s(&s, (50.0, -1.0)).is_err());
    }

    fn ideal_circulator() -> SMatrix3 {
        let mut s = [[Complex64::ZERO; 3]; 3];
        s[1][0] = Complex64::ONE; // 1 -> 2
        s[2][1] = Complex64::ONE; // 2 -> 3
        s[0][2] = Complex64::ONE; // 3 -> 1
        SMatrix3::new(s, [50.0; 3]).unwrap()
    }

    #[test]
    fn matched_termination_extracts_submatrix() {
        let mut s = [[Complex64::ZERO; 3]; 3];
        for (i, row) in s.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = c(0.1 * (i as f64 + 1.0), 0.05 * (j as f64 + 1.0));
            }
        }
        let m3 = SMatrix3::new(s, [50.0; 3]).unwrap();
        let red = terminate_3port(&m3, 2, Complex64::ZERO).unwrap();
        assert_eq!(red.s11, s[0][0]);
        assert_eq!(red.s12, s[0][2]);
        assert_eq!(red.s21, s[2][0]);
        assert_eq!(red.s22, s[2][2]);
    }

    #[test]
    fn circulator_routes_full_reflection_to_output() {
        let red = terminate_3port(&ideal_circulator(), 2, Complex64::ONE).unwrap();
        // remaining ports (1, 3): transmission input -> output is s21 of the reduced two-port
        assert_c_close(red.s21, Complex64::ONE, 1e-15);
        let red = terminate_3port(&ideal_circulator(), 2, -Complex64::ONE).unwrap();
        assert_c_close(red.s21, -Complex64::ONE, 1e-15);
    }

    #[test]
    fn termination_singularity_reported() {
        let mut s = [[Complex64::ZERO; 3]; 3];
        s[1][1] = Complex64::ONE;
        let m3 = SMatrix3::new(s, [50.0; 3]).unwrap();
        assert!(terminate_3port(&m3, 2, Complex64::ONE).is_err());
    }

    #[test]
    fn reflection_of_basic_loads() {
        assert_c_close(
            reflection_of_impedance(LoadImpedance::Finite(c(50.0, 0.0)), 50.0).unwrap(),
            Complex64::ZERO,
            1e-15,
        );
        assert_c_close(
            reflection_of_impedance(LoadImpedance::Finite(Complex64::ZERO), 50.0).unwrap(),
            -Complex64::ONE,
            1e-15,
        );
        assert_c_close(
            reflection_of_impedance(LoadImpedance::Open, 50.0).unwrap(),
            Complex64::ONE,
            1e-15,
        );
        assert!(reflection_of_impedance(LoadImpedance::Finite(c(-50.0, 0.0)), 50.0).is_err());
    }

    #[test]
    fn cascade_s_matches_abcd_cascade_for_reciprocal_chain() {
        let f = 5.7e9;
        let e1 = component_abcd(&Element::Line { z0: 65.0, length_deg: 38.0, f_ref: 6e9 }, f).unwrap();
        let e2 = component_abcd(&Element::Series { z: c(5.0, 40.0) }, f).unwrap();
        let via_abcd = abcd_to_s(&cascade(&[e1, e2]).unwrap(), 50.0, 50.0).unwrap();
        let via_star = cascade_s(
            &abcd_to_s(&e1, 50.0, 50.0).unwrap(),
            &abcd_to_s(&e2, 50.0, 50.0).unwrap(),
        )
        .unwrap();
        assert_c_close(via_star.s11, via_abcd.s11, 1e-12);
        assert_c_close(via_star.s21, via_abcd.s21, 1e-12);
        assert_c_close(via_star.s22, via_abcd.s22, 1e-12);
    }

    #[test]
    fn passive_cascade_singular_values_bounded() {
        let f = 6.2e9;
        let chain = cascade(&[
            component_abcd(&Element::Line { z0: 31.0, length_deg: 55.0, f_ref: 6e9 }, f).unwrap(),
            component_abcd(&Element::Series { z: c(12.0, -80.0) }, f).unwrap(),
            component_abcd(&Element::Line { z0: 95.0, length_deg: 140.0, f_ref: 6e9 }, f).unwrap(),
            component_abcd(&Element::Shunt { y: c(0.002, 0.03) }, f).unwrap(),
        ])
        .unwrap();
        let s = abcd_to_s(&chain, 50.0, 50.0).unwrap();
        assert!(s.max_singular_value() <= 1.0 + 1e-9);
    }
}
