//! Resonance extraction from complex traces.
//!
//! The pipeline: remove cable delay and baseline (preprocess), fit the
//! resonance circle algebraically, fit phase versus frequency for `f0` and
//! the loaded `Q`, read the coupling from the circle diameter, then jointly
//! refine all shape parameters against the resonance model. Hanger fits offer
//! the diameter correction (replacing `1/Qc` by `cos θ / Qc`); reflection
//! fits use the factor-2 diameter and plain subtraction, which is exactly the
//! combination whose failure modes these tools expose.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::consts::HBAR;
use crate::error::{Error, Result};
use crate::lm::{minimize, LmOptions};
use crate::rfnet::{ComplexTrace, FrequencyGrid};

/// Ideal hanger resonance: `1 − (Q/Qc) e^{jθ} / (1 + 2jQ δω/ω)`.
pub fn hanger_response(f: f64, f0: f64, q: f64, qc: f64, theta: f64) -> Complex64 {
    resonance_response(f, f0, q, qc, theta, 1.0)
}

/// Ideal reflection resonance: `1 − 2 (Q/Qc) e^{jθ} / (1 + 2jQ δω/ω)`.
pub fn reflection_response(f: f64, f0: f64, q: f64, qc: f64, theta: f64) -> Complex64 {
    resonance_response(f, f0, q, qc, theta, 2.0)
}

fn resonance_response(f: f64, f0: f64, q: f64, qc: f64, theta: f64, depth: f64) -> Complex64 {
    let x = 2.0 * q * (f - f0) / f;
    Complex64::ONE - depth * (q / qc) * Complex64::from_polar(1.0, theta) / Complex64::new(1.0, x)
}

/// Which fit produced a result and with what correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMode {
    HangerDcm,
    HangerNaive,
    Reflection,
    ReflectionDcm,
}

impl FitMode {
    pub fn label(&self) -> &'static str {
        match self {
            FitMode::HangerDcm => "hanger_dcm",
            FitMode::HangerNaive => "hanger_naive",
            FitMode::Reflection => "reflection",
            FitMode::ReflectionDcm => "reflection_dcm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HangerCorrection {
    Dcm,
    Naive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReflectionCorrection {
    None,
    /// Applies `cos θ` anyway; kept to demonstrate that the correction does
    /// not rescue reflection measurements.
    Dcm,
}

/// Everything a resonance fit reports.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonatorFitResult {
    pub f0: f64,
    pub q_total: f64,
    /// Coupling quality factor from the circle diameter (uncorrected).
    pub q_coupling: f64,
    /// Internal quality factor per the selected correction. May be negative;
    /// see `pathology`.
    pub q_internal: f64,
    /// Rotation of the resonance diameter at the off-resonance point,
    /// counterclockwise from the positive real axis.
    pub theta: f64,
    /// Off-resonance magnitude of the raw trace.
    pub baseline_a: f64,
    pub mode: FitMode,
    pub f0_err: f64,
    pub q_err: f64,
    pub qc_err: f64,
    pub qi_err: f64,
    pub theta_err: f64,
    /// Set when the extracted internal quality factor is non-positive, an
    /// unphysical apparent gain.
    pub pathology: bool,
    /// RMS of the complex model residual at the optimum.
    pub residual_rms: f64,
}

/// Delay- and baseline-normalized trace.
#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessResult {
    /// Trace after delay removal, divided by the off-resonance point.
    pub trace: ComplexTrace,
    /// Removed delay in seconds.
    pub delay: f64,
    /// Off-resonance magnitude of the input trace.
    pub baseline_a: f64,
    /// Off-resonance point of the delay-corrected input trace.
    pub off_resonance_point: Complex64,
}

/// Fit tuning knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    /// Fraction of points per edge used for delay and baseline estimation.
    pub edge_fraction: f64,
    /// Refine the edge delay estimate by minimizing the circle residual.
    pub refine_delay: bool,
    /// Phase-fit residual (radians RMS) above which the fit is rejected.
    pub phase_residual_limit: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { edge_fraction: 0.2, refine_delay: true, phase_residual_limit: 0.8 }
    }
}

/// Algebraic least-squares circle fit result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleFit {
    pub center: Complex64,
    pub radius: f64,
    pub rms_residual: f64,
}

/// Phase-versus-frequency fit result for `θ(f) = θ0 + 2 atan(2Q (1 − f/f0))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseFit {
    pub f0: f64,
    /// Signed: negative means the circle is traversed in the opposite sense.
    pub q_total: f64,
    pub theta0: f64,
    pub rms_residual: f64,
}

/// Moment-based least-squares circle through a point cloud; exact on
/// noise-free circles.
pub fn circle_fit(points: &[Complex64]) -> Result<CircleFit> {
    if points.len() < 5 {
        return Err(Error::Parameter(format!(
            "circle fit needs at least 5 points, got {}",
            points.len()
        )));
    }
    // minimize sum (x^2 + y^2 - p x - q y - s)^2, linear in (p, q, s)
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut sz, mut sxz, mut syz) = (0.0, 0.0, 0.0);
    for v in points {
        let (x, y) = (v.re, v.im);
        let z = x * x + y * y;
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
        sz += z;
        sxz += x * z;
        syz += y * z;
    }
    let a = nalgebra::Matrix3::new(sxx, sxy, sx, sxy, syy, sy, sx, sy, n);
    let b = nalgebra::Vector3::new(sxz, syz, sz);
    let det = a.determinant();
    let scale = sxx * syy * n;
    if !det.is_finite() || det.abs() <= 1e-12 * scale.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::Fit("circle fit degenerate (collinear points)".into()));
    }
    let sol = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Fit("circle fit degenerate (collinear points)".into()))?;
    let cx = sol[0] / 2.0;
    let cy = sol[1] / 2.0;
    let r2 = sol[2] + cx * cx + cy * cy;
    if !r2.is_finite() || r2 <= 0.0 {
        return Err(Error::Fit("circle fit produced a non-positive radius".into()));
    }
    let center = Complex64::new(cx, cy);
    let radius = r2.sqrt();
    let rms = (points
        .iter()
        .map(|v| {
            let d = (v - center).norm() - radius;
            d * d
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(CircleFit { center, radius, rms_residual: rms })
}

fn unwrap_phases(raw: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out = Vec::new();
    let mut offset = 0.0;
    let mut prev = f64::NAN;
    for p in raw {
        if prev.is_finite() {
            let mut d = p + offset - prev;
            while d > PI {
                offset -= 2.0 * PI;
                d -= 2.0 * PI;
            }
            while d < -PI {
                offset += 2.0 * PI;
                d += 2.0 * PI;
            }
        }
        let v = p + offset;
        out.push(v);
        prev = v;
    }
    out
}

/// Arctangent fit of the angles of `trace − center`.
pub fn phase_fit(trace: &ComplexTrace, center: Complex64) -> Result<PhaseFit> {
    phase_fit_with(trace, center, &FitOptions::default())
}

pub fn phase_fit_with(trace: &ComplexTrace, center: Complex64, opts: &FitOptions) -> Result<PhaseFit> {
    let f = trace.grid().points();
    let n = f.len();
    if n < 5 {
        return Err(Error::Parameter("phase fit needs at least 5 points".into()));
    }
    let ang = unwrap_phases(trace.values().iter().map(|v| (v - center).arg()));

    // seeds from the magnitude profile relative to the edge mean
    let ne = edge_count(n, FitOptions::default().edge_fraction);
    let p_rough = edge_mean(trace.values(), ne);
    let dist: Vec<f64> = trace.values().iter().map(|v| (v - p_rough).norm()).collect();
    let (imax, dmax) = argmax(&dist);
    let f0_seed = f[imax];
    let half = dmax / 2.0;
    let fw = width_above(f, &dist, half).max(trace.grid().span() / n as f64);
    let q_seed = f0_seed / fw;
    // orientation: falling phase across the trace means positive Q
    let q_seed = if ang[n - 1] < ang[0] { q_seed } else { -q_seed };

    let mut resid = |x: &[f64], out: &mut [f64]| {
        let (th0, q, f0) = (x[0], x[1], x[2]);
        for (i, (&fi, &ai)) in f.iter().zip(&ang).enumerate() {
            out[i] = th0 + 2.0 * (2.0 * q * (1.0 - fi / f0)).atan() - ai;
        }
    };
    let lw = f0_seed / q_seed.abs();
    let opts_lm = LmOptions::new(vec![1e-6, q_seed.abs() * 1e-6, lw * 1e-6]);
    let fit = minimize(&mut resid, &[ang[imax], q_seed, f0_seed], n, &opts_lm);
    let rms = (fit.chi2 / n as f64).sqrt();
    if !fit.converged {
        return Err(Error::Fit(format!(
            "phase fit did not converge after {} iterations (residual {rms:.3} rad RMS)",
            fit.iterations
        )));
    }
    if rms > opts.phase_residual_limit {
        return Err(Error::Fit(format!(
            "phase fit residual {rms:.3} rad RMS exceeds {}; no coherent resonance",
            opts.phase_residual_limit
        )));
    }
    Ok(PhaseFit { f0: fit.x[2], q_total: fit.x[1], theta0: fit.x[0], rms_residual: rms })
}

fn edge_count(n: usize, fraction: f64) -> usize {
    ((n as f64 * fraction) as usize).clamp(3, n / 2)
}

fn edge_indices(n: usize, ne: usize) -> impl Iterator<Item = usize> {
    (0..ne).chain(n - ne..n)
}

fn edge_mean(values: &[Complex64], ne: usize) -> Complex64 {
    let n = values.len();
    let sum: Complex64 = edge_indices(n, ne).map(|i| values[i]).sum();
    sum / (2 * ne) as f64
}

fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &v) in values.iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

fn width_above(f: &[f64], dist: &[f64], threshold: f64) -> f64 {
    let first = dist.iter().position(|&d| d > threshold);
    let last = dist.iter().rposition(|&d| d > threshold);
    match (first, last) {
        (Some(a), Some(b)) if b > a => f[b] - f[a],
        _ => 0.0,
    }
}

/// Slope of phase versus frequency over the edge windows, from per-point
/// phase increments (immune to winding through the resonance) — then the
/// implied delay.
fn edge_delay_estimate(f: &[f64], values: &[Complex64], ne: usize) -> f64 {
    let n = f.len();
    let mut num = 0.0;
    let mut den = 0.0;
    let mut window = |lo: usize, hi: usize| {
        for i in lo..hi.saturating_sub(1) {
            let dphi = (values[i + 1] * values[i].conj()).arg();
            let df = f[i + 1] - f[i];
            num += dphi * df;
            den += df * df;
        }
    };
    window(0, ne);
    window(n - ne, n);
    if den == 0.0 {
        return 0.0;
    }
    -(num / den) / (2.0 * PI)
}

fn apply_delay(trace: &ComplexTrace, tau: f64) -> ComplexTrace {
    let values = trace
        .iter()
        .map(|(f, v)| v * Complex64::from_polar(1.0, 2.0 * PI * f * tau))
        .collect();
    ComplexTrace::new(trace.grid().clone(), values).expect("delay rotation keeps values finite")
}

fn circle_rms_at_delay(trace: &ComplexTrace, tau: f64) -> f64 {
    match circle_fit(apply_delay(trace, tau).values()) {
        Ok(c) => c.rms_residual,
        Err(_) => f64::INFINITY,
    }
}

/// Golden-section refinement of the delay around the edge estimate: the true
/// delay is the one that makes the trace most circular.
fn refine_delay(trace: &ComplexTrace, tau0: f64) -> f64 {
    let span = trace.grid().span();
    let (mut a, mut b) = (tau0 - 0.2 / span, tau0 + 0.2 / span);
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - gr * (b - a);
    let mut d = a + gr * (b - a);
    let mut fc = circle_rms_at_delay(trace, c);
    let mut fd = circle_rms_at_delay(trace, d);
    for _ in 0..90 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = circle_rms_at_delay(trace, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = circle_rms_at_delay(trace, d);
        }
    }
    let mid = 0.5 * (a + b);
    let rms_mid = circle_rms_at_delay(trace, mid);
    if rms_mid.is_finite() && rms_mid <= circle_rms_at_delay(trace, tau0) {
        mid
    } else {
        tau0
    }
}

/// Remove cable delay and normalize the off-resonance point to `1 + 0j`.
pub fn preprocess(trace: &ComplexTrace, f0_guess: Option<f64>) -> Result<PreprocessResult> {
    preprocess_with(trace, f0_guess, &FitOptions::default())
}

pub fn preprocess_with(
    trace: &ComplexTrace,
    f0_guess: Option<f64>,
    opts: &FitOptions,
) -> Result<PreprocessResult> {
    let f = trace.grid().points();
    let n = f.len();
    if n < 16 {
        return Err(Error::Parameter(format!("trace of {n} points is too short to preprocess")));
    }
    let ne = edge_count(n, opts.edge_fraction);

    if let Some(guess) = f0_guess {
        if guess < f[0] || guess > f[n - 1] {
            return Err(Error::Range(format!(
                "resonance guess {guess} Hz outside trace span {}-{} Hz",
                f[0],
                f[n - 1]
            )));
        }
    }

    // detection runs against the edge delay estimate alone; refinement later
    // assumes a resonance is actually present
    let tau_edges = edge_delay_estimate(f, trace.values(), ne);
    let rough = apply_delay(trace, tau_edges);
    let p_rough = edge_mean(rough.values(), ne);
    if p_rough.norm() == 0.0 {
        return Err(Error::Fit("off-resonance level is zero; cannot normalize".into()));
    }

    // resonance prominence against point-to-point noise over the edges (a
    // smooth arc has tiny increments even when the windows sweep the circle)
    let dist: Vec<f64> = rough.values().iter().map(|v| (v - p_rough).norm()).collect();
    let (_, dmax) = argmax(&dist);
    let noise = {
        let vals = rough.values();
        let mut sum = 0.0;
        let mut count = 0usize;
        for i in edge_indices(n, ne) {
            if i + 1 < n {
                sum += (vals[i + 1] - vals[i]).norm_sqr();
                count += 1;
            }
        }
        ((sum / count.max(1) as f64) / 2.0).sqrt().max(1e-12 * p_rough.norm())
    };
    if dmax < 6.0 * noise {
        return Err(Error::Fit(format!(
            "no resonance found: peak deviation {dmax:.3e} below noise level {noise:.3e}"
        )));
    }

    // span must cover several estimated linewidths: the half-maximum width of
    // an ideal resonance is ~1.73 linewidths
    let fw = width_above(f, &dist, dmax / 2.0);
    let span = trace.grid().span();
    if fw > 0.0 && span < 3.2 * fw {
        return Err(Error::Range(format!(
            "trace spans about {:.1} estimated linewidths; at least 6 required",
            6.0 * span / (3.46 * fw)
        )));
    }

    let tau = if opts.refine_delay { refine_delay(trace, tau_edges) } else { tau_edges };
    let corrected = apply_delay(trace, tau);
    let p_off = edge_mean(corrected.values(), ne);
    if p_off.norm() == 0.0 {
        return Err(Error::Fit("off-resonance level is zero; cannot normalize".into()));
    }
    let normalized = corrected.map(|v| v / p_off);
    Ok(PreprocessResult {
        trace: normalized,
        delay: tau,
        baseline_a: p_off.norm(),
        off_resonance_point: p_off,
    })
}

/// Maximum rotation compatible with an off-resonance level `a`:
/// the resonance circle is tangent to the unity circle at `θ = cos⁻¹ a`.
pub fn theta_max(a: f64) -> Result<f64> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::Parameter(format!("baseline {a} outside (0, 1]")));
    }
    Ok(a.acos())
}

/// Inputs for the intracavity photon-number conversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonNumberParams {
    /// Environment characteristic impedance, Ohms.
    pub z0: f64,
    /// Resonator impedance, Ohms.
    pub zr: f64,
    pub q_total: f64,
    pub q_coupling: f64,
    pub f0: f64,
    /// Applied power at the sample, W.
    pub p_app: f64,
}

/// Average photon number `⟨n⟩ = 2/(ħ ω0²) · (Z0/Zr) · (Q²/Qc) · P_app`.
pub fn photon_number(p: &PhotonNumberParams) -> Result<f64> {
    for (name, v) in [
        ("z0", p.z0),
        ("zr", p.zr),
        ("q_total", p.q_total),
        ("q_coupling", p.q_coupling),
        ("f0", p.f0),
    ] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::Parameter(format!("{name} = {v}; must be > 0")));
        }
    }
    if !p.p_app.is_finite() || p.p_app < 0.0 {
        return Err(Error::Parameter(format!("p_app = {}; must be >= 0", p.p_app)));
    }
    let w0 = 2.0 * PI * p.f0;
    Ok(2.0 / (HBAR * w0 * w0) * (p.z0 / p.zr) * (p.q_total * p.q_total / p.q_coupling) * p.p_app)
}

/// dBm to Watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

struct PipelineFit {
    f0: f64,
    q: f64,
    qc: f64,
    theta: f64,
    baseline_a: f64,
    f0_err: f64,
    q_err: f64,
    qc_err: f64,
    theta_err: f64,
    cov: Option<nalgebra::DMatrix<f64>>,
    resid_scale: f64,
    residual_rms: f64,
}

/// Shared circle/phase/refinement pipeline. `depth` is 1 for hanger traces
/// and 2 for reflection traces.
fn fit_pipeline(trace: &ComplexTrace, depth: f64, opts: &FitOptions) -> Result<PipelineFit> {
    let pre = preprocess_with(trace, None, opts)?;
    let z = &pre.trace;
    let f = z.grid().points();
    let n = f.len();

    let circle = circle_fit(z.values())?;
    let phase = phase_fit_with(z, circle.center, opts)?;
    if phase.q_total <= 0.0 {
        return Err(Error::Fit(
            "resonance circle traversed counterclockwise; not an ideal-resonance trace".into(),
        ));
    }

    // off-resonance point refined on the fitted circle: the asymptote of the
    // phase model sits at angle theta0 - pi from the center
    let p_fine = circle.center + Complex64::from_polar(circle.radius, phase.theta0 - PI);
    if p_fine.norm() == 0.0 {
        return Err(Error::Fit("refined off-resonance point is zero".into()));
    }
    let center = circle.center / p_fine;
    let radius = circle.radius / p_fine.norm();
    let zn: Vec<Complex64> = z.values().iter().map(|v| v / p_fine).collect();

    let theta_seed = (Complex64::ONE - center).arg();
    let diameter = 2.0 * radius;
    let qc_seed = depth * phase.q_total / diameter;

    // joint refinement of (f0, ln Q, ln Qc, theta) against the model
    let mut resid = |x: &[f64], out: &mut [f64]| {
        let (f0, q, qc, th) = (x[0], x[1].exp(), x[2].exp(), x[3]);
        for (i, (&fi, zi)) in f.iter().zip(&zn).enumerate() {
            let r = resonance_response(fi, f0, q, qc, th, depth) - zi;
            out[2 * i] = r.re;
            out[2 * i + 1] = r.im;
        }
    };
    let lw = phase.f0 / phase.q_total;
    let lm_opts = LmOptions::new(vec![lw * 1e-6, 1e-7, 1e-7, 1e-7]);
    let seed = [phase.f0, phase.q_total.ln(), qc_seed.max(1e-3).ln(), theta_seed];
    let fit = minimize(&mut resid, &seed, 2 * n, &lm_opts);
    if !fit.converged {
        return Err(Error::Fit(format!(
            "joint refinement did not converge after {} iterations (chi2 {:.3e})",
            fit.iterations, fit.chi2
        )));
    }
    let errs = fit.standard_errors();
    let q = fit.x[1].exp();
    let qc = fit.x[2].exp();
    let dof = (2 * n).saturating_sub(4).max(1) as f64;
    Ok(PipelineFit {
        f0: fit.x[0],
        q,
        qc,
        theta: fit.x[3],
        baseline_a: pre.baseline_a * p_fine.norm(),
        f0_err: errs[0],
        q_err: q * errs[1],
        qc_err: qc * errs[2],
        theta_err: errs[3],
        cov: fit.curvature_inverse,
        resid_scale: fit.chi2 / dof,
        residual_rms: (fit.chi2 / (2 * n) as f64).sqrt(),
    })
}

/// Delta-method error for `1/Qi` combinations in the fit parameter basis
/// `(f0, lnQ, lnQc, θ)`; `cos_weight` is 1 when the θ correction is applied.
fn qi_error(p: &PipelineFit, cos_weight: f64, qi: f64) -> f64 {
    match &p.cov {
        None => f64::NAN,
        Some(cov) => {
            let g = nalgebra::DVector::from_column_slice(&[
                0.0,
                -1.0 / p.q,
                (1.0 - cos_weight + cos_weight * p.theta.cos()) / p.qc,
                cos_weight * p.theta.sin() / p.qc,
            ]);
            let var = (g.transpose() * cov * &g)[(0, 0)] * p.resid_scale;
            qi * qi * var.max(0.0).sqrt()
        }
    }
}

fn package(p: PipelineFit, inv_qi: f64, mode: FitMode, cos_weight: f64) -> ResonatorFitResult {
    let q_internal = if inv_qi != 0.0 { 1.0 / inv_qi } else { f64::INFINITY };
    let qi_err = qi_error(&p, cos_weight, q_internal);
    ResonatorFitResult {
        f0: p.f0,
        q_total: p.q,
        q_coupling: p.qc,
        q_internal,
        theta: p.theta,
        baseline_a: p.baseline_a,
        mode,
        f0_err: p.f0_err,
        q_err: p.q_err,
        qc_err: p.qc_err,
        qi_err,
        theta_err: p.theta_err,
        pathology: q_internal <= 0.0,
        residual_rms: p.residual_rms,
    }
}

/// Fit a hanger-mode trace (diameter = Q/Qc).
pub fn fit_hanger(trace: &ComplexTrace, correction: HangerCorrection) -> Result<ResonatorFitResult> {
    fit_hanger_with(trace, correction, &FitOptions::default())
}

pub fn fit_hanger_with(
    trace: &ComplexTrace,
    correction: HangerCorrection,
    opts: &FitOptions,
) -> Result<ResonatorFitResult> {
    let p = fit_pipeline(trace, 1.0, opts)?;
    let (inv_qi, mode, w) = match correction {
        HangerCorrection::Dcm => (1.0 / p.q - p.theta.cos() / p.qc, FitMode::HangerDcm, 1.0),
        HangerCorrection::Naive => (1.0 / p.q - 1.0 / p.qc, FitMode::HangerNaive, 0.0),
    };
    Ok(package(p, inv_qi, mode, w))
}

/// Fit a reflection-mode trace (diameter = 2Q/Qc, plain `1/Q − 1/Qc`).
pub fn fit_reflection(
    trace: &ComplexTrace,
    correction: ReflectionCorrection,
) -> Result<ResonatorFitResult> {
    fit_reflection_with(trace, correction, &FitOptions::default())
}

pub fn fit_reflection_with(
    trace: &ComplexTrace,
    correction: ReflectionCorrection,
    opts: &FitOptions,
) -> Result<ResonatorFitResult> {
    let p = fit_pipeline(trace, 2.0, opts)?;
    let (inv_qi, mode, w) = match correction {
        ReflectionCorrection::None => (1.0 / p.q - 1.0 / p.qc, FitMode::Reflection, 0.0),
        ReflectionCorrection::Dcm => {
            (1.0 / p.q - p.theta.cos() / p.qc, FitMode::ReflectionDcm, 1.0)
        }
    };
    Ok(package(p, inv_qi, mode, w))
}
