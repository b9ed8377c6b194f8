//! Power-dependent two-level-system loss: model evaluation and fitting.
//!
//! The internal loss of a resonator saturates with drive power as
//! `1/Qi = (F/Qi0) tanh(h f0 / 2 kB T) / sqrt(1 + (n/nc)^β) + 1/Q_other`,
//! producing the S-shaped loss-versus-photon-number curves of overcoupled
//! 2D resonators.

use crate::consts::{BOLTZMANN, PLANCK};
use crate::error::{Error, Result};
use crate::lm::{minimize, LmOptions};

/// Default sample temperature when unspecified, K.
pub const DEFAULT_TEMPERATURE: f64 = 0.015;

/// Parameters of the saturable-loss model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TlsParams {
    /// Intrinsic TLS loss `F/Q_{i,0}` (filling factor times loss tangent).
    pub f_q0: f64,
    /// Critical photon number where saturation sets in.
    pub n_c: f64,
    /// Saturation exponent.
    pub beta: f64,
    /// Power-independent quality factor.
    pub q_other: f64,
    pub f0: f64,
    pub temperature: f64,
}

impl TlsParams {
    pub fn validate(&self) -> Result<()> {
        if !self.f_q0.is_finite() || self.f_q0 < 0.0 {
            return Err(Error::Parameter(format!("f_q0 = {}; must be >= 0", self.f_q0)));
        }
        for (name, v) in [
            ("n_c", self.n_c),
            ("beta", self.beta),
            ("q_other", self.q_other),
            ("f0", self.f0),
            ("temperature", self.temperature),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Parameter(format!("{name} = {v}; must be > 0")));
            }
        }
        Ok(())
    }

    /// The thermal factor `tanh(h f0 / 2 kB T)`, in (0, 1].
    pub fn thermal_factor(&self) -> f64 {
        (PLANCK * self.f0 / (2.0 * BOLTZMANN * self.temperature)).tanh()
    }
}

/// Loss `1/Qi` at average photon number `n`.
pub fn tls_loss(p: &TlsParams, n: f64) -> Result<f64> {
    p.validate()?;
    if !n.is_finite() || n < 0.0 {
        return Err(Error::Parameter(format!("photon number {n}; must be >= 0")));
    }
    let saturation = (1.0 + (n / p.n_c).powf(p.beta)).sqrt();
    Ok(p.f_q0 * p.thermal_factor() / saturation + 1.0 / p.q_other)
}

/// One point of a loss-versus-photon-number sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossPoint {
    pub photon_number: f64,
    pub inv_qi: f64,
    pub weight: f64,
}

/// A loss sweep ordered by photon number.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSweep {
    points: Vec<LossPoint>,
}

impl LossSweep {
    pub fn new(mut points: Vec<LossPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Parameter("loss sweep is empty".into()));
        }
        for p in &points {
            if !p.photon_number.is_finite() || p.photon_number <= 0.0 {
                return Err(Error::Parameter(format!(
                    "photon number {}; must be > 0",
                    p.photon_number
                )));
            }
            if !p.weight.is_finite() || p.weight < 0.0 {
                return Err(Error::Parameter(format!("weight {}; must be >= 0", p.weight)));
            }
            if !p.inv_qi.is_finite() {
                return Err(Error::Parameter("loss value not finite".into()));
            }
        }
        points.sort_by(|a, b| a.photon_number.partial_cmp(&b.photon_number).unwrap());
        Ok(Self { points })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        Self::new(
            pairs
                .into_iter()
                .map(|(n, l)| LossPoint { photon_number: n, inv_qi: l, weight: 1.0 })
                .collect(),
        )
    }

    pub fn points(&self) -> &[LossPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn decades(&self) -> f64 {
        (self.points.last().unwrap().photon_number / self.points[0].photon_number).log10()
    }

    /// Mean loss over the lowest/highest decade of photon number.
    fn plateau(&self, high: bool) -> f64 {
        let (lo, hi) = if high {
            (self.points.last().unwrap().photon_number / 10.0, f64::INFINITY)
        } else {
            (0.0, self.points[0].photon_number * 10.0)
        };
        let sel: Vec<f64> = self
            .points
            .iter()
            .filter(|p| p.photon_number >= lo && p.photon_number <= hi)
            .map(|p| p.inv_qi)
            .collect();
        sel.iter().sum::<f64>() / sel.len() as f64
    }
}

/// Fit result: parameters with standard errors and the fit residual.
#[derive(Debug, Clone, PartialEq)]
pub struct TlsFitResult {
    pub params: TlsParams,
    pub f_q0_err: f64,
    pub n_c_err: f64,
    pub beta_err: f64,
    pub q_other_err: f64,
    /// RMS of weighted loss residuals at the optimum.
    pub residual_rms: f64,
}

/// How to treat the saturation exponent during the fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaHandling {
    /// Hold β fixed (default 1.0; the reference analyses report no β).
    Fixed(f64),
    /// Fit β together with the other parameters.
    Free,
}

impl Default for BetaHandling {
    fn default() -> Self {
        BetaHandling::Fixed(1.0)
    }
}

/// Weighted least squares of the loss model over a sweep.
///
/// Parameters are fitted in log space (all are positive); initial guesses
/// come from the two plateaus and the crossover point.
pub fn fit_tls(
    sweep: &LossSweep,
    f0: f64,
    temperature: f64,
    beta: BetaHandling,
) -> Result<TlsFitResult> {
    if sweep.len() < 6 {
        return Err(Error::Parameter(format!(
            "TLS fit needs at least 6 points, got {}",
            sweep.len()
        )));
    }
    if sweep.decades() < 2.0 {
        return Err(Error::Identifiability(format!(
            "sweep covers {:.2} decades of photon number; at least 2 required",
            sweep.decades()
        )));
    }
    if !f0.is_finite() || f0 <= 0.0 || !temperature.is_finite() || temperature <= 0.0 {
        return Err(Error::Parameter("f0 and temperature must be > 0".into()));
    }

    let low = sweep.plateau(false);
    let high = sweep.plateau(true);
    let spread = low - high;
    if !(spread > 0.0) || spread < 0.02 * high.abs().max(1e-300) {
        return Err(Error::Identifiability(
            "low- and high-power plateaus are indistinguishable; n_c cannot be determined".into(),
        ));
    }

    let thermal = TlsParams {
        f_q0: 1.0,
        n_c: 1.0,
        beta: 1.0,
        q_other: 1.0,
        f0,
        temperature,
    }
    .thermal_factor();
    let q_other_seed = 1.0 / high.max(1e-300);
    let f_q0_seed = (spread / thermal).max(1e-12);
    // crossover: first photon number where the loss drops halfway
    let mid = high + spread / 2.0;
    let n_c_seed = sweep
        .points
        .iter()
        .find(|p| p.inv_qi < mid)
        .map(|p| p.photon_number)
        .unwrap_or(sweep.points[sweep.len() / 2].photon_number)
        .max(1e-6);

    let (beta_fixed, fit_beta) = match beta {
        BetaHandling::Fixed(b) => {
            if !b.is_finite() || b <= 0.0 {
                return Err(Error::Parameter(format!("fixed beta {b}; must be > 0")));
            }
            (b, false)
        }
        BetaHandling::Free => (1.0, true),
    };

    let pts = sweep.points();
    let model = |f_q0: f64, n_c: f64, b: f64, q_other: f64, n: f64| {
        f_q0 * thermal / (1.0 + (n / n_c).powf(b)).sqrt() + 1.0 / q_other
    };
    let mut resid = |x: &[f64], out: &mut [f64]| {
        let f_q0 = x[0].exp();
        let n_c = x[1].exp();
        let q_other = x[2].exp();
        let b = if fit_beta { x[3].exp() } else { beta_fixed };
        for (i, p) in pts.iter().enumerate() {
            out[i] = p.weight * (model(f_q0, n_c, b, q_other, p.photon_number) - p.inv_qi);
        }
    };

    let mut seed = vec![f_q0_seed.ln(), n_c_seed.ln(), q_other_seed.ln()];
    let mut steps = vec![1e-6, 1e-6, 1e-6];
    if fit_beta {
        seed.push(0.0);
        steps.push(1e-6);
    }
    let fit = minimize(&mut resid, &seed, sweep.len(), &LmOptions::new(steps));
    if !fit.converged {
        return Err(Error::Fit(format!(
            "TLS fit did not converge after {} iterations (chi2 {:.3e})",
            fit.iterations, fit.chi2
        )));
    }
    let errs = fit.standard_errors();
    let f_q0 = fit.x[0].exp();
    let n_c = fit.x[1].exp();
    let q_other = fit.x[2].exp();
    let beta_out = if fit_beta { fit.x[3].exp() } else { beta_fixed };
    let params = TlsParams { f_q0, n_c, beta: beta_out, q_other, f0, temperature };
    params.validate()?;
    Ok(TlsFitResult {
        params,
        f_q0_err: f_q0 * errs[0],
        n_c_err: n_c * errs[1],
        q_other_err: q_other * errs[2],
        beta_err: if fit_beta { beta_out * errs[3] } else { 0.0 },
        residual_rms: (fit.chi2 / sweep.len() as f64).sqrt(),
    })
}

/// Evaluate the model over a log-spaced photon-number ladder (handy for
/// building synthetic sweeps).
pub fn synthetic_sweep(p: &TlsParams, n_lo: f64, n_hi: f64, count: usize) -> Result<LossSweep> {
    p.validate()?;
    if !(n_lo > 0.0 && n_hi > n_lo) || count < 2 {
        return Err(Error::Parameter("need 0 < n_lo < n_hi and at least 2 points".into()));
    }
    let step = (n_hi / n_lo).ln() / (count - 1) as f64;
    let mut pts = Vec::with_capacity(count);
    for i in 0..count {
        let n = n_lo * (step * i as f64).exp();
        pts.push(LossPoint { photon_number: n, inv_qi: tls_loss(p, n)?, weight: 1.0 });
    }
    LossSweep::new(pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row1() -> TlsParams {
        TlsParams {
            f_q0: 1.80e-5,
            n_c: 1.74,
            beta: 1.0,
            q_other: 7.7e5,
            f0: 4.49e9,
            temperature: DEFAULT_TEMPERATURE,
        }
    }

    fn row2() -> TlsParams {
        TlsParams {
            f_q0: 1.74e-5,
            n_c: 2.17,
            beta: 1.0,
            q_other: 2.57e5,
            f0: 4.61e9,
            temperature: DEFAULT_TEMPERATURE,
        }
    }

    #[test]
    fn loss_limits() {
        let p = row1();
        // saturation: the TLS term is suppressed by sqrt((n/nc)^beta); at
        // n = 1e12 nc that bound is f_q0/1e6, and far enough out the residual
        // drops below 1e-12 of the power-independent loss
        let hi = tls_loss(&p, 1e12 * p.n_c).unwrap();
        assert!(hi - 1.0 / p.q_other <= p.f_q0 / 1e6 * 1.000001);
        assert!(hi > 1.0 / p.q_other);
        let far = tls_loss(&p, 1e28 * p.n_c).unwrap();
        assert!((far - 1.0 / p.q_other).abs() / (1.0 / p.q_other) < 1e-12);
        // unsaturated low-temperature limit
        let cold = TlsParams { temperature: 1e-6, ..p };
        let lo = tls_loss(&cold, 0.0).unwrap();
        assert!((lo - (p.f_q0 + 1.0 / p.q_other)).abs() < 1e-18);
    }

    #[test]
    fn loss_at_critical_photon_number() {
        let p = row1();
        let expected = 1.80e-5 * p.thermal_factor() / 2f64.sqrt() + 1.0 / 7.7e5;
        let got = tls_loss(&p, p.n_c).unwrap();
        assert!((got - expected).abs() < 1e-20);
    }

    #[test]
    fn thermal_factor_properties() {
        let p = row1();
        let t = p.thermal_factor();
        assert!(t > 0.0 && t <= 1.0);
        let colder = TlsParams { temperature: 1e-4, ..p }.thermal_factor();
        assert!(colder > t || (1.0 - colder) < 1e-12);
    }

    #[test]
    fn loss_is_strictly_decreasing() {
        let p = row1();
        let mut prev = f64::INFINITY;
        for k in -3..=10 {
            let n = 10f64.powi(k);
            let l = tls_loss(&p, n).unwrap();
            assert!(l < prev, "loss not decreasing at n = {n}");
            prev = l;
        }
    }

    #[test]
    fn noise_free_recovery_is_exact() {
        for truth in [row1(), row2()] {
            let sweep = synthetic_sweep(&truth, 1.0, 1e8, 41).unwrap();
            let fit = fit_tls(&sweep, truth.f0, truth.temperature, BetaHandling::Fixed(1.0))
                .unwrap();
            assert!(
                (fit.params.f_q0 / truth.f_q0 - 1.0).abs() < 1e-6,
                "f_q0 {} vs {}",
                fit.params.f_q0,
                truth.f_q0
            );
            assert!((fit.params.n_c / truth.n_c - 1.0).abs() < 1e-6);
            assert!((fit.params.q_other / truth.q_other - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn flat_sweep_is_unidentifiable() {
        let sweep = LossSweep::from_pairs((0..12).map(|i| (10f64.powi(i - 2), 3e-6))).unwrap();
        match fit_tls(&sweep, 4.5e9, DEFAULT_TEMPERATURE, BetaHandling::default()) {
            Err(Error::Identifiability(_)) => {}
            other => panic!("expected identifiability error, got {other:?}"),
        }
    }

    #[test]
    fn narrow_range_is_rejected() {
        let p = row1();
        let sweep = synthetic_sweep(&p, 1.0, 10.0, 8).unwrap();
        assert!(matches!(
            fit_tls(&sweep, p.f0, p.temperature, BetaHandling::default()),
            Err(Error::Identifiability(_))
        ));
    }

    #[test]
    fn free_beta_round_trip() {
        let truth = TlsParams { beta: 0.7, ..row1() };
        let sweep = synthetic_sweep(&truth, 0.1, 1e8, 51).unwrap();
        let fit = fit_tls(&sweep, truth.f0, truth.temperature, BetaHandling::Free).unwrap();
        assert!((fit.params.beta / 0.7 - 1.0).abs() < 1e-4, "beta {}", fit.params.beta);
    }
}
