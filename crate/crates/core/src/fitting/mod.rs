//! Box-bounded least-squares fits of the path-loss models and shadow-fading
//! statistics of their residuals.

mod lm;

pub use lm::{minimize, LmOptions, LmReport};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::geometry::{MeasurementPoint, Scenario};
use crate::pl_models::{ci_reference_db, ModelFamily, ModelParams, ReferencePoint, VariableMask};

/// One (geometry, path loss) sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub point: MeasurementPoint,
    pub pl_db: f64,
}

impl Observation {
    pub fn new(point: MeasurementPoint, pl_db: f64) -> Self {
        Observation { point, pl_db }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitBounds {
    pub lower: [f64; 5],
    pub upper: [f64; 5],
}

impl FitBounds {
    pub fn new(lower: [f64; 5], upper: [f64; 5]) -> Result<Self> {
        let b = FitBounds { lower, upper };
        b.validate()?;
        Ok(b)
    }

    pub fn fi() -> Self {
        FitBounds {
            lower: [10.0, 1.0, 1.0, 0.0, 0.0],
            upper: [50.0, 3.0, 3.0, 2.0, 2.0],
        }
    }

    /// Intercept frozen at `reference_db`.
    pub fn ci(reference_db: f64) -> Self {
        FitBounds {
            lower: [reference_db, 1.0, 1.0, 0.0, 0.0],
            upper: [reference_db, 3.0, 3.0, 2.0, 2.0],
        }
    }

    pub fn for_family(family: ModelFamily, scenario: Scenario) -> Self {
        if family.is_ci() {
            Self::ci(ci_reference_db(scenario))
        } else {
            Self::fi()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for i in 0..5 {
            let (lo, hi) = (self.lower[i], self.upper[i]);
            if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Invariant {
                    name: "lower <= upper",
                    detail: format!("slot {i}: [{lo}, {hi}]"),
                });
            }
        }
        Ok(())
    }

    pub fn contains(&self, v: &[f64; 5]) -> bool {
        (0..5).all(|i| self.lower[i] <= v[i] && v[i] <= self.upper[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iterations: usize,
    pub ftol: f64,
    pub xtol: f64,
    pub gtol: f64,
    /// A parameter within this fraction of its box width from a bound is
    /// reported as bound-active.
    pub active_tol: f64,
    pub reference: ReferencePoint,
}

impl Default for FitOptions {
    fn default() -> Self {
        let lm = LmOptions::default();
        FitOptions {
            max_iterations: lm.max_iterations,
            ftol: lm.ftol,
            xtol: lm.xtol,
            gtol: lm.gtol,
            active_tol: 1e-4,
            reference: ReferencePoint::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: ModelParams,
    /// Observed minus predicted, dB, in dataset order.
    pub residuals: Vec<f64>,
    pub sf_mu: f64,
    pub sf_sigma: f64,
    pub bounds_active: [bool; 5],
    /// Parameters that were solved for (not frozen, not masked).
    pub free: [bool; 5],
    pub iterations: usize,
    pub converged: bool,
}

impl FitResult {
    pub fn rmse(&self) -> f64 {
        (self.residuals.iter().map(|r| r * r).sum::<f64>() / self.residuals.len() as f64).sqrt()
    }
}

fn active_slots(family: ModelFamily, mask: VariableMask) -> [bool; 5] {
    if family.is_traditional() {
        [true, true, false, false, false]
    } else {
        let [d1, d2, tt, tr] = mask.flags();
        [true, d1, d2, tt, tr]
    }
}

fn template(family: ModelFamily, mask: VariableMask, reference: ReferencePoint) -> ModelParams {
    let mut t = ModelParams::new(family, 0.0, (0.0, 0.0), (0.0, 0.0));
    if !family.is_traditional() {
        t = t.with_mask(mask);
    }
    t.reference = reference;
    t
}

/// Model row: PL = Σ v_i · row_i, since every family is linear in its parameters.
fn design_row(tpl: &ModelParams, point: &MeasurementPoint, slots: &[bool; 5]) -> Result<[f64; 5]> {
    let zero = tpl.with_vector([0.0; 5]).eval(point)?;
    let mut row = [0.0; 5];
    for i in 0..5 {
        if slots[i] {
            let mut e = [0.0; 5];
            e[i] = 1.0;
            row[i] = tpl.with_vector(e).eval(point)? - zero;
        }
    }
    Ok(row)
}

fn box_map(u: f64, lo: f64, hi: f64) -> (f64, f64) {
    let p = lo + (hi - lo) * (1.0 + u.sin()) / 2.0;
    (p.clamp(lo, hi), (hi - lo) * u.cos() / 2.0)
}

/// Bounded fit started from the midpoint of `bounds`.
pub fn fit_model(
    dataset: &[Observation],
    family: ModelFamily,
    mask: VariableMask,
    bounds: &FitBounds,
    options: &FitOptions,
) -> Result<FitResult> {
    bounds.validate()?;
    if dataset.is_empty() {
        return Err(Error::Empty("fit dataset"));
    }
    let slots = active_slots(family, mask);
    let free: [bool; 5] = std::array::from_fn(|i| slots[i] && bounds.lower[i] < bounds.upper[i]);
    let free_idx: Vec<usize> = (0..5).filter(|&i| free[i]).collect();
    if dataset.len() < free_idx.len() {
        return Err(Error::UnderDetermined {
            points: dataset.len(),
            params: free_idx.len(),
        });
    }

    let tpl = template(family, mask, options.reference);
    let rows: Vec<[f64; 5]> = dataset
        .iter()
        .map(|o| {
            o.point.validate()?;
            design_row(&tpl, &o.point, &slots)
        })
        .collect::<Result<_>>()?;
    let y: Vec<f64> = dataset.iter().map(|o| o.pl_db).collect();

    // frozen slots sit at their bound; masked slots are zero
    let mut fixed = [0.0; 5];
    for i in 0..5 {
        if slots[i] && !free[i] {
            fixed[i] = bounds.lower[i];
        }
    }
    let to_params = |u: &DVector<f64>| -> ([f64; 5], [f64; 5]) {
        let mut v = fixed;
        let mut dv = [0.0; 5];
        for (k, &i) in free_idx.iter().enumerate() {
            let (p, d) = box_map(u[k], bounds.lower[i], bounds.upper[i]);
            v[i] = p;
            dv[i] = d;
        }
        (v, dv)
    };

    let lm_options = LmOptions {
        max_iterations: options.max_iterations,
        ftol: options.ftol,
        xtol: options.xtol,
        gtol: options.gtol,
    };
    let report = minimize(DVector::zeros(free_idx.len()), dataset.len(), &lm_options, |u, r, jac| {
        let (v, dv) = to_params(u);
        for (n, row) in rows.iter().enumerate() {
            let pred: f64 = (0..5).map(|i| v[i] * row[i]).sum();
            r[n] = pred - y[n];
        }
        if let Some(j) = jac {
            for (n, row) in rows.iter().enumerate() {
                for (k, &i) in free_idx.iter().enumerate() {
                    j[(n, k)] = row[i] * dv[i];
                }
            }
        }
    });

    let (v, _) = to_params(&report.x);
    let params = tpl.with_vector(v);
    let residuals: Vec<f64> = rows
        .iter()
        .zip(&y)
        .map(|(row, obs)| obs - (0..5).map(|i| v[i] * row[i]).sum::<f64>())
        .collect();
    let (sf_mu, sf_sigma) = mean_sigma(&residuals);
    let bounds_active = std::array::from_fn(|i| {
        if !free[i] {
            return false;
        }
        let width = bounds.upper[i] - bounds.lower[i];
        v[i] - bounds.lower[i] <= options.active_tol * width || bounds.upper[i] - v[i] <= options.active_tol * width
    });
    Ok(FitResult {
        params,
        residuals,
        sf_mu,
        sf_sigma,
        bounds_active,
        free,
        iterations: report.iterations,
        converged: report.converged,
    })
}

fn mean_sigma(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mu = x.iter().sum::<f64>() / n;
    if x.len() < 2 {
        return (mu, 0.0);
    }
    let var = x.iter().map(|r| (r - mu).powi(2)).sum::<f64>() / (n - 1.0);
    (mu, var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfSample {
    pub x: f64,
    pub empirical: f64,
    pub gaussian: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShadowFadingStats {
    pub mu: f64,
    /// Unbiased sample standard deviation.
    pub sigma: f64,
    /// Sorted residuals with empirical and fitted-Gaussian CDFs.
    pub cdf: Vec<CdfSample>,
}

impl ShadowFadingStats {
    /// Kolmogorov–Smirnov distance between the empirical and fitted CDFs.
    pub fn ks_statistic(&self) -> f64 {
        let n = self.cdf.len() as f64;
        self.cdf
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let below = i as f64 / n;
                (s.empirical - s.gaussian).abs().max((s.gaussian - below).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// 5% two-sided KS critical value for large n.
pub fn ks_critical_value(n: usize) -> f64 {
    1.36 / (n as f64).sqrt()
}

fn gaussian_cdf(x: f64, mu: f64, sigma: f64) -> f64 {
    if sigma > 0.0 {
        Normal::new(mu, sigma).map(|d| d.cdf(x)).unwrap_or(f64::NAN)
    } else if x >= mu {
        1.0
    } else {
        0.0
    }
}

pub fn shadow_fading_stats(residuals: &[f64]) -> Result<ShadowFadingStats> {
    if residuals.len() < 2 {
        return Err(Error::Empty("need at least two residuals"));
    }
    let (mu, sigma) = mean_sigma(residuals);
    let mut sorted = residuals.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let cdf = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| CdfSample {
            x,
            empirical: (i + 1) as f64 / n,
            gaussian: gaussian_cdf(x, mu, sigma),
        })
        .collect();
    Ok(ShadowFadingStats { mu, sigma, cdf })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodnessReport {
    pub n: usize,
    pub rmse: f64,
    /// Mean of observed minus predicted.
    pub mean_error: f64,
    pub max_abs_error: f64,
}

pub fn goodness_report(fit: &FitResult, holdout: &[Observation]) -> Result<GoodnessReport> {
    if holdout.is_empty() {
        return Err(Error::Empty("holdout"));
    }
    let errors: Vec<f64> = holdout
        .iter()
        .map(|o| fit.params.eval(&o.point).map(|p| o.pl_db - p))
        .collect::<Result<_>>()?;
    let n = errors.len() as f64;
    Ok(GoodnessReport {
        n: errors.len(),
        rmse: (errors.iter().map(|e| e * e).sum::<f64>() / n).sqrt(),
        mean_error: errors.iter().sum::<f64>() / n,
        max_abs_error: errors.iter().map(|e| e.abs()).fold(0.0, f64::max),
    })
}
