//! Monte Carlo solution of linear sequential-order fractional problems.
//!
//! For the equation
//!
//!   sum_{k=1..n} a_k (D^b)^k y(t) + a_{n+1} y(t) = F_b(t)
//!
//! with k-fold composed derivatives of order b, the solution is the
//! random-time average y_b(t) = E[z(T_b(t))], where z solves the classical
//! problem sum a_k z^(k) + a_{n+1} z = F with the same initial data and
//! F_b is the time transform of F. The solver integrates the classical
//! equation once up to the largest drawn time, evaluates the dense output
//! at every draw, and averages per grid point.
//!
//! Randomness layout: stream id 0 is reserved for the coupled base batch;
//! fresh (default) sampling gives grid point i the stream id i + 1. Fixed
//! seeds therefore reproduce identical tables for any thread count.

use crate::catalog;
use crate::error::{Error, Result};
use crate::odeint::{integrate, OdeSystem};
use crate::specfun::FracOrder;
use crate::subordinator::{sample_batch, RngStream, TimeSampleBatch};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Forcing term F(t) of the classical equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Forcing {
    Zero,
    /// sum_k coeffs[k] t^k
    Poly { coeffs: Vec<f64> },
    /// amplitude * exp(rate t)
    Exp { amplitude: f64, rate: f64 },
    /// amplitude * sin(freq t)
    Sin { amplitude: f64, freq: f64 },
    /// amplitude * cos(freq t)
    Cos { amplitude: f64, freq: f64 },
}

impl Forcing {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Forcing::Zero => 0.0,
            Forcing::Poly { coeffs } => {
                let mut acc = 0.0;
                for &c in coeffs.iter().rev() {
                    acc = acc * t + c;
                }
                acc
            }
            Forcing::Exp { amplitude, rate } => amplitude * (rate * t).exp(),
            Forcing::Sin { amplitude, freq } => amplitude * (freq * t).sin(),
            Forcing::Cos { amplitude, freq } => amplitude * (freq * t).cos(),
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            Forcing::Zero => true,
            Forcing::Poly { coeffs } => coeffs.iter().all(|c| c.is_finite()),
            Forcing::Exp { amplitude, rate } => amplitude.is_finite() && rate.is_finite(),
            Forcing::Sin { amplitude, freq } | Forcing::Cos { amplitude, freq } => {
                amplitude.is_finite() && freq.is_finite()
            }
        }
    }
}

/// Linear constant-coefficient problem of order n:
/// `deriv_coeffs[k-1]` multiplies the k-fold derivative, `y_coeff` the
/// undifferentiated term; `init` holds z(0), z'(0), ..., z^(n-1)(0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFdeProblem {
    pub deriv_coeffs: Vec<f64>,
    pub y_coeff: f64,
    pub forcing: Forcing,
    pub init: Vec<f64>,
    pub beta: FracOrder,
}

impl LinearFdeProblem {
    pub fn new(
        deriv_coeffs: Vec<f64>,
        y_coeff: f64,
        forcing: Forcing,
        init: Vec<f64>,
        beta: FracOrder,
    ) -> Result<Self> {
        let p = LinearFdeProblem {
            deriv_coeffs,
            y_coeff,
            forcing,
            init,
            beta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn order(&self) -> usize {
        self.deriv_coeffs.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.deriv_coeffs.len();
        if n == 0 {
            return Err(Error::InvalidProblem("order must be at least 1".into()));
        }
        let lead = self.deriv_coeffs[n - 1];
        if lead == 0.0 || !lead.is_finite() {
            return Err(Error::InvalidProblem(format!(
                "leading coefficient a_{n} must be nonzero, got {lead}"
            )));
        }
        if self.init.len() != n {
            return Err(Error::InvalidProblem(format!(
                "order {n} needs {n} initial values, got {}",
                self.init.len()
            )));
        }
        if self
            .deriv_coeffs
            .iter()
            .chain(self.init.iter())
            .any(|c| !c.is_finite())
            || !self.y_coeff.is_finite()
            || !self.forcing.is_finite()
        {
            return Err(Error::InvalidProblem("non-finite problem data".into()));
        }
        Ok(())
    }

    /// Right-hand side of the equivalent first-order system
    /// (z, z', ..., z^(n-1)).
    fn rhs(&self) -> impl Fn(f64, &[f64], &mut [f64]) + Sync + '_ {
        let n = self.order();
        move |t: f64, y: &[f64], dy: &mut [f64]| {
            for d in 0..n - 1 {
                dy[d] = y[d + 1];
            }
            let mut top = self.forcing.eval(t) - self.y_coeff * y[0];
            for k in 1..n {
                top -= self.deriv_coeffs[k - 1] * y[k];
            }
            dy[n - 1] = top / self.deriv_coeffs[n - 1];
        }
    }
}

/// Strictly increasing evaluation times, all >= 0 (a leading 0 is allowed
/// and handled exactly by the solver).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid(Vec<f64>);

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::EmptyInput("time grid"));
        }
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::Domain("grid times must be finite and >= 0".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("grid times must be strictly increasing".into()));
        }
        Ok(TimeGrid(times))
    }

    /// n equally spaced points on (0, t_max]; excludes 0.
    pub fn linspace_open(t_max: f64, n: usize) -> Result<Self> {
        if !(t_max > 0.0) || n == 0 {
            return Err(Error::Domain(format!(
                "linspace_open requires t_max > 0 and n >= 1, got ({t_max}, {n})"
            )));
        }
        Self::new((1..=n).map(|i| t_max * i as f64 / n as f64).collect())
    }

    pub fn times(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Per-time-point Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub t: f64,
    pub mean: f64,
    pub stderr: f64,
    pub m: usize,
}

/// Solver options. `coupled` reuses one stable-variate base across the
/// whole grid (comonotone draws, visually smooth curves); the default is
/// fresh independent batches per grid point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct McOptions {
    pub m: usize,
    pub seed: u64,
    pub coupled: bool,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            m: 10_000,
            seed: 0,
            coupled: false,
            rtol: 1e-8,
            atol: 1e-10,
        }
    }
}

fn mean_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples
        .iter()
        .map(|x| (x - mean) * (x - mean))
        .sum::<f64>()
        / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Monte Carlo estimates of y_b at every grid time.
pub fn solve_mc(
    prob: &LinearFdeProblem,
    grid: &TimeGrid,
    opts: &McOptions,
) -> Result<Vec<McEstimate>> {
    prob.validate()?;
    if opts.m < 2 {
        return Err(Error::InvalidProblem(format!(
            "m must be at least 2 for a defined standard error, got {}",
            opts.m
        )));
    }
    let beta = prob.beta;

    if beta.is_degenerate() {
        // the random time is exactly t: zero-variance averaging reduces to
        // the classical solution itself
        let t_top = *grid.times().last().unwrap();
        let rhs = prob.rhs();
        let sys = OdeSystem::new(0.0, state_vector(prob), &rhs);
        let dense = integrate(&sys, t_top, opts.rtol, opts.atol)?;
        let values = dense.eval_component(0, grid.times())?;
        return Ok(grid
            .times()
            .iter()
            .zip(values)
            .map(|(&t, mean)| McEstimate {
                t,
                mean,
                stderr: 0.0,
                m: opts.m,
            })
            .collect());
    }

    // draw every batch up front; grid point i uses stream id i + 1
    let batches: Vec<Option<TimeSampleBatch>> = if opts.coupled && !beta.is_degenerate() {
        let base = sample_batch(beta, 1.0, opts.m, RngStream::new(opts.seed, 0))?;
        let b = beta.get();
        grid.times()
            .iter()
            .map(|&t| {
                if t == 0.0 {
                    None
                } else {
                    let scale = t.powf(b);
                    Some(TimeSampleBatch {
                        t,
                        samples: base.samples.iter().map(|s| s * scale).collect(),
                    })
                }
            })
            .collect()
    } else {
        grid.times()
            .par_iter()
            .enumerate()
            .map(|(i, &t)| {
                if t == 0.0 {
                    Ok(None)
                } else {
                    sample_batch(beta, t, opts.m, RngStream::new(opts.seed, i as u64 + 1)).map(Some)
                }
            })
            .collect::<Result<Vec<_>>>()?
    };

    let t_top = batches
        .iter()
        .flatten()
        .flat_map(|b| b.samples.iter().copied())
        .fold(0.0_f64, f64::max);

    let rhs = prob.rhs();
    let sys = OdeSystem::new(0.0, state_vector(prob), &rhs);
    let dense = integrate(&sys, t_top, opts.rtol, opts.atol)?;

    let estimates: Vec<McEstimate> = batches
        .par_iter()
        .zip(grid.times().par_iter())
        .map(|(batch, &t)| match batch {
            None => Ok(McEstimate {
                t,
                mean: prob.init[0],
                stderr: 0.0,
                m: opts.m,
            }),
            Some(b) => {
                let values = dense.eval_component(0, &b.samples)?;
                let (mean, stderr) = mean_stderr(&values);
                Ok(McEstimate {
                    t,
                    mean,
                    stderr,
                    m: opts.m,
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(estimates)
}

fn state_vector(prob: &LinearFdeProblem) -> Vec<f64> {
    prob.init.clone()
}

/// Analytic values y_b(t_i) when the problem matches a catalog family;
/// `None` when no closed form is known.
pub fn solve_closed_form(prob: &LinearFdeProblem, grid: &TimeGrid) -> Result<Option<Vec<f64>>> {
    prob.validate()?;
    match catalog::match_closed_form(prob) {
        None => Ok(None),
        Some(f) => {
            let mut vals = Vec::with_capacity(grid.len());
            for &t in grid.times() {
                vals.push(f(t)?);
            }
            Ok(Some(vals))
        }
    }
}

/// One output row: estimate, reference, and their distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub mc_mean: f64,
    pub mc_stderr: f64,
    pub closed_form: Option<f64>,
    pub abs_err: Option<f64>,
    pub within_4se: Option<bool>,
}

/// Comparison table of Monte Carlo estimates against a reference curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryTable {
    pub rows: Vec<TrajectoryRow>,
}

/// Small absolute slack so the zero-variance degenerate order does not
/// flag integrator round-off as a statistical miss.
const WITHIN_SE_FLOOR: f64 = 1e-9;

/// Join estimates with closed-form values; lengths and times must agree.
pub fn compare(mc: &[McEstimate], cf: &[f64]) -> Result<TrajectoryTable> {
    if mc.len() != cf.len() {
        return Err(Error::LengthMismatch {
            left: mc.len(),
            right: cf.len(),
        });
    }
    let rows = mc
        .iter()
        .zip(cf)
        .map(|(e, &v)| {
            let err = (e.mean - v).abs();
            TrajectoryRow {
                t: e.t,
                mc_mean: e.mean,
                mc_stderr: e.stderr,
                closed_form: Some(v),
                abs_err: Some(err),
                within_4se: Some(err <= 4.0 * e.stderr + WITHIN_SE_FLOOR),
            }
        })
        .collect();
    Ok(TrajectoryTable { rows })
}

impl TrajectoryTable {
    /// Table with no reference column.
    pub fn from_estimates(mc: &[McEstimate]) -> Self {
        TrajectoryTable {
            rows: mc
                .iter()
                .map(|e| TrajectoryRow {
                    t: e.t,
                    mc_mean: e.mean,
                    mc_stderr: e.stderr,
                    closed_form: None,
                    abs_err: None,
                    within_4se: None,
                })
                .collect(),
        }
    }

    /// CSV with a fixed header and 17-significant-digit values.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "t,mc_mean,mc_stderr,closed_form,abs_err")?;
        for r in &self.rows {
            let cf = r.closed_form.map(fmt17).unwrap_or_default();
            let ae = r.abs_err.map(fmt17).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{}",
                fmt17(r.t),
                fmt17(r.mc_mean),
                fmt17(r.mc_stderr),
                cf,
                ae
            )?;
        }
        Ok(())
    }
}

/// Locale-independent scientific formatting with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}
