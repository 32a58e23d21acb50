//! Adaptive Dormand-Prince 5(4) integration with quartic dense output.
//!
//! One integration pass produces a [`DenseSolution`] that can be queried at
//! arbitrary points inside the integrated span, which is how the Monte
//! Carlo solver evaluates the classical solution at every random time draw
//! without re-integrating.

use crate::error::{Error, Result};

// Dormand-Prince tableau (Hairer's DOPRI5 constants).
const A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
// 5th-order minus embedded 4th-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// dense-output weights
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const MAX_STEPS: usize = 1_000_000;

/// First-order system y' = rhs(t, y) with initial state at t0.
pub struct OdeSystem<'a> {
    pub dim: usize,
    pub t0: f64,
    pub y0: Vec<f64>,
    pub rhs: &'a dyn Fn(f64, &[f64], &mut [f64]),
}

impl<'a> OdeSystem<'a> {
    pub fn new(t0: f64, y0: Vec<f64>, rhs: &'a dyn Fn(f64, &[f64], &mut [f64])) -> Self {
        OdeSystem {
            dim: y0.len(),
            t0,
            y0,
            rhs,
        }
    }
}

/// Interpolation data for one accepted step.
struct StepInterp {
    /// cont[0] + s (cont[1] + s1 (cont[2] + s (cont[3] + s1 cont[4])))
    /// with s = (t - t_start)/h, s1 = 1 - s; exact at both knots.
    cont: [Vec<f64>; 5],
}

/// Piecewise-quartic dense solution of one integration run.
pub struct DenseSolution {
    dim: usize,
    knots: Vec<f64>,
    /// accepted states, one per knot; queries landing on a knot return
    /// these bitwise
    states: Vec<Vec<f64>>,
    steps: Vec<StepInterp>,
}

impl DenseSolution {
    pub fn span(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    fn eval_one(&self, t: f64) -> Result<Vec<f64>> {
        let (lo, hi) = self.span();
        let slack = 1e-12 * (hi - lo).max(1.0);
        if t < lo - slack || t > hi + slack {
            return Err(Error::OutOfSpan { t, lo, hi });
        }
        match self.knots.binary_search_by(|k| k.partial_cmp(&t).unwrap()) {
            Ok(j) => Ok(self.states[j].clone()),
            Err(j) => {
                if self.steps.is_empty() {
                    return Ok(self.states[0].clone());
                }
                let i = j.saturating_sub(1).min(self.steps.len() - 1);
                let h = self.knots[i + 1] - self.knots[i];
                let s = ((t - self.knots[i]) / h).clamp(0.0, 1.0);
                let s1 = 1.0 - s;
                let c = &self.steps[i].cont;
                let mut out = vec![0.0; self.dim];
                for d in 0..self.dim {
                    out[d] =
                        c[0][d] + s * (c[1][d] + s1 * (c[2][d] + s * (c[3][d] + s1 * c[4][d])));
                }
                Ok(out)
            }
        }
    }

    /// Interpolated states at the query points (any order, all in span).
    pub fn eval_at(&self, queries: &[f64]) -> Result<Vec<Vec<f64>>> {
        queries.iter().map(|&t| self.eval_one(t)).collect()
    }

    /// Single state component at the query points.
    pub fn eval_component(&self, component: usize, queries: &[f64]) -> Result<Vec<f64>> {
        assert!(component < self.dim);
        queries
            .iter()
            .map(|&t| self.eval_one(t).map(|y| y[component]))
            .collect()
    }
}

fn rms_norm(v: &[f64], scale: &[f64]) -> f64 {
    let s: f64 = v
        .iter()
        .zip(scale)
        .map(|(x, sc)| (x / sc) * (x / sc))
        .sum();
    (s / v.len() as f64).sqrt()
}

fn initial_step(sys: &OdeSystem, t_end: f64, rtol: f64, atol: f64, f0: &[f64]) -> f64 {
    let n = sys.dim;
    let span = t_end - sys.t0;
    let scale: Vec<f64> = sys.y0.iter().map(|y| atol + rtol * y.abs()).collect();
    let d0 = rms_norm(&sys.y0, &scale);
    let d1 = rms_norm(f0, &scale);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    }
    .min(span);
    let y1: Vec<f64> = sys
        .y0
        .iter()
        .zip(f0)
        .map(|(y, f)| y + h0 * f)
        .collect();
    let mut f1 = vec![0.0; n];
    (sys.rhs)(sys.t0 + h0, &y1, &mut f1);
    let df: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms_norm(&df, &scale) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}

/// Integrate from sys.t0 to t_end with mixed absolute/relative error
/// control; grid-point accuracy tracks the tolerances, dense output is
/// 4th-order between knots.
pub fn integrate(sys: &OdeSystem, t_end: f64, rtol: f64, atol: f64) -> Result<DenseSolution> {
    assert!(rtol > 0.0 && atol > 0.0, "tolerances must be positive");
    if t_end < sys.t0 {
        return Err(Error::Domain(format!(
            "t_end = {t_end} before t0 = {}",
            sys.t0
        )));
    }
    let n = sys.dim;
    let mut sol = DenseSolution {
        dim: n,
        knots: vec![sys.t0],
        states: vec![sys.y0.clone()],
        steps: Vec::new(),
    };
    if t_end == sys.t0 {
        return Ok(sol);
    }

    let mut t = sys.t0;
    let mut y = sys.y0.clone();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    (sys.rhs)(t, &y, &mut k[0]);
    let mut h = initial_step(sys, t_end, rtol, atol, &k[0]);
    let mut y_stage = vec![0.0; n];
    let mut rejected = false;

    for _step in 0..MAX_STEPS {
        if t >= t_end {
            return Ok(sol);
        }
        h = h.min(t_end - t);
        if h < 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::IntegrationFailure { t });
        }

        // stages 2..7; the 7th row of A equals the 5th-order weights, so
        // k[6] is f at (t + h, y_new) and is reused on acceptance (FSAL)
        for stage in 0..6 {
            for d in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(stage + 1) {
                    acc += A[stage][j] * kj[d];
                }
                y_stage[d] = y[d] + h * acc;
            }
            let ts = t + C[stage] * h;
            let (head, tail) = k.split_at_mut(stage + 1);
            let _ = head;
            (sys.rhs)(ts, &y_stage, &mut tail[0]);
        }
        let y_new = y_stage.clone(); // stage 6 used the b-weights row

        // embedded error estimate
        let mut err_norm = 0.0;
        for d in 0..n {
            let mut e_acc = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e_acc += E[j] * kj[d];
            }
            let sc = atol + rtol * y[d].abs().max(y_new[d].abs());
            let e = h * e_acc / sc;
            err_norm += e * e;
        }
        err_norm = (err_norm / n as f64).sqrt();

        if !err_norm.is_finite() {
            // state blew up; treat like a hard rejection
            h *= 0.25;
            rejected = true;
            continue;
        }

        if err_norm <= 1.0 {
            // dense-output coefficients for this step
            let ydiff: Vec<f64> = y_new.iter().zip(&y).map(|(a, b)| a - b).collect();
            let bspl: Vec<f64> = k[0]
                .iter()
                .zip(&ydiff)
                .map(|(k1, dy)| h * k1 - dy)
                .collect();
            let cont3: Vec<f64> = ydiff
                .iter()
                .zip(&k[6])
                .zip(&bspl)
                .map(|((dy, k7), b)| dy - h * k7 - b)
                .collect();
            let mut cont4 = vec![0.0; n];
            for d in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    acc += D[j] * kj[d];
                }
                cont4[d] = h * acc;
            }
            sol.steps.push(StepInterp {
                cont: [y.clone(), ydiff, bspl, cont3, cont4],
            });
            t += h;
            sol.knots.push(t);
            y = y_new;
            sol.states.push(y.clone());
            k[0] = k[6].clone();

            let mut fac = (0.9 * err_norm.powf(-0.2)).min(10.0).max(0.2);
            if rejected {
                fac = fac.min(1.0);
            }
            rejected = false;
            h *= fac;
        } else {
            h *= (0.9 * err_norm.powf(-0.2)).max(0.2);
            rejected = true;
        }
    }
    Err(Error::IntegrationFailure { t })
}

/// Fixed-step driver over n equal steps (no error control); used to
/// measure the raw convergence order of the stage kernel.
pub fn integrate_fixed_step(sys: &OdeSystem, t_end: f64, n_steps: usize) -> Vec<f64> {
    let n = sys.dim;
    let h = (t_end - sys.t0) / n_steps as f64;
    let mut t = sys.t0;
    let mut y = sys.y0.clone();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut y_stage = vec![0.0; n];
    for _ in 0..n_steps {
        (sys.rhs)(t, &y, &mut k[0]);
        for stage in 0..6 {
            for d in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(stage + 1) {
                    acc += A[stage][j] * kj[d];
                }
                y_stage[d] = y[d] + h * acc;
            }
            let ts = t + C[stage] * h;
            let (head, tail) = k.split_at_mut(stage + 1);
            let _ = head;
            (sys.rhs)(ts, &y_stage, &mut tail[0]);
        }
        y.copy_from_slice(&y_stage);
        t += h;
    }
    y
}
