//! Traveling-wave solver on the random time scale:
//!
//!   u(x, t) = E[ f(x + c T_b(t)) + f(x - c T_b(t)) ] / 2
//!
//! which solves the order-2b wave problem with initial profile f and zero
//! initial velocity. One batch of time draws is shared by every x in a
//! time slice, so even profiles produce exactly even fields and the
//! rendered surface stays spatially smooth.

use crate::error::{Error, Result};
use crate::mcsolver::fmt17;
use crate::specfun::FracOrder;
use crate::subordinator::{sample_batch, RngStream};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Initial displacement profile with known global bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WaveProfile {
    /// exp(-a x^2)
    Gauss { a: f64 },
    Constant { c: f64 },
}

impl WaveProfile {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            WaveProfile::Gauss { a } => (-a * x * x).exp(),
            WaveProfile::Constant { c } => *c,
        }
    }

    /// Infimum and supremum over the whole line.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            WaveProfile::Gauss { .. } => (0.0, 1.0),
            WaveProfile::Constant { c } => (*c, *c),
        }
    }

    pub fn name(&self) -> String {
        match self {
            WaveProfile::Gauss { a } => format!("gauss{a}"),
            WaveProfile::Constant { c } => format!("const{c}"),
        }
    }

    /// Parse "gauss10", "gauss:2.5", "const:1" style names.
    pub fn from_name(name: &str) -> Result<Self> {
        if let Some(rest) = name.strip_prefix("gauss") {
            let a = rest.trim_start_matches(':');
            let a = if a.is_empty() { 10.0 } else { a.parse().map_err(bad_profile(name))? };
            if !(a > 0.0) {
                return Err(Error::Domain(format!("gauss width must be > 0 in {name}")));
            }
            return Ok(WaveProfile::Gauss { a });
        }
        if let Some(rest) = name.strip_prefix("const") {
            let c = rest.trim_start_matches(':');
            let c = if c.is_empty() { 1.0 } else { c.parse().map_err(bad_profile(name))? };
            return Ok(WaveProfile::Constant { c });
        }
        Err(Error::Domain(format!("unknown wave profile {name}")))
    }
}

fn bad_profile(name: &str) -> impl Fn(std::num::ParseFloatError) -> Error + '_ {
    move |_| Error::Domain(format!("cannot parse wave profile {name}"))
}

/// Wave problem: speed, profile, and fractional order.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WaveProblem {
    pub speed: f64,
    pub profile: WaveProfile,
    pub beta: FracOrder,
}

/// Space-time evaluation lattice; times run from 0 to t_max inclusive.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WaveGridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub t_max: f64,
    pub nt: usize,
}

/// Field values u(x, t) with per-cell standard errors, row-major in t.
#[derive(Debug, Clone)]
pub struct FieldGrid {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    u: Vec<f64>,
    stderr: Vec<f64>,
    pub f_min: f64,
    pub f_max: f64,
}

impl FieldGrid {
    pub fn u(&self, it: usize, ix: usize) -> f64 {
        self.u[it * self.xs.len() + ix]
    }

    pub fn stderr(&self, it: usize, ix: usize) -> f64 {
        self.stderr[it * self.xs.len() + ix]
    }

    /// Long-format CSV `x,t,u,stderr` (17 significant digits).
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "x,t,u,stderr")?;
        for (it, &t) in self.ts.iter().enumerate() {
            for (ix, &x) in self.xs.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{},{}",
                    fmt17(x),
                    fmt17(t),
                    fmt17(self.u(it, ix)),
                    fmt17(self.stderr(it, ix))
                )?;
            }
        }
        Ok(())
    }

    #[cfg(test)]
    pub(crate) fn inject(&mut self, it: usize, ix: usize, value: f64) {
        let n = self.xs.len();
        self.u[it * n + ix] = value;
    }
}

/// Uniform grid as exact convex combinations, so symmetric spans mirror
/// bitwise (x_i = -x_{n-1-i} when x_min = -x_max).
fn linspace_convex(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let d = (n - 1) as f64;
    (0..n)
        .map(|i| (lo * (d - i as f64) + hi * i as f64) / d)
        .collect()
}

/// Monte Carlo field: one shared batch of time draws per t slice, zero
/// randomness in the t = 0 row, exact propagation at b = 1.
pub fn solve_wave(
    prob: &WaveProblem,
    spec: &WaveGridSpec,
    m: usize,
    seed: u64,
) -> Result<FieldGrid> {
    if !(prob.speed > 0.0) {
        return Err(Error::Domain(format!(
            "wave speed must be > 0, got {}",
            prob.speed
        )));
    }
    if spec.nx == 0 || spec.nt == 0 || !(spec.x_max > spec.x_min) || spec.t_max < 0.0 {
        return Err(Error::Domain("bad wave grid specification".into()));
    }
    if m < 2 {
        return Err(Error::Domain(format!("need m >= 2 replicates, got {m}")));
    }
    let xs = linspace_convex(spec.x_min, spec.x_max, spec.nx);
    let ts = linspace_convex(0.0, spec.t_max, spec.nt);
    let f = prob.profile;
    let c = prob.speed;
    let (f_min, f_max) = f.bounds();

    let rows: Vec<(Vec<f64>, Vec<f64>)> = ts
        .par_iter()
        .enumerate()
        .map(|(it, &t)| -> Result<(Vec<f64>, Vec<f64>)> {
            if t == 0.0 {
                let u: Vec<f64> = xs.iter().map(|&x| f.eval(x)).collect();
                return Ok((u, vec![0.0; xs.len()]));
            }
            if prob.beta.is_degenerate() {
                // deterministic time change: classical traveling waves
                let u: Vec<f64> = xs
                    .iter()
                    .map(|&x| 0.5 * (f.eval(x + c * t) + f.eval(x - c * t)))
                    .collect();
                return Ok((u, vec![0.0; xs.len()]));
            }
            let batch = sample_batch(prob.beta, t, m, RngStream::new(seed, it as u64 + 1))?;
            let mut u = Vec::with_capacity(xs.len());
            let mut se = Vec::with_capacity(xs.len());
            for &x in &xs {
                let mut sum = 0.0;
                let mut sumsq = 0.0;
                for &tau in &batch.samples {
                    let v = 0.5 * (f.eval(x + c * tau) + f.eval(x - c * tau));
                    sum += v;
                    sumsq += v * v;
                }
                let n = m as f64;
                let mean = sum / n;
                let var = ((sumsq - n * mean * mean) / (n - 1.0)).max(0.0);
                u.push(mean);
                se.push((var / n).sqrt());
            }
            Ok((u, se))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut u = Vec::with_capacity(spec.nt * spec.nx);
    let mut stderr = Vec::with_capacity(spec.nt * spec.nx);
    for (ur, sr) in rows {
        u.extend(ur);
        stderr.extend(sr);
    }
    Ok(FieldGrid {
        xs,
        ts,
        u,
        stderr,
        f_min,
        f_max,
    })
}

/// Every cell of the averaged field must lie between the global bounds of
/// the initial profile (the estimator is a convex combination of profile
/// values); a tiny floating-point slack is allowed.
pub fn max_principle_check(field: &FieldGrid) -> bool {
    let slack = 1e-12 * field.f_max.abs().max(field.f_min.abs()).max(1.0);
    field
        .u
        .iter()
        .all(|&v| v >= field.f_min - slack && v <= field.f_max + slack)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss_problem(beta: f64) -> WaveProblem {
        WaveProblem {
            speed: 0.5,
            profile: WaveProfile::Gauss { a: 10.0 },
            beta: FracOrder::new(beta).unwrap(),
        }
    }

    fn spec() -> WaveGridSpec {
        WaveGridSpec {
            x_min: -2.0,
            x_max: 2.0,
            nx: 41,
            t_max: 2.0,
            nt: 5,
        }
    }

    #[test]
    fn degenerate_order_is_classical_travel() {
        let prob = gauss_problem(1.0);
        let field = solve_wave(&prob, &spec(), 50, 7).unwrap();
        for (it, &t) in field.ts.iter().enumerate() {
            for (ix, &x) in field.xs.iter().enumerate() {
                let exact = 0.5
                    * (prob.profile.eval(x + 0.5 * t) + prob.profile.eval(x - 0.5 * t));
                assert!(
                    (field.u(it, ix) - exact).abs() < 1e-12,
                    "t={t} x={x}: {} vs {exact}",
                    field.u(it, ix)
                );
                assert_eq!(field.stderr(it, ix), 0.0);
            }
        }
    }

    #[test]
    fn initial_row_is_profile_exactly() {
        let prob = gauss_problem(0.5);
        let field = solve_wave(&prob, &spec(), 100, 3).unwrap();
        for (ix, &x) in field.xs.iter().enumerate() {
            assert_eq!(field.u(0, ix), prob.profile.eval(x));
        }
    }

    #[test]
    fn even_profile_gives_even_field() {
        let prob = gauss_problem(0.5);
        let field = solve_wave(&prob, &spec(), 500, 42).unwrap();
        let n = field.xs.len();
        for it in 0..field.ts.len() {
            for ix in 0..n {
                let mirrored = field.u(it, n - 1 - ix);
                assert_eq!(field.u(it, ix), mirrored, "asymmetry at it={it} ix={ix}");
            }
        }
    }

    #[test]
    fn bounds_hold_for_all_orders() {
        for &beta in &[0.1, 0.5, 0.9] {
            let field = solve_wave(&gauss_problem(beta), &spec(), 400, 9).unwrap();
            assert!(max_principle_check(&field), "bounds broken at beta={beta}");
        }
    }

    #[test]
    fn constant_profile_stays_constant() {
        let prob = WaveProblem {
            speed: 0.5,
            profile: WaveProfile::Constant { c: 1.0 },
            beta: FracOrder::new(0.5).unwrap(),
        };
        let field = solve_wave(&prob, &spec(), 100, 5).unwrap();
        assert!(field.u.iter().all(|&v| (v - 1.0).abs() < 1e-14));
        assert!(max_principle_check(&field));
    }

    #[test]
    fn injected_outlier_fails_the_check() {
        let mut field = solve_wave(&gauss_problem(0.5), &spec(), 100, 5).unwrap();
        assert!(max_principle_check(&field));
        field.inject(1, 3, 1.5);
        assert!(!max_principle_check(&field));
    }

    #[test]
    fn center_column_matches_half_gaussian_quadrature() {
        // u(0, t) = E[exp(-10 (c T)^2)] for the even profile; the b = 1/2
        // density is the half-Gaussian, and with c = 1/2 the quadrature
        // collapses to 1/sqrt(1 + 10 t); verified against plain Simpson
        let prob = gauss_problem(0.5);
        let s = WaveGridSpec {
            x_min: -2.0,
            x_max: 2.0,
            nx: 5,
            t_max: 1.0,
            nt: 3,
        };
        let m = 40_000;
        let field = solve_wave(&prob, &s, m, 17).unwrap();
        let ix0 = 2; // x = 0
        assert_eq!(field.xs[ix0], 0.0);
        for (it, &t) in field.ts.iter().enumerate().skip(1) {
            let n = 4000;
            let hi = 40.0_f64 * t.sqrt().max(1.0);
            let h = hi / n as f64;
            let g = |z: f64| (-z * z / (4.0 * t)).exp() / (std::f64::consts::PI * t).sqrt();
            let mut quad = 0.0;
            for i in 0..=n {
                let z = i as f64 * h;
                let w = if i == 0 || i == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                quad += w * g(z) * (-10.0 * (0.5 * z) * (0.5 * z)).exp();
            }
            quad *= h / 3.0;
            let closed = 1.0 / (1.0 + 10.0 * t).sqrt();
            assert!((quad - closed).abs() < 1e-6, "quadrature check {quad} vs {closed}");
            let u = field.u(it, ix0);
            let se = field.stderr(it, ix0);
            assert!(
                (u - quad).abs() <= 4.0 * se,
                "t={t}: u={u} vs quad={quad} (se {se})"
            );
        }
    }

    #[test]
    fn time_zero_continuity() {
        // max_x |u(x, delta) - f(x)| small for small delta; the deviation
        // scales like E[T^2] = 2 delta^{2b}/G(2b+1), so the slowest order
        // needs a smaller delta to fall below the same bound
        for &beta in &[0.3, 0.5, 0.9] {
            let prob = gauss_problem(beta);
            let delta = if beta < 0.5 { 1e-5 } else { 1e-3 };
            let s = WaveGridSpec {
                x_min: -2.0,
                x_max: 2.0,
                nx: 21,
                t_max: delta,
                nt: 2,
            };
            let field = solve_wave(&prob, &s, 4000, 23).unwrap();
            let worst = field
                .xs
                .iter()
                .enumerate()
                .map(|(ix, &x)| (field.u(1, ix) - prob.profile.eval(x)).abs())
                .fold(0.0_f64, f64::max);
            assert!(worst < 5e-2, "beta={beta}: deviation {worst}");
        }
    }

    #[test]
    fn profile_parsing() {
        assert_eq!(
            WaveProfile::from_name("gauss10").unwrap(),
            WaveProfile::Gauss { a: 10.0 }
        );
        assert_eq!(
            WaveProfile::from_name("gauss:2.5").unwrap(),
            WaveProfile::Gauss { a: 2.5 }
        );
        assert_eq!(
            WaveProfile::from_name("const:3").unwrap(),
            WaveProfile::Constant { c: 3.0 }
        );
        assert!(WaveProfile::from_name("sinc").is_err());
    }

    #[test]
    fn rejects_bad_arguments() {
        let prob = gauss_problem(0.5);
        let mut s = spec();
        s.nx = 0;
        assert!(solve_wave(&prob, &s, 100, 0).is_err());
        assert!(solve_wave(&prob, &spec(), 1, 0).is_err());
        let bad = WaveProblem {
            speed: 0.0,
            ..gauss_problem(0.5)
        };
        assert!(solve_wave(&bad, &spec(), 100, 0).is_err());
    }
}
