//! Derivative-free local minimizers.
//!
//! [`CobylaLike`] follows Powell's linear-approximation scheme without
//! constraints: a simplex of `n + 1` points defines a linear model, steps of
//! length `rho` go downhill on that model, and `rho` shrinks when steps stop
//! paying off. [`NelderMead`] is the classic reflection/expansion simplex.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Outcome of a minimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
    /// (evaluation index, best value) each time the best value improved.
    pub trace: Vec<(usize, f64)>,
}

pub trait Minimizer {
    fn minimize(&self, f: &mut dyn FnMut(&[f64]) -> f64, x0: &[f64]) -> Minimum;
}

struct Tracker<'a> {
    f: &'a mut dyn FnMut(&[f64]) -> f64,
    evaluations: usize,
    best: f64,
    best_x: Vec<f64>,
    /// Best value after each evaluation.
    history: Vec<f64>,
    trace: Vec<(usize, f64)>,
}

impl<'a> Tracker<'a> {
    fn new(f: &'a mut dyn FnMut(&[f64]) -> f64) -> Self {
        Self {
            f,
            evaluations: 0,
            best: f64::INFINITY,
            best_x: Vec::new(),
            history: Vec::new(),
            trace: Vec::new(),
        }
    }

    fn eval(&mut self, x: &[f64]) -> f64 {
        let v = (self.f)(x);
        self.evaluations += 1;
        // NaN never becomes the best point
        if v < self.best {
            self.best = v;
            self.best_x = x.to_vec();
            self.trace.push((self.evaluations, v));
        }
        self.history.push(self.best);
        v
    }

    /// Improvement of the best value over the last `window` evaluations.
    fn recent_improvement(&self, window: usize) -> f64 {
        let n = self.history.len();
        if n <= window {
            return f64::INFINITY;
        }
        self.history[n - 1 - window] - self.history[n - 1]
    }

    fn finish(self, converged: bool) -> Minimum {
        Minimum {
            x: self.best_x,
            value: self.best,
            evaluations: self.evaluations,
            converged,
            trace: self.trace,
        }
    }
}

/// Unconstrained COBYLA-style trust-region minimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CobylaLike {
    pub rho_begin: f64,
    pub rho_end: f64,
    /// Stop once a shrink is due, the simplex values span less than this and
    /// the last `n + 1` evaluations improved the best value by less.
    pub f_tol: f64,
    pub max_evals: usize,
}

impl Default for CobylaLike {
    fn default() -> Self {
        Self {
            rho_begin: 0.5,
            rho_end: 1e-4,
            f_tol: 1e-3,
            max_evals: 500,
        }
    }
}

// Simplex acceptability (Powell's alpha, beta) and geometry step length.
const MIN_HEIGHT: f64 = 0.25;
const MAX_EDGE: f64 = 2.1;
const GEOMETRY_STEP: f64 = 0.5;

impl Minimizer for CobylaLike {
    fn minimize(&self, f: &mut dyn FnMut(&[f64]) -> f64, x0: &[f64]) -> Minimum {
        let n = x0.len();
        let mut t = Tracker::new(f);
        if n == 0 {
            t.eval(x0);
            return t.finish(true);
        }
        let mut rho = self.rho_begin;
        let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        let mut vals: Vec<f64> = Vec::with_capacity(n + 1);
        reset_simplex(&mut t, x0, rho, &mut pts, &mut vals);
        let mut need_geometry = false;

        loop {
            let b = argmin(&vals);
            pts.swap(0, b);
            vals.swap(0, b);
            if t.evaluations >= self.max_evals {
                return t.finish(false);
            }

            let a = DMatrix::from_fn(n, n, |r, c| pts[r + 1][c] - pts[0][c]);
            let Some(inv) = a.try_inverse() else {
                let base = pts[0].clone();
                reset_simplex(&mut t, &base, rho, &mut pts, &mut vals);
                continue;
            };
            let df = DMatrix::from_fn(n, 1, |r, _| vals[r + 1] - vals[0]);
            let grad: Vec<f64> = (&inv * df).iter().copied().collect();
            let edge: Vec<f64> = (1..=n).map(|j| dist(&pts[j], &pts[0])).collect();
            let height: Vec<f64> = (0..n).map(|j| 1.0 / inv.column(j).norm()).collect();
            let bad_geometry = edge.iter().any(|&e| e > MAX_EDGE * rho)
                || height.iter().any(|&h| h < MIN_HEIGHT * rho);

            if need_geometry {
                need_geometry = false;
                if bad_geometry {
                    // move the worst-placed vertex along the normal of its face
                    let j = if edge.iter().any(|&e| e > MAX_EDGE * rho) {
                        argmax(&edge)
                    } else {
                        argmin(&height)
                    };
                    let normal: Vec<f64> = inv.column(j).iter().map(|c| c * height[j]).collect();
                    let slope: f64 = normal.iter().zip(&grad).map(|(a, b)| a * b).sum();
                    let sign = if slope > 0.0 { -1.0 } else { 1.0 };
                    let x: Vec<f64> = pts[0]
                        .iter()
                        .zip(&normal)
                        .map(|(p, d)| p + sign * GEOMETRY_STEP * rho * d)
                        .collect();
                    vals[j + 1] = t.eval(&x);
                    pts[j + 1] = x;
                    continue;
                }
                let spread = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max) - vals[0];
                if spread < self.f_tol && t.recent_improvement(n + 1) < self.f_tol {
                    return t.finish(true);
                }
                if rho <= self.rho_end {
                    return t.finish(true);
                }
                rho *= 0.5;
                if rho <= 1.5 * self.rho_end {
                    rho = self.rho_end;
                }
                continue;
            }

            let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if !(gnorm > 0.0 && gnorm.is_finite()) {
                need_geometry = true;
                continue;
            }
            let step: Vec<f64> = grad.iter().map(|g| -rho * g / gnorm).collect();
            let x: Vec<f64> = pts[0].iter().zip(&step).map(|(p, s)| p + s).collect();
            let fx = t.eval(&x);
            let predicted = rho * gnorm;
            let actual = vals[0] - fx;

            // barycentric weight of the new point against each vertex
            let lambda: Vec<f64> = (0..n)
                .map(|j| {
                    inv.column(j)
                        .iter()
                        .zip(&step)
                        .map(|(c, s)| c * s)
                        .sum::<f64>()
                })
                .collect();
            let score = |j: usize| lambda[j].abs() * (dist(&pts[j + 1], &x) / rho).max(1.0);
            if fx < vals[0] {
                let j = (0..n)
                    .max_by(|&a, &b| score(a).total_cmp(&score(b)))
                    .unwrap();
                pts[j + 1] = x;
                vals[j + 1] = fx;
            } else if let Some(j) = (0..n)
                .filter(|&j| vals[j + 1] > fx && score(j) >= 1.0)
                .max_by(|&a, &b| score(a).total_cmp(&score(b)))
            {
                pts[j + 1] = x;
                vals[j + 1] = fx;
            }
            if actual < 0.1 * predicted {
                need_geometry = true;
            }
        }
    }
}

fn reset_simplex(
    t: &mut Tracker<'_>,
    base: &[f64],
    rho: f64,
    pts: &mut Vec<Vec<f64>>,
    vals: &mut Vec<f64>,
) {
    pts.clear();
    vals.clear();
    pts.push(base.to_vec());
    vals.push(t.eval(base));
    for i in 0..base.len() {
        let mut x = base.to_vec();
        x[i] += rho;
        vals.push(t.eval(&x));
        pts.push(x);
    }
}

/// Nelder-Mead downhill simplex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMead {
    /// Edge length of the initial simplex.
    pub step: f64,
    pub f_tol: f64,
    pub x_tol: f64,
    pub max_evals: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            step: 0.5,
            f_tol: 1e-3,
            x_tol: 1e-4,
            max_evals: 500,
        }
    }
}

impl Minimizer for NelderMead {
    fn minimize(&self, f: &mut dyn FnMut(&[f64]) -> f64, x0: &[f64]) -> Minimum {
        let n = x0.len();
        let mut t = Tracker::new(f);
        if n == 0 {
            t.eval(x0);
            return t.finish(true);
        }
        let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        let mut vals: Vec<f64> = Vec::with_capacity(n + 1);
        reset_simplex(&mut t, x0, self.step, &mut pts, &mut vals);

        loop {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
            pts = order.iter().map(|&i| pts[i].clone()).collect();
            vals = order.iter().map(|&i| vals[i]).collect();

            let spread = vals[n] - vals[0];
            let size = pts[1..]
                .iter()
                .map(|p| dist(p, &pts[0]))
                .fold(0.0, f64::max);
            if spread < self.f_tol && size < self.x_tol {
                return t.finish(true);
            }
            if t.evaluations >= self.max_evals {
                return t.finish(false);
            }

            let centroid: Vec<f64> = (0..n)
                .map(|c| pts[..n].iter().map(|p| p[c]).sum::<f64>() / n as f64)
                .collect();
            let along = |s: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&pts[n])
                    .map(|(c, w)| c + s * (c - w))
                    .collect()
            };
            let xr = along(1.0);
            let fr = t.eval(&xr);
            if fr < vals[0] {
                let xe = along(2.0);
                let fe = t.eval(&xe);
                if fe < fr {
                    pts[n] = xe;
                    vals[n] = fe;
                } else {
                    pts[n] = xr;
                    vals[n] = fr;
                }
            } else if fr < vals[n - 1] {
                pts[n] = xr;
                vals[n] = fr;
            } else {
                let (xc, fc) = if fr < vals[n] {
                    let xc = along(0.5);
                    let fc = t.eval(&xc);
                    (xc, fc)
                } else {
                    let xc = along(-0.5);
                    let fc = t.eval(&xc);
                    (xc, fc)
                };
                if fc < vals[n].min(fr) {
                    pts[n] = xc;
                    vals[n] = fc;
                } else {
                    for i in 1..=n {
                        let shrunk: Vec<f64> = pts[0]
                            .iter()
                            .zip(&pts[i])
                            .map(|(b, p)| b + 0.5 * (p - b))
                            .collect();
                        vals[i] = t.eval(&shrunk);
                        pts[i] = shrunk;
                    }
                }
            }
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn argmin(v: &[f64]) -> usize {
    (0..v.len())
        .min_by(|&a, &b| v[a].total_cmp(&v[b]))
        .unwrap_or(0)
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len())
        .max_by(|&a, &b| v[a].total_cmp(&v[b]))
        .unwrap_or(0)
}
