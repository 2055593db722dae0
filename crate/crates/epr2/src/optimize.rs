//! Derivative-free minimization (Nelder-Mead with deterministic
//! multistart) and quasi-uniform sphere grids.

use alloc::vec;
use alloc::vec::Vec;

use crate::bloch::BlochVector;
use crate::math;

/// Budget and reproducibility knobs for a minimization.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OptConfig {
    /// Objective evaluations allowed per restart. At least 100.
    pub max_evals: usize,
    /// Simplex collapses (in value spread and diameter) below this. Positive.
    pub simplex_tolerance: f64,
    /// Number of independent starts. At least 1.
    pub restarts: usize,
    /// Base seed; restart `k` uses `seed ^ k`.
    pub seed: u64,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            max_evals: 5000,
            simplex_tolerance: 1e-10,
            restarts: 1,
            seed: 0,
        }
    }
}

impl OptConfig {
    /// Clamps the budget fields into their documented ranges.
    pub fn sanitized(&self) -> Self {
        Self {
            max_evals: self.max_evals.max(100),
            simplex_tolerance: if self.simplex_tolerance > 0.0 {
                self.simplex_tolerance
            } else {
                1e-10
            },
            restarts: self.restarts.max(1),
            seed: self.seed,
        }
    }
}

/// Result of a minimization.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OptOutcome {
    pub best_value: f64,
    pub best_point: Vec<f64>,
    pub evals_used: usize,
    pub converged: bool,
}

/// NaN-safe ordering: NaN sorts last so a poisoned vertex is replaced first.
#[inline]
fn val_lt(a: f64, b: f64) -> bool {
    if a.is_nan() {
        false
    } else if b.is_nan() {
        true
    } else {
        a < b
    }
}

fn sort_simplex(simplex: &mut [(f64, Vec<f64>)]) {
    simplex.sort_by(|a, b| {
        if val_lt(a.0, b.0) {
            core::cmp::Ordering::Less
        } else if val_lt(b.0, a.0) {
            core::cmp::Ordering::Greater
        } else {
            core::cmp::Ordering::Equal
        }
    });
}

struct Budget<'a, F> {
    f: &'a mut F,
    used: usize,
    cap: usize,
}

impl<'a, F: FnMut(&[f64]) -> f64> Budget<'a, F> {
    /// Evaluates the objective, or reports the budget as spent.
    fn eval(&mut self, x: &[f64]) -> Option<f64> {
        if self.used >= self.cap {
            return None;
        }
        self.used += 1;
        Some((self.f)(x))
    }
}

/// Nelder-Mead downhill simplex from `start` with a caller-chosen initial
/// step per coordinate. Minimizes `f`. Never spends more than
/// `config.max_evals` objective calls.
pub fn nelder_mead_with_step<F>(
    f: &mut F,
    start: &[f64],
    initial_step: f64,
    config: &OptConfig,
) -> OptOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let cfg = config.sanitized();
    let n = start.len();
    let mut budget = Budget {
        f,
        used: 0,
        cap: cfg.max_evals,
    };

    if n == 0 {
        let v = budget.eval(start).unwrap_or(f64::INFINITY);
        return OptOutcome {
            best_value: v,
            best_point: Vec::new(),
            evals_used: budget.used,
            converged: true,
        };
    }

    // Simplex: start plus one displaced vertex per coordinate.
    let mut simplex: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n + 1);
    let h = if initial_step != 0.0 { initial_step } else { 0.1 };
    match budget.eval(start) {
        Some(v) => simplex.push((v, start.to_vec())),
        None => unreachable!("sanitized budget admits the first evaluation"),
    }
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += h;
        match budget.eval(&p) {
            Some(v) => simplex.push((v, p)),
            None => simplex.push((f64::INFINITY, p)),
        }
    }

    let mut converged = false;
    'outer: loop {
        sort_simplex(&mut simplex);

        let spread = simplex[n].0 - simplex[0].0;
        let mut diam = 0.0f64;
        for v in &simplex[1..] {
            for i in 0..n {
                diam = diam.max(math::abs(v.1[i] - simplex[0].1[i]));
            }
        }
        if spread.is_finite() && spread <= cfg.simplex_tolerance && diam <= cfg.simplex_tolerance {
            converged = true;
            break;
        }
        if budget.used >= budget.cap {
            break;
        }

        // Centroid of all vertices but the worst.
        let mut centroid = vec![0.0f64; n];
        for v in &simplex[..n] {
            for i in 0..n {
                centroid[i] += v.1[i];
            }
        }
        for c in centroid.iter_mut() {
            *c /= n as f64;
        }

        let worst = simplex[n].clone();
        let mut reflected = vec![0.0f64; n];
        for i in 0..n {
            reflected[i] = centroid[i] + (centroid[i] - worst.1[i]);
        }
        let fr = match budget.eval(&reflected) {
            Some(v) => v,
            None => break,
        };

        if val_lt(fr, simplex[0].0) {
            // Try to expand past the reflection.
            let mut expanded = vec![0.0f64; n];
            for i in 0..n {
                expanded[i] = centroid[i] + 2.0 * (centroid[i] - worst.1[i]);
            }
            match budget.eval(&expanded) {
                Some(fe) if val_lt(fe, fr) => simplex[n] = (fe, expanded),
                _ => simplex[n] = (fr, reflected),
            }
        } else if val_lt(fr, simplex[n - 1].0) {
            simplex[n] = (fr, reflected);
        } else {
            // Contract toward the better of worst/reflected.
            let (anchor_v, anchor) = if val_lt(fr, worst.0) {
                (fr, &reflected)
            } else {
                (worst.0, &worst.1)
            };
            let mut contracted = vec![0.0f64; n];
            for i in 0..n {
                contracted[i] = centroid[i] + 0.5 * (anchor[i] - centroid[i]);
            }
            match budget.eval(&contracted) {
                Some(fc) if val_lt(fc, anchor_v) => simplex[n] = (fc, contracted),
                Some(_) => {
                    // Shrink everything toward the best vertex.
                    let best = simplex[0].1.clone();
                    for v in simplex.iter_mut().skip(1) {
                        for i in 0..n {
                            v.1[i] = best[i] + 0.5 * (v.1[i] - best[i]);
                        }
                        match budget.eval(&v.1) {
                            Some(fv) => v.0 = fv,
                            None => {
                                v.0 = f64::INFINITY;
                                break 'outer;
                            }
                        }
                    }
                }
                None => break,
            }
        }
    }

    sort_simplex(&mut simplex);
    OptOutcome {
        best_value: simplex[0].0,
        best_point: simplex[0].1.clone(),
        evals_used: budget.used,
        converged,
    }
}

/// Nelder-Mead from `start` with the default initial step of 0.25.
pub fn nelder_mead<F>(mut f: F, start: &[f64], config: &OptConfig) -> OptOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    nelder_mead_with_step(&mut f, start, 0.25, config)
}

/// Re-runs Nelder-Mead from the incumbent with successively smaller
/// initial steps. Sharpens a minimum that a single simplex stalls on.
pub fn polish<F>(mut f: F, point: &[f64], steps: &[f64], config: &OptConfig) -> OptOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let mut best = OptOutcome {
        best_value: f(point),
        best_point: point.to_vec(),
        evals_used: 1,
        converged: false,
    };
    for &h in steps {
        let run = nelder_mead_with_step(&mut f, &best.best_point, h, config);
        best.evals_used += run.evals_used;
        if val_lt(run.best_value, best.best_value) {
            best.best_value = run.best_value;
            best.best_point = run.best_point;
        }
        best.converged = run.converged;
    }
    best
}

/// Deterministic multistart: restart `k` starts from `sampler(seed ^ k)`.
/// Returns the best run; ties keep the earliest restart. `evals_used`
/// accumulates over all restarts and so stays within
/// `max_evals * restarts`.
pub fn multistart<F, S>(mut f: F, mut sampler: S, config: &OptConfig) -> OptOutcome
where
    F: FnMut(&[f64]) -> f64,
    S: FnMut(u64) -> Vec<f64>,
{
    let cfg = config.sanitized();
    let mut best: Option<OptOutcome> = None;
    let mut total_evals = 0usize;
    for k in 0..cfg.restarts {
        let start = sampler(cfg.seed ^ (k as u64));
        let run = nelder_mead(&mut f, &start, &cfg);
        total_evals += run.evals_used;
        let better = match &best {
            None => true,
            Some(b) => val_lt(run.best_value, b.best_value),
        };
        if better {
            best = Some(run);
        }
    }
    let mut out = best.expect("restarts >= 1");
    out.evals_used = total_evals;
    out
}

/// Fibonacci-spiral grid of `n` quasi-uniform directions, followed by the
/// six axis probes +z, -z, +x, -x, +y, -y. Length is `n + 6`.
pub fn fibonacci_sphere_grid(n: usize) -> Vec<BlochVector> {
    let golden_angle = core::f64::consts::PI * (3.0 - math::sqrt(5.0));
    let mut pts = Vec::with_capacity(n + 6);
    for i in 0..n {
        let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
        let r = math::sqrt((1.0 - z * z).max(0.0));
        let phi = golden_angle * i as f64;
        pts.push(
            BlochVector::new(r * math::cos(phi), r * math::sin(phi), z)
                .expect("spiral points are unit by construction"),
        );
    }
    pts.push(BlochVector::z_hat());
    pts.push(BlochVector::z_hat().neg());
    pts.push(BlochVector::x_hat());
    pts.push(BlochVector::x_hat().neg());
    pts.push(BlochVector::y_hat());
    pts.push(BlochVector::y_hat().neg());
    pts
}
