//! Chained Bell inequalities and the induced upper bound on local
//! content.
//!
//! For `N` settings per side with Alice's directions in the x-z plane,
//! `a_k = (sin alpha_k, 0, cos alpha_k)`, Bob's optimal settings can be
//! eliminated analytically. The chained value becomes
//!
//! `I = sum_{k=1}^{N-1} L(alpha_k, alpha_{k+1}) + M(alpha_N, alpha_1)`
//!
//! with `L(u, v) = sqrt((cos u + cos v)^2 + s^2 (sin u + sin v)^2)` and
//! `M` the same with both signs flipped on `v`. Local models satisfy
//! `I <= 2(N - 1)`, no-signaling allows `I <= 2N`, so local content is
//! at most `(2N - I) / 2`.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::math;
use crate::optimize::{self, multistart, OptConfig};
use crate::qubit::ThetaParam;

/// Problem statement for one chained-inequality optimization.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChainedConfig {
    pub theta: ThetaParam,
    /// Number of settings per side, at least 2.
    pub n: usize,
    /// Restrict the search to profiles with
    /// `alpha_{N+1-k} = pi - alpha_k` (halves the dimension; the optimum
    /// obeys this reflection).
    pub symmetric: bool,
    pub opt: OptConfig,
}

impl ChainedConfig {
    pub fn new(theta: ThetaParam, n: usize, symmetric: bool, opt: OptConfig) -> Result<Self, Error> {
        if n < 2 {
            return Err(Error::invalid("chained inequality needs at least 2 settings"));
        }
        Ok(Self {
            theta,
            n,
            symmetric,
            opt,
        })
    }
}

/// Optimized chained value and the bound it implies.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChainedResult {
    pub theta: f64,
    pub n: usize,
    /// Best chained value found.
    pub i_value: f64,
    /// Optimal angles, reduced mod 2 pi for reporting.
    pub alphas: Vec<f64>,
    /// `(2N - I) / 2`, clamped into `[0, 1]`.
    pub upper_bound: f64,
    /// Relative slack `upper_bound / cos(2 theta) - 1`; NaN at
    /// `theta = pi/4` where the reference value vanishes.
    pub delta: f64,
    pub converged: bool,
    pub evals_used: usize,
}

#[inline]
fn link(u: f64, v: f64, s: f64, sgn: f64) -> f64 {
    let zc = math::cos(u) + sgn * math::cos(v);
    let xc = s * (math::sin(u) + sgn * math::sin(v));
    math::sqrt(zc * zc + xc * xc)
}

fn chained_raw(s: f64, alphas: &[f64]) -> f64 {
    let n = alphas.len();
    let mut total = 0.0;
    for k in 0..n - 1 {
        total += link(alphas[k], alphas[k + 1], s, 1.0);
    }
    total + link(alphas[n - 1], alphas[0], s, -1.0)
}

/// Chained value for explicit Alice angles (Bob already eliminated).
/// Needs at least two angles.
pub fn chained_value(theta: &ThetaParam, alphas: &[f64]) -> Result<f64, Error> {
    if alphas.len() < 2 {
        return Err(Error::invalid("chained inequality needs at least 2 settings"));
    }
    Ok(chained_raw(theta.s(), alphas))
}

/// Equally spaced angles `alpha_k = (k - 1) pi / n`, `k = 1..n`. Optimal
/// at `theta = pi/4`.
pub fn equal_spacing_angles(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| k as f64 * core::f64::consts::PI / n as f64)
        .collect()
}

/// Half-step-shifted spacing `alpha_k = (2k - 1) pi / (2n)`. Also
/// optimal at `theta = pi/4` (the value is invariant under a common
/// shift there) and, unlike [`equal_spacing_angles`], it satisfies the
/// reflection `alpha_{n+1-k} = pi - alpha_k` exactly.
pub fn symmetric_equal_spacing(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| (2 * k + 1) as f64 * core::f64::consts::PI / (2.0 * n as f64))
        .collect()
}

/// Checks `alpha_{n+1-k} = pi - alpha_k` up to whole turns.
pub fn reflection_symmetric(alphas: &[f64], tol: f64) -> bool {
    let n = alphas.len();
    let tau = core::f64::consts::TAU;
    for k in 0..n {
        let d = alphas[n - 1 - k] + alphas[k] - core::f64::consts::PI;
        let wrapped = math::rem_euclid(d + core::f64::consts::PI, tau) - core::f64::consts::PI;
        if math::abs(wrapped) > tol {
            return false;
        }
    }
    true
}

fn logistic(t: f64) -> f64 {
    1.0 / (1.0 + math::exp(-t))
}

/// Maximizes the chained value over Alice's angles and converts it to an
/// upper bound on local content.
///
/// Seeds mix the two equal-spacing gauges, step-like profiles of several
/// widths (the optimum concentrates near 0 and pi for weak
/// entanglement), and seeded random perturbations; the best run is
/// polished with shrinking simplex steps.
pub fn optimize_chained(config: &ChainedConfig) -> Result<ChainedResult, Error> {
    let n = config.n;
    if n < 2 {
        return Err(Error::invalid("chained inequality needs at least 2 settings"));
    }
    let s = config.theta.s();
    let cfg = config.opt.sanitized();
    let m = if config.symmetric { n / 2 } else { n };

    let expand = move |free: &[f64]| -> Vec<f64> {
        if !config.symmetric {
            return free.to_vec();
        }
        let mut full = alloc::vec![0.0f64; n];
        for k in 0..n / 2 {
            full[k] = free[k];
            full[n - 1 - k] = core::f64::consts::PI - free[k];
        }
        if n % 2 == 1 {
            full[n / 2] = core::f64::consts::FRAC_PI_2;
        }
        full
    };

    let objective = move |free: &[f64]| -> f64 { -chained_raw(s, &expand(free)) };

    let take_free = |full: Vec<f64>| -> Vec<f64> { full[..m].to_vec() };
    let center = (n as f64 + 1.0) / 2.0;
    let profile = move |w: f64| -> Vec<f64> {
        (1..=n)
            .map(|k| core::f64::consts::PI * logistic((k as f64 - center) / w))
            .collect::<Vec<_>>()[..m]
            .to_vec()
    };
    let base = take_free(symmetric_equal_spacing(n));

    let base_seed = cfg.seed;
    let sampler = {
        let base = base.clone();
        let plain = take_free(equal_spacing_angles(n));
        move |sk: u64| -> Vec<f64> {
            let k = (sk ^ base_seed) as usize;
            match k {
                0 => base.clone(),
                1 => plain.clone(),
                2 => profile(0.5),
                3 => profile(1.5),
                4 => profile(4.0),
                _ => {
                    let mut rng = ChaCha8Rng::seed_from_u64(sk);
                    base.iter()
                        .map(|a| a + rng.random_range(-0.35..0.35))
                        .collect()
                }
            }
        }
    };

    let coarse = multistart(objective, sampler, &cfg);
    let polished = optimize::polish(
        objective,
        &coarse.best_point,
        &[0.05, 5e-3, 5e-4, 5e-5, 5e-6],
        &cfg,
    );

    let i_value = -polished.best_value;
    let alphas: Vec<f64> = expand(&polished.best_point)
        .iter()
        .map(|a| math::rem_euclid(*a, core::f64::consts::TAU))
        .collect();
    let upper_bound = bkp_upper_bound(i_value, 2.0 * (n as f64 - 1.0), 2.0 * n as f64)?;
    let delta = if config.theta.s() >= 1.0 {
        f64::NAN
    } else {
        upper_bound / config.theta.c() - 1.0
    };
    Ok(ChainedResult {
        theta: config.theta.theta(),
        n,
        i_value,
        alphas,
        upper_bound,
        delta,
        converged: coarse.converged || polished.converged,
        evals_used: coarse.evals_used + polished.evals_used,
    })
}

/// Upper bound on local content from an inequality value: with local
/// bound `i_local` and no-signaling maximum `i_ns`,
/// `p <= (i_ns - i_value) / (i_ns - i_local)`, clamped into `[0, 1]`.
pub fn bkp_upper_bound(i_value: f64, i_local: f64, i_ns: f64) -> Result<f64, Error> {
    if !(i_ns > i_local) {
        return Err(Error::invalid(
            "no-signaling maximum must exceed the local bound",
        ));
    }
    if !i_value.is_finite() || i_value > i_ns + 1e-6 {
        return Err(Error::invalid("value exceeds the no-signaling maximum"));
    }
    Ok(((i_ns - i_value) / (i_ns - i_local)).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::BlochVector;
    use crate::qubit::quantum_correlator;

    fn theta(t: f64) -> ThetaParam {
        ThetaParam::new(t).unwrap()
    }

    fn fast_opt(restarts: usize, seed: u64) -> OptConfig {
        OptConfig {
            max_evals: 6000,
            simplex_tolerance: 1e-10,
            restarts,
            seed,
        }
    }

    #[test]
    fn two_settings_recover_chsh() {
        let t = theta(core::f64::consts::FRAC_PI_4);
        let v = chained_value(&t, &equal_spacing_angles(2)).unwrap();
        assert!((v - 2.0 * core::f64::consts::SQRT_2).abs() < 1e-12);
        assert!(chained_value(&t, &[0.3]).is_err());
    }

    #[test]
    fn equal_spacing_hits_analytic_maximum() {
        let t = theta(core::f64::consts::FRAC_PI_4);
        for &n in &[2usize, 4, 10, 30] {
            let analytic = 2.0 * n as f64 * (core::f64::consts::PI / (2.0 * n as f64)).cos();
            let plain = chained_value(&t, &equal_spacing_angles(n)).unwrap();
            let shifted = chained_value(&t, &symmetric_equal_spacing(n)).unwrap();
            assert!((plain - analytic).abs() < 1e-12, "n={n}");
            assert!((shifted - analytic).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn value_agrees_with_correlator_sum() {
        // Rebuild each term from explicit Bob vectors and the two-qubit
        // correlator; checks the eliminated form against first principles.
        let t = theta(0.31);
        let alphas = symmetric_equal_spacing(6);
        let n = alphas.len();
        let a_vec = |al: f64| BlochVector::new(al.sin(), 0.0, al.cos()).unwrap();
        let mut total = 0.0;
        for k in 0..n {
            let (u, v, sgn) = if k < n - 1 {
                (alphas[k], alphas[k + 1], 1.0)
            } else {
                (alphas[n - 1], alphas[0], -1.0)
            };
            let bz = u.cos() + sgn * v.cos();
            let bx = t.s() * (u.sin() + sgn * v.sin());
            let norm = (bz * bz + bx * bx).sqrt();
            assert!(norm > 1e-12);
            let b = BlochVector::new(bx / norm, 0.0, bz / norm).unwrap();
            total += quantum_correlator(&t, &a_vec(u), &b)
                + sgn * quantum_correlator(&t, &a_vec(v), &b);
        }
        let direct = chained_value(&t, &alphas).unwrap();
        assert!((total - direct).abs() < 1e-12);
    }

    #[test]
    fn spacing_gauges_and_reflection() {
        // The plain gauge starts at 0 and breaks the reflection; the
        // shifted gauge satisfies it exactly.
        let plain = equal_spacing_angles(4);
        assert!((plain[0] - 0.0).abs() < 1e-15);
        assert!(!reflection_symmetric(&plain, 1e-9));
        let shifted = symmetric_equal_spacing(4);
        assert!(reflection_symmetric(&shifted, 1e-12));
        assert!(reflection_symmetric(&symmetric_equal_spacing(7), 1e-12));
    }

    #[test]
    fn optimizer_reaches_analytic_value_at_max_entanglement() {
        let t = theta(core::f64::consts::FRAC_PI_4);
        for &n in &[2usize, 4, 10] {
            let config =
                ChainedConfig::new(t, n, true, fast_opt(8, 21)).unwrap();
            let res = optimize_chained(&config).unwrap();
            let analytic = 2.0 * n as f64 * (core::f64::consts::PI / (2.0 * n as f64)).cos();
            assert!(
                (res.i_value - analytic).abs() < 1e-7,
                "n={n} value={} analytic={analytic}",
                res.i_value
            );
            assert!(res.delta.is_nan());
            assert!(reflection_symmetric(&res.alphas, 1e-6));
        }
    }

    #[test]
    fn upper_bound_improves_with_n_and_dominates_local_weight() {
        let t = theta(core::f64::consts::FRAC_PI_8);
        let run = |n: usize| {
            let config = ChainedConfig::new(t, n, true, fast_opt(8, 33)).unwrap();
            optimize_chained(&config).unwrap()
        };
        let r4 = run(4);
        let r12 = run(12);
        assert!(r12.upper_bound <= r4.upper_bound + 1e-9);
        // The certified local weight can never exceed the bound.
        assert!(r12.upper_bound >= (1.0 - t.s()) - 1e-6);
        assert!(r4.upper_bound >= (1.0 - t.s()) - 1e-6);
        assert!(r4.delta >= 0.0);
    }

    #[test]
    fn weakly_entangled_settings_concentrate_near_axis() {
        let frac_near_axis = |alphas: &[f64]| {
            let hits = alphas
                .iter()
                .filter(|&&a| {
                    let d0 = a.min(core::f64::consts::TAU - a);
                    let dpi = (a - core::f64::consts::PI).abs();
                    d0.min(dpi) <= 0.2
                })
                .count();
            hits as f64 / alphas.len() as f64
        };
        let run = |tv: f64| {
            let config =
                ChainedConfig::new(theta(tv), 30, true, fast_opt(10, 5)).unwrap();
            optimize_chained(&config).unwrap()
        };
        let weak = run(core::f64::consts::PI / 20.0);
        let strong = run(core::f64::consts::FRAC_PI_4);
        assert!(frac_near_axis(&weak.alphas) >= frac_near_axis(&strong.alphas));
    }

    #[test]
    fn bound_conversion_examples() {
        let chsh_singlet = 2.0 * core::f64::consts::SQRT_2;
        let p = bkp_upper_bound(chsh_singlet, 2.0, 4.0).unwrap();
        // (4 - 2 sqrt(2)) / 2 = 2 - sqrt(2).
        assert!((p - 0.5857864376269049).abs() < 1e-15);
        assert_eq!(bkp_upper_bound(4.0, 2.0, 4.0).unwrap(), 0.0);
        assert_eq!(bkp_upper_bound(1.5, 2.0, 4.0).unwrap(), 1.0);
        assert!(bkp_upper_bound(2.0, 4.0, 4.0).is_err());
        assert!(bkp_upper_bound(5.0, 2.0, 4.0).is_err());
        assert!(bkp_upper_bound(f64::NAN, 2.0, 4.0).is_err());
    }
}
