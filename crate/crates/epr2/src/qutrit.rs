//! Lower bound on the nonlocal content of the two-qutrit family
//! `(|00> + |11> + gamma |22>) / sqrt(2 + gamma^2)`.
//!
//! The local model assigns each party the outcome whose basis vector has
//! the largest overlap with `|2>`. A deterministic point distribution on
//! that outcome pair can be split off the quantum distribution with any
//! weight up to the minimum, over both measurement bases, of the joint
//! probability of the pair; the remainder stays no-signaling. That
//! minimum therefore lower-bounds the local content. Above a critical
//! `gamma` it is strictly positive.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::math;
use crate::optimize::{self, nelder_mead, OptConfig};

/// Schmidt parameter `gamma >= 0` of the qutrit family.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GammaParam {
    gamma: f64,
}

impl GammaParam {
    pub fn new(gamma: f64) -> Result<Self, Error> {
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::invalid("gamma must be finite and nonnegative"));
        }
        Ok(Self { gamma })
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// Schmidt coefficients `(1, 1, gamma) / sqrt(2 + gamma^2)`.
pub fn qutrit_amplitudes(g: &GammaParam) -> [f64; 3] {
    let norm = math::sqrt(2.0 + g.gamma * g.gamma);
    [1.0 / norm, 1.0 / norm, g.gamma / norm]
}

type Mat3 = [[Complex64; 3]; 3];

fn mat_id() -> Mat3 {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    [[o, z, z], [z, o, z], [z, z, o]]
}

fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..3 {
                acc += a[i][k] * b[k][j];
            }
            *cell = acc;
        }
    }
    out
}

/// Complex rotation in the `(i, j)` plane.
fn givens(i: usize, j: usize, t: f64, phi: f64) -> Mat3 {
    let mut m = mat_id();
    let (ct, st) = (math::cos(t), math::sin(t));
    let ph = Complex64::new(math::cos(phi), math::sin(phi));
    m[i][i] = Complex64::new(ct, 0.0);
    m[j][j] = Complex64::new(ct, 0.0);
    m[i][j] = -ph.conj() * st;
    m[j][i] = ph * st;
    m
}

/// One-party measurement basis: the rows are the basis vectors,
/// `m[i][k] = <k|u_i>`.
#[derive(Debug, Clone, PartialEq)]
pub struct QutritBasis {
    m: Mat3,
}

impl QutritBasis {
    /// Builds the basis from 8 real parameters
    /// `[t1, p1, t2, p2, t3, p3, chi1, chi2]`: three plane rotations
    /// (01, 02, 12) followed by the diagonal `diag(1, e^{i chi1}, e^{i chi2})`.
    /// Any special unitary basis is reachable; overall row phases do not
    /// affect probabilities.
    pub fn from_params(p: &[f64; 8]) -> Self {
        let g01 = givens(0, 1, p[0], p[1]);
        let g02 = givens(0, 2, p[2], p[3]);
        let g12 = givens(1, 2, p[4], p[5]);
        let mut m = mat_mul(&mat_mul(&g01, &g02), &g12);
        let d1 = Complex64::new(math::cos(p[6]), math::sin(p[6]));
        let d2 = Complex64::new(math::cos(p[7]), math::sin(p[7]));
        for row in m.iter_mut() {
            row[1] *= d1;
            row[2] *= d2;
        }
        Self { m }
    }

    /// Accepts an explicit matrix after checking unitarity to 1e-12.
    pub fn from_matrix(m: Mat3) -> Result<Self, Error> {
        let mut dev2 = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..3 {
                    acc += m[i][k] * m[j][k].conj();
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                dev2 = dev2.max((acc - expect).norm_sqr());
            }
        }
        let dev = math::sqrt(dev2);
        if dev > 1e-12 {
            return Err(Error::NotUnitary { deviation: dev });
        }
        Ok(Self { m })
    }

    /// Computational basis (identity matrix).
    pub fn computational() -> Self {
        Self { m: mat_id() }
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.m
    }
}

/// Outcome pair `(a, b)`, each in `0..3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QutritOutcomePair {
    pub a: usize,
    pub b: usize,
}

impl QutritOutcomePair {
    pub fn new(a: usize, b: usize) -> Result<Self, Error> {
        if a > 2 || b > 2 {
            return Err(Error::invalid("qutrit outcomes range over 0..3"));
        }
        Ok(Self { a, b })
    }
}

/// Joint outcome probability
/// `|sum_k amp_k conj(A[i][k]) conj(B[j][k])|^2`.
pub fn qutrit_prob(
    g: &GammaParam,
    basis_a: &QutritBasis,
    basis_b: &QutritBasis,
    pair: &QutritOutcomePair,
) -> f64 {
    let amps = qutrit_amplitudes(g);
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..3 {
        acc += (basis_a.m[pair.a][k] * basis_b.m[pair.b][k]).conj() * amps[k];
    }
    acc.norm_sqr()
}

/// Index of the basis vector with the largest `|<u_i|2>|^2`; exact ties
/// resolve to the lowest index.
pub fn argmax_overlap(basis: &QutritBasis) -> usize {
    let mut best = 0usize;
    let mut best_w = basis.m[0][2].norm_sqr();
    for i in 1..3 {
        let w = basis.m[i][2].norm_sqr();
        if w > best_w {
            best_w = w;
            best = i;
        }
    }
    best
}

/// Probability that both parties output their preferred (largest
/// `|2>`-overlap) outcome. This is the quantity whose basis-minimum
/// certifies the local floor.
pub fn local_weight_objective(
    g: &GammaParam,
    basis_a: &QutritBasis,
    basis_b: &QutritBasis,
) -> f64 {
    let pair = QutritOutcomePair {
        a: argmax_overlap(basis_a),
        b: argmax_overlap(basis_b),
    };
    qutrit_prob(g, basis_a, basis_b, &pair)
}

/// Certified lower bound on the deterministic-model weight.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QutritBound {
    /// Minimum of the objective over both bases, floored at 0.
    pub value: f64,
    pub converged: bool,
    /// Restarts actually spent (the search stops early once it hits 0).
    pub starts_used: usize,
    /// Argmin parameters, 8 per party.
    pub best_params: Vec<f64>,
}

/// Parameters that put column-2 mass `x` on row 0 and split the rest
/// evenly; with `chi2 = pi` on one side, the interference term cancels
/// maximally. `x = 1/(1 + gamma)` (clamped to the argmax-feasible 1/3)
/// zeroes the objective for `gamma <= 2` and attains the positive floor
/// above.
fn cancellation_params(gamma: f64, side_b: bool) -> [f64; 8] {
    let x = (1.0 / (1.0 + gamma)).clamp(1.0 / 3.0, 1.0);
    let t1 = math::acos(math::sqrt((2.0 * x / (1.0 + x)).clamp(0.0, 1.0)));
    let t2 = math::acos(math::sqrt(((1.0 - x) / 2.0).clamp(0.0, 1.0)));
    let chi2 = if side_b { core::f64::consts::PI } else { 0.0 };
    [t1, 0.0, t2, 0.0, 0.0, 0.0, 0.0, chi2]
}

/// Minimizes [`local_weight_objective`] over both measurement bases
/// (16 parameters) with structured plus random restarts.
pub fn qutrit_lower_bound(g: &GammaParam, config: &OptConfig) -> QutritBound {
    let cfg = config.sanitized();
    let gm = *g;
    let objective = move |p: &[f64]| -> f64 {
        let pa: [f64; 8] = p[..8].try_into().expect("16 parameters");
        let pb: [f64; 8] = p[8..].try_into().expect("16 parameters");
        local_weight_objective(
            &gm,
            &QutritBasis::from_params(&pa),
            &QutritBasis::from_params(&pb),
        )
    };

    let start_for = |k: usize, sk: u64| -> Vec<f64> {
        let mut v = Vec::with_capacity(16);
        match k {
            0 => {
                v.extend_from_slice(&cancellation_params(gm.gamma, false));
                v.extend_from_slice(&cancellation_params(gm.gamma, true));
            }
            1 => v.extend_from_slice(&[0.0; 16]),
            2 => {
                // Balanced column-2 mass (exact three-way tie) on both sides.
                let t2 = math::acos(1.0 / math::sqrt(3.0));
                let a = [core::f64::consts::FRAC_PI_4, 0.0, t2, 0.0, 0.0, 0.0, 0.0, 0.0];
                let mut b = a;
                b[7] = core::f64::consts::PI;
                v.extend_from_slice(&a);
                v.extend_from_slice(&b);
            }
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(sk);
                if k % 2 == 1 {
                    for (i, base) in cancellation_params(gm.gamma, false)
                        .iter()
                        .chain(cancellation_params(gm.gamma, true).iter())
                        .enumerate()
                    {
                        let scale = if i % 8 == 6 || i % 8 == 7 { 0.3 } else { 0.08 };
                        v.push(base + rng.random_range(-scale..scale));
                    }
                } else {
                    for i in 0..16 {
                        let hi = if i % 2 == 0 && i % 8 < 6 {
                            core::f64::consts::PI
                        } else {
                            core::f64::consts::TAU
                        };
                        v.push(rng.random_range(0.0..hi));
                    }
                }
            }
        }
        v
    };

    let mut best: Option<crate::optimize::OptOutcome> = None;
    let mut starts_used = 0usize;
    let mut hit_floor = false;
    for k in 0..cfg.restarts {
        let sk = cfg.seed ^ (k as u64);
        let start = start_for(k, sk);
        // A seed already on the zero floor needs no simplex.
        let v0 = objective(&start);
        if v0 <= 1e-14 {
            best = Some(crate::optimize::OptOutcome {
                best_value: v0,
                best_point: start,
                evals_used: 1,
                converged: true,
            });
            starts_used += 1;
            hit_floor = true;
            break;
        }
        let run = nelder_mead(objective, &start, &cfg);
        starts_used += 1;
        let better = match &best {
            None => true,
            Some(b) => run.best_value < b.best_value,
        };
        if better {
            best = Some(run);
        }
        if best.as_ref().map(|b| b.best_value).unwrap_or(1.0) <= 1e-14 {
            hit_floor = true;
            break;
        }
    }
    let mut best = best.expect("restarts >= 1");
    if !hit_floor {
        let pol = optimize::polish(objective, &best.best_point, &[0.02, 1e-3, 1e-5], &cfg);
        if pol.best_value < best.best_value {
            best.best_value = pol.best_value;
            best.best_point = pol.best_point;
        }
        best.converged = best.converged || pol.converged;
    }
    QutritBound {
        value: best.best_value.max(0.0),
        converged: hit_floor || best.converged,
        starts_used,
        best_params: best.best_point,
    }
}
