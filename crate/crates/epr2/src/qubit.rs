//! Two-qubit correlations of the partially entangled state
//! `cos(theta)|00> + sin(theta)|11>`, explicit local models, and
//! certification of the induced local/nonlocal decomposition.
//!
//! Throughout, `c = cos(2 theta)` and `s = sin(2 theta)`. The joint
//! distribution for spin measurements along Bloch vectors `a`, `b` with
//! outcomes `ra`, `rb` in {+1, -1} is
//!
//! `P_Q = (1/4) [1 + ra c a_z + rb c b_z + ra rb (a_z b_z + s (a_x b_x - a_y b_y))]`.
//!
//! A decomposition `P_Q = w P_L + (1 - w) P_NL` certifies local content
//! at least `w` when `P_L` is local and `P_NL` is a valid no-signaling
//! distribution.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bloch::{BlochVector, Outcome};
use crate::error::Error;
use crate::math;
use crate::optimize::{self, fibonacci_sphere_grid, multistart, OptConfig};

/// Candidate nonlocal parts below this are rejected as negative.
pub const VALIDITY_THRESHOLD: f64 = -1e-9;

const BISECT_GRID: usize = 600;

/// State parameter `theta` in `[0, pi/4]` with cached `c = cos(2 theta)`
/// and `s = sin(2 theta)`. `theta = 0` is a product state, `pi/4` is
/// maximally entangled; on this domain `c, s >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThetaParam {
    theta: f64,
    c: f64,
    s: f64,
}

impl ThetaParam {
    /// Accepts `theta` in `[0, pi/4]` (with 1e-12 slack for grid endpoints).
    pub fn new(theta: f64) -> Result<Self, Error> {
        const SLACK: f64 = 1e-12;
        let max = core::f64::consts::FRAC_PI_4;
        if !theta.is_finite() || theta < -SLACK || theta > max + SLACK {
            return Err(Error::AngleOutOfRange {
                value: theta,
                min: 0.0,
                max,
            });
        }
        let t = theta.clamp(0.0, max);
        Ok(Self {
            theta: t,
            c: math::cos(2.0 * t),
            s: math::sin(2.0 * t),
        })
    }

    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `cos(2 theta)`.
    #[inline]
    pub fn c(&self) -> f64 {
        self.c
    }

    /// `sin(2 theta)`.
    #[inline]
    pub fn s(&self) -> f64 {
        self.s
    }
}

/// Joint probability value, clamped into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JointProb(f64);

impl JointProb {
    pub fn new(p: f64) -> Result<Self, Error> {
        if !p.is_finite() || !(-1e-12..=1.0 + 1e-12).contains(&p) {
            return Err(Error::NotAProbability { value: p });
        }
        Ok(Self(p.clamp(0.0, 1.0)))
    }

    /// Internal constructor for values that are probabilities up to
    /// floating-point rounding.
    #[inline]
    pub(crate) fn from_clamped(p: f64) -> Self {
        debug_assert!(
            p > -1e-9 && p < 1.0 + 1e-9,
            "value {p} is not a rounded probability"
        );
        Self(p.clamp(0.0, 1.0))
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Which explicit local model supplies `P_L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LocalModel {
    /// Deterministic sign model: response `sign(z)`, local weight
    /// `(1 - s) / 4`.
    Epr2Sign,
    /// Clipped linear response `f(z)`, local weight `1 - s`.
    ImprovedF,
}

impl LocalModel {
    pub fn id(&self) -> &'static str {
        match self {
            LocalModel::Epr2Sign => "EPR2_SIGN",
            LocalModel::ImprovedF => "IMPROVED_F",
        }
    }

    /// Largest local weight this model certifies analytically.
    pub fn canonical_weight(&self, theta: &ThetaParam) -> f64 {
        match self {
            LocalModel::Epr2Sign => 0.25 * (1.0 - theta.s()),
            LocalModel::ImprovedF => 1.0 - theta.s(),
        }
    }

    /// Single-party response `g(z)` entering
    /// `P_L = (1/4)(1 + ra g(a_z))(1 + rb g(b_z))`.
    #[inline]
    fn response(&self, theta: &ThetaParam, z: f64) -> f64 {
        match self {
            LocalModel::Epr2Sign => sign1(z),
            LocalModel::ImprovedF => f_eval(z, theta),
        }
    }
}

/// Sign with the convention `sign(0) = +1`.
#[inline]
fn sign1(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// True when `z` lies in the flat band `|z| <= (1 - s) / c` where the
/// clipped response is linear. Written multiplicatively so `c = 0` is safe.
#[inline]
fn in_band(z: f64, c: f64, cap: f64) -> bool {
    math::abs(z) * c <= cap
}

/// Clipped linear response `f(z) = sign(z) min(1, c |z| / (1 - s))`.
///
/// At `theta = pi/4` the slope degenerates (`c -> 0`, `1 - s -> 0`) and
/// `f` is defined as identically zero; the local weight `1 - s` vanishes
/// there, so nothing depends on the choice.
pub fn f_eval(x: f64, theta: &ThetaParam) -> f64 {
    debug_assert!(math::abs(x) <= 1.0 + 1e-12, "z-component {x} off the sphere");
    if x == 0.0 || theta.s >= 1.0 {
        return 0.0;
    }
    let cap = 1.0 - theta.s;
    if in_band(x, theta.c, cap) {
        theta.c * x / cap
    } else {
        sign1(x)
    }
}

/// Joint quantum distribution of the partially entangled state.
pub fn quantum_prob(
    theta: &ThetaParam,
    a: &BlochVector,
    b: &BlochVector,
    ra: Outcome,
    rb: Outcome,
) -> JointProb {
    let (u, v) = (ra.value(), rb.value());
    let e = quantum_correlator(theta, a, b);
    JointProb::from_clamped(0.25 * (1.0 + u * theta.c * a.z() + v * theta.c * b.z() + u * v * e))
}

/// Two-party correlator `E_Q = a_z b_z + s (a_x b_x - a_y b_y)`.
#[inline]
pub fn quantum_correlator(theta: &ThetaParam, a: &BlochVector, b: &BlochVector) -> f64 {
    a.z() * b.z() + theta.s * (a.x() * b.x() - a.y() * b.y())
}

/// Deterministic sign model `P_L = (1/4)(1 + ra sign(a_z))(1 + rb sign(b_z))`.
pub fn local_prob_sign(
    _theta: &ThetaParam,
    a: &BlochVector,
    b: &BlochVector,
    ra: Outcome,
    rb: Outcome,
) -> JointProb {
    let p = 0.25 * (1.0 + ra.value() * sign1(a.z())) * (1.0 + rb.value() * sign1(b.z()));
    JointProb::from_clamped(p)
}

/// Local model with the clipped linear response,
/// `P_L = (1/4)(1 + ra f(a_z))(1 + rb f(b_z))`.
pub fn local_prob_improved(
    theta: &ThetaParam,
    a: &BlochVector,
    b: &BlochVector,
    ra: Outcome,
    rb: Outcome,
) -> JointProb {
    let p =
        0.25 * (1.0 + ra.value() * f_eval(a.z(), theta)) * (1.0 + rb.value() * f_eval(b.z(), theta));
    JointProb::from_clamped(p)
}

/// Marginal bias of the nonlocal block, `F(z) = (c z - (1 - s) f(z)) / s`.
///
/// Requires `s > 0`. Inside the band `F` vanishes identically; the
/// piecewise form keeps that exact in floating point.
#[inline]
pub fn nonlocal_bias(theta: &ThetaParam, z: f64) -> f64 {
    debug_assert!(theta.s > 0.0, "nonlocal block needs s > 0");
    let cap = 1.0 - theta.s;
    if in_band(z, theta.c, cap) {
        0.0
    } else {
        (theta.c * z - cap * sign1(z)) / theta.s
    }
}

/// Correlator of the nonlocal block,
/// `G = a_x b_x - a_y b_y + (a_z b_z - (1 - s) f(a_z) f(b_z)) / s`.
///
/// Requires `s > 0`. When both `a_z` and `b_z` lie in the band this
/// reduces exactly to `a_x b_x - a_y b_y - a_z b_z`.
pub fn nonlocal_correlator(theta: &ThetaParam, a: &BlochVector, b: &BlochVector) -> f64 {
    debug_assert!(theta.s > 0.0, "nonlocal block needs s > 0");
    let cap = 1.0 - theta.s;
    let gz = if in_band(a.z(), theta.c, cap) && in_band(b.z(), theta.c, cap) {
        -a.z() * b.z()
    } else {
        let fa = f_eval(a.z(), theta);
        let fb = f_eval(b.z(), theta);
        (a.z() * b.z() - cap * fa * fb) / theta.s
    };
    a.x() * b.x() - a.y() * b.y() + gz
}

#[inline]
fn nonlocal_prob_raw(
    theta: &ThetaParam,
    a: &BlochVector,
    b: &BlochVector,
    ra: Outcome,
    rb: Outcome,
) -> f64 {
    let (u, v) = (ra.value(), rb.value());
    0.25 * (1.0
        + u * nonlocal_bias(theta, a.z())
        + v * nonlocal_bias(theta, b.z())
        + u * v * nonlocal_correlator(theta, a, b))
}

/// Nonlocal part of the decomposition at weight `1 - s` for the clipped
/// linear model:
/// `P_NL = (1/4)[1 + ra F(a_z) + rb F(b_z) + ra rb G(a, b)]`.
///
/// Fails with [`Error::DegenerateTheta`] at `theta = 0`, where the local
/// weight is 1 and no nonlocal part is defined.
pub fn nonlocal_prob(
    theta: &ThetaParam,
    a: &BlochVector,
    b: &BlochVector,
    ra: Outcome,
    rb: Outcome,
) -> Result<JointProb, Error> {
    if theta.s <= 0.0 {
        return Err(Error::DegenerateTheta);
    }
    Ok(JointProb::from_clamped(nonlocal_prob_raw(
        theta, a, b, ra, rb,
    )))
}

/// Numerical certificate for `P_Q = w P_L + (1 - w) P_NL` at weight `w`.
///
/// Field names are stable; the struct serializes 1:1 into the report
/// JSON emitted by the command line front end.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecompositionReport {
    pub theta: f64,
    pub model_id: String,
    pub certified_weight: f64,
    /// Largest `|P_Q - (w P_L + (1 - w) P_NL)|` over the examined settings.
    pub max_identity_residual: f64,
    /// Smallest candidate nonlocal value found (grid plus refinement).
    pub min_pnl_value: f64,
    /// Largest variation of a candidate marginal under the remote setting.
    pub max_nosignaling_residual: f64,
    /// Number of ordered setting pairs examined on the grid.
    pub settings_examined: usize,
}

/// Per-point quantities reused across the pair loop.
struct PointPre {
    x: f64,
    y: f64,
    z: f64,
    cz: f64,
    resp: f64,
    fval: f64,
    band: bool,
}

/// Certifies the decomposition at weight `weight` over a sphere-product
/// grid of `grid_size` directions per side (plus axis probes).
///
/// The candidate nonlocal part is the closed form tied to the clipped
/// linear model when `model` is [`LocalModel::ImprovedF`], `s > 0`, and
/// `weight` equals `1 - s` (within 1e-12); otherwise it is the quotient
/// `(P_Q - w P_L) / (1 - w)`. When `weight` is 1 within 1e-12 the
/// nonlocal part carries zero mass and the check reduces to
/// `P_Q = P_L`. With `refine` set, a local minimizer sharpens
/// `min_pnl_value` from the ten worst grid pairs; the residual maxima
/// stay grid-based.
///
/// `grid_size` below 100 is rejected, as is a `weight` outside `[0, 1]`.
pub fn verify_decomposition(
    theta: &ThetaParam,
    model: LocalModel,
    weight: f64,
    grid_size: usize,
    refine: bool,
) -> Result<DecompositionReport, Error> {
    if grid_size < 100 {
        return Err(Error::invalid("grid_size must be at least 100"));
    }
    if !weight.is_finite() || !(-1e-12..=1.0 + 1e-12).contains(&weight) {
        return Err(Error::NotAProbability { value: weight });
    }
    let w = weight.clamp(0.0, 1.0);

    let closed_form = model == LocalModel::ImprovedF
        && theta.s > 0.0
        && math::abs(w - (1.0 - theta.s)) <= 1e-12;
    let vacuous = !closed_form && w >= 1.0 - 1e-12;
    let inv1w = if vacuous { 0.0 } else { 1.0 / (1.0 - w) };

    let grid = fibonacci_sphere_grid(grid_size);
    let m = grid.len();
    let cap = 1.0 - theta.s;
    let pre: Vec<PointPre> = grid
        .iter()
        .map(|v| PointPre {
            x: v.x(),
            y: v.y(),
            z: v.z(),
            cz: theta.c * v.z(),
            resp: model.response(theta, v.z()),
            fval: f_eval(v.z(), theta),
            band: in_band(v.z(), theta.c, cap),
        })
        .collect();

    // Candidate nonlocal value for one setting pair and outcome pair.
    let candidate = |pa: &PointPre, pb: &PointPre, u: f64, v: f64| -> f64 {
        let eq = pa.z * pb.z + theta.s * (pa.x * pb.x - pa.y * pb.y);
        let pq = 0.25 * (1.0 + u * pa.cz + v * pb.cz + u * v * eq);
        if closed_form {
            let fa_bias = if pa.band {
                0.0
            } else {
                (pa.cz - cap * sign1(pa.z)) / theta.s
            };
            let fb_bias = if pb.band {
                0.0
            } else {
                (pb.cz - cap * sign1(pb.z)) / theta.s
            };
            let gz = if pa.band && pb.band {
                -pa.z * pb.z
            } else {
                (pa.z * pb.z - cap * pa.fval * pb.fval) / theta.s
            };
            let g = pa.x * pb.x - pa.y * pb.y + gz;
            0.25 * (1.0 + u * fa_bias + v * fb_bias + u * v * g)
        } else {
            let pl = 0.25 * (1.0 + u * pa.resp) * (1.0 + v * pb.resp);
            if vacuous {
                pl
            } else {
                (pq - w * pl) * inv1w
            }
        }
    };

    let mut min_pnl = f64::INFINITY;
    let mut max_identity = 0.0f64;
    // Marginal extrema: [point][outcome] over the remote setting.
    let mut a_lo = vec![[f64::INFINITY; 2]; m];
    let mut a_hi = vec![[f64::NEG_INFINITY; 2]; m];
    let mut b_lo = vec![[f64::INFINITY; 2]; m];
    let mut b_hi = vec![[f64::NEG_INFINITY; 2]; m];
    // Ten worst pairs feed the refinement stage.
    let mut worst: Vec<(f64, usize, usize)> = Vec::with_capacity(11);

    for (i, pa) in pre.iter().enumerate() {
        for (j, pb) in pre.iter().enumerate() {
            let mut pair_min = f64::INFINITY;
            let mut marg_a = [0.0f64; 2];
            let mut marg_b = [0.0f64; 2];
            for (ui, &ra) in Outcome::ALL.iter().enumerate() {
                for (vi, &rb) in Outcome::ALL.iter().enumerate() {
                    let u = ra.value();
                    let v = rb.value();
                    let pnl = candidate(pa, pb, u, v);
                    let eq = pa.z * pb.z + theta.s * (pa.x * pb.x - pa.y * pb.y);
                    let pq = 0.25 * (1.0 + u * pa.cz + v * pb.cz + u * v * eq);
                    let pl = 0.25 * (1.0 + u * pa.resp) * (1.0 + v * pb.resp);
                    let resid = math::abs(pq - (w * pl + (1.0 - w) * pnl));
                    if resid > max_identity {
                        max_identity = resid;
                    }
                    if pnl < pair_min {
                        pair_min = pnl;
                    }
                    marg_a[ui] += pnl;
                    marg_b[vi] += pnl;
                }
            }
            if pair_min < min_pnl {
                min_pnl = pair_min;
            }
            for o in 0..2 {
                if marg_a[o] < a_lo[i][o] {
                    a_lo[i][o] = marg_a[o];
                }
                if marg_a[o] > a_hi[i][o] {
                    a_hi[i][o] = marg_a[o];
                }
                if marg_b[o] < b_lo[j][o] {
                    b_lo[j][o] = marg_b[o];
                }
                if marg_b[o] > b_hi[j][o] {
                    b_hi[j][o] = marg_b[o];
                }
            }
            if worst.len() < 10 || pair_min < worst.last().map(|t| t.0).unwrap_or(f64::INFINITY) {
                worst.push((pair_min, i, j));
                worst.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
                worst.truncate(10);
            }
        }
    }

    let mut max_nosig = 0.0f64;
    for i in 0..m {
        for o in 0..2 {
            max_nosig = max_nosig.max(a_hi[i][o] - a_lo[i][o]);
            max_nosig = max_nosig.max(b_hi[i][o] - b_lo[i][o]);
        }
    }

    if refine {
        let pre_of = |v: &BlochVector| PointPre {
            x: v.x(),
            y: v.y(),
            z: v.z(),
            cz: theta.c * v.z(),
            resp: model.response(theta, v.z()),
            fval: f_eval(v.z(), theta),
            band: in_band(v.z(), theta.c, cap),
        };
        let mut objective = |x: &[f64]| -> f64 {
            let a = BlochVector::from_polar(x[0], x[1]);
            let b = BlochVector::from_polar(x[2], x[3]);
            let (pa, pb) = (pre_of(&a), pre_of(&b));
            let mut lo = f64::INFINITY;
            for &ra in &Outcome::ALL {
                for &rb in &Outcome::ALL {
                    let p = candidate(&pa, &pb, ra.value(), rb.value());
                    if p < lo {
                        lo = p;
                    }
                }
            }
            lo
        };
        let cfg = OptConfig {
            max_evals: 400,
            simplex_tolerance: 1e-12,
            restarts: 1,
            seed: 0,
        };
        for &(_, i, j) in &worst {
            let a = &grid[i];
            let b = &grid[j];
            let start = [
                math::acos(a.z().clamp(-1.0, 1.0)),
                math::atan2(a.y(), a.x()),
                math::acos(b.z().clamp(-1.0, 1.0)),
                math::atan2(b.y(), b.x()),
            ];
            let out = optimize::polish(&mut objective, &start, &[0.05, 5e-3], &cfg);
            if out.best_value < min_pnl {
                min_pnl = out.best_value;
            }
        }
    }

    Ok(DecompositionReport {
        theta: theta.theta,
        model_id: String::from(model.id()),
        certified_weight: w,
        max_identity_residual: max_identity,
        min_pnl_value: min_pnl,
        max_nosignaling_residual: max_nosig,
        settings_examined: m * m,
    })
}

/// Largest weight `w` for which `verify_decomposition` accepts the
/// model, located by bisection to `tolerance`.
///
/// Feasibility means the candidate nonlocal part stays above
/// [`VALIDITY_THRESHOLD`] and the reconstruction identity holds to 1e-9.
pub fn max_weight_for_local_model(
    theta: &ThetaParam,
    model: LocalModel,
    tolerance: f64,
) -> Result<f64, Error> {
    if !(tolerance > 0.0) || !tolerance.is_finite() {
        return Err(Error::invalid("tolerance must be positive and finite"));
    }
    let feasible = |w: f64| -> bool {
        let rep = verify_decomposition(theta, model, w, BISECT_GRID, true)
            .expect("internal verification arguments are valid");
        rep.min_pnl_value >= VALIDITY_THRESHOLD && rep.max_identity_residual <= 1e-9
    };
    if feasible(1.0) {
        return Ok(1.0);
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Largest CHSH value of the nonlocal block `P_NL`, maximized over the
/// four measurement directions with a two-stage (equatorial, then full
/// sphere) multistart search. Requires `s > 0`.
pub fn chsh_max_of_pnl(theta: &ThetaParam, config: &OptConfig) -> Result<f64, Error> {
    if theta.s <= 0.0 {
        return Err(Error::DegenerateTheta);
    }
    let cfg = config.sanitized();
    let th = *theta;

    let score = |a1: &BlochVector, a2: &BlochVector, b1: &BlochVector, b2: &BlochVector| {
        nonlocal_correlator(&th, a1, b1) + nonlocal_correlator(&th, a1, b2)
            + nonlocal_correlator(&th, a2, b1)
            - nonlocal_correlator(&th, a2, b2)
    };

    let fp2 = core::f64::consts::FRAC_PI_2;
    let planar_obj = |x: &[f64]| {
        let a1 = BlochVector::from_polar(fp2, x[0]);
        let a2 = BlochVector::from_polar(fp2, x[1]);
        let b1 = BlochVector::from_polar(fp2, x[2]);
        let b2 = BlochVector::from_polar(fp2, x[3]);
        -score(&a1, &a2, &b1, &b2)
    };
    // Equatorial settings that reach the algebraic maximum of the
    // cos(phi_a + phi_b) correlator family.
    let planar_known = [
        0.0,
        fp2,
        -core::f64::consts::FRAC_PI_4,
        core::f64::consts::FRAC_PI_4,
    ];
    let tau = core::f64::consts::TAU;
    let planar = multistart(
        planar_obj,
        |sk| {
            if sk == cfg.seed {
                planar_known.to_vec()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(sk);
                (0..4).map(|_| rng.random_range(0.0..tau)).collect()
            }
        },
        &cfg,
    );
    let planar = optimize::polish(planar_obj, &planar.best_point, &[1e-2, 1e-4, 1e-6], &cfg);

    let full_obj = |x: &[f64]| {
        let a1 = BlochVector::from_polar(x[0], x[1]);
        let a2 = BlochVector::from_polar(x[2], x[3]);
        let b1 = BlochVector::from_polar(x[4], x[5]);
        let b2 = BlochVector::from_polar(x[6], x[7]);
        -score(&a1, &a2, &b1, &b2)
    };
    let embed = [
        fp2,
        planar.best_point[0],
        fp2,
        planar.best_point[1],
        fp2,
        planar.best_point[2],
        fp2,
        planar.best_point[3],
    ];
    let full = multistart(
        full_obj,
        |sk| {
            if sk == cfg.seed {
                embed.to_vec()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(sk.wrapping_add(0x9e37_79b9_7f4a_7c15));
                (0..8).map(|_| rng.random_range(0.0..tau)).collect()
            }
        },
        &cfg,
    );
    let full = optimize::polish(full_obj, &full.best_point, &[1e-2, 1e-4, 1e-6], &cfg);

    Ok((-planar.best_value).max(-full.best_value))
}
