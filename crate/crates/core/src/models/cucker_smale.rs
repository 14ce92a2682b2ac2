//! Generalized flocking dynamics in three-dimensional space.
//!
//! Positions and velocities evolve by
//!
//! ```text
//! X_i(n+1) = X_i(n) + h V_i(n)
//! V_i(n+1) = V_i(n) + sum_{j != i} f(||X_i(n) - X_j(n)||) (V_j(n) - V_i(n))
//! ```
//!
//! with a non-increasing kernel `f`. When `sup f = f(0) < 1/s` the velocity
//! update is a convex combination: the realized matrices are symmetric with
//! diagonal at least `1 - (s-1) sup f > 0`. The flocking check evaluates the
//! kernel bound together with the initial-condition inequality
//! `M_v < (s / 3h) * integral_{M_x}^inf f(y) dy`, using the closed-form
//! threshold `s K / (3 h (2 beta - 1) (M_x + sigma)^(2 beta - 1))` for the
//! parametric kernel `f(y) = K / (sigma^2 + y^2)^beta` with `beta > 1/2`
//! (the integral diverges for `beta <= 1/2`, so the condition is automatic),
//! and adaptive quadrature with divergence detection for custom kernels.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::matrix::StochasticMatrix;

pub type Vec3 = [f64; 3];

/// Communication kernel for the velocity coupling.
#[derive(Clone)]
pub enum CsKernel {
    /// `f(y) = K / (sigma^2 + y^2)^beta`.
    Parametric { k: f64, sigma: f64, beta: f64 },
    /// Arbitrary non-increasing nonnegative kernel.
    Custom { f: Arc<dyn Fn(f64) -> f64 + Send + Sync> },
}

impl std::fmt::Debug for CsKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Parametric { k, sigma, beta } => {
                write!(f, "Parametric {{ k: {k}, sigma: {sigma}, beta: {beta} }}")
            }
            Self::Custom { .. } => write!(f, "Custom"),
        }
    }
}

impl CsKernel {
    pub fn eval(&self, y: f64) -> f64 {
        match self {
            Self::Parametric { k, sigma, beta } => k / (sigma * sigma + y * y).powf(*beta),
            Self::Custom { f } => f(y),
        }
    }

    /// Supremum of a non-increasing kernel.
    pub fn sup(&self) -> f64 {
        self.eval(0.0)
    }
}

#[derive(Debug, Clone)]
pub struct CuckerSmaleParams {
    /// Time step of the position update.
    pub h: f64,
    pub kernel: CsKernel,
    pub x0: Vec<Vec3>,
    pub v0: Vec<Vec3>,
}

fn norm3(a: Vec3) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn sub3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn max_pairwise_norm(points: &[Vec3]) -> f64 {
    let mut best = 0.0_f64;
    for (i, &a) in points.iter().enumerate() {
        for &b in &points[i + 1..] {
            best = best.max(norm3(sub3(a, b)));
        }
    }
    best
}

/// Recorded run: position and velocity trajectories, the realized velocity
/// update chain, and per-step diameters.
#[derive(Debug, Clone)]
pub struct CuckerSmaleRun {
    pub positions: Vec<Vec<Vec3>>,
    pub velocities: Vec<Vec<Vec3>>,
    pub chain: Chain,
    /// Max pairwise position distance per recorded step.
    pub max_pairwise_distance: Vec<f64>,
    /// Max pairwise velocity difference norm per recorded step.
    pub velocity_diameter: Vec<f64>,
}

fn validate_params(params: &CuckerSmaleParams) -> Result<usize> {
    let s = params.x0.len();
    if s == 0 || params.v0.len() != s {
        return Err(Error::InvalidParams(format!(
            "positions and velocities must agree on the agent count, got {} and {}",
            s,
            params.v0.len()
        )));
    }
    if !(params.h > 0.0) {
        return Err(Error::InvalidParams("time step h must be positive".into()));
    }
    if let CsKernel::Parametric { k, sigma, beta } = params.kernel {
        if !(k > 0.0 && sigma > 0.0 && beta >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "parametric kernel needs K > 0, sigma > 0, beta >= 0; got K={k}, sigma={sigma}, beta={beta}"
            )));
        }
    }
    let sup = params.kernel.sup();
    let bound = 1.0 / s as f64;
    if !(sup < bound) {
        return Err(Error::KernelBoundViolated { sup_f: sup, bound });
    }
    Ok(s)
}

/// Iterates the flocking dynamics for `n_end` steps. The velocity matrices
/// depend on positions only, so one shared matrix drives all three
/// coordinates per step; the realized matrices are returned as a chain.
pub fn cucker_smale_simulate(params: &CuckerSmaleParams, n_end: usize) -> Result<CuckerSmaleRun> {
    let s = validate_params(params)?;
    if n_end == 0 {
        return Err(Error::InvalidParams("horizon must be at least 1".into()));
    }
    let mut x = params.x0.clone();
    let mut v = params.v0.clone();
    let mut positions = Vec::with_capacity(n_end + 1);
    let mut velocities = Vec::with_capacity(n_end + 1);
    let mut matrices = Vec::with_capacity(n_end);
    let mut max_dist = Vec::with_capacity(n_end + 1);
    let mut vel_diam = Vec::with_capacity(n_end + 1);
    positions.push(x.clone());
    velocities.push(v.clone());
    max_dist.push(max_pairwise_norm(&x));
    vel_diam.push(max_pairwise_norm(&v));
    for _ in 0..n_end {
        let mut rows = Vec::with_capacity(s);
        for i in 0..s {
            let mut row = vec![0.0; s];
            let mut off_diag = 0.0;
            for j in 0..s {
                if j == i {
                    continue;
                }
                let w = params.kernel.eval(norm3(sub3(x[i], x[j])));
                row[j] = w;
                off_diag += w;
            }
            row[i] = 1.0 - off_diag;
            rows.push(row);
        }
        let w = StochasticMatrix::validate(&rows, 1e-9)?;
        // Positions advance with the current velocities before those are
        // averaged.
        for i in 0..s {
            for d in 0..3 {
                x[i][d] += params.h * v[i][d];
            }
        }
        let mut next_v = vec![[0.0; 3]; s];
        for d in 0..3 {
            let coord: Vec<f64> = v.iter().map(|vi| vi[d]).collect();
            let updated = w.apply(&coord)?;
            for i in 0..s {
                next_v[i][d] = updated[i];
            }
        }
        v = next_v;
        positions.push(x.clone());
        velocities.push(v.clone());
        max_dist.push(max_pairwise_norm(&x));
        vel_diam.push(max_pairwise_norm(&v));
        matrices.push(w);
    }
    let chain = Chain::from_matrices(matrices)?.with_label("cucker_smale");
    Ok(CuckerSmaleRun {
        positions,
        velocities,
        chain,
        max_pairwise_distance: max_dist,
        velocity_diameter: vel_diam,
    })
}

/// Outcome of the flocking condition check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlockingCheck {
    /// `sup f < 1/s`.
    pub f_bound_ok: bool,
    /// `M_v` below the integral threshold.
    pub initial_condition_ok: bool,
    pub m_x: f64,
    pub m_v: f64,
    /// `integral_{M_x}^inf f(y) dy`, `+inf` when divergent. For the
    /// parametric kernel with `beta > 1/2` this is the closed-form lower
    /// bound `K / ((2 beta - 1)(M_x + sigma)^(2 beta - 1))`.
    pub integral_value: f64,
    /// `(s / 3h) * integral_value`, the admissible velocity spread.
    pub threshold: f64,
}

/// Adaptive Simpson on `[a, b]`.
fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    depth: usize,
) -> Result<f64> {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        if !flm.is_finite() || !frm.is_finite() {
            return Err(Error::QuadratureFailure(format!(
                "kernel returned a non-finite value near y = {m}"
            )));
        }
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol || depth == 0 {
            if depth == 0 && delta.abs() > 15.0 * tol {
                return Err(Error::QuadratureFailure(format!(
                    "did not converge on [{a}, {b}]"
                )));
            }
            return Ok(left + right + delta / 15.0);
        }
        Ok(recurse(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1)?
            + recurse(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1)?)
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    if !fa.is_finite() || !fm.is_finite() || !fb.is_finite() {
        return Err(Error::QuadratureFailure("kernel returned a non-finite value".into()));
    }
    recurse(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, depth)
}

/// Improper integral of a nonnegative non-increasing kernel on `[a, inf)`:
/// the upper limit doubles until the last segment contributes less than
/// `1e-10`; past the growth budget the integral is declared divergent and
/// `+inf` is returned.
fn kernel_tail_integral(f: &dyn Fn(f64) -> f64, a: f64) -> Result<f64> {
    let mut total = 0.0;
    let mut left = a;
    let mut width = (a.abs() + 1.0).max(1.0);
    for _ in 0..64 {
        let right = left + width;
        let segment = adaptive_simpson(f, left, right, 1e-12, 40)?;
        total += segment;
        if segment.abs() < 1e-10 {
            return Ok(total);
        }
        left = right;
        width *= 2.0;
    }
    Ok(f64::INFINITY)
}

/// Evaluates the kernel bound and the initial-condition inequality for a
/// parameter set, without running the dynamics.
pub fn flocking_condition(params: &CuckerSmaleParams) -> Result<FlockingCheck> {
    let s = params.x0.len();
    if s == 0 || params.v0.len() != s {
        return Err(Error::InvalidParams(format!(
            "positions and velocities must agree on the agent count, got {} and {}",
            s,
            params.v0.len()
        )));
    }
    if !(params.h > 0.0) {
        return Err(Error::InvalidParams("time step h must be positive".into()));
    }
    let m_x = max_pairwise_norm(&params.x0);
    let m_v = max_pairwise_norm(&params.v0);
    let f_bound_ok = params.kernel.sup() < 1.0 / s as f64;
    let integral_value = match &params.kernel {
        CsKernel::Parametric { k, sigma, beta } => {
            if !(*k > 0.0 && *sigma > 0.0 && *beta >= 0.0) {
                return Err(Error::InvalidParams(format!(
                    "parametric kernel needs K > 0, sigma > 0, beta >= 0; got K={k}, sigma={sigma}, beta={beta}"
                )));
            }
            if *beta <= 0.5 {
                f64::INFINITY
            } else {
                k / ((2.0 * beta - 1.0) * (m_x + sigma).powf(2.0 * beta - 1.0))
            }
        }
        CsKernel::Custom { f } => kernel_tail_integral(&**f, m_x)?,
    };
    let threshold = s as f64 / (3.0 * params.h) * integral_value;
    let initial_condition_ok = m_v < threshold;
    Ok(FlockingCheck { f_bound_ok, initial_condition_ok, m_x, m_v, integral_value, threshold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificates::{is_doubly_stochastic, self_confidence};

    fn three_agents() -> (Vec<Vec3>, Vec<Vec3>) {
        let x0 = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let v0 = vec![[0.05, 0.0, 0.0], [0.0, 0.1, 0.0], [0.0, 0.0, 0.15]];
        (x0, v0)
    }

    #[test]
    fn identical_velocities_stay_constant_and_positions_advance_linearly() {
        let x0 = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let v0 = vec![[0.5, 0.25, 0.0]; 3];
        let params = CuckerSmaleParams {
            h: 0.1,
            kernel: CsKernel::Parametric { k: 0.1, sigma: 1.0, beta: 0.5 },
            x0,
            v0: v0.clone(),
        };
        let run = cucker_smale_simulate(&params, 10).unwrap();
        assert_eq!(run.velocities[10], v0);
        assert!((run.positions[10][0][0] - 10.0 * 0.1 * 0.5).abs() < 1e-12);
        assert!(run.velocity_diameter.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn realized_matrices_are_symmetric_and_self_confident() {
        let (x0, v0) = three_agents();
        let params = CuckerSmaleParams {
            h: 0.1,
            kernel: CsKernel::Parametric { k: 0.1, sigma: 1.0, beta: 0.5 },
            x0,
            v0,
        };
        let run = cucker_smale_simulate(&params, 30).unwrap();
        let sup = params.kernel.sup();
        for n in 0..30 {
            let w = run.chain.matrix_at(n).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    assert!((w.get(i, j) - w.get(j, i)).abs() < 1e-15);
                }
            }
            assert!(is_doubly_stochastic(&w, 1e-9));
        }
        let delta = self_confidence(&run.chain, 30).unwrap();
        assert!(delta >= 1.0 - 2.0 * sup - 1e-12);
    }

    #[test]
    fn velocity_spread_is_non_increasing_per_coordinate() {
        let (x0, v0) = three_agents();
        let params = CuckerSmaleParams {
            h: 0.1,
            kernel: CsKernel::Parametric { k: 0.1, sigma: 1.0, beta: 0.5 },
            x0,
            v0,
        };
        let run = cucker_smale_simulate(&params, 200).unwrap();
        for d in 0..3 {
            let spread = |vs: &Vec<Vec3>| {
                let lo = vs.iter().map(|v| v[d]).fold(f64::INFINITY, f64::min);
                let hi = vs.iter().map(|v| v[d]).fold(f64::NEG_INFINITY, f64::max);
                hi - lo
            };
            for w in run.velocities.windows(2) {
                assert!(spread(&w[1]) <= spread(&w[0]) + 1e-12);
            }
        }
    }

    #[test]
    fn kernel_bound_violation_is_rejected() {
        let (x0, v0) = three_agents();
        let params = CuckerSmaleParams {
            h: 0.1,
            kernel: CsKernel::Parametric { k: 0.5, sigma: 1.0, beta: 1.0 },
            x0,
            v0,
        };
        let err = cucker_smale_simulate(&params, 5).unwrap_err();
        assert!(matches!(err, Error::KernelBoundViolated { .. }));
    }

    #[test]
    fn heavy_tail_kernel_passes_unconditionally() {
        let (x0, v0) = three_agents();
        let params = CuckerSmaleParams {
            h: 0.1,
            kernel: CsKernel::Parametric { k: 0.1, sigma: 1.0, beta: 0.5 },
            x0,
            v0,
        };
        let check = flocking_condition(&params).unwrap();
        assert!(check.f_bound_ok);
        assert!(check.initial_condition_ok);
        assert!(check.integral_value.is_infinite());
    }

    #[test]
    fn closed_form_threshold_matches_hand_computation() {
        // beta = 1, s = 3, h = 0.1, K = 0.1, sigma = 1, M_x = 1:
        // threshold = sK / (3 h (2b-1) (M_x + sigma)) = 0.3 / (0.3 * 2) = 0.5.
        let x0 = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, 0.0, 0.0]];
        let mk = |m_v: f64| CuckerSmaleParams {
            h: 0.1,
            kernel: CsKernel::Parametric { k: 0.1, sigma: 1.0, beta: 1.0 },
            x0: x0.clone(),
            v0: vec![[0.0; 3], [m_v, 0.0, 0.0], [m_v / 2.0, 0.0, 0.0]],
        };
        let check = flocking_condition(&mk(0.4)).unwrap();
        assert!((check.threshold - 0.5).abs() < 1e-12);
        assert!((check.m_x - 1.0).abs() < 1e-12);
        assert!(check.initial_condition_ok);
        let check = flocking_condition(&mk(0.6)).unwrap();
        assert!(!check.initial_condition_ok);
    }

    #[test]
    fn quadrature_agrees_with_exact_arctan_integral() {
        // For f = K/(sigma^2 + y^2) the exact tail integral is
        // (K / sigma) * (pi/2 - atan(a / sigma)).
        let k = 0.1;
        let f = move |y: f64| k / (1.0 + y * y);
        let got = kernel_tail_integral(&f, 1.0).unwrap();
        let exact = k * (std::f64::consts::FRAC_PI_2 - 1.0_f64.atan());
        assert!((got - exact).abs() < 1e-8);
        // The closed-form parametric bound is a lower bound on the true
        // integral.
        let bound = k / ((2.0 - 1.0) * (1.0 + 1.0_f64).powf(1.0));
        assert!(bound <= got);
    }

    #[test]
    fn divergent_custom_kernel_is_detected() {
        let f = |y: f64| 0.3 / (1.0 + y);
        let got = kernel_tail_integral(&f, 0.0).unwrap();
        assert!(got.is_infinite());
    }

    #[test]
    fn f_bound_failure_is_reported_regardless_of_states() {
        let x0 = vec![[0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]];
        let v0 = vec![[0.0; 3]; 3];
        let params = CuckerSmaleParams {
            h: 0.1,
            kernel: CsKernel::Parametric { k: 0.4, sigma: 1.0, beta: 1.0 },
            x0,
            v0,
        };
        let check = flocking_condition(&params).unwrap();
        assert!(!check.f_bound_ok);
    }
}
