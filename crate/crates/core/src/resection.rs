//! Yaw-only camera resectioning with known pitch and roll.
//!
//! Each pair of 3D-2D correspondences yields, after eliminating the camera
//! translation, a constraint `d1 sin α + d2 cos α + d3 = 0` in the unknown yaw
//! `α` alone. The accelerated solver inverts every band `|d(α)| <= eps` in
//! closed form and stabs the resulting intervals once; the plain solver runs
//! one-dimensional branch and bound over `[-π, π]`.

use alloc::vec::Vec;

use crate::engine::{self, Bounder, Cube, EngineError, LowerBound, SolveOptions, SolveReport};
use crate::geom::{mat_mul, mat_vec, rot_x, rot_y, Vec3};
use crate::interval::{angle_domain, cos_range, sin_range, sinusoid_parts, Interval, Stabber};
use crate::math;

/// World point and its normalized image observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corr3D2D {
    pub p: Vec3,
    pub u: [f64; 2],
}

/// Pitch (about y) and roll (about x) from an inertial sensor, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ImuPrior {
    pub pitch: f64,
    pub roll: f64,
}

/// Translation-free residual `d(α) = d1 sin α + d2 cos α + d3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimConstraint {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl TimConstraint {
    #[inline]
    pub fn residual(&self, alpha: f64) -> f64 {
        self.d1 * math::sin(alpha) + self.d2 * math::cos(alpha) + self.d3
    }

    /// Range of the residual over an arc of yaw angles.
    pub fn residual_range(&self, arc: Interval) -> Interval {
        let s = sin_range(arc.lo(), arc.hi());
        let c = cos_range(arc.lo(), arc.hi());
        (s.scale(self.d1) + c.scale(self.d2)).shift(self.d3)
    }
}

/// Constraint built from correspondences `first` and `first + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimPair {
    pub first: usize,
    pub constraint: TimConstraint,
}

/// Eliminate the translation from two correspondences.
///
/// With `w = R_y R_x p` the projection equations read
/// `t1 - u1 t3 = u1 w3 - (R_z w)_1` and `t2 - u2 t3 = u2 w3 - (R_z w)_2`.
/// The left-hand sides of the four equations from two points are annihilated
/// by `λ = (Δv, -Δu, -Δv, Δu) / |Δ|`, where `Δ` is the image displacement;
/// applying `λ` to the right-hand sides gives a sinusoid in the yaw.
/// Returns `None` when both observations coincide.
pub fn build_tim(ci: &Corr3D2D, cj: &Corr3D2D, prior: &ImuPrior) -> Option<TimConstraint> {
    let du = cj.u[0] - ci.u[0];
    let dv = cj.u[1] - ci.u[1];
    let len = math::hypot(du, dv);
    if len.is_nan() || len <= 1e-12 {
        return None;
    }
    let (l1, l2) = (dv / len, -du / len);
    let tilt = mat_mul(&rot_y(prior.pitch), &rot_x(prior.roll));
    let wi = mat_vec(&tilt, ci.p);
    let wj = mat_vec(&tilt, cj.p);
    let d1 = l1 * (wi[1] - wj[1]) + l2 * (wj[0] - wi[0]);
    let d2 = l1 * (wj[0] - wi[0]) + l2 * (wj[1] - wi[1]);
    let d3 = l1 * (ci.u[0] * wi[2] - cj.u[0] * wj[2]) + l2 * (ci.u[1] * wi[2] - cj.u[1] * wj[2]);
    Some(TimConstraint { d1, d2, d3 })
}

/// Consecutive pairing `(i, i + 1)`; degenerate pairs are dropped.
pub fn build_tims(corrs: &[Corr3D2D], prior: &ImuPrior) -> Vec<TimPair> {
    corrs
        .windows(2)
        .enumerate()
        .filter_map(|(i, w)| build_tim(&w[0], &w[1], prior).map(|constraint| TimPair { first: i, constraint }))
        .collect()
}

/// Number of constraints with `|d(α)| <= eps`.
pub fn consensus(constraints: &[TimConstraint], eps: f64, alpha: f64) -> usize {
    constraints.iter().filter(|c| c.residual(alpha).abs() <= eps).count()
}

/// Globally optimal yaw from a single stabbing pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Acm0Solution {
    pub alpha: f64,
    pub count: usize,
}

pub fn solve_acm0(constraints: &[TimConstraint], eps: f64) -> Acm0Solution {
    let mut stabber = Stabber::with_capacity(2 * constraints.len());
    for c in constraints {
        stabber.push_set(&sinusoid_parts(c.d1, c.d2, c.d3, -eps, eps));
    }
    let r = stabber.solve();
    Acm0Solution { alpha: r.stabber.unwrap_or(0.0), count: r.count }
}

/// [`solve_acm0`] wrapped in the report shape used by the other solvers.
pub fn solve_acm0_report(constraints: &[TimConstraint], eps: f64) -> SolveReport {
    #[cfg(feature = "std")]
    let started = std::time::Instant::now();
    let sol = solve_acm0(constraints, eps);
    #[cfg(feature = "std")]
    let wall_time = started.elapsed().as_secs_f64();
    #[cfg(not(feature = "std"))]
    let wall_time = 0.0;
    SolveReport {
        best_param: alloc::vec![sol.alpha],
        best_count: sol.count,
        iterations: 1,
        cubes_pruned: 0,
        cubes_split: 0,
        max_queue_len: 0,
        wall_time,
        bound_trace: None,
    }
}

/// Plain one-dimensional bounds: center evaluation below, interval
/// arithmetic on exact sine and cosine ranges above.
#[derive(Debug, Clone)]
pub struct PlainYawBounder<'a> {
    constraints: &'a [TimConstraint],
    eps: f64,
}

impl<'a> PlainYawBounder<'a> {
    pub fn new(constraints: &'a [TimConstraint], eps: f64) -> Self {
        Self { constraints, eps }
    }
}

impl Bounder for PlainYawBounder<'_> {
    fn dim(&self) -> usize {
        1
    }

    fn lower(&self, cube: &Cube) -> LowerBound {
        let alpha = cube.side(0).mid();
        LowerBound { count: consensus(self.constraints, self.eps, alpha), witness: alloc::vec![alpha] }
    }

    fn upper(&self, cube: &Cube) -> usize {
        let arc = cube.side(0);
        self.constraints
            .iter()
            .filter(|c| {
                let r = c.residual_range(arc);
                r.lo() <= self.eps && r.hi() >= -self.eps
            })
            .count()
    }
}

pub fn solve_plain1d(
    constraints: &[TimConstraint],
    eps: f64,
    max_depth: u32,
) -> Result<SolveReport, EngineError> {
    engine::solve(
        &PlainYawBounder::new(constraints, eps),
        Cube::from_sides(&[angle_domain()]),
        &SolveOptions::with_depth(max_depth),
    )
}
