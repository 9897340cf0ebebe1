//! Relative pose under planar motion.
//!
//! With `θ1 = θ - φ` and `θ2 = φ` every correspondence gives
//! `g(θ1, θ2) = A1 sin(θ1 + φ1) + A2 sin(θ2 + φ2)` and an inlier satisfies
//! `|g| <= eps`. The accelerated bounder branches over `θ1` only and stabs
//! `θ2`.

use alloc::vec::Vec;

use crate::engine::{self, Bounder, Cube, EngineError, LowerBound, SolveOptions, SolveReport};
use crate::interval::{sin_range, sinusoid_parts_polar, Interval, Stabber};
use crate::math::{self, FRAC_PI_2, PI};

/// Normalized image coordinates of one point seen in two views.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corr2D2D {
    pub x1: [f64; 2],
    pub x2: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarConstraint {
    pub a1: f64,
    pub phi1: f64,
    pub a2: f64,
    pub phi2: f64,
}

impl PlanarConstraint {
    #[inline]
    pub fn residual(&self, theta1: f64, theta2: f64) -> f64 {
        self.a1 * math::sin(theta1 + self.phi1) + self.a2 * math::sin(theta2 + self.phi2)
    }

    /// Range of the first term over an arc of `θ1`.
    pub fn term1_range(&self, arc: Interval) -> Interval {
        sin_range(arc.lo() + self.phi1, arc.hi() + self.phi1).scale(self.a1)
    }

    pub fn term2_range(&self, arc: Interval) -> Interval {
        sin_range(arc.lo() + self.phi2, arc.hi() + self.phi2).scale(self.a2)
    }
}

/// Regroup the epipolar residual
/// `u1 v2 cos θ2 - v2 sin θ2 - u2 v1 cos θ1 - v1 sin θ1`
/// into amplitude and phase form.
pub fn build_planar(c: &Corr2D2D) -> PlanarConstraint {
    let [u1, v1] = c.x1;
    let [u2, v2] = c.x2;
    let (s1, c1) = (-v1, -u2 * v1);
    let (s2, c2) = (-v2, u1 * v2);
    PlanarConstraint {
        a1: math::hypot(s1, c1),
        phi1: math::atan2(c1, s1),
        a2: math::hypot(s2, c2),
        phi2: math::atan2(c2, s2),
    }
}

/// The epipolar residual evaluated directly.
pub fn epipolar_residual(c: &Corr2D2D, theta1: f64, theta2: f64) -> f64 {
    let [u1, v1] = c.x1;
    let [u2, v2] = c.x2;
    u1 * v2 * math::cos(theta2) - v2 * math::sin(theta2) - u2 * v1 * math::cos(theta1) - v1 * math::sin(theta1)
}

pub fn consensus(constraints: &[PlanarConstraint], eps: f64, theta1: f64, theta2: f64) -> usize {
    constraints.iter().filter(|c| c.residual(theta1, theta2).abs() <= eps).count()
}

/// Search box for `(θ1, θ2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarDomain {
    pub theta1: Interval,
    pub theta2: Interval,
}

impl Default for PlanarDomain {
    fn default() -> Self {
        Self { theta1: Interval::raw(-FRAC_PI_2, FRAC_PI_2), theta2: Interval::raw(-PI, PI) }
    }
}

impl PlanarDomain {
    pub fn cube(&self) -> Cube {
        Cube::from_sides(&[self.theta1, self.theta2])
    }
}

#[derive(Debug, Clone)]
pub struct PlainPlanarBounder<'a> {
    constraints: &'a [PlanarConstraint],
    eps: f64,
}

impl<'a> PlainPlanarBounder<'a> {
    pub fn new(constraints: &'a [PlanarConstraint], eps: f64) -> Self {
        Self { constraints, eps }
    }
}

impl Bounder for PlainPlanarBounder<'_> {
    fn dim(&self) -> usize {
        2
    }

    fn lower(&self, cube: &Cube) -> LowerBound {
        let c = cube.center();
        LowerBound { count: consensus(self.constraints, self.eps, c[0], c[1]), witness: c }
    }

    fn upper(&self, cube: &Cube) -> usize {
        let (s1, s2) = (cube.side(0), cube.side(1));
        self.constraints
            .iter()
            .filter(|c| {
                let g = c.term1_range(s1) + c.term2_range(s2);
                g.lo() <= self.eps && g.hi() >= -self.eps
            })
            .count()
    }
}

/// Branches over `θ1`, stabs `θ2` inside `theta2`.
#[derive(Debug, Clone)]
pub struct AcmPlanarBounder<'a> {
    constraints: &'a [PlanarConstraint],
    eps: f64,
    theta2: Interval,
    // A2 sin(θ2 + φ2) = A2 cos(θ2 - (π/2 - φ2))
    phase2: Vec<f64>,
}

impl<'a> AcmPlanarBounder<'a> {
    pub fn new(constraints: &'a [PlanarConstraint], eps: f64, theta2: Interval) -> Self {
        let phase2 = constraints.iter().map(|c| FRAC_PI_2 - c.phi2).collect();
        Self { constraints, eps, theta2, phase2 }
    }

    /// Stab the sets `{θ2 : lo <= A2 sin(θ2 + φ2) <= hi}` with per-constraint
    /// `(lo, hi)` produced by `band`.
    fn stab(&self, band: impl Fn(&PlanarConstraint) -> (f64, f64)) -> (usize, f64) {
        let mut stabber = Stabber::with_capacity(2 * self.constraints.len());
        for (c, &phase) in self.constraints.iter().zip(&self.phase2) {
            let (lo, hi) = band(c);
            for iv in &sinusoid_parts_polar(c.a2, phase, 0.0, lo, hi) {
                stabber.push_within(*iv, &self.theta2);
            }
        }
        let r = stabber.solve();
        (r.count, r.stabber.unwrap_or(self.theta2.mid()))
    }
}

impl Bounder for AcmPlanarBounder<'_> {
    fn dim(&self) -> usize {
        1
    }

    fn lower(&self, cube: &Cube) -> LowerBound {
        let t1 = cube.side(0).mid();
        let eps = self.eps;
        let (count, t2) = self.stab(|c| {
            let k = c.a1 * math::sin(t1 + c.phi1);
            (-eps - k, eps - k)
        });
        LowerBound { count, witness: alloc::vec![t1, t2] }
    }

    fn upper(&self, cube: &Cube) -> usize {
        let arc = cube.side(0);
        let eps = self.eps;
        self.stab(|c| {
            let k = c.term1_range(arc);
            (-eps - k.hi(), eps - k.lo())
        })
        .0
    }
}

pub fn solve_plain2d(
    constraints: &[PlanarConstraint],
    eps: f64,
    domain: &PlanarDomain,
    opts: &SolveOptions,
) -> Result<SolveReport, EngineError> {
    engine::solve(&PlainPlanarBounder::new(constraints, eps), domain.cube(), opts)
}

/// The report's `best_param` holds `(θ1, θ2)`.
pub fn solve_acm1(
    constraints: &[PlanarConstraint],
    eps: f64,
    domain: &PlanarDomain,
    opts: &SolveOptions,
) -> Result<SolveReport, EngineError> {
    engine::solve(&AcmPlanarBounder::new(constraints, eps, domain.theta2), Cube::from_sides(&[domain.theta1]), opts)
}

/// Recover `(θ, φ)` from `(θ1, θ2)`.
pub fn to_motion(theta1: f64, theta2: f64) -> (f64, f64) {
    (theta1 + theta2, theta2)
}

/// Exhaustive grid maximum, `n x n` samples over the domain.
pub fn grid_max(constraints: &[PlanarConstraint], eps: f64, domain: &PlanarDomain, n: usize) -> usize {
    let at = |iv: &Interval, i: usize| iv.lo() + iv.width() * (i as f64 + 0.5) / n as f64;
    let mut best = 0;
    let mut t1_terms: Vec<f64> = Vec::with_capacity(constraints.len());
    for i in 0..n {
        let t1 = at(&domain.theta1, i);
        t1_terms.clear();
        t1_terms.extend(constraints.iter().map(|c| c.a1 * math::sin(t1 + c.phi1)));
        for j in 0..n {
            let t2 = at(&domain.theta2, j);
            let count = constraints
                .iter()
                .zip(&t1_terms)
                .filter(|(c, k)| (*k + c.a2 * math::sin(t2 + c.phi2)).abs() <= eps)
                .count();
            best = best.max(count);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_corr(rng: &mut ChaCha8Rng) -> Corr2D2D {
        let mut r = || rng.random_range(-1.0..1.0);
        Corr2D2D { x1: [r(), r()], x2: [r(), r()] }
    }

    fn random_constraints(rng: &mut ChaCha8Rng, m: usize, inliers: usize) -> (Vec<PlanarConstraint>, f64, f64) {
        let t1 = rng.random_range(-1.0..1.0);
        let t2 = rng.random_range(-1.0..1.0);
        let mut out = Vec::with_capacity(m);
        while out.len() < m {
            let c = build_planar(&random_corr(rng));
            if out.len() < inliers {
                // shift phi1 so the constraint is satisfied at (t1, t2)
                let k = c.a2 * math::sin(t2 + c.phi2);
                if c.a1 < k.abs() + 1e-3 {
                    continue;
                }
                let phi1 = math::asin(-k / c.a1) - t1;
                out.push(PlanarConstraint { phi1, ..c });
            } else {
                out.push(c);
            }
        }
        (out, t1, t2)
    }

    #[test]
    fn amplitude_phase_matches_epipolar_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let c = random_corr(&mut rng);
            let p = build_planar(&c);
            assert!(p.a1 >= 0.0 && p.a2 >= 0.0);
            for _ in 0..100 {
                let t1 = rng.random_range(-PI..PI);
                let t2 = rng.random_range(-PI..PI);
                assert!((p.residual(t1, t2) - epipolar_residual(&c, t1, t2)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn horizon_points_are_degenerate() {
        let p = build_planar(&Corr2D2D { x1: [0.3, 0.0], x2: [-0.2, 0.0] });
        assert_eq!((p.a1, p.a2), (0.0, 0.0));
    }

    #[test]
    fn everything_feasible_with_wide_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cs: Vec<_> = (0..30).map(|_| build_planar(&random_corr(&mut rng))).collect();
        let eps = cs.iter().map(|c| c.a1 + c.a2).fold(0.0, f64::max) + 1e-9;
        let d = PlanarDomain::default();
        assert_eq!(PlainPlanarBounder::new(&cs, eps).upper(&d.cube()), 30);
        assert_eq!(AcmPlanarBounder::new(&cs, eps, d.theta2).upper(&Cube::from_sides(&[d.theta1])), 30);
    }

    #[test]
    fn point_cube_collapses_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (cs, t1, t2) = random_constraints(&mut rng, 40, 20);
        let point = Cube::from_sides(&[Interval::point(t1), Interval::point(t2)]);
        let plain = PlainPlanarBounder::new(&cs, 1e-3);
        assert_eq!(plain.lower(&point).count, plain.upper(&point));
        let acm = AcmPlanarBounder::new(&cs, 1e-3, PlanarDomain::default().theta2);
        let c1 = Cube::from_sides(&[Interval::point(t1)]);
        assert_eq!(acm.lower(&c1).count, acm.upper(&c1));
    }

    #[test]
    fn plain_upper_dominates_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let (cs, _, _) = random_constraints(&mut rng, 30, 10);
            let lo1 = rng.random_range(-1.5..1.0);
            let lo2 = rng.random_range(-3.0..2.5);
            let d = PlanarDomain {
                theta1: Interval::new(lo1, lo1 + rng.random_range(0.0..0.5)).unwrap(),
                theta2: Interval::new(lo2, lo2 + rng.random_range(0.0..0.5)).unwrap(),
            };
            let eps = 0.05;
            let up = PlainPlanarBounder::new(&cs, eps).upper(&d.cube());
            let acm_up = AcmPlanarBounder::new(&cs, eps, d.theta2).upper(&Cube::from_sides(&[d.theta1]));
            let grid = grid_max(&cs, eps, &d, 100);
            assert!(up >= grid && acm_up >= grid);
            assert!(acm_up <= up);
        }
    }

    #[test]
    fn acm_lower_is_at_least_plain_lower() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (cs, _, _) = random_constraints(&mut rng, 50, 20);
        let d = PlanarDomain::default();
        let plain = PlainPlanarBounder::new(&cs, 0.01);
        let acm = AcmPlanarBounder::new(&cs, 0.01, d.theta2);
        for c in d.cube().split().iter().flat_map(|c| c.split()) {
            let c1 = Cube::from_sides(&[c.side(0)]);
            assert!(acm.lower(&c1).count >= plain.lower(&Cube::from_sides(&[c.side(0), d.theta2])).count);
        }
    }

    #[test]
    fn acm_and_plain_find_planted_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let (cs, t1, t2) = random_constraints(&mut rng, 50, 15);
            let eps = 0.01;
            let d = PlanarDomain::default();
            let opts = SolveOptions::with_depth(10);
            let a = solve_acm1(&cs, eps, &d, &opts).unwrap();
            let p = solve_plain2d(&cs, eps, &d, &opts).unwrap();
            assert!(a.best_count >= 15);
            assert!(a.best_count >= consensus(&cs, eps, t1, t2));
            assert_eq!(consensus(&cs, eps, a.best_param[0], a.best_param[1]), a.best_count);
            assert_eq!(consensus(&cs, eps, p.best_param[0], p.best_param[1]), p.best_count);
            assert!(a.iterations < p.iterations);
        }
    }
}
