//! Translation search for 3D-3D registration.
//!
//! Rotation drops out through `‖q‖ = ‖p + t‖`, leaving a consensus problem
//! over `t` alone. With correspondences each pair `(p, q)` is a spherical
//! shell constraint on `t`; without them, rotation-invariant pairs of
//! segments supply two shells that must hold at once. The accelerated
//! bounders branch over `(t1, t2)` and stab `t3`.

use alloc::vec::Vec;

use crate::engine::{self, Bounder, Cube, EngineError, LowerBound, SolveOptions, SolveReport};
use crate::geom::{add, norm, sub, Vec3};
use crate::interval::{intersect_parts, union_parts, Interval, Parts, Stabber};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corr3D3D {
    pub p: Vec3,
    pub q: Vec3,
}

/// Segment `(p1, p2)` of the reference set matched to `(q1, q2)` of the
/// moving set by length. `pi`/`qi` are the point indices in their sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiPair {
    pub p1: Vec3,
    pub p2: Vec3,
    pub q1: Vec3,
    pub q2: Vec3,
    pub pi: [usize; 2],
    pub qi: [usize; 2],
}

/// Axis-aligned translation search box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranslationBox {
    pub lo: Vec3,
    pub hi: Vec3,
}

impl Default for TranslationBox {
    fn default() -> Self {
        Self { lo: [-1.0; 3], hi: [1.0; 3] }
    }
}

impl TranslationBox {
    /// Bounding box of `q - p` over all point choices, padded by `pad`.
    pub fn covering(p: &[Vec3], q: &[Vec3], pad: f64) -> Self {
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for k in 0..3 {
            let (pmin, pmax) = min_max(p.iter().map(|v| v[k]));
            let (qmin, qmax) = min_max(q.iter().map(|v| v[k]));
            lo[k] = qmin - pmax - pad;
            hi[k] = qmax - pmin + pad;
        }
        Self { lo, hi }
    }

    pub fn side(&self, k: usize) -> Interval {
        Interval::raw(self.lo[k], self.hi[k])
    }

    pub fn cube3(&self) -> Cube {
        Cube::from_sides(&[self.side(0), self.side(1), self.side(2)])
    }

    pub fn cube2(&self) -> Cube {
        Cube::from_sides(&[self.side(0), self.side(1)])
    }

    pub fn contains(&self, t: &Vec3) -> bool {
        (0..3).all(|k| self.lo[k] <= t[k] && t[k] <= self.hi[k])
    }
}

fn min_max(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)))
}

/// `‖p + t‖` must fall in `[r - eps, r + eps]` with `r = ‖q‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Shell {
    p: Vec3,
    radius: f64,
    // squared radii of the band, inner clamped at zero
    inner2: f64,
    outer2: f64,
}

impl Shell {
    fn new(p: Vec3, q: Vec3, eps: f64) -> Self {
        let radius = norm(q);
        let inner = (radius - eps).max(0.0);
        Self { p, radius, inner2: inner * inner, outer2: (radius + eps) * (radius + eps) }
    }

    #[inline]
    fn residual(&self, t: &Vec3) -> f64 {
        (self.radius - norm(add(self.p, *t))).abs()
    }

    /// Whether some `t` within distance `r` of `tc` can satisfy the band.
    #[inline]
    fn may_hold(&self, tc: &Vec3, r: f64, eps: f64) -> bool {
        (self.radius - norm(add(self.p, *tc))).abs() - r <= eps
    }

    /// Range of `(p1 + t1)^2 + (p2 + t2)^2` over the given sides.
    #[inline]
    fn planar_sq(&self, s1: Interval, s2: Interval) -> Interval {
        s1.shift(self.p[0]).sq() + s2.shift(self.p[1]).sq()
    }

    /// Radii `[s_lo, s_hi]` of `|p3 + t3|` allowed once the planar part is
    /// known to lie in `h`; `None` when the band is out of reach.
    #[inline]
    fn t3_radii(&self, h: Interval) -> Option<(f64, f64)> {
        let hi2 = self.outer2 - h.lo();
        if hi2 < 0.0 {
            return None;
        }
        Some((math::sqrt((self.inner2 - h.hi()).max(0.0)), math::sqrt(hi2)))
    }

    /// `t3` values in `domain` with `(p3 + t3)^2` inside the band once the
    /// planar part is known to lie in `h`.
    fn t3_parts(&self, h: Interval, domain: &Interval) -> Parts {
        let mut out = Parts::new();
        let Some((s_lo, s_hi)) = self.t3_radii(h) else {
            return out;
        };
        let c = -self.p[2];
        // the two branches touch when s_lo = 0
        let merged = if s_lo == 0.0 {
            [Some(Interval::raw(c - s_hi, c + s_hi)), None]
        } else {
            [Some(Interval::raw(c - s_hi, c - s_lo)), Some(Interval::raw(c + s_lo, c + s_hi))]
        };
        for iv in merged.into_iter().flatten() {
            if let Some(x) = iv.intersect(domain) {
                out.push(x);
            }
        }
        out
    }

    /// [`Shell::t3_parts`] fed straight into a stabber.
    #[inline]
    fn push_t3(&self, h: Interval, domain: &Interval, stabber: &mut Stabber) {
        let Some((s_lo, s_hi)) = self.t3_radii(h) else {
            return;
        };
        let c = -self.p[2];
        if s_lo == 0.0 {
            stabber.push_within(Interval::raw(c - s_hi, c + s_hi), domain);
        } else {
            stabber.push_within(Interval::raw(c - s_hi, c - s_lo), domain);
            stabber.push_within(Interval::raw(c + s_lo, c + s_hi), domain);
        }
    }
}

pub fn consensus_corr(corrs: &[Corr3D3D], eps: f64, t: &Vec3) -> usize {
    corrs.iter().filter(|c| (norm(c.q) - norm(add(c.p, *t))).abs() <= eps).count()
}

/// Pairs whose two shell residuals are both within `eps`.
pub fn consensus_corrless(pairs: &[RiPair], eps: f64, t: &Vec3) -> usize {
    pairs.iter().filter(|r| pair_holds(r, eps, t)).count()
}

#[inline]
fn pair_holds(r: &RiPair, eps: f64, t: &Vec3) -> bool {
    (norm(r.q1) - norm(add(r.p1, *t))).abs() <= eps && (norm(r.q2) - norm(add(r.p2, *t))).abs() <= eps
}

/// Count each reference segment at most once, whichever moving segment it
/// matches.
pub fn unique_consensus_corrless(pairs: &[RiPair], eps: f64, t: &Vec3) -> usize {
    let mut hit: Vec<[usize; 2]> = pairs.iter().filter(|r| pair_holds(r, eps, t)).map(|r| r.pi).collect();
    hit.sort_unstable();
    hit.dedup();
    hit.len()
}

/// Candidate segments of one set: the `keep` longest, as `(length, i, j)`.
fn longest_segments(points: &[Vec3], keep: usize) -> Vec<(f64, usize, usize)> {
    let n = points.len();
    let mut segs = Vec::with_capacity(n.saturating_sub(1) * n / 2);
    for i in 0..n {
        for j in i + 1..n {
            segs.push((norm(sub(points[i], points[j])), i, j));
        }
    }
    if segs.len() > keep {
        segs.select_nth_unstable_by(keep - 1, |a, b| b.0.total_cmp(&a.0));
        segs.truncate(keep);
    }
    segs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    segs
}

/// Match the `keep` longest segments of `p` against those of `q` by length.
///
/// Each accepted match is emitted in both endpoint orientations, since the
/// length test cannot tell which end corresponds to which.
pub fn build_ri_pairs(p: &[Vec3], q: &[Vec3], tau: f64, keep: usize) -> Vec<RiPair> {
    if p.len() < 2 || q.len() < 2 || keep == 0 {
        return Vec::new();
    }
    let ps = longest_segments(p, keep);
    let qs = longest_segments(q, keep);
    let mut out = Vec::new();
    for &(dp, a, b) in &ps {
        let start = qs.partition_point(|s| s.0 < dp - tau);
        for &(dq, c, d) in qs[start..].iter().take_while(|s| s.0 <= dp + tau) {
            if (dq - dp).abs() > tau {
                continue;
            }
            for (x, y) in [(c, d), (d, c)] {
                out.push(RiPair { p1: p[a], p2: p[b], q1: q[x], q2: q[y], pi: [a, b], qi: [x, y] });
            }
        }
    }
    out
}

fn half_diameter(cube: &Cube) -> f64 {
    0.5 * cube.diameter()
}

fn centre3(cube: &Cube) -> Vec3 {
    let c = cube.center();
    [c[0], c[1], c[2]]
}

#[derive(Debug, Clone)]
pub struct PlainCorrBounder {
    shells: Vec<Shell>,
    eps: f64,
}

impl PlainCorrBounder {
    pub fn new(corrs: &[Corr3D3D], eps: f64) -> Self {
        Self { shells: corrs.iter().map(|c| Shell::new(c.p, c.q, eps)).collect(), eps }
    }
}

impl Bounder for PlainCorrBounder {
    fn dim(&self) -> usize {
        3
    }

    fn lower(&self, cube: &Cube) -> LowerBound {
        let t = centre3(cube);
        let count = self.shells.iter().filter(|s| s.residual(&t) <= self.eps).count();
        LowerBound { count, witness: t.to_vec() }
    }

    fn upper(&self, cube: &Cube) -> usize {
        let (t, r) = (centre3(cube), half_diameter(cube));
        self.shells.iter().filter(|s| s.may_hold(&t, r, self.eps)).count()
    }
}

fn stab_t3<'a, I>(sets: I, t3: &Interval, t1: f64, t2: f64) -> LowerBound
where
    I: Iterator<Item = Parts> + 'a,
{
    let mut stabber = Stabber::with_capacity(sets.size_hint().0);
    for parts in sets {
        match parts[..] {
            [only] if only == *t3 => stabber.push_covering(),
            _ => stabber.push_set(&parts),
        }
    }
    let r = stabber.solve();
    LowerBound { count: r.count, witness: alloc::vec![t1, t2, r.stabber.unwrap_or(t3.mid())] }
}

/// Branches over `(t1, t2)`, stabs `t3` inside `t3`.
#[derive(Debug, Clone)]
pub struct AcmCorrBounder {
    shells: Vec<Shell>,
    t3: Interval,
}

impl AcmCorrBounder {
    pub fn new(corrs: &[Corr3D3D], eps: f64, t3: Interval) -> Self {
        Self { shells: corrs.iter().map(|c| Shell::new(c.p, c.q, eps)).collect(), t3 }
    }
}

impl AcmCorrBounder {
    fn stab(&self, s1: Interval, s2: Interval) -> (usize, f64) {
        let mut stabber = Stabber::with_capacity(2 * self.shells.len());
        for s in &self.shells {
            s.push_t3(s.planar_sq(s1, s2), &self.t3, &mut stabber);
        }
        let r = stabber.solve();
        (r.count, r.stabber.unwrap_or(self.t3.mid()))
    }
}

impl Bounder for AcmCorrBounder {
    fn dim(&self) -> usize {
        2
    }

    fn lower(&self, cube: &Cube) -> LowerBound {
        let (t1, t2) = (cube.side(0).mid(), cube.side(1).mid());
        let (count, t3) = self.stab(Interval::point(t1), Interval::point(t2));
        LowerBound { count, witness: alloc::vec![t1, t2, t3] }
    }

    fn upper(&self, cube: &Cube) -> usize {
        self.stab(cube.side(0), cube.side(1)).0
    }
}

#[derive(Debug, Clone)]
pub struct PlainCorrlessBounder {
    shells: Vec<[Shell; 2]>,
    eps: f64,
}

fn pair_shells(pairs: &[RiPair], eps: f64) -> Vec<[Shell; 2]> {
    pairs.iter().map(|r| [Shell::new(r.p1, r.q1, eps), Shell::new(r.p2, r.q2, eps)]).collect()
}

impl PlainCorrlessBounder {
    pub fn new(pairs: &[RiPair], eps: f64) -> Self {
        Self { shells: pair_shells(pairs, eps), eps }
    }
}

impl Bounder for PlainCorrlessBounder {
    fn dim(&self) -> usize {
        3
    }

    fn lower(&self, cube: &Cube) -> LowerBound {
        let t = centre3(cube);
        let count = self.shells.iter().filter(|[u, v]| u.residual(&t) <= self.eps && v.residual(&t) <= self.eps).count();
        LowerBound { count, witness: t.to_vec() }
    }

    fn upper(&self, cube: &Cube) -> usize {
        let (t, r) = (centre3(cube), half_diameter(cube));
        self.shells.iter().filter(|[u, v]| u.may_hold(&t, r, self.eps) && v.may_hold(&t, r, self.eps)).count()
    }
}

/// How the two `t3` sets of a segment pair are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairCombine {
    /// Both shells must hold; bounds stay valid for the pair objective.
    #[default]
    Intersection,
    /// Either shell suffices. Lower bounds are then not achieved counts.
    Union,
}

#[derive(Debug, Clone)]
pub struct AcmCorrlessBounder {
    shells: Vec<[Shell; 2]>,
    t3: Interval,
    combine: PairCombine,
}

impl AcmCorrlessBounder {
    pub fn new(pairs: &[RiPair], eps: f64, t3: Interval, combine: PairCombine) -> Self {
        Self { shells: pair_shells(pairs, eps), t3, combine }
    }

    fn sets(&self, s1: Interval, s2: Interval) -> impl Iterator<Item = Parts> + '_ {
        self.shells.iter().map(move |[u, v]| {
            let a = u.t3_parts(u.planar_sq(s1, s2), &self.t3);
            let b = v.t3_parts(v.planar_sq(s1, s2), &self.t3);
            match self.combine {
                PairCombine::Intersection => intersect_parts(&a, &b),
                PairCombine::Union => union_parts(&a, &b),
            }
        })
    }
}

impl Bounder for AcmCorrlessBounder {
    fn dim(&self) -> usize {
        2
    }

    fn lower(&self, cube: &Cube) -> LowerBound {
        let (t1, t2) = (cube.side(0).mid(), cube.side(1).mid());
        stab_t3(self.sets(Interval::point(t1), Interval::point(t2)), &self.t3, t1, t2)
    }

    fn upper(&self, cube: &Cube) -> usize {
        stab_t3(self.sets(cube.side(0), cube.side(1)), &self.t3, 0.0, 0.0).count
    }
}

pub fn solve_plain_corr(
    corrs: &[Corr3D3D],
    eps: f64,
    bx: &TranslationBox,
    opts: &SolveOptions,
) -> Result<SolveReport, EngineError> {
    engine::solve(&PlainCorrBounder::new(corrs, eps), bx.cube3(), opts)
}

pub fn solve_acm_corr(
    corrs: &[Corr3D3D],
    eps: f64,
    bx: &TranslationBox,
    opts: &SolveOptions,
) -> Result<SolveReport, EngineError> {
    engine::solve(&AcmCorrBounder::new(corrs, eps, bx.side(2)), bx.cube2(), opts)
}

pub fn solve_plain_corrless(
    pairs: &[RiPair],
    eps: f64,
    bx: &TranslationBox,
    opts: &SolveOptions,
) -> Result<SolveReport, EngineError> {
    engine::solve(&PlainCorrlessBounder::new(pairs, eps), bx.cube3(), opts)
}

pub fn solve_acm_corrless(
    pairs: &[RiPair],
    eps: f64,
    bx: &TranslationBox,
    combine: PairCombine,
    opts: &SolveOptions,
) -> Result<SolveReport, EngineError> {
    engine::solve(&AcmCorrlessBounder::new(pairs, eps, bx.side(2), combine), bx.cube2(), opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{axis_angle, mat_vec, Mat3};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_vec(rng: &mut ChaCha8Rng, r: f64) -> Vec3 {
        [rng.random_range(-r..r), rng.random_range(-r..r), rng.random_range(-r..r)]
    }

    fn rand_rot(rng: &mut ChaCha8Rng) -> Mat3 {
        axis_angle(rand_vec(rng, 1.0), rng.random_range(-math::PI..math::PI))
    }

    /// Inliers follow `q = R (p + t)`; outliers get a fresh random `q`.
    fn corr_instance(rng: &mut ChaCha8Rng, m: usize, inliers: usize) -> (Vec<Corr3D3D>, Vec3) {
        let rot = rand_rot(rng);
        let t = rand_vec(rng, 0.5);
        let corrs = (0..m)
            .map(|i| {
                let p = rand_vec(rng, 1.0);
                let q = if i < inliers { mat_vec(&rot, add(p, t)) } else { rand_vec(rng, 1.5) };
                Corr3D3D { p, q }
            })
            .collect();
        (corrs, t)
    }

    #[test]
    fn ground_truth_point_cube_is_full() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (corrs, t) = corr_instance(&mut rng, 30, 30);
        let point = Cube::from_sides(&[Interval::point(t[0]), Interval::point(t[1]), Interval::point(t[2])]);
        let b = PlainCorrBounder::new(&corrs, 1e-9);
        assert_eq!(b.lower(&point).count, 30);
        assert_eq!(b.upper(&TranslationBox::default().cube3()), 30);
    }

    #[test]
    fn two_sided_t3_set() {
        // p3 = 0, band on |t3| = [1, 2]
        let s = Shell { p: [0.0; 3], radius: 1.5, inner2: 1.0, outer2: 4.0 };
        let parts = s.t3_parts(Interval::point(0.0), &Interval::raw(-10.0, 10.0));
        assert_eq!(parts.as_slice(), &[Interval::raw(-2.0, -1.0), Interval::raw(1.0, 2.0)]);
    }

    #[test]
    fn infeasible_ring_gives_nothing() {
        let s = Shell::new([0.0; 3], [0.0, 0.0, 0.001], 0.01);
        assert_eq!(s.inner2, 0.0);
        assert!(s.t3_parts(Interval::raw(1.0, 2.0), &Interval::raw(-10.0, 10.0)).is_empty());
    }

    #[test]
    fn t3_parts_match_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let dom = Interval::raw(-1.0, 1.0);
        for _ in 0..300 {
            let s = Shell::new(rand_vec(&mut rng, 1.0), rand_vec(&mut rng, 1.0), 0.05);
            let (t1, t2) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let parts = s.t3_parts(s.planar_sq(Interval::point(t1), Interval::point(t2)), &dom);
            for i in 0..=2000 {
                let t3 = -1.0 + i as f64 / 1000.0;
                let inside = parts.iter().any(|p| p.contains(t3));
                let r = s.residual(&[t1, t2, t3]);
                if (r - 0.05).abs() > 1e-9 {
                    assert_eq!(inside, r <= 0.05, "t3 = {t3}, r = {r}");
                }
            }
        }
    }

    fn sample_in(rng: &mut ChaCha8Rng, cube: &Cube) -> Vec3 {
        let mut t = [0.0; 3];
        for (k, x) in t.iter_mut().enumerate() {
            let s = cube.side(k);
            *x = s.lo() + s.width() * rng.random_range(0.0..=1.0);
        }
        t
    }

    #[test]
    fn corr_uppers_dominate_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (corrs, _) = corr_instance(&mut rng, 40, 10);
        let eps = 0.02;
        let plain = PlainCorrBounder::new(&corrs, eps);
        let acm = AcmCorrBounder::new(&corrs, eps, Interval::raw(-1.0, 1.0));
        for _ in 0..100 {
            let lo = rand_vec(&mut rng, 1.0);
            let w = rng.random_range(0.0..0.6);
            let cube = Cube::new(lo.to_vec(), lo.iter().map(|x| x + w).collect()).unwrap();
            let cube = Cube::new(cube.lo().to_vec(), cube.hi().iter().map(|x| x.min(1.0)).collect()).unwrap();
            let up = plain.upper(&cube);
            let acm_up = acm.upper(&Cube::from_sides(&[cube.side(0), cube.side(1)]));
            for _ in 0..200 {
                let t = sample_in(&mut rng, &cube);
                let c = consensus_corr(&corrs, eps, &t);
                assert!(c <= up && c <= acm_up);
            }
        }
    }

    #[test]
    fn corr_solvers_recover_translation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..3 {
            let (corrs, t) = corr_instance(&mut rng, 60, 20);
            let eps = 0.01;
            let bx = TranslationBox::default();
            let opts = SolveOptions::with_depth(10);
            let a = solve_acm_corr(&corrs, eps, &bx, &opts).unwrap();
            let p = solve_plain_corr(&corrs, eps, &bx, &opts).unwrap();
            for r in [&a, &p] {
                assert!(r.best_count >= 20);
                let est = [r.best_param[0], r.best_param[1], r.best_param[2]];
                assert_eq!(consensus_corr(&corrs, eps, &est), r.best_count);
            }
            assert!(a.iterations < p.iterations);
            let est = [a.best_param[0], a.best_param[1], a.best_param[2]];
            assert!(norm(sub(est, t)) < 0.1, "{est:?} vs {t:?}");
        }
    }

    fn corrless_instance(rng: &mut ChaCha8Rng, n: usize) -> (Vec<Vec3>, Vec<Vec3>, Vec3) {
        let rot = rand_rot(rng);
        let t = rand_vec(rng, 0.5);
        let p: Vec<Vec3> = (0..n).map(|_| rand_vec(rng, 1.0)).collect();
        let q = p.iter().map(|x| mat_vec(&rot, add(*x, t))).collect();
        (p, q, t)
    }

    #[test]
    fn ground_truth_segments_survive_filter() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (p, q, t) = corrless_instance(&mut rng, 25);
        let pairs = build_ri_pairs(&p, &q, 1e-4, 10_000);
        let truth = pairs.iter().filter(|r| r.pi == r.qi).count();
        assert_eq!(truth, 25 * 24 / 2);
        assert!(consensus_corrless(&pairs, 1e-9, &t) >= truth);
    }

    #[test]
    fn ri_filter_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let p: Vec<Vec3> = (0..15).map(|_| rand_vec(&mut rng, 1.0)).collect();
        let q: Vec<Vec3> = (0..15).map(|_| rand_vec(&mut rng, 1.0)).collect();
        let tau = 0.01;
        let pairs = build_ri_pairs(&p, &q, tau, 1000);
        let mut brute = 0;
        for a in 0..15 {
            for b in a + 1..15 {
                for c in 0..15 {
                    for d in c + 1..15 {
                        let dp = norm(sub(p[a], p[b]));
                        let dq = norm(sub(q[c], q[d]));
                        if (dp - dq).abs() <= tau {
                            brute += 2;
                        }
                    }
                }
            }
        }
        assert_eq!(pairs.len(), brute);
    }

    #[test]
    fn keep_limits_candidates() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p: Vec<Vec3> = (0..30).map(|_| rand_vec(&mut rng, 1.0)).collect();
        let segs = longest_segments(&p, 20);
        assert_eq!(segs.len(), 20);
        let shortest_kept = segs[0].0;
        let all = longest_segments(&p, usize::MAX);
        assert_eq!(all.iter().filter(|s| s.0 >= shortest_kept).count(), 20);
    }

    #[test]
    fn corrless_bounds_dominate_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (p, q, _) = corrless_instance(&mut rng, 12);
        let pairs = build_ri_pairs(&p, &q, 0.01, 40);
        let eps = 0.02;
        let plain = PlainCorrlessBounder::new(&pairs, eps);
        let acm = AcmCorrlessBounder::new(&pairs, eps, Interval::raw(-1.0, 1.0), PairCombine::Intersection);
        for _ in 0..50 {
            let lo = rand_vec(&mut rng, 1.0);
            let w = rng.random_range(0.0..0.5);
            let hi: Vec<f64> = lo.iter().map(|x| (x + w).min(1.0)).collect();
            let cube = Cube::new(lo.to_vec(), hi).unwrap();
            let up = plain.upper(&cube);
            let c2 = Cube::from_sides(&[cube.side(0), cube.side(1)]);
            let acm_up = acm.upper(&c2);
            let acm_low = acm.lower(&c2);
            let w3 = acm_low.witness.clone();
            assert_eq!(consensus_corrless(&pairs, eps, &[w3[0], w3[1], w3[2]]), acm_low.count);
            for _ in 0..200 {
                let t = sample_in(&mut rng, &cube);
                let c = consensus_corrless(&pairs, eps, &t);
                assert!(c <= up && c <= acm_up);
            }
        }
    }

    #[test]
    fn point_cube_corrless_bounds_collapse() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (p, q, t) = corrless_instance(&mut rng, 10);
        let pairs = build_ri_pairs(&p, &q, 0.01, 45);
        let point = Cube::from_sides(&[Interval::point(t[0]), Interval::point(t[1]), Interval::point(t[2])]);
        let b = PlainCorrlessBounder::new(&pairs, 0.01);
        assert_eq!(b.lower(&point).count, b.upper(&point));
    }

    #[test]
    fn corrless_solvers_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let (p, q, t) = corrless_instance(&mut rng, 12);
        let pairs = build_ri_pairs(&p, &q, 1e-3, 66);
        let eps = 5e-3;
        let bx = TranslationBox::default();
        let opts = SolveOptions::with_depth(10);
        let a = solve_acm_corrless(&pairs, eps, &bx, PairCombine::Intersection, &opts).unwrap();
        let pl = solve_plain_corrless(&pairs, eps, &bx, &opts).unwrap();
        assert!(a.best_count >= consensus_corrless(&pairs, eps, &t));
        assert!(a.iterations < pl.iterations);
        let est = [a.best_param[0], a.best_param[1], a.best_param[2]];
        assert!(norm(sub(est, t)) < 0.05);
    }

    #[test]
    fn union_never_counts_less() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (p, q, _) = corrless_instance(&mut rng, 10);
        let pairs = build_ri_pairs(&p, &q, 0.01, 45);
        let dom = Interval::raw(-1.0, 1.0);
        let i = AcmCorrlessBounder::new(&pairs, 0.01, dom, PairCombine::Intersection);
        let u = AcmCorrlessBounder::new(&pairs, 0.01, dom, PairCombine::Union);
        for c in TranslationBox::default().cube2().split() {
            assert!(u.upper(&c) >= i.upper(&c));
            assert!(u.lower(&c).count >= i.lower(&c).count);
        }
    }

    #[test]
    fn covering_box_contains_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let (p, _, t) = corrless_instance(&mut rng, 20);
        // without rotation, q - p ranges over translations exactly
        let q: Vec<Vec3> = p.iter().map(|x| add(*x, t)).collect();
        assert!(TranslationBox::covering(&p, &q, 0.0).contains(&t));
    }
}
