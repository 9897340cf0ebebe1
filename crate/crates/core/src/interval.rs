//! Closed real intervals, disjoint interval unions, interval stabbing and the
//! closed-form inversion of sinusoidal band constraints.

use alloc::vec::Vec;
use arrayvec::ArrayVec;
use core::fmt;
use core::ops::{Add, Mul, Sub};

use crate::math::{self, PI, TAU};

/// Error raised by interval constructors and partial operations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntervalError {
    /// An endpoint was NaN or infinite.
    NonFinite,
    /// `lo > hi`.
    Inverted { lo: f64, hi: f64 },
    /// Division by an interval whose lower endpoint is not strictly positive.
    DivisorNotPositive { lo: f64 },
}

impl fmt::Display for IntervalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonFinite => f.write_str("interval endpoint is not finite"),
            Self::Inverted { lo, hi } => write!(f, "interval lower end {lo} exceeds upper end {hi}"),
            Self::DivisorNotPositive { lo } => {
                write!(f, "divisor interval must be strictly positive, lower end is {lo}")
            }
        }
    }
}

impl core::error::Error for IntervalError {}

/// A closed interval `[lo, hi]` with finite endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(IntervalError::NonFinite);
        }
        if lo > hi {
            return Err(IntervalError::Inverted { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    /// Degenerate interval `[x, x]`.
    pub fn point(x: f64) -> Self {
        debug_assert!(x.is_finite());
        Self { lo: x, hi: x }
    }

    /// Caller guarantees `lo <= hi`, both finite.
    #[inline]
    pub(crate) fn raw(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "[{lo}, {hi}]");
        Self { lo, hi }
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    #[inline]
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// `X / Y`, defined only when `Y` lies strictly right of zero.
    pub fn checked_div(self, y: Interval) -> Result<Interval, IntervalError> {
        if y.lo <= 0.0 {
            return Err(IntervalError::DivisorNotPositive { lo: y.lo });
        }
        Ok(self * Interval::raw(1.0 / y.hi, 1.0 / y.lo))
    }

    /// Pointwise minimum `{min(x, y)}`.
    pub fn min(self, y: Interval) -> Interval {
        Interval::raw(self.lo.min(y.lo), self.hi.min(y.hi))
    }

    /// Pointwise maximum `{max(x, y)}`.
    pub fn max(self, y: Interval) -> Interval {
        Interval::raw(self.lo.max(y.lo), self.hi.max(y.hi))
    }

    /// Tight image of `x -> x^2`.
    pub fn sq(self) -> Interval {
        let a = self.lo * self.lo;
        let b = self.hi * self.hi;
        let lo = if self.lo <= 0.0 && 0.0 <= self.hi { 0.0 } else { a.min(b) };
        Interval::raw(lo, a.max(b))
    }

    /// Tight image of `x -> |x|`.
    pub fn abs(self) -> Interval {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            Interval::raw(-self.hi, -self.lo)
        } else {
            Interval::raw(0.0, (-self.lo).max(self.hi))
        }
    }

    /// Multiplication by a scalar.
    pub fn scale(self, k: f64) -> Interval {
        if k >= 0.0 {
            Interval::raw(k * self.lo, k * self.hi)
        } else {
            Interval::raw(k * self.hi, k * self.lo)
        }
    }

    /// Translation by a scalar.
    pub fn shift(self, k: f64) -> Interval {
        Interval::raw(self.lo + k, self.hi + k)
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, y: Interval) -> Interval {
        Interval::raw(self.lo + y.lo, self.hi + y.hi)
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, y: Interval) -> Interval {
        Interval::raw(self.lo - y.hi, self.hi - y.lo)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, y: Interval) -> Interval {
        let p = [self.lo * y.lo, self.lo * y.hi, self.hi * y.lo, self.hi * y.hi];
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::raw(lo, hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Exact range of `sin` over the argument interval `[lo, hi]`.
pub fn sin_range(lo: f64, hi: f64) -> Interval {
    debug_assert!(lo <= hi);
    if hi - lo >= TAU {
        return Interval::raw(-1.0, 1.0);
    }
    let (a, b) = (math::sin(lo), math::sin(hi));
    let mut min = a.min(b);
    let mut max = a.max(b);
    if crosses(lo, hi, 0.5 * PI) {
        max = 1.0;
    }
    if crosses(lo, hi, -0.5 * PI) {
        min = -1.0;
    }
    Interval::raw(min, max)
}

/// Exact range of `cos` over the argument interval `[lo, hi]`.
pub fn cos_range(lo: f64, hi: f64) -> Interval {
    sin_range(lo + 0.5 * PI, hi + 0.5 * PI)
}

/// Whether `phase + 2πk` lies in `[lo, hi]` for some integer `k`.
fn crosses(lo: f64, hi: f64, phase: f64) -> bool {
    let k = math::ceil((lo - phase) / TAU);
    phase + k * TAU <= hi
}

/// Up to four parts; enough for any single sinusoid band over `[-π, π]`
/// and for the quadratic shell inversions.
pub(crate) type Parts = ArrayVec<Interval, 4>;

/// Sort and merge overlapping or touching intervals in place.
fn normalize_slice(parts: &mut [Interval]) -> usize {
    if parts.is_empty() {
        return 0;
    }
    parts.sort_unstable_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut w = 0;
    for r in 1..parts.len() {
        if parts[r].lo <= parts[w].hi {
            parts[w].hi = parts[w].hi.max(parts[r].hi);
        } else {
            w += 1;
            parts[w] = parts[r];
        }
    }
    w + 1
}

/// A finite union of pairwise disjoint closed intervals, sorted ascending and
/// separated by strictly positive gaps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IntervalSet {
    parts: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(iv: Interval) -> Self {
        Self { parts: alloc::vec![iv] }
    }

    /// Normalizes arbitrary (possibly overlapping) intervals.
    pub fn from_intervals<I: IntoIterator<Item = Interval>>(items: I) -> Self {
        let mut parts: Vec<Interval> = items.into_iter().collect();
        let n = normalize_slice(&mut parts);
        parts.truncate(n);
        Self { parts }
    }

    pub(crate) fn from_parts(mut parts: Parts) -> Self {
        let n = normalize_slice(&mut parts);
        parts.truncate(n);
        Self { parts: parts.to_vec() }
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn contains(&self, x: f64) -> bool {
        // parts are sorted; a linear scan is fine for the handful of parts we hold
        self.parts.iter().any(|p| p.contains(x))
    }

    /// Total length.
    pub fn measure(&self) -> f64 {
        self.parts.iter().map(Interval::width).sum()
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.parts.len() && j < other.parts.len() {
            let (a, b) = (self.parts[i], other.parts[j]);
            if let Some(c) = a.intersect(&b) {
                out.push(c);
            }
            if a.hi < b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        // intersections of normalized sets can only touch at isolated points
        IntervalSet::from_intervals(out)
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        IntervalSet::from_intervals(self.parts.iter().chain(other.parts.iter()).copied())
    }

    /// Restrict to `domain`.
    pub fn clip(&self, domain: &Interval) -> IntervalSet {
        IntervalSet {
            parts: self.parts.iter().filter_map(|p| p.intersect(domain)).collect(),
        }
    }
}

impl FromIterator<Interval> for IntervalSet {
    fn from_iter<T: IntoIterator<Item = Interval>>(iter: T) -> Self {
        IntervalSet::from_intervals(iter)
    }
}

/// Intersection of two small normalized part lists.
pub(crate) fn intersect_parts(a: &Parts, b: &Parts) -> Parts {
    let mut out = Parts::new();
    for x in a {
        for y in b {
            if let Some(c) = x.intersect(y) {
                if out.try_push(c).is_err() {
                    // never more than |a| + |b| - 1 <= 7 pieces in theory; our
                    // inputs hold at most 2 parts each, so 3 suffice
                    unreachable!("intersection of small part lists overflowed");
                }
            }
        }
    }
    let n = normalize_slice(&mut out);
    out.truncate(n);
    out
}

/// Union of two small normalized part lists.
pub(crate) fn union_parts(a: &Parts, b: &Parts) -> Parts {
    let mut all: ArrayVec<Interval, 8> = a.iter().chain(b.iter()).copied().collect();
    let n = normalize_slice(&mut all);
    debug_assert!(n <= 4, "union of small part lists overflowed");
    all[..n.min(4)].iter().copied().collect()
}

/// Outcome of interval stabbing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabResult {
    /// A point contained in `count` intervals; `None` when nothing was stabbed.
    pub stabber: Option<f64>,
    pub count: usize,
}

/// Reusable sweep buffer for interval stabbing.
///
/// Endpoints are sorted by coordinate with left endpoints ahead of right
/// endpoints at equal coordinates, so closed intervals that touch at a single
/// point are stabbed together. The reported stabber is the midpoint of the
/// first segment of maximal depth, away from the endpoints when possible.
#[derive(Debug, Default, Clone)]
pub struct Stabber {
    // endpoints as order-preserving integer keys
    lefts: Vec<u64>,
    rights: Vec<u64>,
    // intervals known to contain every candidate point
    covering: usize,
}

/// Monotone map from finite `f64` to `u64`.
#[inline]
fn key(x: f64) -> u64 {
    let bits = x.to_bits();
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | (1 << 63)
    }
}

#[inline]
fn unkey(k: u64) -> f64 {
    f64::from_bits(if k >> 63 == 1 { k & !(1 << 63) } else { !k })
}

impl Stabber {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(intervals: usize) -> Self {
        Self { lefts: Vec::with_capacity(intervals), rights: Vec::with_capacity(intervals), covering: 0 }
    }

    pub fn clear(&mut self) {
        self.lefts.clear();
        self.rights.clear();
        self.covering = 0;
    }

    /// Count an interval that contains every point the caller will accept as
    /// a stabber, without sorting it.
    #[inline]
    pub fn push_covering(&mut self) {
        self.covering += 1;
    }

    /// Push `iv` clipped to `domain`; intervals spanning the whole domain go
    /// through [`Stabber::push_covering`].
    #[inline]
    pub fn push_within(&mut self, iv: Interval, domain: &Interval) {
        if iv.lo <= domain.lo && iv.hi >= domain.hi {
            self.push_covering();
        } else if let Some(c) = iv.intersect(domain) {
            self.push(c);
        }
    }

    #[inline]
    pub fn push(&mut self, iv: Interval) {
        // -0.0 and 0.0 must share a key
        self.lefts.push(key(iv.lo + 0.0));
        self.rights.push(key(iv.hi + 0.0));
    }

    /// Add the parts of one disjoint set; the set can be stabbed at most once.
    pub fn push_set(&mut self, parts: &[Interval]) {
        for p in parts {
            self.push(*p);
        }
    }

    /// Sweep the endpoints collected so far. With covering intervals only,
    /// the count is theirs and the stabber is `None`.
    pub fn solve(&mut self) -> StabResult {
        self.lefts.sort_unstable();
        self.rights.sort_unstable();
        let mut best = StabResult { stabber: None, count: 0 };
        let mut open = 0usize;
        // left edge of the deepest segment until its right edge is seen
        let mut start = None;
        let mut r = 0;
        for &l in &self.lefts {
            while self.rights[r] < l {
                if let Some(s) = start.take() {
                    best.stabber = Some(0.5 * (unkey(s) + unkey(self.rights[r])));
                }
                open -= 1;
                r += 1;
            }
            open += 1;
            if open > best.count {
                best = StabResult { stabber: Some(unkey(l)), count: open };
                start = Some(l);
            }
        }
        if let (Some(s), Some(&x)) = (start, self.rights.get(r)) {
            best.stabber = Some(0.5 * (unkey(s) + unkey(x)));
        }
        best.count += self.covering;
        best
    }
}

/// Find a point contained in the largest number of `intervals`.
///
/// Runs in `O(L log L)` time for `L` intervals.
pub fn stab(intervals: &[Interval]) -> StabResult {
    let mut s = Stabber::with_capacity(intervals.len());
    for iv in intervals {
        s.push(*iv);
    }
    s.solve()
}

/// Interval stabbing over disjoint unions; each set counts at most once.
pub fn stab_sets(sets: &[IntervalSet]) -> StabResult {
    let total = sets.iter().map(IntervalSet::len).sum();
    let mut s = Stabber::with_capacity(total);
    for set in sets {
        s.push_set(set.parts());
    }
    s.solve()
}

/// The angular domain `[-π, π]`.
pub fn angle_domain() -> Interval {
    Interval::raw(-PI, PI)
}

/// Solve `lo <= a1 sin α + a2 cos α + a3 <= hi` for `α ∈ [-π, π]`.
///
/// Wrapped solution arcs are split at `±π`, so the result lives on the line
/// segment rather than the circle.
pub fn solve_sinusoid_leq(a1: f64, a2: f64, a3: f64, lo: f64, hi: f64) -> IntervalSet {
    IntervalSet::from_parts(sinusoid_parts(a1, a2, a3, lo, hi))
}

/// Allocation-free core of [`solve_sinusoid_leq`]; the result is normalized.
pub(crate) fn sinusoid_parts(a1: f64, a2: f64, a3: f64, lo: f64, hi: f64) -> Parts {
    // a1 sin α + a2 cos α = amp · cos(α - phase)
    sinusoid_parts_polar(math::hypot(a1, a2), math::atan2(a1, a2), a3, lo, hi)
}

/// [`sinusoid_parts`] for `amp · cos(α - phase) + a3`, with `amp >= 0`.
pub(crate) fn sinusoid_parts_polar(amp: f64, phase: f64, a3: f64, lo: f64, hi: f64) -> Parts {
    let mut out = Parts::new();
    if lo > hi {
        return out;
    }
    if amp == 0.0 {
        if lo <= a3 && a3 <= hi {
            out.push(angle_domain());
        }
        return out;
    }
    let c_lo = ((lo - a3) / amp).max(-1.0);
    let c_hi = ((hi - a3) / amp).min(1.0);
    if c_lo > c_hi {
        return out;
    }
    let near = math::acos(c_hi.clamp(-1.0, 1.0));
    let far = math::acos(c_lo.clamp(-1.0, 1.0));
    let mut cand: ArrayVec<Interval, 8> = ArrayVec::new();
    let domain = angle_domain();
    for k in [-1.0, 0.0, 1.0] {
        let centre = phase + k * TAU;
        for iv in [
            Interval::raw(centre - far, centre - near),
            Interval::raw(centre + near, centre + far),
        ] {
            if let Some(c) = iv.intersect(&domain) {
                // at most 6 candidates survive, capacity is 8
                cand.push(c);
            }
        }
    }
    let n = normalize_slice(&mut cand);
    for iv in &cand[..n] {
        out.push(*iv);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    /// O(L^2) oracle: at every left endpoint, count the intervals containing it.
    fn brute_stab(xs: &[Interval]) -> usize {
        xs.iter()
            .map(|s| xs.iter().filter(|x| x.contains(s.lo())).count())
            .max()
            .unwrap_or(0)
    }

    #[test]
    fn corollary_arithmetic_examples() {
        assert_eq!(iv(1.0, 2.0) + iv(3.0, 4.0), iv(4.0, 6.0));
        assert_eq!(iv(0.0, 0.0) + iv(-2.5, 7.0), iv(-2.5, 7.0));
        assert_eq!(iv(-1.0, 2.0) * iv(3.0, 4.0), iv(-4.0, 8.0));
        assert_eq!(iv(1.0, 2.0) - iv(3.0, 4.0), iv(-3.0, -1.0));
        assert_eq!(iv(1.0, 2.0).checked_div(iv(2.0, 4.0)).unwrap(), iv(0.25, 1.0));
        assert_eq!(iv(1.0, 5.0).min(iv(2.0, 3.0)), iv(1.0, 3.0));
        assert_eq!(iv(1.0, 5.0).max(iv(2.0, 3.0)), iv(2.0, 5.0));
    }

    #[test]
    fn product_uses_all_four_corner_products() {
        // a printed formula listing {ac, ad, bd, bd} would miss bc = -6 here
        assert_eq!(iv(-1.0, 2.0) * iv(-3.0, 1.0), iv(-6.0, 3.0));
    }

    #[test]
    fn division_requires_positive_divisor() {
        assert_eq!(
            iv(1.0, 2.0).checked_div(iv(0.0, 1.0)),
            Err(IntervalError::DivisorNotPositive { lo: 0.0 })
        );
        assert!(iv(1.0, 2.0).checked_div(iv(-1.0, 1.0)).is_err());
    }

    #[test]
    fn constructor_rejects_bad_endpoints() {
        assert_eq!(Interval::new(2.0, 1.0), Err(IntervalError::Inverted { lo: 2.0, hi: 1.0 }));
        assert_eq!(Interval::new(f64::NAN, 1.0), Err(IntervalError::NonFinite));
        assert_eq!(Interval::new(0.0, f64::INFINITY), Err(IntervalError::NonFinite));
    }

    #[test]
    fn square_examples() {
        assert_eq!(iv(-1.0, 2.0).sq(), iv(0.0, 4.0));
        assert_eq!(iv(1.0, 2.0).sq(), iv(1.0, 4.0));
        assert_eq!(iv(-3.0, -2.0).sq(), iv(4.0, 9.0));
    }

    #[test]
    fn abs_examples() {
        assert_eq!(iv(-1.0, 2.0).abs(), iv(0.0, 2.0));
        assert_eq!(iv(-3.0, -2.0).abs(), iv(2.0, 3.0));
        assert_eq!(iv(1.0, 2.0).abs(), iv(1.0, 2.0));
    }

    #[test]
    fn stab_examples() {
        let r = stab(&[iv(0.0, 1.0)]);
        assert_eq!(r.count, 1);
        assert!(iv(0.0, 1.0).contains(r.stabber.unwrap()));

        let xs = [iv(1.0, 3.0), iv(2.0, 5.0), iv(4.0, 6.0)];
        assert_eq!(brute_stab(&xs), 2);
        assert_eq!(stab(&xs).count, 2);

        let xs = [iv(0.0, 2.0), iv(1.0, 3.0), iv(2.0, 4.0)];
        assert_eq!(brute_stab(&xs), 3);
        assert_eq!(stab(&xs), StabResult { stabber: Some(2.0), count: 3 });
    }

    #[test]
    fn stab_empty_and_touching() {
        assert_eq!(stab(&[]), StabResult { stabber: None, count: 0 });
        // closed intervals meeting at a single point are both stabbed there
        assert_eq!(stab(&[iv(0.0, 1.0), iv(1.0, 2.0)]).count, 2);
    }

    #[test]
    fn stab_sets_examples() {
        let r = stab_sets(&[IntervalSet::empty(), IntervalSet::single(iv(0.0, 1.0))]);
        assert_eq!(r.count, 1);

        let two = IntervalSet::from_intervals([iv(0.0, 1.0), iv(5.0, 6.0)]);
        let one = IntervalSet::single(iv(0.5, 2.0));
        let r = stab_sets(&[two, one]);
        assert_eq!(r.count, 2);
        let s = r.stabber.unwrap();
        assert!((0.5..=1.0).contains(&s));

        assert_eq!(stab_sets(&[]).count, 0);
    }

    #[test]
    fn sinusoid_always_satisfied() {
        let s = solve_sinusoid_leq(0.0, 1.0, 0.0, -1.0, 1.0);
        assert_eq!(s.parts(), &[angle_domain()]);
    }

    #[test]
    fn sinusoid_constant_out_of_band() {
        assert!(solve_sinusoid_leq(0.0, 0.0, 1.0, -0.5, 0.5).is_empty());
        assert_eq!(solve_sinusoid_leq(0.0, 0.0, 0.2, -0.5, 0.5).parts(), &[angle_domain()]);
    }

    /// Dense-grid oracle: recover maximal runs of satisfying samples.
    fn grid_runs(f: impl Fn(f64) -> bool, n: usize) -> Vec<(f64, f64)> {
        let mut runs = Vec::new();
        let mut start: Option<f64> = None;
        let mut prev = -PI;
        for i in 0..=n {
            let x = -PI + TAU * i as f64 / n as f64;
            match (f(x), start) {
                (true, None) => start = Some(x),
                (false, Some(s)) => {
                    runs.push((s, prev));
                    start = None;
                }
                _ => {}
            }
            prev = x;
        }
        if let Some(s) = start {
            runs.push((s, PI));
        }
        runs
    }

    #[test]
    fn sinusoid_sine_band_matches_grid() {
        let f = |a: f64| {
            let v = math::sin(a);
            (-0.5..=0.5).contains(&v)
        };
        let runs = grid_runs(f, 1_000_000);
        let got = solve_sinusoid_leq(1.0, 0.0, 0.0, -0.5, 0.5);
        let expected = [(-PI, -5.0 * PI / 6.0), (-PI / 6.0, PI / 6.0), (5.0 * PI / 6.0, PI)];
        assert_eq!(runs.len(), 3);
        assert_eq!(got.len(), 3);
        for ((g, r), e) in got.parts().iter().zip(&runs).zip(&expected) {
            assert!((g.lo() - r.0).abs() < 1e-5 && (g.hi() - r.1).abs() < 1e-5);
            assert!((g.lo() - e.0).abs() < 1e-6 && (g.hi() - e.1).abs() < 1e-6, "{g} vs {e:?}");
        }
    }

    /// Independent inversion through `amp · sin(α + phase)`.
    fn sine_form(a1: f64, a2: f64, a3: f64, lo: f64, hi: f64) -> IntervalSet {
        let amp = math::hypot(a1, a2);
        let phase = math::atan2(a2, a1);
        let s_lo = ((lo - a3) / amp).max(-1.0);
        let s_hi = ((hi - a3) / amp).min(1.0);
        if s_lo > s_hi {
            return IntervalSet::empty();
        }
        let c5 = libm::asin(s_lo);
        let c6 = libm::asin(s_hi);
        let mut pieces = Vec::new();
        for k in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            let off = k * TAU;
            pieces.push(iv(c5 - phase + off, c6 - phase + off));
            pieces.push(iv(PI - c6 - phase + off, PI - c5 - phase + off));
        }
        IntervalSet::from_intervals(pieces).clip(&angle_domain())
    }

    /// Merge parts separated by rounding-level gaps.
    fn fuse(set: IntervalSet) -> Vec<Interval> {
        let mut out: Vec<Interval> = Vec::new();
        for p in set.parts() {
            match out.last_mut() {
                Some(last) if p.lo() - last.hi() < 1e-12 => *last = iv(last.lo(), p.hi()),
                _ => out.push(*p),
            }
        }
        out
    }

    #[test]
    fn cosine_and_sine_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let a1 = rng.random_range(-2.0..2.0);
            let a2 = rng.random_range(-2.0..2.0);
            let a3 = rng.random_range(-2.0..2.0);
            let lo = rng.random_range(-2.0..2.0);
            let hi = lo + rng.random_range(0.0..2.0);
            let c = fuse(solve_sinusoid_leq(a1, a2, a3, lo, hi));
            let s = fuse(sine_form(a1, a2, a3, lo, hi));
            assert_eq!(c.len(), s.len(), "{a1} {a2} {a3} {lo} {hi}: {c:?} vs {s:?}");
            for (x, y) in c.iter().zip(&s) {
                assert!((x.lo() - y.lo()).abs() < 1e-9 && (x.hi() - y.hi()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sin_range_examples() {
        let r = sin_range(0.0, PI);
        assert_eq!(r.hi(), 1.0);
        assert!(r.lo().abs() < 1e-15);
        assert_eq!(sin_range(-4.0 * PI, -3.0 * PI + 0.1).hi(), 1.0);
        assert_eq!(sin_range(0.0, 7.0), iv(-1.0, 1.0));
        let r = sin_range(0.1, 0.2);
        assert_eq!(r, iv(math::sin(0.1), math::sin(0.2)));
        let r = cos_range(-0.1, 0.1);
        assert_eq!(r.hi(), 1.0);
    }

    #[test]
    fn set_intersection_and_union() {
        let a = IntervalSet::from_intervals([iv(0.0, 2.0), iv(4.0, 6.0)]);
        let b = IntervalSet::from_intervals([iv(1.0, 5.0)]);
        assert_eq!(a.intersect(&b).parts(), &[iv(1.0, 2.0), iv(4.0, 5.0)]);
        assert_eq!(a.union(&b).parts(), &[iv(0.0, 6.0)]);
        assert!(a.intersect(&IntervalSet::empty()).is_empty());
    }

    #[test]
    fn small_part_helpers_match_sets() {
        let a: Parts = [iv(-3.0, -1.0), iv(1.0, 3.0)].into_iter().collect();
        let b: Parts = [iv(-2.0, 2.0)].into_iter().collect();
        let i = intersect_parts(&a, &b);
        assert_eq!(&i[..], &[iv(-2.0, -1.0), iv(1.0, 2.0)]);
        let u = union_parts(&a, &b);
        assert_eq!(&u[..], &[iv(-3.0, 3.0)]);
    }

    fn arb_interval() -> impl Strategy<Value = Interval> {
        (-100.0f64..100.0, 0.0f64..50.0).prop_map(|(lo, w)| iv(lo, lo + w))
    }

    proptest! {
        #[test]
        fn arithmetic_is_sound(x in arb_interval(), y in arb_interval(),
                               s in 0.0f64..=1.0, t in 0.0f64..=1.0) {
            let a = x.lo() + s * x.width();
            let b = y.lo() + t * y.width();
            let tol = 1e-9 * (1.0 + a.abs() + b.abs()).powi(2);
            let inside = |v: f64, r: Interval| r.lo() - tol <= v && v <= r.hi() + tol;
            prop_assert!(inside(a + b, x + y));
            prop_assert!(inside(a - b, x - y));
            prop_assert!(inside(a * b, x * y));
            prop_assert!(inside(a.min(b), x.min(y)));
            prop_assert!(inside(a.max(b), x.max(y)));
            prop_assert!(inside(a * a, x.sq()));
            if y.lo() > 0.0 {
                prop_assert!(inside(a / b, x.checked_div(y).unwrap()));
            }
        }

        #[test]
        fn stab_matches_quadratic_oracle(xs in proptest::collection::vec(arb_interval(), 0..60)) {
            let r = stab(&xs);
            prop_assert_eq!(r.count, brute_stab(&xs));
            if let Some(s) = r.stabber {
                prop_assert_eq!(xs.iter().filter(|x| x.contains(s)).count(), r.count);
            }
        }

        #[test]
        fn stab_is_monotone(xs in proptest::collection::vec(arb_interval(), 1..40), extra in arb_interval()) {
            let base = stab(&xs).count;
            let mut more = xs.clone();
            more.push(extra);
            let grown = stab(&more).count;
            prop_assert!(grown == base || grown == base + 1);
            let fewer = stab(&xs[1..]).count;
            prop_assert!(fewer == base || fewer + 1 == base);
        }

        #[test]
        fn set_normalization(xs in proptest::collection::vec(arb_interval(), 0..30)) {
            let set = IntervalSet::from_intervals(xs.iter().copied());
            for w in set.parts().windows(2) {
                prop_assert!(w[0].hi() < w[1].lo());
            }
            let total: f64 = xs.iter().map(Interval::width).sum();
            prop_assert!(set.measure() <= total + 1e-9);
            for x in &xs {
                prop_assert!(set.contains(x.lo()) && set.contains(x.hi()));
            }
        }

        #[test]
        fn sinusoid_inversion_is_complete(a1 in -3.0f64..3.0, a2 in -3.0f64..3.0, a3 in -3.0f64..3.0,
                                          lo in -3.0f64..3.0, w in 0.0f64..3.0) {
            let hi = lo + w;
            let set = solve_sinusoid_leq(a1, a2, a3, lo, hi);
            let near_edge = |x: f64| set.parts().iter().any(|p| (x - p.lo()).abs() < 1e-6 || (x - p.hi()).abs() < 1e-6);
            let n = 100_000;
            for i in 0..=n {
                let x = -PI + TAU * i as f64 / n as f64;
                let v = a1 * math::sin(x) + a2 * math::cos(x) + a3;
                let truth = lo <= v && v <= hi;
                if truth != set.contains(x) && !near_edge(x) {
                    prop_assert!(false, "mismatch at {} value {} set {:?}", x, v, set);
                }
            }
        }
    }

    #[test]
    fn stab_oracle_ten_thousand_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let l = rng.random_range(0..=200);
            let xs: Vec<Interval> = (0..l)
                .map(|_| {
                    let lo = rng.random_range(-10.0..10.0);
                    iv(lo, lo + rng.random_range(0.0..3.0))
                })
                .collect();
            assert_eq!(stab(&xs).count, brute_stab(&xs));
        }
    }
}
