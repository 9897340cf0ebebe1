//! Synthetic instances for the four problems.
//!
//! Every generator is a pure function of its [`SceneConfig`]; the random
//! stream is ChaCha8 seeded from `seed` with `stream` selecting an
//! independent substream, so instances can be generated in any order and in
//! parallel. Inliers always occupy the leading positions of the returned
//! sample list and `inlier_mask` records them.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

use acm_core::geom::{add, axis_angle, cross, mat_vec, norm, rot_y, rot_zyx, scale, sub, transpose, Mat3, Vec3};
use acm_core::planar::Corr2D2D;
use acm_core::registration::Corr3D3D;
use acm_core::resection::{Corr3D2D, ImuPrior};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub n_points: usize,
    pub outlier_ratio: f64,
    /// Half-width of the uniform image noise, in pixels.
    pub noise_px: f64,
    pub focal: f64,
    /// Standard deviation of the Gaussian noise on 3D points.
    pub noise_sigma: f64,
    /// Rotation angles are drawn from `[-angle_range, angle_range]`.
    pub angle_range: f64,
    /// Translation entries are drawn from `[-translation_range, translation_range]`.
    pub translation_range: f64,
    /// Planar translation length is drawn from `[-rho_range, rho_range]`.
    pub rho_range: f64,
    pub seed: u64,
    pub stream: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            n_points: 200,
            outlier_ratio: 0.0,
            noise_px: 2.0,
            focal: 800.0,
            noise_sigma: 0.0002,
            angle_range: FRAC_PI_2,
            translation_range: 1.0,
            rho_range: 2.0,
            seed: 0,
            stream: 0,
        }
    }
}

impl SceneConfig {
    pub fn resection() -> Self {
        Self::default()
    }

    pub fn planar() -> Self {
        Self { angle_range: FRAC_PI_3, ..Self::default() }
    }

    /// Registration scenes use the full rotation range and translations in
    /// `[-0.5, 0.5]^3`, which keeps `t` inside the default `[-1, 1]^3` box.
    pub fn reg3d() -> Self {
        Self { n_points: 1000, angle_range: PI, translation_range: 0.5, ..Self::default() }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    pub fn n_inliers(&self) -> usize {
        let outliers = (self.outlier_ratio.clamp(0.0, 1.0) * self.n_points as f64).round() as usize;
        self.n_points - outliers.min(self.n_points)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// Problem-specific angles: `[yaw, pitch, roll]` for resectioning,
    /// `[theta, phi, rho]` for planar motion, `[angle]` for registration.
    pub params: Vec<f64>,
    pub rotation: Mat3,
    pub translation: Vec3,
    pub inlier_mask: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResectionInstance {
    pub corrs: Vec<Corr3D2D>,
    pub prior: ImuPrior,
    pub truth: GroundTruth,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanarInstance {
    pub corrs: Vec<Corr2D2D>,
    pub truth: GroundTruth,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrInstance {
    pub corrs: Vec<Corr3D3D>,
    pub truth: GroundTruth,
}

/// `q = R (p + t)` holds for every `q[k]` with `matches[k] = Some(i)` and
/// `p = p[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrlessInstance {
    pub p: Vec<Vec3>,
    pub q: Vec<Vec3>,
    pub matches: Vec<Option<usize>>,
    pub truth: GroundTruth,
}

fn sym(rng: &mut ChaCha8Rng, r: f64) -> f64 {
    r * (2.0 * rng.random::<f64>() - 1.0)
}

fn sym3(rng: &mut ChaCha8Rng, r: f64) -> Vec3 {
    [sym(rng, r), sym(rng, r), sym(rng, r)]
}

/// Point in `[-1, 1]^2 x [4, 8]`.
fn frustum_point(rng: &mut ChaCha8Rng) -> Vec3 {
    [sym(rng, 1.0), sym(rng, 1.0), rng.random_range(4.0..8.0)]
}

fn project(x: Vec3) -> [f64; 2] {
    [x[0] / x[2], x[1] / x[2]]
}

fn unit(v: Vec3) -> Vec3 {
    scale(v, 1.0 / norm(v))
}

/// Shift the bearing of `u` within its orthogonal plane by uniform pixel
/// noise at the given focal length and re-project.
fn perturb(u: [f64; 2], noise_px: f64, focal: f64, rng: &mut ChaCha8Rng) -> [f64; 2] {
    let (n1, n2) = (sym(rng, noise_px), sym(rng, noise_px));
    if noise_px == 0.0 {
        return u;
    }
    let b = unit([u[0], u[1], 1.0]);
    let helper = if b[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = unit(cross(b, helper));
    let e2 = cross(b, e1);
    let v = add(b, add(scale(e1, n1 / focal), scale(e2, n2 / focal)));
    project(v)
}

pub fn gen_resection(cfg: &SceneConfig) -> ResectionInstance {
    let mut rng = cfg.rng();
    let r = cfg.angle_range;
    let (yaw, pitch, roll) = (sym(&mut rng, r), sym(&mut rng, r), sym(&mut rng, r));
    let rot = rot_zyx(yaw, pitch, roll);
    let rt = transpose(&rot);
    let t = sym3(&mut rng, cfg.translation_range);
    let inliers = cfg.n_inliers();
    let corrs = (0..cfg.n_points)
        .map(|i| {
            let x = frustum_point(&mut rng);
            // world point whose camera-frame position is x
            let p = mat_vec(&rt, sub(x, t));
            let seen = if i < inliers { x } else { frustum_point(&mut rng) };
            Corr3D2D { p, u: perturb(project(seen), cfg.noise_px, cfg.focal, &mut rng) }
        })
        .collect();
    ResectionInstance {
        corrs,
        prior: ImuPrior { pitch, roll },
        truth: GroundTruth {
            params: vec![yaw, pitch, roll],
            rotation: rot,
            translation: t,
            inlier_mask: (0..cfg.n_points).map(|i| i < inliers).collect(),
        },
    }
}

/// Second-to-first view motion: rotation by `theta` about the camera `y`
/// axis and translation `rho (sin phi, 0, cos phi)`.
pub fn gen_planar(cfg: &SceneConfig) -> PlanarInstance {
    let mut rng = cfg.rng();
    let theta = sym(&mut rng, cfg.angle_range);
    let phi = sym(&mut rng, cfg.angle_range);
    let rho = sym(&mut rng, cfg.rho_range);
    let rot = rot_y(theta);
    let t = [rho * phi.sin(), 0.0, rho * phi.cos()];
    let inliers = cfg.n_inliers();
    let corrs = (0..cfg.n_points)
        .map(|i| {
            // both views must see the point in front of the camera
            let (x2, x1) = loop {
                let x2 = frustum_point(&mut rng);
                let x1 = add(mat_vec(&rot, x2), t);
                if x1[2] > 0.5 {
                    break (x2, x1);
                }
            };
            let seen = if i < inliers { x1 } else { frustum_point(&mut rng) };
            Corr2D2D {
                x1: perturb(project(seen), cfg.noise_px, cfg.focal, &mut rng),
                x2: perturb(project(x2), cfg.noise_px, cfg.focal, &mut rng),
            }
        })
        .collect();
    PlanarInstance {
        corrs,
        truth: GroundTruth {
            params: vec![theta, phi, rho],
            rotation: rot,
            translation: t,
            inlier_mask: (0..cfg.n_points).map(|i| i < inliers).collect(),
        },
    }
}

fn random_rotation(rng: &mut ChaCha8Rng, range: f64) -> (Mat3, f64) {
    let axis = loop {
        let a = sym3(rng, 1.0);
        if norm(a) > 1e-6 {
            break a;
        }
    };
    let angle = sym(rng, range);
    (axis_angle(axis, angle), angle)
}

fn jitter(rng: &mut ChaCha8Rng, normal: &Option<Normal<f64>>, v: Vec3) -> Vec3 {
    match normal {
        Some(n) => [v[0] + n.sample(rng), v[1] + n.sample(rng), v[2] + n.sample(rng)],
        None => v,
    }
}

fn gaussian(sigma: f64) -> Option<Normal<f64>> {
    (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("finite positive sigma"))
}

/// Points in `[-1, 1]^3`, `q = R (p + t)`; outliers pair `p` with the image
/// of an unrelated point. Gaussian noise is added to both sides.
pub fn gen_reg3d_corr(cfg: &SceneConfig) -> CorrInstance {
    let mut rng = cfg.rng();
    let (rot, angle) = random_rotation(&mut rng, cfg.angle_range);
    let t = sym3(&mut rng, cfg.translation_range);
    let noise = gaussian(cfg.noise_sigma);
    let inliers = cfg.n_inliers();
    let corrs = (0..cfg.n_points)
        .map(|i| {
            let p = sym3(&mut rng, 1.0);
            let src = if i < inliers { p } else { sym3(&mut rng, 1.0) };
            let q = mat_vec(&rot, add(src, t));
            Corr3D3D { p: jitter(&mut rng, &noise, p), q: jitter(&mut rng, &noise, q) }
        })
        .collect();
    CorrInstance {
        corrs,
        truth: GroundTruth {
            params: vec![angle],
            rotation: rot,
            translation: t,
            inlier_mask: (0..cfg.n_points).map(|i| i < inliers).collect(),
        },
    }
}

/// Indices of the `k` points furthest along a random direction.
pub fn half_space_crop(points: &[Vec3], k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let dir = loop {
        let d = sym3(rng, 1.0);
        if norm(d) > 1e-6 {
            break d;
        }
    };
    let mut order: Vec<(f64, usize)> =
        points.iter().enumerate().map(|(i, p)| (acm_core::geom::dot(*p, dir), i)).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    order.into_iter().take(k).map(|(_, i)| i).collect()
}

/// Crop `overlap` of `p`, move it rigidly and top the moving set up with
/// transformed random filler points until it holds `fill_to` points.
pub fn crop_and_transform(p: Vec<Vec3>, overlap: f64, fill_to: usize, cfg: &SceneConfig) -> CorrlessInstance {
    let mut rng = cfg.rng();
    let (rot, angle) = random_rotation(&mut rng, cfg.angle_range);
    let t = sym3(&mut rng, cfg.translation_range);
    let k = ((overlap.clamp(0.0, 1.0) * p.len() as f64).round() as usize).min(p.len());
    let kept = half_space_crop(&p, k, &mut rng);
    let (lo, hi) = bounds(&p);
    let mut q: Vec<Vec3> = kept.iter().map(|&i| mat_vec(&rot, add(p[i], t))).collect();
    let mut matches: Vec<Option<usize>> = kept.iter().map(|&i| Some(i)).collect();
    while q.len() < fill_to {
        let f = [0, 1, 2].map(|a| rng.random_range(lo[a]..=hi[a]));
        q.push(mat_vec(&rot, add(f, t)));
        matches.push(None);
    }
    let inlier_mask = matches.iter().map(Option::is_some).collect();
    CorrlessInstance { p, q, matches, truth: GroundTruth { params: vec![angle], rotation: rot, translation: t, inlier_mask } }
}

fn bounds(points: &[Vec3]) -> (Vec3, Vec3) {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    (lo, hi)
}

/// Two noiseless sets of `n_points` each; `overlap` of the reference set
/// reappears, moved, in the moving set.
pub fn gen_reg3d_corrless(cfg: &SceneConfig, overlap: f64) -> CorrlessInstance {
    let mut rng = cfg.rng();
    // a separate substream keeps the reference cloud independent of the crop
    let p: Vec<Vec3> = (0..cfg.n_points).map(|_| sym3(&mut rng, 1.0)).collect();
    let crop_cfg = SceneConfig { stream: cfg.stream ^ (1 << 63), ..cfg.clone() };
    crop_and_transform(p, overlap, cfg.n_points, &crop_cfg)
}

/// Wrapped angular difference in `[-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    if d > PI {
        d - 2.0 * PI
    } else {
        d
    }
}
