//! Quadrature sampling of the measured light and recovery of its moments.

use std::f64::consts::FRAC_PI_2;
use std::f64::consts::FRAC_PI_4;

use nalgebra::{Matrix2, Vector2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gaussian::{repair_physicality, GaussianState};

/// Number of contiguous blocks each shot group is split into for jackknife
/// resampling.
pub const JACKKNIFE_BLOCKS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementScheme {
    /// Homodyne at 0 and π/2, N/2 shots each.
    HomodyneSplit2,
    /// Homodyne at 0, π/2 and π/4, N/3 shots each.
    HomodyneSplit3,
    /// Simultaneous x and p with one added vacuum unit per quadrature.
    Heterodyne,
    /// Noise-free joint (x, p) draws from the state's Wigner function.
    Joint,
}

impl MeasurementScheme {
    pub fn name(&self) -> &'static str {
        match self {
            MeasurementScheme::HomodyneSplit2 => "homodyne2",
            MeasurementScheme::HomodyneSplit3 => "homodyne3",
            MeasurementScheme::Heterodyne => "heterodyne",
            MeasurementScheme::Joint => "joint",
        }
    }

    /// Default detection split given whether any estimator needs the full
    /// covariance.
    pub fn default_for(needs_covariance: bool) -> Self {
        if needs_covariance {
            MeasurementScheme::HomodyneSplit3
        } else {
            MeasurementScheme::HomodyneSplit2
        }
    }

    fn group_kinds(&self) -> Vec<GroupKind> {
        match self {
            MeasurementScheme::HomodyneSplit2 => {
                vec![GroupKind::Homodyne(0.0), GroupKind::Homodyne(FRAC_PI_2)]
            }
            MeasurementScheme::HomodyneSplit3 => vec![
                GroupKind::Homodyne(0.0),
                GroupKind::Homodyne(FRAC_PI_2),
                GroupKind::Homodyne(FRAC_PI_4),
            ],
            MeasurementScheme::Heterodyne => vec![GroupKind::Heterodyne],
            MeasurementScheme::Joint => vec![GroupKind::Joint],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementPlan {
    pub scheme: MeasurementScheme,
    pub n_samples: usize,
    pub seed: u64,
}

impl MeasurementPlan {
    pub fn new(scheme: MeasurementScheme, n_samples: usize, seed: u64) -> Result<Self> {
        let plan = Self {
            scheme,
            n_samples,
            seed,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        let groups = self.scheme.group_kinds().len();
        if self.n_samples < 2 * groups {
            return Err(invalid(format!(
                "{} needs at least {} samples, got {}",
                self.scheme.name(),
                2 * groups,
                self.n_samples
            )));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Shot counts per group; the total is conserved and the remainder goes
    /// to the first groups.
    pub fn group_sizes(&self) -> Vec<usize> {
        let g = self.scheme.group_kinds().len();
        (0..g)
            .map(|k| self.n_samples / g + usize::from(k < self.n_samples % g))
            .collect()
    }
}

/// Seed of Monte-Carlo realization `k`.
pub fn realization_seed(base_seed: u64, k: u64) -> u64 {
    base_seed ^ k
}

/// Independent stream derived from `seed` for the sub-task labelled `tag`.
pub fn child_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GroupKind {
    /// Rotated quadrature `cos θ·x + sin θ·p` at the given angle.
    Homodyne(f64),
    Heterodyne,
    Joint,
}

impl GroupKind {
    pub fn is_scalar(&self) -> bool {
        matches!(self, GroupKind::Homodyne(_))
    }
}

/// Raw shots of one detection setting. Scalar homodyne shots keep the
/// second component at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotGroup {
    pub kind: GroupKind,
    pub values: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub scheme: MeasurementScheme,
    pub groups: Vec<ShotGroup>,
}

impl Samples {
    pub fn n_samples(&self) -> usize {
        self.groups.iter().map(|g| g.values.len()).sum()
    }

    /// Flat records `(shot_index, angle or NaN for two-quadrature shots, x, p)`.
    pub fn records(&self) -> impl Iterator<Item = (usize, f64, f64, f64)> + '_ {
        self.groups
            .iter()
            .flat_map(|g| {
                let angle = match g.kind {
                    GroupKind::Homodyne(a) => a,
                    _ => f64::NAN,
                };
                g.values.iter().map(move |v| (angle, v[0], v[1]))
            })
            .enumerate()
            .map(|(i, (a, x, p))| (i, a, x, p))
    }
}

fn cholesky2(c: &Matrix2<f64>) -> Result<Matrix2<f64>> {
    let l11 = c[(0, 0)].sqrt();
    let l21 = c[(1, 0)] / l11;
    let rest = c[(1, 1)] - l21 * l21;
    if !(l11 > 0.0) || !(rest >= 0.0) {
        return Err(invalid("covariance is not positive definite"));
    }
    Ok(Matrix2::new(l11, 0.0, l21, rest.sqrt()))
}

/// Draws `plan.n_samples` shots from a single-mode state.
pub fn sample(state: &GaussianState, plan: &MeasurementPlan) -> Result<Samples> {
    plan.validate()?;
    if state.n_modes() != 1 {
        return Err(invalid("only single-mode states can be measured"));
    }
    if !state.is_physical() {
        return Err(invalid("cannot sample an unphysical state"));
    }
    let mean = state.mode_mean(0);
    let cov = state.mode_cov(0);
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let kinds = plan.scheme.group_kinds();
    let mut groups = Vec::with_capacity(kinds.len());
    for (kind, n) in kinds.into_iter().zip(plan.group_sizes()) {
        let mut values = Vec::with_capacity(n);
        match kind {
            GroupKind::Homodyne(theta) => {
                let (s, c) = theta.sin_cos();
                let mu = c * mean.x + s * mean.y;
                let var = c * c * cov[(0, 0)] + 2.0 * c * s * cov[(0, 1)] + s * s * cov[(1, 1)];
                let sd = var.sqrt();
                for _ in 0..n {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    values.push([mu + sd * z, 0.0]);
                }
            }
            GroupKind::Heterodyne | GroupKind::Joint => {
                let c = if kind == GroupKind::Heterodyne {
                    cov + Matrix2::identity()
                } else {
                    cov
                };
                let l = cholesky2(&c)?;
                for _ in 0..n {
                    let z1: f64 = StandardNormal.sample(&mut rng);
                    let z2: f64 = StandardNormal.sample(&mut rng);
                    values.push([
                        mean.x + l[(0, 0)] * z1,
                        mean.y + l[(1, 0)] * z1 + l[(1, 1)] * z2,
                    ]);
                }
            }
        }
        groups.push(ShotGroup { kind, values });
    }
    Ok(Samples {
        scheme: plan.scheme,
        groups,
    })
}

/// Shifted first and second moment sums of a set of shots.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct Accumulator {
    n: f64,
    s: [f64; 2],
    ss: [f64; 3],
}

impl Accumulator {
    fn push(&mut self, y: [f64; 2]) {
        self.n += 1.0;
        self.s[0] += y[0];
        self.s[1] += y[1];
        self.ss[0] += y[0] * y[0];
        self.ss[1] += y[1] * y[1];
        self.ss[2] += y[0] * y[1];
    }

    fn add(&mut self, o: &Accumulator) {
        self.n += o.n;
        for k in 0..2 {
            self.s[k] += o.s[k];
        }
        for k in 0..3 {
            self.ss[k] += o.ss[k];
        }
    }

    fn sub(&mut self, o: &Accumulator) {
        self.n -= o.n;
        for k in 0..2 {
            self.s[k] -= o.s[k];
        }
        for k in 0..3 {
            self.ss[k] -= o.ss[k];
        }
    }
}

/// Sample statistics of one group: count, mean and scatter matrix with
/// divisor `n` (the maximum-likelihood covariance).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupMoments {
    pub kind: GroupKind,
    pub n: usize,
    pub mean: Vector2<f64>,
    pub scatter: Matrix2<f64>,
}

impl GroupMoments {
    /// Unbiased covariance (divisor `n − 1`).
    pub fn unbiased_cov(&self) -> Matrix2<f64> {
        let n = self.n as f64;
        self.scatter * (n / (n - 1.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
struct GroupSummary {
    kind: GroupKind,
    shift: [f64; 2],
    blocks: Vec<Accumulator>,
    total: Accumulator,
}

impl GroupSummary {
    fn from_group(g: &ShotGroup) -> Self {
        let n = g.values.len();
        let shift = g.values.first().copied().unwrap_or([0.0, 0.0]);
        let n_blocks = JACKKNIFE_BLOCKS.min(n).max(1);
        let mut blocks = vec![Accumulator::default(); n_blocks];
        for (i, y) in g.values.iter().enumerate() {
            blocks[i * n_blocks / n.max(1)].push([y[0] - shift[0], y[1] - shift[1]]);
        }
        let mut total = Accumulator::default();
        for b in &blocks {
            total.add(b);
        }
        Self {
            kind: g.kind,
            shift,
            blocks,
            total,
        }
    }

    fn moments(&self, acc: &Accumulator) -> GroupMoments {
        let n = acc.n;
        let m = [acc.s[0] / n, acc.s[1] / n];
        let sxx = acc.ss[0] / n - m[0] * m[0];
        let spp = acc.ss[1] / n - m[1] * m[1];
        let sxp = acc.ss[2] / n - m[0] * m[1];
        GroupMoments {
            kind: self.kind,
            n: n.round() as usize,
            mean: Vector2::new(m[0] + self.shift[0], m[1] + self.shift[1]),
            scatter: Matrix2::new(sxx.max(0.0), sxp, sxp, spp.max(0.0)),
        }
    }
}

/// Sufficient statistics of a measurement record, kept per jackknife block.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSummary {
    scheme: MeasurementScheme,
    groups: Vec<GroupSummary>,
}

/// Per-entry sample counts behind a [`MomentEstimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleCounts {
    pub x: usize,
    pub p: usize,
    pub xp: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub mean: Vector2<f64>,
    pub cov: Matrix2<f64>,
    pub n_effective: SampleCounts,
}

impl MomentEstimate {
    /// Moments known exactly, as produced by an infinite record.
    pub fn exact(state: &GaussianState) -> Result<Self> {
        if state.n_modes() != 1 {
            return Err(invalid("moments are defined for single-mode states"));
        }
        Ok(Self {
            mean: state.mode_mean(0),
            cov: state.mode_cov(0),
            n_effective: SampleCounts {
                x: usize::MAX,
                p: usize::MAX,
                xp: usize::MAX,
            },
        })
    }

    pub fn has_covariance(&self) -> bool {
        self.n_effective.xp > 0
    }

    /// Smallest per-entry sample count.
    pub fn min_count(&self) -> usize {
        let c = self.n_effective;
        if c.xp > 0 {
            c.x.min(c.p).min(c.xp)
        } else {
            c.x.min(c.p)
        }
    }
}

impl SampleSummary {
    pub fn new(samples: &Samples) -> Self {
        Self {
            scheme: samples.scheme,
            groups: samples
                .groups
                .iter()
                .map(GroupSummary::from_group)
                .collect(),
        }
    }

    pub fn scheme(&self) -> MeasurementScheme {
        self.scheme
    }

    pub fn n_samples(&self) -> usize {
        self.groups.iter().map(|g| g.total.n as usize).sum()
    }

    /// Statistics of every group over the full record.
    pub fn group_moments(&self) -> Vec<GroupMoments> {
        self.groups.iter().map(|g| g.moments(&g.total)).collect()
    }

    pub fn moments(&self) -> Result<MomentEstimate> {
        moments_from_groups(self.scheme, &self.group_moments())
    }

    pub fn n_jackknife(&self) -> usize {
        self.groups
            .iter()
            .map(|g| g.blocks.len())
            .min()
            .unwrap_or(0)
    }

    /// Group statistics with block `b` of every group left out.
    pub fn jackknife_group_moments(&self, b: usize) -> Vec<GroupMoments> {
        self.groups
            .iter()
            .map(|g| {
                let mut acc = g.total;
                if let Some(block) = g.blocks.get(b) {
                    acc.sub(block);
                }
                g.moments(&acc)
            })
            .collect()
    }

    /// Leave-one-block-out moment estimates.
    pub fn jackknife_moments(&self) -> Result<Vec<MomentEstimate>> {
        (0..self.n_jackknife())
            .map(|b| moments_from_groups(self.scheme, &self.jackknife_group_moments(b)))
            .collect()
    }
}

/// Convenience wrapper: summarise and estimate in one step.
pub fn estimate_moments(samples: &Samples) -> Result<MomentEstimate> {
    SampleSummary::new(samples).moments()
}

fn moments_from_groups(
    scheme: MeasurementScheme,
    groups: &[GroupMoments],
) -> Result<MomentEstimate> {
    for g in groups {
        if g.n < 2 {
            return Err(Error::InsufficientData(format!(
                "a {} group holds {} shots; at least 2 are needed",
                scheme.name(),
                g.n
            )));
        }
    }
    let (mean, raw, counts) = match scheme {
        MeasurementScheme::Heterodyne | MeasurementScheme::Joint => {
            let g = groups
                .first()
                .ok_or_else(|| Error::InsufficientData("two-quadrature record is empty".into()))?;
            let mut cov = g.unbiased_cov();
            if scheme == MeasurementScheme::Heterodyne {
                cov -= Matrix2::identity();
            }
            let n = g.n;
            (g.mean, cov, SampleCounts { x: n, p: n, xp: n })
        }
        MeasurementScheme::HomodyneSplit2 | MeasurementScheme::HomodyneSplit3 => {
            let find = |angle: f64| {
                groups
                    .iter()
                    .find(|g| matches!(g.kind, GroupKind::Homodyne(a) if (a - angle).abs() < 1e-12))
                    .ok_or_else(|| {
                        Error::InsufficientData(format!("no homodyne group at angle {angle}"))
                    })
            };
            let gx = find(0.0)?;
            let gp = find(FRAC_PI_2)?;
            let vx = gx.unbiased_cov()[(0, 0)];
            let vp = gp.unbiased_cov()[(0, 0)];
            let (cxp, nxp) = match find(FRAC_PI_4) {
                Ok(gd) => {
                    let vd = gd.unbiased_cov()[(0, 0)];
                    // keep the correlation inside [−1, 1] so repair can act
                    let bound = (vx * vp).sqrt();
                    ((vd - 0.5 * (vx + vp)).clamp(-bound, bound), gd.n)
                }
                Err(_) if scheme == MeasurementScheme::HomodyneSplit2 => (0.0, 0),
                Err(e) => return Err(e),
            };
            (
                Vector2::new(gx.mean.x, gp.mean.x),
                Matrix2::new(vx, cxp, cxp, vp),
                SampleCounts {
                    x: gx.n,
                    p: gp.n,
                    xp: nxp,
                },
            )
        }
    };
    let cov = repair_physicality(&raw).or_else(|_| repair_physicality(&nearest_psd(&raw)))?;
    Ok(MomentEstimate {
        mean,
        cov,
        n_effective: counts,
    })
}

/// Clips negative eigenvalues of a symmetric 2×2 matrix to zero.
fn nearest_psd(c: &Matrix2<f64>) -> Matrix2<f64> {
    let eig = c.symmetric_eigen();
    let d = eig.eigenvalues.map(|v| v.max(0.0));
    eig.eigenvectors * Matrix2::from_diagonal(&d) * eig.eigenvectors.transpose()
}

/// Jackknife variance `(B−1)/B·Σ(θ_b − θ̄)²` of leave-one-out replicates.
/// With a period, replicates are treated as angles on that circle.
pub fn jackknife_variance(replicates: &[f64], period: Option<f64>) -> f64 {
    let b = replicates.len();
    if b < 2 {
        return f64::NAN;
    }
    let devs: Vec<f64> = match period {
        None => {
            let mean = replicates.iter().sum::<f64>() / b as f64;
            replicates.iter().map(|v| v - mean).collect()
        }
        Some(p) => {
            let r0 = replicates[0];
            let rel: Vec<f64> = replicates
                .iter()
                .map(|v| crate::angle::circular_diff(*v, r0, p))
                .collect();
            let mean = rel.iter().sum::<f64>() / b as f64;
            rel.iter().map(|v| v - mean).collect()
        }
    };
    (b as f64 - 1.0) / b as f64 * devs.iter().map(|d| d * d).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(mean: Vector2<f64>, cov: Matrix2<f64>) -> GaussianState {
        GaussianState::single_mode(mean, cov).unwrap()
    }

    fn plan(scheme: MeasurementScheme, n: usize, seed: u64) -> MeasurementPlan {
        MeasurementPlan::new(scheme, n, seed).unwrap()
    }

    #[test]
    fn plan_validation_and_split() {
        assert!(MeasurementPlan::new(MeasurementScheme::HomodyneSplit3, 5, 0).is_err());
        let p = plan(MeasurementScheme::HomodyneSplit3, 100, 0);
        assert_eq!(p.group_sizes(), vec![34, 33, 33]);
        assert_eq!(plan(MeasurementScheme::Joint, 7, 0).group_sizes(), vec![7]);
    }

    #[test]
    fn vacuum_homodyne_variance() {
        let s = sample(
            &GaussianState::vacuum(),
            &plan(MeasurementScheme::HomodyneSplit2, 200_000, 1),
        )
        .unwrap();
        let g = SampleSummary::new(&s).group_moments();
        assert!((g[0].unbiased_cov()[(0, 0)] - 1.0).abs() < 0.02);
        assert!(g[0].mean.x.abs() < 0.01);
    }

    #[test]
    fn heterodyne_adds_vacuum_unit() {
        let s = sample(
            &GaussianState::vacuum(),
            &plan(MeasurementScheme::Heterodyne, 100_000, 2),
        )
        .unwrap();
        let g = SampleSummary::new(&s).group_moments();
        let raw = g[0].unbiased_cov();
        assert!((raw[(0, 0)] - 2.0).abs() < 0.05);
        assert!((raw[(1, 1)] - 2.0).abs() < 0.05);
    }

    #[test]
    fn heterodyne_coherent_state_moments() {
        let st = GaussianState::coherent(100.0, 0.0).unwrap();
        let n = 100_000;
        let m = estimate_moments(&sample(&st, &plan(MeasurementScheme::Heterodyne, n, 3)).unwrap())
            .unwrap();
        // per-quadrature standard error √(2/N) on the mean, 2√(2/N) on variance
        let se_mean = (2.0 / n as f64).sqrt();
        assert!((m.mean.x - 100.0).abs() < 3.0 * se_mean);
        assert!(m.mean.y.abs() < 3.0 * se_mean);
        let se_var = 2.0 * (2.0 / n as f64).sqrt();
        assert!((m.cov[(0, 0)] - 1.0).abs() < 3.0 * se_var);
        assert!((m.cov[(1, 1)] - 1.0).abs() < 3.0 * se_var);
    }

    #[test]
    fn variance_concentration_across_seeds() {
        let var = 18.82 - 17.82 * 0.7_f64.cos();
        let st = state(Vector2::new(97.6, 6.4), Matrix2::identity() * var);
        let mut within = 0;
        for seed in 0..40 {
            let m = estimate_moments(
                &sample(&st, &plan(MeasurementScheme::HomodyneSplit2, 100_000, seed)).unwrap(),
            )
            .unwrap();
            if (m.cov[(0, 0)] / var - 1.0).abs() < 0.03 {
                within += 1;
            }
        }
        assert!(within >= 38, "{within}/40");
    }

    #[test]
    fn split3_recovers_correlation() {
        let cov = Matrix2::new(20.0, 5.0, 5.0, 10.0);
        let st = state(Vector2::zeros(), cov);
        let n = 100_000;
        let m =
            estimate_moments(&sample(&st, &plan(MeasurementScheme::HomodyneSplit3, n, 4)).unwrap())
                .unwrap();
        // Cov = V_d − (V_x + V_p)/2 with independent groups of n/3 shots
        let ng = (n / 3) as f64;
        let vd = 0.5 * (20.0 + 10.0) + 5.0;
        let se = (2.0 * vd * vd / ng + 0.25 * 2.0 * (400.0 + 100.0) / ng).sqrt();
        assert!((m.cov[(0, 1)] - 5.0).abs() < 3.0 * se);
        assert_eq!(m.cov[(0, 1)], m.cov[(1, 0)]);
        assert!(m.has_covariance());
    }

    #[test]
    fn split2_has_no_correlation() {
        let s = sample(
            &GaussianState::vacuum(),
            &plan(MeasurementScheme::HomodyneSplit2, 100, 0),
        )
        .unwrap();
        let m = estimate_moments(&s).unwrap();
        assert!(!m.has_covariance());
        assert_eq!(m.cov[(0, 1)], 0.0);
    }

    #[test]
    fn degenerate_samples_hit_vacuum_floor() {
        let groups = vec![
            ShotGroup {
                kind: GroupKind::Homodyne(0.0),
                values: vec![[3.0, 0.0]; 10],
            },
            ShotGroup {
                kind: GroupKind::Homodyne(FRAC_PI_2),
                values: vec![[-1.0, 0.0]; 10],
            },
            ShotGroup {
                kind: GroupKind::Homodyne(FRAC_PI_4),
                values: vec![[2f64.sqrt(), 0.0]; 10],
            },
        ];
        let s = Samples {
            scheme: MeasurementScheme::HomodyneSplit3,
            groups,
        };
        let m = estimate_moments(&s).unwrap();
        assert_eq!(m.mean, Vector2::new(3.0, -1.0));
        assert!((m.cov - Matrix2::identity()).abs().max() < 1e-12);
    }

    #[test]
    fn missing_group_is_insufficient() {
        let s = Samples {
            scheme: MeasurementScheme::HomodyneSplit3,
            groups: vec![ShotGroup {
                kind: GroupKind::Homodyne(0.0),
                values: vec![[0.0, 0.0], [1.0, 0.0]],
            }],
        };
        assert!(matches!(
            estimate_moments(&s),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn reproducible_and_seed_sensitive() {
        let st = state(Vector2::new(1.0, 2.0), Matrix2::new(3.0, 0.5, 0.5, 2.0));
        for scheme in [
            MeasurementScheme::HomodyneSplit2,
            MeasurementScheme::HomodyneSplit3,
            MeasurementScheme::Heterodyne,
            MeasurementScheme::Joint,
        ] {
            let a = sample(&st, &plan(scheme, 999, 77)).unwrap();
            let b = sample(&st, &plan(scheme, 999, 77)).unwrap();
            assert_eq!(a, b);
            let c = sample(&st, &plan(scheme, 999, 78)).unwrap();
            assert_ne!(a, c);
            assert_eq!(a.n_samples(), 999);
        }
    }

    #[test]
    fn rejects_unphysical_state() {
        let bad = GaussianState::single_mode(Vector2::zeros(), Matrix2::identity() * 0.5);
        if let Ok(st) = bad {
            assert!(sample(&st, &plan(MeasurementScheme::Joint, 10, 0)).is_err());
        }
    }

    #[test]
    fn mean_of_means_is_unbiased() {
        let st = state(Vector2::new(5.0, -2.0), Matrix2::new(4.0, 1.0, 1.0, 3.0));
        let reps = 500;
        let n = 1000;
        let means: Vec<Vector2<f64>> = (0..reps)
            .map(|k| {
                let p = plan(
                    MeasurementScheme::HomodyneSplit3,
                    n,
                    realization_seed(11, k),
                );
                estimate_moments(&sample(&st, &p).unwrap()).unwrap().mean
            })
            .collect();
        for (q, truth) in [(0, 5.0), (1, -2.0)] {
            let vals: Vec<f64> = means.iter().map(|m| m[q]).collect();
            let avg = vals.iter().sum::<f64>() / reps as f64;
            let sd =
                (vals.iter().map(|v| (v - avg).powi(2)).sum::<f64>() / (reps as f64 - 1.0)).sqrt();
            assert!((avg - truth).abs() < 4.0 * sd / (reps as f64).sqrt());
        }
    }

    #[test]
    fn heterodyne_and_homodyne_covariances_agree() {
        let cov = Matrix2::new(6.0, 1.5, 1.5, 3.0);
        let st = state(Vector2::new(1.0, 1.0), cov);
        let n = 1_000_000;
        let het =
            estimate_moments(&sample(&st, &plan(MeasurementScheme::Heterodyne, n, 5)).unwrap())
                .unwrap();
        let hom =
            estimate_moments(&sample(&st, &plan(MeasurementScheme::HomodyneSplit3, n, 6)).unwrap())
                .unwrap();
        // generous combined standard error using the largest variance involved
        let big = 9.0 + 1.0;
        let se = (2.0 * big * big / n as f64 + 2.0 * big * big / (n as f64 / 3.0) * 1.5).sqrt();
        assert!((het.cov - hom.cov).abs().max() < 3.0 * se);
    }

    #[test]
    fn jackknife_matches_known_variance_of_mean() {
        let st = state(Vector2::zeros(), Matrix2::identity() * 4.0);
        let n = 20_000;
        let summary =
            SampleSummary::new(&sample(&st, &plan(MeasurementScheme::Joint, n, 9)).unwrap());
        let reps = summary.jackknife_moments().unwrap();
        assert_eq!(reps.len(), JACKKNIFE_BLOCKS);
        let xs: Vec<f64> = reps.iter().map(|m| m.mean.x).collect();
        let v = jackknife_variance(&xs, None);
        let truth = 4.0 / n as f64;
        // 19 degrees of freedom: the ratio stays well inside [0.3, 2.2]
        assert!(v / truth > 0.3 && v / truth < 2.2, "{}", v / truth);
    }

    #[test]
    fn circular_jackknife_handles_the_cut() {
        let reps = [3.1, -3.1, 3.12, -3.12];
        let v = jackknife_variance(&reps, Some(2.0 * std::f64::consts::PI));
        assert!(v < 0.01);
    }

    #[test]
    fn shifted_sums_stay_accurate_far_from_zero() {
        let st = state(Vector2::new(1e8, -1e8), Matrix2::identity());
        let m =
            estimate_moments(&sample(&st, &plan(MeasurementScheme::Joint, 50_000, 10)).unwrap())
                .unwrap();
        assert!((m.cov[(0, 0)] - 1.0).abs() < 0.05);
    }

    #[test]
    fn child_seeds_differ() {
        assert_ne!(child_seed(1, 0), child_seed(1, 1));
        assert_ne!(child_seed(1, 0), child_seed(2, 0));
        assert_eq!(realization_seed(42, 3), 42 ^ 3);
    }
}
