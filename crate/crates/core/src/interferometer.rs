//! End-to-end forward model of the light-matter interferometer and its
//! variations.
//!
//! Both interfaces take the matter mode as first input and the light mode as
//! second. The `√T`-weighted output `out₁` always leaves on the light path and
//! `out₂` on the matter path, so the first interface moves a fraction `T₁` of
//! the light into matter and the second interface writes
//! `x_o = √T₂·x_matter + √(1−T₂)·x_light` onto the measured light.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gaussian::{
    bs_symplectic, loss_channel, process_symplectic, GaussianState, ProcessParams, SymplecticOp,
};

const MATTER: usize = 0;
const LIGHT: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    /// Light is coupled in, the process acts on matter, and the matter is read
    /// back into the same light beam.
    Interferometric,
    /// The process acts on the bare thermal matter, which is then read out by
    /// fresh coherent light.
    Simplistic,
    /// Light prepares the matter on the first interface and is then blocked;
    /// the readout interface sees vacuum in the light port.
    BlockedBeam,
}

impl Topology {
    pub fn name(&self) -> &'static str {
        match self {
            Topology::Interferometric => "interferometric",
            Topology::Simplistic => "simplistic",
            Topology::BlockedBeam => "blocked_beam",
        }
    }
}

/// Known parameters of the scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetupConfig {
    pub topology: Topology,
    pub t1: f64,
    pub t2: f64,
    pub v_thermal: f64,
    pub r_amp: f64,
    #[serde(default)]
    pub probe_phase: f64,
}

impl SetupConfig {
    pub fn new(topology: Topology, t1: f64, t2: f64, v_thermal: f64, r_amp: f64) -> Result<Self> {
        let s = Self {
            topology,
            t1,
            t2,
            v_thermal,
            r_amp,
            probe_phase: 0.0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, t) in [("t1", self.t1), ("t2", self.t2)] {
            if !(0.0..=1.0).contains(&t) {
                return Err(invalid(format!("{name} must be in [0, 1], got {t}")));
            }
        }
        if !(self.v_thermal >= 1.0) || !self.v_thermal.is_finite() {
            return Err(invalid(format!(
                "v_thermal must be >= 1, got {}",
                self.v_thermal
            )));
        }
        if !(self.r_amp >= 0.0) || !self.r_amp.is_finite() {
            return Err(invalid(format!("r_amp must be >= 0, got {}", self.r_amp)));
        }
        if !self.probe_phase.is_finite() {
            return Err(invalid("probe_phase must be finite"));
        }
        Ok(())
    }

    pub fn with_probe_phase(mut self, phase: f64) -> Self {
        self.probe_phase = phase;
        self
    }

    /// First-interface transmittance as the model sees it.
    pub fn effective_t1(&self) -> f64 {
        match self.topology {
            Topology::Simplistic => 0.0,
            _ => self.t1,
        }
    }

    pub fn probe_mean(&self) -> Vector2<f64> {
        Vector2::new(
            self.r_amp * self.probe_phase.cos(),
            self.r_amp * self.probe_phase.sin(),
        )
    }
}

/// Loss and thermal noise acting on the matter right after the process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub t_c: f64,
    pub v_c: f64,
}

impl NoiseParams {
    pub fn new(t_c: f64, v_c: f64) -> Result<Self> {
        if !(t_c > 0.0 && t_c <= 1.0) {
            return Err(invalid(format!("t_c must be in (0, 1], got {t_c}")));
        }
        if !(v_c >= 1.0) || !v_c.is_finite() {
            return Err(invalid(format!("v_c must be >= 1, got {v_c}")));
        }
        Ok(Self { t_c, v_c })
    }

    /// The ideal channel assumed by the naive estimators.
    pub fn ideal() -> Self {
        Self { t_c: 1.0, v_c: 1.0 }
    }

    pub fn is_ideal(&self) -> bool {
        self.t_c == 1.0
    }
}

fn interface(t: f64) -> Result<SymplecticOp> {
    bs_symplectic(t)?.then(&SymplecticOp::swap())
}

/// Propagates the input states through the chosen topology and returns the
/// state of the measured light mode.
pub fn forward(
    setup: &SetupConfig,
    process: &ProcessParams,
    noise: Option<&NoiseParams>,
) -> Result<GaussianState> {
    setup.validate()?;
    let thermal = GaussianState::thermal(setup.v_thermal)?;
    let coherent = GaussianState::coherent(setup.r_amp, setup.probe_phase)?;
    let process_op = process_symplectic(process);
    let decohere = |s: GaussianState| -> Result<GaussianState> {
        match noise {
            Some(n) => loss_channel(&s, MATTER, n.t_c, n.v_c),
            None => Ok(s),
        }
    };

    let before_readout = match setup.topology {
        Topology::Interferometric | Topology::BlockedBeam => {
            let s = thermal.tensor(&coherent)?;
            let s = s.apply(&interface(setup.t1)?, &[MATTER, LIGHT])?;
            let s = decohere(s.apply(&process_op, &[MATTER])?)?;
            if setup.topology == Topology::BlockedBeam {
                s.reduce(MATTER)?.tensor(&GaussianState::vacuum())?
            } else {
                s
            }
        }
        Topology::Simplistic => {
            let s = decohere(thermal.apply(&process_op, &[0])?)?;
            s.tensor(&coherent)?
        }
    };
    before_readout
        .apply(&interface(setup.t2)?, &[MATTER, LIGHT])?
        .reduce(LIGHT)
}

/// Closed-form linear response of the measured light to the process matrix
/// `B = R(Φ)·Sq(w, α)`.
///
/// The light reads `A_L·m_in + A_M·m_matter + g_d·d + noise` with
/// `A_L = a_l·B + b_l·I` acting on the coherent input and
/// `A_M = a_m·B + b_m·I` on the thermal matter, so
/// `Σ_out = A_L·A_Lᵀ + V·A_M·A_Mᵀ + c₀·I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputModel {
    pub light_via_process: f64,
    pub light_direct: f64,
    pub matter_via_process: f64,
    pub matter_direct: f64,
    pub added_noise: f64,
    pub displacement_gain: f64,
    pub v_thermal: f64,
}

impl OutputModel {
    pub fn new(setup: &SetupConfig, noise: Option<&NoiseParams>) -> Result<Self> {
        setup.validate()?;
        let n = noise.copied().unwrap_or_else(NoiseParams::ideal);
        let (t1, t2, tc) = (setup.t1, setup.t2, n.t_c);
        let bath = t2 * (1.0 - tc) * n.v_c;
        let m = match setup.topology {
            Topology::Interferometric => Self {
                light_via_process: (t1 * t2 * tc).sqrt(),
                light_direct: ((1.0 - t1) * (1.0 - t2)).sqrt(),
                matter_via_process: -(t2 * (1.0 - t1) * tc).sqrt(),
                matter_direct: (t1 * (1.0 - t2)).sqrt(),
                added_noise: bath,
                displacement_gain: (t2 * tc).sqrt(),
                v_thermal: setup.v_thermal,
            },
            Topology::BlockedBeam => Self {
                light_via_process: (t1 * t2 * tc).sqrt(),
                light_direct: 0.0,
                matter_via_process: -(t2 * (1.0 - t1) * tc).sqrt(),
                matter_direct: 0.0,
                added_noise: (1.0 - t2) + bath,
                displacement_gain: (t2 * tc).sqrt(),
                v_thermal: setup.v_thermal,
            },
            Topology::Simplistic => Self {
                light_via_process: 0.0,
                light_direct: (1.0 - t2).sqrt(),
                matter_via_process: (t2 * tc).sqrt(),
                matter_direct: 0.0,
                added_noise: bath,
                displacement_gain: (t2 * tc).sqrt(),
                v_thermal: setup.v_thermal,
            },
        };
        Ok(m)
    }

    /// Transfer matrix `A_L` of the coherent input.
    pub fn light_transfer(&self, b: &Matrix2<f64>) -> Matrix2<f64> {
        b * self.light_via_process + Matrix2::identity() * self.light_direct
    }

    pub fn matter_transfer(&self, b: &Matrix2<f64>) -> Matrix2<f64> {
        b * self.matter_via_process + Matrix2::identity() * self.matter_direct
    }

    pub fn mean(
        &self,
        b: &Matrix2<f64>,
        displacement: &Vector2<f64>,
        probe: &Vector2<f64>,
    ) -> Vector2<f64> {
        self.light_transfer(b) * probe + displacement * self.displacement_gain
    }

    pub fn cov(&self, b: &Matrix2<f64>) -> Matrix2<f64> {
        let al = self.light_transfer(b);
        let am = self.matter_transfer(b);
        al * al.transpose()
            + am * am.transpose() * self.v_thermal
            + Matrix2::identity() * self.added_noise
    }

    /// Coefficients `(a, b, c)` with `Σ_out = a·BBᵀ + b·(B + Bᵀ) + c·I`.
    pub fn cov_coefficients(&self) -> (f64, f64, f64) {
        let v = self.v_thermal;
        let a = self.light_via_process.powi(2) + v * self.matter_via_process.powi(2);
        let b = self.light_via_process * self.light_direct
            + v * self.matter_via_process * self.matter_direct;
        let c = self.light_direct.powi(2) + v * self.matter_direct.powi(2) + self.added_noise;
        (a, b, c)
    }
}

/// Affine response of the output mean, `m_out = M_lin·m_in + g_d·d`, with
/// `M_lin = matter_gain·R(Φ)·Sq + light_gain·I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanMap {
    pub displacement_gain: f64,
    pub matter_gain: f64,
    pub light_gain: f64,
}

impl MeanMap {
    pub fn m_lin(&self, process: &ProcessParams) -> Matrix2<f64> {
        self.m_lin_from(&process.linear())
    }

    pub fn m_lin_from(&self, b: &Matrix2<f64>) -> Matrix2<f64> {
        b * self.matter_gain + Matrix2::identity() * self.light_gain
    }

    /// Displacement contribution `g_d·d` to the output mean.
    pub fn offset(&self, process: &ProcessParams) -> Vector2<f64> {
        process.displacement() * self.displacement_gain
    }

    pub fn predict_mean(&self, process: &ProcessParams, probe: &Vector2<f64>) -> Vector2<f64> {
        self.m_lin(process) * probe + self.offset(process)
    }
}

/// Linear-response decomposition of the output mean for topologies with a
/// light path through the first interface.
pub fn mean_map(setup: &SetupConfig, noise: Option<&NoiseParams>) -> Result<MeanMap> {
    if setup.topology == Topology::Simplistic {
        return Err(Error::Unsupported(
            "the simplistic topology has no light path through the first interface".into(),
        ));
    }
    let m = OutputModel::new(setup, noise)?;
    Ok(MeanMap {
        displacement_gain: m.displacement_gain,
        matter_gain: m.light_via_process,
        light_gain: m.light_direct,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn setup(t: f64, v: f64, r: f64) -> SetupConfig {
        SetupConfig::new(Topology::Interferometric, t, t, v, r).unwrap()
    }

    #[test]
    fn mach_zehnder_identity_example() {
        let s = setup(0.1, 100.0, 100.0).with_probe_phase(0.4);
        let out = forward(&s, &ProcessParams::identity(), None).unwrap();
        let coh = GaussianState::coherent(100.0, 0.4).unwrap();
        assert!((out.mean() - coh.mean()).abs().max() < 1e-10);
        assert!((out.cov() - coh.cov()).abs().max() < 1e-10);
    }

    #[test]
    fn phase_only_means_and_variance() {
        let s = setup(0.1, 100.0, 100.0);
        let out = forward(&s, &ProcessParams::phase_only(0.7).unwrap(), None).unwrap();
        let m = out.mode_mean(0);
        assert!((m.x - (90.0 + 10.0 * 0.7_f64.cos())).abs() < 1e-10);
        assert!((m.y - 10.0 * 0.7_f64.sin()).abs() < 1e-10);
        assert!((m.x - 97.648).abs() < 1e-3 && (m.y - 6.442).abs() < 1e-3);
        let var = 18.82 - 17.82 * 0.7_f64.cos();
        let c = out.mode_cov(0);
        assert!((c[(0, 0)] - var).abs() < 1e-10);
        assert!((c[(1, 1)] - var).abs() < 1e-10);
        assert!(c[(0, 1)].abs() < 1e-10);

        let at_zero = forward(&s, &ProcessParams::identity(), None).unwrap();
        assert!((at_zero.mode_cov(0)[(0, 0)] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn mean_map_examples() {
        let s = setup(0.1, 100.0, 100.0);
        let map = mean_map(&s, None).unwrap();
        assert!(
            (map.m_lin(&ProcessParams::identity()) - Matrix2::identity())
                .abs()
                .max()
                < 1e-15
        );

        let p = ProcessParams::new(0.0, 0.0, 0.0, 5.0, (4.0_f64).atan2(3.0)).unwrap();
        let off = map.offset(&p);
        assert!((off.x - 0.1_f64.sqrt() * 3.0).abs() < 1e-12);
        assert!((off.y - 0.1_f64.sqrt() * 4.0).abs() < 1e-12);
        assert!((off.x - 0.9487).abs() < 1e-4 && (off.y - 1.2649).abs() < 1e-4);

        let lossy = mean_map(&s, Some(&NoiseParams::new(0.9, 1.0).unwrap())).unwrap();
        assert!((lossy.displacement_gain - 0.3).abs() < 1e-15);
        assert!((lossy.matter_gain - 0.1 * 0.9_f64.sqrt()).abs() < 1e-15);
        assert!((lossy.light_gain - 0.9).abs() < 1e-15);

        let simple = SetupConfig::new(Topology::Simplistic, 0.0, 0.1, 100.0, 1.0).unwrap();
        assert!(matches!(
            mean_map(&simple, None),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn simplistic_output_ignores_phase() {
        let s = SetupConfig::new(Topology::Simplistic, 0.3, 0.1, 100.0, 10.0).unwrap();
        let base = forward(&s, &ProcessParams::identity(), None).unwrap();
        for &phi in &[0.3, 1.5, -2.9] {
            for &probe in &[0.0, 1.0] {
                let out = forward(
                    &s.with_probe_phase(probe),
                    &ProcessParams::phase_only(phi).unwrap(),
                    None,
                )
                .unwrap();
                assert!((out.cov() - base.cov()).abs().max() < 1e-12);
            }
        }
        // Var = T₂V + 1 − T₂
        assert!((base.mode_cov(0)[(0, 0)] - (0.1 * 100.0 + 0.9)).abs() < 1e-12);
    }

    #[test]
    fn blocked_beam_variance() {
        let s = SetupConfig::new(Topology::BlockedBeam, 0.1, 0.1, 100.0, 10.0).unwrap();
        let out = forward(
            &s,
            &ProcessParams::displacement_only(4.0, 0.5).unwrap(),
            None,
        )
        .unwrap();
        // 1 − T₂ + T₂((1 − T₁)V + T₁)
        let expected = 0.9 + 0.1 * (0.9 * 100.0 + 0.1);
        assert!((out.mode_cov(0)[(0, 0)] - expected).abs() < 1e-12);
    }

    #[test]
    fn variance_follows_cosine_law() {
        let (t1, t2, v) = (0.2, 0.05, 40.0);
        let s = SetupConfig::new(Topology::Interferometric, t1, t2, v, 3.0).unwrap();
        let u = 1.0 - t1 - t2 + 2.0 * t1 * t2 + t1 * v + t2 * v - 2.0 * t1 * t2 * v;
        let vv = 2.0 * (1.0 - v) * ((1.0 - t1) * (1.0 - t2) * t1 * t2).sqrt();
        for k in 0..64 {
            let phi = -std::f64::consts::PI + k as f64 * 0.1;
            let out = forward(&s, &ProcessParams::phase_only(phi).unwrap(), None).unwrap();
            let c = out.mode_cov(0);
            assert!((c[(0, 0)] - (u + vv * phi.cos())).abs() < 1e-10);
            assert!((c[(1, 1)] - (u + vv * phi.cos())).abs() < 1e-10);
        }
    }

    fn topology() -> impl Strategy<Value = Topology> {
        prop_oneof![
            Just(Topology::Interferometric),
            Just(Topology::Simplistic),
            Just(Topology::BlockedBeam)
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn mach_zehnder_identity(t in 0.0..=1.0f64, r in 0.0..500.0f64, v in 1.0..1000.0f64, probe in -3.2..3.2f64) {
            let s = setup(t, v, r).with_probe_phase(probe);
            let out = forward(&s, &ProcessParams::identity(), None).unwrap();
            let coh = GaussianState::coherent(r, probe).unwrap();
            prop_assert!((out.mean() - coh.mean()).abs().max() <= 1e-10);
            prop_assert!((out.cov() - coh.cov()).abs().max() <= 1e-10);
        }

        #[test]
        fn output_model_matches_forward(
            topo in topology(),
            t1 in 0.0..=1.0f64, t2 in 0.0..=1.0f64, v in 1.0..300.0f64, r in 0.0..300.0f64,
            probe in -3.2..3.2f64,
            phi in -3.2..3.2f64, w in 0.0..2.0f64, alpha in -3.2..3.2f64, d in 0.0..10.0f64, beta in -3.2..3.2f64,
            tc in 0.05..=1.0f64, vc in 1.0..5.0f64,
        ) {
            let s = SetupConfig::new(topo, t1, t2, v, r).unwrap().with_probe_phase(probe);
            let p = ProcessParams::new(phi, w, alpha, d, beta).unwrap();
            let n = NoiseParams::new(tc, vc).unwrap();
            let out = forward(&s, &p, Some(&n)).unwrap();
            let model = OutputModel::new(&s, Some(&n)).unwrap();
            let b = p.linear();
            let scale = 1.0 + r + d + v * 8.0_f64.exp();
            prop_assert!((out.mode_mean(0) - model.mean(&b, &p.displacement(), &s.probe_mean())).abs().max() <= 1e-12 * scale);
            prop_assert!((out.mode_cov(0) - model.cov(&b)).abs().max() <= 1e-12 * scale);
            let (a, bb, c) = model.cov_coefficients();
            let alt = b * b.transpose() * a + (b + b.transpose()) * bb + Matrix2::identity() * c;
            prop_assert!((alt - model.cov(&b)).abs().max() <= 1e-12 * scale);
            prop_assert!(out.is_physical());
        }
    }

    #[test]
    fn forward_mean_matches_mean_map_on_random_draws() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let topo = if rng.random_bool(0.5) {
                Topology::Interferometric
            } else {
                Topology::BlockedBeam
            };
            let s = SetupConfig::new(
                topo,
                rng.random_range(0.0..=1.0),
                rng.random_range(0.0..=1.0),
                rng.random_range(1.0..300.0),
                rng.random_range(0.0..300.0),
            )
            .unwrap()
            .with_probe_phase(rng.random_range(-3.0..3.0));
            let p = ProcessParams::new(
                rng.random_range(-3.0..3.0),
                rng.random_range(0.0..2.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(0.0..10.0),
                rng.random_range(-3.0..3.0),
            )
            .unwrap();
            let noise =
                NoiseParams::new(rng.random_range(0.1..=1.0), rng.random_range(1.0..3.0)).unwrap();
            let out = forward(&s, &p, Some(&noise)).unwrap();
            let map = mean_map(&s, Some(&noise)).unwrap();
            let predicted = map.predict_mean(&p, &s.probe_mean());
            assert!((out.mode_mean(0) - predicted).abs().max() < 1e-10 * (1.0 + s.r_amp));
        }
    }
}
