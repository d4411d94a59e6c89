//! Run configuration: thresholds for scheduling, generation, pruning, the
//! cost model and the simulator.
//!
//! On disk the configuration is TOML with four flat tables, `[scheduler]`,
//! `[pruning]`, `[cost]` and `[sim]`. Every key is optional; unknown keys are
//! rejected so that typos do not silently fall back to defaults.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::trajectory::PhaseProfile;

/// Routing thresholds for the lightweight-generator trigger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchedulerConfig {
    pub v_min: f64,
    pub v_max: f64,
    pub tau: f64,
    pub buffer_len: usize,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        SchedulerConfig {
            v_min: 0.2,
            v_max: 0.5,
            tau: 0.5,
            buffer_len: 6,
        }
    }
}

impl SchedulerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_min > 0.0) {
            return Err(Error::config("scheduler: v_min must be > 0"));
        }
        if !(self.v_min < self.v_max) {
            return Err(Error::config(format!(
                "scheduler: v_min must be < v_max (got v_min={}, v_max={})",
                self.v_min, self.v_max
            )));
        }
        // tau = 1 is accepted: it is the "never route to the generator" setting.
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::config(format!(
                "scheduler: tau must lie in (0, 1], got {}",
                self.tau
            )));
        }
        if self.buffer_len < 2 {
            return Err(Error::config(format!(
                "scheduler: buffer_len must be >= 2, got {}",
                self.buffer_len
            )));
        }
        Ok(())
    }
}

/// Ridge generator settings and its validity gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorConfig {
    /// Tikhonov regularizer.
    pub lambda: f64,
    /// Deviation gate width, in per-channel standard deviations.
    pub gate_k: f64,
    /// Lower bound on the standard deviation used by the gate.
    pub gate_sigma_floor: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            lambda: 1e-2,
            gate_k: 3.0,
            gate_sigma_floor: 1e-2,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::config(format!(
                "scheduler: lambda must be >= 0, got {}",
                self.lambda
            )));
        }
        if !(self.gate_k > 0.0) {
            return Err(Error::config("scheduler: gate_k must be > 0"));
        }
        if !(self.gate_sigma_floor >= 0.0) {
            return Err(Error::config("scheduler: gate_sigma_floor must be >= 0"));
        }
        Ok(())
    }
}

/// Canny edge detector parameters. Thresholds are fractions of the largest
/// gradient magnitude in the image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CannyParams {
    pub gaussian_sigma: f64,
    pub kernel_size: usize,
    pub low_ratio: f64,
    pub high_ratio: f64,
}

impl Default for CannyParams {
    fn default() -> Self {
        CannyParams {
            gaussian_sigma: 1.4,
            kernel_size: 5,
            low_ratio: 0.1,
            high_ratio: 0.3,
        }
    }
}

impl CannyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gaussian_sigma > 0.0 && self.gaussian_sigma.is_finite()) {
            return Err(Error::config("pruning: canny_sigma must be > 0"));
        }
        if self.kernel_size < 3 || self.kernel_size.is_multiple_of(2) {
            return Err(Error::config(format!(
                "pruning: canny_kernel_size must be odd and >= 3, got {}",
                self.kernel_size
            )));
        }
        if !(self.low_ratio > 0.0 && self.low_ratio < self.high_ratio && self.high_ratio <= 1.0) {
            return Err(Error::config(format!(
                "pruning: need 0 < canny_low < canny_high <= 1 (got low={}, high={})",
                self.low_ratio, self.high_ratio
            )));
        }
        Ok(())
    }
}

/// Token pruning settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PruningConfig {
    /// Speed below which pruning is disabled.
    pub v_p_min: f64,
    /// Speed at which the retain ratio reaches zero.
    pub v_p_max: f64,
    /// Semantic threshold; `None` means `1/N` (above-average importance).
    pub t_ks: Option<f64>,
    pub patch_size: usize,
    pub canny: CannyParams,
}

impl Default for PruningConfig {
    fn default() -> Self {
        PruningConfig {
            v_p_min: 0.5,
            v_p_max: 1.0,
            t_ks: None,
            patch_size: 16,
            canny: CannyParams::default(),
        }
    }
}

impl PruningConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_p_min > 0.0 && self.v_p_min < self.v_p_max) {
            return Err(Error::config(format!(
                "pruning: need 0 < v_p_min < v_p_max (got v_p_min={}, v_p_max={})",
                self.v_p_min, self.v_p_max
            )));
        }
        if let Some(t) = self.t_ks {
            if !(t >= 0.0) {
                return Err(Error::config("pruning: t_ks must be >= 0"));
            }
        }
        if self.patch_size == 0 {
            return Err(Error::config("pruning: patch_size must be positive"));
        }
        self.canny.validate()
    }
}

/// How the per-call cost of the expensive policy scales with kept tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenCostLaw {
    Linear,
    Quadratic,
}

/// Normalized compute cost of each kind of step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    /// Cost of an unpruned expensive-policy call.
    pub c_full: f64,
    /// Fraction of `c_full` attributable to visual tokens.
    pub c_tok: f64,
    /// Cost of one lightweight-generator call.
    pub c_lwm: f64,
    pub mode: TokenCostLaw,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            c_full: 1.0,
            c_tok: 0.6,
            c_lwm: 0.001,
            mode: TokenCostLaw::Linear,
        }
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_full > 0.0 && self.c_full.is_finite()) {
            return Err(Error::config("cost: c_full must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.c_tok) {
            return Err(Error::config("cost: c_tok must lie in [0, 1]"));
        }
        if !(self.c_lwm >= 0.0 && self.c_lwm < self.c_full) {
            return Err(Error::config(
                "cost: c_lwm must satisfy 0 <= c_lwm < c_full",
            ));
        }
        Ok(())
    }
}

/// Simulator and batch settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub profile: PhaseProfile,
    /// Half-width of the uniform noise the oracle policy adds per channel.
    pub noise: f64,
    /// Seed of the first episode; episode `i` uses `seed + i`.
    pub seed: u64,
    pub episodes: usize,
    /// L-infinity distance to the goal that counts as success.
    pub success_tol: f64,
    pub step_cap: usize,
    /// Per-channel physical velocity cap.
    pub v_max_env: f64,
    /// Side length of the rendered square observation, in pixels.
    pub image_size: usize,
    /// Range of the fraction of each phase's peak-speed capacity that the
    /// sampled task displacement uses. Lower fractions mean longer ramps.
    pub fill_min: f64,
    pub fill_max: f64,
    /// Seed of the fixed projection matrices used for synthetic attention.
    pub projection_seed: u64,
    pub out_dir: Option<String>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            profile: PhaseProfile::default(),
            noise: 0.0,
            seed: 0,
            episodes: 100,
            success_tol: 0.05,
            step_cap: 200,
            v_max_env: 1.0,
            image_size: 224,
            fill_min: 0.65,
            fill_max: 0.8,
            projection_seed: 7,
            out_dir: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.profile.validate(self.v_max_env)?;
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::config("sim: noise must be >= 0"));
        }
        if self.episodes == 0 {
            return Err(Error::config("sim: episodes must be >= 1"));
        }
        if !(self.success_tol > 0.0) {
            return Err(Error::config("sim: success_tol must be > 0"));
        }
        if self.step_cap < self.profile.total_steps() {
            return Err(Error::config(format!(
                "sim: step_cap ({}) is shorter than the phase profile ({} steps)",
                self.step_cap,
                self.profile.total_steps()
            )));
        }
        if !(self.v_max_env > 0.0 && self.v_max_env.is_finite()) {
            return Err(Error::config("sim: v_max_env must be > 0"));
        }
        if self.image_size < 16 {
            return Err(Error::config("sim: image_size must be >= 16"));
        }
        if !(self.fill_min >= 0.5 && self.fill_min <= self.fill_max && self.fill_max <= 1.0) {
            return Err(Error::config(format!(
                "sim: need 0.5 <= fill_min <= fill_max <= 1 (got {}, {})",
                self.fill_min, self.fill_max
            )));
        }
        Ok(())
    }

    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.episodes as u64).map(move |i| self.seed.wrapping_add(i))
    }
}

/// Everything needed to run a batch of episodes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub scheduler: SchedulerConfig,
    pub generator: GeneratorConfig,
    pub pruning: PruningConfig,
    pub cost: CostModel,
    pub sim: SimConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.scheduler.validate()?;
        self.generator.validate()?;
        self.pruning.validate()?;
        self.cost.validate()?;
        self.sim.validate()?;
        if !self.sim.image_size.is_multiple_of(self.pruning.patch_size) {
            return Err(Error::config(format!(
                "pruning: patch_size {} does not divide sim.image_size {}",
                self.pruning.patch_size, self.sim.image_size
            )));
        }
        if self.sim.image_size < self.pruning.canny.kernel_size {
            return Err(Error::config(
                "sim: image_size smaller than the Canny kernel",
            ));
        }
        Ok(())
    }

    /// Parses a TOML document. Missing keys take their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        let cfg = file.into_config()?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Serializes every key, defaults included.
    pub fn to_toml(&self) -> String {
        toml::to_string(&ConfigFile::from_config(self)).expect("config serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    scheduler: SchedulerSection,
    #[serde(default)]
    pruning: PruningSection,
    #[serde(default)]
    cost: CostSection,
    #[serde(default)]
    sim: SimSection,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SchedulerSection {
    v_min: f64,
    v_max: f64,
    tau: f64,
    buffer_len: usize,
    lambda: f64,
    gate_k: f64,
    gate_sigma_floor: f64,
}

impl Default for SchedulerSection {
    fn default() -> Self {
        let s = SchedulerConfig::default();
        let g = GeneratorConfig::default();
        SchedulerSection {
            v_min: s.v_min,
            v_max: s.v_max,
            tau: s.tau,
            buffer_len: s.buffer_len,
            lambda: g.lambda,
            gate_k: g.gate_k,
            gate_sigma_floor: g.gate_sigma_floor,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PruningSection {
    v_p_min: f64,
    v_p_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_ks: Option<f64>,
    patch_size: usize,
    canny_sigma: f64,
    canny_kernel_size: usize,
    canny_low: f64,
    canny_high: f64,
}

impl Default for PruningSection {
    fn default() -> Self {
        let p = PruningConfig::default();
        PruningSection {
            v_p_min: p.v_p_min,
            v_p_max: p.v_p_max,
            t_ks: p.t_ks,
            patch_size: p.patch_size,
            canny_sigma: p.canny.gaussian_sigma,
            canny_kernel_size: p.canny.kernel_size,
            canny_low: p.canny.low_ratio,
            canny_high: p.canny.high_ratio,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CostSection {
    c_full: f64,
    c_tok: f64,
    c_lwm: f64,
    mode: TokenCostLaw,
}

impl Default for CostSection {
    fn default() -> Self {
        let c = CostModel::default();
        CostSection {
            c_full: c.c_full,
            c_tok: c.c_tok,
            c_lwm: c.c_lwm,
            mode: c.mode,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SimSection {
    phase_durations: Vec<usize>,
    phase_peaks: Vec<f64>,
    noise: f64,
    seed: u64,
    episodes: usize,
    success_tol: f64,
    step_cap: usize,
    v_max_env: f64,
    image_size: usize,
    fill_min: f64,
    fill_max: f64,
    projection_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    out_dir: Option<String>,
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection::from(&SimConfig::default())
    }
}

impl From<&SimConfig> for SimSection {
    fn from(s: &SimConfig) -> Self {
        SimSection {
            phase_durations: s.profile.phases().iter().map(|p| p.duration).collect(),
            phase_peaks: s.profile.phases().iter().map(|p| p.peak_speed).collect(),
            noise: s.noise,
            seed: s.seed,
            episodes: s.episodes,
            success_tol: s.success_tol,
            step_cap: s.step_cap,
            v_max_env: s.v_max_env,
            image_size: s.image_size,
            fill_min: s.fill_min,
            fill_max: s.fill_max,
            projection_seed: s.projection_seed,
            out_dir: s.out_dir.clone(),
        }
    }
}

impl ConfigFile {
    fn into_config(self) -> Result<RunConfig> {
        let s = self.scheduler;
        let p = self.pruning;
        let c = self.cost;
        let m = self.sim;
        Ok(RunConfig {
            scheduler: SchedulerConfig {
                v_min: s.v_min,
                v_max: s.v_max,
                tau: s.tau,
                buffer_len: s.buffer_len,
            },
            generator: GeneratorConfig {
                lambda: s.lambda,
                gate_k: s.gate_k,
                gate_sigma_floor: s.gate_sigma_floor,
            },
            pruning: PruningConfig {
                v_p_min: p.v_p_min,
                v_p_max: p.v_p_max,
                t_ks: p.t_ks,
                patch_size: p.patch_size,
                canny: CannyParams {
                    gaussian_sigma: p.canny_sigma,
                    kernel_size: p.canny_kernel_size,
                    low_ratio: p.canny_low,
                    high_ratio: p.canny_high,
                },
            },
            cost: CostModel {
                c_full: c.c_full,
                c_tok: c.c_tok,
                c_lwm: c.c_lwm,
                mode: c.mode,
            },
            sim: SimConfig {
                profile: PhaseProfile::from_lists(&m.phase_durations, &m.phase_peaks)?,
                noise: m.noise,
                seed: m.seed,
                episodes: m.episodes,
                success_tol: m.success_tol,
                step_cap: m.step_cap,
                v_max_env: m.v_max_env,
                image_size: m.image_size,
                fill_min: m.fill_min,
                fill_max: m.fill_max,
                projection_seed: m.projection_seed,
                out_dir: m.out_dir,
            },
        })
    }

    fn from_config(cfg: &RunConfig) -> Self {
        ConfigFile {
            scheduler: SchedulerSection {
                v_min: cfg.scheduler.v_min,
                v_max: cfg.scheduler.v_max,
                tau: cfg.scheduler.tau,
                buffer_len: cfg.scheduler.buffer_len,
                lambda: cfg.generator.lambda,
                gate_k: cfg.generator.gate_k,
                gate_sigma_floor: cfg.generator.gate_sigma_floor,
            },
            pruning: PruningSection {
                v_p_min: cfg.pruning.v_p_min,
                v_p_max: cfg.pruning.v_p_max,
                t_ks: cfg.pruning.t_ks,
                patch_size: cfg.pruning.patch_size,
                canny_sigma: cfg.pruning.canny.gaussian_sigma,
                canny_kernel_size: cfg.pruning.canny.kernel_size,
                canny_low: cfg.pruning.canny.low_ratio,
                canny_high: cfg.pruning.canny.high_ratio,
            },
            cost: CostSection {
                c_full: cfg.cost.c_full,
                c_tok: cfg.cost.c_tok,
                c_lwm: cfg.cost.c_lwm,
                mode: cfg.cost.mode,
            },
            sim: SimSection::from(&cfg.sim),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.scheduler.v_min, 0.2);
        assert_eq!(cfg.scheduler.v_max, 0.5);
        assert_eq!(cfg.scheduler.tau, 0.5);
        assert_eq!(cfg.scheduler.buffer_len, 6);
        assert_eq!(cfg.pruning.v_p_min, 0.5);
    }

    #[test]
    fn inverted_speed_window_is_rejected() {
        let err = RunConfig::parse("[scheduler]\nv_min = 0.6\n").unwrap_err();
        assert!(err.to_string().contains("v_min must be < v_max"), "{err}");
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = RunConfig::parse("[scheduler]\nvmin = 0.3\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("vmin"), "{err}");
    }

    #[test]
    fn unknown_section_is_rejected() {
        assert!(RunConfig::parse("[schedular]\nv_min = 0.3\n").is_err());
    }

    #[test]
    fn parse_error_reports_line() {
        let err = RunConfig::parse("[cost]\nc_tok = 0.5\nc_lwm = = 1\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn overrides_are_applied() {
        let cfg = RunConfig::parse(
            "[scheduler]\ntau = 0.7\n[cost]\nmode = \"quadratic\"\n[sim]\nepisodes = 3\nnoise = 0.01\n",
        )
        .unwrap();
        assert_eq!(cfg.scheduler.tau, 0.7);
        assert_eq!(cfg.cost.mode, TokenCostLaw::Quadratic);
        assert_eq!(cfg.sim.episodes, 3);
        assert_eq!(cfg.sim.noise, 0.01);
    }

    #[test]
    fn serialization_is_idempotent() {
        let text = "[scheduler]\ntau = 0.6\n[pruning]\nt_ks = 0.01\n[sim]\nout_dir = \"x\"\n";
        let once = RunConfig::parse(text).unwrap();
        let twice = RunConfig::parse(&once.to_toml()).unwrap();
        assert_eq!(once, twice);
        assert_eq!(once.to_toml(), twice.to_toml());
        let defaults = RunConfig::default();
        assert_eq!(RunConfig::parse(&defaults.to_toml()).unwrap(), defaults);
    }

    #[test]
    fn range_errors_name_the_key() {
        let cases = [
            ("[pruning]\nv_p_min = 2.0\n", "v_p_min"),
            ("[pruning]\ncanny_kernel_size = 4\n", "canny_kernel_size"),
            ("[scheduler]\nbuffer_len = 1\n", "buffer_len"),
            ("[sim]\nepisodes = 0\n", "episodes"),
            ("[pruning]\npatch_size = 15\n", "patch_size"),
            ("[sim]\nphase_durations = [1, 2]\n", "phase"),
        ];
        for (text, key) in cases {
            let err = RunConfig::parse(text).unwrap_err();
            assert!(err.to_string().contains(key), "{text}: {err}");
        }
    }
}
