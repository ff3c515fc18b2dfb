//! Monte Carlo codeword-error-rate sweeps over total transmit power, for
//! the synchronous relay chain and both OFDM modes, plus slope fitting on
//! the results.
//!
//! Every trial gets its own counter-derived RNG stream, so error counts are
//! independent of thread scheduling and a sweep can be split across runs
//! with `trial_offset` and merged by adding counts. Power is swept as total
//! network power P in dB against unit-variance noise.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::construct::{
    alamouti, construct_pciod, field_extension_code, regular_design, ConstructError,
};
use crate::algebra::Signature;
use crate::design::DesignError;
use crate::ofdm::{
    blocks_from_symbols, build_schedule, differential_decode, differential_encode,
    equivalent_channel, four_relay_differential_codebook, initial_reference,
    simulate_async_frame, subcarrier_noise_covariance, DifferentialCodebook, OfdmError,
    OfdmParams, OfdmSchedule,
};
use crate::precode::{
    rotated_qam, PrecodeError, SignalSet, StbcCodebook, PCIOD_ROTATION_DEG,
    REGULAR_DESIGN_ROTATION_DEG,
};
use crate::relay::{
    complex_symbols, ml_decode_full, ml_decode_full_with, ml_decode_groups,
    ml_decode_groups_with, simulate_two_phase, ChannelRealization, CVector, PowerSplit,
    RelayError, RelayNetworkConfig,
};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("config: {0}")]
    Config(String),
    #[error("config line {line}: {reason}")]
    ConfigLine { line: usize, reason: String },
    #[error("only {points} grid points have nonzero error counts inside the window, need 2")]
    InsufficientData { points: usize },
    #[error("results line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Precode(#[from] PrecodeError),
    #[error(transparent)]
    Relay(#[from] RelayError),
    #[error(transparent)]
    Ofdm(#[from] OfdmError),
}

/// Which transmission chain a sweep exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentMode {
    Sync,
    AsyncCoherent,
    AsyncDifferential,
}

impl fmt::Display for ExperimentMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentMode::Sync => "sync",
            ExperimentMode::AsyncCoherent => "async-coherent",
            ExperimentMode::AsyncDifferential => "async-differential",
        })
    }
}

impl FromStr for ExperimentMode {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, SweepError> {
        match s {
            "sync" => Ok(ExperimentMode::Sync),
            "async-coherent" => Ok(ExperimentMode::AsyncCoherent),
            "async-differential" => Ok(ExperimentMode::AsyncDifferential),
            other => Err(SweepError::Config(format!("unknown mode '{}'", other))),
        }
    }
}

/// Built-in design families the runner knows how to construct and pair with
/// signal sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DesignFamily {
    Alamouti,
    Pciod,
    Regular,
    FieldExtension,
}

impl fmt::Display for DesignFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DesignFamily::Alamouti => "alamouti",
            DesignFamily::Pciod => "pciod",
            DesignFamily::Regular => "regular",
            DesignFamily::FieldExtension => "field-extension",
        })
    }
}

impl FromStr for DesignFamily {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, SweepError> {
        match s {
            "alamouti" => Ok(DesignFamily::Alamouti),
            "pciod" => Ok(DesignFamily::Pciod),
            "regular" => Ok(DesignFamily::Regular),
            "field-extension" => Ok(DesignFamily::FieldExtension),
            other => Err(SweepError::Config(format!("unknown design '{}'", other))),
        }
    }
}

/// One experiment: a design, its signal sets, the transmission mode, and
/// the power grid to sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub mode: ExperimentMode,
    pub design: DesignFamily,
    pub relays: usize,
    /// Bits per channel use; fixes the per-group constellation size.
    pub bpcu: u32,
    /// Pairing rotation in degrees; `None` uses the family default.
    pub rotation_deg: Option<f64>,
    /// Subcarriers per OFDM symbol (asynchronous modes).
    pub n: usize,
    /// Cyclic prefix length (asynchronous modes).
    pub l_cp: usize,
    /// Relay delays are uniform integers in `[0, d_max]`.
    pub d_max: usize,
    /// Total-power grid in dB.
    pub p_db: Vec<f64>,
    /// Codeword trials per grid point. Asynchronous modes round up to whole
    /// frames of `n` codewords.
    pub trials: u64,
    /// Offset into the trial substream index space, for split runs.
    pub trial_offset: u64,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: ExperimentMode::Sync,
            design: DesignFamily::Pciod,
            relays: 4,
            bpcu: 1,
            rotation_deg: None,
            n: 64,
            l_cp: 16,
            d_max: 15,
            p_db: vec![10.0, 15.0, 20.0, 25.0],
            trials: 1000,
            trial_offset: 0,
            seed: 7,
        }
    }
}

impl ExperimentConfig {
    /// Parse the flat `key = value` config format. `#` starts a comment
    /// line; unknown keys are rejected.
    pub fn parse(text: &str) -> Result<Self, SweepError> {
        let mut cfg = ExperimentConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(SweepError::ConfigLine {
                    line: idx + 1,
                    reason: "expected 'key = value'".into(),
                });
            };
            cfg.set(key.trim(), value.trim()).map_err(|e| SweepError::ConfigLine {
                line: idx + 1,
                reason: e.to_string(),
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), SweepError> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T, SweepError> {
            value
                .parse()
                .map_err(|_| SweepError::Config(format!("bad value '{}' for {}", value, key)))
        }
        match key {
            "mode" => self.mode = value.parse()?,
            "design" => self.design = value.parse()?,
            "relays" => self.relays = num(key, value)?,
            "bpcu" => self.bpcu = num(key, value)?,
            "rotation_deg" => self.rotation_deg = Some(num(key, value)?),
            "n" => self.n = num(key, value)?,
            "l_cp" => self.l_cp = num(key, value)?,
            "d_max" => self.d_max = num(key, value)?,
            "p_db" => {
                let grid: Result<Vec<f64>, SweepError> = value
                    .split(',')
                    .map(|v| num("p_db", v.trim()))
                    .collect();
                self.p_db = grid?;
            }
            "trials" => self.trials = num(key, value)?,
            "trial_offset" => self.trial_offset = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            other => {
                return Err(SweepError::Config(format!("unknown key '{}'", other)));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.trials == 0 {
            return Err(SweepError::Config("trials must be at least 1".into()));
        }
        if self.p_db.is_empty() || self.p_db.iter().any(|p| !p.is_finite()) {
            return Err(SweepError::Config("p_db grid must be nonempty and finite".into()));
        }
        if !(1..=2).contains(&self.bpcu) {
            return Err(SweepError::Config("bpcu must be 1 or 2".into()));
        }
        if self.d_max > self.l_cp {
            return Err(SweepError::Config(format!(
                "d_max {} exceeds the cyclic prefix length {}",
                self.d_max, self.l_cp
            )));
        }
        check_relay_count(self.design, self.relays)?;
        if self.mode == ExperimentMode::AsyncDifferential
            && self.design != DesignFamily::Regular
        {
            return Err(SweepError::Config(
                "async-differential mode uses the four-relay 'regular' design".into(),
            ));
        }
        Ok(())
    }

    /// Rotation actually applied, after family defaults.
    pub fn resolved_rotation_deg(&self) -> f64 {
        self.rotation_deg
            .unwrap_or_else(|| default_rotation_deg(self.design))
    }

    /// Canonical `key = value` lines; the config hash and the CSV
    /// provenance header are built from these.
    pub fn canonical_lines(&self) -> Vec<String> {
        vec![
            format!("mode = {}", self.mode),
            format!("design = {}", self.design),
            format!("relays = {}", self.relays),
            format!("bpcu = {}", self.bpcu),
            format!("rotation_deg = {}", self.resolved_rotation_deg()),
            format!("n = {}", self.n),
            format!("l_cp = {}", self.l_cp),
            format!("d_max = {}", self.d_max),
            format!(
                "p_db = {}",
                self.p_db
                    .iter()
                    .map(|p| p.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            format!("trials = {}", self.trials),
            format!("trial_offset = {}", self.trial_offset),
            format!("seed = {}", self.seed),
        ]
    }

    pub fn hash(&self) -> u64 {
        fnv1a64(self.canonical_lines().join("\n").as_bytes())
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Default pairing rotation (degrees) for a family; families without paired
/// coordinates use the unrotated constellation.
pub fn default_rotation_deg(family: DesignFamily) -> f64 {
    match family {
        DesignFamily::Pciod => PCIOD_ROTATION_DEG,
        DesignFamily::Regular => REGULAR_DESIGN_ROTATION_DEG,
        DesignFamily::Alamouti | DesignFamily::FieldExtension => 0.0,
    }
}

/// Relay count a family uses when none is requested.
pub fn default_relays(family: DesignFamily) -> usize {
    match family {
        DesignFamily::Alamouti => 2,
        DesignFamily::Pciod | DesignFamily::Regular | DesignFamily::FieldExtension => 4,
    }
}

fn check_relay_count(family: DesignFamily, relays: usize) -> Result<(), SweepError> {
    let relays_ok = match family {
        DesignFamily::Alamouti => relays == 2,
        DesignFamily::Pciod => relays >= 2,
        DesignFamily::Regular | DesignFamily::FieldExtension => relays == 4,
    };
    if relays_ok {
        Ok(())
    } else {
        Err(SweepError::Config(format!(
            "design '{}' does not support {} relays",
            family, relays
        )))
    }
}

/// Construct the design of a family.
pub fn family_design(
    family: DesignFamily,
    relays: usize,
) -> Result<crate::design::LinearSpaceTimeDesign, SweepError> {
    check_relay_count(family, relays)?;
    Ok(match family {
        DesignFamily::Alamouti => alamouti(),
        DesignFamily::Pciod => construct_pciod(relays)?,
        DesignFamily::Regular => regular_design(Signature::new(2, 1))?,
        DesignFamily::FieldExtension => field_extension_code(),
    })
}

fn antipodal_pair_set(angle: f64, label: String) -> Result<SignalSet, SweepError> {
    let (s, c) = angle.sin_cos();
    Ok(SignalSet::new(2, vec![vec![c, s], vec![-c, -s]], label)?)
}

fn pam_set(values: &[f64], label: String) -> Result<SignalSet, SweepError> {
    Ok(SignalSet::new(
        1,
        values.iter().map(|&v| vec![v]).collect(),
        label,
    )?)
}

fn per_symbol_points(bpcu: u32) -> Vec<Vec<f64>> {
    if bpcu == 1 {
        vec![vec![1.0, 0.0], vec![-1.0, 0.0]]
    } else {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        vec![vec![s, s], vec![s, -s], vec![-s, s], vec![-s, -s]]
    }
}

/// The codebook a sweep uses for a family at a given rate: paired rotated
/// sets for the block and regular designs, per-symbol constellations for
/// the orthogonal and circulant baselines. All sets carry unit average
/// energy per complex symbol.
pub fn standard_codebook(
    family: DesignFamily,
    relays: usize,
    bpcu: u32,
    rotation_deg: Option<f64>,
) -> Result<StbcCodebook, SweepError> {
    let design = family_design(family, relays)?;
    let deg = rotation_deg.unwrap_or_else(|| default_rotation_deg(family));
    let angle = deg.to_radians();
    let sets: Vec<SignalSet> = match family {
        DesignFamily::Pciod | DesignFamily::Regular => {
            let set = if bpcu == 1 {
                antipodal_pair_set(angle, format!("antipodal-{}deg", deg))?
            } else {
                rotated_qam(2, angle).normalized_to_energy(1.0)
            };
            design.partition().iter().map(|_| set.clone()).collect()
        }
        DesignFamily::Alamouti => {
            if bpcu == 1 {
                // In-phase halves carry one bit each; quadratures idle.
                let active = pam_set(&[1.0, -1.0], "bpsk".into())?;
                let idle = pam_set(&[0.0], "idle".into())?;
                vec![active.clone(), idle.clone(), active, idle]
            } else {
                let v = std::f64::consts::FRAC_1_SQRT_2;
                let half = pam_set(&[v, -v], "qpsk-half".into())?;
                vec![half.clone(), half.clone(), half.clone(), half]
            }
        }
        DesignFamily::FieldExtension => {
            let per = per_symbol_points(bpcu);
            let mut points: Vec<Vec<f64>> = vec![Vec::new()];
            for _ in 0..4 {
                points = points
                    .iter()
                    .flat_map(|prefix| {
                        per.iter().map(move |p| {
                            let mut next = prefix.clone();
                            next.extend_from_slice(p);
                            next
                        })
                    })
                    .collect();
            }
            vec![SignalSet::new(
                8,
                points,
                format!("qam-product-{}bpcu", bpcu),
            )?]
        }
    };
    Ok(StbcCodebook::new(design, sets)?)
}

/// One grid point's outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub p_db: f64,
    pub trials: u64,
    pub errors: u64,
    pub cer: f64,
    /// Not part of the CSV schema; kept for reporting.
    pub wall_seconds: f64,
}

fn substream(seed: u64, point: u32, unit: u64) -> ChaCha8Rng {
    let mut s = [0u8; 32];
    s[..8].copy_from_slice(&seed.to_le_bytes());
    s[8..12].copy_from_slice(&point.to_le_bytes());
    s[12..20].copy_from_slice(&unit.to_le_bytes());
    s[20..].copy_from_slice(b"dstbc-sweep!");
    ChaCha8Rng::from_seed(s)
}

enum Engine {
    Sync {
        codebook: StbcCodebook,
    },
    Coherent {
        codebook: StbcCodebook,
        schedule: OfdmSchedule,
        params: OfdmParams,
    },
    Differential {
        codebook: DifferentialCodebook,
        schedule: OfdmSchedule,
        params: OfdmParams,
    },
}

impl Engine {
    fn build(cfg: &ExperimentConfig) -> Result<Self, SweepError> {
        match cfg.mode {
            ExperimentMode::Sync => Ok(Engine::Sync {
                codebook: standard_codebook(cfg.design, cfg.relays, cfg.bpcu, cfg.rotation_deg)?,
            }),
            ExperimentMode::AsyncCoherent => {
                let codebook =
                    standard_codebook(cfg.design, cfg.relays, cfg.bpcu, cfg.rotation_deg)?;
                let schedule = build_schedule(codebook.design())?;
                let params = OfdmParams::new(cfg.n, cfg.l_cp)?;
                Ok(Engine::Coherent {
                    codebook,
                    schedule,
                    params,
                })
            }
            ExperimentMode::AsyncDifferential => {
                let design = family_design(cfg.design, cfg.relays)?;
                let schedule = build_schedule(&design)?;
                let params = OfdmParams::new(cfg.n, cfg.l_cp)?;
                Ok(Engine::Differential {
                    codebook: four_relay_differential_codebook(),
                    schedule,
                    params,
                })
            }
        }
    }

    /// Codeword decisions produced by one trial unit.
    fn codewords_per_unit(&self, cfg: &ExperimentConfig) -> u64 {
        match self {
            Engine::Sync { .. } => 1,
            Engine::Coherent { .. } | Engine::Differential { .. } => cfg.n as u64,
        }
    }

    fn point_errors(
        &self,
        cfg: &ExperimentConfig,
        point: u32,
        p: f64,
    ) -> Result<(u64, u64), SweepError> {
        let per_unit = self.codewords_per_unit(cfg);
        let units = cfg.trials.div_ceil(per_unit);
        let range = cfg.trial_offset..cfg.trial_offset + units;
        let errors = match self {
            Engine::Sync { codebook } => {
                let netcfg = RelayNetworkConfig::from_design(codebook.design(), p)?;
                range
                    .into_par_iter()
                    .map(|unit| sync_unit(codebook, &netcfg, cfg.seed, point, unit))
                    .try_reduce(|| 0, |a, b| Ok(a + b))?
            }
            Engine::Coherent {
                codebook,
                schedule,
                params,
            } => {
                let power = PowerSplit::balanced(schedule.relay_count(), p);
                range
                    .into_par_iter()
                    .map(|unit| {
                        coherent_unit(codebook, schedule, params, &power, cfg, point, unit)
                    })
                    .try_reduce(|| 0, |a, b| Ok(a + b))?
            }
            Engine::Differential {
                codebook,
                schedule,
                params,
            } => {
                let power = PowerSplit::balanced(schedule.relay_count(), p);
                range
                    .into_par_iter()
                    .map(|unit| {
                        differential_unit(codebook, schedule, params, &power, cfg, point, unit)
                    })
                    .try_reduce(|| 0, |a, b| Ok(a + b))?
            }
        };
        Ok((units * per_unit, errors))
    }
}

fn sync_unit(
    codebook: &StbcCodebook,
    netcfg: &RelayNetworkConfig,
    seed: u64,
    point: u32,
    unit: u64,
) -> Result<u64, SweepError> {
    let mut rng = substream(seed, point, unit);
    let channel = ChannelRealization::sample(netcfg.relay_count(), &mut rng);
    let index = rng.random_range(0..codebook.codeword_count());
    let z = complex_symbols(&codebook.symbol_vector(index));
    let y = simulate_two_phase(netcfg, &z, &channel, &mut rng)?;
    let decoded = match ml_decode_groups(&y, codebook, &channel, netcfg) {
        Ok(choices) => codebook.index_of_choices(&choices),
        Err(RelayError::ConditionViolated { .. }) => {
            ml_decode_full(&y, codebook, &channel, netcfg)?
        }
        Err(e) => return Err(e.into()),
    };
    Ok(u64::from(decoded != index))
}

fn coherent_unit(
    codebook: &StbcCodebook,
    schedule: &OfdmSchedule,
    params: &OfdmParams,
    power: &PowerSplit,
    cfg: &ExperimentConfig,
    point: u32,
    unit: u64,
) -> Result<u64, SweepError> {
    let mut rng = substream(cfg.seed, point, unit);
    let r = schedule.relay_count();
    let channel = ChannelRealization::sample(r, &mut rng);
    let delays: Vec<usize> = (0..r).map(|_| rng.random_range(0..=cfg.d_max)).collect();
    let indices: Vec<usize> = (0..params.n)
        .map(|_| rng.random_range(0..codebook.codeword_count()))
        .collect();
    let symbols: Vec<CVector> = indices
        .iter()
        .map(|&i| complex_symbols(&codebook.symbol_vector(i)))
        .collect();
    let blocks = blocks_from_symbols(&symbols);
    let y = simulate_async_frame(
        schedule,
        params,
        power,
        &channel,
        &delays,
        &blocks,
        Some(&mut rng),
    )?;
    let omega = subcarrier_noise_covariance(schedule, power, &channel);
    let scale = power.closed_form_factor();
    let mut errors = 0u64;
    for k in 0..params.n {
        let h = equivalent_channel(params, k, &channel, &delays, schedule.relay_conjugated())?;
        let decoded = match ml_decode_groups_with(&y[k], codebook, &h, &omega, scale) {
            Ok(choices) => codebook.index_of_choices(&choices),
            Err(RelayError::ConditionViolated { .. }) => {
                ml_decode_full_with(&y[k], codebook, &h, &omega, scale)?
            }
            Err(e) => return Err(e.into()),
        };
        errors += u64::from(decoded != indices[k]);
    }
    Ok(errors)
}

fn differential_unit(
    codebook: &DifferentialCodebook,
    schedule: &OfdmSchedule,
    params: &OfdmParams,
    power: &PowerSplit,
    cfg: &ExperimentConfig,
    point: u32,
    unit: u64,
) -> Result<u64, SweepError> {
    let mut rng = substream(cfg.seed, point, unit);
    let r = schedule.relay_count();
    let channel = ChannelRealization::sample(r, &mut rng);
    let delays: Vec<usize> = (0..r).map(|_| rng.random_range(0..=cfg.d_max)).collect();
    let indices: Vec<usize> = (0..params.n)
        .map(|_| rng.random_range(0..codebook.len()))
        .collect();
    let reference: Vec<CVector> = (0..params.n).map(|_| initial_reference(r)).collect();
    let data: Vec<CVector> = indices
        .iter()
        .zip(&reference)
        .map(|(&i, a0)| differential_encode(codebook.codeword(i), a0, 1.0).map(|(a, _)| a))
        .collect::<Result<_, _>>()?;
    let y0 = simulate_async_frame(
        schedule,
        params,
        power,
        &channel,
        &delays,
        &blocks_from_symbols(&reference),
        Some(&mut rng),
    )?;
    let y1 = simulate_async_frame(
        schedule,
        params,
        power,
        &channel,
        &delays,
        &blocks_from_symbols(&data),
        Some(&mut rng),
    )?;
    let mut errors = 0u64;
    for k in 0..params.n {
        let decoded = differential_decode(&y1[k], &y0[k], 1.0, codebook);
        errors += u64::from(decoded != indices[k]);
    }
    Ok(errors)
}

/// Run the configured sweep over the whole power grid. Deterministic for a
/// given config, including under parallel execution.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, SweepError> {
    cfg.validate()?;
    let engine = Engine::build(cfg)?;
    let mut rows = Vec::with_capacity(cfg.p_db.len());
    for (point, &p_db) in cfg.p_db.iter().enumerate() {
        let start = Instant::now();
        let p = 10f64.powf(p_db / 10.0);
        let (trials, errors) = engine.point_errors(cfg, point as u32, p)?;
        rows.push(ResultRow {
            p_db,
            trials,
            errors,
            cer: errors as f64 / trials as f64,
            wall_seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(rows)
}

/// Least-squares slope of `log10(CER)` against `P_dB / 10` over grid points
/// whose CER lies inside `window` (inclusive) with at least one error.
pub fn estimate_diversity_slope(
    rows: &[ResultRow],
    window: (f64, f64),
) -> Result<f64, SweepError> {
    let (lo, hi) = window;
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.errors > 0 && r.cer >= lo && r.cer <= hi)
        .map(|r| (r.p_db / 10.0, r.cer.log10()))
        .collect();
    if pts.len() < 2 {
        return Err(SweepError::InsufficientData { points: pts.len() });
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return Err(SweepError::Config(
            "slope fit needs at least two distinct power levels".into(),
        ));
    }
    Ok((n * sxy - sx * sy) / denom)
}

/// Power level (dB) at which the fitted curve crosses `target` CER:
/// log-linear interpolation between the bracketing grid points. Rows must
/// be sorted by increasing power.
pub fn db_at_target_cer(rows: &[ResultRow], target: f64) -> Option<f64> {
    for pair in rows.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.cer <= 0.0 || b.cer <= 0.0 {
            continue;
        }
        if (a.cer - target) * (b.cer - target) <= 0.0 {
            let la = a.cer.log10();
            let lb = b.cer.log10();
            let lt = target.log10();
            if (la - lb).abs() < 1e-15 {
                return Some(a.p_db);
            }
            return Some(a.p_db + (lt - la) / (lb - la) * (b.p_db - a.p_db));
        }
    }
    None
}

/// Serialize rows as `P_dB,trials,errors,cer` CSV with a `#` provenance
/// header. Byte-identical for identical config and results.
pub fn write_csv(cfg: &ExperimentConfig, rows: &[ResultRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# dstbc sweep v{}\n# config_hash = {:016x}\n",
        env!("CARGO_PKG_VERSION"),
        cfg.hash(),
    ));
    for line in cfg.canonical_lines() {
        out.push_str(&format!("# {}\n", line));
    }
    out.push_str("P_dB,trials,errors,cer\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:.6e}\n",
            r.p_db, r.trials, r.errors, r.cer
        ));
    }
    out
}

/// Parse rows back out of the CSV format; comments and the header line are
/// skipped, wall time is not stored in the file.
pub fn parse_result_rows(text: &str) -> Result<Vec<ResultRow>, SweepError> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("P_dB") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(SweepError::Csv {
                line: idx + 1,
                reason: format!("expected 4 fields, found {}", fields.len()),
            });
        }
        let parse_err = |what: &str| SweepError::Csv {
            line: idx + 1,
            reason: format!("bad {}", what),
        };
        rows.push(ResultRow {
            p_db: fields[0].parse().map_err(|_| parse_err("P_dB"))?,
            trials: fields[1].parse().map_err(|_| parse_err("trials"))?,
            errors: fields[2].parse().map_err(|_| parse_err("errors"))?,
            cer: fields[3].parse().map_err(|_| parse_err("cer"))?,
            wall_seconds: 0.0,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precode::{check_full_diversity, coding_gain};

    fn quick_config() -> ExperimentConfig {
        ExperimentConfig {
            p_db: vec![6.0, 10.0],
            trials: 150,
            seed: 11,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn mode_and_family_names_round_trip() {
        for mode in [
            ExperimentMode::Sync,
            ExperimentMode::AsyncCoherent,
            ExperimentMode::AsyncDifferential,
        ] {
            assert_eq!(mode.to_string().parse::<ExperimentMode>().unwrap(), mode);
        }
        for family in [
            DesignFamily::Alamouti,
            DesignFamily::Pciod,
            DesignFamily::Regular,
            DesignFamily::FieldExtension,
        ] {
            assert_eq!(family.to_string().parse::<DesignFamily>().unwrap(), family);
        }
        assert!("warp".parse::<ExperimentMode>().is_err());
    }

    #[test]
    fn config_text_parses_with_comments_and_overrides() {
        let text = "\
# example sweep
mode = async-coherent
design = regular
relays = 4
bpcu = 2
n = 32
l_cp = 8
d_max = 5
p_db = 10, 12.5, 15
trials = 500
seed = 99
";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.mode, ExperimentMode::AsyncCoherent);
        assert_eq!(cfg.design, DesignFamily::Regular);
        assert_eq!(cfg.p_db, vec![10.0, 12.5, 15.0]);
        assert_eq!(cfg.trials, 500);
        assert_eq!(cfg.seed, 99);
        assert_eq!(cfg.resolved_rotation_deg(), 166.71);

        assert!(ExperimentConfig::parse("frobnicate = 3\n").is_err());
        assert!(ExperimentConfig::parse("trials = zero\n").is_err());
        assert!(ExperimentConfig::parse("d_max = 20\nl_cp = 4\n").is_err());
        assert!(ExperimentConfig::parse("trials = 0\n").is_err());
        assert!(ExperimentConfig::parse("design = alamouti\n").is_err());
        assert!(ExperimentConfig::parse("design = alamouti\nrelays = 2\n").is_ok());
    }

    #[test]
    fn config_hash_tracks_content() {
        let a = ExperimentConfig::default();
        let mut b = ExperimentConfig::default();
        assert_eq!(a.hash(), b.hash());
        b.seed += 1;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn synthetic_power_law_gives_its_exponent() {
        let rows: Vec<ResultRow> = (0..5)
            .map(|i| {
                let p_db = 10.0 + 5.0 * i as f64;
                let p = 10f64.powf(p_db / 10.0);
                let cer = 0.3 * p.powi(-4);
                ResultRow {
                    p_db,
                    trials: 1_000_000_000,
                    errors: 1,
                    cer,
                    wall_seconds: 0.0,
                }
            })
            .collect();
        let slope = estimate_diversity_slope(&rows, (0.0, 1.0)).unwrap();
        assert!((slope - (-4.0)).abs() < 1e-9, "slope {}", slope);
    }

    #[test]
    fn rayleigh_error_decay_has_unit_slope() {
        // Closed-form BPSK error probability over one Rayleigh branch at
        // SNR P decays as 1/(4P): slope -1 on the log-log axes.
        let rows: Vec<ResultRow> = [30.0f64, 35.0, 40.0, 45.0, 50.0]
            .iter()
            .map(|&p_db| {
                let p = 10f64.powf(p_db / 10.0);
                let cer = 0.5 * (1.0 - (p / (1.0 + p)).sqrt());
                ResultRow {
                    p_db,
                    trials: 1,
                    errors: 1,
                    cer,
                    wall_seconds: 0.0,
                }
            })
            .collect();
        let slope = estimate_diversity_slope(&rows, (0.0, 1.0)).unwrap();
        assert!((slope + 1.0).abs() < 0.05, "slope {}", slope);
    }

    #[test]
    fn slope_needs_two_usable_points() {
        let row = ResultRow {
            p_db: 10.0,
            trials: 100,
            errors: 5,
            cer: 0.05,
            wall_seconds: 0.0,
        };
        assert!(matches!(
            estimate_diversity_slope(&[row.clone()], (0.0, 1.0)),
            Err(SweepError::InsufficientData { points: 1 })
        ));
        let mut quiet = row.clone();
        quiet.errors = 0;
        quiet.cer = 0.0;
        assert!(matches!(
            estimate_diversity_slope(&[row, quiet], (0.0, 1.0)),
            Err(SweepError::InsufficientData { points: 1 })
        ));
    }

    #[test]
    fn target_cer_crossing_is_interpolated() {
        let mk = |p_db: f64, cer: f64| ResultRow {
            p_db,
            trials: 1000,
            errors: (cer * 1000.0) as u64,
            cer,
            wall_seconds: 0.0,
        };
        let rows = vec![mk(10.0, 1e-1), mk(20.0, 1e-3)];
        // log10 cer falls linearly from -1 to -3; 1e-2 sits halfway.
        let db = db_at_target_cer(&rows, 1e-2).unwrap();
        assert!((db - 15.0).abs() < 1e-12);
        assert!(db_at_target_cer(&rows, 1e-5).is_none());
    }

    #[test]
    fn sweeps_are_bit_reproducible() {
        let cfg = quick_config();
        let a = run_sweep(&cfg).unwrap();
        let b = run_sweep(&cfg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((x.p_db, x.trials, x.errors), (y.p_db, y.trials, y.errors));
        }
        assert_eq!(write_csv(&cfg, &a), write_csv(&cfg, &b));
    }

    #[test]
    fn split_runs_merge_to_the_full_count() {
        let mut full = quick_config();
        full.trials = 120;
        let mut first = full.clone();
        first.trials = 70;
        let mut second = full.clone();
        second.trials = 50;
        second.trial_offset = 70;
        let whole = run_sweep(&full).unwrap();
        let a = run_sweep(&first).unwrap();
        let b = run_sweep(&second).unwrap();
        for i in 0..whole.len() {
            assert_eq!(whole[i].errors, a[i].errors + b[i].errors);
            assert_eq!(whole[i].trials, a[i].trials + b[i].trials);
        }
    }

    #[test]
    fn high_power_sync_runs_are_error_free() {
        let mut cfg = quick_config();
        cfg.p_db = vec![40.0];
        cfg.trials = 200;
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(rows[0].errors, 0);
        assert_eq!(rows[0].cer, 0.0);
    }

    #[test]
    fn joint_decoding_baseline_runs() {
        let mut cfg = quick_config();
        cfg.design = DesignFamily::FieldExtension;
        cfg.p_db = vec![35.0];
        cfg.trials = 100;
        let rows = run_sweep(&cfg).unwrap();
        assert!(rows[0].cer < 0.2, "cer {}", rows[0].cer);
    }

    #[test]
    fn async_sweep_counts_subcarrier_codewords() {
        let mut cfg = quick_config();
        cfg.mode = ExperimentMode::AsyncCoherent;
        cfg.design = DesignFamily::Regular;
        cfg.bpcu = 2;
        cfg.n = 8;
        cfg.l_cp = 3;
        cfg.d_max = 3;
        cfg.trials = 12;
        cfg.p_db = vec![30.0];
        let rows = run_sweep(&cfg).unwrap();
        // 12 requested trials round up to two 8-subcarrier frames.
        assert_eq!(rows[0].trials, 16);
        assert!(rows[0].errors <= 16);
        let again = run_sweep(&cfg).unwrap();
        assert_eq!(rows[0].errors, again[0].errors);
    }

    #[test]
    fn differential_sweep_runs_a_chain_per_unit() {
        let mut cfg = quick_config();
        cfg.mode = ExperimentMode::AsyncDifferential;
        cfg.design = DesignFamily::Regular;
        cfg.n = 8;
        cfg.l_cp = 3;
        cfg.d_max = 3;
        cfg.trials = 8;
        cfg.p_db = vec![35.0];
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(rows[0].trials, 8);
        assert!(rows[0].cer < 0.5, "cer {}", rows[0].cer);
    }

    #[test]
    fn complex_gain_designs_cannot_go_async() {
        let mut cfg = quick_config();
        cfg.mode = ExperimentMode::AsyncCoherent;
        cfg.design = DesignFamily::FieldExtension;
        assert!(matches!(
            run_sweep(&cfg),
            Err(SweepError::Ofdm(OfdmError::NonRealGain { .. }))
        ));
    }

    #[test]
    fn standard_codebooks_have_expected_sizes() {
        let cases = [
            (DesignFamily::Pciod, 4, 1, 16),
            (DesignFamily::Pciod, 4, 2, 256),
            (DesignFamily::Regular, 4, 1, 16),
            (DesignFamily::Alamouti, 2, 1, 4),
            (DesignFamily::Alamouti, 2, 2, 16),
            (DesignFamily::FieldExtension, 4, 1, 16),
            (DesignFamily::FieldExtension, 4, 2, 256),
        ];
        for (family, relays, bpcu, count) in cases {
            let cb = standard_codebook(family, relays, bpcu, None).unwrap();
            assert_eq!(cb.codeword_count(), count, "{} at {} bpcu", family, bpcu);
        }
    }

    #[test]
    fn rate_one_bit_codebooks_keep_full_diversity() {
        for family in [DesignFamily::Pciod, DesignFamily::Regular] {
            let relays = 4;
            let cb = standard_codebook(family, relays, 1, None).unwrap();
            assert!(check_full_diversity(&cb, 1_000_000), "{}", family);
            assert!(coding_gain(&cb, 1_000_000).value > 1e-6);
        }
    }

    #[test]
    fn csv_round_trips_through_the_parser() {
        let cfg = quick_config();
        let rows = vec![
            ResultRow {
                p_db: 12.5,
                trials: 1000,
                errors: 31,
                cer: 0.031,
                wall_seconds: 1.25,
            },
            ResultRow {
                p_db: 20.0,
                trials: 1000,
                errors: 0,
                cer: 0.0,
                wall_seconds: 0.75,
            },
        ];
        let csv = write_csv(&cfg, &rows);
        assert!(csv.starts_with("# dstbc sweep v"));
        assert!(csv.contains(&format!("# seed = {}\n", cfg.seed)));
        assert!(csv.contains("# config_hash = "));
        assert!(csv.contains("P_dB,trials,errors,cer\n"));
        let back = parse_result_rows(&csv).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].p_db, 12.5);
        assert_eq!(back[0].trials, 1000);
        assert_eq!(back[0].errors, 31);
        assert!((back[0].cer - 0.031).abs() < 1e-9);
        assert_eq!(back[1].errors, 0);

        assert!(parse_result_rows("1,2,3\n").is_err());
        assert!(parse_result_rows("a,b,c,d\n").is_err());
    }
}
