//! Resource-budget arithmetic for a channelized DSP pipeline: per-unit
//! deadlines, operation counts, FFT timing from a 1K benchmark, processor
//! and board counts, and acquisition/buffer memory.
//!
//! Memory uses binary units: 1 KiB = 8192 bits, 1 MiB = 1024 KiB.

use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const BITS_PER_KIB: u64 = 8 * 1024;
pub const BITS_PER_MIB: u64 = BITS_PER_KIB * 1024;

/// Reference FFT size of the benchmark entry.
const BENCH_FFT_POINTS: u64 = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BudgetError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("arithmetic overflow computing {0}")]
    Overflow(String),
    #[error("stage '{stage}' ({kind}) is missing required parameter '{param}'")]
    MissingParam {
        stage: String,
        kind: String,
        param: &'static str,
    },
    #[error("pipeline has no stages")]
    EmptyPipeline,
}

type Result<T> = std::result::Result<T, BudgetError>;

fn lift<F: Float>(x: f64) -> F {
    F::from(x).expect("f64 converts to float type")
}

fn count<F: Float>(n: u64) -> F {
    F::from(n).expect("count converts to float type")
}

fn positive<F: Float>(name: &str, x: F) -> Result<()> {
    if x > F::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(BudgetError::InvalidArgument(format!(
            "{name} must be positive, got {}",
            x.to_f64().unwrap_or(f64::NAN)
        )))
    }
}

fn at_least_one(name: &str, n: u64) -> Result<()> {
    if n >= 1 {
        Ok(())
    } else {
        Err(BudgetError::InvalidArgument(format!(
            "{name} must be at least 1"
        )))
    }
}

fn product(what: &str, factors: &[u64]) -> Result<u64> {
    factors.iter().try_fold(1u64, |acc, f| {
        acc.checked_mul(*f)
            .ok_or_else(|| BudgetError::Overflow(what.to_string()))
    })
}

/// Ceiling that ignores rounding noise just above an integer.
fn ceil_count<F: Float>(x: F) -> u64 {
    let slack = F::epsilon() * lift(16.0);
    let c = (x - x * slack).ceil();
    c.to_u64().unwrap_or(u64::MAX)
}

pub fn per_unit_deadline<F: Float>(total_deadline: F, units: u64) -> Result<F> {
    at_least_one("units", units)?;
    Ok(total_deadline / count(units))
}

/// `points × channels × refs` multiply-accumulates for replica correlation.
pub fn correlation_op_count(points: u64, channels: u64, refs: u64) -> Result<u64> {
    at_least_one("points", points)?;
    at_least_one("channels", channels)?;
    at_least_one("refs", refs)?;
    product("correlation op count", &[points, channels, refs])
}

/// `window_cells × channels × refs` operations for cell-averaging CFAR.
pub fn cfar_op_count(window_cells: u64, channels: u64, refs: u64) -> Result<u64> {
    at_least_one("window_cells", window_cells)?;
    at_least_one("channels", channels)?;
    at_least_one("refs", refs)?;
    product("CFAR op count", &[window_cells, channels, refs])
}

pub fn time_per_op<F: Float>(deadline: F, ops: u64) -> Result<F> {
    at_least_one("ops", ops)?;
    Ok(deadline / count(ops))
}

/// FFT time for `n` points scaled from the 1K benchmark by `n·log2 n`.
pub fn fft_time_scaled<F: Float>(bench: &ProcessorBenchmark<F>, n: u64) -> Result<F> {
    if n < 2 || !n.is_power_of_two() {
        return Err(BudgetError::InvalidArgument(format!(
            "FFT size {n} is not a power of two >= 2"
        )));
    }
    positive("fft_1k_complex_time", bench.fft_1k_complex_time)?;
    let work = |k: u64| count::<F>(k) * count::<F>(k.trailing_zeros() as u64);
    Ok(bench.fft_1k_complex_time * work(n) / work(BENCH_FFT_POINTS))
}

pub fn required_processors<F: Float>(stage_time_per_unit: F, deadline_per_unit: F) -> Result<u64> {
    positive("stage time", stage_time_per_unit)?;
    positive("deadline", deadline_per_unit)?;
    Ok(ceil_count(stage_time_per_unit / deadline_per_unit))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BufferSize {
    pub samples_per_interval: u64,
    pub bits: u64,
}

/// Samples arriving per channel in `interval` (rounded down) times word
/// size and channel count.
pub fn buffer_bits<F: Float>(
    sample_rate: F,
    interval: F,
    word_bits: u64,
    channels: u64,
) -> Result<BufferSize> {
    positive("sample_rate", sample_rate)?;
    positive("interval", interval)?;
    at_least_one("word_bits", word_bits)?;
    at_least_one("channels", channels)?;
    let samples = (sample_rate * interval * (F::one() + F::epsilon() * lift(16.0)))
        .floor()
        .to_u64()
        .ok_or_else(|| BudgetError::Overflow("samples per interval".into()))?;
    Ok(BufferSize {
        samples_per_interval: samples,
        bits: product("buffer bits", &[samples, word_bits, channels])?,
    })
}

pub fn acquisition_memory_bits(n_points: u64, channels: u64, word_bits: u64) -> Result<u64> {
    at_least_one("n_points", n_points)?;
    at_least_one("channels", channels)?;
    at_least_one("word_bits", word_bits)?;
    product("acquisition bits", &[n_points, channels, word_bits])
}

/// Two-way travel time across one range cell.
pub fn range_resolution_to_deadline<F: Float>(resolution_m: F, sound_speed_mps: F) -> Result<F> {
    positive("resolution", resolution_m)?;
    positive("sound speed", sound_speed_mps)?;
    Ok((resolution_m + resolution_m) / sound_speed_mps)
}

/// Number of Doppler replicas covering `span_hz` at `step_hz` spacing.
pub fn doppler_reference_count<F: Float>(span_hz: F, step_hz: F) -> Result<u64> {
    positive("span", span_hz)?;
    positive("step", step_hz)?;
    if span_hz < step_hz {
        return Err(BudgetError::InvalidArgument(
            "Doppler span must be at least one step".into(),
        ));
    }
    Ok(ceil_count(span_hz / step_hz))
}

pub fn board_count(processors: u64, cores_per_board: u64) -> Result<u64> {
    at_least_one("processors", processors)?;
    at_least_one("cores_per_board", cores_per_board)?;
    Ok(processors.div_ceil(cores_per_board))
}

pub fn bits_to_kib<F: Float>(bits: u64) -> F {
    count::<F>(bits) / count(BITS_PER_KIB)
}

pub fn bits_to_mib<F: Float>(bits: u64) -> F {
    count::<F>(bits) / count(BITS_PER_MIB)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessorBenchmark<F> {
    pub name: String,
    /// Seconds for one 1024-point complex radix-2 FFT.
    pub fft_1k_complex_time: F,
    /// Seconds per complex FIR tap; used as the generic per-operation time.
    pub fir_per_tap_time: F,
    /// Bytes per second per I/O port.
    pub io_rate: F,
    pub cores_per_board: u64,
}

impl<F: Float> ProcessorBenchmark<F> {
    /// 16-bit fixed-point TigerSHARC figures on a dual-DSP board.
    pub fn tiger_sharc() -> Self {
        Self {
            name: "ADSP-TS201 (16-bit fixed)".into(),
            fft_1k_complex_time: lift(16e-6),
            fir_per_tap_time: lift(0.83e-9),
            io_rate: lift(1e9),
            cores_per_board: 2,
        }
    }

    pub fn check(&self) -> Result<()> {
        positive("fft_1k_complex_time", self.fft_1k_complex_time)?;
        positive("fir_per_tap_time", self.fir_per_tap_time)?;
        positive("io_rate", self.io_rate)?;
        at_least_one("cores_per_board", self.cores_per_board)
    }
}

fn default_sound_speed<F: Float>() -> F {
    lift(1500.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "F: Float + Deserialize<'de>"))]
pub struct SignalContext<F> {
    pub sample_rate: F,
    #[serde(default = "default_sound_speed")]
    pub sound_speed: F,
    pub pri: F,
    pub beams: u64,
}

impl<F: Float> SignalContext<F> {
    pub fn check(&self) -> Result<()> {
        positive("sample_rate", self.sample_rate)?;
        positive("sound_speed", self.sound_speed)?;
        positive("pri", self.pri)?;
        at_least_one("beams", self.beams)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageKind {
    Fft,
    Correlation,
    Cfar,
    Pdp,
    Custom,
}

impl StageKind {
    pub fn name(self) -> &'static str {
        match self {
            StageKind::Fft => "fft",
            StageKind::Correlation => "correlation",
            StageKind::Cfar => "cfar",
            StageKind::Pdp => "pdp",
            StageKind::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_points: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refs: Option<u64>,
    /// Correlation through an FFT/IFFT pair of this size instead of direct MACs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fft_points: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_cells: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_targets: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ops_per_target: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub op_count: Option<u64>,
}

fn default_word_bits() -> u64 {
    16
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineStage<F> {
    pub name: String,
    pub kind: StageKind,
    #[serde(default)]
    pub params: StageParams,
    /// Defaults to the context's beam count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channels: Option<u64>,
    /// Seconds available for the whole stage across all channels.
    pub deadline: F,
    #[serde(default = "default_word_bits")]
    pub word_bits: u64,
    /// Processors that may be assigned; unlimited when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_processors: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "F: Float + Deserialize<'de>"))]
pub struct Pipeline<F> {
    pub context: SignalContext<F>,
    pub stages: Vec<PipelineStage<F>>,
}

impl<F: Float> Pipeline<F> {
    /// Acquisition → 4K FFT → CA-CFAR(200 cells, 32 refs) → PDP(10 targets),
    /// every stage at a 3 ms deadline.
    pub fn mds(channels: u64) -> Self {
        let stage = |name: &str, kind, params| PipelineStage {
            name: name.into(),
            kind,
            params,
            channels: None,
            deadline: lift(3e-3),
            word_bits: 16,
            max_processors: None,
        };
        Self {
            context: SignalContext {
                sample_rate: lift(16_000.0),
                sound_speed: lift(1500.0),
                pri: lift(4.0),
                beams: channels,
            },
            stages: vec![
                stage(
                    "fft",
                    StageKind::Fft,
                    StageParams {
                        n_points: Some(4096),
                        ..StageParams::default()
                    },
                ),
                stage(
                    "cfar",
                    StageKind::Cfar,
                    StageParams {
                        window_cells: Some(200),
                        refs: Some(32),
                        ..StageParams::default()
                    },
                ),
                stage(
                    "pdp",
                    StageKind::Pdp,
                    StageParams {
                        max_targets: Some(10),
                        ..StageParams::default()
                    },
                ),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageBudget<F> {
    pub name: String,
    pub kind: StageKind,
    pub channels: u64,
    /// Units the deadline is shared across: channels, or targets for PDP,
    /// or 1 for custom stages.
    pub units: u64,
    pub op_count: u64,
    pub per_unit_deadline: F,
    pub time_per_op: F,
    /// Single-processor time for one unit.
    pub scaled_stage_time: F,
    pub required_processors: u64,
    pub allocated_processors: u64,
    pub feasible: bool,
    pub acquisition_bits: u64,
    pub buffer_samples: u64,
    pub buffer_bits: u64,
    /// Input bytes per second this stage pulls from acquisition.
    pub input_rate: F,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport<F> {
    pub benchmark: String,
    pub stages: Vec<StageBudget<F>>,
    pub total_processors: u64,
    pub boards: u64,
    pub acquisition_memory_bits: u64,
    pub buffer_bits: u64,
    pub aggregate_input_rate: F,
    /// Aggregate input rate over the benchmark's per-port I/O rate.
    pub io_utilization: F,
    pub feasible: bool,
}

impl<F: Float> BudgetReport<F> {
    pub fn infeasible_stages(&self) -> impl Iterator<Item = &StageBudget<F>> {
        self.stages.iter().filter(|s| !s.feasible)
    }
}

fn need(stage: &PipelineStage<impl Float>, value: Option<u64>, param: &'static str) -> Result<u64> {
    let v = value.ok_or_else(|| BudgetError::MissingParam {
        stage: stage.name.clone(),
        kind: stage.kind.name().into(),
        param,
    })?;
    at_least_one(param, v)?;
    Ok(v)
}

fn analyze_stage<F: Float>(
    stage: &PipelineStage<F>,
    bench: &ProcessorBenchmark<F>,
    ctx: &SignalContext<F>,
) -> Result<StageBudget<F>> {
    positive("deadline", stage.deadline)?;
    at_least_one("word_bits", stage.word_bits)?;
    let channels = stage.channels.unwrap_or(ctx.beams);
    at_least_one("channels", channels)?;
    let p = &stage.params;
    let tap = bench.fir_per_tap_time;
    let mut acquisition_points = None;

    let (units, op_count, unit_time) = match stage.kind {
        StageKind::Fft => {
            let n = need(stage, p.n_points, "n_points")?;
            acquisition_points = Some(n);
            let butterflies = product(
                "FFT op count",
                &[n / 2, n.trailing_zeros() as u64, channels],
            )?;
            (channels, butterflies, fft_time_scaled(bench, n)?)
        }
        StageKind::Correlation => {
            let points = need(stage, p.points, "points")?;
            let refs = need(stage, p.refs, "refs")?;
            let ops = correlation_op_count(points, channels, refs)?;
            match p.fft_points {
                Some(n) => {
                    acquisition_points = Some(n);
                    let fft = fft_time_scaled(bench, n)?;
                    (channels, ops, fft + fft + count::<F>(n) * tap)
                }
                None => {
                    acquisition_points = Some(points);
                    (channels, ops, count::<F>(points * refs) * tap)
                }
            }
        }
        StageKind::Cfar => {
            let window = need(stage, p.window_cells, "window_cells")?;
            let refs = need(stage, p.refs, "refs")?;
            let ops = cfar_op_count(window, channels, refs)?;
            (channels, ops, count::<F>(window * refs) * tap)
        }
        StageKind::Pdp => {
            let targets = need(stage, p.max_targets, "max_targets")?;
            let per_target = p.ops_per_target.unwrap_or(1);
            at_least_one("ops_per_target", per_target)?;
            let ops = product("PDP op count", &[targets, per_target])?;
            (targets, ops, count::<F>(per_target) * tap)
        }
        StageKind::Custom => {
            let ops = need(stage, p.op_count, "op_count")?;
            (1, ops, count::<F>(ops) * tap)
        }
    };

    let per_unit = per_unit_deadline(stage.deadline, units)?;
    let required = required_processors(unit_time, per_unit)?;
    let allocated = stage
        .max_processors
        .map_or(required, |cap| required.min(cap));
    let feasible =
        count::<F>(allocated) * per_unit >= unit_time * (F::one() - F::epsilon() * lift(16.0));

    let (acquisition_bits, buffer, input_rate) = match acquisition_points {
        Some(n) => (
            acquisition_memory_bits(n, channels, stage.word_bits)?,
            buffer_bits(ctx.sample_rate, stage.deadline, stage.word_bits, channels)?,
            ctx.sample_rate * count::<F>(stage.word_bits * channels) / lift(8.0),
        ),
        None => (
            0,
            BufferSize {
                samples_per_interval: 0,
                bits: 0,
            },
            F::zero(),
        ),
    };

    Ok(StageBudget {
        name: stage.name.clone(),
        kind: stage.kind,
        channels,
        units,
        op_count,
        per_unit_deadline: per_unit,
        time_per_op: time_per_op(stage.deadline, op_count)?,
        scaled_stage_time: unit_time,
        required_processors: required,
        allocated_processors: allocated,
        feasible,
        acquisition_bits,
        buffer_samples: buffer.samples_per_interval,
        buffer_bits: buffer.bits,
        input_rate,
    })
}

/// Per-stage and aggregate budget. Infeasible stages are flagged, never dropped.
pub fn analyze_pipeline<F: Float>(
    stages: &[PipelineStage<F>],
    bench: &ProcessorBenchmark<F>,
    ctx: &SignalContext<F>,
) -> Result<BudgetReport<F>> {
    if stages.is_empty() {
        return Err(BudgetError::EmptyPipeline);
    }
    bench.check()?;
    ctx.check()?;
    let stages = stages
        .iter()
        .map(|s| analyze_stage(s, bench, ctx))
        .collect::<Result<Vec<_>>>()?;
    let total_processors = stages
        .iter()
        .try_fold(0u64, |acc, s| acc.checked_add(s.allocated_processors))
        .ok_or_else(|| BudgetError::Overflow("processor total".into()))?;
    let acquisition_memory_bits = stages.iter().map(|s| s.acquisition_bits).sum();
    let buffer = stages.iter().map(|s| s.buffer_bits).sum();
    let aggregate_input_rate = stages.iter().fold(F::zero(), |a, s| a + s.input_rate);
    Ok(BudgetReport {
        benchmark: bench.name.clone(),
        boards: board_count(total_processors.max(1), bench.cores_per_board)?,
        total_processors,
        acquisition_memory_bits,
        buffer_bits: buffer,
        aggregate_input_rate,
        io_utilization: aggregate_input_rate / bench.io_rate,
        feasible: stages.iter().all(|s| s.feasible),
        stages,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        ((a - b) / b).abs() <= rel
    }

    #[test]
    fn deadlines_per_beam() {
        assert_eq!(per_unit_deadline(3e-3f64, 128).unwrap(), 23.4375e-6);
        assert_eq!(per_unit_deadline(0.7f64, 1).unwrap(), 0.7);
        assert!(close(
            per_unit_deadline(128e-3f64, 128).unwrap(),
            1e-3,
            1e-12
        ));
        assert!(per_unit_deadline(1.0f64, 0).is_err());
    }

    #[test]
    fn op_counts() {
        assert_eq!(correlation_op_count(1920, 128, 32).unwrap(), 7_864_320);
        assert_eq!(correlation_op_count(1, 1, 1).unwrap(), 1);
        assert_eq!(cfar_op_count(200, 128, 32).unwrap(), 819_200);
        assert_eq!(cfar_op_count(200, 64, 32).unwrap(), 409_600);
        assert!(matches!(
            correlation_op_count(u64::MAX, 2, 1),
            Err(BudgetError::Overflow(_))
        ));
        assert!(cfar_op_count(0, 1, 1).is_err());
    }

    #[test]
    fn time_per_operation() {
        let t = time_per_op(62.5e-6f64, 7_864_320).unwrap();
        assert!(close(t, 7.947e-12, 1e-3));
        let c = time_per_op(3e-3f64, 819_200).unwrap();
        assert!(close(c, 3.662e-9, 1e-3));
        assert_eq!(time_per_op(1.0f64, 1).unwrap(), 1.0);
    }

    #[test]
    fn fft_scaling() {
        let b = ProcessorBenchmark::<f64>::tiger_sharc();
        assert!(close(fft_time_scaled(&b, 4096).unwrap(), 76.8e-6, 1e-12));
        assert_eq!(fft_time_scaled(&b, 1024).unwrap(), 16e-6);
        assert!(close(fft_time_scaled(&b, 2048).unwrap(), 35.2e-6, 1e-12));
        assert!(fft_time_scaled(&b, 1000).is_err());
        assert!(fft_time_scaled(&b, 1).is_err());
    }

    #[test]
    fn processors_and_boards() {
        assert_eq!(required_processors(76.8e-6f64, 23.4375e-6).unwrap(), 4);
        assert_eq!(required_processors(10e-6f64, 10e-6).unwrap(), 1);
        assert_eq!(required_processors(76.8e-6f64, 23.4e-6).unwrap(), 4);
        assert_eq!(required_processors(0.3f64, 0.1).unwrap(), 3);
        assert_eq!(board_count(8, 2).unwrap(), 4);
        assert_eq!(board_count(1, 2).unwrap(), 1);
        assert_eq!(board_count(5, 2).unwrap(), 3);
    }

    #[test]
    fn memory() {
        let b = buffer_bits(16_000.0f64, 3e-3, 16, 128).unwrap();
        assert_eq!(b.samples_per_interval, 48);
        assert_eq!(b.bits, 98_304);
        assert_eq!(b.bits, 12 * BITS_PER_KIB);
        let tiny = buffer_bits(16_000.0f64, 1e-6, 16, 128).unwrap();
        assert_eq!((tiny.samples_per_interval, tiny.bits), (0, 0));
        assert_eq!(
            buffer_bits(16_000.0f64, 3e-3, 16, 64).unwrap().bits,
            6 * BITS_PER_KIB
        );
        assert_eq!(
            acquisition_memory_bits(4096, 128, 16).unwrap(),
            BITS_PER_MIB
        );
        assert_eq!(acquisition_memory_bits(1, 1, 1).unwrap(), 1);
        assert_eq!(
            bits_to_mib::<f64>(acquisition_memory_bits(4096, 64, 16).unwrap()),
            0.5
        );
    }

    #[test]
    fn range_and_doppler() {
        assert!(close(
            range_resolution_to_deadline(2.25f64, 1500.0).unwrap(),
            3e-3,
            1e-12
        ));
        assert!(close(
            range_resolution_to_deadline(0.75f64, 1500.0).unwrap(),
            1e-3,
            1e-12
        ));
        assert!(close(
            range_resolution_to_deadline(90.0f64, 1500.0).unwrap(),
            0.12,
            1e-12
        ));
        assert_eq!(doppler_reference_count(2000.0f64, 62.5).unwrap(), 32);
        assert_eq!(doppler_reference_count(100.0f64, 100.0).unwrap(), 1);
        assert_eq!(doppler_reference_count(2000.0f64, 60.0).unwrap(), 34);
        assert!(doppler_reference_count(10.0f64, 20.0).is_err());
    }

    #[test]
    fn single_precision_agrees() {
        assert_eq!(required_processors(76.8e-6f32, 23.4375e-6).unwrap(), 4);
        let b = ProcessorBenchmark::<f32>::tiger_sharc();
        assert!((fft_time_scaled(&b, 4096).unwrap() - 76.8e-6).abs() < 1e-10);
        assert_eq!(
            buffer_bits(16_000.0f32, 3e-3, 16, 128).unwrap().bits,
            98_304
        );
    }

    #[test]
    fn mds_pipeline() {
        let p = Pipeline::<f64>::mds(128);
        let r =
            analyze_pipeline(&p.stages, &ProcessorBenchmark::tiger_sharc(), &p.context).unwrap();
        let fft = &r.stages[0];
        assert_eq!(fft.required_processors, 4);
        assert!(fft.feasible);
        assert_eq!(fft.per_unit_deadline, 23.4375e-6);
        assert_eq!(r.acquisition_memory_bits, BITS_PER_MIB);
        assert_eq!(r.buffer_bits, 12 * BITS_PER_KIB);
        let cfar = &r.stages[1];
        assert_eq!(cfar.op_count, 819_200);
        assert!(close(cfar.time_per_op, 3.6e-9, 0.02));
        let pdp = &r.stages[2];
        assert!(close(pdp.time_per_op, 300e-6, 1e-12));
        assert!(r.feasible);
    }

    #[test]
    fn half_channels_halve_linear_quantities() {
        let bench = ProcessorBenchmark::tiger_sharc();
        let full = Pipeline::<f64>::mds(128);
        let half = Pipeline::<f64>::mds(64);
        let a = analyze_pipeline(&full.stages, &bench, &full.context).unwrap();
        let b = analyze_pipeline(&half.stages, &bench, &half.context).unwrap();
        assert_eq!(a.acquisition_memory_bits, 2 * b.acquisition_memory_bits);
        assert_eq!(a.buffer_bits, 2 * b.buffer_bits);
        for (x, y) in a.stages.iter().zip(&b.stages).take(2) {
            assert_eq!(x.op_count, 2 * y.op_count);
        }
    }

    #[test]
    fn custom_stage_trivially_feasible() {
        let stage = PipelineStage {
            name: "one".into(),
            kind: StageKind::Custom,
            params: StageParams {
                op_count: Some(1),
                ..StageParams::default()
            },
            channels: Some(1),
            deadline: 1.0f64,
            word_bits: 16,
            max_processors: None,
        };
        let ctx = Pipeline::<f64>::mds(1).context;
        let r = analyze_pipeline(&[stage], &ProcessorBenchmark::tiger_sharc(), &ctx).unwrap();
        assert_eq!(r.stages[0].required_processors, 1);
        assert!(r.feasible);
        assert_eq!(r.boards, 1);
    }

    #[test]
    fn capped_processors_flag_infeasible() {
        let mut p = Pipeline::<f64>::mds(128);
        p.stages[0].max_processors = Some(2);
        let r =
            analyze_pipeline(&p.stages, &ProcessorBenchmark::tiger_sharc(), &p.context).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.infeasible_stages().count(), 1);
        assert_eq!(r.stages.len(), 3);
    }

    #[test]
    fn missing_param_is_configuration_error() {
        let mut p = Pipeline::<f64>::mds(128);
        p.stages[1].params.refs = None;
        let err = analyze_pipeline(&p.stages, &ProcessorBenchmark::tiger_sharc(), &p.context)
            .unwrap_err();
        assert_eq!(
            err,
            BudgetError::MissingParam {
                stage: "cfar".into(),
                kind: "cfar".into(),
                param: "refs"
            }
        );
    }

    #[test]
    fn correlation_via_fft_model() {
        let stage = PipelineStage {
            name: "corr".into(),
            kind: StageKind::Correlation,
            params: StageParams {
                points: Some(2048),
                refs: Some(1),
                fft_points: Some(4096),
                ..StageParams::default()
            },
            channels: Some(128),
            deadline: 128e-3f64,
            word_bits: 16,
            max_processors: None,
        };
        let ctx = Pipeline::<f64>::mds(128).context;
        let bench = ProcessorBenchmark::tiger_sharc();
        let r = analyze_pipeline(&[stage], &bench, &ctx).unwrap();
        let s = &r.stages[0];
        assert!(close(s.per_unit_deadline, 1e-3, 1e-12));
        let expected = 2.0 * 76.8e-6 + 4096.0 * 0.83e-9;
        assert!(close(s.scaled_stage_time, expected, 1e-12));
        assert_eq!(s.required_processors, 1);
    }

    #[test]
    fn pipeline_json_shape() {
        let p: Pipeline<f64> = serde_json::from_str(
            r#"{"context":{"sample_rate":16000,"pri":4.0,"beams":64},
                "stages":[{"name":"fft","kind":"fft","params":{"n_points":4096},"deadline":0.003}]}"#,
        )
        .unwrap();
        assert_eq!(p.context.sound_speed, 1500.0);
        assert_eq!(p.stages[0].word_bits, 16);
        assert_eq!(p.stages[0].channels, None);
    }
}
