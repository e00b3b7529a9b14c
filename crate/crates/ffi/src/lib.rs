//! C ABI for the pcm-em simulator.
//!
//! Objects are exposed as opaque handles created by `*_new` and released by
//! `*_free`. Every fallible function returns a [`PcmStatus`]; on failure a
//! human-readable message for the calling thread is available from
//! [`pcm_last_error`]. Handles are not synchronized: use one handle per
//! thread or guard it externally.
//!
//! The header `include/pcm_em.h` is generated by the build script.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pcm_em::energy::{self, Cost};
use pcm_em::rng::{self, tag, SimRng};
use pcm_em::{
    AdcConfig, BipolarVector, ClassId, CrossbarArray, DeviceModelParams, EnergyTimeParams, Error, ExplicitMemory,
    IncrementShape, OracleMemory, ProgrammingMode, QueryVector,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    CapacityExceeded = 4,
    EmptyMemory = 5,
    BufferTooSmall = 6,
    InvalidConfig = 7,
    Internal = 99,
}

/// Conductance increment per SET pulse.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcmIncrementShape {
    Linear = 0,
    Saturating = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcmDeviceParams {
    pub g_reset: f64,
    pub g_sat: f64,
    pub n_span: u32,
    /// A `PcmIncrementShape` value.
    pub increment_shape: u32,
    pub sat_rate: f64,
    pub sigma_prog: f64,
    pub sigma_read: f64,
}

/// Explicit-memory configuration. `adc_full_scale <= 0` selects
/// `rows * g_sat * 127`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcmMemoryConfig {
    pub rows: usize,
    pub cols: usize,
    pub device: PcmDeviceParams,
    pub adc_bits: u32,
    pub adc_full_scale: f64,
    /// Nonzero: one fixed read-noise offset per device instead of fresh
    /// noise on every search.
    pub frozen_read_noise: u8,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcmProgrammingMode {
    Serial = 0,
    ColumnParallel = 1,
}

/// Pulse and search parameters of the cost model, in SI units.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcmEnergyParams {
    pub v_source: f64,
    pub i_peak: f64,
    pub t_flat: f64,
    pub t_trail: f64,
    pub t_query: f64,
    pub e_query: f64,
    /// A `PcmProgrammingMode` value.
    pub programming_mode: u32,
    pub e_pulse_from_scratch_ratio: f64,
    pub e_search_per_class_vector: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PcmCost {
    pub seconds: f64,
    pub joules: f64,
}

/// Simulated crossbar explicit memory.
pub struct PcmMemory {
    memory: ExplicitMemory,
    adc: AdcConfig,
    programming: SimRng,
    read: SimRng,
}

/// Exact integer reference memory.
pub struct PcmOracle {
    oracle: OracleMemory,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: PcmStatus, msg: impl AsRef<str>) -> PcmStatus {
    set_last_error(msg.as_ref());
    status
}

fn from_error(e: Error) -> PcmStatus {
    let status = match &e {
        Error::DimensionMismatch { .. } | Error::LengthMismatch { .. } => PcmStatus::DimensionMismatch,
        Error::CapacityExceeded { .. } => PcmStatus::CapacityExceeded,
        Error::EmptyMemory | Error::EmptyActiveSet => PcmStatus::EmptyMemory,
        Error::ConfigInvalid(_) => PcmStatus::InvalidConfig,
        Error::ColumnOutOfRange { .. } | Error::Parse { .. } | Error::RangeViolation { .. } => {
            PcmStatus::InvalidArgument
        }
        _ => PcmStatus::Internal,
    };
    fail(status, e.to_string())
}

/// Runs `f`, turning panics into `Internal` and clearing the last error on
/// success.
fn guard(f: impl FnOnce() -> Result<(), PcmStatus>) -> PcmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            PcmStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => fail(PcmStatus::Internal, "internal panic"),
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize) -> Result<&'a [T], PcmStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(PcmStatus::NullPointer, "null data pointer"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, PcmStatus> {
    p.as_mut().ok_or_else(|| fail(PcmStatus::NullPointer, "null output pointer"))
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, PcmStatus> {
    p.as_ref().ok_or_else(|| fail(PcmStatus::NullPointer, "null handle"))
}

unsafe fn handle_mut<'a, T>(p: *mut T) -> Result<&'a mut T, PcmStatus> {
    p.as_mut().ok_or_else(|| fail(PcmStatus::NullPointer, "null handle"))
}

fn bipolar(data: &[i8]) -> Result<BipolarVector, PcmStatus> {
    BipolarVector::new(data.to_vec())
        .map_err(|i| fail(PcmStatus::InvalidArgument, format!("support element {i} is not +1 or -1")))
}

fn query(data: &[i8]) -> Result<QueryVector, PcmStatus> {
    QueryVector::new(data.to_vec())
        .map_err(|i| fail(PcmStatus::InvalidArgument, format!("query element {i} is outside [-127, 127]")))
}

impl From<DeviceModelParams> for PcmDeviceParams {
    fn from(p: DeviceModelParams) -> Self {
        PcmDeviceParams {
            g_reset: p.g_reset,
            g_sat: p.g_sat,
            n_span: p.n_span,
            increment_shape: match p.increment_shape {
                IncrementShape::Linear => PcmIncrementShape::Linear as u32,
                IncrementShape::Saturating => PcmIncrementShape::Saturating as u32,
            },
            sat_rate: p.sat_rate,
            sigma_prog: p.sigma_prog,
            sigma_read: p.sigma_read,
        }
    }
}

impl TryFrom<PcmDeviceParams> for DeviceModelParams {
    type Error = PcmStatus;

    fn try_from(p: PcmDeviceParams) -> Result<Self, PcmStatus> {
        let increment_shape = match p.increment_shape {
            x if x == PcmIncrementShape::Linear as u32 => IncrementShape::Linear,
            x if x == PcmIncrementShape::Saturating as u32 => IncrementShape::Saturating,
            x => return Err(fail(PcmStatus::InvalidConfig, format!("unknown increment shape {x}"))),
        };
        Ok(DeviceModelParams {
            g_reset: p.g_reset,
            g_sat: p.g_sat,
            n_span: p.n_span,
            increment_shape,
            sat_rate: p.sat_rate,
            sigma_prog: p.sigma_prog,
            sigma_read: p.sigma_read,
        })
    }
}

impl From<EnergyTimeParams> for PcmEnergyParams {
    fn from(p: EnergyTimeParams) -> Self {
        PcmEnergyParams {
            v_source: p.v_source,
            i_peak: p.i_peak,
            t_flat: p.t_flat,
            t_trail: p.t_trail,
            t_query: p.t_query,
            e_query: p.e_query,
            programming_mode: match p.programming_mode {
                ProgrammingMode::Serial => PcmProgrammingMode::Serial as u32,
                ProgrammingMode::ColumnParallel => PcmProgrammingMode::ColumnParallel as u32,
            },
            e_pulse_from_scratch_ratio: p.e_pulse_from_scratch_ratio,
            e_search_per_class_vector: p.e_search_per_class_vector,
        }
    }
}

impl TryFrom<PcmEnergyParams> for EnergyTimeParams {
    type Error = PcmStatus;

    fn try_from(p: PcmEnergyParams) -> Result<Self, PcmStatus> {
        let programming_mode = match p.programming_mode {
            x if x == PcmProgrammingMode::Serial as u32 => ProgrammingMode::Serial,
            x if x == PcmProgrammingMode::ColumnParallel as u32 => ProgrammingMode::ColumnParallel,
            x => return Err(fail(PcmStatus::InvalidConfig, format!("unknown programming mode {x}"))),
        };
        Ok(EnergyTimeParams {
            v_source: p.v_source,
            i_peak: p.i_peak,
            t_flat: p.t_flat,
            t_trail: p.t_trail,
            t_query: p.t_query,
            e_query: p.e_query,
            programming_mode,
            e_pulse_from_scratch_ratio: p.e_pulse_from_scratch_ratio,
            e_search_per_class_vector: p.e_search_per_class_vector,
        })
    }
}

impl From<Cost> for PcmCost {
    fn from(c: Cost) -> Self {
        PcmCost { seconds: c.seconds, joules: c.joules }
    }
}

/// Static description of a status code. Never null.
#[no_mangle]
pub extern "C" fn pcm_status_str(status: i32) -> *const c_char {
    const TABLE: [(PcmStatus, &CStr); 9] = [
        (PcmStatus::Ok, c"ok"),
        (PcmStatus::NullPointer, c"null pointer"),
        (PcmStatus::InvalidArgument, c"invalid argument"),
        (PcmStatus::DimensionMismatch, c"dimension mismatch"),
        (PcmStatus::CapacityExceeded, c"capacity exceeded"),
        (PcmStatus::EmptyMemory, c"memory holds no classes"),
        (PcmStatus::BufferTooSmall, c"buffer too small"),
        (PcmStatus::InvalidConfig, c"invalid configuration"),
        (PcmStatus::Internal, c"internal error"),
    ];
    TABLE
        .iter()
        .find(|(s, _)| *s as i32 == status)
        .map_or(c"unknown status", |(_, text)| text)
        .as_ptr()
}

/// Message of the last failed call on this thread, or "" after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn pcm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn pcm_version() -> *const c_char {
    const V: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    V.as_ptr().cast()
}

/// Writes the default configuration: 256x256 array, noiseless linear
/// devices, worst-case 8-bit ADC, seed 0.
///
/// # Safety
/// `config` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pcm_memory_config_default(config: *mut PcmMemoryConfig) -> PcmStatus {
    guard(|| {
        *out(config)? = PcmMemoryConfig {
            rows: 256,
            cols: 256,
            device: DeviceModelParams::default().into(),
            adc_bits: 8,
            adc_full_scale: 0.0,
            frozen_read_noise: 0,
            seed: 0,
        };
        Ok(())
    })
}

/// Creates a fully reset memory.
///
/// # Safety
/// `config` must be null or point to a valid config; `out_memory` must be
/// null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pcm_memory_new(config: *const PcmMemoryConfig, out_memory: *mut *mut PcmMemory) -> PcmStatus {
    guard(|| {
        let cfg = *handle(config)?;
        let slot = out(out_memory)?;
        *slot = ptr::null_mut();
        let device = DeviceModelParams::try_from(cfg.device)?;
        let mut array = CrossbarArray::new(cfg.rows, cfg.cols, device).map_err(from_error)?;
        let full_scale = if cfg.adc_full_scale > 0.0 {
            cfg.adc_full_scale
        } else {
            AdcConfig::worst_case(cfg.rows, device.g_sat).full_scale
        };
        let adc = AdcConfig { bits: cfg.adc_bits, full_scale };
        adc.validate().map_err(from_error)?;
        if cfg.frozen_read_noise != 0 {
            array.freeze_read_noise(&mut rng::stream(cfg.seed, &[tag::FROZEN_READ]));
        }
        let memory = PcmMemory {
            memory: ExplicitMemory::new(array),
            adc,
            programming: rng::stream(cfg.seed, &[tag::PROGRAMMING]),
            read: rng::stream(cfg.seed, &[tag::READ]),
        };
        *slot = Box::into_raw(Box::new(memory));
        Ok(())
    })
}

/// Releases a memory. Null is ignored.
///
/// # Safety
/// `memory` must be null or a handle from `pcm_memory_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pcm_memory_free(memory: *mut PcmMemory) {
    if !memory.is_null() {
        drop(Box::from_raw(memory));
    }
}

/// Superposes one support vector (elements +1/-1) onto the column of
/// `class_id`, allocating the next free column for a new class.
/// `out_saturated`, when not null, is set to 1 if a device of that column
/// reached saturation.
///
/// # Safety
/// `memory` must be a live handle, `support` valid for `len` reads and
/// `out_saturated` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pcm_memory_learn(
    memory: *mut PcmMemory,
    class_id: u32,
    support: *const i8,
    len: usize,
    out_saturated: *mut u8,
) -> PcmStatus {
    guard(|| {
        let m = handle_mut(memory)?;
        let v = bipolar(slice(support, len)?)?;
        let outcome = m.memory.learn_support(ClassId(class_id), &v, &mut m.programming).map_err(from_error)?;
        if let Some(flag) = out_saturated.as_mut() {
            *flag = outcome.saturation.is_some() as u8;
        }
        Ok(())
    })
}

/// Classifies a signed 8-bit query (elements in [-127, 127]); ties go to
/// the smallest class id.
///
/// # Safety
/// `memory` must be a live handle, `query` valid for `len` reads and
/// `out_class` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pcm_memory_classify(
    memory: *mut PcmMemory,
    query_data: *const i8,
    len: usize,
    out_class: *mut u32,
) -> PcmStatus {
    guard(|| {
        let m = handle_mut(memory)?;
        let q = query(slice(query_data, len)?)?;
        let dst = out(out_class)?;
        let class = m.memory.classify(&q, &m.adc, &mut m.read).map_err(from_error)?;
        *dst = class.0;
        Ok(())
    })
}

/// ADC codes of every stored class for one query, in ascending class-id
/// order. `*out_len` always receives the number of classes; when it
/// exceeds `capacity` nothing else is written and `BufferTooSmall` is
/// returned.
///
/// # Safety
/// `memory` must be a live handle, `query` valid for `len` reads,
/// `out_classes` and `out_scores` valid for `capacity` writes and
/// `out_len` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pcm_memory_scores(
    memory: *mut PcmMemory,
    query_data: *const i8,
    len: usize,
    out_classes: *mut u32,
    out_scores: *mut i32,
    capacity: usize,
    out_len: *mut usize,
) -> PcmStatus {
    guard(|| {
        let m = handle_mut(memory)?;
        let n = out(out_len)?;
        *n = m.memory.num_classes();
        if *n > capacity {
            return Err(fail(PcmStatus::BufferTooSmall, format!("{} classes, capacity {capacity}", *n)));
        }
        if *n > 0 && (out_classes.is_null() || out_scores.is_null()) {
            return Err(fail(PcmStatus::NullPointer, "null output buffer"));
        }
        let q = query(slice(query_data, len)?)?;
        let scores = m.memory.similarity_scores(&q, &m.adc, &mut m.read).map_err(from_error)?;
        for (i, (class, score)) in scores.into_iter().enumerate() {
            *out_classes.add(i) = class.0;
            *out_scores.add(i) = score;
        }
        Ok(())
    })
}

/// # Safety
/// `memory` must be a live handle and `out_n` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pcm_memory_num_classes(memory: *const PcmMemory, out_n: *mut usize) -> PcmStatus {
    guard(|| {
        *out(out_n)? = handle(memory)?.memory.num_classes();
        Ok(())
    })
}

/// Column assigned to `class_id`.
///
/// # Safety
/// `memory` must be a live handle and `out_column` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pcm_memory_column_of(
    memory: *const PcmMemory,
    class_id: u32,
    out_column: *mut usize,
) -> PcmStatus {
    guard(|| {
        let m = handle(memory)?;
        let dst = out(out_column)?;
        match m.memory.column_of(ClassId(class_id)) {
            Some(c) => {
                *dst = c;
                Ok(())
            }
            None => Err(fail(PcmStatus::InvalidArgument, format!("class {class_id} is not stored"))),
        }
    })
}

/// Copies the conductance pair and pulse counts of one unit cell.
///
/// # Safety
/// `memory` must be a live handle; every output pointer must be null or
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pcm_memory_cell(
    memory: *const PcmMemory,
    row: usize,
    col: usize,
    out_g_plus: *mut f64,
    out_g_minus: *mut f64,
    out_n_plus: *mut u32,
    out_n_minus: *mut u32,
) -> PcmStatus {
    guard(|| {
        let array = handle(memory)?.memory.array();
        if row >= array.rows() || col >= array.cols() {
            return Err(fail(PcmStatus::InvalidArgument, format!("cell ({row}, {col}) out of range")));
        }
        let cell = array.cell(row, col);
        if let Some(p) = out_g_plus.as_mut() {
            *p = cell.positive.conductance;
        }
        if let Some(p) = out_g_minus.as_mut() {
            *p = cell.negative.conductance;
        }
        if let Some(p) = out_n_plus.as_mut() {
            *p = cell.positive.pulse_count;
        }
        if let Some(p) = out_n_minus.as_mut() {
            *p = cell.negative.pulse_count;
        }
        Ok(())
    })
}

/// Creates an empty oracle for vectors of length `dim`.
///
/// # Safety
/// `out_oracle` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pcm_oracle_new(dim: usize, out_oracle: *mut *mut PcmOracle) -> PcmStatus {
    guard(|| {
        let slot = out(out_oracle)?;
        *slot = ptr::null_mut();
        if dim == 0 {
            return Err(fail(PcmStatus::InvalidArgument, "dim must be >= 1"));
        }
        *slot = Box::into_raw(Box::new(PcmOracle { oracle: OracleMemory::new(dim) }));
        Ok(())
    })
}

/// Releases an oracle. Null is ignored.
///
/// # Safety
/// `oracle` must be null or a handle from `pcm_oracle_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pcm_oracle_free(oracle: *mut PcmOracle) {
    if !oracle.is_null() {
        drop(Box::from_raw(oracle));
    }
}

/// # Safety
/// `oracle` must be a live handle and `support` valid for `len` reads.
#[no_mangle]
pub unsafe extern "C" fn pcm_oracle_learn(
    oracle: *mut PcmOracle,
    class_id: u32,
    support: *const i8,
    len: usize,
) -> PcmStatus {
    guard(|| {
        let o = handle_mut(oracle)?;
        let v = bipolar(slice(support, len)?)?;
        o.oracle.learn(ClassId(class_id), &v).map_err(from_error)
    })
}

/// # Safety
/// `oracle` must be a live handle, `query` valid for `len` reads and
/// `out_class` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pcm_oracle_classify(
    oracle: *const PcmOracle,
    query_data: *const i8,
    len: usize,
    out_class: *mut u32,
) -> PcmStatus {
    guard(|| {
        let o = handle(oracle)?;
        let q = query(slice(query_data, len)?)?;
        let dst = out(out_class)?;
        *dst = o.oracle.classify(&q).map_err(from_error)?.0;
        Ok(())
    })
}

/// Exact integer scores, in ascending class-id order. Buffer protocol as
/// for `pcm_memory_scores`.
///
/// # Safety
/// As for `pcm_memory_scores`.
#[no_mangle]
pub unsafe extern "C" fn pcm_oracle_scores(
    oracle: *const PcmOracle,
    query_data: *const i8,
    len: usize,
    out_classes: *mut u32,
    out_scores: *mut i64,
    capacity: usize,
    out_len: *mut usize,
) -> PcmStatus {
    guard(|| {
        let o = handle(oracle)?;
        let n = out(out_len)?;
        *n = o.oracle.num_classes();
        if *n > capacity {
            return Err(fail(PcmStatus::BufferTooSmall, format!("{} classes, capacity {capacity}", *n)));
        }
        if *n > 0 && (out_classes.is_null() || out_scores.is_null()) {
            return Err(fail(PcmStatus::NullPointer, "null output buffer"));
        }
        let q = query(slice(query_data, len)?)?;
        for (i, (class, score)) in o.oracle.scores(&q).map_err(from_error)?.into_iter().enumerate() {
            *out_classes.add(i) = class.0;
            *out_scores.add(i) = score;
        }
        Ok(())
    })
}

/// # Safety
/// `params` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pcm_energy_params_default(params: *mut PcmEnergyParams) -> PcmStatus {
    guard(|| {
        *out(params)? = EnergyTimeParams::default().into();
        Ok(())
    })
}

unsafe fn energy_params(p: *const PcmEnergyParams) -> Result<EnergyTimeParams, PcmStatus> {
    let p = EnergyTimeParams::try_from(*handle(p)?)?;
    p.validate().map_err(from_error)?;
    Ok(p)
}

/// Energy of one SET pulse in joules.
///
/// # Safety
/// `params` must point to valid parameters and `out_joules` be valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn pcm_energy_pulse(params: *const PcmEnergyParams, out_joules: *mut f64) -> PcmStatus {
    guard(|| {
        let p = energy_params(params)?;
        *out(out_joules)? = energy::pulse_energy(&p);
        Ok(())
    })
}

/// Cost of writing one `d`-element support vector into a column.
///
/// # Safety
/// `params` must point to valid parameters and `out_cost` be valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn pcm_energy_class_update(
    params: *const PcmEnergyParams,
    d: usize,
    out_cost: *mut PcmCost,
) -> PcmStatus {
    guard(|| {
        let p = energy_params(params)?;
        *out(out_cost)? = energy::class_update_cost(d, &p).into();
        Ok(())
    })
}

/// Cost of `n_updates` class updates spread over `n_parallel_columns`
/// columns.
///
/// # Safety
/// As for `pcm_energy_class_update`.
#[no_mangle]
pub unsafe extern "C" fn pcm_energy_sessions_update(
    params: *const PcmEnergyParams,
    n_updates: usize,
    n_parallel_columns: usize,
    d: usize,
    out_cost: *mut PcmCost,
) -> PcmStatus {
    guard(|| {
        let p = energy_params(params)?;
        let dst = out(out_cost)?;
        *dst = energy::sessions_update_cost(n_updates, n_parallel_columns, d, &p)
            .map_err(from_error)?
            .into();
        Ok(())
    })
}

/// Cost of `n_queries` similarity searches.
///
/// # Safety
/// As for `pcm_energy_class_update`.
#[no_mangle]
pub unsafe extern "C" fn pcm_energy_evaluation(
    params: *const PcmEnergyParams,
    n_queries: usize,
    out_cost: *mut PcmCost,
) -> PcmStatus {
    guard(|| {
        let p = energy_params(params)?;
        let dst = out(out_cost)?;
        *dst = energy::evaluation_cost(n_queries, &p).map_err(from_error)?.into();
        Ok(())
    })
}
