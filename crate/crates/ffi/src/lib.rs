//! C ABI over the covgen engine.
//!
//! Every fallible function returns a [`CovgenStatus`]; on failure the message
//! is available from [`covgen_last_error`] on the same thread. Handles are
//! opaque and must be released with their `_free` function. Strings returned
//! through out-parameters are owned by the caller and released with
//! [`covgen_string_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use covgen::chem::{canonicalize, has_substructure, morgan_fingerprint, parse_smiles, tanimoto, MolecularGraph};
use covgen::moo::non_dominated_sort;
use covgen::neural::GeneratorModel;
use covgen::scorers::{preset_registry, Preset, ScorerRegistry};
use libc::c_char;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovgenStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Parse = 4,
    Io = 5,
    Runtime = 6,
    Panic = 7,
}

/// Parsed molecular graph.
pub struct CovgenMolecule(MolecularGraph);

/// Scorer registry built from a preset.
pub struct CovgenRegistry(ScorerRegistry);

/// Trained SMILES generator.
pub struct CovgenGenerator(GeneratorModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: CovgenStatus, msg: impl Into<String>) -> CovgenStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> CovgenStatus) -> CovgenStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(CovgenStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, CovgenStatus> {
    if p.is_null() {
        return Err(fail(CovgenStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(CovgenStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> CovgenStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            CovgenStatus::Ok
        }
        Err(_) => fail(CovgenStatus::Runtime, "string contains NUL"),
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(CovgenStatus::NullPointer, concat!(stringify!($p), " is null"));
        })+
    };
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

/// Message for the most recent failure on this thread, or null. Valid until
/// the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn covgen_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static engine version string.
#[no_mangle]
pub extern "C" fn covgen_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn covgen_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `smiles` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn covgen_molecule_parse(smiles: *const c_char, out: *mut *mut CovgenMolecule) -> CovgenStatus {
    guard(|| {
        non_null!(out);
        let s = try_status!(str_arg(smiles, "smiles"));
        match parse_smiles(s) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(CovgenMolecule(m)));
                CovgenStatus::Ok
            }
            Err(e) => fail(CovgenStatus::Parse, e.to_string()),
        }
    })
}

/// # Safety
/// `m` must come from [`covgen_molecule_parse`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn covgen_molecule_free(m: *mut CovgenMolecule) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Heavy-atom count.
///
/// # Safety
/// `m` must be a live molecule handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn covgen_molecule_atom_count(m: *const CovgenMolecule, out: *mut usize) -> CovgenStatus {
    guard(|| {
        non_null!(m, out);
        *out = (*m).0.atom_count();
        CovgenStatus::Ok
    })
}

/// Canonical SMILES; release with [`covgen_string_free`].
///
/// # Safety
/// `m` must be a live molecule handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn covgen_molecule_canonical(m: *const CovgenMolecule, out: *mut *mut c_char) -> CovgenStatus {
    guard(|| {
        non_null!(m, out);
        write_string(out, canonicalize(&(*m).0))
    })
}

/// # Safety
/// `query` and `target` must be live molecule handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn covgen_molecule_has_substructure(
    query: *const CovgenMolecule,
    target: *const CovgenMolecule,
    out: *mut bool,
) -> CovgenStatus {
    guard(|| {
        non_null!(query, target, out);
        *out = has_substructure(&(*query).0, &(*target).0);
        CovgenStatus::Ok
    })
}

/// Tanimoto similarity of the Morgan fingerprints of two molecules.
///
/// # Safety
/// `a` and `b` must be live molecule handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn covgen_tanimoto(a: *const CovgenMolecule, b: *const CovgenMolecule, out: *mut f64) -> CovgenStatus {
    guard(|| {
        non_null!(a, b, out);
        match tanimoto(&morgan_fingerprint(&(*a).0), &morgan_fingerprint(&(*b).0)) {
            Ok(t) => {
                *out = t;
                CovgenStatus::Ok
            }
            Err(e) => fail(CovgenStatus::Runtime, e.to_string()),
        }
    })
}

/// Scorer registry for a preset name such as `egfr-3`.
///
/// # Safety
/// `preset` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn covgen_registry_new(preset: *const c_char, out: *mut *mut CovgenRegistry) -> CovgenStatus {
    guard(|| {
        non_null!(out);
        let name = try_status!(str_arg(preset, "preset"));
        match Preset::parse(name) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(CovgenRegistry(preset_registry(p))));
                CovgenStatus::Ok
            }
            Err(e) => fail(CovgenStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// # Safety
/// `r` must come from [`covgen_registry_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn covgen_registry_free(r: *mut CovgenRegistry) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Number of active scorers.
///
/// # Safety
/// `r` must be a live registry handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn covgen_registry_active_count(r: *const CovgenRegistry, out: *mut usize) -> CovgenStatus {
    guard(|| {
        non_null!(r, out);
        *out = (*r).0.active_names().len();
        CovgenStatus::Ok
    })
}

/// Scores one SMILES. Invalid molecules succeed with reward 0, valid false.
///
/// # Safety
/// `r` must be a live registry handle, `smiles` a NUL-terminated string and
/// every out-pointer writable.
#[no_mangle]
pub unsafe extern "C" fn covgen_registry_score(
    r: *const CovgenRegistry,
    smiles: *const c_char,
    reward: *mut f64,
    valid: *mut bool,
    desirable: *mut bool,
) -> CovgenStatus {
    guard(|| {
        non_null!(r, reward, valid, desirable);
        let s = try_status!(str_arg(smiles, "smiles"));
        let reg = &(*r).0;
        let v = match reg.evaluate("ffi", s) {
            Ok(v) => v,
            Err(e) => return fail(CovgenStatus::Runtime, e.to_string()),
        };
        match reg.reward(&v) {
            Ok(x) => {
                *reward = x;
                *valid = v.valid;
                *desirable = v.desirable;
                CovgenStatus::Ok
            }
            Err(e) => fail(CovgenStatus::Runtime, e.to_string()),
        }
    })
}

/// Loads a generator checkpoint (the sidecar manifest must sit next to it).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn covgen_generator_load(path: *const c_char, out: *mut *mut CovgenGenerator) -> CovgenStatus {
    guard(|| {
        non_null!(out);
        let p = try_status!(str_arg(path, "path"));
        match GeneratorModel::load(Path::new(p)) {
            Ok(g) => {
                *out = Box::into_raw(Box::new(CovgenGenerator(g)));
                CovgenStatus::Ok
            }
            Err(e) => fail(CovgenStatus::Io, e.to_string()),
        }
    })
}

/// # Safety
/// `g` must come from [`covgen_generator_load`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn covgen_generator_free(g: *mut CovgenGenerator) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Samples `n` SMILES, returned newline-separated; release with
/// [`covgen_string_free`]. Identical arguments give identical output.
///
/// # Safety
/// `g` must be a live generator handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn covgen_generator_sample(
    g: *const CovgenGenerator,
    n: usize,
    temperature: f64,
    seed: u64,
    out: *mut *mut c_char,
) -> CovgenStatus {
    guard(|| {
        non_null!(g, out);
        if !(temperature.is_finite() && temperature > 0.0) {
            return fail(CovgenStatus::InvalidArgument, "temperature must be positive");
        }
        let model = &(*g).0;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lines: Vec<String> = model.sample(n, temperature, &mut rng).iter().map(|s| model.smiles(s)).collect();
        write_string(out, lines.join("\n"))
    })
}

/// Pareto front index of each of `n` solutions with `m` objectives
/// (row-major `points`, all maximised); front 0 is non-dominated.
///
/// # Safety
/// `points` must hold `n * m` doubles and `ranks` room for `n` values.
#[no_mangle]
pub unsafe extern "C" fn covgen_pareto_ranks(points: *const f64, n: usize, m: usize, ranks: *mut usize) -> CovgenStatus {
    guard(|| {
        non_null!(points, ranks);
        if n == 0 || m == 0 {
            return fail(CovgenStatus::InvalidArgument, "population and objective counts must be positive");
        }
        let flat = std::slice::from_raw_parts(points, n * m);
        let rows: Vec<Vec<f64>> = flat.chunks(m).map(<[f64]>::to_vec).collect();
        match non_dominated_sort(&rows) {
            Ok(fronts) => {
                let out = std::slice::from_raw_parts_mut(ranks, n);
                for (r, front) in fronts.iter().enumerate() {
                    for &i in front {
                        out[i] = r;
                    }
                }
                CovgenStatus::Ok
            }
            Err(e) => fail(CovgenStatus::InvalidArgument, e.to_string()),
        }
    })
}
