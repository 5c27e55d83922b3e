//! C interface to `qkpc`.
//!
//! Every function returns a [`QkpcStatus`] and writes results through out
//! pointers. On failure the message is kept per thread and can be read with
//! [`qkpc_last_error_message`]. Angles are in radians.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qkpc::background::{photons_per_pulse, standard_scene};
use qkpc::capacity::{optimize_private_capacity, Constraints, Scheme, SchemeParams};
use qkpc::channels::{
    eve_error_ook_in, eve_error_pm_in, ook_channel, pm_channel, BinaryChannel, LinkEnvironment, OokParams, PmParams,
    TieRule,
};
use qkpc::detector::expected_lost_photons;
use qkpc::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QkpcStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Usage = 3,
    Numerical = 4,
    Consistency = 5,
    Io = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QkpcScheme {
    OokThreshold1 = 0,
    OokPnr = 1,
    Pm = 2,
    PmConstrained = 3,
    Usd = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QkpcTieRule {
    AlwaysZero = 0,
    AlwaysOne = 1,
    Random = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QkpcReceiver {
    Threshold = 0,
    Majority = 1,
}

/// `eps_xy = P(Bob outputs y | x sent)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QkpcChannel {
    pub eps00: f64,
    pub eps01: f64,
    pub eps10: f64,
    pub eps11: f64,
}

/// Optimum found by [`qkpc_optimize`]. `threshold_k` is 0 for the majority
/// receiver; `theta` and `kappa` are 0 for the threshold receiver.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QkpcCapacity {
    pub c_p: f64,
    pub i_bob: f64,
    pub i_eve: f64,
    pub receiver: QkpcReceiver,
    pub mean_photons: f64,
    pub threshold_k: u32,
    pub theta: f64,
    pub kappa: f64,
    pub q0: f64,
}

/// Opaque link: efficiency, noise and interception fraction.
pub struct QkpcLink(LinkEnvironment);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> QkpcStatus {
    match e {
        Error::Domain(_) => QkpcStatus::Domain,
        Error::Usage(_) => QkpcStatus::Usage,
        Error::Numerical(_) => QkpcStatus::Numerical,
        Error::Consistency(_) => QkpcStatus::Consistency,
        Error::Io(_) => QkpcStatus::Io,
    }
}

fn guard<F>(f: F) -> QkpcStatus
where
    F: FnOnce() -> Result<(), QkpcFail>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            QkpcStatus::Ok
        }
        Ok(Err(QkpcFail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            QkpcStatus::NullPointer
        }
        Ok(Err(QkpcFail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            QkpcStatus::Panic
        }
    }
}

enum QkpcFail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for QkpcFail {
    fn from(e: Error) -> Self {
        QkpcFail::Lib(e)
    }
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, QkpcFail> {
    p.as_mut().ok_or(QkpcFail::Null(what))
}

unsafe fn link_ref<'a>(p: *const QkpcLink) -> Result<&'a LinkEnvironment, QkpcFail> {
    p.as_ref().map(|l| &l.0).ok_or(QkpcFail::Null("link"))
}

fn to_channel(ch: BinaryChannel) -> QkpcChannel {
    QkpcChannel { eps00: ch.eps00, eps01: ch.eps01, eps10: ch.eps10, eps11: ch.eps11 }
}

fn tie_rule(t: QkpcTieRule) -> TieRule {
    match t {
        QkpcTieRule::AlwaysZero => TieRule::AlwaysZero,
        QkpcTieRule::AlwaysOne => TieRule::AlwaysOne,
        QkpcTieRule::Random => TieRule::Random,
    }
}

/// Creates a link. `eta` and `gamma` lie in (0, 1]; `delta` is the mean noise
/// clicks per pulse per detector. Free with [`qkpc_link_free`].
#[no_mangle]
pub unsafe extern "C" fn qkpc_link_new(eta: f64, delta: f64, gamma: f64, out: *mut *mut QkpcLink) -> QkpcStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let env = LinkEnvironment::new(eta, delta, gamma)?;
        *out = Box::into_raw(Box::new(QkpcLink(env)));
        Ok(())
    })
}

/// Releases a link. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn qkpc_link_free(link: *mut QkpcLink) {
    if !link.is_null() {
        drop(Box::from_raw(link));
    }
}

/// Whether Eve's exponent includes Bob's efficiency `eta` (the default).
#[no_mangle]
pub unsafe extern "C" fn qkpc_link_set_eve_receiver_efficiency(link: *mut QkpcLink, included: bool) -> QkpcStatus {
    guard(|| {
        let l = out_ref(link, "link")?;
        l.0 = l.0.with_eve_receiver_efficiency(included);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn qkpc_ook_channel(
    link: *const QkpcLink,
    mean_photons: f64,
    threshold_k: u32,
    q0: f64,
    out: *mut QkpcChannel,
) -> QkpcStatus {
    guard(|| {
        let env = link_ref(link)?;
        let out = out_ref(out, "out")?;
        *out = to_channel(ook_channel(&OokParams::new(mean_photons, threshold_k, q0)?, env)?);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn qkpc_pm_channel(
    link: *const QkpcLink,
    mean_photons: f64,
    theta: f64,
    kappa: f64,
    q0: f64,
    tie: QkpcTieRule,
    out: *mut QkpcChannel,
) -> QkpcStatus {
    guard(|| {
        let env = link_ref(link)?;
        let out = out_ref(out, "out")?;
        let p = PmParams::new(mean_photons, theta, kappa, q0, tie_rule(tie))?;
        *out = to_channel(pm_channel(&p, env)?);
        Ok(())
    })
}

/// Eve's minimum error probability against on-off keying.
#[no_mangle]
pub unsafe extern "C" fn qkpc_eve_error_ook(link: *const QkpcLink, mean_photons: f64, out: *mut f64) -> QkpcStatus {
    guard(|| {
        let env = link_ref(link)?;
        let out = out_ref(out, "out")?;
        if !(mean_photons >= 0.0 && mean_photons.is_finite()) {
            return Err(Error::Domain(format!("mean photon number must be >= 0, got {mean_photons}")).into());
        }
        *out = eve_error_ook_in(env, mean_photons).value();
        Ok(())
    })
}

/// Eve's minimum error probability against the polarization encoding.
#[no_mangle]
pub unsafe extern "C" fn qkpc_eve_error_pm(
    link: *const QkpcLink,
    mean_photons: f64,
    theta: f64,
    kappa: f64,
    out: *mut f64,
) -> QkpcStatus {
    guard(|| {
        let env = link_ref(link)?;
        let out = out_ref(out, "out")?;
        let p = PmParams::new(mean_photons, theta, kappa, 0.5, TieRule::AlwaysOne)?;
        *out = eve_error_pm_in(env, &p).value();
        Ok(())
    })
}

/// Maximizes the private capacity of `scheme` on `link` with default bounds.
#[no_mangle]
pub unsafe extern "C" fn qkpc_optimize(link: *const QkpcLink, scheme: QkpcScheme, out: *mut QkpcCapacity) -> QkpcStatus {
    guard(|| {
        let env = link_ref(link)?;
        let out = out_ref(out, "out")?;
        let scheme = match scheme {
            QkpcScheme::OokThreshold1 => Scheme::OokThreshold1,
            QkpcScheme::OokPnr => Scheme::OokPnr,
            QkpcScheme::Pm => Scheme::Pm,
            QkpcScheme::PmConstrained => Scheme::PmConstrained,
            QkpcScheme::Usd => Scheme::UsdPm,
        };
        let r = optimize_private_capacity(scheme, env, &Constraints::default())?;
        *out = match r.best_params {
            SchemeParams::Ook(p) => QkpcCapacity {
                c_p: r.c_p,
                i_bob: r.i_bob,
                i_eve: r.i_eve,
                receiver: QkpcReceiver::Threshold,
                mean_photons: p.mean_photons,
                threshold_k: p.threshold_k,
                theta: 0.0,
                kappa: 0.0,
                q0: p.q0,
            },
            SchemeParams::Pm(p) => QkpcCapacity {
                c_p: r.c_p,
                i_bob: r.i_bob,
                i_eve: r.i_eve,
                receiver: QkpcReceiver::Majority,
                mean_photons: p.mean_photons,
                threshold_k: 0,
                theta: p.theta,
                kappa: p.kappa,
                q0: p.q0,
            },
        };
        Ok(())
    })
}

/// Background photons per gate for the sky-conditions scene at `brightness`
/// (W m⁻² sr⁻¹ µm⁻¹).
#[no_mangle]
pub unsafe extern "C" fn qkpc_standard_photons_per_pulse(brightness: f64, out: *mut f64) -> QkpcStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let scene = standard_scene().with_brightness(brightness);
        *out = photons_per_pulse(&scene)?.value();
        Ok(())
    })
}

/// Mean photons lost by a detector split into `n` intervals.
#[no_mangle]
pub unsafe extern "C" fn qkpc_expected_lost_photons(mean_photons: f64, n: u32, out: *mut f64) -> QkpcStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = expected_lost_photons(mean_photons, n)?;
        Ok(())
    })
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL, or
/// 0 when the last call succeeded.
#[no_mangle]
pub unsafe extern "C" fn qkpc_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qkpc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
