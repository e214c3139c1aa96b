//! Decomposition of an RIR into full / direct-only / no-late / no-early
//! variants with half-cosine fades at the region boundaries.
//!
//! Fade-outs keep the window at 1 up to the boundary and taper to 0 over the
//! following `fade` seconds; fade-ins mirror that, rising from 0 to reach 1
//! at the boundary. The guard window after the direct arrival therefore stays
//! untouched inside the direct-only variant, and the no-early variant is
//! exactly zero on `[t_d + fade, t_mix - fade]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::room::Rir;

pub const DEFAULT_GUARD: f64 = 0.002;
pub const DEFAULT_FADE: f64 = 0.005;

/// Temporal boundaries of one decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Boundaries {
    /// Ground-truth propagation delay, seconds.
    pub tau_d: f64,
    /// Direct endpoint tau_d + guard, seconds.
    pub t_d: f64,
    /// Mixing time, seconds.
    pub t_mix: f64,
    pub guard: f64,
    pub fade: f64,
}

/// The four variants of one RIR, all sharing sample rate and length.
#[derive(Debug, Clone, PartialEq)]
pub struct RirVariantSet {
    pub full: Rir,
    pub direct_only: Rir,
    pub no_late: Rir,
    pub no_early: Rir,
    pub boundaries: Boundaries,
}

/// Canonical variant labels, used in file names and report columns.
pub const VARIANT_NAMES: [&str; 4] = ["full", "direct", "nolate", "noearly"];

impl RirVariantSet {
    pub fn get(&self, name: &str) -> Option<&Rir> {
        match name {
            "full" => Some(&self.full),
            "direct" => Some(&self.direct_only),
            "nolate" => Some(&self.no_late),
            "noearly" => Some(&self.no_early),
            _ => None,
        }
    }
}

/// Window value 1 up to `boundary`, half-cosine down to 0 at `boundary + fade`.
fn fade_out(t: f64, boundary: f64, fade: f64) -> f64 {
    if t <= boundary {
        1.0
    } else if t >= boundary + fade {
        0.0
    } else {
        0.5 * (1.0 + (std::f64::consts::PI * (t - boundary) / fade).cos())
    }
}

/// Window value 0 up to `boundary - fade`, rising to 1 at `boundary`.
fn fade_in(t: f64, boundary: f64, fade: f64) -> f64 {
    if t <= boundary - fade {
        0.0
    } else if t >= boundary {
        1.0
    } else {
        0.5 * (1.0 - (std::f64::consts::PI * (boundary - t) / fade).cos())
    }
}

/// Split an RIR at `t_d = tau_d + guard` and `t_mix` into the four variants.
pub fn decompose(rir: &Rir, t_mix: f64, guard: f64, fade: f64) -> Result<RirVariantSet> {
    if rir.samples.is_empty() {
        return Err(Error::EmptyRir);
    }
    if fade <= 0.0 || guard < 0.0 {
        return Err(Error::InvalidConfig("guard must be >= 0 and fade > 0".into()));
    }
    let t_d = rir.tau_d + guard;
    if t_mix <= rir.tau_d + guard + 2.0 * fade {
        return Err(Error::BoundaryOrderViolation(format!(
            "t_mix {t_mix} s must exceed tau_d + guard + 2*fade = {} s",
            rir.tau_d + guard + 2.0 * fade
        )));
    }
    let fs = f64::from(rir.sample_rate);
    let n = rir.samples.len();
    let mut direct_only = Vec::with_capacity(n);
    let mut no_late = Vec::with_capacity(n);
    let mut no_early = Vec::with_capacity(n);
    for (i, &h) in rir.samples.iter().enumerate() {
        let t = i as f64 / fs;
        let w_direct = fade_out(t, t_d, fade);
        let w_late_cut = fade_out(t, t_mix, fade);
        let w_late_in = fade_in(t, t_mix, fade);
        direct_only.push(h * w_direct);
        no_late.push(h * w_late_cut);
        no_early.push(h * (w_direct + w_late_in));
    }
    let boundaries = Boundaries { tau_d: rir.tau_d, t_d, t_mix, guard, fade };
    let variant = |samples: Vec<f64>| Rir { samples, ..rir.clone() };
    Ok(RirVariantSet {
        full: rir.clone(),
        direct_only: variant(direct_only),
        no_late: variant(no_late),
        no_early: variant(no_early),
        boundaries,
    })
}
