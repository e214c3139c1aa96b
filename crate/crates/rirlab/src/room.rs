//! Shoebox room geometry, source/receiver placement, and simulation config.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cartesian position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

/// Index convention for the six surfaces of a shoebox room.
///
/// `absorption[i]` follows this order: walls x=0, x=W, y=0, y=L, then
/// floor (z=0) and ceiling (z=H).
pub const SURFACE_NAMES: [&str; 6] = ["wall_x0", "wall_x1", "wall_y0", "wall_y1", "floor", "ceiling"];

/// Shoebox room with per-surface frequency-independent absorption.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomSpec {
    /// Extent along x, meters.
    pub width: f64,
    /// Extent along y, meters.
    pub length: f64,
    /// Extent along z, meters.
    pub height: f64,
    /// Absorption coefficients, see [`SURFACE_NAMES`] for ordering.
    pub absorption: [f64; 6],
}

impl RoomSpec {
    pub const WIDTH_RANGE: (f64, f64) = (3.0, 15.0);
    pub const HEIGHT_RANGE: (f64, f64) = (2.0, 7.0);

    pub fn new(width: f64, length: f64, height: f64, absorption: [f64; 6]) -> Result<Self> {
        let room = Self { width, length, height, absorption };
        room.validate()?;
        Ok(room)
    }

    /// Uniform absorption on all six surfaces.
    pub fn uniform(width: f64, length: f64, height: f64, alpha: f64) -> Result<Self> {
        Self::new(width, length, height, [alpha; 6])
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = Self::WIDTH_RANGE;
        for (name, v) in [("width", self.width), ("length", self.length)] {
            if !(lo..=hi).contains(&v) {
                return Err(Error::InvalidConfig(format!(
                    "{name} {v} outside [{lo}, {hi}] m"
                )));
            }
        }
        let (hlo, hhi) = Self::HEIGHT_RANGE;
        if !(hlo..=hhi).contains(&self.height) {
            return Err(Error::InvalidConfig(format!(
                "height {} outside [{hlo}, {hhi}] m",
                self.height
            )));
        }
        for (i, &a) in self.absorption.iter().enumerate() {
            if !(a > 0.0 && a <= 1.0) || !a.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "absorption[{}] = {a} outside (0, 1]",
                    SURFACE_NAMES[i]
                )));
            }
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        self.width * self.length * self.height
    }

    /// Areas of the six surfaces, same ordering as `absorption`.
    pub fn surface_areas(&self) -> [f64; 6] {
        let side_x = self.length * self.height;
        let side_y = self.width * self.height;
        let horiz = self.width * self.length;
        [side_x, side_x, side_y, side_y, horiz, horiz]
    }

    pub fn total_surface_area(&self) -> f64 {
        self.surface_areas().iter().sum()
    }

    fn contains_with_margin(&self, p: &Point3, margin: f64) -> bool {
        p.x > margin
            && p.x < self.width - margin
            && p.y > margin
            && p.y < self.length - margin
            && p.z > margin
            && p.z < self.height - margin
    }
}

/// Sabine reverberation time 0.161 V / sum(S_i alpha_i), seconds.
pub fn sabine_t60(room: &RoomSpec) -> Result<f64> {
    let areas = room.surface_areas();
    let absorbing_area: f64 = areas
        .iter()
        .zip(&room.absorption)
        .map(|(s, a)| s * a)
        .sum();
    if absorbing_area <= 0.0 {
        return Err(Error::DegenerateRoom);
    }
    Ok(0.161 * room.volume() / absorbing_area)
}

/// Mean free path 4V/S, meters.
pub fn mean_free_path(room: &RoomSpec) -> f64 {
    4.0 * room.volume() / room.total_surface_area()
}

/// A source/microphone placement inside a room.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceReceiverPair {
    pub source: Point3,
    pub mic: Point3,
    /// Cached Euclidean distance, meters.
    pub distance: f64,
}

impl SourceReceiverPair {
    pub const HEIGHT_RANGE: (f64, f64) = (1.5, 2.2);
    pub const SURFACE_MARGIN: f64 = 0.5;
    pub const MIN_DISTANCE: f64 = 1.0;

    pub fn new(source: Point3, mic: Point3) -> Self {
        let distance = source.distance(&mic);
        Self { source, mic, distance }
    }

    /// Full constraint check against a room: heights, surface margins, and
    /// minimum separation.
    pub fn validate(&self, room: &RoomSpec) -> Result<()> {
        let (hlo, hhi) = Self::HEIGHT_RANGE;
        for (name, p) in [("source", &self.source), ("mic", &self.mic)] {
            if !(hlo..=hhi).contains(&p.z) {
                return Err(Error::InvalidConfig(format!(
                    "{name} height {} outside [{hlo}, {hhi}] m",
                    p.z
                )));
            }
            if !room.contains_with_margin(p, Self::SURFACE_MARGIN) {
                return Err(Error::InvalidConfig(format!(
                    "{name} closer than {} m to a surface",
                    Self::SURFACE_MARGIN
                )));
            }
        }
        if self.distance <= Self::MIN_DISTANCE {
            return Err(Error::InvalidConfig(format!(
                "source-receiver distance {} <= {} m",
                self.distance,
                Self::MIN_DISTANCE
            )));
        }
        if (self.distance - self.source.distance(&self.mic)).abs() > 1e-9 {
            return Err(Error::InvalidConfig("cached distance out of sync".into()));
        }
        Ok(())
    }
}

/// Image-source simulation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub sample_rate: u32,
    /// Speed of sound, m/s.
    pub speed_of_sound: f64,
    /// Per-axis bound on the mirror index; the image lattice spans
    /// `(2*order+1)^3` positions.
    pub max_image_order: u32,
    /// Length of the windowed-sinc fractional delay kernel; odd, >= 3.
    pub frac_delay_taps: u32,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            sample_rate: 16_000,
            speed_of_sound: 343.0,
            max_image_order: 20,
            frac_delay_taps: 81,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_rate == 0 {
            return Err(Error::InvalidConfig("sample_rate must be > 0".into()));
        }
        if !self.speed_of_sound.is_finite() || self.speed_of_sound <= 0.0 {
            return Err(Error::InvalidConfig("speed_of_sound must be > 0".into()));
        }
        if self.frac_delay_taps < 3 || self.frac_delay_taps % 2 == 0 {
            return Err(Error::InvalidConfig(format!(
                "frac_delay_taps {} must be odd and >= 3",
                self.frac_delay_taps
            )));
        }
        Ok(())
    }
}

/// A sampled room impulse response with its ground-truth propagation delay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rir {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    /// Ground-truth propagation delay r/c, seconds.
    pub tau_d: f64,
    pub room_ref: Option<String>,
    pub pair_ref: Option<String>,
}

impl Rir {
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum()
    }
}
