//! Rejection sampling of room / source / receiver configurations.

use rand::Rng;

use crate::error::{Error, Result};
use crate::materials::MaterialTable;
use crate::room::{Point3, RoomSpec, SourceReceiverPair};

/// Attempt budget before giving up on a target distance.
pub const REJECTION_BUDGET: usize = 10_000;

/// Draw a room and a source/receiver pair whose distance lands within
/// `tol` above `target_distance`, using the built-in material table.
pub fn sample_configuration<R: Rng>(
    rng: &mut R,
    target_distance: f64,
    tol: f64,
) -> Result<(RoomSpec, SourceReceiverPair)> {
    sample_configuration_with(rng, target_distance, tol, &MaterialTable::builtin())
}

/// As [`sample_configuration`], with an explicit material table.
pub fn sample_configuration_with<R: Rng>(
    rng: &mut R,
    target_distance: f64,
    tol: f64,
    materials: &MaterialTable,
) -> Result<(RoomSpec, SourceReceiverPair)> {
    if target_distance < 1.0 {
        return Err(Error::InvalidConfig(format!(
            "target distance {target_distance} < 1.0 m"
        )));
    }
    if tol <= 0.0 {
        return Err(Error::InvalidConfig("tolerance must be > 0".into()));
    }
    let r_lo = target_distance.max(SourceReceiverPair::MIN_DISTANCE + 1e-9);
    let r_hi = target_distance + tol;

    for _ in 0..REJECTION_BUDGET {
        let room = draw_room(rng, materials);
        let margin = SourceReceiverPair::SURFACE_MARGIN;
        let (hlo, hhi) = SourceReceiverPair::HEIGHT_RANGE;
        let z_hi = hhi.min(room.height - margin);
        if z_hi <= hlo {
            continue;
        }
        let source = Point3::new(
            rng.gen_range(margin..room.width - margin),
            rng.gen_range(margin..room.length - margin),
            rng.gen_range(hlo..z_hi),
        );
        let r = rng.gen_range(r_lo..r_hi);
        // Uniform direction on the sphere.
        let cos_t: f64 = rng.gen_range(-1.0..1.0);
        let sin_t = (1.0 - cos_t * cos_t).sqrt();
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        let mic = Point3::new(
            source.x + r * sin_t * phi.cos(),
            source.y + r * sin_t * phi.sin(),
            source.z + r * cos_t,
        );
        let pair = SourceReceiverPair::new(source, mic);
        if pair.validate(&room).is_ok() {
            return Ok((room, pair));
        }
    }
    Err(Error::GeometryInfeasible(format!(
        "no valid configuration for target {target_distance} m after {REJECTION_BUDGET} attempts"
    )))
}

fn draw_room<R: Rng>(rng: &mut R, materials: &MaterialTable) -> RoomSpec {
    let (wlo, whi) = RoomSpec::WIDTH_RANGE;
    let (hlo, hhi) = RoomSpec::HEIGHT_RANGE;
    let pick = |rng: &mut R, list: &[crate::materials::Material]| {
        list[rng.gen_range(0..list.len())].absorption
    };
    let absorption = [
        pick(rng, &materials.walls),
        pick(rng, &materials.walls),
        pick(rng, &materials.walls),
        pick(rng, &materials.walls),
        pick(rng, &materials.floors),
        pick(rng, &materials.ceilings),
    ];
    RoomSpec {
        width: rng.gen_range(wlo..whi),
        length: rng.gen_range(wlo..whi),
        height: rng.gen_range(hlo..hhi),
        absorption,
    }
}
