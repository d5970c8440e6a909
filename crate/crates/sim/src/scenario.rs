//! Entry point: one scenario in, one metrics row out.

use beaconmac_analytic::{max_allowable_mac_loss, min_frame_duration};
use beaconmac_core::{Protocol, ScenarioConfig};

use crate::error::SimError;
use crate::metrics::RunMetrics;
use crate::proposed::{run_proposed, voice_pending};
use crate::psm::run_psm;
use crate::wlan::run_always_awake;
use crate::world::World;

/// Realtime frame length used for `cfg`: the configured one, or the
/// shortest meeting the voice loss target.
pub fn realtime_frame_minislots(cfg: &ScenarioConfig) -> Result<u32, SimError> {
    if let Some(t) = cfg.t_rf_minislots {
        return Ok(t);
    }
    if cfg.n_realtime == 0 {
        return Ok(0);
    }
    let p = &cfg.params;
    let star = max_allowable_mac_loss(p.delta_star, p.delta_ch)?;
    Ok(min_frame_duration(p, cfg.n_realtime, star)?.t_rf)
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunMetrics, SimError> {
    cfg.validate()?;
    let mut world = World::new(cfg);
    match cfg.protocol {
        Protocol::Proposed => {
            let t_rf = realtime_frame_minislots(cfg)?;
            let p = &cfg.params;
            if t_rf as u64 * p.mini_slot_us >= p.t_rb_us() {
                return Err(SimError::Invalid(format!("realtime frame of {t_rf} mini-slots does not fit a realtime beacon")));
            }
            run_proposed(&mut world, t_rf);
            let pending = voice_pending(&world);
            Ok(world.finish(pending))
        }
        Protocol::Psm => {
            run_psm(&mut world);
            Ok(world.finish(0))
        }
        Protocol::Dcf => {
            run_always_awake(&mut world, false);
            Ok(world.finish(0))
        }
        Protocol::Edca => {
            run_always_awake(&mut world, true);
            Ok(world.finish(0))
        }
    }
}
