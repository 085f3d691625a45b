//! Capacity matrices for a group of users travelling along a line of base
//! stations, some of which are removed to open coverage gaps.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::allocation::allocate_proportional_fair;
use super::radio::{path_loss_db, shannon_rate_mbps, RadioParams};
use super::ChannelError;
use crate::error::FormatError;
use crate::kv::KvConfig;
use crate::model::Scenario;

/// Rate samples taken along the stretch of track covered in one slot.
pub const SAMPLES_PER_SLOT: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub num_base_stations: usize,
    pub inter_site_distance_m: f64,
    pub num_users: usize,
    pub num_removed: usize,
    /// Stations at either end of the line that are never removed.
    pub protected_edge_count: usize,
    pub shadowing_sigma_db: f64,
    pub slot_seconds: f64,
    /// Defaults to one segment per base station.
    pub segment_count: Option<usize>,
    pub rng_seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            num_base_stations: 44,
            inter_site_distance_m: 1500.0,
            num_users: 4,
            num_removed: 0,
            protected_edge_count: 2,
            shadowing_sigma_db: 10.0,
            slot_seconds: 10.0,
            segment_count: None,
            rng_seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn segment_count(&self) -> usize {
        self.segment_count.unwrap_or(self.num_base_stations)
    }

    /// Number of stations eligible for removal.
    pub fn removable(&self) -> usize {
        self.num_base_stations.saturating_sub(2 * self.protected_edge_count)
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let fail = |m: String| Err(ChannelError::Config(m));
        if self.num_base_stations == 0 {
            return fail("numBaseStations must be at least 1".into());
        }
        if self.num_users == 0 {
            return fail("numUsers must be at least 1".into());
        }
        if !(self.inter_site_distance_m.is_finite() && self.inter_site_distance_m > 0.0) {
            return fail("interSiteDistanceM must be positive".into());
        }
        if !(self.shadowing_sigma_db.is_finite() && self.shadowing_sigma_db >= 0.0) {
            return fail("shadowingSigmaDb must be nonnegative".into());
        }
        if !(self.slot_seconds.is_finite() && self.slot_seconds > 0.0) {
            return fail("slotSeconds must be positive".into());
        }
        if self.num_removed > self.removable() {
            return fail(format!(
                "numRemoved {} exceeds the {} removable stations",
                self.num_removed,
                self.removable()
            ));
        }
        let segments = self.segment_count();
        if segments == 0 || segments > self.num_base_stations {
            return fail(format!(
                "segmentCount {segments} must be in 1..={}",
                self.num_base_stations
            ));
        }
        Ok(())
    }

    /// Reads the keys named after the fields (`numBaseStations`, ...).
    pub fn apply_kv(&mut self, kv: &mut KvConfig) -> Result<(), FormatError> {
        kv.set("numBaseStations", &mut self.num_base_stations)?;
        kv.set("interSiteDistanceM", &mut self.inter_site_distance_m)?;
        kv.set("numUsers", &mut self.num_users)?;
        kv.set("numRemoved", &mut self.num_removed)?;
        kv.set("protectedEdgeCount", &mut self.protected_edge_count)?;
        kv.set("shadowingSigmaDb", &mut self.shadowing_sigma_db)?;
        kv.set("slotSeconds", &mut self.slot_seconds)?;
        if let Some(n) = kv.take("segmentCount")? {
            self.segment_count = Some(n);
        }
        kv.set("rngSeed", &mut self.rng_seed)?;
        Ok(())
    }
}

impl RadioParams {
    pub fn apply_kv(&mut self, kv: &mut KvConfig) -> Result<(), FormatError> {
        kv.set("bandwidthHz", &mut self.bandwidth_hz)?;
        kv.set("txPowerDbm", &mut self.tx_power_dbm)?;
        kv.set("antennaGainDb", &mut self.antenna_gain_db)?;
        kv.set("noisePsdDbmHz", &mut self.noise_psd_dbm_hz)?;
        kv.set("interferencePsdDbmHz", &mut self.interference_psd_dbm_hz)?;
        kv.set("cellCapMbps", &mut self.cell_cap_mbps)?;
        Ok(())
    }
}

/// Parses a scenario/radio config file. Keys not belonging to either are errors.
pub fn parse_channel_config(text: &str) -> Result<(ScenarioConfig, RadioParams), FormatError> {
    let mut kv = KvConfig::parse(text)?;
    let mut config = ScenarioConfig::default();
    let mut params = RadioParams::default();
    config.apply_kv(&mut kv)?;
    params.apply_kv(&mut kv)?;
    kv.finish()?;
    Ok((config, params))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuiltScenario {
    pub scenario: Scenario,
    /// Indices of the removed stations, ascending.
    pub removed: Vec<usize>,
    /// Station each slot was served by (`None` when every station is removed).
    pub serving_station: Vec<Option<usize>>,
}

/// Builds the per-user capacity matrix.
///
/// Slot `t` covers the stretch of track centred on station `t`, one
/// inter-site distance long. The group attaches for the whole slot to the
/// active station closest to that centre. Each user draws one log-normal
/// shadowing value per slot; the rate is sampled at [`SAMPLES_PER_SLOT`]
/// points along the stretch, shared among the users of the cell and
/// averaged. Capacity is that mean rate times the slot length, in MB.
pub fn build_scenario(config: &ScenarioConfig, params: &RadioParams) -> Result<BuiltScenario, ChannelError> {
    config.validate()?;
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);

    let stations = config.num_base_stations;
    let mut removed: Vec<usize> = sample(&mut rng, config.removable(), config.num_removed)
        .into_iter()
        .map(|i| i + config.protected_edge_count)
        .collect();
    removed.sort_unstable();
    let mut active = vec![true; stations];
    for &r in &removed {
        active[r] = false;
    }

    let shadowing = Normal::new(0.0, config.shadowing_sigma_db).map_err(|e| ChannelError::Config(e.to_string()))?;
    let isd = config.inter_site_distance_m;
    let num_slots = stations;
    let users = config.num_users;
    let mut capacity = vec![vec![0.0; num_slots]; users];
    let mut serving_station = Vec::with_capacity(num_slots);

    for t in 0..num_slots {
        let centre = t as f64 * isd;
        let serving = nearest_active(&active, t);
        serving_station.push(serving);
        let shadow: Vec<f64> = (0..users).map(|_| shadowing.sample(&mut rng)).collect();
        let Some(station) = serving else { continue };
        let station_pos = station as f64 * isd;

        let mut mean_rate = vec![0.0; users];
        let mut phy = vec![0.0; users];
        for k in 0..SAMPLES_PER_SLOT {
            let x = centre - isd / 2.0 + (k as f64 + 0.5) * isd / SAMPLES_PER_SLOT as f64;
            let distance_km = (x - station_pos).abs() / 1000.0;
            for (u, rate) in phy.iter_mut().enumerate() {
                *rate = shannon_rate_mbps(params, path_loss_db(distance_km, shadow[u])?);
            }
            for (acc, share) in mean_rate
                .iter_mut()
                .zip(allocate_proportional_fair(&phy, params.cell_cap_mbps))
            {
                *acc += share;
            }
        }
        for (row, rate) in capacity.iter_mut().zip(&mean_rate) {
            row[t] = rate / SAMPLES_PER_SLOT as f64 * config.slot_seconds / 8.0;
        }
    }

    let scenario = Scenario::new(capacity, config.segment_count(), config.slot_seconds)
        .map_err(|e| ChannelError::Config(e.to_string()))?;
    Ok(BuiltScenario {
        scenario,
        removed,
        serving_station,
    })
}

/// Closest active station to station `t`'s position; ties go to the lower index.
fn nearest_active(active: &[bool], t: usize) -> Option<usize> {
    (0..active.len())
        .filter(|&i| active[i])
        .min_by_key(|&i| (i.abs_diff(t), i))
}
