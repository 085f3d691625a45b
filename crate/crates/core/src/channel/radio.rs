//! Link budget: log-distance path loss and Shannon capacity with a cell cap.

use super::ChannelError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioParams {
    pub bandwidth_hz: f64,
    pub tx_power_dbm: f64,
    pub antenna_gain_db: f64,
    pub noise_psd_dbm_hz: f64,
    pub interference_psd_dbm_hz: f64,
    /// Upper bound on the rate of a single user and on a cell's aggregate.
    pub cell_cap_mbps: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        RadioParams {
            bandwidth_hz: 1.0e7,
            tx_power_dbm: 46.0,
            antenna_gain_db: 0.0,
            noise_psd_dbm_hz: -174.0,
            interference_psd_dbm_hz: -149.0,
            cell_cap_mbps: 30.0,
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<(), ChannelError> {
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            return Err(ChannelError::Config("bandwidthHz must be positive".into()));
        }
        if !(self.cell_cap_mbps.is_finite() && self.cell_cap_mbps > 0.0) {
            return Err(ChannelError::Config("cellCapMbps must be positive".into()));
        }
        let finite = [
            self.tx_power_dbm,
            self.antenna_gain_db,
            self.noise_psd_dbm_hz,
            self.interference_psd_dbm_hz,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(ChannelError::Config("power levels must be finite".into()));
        }
        Ok(())
    }

    /// Noise plus interference power over the channel bandwidth, in dBm.
    pub fn noise_plus_interference_dbm(&self) -> f64 {
        let band_db = 10.0 * self.bandwidth_hz.log10();
        let noise_mw = dbm_to_mw(self.noise_psd_dbm_hz + band_db);
        let interference_mw = dbm_to_mw(self.interference_psd_dbm_hz + band_db);
        mw_to_dbm(noise_mw + interference_mw)
    }
}

fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Macro-cell path loss `128.1 + 37.6 log10(d) + shadowing` for `d` in km.
pub fn path_loss_db(distance_km: f64, shadowing_db: f64) -> Result<f64, ChannelError> {
    if distance_km.is_nan() || distance_km <= 0.0 {
        return Err(ChannelError::NonPositiveDistance(distance_km));
    }
    Ok(128.1 + 37.6 * distance_km.log10() + shadowing_db)
}

/// Shannon rate in Mbit/s before the cell cap is applied.
pub fn uncapped_rate_mbps(params: &RadioParams, path_loss_db: f64) -> f64 {
    let rx_dbm = params.tx_power_dbm + params.antenna_gain_db - path_loss_db;
    let sinr_db = rx_dbm - params.noise_plus_interference_dbm();
    let sinr = 10f64.powf(sinr_db / 10.0);
    params.bandwidth_hz * (1.0 + sinr).log2() / 1.0e6
}

/// Shannon rate in Mbit/s, clamped to `[0, cell_cap_mbps]`. An infinite path
/// loss (no coverage) yields 0.
pub fn shannon_rate_mbps(params: &RadioParams, path_loss_db: f64) -> f64 {
    let rate = uncapped_rate_mbps(params, path_loss_db);
    if rate.is_nan() {
        return 0.0;
    }
    rate.clamp(0.0, params.cell_cap_mbps)
}
