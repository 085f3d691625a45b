/// Shares a cell between users in equal time fractions and scales the result
/// down when it would exceed the cell cap.
///
/// With users that see statistically identical channels, proportional-fair
/// scheduling reduces to this round-robin share.
pub fn allocate_proportional_fair(user_phy_rates_mbps: &[f64], cell_cap_mbps: f64) -> Vec<f64> {
    if user_phy_rates_mbps.is_empty() {
        return Vec::new();
    }
    let n = user_phy_rates_mbps.len() as f64;
    let mut shares: Vec<f64> = user_phy_rates_mbps.iter().map(|r| r.max(0.0) / n).collect();
    let total: f64 = shares.iter().sum();
    if total > cell_cap_mbps {
        let scale = cell_cap_mbps / total;
        shares.iter_mut().for_each(|s| *s *= scale);
    }
    shares
}
