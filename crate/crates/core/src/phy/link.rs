use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::channel::{received_power_mean, ChannelModel};
use crate::Result;

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Probability that a packet clears the sensitivity under Gaussian shadowing.
pub fn pdr_analytic(margin_db: f64, sigma_db: f64) -> f64 {
    if sigma_db == 0.0 {
        if margin_db >= 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        std_normal_cdf(margin_db / sigma_db)
    }
}

/// Link margin (dB) of a transmission at `ptx_dbm` over `d_m`.
pub fn link_margin(ch: &ChannelModel, sensitivity_dbm: f64, ptx_dbm: f64, d_m: f64) -> Result<f64> {
    Ok(received_power_mean(ch, ptx_dbm, d_m)? - sensitivity_dbm)
}

/// Draw one shadowing realisation and decide delivery.
///
/// Consumes exactly one standard-normal variate from `rng`, even when the
/// channel has no shadowing.
pub fn sample_packet_outcome<R: Rng + ?Sized>(
    ch: &ChannelModel,
    sensitivity_dbm: f64,
    ptx_dbm: f64,
    d_m: f64,
    rng: &mut R,
) -> Result<bool> {
    let mean = received_power_mean(ch, ptx_dbm, d_m)?;
    let z: f64 = rng.sample(StandardNormal);
    let shadowing = ch.shadowing_sigma_db * z;
    Ok(mean - shadowing >= sensitivity_dbm)
}

/// Random stream dedicated to packet `seq` of a run seeded with `seed`.
///
/// Outcomes depend only on `(seed, seq)`, never on the step size or on how
/// many other draws happened before.
pub fn packet_rng(seed: u64, seq: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(seq);
    rng
}

/// Energy of one transmission: `V * I * t`, in joules.
pub fn packet_energy(vdd_v: f64, i_tx_ma: f64, airtime_s: f64) -> f64 {
    vdd_v * (i_tx_ma / 1000.0) * airtime_s
}
