//! Uncoded Gray-mapped square QAM over AWGN.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BerError {
    #[error("unsupported modulation order {0}; expected 4, 16 or 64")]
    UnsupportedOrder(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPoint {
    pub tx_power_proxy_db: f64,
    pub ber: f64,
}

/// Gaussian tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Exact bit error probability of Gray-coded square `order`-QAM at symbol
/// SNR `Es/N0 = snr_db`.
///
/// Closed form of Cho & Yoon (IEEE Trans. Commun., 2002): the BER of each
/// of the `log2 √M` bit levels of one √M-PAM rail, averaged.
pub fn qam_ber(snr_db: f64, order: u32) -> Result<f64, BerError> {
    let sqrt_m = match order {
        4 => 2u32,
        16 => 4,
        64 => 8,
        other => return Err(BerError::UnsupportedOrder(other)),
    };
    let levels = sqrt_m.trailing_zeros();
    let es_n0 = 10f64.powf(snr_db / 10.0);
    let arg = (3.0 * es_n0 / (2.0 * (order as f64 - 1.0))).sqrt();
    let rm = sqrt_m as f64;
    let mut total = 0.0;
    for k in 1..=levels {
        let pk = (1u32 << (k - 1)) as f64;
        let terms = ((1.0 - 2f64.powi(-(k as i32))) * rm) as u32;
        let mut acc = 0.0;
        for i in 0..terms {
            let ratio = i as f64 * pk / rm;
            let sign = if (ratio.floor() as u64).is_multiple_of(2) { 1.0 } else { -1.0 };
            let weight = pk - (ratio + 0.5).floor();
            acc += sign * weight * libm::erfc((2 * i + 1) as f64 * arg);
        }
        total += acc / rm;
    }
    Ok(total / levels as f64)
}

/// BER versus transmit-power proxy with an extra link gain of `gain_db`.
pub fn ber_curve(snr_db_grid: &[f64], gain_db: f64, order: u32) -> Result<Vec<BerPoint>, BerError> {
    snr_db_grid
        .iter()
        .map(|&s| Ok(BerPoint { tx_power_proxy_db: s, ber: qam_ber(s + gain_db, order)? }))
        .collect()
}
