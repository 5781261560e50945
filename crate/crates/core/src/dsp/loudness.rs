//! Integrated loudness per ITU-R BS.1770-4.
//!
//! K-weighting (high shelf followed by high pass), mean square over 400 ms
//! blocks with 75 % overlap, an absolute gate at -70 LUFS and a relative gate
//! 10 LU below the absolutely gated loudness.

use std::f64::consts::PI;
use std::fmt;

use super::biquad::Biquad;
use super::AudioBuffer;

const ABSOLUTE_GATE_LUFS: f64 = -70.0;
const RELATIVE_GATE_LU: f64 = -10.0;

/// Result of a loudness measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Loudness {
    Lufs(f64),
    /// Every gating block fell below the absolute gate (or the input is all zeros).
    Silence,
}

impl Loudness {
    pub fn lufs(self) -> Option<f64> {
        match self {
            Loudness::Lufs(v) => Some(v),
            Loudness::Silence => None,
        }
    }
}

impl fmt::Display for Loudness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Loudness::Lufs(v) => write!(f, "{v:.3}"),
            Loudness::Silence => f.write_str("silent"),
        }
    }
}

fn power_to_lufs(power: f64) -> f64 {
    -0.691 + 10.0 * power.log10()
}

/// Stage 1: shelving filter modelling the acoustic effect of the head.
fn high_shelf(sample_rate: f64) -> Biquad {
    let gain_db = 3.999_843_853_973_347;
    let q = 0.707_175_236_955_419_3;
    let center_hz = 1_681.974_450_955_532;
    let k = (PI * center_hz / sample_rate).tan();
    let vh = 10f64.powf(gain_db / 20.0);
    let vb = vh.powf(0.499_666_774_154_541_6);
    let a0 = 1.0 + k / q + k * k;
    Biquad::from_coefficients(
        (vh + vb * k / q + k * k) / a0,
        2.0 * (k * k - vh) / a0,
        (vh - vb * k / q + k * k) / a0,
        2.0 * (k * k - 1.0) / a0,
        (1.0 - k / q + k * k) / a0,
    )
}

/// Stage 2: RLB high pass.
fn rlb_high_pass(sample_rate: f64) -> Biquad {
    let q = 0.500_327_037_325_395_3;
    let center_hz = 38.135_470_876_139_82;
    let k = (PI * center_hz / sample_rate).tan();
    let a0 = 1.0 + k / q + k * k;
    Biquad::from_coefficients(
        1.0,
        -2.0,
        1.0,
        2.0 * (k * k - 1.0) / a0,
        (1.0 - k / q + k * k) / a0,
    )
}

/// Squared K-weighted samples of one channel.
fn k_weighted_squares(samples: &[f32], sample_rate: f64) -> Vec<f64> {
    let mut shelf = high_shelf(sample_rate).state();
    let mut hp = rlb_high_pass(sample_rate).state();
    samples
        .iter()
        .map(|&x| {
            let y = hp.tick(shelf.tick(x as f64));
            y * y
        })
        .collect()
}

/// Integrated loudness of a mono or stereo buffer.
///
/// Both channels carry weight 1.0. Inputs shorter than one 400 ms block are
/// measured ungated over their full length.
pub fn measure_loudness(buf: &AudioBuffer) -> Loudness {
    let rate = buf.sample_rate() as f64;
    let frames = buf.frames();
    let squares: Vec<Vec<f64>> = buf
        .channels()
        .iter()
        .map(|c| k_weighted_squares(c, rate))
        .collect();

    let hop = ((rate * 0.1).round() as usize).max(1);
    let block = 4 * hop;
    if frames < block {
        if frames == 0 {
            return Loudness::Silence;
        }
        let power: f64 = squares.iter().map(|c| c.iter().sum::<f64>()).sum::<f64>() / frames as f64;
        return if power > 0.0 {
            Loudness::Lufs(power_to_lufs(power))
        } else {
            Loudness::Silence
        };
    }

    // Per 100 ms hop: channel-summed energy; each block is four hops.
    let hops = frames / hop;
    let hop_energy: Vec<f64> = (0..hops)
        .map(|h| {
            squares
                .iter()
                .map(|c| c[h * hop..(h + 1) * hop].iter().sum::<f64>())
                .sum()
        })
        .collect();
    let blocks: Vec<f64> = hop_energy
        .windows(4)
        .map(|w| w.iter().sum::<f64>() / block as f64)
        .collect();

    let above_absolute: Vec<f64> = blocks
        .into_iter()
        .filter(|&p| p > 0.0 && power_to_lufs(p) > ABSOLUTE_GATE_LUFS)
        .collect();
    if above_absolute.is_empty() {
        return Loudness::Silence;
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let relative_gate = power_to_lufs(mean(&above_absolute)) + RELATIVE_GATE_LU;
    let gated: Vec<f64> = above_absolute
        .into_iter()
        .filter(|&p| power_to_lufs(p) > relative_gate)
        .collect();
    Loudness::Lufs(power_to_lufs(mean(&gated)))
}
