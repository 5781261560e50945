//! Windowed-sinc sample rate conversion.
//!
//! Each output sample is a 32-tap dot product with a Kaiser-windowed sinc
//! centred on its fractional source position. For rational ratios with a
//! manageable number of phases the kernels are precomputed per phase.

use std::f64::consts::PI;

use super::AudioBuffer;

const TAPS: usize = 32;
const HALF: i64 = (TAPS / 2) as i64;
const KAISER_BETA: f64 = 8.0;
/// Fraction of the lower Nyquist frequency kept as passband.
const ROLLOFF: f64 = 0.94;
const MAX_PHASES: u64 = 4096;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Zeroth-order modified Bessel function of the first kind.
fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let half = x / 2.0;
    for k in 1..64 {
        term *= (half / k as f64).powi(2);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

struct Kernel {
    cutoff: f64,
    norm: f64,
}

impl Kernel {
    fn new(cutoff: f64) -> Self {
        Self {
            cutoff,
            norm: bessel_i0(KAISER_BETA),
        }
    }

    /// Taps for a source position `floor + frac`, covering source indices
    /// `floor - 15 ..= floor + 16`. Normalized to unit DC gain.
    fn taps(&self, frac: f64) -> [f64; TAPS] {
        let mut taps = [0.0; TAPS];
        for (k, tap) in taps.iter_mut().enumerate() {
            let x = (k as i64 - HALF + 1) as f64 - frac;
            let r = x / HALF as f64;
            let window = if r.abs() >= 1.0 {
                0.0
            } else {
                bessel_i0(KAISER_BETA * (1.0 - r * r).sqrt()) / self.norm
            };
            let arg = PI * self.cutoff * x;
            let sinc = if arg.abs() < 1e-12 {
                1.0
            } else {
                arg.sin() / arg
            };
            *tap = self.cutoff * sinc * window;
        }
        let sum: f64 = taps.iter().sum();
        taps.iter_mut().for_each(|t| *t /= sum);
        taps
    }
}

fn convolve(source: &[f32], floor: i64, taps: &[f64; TAPS]) -> f32 {
    let mut acc = 0.0;
    for (k, tap) in taps.iter().enumerate() {
        let idx = floor - HALF + 1 + k as i64;
        if idx >= 0 && (idx as usize) < source.len() {
            acc += source[idx as usize] as f64 * tap;
        }
    }
    acc as f32
}

/// Convert `buf` to `target_rate`. Output length is
/// `round(frames * target_rate / source_rate)`.
pub fn resample(buf: &AudioBuffer, target_rate: u32) -> AudioBuffer {
    let source_rate = buf.sample_rate();
    if target_rate == source_rate || target_rate == 0 {
        return buf.clone();
    }
    let g = gcd(source_rate as u64, target_rate as u64);
    let up = target_rate as u64 / g;
    let down = source_rate as u64 / g;
    let out_len = ((buf.frames() as u128 * target_rate as u128 + source_rate as u128 / 2)
        / source_rate as u128) as usize;
    let kernel = Kernel::new((target_rate as f64 / source_rate as f64).min(1.0) * ROLLOFF);

    // Output n sits at source position n * down / up.
    let position = |n: usize| -> (i64, u64) {
        let num = n as u64 * down;
        ((num / up) as i64, num % up)
    };

    let table: Option<Vec<[f64; TAPS]>> =
        (up <= MAX_PHASES).then(|| (0..up).map(|p| kernel.taps(p as f64 / up as f64)).collect());

    let channels = buf
        .channels()
        .iter()
        .map(|source| {
            (0..out_len)
                .map(|n| {
                    let (floor, phase) = position(n);
                    match &table {
                        Some(table) => convolve(source, floor, &table[phase as usize]),
                        None => convolve(source, floor, &kernel.taps(phase as f64 / up as f64)),
                    }
                })
                .collect()
        })
        .collect();
    AudioBuffer::new(target_rate, channels).expect("valid target rate")
}
