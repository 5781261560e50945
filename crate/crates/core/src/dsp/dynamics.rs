use super::loudness::{measure_loudness, Loudness};
use super::AudioBuffer;

/// Static gain to bring the integrated loudness to `target_lufs`.
///
/// Silent input is returned unchanged together with a warning.
pub fn apply_volume(buf: &AudioBuffer, target_lufs: f64) -> (AudioBuffer, Option<String>) {
    match measure_loudness(buf) {
        Loudness::Silence => (
            buf.clone(),
            Some(format!(
                "Volume({target_lufs}) skipped: input is silent, loudness cannot be measured"
            )),
        ),
        Loudness::Lufs(measured) => {
            let gain = 10f64.powf((target_lufs - measured) / 20.0);
            (buf.scaled(gain as f32), None)
        }
    }
}

/// Feed-forward hard-knee compressor.
///
/// The detector follows the per-frame peak across channels with separate
/// exponential attack and release time constants. Gain in dB is
/// `min(0, (threshold - env_db) * (1 - 1/ratio))`; no makeup gain.
pub fn apply_compressor(
    buf: &AudioBuffer,
    threshold_db: f64,
    ratio: f64,
    attack_ms: f64,
    release_ms: f64,
) -> AudioBuffer {
    let rate = buf.sample_rate() as f64;
    let coeff = |ms: f64| (-1.0 / (ms.max(1e-3) * 1e-3 * rate)).exp();
    let attack = coeff(attack_ms);
    let release = coeff(release_ms);
    let slope = 1.0 - 1.0 / ratio;

    let mut out = buf.clone();
    let frames = buf.frames();
    let mut env = 0.0f64;
    for i in 0..frames {
        let level = buf
            .channels()
            .iter()
            .fold(0.0f64, |m, c| m.max(c[i].abs() as f64));
        let k = if level > env { attack } else { release };
        env = k * env + (1.0 - k) * level;

        if env <= 0.0 || slope <= 0.0 {
            continue;
        }
        let env_db = 20.0 * env.log10();
        let gain_db = ((threshold_db - env_db) * slope).min(0.0);
        if gain_db < 0.0 {
            let gain = 10f64.powf(gain_db / 20.0);
            for channel in out.channels_mut() {
                channel[i] = (channel[i] as f64 * gain) as f32;
            }
        }
    }
    out
}
