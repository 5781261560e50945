use super::{AudioBuffer, DspError};

pub const DEFAULT_FADE_OUT_S: f64 = 0.01;

/// Position an event on the session timeline.
///
/// The event starts at frame `round(start_at * rate)`. With `stop_at`, a
/// linear fade runs from gain 1 at `stop_at` (absolute timeline seconds) to
/// gain 0 at `stop_at + fade_out`, and the output ends there.
pub fn place_event(
    buf: &AudioBuffer,
    start_at: f64,
    stop_at: Option<f64>,
    fade_out: Option<f64>,
) -> Result<AudioBuffer, DspError> {
    if !(start_at >= 0.0) {
        return Err(DspError::InvalidParameter(format!(
            "start time must be ≥ 0, got {start_at}"
        )));
    }
    if let Some(stop) = stop_at {
        if !(stop > start_at) {
            return Err(DspError::InvalidParameter(format!(
                "stop time {stop} must be later than start time {start_at}"
            )));
        }
    }
    let fade = fade_out.unwrap_or(DEFAULT_FADE_OUT_S);
    if !(fade >= 0.0) {
        return Err(DspError::InvalidParameter(format!(
            "fade-out duration must be ≥ 0, got {fade}"
        )));
    }

    let rate = buf.sample_rate() as f64;
    let offset = (start_at * rate).round() as usize;
    let mut len = offset + buf.frames();
    if let Some(stop) = stop_at {
        len = len.min(((stop + fade) * rate).ceil() as usize);
    }

    let channels = buf
        .channels()
        .iter()
        .map(|source| {
            let mut out = vec![0.0f32; len];
            for (n, sample) in out.iter_mut().enumerate().skip(offset) {
                let value = source[n - offset];
                *sample = match stop_at {
                    None => value,
                    Some(stop) => (value as f64 * fade_gain(n as f64 / rate, stop, fade)) as f32,
                };
            }
            out
        })
        .collect();
    AudioBuffer::new(buf.sample_rate(), channels)
}

fn fade_gain(t: f64, stop: f64, fade: f64) -> f64 {
    if t <= stop {
        1.0
    } else if t < stop + fade {
        1.0 - (t - stop) / fade
    } else {
        0.0
    }
}
