//! Offline renderer: the eight processing methods, timeline placement,
//! resampling and mixdown.

mod biquad;
mod buffer;
mod dynamics;
mod loudness;
mod placement;
mod render;
mod resample;
mod reverb;

pub use biquad::{apply_high_pass, apply_low_pass, apply_peak_filter, Biquad, BiquadState};
pub use buffer::AudioBuffer;
pub use dynamics::{apply_compressor, apply_volume};
pub use loudness::{measure_loudness, Loudness};
pub use placement::{place_event, DEFAULT_FADE_OUT_S};
pub use render::{
    render, AssetSource, MemoryAssets, OutputLength, RenderError, RenderSession, Rendered,
    DEFAULT_SAMPLE_RATE,
};
pub use resample::resample;
pub use reverb::{apply_reverb, comb_feedback};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DspError {
    #[error("sample rate must be positive")]
    InvalidSampleRate,
    #[error("unsupported channel count {0} (expected 1 or 2)")]
    UnsupportedChannels(usize),
    #[error("channels have different lengths")]
    RaggedChannels,
    #[error("frequency {frequency} Hz must be in (0, {nyquist}) Hz")]
    FrequencyOutOfRange { frequency: f64, nyquist: f64 },
    #[error("{0}")]
    InvalidParameter(String),
}
