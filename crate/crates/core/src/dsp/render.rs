use std::collections::HashMap;

use rayon::prelude::*;

use super::{
    apply_compressor, apply_high_pass, apply_low_pass, apply_peak_filter, apply_reverb,
    apply_volume, place_event, resample, AudioBuffer, DspError,
};
use crate::script::{has_errors, validate_for_rate, AssetIndex, Diagnostic, Method, ScriptAst};

pub const DEFAULT_SAMPLE_RATE: u32 = 48000;

/// Where rendered assets come from.
pub trait AssetSource: AssetIndex + Sync {
    fn load(&self, asset_ref: &str) -> Result<AudioBuffer, RenderError>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutputLength {
    /// End of the longest track.
    Auto,
    Seconds(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderSession {
    pub sample_rate: u32,
    pub length: OutputLength,
}

impl Default for RenderSession {
    fn default() -> Self {
        Self {
            sample_rate: DEFAULT_SAMPLE_RATE,
            length: OutputLength::Auto,
        }
    }
}

impl RenderSession {
    pub fn with_rate(sample_rate: u32) -> Self {
        Self {
            sample_rate,
            ..Self::default()
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("script has {} validation error(s)", .0.iter().filter(|d| d.is_error()).count())]
    Validation(Vec<Diagnostic>),
    #[error("asset '{0}' is not available")]
    MissingAsset(String),
    #[error("cannot read asset '{asset}': {message}")]
    Unreadable { asset: String, message: String },
    #[error("explicit output length must be > 0 seconds")]
    InvalidLength,
    #[error(transparent)]
    Dsp(#[from] DspError),
}

#[derive(Debug, Clone)]
pub struct Rendered {
    pub buffer: AudioBuffer,
    pub warnings: Vec<String>,
}

/// In-memory asset table.
#[derive(Debug, Clone, Default)]
pub struct MemoryAssets {
    assets: HashMap<String, AudioBuffer>,
}

impl MemoryAssets {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, buf: AudioBuffer) -> &mut Self {
        self.assets.insert(name.into(), buf);
        self
    }
}

impl AssetIndex for MemoryAssets {
    fn contains_asset(&self, name: &str) -> bool {
        self.assets.contains_key(name)
    }
}

impl AssetSource for MemoryAssets {
    fn load(&self, asset_ref: &str) -> Result<AudioBuffer, RenderError> {
        self.assets
            .get(asset_ref)
            .cloned()
            .ok_or_else(|| RenderError::MissingAsset(asset_ref.to_string()))
    }
}

/// Render one track to an event placed on the timeline.
fn render_track(
    track: &crate::script::Track,
    assets: &dyn AssetSource,
    sample_rate: u32,
) -> Result<(AudioBuffer, Vec<String>), RenderError> {
    let mut warnings = Vec::new();
    let mut buf = resample(&assets.load(&track.asset_ref)?, sample_rate);
    for op in &track.chain {
        let a = &op.args;
        buf = match op.method {
            Method::Volume => {
                let (out, warning) = apply_volume(&buf, a[0]);
                warnings.extend(warning.map(|w| format!("{}: {w}", track.asset_ref)));
                out
            }
            Method::Compressor => apply_compressor(&buf, a[0], a[1], a[2], a[3]),
            Method::Reverb => apply_reverb(&buf, a[0], a[1]),
            Method::PeakFilter => apply_peak_filter(&buf, a[0], a[1], a[2])?,
            Method::LowPassFilter => apply_low_pass(&buf, a[0])?,
            Method::HighPassFilter => apply_high_pass(&buf, a[0])?,
            Method::StartAt | Method::StopAt => continue,
        };
    }
    let start = track.last_op(Method::StartAt).map_or(0.0, |op| op.args[0]);
    let stop = track.last_op(Method::StopAt);
    let placed = place_event(
        &buf,
        start,
        stop.map(|op| op.args[0]),
        stop.and_then(|op| op.args.get(1).copied()),
    )?;
    Ok((placed, warnings))
}

/// Render a script to a master buffer.
///
/// Tracks are processed independently (in parallel) and summed in script
/// order in a single pass. Mono tracks are duplicated to both channels when
/// any track is stereo. The master is not normalized or clipped.
pub fn render(
    ast: &ScriptAst,
    assets: &dyn AssetSource,
    session: &RenderSession,
) -> Result<Rendered, RenderError> {
    let mut warnings: Vec<String> = Vec::new();
    let diagnostics = validate_for_rate(ast, assets, session.sample_rate);
    if has_errors(&diagnostics) {
        return Err(RenderError::Validation(diagnostics));
    }
    warnings.extend(diagnostics.iter().map(ToString::to_string));
    if let OutputLength::Seconds(s) = session.length {
        if !(s > 0.0) {
            return Err(RenderError::InvalidLength);
        }
    }

    let tracks: Vec<(AudioBuffer, Vec<String>)> = ast
        .tracks
        .par_iter()
        .map(|t| render_track(t, assets, session.sample_rate))
        .collect::<Result<_, _>>()?;

    let channels = tracks
        .iter()
        .map(|(b, _)| b.num_channels())
        .max()
        .unwrap_or(1);
    let frames = match session.length {
        OutputLength::Auto => tracks.iter().map(|(b, _)| b.frames()).max().unwrap_or(0),
        OutputLength::Seconds(s) => (s * session.sample_rate as f64).round() as usize,
    };

    let mut master = vec![vec![0.0f32; frames]; channels];
    for (buf, track_warnings) in tracks {
        warnings.extend(track_warnings);
        for (c, out) in master.iter_mut().enumerate() {
            let source = buf.channel(c.min(buf.num_channels() - 1));
            for (o, s) in out.iter_mut().zip(source) {
                *o += s;
            }
        }
    }

    let buffer = AudioBuffer::new(session.sample_rate, master)?;
    let peak = buffer.peak();
    if peak > 1.0 {
        warnings.push(format!(
            "master peak {:.2} dBFS exceeds full scale; integer export will clip",
            20.0 * (peak as f64).log10()
        ));
    }
    Ok(Rendered { buffer, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::script::{parse_script, Track};
    use std::f64::consts::PI;

    fn tone(rate: u32, secs: f64, freq: f64) -> AudioBuffer {
        let n = (secs * rate as f64) as usize;
        let s = (0..n)
            .map(|i| (0.25 * (2.0 * PI * freq * i as f64 / rate as f64).sin()) as f32)
            .collect();
        AudioBuffer::mono(rate, s).unwrap()
    }

    fn assets() -> MemoryAssets {
        let mut a = MemoryAssets::new();
        a.insert("coin", tone(44100, 0.5, 440.0))
            .insert("thud", tone(48000, 0.3, 90.0))
            .insert(
                "stereo",
                AudioBuffer::new(48000, vec![vec![0.1; 4800], vec![-0.1; 4800]]).unwrap(),
            );
        a
    }

    #[test]
    fn single_track_passthrough_is_resampled_asset() {
        let ast = parse_script("coin").unwrap();
        let out = render(&ast, &assets(), &RenderSession::default()).unwrap();
        assert_eq!(out.buffer, resample(&assets().load("coin").unwrap(), 48000));
    }

    #[test]
    fn duplicate_tracks_double_the_signal() {
        let assets = assets();
        let one = render(
            &parse_script("coin.Reverb(0.5, 0.3)").unwrap(),
            &assets,
            &RenderSession::default(),
        )
        .unwrap();
        let two = render(
            &parse_script("coin.Reverb(0.5, 0.3)\ncoin.Reverb(0.5, 0.3)").unwrap(),
            &assets,
            &RenderSession::default(),
        )
        .unwrap();
        for (a, b) in one.buffer.channel(0).iter().zip(two.buffer.channel(0)) {
            assert!((2.0 * a - b).abs() <= 1e-6);
        }
    }

    #[test]
    fn mixdown_is_linear() {
        let assets = assets();
        let session = RenderSession {
            sample_rate: 48000,
            length: OutputLength::Seconds(1.0),
        };
        let a = "coin.Compressor(-30, 4, 5, 50).StartAt(0.1)";
        let b = "thud.LowPassFilter(500).StartAt(0.3)";
        let ra = render(&parse_script(a).unwrap(), &assets, &session)
            .unwrap()
            .buffer;
        let rb = render(&parse_script(b).unwrap(), &assets, &session)
            .unwrap()
            .buffer;
        let rab = render(
            &parse_script(&format!("{a}\n{b}")).unwrap(),
            &assets,
            &session,
        )
        .unwrap()
        .buffer;
        for i in 0..rab.frames() {
            let sum = ra.channel(0)[i] + rb.channel(0)[i];
            assert!((sum - rab.channel(0)[i]).abs() <= 1e-6);
        }
    }

    #[test]
    fn placement_is_an_attribute() {
        let assets = assets();
        let session = RenderSession::default();
        let early = render(
            &parse_script("thud.StartAt(0.5).HighPassFilter(200)").unwrap(),
            &assets,
            &session,
        )
        .unwrap();
        let late = render(
            &parse_script("thud.HighPassFilter(200).StartAt(0.5)").unwrap(),
            &assets,
            &session,
        )
        .unwrap();
        assert_eq!(early.buffer, late.buffer);
        assert_eq!(early.buffer.frames(), 24000 + 14400);
    }

    #[test]
    fn mono_tracks_spread_to_stereo_master() {
        let out = render(
            &parse_script("stereo\nthud").unwrap(),
            &assets(),
            &RenderSession::default(),
        )
        .unwrap();
        assert_eq!(out.buffer.num_channels(), 2);
        let thud = assets().load("thud").unwrap();
        assert_eq!(out.buffer.channel(1)[10], thud.channel(0)[10] - 0.1);
    }

    #[test]
    fn errors_surface() {
        let assets = assets();
        let session = RenderSession::default();
        let err = render(&parse_script("glass").unwrap(), &assets, &session).unwrap_err();
        assert!(matches!(err, RenderError::Validation(_)));
        let err = render(
            &parse_script("coin.LowPassFilter(24000)").unwrap(),
            &assets,
            &session,
        )
        .unwrap_err();
        assert!(matches!(err, RenderError::Validation(_)));
        let bad_len = RenderSession {
            sample_rate: 48000,
            length: OutputLength::Seconds(0.0),
        };
        assert!(matches!(
            render(&parse_script("coin").unwrap(), &assets, &bad_len),
            Err(RenderError::InvalidLength)
        ));
    }

    #[test]
    fn clipping_and_repeat_placement_warn() {
        let mut a = MemoryAssets::new();
        a.insert("loud", AudioBuffer::mono(48000, vec![0.9; 4800]).unwrap());
        let ast = ScriptAst::new(vec![
            Track::new("loud"),
            Track::new("loud")
                .with(Method::StartAt, &[0.0])
                .with(Method::StartAt, &[0.0]),
        ]);
        let out = render(&ast, &a, &RenderSession::default()).unwrap();
        assert_eq!(out.warnings.len(), 2);
        assert!(out.warnings[1].contains("exceeds full scale"));
    }
}
