//! WAV reading (PCM 16/24-bit, 32-bit float) and writing (24-bit PCM or
//! 32-bit float).

use std::io::{Cursor, Seek, Write};
use std::path::Path;
use std::str::FromStr;

use hound::{SampleFormat as HoundFormat, WavReader, WavSpec, WavWriter};

use crate::dsp::{AudioBuffer, DspError};

#[derive(Debug, thiserror::Error)]
pub enum WavError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed WAV: {0}")]
    Format(String),
    #[error("unsupported WAV encoding: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Layout(#[from] DspError),
}

impl From<hound::Error> for WavError {
    fn from(err: hound::Error) -> Self {
        match err {
            hound::Error::IoError(e) => WavError::Io(e),
            hound::Error::Unsupported => WavError::Unsupported("format not supported".into()),
            other => WavError::Format(other.to_string()),
        }
    }
}

/// Export encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleFormat {
    #[default]
    Pcm24,
    Float32,
}

impl FromStr for SampleFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pcm24" => Ok(SampleFormat::Pcm24),
            "float32" => Ok(SampleFormat::Float32),
            other => Err(format!(
                "unknown sample format '{other}' (expected pcm24 or float32)"
            )),
        }
    }
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer, WavError> {
    decode(WavReader::open(path)?)
}

pub fn read_wav_bytes(bytes: &[u8]) -> Result<AudioBuffer, WavError> {
    decode(WavReader::new(Cursor::new(bytes))?)
}

fn decode<R: std::io::Read>(reader: WavReader<R>) -> Result<AudioBuffer, WavError> {
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 || channels > 2 {
        return Err(WavError::Unsupported(format!("{channels} channels")));
    }
    let interleaved: Vec<f32> = match (spec.sample_format, spec.bits_per_sample) {
        (HoundFormat::Float, 32) => reader.into_samples::<f32>().collect::<Result<_, _>>()?,
        (HoundFormat::Int, bits @ (16 | 24)) => {
            let scale = 1.0 / (1i64 << (bits - 1)) as f32;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f32 * scale))
                .collect::<Result<_, _>>()?
        }
        (format, bits) => {
            return Err(WavError::Unsupported(format!("{format:?} {bits}-bit")));
        }
    };
    let mut planar = vec![Vec::with_capacity(interleaved.len() / channels); channels];
    for frame in interleaved.chunks_exact(channels) {
        for (c, &s) in frame.iter().enumerate() {
            planar[c].push(s);
        }
    }
    Ok(AudioBuffer::new(spec.sample_rate, planar)?)
}

pub fn write_wav(
    path: impl AsRef<Path>,
    buf: &AudioBuffer,
    format: SampleFormat,
) -> Result<(), WavError> {
    let bytes = encode_wav(buf, format)?;
    std::fs::write(path, bytes)?;
    Ok(())
}

/// Encode to an in-memory WAV file. Integer output is hard-clipped to full scale.
pub fn encode_wav(buf: &AudioBuffer, format: SampleFormat) -> Result<Vec<u8>, WavError> {
    let mut cursor = Cursor::new(Vec::new());
    write_to(&mut cursor, buf, format)?;
    Ok(cursor.into_inner())
}

fn write_to<W: Write + Seek>(
    out: W,
    buf: &AudioBuffer,
    format: SampleFormat,
) -> Result<(), WavError> {
    let spec = WavSpec {
        channels: buf.num_channels() as u16,
        sample_rate: buf.sample_rate(),
        bits_per_sample: match format {
            SampleFormat::Pcm24 => 24,
            SampleFormat::Float32 => 32,
        },
        sample_format: match format {
            SampleFormat::Pcm24 => HoundFormat::Int,
            SampleFormat::Float32 => HoundFormat::Float,
        },
    };
    let mut writer = WavWriter::new(out, spec)?;
    const PCM24_MAX: f32 = 8_388_607.0;
    for i in 0..buf.frames() {
        for channel in buf.channels() {
            let s = channel[i];
            match format {
                SampleFormat::Pcm24 => {
                    writer.write_sample((s.clamp(-1.0, 1.0) * PCM24_MAX).round() as i32)?
                }
                SampleFormat::Float32 => writer.write_sample(s)?,
            }
        }
    }
    writer.finalize()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_round_trip_is_exact() {
        let buf =
            AudioBuffer::new(44100, vec![vec![0.1, -0.7, 1.5], vec![0.0, 0.25, -1.0]]).unwrap();
        let bytes = encode_wav(&buf, SampleFormat::Float32).unwrap();
        assert_eq!(read_wav_bytes(&bytes).unwrap(), buf);
    }

    #[test]
    fn pcm24_clips_and_quantizes() {
        let buf = AudioBuffer::mono(48000, vec![0.5, 2.0, -2.0, 0.0]).unwrap();
        let back = read_wav_bytes(&encode_wav(&buf, SampleFormat::Pcm24).unwrap()).unwrap();
        let c = back.channel(0);
        assert!((c[0] - 0.5).abs() < 1e-6);
        assert!((c[1] - 1.0).abs() < 1e-6);
        assert!((c[2] + 1.0).abs() < 1e-6);
        assert_eq!(c[3], 0.0);
    }

    #[test]
    fn pcm16_is_read() {
        let spec = WavSpec {
            channels: 1,
            sample_rate: 8000,
            bits_per_sample: 16,
            sample_format: HoundFormat::Int,
        };
        let mut cursor = Cursor::new(Vec::new());
        let mut w = WavWriter::new(&mut cursor, spec).unwrap();
        w.write_sample(16384i16).unwrap();
        w.write_sample(-32768i16).unwrap();
        w.finalize().unwrap();
        let buf = read_wav_bytes(cursor.get_ref()).unwrap();
        assert_eq!(buf.channel(0), &[0.5, -1.0]);
    }

    #[test]
    fn garbage_is_an_error() {
        assert!(read_wav_bytes(b"RIFF1234WAVEnope").is_err());
    }
}
