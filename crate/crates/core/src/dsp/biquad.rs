//! Second-order IIR sections with RBJ cookbook coefficients.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::{AudioBuffer, DspError};

/// Normalized biquad coefficients (a0 = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

/// Direct form I state.
#[derive(Debug, Clone)]
pub struct BiquadState {
    coeffs: Biquad,
    x1: f64,
    x2: f64,
    y1: f64,
    y2: f64,
}

impl BiquadState {
    #[inline]
    pub fn tick(&mut self, x: f64) -> f64 {
        let c = &self.coeffs;
        let y = c.b0 * x + c.b1 * self.x1 + c.b2 * self.x2 - c.a1 * self.y1 - c.a2 * self.y2;
        self.x2 = self.x1;
        self.x1 = x;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }
}

fn check_frequency(frequency: f64, sample_rate: u32) -> Result<(), DspError> {
    let nyquist = sample_rate as f64 / 2.0;
    if !(frequency > 0.0 && frequency < nyquist) {
        return Err(DspError::FrequencyOutOfRange { frequency, nyquist });
    }
    Ok(())
}

impl Biquad {
    pub fn from_coefficients(b0: f64, b1: f64, b2: f64, a1: f64, a2: f64) -> Self {
        Self { b0, b1, b2, a1, a2 }
    }

    fn normalized(b: [f64; 3], a: [f64; 3]) -> Self {
        Self {
            b0: b[0] / a[0],
            b1: b[1] / a[0],
            b2: b[2] / a[0],
            a1: a[1] / a[0],
            a2: a[2] / a[0],
        }
    }

    pub fn peaking(
        sample_rate: u32,
        frequency: f64,
        q: f64,
        gain_db: f64,
    ) -> Result<Self, DspError> {
        check_frequency(frequency, sample_rate)?;
        if !(q > 0.0) {
            return Err(DspError::InvalidParameter("q_factor must be > 0".into()));
        }
        let a = 10f64.powf(gain_db / 40.0);
        let w0 = 2.0 * PI * frequency / sample_rate as f64;
        let alpha = w0.sin() / (2.0 * q);
        let cos = w0.cos();
        Ok(Self::normalized(
            [1.0 + alpha * a, -2.0 * cos, 1.0 - alpha * a],
            [1.0 + alpha / a, -2.0 * cos, 1.0 - alpha / a],
        ))
    }

    pub fn low_pass(sample_rate: u32, frequency: f64, q: f64) -> Result<Self, DspError> {
        check_frequency(frequency, sample_rate)?;
        let w0 = 2.0 * PI * frequency / sample_rate as f64;
        let alpha = w0.sin() / (2.0 * q);
        let cos = w0.cos();
        Ok(Self::normalized(
            [(1.0 - cos) / 2.0, 1.0 - cos, (1.0 - cos) / 2.0],
            [1.0 + alpha, -2.0 * cos, 1.0 - alpha],
        ))
    }

    pub fn high_pass(sample_rate: u32, frequency: f64, q: f64) -> Result<Self, DspError> {
        check_frequency(frequency, sample_rate)?;
        let w0 = 2.0 * PI * frequency / sample_rate as f64;
        let alpha = w0.sin() / (2.0 * q);
        let cos = w0.cos();
        Ok(Self::normalized(
            [(1.0 + cos) / 2.0, -(1.0 + cos), (1.0 + cos) / 2.0],
            [1.0 + alpha, -2.0 * cos, 1.0 - alpha],
        ))
    }

    pub fn state(self) -> BiquadState {
        BiquadState {
            coeffs: self,
            x1: 0.0,
            x2: 0.0,
            y1: 0.0,
            y2: 0.0,
        }
    }

    /// Filter every channel independently, starting from rest.
    pub fn apply(self, buf: &AudioBuffer) -> AudioBuffer {
        let mut out = buf.clone();
        for channel in out.channels_mut() {
            let mut state = self.state();
            for s in channel.iter_mut() {
                *s = state.tick(*s as f64) as f32;
            }
        }
        out
    }
}

/// RBJ peaking EQ.
pub fn apply_peak_filter(
    buf: &AudioBuffer,
    frequency: f64,
    q_factor: f64,
    gain_db: f64,
) -> Result<AudioBuffer, DspError> {
    Ok(Biquad::peaking(buf.sample_rate(), frequency, q_factor, gain_db)?.apply(buf))
}

/// Second-order Butterworth low pass.
pub fn apply_low_pass(buf: &AudioBuffer, frequency: f64) -> Result<AudioBuffer, DspError> {
    Ok(Biquad::low_pass(buf.sample_rate(), frequency, FRAC_1_SQRT_2)?.apply(buf))
}

/// Second-order Butterworth high pass.
pub fn apply_high_pass(buf: &AudioBuffer, frequency: f64) -> Result<AudioBuffer, DspError> {
    Ok(Biquad::high_pass(buf.sample_rate(), frequency, FRAC_1_SQRT_2)?.apply(buf))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(freq: f64, secs: f64) -> AudioBuffer {
        let n = (secs * 48000.0) as usize;
        let s = (0..n)
            .map(|i| (0.5 * (2.0 * PI * freq * i as f64 / 48000.0).sin()) as f32)
            .collect();
        AudioBuffer::mono(48000, s).unwrap()
    }

    /// Peak amplitude over the last 100 ms.
    fn settled_peak(buf: &AudioBuffer) -> f64 {
        let c = buf.channel(0);
        c[c.len() - 4800..]
            .iter()
            .fold(0.0f64, |m, &s| m.max(s.abs() as f64))
    }

    fn db(ratio: f64) -> f64 {
        20.0 * ratio.log10()
    }

    #[test]
    fn zero_gain_peak_is_identity() {
        let input = sine(440.0, 0.5);
        let out = apply_peak_filter(&input, 1000.0, 2.0, 0.0).unwrap();
        for (a, b) in input.channel(0).iter().zip(out.channel(0)) {
            assert!((a - b).abs() <= 1e-6);
        }
    }

    #[test]
    fn peak_boost_at_center() {
        let input = sine(1000.0, 1.0);
        let out = apply_peak_filter(&input, 1000.0, 1.0, 6.0).unwrap();
        let gain = db(settled_peak(&out) / settled_peak(&input));
        assert!((gain - 6.0).abs() < 0.3, "{gain}");
    }

    #[test]
    fn peak_far_from_center_is_untouched() {
        let input = sine(100.0, 1.0);
        let out = apply_peak_filter(&input, 1000.0, 4.0, 6.0).unwrap();
        let gain = db(settled_peak(&out) / settled_peak(&input));
        assert!(gain.abs() <= 0.5, "{gain}");
    }

    #[test]
    fn low_pass_dc_passes_high_pass_dc_blocks() {
        let dc = AudioBuffer::mono(48000, vec![0.25; 96000]).unwrap();
        let lp = apply_low_pass(&dc, 1000.0).unwrap();
        assert!((lp.channel(0)[95999] - 0.25).abs() < 1e-6);
        let hp = apply_high_pass(&dc, 100.0).unwrap();
        assert!(hp.channel(0)[48000..].iter().all(|s| s.abs() < 1e-4));
    }

    #[test]
    fn butterworth_cutoff_and_stopband() {
        let at_cutoff = apply_low_pass(&sine(1000.0, 1.0), 1000.0).unwrap();
        let g = db(settled_peak(&at_cutoff) / 0.5);
        assert!((g + 3.0).abs() < 0.5, "{g}");
        let above = apply_low_pass(&sine(4000.0, 1.0), 1000.0).unwrap();
        assert!(db(settled_peak(&above) / 0.5) <= -20.0);
    }

    #[test]
    fn nyquist_is_rejected() {
        let buf = sine(100.0, 0.1);
        assert!(matches!(
            apply_low_pass(&buf, 24000.0),
            Err(DspError::FrequencyOutOfRange { .. })
        ));
        assert!(apply_high_pass(&buf, 0.0).is_err());
        assert!(apply_peak_filter(&buf, 30000.0, 1.0, 3.0).is_err());
    }
}
