use super::DspError;

/// Planar audio: one sample vector per channel, nominal full scale ±1.0.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    sample_rate: u32,
    channels: Vec<Vec<f32>>,
}

impl AudioBuffer {
    pub fn new(sample_rate: u32, channels: Vec<Vec<f32>>) -> Result<Self, DspError> {
        if sample_rate == 0 {
            return Err(DspError::InvalidSampleRate);
        }
        if channels.is_empty() || channels.len() > 2 {
            return Err(DspError::UnsupportedChannels(channels.len()));
        }
        if channels.iter().any(|c| c.len() != channels[0].len()) {
            return Err(DspError::RaggedChannels);
        }
        Ok(Self {
            sample_rate,
            channels,
        })
    }

    pub fn mono(sample_rate: u32, samples: Vec<f32>) -> Result<Self, DspError> {
        Self::new(sample_rate, vec![samples])
    }

    pub fn silence(sample_rate: u32, channels: usize, frames: usize) -> Result<Self, DspError> {
        Self::new(sample_rate, vec![vec![0.0; frames]; channels])
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn frames(&self) -> usize {
        self.channels[0].len()
    }

    pub fn duration_s(&self) -> f64 {
        self.frames() as f64 / self.sample_rate as f64
    }

    pub fn channel(&self, index: usize) -> &[f32] {
        &self.channels[index]
    }

    pub fn channels(&self) -> &[Vec<f32>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<f32>> {
        self.channels
    }

    pub(crate) fn channels_mut(&mut self) -> &mut [Vec<f32>] {
        &mut self.channels
    }

    pub fn is_silent(&self) -> bool {
        self.channels.iter().flatten().all(|&s| s == 0.0)
    }

    pub fn peak(&self) -> f32 {
        self.channels
            .iter()
            .flatten()
            .fold(0.0f32, |acc, &s| acc.max(s.abs()))
    }

    /// Same content with each channel scaled by `gain`.
    pub fn scaled(&self, gain: f32) -> Self {
        let channels = self
            .channels
            .iter()
            .map(|c| c.iter().map(|&s| s * gain).collect())
            .collect();
        Self {
            sample_rate: self.sample_rate,
            channels,
        }
    }

    /// Sum of all channels divided by channel count.
    pub fn mixdown_mono(&self) -> Vec<f32> {
        let n = self.channels.len() as f32;
        (0..self.frames())
            .map(|i| self.channels.iter().map(|c| c[i]).sum::<f32>() / n)
            .collect()
    }

    /// Duplicate a mono buffer to stereo. Stereo input is returned as is.
    pub fn to_stereo(&self) -> Self {
        if self.channels.len() == 2 {
            return self.clone();
        }
        Self {
            sample_rate: self.sample_rate,
            channels: vec![self.channels[0].clone(), self.channels[0].clone()],
        }
    }
}
