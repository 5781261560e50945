//! Freeverb: eight parallel damped comb filters feeding four series
//! all-pass filters per channel.

use super::AudioBuffer;

mod tuning {
    pub const FIXED_GAIN: f64 = 0.015;
    pub const SCALE_WET: f64 = 3.0;
    pub const DAMPING: f64 = 0.5 * 0.4;
    pub const SCALE_ROOM: f64 = 0.28;
    pub const OFFSET_ROOM: f64 = 0.7;
    pub const STEREO_SPREAD: usize = 23;
    pub const COMB_SIZES: [usize; 8] = [1116, 1188, 1277, 1356, 1422, 1491, 1557, 1617];
    pub const ALL_PASS_SIZES: [usize; 4] = [556, 441, 341, 225];
    pub const ALL_PASS_FEEDBACK: f64 = 0.5;
    /// Delay lengths above are for this rate.
    pub const REFERENCE_RATE: f64 = 44100.0;
}

/// Tail rendering stops once the wet signal stays below this level for a
/// full 100 ms window.
const TAIL_FLOOR_DBFS: f64 = -90.0;
const MAX_TAIL_S: f64 = 60.0;

struct Comb {
    buffer: Vec<f64>,
    index: usize,
    feedback: f64,
    store: f64,
}

impl Comb {
    fn new(size: usize, feedback: f64) -> Self {
        Self {
            buffer: vec![0.0; size],
            index: 0,
            feedback,
            store: 0.0,
        }
    }

    #[inline]
    fn process(&mut self, input: f64) -> f64 {
        let output = self.buffer[self.index];
        self.store = output * (1.0 - tuning::DAMPING) + self.store * tuning::DAMPING;
        self.buffer[self.index] = input + self.store * self.feedback;
        self.index = (self.index + 1) % self.buffer.len();
        output
    }
}

struct AllPass {
    buffer: Vec<f64>,
    index: usize,
}

impl AllPass {
    fn new(size: usize) -> Self {
        Self {
            buffer: vec![0.0; size],
            index: 0,
        }
    }

    #[inline]
    fn process(&mut self, input: f64) -> f64 {
        let delayed = self.buffer[self.index];
        self.buffer[self.index] = input + delayed * tuning::ALL_PASS_FEEDBACK;
        self.index = (self.index + 1) % self.buffer.len();
        delayed - input
    }
}

struct Tank {
    combs: Vec<Comb>,
    all_passes: Vec<AllPass>,
}

impl Tank {
    fn new(sample_rate: u32, feedback: f64, spread: usize) -> Self {
        let scale = sample_rate as f64 / tuning::REFERENCE_RATE;
        let size = |n: usize| (((n + spread) as f64 * scale).round() as usize).max(1);
        Self {
            combs: tuning::COMB_SIZES
                .iter()
                .map(|&n| Comb::new(size(n), feedback))
                .collect(),
            all_passes: tuning::ALL_PASS_SIZES
                .iter()
                .map(|&n| AllPass::new(size(n)))
                .collect(),
        }
    }

    #[inline]
    fn process(&mut self, input: f64) -> f64 {
        let mut acc: f64 = self.combs.iter_mut().map(|c| c.process(input)).sum();
        for ap in &mut self.all_passes {
            acc = ap.process(acc);
        }
        acc
    }
}

/// Comb feedback for a room size in [0, 1].
pub fn comb_feedback(room_size: f64) -> f64 {
    tuning::OFFSET_ROOM + tuning::SCALE_ROOM * room_size
}

/// Mix `(1 - dry_wet) * dry + dry_wet * wet`. The output is extended with
/// the reverb tail until it decays below -90 dBFS.
pub fn apply_reverb(buf: &AudioBuffer, room_size: f64, dry_wet: f64) -> AudioBuffer {
    if dry_wet <= 0.0 {
        return buf.clone();
    }
    let rate = buf.sample_rate();
    let feedback = comb_feedback(room_size.clamp(0.0, 1.0));
    let channels = buf.num_channels();
    let mut tanks: Vec<Tank> = (0..channels)
        .map(|c| Tank::new(rate, feedback, c * tuning::STEREO_SPREAD))
        .collect();

    let dry_gain = 1.0 - dry_wet;
    let wet_gain = dry_wet * tuning::SCALE_WET;
    let frames = buf.frames();
    let mut out: Vec<Vec<f32>> = vec![Vec::with_capacity(frames); channels];

    let input_at = |i: usize| -> f64 {
        if i < frames {
            buf.channels().iter().map(|c| c[i] as f64).sum::<f64>()
                * tuning::FIXED_GAIN
                * (2.0 / channels as f64)
        } else {
            0.0
        }
    };

    for i in 0..frames {
        let input = input_at(i);
        for (c, tank) in tanks.iter_mut().enumerate() {
            let wet = tank.process(input);
            out[c].push((dry_gain * buf.channel(c)[i] as f64 + wet_gain * wet) as f32);
        }
    }

    let window = (rate as usize / 10).max(1);
    let floor = 10f64.powf(TAIL_FLOOR_DBFS / 20.0);
    let max_tail = (MAX_TAIL_S * rate as f64) as usize;
    let mut tail = 0;
    while tail < max_tail {
        let mut loudest = 0.0f64;
        for _ in 0..window {
            for (c, tank) in tanks.iter_mut().enumerate() {
                let wet = wet_gain * tank.process(0.0);
                loudest = loudest.max(wet.abs());
                out[c].push(wet as f32);
            }
        }
        tail += window;
        if loudest < floor {
            break;
        }
    }

    AudioBuffer::new(rate, out).expect("channel layout preserved")
}
