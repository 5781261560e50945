//! Deterministic fixtures shared by the benchmarks.

use std::f64::consts::PI;

use mixscript_core::dsp::{AudioBuffer, MemoryAssets};
use mixscript_core::metadata::{describe_name, Pitch};
use mixscript_core::{Loudness, SoundObject};

pub const RATE: u32 = 48000;

/// Decaying two-partial tone, `seconds` long.
pub fn ping(freq: f64, seconds: f64) -> AudioBuffer {
    let n = (seconds * RATE as f64) as usize;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / RATE as f64;
            let env = (-4.0 * t).exp();
            (0.4 * env * ((2.0 * PI * freq * t).sin() + 0.3 * (2.0 * PI * 2.7 * freq * t).sin()))
                as f32
        })
        .collect();
    AudioBuffer::mono(RATE, samples).expect("valid buffer")
}

/// Linear congruential noise, so the fixtures need no RNG dependency.
pub fn noise(seconds: f64, seed: u64) -> AudioBuffer {
    let n = (seconds * RATE as f64) as usize;
    let mut state = seed
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    let samples = (0..n)
        .map(|_| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 40) as f64 / (1u64 << 24) as f64 * 2.0 - 1.0) as f32 * 0.2
        })
        .collect();
    AudioBuffer::mono(RATE, samples).expect("valid buffer")
}

pub fn demo_assets() -> MemoryAssets {
    let mut assets = MemoryAssets::new();
    assets
        .insert("coin_drop", ping(2400.0, 1.0))
        .insert("wooden_table_knock", ping(180.0, 0.5))
        .insert("room_tone", noise(4.0, 7));
    assets
}

pub const DEMO_SCRIPT: &str = "\
\"coin_drop\".Volume(-16).PeakFilter(2400, 2, 4).StartAt(0.5).Reverb(0.4, 0.2)
\"wooden_table_knock\".Volume(-20).LowPassFilter(3000).Compressor(-24, 4, 2, 80).StartAt(0.5)
\"room_tone\".Volume(-45).HighPassFilter(80).StopAt(2.5, 0.3)
";

/// A script with `tracks` lines exercising every method.
pub fn long_script(tracks: usize) -> String {
    (0..tracks)
        .map(|i| {
            format!(
                "\"asset_{i}\".Volume(-{}).Compressor(-20, 4, 5, 50).Reverb(0.5, 0.3)\
                 .PeakFilter(1000, q_factor=2, gain=3).LowPassFilter(8000).HighPassFilter(40)\
                 .StartAt({}).StopAt({}, 0.25)  # track {i}\n",
                10 + i % 30,
                i as f64 * 0.1,
                i as f64 * 0.1 + 2.0
            )
        })
        .collect()
}

const WORDS: &[&str] = &[
    "coin", "drop", "wood", "glass", "break", "rain", "roof", "door", "creak", "thunder", "dog",
    "bark", "engine", "idle", "bell", "ring", "paper", "fire", "wind", "water", "splash", "metal",
    "clang", "step", "gravel", "bird", "chirp", "clock", "tick", "crowd",
];

/// `n` catalog records with three-word names.
pub fn synthetic_objects(n: usize) -> Vec<SoundObject> {
    (0..n)
        .map(|i| {
            let name = format!(
                "{}_{}_{}_{i}",
                WORDS[i % WORDS.len()],
                WORDS[(i * 7 + 3) % WORDS.len()],
                WORDS[(i * 13 + 5) % WORDS.len()]
            );
            SoundObject {
                description: describe_name(&name),
                name,
                loudness: Loudness::Lufs(-20.0),
                onset_ms: 0.0,
                pitch: Pitch::Unpitched,
                duration_s: 1.0,
                source_path: String::new(),
                sample_rate: RATE,
            }
        })
        .collect()
}
