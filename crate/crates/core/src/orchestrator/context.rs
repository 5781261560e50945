use std::fmt::Write as _;

use crate::catalog::RetrievalSet;
use crate::metadata::SoundObject;
use crate::script::Method;

use super::SessionState;

/// Everything a script generator sees for one turn.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorContext {
    /// Reference text for the processing methods.
    pub methods: String,
    /// Assets the generated script may use.
    pub retrieval: RetrievalSet,
    /// The previously accepted script, verbatim.
    pub prior_script: Option<String>,
    pub prompt: String,
    /// Diagnostics from a rejected attempt, when re-prompting.
    pub repair: Option<String>,
}

pub const ASSET_BLOCK_HEADER: &str = "[asset]";
pub const CURRENT_SCRIPT_HEADING: &str = "## Current script";

fn method_summary(method: Method) -> &'static str {
    match method {
        Method::Volume => "static gain so the integrated loudness (LUFS) hits targetLUFS; range [-70, 0]",
        Method::Compressor => {
            "peak compressor; threshold dBFS in [-60, 0], ratio >= 1, attack_ms and release_ms >= 0.1"
        }
        Method::Reverb => "Freeverb room; room_size and dry_wet in [0, 1]",
        Method::PeakFilter => {
            "peaking EQ; frequency Hz below Nyquist, q_factor in (0.1, 18], gain dB in [-24, 24]"
        }
        Method::LowPassFilter => "2nd-order Butterworth, removes content above frequency Hz",
        Method::HighPassFilter => "2nd-order Butterworth, removes content below frequency Hz",
        Method::StartAt => "event start time in seconds on the timeline (default 0)",
        Method::StopAt => {
            "absolute time in seconds at which a linear fade-out of fade_out_duration seconds (default 0.01) begins"
        }
    }
}

/// The method vocabulary rendered as text.
pub fn method_reference() -> String {
    let mut out = String::new();
    for method in Method::ALL {
        let _ = writeln!(
            out,
            "- {}({}): {}",
            method.name(),
            method.params().join(", "),
            method_summary(method)
        );
    }
    out
}

pub fn asset_block(obj: &SoundObject) -> String {
    format!(
        "{ASSET_BLOCK_HEADER}\nname: {}\ndescription: {}\nloudness_lufs: {}\nonset_ms: {:.3}\npitch_hz: {}\nduration_s: {:.3}\n",
        obj.name, obj.description, obj.loudness, obj.onset_ms, obj.pitch, obj.duration_s
    )
}

pub fn build_context(
    state: &SessionState,
    retrieval: &RetrievalSet,
    prompt: &str,
) -> GeneratorContext {
    GeneratorContext {
        methods: method_reference(),
        retrieval: retrieval.clone(),
        prior_script: state.prev_script_text.clone(),
        prompt: prompt.to_string(),
        repair: None,
    }
}

impl GeneratorContext {
    /// Instructions, method table, asset blocks, prior script and repair notes.
    pub fn system_text(&self) -> String {
        let mut out = String::from(
            "You write Mixer Script to build sound effects from recorded assets.\n\
             One track per line: an asset name in double quotes followed by dot-chained method calls, \
             e.g. \"coin_drop\".Volume(-18).StartAt(0.5)\n\
             Use only the assets listed below and only these methods. Numbers are plain decimals.\n\
             Reply with exactly one fenced code block containing the whole script.\n\n## Methods\n",
        );
        out.push_str(&self.methods);
        out.push_str("\n## Assets\n");
        for hit in &self.retrieval.hits {
            out.push_str(&asset_block(&hit.object));
            out.push('\n');
        }
        if let Some(script) = &self.prior_script {
            out.push_str(CURRENT_SCRIPT_HEADING);
            out.push('\n');
            out.push_str(script);
            if !script.ends_with('\n') {
                out.push('\n');
            }
            out.push('\n');
        }
        if let Some(repair) = &self.repair {
            out.push_str("## Problems with your previous reply\n");
            out.push_str(repair);
            out.push_str("\nFix them and reply with the corrected script.\n");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::RetrievalHit;
    use crate::dsp::Loudness;
    use crate::metadata::Pitch;

    fn hit(name: &str, pitch: Pitch) -> RetrievalHit {
        RetrievalHit {
            object: SoundObject {
                name: name.into(),
                description: name.replace('_', " "),
                loudness: Loudness::Lufs(-21.5),
                onset_ms: 12.0,
                pitch,
                duration_s: 0.75,
                source_path: format!("{name}.wav"),
                sample_rate: 48000,
            },
            score: 0.5,
        }
    }

    fn retrieval(hits: Vec<RetrievalHit>) -> RetrievalSet {
        RetrievalSet {
            query: "q".into(),
            hits,
        }
    }

    #[test]
    fn asset_fields_are_always_present() {
        let ctx = build_context(
            &SessionState::default(),
            &retrieval(vec![hit("coin", Pitch::Unpitched)]),
            "p",
        );
        let text = ctx.system_text();
        for field in [
            "name: coin",
            "description: coin",
            "loudness_lufs: -21.500",
            "onset_ms: 12.000",
            "pitch_hz: unpitched",
            "duration_s: 0.750",
        ] {
            assert!(text.contains(field), "missing {field}");
        }
    }

    #[test]
    fn one_block_per_asset() {
        let hits = vec![
            hit("a", Pitch::Hz(440.0)),
            hit("b", Pitch::Unpitched),
            hit("c", Pitch::Hz(90.0)),
        ];
        let ctx = build_context(&SessionState::default(), &retrieval(hits), "p");
        assert_eq!(ctx.system_text().matches(ASSET_BLOCK_HEADER).count(), 3);
    }

    #[test]
    fn prior_script_is_verbatim() {
        let state = SessionState {
            prev_script_text: Some("\"a\".Volume(-18)  # keep\n".into()),
            ..SessionState::default()
        };
        let text =
            build_context(&state, &retrieval(vec![hit("a", Pitch::Unpitched)]), "p").system_text();
        assert!(text.contains("## Current script\n\"a\".Volume(-18)  # keep\n"));
        let fresh = build_context(&SessionState::default(), &retrieval(vec![]), "p").system_text();
        assert!(!fresh.contains(CURRENT_SCRIPT_HEADING));
    }

    #[test]
    fn method_table_lists_all_eight() {
        let table = method_reference();
        assert_eq!(table.lines().count(), 8);
        assert!(table.contains("Compressor(threshold, ratio, attack_ms, release_ms)"));
    }
}
