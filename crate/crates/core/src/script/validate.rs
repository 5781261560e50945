use super::ast::{Diagnostic, Method, ScriptAst};
use super::format::format_number;

/// Anything that can answer whether an asset name exists.
pub trait AssetIndex {
    fn contains_asset(&self, name: &str) -> bool;
}

impl AssetIndex for [&str] {
    fn contains_asset(&self, name: &str) -> bool {
        self.contains(&name)
    }
}

impl AssetIndex for std::collections::HashSet<String> {
    fn contains_asset(&self, name: &str) -> bool {
        self.contains(name)
    }
}

/// Longest placement time accepted, in seconds.
pub const MAX_TIME_S: f64 = 3600.0;

#[derive(Debug, Clone, Copy)]
enum Rule {
    Closed(f64, f64),
    /// (lo, hi]
    LeftOpen(f64, f64),
    AtLeast(f64),
    Positive,
}

impl Rule {
    fn accepts(self, v: f64) -> bool {
        match self {
            Rule::Closed(lo, hi) => (lo..=hi).contains(&v),
            Rule::LeftOpen(lo, hi) => v > lo && v <= hi,
            Rule::AtLeast(lo) => v >= lo,
            Rule::Positive => v > 0.0,
        }
    }

    fn describe(self) -> String {
        let n = format_number;
        match self {
            Rule::Closed(lo, hi) => format!("in [{}, {}]", n(lo), n(hi)),
            Rule::LeftOpen(lo, hi) => format!("in ({}, {}]", n(lo), n(hi)),
            Rule::AtLeast(lo) => format!("≥ {}", n(lo)),
            Rule::Positive => "> 0".to_string(),
        }
    }
}

fn rules(method: Method) -> &'static [Rule] {
    match method {
        Method::Volume => &[Rule::Closed(-70.0, 0.0)],
        Method::Compressor => &[
            Rule::Closed(-60.0, 0.0),
            Rule::AtLeast(1.0),
            Rule::AtLeast(0.1),
            Rule::AtLeast(0.1),
        ],
        Method::Reverb => &[Rule::Closed(0.0, 1.0), Rule::Closed(0.0, 1.0)],
        Method::PeakFilter => &[
            Rule::Positive,
            Rule::LeftOpen(0.1, 18.0),
            Rule::Closed(-24.0, 24.0),
        ],
        Method::LowPassFilter | Method::HighPassFilter => &[Rule::Positive],
        Method::StartAt => &[Rule::Closed(0.0, MAX_TIME_S)],
        Method::StopAt => &[Rule::Closed(0.0, MAX_TIME_S), Rule::Closed(0.0, MAX_TIME_S)],
    }
}

/// Check asset references, argument ranges and placement consistency.
///
/// Returns an empty list when the script is fully valid. Repeated `StartAt`
/// or `StopAt` calls on one track produce warnings; the last one wins.
pub fn validate<I: AssetIndex + ?Sized>(ast: &ScriptAst, index: &I) -> Vec<Diagnostic> {
    check(ast, index, None)
}

/// As [`validate`], additionally rejecting filter frequencies at or above
/// the Nyquist frequency of `sample_rate`.
pub fn validate_for_rate<I: AssetIndex + ?Sized>(
    ast: &ScriptAst,
    index: &I,
    sample_rate: u32,
) -> Vec<Diagnostic> {
    check(ast, index, Some(sample_rate))
}

fn check<I: AssetIndex + ?Sized>(
    ast: &ScriptAst,
    index: &I,
    sample_rate: Option<u32>,
) -> Vec<Diagnostic> {
    let spans = &ast.spans;
    let mut out = Vec::new();
    for (t, track) in ast.tracks.iter().enumerate() {
        if track.asset_ref.is_empty() {
            out.push(Diagnostic::error(
                spans.asset(t),
                "asset reference must not be empty",
            ));
        } else if !index.contains_asset(&track.asset_ref) {
            out.push(Diagnostic::error(
                spans.asset(t),
                format!("unknown asset '{}'", track.asset_ref),
            ));
        }

        let mut start_seen = false;
        let mut stop_seen = false;
        for (o, op) in track.chain.iter().enumerate() {
            let method = op.method;
            let arity_ok =
                op.args.len() >= method.required_args() && op.args.len() <= method.params().len();
            if !arity_ok {
                out.push(Diagnostic::error(
                    spans.method(t, o),
                    format!("{method} has {} arguments", op.args.len()),
                ));
                continue;
            }
            for (a, (&value, &rule)) in op.args.iter().zip(rules(method)).enumerate() {
                if !value.is_finite() || !rule.accepts(value) {
                    out.push(Diagnostic::error(
                        spans.arg(t, o, a),
                        format!("{} must be {}", method.params()[a], rule.describe()),
                    ));
                }
            }
            if let (
                Some(rate),
                Method::PeakFilter | Method::LowPassFilter | Method::HighPassFilter,
            ) = (sample_rate, method)
            {
                let nyquist = rate as f64 / 2.0;
                if op.args[0] >= nyquist {
                    out.push(Diagnostic::error(
                        spans.arg(t, o, 0),
                        format!(
                            "frequency must be below Nyquist ({} Hz at {rate} Hz)",
                            format_number(nyquist)
                        ),
                    ));
                }
            }
            let seen = match method {
                Method::StartAt => Some(&mut start_seen),
                Method::StopAt => Some(&mut stop_seen),
                _ => None,
            };
            if let Some(seen) = seen {
                if *seen {
                    out.push(Diagnostic::warning(
                        spans.method(t, o),
                        format!("{method} appears more than once on this track; last wins"),
                    ));
                }
                *seen = true;
            }
        }

        let start = track
            .last_op(Method::StartAt)
            .and_then(|op| op.args.first().copied());
        let stop_index = track
            .chain
            .iter()
            .rposition(|op| op.method == Method::StopAt);
        if let Some(o) = stop_index {
            let stop = track.chain[o].args.first().copied().unwrap_or(0.0);
            let start = start.unwrap_or(0.0);
            if stop <= start {
                out.push(Diagnostic::error(
                    spans.arg(t, o, 0),
                    format!(
                        "StopAt at ({}) must be later than the start time ({})",
                        format_number(stop),
                        format_number(start)
                    ),
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::script::ast::{has_errors, Severity};
    use crate::script::parse_script;

    const ASSETS: &[&str] = &["coin", "glass"];

    fn run(text: &str) -> Vec<Diagnostic> {
        validate(&parse_script(text).unwrap(), ASSETS)
    }

    #[test]
    fn valid_script_is_clean() {
        let diags = run(
            "coin.Volume(-18).Compressor(-20, 4, 10, 100).Reverb(0.5, 0.3)\n\
             glass.PeakFilter(1000, 1, 6).LowPassFilter(8000).HighPassFilter(80).StartAt(0.5).StopAt(2, 0.3)",
        );
        assert!(diags.is_empty(), "{diags:?}");
    }

    #[test]
    fn ratio_below_one() {
        let diags = run("coin.Compressor(-20, 0.5, 10, 100)");
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].message, "ratio must be ≥ 1");
        assert_eq!((diags[0].line, diags[0].column), (1, 22));
    }

    #[test]
    fn unknown_asset_is_named() {
        let diags = run("\"wood\".Volume(-10)");
        assert_eq!(diags.len(), 1);
        assert!(diags[0].is_error());
        assert_eq!(diags[0].message, "unknown asset 'wood'");
        assert_eq!((diags[0].line, diags[0].column), (1, 1));
    }

    #[test]
    fn repeated_placement_warns_only() {
        let diags = run("coin.StartAt(1).StartAt(2).StopAt(3).StopAt(4)");
        assert_eq!(diags.len(), 2);
        assert!(diags.iter().all(|d| d.severity == Severity::Warning));
        assert!(!has_errors(&diags));
        assert!(diags[0].message.contains("last wins"));
    }

    #[test]
    fn range_rules() {
        for bad in [
            "coin.Volume(-71)",
            "coin.Volume(1)",
            "coin.Compressor(-61, 2, 10, 10)",
            "coin.Compressor(-20, 2, 0.05, 10)",
            "coin.Reverb(1.5, 0.5)",
            "coin.Reverb(0.5, -0.1)",
            "coin.PeakFilter(0, 1, 0)",
            "coin.PeakFilter(100, 0.1, 0)",
            "coin.PeakFilter(100, 19, 0)",
            "coin.PeakFilter(100, 1, 25)",
            "coin.LowPassFilter(0)",
            "coin.StartAt(-1)",
            "coin.StopAt(0)",
            "coin.StartAt(2).StopAt(1)",
        ] {
            assert!(has_errors(&run(bad)), "{bad} should be rejected");
        }
        // Last StartAt decides the stop check.
        assert!(!has_errors(&run("coin.StartAt(5).StartAt(0).StopAt(1)")));
    }

    #[test]
    fn nyquist_needs_a_rate() {
        let ast = parse_script("coin.LowPassFilter(30000)").unwrap();
        assert!(validate(&ast, ASSETS).is_empty());
        let diags = validate_for_rate(&ast, ASSETS, 48000);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("Nyquist"));
        assert!(validate_for_rate(&ast, ASSETS, 96000).is_empty());
    }
}
