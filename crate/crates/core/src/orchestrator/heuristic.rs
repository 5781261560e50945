//! Fallback retrieval decision used when the generator gives no verdict.
//!
//! A prompt needs new assets iff it contains a content word that does not
//! appear in any description of the current retrieval set. Function words
//! and mixing vocabulary ("louder", "reverb", "fade", ...) are not content.

use crate::catalog::RetrievalSet;

const STOP_WORDS: &[&str] = &[
    // function words
    "a",
    "about",
    "above",
    "after",
    "again",
    "all",
    "also",
    "am",
    "an",
    "and",
    "any",
    "are",
    "as",
    "at",
    "be",
    "been",
    "before",
    "below",
    "between",
    "both",
    "but",
    "by",
    "can",
    "could",
    "did",
    "do",
    "does",
    "doing",
    "down",
    "during",
    "each",
    "few",
    "for",
    "from",
    "further",
    "get",
    "give",
    "had",
    "has",
    "have",
    "having",
    "he",
    "her",
    "here",
    "him",
    "his",
    "how",
    "i",
    "if",
    "in",
    "into",
    "is",
    "it",
    "its",
    "just",
    "let",
    "like",
    "me",
    "more",
    "most",
    "much",
    "my",
    "no",
    "nor",
    "not",
    "now",
    "of",
    "off",
    "on",
    "once",
    "only",
    "or",
    "other",
    "our",
    "out",
    "over",
    "please",
    "same",
    "she",
    "should",
    "so",
    "some",
    "such",
    "than",
    "that",
    "the",
    "their",
    "them",
    "then",
    "there",
    "these",
    "they",
    "this",
    "those",
    "through",
    "to",
    "too",
    "try",
    "under",
    "until",
    "up",
    "use",
    "very",
    "want",
    "was",
    "we",
    "were",
    "what",
    "when",
    "where",
    "which",
    "while",
    "who",
    "why",
    "will",
    "with",
    "would",
    "you",
    "your",
    "bit",
    "little",
    "lot",
    "less",
    "instead",
    "keep",
    "make",
    "put",
    "add",
    "set",
    "change",
    "still",
    "even",
    "way",
    "one",
    "two",
    "three",
    "second",
    "seconds",
    "sec",
    "ms",
    "time",
    "times",
    // mixing vocabulary
    "louder",
    "quieter",
    "softer",
    "loud",
    "quiet",
    "soft",
    "volume",
    "level",
    "gain",
    "loudness",
    "reverb",
    "reverberation",
    "echo",
    "room",
    "hall",
    "wet",
    "dry",
    "space",
    "spacious",
    "compress",
    "compressor",
    "compression",
    "punchy",
    "punchier",
    "dynamic",
    "dynamics",
    "filter",
    "eq",
    "equalizer",
    "bass",
    "treble",
    "low",
    "high",
    "lowpass",
    "highpass",
    "pass",
    "cut",
    "boost",
    "bright",
    "brighter",
    "dark",
    "darker",
    "warm",
    "warmer",
    "muffled",
    "thin",
    "start",
    "stop",
    "earlier",
    "later",
    "early",
    "late",
    "sooner",
    "longer",
    "shorter",
    "long",
    "short",
    "faster",
    "slower",
    "fade",
    "delay",
    "offset",
    "shift",
    "move",
    "mix",
    "track",
    "tracks",
    "sound",
    "sounds",
    "version",
    "remove",
    "bigger",
    "smaller",
    "big",
    "small",
    "tail",
    "attack",
    "release",
    "frequency",
    "hz",
    "db",
    "lufs",
    "tweak",
];

fn stem(word: &str) -> &str {
    for suffix in ["ing", "ed", "es", "s"] {
        if let Some(base) = word.strip_suffix(suffix) {
            if base.len() >= 3 {
                return base;
            }
        }
    }
    word
}

fn words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
}

fn is_content(word: &str) -> bool {
    word.chars().any(char::is_alphabetic)
        && !STOP_WORDS.contains(&word)
        && !STOP_WORDS.contains(&stem(word))
}

fn matches(a: &str, b: &str) -> bool {
    let (a, b) = (stem(a), stem(b));
    a == b || (a.len().min(b.len()) >= 4 && (a.starts_with(b) || b.starts_with(a)))
}

/// Content words of `prompt` absent from every description in `retrieval`.
pub fn missing_content_words(prompt: &str, retrieval: &RetrievalSet) -> Vec<String> {
    let known: Vec<String> = retrieval
        .hits
        .iter()
        .flat_map(|h| words(&h.object.description).chain(words(&h.object.name)))
        .collect();
    let mut missing: Vec<String> = Vec::new();
    for word in words(prompt).filter(|w| is_content(w)) {
        if !known.iter().any(|k| matches(&word, k)) && !missing.contains(&word) {
            missing.push(word);
        }
    }
    missing
}
