use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mixscript_core::catalog::DEFAULT_K;
use mixscript_core::SampleFormat;

#[derive(Debug, Parser)]
#[command(
    name = "mixscript",
    version,
    about = "Build sound effects from recorded assets with Mixer Script"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Catalog file to read or write.
    #[arg(long, global = true, default_value = "catalog.mxcat")]
    pub catalog: PathBuf,
    /// Output sample rate in Hz.
    #[arg(long, global = true, default_value_t = 48000, value_parser = parse_rate)]
    pub rate: u32,
    /// WAV sample format for rendered output.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Pcm24)]
    pub format: FormatArg,
    /// More detail on stderr; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Pcm24,
    Float32,
}

impl From<FormatArg> for SampleFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Pcm24 => SampleFormat::Pcm24,
            FormatArg::Float32 => SampleFormat::Float32,
        }
    }
}

fn parse_rate(s: &str) -> Result<u32, String> {
    match s.parse::<u32>() {
        Ok(r @ (44100 | 48000 | 96000)) => Ok(r),
        _ => Err(format!("unsupported rate '{s}'; use 44100, 48000 or 96000")),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract metadata from every WAV in a directory and save the catalog.
    Ingest { dir: PathBuf },
    /// Rank catalog entries against a text query.
    Query {
        text: String,
        #[arg(short, default_value_t = DEFAULT_K)]
        k: usize,
    },
    /// Print the metadata of one WAV file.
    Inspect { wav: PathBuf },
    /// Check a script. Asset names are checked when the catalog exists.
    Validate {
        script: PathBuf,
        /// Print the canonical form of a valid script.
        #[arg(long)]
        canonical: bool,
    },
    /// Render a script against the catalog.
    Render {
        script: PathBuf,
        #[arg(short, long, default_value = "out.wav")]
        out: PathBuf,
        /// Fixed output length in seconds (default: longest track).
        #[arg(long)]
        length: Option<f64>,
    },
    /// Interactive session: one prompt per line, `:quit` to leave.
    Chat {
        /// Replay a fixture instead of calling the language model endpoint.
        #[arg(long, value_name = "FIXTURE")]
        mock: Option<PathBuf>,
        /// Where turn_<n>.wav and session.log are written.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(short, default_value_t = DEFAULT_K)]
        k: usize,
    },
}
