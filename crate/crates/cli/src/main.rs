use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use msv_cli::{
    cmd_decode, cmd_encode, cmd_evaluate, cmd_report, cmd_synth, CliError, Overrides,
    PipelineConfig,
};
use msv_core::decoder::{FlowMethod, OcclusionMethod};

#[derive(Debug, Parser)]
#[command(name = "msv", version, about = "Masked-sketch video codec")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Pipeline configuration file (TOML); flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for synthetic corpus generation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Minimum-over-union ratio below which a track counts as moving.
    #[arg(long, global = true)]
    iou_threshold: Option<f64>,
    /// Attention softmax sharpness.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true, value_enum)]
    flow: Option<FlowArg>,
    #[arg(long, global = true, value_enum)]
    occlusion: Option<OcclusionArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FlowArg {
    Zero,
    Block,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OcclusionArg {
    Disagreement,
    One,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a seeded synthetic corpus with frames and instance masks.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        videos: Option<usize>,
        #[arg(long)]
        frames: Option<usize>,
        #[arg(long)]
        width: Option<usize>,
        #[arg(long)]
        height: Option<usize>,
        /// Moving shapes per video.
        #[arg(long)]
        movers: Option<usize>,
        /// Static segmented shapes per video.
        #[arg(long)]
        fixtures: Option<usize>,
    },
    /// Encode a video directory (frames/ plus masks/ or a manifest) into a container.
    Encode {
        /// Video directory containing frames/.
        #[arg(long)]
        input: PathBuf,
        /// Track manifest to use instead of the masks/ directory.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode a container into numbered PNG frames.
    Decode {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score decoded frames against the originals.
    Evaluate {
        #[arg(long)]
        original: PathBuf,
        #[arg(long)]
        decoded: PathBuf,
        /// JSON report path; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Size and quality records for every video of a corpus.
    Report {
        #[arg(long)]
        input: PathBuf,
        /// JSON report path; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl GlobalArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            iou_threshold: self.iou_threshold,
            alpha: self.alpha,
            flow: self.flow.map(|f| match f {
                FlowArg::Zero => FlowMethod::Zero,
                FlowArg::Block => FlowMethod::Block,
            }),
            occlusion: self.occlusion.map(|o| match o {
                OcclusionArg::Disagreement => OcclusionMethod::Disagreement,
                OcclusionArg::One => OcclusionMethod::One,
            }),
        }
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| msv_core::Error::Protocol(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = PipelineConfig::resolve(cli.global.config.as_deref(), &cli.global.overrides())?;
    if let Command::Synth {
        videos,
        frames,
        width,
        height,
        movers,
        fixtures,
        ..
    } = &cli.command
    {
        let s = &mut cfg.synth;
        s.videos = videos.unwrap_or(s.videos);
        s.frames = frames.unwrap_or(s.frames);
        s.width = width.unwrap_or(s.width);
        s.height = height.unwrap_or(s.height);
        s.movers = movers.unwrap_or(s.movers);
        s.fixtures = fixtures.unwrap_or(s.fixtures);
        cfg.validate()?;
    }
    info!("resolved config:\n{}", cfg.to_toml());

    match &cli.command {
        Command::Synth { out, .. } => {
            for dir in cmd_synth(out, &cfg)? {
                println!("{}", dir.display());
            }
        }
        Command::Encode {
            input,
            manifest,
            out,
        } => {
            let size = cmd_encode(input, manifest.as_deref(), out, &cfg)?;
            println!("{size}");
        }
        Command::Decode { input, out } => {
            let n = cmd_decode(input, out, &cfg)?;
            info!("wrote {n} frames to {}", out.display());
        }
        Command::Evaluate {
            original,
            decoded,
            out,
        } => {
            let report = cmd_evaluate(original, decoded, out.as_deref(), &cfg)?;
            if out.is_none() {
                print_json(&report)?;
            }
        }
        Command::Report { input, out } => {
            let report = cmd_report(input, out.as_deref(), &cfg)?;
            if out.is_none() {
                print_json(&report)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // help and version requests are not errors
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
