use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use r2s::codec::{export_masked_frame, CompressedFrame, ModeConfig, ShiftSource, StreamMode};
use r2s::container::{parse_header, record_size, HEADER_LEN};
use r2s::frame_io::{read_sequence, write_sequence, FrameSequence};
use r2s::metrics::{compression_percent, stride_sweep, sweep_csv, SweepConfig, SweepSource};
use r2s::tracking::{load_trajectories, GridSpec, PointLayout, DEFAULT_RADIUS};
use r2s::{compress_video, decompress_video, deserialize_stream, serialize_stream, CompressConfig};

/// Video compression by inter-frame redundancy removal.
#[derive(Debug, Parser)]
#[command(name = "r2s", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compress a PPM sequence (manifest) into an .r2s container.
    Compress(CompressArgs),
    /// Expand an .r2s container back into PPM frames plus a manifest.
    Decompress(DecompressArgs),
    /// Run a stride sweep and write the results as CSV.
    Bench(BenchArgs),
    /// Print container header fields and per-frame record sizes.
    Inspect(InspectArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Global,
    Grid,
}

#[derive(Debug, Args)]
struct ShiftArgs {
    #[arg(long, value_enum, default_value_t = Mode::Global)]
    mode: Mode,
    /// Search radius of the built-in estimator [default: 16]
    #[arg(long)]
    radius: Option<u32>,
    /// Grid mode: largest mean absolute channel error for a redundant block [default: 0]
    #[arg(long)]
    tau: Option<f64>,
    /// Grid mode: block size as WxH [default: 16x16]
    #[arg(long, value_parser = parse_block)]
    block: Option<GridSpec>,
}

#[derive(Debug, Args)]
struct CompressArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    shift: ShiftArgs,
    /// Trajectory CSV (frame,point,dx,dy) replacing the built-in estimator
    #[arg(long)]
    trajectory: Option<PathBuf>,
    /// Also write masked debug frames (redundant pixels black) to this directory
    #[arg(long)]
    export_masked: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DecompressArgs {
    #[arg(long)]
    input: PathBuf,
    /// Output directory for frames and manifest
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    input: PathBuf,
    /// CSV output path
    #[arg(long)]
    output: PathBuf,
    /// Comma-separated even strides
    #[arg(long, value_delimiter = ',', required = true)]
    strides: Vec<usize>,
    #[command(flatten)]
    shift: ShiftArgs,
    /// Trajectory CSV per stride; `{stride}` in the path is replaced by the stride
    #[arg(long)]
    trajectory: Option<String>,
}

#[derive(Debug, Args)]
struct InspectArgs {
    #[arg(long)]
    input: PathBuf,
}

fn parse_block(s: &str) -> Result<GridSpec, String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let w: usize = w.trim().parse().map_err(|_| format!("bad block width {w:?}"))?;
    let h: usize = h.trim().parse().map_err(|_| format!("bad block height {h:?}"))?;
    GridSpec::new(w, h).map_err(|e| e.to_string())
}

impl ShiftArgs {
    fn mode_config(&self) -> Result<ModeConfig> {
        match self.mode {
            Mode::Global => {
                if self.tau.is_some() || self.block.is_some() {
                    bail!("--tau and --block only apply to --mode grid");
                }
                Ok(ModeConfig::Global)
            }
            Mode::Grid => {
                let tau = self.tau.unwrap_or(0.0);
                if !(tau >= 0.0) || !tau.is_finite() {
                    bail!("--tau must be a non-negative number, got {tau}");
                }
                Ok(ModeConfig::Grid {
                    grid: self.block.unwrap_or_default(),
                    tau,
                })
            }
        }
    }

    fn radius(&self, external: bool) -> Result<u32> {
        if external && self.radius.is_some() {
            bail!("--radius configures the built-in estimator and cannot be combined with --trajectory");
        }
        Ok(self.radius.unwrap_or(DEFAULT_RADIUS))
    }
}

fn layout(mode: &ModeConfig, seq: &FrameSequence) -> PointLayout {
    match mode {
        ModeConfig::Global => PointLayout::Global,
        ModeConfig::Grid { grid, .. } => PointLayout::Grid {
            blocks: grid.block_count(seq.width(), seq.height()),
        },
    }
}

fn cmd_compress(args: &CompressArgs) -> Result<()> {
    let mode = args.shift.mode_config()?;
    let radius = args.shift.radius(args.trajectory.is_some())?;
    let seq = read_sequence(&args.input)?;
    let source = match &args.trajectory {
        Some(path) => ShiftSource::External(load_trajectories(path, seq.len(), layout(&mode, &seq))?),
        None => ShiftSource::Builtin { radius },
    };
    let t0 = Instant::now();
    let stream = compress_video(&seq, &CompressConfig { mode, source })?;
    let elapsed = t0.elapsed().as_secs_f64() * 1000.0;
    let bytes = serialize_stream(&stream);
    fs::write(&args.output, &bytes).with_context(|| format!("writing {}", args.output.display()))?;

    if let Some(dir) = &args.export_masked {
        let mut frames = vec![stream.first_frame.clone()];
        for cf in &stream.frames {
            frames.push(export_masked_frame(cf, stream.width, stream.height)?);
        }
        write_sequence(&FrameSequence::new(frames, seq.fps())?, dir)?;
    }

    let report = compression_percent(&stream);
    println!("frames={}", stream.frame_count());
    println!("width={}", stream.width);
    println!("height={}", stream.height);
    println!("original_bytes={}", report.aggregate.original_bytes);
    println!("bytes={}", bytes.len());
    println!("compression_pct={:.4}", report.aggregate.compression_pct);
    println!("ms_per_frame={:.4}", elapsed / seq.len() as f64);
    Ok(())
}

fn cmd_decompress(args: &DecompressArgs) -> Result<()> {
    let bytes = fs::read(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let stream = deserialize_stream(&bytes)?;
    let seq = decompress_video(&stream)?;
    let manifest = write_sequence(&seq, &args.output)?;
    println!("frames={}", seq.len());
    println!("manifest={}", manifest.display());
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    for &s in &args.strides {
        if s < 2 || s % 2 != 0 {
            bail!("stride {s} must be even and at least 2");
        }
    }
    let mode = args.shift.mode_config()?;
    let radius = args.shift.radius(args.trajectory.is_some())?;
    let seq = read_sequence(&args.input)?;
    let source = match &args.trajectory {
        Some(template) => {
            let sets = args
                .strides
                .iter()
                .map(|s| {
                    let path = template.replace("{stride}", &s.to_string());
                    load_trajectories(Path::new(&path), seq.len(), layout(&mode, &seq))
                })
                .collect::<Result<Vec<_>, _>>()?;
            SweepSource::External(sets)
        }
        None => SweepSource::Builtin { radius },
    };
    let rows = stride_sweep(&seq, &args.strides, &SweepConfig { mode, source })?;
    let csv = sweep_csv(&rows);
    fs::write(&args.output, &csv).with_context(|| format!("writing {}", args.output.display()))?;

    println!("{:>6} {:>16} {:>10} {:>13}", "stride", "compression_pct", "loss_pct", "ms_per_frame");
    for r in &rows {
        println!(
            "{:>6} {:>16.4} {:>10.4} {:>13.4}",
            r.stride, r.compression_pct, r.loss_pct, r.ms_per_frame
        );
    }
    Ok(())
}

fn cmd_inspect(args: &InspectArgs) -> Result<()> {
    let bytes = fs::read(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let header = parse_header(&bytes)?;
    let stream = deserialize_stream(&bytes)?;
    let (bw, bh) = header.block_dims();
    println!("magic=R2SC");
    println!("version={}", header.version);
    println!(
        "mode={}",
        match header.mode {
            StreamMode::Global => "global",
            StreamMode::Grid(_) => "grid",
        }
    );
    println!("width={}", header.width);
    println!("height={}", header.height);
    println!("frame_count={}", header.frame_count);
    println!("block_w={bw}");
    println!("block_h={bh}");
    println!("tracker_id={}", header.tracker_id());
    println!("header_bytes={HEADER_LEN}");
    println!("first_frame_bytes={}", stream.first_frame.pixels().len());
    for (i, cf) in stream.frames.iter().enumerate() {
        let detail = match cf {
            CompressedFrame::Global { shift, .. } => format!("dx={} dy={}", shift.dx, shift.dy),
            CompressedFrame::Grid { field, .. } => format!(
                "raw_blocks={} blocks={}",
                field.redundant().iter().filter(|r| !**r).count(),
                field.len()
            ),
        };
        println!(
            "frame={} record_bytes={} payload_bytes={} {detail}",
            i + 1,
            record_size(cf),
            cf.payload().len()
        );
    }
    println!("total_bytes={}", bytes.len());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Compress(a) => cmd_compress(a),
        Command::Decompress(a) => cmd_decompress(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Inspect(a) => cmd_inspect(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
