use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pitchscope::highlights::{train_clip_classifier, ClipSample, TrainConfig};
use pitchscope::pipeline::{run_pipeline, FrameOutput, PipelineConfig, PipelineError};
use pitchscope::sim::{
    generate_clip_dataset, read_truth_frames, truth_boxes, ClipConfig, MatchSimulator, NoiseConfig, SimConfig,
    TrackScorer,
};

#[derive(Parser)]
#[command(name = "pitchscope", version, about = "Broadcast soccer analytics over detector output")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic match: observation stream, ground truth and clips.
    Simulate(SimulateArgs),
    /// Run the analysis pipeline over an observation stream.
    Analyze(AnalyzeArgs),
    /// Score a tracks.jsonl file against simulator ground truth.
    Score(ScoreArgs),
    /// Train the highlight clip classifier.
    TrainHighlights(TrainArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Directory for frames.jsonl, truth.jsonl and clips.jsonl.
    #[arg(short, long, default_value = "sim")]
    output: PathBuf,
    /// Write the observation stream to stdout instead of frames.jsonl.
    #[arg(long)]
    stream: bool,
    #[arg(long, default_value_t = 3000)]
    frames: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 11)]
    players_per_team: usize,
    /// Render exact observations with no noise or misses.
    #[arg(long)]
    noiseless: bool,
    /// Bounding-box noise in pixels.
    #[arg(long)]
    sigma: Option<f64>,
    /// Probability of missing a detection.
    #[arg(long)]
    miss: Option<f64>,
    /// Skip writing the ground-truth file.
    #[arg(long)]
    no_truth: bool,
    /// Skip writing the clip stream.
    #[arg(long)]
    no_clips: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Observation stream, or `-` for stdin.
    #[arg(short, long)]
    input: Option<PathBuf>,
    /// Output directory.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Clip feature stream to classify.
    #[arg(long)]
    clips: Option<PathBuf>,
    /// Highlight model written by `train-highlights`.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Config file of `key = value` lines.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override one config key, e.g. `--set team.window=2000`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Append resident memory samples to this CSV file.
    #[arg(long)]
    memory_log: Option<PathBuf>,
    /// Print every config key and exit.
    #[arg(long)]
    list_keys: bool,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    tracks: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Labeled clip stream; unlabeled clips are skipped.
    #[arg(long, conflicts_with = "synthetic")]
    clips: Option<PathBuf>,
    /// Train on this many simulated clips per class instead.
    #[arg(long)]
    synthetic: Option<usize>,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    learning_rate: f64,
    #[arg(long, default_value_t = 500)]
    epochs: usize,
    #[arg(long, default_value_t = 1e-4)]
    l2: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Analyze(a) => analyze(a),
        Command::Score(a) => score(a),
        Command::TrainHighlights(a) => train(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> PipelineError + '_ {
    move |e| PipelineError::Io(format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>, PipelineError> {
    File::create(path).map(BufWriter::new).map_err(io(path))
}

fn open(path: &Path) -> Result<BufReader<File>, PipelineError> {
    File::open(path).map(BufReader::new).map_err(|_| PipelineError::MissingFile(path.to_path_buf()))
}

fn simulate(a: SimulateArgs) -> Result<(), PipelineError> {
    let mut noise = if a.noiseless { NoiseConfig::none() } else { NoiseConfig::default() };
    if let Some(s) = a.sigma {
        noise.detection_sigma_px = s;
    }
    if let Some(m) = a.miss {
        noise.miss_probability = m;
    }
    let config = SimConfig {
        duration_frames: a.frames,
        seed: a.seed,
        players_per_team: a.players_per_team,
        noise,
        ..SimConfig::default()
    };
    let mut sim = MatchSimulator::new(config).map_err(|e| PipelineError::Config(e.to_string()))?;
    std::fs::create_dir_all(&a.output).map_err(io(&a.output))?;

    if !a.no_clips {
        let path = a.output.join("clips.jsonl");
        let mut w = create(&path)?;
        for clip in sim.clips() {
            serde_json::to_writer(&mut w, &clip).map_err(|e| PipelineError::Io(e.to_string()))?;
            w.write_all(b"\n").map_err(io(&path))?;
        }
        w.flush().map_err(io(&path))?;
    }

    let frames_path = a.output.join("frames.jsonl");
    let truth_path = a.output.join("truth.jsonl");
    let mut frames: Box<dyn Write> =
        if a.stream { Box::new(BufWriter::new(std::io::stdout().lock())) } else { Box::new(create(&frames_path)?) };
    let mut truth = if a.no_truth { None } else { Some(create(&truth_path)?) };
    for (t, record) in sim.by_ref() {
        frames.write_all(record.to_json_line().as_bytes()).map_err(io(&frames_path))?;
        frames.write_all(b"\n").map_err(io(&frames_path))?;
        if let Some(w) = truth.as_mut() {
            serde_json::to_writer(&mut *w, &t).map_err(|e| PipelineError::Io(e.to_string()))?;
            w.write_all(b"\n").map_err(io(&truth_path))?;
        }
    }
    frames.flush().map_err(io(&frames_path))?;
    if let Some(mut w) = truth {
        w.flush().map_err(io(&truth_path))?;
    }
    Ok(())
}

fn analyze(a: AnalyzeArgs) -> Result<(), PipelineError> {
    if a.list_keys {
        for key in PipelineConfig::KEYS {
            println!("{key}");
        }
        return Ok(());
    }
    let mut config = PipelineConfig::default();
    if let Some(path) = &a.config {
        let text = std::fs::read_to_string(path).map_err(|_| PipelineError::MissingFile(path.clone()))?;
        config.apply_text(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
    }
    for kv in &a.overrides {
        config.apply_override(kv)?;
    }
    if let Some(p) = a.input {
        config.input = Some(p);
    }
    if let Some(p) = a.output {
        config.output_dir = p;
    }
    if let Some(p) = a.clips {
        config.clips = Some(p);
    }
    if let Some(p) = a.model {
        config.model = Some(p);
    }
    if let Some(p) = a.memory_log {
        config.memory_log = Some(p);
    }
    let report = run_pipeline(&config)?;
    let secs = report.elapsed.as_secs_f64();
    eprintln!(
        "analyzed {} frames in {:.2} s ({:.0} frames/s) into {}",
        report.frames,
        secs,
        report.frames as f64 / secs.max(1e-9),
        config.output_dir.display()
    );
    Ok(())
}

fn score(a: ScoreArgs) -> Result<(), PipelineError> {
    let truth = open(&a.truth)?;
    let mut tracks = open(&a.tracks)?.lines().enumerate();
    let mut scorer = TrackScorer::new();
    let mut pending: Option<FrameOutput> = None;
    for frame in read_truth_frames(truth) {
        let frame = frame.map_err(|e| PipelineError::Malformed(format!("{}: {e}", a.truth.display())))?;
        while pending.as_ref().is_none_or(|p| p.frame < frame.frame_index) {
            let Some((i, line)) = tracks.next() else {
                pending = None;
                break;
            };
            let line = line.map_err(io(&a.tracks))?;
            let out: FrameOutput = serde_json::from_str(&line)
                .map_err(|e| PipelineError::Malformed(format!("{} line {}: {e}", a.tracks.display(), i + 1)))?;
            pending = Some(out);
        }
        let boxes = match &pending {
            Some(p) if p.frame == frame.frame_index => p.scored_boxes(),
            _ => Vec::new(),
        };
        scorer.add_frame(&truth_boxes(&frame), &boxes);
    }
    let metrics = scorer.finish();
    println!("{}", serde_json::to_string_pretty(&metrics).map_err(|e| PipelineError::Io(e.to_string()))?);
    Ok(())
}

fn train(a: TrainArgs) -> Result<(), PipelineError> {
    let clips: Vec<ClipSample> = match (&a.clips, a.synthetic) {
        (Some(path), _) => {
            let mut out = Vec::new();
            for (i, line) in open(path)?.lines().enumerate() {
                let line = line.map_err(io(path))?;
                if line.trim().is_empty() {
                    continue;
                }
                let clip: ClipSample = serde_json::from_str(&line)
                    .map_err(|e| PipelineError::Malformed(format!("{} line {}: {e}", path.display(), i + 1)))?;
                out.push(clip);
            }
            out
        }
        (None, Some(n)) => generate_clip_dataset(n, &ClipConfig::default(), a.seed),
        (None, None) => return Err(PipelineError::Config("give --clips or --synthetic".into())),
    };
    let config = TrainConfig { learning_rate: a.learning_rate, epochs: a.epochs, seed: a.seed, l2: a.l2 };
    let model = train_clip_classifier(&clips, &config).map_err(|e| PipelineError::Malformed(e.to_string()))?;
    model.save(&a.output).map_err(|e| PipelineError::Io(format!("{}: {e}", a.output.display())))?;
    eprintln!("trained on {} clips, model written to {}", clips.len(), a.output.display());
    Ok(())
}
