use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use super::PipelineError;
use crate::geometry::{estimate_homography, refine_keypoint, Correspondence, Homography};
use crate::highlights::{
    classify_clip, clip_span_frames, extract_highlight_intervals, ClipSample, HighlightInterval, SoftmaxModel,
};
use crate::model::{
    standard_field_model, validate_frame, BoundingBox, FieldModel, FrameRecord, KeypointObservation, ObservationReader,
};
use crate::sim::ScoredBox;
use crate::summary::{build_summary, MatchSummary, PlayerSample, RosterEntry, Rosters, SummaryAccumulator};
use crate::team::{Group, GroupLabel, Team, TeamAssigner};
use crate::tracking::{TrackSnapshot, TrackerState};

/// One tracked object as written to `tracks.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackOut {
    pub id: u64,
    pub bbox: BoundingBox,
    pub group: Group,
    pub number: Option<u8>,
    /// Ground position in field meters, when a homography is available.
    pub field: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameOutput {
    pub frame: u64,
    pub tracks: Vec<TrackOut>,
    pub ball: Option<TrackOut>,
    /// Row-major image→field matrix, present on frames where it was refreshed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homography: Option<[f64; 9]>,
    #[serde(skip)]
    pub controller: Option<Team>,
}

impl FrameOutput {
    /// Track boxes in the form the scorer consumes, ball included.
    pub fn scored_boxes(&self) -> Vec<ScoredBox> {
        self.tracks.iter().chain(&self.ball).map(|t| ScoredBox { id: t.id, bbox: t.bbox }).collect()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct RosterState {
    group: Option<Group>,
    number: Option<u8>,
    frames: u64,
}

/// Per-match state of the frame-by-frame analysis.
#[derive(Debug, Clone)]
pub struct Pipeline {
    config: PipelineConfig,
    field: FieldModel,
    tracker: TrackerState,
    team: TeamAssigner,
    homography: Option<Homography>,
    summary: SummaryAccumulator,
    roster: BTreeMap<u64, RosterState>,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Self {
        let field = standard_field_model();
        let mut summary = SummaryAccumulator::new(config.grid, config.control_basis);
        summary.radius_m = config.control_radius_m;
        Self {
            tracker: TrackerState::new(config.persons, config.ball),
            team: TeamAssigner::new(config.team, field.clone()),
            field,
            homography: None,
            summary,
            roster: BTreeMap::new(),
            config,
        }
    }

    pub fn team_assigner(&self) -> &TeamAssigner {
        &self.team
    }

    /// Most recent homography still inside the carry-forward window.
    pub fn homography_at(&self, frame_index: u64) -> Option<Homography> {
        self.homography.filter(|h| frame_index.saturating_sub(h.frame_index) <= self.config.geometry.carry_frames)
    }

    fn refresh_homography(&mut self, frame_index: u64, keypoints: &[KeypointObservation]) -> Option<Homography> {
        let geo = self.config.geometry;
        let pairs: Vec<Correspondence> = keypoints
            .iter()
            .filter(|k| k.score >= geo.min_keypoint_score)
            .filter_map(|k| {
                let coarse = (k.x, k.y);
                let image = k.score_patch.as_ref().map_or(coarse, |p| refine_keypoint(p, coarse).unwrap_or(coarse));
                self.field.keypoint(k.id).map(|f| Correspondence::new(image, f))
            })
            .collect();
        if pairs.len() < geo.min_keypoints {
            return None;
        }
        let mut h = estimate_homography(&pairs).ok()?;
        h.frame_index = frame_index;
        self.homography = Some(h);
        Some(h)
    }

    fn output(snapshot: &TrackSnapshot, h: Option<&Homography>, ground: (f64, f64)) -> TrackOut {
        TrackOut {
            id: snapshot.id,
            bbox: snapshot.bbox,
            group: snapshot.group.group,
            number: snapshot.number.value,
            field: h.and_then(|h| h.to_field(ground).ok()).map(|(x, y)| [x, y]),
        }
    }

    /// Runs every stage on one frame.
    pub fn process(&mut self, record: FrameRecord) -> Result<FrameOutput, PipelineError> {
        let frame = validate_frame(record, &self.config.validation)
            .map_err(|e| PipelineError::Malformed(format!("frame validation: {e}")))?;
        let index = frame.frame_index();
        let refreshed = self.refresh_homography(index, &frame.record().keypoints);
        let h = self.homography_at(index);

        let labels: Vec<Option<GroupLabel>> = frame
            .detections()
            .iter()
            .map(|d| {
                if !d.class.is_person() {
                    return None;
                }
                let pos = h.and_then(|h| h.to_field(d.bbox.bottom_center()).ok());
                self.team.observe(index, d, pos)
            })
            .collect();
        let tracks =
            self.tracker.step(&frame, &labels).map_err(|e| PipelineError::Malformed(format!("frame {index}: {e}")))?;

        let persons: Vec<TrackOut> =
            tracks.persons.iter().map(|s| Self::output(s, h.as_ref(), s.bbox.bottom_center())).collect();
        let ball = tracks.ball.as_ref().map(|s| Self::output(s, h.as_ref(), s.bbox.center()));

        let samples: Vec<PlayerSample> = persons
            .iter()
            .filter_map(|t| t.field.map(|f| PlayerSample { track_id: t.id, pos: (f[0], f[1]), group: t.group }))
            .collect();
        let ball_pos = ball.as_ref().and_then(|b| b.field).map(|f| (f[0], f[1]));
        let controller = self.summary.observe(ball_pos, &samples);

        for t in &persons {
            let entry = self.roster.entry(t.id).or_default();
            entry.frames += 1;
            if t.group != Group::Unknown {
                entry.group = Some(t.group);
            }
            if t.number.is_some() {
                entry.number = t.number;
            }
        }

        Ok(FrameOutput {
            frame: index,
            tracks: persons,
            ball,
            homography: refreshed.map(|h| h.to_row_major()),
            controller,
        })
    }

    pub fn rosters(&self) -> Rosters {
        let mut rosters = Rosters::default();
        for (&track, r) in &self.roster {
            if r.frames < self.config.roster_min_frames {
                continue;
            }
            let entry = RosterEntry { track, number: r.number };
            match r.group.and_then(Group::team) {
                Some(Team::A) => rosters.team_a.push(entry),
                Some(Team::B) => rosters.team_b.push(entry),
                None => {}
            }
        }
        rosters
    }

    pub fn summary(&self, highlights: &[HighlightInterval]) -> MatchSummary {
        build_summary(&self.summary, highlights, &self.rosters())
    }
}

/// Classifies a clip stream and merges the highlights into intervals.
pub fn classify_clip_stream<R: BufRead>(
    reader: R,
    model: &SoftmaxModel,
    fps: u32,
) -> Result<Vec<HighlightInterval>, PipelineError> {
    let span = clip_span_frames(fps);
    let mut classified = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| PipelineError::Io(format!("clip stream: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        let clip: ClipSample = serde_json::from_str(&line)
            .map_err(|e| PipelineError::Malformed(format!("clip stream line {}: {e}", i + 1)))?;
        let (class, _) = classify_clip(model, &clip)
            .map_err(|e| PipelineError::Malformed(format!("clip stream line {}: {e}", i + 1)))?;
        classified.push(HighlightInterval {
            class,
            start_frame: clip.start_frame,
            end_frame: clip.start_frame + span - 1,
        });
    }
    Ok(extract_highlight_intervals(&classified))
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub frames: u64,
    pub elapsed: Duration,
    pub summary: MatchSummary,
    pub outputs: Vec<PathBuf>,
}

fn open_input(path: &Path) -> Result<Box<dyn BufRead>, PipelineError> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(BufReader::with_capacity(1 << 20, std::io::stdin())));
    }
    let f = File::open(path).map_err(|_| PipelineError::MissingFile(path.to_path_buf()))?;
    Ok(Box::new(BufReader::with_capacity(1 << 20, f)))
}

fn create(path: &Path) -> Result<BufWriter<File>, PipelineError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| PipelineError::Io(format!("cannot create {}: {e}", path.display())))
}

fn write_all(path: &Path, text: &str) -> Result<(), PipelineError> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))
}

/// Resident set size in KiB, where the platform reports it.
pub fn resident_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmRSS:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

/// Runs the full analysis described by `config`, writing its outputs.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunReport, PipelineError> {
    let input = config.input.clone().ok_or_else(|| PipelineError::Config("no input given".into()))?;
    let model = match (&config.clips, &config.model) {
        (Some(clips), Some(model)) => {
            if !clips.exists() {
                return Err(PipelineError::MissingFile(clips.clone()));
            }
            if !model.exists() {
                return Err(PipelineError::MissingFile(model.clone()));
            }
            Some(SoftmaxModel::load(model).map_err(|e| PipelineError::Malformed(format!("{}: {e}", model.display())))?)
        }
        (Some(_), None) => return Err(PipelineError::Config("a clip stream needs a highlight model".into())),
        _ => None,
    };
    let reader = open_input(&input)?;
    std::fs::create_dir_all(&config.output_dir)
        .map_err(|e| PipelineError::Io(format!("cannot create {}: {e}", config.output_dir.display())))?;

    let out = |name: &str| config.output_dir.join(name);
    let mut outputs = Vec::new();
    let mut tracks = if config.emit_tracks { Some(create(&out("tracks.jsonl"))?) } else { None };
    let mut memlog = config.memory_log.as_deref().map(create).transpose()?;
    let io_err = |e: std::io::Error| PipelineError::Io(e.to_string());

    let start = Instant::now();
    let mut pipeline = Pipeline::new(config.clone());
    let mut frames = 0u64;
    for record in ObservationReader::new(reader) {
        let record = record.map_err(|e| PipelineError::Malformed(format!("{}: {e}", input.display())))?;
        let frame_out = pipeline.process(record)?;
        frames += 1;
        if let Some(w) = tracks.as_mut() {
            serde_json::to_writer(&mut *w, &frame_out).map_err(|e| PipelineError::Io(e.to_string()))?;
            w.write_all(b"\n").map_err(io_err)?;
        }
        if let Some(w) = memlog.as_mut() {
            if frames.is_multiple_of(config.memory_log_every) {
                if let Some(kib) = resident_kib() {
                    writeln!(w, "{frames},{kib}").map_err(io_err)?;
                    w.flush().map_err(io_err)?;
                }
            }
        }
    }
    if let Some(mut w) = tracks {
        w.flush().map_err(io_err)?;
        outputs.push(out("tracks.jsonl"));
    }
    if let Some(mut w) = memlog {
        w.flush().map_err(io_err)?;
    }

    let highlights = match (&config.clips, &model) {
        (Some(path), Some(model)) => {
            let f = File::open(path).map_err(|_| PipelineError::MissingFile(path.clone()))?;
            classify_clip_stream(BufReader::new(f), model, config.fps)?
        }
        _ => Vec::new(),
    };
    let summary = pipeline.summary(&highlights);
    write_all(&out("summary.json"), &summary.to_json())?;
    write_all(&out("heatmap.csv"), &pipeline.summary.heatmap().to_csv())?;
    let mut hl = serde_json::to_string_pretty(&highlights).map_err(|e| PipelineError::Io(e.to_string()))?;
    hl.push('\n');
    write_all(&out("highlights.json"), &hl)?;
    outputs.extend([out("summary.json"), out("heatmap.csv"), out("highlights.json")]);
    Ok(RunReport { frames, elapsed: start.elapsed(), summary, outputs })
}
