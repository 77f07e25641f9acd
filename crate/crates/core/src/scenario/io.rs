//! CSV and summary file formats.
//!
//! Numbers are written in the shortest decimal form that parses back to the
//! same `f64`; undefined metrics are written as `NA`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::metrics::MetricsRow;
use crate::sim::Trajectory;
use crate::state::{AgentState, Dim, SwarmState, Vector};
use crate::unicycle::ReplayFrame;

pub const UNDEFINED: &str = "NA";

pub const METRICS_HEADER: [&str; 8] = [
    "t",
    "gamma",
    "dist_min",
    "dist_mean",
    "dist_max",
    "speed_mean",
    "cohesion_radius",
    "pairwise_var",
];

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl IoError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        IoError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn csv(path: &Path, source: csv::Error) -> Self {
        IoError::Csv {
            path: path.to_path_buf(),
            source,
        }
    }
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| UNDEFINED.to_string(), num)
}

pub fn trajectory_header(dim: Dim) -> Vec<&'static str> {
    match dim {
        Dim::Two => vec!["t", "agent", "px", "py", "vx", "vy"],
        Dim::Three => vec!["t", "agent", "px", "py", "pz", "vx", "vy", "vz"],
    }
}

/// Header of the replay trajectory file.
pub const REPLAY_HEADER: [&str; 9] = ["t", "agent", "px", "py", "vx", "vy", "heading", "v_cmd", "omega_cmd"];

fn vector_fields(v: &Vector, dim: Dim, out: &mut Vec<String>) {
    let c = v.components();
    out.extend(c[..dim.get()].iter().map(|&x| num(x)));
}

/// Streams snapshots into a trajectory CSV, one row per agent.
pub struct TrajectoryWriter<W: Write> {
    inner: csv::Writer<W>,
    dim: Dim,
    path: PathBuf,
}

impl TrajectoryWriter<BufWriter<File>> {
    pub fn create(path: &Path, dim: Dim) -> Result<Self, IoError> {
        let file = File::create(path).map_err(|e| IoError::io(path, e))?;
        TrajectoryWriter::new(BufWriter::new(file), dim, path)
    }
}

impl<W: Write> TrajectoryWriter<W> {
    pub fn new(writer: W, dim: Dim, path: &Path) -> Result<Self, IoError> {
        let mut inner = csv::Writer::from_writer(writer);
        inner
            .write_record(trajectory_header(dim))
            .map_err(|e| IoError::csv(path, e))?;
        Ok(TrajectoryWriter {
            inner,
            dim,
            path: path.to_path_buf(),
        })
    }

    pub fn write(&mut self, state: &SwarmState) -> Result<(), IoError> {
        let mut record = Vec::with_capacity(2 + 2 * self.dim.get());
        for (i, a) in state.agents().iter().enumerate() {
            record.clear();
            record.push(num(state.time()));
            record.push(i.to_string());
            vector_fields(&a.position, self.dim, &mut record);
            vector_fields(&a.velocity, self.dim, &mut record);
            self.inner
                .write_record(&record)
                .map_err(|e| IoError::csv(&self.path, e))?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<W, IoError> {
        self.inner.flush().map_err(|e| IoError::io(&self.path, e))?;
        self.inner
            .into_inner()
            .map_err(|e| IoError::io(&self.path, e.into_error()))
    }
}

/// Streams metrics rows into a metrics CSV.
pub struct MetricsWriter<W: Write> {
    inner: csv::Writer<W>,
    path: PathBuf,
}

impl MetricsWriter<BufWriter<File>> {
    pub fn create(path: &Path) -> Result<Self, IoError> {
        let file = File::create(path).map_err(|e| IoError::io(path, e))?;
        MetricsWriter::new(BufWriter::new(file), path)
    }
}

impl<W: Write> MetricsWriter<W> {
    pub fn new(writer: W, path: &Path) -> Result<Self, IoError> {
        let mut inner = csv::Writer::from_writer(writer);
        inner.write_record(METRICS_HEADER).map_err(|e| IoError::csv(path, e))?;
        Ok(MetricsWriter {
            inner,
            path: path.to_path_buf(),
        })
    }

    pub fn write(&mut self, row: &MetricsRow) -> Result<(), IoError> {
        let d = row.distances;
        self.inner
            .write_record([
                num(row.time),
                opt(row.gamma),
                opt(d.map(|d| d.min)),
                opt(d.map(|d| d.mean)),
                opt(d.map(|d| d.max)),
                num(row.speed_mean),
                num(row.cohesion_radius),
                num(row.pairwise_dist_variance),
            ])
            .map_err(|e| IoError::csv(&self.path, e))
    }

    pub fn finish(mut self) -> Result<W, IoError> {
        self.inner.flush().map_err(|e| IoError::io(&self.path, e))?;
        self.inner
            .into_inner()
            .map_err(|e| IoError::io(&self.path, e.into_error()))
    }
}

/// Writes the replay trajectory: the shared columns plus heading and the
/// commands applied during the preceding control period.
pub fn write_replay_trajectory<W: Write>(writer: W, frames: &[ReplayFrame], path: &Path) -> Result<W, IoError> {
    let mut inner = csv::Writer::from_writer(writer);
    inner.write_record(REPLAY_HEADER).map_err(|e| IoError::csv(path, e))?;
    for f in frames {
        for (i, r) in f.robots.iter().enumerate() {
            let v = r.planar_velocity();
            inner
                .write_record([
                    num(f.time),
                    i.to_string(),
                    num(r.position.x()),
                    num(r.position.y()),
                    num(v.x()),
                    num(v.y()),
                    num(r.heading),
                    num(f.v_cmd[i]),
                    num(f.omega_cmd[i]),
                ])
                .map_err(|e| IoError::csv(path, e))?;
        }
    }
    inner.flush().map_err(|e| IoError::io(path, e))?;
    inner.into_inner().map_err(|e| IoError::io(path, e.into_error()))
}

/// Reads a trajectory CSV back into snapshots. The imprint of every
/// snapshot is the first snapshot's positions.
pub fn read_trajectory(text: &str, path: &Path) -> Result<Trajectory, IoError> {
    let format = |message: String| IoError::Format {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| IoError::csv(path, e))?.clone();
    let dim = if header.iter().eq(trajectory_header(Dim::Two)) {
        Dim::Two
    } else if header.iter().eq(trajectory_header(Dim::Three)) {
        Dim::Three
    } else {
        return Err(format(format!(
            "unexpected header `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    };
    let d = dim.get();

    let mut frames: Vec<(f64, Vec<AgentState>)> = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| IoError::csv(path, e))?;
        let field = |i: usize| -> Result<f64, IoError> {
            record[i]
                .parse::<f64>()
                .map_err(|e| format(format!("row {}: column {}: {e}", row + 2, &header[i])))
        };
        let t = field(0)?;
        let agent: usize = record[1]
            .parse()
            .map_err(|e| format(format!("row {}: agent: {e}", row + 2)))?;
        let coords: Vec<f64> = (2..2 + 2 * d).map(field).collect::<Result<_, _>>()?;
        let position = Vector::from_slice(&coords[..d]).expect("2 or 3 components");
        let velocity = Vector::from_slice(&coords[d..]).expect("2 or 3 components");
        match frames.last_mut() {
            Some((time, agents)) if *time == t => {
                if agent != agents.len() {
                    return Err(format(format!("row {}: agent {agent} out of order", row + 2)));
                }
                agents.push(AgentState::new(position, velocity));
            }
            _ => {
                if agent != 0 {
                    return Err(format(format!("row {}: snapshot does not start at agent 0", row + 2)));
                }
                frames.push((t, vec![AgentState::new(position, velocity)]));
            }
        }
    }
    let Some((_, first)) = frames.first() else {
        return Err(format("no rows".into()));
    };
    let imprint: Vec<Vector> = first.iter().map(|a| a.position).collect();
    let snapshots = frames
        .into_iter()
        .map(|(t, agents)| SwarmState::with_imprint(dim, t, agents, imprint.clone()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| format(e.to_string()))?;
    Ok(Trajectory { snapshots })
}

/// Parses the `NA`-aware metrics CSV back into rows.
pub fn read_metrics(text: &str, path: &Path) -> Result<Vec<MetricsRow>, IoError> {
    let format = |message: String| IoError::Format {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| IoError::csv(path, e))?.clone();
    if !header.iter().eq(METRICS_HEADER) {
        return Err(format("unexpected metrics header".into()));
    }
    let mut rows = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| IoError::csv(path, e))?;
        let value = |i: usize| -> Result<Option<f64>, IoError> {
            if &record[i] == UNDEFINED {
                return Ok(None);
            }
            record[i]
                .parse::<f64>()
                .map(Some)
                .map_err(|e| format(format!("row {}: {}: {e}", row + 2, METRICS_HEADER[i])))
        };
        let required = |i: usize| -> Result<f64, IoError> {
            value(i)?.ok_or_else(|| format(format!("row {}: {} is undefined", row + 2, METRICS_HEADER[i])))
        };
        let distances = match (value(2)?, value(3)?, value(4)?) {
            (Some(min), Some(mean), Some(max)) => Some(crate::metrics::DistanceStats { min, mean, max }),
            _ => None,
        };
        rows.push(MetricsRow {
            time: required(0)?,
            gamma: value(1)?,
            distances,
            speed_mean: required(5)?,
            cohesion_radius: required(6)?,
            pairwise_dist_variance: required(7)?,
        });
    }
    Ok(rows)
}

/// Writes `key = value` lines, the same format the configuration uses.
pub fn write_key_values(path: &Path, title: &str, entries: &[(String, String)]) -> Result<(), IoError> {
    let mut text = format!("# {title}\n");
    for (k, v) in entries {
        text.push_str(&format!("{k} = {v}\n"));
    }
    std::fs::write(path, text).map_err(|e| IoError::io(path, e))
}
