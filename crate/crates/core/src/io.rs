//! The `p4lab/1` trajectory document, CSV export and downsampling for plots.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::local_extrema;
use crate::equations::EquationId;
use crate::ode::{OdeError, Sample, State, StepControl, Termination, Trajectory};

pub const SCHEMA: &str = "p4lab/1";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("unsupported schema {found:?}, expected {SCHEMA:?}")]
    Schema { found: String },
    #[error("{extrema} extrema do not fit into max_samples={max_samples}")]
    TooManyExtrema { extrema: usize, max_samples: usize },
    #[error("max_samples must be at least 2, got {0}")]
    MaxSamples(usize),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Ode(#[from] OdeError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryDocument {
    pub schema: String,
    pub equation: EquationId,
    pub ic: State,
    pub samples: Vec<Sample>,
    pub termination: Termination,
    pub control: StepControl,
}

impl TrajectoryDocument {
    pub fn new(equation: EquationId, traj: &Trajectory) -> Self {
        Self::with_samples(equation, traj, traj.samples().to_vec())
    }

    /// Document carrying `samples` in place of the trajectory's own nodes.
    pub fn with_samples(equation: EquationId, traj: &Trajectory, samples: Vec<Sample>) -> Self {
        Self {
            schema: SCHEMA.to_string(),
            equation,
            ic: traj.first().state(),
            samples,
            termination: traj.termination(),
            control: *traj.control(),
        }
    }

    pub fn trajectory(&self) -> Result<Trajectory, IoError> {
        Ok(Trajectory::new(
            self.samples.clone(),
            self.termination,
            self.control,
        )?)
    }

    pub fn to_json(&self) -> Result<String, IoError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        let doc: Self = serde_json::from_str(text)?;
        if doc.schema != SCHEMA {
            return Err(IoError::Schema { found: doc.schema });
        }
        Ok(doc)
    }
}

/// Writes `t,y,v` rows using the shortest decimal that round-trips.
pub fn write_csv(samples: &[Sample], out: impl Write) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "y", "v"])?;
    for s in samples {
        w.write_record([s.t.to_string(), s.y.to_string(), s.v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(input: impl Read) -> Result<Vec<State>, IoError> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in r.deserialize() {
        let (t, y, v): (f64, f64, f64) = row?;
        out.push(State::new(t, y, v));
    }
    Ok(out)
}

/// At most `max_samples` points of `traj` for plotting: both endpoints, every
/// local extremum of `y`, and a uniform grid over the covered range, all in
/// the order of travel.
///
/// Consecutive points are never further apart than the uniform grid spacing.
pub fn downsample(traj: &Trajectory, max_samples: usize) -> Result<Vec<Sample>, IoError> {
    if max_samples < 2 {
        return Err(IoError::MaxSamples(max_samples));
    }
    let extrema = local_extrema(traj);
    if extrema.len() + 2 > max_samples {
        return Err(IoError::TooManyExtrema {
            extrema: extrema.len(),
            max_samples,
        });
    }
    let n_grid = (max_samples - extrema.len()).min(traj.len().max(2));
    let (first, last) = (*traj.first(), *traj.last());

    let mut points = Vec::with_capacity(n_grid + extrema.len());
    points.push(first);
    for i in 1..n_grid - 1 {
        let t = first.t + (last.t - first.t) * i as f64 / (n_grid - 1) as f64;
        points.push(traj.eval_sample(t)?);
    }
    for e in &extrema {
        points.push(traj.eval_sample(e.t)?);
    }
    if traj.len() > 1 {
        points.push(last);
    }

    let dir = traj.direction();
    points.sort_by(|p, q| (p.t * dir).total_cmp(&(q.t * dir)));
    points.dedup_by(|p, q| p.t == q.t);
    Ok(points)
}
