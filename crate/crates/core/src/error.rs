use std::fmt;

use thiserror::Error;

/// Where a nonphysical state was encountered.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StateLocation {
    pub dof: Option<usize>,
    pub position: Option<[f64; 2]>,
    pub time: Option<f64>,
}

impl fmt::Display for StateLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(t) = self.time {
            parts.push(format!("t={t:.6e}"));
        }
        if let Some(d) = self.dof {
            parts.push(format!("dof={d}"));
        }
        if let Some([x, y]) = self.position {
            parts.push(format!("x=({x:.6}, {y:.6})"));
        }
        if parts.is_empty() {
            write!(f, "unknown location")
        } else {
            write!(f, "{}", parts.join(", "))
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("nonphysical state {values:?} ({reason}) at {location}")]
    State {
        reason: String,
        values: Vec<f64>,
        location: StateLocation,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("{0}")]
    Undefined(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn mesh(msg: impl Into<String>) -> Self {
        Error::Mesh(msg.into())
    }

    pub fn state(reason: impl Into<String>, values: &[f64]) -> Self {
        Error::State {
            reason: reason.into(),
            values: values.to_vec(),
            location: StateLocation::default(),
        }
    }

    /// Attaches a DoF index (and optionally its coordinates) to a state error.
    pub fn at_dof(self, dof: usize, position: Option<[f64; 2]>) -> Self {
        match self {
            Error::State {
                reason,
                values,
                mut location,
            } => {
                location.dof.get_or_insert(dof);
                if location.position.is_none() {
                    location.position = position;
                }
                Error::State {
                    reason,
                    values,
                    location,
                }
            }
            other => other,
        }
    }

    pub fn at_time(self, time: f64) -> Self {
        match self {
            Error::State {
                reason,
                values,
                mut location,
            } => {
                location.time.get_or_insert(time);
                Error::State {
                    reason,
                    values,
                    location,
                }
            }
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
