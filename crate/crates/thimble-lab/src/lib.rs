//! Command line front end over `thimble-core`: JSON reports, CSV grids and SVG figures.

pub mod commands;
pub mod figures;
pub mod output;

use std::io;

use thiserror::Error;

/// Version of every JSON document this crate writes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
    #[error("io: {0}")]
    Io(#[from] io::Error),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::VerifyFailed(_) => 1,
            LabError::Numeric(_) => 2,
            LabError::BadInput(_) | LabError::Io(_) => 3,
        }
    }
}

impl From<thimble_core::periods::PeriodError> for LabError {
    fn from(e: thimble_core::periods::PeriodError) -> Self {
        use thimble_core::periods::PeriodError as P;
        match e {
            P::NearCriticalValue { .. } | P::OutsideDomain { .. } | P::InvalidInput(_) => LabError::BadInput(e.to_string()),
            _ => LabError::Numeric(e.to_string()),
        }
    }
}

impl From<thimble_core::affine_syz::AffineError> for LabError {
    fn from(e: thimble_core::affine_syz::AffineError) -> Self {
        use thimble_core::affine_syz::AffineError as A;
        match e {
            A::Period(p) => p.into(),
            A::InvalidInput(_) => LabError::BadInput(e.to_string()),
            _ => LabError::Numeric(e.to_string()),
        }
    }
}

/// Flags shared by all subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub tol: f64,
    pub path_clearance: f64,
    pub seed: u64,
    pub format: Option<Format>,
    pub out: Option<std::path::PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tol: 1e-9,
            path_clearance: 1e-3,
            seed: 0,
            format: None,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), LabError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(LabError::BadInput("--tol must be positive".into()));
        }
        if !(self.path_clearance > 0.0 && self.path_clearance.is_finite()) {
            return Err(LabError::BadInput("--clearance must be positive".into()));
        }
        Ok(())
    }

    pub fn period_config(&self) -> thimble_core::periods::PeriodConfig {
        thimble_core::periods::PeriodConfig {
            tol: self.tol,
            clearance: self.path_clearance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            _ => Err(format!("unknown format {s:?} (json, csv or svg)")),
        }
    }
}

/// `THIMBLE_LAB_THREADS` caps the worker pool; unset or invalid leaves rayon's default.
pub fn init_threads() {
    if let Some(n) = std::env::var("THIMBLE_LAB_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}
