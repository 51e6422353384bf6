use covgame::detection::DetectionError;
use covgame::experiments::ExperimentError;
use covgame::lpsolve::LpError;
use covgame::matrixgame::GameError;
use covgame::model::ModelError;
use covgame::simkit::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad scenario, flags or strategy files.
    #[error("{0}")]
    Input(String),
    /// The solver or a numerical routine failed.
    #[error("{0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<LpError> for CliError {
    fn from(e: LpError) -> Self {
        CliError::Solver(e.to_string())
    }
}

impl From<DetectionError> for CliError {
    fn from(e: DetectionError) -> Self {
        match e {
            DetectionError::SpecFun(_) => CliError::Solver(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<GameError> for CliError {
    fn from(e: GameError) -> Self {
        match e {
            GameError::Model(m) => m.into(),
            GameError::Detection(d) => d.into(),
            other => CliError::Solver(other.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Game(g) => g.into(),
            ExperimentError::Model(m) => m.into(),
            ExperimentError::Detection(d) => d.into(),
            ExperimentError::AtBeta { beta, source } => match CliError::from(source) {
                CliError::Input(m) => CliError::Input(format!("at beta = {beta}: {m}")),
                CliError::Solver(m) => CliError::Solver(format!("at beta = {beta}: {m}")),
            },
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Detection(d) => d.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}
