//! Error types for model construction, environment stepping, and experiment runs.

use thiserror::Error;

/// Errors raised by the inference core and the agent model builders.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("probabilities must be non-negative and sum to 1 (sum was {sum})")]
    InvalidDistribution { sum: f64 },
    #[error("probability at index {index} is negative ({value})")]
    NegativeProbability { index: usize, value: f64 },
    #[error("distribution must have at least one outcome")]
    EmptyDistribution,
    #[error("delta index {index} out of range for cardinality {cardinality}")]
    IndexOutOfRange { index: usize, cardinality: usize },
    #[error("duplicate factor name `{name}`")]
    DuplicateFactor { name: String },
    #[error("duplicate control name `{name}`")]
    DuplicateControl { name: String },
    #[error("duplicate label `{label}` in `{name}`")]
    DuplicateLabel { name: String, label: String },
    #[error("`{name}` declares no labels")]
    EmptyLabels { name: String },
    #[error("unknown modality `{modality}`")]
    UnknownModality { modality: String },
    #[error("unknown control `{control}`")]
    UnknownControl { control: String },
    #[error("unknown label `{label}` for modality `{modality}`")]
    UnknownLabel { modality: String, label: String },
    #[error("observation has {got} labels but the model declares {expected} modalities")]
    ObservationArity { expected: usize, got: usize },
    #[error("joint action has {got} entries but the model declares {expected} controls")]
    ActionArity { expected: usize, got: usize },
    #[error("action index {index} out of range for control `{control}`")]
    ActionOutOfRange { control: String, index: usize },
    #[error("factor `{factor}`: {message}")]
    InvalidFactorModel { factor: String, message: String },
    #[error("factor `{factor}`: column {column} is not normalized (sum {sum})")]
    UnnormalizedColumn {
        factor: String,
        column: usize,
        sum: f64,
    },
    #[error("factor `{factor}`: column {column} has zero total count")]
    ZeroCountColumn { factor: String, column: usize },
    #[error("learning rate must be positive (was {rate})")]
    NonPositiveLearningRate { rate: f64 },
    #[error("prior count must be positive (was {count})")]
    NonPositivePriorCount { count: f64 },
    #[error("belief has {got} marginals but the model declares {expected} factors")]
    BeliefArity { expected: usize, got: usize },
    #[error("marginal for `{factor}` has {got} entries, expected {expected}")]
    MarginalCardinality {
        factor: String,
        expected: usize,
        got: usize,
    },
    #[error("policy length must be >= 1")]
    EmptyPolicy,
    #[error("policy step {step} is missing from the evaluated horizon")]
    PolicyStepOutOfRange { step: usize },
    #[error("no policy evaluations to select from")]
    EmptyReport,
    #[error("preference model is missing modality `{modality}`")]
    MissingPreference { modality: String },
    #[error("preference for `{modality}` has {got} entries, expected {expected}")]
    PreferenceCardinality {
        modality: String,
        expected: usize,
        got: usize,
    },
    #[error("preference for `{modality}` contains a non-finite value")]
    NonFinitePreference { modality: String },
    #[error("agent `{agent}`: {message}")]
    InvalidAgentSpec { agent: String, message: String },
}

/// Errors raised by the pipeline environment and trace ingestion.
#[derive(Debug, Error)]
pub enum EnvError {
    #[error("unknown device profile `{name}`")]
    UnknownProfile { name: String },
    #[error("profile `{name}`: {message}")]
    InvalidProfile { name: String, message: String },
    #[error("trace file `{path}`: {source}")]
    TraceIo {
        path: String,
        source: std::io::Error,
    },
    #[error("trace file `{path}` line {line}: {message}")]
    MalformedTrace {
        path: String,
        line: u64,
        message: String,
    },
    #[error("trace file `{path}`: missing required column `{column}`")]
    MissingColumn { path: String, column: String },
    #[error("trace file `{path}`: no rows after the header")]
    EmptyTrace { path: String },
    #[error(
        "device `{device}` gpu={gpu}: cell (resolution {resolution}, fps {fps}) cannot be \
         interpolated, both fps neighbors are missing"
    )]
    UnfillableGap {
        device: String,
        resolution: String,
        fps: u32,
        gpu: bool,
    },
    #[error("device `{device}`: {message}")]
    IncompleteDevice { device: String, message: String },
    #[error("invalid action for {service}: {message}")]
    InvalidAction { service: String, message: String },
    #[error("observation noise must satisfy 0 <= epsilon < 0.5, got {epsilon}")]
    NoiseOutOfRange { epsilon: f64 },
}

/// Errors raised by the experiment harness.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("config: {0}")]
    InvalidConfig(String),
    #[error("aggregate requires at least one run")]
    EmptyAggregate,
    #[error("aggregate saw mixed config hashes ({first} vs {other})")]
    MixedRuns { first: String, other: String },
    #[error("artifact `{path}`: {source}")]
    ArtifactIo {
        path: String,
        source: std::io::Error,
    },
    #[error("artifact `{path}`: {message}")]
    ArtifactFormat { path: String, message: String },
    #[error("episode step {step}: {source}")]
    EpisodeStep {
        step: usize,
        #[source]
        source: Box<HarnessError>,
    },
}
