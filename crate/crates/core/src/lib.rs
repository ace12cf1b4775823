//! Single-trial EEG classification with relevance-based explanations.
//!
//! This crate implements a complete motor-imagery decoding pipeline:
//!
//! ```text
//!   Recording ──decimate──▶ ──bandpass──▶ ──extract_epochs──▶ EpochSet
//!                                                               │
//!                    ┌──────────────────────────────────────────┤
//!                    ▼                                          ▼
//!            CSP spatial filters                    envelope + baseline
//!            log-variance features                  vectorized trials
//!                    │                                          │
//!                    ▼                                          ▼
//!             shrinkage LDA                          two-layer MLP (tanh)
//!                                                               │
//!                                                               ▼
//!                               layer-wise relevance propagation (LRP)
//!                                         heatmaps / scalp topographies
//! ```
//!
//! The crate is organized by pipeline stage; all numeric state is `f64` and
//! every random choice is driven by explicit seeds, so a fixed configuration
//! reproduces results bitwise.

pub mod csp;
pub mod data;
pub mod dsp;
pub mod erf;
pub mod error;
pub mod eval;
mod linalg;
pub mod lrp;
pub mod mlp;
pub mod montage;
pub mod seeding;
pub mod slda;
pub mod synth;
pub mod viz;

// ---- data model -----------------------------------------------------------
pub use data::{epoch_from_vector, vectorize_epoch, EpochSet, Marker, Recording, RelevanceMap};
pub use erf::{read_epochs, read_recording, write_epochs, write_recording};
pub use error::{Error, Result};
pub use montage::Montage;

// ---- signal conditioning --------------------------------------------------
pub use dsp::{
    bandpass, bandpass_taps, baseline_subtract, decimate, envelope, extract_epochs, BandpassSpec,
};

// ---- spatial filtering ------------------------------------------------------
pub use csp::{apply_filters, class_covariances, csp_decompose, csp_features, SpatialFilterBank};

// ---- classification ---------------------------------------------------------
pub use slda::{lda_predict, lda_scores, lda_train, shrinkage_covariance, LdaModel};
pub use mlp::{
    batch_gradients, forward, init_model, init_model_sized, load_mlp_model, predict,
    read_mlp_model, save_mlp_model, train, train_transfer, write_mlp_model, ForwardPass,
    Gradients, MlpModel, TrainConfig,
};

// ---- evaluation protocols -----------------------------------------------------
pub use eval::{
    accuracy, fit, holdout_split, predict_set, run_holdout, run_loo, run_transfer, EvalMetrics,
    FoldOutcome, ModelSpec, TrainedModel, TRANSFER_ORDERS,
};

// ---- relevance decomposition ------------------------------------------------
pub use lrp::{
    class_average, conservation_report, input_relevance, mean_map, relevance_propagate,
    relevance_through_dense, time_average, ConservationReport, LrpConfig, RelevanceTarget,
    StartLayer,
};

// ---- synthetic ground-truth data --------------------------------------------
pub use synth::{generate, SynthSpec};

// ---- visualization -----------------------------------------------------------
pub use viz::{
    diverging_color, read_relevance_csv, render_heatmap, render_topography, topography,
    write_relevance_csv, write_topography_csv, HeatmapScale, TopographyGrid,
};

// ---- utilities ------------------------------------------------------------
pub use data::vectorize_all;
pub use seeding::derive_seed;
