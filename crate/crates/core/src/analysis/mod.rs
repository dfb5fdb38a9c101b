//! Skill separability, gait timing and tracking metrics.

mod ablation;
mod contacts;
mod dtw;
mod kmeans;
mod latents;
mod pca;
mod stats;
mod tracking;

pub use ablation::{
    ablation_flags, ablation_report, evaluate_run, format_report, max_pairwise_distance, skill_signatures, switch_succeeded,
    trace_signature, AblationRow, RunEvaluation, ABLATION_RUNS,
};
pub use contacts::{circular_distance, clip_contacts, contact_metrics, phase_signature_distance, ContactMetrics};
pub use dtw::{downsample, dtw_distance, dtw_distance_by, dtw_matrix, euclidean};
pub use kmeans::{kmeans, kmeans_purity, mean_inertia, purity, KMeans};
pub use latents::{clip_latents, feature_latents, latent_sequences, standardize_sequences, LatentSequence};
pub use pca::{pca_project, Pca};
pub use stats::Standardizer;
pub use tracking::{tracking_accuracy, SAGITTAL_JOINTS};
