//! Random-walk subgraph sampling with KL acceptance thresholds and the
//! quality statistics of a sample family.

mod bundle;
mod kl;
mod reject;
mod stats;
mod walk;

pub use bundle::{
    load_sample_graphs, read_samples, sample_dir_name, sample_dirs, write_samples, Provenance,
};
pub use kl::{kl_divergence, KL_SMOOTHING};
pub use reject::{calibrate_thresholds, reject_sample, Calibration, SamplerConfig};
pub use stats::{coverage_rate, dataset_stats, overlap_rate, DatasetStats, OverlapMeasure};
pub use walk::{
    random_walk_sample, vertex_sample, InducedSample, SubgraphSample, STEP_BUDGET_PER_EDGE,
};

/// Thresholds serialise as numbers, with `+inf` written as the string `"inf"`.
pub mod threshold_serde {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &f64, s: S) -> Result<S::Ok, S::Error> {
        if value.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*value)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(x),
            Raw::Text(t) => t.parse::<f64>().map_err(de::Error::custom),
        }
    }
}
