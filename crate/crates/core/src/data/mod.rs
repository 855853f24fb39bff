//! Dataset loading, subsetting, persistence and result tables.

pub mod dataset;
pub mod idx;
pub mod model;
pub mod records;
pub mod tsv;

pub use dataset::{file_sha256, Dataset, Manifest, SourceFile, SubsetRecord, SubsetSpec};
pub use idx::{encode_images, encode_labels, load_idx, GrayImage};
pub use model::{Model, MODEL_VERSION};
pub use records::{
    fmt_sig, long_table_csv, mean_sd, summarize, summary_table_csv, write_sweep_table, CellSummary,
    EpochRecord, RunRecord,
};
pub use tsv::{load_tsv, LabelPolicy, RejectedLine, TsvLoad, TsvPayload, TsvSchema};
