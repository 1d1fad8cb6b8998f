//! Input parsing and alignment: embedding tables, semantic-norm datasets,
//! WordNet's noun taxonomy, and information-content/frequency lookup tables.

mod align;
mod embedding;
mod norms;
mod tables;
mod wordnet;

pub use align::{embedding_matrix, filter_and_align, AlignedData, LabelMatrix};
pub use embedding::{
    parse_embedding_file, parse_embedding_file_filtered, EmbeddingFormat, EmbeddingParseReport,
    EmbeddingTable,
};
pub use norms::{parse_norm_file, NormDataset, NormSchema};
pub use tables::{load_frequency_table, load_ic_table, FrequencyTable, IcTable};
pub use wordnet::Taxonomy;
