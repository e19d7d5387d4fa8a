pub mod annotate;
pub mod corpus;
pub mod embed;
pub mod generalize;
pub mod lexicon;
pub mod pipeline;
pub mod report;
pub mod variation;
pub mod workspace;
