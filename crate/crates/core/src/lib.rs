pub mod backends;
pub mod corpus;
pub mod interventions;
pub mod lexicon;
pub mod matching;
pub mod report;
pub mod retrieval;
