pub mod corpus;
pub mod eval;
pub mod glove;
pub mod plot;
pub mod poincare;
pub mod store;
pub mod vectors;
pub mod word2vec;
