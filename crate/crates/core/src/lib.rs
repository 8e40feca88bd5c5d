pub mod analysis;
pub mod encodings;
pub mod engine;
pub mod formula;
pub mod horn;
pub mod renaming;
pub mod solver;
pub mod syntax;
