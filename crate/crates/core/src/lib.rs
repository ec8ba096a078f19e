pub mod algebra;
pub mod classgroup;
pub mod error;
pub mod factor;
pub mod graph;
pub mod ladder;
pub mod lattice;
pub mod linalg;
pub mod lmfdb;
pub mod maximal;
pub mod order;
pub mod poly;
pub mod volcano;
