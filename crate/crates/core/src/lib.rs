pub mod arl;
pub mod cli;
pub mod data;
pub mod model;
pub mod tensor;
pub mod train;
pub mod theory;
