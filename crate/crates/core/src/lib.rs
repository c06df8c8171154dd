pub mod classify;
pub mod cli;
pub mod data;
pub mod dtcwt;
pub mod featsel;
pub mod image;
pub mod pipeline;
pub mod scatter;
