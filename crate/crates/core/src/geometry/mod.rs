pub mod chart;
pub mod expmap;
pub mod fd;
pub mod grid;
pub mod jet;
pub mod metric;
