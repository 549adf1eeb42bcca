pub mod foliation;
pub mod model;
pub mod space;
