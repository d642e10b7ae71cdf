pub mod geometry;
pub mod graphs;
pub mod io;
pub mod point_process;
pub mod seed;
pub mod spatial;
pub mod union_find;
pub mod percolation;
pub mod quadrature;
pub mod bounds;
pub mod rolling_ball;
