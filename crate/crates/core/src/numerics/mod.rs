//! Special functions and quadrature shared by every other module.

pub mod gamma;
pub mod kronrod;
pub mod laguerre;
pub mod quadrature;
pub mod series;
pub mod tanh_sinh;

pub use gamma::{log_gamma, log_sphere_area, log_unit_ball_volume};
pub use laguerre::laguerre_eval;
pub use quadrature::{gauss_laguerre, QuadratureRule};
pub use series::LaguerreSeries;
