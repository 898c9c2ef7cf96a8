//! Chebyshev infrastructure: series, grids, transforms, roots, proxies and norms.

pub mod grid;
pub mod norms;
pub mod proxy;
pub mod roots;
pub mod series;
pub mod transform;

pub use grid::{build_grid, interpolate_on_grid, interpolate_values, ChebGrid};
pub use norms::{l0_discrete, l1_discrete, l1_norm, l2_norm, linf_norm, sign_structure, Segment, SignStructure};
pub use proxy::{adaptive_proxy, build_proxy, Corruption, FuncRep, Piece, Piecewise, ProxyOptions};
pub use roots::roots_in_interval;
pub use series::{chebyshev_t_values, chebyshev_u_values, integral_secondkind_segment, legendre, Basis, ChebSeries};
