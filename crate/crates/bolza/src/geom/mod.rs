//! Surface geometry: the Bolza octagon, its Fuchsian group, triangulations
//! with paired boundary, hyperbolic metric data and quadrature.

pub mod group;
pub mod mesh;
pub mod metric;
pub mod moebius;
pub mod quad;

pub use group::{build_genus2_group, FuchsianGroup};
pub use mesh::{mesh_domain, mesh_domain_level, refine_mesh, TriangulatedDomain, VertOwner, VertTag};
pub use metric::{build_metric, total_area, HyperbolicMetric};
pub use moebius::{hyp_dist, hyp_interp, hyp_midpoint, MoebiusMap, C};
