//! Meshes: the fixed structured fluid grid and the moving solid mesh.

mod grid;
mod io;
mod solid;

pub use grid::FluidGrid;
pub use io::{parse_solid_mesh, read_solid_mesh, write_solid_mesh, write_solid_mesh_file};
pub use solid::{MeshConfig, SolidMesh, SolidShape};
