//! Batch front-end for the `coulomb-tmatrix` crate: tabulated grids, the
//! cross-representation validation report, and CSV/JSON export.

pub mod export;
pub mod grid;
pub mod validation;

pub use export::{export, export_to_path, ExportError, Exportable, Format};
pub use grid::{run_grid, GridError, GridOutput, GridRow, GridSpec};
pub use validation::{run_validation, Outcome, ValidationError, ValidationReport};
