//! Table rendering and figure data.

mod figure;
mod table;

pub use figure::{
    figure_data, figure_document, Axis, FigureDocument, FigureInputs, FigureKind, FigurePoint,
    FigureSeries, LABEL_THRESHOLD,
};
pub use table::{format_count, format_weight, render_table, TableFormat, CSV_COLUMNS};
