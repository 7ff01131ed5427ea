//! File formats: Matrix Market matrices and run reports.

mod mtx;
mod report;

pub use mtx::{format_matrix_market, parse_matrix_market, read_matrix_market, write_matrix_market};
pub use report::{format_res, read_report_csv, write_report, ReportFormat, ReportRecord, CSV_HEADER};
