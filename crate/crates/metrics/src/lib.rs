//! Post-processing of per-view simulation records: throughput/latency
//! series, faulty-leader and timeout rates, election-quality windows and
//! the CSV/JSON report files.

pub mod gamma;
pub mod output;
pub mod records;
pub mod series;

pub use gamma::{gamma_windows, GammaError, GammaReport};
pub use output::{faulty_leader_rate, write_per_view_csv, write_summary_json, Summary};
pub use records::{resolve_leader, ViewRecord};
pub use series::{instantaneous_series, Series, SeriesPoint};
