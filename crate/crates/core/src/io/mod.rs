//! File formats for images, traces, CSV inputs and reports.

pub mod pgm;
pub mod report;
pub mod trace;

pub use pgm::{read_pgm, write_pgm};
pub use report::{render_report, summary_csv};
pub use trace::{
    format_sig9, read_attention_csv, read_buffer_csv, read_episode_index, read_run, read_trace,
    write_episode_index, write_run, write_trace, EpisodeIndexRow,
};
