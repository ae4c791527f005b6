use std::io::Write as _;

use instasel::eval::{read_report_summaries, summaries_markdown};

use super::{check_output, write_file};
use crate::args::ReportArgs;
use crate::config::Settings;
use crate::error::{CliError, CliResult};

pub fn run(args: ReportArgs, _settings: &Settings) -> CliResult<()> {
    if let Some(out) = &args.out {
        check_output(out, args.force)?;
    }
    let mut rows = Vec::new();
    for path in &args.reports {
        rows.extend(read_report_summaries(path)?);
    }
    if rows.is_empty() {
        return Err(CliError::data("no mean/stderr rows found in the given reports"));
    }
    let markdown = summaries_markdown(&rows);
    match &args.out {
        Some(out) => write_file(out, &markdown),
        None => std::io::stdout()
            .lock()
            .write_all(markdown.as_bytes())
            .map_err(|e| CliError::Runtime(format!("cannot write to stdout: {e}"))),
    }
}
