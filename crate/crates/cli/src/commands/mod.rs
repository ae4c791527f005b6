pub mod features;
pub mod report;
pub mod run;
pub mod select;
pub mod splits;
pub mod testbed;

use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

/// Refuses to clobber an existing output unless `force` is set.
pub fn check_output(path: &Path, force: bool) -> CliResult<()> {
    if path.exists() && !force {
        return Err(CliError::usage(format!("{} exists; pass --force to overwrite", path.display())));
    }
    Ok(())
}

pub fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::data(format!("cannot create {}: {e}", dir.display())))
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}

/// Parses a comma-separated list, rejecting empties and duplicates.
pub fn parse_list<T>(text: &str, what: &str) -> CliResult<Vec<T>>
where
    T: FromStr<Err = instasel::Error> + PartialEq,
{
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let v: T = item.parse().map_err(|e: instasel::Error| CliError::usage(e.to_string()))?;
        if out.contains(&v) {
            return Err(CliError::usage(format!("{what} {item:?} listed twice")));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(CliError::usage(format!("no {what} given")));
    }
    Ok(out)
}
