//! Sizing of the global worker pool from `PERMLAB_THREADS`.

use std::sync::Once;

pub const THREADS_VAR: &str = "PERMLAB_THREADS";

/// Parses a `PERMLAB_THREADS` value. `0`, empty, or unset means automatic.
pub fn parse_threads(value: Option<&str>) -> Result<usize, String> {
    match value.map(str::trim) {
        None | Some("") => Ok(0),
        Some(s) => s
            .parse::<usize>()
            .map_err(|_| format!("{THREADS_VAR} must be a non-negative integer, got {s:?}")),
    }
}

/// Configures the rayon global pool once per process. Later calls are no-ops.
pub fn init_from_env() -> Result<(), String> {
    static INIT: Once = Once::new();
    let threads = parse_threads(std::env::var(THREADS_VAR).ok().as_deref())?;
    INIT.call_once(|| {
        // Fails only if another component already built the global pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    });
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thread_counts_parse() {
        assert_eq!(parse_threads(None), Ok(0));
        assert_eq!(parse_threads(Some(" 4 ")), Ok(4));
        assert_eq!(parse_threads(Some("0")), Ok(0));
        assert!(parse_threads(Some("-1")).is_err());
        assert!(parse_threads(Some("many")).is_err());
    }
}
