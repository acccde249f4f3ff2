//! Grid-parallel sweeps.

use interfersim_core::experiment::{
    evaluate_row, sweep_columns, ExperimentGraph, ResultRow, ResultTable, SweepConfig, TableMeta,
};
use interfersim_core::{Error, Result};
use rayon::prelude::*;

/// Environment variable capping sweep parallelism.
pub const THREADS_VAR: &str = "INTERFERSIM_THREADS";

/// Reads [`THREADS_VAR`]: `Ok(None)` when unset, an error unless it is a
/// positive integer.
pub fn thread_limit() -> std::result::Result<Option<usize>, String> {
    match std::env::var(THREADS_VAR) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(format!("{THREADS_VAR}: {e}")),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("{THREADS_VAR} must be a positive integer, got `{v}`")),
        },
    }
}

/// Like [`interfersim_core::experiment::sweep`], with grid points evaluated
/// on up to `threads` workers (all cores when `None`). Rows stay in grid
/// order.
pub fn sweep_parallel(graph: &ExperimentGraph, config: &SweepConfig, threads: Option<usize>) -> Result<ResultTable> {
    if config.grid.is_empty() {
        return Err(Error::Domain("sweep grid is empty".into()));
    }
    let cond = config.condition.as_ref();
    let template = graph.with_theta(config.parameter, config.grid[0])?;
    let columns = sweep_columns(&template, cond);
    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(threads.unwrap_or(0)).build().map_err(|e| Error::Domain(e.to_string()))?;
    let rows = pool.install(|| {
        config
            .grid
            .par_iter()
            .map(|&theta| {
                let g = graph.with_theta(config.parameter, theta)?;
                Ok(ResultRow { theta, values: evaluate_row(&g, &columns, cond)? })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(ResultTable {
        meta: TableMeta::new(graph, config.parameter),
        columns: columns.into_iter().map(|c| c.header).collect(),
        rows,
    })
}
