//! CSV serialization of regret traces and bound tables.

use std::io::{self, Write};

use bge_core::bounds::{
    cor1_bound, tau_explore_commit, thm3_bound, thm4_bound, thm5_gap, thm5_lower, thm6_bound,
    BoundError, BoundInputs, LogArgument,
};
use bge_core::{CellResult, ExperimentGrid};

pub const SCHEMA_VERSION: u32 = 1;

pub const HEADER: &str = "schema_version,scenario,policy,c2,seed,t,cum_regret,pulls_optimal";

/// Scientific notation with 17 significant digits, which parses back exactly.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(
    out: &mut W,
    grid: &ExperimentGrid,
    results: &[CellResult],
    full_counts: bool,
) -> io::Result<()> {
    let base = &grid.base;
    writeln!(out, "# master_seed={}", base.master_seed)?;
    let arms: Vec<String> = base.instance.arms().iter().map(|a| a.to_string()).collect();
    writeln!(out, "# arms={}", arms.join(";"))?;
    write!(
        out,
        "# horizon={} seeds={}",
        base.horizon, base.num_replications
    )?;
    if let Some(m) = base.instance.malicious() {
        write!(
            out,
            " malicious_t0={} override_basis={}",
            m.first,
            format!("{:?}", m.basis).to_lowercase()
        )?;
    }
    writeln!(out)?;
    if full_counts {
        writeln!(out, "{HEADER},pull_counts")?;
    } else {
        writeln!(out, "{HEADER}")?;
    }
    for result in results {
        let c2 = result.cell.c2.map(float).unwrap_or_default();
        for trace in &result.replication.traces {
            for cp in &trace.checkpoints {
                write!(
                    out,
                    "{SCHEMA_VERSION},{},{},{c2},{},{},{},{}",
                    grid.scenario,
                    result.cell.policy,
                    trace.seed,
                    cp.t,
                    float(cp.cum_regret),
                    cp.pull_counts[0],
                )?;
                if full_counts {
                    let counts: Vec<String> = cp.pull_counts.iter().map(u64::to_string).collect();
                    write!(out, ",{}", counts.join(";"))?;
                }
                writeln!(out)?;
            }
        }
    }
    Ok(())
}

/// One line per cell: final mean regret with its standard error.
pub fn write_summary<W: Write>(out: &mut W, results: &[CellResult]) -> io::Result<()> {
    writeln!(
        out,
        "{:<12} {:>10} {:>16} {:>12} {:>6}",
        "policy", "c2", "final_regret", "se", "seeds"
    )?;
    for r in results {
        let s = r.replication.final_summary();
        let n = r.replication.traces.len();
        let c2 = r
            .cell
            .c2
            .map(|c| format!("{c}"))
            .unwrap_or_else(|| "-".into());
        writeln!(
            out,
            "{:<12} {:>10} {:>16.3} {:>12.3} {:>6}",
            r.cell.policy,
            c2,
            s.mean,
            s.sd / (n as f64).sqrt(),
            n
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundParams {
    pub k: u64,
    pub t: u64,
    /// Gap shared by every suboptimal arm.
    pub gap: f64,
    pub sigma: f64,
    pub v: f64,
    pub big_c: f64,
    pub small_c: f64,
    pub log_argument: LogArgument,
}

pub fn bound_rows(p: &BoundParams) -> Vec<(&'static str, Result<f64, BoundError>)> {
    let inputs = BoundInputs {
        gaps: vec![p.gap; p.k.saturating_sub(1) as usize],
        sigma: p.sigma,
        v: p.v,
        big_c: p.big_c,
        small_c: p.small_c,
        k: p.k,
        t: p.t,
        log_argument: p.log_argument,
    };
    vec![
        ("tau_explore_commit", tau_explore_commit(p.k, p.t, p.gap)),
        ("thm3_bound", thm3_bound(p.k, p.t, p.gap)),
        ("thm4_bound", thm4_bound(&inputs)),
        ("cor1_bound", cor1_bound(p.sigma, p.k, p.t)),
        ("thm5_gap", thm5_gap(p.k, p.t)),
        ("thm5_lower", thm5_lower(p.k, p.t)),
        ("thm6_bound", thm6_bound(&inputs)),
    ]
}

pub fn write_bounds<W: Write>(out: &mut W, p: &BoundParams, csv: bool) -> io::Result<()> {
    let rows = bound_rows(p);
    if csv {
        writeln!(
            out,
            "# K={} T={} gap={} sigma={} V={} C={} c={}",
            p.k, p.t, p.gap, p.sigma, p.v, p.big_c, p.small_c
        )?;
        writeln!(out, "bound,value,error")?;
        for (name, value) in rows {
            match value {
                Ok(v) => writeln!(out, "{name},{},", float(v))?,
                Err(e) => writeln!(out, "{name},,\"{e}\"")?,
            }
        }
        return Ok(());
    }
    writeln!(
        out,
        "K = {}, T = {}, gap = {}, sigma = {}, V = {}, C = {}, c = {}",
        p.k, p.t, p.gap, p.sigma, p.v, p.big_c, p.small_c
    )?;
    for (name, value) in rows {
        match value {
            Ok(v) => writeln!(out, "{name:<20} {v:>24.6}")?,
            Err(e) => writeln!(out, "{name:<20} {:>24}  ({e})", "n/a")?,
        }
    }
    Ok(())
}
