use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use gpim::vtol::{RegulatorChoice, StateLayout};
use gpim::HybridArcF64;

use crate::run::RunSummary;

/// 17 significant digits; parsing the text back gives the same bits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn trace_header(d: usize) -> String {
    let mut cols = vec!["t".to_string(), "j".into(), "e".into()];
    cols.extend((1..=d).map(|i| format!("eta_{i}")));
    cols.extend(
        ["xi1", "xi2", "sigma2", "u", "w1", "w2", "w3", "w4", "d_w"]
            .iter()
            .map(|s| s.to_string()),
    );
    cols.join(",")
}

/// One row per recorded sample of a closed-loop arc.
pub fn trace_csv(arc: &HybridArcF64, layout: StateLayout) -> String {
    let mut s = trace_header(layout.d);
    s.push('\n');
    let idx = |n: &str| arc.output_index(n).expect("closed-loop outputs");
    let (ie, iu, id) = (idx("e"), idx("u"), idx("d_w"));
    for (t, j, x, y, sigma2) in arc.samples() {
        let mut row = vec![fmt_f64(t), j.to_string(), fmt_f64(y[ie])];
        row.extend(x[layout.eta()].iter().map(|v| fmt_f64(*v)));
        row.push(fmt_f64(x[layout.xi1()]));
        row.push(fmt_f64(x[layout.xi2()]));
        row.push(fmt_f64(sigma2));
        row.push(fmt_f64(y[iu]));
        row.extend(x[layout.w()].iter().map(|v| fmt_f64(*v)));
        row.push(fmt_f64(y[id]));
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// One row per jump; works for any arc whose monitor is the posterior variance.
pub fn jump_csv(arc: &HybridArcF64) -> String {
    let mut s = String::from("j,t,sigma2_pre,sigma2_post,buffer_len\n");
    for r in &arc.jumps {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.j,
            fmt_f64(r.t),
            fmt_f64(r.monitor_pre),
            fmt_f64(r.monitor_post),
            r.discrete_len
        );
    }
    s
}

fn opt(x: Option<f64>) -> String {
    x.map_or("none".into(), fmt_f64)
}

pub fn summary_text(s: &RunSummary) -> String {
    let mut out = String::new();
    let regulator = match s.regulator {
        RegulatorChoice::Gp => "gp",
        RegulatorChoice::Baseline => "baseline",
    };
    let pairs: Vec<(&str, String)> = vec![
        ("regulator", regulator.into()),
        ("exosystem", s.exosystem.to_string()),
        ("t_end", fmt_f64(s.t_end)),
        ("t_final", fmt_f64(s.t_final)),
        ("tail_fraction", fmt_f64(s.tail_fraction)),
        ("tail_sup_e", fmt_f64(s.tail_sup_e)),
        ("head_sup_e", fmt_f64(s.head_sup_e)),
        ("jump_count", s.jump_count.to_string()),
        ("zeno", s.zeno.to_string()),
        ("t_min", opt(s.dwell.t_min)),
        ("t_max", opt(s.dwell.t_max)),
        ("max_post_jump_sigma2", opt(s.dwell.max_post_jump)),
        ("post_jump_below_threshold", s.dwell.post_jump_below_threshold.to_string()),
        ("max_sigma2_rate", opt(s.dwell.max_rate)),
        ("dwell_rate_bound", opt(s.dwell.rate_bound)),
        (
            "dwell_rate_bound_holds",
            s.dwell.rate_bound_holds.map_or("none".into(), |b| b.to_string()),
        ),
        ("dwell_ok", s.dwell.ok().to_string()),
        ("final_buffer_len", s.final_buffer_len.to_string()),
        ("min_detectability", fmt_f64(s.min_detectability)),
        ("steps_accepted", s.steps_accepted.to_string()),
        ("steps_rejected", s.steps_rejected.to_string()),
        ("wall_clock_s", format!("{:.3}", s.wall_clock_s)),
    ];
    for (k, v) in pairs {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}

/// Writes `trace.csv`, `jumps.csv` and `summary.txt` into `dir`.
pub fn export_arc(
    arc: &HybridArcF64,
    layout: StateLayout,
    summary: &RunSummary,
    dir: &Path,
) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("trace.csv"), trace_csv(arc, layout))?;
    fs::write(dir.join("jumps.csv"), jump_csv(arc))?;
    fs::write(dir.join("summary.txt"), summary_text(summary))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Reads a numeric CSV written by this module.
pub fn read_csv(text: &str) -> Result<Table, String> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or("empty file")?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|f| f.parse::<f64>().map_err(|_| format!("row {}: bad field '{f}'", n + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        if row.len() != header.len() {
            return Err(format!("row {}: {} fields, expected {}", n + 1, row.len(), header.len()));
        }
        rows.push(row);
    }
    Ok(Table { header, rows })
}

/// Parses a `key = value` summary file.
pub fn read_summary(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}
