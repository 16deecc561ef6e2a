use anyhow::{Context, Result};
use normcrit::solver::StageRow;
use normcrit::{Discretization, ModeSpace};
use serde::Serialize;
use std::fs;
use std::path::Path;

pub fn write_json<T: Serialize + ?Sized>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

#[derive(Serialize)]
struct TraceRow {
    id: usize,
    stage: usize,
    r: f64,
    energy_penalized: f64,
    energy_unpenalized: f64,
    mass: f64,
    lambda: f64,
    grad_norm: f64,
    penalty: f64,
    drift: f64,
    iterations: usize,
}

/// Per-stage continuation rows of every run, tagged with the run id.
pub fn write_trace(dir: &Path, runs: &[(usize, &[StageRow])]) -> Result<()> {
    let mut w = csv::Writer::from_path(dir.join("trace.csv"))?;
    for (id, stages) in runs {
        for (stage, row) in stages.iter().enumerate() {
            w.serialize(TraceRow {
                id: *id,
                stage,
                r: row.r,
                energy_penalized: row.energy_penalized,
                energy_unpenalized: row.energy_unpenalized,
                mass: row.mass,
                lambda: row.lambda,
                grad_norm: row.grad_norm,
                penalty: row.penalty,
                drift: row.drift,
                iterations: row.iterations,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Nodal values on the whole grid (zero on eliminated boundary nodes) with coordinates.
pub fn write_solution(dir: &Path, id: usize, disc: &Discretization, space: &ModeSpace, u: &[f64]) -> Result<()> {
    let axes = ["x", "y", "z"];
    let dim = disc.dim();
    let mut w = csv::Writer::from_path(dir.join(format!("solution_{id}.csv")))?;
    let mut header = vec!["node"];
    header.extend(&axes[..dim]);
    header.push("value");
    w.write_record(&header)?;
    for (node, v) in space.expand(u).iter().enumerate() {
        let mut rec = vec![node.to_string()];
        rec.extend(disc.node_coords(node).iter().map(|x| x.to_string()));
        rec.push(v.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    write_plot(dir, id, dim)
}

/// Gnuplot script that reads `solution_<id>.csv` and writes `solution_<id>.png`.
fn write_plot(dir: &Path, id: usize, dim: usize) -> Result<()> {
    let data = format!("solution_{id}.csv");
    let body = match dim {
        1 => format!("set xlabel 'x'\nset ylabel 'u'\nplot '{data}' using 2:3 with lines title 'u_{id}'\n"),
        2 => format!(
            "set xlabel 'x'\nset ylabel 'y'\nset view map\nset dgrid3d\nsplot '{data}' using 2:3:4 with pm3d title 'u_{id}'\n"
        ),
        _ => format!("set xlabel 'x'\nset ylabel 'y'\nset zlabel 'z'\nsplot '{data}' using 2:3:4:5 with points palette pt 7 ps 0.5 title 'u_{id}'\n"),
    };
    let script = format!(
        "set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 900,600\nset output 'solution_{id}.png'\n{body}"
    );
    fs::write(dir.join(format!("plot_{id}.gp")), script)?;
    Ok(())
}
