// Regenerates a figure dataset and writes it as CSV and JSON.

use coupled_cavities::experiments::{export, import_json, run_figure, ExportFormat, FigureId};
use coupled_cavities::Result;

pub fn run_example() -> Result<usize> {
    let ds = run_figure(FigureId::Fig11)?;
    let dir = std::env::temp_dir().join(format!("cavity-sim-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|source| coupled_cavities::Error::Io { path: dir.clone(), source })?;
    let csv = dir.join("fig11.csv");
    let json = dir.join("fig11.json");
    export(&ds, ExportFormat::Csv, &csv)?;
    export(&ds, ExportFormat::Json, &json)?;
    let back = import_json(&json)?;
    println!("{} rows x {} columns -> {}", ds.rows.len(), ds.columns.len(), dir.display());
    for (key, value) in ds.provenance.iter().filter(|(k, _)| k.starts_with("S_")) {
        println!("{key} = {value}");
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(back.rows.len())
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
