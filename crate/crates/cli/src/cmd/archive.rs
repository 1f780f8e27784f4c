use std::path::PathBuf;

use drq_core::archive::ArchiveSnapshot;
use drq_core::drq::load_archive_file;
use drq_core::render::heatmap_ppm;

use crate::failure::{write_err, Failure};
use crate::table::{opt_num, Table};

#[derive(clap::Args)]
pub struct Args {
    /// One or more `archive.snapshot` files; several are averaged cell-wise.
    #[arg(required = true)]
    snapshots: Vec<PathBuf>,
    /// Also draw the grid as a PPM heatmap.
    #[arg(long)]
    image: Option<PathBuf>,
    /// Pixels per cell in the heatmap.
    #[arg(long, default_value_t = 16)]
    scale: usize,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

/// Rows are thread bins, columns coverage bins; empty cells are blank.
pub fn grid_table(grid: &[Vec<Option<f64>>]) -> Table {
    let cols = grid.first().map_or(0, Vec::len);
    let mut header = vec!["thread_bin".to_string()];
    header.extend((0..cols).map(|c| format!("coverage_{c}")));
    let mut table = Table::new(&header);
    for (r, row) in grid.iter().enumerate() {
        let mut line = vec![r.to_string()];
        line.extend(row.iter().map(|v| opt_num(*v)));
        table.push(line);
    }
    table
}

pub fn run(args: Args) -> Result<(), Failure> {
    let snapshots: Vec<ArchiveSnapshot> =
        args.snapshots.iter().map(|p| load_archive_file(p)).collect::<Result<_, _>>()?;
    let grid = ArchiveSnapshot::mean_grid(&snapshots)
        .ok_or_else(|| Failure::input("snapshots have different grid dimensions"))?;
    let occupied = grid.iter().flatten().filter(|c| c.is_some()).count();
    eprintln!("{} snapshot(s), {occupied} occupied cell(s)", snapshots.len());
    if let Some(path) = &args.image {
        let max = grid.iter().flatten().flatten().cloned().fold(0.0, f64::max);
        std::fs::write(path, heatmap_ppm(&grid, max, args.scale)).map_err(write_err(path))?;
    }
    grid_table(&grid).emit(args.output.as_deref())
}
