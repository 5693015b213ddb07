use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use largesol::cheeger::{cheeger_constant, h_field_with, HValue};
use rayon::prelude::*;

use crate::error::CliError;
use crate::setup::parse_shape;

#[derive(Debug, Args)]
pub struct CheegerArgs {
    /// Convex shape: disk:R, square:a, rect:WxH or polygon:x,y;...
    #[arg(long)]
    pub shape: String,
    /// Evaluate H_C on an m x m grid over the bounding box.
    #[arg(long, requires = "out")]
    pub raster: Option<usize>,
    /// Destination of the (x, y, H_C) raster CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(a: &CheegerArgs) -> Result<(), CliError> {
    let shape = parse_shape(&a.shape)?;
    let ch = cheeger_constant(&shape);
    say!("r_star = {:.10}", ch.r_star);
    say!("h = {:.7}", ch.h);
    say!("calibrable = {}", ch.calibrable);

    if let (Some(m), Some(path)) = (a.raster, &a.out) {
        if m < 2 {
            return Err(CliError::Usage("--raster must be at least 2".into()));
        }
        let (lo, hi) = shape.bbox();
        let points: Vec<[f64; 2]> = (0..m * m)
            .map(|k| {
                let (i, j) = (k % m, k / m);
                [
                    lo[0] + (i as f64 + 0.5) * (hi[0] - lo[0]) / m as f64,
                    lo[1] + (j as f64 + 0.5) * (hi[1] - lo[1]) / m as f64,
                ]
            })
            .filter(|p| shape.contains(*p))
            .collect();
        let cap = 1e6 * ch.h;
        let values = points
            .par_iter()
            .map(|p| h_field_with(&shape, &ch, *p, cap))
            .collect::<largesol::Result<Vec<_>>>()?;
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "x,y,H_C")?;
        for (p, v) in points.iter().zip(values) {
            match v {
                HValue::Finite(h) => writeln!(w, "{:.16e},{:.16e},{:.16e}", p[0], p[1], h)?,
                HValue::Unbounded => writeln!(w, "{:.16e},{:.16e},inf", p[0], p[1])?,
            }
        }
        w.flush()?;
        say!("raster = {} points -> {}", points.len(), path.display());
    }
    Ok(())
}
