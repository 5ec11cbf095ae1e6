//! Fixed-grid datasets behind `preset fig2|fig3|fig4`.

use std::f64::consts::PI;
use std::fmt;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::ValueEnum;

use super::output::write_csv;
use super::spec::{Grid, SweepSpec};
use super::sweep::run_sweep;
use crate::error::{Error, Result};
use crate::models::ModelId;
use crate::noise_figure::Regime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Phase-insensitive gain and noise figure versus xi.
    Fig2,
    /// Phase-sensitive gain and noise figure versus xi at theta = 0.
    Fig3,
    /// Phase-sensitive gain and noise figure versus theta at xi = 2.
    Fig4,
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
        })
    }
}

/// xi from 0 to 50 in steps of 0.05.
fn xi_axis() -> Grid {
    Grid::linear(0.0, 50.0, 1001)
}

/// theta from -2 pi to 2 pi in steps of pi / 180.
fn theta_axis() -> Grid {
    Grid::linear(-2.0 * PI, 2.0 * PI, 721)
}

/// File name and sweep of every dataset in the preset, one per model.
pub fn preset_specs(preset: Preset) -> Vec<(String, SweepSpec)> {
    [ModelId::FourMode, ModelId::TwoMode]
        .into_iter()
        .map(|model| {
            let name = format!("{preset}_{model}.csv");
            let spec = match preset {
                Preset::Fig2 => SweepSpec::new(model, xi_axis(), Regime::Pia),
                Preset::Fig3 => SweepSpec::new(model, xi_axis(), Regime::Psa),
                Preset::Fig4 => {
                    let mut s = SweepSpec::new(model, Grid::single(2.0), Regime::Psa);
                    s.theta_grid = theta_axis();
                    s
                }
            };
            (name, spec)
        })
        .collect()
}

/// Writes every dataset of `preset` into `dir`, returning the file paths.
pub fn run_preset(preset: Preset, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    for (name, spec) in preset_specs(preset) {
        let rows = run_sweep(&spec)?;
        let path = dir.join(name);
        let file = File::create(&path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        write_csv(&rows, BufWriter::new(file))?;
        log::info!("wrote {} rows to {}", rows.len(), path.display());
        written.push(path);
    }
    Ok(written)
}
