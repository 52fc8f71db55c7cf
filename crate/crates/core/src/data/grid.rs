use std::fs::File;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use crate::classify::KnnModel;
use crate::embedding::EmbeddingModel;
use crate::error::{GeuError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridBounds {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl GridBounds {
    /// Bounding box of the first two columns, padded by `margin` of its extent.
    pub fn around(points: &DMatrix<f64>, margin: f64) -> Self {
        let (xmin, xmax) = (points.column(0).min(), points.column(0).max());
        let (ymin, ymax) = (points.column(1).min(), points.column(1).max());
        let (px, py) = (margin * (xmax - xmin), margin * (ymax - ymin));
        Self { xmin: xmin - px, xmax: xmax + px, ymin: ymin - py, ymax: ymax + py }
    }
}

/// Predicted labels on a `resolution × resolution` lattice, row `y`-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionGrid {
    pub resolution: usize,
    pub bounds: GridBounds,
    pub labels: Vec<usize>,
}

impl DecisionGrid {
    fn coord(lo: f64, hi: f64, i: usize, res: usize) -> f64 {
        if res == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (res - 1) as f64
        }
    }

    /// Lattice point of cell `idx`.
    pub fn point(&self, idx: usize) -> (f64, f64) {
        let r = self.resolution;
        let b = &self.bounds;
        (Self::coord(b.xmin, b.xmax, idx % r, r), Self::coord(b.ymin, b.ymax, idx / r, r))
    }

    pub fn label_at(&self, ix: usize, iy: usize) -> usize {
        self.labels[iy * self.resolution + ix]
    }

    /// Fraction of cells on which two equally shaped grids agree.
    pub fn agreement(&self, other: &DecisionGrid) -> Result<f64> {
        if self.labels.len() != other.labels.len() {
            return Err(GeuError::LengthMismatch { left: self.labels.len(), right: other.labels.len() });
        }
        let same = self.labels.iter().zip(&other.labels).filter(|(a, b)| a == b).count();
        Ok(same as f64 / self.labels.len().max(1) as f64)
    }

    /// `x,y,label` rows.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let io = |e| GeuError::io(path, e);
        let mut out = std::io::BufWriter::new(File::create(path).map_err(io)?);
        writeln!(out, "x,y,label").map_err(io)?;
        for (idx, label) in self.labels.iter().enumerate() {
            let (x, y) = self.point(idx);
            writeln!(out, "{x:?},{y:?},{label}").map_err(io)?;
        }
        out.flush().map_err(io)
    }
}

/// Classify every lattice point of `bounds` through `model` and `knn`.
pub fn decision_grid(model: &EmbeddingModel, knn: &KnnModel, bounds: GridBounds, resolution: usize) -> Result<DecisionGrid> {
    if model.input_dim() != 2 {
        return Err(GeuError::NotTwoDimensional(model.input_dim()));
    }
    if resolution == 0 {
        return Err(GeuError::InvalidParameter("grid resolution must be >= 1".into()));
    }
    let mut grid = DecisionGrid { resolution, bounds, labels: Vec::new() };
    let cells = resolution * resolution;
    let lattice = DMatrix::from_fn(cells, 2, |idx, c| {
        let (x, y) = grid.point(idx);
        if c == 0 {
            x
        } else {
            y
        }
    });
    grid.labels = knn.predict(&model.project_rows(&lattice)?)?;
    Ok(grid)
}
