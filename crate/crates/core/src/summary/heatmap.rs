use crate::model::{PITCH_LENGTH_M, PITCH_WIDTH_M};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub cols: usize,
    pub rows: usize,
    pub length_m: f64,
    pub width_m: f64,
    /// Positions at most this far outside the pitch are clamped onto it.
    pub clamp_margin_m: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { cols: 21, rows: 14, length_m: PITCH_LENGTH_M, width_m: PITCH_WIDTH_M, clamp_margin_m: 0.5 }
    }
}

impl GridConfig {
    /// Cell `(col, row)` of a position, or `None` when it is too far outside.
    /// Bins are half-open; the far pitch edge falls into the last cell.
    pub fn cell_of(&self, pos: (f64, f64)) -> Option<(usize, usize)> {
        let m = self.clamp_margin_m;
        let (x, y) = pos;
        if !(x.is_finite() && y.is_finite()) || x < -m || y < -m || x > self.length_m + m || y > self.width_m + m {
            return None;
        }
        let x = x.clamp(0.0, self.length_m);
        let y = y.clamp(0.0, self.width_m);
        let col = ((x / (self.length_m / self.cols as f64)).floor() as usize).min(self.cols - 1);
        let row = ((y / (self.width_m / self.rows as f64)).floor() as usize).min(self.rows - 1);
        Some((col, row))
    }
}

/// Ball-position counts per cell, row-major with rows along the y axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeatmapGrid {
    pub cols: usize,
    pub rows: usize,
    pub counts: Vec<u64>,
    /// Positions rejected for lying too far outside the pitch.
    pub dropped: u64,
}

impl HeatmapGrid {
    pub fn new(cols: usize, rows: usize) -> Self {
        Self { cols, rows, counts: vec![0; cols * rows], dropped: 0 }
    }

    pub fn get(&self, col: usize, row: usize) -> u64 {
        self.counts[row * self.cols + col]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Adds a position and returns its cell, counting it as dropped when it
    /// cannot be placed.
    pub fn add(&mut self, config: &GridConfig, pos: (f64, f64)) -> Option<(usize, usize)> {
        match config.cell_of(pos) {
            Some((c, r)) => {
                self.counts[r * self.cols + c] += 1;
                Some((c, r))
            }
            None => {
                self.dropped += 1;
                None
            }
        }
    }

    pub fn row_counts(&self) -> Vec<Vec<u64>> {
        self.counts.chunks(self.cols).map(<[u64]>::to_vec).collect()
    }

    /// One line per y row, comma separated.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for row in self.counts.chunks(self.cols) {
            let line: Vec<String> = row.iter().map(u64::to_string).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }
}

pub fn ball_heatmap(positions: impl IntoIterator<Item = (f64, f64)>, config: &GridConfig) -> HeatmapGrid {
    let mut grid = HeatmapGrid::new(config.cols, config.rows);
    for p in positions {
        grid.add(config, p);
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell() {
        let g = ball_heatmap(std::iter::repeat_n((12.0, 30.0), 100), &GridConfig::default());
        assert_eq!(g.get(2, 6), 100);
        assert_eq!(g.total(), 100);
    }

    #[test]
    fn boundaries() {
        let cfg = GridConfig::default();
        assert_eq!(cfg.cell_of((5.0, 0.0)), Some((1, 0)));
        assert_eq!(cfg.cell_of((4.999, 0.0)), Some((0, 0)));
        assert_eq!(cfg.cell_of((105.0, 68.0)), Some((20, 13)));
        assert_eq!(cfg.cell_of((-0.5, 68.4)), Some((0, 13)));
        assert_eq!(cfg.cell_of((-0.6, 10.0)), None);
    }

    #[test]
    fn conservation_with_drops() {
        let pts = [(1.0, 1.0), (200.0, 1.0), (104.9, 67.9), (-3.0, -3.0), (50.0, 34.0)];
        let g = ball_heatmap(pts, &GridConfig::default());
        assert_eq!(g.total(), 3);
        assert_eq!(g.dropped, 2);
    }

    #[test]
    fn csv_layout() {
        let cfg = GridConfig { cols: 3, rows: 2, length_m: 3.0, width_m: 2.0, clamp_margin_m: 0.0 };
        let g = ball_heatmap([(2.5, 1.5), (0.1, 0.1), (0.2, 0.2)], &cfg);
        assert_eq!(g.to_csv(), "2,0,0\n0,0,1\n");
    }
}
