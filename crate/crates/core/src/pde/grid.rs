use crate::error::{Error, Result};

/// Largest ratio of neighbouring cell sizes in clustered grids.
pub const MAX_RATIO: f64 = 1.1;
pub const DEFAULT_RATIO: f64 = 1.05;

/// Nodes of a one-dimensional grid, strictly increasing.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub nodes: Vec<f64>,
}

impl Grid {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 || nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Precondition(
                "grid needs at least three strictly increasing nodes".into(),
            ));
        }
        Ok(Grid { nodes })
    }

    pub fn uniform(lo: f64, hi: f64, cells: usize) -> Self {
        let h = (hi - lo) / cells as f64;
        let mut nodes: Vec<f64> = (0..=cells).map(|i| lo + h * i as f64).collect();
        nodes[cells] = hi;
        Grid { nodes }
    }

    /// Uniform bulk spacing `h` with geometric refinement toward either end.
    /// `fine_lo` / `fine_hi` give the smallest cell at that end; cells grow by
    /// `ratio` until they reach the bulk spacing.
    pub fn clustered(
        lo: f64,
        hi: f64,
        h: f64,
        fine_lo: Option<f64>,
        fine_hi: Option<f64>,
        ratio: f64,
    ) -> Self {
        let ratio = ratio.clamp(1.0 + 1e-6, MAX_RATIO);
        let length = hi - lo;
        let h = h.min(length / 4.0);
        let ramp = |fine: Option<f64>| -> Vec<f64> {
            let mut cells = Vec::new();
            if let Some(mut c) = fine {
                while c < h {
                    cells.push(c);
                    c *= ratio;
                }
            }
            cells
        };
        let mut left = ramp(fine_lo);
        let mut right = ramp(fine_hi);
        let total = |v: &[f64]| v.iter().sum::<f64>();
        while total(&left) + total(&right) > length - h {
            let l = left.last().copied().unwrap_or(0.0);
            let r = right.last().copied().unwrap_or(0.0);
            if l >= r {
                left.pop();
            } else {
                right.pop();
            }
            if left.is_empty() && right.is_empty() {
                break;
            }
        }
        let middle = length - total(&left) - total(&right);
        let n_mid = ((middle / h).ceil() as usize).max(1);
        let mut cells = left;
        cells.extend(std::iter::repeat_n(middle / n_mid as f64, n_mid));
        cells.extend(right.into_iter().rev());

        let mut nodes = Vec::with_capacity(cells.len() + 1);
        let mut x = lo;
        nodes.push(lo);
        // Accumulate from the nearer end so tiny cells next to each boundary keep their precision.
        let split = cells.len() / 2;
        for c in &cells[..split] {
            x += c;
            nodes.push(x);
        }
        let mut tail = Vec::with_capacity(cells.len() - split);
        let mut y = hi;
        for c in cells[split..].iter().rev() {
            tail.push(y);
            y -= c;
        }
        tail.reverse();
        nodes.extend(tail);
        nodes.dedup();
        Grid { nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn lo(&self) -> f64 {
        self.nodes[0]
    }

    pub fn hi(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Index of the node closest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let i = self.nodes.partition_point(|&v| v < x);
        if i == 0 {
            0
        } else if i >= self.nodes.len() {
            self.nodes.len() - 1
        } else if (self.nodes[i] - x).abs() < (x - self.nodes[i - 1]).abs() {
            i
        } else {
            i - 1
        }
    }

    /// Largest ratio between neighbouring cells.
    pub fn max_ratio(&self) -> f64 {
        self.nodes
            .windows(3)
            .map(|w| {
                let (a, b) = (w[1] - w[0], w[2] - w[1]);
                (a / b).max(b / a)
            })
            .fold(1.0, f64::max)
    }
}
