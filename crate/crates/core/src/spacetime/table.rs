use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{zero_mat4, Mat4};
use crate::Real;

use super::Event;

/// Column order of the ten independent metric components.
const COMPONENTS: [(usize, usize); 10] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 1),
    (1, 2),
    (1, 3),
    (2, 2),
    (2, 3),
    (3, 3),
];

const HEADER: [&str; 14] = [
    "t", "x1", "x2", "x3", "g00", "g01", "g02", "g03", "g11", "g12", "g13", "g22", "g23", "g33",
];

/// Metric components sampled on a regular 4D lattice, interpolated
/// multilinearly in `(t, x¹, x², x³)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable<T> {
    axes: [Vec<T>; 4],
    values: Vec<[T; 10]>,
}

impl<T: Real> MetricTable<T> {
    /// Samples `metric` on the tensor-product lattice spanned by `axes`.
    pub fn from_fn<F>(axes: [Vec<T>; 4], metric: F) -> Result<Self>
    where
        F: Fn(&Event<T>) -> Mat4<T>,
    {
        validate_axes(&axes)?;
        let mut values = Vec::with_capacity(axes.iter().map(Vec::len).product());
        for &t in &axes[0] {
            for &x in &axes[1] {
                for &y in &axes[2] {
                    for &z in &axes[3] {
                        let g = metric(&[t, x, y, z]);
                        values.push(COMPONENTS.map(|(i, j)| g[i][j]));
                    }
                }
            }
        }
        Ok(Self { axes, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn axes(&self) -> &[Vec<T>; 4] {
        &self.axes
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::Table(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(file)
    }

    /// Reads the `t,x1,x2,x3,g00,...,g33` format. Rows may come in any order
    /// but must cover the full lattice exactly once.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| Error::Table(e.to_string()))?
            .clone();
        if header.len() != HEADER.len() || header.iter().zip(HEADER).any(|(a, b)| a != b) {
            return Err(Error::Table(format!(
                "expected header {}, found {}",
                HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows: Vec<[f64; 14]> = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Table(e.to_string()))?;
            let mut row = [0.0; 14];
            for (k, field) in record.iter().enumerate() {
                row[k] = field
                    .parse::<f64>()
                    .map_err(|e| Error::Table(format!("row {}: column {k}: {e}", line + 2)))?;
                if !row[k].is_finite() {
                    return Err(Error::Table(format!("row {}: non-finite value", line + 2)));
                }
            }
            rows.push(row);
        }
        let mut axes: [Vec<f64>; 4] = Default::default();
        for (k, axis) in axes.iter_mut().enumerate() {
            *axis = rows.iter().map(|r| r[k]).collect();
            axis.sort_by(|a, b| a.partial_cmp(b).unwrap());
            axis.dedup();
        }
        let expected: usize = axes.iter().map(Vec::len).product();
        if expected != rows.len() {
            return Err(Error::Table(format!(
                "{} rows do not form a regular lattice of {} points",
                rows.len(),
                expected
            )));
        }
        let index = |k: usize, x: f64| {
            axes[k]
                .binary_search_by(|a| a.partial_cmp(&x).unwrap())
                .unwrap()
        };
        let mut values = vec![[T::nan(); 10]; expected];
        let (n1, n2, n3) = (axes[1].len(), axes[2].len(), axes[3].len());
        for row in &rows {
            let flat = ((index(0, row[0]) * n1 + index(1, row[1])) * n2 + index(2, row[2])) * n3
                + index(3, row[3]);
            if !values[flat][0].is_nan() {
                return Err(Error::Table(format!(
                    "duplicate lattice point {:?}",
                    &row[..4]
                )));
            }
            values[flat] = std::array::from_fn(|c| T::lit(row[4 + c]));
        }
        let axes = axes.map(|a| a.into_iter().map(T::lit).collect::<Vec<T>>());
        validate_axes(&axes)?;
        Ok(Self { axes, values })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Table(e.to_string());
        w.write_record(HEADER).map_err(io)?;
        let mut flat = 0;
        for t in &self.axes[0] {
            for x in &self.axes[1] {
                for y in &self.axes[2] {
                    for z in &self.axes[3] {
                        let mut rec: Vec<String> =
                            [t, x, y, z].iter().map(|v| format!("{v:e}")).collect();
                        rec.extend(self.values[flat].iter().map(|v| format!("{v:e}")));
                        w.write_record(&rec).map_err(io)?;
                        flat += 1;
                    }
                }
            }
        }
        w.flush().map_err(|e| Error::Table(e.to_string()))
    }

    pub(super) fn check_inside(&self, p: &Event<T>) -> Result<()> {
        for k in 0..4 {
            let axis = &self.axes[k];
            if p[k] < axis[0] || p[k] > axis[axis.len() - 1] {
                return Err(Error::OutOfChart {
                    event: p.map(|x| x.as_f64()),
                    reason: format!(
                        "coordinate {k} = {} outside table range [{}, {}]",
                        p[k],
                        axis[0],
                        axis[axis.len() - 1]
                    ),
                });
            }
        }
        Ok(())
    }

    /// Multilinear interpolation; outside the lattice the boundary cell is
    /// extended linearly, which finite-difference stencils near the edge rely on.
    pub(super) fn interpolate_clamped(&self, p: &Event<T>) -> Mat4<T> {
        let mut cell = [0usize; 4];
        let mut w = [T::zero(); 4];
        for k in 0..4 {
            let axis = &self.axes[k];
            let i = axis
                .partition_point(|&a| a <= p[k])
                .saturating_sub(1)
                .min(axis.len() - 2);
            cell[k] = i;
            w[k] = (p[k] - axis[i]) / (axis[i + 1] - axis[i]);
        }
        let dims = [
            self.axes[0].len(),
            self.axes[1].len(),
            self.axes[2].len(),
            self.axes[3].len(),
        ];
        let mut acc = [T::zero(); 10];
        for corner in 0..16usize {
            let mut weight = T::one();
            let mut flat = 0;
            for k in 0..4 {
                let bit = (corner >> k) & 1;
                weight *= if bit == 1 { w[k] } else { T::one() - w[k] };
                flat = flat * dims[k] + cell[k] + bit;
            }
            for c in 0..10 {
                acc[c] += weight * self.values[flat][c];
            }
        }
        let mut g = zero_mat4();
        for (c, &(i, j)) in COMPONENTS.iter().enumerate() {
            g[i][j] = acc[c];
            g[j][i] = acc[c];
        }
        g
    }
}

fn validate_axes<T: Real>(axes: &[Vec<T>; 4]) -> Result<()> {
    for (k, axis) in axes.iter().enumerate() {
        if axis.len() < 2 {
            return Err(Error::Table(format!(
                "axis {k} needs at least two lattice values"
            )));
        }
        if axis.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Table(format!("axis {k} is not strictly increasing")));
        }
    }
    Ok(())
}
