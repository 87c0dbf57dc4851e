//! Node attribute tables: raw real-valued columns and the binary matrix `F`.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// `N x L` matrix of attribute bits, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryAttributeMatrix {
    n_nodes: usize,
    n_attrs: usize,
    bits: Vec<u8>,
}

impl BinaryAttributeMatrix {
    pub fn zeros(n_nodes: usize, n_attrs: usize) -> Self {
        Self {
            n_nodes,
            n_attrs,
            bits: alloc::vec![0; n_nodes * n_attrs],
        }
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let n_attrs = rows.first().map_or(0, Vec::len);
        let mut bits = Vec::with_capacity(rows.len() * n_attrs);
        for row in rows {
            if row.len() != n_attrs {
                return Err(Error::Dimension {
                    what: "attribute row",
                    expected: n_attrs,
                    found: row.len(),
                });
            }
            if row.iter().any(|&b| b > 1) {
                return Err(Error::InvalidParameter("attribute bits must be 0 or 1".to_string()));
            }
            bits.extend_from_slice(row);
        }
        Ok(Self {
            n_nodes: rows.len(),
            n_attrs,
            bits,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_attrs(&self) -> usize {
        self.n_attrs
    }

    pub fn get(&self, i: usize, l: usize) -> u8 {
        self.bits[i * self.n_attrs + l]
    }

    pub fn set(&mut self, i: usize, l: usize, bit: bool) {
        self.bits[i * self.n_attrs + l] = u8::from(bit);
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.bits[i * self.n_attrs..(i + 1) * self.n_attrs]
    }

    pub fn column(&self, l: usize) -> impl Iterator<Item = u8> + '_ {
        (0..self.n_nodes).map(move |i| self.get(i, l))
    }

    /// New matrix made of the given columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        if let Some(&bad) = columns.iter().find(|&&c| c >= self.n_attrs) {
            return Err(Error::Dimension {
                what: "attribute column index",
                expected: self.n_attrs,
                found: bad,
            });
        }
        let mut out = Self::zeros(self.n_nodes, columns.len());
        for i in 0..self.n_nodes {
            for (dst, &src) in columns.iter().enumerate() {
                out.bits[i * columns.len() + dst] = self.get(i, src);
            }
        }
        Ok(out)
    }
}

/// Raw per-node attribute values, row-major, `None` marking a missing cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeTable {
    column_names: Vec<String>,
    values: Vec<Option<f64>>,
    n_nodes: usize,
}

impl AttributeTable {
    pub fn new(column_names: Vec<String>, rows: Vec<Vec<Option<f64>>>) -> Result<Self> {
        let width = column_names.len();
        let n_nodes = rows.len();
        let mut values = Vec::with_capacity(n_nodes * width);
        for row in rows {
            if row.len() != width {
                return Err(Error::Dimension {
                    what: "attribute table row",
                    expected: width,
                    found: row.len(),
                });
            }
            values.extend(row);
        }
        Ok(Self {
            column_names,
            values,
            n_nodes,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_columns(&self) -> usize {
        self.column_names.len()
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn get(&self, i: usize, c: usize) -> Option<f64> {
        self.values[i * self.n_columns() + c]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }
}

/// Binarizes columns: bit 1 when the value is strictly below the column's lower
/// median. Missing cells take the median and therefore map to 0.
pub fn binarize_by_median<S: AsRef<str>>(
    table: &AttributeTable,
    columns: &[S],
) -> Result<BinaryAttributeMatrix> {
    let mut out = BinaryAttributeMatrix::zeros(table.n_nodes(), columns.len());
    for (dst, name) in columns.iter().enumerate() {
        let name = name.as_ref();
        let c = table
            .column_index(name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
        let mut observed: Vec<f64> = (0..table.n_nodes()).filter_map(|i| table.get(i, c)).collect();
        if observed.is_empty() {
            return Err(Error::EmptyColumn(name.to_string()));
        }
        observed.sort_unstable_by(f64::total_cmp);
        let median = observed[(observed.len() - 1) / 2];
        for i in 0..table.n_nodes() {
            let below = table.get(i, c).is_some_and(|v| v < median);
            out.set(i, dst, below);
        }
    }
    Ok(out)
}
