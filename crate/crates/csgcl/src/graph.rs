//! Undirected attributed graph: loading, degrees, and the normalized
//! adjacency used by the encoder.
//!
//! Edges are kept twice: once as a canonical undirected list (`u < v`,
//! sorted), which augmentation masks index into, and once as a symmetric
//! CSR adjacency for neighborhood queries.

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Magic bytes of the binary attribute-matrix format.
pub const ATTR_MAGIC: &[u8; 4] = b"CSGM";
/// Magic bytes of the binary embedding-matrix format.
pub const EMBEDDING_MAGIC: &[u8; 4] = b"CSGE";

/// Undirected attributed graph with dense node attributes and optional labels.
///
/// Invariants: the stored adjacency is symmetric, has no self-loops, and
/// every undirected edge appears exactly once in [`AttributedGraph::edges`].
#[derive(Debug, Clone)]
pub struct AttributedGraph {
    num_nodes: usize,
    /// Canonical undirected edge list, `u < v`, sorted lexicographically.
    edges: Vec<(usize, usize)>,
    /// Symmetric 0/1 adjacency; each undirected edge stored in both directions.
    adjacency: CsrMatrix,
    attributes: Array2<f64>,
    labels: Option<Vec<usize>>,
}

impl AttributedGraph {
    /// Builds a graph from an edge list and an attribute matrix.
    ///
    /// Edge pairs are treated as undirected: duplicates and reversed
    /// duplicates collapse to a single edge, and self-loops are dropped.
    pub fn new(
        edges: impl IntoIterator<Item = (usize, usize)>,
        attributes: Array2<f64>,
        labels: Option<Vec<usize>>,
    ) -> Result<Self> {
        let num_nodes = attributes.nrows();
        let mut canonical = BTreeSet::new();
        for (u, v) in edges {
            let id = u.max(v);
            if id >= num_nodes {
                return Err(Error::NodeIdOutOfRange { id, num_nodes });
            }
            if u == v {
                continue; // self-loops only exist inside normalized_adjacency
            }
            canonical.insert((u.min(v), u.max(v)));
        }
        if let Some(ref y) = labels {
            if y.len() != num_nodes {
                return Err(Error::DimensionMismatch {
                    what: "label vector",
                    expected: num_nodes,
                    found: y.len(),
                });
            }
        }
        let edges: Vec<(usize, usize)> = canonical.into_iter().collect();
        let adjacency = CsrMatrix::from_triplets(
            num_nodes,
            num_nodes,
            edges
                .iter()
                .flat_map(|&(u, v)| [(u, v, 1.0), (v, u, 1.0)]),
        );
        Ok(AttributedGraph {
            num_nodes,
            edges,
            adjacency,
            attributes,
            labels,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Canonical undirected edge list (`u < v`, sorted).
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Symmetric 0/1 adjacency in CSR form.
    pub fn adjacency(&self) -> &CsrMatrix {
        &self.adjacency
    }

    /// Dense `n x d` attribute matrix.
    pub fn attributes(&self) -> &Array2<f64> {
        &self.attributes
    }

    pub fn attr_dim(&self) -> usize {
        self.attributes.ncols()
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    /// Neighbors of `v` in ascending order.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency.row(v).map(|(c, _)| c)
    }

    /// Per-node degree: the number of distinct neighbors.
    pub fn degree_vector(&self) -> Vec<usize> {
        (0..self.num_nodes)
            .map(|v| self.neighbors(v).count())
            .collect()
    }

    /// Symmetric renormalized adjacency with self-loops,
    /// `D^{-1/2} (A + I) D^{-1/2}` where `D` is the degree matrix of `A + I`.
    ///
    /// Isolated nodes get only the self-loop entry, value 1.
    pub fn normalized_adjacency(&self) -> CsrMatrix {
        normalized_adjacency_of(self.num_nodes, &self.edges)
    }
}

/// Normalized adjacency of an arbitrary undirected edge set over `n` nodes.
///
/// Shared by the full graph and by perturbed views, whose edge sets differ.
pub fn normalized_adjacency_of(n: usize, edges: &[(usize, usize)]) -> CsrMatrix {
    let mut degree = vec![1.0f64; n]; // A + I
    for &(u, v) in edges {
        degree[u] += 1.0;
        degree[v] += 1.0;
    }
    let inv_sqrt: Vec<f64> = degree.iter().map(|&d| 1.0 / d.sqrt()).collect();
    let mut triplets = Vec::with_capacity(2 * edges.len() + n);
    for (v, &s) in inv_sqrt.iter().enumerate() {
        triplets.push((v, v, s * s));
    }
    for &(u, v) in edges {
        let w = inv_sqrt[u] * inv_sqrt[v];
        triplets.push((u, v, w));
        triplets.push((v, u, w));
    }
    CsrMatrix::from_triplets(n, n, triplets)
}

/// Loads a dataset from an edge-list file, an attribute file, and an
/// optional label file. The attribute row count fixes the node count.
///
/// Edge pairs are undirected regardless of input orientation; directed
/// sources (reverse edges absent) are symmetrized either way, so the
/// `--as-undirected` CLI flag only marks intent.
pub fn load_dataset(
    edge_path: &Path,
    attr_path: &Path,
    label_path: Option<&Path>,
) -> Result<AttributedGraph> {
    let attributes = read_attributes(attr_path)?;
    let edges = read_edge_list(edge_path)?;
    let labels = label_path.map(read_labels).transpose()?;
    AttributedGraph::new(edges, attributes, labels)
}

/// Parses a whitespace-separated `u v` edge list. Lines starting with `#`
/// and blank lines are ignored.
pub fn read_edge_list(path: &Path) -> Result<Vec<(usize, usize)>> {
    let text = fs::read_to_string(path)?;
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<usize> {
            tok.and_then(|t| t.parse().ok()).ok_or_else(|| Error::Format {
                path: path.to_path_buf(),
                detail: format!("line {}: expected `u v` integer pair", lineno + 1),
            })
        };
        let u = parse(parts.next())?;
        let v = parse(parts.next())?;
        if parts.next().is_some() {
            return Err(Error::Format {
                path: path.to_path_buf(),
                detail: format!("line {}: trailing tokens after `u v`", lineno + 1),
            });
        }
        edges.push((u, v));
    }
    Ok(edges)
}

/// Reads an attribute matrix, accepting either the binary `CSGM` format or
/// comma-separated text with one row per node.
pub fn read_attributes(path: &Path) -> Result<Array2<f64>> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(ATTR_MAGIC) {
        return decode_matrix(&bytes, ATTR_MAGIC, path);
    }
    let text = String::from_utf8(bytes).map_err(|_| Error::Format {
        path: path.to_path_buf(),
        detail: "attribute file is neither CSGM binary nor UTF-8 text".into(),
    })?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|tok| {
                tok.trim().parse::<f64>().map_err(|_| Error::Format {
                    path: path.to_path_buf(),
                    detail: format!("line {}: non-numeric attribute entry `{tok}`", lineno + 1),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Format {
                    path: path.to_path_buf(),
                    detail: format!(
                        "line {}: row has {} entries, expected {}",
                        lineno + 1,
                        row.len(),
                        first.len()
                    ),
                });
            }
        }
        rows.push(row);
    }
    let n = rows.len();
    let d = rows.first().map_or(0, Vec::len);
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((n, d), flat).map_err(|_| Error::Format {
        path: path.to_path_buf(),
        detail: "ragged attribute rows".into(),
    })
}

/// Reads a label file: one integer per line, line index = node id.
pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(lineno, l)| {
            l.trim().parse::<usize>().map_err(|_| Error::Format {
                path: path.to_path_buf(),
                detail: format!("line {}: non-integer label `{}`", lineno + 1, l.trim()),
            })
        })
        .collect()
}

/// Writes the canonical edge list: one `u v` line per undirected edge.
pub fn write_edge_list(path: &Path, edges: &[(usize, usize)]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for &(u, v) in edges {
        writeln!(w, "{u} {v}")?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a dense matrix in the shared binary layout: 4 magic bytes, then
/// `n` and `d` as little-endian u64, then `n*d` little-endian f64 row-major.
pub fn write_matrix(path: &Path, magic: &[u8; 4], matrix: &Array2<f64>) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(magic)?;
    w.write_all(&(matrix.nrows() as u64).to_le_bytes())?;
    w.write_all(&(matrix.ncols() as u64).to_le_bytes())?;
    for row in matrix.rows() {
        for &x in row.iter() {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a dense matrix written by [`write_matrix`], checking the magic.
pub fn read_matrix(path: &Path, magic: &[u8; 4]) -> Result<Array2<f64>> {
    let bytes = fs::read(path)?;
    decode_matrix(&bytes, magic, path)
}

fn decode_matrix(bytes: &[u8], magic: &[u8; 4], path: &Path) -> Result<Array2<f64>> {
    let format_err = |detail: String| Error::Format {
        path: path.to_path_buf(),
        detail,
    };
    if bytes.len() < 20 || &bytes[..4] != magic {
        return Err(format_err(format!(
            "expected magic {:?}",
            String::from_utf8_lossy(magic)
        )));
    }
    let n = u64::from_le_bytes(bytes[4..12].try_into().unwrap()) as usize;
    let d = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    let expected = 20 + 8 * n * d;
    if bytes.len() != expected {
        return Err(format_err(format!(
            "expected {expected} bytes for a {n}x{d} matrix, found {}",
            bytes.len()
        )));
    }
    let values: Vec<f64> = bytes[20..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Array2::from_shape_vec((n, d), values)
        .map_err(|_| format_err("matrix shape mismatch".into()))
}
