//! Compressed sparse row graphs and Matrix Market input.
//!
//! Graphs are undirected, unweighted and simple. Indices are 0-based
//! everywhere except inside `.mtx` files.

use std::collections::{HashSet, VecDeque};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{LayoutError, Result};

/// Hop distance marker for vertices not reachable from the BFS source.
pub const UNREACHABLE: u32 = u32::MAX;

/// Symmetric CSR adjacency. Every row is sorted and free of duplicates and
/// self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsrGraph {
    rowptr: Vec<usize>,
    colids: Vec<u32>,
}

/// Bookkeeping about what parsing had to clean up.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GraphMeta {
    pub source: PathBuf,
    /// Entry count declared in the size line.
    pub original_entries: usize,
    pub dropped_self_loops: usize,
    pub dropped_duplicates: usize,
    /// True when the header was not `symmetric`, so the pattern was united with its transpose.
    pub symmetrized: bool,
}

impl CsrGraph {
    /// Builds a graph on `n` vertices from an undirected edge list. Self-loops
    /// and repeated edges are ignored; orientation does not matter.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(LayoutError::EmptyGraph);
        }
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(LayoutError::VertexOutOfRange { vertex: w, n });
                }
            }
            if u != v {
                adj[u].push(v as u32);
                adj[v].push(u as u32);
            }
        }
        Ok(Self::from_adjacency(adj))
    }

    fn from_adjacency(mut adj: Vec<Vec<u32>>) -> Self {
        let mut rowptr = Vec::with_capacity(adj.len() + 1);
        rowptr.push(0);
        let mut colids = Vec::new();
        for row in adj.iter_mut() {
            row.sort_unstable();
            row.dedup();
            colids.extend_from_slice(row);
            rowptr.push(colids.len());
        }
        CsrGraph { rowptr, colids }
    }

    /// Vertex count.
    pub fn n(&self) -> usize {
        self.rowptr.len() - 1
    }

    /// Directed edge-slot count, twice the number of undirected edges.
    pub fn m(&self) -> usize {
        self.colids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.colids.len() / 2
    }

    pub fn rowptr(&self) -> &[usize] {
        &self.rowptr
    }

    pub fn colids(&self) -> &[u32] {
        &self.colids
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.colids[self.rowptr[i]..self.rowptr[i + 1]]
    }

    pub fn degree(&self, i: usize) -> Result<usize> {
        if i >= self.n() {
            return Err(LayoutError::VertexOutOfRange {
                vertex: i,
                n: self.n(),
            });
        }
        Ok(self.rowptr[i + 1] - self.rowptr[i])
    }

    pub fn is_adjacent(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&(j as u32)).is_ok()
    }

    /// Undirected edges `(i, j)` with `i < j`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .map(|&j| j as usize)
                .filter(move |&j| i < j)
                .map(move |j| (i, j))
        })
    }

    /// Shortest hop counts from `source`; unreachable vertices get [`UNREACHABLE`].
    pub fn bfs_distances(&self, source: usize) -> Result<Vec<u32>> {
        if source >= self.n() {
            return Err(LayoutError::VertexOutOfRange {
                vertex: source,
                n: self.n(),
            });
        }
        let mut dist = vec![UNREACHABLE; self.n()];
        self.bfs_into(source, &mut dist, &mut VecDeque::new());
        Ok(dist)
    }

    pub(crate) fn bfs_into(&self, source: usize, dist: &mut [u32], queue: &mut VecDeque<usize>) {
        dist.fill(UNREACHABLE);
        queue.clear();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let next = dist[u] + 1;
            for &v in self.neighbors(u) {
                let v = v as usize;
                if dist[v] == UNREACHABLE {
                    dist[v] = next;
                    queue.push_back(v);
                }
            }
        }
    }

    /// Connected components as lists of vertices, ordered by their smallest
    /// member. Each list starts with that smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for root in 0..n {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            queue.push_back(root);
            let mut members = Vec::new();
            while let Some(u) = queue.pop_front() {
                members.push(u);
                for &v in self.neighbors(u) {
                    let v = v as usize;
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            out.push(members);
        }
        out
    }

    /// Checks every structural invariant. Used by tests and after parsing.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let n = self.n();
        if self.rowptr[0] != 0 {
            return Err("rowptr[0] != 0".into());
        }
        if self.rowptr[n] != self.colids.len() {
            return Err("rowptr[n] != m".into());
        }
        for i in 0..n {
            if self.rowptr[i] > self.rowptr[i + 1] {
                return Err(format!("rowptr decreases at {i}"));
            }
            let row = self.neighbors(i);
            for w in row.windows(2) {
                if w[0] >= w[1] {
                    return Err(format!("row {i} not strictly ascending"));
                }
            }
            for &j in row {
                let j = j as usize;
                if j >= n {
                    return Err(format!("row {i} has column {j} >= n"));
                }
                if j == i {
                    return Err(format!("self-loop at {i}"));
                }
                if !self.is_adjacent(j, i) {
                    return Err(format!("edge ({i},{j}) lacks its reverse"));
                }
            }
        }
        Ok(())
    }

    /// Writes the graph as a symmetric pattern Matrix Market file (lower triangle).
    pub fn write_mtx(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| LayoutError::io(path, e))?;
        let mut w = BufWriter::new(file);
        let write = |w: &mut BufWriter<File>| -> std::io::Result<()> {
            writeln!(w, "%%MatrixMarket matrix coordinate pattern symmetric")?;
            writeln!(w, "{} {} {}", self.n(), self.n(), self.edge_count())?;
            for (i, j) in self.edges() {
                writeln!(w, "{} {}", j + 1, i + 1)?;
            }
            w.flush()
        };
        write(&mut w).map_err(|e| LayoutError::io(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Pattern,
    Real,
    Integer,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

fn parse_header(line: &str) -> Result<(Field, Symmetry)> {
    let bad = |reason: &str| LayoutError::MalformedHeader {
        line: 1,
        reason: reason.to_string(),
    };
    let tokens: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(bad("expected `%%MatrixMarket matrix coordinate <field> <symmetry>`"));
    }
    if tokens[1] != "matrix" {
        return Err(bad("object must be `matrix`"));
    }
    if tokens[2] != "coordinate" {
        return Err(bad("only the coordinate format is supported"));
    }
    let field = match tokens[3].as_str() {
        "pattern" => Field::Pattern,
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "complex" => Field::Complex,
        other => return Err(bad(&format!("unknown field `{other}`"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(bad(&format!("unknown symmetry `{other}`"))),
    };
    Ok((field, symmetry))
}

/// Reads a Matrix Market coordinate file into a [`CsrGraph`].
pub fn parse_mtx(path: impl AsRef<Path>) -> Result<(CsrGraph, GraphMeta)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| LayoutError::io(path, e))?;
    let (graph, mut meta) = read_mtx(BufReader::new(file))?;
    meta.source = path.to_path_buf();
    Ok((graph, meta))
}

/// Same as [`parse_mtx`] on an arbitrary reader; `GraphMeta::source` is left empty.
pub fn read_mtx(reader: impl BufRead) -> Result<(CsrGraph, GraphMeta)> {
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line.map_err(|e| LayoutError::io("<mtx>", e))?,
        None => {
            return Err(LayoutError::MalformedHeader {
                line: 1,
                reason: "empty input".into(),
            })
        }
    };
    let (field, symmetry) = parse_header(&header)?;

    let mut size: Option<(usize, usize, usize)> = None;
    let mut entries: Vec<(usize, usize)> = Vec::new();
    let mut meta = GraphMeta {
        symmetrized: symmetry == Symmetry::General,
        ..GraphMeta::default()
    };

    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.map_err(|e| LayoutError::io("<mtx>", e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut tok = trimmed.split_whitespace();
        let mut next_index = |what: &str| -> Result<usize> {
            tok.next()
                .ok_or_else(|| LayoutError::MalformedEntry {
                    line: lineno,
                    reason: format!("missing {what}"),
                })?
                .parse::<usize>()
                .map_err(|e| LayoutError::MalformedEntry {
                    line: lineno,
                    reason: format!("bad {what}: {e}"),
                })
        };
        match size {
            None => {
                let rows = next_index("row count")?;
                let cols = next_index("column count")?;
                let nnz = next_index("entry count")?;
                size = Some((rows, cols, nnz));
                meta.original_entries = nnz;
                entries.reserve(nnz);
            }
            Some((rows, cols, _)) => {
                let row = next_index("row index")?;
                let col = next_index("column index")?;
                // weights are discarded, but a value must be present where the field demands one
                let values = tok.count();
                let expected = match field {
                    Field::Pattern => 0,
                    Field::Real | Field::Integer => 1,
                    Field::Complex => 2,
                };
                if values < expected {
                    return Err(LayoutError::MalformedEntry {
                        line: lineno,
                        reason: "missing value".into(),
                    });
                }
                if row == 0 || col == 0 || row > rows || col > cols {
                    return Err(LayoutError::IndexOutOfBounds {
                        line: lineno,
                        row,
                        col,
                        rows,
                        cols,
                    });
                }
                entries.push((row - 1, col - 1));
            }
        }
    }

    let (rows, cols, _) = size.ok_or_else(|| LayoutError::MalformedHeader {
        line: 2,
        reason: "missing size line".into(),
    })?;
    let n = rows.max(cols);
    if n == 0 {
        return Err(LayoutError::EmptyGraph);
    }

    let mut seen = HashSet::with_capacity(entries.len());
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (r, c) in entries {
        if r == c {
            meta.dropped_self_loops += 1;
            continue;
        }
        if !seen.insert((r, c)) {
            meta.dropped_duplicates += 1;
            continue;
        }
        adj[r].push(c as u32);
        adj[c].push(r as u32);
    }
    Ok((CsrGraph::from_adjacency(adj), meta))
}
