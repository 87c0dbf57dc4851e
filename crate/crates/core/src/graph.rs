//! Sparse directed graph in compressed row form, kept in both orientations.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    In,
    Out,
}

/// Edges dropped while building a graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Dropped {
    pub self_loops: usize,
    pub duplicates: usize,
}

/// Directed simple graph: no self-loops, no parallel edges.
///
/// Out- and in-neighbour lists are sorted and are exact transposes of each other.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    n: usize,
    out_offsets: Vec<usize>,
    out_targets: Vec<usize>,
    in_offsets: Vec<usize>,
    in_sources: Vec<usize>,
}

impl DirectedGraph {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            out_offsets: vec![0; n + 1],
            out_targets: Vec::new(),
            in_offsets: vec![0; n + 1],
            in_sources: Vec::new(),
        }
    }

    /// Builds a graph on `n` nodes, silently dropping self-loops and repeated edges.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<(Self, Dropped)>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut dropped = Dropped::default();
        let mut list = Vec::new();
        for (s, t) in edges {
            for node in [s, t] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if s == t {
                dropped.self_loops += 1;
                continue;
            }
            list.push((s, t));
        }
        list.sort_unstable();
        let before = list.len();
        list.dedup();
        dropped.duplicates = before - list.len();
        Ok((Self::from_sorted_unique(n, &list), dropped))
    }

    // `edges` must be sorted, unique, loop-free and in range.
    fn from_sorted_unique(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut out_offsets = vec![0usize; n + 1];
        let mut in_offsets = vec![0usize; n + 1];
        for &(s, t) in edges {
            out_offsets[s + 1] += 1;
            in_offsets[t + 1] += 1;
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
            in_offsets[i + 1] += in_offsets[i];
        }
        let out_targets = edges.iter().map(|&(_, t)| t).collect();
        let mut in_sources = vec![0usize; edges.len()];
        let mut cursor = in_offsets.clone();
        // Sources arrive in increasing order, so each in-list ends up sorted.
        for &(s, t) in edges {
            in_sources[cursor[t]] = s;
            cursor[t] += 1;
        }
        Self {
            n,
            out_offsets,
            out_targets,
            in_offsets,
            in_sources,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.out_targets.len()
    }

    pub fn out_neighbors(&self, i: usize) -> &[usize] {
        &self.out_targets[self.out_offsets[i]..self.out_offsets[i + 1]]
    }

    pub fn in_neighbors(&self, i: usize) -> &[usize] {
        &self.in_sources[self.in_offsets[i]..self.in_offsets[i + 1]]
    }

    pub fn neighbors(&self, i: usize, direction: Direction) -> &[usize] {
        match direction {
            Direction::Out => self.out_neighbors(i),
            Direction::In => self.in_neighbors(i),
        }
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n && self.out_neighbors(i).binary_search(&j).is_ok()
    }

    /// Edges in (source, target) lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.out_neighbors(i).iter().map(move |&j| (i, j)))
    }

    pub fn degree(&self, i: usize, direction: Direction) -> usize {
        self.neighbors(i, direction).len()
    }

    pub fn degree_counts(&self, direction: Direction) -> Vec<usize> {
        (0..self.n).map(|i| self.degree(i, direction)).collect()
    }

    /// Sorted neighbour lists of the undirected simplification: `{i, j}` is
    /// present when either direction is.
    pub fn undirected_neighbors(&self) -> Vec<Vec<usize>> {
        (0..self.n)
            .map(|i| {
                let mut merged = Vec::with_capacity(self.out_neighbors(i).len() + self.in_neighbors(i).len());
                merged.extend_from_slice(self.out_neighbors(i));
                merged.extend_from_slice(self.in_neighbors(i));
                merged.sort_unstable();
                merged.dedup();
                merged
            })
            .collect()
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            *yi = self.out_neighbors(i).iter().map(|&j| x[j]).sum();
        }
    }

    /// `y = A^T x`.
    pub fn mul_transpose_vec(&self, x: &[f64], y: &mut [f64]) {
        for (j, yj) in y.iter_mut().enumerate().take(self.n) {
            *yj = self.in_neighbors(j).iter().map(|&i| x[i]).sum();
        }
    }
}
