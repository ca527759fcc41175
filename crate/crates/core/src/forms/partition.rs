use crate::error::{Error, Result};

/// Disjoint blocks covering `0..n_vars`. Empty blocks are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VariablePartition {
    n_vars: usize,
    blocks: Vec<Vec<usize>>,
}

impl VariablePartition {
    pub fn new(n_vars: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n_vars];
        for b in &blocks {
            for &i in b {
                if i >= n_vars {
                    return Err(Error::IndexOutOfRange { index: i, n_vars });
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::Overlap(i));
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(format!("x{} is not covered by any block", i + 1)));
        }
        let blocks = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        Ok(VariablePartition { n_vars, blocks })
    }

    /// Consecutive blocks of the given sizes.
    pub fn consecutive(sizes: &[usize]) -> Self {
        let mut start = 0;
        let blocks = sizes
            .iter()
            .map(|&s| {
                let b: Vec<usize> = (start..start + s).collect();
                start += s;
                b
            })
            .collect();
        VariablePartition { n_vars: start, blocks }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}
