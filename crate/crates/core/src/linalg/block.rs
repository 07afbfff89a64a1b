use crate::error::{Error, Result};

/// Space-time vector of `m_blocks` time levels, each of length `block_len`.
/// Block `k` occupies `data[k*N .. (k+1)*N]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector<T = f64> {
    m_blocks: usize,
    block_len: usize,
    data: Vec<T>,
}

impl<T: Copy + Default> BlockVector<T> {
    pub fn zeros(m_blocks: usize, block_len: usize) -> Self {
        Self { m_blocks, block_len, data: vec![T::default(); m_blocks * block_len] }
    }

    pub fn from_vec(m_blocks: usize, block_len: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != m_blocks * block_len {
            return Err(Error::DimensionMismatch { expected: m_blocks * block_len, found: data.len() });
        }
        Ok(Self { m_blocks, block_len, data })
    }

    pub fn m_blocks(&self) -> usize {
        self.m_blocks
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn block(&self, k: usize) -> &[T] {
        &self.data[k * self.block_len..(k + 1) * self.block_len]
    }

    pub fn block_mut(&mut self, k: usize) -> &mut [T] {
        &mut self.data[k * self.block_len..(k + 1) * self.block_len]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn last_block(&self) -> &[T] {
        self.block(self.m_blocks - 1)
    }
}
