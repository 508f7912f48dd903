//! Compressed sparse row adjacency used for every one-to-many index in a
//! snapshot (references, citations, category and country membership).

/// Row `i` owns `targets[offsets[i]..offsets[i + 1]]`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Csr {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Csr {
    /// Build from `(row, target)` pairs with a counting sort. Within a row,
    /// targets keep the order in which they appear in `pairs`.
    pub fn from_pairs(rows: usize, pairs: &[(u32, u32)]) -> Self {
        let mut offsets = vec![0usize; rows + 1];
        for &(row, _) in pairs {
            offsets[row as usize + 1] += 1;
        }
        for i in 1..=rows {
            offsets[i] += offsets[i - 1];
        }
        let mut cursor = offsets.clone();
        let mut targets = vec![0u32; pairs.len()];
        for &(row, target) in pairs {
            let slot = &mut cursor[row as usize];
            targets[*slot] = target;
            *slot += 1;
        }
        Self { offsets, targets }
    }

    /// Build from per-row lists, in row order.
    pub fn from_rows<I, R>(rows: I) -> Self
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = u32>,
    {
        let mut offsets = vec![0usize];
        let mut targets = Vec::new();
        for row in rows {
            targets.extend(row);
            offsets.push(targets.len());
        }
        Self { offsets, targets }
    }

    pub fn rows(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    #[inline]
    pub fn row(&self, row: u32) -> &[u32] {
        let row = row as usize;
        &self.targets[self.offsets[row]..self.offsets[row + 1]]
    }

    #[inline]
    pub fn degree(&self, row: u32) -> usize {
        let row = row as usize;
        self.offsets[row + 1] - self.offsets[row]
    }

    /// All `(row, target)` pairs in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.rows() as u32).flat_map(move |r| self.row(r).iter().map(move |&t| (r, t)))
    }
}
