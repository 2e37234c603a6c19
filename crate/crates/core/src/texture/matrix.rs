/// Dense `levels x columns` table of counts; both indices are 1-based in the
/// accessors, matching the gray-level and run/size/dependence conventions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountMatrix {
    levels: usize,
    columns: usize,
    data: Vec<u64>,
}

impl CountMatrix {
    pub(crate) fn from_entries(levels: usize, entries: &[(usize, usize)]) -> Self {
        let columns = entries.iter().map(|&(_, c)| c).max().unwrap_or(0);
        let mut data = vec![0u64; levels * columns];
        for &(l, c) in entries {
            data[(l - 1) * columns + (c - 1)] += 1;
        }
        Self { levels, columns, data }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Largest column index with storage (longest run, largest zone, ...).
    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn get(&self, level: usize, column: usize) -> u64 {
        self.data[(level - 1) * self.columns + (column - 1)]
    }

    pub fn total(&self) -> u64 {
        self.data.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    /// Non-zero cells as `(level, column, count)`.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(move |(k, &n)| (k / self.columns + 1, k % self.columns + 1, n))
    }
}
