use super::matrix::Matrix;
use super::modulus::{Elem, Modulus};
use crate::error::RingError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BufId(pub(crate) usize);

/// A rectangular window into one buffer of a [`Workspace`].
///
/// Element `(i, j)` lives at `offset + i * stride + j`. Views are plain
/// coordinates; reading or writing always goes through the workspace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MatView {
    pub buf: BufId,
    pub offset: usize,
    pub stride: usize,
    pub rows: usize,
    pub cols: usize,
}

impl MatView {
    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        self.offset + i * self.stride + j
    }

    /// Sub-window starting at `(r0, c0)`.
    pub fn sub(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Result<MatView, RingError> {
        if r0 + rows > self.rows || c0 + cols > self.cols {
            return Err(RingError::OutOfBounds);
        }
        Ok(MatView {
            buf: self.buf,
            offset: self.offset + r0 * self.stride + c0,
            stride: self.stride,
            rows,
            cols,
        })
    }

    pub fn top_left(&self, rows: usize, cols: usize) -> Result<MatView, RingError> {
        self.sub(0, 0, rows, cols)
    }

    /// The natural 2x2 block decomposition `[M11, M12, M21, M22]`. No data moves.
    pub fn quad_split(&self) -> Result<[MatView; 4], RingError> {
        if self.rows % 2 != 0 || self.cols % 2 != 0 {
            return Err(RingError::OddDimension { rows: self.rows, cols: self.cols });
        }
        let (h, w) = (self.rows / 2, self.cols / 2);
        Ok([
            self.sub(0, 0, h, w)?,
            self.sub(0, w, h, w)?,
            self.sub(h, 0, h, w)?,
            self.sub(h, w, h, w)?,
        ])
    }

    /// Same buffer, same index set, same shape.
    pub fn same_window(&self, other: &MatView) -> bool {
        self == other || (self.is_empty() && other.is_empty())
    }

    /// True iff the two index sets intersect.
    pub fn overlaps(&self, other: &MatView) -> bool {
        if self.buf != other.buf || self.is_empty() || other.is_empty() {
            return false;
        }
        let (a, b) = if self.rows <= other.rows { (self, other) } else { (other, self) };
        let b_end = b.offset + (b.rows - 1) * b.stride + b.cols;
        for i in 0..a.rows {
            let lo = a.offset + i * a.stride;
            let hi = lo + a.cols;
            if hi <= b.offset || lo >= b_end {
                continue;
            }
            // first row of b whose interval could end after `lo`
            let first = if lo + 1 > b.offset + b.cols {
                (lo + 1 - b.offset - b.cols).div_ceil(b.stride.max(1))
            } else {
                0
            };
            for j in first..b.rows {
                let blo = b.offset + j * b.stride;
                if blo >= hi {
                    break;
                }
                if blo + b.cols > lo {
                    return true;
                }
                if b.stride == 0 {
                    break;
                }
            }
        }
        false
    }

    pub fn disjoint(&self, other: &MatView) -> bool {
        !self.overlaps(other)
    }
}

/// Owner of every buffer a computation touches: inputs, output and temporaries.
///
/// Temporaries are pushed and popped in stack order.
#[derive(Debug)]
pub struct Workspace {
    modulus: Modulus,
    bufs: Vec<Vec<Elem>>,
}

impl Workspace {
    pub fn new(modulus: Modulus) -> Self {
        Workspace { modulus, bufs: Vec::new() }
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    /// Moves a matrix into the workspace and returns a view of all of it.
    pub fn insert(&mut self, m: Matrix) -> Result<MatView, RingError> {
        if m.modulus() != self.modulus {
            return Err(RingError::ModulusMismatch);
        }
        let (rows, cols) = (m.rows(), m.cols());
        self.bufs.push(m.into_data());
        Ok(MatView { buf: BufId(self.bufs.len() - 1), offset: 0, stride: cols, rows, cols })
    }

    /// Allocates a zeroed `rows x cols` buffer on top of the stack.
    pub fn push_buffer(&mut self, rows: usize, cols: usize) -> MatView {
        self.bufs.push(vec![0; rows * cols]);
        MatView { buf: BufId(self.bufs.len() - 1), offset: 0, stride: cols, rows, cols }
    }

    /// Releases the most recently pushed buffer.
    pub fn pop_buffer(&mut self, view: MatView) {
        assert_eq!(view.buf.0 + 1, self.bufs.len(), "temporaries must be released in stack order");
        self.bufs.pop();
    }

    pub fn buffer_count(&self) -> usize {
        self.bufs.len()
    }

    pub fn check(&self, v: &MatView) -> Result<(), RingError> {
        let buf = self.bufs.get(v.buf.0).ok_or(RingError::OutOfBounds)?;
        if v.is_empty() {
            return Ok(());
        }
        if v.cols > v.stride && v.rows > 1 {
            return Err(RingError::OutOfBounds);
        }
        if v.index(v.rows - 1, v.cols - 1) >= buf.len() {
            return Err(RingError::OutOfBounds);
        }
        Ok(())
    }

    pub fn buffer(&self, id: BufId) -> &[Elem] {
        &self.bufs[id.0]
    }

    pub fn get(&self, v: &MatView, i: usize, j: usize) -> Elem {
        debug_assert!(i < v.rows && j < v.cols);
        self.bufs[v.buf.0][v.index(i, j)]
    }

    pub fn set(&mut self, v: &MatView, i: usize, j: usize, x: Elem) {
        debug_assert!(i < v.rows && j < v.cols && x < self.modulus.value());
        self.bufs[v.buf.0][v.index(i, j)] = x;
    }

    pub fn row(&self, v: &MatView, i: usize) -> &[Elem] {
        let start = v.index(i, 0);
        &self.bufs[v.buf.0][start..start + v.cols]
    }

    pub fn row_mut(&mut self, v: &MatView, i: usize) -> &mut [Elem] {
        let start = v.index(i, 0);
        &mut self.bufs[v.buf.0][start..start + v.cols]
    }

    /// Copies a view out into an owned matrix.
    pub fn extract(&self, v: &MatView) -> Matrix {
        let mut data = Vec::with_capacity(v.len());
        for i in 0..v.rows {
            data.extend_from_slice(self.row(v, i));
        }
        Matrix::from_residues(v.rows, v.cols, data, self.modulus).expect("workspace holds canonical residues")
    }

    /// Overwrites a view with the contents of `m`.
    pub fn load(&mut self, v: &MatView, m: &Matrix) -> Result<(), RingError> {
        if (m.rows(), m.cols()) != v.dims() {
            return Err(RingError::DimensionMismatch(format!(
                "loading {}x{} into {}x{}",
                m.rows(),
                m.cols(),
                v.rows,
                v.cols
            )));
        }
        for i in 0..v.rows {
            let src = &m.data()[i * m.cols()..(i + 1) * m.cols()];
            self.row_mut(v, i).copy_from_slice(src);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ws_with(rows: usize, cols: usize) -> (Workspace, MatView) {
        let p = Modulus::default();
        let mut ws = Workspace::new(p);
        let v = ws.insert(Matrix::zeros(rows, cols, p)).unwrap();
        (ws, v)
    }

    #[test]
    fn split_2x2_gives_single_entries() {
        let p = Modulus::default();
        let mut ws = Workspace::new(p);
        let v = ws.insert(Matrix::from_i64(2, 2, &[1, 2, 3, 4], p).unwrap()).unwrap();
        let q = v.quad_split().unwrap();
        let vals: Vec<_> = q.iter().map(|x| ws.get(x, 0, 0)).collect();
        assert_eq!(vals, vec![1, 2, 3, 4]);
        assert!(q.iter().all(|x| x.dims() == (1, 1)));
    }

    #[test]
    fn split_tiles_and_is_disjoint() {
        for (r, c) in [(4, 4), (4, 2), (8, 6), (2, 16)] {
            let (_, v) = ws_with(r, c);
            let q = v.quad_split().unwrap();
            let mut seen = vec![0u8; r * c];
            for x in &q {
                assert_eq!(x.dims(), (r / 2, c / 2));
                for i in 0..x.rows {
                    for j in 0..x.cols {
                        seen[x.index(i, j)] += 1;
                    }
                }
            }
            assert!(seen.iter().all(|&s| s == 1));
            for a in 0..4 {
                for b in 0..4 {
                    assert_eq!(q[a].overlaps(&q[b]), a == b);
                }
            }
        }
    }

    #[test]
    fn odd_split_rejected() {
        let (_, v) = ws_with(3, 4);
        assert_eq!(v.quad_split(), Err(RingError::OddDimension { rows: 3, cols: 4 }));
    }

    #[test]
    fn overlap_matches_brute_force() {
        let (_, v) = ws_with(8, 8);
        let windows: Vec<MatView> = (0..8)
            .flat_map(|r| (0..8).map(move |c| (r, c)))
            .flat_map(|(r, c)| [(1, 3), (3, 1), (2, 2), (4, 5)].into_iter().map(move |d| (r, c, d)))
            .filter_map(|(r, c, (h, w))| v.sub(r, c, h, w).ok())
            .collect();
        let cells = |x: &MatView| {
            let mut s = std::collections::HashSet::new();
            for i in 0..x.rows {
                for j in 0..x.cols {
                    s.insert(x.index(i, j));
                }
            }
            s
        };
        for a in windows.iter().step_by(7) {
            for b in windows.iter().step_by(5) {
                let brute = !cells(a).is_disjoint(&cells(b));
                assert_eq!(a.overlaps(b), brute, "{a:?} {b:?}");
            }
        }
    }
}
