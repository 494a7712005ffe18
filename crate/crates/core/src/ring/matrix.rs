use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::modulus::{Elem, Modulus};
use crate::error::RingError;

/// Dense row-major matrix over Z/p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
    modulus: Modulus,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize, modulus: Modulus) -> Self {
        Matrix { rows, cols, data: vec![0; rows * cols], modulus }
    }

    pub fn identity(n: usize, modulus: Modulus) -> Self {
        let mut m = Matrix::zeros(n, n, modulus);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from arbitrary integers, reducing each entry.
    pub fn from_i64(rows: usize, cols: usize, values: &[i64], modulus: Modulus) -> Result<Self, RingError> {
        if values.len() != rows * cols {
            return Err(RingError::DimensionMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                values.len()
            )));
        }
        let data = values.iter().map(|&v| modulus.from_i64(v)).collect();
        Ok(Matrix { rows, cols, data, modulus })
    }

    pub fn from_residues(rows: usize, cols: usize, data: Vec<Elem>, modulus: Modulus) -> Result<Self, RingError> {
        if data.len() != rows * cols {
            return Err(RingError::DimensionMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|&&r| r >= modulus.value()) {
            return Err(RingError::Format(format!("residue {bad} not below {}", modulus.value())));
        }
        Ok(Matrix { rows, cols, data, modulus })
    }

    /// Uniform random residues from a ChaCha8 stream seeded with `seed`.
    pub fn random(rows: usize, cols: usize, modulus: Modulus, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_from(rows, cols, modulus, &mut rng)
    }

    /// Draws `rows * cols` residues in row-major order from `rng`.
    pub fn random_from<R: Rng>(rows: usize, cols: usize, modulus: Modulus, rng: &mut R) -> Self {
        let p = modulus.value();
        let data = (0..rows * cols).map(|_| rng.gen_range(0..p)).collect();
        Matrix { rows, cols, data, modulus }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn data(&self) -> &[Elem] {
        &self.data
    }

    pub(crate) fn into_data(self) -> Vec<Elem> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Elem {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Elem) {
        assert!(v < self.modulus.value());
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows, self.modulus);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// Textbook triple loop (i, j, l), reducing after every product.
    pub fn naive_product(&self, other: &Matrix) -> Result<Matrix, RingError> {
        if self.cols != other.rows {
            return Err(RingError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        if self.modulus != other.modulus {
            return Err(RingError::ModulusMismatch);
        }
        let m = self.modulus;
        let mut out = Matrix::zeros(self.rows, other.cols, m);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut s = 0;
                for l in 0..self.cols {
                    s = m.add(s, m.mul(self.get(i, l), other.get(l, j)));
                }
                out.data[i * other.cols + j] = s;
            }
        }
        Ok(out)
    }

    /// SHA-256 over the little-endian residues, hex encoded.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for v in &self.data {
            h.update(v.to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    /// Text format: `rows cols p` on the first line, then the residues row-major.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {} {}", self.rows, self.cols, self.modulus.value())?;
        for row in self.data.chunks(self.cols.max(1)) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn read_text(text: &str) -> Result<Matrix, RingError> {
        let mut tokens = text.split_whitespace().map(|t| {
            t.parse::<u64>().map_err(|_| RingError::Format(format!("bad integer `{t}`")))
        });
        let mut next = |what: &str| {
            tokens
                .next()
                .unwrap_or_else(|| Err(RingError::Format(format!("missing {what}"))))
        };
        let rows = next("rows")? as usize;
        let cols = next("cols")? as usize;
        let modulus = Modulus::new(next("modulus")?)?;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            data.push(next("entry")?);
        }
        let data = data
            .into_iter()
            .map(|v| u32::try_from(v).map_err(|_| RingError::Format(format!("residue {v} too large"))))
            .collect::<Result<Vec<_>, _>>()?;
        Matrix::from_residues(rows, cols, data, modulus)
    }

    /// Binary format: three little-endian u64 (rows, cols, p), then u64 residues.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for h in [self.rows as u64, self.cols as u64, self.modulus.value() as u64] {
            w.write_all(&h.to_le_bytes())?;
        }
        for &v in &self.data {
            w.write_all(&(v as u64).to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Matrix, RingError> {
        let word = |r: &mut R| -> Result<u64, RingError> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b).map_err(|e| RingError::Format(e.to_string()))?;
            Ok(u64::from_le_bytes(b))
        };
        let rows = word(&mut r)? as usize;
        let cols = word(&mut r)? as usize;
        let modulus = Modulus::new(word(&mut r)?)?;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            let v = word(&mut r)?;
            data.push(u32::try_from(v).map_err(|_| RingError::Format(format!("residue {v} too large")))?);
        }
        Matrix::from_residues(rows, cols, data, modulus)
    }
}
