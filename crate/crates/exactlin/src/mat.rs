use crate::scalar::{format_rational, Scalar};
use crate::subspace::Subspace;
use num_traits::{One, Zero};
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatError {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("row {row} has {got} entries, expected {expected}")]
    RaggedRows { row: usize, got: usize, expected: usize },
}

/// Dense row-major matrix of exact rationals.
///
/// Shape errors in arithmetic (`*`, `+`, `mul_vec`, ...) are caller bugs and
/// panic; fallible constructors and operations with meaningful failure modes
/// return `Result`/`Option`.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    entries: Vec<Scalar>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat {
            rows,
            cols,
            entries: vec![Scalar::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Scalar::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Result<Mat, MatError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(MatError::RaggedRows {
                    row: i,
                    got: row.len(),
                    expected: c,
                });
            }
        }
        Ok(Mat {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// Matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_columns(rows: usize, cols: &[Vec<Scalar>]) -> Mat {
        let mut m = Mat::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows, "column {j} has wrong length");
            for i in 0..rows {
                m[(i, j)] = col[i].clone();
            }
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Mat {
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Convenience constructor from integer literals.
    pub fn from_int_rows(rows: &[&[i64]]) -> Mat {
        Mat::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&n| crate::scalar::int(n)).collect())
                .collect(),
        )
        .expect("literal rows are rectangular")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        assert!(i < self.rows);
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Scalar> {
        assert!(j < self.cols);
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<Scalar>> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|x| x.is_zero())
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(v.len(), self.cols, "mul_vec length mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .fold(Scalar::zero(), |acc, x| acc + x)
            })
            .collect()
    }

    pub fn scale(&self, s: &Scalar) -> Mat {
        Mat::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] * s)
    }

    /// `[self | other]` side by side.
    pub fn hstack(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows, "hstack row mismatch");
        Mat::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                other[(i, j - self.cols)].clone()
            }
        })
    }

    /// `[self; other]` stacked vertically.
    pub fn vstack(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.cols, "vstack column mismatch");
        Mat::from_fn(self.rows + other.rows, self.cols, |i, j| {
            if i < self.rows {
                self[(i, j)].clone()
            } else {
                other[(i - self.rows, j)].clone()
            }
        })
    }

    pub fn submatrix(&self, row_range: std::ops::Range<usize>, col_range: std::ops::Range<usize>) -> Mat {
        assert!(row_range.end <= self.rows && col_range.end <= self.cols);
        Mat::from_fn(row_range.len(), col_range.len(), |i, j| {
            self[(row_range.start + i, col_range.start + j)].clone()
        })
    }

    pub fn pow(&self, k: usize) -> Mat {
        assert!(self.is_square(), "pow of non-square matrix");
        let mut acc = Mat::identity(self.rows);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn scale_row(&mut self, i: usize, s: &Scalar) {
        for j in 0..self.cols {
            let v = &self[(i, j)] * s;
            self[(i, j)] = v;
        }
    }

    /// row_i += s * row_src
    fn row_axpy(&mut self, i: usize, src: usize, s: &Scalar) {
        for j in 0..self.cols {
            let v = &self[(i, j)] + &(&self[(src, j)] * s);
            self[(i, j)] = v;
        }
    }

    /// Reduced row echelon form with the pivot column list.
    ///
    /// Pivot selection is deterministic: leftmost nonzero column, first
    /// nonzero row from the top. Exact arithmetic makes pivot magnitude
    /// irrelevant.
    pub fn rref(&self) -> (Mat, Vec<usize>) {
        let mut r = self.clone();
        let mut pivots = Vec::new();
        let mut lead = 0usize;
        for col in 0..r.cols {
            if lead == r.rows {
                break;
            }
            let Some(p) = (lead..r.rows).find(|&i| !r[(i, col)].is_zero()) else {
                continue;
            };
            r.swap_rows(lead, p);
            let inv = r[(lead, col)].recip();
            r.scale_row(lead, &inv);
            for i in 0..r.rows {
                if i != lead && !r[(i, col)].is_zero() {
                    let f = -r[(i, col)].clone();
                    r.row_axpy(i, lead, &f);
                }
            }
            pivots.push(col);
            lead += 1;
        }
        (r, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{v : Mv = 0}` as a canonical subspace.
    pub fn kernel_basis(&self) -> Subspace {
        let (r, pivots) = self.rref();
        let mut basis = Vec::new();
        let pivot_set: Vec<Option<usize>> = {
            let mut v = vec![None; self.cols];
            for (row, &col) in pivots.iter().enumerate() {
                v[col] = Some(row);
            }
            v
        };
        for free in 0..self.cols {
            if pivot_set[free].is_some() {
                continue;
            }
            let mut x = vec![Scalar::zero(); self.cols];
            x[free] = Scalar::one();
            for (col, slot) in pivot_set.iter().enumerate() {
                if let Some(row) = slot {
                    x[col] = -r[(*row, free)].clone();
                }
            }
            basis.push(x);
        }
        Subspace::from_columns(self.cols, &basis)
    }

    /// Some `x` with `Mx = b` when `b` lies in the column space, else `None`.
    /// Among all solutions, returns the canonical one with every free
    /// variable set to zero.
    pub fn solve(&self, b: &[Scalar]) -> Option<Vec<Scalar>> {
        assert_eq!(b.len(), self.rows, "solve: rhs length mismatch");
        let rhs = Mat::from_columns(self.rows, &[b.to_vec()]);
        let (r, pivots) = self.hstack(&rhs).rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Scalar::zero(); self.cols];
        for (row, &col) in pivots.iter().enumerate() {
            x[col] = r[(row, self.cols)].clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Mat> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let (r, pivots) = self.hstack(&Mat::identity(n)).rref();
        if pivots.len() != n || pivots.iter().enumerate().any(|(i, &c)| c != i) {
            return None;
        }
        Some(r.submatrix(0..n, n..2 * n))
    }

    /// Column span as a canonical subspace.
    pub fn column_space(&self) -> Subspace {
        Subspace::from_columns(self.rows, &self.columns())
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = Scalar;
    fn index(&self, (i, j): (usize, usize)) -> &Scalar {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Scalar {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &mut self.entries[i * self.cols + j]
    }
}

impl Mul for &Mat {
    type Output = Mat;
    fn mul(self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        Mat::from_fn(self.rows, rhs.cols, |i, j| {
            (0..self.cols)
                .map(|k| &self[(i, k)] * &rhs[(k, j)])
                .fold(Scalar::zero(), |acc, x| acc + x)
        })
    }
}

impl Add for &Mat {
    type Output = Mat;
    fn add(self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix sum shape mismatch");
        Mat::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] + &rhs[(i, j)])
    }
}

impl Sub for &Mat {
    type Output = Mat;
    fn sub(self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix difference shape mismatch");
        Mat::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] - &rhs[(i, j)])
    }
}

impl Neg for &Mat {
    type Output = Mat;
    fn neg(self) -> Mat {
        Mat::from_fn(self.rows, self.cols, |i, j| -self[(i, j)].clone())
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat {}x{} ", self.rows, self.cols)?;
        f.debug_list()
            .entries((0..self.rows).map(|i| {
                self.row(i).iter().map(format_rational).collect::<Vec<_>>()
            }))
            .finish()
    }
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(format_rational).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Fitting data of a square matrix `T`: the least `m >= 0` with
/// `rank(T^m) = rank(T^{m+1})`, together with `Im T^m` and `Ker T^m`.
/// The two subspaces are complementary and `T`-invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fitting {
    pub m: usize,
    pub image: Subspace,
    pub kernel: Subspace,
}

pub fn fitting_index(t: &Mat) -> Result<Fitting, MatError> {
    if !t.is_square() {
        return Err(MatError::NotSquare {
            rows: t.rows(),
            cols: t.cols(),
        });
    }
    let n = t.rows();
    let mut power = Mat::identity(n);
    let mut rank = n;
    let mut m = 0usize;
    loop {
        let next = &power * t;
        let next_rank = next.rank();
        if next_rank == rank {
            break;
        }
        power = next;
        rank = next_rank;
        m += 1;
    }
    Ok(Fitting {
        m,
        image: power.column_space(),
        kernel: power.kernel_basis(),
    })
}
