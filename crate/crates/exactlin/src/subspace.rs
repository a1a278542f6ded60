use crate::mat::Mat;
use crate::scalar::Scalar;
use num_traits::Zero;

/// Linear subspace of Q^n in canonical form.
///
/// The basis is stored as the columns of `basis`; canonically, those columns
/// are the nonzero rows of the RREF of the spanning set laid out as rows.
/// Two `Subspace` values are equal as sets iff they are equal as values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    basis: Mat,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Subspace {
        Subspace {
            ambient,
            basis: Mat::zeros(ambient, 0),
        }
    }

    pub fn full(ambient: usize) -> Subspace {
        Subspace {
            ambient,
            basis: Mat::identity(ambient),
        }
    }

    /// Span of the given vectors; dependent or zero vectors are absorbed.
    pub fn from_columns(ambient: usize, vectors: &[Vec<Scalar>]) -> Subspace {
        for v in vectors {
            assert_eq!(v.len(), ambient, "spanning vector has wrong length");
        }
        if vectors.is_empty() {
            return Subspace::zero(ambient);
        }
        let as_rows = Mat::from_rows(vectors.to_vec()).expect("checked lengths");
        let (r, pivots) = as_rows.rref();
        let cols: Vec<Vec<Scalar>> = (0..pivots.len()).map(|i| r.row(i).to_vec()).collect();
        Subspace {
            ambient,
            basis: Mat::from_columns(ambient, &cols),
        }
    }

    pub fn from_mat_columns(m: &Mat) -> Subspace {
        Subspace::from_columns(m.rows(), &m.columns())
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    /// Canonical basis, one vector per column.
    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    pub fn basis_columns(&self) -> Vec<Vec<Scalar>> {
        self.basis.columns()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        assert_eq!(v.len(), self.ambient);
        if v.iter().all(|x| x.is_zero()) {
            return true;
        }
        self.basis.solve(v).is_some()
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        assert_eq!(self.ambient, other.ambient);
        other.basis.columns().iter().all(|v| self.contains(v))
    }

    /// Coordinates of `v` in the canonical basis, if `v` lies in the span.
    pub fn coords_of(&self, v: &[Scalar]) -> Option<Vec<Scalar>> {
        self.basis.solve(v)
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient);
        let mut cols = self.basis.columns();
        cols.extend(other.basis.columns());
        Subspace::from_columns(self.ambient, &cols)
    }

    /// Zassenhaus: row reduce [A|A; B|0]; rows with zero left half carry the
    /// intersection in their right half.
    pub fn intersect(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient);
        let n = self.ambient;
        let mut rows: Vec<Vec<Scalar>> = Vec::new();
        for a in self.basis.columns() {
            let mut row = a.clone();
            row.extend(a);
            rows.push(row);
        }
        for b in other.basis.columns() {
            let mut row = b;
            row.extend(vec![Scalar::zero(); n]);
            rows.push(row);
        }
        if rows.is_empty() {
            return Subspace::zero(n);
        }
        let (r, pivots) = Mat::from_rows(rows).expect("rectangular").rref();
        let mut cols = Vec::new();
        for i in 0..pivots.len() {
            let row = r.row(i);
            if row[..n].iter().all(|x| x.is_zero()) {
                cols.push(row[n..].to_vec());
            }
        }
        Subspace::from_columns(n, &cols)
    }

    /// `{v : b^T . form . v = 0}` over all basis vectors `b`. The form need
    /// not be definite; for degenerate forms dim may exceed ambient − dim.
    pub fn orthocomplement(&self, form: &Mat) -> Subspace {
        assert_eq!(form.rows(), self.ambient);
        assert_eq!(form.cols(), self.ambient);
        let constraints = &self.basis.transpose() * form;
        constraints.kernel_basis()
    }

    /// Rows spanning the annihilator `{f : f . b = 0 for all b in self}`.
    pub fn annihilator_rows(&self) -> Mat {
        let ker = self.basis.transpose().kernel_basis();
        ker.basis().transpose()
    }

    pub fn is_invariant_under(&self, m: &Mat) -> bool {
        assert_eq!(m.cols(), self.ambient);
        assert_eq!(m.rows(), self.ambient);
        self.basis.columns().iter().all(|b| self.contains(&m.mul_vec(b)))
    }
}

/// Span-sum, intersection, and (when `form` is given) the orthocomplement of
/// `a` with respect to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubspaceOps {
    pub sum: Subspace,
    pub intersection: Subspace,
    pub orthocomplement_of_a: Option<Subspace>,
}

pub fn subspace_ops(a: &Subspace, b: &Subspace, form: Option<&Mat>) -> SubspaceOps {
    assert_eq!(a.ambient_dim(), b.ambient_dim(), "ambient dimension mismatch");
    if let Some(f) = form {
        assert!(f.is_symmetric(), "orthocomplement form must be symmetric");
    }
    SubspaceOps {
        sum: a.sum(b),
        intersection: a.intersect(b),
        orthocomplement_of_a: form.map(|f| a.orthocomplement(f)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{frac, int};

    fn e(n: usize, i: usize) -> Vec<Scalar> {
        let mut v = vec![Scalar::zero(); n];
        v[i] = crate::scalar::one();
        v
    }

    #[test]
    fn canonical_form_ignores_presentation() {
        // same plane presented by different spanning sets
        let a = Subspace::from_columns(3, &[e(3, 0), e(3, 1)]);
        let b = Subspace::from_columns(
            3,
            &[
                vec![int(2), int(3), int(0)],
                vec![int(-1), int(5), int(0)],
                vec![int(1), int(8), int(0)],
            ],
        );
        assert_eq!(a, b);
    }

    #[test]
    fn sum_and_intersection_of_axes() {
        let a = Subspace::from_columns(2, &[e(2, 0)]);
        let b = Subspace::from_columns(2, &[e(2, 1)]);
        let ops = subspace_ops(&a, &b, None);
        assert_eq!(ops.sum, Subspace::full(2));
        assert_eq!(ops.intersection, Subspace::zero(2));
    }

    #[test]
    fn self_ops_are_identity() {
        let a = Subspace::from_columns(3, &[vec![int(1), int(2), int(3)], e(3, 1)]);
        let ops = subspace_ops(&a, &a, None);
        assert_eq!(ops.sum, a);
        assert_eq!(ops.intersection, a);
    }

    #[test]
    fn intersection_of_planes_in_dim3() {
        let a = Subspace::from_columns(3, &[e(3, 0), e(3, 1)]);
        let b = Subspace::from_columns(3, &[e(3, 1), e(3, 2)]);
        let expected = Subspace::from_columns(3, &[e(3, 1)]);
        assert_eq!(a.intersect(&b), expected);
    }

    #[test]
    fn isotropic_line_under_hyperbolic_form() {
        let a = Subspace::from_columns(2, &[e(2, 0)]);
        let hyperbolic = Mat::from_int_rows(&[&[0, 1], &[1, 0]]);
        let ops = subspace_ops(&a, &a, Some(&hyperbolic));
        assert_eq!(ops.orthocomplement_of_a, Some(a));
    }

    #[test]
    fn orthocomplement_dim_under_nondegenerate_form() {
        let a = Subspace::from_columns(4, &[e(4, 0), vec![int(1), int(1), int(0), int(2)]]);
        let form = Mat::identity(4);
        let perp = a.orthocomplement(&form);
        assert_eq!(perp.dim(), 2);
        assert_eq!(a.intersect(&perp), Subspace::zero(4));
    }

    #[test]
    fn contains_handles_scaled_vectors() {
        let a = Subspace::from_columns(2, &[vec![frac(1, 2), frac(1, 3)]]);
        assert!(a.contains(&[int(3), int(2)]));
        assert!(!a.contains(&[int(1), int(1)]));
        assert!(a.contains(&[int(0), int(0)]));
    }

    #[test]
    fn annihilator_rows_kill_the_subspace() {
        let a = Subspace::from_columns(3, &[vec![int(1), int(2), int(0)]]);
        let ann = a.annihilator_rows();
        assert_eq!(ann.rows(), 2);
        for b in a.basis().columns() {
            assert!(ann.mul_vec(&b).iter().all(|x| x.is_zero()));
        }
    }
}
