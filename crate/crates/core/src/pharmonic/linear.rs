//! Sparse SPD solves over the free nodes of a mesh.

use faer::prelude::*;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{SparseColMat, Triplet};
use faer::Side;

use super::mesh::AnnulusMesh;
use crate::error::{Error, Result};

const FIXED: usize = usize::MAX;

/// Element-assembled system restricted to free nodes. The symbolic Cholesky
/// factorization is computed once per mesh and free set.
pub(crate) struct FreeSystem {
    row: Vec<usize>,
    size: usize,
    triangles: Vec<[usize; 3]>,
    symbolic: SymbolicLlt<usize>,
}

impl FreeSystem {
    pub fn new(mesh: &AnnulusMesh, free: &[bool]) -> Result<Self> {
        faer::set_global_parallelism(faer::Par::Seq);
        let mut size = 0;
        let row: Vec<usize> = free
            .iter()
            .map(|&f| {
                if f {
                    size += 1;
                    size - 1
                } else {
                    FIXED
                }
            })
            .collect();
        if size == 0 {
            return Err(Error::MeshInvalid("no free nodes".into()));
        }
        let triangles = mesh.triangles().to_vec();
        let mut pattern = Vec::new();
        for t in &triangles {
            for &a in t {
                for &b in t {
                    if row[a] != FIXED && row[b] != FIXED {
                        pattern.push(Triplet::new(row[a], row[b], 1.0));
                    }
                }
            }
        }
        for k in 0..size {
            pattern.push(Triplet::new(k, k, 1.0));
        }
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(size, size, &pattern)
            .map_err(|e| Error::LinearSolver(format!("{e:?}")))?;
        let symbolic = SymbolicLlt::try_new(a.symbolic(), Side::Lower).map_err(|e| Error::LinearSolver(format!("{e:?}")))?;
        Ok(Self { row, size, triangles, symbolic })
    }

    /// Solves `K d = rhs` on the free nodes, where `K` is assembled from the per-triangle
    /// matrices `local`. Returns a nodal vector that vanishes on fixed nodes. The system
    /// is symmetrically scaled by its diagonal before factorization.
    pub fn solve(&self, local: &[[[f64; 3]; 3]], rhs: &[f64]) -> Result<Vec<f64>> {
        let mut diag = vec![0.0; self.size];
        for (t, k) in self.triangles.iter().zip(local) {
            for i in 0..3 {
                let r = self.row[t[i]];
                if r != FIXED {
                    diag[r] += k[i][i];
                }
            }
        }
        if let Some(bad) = diag.iter().position(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(Error::LinearSolver(format!("non-positive or non-finite diagonal at free row {bad}")));
        }
        let scale: Vec<f64> = diag.iter().map(|d| 1.0 / d.sqrt()).collect();
        let mut triplets = Vec::with_capacity(9 * self.triangles.len() + self.size);
        for (t, k) in self.triangles.iter().zip(local) {
            for i in 0..3 {
                let ri = self.row[t[i]];
                if ri == FIXED {
                    continue;
                }
                for j in 0..3 {
                    let rj = self.row[t[j]];
                    if rj != FIXED {
                        triplets.push(Triplet::new(ri, rj, k[i][j] * scale[ri] * scale[rj]));
                    }
                }
            }
        }
        for k in 0..self.size {
            triplets.push(Triplet::new(k, k, 0.0));
        }
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(self.size, self.size, &triplets)
            .map_err(|e| Error::LinearSolver(format!("{e:?}")))?;
        let llt = Llt::try_new_with_symbolic(self.symbolic.clone(), a.as_ref(), Side::Lower)
            .map_err(|e| Error::LinearSolver(format!("Cholesky failed: {e:?}")))?;
        let mut b = Col::<f64>::zeros(self.size);
        for (node, &r) in self.row.iter().enumerate() {
            if r != FIXED {
                b[r] = rhs[node] * scale[r];
            }
        }
        let y = llt.solve(&b);
        Ok(self.row.iter().map(|&r| if r == FIXED { 0.0 } else { y[r] * scale[r] }).collect())
    }
}
