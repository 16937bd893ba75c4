use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

/// Haar-distributed element of SO(dim) as row-major rows.
pub fn random_rotation<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let g = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    (0..dim).map(|i| q.row(i).iter().copied().collect()).collect()
}

pub fn apply(r: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    r.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

pub fn apply_transpose(r: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; r.first().map_or(0, Vec::len)];
    for (row, vi) in r.iter().zip(v) {
        for (o, rij) in out.iter_mut().zip(row) {
            *o += rij * vi;
        }
    }
    out
}
