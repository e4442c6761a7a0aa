//! Rigid (rotation + translation, no scale) alignment of 3D point sets.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::morphable_model::Shape3D;

/// Relative singular-value floor below which a point set counts as collinear.
const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlignMode {
    /// Vertex `i` of the source corresponds to vertex `i` of the target.
    KnownCorrespondence,
    /// Alternate nearest-neighbour matching and the closed-form solve until
    /// the RMSE changes by less than `tol` or `max_iter` rounds have run.
    NearestNeighborIcp { max_iter: usize, tol: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RigidAlignment {
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
    /// `rotation · source + translation`.
    pub aligned: Shape3D,
    /// Root-mean-square distance between aligned points and their matches.
    pub rmse: f64,
    pub iterations: usize,
}

fn points(shape: &Shape3D) -> Result<Vec<Vector3<f64>>> {
    if shape.0.len() % 3 != 0 {
        return Err(Error::InvalidInput(format!(
            "shape length {} is not a multiple of 3",
            shape.0.len()
        )));
    }
    Ok(shape.vertices().map(Vector3::from).collect())
}

fn centroid(pts: &[Vector3<f64>]) -> Vector3<f64> {
    pts.iter().sum::<Vector3<f64>>() / pts.len() as f64
}

fn check_spread(pts: &[Vector3<f64>], name: &str) -> Result<()> {
    if pts.len() < 3 {
        return Err(Error::Degenerate(format!("{name} has fewer than 3 points")));
    }
    let c = centroid(pts);
    let scatter: Matrix3<f64> = pts.iter().map(|p| (p - c) * (p - c).transpose()).sum();
    let mut sv: Vec<f64> = scatter.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    if !(sv[0] > 0.0) || sv[1] <= RANK_TOL * sv[0] {
        return Err(Error::Degenerate(format!("{name} points are collinear or coincident")));
    }
    Ok(())
}

/// Least-squares rotation and translation taking `source[i]` onto `target[i]`.
fn kabsch(source: &[Vector3<f64>], target: &[Vector3<f64>]) -> (Matrix3<f64>, Vector3<f64>) {
    let cs = centroid(source);
    let ct = centroid(target);
    let h: Matrix3<f64> = source
        .iter()
        .zip(target)
        .map(|(s, t)| (s - cs) * (t - ct).transpose())
        .sum();
    let svd = h.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let v = v_t.transpose();
    let d = (v * u.transpose()).determinant().signum();
    let fix = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, d));
    let rotation = v * fix * u.transpose();
    let translation = ct - rotation * cs;
    (rotation, translation)
}

fn apply(rotation: &Matrix3<f64>, translation: &Vector3<f64>, pts: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
    pts.iter().map(|p| rotation * p + translation).collect()
}

fn rmse(a: &[Vector3<f64>], b: &[Vector3<f64>]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y).norm_squared()).sum::<f64>() / a.len() as f64).sqrt()
}

fn nearest(target: &[Vector3<f64>], p: &Vector3<f64>) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (j, t) in target.iter().enumerate() {
        let d = (t - p).norm_squared();
        if d < best.0 {
            best = (d, j);
        }
    }
    best.1
}

fn to_array(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    [
        [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
        [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
        [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
    ]
}

fn finish(rotation: Matrix3<f64>, translation: Vector3<f64>, moved: Vec<Vector3<f64>>, rmse: f64, iterations: usize) -> RigidAlignment {
    RigidAlignment {
        rotation: to_array(&rotation),
        translation: [translation.x, translation.y, translation.z],
        aligned: Shape3D(moved.iter().flat_map(|p| [p.x, p.y, p.z]).collect()),
        rmse,
        iterations,
    }
}

/// Rigidly aligns `source` onto `target`. The returned rotation is proper (det +1).
pub fn rigid_align(source: &Shape3D, target: &Shape3D, mode: AlignMode) -> Result<RigidAlignment> {
    let src = points(source)?;
    let tgt = points(target)?;
    check_spread(&src, "source")?;
    check_spread(&tgt, "target")?;
    match mode {
        AlignMode::KnownCorrespondence => {
            if src.len() != tgt.len() {
                return Err(Error::dim("target vertex count", src.len(), tgt.len()));
            }
            let (r, t) = kabsch(&src, &tgt);
            let moved = apply(&r, &t, &src);
            let err = rmse(&moved, &tgt);
            Ok(finish(r, t, moved, err, 1))
        }
        AlignMode::NearestNeighborIcp { max_iter, tol } => {
            if max_iter == 0 {
                return Err(Error::InvalidInput("ICP needs at least one iteration".into()));
            }
            let mut r = Matrix3::identity();
            let mut t = Vector3::zeros();
            let mut moved = src.clone();
            let mut prev = f64::INFINITY;
            let mut err = f64::INFINITY;
            let mut iterations = 0;
            for _ in 0..max_iter {
                iterations += 1;
                let matched: Vec<Vector3<f64>> = moved.iter().map(|p| tgt[nearest(&tgt, p)]).collect();
                (r, t) = kabsch(&src, &matched);
                moved = apply(&r, &t, &src);
                err = rmse(&moved, &matched);
                if (prev - err).abs() < tol {
                    break;
                }
                prev = err;
            }
            Ok(finish(r, t, moved, err, iterations))
        }
    }
}
