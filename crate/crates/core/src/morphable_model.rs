//! Linear morphable face model: shape synthesis, weak-perspective projection,
//! the 62-entry parameter layout and the basis file format.

use std::fmt::Write as _;
use std::ops::Range;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use crate::error::{check_len, Error, Result};
use crate::textio::{self, KeyedLines};

/// Number of identity (shape) principal components.
pub const N_SHAPE: usize = 40;
/// Number of expression principal components.
pub const N_EXP: usize = 10;
/// Length of the flat parameter vector `[f | R | t2d | u_shp | u_exp]`.
pub const N_PARAMS: usize = 62;
/// Flat index range of `u_shp ++ u_exp`, the block compared by the contrastive shape loss.
pub const SHAPE_BLOCK: Range<usize> = 12..62;
/// Length of [`SHAPE_BLOCK`].
pub const SHAPE_BLOCK_LEN: usize = N_SHAPE + N_EXP;
/// Default sparse landmark count.
pub const DEFAULT_LANDMARKS: usize = 68;

pub const IDX_SCALE: usize = 0;
pub const IDX_ROTATION: Range<usize> = 1..10;
pub const IDX_TRANSLATION: Range<usize> = 10..12;
pub const IDX_SHAPE: Range<usize> = 12..52;
pub const IDX_EXPRESSION: Range<usize> = 52..62;

/// Flat 62-entry parameter vector.
pub type FlatParams = [f64; N_PARAMS];

/// Mean shape plus shape and expression principal components.
///
/// Matrices are stored row-major: row `r` of `shape_basis` holds the 40
/// coefficients multiplying coordinate `r` of the interleaved `(x, y, z)` shape.
#[derive(Debug, Clone, PartialEq)]
pub struct MorphableBasis {
    vertex_count: usize,
    mean_shape: Vec<f64>,
    shape_basis: Vec<f64>,
    expression_basis: Vec<f64>,
    landmark_indices: Vec<usize>,
}

impl MorphableBasis {
    pub fn new(
        mean_shape: Vec<f64>,
        shape_basis: Vec<f64>,
        expression_basis: Vec<f64>,
        landmark_indices: Vec<usize>,
    ) -> Result<Self> {
        if mean_shape.is_empty() || mean_shape.len() % 3 != 0 {
            return Err(Error::InvalidInput(format!(
                "mean shape length {} is not a positive multiple of 3",
                mean_shape.len()
            )));
        }
        let rows = mean_shape.len();
        check_len("shape_basis", rows * N_SHAPE, &shape_basis)?;
        check_len("expression_basis", rows * N_EXP, &expression_basis)?;
        let vertex_count = rows / 3;
        let mut seen = vec![false; vertex_count];
        for &i in &landmark_indices {
            if i >= vertex_count {
                return Err(Error::InvalidInput(format!(
                    "landmark index {i} out of range for {vertex_count} vertices"
                )));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidInput(format!("duplicate landmark index {i}")));
            }
        }
        if [&mean_shape, &shape_basis, &expression_basis]
            .iter()
            .any(|v| v.iter().any(|x| !x.is_finite()))
        {
            return Err(Error::InvalidInput("basis contains non-finite values".into()));
        }
        Ok(Self {
            vertex_count,
            mean_shape,
            shape_basis,
            expression_basis,
            landmark_indices,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn landmark_count(&self) -> usize {
        self.landmark_indices.len()
    }

    pub fn mean_shape(&self) -> &[f64] {
        &self.mean_shape
    }

    pub fn shape_basis(&self) -> &[f64] {
        &self.shape_basis
    }

    pub fn expression_basis(&self) -> &[f64] {
        &self.expression_basis
    }

    pub fn landmark_indices(&self) -> &[usize] {
        &self.landmark_indices
    }

    /// Coordinate `row` of the 40 shape columns.
    pub fn shape_row(&self, row: usize) -> &[f64] {
        &self.shape_basis[row * N_SHAPE..(row + 1) * N_SHAPE]
    }

    /// Coordinate `row` of the 10 expression columns.
    pub fn expression_row(&self, row: usize) -> &[f64] {
        &self.expression_basis[row * N_EXP..(row + 1) * N_EXP]
    }

    /// Column `k` of the shape basis as a dense 3N-vector.
    pub fn shape_column(&self, k: usize) -> Vec<f64> {
        (0..self.mean_shape.len())
            .map(|r| self.shape_basis[r * N_SHAPE + k])
            .collect()
    }

    /// Column `k` of the expression basis as a dense 3N-vector.
    pub fn expression_column(&self, k: usize) -> Vec<f64> {
        (0..self.mean_shape.len())
            .map(|r| self.expression_basis[r * N_EXP + k])
            .collect()
    }

    /// Short content hash identifying this basis in dataset headers.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        hex::encode(&digest[..8])
    }

    /// 3D position of vertex `v` for the given coefficients.
    pub fn vertex(&self, v: usize, u_shp: &[f64], u_exp: &[f64]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (c, o) in out.iter_mut().enumerate() {
            let row = 3 * v + c;
            *o = self.mean_shape[row]
                + dot(self.shape_row(row), u_shp)
                + dot(self.expression_row(row), u_exp);
        }
        out
    }

    pub fn to_text(&self) -> String {
        let rows = self.mean_shape.len();
        let mut out = String::new();
        out.push_str("# siamface morphable basis\n");
        let _ = writeln!(out, "n_vertices {}", self.vertex_count);
        let _ = writeln!(out, "n_landmarks {}", self.landmark_indices.len());
        let indices: Vec<String> = self.landmark_indices.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(out, "landmark_indices {}", indices.join(" "));
        let _ = writeln!(out, "mean {}", textio::join_exact(&self.mean_shape));
        for (name, data, cols) in [
            ("shape_basis", &self.shape_basis, N_SHAPE),
            ("expression_basis", &self.expression_basis, N_EXP),
        ] {
            let _ = writeln!(out, "{name} {rows} {cols}");
            for row in data.chunks(cols) {
                out.push_str(&textio::join_exact(row));
                out.push('\n');
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = KeyedLines::new(text);
        let (n, rest) = lines.expect("n_vertices")?;
        let vertex_count = textio::parse_usize(n, "n_vertices", rest)?;
        if vertex_count == 0 {
            return Err(Error::parse(n, "n_vertices", "must be positive"));
        }
        let rows = 3 * vertex_count;
        let (n, rest) = lines.expect("n_landmarks")?;
        let landmark_count = textio::parse_usize(n, "n_landmarks", rest)?;
        let (n, rest) = lines.expect("landmark_indices")?;
        let landmark_indices = rest
            .split_whitespace()
            .map(|t| textio::parse_usize(n, "landmark_indices", t))
            .collect::<Result<Vec<_>>>()?;
        if landmark_indices.len() != landmark_count {
            return Err(Error::dim("landmark_indices", landmark_count, landmark_indices.len()));
        }
        let (n, rest) = lines.expect("mean")?;
        let mean_shape = textio::parse_reals(n, "mean", rest, rows)?;
        let shape_basis = read_matrix(&mut lines, "shape_basis", rows, N_SHAPE)?;
        let expression_basis = read_matrix(&mut lines, "expression_basis", rows, N_EXP)?;
        lines.expect_end()?;
        Self::new(mean_shape, shape_basis, expression_basis, landmark_indices)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

fn read_matrix(lines: &mut KeyedLines<'_>, name: &str, rows: usize, cols: usize) -> Result<Vec<f64>> {
    let (n, rest) = lines.expect(name)?;
    let dims: Vec<&str> = rest.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(Error::parse(n, name, "expected `<rows> <cols>`"));
    }
    let found_rows = textio::parse_usize(n, name, dims[0])?;
    let found_cols = textio::parse_usize(n, name, dims[1])?;
    if found_cols != cols {
        return Err(Error::dim(format!("{name} columns"), cols, found_cols));
    }
    if found_rows != rows {
        return Err(Error::dim(format!("{name} rows"), rows, found_rows));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let (n, content) = lines.next_line(name)?;
        data.extend(textio::parse_reals(n, name, content, cols)?);
    }
    Ok(data)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dense 3D face shape, interleaved `(x, y, z)` per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Shape3D(pub Vec<f64>);

impl Shape3D {
    pub fn vertex_count(&self) -> usize {
        self.0.len() / 3
    }

    pub fn vertex(&self, i: usize) -> [f64; 3] {
        [self.0[3 * i], self.0[3 * i + 1], self.0[3 * i + 2]]
    }

    pub fn vertices(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        self.0.chunks_exact(3).map(|c| [c[0], c[1], c[2]])
    }

    pub fn from_vertices(vertices: &[[f64; 3]]) -> Self {
        Shape3D(vertices.iter().flatten().copied().collect())
    }
}

/// Projected 2D points, interleaved `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Landmarks2D(pub Vec<f64>);

impl Landmarks2D {
    pub fn point_count(&self) -> usize {
        self.0.len() / 2
    }
}

/// Structured view of the 62 regression targets. `r` is a plain 3×3 matrix
/// and is not required to be a rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    pub f: f64,
    pub r: [[f64; 3]; 3],
    pub t2d: [f64; 2],
    pub u_shp: [f64; N_SHAPE],
    pub u_exp: [f64; N_EXP],
}

impl ParamVector {
    /// `f = 1`, `R = I`, zero translation and coefficients.
    pub fn identity() -> Self {
        Self {
            f: 1.0,
            r: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            t2d: [0.0; 2],
            u_shp: [0.0; N_SHAPE],
            u_exp: [0.0; N_EXP],
        }
    }

    pub fn pack(&self) -> FlatParams {
        let mut v = [0.0; N_PARAMS];
        v[IDX_SCALE] = self.f;
        for (i, x) in self.r.iter().flatten().enumerate() {
            v[IDX_ROTATION.start + i] = *x;
        }
        v[IDX_TRANSLATION].copy_from_slice(&self.t2d);
        v[IDX_SHAPE].copy_from_slice(&self.u_shp);
        v[IDX_EXPRESSION].copy_from_slice(&self.u_exp);
        v
    }

    pub fn unpack(v: &[f64]) -> Result<Self> {
        check_len("parameter vector", N_PARAMS, v)?;
        let mut p = Self::identity();
        p.f = v[IDX_SCALE];
        for (i, x) in v[IDX_ROTATION].iter().enumerate() {
            p.r[i / 3][i % 3] = *x;
        }
        p.t2d.copy_from_slice(&v[IDX_TRANSLATION]);
        p.u_shp.copy_from_slice(&v[IDX_SHAPE]);
        p.u_exp.copy_from_slice(&v[IDX_EXPRESSION]);
        Ok(p)
    }
}

/// Entries `[12, 62)` of a flat parameter vector.
pub fn shape_block(v: &FlatParams) -> &[f64] {
    &v[SHAPE_BLOCK]
}

/// `S = mean + A_shp u_shp + A_exp u_exp`.
pub fn reconstruct_shape(basis: &MorphableBasis, u_shp: &[f64], u_exp: &[f64]) -> Result<Shape3D> {
    check_len("u_shp", N_SHAPE, u_shp)?;
    check_len("u_exp", N_EXP, u_exp)?;
    let coords = (0..basis.mean_shape.len())
        .map(|row| {
            basis.mean_shape[row]
                + dot(basis.shape_row(row), u_shp)
                + dot(basis.expression_row(row), u_exp)
        })
        .collect();
    Ok(Shape3D(coords))
}

#[inline]
fn project_point(p: [f64; 3], f: f64, r: &[[f64; 3]; 3], t2d: [f64; 2]) -> [f64; 2] {
    [
        f * (r[0][0] * p[0] + r[0][1] * p[1] + r[0][2] * p[2]) + t2d[0],
        f * (r[1][0] * p[0] + r[1][1] * p[1] + r[1][2] * p[2]) + t2d[1],
    ]
}

/// Weak-perspective projection `f · Pr · R · s_i + t2d` of every vertex.
pub fn project(shape: &Shape3D, f: f64, r: &[[f64; 3]; 3], t2d: [f64; 2]) -> Result<Landmarks2D> {
    if shape.0.len() % 3 != 0 {
        return Err(Error::InvalidInput(format!(
            "shape length {} is not a multiple of 3",
            shape.0.len()
        )));
    }
    let coords = shape
        .vertices()
        .flat_map(|p| project_point(p, f, r, t2d))
        .collect();
    Ok(Landmarks2D(coords))
}

/// Projection of the basis landmarks, in `landmark_indices` order.
pub fn sparse_landmarks(params: &ParamVector, basis: &MorphableBasis) -> Result<Landmarks2D> {
    if basis.landmark_indices.is_empty() {
        return Err(Error::InvalidInput("basis has no landmark indices".into()));
    }
    let coords = basis
        .landmark_indices
        .iter()
        .flat_map(|&v| {
            let p = basis.vertex(v, &params.u_shp, &params.u_exp);
            project_point(p, params.f, &params.r, params.t2d)
        })
        .collect();
    Ok(Landmarks2D(coords))
}

/// Rotation `Rx(pitch) · Ry(yaw) · Rz(roll)`, angles in radians.
pub fn rotation_from_euler(yaw: f64, pitch: f64, roll: f64) -> [[f64; 3]; 3] {
    let (sy, cy) = yaw.sin_cos();
    let (sp, cp) = pitch.sin_cos();
    let (sr, cr) = roll.sin_cos();
    let rx = [[1.0, 0.0, 0.0], [0.0, cp, -sp], [0.0, sp, cp]];
    let ry = [[cy, 0.0, sy], [0.0, 1.0, 0.0], [-sy, 0.0, cy]];
    let rz = [[cr, -sr, 0.0], [sr, cr, 0.0], [0.0, 0.0, 1.0]];
    matmul3(&matmul3(&rx, &ry), &rz)
}

pub(crate) fn matmul3(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Per-coordinate RMS displacement of the first synthetic shape column at unit coefficient.
pub const SYNTH_SHAPE_RMS: f64 = 0.3;
/// Per-coordinate RMS displacement of the first synthetic expression column at unit coefficient.
pub const SYNTH_EXPRESSION_RMS: f64 = 0.1;

/// Which coefficient block a basis column belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisBlock {
    Shape,
    Expression,
}

/// Euclidean norm of column `k` in a synthetic basis over `vertex_count` vertices.
pub fn synthetic_column_scale(block: BasisBlock, k: usize, vertex_count: usize) -> f64 {
    let rms = match block {
        BasisBlock::Shape => SYNTH_SHAPE_RMS,
        BasisBlock::Expression => SYNTH_EXPRESSION_RMS,
    };
    rms * ((3 * vertex_count) as f64).sqrt() / (k + 1) as f64
}

/// Smallest vertex count that fits 50 mutually orthogonal columns.
pub const MIN_SYNTH_VERTICES: usize = (SHAPE_BLOCK_LEN + 2) / 3;

struct SmoothField {
    terms: Vec<([f64; 2], f64, f64)>,
}

impl SmoothField {
    fn random(rng: &mut ChaCha8Rng, terms: usize, max_freq: f64, amplitude: f64) -> Self {
        let terms = (0..terms)
            .map(|_| {
                let w = [rng.random_range(-max_freq..max_freq), rng.random_range(-max_freq..max_freq)];
                let phase = rng.random_range(0.0..std::f64::consts::TAU);
                let amp: f64 = rng.sample::<f64, _>(StandardNormal) * amplitude;
                (w, phase, amp)
            })
            .collect();
        Self { terms }
    }

    fn eval(&self, u: f64, v: f64) -> f64 {
        self.terms
            .iter()
            .map(|(w, phase, amp)| amp * (w[0] * u + w[1] * v + phase).sin())
            .sum()
    }
}

/// Deterministic stand-in for a real face model.
///
/// Vertices sit on a smooth, gently perturbed frontal surface. The 50 basis
/// columns are smooth random displacement fields, jointly orthonormalized and
/// scaled by [`synthetic_column_scale`], which decays as `1/(k+1)`.
/// Landmark indices are `landmark_count` distinct vertices in ascending order.
pub fn make_synthetic_basis(vertex_count: usize, landmark_count: usize, seed: u64) -> Result<MorphableBasis> {
    if landmark_count == 0 || vertex_count < landmark_count {
        return Err(Error::InvalidInput(format!(
            "need vertex_count >= landmark_count >= 1, got {vertex_count} and {landmark_count}"
        )));
    }
    if vertex_count < MIN_SYNTH_VERTICES {
        return Err(Error::InvalidInput(format!(
            "synthetic basis needs at least {MIN_SYNTH_VERTICES} vertices for {SHAPE_BLOCK_LEN} orthogonal columns"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = 3 * vertex_count;

    let mut surface = Vec::with_capacity(vertex_count);
    while surface.len() < vertex_count {
        let u: f64 = rng.random_range(-1.0..1.0);
        let v: f64 = rng.random_range(-1.0..1.0);
        if u * u + v * v <= 1.0 {
            surface.push((u, v));
        }
    }
    let relief = SmoothField::random(&mut rng, 5, 3.0, 0.03);
    let mut mean_shape = Vec::with_capacity(rows);
    for &(u, v) in &surface {
        let depth = 0.55 * (1.0 - 0.6 * (u * u + v * v)).max(0.0).sqrt() + relief.eval(u, v);
        mean_shape.extend([0.75 * u, 0.95 * v, depth]);
    }

    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(SHAPE_BLOCK_LEN);
    for k in 0..SHAPE_BLOCK_LEN {
        let fields: Vec<SmoothField> = (0..3).map(|_| SmoothField::random(&mut rng, 4, 2.5, 1.0)).collect();
        let mut col = Vec::with_capacity(rows);
        for &(u, v) in &surface {
            for field in &fields {
                let jitter: f64 = rng.sample(StandardNormal);
                col.push(field.eval(u, v) + 0.15 * jitter);
            }
        }
        // Modified Gram-Schmidt, two passes.
        for _ in 0..2 {
            for prev in &columns {
                let proj = dot(&col, prev);
                col.iter_mut().zip(prev).for_each(|(c, p)| *c -= proj * p);
            }
        }
        let norm = dot(&col, &col).sqrt();
        if norm < 1e-8 {
            return Err(Error::Degenerate(format!("basis column {k} collapsed during orthonormalization")));
        }
        col.iter_mut().for_each(|c| *c /= norm);
        columns.push(col);
    }

    let mut shape_basis = vec![0.0; rows * N_SHAPE];
    let mut expression_basis = vec![0.0; rows * N_EXP];
    for (k, col) in columns.iter().enumerate() {
        let (block, idx, target, width) = if k < N_SHAPE {
            (BasisBlock::Shape, k, &mut shape_basis, N_SHAPE)
        } else {
            (BasisBlock::Expression, k - N_SHAPE, &mut expression_basis, N_EXP)
        };
        let scale = synthetic_column_scale(block, idx, vertex_count);
        for (r, c) in col.iter().enumerate() {
            target[r * width + idx] = c * scale;
        }
    }

    let mut landmark_indices = rand::seq::index::sample(&mut rng, vertex_count, landmark_count).into_vec();
    landmark_indices.sort_unstable();

    MorphableBasis::new(mean_shape, shape_basis, expression_basis, landmark_indices)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_basis(n: usize) -> MorphableBasis {
        let rows = 3 * n;
        let mean: Vec<f64> = (0..rows).map(|i| i as f64 * 0.5 - 1.0).collect();
        let mut shape = vec![0.0; rows * N_SHAPE];
        shape[0] = 1.0;
        MorphableBasis::new(mean, shape, vec![0.0; rows * N_EXP], (0..n).collect()).unwrap()
    }

    #[test]
    fn zero_coefficients_give_mean() {
        let b = unit_basis(4);
        let s = reconstruct_shape(&b, &[0.0; N_SHAPE], &[0.0; N_EXP]).unwrap();
        assert_eq!(s.0, b.mean_shape());
    }

    #[test]
    fn single_column_activation() {
        let b = unit_basis(4);
        let mut u = [0.0; N_SHAPE];
        u[0] = 2.0;
        let s = reconstruct_shape(&b, &u, &[0.0; N_EXP]).unwrap();
        let mut expected = b.mean_shape().to_vec();
        expected[0] += 2.0;
        assert_eq!(s.0, expected);
    }

    #[test]
    fn coefficient_length_is_checked() {
        let b = unit_basis(4);
        let err = reconstruct_shape(&b, &[0.0; 39], &[0.0; N_EXP]).unwrap_err();
        assert!(matches!(err, Error::Dimension { expected: 40, found: 39, .. }));
    }

    #[test]
    fn identity_projection_keeps_xy() {
        let s = Shape3D(vec![1.0, 2.0, 3.0, -4.0, 5.0, 6.0]);
        let id = ParamVector::identity();
        let v = project(&s, 1.0, &id.r, [0.0, 0.0]).unwrap();
        assert_eq!(v.0, vec![1.0, 2.0, -4.0, 5.0]);
    }

    #[test]
    fn single_vertex_projection() {
        let s = Shape3D(vec![1.0, 2.0, 3.0]);
        let v = project(&s, 2.0, &ParamVector::identity().r, [1.0, 1.0]).unwrap();
        assert_eq!(v.0, vec![3.0, 5.0]);
    }

    #[test]
    fn identity_params_project_mean_landmarks() {
        let b = make_synthetic_basis(30, 5, 3).unwrap();
        let v = sparse_landmarks(&ParamVector::identity(), &b).unwrap();
        let expected: Vec<f64> = b
            .landmark_indices()
            .iter()
            .flat_map(|&i| [b.mean_shape()[3 * i], b.mean_shape()[3 * i + 1]])
            .collect();
        assert_eq!(v.0, expected);
    }

    #[test]
    fn single_landmark_gives_two_vector() {
        let b = MorphableBasis::new(vec![0.5; 6], vec![0.0; 6 * N_SHAPE], vec![0.0; 6 * N_EXP], vec![0]).unwrap();
        assert_eq!(sparse_landmarks(&ParamVector::identity(), &b).unwrap().0.len(), 2);
    }

    #[test]
    fn identity_layout() {
        let v = ParamVector::identity().pack();
        let mut expected = [0.0; N_PARAMS];
        expected[0] = 1.0;
        expected[1] = 1.0;
        expected[5] = 1.0;
        expected[9] = 1.0;
        assert_eq!(v, expected);
        assert_eq!(shape_block(&v), &[0.0; SHAPE_BLOCK_LEN][..]);
    }

    #[test]
    fn unpack_rejects_wrong_length() {
        assert!(matches!(
            ParamVector::unpack(&[0.0; 61]),
            Err(Error::Dimension { expected: 62, found: 61, .. })
        ));
    }

    #[test]
    fn basis_rejects_bad_landmarks() {
        let mk = |idx: Vec<usize>| MorphableBasis::new(vec![0.0; 6], vec![0.0; 6 * N_SHAPE], vec![0.0; 6 * N_EXP], idx);
        assert!(mk(vec![2]).is_err());
        assert!(mk(vec![1, 1]).is_err());
        assert!(mk(vec![1, 0]).is_ok());
    }

    #[test]
    fn synthetic_basis_is_deterministic() {
        let a = make_synthetic_basis(40, 10, 11).unwrap();
        let b = make_synthetic_basis(40, 10, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, make_synthetic_basis(40, 10, 12).unwrap());
    }

    #[test]
    fn synthetic_basis_full_landmark_cover() {
        let b = make_synthetic_basis(68, 68, 1).unwrap();
        assert_eq!(b.landmark_indices(), (0..68).collect::<Vec<_>>().as_slice());
    }

    #[test]
    fn synthetic_basis_rejects_bad_counts() {
        assert!(make_synthetic_basis(20, 21, 0).is_err());
        assert!(make_synthetic_basis(20, 0, 0).is_err());
        assert!(make_synthetic_basis(MIN_SYNTH_VERTICES - 1, 1, 0).is_err());
        assert!(make_synthetic_basis(MIN_SYNTH_VERTICES, 1, 0).is_ok());
    }

    #[test]
    fn euler_rotation_is_orthonormal() {
        let r = rotation_from_euler(0.7, -0.3, 0.2);
        for i in 0..3 {
            for j in 0..3 {
                let d: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-14);
            }
        }
    }
}
