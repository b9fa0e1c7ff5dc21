use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use super::{extract_at_sensors, ModalResult, SensorSelection, StructuralModel};
use crate::error::{Error, Result};
use crate::params::ParameterVector;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;
/// Extra vectors carried through subspace refinement beyond the `q` wanted.
const REFINE_GUARD: usize = 4;
const REFINE_SWEEPS: usize = 2;
/// Residuals above this are reported as a failed solve.
const RESIDUAL_FAILURE: f64 = 1e-6;
/// Relative gap below which two eigenvalues are treated as degenerate.
const TIE_TOLERANCE: f64 = 1e-10;

/// Lowest `q` modes of `K(α) ψ = λ M ψ` with `λ = (2πf)²`.
///
/// Shapes are mass-normalized. Each mode is signed so that its
/// largest-magnitude amplitude over the sensor dofs (all free dofs when
/// `sensors` is `None`) is positive; the returned `shapes` are the full
/// shapes when no sensors are given.
pub fn solve_modes(
    model: &StructuralModel,
    alpha: &ParameterVector,
    q: usize,
    sensors: Option<&SensorSelection>,
) -> Result<ModalResult> {
    let n = model.free_dof_count();
    if q == 0 || q > n {
        return Err(Error::InvalidModel(format!("requested {q} modes from {n} free dofs")));
    }
    if let Some(s) = sensors {
        s.validate(n)?;
    }
    let k = model.assemble_reduced(alpha)?;
    let m = model.reduced_mass();

    let (values, vectors) = generalized_eigen(&k, m)?;
    let guard = (q + REFINE_GUARD).min(n);
    let (values, vectors) = refine(&k, m, &values[..guard], vectors.columns(0, guard).clone_owned())?;

    let sign_rows: Vec<usize> = match sensors {
        Some(s) => s.dof_indices.clone(),
        None => (0..n).collect(),
    };
    let order = mode_order(&values, &vectors);

    let mut shapes = DMatrix::zeros(n, q);
    let mut eigenvalues = Vec::with_capacity(q);
    for (col, &idx) in order.iter().take(q).enumerate() {
        let mut v = vectors.column(idx).clone_owned();
        let pivot = first_argmax_abs(sign_rows.iter().map(|&r| v[r]));
        if v[sign_rows[pivot]] < 0.0 {
            v.neg_mut();
        }
        shapes.set_column(col, &v);
        eigenvalues.push(values[idx]);
    }

    let mut max_residual = 0.0f64;
    for (col, &lambda) in eigenvalues.iter().enumerate() {
        let psi = shapes.column(col);
        let kpsi = &k * psi;
        let r = &kpsi - (m * psi) * lambda;
        max_residual = max_residual.max(r.norm() / kpsi.norm().max(f64::MIN_POSITIVE));
    }
    if !(max_residual <= RESIDUAL_FAILURE) {
        return Err(Error::EigenFailure(format!("eigen-residual {max_residual:e} too large")));
    }

    let frequencies = eigenvalues.iter().map(|l| l.max(0.0).sqrt() / (2.0 * PI)).collect();
    let mut result =
        ModalResult { frequencies, eigenvalues, shapes: DMatrix::zeros(0, 0), full_shapes: Some(shapes), max_residual };
    result.shapes = match sensors {
        Some(s) => extract_at_sensors(&result, s)?,
        None => result.full_shapes.clone().unwrap_or_default(),
    };
    Ok(result)
}

/// Convenience wrapper: sensor-signed modes, sensor rows only.
pub fn solve_modes_at(
    model: &StructuralModel,
    alpha: &ParameterVector,
    q: usize,
    sensors: &SensorSelection,
) -> Result<ModalResult> {
    solve_modes(model, alpha, q, Some(sensors))
}

/// All eigenpairs of `K x = λ M x` via `M = LLᵀ`, ascending, with
/// `M`-orthonormal vectors.
fn generalized_eigen(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let chol = Cholesky::new(m.clone()).ok_or(Error::SingularMass)?;
    let l = chol.l();
    // A = L⁻¹ K L⁻ᵀ, symmetric because K is.
    let b = l.solve_lower_triangular(k).ok_or_else(|| Error::EigenFailure("triangular solve failed".into()))?;
    let mut a = l
        .solve_lower_triangular(&b.transpose())
        .ok_or_else(|| Error::EigenFailure("triangular solve failed".into()))?;
    a = (&a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(a, EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::EigenFailure("symmetric QR iteration did not converge".into()))?;
    let vectors = l
        .transpose()
        .solve_upper_triangular(&eig.eigenvectors)
        .ok_or_else(|| Error::EigenFailure("back substitution failed".into()))?;
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let sorted = DMatrix::from_fn(vectors.nrows(), idx.len(), |r, c| vectors[(r, idx[c])]);
    Ok((values, sorted))
}

/// Shifted subspace iteration with Rayleigh-Ritz on the unreduced `K`.
/// The dense solve loses relative accuracy in the lowest modes when the
/// spectrum spans many decades; a few sweeps against `K + cM` restore it.
fn refine(
    k: &DMatrix<f64>,
    m: &DMatrix<f64>,
    values: &[f64],
    vectors: DMatrix<f64>,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let top = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let shift = values[values.len() / 2].abs().max(1e-12 * top).max(f64::MIN_POSITIVE);
    let Some(chol) = Cholesky::new(k + m * shift) else {
        return Ok((values.to_vec(), vectors));
    };
    let mut values = values.to_vec();
    let mut phi = vectors;
    for _ in 0..REFINE_SWEEPS {
        let y = chol.solve(&(m * &phi));
        let kr = y.transpose() * k * &y;
        let mr = y.transpose() * m * &y;
        let kr = (&kr + kr.transpose()) * 0.5;
        let mr = (&mr + mr.transpose()) * 0.5;
        let Ok((v, z)) = generalized_eigen(&kr, &mr) else {
            break;
        };
        values = v;
        phi = y * z;
    }
    Ok((values, phi))
}

fn first_argmax_abs(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_abs = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v.abs() > best_abs {
            best_abs = v.abs();
            best = i;
        }
    }
    best
}

/// Ascending eigenvalue order; degenerate clusters are ordered by the
/// index of each vector's first maximal amplitude.
fn mode_order(eigenvalues: &[f64], vectors: &DMatrix<f64>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]).then(a.cmp(&b)));
    let peak = |i: usize| first_argmax_abs(vectors.column(i).iter().copied());

    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len()
            && eigenvalues[order[end]] - eigenvalues[order[end - 1]]
                <= TIE_TOLERANCE * eigenvalues[order[end]].abs().max(f64::MIN_POSITIVE)
        {
            end += 1;
        }
        order[start..end].sort_by_key(|&i| (peak(i), i));
        start = end;
    }
    order
}
