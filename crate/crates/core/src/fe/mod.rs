//! Parametrized structural models and their modal analysis.
//!
//! A [`StructuralModel`] carries a fixed mass matrix, an optional
//! non-parametrized stiffness part, and one baseline stiffness matrix per
//! updatable segment. The perturbed stiffness is
//! `K(α) = K_fixed + Σ K_i (1 − α_i)`.

mod builders;
mod eigen;
mod measurement;

pub use builders::{
    build_boundary_spring_frame, build_segmented_cantilever, build_space_truss, build_spring_chain,
    cantilever_fundamental_hz, BeamSection, TrussSpec,
};
pub use eigen::{solve_modes, solve_modes_at};
pub use measurement::{simulate_measurement, MeasurementProvenance, ModalMeasurement};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ParameterVector;

#[derive(Debug, Clone)]
pub struct StructuralModel {
    label: String,
    dof_count: usize,
    dofs_per_node: usize,
    mass: DMatrix<f64>,
    fixed_stiffness: DMatrix<f64>,
    segments: Vec<DMatrix<f64>>,
    fixed_dofs: Vec<usize>,
    boundary_nodes: Vec<usize>,
    reduced: Reduced,
}

/// Matrices with the constrained rows and columns deleted.
#[derive(Debug, Clone)]
struct Reduced {
    free_dofs: Vec<usize>,
    mass: DMatrix<f64>,
    fixed_stiffness: DMatrix<f64>,
    segments: Vec<DMatrix<f64>>,
}

fn check_square(m: &DMatrix<f64>, n: usize, what: &str) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::InvalidModel(format!("{what} is {}x{}, expected {n}x{n}", m.nrows(), m.ncols())));
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::InvalidModel(format!("{what} is not symmetric")));
            }
        }
    }
    Ok(())
}

fn reduce(m: &DMatrix<f64>, keep: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(keep.len(), keep.len(), |i, j| m[(keep[i], keep[j])])
}

impl StructuralModel {
    pub fn new(
        label: impl Into<String>,
        mass: DMatrix<f64>,
        fixed_stiffness: DMatrix<f64>,
        segments: Vec<DMatrix<f64>>,
        fixed_dofs: Vec<usize>,
    ) -> Result<Self> {
        let n = mass.nrows();
        check_square(&mass, n, "mass matrix")?;
        check_square(&fixed_stiffness, n, "fixed stiffness")?;
        for (i, k) in segments.iter().enumerate() {
            check_square(k, n, &format!("segment {} stiffness", i + 1))?;
        }
        if segments.is_empty() {
            return Err(Error::InvalidModel("model has no updatable segments".into()));
        }
        let mut fixed = fixed_dofs;
        fixed.sort_unstable();
        fixed.dedup();
        if let Some(&bad) = fixed.iter().find(|&&d| d >= n) {
            return Err(Error::InvalidModel(format!("fixed dof {bad} out of range (N = {n})")));
        }
        let free_dofs: Vec<usize> = (0..n).filter(|d| fixed.binary_search(d).is_err()).collect();
        if free_dofs.is_empty() {
            return Err(Error::InvalidModel("every dof is constrained".into()));
        }
        let reduced = Reduced {
            mass: reduce(&mass, &free_dofs),
            fixed_stiffness: reduce(&fixed_stiffness, &free_dofs),
            segments: segments.iter().map(|k| reduce(k, &free_dofs)).collect(),
            free_dofs,
        };
        Ok(Self {
            label: label.into(),
            dof_count: n,
            dofs_per_node: 1,
            mass,
            fixed_stiffness,
            segments,
            fixed_dofs: fixed,
            boundary_nodes: Vec::new(),
            reduced,
        })
    }

    pub(crate) fn with_nodes(mut self, dofs_per_node: usize, boundary_nodes: Vec<usize>) -> Self {
        self.dofs_per_node = dofs_per_node;
        self.boundary_nodes = boundary_nodes;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Total number of dofs, constrained ones included.
    pub fn dof_count(&self) -> usize {
        self.dof_count
    }

    /// Number of dofs left after constraint elimination.
    pub fn free_dof_count(&self) -> usize {
        self.reduced.free_dofs.len()
    }

    /// Maps post-constraint dof numbering back to the full numbering.
    pub fn free_dofs(&self) -> &[usize] {
        &self.reduced.free_dofs
    }

    /// Post-constraint index of full dof `dof`, if it is free.
    pub fn free_index(&self, dof: usize) -> Option<usize> {
        self.reduced.free_dofs.binary_search(&dof).ok()
    }

    pub fn dofs_per_node(&self) -> usize {
        self.dofs_per_node
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    pub fn mass(&self) -> &DMatrix<f64> {
        &self.mass
    }

    pub fn fixed_stiffness(&self) -> &DMatrix<f64> {
        &self.fixed_stiffness
    }

    pub fn segment_stiffness(&self) -> &[DMatrix<f64>] {
        &self.segments
    }

    pub fn fixed_dofs(&self) -> &[usize] {
        &self.fixed_dofs
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary_nodes
    }

    /// Nominal global stiffness, i.e. the assembly at `α = 0`.
    pub fn nominal_stiffness(&self) -> DMatrix<f64> {
        self.segments.iter().fold(self.fixed_stiffness.clone(), |acc, k| acc + k)
    }

    fn check_alpha(&self, alpha: &ParameterVector) -> Result<()> {
        if alpha.len() != self.segments.len() {
            return Err(Error::InvalidModel(format!(
                "parameter vector has {} entries, model has {} segments",
                alpha.len(),
                self.segments.len()
            )));
        }
        Ok(())
    }

    pub(crate) fn reduced_mass(&self) -> &DMatrix<f64> {
        &self.reduced.mass
    }

    pub(crate) fn assemble_reduced(&self, alpha: &ParameterVector) -> Result<DMatrix<f64>> {
        self.check_alpha(alpha)?;
        Ok(combine(&self.reduced.fixed_stiffness, &self.reduced.segments, alpha.as_slice()))
    }
}

fn combine(fixed: &DMatrix<f64>, segments: &[DMatrix<f64>], alpha: &[f64]) -> DMatrix<f64> {
    let mut k = fixed.clone();
    for (ki, a) in segments.iter().zip(alpha) {
        k += ki * (1.0 - a);
    }
    k
}

/// Perturbed global stiffness `K_fixed + Σ K_i (1 − α_i)` in full dof numbering.
pub fn assemble_stiffness(model: &StructuralModel, alpha: &ParameterVector) -> Result<DMatrix<f64>> {
    model.check_alpha(alpha)?;
    Ok(combine(&model.fixed_stiffness, &model.segments, alpha.as_slice()))
}

/// Sensor dofs in post-constraint numbering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensorSelection {
    pub dof_indices: Vec<usize>,
    #[serde(default)]
    pub description: String,
}

impl SensorSelection {
    pub fn new(dof_indices: Vec<usize>, description: impl Into<String>) -> Self {
        Self { dof_indices, description: description.into() }
    }

    pub fn len(&self) -> usize {
        self.dof_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dof_indices.is_empty()
    }

    pub fn validate(&self, free_dofs: usize) -> Result<()> {
        if self.dof_indices.is_empty() {
            return Err(Error::InvalidSensor("at least one sensor is required".into()));
        }
        let mut seen = self.dof_indices.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSensor("duplicate sensor dof".into()));
        }
        if let Some(&bad) = self.dof_indices.iter().find(|&&d| d >= free_dofs) {
            return Err(Error::InvalidSensor(format!("sensor dof {bad} out of range ({free_dofs} free dofs)")));
        }
        Ok(())
    }
}

/// Predicted modal data for the lowest `q` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalResult {
    /// Natural frequencies in Hz, ascending.
    pub frequencies: Vec<f64>,
    /// Generalized eigenvalues `(2πf)²`.
    pub eigenvalues: Vec<f64>,
    /// Mode-shape amplitudes at the sensor dofs, `s × q`.
    pub shapes: DMatrix<f64>,
    /// Mass-normalized shapes over all free dofs, `N_free × q`.
    pub full_shapes: Option<DMatrix<f64>>,
    /// Largest relative eigen-residual over the returned modes.
    pub max_residual: f64,
}

impl ModalResult {
    pub fn mode_count(&self) -> usize {
        self.frequencies.len()
    }
}

/// Gathers the sensor rows of the full mode shapes.
pub fn extract_at_sensors(result: &ModalResult, sensors: &SensorSelection) -> Result<DMatrix<f64>> {
    let full = result
        .full_shapes
        .as_ref()
        .ok_or_else(|| Error::InvalidSensor("modal result carries no full shapes".into()))?;
    sensors.validate(full.nrows())?;
    Ok(DMatrix::from_fn(sensors.len(), full.ncols(), |j, k| full[(sensors.dof_indices[j], k)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_segment() -> StructuralModel {
        build_spring_chain(3, &[1.0, 2.0, 1.5], &[3.0, 2.0, 1.0], &[1, 2, 2]).unwrap()
    }

    #[test]
    fn zero_alpha_is_nominal() {
        let m = two_segment();
        let k = assemble_stiffness(&m, &ParameterVector::zeros(2)).unwrap();
        assert_eq!(k, m.nominal_stiffness());
    }

    #[test]
    fn unit_alpha_removes_every_segment() {
        let m = two_segment();
        let k = assemble_stiffness(&m, &ParameterVector::new(vec![1.0, 1.0])).unwrap();
        assert!(k.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn half_first_segment() {
        let m = two_segment();
        let k = assemble_stiffness(&m, &ParameterVector::new(vec![0.5, 0.0])).unwrap();
        let expect = &m.segment_stiffness()[0] * 0.5 + &m.segment_stiffness()[1];
        assert!((k - expect).amax() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let m = two_segment();
        let err = assemble_stiffness(&m, &ParameterVector::zeros(3)).unwrap_err();
        assert!(matches!(err, Error::InvalidModel(_)));
    }

    #[test]
    fn sensor_gather() {
        let m = two_segment();
        let r = solve_modes(&m, &ParameterVector::zeros(2), 3, None).unwrap();
        let full = r.full_shapes.clone().unwrap();

        let all = SensorSelection::new(vec![0, 1, 2], "all");
        assert_eq!(extract_at_sensors(&r, &all).unwrap(), full);

        let one = SensorSelection::new(vec![1], "one");
        let row = extract_at_sensors(&r, &one).unwrap();
        assert_eq!(row.shape(), (1, 3));
        for k in 0..3 {
            assert_eq!(row[(0, k)], full[(1, k)]);
        }

        let perm = SensorSelection::new(vec![2, 0, 1], "perm");
        let p = extract_at_sensors(&r, &perm).unwrap();
        for (j, &d) in perm.dof_indices.iter().enumerate() {
            assert_eq!(p.row(j), full.row(d));
        }

        let bad = SensorSelection::new(vec![3], "bad");
        assert!(matches!(extract_at_sensors(&r, &bad), Err(Error::InvalidSensor(_))));
        let dup = SensorSelection::new(vec![1, 1], "dup");
        assert!(matches!(extract_at_sensors(&r, &dup), Err(Error::InvalidSensor(_))));
    }

    proptest! {
        #[test]
        fn assembly_is_affine(a in proptest::collection::vec(0.0..0.5f64, 2),
                              b in proptest::collection::vec(0.0..0.5f64, 2)) {
            let m = two_segment();
            let ka = assemble_stiffness(&m, &ParameterVector::new(a.clone())).unwrap();
            let kb = assemble_stiffness(&m, &ParameterVector::new(b.clone())).unwrap();
            let k0 = assemble_stiffness(&m, &ParameterVector::zeros(2)).unwrap();
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let kab = assemble_stiffness(&m, &ParameterVector::new(sum)).unwrap();
            prop_assert!((ka + kb - k0 - kab).amax() < 1e-12);
        }
    }
}
