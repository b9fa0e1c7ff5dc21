use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{solve_modes_at, SensorSelection, StructuralModel};
use crate::error::{Error, Result};
use crate::params::ParameterVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MeasurementProvenance {
    pub truth_params: ParameterVector,
    pub noise_seed: u64,
    pub noise_level: f64,
    /// Hash of the configuration that produced the measurement.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_sha256: Option<String>,
}

/// Measured frequencies (Hz) and sensor-sampled mode shapes (`s × q`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ModalMeasurement {
    pub frequencies: Vec<f64>,
    #[serde(with = "crate::serde_rows")]
    pub shapes: DMatrix<f64>,
    pub sensors: SensorSelection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<MeasurementProvenance>,
}

impl ModalMeasurement {
    pub fn mode_count(&self) -> usize {
        self.frequencies.len()
    }

    pub fn validate(&self) -> Result<()> {
        let q = self.frequencies.len();
        if q == 0 {
            return Err(Error::InvalidMeasurement("no measured modes".into()));
        }
        if self.shapes.ncols() != q || self.shapes.nrows() != self.sensors.len() {
            return Err(Error::InvalidMeasurement(format!(
                "shape matrix is {}x{}, expected {}x{q}",
                self.shapes.nrows(),
                self.shapes.ncols(),
                self.sensors.len()
            )));
        }
        if self.frequencies.iter().chain(self.shapes.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidMeasurement("non-finite value".into()));
        }
        Ok(())
    }
}

/// Solves the model at `truth` and perturbs every frequency and shape
/// amplitude by an independent factor `1 + noise_level·ξ`, `ξ ~ N(0, 1)`.
pub fn simulate_measurement(
    model: &StructuralModel,
    truth: &ParameterVector,
    sensors: &SensorSelection,
    q: usize,
    noise_level: f64,
    seed: u64,
) -> Result<ModalMeasurement> {
    if !(noise_level >= 0.0 && noise_level.is_finite()) {
        return Err(Error::InvalidMeasurement(format!("noise level {noise_level} must be ≥ 0")));
    }
    let pred = solve_modes_at(model, truth, q, sensors)?;
    let mut frequencies = pred.frequencies;
    let mut shapes = pred.shapes;
    if noise_level > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for f in frequencies.iter_mut() {
            let xi: f64 = StandardNormal.sample(&mut rng);
            *f *= 1.0 + noise_level * xi;
        }
        // Column-major: mode by mode, sensor by sensor.
        for v in shapes.iter_mut() {
            let xi: f64 = StandardNormal.sample(&mut rng);
            *v *= 1.0 + noise_level * xi;
        }
    }
    Ok(ModalMeasurement {
        frequencies,
        shapes,
        sensors: sensors.clone(),
        provenance: Some(MeasurementProvenance {
            truth_params: truth.clone(),
            noise_seed: seed,
            noise_level,
            config_sha256: None,
        }),
    })
}
