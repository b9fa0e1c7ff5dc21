//! Unnormalized posterior of a parameter sample given measured modal data.
//!
//! The prior is uniform on the search box, so inside the box the posterior
//! equals the likelihood and peaks at 1 for a perfect match.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fe::{solve_modes_at, ModalMeasurement, ModalResult, SensorSelection, StructuralModel};
use crate::params::{ParameterVector, SearchBox};

/// Anything the samplers can target: a non-negative function on a box.
pub trait Target: Sync {
    fn search_box(&self) -> &SearchBox;

    fn dim(&self) -> usize {
        self.search_box().dim()
    }

    /// Unnormalized posterior density at `x`. Zero outside the box.
    fn evaluate(&self, x: &[f64]) -> Result<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LikelihoodVariant {
    /// Relative frequency error plus MAC per mode.
    FrequencyAndMac,
    /// Point-to-point differences of sensor mode-shape amplitudes.
    PointwiseShape,
}

/// Coefficients of variation applied to the measured quantities.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseModel {
    PerMode(Vec<f64>),
    /// `s × q`, one coefficient per measured amplitude.
    PerEntry(DMatrix<f64>),
}

impl NoiseModel {
    fn validate(&self) -> Result<()> {
        let ok = match self {
            NoiseModel::PerMode(v) => v.iter().all(|e| *e > 0.0 && e.is_finite()),
            NoiseModel::PerEntry(m) => m.iter().all(|e| *e > 0.0 && e.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig("noise coefficients must be strictly positive".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairingMode {
    /// Measured mode `k` is compared with predicted mode `k`.
    #[default]
    Index,
    /// Greedy assignment by descending MAC.
    MacGreedy,
}

#[derive(Debug, Clone)]
pub struct ObjectiveSpec {
    pub variant: LikelihoodVariant,
    pub measurement: ModalMeasurement,
    pub noise: NoiseModel,
    pub prior_box: SearchBox,
    pub model: Arc<StructuralModel>,
    pub pairing: PairingMode,
}

impl ObjectiveSpec {
    pub fn new(
        variant: LikelihoodVariant,
        measurement: ModalMeasurement,
        noise: NoiseModel,
        prior_box: SearchBox,
        model: Arc<StructuralModel>,
    ) -> Result<Self> {
        let spec = Self { variant, measurement, noise, prior_box, model, pairing: PairingMode::Index };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_pairing(mut self, pairing: PairingMode) -> Self {
        self.pairing = pairing;
        self
    }

    pub fn q(&self) -> usize {
        self.measurement.mode_count()
    }

    pub fn sensors(&self) -> &SensorSelection {
        &self.measurement.sensors
    }

    fn validate(&self) -> Result<()> {
        self.measurement.validate()?;
        self.prior_box.validate()?;
        self.noise.validate()?;
        self.measurement.sensors.validate(self.model.free_dof_count())?;
        if self.prior_box.dim() != self.model.segment_count() {
            return Err(Error::InvalidConfig(format!(
                "prior box has {} dimensions, model has {} segments",
                self.prior_box.dim(),
                self.model.segment_count()
            )));
        }
        let (q, s) = (self.q(), self.measurement.sensors.len());
        match (&self.variant, &self.noise) {
            (LikelihoodVariant::FrequencyAndMac, NoiseModel::PerMode(eta)) if eta.len() == q => {
                if let Some(f) = self.measurement.frequencies.iter().find(|f| **f <= 0.0) {
                    return Err(Error::InvalidMeasurement(format!("measured frequency {f} ≤ 0")));
                }
            }
            (LikelihoodVariant::PointwiseShape, NoiseModel::PerEntry(eta)) if eta.shape() == (s, q) => {
                if self.measurement.shapes.iter().any(|v| *v == 0.0) {
                    return Err(Error::InvalidMeasurement(
                        "pointwise likelihood needs non-zero measured amplitudes".into(),
                    ));
                }
            }
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "noise model does not fit the {:?} likelihood with s = {s}, q = {q}",
                    self.variant
                )))
            }
        }
        Ok(())
    }

    /// Model prediction at `alpha` for the measured sensors and mode count.
    pub fn predict(&self, alpha: &ParameterVector) -> Result<ModalResult> {
        solve_modes_at(&self.model, alpha, self.q(), self.sensors())
    }

    pub fn likelihood(&self, pred: &ModalResult) -> Result<f64> {
        match self.variant {
            LikelihoodVariant::FrequencyAndMac => likelihood_freq_mac(pred, self),
            LikelihoodVariant::PointwiseShape => likelihood_pointwise(pred, self),
        }
    }
}

impl Target for ObjectiveSpec {
    fn search_box(&self) -> &SearchBox {
        &self.prior_box
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        posterior(&ParameterVector::new(x.to_vec()), self)
    }
}

/// Modal assurance criterion `|aᵀb|² / ((aᵀa)(bᵀb))`.
pub fn mac(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidMeasurement(format!("shape lengths differ ({} vs {})", a.len(), b.len())));
    }
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let (aa, bb) = (dot(a, a), dot(b, b));
    if aa == 0.0 || bb == 0.0 {
        return Err(Error::DegenerateShape("MAC of a zero vector".into()));
    }
    let ab = dot(a, b);
    Ok((ab * ab / (aa * bb)).min(1.0))
}

/// Sum of relative absolute frequency errors.
pub fn freq_error(pred: &[f64], meas: &[f64]) -> Result<f64> {
    if pred.len() != meas.len() {
        return Err(Error::InvalidMeasurement("frequency count mismatch".into()));
    }
    if meas.contains(&0.0) {
        return Err(Error::InvalidMeasurement("zero measured frequency".into()));
    }
    Ok(pred.iter().zip(meas).map(|(p, m)| (p - m).abs() / m).sum())
}

/// Index map `measured mode → predicted mode`.
pub fn pair_modes(pred: &ModalResult, meas: &ModalMeasurement, mode: PairingMode) -> Vec<usize> {
    let q = meas.mode_count();
    match mode {
        PairingMode::Index => (0..q).collect(),
        PairingMode::MacGreedy => {
            let np = pred.mode_count();
            let mut scores = Vec::with_capacity(q * np);
            for k in 0..q {
                let mk: Vec<f64> = meas.shapes.column(k).iter().copied().collect();
                for p in 0..np {
                    let pk: Vec<f64> = pred.shapes.column(p).iter().copied().collect();
                    scores.push((mac(&pk, &mk).unwrap_or(0.0), k, p));
                }
            }
            scores.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
            let mut map = vec![usize::MAX; q];
            let mut used = vec![false; np];
            for (_, k, p) in scores {
                if map[k] == usize::MAX && !used[p] {
                    map[k] = p;
                    used[p] = true;
                }
            }
            // Unmatched measured modes (only when np < q) fall back to index.
            for (k, m) in map.iter_mut().enumerate() {
                if *m == usize::MAX {
                    *m = k.min(np.saturating_sub(1));
                }
            }
            map
        }
    }
}

fn column(m: &DMatrix<f64>, k: usize) -> Vec<f64> {
    m.column(k).iter().copied().collect()
}

/// Exponent of the combined frequency + MAC likelihood, split into the
/// frequency part and the MAC part.
fn freq_mac_exponents(pred: &ModalResult, spec: &ObjectiveSpec) -> Result<(f64, f64)> {
    let NoiseModel::PerMode(eta) = &spec.noise else {
        return Err(Error::InvalidConfig("frequency/MAC likelihood needs per-mode noise".into()));
    };
    let meas = &spec.measurement;
    let map = pair_modes(pred, meas, spec.pairing);
    let (mut ef, mut em) = (0.0, 0.0);
    for (k, &p) in map.iter().enumerate() {
        let wbar = meas.frequencies[k];
        if wbar == 0.0 {
            return Err(Error::InvalidMeasurement("zero measured frequency".into()));
        }
        let dw = (pred.frequencies[p] - wbar).abs();
        ef += dw * dw / (2.0 * (eta[k] * wbar).powi(2));
        let gamma = mac(&column(&pred.shapes, p), &column(&meas.shapes, k))?;
        em += (1.0 - gamma).powi(2) / (2.0 * eta[k] * eta[k]);
    }
    Ok((ef, em))
}

/// `Π_i exp(−[Δω_i²/(2(η_i ω̄_i)²) + (1 − γ_i)²/(2η_i²)])`.
pub fn likelihood_freq_mac(pred: &ModalResult, spec: &ObjectiveSpec) -> Result<f64> {
    if spec.variant != LikelihoodVariant::FrequencyAndMac {
        return Err(Error::InvalidConfig("objective is not the frequency/MAC variant".into()));
    }
    let (ef, em) = freq_mac_exponents(pred, spec)?;
    Ok((-(ef + em)).exp())
}

/// The two factors of [`likelihood_freq_mac`] evaluated separately:
/// (frequency likelihood, MAC likelihood).
pub fn freq_mac_factors(pred: &ModalResult, spec: &ObjectiveSpec) -> Result<(f64, f64)> {
    let NoiseModel::PerMode(eta) = &spec.noise else {
        return Err(Error::InvalidConfig("frequency/MAC likelihood needs per-mode noise".into()));
    };
    let meas = &spec.measurement;
    let map = pair_modes(pred, meas, spec.pairing);
    let mut pf = 1.0;
    let mut pm = 1.0;
    for (k, &p) in map.iter().enumerate() {
        let wbar = meas.frequencies[k];
        let dw = (pred.frequencies[p] - wbar).abs();
        pf *= (-(dw * dw) / (2.0 * (eta[k] * wbar).powi(2))).exp();
        let gamma = mac(&column(&pred.shapes, p), &column(&meas.shapes, k))?;
        pm *= (-(1.0 - gamma).powi(2) / (2.0 * eta[k] * eta[k])).exp();
    }
    Ok((pf, pm))
}

/// Entrywise `pred − meas`.
pub fn shape_delta(pred: &DMatrix<f64>, meas: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if pred.shape() != meas.shape() {
        return Err(Error::InvalidMeasurement(format!(
            "shape matrices differ: {:?} vs {:?}",
            pred.shape(),
            meas.shape()
        )));
    }
    Ok(pred - meas)
}

/// Predicted sensor shapes (paired to the measured modes) with each column
/// negated when it points away from the measured column.
pub fn aligned_shapes(pred: &ModalResult, meas: &ModalMeasurement, pairing: PairingMode) -> DMatrix<f64> {
    let map = pair_modes(pred, meas, pairing);
    let mut out = DMatrix::zeros(pred.shapes.nrows(), map.len());
    for (k, &p) in map.iter().enumerate() {
        let mut col = pred.shapes.column(p).clone_owned();
        if col.dot(&meas.shapes.column(k)) < 0.0 {
            col.neg_mut();
        }
        out.set_column(k, &col);
    }
    out
}

/// `Π_j Π_k exp(−Δψ_jk² / (2(η_jk ψ̄_jk)²))` on sign-aligned shapes.
pub fn likelihood_pointwise(pred: &ModalResult, spec: &ObjectiveSpec) -> Result<f64> {
    if spec.variant != LikelihoodVariant::PointwiseShape {
        return Err(Error::InvalidConfig("objective is not the pointwise variant".into()));
    }
    let NoiseModel::PerEntry(eta) = &spec.noise else {
        return Err(Error::InvalidConfig("pointwise likelihood needs per-entry noise".into()));
    };
    let meas = &spec.measurement.shapes;
    let delta = shape_delta(&aligned_shapes(pred, &spec.measurement, spec.pairing), meas)?;
    let mut exponent = 0.0;
    for ((d, m), e) in delta.iter().zip(meas.iter()).zip(eta.iter()) {
        if *m == 0.0 {
            return Err(Error::InvalidMeasurement("zero measured amplitude".into()));
        }
        exponent += d * d / (2.0 * (e * m).powi(2));
    }
    Ok((-exponent).exp())
}

/// Unnormalized posterior: 0 outside the prior box, the likelihood inside.
pub fn posterior(alpha: &ParameterVector, spec: &ObjectiveSpec) -> Result<f64> {
    if !spec.prior_box.contains(alpha.as_slice()) {
        return Ok(0.0);
    }
    let pred = spec.predict(alpha).map_err(|e| Error::EvaluationFailure(e.to_string()))?;
    spec.likelihood(&pred)
}
