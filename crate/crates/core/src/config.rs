//! Campaign files: one JSON document describing the model, sensors,
//! simulated truth, likelihood and campaign settings.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fe::{
    build_boundary_spring_frame, build_segmented_cantilever, build_space_truss, build_spring_chain,
    simulate_measurement, BeamSection, ModalMeasurement, SensorSelection, StructuralModel, TrussSpec,
};
use crate::objective::{LikelihoodVariant, NoiseModel, ObjectiveSpec, PairingMode};
use crate::orchestrator::CampaignConfig;
use crate::params::{ParameterVector, SearchBox};

/// Model descriptor. Sensor and fixed-dof indices refer to the
/// unconstrained numbering of the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum ModelFile {
    Chain(ChainModel),
    Frame(FrameModel),
    Cantilever(CantileverModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ChainModel {
    pub masses: Vec<f64>,
    pub springs: Vec<f64>,
    /// 1-based segment label of every spring.
    pub segment_of_spring: Vec<usize>,
    pub sensors: Vec<usize>,
    #[serde(default)]
    pub fixed_dofs: Vec<usize>,
}

/// Space truss whose listed nodes are grounded through updatable springs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct FrameModel {
    pub truss: TrussSpec,
    /// One updatable spring set per entry, in parameter order.
    pub spring_nodes: Vec<usize>,
    pub spring_stiffness: f64,
    pub sensors: Vec<usize>,
    #[serde(default)]
    pub fixed_dofs: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CantileverModel {
    pub elements: usize,
    pub segments: usize,
    pub section: BeamSection,
    pub sensors: Vec<usize>,
    #[serde(default)]
    pub fixed_dofs: Vec<usize>,
}

impl ModelFile {
    pub fn sensors(&self) -> &[usize] {
        match self {
            ModelFile::Chain(m) => &m.sensors,
            ModelFile::Frame(m) => &m.sensors,
            ModelFile::Cantilever(m) => &m.sensors,
        }
    }

    fn extra_fixed(&self) -> &[usize] {
        match self {
            ModelFile::Chain(m) => &m.fixed_dofs,
            ModelFile::Frame(m) => &m.fixed_dofs,
            ModelFile::Cantilever(m) => &m.fixed_dofs,
        }
    }

    pub fn build(&self) -> Result<StructuralModel> {
        let model = match self {
            ModelFile::Chain(c) => build_spring_chain(c.masses.len(), &c.masses, &c.springs, &c.segment_of_spring)?,
            ModelFile::Frame(f) => {
                let core = build_space_truss(&f.truss)?;
                build_boundary_spring_frame(&core, &f.spring_nodes, f.spring_stiffness)?
            }
            ModelFile::Cantilever(c) => build_segmented_cantilever(c.elements, c.segments, &c.section)?,
        };
        let extra = self.extra_fixed();
        if extra.is_empty() {
            return Ok(model);
        }
        let mut fixed = model.fixed_dofs().to_vec();
        fixed.extend_from_slice(extra);
        let rebuilt = StructuralModel::new(
            model.label(),
            model.mass().clone(),
            model.fixed_stiffness().clone(),
            model.segment_stiffness().to_vec(),
            fixed,
        )?;
        Ok(rebuilt.with_nodes(model.dofs_per_node(), model.boundary_nodes().to_vec()))
    }

    /// Maps the configured sensor dofs to the constrained numbering.
    pub fn sensor_selection(&self, model: &StructuralModel) -> Result<SensorSelection> {
        let raw = self.sensors();
        let mut idx = Vec::with_capacity(raw.len());
        for &d in raw {
            match model.free_index(d) {
                Some(i) => idx.push(i),
                None => return Err(Error::InvalidSensor(format!("sensor dof {d} is constrained or out of range"))),
            }
        }
        let sel = SensorSelection::new(idx, format!("dofs {raw:?}"));
        sel.validate(model.free_dof_count())?;
        Ok(sel)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ObjectiveConfig {
    pub variant: LikelihoodVariant,
    /// Coefficient of variation shared by every measured quantity.
    pub eta: f64,
    #[serde(default)]
    pub pairing: PairingMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CampaignFile {
    pub model: ModelFile,
    /// Parameters used to simulate the measurement.
    #[serde(default)]
    pub truth: Option<ParameterVector>,
    /// Number of measured modes.
    pub q: usize,
    #[serde(default)]
    pub noise_level: f64,
    #[serde(default)]
    pub noise_seed: u64,
    pub objective: ObjectiveConfig,
    /// Per-parameter search bounds; defaults to `[0, 1]` for every segment.
    #[serde(default)]
    pub search_box: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub campaign: CampaignConfig,
    #[serde(default)]
    pub output: Option<String>,
}

impl CampaignFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        file.validate()?;
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("campaign file serializes")
    }

    /// Structural checks that need no eigensolve.
    pub fn validate(&self) -> Result<()> {
        self.campaign.validate()?;
        if self.q == 0 {
            return Err(Error::InvalidConfig("q must be ≥ 1".into()));
        }
        if !(self.objective.eta > 0.0 && self.objective.eta.is_finite()) {
            return Err(Error::InvalidConfig("objective.eta must be > 0".into()));
        }
        if !(self.noise_level >= 0.0 && self.noise_level.is_finite()) {
            return Err(Error::InvalidConfig("noiseLevel must be ≥ 0".into()));
        }
        if let Some(b) = &self.search_box {
            SearchBox(b.clone()).validate()?;
        }
        Ok(())
    }

    pub fn search_box_for(&self, model: &StructuralModel) -> Result<SearchBox> {
        let bounds = match &self.search_box {
            Some(b) => SearchBox::new(b.clone())?,
            None => SearchBox::unit(model.segment_count()),
        };
        if bounds.dim() != model.segment_count() {
            return Err(Error::InvalidConfig(format!(
                "search box has {} dimensions, model has {} segments",
                bounds.dim(),
                model.segment_count()
            )));
        }
        Ok(bounds)
    }

    pub fn simulate(&self, model: &StructuralModel) -> Result<ModalMeasurement> {
        let truth =
            self.truth.as_ref().ok_or_else(|| Error::InvalidConfig("simulation needs a truth vector".into()))?;
        let bounds = self.search_box_for(model)?;
        if truth.len() != bounds.dim() {
            return Err(Error::InvalidConfig(format!(
                "truth has {} entries, model has {} segments",
                truth.len(),
                bounds.dim()
            )));
        }
        if !bounds.contains(truth.as_slice()) {
            return Err(Error::InvalidConfig("truth lies outside the search box".into()));
        }
        let sensors = self.model.sensor_selection(model)?;
        simulate_measurement(model, truth, &sensors, self.q, self.noise_level, self.noise_seed)
    }

    pub fn objective(&self, model: Arc<StructuralModel>, measurement: ModalMeasurement) -> Result<ObjectiveSpec> {
        if measurement.mode_count() != self.q {
            return Err(Error::InvalidMeasurement(format!(
                "measurement has {} modes, config expects {}",
                measurement.mode_count(),
                self.q
            )));
        }
        let expected = self.model.sensor_selection(&model)?;
        if measurement.sensors.dof_indices != expected.dof_indices {
            return Err(Error::InvalidMeasurement("measurement sensors differ from the configured sensors".into()));
        }
        let eta = self.objective.eta;
        let noise = match self.objective.variant {
            LikelihoodVariant::FrequencyAndMac => NoiseModel::PerMode(vec![eta; self.q]),
            LikelihoodVariant::PointwiseShape => {
                NoiseModel::PerEntry(DMatrix::from_element(measurement.sensors.len(), self.q, eta))
            }
        };
        let bounds = self.search_box_for(&model)?;
        Ok(ObjectiveSpec::new(self.objective.variant, measurement, noise, bounds, model)?
            .with_pairing(self.objective.pairing))
    }
}

/// Steel properties shared by both built-in presets.
const STEEL_E: f64 = 2.06e11;
const STEEL_DENSITY: f64 = 7850.0;

/// Geometry of the four-spring case: a stiff triangulated box frame whose
/// bottom corners (nodes 0..4) sit on springs. Node 8 is the bottom centre.
pub fn supported_frame() -> TrussSpec {
    let (hx, hy, depth) = (3.0, 2.0, 1.5);
    let mut nodes = Vec::new();
    for z in [0.0, depth] {
        for (sx, sy) in [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)] {
            nodes.push([sx * hx, sy * hy, z]);
        }
    }
    nodes.push([0.0, 0.0, 0.0]);
    nodes.push([0.0, 0.0, depth]);
    let (bottom, top, bc, tc) = (0, 4, 8, 9);
    let mut members = vec![[bc, tc]];
    for k in 0..4 {
        let k1 = (k + 1) % 4;
        members.push([bottom + k, bottom + k1]);
        members.push([top + k, top + k1]);
        members.push([bottom + k, top + k]);
        members.push([bottom + k, top + k1]);
        members.push([bc, bottom + k]);
        members.push([tc, top + k]);
        members.push([bc, top + k]);
        members.push([tc, bottom + k]);
    }
    let area = 0.0168;
    TrussSpec {
        nodes,
        members,
        axial_rigidity: STEEL_E * area,
        mass_per_length: STEEL_DENSITY * area,
        fixed_nodes: Vec::new(),
        boundary_nodes: vec![0, 1, 2, 3],
    }
}

/// Four-parameter boundary-spring case with frequency and MAC evidence.
pub fn dome_analog() -> CampaignFile {
    let z = |node: usize| 3 * node + 2;
    CampaignFile {
        model: ModelFile::Frame(FrameModel {
            truss: supported_frame(),
            spring_nodes: vec![0, 1, 2, 3],
            spring_stiffness: 2.0e7,
            sensors: vec![z(4), z(5), z(6), z(7)],
            fixed_dofs: vec![3 * 8, 3 * 8 + 1],
        }),
        truth: Some(ParameterVector::new(vec![0.7, 0.6, 0.1, 0.9])),
        q: 2,
        noise_level: 0.0,
        noise_seed: 0,
        objective: ObjectiveConfig {
            variant: LikelihoodVariant::FrequencyAndMac,
            eta: 0.08,
            pairing: PairingMode::Index,
        },
        search_box: None,
        campaign: CampaignConfig::default(),
        output: None,
    }
}

/// Eight-segment cantilever strip standing in for a plate clamped on one
/// side; four deflection sensors spread uniformly along the span.
pub fn plate_analog() -> CampaignFile {
    let (width, thickness): (f64, f64) = (0.4, 0.005);
    let section = BeamSection {
        youngs_modulus: STEEL_E,
        second_moment: width * thickness.powi(3) / 12.0,
        density: STEEL_DENSITY,
        area: width * thickness,
        length: 0.4,
    };
    // Node k has deflection dof 2k; nodes 4, 8, 12, 16 of 16 elements.
    let sensors = vec![8, 16, 24, 32];
    CampaignFile {
        model: ModelFile::Cantilever(CantileverModel {
            elements: 16,
            segments: 8,
            section,
            sensors,
            fixed_dofs: Vec::new(),
        }),
        truth: Some(ParameterVector::new(vec![0.2, 0.5, 0.6, 0.1, 0.6, 0.3, 0.2, 0.7])),
        q: 2,
        noise_level: 0.0,
        noise_seed: 0,
        objective: ObjectiveConfig {
            variant: LikelihoodVariant::PointwiseShape,
            eta: 0.1,
            pairing: PairingMode::Index,
        },
        search_box: None,
        campaign: CampaignConfig { max_steps: 3000, seed_distance: 0.35, bins: Some(10), ..CampaignConfig::default() },
        output: None,
    }
}

pub fn preset(name: &str) -> Option<CampaignFile> {
    match name {
        "dome_analog" | "dome-analog" => Some(dome_analog()),
        "plate_analog" | "plate-analog" => Some(plate_analog()),
        _ => None,
    }
}
