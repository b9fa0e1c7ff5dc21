//! Built-in structural models.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::StructuralModel;
use crate::error::{Error, Result};

fn positive(values: &[f64], what: &str) -> Result<()> {
    match values.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
        Some(i) => Err(Error::InvalidModel(format!("{what}[{i}] = {} must be positive", values[i]))),
        None => Ok(()),
    }
}

/// Fixed-free lumped chain. Spring `i` links mass `i − 1` to mass `i`,
/// spring 0 links mass 0 to ground. `segment_of_spring` is 1-based.
pub fn build_spring_chain(
    n_dof: usize,
    masses: &[f64],
    springs: &[f64],
    segment_of_spring: &[usize],
) -> Result<StructuralModel> {
    if n_dof < 2 {
        return Err(Error::InvalidModel("a chain needs at least 2 dofs".into()));
    }
    if masses.len() != n_dof || springs.len() != n_dof || segment_of_spring.len() != n_dof {
        return Err(Error::InvalidModel(format!(
            "chain with {n_dof} dofs needs {n_dof} masses, springs and segment labels"
        )));
    }
    positive(masses, "masses")?;
    positive(springs, "springs")?;
    if segment_of_spring.contains(&0) {
        return Err(Error::InvalidModel("segment labels are 1-based".into()));
    }
    let n_seg = *segment_of_spring.iter().max().unwrap_or(&0);
    let mut segments = vec![DMatrix::zeros(n_dof, n_dof); n_seg];
    for (i, (&k, &seg)) in springs.iter().zip(segment_of_spring).enumerate() {
        let ks = &mut segments[seg - 1];
        ks[(i, i)] += k;
        if i > 0 {
            ks[(i - 1, i - 1)] += k;
            ks[(i - 1, i)] -= k;
            ks[(i, i - 1)] -= k;
        }
    }
    let mass = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(masses));
    StructuralModel::new(
        format!("spring chain ({n_dof} dofs, {n_seg} segments)"),
        mass,
        DMatrix::zeros(n_dof, n_dof),
        segments,
        vec![],
    )
}

/// Pin-jointed space truss with lumped masses and three translational
/// dofs per node. All member stiffness is non-updatable; updatable
/// segments come from [`build_boundary_spring_frame`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TrussSpec {
    pub nodes: Vec<[f64; 3]>,
    pub members: Vec<[usize; 2]>,
    /// Axial rigidity `EA` shared by all members.
    pub axial_rigidity: f64,
    /// Mass per unit length `ρA`; half of each member is lumped at each end.
    pub mass_per_length: f64,
    #[serde(default)]
    pub fixed_nodes: Vec<usize>,
    /// Nodes eligible for boundary springs.
    #[serde(default)]
    pub boundary_nodes: Vec<usize>,
}

pub fn build_space_truss(spec: &TrussSpec) -> Result<StructuralModel> {
    let nn = spec.nodes.len();
    if nn < 2 || spec.members.is_empty() {
        return Err(Error::InvalidModel("truss needs at least two nodes and one member".into()));
    }
    positive(&[spec.axial_rigidity, spec.mass_per_length], "truss properties")?;
    let n = 3 * nn;
    let mut k = DMatrix::zeros(n, n);
    let mut lumped = vec![0.0; nn];
    for (e, &[a, b]) in spec.members.iter().enumerate() {
        if a >= nn || b >= nn || a == b {
            return Err(Error::InvalidModel(format!("member {e} has invalid ends ({a}, {b})")));
        }
        let d: Vec<f64> = (0..3).map(|c| spec.nodes[b][c] - spec.nodes[a][c]).collect();
        let len = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len <= 0.0 {
            return Err(Error::InvalidModel(format!("member {e} has zero length")));
        }
        let ke = spec.axial_rigidity / len;
        for r in 0..3 {
            for c in 0..3 {
                let v = ke * d[r] * d[c] / (len * len);
                k[(3 * a + r, 3 * a + c)] += v;
                k[(3 * b + r, 3 * b + c)] += v;
                k[(3 * a + r, 3 * b + c)] -= v;
                k[(3 * b + r, 3 * a + c)] -= v;
            }
        }
        lumped[a] += 0.5 * spec.mass_per_length * len;
        lumped[b] += 0.5 * spec.mass_per_length * len;
    }
    if let Some(i) = lumped.iter().position(|m| *m <= 0.0) {
        return Err(Error::InvalidModel(format!("node {i} is not attached to any member")));
    }
    let mass = DMatrix::from_fn(n, n, |r, c| if r == c { lumped[r / 3] } else { 0.0 });
    let mut fixed = Vec::new();
    for &node in &spec.fixed_nodes {
        if node >= nn {
            return Err(Error::InvalidModel(format!("fixed node {node} out of range")));
        }
        fixed.extend(3 * node..3 * node + 3);
    }
    if let Some(&b) = spec.boundary_nodes.iter().find(|&&b| b >= nn || spec.fixed_nodes.contains(&b)) {
        return Err(Error::InvalidModel(format!("boundary node {b} is out of range or fixed")));
    }
    // The truss has no updatable part on its own; a zero segment keeps the
    // model well-formed until boundary springs are attached.
    let model = StructuralModel::new(
        format!("space truss ({nn} nodes, {} members)", spec.members.len()),
        mass,
        k,
        vec![DMatrix::zeros(n, n)],
        fixed,
    )?;
    Ok(model.with_nodes(3, spec.boundary_nodes.clone()))
}

/// Grounds each listed boundary node through one spring per nodal
/// direction. Segment `i` holds exactly the springs of `boundary_nodes[i]`;
/// any segments of the core model become non-updatable stiffness.
pub fn build_boundary_spring_frame(
    core: &StructuralModel,
    boundary_nodes: &[usize],
    nominal_spring_stiffness: f64,
) -> Result<StructuralModel> {
    positive(&[nominal_spring_stiffness], "nominal spring stiffness")?;
    if boundary_nodes.is_empty() {
        return Err(Error::InvalidModel("no boundary nodes given".into()));
    }
    let n = core.dof_count();
    let per = core.dofs_per_node();
    let mut segments = Vec::with_capacity(boundary_nodes.len());
    for (i, &node) in boundary_nodes.iter().enumerate() {
        if !core.boundary_nodes().contains(&node) {
            return Err(Error::InvalidModel(format!("node {node} is not in the boundary set")));
        }
        if boundary_nodes[..i].contains(&node) {
            return Err(Error::InvalidModel(format!("boundary node {node} listed twice")));
        }
        let mut ks = DMatrix::zeros(n, n);
        for d in per * node..per * node + per {
            ks[(d, d)] = nominal_spring_stiffness;
        }
        segments.push(ks);
    }
    let fixed = core.nominal_stiffness();
    let model = StructuralModel::new(
        format!("{} + {} boundary spring sets", core.label(), boundary_nodes.len()),
        core.mass().clone(),
        fixed,
        segments,
        core.fixed_dofs().to_vec(),
    )?;
    Ok(model.with_nodes(per, core.boundary_nodes().to_vec()))
}

/// Uniform Euler-Bernoulli beam section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct BeamSection {
    pub youngs_modulus: f64,
    pub second_moment: f64,
    pub density: f64,
    pub area: f64,
    pub length: f64,
}

impl BeamSection {
    fn validate(&self) -> Result<()> {
        positive(&[self.youngs_modulus, self.second_moment, self.density, self.area, self.length], "section properties")
    }
}

/// Cantilever clamped at `x = 0`, Hermite elements with consistent mass.
/// Node `k` owns dofs `2k` (deflection) and `2k + 1` (rotation); node 0 is
/// constrained, so post-constraint deflection of node `k ≥ 1` is `2(k − 1)`.
pub fn build_segmented_cantilever(n_elems: usize, n_segments: usize, section: &BeamSection) -> Result<StructuralModel> {
    section.validate()?;
    if n_elems == 0 || n_segments == 0 || !n_elems.is_multiple_of(n_segments) {
        return Err(Error::InvalidModel(format!(
            "{n_elems} elements cannot be split into {n_segments} equal segments"
        )));
    }
    let per_seg = n_elems / n_segments;
    let n = 2 * (n_elems + 1);
    let le = section.length / n_elems as f64;
    let ei = section.youngs_modulus * section.second_moment;
    let c = ei / le.powi(3);
    let ke = [
        [12.0, 6.0 * le, -12.0, 6.0 * le],
        [6.0 * le, 4.0 * le * le, -6.0 * le, 2.0 * le * le],
        [-12.0, -6.0 * le, 12.0, -6.0 * le],
        [6.0 * le, 2.0 * le * le, -6.0 * le, 4.0 * le * le],
    ];
    let cm = section.density * section.area * le / 420.0;
    let me = [
        [156.0, 22.0 * le, 54.0, -13.0 * le],
        [22.0 * le, 4.0 * le * le, 13.0 * le, -3.0 * le * le],
        [54.0, 13.0 * le, 156.0, -22.0 * le],
        [-13.0 * le, -3.0 * le * le, -22.0 * le, 4.0 * le * le],
    ];
    let mut mass = DMatrix::zeros(n, n);
    let mut segments = vec![DMatrix::zeros(n, n); n_segments];
    for e in 0..n_elems {
        let ks = &mut segments[e / per_seg];
        for r in 0..4 {
            for s in 0..4 {
                ks[(2 * e + r, 2 * e + s)] += c * ke[r][s];
                mass[(2 * e + r, 2 * e + s)] += cm * me[r][s];
            }
        }
    }
    let model = StructuralModel::new(
        format!("cantilever ({n_elems} elements, {n_segments} segments)"),
        mass,
        DMatrix::zeros(n, n),
        segments,
        vec![0, 1],
    )?;
    Ok(model.with_nodes(2, Vec::new()))
}

/// First bending frequency of a continuous uniform cantilever, in Hz.
pub fn cantilever_fundamental_hz(section: &BeamSection) -> f64 {
    const BETA1_L: f64 = 1.875_104_068_711_961;
    let ei = section.youngs_modulus * section.second_moment;
    let rho_a = section.density * section.area;
    BETA1_L * BETA1_L / (2.0 * std::f64::consts::PI) * (ei / (rho_a * section.length.powi(4))).sqrt()
}
