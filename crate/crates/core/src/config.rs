//! Declarative run configurations in TOML and the named experiment presets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{CouplingWeight, CESIUM_D2_WAVELENGTH, CESIUM_GAMMA_PERP};
use crate::bandstructure::BandOptions;
use crate::fdtd::{Parity, DEFAULT_COURANT};
use crate::geometry::{apply_defects, build_lattice, Axis, DefectSpec, PhotonicCrystalSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    /// TOML syntax or schema error; the message carries the line and column.
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("unknown sweep parameter `{0}`; expected one of p, r_def_over_a, r_over_a, d_over_a, num_layers, n_defect")]
    UnknownParameter(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureConfig {
    pub crystal: PhotonicCrystalSpec,
    #[serde(default)]
    pub defects: Vec<DefectSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    /// Time step in units of the cell transit time.
    pub courant: f64,
    pub absorber_cells: usize,
    /// Unpatterned slab between the outermost hole edge and the absorber, in units of a.
    pub padding_over_a: f64,
    /// Air kept beyond the top flux monitor, in cells.
    pub air_margin_cells: f64,
    /// Sub-samples per axis when rasterizing hole edges.
    pub subsamples: usize,
    /// Length of the broadband discovery run, in periods of the window centre.
    pub discovery_periods: f64,
    /// Spectral standard deviation of the narrowband re-excitation, relative to f₀.
    pub source_bandwidth: f64,
    /// Periods between source turn-off and the start of measurement.
    pub settle_periods: f64,
    /// Periods over which energy and flux are averaged (at least 10).
    pub measure_periods: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            courant: DEFAULT_COURANT,
            absorber_cells: 12,
            padding_over_a: 0.5,
            air_margin_cells: 4.0,
            subsamples: 4,
            discovery_periods: 60.0,
            source_bandwidth: 0.04,
            settle_periods: 10.0,
            measure_periods: 12.0,
        }
    }
}

/// Mirror symmetry of the cavity mode to be studied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSymmetry {
    /// `E_x` even and `E_y` odd across both in-plane mirrors.
    XDipole,
    /// `E_y` even and `E_x` odd across both in-plane mirrors.
    YDipole,
}

impl ModeSymmetry {
    /// Tangential-E parity across the x and y mirror planes.
    pub fn parities(self) -> [Parity; 2] {
        match self {
            ModeSymmetry::XDipole => [Parity::Odd, Parity::Even],
            ModeSymmetry::YDipole => [Parity::Even, Parity::Odd],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AtomSite {
    /// Centre of the cavity's designated central hole, at the slab mid-plane.
    CentralHole,
    /// A point in units of a, relative to the cavity centre.
    Point { x_over_a: f64, y_over_a: f64, z_over_a: f64 },
}

/// Which quality factor sets the cavity decay rate in the coupling figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QChoice {
    Perp,
    Total,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSettings {
    pub mode: ModeSymmetry,
    /// Search window `[lo, hi]` in a/λ.
    pub window_a_over_lambda: [f64; 2],
    /// Pick the resonance nearest this a/λ instead of the longest-lived one.
    pub target_a_over_lambda: Option<f64>,
    pub atom: AtomSite,
    pub gamma_perp_rad_per_s: f64,
    pub lambda_design_m: f64,
    pub coupling_weight: CouplingWeight,
    pub q_for_coupling: QChoice,
    pub farfield: bool,
    /// Gap between the slab surface and the near-field plane, in cells.
    pub farfield_gap_cells: f64,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        AnalysisSettings {
            mode: ModeSymmetry::XDipole,
            window_a_over_lambda: [0.25, 0.33],
            target_a_over_lambda: None,
            atom: AtomSite::CentralHole,
            gamma_perp_rad_per_s: CESIUM_GAMMA_PERP,
            lambda_design_m: CESIUM_D2_WAVELENGTH,
            coupling_weight: CouplingWeight::Epsilon,
            q_for_coupling: QChoice::Perp,
            farfield: true,
            farfield_gap_cells: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SliceAxis {
    X,
    Y,
    Z,
}

impl SliceAxis {
    pub fn index(self) -> usize {
        match self {
            SliceAxis::X => 0,
            SliceAxis::Y => 1,
            SliceAxis::Z => 2,
        }
    }
}

/// A plane of `ε|E|²` to dump, at a structure coordinate in cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceSpec {
    pub axis: SliceAxis,
    pub position_cells: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSettings {
    pub report: bool,
    pub pattern: bool,
    pub checkpoint: bool,
    pub slices: Vec<SliceSpec>,
}

impl Default for OutputSettings {
    fn default() -> Self {
        OutputSettings {
            report: true,
            pattern: false,
            checkpoint: false,
            slices: Vec::new(),
        }
    }
}

/// Parameter scan attached to a configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub structure: StructureConfig,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub analysis: AnalysisSettings,
    #[serde(default)]
    pub outputs: OutputSettings,
    #[serde(default)]
    pub bands: BandOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        let spec = &self.structure.crystal;
        let holes = build_lattice(spec).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        apply_defects(&holes, &self.structure.defects, spec)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        // TOML integers are signed 64-bit
        if self.seed > i64::MAX as u64 || self.bands.seed > i64::MAX as u64 {
            return bad(format!("seed must be at most {}, got {}", i64::MAX, self.seed.max(self.bands.seed)));
        }
        let s = &self.solver;
        if !(s.courant > 0.0 && s.courant < 1.0 / 3f64.sqrt()) {
            return bad(format!("courant must satisfy 0 < courant < 1/sqrt(3), got {}", s.courant));
        }
        if s.absorber_cells < 4 {
            return bad(format!("absorber_cells must be at least 4, got {}", s.absorber_cells));
        }
        if !(s.padding_over_a >= 0.0) || !(s.air_margin_cells >= 0.0) {
            return bad("padding_over_a and air_margin_cells must be non-negative".into());
        }
        if s.subsamples == 0 {
            return bad("subsamples must be at least 1".into());
        }
        if !(s.discovery_periods > 0.0) || !(s.settle_periods >= 0.0) {
            return bad("discovery_periods must be positive and settle_periods non-negative".into());
        }
        if !(s.measure_periods >= 10.0) {
            return bad(format!(
                "measure_periods must be at least 10 optical cycles, got {}",
                s.measure_periods
            ));
        }
        if !(s.source_bandwidth > 0.0 && s.source_bandwidth < 0.5) {
            return bad(format!(
                "source_bandwidth must satisfy 0 < source_bandwidth < 0.5, got {}",
                s.source_bandwidth
            ));
        }
        let an = &self.analysis;
        let [lo, hi] = an.window_a_over_lambda;
        if !(lo > 0.0 && lo < hi && hi < 1.0) {
            return bad(format!("window_a_over_lambda must satisfy 0 < lo < hi < 1, got [{lo}, {hi}]"));
        }
        if let Some(t) = an.target_a_over_lambda {
            if !(lo..=hi).contains(&t) {
                return bad(format!("target_a_over_lambda {t} is outside the window [{lo}, {hi}]"));
            }
        }
        if !(an.gamma_perp_rad_per_s > 0.0) || !(an.lambda_design_m > 0.0) {
            return bad("gamma_perp_rad_per_s and lambda_design_m must be positive".into());
        }
        if !(an.farfield_gap_cells >= 0.0) {
            return bad("farfield_gap_cells must be non-negative".into());
        }
        if let Some(sw) = &self.sweep {
            parameter_of(&sw.parameter)?;
        }
        Ok(())
    }

    /// Elongation of the first dislocation-type defect, in cells.
    pub fn elongation(&self) -> f64 {
        self.structure
            .defects
            .iter()
            .find_map(|d| match *d {
                DefectSpec::FractionalEdgeDislocation { p, .. } | DefectSpec::CoupledDefects { p, .. } => Some(p),
                _ => None,
            })
            .unwrap_or(0.0)
    }

    /// Same structure on a grid with `a` cells per lattice constant.
    /// Elongations are lengths in cells and scale with the grid.
    pub fn at_resolution(&self, a: usize) -> Self {
        let mut out = self.clone();
        let f = a as f64 / self.structure.crystal.a as f64;
        out.structure.crystal.a = a;
        for d in &mut out.structure.defects {
            match d {
                DefectSpec::FractionalEdgeDislocation { p, .. } | DefectSpec::CoupledDefects { p, .. } => *p *= f,
                _ => {}
            }
        }
        out
    }

    /// Copy with one sweep parameter set. `p` is in cells at the current
    /// resolution; `num_layers` must be a whole number.
    pub fn with_parameter(&self, name: &str, value: f64) -> Result<Self, ConfigError> {
        let param = parameter_of(name)?;
        let mut out = self.clone();
        let mut touched = false;
        let crystal = &mut out.structure.crystal;
        match param {
            SweepParameter::ROverA => {
                crystal.r_over_a = value;
                touched = true;
            }
            SweepParameter::DOverA => {
                crystal.d_over_a = value;
                touched = true;
            }
            SweepParameter::NumLayers => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(ConfigError::Invalid(format!(
                        "num_layers must be a positive whole number, got {value}"
                    )));
                }
                crystal.num_layers = value as usize;
                touched = true;
            }
            _ => {}
        }
        for d in &mut out.structure.defects {
            match (param, d) {
                (SweepParameter::P, DefectSpec::FractionalEdgeDislocation { p, .. })
                | (SweepParameter::P, DefectSpec::CoupledDefects { p, .. }) => {
                    *p = value;
                    touched = true;
                }
                (SweepParameter::RDefOverA, DefectSpec::RadiusChange { r_def_over_a })
                | (SweepParameter::RDefOverA, DefectSpec::CoupledDefects { r_def_over_a, .. }) => {
                    *r_def_over_a = value;
                    touched = true;
                }
                (SweepParameter::NDefect, DefectSpec::IndexChange { n_defect }) => {
                    *n_defect = value;
                    touched = true;
                }
                _ => {}
            }
        }
        if !touched {
            return Err(ConfigError::Invalid(format!(
                "parameter `{name}` does not apply to any defect of this structure"
            )));
        }
        out.sweep = None;
        out.validate()?;
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SweepParameter {
    P,
    RDefOverA,
    ROverA,
    DOverA,
    NumLayers,
    NDefect,
}

fn parameter_of(name: &str) -> Result<SweepParameter, ConfigError> {
    Ok(match name {
        "p" => SweepParameter::P,
        "r_def_over_a" => SweepParameter::RDefOverA,
        "r_over_a" => SweepParameter::ROverA,
        "d_over_a" => SweepParameter::DOverA,
        "num_layers" => SweepParameter::NumLayers,
        "n_defect" => SweepParameter::NDefect,
        other => return Err(ConfigError::UnknownParameter(other.to_string())),
    })
}

/// Names of the shipped presets with a one-line description each.
pub const PRESETS: &[(&str, &str)] = &[
    ("dislocation-sweep", "index-filled defect (n = 2.4) with x dislocation, p swept 0..3, x-dipole"),
    ("layer-sweep", "index-filled defect at p = 3 with the number of layers swept"),
    ("table1-row1", "reduced hole, r/a 0.275, r_def/a 0.15, d/a 0.75"),
    ("table1-row2", "reduced hole, r/a 0.275, r_def/a 0.2, d/a 0.75"),
    ("table1-row3", "reduced hole, r/a 0.25, r_def/a 0.15, d/a 0.75"),
    ("table1-row4", "reduced hole, r/a 0.25, r_def/a 0.2, d/a 0.75"),
    ("single-defect-dislocation", "reduced hole with x dislocation p = 2, x-dipole, atom in the central hole"),
    ("four-hole", "four-hole tuned defect, y-dipole, y-axis holes elongated by p = 2"),
    ("four-hole-sweep", "four-hole tuned defect with p swept 0..3"),
    ("coupled-x", "two defects along x, elongated columns p = 2, y-dipole, atom in the central hole"),
    ("coupled-y", "two defects along y, elongated rows p = 2, x-dipole, atom in the central hole"),
    ("farfield-comparison", "dislocation sweep p = 0..4 with far-field Q"),
    ("bands", "TE-like band diagram, r/a 0.275, d/a 0.75"),
    ("bands-unpatterned", "unpatterned slab band diagram (no gap)"),
];

fn crystal(a: usize, r_over_a: f64, d_over_a: f64) -> PhotonicCrystalSpec {
    PhotonicCrystalSpec {
        a,
        r_over_a,
        d_over_a,
        n_slab: 3.4,
        num_layers: 5,
    }
}

fn base(name: &str, crystal: PhotonicCrystalSpec, defects: Vec<DefectSpec>) -> RunConfig {
    RunConfig {
        name: name.to_string(),
        seed: 1,
        structure: StructureConfig { crystal, defects },
        solver: SolverSettings::default(),
        analysis: AnalysisSettings::default(),
        outputs: OutputSettings::default(),
        bands: BandOptions::default(),
        sweep: None,
    }
}

fn table1(name: &str, r: f64, r_def: f64) -> RunConfig {
    base(name, crystal(20, r, 0.75), vec![DefectSpec::RadiusChange { r_def_over_a: r_def }])
}

fn dislocated_index_defect(name: &str, p: f64) -> RunConfig {
    base(
        name,
        crystal(15, 0.3, 0.6),
        vec![
            DefectSpec::IndexChange { n_defect: 2.4 },
            DefectSpec::FractionalEdgeDislocation { axis: Axis::X, p },
        ],
    )
}

fn four_hole(name: &str, p: f64) -> RunConfig {
    let mut c = base(
        name,
        crystal(20, 0.275, 0.75),
        vec![
            DefectSpec::FourHoleTuning {
                r2_over_a: 0.2,
                r1_over_a: 0.225,
            },
            DefectSpec::FractionalEdgeDislocation { axis: Axis::Y, p },
        ],
    );
    c.analysis.mode = ModeSymmetry::YDipole;
    c
}

fn coupled(name: &str, orientation: Axis) -> RunConfig {
    let mut c = base(
        name,
        crystal(20, 0.275, 0.75),
        vec![DefectSpec::CoupledDefects {
            orientation,
            r_def_over_a: 0.2,
            p: 2.0,
        }],
    );
    // the constructively coupled state with field in the central hole is
    // the dipole perpendicular to the defect pair's elongation direction
    c.analysis.mode = match orientation {
        Axis::X => ModeSymmetry::YDipole,
        Axis::Y => ModeSymmetry::XDipole,
    };
    c
}

/// Looks up a preset by name. Lattice constants are those of the original
/// designs; use [`RunConfig::at_resolution`] for coarser grids.
pub fn preset(name: &str) -> Result<RunConfig, ConfigError> {
    let cfg = match name {
        "dislocation-sweep" => {
            let mut c = dislocated_index_defect(name, 0.0);
            c.sweep = Some(SweepSpec {
                parameter: "p".into(),
                values: vec![0.0, 1.0, 2.0, 3.0],
            });
            c
        }
        "layer-sweep" => {
            let mut c = dislocated_index_defect(name, 3.0);
            c.analysis.farfield = false;
            c.sweep = Some(SweepSpec {
                parameter: "num_layers".into(),
                values: vec![3.0, 4.0, 5.0, 6.0, 7.0],
            });
            c
        }
        "table1-row1" => table1(name, 0.275, 0.15),
        "table1-row2" => table1(name, 0.275, 0.2),
        "table1-row3" => table1(name, 0.25, 0.15),
        "table1-row4" => table1(name, 0.25, 0.2),
        "single-defect-dislocation" => {
            let mut c = table1(name, 0.275, 0.2);
            c.structure.defects.push(DefectSpec::FractionalEdgeDislocation { axis: Axis::X, p: 2.0 });
            c
        }
        "four-hole" => four_hole(name, 2.0),
        "four-hole-sweep" => {
            let mut c = four_hole(name, 0.0);
            c.sweep = Some(SweepSpec {
                parameter: "p".into(),
                values: vec![0.0, 1.0, 2.0, 3.0],
            });
            c
        }
        "coupled-x" => coupled(name, Axis::X),
        "coupled-y" => coupled(name, Axis::Y),
        "farfield-comparison" => {
            let mut c = dislocated_index_defect(name, 0.0);
            c.outputs.pattern = true;
            c.sweep = Some(SweepSpec {
                parameter: "p".into(),
                values: vec![0.0, 1.0, 2.0, 3.0, 4.0],
            });
            c
        }
        "bands" => {
            let mut c = base(name, crystal(22, 0.275, 0.75), Vec::new());
            c.structure.crystal.num_layers = 1;
            c
        }
        "bands-unpatterned" => {
            let mut c = base(name, crystal(22, 0.275, 0.5), Vec::new());
            c.structure.crystal.num_layers = 1;
            c.bands.unpatterned = true;
            c
        }
        other => return Err(ConfigError::UnknownPreset(other.to_string())),
    };
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_is_valid_and_round_trips() {
        for (name, _) in PRESETS {
            let c = preset(name).unwrap();
            let text = c.to_toml();
            let back = RunConfig::from_toml(&text).unwrap();
            assert_eq!(back, c, "{name}");
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::from_toml(
            "name = \"m\"\n[structure.crystal]\na = 12\nr_over_a = 0.3\nd_over_a = 0.6\nn_slab = 3.4\nnum_layers = 3\n",
        )
        .unwrap();
        assert_eq!(c.solver, SolverSettings::default());
        assert!(c.structure.defects.is_empty());
    }

    #[test]
    fn parse_errors_report_the_line() {
        let e = RunConfig::from_toml("name = \"m\"\n[structure.crystal]\na = \"twelve\"\n").unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
    }

    #[test]
    fn oversized_defect_hole_is_rejected_by_name() {
        let mut c = preset("table1-row2").unwrap();
        c.structure.defects = vec![DefectSpec::RadiusChange { r_def_over_a: 0.3 }];
        let e = c.validate().unwrap_err().to_string();
        assert!(e.contains("r_def_over_a <= r_over_a"), "{e}");
    }

    #[test]
    fn resolution_change_scales_elongation() {
        let c = preset("dislocation-sweep").unwrap().with_parameter("p", 3.0).unwrap();
        let r = c.at_resolution(12);
        assert_eq!(r.structure.crystal.a, 12);
        assert!((r.elongation() - 2.4).abs() < 1e-12);
    }

    #[test]
    fn sweep_parameters_apply_or_fail() {
        let c = preset("table1-row2").unwrap();
        assert!(c.with_parameter("p", 1.0).is_err());
        assert!(matches!(c.with_parameter("q", 1.0), Err(ConfigError::UnknownParameter(_))));
        let d = c.with_parameter("r_def_over_a", 0.1).unwrap();
        assert_eq!(d.structure.defects[0], DefectSpec::RadiusChange { r_def_over_a: 0.1 });
        assert!(c.with_parameter("num_layers", 2.5).is_err());
        assert_eq!(c.with_parameter("num_layers", 4.0).unwrap().structure.crystal.num_layers, 4);
    }
}
