//! Run configuration: a TOML file with one table per concern, every table optional.

use puq_core::canon::MapKind;
use puq_core::grid::{Axis, Grid};
use puq_core::scalar::parse_rational;
use puq_core::{Frame, PuParams, QuadratureSpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsConfig,
    pub quadrature: QuadratureSpec,
    pub spectrum: SpectrumConfig,
    pub grid: GridConfig,
    pub transform: TransformConfig,
    pub verify: VerifyConfig,
    pub output: OutputConfig,
}

/// Rationals are written as strings: `"2"`, `"3/2"`, `"0.25"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    pub omega1: String,
    pub omega2: String,
    pub hbar: String,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self { omega1: "2".into(), omega2: "1".into(), hbar: "1".into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub n_max: u32,
    pub m_max: u32,
    /// Tabulate `E_mk` of the equal-frequency model instead of `E_nm`.
    pub equal_frequency: bool,
    pub k_min: f64,
    pub k_max: f64,
    pub k_count: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { n_max: 3, m_max: 3, equal_frequency: false, k_min: -2.0, k_max: 2.0, k_count: 5 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridObject {
    PuWigner,
    OscWigner,
    PuPsi,
    OscPsi,
}

impl GridObject {
    pub fn axis_names(self) -> &'static [&'static str] {
        match self {
            GridObject::PuWigner => &["q", "p_q", "x", "p_x"],
            GridObject::OscWigner => &["X1", "P1", "X2", "P2"],
            GridObject::PuPsi => &["q", "x"],
            GridObject::OscPsi => &["X1", "X2"],
        }
    }

    pub fn frame(self) -> Frame {
        match self {
            GridObject::PuWigner | GridObject::PuPsi => Frame::Pu,
            GridObject::OscWigner | GridObject::OscPsi => Frame::Oscillator,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GridObject::PuWigner => "pu-wigner",
            GridObject::OscWigner => "osc-wigner",
            GridObject::PuPsi => "pu-psi",
            GridObject::OscPsi => "osc-psi",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub object: GridObject,
    pub n: u32,
    pub m: u32,
    /// One entry per axis; empty means a single sample at the origin.
    pub axes: Vec<AxisConfig>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { object: GridObject::PuWigner, n: 0, m: 0, axes: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformConfig {
    pub kind: MapKind,
}

impl Default for TransformConfig {
    fn default() -> Self {
        Self { kind: MapKind::Diagonalize }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Star-genvalue residuals are checked for all `n, m <= genvalue_level`.
    pub genvalue_level: u32,
    /// Wavefunction checks use all `n, m <= wavefunction_level`.
    pub wavefunction_level: u32,
    /// Samples per axis of the square consistency grid.
    pub triangle_points: usize,
    /// Half-width of the consistency grid.
    pub triangle_extent: f64,
    /// Negative control: shift every energy by one before the residual check.
    pub wrong_energy: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { genvalue_level: 3, wavefunction_level: 1, triangle_points: 11, triangle_extent: 3.0, wrong_energy: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<String>,
    pub format: Option<Format>,
}

fn field(name: &str, message: impl Into<String>) -> CliError {
    CliError::Config { field: name.into(), message: message.into() }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| {
            let name = e.span().map(|s| text[s].trim().to_string()).unwrap_or_default();
            field(if name.is_empty() { "<file>" } else { &name }, e.message().to_string())
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// `"omega1,omega2,hbar"`.
    pub fn override_params(&mut self, text: &str) -> Result<(), CliError> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(CliError::Usage(format!("--params expects omega1,omega2,hbar, got `{}`", text)));
        }
        self.params = ParamsConfig { omega1: parts[0].into(), omega2: parts[1].into(), hbar: parts[2].into() };
        Ok(())
    }

    pub fn params(&self) -> Result<PuParams, CliError> {
        let get = |name: &str, text: &str| parse_rational(text).map_err(|e| field(&format!("params.{}", name), e.to_string()));
        let (w1, w2, h) = (
            get("omega1", &self.params.omega1)?,
            get("omega2", &self.params.omega2)?,
            get("hbar", &self.params.hbar)?,
        );
        PuParams::new(w1, w2, h).map_err(|e| field("params", e.to_string()))
    }

    /// Checks every field a command may read, so no work starts on a bad config.
    pub fn validate(&self) -> Result<PuParams, CliError> {
        let p = self.params()?;
        let q = &self.quadrature;
        if q.order == 0 {
            return Err(field("quadrature.order", "must be at least 1"));
        }
        if q.max_order < q.order {
            return Err(field("quadrature.max_order", "must not be below quadrature.order"));
        }
        if !(q.tol > 0.0) {
            return Err(field("quadrature.tol", "must be positive"));
        }
        if !(q.radius > 0.0) {
            return Err(field("quadrature.radius", "must be positive"));
        }
        if q.box_order == 0 {
            return Err(field("quadrature.box_order", "must be at least 1"));
        }
        let s = &self.spectrum;
        if s.k_count == 0 {
            return Err(field("spectrum.k_count", "must be at least 1"));
        }
        if !(s.k_min.is_finite() && s.k_max.is_finite()) || s.k_max < s.k_min {
            return Err(field("spectrum.k_max", "must be finite and not below spectrum.k_min"));
        }
        self.grid()?;
        let v = &self.verify;
        if v.triangle_points < 2 {
            return Err(field("verify.triangle_points", "must be at least 2"));
        }
        if !(v.triangle_extent > 0.0 && v.triangle_extent.is_finite()) {
            return Err(field("verify.triangle_extent", "must be positive"));
        }
        if v.genvalue_level > 10 {
            return Err(field("verify.genvalue_level", "must not exceed 10"));
        }
        if v.wavefunction_level > 4 {
            return Err(field("verify.wavefunction_level", "must not exceed 4"));
        }
        Ok(p)
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        let names = self.grid.object.axis_names();
        if self.grid.axes.is_empty() {
            return Ok(Grid::new(names.iter().map(|n| Axis::new(*n, 0.0, 0.0, 1).expect("origin axis")).collect()));
        }
        if self.grid.axes.len() != names.len() {
            return Err(field(
                "grid.axes",
                format!("{} needs {} axes ({}), got {}", self.grid.object.name(), names.len(), names.join(", "), self.grid.axes.len()),
            ));
        }
        let axes = names
            .iter()
            .zip(&self.grid.axes)
            .enumerate()
            .map(|(i, (n, a))| Axis::new(*n, a.min, a.max, a.count).map_err(|e| field(&format!("grid.axes[{}]", i), e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Grid::new(axes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut c = RunConfig::default();
        c.grid.object = GridObject::OscPsi;
        c.grid.axes = vec![AxisConfig { min: -1.0, max: 1.0, count: 3 }; 2];
        c.output.format = Some(Format::Json);
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn errors_name_the_field() {
        let e = RunConfig::from_toml("[params]\nomega1 = \"x\"\n").unwrap().validate().unwrap_err();
        assert!(e.to_string().contains("params.omega1"), "{e}");
        let e = RunConfig::from_toml("[spectrum]\nn_maxx = 3\n").unwrap_err();
        assert!(e.to_string().contains("n_maxx"), "{e}");
        let e = RunConfig::from_toml("[grid]\nobject = \"pu-psi\"\naxes = [{min = 0.0, max = 1.0, count = 2}]\n")
            .unwrap()
            .validate()
            .unwrap_err();
        assert!(e.to_string().contains("grid.axes"), "{e}");
        let e = RunConfig::from_toml("[quadrature]\norder = 0\n").unwrap_err();
        assert!(e.to_string().contains("quadrature") || e.to_string().contains("max_order"), "{e}");
    }

    #[test]
    fn params_override() {
        let mut c = RunConfig::default();
        c.override_params("5, 3, 1/2").unwrap();
        let p = c.validate().unwrap();
        assert_eq!(p.hbar, puq_core::scalar::rat(1, 2));
        assert!(c.override_params("5,3").is_err());
        c.override_params("5,-3,1").unwrap();
        assert!(c.validate().unwrap_err().to_string().contains("params"));
    }
}
