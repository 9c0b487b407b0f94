//! Run configuration: JSON text with defaults applied and every field validated.

use std::path::PathBuf;

use serde_json::{json, Map, Value};

use crate::data::{Blob, InitialData};
use crate::error::{Error, Result};
use crate::macroscale::{BoundaryCondition, ScalingRegime};
use crate::mesh::UnitCellGeometry;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Cell,
    Macro,
    Micro,
    Converge,
    Check,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Cell => "cell",
            Command::Macro => "macro",
            Command::Micro => "micro",
            Command::Converge => "converge",
            Command::Check => "check",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "cell" => Command::Cell,
            "macro" => Command::Macro,
            "micro" => Command::Micro,
            "converge" => Command::Converge,
            "check" => Command::Check,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Discretization {
    /// Mesh size: macroscopic mesh (`macro`), pore-scale mesh (`micro`), cell mesh (`cell`).
    pub h: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Period of the pore-scale run.
    pub eps: f64,
    /// ε values of a convergence study, strictly decreasing.
    pub eps_list: Vec<f64>,
    /// Pore-scale mesh size in cell units for studies.
    pub cell_h: f64,
    pub macro_h: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub csv: bool,
    pub vtk: bool,
    pub snapshot_stride: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub geometry: UnitCellGeometry,
    pub regime: ScalingRegime,
    pub discretization: Discretization,
    pub initial: InitialData,
    /// Shift the initial charge to satisfy the Neumann compatibility condition.
    pub balance_charge: bool,
    pub output: OutputConfig,
    pub lambda: f64,
    pub upwind: bool,
    pub exact_stokes: bool,
    /// Coefficients file to use instead of solving the cell problems (`macro`).
    pub coefficients: Option<PathBuf>,
    /// Diagnostics file to check (`check`).
    pub diagnostics: Option<PathBuf>,
}

struct Obj<'a> {
    path: String,
    map: &'a Map<String, Value>,
}

impl<'a> Obj<'a> {
    fn new(path: &str, value: &'a Value) -> Result<Self> {
        let map = value
            .as_object()
            .ok_or_else(|| Error::validation(path, "expected an object"))?;
        Ok(Self { path: path.into(), map })
    }

    fn field(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.into()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn only(&self, keys: &[&str]) -> Result<()> {
        match self.map.keys().find(|k| !keys.contains(&k.as_str())) {
            Some(k) => Err(Error::validation(self.field(k), "unknown field")),
            None => Ok(()),
        }
    }

    fn child(&self, key: &str) -> Result<Option<Obj<'a>>> {
        self.map.get(key).map(|v| Obj::new(&self.field(key), v)).transpose()
    }

    fn num(&self, key: &str) -> Result<Option<f64>> {
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => match v.as_f64() {
                Some(x) if x.is_finite() => Ok(Some(x)),
                _ => Err(Error::validation(self.field(key), format!("expected a finite number, got {v}"))),
            },
        }
    }

    fn positive(&self, key: &str) -> Result<Option<f64>> {
        match self.num(key)? {
            Some(x) if x <= 0.0 => Err(Error::validation(self.field(key), format!("must be positive, got {x}"))),
            other => Ok(other),
        }
    }

    fn string(&self, key: &str) -> Result<Option<&'a str>> {
        match self.map.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(v) => Err(Error::validation(self.field(key), format!("expected a string, got {v}"))),
        }
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>> {
        match self.map.get(key) {
            None => Ok(None),
            Some(Value::Bool(b)) => Ok(Some(*b)),
            Some(v) => Err(Error::validation(self.field(key), format!("expected true or false, got {v}"))),
        }
    }

    fn point(&self, key: &str) -> Result<Option<[f64; 2]>> {
        match self.map.get(key) {
            None => Ok(None),
            Some(Value::Array(a)) if a.len() == 2 => {
                let x = a[0].as_f64().zip(a[1].as_f64()).filter(|(x, y)| x.is_finite() && y.is_finite());
                x.map(|(x, y)| Some([x, y]))
                    .ok_or_else(|| Error::validation(self.field(key), "expected two finite numbers"))
            }
            Some(_) => Err(Error::validation(self.field(key), "expected [x, y]")),
        }
    }
}

fn parse_geometry(obj: Option<Obj<'_>>) -> Result<UnitCellGeometry> {
    let default_h = 0.025;
    let Some(g) = obj else {
        return Ok(UnitCellGeometry::centered_disk(0.25, default_h));
    };
    g.only(&["inclusion", "radius", "center", "cell_h"])?;
    let h = g.positive("cell_h")?.unwrap_or(default_h);
    let geom = match g.string("inclusion")?.unwrap_or("disk") {
        "disk" => UnitCellGeometry::disk(
            g.point("center")?.unwrap_or([0.5, 0.5]),
            g.positive("radius")?.unwrap_or(0.25),
            h,
        ),
        "none" => UnitCellGeometry::empty(h),
        other => return Err(Error::validation(g.field("inclusion"), format!("expected \"disk\" or \"none\", got {other:?}"))),
    };
    geom.validate().map_err(|e| Error::validation(g.field("radius"), e.to_string()))?;
    Ok(geom)
}

fn parse_regime(obj: Option<Obj<'_>>) -> Result<ScalingRegime> {
    let Some(r) = obj else {
        return Ok(ScalingRegime::neumann(0.0, 0.0, 0.0, 0.0));
    };
    r.only(&["bc", "alpha", "beta", "gamma", "sigma", "phi_d"])?;
    let alpha = r.num("alpha")?.unwrap_or(0.0);
    let beta = r.num("beta")?.unwrap_or(0.0);
    let gamma = r.num("gamma")?.unwrap_or(0.0);
    match r.string("bc")?.unwrap_or("neumann") {
        "neumann" => {
            if r.map.contains_key("phi_d") {
                return Err(Error::validation(r.field("phi_d"), "only valid with bc = \"dirichlet\""));
            }
            Ok(ScalingRegime::neumann(r.num("sigma")?.unwrap_or(0.0), alpha, beta, gamma))
        }
        "dirichlet" => {
            if r.map.contains_key("sigma") {
                return Err(Error::validation(r.field("sigma"), "only valid with bc = \"neumann\""));
            }
            Ok(ScalingRegime::dirichlet(r.num("phi_d")?.unwrap_or(0.0), alpha, beta, gamma))
        }
        other => Err(Error::validation(r.field("bc"), format!("expected \"neumann\" or \"dirichlet\", got {other:?}"))),
    }
}

fn parse_initial(obj: Option<Obj<'_>>) -> Result<(InitialData, bool)> {
    let Some(i) = obj else {
        return Ok((InitialData::charged_dipole(), false));
    };
    i.only(&[
        "kind",
        "c_plus",
        "c_minus",
        "base",
        "amplitude",
        "center",
        "width",
        "positive",
        "negative",
        "balance_charge",
    ])?;
    let blob = |center: Option<[f64; 2]>, default: [f64; 2], width: Option<f64>| Blob {
        center: center.unwrap_or(default),
        width: width.unwrap_or(0.15),
    };
    let data = match i.string("kind")?.unwrap_or("charged_dipole") {
        "uniform" => InitialData::Uniform {
            c_plus: i.num("c_plus")?.unwrap_or(0.5),
            c_minus: i.num("c_minus")?.unwrap_or(0.5),
        },
        "charged_dipole" => InitialData::ChargedBlob {
            base: i.num("base")?.unwrap_or(0.5),
            amplitude: i.num("amplitude")?.unwrap_or(0.2),
            positive: blob(i.point("positive")?, [0.35, 0.4], i.positive("width")?),
            negative: blob(i.point("negative")?, [0.65, 0.6], i.positive("width")?),
        },
        "neutral_blob" => InitialData::NeutralBlob {
            base: i.num("base")?.unwrap_or(0.3),
            amplitude: i.num("amplitude")?.unwrap_or(0.2),
            blob: blob(i.point("center")?, [0.5, 0.5], i.positive("width")?),
        },
        other => {
            return Err(Error::validation(
                i.field("kind"),
                format!("expected \"uniform\", \"charged_dipole\" or \"neutral_blob\", got {other:?}"),
            ))
        }
    };
    Ok((data, i.boolean("balance_charge")?.unwrap_or(false)))
}

fn parse_discretization(obj: Option<Obj<'_>>, command: Command, geometry: &UnitCellGeometry) -> Result<Discretization> {
    let empty = Map::new();
    let d = obj.unwrap_or(Obj {
        path: "discretization".into(),
        map: &empty,
    });
    d.only(&["h", "dt", "t_end", "eps", "eps_list", "cell_h", "macro_h"])?;
    let eps = d.positive("eps")?.unwrap_or(0.25);
    if eps > 1.0 {
        return Err(Error::validation(d.field("eps"), "must not exceed 1"));
    }
    let cell_h = d.positive("cell_h")?.unwrap_or(0.125);
    let h = d.positive("h")?.unwrap_or(match command {
        Command::Micro => eps * cell_h,
        Command::Cell => geometry.target_h,
        _ => 1.0 / 32.0,
    });
    let t_end = match d.num("t_end")? {
        Some(t) if t < 0.0 => return Err(Error::validation(d.field("t_end"), "must not be negative")),
        Some(t) => t,
        None if command == Command::Macro => 0.5,
        None => 0.1,
    };
    let dt = d.positive("dt")?.unwrap_or(match command {
        Command::Converge => 1e-3,
        _ => h * h / 4.0,
    });
    let mut eps_list = match d.map.get("eps_list") {
        None => vec![0.5, 0.25, 0.125],
        Some(Value::Array(a)) if !a.is_empty() => a
            .iter()
            .enumerate()
            .map(|(k, v)| match v.as_f64() {
                Some(x) if x.is_finite() && x > 0.0 && x <= 1.0 => Ok(x),
                _ => Err(Error::validation(format!("{}[{k}]", d.field("eps_list")), format!("expected a number in (0, 1], got {v}"))),
            })
            .collect::<Result<Vec<_>>>()?,
        Some(_) => return Err(Error::validation(d.field("eps_list"), "expected a non-empty array of numbers")),
    };
    eps_list.sort_by(|a, b| b.total_cmp(a));
    eps_list.dedup();
    Ok(Discretization {
        h,
        dt,
        t_end,
        eps,
        eps_list,
        cell_h,
        macro_h: d.positive("macro_h")?.unwrap_or(1.0 / 64.0),
    })
}

fn parse_output(obj: Option<Obj<'_>>) -> Result<OutputConfig> {
    let mut out = OutputConfig {
        directory: PathBuf::from("snpp_out"),
        csv: true,
        vtk: true,
        snapshot_stride: 0,
    };
    let Some(o) = obj else {
        return Ok(out);
    };
    o.only(&["directory", "formats", "snapshot_stride"])?;
    if let Some(dir) = o.string("directory")? {
        out.directory = PathBuf::from(dir);
    }
    if let Some(v) = o.map.get("formats") {
        let list = v
            .as_array()
            .ok_or_else(|| Error::validation(o.field("formats"), "expected an array of strings"))?;
        out.csv = false;
        out.vtk = false;
        for f in list {
            match f.as_str() {
                Some("csv") => out.csv = true,
                Some("vtk") => out.vtk = true,
                _ => return Err(Error::validation(o.field("formats"), format!("unknown format {f}"))),
            }
        }
    }
    if let Some(v) = o.map.get("snapshot_stride") {
        out.snapshot_stride = v
            .as_u64()
            .ok_or_else(|| Error::validation(o.field("snapshot_stride"), format!("expected a non-negative integer, got {v}")))?
            as usize;
    }
    Ok(out)
}

/// Parses a configuration. `command` overrides (or supplies) the `command` field.
pub fn parse_config_for(text: &str, command: Option<Command>) -> Result<RunConfig> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let root = Obj::new("", &value)?;
    root.only(&[
        "command",
        "geometry",
        "regime",
        "discretization",
        "initial",
        "output",
        "lambda",
        "upwind",
        "exact_stokes",
        "coefficients",
        "diagnostics",
    ])?;
    let command = match (command, root.string("command")?) {
        (Some(c), _) => c,
        (None, Some(s)) => Command::parse(s).ok_or_else(|| Error::validation("command", format!("unknown command {s:?}")))?,
        (None, None) => return Err(Error::validation("command", "missing")),
    };
    let needs_regime = matches!(command, Command::Macro | Command::Micro | Command::Converge);
    if needs_regime && !root.map.contains_key("regime") {
        return Err(Error::validation("regime", format!("required for `{}`", command.name())));
    }
    let geometry = parse_geometry(root.child("geometry")?)?;
    let lambda = root.positive("lambda")?.unwrap_or(1.0);
    let (initial, balance_charge) = parse_initial(root.child("initial")?)?;
    Ok(RunConfig {
        command,
        geometry,
        regime: parse_regime(root.child("regime")?)?,
        discretization: parse_discretization(root.child("discretization")?, command, &geometry)?,
        initial,
        balance_charge,
        output: parse_output(root.child("output")?)?,
        lambda,
        upwind: root.boolean("upwind")?.unwrap_or(false),
        exact_stokes: root.boolean("exact_stokes")?.unwrap_or(false),
        coefficients: root.string("coefficients")?.map(PathBuf::from),
        diagnostics: root.string("diagnostics")?.map(PathBuf::from),
    })
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_for(text, None)
}

impl RunConfig {
    /// The configuration with all defaults applied, as echoed into the manifest.
    pub fn to_json(&self) -> Value {
        let geometry = match self.geometry.inclusion {
            crate::mesh::Inclusion::Disk { center, radius } => {
                json!({"inclusion": "disk", "center": center, "radius": radius, "cell_h": self.geometry.target_h})
            }
            crate::mesh::Inclusion::None => json!({"inclusion": "none", "cell_h": self.geometry.target_h}),
        };
        let r = &self.regime;
        let regime = match r.bc {
            BoundaryCondition::Neumann { sigma } => {
                json!({"bc": "neumann", "alpha": r.alpha, "beta": r.beta, "gamma": r.gamma, "sigma": sigma})
            }
            BoundaryCondition::Dirichlet { phi_d } => {
                json!({"bc": "dirichlet", "alpha": r.alpha, "beta": r.beta, "gamma": r.gamma, "phi_d": phi_d})
            }
        };
        let d = &self.discretization;
        let initial = match &self.initial {
            InitialData::Uniform { c_plus, c_minus } => json!({"kind": "uniform", "c_plus": c_plus, "c_minus": c_minus}),
            InitialData::ChargedBlob {
                base,
                amplitude,
                positive,
                negative,
            } => json!({
                "kind": "charged_dipole", "base": base, "amplitude": amplitude,
                "positive": positive.center, "negative": negative.center, "width": positive.width,
            }),
            InitialData::NeutralBlob { base, amplitude, blob } => json!({
                "kind": "neutral_blob", "base": base, "amplitude": amplitude, "center": blob.center, "width": blob.width,
            }),
        };
        let mut initial = initial;
        initial["balance_charge"] = json!(self.balance_charge);
        let mut formats = Vec::new();
        if self.output.csv {
            formats.push("csv");
        }
        if self.output.vtk {
            formats.push("vtk");
        }
        let mut v = json!({
            "command": self.command.name(),
            "geometry": geometry,
            "regime": regime,
            "discretization": {
                "h": d.h, "dt": d.dt, "t_end": d.t_end, "eps": d.eps, "eps_list": d.eps_list,
                "cell_h": d.cell_h, "macro_h": d.macro_h,
            },
            "initial": initial,
            "output": {
                "directory": self.output.directory.display().to_string(),
                "formats": formats,
                "snapshot_stride": self.output.snapshot_stride,
            },
            "lambda": self.lambda,
            "upwind": self.upwind,
            "exact_stokes": self.exact_stokes,
        });
        if let Some(c) = &self.coefficients {
            v["coefficients"] = json!(c.display().to_string());
        }
        if let Some(c) = &self.diagnostics {
            v["diagnostics"] = json!(c.display().to_string());
        }
        v
    }
}
