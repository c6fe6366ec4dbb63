//! TOML run configuration.
//!
//! A document names a preset and overrides any subset of its values:
//!
//! ```toml
//! preset = "stefan"
//! seed = 7
//!
//! [materials.vapor]
//! k = 0.03
//!
//! [domain]
//! n_v = 65
//! n_l = 65
//!
//! [solver]
//! t_end = 1e-5
//!
//! [output]
//! dir = "out/stefan"
//! emit = ["snapshots", "ledger", "summary"]
//! ```
//!
//! Unknown keys are rejected unless parsing is lenient, in which case they
//! are returned as warnings.

use std::path::{Path, PathBuf};

use evapsbp::{
    preset, InitialProfile, MmsDescriptor, MmsField, PresetName, ProblemSetup,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const DEFAULT_PRESET: PresetName = PresetName::Stefan;
pub const DEFAULT_OUTPUT_DIR: &str = "out";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfigDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub materials: Option<MaterialsDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interface: Option<InterfaceDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mms: Option<MmsDoc>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MaterialsDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vapor: Option<MaterialDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub liquid: Option<MaterialDoc>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MaterialDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InterfaceDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_lv: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_free: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DomainDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xn: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_v: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_l: Option<usize>,
}

/// Either `uniform = v` or `left = a, right = b` (linear over the phase).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProfileDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniform: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub left: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub right: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InitialDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vapor: Option<ProfileDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub liquid: Option<ProfileDoc>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sbp_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_v: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outer_bc_v: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outer_bc_l: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit_every: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_stab: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub emit: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FieldDoc {
    Sinusoidal {
        amplitude: f64,
        wavenumber: f64,
        #[serde(default)]
        temporal_amp: f64,
        #[serde(default)]
        temporal_freq: f64,
    },
    Linear {
        slope: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmsDoc {
    pub center: f64,
    pub amplitude: f64,
    pub frequency: f64,
    #[serde(default)]
    pub free_interface: bool,
    pub vapor: FieldDoc,
    pub liquid: FieldDoc,
}

/// Which output files a run writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Emit {
    pub snapshots: bool,
    pub ledger: bool,
    pub summary: bool,
}

impl Emit {
    pub const ALL: Emit = Emit {
        snapshots: true,
        ledger: true,
        summary: true,
    };

    fn parse(names: &[String]) -> Result<Self> {
        let mut e = Emit {
            snapshots: false,
            ledger: false,
            summary: false,
        };
        for n in names {
            match n.as_str() {
                "snapshots" => e.snapshots = true,
                "ledger" => e.ledger = true,
                "summary" => e.summary = true,
                other => {
                    return Err(CliError::invalid(
                        "output.emit",
                        format!("unknown entry `{other}` (snapshots, ledger, summary)"),
                    ))
                }
            }
        }
        Ok(e)
    }

    fn names(&self) -> Vec<String> {
        [
            (self.snapshots, "snapshots"),
            (self.ledger, "ledger"),
            (self.summary, "summary"),
        ]
        .iter()
        .filter(|(on, _)| *on)
        .map(|(_, n)| n.to_string())
        .collect()
    }
}

/// A fully resolved and validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub config_path: Option<PathBuf>,
    pub preset: PresetName,
    pub setup: ProblemSetup<f64>,
    pub output_dir: PathBuf,
    pub emit: Emit,
    pub seed: u64,
}

/// Manifest plus the keys ignored in lenient mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub manifest: RunManifest,
    pub warnings: Vec<String>,
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn parse_error(text: &str, source_name: &str, e: toml::de::Error) -> CliError {
    let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
    CliError::Parse {
        source_name: source_name.to_string(),
        line,
        column,
        message: e.message().to_string(),
    }
}

/// `a.b.c` form of an ignored-key path, without the `Option` and newtype
/// wrappers serde_ignored records along the way.
fn dotted(path: &serde_ignored::Path) -> String {
    use serde_ignored::Path;
    match path {
        Path::Root => String::new(),
        Path::Some { parent } | Path::NewtypeStruct { parent } | Path::NewtypeVariant { parent } => dotted(parent),
        Path::Seq { parent, index } => format!("{}[{index}]", dotted(parent)),
        Path::Map { parent, key } => match dotted(parent) {
            p if p.is_empty() => key.clone(),
            p => format!("{p}.{key}"),
        },
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str, source_name: &str, lenient: bool) -> Result<Parsed> {
    let de = toml::Deserializer::parse(text).map_err(|e| parse_error(text, source_name, e))?;
    let mut unknown = Vec::new();
    let doc: ConfigDoc = serde_ignored::deserialize(de, |path| unknown.push(dotted(&path)))
        .map_err(|e| parse_error(text, source_name, e))?;
    if !unknown.is_empty() && !lenient {
        return Err(CliError::UnknownKeys {
            source_name: source_name.to_string(),
            keys: unknown,
        });
    }
    for key in &unknown {
        log::warn!("{source_name}: ignoring unknown key `{key}`");
    }
    Ok(Parsed {
        manifest: resolve(&doc)?,
        warnings: unknown,
    })
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path, lenient: bool) -> Result<Parsed> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    let mut parsed = parse_config(&text, &path.display().to_string(), lenient)?;
    parsed.manifest.config_path = Some(path.to_path_buf());
    Ok(parsed)
}

fn profile(doc: &ProfileDoc, current: InitialProfile<f64>, field: &str) -> Result<InitialProfile<f64>> {
    match (doc.uniform, doc.left, doc.right) {
        (None, None, None) => Ok(current),
        (Some(v), None, None) => Ok(InitialProfile::Uniform(v)),
        (None, Some(left), Some(right)) => Ok(InitialProfile::Linear { left, right }),
        _ => Err(CliError::invalid(
            field,
            "needs either `uniform` or both `left` and `right`",
        )),
    }
}

fn field(doc: &FieldDoc) -> MmsField<f64> {
    match *doc {
        FieldDoc::Sinusoidal {
            amplitude,
            wavenumber,
            temporal_amp,
            temporal_freq,
        } => MmsField::Sinusoidal {
            amplitude,
            wavenumber,
            temporal_amp,
            temporal_freq,
        },
        FieldDoc::Linear { slope } => MmsField::Linear { slope },
    }
}

fn field_doc(f: &MmsField<f64>) -> FieldDoc {
    match *f {
        MmsField::Sinusoidal {
            amplitude,
            wavenumber,
            temporal_amp,
            temporal_freq,
        } => FieldDoc::Sinusoidal {
            amplitude,
            wavenumber,
            temporal_amp,
            temporal_freq,
        },
        MmsField::Linear { slope } => FieldDoc::Linear { slope },
    }
}

fn set<T: Copy>(target: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *target = v;
    }
}

/// Config-file location of a core validation field name.
fn config_key(name: &str) -> String {
    match name {
        "solver.n_v" => "domain.n_v".into(),
        "solver.n_l" => "domain.n_l".into(),
        "solver.snapshot_every" => "output.snapshot_every".into(),
        "solver.sigma_free" => "interface.sigma_free".into(),
        other => other.into(),
    }
}

fn validation(e: evapsbp::Error) -> CliError {
    match e {
        evapsbp::Error::InvalidParameter { name, constraint } => CliError::invalid(config_key(&name), constraint),
        other => CliError::Solver(other),
    }
}

/// Applies the document on top of its preset and validates the result.
pub fn resolve(doc: &ConfigDoc) -> Result<RunManifest> {
    let name = match &doc.preset {
        Some(p) => p
            .parse::<PresetName>()
            .map_err(|_| CliError::invalid("preset", format!("unknown preset `{p}` (stefan, sucking, steady)")))?,
        None => DEFAULT_PRESET,
    };
    let mut s = preset::<f64>(name);

    if let Some(m) = &doc.materials {
        for (d, target) in [(&m.vapor, &mut s.vapor), (&m.liquid, &mut s.liquid)] {
            if let Some(d) = d {
                set(&mut target.rho, d.rho);
                set(&mut target.cp, d.cp);
                set(&mut target.k, d.k);
            }
        }
    }
    if let Some(i) = &doc.interface {
        set(&mut s.t_delta, i.t_delta);
        set(&mut s.h_lv, i.h_lv);
        set(&mut s.config.sigma_free, i.sigma_free);
    }
    if let Some(d) = &doc.domain {
        set(&mut s.x0, d.x0);
        set(&mut s.xn, d.xn);
        set(&mut s.x_delta0, d.x_delta);
        set(&mut s.config.n_v, d.n_v);
        set(&mut s.config.n_l, d.n_l);
    }
    if let Some(i) = &doc.initial {
        if let Some(v) = &i.vapor {
            s.initial_v = profile(v, s.initial_v, "initial.vapor")?;
        }
        if let Some(l) = &i.liquid {
            s.initial_l = profile(l, s.initial_l, "initial.liquid")?;
        }
    }
    if let Some(v) = &doc.solver {
        set(&mut s.config.sbp_order, v.sbp_order);
        if v.dt.is_some() {
            s.config.dt = v.dt;
        }
        set(&mut s.config.t_end, v.t_end);
        set(&mut s.config.u_v, v.u_v);
        set(&mut s.config.outer_bc_v, v.outer_bc_v);
        set(&mut s.config.outer_bc_l, v.outer_bc_l);
        set(&mut s.config.audit_every, v.audit_every);
        set(&mut s.config.c_stab, v.c_stab);
    }
    let mut emit = Emit::ALL;
    let mut output_dir = PathBuf::from(DEFAULT_OUTPUT_DIR);
    if let Some(o) = &doc.output {
        if let Some(dir) = &o.dir {
            output_dir = PathBuf::from(dir);
        }
        if let Some(names) = &o.emit {
            emit = Emit::parse(names)?;
        }
        set(&mut s.config.snapshot_every, o.snapshot_every);
    }
    if let Some(m) = &doc.mms {
        s.config.mms = Some(MmsDescriptor {
            vapor: field(&m.vapor),
            liquid: field(&m.liquid),
            center: m.center,
            amplitude: m.amplitude,
            frequency: m.frequency,
            free_interface: m.free_interface,
        });
    }

    let manifest = RunManifest {
        config_path: None,
        preset: name,
        setup: s,
        output_dir,
        emit,
        seed: doc.seed.unwrap_or(0),
    };
    validate(&manifest)?;
    Ok(manifest)
}

/// Checks the resolved problem; errors name the offending config key.
pub fn validate(manifest: &RunManifest) -> Result<()> {
    manifest.setup.validate().map_err(validation)
}

fn profile_doc(p: &InitialProfile<f64>) -> ProfileDoc {
    match *p {
        InitialProfile::Uniform(v) => ProfileDoc {
            uniform: Some(v),
            ..ProfileDoc::default()
        },
        InitialProfile::Linear { left, right } => ProfileDoc {
            uniform: None,
            left: Some(left),
            right: Some(right),
        },
    }
}

/// Fully explicit document that resolves back to `manifest`.
pub fn manifest_doc(manifest: &RunManifest) -> ConfigDoc {
    let s = &manifest.setup;
    let c = &s.config;
    let mat = |m: &evapsbp::MaterialProps<f64>| MaterialDoc {
        rho: Some(m.rho),
        cp: Some(m.cp),
        k: Some(m.k),
    };
    ConfigDoc {
        preset: Some(manifest.preset.to_string()),
        seed: Some(manifest.seed),
        materials: Some(MaterialsDoc {
            vapor: Some(mat(&s.vapor)),
            liquid: Some(mat(&s.liquid)),
        }),
        interface: Some(InterfaceDoc {
            t_delta: Some(s.t_delta),
            h_lv: Some(s.h_lv),
            sigma_free: Some(c.sigma_free),
        }),
        domain: Some(DomainDoc {
            x0: Some(s.x0),
            xn: Some(s.xn),
            x_delta: Some(s.x_delta0),
            n_v: Some(c.n_v),
            n_l: Some(c.n_l),
        }),
        initial: Some(InitialDoc {
            vapor: Some(profile_doc(&s.initial_v)),
            liquid: Some(profile_doc(&s.initial_l)),
        }),
        solver: Some(SolverDoc {
            sbp_order: Some(c.sbp_order),
            dt: c.dt,
            t_end: Some(c.t_end),
            u_v: Some(c.u_v),
            outer_bc_v: Some(c.outer_bc_v),
            outer_bc_l: Some(c.outer_bc_l),
            audit_every: Some(c.audit_every),
            c_stab: Some(c.c_stab),
        }),
        output: Some(OutputDoc {
            dir: Some(manifest.output_dir.display().to_string()),
            emit: Some(manifest.emit.names()),
            snapshot_every: Some(c.snapshot_every),
        }),
        mms: c.mms.as_ref().map(|m| MmsDoc {
            center: m.center,
            amplitude: m.amplitude,
            frequency: m.frequency,
            free_interface: m.free_interface,
            vapor: field_doc(&m.vapor),
            liquid: field_doc(&m.liquid),
        }),
    }
}

/// Serializes the manifest as a configuration document.
pub fn manifest_to_toml(manifest: &RunManifest) -> String {
    toml::to_string(&manifest_doc(manifest)).expect("configuration documents always serialize")
}
