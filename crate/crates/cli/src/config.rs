//! Scenario files: flat TOML with sections, rationals written as `"p/q"`.

use std::path::{Path, PathBuf};

use gva_core::affine::AffineData;
use gva_core::grading::{Action, AltForm, GSet, Grading, Group, GroupElement, Pairing, SymForm};
use gva_core::scalars::{parse_q, Q};
use gva_core::Error;
use serde::Deserialize;

/// Check families in dependency order (build, certify, products, axioms).
pub const FAMILIES: &[(&str, Stage)] = &[
    ("grading", Stage::Build),
    ("delta", Stage::Build),
    ("heisenberg", Stage::Build),
    ("affine", Stage::Build),
    ("omega", Stage::Build),
    ("z", Stage::Build),
    ("psi", Stage::Build),
    ("eu", Stage::Build),
    ("certify", Stage::Certify),
    ("products", Stage::Products),
    ("jacobi", Stage::Products),
    ("adjoint", Stage::Products),
    ("closure", Stage::Axioms),
    ("axioms", Stage::Axioms),
    ("representatives", Stage::Axioms),
    ("faults", Stage::Axioms),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Build,
    Certify,
    Products,
    Axioms,
}

pub fn stage_of(family: &str) -> Option<Stage> {
    FAMILIES.iter().find(|(f, _)| *f == family).map(|(_, s)| *s)
}

fn needs_algebra(family: &str) -> bool {
    !matches!(family, "grading" | "delta")
}

/// Field names a scenario may list as generators.
pub const FIELD_NAMES: &[&str] = &["psi_e", "psi_f"];

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub report: Option<String>,
    #[serde(default)]
    pub generators: Vec<String>,
    pub checks: Vec<String>,
    pub grading: Option<GradingConfig>,
    pub algebra: Option<AlgebraConfig>,
    #[serde(default)]
    pub windows: Windows,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradingConfig {
    pub rank: usize,
    #[serde(default)]
    pub torsion: Vec<u32>,
    /// Omitted for sl2, where it is `2/ℓ`.
    pub sym: Option<Vec<Vec<String>>>,
    pub alt: Option<Vec<Vec<i64>>>,
    #[serde(default = "one")]
    pub order: u32,
    #[serde(default)]
    pub sectors: Sectors,
    #[serde(default = "zero_str")]
    pub lift_base: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sectors {
    #[default]
    Regular,
    Trivial,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraConfig {
    pub kind: String,
    pub level: String,
    pub cutoff: i64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Windows {
    /// Half-width of the delta-identity box.
    pub delta: i64,
    pub alphas: Vec<String>,
    /// `|m|, |n|` bound for the affine bracket.
    pub modes: i64,
    pub z: i64,
    /// Number of Verma basis vectors used as Z-relation sources.
    pub z_sources: usize,
    pub psi: i64,
    pub certify: i64,
    pub products: i64,
    pub jacobi: i64,
    pub eu_degree: i64,
    pub closure_weight: String,
    /// Largest `|k|` of a closure sector.
    pub closure_sectors: i64,
    /// Seeded product elements added to the Jacobi and adjoint samples.
    pub samples: usize,
}

impl Default for Windows {
    fn default() -> Self {
        Windows {
            delta: 12,
            alphas: ["0", "1/2", "-1/3", "2"].map(String::from).to_vec(),
            modes: 3,
            z: 4,
            z_sources: 4,
            psi: 2,
            certify: 2,
            products: 3,
            jacobi: 4,
            eu_degree: 3,
            closure_weight: "2".into(),
            closure_sectors: 2,
            samples: 5,
        }
    }
}

fn one() -> u32 {
    1
}

fn zero_str() -> String {
    "0".into()
}

/// Command-line overrides applied after parsing.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub window: Option<i64>,
    pub cutoff: Option<i64>,
    pub level: Option<String>,
    pub seed: Option<u64>,
    pub lift_base: Option<String>,
    pub report: Option<PathBuf>,
}

/// Configuration problems; always exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl From<Error> for ConfigError {
    fn from(e: Error) -> Self {
        ConfigError(e.to_string())
    }
}

/// A parsed and validated scenario with every rational resolved.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub scenario: Scenario,
    pub checks: Vec<String>,
    pub grading: Option<Grading>,
    pub level: Option<Q>,
    pub alphas: Vec<Q>,
    pub closure_weight: Q,
    pub report: Option<PathBuf>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Scenario, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Scenario::parse(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(w) = o.window {
            self.windows.z = w;
            self.windows.jacobi = w;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(alg) = self.algebra.as_mut() {
            if let Some(c) = o.cutoff {
                alg.cutoff = c;
            }
            if let Some(l) = &o.level {
                alg.level = l.clone();
            }
        }
        if let Some(b) = &o.lift_base {
            match self.grading.as_mut() {
                Some(g) => g.lift_base = b.clone(),
                None => {
                    self.grading = Some(GradingConfig {
                        rank: 1,
                        torsion: vec![0],
                        sym: None,
                        alt: None,
                        order: 1,
                        sectors: Sectors::Regular,
                        lift_base: b.clone(),
                    })
                }
            }
        }
        if let Some(r) = &o.report {
            self.report = Some(r.display().to_string());
        }
    }

    pub fn resolve(self) -> Result<Resolved, ConfigError> {
        let mut checks = Vec::new();
        for c in &self.checks {
            if stage_of(c).is_none() {
                return Err(ConfigError(format!("unknown check family {c:?}")));
            }
            if checks.contains(c) {
                return Err(ConfigError(format!("check family {c:?} listed twice")));
            }
            checks.push(c.clone());
        }
        if checks.is_empty() {
            return Err(ConfigError("empty check list".into()));
        }
        checks.sort_by_key(|c| stage_of(c));

        let level = match &self.algebra {
            Some(a) => {
                if a.kind != "sl2" {
                    return Err(ConfigError(format!("unsupported algebra {:?}", a.kind)));
                }
                let l = parse_q(&a.level)?;
                AffineData::sl2(l)?;
                if a.cutoff < 0 {
                    return Err(ConfigError(format!("cutoff {} is negative", a.cutoff)));
                }
                Some(l)
            }
            None => None,
        };
        if let Some(c) = checks.iter().find(|c| needs_algebra(c)) {
            if level.is_none() {
                return Err(ConfigError(format!("check family {c:?} needs an [algebra] section")));
            }
        }
        for g in &self.generators {
            if !FIELD_NAMES.contains(&g.as_str()) {
                return Err(ConfigError(format!("unknown generator {g:?}; known: {}", FIELD_NAMES.join(", "))));
            }
        }
        let uses_generators = checks.iter().any(|c| stage_of(c) > Some(Stage::Build));
        if uses_generators && self.generators.is_empty() {
            return Err(ConfigError("generator list is empty".into()));
        }

        let w = &self.windows;
        let minimums = [
            ("delta", w.delta, 1),
            ("modes", w.modes, 1),
            ("z", w.z, 1),
            ("psi", w.psi, 1),
            ("certify", w.certify, 1),
            ("products", w.products, 1),
            ("jacobi", w.jacobi, 1),
            ("eu_degree", w.eu_degree, 0),
            ("closure_sectors", w.closure_sectors, 0),
        ];
        for (name, v, min) in minimums {
            if v < min {
                return Err(Error::WindowUnderflow(format!("windows.{name} = {v} is below {min}")).into());
            }
        }
        let alphas = w.alphas.iter().map(|s| parse_q(s)).collect::<Result<Vec<_>, _>>()?;
        let closure_weight = parse_q(&w.closure_weight)?;

        let grading = match (&self.grading, level) {
            (Some(g), l) => Some(build_grading(g, l)?),
            (None, Some(l)) => Some(Grading::sl2(&l)),
            (None, None) => None,
        };
        let report = self.report.as_ref().map(PathBuf::from);
        Ok(Resolved { scenario: self, checks, grading, level, alphas, closure_weight, report })
    }
}

fn build_grading(cfg: &GradingConfig, level: Option<Q>) -> Result<Grading, ConfigError> {
    let r = cfg.rank;
    let torsion = if cfg.torsion.is_empty() { vec![0; r] } else { cfg.torsion.clone() };
    if torsion.len() != r {
        return Err(ConfigError(format!("torsion has {} entries for rank {r}", torsion.len())));
    }
    let sym = match (&cfg.sym, level) {
        (Some(m), _) => {
            let m = m
                .iter()
                .map(|row| row.iter().map(|s| parse_q(s)).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            if m.len() != r || m.iter().any(|row| row.len() != r) {
                return Err(ConfigError(format!("sym must be {r}x{r}")));
            }
            m
        }
        (None, Some(l)) if r == 1 => Grading::sl2(&l).sym.matrix,
        (None, _) => return Err(ConfigError("grading.sym is required without an sl2 algebra".into())),
    };
    let alt = cfg.alt.clone().unwrap_or_else(|| vec![vec![0; r]; r]);
    if alt.len() != r || alt.iter().any(|row| row.len() != r) {
        return Err(ConfigError(format!("alt must be {r}x{r}")));
    }
    if cfg.order == 0 {
        return Err(ConfigError("grading.order must be positive".into()));
    }
    let group = Group { torsion };
    let sym = SymForm::new(sym).with_lift_base(parse_q(&cfg.lift_base)?);
    if !sym.is_symmetric() {
        return Err(ConfigError("grading.sym is not symmetric".into()));
    }
    let alt = AltForm { exponents: alt, order: cfg.order };
    if !alt.is_alternating() {
        return Err(ConfigError("grading.alt is not alternating".into()));
    }
    let gset = match cfg.sectors {
        Sectors::Trivial => GSet::single(r),
        Sectors::Regular => GSet { elements: enumerate(&group)?, action: Action::Regular, pairing: Pairing::Form },
    };
    let grading = Grading { group, sym, alt, gset };
    if let Some(l) = level {
        let expected = Grading::sl2(&l).with_lift_base(*grading.lift_base());
        if grading != expected {
            return Err(ConfigError(format!("grading does not match sl2 at level {}", gva_core::scalars::fmt_q(&l))));
        }
    }
    Ok(grading)
}

/// All elements of a finite group; empty when some coordinate is free.
fn enumerate(group: &Group) -> Result<Vec<GroupElement>, ConfigError> {
    if group.torsion.iter().any(|&t| t == 0) {
        return Ok(Vec::new());
    }
    let size: u64 = group.torsion.iter().map(|&t| t as u64).product();
    if size > 4096 {
        return Err(ConfigError(format!("finite group of order {size} is too large")));
    }
    let mut out = vec![Vec::new()];
    for &t in &group.torsion {
        out = out.into_iter().flat_map(|c: Vec<i64>| (0..t as i64).map(move |x| [c.clone(), vec![x]].concat())).collect();
    }
    Ok(out.into_iter().map(|c| group.element(&c)).collect())
}
