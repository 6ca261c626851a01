//! Scenario files: INI sections of `key = value` lines with `#` comments.
//!
//! ```text
//! [space]        dim, alpha, side, a, b, inner_offset, truncation
//!                (side_i, a_i, b_i, inner_offset_i, truncation_i per axis)
//! [grid]         n_points, spacing (n_points_i, spacing_i per axis)
//! [lagrangian]   density, sector
//! [field]        expr | samples
//! [generator]    kind = translation | rotation | scaling | zero | custom,
//!                params, f_s (comma-separated components), c_s
//! [oscillator]   m, xi_d, alpha, A, B, phi0, v0, t0, t_end, step,
//!                tolerance, mode = integrated | analytic
//! [deriv]        point
//! [verify]       seed
//! [output]       trajectory, energy, el, noether, emt, amt, verify
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use conformable::frac::{
    AxisDomain, AxisGrid, FieldSource, FractionalOrder, GridSpec, Sector, Side, SpaceSpec, Spacing,
    DEFAULT_INNER_OFFSET, DEFAULT_TRUNCATION,
};
use conformable::noether::SymmetryGenerator;
use conformable::oscillator::OscillatorParams;
use conformable::variational::LagrangianSpec;

use crate::samples::parse_samples;
use crate::{CliError, Result};

/// Used when no `--config` is given: the fractional oscillator with the
/// delayed start, on a one-dimensional right half-line.
pub const DEFAULT_CONFIG: &str = "\
# fractional oscillator, m = xi_d = 1, alpha = 1/2
[space]
dim = 1
alpha = 0.5
side = right
a = 0

[grid]
n_points = 32
spacing = uniform_u

[lagrangian]
density = 0.5*g_1^2 - 0.5*phi^2

[field]
expr = cos(2*x_1^0.5)

[generator]
kind = scaling

[oscillator]
m = 1
xi_d = 1
phi0 = 1
v0 = 1
step = 0.05
tolerance = 1e-10

[deriv]
point = 1.0

[verify]
seed = 7
";

// Guards against configurations that would exhaust memory.
const MAX_DIM: usize = 8;
const MAX_POINTS_PER_AXIS: usize = 100_000;
const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OscillatorMode {
    Integrated,
    Analytic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorConfig {
    /// Amplitudes are set when `A` and `B` are given.
    pub params: OscillatorParams,
    pub phi0: Option<f64>,
    pub v0: Option<f64>,
    pub t0: Option<f64>,
    pub t_end: Option<f64>,
    pub step: f64,
    pub tolerance: f64,
    pub mode: OscillatorMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputNames {
    pub trajectory: String,
    pub energy: String,
    pub el: String,
    pub noether: String,
    pub emt: String,
    pub amt: String,
    pub verify: String,
}

impl Default for OutputNames {
    fn default() -> OutputNames {
        OutputNames {
            trajectory: "trajectory.csv".into(),
            energy: "energy.csv".into(),
            el: "el.csv".into(),
            noether: "noether.csv".into(),
            emt: "emt.csv".into(),
            amt: "amt.csv".into(),
            verify: "verify.csv".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub space: Option<SpaceSpec>,
    pub grid: Option<GridSpec>,
    pub lagrangian: Option<LagrangianSpec>,
    /// `None` until a `samples` file has been loaded.
    pub field: Option<FieldSource>,
    /// The `samples` path as written, relative to the scenario file.
    pub samples: Option<PathBuf>,
    pub generator: Option<SymmetryGenerator>,
    pub oscillator: Option<OscillatorConfig>,
    pub deriv_point: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub output: OutputNames,
}

fn err<T>(message: impl Into<String>) -> Result<T> {
    Err(CliError::Config(message.into()))
}

/// Keys of one section, removed as they are read so leftovers can be
/// reported.
struct Section {
    name: String,
    keys: BTreeMap<String, String>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<String> {
        self.keys.remove(key)
    }

    fn text(&mut self, key: &str) -> Result<String> {
        match self.take(key) {
            Some(v) if !v.is_empty() => Ok(v),
            _ => err(format!("[{}] needs `{key}`", self.name)),
        }
    }

    fn number(&mut self, key: &str) -> Result<Option<f64>> {
        self.take(key).map(|v| parse_number(&self.name, key, &v)).transpose()
    }

    fn number_or(&mut self, key: &str, default: f64) -> Result<f64> {
        Ok(self.number(key)?.unwrap_or(default))
    }

    fn count(&mut self, key: &str) -> Result<Option<usize>> {
        self.take(key)
            .map(|v| {
                v.parse::<usize>()
                    .or_else(|_| err(format!("[{}] {key} = `{v}` is not a non-negative integer", self.name)))
            })
            .transpose()
    }

    fn finish(self) -> Result<()> {
        match self.keys.keys().next() {
            Some(k) => err(format!("[{}] has unknown key `{k}`", self.name)),
            None => Ok(()),
        }
    }
}

fn parse_number(section: &str, key: &str, v: &str) -> Result<f64> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => err(format!("[{section}] {key} = `{v}` is not a finite number")),
    }
}

fn parse_list(section: &str, key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|s| parse_number(section, key, s.trim()))
        .collect()
}

fn parse_sector(section: &str, key: &str, v: &str) -> Result<Sector> {
    match v {
        "right" => Ok(Sector::Right),
        "left" => Ok(Sector::Left),
        _ => err(format!("[{section}] {key} = `{v}`: expected `right` or `left`")),
    }
}

fn parse_spacing(v: &str) -> Result<Spacing> {
    match v {
        "uniform_x" => Ok(Spacing::UniformX),
        "uniform_u" => Ok(Spacing::UniformU),
        _ => err(format!("[grid] spacing = `{v}`: expected `uniform_x` or `uniform_u`")),
    }
}

fn sections(text: &str) -> Result<BTreeMap<String, Section>> {
    let ini = ini::Ini::load_from_str(text)
        .or_else(|e| err(format!("line {}: {}", e.line, e.msg)))?;
    let mut out: BTreeMap<String, Section> = BTreeMap::new();
    for (name, props) in ini.iter() {
        let Some(name) = name else {
            if let Some((k, _)) = props.iter().next() {
                return err(format!("`{k}` appears before any section"));
            }
            continue;
        };
        if out.contains_key(name) {
            return err(format!("section [{name}] appears twice"));
        }
        let mut keys = BTreeMap::new();
        for (k, v) in props.iter() {
            // inline comments; no value in this format contains `#`
            let v = v.split('#').next().unwrap_or("").trim().to_string();
            if keys.insert(k.to_string(), v).is_some() {
                return err(format!("[{name}] sets `{k}` twice"));
            }
        }
        out.insert(
            name.to_string(),
            Section {
                name: name.to_string(),
                keys,
            },
        );
    }
    Ok(out)
}

impl ScenarioConfig {
    pub fn default_scenario() -> ScenarioConfig {
        ScenarioConfig::parse(DEFAULT_CONFIG).expect("the built-in scenario is valid")
    }

    /// Parse a scenario without touching the file system; a `samples` key is
    /// recorded but not loaded.
    pub fn parse(text: &str) -> Result<ScenarioConfig> {
        let mut sections = sections(text)?;
        let known = [
            "space",
            "grid",
            "lagrangian",
            "field",
            "generator",
            "oscillator",
            "deriv",
            "verify",
            "output",
        ];
        if let Some(name) = sections.keys().find(|k| !known.contains(&k.as_str())) {
            return err(format!("unknown section [{name}]"));
        }
        let mut take = |name: &str| sections.remove(name);

        let space = take("space").map(parse_space).transpose()?;
        let dim = space.as_ref().map(SpaceSpec::dim);
        let need_dim = |section: &str| -> Result<usize> {
            dim.ok_or_else(|| CliError::Config(format!("[{section}] needs a [space] section")))
        };

        let grid = match take("grid") {
            Some(s) => Some(parse_grid(s, need_dim("grid")?)?),
            None => None,
        };
        let lagrangian = match take("lagrangian") {
            Some(mut s) => {
                let d = need_dim("lagrangian")?;
                let density = s.text("density")?;
                let sector = match s.take("sector") {
                    Some(v) => parse_sector("lagrangian", "sector", &v)?,
                    None => space
                        .as_ref()
                        .and_then(SpaceSpec::sector)
                        .ok_or_else(|| CliError::Config("[lagrangian] needs `sector` for a mixed space".into()))?,
                };
                s.finish()?;
                Some(LagrangianSpec::parse(&density, d, sector)?)
            }
            None => None,
        };
        let (field, samples) = match take("field") {
            Some(mut s) => {
                let d = need_dim("field")?;
                let expr = s.take("expr");
                let path = s.take("samples");
                s.finish()?;
                match (expr, path) {
                    (Some(e), None) => (Some(FieldSource::parse(&e, d)?), None),
                    (None, Some(p)) if !p.is_empty() => (None, Some(PathBuf::from(p))),
                    _ => return err("[field] needs exactly one of `expr` and `samples`"),
                }
            }
            None => (None, None),
        };
        let generator = match take("generator") {
            Some(s) => Some(parse_generator(s, need_dim("generator")?)?),
            None => None,
        };
        let oscillator = match take("oscillator") {
            Some(s) => Some(parse_oscillator(s, space.as_ref())?),
            None => None,
        };
        let deriv_point = match take("deriv") {
            Some(mut s) => {
                let p = s.take("point").map(|v| parse_list("deriv", "point", &v)).transpose()?;
                s.finish()?;
                p
            }
            None => None,
        };
        let seed = match take("verify") {
            Some(mut s) => {
                let seed = s
                    .take("seed")
                    .map(|v| v.parse::<u64>().or_else(|_| err(format!("[verify] seed = `{v}` is not an integer"))))
                    .transpose()?;
                s.finish()?;
                seed
            }
            None => None,
        };
        let output = match take("output") {
            Some(s) => parse_output(s)?,
            None => OutputNames::default(),
        };
        Ok(ScenarioConfig {
            space,
            grid,
            lagrangian,
            field,
            samples,
            generator,
            oscillator,
            deriv_point,
            seed,
            output,
        })
    }

    /// Parse a scenario and load its sample file, resolved against `base`.
    pub fn parse_in(text: &str, base: &Path) -> Result<ScenarioConfig> {
        let mut cfg = ScenarioConfig::parse(text)?;
        if let Some(rel) = &cfg.samples {
            let path = base.join(rel);
            let body = std::fs::read_to_string(&path)
                .or_else(|e| err(format!("cannot read sample file {}: {e}", path.display())))?;
            let dim = cfg.space.as_ref().map_or(1, SpaceSpec::dim);
            let sampled = parse_samples(&body, dim)
                .or_else(|e| err(format!("sample file {}: {e}", path.display())))?;
            cfg.field = Some(FieldSource::Sampled(sampled));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ScenarioConfig> {
        let text = std::fs::read_to_string(path)
            .or_else(|e| err(format!("cannot read {}: {e}", path.display())))?;
        ScenarioConfig::parse_in(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn space(&self) -> Result<&SpaceSpec> {
        self.space.as_ref().ok_or_else(|| CliError::Config("missing [space] section".into()))
    }

    /// The configured grid, or 16 uniform points per axis.
    pub fn grid(&self) -> Result<GridSpec> {
        match &self.grid {
            Some(g) => Ok(g.clone()),
            None => Ok(GridSpec::uniform(self.space()?.dim(), 16, Spacing::UniformX)?),
        }
    }

    pub fn lagrangian(&self) -> Result<&LagrangianSpec> {
        self.lagrangian
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [lagrangian] section".into()))
    }

    pub fn field(&self) -> Result<&FieldSource> {
        match (&self.field, &self.samples) {
            (Some(f), _) => Ok(f),
            (None, Some(p)) => err(format!("sample file {} has not been loaded", p.display())),
            (None, None) => err("missing [field] section"),
        }
    }

    pub fn generator(&self) -> Result<&SymmetryGenerator> {
        self.generator
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [generator] section".into()))
    }

    pub fn oscillator(&self) -> Result<&OscillatorConfig> {
        self.oscillator
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [oscillator] section".into()))
    }
}

fn parse_space(mut s: Section) -> Result<SpaceSpec> {
    let dim = s.count("dim")?.ok_or_else(|| CliError::Config("[space] needs `dim`".into()))?;
    if dim == 0 || dim > MAX_DIM {
        return err(format!("[space] dim = {dim} outside 1..={MAX_DIM}"));
    }
    let alpha = s
        .number("alpha")?
        .ok_or_else(|| CliError::Config("[space] needs `alpha`".into()))?;
    let order = FractionalOrder::new(alpha)?;
    let side = match s.take("side") {
        Some(v) => parse_sector("space", "side", &v)?,
        None => Sector::Right,
    };
    let a = s.number_or("a", 0.0)?;
    let b = s.number_or("b", 0.0)?;
    let delta = s.number_or("inner_offset", DEFAULT_INNER_OFFSET)?;
    let trunc = s.number_or("truncation", DEFAULT_TRUNCATION)?;
    let mut axes = Vec::with_capacity(dim);
    for i in 1..=dim {
        let side_i = match s.take(&format!("side_{i}")) {
            Some(v) => parse_sector("space", &format!("side_{i}"), &v)?,
            None => side,
        };
        let a_i = s.number_or(&format!("a_{i}"), a)?;
        let b_i = s.number_or(&format!("b_{i}"), b)?;
        let delta_i = s.number_or(&format!("inner_offset_{i}"), delta)?;
        let trunc_i = s.number_or(&format!("truncation_{i}"), trunc)?;
        let side = match side_i {
            Sector::Right => Side::Right { origin: a_i },
            Sector::Left => Side::Left { endpoint: b_i },
        };
        axes.push(AxisDomain::new(side, delta_i, trunc_i)?);
    }
    s.finish()?;
    Ok(SpaceSpec::new(axes, order)?)
}

fn parse_grid(mut s: Section, dim: usize) -> Result<GridSpec> {
    let n = s.count("n_points")?.unwrap_or(16);
    let spacing = match s.take("spacing") {
        Some(v) => parse_spacing(&v)?,
        None => Spacing::UniformX,
    };
    let mut axes = Vec::with_capacity(dim);
    let mut total = 1usize;
    for i in 1..=dim {
        let n_points = s.count(&format!("n_points_{i}"))?.unwrap_or(n);
        let spacing = match s.take(&format!("spacing_{i}")) {
            Some(v) => parse_spacing(&v)?,
            None => spacing,
        };
        if n_points > MAX_POINTS_PER_AXIS {
            return err(format!("[grid] {n_points} points on axis {i} exceeds {MAX_POINTS_PER_AXIS}"));
        }
        total = total.saturating_mul(n_points);
        axes.push(AxisGrid { n_points, spacing });
    }
    if total > MAX_GRID_POINTS {
        return err(format!("[grid] {total} points exceeds {MAX_GRID_POINTS}"));
    }
    s.finish()?;
    Ok(GridSpec::new(axes)?)
}

fn parse_generator(mut s: Section, dim: usize) -> Result<SymmetryGenerator> {
    let kind = s.take("kind").unwrap_or_else(|| "custom".into());
    let gen = match kind.as_str() {
        "translation" => SymmetryGenerator::translation(dim),
        "scaling" => SymmetryGenerator::scaling(dim),
        "rotation" if dim == 2 => SymmetryGenerator::rotation(),
        "rotation" => return err("[generator] rotation needs dim = 2"),
        "zero" => SymmetryGenerator::zero(dim, s.count("params")?.unwrap_or(1).max(1)),
        "custom" => {
            let params = s
                .count("params")?
                .ok_or_else(|| CliError::Config("[generator] custom needs `params`".into()))?;
            if params == 0 || params > 64 {
                return err(format!("[generator] params = {params} outside 1..=64"));
            }
            let mut f = Vec::with_capacity(params);
            let mut c = Vec::with_capacity(params);
            for sigma in 1..=params {
                let comps: Vec<String> = match s.take(&format!("f_{sigma}")) {
                    Some(v) => v.split(',').map(|t| t.trim().to_string()).collect(),
                    None => vec!["0".into(); dim],
                };
                if comps.len() != dim {
                    return err(format!(
                        "[generator] f_{sigma} has {} components, expected {dim}",
                        comps.len()
                    ));
                }
                f.push(comps);
                c.push(s.take(&format!("c_{sigma}")).unwrap_or_else(|| "0".into()));
            }
            SymmetryGenerator::parse(dim, &f, &c)?
        }
        other => return err(format!("[generator] unknown kind `{other}`")),
    };
    s.finish()?;
    Ok(gen)
}

fn parse_oscillator(mut s: Section, space: Option<&SpaceSpec>) -> Result<OscillatorConfig> {
    let alpha = match (s.number("alpha")?, space) {
        (Some(a), _) => a,
        (None, Some(sp)) => sp.alpha(),
        (None, None) => return err("[oscillator] needs `alpha` or a [space] section"),
    };
    let mut params = OscillatorParams::new(s.number_or("m", 1.0)?, s.number_or("xi_d", 1.0)?, alpha)?;
    match (s.number("A")?, s.number("B")?) {
        (Some(a), Some(b)) => params = params.with_amplitudes(a, b),
        (None, None) => {}
        _ => return err("[oscillator] set both `A` and `B` or neither"),
    }
    let phi0 = s.number("phi0")?;
    let v0 = s.number("v0")?;
    if phi0.is_some() != v0.is_some() {
        return err("[oscillator] set both `phi0` and `v0` or neither");
    }
    let t0 = s.number("t0")?;
    if let Some(t) = t0 {
        if !(t > 0.0) {
            return err(format!("[oscillator] t0 = {t} must be positive"));
        }
    }
    let t_end = s.number("t_end")?;
    let step = s.number_or("step", 0.05)?;
    if !(step > 0.0) {
        return err(format!("[oscillator] step = {step} must be positive"));
    }
    let tolerance = s.number_or("tolerance", 1e-10)?;
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return err(format!("[oscillator] tolerance = {tolerance} outside (0, 1)"));
    }
    let mode = match s.take("mode").as_deref() {
        None | Some("integrated") => OscillatorMode::Integrated,
        Some("analytic") => OscillatorMode::Analytic,
        Some(other) => return err(format!("[oscillator] mode = `{other}`: expected `integrated` or `analytic`")),
    };
    s.finish()?;
    Ok(OscillatorConfig {
        params,
        phi0,
        v0,
        t0,
        t_end,
        step,
        tolerance,
        mode,
    })
}

fn parse_output(mut s: Section) -> Result<OutputNames> {
    let d = OutputNames::default();
    let mut name = |key: &str, default: String| -> Result<String> {
        match s.take(key) {
            Some(v) if v.is_empty() || v.contains(['/', '\\']) || v == "." || v == ".." => {
                err(format!("[output] {key} = `{v}` must be a plain file name"))
            }
            Some(v) => Ok(v),
            None => Ok(default),
        }
    };
    let out = OutputNames {
        trajectory: name("trajectory", d.trajectory)?,
        energy: name("energy", d.energy)?,
        el: name("el", d.el)?,
        noether: name("noether", d.noether)?,
        emt: name("emt", d.emt)?,
        amt: name("amt", d.amt)?,
        verify: name("verify", d.verify)?,
    };
    s.finish()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scenario_is_complete() {
        let c = ScenarioConfig::default_scenario();
        assert_eq!(c.space().unwrap().alpha(), 0.5);
        assert!(c.lagrangian().is_ok() && c.field().is_ok() && c.generator().is_ok());
        assert_eq!(c.oscillator().unwrap().phi0, Some(1.0));
        assert_eq!(c.seed, Some(7));
    }

    #[test]
    fn per_axis_overrides() {
        let c = ScenarioConfig::parse(
            "[space]\ndim = 2\nalpha = 0.7\nside = left\nb = 1 # endpoint\nb_2 = 3\n[grid]\nn_points = 4\nn_points_2 = 6\n",
        )
        .unwrap();
        let s = c.space().unwrap();
        assert_eq!(s.anchors(), vec![1.0, 3.0]);
        assert_eq!(s.sector(), Some(Sector::Left));
        assert_eq!(c.grid().unwrap().axis(1).n_points, 6);
    }

    #[test]
    fn rejects_bad_scenarios() {
        let bad = [
            "[space]\ndim = 1\nalpha = 1.5\n",
            "[space]\ndim = 1\nalpha = 0.5\ncolour = red\n",
            "[spaces]\ndim = 1\n",
            "[field]\nexpr = x_1\n",
            "[space]\ndim = 1\nalpha = 0.5\n[field]\nexpr = sin(x_1\n",
            "[space]\ndim = 1\nalpha = 0.5\n[field]\nexpr = x_2\n",
            "[space]\ndim = 1\nalpha = 0.5\nalpha = 0.6\n",
            "[space]\ndim = 1\nalpha = 0.5\n[grid]\nn_points = 99999999999\n",
            "[space]\ndim = 1\nalpha = 0.5\n[generator]\nkind = rotation\n",
            "[space]\ndim = 1\nalpha = 0.5\n[oscillator]\nA = 1\n",
            "[space]\ndim = 1\nalpha = 0.5\n[output]\nel = ../x.csv\n",
            "dim = 1\n",
        ];
        for text in bad {
            let e = ScenarioConfig::parse(text).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{text}: {e}");
        }
    }

    #[test]
    fn custom_generator() {
        let c = ScenarioConfig::parse(
            "[space]\ndim = 2\nalpha = 0.5\n[generator]\nparams = 2\nf_1 = x_2, -x_1\nc_2 = phi\n",
        )
        .unwrap();
        let g = c.generator().unwrap();
        assert_eq!(g.params(), 2);
        assert_eq!(g.f(1)[0].as_const(), Some(0.0));
    }
}
