//! Experiment configuration: plain-text key=value files with sections,
//! environment overrides (prefix `KICKTOP_`), and `--set` patches.
//!
//! Every field has a per-experiment default mirroring the reference
//! protocols; the resolved configuration is echoed into the run manifest
//! and round-trips losslessly through `to_file_string` / `parse`.

use std::collections::BTreeMap;
use std::fmt;

/// The seven runnable experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Portrait,
    SweepK,
    ScalingJ,
    Table1,
    CoeCompare,
    EigvecQ,
    StabilityScan,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Portrait,
        Experiment::SweepK,
        Experiment::ScalingJ,
        Experiment::Table1,
        Experiment::CoeCompare,
        Experiment::EigvecQ,
        Experiment::StabilityScan,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Portrait => "portrait",
            Experiment::SweepK => "sweep-k",
            Experiment::ScalingJ => "scaling-j",
            Experiment::Table1 => "table1",
            Experiment::CoeCompare => "coe-compare",
            Experiment::EigvecQ => "eigvec-q",
            Experiment::StabilityScan => "stability-scan",
        }
    }

    /// Figure or table of the reference dataset this experiment reproduces.
    pub fn reproduces(&self) -> &'static str {
        match self {
            Experiment::Portrait => "Figs. 1, 2, 7",
            Experiment::SweepK => "Figs. 3, 4",
            Experiment::ScalingJ => "Figs. 6, 8, 9",
            Experiment::Table1 => "Table 1 & Fig. 5",
            Experiment::CoeCompare => "Table 1 (COE columns)",
            Experiment::EigvecQ => "Fig. 10",
            Experiment::StabilityScan => "classical k_b reference values",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|e| e.name() == s)
    }
}

/// A one-dimensional parameter grid, kept in its declared form so the
/// configuration echo is lossless.
#[derive(Clone, Debug, PartialEq)]
pub enum GridSpec {
    /// `lo:step:hi` (inclusive arithmetic progression).
    Range { lo: f64, step: f64, hi: f64 },
    /// `log:lo:hi:n` (n geometrically spaced points, inclusive).
    Log { lo: f64, hi: f64, n: usize },
    /// Comma-separated list.
    List(Vec<f64>),
}

impl GridSpec {
    pub fn parse(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("log:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(format!("grid `{s}`: expected log:LO:HI:N"));
            }
            let lo: f64 = parts[0].parse().map_err(|_| format!("grid `{s}`: bad LO"))?;
            let hi: f64 = parts[1].parse().map_err(|_| format!("grid `{s}`: bad HI"))?;
            let n: usize = parts[2].parse().map_err(|_| format!("grid `{s}`: bad N"))?;
            if !(lo > 0.0 && hi >= lo && n >= 1) {
                return Err(format!("grid `{s}`: need 0 < LO <= HI and N >= 1"));
            }
            return Ok(GridSpec::Log { lo, hi, n });
        }
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            if parts.len() != 3 {
                return Err(format!("grid `{s}`: expected LO:STEP:HI"));
            }
            let lo: f64 = parts[0].parse().map_err(|_| format!("grid `{s}`: bad LO"))?;
            let step: f64 = parts[1].parse().map_err(|_| format!("grid `{s}`: bad STEP"))?;
            let hi: f64 = parts[2].parse().map_err(|_| format!("grid `{s}`: bad HI"))?;
            if !(step > 0.0 && hi >= lo) {
                return Err(format!("grid `{s}`: need STEP > 0 and HI >= LO"));
            }
            return Ok(GridSpec::Range { lo, step, hi });
        }
        let vals: Result<Vec<f64>, _> = s.split(',').map(|p| p.trim().parse::<f64>()).collect();
        match vals {
            Ok(v) if !v.is_empty() => Ok(GridSpec::List(v)),
            _ => Err(format!("grid `{s}`: expected a number list")),
        }
    }

    /// Materialize the grid points.
    pub fn values(&self) -> Vec<f64> {
        match self {
            GridSpec::Range { lo, step, hi } => {
                let mut out = Vec::new();
                let n = ((hi - lo) / step + 1e-9).floor() as usize;
                for i in 0..=n {
                    out.push(lo + step * i as f64);
                }
                out
            }
            GridSpec::Log { lo, hi, n } => {
                if *n == 1 {
                    return vec![*lo];
                }
                let ratio = (hi / lo).ln() / (*n as f64 - 1.0);
                (0..*n).map(|i| lo * (ratio * i as f64).exp()).collect()
            }
            GridSpec::List(v) => v.clone(),
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridSpec::Range { lo, step, hi } => write!(f, "{lo}:{step}:{hi}"),
            GridSpec::Log { lo, hi, n } => write!(f, "log:{lo}:{hi}:{n}"),
            GridSpec::List(v) => {
                let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnsembleKind {
    BlockCoe,
    FullCoe,
    HaarSphereReal,
}

impl EnsembleKind {
    pub fn name(&self) -> &'static str {
        match self {
            EnsembleKind::BlockCoe => "block_coe",
            EnsembleKind::FullCoe => "full_coe",
            EnsembleKind::HaarSphereReal => "haar_sphere_real",
        }
    }
    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "block_coe" => Ok(EnsembleKind::BlockCoe),
            "full_coe" => Ok(EnsembleKind::FullCoe),
            "haar_sphere_real" => Ok(EnsembleKind::HaarSphereReal),
            _ => Err(format!(
                "ensemble `{s}`: expected block_coe, full_coe or haar_sphere_real"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormalizationKind {
    Qubit2j,
    Collective2jPlus1,
}

impl NormalizationKind {
    pub fn name(&self) -> &'static str {
        match self {
            NormalizationKind::Qubit2j => "qubit_2j",
            NormalizationKind::Collective2jPlus1 => "collective_2jplus1",
        }
    }
    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "qubit_2j" => Ok(NormalizationKind::Qubit2j),
            "collective_2jplus1" => Ok(NormalizationKind::Collective2jPlus1),
            _ => Err(format!(
                "normalization `{s}`: expected qubit_2j or collective_2jplus1"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayoutKind {
    Grid,
    Random,
}

impl LayoutKind {
    pub fn name(&self) -> &'static str {
        match self {
            LayoutKind::Grid => "grid",
            LayoutKind::Random => "random",
        }
    }
    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "grid" => Ok(LayoutKind::Grid),
            "random" => Ok(LayoutKind::Random),
            _ => Err(format!("layout `{s}`: expected grid or random")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SectorModeKind {
    Mixed,
    ParityResolved,
}

impl SectorModeKind {
    pub fn name(&self) -> &'static str {
        match self {
            SectorModeKind::Mixed => "mixed",
            SectorModeKind::ParityResolved => "parity_resolved",
        }
    }
    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "mixed" => Ok(SectorModeKind::Mixed),
            "parity_resolved" => Ok(SectorModeKind::ParityResolved),
            _ => Err(format!("sector_mode `{s}`: expected mixed or parity_resolved")),
        }
    }
}

const FRAC_PI_2: f64 = std::f64::consts::FRAC_PI_2;

/// Fully resolved experiment configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    /// 0 means "let the runtime decide".
    pub threads: usize,
    /// Spin quantum number (must be a positive half-integer).
    pub j: f64,
    pub j_list: GridSpec,
    pub k: f64,
    pub p: f64,
    pub theta0: f64,
    pub phi0: f64,
    pub steps: u32,
    pub k_grid: GridSpec,
    pub n_samples: usize,
    pub ensemble: EnsembleKind,
    pub normalization: NormalizationKind,
    pub period: u32,
    pub k_range: (f64, f64),
    pub dk: f64,
    pub n_seeds: usize,
    pub n_orbit_steps: usize,
    pub layout: LayoutKind,
    pub j_min_fit: f64,
    pub k_values: GridSpec,
    pub sector_mode: SectorModeKind,
    pub long_format: bool,
}

impl ExperimentConfig {
    /// Defaults mirroring the reference protocols: (p = pi/2 or 1.7),
    /// start (pi/2, -pi/2), T = 1000 for kick sweeps and the table cells,
    /// T = 500 for j-scaling, chaotic probe point (1.6707, -1.3707).
    pub fn defaults(experiment: Experiment) -> Self {
        let mut cfg = ExperimentConfig {
            experiment,
            seed: 7,
            threads: 0,
            j: 120.0,
            j_list: GridSpec::List(vec![50.0, 120.0]),
            k: 3.0,
            p: FRAC_PI_2,
            theta0: FRAC_PI_2,
            phi0: -FRAC_PI_2,
            steps: 1000,
            k_grid: GridSpec::Range {
                lo: 0.5,
                step: 0.1,
                hi: 6.0,
            },
            n_samples: 1,
            ensemble: EnsembleKind::BlockCoe,
            normalization: NormalizationKind::Qubit2j,
            period: 1,
            k_range: (1.0, 4.0),
            dk: 0.05,
            n_seeds: 60,
            n_orbit_steps: 500,
            layout: LayoutKind::Grid,
            j_min_fit: 10.0,
            k_values: GridSpec::Log {
                lo: 10.0,
                hi: 1000.0,
                n: 50,
            },
            sector_mode: SectorModeKind::Mixed,
            long_format: true,
        };
        match experiment {
            Experiment::Portrait => {}
            Experiment::SweepK => {}
            Experiment::ScalingJ => {
                cfg.k = 2.0;
                cfg.steps = 500;
                cfg.j_list = GridSpec::Log {
                    lo: 10.0,
                    hi: 400.0,
                    n: 20,
                };
            }
            Experiment::Table1 | Experiment::CoeCompare => {
                cfg.k = 10.0;
                cfg.p = 1.7;
            }
            Experiment::EigvecQ => {
                cfg.p = 1.7;
                cfg.j_list = GridSpec::List(vec![1.0, 2.0, 4.0, 6.0, 10.0, 16.0, 25.0]);
                cfg.n_samples = 100;
            }
            Experiment::StabilityScan => {}
        }
        cfg
    }

    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        let parse_f64 = |name: &str, v: &str| -> Result<f64, String> {
            let x: f64 = v
                .parse()
                .map_err(|_| format!("{name} `{v}` is not a number"))?;
            if !x.is_finite() {
                return Err(format!("{name} must be finite"));
            }
            Ok(x)
        };
        match key {
            "name" => {
                let e = Experiment::from_name(v)
                    .ok_or_else(|| format!("unknown experiment `{v}`"))?;
                self.experiment = e;
            }
            "seed" => self.seed = v.parse().map_err(|_| format!("seed `{v}` is not an integer"))?,
            "threads" => {
                self.threads = v
                    .parse()
                    .map_err(|_| format!("threads `{v}` is not an integer"))?
            }
            "j" => self.j = parse_f64("j", v)?,
            "j_list" => self.j_list = GridSpec::parse(v)?,
            "k" => self.k = parse_f64("k", v)?,
            "p" => self.p = parse_f64("p", v)?,
            "theta0" => self.theta0 = parse_f64("theta0", v)?,
            "phi0" => self.phi0 = parse_f64("phi0", v)?,
            "steps" => {
                self.steps = v
                    .parse()
                    .map_err(|_| format!("steps `{v}` is not an integer"))?
            }
            "k_grid" => self.k_grid = GridSpec::parse(v)?,
            "n_samples" => {
                self.n_samples = v
                    .parse()
                    .map_err(|_| format!("n_samples `{v}` is not an integer"))?
            }
            "ensemble" => self.ensemble = EnsembleKind::parse(v)?,
            "normalization" => self.normalization = NormalizationKind::parse(v)?,
            "period" => {
                self.period = v
                    .parse()
                    .map_err(|_| format!("period `{v}` is not an integer"))?
            }
            "k_range" => {
                let parts: Vec<&str> = v.split(':').collect();
                if parts.len() != 2 {
                    return Err(format!("k_range `{v}`: expected LO:HI"));
                }
                self.k_range = (parse_f64("k_range lo", parts[0])?, parse_f64("k_range hi", parts[1])?);
            }
            "dk" => self.dk = parse_f64("dk", v)?,
            "n_seeds" => {
                self.n_seeds = v
                    .parse()
                    .map_err(|_| format!("n_seeds `{v}` is not an integer"))?
            }
            "n_orbit_steps" => {
                self.n_orbit_steps = v
                    .parse()
                    .map_err(|_| format!("n_orbit_steps `{v}` is not an integer"))?
            }
            "layout" => self.layout = LayoutKind::parse(v)?,
            "j_min_fit" => self.j_min_fit = parse_f64("j_min_fit", v)?,
            "k_values" => self.k_values = GridSpec::parse(v)?,
            "sector_mode" => self.sector_mode = SectorModeKind::parse(v)?,
            "long_format" => {
                self.long_format = match v {
                    "true" => true,
                    "false" => false,
                    _ => return Err(format!("long_format `{v}`: expected true or false")),
                }
            }
            _ => return Err(format!("unknown configuration key `{key}`")),
        }
        Ok(())
    }

    /// Parse a sectioned key=value file on top of the given base config.
    /// Sections (`[experiment]`, `[params]`, `[output]`) organize the file;
    /// keys are globally unique. `#` starts a comment.
    pub fn apply_file(&mut self, text: &str) -> Result<(), String> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() || (line.starts_with('[') && line.ends_with(']')) {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| format!("line {}: {}", lineno + 1, e))?;
        }
        Ok(())
    }

    /// Apply `KICKTOP_<KEY>` environment overrides.
    pub fn apply_env(&mut self) -> Result<(), String> {
        for (key, _) in self.key_values() {
            let env_key = format!("KICKTOP_{}", key.to_uppercase());
            if let Ok(value) = std::env::var(&env_key) {
                self.set(key, &value)
                    .map_err(|e| format!("{env_key}: {e}"))?;
            }
        }
        Ok(())
    }

    fn key_values(&self) -> Vec<(&'static str, String)> {
        vec![
            ("seed", format!("{}", self.seed)),
            ("threads", format!("{}", self.threads)),
            ("j", format!("{}", self.j)),
            ("j_list", format!("{}", self.j_list)),
            ("k", format!("{}", self.k)),
            ("p", format!("{}", self.p)),
            ("theta0", format!("{}", self.theta0)),
            ("phi0", format!("{}", self.phi0)),
            ("steps", format!("{}", self.steps)),
            ("k_grid", format!("{}", self.k_grid)),
            ("n_samples", format!("{}", self.n_samples)),
            ("ensemble", self.ensemble.name().to_string()),
            ("normalization", self.normalization.name().to_string()),
            ("period", format!("{}", self.period)),
            ("k_range", format!("{}:{}", self.k_range.0, self.k_range.1)),
            ("dk", format!("{}", self.dk)),
            ("n_seeds", format!("{}", self.n_seeds)),
            ("n_orbit_steps", format!("{}", self.n_orbit_steps)),
            ("layout", self.layout.name().to_string()),
            ("j_min_fit", format!("{}", self.j_min_fit)),
            ("k_values", format!("{}", self.k_values)),
            ("sector_mode", self.sector_mode.name().to_string()),
            ("long_format", format!("{}", self.long_format)),
        ]
    }

    /// Canonical file form of the full configuration.
    pub fn to_file_string(&self) -> String {
        let kv: BTreeMap<&str, String> = self.key_values().into_iter().collect();
        let mut out = String::new();
        out.push_str("[experiment]\n");
        out.push_str(&format!("name = {}\n", self.experiment.name()));
        out.push_str(&format!("seed = {}\n", kv["seed"]));
        out.push_str(&format!("threads = {}\n", kv["threads"]));
        out.push_str("[params]\n");
        for key in [
            "j", "j_list", "k", "p", "theta0", "phi0", "steps", "k_grid", "n_samples",
            "ensemble", "normalization", "period", "k_range", "dk", "n_seeds",
            "n_orbit_steps", "layout", "j_min_fit", "k_values", "sector_mode",
        ] {
            out.push_str(&format!("{key} = {}\n", kv[key]));
        }
        out.push_str("[output]\n");
        out.push_str(&format!("long_format = {}\n", kv["long_format"]));
        out
    }

    /// Parse a complete canonical file (defaults taken from the named
    /// experiment inside it).
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut name = None;
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if let Some((key, value)) = line.split_once('=') {
                if key.trim() == "name" {
                    name = Some(value.trim().to_string());
                }
            }
        }
        let name = name.ok_or("configuration has no `name` key")?;
        let experiment =
            Experiment::from_name(&name).ok_or_else(|| format!("unknown experiment `{name}`"))?;
        let mut cfg = Self::defaults(experiment);
        cfg.apply_file(text)?;
        Ok(cfg)
    }

    /// The spin quantum number, validated as a positive half-integer.
    pub fn spin(&self) -> Result<kicktop::SpinQuantumNumber, String> {
        spin_from_f64(self.j)
    }

    /// The j list as validated spin quantum numbers.
    pub fn spin_list(&self) -> Result<Vec<kicktop::SpinQuantumNumber>, String> {
        self.j_list.values().iter().map(|&v| spin_from_f64(v)).collect()
    }

    /// Validate fields used by the configured experiment.
    pub fn validate(&self) -> Result<(), String> {
        let angles_ok = |theta: f64, phi: f64| -> Result<(), String> {
            if !(0.0..=std::f64::consts::PI).contains(&theta) {
                return Err(format!("theta0 = {theta} outside [0, pi]"));
            }
            if !(phi > -std::f64::consts::PI - 1e-12 && phi <= std::f64::consts::PI + 1e-12) {
                return Err(format!("phi0 = {phi} outside (-pi, pi]"));
            }
            Ok(())
        };
        match self.experiment {
            Experiment::Portrait => {
                if self.n_seeds < 1 {
                    return Err("n_seeds must be at least 1".into());
                }
            }
            Experiment::SweepK => {
                self.spin()?;
                angles_ok(self.theta0, self.phi0)?;
                if self.k_grid.values().is_empty() {
                    return Err("k_grid is empty".into());
                }
                if self.steps < 1 {
                    return Err("steps must be at least 1".into());
                }
            }
            Experiment::ScalingJ => {
                self.scaling_spins()?;
                angles_ok(self.theta0, self.phi0)?;
                if self.steps < 1 {
                    return Err("steps must be at least 1".into());
                }
            }
            Experiment::Table1 | Experiment::CoeCompare => {
                self.spin_list()?;
                angles_ok(self.theta0, self.phi0)?;
                if self.steps < 1 {
                    return Err("steps must be at least 1".into());
                }
                if self.n_samples < 1 {
                    return Err("n_samples must be at least 1".into());
                }
            }
            Experiment::EigvecQ => {
                self.spin_list()?;
                if self.n_samples < 1 {
                    return Err("n_samples must be at least 1".into());
                }
                if self.k_values.values().is_empty() {
                    return Err("k_values is empty".into());
                }
            }
            Experiment::StabilityScan => {
                angles_ok(self.theta0, self.phi0)?;
                if self.period < 1 {
                    return Err("period must be at least 1".into());
                }
                if !(self.k_range.0 < self.k_range.1) {
                    return Err("k_range must satisfy lo < hi".into());
                }
                if self.dk <= 0.0 {
                    return Err("dk must be positive".into());
                }
            }
        }
        Ok(())
    }

    /// The j grid of a scaling run, rounded to half-integers and deduplicated.
    pub fn scaling_spins(&self) -> Result<Vec<kicktop::SpinQuantumNumber>, String> {
        let mut spins = Vec::new();
        for v in self.j_list.values() {
            let tj = (2.0 * v).round();
            if !(tj >= 1.0) {
                return Err(format!("j value {v} is below 1/2"));
            }
            spins.push(
                kicktop::SpinQuantumNumber::from_twice_j(tj as u32)
                    .map_err(|e| e.to_string())?,
            );
        }
        spins.sort();
        spins.dedup();
        if spins.is_empty() {
            return Err("j_list is empty".into());
        }
        Ok(spins)
    }
}

fn spin_from_f64(v: f64) -> Result<kicktop::SpinQuantumNumber, String> {
    let tj = 2.0 * v;
    if !v.is_finite() || (tj - tj.round()).abs() > 1e-9 || tj.round() < 1.0 {
        return Err(format!("j = {v} is not a positive half-integer"));
    }
    kicktop::SpinQuantumNumber::from_twice_j(tj.round() as u32).map_err(|e| e.to_string())
}
