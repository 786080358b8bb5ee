use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::field::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integrator {
    /// Integrating-factor (Lawson) RK4: diffusion exact, Hall term RK4.
    IfRk4,
    /// Crank–Nicolson diffusion with a Heun predictor–corrector Hall term.
    ImexCn,
}

impl Integrator {
    pub fn name(self) -> &'static str {
        match self {
            Integrator::IfRk4 => "if_rk4",
            Integrator::ImexCn => "imex_cn",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitCondition {
    Abc,
    /// Uses the config's `q_lo`, `q_hi` and `seed`.
    RandomShells,
    SingleMode([i64; 3]),
    File(PathBuf),
}

impl InitCondition {
    pub fn render(&self) -> String {
        match self {
            InitCondition::Abc => "abc".into(),
            InitCondition::RandomShells => "random_shells".into(),
            InitCondition::SingleMode(k) => format!("single_mode({},{},{})", k[0], k[1], k[2]),
            InitCondition::File(p) => format!("file({})", p.display()),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t == "abc" {
            return Ok(InitCondition::Abc);
        }
        if t == "random_shells" {
            return Ok(InitCondition::RandomShells);
        }
        let inner = |prefix: &str| {
            t.strip_prefix(prefix)
                .and_then(|r| r.strip_prefix('('))
                .and_then(|r| r.strip_suffix(')'))
        };
        if let Some(args) = inner("single_mode") {
            let k: Vec<i64> = args
                .split(',')
                .map(|s| s.trim().parse::<i64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::config("init", format!("bad wavenumber in `{t}`")))?;
            let k: [i64; 3] = k
                .try_into()
                .map_err(|_| Error::config("init", "single_mode needs three integers"))?;
            return Ok(InitCondition::SingleMode(k));
        }
        if let Some(path) = inner("file") {
            return Ok(InitCondition::File(PathBuf::from(path.trim())));
        }
        Err(Error::config(
            "init",
            format!("expected abc, random_shells, single_mode(k1,k2,k3) or file(path), got `{t}`"),
        ))
    }
}

/// Parameters of one EMHD run.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub n: usize,
    pub mu: f64,
    pub d_i: f64,
    pub dt: f64,
    pub t_end: f64,
    pub integrator: Integrator,
    pub init: InitCondition,
    pub seed: u64,
    pub q_lo: i32,
    pub q_hi: i32,
    pub snapshot_every: usize,
    pub cfl_safety: f64,
    pub out_dir: Option<PathBuf>,
}

const KEYS: [&str; 13] = [
    "n",
    "mu",
    "d_i",
    "dt",
    "t_end",
    "integrator",
    "init",
    "seed",
    "q_lo",
    "q_hi",
    "snapshot_every",
    "cfl_safety",
    "out_dir",
];

impl SolverConfig {
    pub fn new(n: usize, mu: f64, d_i: f64, dt: f64, t_end: f64) -> Self {
        SolverConfig {
            n,
            mu,
            d_i,
            dt,
            t_end,
            integrator: Integrator::IfRk4,
            init: InitCondition::Abc,
            seed: 0,
            q_lo: 1,
            q_hi: 3,
            snapshot_every: 1,
            cfl_safety: 0.5,
            out_dir: None,
        }
    }

    pub fn with_init(mut self, init: InitCondition) -> Self {
        self.init = init;
        self
    }

    pub fn with_shells(mut self, q_lo: i32, q_hi: i32, seed: u64) -> Self {
        self.init = InitCondition::RandomShells;
        self.q_lo = q_lo;
        self.q_hi = q_hi;
        self.seed = seed;
        self
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn with_snapshot_every(mut self, every: usize) -> Self {
        self.snapshot_every = every;
        self
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n).map_err(|e| Error::config("n", e.to_string()))
    }

    /// Parameter checks that do not depend on the initial field.
    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        let finite_nonneg = |key: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::config(key, format!("must be finite and >= 0, got {v}")))
            }
        };
        finite_nonneg("mu", self.mu)?;
        finite_nonneg("d_i", self.d_i)?;
        finite_nonneg("t_end", self.t_end)?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::config("dt", format!("must be positive, got {}", self.dt)));
        }
        if self.snapshot_every == 0 {
            return Err(Error::config("snapshot_every", "must be at least 1"));
        }
        if !(self.cfl_safety.is_finite() && self.cfl_safety > 0.0) {
            return Err(Error::config(
                "cfl_safety",
                format!("must be positive, got {}", self.cfl_safety),
            ));
        }
        if self.q_lo < -1 || self.q_hi < self.q_lo {
            return Err(Error::config(
                "q_lo",
                format!("need -1 <= q_lo <= q_hi, got {}..{}", self.q_lo, self.q_hi),
            ));
        }
        Ok(())
    }

    /// Parses flat `key = value` text; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut seen: Vec<(String, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::config(
                    format!("line {}", lineno + 1),
                    format!("expected `key = value`, got `{line}`"),
                ));
            };
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(Error::config(k, "unknown key"));
            }
            if seen.iter().any(|(s, _)| s == k) {
                return Err(Error::config(k, "duplicate key"));
            }
            seen.push((k.to_string(), v.to_string()));
        }
        let get = |k: &str| seen.iter().find(|(s, _)| s == k).map(|(_, v)| v.as_str());
        let need = |k: &'static str| get(k).ok_or_else(|| Error::config(k, "missing required key"));
        fn num<T: std::str::FromStr>(k: &str, v: &str) -> Result<T> {
            v.parse::<T>()
                .map_err(|_| Error::config(k, format!("cannot parse `{v}`")))
        }
        let mut cfg = SolverConfig::new(
            num("n", need("n")?)?,
            num("mu", need("mu")?)?,
            num("d_i", need("d_i")?)?,
            num("dt", need("dt")?)?,
            num("t_end", need("t_end")?)?,
        );
        if let Some(v) = get("integrator") {
            cfg.integrator = match v {
                "if_rk4" => Integrator::IfRk4,
                "imex_cn" => Integrator::ImexCn,
                _ => {
                    return Err(Error::config(
                        "integrator",
                        format!("expected if_rk4 or imex_cn, got `{v}`"),
                    ))
                }
            };
        }
        if let Some(v) = get("init") {
            cfg.init = InitCondition::parse(v)?;
        }
        if let Some(v) = get("seed") {
            cfg.seed = num("seed", v)?;
        }
        if let Some(v) = get("q_lo") {
            cfg.q_lo = num("q_lo", v)?;
        }
        if let Some(v) = get("q_hi") {
            cfg.q_hi = num("q_hi", v)?;
        }
        if let Some(v) = get("snapshot_every") {
            cfg.snapshot_every = num("snapshot_every", v)?;
        }
        if let Some(v) = get("cfl_safety") {
            cfg.cfl_safety = num("cfl_safety", v)?;
        }
        if let Some(v) = get("out_dir") {
            cfg.out_dir = Some(PathBuf::from(v));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical text with every default applied, in a fixed key order.
    /// Reals use the shortest round-trip representation.
    pub fn resolved_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "n = {}", self.n).unwrap();
        writeln!(s, "mu = {:?}", self.mu).unwrap();
        writeln!(s, "d_i = {:?}", self.d_i).unwrap();
        writeln!(s, "dt = {:?}", self.dt).unwrap();
        writeln!(s, "t_end = {:?}", self.t_end).unwrap();
        writeln!(s, "integrator = {}", self.integrator.name()).unwrap();
        writeln!(s, "init = {}", self.init.render()).unwrap();
        writeln!(s, "seed = {}", self.seed).unwrap();
        writeln!(s, "q_lo = {}", self.q_lo).unwrap();
        writeln!(s, "q_hi = {}", self.q_hi).unwrap();
        writeln!(s, "snapshot_every = {}", self.snapshot_every).unwrap();
        writeln!(s, "cfl_safety = {:?}", self.cfl_safety).unwrap();
        if let Some(d) = &self.out_dir {
            writeln!(s, "out_dir = {}", d.display()).unwrap();
        }
        s
    }
}
