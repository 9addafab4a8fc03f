//! Shared plumbing: flag/config merging, run directories, topology names.
//!
//! Every value a command needs flows through [`Settings`]. Flags win over
//! config file keys so a file can hold the stable experiment description
//! while the command line varies one knob at a time.

use std::fs;
use std::path::{Path, PathBuf};

use cayleycomm::graph::baselines;
use cayleycomm::sim::{BroadcastModel, SimGraph};
use cayleycomm::{Error, GeneratorSet, KvConfig, PoolMode, Result, Topology};

#[derive(Debug, Default)]
pub struct Flags {
    pub n: Option<u32>,
    pub dmax: Option<u32>,
    pub pool: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub trials: Option<u32>,
    pub rates: Option<String>,
    pub steps: Option<u32>,
    pub no_timestamp: bool,
}

pub struct Settings {
    pub kv: KvConfig,
    pub flags: Flags,
}

/// Config keys every command accepts alongside its own.
pub const COMMON_KEYS: &[&str] = &["n", "dmax", "seed", "out", "label"];

/// Extra keys for commands that run on a list of topologies.
pub const TOPOLOGY_KEYS: &[&str] = &["topologies"];

/// Extra keys for commands that build a candidate pool.
pub const POOL_KEYS: &[&str] = &["pool", "pool_file"];

impl Settings {
    pub fn load(config: Option<&Path>, flags: Flags) -> Result<Self> {
        let kv = match config {
            Some(path) => KvConfig::load(path)?,
            None => KvConfig::parse("")?,
        };
        Ok(Self { kv, flags })
    }

    pub fn n(&self) -> Result<u32> {
        match self.opt_n()? {
            Some(n) => Ok(n),
            None => Err(Error::Config(
                "agent count is required; pass --n or set the n key".into(),
            )),
        }
    }

    pub fn opt_n(&self) -> Result<Option<u32>> {
        match self.flags.n {
            Some(n) => Ok(Some(n)),
            None => self.kv.get_u32("n"),
        }
    }

    pub fn dmax(&self) -> Result<u32> {
        match self.opt_dmax()? {
            Some(d) => Ok(d),
            None => Err(Error::Config(
                "degree budget is required; pass --dmax or set the dmax key".into(),
            )),
        }
    }

    pub fn opt_dmax(&self) -> Result<Option<u32>> {
        let dmax = match self.flags.dmax {
            Some(d) => Some(d),
            None => self.kv.get_u32("dmax")?,
        };
        if let Some(d) = dmax {
            if d < 2 {
                return Err(Error::Config(format!(
                    "dmax must be at least 2 to keep the ring connected, got {d}"
                )));
            }
        }
        Ok(dmax)
    }

    /// Offset budget implied by the degree budget: each offset below N/2
    /// spends two degree, so K = floor(dmax / 2).
    pub fn budget(&self) -> Result<usize> {
        Ok((self.dmax()? / 2) as usize)
    }

    pub fn seed(&self) -> Result<u64> {
        match self.flags.seed {
            Some(s) => Ok(Some(s)),
            None => self.kv.get_u64("seed"),
        }
        .map(|s| s.unwrap_or(0))
    }

    pub fn trials(&self) -> Result<Option<u32>> {
        Ok(self.flags.trials)
    }

    pub fn rates(&self) -> Result<Option<Vec<f64>>> {
        match &self.flags.rates {
            Some(raw) => {
                let mut rates = Vec::new();
                for part in raw.split(',') {
                    let part = part.trim();
                    rates.push(part.parse::<f64>().map_err(|_| {
                        Error::Config(format!("rate `{part}` is not a number"))
                    })?);
                }
                Ok(Some(rates))
            }
            None => Ok(None),
        }
    }

    pub fn steps(&self) -> Result<Option<u32>> {
        Ok(self.flags.steps)
    }

    pub fn out_root(&self) -> PathBuf {
        if let Some(out) = &self.flags.out {
            return out.clone();
        }
        match self.kv.get("out") {
            Some(out) => PathBuf::from(out),
            None => PathBuf::from("runs"),
        }
    }

    pub fn pool_mode(&self) -> Result<PoolMode> {
        let choice = self
            .flags
            .pool
            .as_deref()
            .or_else(|| self.kv.get("pool"))
            .unwrap_or("all");
        match choice {
            "all" => Ok(PoolMode::AllCoprime),
            "primes" => Ok(PoolMode::PrimesCoprime),
            "file" => {
                let path = self.kv.get("pool_file").ok_or_else(|| {
                    Error::Config("pool=file needs the pool_file key".into())
                })?;
                Ok(PoolMode::Explicit(read_pool_file(Path::new(path))?))
            }
            other => Err(Error::Config(format!(
                "unknown pool `{other}`; expected all, primes, or file"
            ))),
        }
    }

    /// Comma-separated topology names from the `topologies` key.
    pub fn topology_names(&self, default: &[&str]) -> Vec<String> {
        match self.kv.get("topologies") {
            Some(list) => list
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect(),
            None => default.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Creates <out>/<command>/<label | timestamp | "run">/ and returns it.
    pub fn outdir(&self, command: &str) -> Result<OutDir> {
        let name = match self.kv.get("label") {
            Some(label) if !label.is_empty() => label.to_string(),
            _ if self.flags.no_timestamp => "run".to_string(),
            _ => chrono::Local::now().format("%Y%m%d-%H%M%S").to_string(),
        };
        let path = self.out_root().join(command).join(name);
        fs::create_dir_all(&path)?;
        Ok(OutDir {
            path,
            stamped: !self.flags.no_timestamp,
        })
    }

    /// Key=value pairs shared by every snapshot.
    pub fn common_pairs(&self) -> Result<Vec<(String, String)>> {
        let mut pairs = Vec::new();
        if let Some(n) = self.opt_n()? {
            pairs.push(("n".to_string(), n.to_string()));
        }
        if let Some(d) = self.opt_dmax()? {
            pairs.push(("dmax".to_string(), d.to_string()));
        }
        pairs.push(("seed".to_string(), self.seed()?.to_string()));
        if let Some(label) = self.kv.get("label") {
            pairs.push(("label".to_string(), label.to_string()));
        }
        Ok(pairs)
    }
}

/// One integer offset per line; blank lines and # comments skipped.
fn read_pool_file(path: &Path) -> Result<Vec<u32>> {
    let text = fs::read_to_string(path)?;
    let mut offsets = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        for token in line.split([',', ' ', '\t']).filter(|t| !t.is_empty()) {
            offsets.push(token.parse::<u32>().map_err(|_| {
                Error::Config(format!(
                    "{}:{}: `{token}` is not an offset",
                    path.display(),
                    lineno + 1
                ))
            })?);
        }
    }
    if offsets.is_empty() {
        return Err(Error::Config(format!(
            "pool file {} holds no offsets",
            path.display()
        )));
    }
    Ok(offsets)
}

pub struct OutDir {
    pub path: PathBuf,
    stamped: bool,
}

impl OutDir {
    pub fn write(&self, name: &str, contents: &str) -> Result<()> {
        fs::write(self.path.join(name), contents)?;
        Ok(())
    }

    /// Sorted key=value dump of the effective configuration. Later pairs
    /// override earlier ones with the same key. The generation header is
    /// skipped under --no-timestamp so identical runs produce identical
    /// bytes.
    pub fn write_snapshot(&self, pairs: &[(String, String)]) -> Result<()> {
        let mut merged = std::collections::BTreeMap::new();
        for (key, value) in pairs {
            merged.insert(key.clone(), value.clone());
        }
        let mut text = String::new();
        if self.stamped {
            text.push_str(&format!("# generated {}\n", chrono::Local::now().to_rfc3339()));
        }
        for (key, value) in &merged {
            text.push_str(&format!("{key} = {value}\n"));
        }
        self.write("config.snapshot", &text)
    }
}

/// A named topology a simulation command runs on.
pub struct Named {
    pub name: String,
    pub kind: Kind,
}

pub enum Kind {
    Set(GeneratorSet),
    Broadcast,
}

impl Named {
    pub fn generator_set(&self) -> Option<&GeneratorSet> {
        match &self.kind {
            Kind::Set(gs) => Some(gs),
            Kind::Broadcast => None,
        }
    }

    /// Ring size this topology runs at. Generator sets carry their own
    /// modulus; the broadcast channel has no structure and borrows --n.
    pub fn n(&self, settings: &Settings) -> Result<u32> {
        match &self.kind {
            Kind::Set(gs) => Ok(gs.modulus()),
            Kind::Broadcast => settings.n(),
        }
    }

    /// Gossip view: circulant graph, or the contended collision channel.
    pub fn gossip_topology(&self, settings: &Settings) -> Result<Topology> {
        Ok(match &self.kind {
            Kind::Set(gs) => Topology::Graph(SimGraph::from_generator_set(gs)),
            Kind::Broadcast => Topology::Broadcast {
                n: settings.n()? as usize,
                model: BroadcastModel::collision_contended(),
            },
        })
    }
}

/// Resolves a builtin name or a generator set JSON path.
///
/// Builtins that tile offsets by a rule (fibonacci, prime) need the offset
/// budget from --dmax; expo truncates to the budget when one is given and
/// otherwise grows until the powers of two wrap.
pub fn resolve_topology(settings: &Settings, name: &str) -> Result<Named> {
    let budget = |topology: &str| -> Result<usize> {
        match settings.opt_dmax()? {
            Some(d) => Ok((d / 2) as usize),
            None => Err(Error::Config(format!(
                "topology `{topology}` needs --dmax to size its offset rule"
            ))),
        }
    };
    let kind = match name {
        "expo" => {
            let cap = settings.opt_dmax()?.map(|d| (d / 2) as usize);
            Kind::Set(baselines::expo_generators(settings.n()?, cap)?)
        }
        "fibonacci" => Kind::Set(baselines::fibonacci_generators(settings.n()?, budget(name)?)?),
        "prime" => Kind::Set(baselines::prime_generators(settings.n()?, budget(name)?)?),
        "ring" => Kind::Set(baselines::ring_generators(settings.n()?)?),
        "complete" => Kind::Set(baselines::complete_generators(settings.n()?)?),
        "broadcast" => Kind::Broadcast,
        path if path.ends_with(".json") => {
            let text = fs::read_to_string(path)?;
            Kind::Set(GeneratorSet::from_json(&text)?)
        }
        other => {
            return Err(Error::Config(format!(
                "unknown topology `{other}`; expected expo, fibonacci, prime, ring, \
                 complete, broadcast, or a .json generator set path"
            )))
        }
    };
    let name = match name.strip_suffix(".json") {
        Some(stem) => Path::new(stem)
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| stem.to_string()),
        None => name.to_string(),
    };
    Ok(Named { name, kind })
}
