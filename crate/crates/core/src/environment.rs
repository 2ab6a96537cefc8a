//! Simulated grid environments.
//!
//! A [`GridEnvironment`] is an immutable instance: data objects with sizes,
//! jobs with input sets, computational nodes (CNs) with speeds, and the two
//! bandwidth tiers (remote SN to local SN over WAN, local SN to CN over LAN).
//! All indices are zero-based. Sizes are kilobytes, bandwidths KB/s, speeds
//! operations per second; 1 MB is 1024 KB.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kilobytes per megabyte.
pub const KB_PER_MB: f64 = 1024.0;

/// Version tag written into every environment document.
pub const ENVIRONMENT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct GridEnvironment {
    object_sizes: Vec<f64>,
    cn_speeds: Vec<f64>,
    gamma: f64,
    /// `[remote][local]`
    wan_bandwidth: Vec<Vec<f64>>,
    /// `[local][cn]`
    lan_bandwidth: Vec<Vec<f64>>,
    hosting: Vec<usize>,
    job_inputs: Vec<Vec<usize>>,
}

impl GridEnvironment {
    /// Builds and validates an environment. Dimensions are taken from the
    /// vector lengths: `D = object_sizes.len()`, `C = cn_speeds.len()`,
    /// `R x L` from `wan_bandwidth`, `J = job_inputs.len()`.
    pub fn new(
        object_sizes: Vec<f64>,
        cn_speeds: Vec<f64>,
        gamma: f64,
        wan_bandwidth: Vec<Vec<f64>>,
        lan_bandwidth: Vec<Vec<f64>>,
        hosting: Vec<usize>,
        job_inputs: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let env = GridEnvironment {
            object_sizes,
            cn_speeds,
            gamma,
            wan_bandwidth,
            lan_bandwidth,
            hosting,
            job_inputs,
        };
        env.validate()?;
        Ok(env)
    }

    fn validate(&self) -> Result<()> {
        let d = self.object_sizes.len();
        let c = self.cn_speeds.len();
        let r = self.wan_bandwidth.len();
        let l = self.wan_bandwidth.first().map_or(0, Vec::len);
        let j = self.job_inputs.len();
        for (name, n) in [
            ("num_objects", d),
            ("num_jobs", j),
            ("num_cns", c),
            ("num_local_sns", l),
            ("num_remote_sns", r),
        ] {
            if n == 0 {
                return Err(Error::parse(name, "dimension must be positive"));
            }
        }
        positive("object_sizes", &self.object_sizes)?;
        positive("cn_speeds", &self.cn_speeds)?;
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::parse("gamma", "must be finite and > 0"));
        }
        for row in &self.wan_bandwidth {
            if row.len() != l {
                return Err(Error::parse("wan_bandwidth", format!("expected {r}x{l} matrix")));
            }
            positive("wan_bandwidth", row)?;
        }
        if self.lan_bandwidth.len() != l {
            return Err(Error::parse(
                "lan_bandwidth",
                format!("expected {l} rows, found {}", self.lan_bandwidth.len()),
            ));
        }
        for row in &self.lan_bandwidth {
            if row.len() != c {
                return Err(Error::parse("lan_bandwidth", format!("expected {l}x{c} matrix")));
            }
            positive("lan_bandwidth", row)?;
        }
        if self.hosting.len() != d {
            return Err(Error::parse(
                "hosting",
                format!("expected {d} entries, found {}", self.hosting.len()),
            ));
        }
        if let Some(&bad) = self.hosting.iter().find(|&&h| h >= r) {
            return Err(Error::parse("hosting", format!("remote SN {bad} out of range 0..{r}")));
        }
        for (job, inputs) in self.job_inputs.iter().enumerate() {
            if inputs.is_empty() {
                return Err(Error::parse(format!("job_inputs[{job}]"), "input set is empty"));
            }
            if let Some(&bad) = inputs.iter().find(|&&o| o >= d) {
                return Err(Error::parse(
                    format!("job_inputs[{job}]"),
                    format!("object {bad} out of range 0..{d}"),
                ));
            }
            let mut sorted = inputs.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != inputs.len() {
                return Err(Error::parse(format!("job_inputs[{job}]"), "duplicate object"));
            }
        }
        Ok(())
    }

    pub fn num_objects(&self) -> usize {
        self.object_sizes.len()
    }

    pub fn num_jobs(&self) -> usize {
        self.job_inputs.len()
    }

    pub fn num_cns(&self) -> usize {
        self.cn_speeds.len()
    }

    pub fn num_local_sns(&self) -> usize {
        self.lan_bandwidth.len()
    }

    pub fn num_remote_sns(&self) -> usize {
        self.wan_bandwidth.len()
    }

    pub fn object_sizes(&self) -> &[f64] {
        &self.object_sizes
    }

    pub fn cn_speeds(&self) -> &[f64] {
        &self.cn_speeds
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn wan_bandwidth(&self) -> &[Vec<f64>] {
        &self.wan_bandwidth
    }

    pub fn lan_bandwidth(&self) -> &[Vec<f64>] {
        &self.lan_bandwidth
    }

    pub fn hosting(&self) -> &[usize] {
        &self.hosting
    }

    pub fn job_inputs(&self, job: usize) -> &[usize] {
        &self.job_inputs[job]
    }

    pub fn all_job_inputs(&self) -> &[Vec<usize>] {
        &self.job_inputs
    }

    /// Total input size of a job in KB.
    pub fn job_input_size(&self, job: usize) -> f64 {
        self.job_inputs[job].iter().map(|&o| self.object_sizes[o]).sum()
    }

    /// WAN staging delay of `object` from its hosting remote SN to `local`.
    pub fn remote_delay(&self, object: usize, local: usize) -> Result<f64> {
        self.check_object(object)?;
        self.check_local(local)?;
        Ok(self.td_remote(object, local))
    }

    /// LAN transfer delay of `object` from `local` to `cn`.
    pub fn local_delay(&self, object: usize, local: usize, cn: usize) -> Result<f64> {
        self.check_object(object)?;
        self.check_local(local)?;
        if cn >= self.num_cns() {
            return Err(Error::domain("CN", cn, self.num_cns()));
        }
        Ok(self.td_local(object, local, cn))
    }

    #[inline]
    pub(crate) fn td_remote(&self, object: usize, local: usize) -> f64 {
        self.object_sizes[object] / self.wan_bandwidth[self.hosting[object]][local]
    }

    #[inline]
    pub(crate) fn td_local(&self, object: usize, local: usize, cn: usize) -> f64 {
        self.object_sizes[object] / self.lan_bandwidth[local][cn]
    }

    fn check_object(&self, object: usize) -> Result<()> {
        if object >= self.num_objects() {
            return Err(Error::domain("object", object, self.num_objects()));
        }
        Ok(())
    }

    fn check_local(&self, local: usize) -> Result<()> {
        if local >= self.num_local_sns() {
            return Err(Error::domain("local SN", local, self.num_local_sns()));
        }
        Ok(())
    }

    pub fn to_document(&self) -> EnvironmentDocument {
        EnvironmentDocument {
            schema_version: ENVIRONMENT_SCHEMA_VERSION,
            num_objects: self.num_objects(),
            num_jobs: self.num_jobs(),
            num_cns: self.num_cns(),
            num_local_sns: self.num_local_sns(),
            num_remote_sns: self.num_remote_sns(),
            object_sizes: self.object_sizes.clone(),
            cn_speeds: self.cn_speeds.clone(),
            gamma: self.gamma,
            wan_bandwidth: self.wan_bandwidth.clone(),
            lan_bandwidth: self.lan_bandwidth.clone(),
            hosting: self.hosting.clone(),
            job_inputs: self.job_inputs.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: EnvironmentDocument = serde_json::from_str(text)?;
        GridEnvironment::try_from(doc)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

fn positive(field: &str, values: &[f64]) -> Result<()> {
    match values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        Some(bad) => Err(Error::parse(field, format!("value {bad} must be finite and > 0"))),
        None => Ok(()),
    }
}

/// On-disk form of a [`GridEnvironment`]. Counts are stored explicitly and
/// cross-checked against the vectors when read back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentDocument {
    pub schema_version: u32,
    pub num_objects: usize,
    pub num_jobs: usize,
    pub num_cns: usize,
    pub num_local_sns: usize,
    pub num_remote_sns: usize,
    pub object_sizes: Vec<f64>,
    pub cn_speeds: Vec<f64>,
    pub gamma: f64,
    pub wan_bandwidth: Vec<Vec<f64>>,
    pub lan_bandwidth: Vec<Vec<f64>>,
    pub hosting: Vec<usize>,
    pub job_inputs: Vec<Vec<usize>>,
}

impl TryFrom<EnvironmentDocument> for GridEnvironment {
    type Error = Error;

    fn try_from(doc: EnvironmentDocument) -> Result<Self> {
        if doc.schema_version != ENVIRONMENT_SCHEMA_VERSION {
            return Err(Error::parse(
                "schema_version",
                format!("unsupported version {}", doc.schema_version),
            ));
        }
        let checks = [
            ("object_sizes", doc.num_objects, doc.object_sizes.len()),
            ("hosting", doc.num_objects, doc.hosting.len()),
            ("job_inputs", doc.num_jobs, doc.job_inputs.len()),
            ("cn_speeds", doc.num_cns, doc.cn_speeds.len()),
            ("wan_bandwidth", doc.num_remote_sns, doc.wan_bandwidth.len()),
            ("lan_bandwidth", doc.num_local_sns, doc.lan_bandwidth.len()),
        ];
        for (field, expected, found) in checks {
            if expected != found {
                return Err(Error::parse(
                    field,
                    format!("dimension mismatch: expected {expected}, found {found}"),
                ));
            }
        }
        if let Some(row) = doc.wan_bandwidth.iter().find(|r| r.len() != doc.num_local_sns) {
            return Err(Error::parse(
                "wan_bandwidth",
                format!("row length {} != num_local_sns {}", row.len(), doc.num_local_sns),
            ));
        }
        GridEnvironment::new(
            doc.object_sizes,
            doc.cn_speeds,
            doc.gamma,
            doc.wan_bandwidth,
            doc.lan_bandwidth,
            doc.hosting,
            doc.job_inputs,
        )
    }
}

/// Closed interval `[min, max]` sampled uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformRange {
    pub min: f64,
    pub max: f64,
}

impl UniformRange {
    pub const fn new(min: f64, max: f64) -> Self {
        UniformRange { min, max }
    }

    pub fn contains(&self, value: f64) -> bool {
        self.min <= value && value <= self.max
    }

    fn check(&self, name: &str) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min > 0.0 && self.min <= self.max)
        {
            return Err(Error::Config(format!(
                "{name}: range [{}, {}] needs 0 < min <= max",
                self.min, self.max
            )));
        }
        Ok(())
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        if self.min == self.max {
            self.min
        } else {
            rng.random_range(self.min..=self.max)
        }
    }
}

/// Inclusive integer interval for the number of inputs per job.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRange {
    pub min: usize,
    pub max: usize,
}

/// Grid sizes from the reference benchmark table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridPreset {
    Small,
    Medium,
    Large,
    /// `J=3, C=2, L=2, R=2, D=3`: small enough for exhaustive search.
    Tiny,
}

impl std::str::FromStr for GridPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "small" | "grid-small" => Ok(GridPreset::Small),
            "medium" | "grid-medium" => Ok(GridPreset::Medium),
            "large" | "grid-large" => Ok(GridPreset::Large),
            "tiny" => Ok(GridPreset::Tiny),
            other => Err(Error::Config(format!("unknown grid preset `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dimensions {
    pub num_objects: usize,
    pub num_jobs: usize,
    pub num_cns: usize,
    pub num_local_sns: usize,
    pub num_remote_sns: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub dimensions: Dimensions,
    /// KB
    pub object_size_range: UniformRange,
    /// KB/s
    pub wan_range: UniformRange,
    /// KB/s
    pub lan_range: UniformRange,
    /// operations per second
    pub cn_speed_range: UniformRange,
    /// operations per KB
    pub gamma: f64,
    pub zipf_exponent: f64,
    pub objects_per_job_range: CountRange,
    pub rng_seed: u64,
}

impl GenerationConfig {
    /// Defaults shared by every preset; only the dimensions differ.
    pub fn with_dimensions(dimensions: Dimensions, rng_seed: u64) -> Self {
        let per_job_max = (2 * dimensions.num_objects)
            .div_ceil(dimensions.num_jobs.max(1))
            .clamp(1, dimensions.num_objects.max(1));
        GenerationConfig {
            dimensions,
            object_size_range: UniformRange::new(50.0 * KB_PER_MB, 1500.0 * KB_PER_MB),
            wan_range: UniformRange::new(700.0, 1300.0),
            lan_range: UniformRange::new(7000.0, 13000.0),
            cn_speed_range: UniformRange::new(500.0, 1500.0),
            gamma: 1.0,
            zipf_exponent: 1.0,
            objects_per_job_range: CountRange {
                min: 1,
                max: per_job_max,
            },
            rng_seed,
        }
    }

    pub fn preset(preset: GridPreset, rng_seed: u64) -> Self {
        let (c, r, l, j, d) = match preset {
            GridPreset::Small => (10, 10, 10, 10, 20),
            GridPreset::Medium => (20, 20, 20, 50, 100),
            GridPreset::Large => (50, 50, 50, 100, 300),
            GridPreset::Tiny => (2, 2, 2, 3, 3),
        };
        Self::with_dimensions(
            Dimensions {
                num_objects: d,
                num_jobs: j,
                num_cns: c,
                num_local_sns: l,
                num_remote_sns: r,
            },
            rng_seed,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let dims = &self.dimensions;
        for (name, n) in [
            ("num_objects", dims.num_objects),
            ("num_jobs", dims.num_jobs),
            ("num_cns", dims.num_cns),
            ("num_local_sns", dims.num_local_sns),
            ("num_remote_sns", dims.num_remote_sns),
        ] {
            if n == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        self.object_size_range.check("object_size_range")?;
        self.wan_range.check("wan_range")?;
        self.lan_range.check("lan_range")?;
        self.cn_speed_range.check("cn_speed_range")?;
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::Config("gamma must be > 0".into()));
        }
        if !(self.zipf_exponent.is_finite() && self.zipf_exponent > 0.0) {
            return Err(Error::Config("zipf_exponent must be > 0".into()));
        }
        let per_job = self.objects_per_job_range;
        if per_job.min == 0 || per_job.min > per_job.max || per_job.max > dims.num_objects {
            return Err(Error::Config(format!(
                "objects_per_job_range [{}, {}] needs 1 <= min <= max <= num_objects",
                per_job.min, per_job.max
            )));
        }
        Ok(())
    }
}

/// Samples an environment. Deterministic for a given `rng_seed`.
pub fn generate(config: &GenerationConfig) -> Result<GridEnvironment> {
    config.validate()?;
    let dims = config.dimensions;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);

    let object_sizes: Vec<f64> = (0..dims.num_objects)
        .map(|_| config.object_size_range.sample(&mut rng))
        .collect();
    let wan_bandwidth: Vec<Vec<f64>> = (0..dims.num_remote_sns)
        .map(|_| {
            (0..dims.num_local_sns)
                .map(|_| config.wan_range.sample(&mut rng))
                .collect()
        })
        .collect();
    let lan_bandwidth: Vec<Vec<f64>> = (0..dims.num_local_sns)
        .map(|_| {
            (0..dims.num_cns)
                .map(|_| config.lan_range.sample(&mut rng))
                .collect()
        })
        .collect();
    let cn_speeds: Vec<f64> = (0..dims.num_cns)
        .map(|_| config.cn_speed_range.sample(&mut rng))
        .collect();
    let hosting: Vec<usize> = (0..dims.num_objects)
        .map(|_| rng.random_range(0..dims.num_remote_sns))
        .collect();

    let zipf = Zipf::new(dims.num_objects as f64, config.zipf_exponent)
        .map_err(|e| Error::Config(format!("zipf: {e}")))?;
    let per_job = config.objects_per_job_range;
    let job_inputs: Vec<Vec<usize>> = (0..dims.num_jobs)
        .map(|_| {
            let count = rng.random_range(per_job.min..=per_job.max);
            let mut inputs = Vec::with_capacity(count);
            while inputs.len() < count {
                // Zipf ranks are 1-based; rank 1 is the most popular object.
                let object = zipf.sample(&mut rng) as usize - 1;
                if !inputs.contains(&object) {
                    inputs.push(object);
                }
            }
            inputs
        })
        .collect();

    GridEnvironment::new(
        object_sizes,
        cn_speeds,
        config.gamma,
        wan_bandwidth,
        lan_bandwidth,
        hosting,
        job_inputs,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn single(size: f64, wan: f64, lan: f64) -> GridEnvironment {
        GridEnvironment::new(
            vec![size],
            vec![1000.0],
            1.0,
            vec![vec![wan]],
            vec![vec![lan]],
            vec![0],
            vec![vec![0]],
        )
        .unwrap()
    }

    #[test]
    fn remote_delay_examples() {
        assert_relative_eq!(single(1400.0, 700.0, 1.0).remote_delay(0, 0).unwrap(), 2.0);
        assert_relative_eq!(single(10240.0, 1024.0, 1.0).remote_delay(0, 0).unwrap(), 10.0);
    }

    #[test]
    fn remote_delay_equal_columns_give_equal_delays() {
        let env = GridEnvironment::new(
            vec![5000.0],
            vec![1.0],
            1.0,
            vec![vec![800.0, 800.0]],
            vec![vec![1.0], vec![1.0]],
            vec![0],
            vec![vec![0]],
        )
        .unwrap();
        assert_eq!(env.remote_delay(0, 0).unwrap(), env.remote_delay(0, 1).unwrap());
    }

    #[test]
    fn local_delay_examples() {
        assert_relative_eq!(single(10240.0, 1.0, 10240.0).local_delay(0, 0, 0).unwrap(), 1.0);
        let d = single(50.0 * 1024.0, 1.0, 13000.0).local_delay(0, 0, 0).unwrap();
        assert_relative_eq!(d, 51200.0 / 13000.0);
        assert!((d - 3.938).abs() < 1e-3);
        let halved = single(50.0 * 1024.0, 1.0, 26000.0).local_delay(0, 0, 0).unwrap();
        assert_relative_eq!(halved, d / 2.0);
    }

    #[test]
    fn delays_reject_out_of_range() {
        let env = single(1.0, 1.0, 1.0);
        assert!(matches!(env.remote_delay(1, 0), Err(Error::Domain { .. })));
        assert!(matches!(env.remote_delay(0, 3), Err(Error::Domain { .. })));
        assert!(matches!(env.local_delay(0, 0, 1), Err(Error::Domain { .. })));
    }

    #[test]
    fn small_preset_respects_dimensions_and_ranges() {
        let cfg = GenerationConfig::preset(GridPreset::Small, 3);
        let env = generate(&cfg).unwrap();
        assert_eq!(
            (env.num_cns(), env.num_remote_sns(), env.num_local_sns(), env.num_jobs(), env.num_objects()),
            (10, 10, 10, 10, 20)
        );
        assert!(env.object_sizes().iter().all(|&s| (51200.0..=1_536_000.0).contains(&s)));
        assert!(env.wan_bandwidth().iter().flatten().all(|&b| (700.0..=1300.0).contains(&b)));
        assert!(env.lan_bandwidth().iter().flatten().all(|&b| (7000.0..=13000.0).contains(&b)));
        assert_eq!(cfg.objects_per_job_range, CountRange { min: 1, max: 4 });
    }

    #[test]
    fn unit_dimensions_force_the_only_choice() {
        let mut cfg = GenerationConfig::with_dimensions(
            Dimensions {
                num_objects: 1,
                num_jobs: 1,
                num_cns: 1,
                num_local_sns: 1,
                num_remote_sns: 1,
            },
            9,
        );
        cfg.objects_per_job_range = CountRange { min: 1, max: 1 };
        let env = generate(&cfg).unwrap();
        assert_eq!(env.job_inputs(0), &[0]);
        assert_eq!(env.hosting(), &[0]);
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = GenerationConfig::preset(GridPreset::Small, 42);
        let a = generate(&cfg).unwrap().to_json().unwrap();
        let b = generate(&cfg).unwrap().to_json().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = GenerationConfig::preset(GridPreset::Small, 1);
        cfg.wan_range = UniformRange::new(10.0, 5.0);
        assert!(matches!(generate(&cfg), Err(Error::Config(_))));

        let mut cfg = GenerationConfig::preset(GridPreset::Small, 1);
        cfg.dimensions.num_jobs = 0;
        assert!(matches!(generate(&cfg), Err(Error::Config(_))));

        let mut cfg = GenerationConfig::preset(GridPreset::Small, 1);
        cfg.zipf_exponent = 0.0;
        assert!(matches!(generate(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn document_rejects_out_of_range_input() {
        let env = generate(&GenerationConfig::preset(GridPreset::Small, 5)).unwrap();
        let mut doc = env.to_document();
        doc.job_inputs[2].push(doc.num_objects);
        let err = GridEnvironment::try_from(doc).unwrap_err();
        match err {
            Error::Parse { field, .. } => assert_eq!(field, "job_inputs[2]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn document_missing_gamma_names_the_field() {
        let env = generate(&GenerationConfig::preset(GridPreset::Tiny, 5)).unwrap();
        let mut value: serde_json::Value = serde_json::from_str(&env.to_json().unwrap()).unwrap();
        value.as_object_mut().unwrap().remove("gamma");
        let err = GridEnvironment::from_json(&value.to_string()).unwrap_err();
        match err {
            Error::Parse { field, .. } => assert_eq!(field, "gamma"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn document_dimension_mismatch() {
        let env = generate(&GenerationConfig::preset(GridPreset::Tiny, 5)).unwrap();
        let mut doc = env.to_document();
        doc.num_cns = 7;
        match GridEnvironment::try_from(doc).unwrap_err() {
            Error::Parse { field, .. } => assert_eq!(field, "cn_speeds"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
