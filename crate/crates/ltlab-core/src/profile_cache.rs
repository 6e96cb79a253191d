//! On-disk cache of ground-state profiles, keyed by (d, p, Δr, r_max, tol).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{LtError, Result};
use crate::params::ProblemParams;
use crate::radial_nls::{solve_ground_state, RadialProfile, SolveOptions};

pub const CACHE_ENV: &str = "LTLAB_CACHE";

#[derive(Debug, Clone)]
pub struct ProfileCache {
    dir: PathBuf,
}

/// Versioned header line; doubles as the cache key.
pub fn cache_key(params: ProblemParams, opts: &SolveOptions) -> String {
    format!(
        "LTLAB-Q v1 d={} p={} dr={} rmax={} tol={}",
        params.d, params.p, opts.dr, opts.r_max, opts.tol
    )
}

fn file_name(params: ProblemParams, opts: &SolveOptions) -> String {
    format!(
        "Q_d{}_p{}_dr{}_rmax{}_tol{:e}.txt",
        params.d, params.p, opts.dr, opts.r_max, opts.tol
    )
}

impl ProfileCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// Cache rooted at `$LTLAB_CACHE`, if set.
    pub fn from_env() -> Option<Self> {
        std::env::var_os(CACHE_ENV).map(Self::new)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, params: ProblemParams, opts: &SolveOptions) -> PathBuf {
        self.dir.join(file_name(params, opts))
    }

    pub fn load(
        &self,
        params: ProblemParams,
        opts: &SolveOptions,
    ) -> Result<Option<RadialProfile>> {
        let path = self.path_for(params, opts);
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path)?;
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        if header != cache_key(params, opts) {
            return Err(LtError::Cache(format!(
                "header mismatch in {}: {header}",
                path.display()
            )));
        }
        let mut samples = Vec::new();
        for (k, line) in lines.enumerate() {
            let mut cols = line.split_whitespace();
            let (r, q) = match (cols.next(), cols.next()) {
                (Some(r), Some(q)) => (r, q),
                _ => return Err(LtError::Cache(format!("malformed row {}", k + 1))),
            };
            let r: f64 = r
                .parse()
                .map_err(|_| LtError::Cache(format!("bad r on row {}", k + 1)))?;
            let q: f64 = q
                .parse()
                .map_err(|_| LtError::Cache(format!("bad Q on row {}", k + 1)))?;
            if (r - k as f64 * opts.dr).abs() > 1e-9 * (1.0 + r) {
                return Err(LtError::Cache(format!("grid mismatch on row {}", k + 1)));
            }
            samples.push(q);
        }
        if samples.len() != opts.intervals() + 1 {
            return Err(LtError::Cache("row count does not match the grid".into()));
        }
        Ok(Some(RadialProfile::from_samples(
            params, opts.dr, samples, -1.0, 1.0,
        )))
    }

    /// Writes through a temporary file and renames it into place.
    pub fn store(&self, profile: &RadialProfile, opts: &SolveOptions) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path_for(profile.params, opts);
        let tmp = self.dir.join(format!(
            ".{}.{}.tmp",
            file_name(profile.params, opts),
            std::process::id()
        ));
        {
            let mut f = fs::File::create(&tmp)?;
            let mut body = String::with_capacity(48 * profile.len() + 128);
            body.push_str(&cache_key(profile.params, opts));
            body.push('\n');
            for (i, q) in profile.samples.iter().enumerate() {
                body.push_str(&format!("{:.16e} {:.16e}\n", profile.r(i), q));
            }
            f.write_all(body.as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(path)
    }

    pub fn get_or_solve(
        &self,
        params: ProblemParams,
        opts: &SolveOptions,
    ) -> Result<RadialProfile> {
        if let Some(p) = self.load(params, opts)? {
            return Ok(p);
        }
        let prof = solve_ground_state(params, opts)?;
        self.store(&prof, opts)?;
        Ok(prof)
    }
}

/// Solves through the cache when one is given.
pub fn ground_state(
    params: ProblemParams,
    opts: &SolveOptions,
    cache: Option<&ProfileCache>,
) -> Result<RadialProfile> {
    match cache {
        Some(c) => c.get_or_solve(params, opts),
        None => solve_ground_state(params, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ProfileCache::new(dir.path());
        let pp = ProblemParams::new(2, 1.5).unwrap();
        let opts = SolveOptions::default();
        let fresh = cache.get_or_solve(pp, &opts).unwrap();
        let path = cache.path_for(pp, &opts);
        let first_line = fs::read_to_string(&path)
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string();
        assert_eq!(
            first_line,
            "LTLAB-Q v1 d=2 p=1.5 dr=0.004 rmax=40 tol=0.00000001"
        );
        let loaded = cache.load(pp, &opts).unwrap().unwrap();
        assert_eq!(fresh, loaded);
    }

    #[test]
    fn corrupt_header_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ProfileCache::new(dir.path());
        let pp = ProblemParams::new(1, 2.0).unwrap();
        let opts = SolveOptions::default();
        fs::write(cache.path_for(pp, &opts), "LTLAB-Q v0 junk\n").unwrap();
        assert!(matches!(cache.load(pp, &opts), Err(LtError::Cache(_))));
    }
}
