//! Enumeration caps for the exhaustive routines.

use crate::error::{Error, Result};

/// Default cap for family construction and verification.
pub const DEFAULT_FAMILY_CAP: usize = 20;
/// Default cap for exhaustive optimization and the exact oracle.
pub const DEFAULT_EXACT_CAP: usize = 22;
pub const ENV_OVERRIDE: &str = "WAMLS_MAX_N";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub family_cap: usize,
    pub exact_cap: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { family_cap: DEFAULT_FAMILY_CAP, exact_cap: DEFAULT_EXACT_CAP }
    }
}

impl Limits {
    /// Defaults, with both caps replaced by `WAMLS_MAX_N` when it is set.
    pub fn from_env() -> Self {
        match std::env::var(ENV_OVERRIDE).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
            Some(cap) => Limits { family_cap: cap, exact_cap: cap },
            None => Limits::default(),
        }
    }

    pub fn uniform(cap: usize) -> Self {
        Limits { family_cap: cap, exact_cap: cap }
    }

    pub(crate) fn check_family(&self, what: &'static str, n: usize) -> Result<()> {
        check(what, n, self.family_cap)
    }

    pub(crate) fn check_exact(&self, what: &'static str, n: usize) -> Result<()> {
        check(what, n, self.exact_cap)
    }
}

fn check(what: &'static str, n: usize, cap: usize) -> Result<()> {
    let cap = cap.min(crate::subset::MAX_UNIVERSE);
    if n > cap {
        Err(Error::Resource { what, n, cap })
    } else {
        Ok(())
    }
}
