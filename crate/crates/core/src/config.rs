//! Size guards for operations that can materialize exponentially large objects.

/// Environment variable overriding [`Caps::term_cap`].
pub const TERM_CAP_ENV: &str = "HYPEROBS_TERM_CAP";
/// Environment variable overriding [`Caps::kron_cap`].
pub const KRON_CAP_ENV: &str = "HYPEROBS_KRON_CAP";

/// Materialization limits threaded through tensor and observability code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    /// Maximum number of stored polynomial terms in an observation stack.
    pub term_cap: usize,
    /// Maximum number of entries in any Kronecker-structured vector or matrix.
    pub kron_cap: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            term_cap: 10_000_000,
            kron_cap: 1_000_000,
        }
    }
}

impl Caps {
    /// Defaults, with `HYPEROBS_TERM_CAP` / `HYPEROBS_KRON_CAP` applied when set.
    pub fn from_env() -> Self {
        let mut caps = Caps::default();
        if let Some(v) = read_env(TERM_CAP_ENV) {
            caps.term_cap = v;
        }
        if let Some(v) = read_env(KRON_CAP_ENV) {
            caps.kron_cap = v;
        }
        caps
    }
}

fn read_env(name: &str) -> Option<usize> {
    std::env::var(name).ok()?.trim().parse().ok()
}
