//! Every tunable number used by the library, in one place.
//!
//! Callers that need reproducible output should record the values they
//! actually ran with; [`Defaults::describe`] gives a flat key/value view.

/// Talbot nodes when nothing else is requested.
pub const TALBOT_NODES: usize = 32;
/// Talbot never runs with fewer nodes than this.
pub const TALBOT_MIN_NODES: usize = 8;
/// Node ladder walked by the adaptive inverter.
pub const TALBOT_LADDER: [usize; 14] = [24, 32, 40, 48, 64, 80, 96, 128, 160, 192, 256, 320, 384, 512];
/// Gaver–Stehfest node ceiling (its coefficients lose all digits beyond).
pub const STEHFEST_MAX_NODES: usize = 18;

/// Target accuracy of the special functions.
pub const SPECFUN_TOL: f64 = 1e-12;
/// Series stop: a term this small relative to the running magnitude ends the sum.
pub const SERIES_STOP: f64 = 1e-17;
/// Maximum number of series terms before giving up.
pub const SERIES_MAX_TERMS: usize = 4000;

/// Tail panels below this magnitude count towards the stopping rule.
pub const TAIL_PANEL_TOL: f64 = 1e-10;
/// Consecutive quiet tail panels needed to stop.
pub const TAIL_PANELS_QUIET: usize = 3;
/// Upper limit for improper composition integrals.
pub const S_MAX: f64 = 1e4;
/// Upper limit for mass/moment integrals of heavy-tailed kernels.
pub const MASS_X_MAX: f64 = 1e60;

/// Abscissae below this are treated as the origin of a subordinator density.
pub const DENSITY_X_FLOOR: f64 = 1e-8;

/// Spectral truncation: `|exp(t F(gamma_max))|` must fall below this.
pub const SPECTRAL_TAIL: f64 = 1e-12;
/// Alias warning threshold for the spectral tail of the integrand.
pub const ALIAS_WARN: f64 = 1e-8;

/// Oscillation index above which importance sampling is refused.
pub const MC_MAX_OSCILLATION: f64 = 1e3;

/// Snapshot of the defaults for provenance headers.
pub struct Defaults;

impl Defaults {
    pub fn describe() -> Vec<(&'static str, String)> {
        vec![
            ("talbot_nodes", TALBOT_NODES.to_string()),
            ("specfun_tol", format!("{SPECFUN_TOL:e}")),
            ("series_stop", format!("{SERIES_STOP:e}")),
            ("tail_panel_tol", format!("{TAIL_PANEL_TOL:e}")),
            ("spectral_tail", format!("{SPECTRAL_TAIL:e}")),
        ]
    }
}
