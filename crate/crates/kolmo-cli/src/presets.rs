//! Built-in experiment configurations.

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const NAMES: [&str; 6] = [
    "hermite-1d",
    "halfline-even",
    "penalize-sweep-1d",
    "rd-3mode",
    "ch-2mode",
    "ellipsoid-2d-flux",
];

const HERMITE_1D: &str = r#"
name = "hermite-1d"
seed = 1

[space]
lambdas = [0.5]
box_radius = 8.0
cells_per_axis = 400

[solve]
lambda = 1.0
mode = "whole"
rhs = { hermite = [{ axis = 0, coeffs = [0.0, 0.0, 1.0] }] }
"#;

const HALFLINE_EVEN: &str = r#"
name = "halfline-even"
seed = 2

[space]
lambdas = [0.5]
box_radius = 8.0
cells_per_axis = 400

[convex_set]
kind = "halfspace"
direction = [1.0]
offset = 0.0

[solve]
lambda = 1.0
mode = "restricted"
rhs = { hermite = [{ axis = 0, coeffs = [0.0, 0.0, 1.0] }] }
refine = [100, 200, 400]

[sde]
scheme = "reflect"
dt = 1e-3
T = 10.0
paths = 100000
probes = [[-0.25], [-0.75], [-1.5]]

[sde.invariant]
dt = 1e-4
burn_in = 5.0
record = 100.0
paths = 1000
bins = 400
"#;

const PENALIZE_SWEEP_1D: &str = r#"
name = "penalize-sweep-1d"
seed = 3

[space]
lambdas = [2.0]
box_radius = 8.0
cells_per_axis = 400

[convex_set]
kind = "halfspace"
direction = [1.0]
offset = 0.0

[solve]
lambda = 1.0
mode = "restricted"
rhs = { hermite = [{ axis = 0, coeffs = [0.0, 0.0, 9.0, 0.0, 1.0] }] }
alpha_sweep = [1.0, 0.5, 0.25, 0.125, 0.0625]
"#;

const RD_3MODE: &str = r#"
name = "rd-3mode"
seed = 4

[space]
box_radius = 6.0
cells_per_axis = 48

[model]
kind = "rd"
modes = 3
phi = "quartic"

[convex_set]
kind = "halfspace"
direction = [1.0, 0.0, 0.0]
offset = 0.0

[solve]
lambda = 1.0
mode = "restricted"
rhs = { constant = 1.0, hermite = [{ axis = 0, coeffs = [0.0, 0.0, 1.0] }] }
"#;

const CH_2MODE: &str = r#"
name = "ch-2mode"
seed = 5

[space]
box_radius = 6.0
cells_per_axis = 128

[model]
kind = "ch"
modes = 2
phi = "quartic"
alpha = 0.05

[convex_set]
kind = "halfspace"
direction = [1.0, 0.0]
offset = 0.0

[solve]
lambda = 1.0
mode = "penalized"
alpha = 0.05
rhs = { hermite = [{ axis = 0, coeffs = [0.0, 0.0, 1.0] }] }
"#;

const ELLIPSOID_2D_FLUX: &str = r#"
name = "ellipsoid-2d-flux"
seed = 6

[space]
lambdas = [0.5, 0.5]
box_radius = 4.0
cells_per_axis = 400

[convex_set]
kind = "ellipsoid"
alphas = [1.0, 4.0]
radius = 1.0

[solve]
lambda = 1.0
mode = "restricted"
rhs = { hermite = [{ axis = 0, coeffs = [0.0, 0.0, 1.0] }] }
refine = [100, 200, 400]
"#;

pub fn text(name: &str) -> Option<&'static str> {
    Some(match name {
        "hermite-1d" => HERMITE_1D,
        "halfline-even" => HALFLINE_EVEN,
        "penalize-sweep-1d" => PENALIZE_SWEEP_1D,
        "rd-3mode" => RD_3MODE,
        "ch-2mode" => CH_2MODE,
        "ellipsoid-2d-flux" => ELLIPSOID_2D_FLUX,
        _ => return None,
    })
}

pub fn load(name: &str) -> Result<ExperimentConfig, CliError> {
    let t = text(name).ok_or_else(|| {
        CliError::Config(format!("unknown preset `{name}`; available: {}", NAMES.join(", ")))
    })?;
    ExperimentConfig::parse(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses() {
        for n in NAMES {
            let c = load(n).unwrap();
            assert_eq!(c.name.as_deref(), Some(n));
            // the echo round-trips
            assert_eq!(ExperimentConfig::parse(&c.to_toml()).unwrap(), c);
        }
        assert!(load("nope").is_err());
    }
}
