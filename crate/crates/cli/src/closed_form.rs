//! Harvested three- and five-point rows against their textbook closed forms.
//!
//! Unit spacing throughout. With wave speed `a = -1` the Courant number
//! `nu = -a dt / h` equals `dt`, and the diffusion number `mu = nu dt / h^2`
//! equals `dt` for unit viscosity.

use anyhow::Result;
use lmep::harvest::harvest_propagator;
use lmep::{local_operator, LinearOperatorSpec};

use crate::table::Table;

pub const PARAMETERS: [f64; 4] = [0.1, 0.5, 0.9, 1.3];

pub fn lax_wendroff(nu: f64) -> Vec<f64> {
    vec![nu * (nu - 1.0) / 2.0, 1.0 - nu * nu, nu * (nu + 1.0) / 2.0]
}

/// Row of the last node of a three-point stencil.
pub fn beam_warming(nu: f64) -> Vec<f64> {
    vec![nu * (nu + 1.0) / 2.0, -nu * (nu + 2.0), (nu + 1.0) * (nu + 2.0) / 2.0]
}

pub fn ftcs(mu: f64) -> Vec<f64> {
    vec![mu, 1.0 - 2.0 * mu, mu]
}

pub fn five_point_diffusion(mu: f64) -> Vec<f64> {
    let outer = -mu / 12.0 + mu * mu / 2.0;
    let inner = 4.0 * mu / 3.0 - 2.0 * mu * mu;
    let centre = 1.0 - 5.0 * mu / 2.0 + 3.0 * mu * mu;
    vec![outer, inner, centre, inner, outer]
}

/// One row per weight: family, parameter, entry, harvested, closed form, |difference|.
pub fn comparison() -> Result<Table> {
    let x3 = [-1.0, 0.0, 1.0];
    let x5 = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let adv = local_operator(&x3, &LinearOperatorSpec::advection(-1.0))?;
    let diff3 = local_operator(&x3, &LinearOperatorSpec::diffusion(1.0))?;
    let diff5 = local_operator(&x5, &LinearOperatorSpec::diffusion(1.0))?;

    let mut table = Table::new(&["family", "parameter", "entry", "harvested", "closed_form", "abs_diff"]);
    for p in PARAMETERS {
        let cases = [
            ("lax-wendroff", harvest_propagator(&adv, p, 1)?, lax_wendroff(p)),
            ("beam-warming", harvest_propagator(&adv, p, 2)?, beam_warming(p)),
            ("ftcs", harvest_propagator(&diff3, p, 1)?, ftcs(p)),
            ("five-point", harvest_propagator(&diff5, p, 2)?, five_point_diffusion(p)),
        ];
        for (family, got, want) in cases {
            for (j, (g, w)) in got.iter().zip(&want).enumerate() {
                table.push(vec![family.into(), p.into(), j.into(), (*g).into(), (*w).into(), (g - w).abs().into()]);
            }
        }
    }
    Ok(table)
}
