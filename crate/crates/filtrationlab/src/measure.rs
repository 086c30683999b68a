//! Equivalent-measure machinery: density martingales between a base measure
//! and an equivalent one, and the discrete Girsanov transform.

use crate::calculus::{brackets, pathwise_integral, project, square_bracket, stoch_log};
use crate::error::{Error, Result};
use crate::process::{AdaptedProcess, ProcessClass};
use crate::space::{Fil, FiniteFilteredSpace};

/// Density bundle for an equivalent measure P relative to the base measure Q
/// carried by the space: q_t = E_Q[dP/dQ | t] along the tagged filtration,
/// p = 1/q the reverse density, and their stochastic logarithms.
#[derive(Debug, Clone)]
pub struct DensityPair {
    pub q: AdaptedProcess,
    pub p: AdaptedProcess,
    pub q_bar: AdaptedProcess,
    pub p_bar: AdaptedProcess,
}

impl DensityPair {
    /// Builds the bundle from a terminal density candidate (atomwise values
    /// of dP/dQ up to normalization). Equivalence on a finite space with
    /// full support means exactly: every atom value strictly positive.
    pub fn from_terminal(
        space: &FiniteFilteredSpace,
        xi: &[f64],
        fil: Fil,
    ) -> Result<DensityPair> {
        if xi.len() != space.n_atoms() {
            return Err(Error::InvalidParameter(format!(
                "terminal density has {} entries for {} atoms",
                xi.len(),
                space.n_atoms()
            )));
        }
        if let Some(a) = xi.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::NotEquivalent(format!(
                "terminal density is {} on atom {}",
                xi[a], a
            )));
        }
        let mean = space.expect(xi);
        let normalized: Vec<f64> = xi.iter().map(|v| v / mean).collect();
        let terminal = AdaptedProcess::raw(
            vec![normalized; space.horizon + 1],
            fil,
        );
        let q = project(space, &terminal, ProcessClass::Optional, fil, &space.base_weights)?;
        let p = q.map(|v| 1.0 / v);
        let q_bar = stoch_log(&q, None)?;
        let p_bar = stoch_log(&p, None)?;
        Ok(DensityPair { q, p, q_bar, p_bar })
    }

    /// Trivial pair for P = Q.
    pub fn identity(space: &FiniteFilteredSpace, fil: Fil) -> DensityPair {
        DensityPair::from_terminal(space, &vec![1.0; space.n_atoms()], fil)
            .expect("unit density is always valid")
    }

    /// Atom weights representing P: base weight times terminal density.
    /// Expectations of measurable payoffs under P are exactly dot products
    /// against these.
    pub fn p_weights(&self, space: &FiniteFilteredSpace) -> Vec<f64> {
        let last = &self.q.values[space.horizon];
        space
            .base_weights
            .iter()
            .zip(last)
            .map(|(w, q)| w * q)
            .collect()
    }
}

/// Which compensator the transform subtracts: the optional form uses the raw
/// density-weighted bracket q·[p,X]; the predictable form uses the dual
/// predictable projection ⟨p̄,X⟩ computed under P.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GirsanovForm {
    Optional,
    Predictable,
}

/// Turns a P-martingale X into a Q-martingale. Both forms subtract a
/// finite-variation correction; they differ by a Q-martingale, so their
/// Q-predictable parts coincide.
pub fn girsanov_transform(
    space: &FiniteFilteredSpace,
    x: &AdaptedProcess,
    pair: &DensityPair,
    form: GirsanovForm,
) -> Result<AdaptedProcess> {
    if x.filtration != pair.q.filtration {
        return Err(Error::FiltrationMismatch {
            context: "girsanov_transform",
        });
    }
    let correction = match form {
        GirsanovForm::Optional => {
            let px = square_bracket(&pair.p, x);
            pathwise_integral(&pair.q, &px)
        }
        GirsanovForm::Predictable => {
            let p_weights = pair.p_weights(space);
            let (_, angle) = brackets(space, &pair.p_bar, x, &p_weights)?;
            angle
        }
    };
    Ok(x.sub(&correction))
}
