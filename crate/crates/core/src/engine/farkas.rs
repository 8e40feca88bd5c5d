use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::formula::{Atom, LinearTerm, Rational};

/// Nonnegative multipliers over a list of atoms whose weighted sum is a
/// constant contradiction: `0 <= -c` with `c > 0`, or `0 < 0` when a strict
/// atom takes part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FarkasCertificate {
    pub multipliers: Vec<(usize, Rational)>,
    pub strict: bool,
}

impl FarkasCertificate {
    pub(crate) fn from_proof(proof: &BTreeMap<usize, Rational>, atoms: &[Atom]) -> FarkasCertificate {
        let multipliers: Vec<(usize, Rational)> = proof
            .iter()
            .filter(|(_, m)| !m.is_zero())
            .map(|(i, m)| (*i, m.clone()))
            .collect();
        let strict = multipliers.iter().any(|(i, _)| atoms[*i].is_strict());
        FarkasCertificate { multipliers, strict }
    }

    /// Weighted sum of the selected atoms' terms.
    pub fn combination(&self, atoms: &[Atom], select: impl Fn(usize) -> bool) -> LinearTerm {
        let mut sum = LinearTerm::zero();
        for (i, m) in &self.multipliers {
            if select(*i) {
                sum.add_scaled(atoms[*i].term(), m);
            }
        }
        sum
    }

    /// Recomputes the weighted sum with exact arithmetic and checks that it
    /// is a contradiction.
    pub fn verify(&self, atoms: &[Atom]) -> bool {
        if self.multipliers.iter().any(|(i, m)| *i >= atoms.len() || m.is_negative()) {
            return false;
        }
        let strict = self.multipliers.iter().any(|(i, m)| atoms[*i].is_strict() && m.is_positive());
        if strict != self.strict {
            return false;
        }
        let sum = self.combination(atoms, |_| true);
        if !sum.is_constant() {
            return false;
        }
        let c = sum.constant_part();
        c.is_positive() || (strict && c.is_zero())
    }
}
