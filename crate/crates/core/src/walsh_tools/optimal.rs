use serde::Serialize;

use crate::error::{Error, Result};
use crate::extension::{dual_vertex_max, solve_min_sup, ExtensionProblem, Method, SolverBudget};
use crate::systems::walsh::ensure_power_of_two;
use crate::systems::{IndexSet, SystemTag};

pub const MAX_SUBSET_N: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalSubset {
    pub n: usize,
    pub c: f64,
    /// `E_N(C)`: the largest `|I|` whose extension constant is at most `C`.
    pub size: usize,
    pub witness: IndexSet,
    /// Extension constant of `witness`.
    pub witness_constant: f64,
    pub orbits_examined: usize,
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        parent[x as usize] = parent[parent[x as usize] as usize];
        x = parent[x as usize];
    }
    x
}

/// Smallest mask of each orbit of `2^{0..N}` under the affine group acting on
/// 0-based indices: XOR translations and elementary transvections
/// `u ↦ u ⊕ (u_i e_j)`. Both act on `span{w_k}` by a unimodular factor or a
/// permutation of cells, so the extension constant is an orbit invariant.
fn orbit_representatives(level: u32) -> Vec<u32> {
    let n = 1usize << level;
    let mut maps: Vec<Vec<usize>> = Vec::new();
    for i in 0..level {
        maps.push((0..n).map(|u| u ^ (1 << i)).collect());
        for j in 0..level {
            if i != j {
                maps.push((0..n).map(|u| u ^ (((u >> i) & 1) << j)).collect());
            }
        }
    }
    let total = 1usize << n;
    let mut parent: Vec<u32> = (0..total as u32).collect();
    for mask in 0..total {
        for map in &maps {
            let mut image = 0usize;
            for (u, &v) in map.iter().enumerate() {
                image |= ((mask >> u) & 1) << v;
            }
            let (a, b) = (find(&mut parent, mask as u32), find(&mut parent, image as u32));
            if a != b {
                // the smaller root survives so every root is its orbit's minimum
                parent[a.max(b) as usize] = a.min(b);
            }
        }
    }
    (0..total as u32).filter(|&m| parent[m as usize] == m).collect()
}

/// Exhaustive `E_N(C)` for the Walsh system with the complement as
/// compensation set. Sizes are scanned upward; the constant only grows when
/// indices are added, so the first size with no feasible orbit ends the scan.
/// Each feasibility value is the exact dual-vertex maximum, confirmed by the
/// LP at its maximizing direction.
pub fn optimal_subset_size(n: usize, c: f64, budget: &SolverBudget) -> Result<OptimalSubset> {
    let level = ensure_power_of_two(n)?;
    if n > MAX_SUBSET_N {
        return Err(Error::invalid(format!(
            "exhaustive subset scan limited to N <= {MAX_SUBSET_N}, got {n}"
        )));
    }
    let reps = orbit_representatives(level);
    let mut best = OptimalSubset {
        n,
        c,
        size: 0,
        witness: IndexSet::empty(n),
        witness_constant: 0.0,
        orbits_examined: 0,
    };
    for size in 1..=n {
        let mut found = None;
        for &mask in reps.iter().filter(|m| m.count_ones() as usize == size) {
            best.orbits_examined += 1;
            let set = IndexSet::from_bits(n, mask as u64);
            let (constant, worst) = dual_vertex_max(&set, n)?;
            let p = ExtensionProblem::with_complement(SystemTag::Walsh, worst, set.clone())?;
            let lp = solve_min_sup(&p, Method::Lp, budget)?;
            if (lp.achieved_sup - constant).abs() > 1e-6 {
                return Err(Error::Internal(format!(
                    "LP {} disagrees with the dual vertex maximum {constant} on {:?}",
                    lp.achieved_sup,
                    set.members()
                )));
            }
            if constant <= c + 1e-6 {
                found = Some((set, constant));
                break;
            }
        }
        match found {
            Some((set, constant)) => {
                best.size = size;
                best.witness = set;
                best.witness_constant = constant;
            }
            None => break,
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orbit_counts_cover_every_subset() {
        // the orbits of the empty and full sets are singletons
        let reps = orbit_representatives(2);
        assert!(reps.contains(&0) && reps.contains(&0b1111));
        assert!(reps.iter().all(|&m| m < 16));
    }

    #[test]
    fn large_constant_admits_everything() {
        for n in [2usize, 4, 8] {
            let r = optimal_subset_size(n, (n as f64).sqrt(), &SolverBudget::default()).unwrap();
            assert_eq!(r.size, n);
        }
    }

    #[test]
    fn constant_one_admits_singletons() {
        let r = optimal_subset_size(4, 1.0, &SolverBudget::default()).unwrap();
        assert!(r.size >= 1);
        assert!(optimal_subset_size(32, 2.0, &SolverBudget::default()).is_err());
    }

    #[test]
    fn doubling_small() {
        let budget = SolverBudget::default();
        let e4 = optimal_subset_size(4, 2.0, &budget).unwrap().size;
        let e8 = optimal_subset_size(8, 2.0, &budget).unwrap().size;
        assert!(2 * e4 >= e8);
    }
}
