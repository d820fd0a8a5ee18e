use crate::grid_core::{eigenvalues, hessian_at_flat, GridFunction, GridSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct RankReport {
    /// Grid of the interior nodes the ranks refer to.
    pub interior: GridSpec,
    pub ranks: Vec<usize>,
    pub eig_tol: f64,
    pub constant: bool,
    /// Interior nodes (multi-indices in the original grid) with a neighbour of different rank.
    pub interfaces: Vec<Vec<usize>>,
}

/// Rank with the `10 h` threshold.
pub fn rank_field_default(u: &GridFunction) -> RankReport {
    rank_field(u, 10.0 * u.spec().spacing())
}

/// Number of central-Hessian eigenvalues above `eig_tol` at every interior node.
pub fn rank_field(u: &GridFunction, eig_tol: f64) -> RankReport {
    let spec = u.spec();
    let n = spec.dim();
    let interior = spec
        .sub_grid(&vec![1; n], spec.points_per_axis() - 2)
        .expect("grids have at least five points per axis");
    let ranks: Vec<usize> = (0..interior.len())
        .map(|j| {
            let idx: Vec<usize> = interior.multi_index(j).iter().map(|i| i + 1).collect();
            eigenvalues(&hessian_at_flat(u, spec.flat(&idx)))
                .map(|ev| ev.iter().filter(|&&l| l > eig_tol).count())
                .unwrap_or(0)
        })
        .collect();
    let constant = ranks.windows(2).all(|w| w[0] == w[1]);
    let mut interfaces = Vec::new();
    if !constant {
        for j in 0..interior.len() {
            let idx = interior.multi_index(j);
            let differs = (0..n).any(|a| {
                let s = interior.stride(a);
                (idx[a] > 0 && ranks[j - s] != ranks[j])
                    || (idx[a] + 1 < interior.points_per_axis() && ranks[j + s] != ranks[j])
            });
            if differs {
                interfaces.push(idx.iter().map(|i| i + 1).collect());
            }
        }
    }
    RankReport { interior, ranks, eig_tol, constant, interfaces }
}
