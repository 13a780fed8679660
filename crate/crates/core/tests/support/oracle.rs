//! Brute-force DBSCAN reference: core points by direct counting, clusters as
//! connected components of the transitive closure of the core-neighbour
//! relation, borders by the lowest-id core neighbour. Works on a plain
//! `Vec<Vec<f64>>` so it shares nothing with the crate's clustering path.

#![allow(dead_code, clippy::needless_range_loop)]

pub struct OracleResult {
    pub core: Vec<bool>,
    /// Lowest core id of the component each point belongs to; `None` = noise.
    pub representative: Vec<Option<usize>>,
}

pub fn brute_force_dbscan(d: &[Vec<f64>], eps: f64, min_samples: usize) -> OracleResult {
    let n = d.len();
    let near = |p: usize, q: usize| d[p][q] <= eps;
    let core: Vec<bool> = (0..n)
        .map(|p| (0..n).filter(|&q| near(p, q)).count() >= min_samples)
        .collect();

    // reach[p][q]: q density-reachable from core p through cores only
    let mut reach = vec![vec![false; n]; n];
    for p in 0..n {
        for q in 0..n {
            reach[p][q] = core[p] && core[q] && near(p, q);
        }
    }
    for k in 0..n {
        for p in 0..n {
            for q in 0..n {
                if reach[p][k] && reach[k][q] {
                    reach[p][q] = true;
                }
            }
        }
    }
    let core_rep = |p: usize| (0..n).find(|&q| reach[p][q]).expect("core reaches itself");

    let representative = (0..n)
        .map(|p| {
            if core[p] {
                Some(core_rep(p))
            } else {
                (0..n).find(|&q| core[q] && near(p, q)).map(core_rep)
            }
        })
        .collect();
    OracleResult {
        core,
        representative,
    }
}

/// Label vectors agree up to renaming: same noise set, and two points share a
/// label exactly when they share a representative.
pub fn same_partition(labels: &[isize], representative: &[Option<usize>]) -> bool {
    let n = labels.len();
    if representative.len() != n {
        return false;
    }
    for p in 0..n {
        if (labels[p] < 0) != representative[p].is_none() {
            return false;
        }
        for q in 0..n {
            if labels[p] >= 0 && labels[q] >= 0 {
                let same_label = labels[p] == labels[q];
                let same_rep = representative[p] == representative[q];
                if same_label != same_rep {
                    return false;
                }
            }
        }
    }
    true
}

/// Symmetric matrix, zero diagonal, entries either on the 0.1 grid (to force
/// ties with grid epsilons) or uniform in [0, 1].
pub fn random_distances<R: rand::Rng>(rng: &mut R, n: usize) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; n]; n];
    let grid = rng.gen_bool(0.5);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = if grid {
                rng.gen_range(0..=10) as f64 / 10.0
            } else {
                rng.gen_range(0.0..=1.0)
            };
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    d
}
