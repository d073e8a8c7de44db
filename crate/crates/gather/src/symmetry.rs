//! The dihedral symmetry group of a rectangular grid, automorphisms of a
//! configuration, and the partitivity test that characterises ungatherable
//! symmetric configurations.

use serde::{Deserialize, Serialize};

use crate::grid::{GridDims, Pos, Snapshot};

/// The eight symmetries of a square; on a non-square grid only the first
/// four map the grid to itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SymmetryKind {
    Identity,
    Rot180,
    /// Reflection across the horizontal midline (rows swap).
    ReflectH,
    /// Reflection across the vertical midline (columns swap).
    ReflectV,
    /// Quarter turn mapping (i, j) to (j, n+1-i).
    Rot90,
    Rot270,
    /// Reflection across the main diagonal (transpose).
    ReflectMainDiag,
    /// Reflection across the anti-diagonal.
    ReflectAntiDiag,
}

impl SymmetryKind {
    pub const ALL: [SymmetryKind; 8] = [
        SymmetryKind::Identity,
        SymmetryKind::Rot180,
        SymmetryKind::ReflectH,
        SymmetryKind::ReflectV,
        SymmetryKind::Rot90,
        SymmetryKind::Rot270,
        SymmetryKind::ReflectMainDiag,
        SymmetryKind::ReflectAntiDiag,
    ];

    /// Symmetries that map an m x n grid to itself.
    pub fn applicable(dims: GridDims) -> Vec<SymmetryKind> {
        if dims.is_square() {
            Self::ALL.to_vec()
        } else {
            vec![
                SymmetryKind::Identity,
                SymmetryKind::Rot180,
                SymmetryKind::ReflectH,
                SymmetryKind::ReflectV,
            ]
        }
    }

    pub fn is_rotation(self) -> bool {
        matches!(
            self,
            SymmetryKind::Identity | SymmetryKind::Rot90 | SymmetryKind::Rot180 | SymmetryKind::Rot270
        )
    }

    /// Image grid dimensions (rows and columns swap for quarter turns and
    /// diagonal reflections).
    pub fn out_dims(self, dims: GridDims) -> GridDims {
        match self {
            SymmetryKind::Rot90
            | SymmetryKind::Rot270
            | SymmetryKind::ReflectMainDiag
            | SymmetryKind::ReflectAntiDiag => GridDims {
                rows: dims.cols,
                cols: dims.rows,
            },
            _ => dims,
        }
    }

    pub fn apply(self, dims: GridDims, p: Pos) -> Pos {
        let (m, n) = (dims.rows, dims.cols);
        let (i, j) = (p.row, p.col);
        match self {
            SymmetryKind::Identity => p,
            SymmetryKind::Rot180 => Pos::new(m + 1 - i, n + 1 - j),
            SymmetryKind::ReflectH => Pos::new(m + 1 - i, j),
            SymmetryKind::ReflectV => Pos::new(i, n + 1 - j),
            SymmetryKind::Rot90 => Pos::new(j, m + 1 - i),
            SymmetryKind::Rot270 => Pos::new(n + 1 - j, i),
            SymmetryKind::ReflectMainDiag => Pos::new(j, i),
            SymmetryKind::ReflectAntiDiag => Pos::new(n + 1 - j, m + 1 - i),
        }
    }

    pub fn inverse(self) -> SymmetryKind {
        match self {
            SymmetryKind::Rot90 => SymmetryKind::Rot270,
            SymmetryKind::Rot270 => SymmetryKind::Rot90,
            other => other,
        }
    }

    /// Order of the element in the group.
    pub fn order(self) -> usize {
        match self {
            SymmetryKind::Identity => 1,
            SymmetryKind::Rot90 | SymmetryKind::Rot270 => 4,
            _ => 2,
        }
    }
}

/// Image of a snapshot under a symmetry (dimensions may swap).
pub fn transform_snapshot(snap: &Snapshot, sym: SymmetryKind) -> Snapshot {
    let out_dims = sym.out_dims(snap.dims);
    let mut out = Snapshot::empty(out_dims);
    for p in snap.positions() {
        out.set(sym.apply(snap.dims, p), snap.get(p));
    }
    out
}

/// Non-identity symmetries fixing the configuration pointwise as a multiset.
pub fn automorphisms(snap: &Snapshot) -> Vec<SymmetryKind> {
    SymmetryKind::applicable(snap.dims)
        .into_iter()
        .filter(|&s| s != SymmetryKind::Identity && transform_snapshot(snap, s) == *snap)
        .collect()
}

/// True iff the symmetry partitions the grid nodes into orbits of equal size
/// (i.e. it has no fixed node): reflections across an edge-midline, and
/// rotations whose center is not a node.
pub fn is_partitive_symmetry(dims: GridDims, sym: SymmetryKind) -> bool {
    let (m, n) = (dims.rows, dims.cols);
    match sym {
        SymmetryKind::Identity => false,
        SymmetryKind::ReflectH => m % 2 == 0,
        SymmetryKind::ReflectV => n % 2 == 0,
        SymmetryKind::Rot180 => !(m % 2 == 1 && n % 2 == 1),
        // On a square grid a quarter turn fixes only the center node, which
        // exists exactly when the side is odd.
        SymmetryKind::Rot90 | SymmetryKind::Rot270 => n % 2 == 0,
        // Diagonal reflections fix every node on the diagonal.
        SymmetryKind::ReflectMainDiag | SymmetryKind::ReflectAntiDiag => false,
    }
}

/// A configuration is partitive when some automorphism is partitive; such
/// configurations are provably ungatherable and every policy rejects them.
pub fn is_partitive(snap: &Snapshot) -> bool {
    automorphisms(snap)
        .into_iter()
        .any(|s| is_partitive_symmetry(snap.dims, s))
}

/// Orbit of a node under the cyclic group generated by `sym`.
pub fn orbit(dims: GridDims, sym: SymmetryKind, p: Pos) -> Vec<Pos> {
    let mut out = vec![p];
    let mut cur = sym.apply(dims, p);
    while cur != p {
        out.push(cur);
        cur = sym.apply(dims, cur);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Corner, Snapshot};
    use std::collections::HashSet;

    fn snap_with(dims: (usize, usize), cells: &[(usize, usize, u8)]) -> Snapshot {
        let dims = GridDims::new(dims.0, dims.1).unwrap();
        let mut s = Snapshot::empty(dims);
        for &(r, c, v) in cells {
            s.set(Pos::new(r, c), v);
        }
        s
    }

    #[test]
    fn corner_images() {
        let dims = GridDims::new(4, 6).unwrap();
        let d = dims.corner_pos(Corner::D);
        assert_eq!(SymmetryKind::Rot180.apply(dims, d), Pos::new(4, 6));
        assert_eq!(SymmetryKind::ReflectH.apply(dims, d), Pos::new(4, 1));
        assert_eq!(SymmetryKind::ReflectV.apply(dims, d), Pos::new(1, 6));
        let sq = GridDims::new(4, 4).unwrap();
        assert_eq!(SymmetryKind::Rot90.apply(sq, Pos::new(1, 1)), Pos::new(1, 4));
        assert_eq!(SymmetryKind::ReflectMainDiag.apply(sq, Pos::new(2, 3)), Pos::new(3, 2));
        assert_eq!(SymmetryKind::ReflectAntiDiag.apply(sq, Pos::new(1, 1)), Pos::new(4, 4));
    }

    #[test]
    fn inverse_composes_to_identity() {
        let dims = GridDims::new(5, 5).unwrap();
        for sym in SymmetryKind::ALL {
            for r in 1..=5 {
                for c in 1..=5 {
                    let p = Pos::new(r, c);
                    let q = sym.apply(dims, p);
                    assert_eq!(sym.inverse().apply(sym.out_dims(dims), q), p);
                }
            }
        }
    }

    #[test]
    fn order_matches_iteration() {
        let dims = GridDims::new(6, 6).unwrap();
        for sym in SymmetryKind::ALL {
            let mut k = 1;
            let mut cur: Box<dyn Fn(Pos) -> Pos> = Box::new(move |p| sym.apply(dims, p));
            while (1..=6).any(|r| (1..=6).any(|c| cur(Pos::new(r, c)) != Pos::new(r, c))) {
                let prev = cur;
                cur = Box::new(move |p| sym.apply(dims, prev(p)));
                k += 1;
                assert!(k <= 4);
            }
            assert_eq!(sym.order(), k);
        }
    }

    #[test]
    fn transform_is_bijective_on_counts() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let dims = GridDims::new(4, 4).unwrap();
            let cells: Vec<u8> = (0..16).map(|_| rng.gen_range(0..3)).collect();
            let snap = Snapshot::from_cells(dims, cells);
            for sym in SymmetryKind::ALL {
                let img = transform_snapshot(&snap, sym);
                let mut a: Vec<u8> = snap.cells().to_vec();
                let mut b: Vec<u8> = img.cells().to_vec();
                a.sort_unstable();
                b.sort_unstable();
                assert_eq!(a, b);
                // Round trip through the inverse.
                assert_eq!(transform_snapshot(&img, sym.inverse()), snap);
            }
        }
    }

    #[test]
    fn automorphism_examples() {
        // Rot180-symmetric on 4x4.
        let s = snap_with((4, 4), &[(1, 2, 1), (4, 3, 1), (2, 2, 1), (3, 3, 1)]);
        assert!(automorphisms(&s).contains(&SymmetryKind::Rot180));
        // Asymmetric.
        let a = snap_with((4, 4), &[(1, 2, 1), (2, 4, 1), (3, 1, 1)]);
        assert!(automorphisms(&a).is_empty());
        // Main-diagonal symmetric.
        let d = snap_with((4, 4), &[(1, 3, 1), (3, 1, 1), (2, 2, 1)]);
        assert_eq!(automorphisms(&d), vec![SymmetryKind::ReflectMainDiag]);
    }

    #[test]
    fn automorphism_set_is_closed_under_composition() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        let dims = GridDims::new(4, 4).unwrap();
        for _ in 0..300 {
            let cells: Vec<u8> = (0..16).map(|_| rng.gen_range(0..2)).collect();
            let snap = Snapshot::from_cells(dims, cells);
            let mut auts: HashSet<SymmetryKind> = automorphisms(&snap).into_iter().collect();
            auts.insert(SymmetryKind::Identity);
            for &s in &auts {
                for &t in &auts {
                    // Compose by applying t after s and find the matching kind.
                    let composed = SymmetryKind::ALL
                        .into_iter()
                        .find(|&u| {
                            (1..=4).all(|r| {
                                (1..=4).all(|c| {
                                    let p = Pos::new(r, c);
                                    u.apply(dims, p) == t.apply(dims, s.apply(dims, p))
                                })
                            })
                        })
                        .unwrap();
                    assert!(auts.contains(&composed));
                }
            }
        }
    }

    /// Orbit-counting oracle: a symmetry of order p is partitive iff every
    /// node orbit has exactly p elements.
    fn oracle_partitive(dims: GridDims, sym: SymmetryKind) -> bool {
        if sym == SymmetryKind::Identity {
            return false;
        }
        let p = sym.order();
        for r in 1..=dims.rows {
            for c in 1..=dims.cols {
                if orbit(dims, sym, Pos::new(r, c)).len() != p {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn partitive_symmetry_matches_orbit_oracle() {
        for (m, n) in [(4, 4), (5, 5), (6, 6), (4, 6), (5, 4), (3, 5), (2, 2), (7, 7)] {
            let dims = GridDims::new(m, n).unwrap();
            for sym in SymmetryKind::applicable(dims) {
                assert_eq!(
                    is_partitive_symmetry(dims, sym),
                    oracle_partitive(dims, sym),
                    "{:?} on {}x{}",
                    sym,
                    m,
                    n
                );
            }
        }
    }

    #[test]
    fn partitive_configurations() {
        // Two robots swapped by Rot180 on 4x4: partitive.
        let s = snap_with((4, 4), &[(1, 2, 1), (4, 3, 1)]);
        assert!(is_partitive(&s));
        // Same shape on 5x5: Rot180 fixes the center node, not partitive.
        let t = snap_with((5, 5), &[(1, 2, 1), (5, 4, 1)]);
        assert!(!is_partitive(&t));
        // Vertical-mirror pair on 4x4.
        let v = snap_with((4, 4), &[(2, 1, 1), (2, 4, 1)]);
        assert!(is_partitive(&v));
        // Diagonal symmetry alone is never partitive.
        let d = snap_with((4, 4), &[(1, 3, 1), (3, 1, 1)]);
        assert!(!is_partitive(&d));
        // Asymmetric is never partitive.
        let a = snap_with((4, 4), &[(1, 2, 1), (2, 4, 1), (3, 1, 1)]);
        assert!(!is_partitive(&a));
    }

    #[test]
    fn odd_odd_never_partitive() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let dims = GridDims::new(5, 5).unwrap();
        for _ in 0..500 {
            let cells: Vec<u8> = (0..25).map(|_| rng.gen_range(0..2)).collect();
            assert!(!is_partitive(&Snapshot::from_cells(dims, cells)));
        }
    }
}
