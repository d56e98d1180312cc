//! Spin-½ operators and Heisenberg + Zeeman Hamiltonians on small registers.
//!
//! Product-basis convention: site 0 is the most significant bit of the basis
//! index, and a clear bit is spin up. For three sites the index of
//! `|↑↑↓⟩` is `0b001 = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexMatrix, HermitianOperator, C64, ZERO};

/// Idle exchange coupling inside a logical qubit; the energy unit.
pub const IDLE_COUPLING: f64 = 1.0;

/// Field that maximizes the logical-subspace gap of an idle triple.
pub const OPTIMAL_FIELD: f64 = 0.75;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    fn half_pauli(self) -> ComplexMatrix {
        let h = 0.5;
        let data = match self {
            Axis::X => [ZERO, C64::new(h, 0.0), C64::new(h, 0.0), ZERO],
            Axis::Y => [ZERO, C64::new(0.0, -h), C64::new(0.0, h), ZERO],
            Axis::Z => [C64::new(h, 0.0), ZERO, ZERO, C64::new(-h, 0.0)],
        };
        ComplexMatrix::from_vec(2, 2, data.to_vec()).expect("2x2 literal")
    }
}

#[inline]
pub(crate) fn site_mask(n_sites: usize, site: usize) -> usize {
    1 << (n_sites - 1 - site)
}

/// 2·S_z of a product-basis state: (#up − #down).
#[inline]
pub(crate) fn twice_sz(n_sites: usize, index: usize) -> i32 {
    n_sites as i32 - 2 * index.count_ones() as i32
}

fn check_site(n_sites: usize, site: usize) -> Result<()> {
    if site >= n_sites {
        Err(Error::SiteOutOfRange { site, n_sites })
    } else {
        Ok(())
    }
}

/// S_axis = σ_axis/2 acting on `site`, identity elsewhere.
pub fn spin_operator(n_sites: usize, site: usize, axis: Axis) -> Result<HermitianOperator> {
    check_site(n_sites, site)?;
    let id = ComplexMatrix::identity(2);
    let local = axis.half_pauli();
    let mut m = ComplexMatrix::identity(1);
    for s in 0..n_sites {
        m = kron(&m, if s == site { &local } else { &id });
    }
    HermitianOperator::new(m)
}

/// Σᵢ S_axisⁱ.
pub fn total_spin(n_sites: usize, axis: Axis) -> HermitianOperator {
    let dim = 1 << n_sites;
    let mut total = HermitianOperator::zeros(dim);
    for site in 0..n_sites {
        total = total.add(&spin_operator(n_sites, site, axis).expect("site in range"));
    }
    total
}

/// Adds J·(S⃗ᵢ·S⃗ⱼ) into `m`, working directly on bit patterns.
fn add_exchange(m: &mut ComplexMatrix, n_sites: usize, i: usize, j: usize, coupling: f64) {
    let mi = site_mask(n_sites, i);
    let mj = site_mask(n_sites, j);
    for x in 0..(1usize << n_sites) {
        let aligned = (x & mi == 0) == (x & mj == 0);
        if aligned {
            m[(x, x)] += 0.25 * coupling;
        } else {
            m[(x, x)] -= 0.25 * coupling;
            m[(x ^ mi ^ mj, x)] += 0.5 * coupling;
        }
    }
}

/// S⃗ᵢ·S⃗ⱼ on an `n_sites` register.
pub fn exchange_term(n_sites: usize, i: usize, j: usize) -> Result<HermitianOperator> {
    check_site(n_sites, i)?;
    check_site(n_sites, j)?;
    if i == j {
        return Err(Error::InvalidEdge {
            i,
            j,
            reason: "exchange needs two distinct sites".into(),
        });
    }
    let dim = 1 << n_sites;
    let mut m = ComplexMatrix::zeros(dim, dim);
    add_exchange(&mut m, n_sites, i, j, 1.0);
    HermitianOperator::new(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub coupling: f64,
}

/// Exchange couplings on a register of spins in a uniform field.
///
/// Edges are stored with `i < j`, sorted, without duplicates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingGraph {
    n_sites: usize,
    edges: Vec<Edge>,
    field: f64,
}

impl CouplingGraph {
    /// Largest register the dense machinery is meant for.
    pub const MAX_SITES: usize = 10;

    pub fn new(
        n_sites: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
        field: f64,
    ) -> Result<Self> {
        if n_sites == 0 || n_sites > Self::MAX_SITES {
            return Err(Error::Precondition(format!(
                "site count must be in 1..={}, got {n_sites}",
                Self::MAX_SITES
            )));
        }
        if !field.is_finite() {
            return Err(Error::Precondition(format!(
                "field must be finite, got {field}"
            )));
        }
        let mut graph = Self {
            n_sites,
            edges: Vec::new(),
            field,
        };
        for (i, j, coupling) in edges {
            let (a, b) = graph.check_edge(i, j, coupling)?;
            if graph.edges.iter().any(|e| e.i == a && e.j == b) {
                return Err(Error::InvalidEdge {
                    i,
                    j,
                    reason: "duplicate edge".into(),
                });
            }
            graph.edges.push(Edge {
                i: a,
                j: b,
                coupling,
            });
        }
        graph.edges.sort_by_key(|e| (e.i, e.j));
        Ok(graph)
    }

    /// One logical qubit: an equilateral triangle of idle couplings.
    pub fn idle_triple(field: f64) -> Self {
        Self::new(
            3,
            [
                (0, 1, IDLE_COUPLING),
                (0, 2, IDLE_COUPLING),
                (1, 2, IDLE_COUPLING),
            ],
            field,
        )
        .expect("valid literal graph")
    }

    /// Two idle triangles (sites 0–2 and 3–5) joined by a single 0–3 bond.
    ///
    /// The 0–3 edge is always present, with zero coupling when idle, so that
    /// pulse segments can interpolate it.
    pub fn idle_pair(j14: f64, field: f64) -> Result<Self> {
        let j = IDLE_COUPLING;
        Self::new(
            6,
            [
                (0, 1, j),
                (0, 2, j),
                (1, 2, j),
                (3, 4, j),
                (3, 5, j),
                (4, 5, j),
                (0, 3, j14),
            ],
            field,
        )
    }

    fn check_edge(&self, i: usize, j: usize, coupling: f64) -> Result<(usize, usize)> {
        if i >= self.n_sites || j >= self.n_sites {
            return Err(Error::InvalidEdge {
                i,
                j,
                reason: format!("register has {} sites", self.n_sites),
            });
        }
        if i == j {
            return Err(Error::InvalidEdge {
                i,
                j,
                reason: "self-coupling".into(),
            });
        }
        if !coupling.is_finite() {
            return Err(Error::InvalidEdge {
                i,
                j,
                reason: format!("non-finite coupling {coupling}"),
            });
        }
        Ok((i.min(j), i.max(j)))
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn field(&self) -> f64 {
        self.field
    }

    /// Coupling on (i, j), zero when the edge is absent.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (i.min(j), i.max(j));
        self.edges
            .iter()
            .find(|e| e.i == a && e.j == b)
            .map_or(0.0, |e| e.coupling)
    }

    /// Sets or inserts the (i, j) coupling.
    pub fn with_coupling(mut self, i: usize, j: usize, coupling: f64) -> Result<Self> {
        let (a, b) = self.check_edge(i, j, coupling)?;
        match self.edges.iter_mut().find(|e| e.i == a && e.j == b) {
            Some(e) => e.coupling = coupling,
            None => {
                self.edges.push(Edge {
                    i: a,
                    j: b,
                    coupling,
                });
                self.edges.sort_by_key(|e| (e.i, e.j));
            }
        }
        Ok(self)
    }

    pub fn with_field(mut self, field: f64) -> Result<Self> {
        if !field.is_finite() {
            return Err(Error::Precondition(format!(
                "field must be finite, got {field}"
            )));
        }
        self.field = field;
        Ok(self)
    }

    /// Same register, field and edge list (couplings may differ).
    pub fn same_topology(&self, other: &Self) -> bool {
        self.n_sites == other.n_sites
            && self.field == other.field
            && self.edges.len() == other.edges.len()
            && self
                .edges
                .iter()
                .zip(&other.edges)
                .all(|(a, b)| a.i == b.i && a.j == b.j)
    }

    /// Edge-wise interpolation `(1 − s)·self + s·other`; topologies must match.
    pub fn interpolate(&self, other: &Self, s: f64) -> Self {
        debug_assert!(self.same_topology(other));
        let edges = self
            .edges
            .iter()
            .zip(&other.edges)
            .map(|(a, b)| Edge {
                i: a.i,
                j: a.j,
                coupling: a.coupling + s * (b.coupling - a.coupling),
            })
            .collect();
        Self {
            n_sites: self.n_sites,
            edges,
            field: self.field,
        }
    }
}

/// Σ J_ij S⃗ᵢ·S⃗ⱼ − h Σᵢ S_zⁱ.
pub fn build_hamiltonian(graph: &CouplingGraph) -> HermitianOperator {
    let n = graph.n_sites;
    let dim = graph.dim();
    let mut m = ComplexMatrix::zeros(dim, dim);
    for e in &graph.edges {
        if e.coupling != 0.0 {
            add_exchange(&mut m, n, e.i, e.j, e.coupling);
        }
    }
    if graph.field != 0.0 {
        for x in 0..dim {
            m[(x, x)] -= 0.5 * graph.field * twice_sz(n, x) as f64;
        }
    }
    HermitianOperator::new(m).expect("exchange and Zeeman terms are Hermitian")
}

/// Product-basis states sharing one total S_z.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SectorBasis {
    /// 2·S_z, so half-integer magnetizations stay integral.
    pub twice_m: i32,
    /// Ascending product-basis indices.
    pub indices: Vec<usize>,
}

impl SectorBasis {
    pub fn m(&self) -> f64 {
        self.twice_m as f64 / 2.0
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// The block of `h` acting inside this sector.
    pub fn restrict(&self, h: &HermitianOperator) -> HermitianOperator {
        HermitianOperator::new(h.matrix().submatrix(&self.indices, &self.indices))
            .expect("principal submatrix of a Hermitian matrix")
    }

    /// Sector coordinates of a full-space vector (components outside are dropped).
    pub fn restrict_vector(&self, v: &[C64]) -> Vec<C64> {
        self.indices.iter().map(|&k| v[k]).collect()
    }

    pub fn embed_vector(&self, v: &[C64], dim: usize) -> Vec<C64> {
        let mut out = vec![ZERO; dim];
        for (&k, &a) in self.indices.iter().zip(v) {
            out[k] = a;
        }
        out
    }
}

/// Magnetization sectors of an `n_sites` register, from m = n/2 downwards.
pub fn sz_sectors(n_sites: usize) -> Vec<SectorBasis> {
    (0..=n_sites)
        .map(|down| {
            let indices = (0..(1usize << n_sites))
                .filter(|x| x.count_ones() as usize == down)
                .collect();
            SectorBasis {
                twice_m: n_sites as i32 - 2 * down as i32,
                indices,
            }
        })
        .collect()
}

/// The sector with the given 2·S_z.
pub fn sz_sector(n_sites: usize, twice_m: i32) -> Result<SectorBasis> {
    let down = n_sites as i32 - twice_m;
    if down < 0 || down % 2 != 0 || down / 2 > n_sites as i32 {
        return Err(Error::Precondition(format!(
            "no S_z = {}/2 sector for {n_sites} sites",
            twice_m
        )));
    }
    let down = (down / 2) as usize;
    let indices = (0..(1usize << n_sites))
        .filter(|x| x.count_ones() as usize == down)
        .collect();
    Ok(SectorBasis { twice_m, indices })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm_minus_i_h_t, hermitian_eig, I, ONE};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn spectrum(g: &CouplingGraph) -> Vec<f64> {
        hermitian_eig(&build_hamiltonian(g)).unwrap().eigenvalues
    }

    /// Equal-coupling triangle: (J/2)(S(S+1) − 9/4) − h·m over the multiplets
    /// S = 1/2 (twice) and S = 3/2.
    fn casimir_triangle(j: f64, h: f64) -> Vec<f64> {
        let mut levels = Vec::new();
        for (s, copies) in [(0.5, 2), (1.5, 1)] {
            for _ in 0..copies {
                let mut m = -s;
                while m <= s + 1e-12 {
                    levels.push(0.5 * j * (s * (s + 1.0) - 2.25) - h * m);
                    m += 1.0;
                }
            }
        }
        levels.sort_by(f64::total_cmp);
        levels
    }

    #[test]
    fn spin_operator_placement() {
        let sz = spin_operator(1, 0, Axis::Z).unwrap();
        assert_eq!(sz, HermitianOperator::from_real_diagonal(&[0.5, -0.5]));
        let sz1 = spin_operator(2, 1, Axis::Z).unwrap();
        assert_eq!(
            sz1,
            HermitianOperator::from_real_diagonal(&[0.5, -0.5, 0.5, -0.5])
        );
        assert!(matches!(
            spin_operator(2, 2, Axis::X),
            Err(Error::SiteOutOfRange { .. })
        ));
    }

    #[test]
    fn spin_commutation_relation() {
        for site in 0..3 {
            let x = spin_operator(3, site, Axis::X).unwrap();
            let y = spin_operator(3, site, Axis::Y).unwrap();
            let z = spin_operator(3, site, Axis::Z).unwrap();
            let lhs = x.matrix().commutator(y.matrix());
            assert!((&lhs - &z.matrix().scale(I)).max_abs() <= 1e-12);
        }
    }

    #[test]
    fn exchange_matches_spin_products() {
        for (n, i, j) in [(2, 0, 1), (3, 0, 2), (4, 3, 1), (6, 0, 3)] {
            let direct = exchange_term(n, i, j).unwrap();
            let mut oracle = ComplexMatrix::zeros(1 << n, 1 << n);
            for axis in Axis::ALL {
                let a = spin_operator(n, i, axis).unwrap();
                let b = spin_operator(n, j, axis).unwrap();
                oracle = &oracle + &a.matrix().matmul(b.matrix());
            }
            assert!((direct.matrix() - &oracle).max_abs() <= 1e-15);
            assert_eq!(direct.matrix().trace(), ZERO);
        }
    }

    #[test]
    fn exchange_singlet_triplet_and_swap() {
        let s = hermitian_eig(&exchange_term(2, 0, 1).unwrap()).unwrap();
        assert_eq!(s.eigenvalues, vec![-0.75, 0.25, 0.25, 0.25]);

        // exp(−iπ(S⃗ᵢ·S⃗ⱼ + 1/4)) vs the explicit permutation of sites 0 and 2
        let n = 3;
        let h = exchange_term(n, 0, 2).unwrap().shift(0.25);
        let u = expm_minus_i_h_t(&h, PI).unwrap();
        let swap = ComplexMatrix::from_fn(8, 8, |r, c| {
            let b = |x: usize, s: usize| (x >> (n - 1 - s)) & 1;
            let swapped = (b(c, 2) << 2) | (b(c, 1) << 1) | b(c, 0);
            if r == swapped {
                ONE
            } else {
                ZERO
            }
        });
        // global phase from the first nonzero entry
        let phase = u.matrix()[(0, 0)] / swap[(0, 0)];
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        assert!((u.matrix() - &swap.scale(phase)).max_abs() <= 1e-9);
        assert!(exchange_term(3, 1, 1).is_err());
        assert!(exchange_term(3, 0, 3).is_err());
    }

    #[test]
    fn graph_validation() {
        assert!(CouplingGraph::new(3, [(0, 0, 1.0)], 0.0).is_err());
        assert!(CouplingGraph::new(3, [(0, 3, 1.0)], 0.0).is_err());
        assert!(CouplingGraph::new(3, [(0, 1, 1.0), (1, 0, 2.0)], 0.0).is_err());
        assert!(CouplingGraph::new(3, [(0, 1, f64::INFINITY)], 0.0).is_err());
        assert!(CouplingGraph::new(3, [(0, 1, 1.0)], f64::NAN).is_err());
        let g = CouplingGraph::new(3, [(2, 1, 0.5), (0, 1, 1.0)], 0.0).unwrap();
        assert_eq!(
            g.edges()[0],
            Edge {
                i: 0,
                j: 1,
                coupling: 1.0
            }
        );
        assert_eq!(
            g.edges()[1],
            Edge {
                i: 1,
                j: 2,
                coupling: 0.5
            }
        );
        assert_eq!(g.coupling(2, 1), 0.5);
        assert_eq!(g.coupling(0, 2), 0.0);
    }

    #[test]
    fn zero_graph_is_zero_matrix() {
        let g = CouplingGraph::new(3, [(0, 1, 0.0), (0, 2, 0.0), (1, 2, 0.0)], 0.0).unwrap();
        assert_eq!(build_hamiltonian(&g).matrix().max_abs(), 0.0);
    }

    #[test]
    fn idle_triple_matches_casimir_formula() {
        let ev = spectrum(&CouplingGraph::idle_triple(0.75));
        let expect = [
            -9.0 / 8.0,
            -9.0 / 8.0,
            -3.0 / 8.0,
            -3.0 / 8.0,
            -3.0 / 8.0,
            3.0 / 8.0,
            9.0 / 8.0,
            15.0 / 8.0,
        ];
        assert_eq!(casimir_triangle(1.0, 0.75), expect.to_vec());
        for (a, b) in ev.iter().zip(expect) {
            assert!((a - b).abs() <= 1e-10, "{ev:?}");
        }
    }

    #[test]
    fn two_idle_triples_ground_quartet() {
        let ev = spectrum(&CouplingGraph::idle_pair(0.0, 0.75).unwrap());
        for e in &ev[..4] {
            assert!((e + 2.25).abs() <= 1e-10);
        }
        assert!(ev[4] > -2.25 + 0.5);
    }

    #[test]
    fn sector_sizes() {
        let sizes: Vec<(i32, usize)> = sz_sectors(3).iter().map(|s| (s.twice_m, s.len())).collect();
        assert_eq!(sizes, vec![(3, 1), (1, 3), (-1, 3), (-3, 1)]);
        let m1 = sz_sectors(6).into_iter().find(|s| s.twice_m == 2).unwrap();
        assert_eq!(m1.len(), 15);
        assert_eq!(sz_sector(6, 2).unwrap(), m1);
        assert!(sz_sector(6, 1).is_err());
        assert_eq!(
            sz_sectors(6).iter().map(SectorBasis::len).sum::<usize>(),
            64
        );
    }

    #[test]
    fn hamiltonian_is_block_diagonal_in_sectors() {
        let h = build_hamiltonian(&CouplingGraph::idle_triple(0.75));
        let sectors = sz_sectors(3);
        let mut worst: f64 = 0.0;
        for a in &sectors {
            for b in &sectors {
                if a.twice_m != b.twice_m {
                    worst = worst.max(h.matrix().submatrix(&a.indices, &b.indices).max_abs());
                }
            }
        }
        assert!(worst <= 1e-15);
    }

    #[test]
    fn uniform_shift_of_triangle_follows_casimir() {
        for shift in [-0.3, 0.1, 0.6] {
            let j = 1.0 + shift;
            let g = CouplingGraph::new(3, [(0, 1, j), (0, 2, j), (1, 2, j)], 0.75).unwrap();
            for (a, b) in spectrum(&g).iter().zip(casimir_triangle(j, 0.75)) {
                assert!((a - b).abs() <= 1e-10);
            }
        }
    }

    fn arb_graph(n: usize) -> impl Strategy<Value = CouplingGraph> {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        (
            prop::collection::vec(-2.0f64..2.0, pairs.len()),
            -1.5f64..1.5,
        )
            .prop_map(move |(js, h)| {
                CouplingGraph::new(n, pairs.iter().zip(js).map(|(&(i, j), c)| (i, j, c)), h)
                    .unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn conserves_total_sz(g in (2usize..6).prop_flat_map(arb_graph)) {
            let h = build_hamiltonian(&g);
            let sz = total_spin(g.n_sites(), Axis::Z);
            prop_assert!(h.matrix().commutator(sz.matrix()).max_abs() <= 1e-12);
        }

        #[test]
        fn pure_exchange_is_su2_symmetric(g in (2usize..6).prop_flat_map(arb_graph)) {
            let g = g.with_field(0.0).unwrap();
            let h = build_hamiltonian(&g);
            for axis in [Axis::X, Axis::Y] {
                let s = total_spin(g.n_sites(), axis);
                prop_assert!(h.matrix().commutator(s.matrix()).max_abs() <= 1e-12);
            }
        }

        #[test]
        fn spectrum_ignores_site_labels(g in arb_graph(4), perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle()) {
            let relabeled = CouplingGraph::new(
                4,
                g.edges().iter().map(|e| (perm[e.i], perm[e.j], e.coupling)),
                g.field(),
            ).unwrap();
            for (a, b) in spectrum(&g).iter().zip(spectrum(&relabeled)) {
                prop_assert!((a - b).abs() <= 1e-10);
            }
        }
    }
}
