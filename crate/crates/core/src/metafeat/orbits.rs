//! Per-edge orbit counts of connected 3- and 4-node induced graphlets.
//!
//! For an edge `(u, v)` every other node falls in one of four classes:
//! adjacent to both (`T`), to `u` only (`Su`), to `v` only (`Sv`), or to
//! neither (`R`). Each edge orbit is a closed form in the class sizes and the
//! number of edges inside and between the classes, so counting only needs
//! the neighbor lists of nodes in `T ∪ Su ∪ Sv`.

use rand::seq::index;

use crate::graph::Adjacency;
use crate::rng;

/// Number of edge orbits.
pub const N_ORBITS: usize = 12;

/// Edge orbits in output order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(usize)]
pub enum EdgeOrbit {
    /// Edge of an induced 3-node path.
    PathEdge = 0,
    /// Edge of a triangle.
    TriangleEdge,
    /// Outer edge of an induced 4-node path.
    P4End,
    /// Middle edge of an induced 4-node path.
    P4Middle,
    /// Edge of a 3-star.
    StarEdge,
    /// Edge of an induced 4-cycle.
    CycleEdge,
    /// Pendant edge of a tailed triangle.
    TailedTail,
    /// Triangle edge of a tailed triangle not touching the tail's anchor.
    TailedBase,
    /// Triangle edge of a tailed triangle incident to the tail's anchor.
    TailedApex,
    /// Chord of a diamond (joins the two degree-3 nodes).
    DiamondChord,
    /// Rim edge of a diamond.
    DiamondRim,
    /// Edge of a 4-clique.
    CliqueEdge,
}

impl EdgeOrbit {
    pub const ALL: [EdgeOrbit; N_ORBITS] = [
        EdgeOrbit::PathEdge,
        EdgeOrbit::TriangleEdge,
        EdgeOrbit::P4End,
        EdgeOrbit::P4Middle,
        EdgeOrbit::StarEdge,
        EdgeOrbit::CycleEdge,
        EdgeOrbit::TailedTail,
        EdgeOrbit::TailedBase,
        EdgeOrbit::TailedApex,
        EdgeOrbit::DiamondChord,
        EdgeOrbit::DiamondRim,
        EdgeOrbit::CliqueEdge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EdgeOrbit::PathEdge => "p3_edge",
            EdgeOrbit::TriangleEdge => "triangle_edge",
            EdgeOrbit::P4End => "p4_end_edge",
            EdgeOrbit::P4Middle => "p4_mid_edge",
            EdgeOrbit::StarEdge => "star_edge",
            EdgeOrbit::CycleEdge => "c4_edge",
            EdgeOrbit::TailedTail => "tailed_tail_edge",
            EdgeOrbit::TailedBase => "tailed_base_edge",
            EdgeOrbit::TailedApex => "tailed_apex_edge",
            EdgeOrbit::DiamondChord => "diamond_chord_edge",
            EdgeOrbit::DiamondRim => "diamond_rim_edge",
            EdgeOrbit::CliqueEdge => "k4_edge",
        }
    }
}

/// How orbit counts are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OrbitMode {
    #[default]
    Exact,
    /// For edges whose joint neighborhood exceeds `cap` nodes, the per-node
    /// terms are estimated from `cap` nodes sampled without replacement and
    /// rescaled. Set sizes stay exact.
    Sampled { cap: usize, seed: u64 },
}

/// Orbit counts per edge. `edges[i]` is the `i`th edge of the adjacency in
/// lexicographic order; `counts[i][o]` is its count for orbit `o`.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeOrbitCounts {
    pub edges: Vec<(usize, usize)>,
    pub counts: Vec<[f64; N_ORBITS]>,
}

impl EdgeOrbitCounts {
    /// One distribution (over edges) per orbit.
    pub fn distributions(&self) -> Vec<Vec<f64>> {
        (0..N_ORBITS)
            .map(|o| self.counts.iter().map(|c| c[o]).collect())
            .collect()
    }

    pub fn orbit_total(&self, orbit: EdgeOrbit) -> f64 {
        self.counts.iter().map(|c| c[orbit as usize]).sum()
    }

    /// Induced counts of the six connected 4-node graphlets, in the order
    /// path, star, cycle, tailed triangle, diamond, clique.
    pub fn four_node_counts(&self) -> [f64; 6] {
        use EdgeOrbit::*;
        [
            self.orbit_total(P4Middle),
            self.orbit_total(StarEdge) / 3.0,
            self.orbit_total(CycleEdge) / 4.0,
            self.orbit_total(TailedTail),
            self.orbit_total(DiamondChord),
            self.orbit_total(CliqueEdge) / 6.0,
        ]
    }
}

const NONE: u8 = 0;
const IN_T: u8 = 1;
const IN_SU: u8 = 2;
const IN_SV: u8 = 3;
const ENDPOINT: u8 = 4;

/// Counts all 12 edge orbits for every edge of `adj`.
pub fn edge_orbit_counts(adj: &Adjacency, mode: OrbitMode) -> EdgeOrbitCounts {
    let n = adj.n();
    let mut class = vec![NONE; n];
    let edges: Vec<(usize, usize)> = adj.edges().collect();
    let mut counts = Vec::with_capacity(edges.len());
    let mut members: Vec<usize> = Vec::new();

    for (ei, &(u, v)) in edges.iter().enumerate() {
        members.clear();
        class[u] = ENDPOINT;
        class[v] = ENDPOINT;
        for &w in adj.neighbors(u) {
            if class[w] == NONE {
                class[w] = IN_SU;
                members.push(w);
            }
        }
        for &w in adj.neighbors(v) {
            match class[w] {
                NONE => {
                    class[w] = IN_SV;
                    members.push(w);
                }
                IN_SU => class[w] = IN_T,
                _ => {}
            }
        }
        let mut size = [0usize; 4];
        for &w in &members {
            size[class[w] as usize] += 1;
        }
        let (t, su, sv) = (size[IN_T as usize] as f64, size[IN_SU as usize] as f64, size[IN_SV as usize] as f64);

        // Per-node neighbor tallies, summed over (a sample of) the members.
        // links[a][b] = Σ_{w ∈ class a} |N(w) ∩ class b|; outside[a] = Σ_{w ∈ class a} |N(w) ∩ R|
        let mut links = [[0f64; 4]; 4];
        let mut outside = [0f64; 4];
        let (sampled, scale) = match mode {
            OrbitMode::Sampled { cap, seed } if members.len() > cap && cap > 0 => {
                let mut r = rng::seeded(rng::derive(seed, ei as u64));
                let picked: Vec<usize> = index::sample(&mut r, members.len(), cap)
                    .into_iter()
                    .map(|i| members[i])
                    .collect();
                let s = members.len() as f64 / cap as f64;
                (picked, s)
            }
            _ => (members.clone(), 1.0),
        };
        for &w in &sampled {
            let a = class[w] as usize;
            let mut tally = [0usize; 5];
            for &x in adj.neighbors(w) {
                tally[class[x] as usize] += 1;
            }
            for b in 1..4 {
                links[a][b] += tally[b] as f64;
            }
            outside[a] += tally[NONE as usize] as f64;
        }
        if scale != 1.0 {
            for row in links.iter_mut() {
                row.iter_mut().for_each(|x| *x *= scale);
            }
            outside.iter_mut().for_each(|x| *x *= scale);
        }

        let (ti, sui, svi) = (IN_T as usize, IN_SU as usize, IN_SV as usize);
        let inner_t = links[ti][ti] / 2.0;
        let inner_su = links[sui][sui] / 2.0;
        let inner_sv = links[svi][svi] / 2.0;
        let su_sv = links[sui][svi];
        let t_s = links[ti][sui] + links[ti][svi];
        let choose2 = |k: f64| k * (k - 1.0) / 2.0;

        let mut c = [0f64; N_ORBITS];
        c[EdgeOrbit::PathEdge as usize] = su + sv;
        c[EdgeOrbit::TriangleEdge as usize] = t;
        c[EdgeOrbit::P4End as usize] = outside[sui] + outside[svi];
        c[EdgeOrbit::P4Middle as usize] = su * sv - su_sv;
        c[EdgeOrbit::StarEdge as usize] = choose2(su) - inner_su + choose2(sv) - inner_sv;
        c[EdgeOrbit::CycleEdge as usize] = su_sv;
        c[EdgeOrbit::TailedTail as usize] = inner_su + inner_sv;
        c[EdgeOrbit::TailedBase as usize] = outside[ti];
        c[EdgeOrbit::TailedApex as usize] = t * (su + sv) - t_s;
        c[EdgeOrbit::DiamondChord as usize] = choose2(t) - inner_t;
        c[EdgeOrbit::DiamondRim as usize] = t_s;
        c[EdgeOrbit::CliqueEdge as usize] = inner_t;
        counts.push(c);

        class[u] = NONE;
        class[v] = NONE;
        for &w in &members {
            class[w] = NONE;
        }
    }
    EdgeOrbitCounts { edges, counts }
}

/// Normalized frequencies of the six connected 4-node graphlets (path, star,
/// cycle, tailed triangle, diamond, clique); all zeros when there are none.
pub fn four_node_graphlet_frequencies(orbits: &EdgeOrbitCounts) -> [f64; 6] {
    let counts = orbits.four_node_counts();
    let total: f64 = counts.iter().sum();
    if total > 0.0 {
        counts.map(|c| c / total)
    } else {
        [0.0; 6]
    }
}
