//! The printed triple tables for J6_1 and J24_1 against the solver.

mod common;

use common::{golden_rows, perfect_matching, row_deviation, GoldenRow};
use ngcenter::centersolver::{check_triple, solve_all_triples, CenterTriple, SolverConfig};
use ngcenter::neargroup::{catalog_entry, refine_b, NearGroupData};

const PHASE_TOL: f64 = 2e-3;

fn solve(name: &str) -> (NearGroupData, Vec<CenterTriple>) {
    let data = refine_b(&catalog_entry(name).unwrap().build().unwrap()).unwrap();
    let t = solve_all_triples(&data, &SolverConfig::default()).unwrap();
    (data, t)
}

type Keys = Vec<(u32, Vec<u32>)>;

fn key_multiset(rows: &[GoldenRow], triples: &[CenterTriple], m: u32) -> (Keys, Keys) {
    let mut a: Vec<_> = rows.iter().map(|r| (r.k, r.tau.clone())).collect();
    let mut b: Vec<_> = triples
        .iter()
        .map(|t| (t.omega_over(m).unwrap(), t.tau.coords.clone()))
        .collect();
    a.sort();
    b.sort();
    (a, b)
}

fn adjacency(
    rows: &[GoldenRow],
    triples: &[CenterTriple],
    m: u32,
    map: &dyn Fn(&GoldenRow, usize) -> usize,
) -> Vec<Vec<usize>> {
    rows.iter()
        .map(|r| {
            (0..triples.len())
                .filter(|&j| {
                    let t = &triples[j];
                    t.omega_over(m) == Some(r.k)
                        && t.tau.coords == r.tau
                        && row_deviation(r, t, &|g| map(r, g)) < PHASE_TOL
                })
                .collect()
        })
        .collect()
}

#[test]
fn j6_1_matches_table() {
    let (data, triples) = solve("J6_1");
    let rows = golden_rows("j6_1_triples.txt");
    assert_eq!(rows.len(), 27);
    let (a, b) = key_multiset(&rows, &triples, 60);
    assert_eq!(a, b);
    let adj = adjacency(&rows, &triples, 60, &|_, g| g);
    assert!(perfect_matching(&adj, triples.len()).is_some());
    for t in &triples {
        assert!(check_triple(&data, t, 1e-9).passed());
    }
}

/// The J24_1 table lists `ξ(τ − g)` in the slot of `g`.
#[test]
fn j24_1_matches_table_reindexed() {
    let (data, triples) = solve("J24_1");
    let rows = golden_rows("j24_1_triples.txt");
    assert_eq!(rows.len(), 44);
    let (a, b) = key_multiset(&rows, &triples, 48);
    assert_eq!(a, b);
    let g = &data.group;
    let reflect = |r: &GoldenRow, i: usize| -> usize {
        let tau = ngcenter::algebra::GroupElement { coords: r.tau.clone() };
        g.index(&g.add(&tau, &g.neg(&g.element(i))))
    };
    let adj = adjacency(&rows, &triples, 48, &reflect);
    assert!(perfect_matching(&adj, triples.len()).is_some());

    // Read literally, only the four rows invariant under the reflection match.
    let literal = adjacency(&rows, &triples, 48, &|_, i| i);
    let hits: Vec<usize> = (0..rows.len())
        .filter(|&i| !literal[i].is_empty())
        .map(|i| i + 1)
        .collect();
    assert_eq!(hits, vec![25, 26, 37, 38]);
}
