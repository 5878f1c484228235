use kzcocycle::linalg::{nullspace, rank};
use kzcocycle::periodic::{
    check_monodromy, cylinder_decomposition, isotropic_spans, leaf_integral, pole_pair_cycles, random_fixture, Direction, Step,
    SquareTiledCover,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixtures(count: usize, seed: u64) -> Vec<SquareTiledCover> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_fixture(24, &mut rng)).collect()
}

fn dual_cycles(s: &SquareTiledCover) -> Vec<Vec<i64>> {
    let n = s.n();
    let mut bd = vec![vec![0i64; 2 * n]; n];
    for x in 0..n {
        bd[s.h()[x]][x] += 1;
        bd[x][x] -= 1;
        bd[s.v()[x]][n + x] += 1;
        bd[x][n + x] -= 1;
    }
    nullspace(&bd, 2 * n)
}

#[test]
fn topology_is_consistent() {
    for s in fixtures(200, 11) {
        let (_, angles) = s.vertices();
        let chi: i64 = angles.iter().map(|&k| k as i64 - 1).sum();
        assert_eq!(2 * s.cover_genus() as i64 - 2, chi, "{s}");
        let r = s.odd_point_count();
        // Riemann–Hurwitz with r branch points.
        assert_eq!(2 * s.cover_genus() + 2, 4 * s.base_genus() + r, "{s}");
    }
}

#[test]
fn pairing_is_a_perfect_duality() {
    for s in fixtures(100, 12) {
        let primal = nullspace(&s.boundary_matrix(), 2 * s.n());
        let dual = dual_cycles(&s);
        let m: Vec<Vec<i64>> = primal.iter().map(|a| dual.iter().map(|b| s.intersection(a, b)).collect()).collect();
        assert_eq!(rank(&m), 2 * s.cover_genus(), "{s}");
        for f in s.face_boundaries() {
            for b in &dual {
                assert_eq!(s.intersection(&f, b), 0);
            }
        }
        for f in s.dual_face_boundaries() {
            for a in &primal {
                assert_eq!(s.intersection(a, &f), 0);
            }
        }
    }
}

#[test]
fn deck_preserves_pairing() {
    for s in fixtures(100, 13) {
        let primal = nullspace(&s.boundary_matrix(), 2 * s.n());
        let dual = dual_cycles(&s);
        for a in &primal {
            for b in &dual {
                assert_eq!(s.intersection(a, b), s.intersection(&s.sigma_primal(a), &s.sigma_dual(b)));
            }
        }
    }
}

#[test]
fn lemma_invariants_hold() {
    for s in fixtures(500, 14) {
        for dir in [Direction::Horizontal, Direction::Vertical] {
            let dec = cylinder_decomposition(&s, dir);
            assert_eq!(dec.area(), s.n());
            for a in &dec.cylinders {
                for b in &dec.cylinders {
                    assert_eq!(s.intersection(&a.core, &b.dual_core), 0, "{s}");
                }
            }
            let sp = isotropic_spans(&s, &dec);
            let n_pairs = sp.odd_points / 2;
            assert!(sp.dim_i <= sp.genus);
            let minus_half = if n_pairs == 0 { sp.genus.saturating_sub(1) } else { sp.genus };
            assert!(sp.dim_i_minus <= minus_half, "{s}");
            assert!(sp.dim_i_c <= 2 * n_pairs.saturating_sub(1));
            assert_eq!(sp.dim_i_plus, sp.dim_i, "{s}");
            assert!(sp.dim_i_plus >= sp.dim_i_minus, "{s}");
            if sp.odd_points >= 2 {
                assert_eq!(sp.dim_i_plus, sp.dim_i_minus, "{s}");
            }
            assert!(check_monodromy(&s, &dec), "{s}");
        }
    }
}

#[test]
fn pole_pair_cycles_are_anti_invariant_cycles() {
    for s in fixtures(100, 15) {
        let bd = s.boundary_matrix();
        for c in pole_pair_cycles(&s) {
            assert!(bd.iter().all(|row| row.iter().zip(&c).map(|(a, b)| a * b).sum::<i64>() == 0));
            let sc = s.sigma_primal(&c);
            assert!(sc.iter().zip(&c).all(|(a, b)| *a == -*b));
        }
    }
}

#[test]
fn broken_deck_fails_monodromy() {
    let (mut caught, mut tried) = (0, 0);
    let all = fixtures(50, 16);
    for s in &all {
        let dec = cylinder_decomposition(s, Direction::Horizontal);
        let mut deck = s.deck().to_vec();
        let n = s.n();
        // Swap the images of two squares from different deck orbits.
        let (a, b) = (0, (1..n).find(|&x| x != deck[0]).unwrap_or(0));
        let (da, db) = (deck[a], deck[b]);
        deck[a] = db;
        deck[b] = da;
        deck[da] = b;
        deck[db] = a;
        let broken = s.with_deck(deck);
        if broken.relations_hold() {
            continue;
        }
        tried += 1;
        if !check_monodromy(&broken, &dec) {
            caught += 1;
        }
    }
    assert!(tried >= 40);
    assert_eq!(caught, tried);
}

#[test]
fn leaf_integrals_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let steps = [Step::Up, Step::Down, Step::Left, Step::Right];
    for s in fixtures(100, 18) {
        for dir in [Direction::Horizontal, Direction::Vertical] {
            let dec = cylinder_decomposition(&s, dir);
            for (i, c) in dec.cylinders.iter().enumerate() {
                let x = c.rows[0][0];
                let across = match dir {
                    Direction::Horizontal => Step::Up,
                    Direction::Vertical => Step::Right,
                };
                let li = leaf_integral(&s, &dec, x, &vec![across; c.height]).unwrap();
                assert!(li.agrees());
                assert_eq!(li.value(), c.height as i64, "cylinder {i} of {s}");
            }
            let starts: Vec<usize> = (0..s.n()).filter(|&x| dec.in_first_row[x]).collect();
            for _ in 0..20 {
                let mut x = starts[rng.gen_range(0..starts.len())];
                let start = x;
                let mut path = Vec::new();
                for k in 0..200 {
                    let st = steps[rng.gen_range(0..4)];
                    x = match st {
                        Step::Up => s.v()[x],
                        Step::Down => s.v().iter().position(|&y| y == x).unwrap(),
                        Step::Right => s.h()[x],
                        Step::Left => s.h().iter().position(|&y| y == x).unwrap(),
                    };
                    path.push(st);
                    if k > 10 && dec.in_first_row[x] {
                        break;
                    }
                }
                if dec.in_first_row[x] {
                    let li = leaf_integral(&s, &dec, start, &path).unwrap();
                    assert!(li.agrees(), "{li:?} on {s}");
                }
            }
        }
    }
}



#[test]
fn one_quotient_cylinder_has_rank_one() {
    let mut found = 0;
    for s in fixtures(300, 19) {
        let dec = cylinder_decomposition(&s, Direction::Horizontal);
        if dec.cylinders.len() != 2 || dec.deck_images(&s) != vec![1, 0] {
            continue;
        }
        found += 1;
        let sp = isotropic_spans(&s, &dec);
        // The lifted waist curve meets some dual cycle, so its class is nonzero.
        let a = &dec.cylinders[0].core;
        let p: Vec<i64> = a.iter().zip(&s.sigma_primal(a)).map(|(x, y)| x + y).collect();
        assert!(dual_cycles(&s).iter().any(|b| s.intersection(&p, b) != 0));
        assert_eq!(sp.dim_i, 1, "{s}");
    }
    assert!(found > 0);
}
