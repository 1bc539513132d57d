use num_bigint::BigInt;
use num_traits::Zero;
use plectic_core::grpalg::{padic_rank, GroupAlgebraElem, GroupShape};
use plectic_core::padic::{Padic, QuadExt};
use plectic_core::plectic::*;
use plectic_core::symalg::{DenseTensor, SymTensor};
use plectic_core::tate::TateCurve;
use plectic_core::units::norm_one_unit;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const P: u32 = 5;
const N: i64 = 40;

fn c(n: i64) -> Padic {
    Padic::from_i64(P, n, N)
}

fn curve(a: i64) -> TateCurve {
    TateCurve::new(Padic::from_i64(P, 5, N), N, a).unwrap()
}

fn random_tensor(d: usize, r: usize, rng: &mut ChaCha8Rng) -> DenseTensor {
    let dims = vec![d; r];
    let len = dims.iter().product();
    DenseTensor::from_coeffs(dims, (0..len).map(|_| Padic::random_integer(P, N, rng)).collect())
}

fn diag(values: &[i64]) -> Vec<Vec<Padic>> {
    (0..values.len()).map(|i| (0..values.len()).map(|j| if i == j { c(values[i]) } else { c(0) }).collect()).collect()
}

fn config(t: u32, a: i64, epsilon: i64, divisors: Vec<u32>) -> PlecticConfig {
    let r = 1usize << t;
    let shape = GroupShape::new(divisors, r, 2 * r + 2, P, N).unwrap();
    let order = shape.order();
    PlecticConfig::new(
        t,
        epsilon,
        curve(a),
        shape,
        character_table(t),
        (0..r).collect(),
        vec![1; order],
        vec![1; order],
    )
    .unwrap()
}

#[test]
fn projector_algebra_on_random_tensors() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for r in [2usize, 4] {
        for (sigma, d) in [(diag(&[1, -1]), 2usize), (diag(&[-1, 1]), 2), (diag(&[1, 1, -1]), 3)] {
            for a in [1i64, -1] {
                for _ in 0..(100 / 12 + 1) {
                    let x = random_tensor(d, r, &mut rng);
                    let plus = projector(&x, &sigma, a, true);
                    let minus = projector(&x, &sigma, a, false);
                    assert!(projector(&minus, &sigma, a, true).is_zero());
                    assert!(projector(&plus, &sigma, a, false).is_zero());
                    let two_r = c(1 << r);
                    assert!(projector(&plus, &sigma, a, true).agreement(&plus.scale(&two_r)) >= N);
                    assert!(projector(&minus, &sigma, a, false).agreement(&minus.scale(&two_r)) >= N);
                }
            }
        }
    }
}

#[test]
fn minus_projector_kills_frobenius_fixed_tensors_in_split_case() {
    let local = LocalPoints::new(&curve(1)).unwrap();
    // u ∈ Q_p gives a σ-fixed point
    let img = local.complete_point(&QuadExt::from_i64(P, 7, N)).unwrap();
    let x = DenseTensor::pure(&[img.clone(), img]);
    assert!(projector(&x, &local.sigma_matrix(), 1, false).is_zero());
    assert!(!projector(&x, &local.sigma_matrix(), -1, false).is_zero());
}

#[test]
fn determinant_map_is_alternating() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let v = |rng: &mut ChaCha8Rng| vec![Padic::random_integer(P, N, rng), Padic::random_integer(P, N, rng)];
    let (a, b, x, y) = (v(&mut rng), v(&mut rng), v(&mut rng), v(&mut rng));
    // r = 2: rows (a, b), (x, y) give a⊗y − x⊗b
    let det = det_map(&[vec![a.clone(), b.clone()], vec![x.clone(), y.clone()]]);
    let expected = DenseTensor::pure(&[a.clone(), y.clone()]).sub(&DenseTensor::pure(&[x.clone(), b.clone()]));
    assert!(det.agreement(&expected) >= N);
    let swapped = det_map(&[vec![x.clone(), y.clone()], vec![a.clone(), b.clone()]]);
    assert!(swapped.add(&det).is_zero());
    assert!(det_map(&[vec![a.clone(), b.clone()], vec![a.clone(), b.clone()]]).is_zero());
    assert_eq!(det_map(&[vec![a.clone()]]), DenseTensor::pure(std::slice::from_ref(&a)));
    // r = 3 against cofactor expansion along the first row
    let m: Vec<Vec<Vec<Padic>>> = (0..3).map(|_| (0..3).map(|_| v(&mut rng)).collect()).collect();
    let full = det_map(&m);
    let mut cof = DenseTensor::zero(vec![2; 3], P, N);
    for i in 0..3 {
        let minor: Vec<Vec<Vec<Padic>>> =
            (0..3).filter(|&k| k != i).map(|k| vec![m[k][1].clone(), m[k][2].clone()]).collect();
        let sub = det_map(&minor);
        let mut term = DenseTensor::zero(vec![2; 3], P, N);
        for flat in 0..8 {
            let idx = DenseTensor::unflatten(&[2, 2, 2], flat);
            term.set(&idx, &m[i][0][idx[0]] * sub.get(&idx[1..]));
        }
        cof = if i % 2 == 0 { cof.add(&term) } else { cof.sub(&term) };
    }
    assert!(full.agreement(&cof) >= N);
}

#[test]
fn norm_map_examples() {
    let v = vec![c(3), c(0)];
    let w = vec![c(0), c(2)];
    let n = norm_map(&DenseTensor::pure(&[v.clone(), v.clone(), v.clone()]));
    assert_eq!(n.coefficient(&[3, 0]), Some(&c(27)));
    let sym = DenseTensor::pure(&[v.clone(), w.clone()]).add(&DenseTensor::pure(&[w, v]));
    assert_eq!(norm_map(&sym).coefficient(&[1, 1]), Some(&c(12)));
}

#[test]
fn norm_is_injective_on_minus_eigenspace() {
    // pr^− has rank one per factor; the norm of the minus line for r ≤ 4
    let local = LocalPoints::new(&curve(-1)).unwrap();
    let sigma = local.sigma_matrix();
    for r in [1usize, 2, 4] {
        let dims = vec![2; r];
        let mut columns = vec![];
        for flat in 0..(1 << r) {
            let mut e = DenseTensor::zero(dims.clone(), P, N);
            e.set(&DenseTensor::unflatten(&dims, flat), c(1));
            let img = norm_map(&projector(&e, &sigma, -1, false));
            let mut col = vec![];
            for k in 0..=r as u16 {
                col.push(img.coefficient(&[k, r as u16 - k]).cloned().unwrap_or_else(|| c(0)));
            }
            columns.push(col);
        }
        // the minus eigenspace is one-dimensional and its image is nonzero
        assert_eq!(padic_rank(&columns).0, 1);
    }
}

#[test]
fn lift_inverts_tate_image() {
    let local = LocalPoints::new(&curve(1)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let zero = DenseTensor::zero(vec![2, 2], P, N);
    assert!(lift_invariant(&local, &zero).unwrap().is_zero());
    for r in [1usize, 2, 3] {
        let q = Padic::random_integer(P, N, &mut rng);
        let img = tate_image(&local, r, &q).unwrap();
        assert!(lift_invariant(&local, &img).unwrap().agreement(&q) >= N - 10);
    }
    let mut bad = zero.clone();
    bad.set(&[0, 1], c(1));
    assert_eq!(lift_invariant(&local, &bad).unwrap_err(), PlecticError::NotInImage);
    // factor-wise coordinates of (a·u₀) ⊗ (b·u₀)
    let (a, b) = (c(7), c(-3));
    let u0 = norm_one_unit(P, N).unwrap();
    let ia = local.complete_point(&u0.pow(7)).unwrap();
    let ib = local.complete_point(&u0.pow(3).inverse().unwrap()).unwrap();
    let pa = lift_invariant(&local, &DenseTensor::pure(std::slice::from_ref(&ia))).unwrap();
    let pb = lift_invariant(&local, &DenseTensor::pure(std::slice::from_ref(&ib))).unwrap();
    assert!(pa.agreement(&a) >= N - 10 && pb.agreement(&b) >= N - 10);
    let joint = lift_invariant(&local, &DenseTensor::pure(&[ia, ib])).unwrap();
    assert!(joint.agreement(&(&a * &b)) >= N - 10);
}

#[test]
fn drec_examples() {
    let shape = GroupShape::new(vec![], 2, 4, P, N).unwrap();
    assert!(drec(&PlecticInvariant::pure(1, c(0), 1), &shape).unwrap().is_zero());
    let one = drec(&PlecticInvariant::pure(1, c(6), 1), &shape).unwrap();
    assert_eq!(one.coefficient(0, &[1, 0]), c(6));
    assert_eq!(one.terms().count(), 1);
    let two = drec(&PlecticInvariant::pure(2, c(1), 1), &shape).unwrap();
    assert_eq!(two.coefficient(0, &[1, 1]), c(1));
    assert_eq!(two.degree(), 2);
    // injective: distinct group coefficients stay distinct
    let shape = GroupShape::new(vec![2, 2], 2, 4, P, N).unwrap();
    let mut columns = vec![];
    for g in 0..4 {
        let mut coeffs = vec![c(0); 4];
        coeffs[g] = c(1);
        let piece = drec(&PlecticInvariant { r: 2, coeffs }, &shape).unwrap();
        columns.push((0..4).map(|h| piece.coefficient(h, &[1, 1])).collect::<Vec<_>>());
    }
    assert_eq!(padic_rank(&columns).0, 4);
    let too_small = GroupShape::new(vec![], 1, 4, P, N).unwrap();
    assert!(drec(&PlecticInvariant::pure(2, c(1), 1), &too_small).is_err());
}

#[test]
fn leading_term_examples() {
    let shape = GroupShape::new(vec![], 2, 4, P, N).unwrap();
    assert!(gz_leading_term(&PlecticInvariant::pure(1, c(0), 1), &shape).unwrap().is_zero());
    let one = gz_leading_term(&PlecticInvariant::pure(1, c(6), 1), &shape).unwrap();
    assert_eq!(one.coefficient(0, &[1, 0]), c(-3));
    let two = gz_leading_term(&PlecticInvariant::pure(2, c(8), 1), &shape).unwrap();
    assert_eq!(two.coefficient(0, &[1, 1]), c(2));
}

/// `2^r ∂^r(ℒ) = d rec_S(Q^∨)` with `Q^∨` formed on the invariant side.
#[test]
fn reconstructed_series_satisfies_leading_term_relation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for r in [2usize, 4] {
        let shape = GroupShape::new(vec![2, 2], r, r + 1, P, N).unwrap();
        for _ in 0..5 {
            let coeffs: Vec<Padic> = (0..4).map(|_| Padic::random_integer(P, N, &mut rng)).collect();
            let q = PlecticInvariant { r, coeffs };
            let mut series = lift_piece(&gz_leading_term(&q, &shape).unwrap());
            // higher-order terms do not affect the leading term
            let mut alpha = vec![0u8; r];
            alpha[0] = r as u8 + 1;
            series = &series + &GroupAlgebraElem::monomial(&shape, 3, &alpha, c(rng.gen_range(1..100)));
            let lhs = series.leading_term(r).unwrap().scale(&c(1 << r));
            let rhs = drec(&q.involution(&shape), &shape).unwrap();
            assert!(lhs.agreement(&rhs) >= N);
        }
    }
}

#[test]
fn sign_check_examples() {
    // r = 2, ε ε_S = +1: consistent
    let cfg = config(1, 1, 1, vec![2]);
    let q = PlecticInvariant::pure(2, c(3), 2);
    let v = sign_check(&cfg, &q).unwrap();
    assert_eq!((v.epsilon, v.epsilon_s), (1, 1));
    // r = 2, a = +1, ε = −1: inconsistent
    let cfg = config(1, 1, -1, vec![2]);
    assert_eq!(sign_check(&cfg, &q).unwrap_err(), PlecticError::InconsistentSigns);
    // r = 1, ε ε_S = −1: consistent
    let cfg = config(0, 1, 1, vec![]);
    assert_eq!(cfg.epsilon_s(), -1);
    assert!(sign_check(&cfg, &PlecticInvariant::pure(1, c(5), 1)).is_ok());
    let cfg = config(0, 1, -1, vec![]);
    assert_eq!(sign_check(&cfg, &PlecticInvariant::pure(1, c(5), 1)).unwrap_err(), PlecticError::InconsistentSigns);
}

#[test]
fn sign_check_finds_translating_element() {
    // Q = c([1] − [h]) with h of order 2 has trivial specialization; the
    // functional equation holds with g = h even when (−1)^r ≠ ε ε_S.
    let cfg = config(1, 1, -1, vec![2]);
    let q = PlecticInvariant { r: 2, coeffs: vec![c(4), c(-4)] };
    let v = sign_check(&cfg, &q).unwrap();
    assert_eq!(v.g, 1);
}

fn family(units: Vec<QuadExt>, k: Vec<i64>, c_num: i64, c_den: i64) -> SyntheticPointFamily {
    SyntheticPointFamily {
        units,
        k: k.into_iter().map(c).collect(),
        c_chi: Padic::from_ratio(P, c_num, c_den, N).unwrap(),
        c_chi_rational: Some((BigInt::from(c_num), BigInt::from(c_den))),
    }
}

#[test]
fn factorization_on_frobenius_fixed_points_is_zero() {
    let cfg = config(1, 1, 1, vec![2]);
    let local = LocalPoints::new(&cfg.curve).unwrap();
    let fam = family(vec![QuadExt::from_i64(P, 7, N), QuadExt::from_i64(P, 11, N)], vec![1, 1], 4, 1);
    let q_s = PlecticInvariant::pure(2, c(0), 2);
    let v = factorization_check(&cfg, &local, &fam, &q_s, 30).unwrap();
    assert!(!v.norm_nonzero && !v.all_factors_nonzero);
}

#[test]
fn factorization_with_generator_powers() {
    let cfg = config(1, -1, 1, vec![2]);
    let local = LocalPoints::new(&cfg.curve).unwrap();
    let u0 = norm_one_unit(P, N).unwrap();
    let fam = family(vec![u0.clone(), u0.pow(3)], vec![1, 1], 4, 1);
    // Q_η = 2·(1, 3), so N(Q_S) = 2 · 2 · 6 x²
    let q_s = PlecticInvariant::pure(2, c(24), 2);
    let v = factorization_check(&cfg, &local, &fam, &q_s, 30).unwrap();
    assert!(v.sqrt_c.agreement(&c(2)) >= N - 2);
    assert!(v.margin() >= 30);
    assert_eq!(v.c_is_rational_square, Some(true));
    let wrong = PlecticInvariant::pure(2, c(25), 2);
    assert!(matches!(factorization_check(&cfg, &local, &fam, &wrong, 30), Err(PlecticError::IdentityFails { .. })));
}

#[test]
fn forward_invariants_pass_both_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for t in [1u32, 2] {
        let r = 1usize << t;
        let cfg = config(t, -1, 1, vec![2]);
        let local = LocalPoints::new(&cfg.curve).unwrap();
        let units: Vec<QuadExt> = (0..r).map(|_| QuadExt::random_unit(P, N, &mut rng)).collect();
        let fam = family(units, (1..=r as i64).collect(), 9, 4);
        let sqrt_c = Padic::from_ratio(P, -3, 2, N).unwrap();
        let q_s = forward_invariant(&local, &fam, cfg.a, &sqrt_c, cfg.shape.order()).unwrap();
        let v = factorization_check(&cfg, &local, &fam, &q_s, 30).unwrap();
        assert!(v.sqrt_c.agreement(&sqrt_c) >= 30);
        let alg = algebraicity_check(&cfg, &local, &fam, &q_s, &v.sqrt_c, 25).unwrap();
        assert_eq!(alg.table_det.clone() * alg.table_det.clone(), BigInt::from(r.pow(r as u32)));
        assert!(alg.margin() >= 25);
        // a changed unit breaks the factorization
        let mut bad = fam.clone();
        bad.units[r - 1] = &bad.units[r - 1] + &QuadExt::omega(P, N).shift(3);
        assert!(factorization_check(&cfg, &local, &bad, &q_s, 30).is_err());
    }
}

#[test]
fn determinant_norm_reduces_to_table_determinant() {
    // τ all trivial: the matrix has equal columns up to sign, so det w̃ and
    // C_𝔊 both vanish
    let r = 2;
    let shape = GroupShape::new(vec![], r, 2 * r + 2, P, N).unwrap();
    let cfg = PlecticConfig::new(1, 1, curve(1), shape, character_table(1), vec![0, 0], vec![1], vec![1]).unwrap();
    assert!(cfg.table_det().is_zero());
    let local = LocalPoints::new(&cfg.curve).unwrap();
    let u0 = norm_one_unit(P, N).unwrap();
    let fam = family(vec![u0.clone(), u0.pow(2)], vec![1, 1], 1, 1);
    let q_s = PlecticInvariant::pure(r, c(1), 1);
    assert_eq!(
        algebraicity_check(&cfg, &local, &fam, &q_s, &c(1), 25).unwrap_err(),
        PlecticError::CharacterTableDegenerate
    );
    let images: Vec<Vec<Padic>> = fam.units.iter().map(|u| local.complete_point(u).unwrap()).collect();
    let matrix: Vec<Vec<Vec<Padic>>> = (0..2).map(|i| vec![images[i].clone(), images[i].clone()]).collect();
    assert!(norm_map(&det_map(&matrix)).is_zero());
    assert_eq!(SymTensor::zero(2, 2).is_zero(), BigInt::zero().is_zero());
}

#[test]
fn character_table_determinant_matches_permutation_sum() {
    for t in 1..=3u32 {
        let table = character_table(t);
        let r = table.len();
        // brute-force Leibniz sum over S_r
        let mut perm: Vec<usize> = (0..r).collect();
        let mut total = 0i64;
        loop {
            let inversions =
                (0..r).flat_map(|i| (i + 1..r).map(move |j| (i, j))).filter(|&(i, j)| perm[i] > perm[j]).count();
            let sign = if inversions % 2 == 0 { 1 } else { -1 };
            total += sign * (0..r).map(|i| table[perm[i]][i]).product::<i64>();
            // next permutation in lexicographic order
            let Some(k) = (0..r - 1).rev().find(|&k| perm[k] < perm[k + 1]) else { break };
            let l = (k + 1..r).rev().find(|&l| perm[k] < perm[l]).unwrap();
            perm.swap(k, l);
            perm[k + 1..].reverse();
        }
        assert_eq!(BigInt::from(total), char_table_det(t));
        assert_eq!(total.abs(), (r as i64).pow(r as u32 / 2));
    }
}
