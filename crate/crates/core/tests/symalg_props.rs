use plectic_core::grpalg::padic_rank;
use plectic_core::padic::Padic;
use plectic_core::symalg::{collapse, fold_matrix, mu, sqrt_ratio, DenseTensor, SymAlgError, SymTensor};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const P: u32 = 5;
const N: i64 = 30;

fn c(n: i64) -> Padic {
    Padic::from_i64(P, n, N)
}

fn random_tensor(dims: &[usize], rng: &mut ChaCha8Rng) -> DenseTensor {
    let len = dims.iter().product();
    DenseTensor::from_coeffs(dims.to_vec(), (0..len).map(|_| Padic::random_integer(P, N, rng)).collect())
}

fn random_sym(nvars: usize, degree: usize, rng: &mut ChaCha8Rng) -> SymTensor {
    let dims = vec![nvars; degree];
    collapse(&random_tensor(&dims, rng))
}

#[test]
fn mu_is_injective_on_basis_of_rank_two_pair() {
    let mut columns = vec![];
    for i in 0..2 {
        for j in 0..2 {
            let mut e = vec![c(0), c(0)];
            e[i] = c(1);
            let mut f = vec![c(0), c(0)];
            f[j] = c(1);
            let image = mu(&DenseTensor::pure(&[e, f]));
            // coordinates in the 10 degree-2 monomials of 4 variables
            let mut col = vec![];
            for a in 0..4u16 {
                for b in a..4u16 {
                    let mut k = vec![0u16; 4];
                    k[a as usize] += 1;
                    k[b as usize] += 1;
                    col.push(image.coefficient(&k).cloned().unwrap_or_else(|| c(0)));
                }
            }
            columns.push(col);
        }
    }
    assert_eq!(padic_rank(&columns).0, 4);
}

#[test]
fn mu_injective_for_scenario_shapes() {
    // r-fold tensors of rank-2 point completions, r = 2 and 4
    for r in [2usize, 4] {
        let dims = vec![2; r];
        let total: usize = dims.iter().product();
        let mut images = vec![];
        for flat in 0..total {
            let mut t = DenseTensor::zero(dims.clone(), P, N);
            t.set(&DenseTensor::unflatten(&dims, flat), c(1));
            images.push(mu(&t));
        }
        let keys: std::collections::BTreeSet<_> =
            images.iter().flat_map(|m| m.terms().map(|(k, _)| k.clone())).collect();
        let columns: Vec<Vec<Padic>> = images
            .iter()
            .map(|m| keys.iter().map(|k| m.coefficient(k).cloned().unwrap_or_else(|| c(0))).collect())
            .collect();
        assert_eq!(padic_rank(&columns).0, total);
    }
}

#[test]
fn mu_is_bilinear() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let m = vec![c(3), c(7)];
    let n = vec![c(-2), c(4), c(9)];
    let a = Padic::random_integer(P, N, &mut rng);
    let lhs = mu(&DenseTensor::pure(&[m.iter().map(|x| &a * x).collect(), n.clone()]));
    let rhs = mu(&DenseTensor::pure(&[m, n])).scale(&a);
    assert!(lhs.agreement(&rhs) >= N);
}

#[test]
fn fold_after_mu_is_collapse() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let e1 = vec![c(1), c(0)];
    let e2 = vec![c(0), c(1)];
    let t = DenseTensor::pure(&[e1, e2]);
    let folded = mu(&t).map_linear(&fold_matrix(2, 2, P, N));
    assert!(folded.agreement(&collapse(&t)) >= N);
    for n in 2..=4 {
        let t = random_tensor(&vec![3; n], &mut rng);
        let folded = mu(&t).map_linear(&fold_matrix(3, n, P, N));
        assert!(folded.agreement(&collapse(&t)) >= N);
    }
}

#[test]
fn no_zero_divisors() {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    for _ in 0..500 {
        let da = rng.gen_range(1..4);
        let db = rng.gen_range(1..4);
        let mut a = random_sym(3, da, &mut rng);
        let mut b = random_sym(3, db, &mut rng);
        // force unit leading coefficients
        let (ka, _) = a.leading().map(|(k, v)| (k.clone(), v.clone())).unwrap();
        a = a.add(&SymTensor::monomial(&ka, Padic::random_unit(P, N, &mut rng))).unwrap();
        let (kb, _) = b.leading().map(|(k, v)| (k.clone(), v.clone())).unwrap();
        b = b.add(&SymTensor::monomial(&kb, Padic::random_unit(P, N, &mut rng))).unwrap();
        if a.leading().unwrap().1.valuation() != Some(0) || b.leading().unwrap().1.valuation() != Some(0) {
            continue;
        }
        assert!(!a.product(&b).unwrap().is_zero());
    }
}

#[test]
fn sqrt_ratio_recovers_scalars_and_rejects_perturbations() {
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    for _ in 0..200 {
        let y = random_sym(3, 2, &mut rng);
        let a = Padic::random_unit(P, N, &mut rng);
        let x = y.scale(&a);
        let r = sqrt_ratio(&x, &y).unwrap();
        assert_eq!(r.root.agreement(&a), N);
        // squaring oracle: any nonzero coefficient ratio of x² and y² gives C
        let x2 = x.product(&x).unwrap();
        let y2 = y.product(&y).unwrap();
        let (k, cy) = y2.terms().find(|(_, v)| v.valuation() == Some(0)).unwrap();
        let ratio = x2.coefficient(k).unwrap().checked_div(cy).unwrap();
        assert!(ratio.agreement(&r.square) >= N);

        let mut bumped = x.clone();
        let keys: Vec<Vec<u16>> = x.terms().map(|(k, _)| k.clone()).collect();
        let k = &keys[rng.gen_range(0..keys.len())];
        let shift = rng.gen_range(0..N - 1);
        bumped = bumped.add(&SymTensor::monomial(k, Padic::one(P, N).shift(shift))).unwrap();
        assert_eq!(sqrt_ratio(&bumped, &y).unwrap_err(), SymAlgError::NotProportional);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sqrt_ratio_square_matches(coeffs in prop::collection::vec(-200i64..200, 6), a in 1i64..1000) {
        prop_assume!(a % 5 != 0);
        prop_assume!(coeffs.iter().any(|&v| v % 5 != 0));
        let mut y = SymTensor::zero(3, 2);
        let keys = [[2u16, 0, 0], [1, 1, 0], [1, 0, 1], [0, 2, 0], [0, 1, 1], [0, 0, 2]];
        for (k, &v) in keys.iter().zip(&coeffs) {
            y = y.add(&SymTensor::monomial(k, c(v))).unwrap();
        }
        let r = sqrt_ratio(&y.scale(&c(a)), &y).unwrap();
        prop_assert_eq!(r.root.agreement(&c(a)), N);
        prop_assert_eq!(r.square.agreement(&c(a * a)), N);
    }
}
