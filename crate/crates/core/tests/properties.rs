//! Property tests for the structural invariants.

use ghlab::fields::{CoefficientMap, LieElement};
use ghlab::ghcheck::generator_minima;
use ghlab::operator::{
    apply_composed, apply_operator, freq_box, quadratic_form, random_data, random_real_trig,
    random_skew_field, random_small, FieldTerm, FourierData, OperatorSpec, QChoice,
};
use ghlab::spectral::{enumerate_shells, GroupSpec, Mode};
use ghlab::{Rational, Scalar};
use num_complex::Complex;
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn random_term<S: Scalar>(rng: &mut ChaCha8Rng, g: &GroupSpec, dim_t: usize) -> FieldTerm<S> {
    let comps = (0..g.dim())
        .map(|_| random_real_trig::<S, _>(rng, dim_t, 1, 2))
        .collect();
    FieldTerm {
        a: CoefficientMap::new(dim_t, comps).unwrap(),
        w: random_skew_field::<S, _>(rng, dim_t, 1, 1),
    }
}

fn random_operator<S: Scalar>(
    rng: &mut ChaCha8Rng,
    g: &GroupSpec,
    dim_t: usize,
    remainder: usize,
) -> OperatorSpec<S> {
    let terms = (0..rng.gen_range(1..=2))
        .map(|_| random_term(rng, g, dim_t))
        .collect();
    let rem = (0..remainder).map(|_| random_term(rng, g, dim_t)).collect();
    OperatorSpec::new(g.clone(), dim_t, QChoice::LaplacianT, terms, rem).unwrap()
}

/// Data on up to two shells of `lambda <= lmax`.
fn random_psi<S: Scalar>(
    rng: &mut ChaCha8Rng,
    g: &GroupSpec,
    dim_t: usize,
    lmax: i64,
) -> FourierData<S> {
    let shells = enumerate_shells(g, &int(lmax)).unwrap();
    let mut modes: Vec<Mode> = Vec::new();
    for _ in 0..2 {
        modes.extend(shells[rng.gen_range(0..shells.len())].modes.iter().cloned());
    }
    modes.sort();
    modes.dedup();
    random_data::<S, _>(rng, g, &freq_box(dim_t, 1), &modes).unwrap()
}

fn t2() -> GroupSpec {
    GroupSpec::Torus(2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn operator_is_linear(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_operator::<Rational>(&mut rng, &t2(), 1, 1);
        let f = random_psi::<Rational>(&mut rng, &t2(), 1, 5);
        let g = random_psi::<Rational>(&mut rng, &t2(), 1, 5);
        let a = Complex::new(random_small::<Rational, _>(&mut rng), random_small::<Rational, _>(&mut rng));
        let lhs = apply_operator(&p, &f.scale(&a).add(&g)).unwrap();
        let rhs = apply_operator(&p, &f).unwrap().scale(&a).add(&apply_operator(&p, &g).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn expanded_and_composed_forms_agree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_operator::<Rational>(&mut rng, &t2(), 1, 1);
        let f = random_psi::<Rational>(&mut rng, &t2(), 1, 5);
        prop_assert_eq!(apply_operator(&p, &f).unwrap(), apply_composed(&p, &f).unwrap());
    }

    #[test]
    fn operator_commutes_with_group_projection(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_operator::<Rational>(&mut rng, &t2(), 1, 1);
        let f = random_psi::<Rational>(&mut rng, &t2(), 1, 5);
        for lam in f.g_lambdas().unwrap() {
            let a = apply_operator(&p, &f.project_g(&lam).unwrap()).unwrap();
            let b = apply_operator(&p, &f).unwrap().project_g(&lam).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn quadratic_form_is_real_and_nonnegative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_operator::<Rational>(&mut rng, &t2(), 1, 1);
        let f = random_psi::<Rational>(&mut rng, &t2(), 1, 5);
        let q = quadratic_form(&p, &f).unwrap();
        prop_assert!(q.im.is_zero());
        prop_assert!(q.re >= Rational::zero());
    }

    #[test]
    fn su2_quadratic_form_is_real_and_nonnegative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_operator::<f64>(&mut rng, &GroupSpec::Su2, 1, 0);
        let f = random_psi::<f64>(&mut rng, &GroupSpec::Su2, 1, 6);
        let q = quadratic_form(&p, &f).unwrap();
        let scale = 1.0 + q.re.abs();
        prop_assert!(q.im.abs() <= 1e-9 * scale);
        prop_assert!(q.re >= -1e-9 * scale);
    }

    #[test]
    fn remainder_never_decreases_the_form(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_operator::<Rational>(&mut rng, &t2(), 1, 2);
        let f = random_psi::<Rational>(&mut rng, &t2(), 1, 5);
        let with = quadratic_form(&p, &f).unwrap();
        let without = quadratic_form(&p.without_remainder(), &f).unwrap();
        prop_assert!(with.re >= without.re);
    }

    #[test]
    fn laplacians_act_blockwise(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_psi::<Rational>(&mut rng, &t2(), 2, 8);
        let d = f.laplacian_t().add(&f.laplacian_g().unwrap());
        for ((tau, mode), c) in f.coeffs() {
            let mu: i64 = tau.iter().map(|k| k * k).sum();
            let want = c * Complex::new(int(mu) + t2().mode_lambda(mode).unwrap(), Rational::zero());
            prop_assert_eq!(d.get(tau, mode), want);
        }
    }

    #[test]
    fn appending_a_field_never_lowers_sigma(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=2);
        let mut gens: Vec<LieElement<Rational>> =
            (0..n).map(|_| LieElement::new((0..2).map(|_| random_small::<Rational, _>(&mut rng)).collect())).collect();
        gens.retain(|g| !g.norm_sq().is_zero());
        prop_assume!(!gens.is_empty());
        let before = generator_minima(&t2(), &gens, &int(400)).unwrap();
        gens.push(LieElement::new((0..2).map(|_| random_small::<Rational, _>(&mut rng)).collect()));
        let after = generator_minima(&t2(), &gens, &int(400)).unwrap();
        prop_assert_eq!(before.len(), after.len());
        for (b, a) in before.iter().zip(&after) {
            prop_assert!(a.sigma_sq.as_ref().unwrap() >= b.sigma_sq.as_ref().unwrap());
        }
    }

    #[test]
    fn sigma_is_at_most_the_field_norm_bound(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gens: Vec<LieElement<Rational>> = (0..rng.gen_range(1..=3))
            .map(|_| LieElement::new((0..2).map(|_| random_small::<Rational, _>(&mut rng)).collect()))
            .collect();
        prop_assume!(gens.iter().any(|g| !g.norm_sq().is_zero()));
        let b: Rational = gens.iter().map(|g| g.norm_sq()).fold(Rational::zero(), |x, y| x + y);
        for m in generator_minima(&t2(), &gens, &int(400)).unwrap() {
            prop_assert!(m.sigma_sq.clone().unwrap() <= &b * &m.lambda);
        }
    }

    #[test]
    fn su2_sigma_is_at_most_the_field_norm_bound(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gens: Vec<LieElement<f64>> = (0..rng.gen_range(1..=3))
            .map(|_| LieElement::new((0..3).map(|_| random_small::<f64, _>(&mut rng)).collect()))
            .collect();
        prop_assume!(gens.iter().any(|g| g.norm_sq() > 0.0));
        let b: f64 = gens.iter().map(|g| g.norm_sq()).sum();
        for m in generator_minima(&GroupSpec::Su2, &gens, &int(30)).unwrap() {
            prop_assert!(m.sigma_min <= (b * m.lambda_f64()).sqrt() * (1.0 + 1e-12));
        }
    }
}
