use mmdlab_core::estimators::{volume_exponent, walk_exponent};
use mmdlab_core::generators::{
    all_pairs, apply_weight, generate, glue_at_point, weight_admissibility_check, GeneratorSpec, WeightForm, WeightSpec,
};
use mmdlab_core::linalg::SolverConfig;
use mmdlab_core::scaling::validate_scaling;
use mmdlab_core::{RegionSpec, ScalingFunction};
use proptest::prelude::*;

#[test]
fn vicsek_counts_follow_the_five_fold_recursion() {
    // Five copies share the four junctions with the centre copy.
    let mut v = 5u64;
    for level in 0..=5 {
        let g = generate(&GeneratorSpec::vicsek_tree(level)).unwrap();
        assert_eq!(g.len() as u64, v, "level {level}");
        assert_eq!(g.edge_count(), g.len() - 1);
        assert!(g.is_connected());
        v = 5 * v - 4;
    }
}

#[test]
fn generation_is_deterministic() {
    for spec in [GeneratorSpec::sierpinski_gasket(4), GeneratorSpec::vicsek_tree(3), GeneratorSpec::sierpinski_carpet(2)] {
        let (a, b) = (generate(&spec).unwrap(), generate(&spec).unwrap());
        assert_eq!(a.measures(), b.measures());
        assert_eq!(a.edges(), b.edges());
        assert!((0..a.len()).all(|v| a.coords(v) == b.coords(v)));
    }
}

#[test]
fn glued_counts() {
    let a = generate(&GeneratorSpec::sierpinski_gasket(2)).unwrap();
    let b = generate(&GeneratorSpec::lattice(2, 5)).unwrap();
    let g = glue_at_point(&a, &b, 1, 12).unwrap();
    assert_eq!(g.len(), a.len() + b.len() - 1);
    assert_eq!(g.edge_count(), a.edge_count() + b.edge_count());
    assert!((g.total_measure() - a.total_measure() - b.total_measure()).abs() < 1e-12);
}

#[test]
fn weighted_line_ball_mass() {
    let line = generate(&GeneratorSpec::path(20)).unwrap();
    let w = WeightSpec { origin: 10, alpha: 2.0, form: WeightForm::Power };
    let g = apply_weight(&line, &w).unwrap();
    let mass = g.measure_of(&RegionSpec::Ball { center: 10, radius: 3.0 }).unwrap();
    assert_eq!(mass, 27.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn weighted_energy_is_weighted_energy_measure(
        f in prop::collection::vec(-5.0f64..5.0, 15),
        alpha in -2.0f64..3.0,
        origin in 0usize..15,
    ) {
        let base = generate(&GeneratorSpec::sierpinski_gasket(2)).unwrap();
        let w = WeightSpec { origin, alpha, form: WeightForm::Bracket };
        let weighted = apply_weight(&base, &w).unwrap();
        let weights = w.values(&base).unwrap();
        let gamma = base.energy_measure_vector(&f).unwrap();
        let want: f64 = weights.iter().zip(&gamma).map(|(w, g)| w * g).sum();
        let got = weighted.energy(&f);
        prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1e-300));
    }
}

/// `max |log(w(x)/w(y)) − α log(d(o,x)/d(o,y))|` over the pairs.
fn worst_deviation(dist: &[f64], w: &[f64], pairs: &[(usize, usize)], alpha: f64) -> f64 {
    pairs
        .iter()
        .map(|&(x, y)| {
            let (x, y) = if dist[x] <= dist[y] { (x, y) } else { (y, x) };
            ((w[x] / w[y]).ln() - alpha * (dist[x] / dist[y]).ln()).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn polynomial_weight_is_admissible() {
    let g = generate(&GeneratorSpec::path(60)).unwrap();
    let spec = WeightSpec { origin: 0, alpha: 2.0, form: WeightForm::Power };
    let w = spec.values(&g).unwrap();
    let pairs: Vec<_> = all_pairs(g.len()).into_iter().filter(|&(x, _)| x >= 1).collect();
    let dist = g.distances_from(0);
    let declared = weight_admissibility_check(&g, 0, &w, Some(2.0), &pairs, 1e3).unwrap();
    assert!(declared.pass && declared.c <= 4.0, "{declared:?}");
    assert!((declared.c.ln() - worst_deviation(&dist, &w, &pairs, 2.0)).abs() < 1e-12);
    let fitted = weight_admissibility_check(&g, 0, &w, None, &pairs, 1e3).unwrap();
    assert!(fitted.c <= declared.c * (1.0 + 1e-9));
    // The fitted exponent is a minimax: no exponent on a fine grid does better.
    let best = (0..=400).map(|i| worst_deviation(&dist, &w, &pairs, i as f64 / 100.0)).fold(f64::INFINITY, f64::min);
    assert!(fitted.c.ln() <= best + 1e-6);
}

#[test]
fn constant_weight_fits_exactly() {
    let g = generate(&GeneratorSpec::path(30)).unwrap();
    let pairs: Vec<_> = all_pairs(g.len()).into_iter().filter(|&(x, _)| x >= 1).collect();
    let rep = weight_admissibility_check(&g, 0, &vec![1.0; g.len()], None, &pairs, 1e3).unwrap();
    assert!(rep.alpha1.abs() < 1e-9 && rep.c == 1.0, "{rep:?}");
}

#[test]
fn exponential_weight_is_rejected_with_witness() {
    let g = generate(&GeneratorSpec::path(40)).unwrap();
    let w: Vec<f64> = g.distances_from(0).iter().map(|d| d.exp()).collect();
    let pairs: Vec<_> = all_pairs(g.len()).into_iter().filter(|&(x, _)| x >= 1).collect();
    let rep = weight_admissibility_check(&g, 0, &w, None, &pairs, 1e3).unwrap();
    assert!(!rep.pass && rep.c > 1e3);
    let (x, y) = rep.witness.unwrap();
    let dist = g.distances_from(0);
    let dev = ((w[x] / w[y]).ln() - rep.alpha1 * (dist[x] / dist[y]).ln()).abs();
    assert!((dev.exp() - rep.c).abs() < 1e-9 * rep.c);
}

#[test]
fn gasket_resistance_table_is_regular() {
    // Ψ(2^k) = 5^k: resistance scaling of the gasket.
    let table: Vec<(f64, f64)> = (-6..=0).map(|k| (2f64.powi(k), 5f64.powi(k))).collect();
    let psi = ScalingFunction::tabulated(table).unwrap();
    let samples = 25;
    let (lo, hi) = (1.0 / 64.0, 1.0);
    let rep = validate_scaling(&psi, (lo, hi), samples).unwrap();
    let beta = 5f64.ln() / 2f64.ln();
    assert!((rep.beta1 - beta).abs() < 1e-9 && (rep.beta2 - beta).abs() < 1e-9, "{rep:?}");
    // Exhaustive pairwise scan over the same grid.
    let step = (hi / lo).ln() / (samples - 1) as f64;
    let radii: Vec<f64> = (0..samples).map(|i| if i + 1 == samples { hi } else { (lo.ln() + step * i as f64).exp() }).collect();
    let mut need: f64 = 1.0;
    for (i, &r) in radii.iter().enumerate() {
        for &big in &radii[i + 1..] {
            let q = psi.eval(big) / psi.eval(r);
            let t = big / r;
            need = need.max(t.powf(rep.beta1) / q).max(q / t.powf(rep.beta2));
        }
    }
    assert!(rep.feasible);
    assert!((rep.c_reg - need).abs() < 1e-9 * need, "{} vs {need}", rep.c_reg);
}

#[test]
fn gasket_exponents() {
    let g = generate(&GeneratorSpec::sierpinski_gasket(7)).unwrap();
    let h = g.min_edge_length();
    let radii: Vec<f64> = (2..=5).map(|k| h * 2f64.powi(k) + 0.5 * h).collect();
    let df = volume_exponent(&g, 0, &radii).unwrap();
    assert!((df - 3f64.ln() / 2f64.ln()).abs() < 0.1, "d_f = {df}");
    let dw = walk_exponent(&g, 0, &radii, &SolverConfig::default()).unwrap();
    assert!((dw - 5f64.ln() / 2f64.ln()).abs() < 0.15, "d_w = {dw}");
}
